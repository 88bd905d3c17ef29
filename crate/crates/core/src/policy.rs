//! Ranking policies.
//!
//! A static policy sorts candidates by score. A stochastic policy is built by
//! Plackett-Luce randomization: items are drawn one at a time without
//! replacement, each draw a softmax over the remaining scores at temperature
//! `beta`. Larger temperatures give flatter softmaxes and more random
//! rankings.
//!
//! Sampling is reproducible per `(seed, query id, sample index)`: each sample
//! owns a ChaCha stream keyed by the seed and the query id, with the sample
//! index selecting the stream. Results do not depend on how samples are
//! scheduled across threads.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::browse::Ranking;
use crate::model::{Catalog, DenseIndex, ItemIx, QueryIx, ScoreTable, SUM_TOLERANCE};
use crate::util::{fnv1a, splitmix64};
use crate::{Error, Result};

/// Largest candidate count `pl_exact_policy` enumerates by default.
pub const DEFAULT_MAX_EXACT: usize = 7;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_SEED: u64 = 42;

/// Below this, the remaining softmax mass is recomputed relative to the
/// largest remaining score.
const RESCALE_FLOOR: f64 = 1e-200;

/// Plackett-Luce sampling settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlConfig {
    /// Softmax temperature.
    pub beta: f64,
    pub samples: usize,
    pub seed: u64,
    /// Stop each ranking after this many draws.
    pub depth: Option<usize>,
}

impl PlConfig {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            depth: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        if self.depth == Some(0) {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "temperature must be positive and finite, got {beta}"
        )))
    }
}

/// How a [`PolicySample`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleMeta {
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub samples: usize,
    pub exact: bool,
}

/// An empirical stochastic policy: weighted rankings for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample {
    query: QueryIx,
    rankings: Vec<(Ranking, f64)>,
    meta: SampleMeta,
}

impl PolicySample {
    /// Builds a policy from explicit weights, which must be positive and sum
    /// to one.
    pub fn from_weighted(query: QueryIx, rankings: Vec<(Ranking, f64)>) -> Result<Self> {
        let samples = rankings.len();
        let p = Self {
            query,
            rankings,
            meta: SampleMeta {
                beta: None,
                seed: None,
                samples,
                exact: false,
            },
        };
        p.check_weights()?;
        if p.rankings.iter().any(|(r, _)| r.query() != query) {
            return Err(Error::InvalidArgument(
                "rankings belong to different queries".into(),
            ));
        }
        Ok(p)
    }

    pub fn query(&self) -> QueryIx {
        self.query
    }

    pub fn rankings(&self) -> &[(Ranking, f64)] {
        &self.rankings
    }

    pub fn meta(&self) -> &SampleMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub(crate) fn check_weights(&self) -> Result<()> {
        if self.rankings.is_empty() {
            return Err(Error::InvalidArgument("policy holds no rankings".into()));
        }
        if self.rankings.iter().any(|(_, w)| w.is_nan() || *w <= 0.0) {
            return Err(Error::InvalidArgument(
                "policy weights must be positive".into(),
            ));
        }
        let total: f64 = self.rankings.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "policy weights sum to {total}"
            )));
        }
        Ok(())
    }

    /// The ranking with the largest total weight. Ties go to the first seen.
    pub fn modal_ranking(&self) -> Option<&Ranking> {
        let mut tallies: Vec<(&Ranking, f64)> = Vec::new();
        for (r, w) in &self.rankings {
            match tallies.iter_mut().find(|(seen, _)| *seen == r) {
                Some(entry) => entry.1 += w,
                None => tallies.push((r, *w)),
            }
        }
        tallies
            .into_iter()
            .fold(None, |best: Option<(&Ranking, f64)>, (r, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((r, w)),
            })
            .map(|(r, _)| r)
    }
}

/// A ranking policy for one query.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Static(Ranking),
    Stochastic(PolicySample),
}

impl Policy {
    pub fn query(&self) -> QueryIx {
        match self {
            Self::Static(r) => r.query(),
            Self::Stochastic(p) => p.query(),
        }
    }
}

/// Candidates sorted by descending score, ties by ascending item id,
/// optionally cut to `depth`.
pub fn static_ranking(
    scores: &ScoreTable,
    catalog: &Catalog,
    query: QueryIx,
    depth: Option<usize>,
) -> Result<Ranking> {
    let mut cands: Vec<(ItemIx, f64)> = scores.candidates(query)?.to_vec();
    cands.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| a.0.name(catalog).cmp(b.0.name(catalog)))
    });
    let keep = depth.map_or(cands.len(), |k| k.min(cands.len()));
    Ranking::new(
        query,
        cands.into_iter().take(keep).map(|(d, _)| d).collect(),
    )
}

/// The RNG for one sample of one query.
pub fn sample_rng(seed: u64, query_id: &str, sample_index: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(fnv1a(query_id.as_bytes())));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(sample_index);
    rng
}

/// Draws one Plackett-Luce ranking of the candidates of `query`.
pub fn pl_sample_one<R: Rng + ?Sized>(
    scores: &ScoreTable,
    query: QueryIx,
    beta: f64,
    depth: Option<usize>,
    rng: &mut R,
) -> Result<Ranking> {
    check_beta(beta)?;
    let cands = scores.candidates(query)?;
    Ok(Ranking::from_distinct(
        query,
        draw_order(cands, beta, depth, rng),
    ))
}

fn draw_order<R: Rng + ?Sized>(
    cands: &[(ItemIx, f64)],
    beta: f64,
    depth: Option<usize>,
    rng: &mut R,
) -> Vec<ItemIx> {
    let n = cands.len();
    let draws = depth.map_or(n, |k| k.min(n));
    let logits: Vec<f64> = cands.iter().map(|&(_, s)| s / beta).collect();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut weights = vec![0.0; n];
    rescale(&logits, &remaining, &mut weights);

    let mut order = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mut total: f64 = remaining.iter().map(|&i| weights[i]).sum();
        if total < RESCALE_FLOOR {
            rescale(&logits, &remaining, &mut weights);
            total = remaining.iter().map(|&i| weights[i]).sum();
        }
        let mut u = rng.gen::<f64>() * total;
        let mut pick = remaining.len() - 1;
        for (pos, &i) in remaining.iter().enumerate() {
            if u < weights[i] {
                pick = pos;
                break;
            }
            u -= weights[i];
        }
        // Rounding can leave u just above the last weight; never pick a
        // zero-weight item when a positive one exists.
        if weights[remaining[pick]] == 0.0 {
            if let Some(pos) = remaining.iter().rposition(|&i| weights[i] > 0.0) {
                pick = pos;
            }
        }
        let chosen = remaining.remove(pick);
        order.push(cands[chosen].0);
    }
    order
}

/// Softmax numerators relative to the largest remaining logit.
fn rescale(logits: &[f64], remaining: &[usize], weights: &mut [f64]) {
    let top = remaining
        .iter()
        .map(|&i| logits[i])
        .fold(f64::NEG_INFINITY, f64::max);
    for &i in remaining {
        weights[i] = (logits[i] - top).exp();
    }
}

/// Draws `config.samples` rankings, each weighted `1/samples`.
pub fn pl_sample_policy(
    scores: &ScoreTable,
    catalog: &Catalog,
    query: QueryIx,
    config: &PlConfig,
) -> Result<PolicySample> {
    config.validate()?;
    let cands = scores.candidates(query)?;
    if !catalog.queries.contains(query) {
        return Err(Error::NotFound(format!(
            "query #{} is not in the catalog",
            query.0
        )));
    }
    let query_id = query.name(catalog);
    let weight = 1.0 / config.samples as f64;
    let rankings: Vec<(Ranking, f64)> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(config.seed, query_id, i as u64);
            let order = draw_order(cands, config.beta, config.depth, &mut rng);
            (Ranking::from_distinct(query, order), weight)
        })
        .collect();
    Ok(PolicySample {
        query,
        rankings,
        meta: SampleMeta {
            beta: Some(config.beta),
            seed: Some(config.seed),
            samples: config.samples,
            exact: false,
        },
    })
}

/// Probability of drawing exactly `ranking` (a full permutation of the
/// candidates).
pub fn pl_permutation_prob(
    scores: &ScoreTable,
    query: QueryIx,
    beta: f64,
    ranking: &Ranking,
) -> Result<f64> {
    check_beta(beta)?;
    let cands = scores.candidates(query)?;
    let positions = permutation_positions(cands, ranking)?;
    let logits: Vec<f64> = cands.iter().map(|&(_, s)| s / beta).collect();
    Ok(sequence_prob(&logits, &positions))
}

fn permutation_positions(cands: &[(ItemIx, f64)], ranking: &Ranking) -> Result<Vec<usize>> {
    if ranking.len() != cands.len() {
        return Err(Error::InvalidArgument(format!(
            "ranking has {} items but the query has {} candidates",
            ranking.len(),
            cands.len()
        )));
    }
    let mut used = vec![false; cands.len()];
    let mut positions = Vec::with_capacity(cands.len());
    for item in ranking.items() {
        let pos = cands.iter().position(|&(d, _)| d == *item).ok_or_else(|| {
            Error::InvalidArgument(format!("item #{} is not a candidate", item.0))
        })?;
        if used[pos] {
            return Err(Error::InvalidArgument("ranking repeats an item".into()));
        }
        used[pos] = true;
        positions.push(pos);
    }
    Ok(positions)
}

/// Product of per-step softmax probabilities for drawing `order`.
fn sequence_prob(logits: &[f64], order: &[usize]) -> f64 {
    let mut remaining: Vec<usize> = (0..logits.len()).collect();
    let mut prob = 1.0;
    for &chosen in order {
        let top = remaining
            .iter()
            .map(|&i| logits[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = remaining.iter().map(|&i| (logits[i] - top).exp()).sum();
        prob *= (logits[chosen] - top).exp() / denom;
        remaining.retain(|&i| i != chosen);
    }
    prob
}

/// Every permutation of the candidates with its exact Plackett-Luce
/// probability. Permutations are listed in lexicographic order of candidate
/// positions.
pub fn pl_exact_policy(
    scores: &ScoreTable,
    query: QueryIx,
    beta: f64,
    max_n: usize,
) -> Result<PolicySample> {
    check_beta(beta)?;
    let cands = scores.candidates(query)?;
    let n = cands.len();
    if n > max_n {
        return Err(Error::Capacity(format!(
            "{n} candidates exceed the enumeration limit of {max_n}"
        )));
    }
    let logits: Vec<f64> = cands.iter().map(|&(_, s)| s / beta).collect();
    let rankings: Vec<(Ranking, f64)> = (0..n)
        .permutations(n)
        .map(|perm| {
            let w = sequence_prob(&logits, &perm);
            let items = perm.iter().map(|&p| cands[p].0).collect();
            (Ranking::from_distinct(query, items), w)
        })
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let samples = rankings.len();
    Ok(PolicySample {
        query,
        rankings,
        meta: SampleMeta {
            beta: Some(beta),
            seed: None,
            samples,
            exact: true,
        },
    })
}
