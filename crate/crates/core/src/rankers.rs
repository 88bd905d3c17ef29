//! Popularity rankers: most popular completion (MPC) and its group-aware
//! variant (gMPC). For recommendation tasks the same two models are called
//! MPV and gMPV; the names parse to the same rankers.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::model::{DenseIndex, ItemIx, Model, QueryIx, ScoreTable};
use crate::util::LOG_SPACE_THRESHOLD;
use crate::{Error, Result};

/// Additive smoothing inside the gMPC product.
pub const DEFAULT_RANKER_SMOOTHING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ranker {
    /// Ranks by p(d|q).
    Mpc,
    /// Ranks by the product over groups of p(d|q,g). The score is the
    /// geometric mean, which orders items the same way.
    Gmpc,
}

impl Ranker {
    pub const ALL: [Ranker; 2] = [Ranker::Mpc, Ranker::Gmpc];

    pub fn as_str(self) -> &'static str {
        match self {
            Ranker::Mpc => "mpc",
            Ranker::Gmpc => "gmpc",
        }
    }

    /// Scores for every query with candidates.
    pub fn score_table(self, model: &Model, smoothing: f64) -> Result<ScoreTable> {
        let mut table = ScoreTable::new();
        for q in model.evaluable_queries() {
            let row = match self {
                Ranker::Mpc => mpc_scores(model, q)?,
                Ranker::Gmpc => gmpc_scores(model, q, smoothing)?,
            };
            table.insert(q, row);
        }
        Ok(table)
    }
}

impl fmt::Display for Ranker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ranker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mpc" | "mpv" => Ok(Ranker::Mpc),
            "gmpc" | "gmpv" => Ok(Ranker::Gmpc),
            other => Err(Error::InvalidArgument(format!("unknown ranker '{other}'"))),
        }
    }
}

fn candidates(model: &Model, query: QueryIx) -> Result<&[ItemIx]> {
    match model.candidates.get(&query) {
        Some(c) if !c.is_empty() => Ok(c),
        _ => Err(Error::NotFound(format!(
            "query {} has no candidates",
            describe_query(model, query)
        ))),
    }
}

fn describe_query(model: &Model, query: QueryIx) -> String {
    if model.catalog.queries.contains(query) {
        query.name(&model.catalog).to_owned()
    } else {
        format!("#{}", query.0)
    }
}

/// `p(d|q) = Σ_g p(g|q) p(d|q,g)` for each candidate of `query`.
pub fn mpc_scores(model: &Model, query: QueryIx) -> Result<Vec<(ItemIx, f64)>> {
    let cands = candidates(model, query)?;
    let mixture = model
        .group_given_query
        .row(query)
        .ok_or_else(|| Error::NotFound(format!("p(g|q) for {}", describe_query(model, query))))?;
    let rows: Vec<_> = mixture
        .iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(g, w)| (w, model.item_given_query_group.row((query, g))))
        .collect();
    Ok(cands
        .iter()
        .map(|&d| {
            let score = rows
                .iter()
                .map(|(w, row)| w * row.map_or(0.0, |r| r.get(d)))
                .sum();
            (d, score)
        })
        .collect())
}

/// `(Π_g (p(d|q,g) + smoothing))^(1/G)` over the `G` groups that issued
/// `query`. The root keeps scores on the probability scale of
/// [`mpc_scores`], so both rankers feed comparable logits to a
/// Plackett-Luce policy; the order is that of the plain product.
pub fn gmpc_scores(model: &Model, query: QueryIx, smoothing: f64) -> Result<Vec<(ItemIx, f64)>> {
    if smoothing.is_nan() || smoothing < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "smoothing must be non-negative, got {smoothing}"
        )));
    }
    let cands = candidates(model, query)?;
    let groups = model.groups_with_items(query);
    if groups.is_empty() {
        return Err(Error::NotFound(format!(
            "p(d|q,g) for {}",
            describe_query(model, query)
        )));
    }
    let rows: Vec<_> = groups
        .iter()
        .filter_map(|&g| model.item_given_query_group.row((query, g)))
        .collect();
    let log_space = rows.len() > LOG_SPACE_THRESHOLD;
    let g = rows.len() as f64;
    Ok(cands
        .iter()
        .map(|&d| {
            let score = if log_space {
                let logs: f64 = rows.iter().map(|r| (r.get(d) + smoothing).ln()).sum();
                (logs / g).exp()
            } else {
                rows.iter()
                    .map(|r| r.get(d) + smoothing)
                    .product::<f64>()
                    .powf(1.0 / g)
            };
            (d, score)
        })
        .collect())
}
