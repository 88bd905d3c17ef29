//! User browsing models: how likely a searcher is to inspect each rank.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{Catalog, DenseIndex, ItemIx, QueryIx};
use crate::policy::{Policy, PolicySample};
use crate::{Error, Result};

/// Default RBP patience.
pub const DEFAULT_GAMMA: f64 = 0.8;

/// A browsing model mapping rank positions to exposure probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BrowsingModel {
    /// Rank-biased precision: a searcher moves from rank k to k+1 with
    /// probability `gamma`.
    Rbp { gamma: f64 },
}

impl BrowsingModel {
    pub fn rbp(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "RBP patience must lie in (0,1), got {gamma}"
            )));
        }
        Ok(Self::Rbp { gamma })
    }

    /// Exposure probability at a 1-based rank.
    pub fn exposure_at_rank(&self, rank: usize) -> Result<f64> {
        if rank == 0 {
            return Err(Error::InvalidArgument("ranks start at 1".into()));
        }
        Ok(self.exposure_unchecked(rank))
    }

    fn exposure_unchecked(&self, rank: usize) -> f64 {
        match *self {
            Self::Rbp { gamma } => gamma.powi((rank - 1) as i32),
        }
    }

    /// Exposure for every rank `1..=depth`.
    pub fn profile(&self, depth: usize) -> Vec<f64> {
        match *self {
            Self::Rbp { gamma } => {
                let mut out = Vec::with_capacity(depth);
                for rank in 1..=depth {
                    out.push(gamma.powi((rank - 1) as i32));
                }
                out
            }
        }
    }

    /// Exposure mass a list of length `depth` leaves unassigned.
    pub fn residual_mass(&self, depth: usize) -> f64 {
        match *self {
            Self::Rbp { gamma } => gamma.powi(depth as i32),
        }
    }

    /// Exposure of `item` in a single ranking; zero when it is not listed.
    pub fn exposure_static(&self, ranking: &Ranking, item: ItemIx) -> f64 {
        ranking
            .rank_of(item)
            .map_or(0.0, |rank| self.exposure_unchecked(rank))
    }

    /// Expected exposure of `item` under a weighted set of rankings.
    pub fn exposure_expected(&self, policy: &PolicySample, item: ItemIx) -> Result<f64> {
        policy.check_weights()?;
        let total: f64 = policy
            .rankings()
            .iter()
            .map(|(ranking, w)| w * self.exposure_static(ranking, item))
            .sum();
        Ok(total)
    }

    /// Expected exposure of every item with nonzero exposure, sorted by item.
    pub fn exposures(&self, policy: &Policy) -> Result<Vec<(ItemIx, f64)>> {
        let mut acc: BTreeMap<ItemIx, f64> = BTreeMap::new();
        match policy {
            Policy::Static(ranking) => {
                let profile = self.profile(ranking.len());
                for (item, e) in ranking.items().iter().zip(profile) {
                    acc.insert(*item, e);
                }
            }
            Policy::Stochastic(sample) => {
                sample.check_weights()?;
                let depth = sample
                    .rankings()
                    .iter()
                    .map(|(r, _)| r.len())
                    .max()
                    .unwrap_or(0);
                let profile = self.profile(depth);
                for (ranking, w) in sample.rankings() {
                    for (item, e) in ranking.items().iter().zip(&profile) {
                        *acc.entry(*item).or_insert(0.0) += w * e;
                    }
                }
            }
        }
        Ok(acc.into_iter().filter(|&(_, e)| e > 0.0).collect())
    }
}

/// An ordered list of distinct items for one query; rank 1 is the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    query: QueryIx,
    items: Vec<ItemIx>,
}

impl Ranking {
    pub fn new(query: QueryIx, items: Vec<ItemIx>) -> Result<Self> {
        let mut sorted = items.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "ranking lists an item more than once".into(),
            ));
        }
        Ok(Self { query, items })
    }

    /// Skips the duplicate check; callers guarantee distinct items.
    pub(crate) fn from_distinct(query: QueryIx, items: Vec<ItemIx>) -> Self {
        Self { query, items }
    }

    pub fn query(&self) -> QueryIx {
        self.query
    }

    pub fn items(&self) -> &[ItemIx] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// 1-based rank of `item`, if listed.
    pub fn rank_of(&self, item: ItemIx) -> Option<usize> {
        self.items.iter().position(|&d| d == item).map(|p| p + 1)
    }

    pub fn item_names<'a>(&self, catalog: &'a Catalog) -> Vec<&'a str> {
        self.items.iter().map(|d| d.name(catalog)).collect()
    }
}
