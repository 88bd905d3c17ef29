//! Search success metrics.
//!
//! Success is built bottom-up:
//!
//! * item: `p(s_d|t,q) = p(r_d|t) · exposure(d)`, where exposure is the static
//!   exposure for a fixed ranking or the expected exposure under a stochastic
//!   policy;
//! * intent: `p(s|t,q) = 1 - Π_d (1 - p(s_d|t,q))`;
//! * group: `p(s|q,g) = Σ_t p(t|q,g) · p(s|t,q)`;
//! * GA-SS within a query: `Π_g p(s|q,g)`;
//! * DA-SS within a query: `Σ_t p(t|q) · p(s|t,q)` with
//!   `p(t|q) = Σ_g p(g|q) · p(t|q,g)`;
//! * GA-SS across queries, sum of products: `Σ_q p(q) · Π_g p(s|q,g)`;
//! * GA-SS across queries, product of sums: `Π_g Σ_q p(q|g) · p(s|q,g)`.
//!
//! Group products add the smoothing constant `epsilon` to every factor and
//! clamp the result to [0, 1]. With `epsilon = 0` a single unserved group
//! zeroes the product.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::browse::BrowsingModel;
use crate::model::{
    DenseIndex, GroupIx, IntentIx, ItemIx, Model, QueryIx, TableKey, SUM_TOLERANCE,
};
use crate::policy::Policy;
use crate::util::{clamp_unit, product};
use crate::{Error, Result};

/// Default additive smoothing for group products.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// How within-query metrics are averaged over queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryWeighting {
    /// Weighted by p(q), renormalized over the evaluated queries.
    #[default]
    Prior,
    Uniform,
}

#[derive(Debug, Clone)]
struct QueryOutcome {
    /// Nonzero exposures, sorted by item.
    exposure: Vec<(ItemIx, f64)>,
    /// p(s|t,q), indexed by intent.
    intent_success: Vec<f64>,
}

/// A model together with per-query success under some ranking policy.
#[derive(Debug, Clone)]
pub struct EvalContext<'a> {
    model: &'a Model,
    epsilon: f64,
    outcomes: BTreeMap<QueryIx, QueryOutcome>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon >= 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "smoothing must be non-negative, got {epsilon}"
        )))
    }
}

impl<'a> EvalContext<'a> {
    /// Evaluates each query under its policy. Queries are evaluated in
    /// parallel; at most one policy per query is allowed.
    pub fn from_policies(
        model: &'a Model,
        browsing: &BrowsingModel,
        policies: &[Policy],
        epsilon: f64,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        let computed: Vec<(QueryIx, QueryOutcome)> = policies
            .par_iter()
            .map(|policy| {
                let exposure = browsing.exposures(policy)?;
                let intent_success = intent_success(model, &exposure);
                Ok((
                    policy.query(),
                    QueryOutcome {
                        exposure,
                        intent_success,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        let mut outcomes = BTreeMap::new();
        for (q, outcome) in computed {
            if outcomes.insert(q, outcome).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "query {} has more than one policy",
                    q.describe(&model.catalog)
                )));
            }
        }
        Ok(Self {
            model,
            epsilon,
            outcomes,
        })
    }

    /// Uses given intent success values `p(s|t,q)` directly, one vector per
    /// query indexed by intent. Item-level quantities are zero in such a
    /// context.
    pub fn from_intent_success(
        model: &'a Model,
        success: BTreeMap<QueryIx, Vec<f64>>,
        epsilon: f64,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        let intents = model.catalog.intents.len();
        let mut outcomes = BTreeMap::new();
        for (q, values) in success {
            if values.len() != intents {
                return Err(Error::InvalidArgument(format!(
                    "expected {intents} intent success values, got {}",
                    values.len()
                )));
            }
            if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidArgument("intent success out of [0,1]".into()));
            }
            outcomes.insert(
                q,
                QueryOutcome {
                    exposure: Vec::new(),
                    intent_success: values,
                },
            );
        }
        Ok(Self {
            model,
            epsilon,
            outcomes,
        })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Evaluated queries in catalog order.
    pub fn queries(&self) -> Vec<QueryIx> {
        self.outcomes.keys().copied().collect()
    }

    fn outcome(&self, query: QueryIx) -> Result<&QueryOutcome> {
        self.outcomes
            .get(&query)
            .ok_or_else(|| Error::NotFound(format!("query #{} was not evaluated", query.0)))
    }

    /// Exposure of `item` for `query`; zero if never exposed.
    pub fn exposure(&self, query: QueryIx, item: ItemIx) -> f64 {
        self.outcomes.get(&query).map_or(0.0, |o| {
            o.exposure
                .binary_search_by_key(&item, |e| e.0)
                .map_or(0.0, |pos| o.exposure[pos].1)
        })
    }

    /// `p(s_d|t,q)`.
    pub fn item_success(&self, item: ItemIx, intent: IntentIx, query: QueryIx) -> f64 {
        self.model.relevance.get(item, intent) * self.exposure(query, item)
    }

    /// `p(s|t,q)`: at least one exposed item succeeds for the intent.
    pub fn intent_query_success(&self, intent: IntentIx, query: QueryIx) -> f64 {
        self.outcomes
            .get(&query)
            .and_then(|o| o.intent_success.get(intent.index()).copied())
            .unwrap_or(0.0)
    }

    /// `p(s|q,g)`: intent-aware success for one group.
    pub fn group_query_success(&self, group: GroupIx, query: QueryIx) -> Result<f64> {
        let outcome = self.outcome(query)?;
        let row = self
            .model
            .intent_given_query_group
            .row((query, group))
            .ok_or_else(|| {
                Error::NotFound(format!(
                    "p(t|q,g) for ({},{})",
                    query.describe(&self.model.catalog),
                    group.describe(&self.model.catalog)
                ))
            })?;
        let s = row
            .iter()
            .map(|(t, p)| p * outcome.intent_success[t.index()])
            .sum();
        Ok(clamp_unit(s))
    }

    /// Groups that contribute to `query`: those with an intent distribution.
    fn query_groups(&self, query: QueryIx) -> Result<Vec<GroupIx>> {
        let groups = self.model.groups_with_intents(query);
        if groups.is_empty() {
            return Err(Error::NotFound(format!(
                "no group has p(t|q,g) for {}",
                query.describe(&self.model.catalog)
            )));
        }
        Ok(groups)
    }

    /// GA-SS within a query: every group issuing the query is served.
    pub fn ga_ss_within(&self, query: QueryIx) -> Result<f64> {
        let factors = self
            .query_groups(query)?
            .into_iter()
            .map(|g| Ok(self.group_query_success(g, query)? + self.epsilon))
            .collect::<Result<Vec<f64>>>()?;
        Ok(clamp_unit(product(&factors)))
    }

    /// `p(t|q)` marginalized over groups with `p(g|q)`.
    pub fn intent_given_query(&self, query: QueryIx) -> Result<Vec<f64>> {
        let catalog = &self.model.catalog;
        let mixture =
            self.model.group_given_query.row(query).ok_or_else(|| {
                Error::NotFound(format!("p(g|q) for {}", query.describe(catalog)))
            })?;
        let mut marginal = vec![0.0; catalog.intents.len()];
        for g in self.query_groups(query)? {
            let w = mixture.get(g);
            if w == 0.0 {
                continue;
            }
            if let Some(row) = self.model.intent_given_query_group.row((query, g)) {
                for (t, p) in row.iter() {
                    marginal[t.index()] += w * p;
                }
            }
        }
        Ok(marginal)
    }

    /// DA-SS within a query: group-unaware intent mixture of success.
    pub fn da_ss_within(&self, query: QueryIx) -> Result<f64> {
        let outcome = self.outcome(query)?;
        let marginal = self.intent_given_query(query)?;
        let s = marginal
            .iter()
            .zip(&outcome.intent_success)
            .map(|(p, s)| p * s)
            .sum();
        Ok(clamp_unit(s))
    }

    /// `Σ_q p(q) Π_g p(s|q,g)`.
    pub fn ga_ss_sum_of_product(&self, queries: &[QueryIx]) -> Result<f64> {
        let total = self.model.query_prior.sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Validation(format!("p(q) sums to {total}")));
        }
        let mut sorted = queries.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut acc = 0.0;
        for q in sorted {
            let w = self.model.query_prior.get(q);
            if w > 0.0 {
                acc += w * self.ga_ss_within(q)?;
            }
        }
        Ok(clamp_unit(acc))
    }

    /// `Σ_q p(q|g) p(s|q,g)`: success of one group across queries.
    pub fn group_success(&self, group: GroupIx, queries: &[QueryIx]) -> Result<f64> {
        let row = self.model.query_given_group.row(group).ok_or_else(|| {
            Error::NotFound(format!(
                "p(q|g) for {}",
                group.describe(&self.model.catalog)
            ))
        })?;
        let mut sorted = queries.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut acc = 0.0;
        for q in sorted {
            let w = row.get(q);
            if w > 0.0 {
                acc += w * self.group_query_success(group, q)?;
            }
        }
        Ok(clamp_unit(acc))
    }

    /// `Π_g Σ_q p(q|g) p(s|q,g)`.
    pub fn ga_ss_product_of_sum(&self, queries: &[QueryIx]) -> Result<f64> {
        let factors = self
            .model
            .catalog
            .groups
            .iter()
            .map(|g| Ok(self.group_success(g, queries)? + self.epsilon))
            .collect::<Result<Vec<f64>>>()?;
        Ok(clamp_unit(product(&factors)))
    }

    /// Every metric for every evaluated query plus the aggregates.
    pub fn metrics(&self, weighting: QueryWeighting) -> Result<Metrics> {
        let catalog = &self.model.catalog;
        let queries = self.queries();
        let per_query = queries
            .iter()
            .map(|&q| {
                let mut groups = IndexMap::new();
                for g in self.query_groups(q)? {
                    groups.insert(g.name(catalog).to_owned(), self.group_query_success(g, q)?);
                }
                Ok(QueryMetrics {
                    query: q.name(catalog).to_owned(),
                    ga_ss_within: self.ga_ss_within(q)?,
                    da_ss_within: self.da_ss_within(q)?,
                    group_success: groups,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let weights: Vec<f64> = match weighting {
            QueryWeighting::Prior => queries
                .iter()
                .map(|&q| self.model.query_prior.get(q))
                .collect(),
            QueryWeighting::Uniform => vec![1.0; queries.len()],
        };
        let weight_total: f64 = weights.iter().sum();
        let mean = |f: fn(&QueryMetrics) -> f64| -> f64 {
            if weight_total <= 0.0 {
                return 0.0;
            }
            let s: f64 = per_query.iter().zip(&weights).map(|(m, w)| w * f(m)).sum();
            clamp_unit(s / weight_total)
        };

        let mut group_success = IndexMap::new();
        for g in catalog.groups.iter() {
            group_success.insert(g.name(catalog).to_owned(), self.group_success(g, &queries)?);
        }
        let aggregate = AggregateMetrics {
            mean_ga_ss_within: mean(|m| m.ga_ss_within),
            mean_da_ss_within: mean(|m| m.da_ss_within),
            ga_ss_sum_of_product: self.ga_ss_sum_of_product(&queries)?,
            ga_ss_product_of_sum: self.ga_ss_product_of_sum(&queries)?,
            group_success,
        };
        Ok(Metrics {
            queries: per_query,
            aggregate,
        })
    }
}

/// `p(s|t,q)` for every intent given item exposures.
fn intent_success(model: &Model, exposure: &[(ItemIx, f64)]) -> Vec<f64> {
    let mut miss = vec![1.0; model.catalog.intents.len()];
    for &(d, e) in exposure {
        if let Some(row) = model.relevance.row(d) {
            for (t, r) in row.iter() {
                miss[t.index()] *= 1.0 - r * e;
            }
        }
    }
    miss.into_iter().map(|m| clamp_unit(1.0 - m)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryMetrics {
    pub query: String,
    pub ga_ss_within: f64,
    pub da_ss_within: f64,
    /// p(s|q,g) per group.
    pub group_success: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateMetrics {
    pub mean_ga_ss_within: f64,
    pub mean_da_ss_within: f64,
    pub ga_ss_sum_of_product: f64,
    pub ga_ss_product_of_sum: f64,
    /// p(s|g) = Σ_q p(q|g) p(s|q,g) per group.
    pub group_success: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub queries: Vec<QueryMetrics>,
    pub aggregate: AggregateMetrics,
}
