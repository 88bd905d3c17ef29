//! End-to-end evaluation of one ranker configuration: score, build a policy
//! per query, and compute every metric.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::browse::{BrowsingModel, DEFAULT_GAMMA};
use crate::metrics::{
    AggregateMetrics, EvalContext, QueryMetrics, QueryWeighting, DEFAULT_EPSILON,
};
use crate::model::{Model, ScoreTable};
use crate::policy::{self, PlConfig, Policy, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::rankers::{Ranker, DEFAULT_RANKER_SMOOTHING};
use crate::{Error, Result};

/// Either the deterministic ranking or a Plackett-Luce temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Static,
    Beta(f64),
}

impl Temperature {
    pub fn beta(self) -> Option<f64> {
        match self {
            Temperature::Static => None,
            Temperature::Beta(b) => Some(b),
        }
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Temperature::Static => f.write_str("static"),
            Temperature::Beta(b) => write!(f, "{b}"),
        }
    }
}

/// Accepts `static`, decimals, and fractions such as `1/8`.
impl FromStr for Temperature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("static") {
            return Ok(Temperature::Static);
        }
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad temperature '{s}'")))
        };
        let beta = match s.split_once('/') {
            Some((num, den)) => parse(num)? / parse(den)?,
            None => parse(s)?,
        };
        if beta > 0.0 && beta.is_finite() {
            Ok(Temperature::Beta(beta))
        } else {
            Err(Error::InvalidArgument(format!(
                "temperature must be positive, got '{s}'"
            )))
        }
    }
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Temperature::Static => serializer.serialize_str("static"),
            Temperature::Beta(b) => serializer.serialize_f64(*b),
        }
    }
}

/// How ranker scores are turned into Plackett-Luce logits (before division
/// by the temperature).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreTransform {
    /// Use ranker scores unchanged.
    Raw,
    /// Rescale each query's scores to span [0, 1].
    #[default]
    MinMax,
}

impl FromStr for ScoreTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(ScoreTransform::Raw),
            "minmax" => Ok(ScoreTransform::MinMax),
            other => Err(Error::InvalidArgument(format!(
                "unknown score transform '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    pub ranker: Ranker,
    pub temperature: Temperature,
    pub samples: usize,
    pub gamma: f64,
    /// Smoothing inside group success products.
    pub epsilon: f64,
    /// Smoothing inside the gMPC score product.
    pub ranker_smoothing: f64,
    pub seed: u64,
    pub depth: Option<usize>,
    pub score_transform: ScoreTransform,
    pub weighting: QueryWeighting,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            ranker: Ranker::Mpc,
            temperature: Temperature::Static,
            samples: DEFAULT_SAMPLES,
            gamma: DEFAULT_GAMMA,
            epsilon: DEFAULT_EPSILON,
            ranker_smoothing: DEFAULT_RANKER_SMOOTHING,
            seed: DEFAULT_SEED,
            depth: None,
            score_transform: ScoreTransform::MinMax,
            weighting: QueryWeighting::Prior,
        }
    }
}

impl EvalConfig {
    pub fn browsing(&self) -> Result<BrowsingModel> {
        BrowsingModel::rbp(self.gamma)
    }

    pub fn pl(&self, beta: f64) -> PlConfig {
        PlConfig {
            beta,
            samples: self.samples,
            seed: self.seed,
            depth: self.depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(flatten)]
    pub config: EvalConfig,
}

impl ReportMeta {
    pub fn new(config: EvalConfig) -> Self {
        Self {
            tool: "gass",
            version: env!("CARGO_PKG_VERSION"),
            config,
        }
    }
}

/// All metric values for one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub metadata: ReportMeta,
    pub queries: Vec<QueryMetrics>,
    pub aggregate: AggregateMetrics,
}

/// Ranker scores as Plackett-Luce inputs.
pub fn policy_scores(model: &Model, config: &EvalConfig) -> Result<ScoreTable> {
    let raw = config.ranker.score_table(model, config.ranker_smoothing)?;
    Ok(match config.score_transform {
        ScoreTransform::Raw => raw,
        ScoreTransform::MinMax => raw.min_max_scaled(),
    })
}

/// One policy per evaluable query, in catalog order.
pub fn build_policies(
    model: &Model,
    scores: &ScoreTable,
    config: &EvalConfig,
) -> Result<Vec<Policy>> {
    let queries = model.evaluable_queries();
    queries
        .par_iter()
        .map(|&q| match config.temperature {
            Temperature::Static => {
                policy::static_ranking(scores, &model.catalog, q, config.depth).map(Policy::Static)
            }
            Temperature::Beta(beta) => {
                policy::pl_sample_policy(scores, &model.catalog, q, &config.pl(beta))
                    .map(Policy::Stochastic)
            }
        })
        .collect()
}

/// Scores, samples and evaluates `model` under `config`.
pub fn evaluate(model: &Model, config: &EvalConfig) -> Result<MetricReport> {
    model.ensure_valid()?;
    let browsing = config.browsing()?;
    let scores = policy_scores(model, config)?;
    let policies = build_policies(model, &scores, config)?;
    evaluate_policies(model, &policies, &browsing, config)
}

/// Evaluates pre-built policies; `config` supplies smoothing, weighting and
/// report metadata.
pub fn evaluate_policies(
    model: &Model,
    policies: &[Policy],
    browsing: &BrowsingModel,
    config: &EvalConfig,
) -> Result<MetricReport> {
    let ctx = EvalContext::from_policies(model, browsing, policies, config.epsilon)?;
    let metrics = ctx.metrics(config.weighting)?;
    Ok(MetricReport {
        metadata: ReportMeta::new(*config),
        queries: metrics.queries,
        aggregate: metrics.aggregate,
    })
}
