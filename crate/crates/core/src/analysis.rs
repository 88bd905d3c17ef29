//! Experiment protocols: temperature sweeps, metric normalization, Kendall
//! correlation between metrics, and the two-query toy scenario.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::eval::{self, EvalConfig, Temperature};
use crate::metrics::EvalContext;
use crate::model::{Catalog, Model, SparseRow};
use crate::rankers::Ranker;
use crate::{Error, Result};

/// The temperature grid used in the correlation study.
pub const DEFAULT_BETAS: [f64; 7] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DaSs,
    GaSsWithin,
    GaSsSumOfProduct,
    GaSsProductOfSum,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::DaSs,
        Metric::GaSsWithin,
        Metric::GaSsSumOfProduct,
        Metric::GaSsProductOfSum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::DaSs => "da_ss",
            Metric::GaSsWithin => "ga_ss_within",
            Metric::GaSsSumOfProduct => "ga_ss_sum_of_product",
            Metric::GaSsProductOfSum => "ga_ss_product_of_sum",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric '{s}'")))
    }
}

/// The four system-level metric values of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricValues {
    pub da_ss: f64,
    pub ga_ss_within: f64,
    pub ga_ss_sum_of_product: f64,
    pub ga_ss_product_of_sum: f64,
}

impl MetricValues {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::DaSs => self.da_ss,
            Metric::GaSsWithin => self.ga_ss_within,
            Metric::GaSsSumOfProduct => self.ga_ss_sum_of_product,
            Metric::GaSsProductOfSum => self.ga_ss_product_of_sum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub ranker: Ranker,
    pub beta: Temperature,
    #[serde(flatten)]
    pub values: MetricValues,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub gamma: f64,
    pub epsilon: f64,
    pub ranker_smoothing: f64,
    pub samples: usize,
    pub seed: u64,
    pub depth: Option<usize>,
    pub score_transform: eval::ScoreTransform,
    pub weighting: crate::metrics::QueryWeighting,
}

/// Metric values over a (ranker, temperature) grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub metadata: SweepMeta,
    /// Stochastic cells, ranker-major in the order requested.
    pub cells: Vec<SweepCell>,
    /// Deterministic ranking per ranker, kept apart from the grid.
    pub static_reference: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, ranker: Ranker, beta: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.ranker == ranker && c.beta == Temperature::Beta(beta))
    }

    pub fn series(&self, metric: Metric) -> Vec<f64> {
        self.cells.iter().map(|c| c.values.get(metric)).collect()
    }
}

fn cell_values(model: &Model, config: &EvalConfig) -> Result<MetricValues> {
    let report = eval::evaluate(model, config)?;
    let a = report.aggregate;
    Ok(MetricValues {
        da_ss: a.mean_da_ss_within,
        ga_ss_within: a.mean_ga_ss_within,
        ga_ss_sum_of_product: a.ga_ss_sum_of_product,
        ga_ss_product_of_sum: a.ga_ss_product_of_sum,
    })
}

/// Evaluates every (ranker, beta) cell. `base` supplies everything except
/// ranker and temperature. With `include_static`, each ranker's
/// deterministic ranking is evaluated as a reference.
pub fn sweep(
    model: &Model,
    rankers: &[Ranker],
    betas: &[f64],
    base: &EvalConfig,
    include_static: bool,
) -> Result<SweepResult> {
    if rankers.is_empty() || betas.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep needs at least one ranker and one beta".into(),
        ));
    }
    model.ensure_valid()?;
    let mut coords: Vec<(Ranker, Temperature)> = Vec::new();
    for &r in rankers {
        for &b in betas {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidArgument(format!("bad beta {b}")));
            }
            coords.push((r, Temperature::Beta(b)));
        }
    }
    if include_static {
        for &r in rankers {
            coords.push((r, Temperature::Static));
        }
    }
    let evaluated: Vec<SweepCell> = coords
        .par_iter()
        .map(|&(ranker, beta)| {
            let config = EvalConfig {
                ranker,
                temperature: beta,
                ..*base
            };
            let values = cell_values(model, &config)
                .map_err(|e| e.context(&format!("cell ({ranker}, beta={beta})")))?;
            Ok(SweepCell {
                ranker,
                beta,
                values,
            })
        })
        .collect::<Result<_>>()?;
    let (static_reference, cells): (Vec<_>, Vec<_>) = evaluated
        .into_iter()
        .partition(|c| c.beta == Temperature::Static);
    Ok(SweepResult {
        metadata: SweepMeta {
            tool: "gass",
            version: env!("CARGO_PKG_VERSION"),
            gamma: base.gamma,
            epsilon: base.epsilon,
            ranker_smoothing: base.ranker_smoothing,
            samples: base.samples,
            seed: base.seed,
            depth: base.depth,
            score_transform: base.score_transform,
            weighting: base.weighting,
        },
        cells,
        static_reference,
    })
}

/// `(x - min) / (max - min)`; a constant series maps to zeros.
pub fn min_max_normalize(xs: &[f64]) -> Vec<f64> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    xs.iter()
        .map(|&x| if span > 0.0 { (x - lo) / span } else { 0.0 })
        .collect()
}

/// Kendall's tau-b.
///
/// `tau = (P - Q) / sqrt((P + Q + T) * (P + Q + U))`, with P concordant and Q
/// discordant pairs, T pairs tied only in `xs` and U pairs tied only in `ys`.
/// When both series are constant the result is 1; when only one is, 0.
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two observations".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("series contain NaN".into()));
    }
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let dx = xs[i].partial_cmp(&xs[j]).expect("no NaN") as i64;
            let dy = ys[i].partial_cmp(&ys[j]).expect("no NaN") as i64;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => tie_x += 1,
                (_, 0) => tie_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let untied_x = (concordant + discordant + tie_x) as f64;
    let untied_y = (concordant + discordant + tie_y) as f64;
    if untied_x == 0.0 && untied_y == 0.0 {
        return Ok(1.0);
    }
    if untied_x == 0.0 || untied_y == 0.0 {
        return Ok(0.0);
    }
    Ok(((concordant - discordant) as f64 / (untied_x * untied_y).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise Kendall tau between metric series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub metrics: Vec<Metric>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Metric, b: Metric) -> Option<f64> {
        let i = self.metrics.iter().position(|&m| m == a)?;
        let j = self.metrics.iter().position(|&m| m == b)?;
        Some(self.values[i][j])
    }
}

/// Kendall tau between every pair of metrics over the sweep cells.
pub fn correlation_matrix(cells: &[SweepCell]) -> Result<CorrelationMatrix> {
    if cells.len() < 2 {
        return Err(Error::InvalidArgument(
            "correlation needs at least two cells".into(),
        ));
    }
    let series: Vec<Vec<f64>> = Metric::ALL
        .iter()
        .map(|&m| cells.iter().map(|c| c.values.get(m)).collect())
        .collect();
    let n = Metric::ALL.len();
    let mut values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let tau = kendall_tau(&series[i], &series[j])?;
            values[i][j] = tau;
            values[j][i] = tau;
        }
    }
    Ok(CorrelationMatrix {
        metrics: Metric::ALL.to_vec(),
        values,
    })
}

/// One point of a temperature-vs-metric plot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPoint {
    pub metric: Metric,
    pub ranker: Ranker,
    pub beta: f64,
    pub value: f64,
    /// Min-max normalized over all cells of this metric.
    pub normalized: f64,
}

/// Plot data with each metric min-max normalized over the whole grid.
pub fn plot_data(sweep: &SweepResult) -> Vec<PlotPoint> {
    let mut out = Vec::new();
    for metric in Metric::ALL {
        let series = sweep.series(metric);
        let normalized = min_max_normalize(&series);
        for (cell, norm) in sweep.cells.iter().zip(normalized) {
            out.push(PlotPoint {
                metric,
                ranker: cell.ranker,
                beta: cell.beta.beta().unwrap_or(0.0),
                value: cell.values.get(metric),
                normalized: norm,
            });
        }
    }
    out
}

/// Which intents a toy system retrieves for one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Retrieved {
    #[serde(rename = "t1")]
    First,
    #[serde(rename = "t2")]
    Second,
    #[serde(rename = "t1+t2")]
    Both,
}

impl Retrieved {
    const ALL: [Retrieved; 3] = [Retrieved::First, Retrieved::Second, Retrieved::Both];

    fn success(self) -> Vec<f64> {
        match self {
            Retrieved::First => vec![1.0, 0.0],
            Retrieved::Second => vec![0.0, 1.0],
            Retrieved::Both => vec![1.0, 1.0],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Retrieved::First => "t1",
            Retrieved::Second => "t2",
            Retrieved::Both => "t1+t2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyRow {
    pub q1: Retrieved,
    pub q2: Retrieved,
    pub ga_ss_q1: f64,
    pub ga_ss_q2: f64,
    pub ga_ss_sum_of_product: f64,
    pub ga_ss_product_of_sum: f64,
}

/// The two-query, two-intent, two-group scenario: each query is equally
/// likely and equally related to both intents, group A only ever wants t1
/// and group B only t2, and both groups are the same size. Every retrieved
/// intent succeeds with certainty. No smoothing.
pub fn toy_model() -> Model {
    let mut catalog = Catalog::new();
    let q = [catalog.queries.insert("q1"), catalog.queries.insert("q2")];
    let t = [catalog.intents.insert("t1"), catalog.intents.insert("t2")];
    let g = [catalog.groups.insert("gA"), catalog.groups.insert("gB")];
    let mut model = Model {
        catalog,
        ..Model::default()
    };
    for &query in &q {
        for (&group, &intent) in g.iter().zip(&t) {
            model
                .intent_given_query_group
                .insert_row((query, group), SparseRow::from_pairs([(intent, 1.0)]));
        }
        model
            .group_given_query
            .insert_row(query, SparseRow::from_pairs([(g[0], 0.5), (g[1], 0.5)]));
    }
    for &group in &g {
        model
            .query_given_group
            .insert_row(group, SparseRow::from_pairs([(q[0], 0.5), (q[1], 0.5)]));
    }
    model.query_prior = SparseRow::from_pairs([(q[0], 0.5), (q[1], 0.5)]);
    model.group_prior = SparseRow::from_pairs([(g[0], 0.5), (g[1], 0.5)]);
    model
}

/// All nine retrieval systems of the toy scenario, `q1` varying slowest in
/// the order t1, t2, t1+t2.
pub fn toy_table() -> Vec<ToyRow> {
    let model = toy_model();
    let q1 = model.catalog.queries.get("q1").expect("toy query");
    let q2 = model.catalog.queries.get("q2").expect("toy query");
    let mut rows = Vec::with_capacity(9);
    for r1 in Retrieved::ALL {
        for r2 in Retrieved::ALL {
            let success = BTreeMap::from([(q1, r1.success()), (q2, r2.success())]);
            let ctx = EvalContext::from_intent_success(&model, success, 0.0)
                .expect("toy success values are valid");
            let both = [q1, q2];
            rows.push(ToyRow {
                q1: r1,
                q2: r2,
                ga_ss_q1: ctx.ga_ss_within(q1).expect("toy"),
                ga_ss_q2: ctx.ga_ss_within(q2).expect("toy"),
                ga_ss_sum_of_product: ctx.ga_ss_sum_of_product(&both).expect("toy"),
                ga_ss_product_of_sum: ctx.ga_ss_product_of_sum(&both).expect("toy"),
            });
        }
    }
    rows
}
