//! CSV renderings of reports. All files use ',' delimiters, LF line endings
//! and a header row; numbers use the shortest decimal form that parses back
//! to the same value.

use std::path::Path;

use gass_core::analysis::{CorrelationMatrix, Metric, MetricValues, PlotPoint, SweepCell, ToyRow};
use gass_core::eval::{MetricReport, Temperature};
use gass_core::rankers::Ranker;

use crate::error::{CliError, CliResult};

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("utf-8 fields")
}

fn put(w: &mut csv::Writer<Vec<u8>>, record: &[String]) {
    w.write_record(record).expect("in-memory writer");
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Long format: `scope,key,metric,value`, one line per number.
pub fn eval_csv(report: &MetricReport) -> String {
    let mut w = writer();
    put(
        &mut w,
        &["scope", "key", "metric", "value"].map(String::from),
    );
    let line = |w: &mut csv::Writer<Vec<u8>>, scope: &str, key: &str, metric: &str, v: f64| {
        put(w, &[scope.into(), key.into(), metric.into(), num(v)]);
    };
    for q in &report.queries {
        line(&mut w, "query", &q.query, "da_ss", q.da_ss_within);
        line(&mut w, "query", &q.query, "ga_ss_within", q.ga_ss_within);
        for (g, v) in &q.group_success {
            line(&mut w, "query", &q.query, &format!("group_success:{g}"), *v);
        }
    }
    let a = &report.aggregate;
    line(&mut w, "aggregate", "", "mean_da_ss", a.mean_da_ss_within);
    line(
        &mut w,
        "aggregate",
        "",
        "mean_ga_ss_within",
        a.mean_ga_ss_within,
    );
    line(
        &mut w,
        "aggregate",
        "",
        "ga_ss_sum_of_product",
        a.ga_ss_sum_of_product,
    );
    line(
        &mut w,
        "aggregate",
        "",
        "ga_ss_product_of_sum",
        a.ga_ss_product_of_sum,
    );
    for (g, v) in &a.group_success {
        line(&mut w, "aggregate", g, "group_success", *v);
    }
    finish(w)
}

fn sweep_header() -> Vec<String> {
    let mut h = vec!["ranker".to_owned(), "beta".to_owned()];
    h.extend(Metric::ALL.iter().map(|m| m.as_str().to_owned()));
    h
}

/// One row per cell: `ranker,beta,<metrics>`.
pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut w = writer();
    put(&mut w, &sweep_header());
    for c in cells {
        let mut rec = vec![c.ranker.to_string(), c.beta.to_string()];
        rec.extend(Metric::ALL.iter().map(|&m| num(c.values.get(m))));
        put(&mut w, &rec);
    }
    finish(w)
}

/// Reads cells written by [`sweep_csv`]. Columns are found by name.
pub fn parse_sweep_csv(text: &str, path: &Path) -> CliResult<Vec<SweepCell>> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = r
        .headers()
        .map_err(|e| CliError::parse(path, e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::parse(path, format!("missing column '{name}'")))
    };
    let ranker_col = column("ranker")?;
    let beta_col = column("beta")?;
    let metric_cols: Vec<usize> = Metric::ALL
        .iter()
        .map(|m| column(m.as_str()))
        .collect::<CliResult<_>>()?;
    let mut cells = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::parse(path, format!("line {line}: {e}")))?;
        let field = |col: usize| rec.get(col).unwrap_or("");
        let bad =
            |what: &str, v: &str| CliError::parse(path, format!("line {line}: bad {what} '{v}'"));
        let ranker: Ranker = field(ranker_col)
            .parse()
            .map_err(|_| bad("ranker", field(ranker_col)))?;
        let beta: Temperature = field(beta_col)
            .parse()
            .map_err(|_| bad("beta", field(beta_col)))?;
        let mut v = [0.0; 4];
        for (slot, &col) in v.iter_mut().zip(&metric_cols) {
            *slot = field(col)
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad("value", field(col)))?;
        }
        cells.push(SweepCell {
            ranker,
            beta,
            values: MetricValues {
                da_ss: v[0],
                ga_ss_within: v[1],
                ga_ss_sum_of_product: v[2],
                ga_ss_product_of_sum: v[3],
            },
        });
    }
    Ok(cells)
}

/// Square matrix with a leading `metric` column.
pub fn correlation_csv(m: &CorrelationMatrix) -> String {
    let mut w = writer();
    let mut header = vec!["metric".to_owned()];
    header.extend(m.metrics.iter().map(|x| x.as_str().to_owned()));
    put(&mut w, &header);
    for (metric, row) in m.metrics.iter().zip(&m.values) {
        let mut rec = vec![metric.as_str().to_owned()];
        rec.extend(row.iter().map(|&v| num(v)));
        put(&mut w, &rec);
    }
    finish(w)
}

pub fn toy_csv(rows: &[ToyRow]) -> String {
    let mut w = writer();
    put(
        &mut w,
        &[
            "q1",
            "q2",
            "ga_ss_q1",
            "ga_ss_q2",
            "ga_ss_sum_of_product",
            "ga_ss_product_of_sum",
        ]
        .map(String::from),
    );
    for r in rows {
        put(
            &mut w,
            &[
                r.q1.label().to_owned(),
                r.q2.label().to_owned(),
                num(r.ga_ss_q1),
                num(r.ga_ss_q2),
                num(r.ga_ss_sum_of_product),
                num(r.ga_ss_product_of_sum),
            ],
        );
    }
    finish(w)
}

pub fn plot_csv(points: &[PlotPoint]) -> String {
    let mut w = writer();
    put(
        &mut w,
        &["metric", "ranker", "beta", "value", "normalized"].map(String::from),
    );
    for p in points {
        put(
            &mut w,
            &[
                p.metric.as_str().to_owned(),
                p.ranker.to_string(),
                num(p.beta),
                num(p.value),
                num(p.normalized),
            ],
        );
    }
    finish(w)
}
