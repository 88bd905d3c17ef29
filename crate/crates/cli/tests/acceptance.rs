//! Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
//! budgets are fixed below.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use gass_cli::report;
use gass_core::analysis::Metric;
use gass_core::browse::{BrowsingModel, Ranking};
use gass_core::estimate::{self, InteractionLog};
use gass_core::eval::{self, EvalConfig, MetricReport, Temperature};
use gass_core::model::{
    Catalog, CondProb, ItemIx, Model, QueryIx, RelevanceTable, ScoreTable, SparseRow,
};
use gass_core::policy::{self, PlConfig, Policy};
use gass_core::rankers::Ranker;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const GASS: &str = env!("CARGO_BIN_EXE_gass");

const TOY_BUDGET: Duration = Duration::from_secs(1);
const CONVERGENCE_TRIALS: usize = 100;
const CONVERGENCE_TOL: f64 = 1e-12;
const PL_EXACT_TOL: f64 = 1e-15;
const PL_SAMPLES: usize = 100_000;
const PL_FREQ_TOL: f64 = 0.01;
const PL_SUM_TOL: f64 = 1e-10;
const PL_BUDGET: Duration = Duration::from_secs(10);
const HOT_BETA: f64 = 64.0;
const COLD_BETA: f64 = 1.0 / 64.0;
const HOT_TOL: f64 = 0.01;
const COLD_TOL: f64 = 1e-3;
const PROPERTY_TRIALS: usize = 1000;
const COLLAPSE_TOL: f64 = 1e-12;
const PROPERTY_BUDGET: Duration = Duration::from_secs(30);
const BRUTE_INSTANCES: usize = 10;
const BRUTE_TOL: f64 = 0.01;
const SWEEP_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < budget, || {
        format!("took {took:.2?}, budget {budget:?}")
    })?;
    Ok(took)
}

fn gass(dir: &Path, args: &[&str], threads: Option<usize>) -> Result<Output, String> {
    let mut cmd = Command::new(GASS);
    cmd.args(args).current_dir(dir);
    match threads {
        Some(n) => cmd.env("GASS_THREADS", n.to_string()),
        None => cmd.env_remove("GASS_THREADS"),
    };
    let out = cmd.output().map_err(|e| format!("cannot run gass: {e}"))?;
    if out.status.success() {
        Ok(out)
    } else {
        Err(format!(
            "gass {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

// ---------------------------------------------------------------------------
// Random instances

struct Limits {
    queries: usize,
    items: usize,
    intents: usize,
    groups: usize,
}

const SMALL: Limits = Limits {
    queries: 4,
    items: 6,
    intents: 3,
    groups: 3,
};

fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.25) {
                    0.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.iter().map(|x| x / total).collect();
        }
    }
}

/// A random model estimated from a random log. With `shared_groups`, every
/// group issues every query with identical counts.
fn random_model(rng: &mut ChaCha8Rng, lim: &Limits, shared_groups: bool) -> Model {
    let nq = rng.gen_range(1..=lim.queries);
    let nd = rng.gen_range(1..=lim.items);
    let nt = rng.gen_range(1..=lim.intents);
    let ng = rng.gen_range(1..=lim.groups);

    let mut log = InteractionLog::default();
    let mut issued = vec![false; ng];
    for q in 0..nq {
        let mut groups: Vec<usize> = if shared_groups {
            (0..ng).collect()
        } else {
            (0..ng).filter(|_| rng.gen_bool(0.6)).collect()
        };
        if groups.is_empty() {
            groups.push(rng.gen_range(0..ng));
        }
        let shared: Vec<(usize, u64)> = random_counts(rng, nd);
        for &g in &groups {
            issued[g] = true;
            let counts = if shared_groups {
                shared.clone()
            } else {
                random_counts(rng, nd)
            };
            for (d, c) in counts {
                log.push(&format!("g{g}"), &format!("q{q}"), &format!("d{d}"), c);
            }
        }
    }
    for (g, done) in issued.iter().enumerate() {
        if !done {
            let q = rng.gen_range(0..nq);
            log.push(
                &format!("g{g}"),
                &format!("q{q}"),
                "d0",
                rng.gen_range(1..5),
            );
        }
    }

    let mut catalog = Catalog::new();
    for r in &log.rows {
        catalog.groups.insert(&r.group);
        catalog.queries.insert(&r.query);
        catalog.items.insert(&r.item);
    }
    let intents: Vec<_> = (0..nt)
        .map(|t| catalog.intents.insert(&format!("t{t}")))
        .collect();
    let mut ptd = CondProb::new();
    let mut rel = RelevanceTable::new();
    for d in catalog.items.iter() {
        let w = weights(rng, nt);
        ptd.insert_row(d, SparseRow::from_pairs(intents.iter().copied().zip(w)));
        for &t in &intents {
            if rng.gen_bool(0.8) {
                rel.set(d, t, rng.gen());
            }
        }
    }
    estimate::build_model(catalog, &log, ptd, rel).expect("random model builds")
}

fn random_counts(rng: &mut ChaCha8Rng, nd: usize) -> Vec<(usize, u64)> {
    let mut out = Vec::new();
    for d in 0..nd {
        if rng.gen_bool(0.7) {
            out.push((d, rng.gen_range(1..10)));
        }
    }
    if out.is_empty() {
        out.push((rng.gen_range(0..nd), rng.gen_range(1..10)));
    }
    out
}

fn random_config(rng: &mut ChaCha8Rng, epsilon: f64) -> EvalConfig {
    let temperature = if rng.gen_bool(0.3) {
        Temperature::Static
    } else {
        Temperature::Beta(2f64.powi(rng.gen_range(-3..=3)))
    };
    EvalConfig {
        ranker: *Ranker::ALL.choose(rng).unwrap(),
        temperature,
        samples: 20,
        epsilon,
        seed: rng.gen(),
        ..EvalConfig::default()
    }
}

fn metric_values(r: &MetricReport) -> [f64; 4] {
    let a = &r.aggregate;
    [
        a.mean_da_ss_within,
        a.mean_ga_ss_within,
        a.ga_ss_sum_of_product,
        a.ga_ss_product_of_sum,
    ]
}

// ---------------------------------------------------------------------------
// Criteria

fn toy_oracle() -> Vec<[&'static str; 6]> {
    // Group A wants t1, group B wants t2; each query is issued equally by
    // both groups. A query serves a group iff it retrieves that group's
    // intent, so GA within is 1 only for t1+t2. Across queries, each group
    // weighs the two queries 1/2.
    vec![
        ["t1", "t1", "0", "0", "0", "0"],
        ["t1", "t2", "0", "0", "0", "0.25"],
        ["t1", "t1+t2", "0", "1", "0.5", "0.5"],
        ["t2", "t1", "0", "0", "0", "0.25"],
        ["t2", "t2", "0", "0", "0", "0"],
        ["t2", "t1+t2", "0", "1", "0.5", "0.5"],
        ["t1+t2", "t1", "1", "0", "0.5", "0.5"],
        ["t1+t2", "t2", "1", "0", "0.5", "0.5"],
        ["t1+t2", "t1+t2", "1", "1", "1", "1"],
    ]
}

fn criterion_1() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = gass(dir.path(), &["toy"], None)?;
    let took = within_budget(start, TOY_BUDGET)?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let oracle = toy_oracle();
    check(rows.len() == oracle.len(), || {
        format!("{} rows", rows.len())
    })?;
    for (row, want) in rows.iter().zip(&oracle) {
        check(row[..2] == want[..2], || format!("row order {row:?}"))?;
        for (got, exp) in row[2..].iter().zip(&want[2..]) {
            let (g, e): (f64, f64) = (got.parse().unwrap_or(f64::NAN), exp.parse().unwrap());
            check(g == e, || format!("{row:?} differs from {want:?}"))?;
        }
    }
    let find = |a: &str, b: &str| rows.iter().find(|r| r[0] == a && r[1] == b).cloned();
    let (x, y) = (find("t2", "t1").unwrap(), find("t2", "t2").unwrap());
    check(x[2..4] == y[2..4] && x[5] == "0.25" && y[5] == "0", || {
        format!("pair {x:?} vs {y:?}")
    })?;
    Ok(format!(
        "9 systems x 4 metrics exact; (t2,t1) vs (t2,t2) product-of-sum 0.25 vs 0; {took:.2?}"
    ))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let lim = Limits {
        queries: 1,
        ..SMALL
    };
    let mut worst: f64 = 0.0;
    for trial in 0..CONVERGENCE_TRIALS {
        let model = random_model(&mut rng, &lim, false);
        let cfg = random_config(&mut rng, gass_core::metrics::DEFAULT_EPSILON);
        let report = eval::evaluate(&model, &cfg).map_err(|e| format!("trial {trial}: {e}"))?;
        let within = report.queries[0].ga_ss_within;
        let a = &report.aggregate;
        for v in [a.ga_ss_sum_of_product, a.ga_ss_product_of_sum] {
            worst = worst.max((v - within).abs());
        }
        check(worst < CONVERGENCE_TOL, || {
            format!("trial {trial}: gap {worst:e}")
        })?;
    }
    Ok(format!(
        "{CONVERGENCE_TRIALS} single-query models, max gap {worst:e} < {CONVERGENCE_TOL:e}"
    ))
}

fn three_item_scores() -> (ScoreTable, Catalog, [ItemIx; 3]) {
    let mut catalog = Catalog::new();
    let q = catalog.queries.insert("q");
    let d = [
        catalog.items.insert("a"),
        catalog.items.insert("b"),
        catalog.items.insert("c"),
    ];
    let mut scores = ScoreTable::new();
    scores.insert(q, vec![(d[0], 4f64.ln()), (d[1], 2f64.ln()), (d[2], 0.0)]);
    (scores, catalog, d)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let (scores, _, d) = three_item_scores();
    let q = QueryIx(0);
    let identity = Ranking::new(q, d.to_vec()).map_err(|e| e.to_string())?;
    let p = policy::pl_permutation_prob(&scores, q, 1.0, &identity).map_err(|e| e.to_string())?;
    check((p - 8.0 / 21.0).abs() <= PL_EXACT_TOL, || {
        format!("exact {p}")
    })?;

    let hits = (0..PL_SAMPLES as u64)
        .filter(|&i| {
            let mut rng = policy::sample_rng(7, "q", i);
            let r = policy::pl_sample_one(&scores, q, 1.0, None, &mut rng).expect("valid scores");
            r.items() == d
        })
        .count();
    let freq = hits as f64 / PL_SAMPLES as f64;
    check((freq - 8.0 / 21.0).abs() <= PL_FREQ_TOL, || {
        format!("frequency {freq}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        for _ in 0..20 {
            let mut catalog = Catalog::new();
            let q = catalog.queries.insert("q");
            let row = (0..n)
                .map(|i| {
                    (
                        catalog.items.insert(&format!("d{i}")),
                        rng.gen_range(-3.0..3.0),
                    )
                })
                .collect();
            let mut s = ScoreTable::new();
            s.insert(q, row);
            let beta = 2f64.powi(rng.gen_range(-4..=4));
            let exact = policy::pl_exact_policy(&s, q, beta, 6).map_err(|e| e.to_string())?;
            let total: f64 = exact.rankings().iter().map(|(_, w)| w).sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    check(worst <= PL_SUM_TOL, || {
        format!("exact weights off by {worst:e}")
    })?;
    let took = within_budget(start, PL_BUDGET)?;
    Ok(format!(
        "P(identity)={p:.15} (8/21), empirical {freq:.4} over {PL_SAMPLES}, exact sums within {worst:e} for n<=6; {took:.2?}"
    ))
}

fn five_item_scores(values: [f64; 5]) -> (ScoreTable, Catalog) {
    let mut catalog = Catalog::new();
    let q = catalog.queries.insert("q");
    let row = values
        .iter()
        .enumerate()
        .map(|(i, &s)| (catalog.items.insert(&format!("d{i}")), s))
        .collect();
    let mut scores = ScoreTable::new();
    scores.insert(q, row);
    (scores, catalog)
}

fn sampled_exposures(
    scores: &ScoreTable,
    catalog: &Catalog,
    beta: f64,
) -> Result<Vec<f64>, String> {
    let browsing = BrowsingModel::rbp(0.8).map_err(|e| e.to_string())?;
    let cfg = PlConfig {
        beta,
        samples: PL_SAMPLES,
        seed: 4,
        depth: None,
    };
    let sample =
        policy::pl_sample_policy(scores, catalog, QueryIx(0), &cfg).map_err(|e| e.to_string())?;
    exposures_of(&browsing, Policy::Stochastic(sample), catalog.items.len())
}

fn exposures_of(browsing: &BrowsingModel, p: Policy, n: usize) -> Result<Vec<f64>, String> {
    let mut out = vec![0.0; n];
    for (d, e) in browsing.exposures(&p).map_err(|e| e.to_string())? {
        out[d.0] = e;
    }
    Ok(out)
}

fn criterion_4() -> Outcome {
    let gamma: f64 = 0.8;
    let n = 5;
    let uniform = (1.0 - gamma.powi(n)) / (n as f64 * (1.0 - gamma));
    let (scores, catalog) = five_item_scores([1.0, 0.75, 0.5, 0.25, 0.0]);
    let hot = sampled_exposures(&scores, &catalog, HOT_BETA)?;
    let hot_gap = hot.iter().map(|e| (e - uniform).abs()).fold(0.0, f64::max);
    check(hot_gap <= HOT_TOL, || {
        format!("beta=64 exposures {hot:?} vs {uniform}")
    })?;

    let (scores, catalog) = five_item_scores([0.5, 0.4, 0.3, 0.2, 0.1]);
    let browsing = BrowsingModel::rbp(gamma).map_err(|e| e.to_string())?;
    let ranking =
        policy::static_ranking(&scores, &catalog, QueryIx(0), None).map_err(|e| e.to_string())?;
    let stat = exposures_of(&browsing, Policy::Static(ranking), n as usize)?;
    let cold = sampled_exposures(&scores, &catalog, COLD_BETA)?;
    let cold_gap = stat
        .iter()
        .zip(&cold)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(cold_gap <= COLD_TOL, || {
        format!("beta=1/64 exposures {cold:?} vs {stat:?}")
    })?;
    Ok(format!(
        "beta=64 max |E-{uniform:.5}| = {hot_gap:.4}; beta=1/64 max gap to static {cold_gap:.1e} (score gaps 0.1)"
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut collapse_worst: f64 = 0.0;
    for trial in 0..PROPERTY_TRIALS {
        let fail = |what: &str| format!("trial {trial}: {what}");

        // Bound: within-query GA never exceeds the weakest group (eps = 0).
        let model = random_model(&mut rng, &SMALL, false);
        let cfg = random_config(&mut rng, 0.0);
        let report = eval::evaluate(&model, &cfg).map_err(|e| fail(&e.to_string()))?;
        for q in &report.queries {
            let min = q
                .group_success
                .values()
                .copied()
                .fold(f64::INFINITY, f64::min);
            check(q.ga_ss_within <= min, || {
                fail(&format!("{} > min {min}", q.ga_ss_within))
            })?;
        }

        // Monotonicity: raising relevance never lowers any metric.
        let mut better = model.clone();
        let entries: Vec<_> = model
            .catalog
            .items
            .iter()
            .flat_map(|d| model.catalog.intents.iter().map(move |t| (d, t)))
            .collect();
        for &(d, t) in &entries {
            if rng.gen_bool(0.5) {
                let r = model.relevance.get(d, t);
                better.relevance.set(d, t, r + rng.gen::<f64>() * (1.0 - r));
            }
        }
        let epsilon = if rng.gen_bool(0.5) { 0.0 } else { 1e-6 };
        let cfg = random_config(&mut rng, epsilon);
        let before = eval::evaluate(&model, &cfg).map_err(|e| fail(&e.to_string()))?;
        let after = eval::evaluate(&better, &cfg).map_err(|e| fail(&e.to_string()))?;
        for (b, a) in metric_values(&before).iter().zip(metric_values(&after)) {
            check(a >= *b, || fail(&format!("aggregate fell {b} -> {a}")))?;
        }
        for (qb, qa) in before.queries.iter().zip(&after.queries) {
            check(
                qa.ga_ss_within >= qb.ga_ss_within && qa.da_ss_within >= qb.da_ss_within,
                || fail(&format!("query {} fell", qb.query)),
            )?;
        }

        // Collapse: identical group rows and equal priors give GA = DA^|G|.
        let shared = random_model(&mut rng, &SMALL, true);
        let cfg = random_config(&mut rng, 0.0);
        let report = eval::evaluate(&shared, &cfg).map_err(|e| fail(&e.to_string()))?;
        let groups = shared.catalog.groups.len() as i32;
        for q in &report.queries {
            let gap = (q.ga_ss_within - q.da_ss_within.powi(groups)).abs();
            collapse_worst = collapse_worst.max(gap);
            check(gap <= COLLAPSE_TOL, || {
                fail(&format!("collapse gap {gap:e}"))
            })?;
        }
    }
    let took = within_budget(start, PROPERTY_BUDGET)?;
    Ok(format!(
        "{PROPERTY_TRIALS} instances: bound exact, monotone in every trial, collapse gap {collapse_worst:e}; {took:.2?}"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lim = Limits { items: 5, ..SMALL };
    let mut worst: f64 = 0.0;
    for instance in 0..BRUTE_INSTANCES {
        let model = random_model(&mut rng, &lim, false);
        let beta = [0.25, 1.0, 4.0][instance % 3];
        let cfg = EvalConfig {
            ranker: Ranker::ALL[instance % 2],
            temperature: Temperature::Beta(beta),
            samples: PL_SAMPLES,
            seed: rng.gen(),
            ..EvalConfig::default()
        };
        let scores = eval::policy_scores(&model, &cfg).map_err(|e| e.to_string())?;
        let exact: Vec<Policy> = model
            .evaluable_queries()
            .into_iter()
            .map(|q| policy::pl_exact_policy(&scores, q, beta, 5).map(Policy::Stochastic))
            .collect::<gass_core::Result<_>>()
            .map_err(|e| e.to_string())?;
        let browsing = cfg.browsing().map_err(|e| e.to_string())?;
        let exact =
            eval::evaluate_policies(&model, &exact, &browsing, &cfg).map_err(|e| e.to_string())?;
        let sampled = eval::evaluate(&model, &cfg).map_err(|e| e.to_string())?;
        for (m, (a, b)) in Metric::ALL
            .iter()
            .zip(metric_values(&exact).iter().zip(metric_values(&sampled)))
        {
            let gap = (a - b).abs();
            worst = worst.max(gap);
            check(gap <= BRUTE_TOL, || {
                format!("instance {instance} {m}: exact {a} vs sampled {b}")
            })?;
        }
    }
    Ok(format!(
        "{BRUTE_INSTANCES} instances (<=5 items): enumeration vs {PL_SAMPLES} samples, max gap {worst:.4}"
    ))
}

struct SweepRun {
    dir: tempfile::TempDir,
    cells: Vec<gass_core::analysis::SweepCell>,
    took: Duration,
}

fn run_sweep() -> Result<SweepRun, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    gass(dir.path(), &["synth", "--out", "data"], None)?;
    let start = Instant::now();
    gass(
        dir.path(),
        &["sweep", "--model", "data/model.json", "--out", "sweep.csv"],
        None,
    )?;
    let took = start.elapsed();
    let path = dir.path().join("sweep.csv");
    let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let cells = report::parse_sweep_csv(&text, &path).map_err(|e| e.to_string())?;
    Ok(SweepRun { dir, cells, took })
}

fn criterion_7(run: &SweepRun) -> Outcome {
    check(run.took < SWEEP_BUDGET, || {
        format!("sweep took {:.2?}", run.took)
    })?;
    check(run.cells.len() == 14, || {
        format!("{} cells", run.cells.len())
    })?;
    let value = |r: Ranker, b: f64, m: Metric| {
        run.cells
            .iter()
            .find(|c| c.ranker == r && c.beta == Temperature::Beta(b))
            .map(|c| c.values.get(m))
            .ok_or_else(|| format!("missing cell {r} {b}"))
    };
    for r in Ranker::ALL {
        for m in Metric::ALL {
            let series: Vec<f64> = run
                .cells
                .iter()
                .filter(|c| c.ranker == r)
                .map(|c| c.values.get(m))
                .collect();
            let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let hot = value(r, 8.0, m)?;
            check(hot < max, || {
                format!("{r} {m}: beta=8 value {hot} is the maximum")
            })?;
        }
    }
    let mut margin = f64::INFINITY;
    for b in [0.125, 0.25, 0.5, 1.0] {
        for m in [
            Metric::GaSsWithin,
            Metric::GaSsSumOfProduct,
            Metric::GaSsProductOfSum,
        ] {
            let (g, p) = (value(Ranker::Gmpc, b, m)?, value(Ranker::Mpc, b, m)?);
            margin = margin.min(g - p);
            check(g >= p, || format!("beta={b} {m}: gmpc {g} < mpc {p}"))?;
        }
    }
    Ok(format!(
        "14 cells in {:.2?}; beta=8 below grid max for every ranker and metric; gmpc - mpc >= {margin:.2e} on group-aware metrics for beta<=1",
        run.took
    ))
}

fn criterion_8(run: &SweepRun) -> Outcome {
    let out = gass(run.dir.path(), &["correlate", "--sweep", "sweep.csv"], None)?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or("empty matrix")?
        .split(',')
        .skip(1)
        .collect();
    let mut tau: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        for (col, v) in header.iter().zip(&fields[1..]) {
            let v: f64 = v.parse().map_err(|_| format!("bad value {v}"))?;
            tau.insert((fields[0].to_owned(), (*col).to_owned()), v);
        }
        rows += 1;
    }
    check(rows == 4 && header.len() == 4, || {
        format!("{rows}x{} matrix", header.len())
    })?;
    let get = |a: Metric, b: Metric| tau[&(a.as_str().to_owned(), b.as_str().to_owned())];
    for a in Metric::ALL {
        check(get(a, a) == 1.0, || format!("diagonal {a} = {}", get(a, a)))?;
        for b in Metric::ALL {
            check(get(a, b) == get(b, a), || format!("asymmetric at {a},{b}"))?;
        }
    }
    let ga = get(Metric::GaSsSumOfProduct, Metric::GaSsProductOfSum);
    let da_sp = get(Metric::DaSs, Metric::GaSsSumOfProduct);
    let da_ps = get(Metric::DaSs, Metric::GaSsProductOfSum);
    check(ga > da_sp && ga > da_ps, || {
        format!("tau(sum-of-product, product-of-sum) {ga} vs DA pairings {da_sp}, {da_ps}")
    })?;
    Ok(format!(
        "tau(GA sum-of-product, GA product-of-sum) = {ga:.3} > tau(DA, .) = {da_sp:.3}, {da_ps:.3}; symmetric, unit diagonal"
    ))
}

fn criterion_9(run: &SweepRun) -> Outcome {
    let dir = run.dir.path();
    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    for threads in [1, 3, 8] {
        let eval_out = format!("eval_{threads}.json");
        let sweep_out = format!("sweep_{threads}.csv");
        gass(
            dir,
            &[
                "eval",
                "--model",
                "data/model.json",
                "--ranker",
                "gmpc",
                "--beta",
                "1/2",
                "--out",
                &eval_out,
            ],
            Some(threads),
        )?;
        gass(
            dir,
            &["sweep", "--model", "data/model.json", "--out", &sweep_out],
            Some(threads),
        )?;
        let read = |name: String| fs::read(dir.join(name)).map_err(|e| e.to_string());
        outputs.push(vec![
            read(eval_out)?,
            read(format!("eval_{threads}.csv"))?,
            read(sweep_out)?,
            read(format!("sweep_{threads}.json"))?,
        ]);
    }
    for (i, other) in outputs.iter().enumerate().skip(1) {
        for (k, (a, b)) in outputs[0].iter().zip(other).enumerate() {
            check(a == b, || {
                format!("output {k} differs between thread counts 1 and run {i}")
            })?;
        }
    }
    Ok("eval JSON+CSV and sweep CSV+JSON byte-identical with GASS_THREADS=1,3,8".into())
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
        Err(why) => {
            failed += 1;
            println!("FAIL criterion {n} ({name}): {why}");
        }
    };
    report(1, "toy table", criterion_1());
    report(2, "single-query convergence", criterion_2());
    report(3, "Plackett-Luce correctness", criterion_3());
    report(4, "temperature limits", criterion_4());
    report(5, "bound, collapse, monotonicity", criterion_5());
    report(6, "enumeration vs sampling", criterion_6());
    match run_sweep() {
        Ok(run) => {
            report(7, "sweep shape", criterion_7(&run));
            report(8, "correlation pattern", criterion_8(&run));
            report(9, "reproducibility", criterion_9(&run));
        }
        Err(e) => {
            for (n, name) in [
                (7, "sweep shape"),
                (8, "correlation pattern"),
                (9, "reproducibility"),
            ] {
                report(n, name, Err(e.clone()));
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
