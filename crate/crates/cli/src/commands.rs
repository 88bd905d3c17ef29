use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gass_core::analysis;
use gass_core::browse::DEFAULT_GAMMA;
use gass_core::estimate::{self, SynthConfig};
use gass_core::eval::{self, EvalConfig, ScoreTransform, Temperature};
use gass_core::metrics::{QueryWeighting, DEFAULT_EPSILON};
use gass_core::policy::{self, Policy, DEFAULT_MAX_EXACT, DEFAULT_SAMPLES, DEFAULT_SEED};
use gass_core::rankers::{Ranker, DEFAULT_RANKER_SMOOTHING};
use indexmap::IndexMap;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::format::{self, Bundle, BundleMeta, Table};
use crate::report;

#[derive(Debug, Parser)]
#[command(
    name = "gass",
    version,
    about = "Group-aware search success evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a model bundle from an interaction log and item tables
    Ingest(IngestArgs),
    /// Evaluate one ranker at one temperature
    Eval(EvalArgs),
    /// Evaluate a grid of rankers and temperatures
    Sweep(SweepArgs),
    /// Kendall tau between metrics over a sweep
    Correlate(CorrelateArgs),
    /// Print the two-query, two-group toy table
    Toy(ToyArgs),
    /// Generate a seeded synthetic dataset
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Interaction log (TSV: group, query, item, count)
    #[arg(long)]
    pub log: PathBuf,
    /// p(t|d) as JSON `item -> intent -> p`
    #[arg(long)]
    pub intents: PathBuf,
    /// p(r_d|t) as JSON `item -> intent -> p`
    #[arg(long)]
    pub relevance: PathBuf,
    /// Model bundle to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransformArg {
    Minmax,
    Raw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    Prior,
    Uniform,
}

/// Settings shared by `eval` and `sweep`.
#[derive(Debug, Args)]
pub struct EvalOptions {
    /// Rankings sampled per query
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Browsing patience
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Smoothing added to each group success factor
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Ranking cutoff; unlimited when absent
    #[arg(long)]
    pub depth: Option<usize>,
    /// Smoothing inside the gMPC score product
    #[arg(long, default_value_t = DEFAULT_RANKER_SMOOTHING)]
    pub ranker_smoothing: f64,
    /// How scores become Plackett-Luce logits
    #[arg(long, value_enum, default_value_t = TransformArg::Minmax)]
    pub score_transform: TransformArg,
    /// Averaging of within-query metrics over queries
    #[arg(long, value_enum, default_value_t = WeightingArg::Prior)]
    pub weighting: WeightingArg,
}

impl EvalOptions {
    fn config(&self, ranker: Ranker, temperature: Temperature) -> EvalConfig {
        EvalConfig {
            ranker,
            temperature,
            samples: self.samples,
            gamma: self.gamma,
            epsilon: self.epsilon,
            ranker_smoothing: self.ranker_smoothing,
            seed: self.seed,
            depth: self.depth,
            score_transform: match self.score_transform {
                TransformArg::Minmax => ScoreTransform::MinMax,
                TransformArg::Raw => ScoreTransform::Raw,
            },
            weighting: match self.weighting {
                WeightingArg::Prior => QueryWeighting::Prior,
                WeightingArg::Uniform => QueryWeighting::Uniform,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model bundle
    #[arg(long)]
    pub model: PathBuf,
    /// mpc or gmpc (mpv, gmpv accepted)
    #[arg(long, default_value = "mpc")]
    pub ranker: Ranker,
    /// `static` or a positive temperature such as 0.5 or 1/8
    #[arg(long, default_value = "static")]
    pub beta: Temperature,
    #[command(flatten)]
    pub options: EvalOptions,
    /// Enumerate every permutation instead of sampling
    #[arg(long)]
    pub exact: bool,
    /// Largest candidate set allowed with --exact
    #[arg(long, default_value_t = DEFAULT_MAX_EXACT)]
    pub max_exact: usize,
    /// JSON report path; a CSV is written next to it. Prints JSON when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Model bundle
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated rankers
    #[arg(long, value_delimiter = ',', default_values = ["mpc", "gmpc"])]
    pub rankers: Vec<Ranker>,
    /// Comma-separated temperatures
    #[arg(long, value_delimiter = ',', default_values = ["1/8", "1/4", "1/2", "1", "2", "4", "8"])]
    pub betas: Vec<Temperature>,
    /// Skip the deterministic reference rankings
    #[arg(long)]
    pub no_static: bool,
    #[command(flatten)]
    pub options: EvalOptions,
    /// CSV grid path; a JSON report is written next to it. Prints CSV when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write normalized temperature-vs-metric plot data (CSV)
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Sweep CSV
    #[arg(long)]
    pub sweep: PathBuf,
    /// Matrix CSV; printed when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ToyFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long, value_enum, default_value_t = ToyFormat::Csv)]
    pub format: ToyFormat,
    /// Output file; printed when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    #[arg(long, default_value_t = 500)]
    pub items: usize,
    #[arg(long, default_value_t = 10)]
    pub intents: usize,
    #[arg(long, default_value_t = 2)]
    pub groups: usize,
    /// Overlap of group intent preferences; near 0 means disjoint
    #[arg(long, default_value_t = 0.1)]
    pub group_concentration: f64,
    /// Dirichlet concentration of item intent mixes
    #[arg(long, default_value_t = 0.3)]
    pub item_concentration: f64,
    /// Comma-separated interactions per group [default: 18000,2000 for two
    /// groups, 10000 each otherwise]
    #[arg(long, value_delimiter = ',')]
    pub interactions: Option<Vec<u64>>,
    #[arg(long, default_value_t = 30)]
    pub candidates: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory receiving log.tsv, intents.json, relevance.json and model.json
    #[arg(long)]
    pub out: PathBuf,
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Correlate(a) => correlate(a),
        Command::Toy(a) => toy(a),
        Command::Synth(a) => synth(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => format::write_text(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

/// `(json, csv)` output paths derived from one `--out` value.
fn paired_paths(out: &Path, primary_json: bool) -> (PathBuf, PathBuf) {
    let ext = out.extension().and_then(|e| e.to_str());
    match (ext, primary_json) {
        (Some("csv"), _) => (out.with_extension("json"), out.to_path_buf()),
        (Some("json"), _) => (out.to_path_buf(), out.with_extension("csv")),
        (_, true) => (out.to_path_buf(), out.with_extension("csv")),
        (_, false) => (out.with_extension("json"), out.to_path_buf()),
    }
}

fn path_value(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

fn ingest(a: IngestArgs) -> CliResult<()> {
    let log = format::parse_log(&format::read_text(&a.log)?, &a.log)?;
    let intents: Table = format::read_json(&a.intents)?;
    let relevance: Table = format::read_json(&a.relevance)?;
    let model = format::assemble_model(&log, &intents, &relevance)?;
    let params = IndexMap::from([
        ("log".to_owned(), path_value(&a.log)),
        ("intents".to_owned(), path_value(&a.intents)),
        ("relevance".to_owned(), path_value(&a.relevance)),
    ]);
    let bundle = Bundle::from_model(&model, BundleMeta::new("ingest", params));
    format::write_text(&a.out, &format::to_json(&bundle))
}

fn eval_cmd(a: EvalArgs) -> CliResult<()> {
    let model = format::load_model(&a.model)?;
    let config = a.options.config(a.ranker, a.beta);
    let report = if a.exact {
        let beta = a
            .beta
            .beta()
            .ok_or_else(|| CliError::Usage("--exact needs a numeric --beta".into()))?;
        let scores = eval::policy_scores(&model, &config)?;
        let policies = model
            .evaluable_queries()
            .par_iter()
            .map(|&q| {
                policy::pl_exact_policy(&scores, q, beta, a.max_exact).map(Policy::Stochastic)
            })
            .collect::<gass_core::Result<Vec<_>>>()?;
        eval::evaluate_policies(&model, &policies, &config.browsing()?, &config)?
    } else {
        eval::evaluate(&model, &config)?
    };
    let mut doc = serde_json::to_value(&report).expect("serializable report");
    doc["metadata"]["exact"] = json!(a.exact);
    doc["metadata"]["model"] = path_value(&a.model);
    let json = format::to_json(&doc);
    match &a.out {
        Some(out) => {
            let (json_path, csv_path) = paired_paths(out, true);
            format::write_text(&json_path, &json)?;
            format::write_text(&csv_path, &report::eval_csv(&report))
        }
        None => emit(None, &json),
    }
}

fn sweep(a: SweepArgs) -> CliResult<()> {
    let model = format::load_model(&a.model)?;
    let betas = a
        .betas
        .iter()
        .map(|t| {
            t.beta()
                .ok_or_else(|| CliError::Usage("--betas takes numeric temperatures only".into()))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if a.rankers.is_empty() {
        return Err(CliError::Usage("--rankers is empty".into()));
    }
    let base = a.options.config(Ranker::Mpc, Temperature::Static);
    let result = analysis::sweep(&model, &a.rankers, &betas, &base, !a.no_static)?;
    let csv = report::sweep_csv(&result.cells);
    if let Some(path) = &a.plot_data {
        format::write_text(path, &report::plot_csv(&analysis::plot_data(&result)))?;
    }
    match &a.out {
        Some(out) => {
            let (json_path, csv_path) = paired_paths(out, false);
            let mut doc = serde_json::to_value(&result).expect("serializable sweep");
            doc["metadata"]["model"] = path_value(&a.model);
            format::write_text(&json_path, &format::to_json(&doc))?;
            format::write_text(&csv_path, &csv)
        }
        None => emit(None, &csv),
    }
}

fn correlate(a: CorrelateArgs) -> CliResult<()> {
    let cells = report::parse_sweep_csv(&format::read_text(&a.sweep)?, &a.sweep)?;
    let matrix = analysis::correlation_matrix(&cells)?;
    emit(a.out.as_deref(), &report::correlation_csv(&matrix))
}

fn toy(a: ToyArgs) -> CliResult<()> {
    let rows = analysis::toy_table();
    let text = match a.format {
        ToyFormat::Csv => report::toy_csv(&rows),
        ToyFormat::Json => format::to_json(&rows),
    };
    emit(a.out.as_deref(), &text)
}

fn synth(a: SynthArgs) -> CliResult<()> {
    let interactions = match a.interactions {
        Some(v) => v,
        None if a.groups == 2 => SynthConfig::default().interactions_per_group,
        None => vec![10_000; a.groups],
    };
    let config = SynthConfig {
        queries: a.queries,
        items: a.items,
        intents: a.intents,
        groups: a.groups,
        group_intent_concentration: a.group_concentration,
        intent_item_concentration: a.item_concentration,
        interactions_per_group: interactions,
        candidates_per_query: a.candidates,
        seed: a.seed,
    };
    let data = estimate::gen_synthetic(&config)?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let cat = &data.catalog;
    format::write_text(&a.out.join("log.tsv"), &format::log_to_tsv(&data.log))?;
    format::write_text(
        &a.out.join("intents.json"),
        &format::to_json(&format::table_doc(&data.intent_given_item, cat)),
    )?;
    format::write_text(
        &a.out.join("relevance.json"),
        &format::to_json(&format::relevance_doc(&data.relevance, cat)),
    )?;
    let params = match serde_json::to_value(&config).expect("serializable config") {
        Value::Object(map) => map.into_iter().collect(),
        _ => IndexMap::new(),
    };
    let model = data.into_model()?;
    format::check_model(&model)?;
    let bundle = Bundle::from_model(&model, BundleMeta::new("synth", params));
    format::write_text(&a.out.join("model.json"), &format::to_json(&bundle))
}
