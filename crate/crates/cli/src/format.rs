//! On-disk formats.
//!
//! * Interaction log: TSV with header `group query item count`.
//! * Item tables (`p(t|d)`, `p(r_d|t)`): JSON objects `item -> intent -> p`.
//! * Model bundle: one JSON document holding a metadata block, the id
//!   catalog and every probability table. Tables are keyed by condition then
//!   outcome; tables conditioned on a (query, group) pair nest
//!   `query -> group -> outcome`.

use std::fs;
use std::path::Path;

use gass_core::estimate::{self, InteractionLog};
use gass_core::model::{
    Catalog, CondProb, DenseIndex, GroupIx, Model, QueryIx, RelevanceTable, SparseRow,
};
use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const LOG_HEADER: [&str; 4] = ["group", "query", "item", "count"];

pub type Row = IndexMap<String, f64>;
pub type Table = IndexMap<String, Row>;
pub type PairTable = IndexMap<String, IndexMap<String, Row>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub tool: String,
    pub version: String,
    /// The subcommand that produced the bundle.
    pub command: String,
    #[serde(default)]
    pub params: IndexMap<String, serde_json::Value>,
}

impl BundleMeta {
    pub fn new(command: &str, params: IndexMap<String, serde_json::Value>) -> Self {
        Self {
            tool: "gass".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogDoc {
    pub queries: Vec<String>,
    pub items: Vec<String>,
    pub intents: Vec<String>,
    pub groups: Vec<String>,
}

/// Serialized form of a [`Model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub metadata: BundleMeta,
    pub catalog: CatalogDoc,
    pub query_prior: Row,
    pub group_prior: Row,
    pub query_given_group: Table,
    pub group_given_query: Table,
    pub item_given_query_group: PairTable,
    pub intent_given_item: Table,
    pub intent_given_query_group: PairTable,
    pub relevance: Table,
    pub candidates: IndexMap<String, Vec<String>>,
}

fn row_doc<K: DenseIndex>(row: &SparseRow<K>, catalog: &Catalog) -> Row {
    row.iter()
        .map(|(k, p)| (k.name(catalog).to_owned(), p))
        .collect()
}

pub fn table_doc<C: DenseIndex, O: DenseIndex>(table: &CondProb<C, O>, catalog: &Catalog) -> Table {
    table
        .rows()
        .map(|(c, row)| (c.name(catalog).to_owned(), row_doc(row, catalog)))
        .collect()
}

pub fn relevance_doc(table: &RelevanceTable, catalog: &Catalog) -> Table {
    table
        .rows()
        .map(|(d, row)| (d.name(catalog).to_owned(), row_doc(row, catalog)))
        .collect()
}

fn pair_doc<O: DenseIndex>(
    table: &CondProb<(QueryIx, GroupIx), O>,
    catalog: &Catalog,
) -> PairTable {
    let mut out = PairTable::new();
    for ((q, g), row) in table.rows() {
        out.entry(q.name(catalog).to_owned())
            .or_default()
            .insert(g.name(catalog).to_owned(), row_doc(row, catalog));
    }
    out
}

impl Bundle {
    pub fn from_model(model: &Model, metadata: BundleMeta) -> Self {
        let cat = &model.catalog;
        let names = |it: &mut dyn Iterator<Item = &str>| it.map(str::to_owned).collect();
        Self {
            metadata,
            catalog: CatalogDoc {
                queries: names(&mut cat.queries.names()),
                items: names(&mut cat.items.names()),
                intents: names(&mut cat.intents.names()),
                groups: names(&mut cat.groups.names()),
            },
            query_prior: row_doc(&model.query_prior, cat),
            group_prior: row_doc(&model.group_prior, cat),
            query_given_group: table_doc(&model.query_given_group, cat),
            group_given_query: table_doc(&model.group_given_query, cat),
            item_given_query_group: pair_doc(&model.item_given_query_group, cat),
            intent_given_item: table_doc(&model.intent_given_item, cat),
            intent_given_query_group: pair_doc(&model.intent_given_query_group, cat),
            relevance: relevance_doc(&model.relevance, cat),
            candidates: model
                .candidates
                .iter()
                .map(|(q, items)| {
                    let names = items.iter().map(|d| d.name(cat).to_owned()).collect();
                    (q.name(cat).to_owned(), names)
                })
                .collect(),
        }
    }

    /// Rebuilds the model, collecting every unknown or duplicate id.
    pub fn to_model(&self) -> CliResult<Model> {
        let mut problems = Vec::new();
        let mut catalog = Catalog::new();
        register(&mut catalog.queries, &self.catalog.queries, &mut problems);
        register(&mut catalog.items, &self.catalog.items, &mut problems);
        register(&mut catalog.intents, &self.catalog.intents, &mut problems);
        register(&mut catalog.groups, &self.catalog.groups, &mut problems);

        let mut r = Resolver {
            catalog: &catalog,
            problems,
        };
        let mut model = Model {
            query_prior: r.row("query_prior", &self.query_prior),
            group_prior: r.row("group_prior", &self.group_prior),
            query_given_group: r.table("query_given_group", &self.query_given_group),
            group_given_query: r.table("group_given_query", &self.group_given_query),
            item_given_query_group: r
                .pair_table("item_given_query_group", &self.item_given_query_group),
            intent_given_item: r.table("intent_given_item", &self.intent_given_item),
            intent_given_query_group: r
                .pair_table("intent_given_query_group", &self.intent_given_query_group),
            ..Model::default()
        };
        for (d, row) in &self.relevance {
            if let Some(d) = r.id("relevance", d) {
                model.relevance.insert_row(d, r.row("relevance", row));
            }
        }
        for (q, items) in &self.candidates {
            if let Some(q) = r.id("candidates", q) {
                let items = items.iter().filter_map(|d| r.id("candidates", d)).collect();
                model.candidates.insert(q, items);
            }
        }
        let problems = r.problems;
        if !problems.is_empty() {
            return Err(CliError::Validation(problems));
        }
        model.catalog = catalog;
        Ok(model)
    }
}

fn register<K: DenseIndex>(
    registry: &mut gass_core::model::Registry<K>,
    names: &[String],
    problems: &mut Vec<String>,
) {
    for name in names {
        if name.is_empty() {
            problems.push(format!("catalog: empty {} id", K::KIND));
        } else if registry.get(name).is_some() {
            problems.push(format!("catalog: duplicate {} '{name}'", K::KIND));
        } else {
            registry.insert(name);
        }
    }
}

struct Resolver<'a> {
    catalog: &'a Catalog,
    problems: Vec<String>,
}

impl Resolver<'_> {
    fn id<K: DenseIndex>(&mut self, table: &str, name: &str) -> Option<K> {
        let found = K::registry(self.catalog).get(name);
        if found.is_none() {
            self.problems
                .push(format!("{table}: unknown {} '{name}'", K::KIND));
        }
        found
    }

    fn row<K: DenseIndex>(&mut self, table: &str, row: &Row) -> SparseRow<K> {
        let pairs: Vec<(K, f64)> = row
            .iter()
            .filter_map(|(name, &p)| self.id(table, name).map(|k| (k, p)))
            .collect();
        SparseRow::from_pairs(pairs)
    }

    fn table<C: DenseIndex, O: DenseIndex>(&mut self, name: &str, doc: &Table) -> CondProb<C, O> {
        let mut out = CondProb::new();
        for (c, row) in doc {
            if let Some(c) = self.id(name, c) {
                out.insert_row(c, self.row(name, row));
            }
        }
        out
    }

    fn pair_table<O: DenseIndex>(
        &mut self,
        name: &str,
        doc: &PairTable,
    ) -> CondProb<(QueryIx, GroupIx), O> {
        let mut out = CondProb::new();
        for (q, by_group) in doc {
            let q = self.id::<QueryIx>(name, q);
            for (g, row) in by_group {
                let g = self.id::<GroupIx>(name, g);
                let row = self.row(name, row);
                if let (Some(q), Some(g)) = (q, g) {
                    out.insert_row((q, g), row);
                }
            }
        }
        out
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::parse(path, e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_json(&read_text(path)?, path)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Reads a bundle and checks every table invariant.
pub fn load_model(path: &Path) -> CliResult<Model> {
    let bundle: Bundle = read_json(path)?;
    let model = bundle.to_model()?;
    check_model(&model)?;
    Ok(model)
}

pub fn check_model(model: &Model) -> CliResult<()> {
    let violations = model.validate();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(
            violations.iter().map(ToString::to_string).collect(),
        ))
    }
}

/// Parses the TSV interaction log. Line numbers in errors are 1-based.
pub fn parse_log(text: &str, path: &Path) -> CliResult<InteractionLog> {
    let mut lines = text.split('\n').enumerate();
    let header = lines
        .next()
        .map(|(_, l)| l.trim_end_matches('\r'))
        .unwrap_or("");
    if header.is_empty() {
        return Err(CliError::parse(path, "line 1: missing header"));
    }
    if header.split('\t').ne(LOG_HEADER) {
        return Err(CliError::parse(
            path,
            format!("line 1: expected header '{}'", LOG_HEADER.join("\\t")),
        ));
    }
    let mut log = InteractionLog::default();
    let mut trailing_blank = false;
    for (i, line) in lines {
        let n = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            trailing_blank = true;
            continue;
        }
        if trailing_blank {
            return Err(CliError::parse(path, format!("line {}: blank line", n - 1)));
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(CliError::parse(
                path,
                format!(
                    "line {n}: expected 4 tab-separated fields, found {}",
                    fields.len()
                ),
            ));
        }
        if let Some(pos) = fields[..3].iter().position(|f| f.is_empty()) {
            return Err(CliError::parse(
                path,
                format!("line {n}: empty {}", LOG_HEADER[pos]),
            ));
        }
        let count: u64 = fields[3].parse().ok().filter(|&c| c > 0).ok_or_else(|| {
            CliError::parse(
                path,
                format!(
                    "line {n}: count must be a positive integer, got '{}'",
                    fields[3]
                ),
            )
        })?;
        log.push(fields[0], fields[1], fields[2], count);
    }
    if log.rows.is_empty() {
        return Err(CliError::parse(path, "log has no rows"));
    }
    Ok(log)
}

pub fn log_to_tsv(log: &InteractionLog) -> String {
    let mut out = LOG_HEADER.join("\t");
    out.push('\n');
    for r in &log.rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.group, r.query, r.item, r.count
        ));
    }
    out
}

/// Builds a model from a log and the two item tables. Log ids enter the
/// catalog in order of first appearance, followed by items and intents
/// first seen in `intents`. Relevance entries must refer to known items and
/// intents, and every logged item needs an intent row.
pub fn assemble_model(
    log: &InteractionLog,
    intents: &Table,
    relevance: &Table,
) -> CliResult<Model> {
    let mut catalog = Catalog::new();
    for r in &log.rows {
        catalog.groups.insert(&r.group);
        catalog.queries.insert(&r.query);
        catalog.items.insert(&r.item);
    }
    for (d, row) in intents {
        if d.is_empty() {
            return Err(CliError::Validation(vec!["intents: empty item id".into()]));
        }
        catalog.items.insert(d);
        for t in row.keys() {
            if t.is_empty() {
                return Err(CliError::Validation(
                    vec!["intents: empty intent id".into()],
                ));
            }
            catalog.intents.insert(t);
        }
    }
    let mut r = Resolver {
        catalog: &catalog,
        problems: Vec::new(),
    };
    let intent_given_item = r.table("intents", intents);
    let mut rel = RelevanceTable::new();
    for (d, row) in relevance {
        if let Some(d) = r.id("relevance", d) {
            rel.insert_row(d, r.row("relevance", row));
        }
    }
    if !r.problems.is_empty() {
        return Err(CliError::Validation(r.problems));
    }
    let model = estimate::build_model(catalog, log, intent_given_item, rel)?;
    check_model(&model)?;
    Ok(model)
}
