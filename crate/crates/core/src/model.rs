//! Identifiers, probability tables and their validation.
//!
//! Ids are opaque strings held in insertion-ordered registries; every table is
//! keyed by the dense indices those registries hand out. Absent entries in a
//! sparse row mean probability zero.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use indexmap::IndexSet;

use crate::{Error, Result};

/// Tolerance used when checking that a distribution sums to one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A dense index into one of the [`Catalog`] registries.
pub trait DenseIndex: Copy + Ord + fmt::Debug + 'static {
    /// Singular noun for messages, such as `"query"`.
    const KIND: &'static str;

    fn from_index(index: usize) -> Self;
    fn index(self) -> usize;
    fn registry(catalog: &Catalog) -> &Registry<Self>;

    fn name(self, catalog: &Catalog) -> &str {
        Self::registry(catalog).name(self)
    }
}

macro_rules! dense_index {
    ($(#[$doc:meta])* $name:ident, $field:ident, $kind:literal) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl DenseIndex for $name {
            const KIND: &'static str = $kind;

            fn from_index(index: usize) -> Self {
                $name(index)
            }

            fn index(self) -> usize {
                self.0
            }

            fn registry(catalog: &Catalog) -> &Registry<Self> {
                &catalog.$field
            }
        }
    };
}

dense_index!(
    /// Index of a query (or QAC prefix).
    QueryIx,
    queries,
    "query"
);
dense_index!(
    /// Index of a retrievable item.
    ItemIx,
    items,
    "item"
);
dense_index!(
    /// Index of an intent.
    IntentIx,
    intents,
    "intent"
);
dense_index!(
    /// Index of a searcher group.
    GroupIx,
    groups,
    "group"
);

/// Insertion-ordered set of string ids.
#[derive(Clone, PartialEq, Eq)]
pub struct Registry<K> {
    ids: IndexSet<String>,
    _kind: PhantomData<K>,
}

impl<K> fmt::Debug for Registry<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.ids.iter()).finish()
    }
}

impl<K> Default for Registry<K> {
    fn default() -> Self {
        Self {
            ids: IndexSet::new(),
            _kind: PhantomData,
        }
    }
}

impl<K: DenseIndex> Registry<K> {
    /// Returns the index of `id`, inserting it at the end if new.
    pub fn insert(&mut self, id: &str) -> K {
        if let Some(ix) = self.ids.get_index_of(id) {
            return K::from_index(ix);
        }
        let (ix, _) = self.ids.insert_full(id.to_owned());
        K::from_index(ix)
    }

    pub fn get(&self, id: &str) -> Option<K> {
        self.ids.get_index_of(id).map(K::from_index)
    }

    pub fn name(&self, key: K) -> &str {
        &self.ids[key.index()]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, key: K) -> bool {
        key.index() < self.ids.len()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = K> + '_ {
        (0..self.ids.len()).map(K::from_index)
    }

    pub fn names(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.ids.iter().map(String::as_str)
    }
}

/// The id registries for queries, items, intents and groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    pub queries: Registry<QueryIx>,
    pub items: Registry<ItemIx>,
    pub intents: Registry<IntentIx>,
    pub groups: Registry<GroupIx>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Something that can be named in a violation message.
pub trait TableKey: Copy + Ord + fmt::Debug {
    fn describe(&self, catalog: &Catalog) -> String;
    fn in_catalog(&self, catalog: &Catalog) -> bool;
}

impl<K: DenseIndex> TableKey for K {
    fn describe(&self, catalog: &Catalog) -> String {
        if K::registry(catalog).contains(*self) {
            self.name(catalog).to_owned()
        } else {
            format!("#{}", self.index())
        }
    }

    fn in_catalog(&self, catalog: &Catalog) -> bool {
        K::registry(catalog).contains(*self)
    }
}

impl<A: DenseIndex, B: DenseIndex> TableKey for (A, B) {
    fn describe(&self, catalog: &Catalog) -> String {
        format!(
            "({},{})",
            self.0.describe(catalog),
            self.1.describe(catalog)
        )
    }

    fn in_catalog(&self, catalog: &Catalog) -> bool {
        self.0.in_catalog(catalog) && self.1.in_catalog(catalog)
    }
}

/// A sparse probability row sorted by outcome. Missing outcomes are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow<K> {
    entries: Vec<(K, f64)>,
}

impl<K> Default for SparseRow<K> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
        }
    }
}

impl<K: DenseIndex> SparseRow<K> {
    /// Builds a row; repeated outcomes are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (K, f64)>) -> Self {
        let mut entries: Vec<(K, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(k, _)| k);
        entries.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        Self { entries }
    }

    pub fn get(&self, key: K) -> f64 {
        match self.entries.binary_search_by_key(&key, |&(k, _)| k) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (K, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Outcomes with strictly positive probability.
    pub fn support(&self) -> impl Iterator<Item = K> + '_ {
        self.entries.iter().filter(|e| e.1 > 0.0).map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Rescales the row to sum to one. Rows with zero mass are left alone.
    pub fn normalized(&self) -> Self {
        let total = self.sum();
        if total <= 0.0 || !total.is_finite() {
            return self.clone();
        }
        Self {
            entries: self.entries.iter().map(|&(k, p)| (k, p / total)).collect(),
        }
    }
}

/// A family of distributions over outcomes `O`, one per condition `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondProb<C, O> {
    rows: BTreeMap<C, SparseRow<O>>,
}

impl<C, O> Default for CondProb<C, O> {
    fn default() -> Self {
        Self {
            rows: BTreeMap::new(),
        }
    }
}

impl<C: TableKey, O: DenseIndex> CondProb<C, O> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_row(&mut self, condition: C, row: SparseRow<O>) {
        self.rows.insert(condition, row);
    }

    pub fn row(&self, condition: C) -> Option<&SparseRow<O>> {
        self.rows.get(&condition)
    }

    /// `p(outcome | condition)`, zero when either is absent.
    pub fn prob(&self, condition: C, outcome: O) -> f64 {
        self.rows.get(&condition).map_or(0.0, |r| r.get(outcome))
    }

    pub fn rows(&self) -> impl Iterator<Item = (C, &SparseRow<O>)> + '_ {
        self.rows.iter().map(|(c, r)| (*c, r))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn normalize_rows(&mut self) {
        for row in self.rows.values_mut() {
            *row = row.normalized();
        }
    }

    fn check(&self, table: &str, catalog: &Catalog, out: &mut Vec<Violation>) {
        for (cond, row) in &self.rows {
            let key = cond.describe(catalog);
            if !cond.in_catalog(catalog) {
                out.push(Violation::new(table, &key, "condition id not in catalog"));
            }
            check_row(table, &key, row, catalog, out);
        }
    }
}

fn check_row<O: DenseIndex>(
    table: &str,
    key: &str,
    row: &SparseRow<O>,
    catalog: &Catalog,
    out: &mut Vec<Violation>,
) {
    let mut bad_entry = false;
    for (outcome, p) in row.iter() {
        if !outcome.in_catalog(catalog) {
            out.push(Violation::new(
                table,
                key,
                format!("outcome {} not in catalog", outcome.describe(catalog)),
            ));
        }
        if !(0.0..=1.0).contains(&p) {
            bad_entry = true;
            out.push(Violation::new(
                table,
                key,
                format!("value {p} for {} out of [0,1]", outcome.describe(catalog)),
            ));
        }
    }
    let total = row.sum();
    if !bad_entry && (total - 1.0).abs() > SUM_TOLERANCE {
        out.push(Violation::new(table, key, format!("sum={total}")));
    }
}

/// Independent Bernoulli relevance probabilities `p(r_d | t)`.
///
/// Not a distribution: each (item, intent) entry stands alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelevanceTable {
    rows: BTreeMap<ItemIx, SparseRow<IntentIx>>,
}

impl RelevanceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_row(&mut self, item: ItemIx, row: SparseRow<IntentIx>) {
        self.rows.insert(item, row);
    }

    pub fn set(&mut self, item: ItemIx, intent: IntentIx, p: f64) {
        let row = self.rows.entry(item).or_default();
        let mut pairs: Vec<_> = row.iter().filter(|&(t, _)| t != intent).collect();
        pairs.push((intent, p));
        *row = SparseRow::from_pairs(pairs);
    }

    /// Exactly 0.0 for missing entries.
    pub fn get(&self, item: ItemIx, intent: IntentIx) -> f64 {
        self.rows.get(&item).map_or(0.0, |r| r.get(intent))
    }

    pub fn row(&self, item: ItemIx) -> Option<&SparseRow<IntentIx>> {
        self.rows.get(&item)
    }

    pub fn rows(&self) -> impl Iterator<Item = (ItemIx, &SparseRow<IntentIx>)> + '_ {
        self.rows.iter().map(|(d, r)| (*d, r))
    }
}

/// Per-query candidate lists with one ranker score per candidate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    rows: BTreeMap<QueryIx, Vec<(ItemIx, f64)>>,
}

impl ScoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: QueryIx, scores: Vec<(ItemIx, f64)>) {
        self.rows.insert(query, scores);
    }

    pub fn candidates(&self, query: QueryIx) -> Result<&[(ItemIx, f64)]> {
        match self.rows.get(&query) {
            Some(row) if !row.is_empty() => Ok(row),
            Some(_) => Err(Error::NotFound(format!(
                "query #{} has no candidates",
                query.0
            ))),
            None => Err(Error::NotFound(format!("query #{} has no scores", query.0))),
        }
    }

    pub fn score(&self, item: ItemIx, query: QueryIx) -> Option<f64> {
        self.rows
            .get(&query)?
            .iter()
            .find(|&&(d, _)| d == item)
            .map(|&(_, s)| s)
    }

    pub fn queries(&self) -> impl Iterator<Item = QueryIx> + '_ {
        self.rows.keys().copied()
    }

    /// Rescales each query's scores to span [0, 1]. Queries whose scores are
    /// all equal map to zeros. Orderings are unchanged.
    pub fn min_max_scaled(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|(&q, row)| {
                let lo = row.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
                let hi = row.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
                let span = hi - lo;
                let scaled = row
                    .iter()
                    .map(|&(d, s)| (d, if span > 0.0 { (s - lo) / span } else { 0.0 }))
                    .collect();
                (q, scaled)
            })
            .collect();
        Self { rows }
    }

    pub fn check(&self, catalog: &Catalog) -> Vec<Violation> {
        let mut out = Vec::new();
        for (q, row) in &self.rows {
            let key = q.describe(catalog);
            if row.is_empty() {
                out.push(Violation::new("scores", &key, "no candidates"));
            }
            for (d, s) in row {
                if !s.is_finite() {
                    out.push(Violation::new(
                        "scores",
                        &key,
                        format!("score for {} is not finite", d.describe(catalog)),
                    ));
                }
            }
        }
        out
    }
}

/// One failed invariant: which table, which key, and what went wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub table: String,
    pub key: String,
    pub rule: String,
}

impl Violation {
    pub fn new(table: &str, key: &str, rule: impl Into<String>) -> Self {
        Self {
            table: table.to_owned(),
            key: key.to_owned(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} for {}", self.table, self.rule, self.key)
    }
}

/// The complete probability model for one evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Model {
    pub catalog: Catalog,
    /// p(d | q, g)
    pub item_given_query_group: CondProb<(QueryIx, GroupIx), ItemIx>,
    /// p(t | d)
    pub intent_given_item: CondProb<ItemIx, IntentIx>,
    /// p(t | q, g)
    pub intent_given_query_group: CondProb<(QueryIx, GroupIx), IntentIx>,
    /// p(q)
    pub query_prior: SparseRow<QueryIx>,
    /// p(q | g)
    pub query_given_group: CondProb<GroupIx, QueryIx>,
    /// p(g)
    pub group_prior: SparseRow<GroupIx>,
    /// p(g | q)
    pub group_given_query: CondProb<QueryIx, GroupIx>,
    /// p(r_d | t)
    pub relevance: RelevanceTable,
    /// Candidate items per query, in catalog order.
    pub candidates: BTreeMap<QueryIx, Vec<ItemIx>>,
}

impl Model {
    /// Groups with an intent distribution for `query`, in catalog order.
    pub fn groups_with_intents(&self, query: QueryIx) -> Vec<GroupIx> {
        self.catalog
            .groups
            .iter()
            .filter(|&g| self.intent_given_query_group.row((query, g)).is_some())
            .collect()
    }

    /// Groups with an item distribution for `query`, in catalog order.
    pub fn groups_with_items(&self, query: QueryIx) -> Vec<GroupIx> {
        self.catalog
            .groups
            .iter()
            .filter(|&g| self.item_given_query_group.row((query, g)).is_some())
            .collect()
    }

    /// Queries that have at least one candidate, in catalog order.
    pub fn evaluable_queries(&self) -> Vec<QueryIx> {
        self.candidates
            .iter()
            .filter(|(_, c)| !c.is_empty())
            .map(|(q, _)| *q)
            .collect()
    }

    /// Rescales every distribution to sum to one. Opt-in repair for tables
    /// that went through a lossy decimal round trip.
    pub fn renormalize(&mut self) {
        self.item_given_query_group.normalize_rows();
        self.intent_given_item.normalize_rows();
        self.intent_given_query_group.normalize_rows();
        self.query_prior = self.query_prior.normalized();
        self.query_given_group.normalize_rows();
        self.group_prior = self.group_prior.normalized();
        self.group_given_query.normalize_rows();
    }

    /// Checks every table invariant. An empty result means the model is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let cat = &self.catalog;
        let mut out = Vec::new();
        for (name, len) in [
            ("queries", cat.queries.len()),
            ("items", cat.items.len()),
            ("intents", cat.intents.len()),
            ("groups", cat.groups.len()),
        ] {
            if len == 0 {
                out.push(Violation::new("catalog", name, "must hold at least one id"));
            }
        }

        self.item_given_query_group.check("p(d|q,g)", cat, &mut out);
        self.intent_given_item.check("p(t|d)", cat, &mut out);
        self.intent_given_query_group
            .check("p(t|q,g)", cat, &mut out);
        self.query_given_group.check("p(q|g)", cat, &mut out);
        self.group_given_query.check("p(g|q)", cat, &mut out);
        if !self.query_prior.is_empty() {
            check_row("p(q)", "*", &self.query_prior, cat, &mut out);
        }
        if !self.group_prior.is_empty() {
            check_row("p(g)", "*", &self.group_prior, cat, &mut out);
        }

        for (d, row) in self.relevance.rows() {
            let key = d.describe(cat);
            if !d.in_catalog(cat) {
                out.push(Violation::new("p(r|t)", &key, "item id not in catalog"));
            }
            for (t, p) in row.iter() {
                if !t.in_catalog(cat) {
                    out.push(Violation::new(
                        "p(r|t)",
                        &key,
                        format!("intent {} not in catalog", t.describe(cat)),
                    ));
                }
                if !(0.0..=1.0).contains(&p) {
                    out.push(Violation::new(
                        "p(r|t)",
                        &format!("({},{})", key, t.describe(cat)),
                        format!("value {p} out of [0,1]"),
                    ));
                }
            }
        }

        for (q, items) in &self.candidates {
            let key = q.describe(cat);
            if items.is_empty() {
                out.push(Violation::new("candidates", &key, "no candidates"));
            }
            let mut seen = items.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != items.len() {
                out.push(Violation::new("candidates", &key, "duplicate items"));
            }
            for d in items {
                if !d.in_catalog(cat) {
                    out.push(Violation::new(
                        "candidates",
                        &key,
                        format!("item {} not in catalog", d.describe(cat)),
                    ));
                }
            }
        }

        // Item mass must fall on candidates, and every item with mass needs an
        // intent distribution when intents are derived from items.
        for ((q, g), row) in self.item_given_query_group.rows() {
            let key = (q, g).describe(cat);
            let cands = self.candidates.get(&q);
            for d in row.support() {
                if !cands.is_some_and(|c| c.contains(&d)) {
                    out.push(Violation::new(
                        "p(d|q,g)",
                        &key,
                        format!("item {} is not a candidate", d.describe(cat)),
                    ));
                }
                if !self.intent_given_item.is_empty() && self.intent_given_item.row(d).is_none() {
                    out.push(Violation::new(
                        "p(t|d)",
                        &d.describe(cat),
                        "missing row for an item with interaction mass",
                    ));
                }
            }
        }
        out
    }

    /// Fails with a validation error listing every violation.
    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            let listed: Vec<String> = violations.iter().map(ToString::to_string).collect();
            Err(Error::Validation(listed.join("; ")))
        }
    }
}
