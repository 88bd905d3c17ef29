//! Probability tables from interaction logs, and a synthetic log generator.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use serde::Serialize;

use crate::model::{
    Catalog, CondProb, DenseIndex, GroupIx, IntentIx, ItemIx, Model, QueryIx, RelevanceTable,
    SparseRow, TableKey,
};
use crate::{Error, Result};

/// One aggregated log line: `count` interactions of `group` choosing `item`
/// for `query`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRow {
    pub group: String,
    pub query: String,
    pub item: String,
    pub count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionLog {
    pub rows: Vec<LogRow>,
}

impl InteractionLog {
    pub fn push(&mut self, group: &str, query: &str, item: &str, count: u64) {
        self.rows.push(LogRow {
            group: group.to_owned(),
            query: query.to_owned(),
            item: item.to_owned(),
            count,
        });
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// Frequency estimates derived from a log.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTables {
    pub item_given_query_group: CondProb<(QueryIx, GroupIx), ItemIx>,
    pub query_prior: SparseRow<QueryIx>,
    pub query_given_group: CondProb<GroupIx, QueryIx>,
    pub group_prior: SparseRow<GroupIx>,
    pub group_given_query: CondProb<QueryIx, GroupIx>,
    /// Items seen per query, in catalog order.
    pub candidates: BTreeMap<QueryIx, Vec<ItemIx>>,
}

/// Maximum-likelihood frequency estimates. New ids are appended to the
/// catalog in order of first appearance.
pub fn estimate_tables(log: &InteractionLog, catalog: &mut Catalog) -> Result<FrequencyTables> {
    if log.rows.is_empty() {
        return Err(Error::InvalidArgument("interaction log is empty".into()));
    }
    let mut by_qgd: BTreeMap<(QueryIx, GroupIx), BTreeMap<ItemIx, u64>> = BTreeMap::new();
    for row in &log.rows {
        if row.count == 0 {
            return Err(Error::InvalidArgument(format!(
                "zero count for ({}, {}, {})",
                row.group, row.query, row.item
            )));
        }
        if row.group.is_empty() || row.query.is_empty() || row.item.is_empty() {
            return Err(Error::InvalidArgument("empty id in interaction log".into()));
        }
        let g = catalog.groups.insert(&row.group);
        let q = catalog.queries.insert(&row.query);
        let d = catalog.items.insert(&row.item);
        *by_qgd.entry((q, g)).or_default().entry(d).or_default() += row.count;
    }

    let mut qg_counts: BTreeMap<(QueryIx, GroupIx), u64> = BTreeMap::new();
    let mut q_counts: BTreeMap<QueryIx, u64> = BTreeMap::new();
    let mut g_counts: BTreeMap<GroupIx, u64> = BTreeMap::new();
    let mut candidates: BTreeMap<QueryIx, Vec<ItemIx>> = BTreeMap::new();
    let mut item_given_query_group = CondProb::new();
    for (&(q, g), items) in &by_qgd {
        let n: u64 = items.values().sum();
        qg_counts.insert((q, g), n);
        *q_counts.entry(q).or_default() += n;
        *g_counts.entry(g).or_default() += n;
        candidates
            .entry(q)
            .or_default()
            .extend(items.keys().copied());
        item_given_query_group.insert_row(
            (q, g),
            SparseRow::from_pairs(items.iter().map(|(&d, &c)| (d, ratio(c, n)))),
        );
    }
    for items in candidates.values_mut() {
        items.sort_unstable();
        items.dedup();
    }

    let total: u64 = q_counts.values().sum();
    let query_prior = SparseRow::from_pairs(q_counts.iter().map(|(&q, &c)| (q, ratio(c, total))));
    let group_prior = SparseRow::from_pairs(g_counts.iter().map(|(&g, &c)| (g, ratio(c, total))));

    let mut query_given_group = CondProb::new();
    for (&g, &gc) in &g_counts {
        let row = qg_counts
            .iter()
            .filter(|((_, gg), _)| *gg == g)
            .map(|(&(q, _), &c)| (q, ratio(c, gc)));
        query_given_group.insert_row(g, SparseRow::from_pairs(row));
    }
    let mut group_given_query = CondProb::new();
    for (&q, &qc) in &q_counts {
        let row = qg_counts
            .iter()
            .filter(|((qq, _), _)| *qq == q)
            .map(|(&(_, g), &c)| (g, ratio(c, qc)));
        group_given_query.insert_row(q, SparseRow::from_pairs(row));
    }

    Ok(FrequencyTables {
        item_given_query_group,
        query_prior,
        query_given_group,
        group_prior,
        group_given_query,
        candidates,
    })
}

fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}

/// `p(t|q,g) = Σ_d p(t|d) p(d|q,g)`, clamped to 1 against rounding drift.
pub fn intent_given_query_group(
    intent_given_item: &CondProb<ItemIx, IntentIx>,
    item_given_query_group: &CondProb<(QueryIx, GroupIx), ItemIx>,
    catalog: &Catalog,
) -> Result<CondProb<(QueryIx, GroupIx), IntentIx>> {
    let mut out = CondProb::new();
    for ((q, g), items) in item_given_query_group.rows() {
        let mut acc: BTreeMap<IntentIx, f64> = BTreeMap::new();
        for (d, pd) in items.iter() {
            if pd == 0.0 {
                continue;
            }
            let intents = intent_given_item.row(d).ok_or_else(|| {
                Error::Validation(format!(
                    "p(t|d) has no row for item {}",
                    d.describe(catalog)
                ))
            })?;
            for (t, pt) in intents.iter() {
                *acc.entry(t).or_default() += pt * pd;
            }
        }
        let acc = acc.into_iter().map(|(t, p)| (t, p.min(1.0)));
        out.insert_row((q, g), SparseRow::from_pairs(acc.collect::<Vec<_>>()));
    }
    Ok(out)
}

/// Builds a full model from a log plus item-level intent and relevance tables
/// already indexed against `catalog`.
pub fn build_model(
    mut catalog: Catalog,
    log: &InteractionLog,
    intent_given_item: CondProb<ItemIx, IntentIx>,
    relevance: RelevanceTable,
) -> Result<Model> {
    let freq = estimate_tables(log, &mut catalog)?;
    let intent_given_query_group =
        intent_given_query_group(&intent_given_item, &freq.item_given_query_group, &catalog)?;
    Ok(Model {
        catalog,
        item_given_query_group: freq.item_given_query_group,
        intent_given_item,
        intent_given_query_group,
        query_prior: freq.query_prior,
        query_given_group: freq.query_given_group,
        group_prior: freq.group_prior,
        group_given_query: freq.group_given_query,
        relevance,
        candidates: freq.candidates,
    })
}

/// Settings for [`gen_synthetic`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub queries: usize,
    pub items: usize,
    pub intents: usize,
    pub groups: usize,
    /// How much group intent preferences overlap. Near zero, each group only
    /// wants the intents it owns (intent `t` is owned by group `t mod G`);
    /// large values make all groups want the same intents.
    pub group_intent_concentration: f64,
    /// Dirichlet concentration of each item's intent mix. Small values give
    /// single-intent items.
    pub intent_item_concentration: f64,
    /// Interactions drawn for each group; its length must equal `groups`.
    pub interactions_per_group: Vec<u64>,
    /// Candidate items per query (capped at `items`).
    pub candidates_per_query: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            queries: 100,
            items: 500,
            intents: 10,
            groups: 2,
            group_intent_concentration: 0.1,
            intent_item_concentration: 0.3,
            interactions_per_group: vec![18_000, 2_000],
            candidates_per_query: 30,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("queries", self.queries),
            ("items", self.items),
            ("intents", self.intents),
            ("groups", self.groups),
            ("candidates_per_query", self.candidates_per_query),
        ] {
            if n == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if self.interactions_per_group.len() != self.groups {
            return Err(Error::InvalidArgument(format!(
                "{} interaction counts for {} groups",
                self.interactions_per_group.len(),
                self.groups
            )));
        }
        if self.interactions_per_group.contains(&0) {
            return Err(Error::InvalidArgument(
                "every group needs interactions".into(),
            ));
        }
        for (name, c) in [
            (
                "group_intent_concentration",
                self.group_intent_concentration,
            ),
            ("intent_item_concentration", self.intent_item_concentration),
        ] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-negative"
                )));
            }
        }
        if self.intent_item_concentration == 0.0 {
            return Err(Error::InvalidArgument(
                "intent_item_concentration must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A generated dataset: log plus the item-level tables it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub catalog: Catalog,
    pub log: InteractionLog,
    pub intent_given_item: CondProb<ItemIx, IntentIx>,
    pub relevance: RelevanceTable,
    pub candidates: BTreeMap<QueryIx, Vec<ItemIx>>,
    /// The generating group preferences over intents, p(t|g).
    pub group_preferences: Vec<Vec<f64>>,
}

impl SyntheticData {
    pub fn into_model(self) -> Result<Model> {
        let mut model = build_model(
            self.catalog,
            &self.log,
            self.intent_given_item,
            self.relevance,
        )?;
        // Candidates that drew no interactions still belong to the query.
        for (q, cands) in self.candidates {
            model.candidates.insert(q, cands);
        }
        Ok(model)
    }
}

/// Draws a symmetric Dirichlet vector. When every gamma draw underflows, a
/// uniformly chosen coordinate gets all the mass.
fn dirichlet<R: Rng>(rng: &mut R, alpha: f64, len: usize) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    let mut v: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
    let total: f64 = v.iter().sum();
    if total > 0.0 && total.is_finite() {
        v.iter_mut().for_each(|x| *x /= total);
    } else {
        v = vec![0.0; len];
        v[rng.gen_range(0..len)] = 1.0;
    }
    v
}

/// Generates a seeded dataset with group-dependent intent preferences.
///
/// Each item gets an intent mix `p(t|d)` and a popularity. Each query gets a
/// popularity, an intent profile and a random candidate set. An interaction
/// of group `g` picks a query by popularity, an intent proportional to the
/// group preference times the query profile, then a candidate proportional
/// to its affinity to that intent times its popularity. Every (query, group)
/// pair receives at least one interaction. Relevance `p(r_d|t)` is set to the
/// item's intent affinity `p(t|d)`.
pub fn gen_synthetic(config: &SynthConfig) -> Result<SyntheticData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut catalog = Catalog::new();
    let queries: Vec<QueryIx> = (0..config.queries)
        .map(|i| catalog.queries.insert(&format!("q{i:04}")))
        .collect();
    let items: Vec<ItemIx> = (0..config.items)
        .map(|i| catalog.items.insert(&format!("d{i:05}")))
        .collect();
    let intents: Vec<IntentIx> = (0..config.intents)
        .map(|i| catalog.intents.insert(&format!("t{i:03}")))
        .collect();
    let groups: Vec<GroupIx> = (0..config.groups)
        .map(|i| catalog.groups.insert(&format!("g{i}")))
        .collect();

    let unit = Gamma::new(1.0, 1.0).expect("unit gamma");

    // Items: intent mix and popularity.
    let item_mix: Vec<Vec<f64>> = (0..config.items)
        .map(|_| dirichlet(&mut rng, config.intent_item_concentration, config.intents))
        .collect();
    let item_pop: Vec<f64> = (0..config.items)
        .map(|_| unit.sample(&mut rng) + 1e-3)
        .collect();

    // Groups: own intents t with t mod G == g, blended with a shared uniform
    // preference by the concentration.
    let uniform = 1.0 / config.intents as f64;
    let group_preferences: Vec<Vec<f64>> = (0..config.groups)
        .map(|g| {
            let owned: Vec<f64> = (0..config.intents)
                .map(|t| {
                    if t % config.groups == g {
                        unit.sample(&mut rng) + 0.1
                    } else {
                        0.0
                    }
                })
                .collect();
            let owned_total: f64 = owned.iter().sum();
            let c = config.group_intent_concentration;
            (0..config.intents)
                .map(|t| {
                    let own = if owned_total > 0.0 {
                        owned[t] / owned_total
                    } else {
                        uniform
                    };
                    (own + c * uniform) / (1.0 + c)
                })
                .collect()
        })
        .collect();

    // Queries: popularity, intent profile, candidates.
    let query_pop: Vec<f64> = (0..config.queries)
        .map(|_| unit.sample(&mut rng) + 0.05)
        .collect();
    let query_profile: Vec<Vec<f64>> = (0..config.queries)
        .map(|_| dirichlet(&mut rng, 1.0, config.intents))
        .collect();
    let per_query = config.candidates_per_query.min(config.items);
    let candidates: Vec<Vec<usize>> = (0..config.queries)
        .map(|_| {
            let mut c = rand::seq::index::sample(&mut rng, config.items, per_query).into_vec();
            c.sort_unstable();
            c
        })
        .collect();

    let query_dist = WeightedIndex::new(&query_pop).expect("positive popularity");
    let mut counts: BTreeMap<(GroupIx, QueryIx, ItemIx), u64> = BTreeMap::new();
    for (g, &n) in config.interactions_per_group.iter().enumerate() {
        let floor = config.queries as u64;
        for i in 0..n.max(floor) {
            let q = if i < floor {
                i as usize
            } else {
                query_dist.sample(&mut rng)
            };
            let intent_w: Vec<f64> = (0..config.intents)
                .map(|t| group_preferences[g][t] * query_profile[q][t] + 1e-12)
                .collect();
            let t = WeightedIndex::new(&intent_w)
                .expect("positive")
                .sample(&mut rng);
            let item_w: Vec<f64> = candidates[q]
                .iter()
                .map(|&d| item_mix[d][t] * item_pop[d] + 1e-9 * item_pop[d])
                .collect();
            let d = candidates[q][WeightedIndex::new(&item_w)
                .expect("positive")
                .sample(&mut rng)];
            *counts.entry((groups[g], queries[q], items[d])).or_default() += 1;
        }
    }

    let mut log = InteractionLog::default();
    for ((g, q, d), c) in counts {
        log.push(g.name(&catalog), q.name(&catalog), d.name(&catalog), c);
    }

    let mut intent_given_item = CondProb::new();
    let mut relevance = RelevanceTable::new();
    for (d, mix) in items.iter().zip(&item_mix) {
        let row = SparseRow::from_pairs(
            intents
                .iter()
                .zip(mix)
                .filter(|(_, &p)| p > 0.0)
                .map(|(&t, &p)| (t, p)),
        );
        intent_given_item.insert_row(*d, row.clone());
        relevance.insert_row(*d, row);
    }

    let candidates = queries
        .iter()
        .zip(&candidates)
        .map(|(&q, c)| (q, c.iter().map(|&d| items[d]).collect()))
        .collect();

    Ok(SyntheticData {
        catalog,
        log,
        intent_given_item,
        relevance,
        candidates,
        group_preferences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn item_frequencies() {
        let mut log = InteractionLog::default();
        log.push("gA", "q1", "d1", 2);
        log.push("gA", "q1", "d2", 1);
        let mut cat = Catalog::new();
        let t = estimate_tables(&log, &mut cat).unwrap();
        let q1 = cat.queries.get("q1").unwrap();
        let ga = cat.groups.get("gA").unwrap();
        let d1 = cat.items.get("d1").unwrap();
        assert_abs_diff_eq!(
            t.item_given_query_group.prob((q1, ga), d1),
            2.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn single_row_log_is_all_ones() {
        let mut log = InteractionLog::default();
        log.push("g", "q", "d", 5);
        let mut cat = Catalog::new();
        let t = estimate_tables(&log, &mut cat).unwrap();
        let (q, g, d) = (QueryIx(0), GroupIx(0), ItemIx(0));
        assert_eq!(t.item_given_query_group.prob((q, g), d), 1.0);
        assert_eq!(t.query_prior.get(q), 1.0);
        assert_eq!(t.group_prior.get(g), 1.0);
        assert_eq!(t.query_given_group.prob(g, q), 1.0);
        assert_eq!(t.group_given_query.prob(q, g), 1.0);
    }

    #[test]
    fn marginal_counts() {
        let mut log = InteractionLog::default();
        log.push("gA", "q1", "d1", 3);
        log.push("gB", "q2", "d1", 1);
        let mut cat = Catalog::new();
        let t = estimate_tables(&log, &mut cat).unwrap();
        let q1 = cat.queries.get("q1").unwrap();
        let ga = cat.groups.get("gA").unwrap();
        assert_eq!(t.query_prior.get(q1), 0.75);
        assert_eq!(t.query_given_group.prob(ga, q1), 1.0);
        assert_eq!(t.group_given_query.prob(q1, ga), 1.0);
        // gB never issued q1: no (q1, gB) row.
        let gb = cat.groups.get("gB").unwrap();
        assert!(t.item_given_query_group.row((q1, gb)).is_none());
    }

    #[test]
    fn empty_log_rejected() {
        let mut cat = Catalog::new();
        assert!(matches!(
            estimate_tables(&InteractionLog::default(), &mut cat),
            Err(Error::InvalidArgument(_))
        ));
    }

    fn intents_fixture(
        pt: &[&[f64]],
        pd: &[f64],
    ) -> (Catalog, CondProb<(QueryIx, GroupIx), IntentIx>) {
        let mut cat = Catalog::new();
        let q = cat.queries.insert("q");
        let g = cat.groups.insert("g");
        let mut ptd = CondProb::new();
        let mut pdqg = Vec::new();
        for (i, row) in pt.iter().enumerate() {
            let d = cat.items.insert(&format!("d{i}"));
            let ts = row
                .iter()
                .enumerate()
                .map(|(j, &p)| (cat.intents.insert(&format!("t{j}")), p));
            ptd.insert_row(d, SparseRow::from_pairs(ts.collect::<Vec<_>>()));
            pdqg.push((d, pd[i]));
        }
        let mut items = CondProb::new();
        items.insert_row((q, g), SparseRow::from_pairs(pdqg));
        let out = intent_given_query_group(&ptd, &items, &cat).unwrap();
        (cat, out)
    }

    #[test]
    fn intent_mixture_cases() {
        let (_, one_hot) = intents_fixture(&[&[0.0, 1.0], &[1.0, 0.0]], &[0.3, 0.7]);
        let row = one_hot.row((QueryIx(0), GroupIx(0))).unwrap();
        assert_eq!(row.get(IntentIx(0)), 0.7);
        assert_eq!(row.get(IntentIx(1)), 0.3);

        let (_, mixed) = intents_fixture(&[&[1.0, 0.0], &[0.2, 0.8]], &[0.5, 0.5]);
        let row = mixed.row((QueryIx(0), GroupIx(0))).unwrap();
        assert_abs_diff_eq!(row.get(IntentIx(0)), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(row.sum(), 1.0, epsilon = 1e-9);

        let (_, single) = intents_fixture(&[&[0.25, 0.75]], &[1.0]);
        let row = single.row((QueryIx(0), GroupIx(0))).unwrap();
        assert_eq!(row.get(IntentIx(1)), 0.75);
    }

    #[test]
    fn intent_mixture_never_exceeds_one() {
        // Summing 1/13 + 4 * 3/13 in floating point gives 1.0000000000000002.
        let pd = [1.0 / 13.0, 3.0 / 13.0, 3.0 / 13.0, 3.0 / 13.0, 3.0 / 13.0];
        let one: &[f64] = &[1.0];
        let (_, out) = intents_fixture(&[one; 5], &pd);
        assert_eq!(
            out.row((QueryIx(0), GroupIx(0))).unwrap().get(IntentIx(0)),
            1.0
        );
    }

    #[test]
    fn missing_item_intents_is_a_validation_error() {
        let mut cat = Catalog::new();
        let q = cat.queries.insert("q");
        let g = cat.groups.insert("g");
        let d = cat.items.insert("d");
        let mut items = CondProb::new();
        items.insert_row((q, g), SparseRow::from_pairs([(d, 1.0)]));
        assert!(matches!(
            intent_given_query_group(&CondProb::new(), &items, &cat),
            Err(Error::Validation(_))
        ));
    }

    fn small_config() -> SynthConfig {
        SynthConfig {
            queries: 12,
            items: 40,
            intents: 4,
            groups: 2,
            interactions_per_group: vec![600, 200],
            candidates_per_query: 8,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_valid() {
        let a = gen_synthetic(&small_config()).unwrap();
        let b = gen_synthetic(&small_config()).unwrap();
        assert_eq!(a, b);
        let model = a.into_model().unwrap();
        assert!(model.validate().is_empty(), "{:?}", model.validate());
        assert_eq!(model.evaluable_queries().len(), 12);
    }

    #[test]
    fn zero_concentration_gives_disjoint_preferences() {
        let cfg = SynthConfig {
            intents: 2,
            group_intent_concentration: 0.0,
            ..small_config()
        };
        let data = gen_synthetic(&cfg).unwrap();
        assert_eq!(data.group_preferences[0], vec![1.0, 0.0]);
        assert_eq!(data.group_preferences[1], vec![0.0, 1.0]);
    }

    #[test]
    fn config_checks() {
        let mut cfg = small_config();
        cfg.interactions_per_group = vec![10];
        assert!(gen_synthetic(&cfg).is_err());
        let cfg = SynthConfig {
            items: 0,
            ..small_config()
        };
        assert!(gen_synthetic(&cfg).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn log_strategy() -> impl Strategy<Value = InteractionLog> {
            prop::collection::vec((0u8..3, 0u8..4, 0u8..5, 1u64..20), 1..30).prop_map(|rows| {
                let mut log = InteractionLog::default();
                for (g, q, d, c) in rows {
                    log.push(&format!("g{g}"), &format!("q{q}"), &format!("d{d}"), c);
                }
                log
            })
        }

        proptest! {
            #[test]
            fn bayes_consistency(log in log_strategy()) {
                let mut cat = Catalog::new();
                let t = estimate_tables(&log, &mut cat).unwrap();
                for q in cat.queries.iter() {
                    for g in cat.groups.iter() {
                        let lhs = t.group_given_query.prob(q, g) * t.query_prior.get(q);
                        let rhs = t.query_given_group.prob(g, q) * t.group_prior.get(g);
                        prop_assert!((lhs - rhs).abs() <= 1e-12);
                    }
                }
            }

            #[test]
            fn expected_counts_reproduce_log(log in log_strategy()) {
                let mut cat = Catalog::new();
                let t = estimate_tables(&log, &mut cat).unwrap();
                let total = log.total() as f64;
                let mut observed: BTreeMap<(QueryIx, GroupIx, ItemIx), u64> = BTreeMap::new();
                for r in &log.rows {
                    let key = (cat.queries.get(&r.query).unwrap(), cat.groups.get(&r.group).unwrap(), cat.items.get(&r.item).unwrap());
                    *observed.entry(key).or_default() += r.count;
                }
                for ((q, g, d), c) in observed {
                    let expected = total * t.group_prior.get(g) * t.query_given_group.prob(g, q)
                        * t.item_given_query_group.prob((q, g), d);
                    prop_assert!((expected - c as f64).abs() < 1e-9 * total.max(1.0));
                    prop_assert_eq!(expected.round() as u64, c);
                }
            }

            #[test]
            fn estimated_model_validates(log in log_strategy()) {
                let mut cat = Catalog::new();
                let t = estimate_tables(&log, &mut cat).unwrap();
                let m = Model {
                    catalog: {
                        let mut c = cat.clone();
                        c.intents.insert("t");
                        c
                    },
                    item_given_query_group: t.item_given_query_group,
                    query_prior: t.query_prior,
                    query_given_group: t.query_given_group,
                    group_prior: t.group_prior,
                    group_given_query: t.group_given_query,
                    candidates: t.candidates,
                    ..Model::default()
                };
                prop_assert!(m.validate().is_empty());
            }
        }
    }
}
