//! Exhaustive and random search over fusion sequences.
//!
//! A fusion sequence of length `s` over `A = N(N+1)/2` actions is counted, as
//! in the experiments this crate reproduces, as a multiset: there are
//! `C(s - 1 + A, s)` of them. [`brute_force`] enumerates the non-decreasing
//! sequences by default and can also walk every ordering.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::distance::{DistanceEngine, DistanceError, WeightHistogram};
use crate::environment::{
    percept_key, EnvError, EnvironmentConfig, FusionEnv, PerceptKey, Signature, StepRecord, TrialRecord,
};
use crate::tncode::{Action, FuseError, FusionFailure, TensorNetworkCode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("node budget exhausted; resume with {}", .0.resume)]
    Budget(Box<PartialSearch>),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Work done before a budget ran out, and where to pick up.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSearch {
    pub result: BruteForceResult,
    pub resume: ResumeToken,
}

/// Search restarts at this first action index; earlier first actions are
/// covered by the partial result it came with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResumeToken {
    pub first_action: usize,
}

impl fmt::Display for ResumeToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "first={}", self.first_action)
    }
}

impl FromStr for ResumeToken {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s.strip_prefix("first=").ok_or_else(|| format!("bad resume token {s:?}"))?;
        let first_action = v.parse().map_err(|e| format!("bad resume token {s:?}: {e}"))?;
        Ok(Self { first_action })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Enumeration {
    /// Non-decreasing action index sequences.
    #[default]
    Multiset,
    /// Every ordered sequence.
    Ordered,
}

impl fmt::Display for Enumeration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Enumeration::Multiset => "multiset",
            Enumeration::Ordered => "ordered",
        })
    }
}

impl FromStr for Enumeration {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "multiset" => Ok(Self::Multiset),
            "ordered" => Ok(Self::Ordered),
            _ => Err(format!("unknown enumeration {s:?} (expected multiset or ordered)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptions {
    pub enumeration: Enumeration,
    pub memoize: bool,
    /// Compute weight histograms of every distinct best code.
    pub histograms: bool,
    /// Stop (with a resume token) once this many search nodes were visited.
    /// Checked between first-action subtrees.
    pub max_nodes: Option<u64>,
    pub resume: Option<ResumeToken>,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            enumeration: Enumeration::Multiset,
            memoize: true,
            histograms: true,
            max_nodes: None,
            resume: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PruneStats {
    pub nodes: u64,
    pub leaves: u64,
    pub disallowed: u64,
    pub measures_logical: u64,
    pub rank_deficient: u64,
    pub memo_hits: u64,
}

impl PruneStats {
    fn add(&mut self, o: &PruneStats) {
        self.nodes += o.nodes;
        self.leaves += o.leaves;
        self.disallowed += o.disallowed;
        self.measures_logical += o.measures_logical;
        self.rank_deficient += o.rank_deficient;
        self.memo_hits += o.memo_hits;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub steps: usize,
    pub enumeration: Enumeration,
    pub best_distance: Option<usize>,
    pub best_signature: Option<Signature>,
    /// Complete sequences (in the chosen enumeration) ending at the best distance.
    pub optimal_sequence_count: u128,
    pub complete_sequences: u128,
    /// Sequences cut short by a disallowed action or a failed fusion.
    pub pruned_sequences: u128,
    /// Multiset count `C(s - 1 + A, s)`.
    pub total_sequences: BigUint,
    /// Ordered count `A^s`.
    pub ordered_sequences: BigUint,
    /// One witness sequence for each distinct best code.
    pub best: BTreeMap<PerceptKey, Vec<Action>>,
    pub histograms_of_best: BTreeMap<PerceptKey, WeightHistogram>,
    pub stats: PruneStats,
    /// First-action indices covered: `first_actions.0 .. first_actions.1`.
    pub first_actions: (usize, usize),
}

impl BruteForceResult {
    pub fn distinct_best_keys(&self) -> impl Iterator<Item = &PerceptKey> {
        self.best.keys()
    }

    /// Sequences visited, counting each pruned branch by the completions it
    /// would have had.
    pub fn visited_sequences(&self) -> u128 {
        self.complete_sequences + self.pruned_sequences
    }

    /// Combines results over disjoint first-action ranges (resumed runs).
    pub fn merge(&mut self, other: BruteForceResult) {
        match (self.best_distance, other.best_distance) {
            (_, None) => {}
            (Some(a), Some(b)) if a > b => {}
            (Some(a), Some(b)) if a == b => {
                self.optimal_sequence_count += other.optimal_sequence_count;
                for (k, w) in other.best {
                    self.best.entry(k).or_insert(w);
                }
                for (k, h) in other.histograms_of_best {
                    self.histograms_of_best.entry(k).or_insert(h);
                }
            }
            _ => {
                self.best_distance = other.best_distance;
                self.best_signature = other.best_signature;
                self.optimal_sequence_count = other.optimal_sequence_count;
                self.best = other.best;
                self.histograms_of_best = other.histograms_of_best;
            }
        }
        self.complete_sequences += other.complete_sequences;
        self.pruned_sequences += other.pruned_sequences;
        self.stats.add(&other.stats);
        self.first_actions = (
            self.first_actions.0.min(other.first_actions.0),
            self.first_actions.1.max(other.first_actions.1),
        );
    }
}

/// `C(s - 1 + A, s)` with `A = node_count (node_count + 1) / 2`.
pub fn sequence_count(node_count: usize, s: usize) -> BigUint {
    multichoose_big(Action::count(node_count), s)
}

/// `A^s`.
pub fn ordered_sequence_count(node_count: usize, s: usize) -> BigUint {
    BigUint::from(Action::count(node_count)).pow(s as u32)
}

fn multichoose_big(items: usize, r: usize) -> BigUint {
    // C(items + r - 1, r), built so every intermediate division is exact.
    let mut acc = BigUint::one();
    for i in 1..=r {
        acc = acc * BigUint::from(items + i - 1) / BigUint::from(i);
    }
    acc
}

fn multichoose(items: usize, r: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..=r {
        acc = acc * (items + i - 1) as u128 / i as u128;
    }
    acc
}

/// Probability that `t` uniform draws from `total` sequences include at least
/// one of `n_opt` good ones: `1 - (1 - n_opt/total)^t`.
pub fn random_search_probability(n_opt: u128, total: u128, t: u64) -> f64 {
    assert!(total >= 1 && n_opt <= total, "need 0 <= n_opt <= total, total >= 1");
    let q = n_opt as f64 / total as f64;
    if q >= 1.0 {
        return if t == 0 { 0.0 } else { 1.0 };
    }
    -((t as f64) * (-q).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, Default)]
struct Subtree {
    best: Option<usize>,
    optimal: u128,
    complete: u128,
    pruned: u128,
    witnesses: BTreeMap<PerceptKey, Vec<Action>>,
    signature: Option<Signature>,
}

impl Subtree {
    fn absorb(&mut self, child: &Subtree, a: Action) {
        self.complete += child.complete;
        self.pruned += child.pruned;
        let Some(d) = child.best else { return };
        let prefixed = |w: &Vec<Action>| {
            let mut v = Vec::with_capacity(w.len() + 1);
            v.push(a);
            v.extend_from_slice(w);
            v
        };
        match self.best {
            Some(b) if b > d => {}
            Some(b) if b == d => {
                self.optimal += child.optimal;
                for (k, w) in &child.witnesses {
                    self.witnesses.entry(k.clone()).or_insert_with(|| prefixed(w));
                }
            }
            _ => {
                self.best = Some(d);
                self.optimal = child.optimal;
                self.signature = child.signature;
                self.witnesses = child.witnesses.iter().map(|(k, w)| (k.clone(), prefixed(w))).collect();
            }
        }
    }
}

type MemoKey = (PerceptKey, Vec<usize>, usize, usize);

struct Walker<'a> {
    engine: &'a DistanceEngine,
    actions: usize,
    node_count: usize,
    enumeration: Enumeration,
    memo: Option<HashMap<MemoKey, Arc<Subtree>>>,
    stats: PruneStats,
}

impl Walker<'_> {
    fn completions(&self, remaining_after: usize, idx: usize) -> u128 {
        match self.enumeration {
            Enumeration::Multiset => multichoose(self.actions - idx, remaining_after),
            Enumeration::Ordered => (self.actions as u128).pow(remaining_after as u32),
        }
    }

    fn explore(&mut self, state: &TensorNetworkCode, remaining: usize, min_idx: usize) -> Result<Arc<Subtree>, SearchError> {
        self.stats.nodes += 1;
        if remaining == 0 {
            self.stats.leaves += 1;
            let key = percept_key(state.code());
            let d = self.engine.distance_keyed(&key, state.code())?;
            let code = state.code();
            return Ok(Arc::new(Subtree {
                best: Some(d),
                optimal: 1,
                complete: 1,
                pruned: 0,
                signature: Some(Signature { n: code.n(), k: code.k(), d }),
                witnesses: BTreeMap::from([(key, Vec::new())]),
            }));
        }
        let memo_key = self
            .memo
            .as_ref()
            .map(|_| (percept_key(state.code()), state.node_of().to_vec(), remaining, min_idx));
        if let (Some(memo), Some(k)) = (&self.memo, &memo_key) {
            if let Some(hit) = memo.get(k) {
                self.stats.memo_hits += 1;
                return Ok(hit.clone());
            }
        }
        let mut acc = Subtree::default();
        for idx in min_idx..self.actions {
            let child = self.child(state, remaining, idx)?;
            let a = Action::from_index(idx, self.node_count).expect("index in range");
            acc.absorb(&child, a);
        }
        let acc = Arc::new(acc);
        if let (Some(memo), Some(k)) = (&mut self.memo, memo_key) {
            memo.insert(k, acc.clone());
        }
        Ok(acc)
    }

    fn child(&mut self, state: &TensorNetworkCode, remaining: usize, idx: usize) -> Result<Arc<Subtree>, SearchError> {
        let a = Action::from_index(idx, self.node_count).expect("index in range");
        match state.apply(a) {
            Ok(next) => {
                let next_min = match self.enumeration {
                    Enumeration::Multiset => idx,
                    Enumeration::Ordered => 0,
                };
                self.explore(&next, remaining - 1, next_min)
            }
            Err(e) => {
                match e {
                    FuseError::Precondition(_) => self.stats.disallowed += 1,
                    FuseError::Failure(FusionFailure::MeasuresLogical) => self.stats.measures_logical += 1,
                    FuseError::Failure(FusionFailure::RankDeficient) => self.stats.rank_deficient += 1,
                }
                Ok(Arc::new(Subtree {
                    pruned: self.completions(remaining - 1, idx),
                    ..Subtree::default()
                }))
            }
        }
    }
}

/// Depth-first search over every fusion sequence of length `cfg.steps`.
pub fn brute_force(
    cfg: &EnvironmentConfig,
    engine: &DistanceEngine,
    opts: &BruteForceOptions,
) -> Result<BruteForceResult, SearchError> {
    cfg.validate()?;
    let initial = cfg.network();
    let node_count = initial.node_count();
    let actions = Action::count(node_count);
    let mut walker = Walker {
        engine,
        actions,
        node_count,
        enumeration: opts.enumeration,
        memo: opts.memoize.then(HashMap::new),
        stats: PruneStats::default(),
    };
    let start = opts.resume.map_or(0, |r| r.first_action).min(actions);
    let mut root = Subtree::default();
    let mut stopped_at = None;
    for idx in start..actions {
        if let Some(limit) = opts.max_nodes {
            if idx > start && walker.stats.nodes >= limit {
                stopped_at = Some(idx);
                break;
            }
        }
        let child = walker.child(&initial, cfg.steps, idx)?;
        root.absorb(&child, Action::from_index(idx, node_count).expect("index in range"));
    }
    walker.stats.nodes += 1;

    let mut histograms_of_best = BTreeMap::new();
    if opts.histograms {
        for (key, seq) in &root.witnesses {
            let mut state = initial.clone();
            for &a in seq {
                state = state.apply(a).expect("witness sequence replays");
            }
            histograms_of_best.insert(key.clone(), engine.histograms(state.code())?);
        }
    }
    let result = BruteForceResult {
        steps: cfg.steps,
        enumeration: opts.enumeration,
        best_distance: root.best,
        best_signature: root.signature,
        optimal_sequence_count: root.optimal,
        complete_sequences: root.complete,
        pruned_sequences: root.pruned,
        total_sequences: sequence_count(node_count, cfg.steps),
        ordered_sequences: ordered_sequence_count(node_count, cfg.steps),
        best: root.witnesses,
        histograms_of_best,
        stats: walker.stats,
        first_actions: (start, stopped_at.unwrap_or(actions)),
    };
    match stopped_at {
        Some(first_action) => Err(SearchError::Budget(Box::new(PartialSearch {
            result,
            resume: ResumeToken { first_action },
        }))),
        None => Ok(result),
    }
}

/// Uniform multiset of `s` action indices out of `actions`, sorted.
pub fn sample_multiset<R: Rng + ?Sized>(actions: usize, s: usize, rng: &mut R) -> Vec<usize> {
    // Stars and bars: a sorted s-subset of s - 1 + actions slots.
    let mut picks = sample(rng, s - 1 + actions, s).into_vec();
    picks.sort_unstable();
    picks.iter().enumerate().map(|(t, &p)| p - t).collect()
}

/// Plays `trials` uniformly random multisets of actions (in non-decreasing
/// order), logging steps in the same shape as agent runs. A sampled action
/// that is not allowed ends the trial like a failed fusion.
pub fn random_baseline<R: Rng + ?Sized>(
    env: &mut FusionEnv,
    simulation: usize,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<TrialRecord>, SearchError> {
    let steps = env.config().steps;
    let nodes = env.config().node_count();
    let mut out = Vec::with_capacity(trials);
    for trial in 0..trials {
        env.reset();
        let seq = sample_multiset(env.action_count(), steps, rng);
        let mut rows = Vec::with_capacity(steps);
        let mut completed = true;
        for (t, &idx) in seq.iter().enumerate() {
            let action = Action::from_index(idx, nodes).expect("index in range");
            let (reward, done, signature) = match env.step(action) {
                Ok(o) => {
                    if o.failure.is_some() {
                        completed = false;
                    }
                    (o.reward, o.done, o.signature)
                }
                Err(EnvError::NotAllowed(_)) => {
                    completed = false;
                    let sig = env.signature();
                    (-(sig.d as i64), true, sig)
                }
                Err(e) => return Err(e.into()),
            };
            rows.push(StepRecord {
                simulation,
                trial,
                step: t + 1,
                action,
                signature,
                reward,
                done,
            });
            if done {
                break;
            }
        }
        out.push(TrialRecord {
            trial,
            steps: rows,
            final_signature: env.signature(),
            completed,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::Seed;
    use crate::environment::CodeTables;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table_two(steps: usize) -> EnvironmentConfig {
        let mut seeds = vec![Seed::FiveQubit];
        seeds.extend([Seed::SixQubitState; 3]);
        EnvironmentConfig::new(seeds, steps)
    }

    fn quick() -> BruteForceOptions {
        BruteForceOptions {
            histograms: false,
            ..Default::default()
        }
    }

    // Counts non-decreasing sequences by direct enumeration.
    fn count_nondecreasing(actions: usize, s: usize, min: usize) -> u64 {
        if s == 0 {
            return 1;
        }
        (min..actions).map(|a| count_nondecreasing(actions, s - 1, a)).sum()
    }

    #[test]
    fn sequence_counts() {
        assert_eq!(sequence_count(6, 8), BigUint::from(3_108_105u32));
        assert_eq!(sequence_count(4, 3), BigUint::from(220u32));
        for nodes in 1..7 {
            assert_eq!(sequence_count(nodes, 1), BigUint::from(Action::count(nodes)));
            for s in 1..5 {
                let direct = count_nondecreasing(Action::count(nodes), s, 0);
                assert_eq!(sequence_count(nodes, s), BigUint::from(direct));
                assert_eq!(u128::from(direct), multichoose(Action::count(nodes), s));
            }
        }
        // Far beyond u128.
        let big = sequence_count(40, 60);
        assert!(big.bits() > 128);
        assert_eq!(ordered_sequence_count(4, 3), BigUint::from(1000u32));
    }

    #[test]
    fn random_search_probability_values() {
        let p = random_search_probability(5, 3_108_105, 1000);
        assert!((p - 0.001608).abs() < 1e-6, "{p}");
        // Independent evaluation by repeated multiplication.
        let mut miss = 1.0f64;
        for _ in 0..1000 {
            miss *= 1.0 - 5.0 / 3_108_105.0;
        }
        assert!((p - (1.0 - miss)).abs() < 1e-12);
        assert_eq!(random_search_probability(3, 17, 0), 0.0);
        assert_eq!(random_search_probability(17, 17, 1), 1.0);
        let mut last = 0.0;
        for t in 0..50 {
            let q = random_search_probability(2, 100, t);
            assert!(q >= last);
            assert!(random_search_probability(3, 100, t) >= q);
            last = q;
        }
    }

    #[test]
    fn resume_token_round_trip() {
        let t = ResumeToken { first_action: 7 };
        assert_eq!(t.to_string().parse::<ResumeToken>(), Ok(t));
        assert!("7".parse::<ResumeToken>().is_err());
        assert_eq!("ordered".parse::<Enumeration>(), Ok(Enumeration::Ordered));
    }

    #[test]
    fn three_steps_reach_seventeen_one_five() {
        let engine = DistanceEngine::default();
        let r = brute_force(&table_two(3), &engine, &BruteForceOptions::default()).unwrap();
        assert_eq!(r.best_signature, Some(Signature { n: 17, k: 1, d: 5 }));
        assert_eq!(r.visited_sequences(), 220);
        assert_eq!(r.total_sequences, BigUint::from(220u32));
        assert!(r.optimal_sequence_count >= 1);
        assert_eq!(r.histograms_of_best.len(), r.best.len());
        for h in r.histograms_of_best.values() {
            assert_eq!(h.min_logical_weight(), Some(5));
        }
        // Every witness replays to its key at the best distance.
        let start = table_two(3).network();
        for (key, seq) in &r.best {
            let mut st = start.clone();
            for &a in seq {
                st = st.apply(a).unwrap();
            }
            assert_eq!(&percept_key(st.code()), key);
            assert_eq!(crate::distance::distance(st.code()), Ok(5));
            assert!(seq.windows(2).all(|w| w[0].index(4) <= w[1].index(4)));
        }
    }

    #[test]
    fn ordered_enumeration_covers_every_sequence() {
        let engine = DistanceEngine::default();
        let opts = BruteForceOptions {
            enumeration: Enumeration::Ordered,
            ..quick()
        };
        let r = brute_force(&table_two(2), &engine, &opts).unwrap();
        assert_eq!(BigUint::from(r.visited_sequences()), ordered_sequence_count(4, 2));
        let m = brute_force(&table_two(2), &engine, &quick()).unwrap();
        assert_eq!(r.best_distance, m.best_distance);
        assert!(r.optimal_sequence_count >= m.optimal_sequence_count);
    }

    #[test]
    fn memo_does_not_change_results() {
        let engine = DistanceEngine::default();
        let with = brute_force(&table_two(4), &engine, &quick()).unwrap();
        let without = brute_force(
            &table_two(4),
            &engine,
            &BruteForceOptions {
                memoize: false,
                ..quick()
            },
        )
        .unwrap();
        assert_eq!(with.best, without.best);
        assert_eq!(with.optimal_sequence_count, without.optimal_sequence_count);
        assert_eq!(with.complete_sequences, without.complete_sequences);
        assert_eq!(with.pruned_sequences, without.pruned_sequences);
        assert_eq!(without.stats.memo_hits, 0);
    }

    #[test]
    fn budget_then_resume_matches_full_run() {
        let engine = DistanceEngine::default();
        let full = brute_force(&table_two(3), &engine, &quick()).unwrap();
        let mut opts = BruteForceOptions {
            max_nodes: Some(20),
            ..quick()
        };
        let mut merged: Option<BruteForceResult> = None;
        let mut rounds = 0;
        loop {
            rounds += 1;
            let (part, next) = match brute_force(&table_two(3), &engine, &opts) {
                Ok(r) => (r, None),
                Err(SearchError::Budget(p)) => (p.result, Some(p.resume)),
                Err(e) => panic!("{e}"),
            };
            match &mut merged {
                Some(m) => m.merge(part),
                None => merged = Some(part),
            }
            match next {
                Some(t) => opts.resume = Some(t),
                None => break,
            }
        }
        assert!(rounds > 1);
        let merged = merged.unwrap();
        assert_eq!(merged.best, full.best);
        assert_eq!(merged.optimal_sequence_count, full.optimal_sequence_count);
        assert_eq!(merged.visited_sequences(), full.visited_sequences());
        assert_eq!(merged.first_actions, (0, 10));
    }

    #[test]
    fn multiset_sampling_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            let m = sample_multiset(4, 2, &mut rng);
            assert!(m.windows(2).all(|w| w[0] <= w[1]));
            *counts.entry(m).or_default() += 1;
        }
        assert_eq!(counts.len(), 10);
        for &c in counts.values() {
            // Expected 6000 each, sd about 73.
            assert!((5600..6400).contains(&c), "{c}");
        }
    }

    #[test]
    fn random_baseline_single_step_is_uniform() {
        let engine = Arc::new(DistanceEngine::default());
        let mut env = FusionEnv::new(table_two(1), engine, CodeTables::embedded()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = random_baseline(&mut env, 0, 5000, &mut rng).unwrap();
        let mut counts = [0u32; 10];
        for t in &trials {
            assert_eq!(t.steps.len(), 1);
            counts[t.steps[0].action.index(4)] += 1;
        }
        for c in counts {
            assert!((380..620).contains(&c), "{c}");
        }
    }

    #[test]
    fn random_baseline_is_deterministic() {
        let engine = Arc::new(DistanceEngine::default());
        let run = |seed| {
            let mut env = FusionEnv::new(table_two(3), engine.clone(), CodeTables::embedded()).unwrap();
            random_baseline(&mut env, 3, 50, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
        assert!(run(9).iter().all(|t| t.steps.iter().all(|s| s.simulation == 3)));
    }

    #[test]
    fn random_baseline_hit_rate_matches_exhaustive_count() {
        let engine = Arc::new(DistanceEngine::default());
        let bf = brute_force(&table_two(3), &engine, &quick()).unwrap();
        let p = bf.optimal_sequence_count as f64 / 220.0;
        let mut env = FusionEnv::new(table_two(3), engine, CodeTables::embedded()).unwrap();
        let n = 22_000;
        let trials = random_baseline(&mut env, 0, n, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let hits = trials
            .iter()
            .filter(|t| t.completed && Some(t.final_signature.d) == bf.best_distance)
            .count() as f64;
        let mean = p * n as f64;
        let sd = (mean * (1.0 - p)).sqrt();
        assert!((hits - mean).abs() < 4.0 * sd, "hits {hits}, expected {mean} ± {sd}");
    }
}
