//! The GSAT loop and its variants, over either score backend.
//!
//! A run performs up to `max_tries` tries of up to `max_flips` flips. Each
//! step first checks for a model, then chooses a variable to flip: with
//! probability `walk_probability` by a random walk, otherwise by the
//! variant's hill-climb candidate set and pick rule.
//!
//! Randomness comes from a single ChaCha8 stream seeded with `seed` and is
//! drawn in this order:
//!
//! 1. initial assignment bits, in variable-id order (with averaging-in, only
//!    the bits where the two previous best assignments disagree);
//! 2. once per step, the walk coin, as one `f64` draw, only when
//!    `walk_probability > 0`;
//! 3. the walk descent choices or the uniform pick among candidates.
//!
//! Both backends consume the stream identically and list candidates in
//! ascending id order, so with the walk disabled they flip the same
//! variables.

mod clausal;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{cnf_standard, CnfError};
use crate::formula::{Assignment, Formula, Var};
use crate::score::ScoreState;

pub use clausal::{walk_pick_clausal, ClauseEngine, WalkError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Flip a variable with the best delta, chosen at random.
    Gsat,
    /// Prefer any improving flip.
    Csat,
    /// Best delta, smallest id.
    Dsat,
    /// Any variable at random.
    Rsat,
    /// Best delta, avoiding the previously flipped variable.
    Msat,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Gsat, Variant::Csat, Variant::Dsat, Variant::Rsat, Variant::Msat];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Gsat => "gsat",
            Variant::Csat => "csat",
            Variant::Dsat => "dsat",
            Variant::Rsat => "rsat",
            Variant::Msat => "msat",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    /// Scores computed on the formula tree.
    #[serde(rename = "nc")]
    NonClausal,
    /// Plain GSAT over the standard clause set.
    #[serde(rename = "clausal")]
    Clausal,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::NonClausal => "nc",
            Backend::Clausal => "clausal",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nc" | "non-clausal" => Ok(Backend::NonClausal),
            "clausal" => Ok(Backend::Clausal),
            _ => Err(format!("unknown backend `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub max_tries: u32,
    pub max_flips: u32,
    pub variant: Variant,
    pub walk_probability: f64,
    pub averaging_in: bool,
    pub seed: u64,
    pub backend: Backend,
    /// Keep the sequence of flipped variables in the result.
    pub record_trace: bool,
    /// Run tries on this many threads; 0 or 1 runs them in sequence.
    pub parallel_tries: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_tries: 10,
            max_flips: 100,
            variant: Variant::Gsat,
            walk_probability: 0.0,
            averaging_in: false,
            seed: 0,
            backend: Backend::NonClausal,
            record_trace: false,
            parallel_tries: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.max_tries == 0 || self.max_flips == 0 {
            return Err(SearchError::Config("max-tries and max-flips must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.walk_probability) {
            return Err(SearchError::Config(format!("walk probability {} is outside [0, 1]", self.walk_probability)));
        }
        if self.averaging_in && self.parallel_tries > 1 {
            return Err(SearchError::Config("averaging-in needs sequential tries".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Model(Assignment),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub tries_used: u32,
    pub flips_used: u64,
    /// Lowest score reached in any try.
    pub best_score: BigUint,
    /// Lowest-score assignment of each of the last two tries, oldest first.
    pub recent_best: Vec<Assignment>,
    /// Flipped variables, one list per try.
    pub trace: Option<Vec<Vec<Var>>>,
    /// Backend update work: nodes recomputed (non-clausal) or clauses visited
    /// (clausal), summed over all flips.
    pub update_work: u64,
}

impl SearchResult {
    pub fn model(&self) -> Option<&Assignment> {
        match &self.outcome {
            Outcome::Model(m) => Some(m),
            Outcome::Exhausted => None,
        }
    }

    /// The JSON stats record for this run.
    pub fn stats_record(&self, f: &Formula, cfg: &SearchConfig, elapsed_secs: f64) -> StatsRecord {
        StatsRecord {
            outcome: if self.model().is_some() { "sat" } else { "exhausted" }.to_string(),
            tries: self.tries_used,
            flips: self.flips_used,
            best_score: self.best_score.to_string(),
            elapsed: elapsed_secs,
            variant: cfg.variant,
            backend: cfg.backend,
            walk_probability: cfg.walk_probability,
            averaging_in: cfg.averaging_in,
            seed: cfg.seed,
            model: self.model().map(|m| f.names().iter().zip(m.values()).map(|(n, &b)| (n.clone(), b)).collect()),
            trace: self.trace.as_ref().map(|t| t.iter().map(|tr| tr.iter().map(|v| v.0).collect()).collect()),
        }
    }
}

/// Serialized summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    /// `"sat"` or `"exhausted"`.
    pub outcome: String,
    pub tries: u32,
    pub flips: u64,
    /// Decimal string; scores are unbounded integers.
    pub best_score: String,
    /// Wall-clock seconds.
    pub elapsed: f64,
    pub variant: Variant,
    pub backend: Backend,
    pub walk_probability: f64,
    pub averaging_in: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<BTreeMap<String, bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<u32>>>,
}

/// What the search loop needs from a score backend.
pub trait Engine {
    type Delta: Ord + Zero + Clone;

    fn num_vars(&self) -> usize;
    /// Installs a new assignment and rebuilds scores and deltas.
    fn reset(&mut self, assignment: Assignment);
    fn assignment(&self) -> &Assignment;
    fn score(&self) -> BigUint;
    fn is_satisfied(&self) -> bool;
    /// `score(after flipping v) - score(now)` for every variable id.
    fn deltas(&self) -> &[Self::Delta];
    fn flip(&mut self, v: Var);
    fn walk_pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Var>;
    /// Cumulative update work.
    fn update_work(&self) -> u64;
}

impl Engine for ScoreState<'_> {
    type Delta = BigInt;

    fn num_vars(&self) -> usize {
        self.formula().num_vars()
    }

    fn reset(&mut self, assignment: Assignment) {
        ScoreState::reset(self, assignment).expect("assignment sized by the search loop");
    }

    fn assignment(&self) -> &Assignment {
        ScoreState::assignment(self)
    }

    fn score(&self) -> BigUint {
        ScoreState::score(self).clone()
    }

    fn is_satisfied(&self) -> bool {
        ScoreState::score(self).is_zero()
    }

    fn deltas(&self) -> &[BigInt] {
        ScoreState::deltas(self)
    }

    fn flip(&mut self, v: Var) {
        self.flip_and_update(v).expect("candidate variables are in range");
    }

    fn walk_pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Var> {
        ScoreState::walk_pick(self, rng).expect("walk only runs on unsatisfied states")
    }

    fn update_work(&self) -> u64 {
        self.stats().nodes_recomputed
    }
}

/// Candidate flips under `variant` given the current delta table, in
/// ascending id order. Empty only when there are no variables.
pub fn hill_climb<D: Ord + Zero>(deltas: &[D], variant: Variant) -> Vec<Var> {
    let ids = |pred: &dyn Fn(&D) -> bool| -> Vec<Var> {
        deltas.iter().enumerate().filter(|(_, d)| pred(d)).map(|(i, _)| Var(i as u32)).collect()
    };
    let minimal = || match deltas.iter().min() {
        Some(best) => ids(&|d| d == best),
        None => Vec::new(),
    };
    match variant {
        Variant::Rsat => ids(&|_| true),
        Variant::Csat => {
            let zero = D::zero();
            let improving = ids(&|d| *d < zero);
            if improving.is_empty() {
                minimal()
            } else {
                improving
            }
        }
        Variant::Gsat | Variant::Dsat | Variant::Msat => minimal(),
    }
}

/// Chooses one of `candidates` (nonempty) according to `variant`.
pub fn pick<R: Rng + ?Sized>(candidates: &[Var], variant: Variant, rng: &mut R, last_flipped: Option<Var>) -> Var {
    assert!(!candidates.is_empty(), "pick needs at least one candidate");
    match variant {
        Variant::Dsat => *candidates.iter().min().expect("nonempty"),
        Variant::Msat => {
            let fresh: Vec<Var> = candidates.iter().copied().filter(|&v| Some(v) != last_flipped).collect();
            let pool = if fresh.is_empty() { candidates } else { &fresh };
            pool[rng.gen_range(0..pool.len())]
        }
        Variant::Gsat | Variant::Csat | Variant::Rsat => candidates[rng.gen_range(0..candidates.len())],
    }
}

pub fn random_assignment<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Assignment {
    Assignment::new((0..n).map(|_| rng.gen::<bool>()).collect())
}

/// Bitwise average of two assignments: agreeing bits are kept, the others
/// drawn uniformly.
pub fn averaging_in_initial<R: Rng + ?Sized>(a: &Assignment, b: &Assignment, rng: &mut R) -> Assignment {
    assert_eq!(a.len(), b.len());
    Assignment::new(
        a.values().iter().zip(b.values()).map(|(&x, &y)| if x == y { x } else { rng.gen::<bool>() }).collect(),
    )
}

struct TryOutcome {
    model: Option<Assignment>,
    flips: u64,
    best_score: BigUint,
    best: Assignment,
    trace: Vec<Var>,
}

fn run_try<E: Engine, R: Rng>(engine: &mut E, initial: Assignment, cfg: &SearchConfig, rng: &mut R) -> TryOutcome {
    engine.reset(initial);
    let mut best_score = engine.score();
    let mut best = engine.assignment().clone();
    let mut trace = Vec::new();
    let mut last_flipped = None;
    let mut flips = 0;
    while flips < u64::from(cfg.max_flips) && !engine.is_satisfied() && engine.num_vars() > 0 {
        let walk = cfg.walk_probability > 0.0 && rng.gen::<f64>() < cfg.walk_probability;
        let walked = if walk { engine.walk_pick(rng) } else { None };
        let v = walked.unwrap_or_else(|| {
            let candidates = hill_climb(engine.deltas(), cfg.variant);
            pick(&candidates, cfg.variant, rng, last_flipped)
        });
        engine.flip(v);
        flips += 1;
        last_flipped = Some(v);
        if cfg.record_trace {
            trace.push(v);
        }
        let s = engine.score();
        if s < best_score {
            best_score = s;
            best = engine.assignment().clone();
        }
    }
    // Also accepts a model reached by the final flip of the try.
    let model = engine.is_satisfied().then(|| engine.assignment().clone());
    TryOutcome { model, flips, best_score, best, trace }
}

/// Runs GSAT on `f` with the configured variant and backend. A returned
/// model always satisfies `f` under plain boolean evaluation.
pub fn gsat_run(f: &Formula, cfg: &SearchConfig) -> Result<SearchResult, SearchError> {
    cfg.validate()?;
    let result = match cfg.backend {
        Backend::NonClausal => {
            let make = || ScoreState::new(f, Assignment::all(f.num_vars(), false)).expect("sized assignment");
            run(make, cfg)
        }
        Backend::Clausal => {
            let cs = cnf_standard(f)?;
            run(|| ClauseEngine::new(&cs), cfg)
        }
    };
    if let Some(m) = result.model() {
        assert!(f.evaluate(m), "search returned an assignment that does not satisfy the formula");
    }
    Ok(result)
}

fn run<E: Engine + Send, M: Fn() -> E + Sync>(make: M, cfg: &SearchConfig) -> SearchResult {
    if cfg.parallel_tries > 1 {
        run_parallel(make, cfg)
    } else {
        run_sequential(make(), cfg)
    }
}

fn run_sequential<E: Engine>(mut engine: E, cfg: &SearchConfig) -> SearchResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = engine.num_vars();
    let mut recent: VecDeque<Assignment> = VecDeque::with_capacity(2);
    let mut best_score: Option<BigUint> = None;
    let mut flips_used = 0;
    let mut trace = Vec::new();
    for t in 0..cfg.max_tries {
        let initial = if cfg.averaging_in && recent.len() == 2 {
            averaging_in_initial(&recent[0], &recent[1], &mut rng)
        } else {
            random_assignment(n, &mut rng)
        };
        let out = run_try(&mut engine, initial, cfg, &mut rng);
        flips_used += out.flips;
        if best_score.as_ref().is_none_or(|b| out.best_score < *b) {
            best_score = Some(out.best_score.clone());
        }
        if recent.len() == 2 {
            recent.pop_front();
        }
        recent.push_back(out.best);
        trace.push(out.trace);
        if let Some(model) = out.model {
            return SearchResult {
                outcome: Outcome::Model(model),
                tries_used: t + 1,
                flips_used,
                best_score: BigUint::zero(),
                recent_best: recent.into(),
                trace: cfg.record_trace.then_some(trace),
                update_work: engine.update_work(),
            };
        }
    }
    SearchResult {
        outcome: Outcome::Exhausted,
        tries_used: cfg.max_tries,
        flips_used,
        best_score: best_score.expect("at least one try"),
        recent_best: recent.into(),
        trace: cfg.record_trace.then_some(trace),
        update_work: engine.update_work(),
    }
}

/// Tries on a thread pool. Try `t` draws from its own stream seeded with
/// `seed ^ t`; the lowest-numbered successful try wins, so the result does
/// not depend on scheduling.
fn run_parallel<E: Engine + Send, M: Fn() -> E + Sync>(make: M, cfg: &SearchConfig) -> SearchResult {
    let first_success = AtomicU32::new(u32::MAX);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.parallel_tries).build().expect("thread pool");
    let outcomes: Vec<Option<(TryOutcome, u64)>> = pool.install(|| {
        (0..cfg.max_tries)
            .into_par_iter()
            .map(|t| {
                if t > first_success.load(Ordering::Relaxed) {
                    return None;
                }
                let mut engine = make();
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ u64::from(t));
                let initial = random_assignment(engine.num_vars(), &mut rng);
                let out = run_try(&mut engine, initial, cfg, &mut rng);
                if out.model.is_some() {
                    first_success.fetch_min(t, Ordering::Relaxed);
                }
                Some((out, engine.update_work()))
            })
            .collect()
    });
    let winner = outcomes.iter().position(|o| o.as_ref().is_some_and(|(out, _)| out.model.is_some()));
    let considered = winner.map_or(outcomes.len(), |w| w + 1);
    let mut flips_used = 0;
    let mut update_work = 0;
    let mut best_score: Option<BigUint> = None;
    let mut recent = VecDeque::with_capacity(2);
    let mut trace = Vec::new();
    let mut model = None;
    for entry in outcomes.into_iter().take(considered) {
        let (out, work) = entry.expect("tries before the winner always run");
        flips_used += out.flips;
        update_work += work;
        if best_score.as_ref().is_none_or(|b| out.best_score < *b) {
            best_score = Some(out.best_score.clone());
        }
        if recent.len() == 2 {
            recent.pop_front();
        }
        recent.push_back(out.best);
        trace.push(out.trace);
        model = out.model;
    }
    SearchResult {
        outcome: model.map_or(Outcome::Exhausted, Outcome::Model),
        tries_used: considered as u32,
        flips_used,
        best_score: best_score.expect("at least one try"),
        recent_best: recent.into(),
        trace: cfg.record_trace.then_some(trace),
        update_work,
    }
}
