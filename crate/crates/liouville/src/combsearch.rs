//! Additive-combinatorics objectives over candidate sets of positive integer
//! rows, and search (exhaustive and annealed) for high-ratio instances.
//!
//! Each objective is a family of *terms*; a term projects a row to a key — a
//! consecutive coordinate sum, or a pair of them. The objective value is
//! `|⊓_t M_t| / |V|` where `M_t` is the multiset of term-`t` keys over the
//! rows of `V` and `⊓` is the key-wise-minimum multiset intersection. Under
//! this (default) counting, the keys witnessing a term need not come from a
//! common row; [`IntersectMode::MatchedRows`] is the stricter alternative
//! where a single row must satisfy every term at once.
//!
//! Exhaustive search certifies a maximum only over its declared bounds `(B,
//! k)` — a multiset of at most `k` rows with coordinates in `1..=B` — and
//! refuses spaces larger than its budget rather than silently truncating.
//! Nothing here ever claims nonexistence beyond those bounds.

use crate::action::Multiset;
use crate::cofolner::CandidateSet;
use crate::ratio::Ratio;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombError {
    #[error("objective expects dimension {expected}, candidate has {got}")]
    BadDimension { expected: usize, got: usize },
    #[error("candidate set must be non-empty")]
    EmptyInput,
    #[error("sequence objective needs length at least 3, got {0}")]
    TooShort(usize),
    #[error("objective `{0}` takes a parameter of at least {1}")]
    BadParameter(&'static str, u32),
    #[error("search space has {size} candidates, over the budget of {budget}")]
    BudgetExceeded { size: BigUint, budget: u64 },
    #[error("search bounds must satisfy B ≥ 1 and k ≥ 1")]
    BadBounds,
    #[error("this objective evaluates {expected} candidates, got a {got} candidate")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error("unknown objective `{0}` (expected pair3, general(n), chain(d), or sequence)")]
    UnknownObjective(String),
    #[error("invalid candidate: {0}")]
    BadCandidate(String),
}

/// One consecutive-sum key constructor: `row ↦ p_i + … + p_j` (1-based,
/// inclusive), optionally paired with a second range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub left: (u32, u32),
    pub right: Option<(u32, u32)>,
}

/// A term key. Orders lexicographically, so multisets of keys have a
/// deterministic layout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Key {
    Single(BigUint),
    Pair(BigUint, BigUint),
}

fn range_sum(row: &[BigUint], (i, j): (u32, u32)) -> BigUint {
    row[i as usize - 1..=j as usize - 1].iter().sum()
}

impl Term {
    fn single(i: u32, j: u32) -> Term {
        Term {
            left: (i, j),
            right: None,
        }
    }

    fn pair(l: (u32, u32), r: (u32, u32)) -> Term {
        Term {
            left: l,
            right: Some(r),
        }
    }

    pub fn key(&self, row: &[BigUint]) -> Key {
        match self.right {
            None => Key::Single(range_sum(row, self.left)),
            Some(r) => Key::Pair(range_sum(row, self.left), range_sum(row, r)),
        }
    }
}

/// How the terms of an objective are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectMode {
    /// Key-wise minimum across the per-term key multisets (the default):
    /// different rows may witness different terms.
    #[default]
    Weak,
    /// A row counts only if all terms give it the same key.
    MatchedRows,
}

/// Key-wise minimum of counts across a non-empty list of multisets.
pub fn multiset_intersect<K: Ord + Clone>(sets: &[&Multiset<K>]) -> Multiset<K> {
    Multiset::intersect_many(sets)
}

/// The objectives this module can evaluate and search.
///
/// `Pair3` is the fixed four-term objective on triples; `General(n)` is its
/// `n`-dimensional family over split consecutive sums `(p_i+…+p_k,
/// p_{k+1}+…+p_m)` for `1 ≤ i ≤ k < m ≤ n`; `Chain(d)` intersects all
/// consecutive sums `p_i+…+p_j` alone; `Sequence` works on a single integer
/// sequence through its sliding windows rather than on rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Pair3,
    General(u32),
    Chain(u32),
    Sequence,
}

impl Objective {
    /// Row dimension for row-based objectives, `None` for `Sequence`.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Objective::Pair3 => Some(3),
            Objective::General(n) => Some(*n as usize),
            Objective::Chain(d) => Some(*d as usize),
            Objective::Sequence => None,
        }
    }

    /// The term table for row-based objectives, in evaluation order.
    /// `Sequence` has no row terms (its multisets come from windows).
    pub fn terms(&self) -> Result<Vec<Term>, CombError> {
        match *self {
            Objective::Pair3 => Ok(vec![
                Term::pair((1, 1), (2, 2)),
                Term::pair((2, 2), (3, 3)),
                Term::pair((1, 2), (3, 3)),
                Term::pair((1, 1), (2, 3)),
            ]),
            Objective::General(n) => {
                if n < 2 {
                    return Err(CombError::BadParameter("general", 2));
                }
                let mut terms = Vec::new();
                for k in 1..=n {
                    for i in 1..=k {
                        for m in k + 1..=n {
                            terms.push(Term::pair((i, k), (k + 1, m)));
                        }
                    }
                }
                Ok(terms)
            }
            Objective::Chain(d) => {
                if d < 1 {
                    return Err(CombError::BadParameter("chain", 1));
                }
                let mut terms = Vec::new();
                for i in 1..=d {
                    for j in i..=d {
                        terms.push(Term::single(i, j));
                    }
                }
                Ok(terms)
            }
            Objective::Sequence => Err(CombError::WrongKind {
                expected: "sequence",
                got: "row terms",
            }),
        }
    }

    /// Evaluates a candidate of the matching kind.
    pub fn evaluate(&self, c: &Candidate, mode: IntersectMode) -> Result<Ratio, CombError> {
        match (self, c) {
            (Objective::Sequence, Candidate::Sequence(a)) => eval_sequence(a, mode),
            (Objective::Sequence, Candidate::Rows(_)) => Err(CombError::WrongKind {
                expected: "sequence",
                got: "rows",
            }),
            (_, Candidate::Sequence(_)) => Err(CombError::WrongKind {
                expected: "rows",
                got: "sequence",
            }),
            (_, Candidate::Rows(rows)) => {
                let d = self.dimension().expect("row-based objective");
                let set = CandidateSet::from_u64_rows(d, rows)
                    .map_err(|e| CombError::BadCandidate(e.to_string()))?;
                self.evaluate_rows(&set, mode)
            }
        }
    }

    /// Evaluates a row-based objective on a candidate set.
    pub fn evaluate_rows(&self, v: &CandidateSet, mode: IntersectMode) -> Result<Ratio, CombError> {
        let d = match self.dimension() {
            Some(d) => d,
            None => {
                return Err(CombError::WrongKind {
                    expected: "sequence",
                    got: "rows",
                })
            }
        };
        if v.dimension() != d {
            return Err(CombError::BadDimension {
                expected: d,
                got: v.dimension(),
            });
        }
        if v.is_empty() {
            return Err(CombError::EmptyInput);
        }
        let terms = self.terms()?;
        Ok(eval_terms(&terms, v.rows(), mode))
    }
}

fn eval_terms(terms: &[Term], rows: &[Vec<BigUint>], mode: IntersectMode) -> Ratio {
    match mode {
        IntersectMode::Weak => {
            let multisets: Vec<Multiset<Key>> = terms
                .iter()
                .map(|t| rows.iter().map(|r| t.key(r)).collect())
                .collect();
            let refs: Vec<&Multiset<Key>> = multisets.iter().collect();
            Ratio::new(multiset_intersect(&refs).total(), rows.len() as u64)
        }
        IntersectMode::MatchedRows => {
            let hits = rows
                .iter()
                .filter(|r| {
                    let first = terms[0].key(r);
                    terms[1..].iter().all(|t| t.key(r) == first)
                })
                .count();
            Ratio::new(hits, rows.len())
        }
    }
}

/// The four-term objective on dimension-3 rows:
/// `(p₁,p₂), (p₂,p₃), (p₁+p₂,p₃), (p₁,p₂+p₃)`.
pub fn objective_pair3(v: &CandidateSet) -> Result<Ratio, CombError> {
    Objective::Pair3.evaluate_rows(v, IntersectMode::Weak)
}

/// The split-sum family on dimension-`n` rows, `1 ≤ i ≤ k < m ≤ n`.
/// `n = 3` has exactly the four terms of [`objective_pair3`].
pub fn objective_general(n: u32, v: &CandidateSet) -> Result<Ratio, CombError> {
    Objective::General(n).evaluate_rows(v, IntersectMode::Weak)
}

/// The consecutive-sum chain on dimension-`d` rows: all `p_i + … + p_j`.
pub fn objective_chain(w: &CandidateSet) -> Result<Ratio, CombError> {
    Objective::Chain(w.dimension() as u32).evaluate_rows(w, IntersectMode::Weak)
}

/// The sliding-window objective on one sequence `a₁, …, a_n`: intersects
/// `S₁ = {(a_i, a_{i+1})}`, `S₂ = {(a_j+a_{j+1}, a_{j+2})}`,
/// `S₃ = {(a_k, a_{k+1}+a_{k+2})}` and divides by `n`.
pub fn objective_sequence(a: &[u64]) -> Result<Ratio, CombError> {
    eval_sequence(a, IntersectMode::Weak)
}

fn eval_sequence(a: &[u64], mode: IntersectMode) -> Result<Ratio, CombError> {
    let n = a.len();
    if n < 3 {
        return Err(CombError::TooShort(n));
    }
    let big: Vec<BigUint> = a.iter().map(|&x| BigUint::from(x)).collect();
    match mode {
        IntersectMode::Weak => {
            let s1: Multiset<Key> = big
                .windows(2)
                .map(|w| Key::Pair(w[0].clone(), w[1].clone()))
                .collect();
            let s2: Multiset<Key> = big
                .windows(3)
                .map(|w| Key::Pair(&w[0] + &w[1], w[2].clone()))
                .collect();
            let s3: Multiset<Key> = big
                .windows(3)
                .map(|w| Key::Pair(w[0].clone(), &w[1] + &w[2]))
                .collect();
            let inter = multiset_intersect(&[&s1, &s2, &s3]);
            Ok(Ratio::new(inter.total(), n as u64))
        }
        IntersectMode::MatchedRows => {
            // A window index counts only when its three keys coincide, which
            // forces a zero entry — kept for symmetry with the row objectives.
            let hits = big
                .windows(3)
                .filter(|w| {
                    let k1 = Key::Pair(w[0].clone(), w[1].clone());
                    let k2 = Key::Pair(&w[0] + &w[1], w[2].clone());
                    let k3 = Key::Pair(w[0].clone(), &w[1] + &w[2]);
                    k1 == k2 && k2 == k3
                })
                .count();
            Ok(Ratio::new(hits, n))
        }
    }
}

/// A point of the search space: a multiset of rows, or one sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Candidate {
    Rows(Vec<Vec<u64>>),
    Sequence(Vec<u64>),
}

impl Candidate {
    /// Canonical form for reporting: rows sorted lexicographically
    /// (objectives are row-permutation invariant); sequences untouched.
    fn canonical(mut self) -> Candidate {
        if let Candidate::Rows(rows) = &mut self {
            rows.sort();
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Anneal,
}

/// Declared bounds of a search: coordinates in `1..=B`, at most `k` rows
/// (for sequences: length at most `k`), row dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(rename = "B")]
    pub b: u64,
    pub k: usize,
    pub d: usize,
}

/// Outcome of a search: the best ratio seen and a witness achieving it,
/// together with everything needed to re-verify or reproduce the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub objective: String,
    pub bounds: Bounds,
    pub best_ratio: Ratio,
    pub best_set: Candidate,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mode: IntersectMode,
}

impl SearchResult {
    /// Re-runs the exact evaluator on the stored witness.
    pub fn recheck(&self) -> Result<Ratio, CombError> {
        self.objective
            .parse::<Objective>()?
            .evaluate(&self.best_set, self.mode)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Pair3 => write!(f, "pair3"),
            Objective::General(n) => write!(f, "general({n})"),
            Objective::Chain(d) => write!(f, "chain({d})"),
            Objective::Sequence => write!(f, "sequence"),
        }
    }
}

impl FromStr for Objective {
    type Err = CombError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_param = |body: &str, name: &'static str, min: u32| {
            body.strip_suffix(')')
                .and_then(|p| p.parse::<u32>().ok())
                .filter(|&n| n >= min)
                .ok_or(CombError::BadParameter(name, min))
        };
        match s {
            "pair3" => Ok(Objective::Pair3),
            "sequence" => Ok(Objective::Sequence),
            _ => {
                if let Some(body) = s.strip_prefix("general(") {
                    Ok(Objective::General(parse_param(body, "general", 2)?))
                } else if let Some(body) = s.strip_prefix("chain(") {
                    Ok(Objective::Chain(parse_param(body, "chain", 1)?))
                } else {
                    Err(CombError::UnknownObjective(s.to_string()))
                }
            }
        }
    }
}

/// All rows of `{1..=B}^d` in lexicographic order.
pub fn row_pool(b: u64, d: usize) -> Vec<Vec<u64>> {
    let mut pool = Vec::with_capacity((b as usize).pow(d as u32));
    let mut row = vec![1u64; d];
    loop {
        pool.push(row.clone());
        // Odometer increment, most significant coordinate first.
        let mut i = d;
        loop {
            if i == 0 {
                return pool;
            }
            i -= 1;
            if row[i] < b {
                row[i] += 1;
                row[i + 1..].fill(1);
                break;
            }
        }
    }
}

/// Number of multisets of size `1..=k` drawn from a pool of `p` rows:
/// `Σ_s C(p + s − 1, s)`.
fn multiset_space_size(p: u64, k: usize) -> BigUint {
    let mut total = BigUint::zero();
    let mut c = BigUint::one(); // C(p − 1 + s, s), starting at s = 0
    for s in 1..=k as u64 {
        c = c * (p - 1 + s) / s;
        total += &c;
    }
    total
}

fn check_budget(size: BigUint, budget: u64) -> Result<(), CombError> {
    if size > BigUint::from(budget) {
        return Err(CombError::BudgetExceeded { size, budget });
    }
    Ok(())
}

/// Default candidate budget for exhaustive search.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Exact maximum of `objective` over multisets of at most `k` rows from
/// `{1..=B}^d` (or sequences of length `3..=k` for the sequence objective),
/// with a lexicographically smallest witness. Refuses spaces larger than
/// `budget` rather than truncating: the result is a certified maximum over
/// the declared bounds, nothing more.
pub fn exhaustive_search(
    objective: &Objective,
    b: u64,
    k: usize,
    mode: IntersectMode,
    budget: u64,
) -> Result<SearchResult, CombError> {
    if b < 1 || k < 1 {
        return Err(CombError::BadBounds);
    }
    match objective.dimension() {
        Some(d) => {
            let pool = row_pool(b, d);
            exhaustive_over_pool(objective, &pool, b, k, mode, budget)
        }
        None => exhaustive_sequences(b, k, mode, budget),
    }
}

/// Exhaustive search over multisets drawn from an explicit row pool (the
/// pool is sorted and deduplicated first). This is the restricted-subspace
/// entry point; [`exhaustive_search`] feeds it the full grid.
pub fn exhaustive_over_pool(
    objective: &Objective,
    pool: &[Vec<u64>],
    b: u64,
    k: usize,
    mode: IntersectMode,
    budget: u64,
) -> Result<SearchResult, CombError> {
    let d = objective.dimension().ok_or(CombError::WrongKind {
        expected: "rows",
        got: "sequence",
    })?;
    let mut pool: Vec<Vec<u64>> = pool.to_vec();
    pool.sort();
    pool.dedup();
    if pool.is_empty() || k < 1 {
        return Err(CombError::BadBounds);
    }
    if pool.iter().any(|r| r.len() != d) {
        return Err(CombError::BadDimension {
            expected: d,
            got: pool.iter().find(|r| r.len() != d).map_or(0, |r| r.len()),
        });
    }
    check_budget(multiset_space_size(pool.len() as u64, k), budget)?;

    let terms = objective.terms()?;
    // One task per (size, first row index); each task walks the
    // non-decreasing index tuples with that prefix. The reduction is an
    // argmax under a total order, so the outcome is schedule-independent.
    let tasks: Vec<(usize, usize)> = (1..=k)
        .flat_map(|s| (0..pool.len()).map(move |i| (s, i)))
        .collect();
    let best = tasks
        .par_iter()
        .map(|&(s, first)| {
            let mut indices = Vec::with_capacity(s);
            indices.push(first);
            let mut best: Option<(Ratio, Vec<usize>)> = None;
            enumerate_tail(&pool, &terms, mode, s, &mut indices, &mut best);
            best
        })
        .reduce(|| None, |a, b| merge_best(a, b));
    let (ratio, indices) = best.expect("non-empty space");
    let rows: Vec<Vec<u64>> = indices.iter().map(|&i| pool[i].clone()).collect();
    Ok(SearchResult {
        objective: objective.to_string(),
        bounds: Bounds { b, k, d },
        best_ratio: ratio,
        best_set: Candidate::Rows(rows).canonical(),
        method: Method::Exhaustive,
        seed: None,
        mode,
    })
}

fn enumerate_tail(
    pool: &[Vec<u64>],
    terms: &[Term],
    mode: IntersectMode,
    size: usize,
    indices: &mut Vec<usize>,
    best: &mut Option<(Ratio, Vec<usize>)>,
) {
    if indices.len() == size {
        let rows: Vec<Vec<BigUint>> = indices
            .iter()
            .map(|&i| pool[i].iter().map(|&v| BigUint::from(v)).collect())
            .collect();
        let ratio = eval_terms(terms, &rows, mode);
        let candidate = Some((ratio, indices.clone()));
        *best = merge_best(best.take(), candidate);
        return;
    }
    let lo = *indices.last().expect("prefix non-empty");
    for i in lo..pool.len() {
        indices.push(i);
        enumerate_tail(pool, terms, mode, size, indices, best);
        indices.pop();
    }
}

/// Argmax by ratio; ties go to the smaller witness under its `Ord`, making
/// the parallel reduction a total-order argmax and therefore
/// schedule-independent.
fn merge_best<W: Ord>(a: Option<(Ratio, W)>, b: Option<(Ratio, W)>) -> Option<(Ratio, W)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let better = match y.0.cmp(&x.0) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => y.1 < x.1,
            };
            Some(if better { y } else { x })
        }
    }
}

fn exhaustive_sequences(
    b: u64,
    k: usize,
    mode: IntersectMode,
    budget: u64,
) -> Result<SearchResult, CombError> {
    if k < 3 {
        return Err(CombError::TooShort(k));
    }
    let mut size = BigUint::zero();
    for n in 3..=k {
        size += BigUint::from(b).pow(n as u32);
    }
    check_budget(size, budget)?;

    let tasks: Vec<(usize, u64)> = (3..=k)
        .flat_map(|n| (1..=b).map(move |first| (n, first)))
        .collect();
    let best = tasks
        .par_iter()
        .map(|&(n, first)| {
            let mut seq = Vec::with_capacity(n);
            seq.push(first);
            let mut best: Option<(Ratio, Vec<u64>)> = None;
            enumerate_seq_tail(b, n, mode, &mut seq, &mut best);
            best
        })
        .reduce(|| None, |a, b| merge_best(a, b));
    let (ratio, seq) = best.expect("non-empty space");
    Ok(SearchResult {
        objective: Objective::Sequence.to_string(),
        bounds: Bounds { b, k, d: 1 },
        best_ratio: ratio,
        best_set: Candidate::Sequence(seq),
        method: Method::Exhaustive,
        seed: None,
        mode,
    })
}

fn enumerate_seq_tail(
    b: u64,
    n: usize,
    mode: IntersectMode,
    seq: &mut Vec<u64>,
    best: &mut Option<(Ratio, Vec<u64>)>,
) {
    if seq.len() == n {
        let ratio = eval_sequence(seq, mode).expect("length ≥ 3");
        let candidate = Some((ratio, seq.clone()));
        *best = merge_best(best.take(), candidate);
        return;
    }
    for v in 1..=b {
        seq.push(v);
        enumerate_seq_tail(b, n, mode, seq, best);
        seq.pop();
    }
}

/// Annealing controls. The temperature decays geometrically per step;
/// `chains` independent chains run from per-chain random streams of the one
/// seed, so the outcome is identical for any worker count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnealParams {
    pub steps: u64,
    pub chains: u32,
    pub seed: u64,
    pub initial_temperature: f64,
    pub cooling: f64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            steps: 20_000,
            chains: 8,
            seed: 0,
            initial_temperature: 0.25,
            cooling: 0.9995,
        }
    }
}

/// Stochastic search by simulated annealing: proposals insert, delete, or
/// mutate a row (mutate one entry, for sequences). Acceptance decisions use
/// floating temperature arithmetic, but every reported ratio is computed by
/// the exact evaluator, and the returned best is re-evaluated before return.
pub fn anneal_search(
    objective: &Objective,
    b: u64,
    k: usize,
    mode: IntersectMode,
    params: &AnnealParams,
) -> Result<SearchResult, CombError> {
    if b < 1 || k < 1 || params.chains == 0 {
        return Err(CombError::BadBounds);
    }
    if objective.dimension().is_none() && k < 3 {
        return Err(CombError::TooShort(k));
    }
    // Validate the objective parameters once up front.
    if let Some(_d) = objective.dimension() {
        objective.terms()?;
    }

    let chains: Vec<u32> = (0..params.chains).collect();
    let best = chains
        .par_iter()
        .map(|&chain| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(chain as u64);
            let (ratio, cand) = run_chain(objective, b, k, mode, params, &mut rng);
            Some((ratio, (chain, cand)))
        })
        .reduce(|| None, |a, b| merge_best_keyed(a, b));
    let (_, (_, cand)) = best.expect("at least one chain");
    // Re-verify: the reported number is the evaluator's, not the chain's.
    let cand = cand.canonical();
    let ratio = objective.evaluate(&cand, mode)?;
    Ok(SearchResult {
        objective: objective.to_string(),
        bounds: Bounds {
            b,
            k,
            d: objective.dimension().unwrap_or(1),
        },
        best_ratio: ratio,
        best_set: cand,
        method: Method::Anneal,
        seed: Some(params.seed),
        mode,
    })
}

/// Like [`merge_best`] but ties prefer the lower chain index.
fn merge_best_keyed<W>(
    a: Option<(Ratio, (u32, W))>,
    b: Option<(Ratio, (u32, W))>,
) -> Option<(Ratio, (u32, W))> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let better = match y.0.cmp(&x.0) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => y.1 .0 < x.1 .0,
            };
            Some(if better { y } else { x })
        }
    }
}

fn run_chain(
    objective: &Objective,
    b: u64,
    k: usize,
    mode: IntersectMode,
    params: &AnnealParams,
    rng: &mut ChaCha8Rng,
) -> (Ratio, Candidate) {
    let mut current = match objective.dimension() {
        Some(d) => Candidate::Rows(vec![vec![1; d]]),
        None => Candidate::Sequence(vec![1; k]),
    };
    let mut current_ratio = objective
        .evaluate(&current, mode)
        .expect("initial is valid");
    let mut best = (current_ratio.clone(), current.clone());
    let mut temperature = params.initial_temperature;
    for _ in 0..params.steps {
        let proposal = propose(&current, b, k, rng);
        let ratio = objective
            .evaluate(&proposal, mode)
            .expect("moves stay in bounds");
        let accept = if ratio >= current_ratio {
            true
        } else {
            let delta = ratio.to_f64() - current_ratio.to_f64();
            rng.gen::<f64>() < (delta / temperature.max(f64::MIN_POSITIVE)).exp()
        };
        if accept {
            current = proposal;
            current_ratio = ratio;
            if current_ratio > best.0 {
                best = (current_ratio.clone(), current.clone());
            }
        }
        temperature *= params.cooling;
    }
    best
}

fn propose(current: &Candidate, b: u64, k: usize, rng: &mut ChaCha8Rng) -> Candidate {
    match current {
        Candidate::Sequence(seq) => {
            let mut next = seq.clone();
            let i = rng.gen_range(0..next.len());
            next[i] = rng.gen_range(1..=b);
            Candidate::Sequence(next)
        }
        Candidate::Rows(rows) => {
            let d = rows[0].len();
            let mut next = rows.clone();
            // Move mix: grow, shrink, or perturb, subject to 1 ≤ |V| ≤ k.
            match rng.gen_range(0..3u8) {
                0 if next.len() < k => {
                    next.push((0..d).map(|_| rng.gen_range(1..=b)).collect());
                }
                1 if next.len() > 1 => {
                    let i = rng.gen_range(0..next.len());
                    next.remove(i);
                }
                _ => {
                    let i = rng.gen_range(0..next.len());
                    let j = rng.gen_range(0..d);
                    next[i][j] = rng.gen_range(1..=b);
                }
            }
            Candidate::Rows(next)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rows(v: &[&[u64]]) -> CandidateSet {
        CandidateSet::from_u64_rows(
            v[0].len(),
            &v.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn term_tables_match_the_frozen_index_sets() {
        let p = Objective::Pair3.terms().unwrap();
        assert_eq!(
            p,
            vec![
                Term::pair((1, 1), (2, 2)),
                Term::pair((2, 2), (3, 3)),
                Term::pair((1, 2), (3, 3)),
                Term::pair((1, 1), (2, 3)),
            ]
        );
        // The n = 3 split-sum family is the same four terms.
        let g3 = Objective::General(3).terms().unwrap();
        assert_eq!(g3.len(), 4);
        for t in &p {
            assert!(g3.contains(t));
        }
        assert_eq!(
            Objective::General(2).terms().unwrap(),
            vec![Term::pair((1, 1), (2, 2))]
        );
        assert_eq!(
            Objective::Chain(2).terms().unwrap(),
            vec![Term::single(1, 1), Term::single(1, 2), Term::single(2, 2)]
        );
        assert!(Objective::General(1).terms().is_err());
    }

    #[test]
    fn intersect_examples() {
        let m1: Multiset<char> = "aab".chars().collect();
        let m2: Multiset<char> = "ac".chars().collect();
        let inter = multiset_intersect(&[&m1, &m2]);
        assert_eq!(inter.count(&'a'), 1);
        assert_eq!(inter.total(), 1);
        assert_eq!(multiset_intersect(&[&m1]), m1);
        let m3: Multiset<char> = "b".chars().collect();
        assert_eq!(multiset_intersect(&[&m2, &m3]).total(), 0);
    }

    #[test]
    fn pair3_known_values() {
        assert_eq!(
            objective_pair3(&rows(&[&[1, 1, 1]])).unwrap(),
            Ratio::zero()
        );
        let v = rows(&[&[2, 2, 9], &[9, 2, 2], &[1, 1, 2], &[2, 1, 1]]);
        assert_eq!(objective_pair3(&v).unwrap(), Ratio::new(1, 4));
        let v = rows(&[&[1, 1, 2], &[2, 1, 1]]);
        assert_eq!(objective_pair3(&v).unwrap(), Ratio::zero());
        assert!(matches!(
            objective_pair3(&rows(&[&[1, 1]])),
            Err(CombError::BadDimension {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn matched_rows_mode_is_stricter() {
        let v = rows(&[&[2, 2, 9], &[9, 2, 2], &[1, 1, 2], &[2, 1, 1]]);
        // (p₁, p₂) = (p₁+p₂, p₃) forces p₂ = 0: impossible on positive rows.
        assert_eq!(
            Objective::Pair3
                .evaluate_rows(&v, IntersectMode::MatchedRows)
                .unwrap(),
            Ratio::zero()
        );
        // Chain with d = 1 has a single term, so every row matches itself.
        let w = rows(&[&[5], &[7]]);
        assert_eq!(
            Objective::Chain(1)
                .evaluate_rows(&w, IntersectMode::MatchedRows)
                .unwrap(),
            Ratio::one()
        );
    }

    #[test]
    fn general_known_values() {
        assert_eq!(
            objective_general(2, &rows(&[&[4, 7]])).unwrap(),
            Ratio::one()
        );
        assert_eq!(
            objective_general(3, &rows(&[&[1, 1, 1]])).unwrap(),
            Ratio::zero()
        );
        let v = rows(&[&[2, 2, 9], &[9, 2, 2], &[1, 1, 2], &[2, 1, 1]]);
        assert_eq!(
            objective_general(3, &v).unwrap(),
            objective_pair3(&v).unwrap()
        );
    }

    #[test]
    fn chain_known_values() {
        let diag = rows(&[&[1, 1], &[2, 2], &[4, 4], &[8, 8]]);
        assert_eq!(objective_chain(&diag).unwrap(), Ratio::new(3, 4));
        assert_eq!(
            objective_chain(&rows(&[&[5], &[9], &[1]])).unwrap(),
            Ratio::one()
        );
        assert_eq!(objective_chain(&rows(&[&[1, 2]])).unwrap(), Ratio::zero());
    }

    #[test]
    fn sequence_known_values() {
        assert_eq!(objective_sequence(&[3, 3, 3, 3, 3]).unwrap(), Ratio::zero());
        assert_eq!(objective_sequence(&[1, 1, 1]).unwrap(), Ratio::zero());
        // (2,3) appears as an adjacent pair, as (1+1, 3), and as (2, 1+2).
        assert_eq!(
            objective_sequence(&[2, 1, 2, 1, 1, 3, 2, 3]).unwrap(),
            Ratio::new(1, 8)
        );
        assert_eq!(objective_sequence(&[1, 2]), Err(CombError::TooShort(2)));
    }

    #[test]
    fn objective_names_round_trip() {
        for o in [
            Objective::Pair3,
            Objective::General(4),
            Objective::Chain(2),
            Objective::Sequence,
        ] {
            assert_eq!(o.to_string().parse::<Objective>().unwrap(), o);
        }
        assert!("general(".parse::<Objective>().is_err());
        assert!("box".parse::<Objective>().is_err());
    }

    #[test]
    fn row_pool_is_lexicographic() {
        let pool = row_pool(2, 2);
        assert_eq!(pool, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert_eq!(row_pool(3, 3).len(), 27);
    }

    #[test]
    fn space_size_formula() {
        // 4 rows, up to 2: 4 singletons + C(5,2) = 10 pairs.
        assert_eq!(multiset_space_size(4, 2), BigUint::from(14u32));
        assert_eq!(
            multiset_space_size(27, 3),
            BigUint::from(27u32 + 378 + 3654)
        );
    }

    #[test]
    fn exhaustive_pair3_tiny_bounds() {
        let r = exhaustive_search(&Objective::Pair3, 2, 2, IntersectMode::Weak, DEFAULT_BUDGET)
            .unwrap();
        assert_eq!(r.best_ratio, Ratio::zero());
        // Smallest witness under the tie-break: the single all-ones row.
        assert_eq!(r.best_set, Candidate::Rows(vec![vec![1, 1, 1]]));
        assert_eq!(r.bounds, Bounds { b: 2, k: 2, d: 3 });
    }

    #[test]
    fn exhaustive_pair3_b3_k3() {
        let r = exhaustive_search(&Objective::Pair3, 3, 3, IntersectMode::Weak, DEFAULT_BUDGET)
            .unwrap();
        // One shared key, e.g. (2,2) via {(2,2,2),(1,1,2),(2,1,1)}, is
        // achievable; two witnesses per key class would need 4 distinct rows.
        assert_eq!(r.best_ratio, Ratio::new(1, 3));
        assert_eq!(r.recheck().unwrap(), r.best_ratio);
    }

    #[test]
    fn exhaustive_chain_on_diagonal_pool() {
        let pool: Vec<Vec<u64>> = (1..=8).map(|a| vec![a, a]).collect();
        let r = exhaustive_over_pool(
            &Objective::Chain(2),
            &pool,
            8,
            4,
            IntersectMode::Weak,
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(r.best_ratio, Ratio::new(3, 4));
        assert_eq!(
            r.best_set,
            Candidate::Rows(vec![vec![1, 1], vec![2, 2], vec![4, 4], vec![8, 8]])
        );
    }

    #[test]
    fn exhaustive_respects_budget() {
        let err =
            exhaustive_search(&Objective::Pair3, 9, 6, IntersectMode::Weak, 1000).unwrap_err();
        assert!(matches!(err, CombError::BudgetExceeded { .. }));
    }

    #[test]
    fn exhaustive_sequences_small() {
        // Lengths 3 and 4 admit no common key at all (the S₂ and S₃ keys of
        // a short sequence cannot agree), so nothing beats zero below
        // length 5; at length 5 the key (2,2) is reachable: in (2,1,1,2,2)
        // it occurs as the adjacent pair a₄a₅, as (1+1, 2), and as (2, 1+1).
        let r = exhaustive_search(
            &Objective::Sequence,
            3,
            5,
            IntersectMode::Weak,
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(r.recheck().unwrap(), r.best_ratio);
        assert_eq!(r.best_ratio, Ratio::new(1, 5));
        assert_eq!(r.best_set, Candidate::Sequence(vec![2, 1, 1, 2, 2]));
    }

    #[test]
    fn anneal_zero_steps_returns_initial() {
        let params = AnnealParams {
            steps: 0,
            chains: 2,
            ..Default::default()
        };
        let r = anneal_search(&Objective::Chain(1), 5, 3, IntersectMode::Weak, &params).unwrap();
        assert_eq!(r.best_ratio, Ratio::one());
        assert_eq!(r.best_set, Candidate::Rows(vec![vec![1]]));
        assert_eq!(r.seed, Some(0));
    }

    #[test]
    fn anneal_is_reproducible() {
        let params = AnnealParams {
            steps: 400,
            chains: 3,
            seed: 11,
            ..Default::default()
        };
        let a = anneal_search(&Objective::Pair3, 3, 3, IntersectMode::Weak, &params).unwrap();
        let b = anneal_search(&Objective::Pair3, 3, 3, IntersectMode::Weak, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn anneal_matches_exhaustive_on_small_bounds() {
        let exhaustive =
            exhaustive_search(&Objective::Pair3, 3, 3, IntersectMode::Weak, DEFAULT_BUDGET)
                .unwrap();
        let params = AnnealParams {
            steps: 4000,
            chains: 6,
            seed: 7,
            ..Default::default()
        };
        let annealed =
            anneal_search(&Objective::Pair3, 3, 3, IntersectMode::Weak, &params).unwrap();
        assert_eq!(annealed.best_ratio, exhaustive.best_ratio);
    }

    #[test]
    fn search_result_json_round_trip() {
        let r = exhaustive_search(
            &Objective::Chain(2),
            2,
            2,
            IntersectMode::Weak,
            DEFAULT_BUDGET,
        )
        .unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: SearchResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(json.contains("\"best_ratio\""));
    }

    proptest! {
        #[test]
        fn ratios_lie_in_unit_interval(
            raw in proptest::collection::vec(
                proptest::collection::vec(1u64..=9, 3), 1..=6)
        ) {
            let v = CandidateSet::from_u64_rows(3, &raw).unwrap();
            for r in [
                objective_pair3(&v).unwrap(),
                objective_general(3, &v).unwrap(),
                Objective::Pair3.evaluate_rows(&v, IntersectMode::MatchedRows).unwrap(),
            ] {
                prop_assert!(Ratio::zero() <= r && r <= Ratio::one());
            }
        }

        #[test]
        fn general3_never_exceeds_pair3(
            raw in proptest::collection::vec(
                proptest::collection::vec(1u64..=9, 3), 1..=6)
        ) {
            let v = CandidateSet::from_u64_rows(3, &raw).unwrap();
            prop_assert!(objective_general(3, &v).unwrap() <= objective_pair3(&v).unwrap());
        }

        #[test]
        fn row_permutation_and_scaling_invariance(
            raw in proptest::collection::vec(
                proptest::collection::vec(1u64..=9, 3), 1..=5),
            scale in 1u64..=4,
        ) {
            let v = CandidateSet::from_u64_rows(3, &raw).unwrap();
            let mut permuted = raw.clone();
            permuted.reverse();
            let p = CandidateSet::from_u64_rows(3, &permuted).unwrap();
            let scaled_rows: Vec<Vec<u64>> = raw
                .iter()
                .map(|r| r.iter().map(|&x| x * scale).collect())
                .collect();
            let s = CandidateSet::from_u64_rows(3, &scaled_rows).unwrap();
            let base = objective_pair3(&v).unwrap();
            prop_assert_eq!(&objective_pair3(&p).unwrap(), &base);
            prop_assert_eq!(&objective_pair3(&s).unwrap(), &base);
        }

        #[test]
        fn sequence_scaling_invariance(
            a in proptest::collection::vec(1u64..=9, 3..=8),
            m in 1u64..=5,
        ) {
            let scaled: Vec<u64> = a.iter().map(|&x| x * m).collect();
            prop_assert_eq!(
                objective_sequence(&scaled).unwrap(),
                objective_sequence(&a).unwrap()
            );
        }

        #[test]
        fn appending_a_row_moves_the_count_boundedly(
            raw in proptest::collection::vec(
                proptest::collection::vec(1u64..=9, 3), 1..=5),
            extra in proptest::collection::vec(1u64..=9, 3),
        ) {
            let terms = Objective::Pair3.terms().unwrap();
            let to_big = |rows: &[Vec<u64>]| -> Vec<Vec<BigUint>> {
                rows.iter()
                    .map(|r| r.iter().map(|&v| BigUint::from(v)).collect())
                    .collect()
            };
            let count = |rows: &[Vec<BigUint>]| -> i64 {
                let multisets: Vec<Multiset<Key>> = terms
                    .iter()
                    .map(|t| rows.iter().map(|r| t.key(r)).collect())
                    .collect();
                let refs: Vec<&Multiset<Key>> = multisets.iter().collect();
                multiset_intersect(&refs).total() as i64
            };
            let before = count(&to_big(&raw));
            let mut grown = raw.clone();
            grown.push(extra);
            let after = count(&to_big(&grown));
            prop_assert!((after - before).unsigned_abs() <= terms.len() as u64);
        }
    }
}
