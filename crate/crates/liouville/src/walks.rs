//! Random-walk evidence for the Liouville property: exact transition
//! probabilities and k-step laws of the induced chain on finite point sets,
//! harmonicity residuals of finitely-supported functions, and seeded Monte
//! Carlo simulation with exact total-variation statistics.
//!
//! Walk convention: new increments multiply on the left, `z_k = g_k ⋯ g₁ ·
//! x`, which makes the induced chain on point sets Markov with kernel
//! `p_μ(x, y) = Σ_{g·x = y} μ(g)`. Simulation is reproducible from its seed
//! alone: trial `t` draws from stream `t` of a counter-based generator, so
//! the outcome is independent of how trials are scheduled across workers.

use crate::action::{act_set, Multiset, PointSet};
use crate::dyadic::Dyadic;
use crate::plgroup::{f_generator_a, f_generator_b, translation, PLMap, ProbMeasure};
use crate::ratio::Ratio;
use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;

/// An exact probability distribution over point sets.
pub type Law = BTreeMap<PointSet, Ratio>;

/// `p_μ(x, y) = Σ_{g·x = y} μ(g)`, exactly.
pub fn transition_probability(mu: &ProbMeasure, x: &PointSet, y: &PointSet) -> Ratio {
    mu.atoms()
        .iter()
        .filter(|(g, _)| &act_set(g, x) == y)
        .fold(Ratio::zero(), |acc, (_, w)| &acc + w)
}

/// One convolution step: pushes `law` forward through the kernel of `mu`.
pub fn one_step_law(mu: &ProbMeasure, law: &Law) -> Law {
    let mut out = Law::new();
    for (x, px) in law {
        for (g, w) in mu.atoms() {
            let y = act_set(g, x);
            let mass = px * w;
            match out.get_mut(&y) {
                Some(q) => *q = &*q + &mass,
                None => {
                    out.insert(y, mass);
                }
            }
        }
    }
    out
}

/// The exact law of the chain started at `start` after `k` steps.
pub fn k_step_law(mu: &ProbMeasure, start: &PointSet, k: u64) -> Law {
    let mut law = Law::from([(start.clone(), Ratio::one())]);
    for _ in 0..k {
        law = one_step_law(mu, &law);
    }
    law
}

/// Exact total variation `½ Σ_z |a(z) − b(z)|` between two laws.
pub fn law_tv(a: &Law, b: &Law) -> Ratio {
    let zero = Ratio::zero();
    let mut sum = Ratio::zero();
    for (z, pa) in a {
        let pb = b.get(z).unwrap_or(&zero);
        sum = &sum + &pa.abs_diff(pb);
    }
    for (z, pb) in b {
        if !a.contains_key(z) {
            sum = &sum + pb;
        }
    }
    sum.half()
}

/// A function on point sets given by finitely many explicit values over a
/// constant background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    entries: BTreeMap<PointSet, Ratio>,
    default: Ratio,
}

impl FunctionTable {
    pub fn constant(value: Ratio) -> Self {
        FunctionTable {
            entries: BTreeMap::new(),
            default: value,
        }
    }

    /// The indicator of a single point set.
    pub fn indicator(ps: PointSet) -> Self {
        let mut f = Self::constant(Ratio::zero());
        f.set(ps, Ratio::one());
        f
    }

    pub fn set(&mut self, ps: PointSet, value: Ratio) {
        self.entries.insert(ps, value);
    }

    pub fn value_at(&self, ps: &PointSet) -> &Ratio {
        self.entries.get(ps).unwrap_or(&self.default)
    }
}

/// `|f(x) − Σ_y f(y)·p_μ(x, y)|` — zero at every `x` exactly when `f` is
/// harmonic there. The sum is finite: one term per one-step image of `x`.
pub fn harmonicity_residual(f: &FunctionTable, mu: &ProbMeasure, x: &PointSet) -> Ratio {
    let mut expectation = Ratio::zero();
    for (g, w) in mu.atoms() {
        expectation = &expectation + &(f.value_at(&act_set(g, x)) * w);
    }
    f.value_at(x).abs_diff(&expectation)
}

/// Endpoint counts of a batch of simulated walks, with enough metadata to
/// reproduce the run or compare against an exact law.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WireDistribution", into = "WireDistribution")]
pub struct EmpiricalDistribution {
    counts: Multiset<PointSet>,
    trials: u64,
    step: u64,
    start: PointSet,
    seed: u64,
    /// Free-form description of the driving measure, recorded in artifacts.
    pub measure: String,
}

impl EmpiricalDistribution {
    /// Assembles a distribution from raw counts; the counts must add up to
    /// `trials`.
    pub fn new(
        counts: Multiset<PointSet>,
        trials: u64,
        step: u64,
        start: PointSet,
        seed: u64,
        measure: String,
    ) -> Self {
        assert_eq!(
            counts.total(),
            trials,
            "endpoint counts must sum to the trial count"
        );
        assert!(trials >= 1, "a distribution needs at least one trial");
        EmpiricalDistribution {
            counts,
            trials,
            step,
            start,
            seed,
            measure,
        }
    }

    pub fn counts(&self) -> &Multiset<PointSet> {
        &self.counts
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn start(&self) -> &PointSet {
        &self.start
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Empirical frequency of one endpoint.
    pub fn frequency(&self, ps: &PointSet) -> Ratio {
        Ratio::new(self.counts.count(ps), self.trials)
    }
}

#[derive(Serialize, Deserialize)]
struct WireDistribution {
    counts: BTreeMap<String, u64>,
    trials: u64,
    step: u64,
    start: String,
    seed: u64,
    measure: String,
}

fn parse_point_set(text: &str) -> Result<PointSet, String> {
    let points = text
        .split(',')
        .map(|tok| Dyadic::from_str(tok.trim()).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    PointSet::new(points).map_err(|e| e.to_string())
}

impl From<EmpiricalDistribution> for WireDistribution {
    fn from(d: EmpiricalDistribution) -> Self {
        WireDistribution {
            counts: d.counts.iter().map(|(ps, c)| (ps.to_text(), c)).collect(),
            trials: d.trials,
            step: d.step,
            start: d.start.to_text(),
            seed: d.seed,
            measure: d.measure,
        }
    }
}

impl TryFrom<WireDistribution> for EmpiricalDistribution {
    type Error = String;

    fn try_from(w: WireDistribution) -> Result<Self, String> {
        let mut counts = Multiset::new();
        for (text, c) in &w.counts {
            counts.insert_n(parse_point_set(text)?, *c);
        }
        if counts.total() != w.trials {
            return Err(format!(
                "counts sum to {}, expected {} trials",
                counts.total(),
                w.trials
            ));
        }
        Ok(EmpiricalDistribution {
            counts,
            trials: w.trials,
            step: w.step,
            start: parse_point_set(&w.start)?,
            seed: w.seed,
            measure: w.measure,
        })
    }
}

/// Draws atoms of a measure by exact integer thresholds: all weights are
/// scaled by their common denominator, and one uniform integer below it
/// picks the atom. A `u64` fast path covers every measure this crate ships.
struct AtomSampler {
    cumulative: Vec<BigUint>,
    denominator: BigUint,
    small: Option<(Vec<u64>, u64)>,
}

impl AtomSampler {
    fn new(mu: &ProbMeasure) -> AtomSampler {
        let denominator = mu
            .atoms()
            .iter()
            .map(|(_, w)| w.denom().to_biguint().expect("positive denominator"))
            .fold(BigUint::from(1u32), |acc, d| acc.lcm(&d));
        let mut cumulative = Vec::with_capacity(mu.atoms().len());
        let mut acc = BigUint::from(0u32);
        for (_, w) in mu.atoms() {
            let scaled = w.numer().to_biguint().expect("positive weight") * &denominator
                / w.denom().to_biguint().expect("positive denominator");
            acc += scaled;
            cumulative.push(acc.clone());
        }
        assert_eq!(acc, denominator, "weights must sum to one");
        let small = denominator.to_u64().map(|d| {
            (
                cumulative
                    .iter()
                    .map(|c| c.to_u64().expect("below denominator"))
                    .collect(),
                d,
            )
        });
        AtomSampler {
            cumulative,
            denominator,
            small,
        }
    }

    fn sample_index(&self, rng: &mut ChaCha8Rng) -> usize {
        match &self.small {
            Some((cum, d)) => {
                let r = rng.gen_range(0..*d);
                cum.partition_point(|&c| c <= r)
            }
            None => {
                let r = rng.gen_biguint_below(&self.denominator);
                self.cumulative.partition_point(|c| *c <= r)
            }
        }
    }
}

/// Runs `trials` independent length-`k` walks from `start` and counts the
/// endpoints. Reproducible from `seed` for any worker count: trial `t` reads
/// stream `t`, and the count merge is commutative.
pub fn simulate(
    mu: &ProbMeasure,
    start: &PointSet,
    k: u64,
    trials: u64,
    seed: u64,
) -> EmpiricalDistribution {
    assert!(trials >= 1, "at least one trial");
    let sampler = AtomSampler::new(mu);
    let counts = (0..trials)
        .into_par_iter()
        .fold(Multiset::new, |mut acc, trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let mut current = start.clone();
            for _ in 0..k {
                let (g, _) = &mu.atoms()[sampler.sample_index(&mut rng)];
                current = act_set(g, &current);
            }
            acc.insert(current);
            acc
        })
        .reduce(Multiset::new, merge_counts);
    EmpiricalDistribution::new(counts, trials, k, start.clone(), seed, describe(mu))
}

fn merge_counts(mut a: Multiset<PointSet>, b: Multiset<PointSet>) -> Multiset<PointSet> {
    for (ps, c) in b.iter() {
        a.insert_n(ps.clone(), c);
    }
    a
}

fn describe(mu: &ProbMeasure) -> String {
    let weights: Vec<String> = mu.atoms().iter().map(|(_, w)| w.to_string()).collect();
    format!(
        "{} atoms with weights {}",
        mu.atoms().len(),
        weights.join(",")
    )
}

/// `½ Σ_z |count₁(z)/trials₁ − count₂(z)/trials₂|`, exactly.
pub fn empirical_tv(d1: &EmpiricalDistribution, d2: &EmpiricalDistribution) -> Ratio {
    let mut sum = Ratio::zero();
    for (z, c1) in d1.counts.iter() {
        let f1 = Ratio::new(c1, d1.trials);
        let f2 = Ratio::new(d2.counts.count(z), d2.trials);
        sum = &sum + &f1.abs_diff(&f2);
    }
    for (z, c2) in d2.counts.iter() {
        if d1.counts.count(z) == 0 {
            sum = &sum + &Ratio::new(c2, d2.trials);
        }
    }
    sum.half()
}

/// `½δ_id + ¼δ_T + ¼δ_{T⁻¹}` for the unit translation `T`: the lazy simple
/// walk on integer translates when started at a singleton.
pub fn lazy_unit_translation() -> ProbMeasure {
    let t = translation(&Dyadic::one());
    ProbMeasure::new_symmetric(vec![
        (PLMap::identity(), Ratio::new(1, 2)),
        (t.invert(), Ratio::new(1, 4)),
        (t, Ratio::new(1, 4)),
    ])
    .expect("lazy translation measure is valid")
}

/// Lazy uniform measure on the two standard generators of F and their
/// inverses.
pub fn lazy_f() -> ProbMeasure {
    let a = f_generator_a();
    let b = f_generator_b();
    ProbMeasure::new_symmetric(vec![
        (PLMap::identity(), Ratio::new(1, 2)),
        (a.invert(), Ratio::new(1, 8)),
        (a, Ratio::new(1, 8)),
        (b.invert(), Ratio::new(1, 8)),
        (b, Ratio::new(1, 8)),
    ])
    .expect("lazy F measure is valid")
}

/// The measure of [`lazy_f`] extended by the unit translations `T^{±1}`,
/// whose support generates a copy of the larger group acting on all of ℝ.
pub fn lazy_fr() -> ProbMeasure {
    let a = f_generator_a();
    let b = f_generator_b();
    let t = translation(&Dyadic::one());
    ProbMeasure::new_symmetric(vec![
        (PLMap::identity(), Ratio::new(1, 2)),
        (a.invert(), Ratio::new(1, 12)),
        (a, Ratio::new(1, 12)),
        (b.invert(), Ratio::new(1, 12)),
        (b, Ratio::new(1, 12)),
        (t.invert(), Ratio::new(1, 12)),
        (t, Ratio::new(1, 12)),
    ])
    .expect("lazy F_R measure is valid")
}
