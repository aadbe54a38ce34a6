//! The certificate pipeline: from a finite support of dyadic points to a
//! co-Følner family witnessing the 1- or 2-Liouville property.
//!
//! For single points the family is a plain interval of translates
//! `{T, T², …, T^N}`. For pairs the pipeline runs through exact integer
//! combinatorics first: a multiplicative box `A = {∏ g^e : 0 ≤ e < L}` over
//! the consecutive sums of the multipliers, the candidate set
//! `W = {(r₁·a, …, r_d·a) : a ∈ A}`, a lift of each row to a group element
//! through strong-transitivity witnesses, and shift averaging by the unit
//! translation. Verification always goes back through
//! [`crate::action::verify_cofolner`]; nothing is trusted from the
//! construction itself.

use crate::action::{self, CoFolnerCertificate, PointSet, Semantics};
use crate::dyadic::Dyadic;
use crate::plgroup::{self, transitivity_witness, translation, Mode, PLMap};
use crate::ratio::Ratio;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CofolnerError {
    #[error("multiplier list must be non-empty with positive entries")]
    BadMultipliers,
    #[error("box side must be at least 1")]
    BadSide,
    #[error("candidate set entries must be positive integers")]
    ZeroEntry,
    #[error("candidate dimension {dim} needs a support of {} points, got {support}", dim + 1)]
    DimensionMismatch { dim: usize, support: usize },
    #[error("support points must be natural numbers (scale first); got `{0}`")]
    SupportNotNatural(String),
    #[error("subset size must be 1 or 2, got {0}")]
    BadSubsetSize(u8),
    #[error("support of {support} points cannot host subsets of size {n}")]
    SupportTooSmall { support: usize, n: u8 },
    #[error("shift count does not fit in a machine integer; lower the target or the box side")]
    ShiftOverflow,
    #[error(transparent)]
    Action(#[from] action::ActionError),
    #[error(transparent)]
    Group(#[from] plgroup::PlError),
}

/// Per-gap multipliers `(r₁, …, r_d)` for a support of `d + 1` points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multipliers(Vec<u64>);

impl Multipliers {
    pub fn new(r: Vec<u64>) -> Result<Self, CofolnerError> {
        if r.is_empty() || r.iter().any(|&x| x == 0) {
            return Err(CofolnerError::BadMultipliers);
        }
        Ok(Multipliers(r))
    }

    pub fn ones(d: usize) -> Self {
        Multipliers(vec![1; d.max(1)])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().sum()
    }

    /// All consecutive sums `r_i + … + r_j` for `1 ≤ i ≤ j ≤ d`. These are
    /// the gap multipliers seen by pairs of support points, and they seed the
    /// multiplicative box.
    pub fn consecutive_sums(&self) -> Vec<u64> {
        let d = self.0.len();
        let mut sums = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            let mut s = 0u64;
            for &r in &self.0[i..] {
                s += r;
                sums.push(s);
            }
        }
        sums
    }
}

/// The set `A = {∏ g^{e_g} : 0 ≤ e_g < L}` over a list of integer
/// generators, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicativeBox {
    generators: Vec<u64>,
    side: u64,
    elements: Vec<BigUint>,
}

/// Builds the box from a raw factor list: duplicates and the factor 1 are
/// discarded. With no usable factor the box degenerates to `{1}`.
pub fn build_box(factors: &[u64], side: u64) -> Result<MultiplicativeBox, CofolnerError> {
    if side == 0 {
        return Err(CofolnerError::BadSide);
    }
    let generators: Vec<u64> = factors
        .iter()
        .copied()
        .filter(|&f| f > 1)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut elements = BTreeSet::new();
    let mut stack = vec![(0usize, BigUint::one())];
    while let Some((idx, value)) = stack.pop() {
        if idx == generators.len() {
            elements.insert(value);
            continue;
        }
        let g = BigUint::from(generators[idx]);
        let mut v = value;
        for e in 0..side {
            stack.push((idx + 1, v.clone()));
            if e + 1 < side {
                v *= &g;
            }
        }
    }
    Ok(MultiplicativeBox {
        generators,
        side,
        elements: elements.into_iter().collect(),
    })
}

impl MultiplicativeBox {
    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn elements(&self) -> &[BigUint] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_element(&self) -> &BigUint {
        self.elements.last().expect("box always contains 1")
    }

    /// `|g·A ∩ A| / |A|` for an integer factor `g`. For every generator this
    /// is at least `1 − 1/L`: each element sits on a `g`-chain of length at
    /// least `L` inside the box.
    pub fn invariance_ratio(&self, g: u64) -> Ratio {
        let g = BigUint::from(g);
        let hit = self
            .elements
            .iter()
            .filter(|a| self.elements.binary_search(&(*a * &g)).is_ok())
            .count();
        Ratio::new(hit as u64, self.elements.len() as u64)
    }
}

/// A finite multiset of rows in `ℕ^d` with all entries positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    dimension: usize,
    rows: Vec<Vec<BigUint>>,
}

impl CandidateSet {
    pub fn new(dimension: usize, rows: Vec<Vec<BigUint>>) -> Result<Self, CofolnerError> {
        assert!(dimension >= 1, "candidate dimension must be at least 1");
        for row in &rows {
            if row.len() != dimension {
                return Err(CofolnerError::DimensionMismatch {
                    dim: dimension,
                    support: row.len() + 1,
                });
            }
            if row.iter().any(|v| v.is_zero()) {
                return Err(CofolnerError::ZeroEntry);
            }
        }
        Ok(CandidateSet { dimension, rows })
    }

    pub fn from_u64_rows(dimension: usize, rows: &[Vec<u64>]) -> Result<Self, CofolnerError> {
        Self::new(
            dimension,
            rows.iter()
                .map(|r| r.iter().map(|&v| BigUint::from(v)).collect())
                .collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rows(&self) -> &[Vec<BigUint>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// `W = {(r₁·a, …, r_d·a) : a ∈ A}`, one row per box element.
pub fn build_w(r: &Multipliers, a: &MultiplicativeBox) -> CandidateSet {
    let rows = a
        .elements()
        .iter()
        .map(|v| {
            r.as_slice()
                .iter()
                .map(|&ri| v * BigUint::from(ri))
                .collect()
        })
        .collect();
    CandidateSet::new(r.dimension(), rows).expect("box elements are positive")
}

/// Lifts each row `(w₁, …, w_d)` to a group element sending the support
/// points `(n₁, …, n_{d+1})` to `(0, w₁, w₁+w₂, …, w₁+…+w_d)`.
///
/// The support must consist of natural numbers — run
/// [`action::scale_to_naturals`] first. Every image is re-verified by
/// application before the element is accepted.
pub fn lift_to_group(w: &CandidateSet, support: &PointSet) -> Result<Vec<PLMap>, CofolnerError> {
    if support.len() != w.dimension() + 1 {
        return Err(CofolnerError::DimensionMismatch {
            dim: w.dimension(),
            support: support.len(),
        });
    }
    for p in support.points() {
        if p.as_integer().is_none() || p.is_negative() {
            return Err(CofolnerError::SupportNotNatural(p.to_string()));
        }
    }
    let mut lifted = Vec::with_capacity(w.len());
    for row in w.rows() {
        let mut dst = Vec::with_capacity(row.len() + 1);
        let mut acc = BigUint::zero();
        dst.push(Dyadic::zero());
        for v in row {
            acc += v;
            dst.push(Dyadic::from(BigInt::from(acc.clone())));
        }
        let dst = PointSet::new(dst)?;
        let g = transitivity_witness(support, &dst, Mode::FR)?;
        for (src, want) in support.points().iter().zip(dst.points()) {
            assert_eq!(&g.apply(src), want, "witness failed to map a support point");
        }
        lifted.push(g);
    }
    Ok(lifted)
}

/// `{T^k ∘ e : e ∈ E, 1 ≤ k ≤ N}` for the unit translation `T`, rows in
/// input order with `k` ascending.
pub fn shift_average(e: &[PLMap], n: u64) -> Vec<PLMap> {
    let t = translation(&Dyadic::one());
    let mut out = Vec::with_capacity(e.len() * n as usize);
    for g in e {
        let mut shifted = PLMap::compose(&t, g);
        for k in 1..=n {
            out.push(shifted.clone());
            if k < n {
                shifted = PLMap::compose(&t, &shifted);
            }
        }
    }
    out
}

/// Pipeline parameters recorded inside a certificate, sufficient to replay
/// the construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineInfo {
    /// Scaling exponent: the support was multiplied by `2^i_scale`.
    pub i_scale: u64,
    /// Box side used for the run that produced the certificate.
    #[serde(rename = "L")]
    pub l: u64,
    /// Number of shift translates.
    #[serde(rename = "N")]
    pub n: u64,
    /// Gap multipliers.
    pub r: Vec<u64>,
    /// Translation applied before scaling (nonzero only for supports with
    /// negative points).
    pub pre_translate: Dyadic,
}

/// Tunables for [`build_cofolner`].
#[derive(Debug, Clone)]
pub struct BuildParams {
    /// Box side `L`.
    pub side: u64,
    /// Shift count `N`; `None` derives `⌈4·max(A)·Σr / ε⌉` (for pairs) or
    /// `⌈4·span / ε⌉` (for single points) from the inputs.
    pub shifts: Option<u64>,
    /// Gap multipliers; `None` means all ones.
    pub multipliers: Option<Vec<u64>>,
    /// How many doubling steps `(L, N) → (2L, 2N)` to try after an
    /// unverified first attempt. Zero disables escalation.
    pub max_escalations: u32,
    pub semantics: Semantics,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            side: 8,
            shifts: None,
            multipliers: None,
            max_escalations: 5,
            semantics: Semantics::Multiset,
        }
    }
}

/// `⌈4 · bound · Σr / ε⌉` — the shift count that makes the alignment error
/// of matched translates small against the target.
fn derive_shifts(offset_bound: &BigUint, epsilon: &Ratio) -> Result<u64, CofolnerError> {
    let p = epsilon.numer().to_biguint().expect("positive target");
    let q = epsilon.denom().to_biguint().expect("positive denominator");
    let num = BigUint::from(4u32) * offset_bound * q;
    let n = num.div_ceil(&p).max(BigUint::one());
    n.to_u64().ok_or(CofolnerError::ShiftOverflow)
}

fn n_subsets(support: &PointSet, n: u8) -> Vec<PointSet> {
    let pts = support.points();
    match n {
        1 => pts.iter().map(|p| PointSet::singleton(p.clone())).collect(),
        2 => {
            let mut out = Vec::new();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    out.push(
                        PointSet::new(vec![pts[i].clone(), pts[j].clone()]).expect("distinct"),
                    );
                }
            }
            out
        }
        _ => unreachable!("subset size validated earlier"),
    }
}

/// Builds a co-Følner certificate for all `n`-subsets of `support`
/// (`n ∈ {1, 2}`) against the target `epsilon`.
///
/// The returned certificate's `F` lists the subsets of the *original*
/// support; the pipeline's translation and scaling are folded into the group
/// elements of `E`. The certificate is returned whether or not it verifies;
/// with escalation enabled, doubling stops at the first verified step or
/// once the budget is spent, and the best (lowest-achieved) attempt wins.
pub fn build_cofolner(
    support: &PointSet,
    n: u8,
    epsilon: &Ratio,
    params: &BuildParams,
) -> Result<CoFolnerCertificate, CofolnerError> {
    if !(n == 1 || n == 2) {
        return Err(CofolnerError::BadSubsetSize(n));
    }
    if support.len() < n as usize {
        return Err(CofolnerError::SupportTooSmall {
            support: support.len(),
            n,
        });
    }

    // Normalize: translate negative supports up to 0, then clear denominators.
    let pre_translate = if support.min_point().is_negative() {
        -support.min_point()
    } else {
        Dyadic::zero()
    };
    let t_pre = translation(&pre_translate);
    let shifted = action::act_set(&t_pre, support);
    let (i_scale, scaled) = action::scale_to_naturals(std::slice::from_ref(&shifted));
    let natural_support = scaled.into_iter().next().expect("one set in, one out");
    let prelude = PLMap::compose(&plgroup::scale_pow2_map(i_scale as i64), &t_pre);

    let r = match &params.multipliers {
        Some(r) => Multipliers::new(r.clone())?,
        None => Multipliers::ones(support.len().saturating_sub(1)),
    };
    if n == 2 && r.dimension() + 1 != support.len() {
        return Err(CofolnerError::DimensionMismatch {
            dim: r.dimension(),
            support: support.len(),
        });
    }

    let f = n_subsets(support, n);
    let mut side = params.side;
    let mut shifts: Option<u64> = params.shifts;
    let mut best: Option<CoFolnerCertificate> = None;

    for _ in 0..=params.max_escalations {
        let (e_base, box_max) = if n == 1 {
            (vec![prelude.clone()], None)
        } else {
            let a = build_box(&r.consecutive_sums(), side)?;
            let w = build_w(&r, &a);
            let lifted = lift_to_group(&w, &natural_support)?;
            let e = lifted.iter().map(|g| PLMap::compose(g, &prelude)).collect();
            (e, Some(a.max_element().clone()))
        };
        let n_cur = match shifts {
            Some(n) => n,
            None => {
                let bound = match &box_max {
                    Some(m) => m * BigUint::from(r.sum()),
                    None => {
                        let span = natural_support.max_point() - natural_support.min_point();
                        span.num().to_biguint().expect("sorted support")
                    }
                };
                derive_shifts(&bound, epsilon)?
            }
        };
        let e = shift_average(&e_base, n_cur);
        let mut cert = action::verify_cofolner(&e, &f, epsilon, params.semantics)?;
        cert.pipeline = Some(PipelineInfo {
            i_scale,
            l: side,
            n: n_cur,
            r: r.as_slice().to_vec(),
            pre_translate: pre_translate.clone(),
        });
        let better = best.as_ref().map_or(true, |b| cert.achieved < b.achieved);
        if better {
            best = Some(cert);
        }
        if best.as_ref().is_some_and(|b| b.verified) {
            break;
        }
        // Escalate: double the box side and the shift count.
        side = side.saturating_mul(2);
        shifts = Some(n_cur.saturating_mul(2));
    }
    Ok(best.expect("at least one attempt runs"))
}
