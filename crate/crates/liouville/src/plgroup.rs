//! Piecewise-linear homeomorphisms of the real line with power-of-two slopes
//! and dyadic breakpoints, together with finitely supported probability
//! measures on them.
//!
//! A [`PLMap`] is stored as an ordered list of anchor points `(x, y)` plus
//! two tail slope exponents: left of the first anchor the map is affine with
//! slope `2^left_exp`, right of the last anchor with slope `2^right_exp`, and
//! between consecutive anchors with the (power-of-two) slope determined by
//! the anchors themselves. Maps are kept canonical: every interior anchor is
//! a genuine slope change, and a globally affine map carries exactly one
//! anchor, placed at `x = 0`. Canonical form makes structural equality equal
//! to extensional equality, so `PLMap` derives `Eq` and `Hash`.
//!
//! This is the group F_ℝ of such homeomorphisms; the subgroup of elements
//! that are the identity outside `[0, 1]` is Thompson's group F.

use crate::action::PointSet;
use crate::dyadic::Dyadic;
use crate::ratio::Ratio;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlError {
    #[error("a piecewise-linear map needs at least one anchor")]
    NoAnchors,
    #[error("duplicate anchor x-coordinate `{0}`")]
    DuplicateX(String),
    #[error("anchor y-coordinates must be strictly increasing (at x = {0})")]
    NonMonotone(String),
    #[error("segment from x = {0} has a slope that is not a power of two")]
    BadSlope(String),
    #[error("point sets have different sizes ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("mode F requires points strictly inside (0, 1); got `{0}`")]
    OutOfUnitInterval(String),
    #[error("atom weight `{0}` is not positive")]
    BadWeight(String),
    #[error("atom weights sum to {0}, expected 1")]
    WeightSumNotOne(String),
    #[error("measure is not symmetric: no matching inverse atom for one of the atoms")]
    NotSymmetric,
}

/// An increasing piecewise-linear homeomorphism of ℝ in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPLMap", into = "RawPLMap")]
pub struct PLMap {
    anchors: Vec<(Dyadic, Dyadic)>,
    left_exp: i64,
    right_exp: i64,
}

/// Wire form of a map; validated through `make_pl` on deserialization.
#[derive(Serialize, Deserialize)]
struct RawPLMap {
    anchors: Vec<(Dyadic, Dyadic)>,
    left_exp: i64,
    right_exp: i64,
}

impl TryFrom<RawPLMap> for PLMap {
    type Error = PlError;
    fn try_from(raw: RawPLMap) -> Result<Self, Self::Error> {
        make_pl(raw.anchors, raw.left_exp, raw.right_exp)
    }
}

impl From<PLMap> for RawPLMap {
    fn from(m: PLMap) -> Self {
        RawPLMap {
            anchors: m.anchors,
            left_exp: m.left_exp,
            right_exp: m.right_exp,
        }
    }
}

/// Validates anchors (sorting them by x), checks that every segment slope is
/// a power of two, and canonicalizes: anchors that are not genuine slope
/// changes are dropped, and a globally affine map is re-anchored at `x = 0`.
pub fn make_pl(
    mut anchors: Vec<(Dyadic, Dyadic)>,
    left_exp: i64,
    right_exp: i64,
) -> Result<PLMap, PlError> {
    if anchors.is_empty() {
        return Err(PlError::NoAnchors);
    }
    anchors.sort_by(|a, b| a.0.cmp(&b.0));
    for w in anchors.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(PlError::DuplicateX(w[0].0.to_string()));
        }
        if w[0].1 >= w[1].1 {
            return Err(PlError::NonMonotone(w[0].0.to_string()));
        }
    }
    // Slope sequence: tail, interior segments, tail.
    let mut slopes = Vec::with_capacity(anchors.len() + 1);
    slopes.push(left_exp);
    for w in anchors.windows(2) {
        slopes
            .push(segment_exp(&w[0], &w[1]).ok_or_else(|| PlError::BadSlope(w[0].0.to_string()))?);
    }
    slopes.push(right_exp);
    // Keep only genuine slope changes.
    let kept: Vec<(Dyadic, Dyadic)> = anchors
        .iter()
        .enumerate()
        .filter(|(i, _)| slopes[*i] != slopes[i + 1])
        .map(|(_, a)| a.clone())
        .collect();
    if kept.is_empty() {
        // Globally affine: slope 2^left_exp everywhere, value fixed by any anchor.
        let (x0, y0) = &anchors[0];
        let at_zero = y0 - &x0.mul_pow2(left_exp);
        return Ok(PLMap {
            anchors: vec![(Dyadic::zero(), at_zero)],
            left_exp,
            right_exp,
        });
    }
    Ok(PLMap {
        anchors: kept,
        left_exp,
        right_exp,
    })
}

/// Slope exponent of the segment between two valid anchors, if the slope is
/// a power of two. Writing each difference as `odd · 2^e` (an integer
/// numerator can be even, so factors of two may hide in it), the quotient
/// `dy / dx` is a power of two exactly when the odd parts agree, and then its
/// exponent is the difference of the two `e`s.
fn segment_exp(a: &(Dyadic, Dyadic), b: &(Dyadic, Dyadic)) -> Option<i64> {
    let dx = &b.0 - &a.0;
    let dy = &b.1 - &a.1;
    let tx = dx.num().trailing_zeros().unwrap_or(0);
    let ty = dy.num().trailing_zeros().unwrap_or(0);
    if dy.num() >> ty != dx.num() >> tx {
        return None;
    }
    Some((ty as i64 - dy.exp() as i64) - (tx as i64 - dx.exp() as i64))
}

impl PLMap {
    pub fn anchors(&self) -> &[(Dyadic, Dyadic)] {
        &self.anchors
    }

    pub fn left_exp(&self) -> i64 {
        self.left_exp
    }

    pub fn right_exp(&self) -> i64 {
        self.right_exp
    }

    pub fn identity() -> PLMap {
        PLMap {
            anchors: vec![(Dyadic::zero(), Dyadic::zero())],
            left_exp: 0,
            right_exp: 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self == &PLMap::identity()
    }

    /// Slope exponent of the segment with index `i`, where segment 0 is the
    /// left tail and segment `anchors.len()` is the right tail.
    fn slope_exp(&self, i: usize) -> i64 {
        if i == 0 {
            self.left_exp
        } else if i == self.anchors.len() {
            self.right_exp
        } else {
            segment_exp(&self.anchors[i - 1], &self.anchors[i])
                .expect("canonical map has power-of-two slopes")
        }
    }

    /// Exact evaluation. On the segment containing `x` with base anchor
    /// `(x_i, y_i)` and slope `2^e`: `y_i + 2^e · (x − x_i)`.
    pub fn apply(&self, x: &Dyadic) -> Dyadic {
        let (base, seg) = match self.anchors.binary_search_by(|(ax, _)| ax.cmp(x)) {
            Ok(i) => return self.anchors[i].1.clone(),
            Err(0) => (&self.anchors[0], 0),
            Err(i) => (&self.anchors[i - 1], i),
        };
        let e = self.slope_exp(seg);
        &base.1 + &(x - &base.0).mul_pow2(e)
    }

    /// Exact evaluation of the inverse, by searching anchor y-coordinates.
    pub fn apply_inv(&self, y: &Dyadic) -> Dyadic {
        let (base, seg) = match self.anchors.binary_search_by(|(_, ay)| ay.cmp(y)) {
            Ok(i) => return self.anchors[i].0.clone(),
            Err(0) => (&self.anchors[0], 0),
            Err(i) => (&self.anchors[i - 1], i),
        };
        let e = self.slope_exp(seg);
        &base.0 + &(y - &base.1).mul_pow2(-e)
    }

    /// Group composition `g ∘ f` (apply `f` first).
    ///
    /// Breakpoints of the composite lie in `breakpoints(f) ∪ f⁻¹(breakpoints(g))`;
    /// evaluating `g(f(·))` at that candidate set and canonicalizing gives the
    /// exact composite.
    pub fn compose(g: &PLMap, f: &PLMap) -> PLMap {
        let mut xs: Vec<Dyadic> = f.anchors.iter().map(|(x, _)| x.clone()).collect();
        xs.extend(g.anchors.iter().map(|(x, _)| f.apply_inv(x)));
        xs.sort();
        xs.dedup();
        let anchors = xs
            .into_iter()
            .map(|x| {
                let y = g.apply(&f.apply(&x));
                (x, y)
            })
            .collect();
        make_pl(anchors, f.left_exp + g.left_exp, f.right_exp + g.right_exp)
            .expect("composite of valid maps is valid")
    }

    /// Group inverse: anchors swap coordinates, slope exponents negate.
    pub fn invert(&self) -> PLMap {
        let anchors = self
            .anchors
            .iter()
            .map(|(x, y)| (y.clone(), x.clone()))
            .collect();
        make_pl(anchors, -self.left_exp, -self.right_exp).expect("inverse of a valid map is valid")
    }

    /// Membership in Thompson's group F: identity outside `[0, 1]`.
    ///
    /// In canonical form this is exactly: both tails have slope one, every
    /// anchor lies in `[0, 1]`, and the map fixes 0 and 1.
    pub fn is_in_f(&self) -> bool {
        let zero = Dyadic::zero();
        let one = Dyadic::one();
        self.left_exp == 0
            && self.right_exp == 0
            && self.anchors.iter().all(|(x, _)| *x >= zero && *x <= one)
            && self.apply(&zero) == zero
            && self.apply(&one) == one
    }
}

/// The translation `x ↦ x + d`.
pub fn translation(d: &Dyadic) -> PLMap {
    PLMap {
        anchors: vec![(Dyadic::zero(), d.clone())],
        left_exp: 0,
        right_exp: 0,
    }
}

/// The scaling `x ↦ 2^i · x`.
pub fn scale_pow2_map(i: i64) -> PLMap {
    PLMap {
        anchors: vec![(Dyadic::zero(), Dyadic::zero())],
        left_exp: i,
        right_exp: i,
    }
}

/// Which group a transitivity witness should live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Thompson's group F: identity outside `[0, 1]`; points must lie
    /// strictly inside `(0, 1)`.
    F,
    /// The line group F_ℝ: tails are translations.
    FR,
}

/// A group element mapping the i-th point of `src` to the i-th point of
/// `dst`, built gap by gap.
///
/// Consecutive source gaps map onto the corresponding destination gaps by
/// splitting both intervals into pieces of power-of-two length (the binary
/// decomposition of each gap length), splitting the side with fewer pieces
/// until the counts agree, and mapping piece to piece affinely. In mode
/// [`Mode::FR`] the two tails are translations; in mode [`Mode::F`] the
/// frame `{0, 1}` is appended to both sides and the result is the identity
/// outside the unit interval.
pub fn transitivity_witness(src: &PointSet, dst: &PointSet, mode: Mode) -> Result<PLMap, PlError> {
    if src.len() != dst.len() {
        return Err(PlError::SizeMismatch {
            left: src.len(),
            right: dst.len(),
        });
    }
    let (s, d): (Vec<Dyadic>, Vec<Dyadic>) = match mode {
        Mode::FR => (src.points().to_vec(), dst.points().to_vec()),
        Mode::F => {
            let zero = Dyadic::zero();
            let one = Dyadic::one();
            for p in src.points().iter().chain(dst.points()) {
                if *p <= zero || *p >= one {
                    return Err(PlError::OutOfUnitInterval(p.to_string()));
                }
            }
            let frame = |pts: &[Dyadic]| {
                let mut v = Vec::with_capacity(pts.len() + 2);
                v.push(zero.clone());
                v.extend_from_slice(pts);
                v.push(one.clone());
                v
            };
            (frame(src.points()), frame(dst.points()))
        }
    };
    let mut anchors: Vec<(Dyadic, Dyadic)> = Vec::new();
    for i in 0..s.len() {
        anchors.push((s[i].clone(), d[i].clone()));
        if i + 1 < s.len() {
            anchors.extend(map_interval(&s[i], &s[i + 1], &d[i], &d[i + 1]));
        }
    }
    make_pl(anchors, 0, 0)
}

/// Interior anchors of a map `[a, b] → [c, d]` assembled from power-of-two
/// pieces. Endpoint anchors are the caller's responsibility.
fn map_interval(a: &Dyadic, b: &Dyadic, c: &Dyadic, d: &Dyadic) -> Vec<(Dyadic, Dyadic)> {
    let mut src_pieces = pow2_pieces(&(b - a));
    let mut dst_pieces = pow2_pieces(&(d - c));
    if src_pieces.len() < dst_pieces.len() {
        halve_largest(&mut src_pieces, dst_pieces.len());
    } else if dst_pieces.len() < src_pieces.len() {
        halve_largest(&mut dst_pieces, src_pieces.len());
    }
    let mut out = Vec::with_capacity(src_pieces.len().saturating_sub(1));
    let mut x = a.clone();
    let mut y = c.clone();
    for i in 0..src_pieces.len() - 1 {
        x = &x + &Dyadic::pow2(src_pieces[i]);
        y = &y + &Dyadic::pow2(dst_pieces[i]);
        out.push((x.clone(), y.clone()));
    }
    out
}

/// Binary decomposition of a positive dyadic length into piece exponents,
/// descending. `m/2^k` with `m = Σ 2^j` gives pieces `2^(j−k)`.
fn pow2_pieces(len: &Dyadic) -> Vec<i64> {
    debug_assert!(!len.is_zero() && !len.is_negative());
    let k = len.exp() as i64;
    let mag = len.num().magnitude();
    let mut exps: Vec<i64> = (0..mag.bits())
        .filter(|j| mag.bit(*j))
        .map(|j| j as i64 - k)
        .collect();
    exps.reverse();
    exps
}

/// Splits the largest piece in half repeatedly until the list reaches
/// `target` entries, keeping the list sorted descending.
fn halve_largest(pieces: &mut Vec<i64>, target: usize) {
    while pieces.len() < target {
        let t = pieces[0];
        pieces[0] = t - 1;
        // Insert the twin half after the existing run of equal entries so the
        // list stays descending.
        let pos = pieces.partition_point(|&p| p >= t - 1);
        pieces.insert(pos, t - 1);
    }
}

/// A finitely supported probability measure on the group, with exact
/// positive rational weights summing to one.
///
/// Non-degeneracy (the support generating the whole group) is the caller's
/// assertion; it is not checked here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbMeasure {
    atoms: Vec<(PLMap, Ratio)>,
}

impl ProbMeasure {
    pub fn new(atoms: Vec<(PLMap, Ratio)>) -> Result<Self, PlError> {
        let mut sum = Ratio::zero();
        for (_, w) in &atoms {
            if *w <= Ratio::zero() {
                return Err(PlError::BadWeight(w.to_string()));
            }
            sum = &sum + w;
        }
        if sum != Ratio::one() {
            return Err(PlError::WeightSumNotOne(sum.to_string()));
        }
        Ok(ProbMeasure { atoms })
    }

    /// Like [`ProbMeasure::new`], but additionally requires the measure to be
    /// symmetric: the atom list, viewed as a multiset of (element, weight)
    /// pairs, is closed under inversion.
    pub fn new_symmetric(atoms: Vec<(PLMap, Ratio)>) -> Result<Self, PlError> {
        let measure = Self::new(atoms)?;
        if !measure.is_symmetric() {
            return Err(PlError::NotSymmetric);
        }
        Ok(measure)
    }

    pub fn is_symmetric(&self) -> bool {
        let mut pool: Vec<(PLMap, Ratio)> = self.atoms.clone();
        for (g, w) in &self.atoms {
            let inv = g.invert();
            match pool.iter().position(|(h, v)| *h == inv && v == w) {
                Some(i) => {
                    pool.swap_remove(i);
                }
                None => return false,
            }
        }
        pool.is_empty()
    }

    pub fn atoms(&self) -> &[(PLMap, Ratio)] {
        &self.atoms
    }

    /// Total weight carried by atoms equal to `g`.
    pub fn weight_of(&self, g: &PLMap) -> Ratio {
        self.atoms
            .iter()
            .filter(|(h, _)| h == g)
            .fold(Ratio::zero(), |acc, (_, w)| &acc + w)
    }
}

/// The two standard generators of Thompson's group F.
///
/// `f_generator_a` is the map with breakpoints at 1/2 and 3/4; `f_generator_b`
/// is the identity on `[0, 1/2]` followed by a scaled copy of it.
pub fn f_generator_a() -> PLMap {
    let a = |s: &str| Dyadic::from_str(s).unwrap();
    make_pl(
        vec![
            (a("0"), a("0")),
            (a("1/2^1"), a("1/2^2")),
            (a("3/2^2"), a("1/2^1")),
            (a("1"), a("1")),
        ],
        0,
        0,
    )
    .unwrap()
}

pub fn f_generator_b() -> PLMap {
    let a = |s: &str| Dyadic::from_str(s).unwrap();
    make_pl(
        vec![
            (a("0"), a("0")),
            (a("1/2^1"), a("1/2^1")),
            (a("3/2^2"), a("5/2^3")),
            (a("7/2^3"), a("3/2^2")),
            (a("1"), a("1")),
        ],
        0,
        0,
    )
    .unwrap()
}
