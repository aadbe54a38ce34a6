//! Finite point sets under the group action, image multisets, and co-Følner
//! certificates.
//!
//! The central quantity is the symmetric-difference ratio
//! `|E·x Δ E·y| / |E|` for a finite family `E` of group elements and two
//! point sets `x, y` of equal size. Images are counted with multiplicity
//! (ℓ¹ counting over the list `E`); a set-semantics variant that first
//! dedupes the image families is available for comparison.

use crate::cofolner::PipelineInfo;
use crate::dyadic::Dyadic;
use crate::plgroup::PLMap;
use crate::ratio::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("point set must be non-empty")]
    Empty,
    #[error("duplicate point `{0}` in point set")]
    DuplicatePoint(String),
    #[error("point sets have different sizes ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("gap vector needs at least two points, got {0}")]
    TooSmall(usize),
}

/// A finite set of distinct dyadic points, kept sorted ascending.
///
/// Ordering is lexicographic on the sorted point list, so `PointSet` can key
/// ordered multisets deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointSet(Vec<Dyadic>);

impl PointSet {
    pub fn new(mut points: Vec<Dyadic>) -> Result<Self, ActionError> {
        if points.is_empty() {
            return Err(ActionError::Empty);
        }
        points.sort();
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(ActionError::DuplicatePoint(w[0].to_string()));
            }
        }
        Ok(PointSet(points))
    }

    pub fn singleton(p: Dyadic) -> Self {
        PointSet(vec![p])
    }

    /// Internal constructor for lists already known to be strictly increasing
    /// (e.g. images of a point set under a strictly increasing map).
    pub(crate) fn from_sorted(points: Vec<Dyadic>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(!points.is_empty());
        PointSet(points)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least one point
    }

    pub fn points(&self) -> &[Dyadic] {
        &self.0
    }

    pub fn min_point(&self) -> &Dyadic {
        &self.0[0]
    }

    pub fn max_point(&self) -> &Dyadic {
        self.0.last().expect("non-empty")
    }

    /// Compact text form: points joined by commas.
    pub fn to_text(&self) -> String {
        self.0
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let points = Vec::<Dyadic>::deserialize(deserializer)?;
        PointSet::new(points).map_err(serde::de::Error::custom)
    }
}

/// An ordered multiset: keys with positive counts and a cached total.
///
/// Backed by a `BTreeMap` so iteration order, equality, and serialization are
/// all deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiset<K: Ord> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for Multiset<K> {
    fn default() -> Self {
        Multiset {
            counts: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<K: Ord> Multiset<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: K) {
        self.insert_n(key, 1);
    }

    pub fn insert_n(&mut self, key: K, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += n;
        self.total += n;
    }

    pub fn count(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Total count including multiplicity.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct keys.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }

    /// Collapses every count to one.
    pub fn support(&self) -> Multiset<K>
    where
        K: Clone,
    {
        let counts: BTreeMap<K, u64> = self.counts.keys().map(|k| (k.clone(), 1)).collect();
        let total = counts.len() as u64;
        Multiset { counts, total }
    }

    /// Size of the multiset symmetric difference, `Σ_z |count₁(z) − count₂(z)|`,
    /// by a sorted merge walk.
    pub fn sym_diff_size(&self, other: &Multiset<K>) -> u64 {
        let mut a = self.counts.iter().peekable();
        let mut b = other.counts.iter().peekable();
        let mut sum = 0u64;
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return sum,
                (Some(_), None) => sum += a.next().unwrap().1,
                (None, Some(_)) => sum += b.next().unwrap().1,
                (Some((ka, ca)), Some((kb, cb))) => match ka.cmp(kb) {
                    std::cmp::Ordering::Less => {
                        sum += **ca;
                        a.next();
                    }
                    std::cmp::Ordering::Greater => {
                        sum += **cb;
                        b.next();
                    }
                    std::cmp::Ordering::Equal => {
                        sum += ca.abs_diff(**cb);
                        a.next();
                        b.next();
                    }
                },
            }
        }
    }

    /// Key-wise minimum of counts across all given multisets.
    /// Panics if `sets` is empty (the intersection of nothing is undefined).
    pub fn intersect_many(sets: &[&Multiset<K>]) -> Multiset<K>
    where
        K: Clone,
    {
        assert!(
            !sets.is_empty(),
            "intersection of an empty list of multisets"
        );
        let mut out = Multiset::new();
        'keys: for (key, &c0) in &sets[0].counts {
            let mut m = c0;
            for s in &sets[1..] {
                m = m.min(s.count(key));
                if m == 0 {
                    continue 'keys;
                }
            }
            out.insert_n(key.clone(), m);
        }
        out
    }
}

impl<K: Ord> FromIterator<K> for Multiset<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for k in iter {
            m.insert(k);
        }
        m
    }
}

/// How image families are counted when comparing `E·x` and `E·y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// ℓ¹ counting with multiplicity over the list `E` (the default).
    #[default]
    Multiset,
    /// Image families deduplicated before comparison; the denominator stays
    /// `|E|`. Offered for comparison only.
    Set,
}

/// Image of a point set under one group element. Strict monotonicity of the
/// map means the image is again a strictly increasing point list.
pub fn act_set(g: &PLMap, x: &PointSet) -> PointSet {
    PointSet::from_sorted(x.points().iter().map(|p| g.apply(p)).collect())
}

/// Differences between consecutive points.
pub fn gap_vector(x: &PointSet) -> Result<Vec<Dyadic>, ActionError> {
    if x.len() < 2 {
        return Err(ActionError::TooSmall(x.len()));
    }
    Ok(x.points().windows(2).map(|w| &w[1] - &w[0]).collect())
}

/// The multiset `E·x = {e·x : e ∈ E}` counted with multiplicity.
pub fn multiset_image(e: &[PLMap], x: &PointSet) -> Multiset<PointSet> {
    e.iter().map(|g| act_set(g, x)).collect()
}

/// `|E·x Δ E·y| / |E|` under the chosen semantics.
///
/// The result lies in `[0, 2]`: disjoint image families give 2, identical
/// ones give 0.
pub fn sym_diff_ratio_with(
    e: &[PLMap],
    x: &PointSet,
    y: &PointSet,
    semantics: Semantics,
) -> Result<Ratio, ActionError> {
    if x.len() != y.len() {
        return Err(ActionError::SizeMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    assert!(!e.is_empty(), "sym_diff_ratio over an empty element family");
    let (ex, ey) = rayon::join(|| multiset_image(e, x), || multiset_image(e, y));
    let diff = match semantics {
        Semantics::Multiset => ex.sym_diff_size(&ey),
        Semantics::Set => ex.support().sym_diff_size(&ey.support()),
    };
    Ok(Ratio::new(diff, e.len() as u64))
}

/// `|E·x Δ E·y| / |E|` with multiset counting.
pub fn sym_diff_ratio(e: &[PLMap], x: &PointSet, y: &PointSet) -> Result<Ratio, ActionError> {
    sym_diff_ratio_with(e, x, y, Semantics::Multiset)
}

/// A verified (or failed) co-Følner condition over a family of point sets:
/// every unordered pair `x, y ∈ F` satisfies `|E·x Δ E·y| ≤ achieved·|E|`,
/// and `verified` records whether `achieved ≤ epsilon_target`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoFolnerCertificate {
    #[serde(rename = "E")]
    pub e: Vec<PLMap>,
    #[serde(rename = "F")]
    pub f: Vec<PointSet>,
    #[serde(rename = "epsilon")]
    pub epsilon_target: Ratio,
    pub achieved: Ratio,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineInfo>,
}

impl CoFolnerCertificate {
    /// Recomputes the achieved ratio from `E` and `F` alone.
    pub fn recompute_achieved(&self, semantics: Semantics) -> Result<Ratio, ActionError> {
        achieved_ratio(&self.e, &self.f, semantics)
    }
}

fn achieved_ratio(e: &[PLMap], f: &[PointSet], semantics: Semantics) -> Result<Ratio, ActionError> {
    for w in f.windows(2) {
        if w[0].len() != w[1].len() {
            return Err(ActionError::SizeMismatch {
                left: w[0].len(),
                right: w[1].len(),
            });
        }
    }
    // Compute each image multiset once, then take the exact max over pairs.
    // Both stages are associative-commutative reductions, so the result is
    // independent of how rayon splits the work.
    let images: Vec<Multiset<PointSet>> = f.par_iter().map(|x| multiset_image(e, x)).collect();
    let pairs: Vec<(usize, usize)> = (0..f.len())
        .flat_map(|i| (i + 1..f.len()).map(move |j| (i, j)))
        .collect();
    let max = pairs
        .par_iter()
        .map(|&(i, j)| {
            let diff = match semantics {
                Semantics::Multiset => images[i].sym_diff_size(&images[j]),
                Semantics::Set => images[i].support().sym_diff_size(&images[j].support()),
            };
            Ratio::new(diff, e.len() as u64)
        })
        .max()
        .unwrap_or_else(Ratio::zero);
    Ok(max)
}

/// Checks the co-Følner condition for `E` against every unordered pair of
/// point sets in `F` and packages the outcome as a certificate.
///
/// All members of `F` must have equal cardinality; `E` must be non-empty.
pub fn verify_cofolner(
    e: &[PLMap],
    f: &[PointSet],
    epsilon: &Ratio,
    semantics: Semantics,
) -> Result<CoFolnerCertificate, ActionError> {
    assert!(
        !e.is_empty(),
        "verify_cofolner over an empty element family"
    );
    let achieved = achieved_ratio(e, f, semantics)?;
    let verified = achieved <= *epsilon;
    Ok(CoFolnerCertificate {
        e: e.to_vec(),
        f: f.to_vec(),
        epsilon_target: epsilon.clone(),
        achieved,
        verified,
        pipeline: None,
    })
}

/// Smallest `i ≥ 0` with `2^i · p` a natural number for every point `p` of
/// every set, together with the scaled sets. Points must be non-negative.
///
/// Because every point is canonical, `i` is just the largest denominator
/// exponent present.
pub fn scale_to_naturals(f: &[PointSet]) -> (u64, Vec<PointSet>) {
    assert!(
        f.iter().all(|x| !x.min_point().is_negative()),
        "scale_to_naturals expects non-negative points (translate first)"
    );
    let i = f
        .iter()
        .flat_map(|x| x.points().iter().map(|p| p.exp()))
        .max()
        .unwrap_or(0);
    let scaled = f
        .iter()
        .map(|x| PointSet::from_sorted(x.points().iter().map(|p| p.mul_pow2(i as i64)).collect()))
        .collect();
    (i, scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plgroup::{translation, PLMap};

    fn pts(v: &[i64]) -> PointSet {
        PointSet::new(v.iter().map(|&n| Dyadic::from(n)).collect()).unwrap()
    }

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn point_set_sorts_and_rejects_duplicates() {
        let p = PointSet::new(vec![dy("1"), dy("0"), dy("1/2^1")]).unwrap();
        assert_eq!(p.to_text(), "0,1/2^1,1");
        assert_eq!(
            PointSet::new(vec![dy("1"), dy("2/2^1")]),
            Err(ActionError::DuplicatePoint("1".to_string()))
        );
        assert_eq!(PointSet::new(vec![]), Err(ActionError::Empty));
    }

    #[test]
    fn gap_vector_examples() {
        assert_eq!(
            gap_vector(&pts(&[0, 1, 3])).unwrap(),
            vec![Dyadic::from(1), Dyadic::from(2)]
        );
        let halves = PointSet::new(vec![dy("1/2^1"), dy("3/2^2")]).unwrap();
        assert_eq!(gap_vector(&halves).unwrap(), vec![dy("1/2^2")]);
        assert_eq!(gap_vector(&pts(&[5])), Err(ActionError::TooSmall(1)));
    }

    #[test]
    fn multiset_counts_and_sym_diff() {
        let a: Multiset<i64> = [1, 1, 2, 3].into_iter().collect();
        let b: Multiset<i64> = [1, 2, 2, 4].into_iter().collect();
        assert_eq!(a.total(), 4);
        assert_eq!(a.distinct(), 3);
        assert_eq!(a.count(&1), 2);
        assert_eq!(a.sym_diff_size(&b), 4); // |1|:1, |2|:1, |3|:1, |4|:1
        assert_eq!(a.sym_diff_size(&a), 0);
        let inter = Multiset::intersect_many(&[&a, &b]);
        assert_eq!(inter.total(), 2); // one 1, one 2
        assert_eq!(inter.count(&1), 1);
        assert_eq!(inter.count(&2), 1);
    }

    #[test]
    fn translates_shift_point_sets() {
        let t = translation(&Dyadic::one());
        assert_eq!(act_set(&t, &pts(&[0, 2])), pts(&[1, 3]));
    }

    #[test]
    fn two_translate_family_has_ratio_one() {
        // E = {T, T^2} acting on x = {0}, y = {1}: images {1},{2} vs {2},{3}
        // overlap in exactly one element out of two.
        let t = translation(&Dyadic::one());
        let e = vec![t.clone(), PLMap::compose(&t, &t)];
        let r = sym_diff_ratio(&e, &pts(&[0]), &pts(&[1])).unwrap();
        assert_eq!(r, Ratio::new(1, 1));
    }

    #[test]
    fn translate_interval_family_ratio_shrinks() {
        // E = {T, ..., T^N}: |E·{0} Δ E·{1}| = 2, ratio 2/N.
        for n in [4u64, 10, 100] {
            let t = translation(&Dyadic::one());
            let mut e = Vec::new();
            let mut cur = t.clone();
            for _ in 0..n {
                e.push(cur.clone());
                cur = PLMap::compose(&t, &cur);
            }
            let r = sym_diff_ratio(&e, &pts(&[0]), &pts(&[1])).unwrap();
            assert_eq!(r, Ratio::new(2, n));
        }
    }

    #[test]
    fn set_semantics_collapses_multiplicity() {
        let t = translation(&Dyadic::one());
        // E = {T, T} — multiset counting sees two copies, set counting one.
        let e = vec![t.clone(), t.clone()];
        let x = pts(&[0]);
        let y = pts(&[1]);
        assert_eq!(
            sym_diff_ratio_with(&e, &x, &y, Semantics::Multiset).unwrap(),
            Ratio::new(4, 2)
        );
        assert_eq!(
            sym_diff_ratio_with(&e, &x, &y, Semantics::Set).unwrap(),
            Ratio::new(2, 2)
        );
    }

    #[test]
    fn sym_diff_requires_equal_sizes() {
        let t = translation(&Dyadic::one());
        let e = vec![t];
        assert_eq!(
            sym_diff_ratio(&e, &pts(&[0]), &pts(&[0, 1])),
            Err(ActionError::SizeMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn verify_packages_max_pair_ratio() {
        let t = translation(&Dyadic::one());
        let mut e = Vec::new();
        let mut cur = t.clone();
        for _ in 0..10 {
            e.push(cur.clone());
            cur = PLMap::compose(&t, &cur);
        }
        let f = vec![pts(&[0]), pts(&[1]), pts(&[3])];
        let eps = Ratio::new(3, 5);
        let cert = verify_cofolner(&e, &f, &eps, Semantics::Multiset).unwrap();
        assert_eq!(cert.achieved, Ratio::new(6, 10)); // pair {0},{3}
        assert!(cert.verified);
        assert_eq!(
            cert.recompute_achieved(Semantics::Multiset).unwrap(),
            cert.achieved
        );
        let tight = verify_cofolner(&e, &f, &Ratio::new(1, 2), Semantics::Multiset).unwrap();
        assert!(!tight.verified);
    }

    #[test]
    fn scale_to_naturals_examples() {
        let f = vec![PointSet::new(vec![dy("1/2^1"), dy("3/2^2")]).unwrap()];
        let (i, scaled) = scale_to_naturals(&f);
        assert_eq!(i, 2);
        assert_eq!(scaled[0], pts(&[2, 3]));
        let g = vec![PointSet::new(vec![dy("0"), dy("5/2^3")]).unwrap()];
        let (j, scaled) = scale_to_naturals(&g);
        assert_eq!(j, 3);
        assert_eq!(scaled[0], pts(&[0, 5]));
    }

    #[test]
    fn scale_to_naturals_integer_input_is_identity() {
        let f = vec![pts(&[0, 5])];
        let (i, scaled) = scale_to_naturals(&f);
        assert_eq!(i, 0);
        assert_eq!(scaled[0], pts(&[0, 5]));
    }
}
