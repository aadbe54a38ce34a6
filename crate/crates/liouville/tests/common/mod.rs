//! Shared helpers for the integration suites: seeded random generation of
//! group elements and point sets, and a separately coded naive evaluator for
//! the combinatorial objectives, used as an independent oracle.

#![allow(dead_code)] // each test binary uses its own subset

use liouville::dyadic::Dyadic;
use liouville::plgroup::{make_pl, PLMap};
use liouville::ratio::Ratio;
use liouville::PointSet;
use rand::Rng;
use std::collections::BTreeSet;

/// Random dyadic with numerator in `-num_bound..=num_bound` and denominator
/// exponent in `0..=max_exp`.
pub fn rand_dyadic(rng: &mut impl Rng, num_bound: i64, max_exp: u64) -> Dyadic {
    Dyadic::new(
        rng.gen_range(-num_bound..=num_bound),
        rng.gen_range(0..=max_exp),
    )
}

/// Random valid piecewise-linear map: a strictly increasing anchor chain
/// whose consecutive slopes are powers of two, plus random tail slopes.
/// Coordinates stay far below the `|num| ≤ 2^64`, `exp ≤ 32` envelope.
pub fn rand_plmap(rng: &mut impl Rng) -> PLMap {
    let n_anchors = rng.gen_range(1..=12);
    let mut x = rand_dyadic(rng, 1 << 20, 8);
    let mut y = rand_dyadic(rng, 1 << 20, 8);
    let mut anchors = vec![(x.clone(), y.clone())];
    for _ in 1..n_anchors {
        let dx = Dyadic::new(rng.gen_range(1..=1024i64), rng.gen_range(0..=6u64));
        let e: i64 = rng.gen_range(-6..=6);
        x = &x + &dx;
        y = &y + &dx.mul_pow2(e);
        anchors.push((x.clone(), y.clone()));
    }
    make_pl(anchors, rng.gen_range(-6..=6), rng.gen_range(-6..=6))
        .expect("anchor chain was built with power-of-two slopes")
}

/// Random set of `size` distinct dyadics.
pub fn rand_point_set(rng: &mut impl Rng, size: usize, num_bound: i64, max_exp: u64) -> PointSet {
    let mut set = BTreeSet::new();
    while set.len() < size {
        set.insert(rand_dyadic(rng, num_bound, max_exp));
    }
    PointSet::new(set.into_iter().collect()).expect("distinct points")
}

/// Random set of `size` distinct dyadics strictly inside the unit interval.
pub fn rand_unit_point_set(rng: &mut impl Rng, size: usize) -> PointSet {
    let mut set = BTreeSet::new();
    while set.len() < size {
        let e = rng.gen_range(4..=10u64);
        let num = rng.gen_range(1..(1i64 << e));
        set.insert(Dyadic::new(num, e));
    }
    PointSet::new(set.into_iter().collect()).expect("distinct points")
}

/// Naive multiset intersection size over plain key lists: for each distinct
/// key of the first list, take the minimum count across all lists. Written
/// with linear scans on purpose — no shared code with the library.
pub fn naive_intersect_size<K: PartialEq>(terms: &[Vec<K>]) -> u64 {
    let mut total = 0u64;
    let first = &terms[0];
    for (idx, key) in first.iter().enumerate() {
        if first[..idx].contains(key) {
            continue; // count each distinct key once
        }
        let min = terms
            .iter()
            .map(|t| t.iter().filter(|k| *k == key).count() as u64)
            .min()
            .expect("at least one term");
        total += min;
    }
    total
}

/// `row[i] + … + row[j]` with 1-based inclusive indices.
fn psum(row: &[u64], i: usize, j: usize) -> u64 {
    row[i - 1..=j - 1].iter().sum()
}

/// Naive pair objective on 3-column rows: intersection of the four pair
/// multisets `(p1,p2)`, `(p2,p3)`, `(p1+p2,p3)`, `(p1,p2+p3)` over `|V|`.
pub fn naive_pair3(rows: &[Vec<u64>]) -> Ratio {
    let pairs = |f: &dyn Fn(&[u64]) -> (u64, u64)| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
    let terms = [
        pairs(&|r| (r[0], r[1])),
        pairs(&|r| (r[1], r[2])),
        pairs(&|r| (r[0] + r[1], r[2])),
        pairs(&|r| (r[0], r[1] + r[2])),
    ];
    Ratio::new(naive_intersect_size(&terms), rows.len() as u64)
}

/// Naive general-order objective on `n`-column rows: one pair multiset
/// `(p_i+…+p_k, p_{k+1}+…+p_m)` for every `1 ≤ i ≤ k < m ≤ n`.
pub fn naive_general(n: usize, rows: &[Vec<u64>]) -> Ratio {
    let mut terms: Vec<Vec<(u64, u64)>> = Vec::new();
    for k in 1..=n {
        for i in 1..=k {
            for m in k + 1..=n {
                terms.push(
                    rows.iter()
                        .map(|r| (psum(r, i, k), psum(r, k + 1, m)))
                        .collect(),
                );
            }
        }
    }
    Ratio::new(naive_intersect_size(&terms), rows.len() as u64)
}

/// Naive chain objective on `d`-column rows: one single-value multiset
/// `p_i+…+p_j` for every `1 ≤ i ≤ j ≤ d`.
pub fn naive_chain(rows: &[Vec<u64>]) -> Ratio {
    let d = rows[0].len();
    let mut terms: Vec<Vec<u64>> = Vec::new();
    for i in 1..=d {
        for j in i..=d {
            terms.push(rows.iter().map(|r| psum(r, i, j)).collect());
        }
    }
    Ratio::new(naive_intersect_size(&terms), rows.len() as u64)
}

/// Naive sequence objective: sliding windows `(a_i, a_{i+1})`,
/// `(a_j+a_{j+1}, a_{j+2})`, `(a_k, a_{k+1}+a_{k+2})` over the length.
pub fn naive_sequence(a: &[u64]) -> Ratio {
    let n = a.len();
    let s1: Vec<(u64, u64)> = (0..n - 1).map(|i| (a[i], a[i + 1])).collect();
    let s2: Vec<(u64, u64)> = (0..n - 2).map(|j| (a[j] + a[j + 1], a[j + 2])).collect();
    let s3: Vec<(u64, u64)> = (0..n - 2).map(|k| (a[k], a[k + 1] + a[k + 2])).collect();
    Ratio::new(naive_intersect_size(&[s1, s2, s3]), n as u64)
}
