//! Exact-arithmetic tools for piecewise-linear groups acting on the dyadic
//! rationals, built around the Liouville property for strongly transitive
//! actions.
//!
//! Everything here is integer-exact: points are dyadic rationals backed by
//! arbitrary-precision numerators, group elements are piecewise-linear
//! homeomorphisms with power-of-two slopes and dyadic breakpoints (Thompson's
//! groups F and F_ℝ live here), and every ratio that ends up in an artifact is
//! a reduced fraction of big integers. No floating point touches a result.
//!
//! The crate splits into:
//!
//! - [`dyadic`]: canonical dyadic rationals `m / 2^k`.
//! - [`plgroup`]: piecewise-linear maps, group operations, strong-transitivity
//!   witnesses, and finitely supported probability measures.
//! - [`action`]: finite point sets, multisets of images, symmetric-difference
//!   ratios, and co-Følner certificates.
//! - [`cofolner`]: the certificate pipeline — multiplicative boxes, candidate
//!   sets, lifting to group elements, shift averaging, auto-escalation.
//! - [`combsearch`]: additive-combinatorics objectives (pair, general-order,
//!   chain, sequence) with exhaustive and annealed search.
//! - [`walks`]: exact transition probabilities, harmonicity residuals, and
//!   seeded random-walk simulation with exact empirical total variation.
//! - [`cli`]: the command-line front end used by the `liouville` binary.
//!
//! The `examples/` directory is the guided tour; each example is a runnable
//! walkthrough of one capability.

pub mod action;
pub mod cli;
pub mod cofolner;
pub mod combsearch;
pub mod dyadic;
pub mod plgroup;
pub mod ratio;
pub mod walks;

pub use action::{CoFolnerCertificate, Multiset, PointSet, Semantics};
pub use dyadic::Dyadic;
pub use plgroup::{PLMap, ProbMeasure};
pub use ratio::Ratio;
