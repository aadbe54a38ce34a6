//! Strong transitivity made concrete: build a group element carrying one
//! finite set of dyadic points onto another, either on the whole line (with
//! translation tails) or inside the unit interval (identity outside [0, 1]).
//!
//! Run with: `cargo run --example build_witness`

use liouville::action::act_set;
use liouville::plgroup::{transitivity_witness, Mode};
use liouville::{Dyadic, PLMap, PointSet};

fn points(v: &[&str]) -> PointSet {
    PointSet::new(
        v.iter()
            .map(|s| s.parse::<Dyadic>().expect("dyadic literal"))
            .collect(),
    )
    .expect("distinct points")
}

fn show(map: &PLMap, name: &str) {
    println!("{name}:");
    println!(
        "  anchors (x -> y): {:?}",
        map.anchors()
            .iter()
            .map(|(x, y)| format!("{x} -> {y}"))
            .collect::<Vec<_>>()
    );
    println!(
        "  tail slopes: 2^{} on the left, 2^{} on the right",
        map.left_exp(),
        map.right_exp()
    );
}

fn main() {
    // On the line: carry {0, 3, 7/2} onto {-1, 1/4, 12}. Between matched
    // points, each source gap is cut into power-of-two pieces matched to a
    // power-of-two decomposition of the destination gap.
    let src = points(&["0", "3", "7/2^1"]);
    let dst = points(&["-1", "1/2^2", "12"]);
    let w = transitivity_witness(&src, &dst, Mode::FR).expect("equal sizes");
    show(&w, "line witness");
    println!(
        "  image of {{{}}}: {{{}}}",
        src.to_text(),
        act_set(&w, &src).to_text()
    );
    let far_left: Dyadic = "-100".parse().expect("dyadic literal");
    println!(
        "  far left maps x -> x + {}",
        &w.apply(&far_left) - &far_left
    );
    println!();

    // Inside the unit interval: the witness is an element of Thompson's
    // group F — it fixes everything outside [0, 1].
    let src = points(&["1/2^2", "1/2^1"]);
    let dst = points(&["1/2^3", "7/2^3"]);
    let f = transitivity_witness(&src, &dst, Mode::F).expect("interior points");
    show(&f, "unit-interval witness");
    println!("  is in F: {}", f.is_in_f());
    println!(
        "  image of {{{}}}: {{{}}}",
        src.to_text(),
        act_set(&f, &src).to_text()
    );
    println!();

    // Witnesses compose and invert exactly like any group element.
    let round_trip = PLMap::compose(&f.invert(), &f);
    println!(
        "inverse ∘ witness is the identity: {}",
        round_trip.is_identity()
    );
}
