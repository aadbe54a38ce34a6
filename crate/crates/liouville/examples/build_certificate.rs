//! Build co-Følner certificates end to end: the singleton case with its
//! closed-form ratio, and the pair case with automatic parameter choice and
//! escalation. Certificates serialize to JSON and re-verify from their own
//! contents alone.
//!
//! Run with: `cargo run --example build_certificate`

use liouville::action::verify_cofolner;
use liouville::cofolner::{build_cofolner, BuildParams};
use liouville::{Dyadic, PointSet, Ratio, Semantics};

fn ints(v: &[i64]) -> PointSet {
    PointSet::new(v.iter().map(|&n| Dyadic::from(n)).collect()).expect("distinct")
}

fn main() {
    // Singletons: E = {T, T², …, T^N} alone works, and the achieved ratio
    // has the closed form 2·(max pair distance)/N.
    let singles = BuildParams {
        shifts: Some(100),
        max_escalations: 0,
        ..BuildParams::default()
    };
    let cert =
        build_cofolner(&ints(&[0, 1]), 1, &Ratio::new(1, 10), &singles).expect("pipeline runs");
    println!(
        "singletons of {{0,1}}, N = 100: achieved {} (target {}), verified = {}",
        cert.achieved, cert.epsilon_target, cert.verified
    );

    // Pairs: the full pipeline (box, candidate rows, lifting, shift
    // averaging) with everything derived from the target. Escalation doubles
    // (L, N) if the first attempt misses.
    let cert = build_cofolner(
        &ints(&[0, 1, 2]),
        2,
        &Ratio::new(3, 10),
        &BuildParams::default(),
    )
    .expect("pipeline runs");
    let info = cert
        .pipeline
        .as_ref()
        .expect("pipeline parameters are recorded");
    println!(
        "pairs of {{0,1,2}}: L = {}, N = {}, |E| = {}, covering {} pairs",
        info.l,
        info.n,
        cert.e.len(),
        cert.f.len()
    );
    println!(
        "achieved {} ≈ {:.4} against target {}: verified = {}",
        cert.achieved,
        cert.achieved.to_f64(),
        cert.epsilon_target,
        cert.verified
    );

    // The certificate carries everything needed for independent re-checking.
    let again = verify_cofolner(&cert.e, &cert.f, &cert.epsilon_target, Semantics::Multiset)
        .expect("well-formed certificate");
    println!(
        "independent re-verification: achieved {}, verified = {}",
        again.achieved, again.verified
    );

    let json = serde_json::to_string(&cert).expect("serializes");
    println!("serialized certificate: {} bytes of JSON", json.len());
    let back: liouville::CoFolnerCertificate = serde_json::from_str(&json).expect("round-trips");
    println!(
        "round-trip keeps the exact ratio: {}",
        back.achieved == cert.achieved && back.verified == cert.verified
    );

    // A dyadic support works the same way: points are scaled to naturals
    // internally and the scaling is folded into the group elements.
    let support = PointSet::new(vec![
        Dyadic::new(-1, 1), // -1/2
        Dyadic::new(3, 2),  // 3/4
        Dyadic::from(2),
    ])
    .expect("distinct");
    let cert = build_cofolner(&support, 2, &Ratio::new(1, 2), &BuildParams::default())
        .expect("pipeline runs");
    println!(
        "pairs of {{{}}}: achieved {} ≈ {:.4}, verified = {}",
        support.to_text(),
        cert.achieved,
        cert.achieved.to_f64(),
        cert.verified
    );
}
