//! Regenerates the JSON run configurations under fixtures/ from the built-in
//! representation constructors. Run from the workspace root:
//!
//!     cargo run -p manhattan-cli --example gen_fixtures

use std::fs;
use std::path::Path;

use manhattan_core::fixtures;
use manhattan_core::moebius::Isometry;
use manhattan_core::schottky::{GenKind, SchottkyRep};

fn matrix(m: &Isometry) -> serde_json::Value {
    serde_json::json!([m.m11, m.m12, m.m21, m.m22])
}

fn rep(r: &SchottkyRep) -> serde_json::Value {
    let generators: Vec<_> = r
        .generators()
        .iter()
        .map(|g| {
            serde_json::json!({
                "label": g.label,
                "kind": match g.kind { GenKind::Hyperbolic => "hyperbolic", GenKind::Parabolic => "parabolic" },
                "matrix": matrix(&g.matrix),
            })
        })
        .collect();
    serde_json::json!({
        "generators": generators,
        "basepoint": [r.basepoint().re, r.basepoint().im],
    })
}

fn pair_config(rho1: &SchottkyRep, rho2: &SchottkyRep) -> serde_json::Value {
    serde_json::json!({
        "pair": { "rho1": rep(rho1), "rho2": rep(rho2) },
    })
}

fn main() {
    let dir = Path::new("fixtures");
    fs::create_dir_all(dir).unwrap();

    let f1 = fixtures::f1();
    let f2 = fixtures::f2();
    let f3 = fixtures::f3();
    let f4 = fixtures::f4();
    let f4c = f4.conjugate(&fixtures::conjugator()).unwrap();

    let write = |name: &str, v: serde_json::Value| {
        fs::write(dir.join(name), format!("{v:#}\n")).unwrap();
        println!("wrote fixtures/{name}");
    };

    write("conjugate_pair.json", pair_config(&f1, &f2));
    write("perturbed_pair.json", pair_config(&f1, &f3));
    write("classical_pair.json", pair_config(&f4, &f4c));

    // a pair that parses and constructs but violates (C3): explicit arcs
    // copied from f4 with the first arc widened until it overlaps a
    // neighbor; with_arcs accepts it, verify_conditions must flag it
    let mut arcs: Vec<serde_json::Value> = Vec::new();
    for (&(idx, inverse), arc) in f4.arcs() {
        let (lo, hi) = arc.endpoints();
        let widen = if idx == 0 && !inverse { 2.0 } else { 0.0 };
        arcs.push(serde_json::json!({
            "label": f4.generators()[idx].label,
            "inverse": inverse,
            "start": lo - widen,
            "end": hi + widen,
        }));
    }
    let mut bad = pair_config(&f4, &f4);
    bad["pair"]["rho1"]["arcs"] = serde_json::Value::Array(arcs.clone());
    bad["pair"]["rho2"]["arcs"] = serde_json::Value::Array(arcs);
    write("overlapping_arcs.json", bad);
}
