//! Built-in representation fixtures. All matrices are constructed from axis
//! data (not copied from anywhere) and condition-verified by the test suite.
//!
//! f1: two hyperbolic + one parabolic generator, the extended reference rep.
//! f2: f1 conjugated by a fixed Mobius map (same marked length spectrum).
//! f3: f1 with the first hyperbolic generator's translation length scaled
//!     by 1.1 (a genuinely different point in Teichmuller space).
//! f4: classical Schottky rep on three hyperbolic generators (no cusp).

use crate::moebius::{Isometry, PlanePoint};
use crate::schottky::{GenKind, GeneratorSpec, RepPair, SchottkyRep};

/// Hyperbolic element with attracting fixed point `p`, repelling `q`, and
/// translation length `l`: S diag(e^{l/2}, e^{-l/2}) S^{-1} with S: 0 -> q,
/// inf -> p.
pub fn hyperbolic_axis(p: f64, q: f64, l: f64) -> Isometry {
    let lam = (l / 2.0).exp();
    let d = p - q;
    Isometry::new(
        (lam * p - q / lam) / d,
        p * q * (1.0 / lam - lam) / d,
        (lam - 1.0 / lam) / d,
        (p / lam - lam * q) / d,
    )
    .expect("axis endpoints distinct")
}

/// Parabolic element fixing the real point `x`: I + mu * N with N nilpotent.
pub fn parabolic_fix(x: f64, mu: f64) -> Isometry {
    Isometry::new(1.0 + mu * x, -mu * x * x, mu, 1.0 - mu * x).expect("parabolic is unimodular")
}

fn spec(label: &str, kind: GenKind, matrix: Isometry) -> GeneratorSpec {
    GeneratorSpec {
        label: label.to_string(),
        kind,
        matrix,
    }
}

const H1: (f64, f64, f64) = (-3.2, -1.1, 2.4);
const H2: (f64, f64, f64) = (3.2, 1.1, 2.6);
const P1_MU: f64 = 8.0;

/// Extended reference rep: hyperbolic h1, h2 and parabolic p1 fixing 0.
pub fn f1() -> SchottkyRep {
    SchottkyRep::auto_arcs(
        vec![
            spec("h1", GenKind::Hyperbolic, hyperbolic_axis(H1.0, H1.1, H1.2)),
            spec("h2", GenKind::Hyperbolic, hyperbolic_axis(H2.0, H2.1, H2.2)),
            spec("p1", GenKind::Parabolic, parabolic_fix(0.0, P1_MU)),
        ],
        PlanePoint::base(),
    )
    .expect("reference fixture is in ping-pong position")
}

/// Fixed conjugating element used to build f2.
pub fn conjugator() -> Isometry {
    Isometry::new(1.1, 0.4, 0.2, 1.0).unwrap()
}

/// f1 conjugated by `conjugator()`.
pub fn f2() -> SchottkyRep {
    f1().conjugate(&conjugator()).expect("conjugation preserves the arc system")
}

/// f1 with l(h1) scaled by 1.1.
pub fn f3() -> SchottkyRep {
    SchottkyRep::auto_arcs(
        vec![
            spec(
                "h1",
                GenKind::Hyperbolic,
                hyperbolic_axis(H1.0, H1.1, H1.2 * 1.1),
            ),
            spec("h2", GenKind::Hyperbolic, hyperbolic_axis(H2.0, H2.1, H2.2)),
            spec("p1", GenKind::Parabolic, parabolic_fix(0.0, P1_MU)),
        ],
        PlanePoint::base(),
    )
    .expect("perturbed fixture is in ping-pong position")
}

/// Classical Schottky rep: three hyperbolic generators, no parabolic.
pub fn f4() -> SchottkyRep {
    SchottkyRep::auto_arcs(
        vec![
            spec("h1", GenKind::Hyperbolic, hyperbolic_axis(H1.0, H1.1, H1.2)),
            spec("h2", GenKind::Hyperbolic, hyperbolic_axis(H2.0, H2.1, H2.2)),
            spec("h3", GenKind::Hyperbolic, hyperbolic_axis(0.45, -0.45, 4.0)),
        ],
        PlanePoint::base(),
    )
    .expect("classical fixture is in ping-pong position")
}

/// The conjugate pair (f1, f2): identical marked length spectra.
pub fn pair_conjugate() -> RepPair {
    RepPair::new(f1(), f2()).unwrap()
}

/// The perturbed pair (f1, f3): distinct points, strict rigidity gaps.
pub fn pair_perturbed() -> RepPair {
    RepPair::new(f1(), f3()).unwrap()
}

/// The classical pair (f4, conjugated f4): no phase transition anywhere.
pub fn pair_classical() -> RepPair {
    let base = f4();
    let conj = base.conjugate(&conjugator()).unwrap();
    RepPair::new(base, conj).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_lengths_as_designed() {
        let rep = f1();
        let l1 = rep.generators()[0].matrix.translation_length().unwrap();
        let l2 = rep.generators()[1].matrix.translation_length().unwrap();
        assert!((l1 - 2.4).abs() < 1e-12);
        assert!((l2 - 2.6).abs() < 1e-12);
        let l1p = f3().generators()[0].matrix.translation_length().unwrap();
        assert!((l1p - 2.64).abs() < 1e-12);
    }

    #[test]
    fn perturbed_rep_still_valid() {
        let report = f3().verify_conditions(30, 2000);
        assert!(report.all_pass, "{report}");
    }

    #[test]
    fn conjugate_pair_shares_spectrum() {
        let pair = pair_conjugate();
        for (a, b) in pair.rho1.generators().iter().zip(pair.rho2.generators()) {
            if a.kind == GenKind::Hyperbolic {
                let la = a.matrix.translation_length().unwrap();
                let lb = b.matrix.translation_length().unwrap();
                assert!((la - lb).abs() < 1e-10);
            }
        }
    }
}
