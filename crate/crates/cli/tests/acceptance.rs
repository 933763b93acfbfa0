//! End-to-end acceptance suite. Each numbered check prints exactly one
//! PASS/FAIL line; the process exits nonzero if any check fails. Run with
//!
//!     cargo test --test acceptance
//!
//! The suite exercises the full stack at desk scale: geometry identities,
//! the coding identity, the pressure phase transition, Bowen roots against
//! the orbit-counting oracle, curve convexity, the rigidity functionals,
//! symmetry laws, truncation soundness, and byte-level determinism of the
//! CLI artifacts.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use manhattan_core::coding::{
    orbit_lengths, potential_tau, random_cyclic_word, Alphabet, TruncationParams,
};
use manhattan_core::curve::{bowen_root, rigidity_report, trace_curve, CurvePoint, SolveParams};
use manhattan_core::fixtures;
use manhattan_core::moebius::{
    angle_boundary, busemann, busemann_limit, dist, BoundaryPoint, Isometry, PlanePoint,
};
use manhattan_core::orbit::{delta_estimate, thurston_ratio, EnumerationBudget};
use manhattan_core::pressure::{EstimatorMode, PressureContext, WeightedPotentialQuery};
use manhattan_core::schottky::RepPair;

fn main() {
    let checks: Vec<(&str, fn() -> Result<String, String>)> = vec![
        ("geometry core identities", c1_geometry),
        ("coding identity and positivity gap", c2_coding),
        ("phase transition exactness", c3_phase_transition),
        ("Bowen roots vs orbit-counting oracle", c4_oracle),
        ("curve endpoints and convexity", c5_convexity),
        ("straight-line rigidity for the conjugate pair", c6_rigidity_equality),
        ("strict gaps under perturbation", c7_rigidity_strict),
        ("homogeneity and pair-swap symmetry", c8_symmetry),
        ("truncation soundness under doubling", c9_truncation),
        ("byte-identical reruns", c10_determinism),
    ];
    let mut failures = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {:2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:2} FAIL  {name}: {detail}", i + 1);
                failures += 1;
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn ctx(pair: RepPair, params: TruncationParams) -> PressureContext {
    PressureContext::new(pair, params, EstimatorMode::PairFactorized).unwrap()
}

fn default_ctx(pair: RepPair) -> PressureContext {
    ctx(pair, TruncationParams::default())
}

fn random_point(rng: &mut ChaCha8Rng) -> PlanePoint {
    PlanePoint::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.1..4.0)).unwrap()
}

fn random_isometry(rng: &mut ChaCha8Rng) -> Isometry {
    loop {
        let m11 = rng.gen_range(-3.0..3.0);
        let m12 = rng.gen_range(-3.0..3.0);
        let m21 = rng.gen_range(-3.0..3.0);
        let m22 = rng.gen_range(-3.0..3.0);
        if m11 * m22 - m12 * m21 > 0.1 {
            return Isometry::new(m11, m12, m21, m22).unwrap();
        }
    }
}

/// Busemann closed form vs the limit definition, cocycle, equivariance,
/// the distance bound, and the boundary-derivative identity.
fn c1_geometry() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let o = PlanePoint::base();
    let mut max_limit = 0.0f64;
    let mut max_cocycle = 0.0f64;
    let mut max_equiv = 0.0f64;
    let mut max_bound = 0.0f64;
    let mut max_deriv = 0.0f64;
    for k in 0..1000 {
        let x = random_point(&mut rng);
        let y = random_point(&mut rng);
        let z = random_point(&mut rng);
        let xi = if k % 7 == 0 {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(rng.gen_range(-5.0..5.0))
        };
        let g = random_isometry(&mut rng);
        max_limit = max_limit.max((busemann(xi, x, y) - busemann_limit(xi, x, y, 1e8)).abs());
        max_cocycle = max_cocycle
            .max((busemann(xi, x, y) + busemann(xi, y, z) - busemann(xi, x, z)).abs());
        max_equiv = max_equiv
            .max((busemann(g.apply_boundary(xi), g.apply(x), g.apply(y)) - busemann(xi, x, y)).abs());
        max_bound = max_bound.max(busemann(xi, x, y) - dist(x, y));
        // |g'(xi)| = exp B_xi(o, g^{-1} o), in disk coordinates where the
        // basepoint o sits at the center
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let eta = angle_boundary(theta);
        let der = g.to_disk().derivative_abs(Complex64::from_polar(1.0, theta));
        max_deriv = max_deriv.max((der.ln() - busemann(eta, o, g.inverse().apply(o))).abs());
    }
    let checks = [
        (max_limit, 1e-6, "limit"),
        (max_cocycle, 1e-10, "cocycle"),
        (max_equiv, 1e-10, "equivariance"),
        (max_bound, 1e-10, "B <= d"),
        (max_deriv, 1e-8, "derivative"),
    ];
    for (v, tol, what) in checks {
        if v > tol {
            return Err(format!("{what} defect {v:.2e} > {tol:.0e}"));
        }
    }
    Ok(format!(
        "1000 triples; defects limit {max_limit:.1e}, cocycle {max_cocycle:.1e}, \
         equivariance {max_equiv:.1e}, derivative {max_deriv:.1e}"
    ))
}

/// Birkhoff sums of the geometric potential equal translation lengths, and
/// the positivity gap is stable when the sample doubles.
fn c2_coding() -> Result<String, String> {
    let pair = fixtures::pair_conjugate();
    let alpha = Alphabet::from_pair(&pair).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut gap_at = [f64::INFINITY; 2];
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    while checked < 1000 {
        let period = rng.gen_range(1..=6);
        let w = random_cyclic_word(&mut rng, &alpha, period, 10);
        let Ok((l1, _)) = orbit_lengths(&pair, &w) else {
            continue; // period-1 parabolic block: a cusp class, no geodesic
        };
        let sum: f64 = (0..period)
            .map(|i| potential_tau(&pair.rho1, &w, i).unwrap())
            .sum();
        let rel = (sum - l1).abs() / (1.0 + l1);
        worst = worst.max(rel);
        if rel > 1e-8 {
            return Err(format!("Birkhoff defect {rel:.2e} on {w:?}"));
        }
        let half = if checked < 500 { 0 } else { 1 };
        gap_at[half] = gap_at[half].min(sum / period as f64);
        checked += 1;
    }
    let c500 = gap_at[0];
    let c1000 = c500.min(gap_at[1]);
    if !(c1000 > 0.0) {
        return Err(format!("positivity gap {c1000} not positive"));
    }
    if c1000 < 0.5 * c500 {
        return Err(format!("gap unstable under doubling: {c500} -> {c1000}"));
    }
    Ok(format!(
        "1000 words, worst relative defect {worst:.1e}; gap c0 = {c500:.4} (500) / {c1000:.4} (1000)"
    ))
}

/// Infinite pressure exactly on t <= 1/(2(a+b)) when a cusp is present, and
/// never for the classical pair.
fn c3_phase_transition() -> Result<String, String> {
    let cusped = default_ctx(fixtures::pair_conjugate());
    let classical = default_ctx(fixtures::pair_classical());
    let grid: Vec<f64> = (1..=5).map(|i| 0.5 * i as f64).collect();
    let mut evals = 0usize;
    for &a in &grid {
        for &b in &grid {
            let th = 0.5 / (a + b);
            for (factor, expect_infinite) in [(0.9, true), (1.0, true), (1.25, false)] {
                let q = WeightedPotentialQuery::new(a, b, factor * th).map_err(|e| e.to_string())?;
                let est = cusped.pressure_estimate(&q).map_err(|e| e.to_string())?;
                if est.value.is_infinite() != expect_infinite {
                    return Err(format!(
                        "cusped pair at (a,b,t)=({a},{b},{:.4}): infinite = {}, expected {}",
                        factor * th,
                        est.value.is_infinite(),
                        expect_infinite
                    ));
                }
                let est = classical.pressure_estimate(&q).map_err(|e| e.to_string())?;
                if est.value.is_infinite() {
                    return Err(format!(
                        "classical pair at (a,b,t)=({a},{b},{:.4}): pressure reported infinite",
                        factor * th
                    ));
                }
                evals += 2;
            }
        }
    }
    Ok(format!("{evals} evaluations on the 5x5 grid, all on the correct side"))
}

/// Bowen roots agree with the independent orbit-counting slope to 10%.
fn c4_oracle() -> Result<String, String> {
    let pair = fixtures::pair_conjugate();
    let ctx = default_ctx(pair.clone());
    let budget = EnumerationBudget {
        max_blocks: 8,
        max_power: 20,
        max_samples: 200_000,
    };
    let solve = SolveParams::default();
    let mut worst = 0.0f64;
    for (a, b) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0)] {
        let root = bowen_root(&ctx, a, b, &solve).map_err(|e| e.to_string())?;
        let de = delta_estimate(&pair, a, b, &budget).map_err(|e| e.to_string())?;
        let rel = (root.t_root - de.delta).abs() / root.t_root;
        worst = worst.max(rel);
        if rel > 0.10 {
            return Err(format!(
                "(a,b)=({a},{b}): bowen {:.5} vs oracle {:.5}, rel {rel:.3}",
                root.t_root, de.delta
            ));
        }
    }
    Ok(format!("4 weight rays, worst relative deviation {worst:.3}"))
}

/// Second divided difference of b(a) at interior point i with a propagated
/// error bar from the per-point root uncertainties.
fn second_diffs(pts: &[CurvePoint]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..pts.len() - 1 {
        let (p0, p1, p2) = (&pts[i - 1], &pts[i], &pts[i + 1]);
        let h1 = p1.a - p0.a;
        let h2 = p2.a - p1.a;
        let dd = 2.0 * (p0.b / (h1 * (h1 + h2)) - p1.b / (h1 * h2) + p2.b / (h2 * (h1 + h2)));
        // both coordinates of each point carry up to t_err of uncertainty
        let (e0, e1, e2) = (2.0 * p0.t_err, 2.0 * p1.t_err, 2.0 * p2.t_err);
        let ee = 2.0 * (e0 / (h1 * (h1 + h2)) + e1 / (h1 * h2) + e2 / (h2 * (h1 + h2)));
        out.push((dd, ee));
    }
    out
}

/// Curve endpoints match the axis roots; the curve is convex up to noise
/// everywhere, strictly so for the perturbed pair at most interior points.
fn c5_convexity() -> Result<String, String> {
    let params = SolveParams {
        tol_root: 1e-7,
        ..Default::default()
    };
    let mut strict_summary = String::new();
    for (name, pair, want_strict) in [
        ("conjugate", fixtures::pair_conjugate(), false),
        ("perturbed", fixtures::pair_perturbed(), true),
    ] {
        let ctx = default_ctx(pair);
        let pts = trace_curve(&ctx, 5, &params).map_err(|e| e.to_string())?;
        let h1 = bowen_root(&ctx, 1.0, 0.0, &params).map_err(|e| e.to_string())?;
        let h2 = bowen_root(&ctx, 0.0, 1.0, &params).map_err(|e| e.to_string())?;
        let last = pts.last().unwrap();
        if (last.a - h1.t_root).abs() > last.t_err + h1.t_err
            || (pts[0].b - h2.t_root).abs() > pts[0].t_err + h2.t_err
        {
            return Err(format!("{name}: endpoints disagree with axis roots"));
        }
        let dds = second_diffs(&pts);
        // convexity of b(a): second differences nonnegative up to noise
        if let Some((dd, ee)) = dds.iter().find(|(dd, ee)| *dd < -2.0 * ee) {
            return Err(format!("{name}: convexity violated, dd {dd:.2e} < -2 x {ee:.2e}"));
        }
        if want_strict {
            let strict = dds.iter().filter(|(dd, ee)| *dd > 2.0 * ee).count();
            if (strict as f64) < 0.8 * dds.len() as f64 {
                return Err(format!(
                    "{name}: strictly convex at only {strict}/{} interior points",
                    dds.len()
                ));
            }
            strict_summary = format!("perturbed strictly convex at {strict}/{}", dds.len());
        }
    }
    Ok(format!("endpoints match, convexity holds; {strict_summary}"))
}

/// The conjugate pair sits on the straight line with all equality cases.
fn c6_rigidity_equality() -> Result<String, String> {
    let pair = fixtures::pair_conjugate();
    let ctx = default_ctx(pair.clone());
    let params = SolveParams {
        tol_root: 1e-7,
        ..Default::default()
    };
    let r = rigidity_report(&ctx, 9, &params, 1e-3).map_err(|e| e.to_string())?;
    if r.line_deviation > 1e-3 {
        return Err(format!("chord deviation {:.2e} > 1e-3", r.line_deviation));
    }
    let half = (r.delta11 - r.h1 / 2.0).abs();
    if half > 1e-3 {
        return Err(format!("delta11 - h/2 = {half:.2e} > 1e-3"));
    }
    if r.bishop_steger_gap.0.abs() > 1e-3 {
        return Err(format!("Bishop-Steger gap {:.2e} > 1e-3", r.bishop_steger_gap.0));
    }
    let tr = thurston_ratio(&pair, 3, 6, 14.0, false).map_err(|e| e.to_string())?;
    if (tr.ratio - 1.0).abs() > 1e-6 {
        return Err(format!("thurston ratio {} != 1 beyond 1e-6", tr.ratio));
    }
    if !r.verdicts.conjugate_consistent {
        return Err("verdict not conjugate-consistent".to_string());
    }
    Ok(format!(
        "deviation {:.1e}, |delta11 - h/2| {:.1e}, BS gap {:.1e}, thurston ratio 1{:+.1e} over {} classes",
        r.line_deviation,
        half,
        r.bishop_steger_gap.0,
        tr.ratio - 1.0,
        tr.classes
    ))
}

/// The perturbed pair resolves both strict inequalities beyond 2x error bars.
fn c7_rigidity_strict() -> Result<String, String> {
    let ctx = default_ctx(fixtures::pair_perturbed());
    let params = SolveParams {
        tol_root: 1e-7,
        ..Default::default()
    };
    let r = rigidity_report(&ctx, 9, &params, 1e-3).map_err(|e| e.to_string())?;
    let (bs, bs_err) = r.bishop_steger_gap;
    let (th, th_err) = r.thurston_gap;
    if !(bs > 2.0 * bs_err) {
        return Err(format!("Bishop-Steger gap {bs:.2e} not beyond 2 x {bs_err:.2e}"));
    }
    if !(th > 2.0 * th_err) {
        return Err(format!("Thurston gap {th:.2e} not beyond 2 x {th_err:.2e}"));
    }
    if r.verdicts.conjugate_consistent {
        return Err("perturbed pair wrongly marked conjugate-consistent".to_string());
    }
    Ok(format!(
        "BS gap {bs:.2e} ({:.1}x err), Thurston gap {th:.2e} ({:.1}x err)",
        bs / bs_err,
        th / th_err
    ))
}

/// Homogeneity of the critical exponent and the pair-swap mirror symmetry.
fn c8_symmetry() -> Result<String, String> {
    let solve = SolveParams::default();
    let ctx = default_ctx(fixtures::pair_conjugate());
    let mut worst_hom = 0.0f64;
    for (a, b) in [(1.0, 1.0), (2.0, 1.0)] {
        let base = bowen_root(&ctx, a, b, &solve).map_err(|e| e.to_string())?.t_root;
        for lam in [0.5, 2.0, 10.0] {
            let scaled = bowen_root(&ctx, lam * a, lam * b, &solve)
                .map_err(|e| e.to_string())?
                .t_root;
            let defect = (scaled * lam - base).abs();
            worst_hom = worst_hom.max(defect);
            if defect > 1e-9 {
                return Err(format!("homogeneity defect {defect:.2e} at lambda {lam}"));
            }
        }
    }
    let pair = fixtures::pair_perturbed();
    let fwd = default_ctx(pair.clone());
    let swp = default_ctx(pair.swapped());
    let mut worst_swap = 0.0f64;
    for (a, b) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0)] {
        let p = bowen_root(&fwd, a, b, &solve).map_err(|e| e.to_string())?;
        let q = bowen_root(&swp, b, a, &solve).map_err(|e| e.to_string())?;
        let defect = (p.t_root - q.t_root).abs();
        worst_swap = worst_swap.max(defect);
        if defect > p.t_err + q.t_err {
            return Err(format!(
                "swap mismatch at ({a},{b}): {defect:.2e} beyond {:.2e}",
                p.t_err + q.t_err
            ));
        }
    }
    Ok(format!(
        "homogeneity defect {worst_hom:.1e}; swap mismatch {worst_swap:.1e} within error bars"
    ))
}

/// Doubling the cusp truncation moves pressures by less than the reported
/// tail bound; doubling the period depth moves roots by less than their
/// error bars.
fn c9_truncation() -> Result<String, String> {
    let pair = fixtures::pair_perturbed();
    let base = TruncationParams::default();
    let deeper_m = TruncationParams {
        max_power: base.max_power * 2,
        ..base
    };
    let deeper_n = TruncationParams {
        n_max: base.n_max * 2,
        ..base
    };
    let c0 = ctx(pair.clone(), base);
    let cm = ctx(pair.clone(), deeper_m);
    let mut worst_ratio = 0.0f64;
    for (a, b, t) in [
        (1.0, 0.0, 0.55),
        (1.0, 0.0, 0.65),
        (0.0, 1.0, 0.6),
        (1.0, 1.0, 0.28),
        (1.0, 1.0, 0.35),
        (2.0, 1.0, 0.2),
    ] {
        let q = WeightedPotentialQuery::new(a, b, t).map_err(|e| e.to_string())?;
        let e0 = c0.pressure_estimate(&q).map_err(|e| e.to_string())?;
        let e1 = cm.pressure_estimate(&q).map_err(|e| e.to_string())?;
        let (v0, v1) = match (e0.value.finite(), e1.value.finite()) {
            (Some(v0), Some(v1)) => (v0, v1),
            _ => return Err(format!("unexpected infinite pressure at ({a},{b},{t})")),
        };
        let tail_bound: f64 = e0.tail_report.iter().map(|x| x.log_z_uncertainty).sum();
        let shift = (v1 - v0).abs();
        worst_ratio = worst_ratio.max(shift / tail_bound);
        if shift >= tail_bound {
            return Err(format!(
                "doubling max_power at ({a},{b},{t}): shift {shift:.2e} >= tail bound {tail_bound:.2e}"
            ));
        }
    }
    let cn = ctx(pair, deeper_n);
    let solve = SolveParams {
        tol_root: 1e-7,
        ..Default::default()
    };
    let mut worst_root = 0.0f64;
    for (a, b) in [(1.0, 0.0), (1.0, 1.0)] {
        let r0 = bowen_root(&c0, a, b, &solve).map_err(|e| e.to_string())?;
        let r1 = bowen_root(&cn, a, b, &solve).map_err(|e| e.to_string())?;
        let shift = (r0.t_root - r1.t_root).abs();
        worst_root = worst_root.max(shift / r0.t_err);
        if shift > r0.t_err + r1.t_err {
            return Err(format!(
                "doubling n_max at ({a},{b}): root shift {shift:.2e} beyond {:.2e}",
                r0.t_err + r1.t_err
            ));
        }
    }
    Ok(format!(
        "pressure shift <= {worst_ratio:.2} x tail bound; root shift <= {worst_root:.2} x error bar"
    ))
}

/// Two CLI runs with the same config produce byte-identical artifacts.
fn c10_determinism() -> Result<String, String> {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/conjugate_pair.json");
    let run = |dir: &std::path::Path| -> Result<(Vec<u8>, Vec<u8>), String> {
        let out = Command::new(env!("CARGO_BIN_EXE_manhattan"))
            .args(["curve", "--config"])
            .arg(&fixture)
            .args(["--rays", "3", "--out"])
            .arg(dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "curve run failed: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        let csv = std::fs::read(dir.join("curve.csv")).map_err(|e| e.to_string())?;
        Ok((csv, out.stdout))
    };
    let d1 = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d2 = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (csv1, stdout1) = run(d1.path())?;
    let (csv2, stdout2) = run(d2.path())?;
    if csv1 != csv2 {
        return Err("curve.csv differs between identical runs".to_string());
    }
    if stdout1 != stdout2 {
        return Err("stdout differs between identical runs".to_string());
    }
    Ok(format!("curve.csv ({} bytes) and stdout byte-identical across reruns", csv1.len()))
}
