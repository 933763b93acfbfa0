//! Bowen roots, the Manhattan curve, and the rigidity functionals.
//!
//! The curve is traced by a polar ray sweep: along each direction (a0, b0)
//! the map t -> P(-t(a0 tau + b0 kappa)) is strictly decreasing on its finite
//! branch, so the Bowen root is a bracketed 1-D bisection with a known lower
//! bound 1/(2(a0 + b0)) when a cusp is present. Solving b(a) directly would
//! need 2-D continuation instead.

use crate::error::{Error, Result};
use crate::par;
use crate::pressure::{EstimatorMode, PressureContext, WeightedPotentialQuery};
use crate::schottky::RepPair;

/// Solver knobs shared by every root along a sweep.
#[derive(Clone, Copy, Debug)]
pub struct SolveParams {
    /// Bisection stops when the bracket width falls below this (in t).
    pub tol_root: f64,
    /// Relative offset of the lower bracket above the phase boundary.
    pub bracket_margin: f64,
    /// Cap on the number of upper-bracket doublings.
    pub max_expand: u32,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            tol_root: 1e-4,
            bracket_margin: 1e-6,
            max_expand: 24,
        }
    }
}

/// One point of the Manhattan curve with solver diagnostics.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    /// Curve coordinates: (a, b) = t_root * ray.
    pub a: f64,
    pub b: f64,
    /// The input direction (a0, b0) as passed to the solver.
    pub ray: (f64, f64),
    /// Bowen root delta^{ray}; (a, b) = t_root * ray exactly.
    pub t_root: f64,
    /// |pressure| at the root.
    pub residual: f64,
    /// Final bisection interval in t.
    pub bracket: (f64, f64),
    /// Propagated uncertainty of t_root: bracket half-width plus the
    /// pressure error bar divided by the local pressure slope.
    pub t_err: f64,
    /// Set when the requested tolerance is below the precision floor set by
    /// the pressure error bar; the best available root is still returned.
    pub precision_limited: bool,
}

/// Verdicts of the rigidity comparison, always phrased as consistency with
/// the data, never as a proof.
#[derive(Clone, Debug)]
pub struct RigidityVerdicts {
    /// Line deviation and both equality gaps within tolerance.
    pub conjugate_consistent: bool,
    /// Bishop-Steger gap exceeds twice its propagated error bar.
    pub bishop_steger_strict: bool,
    /// Thurston gap exceeds twice its propagated error bar.
    pub thurston_strict: bool,
}

/// Entropies, Bishop-Steger bound, Thurston intersection number, and the
/// straight-line diagnostic for one representation pair.
#[derive(Clone, Debug)]
pub struct RigidityReport {
    pub h1: f64,
    pub h2: f64,
    pub delta11: f64,
    /// h1 h2 / (h1 + h2); delta11 never exceeds it beyond tolerance.
    pub bishop_steger_bound: f64,
    /// I = -1/b'(a) at a = h1, from the traced points nearest the axis.
    pub intersection_number: f64,
    /// Max distance of traced points from the chord a/h1 + b/h2 = 1.
    pub line_deviation: f64,
    /// bishop_steger_bound - delta11 and its propagated error bar.
    pub bishop_steger_gap: (f64, f64),
    /// intersection_number - h1/h2 and its propagated error bar.
    pub thurston_gap: (f64, f64),
    pub verdicts: RigidityVerdicts,
    pub curve: Vec<CurvePoint>,
}

/// Pressure sign at one t, treating the divergent side of the phase
/// transition (and truncation blow-ups just above it) as positive.
fn pressure_at(ctx: &PressureContext, a0: f64, b0: f64, t: f64) -> Result<Option<(f64, f64)>> {
    let q = WeightedPotentialQuery::new(a0, b0, t)?;
    match ctx.pressure_estimate(&q) {
        Ok(est) => Ok(est.value.finite().map(|v| (v, est.error_bar))),
        // Near the phase boundary the truncated partition sums blow up
        // before the tail bound certifies them; both failure modes only
        // happen on the positive-pressure side of the root.
        Err(Error::TruncationInsufficient(_)) | Err(Error::DivergentTail(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Solves P(-t(a tau + b kappa)) = 0 for t by bracketed bisection.
///
/// The weights are normalized to a0 + b0 = 1 internally and the root is
/// rescaled afterwards, so the homogeneity law delta^{la, lb} = delta^{a,b}/l
/// holds to machine precision by construction.
pub fn bowen_root(ctx: &PressureContext, a: f64, b: f64, params: &SolveParams) -> Result<CurvePoint> {
    if !(a >= 0.0) || !(b >= 0.0) || !(a + b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ray ({a}, {b}) outside the admissible cone"
        )));
    }
    let scale = a + b;
    let (a0, b0) = (a / scale, b / scale);
    // Normalized ray: the phase boundary sits at exactly 1/2.
    let mut t_lo = 0.5 * (1.0 + params.bracket_margin);
    let mut p_lo: Option<(f64, f64)> = None;
    if ctx.pair().has_parabolic() {
        // Pressure is +infinity at and below the boundary; no evaluation
        // needed to certify the sign at t_lo.
    } else {
        // No cusp: the root may sit below 1/2. Walk the lower bracket down
        // until the pressure is positive.
        let mut tries = 0;
        loop {
            p_lo = pressure_at(ctx, a0, b0, t_lo)?;
            match p_lo {
                Some((v, _)) if v <= 0.0 => {
                    t_lo *= 0.5;
                    tries += 1;
                    if tries > 40 {
                        return Err(Error::BracketFailure(t_lo));
                    }
                }
                _ => break,
            }
        }
    }

    // Expand the upper bracket by doubling until the pressure is negative.
    let mut t_hi = t_lo * 2.0;
    let mut p_hi;
    let mut expand = 0;
    loop {
        p_hi = pressure_at(ctx, a0, b0, t_hi)?;
        match p_hi {
            Some((v, _)) if v < 0.0 => break,
            _ => {
                p_lo = p_hi;
                t_lo = t_hi;
                t_hi *= 2.0;
                expand += 1;
                if expand > params.max_expand {
                    return Err(Error::BracketFailure(t_hi));
                }
            }
        }
    }

    // bisect to the requested width, then keep going until the residual at
    // the midpoint drops under twice the pressure error bar (or the bracket
    // bottoms out at float resolution)
    let mut t_norm;
    let (mut p_root, mut err_bar) = (f64::INFINITY, f64::INFINITY);
    loop {
        t_norm = 0.5 * (t_lo + t_hi);
        let p_mid = pressure_at(ctx, a0, b0, t_norm)?;
        if let Some((v, e)) = p_mid {
            p_root = v;
            err_bar = e;
        }
        match p_mid {
            Some((v, _)) if v < 0.0 => {
                t_hi = t_norm;
                p_hi = p_mid;
            }
            _ => {
                t_lo = t_norm;
                p_lo = p_mid;
            }
        }
        let width = t_hi - t_lo;
        if width <= params.tol_root {
            let settled = p_root.is_finite() && p_root.abs() <= 2.0 * err_bar;
            if settled || width <= 1e-12 * t_hi.max(1.0) {
                break;
            }
        }
    }
    // Local slope from the bracket endpoints where both were measurable,
    // falling back to the secant through the root.
    let slope = match (p_lo, p_hi) {
        (Some((vl, _)), Some((vh, _))) if t_hi > t_lo => (vh - vl) / (t_hi - t_lo),
        (_, Some((vh, _))) if t_hi > t_norm => (vh - p_root) / (t_hi - t_norm),
        _ => f64::NEG_INFINITY,
    };
    let floor = if slope.is_finite() && slope != 0.0 {
        (err_bar / slope).abs()
    } else {
        0.0
    };
    let t_err = 0.5 * (t_hi - t_lo) + floor;
    let t_root = t_norm / scale;
    Ok(CurvePoint {
        a: a * t_root,
        b: b * t_root,
        ray: (a, b),
        t_root,
        residual: p_root.abs(),
        bracket: (t_lo / scale, t_hi / scale),
        t_err: t_err / scale,
        precision_limited: floor > params.tol_root,
    })
}

/// Traces the Manhattan curve with `ray_count` interior rays
/// (cos theta_k, sin theta_k), theta_k uniform in (0, pi/2), plus both axis
/// endpoints. Rays are independent and solved in parallel; the output is
/// merged deterministically and sorted by the a-coordinate.
pub fn trace_curve(
    ctx: &PressureContext,
    ray_count: usize,
    params: &SolveParams,
) -> Result<Vec<CurvePoint>> {
    if ray_count < 3 {
        return Err(Error::InvalidParameter(format!(
            "ray_count = {ray_count} < 3"
        )));
    }
    let k = ray_count;
    let rays: Vec<(f64, f64)> = (0..k + 2)
        .map(|i| {
            if i == 0 {
                (1.0, 0.0)
            } else if i == k + 1 {
                (0.0, 1.0)
            } else {
                let theta = std::f64::consts::FRAC_PI_2 * i as f64 / (k + 1) as f64;
                (theta.cos(), theta.sin())
            }
        })
        .collect();
    let results = par::indexed_map(rays.len(), |i| bowen_root(ctx, rays[i].0, rays[i].1, params));
    let mut points = results.into_iter().collect::<Result<Vec<_>>>()?;
    points.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(points)
}

/// Distance from (a, b) to the chord a/h1 + b/h2 = 1.
fn chord_distance(h1: f64, h2: f64, a: f64, b: f64) -> f64 {
    (a / h1 + b / h2 - 1.0).abs() / (1.0 / (h1 * h1) + 1.0 / (h2 * h2)).sqrt()
}

/// Computes the full rigidity report from a traced curve.
///
/// The intersection number is -1/b'(a) at a = h1, where b'(a) comes from
/// one-sided finite differences on the three traced points nearest (h1, 0),
/// Richardson-extrapolated to cancel the leading linear error term.
pub fn rigidity_report(
    ctx: &PressureContext,
    ray_count: usize,
    params: &SolveParams,
    equality_tol: f64,
) -> Result<RigidityReport> {
    let curve = trace_curve(ctx, ray_count, params)?;
    if curve.len() < 5 {
        return Err(Error::InsufficientPoints(curve.len()));
    }
    let p0 = curve.last().unwrap(); // (h1, 0): largest a
    let p1 = &curve[curve.len() - 2];
    let p2 = &curve[curve.len() - 3];
    let h1 = p0.a;
    let h2 = curve[0].b;
    let h1_err = p0.t_err;
    let h2_err = curve[0].t_err;
    let mid = bowen_root(ctx, 1.0, 1.0, params)?;
    let delta11 = mid.t_root;

    // One-sided slopes at the (h1, 0) endpoint over one and two spacings;
    // Richardson: b' ~ 2 m1 - m2 cancels the O(spacing) term.
    let m1 = (p0.b - p1.b) / (p0.a - p1.a);
    let m2 = (p0.b - p2.b) / (p0.a - p2.a);
    let slope = 2.0 * m1 - m2;
    let intersection_number = -1.0 / slope;
    // Slope uncertainty from the point-wise root errors.
    let spacing = (p0.a - p1.a).abs().max(1e-12);
    let slope_err = 3.0 * (p0.t_err + p1.t_err + p2.t_err) / spacing;
    let i_err = slope_err / (slope * slope);

    let bishop_steger_bound = h1 * h2 / (h1 + h2);
    let line_deviation = curve
        .iter()
        .map(|p| chord_distance(h1, h2, p.a, p.b))
        .fold(0.0, f64::max);

    let bound_err = h1_err + h2_err; // loose but monotone in both inputs
    let bs_gap = bishop_steger_bound - delta11;
    let bs_gap_err = bound_err + mid.t_err;
    let ratio = h1 / h2;
    let ratio_err = ratio * (h1_err / h1 + h2_err / h2);
    let th_gap = intersection_number - ratio;
    let th_gap_err = i_err + ratio_err;

    let bishop_steger_strict = bs_gap > 2.0 * bs_gap_err;
    let thurston_strict = th_gap > 2.0 * th_gap_err;
    let verdicts = RigidityVerdicts {
        // a resolved strict gap contradicts conjugacy even when it is small
        conjugate_consistent: line_deviation <= equality_tol
            && bs_gap.abs() <= equality_tol
            && th_gap.abs() <= equality_tol.max(1e-2)
            && !bishop_steger_strict
            && !thurston_strict,
        bishop_steger_strict,
        thurston_strict,
    };

    Ok(RigidityReport {
        h1,
        h2,
        delta11,
        bishop_steger_bound,
        intersection_number,
        line_deviation,
        bishop_steger_gap: (bs_gap, bs_gap_err),
        thurston_gap: (th_gap, th_gap_err),
        verdicts,
        curve,
    })
}

/// Convenience constructor for the default estimator over a pair.
pub fn default_context(pair: RepPair) -> Result<PressureContext> {
    PressureContext::new(
        pair,
        crate::coding::TruncationParams::default(),
        EstimatorMode::PairFactorized,
    )
}
