//! Gurevich pressure of the weighted geometric potential -t(a tau + b kappa)
//! from truncated periodic partition sums, with analytic parabolic tail
//! buckets, exact phase-transition detection, and numerical differentiation.
//!
//! The default estimator factorizes the partition sum through a transfer
//! matrix over 2-block contexts: the weight of block u followed by block v
//! uses the potential evaluated at the periodic point (uv)^infinity. This is
//! exact at periods 1 and 2 and carries a per-junction error decaying with
//! the context depth; the exact full-enumeration mode bounds that error in
//! tests. Exponents beyond the truncation |m| <= M are aggregated into one
//! tail symbol per (parabolic letter, sign) whose weights use the asymptotic
//! tau(p^m ...) = 2 log|m| + c with Richardson-extrapolated constants.

use std::collections::BTreeMap;

use crate::coding::{self, Alphabet, BlockWord, TruncationParams};
use crate::error::{Error, Result};
use crate::par;
use crate::schottky::{GenKind, RepPair, SchottkyRep};

/// The query point (a, b, t) of P(-t(a tau + b kappa)).
#[derive(Clone, Copy, Debug)]
pub struct WeightedPotentialQuery {
    pub a: f64,
    pub b: f64,
    pub t: f64,
}

impl WeightedPotentialQuery {
    pub fn new(a: f64, b: f64, t: f64) -> Result<Self> {
        if !(a >= 0.0) || !(b >= 0.0) || !(a + b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weights (a, b) = ({a}, {b}) outside the admissible cone"
            )));
        }
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
        }
        Ok(WeightedPotentialQuery { a, b, t })
    }

    /// The parabolic convergence threshold 1/(2(a+b)).
    pub fn threshold(&self) -> f64 {
        0.5 / (self.a + self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PressureValue {
    Finite(f64),
    Infinite,
}

impl PressureValue {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            PressureValue::Finite(v) => Some(v),
            PressureValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PressureValue::Infinite)
    }
}

#[derive(Clone, Debug)]
pub struct TailReportEntry {
    pub letter: String,
    /// Fraction of Z_{n_max} carried by this letter's tail buckets.
    pub mass_fraction: f64,
    /// Residual shift of log Z_{n_max} when the tail constants move by their
    /// extrapolation uncertainty.
    pub log_z_uncertainty: f64,
}

#[derive(Clone, Debug)]
pub struct PressureEstimate {
    pub value: PressureValue,
    /// (n, log Z_n) for each computed period.
    pub per_n: Vec<(usize, f64)>,
    /// Mean of the last three increments log Z_{n+1} - log Z_n.
    pub extrapolated: f64,
    /// Spread of those increments plus the tail-constant uncertainty.
    pub error_bar: f64,
    pub tail_report: Vec<TailReportEntry>,
}

/// Bracketing constants for the cusp excursion distance:
/// 2 log|m| + lower <= d(o, p^m o) <= 2 log|m| + upper for |m| > m0.
#[derive(Clone, Copy, Debug)]
pub struct TailConstants {
    pub lower: f64,
    pub upper: f64,
}

/// Per-(parabolic letter, sign) distance brackets of one representation.
#[derive(Clone, Debug)]
pub struct TailModel {
    pub m0: i32,
    pub entries: BTreeMap<(usize, i8), TailConstants>,
}

/// Fits the tail brackets from exact distances at |m| in [m0, 4 m0] and
/// validates them on held-out exponents up to 16 m0.
pub fn fit_tail_model(rep: &SchottkyRep, m0: i32) -> Result<TailModel> {
    if m0 < 2 {
        return Err(Error::InvalidParameter(format!("tail fit m0 = {m0} < 2")));
    }
    let o = rep.basepoint();
    let mut entries = BTreeMap::new();
    for (i, g) in rep.generators().iter().enumerate() {
        if g.kind != GenKind::Parabolic {
            continue;
        }
        for sign in [1i8, -1] {
            let f = |m: i32| -> f64 {
                let mm = sign as i32 * m;
                g.matrix.powi(mm).displacement_from(o) - 2.0 * (m as f64).ln()
            };
            // f decreases to its limit; Richardson in 1/m for the lower bound
            let (f1, f2, f4) = (f(m0), f(2 * m0), f(4 * m0));
            let limit = 2.0 * f4 - f2;
            let guard = (f4 - limit).abs().max(1e-12) * 4.0;
            let c = TailConstants {
                lower: limit - guard,
                upper: f1 + 1e-12,
            };
            for held_out in [5 * m0, 8 * m0, 16 * m0] {
                let v = f(held_out);
                if v < c.lower || v > c.upper {
                    return Err(Error::TailModelInvalid(g.label.clone()));
                }
            }
            entries.insert((i, sign), c);
        }
    }
    Ok(TailModel { m0, entries })
}

/// Which partition-sum machinery to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorMode {
    /// Full enumeration of periodic words; only viable for n <= 4, M <= 20.
    Exact,
    /// Context-free block weights (translation lengths / cusp distances).
    LetterFactorized,
    /// 2-block-context transfer matrix with tail buckets (default).
    PairFactorized,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Symbol {
    Block(usize, i32),
    /// Aggregate of all exponents s*m, m > M, of a parabolic letter.
    Tail(usize, i8),
}

impl Symbol {
    fn letter(&self) -> usize {
        match *self {
            Symbol::Block(l, _) => l,
            Symbol::Tail(l, _) => l,
        }
    }

    /// Representative block for use as a 2-block context.
    fn representative(&self, deep: i32) -> (usize, i32) {
        match *self {
            Symbol::Block(l, m) => (l, m),
            Symbol::Tail(l, s) => (l, s as i32 * deep),
        }
    }
}

/// Cached estimator state for one (pair, truncation, mode) triple. The kernel
/// of (tau, kappa) values is independent of (a, b, t), so sweeping queries
/// against one context is cheap.
pub struct PressureContext {
    pair: RepPair,
    alpha: Alphabet,
    pub params: TruncationParams,
    pub mode: EstimatorMode,
    symbols: Vec<Symbol>,
    anchor: usize,
    /// (tau, kappa) per (u, v); NAN marks inadmissible transitions. For tail
    /// rows the entries are the asymptotic constants (c1, c2) of
    /// tau = 2 log|m| + c.
    kernel: Vec<(f64, f64)>,
    /// Worst extrapolation residual of the tail constants.
    delta_c: f64,
}

impl PressureContext {
    pub fn new(pair: RepPair, params: TruncationParams, mode: EstimatorMode) -> Result<Self> {
        params.validate()?;
        let alpha = Alphabet::from_pair(&pair)?;
        let anchor_block = params.anchor.ok_or_else(|| {
            Error::InvalidParameter("partition sums require a cylinder anchor".to_string())
        })?;
        if anchor_block.0 >= alpha.len() {
            return Err(Error::UnknownLabel(format!("#{}", anchor_block.0)));
        }
        if mode == EstimatorMode::Exact && (params.n_max > 4 || params.max_power > 20) {
            return Err(Error::InvalidParameter(
                "exact mode is limited to n_max <= 4, max_power <= 20".to_string(),
            ));
        }

        let m = params.max_power;
        let mut symbols = Vec::new();
        for l in 0..alpha.len() {
            for v in 1..=m {
                symbols.push(Symbol::Block(l, v));
                symbols.push(Symbol::Block(l, -v));
            }
        }
        for &p in &alpha.parabolic_indices() {
            symbols.push(Symbol::Tail(p, 1));
            symbols.push(Symbol::Tail(p, -1));
        }
        let anchor = symbols
            .iter()
            .position(|s| *s == Symbol::Block(anchor_block.0, anchor_block.1))
            .ok_or_else(|| {
                Error::InvalidParameter("anchor exponent exceeds the truncation".to_string())
            })?;

        let mut ctx = PressureContext {
            pair,
            alpha,
            params,
            mode,
            symbols,
            anchor,
            kernel: Vec::new(),
            delta_c: 0.0,
        };
        if mode != EstimatorMode::Exact {
            ctx.build_kernel()?;
        }
        Ok(ctx)
    }

    fn build_kernel(&mut self) -> Result<()> {
        let s = self.symbols.len();
        let m = self.params.max_power;
        let deep = 2 * m;
        let rows: Vec<Result<(Vec<(f64, f64)>, f64)>> = par::indexed_map(s, |ui| {
            let u = self.symbols[ui];
            let mut row = vec![(f64::NAN, f64::NAN); s];
            let mut worst_resid: f64 = 0.0;
            for (vi, &v) in self.symbols.iter().enumerate() {
                if u.letter() == v.letter() {
                    continue;
                }
                let entry = match self.mode {
                    EstimatorMode::LetterFactorized => {
                        // context-free weight of the block itself
                        let (l, e) = u.representative(deep);
                        match u {
                            Symbol::Block(..) => (
                                self.block_length(&self.pair.rho1, l, e),
                                self.block_length(&self.pair.rho2, l, e),
                            ),
                            Symbol::Tail(..) => {
                                // asymptotic constants of d(o, p^m o)
                                let c = |rep: &SchottkyRep| {
                                    let f = |mm: i32| {
                                        self.block_length(rep, l, e.signum() * mm)
                                            - 2.0 * (mm as f64).ln()
                                    };
                                    let r1 = 2.0 * f(2 * m) - f(m);
                                    let r2 = 2.0 * f(4 * m) - f(2 * m);
                                    ((4.0 * r2 - r1) / 3.0, (r2 - r1).abs())
                                };
                                let (c1, r1) = c(&self.pair.rho1);
                                let (c2, r2) = c(&self.pair.rho2);
                                worst_resid = worst_resid.max(r1).max(r2);
                                (c1, c2)
                            }
                        }
                    }
                    EstimatorMode::PairFactorized => match u {
                        Symbol::Block(l, e) => match v {
                            Symbol::Block(lv, ev) => (
                                self.pair_tau(&self.pair.rho1, (l, e), (lv, ev))?,
                                self.pair_tau(&self.pair.rho2, (l, e), (lv, ev))?,
                            ),
                            Symbol::Tail(lv, sv) => {
                                // limit of tau(u | p^{s m}) as m grows; the
                                // 1/m expansion is extrapolated to second
                                // order from samples at m, 2m, 4m
                                let lim = |rep: &SchottkyRep| -> Result<f64> {
                                    let x1 =
                                        self.pair_tau(rep, (l, e), (lv, sv as i32 * m))?;
                                    let x2 =
                                        self.pair_tau(rep, (l, e), (lv, sv as i32 * deep))?;
                                    let x4 =
                                        self.pair_tau(rep, (l, e), (lv, sv as i32 * 2 * deep))?;
                                    let r1 = 2.0 * x2 - x1;
                                    let r2 = 2.0 * x4 - x2;
                                    Ok((4.0 * r2 - r1) / 3.0)
                                };
                                (lim(&self.pair.rho1)?, lim(&self.pair.rho2)?)
                            }
                        },
                        Symbol::Tail(l, su) => {
                            // constants of tau(p^{s m} | v) = 2 log m + c,
                            // second-order Richardson in 1/m; the residual
                            // between the two first-order extrapolants bounds
                            // what the second-order step removed
                            let vrep = v.representative(deep);
                            let cfit = |rep: &SchottkyRep| -> Result<(f64, f64)> {
                                let f = |mm: i32| -> Result<f64> {
                                    Ok(self.pair_tau(rep, (l, su as i32 * mm), vrep)?
                                        - 2.0 * (mm as f64).ln())
                                };
                                let (c1, c2, c4) = (f(m)?, f(2 * m)?, f(4 * m)?);
                                let r1 = 2.0 * c2 - c1;
                                let r2 = 2.0 * c4 - c2;
                                Ok(((4.0 * r2 - r1) / 3.0, (r2 - r1).abs()))
                            };
                            let (c1, r1) = cfit(&self.pair.rho1)?;
                            let (c2, r2) = cfit(&self.pair.rho2)?;
                            worst_resid = worst_resid.max(r1).max(r2);
                            (c1, c2)
                        }
                    },
                    EstimatorMode::Exact => unreachable!(),
                };
                row[vi] = entry;
            }
            Ok((row, worst_resid))
        });
        let mut kernel = Vec::with_capacity(s * s);
        let mut delta_c: f64 = 0.0;
        for r in rows {
            let (row, resid) = r?;
            kernel.extend(row);
            delta_c = delta_c.max(resid);
        }
        self.kernel = kernel;
        self.delta_c = delta_c;
        Ok(())
    }

    /// tau(u at position 0 of the periodic word (u v)^infinity).
    fn pair_tau(&self, rep: &SchottkyRep, u: (usize, i32), v: (usize, i32)) -> Result<f64> {
        coding::potential_tau(rep, &BlockWord(vec![u, v]), 0)
    }

    /// Context-free length of one block: translation length for hyperbolic
    /// letters, basepoint displacement for parabolic ones.
    fn block_length(&self, rep: &SchottkyRep, letter: usize, m: i32) -> f64 {
        let g = rep.generators()[letter].matrix.powi(m);
        match rep.generators()[letter].kind {
            GenKind::Hyperbolic => g.translation_length().unwrap_or(0.0),
            GenKind::Parabolic => g.displacement_from(rep.basepoint()),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alpha
    }

    pub fn pair(&self) -> &RepPair {
        &self.pair
    }

    /// log of the anchored partition sum over Fix^n, plus the residual tail
    /// uncertainty of log Z_n (zero when no parabolic tail participates).
    pub fn partition_sum(&self, q: &WeightedPotentialQuery, n: usize) -> Result<(f64, f64)> {
        if n > self.params.n_max {
            return Err(Error::InvalidParameter(format!(
                "period {n} exceeds n_max = {}",
                self.params.n_max
            )));
        }
        if self.pair.has_parabolic() && q.t * (q.a + q.b) <= 0.5 {
            return Err(Error::DivergentTail(q.t * (q.a + q.b)));
        }
        match self.mode {
            EstimatorMode::Exact => Ok((self.exact_log_zn(q, n)?, 0.0)),
            _ => {
                let base = self.matrix_log_zn(q, n, 0.0, TailFilter::All)?;
                let shifted = self.matrix_log_zn(q, n, -self.delta_c, TailFilter::All)?;
                Ok((base, (shifted - base).abs()))
            }
        }
    }

    fn exact_log_zn(&self, q: &WeightedPotentialQuery, n: usize) -> Result<f64> {
        let mut acc = LogSum::new();
        let mut err = None;
        coding::for_each_periodic(&self.alpha, n, &self.params, |w| {
            if err.is_some() {
                return;
            }
            match self.exact_weight_log(q, w) {
                Ok(lw) => acc.push(lw),
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(acc.value())
    }

    fn exact_weight_log(&self, q: &WeightedPotentialQuery, w: &BlockWord) -> Result<f64> {
        // Birkhoff sums equal translation lengths on hyperbolic words; the
        // only non-hyperbolic periodic words are single parabolic blocks,
        // whose potentials vanish identically.
        let (s1, s2) = match coding::orbit_lengths(&self.pair, w) {
            Ok(l) => l,
            Err(Error::NonHyperbolicWord) if w.period() == 1 => (0.0, 0.0),
            Err(e) => return Err(e),
        };
        Ok(-q.t * (q.a * s1 + q.b * s2))
    }

    /// Dense transition weight matrix for one query. `c_shift` moves every
    /// tail constant (for uncertainty propagation); `filter` can exclude
    /// tail symbols of some letters (for the tail mass report).
    fn weight_matrix(&self, q: &WeightedPotentialQuery, c_shift: f64, filter: TailFilter) -> Vec<f64> {
        let s = self.symbols.len();
        // only meaningful when tail symbols exist, i.e. q > 1 is guaranteed
        // by the divergence guard in partition_sum
        let tail_factor = if self.alpha.parabolic_indices().is_empty() {
            0.0
        } else {
            zeta_tail(2.0 * q.t * (q.a + q.b), self.params.max_power)
        };
        let rows = par::indexed_map(s, |ui| {
            let u = self.symbols[ui];
            let mut row = vec![0.0f64; s];
            if !filter.allows(u) {
                return row;
            }
            for (vi, cell) in row.iter_mut().enumerate() {
                let (k1, k2) = self.kernel[ui * s + vi];
                if k1.is_nan() || !filter.allows(self.symbols[vi]) {
                    continue;
                }
                *cell = match u {
                    Symbol::Block(..) => (-q.t * (q.a * k1 + q.b * k2)).exp(),
                    Symbol::Tail(..) => {
                        (-q.t * (q.a * (k1 + c_shift) + q.b * (k2 + c_shift))).exp() * tail_factor
                    }
                };
            }
            row
        });
        rows.concat()
    }

    /// Anchored partition sums log Z_n for every n in 1..=n_max in one
    /// scaled vector sweep; Z_1 is the single anchored word, computed
    /// exactly.
    fn matrix_log_all(
        &self,
        q: &WeightedPotentialQuery,
        n_max: usize,
        c_shift: f64,
        filter: TailFilter,
    ) -> Result<Vec<f64>> {
        let Symbol::Block(l, m) = self.symbols[self.anchor] else {
            unreachable!()
        };
        let mut out = vec![self.exact_weight_log(q, &BlockWord(vec![(l, m)]))?];
        if n_max == 1 {
            return Ok(out);
        }
        let s = self.symbols.len();
        let w = self.weight_matrix(q, c_shift, filter);
        // x <- T x starting from the anchor basis vector; Z_n = x_n[anchor]
        let mut x = vec![0.0f64; s];
        x[self.anchor] = 1.0;
        let mut log_scale = 0.0f64;
        for n in 1..=n_max {
            let next = par::indexed_map(s, |ui| {
                let row = &w[ui * s..(ui + 1) * s];
                let mut acc = 0.0;
                for (rv, &xv) in row.iter().zip(&x) {
                    acc += rv * xv;
                }
                acc
            });
            x = next;
            let peak = x.iter().cloned().fold(0.0f64, f64::max);
            if peak <= 0.0 {
                return Err(Error::BracketFailure(q.t));
            }
            for v in &mut x {
                *v /= peak;
            }
            log_scale += peak.ln();
            if n >= 2 {
                if x[self.anchor] <= 0.0 {
                    return Err(Error::BracketFailure(q.t));
                }
                out.push(x[self.anchor].ln() + log_scale);
            }
        }
        Ok(out)
    }

    fn matrix_log_zn(
        &self,
        q: &WeightedPotentialQuery,
        n: usize,
        c_shift: f64,
        filter: TailFilter,
    ) -> Result<f64> {
        Ok(*self.matrix_log_all(q, n, c_shift, filter)?.last().unwrap())
    }

    /// Full pressure estimate at one query point.
    pub fn pressure_estimate(&self, q: &WeightedPotentialQuery) -> Result<PressureEstimate> {
        if self.pair.has_parabolic() && q.t <= q.threshold() {
            return Ok(PressureEstimate {
                value: PressureValue::Infinite,
                per_n: Vec::new(),
                extrapolated: f64::INFINITY,
                error_bar: f64::INFINITY,
                tail_report: Vec::new(),
            });
        }
        let n_max = if self.mode == EstimatorMode::Exact {
            self.params.n_max.min(4)
        } else {
            self.params.n_max
        };
        let mut per_n = Vec::with_capacity(n_max);
        let mut tail_unc: f64 = 0.0;
        if self.mode == EstimatorMode::Exact {
            for n in 1..=n_max {
                let (lz, tb) = self.partition_sum(q, n)?;
                tail_unc = tail_unc.max(tb);
                per_n.push((n, lz));
            }
        } else {
            let base = self.matrix_log_all(q, n_max, 0.0, TailFilter::All)?;
            let shifted = self.matrix_log_all(q, n_max, -self.delta_c, TailFilter::All)?;
            for (i, (&lz, &sh)) in base.iter().zip(&shifted).enumerate() {
                tail_unc = tail_unc.max((sh - lz).abs());
                per_n.push((i + 1, lz));
            }
        }
        let incs: Vec<f64> = per_n.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let last = &incs[incs.len().saturating_sub(3)..];
        let extrapolated = last.iter().sum::<f64>() / last.len() as f64;
        let spread = last.iter().cloned().fold(f64::MIN, f64::max)
            - last.iter().cloned().fold(f64::MAX, f64::min);
        let error_bar = spread + tail_unc;

        let mut tail_report = Vec::new();
        if self.mode != EstimatorMode::Exact && self.pair.has_parabolic() {
            if tail_unc.max(0.0).exp() - 1.0 > 0.1 {
                return Err(Error::TruncationInsufficient(tail_unc.exp() - 1.0));
            }
            let full = per_n[n_max - 1].1;
            for &p in &self.alpha.parabolic_indices() {
                let without =
                    self.matrix_log_zn(q, n_max, 0.0, TailFilter::ExcludeLetter(p))?;
                tail_report.push(TailReportEntry {
                    letter: self.alpha.label(p).to_string(),
                    mass_fraction: 1.0 - (without - full).exp(),
                    log_z_uncertainty: tail_unc,
                });
            }
        }
        Ok(PressureEstimate {
            value: PressureValue::Finite(extrapolated),
            per_n,
            extrapolated,
            error_bar,
            tail_report,
        })
    }

    /// Central-difference d/dt of the pressure.
    pub fn pressure_derivative_t(&self, q: &WeightedPotentialQuery, h: f64) -> Result<f64> {
        let lo = q.t - h;
        if self.pair.has_parabolic() && lo <= q.threshold() {
            return Err(Error::StepTooLarge { t: q.t, h });
        }
        let pm = |t: f64| -> Result<f64> {
            let est = self.pressure_estimate(&WeightedPotentialQuery { t, ..*q })?;
            est.value
                .finite()
                .ok_or(Error::StepTooLarge { t: q.t, h })
        };
        Ok((pm(q.t + h)? - pm(lo)?) / (2.0 * h))
    }
}

#[derive(Clone, Copy)]
enum TailFilter {
    All,
    ExcludeLetter(usize),
}

impl TailFilter {
    fn allows(&self, s: Symbol) -> bool {
        match (*self, s) {
            (TailFilter::ExcludeLetter(p), Symbol::Tail(l, _)) => l != p,
            _ => true,
        }
    }
}

/// Streaming log-sum-exp accumulator.
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn push(&mut self, lw: f64) {
        if lw > self.max {
            self.sum = self.sum * (self.max - lw).exp() + 1.0;
            self.max = lw;
        } else {
            self.sum += (lw - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

/// Sum_{m > M} m^{-q} for q > 1: 200 explicit terms plus the midpoint
/// integral remainder.
pub fn zeta_tail(q: f64, m: i32) -> f64 {
    debug_assert!(q > 1.0);
    let mut s = 0.0;
    let n = m + 200;
    for k in (m + 1)..=n {
        s += (k as f64).powf(-q);
    }
    let a = n as f64 + 0.5;
    s + a.powf(1.0 - q) / (q - 1.0) - q / 24.0 * a.powf(-q - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn small_params(m: i32) -> TruncationParams {
        TruncationParams {
            n_max: 4,
            max_power: m,
            anchor: Some((0, 1)),
        }
    }

    fn ctx(mode: EstimatorMode, m: i32, n_max: usize) -> PressureContext {
        let params = TruncationParams {
            n_max,
            max_power: m,
            anchor: Some((0, 1)),
        };
        PressureContext::new(fixtures::pair_conjugate(), params, mode).unwrap()
    }

    #[test]
    fn zeta_tail_against_slow_sum() {
        let q = 1.7;
        let slow: f64 = (61..=2_000_000).map(|k| (k as f64).powf(-q)).sum::<f64>()
            + (2_000_000.5f64).powf(1.0 - q) / (q - 1.0);
        assert!((zeta_tail(q, 60) - slow).abs() < 1e-9);
    }

    #[test]
    fn exact_mode_matches_hand_rolled_sum() {
        let pair = fixtures::pair_conjugate();
        let c = PressureContext::new(pair.clone(), small_params(1), EstimatorMode::Exact).unwrap();
        let q = WeightedPotentialQuery::new(1.0, 0.0, 0.9).unwrap();
        // 8 anchored period-2 words at M=1, summed with a plain loop
        let alpha = Alphabet::from_pair(&pair).unwrap();
        let mut hand = 0.0;
        for w in coding::enumerate_periodic(&alpha, 2, &small_params(1)) {
            let (l1, l2) = coding::orbit_lengths(&pair, &w).unwrap();
            hand += (-q.t * (q.a * l1 + q.b * l2)).exp();
        }
        let (lz, _) = c.partition_sum(&q, 2).unwrap();
        assert!((lz - hand.ln()).abs() < 1e-12, "{lz} vs {}", hand.ln());
    }

    #[test]
    fn pair_mode_exact_at_period_two() {
        let ce = ctx(EstimatorMode::Exact, 8, 4);
        let cp = ctx(EstimatorMode::PairFactorized, 8, 4);
        let q = WeightedPotentialQuery::new(1.0, 0.5, 0.7).unwrap();
        let (ze, _) = ce.partition_sum(&q, 2).unwrap();
        let (zp, _) = cp.partition_sum(&q, 2).unwrap();
        // period-2 words only differ by the M -> infinity tail buckets
        assert!(zp > ze);
        assert!(zp - ze < 0.05, "tail gap {}", zp - ze);
        let (z1e, _) = ce.partition_sum(&q, 1).unwrap();
        let (z1p, _) = cp.partition_sum(&q, 1).unwrap();
        assert_eq!(z1e, z1p);
    }

    #[test]
    fn pair_mode_close_to_exact_at_small_truncation() {
        let ce = ctx(EstimatorMode::Exact, 12, 4);
        let cp = ctx(EstimatorMode::PairFactorized, 12, 4);
        for (a, b, t) in [(1.0, 0.0, 0.85), (1.0, 1.0, 0.45), (0.0, 1.0, 0.85)] {
            let q = WeightedPotentialQuery::new(a, b, t).unwrap();
            for n in 3..=4 {
                let (ze, _) = ce.partition_sum(&q, n).unwrap();
                let (zp, _) = cp.partition_sum(&q, n).unwrap();
                // junction error plus tail mass; both small at these scales
                assert!(
                    (zp - ze).abs() < 0.08 * n as f64,
                    "n={n} a={a} b={b}: exact {ze} vs pair {zp}"
                );
            }
        }
    }

    #[test]
    fn monotone_in_t_and_scaling_identity() {
        let c = ctx(EstimatorMode::PairFactorized, 10, 5);
        let base = WeightedPotentialQuery::new(1.0, 1.0, 0.5).unwrap();
        let (z1, _) = c.partition_sum(&base, 4).unwrap();
        let (z2, _) = c
            .partition_sum(&WeightedPotentialQuery::new(1.0, 1.0, 0.6).unwrap(), 4)
            .unwrap();
        assert!(z2 < z1);
        // (la, lb, t) == (a, b, lt)
        let qa = WeightedPotentialQuery::new(2.0, 2.0, 0.3).unwrap();
        let qb = WeightedPotentialQuery::new(1.0, 1.0, 0.6).unwrap();
        let (za, _) = c.partition_sum(&qa, 4).unwrap();
        let (zb, _) = c.partition_sum(&qb, 4).unwrap();
        assert_eq!(za, zb);
    }

    #[test]
    fn phase_transition_criterion() {
        let c = ctx(EstimatorMode::PairFactorized, 10, 4);
        for (a, b) in [(1.0, 0.0), (1.0, 1.0), (2.0, 1.0)] {
            let thr = 0.5 / (a + b);
            let below = WeightedPotentialQuery::new(a, b, thr * 0.99).unwrap();
            let at = WeightedPotentialQuery::new(a, b, thr).unwrap();
            let above = WeightedPotentialQuery::new(a, b, thr * 1.2).unwrap();
            assert!(c.pressure_estimate(&below).unwrap().value.is_infinite());
            assert!(c.pressure_estimate(&at).unwrap().value.is_infinite());
            assert!(!c.pressure_estimate(&above).unwrap().value.is_infinite());
        }
        // classical Schottky: finite even far below any putative threshold
        let classical = PressureContext::new(
            fixtures::pair_classical(),
            TruncationParams {
                n_max: 4,
                max_power: 6,
                anchor: Some((0, 1)),
            },
            EstimatorMode::PairFactorized,
        )
        .unwrap();
        let q = WeightedPotentialQuery::new(1.0, 1.0, 0.05).unwrap();
        assert!(!classical.pressure_estimate(&q).unwrap().value.is_infinite());
    }

    #[test]
    fn tail_soundness_under_doubling_m() {
        // enlarging M moves log Z_n by less than the tail mass it absorbs
        let c1 = ctx(EstimatorMode::PairFactorized, 15, 4);
        let c2 = ctx(EstimatorMode::PairFactorized, 30, 4);
        let q = WeightedPotentialQuery::new(1.0, 1.0, 0.35).unwrap();
        for n in 2..=4 {
            let (za, ta) = c1.partition_sum(&q, n).unwrap();
            let (zb, _) = c2.partition_sum(&q, n).unwrap();
            // the tail bucket already accounts for |m| > M, so the residual
            // difference must sit inside the reported uncertainty envelope
            assert!(
                (zb - za).abs() <= (ta + 1e-3).max(0.02),
                "n={n}: {za} vs {zb}, tail bound {ta}"
            );
        }
    }

    #[test]
    fn anchor_independence() {
        let params_a = TruncationParams {
            n_max: 7,
            max_power: 20,
            anchor: Some((0, 1)),
        };
        let params_b = TruncationParams {
            anchor: Some((1, 1)),
            ..params_a
        };
        let ca =
            PressureContext::new(fixtures::pair_conjugate(), params_a, EstimatorMode::PairFactorized)
                .unwrap();
        let cb =
            PressureContext::new(fixtures::pair_conjugate(), params_b, EstimatorMode::PairFactorized)
                .unwrap();
        let q = WeightedPotentialQuery::new(1.0, 0.0, 0.8).unwrap();
        let ea = ca.pressure_estimate(&q).unwrap();
        let eb = cb.pressure_estimate(&q).unwrap();
        let gap = (ea.extrapolated - eb.extrapolated).abs();
        assert!(
            gap <= 2.0 * (ea.error_bar + eb.error_bar).max(1e-4),
            "anchors disagree: {} vs {} (bars {} {})",
            ea.extrapolated,
            eb.extrapolated,
            ea.error_bar,
            eb.error_bar
        );
    }

    #[test]
    fn derivative_negative_and_consistent() {
        let c = ctx(EstimatorMode::PairFactorized, 15, 6);
        for (a, b, t) in [(1.0, 0.0, 0.8), (1.0, 1.0, 0.4), (2.0, 1.0, 0.3)] {
            let q = WeightedPotentialQuery::new(a, b, t).unwrap();
            let d = c.pressure_derivative_t(&q, 1e-3).unwrap();
            assert!(d < 0.0, "dP/dt = {d} at ({a},{b},{t})");
            let d2 = c.pressure_derivative_t(&q, 5e-4).unwrap();
            assert!((d - d2).abs() < 0.05 * d.abs() + 1e-3);
        }
        // swapped pair symmetry
        let swapped = PressureContext::new(
            fixtures::pair_conjugate().swapped(),
            TruncationParams {
                n_max: 6,
                max_power: 15,
                anchor: Some((0, 1)),
            },
            EstimatorMode::PairFactorized,
        )
        .unwrap();
        let q = WeightedPotentialQuery::new(1.0, 2.0, 0.3).unwrap();
        let qs = WeightedPotentialQuery::new(2.0, 1.0, 0.3).unwrap();
        let d = c.pressure_derivative_t(&q, 1e-3).unwrap();
        let ds = swapped.pressure_derivative_t(&qs, 1e-3).unwrap();
        assert!((d - ds).abs() < 1e-6 + 1e-3 * d.abs());
        // step across the phase boundary is refused
        let near = WeightedPotentialQuery::new(1.0, 1.0, 0.2501).unwrap();
        assert!(matches!(
            c.pressure_derivative_t(&near, 1e-2),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn tail_model_brackets_held_out_distances() {
        let rep = fixtures::f1();
        let tm = fit_tail_model(&rep, 10).unwrap();
        assert_eq!(tm.entries.len(), 2); // one parabolic letter, two signs
        let p = &rep.generators()[2];
        for (&(_, sign), c) in &tm.entries {
            assert!(c.lower < c.upper);
            for m in [12, 25, 70, 300] {
                let d = p.matrix.powi(sign as i32 * m).displacement_from(rep.basepoint());
                let f = d - 2.0 * (m as f64).ln();
                assert!(f >= c.lower - 1e-9 && f <= c.upper + 1e-9, "m={m}: f={f} not in [{}, {}]", c.lower, c.upper);
            }
        }
    }

    #[test]
    fn divergent_tail_error_below_half() {
        let c = ctx(EstimatorMode::PairFactorized, 10, 4);
        let q = WeightedPotentialQuery::new(1.0, 1.0, 0.2).unwrap();
        assert!(matches!(
            c.partition_sum(&q, 3),
            Err(Error::DivergentTail(_))
        ));
    }
}
