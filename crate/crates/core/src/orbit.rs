//! Brute-force orbit oracle: enumerate freely reduced group words, measure
//! weighted displacements d^{a,b}(o, gamma o), and estimate critical
//! exponents from orbital counting functions. Everything here is independent
//! of the symbolic pressure machinery and serves as its ground truth.
//!
//! Enumeration is best-first by the weighted displacement (a Dijkstra sweep
//! of the word tree): in a Schottky group every appended block increases the
//! displacement by at least the smallest block displacement minus the
//! quasi-additivity constant, which is strictly positive on the shipped
//! fixtures, so samples come out in nondecreasing d^{a,b} order and the
//! enumerated set is complete up to the largest emitted displacement.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::coding::{self, Alphabet, TruncationParams};
use crate::error::{Error, Result};
use crate::moebius::Isometry;
use crate::schottky::{GenKind, GroupWord, RepPair};

/// One enumerated group element with its displacements in both
/// representations.
#[derive(Clone, Debug)]
pub struct OrbitSample {
    pub word: GroupWord,
    pub d1: f64,
    pub d2: f64,
}

impl OrbitSample {
    /// Weighted displacement a d1 + b d2.
    pub fn dab(&self, a: f64, b: f64) -> f64 {
        a * self.d1 + b * self.d2
    }
}

/// Budget of the word enumeration.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationBudget {
    /// Maximum number of blocks (syllables) per word.
    pub max_blocks: usize,
    /// Maximum |exponent| per block.
    pub max_power: i32,
    /// Maximum number of emitted samples; the frontier is pruned in
    /// deterministic best-first order when it is reached.
    pub max_samples: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_blocks: 8,
            max_power: 20,
            max_samples: 60_000,
        }
    }
}

impl EnumerationBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_blocks < 1 || self.max_power < 1 || self.max_samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "enumeration budget L = {}, M = {}, samples = {} out of range",
                self.max_blocks, self.max_power, self.max_samples
            )));
        }
        Ok(())
    }
}

/// Heap node: a freely reduced word, its evaluations in both reps, and the
/// evaluations of its prefix (word minus the last block) so that sibling
/// exponent bumps can be generated without re-multiplying the whole word.
struct Node {
    key: f64,
    word: Vec<(usize, i32)>,
    g1: Isometry,
    g2: Isometry,
    p1: Isometry,
    p2: Isometry,
    d1: f64,
    d2: f64,
}

/// Min-heap ordering by (key, word); the lexicographic tiebreak makes the
/// stream deterministic even when displacements collide exactly.
struct Entry(Node);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want the smallest key first
        other
            .0
            .key
            .total_cmp(&self.0.key)
            .then_with(|| other.0.word.cmp(&self.0.word))
    }
}

/// Enumerates freely reduced words best-first by a d1 + b d2. Each word with
/// at most `max_blocks` blocks and block exponents of magnitude at most
/// `max_power` appears exactly once; the empty word comes first.
pub fn enumerate_weighted(
    pair: &RepPair,
    a: f64,
    b: f64,
    budget: &EnumerationBudget,
) -> Result<Vec<OrbitSample>> {
    budget.validate()?;
    if !(a >= 0.0) || !(b >= 0.0) || !(a + b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weights ({a}, {b}) outside the admissible cone"
        )));
    }
    let k = pair.letter_count();
    let o1 = pair.rho1.basepoint();
    let o2 = pair.rho2.basepoint();
    let mut out = Vec::with_capacity(budget.max_samples.min(1 << 20));
    out.push(OrbitSample {
        word: GroupWord::empty(),
        d1: 0.0,
        d2: 0.0,
    });

    let make = |word: Vec<(usize, i32)>, g1: Isometry, g2: Isometry, p1: Isometry, p2: Isometry| {
        let d1 = g1.displacement_from(o1);
        let d2 = g2.displacement_from(o2);
        Node {
            key: a * d1 + b * d2,
            word,
            g1,
            g2,
            p1,
            p2,
            d1,
            d2,
        }
    };

    let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
    let id = Isometry::identity();
    for l in 0..k {
        for m in [1i32, -1] {
            let g1 = pair.rho1.generators()[l].matrix.powi(m);
            let g2 = pair.rho2.generators()[l].matrix.powi(m);
            heap.push(Entry(make(vec![(l, m)], g1, g2, id, id)));
        }
    }

    while out.len() < budget.max_samples {
        let Some(Entry(node)) = heap.pop() else {
            break;
        };
        let &(last_l, last_m) = node.word.last().unwrap();
        // sibling: same prefix, last exponent bumped one step deeper
        if last_m.abs() < budget.max_power {
            let m2 = last_m + last_m.signum();
            let g1 = node.p1.compose(&pair.rho1.generators()[last_l].matrix.powi(m2));
            let g2 = node.p2.compose(&pair.rho2.generators()[last_l].matrix.powi(m2));
            let mut w = node.word.clone();
            *w.last_mut().unwrap() = (last_l, m2);
            heap.push(Entry(make(w, g1, g2, node.p1, node.p2)));
        }
        // extensions: one new block with a different letter, exponent +-1
        if node.word.len() < budget.max_blocks {
            for l in 0..k {
                if l == last_l {
                    continue;
                }
                for m in [1i32, -1] {
                    let g1 = node.g1.compose(&pair.rho1.generators()[l].matrix.powi(m));
                    let g2 = node.g2.compose(&pair.rho2.generators()[l].matrix.powi(m));
                    let mut w = node.word.clone();
                    w.push((l, m));
                    heap.push(Entry(make(w, g1, g2, node.g1, node.g2)));
                }
            }
        }
        out.push(OrbitSample {
            word: GroupWord::new(node.word),
            d1: node.d1,
            d2: node.d2,
        });
    }
    Ok(out)
}

/// Symmetric-weight enumeration, the default sample stream.
pub fn enumerate_orbit(pair: &RepPair, budget: &EnumerationBudget) -> Result<Vec<OrbitSample>> {
    enumerate_weighted(pair, 1.0, 1.0, budget)
}

/// Number of samples with d^{a,b} <= s.
pub fn counting_function(samples: &[OrbitSample], a: f64, b: f64, s: f64) -> usize {
    samples.iter().filter(|x| x.dab(a, b) <= s).count()
}

/// True when the count at `s` is within 5% of the whole enumerated set, i.e.
/// the budget truncation is visible at this scale.
pub fn window_saturated(samples: &[OrbitSample], a: f64, b: f64, s: f64) -> bool {
    counting_function(samples, a, b, s) as f64 >= 0.95 * samples.len() as f64
}

/// Critical exponent estimate from the growth of the counting function.
#[derive(Clone, Debug)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// Two standard errors of the fitted slope.
    pub half_width: f64,
    /// Fit window in s.
    pub window: (f64, f64),
    pub samples_used: usize,
}

/// Least-squares slope of log counting_function over s in
/// [0.5, 0.9] * s_max, where s_max is the largest enumerated weighted
/// displacement. The best-first enumeration makes the count exact on that
/// range; the window keeps clear of both small-s transients and the
/// truncation edge.
pub fn delta_estimate(
    pair: &RepPair,
    a: f64,
    b: f64,
    budget: &EnumerationBudget,
) -> Result<DeltaEstimate> {
    let samples = enumerate_weighted(pair, a, b, budget)?;
    let mut ds: Vec<f64> = samples.iter().map(|x| x.dab(a, b)).collect();
    ds.sort_by(f64::total_cmp);
    let s_max = *ds.last().unwrap();
    let (lo, hi) = (0.5 * s_max, 0.9 * s_max);
    // count(s) by binary search over the sorted displacements
    let count = |s: f64| ds.partition_point(|&d| d <= s);
    if count(hi) as f64 >= 0.95 * ds.len() as f64 {
        return Err(Error::SaturatedWindow);
    }
    let grid = 25usize;
    let mut xs = Vec::with_capacity(grid);
    let mut ys = Vec::with_capacity(grid);
    for j in 0..grid {
        let s = lo + (hi - lo) * j as f64 / (grid - 1) as f64;
        let c = count(s);
        if c > 0 {
            xs.push(s);
            ys.push((c as f64).ln());
        }
    }
    if xs.len() < 5 {
        return Err(Error::SaturatedWindow);
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - ybar - slope * (x - xbar);
            r * r
        })
        .sum();
    let se = (ss_res / (n - 2.0) / sxx).sqrt();
    Ok(DeltaEstimate {
        delta: slope,
        half_width: 2.0 * se,
        window: (lo, hi),
        samples_used: samples.len(),
    })
}

/// Partial sum of the weighted Poincare series Q^{a,b}(s) over the
/// enumerated set.
pub fn poincare_partial(samples: &[OrbitSample], a: f64, b: f64, s: f64) -> f64 {
    samples.iter().map(|x| (-s * x.dab(a, b)).exp()).sum()
}

/// Partial sum of the PPS Poincare series: weights exp(-d^{a,b} - s d1).
pub fn pps_partial(samples: &[OrbitSample], a: f64, b: f64, s: f64) -> f64 {
    samples
        .iter()
        .map(|x| (-x.dab(a, b) - s * x.d1).exp())
        .sum()
}

/// Thurston ratio over conjugacy classes.
#[derive(Clone, Debug)]
pub struct ThurstonRatio {
    /// Sum l2 / Sum l1 over the classes entering the cutoff.
    pub ratio: f64,
    pub classes: usize,
}

/// Sum of l2 over sum of l1 across conjugacy classes with l1 <= t_cap,
/// enumerated up to `max_period` blocks with exponents up to `max_power`.
/// Primitive classes only by default; `include_powers` adds the non-primitive
/// ones (the definition via equidistribution does not settle this, so both
/// are available).
pub fn thurston_ratio(
    pair: &RepPair,
    max_period: usize,
    max_power: i32,
    t_cap: f64,
    include_powers: bool,
) -> Result<ThurstonRatio> {
    let alpha = Alphabet::from_pair(pair)?;
    let params = TruncationParams {
        n_max: max_period,
        max_power,
        anchor: None,
    };
    params.validate()?;
    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    let mut classes = 0usize;
    for n in 1..=max_period {
        for (w, primitive) in coding::conjugacy_class_representatives(&alpha, n, &params) {
            if !primitive && !include_powers {
                continue;
            }
            // single parabolic blocks are cusp classes, not closed geodesics
            let (l1, l2) = match coding::orbit_lengths(pair, &w) {
                Ok(l) => l,
                Err(Error::NonHyperbolicWord) if n == 1 && alpha.kind(w.0[0].0) == GenKind::Parabolic => {
                    continue;
                }
                Err(e) => return Err(e),
            };
            if l1 <= t_cap {
                sum1 += l1;
                sum2 += l2;
                classes += 1;
            }
        }
    }
    if classes < 50 {
        return Err(Error::TooFewClasses(classes));
    }
    Ok(ThurstonRatio {
        ratio: sum2 / sum1,
        classes,
    })
}

/// Outcome of the shell super-multiplicativity check
/// b_n b_m <= C sum_{|i| <= N} b_{n+m+i}.
#[derive(Clone, Debug)]
pub struct SupermultReport {
    /// Smallest window half-width N with no violations.
    pub n_shift: usize,
    /// The constant C fitted at that N.
    pub c: f64,
    /// Number of (n, m) pairs violating the inequality at every tested N.
    pub violations: usize,
    /// Shell indices inside the populated range that carry no samples.
    pub skipped_shells: Vec<usize>,
    pub tested_pairs: usize,
}

/// Populates shells b_k = sum of exp(-d^{a,b}) over samples with
/// k-1 < d1 <= k and fits the smallest (C, N) validating the
/// super-multiplicativity inequality on all testable (n, m).
pub fn supermultiplicativity_check(
    pair: &RepPair,
    a: f64,
    b: f64,
    budget: &EnumerationBudget,
) -> Result<SupermultReport> {
    let samples = enumerate_weighted(pair, a, b, budget)?;
    let kmax = samples
        .iter()
        .map(|x| x.d1.ceil() as usize)
        .max()
        .unwrap_or(0);
    let mut shells = vec![0.0f64; kmax + 1];
    for x in &samples {
        if x.d1 > 0.0 {
            shells[x.d1.ceil() as usize] += (-x.dab(a, b)).exp();
        }
    }
    let skipped: Vec<usize> = (1..=kmax).filter(|&k| shells[k] == 0.0).collect();
    // drop the outermost shells: they are truncated by the budget and would
    // understate the right-hand side
    let reliable = kmax.saturating_sub(2);
    let mut best: Option<(usize, f64)> = None;
    let mut violations = 0usize;
    let mut tested = 0usize;
    for n_shift in 0..=4usize {
        let mut c_needed: f64 = 0.0;
        let mut ok = true;
        tested = 0;
        for n in 1..=reliable {
            for m in n..=reliable {
                if shells[n] == 0.0 || shells[m] == 0.0 || n + m + n_shift > reliable {
                    continue;
                }
                tested += 1;
                let lhs = shells[n] * shells[m];
                let rhs: f64 = (n + m - n_shift.min(n + m)..=n + m + n_shift)
                    .map(|k| shells[k])
                    .sum();
                if rhs <= 0.0 {
                    ok = false;
                    continue;
                }
                c_needed = c_needed.max(lhs / rhs);
            }
        }
        if ok && tested > 0 {
            best = Some((n_shift, c_needed));
            break;
        }
        if !ok && n_shift == 4 {
            violations = tested;
        }
    }
    let (n_shift, c) = best.ok_or(Error::SaturatedWindow)?;
    Ok(SupermultReport {
        n_shift,
        c,
        violations,
        skipped_shells: skipped,
        tested_pairs: tested,
    })
}
