//! Block coding of the boundary action as a countable Markov shift: admissible
//! words (letter, exponent) with distinct adjacent letters, periodic-word
//! enumeration under truncation, and the geometric potential tau evaluated
//! through Busemann functions at periodic boundary points.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::moebius::{boundary_angle, Isometry, PlanePoint};
use crate::schottky::{GenKind, GroupWord, RepPair, SchottkyRep};

/// The letter list shared by both representations of a pair.
#[derive(Clone, Debug)]
pub struct Alphabet {
    letters: Vec<(String, GenKind)>,
}

impl Alphabet {
    pub fn from_pair(pair: &RepPair) -> Result<Self> {
        let letters: Vec<(String, GenKind)> = pair
            .rho1
            .generators()
            .iter()
            .map(|g| (g.label.clone(), g.kind))
            .collect();
        if letters.len() < 3 {
            // fewer than 3 letters breaks topological mixing of the shift
            return Err(Error::TooFewGenerators(letters.len()));
        }
        Ok(Alphabet { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.letters[i].0
    }

    pub fn kind(&self, i: usize) -> GenKind {
        self.letters[i].1
    }

    pub fn parabolic_indices(&self) -> Vec<usize> {
        (0..self.letters.len())
            .filter(|&i| self.letters[i].1 == GenKind::Parabolic)
            .collect()
    }
}

/// A word in block symbols a^m, m != 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockWord(pub Vec<(usize, i32)>);

impl BlockWord {
    pub fn period(&self) -> usize {
        self.0.len()
    }

    pub fn rotated(&self, shift: usize) -> BlockWord {
        let n = self.0.len();
        BlockWord((0..n).map(|i| self.0[(i + shift) % n]).collect())
    }

    pub fn to_group_word(&self) -> GroupWord {
        GroupWord::new(self.0.iter().copied())
    }

    /// Lexicographically minimal rotation: the canonical class representative.
    pub fn min_rotation(&self) -> BlockWord {
        (0..self.0.len())
            .map(|s| self.rotated(s))
            .min()
            .unwrap_or_else(|| self.clone())
    }

    /// False iff the word is a proper power of a shorter block word.
    pub fn is_primitive(&self) -> bool {
        let n = self.0.len();
        for d in 1..n {
            if n % d == 0 && (0..n).all(|i| self.0[i] == self.0[i % d]) {
                return false;
            }
        }
        true
    }
}

/// Finite truncation of the countable alphabet and periodic spectrum.
#[derive(Clone, Copy, Debug)]
pub struct TruncationParams {
    pub n_max: usize,
    pub max_power: i32,
    /// Cylinder anchor: the required first block, when set.
    pub anchor: Option<(usize, i32)>,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams {
            n_max: 40,
            max_power: 60,
            anchor: Some((0, 1)),
        }
    }
}

impl TruncationParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_max = {} < 2",
                self.n_max
            )));
        }
        if self.max_power < 1 {
            return Err(Error::InvalidParameter(format!(
                "max_power = {} < 1",
                self.max_power
            )));
        }
        if let Some((_, m)) = self.anchor {
            if m == 0 || m.abs() > self.max_power {
                return Err(Error::InvalidParameter(format!(
                    "anchor exponent {m} outside the truncation"
                )));
            }
        }
        Ok(())
    }

    pub fn without_anchor(mut self) -> Self {
        self.anchor = None;
        self
    }
}

/// Adjacency rule of the shift: consecutive blocks carry distinct letters
/// (exponents absorb inverses), wrapping around in the cyclic case. Period-1
/// words are vacuously cyclically admissible.
pub fn is_admissible(w: &BlockWord, cyclic: bool) -> bool {
    let n = w.0.len();
    if w.0.iter().any(|&(_, m)| m == 0) {
        return false;
    }
    for i in 1..n {
        if w.0[i - 1].0 == w.0[i].0 {
            return false;
        }
    }
    if cyclic && n >= 2 && w.0[n - 1].0 == w.0[0].0 {
        return false;
    }
    true
}

/// Visits every cyclically admissible length-n word with |m| <= max_power
/// (first block pinned to the anchor when set), in lexicographic order.
pub fn for_each_periodic<F: FnMut(&BlockWord)>(
    alpha: &Alphabet,
    n: usize,
    params: &TruncationParams,
    mut f: F,
) {
    if n == 0 {
        return;
    }
    let k = alpha.len();
    let m = params.max_power;
    let exponents: Vec<i32> = (1..=m).flat_map(|v| [-v, v]).collect();
    let mut blocks: Vec<(usize, i32)> = Vec::with_capacity(n);

    fn rec<F: FnMut(&BlockWord)>(
        blocks: &mut Vec<(usize, i32)>,
        n: usize,
        k: usize,
        exps: &[i32],
        f: &mut F,
    ) {
        if blocks.len() == n {
            f(&BlockWord(blocks.clone()));
            return;
        }
        let last = blocks.last().map(|b| b.0);
        let first = blocks.first().map(|b| b.0);
        for letter in 0..k {
            if Some(letter) == last {
                continue;
            }
            // wraparound constraint on the final slot (vacuous at n = 1)
            if blocks.len() == n - 1 && n >= 2 && Some(letter) == first {
                continue;
            }
            for &e in exps {
                blocks.push((letter, e));
                rec(blocks, n, k, exps, f);
                blocks.pop();
            }
        }
    }

    match params.anchor {
        Some(first) => {
            blocks.push(first);
            if n == 1 {
                f(&BlockWord(blocks.clone()));
            } else {
                rec(&mut blocks, n, k, &exponents, &mut f);
            }
        }
        None => rec(&mut blocks, n, k, &exponents, &mut f),
    }
}

/// Collecting form of `for_each_periodic`, for small truncations.
pub fn enumerate_periodic(alpha: &Alphabet, n: usize, params: &TruncationParams) -> Vec<BlockWord> {
    let mut out = Vec::new();
    for_each_periodic(alpha, n, params, |w| out.push(w.clone()));
    out
}

/// Translation lengths of the evaluated word in both representations.
pub fn orbit_lengths(pair: &RepPair, w: &BlockWord) -> Result<(f64, f64)> {
    let gw = w.to_group_word();
    let l = |rep: &SchottkyRep| -> Result<f64> {
        rep.evaluate(&gw)?
            .translation_length()
            .map_err(|_| Error::NonHyperbolicWord)
    };
    Ok((l(&pair.rho1)?, l(&pair.rho2)?))
}

/// The geometric potential at position `i` of the periodic extension of `w`:
/// B_xi(o, rho(a^m) o) with xi the attracting fixed point of the rotated
/// word's evaluation and a^m the block at position i. Birkhoff sums of this
/// over one period telescope exactly to the translation length.
///
/// Evaluated as -log|g'(xi')| at the once-more-rotated fixed point xi' =
/// g^{-1} xi (chain rule along the orbit). The naive pointwise Busemann form
/// B_xi(o, g o) is mathematically identical but amplifies the fixed-point
/// rounding error by e^{d(o,go)}; the derivative form is cancellation-free
/// because |c w + d| is of the same magnitude as the block entries there.
pub fn potential_tau(rep: &SchottkyRep, w: &BlockWord, position: usize) -> Result<f64> {
    let n = w.period().max(1);
    let i = position % n;
    let rot_next = w.rotated((i + 1) % n);
    let next = rep.evaluate(&rot_next.to_group_word())?;
    let mut xi = next
        .fixed_points()
        .map_err(|_| Error::NonHyperbolicWord)?
        .attracting();
    let (letter, m) = w.0[i];
    let mut block = rep.generators()[letter].matrix.powi(m);
    let o = rep.basepoint();
    if o != PlanePoint::base() {
        // move the basepoint to the disk origin
        let s = o.im.sqrt();
        let u = Isometry::new(1.0 / s, -o.re / s, 0.0, s)?;
        block = u.compose(&block).compose(&u.inverse());
        xi = u.apply_boundary(xi);
    }
    let theta = boundary_angle(xi);
    let der = block
        .to_disk()
        .derivative_abs(Complex64::from_polar(1.0, theta));
    Ok(-der.ln())
}

/// One representative per cyclic-rotation class of periodic words, with a
/// primitivity flag.
pub fn conjugacy_class_representatives(
    alpha: &Alphabet,
    n: usize,
    params: &TruncationParams,
) -> Vec<(BlockWord, bool)> {
    let mut out = Vec::new();
    for_each_periodic(alpha, n, params, |w| {
        if *w == w.min_rotation() {
            let primitive = w.is_primitive();
            out.push((w.clone(), primitive));
        }
    });
    out
}

/// Uniform random cyclically admissible word for sampling-based tests.
pub fn random_cyclic_word(
    rng: &mut ChaCha8Rng,
    alpha: &Alphabet,
    period: usize,
    max_power: i32,
) -> BlockWord {
    assert!(period >= 1);
    let k = alpha.len();
    let mut letters = Vec::with_capacity(period);
    loop {
        letters.clear();
        for i in 0..period {
            let prev = if i == 0 { None } else { Some(letters[i - 1]) };
            let l = loop {
                let c = rng.gen_range(0..k);
                if Some(c) != prev {
                    break c;
                }
            };
            letters.push(l);
        }
        if period == 1 || letters[period - 1] != letters[0] {
            break;
        }
    }
    let blocks = letters
        .into_iter()
        .map(|l| {
            let mag = rng.gen_range(1..=max_power);
            (l, if rng.gen_bool(0.5) { mag } else { -mag })
        })
        .collect();
    BlockWord(blocks)
}
