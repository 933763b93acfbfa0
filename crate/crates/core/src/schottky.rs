//! Extended Schottky representations: typed generator lists, ping-pong
//! boundary arcs, the (C1)-(C3) condition checker, word evaluation and the
//! quasi-additivity constant used by the pressure tail estimates.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::moebius::{
    boundary_angle, BoundaryArc, Class, DiskMoebius, Isometry, PlanePoint,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Hyperbolic,
    Parabolic,
}

impl std::fmt::Display for GenKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GenKind::Hyperbolic => "hyperbolic",
            GenKind::Parabolic => "parabolic",
        })
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub label: String,
    pub kind: GenKind,
    pub matrix: Isometry,
}

/// Key into the arc table: generator index plus inverse flag. Parabolic
/// generators carry a single arc under `inverse = false`.
pub type ArcKey = (usize, bool);

/// One Fuchsian representation with its ping-pong arc system.
#[derive(Clone, Debug)]
pub struct SchottkyRep {
    generators: Vec<GeneratorSpec>,
    arcs: BTreeMap<ArcKey, BoundaryArc>,
    basepoint: PlanePoint,
}

/// Freely reduced word in the abstract generators: (letter index, exponent).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord(pub Vec<(usize, i32)>);

impl GroupWord {
    /// Builds a word, freely reducing adjacent blocks with equal letters.
    pub fn new(blocks: impl IntoIterator<Item = (usize, i32)>) -> Self {
        let mut out: Vec<(usize, i32)> = Vec::new();
        for (letter, exp) in blocks {
            if exp == 0 {
                continue;
            }
            match out.last_mut() {
                Some((l, e)) if *l == letter => {
                    *e += exp;
                    if *e == 0 {
                        out.pop();
                    }
                }
                _ => out.push((letter, exp)),
            }
        }
        GroupWord(out)
    }

    pub fn empty() -> Self {
        GroupWord(Vec::new())
    }

    pub fn blocks(&self) -> &[(usize, i32)] {
        &self.0
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord(self.0.iter().rev().map(|&(l, e)| (l, -e)).collect())
    }
}

impl SchottkyRep {
    /// Builds a representation with explicit arcs.
    pub fn with_arcs(
        generators: Vec<GeneratorSpec>,
        arcs: BTreeMap<ArcKey, BoundaryArc>,
        basepoint: PlanePoint,
    ) -> Result<Self> {
        Self::validate_generators(&generators)?;
        for (i, g) in generators.iter().enumerate() {
            let want: &[ArcKey] = match g.kind {
                GenKind::Hyperbolic => &[(i, false), (i, true)],
                GenKind::Parabolic => &[(i, false)],
            };
            for k in want {
                if !arcs.contains_key(k) {
                    return Err(Error::ArcConstructionFailed(format!(
                        "missing arc for generator `{}` (inverse = {})",
                        g.label, k.1
                    )));
                }
            }
        }
        Ok(SchottkyRep {
            generators,
            arcs,
            basepoint,
        })
    }

    /// Builds a representation, deriving arcs from isometric circles.
    pub fn auto_arcs(generators: Vec<GeneratorSpec>, basepoint: PlanePoint) -> Result<Self> {
        Self::validate_generators(&generators)?;
        let mut arcs = BTreeMap::new();
        for (i, g) in generators.iter().enumerate() {
            match g.kind {
                GenKind::Hyperbolic => {
                    // g maps the exterior of I(g) onto the interior of
                    // I(g^{-1}), so C_g is cut out by I(g^{-1}) and C_{g^{-1}}
                    // by I(g).
                    let c_g = isometric_arc(&g.matrix.inverse().to_disk())?;
                    let c_ginv = isometric_arc(&g.matrix.to_disk())?;
                    arcs.insert((i, false), c_g);
                    arcs.insert((i, true), c_ginv);
                }
                GenKind::Parabolic => {
                    let a1 = isometric_arc(&g.matrix.to_disk())?;
                    let a2 = isometric_arc(&g.matrix.inverse().to_disk())?;
                    let fixed = g
                        .matrix
                        .fixed_points()
                        .map_err(|_| Error::NonHyperbolicWord)?
                        .attracting();
                    let c_p = a1.union_through(&a2, boundary_angle(fixed))?;
                    arcs.insert((i, false), c_p);
                }
            }
        }
        // isometric circles of distinct generators must not overlap
        let keys: Vec<ArcKey> = arcs.keys().copied().collect();
        for (ai, a) in keys.iter().enumerate() {
            for b in &keys[ai + 1..] {
                if !arcs[a].disjoint_from(&arcs[b], 0.0) {
                    return Err(Error::ArcConstructionFailed(format!(
                        "isometric-circle arcs for generator indices {:?} and {:?} overlap",
                        a, b
                    )));
                }
            }
        }
        Ok(SchottkyRep {
            generators,
            arcs,
            basepoint,
        })
    }

    fn validate_generators(generators: &[GeneratorSpec]) -> Result<()> {
        if generators.len() < 2 {
            return Err(Error::TooFewGenerators(generators.len()));
        }
        for g in generators {
            let found = g.matrix.classify();
            let ok = matches!(
                (g.kind, found),
                (GenKind::Hyperbolic, Class::Hyperbolic) | (GenKind::Parabolic, Class::Parabolic)
            );
            if !ok {
                return Err(Error::KindMismatch {
                    label: g.label.clone(),
                    tagged: g.kind.to_string(),
                    found: found.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.generators
    }

    pub fn arcs(&self) -> &BTreeMap<ArcKey, BoundaryArc> {
        &self.arcs
    }

    pub fn basepoint(&self) -> PlanePoint {
        self.basepoint
    }

    pub fn letter_count(&self) -> usize {
        self.generators.len()
    }

    pub fn parabolic_count(&self) -> usize {
        self.generators
            .iter()
            .filter(|g| g.kind == GenKind::Parabolic)
            .count()
    }

    /// Extended Schottky status: at least one parabolic and three generators.
    pub fn is_extended(&self) -> bool {
        self.parabolic_count() >= 1 && self.generators.len() >= 3
    }

    pub fn letter_index(&self, label: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Word from (label, exponent) pairs.
    pub fn word(&self, blocks: &[(&str, i32)]) -> Result<GroupWord> {
        let mut v = Vec::with_capacity(blocks.len());
        for &(label, exp) in blocks {
            v.push((self.letter_index(label)?, exp));
        }
        Ok(GroupWord::new(v))
    }

    /// Evaluates a word to a matrix.
    pub fn evaluate(&self, w: &GroupWord) -> Result<Isometry> {
        let mut acc = Isometry::identity();
        for &(letter, exp) in w.blocks() {
            let g = self
                .generators
                .get(letter)
                .ok_or_else(|| Error::UnknownLabel(format!("#{letter}")))?;
            acc = acc.compose(&g.matrix.powi(exp));
        }
        Ok(acc)
    }

    /// Conjugates the whole representation by `g`, mapping arcs and basepoint.
    pub fn conjugate(&self, g: &Isometry) -> Result<SchottkyRep> {
        let gd = g.to_disk();
        let ginv = g.inverse();
        let generators = self
            .generators
            .iter()
            .map(|spec| GeneratorSpec {
                label: spec.label.clone(),
                kind: spec.kind,
                matrix: g.compose(&spec.matrix).compose(&ginv),
            })
            .collect();
        let mut arcs = BTreeMap::new();
        for (k, arc) in &self.arcs {
            arcs.insert(*k, arc.map(&gd)?);
        }
        Ok(SchottkyRep {
            generators,
            arcs,
            basepoint: g.apply(self.basepoint),
        })
    }

    /// Checks conditions (C1)-(C3). Failures are report entries, not errors.
    pub fn verify_conditions(&self, power_check: u32, samples: usize) -> ConditionReport {
        let tol = 1e-9;
        let mut entries = Vec::new();

        for (i, g) in self.generators.iter().enumerate() {
            let found = g.matrix.classify();
            let ok = matches!(
                (g.kind, found),
                (GenKind::Hyperbolic, Class::Hyperbolic) | (GenKind::Parabolic, Class::Parabolic)
            );
            entries.push(ConditionEntry {
                condition: format!("kind({})", g.label),
                pass: ok,
                detail: format!("tagged {}, classified {}", g.kind, found),
            });
            match g.kind {
                GenKind::Hyperbolic => {
                    entries.push(self.check_c1(i, samples, tol));
                }
                GenKind::Parabolic => {
                    entries.push(self.check_c2(i, power_check, samples, tol));
                }
            }
        }
        entries.push(self.check_c3(tol));

        let all_pass = entries.iter().all(|e| e.pass);
        ConditionReport {
            extended: self.is_extended(),
            all_pass,
            entries,
        }
    }

    fn check_c1(&self, i: usize, samples: usize, tol: f64) -> ConditionEntry {
        let g = &self.generators[i];
        let c_g = self.arcs[&(i, false)];
        let c_ginv = self.arcs[&(i, true)];
        let gd = g.matrix.to_disk();
        let source = c_ginv.complement();
        let mut pass = true;
        let mut detail = String::new();
        match source.map(&gd) {
            Ok(image) => {
                if !c_g.contains_arc(&image, tol) {
                    pass = false;
                    detail = format!(
                        "image arc [{:.6}, {:.6}] escapes C_{}",
                        image.endpoints().0,
                        image.endpoints().1,
                        g.label
                    );
                }
            }
            Err(e) => {
                pass = false;
                detail = e.to_string();
            }
        }
        if pass {
            if let Some(theta) = sample_escape(&gd, &source, &c_g, samples, tol) {
                pass = false;
                detail = format!("sampled boundary point {theta:.9} maps outside C_{}", g.label);
            }
        }
        if pass {
            detail = "containment verified on endpoints and boundary sample".to_string();
        }
        ConditionEntry {
            condition: format!("C1({})", g.label),
            pass,
            detail,
        }
    }

    fn check_c2(&self, i: usize, power_check: u32, samples: usize, tol: f64) -> ConditionEntry {
        let g = &self.generators[i];
        let c_p = self.arcs[&(i, false)];
        let source = c_p.complement();
        let fixed_angle = match g.matrix.fixed_points() {
            Ok(fp) => boundary_angle(fp.attracting()),
            Err(e) => {
                return ConditionEntry {
                    condition: format!("C2({})", g.label),
                    pass: false,
                    detail: e.to_string(),
                }
            }
        };
        let (e_lo, e_hi) = source.endpoints();
        let mut pass = true;
        let mut detail = String::new();
        for sign in [1i32, -1] {
            let mut prev = [f64::INFINITY; 2];
            let mut monotone = true;
            for n in 1..=power_check {
                let pn = g.matrix.powi(sign * n as i32).to_disk();
                match source.map(&pn) {
                    Ok(image) => {
                        if !c_p.contains_arc(&image, tol) {
                            pass = false;
                            detail = format!(
                                "p^{} image arc escapes C_{}",
                                sign * n as i32,
                                g.label
                            );
                            break;
                        }
                    }
                    Err(e) => {
                        pass = false;
                        detail = e.to_string();
                        break;
                    }
                }
                // both complement endpoints must drift toward the fixed point
                for (k, &e) in [e_lo, e_hi].iter().enumerate() {
                    let d = crate::moebius::angular_dist(pn.apply_angle(e), fixed_angle);
                    if d > prev[k] + tol {
                        monotone = false;
                    }
                    prev[k] = d;
                }
                if (n == 1 || n == power_check)
                    && sample_escape(&pn, &source, &c_p, samples, tol).is_some()
                {
                    pass = false;
                    detail = format!("sampled point escapes C_{} under p^{}", g.label, sign * n as i32);
                    break;
                }
            }
            if pass && !monotone {
                pass = false;
                detail = format!(
                    "endpoint images not monotone toward the fixed point (sign {sign})"
                );
            }
            if !pass {
                break;
            }
        }
        if pass {
            detail = format!(
                "exact for |n| <= {power_check}; larger |n| certified-by-monotonicity"
            );
        }
        ConditionEntry {
            condition: format!("C2({})", g.label),
            pass,
            detail,
        }
    }

    fn check_c3(&self, tol: f64) -> ConditionEntry {
        let keys: Vec<ArcKey> = self.arcs.keys().copied().collect();
        for (ai, a) in keys.iter().enumerate() {
            for b in &keys[ai + 1..] {
                let (x, y) = (self.arcs[a], self.arcs[b]);
                if !x.disjoint_from(&y, tol) {
                    let overlap = x.half_width() + y.half_width()
                        - crate::moebius::angular_dist(x.center(), y.center());
                    return ConditionEntry {
                        condition: "C3".to_string(),
                        pass: false,
                        detail: format!(
                            "arcs {} and {} overlap by {:.6} rad",
                            self.arc_name(*a),
                            self.arc_name(*b),
                            overlap
                        ),
                    };
                }
            }
        }
        ConditionEntry {
            condition: "C3".to_string(),
            pass: true,
            detail: format!("{} arcs pairwise disjoint", keys.len()),
        }
    }

    fn arc_name(&self, key: ArcKey) -> String {
        let label = &self.generators[key.0].label;
        if key.1 {
            format!("C_{label}^-1")
        } else {
            format!("C_{label}")
        }
    }

    /// Empirical quasi-additivity constant: the worst deficiency
    /// d(o, g1 o) + d(o, g2 o) - d(o, g1 g2 o) over admissible pairs. All
    /// single-block pairs with |exponent| <= 5 are swept exhaustively (these
    /// dominate: the deficiency is a junction quantity), then `samples`
    /// random multi-block pairs are added on top.
    pub fn quasi_additivity_constant(&self, samples: usize, seed: u64) -> Result<f64> {
        let o = self.basepoint;
        let k = self.generators.len();
        let mut worst: f64 = 0.0;
        let mut consider = |w1: &GroupWord, w2: &GroupWord| -> Result<()> {
            let g1 = self.evaluate(w1)?;
            let g2 = self.evaluate(w2)?;
            let d1 = g1.displacement_from(o);
            let d2 = g2.displacement_from(o);
            let d12 = g1.compose(&g2).displacement_from(o);
            worst = worst.max(d1 + d2 - d12);
            Ok(())
        };
        let singles: Vec<GroupWord> = (0..k)
            .flat_map(|l| (1..=5i32).flat_map(move |m| [(l, m), (l, -m)]))
            .map(|b| GroupWord::new([b]))
            .collect();
        for w1 in &singles {
            for w2 in &singles {
                if w1.blocks()[0].0 != w2.blocks()[0].0 {
                    consider(w1, w2)?;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let w1 = random_word(&mut rng, k, 3, 5);
            let last = w1.blocks().last().unwrap().0;
            let w2 = loop {
                let w = random_word(&mut rng, k, 3, 5);
                if w.blocks().first().unwrap().0 != last {
                    break w;
                }
            };
            consider(&w1, &w2)?;
        }
        Ok(worst)
    }
}

fn random_word(rng: &mut ChaCha8Rng, letters: usize, max_len: usize, max_exp: i32) -> GroupWord {
    let len = rng.gen_range(1..=max_len);
    let mut blocks = Vec::with_capacity(len);
    let mut prev = usize::MAX;
    for _ in 0..len {
        let letter = loop {
            let l = rng.gen_range(0..letters);
            if l != prev {
                break l;
            }
        };
        let mag = rng.gen_range(1..=max_exp);
        let exp = if rng.gen_bool(0.5) { mag } else { -mag };
        blocks.push((letter, exp));
        prev = letter;
    }
    GroupWord::new(blocks)
}

fn sample_escape(
    map: &DiskMoebius,
    source: &BoundaryArc,
    target: &BoundaryArc,
    samples: usize,
    tol: f64,
) -> Option<f64> {
    let (lo, _) = source.endpoints();
    for k in 0..samples {
        let theta = lo + 2.0 * source.half_width() * (k as f64 + 0.5) / samples as f64;
        if !target.contains_angle(map.apply_angle(theta), tol) {
            return Some(theta);
        }
    }
    None
}

/// Arc of the unit circle cut out by the isometric circle |c w + d| = 1 of a
/// det-1 disk Mobius map. Isometric circles of disk isometries meet the unit
/// circle orthogonally, so cos(half-width) = 1/|center|.
pub fn isometric_arc(g: &DiskMoebius) -> Result<BoundaryArc> {
    let cn = g.c.norm();
    if cn < 1e-14 {
        return Err(Error::ArcConstructionFailed(
            "map fixes the disk origin; no isometric circle".to_string(),
        ));
    }
    let center = -g.d / g.c;
    let cm = center.norm();
    if cm <= 1.0 {
        return Err(Error::ArcConstructionFailed(format!(
            "isometric circle center inside the disk (|C| = {cm})"
        )));
    }
    let hw = (1.0 / cm).acos();
    BoundaryArc::new(center.arg(), hw)
}

#[derive(Clone, Debug)]
pub struct ConditionEntry {
    pub condition: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub extended: bool,
    pub all_pass: bool,
    pub entries: Vec<ConditionEntry>,
}

impl std::fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "extended Schottky: {}", self.extended)?;
        for e in &self.entries {
            writeln!(
                f,
                "  [{}] {}: {}",
                if e.pass { "pass" } else { "FAIL" },
                e.condition,
                e.detail
            )?;
        }
        write!(f, "overall: {}", if self.all_pass { "pass" } else { "FAIL" })
    }
}

/// Two representations sharing one abstract generator alphabet; the
/// boundary-preserving isomorphism is generator-wise identification.
#[derive(Clone, Debug)]
pub struct RepPair {
    pub rho1: SchottkyRep,
    pub rho2: SchottkyRep,
}

impl RepPair {
    pub fn new(rho1: SchottkyRep, rho2: SchottkyRep) -> Result<Self> {
        if rho1.generators.len() != rho2.generators.len() {
            return Err(Error::PairMismatch);
        }
        for (a, b) in rho1.generators.iter().zip(&rho2.generators) {
            if a.label != b.label || a.kind != b.kind {
                return Err(Error::PairMismatch);
            }
        }
        Ok(RepPair { rho1, rho2 })
    }

    pub fn swapped(&self) -> RepPair {
        RepPair {
            rho1: self.rho2.clone(),
            rho2: self.rho1.clone(),
        }
    }

    pub fn letter_count(&self) -> usize {
        self.rho1.generators.len()
    }

    pub fn has_parabolic(&self) -> bool {
        self.rho1.parabolic_count() > 0
    }
}
