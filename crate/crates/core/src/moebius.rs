//! Hyperbolic-plane primitives in the upper half-plane model: isometries as
//! real unimodular 2x2 matrices mod sign, distance, boundary action, Busemann
//! cocycle, trace classification and translation length. Disk coordinates
//! (through the Cayley map) are used only for boundary arcs and derivative
//! checks.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Classification tolerance on |trace| - 2.
pub const TOL_CLS: f64 = 1e-9;

const DET_DRIFT: f64 = 1e-12;

/// Element of PSL(2,R): a real 2x2 matrix with determinant 1, stored with the
/// sign convention that the first nonzero entry (row-major) is positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

/// Trace classification of an isometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Identity,
    Hyperbolic,
    Parabolic,
    Elliptic,
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Class::Identity => "identity",
            Class::Hyperbolic => "hyperbolic",
            Class::Parabolic => "parabolic",
            Class::Elliptic => "elliptic",
        };
        f.write_str(s)
    }
}

impl Isometry {
    /// Builds an isometry from raw entries, normalizing the determinant to 1.
    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Result<Self> {
        let det = m11 * m22 - m12 * m21;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::NotUnimodular(det));
        }
        let s = det.sqrt();
        let mut g = Isometry {
            m11: m11 / s,
            m12: m12 / s,
            m21: m21 / s,
            m22: m22 / s,
        };
        g.sign_normalize();
        Ok(g)
    }

    pub fn identity() -> Self {
        Isometry {
            m11: 1.0,
            m12: 0.0,
            m21: 0.0,
            m22: 1.0,
        }
    }

    fn sign_normalize(&mut self) {
        for &e in &[self.m11, self.m12, self.m21, self.m22] {
            if e != 0.0 {
                if e < 0.0 {
                    self.m11 = -self.m11;
                    self.m12 = -self.m12;
                    self.m21 = -self.m21;
                    self.m22 = -self.m22;
                }
                return;
            }
        }
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        let mut g = Isometry {
            m11: self.m11 * other.m11 + self.m12 * other.m21,
            m12: self.m11 * other.m12 + self.m12 * other.m22,
            m21: self.m21 * other.m11 + self.m22 * other.m21,
            m22: self.m21 * other.m12 + self.m22 * other.m22,
        };
        // Renormalize only when the computed determinant is trustworthy: for
        // entries of size s the float det carries cancellation error ~eps*s^2
        // even though the entries themselves stay relatively accurate, so for
        // long high-power words the det reading is noise and must be ignored.
        let scale = g.m11.abs().max(g.m12.abs()).max(g.m21.abs()).max(g.m22.abs());
        if scale < 1e3 {
            let det = g.m11 * g.m22 - g.m12 * g.m21;
            if (det - 1.0).abs() > DET_DRIFT && det > 0.0 {
                let s = det.sqrt();
                g.m11 /= s;
                g.m12 /= s;
                g.m21 /= s;
                g.m22 /= s;
            }
        }
        g.sign_normalize();
        g
    }

    pub fn inverse(&self) -> Isometry {
        let mut g = Isometry {
            m11: self.m22,
            m12: -self.m12,
            m21: -self.m21,
            m22: self.m11,
        };
        g.sign_normalize();
        g
    }

    /// Integer power by binary exponentiation; negative exponents invert.
    pub fn powi(&self, n: i32) -> Isometry {
        if n == 0 {
            return Isometry::identity();
        }
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut k = n.unsigned_abs();
        let mut acc = Isometry::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.m12.abs() <= tol
            && self.m21.abs() <= tol
            && (self.m11 - self.m22).abs() <= tol
            && (self.trace().abs() - 2.0).abs() <= tol
    }

    pub fn classify(&self) -> Class {
        if self.is_identity(TOL_CLS) {
            return Class::Identity;
        }
        let t = self.trace().abs();
        if t > 2.0 + TOL_CLS {
            Class::Hyperbolic
        } else if t < 2.0 - TOL_CLS {
            Class::Elliptic
        } else {
            Class::Parabolic
        }
    }

    /// Like `classify`, but refuses to decide inside the tolerance band
    /// around |trace| = 2 (identity excepted).
    pub fn classify_strict(&self) -> Result<Class> {
        if self.is_identity(TOL_CLS) {
            return Ok(Class::Identity);
        }
        let t = self.trace().abs();
        if (t - 2.0).abs() <= TOL_CLS {
            return Err(Error::AmbiguousClass { trace: t });
        }
        Ok(if t > 2.0 {
            Class::Hyperbolic
        } else {
            Class::Elliptic
        })
    }

    /// Minimal displacement 2*arccosh(|tr|/2) of a hyperbolic element.
    pub fn translation_length(&self) -> Result<f64> {
        match self.classify() {
            Class::Hyperbolic => Ok(2.0 * (self.trace().abs() / 2.0).acosh()),
            c => Err(Error::NotHyperbolic(c)),
        }
    }

    /// Mobius action on the upper half-plane.
    pub fn apply(&self, z: PlanePoint) -> PlanePoint {
        let num = Complex64::new(self.m11 * z.re + self.m12, self.m11 * z.im);
        let den = Complex64::new(self.m21 * z.re + self.m22, self.m21 * z.im);
        let w = num / den;
        PlanePoint { re: w.re, im: w.im }
    }

    /// Boundary action on R u {inf}.
    pub fn apply_boundary(&self, xi: BoundaryPoint) -> BoundaryPoint {
        match xi {
            BoundaryPoint::Infinity => {
                if self.m21 == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.m11 / self.m21)
                }
            }
            BoundaryPoint::Finite(x) => {
                let den = self.m21 * x + self.m22;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((self.m11 * x + self.m12) / den)
                }
            }
        }
    }

    /// Boundary fixed points. Hyperbolic elements return the attracting point
    /// first; parabolic elements return their single fixed point.
    pub fn fixed_points(&self) -> Result<FixedPoints> {
        let class = self.classify();
        match class {
            Class::Elliptic | Class::Identity => Err(Error::NoBoundaryFixedPoints),
            Class::Parabolic => {
                if self.m21 == 0.0 {
                    Ok(FixedPoints::One(BoundaryPoint::Infinity))
                } else {
                    Ok(FixedPoints::One(BoundaryPoint::Finite(
                        (self.m11 - self.m22) / (2.0 * self.m21),
                    )))
                }
            }
            Class::Hyperbolic => {
                if self.m21 == 0.0 {
                    // fixes infinity and m12/(m22-m11)
                    let other = BoundaryPoint::Finite(self.m12 / (self.m22 - self.m11));
                    if self.m11.abs() > self.m22.abs() {
                        Ok(FixedPoints::Two {
                            attracting: BoundaryPoint::Infinity,
                            repelling: other,
                        })
                    } else {
                        Ok(FixedPoints::Two {
                            attracting: other,
                            repelling: BoundaryPoint::Infinity,
                        })
                    }
                } else {
                    // roots of m21 z^2 + (m22-m11) z - m12 = 0; disc = tr^2 - 4
                    let disc = (self.trace() * self.trace() - 4.0).max(0.0).sqrt();
                    let b = self.m22 - self.m11;
                    // stable quadratic: avoid cancellation in -b +- disc
                    let q = -0.5 * (b + b.signum() * disc);
                    let (z1, z2) = if b == 0.0 {
                        (disc / (2.0 * self.m21), -disc / (2.0 * self.m21))
                    } else {
                        (q / self.m21, -self.m12 / q)
                    };
                    // attracting root has |m21 z + m22| = e^{l/2} > 1; compare
                    // the two magnitudes rather than testing against 1, since
                    // at the repelling root the value e^{-l/2} drowns in
                    // cancellation noise (~eps * entry scale) for long words
                    let s1 = (self.m21 * z1 + self.m22).abs();
                    let s2 = (self.m21 * z2 + self.m22).abs();
                    let (att, rep) = if s1 > s2 { (z1, z2) } else { (z2, z1) };
                    Ok(FixedPoints::Two {
                        attracting: BoundaryPoint::Finite(att),
                        repelling: BoundaryPoint::Finite(rep),
                    })
                }
            }
        }
    }

    /// d(i, g i) from the matrix entries: cosh d = (sum of squares)/2.
    /// Numerically stable for words whose entries overflow the precision of
    /// the pointwise boundary formula.
    pub fn displacement(&self) -> f64 {
        let q = (self.m11 * self.m11
            + self.m12 * self.m12
            + self.m21 * self.m21
            + self.m22 * self.m22)
            / 2.0;
        q.max(1.0).acosh()
    }

    /// d(o, g o) for an arbitrary basepoint, via conjugation to i.
    pub fn displacement_from(&self, o: PlanePoint) -> f64 {
        let s = o.im.sqrt();
        let w = Isometry {
            m11: s,
            m12: o.re / s,
            m21: 0.0,
            m22: 1.0 / s,
        };
        w.inverse().compose(self).compose(&w).displacement()
    }

    /// |g'(x)| on the real boundary (half-plane chart); 1/(m21 x + m22)^2.
    pub fn boundary_derivative(&self, x: f64) -> f64 {
        let d = self.m21 * x + self.m22;
        1.0 / (d * d)
    }

    /// The associated Mobius map on the Poincare disk, det-1 normalized.
    pub fn to_disk(&self) -> DiskMoebius {
        // conjugate by Psi(z) = (iz + 1)/(z + i), inverse (1 - i w)/(w - i);
        // the 1/sqrt(-2)-factors of the det-1 scalings of both cancel.
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        // M = [[i,1],[1,i]], Minv = -1/2 [[i,-1],[-1,i]]
        let (a, b, c, d) = (
            Complex64::new(self.m11, 0.0),
            Complex64::new(self.m12, 0.0),
            Complex64::new(self.m21, 0.0),
            Complex64::new(self.m22, 0.0),
        );
        // M * g
        let (p11, p12, p21, p22) = (i * a + c, i * b + d, a + i * c, b + i * d);
        // (M*g) * Minv, scaled by -1/2
        let s = Complex64::new(-0.5, 0.0);
        DiskMoebius {
            a: s * (p11 * i + p12 * (-one)),
            b: s * (p11 * (-one) + p12 * i),
            c: s * (p21 * i + p22 * (-one)),
            d: s * (p21 * (-one) + p22 * i),
        }
    }
}

/// Point of the open upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanePoint {
    pub re: f64,
    pub im: f64,
}

impl PlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidPoint { re, im });
        }
        Ok(PlanePoint { re, im })
    }

    /// The default basepoint i (disk origin).
    pub fn base() -> Self {
        PlanePoint { re: 0.0, im: 1.0 }
    }
}

/// Point of the ideal boundary R u {inf}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedPoints {
    Two {
        attracting: BoundaryPoint,
        repelling: BoundaryPoint,
    },
    One(BoundaryPoint),
}

impl FixedPoints {
    pub fn attracting(&self) -> BoundaryPoint {
        match *self {
            FixedPoints::Two { attracting, .. } => attracting,
            FixedPoints::One(p) => p,
        }
    }
}

/// Hyperbolic distance, cosh d = 1 + |x-y|^2 / (2 im(x) im(y)).
pub fn dist(x: PlanePoint, y: PlanePoint) -> f64 {
    let dr = x.re - y.re;
    let di = x.im - y.im;
    let c = 1.0 + (dr * dr + di * di) / (2.0 * x.im * y.im);
    c.acosh()
}

/// Busemann cocycle B_xi(x, y) = lim_{z->xi} d(x,z) - d(y,z), closed forms.
pub fn busemann(xi: BoundaryPoint, x: PlanePoint, y: PlanePoint) -> f64 {
    match xi {
        BoundaryPoint::Infinity => (y.im / x.im).ln(),
        BoundaryPoint::Finite(p) => {
            let nx = (x.re - p) * (x.re - p) + x.im * x.im;
            let ny = (y.re - p) * (y.re - p) + y.im * y.im;
            ((nx / x.im) * (y.im / ny)).ln()
        }
    }
}

/// Slow limit-definition of the Busemann cocycle, kept as a test oracle.
pub fn busemann_limit(xi: BoundaryPoint, x: PlanePoint, y: PlanePoint, scale: f64) -> f64 {
    let z = match xi {
        BoundaryPoint::Infinity => PlanePoint {
            re: 0.0,
            im: scale,
        },
        BoundaryPoint::Finite(p) => PlanePoint {
            re: p,
            im: 1.0 / scale,
        },
    };
    dist(x, z) - dist(y, z)
}

/// Cayley map Psi(z) = i(z-i)/(z+i) to the unit disk.
pub fn cayley(z: PlanePoint) -> Complex64 {
    let zc = Complex64::new(z.re, z.im);
    let i = Complex64::i();
    i * (zc - i) / (zc + i)
}

/// Inverse Cayley map, disk to half-plane.
pub fn cayley_inv(w: Complex64) -> Result<PlanePoint> {
    let i = Complex64::i();
    let z = (Complex64::new(1.0, 0.0) - i * w) / (w - i);
    PlanePoint::new(z.re, z.im)
}

/// Boundary Cayley map: angle of Psi(xi) on the unit circle, in [0, 2pi).
pub fn boundary_angle(xi: BoundaryPoint) -> f64 {
    let w = match xi {
        BoundaryPoint::Infinity => Complex64::i(),
        BoundaryPoint::Finite(x) => {
            let z = Complex64::new(x, 0.0);
            let i = Complex64::i();
            i * (z - i) / (z + i)
        }
    };
    let a = w.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Inverse of `boundary_angle`.
pub fn angle_boundary(theta: f64) -> BoundaryPoint {
    let w = Complex64::from_polar(1.0, theta);
    let i = Complex64::i();
    let den = w - i;
    if den.norm() < 1e-14 {
        return BoundaryPoint::Infinity;
    }
    let z = (Complex64::new(1.0, 0.0) - i * w) / den;
    BoundaryPoint::Finite(z.re)
}

/// A Mobius map of the unit disk with complex det-1 coefficients.
#[derive(Clone, Copy, Debug)]
pub struct DiskMoebius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl DiskMoebius {
    pub fn apply(&self, w: Complex64) -> Complex64 {
        (self.a * w + self.b) / (self.c * w + self.d)
    }

    /// |g'(w)| = 1/|c w + d|^2 for det-1 coefficients.
    pub fn derivative_abs(&self, w: Complex64) -> f64 {
        let d = self.c * w + self.d;
        1.0 / d.norm_sqr()
    }

    pub fn apply_angle(&self, theta: f64) -> f64 {
        let w = self.apply(Complex64::from_polar(1.0, theta));
        let a = w.arg();
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

/// An arc of the circle at infinity: center angle and half-width (radians).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryArc {
    center: f64,
    half_width: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let t = a.rem_euclid(std::f64::consts::TAU);
    if t == std::f64::consts::TAU {
        0.0
    } else {
        t
    }
}

/// Angular distance on the circle, in [0, pi].
pub fn angular_dist(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(std::f64::consts::TAU - d)
}

impl BoundaryArc {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || half_width >= std::f64::consts::PI {
            return Err(Error::ArcConstructionFailed(format!(
                "half-width {half_width} outside (0, pi)"
            )));
        }
        Ok(BoundaryArc {
            center: wrap_angle(center),
            half_width,
        })
    }

    /// Counterclockwise arc from angle `lo` to angle `hi`.
    pub fn from_endpoints_ccw(lo: f64, hi: f64) -> Result<Self> {
        let span = wrap_angle(hi - lo);
        BoundaryArc::new(lo + span / 2.0, span / 2.0)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (
            wrap_angle(self.center - self.half_width),
            wrap_angle(self.center + self.half_width),
        )
    }

    pub fn contains_angle(&self, theta: f64, tol: f64) -> bool {
        angular_dist(theta, self.center) <= self.half_width + tol
    }

    pub fn contains_arc(&self, other: &BoundaryArc, tol: f64) -> bool {
        angular_dist(other.center, self.center) + other.half_width <= self.half_width + tol
    }

    pub fn disjoint_from(&self, other: &BoundaryArc, tol: f64) -> bool {
        angular_dist(other.center, self.center) >= self.half_width + other.half_width + tol
    }

    /// Complementary arc of the circle.
    pub fn complement(&self) -> BoundaryArc {
        BoundaryArc {
            center: wrap_angle(self.center + std::f64::consts::PI),
            half_width: std::f64::consts::PI - self.half_width,
        }
    }

    /// Image arc under a disk Mobius map (orientation preserving).
    pub fn map(&self, g: &DiskMoebius) -> Result<BoundaryArc> {
        let (lo, hi) = self.endpoints();
        let wl = g.apply_angle(lo);
        let wh = g.apply_angle(hi);
        let arc = BoundaryArc::from_endpoints_ccw(wl, wh)?;
        debug_assert!(arc.contains_angle(g.apply_angle(self.center), 1e-6));
        Ok(arc)
    }

    /// Smallest arc containing both, required to share the angle `through`.
    pub fn union_through(&self, other: &BoundaryArc, through: f64) -> Result<BoundaryArc> {
        // farthest endpoint of each arc from `through`, measured inside the arc
        let far = |arc: &BoundaryArc| -> f64 {
            let (lo, hi) = arc.endpoints();
            if angular_dist(lo, through) >= angular_dist(hi, through) {
                lo
            } else {
                hi
            }
        };
        let e1 = far(self);
        let e2 = far(other);
        let a = BoundaryArc::from_endpoints_ccw(e1, e2)?;
        if a.contains_angle(through, 1e-9) {
            Ok(a)
        } else {
            BoundaryArc::from_endpoints_ccw(e2, e1)
        }
    }
}
