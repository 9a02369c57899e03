//! Upper half-plane model of the hyperbolic plane.
//!
//! Points are `x + iy` with `y > 0`, boundary points are projective pairs on
//! `R ∪ {∞}`, and orientation-preserving isometries are real 2×2 matrices of
//! determinant one acting by fractional-linear maps. Complex boundary points
//! (`C ∪ {∞}`) used by the `sl2kit` module live here as [`ExtendedComplex`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `|det - 1|` for a matrix to count as an isometry, relative
/// to the squared scale of its entries.
pub const DET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Hyp2Error {
    #[error("point ({x}, {y}) is not in the upper half-plane")]
    NotInHalfPlane { x: f64, y: f64 },
    #[error("boundary point (0, 0) is not a projective point")]
    NullBoundaryPoint,
    #[error("geodesic endpoints coincide")]
    CoincidentEndpoints,
    #[error("points coincide")]
    CoincidentPoints,
    #[error("matrix has determinant {det}, expected 1")]
    InvalidIsometry { det: f64 },
    #[error("degenerate cross-ratio configuration (0/0)")]
    DegenerateCrossRatio,
}

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, Hyp2Error> {
        if !(x.is_finite() && y.is_finite() && y > 0.0) {
            return Err(Hyp2Error::NotInHalfPlane { x, y });
        }
        Ok(Self { x, y })
    }

    /// The base point `i`.
    pub const fn i() -> Self {
        Self { x: 0.0, y: 1.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    fn from_complex(z: Complex64) -> Self {
        // Möbius images of valid points stay in the half-plane up to rounding.
        Self {
            x: z.re,
            y: z.im.max(f64::MIN_POSITIVE),
        }
    }

    /// Coordinates in the Klein (projective) disk model, where geodesics are
    /// straight chords.
    pub fn to_klein(self) -> [f64; 2] {
        let z = self.to_complex();
        let w = (z - Complex64::i()) / (z + Complex64::i());
        let s = 2.0 / (1.0 + w.norm_sqr());
        [s * w.re, s * w.im]
    }

    /// Inverse of [`HPoint::to_klein`]; `k` must lie in the open unit disk.
    pub fn from_klein(k: [f64; 2]) -> Self {
        let r2 = k[0] * k[0] + k[1] * k[1];
        let s = 1.0 / (1.0 + (1.0 - r2).max(0.0).sqrt());
        let w = Complex64::new(s * k[0], s * k[1]);
        let z = Complex64::i() * (Complex64::new(1.0, 0.0) + w) / (Complex64::new(1.0, 0.0) - w);
        Self::from_complex(z)
    }
}

/// A point of `R ∪ {∞}` stored as a projective pair `a/b`, canonicalized so
/// that `b ≥ 0` and `max(|a|, |b|) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    a: f64,
    b: f64,
}

impl BoundaryPoint {
    pub fn new(a: f64, b: f64) -> Result<Self, Hyp2Error> {
        let m = a.abs().max(b.abs());
        if !(m > 0.0) || !m.is_finite() {
            return Err(Hyp2Error::NullBoundaryPoint);
        }
        let (mut a, mut b) = (a / m, b / m);
        if b < 0.0 {
            a = -a;
            b = -b;
        }
        if b == 0.0 {
            a = 1.0;
            b = 0.0;
        }
        Ok(Self { a, b })
    }

    pub fn finite(x: f64) -> Self {
        Self::new(x, 1.0).expect("finite boundary point")
    }

    pub fn infinity() -> Self {
        Self { a: 1.0, b: 0.0 }
    }

    pub fn pair(self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn is_infinite(self) -> bool {
        self.b == 0.0
    }

    /// The real value, or `None` at infinity.
    pub fn value(self) -> Option<f64> {
        (self.b != 0.0).then(|| self.a / self.b)
    }

    /// Position on the boundary circle, an angle in `(-π, π]` that is a
    /// strictly increasing function of the real value (∞ maps to π).
    pub fn circle_angle(self) -> f64 {
        2.0 * self.a.atan2(self.b)
    }

    /// Projective distance `|a b' - a' b|` between canonical pairs (zero iff
    /// the points coincide).
    pub fn separation(self, other: Self) -> f64 {
        (self.a * other.b - other.a * self.b).abs()
    }

    pub fn to_extended(self) -> ExtendedComplex {
        ExtendedComplex::new(Complex64::new(self.a, 0.0), Complex64::new(self.b, 0.0))
    }
}

/// An oriented geodesic, running from `p_minus` to `p_plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    pub p_minus: BoundaryPoint,
    pub p_plus: BoundaryPoint,
}

impl Geodesic {
    pub fn new(p_minus: BoundaryPoint, p_plus: BoundaryPoint) -> Result<Self, Hyp2Error> {
        if p_minus.separation(p_plus) < 1e-14 {
            return Err(Hyp2Error::CoincidentEndpoints);
        }
        Ok(Self { p_minus, p_plus })
    }

    /// Geodesic between two real endpoints, `f64::INFINITY` meaning ∞.
    pub fn from_reals(p_minus: f64, p_plus: f64) -> Result<Self, Hyp2Error> {
        let bp = |x: f64| {
            if x.is_infinite() {
                BoundaryPoint::infinity()
            } else {
                BoundaryPoint::finite(x)
            }
        };
        Self::new(bp(p_minus), bp(p_plus))
    }

    pub fn reversed(self) -> Self {
        Self {
            p_minus: self.p_plus,
            p_plus: self.p_minus,
        }
    }

    /// Whether the two geodesics cross in the interior of the half-plane.
    pub fn crosses(&self, other: &Geodesic) -> bool {
        let (a, b) = ordered(self.p_minus.circle_angle(), self.p_plus.circle_angle());
        let inside = |t: f64| t > a && t < b;
        inside(other.p_minus.circle_angle()) != inside(other.p_plus.circle_angle())
    }

    /// Whether the two geodesics share an endpoint.
    pub fn shares_endpoint(&self, other: &Geodesic, tol: f64) -> bool {
        [self.p_minus, self.p_plus]
            .iter()
            .any(|p| p.separation(other.p_minus) < tol || p.separation(other.p_plus) < tol)
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A geodesic segment between two distinct points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: HPoint,
    pub b: HPoint,
}

impl Segment {
    pub fn new(a: HPoint, b: HPoint) -> Result<Self, Hyp2Error> {
        if a == b {
            return Err(Hyp2Error::CoincidentPoints);
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }
}

/// An element of `PSL2(R)` as a sign-canonical matrix `((a, b), (c, d))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry2 {
    m: [f64; 4],
}

impl Isometry2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, Hyp2Error> {
        let det = a * d - b * c;
        let scale = (a * a + b * b + c * c + d * d).max(1.0);
        if !det.is_finite() || (det - 1.0).abs() > DET_TOL * scale {
            return Err(Hyp2Error::InvalidIsometry { det });
        }
        Ok(Self::canonical([a, b, c, d]))
    }

    /// Rescales a matrix of positive determinant to determinant one.
    pub fn from_scaled(a: f64, b: f64, c: f64, d: f64) -> Result<Self, Hyp2Error> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Hyp2Error::InvalidIsometry { det });
        }
        let s = det.sqrt().recip();
        Ok(Self::canonical([a * s, b * s, c * s, d * s]))
    }

    pub const fn identity() -> Self {
        Self {
            m: [1.0, 0.0, 0.0, 1.0],
        }
    }

    fn canonical(m: [f64; 4]) -> Self {
        let big = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let lead = m.iter().find(|v| v.abs() > 1e-14 * big).copied().unwrap_or(1.0);
        if lead < 0.0 {
            Self {
                m: [-m[0], -m[1], -m[2], -m[3]],
            }
        } else {
            Self { m }
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        self.m
    }

    pub fn det(&self) -> f64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn trace(&self) -> f64 {
        self.m[0] + self.m[3]
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.m;
        Self::canonical([d, -b, -c, a])
    }

    pub fn apply(&self, p: HPoint) -> HPoint {
        let [a, b, c, d] = self.m;
        let z = p.to_complex();
        HPoint::from_complex((z * a + b) / (z * c + d))
    }

    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        let [a, b, c, d] = self.m;
        let (u, v) = p.pair();
        BoundaryPoint::new(a * u + b * v, c * u + d * v).expect("invertible map")
    }

    pub fn apply_geodesic(&self, g: &Geodesic) -> Geodesic {
        Geodesic {
            p_minus: self.apply_boundary(g.p_minus),
            p_plus: self.apply_boundary(g.p_plus),
        }
    }

    /// Max entrywise difference to `other`, minimized over the sign ambiguity.
    pub fn distance_up_to_sign(&self, other: &Self) -> f64 {
        let d = |s: f64| {
            self.m
                .iter()
                .zip(other.m.iter())
                .fold(0.0f64, |acc, (x, y)| acc.max((x - s * y).abs()))
        };
        d(1.0).min(d(-1.0))
    }

    /// The isometry sending `g.p_minus` to 0 and `g.p_plus` to ∞.
    pub fn normalizing(g: &Geodesic) -> Self {
        let (u1, u2) = g.p_minus.pair();
        let (v1, v2) = g.p_plus.pair();
        let (mut c, mut d) = (v2, -v1);
        if u2 * d - (-u1) * c < 0.0 {
            c = -c;
            d = -d;
        }
        Self::from_scaled(u2, -u1, c, d).expect("distinct endpoints")
    }

    /// The isometry taking `i` to `p` and the unit tangent of angle 0 at `i`
    /// to the unit tangent of angle `direction` at `p`.
    pub fn frame(p: HPoint, direction: f64) -> Self {
        affine_to(p) * rotation_about(HPoint::i(), direction)
    }
}

impl Mul for Isometry2 {
    type Output = Isometry2;

    fn mul(self, rhs: Isometry2) -> Isometry2 {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = rhs.m;
        let m = [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h];
        // Renormalize so determinant drift does not accumulate over products.
        let det = m[0] * m[3] - m[1] * m[2];
        let s = det.sqrt().recip();
        Isometry2::canonical([m[0] * s, m[1] * s, m[2] * s, m[3] * s])
    }
}

/// `z ↦ p.y·z + p.x`, sending `i` to `p` without rotating tangent vectors.
fn affine_to(p: HPoint) -> Isometry2 {
    let r = p.y.sqrt();
    Isometry2::canonical([r, p.x / r, 0.0, 1.0 / r])
}

/// Hyperbolic distance, via `sinh(d/2) = |p - q| / (2 sqrt(p.y q.y))`.
pub fn dist(p: HPoint, q: HPoint) -> f64 {
    let e = (p.x - q.x).hypot(p.y - q.y);
    2.0 * (e / (2.0 * (p.y * q.y).sqrt())).asinh()
}

pub fn apply(g: &Isometry2, p: HPoint) -> HPoint {
    g.apply(p)
}

/// The geodesic through `p` and `q`, oriented so that travelling from `p`
/// to `q` heads toward `p_plus`.
pub fn geodesic_through(p: HPoint, q: HPoint) -> Result<Geodesic, Hyp2Error> {
    if p == q {
        return Err(Hyp2Error::CoincidentPoints);
    }
    // Normalize p to i; the geodesic through i toward q' has endpoints on the
    // unit circle image, which is computed exactly in the disk model.
    let to_p = affine_to(p);
    let q0 = to_p.inverse().apply(q);
    let dir = direction_at(HPoint::i(), q0);
    let g0 = Geodesic {
        p_minus: unit_direction_endpoint(dir + PI),
        p_plus: unit_direction_endpoint(dir),
    };
    Ok(to_p.apply_geodesic(&g0))
}

/// The boundary point reached from `i` along the geodesic ray leaving with
/// tangent angle `direction`.
fn unit_direction_endpoint(direction: f64) -> BoundaryPoint {
    // In the disk the ray ends at e^{i(direction - π/2)}; the inverse Cayley
    // map sends e^{iφ} to -cot(φ/2).
    let (s, c) = (0.5 * (direction - FRAC_PI_2)).sin_cos();
    BoundaryPoint::new(-c, s).expect("nonzero pair")
}

/// Euclidean angle of the unit tangent at `from` of the geodesic ray toward
/// `to`. Since the model is conformal this is also the Riemannian direction.
pub fn direction_at(from: HPoint, to: HPoint) -> f64 {
    let z = Complex64::new((to.x - from.x) / from.y, to.y / from.y);
    let w = (z - Complex64::i()) / (z + Complex64::i());
    w.arg() + FRAC_PI_2
}

/// The point at distance `d` from `p` along the geodesic leaving with
/// tangent angle `direction`.
pub fn point_along(p: HPoint, direction: f64, d: f64) -> HPoint {
    let w = Complex64::from_polar((0.5 * d).tanh(), direction - FRAC_PI_2);
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::i() * (one + w) / (one - w);
    HPoint::from_complex(Complex64::new(p.x + p.y * z.re, p.y * z.im))
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Unsigned angle in `[0, π]` at `vertex` between the rays toward `a` and `b`.
pub fn angle_at(vertex: HPoint, a: HPoint, b: HPoint) -> Result<f64, Hyp2Error> {
    if a == vertex || b == vertex {
        return Err(Hyp2Error::CoincidentPoints);
    }
    Ok(wrap_angle(direction_at(vertex, b) - direction_at(vertex, a)).abs())
}

/// Counterclockwise angle in `(-π, π]` at `vertex` from the ray toward `a`
/// to the ray toward `b`.
pub fn signed_angle_at(vertex: HPoint, a: HPoint, b: HPoint) -> Result<f64, Hyp2Error> {
    if a == vertex || b == vertex {
        return Err(Hyp2Error::CoincidentPoints);
    }
    Ok(wrap_angle(direction_at(vertex, b) - direction_at(vertex, a)))
}

/// Distance from `p` to the complete geodesic `g`, and the foot of the
/// perpendicular.
pub fn dist_to_geodesic(p: HPoint, g: &Geodesic) -> (f64, HPoint) {
    let n = Isometry2::normalizing(g);
    let q = n.apply(p);
    let d = (q.x.abs() / q.y).asinh();
    let foot = HPoint {
        x: 0.0,
        y: q.x.hypot(q.y),
    };
    (d, n.inverse().apply(foot))
}

/// Hyperbolic translation of length `|l|` along `g`, toward `g.p_plus` when
/// `l > 0`.
pub fn translation_along(g: &Geodesic, l: f64) -> Isometry2 {
    let n = Isometry2::normalizing(g);
    let e = (0.5 * l).exp();
    let diag = Isometry2::canonical([e, 0.0, 0.0, 1.0 / e]);
    n.inverse() * diag * n
}

/// Rotation about `p` by `phi`, counterclockwise on tangent vectors.
pub fn rotation_about(p: HPoint, phi: f64) -> Isometry2 {
    let (s, c) = (0.5 * phi).sin_cos();
    let r = Isometry2::canonical([c, s, -s, c]);
    let t = affine_to(p);
    t * r * t.inverse()
}

/// A point of `C ∪ {∞}` as a projective pair `num/den`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedComplex {
    pub num: Complex64,
    pub den: Complex64,
}

impl ExtendedComplex {
    pub fn new(num: Complex64, den: Complex64) -> Self {
        Self { num, den }
    }

    pub fn finite(z: Complex64) -> Self {
        Self::new(z, Complex64::new(1.0, 0.0))
    }

    pub fn real(x: f64) -> Self {
        Self::finite(Complex64::new(x, 0.0))
    }

    pub fn infinity() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self) -> f64 {
        self.num.norm().max(self.den.norm())
    }

    pub fn is_infinite(&self) -> bool {
        self.den.norm() <= 1e-15 * self.num.norm()
    }

    /// The finite value, or `None` at ∞.
    pub fn value(&self) -> Option<Complex64> {
        (self.den != Complex64::new(0.0, 0.0)).then(|| self.num / self.den)
    }

    /// Scale-free projective separation `|z w' - z' w| / (|(z,w)| |(z',w')|)`,
    /// the sine of the chordal angle between the two points.
    pub fn separation(&self, other: &Self) -> f64 {
        let n1 = (self.num.norm_sqr() + self.den.norm_sqr()).sqrt();
        let n2 = (other.num.norm_sqr() + other.den.norm_sqr()).sqrt();
        (self.num * other.den - other.num * self.den).norm() / (n1 * n2)
    }

    /// Image under the Möbius map of the complex matrix `((a, b), (c, d))`.
    pub fn mobius(&self, m: [[Complex64; 2]; 2]) -> Self {
        Self::new(
            m[0][0] * self.num + m[0][1] * self.den,
            m[1][0] * self.num + m[1][1] * self.den,
        )
    }
}

/// `[z1 : z2 : z3 : z4] = (z1 - z3)(z2 - z4) / ((z2 - z3)(z1 - z4))`, with
/// every difference taken projectively so that ∞ needs no special case.
pub fn cross_ratio(
    z1: ExtendedComplex,
    z2: ExtendedComplex,
    z3: ExtendedComplex,
    z4: ExtendedComplex,
) -> Result<ExtendedComplex, Hyp2Error> {
    let diff = |p: &ExtendedComplex, q: &ExtendedComplex| p.num * q.den - q.num * p.den;
    let num = diff(&z1, &z3) * diff(&z2, &z4);
    let den = diff(&z2, &z3) * diff(&z1, &z4);
    let scale = z1.scale() * z2.scale() * z3.scale() * z4.scale();
    let tiny = 1e-15 * scale * scale;
    if num.norm() <= tiny && den.norm() <= tiny {
        return Err(Hyp2Error::DegenerateCrossRatio);
    }
    Ok(ExtendedComplex::new(num, den))
}
