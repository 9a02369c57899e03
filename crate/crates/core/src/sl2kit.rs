//! Infinitesimal isometries of hyperbolic 3-space as traceless complex 2×2
//! matrices.
//!
//! The Killing form `B(u, v) = 4 tr(uv)` relates the algebra to the geometry
//! of axes: `B(u,v)² / (B(u,u) B(v,v))` is the squared hyperbolic cosine of
//! the complex distance between the axes of two non-parabolic elements, and
//! for parabolic elements it is expressed through cross-ratios of boundary
//! points. Each identity has a `check_*` function computing the residual
//! between the algebraic side and an independent geometric evaluation.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::hyp2::{cross_ratio, ExtendedComplex, Hyp2Error};

/// Relative threshold below which `B(u,u)` counts as zero.
pub const PARABOLIC_TOL: f64 = 1e-9;

/// Separation below which two boundary points are treated as equal.
pub const POINT_TOL: f64 = 1e-9;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Sl2Error {
    #[error("matrix is not traceless (trace {0})")]
    NotTraceless(C),
    #[error("matrix has determinant {0}, expected 1")]
    InvalidGroupElement(C),
    #[error("expected a nonzero non-parabolic element")]
    ParabolicInput,
    #[error("expected a parabolic element")]
    NotParabolic,
    #[error("geodesics share exactly one endpoint; distance 0 with undefined angle")]
    Asymptotic,
    #[error("B(u, v) vanishes: the parabolic fixed point is an endpoint of the axis")]
    VanishingPairing,
    #[error("parabolic fixed point coincides with an axis endpoint")]
    FixedPointOnAxis,
    #[error("parabolic elements share their fixed point")]
    SharedFixedPoint,
    #[error("parameter t must be nonzero")]
    ZeroParameter,
    #[error(transparent)]
    Geometry(#[from] Hyp2Error),
}

/// The traceless matrix `((a, b), (c, -a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2Element {
    pub a: C,
    pub b: C,
    pub c: C,
}

impl Sl2Element {
    pub fn new(a: C, b: C, c: C) -> Self {
        Self { a, b, c }
    }

    pub fn real(a: f64, b: f64, c: f64) -> Self {
        Self::new(C::new(a, 0.0), C::new(b, 0.0), C::new(c, 0.0))
    }

    /// Accepts a full 2×2 matrix, rejecting it unless `|trace| < tol`.
    pub fn from_matrix(m: [[C; 2]; 2], tol: f64) -> Result<Self, Sl2Error> {
        let tr = m[0][0] + m[1][1];
        if tr.norm() >= tol {
            return Err(Sl2Error::NotTraceless(tr));
        }
        Ok(Self::new(0.5 * (m[0][0] - m[1][1]), m[0][1], m[1][0]))
    }

    pub fn matrix(&self) -> [[C; 2]; 2] {
        [[self.a, self.b], [self.c, -self.a]]
    }

    /// Squared Frobenius-type norm `|a|² + |b|² + |c|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr()
    }

    pub fn scaled(&self, s: C) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s)
    }

    /// `a² + bc = -det`, the scalar with `u² = (a² + bc) I`.
    pub fn square_scalar(&self) -> C {
        self.a * self.a + self.b * self.c
    }

    /// The infinitesimal isometry whose flow has complex length `t·length`
    /// along the oriented axis from `p_minus` to `p_plus`: translation by
    /// `Re(length)` toward `p_plus` and rotation by `Im(length)`.
    pub fn axial(p_minus: ExtendedComplex, p_plus: ExtendedComplex, length: C) -> Self {
        let g = Sl2Group::from_unnormalized([[p_plus.num, p_minus.num], [p_plus.den, p_minus.den]]);
        let h = 0.5 * length;
        g.conjugate(&Sl2Element::new(h, ZERO, ZERO))
    }

    /// The parabolic element fixing `fixed`, conjugate to `((0, s), (0, 0))`
    /// by a unitary change of basis.
    pub fn parabolic(fixed: ExtendedComplex, s: C) -> Self {
        let n = (fixed.num.norm_sqr() + fixed.den.norm_sqr()).sqrt();
        let (p, q) = (fixed.num / n, fixed.den / n);
        let g = Sl2Group {
            m: [[p, -q.conj()], [q, p.conj()]],
        };
        g.conjugate(&Sl2Element::new(ZERO, s, ZERO))
    }

    /// `exp(t u) = cosh(tλ) I + sinh(tλ)/λ · u` with `λ² = a² + bc`.
    pub fn exp(&self, t: f64) -> Sl2Group {
        let lam = self.square_scalar().sqrt();
        let x = lam * t;
        let ch = x.cosh();
        // sinh(x)/λ, with the series near λ = 0
        let sh = if x.norm() < 1e-4 {
            let x2 = x * x;
            t * (ONE + x2 / 6.0 + x2 * x2 / 120.0)
        } else {
            x.sinh() / lam
        };
        Sl2Group {
            m: [
                [ch + sh * self.a, sh * self.b],
                [sh * self.c, ch - sh * self.a],
            ],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut c = || C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        Self::new(c(), c(), c())
    }
}

/// `B(u, v) = 8 a_u a_v + 4 b_u c_v + 4 c_u b_v`.
pub fn killing_form(u: &Sl2Element, v: &Sl2Element) -> C {
    8.0 * u.a * v.a + 4.0 * u.b * v.c + 4.0 * u.c * v.b
}

/// `4 tr(uv)` computed from the full matrix product.
pub fn four_trace(u: &Sl2Element, v: &Sl2Element) -> C {
    let (m, n) = (u.matrix(), v.matrix());
    let tr = m[0][0] * n[0][0] + m[0][1] * n[1][0] + m[1][0] * n[0][1] + m[1][1] * n[1][1];
    4.0 * tr
}

/// Principal value of `sqrt(B(u,u) / 2)`, with nonnegative real part.
pub fn complex_length(u: &Sl2Element) -> C {
    (0.5 * killing_form(u, u)).sqrt()
}

/// Axis data of an infinitesimal isometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisData {
    /// Loxodromic or elliptic: an invariant axis; the flow `exp(tu)`, `t > 0`,
    /// translates toward `p_plus` (or rotates positively about the axis
    /// oriented toward `p_plus`).
    Axis {
        p_minus: ExtendedComplex,
        p_plus: ExtendedComplex,
    },
    /// Parabolic: a single fixed point at infinity.
    Parabolic { fixed: ExtendedComplex },
    Zero,
}

impl AxisData {
    pub fn axis(&self) -> Option<ComplexGeodesic> {
        match *self {
            AxisData::Axis { p_minus, p_plus } => Some(ComplexGeodesic { p_minus, p_plus }),
            _ => None,
        }
    }

    pub fn fixed_point(&self) -> Option<ExtendedComplex> {
        match *self {
            AxisData::Parabolic { fixed } => Some(fixed),
            _ => None,
        }
    }
}

/// Eigendirection of `u` for eigenvalue `lam`, as a boundary point.
fn eigendirection(u: &Sl2Element, lam: C) -> ExtendedComplex {
    let v1 = (u.b, lam - u.a);
    let v2 = (u.a + lam, u.c);
    if v1.0.norm_sqr() + v1.1.norm_sqr() >= v2.0.norm_sqr() + v2.1.norm_sqr() {
        ExtendedComplex::new(v1.0, v1.1)
    } else {
        ExtendedComplex::new(v2.0, v2.1)
    }
}

pub fn classify(u: &Sl2Element) -> AxisData {
    let n2 = u.norm_sqr();
    if n2 == 0.0 {
        return AxisData::Zero;
    }
    let bilinear = killing_form(u, u);
    if bilinear.norm() < PARABOLIC_TOL * n2 {
        return AxisData::Parabolic {
            fixed: eigendirection(u, ZERO),
        };
    }
    let lam = u.square_scalar().sqrt();
    AxisData::Axis {
        p_minus: eigendirection(u, -lam),
        p_plus: eigendirection(u, lam),
    }
}

/// An oriented geodesic of hyperbolic 3-space given by its endpoints on
/// `C ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGeodesic {
    pub p_minus: ExtendedComplex,
    pub p_plus: ExtendedComplex,
}

impl ComplexGeodesic {
    pub fn new(p_minus: ExtendedComplex, p_plus: ExtendedComplex) -> Self {
        Self { p_minus, p_plus }
    }

    pub fn mobius(&self, g: &Sl2Group) -> Self {
        Self::new(g.apply(self.p_minus), g.apply(self.p_plus))
    }
}

/// Complex distance between oriented geodesics: real part the metric
/// distance, imaginary part the rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDistance {
    value: C,
}

impl ComplexDistance {
    /// Normalizes to `Re ≥ 0`, `Im ∈ (-π, π]`; both operations fix `cosh`.
    pub fn new(d: C) -> Self {
        let mut d = if d.re < 0.0 { -d } else { d };
        let mut im = d.im.rem_euclid(2.0 * PI);
        if im > PI {
            im -= 2.0 * PI;
        }
        d.im = im;
        Self { value: d }
    }

    pub fn value(&self) -> C {
        self.value
    }

    pub fn cosh(&self) -> C {
        self.value.cosh()
    }
}

/// Complex distance from `g1` to `g2`, read off after a Möbius map sending
/// `g1` to the oriented axis `(0, ∞)`. With the image endpoints `q1, q2` of
/// `g2`, a complex dilation along the axis carries `g2` to `(-k, k)` where
/// `k = (1 + s)/(1 - s)`, `s² = q1/q2`, and `cosh d = (q2 + q1)/(q2 - q1)`.
pub fn complex_distance(g1: &ComplexGeodesic, g2: &ComplexGeodesic) -> Result<ComplexDistance, Sl2Error> {
    let (u, v) = (g1.p_minus, g1.p_plus);
    let normal = [[u.den, -u.num], [v.den, -v.num]];
    let q1 = g2.p_minus.mobius(normal);
    let q2 = g2.p_plus.mobius(normal);
    let zero = ExtendedComplex::real(0.0);
    let inf = ExtendedComplex::infinity();
    let at = |q: &ExtendedComplex, r: &ExtendedComplex| q.separation(r) < POINT_TOL;
    let shared = [&q1, &q2]
        .iter()
        .filter(|q| at(q, &zero) || at(q, &inf))
        .count();
    let zeta = if shared == 2 {
        if at(&q1, &zero) {
            ONE
        } else {
            -ONE
        }
    } else if shared == 1 {
        return Err(Sl2Error::Asymptotic);
    } else {
        let (z1, w1, z2, w2) = (q1.num, q1.den, q2.num, q2.den);
        (z2 * w1 + z1 * w2) / (z2 * w1 - z1 * w2)
    };
    Ok(ComplexDistance::new(zeta.acosh()))
}

fn require_axis(u: &Sl2Element) -> Result<ComplexGeodesic, Sl2Error> {
    classify(u).axis().ok_or(Sl2Error::ParabolicInput)
}

fn require_fixed(u: &Sl2Element) -> Result<ExtendedComplex, Sl2Error> {
    classify(u).fixed_point().ok_or(Sl2Error::NotParabolic)
}

/// `|B(u,v)² / (B(u,u) B(v,v)) - cosh² d(A(u), A(v))|` for nonzero
/// non-parabolic `u, v`, relative to `max(1, |B(u,v)² / (B(u,u) B(v,v))|)`.
pub fn check_killing_distance(u: &Sl2Element, v: &Sl2Element) -> Result<f64, Sl2Error> {
    let (au, av) = (require_axis(u)?, require_axis(v)?);
    let ratio = killing_form(u, v).powi(2) / (killing_form(u, u) * killing_form(v, v));
    let cosh2 = match complex_distance(&au, &av) {
        Ok(d) => d.cosh().powi(2),
        // asymptotic axes: distance zero
        Err(Sl2Error::Asymptotic) => ONE,
        Err(e) => return Err(e),
    };
    Ok(relative(ratio, ratio - cosh2))
}

/// For infinitesimal rotations of angles `alpha, beta > 0` about oriented
/// axes, `|B(u,v) + 2 αβ cosh d(axis1, axis2)|` with the oriented distance,
/// relative to `max(1, |B(u,v)|)`.
pub fn check_oriented_rotations(
    alpha: f64,
    beta: f64,
    axis1: &ComplexGeodesic,
    axis2: &ComplexGeodesic,
) -> Result<f64, Sl2Error> {
    let u = Sl2Element::axial(axis1.p_minus, axis1.p_plus, C::new(0.0, alpha));
    let v = Sl2Element::axial(axis2.p_minus, axis2.p_plus, C::new(0.0, beta));
    let d = complex_distance(axis1, axis2)?;
    let b = killing_form(&u, &v);
    Ok(relative(b, b + 2.0 * alpha * beta * d.cosh()))
}

/// `|diff| / max(1, |reference|)`.
fn relative(reference: C, diff: C) -> f64 {
    diff.norm() / reference.norm().max(1.0)
}

fn pairing_vanishes(u: &Sl2Element, v: &Sl2Element) -> bool {
    killing_form(u, v).norm() < PARABOLIC_TOL * (u.norm_sqr() * v.norm_sqr()).sqrt()
}

/// Outcome of the parabolic–loxodromic identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicLoxodromicCheck {
    pub pairing: C,
    /// `B(u,v) = 0` agrees with "fixed point of `u` is an endpoint of `A(v)`".
    pub endpoint_agreement: bool,
    /// `|B(u,v)²/B(v,v) - (8/t²)[p+ : e^{tu} p- : e^{tu} p+ : p-]|`, absent
    /// when the fixed point lies on the axis. Relative to `max(1, |B(u,v)²/B(v,v)|)`.
    pub residual: Option<f64>,
}

pub fn check_parabolic_loxodromic(
    u: &Sl2Element,
    v: &Sl2Element,
    t: f64,
) -> Result<ParabolicLoxodromicCheck, Sl2Error> {
    if t == 0.0 {
        return Err(Sl2Error::ZeroParameter);
    }
    let fixed = require_fixed(u)?;
    let axis = require_axis(v)?;
    let pairing = killing_form(u, v);
    let on_axis =
        fixed.separation(&axis.p_minus) < POINT_TOL || fixed.separation(&axis.p_plus) < POINT_TOL;
    let endpoint_agreement = pairing_vanishes(u, v) == on_axis;
    let residual = if on_axis {
        None
    } else {
        let flow = u.exp(t);
        let cr = cross_ratio(
            axis.p_plus,
            flow.apply(axis.p_minus),
            flow.apply(axis.p_plus),
            axis.p_minus,
        )?;
        let cr = cr.value().ok_or(Hyp2Error::DegenerateCrossRatio)?;
        let lhs = pairing * pairing / killing_form(v, v);
        Some(relative(lhs, lhs - 8.0 / (t * t) * cr))
    };
    Ok(ParabolicLoxodromicCheck {
        pairing,
        endpoint_agreement,
        residual,
    })
}

/// Outcome of the two-parabolic identities. The cross-ratio identity is
/// evaluated in two argument orders: `[A(v) : A(u) : e^{tu}A(v) : e^{tv}A(u)]`
/// (`swapped`), which is the order that holds, and `[A(u) : A(v) : ...]`
/// (`printed`), which is off by inversion of the cross-ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoParabolicCheck {
    pub pairing: C,
    pub fixed_point_agreement: bool,
    /// Both residuals are relative to `max(1, |B(u,v)|)`.
    pub swapped_residual: Option<f64>,
    pub printed_residual: Option<f64>,
}

pub fn check_two_parabolics(u: &Sl2Element, v: &Sl2Element, t: f64) -> Result<TwoParabolicCheck, Sl2Error> {
    if t == 0.0 {
        return Err(Sl2Error::ZeroParameter);
    }
    let (fu, fv) = (require_fixed(u)?, require_fixed(v)?);
    let pairing = killing_form(u, v);
    let same = fu.separation(&fv) < POINT_TOL;
    let fixed_point_agreement = pairing_vanishes(u, v) == same;
    let (swapped_residual, printed_residual) = if same {
        (None, None)
    } else {
        let eu = u.exp(t).apply(fv);
        let ev = v.exp(t).apply(fu);
        let k = 4.0 / (t * t);
        let value = |z: ExtendedComplex| z.value().ok_or(Sl2Error::Geometry(Hyp2Error::DegenerateCrossRatio));
        let swapped = value(cross_ratio(fv, fu, eu, ev)?)?;
        let printed = value(cross_ratio(fu, fv, eu, ev)?)?;
        (
            Some(relative(pairing, pairing - k * swapped)),
            Some(relative(pairing, pairing - k * printed)),
        )
    };
    Ok(TwoParabolicCheck {
        pairing,
        fixed_point_agreement,
        swapped_residual,
        printed_residual,
    })
}

/// `B(u,v)² / B(v,v)` for parabolic `u` and non-parabolic `v`.
pub fn horosphere_invariant(u: &Sl2Element, v: &Sl2Element) -> Result<C, Sl2Error> {
    require_fixed(u)?;
    require_axis(v)?;
    if pairing_vanishes(u, v) {
        return Err(Sl2Error::VanishingPairing);
    }
    let b = killing_form(u, v);
    Ok(b * b / killing_form(v, v))
}

/// Geometric comparison of two axes seen from the fixed point of a parabolic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorosphereCheck {
    /// Both axes are tangent to one horosphere centred at the fixed point.
    pub same_horosphere: bool,
    /// Their tangent directions are parallel in the horosphere's Euclidean
    /// structure.
    pub parallel: bool,
}

/// Sends the fixed point of `u` to ∞; the axes of `v` and `w` become
/// Euclidean semicircles whose tops lie on horospheres at height equal to
/// their radii, with half-diameter vectors `h_v`, `h_w`.
pub fn horosphere_geometry(
    u: &Sl2Element,
    v: &Sl2Element,
    w: &Sl2Element,
    tol: f64,
) -> Result<HorosphereCheck, Sl2Error> {
    let fixed = require_fixed(u)?;
    let n = (fixed.num.norm_sqr() + fixed.den.norm_sqr()).sqrt();
    let (p, q) = (fixed.num / n, fixed.den / n);
    // unitary map sending ∞ to the fixed point; its inverse sends it to ∞
    let g = Sl2Group {
        m: [[p, -q.conj()], [q, p.conj()]],
    };
    let gi = g.inverse();
    let half = |x: &Sl2Element| -> Result<C, Sl2Error> {
        let axis = require_axis(x)?.mobius(&gi);
        let a = axis.p_minus.value().ok_or(Sl2Error::FixedPointOnAxis)?;
        let b = axis.p_plus.value().ok_or(Sl2Error::FixedPointOnAxis)?;
        Ok(0.5 * (b - a))
    };
    let (hv, hw) = (half(v)?, half(w)?);
    let (rv, rw) = (hv.norm(), hw.norm());
    Ok(HorosphereCheck {
        same_horosphere: (rv - rw).abs() <= tol * rv.max(rw),
        parallel: (hv * hw.conj()).im.abs() <= tol * rv * rw,
    })
}

/// An element of `SL2(C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2Group {
    pub m: [[C; 2]; 2],
}

impl Sl2Group {
    pub fn new(m: [[C; 2]; 2]) -> Result<Self, Sl2Error> {
        let g = Self { m };
        let det = g.det();
        let scale = m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().max(1.0);
        if (det - ONE).norm() > 1e-12 * scale {
            return Err(Sl2Error::InvalidGroupElement(det));
        }
        Ok(g)
    }

    /// Divides by a square root of the determinant.
    pub fn from_unnormalized(m: [[C; 2]; 2]) -> Self {
        let s = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).sqrt().inv();
        Self {
            m: [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]],
        }
    }

    pub fn identity() -> Self {
        Self {
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    pub fn det(&self) -> C {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C {
        self.m[0][0] + self.m[1][1]
    }

    /// Inverse assuming determinant one.
    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self {
            m: [[d, -b], [-c, a]],
        }
    }

    pub fn apply(&self, z: ExtendedComplex) -> ExtendedComplex {
        z.mobius(self.m)
    }

    /// `g u g⁻¹`.
    pub fn conjugate(&self, u: &Sl2Element) -> Sl2Element {
        let [[p, q], [r, s]] = self.m;
        let [[a, b], [c, _]] = u.matrix();
        // g u
        let (m00, m01, m10, m11) = (p * a + q * c, p * b - q * a, r * a + s * c, r * b - s * a);
        // (g u) g⁻¹ with g⁻¹ = ((s, -q), (-r, p))
        let n00 = m00 * s - m01 * r;
        let n01 = -m00 * q + m01 * p;
        let n10 = m10 * s - m11 * r;
        let n11 = -m10 * q + m11 * p;
        Sl2Element::new(0.5 * (n00 - n11), n01, n10)
    }

    /// Frobenius distance to another matrix.
    pub fn distance(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut c = || C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m = [[c(), c()], [c(), c()]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.norm() > 0.1 {
                return Self::from_unnormalized(m);
            }
        }
    }
}

impl Mul for Sl2Group {
    type Output = Sl2Group;

    fn mul(self, rhs: Sl2Group) -> Sl2Group {
        let (a, b) = (self.m, rhs.m);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Sl2Group {
            m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }
}

/// Largest residuals over a randomized run of every identity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BatteryReport {
    pub trials: usize,
    pub killing_distance: f64,
    pub oriented_rotations: f64,
    pub parabolic_loxodromic: f64,
    pub two_parabolics_swapped: f64,
    /// Smallest printed-order residual seen; bounded away from zero.
    pub two_parabolics_printed_min: f64,
    pub ad_invariance: f64,
    /// Every boolean characterization (vanishing pairing, horosphere
    /// tangency) agreed with its geometric counterpart.
    pub characterizations_agree: bool,
}

fn random_boundary_point<R: Rng + ?Sized>(rng: &mut R) -> ExtendedComplex {
    ExtendedComplex::finite(C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
}

/// Runs every identity on `trials` random configurations and records the
/// worst residuals. Elements are built from random axes and complex lengths
/// with `|B(u,u)|` bounded away from zero.
pub fn identity_battery<R: Rng + ?Sized>(rng: &mut R, trials: usize) -> Result<BatteryReport, Sl2Error> {
    let mut rep = BatteryReport {
        trials,
        two_parabolics_printed_min: f64::INFINITY,
        characterizations_agree: true,
        ..Default::default()
    };
    let length = |rng: &mut R| C::new(rng.gen_range(0.2..2.0), rng.gen_range(-PI..PI));
    for _ in 0..trials {
        let (a1, a2, b1, b2) = (
            random_boundary_point(rng),
            random_boundary_point(rng),
            random_boundary_point(rng),
            random_boundary_point(rng),
        );
        let u = Sl2Element::axial(a1, a2, length(rng));
        let v = Sl2Element::axial(b1, b2, length(rng));
        rep.killing_distance = rep.killing_distance.max(check_killing_distance(&u, &v)?);

        let g = Sl2Group::random(rng);
        let b0 = killing_form(&u, &v);
        let b1c = killing_form(&g.conjugate(&u), &g.conjugate(&v));
        rep.ad_invariance = rep.ad_invariance.max((b0 - b1c).norm() / b0.norm().max(1.0));

        let (alpha, beta) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let r = check_oriented_rotations(
            alpha,
            beta,
            &ComplexGeodesic::new(a1, a2),
            &ComplexGeodesic::new(b1, b2),
        )?;
        rep.oriented_rotations = rep.oriented_rotations.max(r);

        let fixed = random_boundary_point(rng);
        let p = Sl2Element::parabolic(fixed, C::new(rng.gen_range(0.3..1.5), rng.gen_range(-1.0..1.0)));
        for t in [0.01, 0.1, 1.0, 10.0] {
            let c = check_parabolic_loxodromic(&p, &v, t)?;
            rep.characterizations_agree &= c.endpoint_agreement;
            rep.parabolic_loxodromic = rep.parabolic_loxodromic.max(c.residual.unwrap_or(0.0));
        }
        // parabolic fixing an endpoint of the axis
        let p_on = Sl2Element::parabolic(b1, ONE);
        rep.characterizations_agree &= check_parabolic_loxodromic(&p_on, &v, 1.0)?.endpoint_agreement;

        let q = Sl2Element::parabolic(random_boundary_point(rng), C::new(rng.gen_range(0.3..1.5), 0.4));
        for t in [0.1, 0.7, 3.0] {
            let c = check_two_parabolics(&p, &q, t)?;
            rep.characterizations_agree &= c.fixed_point_agreement;
            rep.two_parabolics_swapped = rep.two_parabolics_swapped.max(c.swapped_residual.unwrap_or(0.0));
            if let Some(pr) = c.printed_residual {
                rep.two_parabolics_printed_min = rep.two_parabolics_printed_min.min(pr);
            }
        }
        let q_same = Sl2Element::parabolic(fixed, C::new(0.5, -0.5));
        rep.characterizations_agree &= check_two_parabolics(&p, &q_same, 1.0)?.fixed_point_agreement;

        rep.characterizations_agree &= horosphere_trial(rng, &p, &v)?;
    }
    Ok(rep)
}

/// Builds `w` either as a horosphere-preserving image of `v` (a parabolic
/// about the fixed point of `p`, optionally composed with a half-turn) or
/// as an unrelated element, then checks that equality of the invariants
/// coincides with the geometric tangency test.
fn horosphere_trial<R: Rng + ?Sized>(rng: &mut R, p: &Sl2Element, v: &Sl2Element) -> Result<bool, Sl2Error> {
    let fixed = require_fixed(p)?;
    let w = if rng.gen_bool(0.5) {
        let shift = Sl2Element::parabolic(fixed, C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        let mut g = shift.exp(1.0);
        if rng.gen_bool(0.5) {
            // half-turn about an axis through the fixed point reverses the
            // axis direction but keeps it parallel
            let other = random_boundary_point(rng);
            g = g * Sl2Element::axial(fixed, other, C::new(0.0, PI)).exp(1.0);
        }
        g.conjugate(v)
    } else {
        Sl2Element::axial(random_boundary_point(rng), random_boundary_point(rng), C::new(1.0, 0.3))
    };
    let iv = horosphere_invariant(p, v)?;
    let iw = horosphere_invariant(p, &w)?;
    let equal = (iv - iw).norm() <= 1e-8 * iv.norm().max(iw.norm());
    let geo = horosphere_geometry(p, v, &w, 1e-8)?;
    Ok(equal == (geo.same_horosphere && geo.parallel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag() -> Sl2Element {
        Sl2Element::real(1.0, 0.0, 0.0)
    }

    fn axis12() -> Sl2Element {
        Sl2Element::real(-3.0, 4.0, -2.0)
    }

    fn upper() -> Sl2Element {
        Sl2Element::real(0.0, 1.0, 0.0)
    }

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn killing_form_examples() {
        assert_eq!(killing_form(&diag(), &diag()), C::new(8.0, 0.0));
        let lower = Sl2Element::real(0.0, 0.0, 1.0);
        assert_eq!(killing_form(&upper(), &lower), C::new(4.0, 0.0));
        assert_eq!(killing_form(&diag(), &Sl2Element::real(0.0, 1.0, 1.0)), C::new(0.0, 0.0));
        assert_eq!(killing_form(&diag(), &axis12()), C::new(-24.0, 0.0));
    }

    #[test]
    fn complex_length_examples() {
        assert!(close(complex_length(&diag()), C::new(2.0, 0.0), 1e-15));
        let rot = Sl2Element::new(C::new(0.0, 0.5), ZERO, ZERO);
        assert!(close(complex_length(&rot), C::new(0.0, 1.0), 1e-15));
        assert_eq!(complex_length(&upper()), ZERO);
    }

    #[test]
    fn exp_of_diagonal_translates_by_twice_t() {
        let g = diag().exp(0.3);
        assert!(close(g.m[0][0], C::new(0.3f64.exp(), 0.0), 1e-15));
        let z = g.apply(ExtendedComplex::finite(C::new(0.0, 1.0))).value().unwrap();
        assert_abs_diff_eq!(z.im.ln(), 0.6, epsilon = 1e-14);
        // parabolic flow is z ↦ z + t
        let z = upper().exp(2.5).apply(ExtendedComplex::real(1.0)).value().unwrap();
        assert!(close(z, C::new(3.5, 0.0), 1e-15));
    }

    #[test]
    fn classify_examples() {
        match classify(&diag()) {
            AxisData::Axis { p_minus, p_plus } => {
                assert!(p_minus.value().unwrap().norm() < 1e-15);
                assert!(p_plus.is_infinite());
            }
            other => panic!("{other:?}"),
        }
        match classify(&upper()) {
            AxisData::Parabolic { fixed } => assert!(fixed.is_infinite()),
            other => panic!("{other:?}"),
        }
        match classify(&axis12()) {
            AxisData::Axis { p_minus, p_plus } => {
                let mut e = [p_minus.value().unwrap().re, p_plus.value().unwrap().re];
                e.sort_by(f64::total_cmp);
                assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
                assert_abs_diff_eq!(e[1], 2.0, epsilon = 1e-14);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(classify(&Sl2Element::real(0.0, 0.0, 0.0)), AxisData::Zero);
    }

    #[test]
    fn axial_has_requested_axis_and_length() {
        let a = ExtendedComplex::finite(C::new(0.4, -1.0));
        let b = ExtendedComplex::finite(C::new(-2.0, 0.5));
        let l = C::new(0.8, 1.1);
        let u = Sl2Element::axial(a, b, l);
        assert!(close(complex_length(&u), l, 1e-12));
        match classify(&u) {
            AxisData::Axis { p_minus, p_plus } => {
                assert!(p_minus.separation(&a) < 1e-12);
                assert!(p_plus.separation(&b) < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    fn geo(a: f64, b: f64) -> ComplexGeodesic {
        let p = |x: f64| {
            if x.is_infinite() {
                ExtendedComplex::infinity()
            } else {
                ExtendedComplex::real(x)
            }
        };
        ComplexGeodesic::new(p(a), p(b))
    }

    #[test]
    fn complex_distance_examples() {
        let d = complex_distance(&geo(0.0, f64::INFINITY), &geo(-1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(d.value().re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.value().im.abs(), PI / 2.0, epsilon = 1e-15);
        let d = complex_distance(&geo(0.0, f64::INFINITY), &geo(0.0, f64::INFINITY)).unwrap();
        assert_eq!(d.value(), ZERO);
        let d = complex_distance(&geo(0.0, f64::INFINITY), &geo(1.0, 2.0)).unwrap();
        assert_abs_diff_eq!(d.value().re, 3f64.acosh(), epsilon = 1e-14);
        assert_abs_diff_eq!(d.value().im, 0.0, epsilon = 1e-14);
        assert_eq!(
            complex_distance(&geo(0.0, f64::INFINITY), &geo(0.0, 1.0)),
            Err(Sl2Error::Asymptotic)
        );
    }

    #[test]
    fn complex_distance_independent_of_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g1 = ComplexGeodesic::new(ExtendedComplex::real(0.3), ExtendedComplex::finite(C::new(1.0, 2.0)));
        let g2 = ComplexGeodesic::new(ExtendedComplex::finite(C::new(-1.0, 0.2)), ExtendedComplex::real(4.0));
        let d = complex_distance(&g1, &g2).unwrap();
        for _ in 0..20 {
            let h = Sl2Group::random(&mut rng);
            let e = complex_distance(&g1.mobius(&h), &g2.mobius(&h)).unwrap();
            assert!(close(d.value(), e.value(), 1e-10));
        }
    }

    #[test]
    fn killing_distance_examples() {
        assert!(check_killing_distance(&diag(), &axis12()).unwrap() < 1e-12);
        assert!(check_killing_distance(&axis12(), &axis12()).unwrap() < 1e-12);
        assert!(check_killing_distance(&diag(), &Sl2Element::real(0.0, 1.0, 1.0)).unwrap() < 1e-12);
        assert_eq!(check_killing_distance(&upper(), &diag()), Err(Sl2Error::ParabolicInput));
    }

    #[test]
    fn oriented_rotation_examples() {
        let g = geo(0.0, f64::INFINITY);
        assert!(check_oriented_rotations(0.7, 0.7, &g, &g).unwrap() < 1e-14);
        let u = Sl2Element::axial(g.p_minus, g.p_plus, C::new(0.0, 0.7));
        assert!(close(killing_form(&u, &u), C::new(-2.0 * 0.49, 0.0), 1e-14));
        assert!(check_oriented_rotations(0.7, 1.3, &g, &geo(-1.0, 1.0)).unwrap() < 1e-14);
        let w = Sl2Element::axial(ExtendedComplex::real(1.0), ExtendedComplex::real(2.0), C::new(0.0, 1.3));
        assert!(close(killing_form(&u, &w), C::new(-6.0 * 0.7 * 1.3, 0.0), 1e-12));
        assert!(check_oriented_rotations(0.7, 1.3, &g, &geo(1.0, 2.0)).unwrap() < 1e-12);
    }

    #[test]
    fn parabolic_loxodromic_examples() {
        let c = check_parabolic_loxodromic(&upper(), &diag(), 1.0).unwrap();
        assert_eq!(c.pairing, ZERO);
        assert!(c.endpoint_agreement);
        assert!(c.residual.is_none());
        for t in [0.01, 0.1, 1.0, 10.0] {
            let c = check_parabolic_loxodromic(&upper(), &axis12(), t).unwrap();
            assert_eq!(c.pairing, C::new(-8.0, 0.0));
            assert!(c.endpoint_agreement);
            assert!(c.residual.unwrap() < 1e-9, "t = {t}");
        }
        let scaled = upper().scaled(C::new(3.0, 0.0));
        let c = check_parabolic_loxodromic(&scaled, &axis12(), 0.5).unwrap();
        assert!(c.residual.unwrap() < 1e-9);
        assert_eq!(check_parabolic_loxodromic(&upper(), &axis12(), 0.0), Err(Sl2Error::ZeroParameter));
    }

    #[test]
    fn two_parabolic_examples() {
        let (x, y) = (2.0, 3.0);
        let u = Sl2Element::real(0.0, x, 0.0);
        let v = Sl2Element::real(0.0, 0.0, y);
        for t in [0.1, 0.5, 1.0, 4.0] {
            let c = check_two_parabolics(&u, &v, t).unwrap();
            assert!(close(c.pairing, C::new(4.0 * x * y, 0.0), 1e-15));
            assert!(c.fixed_point_agreement);
            assert!(c.swapped_residual.unwrap() < 1e-10);
        }
        // printed order gives 4/(t⁴ x y) instead of 4 x y
        let c = check_two_parabolics(&u, &v, 0.5).unwrap();
        let printed = 4.0 / (0.5f64.powi(4) * x * y);
        assert_abs_diff_eq!(c.printed_residual.unwrap(), (4.0 * x * y - printed).abs() / (4.0 * x * y), epsilon = 1e-10);
        let c = check_two_parabolics(&u, &u, 1.0).unwrap();
        assert_eq!(c.pairing, ZERO);
        assert!(c.fixed_point_agreement);
        assert!(c.swapped_residual.is_none());
    }

    #[test]
    fn two_parabolics_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = Sl2Element::real(0.0, 1.5, 0.0);
        let v = Sl2Element::real(0.0, 0.0, 0.7);
        for _ in 0..20 {
            let g = Sl2Group::random(&mut rng);
            let c = check_two_parabolics(&g.conjugate(&u), &g.conjugate(&v), 0.8).unwrap();
            assert!(c.swapped_residual.unwrap() < 1e-10);
        }
    }

    #[test]
    fn horosphere_examples() {
        let v = |a: f64, b: f64| Sl2Element::axial(ExtendedComplex::real(a), ExtendedComplex::real(b), ONE);
        let i1 = horosphere_invariant(&upper(), &v(1.0, 2.0)).unwrap();
        assert!(close(i1, C::new(8.0, 0.0), 1e-12));
        let i2 = horosphere_invariant(&upper(), &v(5.0, 6.0)).unwrap();
        assert!(close(i2, C::new(8.0, 0.0), 1e-12));
        let i3 = horosphere_invariant(&upper(), &v(0.0, 4.0)).unwrap();
        assert!(close(i3, C::new(0.5, 0.0), 1e-12));
        let g = horosphere_geometry(&upper(), &v(1.0, 2.0), &v(5.0, 6.0), 1e-8).unwrap();
        assert!(g.same_horosphere && g.parallel);
        let g = horosphere_geometry(&upper(), &v(1.0, 2.0), &v(0.0, 4.0), 1e-8).unwrap();
        assert!(!g.same_horosphere);
        assert_eq!(horosphere_invariant(&upper(), &diag()), Err(Sl2Error::VanishingPairing));
    }

    #[test]
    fn from_matrix_rejects_trace() {
        let m = [[ONE, ZERO], [ZERO, ONE]];
        assert!(matches!(Sl2Element::from_matrix(m, 1e-10), Err(Sl2Error::NotTraceless(_))));
    }

    #[test]
    fn battery_small_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rep = identity_battery(&mut rng, 50).unwrap();
        assert!(rep.killing_distance < 1e-9, "{rep:?}");
        assert!(rep.oriented_rotations < 1e-9, "{rep:?}");
        assert!(rep.parabolic_loxodromic < 1e-9, "{rep:?}");
        assert!(rep.two_parabolics_swapped < 1e-10, "{rep:?}");
        assert!(rep.characterizations_agree, "{rep:?}");
    }
}
