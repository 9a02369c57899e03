//! Convex hyperbolic polygons with prescribed interior angles.
//!
//! A polygon is developed from its edge lengths: start at `i` heading in
//! direction 0, walk each edge, then turn left by the exterior angle. The
//! composed frame (the *defect*) is `±I` exactly when the walk closes up.
//! Fixing `n - 3` lengths and solving the remaining three against the
//! defect parametrizes the `(n - 3)`-dimensional space of polygons with the
//! given angles.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde_json::{json, Value};
use thiserror::Error;

use crate::format::{array17, num17};
use crate::hyp2::{angle_at, dist, dist_to_geodesic, geodesic_through, HPoint, Isometry2};

/// Tolerance between prescribed and recomputed interior angles.
pub const ANGLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolygonError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("angle {index} = {angle} is outside (0, pi)")]
    AngleOutOfRange { index: usize, angle: f64 },
    #[error("angle {index} = {angle} exceeds pi/2 in strict mode")]
    NotStrict { index: usize, angle: f64 },
    #[error("not hyperbolic: sum of (pi - angle) = {sum} must exceed 2 pi")]
    NotHyperbolic { sum: f64 },
    #[error("weight {index} = {weight} is not positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge length {index} = {length} is not positive")]
    NonPositiveLength { index: usize, length: f64 },
    #[error("closing iteration did not converge in {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("closing iteration produced a degenerate length {length:e}")]
    DegenerateLength { length: f64 },
    #[error("closing Jacobian is ill-conditioned for every choice of solved edges")]
    IllConditioned,
    #[error("the closed chain is not a convex counterclockwise polygon")]
    NonConvex,
    #[error("recomputed angle {index} = {found} differs from prescribed {expected}")]
    AngleMismatch { index: usize, expected: f64, found: f64 },
    #[error("point is not strictly inside the polygon")]
    PointOutside,
    #[error("malformed polygon JSON: {0}")]
    Json(String),
}

/// Interior angles `θ_1, ..., θ_n` of a hyperbolic polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSpec {
    angles: Vec<f64>,
    strict: bool,
}

impl AngleSpec {
    /// General angles in `(0, π)` with `Σ(π - θ) > 2π`.
    pub fn new(angles: Vec<f64>) -> Result<Self, PolygonError> {
        if angles.len() < 3 {
            return Err(PolygonError::TooFewVertices(angles.len()));
        }
        for (index, &angle) in angles.iter().enumerate() {
            if !(angle > 0.0 && angle < PI) {
                return Err(PolygonError::AngleOutOfRange { index, angle });
            }
        }
        let sum: f64 = angles.iter().map(|t| PI - t).sum();
        if !(sum > TAU) {
            return Err(PolygonError::NotHyperbolic { sum });
        }
        Ok(Self { angles, strict: false })
    }

    /// As [`AngleSpec::new`], additionally requiring every angle `≤ π/2`.
    pub fn strict(angles: Vec<f64>) -> Result<Self, PolygonError> {
        let mut spec = Self::new(angles)?;
        if let Some((index, &angle)) = spec
            .angles
            .iter()
            .enumerate()
            .find(|(_, &a)| a > 0.5 * PI + 1e-12)
        {
            return Err(PolygonError::NotStrict { index, angle });
        }
        spec.strict = true;
        Ok(spec)
    }

    /// All `n` angles equal to `theta`.
    pub fn regular(n: usize, theta: f64) -> Result<Self, PolygonError> {
        Self::new(vec![theta; n])
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Whether the spec was validated in strict mode.
    pub fn is_strict_mode(&self) -> bool {
        self.strict
    }

    /// Whether every angle is at most `π/2`.
    pub fn within_right_angles(&self) -> bool {
        self.angles.iter().all(|&a| a <= 0.5 * PI + 1e-12)
    }

    /// Area by Gauss–Bonnet, `(n - 2)π - Σθ`.
    pub fn area(&self) -> f64 {
        (self.len() as f64 - 2.0) * PI - self.angles.iter().sum::<f64>()
    }

    /// Exterior turning angle `π - θ_i`.
    pub fn turn(&self, i: usize) -> f64 {
        PI - self.angles[i % self.len()]
    }
}

/// Positive edge weights `w_1, ..., w_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    weights: Vec<f64>,
}

impl WeightSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self, PolygonError> {
        for (index, &weight) in weights.iter().enumerate() {
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(PolygonError::NonPositiveWeight { index, weight });
            }
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0; n] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            weights: self.weights.iter().map(|w| w * s).collect(),
        }
    }
}

/// A convex polygon, vertices counterclockwise; edge `i` joins vertex `i`
/// to vertex `i + 1 (mod n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<HPoint>,
    lengths: Vec<f64>,
    angles: Vec<f64>,
}

impl Polygon {
    /// Builds a polygon from vertices, checking that they form a convex
    /// counterclockwise polygon with interior angles below π.
    pub fn from_vertices(vertices: Vec<HPoint>) -> Result<Self, PolygonError> {
        let n = vertices.len();
        if n < 3 {
            return Err(PolygonError::TooFewVertices(n));
        }
        if !klein_convex(&vertices) {
            return Err(PolygonError::NonConvex);
        }
        let lengths: Vec<f64> = (0..n).map(|i| dist(vertices[i], vertices[(i + 1) % n])).collect();
        let angles = (0..n)
            .map(|i| angle_at(vertices[i], vertices[(i + 1) % n], vertices[(i + n - 1) % n]))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PolygonError::NonConvex)?;
        Ok(Self {
            vertices,
            lengths,
            angles,
        })
    }

    /// As [`Polygon::from_vertices`], also checking the angles against `spec`.
    pub fn with_spec(spec: &AngleSpec, vertices: Vec<HPoint>) -> Result<Self, PolygonError> {
        if vertices.len() != spec.len() {
            return Err(PolygonError::LengthMismatch {
                expected: spec.len(),
                got: vertices.len(),
            });
        }
        let p = Self::from_vertices(vertices)?;
        for (index, (&expected, &found)) in spec.angles().iter().zip(p.angles.iter()).enumerate() {
            if (expected - found).abs() > ANGLE_TOL {
                return Err(PolygonError::AngleMismatch { index, expected, found });
            }
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[HPoint] {
        &self.vertices
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Image of the polygon under an isometry.
    pub fn transformed(&self, g: &Isometry2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| g.apply(v)).collect(),
            lengths: self.lengths.clone(),
            angles: self.angles.clone(),
        }
    }

    /// Whether `p` lies strictly inside.
    pub fn contains(&self, p: HPoint) -> bool {
        let k: Vec<[f64; 2]> = self.vertices.iter().map(|v| v.to_klein()).collect();
        let q = p.to_klein();
        let n = k.len();
        (0..n).all(|i| {
            let (a, b) = (k[i], k[(i + 1) % n]);
            let e = [b[0] - a[0], b[1] - a[1]];
            let r = [q[0] - a[0], q[1] - a[1]];
            e[0] * r[1] - e[1] * r[0] > 1e-15 * (e[0].hypot(e[1]) * r[0].hypot(r[1]))
        })
    }

    /// Sum of triangle areas `π - (α + β + γ)` over a fan from vertex 0.
    pub fn triangulated_area(&self) -> f64 {
        let v = &self.vertices;
        (1..self.n() - 1)
            .map(|i| {
                let (a, b, c) = (v[0], v[i], v[i + 1]);
                let s = angle_at(a, b, c).unwrap() + angle_at(b, c, a).unwrap() + angle_at(c, a, b).unwrap();
                PI - s
            })
            .sum()
    }

    /// Splits the lengths into the first `n - 3` (free) and last 3 (solved).
    pub fn moduli_point(&self) -> ModuliPoint {
        let k = self.n() - 3;
        ModuliPoint {
            free_lengths: self.lengths[..k].to_vec(),
            solved_lengths: [self.lengths[k], self.lengths[k + 1], self.lengths[k + 2]],
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "angles": array17(&self.angles),
            "lengths": array17(&self.lengths),
            "vertices": Value::Array(self.vertices.iter().map(|v| json!([num17(v.x), num17(v.y)])).collect()),
        })
    }

    /// Reads the `vertices` of a polygon JSON object and rebuilds the polygon;
    /// stored `angles` and `lengths` must match the recomputed ones.
    pub fn from_json(v: &Value) -> Result<Self, PolygonError> {
        let bad = |m: &str| PolygonError::Json(m.to_string());
        let floats = |key: &str| -> Result<Vec<f64>, PolygonError> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| bad(key))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| bad(key)))
                .collect()
        };
        let verts = v
            .get("vertices")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("vertices"))?
            .iter()
            .map(|p| {
                let xy = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("vertex"))?;
                let (x, y) = (xy[0].as_f64(), xy[1].as_f64());
                match (x, y) {
                    (Some(x), Some(y)) => HPoint::new(x, y).map_err(|e| bad(&e.to_string())),
                    _ => Err(bad("vertex")),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let spec = AngleSpec::new(floats("angles")?)?;
        let p = Self::with_spec(&spec, verts)?;
        let lengths = floats("lengths")?;
        if lengths.len() != p.n() || lengths.iter().zip(p.lengths.iter()).any(|(a, b)| (a - b).abs() > 1e-8) {
            return Err(bad("lengths disagree with vertices"));
        }
        Ok(p)
    }
}

/// Coordinates of a point of the moduli space: `n - 3` free edge lengths
/// and the three lengths solved from the closing condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuliPoint {
    pub free_lengths: Vec<f64>,
    pub solved_lengths: [f64; 3],
}

impl ModuliPoint {
    pub fn lengths(&self) -> Vec<f64> {
        let mut v = self.free_lengths.clone();
        v.extend_from_slice(&self.solved_lengths);
        v
    }
}

/// Convex, counterclockwise and winding once, tested in the Klein model
/// where hyperbolic convexity is Euclidean convexity.
fn klein_convex(vertices: &[HPoint]) -> bool {
    let k: Vec<[f64; 2]> = vertices.iter().map(|v| v.to_klein()).collect();
    let n = k.len();
    let mut turning = 0.0;
    for i in 0..n {
        let (a, b, c) = (k[i], k[(i + 1) % n], k[(i + 2) % n]);
        let e1 = [b[0] - a[0], b[1] - a[1]];
        let e2 = [c[0] - b[0], c[1] - b[1]];
        let cross = e1[0] * e2[1] - e1[1] * e2[0];
        let (l1, l2) = (e1[0].hypot(e1[1]), e2[0].hypot(e2[1]));
        if !(l1 > 0.0 && l2 > 0.0) || cross <= 1e-14 * l1 * l2 {
            return false;
        }
        turning += cross.atan2(e1[0] * e2[0] + e1[1] * e2[1]);
    }
    (turning - TAU).abs() < 1e-6
}

type Mat2 = [f64; 4];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

const IDENTITY: Mat2 = [1.0, 0.0, 0.0, 1.0];

/// Unit-speed translation along the geodesic through `i` heading in
/// direction 0 (the unit semicircle toward `+1`).
fn step(l: f64) -> Mat2 {
    let (c, s) = ((0.5 * l).cosh(), (0.5 * l).sinh());
    [c, s, s, c]
}

/// `d/dl step(l)`.
fn step_derivative(l: f64) -> Mat2 {
    let (c, s) = ((0.5 * l).cosh(), (0.5 * l).sinh());
    [0.5 * s, 0.5 * c, 0.5 * c, 0.5 * s]
}

/// Counterclockwise rotation about `i`.
fn turn(phi: f64) -> Mat2 {
    let (s, c) = (0.5 * phi).sin_cos();
    [c, s, -s, c]
}

/// Vertex chain and holonomy of the side–turn–side walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Development {
    /// `n + 1` points; the last equals the first when the walk closes.
    pub chain: Vec<HPoint>,
    pub defect: Isometry2,
}

impl Development {
    /// Closing residual, the max norm of [`closing_coordinates`].
    pub fn residual(&self) -> f64 {
        closing_coordinates(&self.defect.entries())
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

/// Three affine coordinates `(d01, d10, d00 - d11)` of the defect, with the
/// sign of the matrix chosen so its trace is positive; they vanish exactly
/// at `±I`.
pub fn closing_coordinates(d: &Mat2) -> [f64; 3] {
    let s = if d[0] + d[3] >= 0.0 { 1.0 } else { -1.0 };
    [s * d[1], s * d[2], s * (d[0] - d[3])]
}

fn check_lengths(lengths: &[f64]) -> Result<(), PolygonError> {
    for (index, &length) in lengths.iter().enumerate() {
        if !(length > 0.0 && length.is_finite()) {
            return Err(PolygonError::NonPositiveLength { index, length });
        }
    }
    Ok(())
}

fn holonomy(spec: &AngleSpec, lengths: &[f64]) -> Mat2 {
    (0..spec.len()).fold(IDENTITY, |acc, k| {
        mat_mul(&mat_mul(&acc, &step(lengths[k])), &turn(spec.turn(k + 1)))
    })
}

/// Walks the edges from `i` (initial direction 0), turning left by `π - θ`
/// at each vertex, and returns the vertex chain and the composed frame.
pub fn develop(spec: &AngleSpec, lengths: &[f64]) -> Result<Development, PolygonError> {
    let n = spec.len();
    if lengths.len() != n {
        return Err(PolygonError::LengthMismatch {
            expected: n,
            got: lengths.len(),
        });
    }
    check_lengths(lengths)?;
    let mut frame = IDENTITY;
    let mut chain = Vec::with_capacity(n + 1);
    chain.push(HPoint::i());
    for (k, &l) in lengths.iter().enumerate() {
        frame = mat_mul(&frame, &step(l));
        chain.push(Isometry2::from_scaled(frame[0], frame[1], frame[2], frame[3]).unwrap().apply(HPoint::i()));
        frame = mat_mul(&frame, &turn(spec.turn(k + 1)));
    }
    let defect = Isometry2::from_scaled(frame[0], frame[1], frame[2], frame[3]).unwrap();
    Ok(Development { chain, defect })
}

/// Options for [`close_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosingOptions {
    /// Target for the closing residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Condition number above which another triple of edges is solved.
    pub max_condition: f64,
}

impl Default for ClosingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            max_condition: 1e8,
        }
    }
}

/// Closes the polygon with prescribed first `n - 3` edge lengths by solving
/// the last three from `initial_guess`.
pub fn close(spec: &AngleSpec, free_lengths: &[f64], initial_guess: [f64; 3]) -> Result<Polygon, PolygonError> {
    close_with(spec, free_lengths, initial_guess, &ClosingOptions::default())
}

/// Newton iteration on the three closing coordinates in log-lengths, with
/// step halving. The last three edges are solved by default; when the
/// Jacobian there is ill-conditioned, other triples are tried in
/// lexicographic order, the free lengths then filling the remaining edges
/// in order.
pub fn close_with(
    spec: &AngleSpec,
    free_lengths: &[f64],
    initial_guess: [f64; 3],
    opts: &ClosingOptions,
) -> Result<Polygon, PolygonError> {
    let n = spec.len();
    if free_lengths.len() != n - 3 {
        return Err(PolygonError::LengthMismatch {
            expected: n - 3,
            got: free_lengths.len(),
        });
    }
    check_lengths(free_lengths)?;
    check_lengths(&initial_guess)?;
    let mut triples = vec![[n - 3, n - 2, n - 1]];
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if [a, b, c] != [n - 3, n - 2, n - 1] {
                    triples.push([a, b, c]);
                }
            }
        }
    }
    for solved in triples {
        match solve_triple(spec, free_lengths, initial_guess, solved, opts) {
            Err(PolygonError::IllConditioned) => continue,
            Ok(lengths) => {
                let dev = develop(spec, &lengths)?;
                let mut chain = dev.chain;
                chain.pop();
                return Polygon::with_spec(spec, chain);
            }
            Err(e) => return Err(e),
        }
    }
    Err(PolygonError::IllConditioned)
}

fn solve_triple(
    spec: &AngleSpec,
    free: &[f64],
    guess: [f64; 3],
    solved: [usize; 3],
    opts: &ClosingOptions,
) -> Result<Vec<f64>, PolygonError> {
    let n = spec.len();
    let mut lengths = vec![0.0; n];
    let mut it = free.iter();
    for (k, slot) in lengths.iter_mut().enumerate() {
        if let Some(j) = solved.iter().position(|&s| s == k) {
            *slot = guess[j];
        } else {
            *slot = *it.next().unwrap();
        }
    }
    let norm = |r: &[f64; 3]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = closing_coordinates(&holonomy(spec, &lengths));
    for iter in 0..opts.max_iter {
        if norm(&r) < opts.tol {
            return Ok(lengths);
        }
        let jac = closing_jacobian(spec, &lengths, &solved);
        let sv = jac.singular_values();
        let cond = sv.max() / sv.min();
        if !(cond < opts.max_condition) {
            if iter == 0 {
                return Err(PolygonError::IllConditioned);
            }
            return Err(PolygonError::NoConvergence {
                iterations: iter,
                residual: norm(&r),
            });
        }
        let delta = match jac.lu().solve(&-Vector3::from(r)) {
            Some(d) => d,
            None => return Err(PolygonError::IllConditioned),
        };
        // at most one unit of log-length per step
        let cap = delta.amax().max(1.0);
        let mut h = 1.0 / cap;
        let old = norm(&r);
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = lengths.clone();
            for (j, &k) in solved.iter().enumerate() {
                trial[k] = lengths[k] * (h * delta[j]).exp();
            }
            let tr = closing_coordinates(&holonomy(spec, &trial));
            if norm(&tr) < old {
                lengths = trial;
                r = tr;
                accepted = true;
                break;
            }
            h *= 0.5;
        }
        for &k in &solved {
            let length = lengths[k];
            if !(length > 1e-12 && length < 1e3) {
                return Err(PolygonError::DegenerateLength { length });
            }
        }
        if !accepted {
            if old < 1e2 * opts.tol.max(1e-14) {
                return Ok(lengths);
            }
            return Err(PolygonError::NoConvergence {
                iterations: iter,
                residual: old,
            });
        }
    }
    if norm(&r) < opts.tol {
        return Ok(lengths);
    }
    Err(PolygonError::NoConvergence {
        iterations: opts.max_iter,
        residual: norm(&r),
    })
}

/// Jacobian of the closing coordinates with respect to the log-lengths of
/// the listed edges, from the product rule on the holonomy.
fn jacobian_columns(spec: &AngleSpec, lengths: &[f64], cols: &[usize]) -> nalgebra::DMatrix<f64> {
    let n = spec.len();
    let factors: Vec<(Mat2, Mat2)> = (0..n).map(|k| (step(lengths[k]), turn(spec.turn(k + 1)))).collect();
    let full = holonomy(spec, lengths);
    let s = if full[0] + full[3] >= 0.0 { 1.0 } else { -1.0 };
    let mut jac = nalgebra::DMatrix::zeros(3, cols.len());
    for (col, &j) in cols.iter().enumerate() {
        let mut m = IDENTITY;
        for (k, (st, tu)) in factors.iter().enumerate() {
            let f = if k == j { step_derivative(lengths[k]) } else { *st };
            m = mat_mul(&mat_mul(&m, &f), tu);
        }
        let l = lengths[j];
        jac[(0, col)] = s * m[1] * l;
        jac[(1, col)] = s * m[2] * l;
        jac[(2, col)] = s * (m[0] - m[3]) * l;
    }
    jac
}

fn closing_jacobian(spec: &AngleSpec, lengths: &[f64], solved: &[usize; 3]) -> Matrix3<f64> {
    let j = jacobian_columns(spec, lengths, solved);
    Matrix3::from_fn(|r, c| j[(r, c)])
}

/// Gauss–Newton projection of an arbitrary length vector onto the closing
/// set, moving all log-lengths with minimum-norm steps. Returns `None` if the
/// iteration stalls or a length degenerates.
pub fn project_to_closing(spec: &AngleSpec, lengths: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = spec.len();
    if lengths.len() != n || check_lengths(lengths).is_err() {
        return None;
    }
    let norm = |r: &[f64; 3]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let all: Vec<usize> = (0..n).collect();
    let mut x = lengths.to_vec();
    let mut r = closing_coordinates(&holonomy(spec, &x));
    for _ in 0..100 {
        if norm(&r) < tol {
            return Some(x);
        }
        let j = jacobian_columns(spec, &x, &all);
        let jjt = &j * j.transpose();
        let y = jjt.lu().solve(&-Vector3::from(r))?;
        let delta = j.transpose() * y;
        let cap = delta.amax().max(0.5) / 0.5;
        let mut h = 1.0 / cap;
        let old = norm(&r);
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(l, d)| l * (h * d).exp()).collect();
            let tr = closing_coordinates(&holonomy(spec, &trial));
            if norm(&tr) < old {
                x = trial;
                r = tr;
                accepted = true;
                break;
            }
            h *= 0.5;
        }
        if !accepted || x.iter().any(|&l| !(l > 1e-9 && l < 1e3)) {
            return None;
        }
    }
    (norm(&r) < tol).then_some(x)
}

/// Perimeter `Σ |e_i|`.
pub fn perimeter(p: &Polygon) -> f64 {
    p.lengths.iter().sum()
}

/// Weighted perimeter `Σ w_i |e_i|`.
pub fn w_perimeter(p: &Polygon, w: &WeightSpec) -> Result<f64, PolygonError> {
    if w.len() != p.n() {
        return Err(PolygonError::LengthMismatch {
            expected: p.n(),
            got: w.len(),
        });
    }
    Ok(p.lengths.iter().zip(w.weights()).map(|(l, w)| l * w).sum())
}

/// Distances from an interior point to the complete geodesics carrying the
/// edges, with whether each perpendicular foot lands on the edge itself.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistances {
    pub distances: Vec<f64>,
    pub feet: Vec<HPoint>,
    pub foot_on_edge: Vec<bool>,
}

pub fn edge_distances_from_point(p: &Polygon, point: HPoint) -> Result<EdgeDistances, PolygonError> {
    if !p.contains(point) {
        return Err(PolygonError::PointOutside);
    }
    let n = p.n();
    let mut out = EdgeDistances {
        distances: Vec::with_capacity(n),
        feet: Vec::with_capacity(n),
        foot_on_edge: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (a, b) = (p.vertices[i], p.vertices[(i + 1) % n]);
        let g = geodesic_through(a, b).expect("distinct vertices");
        let (d, foot) = dist_to_geodesic(point, &g);
        let len = p.lengths[i];
        let on = dist(a, foot) + dist(foot, b) - len <= 1e-9 * (1.0 + len);
        out.distances.push(d);
        out.feet.push(foot);
        out.foot_on_edge.push(on);
    }
    Ok(out)
}
