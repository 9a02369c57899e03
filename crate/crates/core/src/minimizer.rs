//! Perimeter minimizers over polygons with prescribed angles.
//!
//! Two routes are provided. The geometric one builds the polygon around a
//! center whose distances to the edges satisfy `sinh d_i ∝ w_i` (for unit
//! weights, an inscribed circle). The brute-force one searches the moduli
//! space directly through [`close`].
//!
//! Incircle reduction: about the center the polygon splits into kites, each
//! a pair of right triangles with legs `r`, vertex angle `θ_i / 2` and
//! central angle `ψ_i`. The right-triangle identity `cos A = cosh a · sin B`
//! gives `cos(θ_i / 2) = cosh r · sin ψ_i`, and the kites fill the full
//! turn, `Σ ψ_i = π`. The left side of
//! `g(r) = Σ asin(cos(θ_i / 2) / cosh r) - π` decreases in `r`, starting at
//! `Σ (π - θ_i) / 2 - π`, so a root exists iff `Σ (π - θ_i) > 2π`.
//!
//! Weighted reduction: with edge distances `d_i = asinh(c w_i)`, the
//! diagonal from the center to vertex `i` splits `θ_i` into `γ + γ'` with
//! `sinh d = sinh h · sin γ` on either side; each right triangle then has
//! central angle `asin(cos γ / cosh d)`. The scale `c` is fixed by requiring
//! the central angles to sum to `2π`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hyp2::{direction_at, dist_to_geodesic, geodesic_through, point_along, HPoint, Isometry2};
use crate::polygon::{
    close, edge_distances_from_point, project_to_closing, w_perimeter, AngleSpec, Polygon, PolygonError,
    WeightSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinimizerError {
    #[error("angle {index} = {angle} exceeds pi/2; the minimizer needs angles at most pi/2")]
    AngleAbovePiOver2 { index: usize, angle: f64 },
    #[error("weight count {got} does not match {expected} angles")]
    WeightMismatch { expected: usize, got: usize },
    #[error("no root of the incircle equation: sum of (pi - angle) must exceed 2 pi")]
    NoIncircle,
    #[error("could not bracket the weighted scale")]
    NoScaleBracket,
    #[error("no start of the oracle produced a closed polygon ({attempts} attempts)")]
    NoFeasibleStart { attempts: usize },
    #[error("closing failed at a finite-difference probe: {0}")]
    Probe(PolygonError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
}

fn require_right_angles(spec: &AngleSpec) -> Result<(), MinimizerError> {
    match spec.angles().iter().enumerate().find(|(_, &a)| a > FRAC_PI_2 + 1e-12) {
        Some((index, &angle)) => Err(MinimizerError::AngleAbovePiOver2 { index, angle }),
        None => Ok(()),
    }
}

fn check_weights(spec: &AngleSpec, w: &WeightSpec) -> Result<(), MinimizerError> {
    if w.len() != spec.len() {
        return Err(MinimizerError::WeightMismatch {
            expected: spec.len(),
            got: w.len(),
        });
    }
    Ok(())
}

/// Bisection for a sign change of `f` on `[lo, hi]` with `f(lo) > 0 > f(hi)`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * (1.0 + mid.abs()) || mid == lo || mid == hi {
            return mid;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `g(r) = Σ asin(cos(θ_i / 2) / cosh r) - π`.
pub fn incircle_equation(angles: &[f64], r: f64) -> f64 {
    let c = r.cosh();
    angles
        .iter()
        .map(|t| ((0.5 * t).cos() / c).clamp(-1.0, 1.0).asin())
        .sum::<f64>()
        - PI
}

/// Root of [`incircle_equation`] in `(1e-9, 50)`, if the bracket has a sign
/// change. Takes raw angles in `(0, π)` so that non-hyperbolic data can be
/// probed.
pub fn incircle_radius(angles: &[f64]) -> Option<f64> {
    let (lo, hi) = (1e-9, 50.0);
    if !(incircle_equation(angles, lo) > 0.0 && incircle_equation(angles, hi) < 0.0) {
        return None;
    }
    Some(bisect(|r| incircle_equation(angles, r), lo, hi, 1e-15))
}

/// Isometry taking `v0` to `i` and `v1` onto the ray leaving `i` in
/// direction 0.
fn canonical_placement(v0: HPoint, v1: HPoint) -> Isometry2 {
    Isometry2::frame(v0, direction_at(v0, v1)).inverse()
}

/// Lays out vertices at the given directions and distances from `i`, then
/// moves vertex 0 to `i` with edge 0 heading in direction 0.
fn assemble(spec: &AngleSpec, dirs: &[f64], dists: &[f64]) -> Result<(Polygon, HPoint), PolygonError> {
    let c = HPoint::i();
    let raw: Vec<HPoint> = dirs.iter().zip(dists).map(|(&a, &h)| point_along(c, a, h)).collect();
    let g = canonical_placement(raw[0], raw[1]);
    let verts = raw.iter().map(|&v| g.apply(v)).collect();
    Ok((Polygon::with_spec(spec, verts)?, g.apply(c)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncircleSolution {
    pub r: f64,
    /// Central half-angles `ψ_i` at the vertices.
    pub psi: Vec<f64>,
    pub polygon: Polygon,
    pub center: HPoint,
}

/// The polygon with the given angles that has an inscribed circle tangent
/// to every edge; it minimizes the perimeter.
pub fn solve_incircle(spec: &AngleSpec) -> Result<IncircleSolution, MinimizerError> {
    require_right_angles(spec)?;
    let angles = spec.angles();
    let r = incircle_radius(angles).ok_or(MinimizerError::NoIncircle)?;
    let psi: Vec<f64> = angles
        .iter()
        .map(|t| ((0.5 * t).cos() / r.cosh()).clamp(-1.0, 1.0).asin())
        .collect();
    let n = angles.len();
    let mut dirs = vec![0.0; n];
    for i in 1..n {
        dirs[i] = dirs[i - 1] + psi[i - 1] + psi[i];
    }
    let dists: Vec<f64> = angles.iter().map(|t| (r.sinh() / (0.5 * t).sin()).asinh()).collect();
    let (polygon, center) = assemble(spec, &dirs, &dists)?;
    Ok(IncircleSolution {
        r,
        psi,
        polygon,
        center,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCenterSolution {
    /// Common value of `sinh d_i / w_i`.
    pub c: f64,
    pub distances: Vec<f64>,
    pub center: HPoint,
    pub polygon: Polygon,
}

/// Diagonal length `h ≥ max(d1, d2)` with
/// `asin(sinh d1 / sinh h) + asin(sinh d2 / sinh h) = θ`.
fn diagonal(d1: f64, d2: f64, theta: f64) -> f64 {
    let (s1, s2) = (d1.sinh(), d2.sinh());
    let f = |h: f64| {
        let sh = h.sinh();
        (s1 / sh).min(1.0).asin() + (s2 / sh).min(1.0).asin() - theta
    };
    let lo = d1.max(d2);
    let mut hi = lo + 1.0;
    while f(hi) > 0.0 {
        hi = lo + 2.0 * (hi - lo);
    }
    bisect(f, lo, hi, 1e-16)
}

/// Diagonal length at a vertex and the central angles of its two right
/// triangles, left (toward edge `i - 1`) then right.
fn vertex_data(d_prev: f64, d_next: f64, theta: f64) -> (f64, f64, f64) {
    let h = diagonal(d_prev, d_next, theta);
    let sh = h.sinh();
    let g1 = (d_prev.sinh() / sh).min(1.0).asin();
    let g2 = (d_next.sinh() / sh).min(1.0).asin();
    let a1 = (g1.cos() / d_prev.cosh()).min(1.0).asin();
    let a2 = (g2.cos() / d_next.cosh()).min(1.0).asin();
    (h, a1, a2)
}

fn central_total(angles: &[f64], d: &[f64]) -> f64 {
    let n = angles.len();
    (0..n)
        .map(|i| {
            let (_, a1, a2) = vertex_data(d[(i + n - 1) % n], d[i], angles[i]);
            a1 + a2
        })
        .sum()
}

/// The polygon whose edges satisfy `sinh d_i = c w_i` from a common center;
/// it minimizes the weighted perimeter.
pub fn solve_weighted(spec: &AngleSpec, w: &WeightSpec) -> Result<WeightedCenterSolution, MinimizerError> {
    require_right_angles(spec)?;
    check_weights(spec, w)?;
    let angles = spec.angles();
    let ws = w.weights();
    let dists = |c: f64| -> Vec<f64> { ws.iter().map(|wi| (c * wi).asinh()).collect() };
    let f = |logc: f64| central_total(angles, &dists(logc.exp())) - TAU;
    let (mut lo, mut hi) = (1e-9f64.ln(), 1e6f64.ln());
    while f(lo) <= 0.0 {
        lo -= 10.0;
        if lo < -200.0 {
            return Err(MinimizerError::NoScaleBracket);
        }
    }
    while f(hi) >= 0.0 {
        hi += 10.0;
        if hi > 200.0 {
            return Err(MinimizerError::NoScaleBracket);
        }
    }
    let c = bisect(f, lo, hi, 1e-16).exp();
    let d = dists(c);
    let n = angles.len();
    let data: Vec<(f64, f64, f64)> = (0..n).map(|i| vertex_data(d[(i + n - 1) % n], d[i], angles[i])).collect();
    let mut dirs = vec![0.0; n];
    for i in 1..n {
        dirs[i] = dirs[i - 1] + data[i - 1].2 + data[i].1;
    }
    let hs: Vec<f64> = data.iter().map(|v| v.0).collect();
    let (polygon, center) = assemble(spec, &dirs, &hs)?;
    Ok(WeightedCenterSolution {
        c,
        distances: d,
        center,
        polygon,
    })
}

/// Settings for [`optimize_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub seed: u64,
    pub starts: usize,
    /// Half-width of the uniform log-length perturbation of each start.
    pub spread: f64,
    /// Coordinate search stops once its step falls below this.
    pub min_step: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 8,
            spread: 0.5,
            min_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub polygon: Polygon,
    pub objective: f64,
    /// Starts that reached a closed polygon.
    pub successful_starts: usize,
    pub attempts: usize,
}

/// Weighted perimeter as a function of the free lengths, warm-started from
/// the last three lengths of a reference polygon.
struct Objective<'a> {
    spec: &'a AngleSpec,
    w: &'a WeightSpec,
    guess: [f64; 3],
}

impl Objective<'_> {
    fn polygon(&self, free: &[f64]) -> Result<Polygon, PolygonError> {
        close(self.spec, free, self.guess)
    }

    fn eval(&self, free: &[f64]) -> f64 {
        match self.polygon(free) {
            Ok(p) => w_perimeter(&p, self.w).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    }

    fn eval_log(&self, x: &[f64]) -> f64 {
        let free: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        self.eval(&free)
    }
}

fn solved_of(p: &Polygon) -> [f64; 3] {
    let l = p.edge_lengths();
    let n = l.len();
    [l[n - 3], l[n - 2], l[n - 1]]
}

/// Equal-length start for the closing projection:
/// `cosh(ℓ/2) = cos(π/n) / sin(θ̄/2)` closes the regular polygon whose
/// angles are the mean angle.
fn equal_start(spec: &AngleSpec) -> f64 {
    let n = spec.len() as f64;
    let mean = spec.angles().iter().sum::<f64>() / n;
    2.0 * ((PI / n).cos() / (0.5 * mean).sin()).max(1.0 + 1e-9).acosh()
}

/// Closed convex polygon for `spec`, reached from the regular polygon with
/// the mean angle by moving the angles linearly toward their targets. The
/// sum of the angles is constant along the path, and each step is
/// re-projected onto the closing set and checked for convexity.
fn angle_homotopy(spec: &AngleSpec) -> Option<Polygon> {
    let n = spec.len();
    let mean = spec.angles().iter().sum::<f64>() / n as f64;
    let at = |t: f64| -> Option<AngleSpec> {
        AngleSpec::new(spec.angles().iter().map(|a| mean + t * (a - mean)).collect()).ok()
    };
    let mut lengths = vec![equal_start(spec); n];
    let mut t = 0.0;
    let mut dt: f64 = 0.25;
    let mut poly = None;
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        let step = at(next).and_then(|s| {
            let x = project_to_closing(&s, &lengths, 1e-12)?;
            close(&s, &x[..n - 3], [x[n - 3], x[n - 2], x[n - 1]]).ok()
        });
        match step {
            Some(p) => {
                lengths = p.edge_lengths().to_vec();
                poly = Some(p);
                t = next;
                dt = (2.0 * dt).min(0.25);
            }
            None if dt > 1e-4 => dt *= 0.5,
            None => return None,
        }
    }
    poly
}

/// Moves the free lengths of `base` to `target` in log-space, re-closing
/// along the way; `None` if the target lies outside the feasible region.
fn continue_free(spec: &AngleSpec, base: &Polygon, target: &[f64]) -> Option<Polygon> {
    let n = spec.len();
    let from: Vec<f64> = base.edge_lengths()[..n - 3].iter().map(|l| l.ln()).collect();
    let to: Vec<f64> = target.iter().map(|l| l.ln()).collect();
    let mut poly = base.clone();
    let mut s = 0.0;
    let mut ds: f64 = 1.0;
    while s < 1.0 {
        let next = (s + ds).min(1.0);
        let free: Vec<f64> = from.iter().zip(&to).map(|(a, b)| (a + next * (b - a)).exp()).collect();
        match close(spec, &free, solved_of(&poly)) {
            Ok(p) => {
                poly = p;
                s = next;
                ds = (2.0 * ds).min(1.0);
            }
            Err(_) if ds > 1e-3 => ds *= 0.5,
            Err(_) => return None,
        }
    }
    Some(poly)
}

/// Multi-start brute-force minimizer of the weighted perimeter over the
/// free lengths. A base polygon comes from [`angle_homotopy`]; each start
/// perturbs its free lengths and is reached by continuation, then refined
/// by coordinate search with shrinking steps and finite-difference Newton
/// steps. Ties within `1e-9` go to the lexicographically smallest
/// free-length vector.
pub fn optimize_oracle(spec: &AngleSpec, w: &WeightSpec, opts: &OracleOptions) -> Result<OracleResult, MinimizerError> {
    check_weights(spec, w)?;
    let n = spec.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let base = angle_homotopy(spec).ok_or(MinimizerError::NoFeasibleStart { attempts: 0 })?;
    let mut results: Vec<(f64, Vec<f64>, Polygon)> = Vec::new();
    let mut attempts = 0;
    while results.len() < opts.starts && attempts < 8 * opts.starts.max(1) {
        attempts += 1;
        let target: Vec<f64> = base.edge_lengths()[..n - 3]
            .iter()
            .map(|l| l * rng.gen_range(-opts.spread..=opts.spread).exp())
            .collect();
        let Some(p0) = continue_free(spec, &base, &target) else {
            continue;
        };
        let (p, f) = refine(spec, w, p0, opts.min_step);
        results.push((f, p.edge_lengths()[..n - 3].to_vec(), p));
    }
    let best = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(MinimizerError::NoFeasibleStart { attempts });
    }
    let successful_starts = results.len();
    let (objective, _, polygon) = results
        .into_iter()
        .filter(|r| r.0 <= best + 1e-9)
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite lengths"))
        .expect("at least one result");
    Ok(OracleResult {
        polygon,
        objective,
        successful_starts,
        attempts,
    })
}

fn refine(spec: &AngleSpec, w: &WeightSpec, p0: Polygon, min_step: f64) -> (Polygon, f64) {
    let n = spec.len();
    let k = n - 3;
    let mut poly = p0;
    let mut obj = Objective {
        spec,
        w,
        guess: solved_of(&poly),
    };
    let mut x: Vec<f64> = poly.edge_lengths()[..k].iter().map(|l| l.ln()).collect();
    let mut fx = obj.eval_log(&x);
    if k == 0 {
        return (poly, fx);
    }
    let mut step = 0.25;
    let mut evals = 0;
    while step >= min_step && evals < 200_000 {
        let mut improved = false;
        for i in 0..k {
            for s in [step, -step] {
                let mut y = x.clone();
                y[i] += s;
                evals += 1;
                let fy = obj.eval_log(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if improved {
            if let Ok(p) = obj.polygon(&exp_all(&x)) {
                obj.guess = solved_of(&p);
            }
        } else {
            step *= 0.5;
        }
    }
    // Newton polish with finite differences in log-lengths. Near the
    // optimum the objective changes by less than its rounding noise, so a
    // step is kept while the FD gradient keeps shrinking and the objective
    // does not rise beyond that noise.
    let noise = 1e-12 * fx.abs().max(1.0);
    let mut prev: Option<(Vec<f64>, f64, f64)> = None;
    for _ in 0..12 {
        let (g, h) = fd_derivatives(|y| obj.eval_log(y), &x, 1e-5);
        let Some(g) = g else { break };
        if let Some((px, pf, pg)) = &prev {
            if g.norm() >= *pg {
                x = px.clone();
                fx = *pf;
                break;
            }
        }
        let Some(h) = h else { break };
        let Some(delta) = h.clone().lu().solve(&(-&g)) else { break };
        if delta.amax() > 0.1 {
            break;
        }
        let y: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        let fy = obj.eval_log(&y);
        if !(fy <= fx + noise) {
            break;
        }
        prev = Some((x, fx, g.norm()));
        x = y;
        fx = fy.min(fx);
        if delta.amax() < 1e-12 {
            break;
        }
    }
    if let Ok(p) = obj.polygon(&exp_all(&x)) {
        poly = p;
    }
    (poly, fx)
}

fn exp_all(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.exp()).collect()
}

/// Richardson-combined central-difference gradient and central-difference
/// Hessian with step `h`. Entries are `None` if any probe is not finite.
fn fd_derivatives(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    h: f64,
) -> (Option<nalgebra::DVector<f64>>, Option<DMatrix<f64>>) {
    let k = x.len();
    let at = |d: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in d {
            y[i] += s;
        }
        f(&y)
    };
    let mut g = nalgebra::DVector::zeros(k);
    for i in 0..k {
        let d1 = (at(&[(i, h)]) - at(&[(i, -h)])) / (2.0 * h);
        let d2 = (at(&[(i, 0.5 * h)]) - at(&[(i, -0.5 * h)])) / h;
        g[i] = (4.0 * d2 - d1) / 3.0;
    }
    if g.iter().any(|v| !v.is_finite()) {
        return (None, None);
    }
    let mut hess = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return (Some(g), None);
    }
    (Some(g), Some(hess))
}

/// Finite-difference derivatives of the weighted perimeter with respect to
/// the free lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianReport {
    pub hessian: DMatrix<f64>,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    /// Smallest Hessian eigenvalue; `+∞` for triangles, whose moduli space
    /// is a point.
    pub min_eigenvalue: f64,
    /// `‖H - Hᵀ‖ / ‖H‖` before symmetrization.
    pub asymmetry: f64,
}

/// Step used by [`criticality_report`].
pub const FD_STEP: f64 = 1e-4;

/// Gradient and Hessian of `free ↦ w_perimeter(close(free))` at `p`, by
/// nested central differences with step [`FD_STEP`].
pub fn criticality_report(spec: &AngleSpec, p: &Polygon, w: &WeightSpec) -> Result<HessianReport, MinimizerError> {
    check_weights(spec, w)?;
    let n = spec.len();
    let k = n - 3;
    let x: Vec<f64> = p.edge_lengths()[..k].to_vec();
    let guess = solved_of(p);
    let f = |y: &[f64]| -> Result<f64, MinimizerError> {
        let q = close(spec, y, guess).map_err(MinimizerError::Probe)?;
        Ok(w_perimeter(&q, w)?)
    };
    let at = |d: &[(usize, f64)]| {
        let mut y = x.clone();
        for &(i, s) in d {
            y[i] += s;
        }
        f(&y)
    };
    let h = FD_STEP;
    // central differences at h and h/2, Richardson-combined: the objective
    // can be stiff enough that the O(h²) error of a single difference
    // exceeds the gradient itself
    let mut gradient = vec![0.0; k];
    for i in 0..k {
        let d1 = (at(&[(i, h)])? - at(&[(i, -h)])?) / (2.0 * h);
        let d2 = (at(&[(i, 0.5 * h)])? - at(&[(i, -0.5 * h)])?) / h;
        gradient[i] = (4.0 * d2 - d1) / 3.0;
    }
    // every ordered pair is evaluated so the asymmetry reflects FD noise
    let mut hessian = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            hessian[(i, j)] = (at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])?
                + at(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
        }
    }
    let norm = hessian.norm();
    let asymmetry = if norm > 0.0 {
        (&hessian - hessian.transpose()).norm() / norm
    } else {
        0.0
    };
    let sym = 0.5 * (&hessian + hessian.transpose());
    let min_eigenvalue = if k == 0 {
        f64::INFINITY
    } else {
        SymmetricEigen::new(sym).eigenvalues.min()
    };
    let gradient_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok(HessianReport {
        hessian,
        gradient,
        gradient_norm,
        min_eigenvalue,
        asymmetry,
    })
}

/// Outcome of [`verify_characterization`].
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationReport {
    /// `(max - min) / mean` of `sinh d_i / w_i` at the best point found.
    pub spread: f64,
    pub point: HPoint,
    pub ratios: Vec<f64>,
}

/// Searches the interior for the point making `sinh d_i / w_i` as equal as
/// possible (Levenberg–Marquardt on the log-ratios in `(x, ln y)`), and
/// reports the remaining relative spread.
pub fn verify_characterization(p: &Polygon, w: &WeightSpec) -> Result<CharacterizationReport, MinimizerError> {
    let n = p.n();
    if w.len() != n {
        return Err(MinimizerError::WeightMismatch { expected: n, got: w.len() });
    }
    let verts = p.vertices();
    let edges: Vec<_> = (0..n)
        .map(|i| geodesic_through(verts[i], verts[(i + 1) % n]).expect("distinct vertices"))
        .collect();
    let ws = w.weights();
    let residuals = |u: [f64; 2]| -> Option<Vec<f64>> {
        let q = HPoint::new(u[0], u[1].exp()).ok()?;
        if !p.contains(q) {
            return None;
        }
        let logs: Vec<f64> = edges
            .iter()
            .zip(ws)
            .map(|(g, wi)| (dist_to_geodesic(q, g).0.sinh() / wi).ln())
            .collect();
        let mean = logs.iter().sum::<f64>() / n as f64;
        Some(logs.iter().map(|l| l - mean).collect())
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let k: Vec<[f64; 2]> = verts.iter().map(|v| v.to_klein()).collect();
    let kc = [
        k.iter().map(|v| v[0]).sum::<f64>() / n as f64,
        k.iter().map(|v| v[1]).sum::<f64>() / n as f64,
    ];
    let c0 = HPoint::from_klein(kc);
    let mut u = [c0.x, c0.y.ln()];
    let mut r = residuals(u).ok_or(PolygonError::PointOutside)?;
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let h = 1e-7;
        let mut jac = DMatrix::zeros(n, 2);
        let mut ok = true;
        for c in 0..2 {
            let mut up = u;
            let mut dn = u;
            up[c] += h;
            dn[c] -= h;
            match (residuals(up), residuals(dn)) {
                (Some(a), Some(b)) => {
                    for i in 0..n {
                        jac[(i, c)] = (a[i] - b[i]) / (2.0 * h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        let rv = nalgebra::DVector::from_vec(r.clone());
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;
        let mut stepped = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for d in 0..2 {
                a[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
            }
            let Some(delta) = a.lu().solve(&(-&jtr)) else { break };
            let trial = [u[0] + delta[0], u[1] + delta[1]];
            if let Some(tr) = residuals(trial) {
                if cost(&tr) < cost(&r) {
                    u = trial;
                    r = tr;
                    lambda = (lambda * 0.3).max(1e-12);
                    stepped = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !stepped || cost(&r) < 1e-30 {
            break;
        }
    }
    let point = HPoint::new(u[0], u[1].exp()).expect("interior point");
    let d = edge_distances_from_point(p, point)?;
    let ratios: Vec<f64> = d.distances.iter().zip(ws).map(|(d, wi)| d.sinh() / wi).collect();
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = ratios.iter().sum::<f64>() / n as f64;
    Ok(CharacterizationReport {
        spread: (max - min) / mean,
        point,
        ratios,
    })
}
