//! Characters of the Whitehead link group `<a, b | a w a⁻¹ w⁻¹>`,
//! `w = b a b⁻¹ a⁻¹ b⁻¹ a b`, in the trace coordinates
//! `(x, y, z) = (tr a, tr b, tr ab)`.
//!
//! The variety is `{p · q = 0}` with
//! `p = xy - (x² + y² - 2) z + x y z² - z³` and `q = x² + y² + z² - xyz - 4`;
//! `q = 0` are the reducible characters. Along `p = 0`, `x = 2 cos(α/2)`
//! parametrizes a branch through `χ₀ = (0, 2 cos(π/n), i sqrt(4cos²(π/n) - 2))`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C;
use thiserror::Error;

use crate::format::sig17;
use crate::sl2kit::Sl2Group;

/// `|q|` at or below this counts as reducible.
pub const REDUCIBLE_TOL: f64 = 1e-8;
/// Largest accepted change of `z` between successive continuation steps.
pub const JUMP_GUARD: f64 = 0.1;
/// Step halvings allowed before a jump is reported.
pub const MAX_BISECTIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharvarError {
    #[error("n = {0}: the curve through chi0 needs n > 4")]
    SmallN(i64),
    #[error("character is reducible (|q| = {0:e})")]
    Reducible(f64),
    #[error("need at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("angle range [{lo}, {hi}] must contain pi")]
    RangeMissesPi { lo: f64, hi: f64 },
    #[error("branch collision near alpha = {alpha}: root jump {jump} after {MAX_BISECTIONS} bisections")]
    BranchCollision { alpha: f64, jump: f64 },
    #[error("csv output failed: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Character {
    pub x: C,
    pub y: C,
    pub z: C,
}

impl Character {
    pub fn new(x: C, y: C, z: C) -> Self {
        Self { x, y, z }
    }

    pub fn real(x: f64, y: f64, z: f64) -> Self {
        Self::new(C::from(x), C::from(y), C::from(z))
    }
}

pub fn eval_p(ch: &Character) -> C {
    let Character { x, y, z } = *ch;
    x * y - (x * x + y * y - 2.0) * z + x * y * z * z - z * z * z
}

pub fn eval_q(ch: &Character) -> C {
    let Character { x, y, z } = *ch;
    x * x + y * y + z * z - x * y * z - 4.0
}

pub fn dp_dz(ch: &Character) -> C {
    let Character { x, y, z } = *ch;
    -(x * x + y * y - 2.0) + 2.0 * x * y * z - 3.0 * z * z
}

/// Roots of the monic cubic `z³ + a z² + b z + c`.
fn cubic_roots(a: C, b: C, c: C) -> [C; 3] {
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let mut d = (r * r - q * q * q).sqrt();
    if (r.conj() * d).re < 0.0 {
        d = -d;
    }
    let big_a = -(r + d).powf(1.0 / 3.0);
    let big_b = if big_a.norm() > 0.0 { q / big_a } else { C::from(0.0) };
    let shift = a / 3.0;
    let sum = big_a + big_b;
    let diff = C::new(0.0, 0.5 * 3f64.sqrt()) * (big_a - big_b);
    [sum - shift, -0.5 * sum - shift + diff, -0.5 * sum - shift - diff]
}

/// The three roots of `p(x, y, ·)`, each refined by one Newton step when
/// the derivative there is not tiny.
pub fn roots_z(x: C, y: C) -> [C; 3] {
    // p = -(z³ - xy z² + (x² + y² - 2) z - xy)
    let mut roots = cubic_roots(-x * y, x * x + y * y - 2.0, -x * y);
    for z in roots.iter_mut() {
        let ch = Character::new(x, y, *z);
        let d = dp_dz(&ch);
        let scale = 1.0 + z.norm_sqr() + (x * y).norm();
        if d.norm() > 1e-6 * scale {
            *z -= eval_p(&ch) / d;
        }
    }
    roots
}

/// `χ₀(n) = (0, 2 cos(π/n), i sqrt(4 cos²(π/n) - 2))`.
pub fn chi0(n: i64) -> Result<Character, CharvarError> {
    if n <= 4 {
        return Err(CharvarError::SmallN(n));
    }
    let c = (PI / n as f64).cos();
    Ok(Character::new(
        C::from(0.0),
        C::from(2.0 * c),
        C::new(0.0, (4.0 * c * c - 2.0).sqrt()),
    ))
}

/// Images of the two meridians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhiteheadRep {
    pub a: Sl2Group,
    pub b: Sl2Group,
}

impl WhiteheadRep {
    /// `(g A g⁻¹, g B g⁻¹)`.
    pub fn conjugated(&self, g: &Sl2Group) -> Self {
        let gi = g.inverse();
        Self {
            a: *g * self.a * gi,
            b: *g * self.b * gi,
        }
    }

    pub fn character(&self) -> Character {
        Character::new(self.a.trace(), self.b.trace(), (self.a * self.b).trace())
    }
}

/// Root `s` of `s + 1/s = x`.
fn eigen_root(x: C) -> C {
    0.5 * (x + (x * x - 4.0).sqrt())
}

/// `A = ((s, 1), (0, 1/s))`, `B = ((u, 0), (t, 1/u))` with `s + 1/s = x`,
/// `u + 1/u = y`, `t = z - su - 1/(su)`.
pub fn build_rep(ch: &Character) -> Result<WhiteheadRep, CharvarError> {
    let q = eval_q(ch).norm();
    if q <= REDUCIBLE_TOL {
        return Err(CharvarError::Reducible(q));
    }
    let s = eigen_root(ch.x);
    let u = eigen_root(ch.y);
    let t = ch.z - s * u - (s * u).inv();
    let one = C::from(1.0);
    let zero = C::from(0.0);
    Ok(WhiteheadRep {
        a: Sl2Group { m: [[s, one], [zero, s.inv()]] },
        b: Sl2Group { m: [[u, zero], [t, u.inv()]] },
    })
}

/// Frobenius norm of `A W A⁻¹ W⁻¹ - I`, `W = B A B⁻¹ A⁻¹ B⁻¹ A B`.
pub fn relator_defect(rep: &WhiteheadRep) -> f64 {
    let (a, b) = (rep.a, rep.b);
    let (ai, bi) = (a.inverse(), b.inverse());
    let w = b * a * bi * ai * bi * a * b;
    (a * w * ai * w.inverse()).distance(&Sl2Group::identity())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub alpha: f64,
    pub character: Character,
    /// `|p|` at the character.
    pub on_p: f64,
    pub relator_defect: f64,
}

fn curve_point(alpha: f64, ch: Character) -> Result<CurvePoint, CharvarError> {
    Ok(CurvePoint {
        alpha,
        character: ch,
        on_p: eval_p(&ch).norm(),
        relator_defect: relator_defect(&build_rep(&ch)?),
    })
}

fn nearest_root(x: C, y: C, prev: C) -> (C, f64) {
    roots_z(x, y)
        .into_iter()
        .map(|z| (z, (z - prev).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three roots")
}

/// Follows the root nearest the previous `z` from `from` to `to`, halving
/// the step whenever the jump exceeds [`JUMP_GUARD`].
fn continue_to(y: C, from: f64, z0: C, to: f64) -> Result<C, CharvarError> {
    let mut alpha = from;
    let mut z = z0;
    let mut halvings = 0;
    let mut step = to - from;
    while alpha != to {
        let target = if (to - alpha).abs() <= step.abs() { to } else { alpha + step };
        let x = C::from(2.0 * (0.5 * target).cos());
        let (next, jump) = nearest_root(x, y, z);
        if jump > JUMP_GUARD {
            halvings += 1;
            if halvings > MAX_BISECTIONS {
                return Err(CharvarError::BranchCollision { alpha: target, jump });
            }
            step *= 0.5;
            continue;
        }
        alpha = target;
        z = next;
    }
    Ok(z)
}

/// Points of the branch of `p = 0` through `χ₀(n)` at `steps` equally
/// spaced cone angles from `alpha_lo` to `alpha_hi` (ascending), with
/// `x = 2 cos(α/2)`. Continuation starts at `α = π` and runs outward in
/// both directions; a grid point at exactly `π` is `χ₀(n)` itself.
pub fn trace_curve(n: i64, alpha_lo: f64, alpha_hi: f64, steps: usize) -> Result<Vec<CurvePoint>, CharvarError> {
    let seed = chi0(n)?;
    if steps < 2 {
        return Err(CharvarError::TooFewSteps(steps));
    }
    if !(alpha_lo <= PI && PI <= alpha_hi && alpha_lo < alpha_hi) {
        return Err(CharvarError::RangeMissesPi { lo: alpha_lo, hi: alpha_hi });
    }
    let grid: Vec<f64> = (0..steps)
        .map(|k| {
            if k + 1 == steps {
                alpha_hi
            } else {
                alpha_lo + (alpha_hi - alpha_lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let mut zs = vec![C::from(0.0); steps];
    // downward from π
    let (mut alpha, mut z) = (PI, seed.z);
    for k in (0..steps).filter(|&k| grid[k] <= PI).rev() {
        z = continue_to(seed.y, alpha, z, grid[k])?;
        alpha = grid[k];
        zs[k] = if grid[k] == PI { seed.z } else { z };
    }
    let (mut alpha, mut z) = (PI, seed.z);
    for k in (0..steps).filter(|&k| grid[k] > PI) {
        z = continue_to(seed.y, alpha, z, grid[k])?;
        alpha = grid[k];
        zs[k] = z;
    }
    grid.iter()
        .zip(zs)
        .map(|(&a, z)| {
            let ch = if a == PI {
                seed
            } else {
                Character::new(C::from(2.0 * (0.5 * a).cos()), seed.y, z)
            };
            curve_point(a, ch)
        })
        .collect()
}

/// Writes `alpha, re_x, re_y, re_z, im_z, abs_p, relator_defect` rows with
/// 17 significant digits.
pub fn write_curve_csv<W: Write>(out: W, points: &[CurvePoint]) -> Result<(), CharvarError> {
    let err = |e: csv::Error| CharvarError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "re_x", "re_y", "re_z", "im_z", "abs_p", "relator_defect"])
        .map_err(err)?;
    for p in points {
        let ch = &p.character;
        w.write_record([
            sig17(p.alpha),
            sig17(ch.x.re),
            sig17(ch.y.re),
            sig17(ch.z.re),
            sig17(ch.z.im),
            sig17(p.on_p),
            sig17(p.relator_defect),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CharvarError::Csv(e.to_string()))
}
