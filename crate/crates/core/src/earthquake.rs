//! Shear deformations of a geodesic segment along weighted disjoint
//! geodesics, and the first two derivatives of its length.
//!
//! Every computation first moves the segment onto the imaginary axis with
//! `a = i` and `b = i e^L`. A fault with finite endpoints `p, q` crosses it
//! iff `pq < 0`, at height `sqrt(-pq)`. Each fault is re-oriented from its
//! smaller to its larger endpoint in that frame, which makes the angle `θ`
//! from the fault to the segment lie in `(0, π)`; translating the far side
//! forward along that orientation lengthens the segment at rate `cos θ`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde_json::{json, Value};
use thiserror::Error;

use crate::format::num17;
use crate::hyp2::{dist, BoundaryPoint, Geodesic, HPoint, Hyp2Error, Isometry2, Segment};

/// Crossings closer than this to tangency are rejected.
pub const TANGENCY_TOL: f64 = 1e-6;
/// Angle margin required by [`convexity_bound`].
pub const CONVEXITY_MARGIN: f64 = 0.05;
/// Largest admissible `|t| · max m`.
pub const SHEAR_GUARD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EarthquakeError {
    #[error("geodesic does not cross the open segment")]
    NoCrossing,
    #[error("crossing is tangent (angle {theta})")]
    Tangent { theta: f64 },
    #[error("faults {0} and {1} are not disjoint")]
    NotDisjoint(usize, usize),
    #[error("weight {index} = {weight} is not positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("|t| * max weight = {0} exceeds the guard {SHEAR_GUARD}")]
    OutOfRange(f64),
    #[error("crossing angle {theta} is within {CONVEXITY_MARGIN} of 0 or pi")]
    NearTangent { theta: f64 },
    #[error("the multicurve does not cross the segment")]
    Empty,
    #[error("malformed earthquake config: {0}")]
    Json(String),
    #[error(transparent)]
    Geometry(#[from] Hyp2Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fault {
    pub geodesic: Geodesic,
    pub weight: f64,
}

/// Weighted, pairwise disjoint geodesics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Multicurve {
    components: Vec<Fault>,
}

impl Multicurve {
    pub fn new(components: Vec<Fault>) -> Result<Self, EarthquakeError> {
        for (index, f) in components.iter().enumerate() {
            if !(f.weight > 0.0 && f.weight.is_finite()) {
                return Err(EarthquakeError::NonPositiveWeight { index, weight: f.weight });
            }
        }
        for i in 0..components.len() {
            for j in i + 1..components.len() {
                let (g, h) = (&components[i].geodesic, &components[j].geodesic);
                if g.crosses(h) || g.shares_endpoint(h, 1e-12) {
                    return Err(EarthquakeError::NotDisjoint(i, j));
                }
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Fault] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingData {
    pub point: HPoint,
    /// Counterclockwise angle from the fault to the segment, in `(0, π)`.
    pub theta: f64,
    /// Length of the part of the segment from `a` to the crossing.
    pub s_minus: f64,
    /// Length of the part from the crossing to `b`.
    pub s_plus: f64,
    /// The fault, oriented so that `theta` is the angle from it to the segment.
    pub axis: Geodesic,
}

/// Isometry taking `sigma.a` to `i` and `sigma.b` to `i e^L`.
fn segment_frame(sigma: &Segment) -> Isometry2 {
    let g = crate::hyp2::geodesic_through(sigma.a, sigma.b).expect("segment endpoints differ");
    let n = Isometry2::normalizing(&g);
    let ya = n.apply(sigma.a).y;
    let s = ya.sqrt();
    Isometry2::from_scaled(1.0 / s, 0.0, 0.0, s).expect("diagonal") * n
}

/// Where and at what angle `g` crosses the open segment.
pub fn intersect(sigma: &Segment, g: &Geodesic) -> Result<CrossingData, EarthquakeError> {
    let n = segment_frame(sigma);
    let len = sigma.length();
    let h = n.apply_geodesic(g);
    let (Some(p), Some(q)) = (h.p_minus.value(), h.p_plus.value()) else {
        return Err(EarthquakeError::NoCrossing);
    };
    if !(p * q < 0.0) {
        return Err(EarthquakeError::NoCrossing);
    }
    let y0 = (-p * q).sqrt();
    let s_minus = y0.ln();
    if !(s_minus > 0.0 && s_minus < len) {
        return Err(EarthquakeError::NoCrossing);
    }
    let c = 0.5 * (p + q);
    let theta = FRAC_PI_2 - c.atan2(y0);
    if theta < TANGENCY_TOL || theta > PI - TANGENCY_TOL {
        return Err(EarthquakeError::Tangent { theta });
    }
    let inv = n.inverse();
    let axis = Geodesic::new(
        inv.apply_boundary(BoundaryPoint::finite(p.min(q))),
        inv.apply_boundary(BoundaryPoint::finite(p.max(q))),
    )?;
    Ok(CrossingData {
        point: inv.apply(HPoint::new(0.0, y0)?),
        theta,
        s_minus,
        s_plus: len - s_minus,
        axis,
    })
}

/// A segment, a multicurve crossing it, and the crossings ordered from
/// `sigma.a`, each paired with its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct EarthquakeConfig {
    pub sigma: Segment,
    pub lam: Multicurve,
    pub crossings: Vec<(CrossingData, f64)>,
}

impl EarthquakeConfig {
    /// Components missing the open segment do not change its length and
    /// are kept in `lam` without a crossing entry.
    pub fn new(sigma: Segment, lam: Multicurve) -> Result<Self, EarthquakeError> {
        let mut crossings = Vec::new();
        for f in lam.components() {
            match intersect(&sigma, &f.geodesic) {
                Ok(c) => crossings.push((c, f.weight)),
                Err(EarthquakeError::NoCrossing) => {}
                Err(e) => return Err(e),
            }
        }
        crossings.sort_by(|a, b| a.0.s_minus.total_cmp(&b.0.s_minus));
        Ok(Self { sigma, lam, crossings })
    }

    /// Parses `{sigma: [[x,y],[x,y]], faults: [{endpoints: [p,q], weight: m}]}`;
    /// an endpoint may be the string `"inf"`.
    pub fn from_json(v: &Value) -> Result<Self, EarthquakeError> {
        let bad = |m: &str| EarthquakeError::Json(m.to_string());
        let pts = v.get("sigma").and_then(Value::as_array).filter(|a| a.len() == 2).ok_or_else(|| bad("sigma"))?;
        let point = |p: &Value| -> Result<HPoint, EarthquakeError> {
            let xy = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("sigma point"))?;
            match (xy[0].as_f64(), xy[1].as_f64()) {
                (Some(x), Some(y)) => Ok(HPoint::new(x, y)?),
                _ => Err(bad("sigma point")),
            }
        };
        let sigma = Segment::new(point(&pts[0])?, point(&pts[1])?)?;
        let endpoint = |e: &Value| -> Result<f64, EarthquakeError> {
            match e {
                Value::String(s) if s == "inf" || s == "+inf" || s == "-inf" => Ok(f64::INFINITY),
                _ => e.as_f64().ok_or_else(|| bad("endpoint")),
            }
        };
        let faults = v
            .get("faults")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("faults"))?
            .iter()
            .map(|f| {
                let ends = f
                    .get("endpoints")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| bad("endpoints"))?;
                let weight = f.get("weight").and_then(Value::as_f64).ok_or_else(|| bad("weight"))?;
                let geodesic = Geodesic::from_reals(endpoint(&ends[0])?, endpoint(&ends[1])?)?;
                Ok(Fault { geodesic, weight })
            })
            .collect::<Result<Vec<_>, EarthquakeError>>()?;
        Self::new(sigma, Multicurve::new(faults)?)
    }

    pub fn to_json(&self) -> Value {
        let end = |b: BoundaryPoint| b.value().map(num17).unwrap_or_else(|| json!("inf"));
        json!({
            "sigma": [[num17(self.sigma.a.x), num17(self.sigma.a.y)], [num17(self.sigma.b.x), num17(self.sigma.b.y)]],
            "faults": self.lam.components().iter().map(|f| json!({
                "endpoints": [end(f.geodesic.p_minus), end(f.geodesic.p_plus)],
                "weight": num17(f.weight),
            })).collect::<Vec<_>>(),
        })
    }

    /// Image of the whole configuration under an isometry.
    pub fn transformed(&self, g: &Isometry2) -> Result<Self, EarthquakeError> {
        let sigma = Segment::new(g.apply(self.sigma.a), g.apply(self.sigma.b))?;
        let faults = self
            .lam
            .components()
            .iter()
            .map(|f| Fault {
                geodesic: g.apply_geodesic(&f.geodesic),
                weight: f.weight,
            })
            .collect();
        Self::new(sigma, Multicurve::new(faults)?)
    }

    fn max_weight(&self) -> f64 {
        self.crossings.iter().map(|c| c.1).fold(0.0, f64::max)
    }
}

/// Length of the segment after shearing by `t`: `dist(a, Φ_t(b))` with
/// `Φ_t = T_1 ∘ … ∘ T_k`, `T_j` the translation by `t m_j` along the
/// oriented `j`-th fault counted from `a`.
pub fn earthquake_length(cfg: &EarthquakeConfig, t: f64) -> Result<f64, EarthquakeError> {
    let reach = t.abs() * cfg.max_weight();
    if !(reach < SHEAR_GUARD) {
        return Err(EarthquakeError::OutOfRange(reach));
    }
    let phi = cfg
        .crossings
        .iter()
        .fold(Isometry2::identity(), |acc, (c, m)| acc * crate::hyp2::translation_along(&c.axis, t * m));
    Ok(dist(cfg.sigma.a, phi.apply(cfg.sigma.b)))
}

/// `Σ m_j cos θ_j`.
pub fn first_derivative(cfg: &EarthquakeConfig) -> f64 {
    cfg.crossings.iter().map(|(c, m)| m * c.theta.cos()).sum()
}

/// Sum over ordered pairs of crossings `(p, q)`, `p = q` included, of
/// `m_p m_q cosh|σ⁻| cosh|σ⁺| sin θ_p sin θ_q / sinh|σ|`, where `σ⁻` runs from
/// `a` to the nearer of the two crossings and `σ⁺` from the farther one to `b`.
pub fn second_derivative(cfg: &EarthquakeConfig) -> f64 {
    let len = cfg.sigma.length();
    let mut total = 0.0;
    for (p, mp) in &cfg.crossings {
        for (q, mq) in &cfg.crossings {
            let near = p.s_minus.min(q.s_minus);
            let far = p.s_minus.max(q.s_minus);
            total += mp * mq * near.cosh() * (len - far).cosh() * p.theta.sin() * q.theta.sin();
        }
    }
    total / len.sinh()
}

/// Diagonal (`p = q`) part of [`second_derivative`].
pub fn second_derivative_diagonal(cfg: &EarthquakeConfig) -> f64 {
    let len = cfg.sigma.length();
    cfg.crossings
        .iter()
        .map(|(c, m)| m * m * c.s_minus.cosh() * c.s_plus.cosh() * c.theta.sin().powi(2))
        .sum::<f64>()
        / len.sinh()
}

/// Central difference of [`earthquake_length`] at `t = 0`.
pub fn fd_first_derivative(cfg: &EarthquakeConfig, h: f64) -> Result<f64, EarthquakeError> {
    Ok((earthquake_length(cfg, h)? - earthquake_length(cfg, -h)?) / (2.0 * h))
}

/// Second central difference at `t = 0`, Richardson-extrapolated from steps
/// `h` and `h / 2`.
pub fn fd_second_derivative(cfg: &EarthquakeConfig, h: f64) -> Result<f64, EarthquakeError> {
    let f0 = earthquake_length(cfg, 0.0)?;
    let d = |s: f64| -> Result<f64, EarthquakeError> {
        Ok((earthquake_length(cfg, s)? - 2.0 * f0 + earthquake_length(cfg, -s)?) / (s * s))
    };
    Ok((4.0 * d(0.5 * h)? - d(h)?) / 3.0)
}

/// `⟨λ, σ⟩ = Σ m_j`.
pub fn intersection_number(cfg: &EarthquakeConfig) -> f64 {
    cfg.crossings.iter().map(|c| c.1).sum()
}

/// `second_derivative / ⟨λ, σ⟩²` without any angle requirement.
pub fn convexity_ratio(cfg: &EarthquakeConfig) -> Result<f64, EarthquakeError> {
    let i = intersection_number(cfg);
    if cfg.crossings.is_empty() {
        return Err(EarthquakeError::Empty);
    }
    Ok(second_derivative(cfg) / (i * i))
}

/// [`convexity_ratio`] for configurations whose angles stay
/// [`CONVEXITY_MARGIN`] away from 0 and π.
pub fn convexity_bound(cfg: &EarthquakeConfig) -> Result<f64, EarthquakeError> {
    if let Some((c, _)) = cfg
        .crossings
        .iter()
        .find(|(c, _)| c.theta < CONVEXITY_MARGIN || c.theta > PI - CONVEXITY_MARGIN)
    {
        return Err(EarthquakeError::NearTangent { theta: c.theta });
    }
    let k = convexity_ratio(cfg)?;
    assert!(k > 0.0, "second derivative must be positive");
    Ok(k)
}

/// Smallest [`convexity_bound`] over a family.
pub fn convexity_infimum<'a>(cfgs: impl IntoIterator<Item = &'a EarthquakeConfig>) -> Result<f64, EarthquakeError> {
    let mut inf = f64::INFINITY;
    for c in cfgs {
        inf = inf.min(convexity_bound(c)?);
    }
    if inf.is_infinite() {
        return Err(EarthquakeError::Empty);
    }
    Ok(inf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyp2::rotation_about;
    use approx::assert_abs_diff_eq;

    fn vertical(lo: f64, hi: f64) -> Segment {
        Segment::new(HPoint::new(0.0, lo).unwrap(), HPoint::new(0.0, hi).unwrap()).unwrap()
    }

    fn unit_sigma() -> Segment {
        vertical((-0.5f64).exp(), 0.5f64.exp())
    }

    fn single(sigma: Segment, g: Geodesic, m: f64) -> EarthquakeConfig {
        EarthquakeConfig::new(sigma, Multicurve::new(vec![Fault { geodesic: g, weight: m }]).unwrap()).unwrap()
    }

    fn tilted(theta: f64) -> Geodesic {
        let g = Geodesic::from_reals(-1.0, 1.0).unwrap();
        rotation_about(HPoint::i(), FRAC_PI_2 - theta).apply_geodesic(&g)
    }

    #[test]
    fn perpendicular_crossing() {
        let g = Geodesic::from_reals(-1.0, 1.0).unwrap();
        let c = intersect(&unit_sigma(), &g).unwrap();
        assert_abs_diff_eq!(c.theta, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(c.point.y, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.s_minus + c.s_plus, 1.0, epsilon = 1e-12);
        let r = intersect(&unit_sigma(), &g.reversed()).unwrap();
        assert_abs_diff_eq!(r.theta, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn rotated_crossing() {
        let c = intersect(&unit_sigma(), &tilted(PI / 3.0)).unwrap();
        assert_abs_diff_eq!(c.theta, PI / 3.0, epsilon = 1e-9);
        let c = intersect(&unit_sigma(), &tilted(PI / 3.0).reversed()).unwrap();
        assert_abs_diff_eq!(c.theta, PI / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn crossing_errors() {
        let far = Geodesic::from_reals(3.0, 4.0).unwrap();
        assert_eq!(intersect(&unit_sigma(), &far), Err(EarthquakeError::NoCrossing));
        let beyond = Geodesic::from_reals(-3.0, 3.0).unwrap();
        assert_eq!(intersect(&unit_sigma(), &beyond), Err(EarthquakeError::NoCrossing));
        let along = Geodesic::from_reals(0.0, f64::INFINITY).unwrap();
        assert_eq!(intersect(&unit_sigma(), &along), Err(EarthquakeError::NoCrossing));
    }

    #[test]
    fn perpendicular_midpoint_values() {
        let cfg = single(unit_sigma(), Geodesic::from_reals(-1.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(earthquake_length(&cfg, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(first_derivative(&cfg), 0.0, epsilon = 1e-15);
        let expected = 0.5f64.cosh().powi(2) / 1f64.sinh();
        assert_abs_diff_eq!(second_derivative(&cfg), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 1.0819767068693262, epsilon = 1e-14);
        let fd = fd_second_derivative(&cfg, 1e-3).unwrap();
        assert!((fd - expected).abs() < 1e-4 * expected);
        for t in [0.1, 0.5, 2.0] {
            let up = earthquake_length(&cfg, t).unwrap();
            assert_abs_diff_eq!(up, earthquake_length(&cfg, -t).unwrap(), epsilon = 1e-10);
            assert!(up > 1.0);
        }
        assert_abs_diff_eq!(convexity_bound(&cfg).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn sixty_degree_rate() {
        let cfg = single(unit_sigma(), tilted(PI / 3.0), 1.0);
        assert_abs_diff_eq!(first_derivative(&cfg), 0.5, epsilon = 1e-9);
        let dl = earthquake_length(&cfg, 1e-3).unwrap() - 1.0;
        // second-order term is about 5e-7
        assert_abs_diff_eq!(dl, 0.5e-3 + 0.5e-6 * second_derivative(&cfg), epsilon = 1e-8);
        let fd = fd_first_derivative(&cfg, 1e-5).unwrap();
        assert!((fd - 0.5).abs() < 1e-6 * 0.5);
    }

    #[test]
    fn opposite_angles_cancel() {
        let sigma = vertical(1.0, 40.0);
        let g1 = rotation_about(HPoint::new(0.0, 1.2).unwrap(), FRAC_PI_2 - PI / 3.0)
            .apply_geodesic(&Geodesic::from_reals(-1.2, 1.2).unwrap());
        let g2 = rotation_about(HPoint::new(0.0, 30.0).unwrap(), FRAC_PI_2 - 2.0 * PI / 3.0)
            .apply_geodesic(&Geodesic::from_reals(-30.0, 30.0).unwrap());
        let lam = Multicurve::new(vec![
            Fault { geodesic: g1, weight: 1.0 },
            Fault { geodesic: g2, weight: 1.0 },
        ])
        .unwrap();
        let cfg = EarthquakeConfig::new(sigma, lam).unwrap();
        assert_abs_diff_eq!(first_derivative(&cfg), 0.0, epsilon = 1e-12);
        assert!(fd_first_derivative(&cfg, 1e-5).unwrap().abs() < 1e-6);
    }

    #[test]
    fn two_perpendicular_faults() {
        let sigma = unit_sigma();
        let ys = [(-0.2f64).exp(), 0.2f64.exp()];
        let lam = Multicurve::new(
            ys.iter()
                .map(|&y| Fault {
                    geodesic: Geodesic::from_reals(-y, y).unwrap(),
                    weight: 1.0,
                })
                .collect(),
        )
        .unwrap();
        let cfg = EarthquakeConfig::new(sigma, lam).unwrap();
        let two = second_derivative(&cfg);
        let one = 0.5f64.cosh().powi(2) / 1f64.sinh();
        assert!(two > one);
        let fd = fd_second_derivative(&cfg, 1e-3).unwrap();
        assert!((fd - two).abs() < 1e-4 * two, "{fd} vs {two}");
        assert_eq!(intersection_number(&cfg), 2.0);
    }

    #[test]
    fn near_tangent_limit() {
        let cfg = single(unit_sigma(), tilted(0.05), 1.0);
        let c = &cfg.crossings[0].0;
        let expected = 0.05f64.sin().powi(2) * c.s_minus.cosh() * c.s_plus.cosh() / 1f64.sinh();
        assert_abs_diff_eq!(second_derivative(&cfg), expected, epsilon = 1e-12);
        assert!(convexity_ratio(&single(unit_sigma(), tilted(0.01), 1.0)).unwrap() < 1e-3);
        assert!(matches!(
            convexity_bound(&single(unit_sigma(), tilted(0.01), 1.0)),
            Err(EarthquakeError::NearTangent { .. })
        ));
    }

    #[test]
    fn empty_multicurve_is_rigid() {
        let cfg = EarthquakeConfig::new(unit_sigma(), Multicurve::default()).unwrap();
        assert_eq!(intersection_number(&cfg), 0.0);
        assert_eq!(earthquake_length(&cfg, 3.0).unwrap(), earthquake_length(&cfg, 0.0).unwrap());
        assert_eq!(convexity_ratio(&cfg), Err(EarthquakeError::Empty));
    }

    #[test]
    fn weights_and_guard() {
        let ys = [(-0.2f64).exp(), 0.3f64.exp()];
        let lam = Multicurve::new(vec![
            Fault {
                geodesic: Geodesic::from_reals(-ys[0], ys[0]).unwrap(),
                weight: 0.5,
            },
            Fault {
                geodesic: Geodesic::from_reals(-ys[1], ys[1]).unwrap(),
                weight: 2.5,
            },
        ])
        .unwrap();
        let cfg = EarthquakeConfig::new(unit_sigma(), lam).unwrap();
        assert_eq!(intersection_number(&cfg), 3.0);
        assert!(matches!(earthquake_length(&cfg, 4.0), Err(EarthquakeError::OutOfRange(_))));
    }

    #[test]
    fn rejects_crossing_faults() {
        let lam = Multicurve::new(vec![
            Fault {
                geodesic: Geodesic::from_reals(-1.0, 1.0).unwrap(),
                weight: 1.0,
            },
            Fault {
                geodesic: Geodesic::from_reals(0.0, 2.0).unwrap(),
                weight: 1.0,
            },
        ]);
        assert_eq!(lam, Err(EarthquakeError::NotDisjoint(0, 1)));
        let w = Multicurve::new(vec![Fault {
            geodesic: Geodesic::from_reals(-1.0, 1.0).unwrap(),
            weight: 0.0,
        }]);
        assert!(matches!(w, Err(EarthquakeError::NonPositiveWeight { .. })));
    }

    #[test]
    fn json_with_infinite_endpoint() {
        let v = serde_json::json!({
            "sigma": [[-1.0, 1.0], [1.0, 1.0]],
            "faults": [{"endpoints": [0.0, "inf"], "weight": 1.0}]
        });
        let cfg = EarthquakeConfig::from_json(&v).unwrap();
        assert_abs_diff_eq!(cfg.crossings[0].0.theta, FRAC_PI_2, epsilon = 1e-12);
        let back = EarthquakeConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back.crossings.len(), 1);
        assert!(EarthquakeConfig::from_json(&serde_json::json!({"sigma": []})).is_err());
    }

    #[test]
    fn isometry_equivariance() {
        let cfg = single(unit_sigma(), tilted(1.1), 1.7);
        let g = Isometry2::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let moved = cfg.transformed(&g).unwrap();
        assert_abs_diff_eq!(moved.crossings[0].0.theta, 1.1, epsilon = 1e-10);
        assert_abs_diff_eq!(
            earthquake_length(&moved, 0.3).unwrap(),
            earthquake_length(&cfg, 0.3).unwrap(),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(second_derivative(&moved), second_derivative(&cfg), epsilon = 1e-10);
    }
}
