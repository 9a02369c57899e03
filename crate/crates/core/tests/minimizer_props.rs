use std::f64::consts::{FRAC_PI_2, PI, TAU};

use hypregen::minimizer::*;
use hypregen::polygon::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn strict_spec() -> impl Strategy<Value = AngleSpec> {
    (4usize..=7, prop::collection::vec(0.2..=FRAC_PI_2, 7))
        .prop_map(|(n, a)| a[..n].to_vec())
        .prop_filter("hyperbolic with margin", |a| {
            a.iter().map(|t| PI - t).sum::<f64>() - TAU > 0.05
        })
        .prop_map(|a| AngleSpec::strict(a).unwrap())
}

fn weights(n: usize) -> impl Strategy<Value = WeightSpec> {
    prop::collection::vec(0.5..=3.0f64, n).prop_map(|w| WeightSpec::new(w).unwrap())
}

fn spec_and_weights() -> impl Strategy<Value = (AngleSpec, WeightSpec)> {
    strict_spec().prop_flat_map(|s| {
        let n = s.len();
        (Just(s), weights(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weighted_solution_beats_random_moduli_points((spec, w) in spec_and_weights(), seed in any::<u64>()) {
        let best = solve_weighted(&spec, &w).unwrap();
        let f0 = w_perimeter(&best.polygon, &w).unwrap();
        let m = best.polygon.moduli_point();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sampled = 0;
        let mut attempts = 0;
        while sampled < 200 && attempts < 4000 {
            attempts += 1;
            let free: Vec<f64> = m.free_lengths.iter().map(|l| l * rng.gen_range(-0.7f64..0.7).exp()).collect();
            let Ok(q) = close(&spec, &free, m.solved_lengths) else { continue };
            sampled += 1;
            let f = w_perimeter(&q, &w).unwrap();
            let near = free.iter().zip(&m.free_lengths).all(|(a, b)| (a - b).abs() < 1e-6);
            prop_assert!(f > f0 || (near && f >= f0 - 1e-12), "{f} < {f0}");
        }
        prop_assert!(sampled >= 50, "only {sampled} feasible samples");
    }

    #[test]
    fn hessian_is_positive_definite_at_minimizers((spec, w) in spec_and_weights()) {
        let best = solve_weighted(&spec, &w).unwrap();
        let r = criticality_report(&spec, &best.polygon, &w).unwrap();
        prop_assert!(r.min_eigenvalue > 0.0);
        prop_assert!(r.asymmetry < 1e-4);
        prop_assert!(r.gradient_norm < 1e-5);
    }

    #[test]
    fn incircle_and_weighted_agree_for_uniform_weights(spec in strict_spec()) {
        let inc = solve_incircle(&spec).unwrap();
        let wtd = solve_weighted(&spec, &WeightSpec::uniform(spec.len())).unwrap();
        let (a, b) = (perimeter(&inc.polygon), perimeter(&wtd.polygon));
        prop_assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn quadrilateral_shrinks_toward_threshold(shares in prop::collection::vec(0.1..1.0f64, 4)) {
        let total: f64 = shares.iter().sum();
        let mut last: Option<(f64, f64)> = None;
        for eps in [0.1, 0.05, 0.01] {
            let angles = shares.iter().map(|s| FRAC_PI_2 - eps * s / total).collect();
            let sol = solve_incircle(&AngleSpec::strict(angles).unwrap()).unwrap();
            let p = perimeter(&sol.polygon);
            if let Some((r0, p0)) = last {
                prop_assert!(sol.r < r0 && p < p0);
            }
            last = Some((sol.r, p));
        }
    }
}
