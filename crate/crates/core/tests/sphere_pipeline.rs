use num_complex::Complex64;
use varcap::chebyshev::{MinimaxOptions, NumericBasis};
use varcap::diameter::{circled_equality, integral_formula_compare, FeketeConfig, FeketeStrategy};
use varcap::fixtures::{sphere_chart, sphere_circle_chart};
use varcap::okounkov::okounkov_body;
use varcap::series::DEFAULT_D_MAX;
use varcap::sets::{circled_sample, sample_random_sphere, CircleAction, OrbitArc};

#[test]
fn sphere_sandwich_on_small_clouds() {
    let body = okounkov_body(&sphere_chart(8).unwrap(), 2, DEFAULT_D_MAX).unwrap();
    let cfg = FeketeConfig { strategy: FeketeStrategy::Exhaustive, ..Default::default() };
    for (k, n) in [(1u32, 8usize), (2, 11)] {
        let cloud = sample_random_sphere(n, 11).unwrap();
        let basis = NumericBasis::from_nu_set(&body.stage(k).unwrap().nu_set);
        let report = integral_formula_compare(&cloud, &[basis], &cfg, &MinimaxOptions::default()).unwrap();
        let s = &report.sandwiches[0];
        assert!(s.exact && s.lower_holds == Some(true) && s.upper_holds);
        assert!(s.slack <= 1e-6);
        assert!(report.rows[0].within_bound);
    }
}

#[test]
fn circled_orbits_equalize_constants() {
    let body = okounkov_body(&sphere_circle_chart(8).unwrap(), 3, DEFAULT_D_MAX).unwrap();
    let action = CircleAction::new(0.9).unwrap();
    let seeds = [(Complex64::new(0.3, 0.1), 1.4), (Complex64::new(-0.2, 0.4), 1.8), (Complex64::new(0.5, -0.3), 2.5), (Complex64::new(0.1, 0.0), 1.2)];
    for arc in [OrbitArc::Full, OrbitArc::Half] {
        let cloud = circled_sample(&seeds, 256, &action, arc).unwrap();
        for k in 1..=3 {
            let basis = NumericBasis::from_nu_set(&body.stage(k).unwrap().nu_set);
            let r = circled_equality(&cloud, &basis, &[0, 1], 5e-3, &MinimaxOptions::default()).unwrap();
            assert!(r.entries.iter().all(|e| e.certified), "{arc:?} k={k}");
            match arc {
                OrbitArc::Full => assert!(r.max_difference <= 5e-3 && !r.hypothesis_violated, "k={k}: {}", r.max_difference),
                OrbitArc::Half => assert!(r.hypothesis_violated && r.max_difference > 0.1, "k={k}: {}", r.max_difference),
            }
        }
    }
}
