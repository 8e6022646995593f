use num_complex::Complex64;
use oscillax::cutoffs::{chi, gamma_weight, make_dyadic_bump, psi};
use oscillax::propagator::evaluate_sa;
use oscillax::transform::hankel_fourier;
use oscillax::{BesselOrder, EvalPoint, RadialProfile, SymbolParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cutoffs_partition_unity(x in -4.0f64..4.0) {
        prop_assert!((chi(x) + psi(x) - 1.0).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&chi(x)));
    }

    #[test]
    fn dyadic_bumps_sum_to_one(e in -30.0f64..30.0) {
        let xi = 2f64.powf(e);
        prop_assert!((make_dyadic_bump().partition_sum(xi) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gamma_weight_is_comparable(s in -1.5f64..1.5, e in -8.0f64..12.0) {
        let xi = 2f64.powf(e);
        let ratio = gamma_weight(s, xi) / (1.0 + xi * xi).powf(s);
        let band = 2.0 * 4f64.powf(s.abs());
        prop_assert!(ratio * band >= 1.0 && ratio <= band, "{ratio}");
        if xi >= 1.0 {
            prop_assert!((1.0 - 1e-13..=2.0).contains(&gamma_weight(0.0, xi)));
        }
    }

    #[test]
    fn bessel_three_term_recurrence(lambda in 1.0f64..4.0, rho in 0.3f64..300.0) {
        let j = |l: f64| BesselOrder::new(l).unwrap().j(rho);
        let lhs = j(lambda - 1.0) + j(lambda + 1.0);
        let rhs = 2.0 * lambda / rho * j(lambda);
        let scale = j(lambda - 1.0).abs().max(j(lambda + 1.0).abs()).max(1e-3 / rho.sqrt());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn remainder_completes_the_main_term(lambda in 0.0f64..3.0, rho in 1.0f64..2000.0) {
        let o = BesselOrder::new(lambda).unwrap();
        let gap = o.j(rho) - o.main_term(rho) - o.remainder(rho);
        prop_assert!(gap.abs() < 1e-12, "{gap}");
    }

    #[test]
    fn propagator_is_linear(c in -3.0f64..3.0, r in 0.0f64..3.0, t in -0.95f64..0.95) {
        let p = SymbolParams::new(2.0, 2, 0.0).unwrap();
        let g1 = RadialProfile::gaussian(1.0).unwrap();
        let g2 = RadialProfile::smooth_bump(1.0, 0.5).unwrap();
        let sum = RadialProfile::combination(vec![(1.0, g1.clone()), (c, g2.clone())]).unwrap();
        let pt = EvalPoint::new(r, t).unwrap();
        let direct = evaluate_sa(&sum, &p, pt).unwrap();
        let parts = evaluate_sa(&g1, &p, pt).unwrap() + c * evaluate_sa(&g2, &p, pt).unwrap();
        prop_assert!((direct - parts).norm() < 1e-12 * (1.0 + parts.norm()));
    }
}

#[test]
fn gaussian_transform_scales() {
    for n in 1..=4 {
        for sigma in [0.5, 1.0, 2.0] {
            let f = RadialProfile::gaussian(sigma).unwrap();
            for rho in [0.0, 0.4, 1.3, 2.5] {
                let want = (2.0 * std::f64::consts::PI * sigma * sigma).powf(n as f64 / 2.0) * (-0.5 * (sigma * rho) * (sigma * rho)).exp();
                let got = hankel_fourier(&f, n, rho).unwrap();
                assert!((got - want).abs() < 1e-10, "n={n} sigma={sigma} rho={rho}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn gaussian_propagator_closed_form_at_origin() {
    let g = RadialProfile::gaussian(1.0).unwrap();
    let p = SymbolParams::new(2.0, 2, 0.0).unwrap();
    for t in [-0.9, -0.2, 0.0, 0.35, 0.8] {
        let got = evaluate_sa(&g, &p, EvalPoint::new(0.0, t).unwrap()).unwrap();
        let want = 1.0 / (2.0 * std::f64::consts::PI * Complex64::new(1.0, -2.0 * t));
        assert!((got - want).norm() < 1e-12, "t={t}: {got} vs {want}");
    }
}
