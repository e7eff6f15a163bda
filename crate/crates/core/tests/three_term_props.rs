use gauss_spectral::three_term::{self, Evaluable, FnEval, PeriodicFunction, ThreeTermSolution};
use gauss_spectral::transfer::BetaParam;
use num_complex::Complex64;
use proptest::prelude::*;

fn periodic(modes: usize) -> impl Strategy<Value = PeriodicFunction> {
    (
        -1.0f64..1.0,
        prop::collection::vec(-1.0f64..1.0, modes),
        prop::collection::vec(-1.0f64..1.0, modes),
    )
        .prop_map(|(c, a, b)| PeriodicFunction::new(c, a, b))
}

fn fit_grid() -> Vec<f64> {
    (0..50).map(|i| i as f64 / 50.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn round_trip_recovers_q(q in periodic(3), which in 0usize..3) {
        let b = [Complex64::new(1.0, 0.0), Complex64::new(1.25, 0.0), Complex64::new(1.0, 2.0)][which];
        let beta = BetaParam::auto(b).unwrap();
        let lambda = Complex64::new(2.0, 0.0);
        let sol = ThreeTermSolution::new(q.clone(), lambda, beta, 60, 0).unwrap().solve().unwrap();
        let back = three_term::associated_periodic(&sol, lambda, &beta, &fit_grid(), 3, 1e-8).unwrap();
        prop_assert!(back.q.re.max_coeff_distance(&q) < 1e-8);
        prop_assert!(back.q.im.max_abs_coeff() < 1e-8);
    }

    #[test]
    fn associated_periodic_is_linear(p in periodic(2), q in periodic(2)) {
        let beta = BetaParam::real(1.0).unwrap();
        let lambda = Complex64::new(2.0, 0.0);
        let solve = |r: PeriodicFunction| ThreeTermSolution::new(r, lambda, beta, 60, 0).unwrap().solve().unwrap();
        let (f, g) = (solve(p), solve(q));
        let sum = FnEval(|z: f64| f.eval(z).unwrap() + g.eval(z).unwrap());
        let a = |e: &dyn Evaluable| three_term::associated_periodic(e, lambda, &beta, &fit_grid(), 2, 1e-8).unwrap().q;
        let (af, ag, asum) = (a(&f), a(&g), a(&sum));
        let coeffs = |c: &PeriodicFunction| {
            let mut v = vec![c.constant];
            v.extend(&c.cos_coeffs);
            v.extend(&c.sin_coeffs);
            v
        };
        for (x, (y, z)) in coeffs(&asum.re).iter().zip(coeffs(&af.re).iter().zip(coeffs(&ag.re))) {
            prop_assert!((x - y - z).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_functions_are_periodic(q in periodic(6), z in -5.0f64..5.0) {
        prop_assert!((q.eval(z) - q.eval(z + 1.0)).abs() <= 1e-13 * (1.0 + q.coeff_l1()));
    }

    #[test]
    fn deeper_truncation_stays_within_the_estimate(q in periodic(2), depth in 4usize..20, z in 0.0f64..3.0) {
        let beta = BetaParam::real(1.0).unwrap();
        let lambda = Complex64::new(2.0, 0.0);
        let at = |d: usize| {
            let s = ThreeTermSolution::new(q.clone(), lambda, beta, d, 0).unwrap().solve().unwrap();
            s.eval_with_error(z).unwrap()
        };
        let (v, err) = at(depth);
        let (w, _) = at(depth + 2);
        prop_assert!((v - w).norm() <= err, "{v} vs {w}, estimate {err}");
    }
}

#[test]
fn json_form_round_trips() {
    let q = PeriodicFunction::new(0.5, vec![1.0, -0.25], vec![0.3]);
    let text = serde_json::to_string(&q).unwrap();
    assert_eq!(text, r#"{"constant":0.5,"cos":[1.0,-0.25],"sin":[0.3]}"#);
    let back: PeriodicFunction = serde_json::from_str(&text).unwrap();
    assert_eq!(back, q);
}
