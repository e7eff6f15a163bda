use gauss_spectral::grid::GridFunction;
use gauss_spectral::transfer::{self, apply_transfer, BetaParam, PreparedTransfer, DEFAULT_TOL};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn beta() -> impl Strategy<Value = Complex64> {
    (0.6f64..2.5, -12.0f64..12.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transfer_is_linear(
        b in beta(),
        p in prop::collection::vec(-1.0f64..1.0, 1..6),
        q in prop::collection::vec(-1.0f64..1.0, 1..6),
        a in -2.0f64..2.0,
        bb in -2.0f64..2.0,
        z in 0.0f64..1.0,
    ) {
        let beta = BetaParam::auto(b).unwrap();
        let f = GridFunction::chebyshev(16, 0.0, 1.0, |x| c(poly(&p, x))).unwrap();
        let g = GridFunction::chebyshev(16, 0.0, 1.0, |x| c(poly(&q, x))).unwrap();
        let sum = GridFunction::chebyshev(16, 0.0, 1.0, |x| c(a * poly(&p, x) + bb * poly(&q, x))).unwrap();
        let lhs = apply_transfer(&beta, &sum, z, DEFAULT_TOL).unwrap();
        let rhs = a * apply_transfer(&beta, &f, z, DEFAULT_TOL).unwrap() + bb * apply_transfer(&beta, &g, z, DEFAULT_TOL).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
    }

    #[test]
    fn collocation_matches_pointwise(b in beta(), p in prop::collection::vec(-1.0f64..1.0, 1..8)) {
        let beta = BetaParam::auto(b).unwrap();
        let op = transfer::build_collocation(&beta, 20, None, DEFAULT_TOL).unwrap();
        let values = op.sample(|x| c(poly(&p, x)));
        let applied = op.apply(&values);
        let f = op.grid_function(values).unwrap();
        let pt = PreparedTransfer::new(&beta, &f, DEFAULT_TOL).unwrap();
        for (x, v) in op.nodes().iter().zip(&applied) {
            let w = pt.eval(*x).unwrap();
            prop_assert!((v - w).norm() < 1e-11 * (1.0 + w.norm()), "{v} vs {w}");
        }
    }
}

#[test]
fn continuation_orders_agree() {
    let f = GridFunction::chebyshev(24, 0.0, 1.0, |x| Complex64::new((2.0 * x).exp() * (1.0 + x * x).recip(), x.sin())).unwrap();
    let mut state = 12345u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for b in [c(0.75), c(1.5), Complex64::new(0.9, 6.0), Complex64::new(2.0, -3.0)] {
        let k0 = BetaParam::new(b, 0).unwrap();
        let k2 = BetaParam::new(b, 2).unwrap();
        let p0 = PreparedTransfer::new(&k0, &f, DEFAULT_TOL).unwrap();
        let p2 = PreparedTransfer::new(&k2, &f, DEFAULT_TOL).unwrap();
        for _ in 0..20 {
            let z = next();
            let (a, b2) = (p0.eval(z).unwrap(), p2.eval(z).unwrap());
            assert!((a - b2).norm() < 1e-10 * (1.0 + a.norm()), "β = {b}, z = {z}: {a} vs {b2}");
        }
    }
}

#[test]
fn lambda1_decreases() {
    let vals: Vec<f64> = (6..=30).map(|i| transfer::lambda1(i as f64 / 10.0, 1e-12).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    assert!((transfer::lambda1(1.0, 1e-12).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn power_iteration_rate_matches_spectral_gap() {
    let beta = BetaParam::real(1.0).unwrap();
    let op = transfer::build_collocation(&beta, 40, None, DEFAULT_TOL).unwrap();
    let l2 = transfer::spectrum(&op, 2).unwrap()[1].0.norm();
    let h = op.sample(|x| c(1.0 / ((1.0 + x) * std::f64::consts::LN_2)));
    let mut v = vec![c(1.0); op.dim()];
    let mut errs = Vec::new();
    for _ in 0..14 {
        v = op.matrix().matvec(&v);
        errs.push(v.iter().zip(&h).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    // Log-linear fit of the error over the geometric phase.
    let pts: Vec<(f64, f64)> = errs.iter().enumerate().skip(3).map(|(i, e)| (i as f64, e.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    let rate = slope.exp();
    assert!((rate - l2).abs() < 0.1 * l2, "rate {rate} vs |λ₂| {l2}");
    let (lam, _, _) = transfer::power_iteration(op.matrix(), vec![c(1.0); op.dim()], 1e-13, 200).unwrap();
    assert!((lam - 1.0).norm() < 1e-10);
}

#[test]
fn pl_eigenfunction_matches_collocation() {
    let beta = BetaParam::real(1.0).unwrap();
    let op = transfer::build_collocation(&beta, 40, None, DEFAULT_TOL).unwrap();
    let lead = transfer::spectrum(&op, 1).unwrap()[0].1.clone();
    let mut g = GridFunction::uniform_linear(2000, 0.0, 1.0, |_| c(1.0)).unwrap();
    for _ in 0..30 {
        let p = PreparedTransfer::new(&beta, &g, DEFAULT_TOL).unwrap();
        let vals = p.eval_many(g.nodes(), Default::default()).unwrap();
        let s = vals[0];
        g = g.with_values(vals.into_iter().map(|v| v / s).collect()).unwrap();
    }
    let l0 = lead.eval(0.0).unwrap();
    let worst = g
        .nodes()
        .iter()
        .zip(g.values())
        .map(|(&x, v)| (lead.eval(x).unwrap() / l0 - v).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}
