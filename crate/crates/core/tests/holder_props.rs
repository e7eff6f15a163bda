use gauss_spectral::cf_core::PartitionSpec;
use gauss_spectral::holder::{self, FourierTestFunction, HolderFunction, UniformNorm};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn test_function(alpha: f64, points: usize, seed: u64) -> HolderFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = UniformNorm::new(points, alpha);
    let mut g = FourierTestFunction::random(alpha, 12, &mut rng);
    g.normalize(alpha, &uniform);
    HolderFunction::sample(uniform.nodes().to_vec(), alpha, |x| g.eval(x)).unwrap()
}

fn slope_t_statistic(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let resid: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let se = (resid / (n - 2.0) / sxx).sqrt();
    if se == 0.0 {
        0.0
    } else {
        slope / se
    }
}

#[test]
fn continuity_inequality_with_fitted_constant() {
    let eps = 0.1;
    for (alpha, beta) in [(0.5, Complex64::new(1.0, 0.0)), (0.3, Complex64::new(0.9, 4.0))] {
        let excess: Vec<f64> = (0..50)
            .map(|i| holder::continuity_excess(beta, &test_function(alpha, 129, 100 + i), eps).unwrap())
            .collect();
        // D_ε is fitted on the first half (largest excess with a 1.5× margin)
        // and then held fixed for the second half.
        let d_eps = 1.5 * excess[..25].iter().copied().fold(0.0, f64::max);
        assert!(d_eps.is_finite());
        for (i, e) in excess.iter().enumerate().skip(25) {
            assert!(*e <= d_eps, "α = {alpha}: function {i} needs {e} > D_ε = {d_eps}");
        }
        let t = slope_t_statistic(&excess);
        assert!(t.abs() < 3.0, "α = {alpha}: excess trends with the index (t = {t})");
    }
}

#[test]
fn defect_decreases_with_n_under_paired_seeds() {
    let beta = Complex64::new(1.0, 0.0);
    for seed in [1, 2] {
        let d: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| holder::norm_defect_estimate(beta, 0.6, 1, &PartitionSpec::new(1, n, 64).unwrap(), 2, seed).unwrap())
            .collect();
        assert!(d.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {d:?}");
    }
}

#[test]
fn nussbaum_exponent_is_consistent() {
    let beta = Complex64::new(1.0, 0.0);
    let bound = holder::essential_radius_bound(beta, 0.6).unwrap();
    let spec = PartitionSpec::new(2, 64, 32).unwrap();
    let d = holder::norm_defect_estimate(beta, 0.6, 2, &spec, 2, 9).unwrap();
    assert!(d.sqrt() <= 1.25 * bound, "{} vs {}", d.sqrt(), bound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn interpolation_is_bounded(
        alpha in 0.1f64..0.95,
        l in 1usize..=3,
        n in 2usize..=64,
        seed in any::<u64>(),
    ) {
        let f = test_function(alpha, 257, seed);
        let spec = PartitionSpec::new(l, n, [16, 8, 4][l - 1]).unwrap();
        let p = holder::pln_apply(&f, &spec).unwrap();
        let c = holder::chaining_constant(alpha).unwrap();
        prop_assert!(holder::holder_seminorm(&p) <= c * holder::holder_seminorm(&f) * (1.0 + 1e-12));
        prop_assert!(p.sup_norm() <= f.sup_norm() * (1.0 + 1e-15));
        let pp = holder::pln_apply(&p, &spec).unwrap();
        for (a, b) in p.function().values().iter().zip(pp.function().values()) {
            prop_assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn chaining_lemma_has_no_violations(alpha in 0.05f64..0.95, seed in any::<u64>()) {
        let r = holder::chain_test(alpha, 2000, seed).unwrap();
        prop_assert_eq!(r.violations, 0);
    }
}
