//! Hölder seminorms, the auxiliary function `|f|_α`, the partition
//! interpolation operator `P_{l,N}`, the chaining constant and Monte-Carlo
//! experiments on the essential spectral radius.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cf_core::{partition_points, sort_dedup, PartitionSpec, PARTITION_DEDUP_TOL};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Rule};
use crate::parallel::{self, Exec};
use crate::transfer::{lambda1, BetaParam, PreparedTransfer, DEFAULT_TOL};

/// Points of the uniform measurement grid used by [`norm_defect_estimate`].
pub const DEFECT_GRID: usize = 1024;
/// Fourier modes in the random test functions.
pub const TEST_MODES: usize = 24;
/// Partitions larger than this are replaced by their first level when
/// building the iteration grid.
const MAX_GRID_PARTITION: usize = 8192;

/// A piecewise-linear function on a grid covering `[0, 1]`, with exponent α.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderFunction {
    f: GridFunction,
    alpha: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("Hölder exponent must lie in (0, 1), got {alpha}")))
    }
}

impl HolderFunction {
    pub fn new(f: GridFunction, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if f.rule() != Rule::PiecewiseLinear {
            return Err(Error::domain("Hölder functions use the piecewise-linear rule"));
        }
        let (a, m) = f.domain();
        if a != 0.0 || m < 1.0 {
            return Err(Error::domain("Hölder functions must cover [0, 1]"));
        }
        Ok(HolderFunction { f, alpha })
    }

    /// Samples a real function at the given nodes.
    pub fn sample<F: Fn(f64) -> f64>(nodes: Vec<f64>, alpha: f64, f: F) -> Result<Self> {
        let values = nodes.iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
        let domain = (nodes[0], nodes[nodes.len() - 1]);
        Self::new(GridFunction::new(domain, nodes, values, Rule::PiecewiseLinear)?, alpha)
    }

    pub fn function(&self) -> &GridFunction {
        &self.f
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sup_norm(&self) -> f64 {
        self.f.sup_norm()
    }

    /// `‖f‖_∞ + ‖f‖_α` on the grid.
    pub fn norm(&self) -> f64 {
        self.sup_norm() + holder_seminorm(self)
    }
}

fn quotient_max(nodes: &[f64], values: &[Complex64], alpha: f64, i: usize) -> f64 {
    let (x, fx) = (nodes[i], values[i]);
    nodes
        .iter()
        .zip(values)
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, (&y, fy))| (fx - fy).norm() / (x - y).abs().powf(alpha))
        .fold(0.0, f64::max)
}

/// Largest Hölder quotient over pairs of grid nodes.
pub fn holder_seminorm(h: &HolderFunction) -> f64 {
    let nodes = h.f.nodes();
    let values = h.f.values();
    let mut best = 0.0f64;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let q = (values[i] - values[j]).norm() / (nodes[j] - nodes[i]).powf(h.alpha);
            best = best.max(q);
        }
    }
    best
}

/// `|f|_α(x)` at a grid node.
pub fn auxiliary_alpha(h: &HolderFunction, x: f64) -> Result<f64> {
    let nodes = h.f.nodes();
    let i = nodes
        .binary_search_by(|t| t.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        .map_err(|_| Error::domain(format!("{x} is not a grid node")))?;
    Ok(quotient_max(nodes, h.f.values(), h.alpha, i))
}

/// `|f|_α` at every node, as a function on the same grid.
pub fn auxiliary_function(h: &HolderFunction) -> Result<HolderFunction> {
    let nodes = h.f.nodes();
    let values = (0..nodes.len())
        .map(|i| Complex64::new(quotient_max(nodes, h.f.values(), h.alpha, i), 0.0))
        .collect();
    HolderFunction::new(h.f.with_values(values)?, h.alpha)
}

/// Piecewise-linear interpolant through `(p, f(p))`, constant past the
/// last point.
struct Interpolant {
    points: Vec<f64>,
    values: Vec<Complex64>,
}

impl Interpolant {
    fn new<F: Fn(f64) -> Complex64>(points: Vec<f64>, f: F) -> Self {
        let values = points.iter().map(|&p| f(p)).collect();
        Interpolant { points, values }
    }

    fn eval(&self, y: f64) -> Complex64 {
        let n = self.points.len();
        let i = self.points.partition_point(|&p| p <= y);
        if i == 0 {
            return self.values[0];
        }
        if i >= n {
            return self.values[n - 1];
        }
        let (p0, p1) = (self.points[i - 1], self.points[i]);
        if y == p0 {
            return self.values[i - 1];
        }
        let t = (y - p0) / (p1 - p0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }
}

/// `P_{l,N} f`: equal to `f` on the partition, linear in between, sampled
/// on the union of the input grid and the partition.
pub fn pln_apply(h: &HolderFunction, spec: &PartitionSpec) -> Result<HolderFunction> {
    let points = partition_points(spec)?;
    let interp = Interpolant::new(points.clone(), |p| h.f.eval_unchecked(p));
    let (_, m) = h.f.domain();
    let mut nodes: Vec<f64> = h.f.nodes().to_vec();
    nodes.extend(points.iter().copied().filter(|&p| p <= m));
    let nodes = sort_dedup(nodes, PARTITION_DEDUP_TOL);
    let values = nodes.iter().map(|&y| interp.eval(y)).collect();
    HolderFunction::new(GridFunction::new(h.f.domain(), nodes, values, Rule::PiecewiseLinear)?, h.alpha)
}

/// `max{3^{1−α}, √3}`.
pub fn chaining_constant(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(3f64.powf(1.0 - alpha).max(3f64.sqrt()))
}

/// `λ₁(Re β + α)`, the bound on the essential spectral radius on `C^α`.
pub fn essential_radius_bound(beta: Complex64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(beta.re > (1.0 - alpha) / 2.0) || !(beta.re + alpha > 0.5) {
        return Err(Error::domain(format!("need Re β > (1-α)/2 and Re β + α > 1/2, got β = {beta}, α = {alpha}")));
    }
    lambda1(beta.re + alpha, 1e-12)
}

/// Outcome of [`chain_test`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub alpha: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest observed ratio of the outer quotient to the bound.
    pub worst_ratio: f64,
}

/// Checks `|g(d)−g(a)|/(d−a)^α ≤ C·max(q_ab, q_bc, q_cd)` on random
/// quadruples `a < b ≤ c < d` with random values.
pub fn chain_test(alpha: f64, samples: usize, seed: u64) -> Result<ChainReport> {
    let c = chaining_constant(alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = 0.0f64;
    let q = |x: f64, y: f64, gx: f64, gy: f64| (gy - gx).abs() / (y - x).powf(alpha);
    let mut done = 0;
    while done < samples {
        let mut p = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let [a, b, cc, d] = p;
        if !(a < b && b <= cc && cc < d) {
            continue;
        }
        let g: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let inner = q(a, b, g[0], g[1]).max(q(cc, d, g[2], g[3]));
        let inner = if cc > b { inner.max(q(b, cc, g[1], g[2])) } else { inner };
        let outer = q(a, d, g[0], g[3]);
        let ratio = outer / (c * inner);
        if ratio > 1.0 + 1e-12 {
            violations += 1;
        }
        worst = worst.max(ratio);
        done += 1;
    }
    Ok(ChainReport {
        alpha,
        samples,
        violations,
        worst_ratio: worst,
    })
}

/// Random Fourier series `Σ n^{−α−1/2} cos(2πnx + θ_n)`, rescaled.
#[derive(Debug, Clone)]
pub struct FourierTestFunction {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    scale: f64,
}

impl FourierTestFunction {
    pub fn random<R: Rng>(alpha: f64, modes: usize, rng: &mut R) -> Self {
        let amplitudes = (1..=modes)
            .map(|n| (n as f64).powf(-alpha - 0.5) * rng.random_range(0.5..1.5))
            .collect();
        let phases = (0..modes).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        FourierTestFunction {
            amplitudes,
            phases,
            scale: 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (n, (a, t)) in self.amplitudes.iter().zip(&self.phases).enumerate() {
            acc += a * (2.0 * PI * (n + 1) as f64 * x + t).cos();
        }
        acc * self.scale
    }

    /// Rescales so that `sup + seminorm` on the uniform grid equals 1.
    pub fn normalize(&mut self, alpha: f64, grid: &UniformNorm) {
        let vals: Vec<Complex64> = grid.nodes.iter().map(|&x| Complex64::new(self.eval(x), 0.0)).collect();
        let n = grid.norm(&vals, alpha);
        if n > 0.0 {
            self.scale /= n;
        }
    }
}

/// `sup + seminorm` on a uniform grid with precomputed spacings `(kh)^α`.
pub struct UniformNorm {
    nodes: Vec<f64>,
    powers: Vec<f64>,
}

impl UniformNorm {
    pub fn new(points: usize, alpha: f64) -> Self {
        let h = 1.0 / (points - 1) as f64;
        let nodes = (0..points).map(|i| if i == points - 1 { 1.0 } else { i as f64 * h }).collect();
        let powers = (0..points).map(|k| (k as f64 * h).powf(alpha)).collect();
        UniformNorm { nodes, powers }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn norm(&self, values: &[Complex64], _alpha: f64) -> f64 {
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut semi = 0.0f64;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                semi = semi.max((values[i] - values[j]).norm() / self.powers[j - i]);
            }
        }
        sup + semi
    }
}

/// Node set used to iterate `L_β` in the defect experiment.
fn iteration_grid(spec: &PartitionSpec, partition: &[f64], uniform: &UniformNorm) -> Result<Vec<f64>> {
    let mut nodes = uniform.nodes.clone();
    if partition.len() <= MAX_GRID_PARTITION {
        nodes.extend_from_slice(partition);
    } else {
        nodes.extend(partition_points(&PartitionSpec { l: 1.min(spec.l), ..*spec })?);
    }
    Ok(sort_dedup(nodes, PARTITION_DEDUP_TOL))
}

/// `‖L_β^l (g − P g)‖` for a single test function, on prepared grids.
fn defect_for<F: Fn(f64) -> f64>(
    beta: &BetaParam,
    l: usize,
    partition: &[f64],
    nodes: &[f64],
    uniform: &UniformNorm,
    alpha: f64,
    g: F,
) -> Result<f64> {
    let pg = Interpolant::new(partition.to_vec(), |p| Complex64::new(g(p), 0.0));
    let u = nodes.iter().map(|&x| Complex64::new(g(x), 0.0) - pg.eval(x)).collect();
    let mut v = GridFunction::new((0.0, 1.0), nodes.to_vec(), u, Rule::PiecewiseLinear)?;
    for _ in 0..l {
        let prepared = PreparedTransfer::new(beta, &v, DEFAULT_TOL)?;
        let next = prepared.eval_many(nodes, Exec::Sequential)?;
        v = v.with_values(next)?;
    }
    let on_uniform: Vec<Complex64> = uniform.nodes.iter().map(|&x| v.eval_unchecked(x)).collect();
    Ok(uniform.norm(&on_uniform, alpha))
}

/// Defect `‖L_β^l (g − P_{l,N} g)‖` of one given function.
pub fn norm_defect_of<F: Fn(f64) -> f64>(beta: Complex64, alpha: f64, l: usize, spec: &PartitionSpec, g: F) -> Result<f64> {
    check_alpha(alpha)?;
    let beta = BetaParam::new(beta, 0)?;
    let partition = partition_points(spec)?;
    let uniform = UniformNorm::new(DEFECT_GRID, alpha);
    let nodes = iteration_grid(spec, &partition, &uniform)?;
    defect_for(&beta, l, &partition, &nodes, &uniform, alpha, g)
}

/// Monte-Carlo lower bound for `‖L_β^l − L_β^l P_{l,N}‖` on `C^α`.
pub fn norm_defect_estimate(
    beta: Complex64,
    alpha: f64,
    l: usize,
    spec: &PartitionSpec,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    norm_defect_estimate_with(beta, alpha, l, spec, trials, seed, Exec::default())
}

pub fn norm_defect_estimate_with(
    beta: Complex64,
    alpha: f64,
    l: usize,
    spec: &PartitionSpec,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<f64> {
    check_alpha(alpha)?;
    if trials == 0 || l == 0 {
        return Err(Error::domain("need trials >= 1 and l >= 1"));
    }
    let beta = BetaParam::new(beta, 0)?;
    let partition = partition_points(spec)?;
    let uniform = UniformNorm::new(DEFECT_GRID, alpha);
    let nodes = iteration_grid(spec, &partition, &uniform)?;
    let results = parallel::map_range(trials, exec, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut g = FourierTestFunction::random(alpha, TEST_MODES, &mut rng);
        g.normalize(alpha, &uniform);
        defect_for(&beta, l, &partition, &nodes, &uniform, alpha, |x| g.eval(x))
    });
    let mut best = 0.0f64;
    for r in results {
        best = best.max(r?);
    }
    Ok(best)
}

/// Largest excess of `|L_β f|_α(x)` over `L_{Re β+α}((1+ε)|f|_α)(x)` across
/// grid nodes, divided by `‖f‖_∞`.
pub fn continuity_excess(beta: Complex64, h: &HolderFunction, eps: f64) -> Result<f64> {
    let b = BetaParam::new(beta, 0)?;
    let nodes = h.f.nodes();
    let lf = PreparedTransfer::new(&b, &h.f, DEFAULT_TOL)?.eval_many(nodes, Exec::Sequential)?;
    let lf = HolderFunction::new(h.f.with_values(lf)?, h.alpha)?;
    let lhs = auxiliary_function(&lf)?;
    let aux = auxiliary_function(h)?;
    let scaled = aux
        .f
        .with_values(aux.f.values().iter().map(|v| v * (1.0 + eps)).collect())?;
    let shifted = BetaParam::new(Complex64::new(beta.re + h.alpha, 0.0), 0)?;
    let sup = h.sup_norm();
    let rhs = PreparedTransfer::new(&shifted, &scaled, DEFAULT_TOL)?.eval_many(nodes, Exec::Sequential)?;
    let mut worst = f64::NEG_INFINITY;
    for (l, r) in lhs.f.values().iter().zip(&rhs) {
        worst = worst.max((l.re - r.re) / sup);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn seminorm_examples() {
        let c = HolderFunction::sample(uniform(11), 0.3, |_| 2.0).unwrap();
        assert_eq!(holder_seminorm(&c), 0.0);
        let id = HolderFunction::sample(uniform(101), 0.5, |x| x).unwrap();
        assert!((holder_seminorm(&id) - 1.0).abs() < 1e-14);
        assert!((auxiliary_alpha(&id, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(auxiliary_alpha(&id, 0.005).is_err());
        let graded: Vec<f64> = (0..200).map(|i| (i as f64 / 199.0).powi(4)).collect();
        let sq = HolderFunction::sample(graded, 0.5, f64::sqrt).unwrap();
        assert!((holder_seminorm(&sq) - 1.0).abs() < 0.02);
        let aux = auxiliary_function(&sq).unwrap();
        assert!((aux.sup_norm() - holder_seminorm(&sq)).abs() < 1e-14);
    }

    #[test]
    fn interpolation_examples() {
        let f = HolderFunction::sample(uniform(9), 0.5, |x| x * x).unwrap();
        let spec = PartitionSpec::new(0, 2, 1).unwrap();
        let p = pln_apply(&f, &spec).unwrap();
        assert!((p.function().eval(0.25).unwrap().re - 0.125).abs() < 1e-15);
        let pp = pln_apply(&p, &spec).unwrap();
        assert_eq!(p.function().nodes(), pp.function().nodes());
        for (a, b) in p.function().values().iter().zip(pp.function().values()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn chaining_values() {
        assert!((chaining_constant(0.5).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((chaining_constant(0.1).unwrap() - 3f64.powf(0.9)).abs() < 1e-15);
        assert!((chaining_constant(1.0 - 1e-9).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!(chaining_constant(1.0).is_err());
        let r = chain_test(0.5, 2000, 7).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn radius_bounds() {
        assert!(essential_radius_bound(Complex64::new(1.0, 0.0), 0.5).unwrap() < 1.0);
        let b = essential_radius_bound(Complex64::new(0.25, 0.0), 0.75).unwrap();
        assert!((b - 1.0).abs() < 1e-8);
        assert!(essential_radius_bound(Complex64::new(0.1, 0.0), 0.5).is_err());
    }

    #[test]
    fn partition_functions_have_no_defect() {
        let spec = PartitionSpec::new(1, 4, 4).unwrap();
        let pts = partition_points(&spec).unwrap();
        let vals: Vec<f64> = pts.iter().map(|p| (7.0 * p).sin()).collect();
        let interp = Interpolant::new(pts.clone(), |p| Complex64::new((7.0 * p).sin(), 0.0));
        assert_eq!(interp.eval(pts[3]).re, vals[3]);
        let d = norm_defect_of(Complex64::new(1.0, 0.0), 0.6, 2, &spec, |x| interp.eval(x).re).unwrap();
        assert!(d < 1e-14, "{d}");
    }
}
