//! Lewis' three-term equation `λf(z) − λf(z+1) = (z+1)^{−2β} f(1/(z+1))`:
//! residuals, the associated periodic function, solutions built from a
//! periodic `Q` by the resolvent series, and asymptotic coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cf_core::{branch_eval, weight_product, Word};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{CMatrix, Lu};
use crate::special::{bernoulli, hurwitz_zeta};
use crate::transfer::{build_collocation, lambda1, plan_tail, BetaParam, PreparedTransfer, TailSpec, DEFAULT_TOL};

/// Collocation dimension used to iterate the resolvent series.
pub const SERIES_DIM: usize = 48;
/// The Hölder exponent assumed for Fourier data in the convergence check.
pub const ALPHA_EFFECTIVE: f64 = 1.0;

/// Anything that can be evaluated at a real point.
pub trait Evaluable: Sync {
    fn eval(&self, z: f64) -> Result<Complex64>;
}

/// Adapts a closure to [`Evaluable`].
pub struct FnEval<F>(pub F);

impl<F: Fn(f64) -> Complex64 + Sync> Evaluable for FnEval<F> {
    fn eval(&self, z: f64) -> Result<Complex64> {
        Ok((self.0)(z))
    }
}

/// `c₀ + Σ_m (a_m cos 2πmz + b_m sin 2πmz)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PeriodicFunction {
    pub constant: f64,
    #[serde(rename = "cos")]
    pub cos_coeffs: Vec<f64>,
    #[serde(rename = "sin")]
    pub sin_coeffs: Vec<f64>,
}

impl PeriodicFunction {
    pub fn new(constant: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        PeriodicFunction {
            constant,
            cos_coeffs,
            sin_coeffs,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, z: f64) -> f64 {
        let t = z - z.floor();
        let mut acc = self.constant;
        for (m, a) in self.cos_coeffs.iter().enumerate() {
            acc += a * (2.0 * PI * (m + 1) as f64 * t).cos();
        }
        for (m, b) in self.sin_coeffs.iter().enumerate() {
            acc += b * (2.0 * PI * (m + 1) as f64 * t).sin();
        }
        acc
    }

    pub fn is_odd(&self) -> bool {
        self.constant == 0.0 && self.cos_coeffs.iter().all(|&a| a == 0.0)
    }

    pub fn is_even(&self) -> bool {
        self.sin_coeffs.iter().all(|&b| b == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.cos_coeffs
            .iter()
            .chain(&self.sin_coeffs)
            .fold(self.constant.abs(), |m, c| m.max(c.abs()))
    }

    /// Sum of absolute coefficients, an upper bound for the sup norm.
    pub fn coeff_l1(&self) -> f64 {
        self.constant.abs() + self.cos_coeffs.iter().chain(&self.sin_coeffs).map(|c| c.abs()).sum::<f64>()
    }

    /// Coefficient-wise difference, padding the shorter side with zeros.
    pub fn max_coeff_distance(&self, other: &PeriodicFunction) -> f64 {
        let dist = |a: &[f64], b: &[f64]| {
            (0..a.len().max(b.len()))
                .map(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs())
                .fold(0.0, f64::max)
        };
        (self.constant - other.constant)
            .abs()
            .max(dist(&self.cos_coeffs, &other.cos_coeffs))
            .max(dist(&self.sin_coeffs, &other.sin_coeffs))
    }
}

impl Evaluable for PeriodicFunction {
    fn eval(&self, z: f64) -> Result<Complex64> {
        Ok(Complex64::new(PeriodicFunction::eval(self, z), 0.0))
    }
}

/// A complex periodic function stored as real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexPeriodic {
    pub re: PeriodicFunction,
    pub im: PeriodicFunction,
}

impl ComplexPeriodic {
    pub fn eval(&self, z: f64) -> Complex64 {
        Complex64::new(self.re.eval(z), self.im.eval(z))
    }
}

/// `max_z |λf(z) − λf(z+1) − (z+1)^{−2β} f(1/(z+1))|` over the grid.
pub fn residual(f: &dyn Evaluable, lambda: Complex64, beta: Complex64, grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &z in grid {
        if z <= -1.0 {
            return Err(Error::domain(format!("residual grid point {z} must exceed -1")));
        }
        let w = Complex64::new(z + 1.0, 0.0).powc(-2.0 * beta);
        let r = lambda * (f.eval(z)? - f.eval(z + 1.0)?) - w * f.eval(1.0 / (z + 1.0))?;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Parameters of a solution built from `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeTermSolution {
    pub q: PeriodicFunction,
    pub lambda: Complex64,
    pub beta: BetaParam,
    pub depth: usize,
    pub digit_cutoff: usize,
}

impl ThreeTermSolution {
    /// Checks `|λ| > λ₁(Re β + 1)` so the resolvent series converges.
    pub fn new(q: PeriodicFunction, lambda: Complex64, beta: BetaParam, depth: usize, digit_cutoff: usize) -> Result<Self> {
        if lambda.norm() == 0.0 {
            return Err(Error::domain("λ must be nonzero"));
        }
        if depth == 0 {
            return Err(Error::domain("series depth must be at least 1"));
        }
        let bound = lambda1(beta.value().re + ALPHA_EFFECTIVE, 1e-12)?;
        if lambda.norm() <= bound {
            return Err(Error::domain(format!(
                "|λ| = {} does not exceed λ₁(Re β + 1) = {bound}",
                lambda.norm()
            )));
        }
        Ok(ThreeTermSolution {
            q,
            lambda,
            beta,
            depth,
            digit_cutoff,
        })
    }

    /// Sums `Σ_{n<depth} λ^{−n} L^n Q` on the collocation grid of `[0, 1]`.
    pub fn solve(&self) -> Result<SeriesSolution> {
        self.solve_with_dim(SERIES_DIM)
    }

    pub fn solve_with_dim(&self, n: usize) -> Result<SeriesSolution> {
        let planned = plan_tail(n, 1.0, &self.beta, DEFAULT_TOL);
        let tail = TailSpec {
            n_tail: planned.n_tail.max(self.digit_cutoff),
            order: planned.order,
        };
        let op = build_collocation(&self.beta, n, Some(tail), DEFAULT_TOL)?;
        let inv = 1.0 / self.lambda;
        let mut term: Vec<Complex64> = op.sample(|x| Complex64::new(self.q.eval(x), 0.0));
        let mut sum = term.clone();
        let sup = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut norms = vec![sup(&term)];
        let mut rising = 0;
        // Partial sums through depth−1; evaluation adds the last L application.
        for _ in 1..self.depth {
            term = op.apply(&term).into_iter().map(|c| c * inv).collect();
            let nrm = sup(&term);
            let prev = *norms.last().unwrap();
            if prev > 0.0 && nrm > prev * (1.0 + 1e-12) && nrm > 1e-300 {
                rising += 1;
                if rising >= 3 {
                    return Err(Error::Divergence(format!(
                        "resolvent terms grew for three consecutive depths at |λ| = {}",
                        self.lambda.norm()
                    )));
                }
            } else {
                rising = 0;
            }
            norms.push(nrm);
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
        }
        let last = op.apply(&term).into_iter().map(|c| c * inv);
        let last_norm = last.map(|c| c.norm()).fold(0.0, f64::max);
        norms.push(last_norm);
        let ratio = norms
            .windows(2)
            .rev()
            .take(3)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max);
        let grid = op.grid_function(sum)?;
        let scale = grid.sup_norm();
        // Sup norm on [0, 1] of everything from t_depth on, assuming the
        // observed ratio persists.
        let tail_bound = if ratio < 1.0 { last_norm / (1.0 - ratio) } else { f64::INFINITY };
        Ok(SeriesSolution {
            params: self.clone(),
            partial: grid,
            tail_bound,
            floor: 1e-12 * scale.max(self.q.coeff_l1()),
            ratio,
        })
    }
}

/// A solved resolvent series, `f = Q + λ^{−1} L S` with `S` the partial
/// sum on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    params: ThreeTermSolution,
    partial: GridFunction,
    tail_bound: f64,
    floor: f64,
    ratio: f64,
}

impl SeriesSolution {
    pub fn params(&self) -> &ThreeTermSolution {
        &self.params
    }

    /// Node values of the partial sum through depth−1 on `[0, 1]`.
    pub fn partial_sum(&self) -> &GridFunction {
        &self.partial
    }

    /// Largest of the last observed term ratios.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Value at `z ≥ 0` and an error estimate.
    pub fn eval_with_error(&self, z: f64) -> Result<(Complex64, f64)> {
        if !(z >= 0.0) {
            return Err(Error::domain(format!("series solution is evaluated for z >= 0, got {z}")));
        }
        let b = &self.params.beta;
        let lf = PreparedTransfer::new(b, &self.partial, DEFAULT_TOL)?.eval(z)?;
        let value = Complex64::new(self.params.q.eval(z), 0.0) + lf / self.params.lambda;
        // The omitted part is λ⁻¹L applied to the tail, and |L g(z)| is at most
        // ζ_H(2 Re β, z+1)·sup|g| when 2 Re β > 1.
        let sigma2 = 2.0 * b.value().re;
        let step = if sigma2 > 1.0 {
            hurwitz_zeta(Complex64::new(sigma2, 0.0), z + 1.0)?.re / self.params.lambda.norm()
        } else {
            self.ratio
        };
        Ok((value, self.tail_bound * step + self.floor))
    }
}

impl Evaluable for SeriesSolution {
    fn eval(&self, z: f64) -> Result<Complex64> {
        Ok(self.eval_with_error(z)?.0)
    }
}

/// `solve_from_Q`: the resolvent series at one point.
pub fn solve_from_q(sol: &ThreeTermSolution, z: f64) -> Result<(Complex64, f64)> {
    sol.solve()?.eval_with_error(z)
}

/// Literal cylinder-word sum `Σ_{n≤depth} λ^{−n} Σ_{|w|=n} Q(ψ_w(z))·w(z)`
/// with digits up to `cutoff`, enumerated depth-major and lexicographically.
/// Returns the partial sum and a bound on the words dropped by the cutoff.
pub fn cylinder_partial_sum(
    q: &PeriodicFunction,
    lambda: Complex64,
    beta: Complex64,
    z: f64,
    depth: usize,
    cutoff: u32,
) -> Result<(Complex64, f64)> {
    if !(beta.re > 0.5) {
        return Err(Error::domain("word sums need Re β > 1/2"));
    }
    let mut total = Complex64::new(q.eval(z), 0.0);
    let mut words = vec![Word::identity()];
    let inv = 1.0 / lambda;
    let mut lam_pow = Complex64::new(1.0, 0.0);
    for _ in 1..=depth {
        lam_pow *= inv;
        let mut next = Vec::with_capacity(words.len() * cutoff as usize);
        let mut level = Complex64::zero();
        for w in &words {
            for d in 1..=cutoff {
                let mut digits = Vec::with_capacity(w.depth() + 1);
                digits.push(d);
                digits.extend_from_slice(w.digits());
                let word = Word::new(digits)?;
                level += q.eval(branch_eval(&word, z)) * weight_product(&word, z, beta);
                next.push(word);
            }
        }
        next.sort_by(|a, b| a.digits().cmp(b.digits()));
        total += level * lam_pow;
        words = next;
    }
    // Each weight is at most Π a_k^{−2 Re β}; words with a digit above the
    // cutoff sum to at most n ζ(2σ)^{n−1} ζ_H(2σ, cutoff+1).
    let s = Complex64::new(2.0 * beta.re, 0.0);
    let full = hurwitz_zeta(s, 1.0)?.re;
    let over = hurwitz_zeta(s, f64::from(cutoff) + 1.0)?.re;
    let qmax = q.coeff_l1();
    let mut bound = 0.0;
    for n in 1..=depth {
        bound += qmax * lambda.norm().powi(-(n as i32)) * n as f64 * full.powi(n as i32 - 1) * over;
    }
    Ok((total, bound))
}

/// Output of [`associated_periodic`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociatedPeriodic {
    pub q: ComplexPeriodic,
    /// Largest deviation of the fitted series from the samples.
    pub fit_residual: f64,
    /// `max_z |Q(z) − Q(z+1)|` over the grid.
    pub periodicity_defect: f64,
}

/// Chebyshev samples of `f` on `[0, 1]` used to apply `L_β`.
fn sample_unit(f: &dyn Evaluable, n: usize) -> Result<GridFunction> {
    let nodes = crate::grid::chebyshev_lobatto(n, 0.0, 1.0);
    let values = nodes.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    GridFunction::new((0.0, 1.0), nodes, values, crate::grid::Rule::ChebyshevBarycentric)
}

/// Least-squares trigonometric fit with `modes` harmonics.
fn fit_fourier(points: &[f64], values: &[Complex64], modes: usize) -> Result<(Vec<Complex64>, f64)> {
    let k = 2 * modes + 1;
    if points.len() < k {
        return Err(Error::domain(format!("{} samples cannot fit {modes} harmonics", points.len())));
    }
    let basis = |z: f64, j: usize| -> f64 {
        if j == 0 {
            1.0
        } else if j <= modes {
            (2.0 * PI * j as f64 * z).cos()
        } else {
            (2.0 * PI * (j - modes) as f64 * z).sin()
        }
    };
    let mut normal = CMatrix::zeros(k);
    let mut rhs = vec![Complex64::zero(); k];
    for (&z, v) in points.iter().zip(values) {
        let row: Vec<f64> = (0..k).map(|j| basis(z, j)).collect();
        for i in 0..k {
            rhs[i] += v * row[i];
            for j in 0..k {
                normal[(i, j)] += Complex64::new(row[i] * row[j], 0.0);
            }
        }
    }
    let coeffs = Lu::new(&normal).solve(&rhs)?;
    let resid = points
        .iter()
        .zip(values)
        .map(|(&z, v)| {
            let fit: Complex64 = (0..k).map(|j| coeffs[j] * basis(z, j)).sum();
            (fit - v).norm()
        })
        .fold(0.0, f64::max);
    Ok((coeffs, resid))
}

/// `Q = f − λ^{−1} L_β f` sampled on `grid ⊂ [0, 1)`, fitted by `modes`
/// harmonics. Rejects `f` when `Q` fails to be periodic within `10·tol`.
pub fn associated_periodic(
    f: &dyn Evaluable,
    lambda: Complex64,
    beta: &BetaParam,
    grid: &[f64],
    modes: usize,
    tol: f64,
) -> Result<AssociatedPeriodic> {
    if grid.iter().any(|&z| !(0.0..1.0).contains(&z)) {
        return Err(Error::domain("fit grid must lie in [0, 1)"));
    }
    let fg = sample_unit(f, SERIES_DIM)?;
    let lf = PreparedTransfer::new(beta, &fg, DEFAULT_TOL)?;
    let q_at = |z: f64| -> Result<Complex64> { Ok(f.eval(z)? - lf.eval(z)? / lambda) };
    let mut samples = Vec::with_capacity(grid.len());
    let mut defect = 0.0f64;
    for &z in grid {
        let q0 = q_at(z)?;
        defect = defect.max((q0 - q_at(z + 1.0)?).norm());
        samples.push(q0);
    }
    if defect > 10.0 * tol {
        return Err(Error::NotASolution {
            defect,
            detail: "f − λ⁻¹L_β f is not 1-periodic".into(),
        });
    }
    let (c, fit_residual) = fit_fourier(grid, &samples, modes)?;
    let split = |part: fn(&Complex64) -> f64| {
        PeriodicFunction::new(
            part(&c[0]),
            c[1..=modes].iter().map(part).collect(),
            c[modes + 1..].iter().map(part).collect(),
        )
    };
    Ok(AssociatedPeriodic {
        q: ComplexPeriodic {
            re: split(|z| z.re),
            im: split(|z| z.im),
        },
        fit_residual,
        periodicity_defect: defect,
    })
}

/// `e_i(s)` in `ζ_H(s, z+1) ~ Σ_i e_i(s) z^{1−s−i}` as `z → ∞`.
fn hurwitz_expansion_coeff(s: Complex64, i: usize) -> Result<Complex64> {
    match i {
        0 => Ok(1.0 / (s - 1.0)),
        1 => Ok(Complex64::new(-0.5, 0.0)),
        i if i % 2 == 1 => Ok(Complex64::zero()),
        i => {
            let mut rising = Complex64::new(1.0, 0.0);
            for r in 0..i - 1 {
                rising *= s + r as f64;
            }
            let fact: f64 = (1..=i).map(|x| x as f64).product();
            Ok(rising * (bernoulli(i)? / fact))
        }
    }
}

/// Coefficients of `f(z) − Q(z) ~ Σ C_n z^{1−2β−n}` at infinity and of
/// `f(z−1) − λ^{−1}z^{−2β}Q(1/z) ~ Σ C*_n z^{n−1}` at zero, for `n ≤ k`.
pub fn asymptotic_coefficients(sol: &SeriesSolution, k: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let beta = sol.params.beta;
    if k > beta.order() {
        return Err(Error::domain(format!(
            "coefficient order {k} exceeds the continuation order {}",
            beta.order()
        )));
    }
    if k > 2 {
        return Err(Error::domain("asymptotic coefficients are implemented for k <= 2"));
    }
    let b = beta.value();
    if (2.0 * b - 1.0).norm() < 1e-9 {
        return Err(Error::Pole("2β − 1 vanishes".into()));
    }
    let lambda = sol.params.lambda;
    // The jet of f at 0 is the jet of f = Q + λ⁻¹ L S on [0, 1].
    let f_unit = sample_unit(sol, SERIES_DIM)?;
    let jet = f_unit.taylor_at_zero(k.max(1))?;
    let mut c = Vec::with_capacity(k + 1);
    for n in 0..=k {
        let mut acc = Complex64::zero();
        for (j, fj) in jet.iter().enumerate().take(n + 1) {
            acc += fj * hurwitz_expansion_coeff(2.0 * b + j as f64, n - j)?;
        }
        c.push(acc / lambda);
    }
    let cstar = (0..=k)
        .map(|n| if n == 0 { c[0] / lambda } else { c[n] / lambda + jet[n - 1] })
        .collect();
    Ok((c, cstar))
}

/// Closed-form solution `f(z) = Q(z) − (z+1)^{−2β} Q(−1/(z+1))` with
/// `λ = sign`: odd `Q` for `λ = 1`, even `Q` for `λ = −1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LewisZagier {
    q: PeriodicFunction,
    beta: Complex64,
    sign: i32,
}

pub fn lewis_zagier_example(q: PeriodicFunction, beta: Complex64, sign: i32) -> Result<LewisZagier> {
    match sign {
        1 if !q.is_odd() => Err(Error::domain("λ = +1 needs an odd (pure sine) Q")),
        -1 if !q.is_even() => Err(Error::domain("λ = −1 needs an even (pure cosine) Q")),
        1 | -1 => Ok(LewisZagier { q, beta, sign }),
        _ => Err(Error::domain("sign must be +1 or -1")),
    }
}

impl LewisZagier {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(f64::from(self.sign), 0.0)
    }
}

impl Evaluable for LewisZagier {
    fn eval(&self, z: f64) -> Result<Complex64> {
        if !(z > -1.0) {
            return Err(Error::domain(format!("closed form needs z > -1, got {z}")));
        }
        let w = Complex64::new(z + 1.0, 0.0).powc(-2.0 * self.beta);
        Ok(Complex64::new(self.q.eval(z), 0.0) - w * self.q.eval(-1.0 / (z + 1.0)))
    }
}
