//! The transfer operators `L_β`: pointwise application with analytic
//! continuation, the β-derivative, collocation matrices, spectra, Fredholm
//! determinants and the leading eigenvalue curve `λ₁(t)`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{chebyshev_lobatto, ChebyshevBasis, GridFunction, Rule};
use crate::linalg::{self, CMatrix, Lu};
use crate::parallel::{self, Exec};
use crate::special::{hurwitz_zeta, hurwitz_zeta_ds};

/// Distance from the pole set below which β is rejected.
pub const POLE_TOL: f64 = 1e-9;
/// Default relative tolerance for truncated series.
pub const DEFAULT_TOL: f64 = 1e-14;
/// Default dimension used by [`lambda1`].
pub const LAMBDA1_DIM: usize = 48;
/// Collocation dimensions above this are reported as ill-conditioned.
pub const CONDITIONING_WARN_DIM: usize = 200;
/// Relative agreement between dimensions N and N/2 for a determinant to be
/// flagged stable.
pub const STABILITY_TOL: f64 = 1e-6;

/// Largest Taylor coefficient blow-up accepted in the head/tail split.
const GROWTH_CAP: f64 = 100.0;
const MAX_TAIL_ORDER: usize = 60;
const POWER_MAX_ITER: usize = 10_000;

/// The spectral parameter β with the continuation order `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParam {
    value: Complex64,
    order: usize,
}

impl BetaParam {
    pub fn new(value: Complex64, order: usize) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::domain("β must be finite"));
        }
        if value.im.abs() < POLE_TOL {
            let two = 2.0 * value.re;
            let nearest = two.round();
            if nearest <= 1.0 && (two - nearest).abs() < 2.0 * POLE_TOL {
                return Err(Error::Pole(format!("β = {value} lies on the pole set {{1/2, 0, -1/2, ...}}")));
            }
        }
        if !(value.re > -(order as f64) / 2.0) {
            return Err(Error::convergence(
                0,
                format!("continuation order {order} needs Re β > {}, got β = {value}", -(order as f64) / 2.0),
            ));
        }
        Ok(BetaParam { value, order })
    }

    /// β with the smallest continuation order that makes the series converge.
    pub fn auto(value: Complex64) -> Result<Self> {
        let order = if value.re > 0.0 {
            0
        } else {
            (-2.0 * value.re).floor() as usize + 1
        };
        Self::new(value, order)
    }

    pub fn real(t: f64) -> Result<Self> {
        Self::auto(Complex64::new(t, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::new(self.value, order)
    }
}

/// Head length and Taylor order of the exact Hurwitz tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailSpec {
    pub n_tail: usize,
    pub order: usize,
}

fn log_bounds(basis: &ChebyshevBasis) -> Vec<f64> {
    (0..basis.n).map(|m| basis.taylor_bound(m).ln()).collect()
}

/// Picks the head length so that Taylor coefficients of degree-`n-1`
/// polynomials on `[0, len]` stay bounded on `[0, 1/(N_tail+1)]`, then the
/// smallest order whose neglected terms fall below `tol`.
pub fn plan_tail(n: usize, len: f64, beta: &BetaParam, tol: f64) -> TailSpec {
    let basis = ChebyshevBasis::new(n, len);
    let logb = log_bounds(&basis);
    let deg = n - 1;
    let growth = |nt: usize| {
        let l = ((nt + 1) as f64).ln();
        logb.iter()
            .enumerate()
            .map(|(m, b)| b - m as f64 * l)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let cap = GROWTH_CAP.ln();
    let (mut lo, mut hi) = (0usize, 1usize);
    while growth(hi) > cap {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if growth(mid) > cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut n_tail = if growth(lo) <= cap { lo } else { hi };
    let k = beta.order();
    let two_re = 2.0 * beta.value().re;
    let tol = tol.max(f64::EPSILON);
    loop {
        let base = (n_tail.max(1) as f64).ln();
        // Integral-test bound on Σ_{n>N_tail} (n+z)^{-2Re β-m} times B_m.
        let eps = |m: usize| -> f64 {
            if m > deg {
                return 0.0;
            }
            let e = two_re + m as f64 - 1.0;
            2.0 * (logb[m] + (1.0 - two_re - m as f64) * base).exp() / e
        };
        let mut p = k;
        while p < deg && p < MAX_TAIL_ORDER && !(eps(p + 1) <= tol && eps(p + 2) <= tol) {
            p += 1;
        }
        if p >= deg || eps(p + 1) <= tol {
            return TailSpec {
                n_tail,
                order: p.min(deg),
            };
        }
        n_tail = n_tail * 2 + 1;
    }
}

fn check_point(z: f64, len: f64) -> Result<()> {
    if !z.is_finite() || z <= -1.0 {
        return Err(Error::domain(format!("z = {z} must exceed -1")));
    }
    if 1.0 / (1.0 + z) > len * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "branch image 1/(1+z) = {} leaves the domain [0, {len}]",
            1.0 / (1.0 + z)
        )));
    }
    Ok(())
}

/// `ζ_H(s, w)` or `2∂_sζ_H(s, w)`, the β-derivative of `ζ_H(2β + m, w)`.
fn zeta_term(s: Complex64, w: f64, deriv: bool) -> Result<Complex64> {
    if deriv {
        Ok(hurwitz_zeta_ds(s, w)? * 2.0)
    } else {
        hurwitz_zeta(s, w)
    }
}

/// `(n+z)^{-2β}`, or its β-derivative.
fn weight(x: f64, beta: Complex64, deriv: bool) -> Complex64 {
    let lx = x.ln();
    let w = (-2.0 * beta * lx).exp();
    if deriv {
        w * (-2.0 * lx)
    } else {
        w
    }
}

fn jet_value(jet: &[Complex64], k: usize, u: f64) -> Complex64 {
    let mut acc = Complex64::zero();
    for m in (0..=k).rev() {
        acc = acc * u + jet[m];
    }
    acc
}

enum Scheme {
    Chebyshev { jet: Vec<Complex64>, tail: TailSpec },
    Linear { f0: Complex64, slope: Complex64, x1: f64 },
}

/// `L_β` prepared for repeated evaluation of one grid function.
pub struct PreparedTransfer<'a> {
    beta: BetaParam,
    f: &'a GridFunction,
    scheme: Scheme,
}

impl<'a> PreparedTransfer<'a> {
    pub fn new(beta: &BetaParam, f: &'a GridFunction, tol: f64) -> Result<Self> {
        let (a, len) = f.domain();
        if a != 0.0 {
            return Err(Error::domain("transfer needs f defined down to 0"));
        }
        let scheme = match f.rule() {
            Rule::ChebyshevBarycentric => {
                let tail = plan_tail(f.len(), len, beta, tol);
                let jet = f.taylor_at_zero(tail.order.max(beta.order()))?;
                Scheme::Chebyshev { jet, tail }
            }
            Rule::PiecewiseLinear => {
                if beta.order() != 0 {
                    return Err(Error::domain("piecewise-linear data only supports continuation order 0"));
                }
                let x1 = f.nodes()[1];
                let f0 = f.values()[0];
                let slope = (f.values()[1] - f0) / x1;
                Scheme::Linear { f0, slope, x1 }
            }
        };
        Ok(PreparedTransfer {
            beta: *beta,
            f,
            scheme,
        })
    }

    pub fn eval(&self, z: f64) -> Result<Complex64> {
        self.eval_impl(z, false)
    }

    /// β-derivative of `L_β f(z)`.
    pub fn eval_ds(&self, z: f64) -> Result<Complex64> {
        self.eval_impl(z, true)
    }

    fn eval_impl(&self, z: f64, deriv: bool) -> Result<Complex64> {
        check_point(z, self.f.domain().1)?;
        let b = self.beta.value();
        match &self.scheme {
            Scheme::Chebyshev { jet, tail } => {
                let k = self.beta.order();
                let mut acc = Complex64::zero();
                for (m, c) in jet.iter().enumerate().take(k + 1) {
                    acc += c * zeta_term(2.0 * b + m as f64, z + 1.0, deriv)?;
                }
                for n in 1..=tail.n_tail {
                    let x = n as f64 + z;
                    let u = 1.0 / x;
                    acc += weight(x, b, deriv) * (self.f.eval_unchecked(u) - jet_value(jet, k, u));
                }
                let w = tail.n_tail as f64 + 1.0 + z;
                for m in k + 1..=tail.order {
                    acc += jet[m] * zeta_term(2.0 * b + m as f64, w, deriv)?;
                }
                Ok(acc)
            }
            Scheme::Linear { f0, slope, x1 } => {
                let nt = ((1.0 / x1 - z).ceil() - 1.0).max(0.0) as usize;
                let mut acc = f0 * zeta_term(2.0 * b, z + 1.0, deriv)?;
                for n in 1..=nt {
                    let x = n as f64 + z;
                    acc += weight(x, b, deriv) * (self.f.eval_unchecked(1.0 / x) - f0);
                }
                acc += slope * zeta_term(2.0 * b + 1.0, nt as f64 + 1.0 + z, deriv)?;
                Ok(acc)
            }
        }
    }

    /// Applies `L_β f` at every point of `zs`.
    pub fn eval_many(&self, zs: &[f64], exec: Exec) -> Result<Vec<Complex64>> {
        parallel::map_slice(zs, exec, |&z| self.eval(z)).into_iter().collect()
    }
}

/// `L_β f(z)` with the continuation of order `beta.order()`.
pub fn apply_transfer(beta: &BetaParam, f: &GridFunction, z: f64, tol: f64) -> Result<Complex64> {
    PreparedTransfer::new(beta, f, tol)?.eval(z)
}

/// `∂/∂β L_β f(z)`.
pub fn apply_transfer_derivative(beta: &BetaParam, f: &GridFunction, z: f64, tol: f64) -> Result<Complex64> {
    PreparedTransfer::new(beta, f, tol)?.eval_ds(z)
}

/// Rows of `L_β` acting on the Lagrange cardinals of a Lobatto basis.
struct RowKernel {
    beta: BetaParam,
    basis: GridFunction,
    taylor: Vec<Vec<f64>>,
    tail: TailSpec,
}

impl RowKernel {
    fn new(beta: &BetaParam, n: usize, tail: TailSpec) -> Result<Self> {
        let basis = GridFunction::chebyshev(n, 0.0, 1.0, |_| Complex64::zero())?;
        let order = tail.order.max(beta.order()).min(n - 1);
        let taylor = ChebyshevBasis::new(n, 1.0).cardinal_taylor(order);
        Ok(RowKernel {
            beta: *beta,
            basis,
            taylor,
            tail: TailSpec {
                n_tail: tail.n_tail,
                order,
            },
        })
    }

    fn row(&self, z: f64, deriv: bool) -> Result<Vec<Complex64>> {
        let n = self.basis.len();
        let k = self.beta.order().min(self.tail.order);
        let b = self.beta.value();
        let mut row = vec![Complex64::zero(); n];
        for m in 0..=self.beta.order() {
            let zt = zeta_term(2.0 * b + m as f64, z + 1.0, deriv)?;
            if m <= self.tail.order {
                for (r, a) in row.iter_mut().zip(&self.taylor) {
                    *r += zt * a[m];
                }
            }
        }
        let mut card = vec![0.0; n];
        let mut pows = vec![0.0; k + 1];
        for t in 1..=self.tail.n_tail {
            let x = t as f64 + z;
            let u = 1.0 / x;
            let w = weight(x, b, deriv);
            self.basis.cardinals_into(u, &mut card);
            pows[0] = 1.0;
            for m in 1..=k {
                pows[m] = pows[m - 1] * u;
            }
            for ((r, c), a) in row.iter_mut().zip(&card).zip(&self.taylor) {
                let jet: f64 = a.iter().zip(&pows).map(|(x, y)| x * y).sum();
                *r += w * (c - jet);
            }
        }
        let wt = self.tail.n_tail as f64 + 1.0 + z;
        for m in k + 1..=self.tail.order {
            let zt = zeta_term(2.0 * b + m as f64, wt, deriv)?;
            for (r, a) in row.iter_mut().zip(&self.taylor) {
                *r += zt * a[m];
            }
        }
        Ok(row)
    }
}

/// Finite-rank model of `L_β` on the Chebyshev–Lobatto basis of `[0, 1]`.
#[derive(Debug, Clone)]
pub struct CollocationOperator {
    beta: BetaParam,
    nodes: Vec<f64>,
    matrix: CMatrix,
    tail: TailSpec,
}

/// Builds the `n × n` collocation matrix. `tail = None` picks the head
/// length and order adaptively.
pub fn build_collocation(beta: &BetaParam, n: usize, tail: Option<TailSpec>, tol: f64) -> Result<CollocationOperator> {
    build_collocation_with(beta, n, tail, tol, Exec::default())
}

pub fn build_collocation_with(
    beta: &BetaParam,
    n: usize,
    tail: Option<TailSpec>,
    tol: f64,
    exec: Exec,
) -> Result<CollocationOperator> {
    if n < 2 {
        return Err(Error::domain("collocation needs at least two nodes"));
    }
    if n > CONDITIONING_WARN_DIM {
        log::warn!("collocation dimension {n} exceeds {CONDITIONING_WARN_DIM}; expect poor conditioning");
    }
    let tail = tail.unwrap_or_else(|| plan_tail(n, 1.0, beta, tol));
    let kernel = RowKernel::new(beta, n, tail)?;
    let nodes = chebyshev_lobatto(n, 0.0, 1.0);
    let rows: Vec<Vec<Complex64>> = parallel::map_slice(&nodes, exec, |&x| kernel.row(x, false))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(CollocationOperator {
        beta: *beta,
        nodes,
        matrix: CMatrix::from_rows(rows)?,
        tail: kernel.tail,
    })
}

impl CollocationOperator {
    pub fn beta(&self) -> &BetaParam {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn tail(&self) -> TailSpec {
        self.tail
    }

    /// Applies the matrix to node values.
    pub fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.matrix.matvec(values)
    }

    /// Wraps node values as a Chebyshev-rule grid function on `[0, 1]`.
    pub fn grid_function(&self, values: Vec<Complex64>) -> Result<GridFunction> {
        GridFunction::new((0.0, 1.0), self.nodes.clone(), values, Rule::ChebyshevBarycentric)
    }

    /// Samples `f` at the nodes.
    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

fn normalized_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

fn spectral_order(a: &Complex64, b: &Complex64) -> Ordering {
    let (ma, mb) = (a.norm(), b.norm());
    if (ma - mb).abs() <= 1e-12 * ma.max(mb) {
        normalized_arg(*a).partial_cmp(&normalized_arg(*b)).unwrap_or(Ordering::Equal)
    } else {
        mb.partial_cmp(&ma).unwrap_or(Ordering::Equal)
    }
}

/// The `count` largest eigenvalues by modulus, with eigenfunctions scaled so
/// their largest node value is 1.
pub fn spectrum(op: &CollocationOperator, count: usize) -> Result<Vec<(Complex64, GridFunction)>> {
    if count > op.dim() {
        return Err(Error::domain(format!("requested {count} eigenvalues of a {}-dimensional operator", op.dim())));
    }
    let eig = linalg::eigen(&op.matrix)?;
    let mut idx: Vec<usize> = (0..eig.values.len()).collect();
    idx.sort_by(|&i, &j| spectral_order(&eig.values[i], &eig.values[j]));
    idx.into_iter()
        .take(count)
        .map(|i| {
            let v = &eig.values[i];
            let vec = &eig.vectors[i];
            let pivot = vec
                .iter()
                .copied()
                .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(Ordering::Equal))
                .unwrap_or(Complex64::new(1.0, 0.0));
            let scaled = vec.iter().map(|c| c / pivot).collect();
            Ok((*v, op.grid_function(scaled)?))
        })
        .collect()
}

/// `det(I ∓ M)` at dimension N with the dimension-N/2 values used as a
/// stability check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FredholmDets {
    pub det_minus: Complex64,
    pub det_plus: Complex64,
    pub dim: usize,
    pub half_minus: Complex64,
    pub half_plus: Complex64,
    pub stable: bool,
}

fn dets_of(op: &CollocationOperator) -> (Complex64, Complex64) {
    let m = op.matrix();
    (Lu::new(&m.shifted_identity(-1.0)).det(), Lu::new(&m.shifted_identity(1.0)).det())
}

fn agrees(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= STABILITY_TOL * (1.0 + a.norm().max(b.norm()))
}

pub fn fredholm_dets(beta: &BetaParam, n: usize) -> Result<FredholmDets> {
    fredholm_dets_with(beta, n, Exec::default())
}

pub fn fredholm_dets_with(beta: &BetaParam, n: usize, exec: Exec) -> Result<FredholmDets> {
    let full = build_collocation_with(beta, n, None, DEFAULT_TOL, exec)?;
    let (det_minus, det_plus) = dets_of(&full);
    let half = build_collocation_with(beta, (n / 2).max(2), None, DEFAULT_TOL, exec)?;
    let (half_minus, half_plus) = dets_of(&half);
    Ok(FredholmDets {
        det_minus,
        det_plus,
        dim: n,
        half_minus,
        half_plus,
        stable: agrees(det_minus, half_minus) && agrees(det_plus, half_plus),
    })
}

/// Perron–Frobenius eigenvalue of `L_t` by power iteration.
pub fn lambda1(t: f64, tol: f64) -> Result<f64> {
    lambda1_with_dim(t, tol, LAMBDA1_DIM)
}

pub fn lambda1_with_dim(t: f64, tol: f64, n: usize) -> Result<f64> {
    if !(t > 0.5 + 1e-6) {
        return Err(Error::domain(format!("λ₁(t) needs t > 1/2, got {t}")));
    }
    let op = build_collocation(&BetaParam::real(t)?, n, None, DEFAULT_TOL)?;
    let (value, _, _) = power_iteration(op.matrix(), vec![Complex64::new(1.0, 0.0); n], tol, POWER_MAX_ITER)?;
    Ok(value.re)
}

/// Power iteration with Rayleigh-quotient stopping. Returns the eigenvalue
/// estimate, the final unit vector and the iteration count.
pub fn power_iteration(
    m: &CMatrix,
    start: Vec<Complex64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Complex64, Vec<Complex64>, usize)> {
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut v = start;
    let n0 = norm(&v);
    if n0 == 0.0 {
        return Err(Error::domain("power iteration needs a nonzero start vector"));
    }
    v.iter_mut().for_each(|c| *c /= n0);
    let mut prev = Complex64::new(f64::INFINITY, 0.0);
    for it in 1..=max_iter {
        let w = m.matvec(&v);
        let rq: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok((Complex64::zero(), v, it));
        }
        v = w.into_iter().map(|c| c / nw).collect();
        if (rq - prev).norm() <= tol * rq.norm() {
            return Ok((rq, v, it));
        }
        prev = rq;
    }
    Err(Error::convergence(max_iter, "power iteration"))
}
