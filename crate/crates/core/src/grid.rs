//! Sampled functions on a compact interval with an interpolation rule.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a [`GridFunction`] is evaluated between its nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    ChebyshevBarycentric,
    PiecewiseLinear,
}

/// Absolute slack allowed when checking that a point lies in the domain.
const DOMAIN_SLACK: f64 = 1e-12;

/// Complex-valued samples on a sorted node set covering `[a, M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: (f64, f64),
    nodes: Vec<f64>,
    values: Vec<Complex64>,
    rule: Rule,
    /// Barycentric weights, Chebyshev rule only.
    weights: Vec<f64>,
}

/// Chebyshev–Lobatto points on `[a, b]`, ascending, endpoints included.
pub fn chebyshev_lobatto(n: usize, a: f64, b: f64) -> Vec<f64> {
    assert!(n >= 2, "need at least two Lobatto points");
    let m = (n - 1) as f64;
    (0..n)
        .map(|j| {
            if j == 0 {
                a
            } else if j == n - 1 {
                b
            } else {
                a + (b - a) * 0.5 * (1.0 - (PI * j as f64 / m).cos())
            }
        })
        .collect()
}

/// Barycentric weights of the Lobatto points, up to a common factor.
fn lobatto_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Barycentric weights for arbitrary distinct nodes, scaled against overflow.
fn generic_weights(nodes: &[f64]) -> Vec<f64> {
    let span = nodes[nodes.len() - 1] - nodes[0];
    let c = 4.0 / span;
    let raw: Vec<f64> = (0..nodes.len())
        .map(|j| {
            let mut p = 1.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j {
                    p *= c * (nodes[j] - xk);
                }
            }
            1.0 / p
        })
        .collect();
    let max = raw.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    raw.into_iter().map(|w| w / max).collect()
}

fn is_lobatto(nodes: &[f64], a: f64, b: f64) -> bool {
    let expect = chebyshev_lobatto(nodes.len(), a, b);
    nodes
        .iter()
        .zip(&expect)
        .all(|(x, y)| (x - y).abs() <= 1e-13 * (b - a).max(1.0))
}

impl GridFunction {
    pub fn new(domain: (f64, f64), nodes: Vec<f64>, values: Vec<Complex64>, rule: Rule) -> Result<Self> {
        let (a, m) = domain;
        if !(a >= 0.0 && a < m && m.is_finite()) {
            return Err(Error::domain(format!("grid domain must satisfy 0 <= a < M, got [{a}, {m}]")));
        }
        if nodes.len() < 2 {
            return Err(Error::domain("a grid function needs at least two nodes"));
        }
        if nodes.len() != values.len() {
            return Err(Error::Input("node and value counts differ".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("grid nodes must be strictly increasing"));
        }
        if nodes[0] != a || nodes[nodes.len() - 1] != m {
            return Err(Error::domain("grid nodes must include both domain endpoints"));
        }
        let weights = match rule {
            Rule::ChebyshevBarycentric if is_lobatto(&nodes, a, m) => lobatto_weights(nodes.len()),
            Rule::ChebyshevBarycentric => generic_weights(&nodes),
            Rule::PiecewiseLinear => Vec::new(),
        };
        Ok(GridFunction {
            domain,
            nodes,
            values,
            rule,
            weights,
        })
    }

    /// Samples `f` at `n` Chebyshev–Lobatto points of `[a, b]`.
    pub fn chebyshev<F: Fn(f64) -> Complex64>(n: usize, a: f64, b: f64, f: F) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("need at least two Chebyshev nodes"));
        }
        let nodes = chebyshev_lobatto(n, a, b);
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new((a, b), nodes, values, Rule::ChebyshevBarycentric)
    }

    /// Samples `f` at `n` uniformly spaced nodes of `[a, b]`, linear rule.
    pub fn uniform_linear<F: Fn(f64) -> Complex64>(n: usize, a: f64, b: f64, f: F) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("need at least two nodes"));
        }
        let h = (b - a) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
            .collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new((a, b), nodes, values, Rule::PiecewiseLinear)
    }

    /// Same nodes and rule, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != self.nodes.len() {
            return Err(Error::Input("value count does not match node count".into()));
        }
        Ok(GridFunction {
            values,
            ..self.clone()
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 - DOMAIN_SLACK && x <= self.domain.1 + DOMAIN_SLACK
    }

    /// Evaluates the interpolant, rejecting points outside the domain.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if !self.contains(x) {
            return Err(Error::domain(format!(
                "x = {x} outside grid domain [{}, {}]",
                self.domain.0, self.domain.1
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> Complex64 {
        match self.rule {
            Rule::PiecewiseLinear => self.eval_linear(x),
            Rule::ChebyshevBarycentric => self.eval_barycentric(x),
        }
    }

    fn eval_linear(&self, x: f64) -> Complex64 {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&t| t <= x);
        if i == 0 {
            return self.values[0];
        }
        if i >= n {
            return self.values[n - 1];
        }
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        if x == x0 {
            return self.values[i - 1];
        }
        let t = (x - x0) / (x1 - x0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    fn eval_barycentric(&self, x: f64) -> Complex64 {
        let mut num = Complex64::zero();
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let c = wj / d;
            num += fj * c;
            den += c;
        }
        num / den
    }

    /// Evaluates all barycentric cardinal functions at `x` into `out`.
    pub(crate) fn cardinals_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(self.rule, Rule::ChebyshevBarycentric);
        let mut den = 0.0;
        for (j, (&xj, &wj)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let d = x - xj;
            if d == 0.0 {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[j] = 1.0;
                return;
            }
            out[j] = wj / d;
            den += out[j];
        }
        out.iter_mut().for_each(|v| *v /= den);
    }

    /// Grid function sampled on new nodes in the same domain with the linear rule.
    pub fn resample_linear(&self, nodes: Vec<f64>) -> Result<Self> {
        let values = nodes
            .iter()
            .map(|&x| self.eval(x))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(self.domain, nodes, values, Rule::PiecewiseLinear)
    }

    /// Writes the `x,re,im` CSV form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,re,im")?;
        for (x, v) in self.nodes.iter().zip(&self.values) {
            writeln!(w, "{},{},{}", x, v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads the `x,re,im` CSV form; the domain is spanned by the first and
    /// last node.
    pub fn read_csv<R: BufRead>(r: R, rule: Rule) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Input("empty CSV".into()))?
            .map_err(|e| Error::Input(e.to_string()))?;
        if header.trim() != "x,re,im" {
            return Err(Error::Input(format!("expected header x,re,im, got {header:?}")));
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Input(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Input(format!("line {}: expected 3 fields", lineno + 2)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("line {}: {e}", lineno + 2)))
            };
            nodes.push(parse(parts[0])?);
            values.push(Complex64::new(parse(parts[1])?, parse(parts[2])?));
        }
        if nodes.len() < 2 {
            return Err(Error::Input("CSV needs at least two rows".into()));
        }
        let domain = (nodes[0], nodes[nodes.len() - 1]);
        GridFunction::new(domain, nodes, values, rule)
    }
}

/// Chebyshev–Lobatto basis of degree `n-1` on `[0, len]`, with the Taylor
/// coefficients of its cardinal functions at the left endpoint.
#[derive(Debug, Clone)]
pub(crate) struct ChebyshevBasis {
    pub n: usize,
    pub len: f64,
}

impl ChebyshevBasis {
    pub fn new(n: usize, len: f64) -> Self {
        ChebyshevBasis { n, len }
    }

    /// `D[k][m] = T_k^{(m)}(-1)·(2/len)^m / m!` for `m ≤ p`: the `m`-th Taylor
    /// coefficient at `u = 0` of `T_k(2u/len − 1)`.
    fn taylor_of_chebyshev(&self, p: usize) -> Vec<Vec<f64>> {
        let scale = 2.0 / self.len;
        (0..self.n)
            .map(|k| {
                let k2 = (k * k) as f64;
                let mut row = Vec::with_capacity(p + 1);
                let mut d = if k % 2 == 0 { 1.0 } else { -1.0 };
                row.push(d);
                for m in 1..=p {
                    let r = (m - 1) as f64;
                    d *= -(k2 - r * r) / ((2.0 * r + 1.0) * m as f64) * scale;
                    row.push(d);
                }
                row
            })
            .collect()
    }

    /// Upper bound on the Taylor coefficient magnitudes `max_k |D[k][m]|`.
    pub fn taylor_bound(&self, m: usize) -> f64 {
        let k = (self.n - 1) as f64;
        let scale = 2.0 / self.len;
        let mut d = 1.0f64;
        for r in 0..m {
            let r = r as f64;
            d *= (k * k - r * r).max(0.0) / ((2.0 * r + 1.0) * (r + 1.0)) * scale;
        }
        d
    }

    /// Chebyshev coefficients of the degree-`n-1` interpolant through values
    /// at the ascending Lobatto nodes.
    pub fn chebyshev_coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let m = (n - 1) as f64;
        // Ascending node j sits at t = cos(π (n-1-j)/(n-1)).
        (0..n)
            .map(|k| {
                let mut acc = Complex64::zero();
                for (j, v) in values.iter().enumerate() {
                    let jj = n - 1 - j;
                    let w = if jj == 0 || jj == n - 1 { 0.5 } else { 1.0 };
                    acc += v * (w * (PI * (k * jj) as f64 / m).cos());
                }
                let ck = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                acc * (2.0 * ck / m)
            })
            .collect()
    }

    /// Taylor coefficients `a[j][m]` at 0 of every cardinal function, `m ≤ p`.
    pub fn cardinal_taylor(&self, p: usize) -> Vec<Vec<f64>> {
        let n = self.n;
        let m = (n - 1) as f64;
        let d = self.taylor_of_chebyshev(p);
        (0..n)
            .map(|j| {
                let jj = n - 1 - j;
                let wj = if jj == 0 || jj == n - 1 { 0.5 } else { 1.0 };
                let mut out = vec![0.0; p + 1];
                for (k, dk) in d.iter().enumerate() {
                    let ck = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                    let coef = 2.0 * ck / m * wj * (PI * (k * jj) as f64 / m).cos();
                    for (o, dkm) in out.iter_mut().zip(dk) {
                        *o += coef * dkm;
                    }
                }
                out
            })
            .collect()
    }

    /// Taylor coefficients at 0 of the interpolant through `values`, `m ≤ p`.
    pub fn function_taylor(&self, values: &[Complex64], p: usize) -> Vec<Complex64> {
        let c = self.chebyshev_coefficients(values);
        let d = self.taylor_of_chebyshev(p);
        (0..=p)
            .map(|m| c.iter().zip(&d).map(|(ck, dk)| ck * dk[m]).sum())
            .collect()
    }
}

impl GridFunction {
    /// Re-expresses a Chebyshev-rule function on the Lobatto nodes of
    /// `[0, M]` (exact for the interpolating polynomial).
    pub(crate) fn lobatto_values(&self) -> Vec<Complex64> {
        let (a, m) = self.domain;
        if is_lobatto(&self.nodes, a, m) {
            return self.values.clone();
        }
        chebyshev_lobatto(self.nodes.len(), a, m)
            .into_iter()
            .map(|x| self.eval_barycentric(x))
            .collect()
    }

    /// Taylor coefficients `f^{(m)}(0)/m!` for `m ≤ p` of a Chebyshev-rule
    /// function whose domain starts at 0.
    pub fn taylor_at_zero(&self, p: usize) -> Result<Vec<Complex64>> {
        if self.rule != Rule::ChebyshevBarycentric {
            return Err(Error::domain("Taylor jets need the Chebyshev rule"));
        }
        if self.domain.0 != 0.0 {
            return Err(Error::domain("Taylor jets are taken at 0; domain must start at 0"));
        }
        let basis = ChebyshevBasis::new(self.nodes.len(), self.domain.1);
        Ok(basis.function_taylor(&self.lobatto_values(), p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn node_values_are_exact() {
        let f = GridFunction::chebyshev(17, 0.0, 1.0, |x| c((3.0 * x).sin())).unwrap();
        for (x, v) in f.nodes().iter().zip(f.values()) {
            assert_eq!(f.eval(*x).unwrap(), *v);
        }
        let g = GridFunction::uniform_linear(11, 0.0, 2.0, |x| c(x * x)).unwrap();
        for (x, v) in g.nodes().iter().zip(g.values()) {
            assert_eq!(g.eval(*x).unwrap(), *v);
        }
        assert!((g.eval(0.1).unwrap().re - 0.02).abs() < 1e-15);
        assert!(g.eval(2.5).is_err());
    }

    #[test]
    fn barycentric_accuracy() {
        let f = GridFunction::chebyshev(32, 0.0, 1.0, |x| c(1.0 / (1.0 + x))).unwrap();
        for i in 0..50 {
            let x = i as f64 / 49.0 * 0.999 + 0.0005;
            assert!((f.eval(x).unwrap().re - 1.0 / (1.0 + x)).abs() < 1e-14);
        }
        // The general-weight path agrees with the Lobatto path.
        let nodes = chebyshev_lobatto(20, 0.0, 1.0);
        let vals: Vec<_> = nodes.iter().map(|&x| c(x.exp())).collect();
        let mut jittered = nodes.clone();
        jittered[5] += 1e-7;
        let vals_j: Vec<_> = jittered.iter().map(|&x| c(x.exp())).collect();
        let g = GridFunction::new((0.0, 1.0), jittered, vals_j, Rule::ChebyshevBarycentric).unwrap();
        let h = GridFunction::new((0.0, 1.0), nodes, vals, Rule::ChebyshevBarycentric).unwrap();
        assert!((g.eval(0.37).unwrap() - h.eval(0.37).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn invalid_grids() {
        assert!(GridFunction::new((0.0, 1.0), vec![0.0, 0.5], vec![c(0.0); 2], Rule::PiecewiseLinear).is_err());
        assert!(GridFunction::new((0.0, 1.0), vec![0.0, 0.5, 0.5, 1.0], vec![c(0.0); 4], Rule::PiecewiseLinear).is_err());
        assert!(GridFunction::new((1.0, 0.0), vec![1.0, 0.0], vec![c(0.0); 2], Rule::PiecewiseLinear).is_err());
    }

    #[test]
    fn taylor_jet_of_known_function() {
        // 1/(1+x) = Σ (-1)^m x^m.
        // Roundoff grows like the Chebyshev Taylor bound, so high orders are
        // only good to a few digits.
        let f = GridFunction::chebyshev(22, 0.0, 1.0, |x| c(1.0 / (1.0 + x))).unwrap();
        let t = f.taylor_at_zero(3).unwrap();
        for (m, v) in t.iter().enumerate() {
            let want = if m % 2 == 0 { 1.0 } else { -1.0 };
            let tol = if m <= 2 { 1e-10 } else { 1e-6 };
            assert!((v.re - want).abs() < tol, "m={m}: {v}");
        }
        // exp on [0, 2]
        let g = GridFunction::chebyshev(18, 0.0, 2.0, |x| c(x.exp())).unwrap();
        let t = g.taylor_at_zero(3).unwrap();
        let fact = [1.0, 1.0, 2.0, 6.0];
        for m in 0..4 {
            assert!((t[m].re - 1.0 / fact[m]).abs() < 1e-9, "m={m}: {}", t[m]);
        }
    }

    #[test]
    fn cardinal_taylor_sums_to_function_taylor() {
        let basis = ChebyshevBasis::new(12, 1.0);
        let nodes = chebyshev_lobatto(12, 0.0, 1.0);
        let vals: Vec<_> = nodes.iter().map(|&x| c((x - 0.3).powi(3))).collect();
        let direct = basis.function_taylor(&vals, 5);
        let card = basis.cardinal_taylor(5);
        for m in 0..=5 {
            let s: Complex64 = card.iter().zip(&vals).map(|(a, v)| v * a[m]).sum();
            let scale = basis.taylor_bound(m).max(1.0);
            assert!((s - direct[m]).norm() < 1e-14 * scale, "m={m}: {s} vs {}", direct[m]);
        }
        // (x - 0.3)^3 = x^3 - 0.9x^2 + 0.27x - 0.027
        let want = [-0.027, 0.27, -0.9, 1.0, 0.0, 0.0];
        for m in 0..=5 {
            assert!((direct[m].re - want[m]).abs() < 1e-14 * basis.taylor_bound(m).max(1.0));
        }
    }

    #[test]
    fn csv_round_trip() {
        let f = GridFunction::chebyshev(9, 0.0, 1.0, |x| Complex64::new(x.sin(), x.cos() / 3.0)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = GridFunction::read_csv(&buf[..], Rule::ChebyshevBarycentric).unwrap();
        assert_eq!(f.nodes(), g.nodes());
        for x in f.nodes() {
            assert_eq!(f.eval(*x).unwrap(), g.eval(*x).unwrap());
        }
    }
}
