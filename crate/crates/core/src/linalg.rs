//! Dense complex linear algebra: LU with partial pivoting and a
//! Hessenberg/shifted-QR eigensolver for general (nonsymmetric) matrices.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `rows.len()`.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::Input("matrix rows must be square".into()));
            }
            data.extend(r);
        }
        Ok(CMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `I + sign·self`.
    pub fn shifted_identity(&self, sign: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= sign;
        }
        for i in 0..self.n {
            m[(i, i)] += 1.0;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|v| v.im.abs() <= tol)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Self {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != Complex64::zero() {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Lu {
            lu,
            perm,
            sign,
            singular,
        }
    }

    pub fn det(&self) -> Complex64 {
        if self.singular {
            return Complex64::zero();
        }
        (0..self.lu.dim()).fold(Complex64::new(self.sign, 0.0), |acc, i| acc * self.lu[(i, i)])
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.lu.dim();
        if self.singular {
            return Err(Error::domain("singular matrix"));
        }
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        Ok(x)
    }
}

pub fn det(a: &CMatrix) -> Complex64 {
    Lu::new(a).det()
}

/// Eigenpairs of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors, `vectors[i]` belonging to `values[i]`.
    pub vectors: Vec<Vec<Complex64>>,
    pub iterations: usize,
}

/// Givens rotation `[c, s; -conj(s), c]` zeroing `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::zero());
    }
    if na == 0.0 {
        return (0.0, Complex64::one());
    }
    let r = na.hypot(nb);
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

/// Householder reduction to upper Hessenberg form, accumulating `Q`.
fn hessenberg(a: &mut CMatrix, q: &mut CMatrix) {
    let n = a.dim();
    for k in 0..n.saturating_sub(2) {
        let alpha_norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::one()
        } else {
            x0 / x0.norm()
        };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] += phase * alpha_norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- H A with H = I - 2 v v^H / (v^H v)
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * a[(k + 1 + t, j)]).sum();
            let f = dot * 2.0 / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= vi * f;
            }
        }
        // A <- A H, Q <- Q H
        for m in [&mut *a, &mut *q] {
            for i in 0..n {
                let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| m[(i, k + 1 + t)] * vi).sum();
                let f = dot * 2.0 / vnorm2;
                for (t, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= f * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex64::zero();
        }
    }
}

/// Schur decomposition `A = Z T Z^H` by single-shift implicit QR.
fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix, usize)> {
    let n = a.dim();
    let mut t = a.clone();
    let mut z = CMatrix::identity(n);
    hessenberg(&mut t, &mut z);
    if n < 2 {
        return Ok((t, z, 0));
    }
    let eps = f64::EPSILON;
    let max_iter = 60 * n;
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    while hi > 0 {
        // Find the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let s = t[(lo, lo)].norm() + t[(lo - 1, lo - 1)].norm();
            let scale = if s == 0.0 { t.max_abs() } else { s };
            if t[(lo, lo - 1)].norm() <= eps * scale {
                t[(lo, lo - 1)] = Complex64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::convergence(total, "shifted QR did not deflate"));
        }
        // Wilkinson shift from the trailing 2x2 block, with exceptional shifts.
        let shift = if since_deflation % 11 == 10 {
            t[(hi, hi)] + Complex64::new(t[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            let a11 = t[(hi - 1, hi - 1)];
            let a12 = t[(hi - 1, hi)];
            let a21 = t[(hi, hi - 1)];
            let a22 = t[(hi, hi)];
            let tr = a11 + a22;
            let dt = a11 * a22 - a12 * a21;
            let disc = (tr * tr * 0.25 - dt).sqrt();
            let e1 = tr * 0.5 + disc;
            let e2 = tr * 0.5 - disc;
            if (e1 - a22).norm() < (e2 - a22).norm() {
                e1
            } else {
                e2
            }
        };
        let mut x = t[(lo, lo)] - shift;
        let mut y = t[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s) = givens(x, y);
            // Rows k, k+1 from the left.
            let col_start = if k > lo { k - 1 } else { lo };
            for j in col_start..n {
                let a = t[(k, j)];
                let b = t[(k + 1, j)];
                t[(k, j)] = a * c + s * b;
                t[(k + 1, j)] = -s.conj() * a + b * c;
            }
            // Columns k, k+1 from the right.
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let a = t[(i, k)];
                let b = t[(i, k + 1)];
                t[(i, k)] = a * c + b * s.conj();
                t[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
            if k + 1 < hi {
                x = t[(k + 1, k)];
                y = t[(k + 2, k)];
            }
        }
    }
    Ok((t, z, total))
}

/// All eigenpairs of `a`, unordered.
pub fn eigen(a: &CMatrix) -> Result<Eigen> {
    let n = a.dim();
    let (t, z, iterations) = schur(a)?;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let small = f64::EPSILON * t.max_abs().max(f64::MIN_POSITIVE);
    let mut vectors = Vec::with_capacity(n);
    for i in 0..n {
        let lambda = values[i];
        let mut y = vec![Complex64::zero(); n];
        y[i] = Complex64::one();
        for j in (0..i).rev() {
            let mut acc = Complex64::zero();
            for k in j + 1..=i {
                acc += t[(j, k)] * y[k];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < small {
                den = Complex64::new(small, 0.0);
            }
            y[j] = -acc / den;
        }
        let mut v: Vec<Complex64> = (0..n)
            .map(|r| (0..=i).map(|k| z[(r, k)] * y[k]).sum())
            .collect();
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in &mut v {
                *c /= norm;
            }
        }
        vectors.push(v);
    }
    Ok(Eigen {
        values,
        vectors,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        CMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn lu_solves_and_determinant() {
        let a = random_matrix(12, 3);
        let b: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let lu = Lu::new(&a);
        let x = lu.solve(&b).unwrap();
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-11);
        }
        // 2x2 closed form.
        let m = CMatrix::from_rows(vec![
            vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, 0.0)],
            vec![Complex64::new(0.0, -1.0), Complex64::new(4.0, 1.0)],
        ])
        .unwrap();
        let want = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!((det(&m) - want).norm() < 1e-14);
        assert_eq!(det(&CMatrix::zeros(3)), Complex64::zero());
    }

    #[test]
    fn eigenpairs_have_small_residuals() {
        for (n, seed) in [(1, 1), (2, 2), (5, 5), (30, 7), (64, 11)] {
            let a = random_matrix(n, seed);
            let e = eigen(&a).unwrap();
            let scale = a.max_abs() * n as f64;
            for (lam, v) in e.values.iter().zip(&e.vectors) {
                let av = a.matvec(v);
                let res: f64 = av
                    .iter()
                    .zip(v)
                    .map(|(x, y)| (x - lam * y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-11 * scale, "n={n} residual {res}");
            }
            let trace: Complex64 = (0..n).map(|i| a[(i, i)]).sum();
            let sum: Complex64 = e.values.iter().sum();
            assert!((trace - sum).norm() < 1e-10 * scale);
            let prod: Complex64 = e.values.iter().product();
            assert!((prod - det(&a)).norm() < 1e-9 * det(&a).norm().max(1.0));
        }
    }

    #[test]
    fn companion_roots() {
        // (x-1)(x-2)(x-3)(x+0.5i) expanded into a companion matrix.
        let roots = [
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, -0.5),
        ];
        let mut coeffs = vec![Complex64::one()];
        for r in roots {
            let mut next = vec![Complex64::zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            coeffs = next;
        }
        let n = roots.len();
        let mut m = CMatrix::zeros(n);
        for j in 0..n {
            m[(0, j)] = -coeffs[j + 1];
        }
        for i in 1..n {
            m[(i, i - 1)] = Complex64::one();
        }
        let e = eigen(&m).unwrap();
        for r in roots {
            let best = e.values.iter().map(|v| (v - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "root {r} missing, {:?}", e.values);
        }
    }

    #[test]
    fn triangular_and_defective_inputs() {
        let mut m = CMatrix::zeros(3);
        m[(0, 0)] = Complex64::new(2.0, 0.0);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(2.0, 0.0);
        m[(2, 2)] = Complex64::new(-1.0, 0.0);
        let e = eigen(&m).unwrap();
        let mut re: Vec<f64> = e.values.iter().map(|v| v.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 1.0).abs() < 1e-14 && (re[1] - 2.0).abs() < 1e-14);
    }
}
