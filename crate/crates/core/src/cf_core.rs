//! Continued-fraction combinatorics of the Gauss map.
//!
//! A [`Word`] `(n₁,…,n_k)` indexes the inverse branch
//! `ψ_{n₁…n_k}(x) = [n₁,…,n_k + x] = 1/(n₁ + 1/(… + 1/(n_k + x)))`
//! whose image `⟨n₁,…,n_k⟩` is a cylinder set.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance under which two partition points are merged.
pub const PARTITION_DEDUP_TOL: f64 = 1e-14;

/// Default cap on the number of enumerated partition points.
pub const DEFAULT_PARTITION_LIMIT: usize = 4_000_000;

/// The Gauss map `x ↦ 1/x − ⌊1/x⌋` on `(0, 1)`.
pub fn gauss_map(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("gauss_map needs 0 < x < 1, got {x}")));
    }
    let inv = 1.0 / x;
    Ok(inv - inv.floor())
}

/// A finite string of continued-fraction digits, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(digits: Vec<u32>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d == 0) {
            return Err(Error::domain(format!("word digits must be >= 1, got {d}")));
        }
        Ok(Word(digits))
    }

    /// The empty word, the identity branch.
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Drops the first digit: `(n₁,n₂,…,n_k) ↦ (n₂,…,n_k)`.
    pub fn tail(&self) -> Word {
        Word(self.0.iter().skip(1).copied().collect())
    }

    /// Appends a digit on the right.
    pub fn extend(&self, digit: u32) -> Result<Word> {
        if digit == 0 {
            return Err(Error::domain("word digits must be >= 1"));
        }
        let mut d = self.0.clone();
        d.push(digit);
        Ok(Word(d))
    }
}

/// `[n₁,…,n_k + x]` by backward recurrence. The empty word returns `x`.
pub fn branch_eval(w: &Word, x: f64) -> f64 {
    w.0.iter().rev().fold(x, |v, &n| 1.0 / (f64::from(n) + v))
}

/// Endpoints of the cylinder `⟨w⟩`, sorted ascending.
pub fn cylinder_interval(w: &Word) -> Result<(f64, f64)> {
    if w.is_empty() {
        return Err(Error::domain("cylinder of the empty word"));
    }
    let a = branch_eval(w, 0.0);
    let b = branch_eval(w, 1.0);
    Ok(if a <= b { (a, b) } else { (b, a) })
}

/// `Π_{j=1}^{k} [n_j,…,n_k + x]^{2β}` with principal powers of positive reals.
///
/// This is the weight a cylinder word carries in the iterated transfer
/// operator: `(L_β^k f)(x) = Σ_w weight_product(w, x, β) f(branch_eval(w, x))`.
pub fn weight_product(w: &Word, x: f64, beta: Complex64) -> Complex64 {
    let mut v = x;
    let mut prod = 1.0;
    let mut log_sum = 0.0;
    for &n in w.0.iter().rev() {
        v = 1.0 / (f64::from(n) + v);
        prod *= v;
        if prod < 1e-200 {
            log_sum += prod.ln();
            prod = 1.0;
        }
    }
    if log_sum == 0.0 && beta.im == 0.0 {
        return Complex64::new(prod.powf(2.0 * beta.re), 0.0);
    }
    (2.0 * beta * (log_sum + prod.ln())).exp()
}

/// Parameters of the truncated partition `𝒫̃_{l,N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    /// Composition depth `l`.
    pub l: usize,
    /// Grid resolution `N`.
    pub n: usize,
    /// Largest digit kept from the countable alphabet.
    pub digit_cutoff: u32,
}

impl PartitionSpec {
    pub fn new(l: usize, n: usize, digit_cutoff: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("partition resolution N must be >= 1"));
        }
        if digit_cutoff < 1 {
            return Err(Error::domain("digit cutoff must be >= 1"));
        }
        Ok(PartitionSpec { l, n, digit_cutoff })
    }

    /// Number of points enumerated before deduplication.
    pub fn raw_size(&self) -> Option<usize> {
        let c = self.digit_cutoff as usize;
        let mut level = self.n;
        let mut total = self.n.checked_add(1)?;
        for _ in 0..self.l {
            level = level.checked_mul(c)?;
            total = total.checked_add(level)?;
        }
        Some(total)
    }
}

/// Truncated `𝒫̃_{l,N}`: the points `[n₁,…,n_{l'} + k/N]` for `l' ≤ l`,
/// `0 ≤ k < N`, digits in `1..=digit_cutoff`, plus the point 1.
pub fn partition_points(spec: &PartitionSpec) -> Result<Vec<f64>> {
    partition_points_with_limit(spec, DEFAULT_PARTITION_LIMIT)
}

pub fn partition_points_with_limit(spec: &PartitionSpec, limit: usize) -> Result<Vec<f64>> {
    let size = spec.raw_size().unwrap_or(usize::MAX);
    if size > limit {
        return Err(Error::Resource(format!(
            "partition (l={}, N={}, cutoff={}) has {} points, limit {}",
            spec.l, spec.n, spec.digit_cutoff, size, limit
        )));
    }
    let mut level: Vec<f64> = (0..spec.n).map(|k| k as f64 / spec.n as f64).collect();
    let mut all = level.clone();
    for _ in 0..spec.l {
        let mut next = Vec::with_capacity(level.len() * spec.digit_cutoff as usize);
        for d in 1..=spec.digit_cutoff {
            let d = f64::from(d);
            next.extend(level.iter().map(|&x| 1.0 / (d + x)));
        }
        all.extend_from_slice(&next);
        level = next;
    }
    all.push(1.0);
    Ok(sort_dedup(all, PARTITION_DEDUP_TOL))
}

/// Sorts ascending and merges runs of points closer than `tol`.
pub(crate) fn sort_dedup(mut pts: Vec<f64>, tol: f64) -> Vec<f64> {
    pts.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            Some(&last) if p - last <= tol => {}
            _ => out.push(p),
        }
    }
    out
}
