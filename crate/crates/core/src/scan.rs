//! Determinant scans along vertical lines in β, the Selberg zeta product,
//! minimum refinement and Newton zero location.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::parallel::{self, Exec};
use crate::special::riemann_zeta_eta;
use crate::transfer::{build_collocation, fredholm_dets_with, BetaParam, DEFAULT_TOL};

/// `|Im β|` beyond which double precision collocation is unreliable.
pub const MAX_RELIABLE_IM: f64 = 16.0;
/// Largest dimension recommended for scans.
pub const MAX_SCAN_DIM: usize = 128;
/// Default bound on the selected determinant at a Newton start point.
pub const DEFAULT_BRACKET: f64 = 0.25;
/// Newton runs that move farther than this from the start are abandoned.
pub const TRUST_RADIUS: f64 = 0.5;
const NEWTON_STEP: f64 = 1e-5;
const NEWTON_MAX_ITER: usize = 50;
const GOLDEN_TOL: f64 = 1e-7;

/// Which Fredholm determinant to track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    /// `det(I − M)`.
    Minus,
    /// `det(I + M)`.
    Plus,
}

impl Which {
    fn sign(self) -> f64 {
        match self {
            Which::Minus => -1.0,
            Which::Plus => 1.0,
        }
    }
}

/// Determinants at one β and their product, the Selberg zeta value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    pub beta: Complex64,
    pub det_minus: Complex64,
    pub det_plus: Complex64,
    pub selberg_z: Complex64,
    pub dim_used: usize,
}

impl ScanRecord {
    pub fn det(&self, which: Which) -> Complex64 {
        match which {
            Which::Minus => self.det_minus,
            Which::Plus => self.det_plus,
        }
    }
}

fn warn_limits(beta: Complex64, n: usize) {
    if beta.im.abs() > MAX_RELIABLE_IM {
        log::warn!("|Im β| = {} exceeds {MAX_RELIABLE_IM}; determinant accuracy degrades", beta.im.abs());
    }
    if n > MAX_SCAN_DIM {
        log::warn!("scan dimension {n} exceeds {MAX_SCAN_DIM}");
    }
}

pub fn selberg_zeta(beta: Complex64, n: usize) -> Result<ScanRecord> {
    selberg_zeta_with(beta, n, Exec::default())
}

pub fn selberg_zeta_with(beta: Complex64, n: usize, exec: Exec) -> Result<ScanRecord> {
    warn_limits(beta, n);
    let b = BetaParam::auto(beta)?;
    let d = fredholm_dets_with(&b, n, exec)?;
    Ok(ScanRecord {
        beta,
        det_minus: d.det_minus,
        det_plus: d.det_plus,
        selberg_z: d.det_minus * d.det_plus,
        dim_used: n,
    })
}

/// One point of a line scan; failures are kept in place.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub r: f64,
    pub record: Result<ScanRecord>,
}

/// Points `r_min + i·step` up to `r_max` inclusive.
pub fn line_grid(r_min: f64, r_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(r_min < r_max) || !(step > 0.0) || !r_min.is_finite() || !r_max.is_finite() {
        return Err(Error::domain("scan needs r_min < r_max and step > 0"));
    }
    let count = ((r_max - r_min) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| r_min + step * i as f64).collect())
}

/// Records at `β = σ + ir` on the closed grid, sorted by `r`.
pub fn scan_line(sigma: f64, r_min: f64, r_max: f64, step: f64, n: usize) -> Result<Vec<ScanEntry>> {
    scan_line_with(sigma, r_min, r_max, step, n, Exec::default())
}

pub fn scan_line_with(sigma: f64, r_min: f64, r_max: f64, step: f64, n: usize, exec: Exec) -> Result<Vec<ScanEntry>> {
    let rs = line_grid(r_min, r_max, step)?;
    // Points run in parallel; each matrix is then built sequentially.
    let entries = parallel::map_slice(&rs, exec, |&r| ScanEntry {
        r,
        record: selberg_zeta_with(Complex64::new(sigma, r), n, Exec::Sequential),
    });
    Ok(entries)
}

/// Grid indices of interior local minima of `|det|`.
pub fn interior_minima(entries: &[ScanEntry], which: Which) -> Vec<usize> {
    let mag: Vec<Option<f64>> = entries
        .iter()
        .map(|e| e.record.as_ref().ok().map(|r| r.det(which).norm()))
        .collect();
    (1..entries.len().saturating_sub(1))
        .filter(|&i| match (mag[i - 1], mag[i], mag[i + 1]) {
            (Some(a), Some(b), Some(c)) => b < a && b <= c,
            _ => false,
        })
        .collect()
}

/// One determinant at β, without the half-dimension check.
pub fn det_at(beta: Complex64, which: Which, n: usize) -> Result<Complex64> {
    let b = BetaParam::auto(beta)?;
    let op = build_collocation(&b, n, None, DEFAULT_TOL)?;
    Ok(Lu::new(&op.matrix().shifted_identity(which.sign())).det())
}

/// Golden-section minimization of `g` on `[a, b]`.
pub fn golden_section<G: FnMut(f64) -> Result<f64>>(mut g: G, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    while (b - a).abs() > tol {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Refines a bracketed minimum of `|det(σ + ir)|` in `r`.
pub fn refine_minimum(sigma: f64, r_lo: f64, r_hi: f64, which: Which, n: usize) -> Result<f64> {
    golden_section(|r| Ok(det_at(Complex64::new(sigma, r), which, n)?.norm()), r_lo, r_hi, GOLDEN_TOL)
}

/// Scans a line and refines every interior minimum of the selected
/// determinant.
pub fn line_minima(sigma: f64, r_min: f64, r_max: f64, step: f64, which: Which, n: usize) -> Result<Vec<f64>> {
    let entries = scan_line(sigma, r_min, r_max, step, n)?;
    interior_minima(&entries, which)
        .into_iter()
        .map(|i| refine_minimum(sigma, entries[i - 1].r, entries[i + 1].r, which, n))
        .collect()
}

/// Result of a Newton run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroReport {
    pub beta: Complex64,
    pub det: Complex64,
    pub iterations: usize,
    pub dim: usize,
}

pub fn find_zero(beta0: Complex64, which: Which, tol: f64, n: usize) -> Result<ZeroReport> {
    find_zero_with_bracket(beta0, which, tol, n, DEFAULT_BRACKET)
}

/// Newton iteration on the selected determinant with a centered-difference
/// derivative.
pub fn find_zero_with_bracket(beta0: Complex64, which: Which, tol: f64, n: usize, bracket: f64) -> Result<ZeroReport> {
    warn_limits(beta0, n);
    let mut beta = beta0;
    let mut d = det_at(beta, which, n)?;
    if d.norm() > bracket {
        return Err(Error::convergence(
            0,
            format!("|det| = {} at the start exceeds the bracket threshold {bracket}", d.norm()),
        ));
    }
    for it in 0..NEWTON_MAX_ITER {
        if d.norm() < tol {
            return Ok(ZeroReport {
                beta,
                det: d,
                iterations: it,
                dim: n,
            });
        }
        let up = det_at(beta + NEWTON_STEP, which, n)?;
        let dn = det_at(beta - NEWTON_STEP, which, n)?;
        let deriv = (up - dn) / (2.0 * NEWTON_STEP);
        if deriv.norm() <= 1e-14 * (1.0 + d.norm()) {
            return Err(Error::convergence(it, format!("determinant derivative vanished at β = {beta}")));
        }
        let step = d / deriv;
        beta -= step;
        if (beta - beta0).norm() > TRUST_RADIUS {
            return Err(Error::convergence(it + 1, format!("Newton left the trust region around {beta0}")));
        }
        d = det_at(beta, which, n)?;
        if step.norm() < 1e-10 {
            return Ok(ZeroReport {
                beta,
                det: d,
                iterations: it + 1,
                dim: n,
            });
        }
    }
    Err(Error::convergence(NEWTON_MAX_ITER, format!("Newton from {beta0} did not converge")))
}

/// Ordinate of the zero of `ζ(1/2 + it)` in `[t_lo, t_hi]`, located by a
/// scan of `|ζ|` computed from the Dirichlet eta function.
pub fn zeta_zero_ordinate(t_lo: f64, t_hi: f64, step: f64) -> Result<f64> {
    let z = |t: f64| -> Result<f64> { Ok(riemann_zeta_eta(Complex64::new(0.5, t))?.norm()) };
    let ts = line_grid(t_lo, t_hi, step)?;
    let vals = ts.iter().map(|&t| z(t)).collect::<Result<Vec<_>>>()?;
    let i = (1..vals.len() - 1)
        .filter(|&i| vals[i] < vals[i - 1] && vals[i] <= vals[i + 1])
        .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap())
        .ok_or_else(|| Error::convergence(ts.len(), "no interior minimum of |ζ| on the interval"))?;
    golden_section(z, ts[i - 1], ts[i + 1], 1e-10)
}
