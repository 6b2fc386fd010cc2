//! Finite-volume spectra: Sturm-bisection eigenvalues of `H^{[1,N]}`,
//! dense unitary eigenvalues of `E`, the integrated density of states,
//! eigenvalues near zero, and unfolded spacing statistics.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::cmv::FiniteCmv;
use crate::cocycle::uniform_point;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, gershgorin, SymTridiagonal};
use crate::scalar::Real;
use crate::schrodinger::{PotentialSpec, SchrodingerFiniteOp};
use crate::stats::{ks_distance, mean};

/// Largest `E` handled by the dense unitary eigensolver.
pub const DENSE_CMV_LIMIT: usize = 512;

/// All eigenvalues of a finite Schrödinger operator, ascending.
pub fn eigs_symmetric_tridiag<T: Real>(op: &SchrodingerFiniteOp<T>) -> Vec<T> {
    op.as_sym().eigenvalues()
}

/// Eigenvalues of the unitary `E` (dense QR, `N <= 512`).
pub fn cmv_eigenvalues<T: Real>(op: &FiniteCmv<T>) -> Result<Vec<Complex<T>>> {
    if op.len() > DENSE_CMV_LIMIT {
        return Err(Error::contract(format!(
            "dense unitary eigensolve is capped at N = {DENSE_CMV_LIMIT}, got {}",
            op.len()
        )));
    }
    eigenvalues(&op.e_dense())
}

/// Averaged normalized counting function `k(E) = #{eig < E} / N` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdsTable {
    pub energies: Vec<f64>,
    pub k: Vec<f64>,
    pub n: usize,
    pub samples: usize,
}

impl IdsTable {
    /// Linear interpolation of `k`; 0 below and 1 above the grid.
    pub fn k_at(&self, e: f64) -> f64 {
        let g = &self.energies;
        if e <= g[0] {
            return self.k[0];
        }
        if e >= g[g.len() - 1] {
            return self.k[g.len() - 1];
        }
        let i = g.partition_point(|&t| t <= e) - 1;
        let w = (e - g[i]) / (g[i + 1] - g[i]);
        self.k[i] * (1.0 - w) + self.k[i + 1] * w
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.energies
            .iter()
            .zip(&self.k)
            .map(|(&e, &k)| vec![crate::io::fmt_f64(e), crate::io::fmt_f64(k)])
            .collect()
    }
}

/// IDS of operators produced by `make(i)` for `i < samples`, on a uniform
/// grid of `grid` energies spanning `[lo, hi]`.
pub fn ids_table<F>(n: usize, samples: usize, lo: f64, hi: f64, grid: usize, make: F) -> Result<IdsTable>
where
    F: Fn(usize) -> Result<SymTridiagonal<f64>> + Sync,
{
    if grid < 2 || !(lo < hi) {
        return Err(Error::contract("IDS grid needs >= 2 points and lo < hi"));
    }
    let energies: Vec<f64> = (0..grid)
        .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
        .collect();
    let counts: Vec<Vec<usize>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let h = make(i)?;
            if h.len() != n {
                return Err(Error::contract("operator size differs from N"));
            }
            Ok(energies.iter().map(|&e| h.count_below(e)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let norm = (n * samples) as f64;
    let k = (0..grid)
        .map(|j| counts.iter().map(|c| c[j]).sum::<usize>() as f64 / norm)
        .collect();
    Ok(IdsTable {
        energies,
        k,
        n,
        samples,
    })
}

/// IDS of `H^{[1,N]}` averaged over `M` uniform base points drawn from
/// `seed`; the grid spans the Gershgorin range `[−2 − 2g, 2 + 2g]`.
pub fn ids_estimate(spec: &PotentialSpec<f64>, n: usize, samples: usize, grid: usize, seed: u64) -> Result<IdsTable> {
    if n < 64 || samples < 8 {
        return Err(Error::contract("IDS needs N >= 64 and M >= 8"));
    }
    let edge = 2.0 + 2.0 * spec.g;
    ids_table(n, samples, -edge, edge, grid, |i| {
        let x = uniform_point(spec.map.r(), seed, i as u64);
        let s = PotentialSpec::new(spec.g, spec.map, x)?;
        Ok(SchrodingerFiniteOp::new(&s, 1, n as i64)?.as_sym())
    })
}

/// Eigenvalue of smallest modulus, found by widening `[−w, w]` until it
/// holds an eigenvalue.
pub fn min_abs_eigenvalue(h: &SymTridiagonal<f64>) -> f64 {
    let (lo, hi) = gershgorin(&h.diag, &h.off);
    let cap = lo.abs().max(hi.abs()) + 1.0;
    let mut w = 1e-6;
    while w < cap && h.count_below(w) == h.count_below(-w) {
        w *= 2.0;
    }
    h.eigenvalues_in(-w, w)
        .into_iter()
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSpectrumReport {
    pub sizes: Vec<usize>,
    pub min_abs: Vec<f64>,
    pub nonincreasing: bool,
}

/// `min |eig(H^{[1,N]})|` for each `N` at the base point of `spec`.
pub fn zero_in_spectrum_check(spec: &PotentialSpec<f64>, sizes: &[usize]) -> Result<ZeroSpectrumReport> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::contract("sizes must be positive and strictly increasing"));
    }
    let min_abs: Vec<f64> = sizes
        .iter()
        .map(|&n| SchrodingerFiniteOp::new(spec, 1, n as i64).map(|h| min_abs_eigenvalue(&h.as_sym())))
        .collect::<Result<_>>()?;
    let nonincreasing = min_abs.windows(2).all(|w| w[1] <= w[0]);
    Ok(ZeroSpectrumReport {
        sizes: sizes.to_vec(),
        min_abs,
        nonincreasing,
    })
}

/// Minimum number of eigenvalues a spacing window must hold.
pub const MIN_SPACING_EIGS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpacingStats {
    /// Gaps divided by the mean gap in the window.
    pub gaps: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// `(s, F_n(s))` on `s = 0, 0.1, …, 4`.
    pub cdf: Vec<(f64, f64)>,
    pub ks_poisson: f64,
    pub ks_clock: f64,
}

/// Gap statistics of the eigenvalues inside `[center − half, center + half]`.
///
/// Gaps are unfolded with the linear counting function of the window, i.e.
/// divided by the mean spacing `(λ_last − λ_first)/(n − 1)`.
pub fn spacing_stats(eigs: &[f64], center: f64, half_width: f64) -> Result<SpacingStats> {
    let mut inside: Vec<f64> = eigs
        .iter()
        .copied()
        .filter(|e| (e - center).abs() <= half_width)
        .collect();
    if inside.len() < MIN_SPACING_EIGS {
        return Err(Error::WidenWindow {
            found: inside.len(),
            needed: MIN_SPACING_EIGS,
        });
    }
    inside.sort_by(f64::total_cmp);
    let span = inside[inside.len() - 1] - inside[0];
    let mean_gap = span / (inside.len() - 1) as f64;
    let gaps: Vec<f64> = inside.windows(2).map(|w| (w[1] - w[0]) / mean_gap).collect();
    let m = mean(&gaps);
    let variance = gaps.iter().map(|g| (g - m).powi(2)).sum::<f64>() / gaps.len() as f64;
    let cnt = gaps.len() as f64;
    let cdf = (0..=40)
        .map(|i| {
            let s = 0.1 * i as f64;
            (s, gaps.iter().filter(|&&g| g <= s).count() as f64 / cnt)
        })
        .collect();
    Ok(SpacingStats {
        ks_poisson: ks_distance(&gaps, |s| 1.0 - (-s.max(0.0)).exp()),
        ks_clock: ks_to_clock(&gaps, 1e-9),
        gaps,
        mean: m,
        variance,
        cdf,
    })
}

/// KS distance to the point mass at 1, treating `|s − 1| <= tol` as a tie.
fn ks_to_clock(gaps: &[f64], tol: f64) -> f64 {
    let n = gaps.len() as f64;
    let below = gaps.iter().filter(|&&g| g < 1.0 - tol).count() as f64;
    let above = gaps.iter().filter(|&&g| g > 1.0 + tol).count() as f64;
    (below / n).max(above / n)
}

/// Eigenvalues of `H^{[1,N]}` for the spacing and zero-energy experiments.
pub fn schrodinger_eigenvalues(spec: &PotentialSpec<f64>, n: usize) -> Result<Vec<f64>> {
    Ok(eigs_symmetric_tridiag(&SchrodingerFiniteOp::new(spec, 1, n as i64)?))
}
