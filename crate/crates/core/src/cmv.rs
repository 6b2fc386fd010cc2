//! Finite extended CMV operators `E = L·M` built from Θ-blocks, the
//! tridiagonal pencil `A(z) = z L* − M`, and the reduction to a
//! Schrödinger operator at `z = −1`.
//!
//! Site `n` of the window `[a, b]` is stored at dense index `n − a`. The
//! block `Θ_n` acts on sites `{n, n+1}`; `L` collects even `n`, `M` odd `n`.
//! The edge blocks `Θ_{a−1}` and `Θ_b` carry the unimodular boundary phases
//! `β`, `β̃` and reduce to the 1×1 entries `−β` at `(a, a)` and `β̃̄` at `(b, b)`.

use std::io::Write;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, SymTridiagonal, Tridiagonal};
use crate::sampling::VerblunskyPath;
use crate::scalar::{Real, C};
use crate::schrodinger::SchrodingerFiniteOp;

fn unimodular_tol<T: Real>() -> T {
    T::of(1e-12).max(T::epsilon() * T::of(16.0))
}

#[inline]
fn is_even(n: i64) -> bool {
    n.rem_euclid(2) == 0
}

/// `Θ = [[ᾱ, ρ], [ρ, −α]]` with `ρ = √(1 − |α|²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaBlock<T> {
    pub alpha: C<T>,
    pub rho: T,
}

impl<T: Real> ThetaBlock<T> {
    /// Requires `|α| <= 1`; unimodular `α` (within rounding) gives `ρ = 0`.
    pub fn new(alpha: C<T>) -> Result<Self> {
        let m = alpha.norm();
        if m > T::one() + unimodular_tol::<T>() {
            return Err(Error::contract(format!("|α| = {m} exceeds 1")));
        }
        let rho = if (m - T::one()).abs() <= unimodular_tol::<T>() {
            T::zero()
        } else {
            crate::sampling::rho_of(alpha)
        };
        Ok(Self { alpha, rho })
    }

    pub fn is_boundary(&self) -> bool {
        self.rho.is_zero()
    }

    pub fn matrix(&self) -> [[C<T>; 2]; 2] {
        let r = C::new(self.rho, T::zero());
        [[self.alpha.conj(), r], [r, -self.alpha]]
    }

    /// `max |Θ*Θ − I|`.
    pub fn unitarity_defect(&self) -> T {
        let m = self.matrix();
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let s = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                let target = if i == j { C::one() } else { C::zero() };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

/// Spectral parameter `z`, flagged when it lies on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralParameter<T> {
    pub z: C<T>,
    pub on_circle: bool,
}

impl<T: Real> SpectralParameter<T> {
    pub fn new(z: C<T>) -> Self {
        Self {
            z,
            on_circle: (z.norm() - T::one()).abs() <= unimodular_tol::<T>(),
        }
    }

    /// `z = e^{2πit}`, the angle `t` measured in turns.
    pub fn from_turns(t: T) -> Self {
        Self {
            z: crate::scalar::e(crate::scalar::frac(t)),
            on_circle: true,
        }
    }

    pub fn require_on_circle(&self) -> Result<()> {
        if self.on_circle {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "|z| = {} is not on the unit circle",
                self.z.norm()
            )))
        }
    }
}

/// Restriction of the extended CMV operator to `[a, b]` with boundary
/// phases `(β, β̃)`. Immutable once assembled.
#[derive(Clone, Debug)]
pub struct FiniteCmv<T> {
    a: i64,
    b: i64,
    beta: C<T>,
    beta_tilde: C<T>,
    path: VerblunskyPath<T>,
    unitarity_defect: T,
}

/// Assembles on the full range of `path`.
pub fn assemble_finite_cmv<T: Real>(path: &VerblunskyPath<T>, beta: C<T>, beta_tilde: C<T>) -> Result<FiniteCmv<T>> {
    FiniteCmv::new(path.clone(), path.a(), path.b(), beta, beta_tilde)
}

impl<T: Real> FiniteCmv<T> {
    /// Window `[a, b]` must lie inside the path range. Sites of the path
    /// outside the window are kept for [`FiniteCmv::schrodinger_reduction`].
    pub fn new(path: VerblunskyPath<T>, a: i64, b: i64, beta: C<T>, beta_tilde: C<T>) -> Result<Self> {
        if a > b || !path.contains(a) || !path.contains(b) {
            return Err(Error::contract(format!(
                "window [{a}, {b}] not inside path range [{}, {}]",
                path.a(),
                path.b()
            )));
        }
        for (name, ph) in [("β", beta), ("β̃", beta_tilde)] {
            if (ph.norm() - T::one()).abs() > unimodular_tol::<T>() {
                return Err(Error::contract(format!(
                    "boundary phase {name} has modulus {}",
                    ph.norm()
                )));
            }
        }
        let mut op = Self {
            a,
            b,
            beta,
            beta_tilde,
            path,
            unitarity_defect: T::zero(),
        };
        let defect = (a - 1..=b)
            .map(|n| op.block(n).map(|blk| blk.unitarity_defect()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(T::zero(), T::max);
        if defect > T::of(1e-12).max(T::epsilon() * T::of(64.0)) {
            return Err(Error::Numerical(format!("Θ-block unitarity defect {defect}")));
        }
        op.unitarity_defect = defect;
        Ok(op)
    }

    /// Same data on a sub-window.
    pub fn window(&self, a: i64, b: i64) -> Result<Self> {
        Self::new(self.path.clone(), a, b, self.beta, self.beta_tilde)
    }

    /// Same window with new boundary phases.
    pub fn with_boundary(&self, beta: C<T>, beta_tilde: C<T>) -> Result<Self> {
        Self::new(self.path.clone(), self.a, self.b, beta, beta_tilde)
    }

    /// Same window and boundary with the path replaced.
    pub fn with_path(&self, path: VerblunskyPath<T>) -> Result<Self> {
        Self::new(path, self.a, self.b, self.beta, self.beta_tilde)
    }

    #[inline]
    pub fn a(&self) -> i64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn len(&self) -> usize {
        (self.b - self.a + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn beta(&self) -> C<T> {
        self.beta
    }

    pub fn beta_tilde(&self) -> C<T> {
        self.beta_tilde
    }

    pub fn path(&self) -> &VerblunskyPath<T> {
        &self.path
    }

    /// Largest Θ-block unitarity defect found at assembly.
    pub fn unitarity_defect(&self) -> T {
        self.unitarity_defect
    }

    /// `α_n` with the boundary substitution `α_{a−1} = β`, `α_b = β̃`.
    pub fn alpha_eff(&self, n: i64) -> C<T> {
        debug_assert!(n >= self.a - 1 && n <= self.b);
        if n == self.a - 1 {
            self.beta
        } else if n == self.b {
            self.beta_tilde
        } else {
            self.path.alpha(n)
        }
    }

    pub fn rho_eff(&self, n: i64) -> T {
        if n == self.a - 1 || n == self.b {
            T::zero()
        } else {
            self.path.rho(n)
        }
    }

    pub fn block(&self, n: i64) -> Result<ThetaBlock<T>> {
        if n < self.a - 1 || n > self.b {
            return Err(Error::contract(format!(
                "no block Θ_{n} in window [{}, {}]",
                self.a, self.b
            )));
        }
        if n == self.a - 1 || n == self.b {
            return Ok(ThetaBlock {
                alpha: self.alpha_eff(n),
                rho: T::zero(),
            });
        }
        Ok(ThetaBlock {
            alpha: self.path.alpha(n),
            rho: self.path.rho(n),
        })
    }

    fn factor_dense(&self, even: bool) -> CMatrix<T> {
        let n = self.len();
        let mut m = CMatrix::zeros(n, n);
        for site in self.a - 1..=self.b {
            if is_even(site) != even {
                continue;
            }
            let th = self.block(site).expect("block inside window").matrix();
            for (di, row) in th.iter().enumerate() {
                for (dj, &v) in row.iter().enumerate() {
                    let (si, sj) = (site + di as i64, site + dj as i64);
                    if si >= self.a && si <= self.b && sj >= self.a && sj <= self.b {
                        m[((si - self.a) as usize, (sj - self.a) as usize)] = v;
                    }
                }
            }
        }
        m
    }

    /// Dense `L` (blocks with even start site).
    pub fn l_dense(&self) -> CMatrix<T> {
        self.factor_dense(true)
    }

    /// Dense `M` (blocks with odd start site).
    pub fn m_dense(&self) -> CMatrix<T> {
        self.factor_dense(false)
    }

    pub fn e_dense(&self) -> CMatrix<T> {
        self.l_dense().matmul(&self.m_dense())
    }

    /// `A(z) = z L* − M` from the closed-form tridiagonal entries.
    pub fn tridiagonal_a(&self, z: C<T>) -> Tridiagonal<T> {
        let n = self.len();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        for j in self.a..=self.b {
            let (prev, cur) = (self.alpha_eff(j - 1), self.alpha_eff(j));
            if is_even(j) {
                diag.push(z * cur + prev);
            } else {
                diag.push(-(z * prev.conj()) - cur.conj());
            }
            if j < self.b {
                let r = C::new(self.rho_eff(j), T::zero());
                off.push(if is_even(j) { z * r } else { -r });
            }
        }
        Tridiagonal::new(off.clone(), diag, off)
    }

    /// `z L* − M` from the dense factors.
    pub fn product_form_a(&self, z: C<T>) -> CMatrix<T> {
        self.l_dense().adjoint().scale(z).sub(&self.m_dense())
    }

    /// Largest entrywise gap between the closed and product forms of `A(z)`.
    pub fn closed_form_discrepancy(&self, z: C<T>) -> T {
        self.tridiagonal_a(z).to_dense().sub(&self.product_form_a(z)).max_abs()
    }

    /// Real part of `A(−1)` rescaled to a Schrödinger operator.
    ///
    /// Requires constant `|α_n|` on `[a−1, b]` and path data at both `a − 1`
    /// and `b`: the diagonal `Re(α_{j−1} − α_j)` is taken from the orbit, not
    /// from the boundary phases, so that `H` is the Dirichlet restriction of
    /// the whole-line operator. With `U = diag((−1)^j)`, `H = U (B/ρ) U` has
    /// unit off-diagonals and diagonal `g f(T^{j−1} x)`.
    pub fn schrodinger_reduction(&self) -> Result<SchrodingerReduction<T>> {
        if !self.path.contains(self.a - 1) {
            return Err(Error::ReductionUnavailable(format!(
                "path must start at or before a − 1 = {}",
                self.a - 1
            )));
        }
        let lambda = self.path.alpha(self.a - 1).norm();
        let tol = T::of(1e-12).max(T::epsilon() * T::of(64.0));
        for n in self.a - 1..=self.b {
            if (self.path.alpha(n).norm() - lambda).abs() > tol {
                return Err(Error::ReductionUnavailable(format!(
                    "|α_n| not constant: |α_{n}| = {} vs {lambda}",
                    self.path.alpha(n).norm()
                )));
            }
        }
        let rho = self.path.rho(self.a - 1);
        if rho.is_zero() {
            return Err(Error::ReductionUnavailable("ρ = 0".into()));
        }
        let b_diag: Vec<T> = (self.a..=self.b)
            .map(|j| (self.path.alpha(j - 1) - self.path.alpha(j)).re)
            .collect();
        let b_off: Vec<T> = (self.a..self.b).map(|j| -self.path.rho(j)).collect();
        let h_diag: Vec<T> = b_diag.iter().map(|&d| d / rho).collect();
        Ok(SchrodingerReduction {
            b: SymTridiagonal::new(b_diag, b_off),
            h: SchrodingerFiniteOp::from_potential(self.a, h_diag)?,
            g: lambda / rho,
            rho,
        })
    }
}

/// Output of [`FiniteCmv::schrodinger_reduction`].
#[derive(Clone, Debug)]
pub struct SchrodingerReduction<T> {
    /// `Re A(−1)`.
    pub b: SymTridiagonal<T>,
    pub h: SchrodingerFiniteOp<T>,
    /// `|λ| / √(1 − |λ|²)`.
    pub g: T,
    pub rho: T,
}

/// Writes nonzero entries as `row,col,re,im` with global site labels.
pub fn write_matrix_csv<T: Real, W: Write>(m: &CMatrix<T>, first_site: i64, mut w: W) -> Result<()> {
    writeln!(w, "row,col,re,im")?;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if !v.is_zero() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    first_site + i as i64,
                    first_site + j as i64,
                    crate::io::fmt_f64(v.re.to_f64_lossy()),
                    crate::io::fmt_f64(v.im.to_f64_lossy())
                )?;
            }
        }
    }
    Ok(())
}
