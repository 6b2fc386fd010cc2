//! Sampling functions on the torus, Verblunsky paths `α_n = f(T^n x)`, and
//! trigonometric-polynomial approximants of `α` and `ρ = √(1 − |α|²)`.
//!
//! Only functions with known Fourier data are supported: the canonical
//! `f₀(x) = λ e(x_r)` and explicit trigonometric polynomials. The analyticity
//! width `w` of a sampling function is carried as metadata only.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{e, frac, Real, C};
use crate::torus::{SkewShiftMap, TorusPoint};

/// Default grid density per dimension for sup-norm certification.
pub const CERT_GRID: usize = 128;
/// Grid density per dimension used to validate a generator.
pub const VALIDATION_GRID: usize = 64;
/// Upper bound on the total number of grid points in any sup-norm scan.
const MAX_GRID_POINTS: usize = 1 << 20;

/// Finite Fourier series `Σ_k c_k e(k·x)` on `T^r`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial<T> {
    r: usize,
    coeffs: BTreeMap<Vec<i64>, C<T>>,
}

impl<T: Real> TrigPolynomial<T> {
    pub fn zero(r: usize) -> Self {
        Self {
            r,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(r: usize, c: C<T>) -> Self {
        let mut p = Self::zero(r);
        p.insert(vec![0; r], c);
        p
    }

    /// Builds from `(lattice point, coefficient)` pairs, summing duplicates.
    pub fn from_terms(r: usize, terms: impl IntoIterator<Item = (Vec<i64>, C<T>)>) -> Result<Self> {
        let mut p = Self::zero(r);
        for (k, c) in terms {
            if k.len() != r {
                return Err(Error::contract(format!("lattice point {k:?} not in Z^{r}")));
            }
            p.insert(k, c);
        }
        Ok(p)
    }

    fn insert(&mut self, k: Vec<i64>, c: C<T>) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(k).or_insert_with(C::zero);
        *slot += c;
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    /// `max |k|_∞` over nonzero coefficients (0 for the zero polynomial).
    pub fn degree(&self) -> i64 {
        self.coeffs
            .keys()
            .map(|k| k.iter().map(|v| v.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &[i64]) -> C<T> {
        self.coeffs.get(k).copied().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &C<T>)> {
        self.coeffs.iter()
    }

    pub fn eval(&self, x: &[T]) -> C<T> {
        debug_assert_eq!(x.len(), self.r);
        self.coeffs
            .iter()
            .map(|(k, &c)| {
                // reduce the phase mod 1 before scaling by 2π
                let phase = k
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&ki, &xi)| frac(acc + T::of_int(ki) * xi));
                c * e(phase)
            })
            .sum()
    }

    /// Fourier truncation to `|k|_∞ <= d`.
    pub fn truncate(&self, d: i64) -> Self {
        Self {
            r: self.r,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.iter().all(|v| v.abs() <= d))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            r: self.r,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (k.iter().map(|v| -v).collect(), c.conj()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.insert(k.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: C<T>) -> Self {
        let mut out = Self::zero(self.r);
        for (k, c) in &self.coeffs {
            out.insert(k.clone(), *c * s);
        }
        out
    }

    /// Product (coefficient convolution).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.r);
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let k: Vec<i64> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                out.insert(k, *c1 * *c2);
            }
        }
        out
    }

    /// `Σ |c_k| 2π |k|_1`, a Lipschitz constant in the sup metric.
    pub fn lipschitz_bound(&self) -> T {
        self.coeffs
            .iter()
            .map(|(k, c)| c.norm() * T::TAU() * T::of_int(k.iter().map(|v| v.abs()).sum()))
            .sum()
    }

    /// `Σ |c_k|`, an upper bound for the sup norm.
    pub fn coefficient_sum(&self) -> T {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Composition with the lifted skew-shift `T̃^n`, which is affine in `x`:
    /// `(T̃^n x)_l = Σ_{j<=l} C(n, l−j) x_j + C(n, l) ω`. Each monomial maps to
    /// a single monomial, so the composition is exact.
    pub fn compose_skew_shift(&self, map: &SkewShiftMap<T>, n: u32) -> Result<Self> {
        if map.r() != self.r {
            return Err(Error::contract("map and polynomial dimensions differ"));
        }
        let r = self.r;
        let binom: Vec<i64> = (0..=r as u32)
            .map(|l| binomial(n, l))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Domain(format!("binomial coefficients of n = {n} overflow")))?;
        let mut out = Self::zero(r);
        for (k, c) in &self.coeffs {
            // frequency M^T k, 0-indexed: (M^T k)_j = Σ_{l>=j} k_l C(n, l−j)
            let mut freq = vec![0i64; r];
            for (j, f) in freq.iter_mut().enumerate() {
                let mut s = 0i64;
                for l in j..r {
                    s = k[l]
                        .checked_mul(binom[l - j])
                        .and_then(|v| v.checked_add(s))
                        .ok_or_else(|| Error::Domain("composed frequency overflows".into()))?;
                }
                *f = s;
            }
            // phase Σ_l k_l C(n, l+1) ω, reduced mod 1 term by term
            let phase = k.iter().enumerate().fold(T::zero(), |acc, (l, &kl)| {
                let m = kl.checked_mul(binom[l + 1]).unwrap_or(0);
                acc + frac(T::of_int(m) * map.omega())
            });
            out.insert(freq, *c * e(phase));
        }
        Ok(out)
    }

    /// Sup of `|p|` over the uniform grid with `per_dim` points per axis.
    pub fn grid_sup(&self, per_dim: usize) -> T {
        grid_points::<T>(self.r, per_dim)
            .map(|x| self.eval(&x).norm())
            .fold(T::zero(), T::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TrigPolynomialJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: TrigPolynomialJson = serde_json::from_str(s)?;
        Self::from_terms(
            raw.r,
            raw.coeffs
                .into_iter()
                .map(|t| (t.k, Complex::new(T::of(t.c[0]), T::of(t.c[1])))),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    k: Vec<i64>,
    c: [f64; 2],
}

/// On-disk layout: `{"r": .., "degree": .., "coeffs": [{"k": [..], "c": [re, im]}]}`.
#[derive(Serialize, Deserialize)]
struct TrigPolynomialJson {
    r: usize,
    degree: i64,
    coeffs: Vec<TermJson>,
}

impl<T: Real> From<&TrigPolynomial<T>> for TrigPolynomialJson {
    fn from(p: &TrigPolynomial<T>) -> Self {
        Self {
            r: p.r,
            degree: p.degree(),
            coeffs: p
                .coeffs
                .iter()
                .map(|(k, c)| TermJson {
                    k: k.clone(),
                    c: [c.re.to_f64_lossy(), c.im.to_f64_lossy()],
                })
                .collect(),
        }
    }
}

fn binomial(n: u32, k: u32) -> Option<i64> {
    if k > n {
        return Some(0);
    }
    let mut acc: i64 = 1;
    for i in 0..k as i64 {
        acc = acc.checked_mul(n as i64 - i)? / (i + 1);
    }
    Some(acc)
}

/// Uniform grid on `T^r`, capped at [`MAX_GRID_POINTS`] points in total.
pub fn grid_points<T: Real>(r: usize, per_dim: usize) -> impl Iterator<Item = Vec<T>> {
    let mut m = per_dim.max(1);
    while r > 0 && m > 1 && m.checked_pow(r as u32).is_none_or(|t| t > MAX_GRID_POINTS) {
        m -= 1;
    }
    let total = m.pow(r as u32);
    let h = T::one() / T::of(m as f64);
    (0..total).map(move |mut idx| {
        let mut x = vec![T::zero(); r];
        for c in x.iter_mut() {
            *c = T::of((idx % m) as f64) * h;
            idx /= m;
        }
        x
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SamplingKind<T> {
    /// `f₀(x) = λ e(x_r)`.
    Canonical {
        lambda: C<T>,
    },
    TrigPoly(TrigPolynomial<T>),
}

/// A sampling function `f : T^r → D` generating Verblunsky coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingFunction<T> {
    r: usize,
    kind: SamplingKind<T>,
    /// Analyticity width, metadata only.
    pub width: T,
}

impl<T: Real> SamplingFunction<T> {
    /// `f₀(x) = λ e(x_r)` on `T^r`, requires `|λ| < 1`.
    pub fn canonical(r: usize, lambda: C<T>) -> Result<Self> {
        if r == 0 {
            return Err(Error::contract("dimension must be >= 1"));
        }
        if !(lambda.norm() < T::one()) {
            return Err(Error::Domain(format!("|λ| = {} must be < 1", lambda.norm())));
        }
        Ok(Self {
            r,
            kind: SamplingKind::Canonical { lambda },
            width: T::infinity(),
        })
    }

    /// Explicit trigonometric polynomial; must stay inside the unit disk on
    /// the validation grid.
    pub fn trig_poly(p: TrigPolynomial<T>, width: T) -> Result<Self> {
        let f = Self::trig_poly_unchecked(p, width);
        let sup = f.fourier().grid_sup(VALIDATION_GRID);
        if !(sup < T::one()) {
            return Err(Error::Domain(format!(
                "trigonometric polynomial reaches |f| = {sup} on the validation grid"
            )));
        }
        Ok(f)
    }

    /// Trigonometric polynomial without the generator check; fine for
    /// truncation studies, rejected later by [`verblunsky_path`] if it leaves
    /// the disk along an orbit.
    pub fn trig_poly_unchecked(p: TrigPolynomial<T>, width: T) -> Self {
        Self {
            r: p.r(),
            kind: SamplingKind::TrigPoly(p),
            width,
        }
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn kind(&self) -> &SamplingKind<T> {
        &self.kind
    }

    /// `λ` for the canonical kind.
    pub fn canonical_lambda(&self) -> Option<C<T>> {
        match &self.kind {
            SamplingKind::Canonical { lambda } => Some(*lambda),
            SamplingKind::TrigPoly(_) => None,
        }
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> C<T> {
        match &self.kind {
            SamplingKind::Canonical { lambda } => *lambda * e(x[x.len() - 1]),
            SamplingKind::TrigPoly(p) => p.eval(x),
        }
    }

    /// Full Fourier data of `f`.
    pub fn fourier(&self) -> TrigPolynomial<T> {
        match &self.kind {
            SamplingKind::Canonical { lambda } => {
                let mut k = vec![0; self.r];
                k[self.r - 1] = 1;
                let mut p = TrigPolynomial::zero(self.r);
                p.insert(k, *lambda);
                p
            }
            SamplingKind::TrigPoly(p) => p.clone(),
        }
    }
}

/// Verblunsky coefficients on `[a, b]` together with `ρ_n = √(1 − |α_n|²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerblunskyPath<T> {
    a: i64,
    alphas: Vec<C<T>>,
    rhos: Vec<T>,
}

/// `√(1 − |α|²)` computed as `√((1 − |α|)(1 + |α|))`.
#[inline]
pub fn rho_of<T: Real>(alpha: C<T>) -> T {
    let m = alpha.norm();
    ((T::one() - m) * (T::one() + m)).max(T::zero()).sqrt()
}

impl<T: Real> VerblunskyPath<T> {
    /// Path from explicit coefficients starting at site `a`.
    pub fn from_alphas(a: i64, alphas: Vec<C<T>>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::contract("empty Verblunsky path"));
        }
        for (i, al) in alphas.iter().enumerate() {
            if !(al.norm() < T::one()) {
                return Err(Error::GeneratorInvalid {
                    n: a + i as i64,
                    modulus: al.norm().to_f64_lossy(),
                });
            }
        }
        let rhos = alphas.iter().map(|&al| rho_of(al)).collect();
        Ok(Self { a, alphas, rhos })
    }

    #[inline]
    pub fn a(&self) -> i64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> i64 {
        self.a + self.alphas.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.a() && n <= self.b()
    }

    /// `α_n`; panics outside `[a, b]`.
    #[inline]
    pub fn alpha(&self, n: i64) -> C<T> {
        self.alphas[(n - self.a) as usize]
    }

    #[inline]
    pub fn rho(&self, n: i64) -> T {
        self.rhos[(n - self.a) as usize]
    }

    pub fn alphas(&self) -> &[C<T>] {
        &self.alphas
    }

    pub fn rhos(&self) -> &[T] {
        &self.rhos
    }

    /// Copy with `α_n` replaced for `n` in `[a, b]` by `g(n, α_n)`.
    pub fn map_alphas(&self, mut g: impl FnMut(i64, C<T>) -> C<T>) -> Result<Self> {
        let a = self.a;
        Self::from_alphas(
            a,
            self.alphas
                .iter()
                .enumerate()
                .map(|(i, &al)| g(a + i as i64, al))
                .collect(),
        )
    }

    /// Largest `| ρ_n² + |α_n|² − 1 |`.
    pub fn pythagorean_defect(&self) -> T {
        self.alphas
            .iter()
            .zip(&self.rhos)
            .map(|(al, &r)| (r * r + al.norm_sqr() - T::one()).abs())
            .fold(T::zero(), T::max)
    }
}

/// `α_n = f(T^n x)` for `a <= n <= b`.
pub fn verblunsky_path<T: Real>(
    f: &SamplingFunction<T>,
    map: &SkewShiftMap<T>,
    x: &TorusPoint<T>,
    a: i64,
    b: i64,
) -> Result<VerblunskyPath<T>> {
    if a > b {
        return Err(Error::contract(format!("empty interval [{a}, {b}]")));
    }
    if f.r() != map.r() {
        return Err(Error::contract("sampling function and map dimensions differ"));
    }
    let mut orbit = map.orbit(x, a)?;
    let mut alphas = Vec::with_capacity((b - a + 1) as usize);
    for n in a..=b {
        let al = f.eval(orbit.peek());
        if !(al.norm() < T::one()) {
            return Err(Error::GeneratorInvalid {
                n,
                modulus: al.norm().to_f64_lossy(),
            });
        }
        alphas.push(al);
        orbit.advance();
    }
    VerblunskyPath::from_alphas(a, alphas)
}

/// Degree-`d` Fourier truncation `Σ_{|k|_∞ <= d} f̂(k) e(k·x)`.
pub fn trig_truncate<T: Real>(f: &SamplingFunction<T>, d: i64) -> TrigPolynomial<T> {
    f.fourier().truncate(d.max(0))
}

/// Taylor coefficients of `√(1 − x)`: `(2n)! / ((1 − 2n) (n!)² 4ⁿ)`, `n = 0..=terms`.
pub fn sqrt_taylor_coeffs<T: Real>(terms: usize) -> Vec<T> {
    let mut c = Vec::with_capacity(terms + 1);
    c.push(T::one());
    for n in 1..=terms {
        let nf = T::of(n as f64);
        let two = T::of(2.0);
        let prev = c[n - 1];
        // c_n / c_{n-1} = (2n − 1)(3 − 2n) / (2n (1 − 2n))
        c.push(prev * (two * nf - T::one()) * (T::of(3.0) - two * nf) / (two * nf * (T::one() - two * nf)));
    }
    c
}

/// Partial sum `Σ_{n=0}^{terms} c_n xⁿ` of the `√(1 − x)` series.
pub fn sqrt_taylor<T: Real>(x: T, terms: usize) -> Result<T> {
    if !(x.abs() < T::one()) {
        return Err(Error::Domain(format!("|x| = {} must be < 1", x.abs())));
    }
    let c = sqrt_taylor_coeffs::<T>(terms);
    Ok(c.iter().rev().fold(T::zero(), |acc, &cn| acc * x + cn))
}

/// Tail bound `r₀^N / (1 − r₀)` valid for `|x| <= r₀`, `N >= 1`.
pub fn sqrt_taylor_tail_bound<T: Real>(r0: T, terms: usize) -> T {
    r0.powi(terms as i32) / (T::one() - r0)
}

/// Sup-grid errors of the `α` and `ρ` approximants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxErrorReport {
    pub grid_per_dim: usize,
    pub alpha_grid_error: f64,
    pub rho_grid_error: f64,
    /// Lipschitz slack of `p₁` over half a grid cell.
    pub alpha_poly_slack: f64,
    pub rho_poly_slack: f64,
    pub alpha_degree: i64,
    pub rho_degree: i64,
    pub sqrt_terms: usize,
}

#[derive(Clone, Debug)]
pub struct RhoApprox<T> {
    pub alpha_poly: TrigPolynomial<T>,
    pub rho_poly: TrigPolynomial<T>,
    pub report: ApproxErrorReport,
}

/// Polynomial approximants of `α_{x;n} = f(T̃^n x)` and `ρ_{x;n}`.
///
/// `p₁` is the degree-`D` truncation composed with `T̃^n`; `p₂` applies the
/// `√(1 − ·)` Taylor polynomial with `⌊√D⌋` terms to `|q|²`, where `q` is the
/// degree-`⌊√D⌋` truncation composed with `T̃^n`. Errors are measured on a
/// uniform grid with `grid` points per axis.
pub fn rho_poly_approx<T: Real>(
    f: &SamplingFunction<T>,
    map: &SkewShiftMap<T>,
    n: u32,
    d: i64,
    grid: usize,
) -> Result<RhoApprox<T>> {
    if f.r() != map.r() {
        return Err(Error::contract("sampling function and map dimensions differ"));
    }
    let r0 = f.fourier().grid_sup(grid);
    if !(r0 < T::one()) {
        return Err(Error::Domain("sampling function leaves the unit disk".into()));
    }
    let alpha_poly = trig_truncate(f, d).compose_skew_shift(map, n)?;

    let sqrt_terms = (d.max(0) as f64).sqrt().floor() as usize;
    let q = trig_truncate(f, sqrt_terms as i64).compose_skew_shift(map, n)?;
    let bound = (T::one() + r0) / T::of(2.0);
    let q_sup = q.grid_sup(grid);
    if q_sup > bound {
        return Err(Error::contract(format!(
            "truncated sampling function reaches {q_sup} > (1 + r0)/2 = {bound} on the grid"
        )));
    }
    let q_abs2 = q.mul(&q.conj());
    let coeffs = sqrt_taylor_coeffs::<T>(sqrt_terms);
    let mut rho_poly = TrigPolynomial::zero(f.r());
    for &c in coeffs.iter().rev() {
        rho_poly = rho_poly
            .mul(&q_abs2)
            .add(&TrigPolynomial::constant(f.r(), Complex::new(c, T::zero())));
    }

    let mut alpha_err = T::zero();
    let mut rho_err = T::zero();
    for x in grid_points::<T>(f.r(), grid) {
        let pt = TorusPoint::new(x.clone())?;
        let y = map.orbit_coordinate(&pt, n as i64)?;
        let al = f.eval(y.coords());
        let rho = rho_of(al);
        alpha_err = alpha_err.max((alpha_poly.eval(&x) - al).norm());
        rho_err = rho_err.max((rho_poly.eval(&x) - C::new(rho, T::zero())).norm());
    }
    let half_cell = T::of(0.5) / T::of(grid.max(1) as f64);
    let report = ApproxErrorReport {
        grid_per_dim: grid,
        alpha_grid_error: alpha_err.to_f64_lossy(),
        rho_grid_error: rho_err.to_f64_lossy(),
        alpha_poly_slack: (alpha_poly.lipschitz_bound() * half_cell).to_f64_lossy(),
        rho_poly_slack: (rho_poly.lipschitz_bound() * half_cell).to_f64_lossy(),
        alpha_degree: alpha_poly.degree(),
        rho_degree: rho_poly.degree(),
        sqrt_terms,
    };
    Ok(RhoApprox {
        alpha_poly,
        rho_poly,
        report,
    })
}

/// Test function on `T^2` with `f̂(k) = s 2^{−|k|_∞}` on both coordinate axes
/// (`|k|_∞ <= kmax`), zero elsewhere. Its truncation error at degree `D` is
/// `4 s (2^{−D} − 2^{−kmax})`, attained at the origin.
pub fn axis_decay_test_function<T: Real>(kmax: i64, s: T) -> TrigPolynomial<T> {
    let mut p = TrigPolynomial::zero(2);
    p.insert(vec![0, 0], Complex::new(s, T::zero()));
    for m in 1..=kmax {
        let c = Complex::new(s * T::of(2f64.powi(-(m as i32))), T::zero());
        for k in [vec![m, 0], vec![-m, 0], vec![0, m], vec![0, -m]] {
            p.insert(k, c);
        }
    }
    p
}
