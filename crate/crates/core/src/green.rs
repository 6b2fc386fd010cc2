//! Green's functions of finite CMV and Schrödinger operators, the
//! `(γ, Γ, p)`-suitability classifier, and numerical checks of the
//! perturbation, restriction and solution-bound estimates.

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::cmv::FiniteCmv;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, norm2, normalize, CMatrix, Tridiagonal, TridiagonalLu};
use crate::scalar::{Real, C};
use crate::schrodinger::{GreenEntry, SchrodingerFiniteOp};

/// A finite operator whose resolvent is read off a tridiagonal pencil:
/// `A(z) = z L* − M` for CMV, `H − z` for Schrödinger.
pub trait FiniteOperator<T: Real> {
    fn first_site(&self) -> i64;
    fn last_site(&self) -> i64;
    fn pencil(&self, z: C<T>) -> Tridiagonal<T>;

    fn sites(&self) -> usize {
        (self.last_site() - self.first_site() + 1) as usize
    }
}

impl<T: Real> FiniteOperator<T> for FiniteCmv<T> {
    fn first_site(&self) -> i64 {
        self.a()
    }
    fn last_site(&self) -> i64 {
        self.b()
    }
    fn pencil(&self, z: C<T>) -> Tridiagonal<T> {
        self.tridiagonal_a(z)
    }
}

impl<T: Real> FiniteOperator<T> for SchrodingerFiniteOp<T> {
    fn first_site(&self) -> i64 {
        self.a()
    }
    fn last_site(&self) -> i64 {
        self.b()
    }
    fn pencil(&self, z: C<T>) -> Tridiagonal<T> {
        self.as_sym().shifted(z)
    }
}

fn residual_tol<T: Real>() -> T {
    T::of(1e-10).max(T::epsilon() * T::of(1e4))
}

/// `⟨δ_k, A(z)^{-1} δ_l⟩` for a finite CMV operator, with the solved column
/// certified by its residual.
pub fn green_entry_cmv<T: Real>(op: &FiniteCmv<T>, z: C<T>, k: i64, l: i64) -> Result<GreenEntry<T>> {
    green_entry(op, z, k, l)
}

/// Green's function entry for any [`FiniteOperator`].
pub fn green_entry<T: Real, O: FiniteOperator<T>>(op: &O, z: C<T>, k: i64, l: i64) -> Result<GreenEntry<T>> {
    let (a, b) = (op.first_site(), op.last_site());
    for s in [k, l] {
        if s < a || s > b {
            return Err(Error::contract(format!("site {s} outside [{a}, {b}]")));
        }
    }
    let pencil = op.pencil(z);
    let lu = pencil.factor()?;
    let li = (l - a) as usize;
    let col = lu.inverse_column(li);
    let mut r = pencil.matvec(&col);
    r[li] -= C::new(T::one(), T::zero());
    let resid = r.iter().map(|v| v.norm()).fold(T::zero(), T::max);
    if !(resid <= residual_tol::<T>() * (T::one() + norm2(&col))) {
        return Err(Error::NearSpectrum {
            condition: lu.condition().to_f64_lossy(),
        });
    }
    Ok(GreenEntry {
        value: col[(k - a) as usize],
        condition: lu.condition(),
    })
}

/// `(γ, Γ, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuitabilityParams {
    pub gamma: f64,
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    pub p: u32,
}

impl SuitabilityParams {
    pub fn new(gamma: f64, big_gamma: f64, p: u32) -> Result<Self> {
        if !(gamma > 0.0) || !(big_gamma > 0.0) {
            return Err(Error::contract(format!(
                "γ = {gamma} and Γ = {big_gamma} must both be > 0"
            )));
        }
        Ok(Self { gamma, big_gamma, p })
    }

    /// Same `γ, Γ` one dyadic level down; `p = 0` stays at 0.
    pub fn relaxed(&self) -> Self {
        Self {
            p: self.p.saturating_sub(1),
            ..*self
        }
    }

    /// `log(2^{−p} e^Γ)`.
    pub fn log_norm_budget(&self) -> f64 {
        self.big_gamma - self.p as f64 * std::f64::consts::LN_2
    }

    /// `log(2^{−(p+1)} e^{−γ d})`.
    pub fn log_decay_budget(&self, d: i64) -> f64 {
        -self.gamma * d as f64 - (self.p + 1) as f64 * std::f64::consts::LN_2
    }

    /// Radius `e^{−(2Γ + γ len)}` of admissible perturbations.
    pub fn perturbation_radius(&self, interval_len: i64) -> PerturbationRadius {
        perturb_suitability_margin(self.gamma, self.big_gamma, interval_len)
    }
}

/// Classification of `[−N, N]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuitabilityVerdict {
    #[serde(rename = "N")]
    pub n: i64,
    pub z: [f64; 2],
    pub gamma: f64,
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    pub p: u32,
    pub suitable: bool,
    pub norm_ok: bool,
    pub decay_ok: bool,
    /// Smallest log-slack over both conditions; negative iff unsuitable.
    /// `-inf` (written as `null`) when the pencil is numerically singular.
    pub margin: f64,
    /// Most violated decay pair, when the decay condition fails.
    pub worst_pair: Option<(i64, i64)>,
    pub inverse_norm: f64,
}

impl SuitabilityVerdict {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Interval half-length `N` of `[−N, N]`.
fn symmetric_half_length<T: Real, O: FiniteOperator<T>>(op: &O) -> Result<i64> {
    let (a, b) = (op.first_site(), op.last_site());
    if a != -b || b < 1 {
        return Err(Error::contract(format!(
            "interval [{a}, {b}] is not of the form [−N, N], N >= 1"
        )));
    }
    Ok(b)
}

/// Relative tolerance and iteration cap for the inverse-norm power iteration.
const NORM_REL_TOL: f64 = 1e-8;
const NORM_MAX_ITER: usize = 500;

/// Tests both suitability conditions on `[−N, N]`.
///
/// Condition (1) bounds the 2-norm of the inverse pencil, which equals the
/// resolvent norm of `E` because `L` is unitary. Condition (2) bounds every
/// Green's function entry with `|k − l| >= N/2`.
pub fn suitability_classify<T: Real, O: FiniteOperator<T>>(
    op: &O,
    z: C<T>,
    params: &SuitabilityParams,
) -> Result<SuitabilityVerdict> {
    let n = symmetric_half_length(op)?;
    let mut verdict = SuitabilityVerdict {
        n,
        z: [z.re.to_f64_lossy(), z.im.to_f64_lossy()],
        gamma: params.gamma,
        big_gamma: params.big_gamma,
        p: params.p,
        suitable: false,
        norm_ok: false,
        decay_ok: false,
        margin: f64::NEG_INFINITY,
        worst_pair: None,
        inverse_norm: f64::INFINITY,
    };
    let lu = match op.pencil(z).factor() {
        Ok(lu) => lu,
        Err(Error::NearSpectrum { .. }) => return Ok(verdict),
        Err(e) => return Err(e),
    };
    classify_with_lu(&lu, n, params, &mut verdict);
    Ok(verdict)
}

fn classify_with_lu<T: Real>(lu: &TridiagonalLu<T>, n: i64, params: &SuitabilityParams, v: &mut SuitabilityVerdict) {
    let est = lu.inverse_norm_two(T::of(NORM_REL_TOL), NORM_MAX_ITER);
    let inv_norm = est.value.to_f64_lossy();
    v.inverse_norm = inv_norm;
    let norm_slack = params.log_norm_budget() - inv_norm.ln();
    v.norm_ok = norm_slack >= 0.0;

    let g = lu.inverse();
    let size = g.rows();
    let mut decay_slack = f64::INFINITY;
    let mut worst = None;
    // pairs with 2|k − l| >= N, sites k = i − N
    for i in 0..size {
        for j in 0..size {
            let d = (i as i64 - j as i64).abs();
            if 2 * d < n {
                continue;
            }
            let s = params.log_decay_budget(d) - g[(i, j)].norm().to_f64_lossy().ln();
            if s < decay_slack {
                decay_slack = s;
                worst = Some((i as i64 - n, j as i64 - n));
            }
        }
    }
    v.decay_ok = decay_slack >= 0.0;
    v.worst_pair = if v.decay_ok { None } else { worst };
    v.margin = norm_slack.min(decay_slack);
    v.suitable = v.norm_ok && v.decay_ok;
}

/// Admissible perturbation size for the dyadic-level-drop lemma.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationRadius {
    pub radius: f64,
    pub exponent: f64,
    /// Radius >= 1: the hypothesis carries no information.
    pub degenerate: bool,
}

/// `e^{−(2Γ + γ len)}`; accepts zero parameters and flags the degenerate case.
pub fn perturb_suitability_margin(gamma: f64, big_gamma: f64, interval_len: i64) -> PerturbationRadius {
    let exponent = 2.0 * big_gamma + gamma * interval_len as f64;
    let radius = (-exponent).exp();
    PerturbationRadius {
        radius,
        exponent,
        degenerate: radius >= 1.0,
    }
}

/// One perturbation trial.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationTrial {
    pub radius: f64,
    pub base: SuitabilityVerdict,
    /// Verdict at level `p − 1` for the perturbed data, if the base was suitable.
    pub perturbed: Option<SuitabilityVerdict>,
}

impl PerturbationTrial {
    /// `None` when the base interval was unsuitable (trial not applicable).
    pub fn preserved(&self) -> Option<bool> {
        self.perturbed.as_ref().map(|v| v.suitable)
    }
}

fn random_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex<f64> {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex::from_polar(r, rng.gen::<f64>() * std::f64::consts::TAU)
}

/// Perturbs every `α_n` on the window and `z` by at most the admissible
/// radius and reclassifies at `p − 1`.
pub fn perturbation_trial<R: Rng + ?Sized>(
    op: &FiniteCmv<f64>,
    z: Complex<f64>,
    params: &SuitabilityParams,
    rng: &mut R,
) -> Result<PerturbationTrial> {
    let base = suitability_classify(op, z, params)?;
    let radius = params.perturbation_radius(op.b() - op.a()).radius;
    if !base.suitable {
        return Ok(PerturbationTrial {
            radius,
            base,
            perturbed: None,
        });
    }
    let (a, b) = (op.a(), op.b());
    let path = op.path().map_alphas(|n, al| {
        if n < a || n > b {
            return al;
        }
        let cand = al + random_in_disk(rng, radius);
        if cand.norm() < 1.0 {
            cand
        } else {
            al
        }
    })?;
    let z_hat = z + random_in_disk(rng, radius);
    let perturbed = suitability_classify(&op.with_path(path)?, z_hat, &params.relaxed())?;
    Ok(PerturbationTrial {
        radius,
        base,
        perturbed: Some(perturbed),
    })
}

/// Outcome of the restriction (geometric resolvent) check.
#[derive(Clone, Debug, Serialize)]
pub struct RestrictionReport {
    /// `max |A⁻¹ − K⁻¹ − A⁻¹ Γ K⁻¹|` relative to `max|A⁻¹| + max|K⁻¹|`.
    pub relative_residual: f64,
    /// Largest `|K⁻¹(k, l)|` with exactly one of `k, l` in `[c, d]`.
    pub cross_block_max: f64,
    /// Smallest constant `C` with `|G_A(k,l)| <= C sup_m |G_B(k,m)| sup_n |G_A(n,l)|`
    /// over `k ∈ [c,d]`, `l ∉ [c,d]`, `m ∈ {c,d}`, `n ∈ {c−1,c,d,d+1}`.
    pub empirical_constant: f64,
    /// `4 max |Γ|`, the constant the triangle inequality guarantees.
    pub analytic_constant: f64,
}

/// Checks `A⁻¹ − K⁻¹ = A⁻¹ Γ K⁻¹` for `K = A₁ ⊕ B`, where `B` is the
/// pencil of the restriction to `[c, d]` and `A₁` the pencils of the
/// complementary pieces, all with the boundary phases of `op`, and
/// `Γ = K − A`.
pub fn restriction_identity_check(op: &FiniteCmv<f64>, c: i64, d: i64, z: Complex<f64>) -> Result<RestrictionReport> {
    let (a, b) = (op.a(), op.b());
    if c < a || d > b || c > d {
        return Err(Error::contract(format!("[{c}, {d}] not inside [{a}, {b}]")));
    }
    let n = op.len();
    let a_tri = op.tridiagonal_a(z);
    let a_inv = a_tri.factor()?.inverse();
    let a_dense = a_tri.to_dense();

    let mut k_dense = CMatrix::zeros(n, n);
    for (lo, hi) in [(a, c - 1), (c, d), (d + 1, b)] {
        if lo > hi {
            continue;
        }
        let blk = op.window(lo, hi)?.tridiagonal_a(z).to_dense();
        let off = (lo - a) as usize;
        for i in 0..blk.rows() {
            for j in 0..blk.cols() {
                k_dense[(off + i, off + j)] = blk[(i, j)];
            }
        }
    }
    let k_inv = k_dense.inverse()?;
    let gamma = k_dense.sub(&a_dense);
    let lhs = a_inv.sub(&k_inv);
    let rhs = a_inv.matmul(&gamma).matmul(&k_inv);
    let relative_residual = lhs.sub(&rhs).max_abs() / (a_inv.max_abs() + k_inv.max_abs());

    let inner = |s: i64| s >= c && s <= d;
    let idx = |s: i64| (s - a) as usize;
    let mut cross_block_max: f64 = 0.0;
    for k in a..=b {
        for l in a..=b {
            if inner(k) != inner(l) {
                cross_block_max = cross_block_max.max(k_inv[(idx(k), idx(l))].norm());
            }
        }
    }

    let mut empirical_constant: f64 = 0.0;
    let edge_n: Vec<i64> = [c - 1, c, d, d + 1].into_iter().filter(|&s| s >= a && s <= b).collect();
    for k in c..=d {
        let sup_b = [c, d]
            .iter()
            .map(|&m| k_inv[(idx(k), idx(m))].norm())
            .fold(0.0, f64::max);
        for l in (a..=b).filter(|&l| !inner(l)) {
            let sup_a = edge_n
                .iter()
                .map(|&s| a_inv[(idx(s), idx(l))].norm())
                .fold(0.0, f64::max);
            let denom = sup_b * sup_a;
            let lhs = a_inv[(idx(k), idx(l))].norm();
            if denom > 0.0 {
                empirical_constant = empirical_constant.max(lhs / denom);
            }
        }
    }
    Ok(RestrictionReport {
        relative_residual,
        cross_block_max,
        empirical_constant,
        analytic_constant: 4.0 * gamma.max_abs(),
    })
}

/// Phase-matched boundary phase `α/|α|`, or 1 for `α = 0`.
pub fn phase_matched(alpha: Complex<f64>) -> Complex<f64> {
    let m = alpha.norm();
    if m > 0.0 {
        alpha / m
    } else {
        Complex::new(1.0, 0.0)
    }
}

/// Outcome of the solution-bound check on an inner window.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionBoundReport {
    pub a: i64,
    pub b: i64,
    /// `max_n |ψ(n)| / RHS(n)` over `a < n < b`; 0 when `ψ` vanishes.
    pub max_ratio: f64,
    pub sites_checked: usize,
}

/// Checks `|ψ(n)| <= 2|G(z;n,a)| sup_{a−1,a}|ψ| + 2|G(z;n,b)| sup_{b,b+1}|ψ|`
/// for `a < n < b`, where `ψ` (indexed by the sites of `big`) solves
/// `Eψ = zψ` for the larger operator `big` and the inner window uses the
/// phase-matched boundary phases `α_{a−1}/|α_{a−1}|`, `α_b/|α_b|`.
pub fn solution_bound_check(
    big: &FiniteCmv<f64>,
    psi: &[Complex<f64>],
    z: Complex<f64>,
    a: i64,
    b: i64,
) -> Result<SolutionBoundReport> {
    if psi.len() != big.len() {
        return Err(Error::contract("ψ must live on the sites of the large operator"));
    }
    if a - 1 < big.a() || b + 1 > big.b() || b - a < 2 {
        return Err(Error::contract(format!(
            "inner window [{a}, {b}] needs a − 1, b + 1 inside [{}, {}] and at least one interior site",
            big.a(),
            big.b()
        )));
    }
    let at = |s: i64| psi[(s - big.a()) as usize];
    let beta = phase_matched(big.path().alpha(a - 1));
    let beta_t = phase_matched(big.path().alpha(b));
    let inner = big.window(a, b)?.with_boundary(beta, beta_t)?;
    let lu = inner.tridiagonal_a(z).factor()?;
    let col_a = lu.inverse_column(0);
    let col_b = lu.inverse_column(inner.len() - 1);
    let sup_a = at(a - 1).norm().max(at(a).norm());
    let sup_b = at(b).norm().max(at(b + 1).norm());
    let mut max_ratio: f64 = 0.0;
    for n in a + 1..b {
        let i = (n - a) as usize;
        let rhs = 2.0 * col_a[i].norm() * sup_a + 2.0 * col_b[i].norm() * sup_b;
        let lhs = at(n).norm();
        if lhs == 0.0 {
            continue;
        }
        max_ratio = max_ratio.max(lhs / rhs);
    }
    Ok(SolutionBoundReport {
        a,
        b,
        max_ratio,
        sites_checked: (b - a - 1) as usize,
    })
}

/// Normalized eigenvector of `E` at the eigenvalue `z`, by inverse iteration
/// on the pencil at `z e^{iε}`. Fails with `NotApplicable` unless
/// `‖Eψ − zψ‖ <= tol`.
pub fn cmv_eigenvector(op: &FiniteCmv<f64>, z: Complex<f64>, tol: f64) -> Result<Vec<Complex<f64>>> {
    let shifted = z * Complex::from_polar(1.0, 1e-6);
    let lu = op.tridiagonal_a(shifted).factor()?;
    let n = op.len();
    let mut v: Vec<Complex<f64>> = (0..n)
        .map(|i| Complex::new(1.0, ((i * 7919) % 13) as f64 / 13.0))
        .collect();
    normalize(&mut v);
    let l_star = op.l_dense().adjoint();
    for _ in 0..6 {
        // A(z) = L*(z − E): solve (z − E) w = v through A w = L* v
        let mut w = l_star.matvec(&v);
        lu.solve_in_place(&mut w);
        normalize(&mut w);
        v = w;
    }
    let ev = op.e_dense().matvec(&v);
    let resid = norm2(&ev.iter().zip(&v).map(|(e, x)| e - z * x).collect::<Vec<_>>());
    if !(resid <= tol) {
        return Err(Error::NotApplicable(format!("no eigenvector at z: residual {resid:e}")));
    }
    Ok(v)
}

/// Largest `|G(z; k, l)|` against `1/dist(z, σ(E))` for one operator and `z`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralDistanceReport {
    pub max_green: f64,
    pub bound: f64,
    pub distance: f64,
}

/// `|G(z;k,l)| <= 1/dist(z, σ(E))` over all entries.
pub fn spectral_distance_check(
    op: &FiniteCmv<f64>,
    spectrum: &[Complex<f64>],
    z: Complex<f64>,
) -> Result<SpectralDistanceReport> {
    let distance = spectrum.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min);
    let g = op.tridiagonal_a(z).factor()?.inverse();
    Ok(SpectralDistanceReport {
        max_green: g.max_abs(),
        bound: 1.0 / distance,
        distance,
    })
}

/// Eigenvalues of the dense `E`.
pub fn cmv_spectrum(op: &FiniteCmv<f64>) -> Result<Vec<Complex<f64>>> {
    eigenvalues(&op.e_dense())
}

/// Best boundary pair on the `8 × 8` phase grid `e^{2πi j/8}`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundarySweep {
    pub beta: [f64; 2],
    pub beta_tilde: [f64; 2],
    pub verdict: SuitabilityVerdict,
    /// Always true: the grid is a heuristic, not a selection rule.
    pub heuristic: bool,
}

/// Sweeps the `8 × 8` boundary grid and keeps the largest margin.
pub fn boundary_phase_sweep(op: &FiniteCmv<f64>, z: Complex<f64>, params: &SuitabilityParams) -> Result<BoundarySweep> {
    let phase = |j: usize| Complex::from_polar(1.0, std::f64::consts::TAU * j as f64 / 8.0);
    let mut best: Option<BoundarySweep> = None;
    for i in 0..8 {
        for j in 0..8 {
            let (b, bt) = (phase(i), phase(j));
            let v = suitability_classify(&op.with_boundary(b, bt)?, z, params)?;
            if best.as_ref().is_none_or(|s| v.margin > s.verdict.margin) {
                best = Some(BoundarySweep {
                    beta: [b.re, b.im],
                    beta_tilde: [bt.re, bt.im],
                    verdict: v,
                    heuristic: true,
                });
            }
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// Largest `|G(z; k, l)|` over all entries (the max-entry norm of the inverse).
pub fn max_green<T: Real, O: FiniteOperator<T>>(op: &O, z: C<T>) -> Result<T> {
    Ok(op.pencil(z).factor()?.inverse().max_abs())
}

impl<T: Real> GreenEntry<T> {
    pub fn modulus(&self) -> T {
        self.value.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmv::assemble_finite_cmv;
    use crate::linalg::singular_values;
    use crate::sampling::{verblunsky_path, SamplingFunction, VerblunskyPath};
    use crate::torus::{SkewShiftMap, TorusPoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one() -> Complex<f64> {
        Complex::new(1.0, 0.0)
    }

    fn random_path(rng: &mut ChaCha8Rng, a: i64, n: usize) -> VerblunskyPath<f64> {
        let alphas = (0..n).map(|_| random_in_disk(rng, 0.9)).collect();
        VerblunskyPath::from_alphas(a, alphas).unwrap()
    }

    fn skew_cmv(lambda: f64, x: [f64; 2], a: i64, b: i64) -> FiniteCmv<f64> {
        let map = SkewShiftMap::golden(2).unwrap();
        let f = SamplingFunction::canonical(2, Complex::new(lambda, 0.0)).unwrap();
        let p = verblunsky_path(&f, &map, &TorusPoint::new(x.to_vec()).unwrap(), a - 1, b + 1).unwrap();
        FiniteCmv::new(p, a, b, one(), one()).unwrap()
    }

    #[test]
    fn one_by_one_green() {
        // [0,0]: A = z α_0 + β for site 0 even, with α_0 → β̃
        let p = VerblunskyPath::from_alphas(0, vec![Complex::new(0.2, 0.0)]).unwrap();
        let op = assemble_finite_cmv(&p, one(), Complex::new(0.0, 1.0)).unwrap();
        let z = Complex::from_polar(1.0, 0.3);
        let c = z * Complex::new(0.0, 1.0) + one();
        let g = green_entry_cmv(&op, z, 0, 0).unwrap();
        assert!((g.value - 1.0 / c).norm() < 1e-15);
    }

    #[test]
    fn green_matches_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = random_path(&mut rng, 0, 64);
            let op = assemble_finite_cmv(&p, one(), one()).unwrap();
            let z = Complex::from_polar(1.0, rng.gen::<f64>() * 6.3);
            let dense = op.product_form_a(z).inverse().unwrap();
            let k = rng.gen_range(0..64);
            let l = rng.gen_range(0..64);
            let g = green_entry_cmv(&op, z, k, l).unwrap().value;
            worst = worst.max((g - dense[(k as usize, l as usize)]).norm() / (1.0 + g.norm()));
        }
        assert!(worst < 1e-11, "{worst}");
    }

    #[test]
    fn green_is_bounded_by_spectral_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..10 {
            let p = random_path(&mut rng, 0, 24);
            let op = assemble_finite_cmv(&p, one(), Complex::from_polar(1.0, 1.0)).unwrap();
            let spec = cmv_spectrum(&op).unwrap();
            let g_all = |z: Complex<f64>| op.tridiagonal_a(z).factor().map(|lu| lu.inverse());
            for _ in 0..100 {
                let z = Complex::from_polar(rng.gen_range(0.5..1.5), rng.gen::<f64>() * 6.3);
                let dist = spec.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min);
                let Ok(g) = g_all(z) else { continue };
                let k = rng.gen_range(0..24);
                let l = rng.gen_range(0..24);
                assert!(g[(k, l)].norm() <= (1.0 / dist) * (1.0 + 1e-8));
                checked += 1;
            }
        }
        assert!(checked >= 990);
    }

    #[test]
    fn two_norm_and_hilbert_schmidt() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = random_path(&mut rng, 0, 40);
        let op = assemble_finite_cmv(&p, one(), one()).unwrap();
        let z = Complex::from_polar(1.0, 0.77);
        let lu = op.tridiagonal_a(z).factor().unwrap();
        let inv = lu.inverse();
        let sv = singular_values(&inv);
        let est = lu.inverse_norm_two(1e-12, 2000);
        assert!((est.value - sv[0]).abs() < 1e-6 * sv[0]);
        let hs = inv.hs_norm();
        assert!(sv[0] <= hs * (1.0 + 1e-12));
        assert!(hs <= (40f64).sqrt() * sv[0] * (1.0 + 1e-12));
        // ‖A⁻¹‖ = ‖(z − E)⁻¹‖ = 1/dist for unitary E
        let dist = cmv_spectrum(&op)
            .unwrap()
            .iter()
            .map(|e| (e - z).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((sv[0] * dist - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tiny_budget_is_unsuitable() {
        let op = skew_cmv(0.5, [0.1, 0.2], -8, 8);
        let params = SuitabilityParams::new(0.1, 1e-9, 5).unwrap();
        let v = suitability_classify(&op, Complex::from_polar(1.0, 0.3), &params).unwrap();
        assert!(!v.norm_ok && !v.suitable);
        assert!(v.margin < 0.0);
    }

    #[test]
    fn free_schrodinger_outside_spectrum_is_suitable() {
        let n = 20;
        let h = SchrodingerFiniteOp::from_potential(-n, vec![0.0; (2 * n + 1) as usize]).unwrap();
        let z = Complex::new(3.0, 0.0);
        let xi = (1.5f64).acosh();
        // oracle: free resolvent decays like e^{−ξ|k−l|} with prefactor 1/√5
        let g = green_entry(&h, z, 0, 10).unwrap().value.norm();
        assert!((g * (xi * 10.0).exp() - 1.0 / 5f64.sqrt()).abs() < 1e-6);
        let params = SuitabilityParams::new(0.5, 2.0, 1).unwrap();
        let v = suitability_classify(&h, z, &params).unwrap();
        assert!(v.suitable, "{v:?}");
        assert!(v.inverse_norm <= 1.0 + 1e-9);
    }

    #[test]
    fn verdict_is_monotone_in_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = [rng.gen(), rng.gen()];
            let op = skew_cmv(0.5, x, -12, 12);
            let z = Complex::from_polar(1.0, rng.gen::<f64>() * 6.3);
            for p in 1..5 {
                let hi = suitability_classify(&op, z, &SuitabilityParams::new(0.05, 4.0, p).unwrap()).unwrap();
                let lo = suitability_classify(&op, z, &SuitabilityParams::new(0.05, 4.0, p - 1).unwrap()).unwrap();
                if hi.suitable {
                    assert!(lo.suitable);
                }
                assert!(lo.margin >= hi.margin);
            }
        }
    }

    #[test]
    fn classifier_rejects_asymmetric_interval() {
        let op = skew_cmv(0.5, [0.1, 0.2], -3, 5);
        let params = SuitabilityParams::new(0.1, 1.0, 0).unwrap();
        assert!(matches!(
            suitability_classify(&op, one(), &params),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn verdict_json_fields() {
        let op = skew_cmv(0.5, [0.3, 0.6], -6, 6);
        let params = SuitabilityParams::new(0.1, 3.0, 1).unwrap();
        let v = suitability_classify(&op, Complex::from_polar(1.0, 1.0), &params).unwrap();
        let j: serde_json::Value = serde_json::from_str(&v.to_json().unwrap()).unwrap();
        for key in ["N", "z", "gamma", "Gamma", "p", "suitable", "margin", "worst_pair"] {
            assert!(j.get(key).is_some(), "{key}");
        }
        let again = suitability_classify(&op, Complex::from_polar(1.0, 1.0), &params).unwrap();
        assert_eq!(v.to_json().unwrap(), again.to_json().unwrap());
    }

    #[test]
    fn perturbation_radius_examples() {
        let r = perturb_suitability_margin(0.0, 0.0, 50);
        assert_eq!(r.radius, 1.0);
        assert!(r.degenerate);
        let r = perturb_suitability_margin(0.1, 5.0, 100);
        assert!((r.radius - (-20f64).exp()).abs() < 1e-22);
        assert!((r.radius - 2.06e-9).abs() < 1e-11);
        assert!(!r.degenerate);
    }

    #[test]
    fn perturbation_preserves_suitability() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let params = SuitabilityParams::new(0.02, 6.0, 1).unwrap();
        let mut applicable = 0;
        for _ in 0..12 {
            let op = skew_cmv(0.5, [rng.gen(), rng.gen()], -64, 64);
            let t = perturbation_trial(&op, Complex::new(-1.0, 0.0), &params, &mut rng).unwrap();
            if let Some(ok) = t.preserved() {
                applicable += 1;
                assert!(ok, "{t:?}");
            }
        }
        assert!(applicable > 0);
    }

    #[test]
    fn restriction_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let p = random_path(&mut rng, -33, 67);
            let op = FiniteCmv::new(p, -32, 32, one(), one()).unwrap();
            let z = Complex::from_polar(1.0, rng.gen::<f64>() * 6.3);
            let rep = restriction_identity_check(&op, -8, 8, z).unwrap();
            assert!(rep.relative_residual < 1e-9, "{rep:?}");
            assert_eq!(rep.cross_block_max, 0.0);
            assert!(
                rep.empirical_constant <= rep.analytic_constant * (1.0 + 1e-9),
                "{rep:?}"
            );
        }
    }

    #[test]
    fn degenerate_restriction() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let p = random_path(&mut rng, 0, 20);
        let op = assemble_finite_cmv(&p, one(), one()).unwrap();
        let rep = restriction_identity_check(&op, 0, 19, Complex::from_polar(1.0, 0.4)).unwrap();
        assert!(rep.relative_residual < 1e-11);
        assert_eq!(rep.cross_block_max, 0.0);
    }

    #[test]
    fn solution_bound_for_eigenvectors() {
        let op = skew_cmv(0.5, [0.37, 0.81], 0, 63);
        let spec = cmv_spectrum(&op).unwrap();
        for &z in spec.iter().take(6) {
            let psi = cmv_eigenvector(&op, z, 1e-8).unwrap();
            for (a, b) in [(16, 47), (1, 62)] {
                let rep = solution_bound_check(&op, &psi, z, a, b).unwrap();
                assert!(rep.max_ratio <= 1.0 + 1e-6, "{rep:?}");
            }
        }
    }

    #[test]
    fn zero_solution_trivially_bounded() {
        let op = skew_cmv(0.5, [0.37, 0.81], 0, 31);
        let psi = vec![Complex::new(0.0, 0.0); 32];
        let rep = solution_bound_check(&op, &psi, Complex::from_polar(1.0, 0.2), 5, 20).unwrap();
        assert_eq!(rep.max_ratio, 0.0);
    }

    #[test]
    fn eigenvector_off_spectrum_is_not_applicable() {
        let op = skew_cmv(0.5, [0.37, 0.81], 0, 31);
        let spec = cmv_spectrum(&op).unwrap();
        // a point of the circle halfway between two eigenvalues
        let mut args: Vec<f64> = spec.iter().map(|e| e.arg()).collect();
        args.sort_by(f64::total_cmp);
        let mid = 0.5 * (args[0] + args[1]);
        assert!(matches!(
            cmv_eigenvector(&op, Complex::from_polar(1.0, mid), 1e-8),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn sweep_reports_best_margin() {
        let op = skew_cmv(0.5, [0.2, 0.9], -6, 6);
        let params = SuitabilityParams::new(0.1, 3.0, 1).unwrap();
        let z = Complex::from_polar(1.0, 0.5);
        let best = boundary_phase_sweep(&op, z, &params).unwrap();
        let base = suitability_classify(&op, z, &params).unwrap();
        assert!(best.verdict.margin >= base.margin);
        assert!(best.heuristic);
    }
}
