//! Census experiments over base points `x ∈ T^r`: how often `[−N, N]` is
//! unsuitable, and how heavy the resolvent-norm tail is.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, N, index)`,
//! so results do not depend on thread count or scheduling.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cmv::FiniteCmv;
use crate::error::{Error, Result};
use crate::green::{boundary_phase_sweep, suitability_classify, FiniteOperator, SuitabilityParams, SuitabilityVerdict};
use crate::sampling::{rho_of, verblunsky_path, SamplingFunction};
use crate::schrodinger::{PotentialSpec, SchrodingerFiniteOp};
use crate::stats::{linear_fit, wilson_interval, LinearFit};
use crate::torus::{SkewShiftMap, TorusPoint, GOLDEN};

/// Operator family sampled by the census.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CensusOperator {
    /// `α_n = λ e(x_r)` along the orbit, pencil at spectral parameter `z`.
    Cmv { lambda: Complex<f64>, z: Complex<f64> },
    /// `V(n) = g f(T^n x)` at energy `E`.
    Schrodinger { g: f64, energy: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub samples: usize,
    /// Half-lengths `N`, strictly increasing.
    pub scales: Vec<i64>,
    pub operator: CensusOperator,
    pub omega: f64,
    pub r: usize,
    /// Fixed `γ`; `None` means `γ = N^{−1/2}`.
    pub gamma: Option<f64>,
    /// `Γ = N^τ`.
    pub tau: f64,
    pub p: u32,
    pub beta: Complex<f64>,
    pub beta_tilde: Complex<f64>,
    /// Keep the best of the `8 × 8` boundary-phase grid instead of `β, β̃`.
    pub sweep: bool,
}

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_P: u32 = 3;

impl ExperimentConfig {
    /// Golden `ω`, `r = 2`, `γ = N^{−1/2}`, `τ = 1/2`, `p = 3`, `β = β̃ = 1`.
    pub fn new(operator: CensusOperator, scales: Vec<i64>, samples: usize, seed: u64) -> Self {
        Self {
            seed,
            samples,
            scales,
            operator,
            omega: GOLDEN,
            r: 2,
            gamma: None,
            tau: DEFAULT_TAU,
            p: DEFAULT_P,
            beta: Complex::new(1.0, 0.0),
            beta_tilde: Complex::new(1.0, 0.0),
            sweep: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::contract("need at least one sample"));
        }
        if self.scales.is_empty() || self.scales[0] < 1 || self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("scales must be >= 1 and strictly increasing"));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::contract(format!("γ = {g} must be > 0")));
            }
        }
        if !self.tau.is_finite() {
            return Err(Error::contract("τ must be finite"));
        }
        match self.operator {
            CensusOperator::Cmv { lambda, .. } => {
                if !(lambda.norm() < 1.0) {
                    return Err(Error::Domain(format!("|λ| = {} must be < 1", lambda.norm())));
                }
            }
            CensusOperator::Schrodinger { g, energy } => {
                if !(g > 0.0) || !energy.is_finite() {
                    return Err(Error::contract("Schrödinger census needs g > 0 and finite E"));
                }
                if self.r < 2 {
                    return Err(Error::contract("the potential needs r >= 2"));
                }
            }
        }
        SkewShiftMap::new(self.r, self.omega)?;
        Ok(())
    }

    pub fn gamma_at(&self, n: i64) -> f64 {
        self.gamma.unwrap_or_else(|| (n as f64).powf(-0.5))
    }

    pub fn params_at(&self, n: i64) -> Result<SuitabilityParams> {
        SuitabilityParams::new(self.gamma_at(n), (n as f64).powf(self.tau), self.p)
    }

    fn map(&self) -> Result<SkewShiftMap<f64>> {
        SkewShiftMap::new(self.r, self.omega)
    }
}

/// Stream `(N, index)` of `seed`.
pub fn substream(seed: u64, n: i64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | index as u64);
    rng
}

fn draw_point<R: Rng>(rng: &mut R, r: usize) -> TorusPoint<f64> {
    TorusPoint::new((0..r).map(|_| rng.gen::<f64>()).collect()).expect("uniform draws lie in [0, 1)")
}

/// The census operator at base point `x`, restricted to `[a, b]`.
enum Window {
    Cmv(FiniteCmv<f64>),
    Schrodinger(SchrodingerFiniteOp<f64>),
}

fn build_window(
    cfg: &ExperimentConfig,
    map: &SkewShiftMap<f64>,
    x: &TorusPoint<f64>,
    a: i64,
    b: i64,
) -> Result<Window> {
    match cfg.operator {
        CensusOperator::Cmv { lambda, .. } => {
            let f = SamplingFunction::canonical(cfg.r, lambda)?;
            let path = verblunsky_path(&f, map, x, a - 1, b)?;
            Ok(Window::Cmv(FiniteCmv::new(path, a, b, cfg.beta, cfg.beta_tilde)?))
        }
        CensusOperator::Schrodinger { g, .. } => {
            let spec = PotentialSpec::new(g, *map, x.clone())?;
            Ok(Window::Schrodinger(SchrodingerFiniteOp::new(&spec, a, b)?))
        }
    }
}

fn spectral_point(op: &CensusOperator) -> Complex<f64> {
    match *op {
        CensusOperator::Cmv { z, .. } => z,
        CensusOperator::Schrodinger { energy, .. } => Complex::new(energy, 0.0),
    }
}

/// One audited classification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleVerdict {
    #[serde(rename = "N")]
    pub n: i64,
    pub index: usize,
    pub x: Vec<f64>,
    pub suitable: bool,
    pub norm_ok: bool,
    pub decay_ok: bool,
    pub margin: f64,
    pub inverse_norm: f64,
}

impl SampleVerdict {
    pub const CSV_HEADER: [&'static str; 8] = [
        "N",
        "index",
        "x",
        "suitable",
        "norm_ok",
        "decay_ok",
        "margin",
        "inverse_norm",
    ];
}

fn classify_at(
    cfg: &ExperimentConfig,
    map: &SkewShiftMap<f64>,
    params: &SuitabilityParams,
    n: i64,
    x: &TorusPoint<f64>,
) -> Result<SuitabilityVerdict> {
    let z = spectral_point(&cfg.operator);
    match build_window(cfg, map, x, -n, n)? {
        Window::Cmv(op) if cfg.sweep => Ok(boundary_phase_sweep(&op, z, params)?.verdict),
        Window::Cmv(op) => suitability_classify(&op, z, params),
        Window::Schrodinger(op) => suitability_classify(&op, z, params),
    }
}

/// Per-sample verdicts at one scale, in index order.
pub fn classify_samples(cfg: &ExperimentConfig, n: i64) -> Result<Vec<SampleVerdict>> {
    cfg.validate()?;
    let map = cfg.map()?;
    let params = cfg.params_at(n)?;
    (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let x = draw_point(&mut substream(cfg.seed, n, i), cfg.r);
            let v = classify_at(cfg, &map, &params, n, &x)?;
            Ok(SampleVerdict {
                n,
                index: i,
                x: x.coords().to_vec(),
                suitable: v.suitable,
                norm_ok: v.norm_ok,
                decay_ok: v.decay_ok,
                margin: v.margin,
                inverse_norm: v.inverse_norm,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleEstimate {
    #[serde(rename = "N")]
    pub n: i64,
    pub gamma: f64,
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    pub p: u32,
    pub samples: usize,
    pub unsuitable: usize,
    pub norm_failures: usize,
    pub decay_failures: usize,
    pub fraction: f64,
    /// 95% Wilson interval.
    pub ci: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnsuitableMeasureReport {
    pub config: ExperimentConfig,
    pub estimates: Vec<ScaleEstimate>,
    /// `p̂_N` nonincreasing in `N`.
    pub nonincreasing: bool,
}

pub fn summarize(cfg: &ExperimentConfig, n: i64, verdicts: &[SampleVerdict]) -> Result<ScaleEstimate> {
    let params = cfg.params_at(n)?;
    let bad = verdicts.iter().filter(|v| !v.suitable).count();
    let (lo, hi) = wilson_interval(bad as u64, verdicts.len() as u64);
    Ok(ScaleEstimate {
        n,
        gamma: params.gamma,
        big_gamma: params.big_gamma,
        p: params.p,
        samples: verdicts.len(),
        unsuitable: bad,
        norm_failures: verdicts.iter().filter(|v| !v.norm_ok).count(),
        decay_failures: verdicts.iter().filter(|v| !v.decay_ok).count(),
        fraction: bad as f64 / verdicts.len() as f64,
        ci: [lo, hi],
    })
}

/// Unsuitable fraction at every scale, plus the raw verdicts for auditing.
pub fn measure_unsuitable_detailed(cfg: &ExperimentConfig) -> Result<(UnsuitableMeasureReport, Vec<SampleVerdict>)> {
    cfg.validate()?;
    let mut estimates = Vec::with_capacity(cfg.scales.len());
    let mut all = Vec::new();
    for &n in &cfg.scales {
        let v = classify_samples(cfg, n)?;
        estimates.push(summarize(cfg, n, &v)?);
        all.extend(v);
    }
    let nonincreasing = estimates.windows(2).all(|w| w[1].fraction <= w[0].fraction);
    Ok((
        UnsuitableMeasureReport {
            config: cfg.clone(),
            estimates,
            nonincreasing,
        },
        all,
    ))
}

pub fn measure_unsuitable(cfg: &ExperimentConfig) -> Result<UnsuitableMeasureReport> {
    measure_unsuitable_detailed(cfg).map(|(r, _)| r)
}

/// Verdict pairs from classifying `H_{g; T^{-1}x}` directly and the
/// Schrödinger operator recovered from the CMV window of `x` (at `z = −1`,
/// `E = 0`). Returns `(direct, reduced)` per sample.
pub fn route_comparison(cfg: &ExperimentConfig, n: i64) -> Result<Vec<(SuitabilityVerdict, SuitabilityVerdict)>> {
    cfg.validate()?;
    let lambda = match cfg.operator {
        CensusOperator::Cmv { lambda, .. } if lambda.im == 0.0 && lambda.re > 0.0 => lambda.re,
        _ => return Err(Error::contract("route comparison needs a CMV census with real λ > 0")),
    };
    let map = cfg.map()?;
    let params = cfg.params_at(n)?;
    let g = lambda / rho_of(Complex::new(lambda, 0.0));
    let zero = Complex::new(0.0, 0.0);
    (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let x = draw_point(&mut substream(cfg.seed, n, i), cfg.r);
            let Window::Cmv(op) = build_window(cfg, &map, &x, -n, n)? else {
                unreachable!("CMV census builds CMV windows")
            };
            let reduced = op.schrodinger_reduction()?.h;
            let spec = PotentialSpec::new(g, map, map.step_inverse(&x)?)?;
            let direct = SchrodingerFiniteOp::new(&spec, -n, n)?;
            Ok((
                suitability_classify(&direct, zero, &params)?,
                suitability_classify(&reduced, zero, &params)?,
            ))
        })
        .collect()
}

/// `P(‖(pencil)^{-1}‖ > B)` against `B`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WegnerCurve {
    #[serde(rename = "N")]
    pub n: i64,
    pub b_grid: Vec<f64>,
    /// Full window `[−N, N]`, one norm per sample.
    pub full: Vec<f64>,
    /// 16 random subwindows per sample.
    pub sub: Vec<f64>,
    pub full_fit: Option<LinearFit>,
    pub sub_fit: Option<LinearFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WegnerReport {
    pub config: ExperimentConfig,
    pub curves: Vec<WegnerCurve>,
}

pub const SUBWINDOWS: usize = 16;
/// Tail points enter the power fit once `P ≤ 1/2` with at least this many
/// exceedances.
pub const TAIL_MIN_COUNT: usize = 5;

fn inverse_norm<O: FiniteOperator<f64>>(op: &O, z: Complex<f64>) -> Result<f64> {
    match op.pencil(z).factor() {
        Ok(lu) => Ok(lu.inverse_norm_two(1e-8, 500).value),
        Err(Error::NearSpectrum { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

fn window_norm(w: &Window, z: Complex<f64>) -> Result<f64> {
    match w {
        Window::Cmv(op) => inverse_norm(op, z),
        Window::Schrodinger(op) => inverse_norm(op, z),
    }
}

fn exceedance(norms: &[f64], b_grid: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let counts: Vec<usize> = b_grid
        .iter()
        .map(|&b| norms.iter().filter(|&&v| v > b).count())
        .collect();
    let probs = counts.iter().map(|&c| c as f64 / norms.len() as f64).collect();
    (probs, counts)
}

/// Least-squares slope of `log P` against `log B` over the tail.
pub fn tail_fit(b_grid: &[f64], probs: &[f64], counts: &[usize]) -> Option<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = b_grid
        .iter()
        .zip(probs)
        .zip(counts)
        .filter(|((_, &p), &c)| p <= 0.5 && c >= TAIL_MIN_COUNT)
        .map(|((&b, &p), _)| (b.ln(), p.ln()))
        .unzip();
    (xs.len() >= 2).then(|| linear_fit(&xs, &ys))
}

pub fn wegner_tail_estimate(cfg: &ExperimentConfig, b_grid: &[f64]) -> Result<WegnerReport> {
    cfg.validate()?;
    if b_grid.is_empty() || b_grid[0] <= 0.0 || b_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::contract("B grid must be positive and strictly increasing"));
    }
    let map = cfg.map()?;
    let z = spectral_point(&cfg.operator);
    let mut curves = Vec::with_capacity(cfg.scales.len());
    for &n in &cfg.scales {
        let norms: Vec<(f64, Vec<f64>)> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(cfg.seed, n, i);
                let x = draw_point(&mut rng, cfg.r);
                let full = window_norm(&build_window(cfg, &map, &x, -n, n)?, z)?;
                let mut sub = Vec::with_capacity(SUBWINDOWS);
                for _ in 0..SUBWINDOWS {
                    let (k, l) = loop {
                        let (k, l) = (rng.gen_range(-n..=n), rng.gen_range(-n..=n));
                        if k != l {
                            break (k.min(l), k.max(l));
                        }
                    };
                    sub.push(window_norm(&build_window(cfg, &map, &x, k, l)?, z)?);
                }
                Ok((full, sub))
            })
            .collect::<Result<_>>()?;
        let full: Vec<f64> = norms.iter().map(|(f, _)| *f).collect();
        let sub: Vec<f64> = norms.iter().flat_map(|(_, s)| s.iter().copied()).collect();
        let (pf, cf) = exceedance(&full, b_grid);
        let (ps, cs) = exceedance(&sub, b_grid);
        curves.push(WegnerCurve {
            n,
            b_grid: b_grid.to_vec(),
            full_fit: tail_fit(b_grid, &pf, &cf),
            sub_fit: tail_fit(b_grid, &ps, &cs),
            full: pf,
            sub: ps,
        });
    }
    Ok(WegnerReport {
        config: cfg.clone(),
        curves,
    })
}

/// Logarithmically spaced grid `lo, …, hi` with `count` points.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
