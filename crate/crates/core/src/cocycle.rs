//! Transfer-matrix cocycles and Lyapunov exponents.
//!
//! Schrödinger steps are `[[E − V(n), −1], [1, 0]]`; Szegő steps are
//! `(1/ρ_n) [[z, −ᾱ_n], [−z α_n, 1]]`. Products are renormalized by their
//! Frobenius norm every [`RENORM_PERIOD`] steps and the logs accumulated.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{rho_of, SamplingFunction};
use crate::scalar::{Real, C};
use crate::schrodinger::potential_shape;
use crate::spectral::IdsTable;
use crate::torus::{SkewShiftMap, TorusPoint};

pub const RENORM_PERIOD: usize = 32;

type M2<T> = [[C<T>; 2]; 2];

#[inline]
fn mul2<T: Real>(a: &M2<T>, b: &M2<T>) -> M2<T> {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[inline]
fn frobenius<T: Real>(a: &M2<T>) -> T {
    (a[0][0].norm_sqr() + a[0][1].norm_sqr() + a[1][0].norm_sqr() + a[1][1].norm_sqr()).sqrt()
}

fn identity2<T: Real>() -> M2<T> {
    [[C::one(), C::zero()], [C::zero(), C::one()]]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum StepKind<T> {
    Schrodinger { energy: T },
    Szego { z: C<T> },
}

/// One transfer matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferStep<T> {
    pub kind: StepKind<T>,
    pub matrix: M2<T>,
}

impl<T: Real> TransferStep<T> {
    pub fn det(&self) -> C<T> {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// `[[E − V, −1], [1, 0]]`.
pub fn schrodinger_step<T: Real>(energy: T, v: T) -> TransferStep<T> {
    let re = |x: T| C::new(x, T::zero());
    TransferStep {
        kind: StepKind::Schrodinger { energy },
        matrix: [[re(energy - v), re(-T::one())], [re(T::one()), re(T::zero())]],
    }
}

/// `(1/ρ) [[z, −ᾱ], [−zα, 1]]`; requires `|α| < 1`.
pub fn szego_step<T: Real>(z: C<T>, alpha: C<T>) -> Result<TransferStep<T>> {
    if !(alpha.norm() < T::one()) {
        return Err(Error::Domain(format!("|α| = {} must be < 1", alpha.norm())));
    }
    let inv_rho = T::one() / rho_of(alpha);
    let s = |c: C<T>| c * inv_rho;
    Ok(TransferStep {
        kind: StepKind::Szego { z },
        matrix: [[s(z), s(-alpha.conj())], [s(-(z * alpha)), s(C::one())]],
    })
}

/// Running product `A_{n−1} ⋯ A_0` with separated log scale:
/// the true product is `e^{log_scale} · matrix`.
#[derive(Clone, Copy, Debug)]
pub struct RenormalizedProduct<T> {
    pub matrix: M2<T>,
    pub log_scale: T,
    /// Running `Σ log |det A_k|`; the normalized matrix loses its determinant
    /// to underflow once the product grows.
    pub log_det: T,
    pub steps: usize,
    pub renorm_count: usize,
}

impl<T: Real> Default for RenormalizedProduct<T> {
    fn default() -> Self {
        Self {
            matrix: identity2(),
            log_scale: T::zero(),
            log_det: T::zero(),
            steps: 0,
            renorm_count: 0,
        }
    }
}

impl<T: Real> RenormalizedProduct<T> {
    #[inline]
    pub fn push(&mut self, step: &M2<T>) {
        self.matrix = mul2(step, &self.matrix);
        self.log_det += (step[0][0] * step[1][1] - step[0][1] * step[1][0]).norm().ln();
        self.steps += 1;
        if self.steps.is_multiple_of(RENORM_PERIOD) {
            self.renormalize();
        }
    }

    fn renormalize(&mut self) {
        let n = frobenius(&self.matrix);
        if n > T::zero() && n.is_finite() {
            for row in self.matrix.iter_mut() {
                for v in row.iter_mut() {
                    *v /= n;
                }
            }
            self.log_scale += n.ln();
            self.renorm_count += 1;
        }
    }

    /// `log ‖A_{n−1} ⋯ A_0‖_F`.
    pub fn log_norm(&self) -> T {
        self.log_scale + frobenius(&self.matrix).ln()
    }

    /// `log |det|` of the true product.
    pub fn log_abs_det(&self) -> T {
        self.log_det
    }

    /// `log |det|` read off the stored matrix; only meaningful while the
    /// product has not become numerically rank one.
    pub fn log_abs_det_direct(&self) -> T {
        let m = &self.matrix;
        let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        d.norm().ln() + T::of(2.0) * self.log_scale
    }
}

/// Which cocycle to iterate along the skew-shift.
#[derive(Clone, Debug)]
pub enum CocycleSpec<T> {
    /// Szegő cocycle of `α_n = f(T^n x)` at `z`.
    Szego {
        f: SamplingFunction<T>,
        map: SkewShiftMap<T>,
        z: C<T>,
    },
    /// Schrödinger cocycle of `V(n) = g f(T^n x)` at energy `E`; `g = 0` is
    /// the free Laplacian.
    Schrodinger { g: T, map: SkewShiftMap<T>, energy: T },
}

impl<T: Real> CocycleSpec<T> {
    fn map(&self) -> &SkewShiftMap<T> {
        match self {
            CocycleSpec::Szego { map, .. } | CocycleSpec::Schrodinger { map, .. } => map,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CocycleSpec::Szego { f, map, z } => {
                if f.r() != map.r() {
                    return Err(Error::contract("sampling function and map dimensions differ"));
                }
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::contract("non-finite z"));
                }
            }
            CocycleSpec::Schrodinger { g, map, energy } => {
                if !(g.is_finite() && *g >= T::zero()) || !energy.is_finite() {
                    return Err(Error::contract("g must be finite and >= 0, E finite"));
                }
                if map.r() < 2 {
                    return Err(Error::contract("the potential needs r >= 2"));
                }
            }
        }
        Ok(())
    }

    /// Renormalized product `A_{N−1} ⋯ A_0` along the orbit of `x`.
    pub fn orbit_growth(&self, x: &TorusPoint<T>, steps: usize) -> Result<RenormalizedProduct<T>> {
        let mut orbit = self.map().orbit(x, 0)?;
        let mut prod = RenormalizedProduct::default();
        match self {
            CocycleSpec::Szego { f, z, .. } => {
                for n in 0..steps {
                    let al = f.eval(orbit.peek());
                    if !(al.norm() < T::one()) {
                        return Err(Error::GeneratorInvalid {
                            n: n as i64,
                            modulus: al.norm().to_f64_lossy(),
                        });
                    }
                    prod.push(&szego_step(*z, al)?.matrix);
                    orbit.advance();
                }
            }
            CocycleSpec::Schrodinger { g, energy, .. } => {
                for _ in 0..steps {
                    let v = *g * potential_shape(orbit.peek());
                    prod.push(&schrodinger_step(*energy, v).matrix);
                    orbit.advance();
                }
            }
        }
        Ok(prod)
    }
}

/// How base points are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleMode<T> {
    /// Independent uniform points, one RNG stream per sample.
    Uniform,
    /// Consecutive length-`N` segments of the orbit of one point.
    Orbit(TorusPoint<T>),
}

#[derive(Clone, Debug)]
pub struct LyapunovConfig<T> {
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub mode: SampleMode<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub steps: usize,
    pub samples: usize,
    pub std_error: f64,
    pub renorm_count: usize,
    pub per_sample: Vec<f64>,
}

/// Uniform point of `T^r` from stream `index` of `seed`.
pub fn uniform_point<T: Real>(r: usize, seed: u64, index: u64) -> TorusPoint<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let coords = (0..r).map(|_| T::of(rng.gen::<f64>())).collect();
    TorusPoint::new(coords).expect("uniform draws lie in [0, 1)")
}

/// Averages `(1/N) log ‖A_N ⋯ A_1‖` over `M` base points, in parallel with
/// an order-preserving reduction.
pub fn lyapunov_estimate<T: Real>(spec: &CocycleSpec<T>, cfg: &LyapunovConfig<T>) -> Result<LyapunovEstimate> {
    spec.validate()?;
    if cfg.steps < 1000 || cfg.samples < 1 {
        return Err(Error::contract("need N >= 1000 steps and M >= 1 samples"));
    }
    let r = spec.map().r();
    let starts: Vec<TorusPoint<T>> = match &cfg.mode {
        SampleMode::Uniform => (0..cfg.samples as u64).map(|i| uniform_point(r, cfg.seed, i)).collect(),
        SampleMode::Orbit(x) => {
            let mut pts = Vec::with_capacity(cfg.samples);
            for i in 0..cfg.samples {
                pts.push(spec.map().orbit_coordinate(x, (i * cfg.steps) as i64)?);
            }
            pts
        }
    };
    let runs: Vec<RenormalizedProduct<T>> = starts
        .par_iter()
        .map(|x| spec.orbit_growth(x, cfg.steps))
        .collect::<Result<Vec<_>>>()?;
    let per_sample: Vec<f64> = runs
        .iter()
        .map(|p| p.log_norm().to_f64_lossy() / cfg.steps as f64)
        .collect();
    if per_sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite growth rate".into()));
    }
    let value = crate::stats::mean(&per_sample);
    let std_error = crate::stats::std_dev(&per_sample) / (cfg.samples as f64).sqrt();
    Ok(LyapunovEstimate {
        value,
        steps: cfg.steps,
        samples: cfg.samples,
        std_error,
        renorm_count: runs.iter().map(|p| p.renorm_count).sum(),
        per_sample,
    })
}

/// `−½ log(1 − |λ|²)`.
pub fn szego_exponent_closed_form(lambda: f64) -> f64 {
    -0.5 * (1.0 - lambda * lambda).ln()
}

/// `½ log(1 + g²)`.
pub fn schrodinger_zero_energy_closed_form(g: f64) -> f64 {
    0.5 * (1.0 + g * g).ln()
}

/// Free-chain exponent `arccosh(|E|/2)` for `|E| >= 2`, else 0.
pub fn free_exponent(energy: f64) -> f64 {
    if energy.abs() <= 2.0 {
        0.0
    } else {
        (energy.abs() / 2.0).acosh()
    }
}

/// `F(u) = u log|u| − u`, an antiderivative of `log|u|`.
fn log_antiderivative(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.abs().ln() - u
    }
}

/// Mean of `log|u|` over `[lo, hi]`.
fn mean_log_abs(lo: f64, hi: f64) -> f64 {
    (log_antiderivative(hi) - log_antiderivative(lo)) / (hi - lo)
}

/// `∫ log|E − t| dk(t)` from a tabulated IDS.
///
/// Each bin's mass `k_{i+1} − k_i` sits at the bin midpoint, except in the
/// bin containing `E` and its two neighbours, where the mass is spread
/// uniformly and `log|E − t|` is averaged exactly.
pub fn thouless_l(ids: &IdsTable, energy: f64) -> Result<f64> {
    let e = &ids.energies;
    let (lo, hi) = (e[0], e[e.len() - 1]);
    if !(energy >= lo && energy <= hi) {
        return Err(Error::Extrapolation { energy, lo, hi });
    }
    let home = match e.partition_point(|&t| t <= energy) {
        0 => 0,
        p => (p - 1).min(e.len() - 2),
    };
    let mut total = 0.0;
    for i in 0..e.len() - 1 {
        let mass = ids.k[i + 1] - ids.k[i];
        if mass == 0.0 {
            continue;
        }
        let near = (i as i64 - home as i64).abs() <= 1;
        let contrib = if near {
            mean_log_abs(e[i] - energy, e[i + 1] - energy)
        } else {
            (0.5 * (e[i] + e[i + 1]) - energy).abs().ln()
        };
        total += mass * contrib;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn close(a: &M2<f64>, b: &M2<f64>) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() < 1e-15))
    }

    #[test]
    fn step_examples() {
        let s = schrodinger_step(0.0, 0.0);
        let c = |x: f64| Complex::new(x, 0.0);
        assert!(close(&s.matrix, &[[c(0.0), c(-1.0)], [c(1.0), c(0.0)]]));
        assert_eq!(s.det(), c(1.0));

        let s = szego_step(c(1.0), c(0.0)).unwrap();
        assert!(close(&s.matrix, &identity2()));

        let s = szego_step(c(1.0), c(0.5)).unwrap();
        let k = 1.0 / 0.75f64.sqrt();
        assert!(close(&s.matrix, &[[c(k), c(-0.5 * k)], [c(-0.5 * k), c(k)]]));
        assert!(szego_step(c(1.0), c(1.0)).is_err());
    }

    #[test]
    fn szego_determinant_is_z() {
        let z = Complex::from_polar(1.0, 0.9);
        let s = szego_step(z, Complex::new(0.3, -0.4)).unwrap();
        assert!((s.det() - z).norm() < 1e-15);
    }

    #[test]
    fn schrodinger_product_keeps_unit_determinant() {
        let spec = CocycleSpec::Schrodinger {
            g: 1.0,
            map: SkewShiftMap::golden(2).unwrap(),
            energy: 0.3,
        };
        let x = TorusPoint::new(vec![0.2, 0.7]).unwrap();
        let p = spec.orbit_growth(&x, 10_000).unwrap();
        assert!(f64::abs(p.log_abs_det()) < 1e-10, "{}", p.log_abs_det());
        let short = spec.orbit_growth(&x, 64).unwrap();
        // cancellation in a·d − b·c costs about ε‖M‖² relative to det = 1
        let tol = 64.0 * f64::EPSILON * (2.0 * short.log_norm()).exp();
        assert!(
            f64::abs(short.log_abs_det_direct()) < tol,
            "{}",
            short.log_abs_det_direct()
        );
        assert!(p.renorm_count > 0);
    }

    #[test]
    fn free_band_center_has_zero_exponent() {
        let spec = CocycleSpec::Schrodinger {
            g: 0.0,
            map: SkewShiftMap::golden(2).unwrap(),
            energy: 0.0,
        };
        let cfg = LyapunovConfig {
            steps: 10_000,
            samples: 4,
            seed: 1,
            mode: SampleMode::Uniform,
        };
        let est = lyapunov_estimate(&spec, &cfg).unwrap();
        assert!(est.value < 1e-3);
    }

    #[test]
    fn free_exponent_outside_band() {
        let spec = CocycleSpec::Schrodinger {
            g: 0.0,
            map: SkewShiftMap::golden(2).unwrap(),
            energy: 3.0,
        };
        let cfg = LyapunovConfig {
            steps: 10_000,
            samples: 2,
            seed: 1,
            mode: SampleMode::Uniform,
        };
        let est = lyapunov_estimate(&spec, &cfg).unwrap();
        assert!((est.value - free_exponent(3.0)).abs() < 1e-3);
    }

    #[test]
    fn szego_constancy_small() {
        let f = SamplingFunction::canonical(2, Complex::new(0.5, 0.0)).unwrap();
        let target = szego_exponent_closed_form(0.5);
        assert!((target - 0.143841).abs() < 1e-6);
        for t in [0.0, 0.3] {
            let spec = CocycleSpec::Szego {
                f: f.clone(),
                map: SkewShiftMap::golden(2).unwrap(),
                z: crate::scalar::e(t),
            };
            let cfg = LyapunovConfig {
                steps: 20_000,
                samples: 8,
                seed: 3,
                mode: SampleMode::Uniform,
            };
            let est = lyapunov_estimate(&spec, &cfg).unwrap();
            assert!((est.value - target).abs() < 0.05 * target, "{est:?}");
        }
    }

    #[test]
    fn estimates_are_deterministic_and_orbit_mode_runs() {
        let spec = CocycleSpec::Schrodinger {
            g: 1.0,
            map: SkewShiftMap::golden(2).unwrap(),
            energy: 0.0,
        };
        let cfg = LyapunovConfig {
            steps: 2000,
            samples: 6,
            seed: 9,
            mode: SampleMode::Uniform,
        };
        let a = lyapunov_estimate(&spec, &cfg).unwrap();
        let b = lyapunov_estimate(&spec, &cfg).unwrap();
        assert_eq!(a, b);
        let cfg = LyapunovConfig {
            mode: SampleMode::Orbit(TorusPoint::new(vec![0.1, 0.2]).unwrap()),
            ..cfg
        };
        let c = lyapunov_estimate(&spec, &cfg).unwrap();
        assert!(c.value > 0.0);
    }

    #[test]
    fn rejects_short_runs() {
        let spec = CocycleSpec::Schrodinger {
            g: 1.0,
            map: SkewShiftMap::golden(2).unwrap(),
            energy: 0.0,
        };
        let cfg = LyapunovConfig {
            steps: 10,
            samples: 1,
            seed: 0,
            mode: SampleMode::Uniform,
        };
        assert!(lyapunov_estimate(&spec, &cfg).is_err());
    }

    #[test]
    fn point_mass_thouless() {
        // k jumps from 0 to 1 in the bin [0.9, 1.1], midpoint t0 = 1
        let energies: Vec<f64> = (0..=21).map(|i| -3.1 + 0.2 * i as f64).collect();
        let k: Vec<f64> = energies.iter().map(|&t| if t > 1.0 { 1.0 } else { 0.0 }).collect();
        let ids = IdsTable {
            energies,
            k,
            n: 1,
            samples: 1,
        };
        let v = thouless_l(&ids, -2.5).unwrap();
        assert!((v - 3.5f64.ln()).abs() < 1e-12, "{v}");
        assert!(matches!(thouless_l(&ids, 5.0), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn mean_log_matches_quadrature() {
        let (lo, hi) = (-0.3f64, 0.7f64);
        let m = 200_000;
        let h = (hi - lo) / m as f64;
        let q: f64 = (0..m).map(|i| (lo + (i as f64 + 0.5) * h).abs().ln()).sum::<f64>() / m as f64;
        assert!((mean_log_abs(lo, hi) - q).abs() < 1e-4);
    }
}
