//! `verify --suite fast`: quick structural checks, each well under a second.

use num_complex::Complex;
use serde::Serialize;

use skewspec_core::cmv::{FiniteCmv, SpectralParameter, ThetaBlock};
use skewspec_core::cocycle::{uniform_point, CocycleSpec};
use skewspec_core::green::restriction_identity_check;
use skewspec_core::linalg::{gershgorin, hermitian_eigenvalues, CMatrix};
use skewspec_core::sampling::{verblunsky_path, SamplingFunction};
use skewspec_core::schrodinger::{PotentialSpec, SchrodingerFiniteOp};
use skewspec_core::stats::wilson_interval;
use skewspec_core::torus::{SkewShiftMap, TorusPoint};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Measured quantity compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
}

fn check(name: &str, value: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: value.is_finite() && value <= tolerance,
        value,
        tolerance,
    }
}

fn failed(name: &str, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        value: f64::NAN,
        tolerance,
    }
}

/// Runs `f` and turns an error into a failed check.
fn guarded(name: &str, tolerance: f64, f: impl FnOnce() -> skewspec_core::Result<f64>) -> CheckResult {
    match f() {
        Ok(v) => check(name, v, tolerance),
        Err(_) => failed(name, tolerance),
    }
}

fn window(lambda: f64, x: &TorusPoint<f64>, a: i64, b: i64, beta: f64) -> skewspec_core::Result<FiniteCmv<f64>> {
    let map = SkewShiftMap::golden(2)?;
    let f = SamplingFunction::canonical(2, Complex::new(lambda, 0.0))?;
    let path = verblunsky_path(&f, &map, x, a - 1, b + 1)?;
    FiniteCmv::new(
        path,
        a,
        b,
        SpectralParameter::from_turns(beta).z,
        Complex::new(1.0, 0.0),
    )
}

pub fn fast_suite() -> Vec<CheckResult> {
    let x: TorusPoint<f64> = uniform_point(2, 11, 0);
    let mut out = Vec::new();

    out.push(guarded("theta_block_unitarity", 1e-14, || {
        let mut worst: f64 = 0.0;
        for k in 0..16 {
            let al = Complex::from_polar(0.97 * k as f64 / 16.0, 0.37 * k as f64);
            worst = worst.max(ThetaBlock::new(al)?.unitarity_defect());
        }
        Ok(worst)
    }));

    out.push(guarded("cmv_unitarity", 1e-12, || {
        Ok(window(0.6, &x, -16, 15, 0.3)?.unitarity_defect())
    }));

    out.push(guarded("pencil_closed_form", 1e-13, || {
        let op = window(0.5, &x, -12, 12, 0.7)?;
        Ok([0.0, 0.2, 0.45, 0.8]
            .iter()
            .map(|&t| op.closed_form_discrepancy(SpectralParameter::from_turns(t).z * 1.1))
            .fold(0.0, f64::max))
    }));

    out.push(guarded("lm_factorization", 0.0, || {
        let op = window(0.5, &x, -9, 10, 0.0)?;
        Ok(op.l_dense().matmul(&op.m_dense()).sub(&op.e_dense()).max_abs())
    }));

    out.push(guarded("reduction_matches_direct", 1e-12, || {
        let op = window(0.5, &x, -32, 31, 0.0)?;
        let red = op.schrodinger_reduction()?;
        let map = SkewShiftMap::golden(2)?;
        let spec = PotentialSpec::new(red.g, map, map.step_inverse(&x)?)?;
        let direct = SchrodingerFiniteOp::new(&spec, -32, 31)?;
        Ok(red
            .h
            .potential()
            .iter()
            .zip(direct.potential())
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max))
    }));

    out.push(guarded("skew_shift_inverse", 1e-12, || {
        let map = SkewShiftMap::golden(3)?;
        let mut worst: f64 = 0.0;
        for i in 0..32 {
            let y: TorusPoint<f64> = uniform_point(3, 5, i);
            worst = worst.max(map.step_inverse(&map.step(&y)?)?.sup_dist(&y));
        }
        Ok(worst)
    }));

    out.push(guarded("r2_closed_form", 1e-9, || {
        let map = SkewShiftMap::golden(2)?;
        let iterated = map.orbit_coordinate(&x, 1000)?;
        Ok(map.closed_form_r2(&x, 1000)?.sup_dist(&iterated))
    }));

    out.push(guarded("pythagorean_identity", 1e-14, || {
        let map = SkewShiftMap::golden(2)?;
        let f = SamplingFunction::canonical(2, Complex::new(0.8, 0.3))?;
        Ok(verblunsky_path(&f, &map, &x, -100, 100)?.pythagorean_defect())
    }));

    out.push(guarded("eigenvalue_count_and_bounds", 1e-10, || {
        let spec = PotentialSpec::new(1.3, SkewShiftMap::golden(2)?, x.clone())?;
        let h = SchrodingerFiniteOp::new(&spec, 1, 200)?;
        let sym = h.as_sym();
        let (lo, hi) = gershgorin(&sym.diag, &sym.off);
        let ev = sym.eigenvalues();
        let miscount = (sym.count_below(hi + 1.0) as f64 - 200.0).abs();
        let outside = ev.iter().map(|&e| (lo - e).max(e - hi).max(0.0)).fold(0.0, f64::max);
        let dense = hermitian_eigenvalues(&sym.to_dense());
        let oracle = ev.iter().zip(&dense).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        Ok(miscount + outside + oracle)
    }));

    out.push(guarded("unit_determinant", 1e-9, || {
        let spec = CocycleSpec::Schrodinger {
            g: 0.7,
            map: SkewShiftMap::golden(2)?,
            energy: 0.4,
        };
        Ok(spec.orbit_growth(&x, 5000)?.log_abs_det().abs())
    }));

    out.push(guarded("restriction_blocks", 1e-9, || {
        let op = window(0.5, &x, -20, 20, 0.0)?;
        let rep = restriction_identity_check(&op, -6, 5, SpectralParameter::from_turns(0.3).z * 1.02)?;
        Ok(rep.cross_block_max + rep.relative_residual)
    }));

    out.push({
        let (lo, hi) = wilson_interval(37, 400);
        let p = 37.0 / 400.0;
        check(
            "wilson_contains_estimate",
            if lo <= p && p <= hi { 0.0 } else { 1.0 },
            0.0,
        )
    });

    out.push({
        let eye = CMatrix::<f64>::identity(4);
        check("identity_is_unitary", eye.unitarity_defect(), 0.0)
    });

    out
}
