//! Acceptance suite. Each test prints one `ACn PASS|FAIL ...` line straight to
//! stdout (bypassing the test harness capture) and then asserts.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewspec_core::cmv::{FiniteCmv, SpectralParameter};
use skewspec_core::cocycle::{
    lyapunov_estimate, schrodinger_zero_energy_closed_form, szego_exponent_closed_form, thouless_l, uniform_point,
    CocycleSpec, LyapunovConfig, LyapunovEstimate, SampleMode,
};
use skewspec_core::green::{
    cmv_eigenvector, cmv_spectrum, perturbation_trial, restriction_identity_check, solution_bound_check,
    SuitabilityParams,
};
use skewspec_core::linalg::CMatrix;
use skewspec_core::montecarlo::{log_grid, measure_unsuitable, wegner_tail_estimate, CensusOperator, ExperimentConfig};
use skewspec_core::sampling::{
    axis_decay_test_function, grid_points, sqrt_taylor, sqrt_taylor_tail_bound, trig_truncate, verblunsky_path,
    SamplingFunction,
};
use skewspec_core::schrodinger::{PotentialSpec, SchrodingerFiniteOp};
use skewspec_core::spectral::{ids_estimate, zero_in_spectrum_check};
use skewspec_core::stats::linear_fit;
use skewspec_core::torus::{return_time_count, BallRegion, SkewShiftMap, TorusPoint};

fn report(id: u32, pass: bool, detail: String) {
    let line = format!("AC{id} {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn rel(value: f64, target: f64) -> f64 {
    (value / target - 1.0).abs()
}

fn golden() -> SkewShiftMap<f64> {
    SkewShiftMap::golden(2).unwrap()
}

fn canonical_window(lambda: f64, x: &TorusPoint<f64>, a: i64, b: i64) -> FiniteCmv<f64> {
    let f = SamplingFunction::canonical(2, Complex::new(lambda, 0.0)).unwrap();
    let path = verblunsky_path(&f, &golden(), x, a - 1, b + 1).unwrap();
    FiniteCmv::new(path, a, b, Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)).unwrap()
}

fn random_phase(rng: &mut ChaCha8Rng) -> Complex<f64> {
    Complex::from_polar(1.0, std::f64::consts::TAU * rng.gen::<f64>())
}

fn uniform(steps: usize, samples: usize, seed: u64) -> LyapunovConfig<f64> {
    LyapunovConfig {
        steps,
        samples,
        seed,
        mode: SampleMode::Uniform,
    }
}

#[test]
fn ac01_cmv_lyapunov_constancy() {
    const LAMBDA: f64 = 0.5;
    const REL_TOL: f64 = 0.02;
    const MAX_SECONDS: f64 = 10.0;
    const POOLED_SIGMAS: f64 = 3.0;
    let target = szego_exponent_closed_form(LAMBDA);
    let f = SamplingFunction::canonical(2, Complex::new(LAMBDA, 0.0)).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let started = Instant::now();
    let ests: Vec<LyapunovEstimate> = pool.install(|| {
        [0.0, 0.3, 0.41]
            .iter()
            .map(|&t| {
                let spec = CocycleSpec::Szego {
                    f: f.clone(),
                    map: golden(),
                    z: SpectralParameter::from_turns(t).z,
                };
                lyapunov_estimate(&spec, &uniform(100_000, 32, 1)).unwrap()
            })
            .collect()
    });
    let secs = started.elapsed().as_secs_f64();
    let close = ests.iter().all(|e| rel(e.value, target) < REL_TOL);
    let agree = ests.iter().all(|a| {
        ests.iter().all(|b| {
            let pooled = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            (a.value - b.value).abs() <= POOLED_SIGMAS * pooled
        })
    });
    let pass = close && agree && secs < MAX_SECONDS;
    let values: Vec<String> = ests
        .iter()
        .map(|e| format!("{:.6}±{:.1e}", e.value, e.std_error))
        .collect();
    report(
        1,
        pass,
        format!(
            "estimates [{}] target {target:.6} pairwise={agree} single-core {secs:.2}s",
            values.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn ac02_schrodinger_zero_energy_exponent() {
    const REL_TOL_G1: f64 = 0.02;
    const REL_TOL_G05: f64 = 0.03;
    const POWER: f64 = 2.0;
    const POWER_TOL: f64 = 0.2;
    let l = |g: f64| {
        let spec = CocycleSpec::Schrodinger {
            g,
            map: golden(),
            energy: 0.0,
        };
        lyapunov_estimate(&spec, &uniform(100_000, 32, 2)).unwrap().value
    };
    let (l1, l05) = (l(1.0), l(0.5));
    let (t1, t05) = (
        schrodinger_zero_energy_closed_form(1.0),
        schrodinger_zero_energy_closed_form(0.5),
    );
    let gs = [0.1, 0.2, 0.4];
    let logs_l: Vec<f64> = gs.iter().map(|&g| l(g).ln()).collect();
    let logs_g: Vec<f64> = gs.iter().map(|g: &f64| g.ln()).collect();
    let power = linear_fit(&logs_g, &logs_l).slope;
    let ok1 = rel(l1, t1) < REL_TOL_G1;
    let ok05 = rel(l05, t05) < REL_TOL_G05;
    let ok_power = (power - POWER).abs() <= POWER_TOL;
    report(
        2,
        ok1 && ok05 && ok_power,
        format!(
            "g=1: {l1:.5} vs {t1:.6} ({}); g=0.5: {l05:.5} vs {t05:.6} ({}); power fit {power:.3} ({})",
            verdict(ok1),
            verdict(ok05),
            verdict(ok_power)
        ),
    );
    assert!(ok_power, "power fit {power}");
    assert!(ok1, "g=1: {l1} vs {t1}");
    assert!(ok05, "g=0.5: {l05} vs {t05}");
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "off"
    }
}

#[test]
fn ac03_structural_exactness() {
    const CLOSED_FORM_TOL: f64 = 1e-13;
    const UNITARITY_TOL: f64 = 1e-12;
    const REDUCTION_TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut closed, mut unitary, mut reduction) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let lambda = Complex::from_polar(0.95 * rng.gen::<f64>(), std::f64::consts::TAU * rng.gen::<f64>());
        let x = TorusPoint::new(vec![rng.gen(), rng.gen()]).unwrap();
        let f = SamplingFunction::canonical(2, lambda).unwrap();
        let path = verblunsky_path(&f, &golden(), &x, -33, 33).unwrap();
        let op = FiniteCmv::new(path, -32, 31, random_phase(&mut rng), random_phase(&mut rng)).unwrap();
        closed = closed.max(op.closed_form_discrepancy(random_phase(&mut rng)));
        let e = op.e_dense();
        unitary = unitary.max(e.adjoint().matmul(&e).sub(&CMatrix::identity(op.len())).max_abs());

        let lr = 0.9 * rng.gen::<f64>();
        let red = canonical_window(lr, &x, -32, 31).schrodinger_reduction().unwrap();
        let spec = PotentialSpec::new(red.g, golden(), golden().step_inverse(&x).unwrap()).unwrap();
        let direct = SchrodingerFiniteOp::new(&spec, -32, 31).unwrap();
        for (u, v) in red.h.potential().iter().zip(direct.potential()) {
            reduction = reduction.max((u - v).abs());
        }
    }
    let pass = closed < CLOSED_FORM_TOL && unitary < UNITARITY_TOL && reduction < REDUCTION_TOL;
    report(
        3,
        pass,
        format!("100 trials N=64: closed form {closed:.2e}, unitarity {unitary:.2e}, reduction {reduction:.2e}"),
    );
    assert!(pass);
}

#[test]
fn ac04_restriction_identity() {
    const RESIDUAL_TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut cross) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let x = TorusPoint::new(vec![rng.gen(), rng.gen()]).unwrap();
        let op = canonical_window(0.5, &x, -32, 31);
        let c = rng.gen_range(-30..=14i64);
        let rep = restriction_identity_check(&op, c, c + 15, random_phase(&mut rng)).unwrap();
        worst = worst.max(rep.relative_residual);
        cross = cross.max(rep.cross_block_max);
    }
    let pass = worst < RESIDUAL_TOL && cross == 0.0;
    report(
        4,
        pass,
        format!("50 trials outer 64 inner 16: residual {worst:.2e}, cross-block max {cross:e}"),
    );
    assert!(pass);
}

#[test]
fn ac05_perturbation_trial() {
    const TRIALS: usize = 100;
    const MAX_DRAWS: usize = 2000;
    let params = SuitabilityParams::new(0.02, 6.0, 1).unwrap();
    let z = Complex::new(-1.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut applicable, mut preserved, mut draws) = (0, 0, 0);
    let mut radius = 0.0;
    while applicable < TRIALS && draws < MAX_DRAWS {
        draws += 1;
        let x = TorusPoint::new(vec![rng.gen(), rng.gen()]).unwrap();
        let op = canonical_window(0.5, &x, -64, 64);
        let t = perturbation_trial(&op, z, &params, &mut rng).unwrap();
        radius = t.radius;
        if let Some(ok) = t.preserved() {
            applicable += 1;
            preserved += usize::from(ok);
        }
    }
    let pass = applicable == TRIALS && preserved == TRIALS;
    report(
        5,
        pass,
        format!("{preserved}/{applicable} preserved at p−1 (radius {radius:.2e}, {draws} base draws, γ=0.02 Γ=6 p=1)"),
    );
    assert!(pass);
}

#[test]
fn ac06_solution_bound() {
    const RATIO_TOL: f64 = 1e-6;
    let x = TorusPoint::new(vec![0.37, 0.81]).unwrap();
    let op = canonical_window(0.5, &x, 0, 255);
    let spec = cmv_spectrum(&op).unwrap();
    let (mut worst, mut sites, mut singular) = (0.0f64, 0, 0);
    for &z in spec.iter().step_by(spec.len() / 20).take(20) {
        let psi = cmv_eigenvector(&op, z, 1e-8).unwrap();
        for (a, b) in [(1, 254), (32, 223), (64, 191), (100, 155)] {
            match solution_bound_check(&op, &psi, z, a, b) {
                Ok(rep) => {
                    worst = worst.max(rep.max_ratio);
                    sites += rep.sites_checked;
                }
                // z on the window's spectrum: G is unbounded and the bound is void
                Err(e) if e.is_numerical() => singular += 1,
                Err(e) => panic!("{e}"),
            }
        }
    }
    let pass = worst <= 1.0 + RATIO_TOL && sites > 0;
    report(
        6,
        pass,
        format!("20 eigenpairs N=256, {sites} interior sites over 4 windows ({singular} singular windows skipped): max ratio {worst:.6}"),
    );
    assert!(pass);
}

#[test]
fn ac07_approximation_bounds() {
    const SLOPE_REL_TOL: f64 = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for _ in 0..1000 {
        let x = rng.gen_range(-0.9..=0.9f64);
        let terms = rng.gen_range(1..=40usize);
        let err = (sqrt_taylor(x, terms).unwrap() - (1.0 - x).sqrt()).abs();
        if err > sqrt_taylor_tail_bound(x.abs(), terms) + 4.0 * f64::EPSILON {
            violations += 1;
        }
    }
    let rate = std::f64::consts::LN_2;
    let poly = axis_decay_test_function(24, 0.125f64);
    let f = SamplingFunction::trig_poly(poly.clone(), rate).unwrap();
    let (mut ds, mut logs) = (vec![], vec![]);
    for d in 2..=12 {
        let p = trig_truncate(&f, d);
        let err = grid_points::<f64>(2, 64)
            .map(|x| (poly.eval(&x) - p.eval(&x)).norm())
            .fold(0.0, f64::max);
        ds.push(d as f64);
        logs.push(err.ln());
    }
    let slope = linear_fit(&ds, &logs).slope;
    let pass = violations == 0 && (slope + rate).abs() < SLOPE_REL_TOL * rate;
    report(
        7,
        pass,
        format!("tail-bound violations {violations}/1000; truncation log-slope {slope:.4} vs −{rate:.4}"),
    );
    assert!(pass);
}

#[test]
fn ac08_return_times() {
    const FREQ_TOL: f64 = 0.008;
    let map = golden();
    let ball = BallRegion::new(TorusPoint::new(vec![0.5, 0.5]).unwrap(), 0.1).unwrap();
    let mut worst: f64 = 0.0;
    let (mut short, mut long) = (vec![], vec![]);
    for i in 0..10 {
        let x: TorusPoint<f64> = uniform_point(2, 8, i);
        let st = return_time_count(&map, &x, &ball, 100_000).unwrap();
        worst = worst.max((st.frequency - 0.04).abs());
        long.push(st.abs_error());
        short.push(return_time_count(&map, &x, &ball, 10_000).unwrap().abs_error());
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        0.5 * (v[4] + v[5])
    };
    let (ms, ml) = (median(&mut short), median(&mut long));
    let pass = worst < FREQ_TOL && ms > ml;
    report(
        8,
        pass,
        format!("max |freq − 0.04| = {worst:.5}; median error L=1e4 {ms:.5} > L=1e5 {ml:.5}"),
    );
    assert!(pass);
}

#[test]
fn ac09_zero_in_spectrum() {
    const TOP_TOL: f64 = 0.05;
    let spec = PotentialSpec::new(1.0, golden(), uniform_point(2, 9, 0)).unwrap();
    let rep = zero_in_spectrum_check(&spec, &[256, 1024, 4096]).unwrap();
    let top = rep.min_abs[2];
    let pass = rep.nonincreasing && top < TOP_TOL;
    report(
        9,
        pass,
        format!("min|eig| {:?}, nonincreasing={}", rep.min_abs, rep.nonincreasing),
    );
    assert!(pass);
}

#[test]
fn ac10_thouless_consistency() {
    const TOL: f64 = 0.02;
    let spec = PotentialSpec::new(1.0, golden(), TorusPoint::origin(2)).unwrap();
    let ids = ids_estimate(&spec, 2048, 16, 512, 10).unwrap();
    let from_ids = thouless_l(&ids, 0.0).unwrap();
    let cocycle = CocycleSpec::Schrodinger {
        g: 1.0,
        map: golden(),
        energy: 0.0,
    };
    let from_cocycle = lyapunov_estimate(&cocycle, &uniform(100_000, 32, 10)).unwrap().value;
    let diff = (from_ids - from_cocycle).abs();
    let pass = diff < TOL;
    report(
        10,
        pass,
        format!("L(0): cocycle {from_cocycle:.5}, Thouless {from_ids:.5}, |diff| {diff:.5}"),
    );
    assert!(pass);
}

#[test]
fn ac11_measure_decay() {
    const MAX_FRACTION: f64 = 0.05;
    const SLOPE_RANGE: (f64, f64) = (-1.5, -0.7);
    let op = CensusOperator::Cmv {
        lambda: Complex::new(0.5, 0.0),
        z: Complex::new(-1.0, 0.0),
    };
    let census = measure_unsuitable(&ExperimentConfig::new(op, vec![32, 64, 128], 400, 11)).unwrap();
    let fractions: Vec<f64> = census.estimates.iter().map(|e| e.fraction).collect();
    let top = fractions[2];
    let census_ok = census.nonincreasing && top <= MAX_FRACTION;

    let wegner = wegner_tail_estimate(&ExperimentConfig::new(op, vec![64], 400, 11), &log_grid(0.25, 1e6, 25)).unwrap();
    let slope = wegner.curves[0].full_fit.as_ref().map_or(f64::NAN, |f| f.slope);
    let slope_ok = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope);
    let failures: Vec<String> = census
        .estimates
        .iter()
        .map(|e| format!("N={}: norm {} decay {}", e.n, e.norm_failures, e.decay_failures))
        .collect();
    report(
        11,
        census_ok && slope_ok,
        format!(
            "unsuitable fractions {fractions:?} nonincreasing={} ≤{MAX_FRACTION}: {} [{}]; Wegner slope {slope:.3} ({})",
            census.nonincreasing,
            verdict(top <= MAX_FRACTION),
            failures.join("; "),
            verdict(slope_ok)
        ),
    );
    assert!(slope_ok, "Wegner slope {slope}");
    assert!(census.nonincreasing, "{fractions:?}");
    assert!(top <= MAX_FRACTION, "unsuitable fraction at N=128 is {top}");
}

#[test]
fn ac12_determinism() {
    let runs: [&[&str]; 6] = [
        &["lyapunov", "--steps", "20000", "--samples", "8", "--z-angle", "0.3"],
        &["ids", "--N", "256", "--samples", "8", "--grid", "128"],
        &["suitability", "--N", "16,32", "--samples", "60"],
        &[
            "wegner",
            "--N",
            "32",
            "--samples",
            "60",
            "--b-max",
            "1e4",
            "--b-count",
            "9",
        ],
        &["return-times", "--horizon", "20000"],
        &["spacing", "--N", "1024"],
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut identical = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut bytes = vec![];
        for (rep, threads) in ["1", "3"].iter().enumerate() {
            let out = dir.path().join(format!("run{i}_{rep}.out"));
            let mut argv = vec!["skewspec", "--threads", threads];
            argv.extend_from_slice(args);
            argv.extend(["--seed", "12", "--out", out.to_str().unwrap()]);
            assert_eq!(skewspec_cli::run_command(argv), 0, "{args:?}");
            bytes.push(std::fs::read(&out).unwrap());
        }
        identical += usize::from(bytes[0] == bytes[1]);
    }
    // and the library census directly, twice
    let cfg = ExperimentConfig::new(
        CensusOperator::Schrodinger { g: 1.0, energy: 0.0 },
        vec![16, 32],
        50,
        12,
    );
    let a = serde_json::to_vec(&measure_unsuitable(&cfg).unwrap()).unwrap();
    let b = serde_json::to_vec(&measure_unsuitable(&cfg).unwrap()).unwrap();
    let pass = identical == runs.len() && a == b;
    report(
        12,
        pass,
        format!(
            "{identical}/{} CLI outputs byte-identical across reruns (1 vs 3 threads); census JSON identical={}",
            runs.len(),
            a == b
        ),
    );
    assert!(pass);
}
