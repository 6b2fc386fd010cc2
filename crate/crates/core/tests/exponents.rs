use num_complex::Complex;
use skewspec_core::cmv::SpectralParameter;
use skewspec_core::cocycle::{
    lyapunov_estimate, szego_exponent_closed_form, thouless_l, uniform_point, CocycleSpec, LyapunovConfig,
    LyapunovEstimate, SampleMode,
};
use skewspec_core::sampling::SamplingFunction;
use skewspec_core::schrodinger::PotentialSpec;
use skewspec_core::spectral::{ids_estimate, schrodinger_eigenvalues};
use skewspec_core::torus::{SkewShiftMap, TorusPoint};

fn config(steps: usize, samples: usize, seed: u64) -> LyapunovConfig<f64> {
    LyapunovConfig {
        steps,
        samples,
        seed,
        mode: SampleMode::Uniform,
    }
}

fn schrodinger(g: f64, energy: f64, steps: usize, samples: usize) -> LyapunovEstimate {
    let spec = CocycleSpec::Schrodinger {
        g,
        map: SkewShiftMap::golden(2).unwrap(),
        energy,
    };
    lyapunov_estimate(&spec, &config(steps, samples, 21)).unwrap()
}

/// Growth of `ψ_{j+1} = (d_j/ρ) ψ_j − ψ_{j−1}`, the eigen-equation of the
/// tridiagonal pencil at `z = −1`, with `d_j` its (complex) diagonal.
fn pencil_recurrence_exponent(lambda: f64, real_part_only: bool, steps: usize, samples: u64) -> f64 {
    let rho = (1.0 - lambda * lambda).sqrt();
    let map = SkewShiftMap::golden(2).unwrap();
    let alpha = |y: &[f64]| Complex::from_polar(lambda, std::f64::consts::TAU * y[1]);
    let mut total = 0.0;
    for s in 0..samples {
        let x: TorusPoint<f64> = uniform_point(2, 77, s);
        let mut orbit = map.orbit(&x, -1).unwrap();
        let mut prev = alpha(orbit.peek());
        orbit.advance();
        let (mut p, mut q) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
        let mut log_scale = 0.0;
        for j in 0..steps {
            let a = alpha(orbit.peek());
            orbit.advance();
            let mut d = if j % 2 == 0 { prev - a } else { (prev - a).conj() };
            if real_part_only {
                d.im = 0.0;
            }
            prev = a;
            let next = d / rho * p - q;
            q = p;
            p = next;
            let n = (p.norm_sqr() + q.norm_sqr()).sqrt();
            if n > 1e10 {
                p /= n;
                q /= n;
                log_scale += n.ln();
            }
        }
        total += (log_scale + (p.norm_sqr() + q.norm_sqr()).sqrt().ln()) / steps as f64;
    }
    total / samples as f64
}

#[test]
fn complex_pencil_carries_the_szego_exponent_and_its_real_part_the_schrodinger_one() {
    let lambda = 0.5;
    let full = pencil_recurrence_exponent(lambda, false, 100_000, 8);
    assert!((full / szego_exponent_closed_form(lambda) - 1.0).abs() < 0.02, "{full}");
    let real = pencil_recurrence_exponent(lambda, true, 100_000, 8);
    let g = lambda / (1.0 - lambda * lambda).sqrt();
    let direct = schrodinger(g, 0.0, 100_000, 8);
    assert!((real - direct.value).abs() < 3e-3, "{real} vs {}", direct.value);
    // dropping the imaginary part of the diagonal costs most of the growth
    assert!(real < 0.5 * full);
}

#[test]
fn szego_exponent_does_not_depend_on_z() {
    let f = SamplingFunction::canonical(2, Complex::new(0.5, 0.0)).unwrap();
    let map = SkewShiftMap::golden(2).unwrap();
    let ests: Vec<LyapunovEstimate> = [0.0, 0.13, 0.3, 0.41, 0.77]
        .iter()
        .map(|&t| {
            let spec = CocycleSpec::Szego {
                f: f.clone(),
                map,
                z: SpectralParameter::from_turns(t).z,
            };
            lyapunov_estimate(&spec, &config(20_000, 16, 3)).unwrap()
        })
        .collect();
    for a in &ests {
        assert!(a.value > -3.0 * a.std_error);
        for b in &ests {
            let pooled = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!(
                (a.value - b.value).abs() <= 3.0 * pooled + 1e-3,
                "{} vs {}",
                a.value,
                b.value
            );
        }
    }
}

#[test]
fn exponent_is_nonnegative_across_energies() {
    for e in [-3.5, -1.0, 0.0, 0.7, 2.5] {
        let l = schrodinger(0.8, e, 20_000, 8);
        assert!(l.value >= -3.0 * l.std_error, "E={e}: {l:?}");
    }
}

#[test]
fn thouless_matches_cocycle_at_five_energies() {
    let spec = PotentialSpec::new(
        1.0,
        SkewShiftMap::golden(2).unwrap(),
        TorusPoint::new(vec![0.1, 0.2]).unwrap(),
    )
    .unwrap();
    let ids = ids_estimate(&spec, 2048, 16, 512, 3).unwrap();
    for e in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let from_ids = thouless_l(&ids, e).unwrap();
        let from_cocycle = schrodinger(1.0, e, 100_000, 16).value;
        assert!(
            (from_ids - from_cocycle).abs() < 0.02,
            "E={e}: {from_ids} vs {from_cocycle}"
        );
    }
}

#[test]
fn eigenvalue_count_is_conserved() {
    let spec = PotentialSpec::new(
        1.3,
        SkewShiftMap::golden(2).unwrap(),
        TorusPoint::new(vec![0.4, 0.9]).unwrap(),
    )
    .unwrap();
    for n in [1usize, 7, 300] {
        let ev = schrodinger_eigenvalues(&spec, n).unwrap();
        assert_eq!(ev.len(), n);
        let h = skewspec_core::schrodinger::SchrodingerFiniteOp::new(&spec, 1, n as i64).unwrap();
        assert_eq!(h.as_sym().count_below(1e300), n);
    }
}
