use std::f64::consts::PI;

use kerr_floquet::fock::{self, DensityMatrix, FockOperator};
use kerr_floquet::lindblad::{
    evolve, liouvillian, mpr_peaks, mpr_predicted, mpr_scan, photon_number_average, run_point,
    run_point_time_domain, steady_state_direct, Generator, LindbladModel, MPRConvention,
    ScanOptions, TimeDomainOptions,
};
use kerr_floquet::params::{compute_rwa_coefficients, RWACoefficients};
use kerr_floquet::vanvleck::{fourier_components, rwa_analytic};
use kerr_floquet::{BasisChoice, Error, SystemParams};
use num_complex::Complex64 as C;

fn grid(t1: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| t1 * k as f64 / n as f64).collect()
}

fn grid_from_zero(t1: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t1 * k as f64 / n as f64).collect()
}

fn linear_model(delta: f64, f: f64, n: usize) -> FockOperator {
    rwa_analytic(&RWACoefficients::new(delta, 0.0, f, 1.0, 1.0), 1.0, n).unwrap().matrix
}

fn mpr_params(u_a: f64, f_a: f64, delta_a: f64) -> SystemParams {
    SystemParams::from_a_basis(1.0, 1.0, 1.0, u_a, f_a, delta_a)
}

#[test]
fn single_photon_decay() {
    let n = 6;
    let h = FockOperator::zeros(n).unwrap();
    let gen = Generator::Static { hamiltonian: &h, kappa: 1.0, hbar: 1.0 };
    let times = grid(5.0, 50);
    let ev = evolve(&DensityMatrix::fock(n, 1).unwrap(), &gen, 0.0, &times, 1e-11).unwrap();
    let num = fock::number(n).unwrap();
    for (t, rho) in ev.times.iter().zip(&ev.states) {
        let v = fock::expectation(rho, &num).unwrap().re;
        assert!((v - (-t).exp()).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn harmonic_decay() {
    let n = 24;
    let kappa = 0.3;
    let h = fock::number(n).unwrap().scale_re(1.7);
    let rho0 = DensityMatrix::coherent(n, C::new(1.0, 0.5)).unwrap();
    let num = fock::number(n).unwrap();
    let n0 = fock::expectation(&rho0, &num).unwrap().re;
    for gen in [
        Generator::Static { hamiltonian: &h, kappa, hbar: 1.0 },
        Generator::Superoperator(&liouvillian(&h, kappa, 1.0).unwrap()),
    ] {
        let ev = evolve(&rho0, &gen, 0.0, &grid(10.0, 40), 1e-10).unwrap();
        for (t, rho) in ev.times.iter().zip(&ev.states) {
            let v = fock::expectation(rho, &num).unwrap().re;
            assert!((v - n0 * (-kappa * t).exp()).abs() < 1e-8, "t = {t}");
        }
    }
}

#[test]
fn pure_loss_relaxes_to_vacuum() {
    let h = FockOperator::zeros(8).unwrap();
    let rho = steady_state_direct(&liouvillian(&h, 0.5, 1.0).unwrap()).unwrap();
    assert!(rho.trace_distance(&DensityMatrix::vacuum(8).unwrap()).unwrap() < 1e-12);
}

#[test]
fn lossless_free_generator_is_degenerate() {
    let h = FockOperator::zeros(3).unwrap();
    match steady_state_direct(&liouvillian(&h, 0.0, 1.0).unwrap()) {
        Err(Error::DegenerateSteadyState { basis }) => assert_eq!(basis.len(), 9),
        other => panic!("expected a degenerate null space, got {other:?}"),
    }
}

#[test]
fn generator_input_checks() {
    let skew = FockOperator::from_fn(3, |i, j| C::new(if i < j { 1.0 } else { 0.0 }, 0.0)).unwrap();
    assert!(matches!(liouvillian(&skew, 0.1, 1.0), Err(Error::NonHermitian(_))));
    let h = fock::number(3).unwrap();
    assert!(liouvillian(&h, -0.1, 1.0).is_err());
    let gen = Generator::Static { hamiltonian: &h, kappa: 0.1, hbar: 1.0 };
    let rho = DensityMatrix::vacuum(4).unwrap();
    assert!(matches!(evolve(&rho, &gen, 0.0, &[1.0], 1e-8), Err(Error::DimensionMismatch { .. })));
    let rho = DensityMatrix::vacuum(3).unwrap();
    assert!(evolve(&rho, &gen, 0.0, &[1.0], 1e-3).is_err());
}

#[test]
fn coherent_steady_state_of_linear_mode() {
    let (n, delta, f, kappa) = (30, 0.05, 0.03, 0.04);
    let rho = steady_state_direct(&liouvillian(&linear_model(delta, f, n), kappa, 1.0).unwrap()).unwrap();
    let a = fock::annihilation(n).unwrap();
    let alpha = fock::expectation(&rho, &a).unwrap();
    let expected = f * f / (delta * delta + 0.25 * kappa * kappa);
    assert!((alpha.norm_sqr() - expected).abs() < 1e-9 * expected);
    let n_avg = fock::expectation(&rho, &fock::number(n).unwrap()).unwrap().re;
    assert!((n_avg - expected).abs() < 1e-9 * expected);
}

#[test]
fn direct_steady_state_matches_long_evolution() {
    let (n, kappa) = (16, 0.2);
    let h = linear_model(0.1, 0.05, n);
    let direct = steady_state_direct(&liouvillian(&h, kappa, 1.0).unwrap()).unwrap();
    let gen = Generator::Static { hamiltonian: &h, kappa, hbar: 1.0 };
    let ev = evolve(&DensityMatrix::vacuum(n).unwrap(), &gen, 0.0, &[300.0], 1e-10).unwrap();
    let d = ev.states[0].trace_distance(&direct).unwrap();
    assert!(d < 1e-8, "{d:e}");
}

#[test]
fn evolutions_keep_state_invariants() {
    let p = mpr_params(1e-2, 0.8e-2, 2.5e-2);
    let n = 16;
    let kappa = 1e-3;
    let fc = fourier_components(&p, &BasisChoice::pump_photons(&p), n).unwrap();
    let period = 2.0 * PI / p.omega;
    let gen = Generator::Periodic { components: &fc, kappa, hbar: p.hbar };
    let ev = evolve(&DensityMatrix::vacuum(n).unwrap(), &gen, 0.0, &grid(40.0 * period, 640), 1e-9).unwrap();
    assert!(ev.max_trace_drift < 1e-8, "{:e}", ev.max_trace_drift);
    assert!(ev.max_hermiticity < 1e-9, "{:e}", ev.max_hermiticity);
    assert!(ev.min_eigenvalue >= -1e-6, "{:e}", ev.min_eigenvalue);
}

#[test]
fn photon_average_of_stationary_and_empty_states() {
    let n = 12;
    let kappa = 0.3;
    let h = linear_model(0.2, 0.1, n);
    let rho_ss = steady_state_direct(&liouvillian(&h, kappa, 1.0).unwrap()).unwrap();
    let gen = Generator::Static { hamiltonian: &h, kappa, hbar: 1.0 };
    let period = 2.0;
    let ev = evolve(&rho_ss, &gen, 0.0, &grid_from_zero(8.0 * period, 8 * 32), 1e-10).unwrap();
    let inst = fock::expectation(&rho_ss, &fock::number(n).unwrap()).unwrap().re;
    let avg = photon_number_average(&ev, period, 4).unwrap();
    assert!((avg - inst).abs() < 1e-8 * inst);
    let avg8 = photon_number_average(&ev, period, 8).unwrap();
    assert!((avg8 - avg).abs() < 1e-6 * avg);
    assert!(photon_number_average(&ev, period, 3).is_err());
    assert!(photon_number_average(&ev, 16.0 * period, 4).is_err());

    let free = linear_model(0.2, 0.0, n);
    let gen = Generator::Static { hamiltonian: &free, kappa, hbar: 1.0 };
    let ev = evolve(&DensityMatrix::vacuum(n).unwrap(), &gen, 0.0, &grid_from_zero(4.0 * period, 4 * 16), 1e-10).unwrap();
    assert_eq!(photon_number_average(&ev, period, 4).unwrap(), 0.0);
}

#[test]
fn exact_linear_model_matches_closed_form() {
    let p = SystemParams::from_a_basis(1.0, 1.0, 1.0, 0.0, 2e-4, 5e-3);
    let kappa = 2e-3;
    let run = run_point(&p, LindbladModel::ExactRotated, kappa, 12, &ScanOptions::for_dim(12)).unwrap();
    let k = compute_rwa_coefficients(&p, &BasisChoice::pump_photons(&p)).unwrap();
    let expected = k.f_c * k.f_c / (k.delta_c * k.delta_c + 0.25 * kappa * kappa);
    let rel = (run.n_avg - expected).abs() / expected;
    assert!(rel < 1e-2, "{} vs {expected} ({rel:e})", run.n_avg);
}

#[test]
fn periodic_solution_matches_time_domain() {
    let p = mpr_params(1e-2, 0.8e-2, 2e-2);
    let (n, kappa) = (14, 0.05);
    let direct = run_point(&p, LindbladModel::ExactRotated, kappa, n, &ScanOptions::for_dim(n)).unwrap();
    let opts = TimeDomainOptions {
        tol: 1e-10,
        samples_per_period: 16,
        window_periods: 8,
        rel_tol: 1e-7,
        max_time: 4000.0,
    };
    let td = run_point_time_domain(&p, LindbladModel::ExactRotated, kappa, &DensityMatrix::vacuum(n).unwrap(), &opts)
        .unwrap();
    assert!(td.converged);
    assert!((td.n_avg - direct.n_avg).abs() < 1e-5 * direct.n_avg, "{} vs {}", td.n_avg, direct.n_avg);
}

#[test]
fn undriven_column_is_empty() {
    let base = mpr_params(1e-2, 0.0, 0.0);
    let deltas = [-0.01, 0.0, 0.01, 0.02];
    for model in [LindbladModel::EffectiveOrder1A, LindbladModel::EffectiveOrder1B, LindbladModel::EffectiveOrder2B] {
        let scan = mpr_scan(&base, &deltas, &[0.0], model, 1e-3, 10, &ScanOptions::for_dim(10)).unwrap();
        for row in &scan.n_avg {
            assert!(row[0].abs() < 1e-14, "{model:?}: {}", row[0]);
        }
    }
    let exact = mpr_scan(&base, &deltas, &[0.0], LindbladModel::ExactRotated, 1e-3, 10, &ScanOptions::for_dim(10))
        .unwrap();
    for row in &exact.n_avg {
        assert!(row[0] >= 0.0 && row[0] < 1e-3, "{}", row[0]);
    }
}

#[test]
fn weak_nonlinearity_effective_model_tracks_exact() {
    let u_a = 1e-3;
    let kappa = 0.5 * u_a;
    for d in [-3.0, -1.5, -0.5] {
        let p = mpr_params(u_a, 0.2 * u_a, d * u_a);
        let opts = ScanOptions::for_dim(16);
        let exact = run_point(&p, LindbladModel::ExactRotated, kappa, 16, &opts).unwrap();
        let eff = run_point(&p, LindbladModel::EffectiveOrder1B, kappa, 16, &opts).unwrap();
        let rel = (exact.n_avg - eff.n_avg).abs() / exact.n_avg;
        assert!(rel < 0.05, "Δ/U = {d}: {} vs {} ({rel})", exact.n_avg, eff.n_avg);
    }
}

#[test]
fn cutoff_extension_is_stable() {
    let p = mpr_params(1e-2, 0.8e-2, 1.5e-2);
    let kappa = 1e-3;
    let opts = ScanOptions::for_dim(24);
    let small = run_point(&p, LindbladModel::ExactRotated, kappa, 24, &opts).unwrap();
    let large = run_point(&p, LindbladModel::ExactRotated, kappa, 32, &opts).unwrap();
    assert!(small.converged && large.converged);
    let rel = (small.n_avg - large.n_avg).abs() / large.n_avg;
    assert!(rel < 1e-4, "{rel:e}");
}

#[test]
fn system_basis_resonances_are_equidistant() {
    let u_a = 1e-2;
    let base = mpr_params(u_a, 0.3 * u_a, 0.0);
    let step = 0.02 * u_a;
    let deltas: Vec<f64> = (0..=150).map(|i| 0.25 * u_a + step * i as f64).collect();
    let scan = mpr_scan(&base, &deltas, &[base.force], LindbladModel::EffectiveOrder1A, 0.05 * u_a, 16, &ScanOptions::for_dim(16))
        .unwrap();
    let peaks = mpr_peaks(&scan.curve(0)).unwrap();
    assert!(peaks.len() >= 3, "{peaks:?}");
    let spacings: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    for s in &spacings {
        assert!((s - 0.5 * u_a).abs() < 2.0 * step, "{spacings:?}");
    }
}

#[test]
fn predictions() {
    let p = mpr_params(1e-2, 0.8e-2, 0.0);
    for basis in [BasisChoice::system_photons(&p), BasisChoice::pump_photons(&p)] {
        let first = mpr_predicted(&p, &basis, 1, MPRConvention::Standard).unwrap();
        assert!(first.delta_a.abs() < 1e-12);
        for conv in [MPRConvention::Standard, MPRConvention::DiagonalDegeneracy] {
            let d: Vec<f64> = (1..=8).map(|n| mpr_predicted(&p, &basis, n, conv).unwrap().delta_a).collect();
            assert!(d.windows(2).all(|w| w[1] > w[0]));
        }
    }
    let a = BasisChoice::system_photons(&p);
    let d: Vec<f64> = (1..=8).map(|n| mpr_predicted(&p, &a, n, MPRConvention::Standard).unwrap().delta_a).collect();
    for w in d.windows(2) {
        assert!((w[1] - w[0] - 0.005).abs() < 1e-12);
    }
    let b = BasisChoice::pump_photons(&p);
    let d: Vec<f64> = (1..=10).map(|n| mpr_predicted(&p, &b, n, MPRConvention::Standard).unwrap().delta_a).collect();
    let s: Vec<f64> = d.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
    assert!(mpr_predicted(&p, &b, 0, MPRConvention::Standard).is_err());
}

#[test]
fn peak_extraction() {
    let curve: Vec<(f64, f64)> = (0..21).map(|i| {
        let x = 0.1 * i as f64;
        (x, 3.0 - (x - 1.03).powi(2))
    })
    .collect();
    let peaks = mpr_peaks(&curve).unwrap();
    assert_eq!(peaks.len(), 1);
    assert!((peaks[0] - 1.03).abs() < 1e-12);
    let mono: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, i as f64)).collect();
    assert!(mpr_peaks(&mono).unwrap().is_empty());
    assert!(mpr_peaks(&mono[..4]).is_err());
}
