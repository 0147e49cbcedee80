//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kerr_floquet::classical::{
    drive_period, energy, integrate, integrate_sampled, periodogram, sweep_response,
    SweepDirection, SweepOptions, Trajectory, Window,
};
use kerr_floquet::fock::{annihilation, squeeze_operator, DensityMatrix, FockOperator};
use kerr_floquet::kb;
use kerr_floquet::lindblad::{
    evolve, liouvillian, mpr_peaks, mpr_predicted, mpr_scan, run_point, steady_state_direct,
    Generator, LindbladModel, MPRConvention, ScanOptions,
};
use kerr_floquet::meanfield::{
    basis_classical_limit, compare_vector_fields, linear_block_deviation, linear_tones,
    stationary_amplitudes,
};
use kerr_floquet::params::{
    bogoliubov_coefficients, compute_rwa_coefficients, validity_epsilon, RWACoefficients,
};
use kerr_floquet::vanvleck::{
    effective_hamiltonian, fourier_components, rwa_analytic, second_order_correction,
};
use kerr_floquet::{BasisChoice, SystemParams};
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;

/// Number, name, time budget in seconds and body of one criterion.
type Criterion = (u32, &'static str, u64, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_params(rng: &mut impl Rng) -> SystemParams {
    let hbar = [1e-3, 1.0, 1e3][rng.random_range(0..3)];
    SystemParams::new(
        rng.random_range(0.5..2.0),
        rng.random_range(0.5..2.0),
        rng.random_range(0.0..0.1),
        rng.random_range(0.0..0.1),
        rng.random_range(0.5..2.0),
    )
    .with_hbar(hbar)
}

fn random_sets() -> Vec<SystemParams> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    (0..100).map(|_| random_params(&mut rng)).collect()
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    cov / var
}

fn high_root(states: &[(kb::SlowFlowState, bool)]) -> f64 {
    states.iter().filter(|s| s.1).map(|s| s.0.amplitude()).fold(f64::NAN, f64::max)
}

fn quantum_classical_identity() -> Check {
    let mut worst: f64 = 0.0;
    for p in random_sets() {
        let vf = basis_classical_limit(&p, &BasisChoice::pump_photons(&p)).map_err(fail)?;
        let dev = compare_vector_fields(&vf, &kb::slow_flow_field(&p));
        ensure!(dev < 1e-12, "{p:?}: deviation {dev:e}");
        worst = worst.max(dev);
    }
    Ok(format!("max relative coefficient deviation {worst:.1e} over 100 sets"))
}

fn system_basis_mismatch() -> Check {
    let mut worst_block: f64 = 0.0;
    let mut min_dev = f64::INFINITY;
    let mut slopes = Vec::new();
    for p in random_sets() {
        if p.omega == p.omega0 {
            continue;
        }
        let k = kb::slow_flow_field(&p);
        let a = basis_classical_limit(&p, &BasisChoice::system_photons(&p)).map_err(fail)?;
        min_dev = min_dev.min(compare_vector_fields(&a, &k));
        let expected = (p.omega - p.omega0).powi(2) / (2.0 * p.omega);
        let err = (linear_block_deviation(&a, &k) - expected).abs();
        ensure!(err < 1e-12, "{p:?}: linear block off by {err:e}");
        worst_block = worst_block.max(err);

        let points: Vec<(f64, f64)> = (0..9)
            .map(|i| {
                let d = p.omega0 * 10f64.powf(-4.0 + 0.25 * i as f64);
                let q = p.with_omega(p.omega0 + d);
                let a = basis_classical_limit(&q, &BasisChoice::system_photons(&q)).unwrap();
                (d.ln(), linear_block_deviation(&a, &kb::slow_flow_field(&q)).ln())
            })
            .collect();
        slopes.push(slope(&points));
    }
    ensure!(min_dev > 0.0, "a-basis limit coincides with the slow flow off resonance");
    let (lo, hi) = slopes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |a, s| (a.0.min(*s), a.1.max(*s)));
    ensure!((lo - 2.0).abs() < 0.1 && (hi - 2.0).abs() < 0.1, "exponents in [{lo}, {hi}]");
    Ok(format!(
        "linear block error {worst_block:.1e}, smallest total deviation {min_dev:.1e}, exponents in [{lo:.4}, {hi:.4}]"
    ))
}

fn frequency_sweep() -> Check {
    let u_a = 1e-2;
    let p = SystemParams::from_a_basis(1.0, 1.0, 1.0, u_a, 1e-2 * u_a, 0.0).with_gamma(2.5e-3);
    let grid: Vec<f64> = (0..121).map(|i| u_a * (100.0 - i as f64)).collect();
    let options = SweepOptions::for_params(&p.with_omega(p.omega0 + grid[0]));
    let sweep = sweep_response(&p, &grid, SweepDirection::Down, &options).map_err(fail)?;

    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut a_dev = Vec::new();
    for pt in &sweep {
        let q = p.with_omega(p.omega0 + pt.delta);
        let roots = kb::steady_states(&q).map_err(fail)?;
        let kb_states: Vec<_> = roots.iter().map(|s| (s.state, s.stable)).collect();
        let high = high_root(&kb_states);
        let x = pt.response.amplitude;

        if validity_epsilon(&q, high).map_err(fail)?.iter().all(|e| *e < 0.1) {
            let rel = (x - high).abs() / high;
            ensure!(rel < 0.02, "delta {}: lock-in {x} vs slow flow {high}", pt.delta);
            worst = worst.max(rel);
            checked += 1;
        }

        let b = basis_classical_limit(&q, &BasisChoice::pump_photons(&q)).map_err(fail)?;
        let b_states = stationary_amplitudes(&b, q.gamma).map_err(fail)?;
        ensure!(b_states.len() == kb_states.len(), "delta {}: root counts differ", pt.delta);
        for ((sb, stab_b), (sk, stab_k)) in b_states.iter().zip(&kb_states) {
            let d = (sb.amplitude() - sk.amplitude()).abs();
            ensure!(
                d <= 1e-12 * sk.amplitude() && stab_b == stab_k,
                "delta {}: b-basis root {} vs {}",
                pt.delta,
                sb.amplitude(),
                sk.amplitude()
            );
        }

        let ratio = pt.delta / u_a;
        if (10.0 - 1e-9..=100.0 + 1e-9).contains(&ratio) {
            let a = basis_classical_limit(&q, &BasisChoice::system_photons(&q)).map_err(fail)?;
            let xa = high_root(&stationary_amplitudes(&a, q.gamma).map_err(fail)?);
            a_dev.push((pt.delta, (xa - x).abs() / x));
        }
    }
    ensure!(checked >= 5, "only {checked} detunings inside the validity region");
    a_dev.sort_by(|l, r| l.0.total_cmp(&r.0));
    ensure!(a_dev.len() == 91, "{} points in the a-basis window", a_dev.len());
    for w in a_dev.windows(2) {
        ensure!(w[1].1 > w[0].1, "a-basis relative error not increasing at delta {}", w[1].0);
    }
    Ok(format!(
        "{checked} validity points within {:.2}%, b-basis roots equal the slow flow, a-basis relative error rises {:.3} -> {:.3}",
        100.0 * worst,
        a_dev[0].1,
        a_dev[a_dev.len() - 1].1
    ))
}

fn local_maxima(psd: &[f64], floor: f64) -> Vec<usize> {
    (1..psd.len() - 1)
        .filter(|&k| psd[k] > psd[k - 1] && psd[k] >= psd[k + 1] && psd[k] > floor)
        .collect()
}

fn driven_spectrum() -> Check {
    let p = SystemParams::from_a_basis(1.0, 1.0, 1.0, 0.0, 3.5e-3, 0.4);
    let t1 = 512.0 * drive_period(&p);
    let traj = integrate_sampled((0.0, 0.0), 0.0, t1, &p, 1e-10, 32).map_err(fail)?;

    let hann = periodogram(&traj, Window::Hann).map_err(fail)?;
    let top = hann.psd.iter().cloned().fold(0.0, f64::max);
    let peaks = local_maxima(&hann.psd, 1e-2 * top);
    ensure!(peaks.len() == 2, "{} spectral peaks above 1% of the maximum", peaks.len());
    let width = hann.bin_width();
    let at = |k: usize| hann.omega[k];
    ensure!(
        (at(peaks[0]) - p.omega0).abs() <= 2.0 * width && (at(peaks[1]) - p.omega).abs() <= 2.0 * width,
        "peaks at {} and {}",
        at(peaks[0]),
        at(peaks[1])
    );

    let rect = periodogram(&traj, Window::Rectangular).map_err(fail)?;
    let measured = rect.tone_amplitude(rect.bin_of(p.omega));
    let exact = p.force / (p.m * (p.omega0 * p.omega0 - p.omega * p.omega).abs());
    let rel = (measured - exact).abs() / exact;
    ensure!(rel < 0.01, "drive tone {measured} vs {exact}");

    let tone = |basis: BasisChoice| linear_tones(&p, &basis, (0.0, 0.0)).map(|t| t.drive_amplitude);
    let err_b = (tone(BasisChoice::pump_photons(&p)).map_err(fail)? - exact).abs() / exact;
    let err_a = (tone(BasisChoice::system_photons(&p)).map_err(fail)? - exact).abs() / exact;
    ensure!(err_b < 0.01, "b-basis tone error {err_b}");
    ensure!(err_a > err_b, "a-basis error {err_a} not above b-basis error {err_b}");
    Ok(format!(
        "peaks at {:.4} and {:.4}, drive tone off by {:.2e}, b error {err_b:.1e}, a error {err_a:.3}",
        at(peaks[0]),
        at(peaks[1]),
        rel
    ))
}

fn van_vleck_assembly() -> Check {
    let n = 32;
    let sets = [
        SystemParams::new(1.0, 1.0, 0.01, 0.02, 1.2),
        SystemParams::new(1.3, 0.8, 0.05, 0.03, 0.7),
        SystemParams::from_a_basis(1.0, 1.0, 1.0, 1e-2, 0.8e-2, 3e-2),
        SystemParams::from_a_basis(1.0, 1.0, 1.0, 1e-2, 0.8e-2, 0.0),
    ];
    let (mut first, mut herm) = (0.0f64, 0.0f64);
    for p in sets {
        for basis in [BasisChoice::system_photons(&p), BasisChoice::pump_photons(&p)] {
            let h = fourier_components(&p, &basis, n).map_err(fail)?;
            let eff = effective_hamiltonian(&h, 1, p.hbar, p.omega).map_err(fail)?;
            let k = compute_rwa_coefficients(&p, &basis).map_err(fail)?;
            let analytic = rwa_analytic(&k, p.hbar, n).map_err(fail)?;
            let dev = eff.matrix.block_diff(&analytic.matrix, n - 4).map_err(fail)?;
            ensure!(dev < 1e-10, "{:?} at {p:?}: interior block off by {dev:e}", basis.kind);
            first = first.max(dev);
            let corr = second_order_correction(&h, p.hbar, p.omega).hermiticity_deviation();
            ensure!(corr < 1e-12, "{:?} at {p:?}: second order non-Hermitian by {corr:e}", basis.kind);
            herm = herm.max(corr);
        }
    }

    let zero = FockOperator::zeros(n).map_err(fail)?;
    let free = SystemParams::new(1.0, 1.0, 0.0, 0.0, 1.3);
    let res = free.with_omega(1.0);
    let mut vanish: f64 = 0.0;
    for (p, basis) in [
        (free, BasisChoice::system_photons(&free)),
        (res, BasisChoice::system_photons(&res)),
        (res, BasisChoice::pump_photons(&res)),
    ] {
        let h = fourier_components(&p, &basis, n).map_err(fail)?;
        let dev = second_order_correction(&h, p.hbar, p.omega).max_abs_diff(&zero).map_err(fail)?;
        ensure!(dev < 1e-12, "second order at alpha = F = 0 is {dev:e}");
        vanish = vanish.max(dev);
    }
    let h = fourier_components(&free, &BasisChoice::pump_photons(&free), n).map_err(fail)?;
    let squeezing = second_order_correction(&h, free.hbar, free.omega).max_abs_diff(&zero).map_err(fail)?;
    Ok(format!(
        "interior block {first:.1e}, second-order Hermiticity {herm:.1e}, free model {vanish:.1e} (b-basis off resonance {squeezing:.1e} from squeezing)"
    ))
}

fn best_fit(
    p: &SystemParams,
    basis: &BasisChoice,
    peaks: &[f64],
) -> Result<(MPRConvention, u32, f64), String> {
    let mut best: Option<(MPRConvention, u32, f64)> = None;
    for conv in [MPRConvention::Standard, MPRConvention::DiagonalDegeneracy] {
        for offset in 0..12 {
            let err: f64 = (0..2u32)
                .map(|k| {
                    mpr_predicted(p, basis, k + 1 + offset, conv)
                        .map(|d| (d.delta_a - peaks[k as usize]).abs())
                        .unwrap_or(f64::INFINITY)
                })
                .sum();
            if best.map_or(true, |b| err < b.2) {
                best = Some((conv, offset, err));
            }
        }
    }
    best.ok_or_else(|| "no prediction".to_string())
}

fn tail_error(
    p: &SystemParams,
    basis: &BasisChoice,
    peaks: &[f64],
    fit: (MPRConvention, u32, f64),
) -> Result<f64, String> {
    let (conv, offset, _) = fit;
    let mut total = 0.0;
    for (k, x) in peaks.iter().enumerate().skip(2) {
        let d = mpr_predicted(p, basis, k as u32 + 1 + offset, conv).map_err(fail)?;
        total += (d.delta_a - x).abs();
    }
    Ok(total)
}

fn mpr_structure() -> Check {
    let u_a = 1e-2;
    let p = SystemParams::from_a_basis(1.0, 1.0, 1.0, u_a, 0.8 * u_a, 0.0);
    let kappa = 0.1 * u_a;
    let dim = 40;
    let grid: Vec<f64> = (0..200).map(|i| u_a * (2.0 + 2.0 * i as f64 / 199.0)).collect();
    let step = grid[1] - grid[0];
    let scan = mpr_scan(&p, &grid, &[p.force], LindbladModel::ExactRotated, kappa, dim, &ScanOptions::for_dim(dim))
        .map_err(fail)?;
    ensure!(
        scan.converged.iter().all(|r| r[0]),
        "cutoff unresolved at some detunings"
    );
    let peaks = mpr_peaks(&scan.curve(0)).map_err(fail)?;
    ensure!(peaks.len() >= 3, "{} peaks", peaks.len());

    let spacings: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    let spread = spacings.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - spacings.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure!(
        spread > 3.0 * step,
        "spacings {spacings:?} equal within three grid steps ({})",
        3.0 * step
    );

    let a = BasisChoice::system_photons(&p);
    let b = BasisChoice::pump_photons(&p);
    let fit_a = best_fit(&p, &a, &peaks)?;
    let fit_b = best_fit(&p, &b, &peaks)?;
    let err_a = tail_error(&p, &a, &peaks, fit_a)?;
    let err_b = tail_error(&p, &b, &peaks, fit_b)?;
    ensure!(err_b < err_a, "b-basis error {err_b:e} not below a-basis {err_a:e}");

    let predicted: Vec<f64> = (1..=10)
        .map(|n| mpr_predicted(&p, &b, n, fit_b.0).map(|d| d.delta_a))
        .collect::<Result<_, _>>()
        .map_err(fail)?;
    for w in predicted.windows(3) {
        ensure!(w[2] - w[1] < w[1] - w[0], "b-basis spacings not decreasing: {predicted:?}");
    }
    let in_u: Vec<String> = peaks.iter().map(|x| format!("{:.3}", x / u_a)).collect();
    Ok(format!(
        "peaks at [{}] U_a, spacing spread {:.3} U_a vs 3 steps {:.3} U_a, tail error b {:.3} U_a ({:?}, n0 {}) vs a {:.3} U_a",
        in_u.join(", "),
        spread / u_a,
        3.0 * step / u_a,
        err_b / u_a,
        fit_b.0,
        fit_b.1 + 1,
        err_a / u_a
    ))
}

fn open_system_sanity() -> Check {
    let mut drift: f64 = 0.0;
    let mut herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut record = |ev: &kerr_floquet::lindblad::Evolution| {
        drift = drift.max(ev.max_trace_drift);
        herm = herm.max(ev.max_hermiticity);
        min_eig = min_eig.min(ev.min_eigenvalue);
    };
    let times = |t1: f64, n: usize| -> Vec<f64> { (1..=n).map(|k| t1 * k as f64 / n as f64).collect() };
    let tol = 1e-9;

    let p = SystemParams::from_a_basis(1.0, 1.0, 1.0, 1e-2, 0.8e-2, 2.5e-2);
    let period = 2.0 * PI / p.omega;
    let fc = fourier_components(&p, &BasisChoice::pump_photons(&p), 16).map_err(fail)?;
    let gen = Generator::Periodic { components: &fc, kappa: 1e-3, hbar: p.hbar };
    record(&evolve(&DensityMatrix::vacuum(16).map_err(fail)?, &gen, 0.0, &times(40.0 * period, 640), tol).map_err(fail)?);

    let fc = fourier_components(&p, &BasisChoice::pump_photons(&p), 24).map_err(fail)?;
    let h = effective_hamiltonian(&fc, 2, p.hbar, p.omega).map_err(fail)?.matrix;
    let gen = Generator::Static { hamiltonian: &h, kappa: 1e-3, hbar: p.hbar };
    let rho0 = DensityMatrix::coherent(24, num_complex::Complex64::new(1.0, 0.5)).map_err(fail)?;
    record(&evolve(&rho0, &gen, 0.0, &times(2000.0, 200), tol).map_err(fail)?);

    let n = 16;
    let kappa = 0.2;
    let h = rwa_analytic(&RWACoefficients::new(0.1, 0.0, 0.05, 1.0, 1.0), 1.0, n).map_err(fail)?.matrix;
    let l = liouvillian(&h, kappa, 1.0).map_err(fail)?;
    let direct = steady_state_direct(&l).map_err(fail)?;
    let ev = evolve(&DensityMatrix::vacuum(n).map_err(fail)?, &Generator::Superoperator(&l), 0.0, &times(300.0, 30), 1e-10)
        .map_err(fail)?;
    record(&ev);
    let distance = ev.states.last().unwrap().trace_distance(&direct).map_err(fail)?;

    ensure!(drift < 1e-8, "trace drift {drift:e}");
    ensure!(herm < 1e-9, "Hermiticity drift {herm:e}");
    ensure!(min_eig >= -1e-6, "eigenvalue {min_eig:e}");
    ensure!(distance < 1e-8, "direct vs evolved trace distance {distance:e}");

    let u_a = 1e-2;
    let base = SystemParams::from_a_basis(1.0, 1.0, 1.0, u_a, 0.8 * u_a, 0.0);
    let mut worst: f64 = 0.0;
    for r in [2.0, 2.44, 2.85, 3.29, 4.0] {
        let q = base.with_omega(base.omega0 + r * u_a);
        let run = |dim: usize| run_point(&q, LindbladModel::ExactRotated, 0.1 * u_a, dim, &ScanOptions::for_dim(dim));
        let (small, large) = (run(40).map_err(fail)?, run(48).map_err(fail)?);
        let rel = (small.n_avg - large.n_avg).abs() / large.n_avg;
        ensure!(rel < 1e-4, "N 40 -> 48 at {r} U_a changes n_avg by {rel:e}");
        worst = worst.max(rel);
    }
    Ok(format!(
        "trace drift {drift:.1e}, Hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e}, direct vs evolved {distance:.1e}, cutoff change {worst:.1e}"
    ))
}

/// `ẍ + γẋ + ω0²x = (F/m) cos ωt` solved in closed form.
fn damped_linear(p: &SystemParams, x0: f64, v0: f64, t: f64) -> f64 {
    let (w0, w, g) = (p.omega0, p.omega, p.gamma);
    let d = (w0 * w0 - w * w).powi(2) + (g * w).powi(2);
    let a = p.force * (w0 * w0 - w * w) / (p.m * d);
    let b = p.force * g * w / (p.m * d);
    let wd = (w0 * w0 - 0.25 * g * g).sqrt();
    let c = x0 - a;
    let s = (v0 - b * w + 0.5 * g * c) / wd;
    a * (w * t).cos() + b * (w * t).sin() + (-0.5 * g * t).exp() * (c * (wd * t).cos() + s * (wd * t).sin())
}

fn classical_sanity() -> Check {
    let p = SystemParams::new(1.0, 1.0, 0.1, 0.0, 1.0);
    let traj = integrate((1.0, 0.0), 0.0, 1000.0 * drive_period(&p), &p, 1e-10).map_err(fail)?;
    let e0 = energy((1.0, 0.0), &p);
    let drift = traj
        .x
        .iter()
        .zip(&traj.p)
        .map(|(&x, &q)| ((energy((x, q), &p) - e0) / e0).abs())
        .fold(0.0, f64::max);
    ensure!(drift < 1e-8, "energy drift {drift:e}");

    let p = SystemParams::new(1.3, 0.9, 0.0, 0.02, 1.05).with_gamma(0.05);
    let (x0, v0) = (0.3, -0.1);
    let traj = integrate((x0, v0 * p.m), 0.0, 100.0 * drive_period(&p), &p, 1e-11).map_err(fail)?;
    let closed = traj
        .t
        .iter()
        .zip(&traj.x)
        .map(|(&t, &x)| (x - damped_linear(&p, x0, v0, t)).abs())
        .fold(0.0, f64::max);
    ensure!(closed < 1e-8, "damped closed form off by {closed:e}");

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut parseval: f64 = 0.0;
    for _ in 0..20 {
        let len = rng.random_range(1025..4097);
        let t: Vec<f64> = (0..len).map(|k| k as f64 * 0.05).collect();
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let traj = Trajectory::new(t, x.clone(), vec![0.0; len]).map_err(fail)?;
        let spec = periodogram(&traj, Window::Rectangular).map_err(fail)?;
        let total: f64 = spec.psd.iter().sum::<f64>() * spec.bin_width();
        let mean_sq = x[..len - 1].iter().map(|v| v * v).sum::<f64>() / (len - 1) as f64;
        parseval = parseval.max((total - mean_sq).abs() / mean_sq);
    }
    ensure!(parseval < 1e-10, "Parseval mismatch {parseval:e}");

    let mut hyper: f64 = 0.0;
    for _ in 0..1000 {
        let b = bogoliubov_coefficients(rng.random_range(0.1..10.0), rng.random_range(0.1..10.0)).map_err(fail)?;
        hyper = hyper.max((b.mu * b.mu - b.nu * b.nu - 1.0).abs());
    }
    ensure!(hyper < 1e-12, "mu^2 - nu^2 - 1 = {hyper:e}");

    let mut conj: f64 = 0.0;
    for (w0, w, n) in [(1.0, 1.44, 64), (1.0, 0.7, 64), (1.0, 1.2, 96)] {
        let b = bogoliubov_coefficients(w0, w).map_err(fail)?;
        let s = squeeze_operator(b.z, n).map_err(fail)?;
        let a = annihilation(n).map_err(fail)?;
        let rotated = &(&s.op.adjoint() * &a) * &s.op;
        let expected = &a.scale_re(b.mu) - &a.adjoint().scale_re(b.nu);
        let k = s.exact_dim - 1;
        ensure!(k >= 4, "interior block of {k} states at z = {}", b.z);
        let dev = rotated.block_diff(&expected, k).map_err(fail)?;
        ensure!(dev < 1e-8, "conjugation at z = {} off by {dev:e}", b.z);
        conj = conj.max(dev);
    }
    Ok(format!(
        "energy drift {drift:.1e}, damped closed form {closed:.1e}, Parseval {parseval:.1e}, hyperbolic identity {hyper:.1e}, conjugation {conj:.1e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "quantum-to-classical identity", 1, quantum_classical_identity),
        (2, "system-basis mismatch", 1, system_basis_mismatch),
        (3, "frequency sweep", 300, frequency_sweep),
        (4, "driven oscillator spectrum", 30, driven_spectrum),
        (5, "van Vleck assembly", 5, van_vleck_assembly),
        (6, "multiphoton resonances", 1800, mpr_structure),
        (7, "open-system sanity", 120, open_system_sanity),
        (8, "classical sanity", 60, classical_sanity),
    ];
    let mut failed = 0;
    for (k, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed > Duration::from_secs(budget) {
                Err(format!("{detail}; took {elapsed:.1?}, budget {budget} s"))
            } else {
                Ok(detail)
            }
        });
        match result {
            Ok(detail) => println!("PASS [{k}] {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL [{k}] {name}: {why} ({elapsed:.2?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
