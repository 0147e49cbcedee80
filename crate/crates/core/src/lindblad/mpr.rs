//! Multiphoton-resonance scans: stationary photon number against detuning
//! and drive, peak extraction, and the Kerr-model resonance conditions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::floquet::{periodic_steady_state, PeriodicOptions};
use super::{cutoff_tail, evolve_with, liouvillian, steady_state_direct, Generator};
use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockOperator};
use crate::params::{compute_rwa_coefficients, BasisChoice, BasisKind, SystemParams};
use crate::vanvleck::{effective_hamiltonian, fourier_components, FourierComponents};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LindbladModel {
    /// Full time-periodic `H̃(b, t)`, loss on `b`.
    ExactRotated,
    /// First-order effective Hamiltonian and loss in the system-photon basis.
    EffectiveOrder1A,
    EffectiveOrder1B,
    EffectiveOrder2B,
}

impl LindbladModel {
    pub fn basis_kind(self) -> BasisKind {
        match self {
            LindbladModel::EffectiveOrder1A => BasisKind::SystemPhotons,
            _ => BasisKind::PumpPhotons,
        }
    }
}

/// Stationary result for one parameter point.
#[derive(Debug, Clone)]
pub struct LindbladRun {
    pub model: LindbladModel,
    pub kappa: f64,
    pub dim: usize,
    /// Evolution time for time-domain runs; `None` when the stationary
    /// state was solved for directly.
    pub t_final: Option<f64>,
    /// Period-averaged photon number in the model's basis.
    pub n_avg: f64,
    /// Period-averaged (or final) state.
    pub rho_final: DensityMatrix,
    /// Occupation of the four highest retained number states.
    pub tail: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub periodic: PeriodicOptions,
    /// Largest tolerated occupation of the top four states.
    pub tail_tol: f64,
    /// States added per cutoff refinement.
    pub dim_step: usize,
    pub max_dim: usize,
}

impl ScanOptions {
    pub fn for_dim(dim: usize) -> Self {
        ScanOptions {
            periodic: PeriodicOptions::default(),
            tail_tol: 1e-6,
            dim_step: 8,
            max_dim: dim + 16,
        }
    }
}

fn model_components(params: &SystemParams, model: LindbladModel, dim: usize) -> Result<FourierComponents> {
    let basis = BasisChoice::of_kind(model.basis_kind(), params);
    fourier_components(params, &basis, dim)
}

fn model_hamiltonian(fc: &FourierComponents, model: LindbladModel, params: &SystemParams) -> Result<FockOperator> {
    let order = match model {
        LindbladModel::EffectiveOrder2B => 2,
        _ => 1,
    };
    Ok(effective_hamiltonian(fc, order, params.hbar, params.omega)?.matrix)
}

/// Stationary photon number of one model at one parameter point, solved
/// directly (no time stepping).
pub fn run_point(
    params: &SystemParams,
    model: LindbladModel,
    kappa: f64,
    dim: usize,
    options: &ScanOptions,
) -> Result<LindbladRun> {
    let fc = model_components(params, model, dim)?;
    let rho = match model {
        LindbladModel::ExactRotated => {
            periodic_steady_state(&fc, kappa, params.hbar, &options.periodic)?.average
        }
        _ => {
            let h = model_hamiltonian(&fc, model, params)?;
            steady_state_direct(&liouvillian(&h, kappa, params.hbar)?)?
        }
    };
    let n_avg = fock::expectation(&rho, &fock::number(dim)?)?.re;
    let tail = cutoff_tail(&rho);
    Ok(LindbladRun {
        model,
        kappa,
        dim,
        t_final: None,
        n_avg,
        rho_final: rho,
        tail,
        converged: tail < options.tail_tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainOptions {
    pub tol: f64,
    pub samples_per_period: usize,
    /// Periods per averaging window.
    pub window_periods: usize,
    /// Successive window averages must agree to this relative tolerance.
    pub rel_tol: f64,
    pub max_time: f64,
}

/// Stationary photon number by direct time evolution from `rho0`, averaged
/// over successive windows of drive periods until two agree.
pub fn run_point_time_domain(
    params: &SystemParams,
    model: LindbladModel,
    kappa: f64,
    rho0: &DensityMatrix,
    options: &TimeDomainOptions,
) -> Result<LindbladRun> {
    if options.window_periods < 4 || options.samples_per_period < 16 {
        return Err(Error::invalid(
            "windows need at least 4 periods of 16 samples each",
        ));
    }
    let dim = rho0.dim();
    let fc = model_components(params, model, dim)?;
    let h_static;
    let generator = match model {
        LindbladModel::ExactRotated => Generator::Periodic {
            components: &fc,
            kappa,
            hbar: params.hbar,
        },
        _ => {
            h_static = model_hamiltonian(&fc, model, params)?;
            Generator::Static {
                hamiltonian: &h_static,
                kappa,
                hbar: params.hbar,
            }
        }
    };
    let number = fock::number(dim)?;
    let period = 2.0 * PI / params.omega;
    let per_window = options.window_periods * options.samples_per_period;
    let dt = period / options.samples_per_period as f64;

    let mut state = rho0.clone();
    let mut t0 = 0.0;
    let mut previous: Option<f64> = None;
    loop {
        let times: Vec<f64> = (1..=per_window).map(|k| t0 + k as f64 * dt).collect();
        let mut values = Vec::with_capacity(per_window + 1);
        values.push(fock::expectation(&state, &number)?.re);
        let (end, _) = evolve_with(&state, &generator, t0, &times, options.tol, |_, _, r| {
            values.push(fock::expectation(r, &number).map(|z| z.re).unwrap_or(f64::NAN))
        })?;
        let avg = (0.5 * (values[0] + values[per_window]) + values[1..per_window].iter().sum::<f64>())
            / per_window as f64;
        state = end;
        t0 = times[per_window - 1];
        let settled = previous
            .map(|p| (avg - p).abs() <= options.rel_tol * avg.abs().max(f64::MIN_POSITIVE))
            .unwrap_or(false);
        if settled || t0 >= options.max_time {
            let tail = cutoff_tail(&state);
            return Ok(LindbladRun {
                model,
                kappa,
                dim,
                t_final: Some(t0),
                n_avg: avg,
                rho_final: state,
                tail,
                converged: settled,
            });
        }
        previous = Some(avg);
    }
}

/// Stationary photon numbers on a detuning × drive grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MprScan {
    pub model: LindbladModel,
    pub kappa: f64,
    /// `ω − ω0` values (rows).
    pub delta: Vec<f64>,
    /// Lab-frame drive amplitudes (columns).
    pub force: Vec<f64>,
    pub n_avg: Vec<Vec<f64>>,
    /// False where the cutoff could not be made to hold.
    pub converged: Vec<Vec<bool>>,
    pub dim_used: Vec<Vec<usize>>,
}

impl MprScan {
    /// `(δ, n_avg)` along one drive column.
    pub fn curve(&self, force_index: usize) -> Vec<(f64, f64)> {
        self.delta
            .iter()
            .zip(&self.n_avg)
            .map(|(d, row)| (*d, row[force_index]))
            .collect()
    }
}

/// Scans `delta_grid × force_grid` in parallel. Points whose cutoff tail
/// exceeds `options.tail_tol` are re-run with `dim_step` more states up to
/// `max_dim`, then flagged if still unresolved.
pub fn mpr_scan(
    base: &SystemParams,
    delta_grid: &[f64],
    force_grid: &[f64],
    model: LindbladModel,
    kappa: f64,
    dim: usize,
    options: &ScanOptions,
) -> Result<MprScan> {
    base.validate()?;
    if !(kappa > 0.0) {
        return Err(Error::invalid("scans need a positive loss rate"));
    }
    let cells: Vec<(usize, usize)> = (0..delta_grid.len())
        .flat_map(|i| (0..force_grid.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<LindbladRun>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let p = base
                .with_omega(base.omega0 + delta_grid[i])
                .with_force(force_grid[j]);
            let mut n = dim;
            loop {
                let run = run_point(&p, model, kappa, n, options)?;
                if run.converged || n + options.dim_step > options.max_dim {
                    return Ok(run);
                }
                n += options.dim_step;
            }
        })
        .collect();

    let cols = force_grid.len();
    let mut n_avg = vec![vec![0.0; cols]; delta_grid.len()];
    let mut converged = vec![vec![false; cols]; delta_grid.len()];
    let mut dim_used = vec![vec![0; cols]; delta_grid.len()];
    for (&(i, j), r) in cells.iter().zip(results) {
        let r = r?;
        n_avg[i][j] = r.n_avg;
        converged[i][j] = r.converged;
        dim_used[i][j] = r.dim;
    }
    Ok(MprScan {
        model,
        kappa,
        delta: delta_grid.to_vec(),
        force: force_grid.to_vec(),
        n_avg,
        converged,
        dim_used,
    })
}

/// Peak positions of a sampled curve, refined by a parabola through each
/// local maximum and its neighbours. Peaks whose prominence is below 5% of
/// the curve maximum are dropped.
pub fn mpr_peaks(curve: &[(f64, f64)]) -> Result<Vec<f64>> {
    if curve.len() < 5 {
        return Err(Error::invalid(format!("need at least 5 points, got {}", curve.len())));
    }
    let y: Vec<f64> = curve.iter().map(|p| p.1).collect();
    let y_max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut peaks = Vec::new();
    for i in 1..y.len() - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        let mut left_min = y[i];
        for k in (0..i).rev() {
            if y[k] > y[i] {
                break;
            }
            left_min = left_min.min(y[k]);
        }
        let mut right_min = y[i];
        for &v in &y[i + 1..] {
            if v > y[i] {
                break;
            }
            right_min = right_min.min(v);
        }
        let prominence = y[i] - left_min.max(right_min);
        if prominence < 0.05 * y_max {
            continue;
        }
        let (x0, y0) = curve[i - 1];
        let (x1, y1) = curve[i];
        let (x2, y2) = curve[i + 1];
        let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        peaks.push(if den == 0.0 { x1 } else { x1 - 0.5 * num / den });
    }
    Ok(peaks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MPRConvention {
    /// `Δ_c / U_c = (n − 1)/2`.
    Standard,
    /// `E_n = E_0` on the Kerr diagonal: `Δ_c / U_c = (n + 1)/2`.
    DiagonalDegeneracy,
}

impl MPRConvention {
    fn ratio(self, n: u32) -> f64 {
        match self {
            MPRConvention::Standard => (n as f64 - 1.0) / 2.0,
            MPRConvention::DiagonalDegeneracy => (n as f64 + 1.0) / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MPRPrediction {
    pub n: u32,
    /// Predicted `ω − ω0`.
    pub delta_a: f64,
    pub convention: MPRConvention,
}

/// Drive frequency at which the `n`-th resonance condition holds in the
/// given basis, reported as `ω − ω0`.
pub fn mpr_predicted(
    params: &SystemParams,
    basis: &BasisChoice,
    n: u32,
    convention: MPRConvention,
) -> Result<MPRPrediction> {
    params.validate()?;
    if n < 1 {
        return Err(Error::invalid("photon index must be at least 1"));
    }
    let r = convention.ratio(n);
    let omega0 = params.omega0;
    let residual = |omega: f64| -> Result<f64> {
        let p = params.with_omega(omega);
        let b = match basis.kind {
            BasisKind::Custom => *basis,
            kind => BasisChoice::of_kind(kind, &p),
        };
        let k = compute_rwa_coefficients(&p, &b)?;
        Ok(k.delta_c - k.u_c * r)
    };
    let mut lo = 1e-9 * omega0;
    let mut hi = 4.0 * omega0;
    let (f_lo, f_hi) = (residual(lo)?, residual(hi)?);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NotBracketed(format!(
            "resonance {n} has no root for omega in (0, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MPRPrediction {
        n,
        delta_a: 0.5 * (lo + hi) - omega0,
        convention,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kerr() -> SystemParams {
        SystemParams::from_a_basis(1.0, 1.0, 1.0, 0.01, 0.008, 0.0)
    }

    #[test]
    fn first_resonance_at_zero_detuning() {
        let p = kerr();
        for basis in [BasisChoice::system_photons(&p), BasisChoice::pump_photons(&p)] {
            let d = mpr_predicted(&p, &basis, 1, MPRConvention::Standard).unwrap();
            assert!(d.delta_a.abs() < 1e-14, "{d:?}");
        }
    }

    #[test]
    fn a_basis_equidistant() {
        let p = kerr();
        let b = BasisChoice::system_photons(&p);
        let d: Vec<f64> = (1..6)
            .map(|n| mpr_predicted(&p, &b, n, MPRConvention::Standard).unwrap().delta_a)
            .collect();
        for w in d.windows(2) {
            assert!((w[1] - w[0] - 0.005).abs() < 1e-14);
        }
    }

    #[test]
    fn parabola_vertex_recovered() {
        let curve: Vec<(f64, f64)> = (0..11)
            .map(|i| {
                let x = 0.1 * i as f64;
                (x, 1.0 - (x - 0.537).powi(2))
            })
            .collect();
        let peaks = mpr_peaks(&curve).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0] - 0.537).abs() < 1e-12);
    }

    #[test]
    fn monotone_curve_has_no_peaks() {
        let curve: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, (i as f64).sqrt())).collect();
        assert!(mpr_peaks(&curve).unwrap().is_empty());
        assert!(mpr_peaks(&curve[..4]).is_err());
    }
}
