//! Canonical figure runs.

use serde_json::{Map, Value};

use super::config::{compact, Direction, Figure, Model, Options, RunConfig, WindowArg};
use super::{a_kerr, delta_grid, lindblad_scan, ordered_grid, settle_for, Output};
use crate::classical::{self, Spectrum, SweepOptions, Trajectory};
use crate::error::{Error, Result};
use crate::kb;
use crate::lindblad::{self, MPRConvention, PeriodicOptions};
use crate::meanfield;
use crate::params::{BasisChoice, SystemParams};

/// Lab-frame drive amplitude for a system-photon pump strength.
fn lab_force(p: &SystemParams, f_a: f64) -> f64 {
    2.0 * f_a * (2.0 * p.m * p.omega0 * p.hbar).sqrt()
}

fn a_pump(p: &SystemParams, force: f64) -> f64 {
    force / (2.0 * (2.0 * p.m * p.omega0 * p.hbar).sqrt())
}

/// Reference parameters of each figure as a config layer.
pub(super) fn canonical(which: Figure) -> Map<String, Value> {
    let p = match which {
        Figure::Fig2a => SystemParams::from_a_basis(1.0, 1.0, 1.0, 1e-2, 1e-4, 0.0).with_gamma(2.5e-3),
        Figure::Fig2c => SystemParams::from_a_basis(1.0, 1.0, 1.0, 0.0, 3.5e-3, 0.4),
        Figure::Fig3b | Figure::Fig3c => SystemParams::from_a_basis(1.0, 1.0, 1.0, 1e-2, 0.8e-2, 0.0),
    };
    compact(serde_json::to_value(p).expect("params serialize"))
}

pub(super) fn fill_defaults(cfg: &mut RunConfig) -> Result<()> {
    let p = cfg.params;
    let which = cfg
        .options
        .figure
        .ok_or_else(|| Error::invalid("figure id missing"))?;
    let u_a = a_kerr(&p)?;
    let o = &mut cfg.options;
    match which {
        Figure::Fig2a => {
            o.delta_min.get_or_insert(-20.0 * u_a);
            o.delta_max.get_or_insert(100.0 * u_a);
            o.n_points.get_or_insert(121);
            o.direction.get_or_insert(Direction::Down);
            let settle = settle_for(&p, o.delta_max.unwrap());
            o.settle_periods.get_or_insert(settle);
            o.measure_periods.get_or_insert(64);
            o.samples_per_period.get_or_insert(32);
            o.tol.get_or_insert(1e-9);
        }
        Figure::Fig2c => {
            o.periods.get_or_insert(512);
            o.samples_per_period.get_or_insert(32);
            o.window.get_or_insert(WindowArg::Hann);
            o.x0.get_or_insert(0.0);
            o.p0.get_or_insert(0.0);
            o.tol.get_or_insert(1e-10);
        }
        Figure::Fig3b => {
            o.delta_min.get_or_insert(-u_a);
            o.delta_max.get_or_insert(5.0 * u_a);
            o.n_points.get_or_insert(61);
            o.force_min.get_or_insert(0.0);
            o.force_max.get_or_insert(lab_force(&p, 1.2 * u_a));
            o.force_steps.get_or_insert(13);
            o.kappa.get_or_insert(0.1 * u_a);
            o.dim.get_or_insert(32);
            o.model.get_or_insert(Model::Eff1b);
            o.tol.get_or_insert(PeriodicOptions::default().tol);
        }
        Figure::Fig3c => {
            o.delta_min.get_or_insert(0.0);
            o.delta_max.get_or_insert(4.0 * u_a);
            o.n_points.get_or_insert(200);
            o.kappa.get_or_insert(0.1 * u_a);
            o.dim.get_or_insert(40);
            o.model.get_or_insert(Model::Exact);
            o.tol.get_or_insert(PeriodicOptions::default().tol);
            o.n_max.get_or_insert(8);
        }
    }
    Ok(())
}

pub(super) fn run(cfg: &RunConfig) -> Result<Output> {
    match cfg.options.figure.unwrap() {
        Figure::Fig2a => fig2a(&cfg.params, &cfg.options),
        Figure::Fig2c => fig2c(&cfg.params, &cfg.options),
        Figure::Fig3b => fig3b(&cfg.params, &cfg.options),
        Figure::Fig3c => fig3c(&cfg.params, &cfg.options),
    }
}

/// Largest stable fixed-point amplitude, NaN when none is stable.
fn high_branch(states: &[(kb::SlowFlowState, bool)]) -> f64 {
    states
        .iter()
        .filter(|s| s.1)
        .map(|s| s.0.amplitude())
        .fold(f64::NAN, f64::max)
}

fn fig2a(p: &SystemParams, o: &Options) -> Result<Output> {
    let u_a = a_kerr(p)?;
    let grid = delta_grid(o)?;
    let direction = o.direction.unwrap().into();
    let options = SweepOptions {
        settle_periods: o.settle_periods.unwrap(),
        measure_periods: o.measure_periods.unwrap(),
        tol: o.tol.unwrap(),
        samples_per_period: o.samples_per_period.unwrap(),
    };
    let mut sweep = classical::sweep_response(p, &ordered_grid(&grid, direction), direction, &options)?;
    sweep.sort_by(|a, b| a.delta.total_cmp(&b.delta));

    let mut csv = String::from("delta,delta_over_u,exact_X,kb_X,rwa_a_X,rwa_b_X\n");
    for pt in sweep {
        let q = p.with_omega(p.omega0 + pt.delta);
        let kb_states: Vec<_> = kb::steady_states(&q)?
            .into_iter()
            .map(|s| (s.state, s.stable))
            .collect();
        let limit = |basis: BasisChoice| -> Result<f64> {
            let vf = meanfield::basis_classical_limit(&q, &basis)?;
            Ok(high_branch(&meanfield::stationary_amplitudes(&vf, q.gamma)?))
        };
        csv += &format!(
            "{},{},{},{},{},{}\n",
            pt.delta,
            pt.delta / u_a,
            pt.response.amplitude,
            high_branch(&kb_states),
            limit(BasisChoice::system_photons(&q))?,
            limit(BasisChoice::pump_photons(&q))?,
        );
    }
    Ok(Output::Csv(csv))
}

pub(super) fn trajectory(p: &SystemParams, o: &Options) -> Result<Trajectory> {
    let t1 = o.periods.unwrap() as f64 * classical::drive_period(p);
    classical::integrate_sampled(
        (o.x0.unwrap(), o.p0.unwrap()),
        0.0,
        t1,
        p,
        o.tol.unwrap(),
        o.samples_per_period.unwrap(),
    )
}

pub(super) fn psd(p: &SystemParams, o: &Options) -> Result<Spectrum> {
    classical::periodogram(&trajectory(p, o)?, o.window.unwrap().into())
}

fn fig2c(p: &SystemParams, o: &Options) -> Result<Output> {
    let traj = trajectory(p, o)?;
    let window = o.window.unwrap().into();
    let numeric = classical::periodogram(&traj, window)?;
    let initial = (o.x0.unwrap(), o.p0.unwrap());
    let sampled = |f: &dyn Fn(f64) -> f64| -> Result<Spectrum> {
        let x: Vec<f64> = traj.t.iter().map(|&t| f(t)).collect();
        let t = Trajectory::new(traj.t.clone(), x, vec![0.0; traj.t.len()])?;
        classical::periodogram(&t, window)
    };
    let exact = classical::driven_ho_exact(p, initial)?;
    let a = meanfield::linear_tones(p, &BasisChoice::system_photons(p), initial)?;
    let b = meanfield::linear_tones(p, &BasisChoice::pump_photons(p), initial)?;
    let s_exact = sampled(&|t| exact.position(t))?;
    let s_a = sampled(&|t| a.position(t))?;
    let s_b = sampled(&|t| b.position(t))?;
    let mut csv = String::from("omega_response,psd,psd_exact,psd_rwa_a,psd_rwa_b\n");
    for k in 0..numeric.omega.len() {
        csv += &format!(
            "{},{},{},{},{}\n",
            numeric.omega[k], numeric.psd[k], s_exact.psd[k], s_a.psd[k], s_b.psd[k]
        );
    }
    Ok(Output::Csv(csv))
}

fn fig3b(p: &SystemParams, o: &Options) -> Result<Output> {
    let u_a = a_kerr(p)?;
    let scan = lindblad_scan(p, o)?;
    let mut csv = String::from("delta,force,delta_over_u,fa_over_u,n_avg,converged\n");
    for (i, d) in scan.delta.iter().enumerate() {
        for (j, f) in scan.force.iter().enumerate() {
            csv += &format!(
                "{},{},{},{},{},{}\n",
                d,
                f,
                d / u_a,
                a_pump(p, *f) / u_a,
                scan.n_avg[i][j],
                scan.converged[i][j]
            );
        }
    }
    Ok(Output::Csv(csv))
}

fn fig3c(p: &SystemParams, o: &Options) -> Result<Output> {
    let u_a = a_kerr(p)?;
    let scan = lindblad_scan(p, o)?;
    let curve = scan.curve(0);
    let mut csv = String::from("series,delta_over_u,value\n");
    for (d, n) in &curve {
        csv += &format!("exact,{},{}\n", d / u_a, n);
    }
    for (k, d) in lindblad::mpr_peaks(&curve)?.iter().enumerate() {
        csv += &format!("exact_peak,{},{}\n", d / u_a, k + 1);
    }
    let series = [
        ("a_eq6", BasisChoice::system_photons(p), MPRConvention::Standard),
        ("b_eq6", BasisChoice::pump_photons(p), MPRConvention::Standard),
        ("a_degeneracy", BasisChoice::system_photons(p), MPRConvention::DiagonalDegeneracy),
        ("b_degeneracy", BasisChoice::pump_photons(p), MPRConvention::DiagonalDegeneracy),
    ];
    for (name, basis, convention) in series {
        for n in 1..=o.n_max.unwrap() {
            match lindblad::mpr_predicted(p, &basis, n, convention) {
                Ok(pred) => csv += &format!("{},{},{}\n", name, pred.delta_a / u_a, n),
                Err(Error::NotBracketed(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Output::Csv(csv))
}
