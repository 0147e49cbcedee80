//! Lab-frame Duffing dynamics: exact time evolution, lock-in demodulation,
//! adiabatic frequency sweeps and periodograms.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::params::SystemParams;

pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 64;

/// Phase-space samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl Trajectory {
    pub fn new(t: Vec<f64>, x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if t.len() != x.len() || t.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: t.len(),
                got: if t.len() != x.len() { x.len() } else { p.len() },
            });
        }
        if t.len() < 2 {
            return Err(Error::invalid("trajectory needs at least two samples"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("trajectory times must be strictly increasing"));
        }
        Ok(Trajectory { t, x, p })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last_state(&self) -> (f64, f64) {
        let n = self.len() - 1;
        (self.x[n], self.p[n])
    }

    /// Common sample spacing, or an error if the grid is not uniform.
    pub fn uniform_step(&self) -> Result<f64> {
        let n = self.len();
        let dt = (self.t[n - 1] - self.t[0]) / (n - 1) as f64;
        for w in self.t.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
                return Err(Error::invalid("trajectory is not uniformly sampled"));
            }
        }
        Ok(dt)
    }
}

/// Quadratures of `x(t) ≈ u cos ωt + v sin ωt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockInResult {
    pub u: f64,
    pub v: f64,
    #[serde(rename = "X")]
    pub amplitude: f64,
}

impl LockInResult {
    pub fn new(u: f64, v: f64) -> Self {
        LockInResult {
            u,
            v,
            amplitude: u.hypot(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Angular frequencies of the one-sided bins.
    pub omega: Vec<f64>,
    pub psd: Vec<f64>,
    /// Record length the estimate was normalized by.
    pub span: f64,
}

impl Spectrum {
    /// Bin spacing in cycles per unit time; `Σ psd · bin_width` is the
    /// mean square of the windowed signal.
    pub fn bin_width(&self) -> f64 {
        1.0 / self.span
    }

    pub fn bin_of(&self, omega: f64) -> usize {
        let d = self.omega.get(1).copied().unwrap_or(1.0);
        ((omega / d).round() as usize).min(self.omega.len() - 1)
    }

    /// Amplitude of a tone whose energy sits entirely in one bin.
    pub fn tone_amplitude(&self, bin: usize) -> f64 {
        (2.0 * self.psd[bin] / self.span).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Up,
    Down,
}

/// `(dx/dt, dp/dt)` for the damped, driven Duffing oscillator.
pub fn duffing_rhs(state: (f64, f64), t: f64, params: &SystemParams) -> (f64, f64) {
    let (x, p) = state;
    let SystemParams {
        m,
        omega0,
        alpha,
        force,
        omega,
        gamma,
        ..
    } = *params;
    (
        p / m,
        -m * omega0 * omega0 * x - alpha * x * x * x - gamma * p + force * (omega * t).cos(),
    )
}

/// Undriven Hamiltonian `p²/2m + mω0²x²/2 + αx⁴/4`.
pub fn energy(state: (f64, f64), params: &SystemParams) -> f64 {
    let (x, p) = state;
    let x2 = x * x;
    p * p / (2.0 * params.m) + 0.5 * params.m * params.omega0 * params.omega0 * x2
        + 0.25 * params.alpha * x2 * x2
}

/// Ratio of per-step to trajectory tolerance in [`integrate`].
pub const STEP_TOL_FACTOR: f64 = 1e-2;

pub fn drive_period(params: &SystemParams) -> f64 {
    2.0 * PI / params.omega
}

/// Integrates from `t0` to `t1` and returns samples every
/// `period / DEFAULT_SAMPLES_PER_PERIOD`, starting at `t0`.
///
/// `tol` targets the relative accuracy of the whole trajectory, so the
/// per-step tolerance is set [`STEP_TOL_FACTOR`] tighter.
pub fn integrate(
    initial: (f64, f64),
    t0: f64,
    t1: f64,
    params: &SystemParams,
    tol: f64,
) -> Result<Trajectory> {
    integrate_sampled(initial, t0, t1, params, tol, DEFAULT_SAMPLES_PER_PERIOD)
}

/// As [`integrate`] with an explicit number of samples per drive period.
/// The grid ends at the last sample not beyond `t1`.
pub fn integrate_sampled(
    initial: (f64, f64),
    t0: f64,
    t1: f64,
    params: &SystemParams,
    tol: f64,
    samples_per_period: usize,
) -> Result<Trajectory> {
    params.validate()?;
    if !(tol > 1e-14 && tol < 1e-3) {
        return Err(Error::invalid(format!("tolerance must lie in (1e-14, 1e-3), got {tol}")));
    }
    if samples_per_period < 32 {
        return Err(Error::invalid(format!(
            "need at least 32 samples per period, got {samples_per_period}"
        )));
    }
    if !(t1 > t0) {
        return Err(Error::invalid(format!("t1 must exceed t0, got [{t0}, {t1}]")));
    }
    let dt = drive_period(params) / samples_per_period as f64;
    let steps = ((t1 - t0) / dt + 1e-9).floor() as usize;
    if steps < 1 {
        return Err(Error::invalid("interval shorter than one sample spacing"));
    }
    let times: Vec<f64> = (0..=steps).map(|k| t0 + k as f64 * dt).collect();
    let t_end = times[steps];

    let mut x = Vec::with_capacity(times.len());
    let mut p = Vec::with_capacity(times.len());
    let p_ = *params;
    Dopri5::new((tol * STEP_TOL_FACTOR).max(1e-15))
        .with_h_max(dt * 4.0)
        .solve(
            |t, y, dy| {
                let (a, b) = duffing_rhs((y[0], y[1]), t, &p_);
                dy[0] = a;
                dy[1] = b;
            },
            t0,
            &[initial.0, initial.1],
            t_end,
            &times,
            |_, _, y| {
                x.push(y[0]);
                p.push(y[1]);
                Ok(())
            },
        )?;
    Trajectory::new(times, x, p)
}

/// Demodulates the last `n_periods` drive periods of `traj` at `omega`
/// with the trapezoidal rule. The window must start on a sample.
pub fn lockin_amplitude(traj: &Trajectory, omega: f64, n_periods: usize) -> Result<LockInResult> {
    if n_periods < 4 {
        return Err(Error::invalid(format!("need at least 4 periods, got {n_periods}")));
    }
    if !(omega > 0.0) {
        return Err(Error::invalid("demodulation frequency must be positive"));
    }
    let dt = traj.uniform_step()?;
    let window = n_periods as f64 * 2.0 * PI / omega;
    let samples = window / dt;
    let n = samples.round() as usize;
    if (samples - n as f64).abs() > 1e-6 {
        return Err(Error::invalid(
            "lock-in window is not commensurate with the sampling grid",
        ));
    }
    if n + 1 > traj.len() {
        return Err(Error::invalid(format!(
            "window of {n_periods} periods is longer than the trajectory"
        )));
    }
    let start = traj.len() - 1 - n;
    let mut cu = 0.0;
    let mut cv = 0.0;
    for i in start..traj.len() {
        let w = if i == start || i == traj.len() - 1 { 0.5 } else { 1.0 };
        let (s, c) = (omega * traj.t[i]).sin_cos();
        cu += w * traj.x[i] * c;
        cv += w * traj.x[i] * s;
    }
    let scale = 2.0 * dt / window;
    Ok(LockInResult::new(cu * scale, cv * scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub response: LockInResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub settle_periods: usize,
    pub measure_periods: usize,
    pub tol: f64,
    pub samples_per_period: usize,
}

impl SweepOptions {
    /// Settling for `10/γ` time units (rounded up to whole periods) and a
    /// 64-period measurement window.
    pub fn for_params(params: &SystemParams) -> Self {
        let settle = if params.gamma > 0.0 {
            (10.0 / (params.gamma * drive_period(params))).ceil() as usize
        } else {
            0
        };
        SweepOptions {
            settle_periods: settle,
            measure_periods: 64,
            tol: 1e-9,
            samples_per_period: 32,
        }
    }
}

/// A sweep that stopped early; `partial` holds the completed points.
#[derive(Debug)]
pub struct SweepAborted {
    pub partial: Vec<SweepPoint>,
    pub index: usize,
    pub source: Error,
}

impl std::fmt::Display for SweepAborted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sweep aborted at grid index {}: {}", self.index, self.source)
    }
}

impl std::error::Error for SweepAborted {}

impl From<SweepAborted> for Error {
    fn from(e: SweepAborted) -> Self {
        match e.source {
            Error::NonConvergence { time, reason } => Error::NonConvergence {
                time,
                reason: format!("grid index {}: {reason}", e.index),
            },
            other => other,
        }
    }
}

/// Adiabatic sweep of the drive frequency `ω = ω0 + δ` over `delta_grid`,
/// carrying the phase-space state from one point to the next. Each point
/// runs a whole number of drive periods, so restarting the clock at zero
/// keeps the drive phase continuous.
pub fn sweep_response(
    params: &SystemParams,
    delta_grid: &[f64],
    direction: SweepDirection,
    options: &SweepOptions,
) -> std::result::Result<Vec<SweepPoint>, SweepAborted> {
    let abort = |partial: Vec<SweepPoint>, index: usize, source: Error| SweepAborted {
        partial,
        index,
        source,
    };
    if let Err(e) = params.validate() {
        return Err(abort(vec![], 0, e));
    }
    let monotone = delta_grid.windows(2).all(|w| match direction {
        SweepDirection::Up => w[1] > w[0],
        SweepDirection::Down => w[1] < w[0],
    });
    if !monotone {
        return Err(abort(
            vec![],
            0,
            Error::invalid(format!("detuning grid is not monotone {direction:?}")),
        ));
    }
    if !(params.gamma > 0.0) {
        return Err(abort(
            vec![],
            0,
            Error::invalid("stationary sweeps need positive damping"),
        ));
    }

    let mut out = Vec::with_capacity(delta_grid.len());
    let mut state = (0.0, 0.0);
    for (i, &delta) in delta_grid.iter().enumerate() {
        let p = params.with_omega(params.omega0 + delta);
        if let Err(e) = p.validate() {
            return Err(abort(out, i, e));
        }
        let period = drive_period(&p);
        let min_settle = 5.0 / (p.gamma * period);
        if (options.settle_periods as f64) < min_settle {
            return Err(abort(
                out,
                i,
                Error::invalid(format!(
                    "settle_periods = {} is below 5/(γ·period) = {min_settle:.1}",
                    options.settle_periods
                )),
            ));
        }
        let total = options.settle_periods + options.measure_periods;
        // Settle without storing a dense record, then measure.
        let settled = match run_periods(state, &p, options.settle_periods, options) {
            Ok(s) => s,
            Err(e) => return Err(abort(out, i, e)),
        };
        let traj = match integrate_sampled(
            settled,
            0.0,
            options.measure_periods as f64 * period,
            &p,
            options.tol,
            options.samples_per_period,
        ) {
            Ok(t) => t,
            Err(e) => return Err(abort(out, i, e)),
        };
        debug_assert!(total >= options.measure_periods);
        let response = match lockin_amplitude(&traj, p.omega, options.measure_periods) {
            Ok(r) => r,
            Err(e) => return Err(abort(out, i, e)),
        };
        state = traj.last_state();
        out.push(SweepPoint { delta, response });
    }
    Ok(out)
}

fn run_periods(
    state: (f64, f64),
    params: &SystemParams,
    periods: usize,
    options: &SweepOptions,
) -> Result<(f64, f64)> {
    if periods == 0 {
        return Ok(state);
    }
    let period = drive_period(params);
    let p = *params;
    let y = Dopri5::new(options.tol)
        .with_h_max(period / 8.0)
        .solve(
            |t, y, dy| {
                let (a, b) = duffing_rhs((y[0], y[1]), t, &p);
                dy[0] = a;
                dy[1] = b;
            },
            0.0,
            &[state.0, state.1],
            periods as f64 * period,
            &[],
            |_, _, _| Ok(()),
        )?;
    Ok((y[0], y[1]))
}

/// One-sided periodogram of `x(t)`.
///
/// With `X_k = dt Σ w_j x_j e^{-2πi jk/M}` over the first `M = len − 1`
/// samples (the last sample closes the record), the estimate is
/// `2|X_k|²/span` for interior bins and `|X_k|²/span` at DC and Nyquist,
/// with `span = M dt`. A tone `A cos(Ωt)` on a bin therefore carries
/// `A² span / 2`, and `Σ psd / span` equals the mean square of the
/// windowed record.
pub fn periodogram(traj: &Trajectory, window: Window) -> Result<Spectrum> {
    let dt = traj.uniform_step()?;
    let m = traj.len() - 1;
    if m < 1 << 10 {
        return Err(Error::invalid(format!("need at least 1024 samples, got {m}")));
    }
    let mut buf: Vec<Complex64> = (0..m)
        .map(|j| {
            let w = match window {
                Window::Rectangular => 1.0,
                Window::Hann => 0.5 - 0.5 * (2.0 * PI * j as f64 / m as f64).cos(),
            };
            Complex64::new(w * traj.x[j] * dt, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    let span = m as f64 * dt;
    let bins = m / 2 + 1;
    let d_omega = 2.0 * PI / span;
    let mut omega = Vec::with_capacity(bins);
    let mut psd = Vec::with_capacity(bins);
    for (k, c) in buf.iter().take(bins).enumerate() {
        let edge = k == 0 || (m % 2 == 0 && k == m / 2);
        let factor = if edge { 1.0 } else { 2.0 };
        omega.push(k as f64 * d_omega);
        psd.push(factor * c.norm_sqr() / span);
    }
    Ok(Spectrum { omega, psd, span })
}

/// Closed-form motion of the lossless driven harmonic oscillator,
/// `x(t) = A_ω cos ωt + C cos ω0 t + S sin ω0 t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivenHoTones {
    pub omega: f64,
    pub omega0: f64,
    pub amp_drive: f64,
    pub cos_bare: f64,
    pub sin_bare: f64,
    pub m: f64,
}

impl DrivenHoTones {
    pub fn position(&self, t: f64) -> f64 {
        self.amp_drive * (self.omega * t).cos()
            + self.cos_bare * (self.omega0 * t).cos()
            + self.sin_bare * (self.omega0 * t).sin()
    }

    pub fn momentum(&self, t: f64) -> f64 {
        self.m
            * (-self.amp_drive * self.omega * (self.omega * t).sin()
                + self.omega0
                    * (-self.cos_bare * (self.omega0 * t).sin()
                        + self.sin_bare * (self.omega0 * t).cos()))
    }

    pub fn bare_amplitude(&self) -> f64 {
        self.cos_bare.hypot(self.sin_bare)
    }
}

pub fn driven_ho_exact(params: &SystemParams, initial: (f64, f64)) -> Result<DrivenHoTones> {
    params.validate()?;
    if params.alpha != 0.0 || params.gamma != 0.0 {
        return Err(Error::invalid("closed form needs alpha = 0 and gamma = 0"));
    }
    if params.omega == params.omega0 {
        return Err(Error::invalid("resonant drive grows secularly"));
    }
    let SystemParams {
        m,
        omega0,
        force,
        omega,
        ..
    } = *params;
    let amp = force / (m * (omega0 * omega0 - omega * omega));
    Ok(DrivenHoTones {
        omega,
        omega0,
        amp_drive: amp,
        cos_bare: initial.0 - amp,
        sin_bare: initial.1 / (m * omega0),
        m,
    })
}

/// Stationary amplitude of the damped driven linear oscillator,
/// `F / (m √((ω0² − ω²)² + γ²ω²))`.
pub fn linear_response_amplitude(params: &SystemParams) -> f64 {
    let SystemParams {
        m,
        omega0,
        force,
        omega,
        gamma,
        ..
    } = *params;
    let d = omega0 * omega0 - omega * omega;
    force / (m * (d * d + gamma * gamma * omega * omega).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tone(amp: f64, omega: f64, harmonic: f64, periods: usize, spp: usize) -> Trajectory {
        let dt = 2.0 * PI / omega / spp as f64;
        let n = periods * spp + 1;
        let t: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let x = t.iter().map(|&t| amp * (harmonic * omega * t).cos()).collect();
        Trajectory::new(t, x, vec![0.0; n]).unwrap()
    }

    #[test]
    fn rhs_direct_evaluation() {
        let p = SystemParams::new(1.0, 1.0, 0.01, 0.02, 1.1);
        assert_eq!(duffing_rhs((0.0, 0.0), 3.0, &p.with_force(0.0)), (0.0, 0.0));
        let (dx, dp) = duffing_rhs((1.0, 0.0), 0.0, &p);
        assert_eq!(dx, 0.0);
        assert_relative_eq!(dp, -0.99, max_relative = 1e-15);
    }

    #[test]
    fn free_oscillator_is_cosine() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 0.0, 1.0);
        let traj = integrate((1.0, 0.0), 0.0, 200.0 * PI, &p, 1e-12).unwrap();
        let worst = traj
            .t
            .iter()
            .zip(&traj.x)
            .map(|(t, x)| (x - t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn lockin_pure_tone_and_harmonic() {
        let tr = tone(3.0, 1.3, 1.0, 8, 64);
        let r = lockin_amplitude(&tr, 1.3, 8).unwrap();
        assert_relative_eq!(r.u, 3.0, max_relative = 1e-12);
        assert!(r.v.abs() < 1e-12);
        assert_relative_eq!(r.amplitude, 3.0, max_relative = 1e-12);
        let tr2 = tone(1.0, 1.3, 2.0, 8, 64);
        assert!(lockin_amplitude(&tr2, 1.3, 8).unwrap().amplitude < 1e-10);
    }

    #[test]
    fn lockin_window_too_long() {
        let tr = tone(1.0, 1.0, 1.0, 4, 32);
        assert!(lockin_amplitude(&tr, 1.0, 5).is_err());
    }

    #[test]
    fn periodogram_tone_on_bin() {
        let tr = tone(2.0, 1.0, 1.0, 32, 64);
        let s = periodogram(&tr, Window::Rectangular).unwrap();
        let k = s.bin_of(1.0);
        assert_relative_eq!(s.omega[k], 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.psd[k], 4.0 * s.span / 2.0, max_relative = 1e-12);
        assert_relative_eq!(s.tone_amplitude(k), 2.0, max_relative = 1e-12);
        let leak = s
            .psd
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        assert!(leak < 1e-20 * s.psd[k], "leak {leak}");
    }

    #[test]
    fn periodogram_rejects_short_and_nonuniform() {
        assert!(periodogram(&tone(1.0, 1.0, 1.0, 4, 32), Window::Rectangular).is_err());
        let mut tr = tone(1.0, 1.0, 1.0, 64, 32);
        tr.t[5] += 1e-3;
        assert!(periodogram(&tr, Window::Hann).is_err());
    }

    #[test]
    fn driven_ho_transient_free() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 0.01, 1.4);
        let amp = driven_ho_exact(&p, (0.0, 0.0)).unwrap().amp_drive;
        let t = driven_ho_exact(&p, (amp, 0.0)).unwrap();
        assert_eq!(t.bare_amplitude(), 0.0);
        let z = driven_ho_exact(&p, (0.0, 0.0)).unwrap();
        assert_eq!(z.cos_bare, -z.amp_drive);
        assert_eq!(z.sin_bare, 0.0);
        assert!(driven_ho_exact(&p.with_omega(1.0), (0.0, 0.0)).is_err());
    }

    #[test]
    fn sweep_rejects_non_monotone_grid() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 0.01, 1.0).with_gamma(0.1);
        let opts = SweepOptions::for_params(&p);
        let err = sweep_response(&p, &[0.0, 0.1, 0.05], SweepDirection::Up, &opts).unwrap_err();
        assert_eq!(err.index, 0);
    }
}
