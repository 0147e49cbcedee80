//! Open-system dynamics with single-photon loss,
//! `dρ/dt = −(i/ħ)[H, ρ] + κ(aρa† − ½{a†a, ρ})`.
//!
//! Density matrices are vectorized by stacking columns, so entry `(i, j)`
//! of `ρ` sits at index `i + N j`.

mod floquet;
mod gmres;
mod mpr;

pub use floquet::{periodic_steady_state, PeriodicOptions, PeriodicSteadyState};
pub use gmres::{gmres, GmresInfo};
pub use mpr::{
    mpr_peaks, mpr_predicted, mpr_scan, run_point, run_point_time_domain, LindbladModel,
    LindbladRun, MPRConvention, MPRPrediction, MprScan, ScanOptions, TimeDomainOptions,
};

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockOperator};
use crate::linalg::{self, c, CMat};
use crate::ode::Dopri5;
use crate::vanvleck::FourierComponents;

pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;
pub const NEGATIVITY_LIMIT: f64 = 1e-6;

/// Dense `N² × N²` generator acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub dim: usize,
    pub matrix: CMat,
}

impl Superoperator {
    pub fn apply(&self, rho: &FockOperator) -> Result<FockOperator> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.dim(),
            });
        }
        let v = vectorize(rho);
        let out = &self.matrix * &v;
        unvectorize(self.dim, |k| out[(k, 0)])
    }
}

pub(crate) fn vectorize(op: &FockOperator) -> CMat {
    let n = op.dim();
    Mat::from_fn(n * n, 1, |k, _| op.get(k % n, k / n))
}

pub(crate) fn unvectorize(n: usize, f: impl Fn(usize) -> c64) -> Result<FockOperator> {
    FockOperator::from_fn(n, |i, j| f(i + n * j))
}

fn check_hamiltonian(h: &FockOperator, kappa: f64, hbar: f64) -> Result<()> {
    let dev = h.hermiticity_deviation();
    let scale = linalg::max_abs(h.matrix()).max(1.0);
    if dev > HERMITIAN_INPUT_TOL * scale {
        return Err(Error::NonHermitian(dev));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!("loss rate must be non-negative, got {kappa}")));
    }
    if !(hbar > 0.0) {
        return Err(Error::invalid("hbar must be positive"));
    }
    Ok(())
}

/// Dense Liouvillian of `H` with loss rate `kappa`.
pub fn liouvillian(h: &FockOperator, kappa: f64, hbar: f64) -> Result<Superoperator> {
    check_hamiltonian(h, kappa, hbar)?;
    let n = h.dim();
    let d = n * n;
    let mut l = Mat::<c64>::zeros(d, d);
    let mi = c(0.0, -1.0 / hbar);
    // −(i/ħ)(I⊗H − Hᵀ⊗I)
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for k in 0..n {
                l[(row, k + n * j)] += mi * h.get(i, k);
                l[(row, i + n * k)] -= mi * h.get(k, j);
            }
        }
    }
    // κ(ā⊗a − ½ I⊗n − ½ nᵀ⊗I)
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            l[(row, row)] -= c(0.5 * kappa * (i + j) as f64, 0.0);
            if i + 1 < n && j + 1 < n {
                let w = kappa * (((i + 1) * (j + 1)) as f64).sqrt();
                l[(row, (i + 1) + n * (j + 1))] += c(w, 0.0);
            }
        }
    }
    Ok(Superoperator { dim: n, matrix: l })
}

/// `Lρ` without forming the superoperator: one dense product for the
/// commutator and `O(N²)` work for the dissipator.
pub(crate) fn apply_lindblad(h: &CMat, kappa: f64, hbar: f64, rho: &CMat, out: &mut CMat) {
    let n = rho.nrows();
    let hr = h * rho;
    let rh = rho * h;
    let mi = c(0.0, -1.0 / hbar);
    for j in 0..n {
        for i in 0..n {
            let mut v = mi * (hr[(i, j)] - rh[(i, j)]);
            v -= rho[(i, j)] * (0.5 * kappa * (i + j) as f64);
            if i + 1 < n && j + 1 < n {
                v += rho[(i + 1, j + 1)] * (kappa * (((i + 1) * (j + 1)) as f64).sqrt());
            }
            out[(i, j)] = v;
        }
    }
}

/// What drives an evolution.
#[derive(Debug, Clone, Copy)]
pub enum Generator<'a> {
    Superoperator(&'a Superoperator),
    Static {
        hamiltonian: &'a FockOperator,
        kappa: f64,
        hbar: f64,
    },
    /// `H(t) = Σ_l H_l e^{ilωt}` rebuilt from its harmonics at every stage.
    Periodic {
        components: &'a FourierComponents,
        kappa: f64,
        hbar: f64,
    },
}

impl Generator<'_> {
    fn dim(&self) -> usize {
        match self {
            Generator::Superoperator(s) => s.dim,
            Generator::Static { hamiltonian, .. } => hamiltonian.dim(),
            Generator::Periodic { components, .. } => components.dim(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Generator::Superoperator(_) => Ok(()),
            Generator::Static {
                hamiltonian,
                kappa,
                hbar,
            } => check_hamiltonian(hamiltonian, *kappa, *hbar),
            Generator::Periodic {
                components,
                kappa,
                hbar,
            } => {
                let scale = components
                    .iter()
                    .map(|(_, h)| linalg::max_abs(h.matrix()))
                    .fold(1.0, f64::max);
                if components.hermiticity_violation() > HERMITIAN_INPUT_TOL * scale {
                    return Err(Error::NonHermitian(components.hermiticity_violation()));
                }
                check_hamiltonian(components.get(0).unwrap(), *kappa, *hbar)
            }
        }
    }
}

/// Sampled evolution with the worst invariant deviations seen.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub max_trace_drift: f64,
    pub max_hermiticity: f64,
    pub min_eigenvalue: f64,
}

/// Running extremes of the density-matrix invariants.
#[derive(Debug, Clone, Copy)]
pub struct Monitor {
    pub max_trace_drift: f64,
    pub max_hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl Default for Monitor {
    fn default() -> Self {
        Monitor {
            max_trace_drift: 0.0,
            max_hermiticity: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

impl Monitor {
    fn record(&mut self, t: f64, rho: &FockOperator) -> Result<()> {
        let tr = linalg::trace(rho.matrix());
        let drift = (tr - c(1.0, 0.0)).norm();
        let herm = rho.hermiticity_deviation();
        let min_ev = linalg::hermitian_eigenvalues(rho.matrix())?[0];
        self.max_trace_drift = self.max_trace_drift.max(drift);
        self.max_hermiticity = self.max_hermiticity.max(herm);
        self.min_eigenvalue = self.min_eigenvalue.min(min_ev);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::InvariantViolation(format!(
                "trace drift {drift:.3e} at t = {t}"
            )));
        }
        if min_ev < -NEGATIVITY_LIMIT {
            return Err(Error::InvariantViolation(format!(
                "eigenvalue {min_ev:.3e} at t = {t}"
            )));
        }
        Ok(())
    }
}

/// Integrates from `t0`, calling `observer` with the state at every entry of
/// `times`. The trace is never renormalized; drift beyond `1e-8` or an
/// eigenvalue below `−1e-6` aborts.
pub fn evolve_with<O>(
    rho0: &DensityMatrix,
    generator: &Generator<'_>,
    t0: f64,
    times: &[f64],
    tol: f64,
    mut observer: O,
) -> Result<(DensityMatrix, Monitor)>
where
    O: FnMut(usize, f64, &DensityMatrix),
{
    if !(tol > 1e-12 && tol < 1e-4) {
        return Err(Error::invalid(format!("tolerance must lie in (1e-12, 1e-4), got {tol}")));
    }
    generator.validate()?;
    let n = generator.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho0.dim(),
        });
    }
    let t_end = match times.last() {
        Some(&t) if t > t0 => t,
        _ => return Err(Error::invalid("need at least one sample time after t0")),
    };

    let mut y0 = vec![0.0; 2 * n * n];
    for j in 0..n {
        for i in 0..n {
            let z = rho0.as_operator().get(i, j);
            y0[2 * (i + n * j)] = z.re;
            y0[2 * (i + n * j) + 1] = z.im;
        }
    }

    let mut rho = Mat::<c64>::zeros(n, n);
    let mut drho = Mat::<c64>::zeros(n, n);
    let mut h_t = Mat::<c64>::zeros(n, n);
    let static_h: Option<CMat> = match generator {
        Generator::Static { hamiltonian, .. } => Some(hamiltonian.matrix().to_owned()),
        _ => None,
    };
    let gen = *generator;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        for j in 0..n {
            for i in 0..n {
                let k = 2 * (i + n * j);
                rho[(i, j)] = c(y[k], y[k + 1]);
            }
        }
        match gen {
            Generator::Superoperator(s) => {
                let v = Mat::from_fn(n * n, 1, |k, _| rho[(k % n, k / n)]);
                let out = &s.matrix * &v;
                for k in 0..n * n {
                    drho[(k % n, k / n)] = out[(k, 0)];
                }
            }
            Generator::Static { kappa, hbar, .. } => {
                apply_lindblad(static_h.as_ref().unwrap(), kappa, hbar, &rho, &mut drho)
            }
            Generator::Periodic {
                components,
                kappa,
                hbar,
            } => {
                h_t.fill(c(0.0, 0.0));
                for (l, hl) in components.iter() {
                    if l.rem_euclid(2) == 1 {
                        continue;
                    }
                    let ph = c64::from_polar(1.0, l as f64 * components.omega * t);
                    for j in 0..n {
                        for i in 0..n {
                            h_t[(i, j)] += hl.get(i, j) * ph;
                        }
                    }
                }
                apply_lindblad(&h_t, kappa, hbar, &rho, &mut drho)
            }
        }
        for j in 0..n {
            for i in 0..n {
                let k = 2 * (i + n * j);
                dy[k] = drho[(i, j)].re;
                dy[k + 1] = drho[(i, j)].im;
            }
        }
    };

    let mut monitor = Monitor::default();
    monitor.record(t0, rho0.as_operator())?;
    let h_max = match generator {
        Generator::Periodic { components, .. } => std::f64::consts::PI / components.omega / 8.0,
        _ => f64::INFINITY,
    };
    let to_state = |y: &[f64]| {
        unvectorize(n, |k| c(y[2 * k], y[2 * k + 1])).map(DensityMatrix::unchecked)
    };
    let end = Dopri5 {
        rtol: tol,
        atol: tol,
        max_steps: 50_000_000,
        h_max,
    }
    .solve(rhs, t0, &y0, t_end, times, |idx, t, y| {
        let state = to_state(y)?;
        monitor.record(t, state.as_operator())?;
        observer(idx, t, &state);
        Ok(())
    })?;
    Ok((to_state(&end)?, monitor))
}

/// [`evolve_with`], keeping every sampled state.
pub fn evolve(
    rho0: &DensityMatrix,
    generator: &Generator<'_>,
    t0: f64,
    times: &[f64],
    tol: f64,
) -> Result<Evolution> {
    let mut states = Vec::with_capacity(times.len());
    let (_, monitor) = evolve_with(rho0, generator, t0, times, tol, |_, _, r| {
        states.push(r.clone())
    })?;
    Ok(Evolution {
        times: times.to_vec(),
        states,
        max_trace_drift: monitor.max_trace_drift,
        max_hermiticity: monitor.max_hermiticity,
        min_eigenvalue: monitor.min_eigenvalue,
    })
}

fn trace_row(n: usize) -> impl Fn(usize) -> c64 {
    move |col| if col % n == col / n { c(1.0, 0.0) } else { c(0.0, 0.0) }
}

/// Stationary state of a time-independent generator: the equation for
/// `ρ_00` is replaced by `Tr ρ = 1` and the system is solved by LU.
pub fn steady_state_direct(l: &Superoperator) -> Result<DensityMatrix> {
    let n = l.dim;
    let d = n * n;
    let tr = trace_row(n);
    let mut m = l.matrix.clone();
    for col in 0..d {
        m[(0, col)] = tr(col);
    }
    let mut rhs = Mat::<c64>::zeros(d, 1);
    rhs[(0, 0)] = c(1.0, 0.0);
    let x = m.partial_piv_lu().solve(&rhs);

    let l_norm = l.matrix.norm_l2();
    let finite = (0..d).all(|k| x[(k, 0)].re.is_finite() && x[(k, 0)].im.is_finite());
    let residual = if finite {
        (&l.matrix * &x).norm_l2() / (l_norm * x.norm_l2()).max(f64::MIN_POSITIVE)
    } else {
        f64::INFINITY
    };
    if !(residual < 1e-10) {
        let basis = null_space(l)?;
        if basis.len() > 1 {
            return Err(Error::DegenerateSteadyState { basis });
        }
        return Err(Error::Numerical(format!(
            "steady-state residual {residual:.3e} exceeds 1e-10"
        )));
    }
    let op = unvectorize(n, |k| x[(k, 0)])?;
    let herm = linalg::hermitian_part(op.matrix());
    let t = linalg::trace(herm.as_ref());
    let rho = FockOperator::from_fn(n, |i, j| herm[(i, j)] / t)?;
    Ok(DensityMatrix::unchecked(rho))
}

/// Right singular vectors of `L` whose singular values are below
/// `1e-10 σ_max`, reshaped to operators.
pub fn null_space(l: &Superoperator) -> Result<Vec<FockOperator>> {
    let svd = l
        .matrix
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let s = svd.S();
    let v = svd.V();
    let d = l.matrix.ncols();
    let smax = (0..d).map(|k| s[k].re).fold(0.0, f64::max);
    (0..d)
        .filter(|&k| s[k].re <= 1e-10 * smax.max(f64::MIN_POSITIVE) || smax == 0.0)
        .map(|k| unvectorize(l.dim, |i| v[(i, k)]))
        .collect()
}

/// Trapezoidal time average of `Tr(ρ(t) n̂)` over the last `k` periods of a
/// uniformly sampled evolution.
pub fn photon_number_average(evolution: &Evolution, period: f64, k: usize) -> Result<f64> {
    if k < 4 {
        return Err(Error::invalid(format!("need at least 4 periods, got {k}")));
    }
    let t = &evolution.times;
    if t.len() < 2 {
        return Err(Error::invalid("evolution has fewer than two samples"));
    }
    let dt = t[1] - t[0];
    if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::invalid("evolution is not uniformly sampled"));
    }
    let per_period = period / dt;
    if per_period.round() < 16.0 || (per_period - per_period.round()).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "need a whole number (at least 16) of samples per period, got {per_period:.3}"
        )));
    }
    let window = (k as f64 * per_period).round() as usize;
    if window + 1 > t.len() {
        return Err(Error::invalid("evolution is shorter than the averaging window"));
    }
    let n = fock::number(evolution.states[0].dim())?;
    let start = t.len() - 1 - window;
    let mut acc = 0.0;
    for i in start..t.len() {
        let w = if i == start || i == t.len() - 1 { 0.5 } else { 1.0 };
        acc += w * fock::expectation(&evolution.states[i], &n)?.re;
    }
    Ok(acc / window as f64)
}

/// Occupation of the four highest retained number states.
pub fn cutoff_tail(rho: &DensityMatrix) -> f64 {
    rho.tail_weight(rho.dim().saturating_sub(4))
}
