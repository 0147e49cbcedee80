//! First-order Krylov–Bogoliubov slow flow for the quadratures of
//! `x(t) = u cos ωt + v sin ωt`.
//!
//! With `δ̃ = (ω² − ω0²)/(2ω)`, `κ = 3α/(8mω)` and `f = F/(2mω)`:
//!
//! ```text
//! du/dt = −(δ̃ − κX²) v − (γ/2) u
//! dv/dt =  (δ̃ − κX²) u − (γ/2) v + f
//! ```

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlowFlowState {
    pub u: f64,
    pub v: f64,
}

impl SlowFlowState {
    pub fn new(u: f64, v: f64) -> Self {
        SlowFlowState { u, v }
    }

    pub fn amplitude(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub state: SlowFlowState,
    pub stable: bool,
    pub eigenvalues: [Complex64; 2],
}

/// Cubic vector field in the quadratures:
/// `d(u, v)/dt = L (u, v) + X² C (u, v) + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureVF {
    pub linear: [[f64; 2]; 2],
    pub cubic: [[f64; 2]; 2],
    pub drive: [f64; 2],
}

impl QuadratureVF {
    /// The rotation-invariant Kerr form with detuning `detuning`,
    /// cubic shift `kerr`, drive `f` along `v` and damping `gamma`.
    pub fn kerr(detuning: f64, kerr: f64, f: f64, gamma: f64) -> Self {
        QuadratureVF {
            linear: [[-0.5 * gamma, -detuning], [detuning, -0.5 * gamma]],
            cubic: [[0.0, kerr], [-kerr, 0.0]],
            drive: [0.0, f],
        }
    }

    /// All ten coefficients in a fixed order.
    pub fn coefficients(&self) -> [f64; 10] {
        let [[l00, l01], [l10, l11]] = self.linear;
        let [[c00, c01], [c10, c11]] = self.cubic;
        [l00, l01, l10, l11, c00, c01, c10, c11, self.drive[0], self.drive[1]]
    }

    pub fn eval(&self, s: SlowFlowState) -> (f64, f64) {
        let x2 = s.u * s.u + s.v * s.v;
        let row = |i: usize| {
            self.linear[i][0] * s.u
                + self.linear[i][1] * s.v
                + x2 * (self.cubic[i][0] * s.u + self.cubic[i][1] * s.v)
                + self.drive[i]
        };
        (row(0), row(1))
    }

    pub fn jacobian(&self, s: SlowFlowState) -> [[f64; 2]; 2] {
        let x2 = s.u * s.u + s.v * s.v;
        let mut j = [[0.0; 2]; 2];
        for (i, ji) in j.iter_mut().enumerate() {
            let c = self.cubic[i][0] * s.u + self.cubic[i][1] * s.v;
            ji[0] = self.linear[i][0] + self.cubic[i][0] * x2 + 2.0 * s.u * c;
            ji[1] = self.linear[i][1] + self.cubic[i][1] * x2 + 2.0 * s.v * c;
        }
        j
    }

    /// Fields of the [`QuadratureVF::kerr`] shape can be written as
    /// `ż = (−g + i(d − kX²)) z + i·φ` with `z = u + iv`; returns `(g, d, k)`.
    fn kerr_parts(&self) -> Result<(f64, f64, f64)> {
        let [[l00, l01], [l10, l11]] = self.linear;
        let [[c00, c01], [c10, c11]] = self.cubic;
        let scale = self
            .coefficients()
            .iter()
            .fold(0.0f64, |a, b| a.max(b.abs()))
            .max(f64::MIN_POSITIVE);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scale;
        if !(close(l00, l11) && close(l01, -l10) && close(c00, 0.0) && close(c11, 0.0)
            && close(c01, -c10))
        {
            return Err(Error::Unsupported(
                "steady states need a rotation-invariant Kerr field".into(),
            ));
        }
        Ok((-l00, l10, -c10))
    }

    /// Fixed points sorted by amplitude, with linear stability.
    ///
    /// Eliminating the phase leaves `((d − kY)² + g²) Y = |φ|²` in
    /// `Y = X²`, solved through the eigenvalues of its companion matrix.
    pub fn steady_states(&self) -> Result<Vec<SteadyState>> {
        let (g, d, k) = self.kerr_parts()?;
        let drive = Complex64::new(self.drive[1], -self.drive[0]);
        let f2 = drive.norm_sqr();

        let mut ys: Vec<f64> = Vec::new();
        if f2 == 0.0 {
            ys.push(0.0);
        } else if k == 0.0 {
            ys.push(f2 / (d * d + g * g));
        } else {
            // Monic: Y³ − (2d/k) Y² + ((d² + g²)/k²) Y − f²/k².
            let c2 = -2.0 * d / k;
            let c1 = (d * d + g * g) / (k * k);
            let c0 = -f2 / (k * k);
            let comp = Mat::<f64>::from_fn(3, 3, |i, j| match (i, j) {
                (0, _) => [-c2, -c1, -c0][j],
                (1, 0) | (2, 1) => 1.0,
                _ => 0.0,
            });
            let roots = comp
                .eigenvalues()
                .map_err(|e| Error::Numerical(format!("cubic eigenvalues: {e:?}")))?;
            let cubic = |y: f64| ((y + c2) * y + c1) * y + c0;
            let dcubic = |y: f64| (3.0 * y + 2.0 * c2) * y + c1;
            let mag = roots.iter().fold(0.0f64, |a, r| a.max(r.norm()));
            for r in roots {
                if r.im.abs() > 1e-6 * mag || r.re <= 0.0 {
                    continue;
                }
                let mut y = r.re;
                for _ in 0..8 {
                    let dy = dcubic(y);
                    if dy == 0.0 {
                        break;
                    }
                    let step = cubic(y) / dy;
                    y -= step;
                    if step.abs() <= 1e-16 * y.abs() {
                        break;
                    }
                }
                if y > 0.0 && !ys.iter().any(|&q| (q - y).abs() <= 1e-9 * y) {
                    ys.push(y);
                }
            }
            if ys.is_empty() {
                return Err(Error::Numerical("response cubic has no real root".into()));
            }
        }
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());

        ys.into_iter()
            .map(|y| {
                let lin = Complex64::new(-g, d - k * y);
                let z = if f2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    -Complex64::new(self.drive[0], self.drive[1]) / lin
                };
                let state = SlowFlowState::new(z.re, z.im);
                let (stable, eigenvalues) = self.classify(state);
                Ok(SteadyState {
                    state,
                    stable,
                    eigenvalues,
                })
            })
            .collect()
    }

    fn classify(&self, s: SlowFlowState) -> (bool, [Complex64; 2]) {
        let ev = eig2(self.jacobian(s));
        (ev.iter().all(|e| e.re < -1e-10), ev)
    }

    /// Linear stability of a fixed point.
    pub fn stability(&self, s: SlowFlowState) -> Result<(bool, [Complex64; 2])> {
        let (du, dv) = self.eval(s);
        let scale = self
            .drive
            .iter()
            .fold(1.0f64, |a, b| a.max(b.abs()))
            .max(s.amplitude());
        if du.hypot(dv) > 1e-8 * scale {
            return Err(Error::invalid(format!(
                "state is not a fixed point (residual {:.3e})",
                du.hypot(dv)
            )));
        }
        Ok(self.classify(s))
    }
}

fn eig2(j: [[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = Complex64::new(0.25 * tr * tr - det, 0.0).sqrt();
    let half = Complex64::new(0.5 * tr, 0.0);
    [half - disc, half + disc]
}

/// The slow-flow field for the given lab-frame parameters.
pub fn slow_flow_field(params: &SystemParams) -> QuadratureVF {
    let SystemParams {
        m,
        alpha,
        force,
        omega,
        gamma,
        ..
    } = *params;
    QuadratureVF::kerr(
        params.pump_detuning(),
        3.0 * alpha / (8.0 * m * omega),
        force / (2.0 * m * omega),
        gamma,
    )
}

pub fn slow_flow_rhs(state: SlowFlowState, params: &SystemParams) -> (f64, f64) {
    slow_flow_field(params).eval(state)
}

pub fn steady_states(params: &SystemParams) -> Result<Vec<SteadyState>> {
    params.validate()?;
    slow_flow_field(params).steady_states()
}

pub fn stability(state: SlowFlowState, params: &SystemParams) -> Result<(bool, [Complex64; 2])> {
    params.validate()?;
    slow_flow_field(params).stability(state)
}
