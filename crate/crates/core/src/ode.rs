//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! States are flat `f64` slices so the same stepper serves the two-variable
//! Duffing oscillator and vectorized density matrices. Complex states are
//! stored as interleaved real/imaginary pairs by the caller.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size controller settings.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step; `f64::INFINITY` for none.
    pub h_max: f64,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Dopri5 {
            rtol: tol,
            atol: tol,
            max_steps: 50_000_000,
            h_max: f64::INFINITY,
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t_end`, reporting the dense
    /// interpolant at every entry of `samples` (sorted, inside
    /// `[t0, t_end]`) through `observer(index, t, y)`. Returns the state at
    /// `t_end`.
    pub fn solve<F, O>(
        &self,
        mut f: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        samples: &[f64],
        mut observer: O,
    ) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        O: FnMut(usize, f64, &[f64]) -> Result<()>,
    {
        if !(t_end > t0) {
            return Err(Error::invalid(format!(
                "integration interval must be increasing, got [{t0}, {t_end}]"
            )));
        }
        if samples.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("sample times must be sorted"));
        }
        if let (Some(&first), Some(&last)) = (samples.first(), samples.last()) {
            let slack = 1e-12 * (t_end - t0).max(t_end.abs());
            if first < t0 - slack || last > t_end + slack {
                return Err(Error::invalid("sample times outside integration interval"));
            }
        }

        let n = y0.len();
        let mut y = y0.to_vec();
        let mut y_new = vec![0.0; n];
        let mut y_stage = vec![0.0; n];
        let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
        let mut err = vec![0.0; n];
        let mut cont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
        let mut y_interp = vec![0.0; n];

        let mut t = t0;
        let mut next_sample = 0usize;
        while next_sample < samples.len() && samples[next_sample] <= t0 {
            observer(next_sample, samples[next_sample], &y)?;
            next_sample += 1;
        }

        f(t, &y, &mut k[0]);
        let mut h = {
            let (k1, rest) = k.split_at_mut(1);
            self.initial_step(&mut f, t, &y, &k1[0], t_end - t0, &mut y_stage, &mut rest[0])
        };
        let mut steps = 0usize;
        let mut rejected_last = false;
        let mut fac_old: f64 = 1e-4;

        loop {
            if steps >= self.max_steps {
                return Err(Error::NonConvergence {
                    time: t,
                    reason: format!("exceeded {} steps", self.max_steps),
                });
            }
            if t + h > t_end || (t_end - t - h) < 1e-12 * h {
                h = t_end - t;
            }
            if h <= 8.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::NonConvergence {
                    time: t,
                    reason: format!("step size underflow (h = {h:.3e})"),
                });
            }
            steps += 1;

            let (k1, rest) = k.split_first_mut().unwrap();
            let [k2, k3, k4, k5, k6, k7] = rest else {
                unreachable!()
            };

            for i in 0..n {
                y_stage[i] = y[i] + h * A21 * k1[i];
            }
            f(t + C2 * h, &y_stage, k2);
            for i in 0..n {
                y_stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * h, &y_stage, k3);
            for i in 0..n {
                y_stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * h, &y_stage, k4);
            for i in 0..n {
                y_stage[i] =
                    y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * h, &y_stage, k5);
            for i in 0..n {
                y_stage[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(t + h, &y_stage, k6);
            for i in 0..n {
                y_new[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            f(t + h, &y_new, k7);

            let mut acc = 0.0;
            for i in 0..n {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sk = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                let r = err[i] / sk;
                acc += r * r;
            }
            let err_norm = (acc / n.max(1) as f64).sqrt();
            if !err_norm.is_finite() {
                h *= 0.1;
                rejected_last = true;
                continue;
            }

            // PI controller (Hairer & Wanner, beta = 0.04)
            let fac11 = err_norm.powf(0.2 - 0.04 * 0.75);
            let mut fac = fac11 / fac_old.powf(0.04);
            fac = (fac / 0.9).clamp(1.0 / 10.0, 5.0);
            let h_next = (h / fac).min(self.h_max);

            if err_norm <= 1.0 {
                fac_old = err_norm.max(1e-4);
                let t_new = t + h;

                if next_sample < samples.len() && samples[next_sample] <= t_new {
                    for i in 0..n {
                        let ydiff = y_new[i] - y[i];
                        let bspl = h * k1[i] - ydiff;
                        cont[0][i] = y[i];
                        cont[1][i] = ydiff;
                        cont[2][i] = bspl;
                        cont[3][i] = ydiff - h * k7[i] - bspl;
                        cont[4][i] = h
                            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i]
                                + D6 * k6[i]
                                + D7 * k7[i]);
                    }
                    while next_sample < samples.len() && samples[next_sample] <= t_new {
                        let ts = samples[next_sample];
                        let theta = ((ts - t) / h).clamp(0.0, 1.0);
                        let theta1 = 1.0 - theta;
                        for i in 0..n {
                            y_interp[i] = cont[0][i]
                                + theta
                                    * (cont[1][i]
                                        + theta1
                                            * (cont[2][i]
                                                + theta * (cont[3][i] + theta1 * cont[4][i])));
                        }
                        observer(next_sample, ts, &y_interp)?;
                        next_sample += 1;
                    }
                }

                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                t = t_new;
                if t >= t_end {
                    break;
                }
                h = if rejected_last { h_next.min(h) } else { h_next };
                rejected_last = false;
            } else {
                h /= (fac11 / 0.9).min(10.0);
                rejected_last = true;
            }
        }

        // Samples sitting on t_end within rounding.
        while next_sample < samples.len() {
            observer(next_sample, samples[next_sample], &y)?;
            next_sample += 1;
        }
        Ok(y)
    }

    #[allow(clippy::too_many_arguments)]
    fn initial_step<F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64],
        f0: &[f64],
        span: f64,
        y1: &mut [f64],
        f1: &mut [f64],
    ) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len().max(1) as f64;
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..y.len() {
            let sk = self.atol + self.rtol * y[i].abs();
            dnf += (f0[i] / sk).powi(2);
            dny += (y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            0.01 * (dny / dnf).sqrt()
        };
        h = h.min(span).min(self.h_max);
        for i in 0..y.len() {
            y1[i] = y[i] + h * f0[i];
        }
        f(t + h, y1, f1);
        let mut der2 = 0.0;
        for i in 0..y.len() {
            let sk = self.atol + self.rtol * y[i].abs();
            der2 += ((f1[i] - f0[i]) / sk).powi(2);
        }
        let der2 = (der2 / n).sqrt() / h;
        let der12 = der2.max((dnf / n).sqrt());
        let h1 = if der12 <= 1e-15 {
            (1e-6f64).max(h * 1e-3)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(span).min(self.h_max)
    }
}
