//! Rotating-frame Hamiltonian on a truncated Fock space, its Fourier
//! harmonics, and the van Vleck effective Hamiltonian to second order.
//!
//! Energies are measured from the vacuum diagonal element: the scalar part
//! of every effective Hamiltonian is dropped so that it can be compared
//! directly with the Kerr model.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockOperator};
use crate::linalg::c;
use crate::params::{BasisChoice, RWACoefficients, SystemParams};

pub const MIN_DIM: usize = 6;
pub const L_MAX: usize = 4;
pub const DEFAULT_SAMPLES: usize = 16;

/// Time-independent building blocks of `H̃(t)` for one basis.
#[derive(Debug, Clone)]
struct LabParts {
    /// `p²/2m + mω0²x²/2 + αx⁴/4`, exact on all `n` states.
    static_part: FockOperator,
    position: FockOperator,
    force: f64,
    omega: f64,
    hbar: f64,
}

impl LabParts {
    fn new(params: &SystemParams, basis: &BasisChoice, n: usize) -> Result<Self> {
        params.validate()?;
        basis.validate(params)?;
        if n < MIN_DIM {
            return Err(Error::invalid(format!(
                "rotating-frame Hamiltonian needs at least {MIN_DIM} states, got {n}"
            )));
        }
        // Quartic products couple states four apart; building them with
        // four extra states keeps every retained matrix element exact.
        let padded = n + 4;
        let SystemParams {
            m, omega0, alpha, ..
        } = *params;
        let x = fock::position(padded, m, basis.omega_c, params.hbar)?;
        let p = fock::momentum(padded, m, basis.omega_c, params.hbar)?;
        let x2 = &x * &x;
        let x4 = &x2 * &x2;
        let h = &(&(&p * &p).scale_re(0.5 / m) + &x2.scale_re(0.5 * m * omega0 * omega0))
            + &x4.scale_re(0.25 * alpha);
        Ok(LabParts {
            static_part: h.truncate(n)?,
            position: x.truncate(n)?,
            force: params.force,
            omega: params.omega,
            hbar: params.hbar,
        })
    }

    fn rotated(&self, t: f64) -> FockOperator {
        let n = self.static_part.dim();
        let drive = self.force * (self.omega * t).cos();
        let phase: Vec<c64> = (0..n)
            .map(|k| c64::from_polar(1.0, self.omega * t * k as f64))
            .collect();
        FockOperator::from_fn(n, |j, k| {
            let lab = self.static_part.get(j, k) - self.position.get(j, k) * drive;
            let mut v = lab * phase[j] * phase[k].conj();
            if j == k {
                v -= c(self.hbar * self.omega * j as f64, 0.0);
            }
            v
        })
        .expect("dimension checked at construction")
    }
}

/// `H̃(t) = U†HU − ħω n̂` with `U = exp(−iωt n̂)`.
pub fn rotated_hamiltonian(
    params: &SystemParams,
    basis: &BasisChoice,
    t: f64,
    n: usize,
) -> Result<FockOperator> {
    Ok(LabParts::new(params, basis, n)?.rotated(t))
}

/// Harmonics `H̃_l` for `|l| ≤ l_max`.
#[derive(Debug, Clone)]
pub struct FourierComponents {
    pub l_max: usize,
    pub basis: BasisChoice,
    pub omega: f64,
    pub hbar: f64,
    components: Vec<FockOperator>,
}

impl FourierComponents {
    pub fn get(&self, l: i32) -> Option<&FockOperator> {
        let idx = l + self.l_max as i32;
        if idx < 0 {
            return None;
        }
        self.components.get(idx as usize)
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &FockOperator)> {
        let lm = self.l_max as i32;
        self.components.iter().enumerate().map(move |(i, h)| (i as i32 - lm, h))
    }

    /// `Σ_l H̃_l e^{ilωt}`.
    pub fn evaluate(&self, t: f64) -> FockOperator {
        let n = self.dim();
        let mut out = FockOperator::zeros(n).expect("valid dimension");
        for (l, h) in self.iter() {
            if l.rem_euclid(2) == 1 {
                continue;
            }
            out = &out + &h.scale(c64::from_polar(1.0, l as f64 * self.omega * t));
        }
        out
    }

    /// Largest `|H̃_{−l} − H̃_l†|`.
    pub fn hermiticity_violation(&self) -> f64 {
        let lm = self.l_max as i32;
        (0..=lm)
            .map(|l| {
                self.get(-l)
                    .unwrap()
                    .max_abs_diff(&self.get(l).unwrap().adjoint())
                    .unwrap()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of any odd harmonic.
    pub fn odd_magnitude(&self) -> f64 {
        self.iter()
            .filter(|(l, _)| l.rem_euclid(2) == 1)
            .map(|(_, h)| crate::linalg::max_abs(h.matrix()))
            .fold(0.0, f64::max)
    }

    /// Largest entry of any harmonic with `|l| > 4`.
    pub fn out_of_band_magnitude(&self) -> f64 {
        self.iter()
            .filter(|(l, _)| l.unsigned_abs() as usize > L_MAX)
            .map(|(_, h)| crate::linalg::max_abs(h.matrix()))
            .fold(0.0, f64::max)
    }
}

/// Exact harmonics from a 16-point DFT over one drive period.
pub fn fourier_components(
    params: &SystemParams,
    basis: &BasisChoice,
    n: usize,
) -> Result<FourierComponents> {
    fourier_components_sampled(params, basis, n, DEFAULT_SAMPLES, 0.0, L_MAX)
}

/// DFT of `H̃(t)` from `samples` equally spaced times starting at `t0`.
pub fn fourier_components_sampled(
    params: &SystemParams,
    basis: &BasisChoice,
    n: usize,
    samples: usize,
    t0: f64,
    l_max: usize,
) -> Result<FourierComponents> {
    if samples < 2 * l_max + 1 {
        return Err(Error::invalid(format!(
            "{samples} samples cannot resolve harmonics up to {l_max}"
        )));
    }
    let parts = LabParts::new(params, basis, n)?;
    let period = 2.0 * PI / params.omega;
    let mut sums: Vec<Vec<c64>> = vec![vec![c(0.0, 0.0); n * n]; 2 * l_max + 1];
    for s in 0..samples {
        let t = t0 + period * s as f64 / samples as f64;
        let h = parts.rotated(t);
        for (idx, sum) in sums.iter_mut().enumerate() {
            let l = idx as f64 - l_max as f64;
            let w = c64::from_polar(1.0 / samples as f64, -l * params.omega * t);
            for k in 0..n {
                for j in 0..n {
                    sum[j + n * k] += h.get(j, k) * w;
                }
            }
        }
    }
    let components = sums
        .iter()
        .map(|sum| FockOperator::from_fn(n, |j, k| sum[j + n * k]))
        .collect::<Result<_>>()?;
    Ok(FourierComponents {
        l_max,
        basis: *basis,
        omega: params.omega,
        hbar: params.hbar,
        components,
    })
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub order: u32,
    pub basis: Option<BasisChoice>,
    pub matrix: FockOperator,
}

/// `H̃_0` at first order, plus `Σ_{l≠0} H̃_l H̃_{−l} / (lħω)` at second.
pub fn effective_hamiltonian(
    components: &FourierComponents,
    order: u32,
    hbar: f64,
    omega: f64,
) -> Result<EffectiveHamiltonian> {
    if !(1..=2).contains(&order) {
        return Err(Error::Unsupported(format!(
            "van Vleck order {order}; only orders 1 and 2 are implemented"
        )));
    }
    if !(hbar > 0.0 && omega > 0.0) {
        return Err(Error::invalid("hbar and omega must be positive"));
    }
    let mut h = components.get(0).expect("l = 0 present").clone();
    if order == 2 {
        h = &h + &second_order_correction(components, hbar, omega);
    }
    let shift = h.get(0, 0);
    let n = h.dim();
    let matrix = FockOperator::from_fn(n, |i, j| {
        if i == j {
            h.get(i, j) - shift
        } else {
            h.get(i, j)
        }
    })?;
    Ok(EffectiveHamiltonian {
        order,
        basis: Some(components.basis),
        matrix,
    })
}

pub fn second_order_correction(
    components: &FourierComponents,
    hbar: f64,
    omega: f64,
) -> FockOperator {
    let n = components.dim();
    let mut acc = FockOperator::zeros(n).expect("valid dimension");
    let lm = components.l_max as i32;
    for l in (-lm..=lm).filter(|&l| l != 0) {
        let (hl, hml) = (components.get(l).unwrap(), components.get(-l).unwrap());
        acc = &acc + &(hl * hml).scale_re(1.0 / (l as f64 * hbar * omega));
    }
    acc
}

/// `ħ(−Δ + U) c†c + (ħU/2) c†c†cc − ħF (c + c†)`.
pub fn rwa_analytic(coeffs: &RWACoefficients, hbar: f64, n: usize) -> Result<EffectiveHamiltonian> {
    if n < 2 {
        return Err(Error::invalid(format!("dimension must be at least 2, got {n}")));
    }
    let RWACoefficients {
        delta_c, u_c, f_c, ..
    } = *coeffs;
    let matrix = FockOperator::from_fn(n, |i, j| {
        if i == j {
            let k = i as f64;
            c(hbar * ((-delta_c + u_c) * k + 0.5 * u_c * k * (k - 1.0)), 0.0)
        } else if j == i + 1 {
            c(-hbar * f_c * (j as f64).sqrt(), 0.0)
        } else if i == j + 1 {
            c(-hbar * f_c * (i as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })?;
    Ok(EffectiveHamiltonian {
        order: 1,
        basis: None,
        matrix,
    })
}

/// `(Δ, U, F)` read off a Kerr-form matrix from its first three levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedKerr {
    pub delta: f64,
    pub u: f64,
    pub f: f64,
}

pub fn fit_kerr_coefficients(h: &FockOperator, hbar: f64) -> Result<FittedKerr> {
    if h.dim() < 3 {
        return Err(Error::invalid("need at least three levels to fit"));
    }
    let e1 = (h.get(1, 1) - h.get(0, 0)).re / hbar;
    let e2 = (h.get(2, 2) - h.get(0, 0)).re / hbar;
    let u = e2 - 2.0 * e1;
    Ok(FittedKerr {
        delta: u - e1,
        u,
        f: -h.get(0, 1).re / hbar,
    })
}
