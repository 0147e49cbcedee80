//! Physical parameters of the driven Duffing oscillator, the choice of
//! bosonic reference frequency, and the rotating-frame coefficients that
//! follow from it.
//!
//! The lab-frame Hamiltonian is
//! `H = p²/2m + m ω0² x²/2 + α x⁴/4 − F cos(ω t) x`, optionally with a
//! linear damping `γ ẋ` in the classical equations of motion. Quantizing
//! with ladder operators at a reference frequency `ω_c` and averaging in the
//! frame rotating at `ω` gives the Kerr model
//! `ħ(−Δ_c + U_c) c†c + (ħU_c/2) c†c†cc − ħF_c (c + c†)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lab-frame parameters. All quantities are in one set of coherent
/// arbitrary units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub m: f64,
    pub omega0: f64,
    pub alpha: f64,
    #[serde(rename = "F")]
    pub force: f64,
    pub omega: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl SystemParams {
    pub fn new(m: f64, omega0: f64, alpha: f64, force: f64, omega: f64) -> Self {
        SystemParams {
            m,
            omega0,
            alpha,
            force,
            omega,
            gamma: 0.0,
            hbar: 1.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_force(mut self, force: f64) -> Self {
        self.force = force;
        self
    }

    /// Builds lab-frame parameters from system-photon (a-basis) quantities:
    /// Kerr nonlinearity `u_a`, pump strength `f_a` and detuning
    /// `delta_a = ω − ω0`. Inverts the a-basis coefficient formulas.
    pub fn from_a_basis(
        m: f64,
        omega0: f64,
        hbar: f64,
        u_a: f64,
        f_a: f64,
        delta_a: f64,
    ) -> Self {
        let alpha = 4.0 * m * m * omega0 * omega0 * u_a / (3.0 * hbar);
        let force = 2.0 * f_a * (2.0 * m * omega0 * hbar).sqrt();
        SystemParams {
            m,
            omega0,
            alpha,
            force,
            omega: omega0 + delta_a,
            gamma: 0.0,
            hbar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.m,
            self.omega0,
            self.alpha,
            self.force,
            self.omega,
            self.gamma,
            self.hbar,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("parameters must be finite"));
        }
        if self.m <= 0.0 {
            return Err(Error::invalid(format!("mass must be positive, got {}", self.m)));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::invalid(format!(
                "bare frequency must be positive, got {}",
                self.omega0
            )));
        }
        if self.omega <= 0.0 {
            return Err(Error::invalid(format!(
                "drive frequency must be positive, got {}",
                self.omega
            )));
        }
        if self.hbar <= 0.0 {
            return Err(Error::invalid(format!("hbar must be positive, got {}", self.hbar)));
        }
        if self.alpha < 0.0 {
            return Err(Error::invalid(format!(
                "Duffing coefficient must be non-negative, got {}",
                self.alpha
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::invalid(format!(
                "damping must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Detuning used by the slow flow, `(ω² − ω0²)/(2ω)`.
    pub fn pump_detuning(&self) -> f64 {
        (self.omega * self.omega - self.omega0 * self.omega0) / (2.0 * self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// `ω_c = ω0`: counts the oscillator's own photons (a-operators).
    SystemPhotons,
    /// `ω_c = ω`: counts drive photons (b-operators).
    PumpPhotons,
    Custom,
}

/// Reference frequency used to define the ladder operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisChoice {
    pub kind: BasisKind,
    pub omega_c: f64,
}

impl BasisChoice {
    pub fn system_photons(params: &SystemParams) -> Self {
        BasisChoice {
            kind: BasisKind::SystemPhotons,
            omega_c: params.omega0,
        }
    }

    pub fn pump_photons(params: &SystemParams) -> Self {
        BasisChoice {
            kind: BasisKind::PumpPhotons,
            omega_c: params.omega,
        }
    }

    pub fn custom(omega_c: f64) -> Self {
        BasisChoice {
            kind: BasisKind::Custom,
            omega_c,
        }
    }

    pub fn of_kind(kind: BasisKind, params: &SystemParams) -> Self {
        match kind {
            BasisKind::SystemPhotons => Self::system_photons(params),
            BasisKind::PumpPhotons => Self::pump_photons(params),
            BasisKind::Custom => Self::custom(params.omega0),
        }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        if !(self.omega_c > 0.0) || !self.omega_c.is_finite() {
            return Err(Error::invalid(format!(
                "reference frequency must be positive, got {}",
                self.omega_c
            )));
        }
        let expected = match self.kind {
            BasisKind::SystemPhotons => Some(params.omega0),
            BasisKind::PumpPhotons => Some(params.omega),
            BasisKind::Custom => None,
        };
        if let Some(w) = expected {
            if self.omega_c != w {
                return Err(Error::invalid(format!(
                    "{:?} basis requires omega_c = {w}, got {}",
                    self.kind, self.omega_c
                )));
            }
        }
        Ok(())
    }
}

/// Rotating-frame Kerr coefficients `(Δ_c, U_c, F_c)` for one reference
/// frequency. `U_c` scales as ħ and `F_c` as ħ^(-1/2); the ħ-free parts are
/// kept separately so that the classical limit can be taken symbolically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RWACoefficients {
    pub delta_c: f64,
    pub u_c: f64,
    pub f_c: f64,
    pub omega_c: f64,
    pub hbar: f64,
    /// `U_c / ħ`
    pub kerr_per_hbar: f64,
    /// `F_c · √ħ`
    pub drive_sqrt_hbar: f64,
}

impl RWACoefficients {
    /// Coefficients given directly, for building test Hamiltonians.
    pub fn new(delta_c: f64, u_c: f64, f_c: f64, omega_c: f64, hbar: f64) -> Self {
        RWACoefficients {
            delta_c,
            u_c,
            f_c,
            omega_c,
            hbar,
            kerr_per_hbar: u_c / hbar,
            drive_sqrt_hbar: f_c * hbar.sqrt(),
        }
    }
}

/// Computes `(Δ_c, U_c, F_c)` for the given basis.
///
/// `Δ_c = ω − (ω_c² + ω0²)/(2ω_c)`, which reduces to `ω − ω0` and
/// `(ω² − ω0²)/(2ω)` for the system- and pump-photon bases.
/// `U_c = 3αħ/(4m²ω_c²)` is the normal-ordered coefficient of the Kerr
/// term, and `F_c = F/(2√(2mω_cħ))`.
pub fn compute_rwa_coefficients(
    params: &SystemParams,
    basis: &BasisChoice,
) -> Result<RWACoefficients> {
    params.validate()?;
    basis.validate(params)?;
    let SystemParams {
        m,
        omega0,
        alpha,
        force,
        omega,
        hbar,
        ..
    } = *params;
    let wc = basis.omega_c;

    let delta_c = match basis.kind {
        BasisKind::SystemPhotons => omega - omega0,
        BasisKind::PumpPhotons => (omega * omega - omega0 * omega0) / (2.0 * omega),
        BasisKind::Custom => omega - (wc * wc + omega0 * omega0) / (2.0 * wc),
    };
    let kerr_per_hbar = 3.0 * alpha / (4.0 * m * m * wc * wc);
    let drive_sqrt_hbar = force / (2.0 * (2.0 * m * wc).sqrt());

    Ok(RWACoefficients {
        delta_c,
        u_c: kerr_per_hbar * hbar,
        f_c: drive_sqrt_hbar / hbar.sqrt(),
        omega_c: wc,
        hbar,
        kerr_per_hbar,
        drive_sqrt_hbar,
    })
}

/// Bogoliubov coefficients relating the two Fock bases,
/// `a = μ b − ν b†`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovCoefficients {
    pub mu: f64,
    pub nu: f64,
    /// Squeeze parameter with `μ = cosh|z|`, `ν = sign(z) sinh|z|`.
    pub z: f64,
}

pub fn bogoliubov_coefficients(omega0: f64, omega: f64) -> Result<BogoliubovCoefficients> {
    if !(omega0 > 0.0 && omega > 0.0) || !omega0.is_finite() || !omega.is_finite() {
        return Err(Error::invalid(format!(
            "frequencies must be positive, got ({omega0}, {omega})"
        )));
    }
    let r = (omega / omega0).sqrt();
    let mu = 0.5 * (r + 1.0 / r);
    let nu = 0.5 * (r - 1.0 / r);
    // z = ln r exactly; arccosh(μ) loses precision near μ = 1.
    let z = r.ln();
    Ok(BogoliubovCoefficients { mu, nu, z })
}

/// The three dimensionless smallness parameters of first-order averaging:
/// `αX²/(mω²)`, `|ω² − ω0²|/ω²` and `√(αF²/(m³ω⁶))`.
pub fn validity_epsilon(params: &SystemParams, amplitude: f64) -> Result<[f64; 3]> {
    params.validate()?;
    if !(amplitude >= 0.0) {
        return Err(Error::invalid(format!(
            "amplitude must be non-negative, got {amplitude}"
        )));
    }
    let SystemParams {
        m,
        omega0,
        alpha,
        force,
        omega,
        ..
    } = *params;
    let w2 = omega * omega;
    let eps1 = alpha * amplitude * amplitude / (m * w2);
    let eps2 = (w2 - omega0 * omega0).abs() / w2;
    let eps3 = (alpha * force * force / (m.powi(3) * w2.powi(3))).sqrt();
    Ok([eps1, eps2, eps3])
}
