//! Mean-field equations of the Kerr model and their classical limit.
//!
//! The Heisenberg equation of `⟨c⟩ = β` under the first-order effective
//! Hamiltonian is a polynomial in `β, β*` whose coefficients carry explicit
//! powers of ħ. Substituting `β = √(mω_c/(2ħ)) (u + iv)` and dropping every
//! term with a positive net power of ħ gives a quadrature field that can be
//! compared coefficient by coefficient with the slow flow.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::{QuadratureVF, SlowFlowState};
use crate::params::{compute_rwa_coefficients, BasisChoice, RWACoefficients, SystemParams};

/// A power of ħ that is an integer multiple of 1/2, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HbarPower(i32);

impl HbarPower {
    pub const ZERO: HbarPower = HbarPower(0);

    pub fn from_halves(twice: i32) -> Self {
        HbarPower(twice)
    }

    pub fn integer(k: i32) -> Self {
        HbarPower(2 * k)
    }

    pub fn halves(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HbarPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// One `coeff · ħ^power` contribution; `coeff` is ħ-free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbarTerm {
    pub coeff: Complex64,
    pub power: HbarPower,
}

/// `Σ_k coeff_k ħ^{power_k} · β^m β*^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub m: u32,
    pub n: u32,
    pub terms: Vec<HbarTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomialVF {
    pub monomials: Vec<Monomial>,
    pub hbar: f64,
}

impl ComplexPolynomialVF {
    pub fn monomial(&self, m: u32, n: u32) -> Option<&Monomial> {
        self.monomials.iter().find(|t| t.m == m && t.n == n)
    }

    /// Full coefficient of `β^m β*^n` at the stored ħ.
    pub fn coefficient(&self, m: u32, n: u32) -> Complex64 {
        self.monomial(m, n)
            .map(|t| {
                t.terms
                    .iter()
                    .map(|h| h.coeff * self.hbar.powf(h.power.value()))
                    .sum()
            })
            .unwrap_or_default()
    }

    pub fn eval(&self, beta: Complex64) -> Complex64 {
        self.monomials
            .iter()
            .map(|t| {
                let c: Complex64 = t
                    .terms
                    .iter()
                    .map(|h| h.coeff * self.hbar.powf(h.power.value()))
                    .sum();
                c * beta.powu(t.m) * beta.conj().powu(t.n)
            })
            .sum()
    }

    fn push(&mut self, m: u32, n: u32, coeff: Complex64, power: HbarPower) {
        if coeff == Complex64::default() {
            return;
        }
        let term = HbarTerm { coeff, power };
        match self.monomials.iter_mut().find(|t| t.m == m && t.n == n) {
            Some(t) => t.terms.push(term),
            None => self.monomials.push(Monomial {
                m,
                n,
                terms: vec![term],
            }),
        }
    }
}

/// `dβ/dt = i(Δ_c − U_c) β − i U_c |β|² β + i F_c`, from
/// `iħ dβ/dt = ⟨[c, H]⟩` with `c → β`.
pub fn meanfield_eom(coeffs: &RWACoefficients, hbar: f64) -> ComplexPolynomialVF {
    let i = Complex64::i();
    let mut vf = ComplexPolynomialVF {
        monomials: Vec::new(),
        hbar,
    };
    vf.push(1, 0, i * coeffs.delta_c, HbarPower::ZERO);
    vf.push(1, 0, -i * coeffs.kerr_per_hbar, HbarPower::integer(1));
    vf.push(2, 1, -i * coeffs.kerr_per_hbar, HbarPower::integer(1));
    vf.push(0, 0, i * coeffs.drive_sqrt_hbar, HbarPower::from_halves(-1));
    vf
}

/// `ħ → 0` limit in the quadratures `β = √(mω_c/(2ħ)) (u + iv)`.
pub fn classical_limit(
    vf: &ComplexPolynomialVF,
    params: &SystemParams,
    basis: &BasisChoice,
) -> Result<QuadratureVF> {
    params.validate()?;
    basis.validate(params)?;
    let sigma = (params.m * basis.omega_c / 2.0).sqrt();
    let mut out = QuadratureVF {
        linear: [[0.0; 2]; 2],
        cubic: [[0.0; 2]; 2],
        drive: [0.0; 2],
    };
    for mono in &vf.monomials {
        let degree = (mono.m + mono.n) as i32;
        for term in &mono.terms {
            // ż = c ħ^e σ^{deg−1} ħ^{−(deg−1)/2} z^m z*^n
            let net = HbarPower::from_halves(term.power.halves() - (degree - 1));
            if net.halves() > 0 {
                continue;
            }
            if net.halves() < 0 {
                return Err(Error::Numerical(format!(
                    "monomial β^{}β*^{} diverges as ħ^{net} in the classical limit",
                    mono.m, mono.n
                )));
            }
            let c = term.coeff * sigma.powi(degree - 1);
            match (mono.m, mono.n) {
                (0, 0) => {
                    out.drive[0] += c.re;
                    out.drive[1] += c.im;
                }
                (1, 0) => add_rotation(&mut out.linear, c),
                (0, 1) => add_reflection(&mut out.linear, c),
                (2, 1) => add_rotation(&mut out.cubic, c),
                (1, 2) => add_reflection(&mut out.cubic, c),
                (m, n) => {
                    return Err(Error::Unsupported(format!(
                        "monomial β^{m}β*^{n} has no quadrature form"
                    )))
                }
            }
        }
    }
    Ok(out)
}

/// `c (u + iv)` as a real 2×2 block.
fn add_rotation(block: &mut [[f64; 2]; 2], c: Complex64) {
    block[0][0] += c.re;
    block[0][1] -= c.im;
    block[1][0] += c.im;
    block[1][1] += c.re;
}

/// `c (u − iv)` as a real 2×2 block.
fn add_reflection(block: &mut [[f64; 2]; 2], c: Complex64) {
    block[0][0] += c.re;
    block[0][1] += c.im;
    block[1][0] += c.im;
    block[1][1] -= c.re;
}

/// Mean-field classical limit for a basis, straight from the parameters.
pub fn basis_classical_limit(params: &SystemParams, basis: &BasisChoice) -> Result<QuadratureVF> {
    let coeffs = compute_rwa_coefficients(params, basis)?;
    classical_limit(&meanfield_eom(&coeffs, params.hbar), params, basis)
}

/// Adds linear damping `−(γ/2)(u, v)`.
pub fn with_damping(mut vf: QuadratureVF, gamma: f64) -> QuadratureVF {
    vf.linear[0][0] -= 0.5 * gamma;
    vf.linear[1][1] -= 0.5 * gamma;
    vf
}

/// Largest coefficient-wise relative deviation, falling back to the
/// absolute difference where both coefficients are below `1e-300`.
pub fn compare_vector_fields(a: &QuadratureVF, b: &QuadratureVF) -> f64 {
    a.coefficients()
        .iter()
        .zip(b.coefficients().iter())
        .map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            if scale < 1e-300 {
                (x - y).abs()
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Largest absolute difference between the linear blocks.
pub fn linear_block_deviation(a: &QuadratureVF, b: &QuadratureVF) -> f64 {
    let mut m = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a.linear[i][j] - b.linear[i][j]).abs());
        }
    }
    m
}

/// Stationary amplitudes of a mean-field limit with damping `γ`,
/// one per fixed point, ascending.
pub fn stationary_amplitudes(vf: &QuadratureVF, gamma: f64) -> Result<Vec<(SlowFlowState, bool)>> {
    Ok(with_damping(*vf, gamma)
        .steady_states()?
        .into_iter()
        .map(|s| (s.state, s.stable))
        .collect())
}

/// Frequencies and position amplitudes of the two tones predicted by the
/// first-order linear (`α = 0`) field in a basis, lossless, started from
/// the lab-frame state `(x0, p0)` at `t = 0`:
/// `x(t) = A_d cos(ωt − φ_d) + A_f cos(ω_f t − φ_f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearTones {
    pub drive_frequency: f64,
    pub drive_amplitude: f64,
    pub drive_phase: f64,
    pub free_frequency: f64,
    pub free_amplitude: f64,
    pub free_phase: f64,
}

impl LinearTones {
    pub fn position(&self, t: f64) -> f64 {
        self.drive_amplitude * (self.drive_frequency * t - self.drive_phase).cos()
            + self.free_amplitude * (self.free_frequency * t - self.free_phase).cos()
    }
}

pub fn linear_tones(
    params: &SystemParams,
    basis: &BasisChoice,
    initial: (f64, f64),
) -> Result<LinearTones> {
    if params.alpha != 0.0 {
        return Err(Error::invalid("tone prediction needs alpha = 0"));
    }
    let k = compute_rwa_coefficients(params, basis)?;
    if k.delta_c == 0.0 {
        return Err(Error::invalid("resonant first-order field grows secularly"));
    }
    let (m, wc, hbar) = (params.m, basis.omega_c, params.hbar);
    let sigma = (m * wc / (2.0 * hbar)).sqrt();
    let beta0 = Complex64::new(sigma * initial.0, sigma * initial.1 / (m * wc));
    let beta_ss = Complex64::new(-k.f_c / k.delta_c, 0.0);
    let x_scale = (2.0 * hbar / (m * wc)).sqrt();
    let free = beta0 - beta_ss;
    Ok(LinearTones {
        drive_frequency: params.omega,
        drive_amplitude: x_scale * beta_ss.norm(),
        drive_phase: beta_ss.arg(),
        free_frequency: params.omega - k.delta_c,
        free_amplitude: x_scale * free.norm(),
        free_phase: free.arg(),
    })
}
