//! Periodic steady state of a time-periodic Lindbladian by harmonic
//! balance.
//!
//! With `H(t) = Σ_l H_l e^{ilωt}` (even `l` only) the asymptotic state is
//! `ρ(t) = Σ_k ρ_k e^{2ikωt}`, and the harmonics satisfy
//! `(L_0 − 2ikω) ρ_k − (i/ħ) Σ_{l≠0} [H_l, ρ_{k−l/2}] = 0` with `Tr ρ_0 = 1`.
//! The coupled system is truncated at `|k| ≤ K` and solved with GMRES,
//! preconditioned by an exact LU of the `k = 0` block and the diagonal of
//! the others.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};

use super::gmres::{gmres, GmresInfo};
use super::{apply_lindblad, liouvillian, trace_row, unvectorize};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockOperator};
use crate::linalg::{self, c, CMat};
use crate::vanvleck::FourierComponents;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOptions {
    /// Retained harmonics `|k| ≤ K` of `2ω`.
    pub harmonics: usize,
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        PeriodicOptions {
            harmonics: 4,
            tol: 1e-11,
            restart: 80,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PeriodicSteadyState {
    /// Time average over one period, `ρ_0`.
    pub average: DensityMatrix,
    /// `ρ_k` for `k = −K..=K`.
    pub harmonics: Vec<FockOperator>,
    pub omega: f64,
    pub solver: GmresInfo,
}

impl PeriodicSteadyState {
    /// `ρ(t) = Σ_k ρ_k e^{2ikωt}`.
    pub fn at(&self, t: f64) -> FockOperator {
        let k_max = (self.harmonics.len() / 2) as i64;
        let n = self.average.dim();
        let mut out = FockOperator::zeros(n).expect("valid dimension");
        for (idx, rk) in self.harmonics.iter().enumerate() {
            let k = idx as i64 - k_max;
            out = &out + &rk.scale(c64::from_polar(1.0, 2.0 * k as f64 * self.omega * t));
        }
        out
    }
}

fn block(x: &[c64], n: usize, idx: usize) -> CMat {
    let off = idx * n * n;
    Mat::from_fn(n, n, |i, j| x[off + i + n * j])
}

pub fn periodic_steady_state(
    components: &FourierComponents,
    kappa: f64,
    hbar: f64,
    options: &PeriodicOptions,
) -> Result<PeriodicSteadyState> {
    if !(kappa > 0.0) {
        return Err(Error::invalid("a periodic steady state needs positive loss"));
    }
    let n = components.dim();
    let d = n * n;
    let k_max = options.harmonics as i64;
    let blocks = 2 * options.harmonics + 1;
    let omega = components.omega;
    let h0 = components.get(0).unwrap();
    let l0 = liouvillian(h0, kappa, hbar)?;
    let h0m = h0.matrix().to_owned();
    let couplings: Vec<(i64, CMat)> = components
        .iter()
        .filter(|(l, _)| *l != 0 && l.rem_euclid(2) == 0)
        .map(|(l, h)| (l as i64, h.matrix().to_owned()))
        .collect();

    let tr = trace_row(n);
    let mut m0 = l0.matrix.clone();
    for col in 0..d {
        m0[(0, col)] = tr(col);
    }
    let lu = m0.partial_piv_lu();
    let diag: Vec<c64> = (0..d).map(|k| l0.matrix[(k, k)]).collect();

    let mi = c(0.0, -1.0 / hbar);
    let apply = |x: &[c64], out: &mut [c64]| {
        let rhos: Vec<CMat> = (0..blocks).map(|b| block(x, n, b)).collect();
        let mut acc = Mat::<c64>::zeros(n, n);
        for (b, rho) in rhos.iter().enumerate() {
            let k = b as i64 - k_max;
            apply_lindblad(&h0m, kappa, hbar, rho, &mut acc);
            let shift = c(0.0, -2.0 * k as f64 * omega);
            for j in 0..n {
                for i in 0..n {
                    acc[(i, j)] += shift * rho[(i, j)];
                }
            }
            for (l, hl) in &couplings {
                let src = k - l / 2;
                if src < -k_max || src > k_max {
                    continue;
                }
                let r = &rhos[(src + k_max) as usize];
                let comm = &(hl * r) - &(r * hl);
                for j in 0..n {
                    for i in 0..n {
                        acc[(i, j)] += mi * comm[(i, j)];
                    }
                }
            }
            let off = b * d;
            for j in 0..n {
                for i in 0..n {
                    out[off + i + n * j] = acc[(i, j)];
                }
            }
            if k == 0 {
                out[off] = (0..n).map(|i| rho[(i, i)]).sum();
            }
        }
    };
    let precondition = |v: &[c64], out: &mut [c64]| {
        for b in 0..blocks {
            let k = b as i64 - k_max;
            let off = b * d;
            if k == 0 {
                let rhs = Mat::from_fn(d, 1, |i, _| v[off + i]);
                let sol = lu.solve(&rhs);
                for i in 0..d {
                    out[off + i] = sol[(i, 0)];
                }
            } else {
                let shift = c(0.0, -2.0 * k as f64 * omega);
                for i in 0..d {
                    out[off + i] = v[off + i] / (diag[i] + shift);
                }
            }
        }
    };

    let mut rhs = vec![c(0.0, 0.0); blocks * d];
    rhs[k_max as usize * d] = c(1.0, 0.0);
    let (x, info) = gmres(
        apply,
        precondition,
        &rhs,
        options.restart,
        options.max_iter,
        options.tol,
    )?;

    let harmonics: Vec<FockOperator> = (0..blocks)
        .map(|b| unvectorize(n, |i| x[b * d + i]))
        .collect::<Result<_>>()?;
    let avg = &harmonics[k_max as usize];
    let herm = linalg::hermitian_part(avg.matrix());
    let t = linalg::trace(herm.as_ref());
    let average = DensityMatrix::unchecked(FockOperator::from_fn(n, |i, j| herm[(i, j)] / t)?);
    Ok(PeriodicSteadyState {
        average,
        harmonics,
        omega,
        solver: info,
    })
}
