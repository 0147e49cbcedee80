//! Restarted GMRES with right preconditioning for complex systems.

use faer::c64;

use crate::error::{Error, Result};
use crate::linalg::c;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresInfo {
    pub iterations: usize,
    /// `‖b − Ax‖ / ‖b‖` of the returned solution.
    pub relative_residual: f64,
}

fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solves `A x = b` given `apply(v, out) = A v` and
/// `precondition(v, out) ≈ A⁻¹ v`, restarting every `restart` iterations.
pub fn gmres<A, P>(
    mut apply: A,
    mut precondition: P,
    b: &[c64],
    restart: usize,
    max_iter: usize,
    tol: f64,
) -> Result<(Vec<c64>, GmresInfo)>
where
    A: FnMut(&[c64], &mut [c64]),
    P: FnMut(&[c64], &mut [c64]),
{
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![c(0.0, 0.0); n];
    if b_norm == 0.0 {
        return Ok((
            x,
            GmresInfo {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let restart = restart.max(1);
    let mut work = vec![c(0.0, 0.0); n];
    let mut z = vec![c(0.0, 0.0); n];
    let mut r = b.to_vec();
    let mut iterations = 0;

    loop {
        // r = b − A x
        apply(&x, &mut work);
        for i in 0..n {
            r[i] = b[i] - work[i];
        }
        let beta = norm(&r);
        let rel = beta / b_norm;
        if rel <= tol {
            return Ok((
                x,
                GmresInfo {
                    iterations,
                    relative_residual: rel,
                },
            ));
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                time: f64::NAN,
                reason: format!("GMRES stalled at relative residual {rel:.3e} after {iterations} iterations"),
            });
        }

        let mut basis: Vec<Vec<c64>> = Vec::with_capacity(restart + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![c(0.0, 0.0); restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![c(0.0, 0.0); restart];
        let mut g = vec![c(0.0, 0.0); restart + 1];
        g[0] = c(beta, 0.0);
        let mut k_used = 0;

        for k in 0..restart {
            precondition(&basis[k], &mut z);
            apply(&z, &mut work);
            for (i, v) in basis.iter().enumerate() {
                let hik = dot(v, &work);
                h[i][k] = hik;
                for (w, vi) in work.iter_mut().zip(v) {
                    *w -= hik * vi;
                }
            }
            let h_next = norm(&work);
            h[k + 1][k] = c(h_next, 0.0);

            for i in 0..k {
                let (a, bb) = (h[i][k], h[i + 1][k]);
                h[i][k] = a * cs[i] + sn[i] * bb;
                h[i + 1][k] = -sn[i].conj() * a + bb * cs[i];
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let rr = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if rr == 0.0 {
                cs[k] = 1.0;
                sn[k] = c(0.0, 0.0);
            } else if a.norm() == 0.0 {
                cs[k] = 0.0;
                sn[k] = c(1.0, 0.0);
            } else {
                cs[k] = a.norm() / rr;
                sn[k] = (a / a.norm()) * bb.conj() / rr;
            }
            h[k][k] = a * cs[k] + sn[k] * bb;
            h[k + 1][k] = c(0.0, 0.0);
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];

            iterations += 1;
            k_used = k + 1;
            let converged = g[k + 1].norm() / b_norm <= tol * 0.5;
            if converged || h_next == 0.0 || iterations >= max_iter {
                break;
            }
            basis.push(work.iter().map(|v| v / h_next).collect());
        }

        // Back-substitute the triangular system and update x += M⁻¹ V y.
        let mut y = vec![c(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![c(0.0, 0.0); n];
        for (j, yj) in y.iter().enumerate() {
            for (u, v) in update.iter_mut().zip(&basis[j]) {
                *u += yj * v;
            }
        }
        precondition(&update, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
    }
}
