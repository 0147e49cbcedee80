//! Operators and states on a truncated Fock space.

use std::ops::{Add, Mul, Sub};

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

/// Dense operator on the lowest `N` number states.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    data: CMat,
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("Fock dimension must be at least 2, got {n}")));
    }
    Ok(())
}

impl FockOperator {
    pub fn from_mat(data: CMat) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                got: data.ncols(),
            });
        }
        check_dim(data.nrows())?;
        let finite = (0..data.ncols())
            .all(|j| (0..data.nrows()).all(|i| data[(i, j)].re.is_finite() && data[(i, j)].im.is_finite()));
        if !finite {
            return Err(Error::invalid("operator has non-finite entries"));
        }
        Ok(FockOperator { data })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        check_dim(n)?;
        Self::from_mat(Mat::from_fn(n, n, f))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(FockOperator { data: Mat::zeros(n, n) })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(FockOperator { data: linalg::identity(n) })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.data.as_ref()
    }

    pub fn into_mat(self) -> CMat {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.data[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        FockOperator {
            data: self.data.adjoint().to_owned(),
        }
    }

    pub fn scale(&self, s: c64) -> Self {
        FockOperator {
            data: Mat::from_fn(self.dim(), self.dim(), |i, j| self.data[(i, j)] * s),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    /// Upper-left `k × k` block.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: k,
            });
        }
        check_dim(k)?;
        Ok(FockOperator {
            data: linalg::top_left(self.matrix(), k),
        })
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(self.matrix())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        same_dim(self.dim(), other.dim())?;
        Ok(linalg::max_abs_diff(self.matrix(), other.matrix()))
    }

    /// `max |A − B|` over the upper-left `k × k` block.
    pub fn block_diff(&self, other: &Self, k: usize) -> Result<f64> {
        same_dim(self.dim(), other.dim())?;
        let k = k.min(self.dim());
        Ok(linalg::max_abs_diff(
            self.data.submatrix(0, 0, k, k),
            other.data.submatrix(0, 0, k, k),
        ))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = FockOperator {
            data: linalg::identity(self.dim()),
        };
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn diagonal(&self) -> Vec<c64> {
        (0..self.dim()).map(|i| self.data[(i, i)]).collect()
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    /// Panics if the dimensions differ.
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "Fock dimension mismatch");
        FockOperator {
            data: &self.data * &rhs.data,
        }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;

    fn add(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "Fock dimension mismatch");
        FockOperator {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;

    fn sub(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "Fock dimension mismatch");
        FockOperator {
            data: &self.data - &rhs.data,
        }
    }
}

pub fn annihilation(n: usize) -> Result<FockOperator> {
    FockOperator::from_fn(n, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn creation(n: usize) -> Result<FockOperator> {
    Ok(annihilation(n)?.adjoint())
}

pub fn number(n: usize) -> Result<FockOperator> {
    FockOperator::from_fn(n, |i, j| if i == j { c(i as f64, 0.0) } else { c(0.0, 0.0) })
}

/// `x = √(ħ/(2mω_c)) (a† + a)`.
pub fn position(n: usize, m: f64, omega_c: f64, hbar: f64) -> Result<FockOperator> {
    check_quadrature_args(m, omega_c, hbar)?;
    let s = (hbar / (2.0 * m * omega_c)).sqrt();
    let a = annihilation(n)?;
    Ok((&a + &a.adjoint()).scale_re(s))
}

/// `p = i √(mħω_c/2) (a† − a)`.
pub fn momentum(n: usize, m: f64, omega_c: f64, hbar: f64) -> Result<FockOperator> {
    check_quadrature_args(m, omega_c, hbar)?;
    let s = (m * hbar * omega_c / 2.0).sqrt();
    let a = annihilation(n)?;
    Ok((&a.adjoint() - &a).scale(c(0.0, s)))
}

fn check_quadrature_args(m: f64, omega_c: f64, hbar: f64) -> Result<()> {
    if !(m > 0.0 && omega_c > 0.0 && hbar > 0.0) {
        return Err(Error::invalid(format!(
            "mass, frequency and hbar must be positive, got ({m}, {omega_c}, {hbar})"
        )));
    }
    Ok(())
}

/// Squeeze operator together with the number of leading columns that are
/// exact to working precision.
#[derive(Debug, Clone)]
pub struct Squeeze {
    pub op: FockOperator,
    pub z: f64,
    /// Columns `j < exact_dim` lose less than `LEAK_TOL` probability
    /// beyond the truncation.
    pub exact_dim: usize,
}

pub const MAX_SQUEEZE: f64 = 2.0;
const LEAK_TOL: f64 = 1e-10;

/// `S(z) = exp((z/2)(a² − a†²))` on `n` states.
///
/// The exponential is taken in a padded space and truncated, so `S†S = 1`
/// holds only on the block of columns whose squeezed image stays inside
/// the truncation; that block is measured and reported.
pub fn squeeze_operator(z: f64, n: usize) -> Result<Squeeze> {
    check_dim(n)?;
    if !(z.abs() <= MAX_SQUEEZE) {
        return Err(Error::invalid(format!("|z| must not exceed {MAX_SQUEEZE}, got {z}")));
    }
    let spread = ((2.0 * z.abs()).exp() - 1.0) * n as f64;
    let padded = n + (spread.ceil() as usize).min(n) + 16;
    let a = annihilation(padded)?;
    let a2 = &a * &a;
    let gen = (&a2 - &a2.adjoint()).scale_re(0.5 * z);
    let full = linalg::expm(gen.matrix());

    let mut exact_dim = 0;
    for j in 0..n {
        let leak: f64 = (n..padded).map(|i| full[(i, j)].norm_sqr()).sum();
        if leak > LEAK_TOL {
            break;
        }
        exact_dim = j + 1;
    }
    if exact_dim == 0 {
        return Err(Error::Truncation(format!(
            "squeezed vacuum at z = {z} does not fit in {n} states"
        )));
    }
    Ok(Squeeze {
        op: FockOperator {
            data: linalg::top_left(full.as_ref(), n),
        },
        z,
        exact_dim,
    })
}

/// Conjugation `X ↦ S(z)† X S(z)`, which maps the system-photon description
/// to the pump-photon one: `S† a S = cosh(z) a − sinh(z) a†`.
pub trait BasisTransform: Sized {
    fn transform_basis(&self, z: f64) -> Result<Self>;
}

impl BasisTransform for FockOperator {
    /// Exact on the leading `squeeze_operator(z, dim).exact_dim` block.
    fn transform_basis(&self, z: f64) -> Result<Self> {
        if z == 0.0 {
            return Ok(self.clone());
        }
        let s = squeeze_operator(z, self.dim())?.op;
        Ok(&(&s.adjoint() * self) * &s)
    }
}

impl BasisTransform for DensityMatrix {
    /// Fails if the state has weight outside the exact block of `S(z)`.
    fn transform_basis(&self, z: f64) -> Result<Self> {
        if z == 0.0 {
            return Ok(self.clone());
        }
        let sq = squeeze_operator(z, self.dim())?;
        let outside = self.tail_weight(sq.exact_dim);
        if outside > 1e-10 {
            return Err(Error::Truncation(format!(
                "state weight {outside:.2e} lies outside the {} exact states of S({z})",
                sq.exact_dim
            )));
        }
        let s = sq.op;
        let data = &(&s.adjoint() * &self.op) * &s;
        Ok(DensityMatrix { op: data })
    }
}

pub fn transform_basis<T: BasisTransform>(x: &T, z: f64) -> Result<T> {
    x.transform_basis(z)
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: FockOperator,
}

/// Deviations of a candidate density matrix from its defining properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    pub fn new(op: FockOperator) -> Result<Self> {
        let d = diagnostics(&op)?;
        if d.hermiticity > Self::HERMITICITY_TOL {
            return Err(Error::NonHermitian(d.hermiticity));
        }
        if d.trace_error > Self::TRACE_TOL {
            return Err(Error::invalid(format!("trace differs from 1 by {:.3e}", d.trace_error)));
        }
        if d.min_eigenvalue < -Self::POSITIVITY_TOL {
            return Err(Error::invalid(format!(
                "negative eigenvalue {:.3e}",
                d.min_eigenvalue
            )));
        }
        Ok(DensityMatrix { op })
    }

    /// Wraps without checks; for intermediate results whose invariants
    /// are monitored by the caller.
    pub(crate) fn unchecked(op: FockOperator) -> Self {
        DensityMatrix { op }
    }

    pub fn fock(n: usize, k: usize) -> Result<Self> {
        check_dim(n)?;
        if k >= n {
            return Err(Error::invalid(format!("Fock state {k} outside dimension {n}")));
        }
        let op = FockOperator::from_fn(n, |i, j| if i == k && j == k { c(1.0, 0.0) } else { c(0.0, 0.0) })?;
        Ok(DensityMatrix { op })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::fock(n, 0)
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &[c64]) -> Result<Self> {
        check_dim(psi.len())?;
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::invalid("state vector is zero"));
        }
        let op = FockOperator::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj() / (norm * norm))?;
        Ok(DensityMatrix { op })
    }

    /// Truncated and renormalized coherent state `|β⟩`.
    pub fn coherent(n: usize, beta: c64) -> Result<Self> {
        let mut psi = Vec::with_capacity(n);
        let mut amp = c((-0.5 * beta.norm_sqr()).exp(), 0.0);
        for k in 0..n {
            psi.push(amp);
            amp = amp * beta / ((k + 1) as f64).sqrt();
        }
        Self::pure(&psi)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &FockOperator {
        &self.op
    }

    pub fn into_operator(self) -> FockOperator {
        self.op
    }

    pub fn diagnostics(&self) -> Result<StateDiagnostics> {
        diagnostics(&self.op)
    }

    /// Population of the number states `k ≥ from`.
    pub fn tail_weight(&self, from: usize) -> f64 {
        (from..self.dim()).map(|k| self.op.get(k, k).re).sum::<f64>().max(0.0)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.op.diagonal().iter().map(|z| z.re).collect()
    }

    /// `½ Σ|λ_i|` of `ρ − σ`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        same_dim(self.dim(), other.dim())?;
        let diff = &self.op - &other.op;
        let ev = linalg::hermitian_eigenvalues(diff.matrix())?;
        Ok(0.5 * ev.iter().map(|e| e.abs()).sum::<f64>())
    }
}

fn diagnostics(op: &FockOperator) -> Result<StateDiagnostics> {
    let tr = linalg::trace(op.matrix());
    let ev = linalg::hermitian_eigenvalues(op.matrix())?;
    Ok(StateDiagnostics {
        trace_error: (tr - c(1.0, 0.0)).norm(),
        hermiticity: op.hermiticity_deviation(),
        min_eigenvalue: ev.first().copied().unwrap_or(0.0),
    })
}

/// `Tr(ρ A)`.
pub fn expectation(state: &DensityMatrix, op: &FockOperator) -> Result<c64> {
    same_dim(state.dim(), op.dim())?;
    let r = state.op.matrix();
    let a = op.matrix();
    let n = state.dim();
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += r[(i, k)] * a[(k, i)];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_annihilation() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.get(0, 1), c(1.0, 0.0));
        assert_eq!(a.get(0, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 1), c(0.0, 0.0));
        assert!(annihilation(1).is_err());
    }

    #[test]
    fn truncated_commutator() {
        let n = 9;
        let a = annihilation(n).unwrap();
        let comm = a.commutator(&a.adjoint());
        for i in 0..n {
            for j in 0..n {
                let want = if i != j {
                    0.0
                } else if i == n - 1 {
                    1.0 - n as f64
                } else {
                    1.0
                };
                assert!((comm.get(i, j) - c(want, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn position_second_moment() {
        let (m, w, hb) = (1.3, 0.7, 0.2);
        let x = position(12, m, w, hb).unwrap();
        let x2 = &x * &x;
        for k in 0..=10 {
            let want = hb / (2.0 * m * w) * (2 * k + 1) as f64;
            assert!((x2.get(k, k).re - want).abs() < 1e-14);
        }
        assert_eq!(x.hermiticity_deviation(), 0.0);
        assert_eq!(momentum(12, m, w, hb).unwrap().hermiticity_deviation(), 0.0);
    }

    #[test]
    fn zero_squeeze_is_identity() {
        let s = squeeze_operator(0.0, 10).unwrap();
        assert_eq!(s.exact_dim, 10);
        assert!(s.op.max_abs_diff(&FockOperator::identity(10).unwrap()).unwrap() < 1e-15);
        assert!(squeeze_operator(2.5, 10).is_err());
    }

    #[test]
    fn expectations() {
        let n = number(6).unwrap();
        assert_eq!(expectation(&DensityMatrix::vacuum(6).unwrap(), &n).unwrap(), c(0.0, 0.0));
        assert_eq!(expectation(&DensityMatrix::fock(6, 4).unwrap(), &n).unwrap(), c(4.0, 0.0));
        assert!(expectation(&DensityMatrix::vacuum(5).unwrap(), &n).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let bad = FockOperator::from_fn(3, |i, j| if i == j { c(0.5, 0.0) } else { c(0.0, 0.0) }).unwrap();
        assert!(DensityMatrix::new(bad).is_err());
        let coh = DensityMatrix::coherent(30, c(1.0, 0.5)).unwrap();
        let d = coh.diagnostics().unwrap();
        assert!(d.trace_error < 1e-12 && d.min_eigenvalue > -1e-12);
    }
}
