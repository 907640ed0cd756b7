//! Residuals, Rayleigh quotients, per-mode amplification ratios of the
//! extrapolation step, Gram-matrix conditioning probes, and the sparse
//! operation-count model.

use crate::dense::DenseMatrix;
use crate::eig;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::{MatvecCounter, SparseMatrix};
use crate::vecops;

/// Components below this fraction of `||y_prev||` leave a mode's ratio
/// undefined rather than blowing up the division.
const UNAVAILABLE_TOL: f64 = 1e-14;

/// Per-eigendirection amplification factors of one extrapolation step.
///
/// `eta[i]` is the component ratio of consecutive iterates along mode
/// `i`; `eta_hat[i]` is the same ratio after the extrapolated combination.
/// They satisfy `eta_hat = (1 - gamma) * eta + gamma` identically.
/// Entries with `available[i] == false` hold NaN (the previous iterate
/// had no usable component along that mode).
#[derive(Debug, Clone)]
pub struct ModeRatios<R> {
    pub eta: Vec<R>,
    pub eta_hat: Vec<R>,
    pub available: Vec<bool>,
    pub gamma: R,
}

/// `||A y - lambda y||` with one product; `y` is normalized first if it
/// is not already unit to 1e-12.
pub fn residual_norm<R: Real>(
    a: &SparseMatrix<R>,
    lambda: R,
    y: &[R],
    counter: &mut MatvecCounter,
) -> Result<R> {
    let nrm = vecops::norm2(y);
    if nrm == R::zero() {
        return Err(Error::ZeroVector);
    }
    let yn: Vec<R>;
    let yref: &[R] = if (nrm - R::one()).abs() > R::of(1e-12) {
        yn = y.iter().map(|&v| v / nrm).collect();
        &yn
    } else {
        y
    };
    let w = a.matvec(yref, counter)?;
    let mut rsq = R::zero();
    for i in 0..yref.len() {
        let d = w[i] - lambda * yref[i];
        rsq = rsq + d * d;
    }
    Ok(rsq.sqrt())
}

/// `x^T A x / x^T x` with one product.
pub fn rayleigh_quotient<R: Real>(
    a: &SparseMatrix<R>,
    x: &[R],
    counter: &mut MatvecCounter,
) -> Result<R> {
    let xx = vecops::dot(x, x);
    if xx == R::zero() {
        return Err(Error::ZeroVector);
    }
    let ax = a.matvec(x, counter)?;
    Ok(vecops::dot(x, &ax) / xx)
}

/// Component ratios of consecutive iterates along the supplied
/// orthonormal eigendirections (the standard basis for diagonal
/// operators).
pub fn mode_ratios<R: Real>(
    y_prev: &[R],
    y_next: &[R],
    u_next: &[R],
    gamma: R,
    eigenbasis: &[Vec<R>],
) -> ModeRatios<R> {
    let scale = vecops::norm2(y_prev);
    let cutoff = R::of(UNAVAILABLE_TOL) * scale;
    let mut eta = Vec::with_capacity(eigenbasis.len());
    let mut eta_hat = Vec::with_capacity(eigenbasis.len());
    let mut available = Vec::with_capacity(eigenbasis.len());
    for v in eigenbasis {
        let cp = vecops::dot(v, y_prev);
        if cp.abs() < cutoff {
            eta.push(R::nan());
            eta_hat.push(R::nan());
            available.push(false);
        } else {
            eta.push(vecops::dot(v, y_next) / cp);
            eta_hat.push(vecops::dot(v, u_next) / cp);
            available.push(true);
        }
    }
    ModeRatios {
        eta,
        eta_hat,
        available,
        gamma,
    }
}

/// Operation count of one k-step factorization on an `N x N` operator
/// with `kappa` entries per row: `k` products at `N kappa` plus `k^2`
/// dot products at `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostEstimate {
    pub k: u64,
    pub n: u64,
    pub kappa: u64,
    pub total_ops: u64,
}

pub fn cost_estimate(k: u64, n: u64, kappa: u64) -> CostEstimate {
    CostEstimate {
        k,
        n,
        kappa,
        total_ops: k * n * kappa + k * k * n,
    }
}

/// 2-norm condition estimate of a symmetric matrix via its dense
/// spectrum; numerically singular inputs report the infinity sentinel
/// instead of erroring.
pub fn gram_condition<R: Real>(m: &DenseMatrix<R>) -> R {
    eig::spectral_condition(m).unwrap_or_else(|_| R::infinity())
}
