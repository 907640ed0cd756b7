//! The three k-step subspace constructions: the naive Krylov projection,
//! the Gram-Schmidt-orthogonalized projection, and the Arnoldi
//! factorization, plus extraction of the dominant Ritz pair.
//!
//! All three project onto the same Krylov space; they differ only in how
//! the basis is parameterized, which is exactly what separates their
//! numerical behavior as the subspace grows.

use crate::dense::DenseMatrix;
use crate::eig::{self, DominantEigen, EigenPairSet};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::{MatvecCounter, SparseMatrix};
use crate::vecops;

/// Relative threshold under which a candidate basis vector counts as
/// linearly dependent (Arnoldi breakdown / Gram-Schmidt rank loss).
const DEPENDENCE_TOL: f64 = 1e-13;

/// Orthonormal Krylov basis `V`, reduced upper-Hessenberg matrix
/// `H = V^T A V`, and the cached products `W = A V`.
///
/// On breakdown the factorization is truncated: the achieved subspace is
/// invariant under `A` and its Ritz pairs are exact.
#[derive(Debug, Clone)]
pub struct ArnoldiFactorization<R: Real> {
    /// Orthonormal basis columns, `k_effective` of them.
    pub basis: Vec<Vec<R>>,
    /// `k_effective x k_effective` upper-Hessenberg reduced matrix.
    pub hessenberg: DenseMatrix<R>,
    /// `images[j] = A * basis[j]`, cached so residuals cost no extra
    /// matrix-vector products.
    pub images: Vec<Vec<R>>,
    /// Set when the recurrence broke down at step `n` (1-based), i.e. the
    /// span of the first `n` vectors is A-invariant.
    pub breakdown_at: Option<usize>,
    pub k_effective: usize,
}

/// A (not necessarily orthonormal) Krylov basis with its projected
/// operator `K` and Gram matrix `M`.
#[derive(Debug, Clone)]
pub struct KrylovProjection<R: Real> {
    pub basis: Vec<Vec<R>>,
    /// `K[i][j] = basis_i . (A basis_j)`.
    pub projected: DenseMatrix<R>,
    /// `M[i][j] = basis_i . basis_j`; the identity for orthonormal bases.
    pub gram: DenseMatrix<R>,
    /// Condition estimate of the Gram matrix of the *raw* Krylov vectors
    /// (for the orthogonalized variant this is the diagnostic for how
    /// close the naive method came to failing).
    pub gram_condition: R,
}

impl<R: Real> KrylovProjection<R> {
    /// Solve the projected eigenproblem `K a = lambda M a`.
    pub fn ritz(&self) -> Result<EigenPairSet<R>> {
        eig::generalized_eigen(&self.projected, &self.gram).map(|(pairs, _)| pairs)
    }
}

/// Output of one k-step: the assembled long iterate `y = V a`, the
/// leading Ritz values, and the cached-product residual of the dominant
/// pair.
#[derive(Debug, Clone)]
pub struct KstepOutput<R: Real> {
    /// `V a`, normalized.
    pub iterate: Vec<R>,
    /// Leading Ritz values (complex ones reported by magnitude).
    pub values: Vec<R>,
    pub is_complex: Vec<bool>,
    /// Reduced eigenvector `a`, unit norm, largest component positive.
    pub coefficients: Vec<R>,
    /// `||A y - lambda_1 y||`, computed from the cached `W = A V`.
    pub residual: R,
}

/// Modified Gram-Schmidt orthonormalization of the given columns.
///
/// Errors with the offending column index when a column's post-projection
/// norm collapses below `1e-13` of its input norm.
pub fn mgs_orthonormalize<R: Real>(columns: &[Vec<R>]) -> Result<Vec<Vec<R>>> {
    mgs_with_coefficients(columns).map(|(q, _)| q)
}

/// Modified Gram-Schmidt returning both the orthonormal columns and the
/// upper-triangular coefficient matrix, so `S = Q R`.
pub fn mgs_with_coefficients<R: Real>(
    columns: &[Vec<R>],
) -> Result<(Vec<Vec<R>>, DenseMatrix<R>)> {
    mgs_impl(columns, false)
}

/// As [`mgs_with_coefficients`], with a second projection pass per column
/// folded into the coefficients. Needed when the input columns are close
/// to dependent (the block solver's `[W, AW]` near convergence), where a
/// single pass loses the orthogonality that the projected eigenproblem
/// relies on.
pub fn mgs_with_coefficients_reorth<R: Real>(
    columns: &[Vec<R>],
) -> Result<(Vec<Vec<R>>, DenseMatrix<R>)> {
    mgs_impl(columns, true)
}

/// Modified Gram-Schmidt that drops dependent columns instead of
/// erroring. Returns the orthonormal columns, the coefficient matrix over
/// the kept columns, and the kept column indices, so
/// `columns[kept] = Q R`. Used where the input is structurally redundant
/// (the block solver's `[W, AW]` when `W` starts as a Krylov chain).
pub(crate) fn mgs_deflating<R: Real>(
    columns: &[Vec<R>],
) -> (Vec<Vec<R>>, DenseMatrix<R>, Vec<usize>) {
    let mut kept: Vec<usize> = Vec::new();
    let mut q: Vec<Vec<R>> = Vec::new();
    let mut coeffs: Vec<Vec<R>> = Vec::new(); // per kept column, over q
    for (j, col) in columns.iter().enumerate() {
        let original_norm = vecops::norm2(col);
        let mut v = col.clone();
        let mut r_col = Vec::with_capacity(q.len() + 1);
        for qi in q.iter() {
            let c = vecops::dot(qi, &v);
            vecops::axpy_neg(&mut v, c, qi);
            r_col.push(c);
        }
        for (i, qi) in q.iter().enumerate() {
            let c = vecops::dot(qi, &v);
            r_col[i] = r_col[i] + c;
            vecops::axpy_neg(&mut v, c, qi);
        }
        let nrm = vecops::norm2(&v);
        if nrm <= R::of(DEPENDENCE_TOL) * original_norm || nrm == R::zero() {
            continue;
        }
        r_col.push(nrm);
        vecops::scale_in_place(&mut v, nrm.recip());
        q.push(v);
        coeffs.push(r_col);
        kept.push(j);
    }
    let dim = q.len();
    let mut r = DenseMatrix::zeros(dim);
    for (j, r_col) in coeffs.iter().enumerate() {
        for (i, &c) in r_col.iter().enumerate() {
            r.set(i, j, c);
        }
    }
    (q, r, kept)
}

fn mgs_impl<R: Real>(
    columns: &[Vec<R>],
    reorthogonalize: bool,
) -> Result<(Vec<Vec<R>>, DenseMatrix<R>)> {
    let k = columns.len();
    let mut q: Vec<Vec<R>> = Vec::with_capacity(k);
    let mut r = DenseMatrix::zeros(k);
    for (j, col) in columns.iter().enumerate() {
        let original_norm = vecops::norm2(col);
        let mut v = col.clone();
        for (i, qi) in q.iter().enumerate() {
            let c = vecops::dot(qi, &v);
            r.set(i, j, c);
            vecops::axpy_neg(&mut v, c, qi);
        }
        if reorthogonalize {
            for (i, qi) in q.iter().enumerate() {
                let c = vecops::dot(qi, &v);
                r.set(i, j, r.get(i, j) + c);
                vecops::axpy_neg(&mut v, c, qi);
            }
        }
        let nrm = vecops::norm2(&v);
        if nrm <= R::of(DEPENDENCE_TOL) * original_norm || nrm == R::zero() {
            return Err(Error::RankDeficient { column: j });
        }
        r.set(j, j, nrm);
        vecops::scale_in_place(&mut v, nrm.recip());
        q.push(v);
    }
    Ok((q, r))
}

/// Raw Krylov vectors `y1, A y1, ..., A^{k-1} y1` (the first normalized
/// once for scale safety).
fn raw_krylov_basis<R: Real>(
    a: &SparseMatrix<R>,
    y1: &[R],
    k: usize,
    counter: &mut MatvecCounter,
) -> Result<Vec<Vec<R>>> {
    let mut basis = Vec::with_capacity(k);
    basis.push(vecops::normalize(y1)?);
    for j in 1..k {
        let next = a.matvec(&basis[j - 1], counter)?;
        if vecops::norm2(&next) == R::zero() {
            return Err(Error::ZeroVector);
        }
        basis.push(next);
    }
    Ok(basis)
}

fn gram_matrix<R: Real>(columns: &[Vec<R>]) -> DenseMatrix<R> {
    let k = columns.len();
    let mut m = DenseMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            let v = vecops::dot(&columns[i], &columns[j]);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

/// The naive k-step projection: raw Krylov vectors, projected operator
/// `K` and Gram matrix `M`, solved later as `K a = lambda M a`.
///
/// Uses exactly `k` products (the k-th power fills the last column of
/// `K`). The returned condition estimate of `M` is what blows up with
/// `k` and makes this variant fail.
pub fn naive_kstep_projection<R: Real>(
    a: &SparseMatrix<R>,
    y1: &[R],
    k: usize,
    counter: &mut MatvecCounter,
) -> Result<KrylovProjection<R>> {
    assert!(k >= 1, "k must be at least 1");
    let basis = raw_krylov_basis(a, y1, k, counter)?;
    let last = a.matvec(&basis[k - 1], counter)?;
    // images[j] = A basis[j]: the shifted basis plus the final product
    let mut images: Vec<&[R]> = Vec::with_capacity(k);
    for col in basis.iter().skip(1) {
        images.push(col);
    }
    images.push(&last);

    let mut projected = DenseMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            projected.set(i, j, vecops::dot(&basis[i], images[j]));
        }
    }
    let gram = gram_matrix(&basis);
    let gram_condition = crate::diagnostics::gram_condition(&gram);
    Ok(KrylovProjection {
        basis,
        projected,
        gram,
        gram_condition,
    })
}

/// The orthogonalized k-step projection: build the raw Krylov vectors,
/// orthonormalize them, then form `K` on the orthonormal basis (`M` is
/// the identity). Costs `2k - 1` products; the raw Gram condition is
/// still reported for diagnostics.
pub fn orthogonalized_kstep_projection<R: Real>(
    a: &SparseMatrix<R>,
    y1: &[R],
    k: usize,
    counter: &mut MatvecCounter,
) -> Result<KrylovProjection<R>> {
    assert!(k >= 1, "k must be at least 1");
    let raw = raw_krylov_basis(a, y1, k, counter)?;
    let raw_cond = crate::diagnostics::gram_condition(&gram_matrix(&raw));
    let basis = mgs_orthonormalize(&raw)?;
    let mut projected = DenseMatrix::zeros(k);
    for j in 0..k {
        let image = a.matvec(&basis[j], counter)?;
        for i in 0..k {
            projected.set(i, j, vecops::dot(&basis[i], &image));
        }
    }
    Ok(KrylovProjection {
        basis,
        projected,
        gram: DenseMatrix::identity(k),
        gram_condition: raw_cond,
    })
}

/// Arnoldi with the standard default of a single orthogonalization pass.
pub fn arnoldi_factorization<R: Real>(
    a: &SparseMatrix<R>,
    y1: &[R],
    k: usize,
    counter: &mut MatvecCounter,
) -> Result<ArnoldiFactorization<R>> {
    arnoldi_factorization_with(a, y1, k, counter, false)
}

/// Arnoldi factorization: multiply by `A` only after orthogonalizing.
///
/// Coefficients are accumulated against the freshly updated residual
/// (modified Gram-Schmidt). For the final column only the projection
/// coefficients are computed; no `k+1`-st basis vector is formed. Exactly
/// `k_effective` products are consumed.
///
/// `reorthogonalize` adds one full second pass per column (diagnostic
/// use; off in all standard runs).
pub fn arnoldi_factorization_with<R: Real>(
    a: &SparseMatrix<R>,
    y1: &[R],
    k: usize,
    counter: &mut MatvecCounter,
    reorthogonalize: bool,
) -> Result<ArnoldiFactorization<R>> {
    assert!(k >= 1, "k must be at least 1");
    let mut basis: Vec<Vec<R>> = Vec::with_capacity(k);
    let mut images: Vec<Vec<R>> = Vec::with_capacity(k);
    let mut h = DenseMatrix::zeros(k);
    basis.push(vecops::normalize(y1)?);

    for col in 0..k {
        let w = a.matvec(&basis[col], counter)?;
        let mut t = w.clone();
        images.push(w);
        for (j, yj) in basis.iter().enumerate() {
            let c = vecops::dot(yj, &t);
            h.set(j, col, c);
            vecops::axpy_neg(&mut t, c, yj);
        }
        if reorthogonalize {
            for (j, yj) in basis.iter().enumerate() {
                let c = vecops::dot(yj, &t);
                h.set(j, col, h.get(j, col) + c);
                vecops::axpy_neg(&mut t, c, yj);
            }
        }
        if col == k - 1 {
            break;
        }
        let sub = vecops::norm2(&t);
        let scale = vecops::norm2(&images[col]);
        if sub <= R::of(DEPENDENCE_TOL) * scale {
            // invariant subspace found; truncate to the achieved block
            let k_eff = col + 1;
            let mut hh = DenseMatrix::zeros(k_eff);
            for i in 0..k_eff {
                for j in 0..k_eff {
                    hh.set(i, j, h.get(i, j));
                }
            }
            return Ok(ArnoldiFactorization {
                basis,
                hessenberg: hh,
                images,
                breakdown_at: Some(k_eff),
                k_effective: k_eff,
            });
        }
        h.set(col + 1, col, sub);
        vecops::scale_in_place(&mut t, sub.recip());
        basis.push(t);
    }

    Ok(ArnoldiFactorization {
        basis,
        hessenberg: h,
        images,
        breakdown_at: None,
        k_effective: k,
    })
}

/// Solve the reduced eigenproblem of a factorization and lift the
/// dominant Ritz pair back to the full space.
///
/// Requests `min(m, k_effective)` Ritz values. The residual comes from
/// the cached products: `A y = A V a = W a`, so no new multiply is
/// spent.
pub fn assemble_kstep_output<R: Real>(
    fact: &ArnoldiFactorization<R>,
    m: usize,
) -> Result<KstepOutput<R>> {
    assert!(m >= 1, "m must be at least 1");
    let k_eff = fact.k_effective;
    let pairs = eig::hessenberg_eigen(&fact.hessenberg)?;
    let dom: DominantEigen<R> = eig::select_dominant(&pairs, m.min(k_eff))?;
    let lambda1 = dom.values[0];

    let n = fact.basis[0].len();
    let mut va = vec![R::zero(); n];
    let mut wa = vec![R::zero(); n];
    for (j, &aj) in dom.vector.iter().enumerate() {
        for i in 0..n {
            va[i] = va[i] + aj * fact.basis[j][i];
            wa[i] = wa[i] + aj * fact.images[j][i];
        }
    }
    let nv = vecops::norm2(&va);
    if nv == R::zero() {
        return Err(Error::ZeroVector);
    }
    let iterate: Vec<R> = va.iter().map(|&v| v / nv).collect();
    let mut rsq = R::zero();
    for i in 0..n {
        let d = wa[i] - lambda1 * va[i];
        rsq = rsq + d * d;
    }
    let residual = rsq.sqrt() / nv;

    Ok(KstepOutput {
        iterate,
        values: dom.values,
        is_complex: dom.is_complex,
        coefficients: dom.vector,
        residual,
    })
}
