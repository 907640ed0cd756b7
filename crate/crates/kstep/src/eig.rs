//! Dense eigensolver for the reduced (projected) problems.
//!
//! Householder reduction to Hessenberg form followed by shifted QR
//! iteration with eigenvector back-substitution, in the EISPACK
//! orthes/hqr2 lineage. Sizes here are the Krylov subspace dimension, so
//! the O(k^3) cost is negligible next to the matrix-vector products.

use std::cmp::Ordering;

use num_complex::Complex;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cap on total QR sweeps, as a multiple of the matrix dimension.
const MAX_SWEEPS_PER_DIM: usize = 50;

/// Condition-estimate threshold beyond which a Gram matrix is treated as
/// numerically singular.
pub const SINGULAR_COND_LIMIT: f64 = 1e15;

/// Full eigendecomposition of a small real matrix.
///
/// `values[i]`/`vectors[i]` are in reduction order with complex conjugate
/// pairs adjacent (positive imaginary part first); `order` ranks them by
/// descending magnitude. Vectors have unit 2-norm.
#[derive(Debug, Clone)]
pub struct EigenPairSet<R: Real> {
    pub values: Vec<Complex<R>>,
    pub vectors: Vec<Vec<Complex<R>>>,
    pub order: Vec<usize>,
}

impl<R: Real> EigenPairSet<R> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvalue by magnitude rank (0 = dominant).
    pub fn value(&self, rank: usize) -> Complex<R> {
        self.values[self.order[rank]]
    }

    /// Eigenvector by magnitude rank.
    pub fn vector(&self, rank: usize) -> &[Complex<R>] {
        &self.vectors[self.order[rank]]
    }
}

/// The dominant part of an [`EigenPairSet`], with real reporting values.
#[derive(Debug, Clone)]
pub struct DominantEigen<R: Real> {
    /// `lambda_1..lambda_m`: real eigenvalues as themselves, complex ones
    /// as their magnitudes (see `is_complex`).
    pub values: Vec<R>,
    pub is_complex: Vec<bool>,
    /// Unit eigenvector of `lambda_1`, sign fixed so its
    /// largest-magnitude component is positive.
    pub vector: Vec<R>,
}

/// All eigenpairs of a small square real matrix.
///
/// Upper-Hessenberg input passes through the reduction unchanged; general
/// square matrices are reduced first. Fails with the partially deflated
/// spectrum if the QR iteration exceeds its sweep cap.
pub fn hessenberg_eigen<R: Real>(h: &DenseMatrix<R>) -> Result<EigenPairSet<R>> {
    let n = h.dim();
    assert!(n >= 1, "empty eigenproblem");
    let mut hd = vec![R::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            hd[i * n + j] = h.get(i, j);
        }
    }
    let mut vd = vec![R::zero(); n * n];
    orthes(n, &mut hd, &mut vd);
    let (d, e) = hqr2(n, &mut hd, &mut vd)?;
    Ok(assemble_pairs(n, &d, &e, &vd))
}

/// Eigenpairs of `K a = lambda M a` for symmetric positive definite `M`,
/// together with the 2-norm condition estimate of `M`.
///
/// The solve goes through the Cholesky factor of `M`; a condition
/// estimate beyond [`SINGULAR_COND_LIMIT`] or a Cholesky breakdown
/// reports the Gram matrix as numerically singular.
pub fn generalized_eigen<R: Real>(
    k: &DenseMatrix<R>,
    m: &DenseMatrix<R>,
) -> Result<(EigenPairSet<R>, R)> {
    let dim = k.dim();
    assert_eq!(dim, m.dim(), "K and M must have matching dimensions");
    let cond = spectral_condition(m)?;
    let cond_f = cond.to_f64().unwrap_or(f64::INFINITY);
    if cond_f.is_nan() || cond_f >= SINGULAR_COND_LIMIT {
        return Err(Error::IllConditionedGram { cond: cond_f });
    }
    let l = m
        .cholesky()
        .map_err(|_| Error::IllConditionedGram { cond: cond_f })?;

    let sym_tol = R::epsilon().sqrt() * (R::one() + k.frobenius_norm());
    let pairs = if k.is_symmetric(sym_tol) {
        // B = L^-1 K L^-T is a similarity image of M^-1 K
        let mut b = DenseMatrix::zeros(dim);
        for j in 0..dim {
            let col: Vec<R> = (0..dim).map(|i| k.get(i, j)).collect();
            let y = l.solve_lower(&col);
            for i in 0..dim {
                b.set(i, j, y[i]);
            }
        }
        let bt = b.transpose();
        let mut sym = DenseMatrix::zeros(dim);
        for j in 0..dim {
            let col: Vec<R> = (0..dim).map(|i| bt.get(i, j)).collect();
            let y = l.solve_lower(&col);
            for i in 0..dim {
                sym.set(j, i, y[i]);
            }
        }
        let mut pairs = hessenberg_eigen(&sym)?;
        // map reduced vectors back: a = L^-T w, then renormalize
        for vec in pairs.vectors.iter_mut() {
            let re: Vec<R> = vec.iter().map(|z| z.re).collect();
            let im: Vec<R> = vec.iter().map(|z| z.im).collect();
            let are = l.solve_lower_transpose(&re);
            let aim = l.solve_lower_transpose(&im);
            let mut nrm = R::zero();
            for i in 0..dim {
                nrm = nrm + are[i] * are[i] + aim[i] * aim[i];
            }
            let nrm = nrm.sqrt();
            for i in 0..dim {
                vec[i] = Complex::new(are[i] / nrm, aim[i] / nrm);
            }
        }
        pairs
    } else {
        // explicit M^-1 K via Cholesky solves, column by column
        let mut c = DenseMatrix::zeros(dim);
        for j in 0..dim {
            let col: Vec<R> = (0..dim).map(|i| k.get(i, j)).collect();
            let x = l.solve_lower_transpose(&l.solve_lower(&col));
            for i in 0..dim {
                c.set(i, j, x[i]);
            }
        }
        hessenberg_eigen(&c)?
    };
    Ok((pairs, cond))
}

/// 2-norm condition estimate of a symmetric matrix from its spectrum;
/// infinity when the smallest magnitude underflows to zero.
pub(crate) fn spectral_condition<R: Real>(m: &DenseMatrix<R>) -> Result<R> {
    let pairs = hessenberg_eigen(m)?;
    let mut max = R::zero();
    let mut min = R::infinity();
    for v in &pairs.values {
        let mag = v.norm();
        max = max.max(mag);
        min = min.min(mag);
    }
    if min <= R::zero() {
        return Ok(R::infinity());
    }
    Ok(max / min)
}

/// Pull out `lambda_1..lambda_m` and the dominant eigenvector.
///
/// Errors when the magnitude-dominant eigenvalue is a complex conjugate
/// pair; subdominant complex pairs are reported by magnitude with their
/// `is_complex` flag set.
pub fn select_dominant<R: Real>(pairs: &EigenPairSet<R>, m: usize) -> Result<DominantEigen<R>> {
    if m < 1 || m > pairs.len() {
        return Err(Error::InvalidConfig(format!(
            "requested {m} eigenvalues from a set of {}",
            pairs.len()
        )));
    }
    let dominant = pairs.value(0);
    if dominant.im != R::zero() {
        return Err(Error::ComplexDominantRitz {
            re: dominant.re.to_f64().unwrap_or(f64::NAN),
            im: dominant.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut values = Vec::with_capacity(m);
    let mut is_complex = Vec::with_capacity(m);
    values.push(dominant.re);
    is_complex.push(false);
    for rank in 1..m {
        let v = pairs.value(rank);
        if v.im == R::zero() {
            values.push(v.re);
            is_complex.push(false);
        } else {
            values.push(v.norm());
            is_complex.push(true);
        }
    }

    let raw = pairs.vector(0);
    let mut vector: Vec<R> = raw.iter().map(|z| z.re).collect();
    let mut arg = 0;
    for (i, v) in vector.iter().enumerate() {
        if v.abs() > vector[arg].abs() {
            arg = i;
        }
    }
    if vector[arg] < R::zero() {
        for v in vector.iter_mut() {
            *v = -*v;
        }
    }
    let nrm = vector
        .iter()
        .fold(R::zero(), |acc, &v| acc + v * v)
        .sqrt();
    for v in vector.iter_mut() {
        *v = *v / nrm;
    }
    Ok(DominantEigen {
        values,
        is_complex,
        vector,
    })
}

fn assemble_pairs<R: Real>(n: usize, d: &[R], e: &[R], vd: &[R]) -> EigenPairSet<R> {
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if e[i] == R::zero() {
            values.push(Complex::new(d[i], R::zero()));
            let col: Vec<R> = (0..n).map(|r| vd[r * n + i]).collect();
            let nrm = col.iter().fold(R::zero(), |a, &v| a + v * v).sqrt();
            vectors.push(
                col.iter()
                    .map(|&v| Complex::new(v / nrm, R::zero()))
                    .collect(),
            );
            i += 1;
        } else {
            // conjugate pair: columns i (real part) and i+1 (imaginary part)
            let re: Vec<R> = (0..n).map(|r| vd[r * n + i]).collect();
            let im: Vec<R> = (0..n).map(|r| vd[r * n + i + 1]).collect();
            let mut nrm = R::zero();
            for r in 0..n {
                nrm = nrm + re[r] * re[r] + im[r] * im[r];
            }
            let nrm = nrm.sqrt();
            values.push(Complex::new(d[i], e[i]));
            vectors.push(
                (0..n)
                    .map(|r| Complex::new(re[r] / nrm, im[r] / nrm))
                    .collect(),
            );
            values.push(Complex::new(d[i + 1], e[i + 1]));
            vectors.push(
                (0..n)
                    .map(|r| Complex::new(re[r] / nrm, -im[r] / nrm))
                    .collect(),
            );
            i += 2;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| compare_rank(values[a], values[b]));
    EigenPairSet {
        values,
        vectors,
        order,
    }
}

/// Descending magnitude; ties prefer real values, then larger real part,
/// then larger imaginary part (keeps conjugate pairs adjacent with the
/// positive-imaginary member first).
fn compare_rank<R: Real>(a: Complex<R>, b: Complex<R>) -> Ordering {
    match b.norm().partial_cmp(&a.norm()) {
        Some(Ordering::Equal) | None => {}
        Some(o) => return o,
    }
    let (ra, rb) = (a.im == R::zero(), b.im == R::zero());
    match (ra, rb) {
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    match b.re.partial_cmp(&a.re) {
        Some(Ordering::Equal) | None => {}
        Some(o) => return o,
    }
    b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal)
}

/// Householder reduction to upper Hessenberg form, accumulating the
/// orthogonal transformation into `vd` (orthes/ortran).
fn orthes<R: Real>(n: usize, hd: &mut [R], vd: &mut [R]) {
    let low = 0usize;
    let high = n - 1;
    let mut ort = vec![R::zero(); n];

    for m in (low + 1)..high {
        let mut scale = R::zero();
        for i in m..=high {
            scale = scale + hd[i * n + (m - 1)].abs();
        }
        if scale != R::zero() {
            let mut h = R::zero();
            for i in (m..=high).rev() {
                ort[i] = hd[i * n + (m - 1)] / scale;
                h = h + ort[i] * ort[i];
            }
            let mut g = h.sqrt();
            if ort[m] > R::zero() {
                g = -g;
            }
            h = h - ort[m] * g;
            ort[m] = ort[m] - g;

            for j in m..n {
                let mut f = R::zero();
                for i in (m..=high).rev() {
                    f = f + ort[i] * hd[i * n + j];
                }
                f = f / h;
                for i in m..=high {
                    hd[i * n + j] = hd[i * n + j] - f * ort[i];
                }
            }
            for i in 0..=high {
                let mut f = R::zero();
                for j in (m..=high).rev() {
                    f = f + ort[j] * hd[i * n + j];
                }
                f = f / h;
                for j in m..=high {
                    hd[i * n + j] = hd[i * n + j] - f * ort[j];
                }
            }
            ort[m] = scale * ort[m];
            hd[m * n + (m - 1)] = scale * g;
        }
    }

    for i in 0..n {
        for j in 0..n {
            vd[i * n + j] = if i == j { R::one() } else { R::zero() };
        }
    }
    for m in ((low + 1)..high).rev() {
        if hd[m * n + (m - 1)] != R::zero() {
            for i in (m + 1)..=high {
                ort[i] = hd[i * n + (m - 1)];
            }
            for j in m..=high {
                let mut g = R::zero();
                for i in m..=high {
                    g = g + ort[i] * vd[i * n + j];
                }
                // double division avoids possible underflow
                g = (g / ort[m]) / hd[m * n + (m - 1)];
                for i in m..=high {
                    vd[i * n + j] = vd[i * n + j] + g * ort[i];
                }
            }
        }
    }
}

fn cdiv<R: Real>(xr: R, xi: R, yr: R, yi: R) -> (R, R) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

/// Shifted QR iteration on an upper Hessenberg matrix, reducing it to
/// real Schur form while accumulating transformations, then
/// back-substituting for eigenvectors (hqr2).
///
/// Returns the eigenvalues as (real, imaginary) arrays; the eigenvectors
/// of the original (pre-reduction) matrix end up in the columns of `vd`,
/// complex pairs packed as adjacent (real, imaginary) columns.
fn hqr2<R: Real>(size: usize, hd: &mut [R], vd: &mut [R]) -> Result<(Vec<R>, Vec<R>)> {
    let nn = size as isize;
    let mut d = vec![R::zero(); size];
    let mut e = vec![R::zero(); size];

    let mut n = nn - 1;
    let low: isize = 0;
    let high = nn - 1;
    let eps = R::epsilon();
    let mut exshift = R::zero();
    let mut p = R::zero();
    let mut q = R::zero();
    let mut r = R::zero();
    let mut s = R::zero();
    let mut z = R::zero();
    let mut t;
    let mut w;
    let mut x;
    let mut y;

    let ix = |i: isize, j: isize| (i * nn + j) as usize;

    let mut norm = R::zero();
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm = norm + hd[ix(i, j)].abs();
        }
    }

    let sweep_cap = MAX_SWEEPS_PER_DIM * size;
    let mut total_sweeps = 0usize;
    let mut iter = 0;
    while n >= low {
        // look for a single small sub-diagonal element
        let mut l = n;
        while l > low {
            s = hd[ix(l - 1, l - 1)].abs() + hd[ix(l, l)].abs();
            if s == R::zero() {
                s = norm;
            }
            if hd[ix(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // one root found
            hd[ix(n, n)] = hd[ix(n, n)] + exshift;
            d[n as usize] = hd[ix(n, n)];
            e[n as usize] = R::zero();
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // two roots found
            w = hd[ix(n, n - 1)] * hd[ix(n - 1, n)];
            p = (hd[ix(n - 1, n - 1)] - hd[ix(n, n)]) / R::of(2.0);
            q = p * p + w;
            z = q.abs().sqrt();
            hd[ix(n, n)] = hd[ix(n, n)] + exshift;
            hd[ix(n - 1, n - 1)] = hd[ix(n - 1, n - 1)] + exshift;
            x = hd[ix(n, n)];

            if q >= R::zero() {
                // real pair
                z = if p >= R::zero() { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != R::zero() {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = R::zero();
                e[n as usize] = R::zero();
                x = hd[ix(n, n - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p = p / r;
                q = q / r;

                for j in (n - 1)..nn {
                    z = hd[ix(n - 1, j)];
                    hd[ix(n - 1, j)] = q * z + p * hd[ix(n, j)];
                    hd[ix(n, j)] = q * hd[ix(n, j)] - p * z;
                }
                for i in 0..=n {
                    z = hd[ix(i, n - 1)];
                    hd[ix(i, n - 1)] = q * z + p * hd[ix(i, n)];
                    hd[ix(i, n)] = q * hd[ix(i, n)] - p * z;
                }
                for i in low..=high {
                    z = vd[ix(i, n - 1)];
                    vd[ix(i, n - 1)] = q * z + p * vd[ix(i, n)];
                    vd[ix(i, n)] = q * vd[ix(i, n)] - p * z;
                }
            } else {
                // complex pair
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // no convergence yet: form shift
            x = hd[ix(n, n)];
            y = R::zero();
            w = R::zero();
            if l < n {
                y = hd[ix(n - 1, n - 1)];
                w = hd[ix(n, n - 1)] * hd[ix(n - 1, n)];
            }

            // Wilkinson's original ad hoc shift
            if iter == 10 {
                exshift = exshift + x;
                for i in low..=n {
                    hd[ix(i, i)] = hd[ix(i, i)] - x;
                }
                s = hd[ix(n, n - 1)].abs() + hd[ix(n - 1, n - 2)].abs();
                y = R::of(0.75) * s;
                x = y;
                w = R::of(-0.4375) * s * s;
            }

            // MATLAB's new ad hoc shift
            if iter == 30 {
                s = (y - x) / R::of(2.0);
                s = s * s + w;
                if s > R::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / R::of(2.0) + s);
                    for i in low..=n {
                        hd[ix(i, i)] = hd[ix(i, i)] - s;
                    }
                    exshift = exshift + s;
                    x = R::of(0.964);
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            total_sweeps += 1;
            if total_sweeps > sweep_cap {
                let deflated = (nn - 1 - n) as usize;
                let partial = ((n + 1)..nn)
                    .map(|i| {
                        (
                            d[i as usize].to_f64().unwrap_or(f64::NAN),
                            e[i as usize].to_f64().unwrap_or(f64::NAN),
                        )
                    })
                    .collect();
                return Err(Error::QrNoConvergence {
                    sweeps: total_sweeps,
                    deflated,
                    size,
                    partial,
                });
            }

            // look for two consecutive small sub-diagonal elements
            let mut m = n - 2;
            while m >= l {
                z = hd[ix(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / hd[ix(m + 1, m)] + hd[ix(m, m + 1)];
                q = hd[ix(m + 1, m + 1)] - z - r - s;
                r = hd[ix(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p = p / s;
                q = q / s;
                r = r / s;
                if m == l {
                    break;
                }
                if hd[ix(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (hd[ix(m - 1, m - 1)].abs()
                                + z.abs()
                                + hd[ix(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                hd[ix(i, i - 2)] = R::zero();
                if i > m + 2 {
                    hd[ix(i, i - 3)] = R::zero();
                }
            }

            // double QR step on rows l..n, columns m..n
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = hd[ix(k, k - 1)];
                    q = hd[ix(k + 1, k - 1)];
                    r = if notlast {
                        hd[ix(k + 2, k - 1)]
                    } else {
                        R::zero()
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x == R::zero() {
                        continue;
                    }
                    p = p / x;
                    q = q / x;
                    r = r / x;
                }

                s = (p * p + q * q + r * r).sqrt();
                if p < R::zero() {
                    s = -s;
                }
                if s != R::zero() {
                    if k != m {
                        hd[ix(k, k - 1)] = -s * x;
                    } else if l != m {
                        hd[ix(k, k - 1)] = -hd[ix(k, k - 1)];
                    }
                    p = p + s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q = q / p;
                    r = r / p;

                    for j in k..nn {
                        p = hd[ix(k, j)] + q * hd[ix(k + 1, j)];
                        if notlast {
                            p = p + r * hd[ix(k + 2, j)];
                            hd[ix(k + 2, j)] = hd[ix(k + 2, j)] - p * z;
                        }
                        hd[ix(k, j)] = hd[ix(k, j)] - p * x;
                        hd[ix(k + 1, j)] = hd[ix(k + 1, j)] - p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * hd[ix(i, k)] + y * hd[ix(i, k + 1)];
                        if notlast {
                            p = p + z * hd[ix(i, k + 2)];
                            hd[ix(i, k + 2)] = hd[ix(i, k + 2)] - p * r;
                        }
                        hd[ix(i, k)] = hd[ix(i, k)] - p;
                        hd[ix(i, k + 1)] = hd[ix(i, k + 1)] - p * q;
                    }
                    for i in low..=high {
                        p = x * vd[ix(i, k)] + y * vd[ix(i, k + 1)];
                        if notlast {
                            p = p + z * vd[ix(i, k + 2)];
                            vd[ix(i, k + 2)] = vd[ix(i, k + 2)] - p * r;
                        }
                        vd[ix(i, k)] = vd[ix(i, k)] - p;
                        vd[ix(i, k + 1)] = vd[ix(i, k + 1)] - p * q;
                    }
                }
            }
        }
    }

    // back-substitution from the quasi-triangular form
    if norm == R::zero() {
        return Ok((d, e));
    }

    for n in (0..nn).rev() {
        p = d[n as usize];
        q = e[n as usize];

        if q == R::zero() {
            // real vector
            let mut l = n;
            hd[ix(n, n)] = R::one();
            for i in (0..n).rev() {
                w = hd[ix(i, i)] - p;
                r = R::zero();
                for j in l..=n {
                    r = r + hd[ix(i, j)] * hd[ix(j, n)];
                }
                if e[i as usize] < R::zero() {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i as usize] == R::zero() {
                        if w != R::zero() {
                            hd[ix(i, n)] = -r / w;
                        } else {
                            hd[ix(i, n)] = -r / (eps * norm);
                        }
                    } else {
                        // solve the real 2x2 block
                        x = hd[ix(i, i + 1)];
                        y = hd[ix(i + 1, i)];
                        q = (d[i as usize] - p) * (d[i as usize] - p)
                            + e[i as usize] * e[i as usize];
                        t = (x * s - z * r) / q;
                        hd[ix(i, n)] = t;
                        if x.abs() > z.abs() {
                            hd[ix(i + 1, n)] = (-r - w * t) / x;
                        } else {
                            hd[ix(i + 1, n)] = (-s - y * t) / z;
                        }
                    }

                    // overflow control
                    t = hd[ix(i, n)].abs();
                    if (eps * t) * t > R::one() {
                        for j in i..=n {
                            hd[ix(j, n)] = hd[ix(j, n)] / t;
                        }
                    }
                }
            }
        } else if q < R::zero() {
            // complex vector, stored in columns n-1 (real) and n (imaginary)
            let mut l = n - 1;

            if hd[ix(n, n - 1)].abs() > hd[ix(n - 1, n)].abs() {
                hd[ix(n - 1, n - 1)] = q / hd[ix(n, n - 1)];
                hd[ix(n - 1, n)] = -(hd[ix(n, n)] - p) / hd[ix(n, n - 1)];
            } else {
                let (cr, ci) = cdiv(
                    R::zero(),
                    -hd[ix(n - 1, n)],
                    hd[ix(n - 1, n - 1)] - p,
                    q,
                );
                hd[ix(n - 1, n - 1)] = cr;
                hd[ix(n - 1, n)] = ci;
            }
            hd[ix(n, n - 1)] = R::zero();
            hd[ix(n, n)] = R::one();
            for i in (0..(n - 1)).rev() {
                let mut ra = R::zero();
                let mut sa = R::zero();
                for j in l..=n {
                    ra = ra + hd[ix(i, j)] * hd[ix(j, n - 1)];
                    sa = sa + hd[ix(i, j)] * hd[ix(j, n)];
                }
                w = hd[ix(i, i)] - p;

                if e[i as usize] < R::zero() {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i as usize] == R::zero() {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        hd[ix(i, n - 1)] = cr;
                        hd[ix(i, n)] = ci;
                    } else {
                        // solve the complex 2x2 block
                        x = hd[ix(i, i + 1)];
                        y = hd[ix(i + 1, i)];
                        let mut vr = (d[i as usize] - p) * (d[i as usize] - p)
                            + e[i as usize] * e[i as usize]
                            - q * q;
                        let vi = (d[i as usize] - p) * R::of(2.0) * q;
                        if vr == R::zero() && vi == R::zero() {
                            vr = eps
                                * norm
                                * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(
                            x * r - z * ra + q * sa,
                            x * s - z * sa - q * ra,
                            vr,
                            vi,
                        );
                        hd[ix(i, n - 1)] = cr;
                        hd[ix(i, n)] = ci;
                        if x.abs() > z.abs() + q.abs() {
                            hd[ix(i + 1, n - 1)] =
                                (-ra - w * hd[ix(i, n - 1)] + q * hd[ix(i, n)]) / x;
                            hd[ix(i + 1, n)] =
                                (-sa - w * hd[ix(i, n)] - q * hd[ix(i, n - 1)]) / x;
                        } else {
                            let (cr, ci) = cdiv(
                                -r - y * hd[ix(i, n - 1)],
                                -s - y * hd[ix(i, n)],
                                z,
                                q,
                            );
                            hd[ix(i + 1, n - 1)] = cr;
                            hd[ix(i + 1, n)] = ci;
                        }
                    }

                    // overflow control
                    t = hd[ix(i, n - 1)].abs().max(hd[ix(i, n)].abs());
                    if (eps * t) * t > R::one() {
                        for j in i..=n {
                            hd[ix(j, n - 1)] = hd[ix(j, n - 1)] / t;
                            hd[ix(j, n)] = hd[ix(j, n)] / t;
                        }
                    }
                }
            }
        }
    }

    // back transformation to eigenvectors of the original matrix
    for j in (low..nn).rev() {
        for i in low..=high {
            z = R::zero();
            for k in low..=j.min(high) {
                z = z + vd[ix(i, k)] * hd[ix(k, j)];
            }
            vd[ix(i, j)] = z;
        }
    }

    Ok((d, e))
}
