//! Dense vector arithmetic shared by the Krylov and solver layers.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn dot<R: Real>(x: &[R], y: &[R]) -> R {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .fold(R::zero(), |acc, (&a, &b)| acc + a * b)
}

pub fn norm2<R: Real>(x: &[R]) -> R {
    dot(x, x).sqrt()
}

/// `x / ||x||`; errors on the zero vector.
pub fn normalize<R: Real>(x: &[R]) -> Result<Vec<R>> {
    let n = norm2(x);
    if n <= R::zero() || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(x.iter().map(|&v| v / n).collect())
}

/// `alpha * x + beta * y`, elementwise.
pub fn lin_comb<R: Real>(alpha: R, x: &[R], beta: R, y: &[R]) -> Vec<R> {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(&a, &b)| alpha * a + beta * b)
        .collect()
}

/// `y -= coeff * x`, in place.
pub fn axpy_neg<R: Real>(y: &mut [R], coeff: R, x: &[R]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi - coeff * xi;
    }
}

pub fn scale_in_place<R: Real>(x: &mut [R], s: R) {
    for v in x.iter_mut() {
        *v = *v * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_three_four_five() {
        let v = normalize(&[3.0, 4.0]).unwrap();
        assert_eq!(v, vec![0.6, 0.8]);
    }

    #[test]
    fn normalize_unit_vector_fixed_point() {
        let e1 = [1.0, 0.0, 0.0];
        assert_eq!(normalize(&e1).unwrap(), e1.to_vec());
    }

    #[test]
    fn normalize_uniform_hundred() {
        let v = normalize(&vec![1.0f64; 100]).unwrap();
        for &x in &v {
            assert!((x - 0.1).abs() < 1e-15);
        }
        assert!((norm2(&v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_zero_vector_errors() {
        assert_eq!(normalize(&[0.0, 0.0]).unwrap_err(), Error::ZeroVector);
    }
}
