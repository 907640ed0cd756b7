//! Dominant eigenpair solvers built on restarted k-step Krylov
//! projections, with depth-1 eigenvector extrapolation between restarts.
//!
//! The core pieces:
//!
//! - [`sparse`]: CSR matrices, the counted matrix-vector product, and the
//!   synthetic diagonal test operators.
//! - [`market`]: Matrix Market (coordinate) ingestion.
//! - [`krylov`]: the naive, orthogonalized, and Arnoldi k-step subspace
//!   constructions and Ritz-pair extraction.
//! - [`eig`]: the dense Hessenberg-QR eigensolver behind the reduced
//!   problems.
//! - [`solver`]: the extrapolated restarted iteration, plus the power,
//!   2-step Rayleigh-maximization, and block baselines.
//! - [`diagnostics`]: residuals, Rayleigh quotients, mode-ratio analysis
//!   of the extrapolation, conditioning probes, and the cost model.
//!
//! Everything is generic over the scalar type through [`Real`]
//! (`f32`/`f64`); the `*F64` aliases below cover the common case.

pub mod dense;
pub mod diagnostics;
pub mod eig;
pub mod error;
pub mod krylov;
pub mod market;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod vecops;

pub use error::{Error, MarketError, Result};
pub use scalar::Real;

pub type SparseMatrixF64 = sparse::SparseMatrix<f64>;
pub type DenseMatrixF64 = dense::DenseMatrix<f64>;
pub type ArnoldiFactorizationF64 = krylov::ArnoldiFactorization<f64>;
pub type KrylovProjectionF64 = krylov::KrylovProjection<f64>;
pub type EigenPairSetF64 = eig::EigenPairSet<f64>;
pub type GammaStrategyF64 = solver::GammaStrategy<f64>;
pub type SolveConfigF64 = solver::SolveConfig<f64>;
pub type SolveReportF64 = solver::SolveReport<f64>;
