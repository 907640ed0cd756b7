//! Outer iterations: the extrapolated restarted k-step method with its
//! family of extrapolation-parameter rules, the power-iteration baseline,
//! the Rayleigh-maximizing 2-step (LOBPCG form), and the block k-step
//! variant.

use crate::eig;
use crate::error::{Error, Result};
use crate::krylov::{
    arnoldi_factorization_with, assemble_kstep_output, mgs_deflating, mgs_orthonormalize,
    mgs_with_coefficients, mgs_with_coefficients_reorth,
};
use crate::scalar::Real;
use crate::sparse::{MatvecCounter, SparseMatrix};
use crate::vecops;

/// Rule for the extrapolation parameter `gamma_j`.
///
/// Dynamic rules are built from the magnitude ratio of the two leading
/// Ritz values; every evaluated value is clamped to `[-1, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaStrategy<R> {
    /// No extrapolation (`gamma = 0`): plain restarted Arnoldi.
    None,
    /// Fixed `gamma = c`, `c` in `[-1, 0]`.
    Constant(R),
    /// `-(|lambda2 / lambda1| / 2)^2`.
    HalfSquaredRatio,
    /// `-|lambda2 / lambda1|`.
    Ratio,
    /// `-|lambda2 / lambda1|^j` at outer iteration `j`.
    RatioPowerJ,
}

impl<R: Real> GammaStrategy<R> {
    pub fn is_dynamic(&self) -> bool {
        matches!(
            self,
            GammaStrategy::HalfSquaredRatio | GammaStrategy::Ratio | GammaStrategy::RatioPowerJ
        )
    }
}

/// Evaluate the extrapolation parameter for outer iteration `j >= 1`,
/// clamped to `[-1, 0]`.
pub fn gamma_value<R: Real>(
    strategy: GammaStrategy<R>,
    lambda1: R,
    lambda2: R,
    j: usize,
) -> Result<R> {
    let g = match strategy {
        GammaStrategy::None => R::zero(),
        GammaStrategy::Constant(c) => c,
        dynamic => {
            if lambda1 == R::zero() {
                return Err(Error::ZeroLambda1);
            }
            let ratio = (lambda2 / lambda1).abs();
            match dynamic {
                GammaStrategy::HalfSquaredRatio => {
                    -(ratio * ratio) / R::of(4.0)
                }
                GammaStrategy::Ratio => -ratio,
                GammaStrategy::RatioPowerJ => -ratio.powi(j as i32),
                _ => unreachable!(),
            }
        }
    };
    let clamped = g.max(-R::one()).min(R::zero());
    // normalize -0.0 so traces and comparisons are unambiguous
    Ok(if clamped == R::zero() { R::zero() } else { clamped })
}

/// Configuration for the k-step solvers.
#[derive(Debug, Clone)]
pub struct SolveConfig<R: Real> {
    /// Subspace dimension per restart (`>= 2`; `>= 4` is sensible when a
    /// dynamic strategy needs a meaningful second Ritz value).
    pub k: usize,
    /// Number of leading Ritz values to report (2 unless stated).
    pub m: usize,
    /// Residual threshold for `||A y - lambda1 y||`.
    pub tol: R,
    pub max_outer: usize,
    pub strategy: GammaStrategy<R>,
    /// Starting vector; all-ones when absent.
    pub start: Option<Vec<R>>,
    /// Spend one extra product per outer iteration on a freshly computed
    /// residual instead of the cached-product one.
    pub explicit_residual: bool,
    /// Second orthogonalization pass inside Arnoldi (diagnostic).
    pub reorthogonalize: bool,
}

impl<R: Real> SolveConfig<R> {
    pub fn new(k: usize, strategy: GammaStrategy<R>) -> Self {
        SolveConfig {
            k,
            m: 2,
            tol: R::of(1e-7),
            max_outer: 1000,
            strategy,
            start: None,
            explicit_residual: false,
            reorthogonalize: false,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "subspace size k = {} must be at least 2",
                self.k
            )));
        }
        if n < self.k {
            return Err(Error::InvalidConfig(format!(
                "matrix dimension {n} smaller than subspace size {}",
                self.k
            )));
        }
        if self.m < 1 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= R::zero() {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if let GammaStrategy::Constant(c) = self.strategy {
            if c < -R::one() || c > R::zero() {
                return Err(Error::InvalidConfig(format!(
                    "constant gamma {c} outside [-1, 0]"
                )));
            }
        }
        if let Some(y0) = &self.start {
            if y0.len() != n {
                return Err(Error::DimensionMismatch { n, len: y0.len() });
            }
        }
        Ok(())
    }

    fn start_vector(&self, n: usize) -> Vec<R> {
        self.start
            .clone()
            .unwrap_or_else(|| vec![R::one(); n])
    }
}

/// One row of a solve trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow<R> {
    /// Outer iteration; 0 is the initializing factorization.
    pub iteration: usize,
    /// Cumulative matrix-vector products after this iteration.
    pub matvecs: u64,
    pub lambda1: R,
    /// NaN when the achieved subspace had a single Ritz value.
    pub lambda2: R,
    pub gamma: R,
    pub residual: R,
}

/// Full record of a solve: final state plus the per-iteration trace.
#[derive(Debug, Clone)]
pub struct SolveReport<R: Real> {
    pub converged: bool,
    pub outer_iterations: usize,
    pub matvecs: u64,
    pub lambda1: R,
    pub lambda2: R,
    pub eigenvector: Vec<R>,
    pub trace: Vec<TraceRow<R>>,
    /// How residuals were charged against the multiply counter.
    pub accounting_note: String,
}

/// Extrapolated restarted k-step Arnoldi.
///
/// Runs an initializing factorization from the start vector, then per
/// outer iteration: factorize from the current iterate, extract the
/// dominant Ritz pair, evaluate `gamma_j` from the iteration's own Ritz
/// values, test `||A y - lambda1 y|| < tol`, and restart from the
/// normalized combination `(1 - gamma) y_next + gamma y_prev` with
/// `y_prev` sign-aligned to `y_next`.
pub fn extrapolated_kstep<R: Real>(
    a: &SparseMatrix<R>,
    cfg: &SolveConfig<R>,
) -> Result<SolveReport<R>> {
    solve_kstep(a, cfg, true)
}

/// Plain restarted Arnoldi: the identical loop with the extrapolation
/// step disabled (each restart uses the dominant Ritz vector as is).
pub fn restarted_arnoldi<R: Real>(
    a: &SparseMatrix<R>,
    cfg: &SolveConfig<R>,
) -> Result<SolveReport<R>> {
    solve_kstep(a, cfg, false)
}

fn solve_kstep<R: Real>(
    a: &SparseMatrix<R>,
    cfg: &SolveConfig<R>,
    extrapolate: bool,
) -> Result<SolveReport<R>> {
    cfg.validate(a.n())?;
    let mut counter = MatvecCounter::new();
    let mut trace = Vec::new();

    let y0 = cfg.start_vector(a.n());
    let fact = arnoldi_factorization_with(a, &y0, cfg.k, &mut counter, cfg.reorthogonalize)?;
    let mut out = assemble_kstep_output(&fact, cfg.m)?;
    trace.push(TraceRow {
        iteration: 0,
        matvecs: counter.count(),
        lambda1: out.values[0],
        lambda2: reported_lambda2(&out.values),
        gamma: R::zero(),
        residual: out.residual,
    });

    let mut u = out.iterate.clone();
    let mut y_prev = out.iterate.clone();

    for j in 1..=cfg.max_outer {
        debug_assert!((vecops::norm2(&u) - R::one()).abs() < R::epsilon() * R::of(100.0));
        let fact =
            arnoldi_factorization_with(a, &u, cfg.k, &mut counter, cfg.reorthogonalize)?;
        out = assemble_kstep_output(&fact, cfg.m)?;
        let lambda1 = out.values[0];
        let lambda2_mag = out
            .values
            .get(1)
            .map(|&v| v.abs())
            .unwrap_or_else(R::zero);
        let gamma = if extrapolate {
            gamma_value(cfg.strategy, lambda1, lambda2_mag, j)?
        } else {
            R::zero()
        };
        let residual = if cfg.explicit_residual {
            crate::diagnostics::residual_norm(a, lambda1, &out.iterate, &mut counter)?
        } else {
            out.residual
        };
        trace.push(TraceRow {
            iteration: j,
            matvecs: counter.count(),
            lambda1,
            lambda2: reported_lambda2(&out.values),
            gamma,
            residual,
        });
        if residual < cfg.tol {
            return Ok(finish(cfg, true, j, counter, &out, trace));
        }

        if extrapolate {
            let mut prev = std::mem::take(&mut y_prev);
            if vecops::dot(&prev, &out.iterate) < R::zero() {
                vecops::scale_in_place(&mut prev, -R::one());
            }
            debug_assert!(vecops::dot(&prev, &out.iterate) >= R::zero());
            u = vecops::lin_comb(R::one() - gamma, &out.iterate, gamma, &prev);
        } else {
            u = out.iterate.clone();
        }
        u = vecops::normalize(&u)?;
        y_prev = out.iterate.clone();
    }

    Ok(finish(cfg, false, cfg.max_outer, counter, &out, trace))
}

fn reported_lambda2<R: Real>(values: &[R]) -> R {
    values.get(1).copied().unwrap_or_else(R::nan)
}

fn finish<R: Real>(
    cfg: &SolveConfig<R>,
    converged: bool,
    outer_iterations: usize,
    counter: MatvecCounter,
    out: &crate::krylov::KstepOutput<R>,
    trace: Vec<TraceRow<R>>,
) -> SolveReport<R> {
    let note = if cfg.explicit_residual {
        "residuals recomputed with one fresh product per outer iteration (k+1 products each)"
    } else {
        "residuals from cached W = AV (k products per outer iteration)"
    };
    SolveReport {
        converged,
        outer_iterations,
        matvecs: counter.count(),
        lambda1: out.values[0],
        lambda2: reported_lambda2(&out.values),
        eigenvector: out.iterate.clone(),
        trace,
        accounting_note: note.to_string(),
    }
}

/// Power iteration baseline: one product per iteration, Rayleigh quotient
/// and residual reusing the cached product.
pub fn power_iteration<R: Real>(
    a: &SparseMatrix<R>,
    y0: &[R],
    tol: R,
    max_iters: usize,
    counter: &mut MatvecCounter,
) -> Result<SolveReport<R>> {
    let mut y = vecops::normalize(y0)?;
    let mut trace = Vec::new();
    let mut rho = R::zero();
    let mut converged = false;
    let mut iters = 0;
    for j in 1..=max_iters {
        let w = a.matvec(&y, counter)?;
        rho = vecops::dot(&y, &w);
        let mut rsq = R::zero();
        for i in 0..y.len() {
            let d = w[i] - rho * y[i];
            rsq = rsq + d * d;
        }
        let residual = rsq.sqrt();
        trace.push(TraceRow {
            iteration: j,
            matvecs: counter.count(),
            lambda1: rho,
            lambda2: R::nan(),
            gamma: R::zero(),
            residual,
        });
        iters = j;
        if residual < tol {
            converged = true;
            break;
        }
        y = vecops::normalize(&w)?;
    }
    Ok(SolveReport {
        converged,
        outer_iterations: iters,
        matvecs: counter.count(),
        lambda1: rho,
        lambda2: R::nan(),
        eigenvector: y,
        trace,
        accounting_note:
            "one product per iteration; Rayleigh quotient and residual reuse it".to_string(),
    })
}

/// Result of one Rayleigh-maximizing step over `span{x, Ax}`.
#[derive(Debug, Clone)]
pub struct Lobpcg2Step<R: Real> {
    /// The maximizer, unit norm (equals the input when already converged).
    pub next: Vec<R>,
    /// Its Rayleigh quotient.
    pub rho: R,
    /// Set when `x` was already an eigenvector to working precision.
    pub converged: bool,
}

/// One step of the unpreconditioned LOBPCG form for symmetric `A`: the
/// Rayleigh-quotient maximizer over `span{x, A x}`, via the projected
/// 2x2 eigenproblem. Two products per step.
pub fn lobpcg2_step<R: Real>(
    a: &SparseMatrix<R>,
    x: &[R],
    counter: &mut MatvecCounter,
) -> Result<Lobpcg2Step<R>> {
    let xn = vecops::normalize(x)?;
    let ax = a.matvec(&xn, counter)?;
    let rho = vecops::dot(&xn, &ax);
    let mut rsq = R::zero();
    for i in 0..xn.len() {
        let d = ax[i] - rho * xn[i];
        rsq = rsq + d * d;
    }
    let rnorm = rsq.sqrt();
    if rnorm <= R::of(1e-13) * vecops::norm2(&ax).max(rho.abs()) {
        return Ok(Lobpcg2Step {
            next: xn,
            rho,
            converged: true,
        });
    }

    let (q, r) = mgs_with_coefficients(&[xn.clone(), ax.clone()])?;
    // A q0 is the cached ax rescaled by the leading coefficient; A q1
    // needs the second product
    let r00 = r.get(0, 0);
    let aq0: Vec<R> = ax.iter().map(|&v| v / r00).collect();
    let aq1 = a.matvec(&q[1], counter)?;
    let mut b = crate::dense::DenseMatrix::zeros(2);
    b.set(0, 0, vecops::dot(&q[0], &aq0));
    b.set(0, 1, vecops::dot(&q[0], &aq1));
    b.set(1, 0, vecops::dot(&q[1], &aq0));
    b.set(1, 1, vecops::dot(&q[1], &aq1));

    let pairs = eig::hessenberg_eigen(&b)?;
    // maximize the Rayleigh quotient: algebraically largest eigenvalue
    let mut best = 0usize;
    for i in 1..pairs.len() {
        if pairs.values[i].re > pairs.values[best].re {
            best = i;
        }
    }
    let coeff = &pairs.vectors[best];
    let c0 = coeff[0].re;
    let c1 = coeff[1].re;
    let next = vecops::normalize(&vecops::lin_comb(c0, &q[0], c1, &q[1]))?;
    Ok(Lobpcg2Step {
        next,
        rho: pairs.values[best].re,
        converged: false,
    })
}

/// Block k-step method with block size `b = k/2`.
///
/// Per outer iteration: apply `A` to the cached block images (b
/// products), orthonormalize `[W, AW]`, solve the projected `k x k`
/// eigenproblem, and retain the `k/2` largest-magnitude Ritz vectors
/// (complex pairs contribute their real and imaginary parts). The
/// dominant pair's residual comes from the cached products.
pub fn block_kstep<R: Real>(
    a: &SparseMatrix<R>,
    w0: &[Vec<R>],
    k: usize,
    tol: R,
    max_outer: usize,
    counter: &mut MatvecCounter,
) -> Result<SolveReport<R>> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "block method needs even k >= 2, got {k}"
        )));
    }
    let b = k / 2;
    if w0.len() != b {
        return Err(Error::InvalidConfig(format!(
            "initial block has {} columns, expected k/2 = {b}",
            w0.len()
        )));
    }
    for col in w0 {
        if col.len() != a.n() {
            return Err(Error::DimensionMismatch {
                n: a.n(),
                len: col.len(),
            });
        }
    }

    let mut w = mgs_orthonormalize(w0)?;
    let mut aw: Vec<Vec<R>> = Vec::with_capacity(b);
    for col in &w {
        aw.push(a.matvec(col, counter)?);
    }

    let mut trace = Vec::new();
    let mut lambda1 = R::zero();
    let mut lambda2 = R::nan();
    let mut eigenvector = w[0].clone();
    let mut converged = false;
    let mut iters = 0;

    for j in 1..=max_outer {
        let mut a2w: Vec<Vec<R>> = Vec::with_capacity(b);
        for col in &aw {
            a2w.push(a.matvec(col, counter)?);
        }
        let mut s: Vec<Vec<R>> = Vec::with_capacity(k);
        s.extend(w.iter().cloned());
        s.extend(aw.iter().cloned());
        let mut a_s: Vec<Vec<R>> = Vec::with_capacity(k);
        a_s.extend(aw.iter().cloned());
        a_s.extend(a2w);

        // A Krylov-chain start makes [W, AW] structurally redundant
        // (span{W, AW} has dimension b+1, not 2b), and near convergence
        // the AW columns collapse onto W; dependent columns are dropped
        // rather than treated as errors. W itself is orthonormal, so at
        // least b columns always survive.
        let (q, r, kept) = mgs_deflating(&s);
        let dim = q.len();
        debug_assert!(dim >= b);

        // AQ = (AS)|kept R^{-1}, column by column
        let n = a.n();
        let mut aq: Vec<Vec<R>> = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut e = vec![R::zero(); dim];
            e[i] = R::one();
            let c = r.solve_upper(&e);
            let mut col = vec![R::zero(); n];
            for (idx, &ci) in c.iter().enumerate() {
                for row in 0..n {
                    col[row] = col[row] + ci * a_s[kept[idx]][row];
                }
            }
            aq.push(col);
        }

        let mut proj = crate::dense::DenseMatrix::zeros(dim);
        for i in 0..dim {
            for jj in 0..dim {
                proj.set(i, jj, vecops::dot(&q[i], &aq[jj]));
            }
        }
        let pairs = eig::hessenberg_eigen(&proj)?;
        let dom = eig::select_dominant(&pairs, 2.min(dim))?;
        lambda1 = dom.values[0];
        lambda2 = dom.values.get(1).copied().unwrap_or_else(R::nan);

        let mut y = vec![R::zero(); n];
        let mut ay = vec![R::zero(); n];
        for (idx, &ci) in dom.vector.iter().enumerate() {
            for row in 0..n {
                y[row] = y[row] + ci * q[idx][row];
                ay[row] = ay[row] + ci * aq[idx][row];
            }
        }
        let ny = vecops::norm2(&y);
        let mut rsq = R::zero();
        for row in 0..n {
            let d = ay[row] - lambda1 * y[row];
            rsq = rsq + d * d;
        }
        let residual = rsq.sqrt() / ny;
        eigenvector = y.iter().map(|&v| v / ny).collect();
        trace.push(TraceRow {
            iteration: j,
            matvecs: counter.count(),
            lambda1,
            lambda2,
            gamma: R::zero(),
            residual,
        });
        iters = j;
        if residual < tol {
            converged = true;
            break;
        }

        // retain the b most extreme Ritz directions, in reduced coordinates
        let mut kept: Vec<Vec<R>> = Vec::with_capacity(b);
        let mut rank = 0usize;
        while kept.len() < b && rank < pairs.len() {
            let value = pairs.value(rank);
            let vector = pairs.vector(rank);
            if value.im == R::zero() {
                kept.push(vector.iter().map(|z| z.re).collect());
                rank += 1;
            } else {
                kept.push(vector.iter().map(|z| z.re).collect());
                if kept.len() < b {
                    kept.push(vector.iter().map(|z| z.im).collect());
                }
                rank += 2; // skip the conjugate twin
            }
        }
        let kept = mgs_with_coefficients_reorth(&kept)?.0;
        let mut new_w: Vec<Vec<R>> = Vec::with_capacity(b);
        let mut new_aw: Vec<Vec<R>> = Vec::with_capacity(b);
        for coeffs in &kept {
            let mut wc = vec![R::zero(); n];
            let mut awc = vec![R::zero(); n];
            for (idx, &ci) in coeffs.iter().enumerate() {
                for row in 0..n {
                    wc[row] = wc[row] + ci * q[idx][row];
                    awc[row] = awc[row] + ci * aq[idx][row];
                }
            }
            new_w.push(wc);
            new_aw.push(awc);
        }
        w = new_w;
        aw = new_aw;
    }

    Ok(SolveReport {
        converged,
        outer_iterations: iters,
        matvecs: counter.count(),
        lambda1,
        lambda2,
        eigenvector,
        trace,
        accounting_note: BLOCK_ACCOUNTING.to_string(),
    })
}

const BLOCK_ACCOUNTING: &str =
    "b = k/2 products per outer iteration (plus b to prime the block); residuals from cached products";
