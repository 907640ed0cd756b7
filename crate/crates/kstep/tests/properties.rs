//! Cross-module invariants, mostly property-based: oracle agreement for
//! the sparse product and the Matrix Market reader, basis quality for the
//! orthogonalization paths, and the algebraic identities behind the
//! extrapolation step.

use kstep::diagnostics::{mode_ratios, residual_norm};
use kstep::krylov::{
    arnoldi_factorization, assemble_kstep_output, mgs_orthonormalize, naive_kstep_projection,
    orthogonalized_kstep_projection,
};
use kstep::solver::{gamma_value, lobpcg2_step, GammaStrategy};
use kstep::sparse::{alternating_diag, MatvecCounter, SparseMatrix};
use kstep::vecops;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut dense = vec![vec![0.0; n]; n];
    for &(r, c, v) in triplets {
        dense[r][c] += v;
    }
    dense
}

fn dense_matvec(dense: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    dense
        .iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

prop_compose! {
    fn sparse_with_triplets()(n in 2usize..50)(
        n in Just(n),
        triplets in prop::collection::vec(
            (0..n, 0..n, -10.0f64..10.0),
            1..(n * n / 2).max(2),
        ),
    ) -> (usize, Vec<(usize, usize, f64)>) {
        (n, triplets)
    }
}

proptest! {
    // csr product matches a dense triple-loop oracle
    #[test]
    fn matvec_matches_dense_oracle((n, triplets) in sparse_with_triplets(),
                                   seed in 0u64..1000) {
        let a = SparseMatrix::from_triplets(n, &triplets).unwrap();
        let dense = dense_from_triplets(n, &triplets);
        let x: Vec<f64> = (0..n)
            .map(|i| ((seed + i as u64) as f64 * 0.37).sin() * 5.0)
            .collect();
        let mut c = MatvecCounter::new();
        let got = a.matvec(&x, &mut c).unwrap();
        let want = dense_matvec(&dense, &x);
        let scale: f64 = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            prop_assert!((got[i] - want[i]).abs() <= 1e-13 * scale);
        }
        prop_assert_eq!(c.count(), 1);
    }

    // parsing a coordinate file and multiplying by ones equals the
    // triplet row-sum oracle, including symmetric expansion
    #[test]
    fn market_roundtrip_row_sums((n, triplets) in sparse_with_triplets(),
                                 symmetric in any::<bool>()) {
        let entries: Vec<(usize, usize, f64)> = if symmetric {
            triplets.iter().map(|&(r, c, v)| if c > r { (c, r, v) } else { (r, c, v) }).collect()
        } else {
            triplets.clone()
        };
        let mut text = format!(
            "%%MatrixMarket matrix coordinate real {}\n{n} {n} {}\n",
            if symmetric { "symmetric" } else { "general" },
            entries.len(),
        );
        for &(r, c, v) in &entries {
            text += &format!("{} {} {:e}\n", r + 1, c + 1, v);
        }
        let a = kstep::market::read_matrix_market::<f64>(text.as_bytes()).unwrap();

        let mut expanded = entries.clone();
        if symmetric {
            for &(r, c, v) in &entries {
                if r != c {
                    expanded.push((c, r, v));
                }
            }
        }
        let dense = dense_from_triplets(n, &expanded);
        let mut c = MatvecCounter::new();
        let got = a.matvec(&vec![1.0; n], &mut c).unwrap();
        let want = dense_matvec(&dense, &vec![1.0; n]);
        for i in 0..n {
            prop_assert!((got[i] - want[i]).abs() <= 1e-12 * (1.0 + want[i].abs()));
        }
    }

    // modified Gram-Schmidt returns an orthonormal basis spanning the input
    #[test]
    fn mgs_basis_quality(n in 8usize..40, k in 2usize..8, seed in 0u64..500) {
        prop_assume!(k < n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let q = match mgs_orthonormalize(&cols) {
            Ok(q) => q,
            Err(_) => return Ok(()), // genuinely dependent sample
        };
        for i in 0..k {
            for j in 0..k {
                let d = vecops::dot(&q[i], &q[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - expect).abs() < 1e-10);
            }
        }
        // every input column lies in the span of q
        for col in &cols {
            let mut resid = col.clone();
            for qi in &q {
                let c = vecops::dot(qi, &resid);
                vecops::axpy_neg(&mut resid, c, qi);
            }
            prop_assert!(vecops::norm2(&resid) <= 1e-10 * (1.0 + vecops::norm2(col)));
        }
    }

    // Arnoldi basis stays orthonormal on well-scaled random operators in
    // the regime the method targets (k well below n)
    #[test]
    fn arnoldi_basis_quality(n in 30usize..80, k in 2usize..12, seed in 0u64..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || rng.gen_bool(0.3) {
                    triplets.push((i, j, rng.gen_range(-1.0..1.0)));
                }
            }
            triplets.push((i, i, 2.0 + i as f64 / n as f64));
        }
        let a = SparseMatrix::from_triplets(n, &triplets).unwrap();
        let y1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let mut c = MatvecCounter::new();
        let fact = arnoldi_factorization(&a, &y1, k, &mut c).unwrap();
        prop_assert_eq!(c.count(), fact.k_effective as u64);
        for i in 0..fact.k_effective {
            for j in 0..fact.k_effective {
                let d = vecops::dot(&fact.basis[i], &fact.basis[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - expect).abs() < 1e-10);
            }
        }
    }

    // the 2-step Rayleigh maximizer is collinear with the k = 2 Arnoldi
    // output on symmetric matrices
    #[test]
    fn lobpcg2_equivalence(n in 5usize..40, seed in 0u64..300) {
        let mut triplets = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                triplets.push((i, j, v));
                if i != j {
                    triplets.push((j, i, v));
                }
            }
            triplets.push((i, i, n as f64));
        }
        let a = SparseMatrix::from_triplets(n, &triplets).unwrap();
        let x: Vec<f64> = {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let mut c = MatvecCounter::new();
        let step = lobpcg2_step(&a, &x, &mut c).unwrap();
        if step.converged {
            return Ok(());
        }
        let fact = arnoldi_factorization(&a, &x, 2, &mut c).unwrap();
        let out = assemble_kstep_output(&fact, 2).unwrap();
        let cosine = vecops::dot(&step.next, &out.iterate).abs();
        prop_assert!(cosine > 1.0 - 1e-8, "|cos| = {}", cosine);
    }

    // the extrapolation map: eta_hat = (1 - gamma) eta + gamma, exercised
    // through the diagnostics entry point
    #[test]
    fn mode_ratio_identity_pointwise(eta in -2.0f64..2.0, gamma in -1.0f64..0.0) {
        let u = (1.0 - gamma) * eta + gamma;
        let m = mode_ratios(&[1.0], &[eta], &[u], gamma, &[vec![1.0]]);
        prop_assert!((m.eta_hat[0] - ((1.0 - gamma) * m.eta[0] + gamma)).abs() < 1e-12);
    }
}

// --- deterministic cross-module identities ---

/// Replays two consecutive restarts of the extrapolated iteration by hand
/// and checks the component-ratio identity on every available mode.
#[test]
fn mode_ratio_identity_on_actual_solver_steps() {
    let n = 120;
    let a = alternating_diag::<f64>(n);
    let standard_basis: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut counter = MatvecCounter::new();
    let y0 = vec![1.0; n];
    let fact = arnoldi_factorization(&a, &y0, 6, &mut counter).unwrap();
    let mut prev = assemble_kstep_output(&fact, 2).unwrap();
    let mut u = prev.iterate.clone();

    for j in 1..=4 {
        let fact = arnoldi_factorization(&a, &u, 6, &mut counter).unwrap();
        let next = assemble_kstep_output(&fact, 2).unwrap();
        let gamma = gamma_value(
            GammaStrategy::RatioPowerJ,
            next.values[0],
            next.values[1].abs(),
            j,
        )
        .unwrap();
        let mut aligned_prev = prev.iterate.clone();
        if vecops::dot(&aligned_prev, &next.iterate) < 0.0 {
            vecops::scale_in_place(&mut aligned_prev, -1.0);
        }
        let u_next = vecops::lin_comb(1.0 - gamma, &next.iterate, gamma, &aligned_prev);

        let ratios = mode_ratios(&aligned_prev, &next.iterate, &u_next, gamma, &standard_basis);
        let mut checked = 0;
        for i in 0..n {
            if ratios.available[i] {
                let eta = ratios.eta[i];
                let eta_hat = ratios.eta_hat[i];
                assert!(
                    (eta_hat - ((1.0 - gamma) * eta + gamma)).abs()
                        <= 1e-12 * (1.0 + eta.abs()),
                    "mode {i} at step {j}: eta_hat {eta_hat} vs identity"
                );
                checked += 1;
            }
        }
        assert!(checked > n / 2, "too few available modes: {checked}");

        u = vecops::normalize(&u_next).unwrap();
        prev = next;
    }
}

/// Damping region and no-growth boundary of the extrapolation map over a
/// grid of (gamma, eta) values.
#[test]
fn extrapolation_map_damping_regions() {
    let map = |gamma: f64, eta: f64| (1.0 - gamma) * eta + gamma;
    for gi in 1..=99 {
        let gamma = -(gi as f64) / 100.0; // (-1, 0) open
        for ei in -200..=200 {
            let eta = ei as f64 / 100.0;
            let eta_hat = map(gamma, eta);
            if eta > 0.0 && eta < 1.0 {
                // strict damping below the stagnation fixed point
                assert!(eta_hat < eta);
                assert!(
                    eta_hat.abs() < eta.abs().max((2.0 * eta - 1.0).abs()) + 1e-12,
                    "gamma {gamma} eta {eta}"
                );
            }
            // no growth in magnitude exactly on [gamma/(gamma-2), 1]
            let boundary = gamma / (gamma - 2.0);
            let no_growth = eta_hat.abs() <= eta.abs() + 1e-12;
            let in_region = eta >= boundary - 1e-12 && eta <= 1.0 + 1e-12;
            assert_eq!(
                no_growth, in_region,
                "gamma {gamma} eta {eta} eta_hat {eta_hat} boundary {boundary}"
            );
        }
        // at the boundary the magnitudes match exactly
        let boundary = gamma / (gamma - 2.0);
        assert!((map(gamma, boundary).abs() - boundary.abs()).abs() < 1e-12);
    }
}

/// The cached-product residual that drives convergence agrees with an
/// independently recomputed one.
#[test]
fn cached_residual_consistent_across_matrices() {
    for n in [30usize, 100, 300] {
        let a = alternating_diag::<f64>(n);
        let mut c = MatvecCounter::new();
        let fact = arnoldi_factorization(&a, &vec![1.0; n], 8.min(n), &mut c).unwrap();
        let out = assemble_kstep_output(&fact, 2).unwrap();
        let fresh = residual_norm(&a, out.values[0], &out.iterate, &mut c).unwrap();
        assert!((out.residual - fresh).abs() <= 1e-9 * (1.0 + fresh));
    }
}

/// Naive and orthogonalized projections agree with Arnoldi on the
/// dominant Ritz value while the basis is well conditioned.
#[test]
fn projection_routes_agree_when_well_conditioned() {
    let a = alternating_diag::<f64>(60);
    let y1 = vec![1.0; 60];
    for k in 2..=5usize {
        let mut c = MatvecCounter::new();
        let naive = naive_kstep_projection(&a, &y1, k, &mut c).unwrap();
        let ortho = orthogonalized_kstep_projection(&a, &y1, k, &mut c).unwrap();
        let fact = arnoldi_factorization(&a, &y1, k, &mut c).unwrap();
        let nv = naive.ritz().unwrap().value(0).re;
        let ov = ortho.ritz().unwrap().value(0).re;
        let av = kstep::eig::hessenberg_eigen(&fact.hessenberg)
            .unwrap()
            .value(0)
            .re;
        assert!((nv - ov).abs() < 1e-7 * nv.abs());
        assert!((nv - av).abs() < 1e-7 * nv.abs());
    }
}
