mod common;

use ampcs::amp::{amp_iterate, amp_run, default_tau_grid, tune_tau_oracle, AmpConfig, AmpState, ThresholdKind};
use ampcs::metrics::{nmse_db, RecoveryStatus};
use ampcs::sensing::{gaussian_matrix, SensingMatrix};
use ampcs::signals::strictly_sparse;
use common::exhaustive_l0;

/// Orthonormal DCT-II basis, row-major.
fn dct(n: usize) -> SensingMatrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let c = if i == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        for j in 0..n {
            data[i * n + j] = c * (std::f64::consts::PI * (j as f64 + 0.5) * i as f64 / n as f64).cos();
        }
    }
    SensingMatrix::from_row_major(n, n, &data).unwrap()
}

#[test]
fn zero_threshold_orthonormal_recovers_in_one_step() {
    let a = dct(16);
    let h = strictly_sparse(16, 5, 3).unwrap();
    let y = a.forward(&h.values).unwrap();
    for config in [AmpConfig::soft(0.0), AmpConfig::hard(0.0)] {
        let state = AmpState::new(&a, &y).unwrap();
        let state = amp_iterate(state, &a, &y, &config).unwrap();
        for (x, t) in state.h_hat.iter().zip(&h.values) {
            assert!((x - t).abs() < 1e-12);
        }
        let fit = a.forward(&state.h_hat).unwrap();
        assert!(fit.iter().zip(&y).all(|(f, v)| (f - v).abs() < 1e-12));

        let run = amp_run(&a, &y, &config.with_max_iters(1)).unwrap();
        let aty = a.adjoint(&y).unwrap();
        assert!(run.estimate.iter().zip(&aty).all(|(x, t)| (x - t).abs() < 1e-12));
    }
}

#[test]
fn tiny_instance_matches_exhaustive_search() {
    let mut hits = 0;
    for seed in 0..10u64 {
        let a = gaussian_matrix(6, 8, 100 + seed).unwrap();
        let h = strictly_sparse(8, 1, 200 + seed).unwrap();
        let y = a.forward(&h.values).unwrap();
        let oracle = exhaustive_l0(&a, &y, 1);
        let search = tune_tau_oracle(&a, &y, &h.values, &default_tau_grid(ThresholdKind::Soft), &AmpConfig::soft(1.0)).unwrap();
        if nmse_db(&search.result.estimate, &oracle).unwrap() <= -60.0 {
            hits += 1;
        }
    }
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn sigma_matches_residual_every_iteration() {
    for seed in 0..5u64 {
        let a = gaussian_matrix(60, 120, seed).unwrap();
        let h = strictly_sparse(120, 10, seed + 50).unwrap();
        let y = a.forward(&h.values).unwrap();
        let mut state = AmpState::new(&a, &y).unwrap();
        for _ in 0..30 {
            state = amp_iterate(state, &a, &y, &AmpConfig::soft(1.5)).unwrap();
            let z2: f64 = state.z.iter().map(|v| v * v).sum();
            assert!((state.sigma * state.sigma - z2 / 60.0).abs() <= 1e-12 * z2.max(1.0));
        }
    }
}

#[test]
fn onsager_term_helps() {
    let mut wins = 0;
    for seed in 0..5u64 {
        let a = gaussian_matrix(200, 400, seed).unwrap();
        let h = strictly_sparse(400, 20, seed + 10).unwrap();
        let y = a.forward(&h.values).unwrap();
        let with = amp_run(&a, &y, &AmpConfig::soft(1.5)).unwrap();
        let mut plain = AmpConfig::soft(1.5);
        plain.onsager = false;
        let without = amp_run(&a, &y, &plain).unwrap();
        if nmse_db(&with.estimate, &h.values).unwrap() < nmse_db(&without.estimate, &h.values).unwrap() {
            wins += 1;
        }
    }
    assert_eq!(wins, 5);
}

#[test]
fn hard_thresholding_recovers_easy_instance() {
    let a = gaussian_matrix(100, 200, 9).unwrap();
    let h = strictly_sparse(200, 5, 19).unwrap();
    let y = a.forward(&h.values).unwrap();
    let search = tune_tau_oracle(&a, &y, &h.values, &default_tau_grid(ThresholdKind::Hard), &AmpConfig::hard(1.0)).unwrap();
    assert!(nmse_db(&search.result.estimate, &h.values).unwrap() <= -60.0);
    assert_ne!(search.result.status, RecoveryStatus::Diverged);
}
