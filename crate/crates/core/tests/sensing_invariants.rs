use ampcs::sensing::{gaussian_matrix, toeplitz_bpsk_matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn columns_have_unit_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..200u64 {
        let m = rng.random_range(1..40);
        let n = rng.random_range(1..60);
        let a = if seed % 2 == 0 { gaussian_matrix(m, n, seed) } else { toeplitz_bpsk_matrix(m, n, seed) }.unwrap();
        for j in 0..n {
            let norm: f64 = a.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn toeplitz_fast_path_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for seed in 0..30u64 {
        let m = rng.random_range(1..120);
        let n = rng.random_range(1..200);
        let a = toeplitz_bpsk_matrix(m, n, seed).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (f, fd) = (a.forward_fft(&x).unwrap(), a.forward_dense(&x).unwrap());
        let (b, bd) = (a.adjoint_fft(&z).unwrap(), a.adjoint_dense(&z).unwrap());
        assert!(f.iter().zip(&fd).all(|(p, q)| (p - q).abs() <= 1e-10));
        assert!(b.iter().zip(&bd).all(|(p, q)| (p - q).abs() <= 1e-10));
    }
}
