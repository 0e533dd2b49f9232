use ampcs::experiments::dmm_l1_curve;
use libm::erfc;

fn rho_dense(delta: f64) -> f64 {
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let upper_tail = |z: f64| 0.5 * erfc(z / std::f64::consts::SQRT_2);
    (1..=200_000)
        .map(|i| {
            let z = i as f64 * 1e-4;
            let psi = (1.0 + z * z) * upper_tail(z) - z * phi(z);
            (1.0 - 2.0 / delta * psi) / (1.0 + z * z - 2.0 * psi)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn curve_matches_dense_maximization() {
    for delta in [0.05, 0.2, 0.5, 0.8, 0.95] {
        let ours = dmm_l1_curve(delta).unwrap();
        let dense = rho_dense(delta);
        assert!((ours - dense).abs() < 1e-6, "delta={delta}: {ours} vs {dense}");
    }
    assert!((dmm_l1_curve(0.5).unwrap() - 0.3848).abs() < 1e-3);
}

