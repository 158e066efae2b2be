use nanolink_core::experiment::{sweep_ber, ExperimentConfig};

/// 3-point moving average with clamped edges.
fn smooth(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

fn sign_changes(values: &[f64]) -> usize {
    let smoothed = smooth(values);
    let signs: Vec<i8> = smoothed
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| d.abs() > 1e-12)
        .map(|d| if d > 0.0 { 1 } else { -1 })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[test]
fn ber_curves_are_unimodal_over_thresholds() {
    let cfg = ExperimentConfig {
        bit_count: 100_000,
        ..ExperimentConfig::default()
    };
    let curves = sweep_ber(&cfg).unwrap();
    for curve in &curves {
        let changes = sign_changes(&curve.ber);
        assert!(
            changes <= 1,
            "n={} BER curve has {changes} sign changes: {:?}",
            curve.n_channels,
            curve.ber
        );
    }
}
