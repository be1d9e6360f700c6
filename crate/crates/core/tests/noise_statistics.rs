use schac_core::noise::sample_noise;
use schac_core::spectral::CosineTransform;

const DT: f64 = 1e-3;

#[test]
fn nodal_variance_and_mean() {
    let n = 32;
    let h = std::f64::consts::PI / n as f64;
    let samples: Vec<f64> = (0..400)
        .flat_map(|s| sample_noise(7, 0, s, DT, 1, n).nodal.into_values())
        .collect();
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let target = DT / h;
    assert!((var / target - 1.0).abs() < 0.05, "{var} vs {target}");
    // four standard errors of the sample mean
    assert!(mean.abs() < 4.0 * (target / m).sqrt());
}

#[test]
fn spectral_coefficients_have_variance_dt() {
    let n = 16;
    let transform = CosineTransform::new(1, n, n).unwrap();
    let samples = 10_000;
    let mut sums = vec![0.0; n];
    for s in 0..samples {
        let xi = sample_noise(3, 1, s, DT, 1, n).nodal;
        for (acc, c) in sums.iter_mut().zip(transform.to_spectral(&xi).unwrap().coeffs()) {
            *acc += c * c;
        }
    }
    for (k, s) in sums.iter().enumerate() {
        let var = s / samples as f64;
        assert!((var / DT - 1.0).abs() < 0.05, "mode {k}: {var}");
    }
}

#[test]
fn steps_and_paths_are_uncorrelated() {
    let n = 64;
    let steps = 200;
    let draws: Vec<Vec<f64>> = (0..=steps)
        .map(|s| sample_noise(1, 0, s, DT, 1, n).nodal.into_values())
        .collect();
    let other: Vec<Vec<f64>> = (0..steps)
        .map(|s| sample_noise(1, 1, s, DT, 1, n).nodal.into_values())
        .collect();
    let corr = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            for (u, v) in x.iter().zip(y) {
                ab += u * v;
                aa += u * u;
                bb += v * v;
            }
        }
        ab / (aa * bb).sqrt()
    };
    let bound = 4.0 / ((steps as usize * n) as f64).sqrt();
    let lag1 = corr(&draws[..steps as usize], &draws[1..]);
    let cross = corr(&draws[..steps as usize], &other);
    assert!(lag1.abs() < bound, "{lag1}");
    assert!(cross.abs() < bound, "{cross}");
}
