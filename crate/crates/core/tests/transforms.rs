use schac_core::spectral::{
    basis_1d, nodes_1d, CosineTransform, MultiIndex, NodalField, SpectralField,
};

fn pseudo_random(n: usize, salt: u64) -> Vec<f64> {
    // splitmix-style hash, deterministic and dependency free
    (0..n as u64)
        .map(|i| {
            let mut z = (i ^ salt).wrapping_add(0x9e37_79b9_7f4a_7c15);
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn naive_forward(values: &[f64], dim: usize, n: usize) -> Vec<f64> {
    let nodes = nodes_1d(n);
    let h = std::f64::consts::PI / n as f64;
    (0..values.len())
        .map(|k| {
            let kk = MultiIndex::unravel(k, dim, n);
            (0..values.len())
                .map(|i| {
                    let ii = MultiIndex::unravel(i, dim, n);
                    let w: f64 = kk
                        .components()
                        .iter()
                        .zip(ii.components())
                        .map(|(&j, &x)| basis_1d(j, nodes[x]))
                        .product();
                    values[i] * w
                })
                .sum::<f64>()
                * h.powi(dim as i32)
        })
        .collect()
}

#[test]
fn forward_transform_matches_naive_sum() {
    for (dim, n) in [(1usize, 1usize), (1, 2), (1, 7), (1, 16), (2, 5), (2, 8), (3, 4)] {
        let values = pseudo_random(n.pow(dim as u32), n as u64);
        let f = NodalField::from_values(dim, n, values.clone()).unwrap();
        let got = CosineTransform::new(dim, n, n).unwrap().to_spectral(&f).unwrap();
        for (a, b) in got.coeffs().iter().zip(naive_forward(&values, dim, n)) {
            assert!((a - b).abs() < 1e-12, "d={dim} n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn inverse_transform_matches_pointwise_sum() {
    for (dim, n) in [(1usize, 16usize), (2, 6)] {
        let u = SpectralField::from_coeffs(dim, n, pseudo_random(n.pow(dim as u32), 3)).unwrap();
        let f = CosineTransform::new(dim, n, n).unwrap().to_nodal(&u).unwrap();
        for i in 0..f.values().len() {
            let x = f.node(i);
            assert!((f.values()[i] - u.eval(&x).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn round_trip_is_identity() {
    for dim in 1usize..=3 {
        let n: usize = if dim == 3 { 16 } else { 64 };
        let u = SpectralField::from_coeffs(dim, n, pseudo_random(n.pow(dim as u32), 9)).unwrap();
        let t = CosineTransform::new(dim, n, n).unwrap();
        let back = t.to_spectral(&t.to_nodal(&u).unwrap()).unwrap();
        assert!(back.distance_l2(&u) < 1e-10 * u.l2_norm());
    }
}

#[test]
fn parseval_identity() {
    for (dim, n) in [(1, 64), (2, 32)] {
        let values = pseudo_random(n * if dim == 2 { n } else { 1 }, 5);
        let f = NodalField::from_values(dim, n, values).unwrap();
        let u = CosineTransform::new(dim, n, n).unwrap().to_spectral(&f).unwrap();
        let nodal: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * f.cell_volume();
        let spectral: f64 = u.coeffs().iter().map(|c| c * c).sum();
        assert!((nodal - spectral).abs() < 1e-12 * nodal);
    }
}
