use super::*;
use crate::noise::SigmaSpec;
use crate::spectral::{semigroup_apply, MultiIndex, OperatorSpec, SpectralField};
use std::f64::consts::PI;

fn linear_cfg(dim: usize, modes: usize) -> SimConfig {
    SimConfig {
        dim,
        modes,
        q: if dim == 3 { 6.0 } else { 4.0 },
        sigma: SigmaSpec::zero(),
        nonlinearity: Nonlinearity::Zero,
        dt: 1e-3,
        t_end: 0.01,
        ..SimConfig::default()
    }
}

#[test]
fn drift_of_zero_and_constant_fields() {
    let cfg = SimConfig {
        modes: 16,
        ..SimConfig::default()
    };
    let stepper = Stepper::new(&cfg).unwrap();
    let zero = SpectralField::zeros(1, 16);
    assert!(stepper.drift_spectral(&zero).unwrap().coeffs().iter().all(|&c| c == 0.0));

    let c = 1.7;
    let u = InitialCondition::Constant { value: c }.build(1, 16).unwrap();
    let d = stepper.drift_spectral(&u).unwrap();
    let want = -cfg.operator.qtilde * (c * c * c - c) * PI.sqrt();
    assert!((d.coeffs()[0] - want).abs() < 1e-12);
    assert!(d.coeffs()[1..].iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn drift_of_single_cosine_has_modes_one_and_three() {
    let cfg = SimConfig {
        modes: 16,
        ..SimConfig::default()
    };
    let stepper = Stepper::new(&cfg).unwrap();
    let u = SpectralField::unit(1, 16, &MultiIndex::new(&[1]).unwrap()).unwrap();
    let d = stepper.drift_spectral(&u).unwrap();
    // ε₁³ - ε₁ with cos³ = (3 cos + cos 3x)/4
    let a = (2.0 / PI).powf(1.5);
    let f1 = a * 3.0 / 4.0 * (PI / 2.0).sqrt() - 1.0;
    let f3 = a / 4.0 * (PI / 2.0).sqrt();
    assert!((d.coeffs()[1] - (-2.0 * f1)).abs() < 1e-12);
    assert!((d.coeffs()[3] - (-10.0 * f3)).abs() < 1e-12);
    for k in [0, 2, 4, 5, 6, 9, 15] {
        assert!(d.coeffs()[k].abs() < 1e-13, "mode {k}: {}", d.coeffs()[k]);
    }
}

#[test]
fn linear_flow_is_exact() {
    for dim in 1..=3 {
        let cfg = linear_cfg(dim, 8);
        let mut u0 = SpectralField::zeros(dim, 8);
        for (i, c) in u0.coeffs_mut().iter_mut().enumerate() {
            *c = 1.0 / (1.0 + i as f64);
        }
        let stepper = Stepper::new(&cfg).unwrap();
        let next = stepper.step(&u0, None).unwrap();
        for (i, (a, c0)) in next.coeffs().iter().zip(u0.coeffs()).enumerate() {
            let lam = u0.index(i).lambda();
            let want = (-(lam * lam + lam) * cfg.dt).exp() * c0;
            assert!((a - want).abs() <= 1e-13 * want.abs());
        }
    }
}

#[test]
fn frozen_regime_is_pure_semigroup() {
    let cfg = SimConfig {
        modes: 16,
        cutoff_level: Some(1.0),
        sigma: SigmaSpec::constant(1.0),
        initial: InitialCondition::Constant { value: 5.0 },
        ..SimConfig::default()
    };
    let stepper = Stepper::new(&cfg).unwrap();
    let mut u = cfg.initial.build(1, 16).unwrap();
    u.coeffs_mut()[3] = 0.4;
    let xi = crate::noise::sample_noise(1, 0, 0, cfg.dt, 1, 16);
    let (next, info) = stepper.step_detailed(&u, Some(&xi)).unwrap();
    assert_eq!(info.chi, 0.0);
    assert_eq!(next, semigroup_apply(&u, cfg.dt, &cfg.operator).unwrap());
}

#[test]
fn pure_cahn_hilliard_conserves_mass() {
    let cfg = SimConfig {
        modes: 16,
        operator: OperatorSpec::new(1.0, 0.0).unwrap(),
        sigma: SigmaSpec::zero(),
        initial: InitialCondition::RandomSmooth {
            amplitude: 0.5,
            decay: 2.0,
            seed: 3,
        },
        snapshot_stride: 1,
        ..SimConfig::default()
    };
    let traj = run_path(&cfg, 0).unwrap();
    let m0 = traj.snapshots[0].field.coeffs()[0];
    for s in &traj.snapshots {
        assert!((s.field.coeffs()[0] - m0).abs() < 1e-12);
    }
}

#[test]
fn zero_is_a_fixed_point() {
    let cfg = SimConfig {
        modes: 16,
        sigma: SigmaSpec::zero(),
        snapshot_stride: 10,
        ..SimConfig::default()
    };
    let traj = run_path(&cfg, 0).unwrap();
    assert!(traj.snapshots.iter().all(|s| s.field.coeffs().iter().all(|&c| c == 0.0)));
}

#[test]
fn constant_state_relaxes_to_the_well() {
    let u0: f64 = 0.6;
    let cfg = SimConfig {
        modes: 8,
        sigma: SigmaSpec::zero(),
        initial: InitialCondition::Constant { value: u0 },
        dt: 1e-3,
        t_end: 4.0,
        snapshot_stride: 500,
        ..SimConfig::default()
    };
    let traj = run_path(&cfg, 0).unwrap();
    for s in &traj.snapshots {
        // du/dt = -(u³ - u)  ⇒  u² = 1 / (1 + (u₀⁻² - 1) e^{-2t})
        let exact = 1.0 / (1.0 + (u0.powi(-2) - 1.0) * (-2.0 * s.t).exp()).sqrt();
        let mean = s.field.coeffs()[0] / PI.sqrt();
        assert!((mean - exact).abs() < 2e-3, "t = {}: {mean} vs {exact}", s.t);
        assert!(s.field.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
    }
    let last = traj.final_state().unwrap().coeffs()[0] / PI.sqrt();
    assert!((last - 1.0).abs() < 1e-3);
}

#[test]
fn paths_are_deterministic_and_distinct() {
    let cfg = SimConfig {
        modes: 16,
        snapshot_stride: 20,
        t_end: 0.01,
        ..SimConfig::default()
    };
    let a = run_path(&cfg, 4).unwrap();
    let b = run_path(&cfg, 4).unwrap();
    assert_eq!(a, b);
    let c = run_path(&cfg, 5).unwrap();
    assert_ne!(a.final_state(), c.final_state());
    let par = par_paths(0..4u64, |p| run_path(&cfg, p)).unwrap();
    assert_eq!(par[3].final_state(), run_path(&cfg, 3).unwrap().final_state());
}

#[test]
fn snapshot_times_increase_and_stopping_time_matches_norms() {
    let cfg = SimConfig {
        modes: 16,
        sigma: SigmaSpec::constant(5.0),
        cutoff_level: Some(1.0),
        operator: OperatorSpec::new(1.0, 0.0).unwrap(),
        dt: 1e-3,
        t_end: 0.5,
        snapshot_stride: 50,
        ..SimConfig::default()
    };
    let traj = run_path(&cfg, 0).unwrap();
    assert!(traj.snapshots.windows(2).all(|w| w[1].t > w[0].t));
    let first = traj.norms.iter().find(|(_, n)| *n >= 1.0).map(|(t, _)| *t);
    assert_eq!(traj.stopping_time, first);
    assert!(traj.stopping_time.is_some());
}

#[test]
fn picard_on_linear_problem_converges_immediately() {
    let mut cfg = linear_cfg(1, 16);
    cfg.initial = InitialCondition::RandomSmooth {
        amplitude: 1.0,
        decay: 2.0,
        seed: 1,
    };
    let res = picard_solve(&cfg, 0, 10, 1e-14).unwrap();
    assert!(res.converged);
    assert_eq!(res.iterations, 1);
    let direct = semigroup_apply(&cfg.initial.build(1, 16).unwrap(), cfg.t_end, &cfg.operator).unwrap();
    assert!(res.field.distance_l2(&direct) < 1e-13 * direct.l2_norm());
}

#[test]
fn picard_contracts_geometrically() {
    let cfg = SimConfig {
        modes: 32,
        dt: 1e-3,
        t_end: 0.01,
        initial: InitialCondition::RandomSmooth {
            amplitude: 1.0,
            decay: 2.0,
            seed: 2,
        },
        ..SimConfig::default()
    };
    let res = picard_solve(&cfg, 0, 40, 1e-13).unwrap();
    assert!(res.converged, "{:?}", res.distances);
    let d = &res.distances;
    assert!(d.len() >= 3);
    for w in d.windows(2).take(d.len().saturating_sub(2)) {
        assert!(w[1] < w[0], "{d:?}");
    }
    // fixed point differs from ETD1 by O(dt)
    let etd = run_path(&cfg, 0).unwrap();
    let gap = res.field.distance_l2(etd.final_state().unwrap());
    assert!(gap > 0.0 && gap < 1e-2 * res.field.l2_norm().max(1.0));
}

#[test]
fn b_functional_examples() {
    let op = OperatorSpec::default();
    let e0 = SpectralField::unit(1, 8, &MultiIndex::zero(1)).unwrap();
    assert!((b_functional(&e0, &op) - 0.5).abs() < 1e-15);
    let e1 = SpectralField::unit(1, 8, &MultiIndex::new(&[1]).unwrap()).unwrap();
    assert!((b_functional(&e1, &op) - 0.25).abs() < 1e-15);
    let u = InitialCondition::RandomSmooth {
        amplitude: 1.0,
        decay: 0.5,
        seed: 9,
    }
    .build(2, 8)
    .unwrap();
    assert!(b_functional(&u, &op) <= 0.5 * u.l2_norm().powi(2));
    let ch = OperatorSpec::new(1.0, 0.0).unwrap();
    assert_eq!(b_functional(&e0, &ch), 0.0);
}

#[test]
fn free_energy_decreases_deterministically() {
    let cfg = SimConfig {
        modes: 16,
        sigma: SigmaSpec::zero(),
        dt: 1e-3,
        t_end: 0.2,
        snapshot_stride: 1,
        initial: InitialCondition::RandomSmooth {
            amplitude: 0.8,
            decay: 2.0,
            seed: 5,
        },
        ..SimConfig::default()
    };
    let traj = run_path(&cfg, 0).unwrap();
    let rep = energy_diagnostics(&traj, &cfg).unwrap();
    for w in rep.rows.windows(2) {
        assert!(w[1].free_energy <= w[0].free_energy + 1e-8);
    }
    for r in &rep.rows {
        assert!(r.l2_sq >= 0.0 && r.h1_sq >= 0.0 && r.h2_sq >= 0.0);
    }
}

#[test]
fn free_energy_of_constant_states() {
    let cfg = SimConfig::default();
    let stepper = Stepper::new(&cfg).unwrap();
    for (value, want) in [(1.0, 0.0), (0.0, 0.25 * PI)] {
        let u = InitialCondition::Constant { value }.build(1, cfg.modes).unwrap();
        assert!((free_energy(&stepper, &u).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn blow_up_is_recorded_not_raised() {
    let cfg = SimConfig {
        modes: 8,
        dt: 0.5,
        t_end: 5.0,
        sigma: SigmaSpec::zero(),
        operator: OperatorSpec::new(1.0, 0.0).unwrap(),
        initial: InitialCondition::Constant { value: 50.0 },
        ..SimConfig::default()
    };
    let traj = run_path(&cfg, 0).unwrap();
    assert!(traj.blow_up.is_none(), "pure CH keeps the mean fixed");
    let cfg = SimConfig {
        operator: OperatorSpec::new(1.0, 1.0).unwrap(),
        ..cfg
    };
    let traj = run_path(&cfg, 0).unwrap();
    assert!(traj.blow_up.is_some());
    assert!(require_complete(&traj).is_err());
}

#[test]
fn trajectory_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("schac-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = SimConfig {
        modes: 8,
        snapshot_stride: 25,
        ..SimConfig::default()
    };
    let traj = run_path(&cfg, 0).unwrap();
    let files = write_trajectory(&dir, "path0", &traj, &cfg).unwrap();
    let data = read_snapshot_data(&files[0]).unwrap();
    assert_eq!(data.len(), traj.snapshots.len() * 8);
    assert_eq!(&data[data.len() - 8..], traj.final_state().unwrap().coeffs());
    let sidecar: SnapshotSidecar =
        serde_json::from_reader(std::fs::File::open(&files[1]).unwrap()).unwrap();
    assert_eq!(sidecar.shape, vec![traj.snapshots.len(), 8]);
    assert_eq!(sidecar.config_hash, cfg.hash());
    let rep = energy_diagnostics(&traj, &cfg).unwrap();
    let csv = dir.join("energy.csv");
    write_energy_csv(&csv, &rep).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,mass,L2,H1,H2,free_energy\n"));
    assert_eq!(text.lines().count(), rep.rows.len() + 1);
    std::fs::remove_dir_all(&dir).unwrap();
}
