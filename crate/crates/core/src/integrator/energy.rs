use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::stepper::{Stepper, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{OperatorSpec, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub t: f64,
    /// The `k = 0` coefficient.
    pub mass: f64,
    pub l2_sq: f64,
    pub h1_sq: f64,
    pub h2_sq: f64,
    pub free_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
    pub b_u0: f64,
}

/// `B(u₀) = ½ Σ_k (ϱλ_k + q̃)^{-1} (u₀, ε_k)²`; the `k = 0` mode is skipped
/// when `q̃ = 0`.
pub fn b_functional(u0: &SpectralField, op: &OperatorSpec) -> f64 {
    u0.coeffs()
        .iter()
        .zip(u0.lambdas())
        .filter_map(|(c, lam)| {
            let w = op.rho * lam + op.qtilde;
            (w > 0.0).then(|| 0.5 * c * c / w)
        })
        .sum()
}

/// `E(u) = ∫ |∇u|²/2 + F(u) dx`, with the potential integrated on the
/// dealiased grid.
pub fn free_energy(stepper: &Stepper, u: &SpectralField) -> Result<f64> {
    let gradient: f64 = u
        .coeffs()
        .iter()
        .zip(u.lambdas())
        .map(|(c, lam)| lam * c * c)
        .sum();
    let nodal = stepper.padded_transform().to_nodal(u)?;
    let f = &stepper.config().nonlinearity;
    let potential: f64 = nodal.values().iter().map(|&v| f.potential(v)).sum::<f64>() * nodal.cell_volume();
    Ok(0.5 * gradient + potential)
}

pub fn energy_row(stepper: &Stepper, t: f64, u: &SpectralField) -> Result<EnergyRow> {
    let (mut l2, mut h1, mut h2) = (0.0, 0.0, 0.0);
    for (c, lam) in u.coeffs().iter().zip(u.lambdas()) {
        let c2 = c * c;
        l2 += c2;
        h1 += lam * c2;
        h2 += lam * lam * c2;
    }
    Ok(EnergyRow {
        t,
        mass: u.coeffs()[0],
        l2_sq: l2,
        h1_sq: h1,
        h2_sq: h2,
        free_energy: free_energy(stepper, u)?,
    })
}

/// Norms, mass and free energy at every stored snapshot.
pub fn energy_diagnostics(traj: &Trajectory, cfg: &SimConfig) -> Result<EnergyReport> {
    let stepper = Stepper::new(cfg)?;
    let first = traj
        .snapshots
        .first()
        .ok_or_else(|| Error::Domain("trajectory has no snapshots".into()))?;
    let rows = traj
        .snapshots
        .iter()
        .map(|s| energy_row(&stepper, s.t, &s.field))
        .collect::<Result<_>>()?;
    Ok(EnergyReport {
        rows,
        b_u0: b_functional(&first.field, &cfg.operator),
    })
}
