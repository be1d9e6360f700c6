use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::stepper::{path_generator, phi1, phi2, Stepper};
use crate::error::Result;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardResult {
    /// Last iterate at `t_end`.
    pub field: SpectralField,
    /// `max_m ‖u^{(j+1)}(t_m) - u^{(j)}(t_m)‖₂` per iteration.
    pub distances: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
}

/// Fixed-point iteration `u ← G_t u₀ + M(u) + L(u)` over the whole time grid
/// for the noise realization of `path`.
///
/// The drift convolution `M` integrates the linear interpolant of
/// `χ drift(u)` exactly against the semigroup on each step; the stochastic
/// convolution `L` uses the same increments and weights as [`Stepper`].
pub fn picard_solve(
    cfg: &SimConfig,
    path: u64,
    max_iterations: usize,
    tolerance: f64,
) -> Result<PicardResult> {
    let stepper = Stepper::new(cfg)?;
    let u0 = cfg.initial.build(cfg.dim, cfg.modes)?;
    let steps = cfg.steps();
    let generator = path_generator(cfg, path);
    let noise: Vec<_> = (0..steps)
        .map(|m| {
            (!cfg.sigma.is_zero())
                .then(|| generator.increment(m as u64, cfg.dt, cfg.dim, cfg.modes))
        })
        .collect();

    let op = cfg.operator;
    let lambdas = u0.lambdas();
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for &lam in &lambdas {
        let z = op.omega(lam) * cfg.dt;
        let factor = cfg.dt * (-op.rho * lam - op.qtilde);
        left.push(factor * (phi1(z) - phi2(z)));
        right.push(factor * phi2(z));
    }
    let decay = stepper.decay();

    // u^{(0)} = G_t u₀, by the same recursion so that trivial problems
    // converge exactly.
    let mut current = Vec::with_capacity(steps + 1);
    current.push(u0.clone());
    for m in 0..steps {
        let mut next = current[m].clone();
        for (c, d) in next.coeffs_mut().iter_mut().zip(decay) {
            *c *= d;
        }
        current.push(next);
    }

    let has_drift = !cfg.nonlinearity.is_zero();
    let mut distances = Vec::new();
    let mut converged = false;
    let mut diverged = false;
    for _ in 0..max_iterations {
        let chi: Vec<f64> = current
            .iter()
            .map(|u| stepper.chi(u))
            .collect::<Result<_>>()?;
        let drift: Vec<Option<SpectralField>> = current
            .iter()
            .zip(&chi)
            .map(|(u, &c)| {
                if has_drift && c != 0.0 {
                    let nodal = stepper.padded_transform().to_nodal(u)?;
                    let mut f = stepper.f_spectral(&nodal)?;
                    for v in f.coeffs_mut() {
                        *v *= c;
                    }
                    Ok(Some(f))
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?;

        let mut next_traj = Vec::with_capacity(steps + 1);
        next_traj.push(u0.clone());
        for m in 0..steps {
            let mut next = next_traj[m].clone();
            for (c, d) in next.coeffs_mut().iter_mut().zip(decay) {
                *c *= d;
            }
            if let Some(f) = &drift[m] {
                for ((c, v), w) in next.coeffs_mut().iter_mut().zip(f.coeffs()).zip(&left) {
                    *c += w * v;
                }
            }
            if let Some(f) = &drift[m + 1] {
                for ((c, v), w) in next.coeffs_mut().iter_mut().zip(f.coeffs()).zip(&right) {
                    *c += w * v;
                }
            }
            if let Some(xi) = &noise[m] {
                if chi[m] != 0.0 {
                    let g = stepper.weighted_noise(&current[m], xi, chi[m])?;
                    for (c, v) in next.coeffs_mut().iter_mut().zip(g.coeffs()) {
                        *c += v;
                    }
                }
            }
            next_traj.push(next);
        }

        let dist = next_traj
            .iter()
            .zip(&current)
            .map(|(a, b)| a.distance_l2(b))
            .fold(0.0, f64::max);
        let scale = next_traj.iter().map(|u| u.l2_norm()).fold(1.0, f64::max);
        distances.push(dist);
        current = next_traj;
        if !dist.is_finite() || dist > 1e6 * scale {
            diverged = true;
            break;
        }
        if dist <= tolerance * scale {
            converged = true;
            break;
        }
    }
    if diverged {
        log::warn!("Picard iteration diverged on path {path}");
    }
    Ok(PicardResult {
        field: current.pop().expect("non-empty time grid"),
        iterations: distances.len(),
        distances,
        converged,
        diverged,
    })
}
