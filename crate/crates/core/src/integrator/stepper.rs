use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::error::{Error, Result};
use crate::noise::{CutoffSpec, NoiseGenerator, NoiseIncrement, SigmaForm};
use crate::spectral::{lq_norm, CosineTransform, NodalField, SpectralField};

/// Paths abort when `‖u‖₂` exceeds this.
pub const BLOW_UP_NORM: f64 = 1e12;

/// Precomputed per-mode factors of the exponential Euler step.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: SimConfig,
    cutoff: Option<CutoffSpec>,
    base: CosineTransform,
    padded: CosineTransform,
    decay: Vec<f64>,
    drift_weight: Vec<f64>,
    noise_weight: Vec<f64>,
}

/// Everything one step produces besides the new state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// `‖u‖_q` of the input state.
    pub norm_q: f64,
    /// `χ_n(‖u‖_q)`, 1 without cut-off.
    pub chi: f64,
    /// The stochastic part `χ w_k [σ(u) ξ]_k` added in this step (zeros when
    /// it vanishes).
    pub noise_term: Option<SpectralField>,
}

/// `φ₁(-z) = (1 - e^{-z}) / z`.
#[inline]
pub(crate) fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z / 2.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// `φ₂(-z) = (e^{-z} - 1 + z) / z²`.
#[inline]
pub(crate) fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        0.5 - z / 6.0 + z * z / 24.0
    } else {
        ((-z).exp_m1() + z) / (z * z)
    }
}

impl Stepper {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate(true)?;
        let base = CosineTransform::new(cfg.dim, cfg.modes, cfg.modes)?;
        let padded = CosineTransform::new(cfg.dim, cfg.modes, cfg.dealias.points(cfg.modes))?;
        let op = cfg.operator;
        let lambdas = SpectralField::zeros(cfg.dim, cfg.modes).lambdas();
        let mut decay = Vec::with_capacity(lambdas.len());
        let mut drift_weight = Vec::with_capacity(lambdas.len());
        let mut noise_weight = Vec::with_capacity(lambdas.len());
        for &lam in &lambdas {
            let z = op.omega(lam) * cfg.dt;
            decay.push(op.multiplier(lam, cfg.dt));
            drift_weight.push(cfg.dt * phi1(z) * (-op.rho * lam - op.qtilde));
            noise_weight.push(cfg.noise_weighting.weight(z));
        }
        Ok(Self {
            cfg: cfg.clone(),
            cutoff: cfg.cutoff(),
            base,
            padded,
            decay,
            drift_weight,
            noise_weight,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    /// Transform on the `N^d` grid.
    pub fn base_transform(&self) -> &CosineTransform {
        &self.base
    }

    pub(crate) fn padded_transform(&self) -> &CosineTransform {
        &self.padded
    }

    fn needs_padded(&self) -> bool {
        !self.cfg.nonlinearity.is_zero()
    }

    /// `‖u‖_q` by nodal quadrature on the dealiased grid.
    pub fn norm_q(&self, u: &SpectralField) -> Result<f64> {
        let nodal = self.padded.to_nodal(u)?;
        Ok(lq_norm(nodal.values(), nodal.cell_volume(), self.cfg.q))
    }

    /// `(-ϱλ_k - q̃) [f(u)]_k`, with `f(u)` evaluated on the dealiased grid.
    pub fn drift_spectral(&self, u: &SpectralField) -> Result<SpectralField> {
        let mut out = self.f_spectral(&self.padded.to_nodal(u)?)?;
        let op = self.cfg.operator;
        let lambdas = out.lambdas();
        for (c, lam) in out.coeffs_mut().iter_mut().zip(lambdas) {
            *c *= -op.rho * lam - op.qtilde;
        }
        Ok(out)
    }

    /// `[f(u)]_k` from dealiased nodal values of `u`.
    pub(crate) fn f_spectral(&self, nodal: &NodalField) -> Result<SpectralField> {
        let f = &self.cfg.nonlinearity;
        let values: Vec<f64> = nodal.values().iter().map(|&v| f.eval(v)).collect();
        self.padded
            .to_spectral(&NodalField::from_values(nodal.dim(), nodal.points(), values)?)
    }

    /// `[σ(u) ξ]_k` on the `N^d` grid.
    pub(crate) fn noise_projection(&self, u: &SpectralField, noise: &NoiseIncrement) -> Result<SpectralField> {
        let sigma = &self.cfg.sigma;
        if let SigmaForm::Constant = sigma.form {
            let mut g = self.base.to_spectral(&noise.nodal)?;
            for c in g.coeffs_mut() {
                *c *= sigma.c_sigma;
            }
            return Ok(g);
        }
        let nodal = self.base.to_nodal(u)?;
        let values: Vec<f64> = nodal
            .values()
            .iter()
            .zip(noise.nodal.values())
            .map(|(&v, &xi)| sigma.eval(v) * xi)
            .collect();
        self.base
            .to_spectral(&NodalField::from_values(nodal.dim(), nodal.points(), values)?)
    }

    /// `χ w_k [σ(u) ξ]_k`.
    pub(crate) fn weighted_noise(
        &self,
        u: &SpectralField,
        noise: &NoiseIncrement,
        chi: f64,
    ) -> Result<SpectralField> {
        let mut g = self.noise_projection(u, noise)?;
        for (c, w) in g.coeffs_mut().iter_mut().zip(&self.noise_weight) {
            *c *= chi * w;
        }
        Ok(g)
    }

    /// Cut-off factor and `‖u‖_q`, reusing the dealiased nodal values when
    /// they are available.
    fn chi_and_norm(&self, u: &SpectralField, padded: Option<&NodalField>) -> Result<(f64, f64)> {
        let norm = match padded {
            Some(n) => lq_norm(n.values(), n.cell_volume(), self.cfg.q),
            None => self.norm_q(u)?,
        };
        let chi = self.cutoff.map_or(1.0, |c| c.eval(norm));
        Ok((chi, norm))
    }

    pub fn chi(&self, u: &SpectralField) -> Result<f64> {
        Ok(self.chi_and_norm(u, None)?.0)
    }

    /// One exponential Euler step
    /// `u⁺ = e^{-z} u + Δt φ₁(-z) χ drift(u) + χ w(z) [σ(u) ξ]`, `z = ω_k Δt`.
    pub fn step_detailed(
        &self,
        u: &SpectralField,
        noise: Option<&NoiseIncrement>,
    ) -> Result<(SpectralField, StepInfo)> {
        let padded = if self.needs_padded() {
            Some(self.padded.to_nodal(u)?)
        } else {
            None
        };
        let (chi, norm_q) = self.chi_and_norm(u, padded.as_ref())?;

        let mut next = u.clone();
        for (c, d) in next.coeffs_mut().iter_mut().zip(&self.decay) {
            *c *= d;
        }
        if chi == 0.0 {
            return Ok((
                next,
                StepInfo {
                    norm_q,
                    chi,
                    noise_term: None,
                },
            ));
        }
        if let Some(nodal) = &padded {
            let f = self.f_spectral(nodal)?;
            for ((c, fk), w) in next.coeffs_mut().iter_mut().zip(f.coeffs()).zip(&self.drift_weight) {
                *c += chi * w * fk;
            }
        }
        let mut noise_term = None;
        if let Some(xi) = noise.filter(|_| !self.cfg.sigma.is_zero()) {
            let g = self.weighted_noise(u, xi, chi)?;
            for (c, v) in next.coeffs_mut().iter_mut().zip(g.coeffs()) {
                *c += v;
            }
            noise_term = Some(g);
        }
        Ok((
            next,
            StepInfo {
                norm_q,
                chi,
                noise_term,
            },
        ))
    }

    pub fn step(&self, u: &SpectralField, noise: Option<&NoiseIncrement>) -> Result<SpectralField> {
        Ok(self.step_detailed(u, noise)?.0)
    }
}

/// A stored state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub field: SpectralField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUpRecord {
    pub step: usize,
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub path: u64,
    pub snapshots: Vec<Snapshot>,
    /// `(t, ‖u(t)‖_q)` at every step, starting at `t = 0`.
    pub norms: Vec<(f64, f64)>,
    /// First grid time with `‖u‖_q ≥ n`.
    pub stopping_time: Option<f64>,
    /// First grid time at which `χ_n(‖u‖_q) = 0`.
    pub frozen_at: Option<f64>,
    pub blow_up: Option<BlowUpRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&SpectralField> {
        self.snapshots.last().map(|s| &s.field)
    }
}

/// What an observer sees after each step (and once for the initial state
/// with `info = None`).
pub struct StepView<'a> {
    pub step: usize,
    pub t: f64,
    pub state: &'a SpectralField,
    pub info: Option<&'a StepInfo>,
}

/// Noise source of path `path` as configured.
pub fn path_generator(cfg: &SimConfig, path: u64) -> NoiseGenerator {
    NoiseGenerator::new(cfg.seed, path).with_substeps(cfg.noise_substeps)
}

pub fn run_path(cfg: &SimConfig, path: u64) -> Result<Trajectory> {
    run_path_observed(cfg, path, |_| {})
}

/// Runs one path from `u₀` to `t_end`, calling `observer` on every state.
pub fn run_path_observed(
    cfg: &SimConfig,
    path: u64,
    observer: impl FnMut(&StepView<'_>),
) -> Result<Trajectory> {
    let stepper = Stepper::new(cfg)?;
    let u0 = cfg.initial.build(cfg.dim, cfg.modes)?;
    run_with(&stepper, u0, path, observer)
}

pub(crate) fn run_with(
    stepper: &Stepper,
    u0: SpectralField,
    path: u64,
    mut observer: impl FnMut(&StepView<'_>),
) -> Result<Trajectory> {
    let cfg = stepper.config();
    let generator = path_generator(cfg, path);
    let steps = cfg.steps();
    let stride = cfg.snapshot_stride;
    let level = cfg.cutoff_level;

    let mut traj = Trajectory {
        path,
        snapshots: vec![Snapshot {
            t: 0.0,
            field: u0.clone(),
        }],
        norms: Vec::with_capacity(steps + 1),
        stopping_time: None,
        frozen_at: None,
        blow_up: None,
    };
    observer(&StepView {
        step: 0,
        t: 0.0,
        state: &u0,
        info: None,
    });

    let mut u = u0;
    for m in 0..steps {
        let t = m as f64 * cfg.dt;
        let noise = (!cfg.sigma.is_zero())
            .then(|| generator.increment(m as u64, cfg.dt, cfg.dim, cfg.modes));
        let (next, info) = stepper.step_detailed(&u, noise.as_ref())?;
        record_norm(&mut traj, t, info.norm_q, level);
        if info.chi == 0.0 && traj.frozen_at.is_none() {
            traj.frozen_at = Some(t);
        }
        let t_next = (m + 1) as f64 * cfg.dt;
        let norm2 = next.l2_norm();
        if !next.is_finite() || norm2 > BLOW_UP_NORM {
            let reason = if next.is_finite() {
                format!("L2 norm {norm2:.3e} exceeds {BLOW_UP_NORM:e}")
            } else {
                "non-finite state".to_owned()
            };
            log::warn!("path {path}: blow-up at step {} ({reason})", m + 1);
            traj.blow_up = Some(BlowUpRecord {
                step: m + 1,
                t: t_next,
                reason,
            });
            return Ok(traj);
        }
        u = next;
        observer(&StepView {
            step: m + 1,
            t: t_next,
            state: &u,
            info: Some(&info),
        });
        let last = m + 1 == steps;
        if last || (stride > 0 && (m + 1) % stride == 0) {
            traj.snapshots.push(Snapshot {
                t: t_next,
                field: u.clone(),
            });
        }
    }
    let final_norm = stepper.norm_q(&u)?;
    record_norm(&mut traj, steps as f64 * cfg.dt, final_norm, level);
    Ok(traj)
}

fn record_norm(traj: &mut Trajectory, t: f64, norm: f64, level: Option<f64>) {
    traj.norms.push((t, norm));
    if let Some(n) = level {
        if traj.stopping_time.is_none() && norm >= n {
            traj.stopping_time = Some(t);
        }
    }
}

/// Converts a blow-up record into an error for callers that need a state.
pub fn require_complete(traj: &Trajectory) -> Result<&SpectralField> {
    if let Some(b) = &traj.blow_up {
        return Err(Error::BlowUp {
            step: b.step,
            t: b.t,
            reason: b.reason.clone(),
        });
    }
    Ok(traj.final_state().expect("trajectory has an initial snapshot"))
}
