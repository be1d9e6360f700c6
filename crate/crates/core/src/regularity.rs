//! Monte-Carlo estimates of path regularity: structure-function Hölder
//! exponents in space and time, per-mode variances of the linear stochastic
//! convolution, and sup-norm moments against the cut-off level.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{par_paths, run_path_observed, SimConfig, Stepper, Trajectory};
use crate::noise::keyed_rng;
use crate::spectral::{basis_eval, CosineTransform, MultiIndex, OperatorSpec, SpectralField};
use crate::stats::{linear_fit, loglog_fit, quantile};

/// Fewer paths than this flag an estimate as low-confidence.
pub const MIN_PATHS: usize = 32;
pub const MIN_LAGS: usize = 4;
const BOOTSTRAP_RESAMPLES: usize = 400;
const BOOTSTRAP_DOMAIN: &[u8; 16] = b"schac/bootstrap\0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceOrder {
    First,
    Second,
}

impl DifferenceOrder {
    /// Largest exponent the difference can resolve.
    pub fn ceiling(&self) -> f64 {
        match self {
            DifferenceOrder::First => 1.0,
            DifferenceOrder::Second => 2.0,
        }
    }
}

/// `E|Δ_h u|² ~ h^{2λ}` fitted on log-log axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFunction {
    pub order: DifferenceOrder,
    pub lags: Vec<f64>,
    pub moments: Vec<f64>,
    pub slope: f64,
    /// `slope / 2`.
    pub exponent: f64,
    /// 95% path-bootstrap interval of the exponent.
    pub ci: (f64, f64),
    pub paths: usize,
    pub flagged: bool,
    /// The exponent reached the ceiling of the difference order.
    pub saturated: bool,
    pub note: Option<String>,
}

impl StructureFunction {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }
}

fn mean_over_paths(per_path: &[Vec<f64>], picks: impl Iterator<Item = usize>, lags: usize) -> Vec<f64> {
    let mut acc = vec![0.0; lags];
    let mut count = 0usize;
    for p in picks {
        for (a, v) in acc.iter_mut().zip(&per_path[p]) {
            *a += v;
        }
        count += 1;
    }
    acc.iter().map(|a| a / count as f64).collect()
}

/// Fits the averaged per-path moments `per_path[path][lag]` against `lags`.
pub fn fit_structure(
    lags: &[f64],
    per_path: &[Vec<f64>],
    order: DifferenceOrder,
    seed: u64,
) -> Result<StructureFunction> {
    if per_path.is_empty() || per_path.iter().any(|p| p.len() != lags.len()) {
        return Err(Error::ShapeMismatch {
            expected: format!("per-path moments over {} lags", lags.len()),
            found: format!("{} paths", per_path.len()),
        });
    }
    let paths = per_path.len();
    let moments = mean_over_paths(per_path, 0..paths, lags.len());
    let slope = loglog_fit(lags, &moments).map_or(f64::NAN, |f| f.slope);
    let exponent = slope / 2.0;

    let mut rng = keyed_rng(seed, 0, BOOTSTRAP_DOMAIN, 0);
    let mut samples: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .filter_map(|_| {
            let picks: Vec<usize> = (0..paths).map(|_| rng.random_range(0..paths)).collect();
            let m = mean_over_paths(per_path, picks.into_iter(), lags.len());
            loglog_fit(lags, &m).map(|f| f.slope / 2.0)
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let ci = if samples.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (quantile(&samples, 0.025), quantile(&samples, 0.975))
    };

    let mut notes = Vec::new();
    if paths < MIN_PATHS {
        notes.push(format!("only {paths} paths (< {MIN_PATHS}): low confidence"));
    }
    if lags.len() < MIN_LAGS {
        notes.push(format!("only {} lags (< {MIN_LAGS})", lags.len()));
    }
    if !slope.is_finite() {
        notes.push("moments not positive".to_owned());
    }
    let saturated = exponent >= order.ceiling() - 0.05;
    if saturated {
        notes.push(format!("saturated: exponent >= {}", order.ceiling()));
    }
    let flagged = paths < MIN_PATHS || lags.len() < MIN_LAGS || !slope.is_finite();
    Ok(StructureFunction {
        order,
        lags: lags.to_vec(),
        moments,
        slope,
        exponent,
        ci,
        paths,
        flagged,
        saturated,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

/// Mean squared difference of nodal `values` (a `points^dim` grid) at
/// `lag` grid steps, averaged over positions and axes.
pub fn grid_increment_moment(values: &[f64], dim: usize, points: usize, lag: usize, order: DifferenceOrder) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    let total = values.len();
    for axis in 0..dim {
        let stride = points.pow((dim - 1 - axis) as u32);
        for i in 0..total {
            let pos = (i / stride) % points;
            let v = match order {
                DifferenceOrder::First => {
                    if pos + lag >= points {
                        continue;
                    }
                    values[i + lag * stride] - values[i]
                }
                DifferenceOrder::Second => {
                    if pos < lag || pos + lag >= points {
                        continue;
                    }
                    values[i + lag * stride] - 2.0 * values[i] + values[i - lag * stride]
                }
            };
            sum += v * v;
            count += 1;
        }
    }
    sum / count.max(1) as f64
}

/// Spatial structure function of fields at a fixed time, on the `N^d`
/// midpoint grid with lags in grid steps.
pub fn holder_space(
    fields: &[SpectralField],
    order: DifferenceOrder,
    lag_steps: &[usize],
    seed: u64,
) -> Result<StructureFunction> {
    let first = fields
        .first()
        .ok_or_else(|| Error::Domain("no fields given".into()))?;
    let (dim, points) = (first.dim(), first.modes());
    let transform = CosineTransform::new(dim, points, points)?;
    let h = std::f64::consts::PI / points as f64;
    let per_path = fields
        .iter()
        .map(|u| {
            let nodal = transform.to_nodal(u)?;
            Ok(lag_steps
                .iter()
                .map(|&l| grid_increment_moment(nodal.values(), dim, points, l, order))
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let lags: Vec<f64> = lag_steps.iter().map(|&l| l as f64 * h).collect();
    fit_structure(&lags, &per_path, order, seed)
}

/// Temporal structure function from `series[path][probe][step]` sampled
/// every `dt`.
pub fn holder_time(series: &[Vec<Vec<f64>>], dt: f64, lag_steps: &[usize], seed: u64) -> Result<StructureFunction> {
    let per_path: Vec<Vec<f64>> = series
        .iter()
        .map(|probes| {
            lag_steps
                .iter()
                .map(|&l| {
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    for s in probes {
                        for w in s.windows(l + 1) {
                            let d = w[l] - w[0];
                            sum += d * d;
                            count += 1;
                        }
                    }
                    sum / count.max(1) as f64
                })
                .collect()
        })
        .collect();
    let lags: Vec<f64> = lag_steps.iter().map(|&l| l as f64 * dt).collect();
    fit_structure(&lags, &per_path, DifferenceOrder::First, seed)
}

/// Point evaluation of spectral fields at fixed probe locations.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    pub points: Vec<Vec<f64>>,
    basis: Vec<Vec<f64>>,
}

impl ProbeSet {
    pub fn new(points: Vec<Vec<f64>>, dim: usize, modes: usize) -> Result<Self> {
        let count = modes.pow(dim as u32);
        let basis = points
            .iter()
            .map(|x| {
                (0..count)
                    .map(|i| basis_eval(&MultiIndex::unravel(i, dim, modes), x))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self { points, basis })
    }

    /// `count` probes spread along the diagonal of the domain, away from
    /// the boundary.
    pub fn diagonal(count: usize, dim: usize, modes: usize) -> Result<Self> {
        let pi = std::f64::consts::PI;
        let points = (0..count)
            .map(|i| {
                let s = pi * (0.1 + 0.8 * (i as f64 + 0.5) / count as f64);
                (0..dim).map(|a| if a == 0 { s } else { pi - s }).collect()
            })
            .collect();
        Self::new(points, dim, modes)
    }

    pub fn eval(&self, u: &SpectralField) -> Vec<f64> {
        self.basis
            .iter()
            .map(|b| b.iter().zip(u.coeffs()).map(|(a, c)| a * c).sum())
            .collect()
    }
}

/// Parameters of an inline space/time Hölder study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderStudyConfig {
    pub space_lags: Vec<usize>,
    pub time_lags: Vec<usize>,
    pub probes: usize,
    /// Time series start here; earlier steps are a burn-in.
    pub time_window_start: f64,
    /// Difference order for space; `None` picks second order in d = 1 and
    /// first order otherwise.
    pub space_order: Option<DifferenceOrder>,
}

impl HolderStudyConfig {
    pub fn standard(cfg: &SimConfig) -> Self {
        let max_lag = (cfg.modes / 16).max(8).min(cfg.modes.saturating_sub(1) / 2);
        let space_lags = std::iter::successors(Some(1usize), |l| Some(l * 2))
            .take_while(|&l| l <= max_lag)
            .collect();
        Self {
            space_lags,
            time_lags: vec![1, 2, 4, 8, 16],
            probes: 16,
            time_window_start: cfg.t_end / 2.0,
            space_order: None,
        }
    }

    pub fn order_for(&self, dim: usize) -> DifferenceOrder {
        self.space_order.unwrap_or(if dim == 1 {
            DifferenceOrder::Second
        } else {
            DifferenceOrder::First
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderStudy {
    pub space: StructureFunction,
    pub time: StructureFunction,
    pub blown_up: usize,
}

/// Exponent suprema `2 - d/2` (space) and `1/2 - d/8` (time) for `u₀ = 0`.
pub fn theory_exponents(dim: usize) -> (f64, f64) {
    let d = dim as f64;
    (2.0 - d / 2.0, 0.5 - d / 8.0)
}

/// Acceptance windows around the suprema: `[s - 0.2, s + 0.1]` in space
/// and `[μ - 0.075, μ + 0.075]` in time.
pub fn exponent_windows(dim: usize) -> ((f64, f64), (f64, f64)) {
    let (s, m) = theory_exponents(dim);
    ((s - 0.2, s + 0.1), (m - 0.075, m + 0.075))
}

/// Simulates `cfg.paths` paths and estimates both exponents.
pub fn run_holder_study(cfg: &SimConfig, study: &HolderStudyConfig) -> Result<HolderStudy> {
    let probes = ProbeSet::diagonal(study.probes, cfg.dim, cfg.modes)?;
    let start_step = (study.time_window_start / cfg.dt).round() as usize;
    let results = par_paths(0..cfg.paths as u64, |path| {
        let mut series: Vec<Vec<f64>> = vec![Vec::new(); probes.points.len()];
        let traj = run_path_observed(cfg, path, |view| {
            if view.step >= start_step {
                for (s, v) in series.iter_mut().zip(probes.eval(view.state)) {
                    s.push(v);
                }
            }
        })?;
        Ok((traj, series))
    })?;
    let mut fields = Vec::new();
    let mut series = Vec::new();
    let mut blown_up = 0;
    for (traj, s) in results {
        if traj.blow_up.is_some() {
            blown_up += 1;
            continue;
        }
        fields.push(traj.final_state().expect("complete path").clone());
        series.push(s);
    }
    if fields.is_empty() {
        return Err(Error::Domain("every path blew up".into()));
    }
    let space = holder_space(&fields, study.order_for(cfg.dim), &study.space_lags, cfg.seed)?;
    let time = holder_time(&series, cfg.dt, &study.time_lags, cfg.seed ^ 1)?;
    Ok(HolderStudy {
        space,
        time,
        blown_up,
    })
}

/// Empirical against closed-form per-mode variance of the linear
/// stochastic convolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecayReport {
    pub modes: Vec<MultiIndex>,
    pub empirical: Vec<f64>,
    pub theory: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Slope of `ln Var` against `ln λ`.
    pub slope: f64,
    /// `R²` of the linear fit of `Var u_0(t)` against `t`.
    pub mode0_r_squared: f64,
    pub paths: usize,
}

/// `(1 - e^{-2ωt}) / (2ω)`, `t` when `ω = 0`.
pub fn ou_variance(omega: f64, t: f64) -> f64 {
    if omega == 0.0 {
        t
    } else {
        -(-2.0 * omega * t).exp_m1() / (2.0 * omega)
    }
}

fn sample_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Per-mode variances at the final snapshot for modes `k` with
/// `1 ≤ max_i k_i ≤ max_mode`, and the growth of the mode-0 variance over
/// all snapshots (every path must share the snapshot times).
pub fn spectral_decay(trajs: &[Trajectory], op: &OperatorSpec, max_mode: usize) -> Result<SpectralDecayReport> {
    if trajs.len() < 2 {
        return Err(Error::Domain("need at least two paths".into()));
    }
    let last = trajs[0]
        .final_state()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    let t = trajs[0].snapshots.last().expect("non-empty").t;
    let (dim, n) = (last.dim(), last.modes());
    let mut modes = Vec::new();
    let mut empirical = Vec::new();
    let mut theory = Vec::new();
    for i in 0..last.len() {
        let k = MultiIndex::unravel(i, dim, n);
        let top = *k.components().iter().max().expect("dim >= 1");
        if top == 0 || top > max_mode {
            continue;
        }
        let var = sample_variance(trajs.iter().map(move |tr| tr.final_state().expect("state").coeffs()[i]));
        modes.push(k);
        empirical.push(var);
        theory.push(ou_variance(op.omega(k.lambda()), t));
    }
    let ratios: Vec<f64> = empirical.iter().zip(&theory).map(|(e, t)| e / t).collect();
    let lambdas: Vec<f64> = modes.iter().map(|k| k.lambda()).collect();
    let slope = loglog_fit(&lambdas, &empirical).map_or(f64::NAN, |f| f.slope);

    let snaps = trajs[0].snapshots.len();
    let times: Vec<f64> = trajs[0].snapshots.iter().map(|s| s.t).collect();
    let mode0: Vec<f64> = (0..snaps)
        .map(|j| sample_variance(trajs.iter().map(move |tr| tr.snapshots[j].field.coeffs()[0])))
        .collect();
    let mode0_r_squared = if snaps >= 3 {
        linear_fit(&times, &mode0).map_or(f64::NAN, |f| f.r_squared)
    } else {
        f64::NAN
    };
    Ok(SpectralDecayReport {
        modes,
        empirical,
        theory,
        ratios,
        slope,
        mode0_r_squared,
        paths: trajs.len(),
    })
}

/// `E sup_t ‖L(u_n)(t)‖_∞^{2p}` per cut-off level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub levels: Vec<f64>,
    pub moments: Vec<f64>,
    pub p: f64,
    pub alpha: f64,
    /// Slope of `ln E(...)` against `ln n`; 0 when every moment vanishes.
    pub slope: f64,
    /// `2αp + 0.5`.
    pub bound: f64,
    pub paths: usize,
    pub flagged: bool,
    pub passed: bool,
}

/// Runs the cut-off dynamics for every level on the same noise and
/// accumulates the sup-norm of the stochastic convolution
/// `ℓ⁺ = e^{-ωΔt} ℓ + χ w [σ(u) ξ]` on the `N^d` grid.
pub fn supnorm_moments(cfg: &SimConfig, levels: &[f64], p: f64) -> Result<MomentReport> {
    if levels.len() < 2 {
        return Err(Error::Domain("need at least two cut-off levels".into()));
    }
    let mut moments = Vec::with_capacity(levels.len());
    for &n in levels {
        let level_cfg = SimConfig {
            cutoff_level: Some(n),
            ..cfg.clone()
        };
        let stepper = Stepper::new(&level_cfg)?;
        let transform = stepper.base_transform();
        let sups = par_paths(0..cfg.paths as u64, |path| {
            let mut ell = SpectralField::zeros(cfg.dim, cfg.modes);
            let mut sup: f64 = 0.0;
            let mut failure = None;
            run_path_observed(&level_cfg, path, |view| {
                let Some(info) = view.info else { return };
                for (c, d) in ell.coeffs_mut().iter_mut().zip(stepper.decay()) {
                    *c *= d;
                }
                if let Some(g) = &info.noise_term {
                    for (c, v) in ell.coeffs_mut().iter_mut().zip(g.coeffs()) {
                        *c += v;
                    }
                }
                match transform.to_nodal(&ell) {
                    Ok(nodal) => sup = sup.max(nodal.sup_norm()),
                    Err(e) => failure = Some(e),
                }
            })?;
            match failure {
                Some(e) => Err(e),
                None => Ok(sup),
            }
        })?;
        let m = sups.iter().map(|s| s.powf(2.0 * p)).sum::<f64>() / sups.len() as f64;
        moments.push(m);
    }
    let slope = if moments.iter().all(|&m| m == 0.0) {
        0.0
    } else {
        loglog_fit(levels, &moments).map_or(f64::NAN, |f| f.slope)
    };
    let alpha = cfg.sigma.effective_alpha();
    let bound = 2.0 * alpha * p + 0.5;
    Ok(MomentReport {
        levels: levels.to_vec(),
        moments,
        p,
        alpha,
        slope,
        bound,
        paths: cfg.paths,
        flagged: cfg.paths < MIN_PATHS,
        passed: slope <= bound,
    })
}
