use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, Error, Result};
use crate::noise::{keyed_rng, CutoffSpec, SigmaForm, SigmaSpec, ALPHA_EXISTENCE_MAX};
use crate::spectral::{MultiIndex, OperatorSpec, SpectralField, MAX_DIM};

/// Polynomial nonlinearity `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `f(u) = a0 + a1 u + a2 u² + a3 u³` with `a3 > 0`; the potential is
    /// the antiderivative plus `offset`.
    Cubic {
        coeffs: [f64; 4],
        #[serde(default = "default_offset")]
        offset: f64,
    },
    Zero,
}

fn default_offset() -> f64 {
    0.25
}

impl Default for Nonlinearity {
    /// `f(u) = u³ - u`, `F(u) = (1 - u²)² / 4`.
    fn default() -> Self {
        Nonlinearity::Cubic {
            coeffs: [0.0, -1.0, 0.0, 1.0],
            offset: 0.25,
        }
    }
}

impl Nonlinearity {
    pub fn is_zero(&self) -> bool {
        matches!(self, Nonlinearity::Zero)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Cubic { coeffs: [a0, a1, a2, a3], .. } => a0 + u * (a1 + u * (a2 + u * a3)),
            Nonlinearity::Zero => 0.0,
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Cubic { coeffs: [_, a1, a2, a3], .. } => a1 + u * (2.0 * a2 + 3.0 * a3 * u),
            Nonlinearity::Zero => 0.0,
        }
    }

    /// Potential `F` with `F' = f`.
    #[inline]
    pub fn potential(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Cubic { coeffs: [a0, a1, a2, a3], offset } => {
                offset + u * (a0 + u * (a1 / 2.0 + u * (a2 / 3.0 + u * a3 / 4.0)))
            }
            Nonlinearity::Zero => 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Nonlinearity::Cubic { coeffs, offset } = self {
            if coeffs.iter().chain([offset]).any(|c| !c.is_finite()) {
                return Err(ConfigError::invalid("nonlinearity.coeffs", "must be finite"));
            }
            if !(coeffs[3] > 0.0) {
                return Err(ConfigError::NonCoerciveNonlinearity(coeffs[3]));
            }
        }
        Ok(())
    }
}

/// Zero-padding used for the pseudo-spectral nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    None,
    ThreeHalves,
    /// `2N` nodes per axis: exact for cubic products.
    #[default]
    Double,
}

impl Dealias {
    pub fn points(&self, modes: usize) -> usize {
        match self {
            Dealias::None => modes,
            Dealias::ThreeHalves => (3 * modes).div_ceil(2),
            Dealias::Double => 2 * modes,
        }
    }
}

/// Per-mode weight of the noise increment in one step, with `z = ω_k Δt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseWeighting {
    /// `e^{-z}`.
    LeftPoint,
    /// `φ₁(-z) = (1 - e^{-z}) / z`.
    Phi1,
    /// `sqrt((1 - e^{-2z}) / (2z))`: matches the variance of the exact
    /// stochastic convolution over the step.
    #[default]
    ExactVariance,
}

impl NoiseWeighting {
    pub fn weight(&self, z: f64) -> f64 {
        if z == 0.0 {
            return 1.0;
        }
        match self {
            NoiseWeighting::LeftPoint => (-z).exp(),
            NoiseWeighting::Phi1 => -(-z).exp_m1() / z,
            NoiseWeighting::ExactVariance => (-(-2.0 * z).exp_m1() / (2.0 * z)).sqrt(),
        }
    }
}

/// One prescribed coefficient of an initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeValue {
    pub k: Vec<usize>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    #[default]
    Zero,
    /// `u₀ ≡ value`.
    Constant { value: f64 },
    Modes { modes: Vec<ModeValue> },
    /// Gaussian coefficients with standard deviation
    /// `amplitude · (1 + λ_k)^{-decay/2}`.
    RandomSmooth {
        amplitude: f64,
        decay: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Random field of Hölder regularity just below `delta` (coefficient
    /// decay `(1 + λ_k)^{-(δ + d/2)/2}`).
    Holder {
        delta: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

const INITIAL_DOMAIN: &[u8; 16] = b"schac/initial/v1";

impl InitialCondition {
    pub fn build(&self, dim: usize, modes: usize) -> Result<SpectralField> {
        let mut u = SpectralField::zeros(dim, modes);
        match self {
            InitialCondition::Zero => {}
            InitialCondition::Constant { value } => {
                u.set(&MultiIndex::zero(dim), value * std::f64::consts::PI.powf(dim as f64 / 2.0))?;
            }
            InitialCondition::Modes { modes: entries } => {
                for e in entries {
                    let k = MultiIndex::new(&e.k)?;
                    if k.dim() != dim {
                        return Err(ConfigError::invalid(
                            "initial.modes",
                            format!("mode {k} does not have dimension {dim}"),
                        )
                        .into());
                    }
                    u.set(&k, e.c)?;
                }
            }
            InitialCondition::RandomSmooth { amplitude, decay, seed } => {
                random_fill(&mut u, *amplitude, *decay, *seed);
            }
            InitialCondition::Holder { delta, amplitude, seed } => {
                if !(*delta > 0.0 && *delta <= 1.0) {
                    return Err(ConfigError::invalid("initial.delta", "must lie in (0, 1]").into());
                }
                random_fill(&mut u, *amplitude, delta + dim as f64 / 2.0, *seed);
            }
        }
        Ok(u)
    }
}

fn random_fill(u: &mut SpectralField, amplitude: f64, decay: f64, seed: u64) {
    let mut rng = keyed_rng(seed, 0, INITIAL_DOMAIN, 0);
    let lambdas = u.lambdas();
    for (c, lam) in u.coeffs_mut().iter_mut().zip(lambdas) {
        let z: f64 = rng.sample(StandardNormal);
        *c = amplitude * (1.0 + lam).powf(-decay / 2.0) * z;
    }
}

fn default_dim() -> usize {
    1
}
fn default_modes() -> usize {
    64
}
fn default_dt() -> f64 {
    1e-4
}
fn default_t_end() -> f64 {
    0.01
}
fn default_q() -> f64 {
    4.0
}
fn default_paths() -> usize {
    1
}
fn default_substeps() -> u64 {
    1
}

/// All model and discretization parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Modes per axis `N`.
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Norm index of the cut-off and of the stopping times.
    #[serde(default = "default_q")]
    pub q: f64,
    /// Cut-off level `n`; `None` runs the uncut dynamics.
    #[serde(default)]
    pub cutoff_level: Option<f64>,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub noise_weighting: NoiseWeighting,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub paths: usize,
    /// Steps between stored snapshots; 0 keeps only the first and last.
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Each step's noise is the sum of this many finer increments.
    #[serde(default = "default_substeps")]
    pub noise_substeps: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            operator: OperatorSpec::default(),
            sigma: SigmaSpec::default(),
            nonlinearity: Nonlinearity::default(),
            dim: default_dim(),
            modes: default_modes(),
            dt: default_dt(),
            t_end: default_t_end(),
            q: default_q(),
            cutoff_level: None,
            dealias: Dealias::default(),
            noise_weighting: NoiseWeighting::default(),
            initial: InitialCondition::default(),
            seed: 0,
            paths: default_paths(),
            snapshot_stride: 0,
            noise_substeps: default_substeps(),
        }
    }
}

/// Checks Condition `C̃_α` on `(d, q, α)`.
pub fn condition_holds(dim: usize, q: f64, alpha: f64) -> bool {
    match dim {
        1 | 2 => q >= 4.0,
        3 => q >= 6.0 || (q >= 4.0 && q > (6.0 * (1.0 - alpha)).max(6.0 * alpha) && q < 6.0),
        _ => false,
    }
}

impl SimConfig {
    /// Number of time steps, `t_end / dt` rounded.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn cutoff(&self) -> Option<CutoffSpec> {
        self.cutoff_level.map(|n| CutoffSpec { level: n, q: self.q })
    }

    /// Structural validation; returns the existence-theory warnings that
    /// `allow_override` downgraded from errors.
    pub fn validate(&self, allow_override: bool) -> Result<Vec<ConfigError>, ConfigError> {
        if !(1..=MAX_DIM).contains(&self.dim) {
            return Err(ConfigError::invalid("dim", "must be 1, 2 or 3"));
        }
        if self.modes < 2 || self.modes > 1 << 14 {
            return Err(ConfigError::invalid("modes", "must lie in [2, 16384]"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ConfigError::invalid("dt", "must be > 0"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(ConfigError::invalid("t_end", "must be > 0"));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) || steps.round() < 1.0 {
            return Err(ConfigError::invalid("t_end", "must be a positive multiple of dt"));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(ConfigError::invalid("q", "must be >= 1"));
        }
        if let Some(n) = self.cutoff_level {
            CutoffSpec::new(n, self.q)?;
        }
        if self.paths == 0 {
            return Err(ConfigError::invalid("paths", "must be >= 1"));
        }
        if self.noise_substeps == 0 {
            return Err(ConfigError::invalid("noise_substeps", "must be >= 1"));
        }
        self.operator
            .validate()
            .map_err(|e| match e {
                Error::Config(c) => c,
                other => ConfigError::invalid("operator", other.to_string()),
            })?;
        self.sigma.validate()?;
        self.nonlinearity.validate()?;

        let mut warnings = Vec::new();
        let alpha = self.sigma.effective_alpha();
        let growth_form = matches!(
            self.sigma.form,
            SigmaForm::SmoothSublinear | SigmaForm::Table { .. }
        );
        if growth_form && !(alpha > 0.0 && alpha < ALPHA_EXISTENCE_MAX) {
            warnings.push(ConfigError::AlphaOutsideWindow { alpha });
        }
        if !condition_holds(self.dim, self.q, alpha) {
            warnings.push(ConfigError::ConditionViolated {
                dim: self.dim,
                q: self.q,
                alpha,
            });
        }
        match warnings.first() {
            Some(first) if !allow_override => Err(first.clone()),
            _ => Ok(warnings),
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
