//! Noise diffusion coefficient σ, the cut-off function χ_n, and the
//! discretised space-time white noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};
use crate::spectral::NodalField;

/// Upper end of the sub-linear growth window in which global existence holds.
pub const ALPHA_EXISTENCE_MAX: f64 = 1.0 / 9.0;

/// Shape of the noise diffusion coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SigmaForm {
    /// `σ(u) = C (1 + u²)^{α/2}`: globally Lipschitz with `|σ(u)| ≤ C(1 + |u|^α)`.
    SmoothSublinear,
    /// `σ(u) = C` (additive noise).
    Constant,
    /// `σ ≡ 0` (deterministic dynamics).
    Zero,
    /// Piecewise-linear interpolation of `(u, σ(u))` pairs, held constant
    /// outside the table range.
    Table { points: Vec<[f64; 2]> },
}

/// Noise diffusion coefficient with growth `|σ(u)| ≤ C(1 + |u|^α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSpec {
    pub alpha: f64,
    #[serde(rename = "c")]
    pub c_sigma: f64,
    #[serde(flatten)]
    pub form: SigmaForm,
}

impl Default for SigmaSpec {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            c_sigma: 1.0,
            form: SigmaForm::SmoothSublinear,
        }
    }
}

/// Result of checking σ against its growth bound and Lipschitz continuity
/// on a lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaCheck {
    pub growth_ok: bool,
    pub max_growth_ratio: f64,
    pub lipschitz: f64,
}

impl SigmaSpec {
    pub fn smooth(alpha: f64, c_sigma: f64) -> Self {
        Self {
            alpha,
            c_sigma,
            form: SigmaForm::SmoothSublinear,
        }
    }

    pub fn constant(c_sigma: f64) -> Self {
        Self {
            alpha: 0.0,
            c_sigma,
            form: SigmaForm::Constant,
        }
    }

    pub fn zero() -> Self {
        Self {
            alpha: 0.0,
            c_sigma: 0.0,
            form: SigmaForm::Zero,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.form, SigmaForm::Zero)
    }

    /// Growth exponent that matters for the existence window; bounded forms
    /// have effective exponent 0.
    pub fn effective_alpha(&self) -> f64 {
        match self.form {
            SigmaForm::SmoothSublinear | SigmaForm::Table { .. } => self.alpha,
            SigmaForm::Constant | SigmaForm::Zero => 0.0,
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.form {
            SigmaForm::SmoothSublinear => self.c_sigma * (1.0 + u * u).powf(0.5 * self.alpha),
            SigmaForm::Constant => self.c_sigma,
            SigmaForm::Zero => 0.0,
            SigmaForm::Table { points } => interpolate(points, u),
        }
    }

    /// The admissible envelope `C (1 + |u|^α)`.
    pub fn growth_bound(&self, u: f64) -> f64 {
        self.c_sigma * (1.0 + u.abs().powf(self.alpha))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::invalid("sigma.alpha", "must lie in [0, 1]"));
        }
        match &self.form {
            SigmaForm::Zero => return Ok(()),
            _ if !(self.c_sigma > 0.0 && self.c_sigma.is_finite()) => {
                return Err(ConfigError::invalid("sigma.c", "must be > 0"));
            }
            SigmaForm::Table { points } => {
                if points.len() < 2 {
                    return Err(ConfigError::invalid("sigma.points", "need at least two entries"));
                }
                if points.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return Err(ConfigError::invalid(
                        "sigma.points",
                        "abscissae must be strictly increasing",
                    ));
                }
                let check = self.check_on_lattice(&test_lattice());
                if !check.growth_ok {
                    return Err(ConfigError::invalid(
                        "sigma.points",
                        format!(
                            "table exceeds C(1+|u|^alpha) by a factor {:.3}",
                            check.max_growth_ratio
                        ),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Checks the growth envelope and estimates the Lipschitz constant from
    /// adjacent lattice points (the lattice must be sorted).
    pub fn check_on_lattice(&self, lattice: &[f64]) -> SigmaCheck {
        let mut max_ratio: f64 = 0.0;
        let mut lipschitz: f64 = 0.0;
        for (i, &u) in lattice.iter().enumerate() {
            let s = self.eval(u);
            let bound = self.growth_bound(u);
            let ratio = if bound > 0.0 {
                s.abs() / bound
            } else if s == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            max_ratio = max_ratio.max(ratio);
            if i > 0 {
                let du = u - lattice[i - 1];
                if du > 0.0 {
                    lipschitz = lipschitz.max((s - self.eval(lattice[i - 1])).abs() / du);
                }
            }
        }
        SigmaCheck {
            growth_ok: max_ratio <= 1.0 + 1e-12,
            max_growth_ratio: max_ratio,
            lipschitz,
        }
    }
}

/// Sorted lattice on `[-100, 100]` with step `1e-2`.
pub fn test_lattice() -> Vec<f64> {
    (0..=20_000).map(|i| -100.0 + i as f64 * 1e-2).collect()
}

fn interpolate(points: &[[f64; 2]], u: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if u <= first[0] {
        return first[1];
    }
    if u >= last[0] {
        return last[1];
    }
    let i = points.partition_point(|p| p[0] <= u);
    let [x0, y0] = points[i - 1];
    let [x1, y1] = points[i];
    y0 + (y1 - y0) * (u - x0) / (x1 - x0)
}

/// Cut-off `χ_n`: 1 on `[0, n]`, 0 on `[n+1, ∞)`, joined by the smoothstep
/// `1 - (3s² - 2s³)`, `s = x - n`. `|χ_n'| ≤ 3/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub level: f64,
    pub q: f64,
}

impl CutoffSpec {
    pub fn new(level: f64, q: f64) -> Result<Self, ConfigError> {
        if !(level >= 1.0 && level.is_finite()) {
            return Err(ConfigError::invalid("cutoff_level", "must be >= 1"));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(ConfigError::invalid("q", "must be >= 1"));
        }
        Ok(Self { level, q })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let s = x - self.level;
        if s <= 0.0 {
            1.0
        } else if s >= 1.0 {
            0.0
        } else {
            1.0 - s * s * (3.0 - 2.0 * s)
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let s = x - self.level;
        if s <= 0.0 || s >= 1.0 {
            0.0
        } else {
            -6.0 * s * (1.0 - s)
        }
    }
}

/// One time step of discretised white noise on the nodal grid: iid
/// `N(0, Δt / h^d)` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrement {
    pub nodal: NodalField,
    pub dt: f64,
    pub seed: u64,
    pub path: u64,
    pub step: u64,
}

/// Counter-based noise source: the increment of step `s` on path `p` depends
/// only on `(seed, p, s)`, so paths and steps can be generated in any order
/// and on any thread.
///
/// With `substeps > 1` each increment is the sum of `substeps` finer
/// increments, which reproduces the same Brownian path on a coarser time
/// grid (the basis of dt-refinement studies).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseGenerator {
    pub seed: u64,
    pub path: u64,
    pub substeps: u64,
}

const NOISE_DOMAIN: &[u8; 16] = b"schac/noise/v1\0\0";

/// Seeds a ChaCha stream keyed by `(seed, path, domain)`.
pub(crate) fn keyed_rng(seed: u64, path: u64, domain: &[u8; 16], stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&path.to_le_bytes());
    key[16..].copy_from_slice(domain);
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

impl NoiseGenerator {
    pub fn new(seed: u64, path: u64) -> Self {
        Self {
            seed,
            path,
            substeps: 1,
        }
    }

    pub fn with_substeps(mut self, substeps: u64) -> Self {
        assert!(substeps >= 1);
        self.substeps = substeps;
        self
    }

    /// Increment for step `step` of size `dt` on a `points^dim` grid.
    pub fn increment(&self, step: u64, dt: f64, dim: usize, points: usize) -> NoiseIncrement {
        let mut nodal = NodalField::zeros(dim, points);
        let fine_dt = dt / self.substeps as f64;
        let scale = (fine_dt / nodal.cell_volume()).sqrt();
        let values = nodal.values_mut();
        for sub in 0..self.substeps {
            let mut rng = keyed_rng(
                self.seed,
                self.path,
                NOISE_DOMAIN,
                step * self.substeps + sub,
            );
            for v in values.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += scale * z;
            }
        }
        NoiseIncrement {
            nodal,
            dt,
            seed: self.seed,
            path: self.path,
            step,
        }
    }
}

/// Samples the white-noise increment for `(seed, path, step)`.
pub fn sample_noise(
    seed: u64,
    path: u64,
    step: u64,
    dt: f64,
    dim: usize,
    points: usize,
) -> NoiseIncrement {
    NoiseGenerator::new(seed, path).increment(step, dt, dim, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sigma_examples() {
        for alpha in [0.05, 0.1, 0.5] {
            assert_eq!(SigmaSpec::smooth(alpha, 1.0).eval(0.0), 1.0);
        }
        let s = SigmaSpec::default();
        for v in [0.3, 2.0, 17.0] {
            assert_eq!(s.eval(v), s.eval(-v));
        }
        let s = SigmaSpec::smooth(0.1, 1.0);
        let big = 1e6;
        assert!(s.eval(big) <= 1.0 + 10f64.powf(0.6));
    }

    #[test]
    fn shipped_forms_satisfy_growth_and_lipschitz() {
        let lattice = test_lattice();
        let table = SigmaSpec {
            alpha: 0.1,
            c_sigma: 1.0,
            form: SigmaForm::Table {
                points: vec![[-2.0, 1.0], [0.0, 0.5], [2.0, 1.5]],
            },
        };
        for spec in [
            SigmaSpec::smooth(0.1, 1.0),
            SigmaSpec::smooth(1.0, 2.5),
            SigmaSpec::constant(3.0),
            SigmaSpec::zero(),
            table,
        ] {
            spec.validate().unwrap();
            let check = spec.check_on_lattice(&lattice);
            assert!(check.growth_ok, "{spec:?}: {check:?}");
            assert!(check.lipschitz.is_finite());
        }
        // C α bounds the Lipschitz constant of the smooth form.
        let check = SigmaSpec::smooth(0.1, 2.0).check_on_lattice(&lattice);
        assert!(check.lipschitz <= 0.2 + 1e-9);
    }

    #[test]
    fn table_exceeding_envelope_is_rejected() {
        let spec = SigmaSpec {
            alpha: 0.1,
            c_sigma: 1.0,
            form: SigmaForm::Table {
                points: vec![[0.0, 0.0], [1.0, 5.0]],
            },
        };
        assert!(matches!(spec.validate(), Err(ConfigError::Invalid { field: "sigma.points", .. })));
    }

    #[test]
    fn cutoff_examples() {
        let c = CutoffSpec::new(3.0, 4.0).unwrap();
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(3.0), 1.0);
        assert_eq!(c.eval(4.0), 0.0);
        assert_eq!(c.eval(9.0), 0.0);
        assert_relative_eq!(c.eval(3.5), 0.5, epsilon = 1e-15);
        assert_relative_eq!(c.derivative(3.5), -1.5, epsilon = 1e-15);
    }

    #[test]
    fn cutoff_derivative_matches_finite_differences() {
        let c = CutoffSpec::new(2.0, 4.0).unwrap();
        let h = 1e-6;
        let mut prev = c.eval(0.0);
        // offset grid: central differences straddling the C¹ joints at n and
        // n + 1 carry an O(h) error from the jump in χ''.
        for i in 0..4000 {
            let x = (i as f64 + 0.5) * 1e-3;
            let v = c.eval(x);
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
            let fd = (c.eval(x + h) - c.eval(x - h)) / (2.0 * h);
            assert!((fd - c.derivative(x)).abs() < 1e-8, "x = {x}");
            assert!(c.derivative(x).abs() <= 2.0);
        }
    }

    #[test]
    fn noise_is_deterministic_per_counter() {
        let a = sample_noise(7, 3, 11, 1e-3, 1, 32);
        let b = sample_noise(7, 3, 11, 1e-3, 1, 32);
        assert_eq!(a.nodal.values(), b.nodal.values());
        let c = sample_noise(7, 3, 12, 1e-3, 1, 32);
        assert_ne!(a.nodal.values(), c.nodal.values());
        let d = sample_noise(7, 4, 11, 1e-3, 1, 32);
        assert_ne!(a.nodal.values(), d.nodal.values());
    }

    #[test]
    fn substeps_sum_the_fine_increments() {
        let coarse = NoiseGenerator::new(5, 0).with_substeps(4);
        let fine = NoiseGenerator::new(5, 0);
        let dt = 4e-3;
        let c = coarse.increment(2, dt, 1, 16);
        let mut sum = [0.0; 16];
        for s in 8..12 {
            let f = fine.increment(s, dt / 4.0, 1, 16);
            for (a, b) in sum.iter_mut().zip(f.nodal.values()) {
                *a += b;
            }
        }
        for (a, b) in sum.iter().zip(c.nodal.values()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
    }
}
