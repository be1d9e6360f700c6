//! Green's function of `∂_t - (-ϱΔ² + q̃Δ)` with Neumann conditions on
//! `[0, π]^d`, evaluated as the truncated eigen-sum
//! `G(x, y, t) = Σ_k e^{-ω_k t} ε_k(x) ε_k(y)`, plus the numerical checks of
//! its pointwise bounds, increment integrals and composition identities.

mod bounds;
mod suite;

pub use bounds::{
    exp_integral, exp_integral_scaling, verify_increment_integrals, verify_pointwise_bounds,
    BoundCheckConfig, IncrementCheckConfig, IncrementReport, KernelBoundFit, ScalingReport,
};
pub use suite::{run_green_suite, GreenSuiteConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    basis_1d_derivative, check_point, nodes_1d, semigroup_apply, CosineTransform,
    MultiIndex, OperatorSpec, SpectralField, MAX_DIM,
};

/// Tail budget: `ϱ K⁴ t` must exceed this for the truncated sum.
pub const TAIL_EXPONENT: f64 = 30.0;

/// Smallest `K` with `ϱ K⁴ t > 30`, so the neglected tail is below `e^{-30}`.
pub fn truncation_for(t: f64, rho: f64) -> usize {
    assert!(t > 0.0 && rho > 0.0);
    let k = (TAIL_EXPONENT / (rho * t)).powf(0.25).floor() as usize + 1;
    k.max(2)
}

/// Which kernel is summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelDerivative {
    Value,
    /// Spatial derivative `∂_x^k` in the first argument, `|k| ∈ {1, 2}`.
    Space(MultiIndex),
    Time,
    /// `Δ_x G`.
    Laplacian,
}

impl KernelDerivative {
    /// Time exponent of the pointwise bound: `-(d + |k|)/4`, `-(d + 4)/4`
    /// for `∂_t`.
    pub fn bound_exponent(&self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            KernelDerivative::Value => -d / 4.0,
            KernelDerivative::Space(k) => -(d + k.order() as f64) / 4.0,
            KernelDerivative::Time => -(d + 4.0) / 4.0,
            KernelDerivative::Laplacian => -(d + 2.0) / 4.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            KernelDerivative::Value => "value".into(),
            KernelDerivative::Space(k) => format!("dx{k}"),
            KernelDerivative::Time => "dt".into(),
            KernelDerivative::Laplacian => "laplacian".into(),
        }
    }
}

/// `Σ_{k ∈ [0,K)^d} w(λ_k) Π_i table_i[k_i]` with `λ_k` passed as an integer.
pub(crate) fn lattice_sum(tables: &[Vec<f64>], weight: impl Fn(usize) -> f64) -> f64 {
    match tables.len() {
        1 => tables[0]
            .iter()
            .enumerate()
            .map(|(j, a)| weight(j * j) * a)
            .sum(),
        2 => {
            let (a, b) = (&tables[0], &tables[1]);
            let mut total = 0.0;
            for (i, ai) in a.iter().enumerate() {
                if *ai == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for (j, bj) in b.iter().enumerate() {
                    row += weight(i * i + j * j) * bj;
                }
                total += ai * row;
            }
            total
        }
        3 => {
            let (a, b, c) = (&tables[0], &tables[1], &tables[2]);
            let mut total = 0.0;
            for (i, ai) in a.iter().enumerate() {
                if *ai == 0.0 {
                    continue;
                }
                for (j, bj) in b.iter().enumerate() {
                    if *bj == 0.0 {
                        continue;
                    }
                    let base = i * i + j * j;
                    let mut row = 0.0;
                    for (l, cl) in c.iter().enumerate() {
                        row += weight(base + l * l) * cl;
                    }
                    total += ai * bj * row;
                }
            }
            total
        }
        d => panic!("unsupported dimension {d}"),
    }
}

/// Kernel sum with time-dependent weights tabulated once per `t`, for
/// sweeps over many `(x, y)` pairs.
#[derive(Debug, Clone)]
pub struct KernelSum {
    dim: usize,
    truncation: usize,
    orders: [usize; MAX_DIM],
    weights: Vec<f64>,
}

impl KernelSum {
    pub fn new(
        dim: usize,
        op: &OperatorSpec,
        t: f64,
        truncation: usize,
        derivative: KernelDerivative,
    ) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!(
                "Green's function needs t > 0 (singular at t = 0), got {t}"
            )));
        }
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if op.rho * (truncation as f64).powi(4) * t < 1e12f64.ln() {
            log::warn!(
                "truncation K = {truncation} leaves a spectral tail above 1e-12 at t = {t}"
            );
        }
        let mut orders = [0; MAX_DIM];
        if let KernelDerivative::Space(k) = derivative {
            if k.dim() != dim || k.components().iter().any(|&o| o > 2) {
                return Err(Error::Domain(format!(
                    "derivative multi-index {k} unsupported in dimension {dim}"
                )));
            }
            orders[..dim].copy_from_slice(k.components());
        }
        let max_lambda = dim * (truncation - 1) * (truncation - 1);
        let weights = (0..=max_lambda)
            .map(|l| {
                let lam = l as f64;
                let omega = op.omega(lam);
                let m = (-omega * t).exp();
                match derivative {
                    KernelDerivative::Time => -omega * m,
                    KernelDerivative::Laplacian => -lam * m,
                    _ => m,
                }
            })
            .collect();
        Ok(Self {
            dim,
            truncation,
            orders,
            weights,
        })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert!(x.len() == self.dim && y.len() == self.dim);
        self.eval_tables(&self.point_tables(x, true), &self.point_tables(y, false))
    }

    /// Per-axis basis values at `x`, differentiated by the kernel's orders
    /// when `differentiate` is set.
    pub(crate) fn point_tables(&self, x: &[f64], differentiate: bool) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|axis| {
                let m = if differentiate { self.orders[axis] } else { 0 };
                (0..self.truncation)
                    .map(|j| basis_1d_derivative(j, x[axis], m))
                    .collect()
            })
            .collect()
    }

    pub(crate) fn eval_tables(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let tables: Vec<Vec<f64>> = a
            .iter()
            .zip(b)
            .map(|(u, v)| u.iter().zip(v).map(|(p, q)| p * q).collect())
            .collect();
        lattice_sum(&tables, |l| self.weights[l])
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || !(1..=MAX_DIM).contains(&x.len()) {
        return Err(Error::ShapeMismatch {
            expected: "two points of equal dimension 1..=3".into(),
            found: format!("{} and {}", x.len(), y.len()),
        });
    }
    check_point(x)?;
    check_point(y)
}

/// Truncated eigen-sum `Σ_{k_i < K} e^{-ω_k t} ε_k(x) ε_k(y)`.
pub fn green_eval(x: &[f64], y: &[f64], t: f64, truncation: usize, op: &OperatorSpec) -> Result<f64> {
    green_eval_derivative(x, y, t, truncation, op, KernelDerivative::Value)
}

pub fn green_eval_derivative(
    x: &[f64],
    y: &[f64],
    t: f64,
    truncation: usize,
    op: &OperatorSpec,
    derivative: KernelDerivative,
) -> Result<f64> {
    check_pair(x, y)?;
    Ok(KernelSum::new(x.len(), op, t, truncation, derivative)?.eval(x, y))
}

/// Midpoint-rule tensor grid of `points^dim` nodes.
pub(crate) fn tensor_nodes(dim: usize, points: usize) -> Vec<Vec<f64>> {
    tensor_points(&nodes_1d(points), dim)
}

/// Tensor product of a per-axis coordinate list.
pub fn tensor_points(axis: &[f64], dim: usize) -> Vec<Vec<f64>> {
    (0..axis.len().pow(dim as u32))
        .map(|i| {
            MultiIndex::unravel(i, dim, axis.len())
                .components()
                .iter()
                .map(|&j| axis[j])
                .collect()
        })
        .collect()
}

/// Quadrature of `∫_D G(x,z,t-s) {G or ΔG}(z,y,s) dz` against the direct
/// kernel at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComposeResult {
    pub value: f64,
    pub direct: f64,
    pub abs_error: f64,
    pub points: usize,
    pub converged: bool,
}

/// Checks the composition identities by tensor midpoint quadrature in `z`,
/// doubling the grid from `start_points` until the relative change drops
/// below `1e-8`.
pub fn compose(
    x: &[f64],
    y: &[f64],
    t: f64,
    s: f64,
    with_laplacian: bool,
    op: &OperatorSpec,
    start_points: usize,
) -> Result<ComposeResult> {
    check_pair(x, y)?;
    if !(s > 0.0 && s < t) {
        return Err(Error::Domain(format!("split point s = {s} must lie in (0, {t})")));
    }
    let dim = x.len();
    let k = truncation_for(t - s, op.rho)
        .max(truncation_for(s, op.rho))
        .max(truncation_for(t, op.rho));
    let inner = if with_laplacian {
        KernelDerivative::Laplacian
    } else {
        KernelDerivative::Value
    };
    let left = KernelSum::new(dim, op, t - s, k, KernelDerivative::Value)?;
    let right = KernelSum::new(dim, op, s, k, inner)?;
    let direct = KernelSum::new(dim, op, t, k, inner)?.eval(x, y);

    let quad = |points: usize| -> f64 {
        let h = std::f64::consts::PI / points as f64;
        let w = h.powi(dim as i32);
        w * tensor_nodes(dim, points)
            .iter()
            .map(|z| left.eval(x, z) * right.eval(z, y))
            .sum::<f64>()
    };

    let mut points = start_points.max(2);
    let mut value = quad(points);
    let mut converged = false;
    for _ in 0..6 {
        let next = quad(2 * points);
        points *= 2;
        let change = (next - value).abs() / next.abs().max(1e-300);
        value = next;
        if change < 1e-8 {
            converged = true;
            break;
        }
    }
    Ok(ComposeResult {
        value,
        direct,
        abs_error: (value - direct).abs(),
        points,
        converged,
    })
}

/// `G_t u₀` through the spectral semigroup; `G_0 = Id`.
pub fn convolve_initial(u0: &SpectralField, t: f64, op: &OperatorSpec) -> Result<SpectralField> {
    semigroup_apply(u0, t, op)
}

/// `sup_t ‖G_t u₀‖_q / ‖u₀‖_q` over `times`, with norms by midpoint
/// quadrature on a `points^d` grid.
pub fn initial_value_bound(
    u0: &SpectralField,
    times: &[f64],
    q: f64,
    op: &OperatorSpec,
    points: usize,
) -> Result<f64> {
    let transform = CosineTransform::new(u0.dim(), u0.modes(), points)?;
    let base = transform.to_nodal(u0)?.lq_norm(q);
    if base == 0.0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for &t in times {
        let v = transform.to_nodal(&convolve_initial(u0, t, op)?)?;
        worst = worst.max(v.lq_norm(q) / base);
    }
    Ok(worst)
}
