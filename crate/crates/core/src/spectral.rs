//! Neumann cosine eigenbasis on `[0, π]^d` and the transforms between nodal
//! values and spectral coefficients.
//!
//! The basis is `ε_0 = 1/√π`, `ε_j(x) = √(2/π) cos(j x)` per axis, tensorised
//! over `d ∈ {1, 2, 3}` axes. It is orthonormal in `L²([0, π]^d)` and
//! diagonalises the Neumann Laplacian with eigenvalue `-λ_k`, `λ_k = ‖k‖²`.
//!
//! Nodal fields live on the midpoint grid `x_j = π (j + ½) / M`. On that grid
//! the expansion is a DCT-II (forward) / DCT-III (inverse) pair, and the
//! discrete inner product `h^d Σ_j` with `h = π / M` is exactly orthonormal
//! for modes below `M`, so Parseval holds to round-off.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {dim}")))
    }
}

/// Multi-index `k = (k_1, ..., k_d)` of the cosine eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    k: [usize; MAX_DIM],
    dim: usize,
}

impl MultiIndex {
    pub fn new(components: &[usize]) -> Result<Self> {
        check_dim(components.len())?;
        let mut k = [0; MAX_DIM];
        k[..components.len()].copy_from_slice(components);
        Ok(Self {
            k,
            dim: components.len(),
        })
    }

    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        Self { k: [0; MAX_DIM], dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[usize] {
        &self.k[..self.dim]
    }

    /// `λ_k = Σ k_i²`.
    pub fn lambda(&self) -> f64 {
        self.components().iter().map(|&k| (k * k) as f64).sum()
    }

    /// `|k| = Σ k_i`, the order of a derivative multi-index.
    pub fn order(&self) -> usize {
        self.components().iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|&k| k == 0)
    }

    /// Row-major flat offset inside an `n^d` lattice.
    pub fn ravel(&self, n: usize) -> Option<usize> {
        let mut flat = 0;
        for &k in self.components() {
            if k >= n {
                return None;
            }
            flat = flat * n + k;
        }
        Some(flat)
    }

    pub fn unravel(mut flat: usize, dim: usize, n: usize) -> Self {
        let mut k = [0; MAX_DIM];
        for axis in (0..dim).rev() {
            k[axis] = flat % n;
            flat /= n;
        }
        Self { k, dim }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.components())
    }
}

/// Eigenvalue `λ_k = ‖k‖²` of `-Δ` for the mode `k`.
pub fn lambda(k: &MultiIndex) -> f64 {
    k.lambda()
}

/// One-dimensional basis function `ε_j(x)`.
#[inline]
pub fn basis_1d(j: usize, x: f64) -> f64 {
    if j == 0 {
        1.0 / PI.sqrt()
    } else {
        (2.0 / PI).sqrt() * (j as f64 * x).cos()
    }
}

/// `m`-th derivative of `ε_j` for `m ∈ {0, 1, 2}`.
#[inline]
pub fn basis_1d_derivative(j: usize, x: f64, m: usize) -> f64 {
    let jf = j as f64;
    match m {
        0 => basis_1d(j, x),
        1 => {
            if j == 0 {
                0.0
            } else {
                -(2.0 / PI).sqrt() * jf * (jf * x).sin()
            }
        }
        2 => -jf * jf * basis_1d(j, x),
        _ => panic!("derivative order {m} is not supported"),
    }
}

/// Evaluates `ε_k(x) = Π_i ε_{k_i}(x_i)`.
pub fn basis_eval(k: &MultiIndex, x: &[f64]) -> Result<f64> {
    if x.len() != k.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("point of dimension {}", k.dim()),
            found: format!("dimension {}", x.len()),
        });
    }
    check_point(x)?;
    Ok(k
        .components()
        .iter()
        .zip(x)
        .map(|(&j, &xi)| basis_1d(j, xi))
        .product())
}

pub(crate) fn check_point(x: &[f64]) -> Result<()> {
    if x.iter().all(|&xi| (0.0..=PI).contains(&xi)) {
        Ok(())
    } else {
        Err(Error::Domain(format!("point {x:?} lies outside [0, pi]^d")))
    }
}

/// Midpoint cosine nodes `π (j + ½) / points`.
pub fn nodes_1d(points: usize) -> Vec<f64> {
    (0..points)
        .map(|j| PI * (j as f64 + 0.5) / points as f64)
        .collect()
}

/// Truncated spectral coefficients `(u, ε_k)` over the lattice `[0, N)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    dim: usize,
    modes: usize,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(dim: usize, modes: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim) && modes > 0);
        Self {
            dim,
            modes,
            coeffs: vec![0.0; modes.pow(dim as u32)],
        }
    }

    pub fn from_coeffs(dim: usize, modes: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let expected = modes.pow(dim as u32);
        if modes == 0 || coeffs.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: format!("{expected} coefficients ({modes}^{dim})"),
                found: format!("{}", coeffs.len()),
            });
        }
        Ok(Self { dim, modes, coeffs })
    }

    /// The basis function `ε_k` itself.
    pub fn unit(dim: usize, modes: usize, k: &MultiIndex) -> Result<Self> {
        let mut u = Self::zeros(dim, modes);
        u.set(k, 1.0)?;
        Ok(u)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn get(&self, k: &MultiIndex) -> Option<f64> {
        k.ravel(self.modes).map(|i| self.coeffs[i])
    }

    pub fn set(&mut self, k: &MultiIndex, value: f64) -> Result<()> {
        let i = k.ravel(self.modes).ok_or_else(|| {
            Error::Domain(format!("mode {k} outside truncation N = {}", self.modes))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Multi-index of the flat coefficient `i`.
    pub fn index(&self, i: usize) -> MultiIndex {
        MultiIndex::unravel(i, self.dim, self.modes)
    }

    /// `λ_k` for every coefficient in storage order.
    pub fn lambdas(&self) -> Vec<f64> {
        lattice_lambdas(self.dim, self.modes)
    }

    /// The `k = 0` coefficient; `√π^d` times the spatial mean.
    pub fn mass(&self) -> f64 {
        self.coeffs[0]
    }

    /// `‖u‖₂`, which by Parseval is the Euclidean norm of the coefficients.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn distance_l2(&self, other: &Self) -> f64 {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Pointwise value `Σ_k u_k ε_k(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::ShapeMismatch {
                expected: format!("point of dimension {}", self.dim),
                found: format!("dimension {}", x.len()),
            });
        }
        check_point(x)?;
        let tables: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| (0..self.modes).map(|j| basis_1d(j, xi)).collect())
            .collect();
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.index(i);
                c * k
                    .components()
                    .iter()
                    .zip(&tables)
                    .map(|(&j, t)| t[j])
                    .product::<f64>()
            })
            .sum())
    }
}

pub(crate) fn lattice_lambdas(dim: usize, modes: usize) -> Vec<f64> {
    (0..modes.pow(dim as u32))
        .map(|i| MultiIndex::unravel(i, dim, modes).lambda())
        .collect()
}

/// Values on the tensor midpoint grid with `points` nodes per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalField {
    dim: usize,
    points: usize,
    values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(dim: usize, points: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim) && points > 0);
        Self {
            dim,
            points,
            values: vec![0.0; points.pow(dim as u32)],
        }
    }

    pub fn from_values(dim: usize, points: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let expected = points.pow(dim as u32);
        if points == 0 || values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: format!("{expected} nodal values ({points}^{dim})"),
                found: format!("{}", values.len()),
            });
        }
        Ok(Self {
            dim,
            points,
            values,
        })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(dim: usize, points: usize, f: impl Fn(&[f64]) -> f64) -> Self {
        let nodes = nodes_1d(points);
        let mut x = vec![0.0; dim];
        let values = (0..points.pow(dim as u32))
            .map(|i| {
                let idx = MultiIndex::unravel(i, dim, points);
                for (xa, &j) in x.iter_mut().zip(idx.components()) {
                    *xa = nodes[j];
                }
                f(&x)
            })
            .collect();
        Self {
            dim,
            points,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Grid spacing `h = π / points`.
    pub fn spacing(&self) -> f64 {
        PI / self.points as f64
    }

    /// Quadrature weight `h^d` of one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinates of the flat node `i`.
    pub fn node(&self, i: usize) -> Vec<f64> {
        let h = self.spacing();
        MultiIndex::unravel(i, self.dim, self.points)
            .components()
            .iter()
            .map(|&j| h * (j as f64 + 0.5))
            .collect()
    }

    /// Midpoint-rule `L^q` norm, `(h^d Σ |u_j|^q)^{1/q}`.
    pub fn lq_norm(&self, q: f64) -> f64 {
        lq_norm(&self.values, self.cell_volume(), q)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Midpoint-rule integral over the domain.
    pub fn integral(&self) -> f64 {
        self.cell_volume() * self.values.iter().sum::<f64>()
    }
}

pub(crate) fn lq_norm(values: &[f64], weight: f64, q: f64) -> f64 {
    let s: f64 = if q == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else if q == 4.0 {
        values.iter().map(|v| (v * v) * (v * v)).sum()
    } else {
        values.iter().map(|v| v.abs().powf(q)).sum()
    };
    (weight * s).powf(1.0 / q)
}

/// Linear operator `-ϱΔ² + q̃Δ` with Neumann conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub rho: f64,
    pub qtilde: f64,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self {
            rho: 1.0,
            qtilde: 1.0,
        }
    }
}

impl OperatorSpec {
    pub fn new(rho: f64, qtilde: f64) -> Result<Self> {
        let op = Self { rho, qtilde };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(crate::ConfigError::invalid("operator.rho", "must be > 0").into());
        }
        if !(self.qtilde >= 0.0 && self.qtilde.is_finite()) {
            return Err(crate::ConfigError::invalid("operator.qtilde", "must be >= 0").into());
        }
        Ok(())
    }

    /// Decay rate `ω_k = ϱλ_k² + q̃λ_k` (the operator has eigenvalue `-ω_k`).
    #[inline]
    pub fn omega(&self, lambda: f64) -> f64 {
        self.rho * lambda * lambda + self.qtilde * lambda
    }

    /// Semigroup multiplier `e^{-ω_k t}`.
    #[inline]
    pub fn multiplier(&self, lambda: f64, t: f64) -> f64 {
        (-self.omega(lambda) * t).exp()
    }
}

/// Applies `S(t) = e^{(-ϱΔ² + q̃Δ) t}` coefficient-wise.
pub fn semigroup_apply(u: &SpectralField, t: f64, op: &OperatorSpec) -> Result<SpectralField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("semigroup time must be >= 0, got {t}")));
    }
    let mut out = u.clone();
    for (c, lam) in out.coeffs.iter_mut().zip(u.lambdas()) {
        *c *= op.multiplier(lam, t);
    }
    Ok(out)
}

/// Fast nodal ↔ spectral transform between `modes^d` coefficients and a
/// `points^d` midpoint grid (`points ≥ modes`; extra nodes act as zero
/// padding for dealiased products).
///
/// Plans are immutable and shareable across threads; scratch space is
/// allocated per call.
#[derive(Clone)]
pub struct CosineTransform {
    dim: usize,
    modes: usize,
    points: usize,
    dct2: Arc<dyn TransformType2And3<f64>>,
    dct3: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for CosineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CosineTransform")
            .field("dim", &self.dim)
            .field("modes", &self.modes)
            .field("points", &self.points)
            .finish()
    }
}

impl CosineTransform {
    pub fn new(dim: usize, modes: usize, points: usize) -> Result<Self> {
        check_dim(dim)?;
        if modes == 0 || points < modes {
            return Err(Error::Domain(format!(
                "transform needs 0 < modes <= points, got modes = {modes}, points = {points}"
            )));
        }
        let mut planner = DctPlanner::new();
        Ok(Self {
            dim,
            modes,
            points,
            dct2: planner.plan_dct2(points),
            dct3: planner.plan_dct3(points),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Projects nodal values onto `ε_k`, `k ∈ [0, modes)^d`.
    pub fn to_spectral(&self, f: &NodalField) -> Result<SpectralField> {
        if f.dim != self.dim || f.points != self.points {
            return Err(Error::ShapeMismatch {
                expected: format!("{}^{} nodal grid", self.points, self.dim),
                found: format!("{}^{}", f.points, f.dim),
            });
        }
        let m = self.points as f64;
        let c0 = PI.sqrt() / m;
        let ck = (2.0 * PI).sqrt() / m;
        let mut scratch = vec![0.0; self.dct2.get_scratch_len()];
        let mut data = f.values.clone();
        let mut shape = [self.points; MAX_DIM];
        for axis in 0..self.dim {
            data = map_axis(
                &data,
                &shape[..self.dim],
                axis,
                self.modes,
                |lane, out| {
                    self.dct2.process_dct2_with_scratch(lane, &mut scratch);
                    out[0] = c0 * lane[0];
                    for (o, l) in out[1..].iter_mut().zip(&lane[1..]) {
                        *o = ck * l;
                    }
                },
            );
            shape[axis] = self.modes;
        }
        SpectralField::from_coeffs(self.dim, self.modes, data)
    }

    /// Evaluates `Σ_k u_k ε_k` on the grid.
    pub fn to_nodal(&self, u: &SpectralField) -> Result<NodalField> {
        if u.dim != self.dim || u.modes != self.modes {
            return Err(Error::ShapeMismatch {
                expected: format!("{}^{} coefficients", self.modes, self.dim),
                found: format!("{}^{}", u.modes, u.dim),
            });
        }
        let a0 = 2.0 / PI.sqrt();
        let ak = (2.0 / PI).sqrt();
        let mut scratch = vec![0.0; self.dct3.get_scratch_len()];
        let mut data = u.coeffs.clone();
        let mut shape = [self.modes; MAX_DIM];
        let modes = self.modes;
        for axis in 0..self.dim {
            data = map_axis(
                &data,
                &shape[..self.dim],
                axis,
                self.points,
                |lane, out| {
                    out[0] = a0 * lane[0];
                    for (o, l) in out[1..modes].iter_mut().zip(&lane[1..]) {
                        *o = ak * l;
                    }
                    out[modes..].fill(0.0);
                    self.dct3.process_dct3_with_scratch(out, &mut scratch);
                },
            );
            shape[axis] = self.points;
        }
        NodalField::from_values(self.dim, self.points, data)
    }
}

/// Applies `op` to every lane along `axis` of a row-major array, resizing
/// that axis to `out_len`. `op` receives a mutable copy of the input lane.
fn map_axis(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    out_len: usize,
    mut op: impl FnMut(&mut [f64], &mut [f64]),
) -> Vec<f64> {
    let len = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * out_len * inner];
    let mut lane = vec![0.0; len];
    let mut lane_out = vec![0.0; out_len];
    for o in 0..outer {
        let src = o * len * inner;
        let dst = o * out_len * inner;
        if inner == 1 {
            lane.copy_from_slice(&data[src..src + len]);
            op(&mut lane, &mut out[dst..dst + out_len]);
            continue;
        }
        for i in 0..inner {
            for (j, l) in lane.iter_mut().enumerate() {
                *l = data[src + j * inner + i];
            }
            op(&mut lane, &mut lane_out);
            for (j, v) in lane_out.iter().enumerate() {
                out[dst + j * inner + i] = *v;
            }
        }
    }
    out
}

/// Forward transform on the `N^d` grid matching `f`.
pub fn to_spectral(f: &NodalField) -> Result<SpectralField> {
    CosineTransform::new(f.dim(), f.points(), f.points())?.to_spectral(f)
}

/// Inverse transform onto the `N^d` grid matching `u`.
pub fn to_nodal(u: &SpectralField) -> Result<NodalField> {
    CosineTransform::new(u.dim(), u.modes(), u.modes())?.to_nodal(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda(&MultiIndex::new(&[0, 0, 0]).unwrap()), 0.0);
        assert_eq!(lambda(&MultiIndex::new(&[2]).unwrap()), 4.0);
        assert_eq!(lambda(&MultiIndex::new(&[1, 2, 2]).unwrap()), 9.0);
    }

    #[test]
    fn basis_values() {
        let k0 = MultiIndex::new(&[0]).unwrap();
        for x in [0.0, 0.3, PI] {
            assert_relative_eq!(basis_eval(&k0, &[x]).unwrap(), 0.564_189_583_547_756_3, epsilon = 1e-15);
        }
        let k1 = MultiIndex::new(&[1]).unwrap();
        assert!(basis_eval(&k1, &[PI / 2.0]).unwrap().abs() < 1e-16);
        assert!(matches!(basis_eval(&k1, &[-0.1]), Err(Error::Domain(_))));
        assert!(matches!(basis_eval(&k1, &[PI + 1e-9]), Err(Error::Domain(_))));
    }

    #[test]
    fn quadrature_orthogonality() {
        let n = 32;
        let h = PI / n as f64;
        let s: f64 = nodes_1d(n).iter().map(|&x| basis_1d(1, x) * basis_1d(2, x)).sum();
        assert!((h * s).abs() < 1e-12);
    }

    #[test]
    fn constant_field_projects_to_mass() {
        let c = 1.7;
        let f = NodalField::from_fn(1, 16, |_| c);
        let u = to_spectral(&f).unwrap();
        assert_relative_eq!(u.coeffs()[0], c * PI.sqrt(), epsilon = 1e-13);
        assert!(u.coeffs()[1..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn basis_samples_give_unit_vector() {
        let f = NodalField::from_fn(1, 24, |x| basis_1d(1, x[0]));
        let u = to_spectral(&f).unwrap();
        for (i, c) in u.coeffs().iter().enumerate() {
            let expected = if i == 1 { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-12, "mode {i}: {c}");
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let t = CosineTransform::new(1, 8, 8).unwrap();
        let f = NodalField::zeros(1, 16);
        assert!(matches!(t.to_spectral(&f), Err(Error::ShapeMismatch { .. })));
        let u = SpectralField::zeros(2, 8);
        assert!(matches!(t.to_nodal(&u), Err(Error::ShapeMismatch { .. })));
        assert!(SpectralField::from_coeffs(1, 4, vec![0.0; 5]).is_err());
    }

    #[test]
    fn padded_inverse_evaluates_the_same_function() {
        let mut u = SpectralField::zeros(2, 6);
        u.set(&MultiIndex::new(&[1, 3]).unwrap(), 0.7).unwrap();
        u.set(&MultiIndex::new(&[5, 0]).unwrap(), -0.2).unwrap();
        let t = CosineTransform::new(2, 6, 9).unwrap();
        let f = t.to_nodal(&u).unwrap();
        for i in [0, 13, 40, 80] {
            let x = f.node(i);
            assert_relative_eq!(f.values()[i], u.eval(&x).unwrap(), epsilon = 1e-13);
        }
        let back = t.to_spectral(&f).unwrap();
        assert!(back.distance_l2(&u) < 1e-13);
    }

    #[test]
    fn semigroup_examples() {
        let op = OperatorSpec::new(1.0, 1.0).unwrap();
        let u = SpectralField::unit(1, 8, &MultiIndex::new(&[1]).unwrap()).unwrap();
        assert_eq!(semigroup_apply(&u, 0.0, &op).unwrap(), u);
        let v = semigroup_apply(&u, 0.1, &op).unwrap();
        assert_relative_eq!(v.coeffs()[1], (-0.2f64).exp(), max_relative = 1e-15);
        assert!(semigroup_apply(&u, -1e-3, &op).is_err());

        let mut w = SpectralField::zeros(1, 8);
        w.coeffs_mut().iter_mut().enumerate().for_each(|(i, c)| *c = 1.0 + i as f64);
        let late = semigroup_apply(&w, 1e3, &OperatorSpec::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(late.coeffs()[0], 1.0);
        assert!(late.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn operator_rejects_bad_parameters() {
        assert!(OperatorSpec::new(0.0, 1.0).is_err());
        assert!(OperatorSpec::new(1.0, -0.5).is_err());
        assert!(OperatorSpec::new(2.0, 0.0).is_ok());
    }
}
