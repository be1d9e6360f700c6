use serde::{Deserialize, Serialize};

use super::{
    compose, exp_integral_scaling, initial_value_bound, verify_increment_integrals,
    verify_pointwise_bounds, BoundCheckConfig, IncrementCheckConfig, KernelDerivative,
};
use crate::error::Result;
use crate::report::CheckRecord;
use crate::spectral::{MultiIndex, OperatorSpec, SpectralField};
use crate::stats::linspace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenSuiteConfig {
    pub dim: usize,
    pub op: OperatorSpec,
    pub forced_c2: Option<f64>,
    /// Fewer times, coarser grids and doubled tolerances for quick runs.
    pub reduced: bool,
}

impl Default for GreenSuiteConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            op: OperatorSpec::default(),
            forced_c2: None,
            reduced: false,
        }
    }
}

fn derivatives(dim: usize) -> Vec<KernelDerivative> {
    let mut out = vec![KernelDerivative::Value];
    let mut first = vec![0; dim];
    first[0] = 1;
    out.push(KernelDerivative::Space(MultiIndex::new(&first).expect("valid index")));
    first[0] = 2;
    out.push(KernelDerivative::Space(MultiIndex::new(&first).expect("valid index")));
    out.push(KernelDerivative::Time);
    out
}

/// Runs every kernel check for one dimension.
pub fn run_green_suite(cfg: &GreenSuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::new();
    for derivative in derivatives(cfg.dim) {
        let mut bc = BoundCheckConfig::standard(cfg.dim, cfg.op, derivative);
        bc.forced_c2 = cfg.forced_c2;
        if cfg.reduced {
            bc = bc.reduced();
        }
        let fit = verify_pointwise_bounds(&bc)?;
        let mut rec = CheckRecord::new(format!("pointwise_bound/d{}/{}", cfg.dim, derivative.label()), fit.passed)
            .metric("c1", fit.c1)
            .metric("c2", fit.c2)
            .metric("max_violation", fit.max_violation)
            .metric("exponent_fit", fit.exponent_fit)
            .metric("expected_exponent", fit.expected_exponent);
        if let Some(n) = fit.note {
            rec = rec.note(n);
        }
        records.push(rec);
    }

    let inc = verify_increment_integrals(&IncrementCheckConfig::standard(cfg.dim, cfg.op))?;
    let mut rec = CheckRecord::new(format!("increment_integrals/d{}", cfg.dim), inc.passed)
        .metric("space_exponent", inc.space_exponent)
        .metric("shift_exponent", inc.shift_exponent)
        .metric("time_exponent", inc.time_exponent)
        .metric("converged", inc.converged);
    if let Some(n) = inc.note {
        rec = rec.note(n);
    }
    records.push(rec);

    let sc = exp_integral_scaling(cfg.dim, 1.0, &[1.0, 2.0, 4.0, 8.0, 16.0])?;
    let ratio = sc.values[4] / sc.values[0];
    records.push(
        CheckRecord::new(format!("exp_scaling/d{}", cfg.dim), sc.passed)
            .metric("exponent", sc.exponent)
            .metric("ratio_16_1", ratio),
    );

    let pi = std::f64::consts::PI;
    let x: Vec<f64> = (0..cfg.dim).map(|i| 0.8 + 0.3 * i as f64).collect();
    let y: Vec<f64> = (0..cfg.dim).map(|i| pi - 0.9 - 0.2 * i as f64).collect();
    let start = if cfg.dim == 1 { 64 } else { 16 };
    for lap in [false, true] {
        let c = compose(&x, &y, 0.02, 0.01, lap, &cfg.op, start)?;
        records.push(
            CheckRecord::new(
                format!("compose/d{}/{}", cfg.dim, if lap { "laplacian" } else { "plain" }),
                c.converged && c.abs_error < 1e-8,
            )
            .metric("abs_error", c.abs_error)
            .metric("points", c.points),
        );
    }

    let modes = 8;
    let mut u0 = SpectralField::zeros(cfg.dim, modes);
    for (i, c) in u0.coeffs_mut().iter_mut().enumerate() {
        *c = 1.0 / (1.0 + i as f64);
    }
    for q in [2.0, 4.0] {
        let bound = initial_value_bound(&u0, &linspace(0.0, 1.0, 11), q, &cfg.op, 32)?;
        records.push(
            CheckRecord::new(format!("initial_value/d{}/q{q}", cfg.dim), bound.is_finite())
                .metric("sup_ratio", bound),
        );
    }
    Ok(records)
}
