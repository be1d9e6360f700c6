//! Exponential Euler integration of the Galerkin system, with cut-off,
//! stopping times, a Picard cross-check and energy diagnostics.

mod config;
mod energy;
mod output;
mod picard;
mod stepper;

pub use config::{
    condition_holds, Dealias, InitialCondition, ModeValue, Nonlinearity, NoiseWeighting, SimConfig,
};
pub use energy::{b_functional, energy_diagnostics, energy_row, free_energy, EnergyReport, EnergyRow};
pub use output::{
    read_snapshot_data, sha256_file, unix_now, write_energy_csv, write_trajectory, FileEntry,
    RunManifest, SnapshotSidecar,
};
pub use picard::{picard_solve, PicardResult};
pub use stepper::{
    path_generator, require_complete, run_path, run_path_observed, BlowUpRecord, Snapshot,
    StepInfo, StepView, Stepper, Trajectory, BLOW_UP_NORM,
};

use rayon::prelude::*;

use crate::error::Result;

/// Evaluates `f` on every path id in parallel; results keep path order, so
/// the output does not depend on the worker count.
pub fn par_paths<T: Send>(
    paths: impl IntoParallelIterator<Item = u64>,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    paths.into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests;
