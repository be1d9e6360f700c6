use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use schac_core::integrator::SimConfig;
use schac_core::regularity::{DifferenceOrder, HolderStudyConfig};

use crate::{CliError, CommonArgs};

fn read_table(path: Option<&Path>) -> Result<toml::Table, CliError> {
    let Some(path) = path else {
        return Ok(toml::Table::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn decode<T: DeserializeOwned>(table: toml::Table, what: &str) -> Result<T, CliError> {
    T::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

/// Parses and validates a simulation config, applying CLI overrides.
/// Returns the config and the remaining top-level tables.
pub fn load_sim(args: &CommonArgs, extra: &[&str]) -> Result<(SimConfig, toml::Table), CliError> {
    let mut table = read_table(args.config.as_deref())?;
    let mut rest = toml::Table::new();
    for key in extra {
        if let Some(v) = table.remove(*key) {
            rest.insert((*key).to_owned(), v);
        }
    }
    let mut cfg: SimConfig = decode(table, "simulation config")?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(paths) = args.paths {
        cfg.paths = paths;
    }
    let warnings = cfg
        .validate(args.override_alpha)
        .map_err(|e| CliError::Config(e.to_string()))?;
    for w in warnings {
        eprintln!("warning: {w} (overridden)");
    }
    Ok((cfg, rest))
}

pub fn load<T: DeserializeOwned + Default>(args: &CommonArgs, what: &str) -> Result<T, CliError> {
    if args.config.is_none() {
        return Ok(T::default());
    }
    decode(read_table(args.config.as_deref())?, what)
}

/// Optional `[holder]` table of a holder run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderOverrides {
    pub space_lags: Option<Vec<usize>>,
    pub time_lags: Option<Vec<usize>>,
    pub probes: Option<usize>,
    pub time_window_start: Option<f64>,
    pub space_order: Option<DifferenceOrder>,
}

impl HolderOverrides {
    pub fn from_rest(rest: &mut toml::Table) -> Result<Self, CliError> {
        match rest.remove("holder") {
            Some(toml::Value::Table(t)) => decode(t, "[holder]"),
            Some(_) => Err(CliError::Config("[holder] must be a table".into())),
            None => Ok(Self::default()),
        }
    }

    pub fn apply(&self, cfg: &SimConfig) -> Result<HolderStudyConfig, CliError> {
        let mut study = HolderStudyConfig::standard(cfg);
        if let Some(v) = &self.space_lags {
            study.space_lags = v.clone();
        }
        if let Some(v) = &self.time_lags {
            study.time_lags = v.clone();
        }
        if let Some(v) = self.probes {
            study.probes = v;
        }
        if let Some(v) = self.time_window_start {
            study.time_window_start = v;
        }
        if self.space_order.is_some() {
            study.space_order = self.space_order;
        }
        if study.space_lags.iter().chain(&study.time_lags).any(|&l| l == 0) {
            return Err(CliError::Config("[holder] lags must be >= 1".into()));
        }
        if study.space_lags.iter().any(|&l| 2 * l >= cfg.modes) {
            return Err(CliError::Config(format!(
                "[holder] space lags must be below modes / 2 = {}",
                cfg.modes / 2
            )));
        }
        if !(0.0..cfg.t_end).contains(&study.time_window_start) {
            return Err(CliError::Config("[holder] time_window_start must lie in [0, t_end)".into()));
        }
        Ok(study)
    }
}
