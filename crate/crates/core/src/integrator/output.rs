use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::SimConfig;
use super::energy::EnergyReport;
use super::stepper::{BlowUpRecord, Trajectory};
use crate::error::Result;

/// Sidecar describing a flat snapshot array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub data_file: String,
    pub dtype: String,
    pub order: String,
    /// `[snapshots, N, ..., N]`.
    pub shape: Vec<usize>,
    pub times: Vec<f64>,
    pub config_hash: String,
    pub seed: u64,
    pub path: u64,
    pub stopping_time: Option<f64>,
    pub frozen_at: Option<f64>,
    pub blow_up: Option<BlowUpRecord>,
}

/// Writes `<stem>.bin` (little-endian f64 coefficients, row-major,
/// snapshot-major) and `<stem>.json`.
pub fn write_trajectory(dir: &Path, stem: &str, traj: &Trajectory, cfg: &SimConfig) -> Result<Vec<PathBuf>> {
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let mut out = BufWriter::new(File::create(&bin)?);
    for s in &traj.snapshots {
        for v in s.field.coeffs() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    let mut shape = vec![traj.snapshots.len()];
    shape.extend(std::iter::repeat_n(cfg.modes, cfg.dim));
    let sidecar = SnapshotSidecar {
        data_file: format!("{stem}.bin"),
        dtype: "f64le".into(),
        order: "row-major".into(),
        shape,
        times: traj.snapshots.iter().map(|s| s.t).collect(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        path: traj.path,
        stopping_time: traj.stopping_time,
        frozen_at: traj.frozen_at,
        blow_up: traj.blow_up.clone(),
    };
    let mut w = BufWriter::new(File::create(&json)?);
    serde_json::to_writer_pretty(&mut w, &sidecar)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(vec![bin, json])
}

/// Reads back a snapshot array written by [`write_trajectory`].
pub fn read_snapshot_data(bin: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    File::open(bin)?.read_to_end(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// CSV with header `t,mass,L2,H1,H2,free_energy` (squared norms).
pub fn write_energy_csv(path: &Path, report: &EnergyReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,mass,L2,H1,H2,free_energy")?;
    for r in &report.rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            r.t, r.mass, r.l2_sq, r.h1_sq, r.h2_sq, r.free_energy
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    let mut f = File::open(path)?;
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    /// Digests every file in `files`, recorded relative to `root`.
    pub fn collect(
        cfg: &SimConfig,
        started_unix: f64,
        finished_unix: f64,
        root: &Path,
        files: &[PathBuf],
    ) -> Result<Self> {
        let entries = files
            .iter()
            .map(|p| {
                Ok(FileEntry {
                    path: p.strip_prefix(root).unwrap_or(p).display().to_string(),
                    sha256: sha256_file(p)?,
                    bytes: std::fs::metadata(p)?.len(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            started_unix,
            finished_unix,
            files: entries,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

/// Seconds since the Unix epoch.
pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}
