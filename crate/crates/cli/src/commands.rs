use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;
use schac_core::greens::{run_green_suite, GreenSuiteConfig};
use schac_core::integrator::{
    energy_diagnostics, par_paths, run_path, unix_now, write_energy_csv, write_trajectory,
    InitialCondition, RunManifest,
};
use schac_core::regularity::{exponent_windows, run_holder_study, theory_exponents, StructureFunction};
use schac_core::report::write_json_lines;

use crate::config::{load, load_sim, HolderOverrides};
use crate::{CliError, CommonArgs, Status};

fn prepare_out_dir(args: &CommonArgs) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    Ok(args.out_dir.clone())
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> Result<(), CliError> {
    let w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

pub fn simulate(args: &CommonArgs) -> Result<Status, CliError> {
    let (cfg, rest) = load_sim(args, &[])?;
    if let Some(key) = rest.keys().next() {
        return Err(CliError::Config(format!("unknown key `{key}`")));
    }
    let out = prepare_out_dir(args)?;
    let started = unix_now();
    let trajs = par_paths(0..cfg.paths as u64, |p| run_path(&cfg, p))?;

    let config_file = out.join("config.json");
    write_json(&config_file, &cfg)?;
    let mut files = vec![config_file];
    let mut blown_up = 0;
    for traj in &trajs {
        let stem = format!("path_{:04}", traj.path);
        files.extend(write_trajectory(&out, &stem, traj, &cfg)?);
        if let Some(b) = &traj.blow_up {
            blown_up += 1;
            eprintln!("path {}: blow-up at t = {} ({})", traj.path, b.t, b.reason);
            continue;
        }
        let csv = out.join(format!("energy_{:04}.csv", traj.path));
        write_energy_csv(&csv, &energy_diagnostics(traj, &cfg)?)?;
        files.push(csv);
    }
    let manifest = RunManifest::collect(&cfg, started, unix_now(), &out, &files)?;
    manifest.write(&out.join("manifest.json"))?;
    println!(
        "simulated {} path(s), {} steps each, config {}",
        cfg.paths,
        cfg.steps(),
        &manifest.config_hash[..12]
    );
    for traj in &trajs {
        println!(
            "path {:4}: stopping time {:?}, frozen at {:?}",
            traj.path, traj.stopping_time, traj.frozen_at
        );
    }
    println!("wrote {} file(s) to {}", manifest.files.len() + 1, out.display());
    Ok(if blown_up > 0 { Status::Fail } else { Status::Pass })
}

pub fn green_verify(args: &CommonArgs) -> Result<Status, CliError> {
    let cfg: GreenSuiteConfig = load(args, "green suite config")?;
    if !(1..=3).contains(&cfg.dim) {
        return Err(CliError::Config(format!("dim must be 1, 2 or 3, got {}", cfg.dim)));
    }
    cfg.op.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if args.seed.is_some() || args.paths.is_some() {
        eprintln!("warning: --seed and --paths have no effect on green-verify");
    }
    let out = prepare_out_dir(args)?;
    let records = run_green_suite(&cfg)?;
    let path = out.join("green_report.jsonl");
    write_json_lines(BufWriter::new(File::create(&path)?), &records)?;
    for r in &records {
        let metrics = serde_json::to_string(&r.metrics)?;
        println!("[{}] {} {metrics}", if r.passed { "PASS" } else { "FAIL" }, r.name);
        if let Some(n) = &r.note {
            println!("       {n}");
        }
    }
    let failed = records.iter().filter(|r| !r.passed).count();
    println!("{} passed, {failed} failed; report in {}", records.len() - failed, path.display());
    Ok(if failed == 0 { Status::Pass } else { Status::Fail })
}

#[derive(Debug, Serialize)]
struct ExponentRow<'a> {
    quantity: &'static str,
    estimate: f64,
    ci: (f64, f64),
    window: (f64, f64),
    theory_sup: Option<f64>,
    within: bool,
    structure: &'a StructureFunction,
}

#[derive(Debug, Serialize)]
struct HolderReport<'a> {
    config_hash: String,
    paths: usize,
    blown_up: usize,
    flagged: bool,
    rows: Vec<ExponentRow<'a>>,
    notes: Vec<String>,
}

pub fn holder(args: &CommonArgs) -> Result<Status, CliError> {
    let (cfg, mut rest) = load_sim(args, &["holder"])?;
    let study = HolderOverrides::from_rest(&mut rest)?.apply(&cfg)?;
    let out = prepare_out_dir(args)?;
    let result = run_holder_study(&cfg, &study)?;

    let deterministic = cfg.sigma.is_zero();
    let mut notes = Vec::new();
    let (space_window, time_window, sups) = match (&cfg.initial, deterministic) {
        (InitialCondition::Holder { delta, .. }, true) => {
            notes.push(format!("deterministic flow from a Hölder-{delta} datum: lower bounds only"));
            ((*delta, f64::INFINITY), (delta / 4.0, f64::INFINITY), None)
        }
        (_, true) => {
            notes.push("deterministic flow: no window applies".into());
            ((f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY), None)
        }
        (initial, false) => {
            if *initial != InitialCondition::Zero {
                notes.push("windows assume a zero initial datum".into());
            }
            let (s, t) = exponent_windows(cfg.dim);
            (s, t, Some(theory_exponents(cfg.dim)))
        }
    };
    let within = |sf: &StructureFunction, (a, b): (f64, f64)| {
        (sf.saturated && b.is_infinite()) || (a..=b).contains(&sf.exponent)
    };
    let rows = vec![
        ExponentRow {
            quantity: "space",
            estimate: result.space.exponent,
            ci: result.space.ci,
            window: space_window,
            theory_sup: sups.map(|s| s.0),
            within: within(&result.space, space_window),
            structure: &result.space,
        },
        ExponentRow {
            quantity: "time",
            estimate: result.time.exponent,
            ci: result.time.ci,
            window: time_window,
            theory_sup: sups.map(|s| s.1),
            within: within(&result.time, time_window),
            structure: &result.time,
        },
    ];
    let flagged = !deterministic && (result.space.flagged || result.time.flagged);
    for sf in [&result.space, &result.time] {
        if let Some(n) = &sf.note {
            notes.push(n.clone());
        }
    }
    if result.blown_up > 0 {
        notes.push(format!("{} path(s) blew up and were excluded", result.blown_up));
    }

    println!("{:<6} {:>9} {:>21} {:>19} {:>8}", "", "estimate", "95% CI", "window", "sup");
    for r in &rows {
        println!(
            "{:<6} {:>9.4} {:>21} {:>19} {:>8} {}",
            r.quantity,
            r.estimate,
            format!("[{:.4}, {:.4}]", r.ci.0, r.ci.1),
            format!("[{:.3}, {:.3}]", r.window.0, r.window.1),
            r.theory_sup.map_or("-".into(), |s| format!("{s:.3}")),
            if r.within { "ok" } else { "outside" }
        );
    }
    for n in &notes {
        println!("note: {n}");
    }
    let report = HolderReport {
        config_hash: cfg.hash(),
        paths: cfg.paths,
        blown_up: result.blown_up,
        flagged,
        rows,
        notes,
    };
    write_json(&out.join("holder_report.json"), &report)?;

    Ok(if flagged {
        println!("result flagged as low-confidence");
        Status::Inconclusive
    } else if report.rows.iter().all(|r| r.within) {
        Status::Pass
    } else {
        Status::Fail
    })
}
