use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mwdesign_core::clustering::{cluster_report, gen_perturbation_dataset, write_dataset_csv, ActionClusterModel, Dataset};
use mwdesign_core::nn::{load_checkpoint, write_checkpoint, Checkpoint};
use mwdesign_core::rl::{
    design_band, measure_band, meets_thresholds, train, train_vertex_baseline, CheckpointHook, CurveRow, DesignTask,
    TrainOutcome, TrainStart,
};
use mwdesign_core::sparams::{default_grid, read_touchstone, write_csv, write_touchstone, SParamSweep};
use serde_json::{json, Value};

use crate::config::Loaded;
use crate::error::CliError;

/// Rows of the learning curve copied into a report.
const REPORT_CURVE_ROWS: usize = 20;

fn out_dir(cfg: &Loaded) -> Result<PathBuf, CliError> {
    let dir = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::usage("no output directory: pass --out or set `out` in the config"))?;
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("json");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Streams into `path` through `f`, mapping any failure to an IO error.
fn write_with<E: ToString>(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<(), E>,
) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_sweep(dir: &Path, stem: &str, sweep: &SParamSweep) -> Result<(), CliError> {
    write_with(&dir.join(format!("{stem}.s2p")), |w| write_touchstone(sweep, w))?;
    write_with(&dir.join(format!("{stem}.csv")), |w| write_csv(sweep, w))
}

fn manifest(cfg: &Loaded, command: &str, extra: Value) -> Value {
    let mut m = json!({
        "tool": "mwdesign",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config_sha256": cfg.sha256(),
        "mesh_sha256": cfg.mesh_sha256,
        "seeds": {
            "clustering": cfg.config.clustering.seed,
            "training": cfg.config.training.seed,
        },
        "config": cfg.resolved(),
    });
    if let (Some(m), Value::Object(extra)) = (m.as_object_mut(), extra) {
        m.extend(extra);
    }
    m
}

pub fn simulate(cfg: &Loaded) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let sweep = cfg.surrogate().simulate(&cfg.mesh, &default_grid(cfg.config.task.f0_hz))?;
    write_sweep(&dir, "sweep", &sweep)?;
    write_json(&dir.join("manifest.json"), &manifest(cfg, "simulate", json!({})))
}

fn build_dataset(cfg: &Loaded) -> Result<Dataset, CliError> {
    let freqs = default_grid(cfg.config.task.f0_hz);
    Ok(gen_perturbation_dataset(&cfg.mesh, &cfg.surrogate(), &cfg.config.clustering.deltas_mm, &freqs)?)
}

fn write_dataset(dir: &Path, ds: &Dataset) -> Result<(), CliError> {
    write_with(&dir.join("dataset.csv"), |w| write_dataset_csv(ds, w))
}

pub fn dataset(cfg: &Loaded) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let ds = build_dataset(cfg)?;
    write_dataset(&dir, &ds)?;
    let extra = json!({"samples": ds.samples.len(), "rejected": ds.rejected});
    write_json(&dir.join("manifest.json"), &manifest(cfg, "dataset", extra))
}

/// Fits the cluster model and writes its files; returns the summary too.
fn fit_clusters(cfg: &Loaded, dir: &Path) -> Result<(ActionClusterModel, Value), CliError> {
    let ds = build_dataset(cfg)?;
    write_dataset(dir, &ds)?;
    let c = &cfg.config.clustering;
    let model = ActionClusterModel::fit(&ds, c.k, c.seed, c.tau)?;
    write_bytes(&dir.join("cluster_model.json"), model.to_json().as_bytes())?;
    let report = cluster_report(&model);
    write_with(&dir.join("cluster_assignments.csv"), |w| report.write_assignments(w))?;
    for (cluster, _, _) in &report.curves {
        write_with(&dir.join(format!("cluster_{cluster}_curve.csv")), |w| report.write_curve(*cluster, w))?;
    }
    let summary = json!({
        "k": model.k,
        "samples": ds.samples.len(),
        "rejected": ds.rejected,
        "effective_clusters": model.effective_clusters(),
        "negligible": model.negligible,
        "effect": model.effect,
        "objective": model.objective,
    });
    write_json(&dir.join("cluster_summary.json"), &summary)?;
    Ok((model, summary))
}

pub fn cluster(cfg: &Loaded) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let (_, summary) = fit_clusters(cfg, &dir)?;
    let extra = json!({"effective_clusters": summary["effective_clusters"]});
    write_json(&dir.join("manifest.json"), &manifest(cfg, "cluster", extra))
}

/// Writes through a temporary name so an interrupted save never leaves a
/// truncated checkpoint behind.
fn save_atomic(ck: &Checkpoint, path: &Path) -> Result<(), CliError> {
    let tmp = path.with_extension("bin.tmp");
    write_with(&tmp, |w| write_checkpoint(ck, w))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn train_cmd(cfg: &Loaded, baseline: bool, resume: Option<&Path>) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let c = &cfg.config;
    let start = match resume {
        Some(p) => {
            let ck = load_checkpoint(p).map_err(|e| match e {
                mwdesign_core::nn::NnError::Io(io) => CliError::io(p, io),
                other => CliError::usage(format!("{}: {other}", p.display())),
            })?;
            TrainStart::resume(ck)
        }
        None => TrainStart::default(),
    };
    let start_step = start.global_step;
    let ck_path = dir.join("checkpoint.bin");
    let mut save_error: Option<CliError> = None;
    let mut save = |ck: &Checkpoint| {
        if save_error.is_none() {
            if let Err(e) = save_atomic(ck, &ck_path) {
                save_error = Some(e);
            }
        }
    };
    let hook = Some(CheckpointHook {
        every: cfg.config.checkpoint_every,
        save: &mut save,
    });
    let outcome: TrainOutcome = if baseline {
        train_vertex_baseline(c.task, c.reward, cfg.surrogate(), &cfg.mesh, &c.training, start, hook)?
    } else {
        let (model, _) = fit_clusters(cfg, &dir)?;
        train(c.task, c.reward, cfg.surrogate(), &cfg.mesh, &model, &c.training, start, hook)?
    };
    if let Some(e) = save_error {
        return Err(e);
    }
    save_atomic(&outcome.checkpoint(), &ck_path)?;

    let curve_path = dir.join("learning_curve.csv");
    // a resumed run continues the curve already in the directory
    let mut curve = match resume {
        Some(_) if curve_path.is_file() => read_curve(&curve_path)?
            .into_iter()
            .filter(|r| r.global_step <= start_step)
            .collect(),
        _ => Vec::new(),
    };
    curve.extend(outcome.curve.iter().cloned());
    write_with(&curve_path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        for row in &curve {
            csv.serialize(row)?;
        }
        csv.flush().map_err(csv::Error::from)
    })?;
    write_bytes(&dir.join("best_mesh.json"), outcome.best.mesh.to_json().as_bytes())?;
    write_sweep(&dir, "best_sweep", &outcome.best.sweep)?;
    let result = json!({
        "baseline": baseline,
        "success": outcome.first_success_step.is_some() || outcome.best.success,
        "first_success_step": outcome.first_success_step,
        "global_step": outcome.global_step,
        "episodes": outcome.episodes,
        "policy_size": outcome.actions,
        "best": {
            "reward": outcome.best.reward,
            "global_step": outcome.best.global_step,
            "success": outcome.best.success,
            "measure": outcome.best.measure,
        },
    });
    write_json(&dir.join("train_result.json"), &result)?;
    let extra = json!({
        "baseline": baseline,
        "policy_size": outcome.actions,
        "resumed_from_step": resume.map(|_| start_step),
    });
    write_json(&dir.join("manifest.json"), &manifest(cfg, "train", extra))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn read_curve(path: &Path) -> Result<Vec<CurveRow>, CliError> {
    let bad = |e: csv::Error| CliError::usage(format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(bad)?;
    rdr.deserialize().map(|r| r.map_err(bad)).collect()
}

/// Summarises a training run directory into `report.json`.
pub fn report(dir: &Path) -> Result<Value, CliError> {
    let result_path = dir.join("train_result.json");
    if !result_path.is_file() {
        return Err(CliError::usage(format!("{} holds no training run (train_result.json missing)", dir.display())));
    }
    let result = read_json(&result_path)?;
    let manifest = read_json(&dir.join("manifest.json"))?;
    let task: DesignTask = serde_json::from_value(manifest["config"]["task"].clone())
        .map_err(|e| CliError::usage(format!("manifest task: {e}")))?;

    let sweep_path = dir.join("best_sweep.s2p");
    let file = fs::File::open(&sweep_path).map_err(|e| CliError::usage(format!("{}: {e}", sweep_path.display())))?;
    let sweep = read_touchstone(BufReader::new(file))?;
    let m = measure_band(&sweep, task.kind);
    let band = design_band(&sweep, &task);
    let s11 = sweep.s11_db();
    let s21 = sweep.s21_db();
    let worst_s11 = band.iter().map(|&i| s11[i]).fold(f64::NEG_INFINITY, f64::max);
    // one-ports carry no transmission
    let worst_s21 = (!task.kind.is_one_port()).then(|| band.iter().map(|&i| s21[i]).fold(f64::INFINITY, f64::min));

    let rows = read_curve(&dir.join("learning_curve.csv"))?;
    let tail = rows[rows.len().saturating_sub(REPORT_CURVE_ROWS)..].to_vec();

    let summary = json!({
        "success": result["success"],
        "steps_to_success": result["first_success_step"],
        "baseline": result["baseline"],
        "global_step": result["global_step"],
        "episodes": result["episodes"],
        "best_reward": result["best"]["reward"],
        "best_step": result["best"]["global_step"],
        "thresholds": {
            "f0_hz": task.f0_hz,
            "f1_hz": task.f1_hz,
            "f2_hz": task.f2_hz,
            "rl_ceiling_db": task.rl_ceiling_db,
            "il_floor_db": task.il_floor_db,
        },
        "achieved": {
            "f0_hz": m.f0,
            "f1_hz": m.f1,
            "f2_hz": m.f2,
            "passband_rl_db": m.passband_rl_db,
            "passband_il_db": m.passband_il_db,
            "design_band_max_s11_db": worst_s11,
            "design_band_min_s21_db": worst_s21,
            "meets_thresholds": meets_thresholds(&sweep, &task),
        },
        "final_curve": tail,
    });
    write_json(&dir.join("report.json"), &summary)?;
    Ok(summary)
}
