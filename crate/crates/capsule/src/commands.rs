//! Pipeline stages. Each reads its prerequisites from the output directory,
//! writes its artifacts with metadata sidecars and returns a summary line.
//!
//! ```text
//! simulate -> trajectory.csv -> dataset -> dataset.csv -> train -> model.json -> sweep
//!                                                      \-> grid -> grid.csv, models/
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use capsule_core::control::{network_input, NeuralController};
use capsule_core::model::State;
use capsule_core::neural::{split_shuffle, train, Dataset};
use capsule_core::sim::{distance, simulate, Trajectory};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::io::{self, read_dataset, read_trajectory};
use crate::meta::{write_json, Metadata};
use crate::model_file::{load_model, save_model};
use crate::parallel::{par_grid, par_sweep};
use crate::plot::{plot, PlotKind, PlotSpec, Series};
use crate::{AppError, Result};

pub const TRAJECTORY: &str = "trajectory.csv";
pub const CLOSED_LOOP_TRAJECTORY: &str = "trajectory_closed_loop.csv";
pub const DATASET: &str = "dataset.csv";
pub const MODEL: &str = "model.json";
pub const TRAIN_REPORT: &str = "train_report.json";
pub const HISTORY: &str = "history.csv";
pub const PREDICTIONS: &str = "predictions.csv";
pub const GRID: &str = "grid.csv";
pub const GRID_MODELS: &str = "models";
pub const SWEEP: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ControllerChoice {
    #[default]
    Fourier,
    Model(PathBuf),
}

impl FromStr for ControllerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fourier" => Ok(ControllerChoice::Fourier),
            _ => match s.strip_prefix("model:") {
                Some(p) if !p.is_empty() => Ok(ControllerChoice::Model(PathBuf::from(p))),
                _ => Err(format!("unknown controller `{s}` (expected fourier or model:PATH)")),
            },
        }
    }
}

/// Effective configuration and output directory of one invocation.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(cfg: RunConfig, out: &Path) -> Result<Self> {
        cfg.validate()?;
        std::fs::create_dir_all(out).map_err(|e| AppError::io(out, e))?;
        Ok(Context {
            cfg,
            out: out.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn input(&self, name: &str, stage: &'static str) -> Result<PathBuf> {
        let p = self.path(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(AppError::Missing { path: p, stage })
        }
    }
}

/// Distance with four significant digits.
pub fn format_distance(d: f64) -> String {
    if d == 0.0 || !d.is_finite() {
        return format!("{d:.3}");
    }
    let decimals = (3 - d.abs().log10().floor() as i64).max(0) as usize;
    format!("{d:.decimals$}")
}

fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn load_controller(path: &Path) -> Result<NeuralController> {
    if !path.is_file() {
        return Err(AppError::Missing {
            path: path.to_path_buf(),
            stage: "train",
        });
    }
    Ok(NeuralController::new(load_model(path)?)?)
}

fn trajectory_meta(m: Metadata, t: &Trajectory) -> Result<Metadata> {
    Ok(m.with("distance", distance(t)?)
        .with("samples", t.samples.len())
        .with("mode_switches", t.meta.mode_switches)
        .with("events", t.meta.events)
        .with("lift_off_samples", t.meta.lift_off_samples))
}

/// Runs one controller from rest and writes its trajectory.
pub fn cmd_simulate(ctx: &Context, controller: &ControllerChoice) -> Result<String> {
    let cfg = &ctx.cfg;
    let meta = Metadata::new("simulate", cfg);
    let (t, name, meta) = match controller {
        ControllerChoice::Fourier => {
            let fc = cfg.fourier.controller()?;
            let t = simulate(State::default(), &fc, &cfg.capsule, &cfg.sim, None)?;
            (t, TRAJECTORY, meta.with("controller", "fourier"))
        }
        ControllerChoice::Model(path) => {
            let nn = load_controller(path)?;
            let t = simulate(State::default(), &nn, &cfg.capsule, &cfg.sim, None)?;
            let meta = meta
                .with("controller", "model")
                .with("model_sha256", file_sha256(path)?);
            (t, CLOSED_LOOP_TRAJECTORY, meta)
        }
    };
    let path = ctx.path(name);
    io::write_trajectory(&path, &t)?;
    trajectory_meta(meta, &t)?.write_for(&path)?;
    Ok(format!("distance {} ({})", format_distance(distance(&t)?), path.display()))
}

/// Builds and splits the supervised dataset from the open-loop trajectory.
pub fn cmd_dataset(ctx: &Context) -> Result<String> {
    let src = ctx.input(TRAJECTORY, "simulate")?;
    let samples = read_trajectory(&src)?;
    let d = Dataset::from_rows(samples.iter().map(|s| (network_input(&s.state), s.u)));
    let dropped = samples.len() - d.len();
    let d = split_shuffle(d, ctx.cfg.dataset.train_fraction, ctx.cfg.seeds.split)?;
    let path = ctx.path(DATASET);
    io::write_dataset(&path, &d)?;
    Metadata::new("dataset", &ctx.cfg)
        .with("source_sha256", file_sha256(&src)?)
        .with("rows", d.len())
        .with("train_rows", d.train.len())
        .with("test_rows", d.test.len())
        .with("dropped_rows", dropped)
        .write_for(&path)?;
    Ok(format!(
        "{} rows ({} train, {} test) ({})",
        d.len(),
        d.train.len(),
        d.test.len(),
        path.display()
    ))
}

fn read_split_dataset(ctx: &Context) -> Result<(Dataset, String)> {
    let src = ctx.input(DATASET, "dataset")?;
    Ok((read_dataset(&src)?, file_sha256(&src)?))
}

/// Trains the configured network and writes the model, report, learning
/// curves and predictions.
pub fn cmd_train(ctx: &Context) -> Result<String> {
    let (d, src_hash) = read_split_dataset(ctx)?;
    let (net, report) = train(&d, &ctx.cfg.train_config())?;

    let model = ctx.path(MODEL);
    save_model(&model, &net)?;
    let report_path = ctx.path(TRAIN_REPORT);
    write_json(&report_path, &report)?;
    io::write_history(&ctx.path(HISTORY), &report)?;

    let mut rows = Vec::with_capacity(d.len());
    for (split, idx) in [("train", &d.train), ("test", &d.test)] {
        for &i in idx.iter() {
            let pred = net.unscale_target(net.forward(&net.scale_input(&d.inputs[i])?))?;
            rows.push((i, split, d.targets[i], pred));
        }
    }
    io::write_predictions(&ctx.path(PREDICTIONS), &rows)?;

    let meta = Metadata::new("train", &ctx.cfg).with("dataset_sha256", src_hash);
    for name in [MODEL, TRAIN_REPORT, HISTORY, PREDICTIONS] {
        meta.write_for(&ctx.path(name))?;
    }
    let r2 = report
        .final_test_r2
        .map(|v| format!("{v:.4}"))
        .unwrap_or_else(|| "n/a".into());
    Ok(format!(
        "test R2 {r2}, test MSE {:.3e} ({:.3e} range-normalized), best epoch {} of {} ({})",
        report.final_test_mse,
        report.final_test_mse_unit,
        report.best_epoch,
        report.epochs_run,
        model.display()
    ))
}

/// Trains every grid cell `repeats` times; writes all runs and the selected
/// model of each cell.
pub fn cmd_grid(ctx: &Context) -> Result<String> {
    let (d, src_hash) = read_split_dataset(ctx)?;
    let spec = &ctx.cfg.grid;
    let cells = par_grid(spec, &d, &ctx.cfg.train_config());
    let path = ctx.path(GRID);
    io::write_grid(&path, &cells)?;

    let models = ctx.path(GRID_MODELS);
    std::fs::create_dir_all(&models).map_err(|e| AppError::io(&models, e))?;
    let meta = Metadata::new("grid", &ctx.cfg).with("dataset_sha256", src_hash);
    let mut failed = 0;
    let mut best: Option<(f64, String)> = None;
    for (i, c) in cells.iter().enumerate() {
        failed += c.repeats.iter().filter(|r| r.is_err()).count();
        let Some(o) = c.best() else { continue };
        let name = grid_model_name(i, c);
        let p = models.join(&name);
        save_model(&p, &o.net)?;
        meta.clone().with("repeat", c.selected.unwrap_or(0)).write_for(&p)?;
        if let Some(r2) = o.report.final_test_r2 {
            if best.as_ref().is_none_or(|b| r2 > b.0) {
                best = Some((r2, name));
            }
        }
    }
    meta.with("failed_runs", failed).write_for(&path)?;
    let best = best.map(|(r2, n)| format!("best R2 {r2:.4} ({n})")).unwrap_or_else(|| "no successful run".into());
    Ok(format!("{} cells, {failed} failed runs, {best} ({})", cells.len(), path.display()))
}

/// File name of a cell's selected model, e.g. `grid_04_relu_linear_17.json`.
pub fn grid_model_name(index: usize, c: &capsule_core::neural::CellOutcome) -> String {
    format!(
        "grid_{index:02}_{}_{}_{}.json",
        c.cell.hidden.name(),
        c.cell.output.name(),
        c.cell.neurons
    )
}

/// Friction robustness of the Fourier controller against the trained network.
pub fn cmd_sweep(ctx: &Context, controller: &ControllerChoice) -> Result<String> {
    let model = match controller {
        ControllerChoice::Model(p) => p.clone(),
        ControllerChoice::Fourier => {
            return Err(AppError::Usage(
                "sweep compares the Fourier controller with a network; pass --controller model:PATH".into(),
            ))
        }
    };
    let nn = load_controller(&model)?;
    let fc = ctx.cfg.fourier.controller()?;
    let sc = ctx.cfg.sweep_config();
    let res = par_sweep(&fc, &nn, &ctx.cfg.capsule, &ctx.cfg.sim, &sc)?;
    let path = ctx.path(SWEEP);
    io::write_sweep(&path, &res, &sc.deltas, sc.trials, sc.base_seed)?;
    Metadata::new("sweep", &ctx.cfg)
        .with("model_sha256", file_sha256(&model)?)
        .with("ol_unperturbed", res.unperturbed.0)
        .with("nn_unperturbed", res.unperturbed.1)
        .with("failed_trials", res.failures.len())
        .write_for(&path)?;
    let dropped = res.rows.iter().filter(|r| r.is_none()).count();
    Ok(format!(
        "{} deltas x {} trials, {} failed trials, {dropped} rows without statistics ({})",
        sc.deltas.len(),
        sc.trials,
        res.failures.len(),
        path.display()
    ))
}

/// The standard figure set, for whichever inputs exist in the output directory.
pub fn default_plots(ctx: &Context) -> Vec<PlotSpec> {
    let ol = ctx.path(TRAJECTORY);
    let cl = ctx.path(CLOSED_LOOP_TRAJECTORY);
    let series = |col: &str| {
        let mut s = Vec::new();
        if ol.is_file() {
            s.push(Series {
                column: col.into(),
                label: "open loop".into(),
                input: Some(ol.clone()),
            });
        }
        if cl.is_file() {
            s.push(Series {
                column: col.into(),
                label: "neural network".into(),
                input: Some(cl.clone()),
            });
        }
        s
    };
    let mut specs = Vec::new();
    for (col, name, title) in [
        ("u", "control.svg", "Control signal"),
        ("z", "distance.svg", "Capsule displacement"),
        ("theta", "angle.svg", "Pendulum angle"),
        ("z_dot", "velocity.svg", "Capsule velocity"),
    ] {
        let s = series(col);
        if !s.is_empty() {
            specs.push(PlotSpec {
                input: ol.clone(),
                x: "tau".into(),
                series: s,
                output: ctx.path(name),
                kind: PlotKind::Line,
                title: title.into(),
            });
        }
    }
    let pred = ctx.path(PREDICTIONS);
    if pred.is_file() {
        let mut s = PlotSpec::simple(&pred, "actual", &["predicted"], &ctx.path("predictions.svg"), PlotKind::Scatter);
        s.title = "Network output against training targets".into();
        specs.push(s);
    }
    let sweep = ctx.path(SWEEP);
    if sweep.is_file() {
        let mut s = PlotSpec::simple(&sweep, "delta", &["ol_mean", "nn_mean"], &ctx.path("sweep.svg"), PlotKind::Line);
        s.series[0].label = "open loop".into();
        s.series[1].label = "neural network".into();
        s.title = "Mean distance under friction perturbation".into();
        specs.push(s);
    }
    specs
}

/// Renders `specs`, or the standard figures when none are given.
pub fn cmd_plot(ctx: &Context, specs: Vec<PlotSpec>) -> Result<String> {
    let specs = if specs.is_empty() { default_plots(ctx) } else { specs };
    if specs.is_empty() {
        return Err(AppError::Missing {
            path: ctx.path(TRAJECTORY),
            stage: "simulate",
        });
    }
    let mut written = Vec::new();
    for s in &specs {
        plot(s)?;
        written.push(s.output.display().to_string());
    }
    Ok(format!("wrote {}", written.join(", ")))
}
