use std::path::PathBuf;
use std::process::ExitCode;

use capsule::commands::{self, Context, ControllerChoice};
use capsule::config::RunConfig;
use capsule::plot::{PlotKind, PlotSpec};
use capsule::{AppError, Result};
use clap::{Args, Parser, Subcommand};

/// Pendulum capsule drive: simulation, controller distillation and
/// friction robustness.
#[derive(Debug, Parser)]
#[command(name = "capsule", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the seed of the stage being run (split, train or sweep).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Directory for inputs and outputs of every stage.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// `fourier` or `model:PATH`.
    #[arg(long, global = true, value_name = "CHOICE")]
    controller: Option<ControllerChoice>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one controller from rest and write the trajectory.
    Simulate,
    /// Build the train/test dataset from the open-loop trajectory.
    Dataset,
    /// Train the configured network on the dataset.
    Train,
    /// Train the activation × width grid.
    Grid,
    /// Friction perturbation sweep: Fourier controller against a network.
    Sweep,
    /// Render SVG plots; without --input, the standard figures.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// CSV file to plot.
    #[arg(long, requires = "y")]
    input: Option<PathBuf>,
    /// Column for the x axis.
    #[arg(long, default_value = "tau")]
    x: String,
    /// Columns for the y axis.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    y: Vec<String>,
    /// Scatter instead of lines.
    #[arg(long)]
    scatter: bool,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "plot.svg")]
    name: String,
}

fn run(cli: Cli) -> Result<String> {
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        match cli.command {
            Command::Dataset => cfg.seeds.split = seed,
            Command::Train | Command::Grid => cfg.seeds.train = seed,
            Command::Sweep => cfg.seeds.sweep = seed,
            Command::Simulate | Command::Plot(_) => {}
        }
    }
    let ctx = Context::new(cfg, &g.out)?;
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&ctx, &g.controller.unwrap_or_default()),
        Command::Dataset => commands::cmd_dataset(&ctx),
        Command::Train => commands::cmd_train(&ctx),
        Command::Grid => commands::cmd_grid(&ctx),
        Command::Sweep => {
            let c = g
                .controller
                .unwrap_or_else(|| ControllerChoice::Model(ctx.path(commands::MODEL)));
            commands::cmd_sweep(&ctx, &c)
        }
        Command::Plot(p) => {
            let specs = match p.input {
                Some(input) => {
                    if p.name.contains(std::path::is_separator) {
                        return Err(AppError::Usage("--name must be a plain file name".into()));
                    }
                    let ys: Vec<&str> = p.y.iter().map(String::as_str).collect();
                    let kind = if p.scatter { PlotKind::Scatter } else { PlotKind::Line };
                    vec![PlotSpec::simple(&input, &p.x, &ys, &ctx.path(&p.name), kind)]
                }
                None => Vec::new(),
            };
            commands::cmd_plot(&ctx, specs)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("capsule: {}", first.trim_start_matches("error: ").trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("capsule: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
