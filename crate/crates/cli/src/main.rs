use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtraffic::models::{Scenario, Variant};
use qtraffic_cli::commands::{cmd_grid, cmd_report, cmd_run, cmd_synth, cmd_train_ae, cell_dir, REPORT_FILE};
use qtraffic_cli::config::{DataSource, ExperimentConfig, OUT_DIR_ENV};
use qtraffic_cli::report::summary_table;
use qtraffic_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "qtraffic", version, about = "Hybrid quantum-classical traffic-flow forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic flow series as CSV.
    Synth {
        #[command(flatten)]
        opts: ConfigArgs,
        /// Output CSV path [default: <output-dir>/synthetic.csv].
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Pre-train and cache the autoencoder of every fold.
    TrainAe(ConfigArgs),
    /// Cross-validate one model.
    Run(ConfigArgs),
    /// Cross-validate every (N_q, variant) pair.
    Grid(ConfigArgs),
    /// Summarize a saved report and render its loss curves.
    Report {
        report: PathBuf,
        /// Where to write plots [default: next to the report].
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Classic,
    Hybrid,
}

/// Every flag overrides the matching config-file field.
#[derive(Args)]
struct ConfigArgs {
    /// TOML or JSON config; a saved report also works.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Read flows from this CSV instead of generating them.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    sort: bool,
    #[arg(long)]
    fill_gaps: bool,
    #[arg(long)]
    n_days: Option<usize>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    synth_seed: Option<u64>,
    #[arg(long, value_enum, ignore_case = true)]
    scenario: Option<ScenarioArg>,
    #[arg(long, value_enum, value_delimiter = ',')]
    variant: Vec<VariantArg>,
    #[arg(long, value_delimiter = ',')]
    n_q: Vec<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    ae_epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    clip_norm: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    gap_size: Option<usize>,
    #[arg(long)]
    val_fraction: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    angle_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Freeze timestamps and runtimes so output is byte-reproducible.
    #[arg(long)]
    fixed_timestamp: bool,
}

impl ConfigArgs {
    fn resolve(self) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = self.csv {
            c.data = DataSource::Csv { path, sort: self.sort, fill_gaps: self.fill_gaps };
        } else if let DataSource::Csv { sort, fill_gaps, .. } = &mut c.data {
            *sort |= self.sort;
            *fill_gaps |= self.fill_gaps;
        }
        if self.n_days.is_some() || self.noise_std.is_some() || self.synth_seed.is_some() {
            let DataSource::Synthetic(s) = &mut c.data else {
                return Err(CliError::Usage("synthetic-data flags cannot be combined with a CSV source".into()));
            };
            if let Some(v) = self.n_days {
                s.n_days = v;
            }
            if let Some(v) = self.noise_std {
                s.noise_std = v;
            }
            if let Some(v) = self.synth_seed {
                s.seed = v;
            }
        }
        if let Some(s) = self.scenario {
            c.scenario = match s {
                ScenarioArg::A => Scenario::A,
                ScenarioArg::B => Scenario::B,
            };
        }
        if !self.variant.is_empty() {
            c.variants = self
                .variant
                .iter()
                .map(|v| match v {
                    VariantArg::Classic => Variant::Classic,
                    VariantArg::Hybrid => Variant::Hybrid,
                })
                .collect();
        }
        if !self.n_q.is_empty() {
            c.n_q = self.n_q;
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(window, epochs, ae_epochs, batch_size, learning_rate, clip_norm, folds, gap_size, val_fraction);
        set!(angle_scale, seed, output_dir, workers);
        c.fixed_timestamp |= self.fixed_timestamp;
        c.validate()?;
        Ok(c)
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth { opts, output } => {
            let cfg = opts.resolve()?;
            let path = output.unwrap_or_else(|| cfg.output_dir.join("synthetic.csv"));
            let rows = cmd_synth(&cfg, &path)?;
            println!("wrote {rows} rows to {}", path.display());
        }
        Command::TrainAe(opts) => {
            let cfg = opts.resolve()?;
            let summary = cmd_train_ae(&cfg)?;
            println!("| N_q | fold | epochs | final train loss | test reconstruction MSE | checkpoint |\n|---|---|---|---|---|---|");
            for e in &summary.encoders {
                println!(
                    "| {} | {} | {} | {} | {:.6} | {} |",
                    e.n_q,
                    e.fold,
                    e.epochs,
                    e.final_train_loss.map(|l| format!("{l:.6}")).unwrap_or_else(|| "cached".into()),
                    e.test_reconstruction_mse,
                    e.checkpoint
                );
            }
        }
        Command::Run(opts) => {
            let cfg = opts.resolve()?;
            let report = cmd_run(&cfg)?;
            print!("{}", summary_table(&report));
            let label = report.models[0].label;
            println!("report: {}", cell_dir(&cfg, label).join(REPORT_FILE).display());
        }
        Command::Grid(opts) => {
            let cfg = opts.resolve()?;
            let report = cmd_grid(&cfg)?;
            print!("{}", summary_table(&report));
            println!("outputs: {}", cfg.output_dir.display());
        }
        Command::Report { report, plot_dir } => {
            let dir = plot_dir.unwrap_or_else(|| report.parent().map(|p| p.join("plots")).unwrap_or_else(|| "plots".into()));
            print!("{}", cmd_report(&report, &dir)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
