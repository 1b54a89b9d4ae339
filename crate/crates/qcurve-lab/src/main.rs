use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use qcurve_lab::cli::{run, OutputFormat, Scenario};

const SCENARIO_HELP: &str = "\
Scenario config keys (flat `key = value` lines, `#` comments):

common          n (grid size, rounded up to a power of two), length,
                c, hbar_over_m, eps (classification tolerance)
coherent        r0, k0, sigma2, t_max, n_steps, propagator (exact|taylor)
decreasing      same as coherent; the packet refocuses over [0, t_max]
dispersion-table  k_min, k_max, n_points
two-state       omega1, omega2, w11, w12, w22, sigma2, t_max, n_steps
multi-state     n_levels, w_scale, sigma2, t_max, n_steps, seed
collide         k1, c1, c2, sigma2, statistics (fermion|boson), t_max,
                n_steps, snapshot_stride, snapshot_subsample
classify        input (path to a CSV with an s_total column), eps

Outputs per run directory: series.csv, probabilities.csv (finite-level
scenarios), snapshots_<t>.csv (collide), report.json.

Exit codes: 0 success, 1 config error, 2 runtime guard violation.";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Coherent,
    Decreasing,
    DispersionTable,
    TwoState,
    MultiState,
    Collide,
    Classify,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Scenario {
        match s {
            ScenarioArg::Coherent => Scenario::Coherent,
            ScenarioArg::Decreasing => Scenario::Decreasing,
            ScenarioArg::DispersionTable => Scenario::DispersionTable,
            ScenarioArg::TwoState => Scenario::TwoState,
            ScenarioArg::MultiState => Scenario::MultiState,
            ScenarioArg::Collide => Scenario::Collide,
            ScenarioArg::Classify => Scenario::Classify,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Phase-space entropy laboratory: evolve quantum states and record how
/// S = S_r + S_k changes in time.
#[derive(Debug, Parser)]
#[command(name = "qcurve-lab", version, after_help = SCENARIO_HELP)]
struct Args {
    /// Experiment to run
    #[arg(value_enum)]
    scenario: ScenarioArg,

    /// Path to the scenario config file
    #[arg(long)]
    config: PathBuf,

    /// Output directory (created if missing)
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Series output format; csv is always written, json adds a mirror
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Seed for randomized scenarios (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config_text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("config error: cannot read `{}`: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    match run(
        args.scenario.into(),
        &config_text,
        &args.out,
        format,
        args.seed,
    ) {
        Ok(report) => {
            println!(
                "{}: wrote {} to {}",
                report.scenario,
                report.outputs.join(", "),
                args.out.display()
            );
            if let Some(c) = &report.classification {
                println!("classification: {} (eps = {})", c.label, c.eps);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
