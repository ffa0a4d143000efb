use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use semmec::bench::{emit_csv, load_scenario, run_sweep_with, write_csv, Algorithm, Sweep, SweepOptions};
use semmec::model::validate_inputs;

/// Sweep a scenario parameter and write per-cell delays as CSV.
#[derive(Debug, Parser)]
#[command(name = "semmec", version)]
struct Cli {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// PARAM=v1,v2,... with PARAM one of energy_budget, task_bits, beta_min,
    /// sem_a, sem_k, sem_p, f_mec_total.
    #[arg(long)]
    sweep: Sweep,
    /// semantic, no-semantic or local. Repeatable; defaults to all three.
    #[arg(long = "algorithm")]
    algorithms: Vec<Algorithm>,
    /// Replaces the scenario's fading seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when omitted. A `.config.toml` sidecar with
    /// the resolved scenario is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Certify each semantic solve with random feasible perturbations.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
    #[arg(long = "eps-outer")]
    eps_outer: Option<f64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut scenario = match load_scenario(&cli.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.scenario.display());
            return ExitCode::from(2);
        }
    };
    let sys = &mut scenario.system;
    if let Some(v) = cli.eps1 {
        sys.eps_bisect_capacity = v;
    }
    if let Some(v) = cli.eps2 {
        sys.eps_bisect_transmit = v;
    }
    if let Some(v) = cli.eps_outer {
        sys.eps_outer = v;
    }
    if let Some(v) = cli.max_iters {
        sys.max_outer_iters = v;
    }
    if let Err(e) = validate_inputs(&scenario.devices, &scenario.system) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let algorithms = if cli.algorithms.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        cli.algorithms.clone()
    };

    let values: Vec<String> = cli.sweep.values.iter().map(f64::to_string).collect();
    let names: Vec<&str> = algorithms.iter().map(|a| a.name()).collect();
    let seed = cli.seed.map_or("none".to_string(), |s| s.to_string());
    let config = format!(
        "# sweep = {}={}\n# algorithms = {}\n# seed = {seed}\n# verify = {}\n{}",
        cli.sweep.param,
        values.join(","),
        names.join(","),
        cli.verify,
        scenario.to_toml()
    );

    let outcome = run_sweep_with(
        &scenario,
        &cli.sweep,
        &algorithms,
        cli.seed,
        SweepOptions { verify: cli.verify },
    );

    let written = match &cli.out {
        Some(path) => {
            let sidecar = path.with_extension("config.toml");
            std::fs::write(&sidecar, &config)
                .map_err(|e| format!("{}: {e}", sidecar.display()))
                .and_then(|_| emit_csv(&outcome.results, path).map_err(|e| format!("{}: {e}", path.display())))
        }
        None => {
            eprint!("{config}");
            write_csv(&outcome.results, std::io::stdout().lock()).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    if outcome.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} cell(s) failed:", outcome.failures.len());
        for f in &outcome.failures {
            eprintln!("  {f}");
        }
        ExitCode::FAILURE
    }
}
