use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bevsched::config::{RateTier, ScenarioConfig, SweepAxis};
use bevsched::scenario::{run_scenario, run_sweep};

/// Day-ahead BEV charging/discharging scheduler for multi-station feeders.
#[derive(Debug, Parser)]
#[command(name = "bevsched", version)]
struct Cli {
    /// Preset S1..S7, or `custom` to keep the flags from the config file.
    #[arg(long, default_value = "S7")]
    scenario: String,
    /// Configuration file; the built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    /// Weight of the station benefit in the final selection, in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of BEVs in the fleet.
    #[arg(long)]
    bevs: Option<usize>,
    /// Charging-rate tier: slow, regular or fast.
    #[arg(long)]
    rate: Option<RateTier>,
    /// Evaluation threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Vary one axis: carbon, pem or rate.
    #[arg(long)]
    sweep: Option<SweepAxis>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let base = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::defaults(),
    };
    let mut cfg = base.with_scenario(&cli.scenario)?;
    if let Some(v) = cli.seed {
        cfg.run.seed = v;
    }
    if let Some(v) = cli.population {
        cfg.optimizer.population = v;
    }
    if let Some(v) = cli.generations {
        cfg.optimizer.generations = v;
    }
    if let Some(v) = cli.alpha {
        cfg.run.alpha = v;
    }
    if let Some(v) = cli.bevs {
        cfg.fleet.n_bevs = v;
    }
    if let Some(v) = cli.rate {
        cfg.run.rate_tier = v;
    }
    if let Some(v) = cli.workers {
        cfg.optimizer.workers = v;
    }
    cfg.validate()?;

    match cli.sweep {
        Some(axis) => {
            let rows = run_sweep(&cfg, axis, &cli.out)?;
            for r in rows {
                println!(
                    "{} {:>8}: lf {:.2}% f1 {:.2} f2 {:.2} carbon ${:.2} degradation ${:.2}",
                    cfg.run.scenario,
                    r.value,
                    r.row.lf,
                    r.row.f1_selected,
                    r.row.f2_selected,
                    r.row.carbon_revenue,
                    r.row.degradation_total
                );
            }
        }
        None => {
            let run = run_scenario(&cfg, &cli.out)?;
            let r = &run.row;
            println!(
                "{}: front {} | f1 {:.2} f2 {:.2} | lf {:.2}% p2v {:.2}% pc {:.2}% | rho {} | {} scheduled, {} rejected",
                r.scenario, r.front_size, r.f1_selected, r.f2_selected, r.lf, r.p2v, r.pc, r.rho, r.participants, r.rejected
            );
            println!("artifacts in {}", cli.out.display());
        }
    }
    Ok(())
}
