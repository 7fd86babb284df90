use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use activesense::sim::config::parse_policies;
use activesense::sim::trial::{draw_ensemble, PlanSet};
use activesense::sim::{self, ExperimentConfig, Policy, SweepRow};
use activesense::SensingPlan;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "activesense",
    version,
    about = "Active sub-Nyquist spectrum sensing planner and simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the DI and GT plans with their expected utility.
    Plan(Common),
    /// Monte-Carlo run of every policy at the base configuration.
    Simulate(Common),
    /// One Monte-Carlo run per sweep grid value.
    Sweep(Common),
    /// Detection operating points of the baseline and the planned schemes.
    Roc(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset, used when no config file is given.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path; defaults to the configured path or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated policies, e.g. `DI,GT(2),MAP(2)`.
    #[arg(long)]
    policy: Option<String>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::from_path(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            (None, Some(name)) => sim::preset(name)?,
            (None, None) => bail!("one of --config or --preset is required"),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(list) = &self.policy {
            cfg.policies = parse_policies(list)?
                .iter()
                .map(Policy::to_string)
                .collect();
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.display().to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output_path {
        Some(p) => {
            let path = Path::new(p);
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn write_rows(cfg: &ExperimentConfig, rows: &[SweepRow]) -> Result<()> {
    let mut out = output(cfg)?;
    out.write_all(sim::rows_to_csv(rows)?.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn print_plan(out: &mut impl Write, label: &str, plan: &SensingPlan) -> io::Result<()> {
    writeln!(
        out,
        "policy {label}  kappa {}  expected_utility {:.6}",
        plan.kappa(),
        plan.expected_utility
    )?;
    writeln!(
        out,
        "{:>5}  {:<16} {:>12} {:>10} {:>10} {:>10}",
        "cycle", "members", "gamma", "alpha", "beta_max", "u_C"
    )?;
    for (k, c) in plan.cycles.iter().enumerate() {
        let members = c
            .members
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        writeln!(
            out,
            "{k:>5}  {members:<16} {:>12.6} {:>10.6} {:>10.6} {:>10.6}",
            c.threshold, c.alpha, c.beta_max, c.unit_utility
        )?;
    }
    writeln!(out)
}

fn plan(cfg: &ExperimentConfig) -> Result<()> {
    let ens = draw_ensemble(cfg, 0)?;
    let mut sizes: Vec<usize> = cfg
        .parsed_policies()?
        .iter()
        .filter_map(|p| p.cycle_size())
        .collect();
    sizes.sort_unstable();
    sizes.dedup();
    let policies: Vec<Policy> = sizes
        .iter()
        .map(|&l| if l == 1 { Policy::Di } else { Policy::Gt(l) })
        .collect();
    let plans = PlanSet::for_policies(&ens, &policies, cfg)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "mode {}  resources {}  horizon {}  phi_min {:.6}",
        ens.mode(),
        ens.len(),
        ens.horizon(),
        ens.phi_min()
    )?;
    writeln!(out)?;
    for (p, l) in policies.iter().zip(&sizes) {
        print_plan(&mut out, &p.to_string(), plans.get(*l)?)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Plan(args) => plan(&args.load()?),
        Command::Simulate(args) => {
            let cfg = args.load()?;
            let run = sim::monte_carlo(&cfg)?;
            let rows: Vec<SweepRow> = run
                .summaries
                .iter()
                .map(|s| SweepRow::from_summary(0.0, s))
                .collect();
            write_rows(&cfg, &rows)
        }
        Command::Sweep(args) => {
            let cfg = args.load()?;
            let out = output(&cfg)?;
            sim::sweep_to_writer(&cfg, out)?;
            Ok(())
        }
        Command::Roc(args) => {
            let cfg = args.load()?;
            let rows = sim::roc(&cfg)?;
            write_rows(&cfg, &rows)
        }
    }
}
