//! `ipm` — batch driver for single runs, relaxation sweeps, inequality
//! verification and the self-test.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use ipm_core::harness::{
    relax_sweep, run_single, selftest, verify_suite, ExperimentConfig, GridSpec, Recipe, RunKind,
    SelftestOptions, VerifyConfig,
};

#[derive(Parser)]
#[command(name = "ipm", version, about = "IPM and damped Boussinesq experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the damped Boussinesq system for the first ε of the list.
    RunBoussinesq(Common),
    /// Integrate the porous-media equation.
    RunIpm(Common),
    /// Sweep ε and compare the rescaled solutions with the IPM reference.
    RelaxSweep(Common),
    /// Run the Littlewood–Paley inequality verifiers.
    Verify(VerifyArgs),
    /// Quick internal consistency checks.
    Selftest {
        /// Deliberately corrupt the R₁ symbol (test hook).
        #[arg(long, hide = true)]
        corrupt_multiplier: bool,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random-band initial data.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated ε values, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Square grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Final time.
    #[arg(long)]
    tend: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Offset added to the field seeds.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)
                .with_context(|| format!("reading config {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(n) = self.grid {
            cfg.grid = GridSpec { nx: n, ny: n, ..cfg.grid };
        }
        if let Some(t) = self.tend {
            cfg.scheme.t_end = t;
        }
        if let Some(eps) = &self.eps {
            cfg.eps_list = eps.clone();
        }
        if let Some(s) = self.seed {
            match &mut cfg.initial {
                Recipe::RandomBand { seed, .. } => *seed = s,
                _ => eprintln!("note: --seed only affects random_band initial data"),
            }
        }
        cfg.validate().context("invalid configuration")?;
        Ok(cfg)
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::RunBoussinesq(c) => single(&c, RunKind::Boussinesq),
        Command::RunIpm(c) => single(&c, RunKind::Ipm),
        Command::RelaxSweep(c) => {
            let cfg = c.resolve()?;
            let report = relax_sweep(&cfg)?;
            let path = cfg.output_dir.join("relax.json");
            write_json(&path, &report)?;
            for (i, e) in report.eps.iter().enumerate() {
                println!(
                    "eps {e:<10} err_low {:.4e}  err_high {:.4e}  darcy {:.4e}",
                    report.err_low[i], report.err_high[i], report.darcy_l1t[i]
                );
            }
            println!(
                "fitted orders: err_low {:.3}, err_high {:.3}, darcy {:.3}",
                report.order.err_low, report.order.err_high, report.order.darcy_l1t
            );
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Verify(v) => {
            let mut cfg = VerifyConfig::default();
            if let Some(n) = v.grid {
                cfg.grid = n;
            }
            if let Some(s) = v.seed {
                cfg.seed_offset = s;
            }
            let report = verify_suite(&cfg)?;
            let path = v.out.unwrap_or_else(|| "out".into()).join("verify.json");
            write_json(&path, &report)?;
            for case in &report.cases {
                println!("{:<36} growth {:>8.3}", case.case, case.growth);
            }
            println!("{} ({})", if report.passed { "PASS" } else { "FAIL" }, path.display());
            Ok(report.passed)
        }
        Command::Selftest { corrupt_multiplier } => {
            let report = selftest(SelftestOptions { corrupt_multiplier });
            for c in &report.checks {
                println!("{:<24} {:<4}  {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.detail);
            }
            let failed: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                println!("selftest: all {} checks passed", report.checks.len());
            } else {
                println!("selftest: failed: {}", failed.join(", "));
            }
            Ok(report.passed())
        }
    }
}

fn single(c: &Common, kind: RunKind) -> Result<bool> {
    let cfg = c.resolve()?;
    let summary = run_single(&cfg, kind)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if summary.validated_regime == Some(false) {
        eprintln!("warning: X(T) > 10 M(0), run is outside the validated small-data regime");
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
