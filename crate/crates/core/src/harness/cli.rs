// SPDX-License-Identifier: Apache-2.0

//! `robust-bandits` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::attack::{attack_demo_config, attack_vs_baseline, DEMO_SEEDS};
use super::config::load_config;
use super::replicate::replicate;
use super::report::{check_run_dir, emit_reports};
use crate::error::{Error, Result};

/// Environment variable naming the output directory when neither `--out`
/// nor the config sets one.
pub const OUT_DIR_ENV: &str = "ROBUST_BANDITS_OUT";

#[derive(Debug, Parser)]
#[command(name = "robust-bandits", version, about = "Corrupted stochastic bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a TOML experiment config and write regret.csv, epochs.csv, summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the seed list with replicates 0..N.
        #[arg(long)]
        seeds: Option<u64>,
        /// Worker threads; 0 uses every core. Output does not depend on it.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Epoch-targeting attack on BARBAR next to its uncorrupted baseline.
    AttackDemo {
        #[arg(long, default_value_t = DEMO_SEEDS)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check epoch invariants on an existing run directory.
    CheckBounds {
        dir: PathBuf,
    },
}

fn out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or(config)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn cmd_run(config: &Path, seeds: Option<u64>, workers: usize, out: Option<PathBuf>) -> Result<i32> {
    let mut cfg = load_config(config)?;
    if let Some(n) = seeds {
        cfg = cfg.with_seed_count(n)?;
    }
    let dir = out_dir(out, cfg.out_dir.clone());
    let report = replicate(&cfg, workers)?;
    print_written(&emit_reports(&report, &dir)?);
    let agg = &report.aggregates;
    println!(
        "{} vs {}: {} seeds, mean pseudo-regret {:.3}, mean C {:.3}",
        cfg.algo.key(),
        cfg.adversary.key(),
        agg.seeds,
        agg.mean_final_pseudo_regret,
        agg.mean_realized_c
    );
    if let Some(f) = agg.event_e_pass_fraction {
        println!("event E held on {:.1}% of seeds", 100.0 * f);
    }
    Ok(0)
}

fn cmd_attack_demo(seeds: u64, workers: usize, out: Option<PathBuf>) -> Result<i32> {
    if seeds == 0 {
        return Err(Error::validation("seeds", "at least one seed is required"));
    }
    let dir = out_dir(out, None);
    let cfg = attack_demo_config(seeds);
    let (attacked, baseline, summary) = attack_vs_baseline(&cfg, workers)?;
    print_written(&emit_reports(&attacked, &dir.join("attacked"))?);
    print_written(&emit_reports(&baseline, &dir.join("baseline"))?);
    let path = dir.join("attack_summary.json");
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Format {
        path: path.clone(),
        message: e.to_string(),
    })?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    println!("wrote {}", path.display());
    println!(
        "regret inflation factor {:.2} (attacked {:.1}, baseline {:.1}); excess / ((K-1) C) = {:.3}",
        summary.inflation_factor, summary.mean_attacked_regret, summary.mean_baseline_regret, summary.excess_per_kc
    );
    Ok(0)
}

fn cmd_check_bounds(dir: &Path) -> Result<i32> {
    let report = check_run_dir(dir)?;
    let checked: usize = report
        .seeds
        .iter()
        .map(|s| s.epoch_lengths.checked + s.gap_bounds.checked)
        .sum();
    println!(
        "{} seeds, {checked} epoch checks, event E held on {:.1}% of seeds",
        report.seeds.len(),
        100.0 * report.event_e_pass_fraction
    );
    if report.passed() {
        println!("all invariants hold");
        Ok(0)
    } else {
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        Ok(1)
    }
}

/// Entry point behind the binary. Exit codes: 0 success, 1 runtime error
/// or invariant violation, 2 usage error.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            seeds,
            workers,
            out,
        } => cmd_run(&config, seeds, workers, out),
        Command::AttackDemo { seeds, workers, out } => cmd_attack_demo(seeds, workers, out),
        Command::CheckBounds { dir } => cmd_check_bounds(&dir),
    };
    match result {
        Ok(code) => code,
        Err(e @ (Error::ConfigParse { .. } | Error::ConfigValidation { .. })) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
