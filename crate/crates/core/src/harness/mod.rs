// SPDX-License-Identifier: Apache-2.0

//! Experiment configs, seeded replication, report files and the CLI.

mod attack;
mod cli;
mod config;
mod replicate;
mod report;

pub use attack::{attack_demo_config, attack_vs_baseline, AttackSummary, DEMO_ARMS, DEMO_HORIZON, DEMO_LAMBDA_SCALE, DEMO_SEEDS};
pub use cli::{cli_main, OUT_DIR_ENV};
pub use config::{load_config, ExperimentConfig, DEFAULT_DELTA, DEFAULT_LAMBDA_SCALE};
pub use replicate::{
    evaluate, quantile_sorted, replicate, run_seed, AggregateReport, Aggregates, SeedOutcome, SeedRow,
};
pub use report::{
    aggregates_from_regret_csv, check_run_dir, emit_reports, epochs_from_rows, read_epochs_csv, read_regret_csv,
    read_summary, BoundsReport, EpochCsvRow, RegretCsvRow, SeedBounds, EPOCHS_CSV, REGRET_CSV, SUMMARY_JSON,
};
