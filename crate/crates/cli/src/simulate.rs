//! `odsample simulate`: generate the built-in scenarios and, for the study,
//! run the five-strategy comparison.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use odsample::{gen_example1, gen_study_cell, run_study, MetricsRow, StudyConfig};

use crate::common::{render_sample, resolve_seed};
use crate::error::{CliError, Result};
use crate::manifest::{ensure_out_dir, write_artifact, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Simple regression pool with planted extreme rows.
    Example1,
    /// Ten-factor contamination study comparing the five strategies.
    Study,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: Scenario,
    /// Pool size per dataset.
    #[arg(long = "N")]
    pub n_rows: Option<usize>,
    /// Planted contaminated rows per dataset.
    #[arg(long = "N2")]
    pub n_contaminated: Option<usize>,
    /// Dataset replicates (study only).
    #[arg(long = "H")]
    pub n_datasets: Option<usize>,
    /// Response replicates per dataset (study only).
    #[arg(long = "S")]
    pub n_responses: Option<usize>,
    /// Subsample size (study only).
    #[arg(long)]
    pub n: Option<usize>,
    /// Prediction-set size (study only).
    #[arg(long = "N0")]
    pub prediction_points: Option<usize>,
    /// Test-set size (study only).
    #[arg(long = "NT")]
    pub test_points: Option<usize>,
    /// SRS replicates per cell (study only).
    #[arg(long = "n-srs")]
    pub srs_replicates: Option<usize>,
    /// Candidates per iteration (study only, default 2n).
    #[arg(long = "n-tilde")]
    pub n_tilde: Option<usize>,
    /// Iteration budget (study only, default 10n).
    #[arg(long = "t-max")]
    pub t_max: Option<usize>,
    #[arg(long)]
    pub nu1: Option<f64>,
    #[arg(long)]
    pub nu2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write every generated pool as CSV.
    #[arg(long = "emit-data")]
    pub emit_data: bool,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    match args.scenario {
        Scenario::Example1 => run_example1(args),
        Scenario::Study => run_study_scenario(args),
    }
}

fn run_example1(args: &SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let seed = resolve_seed(args.seed)?;
    let n_rows = args.n_rows.unwrap_or(10_000);
    let n_contaminated = args.n_contaminated.unwrap_or(10);
    if n_rows == 0 {
        return Err(CliError::Config("--N must be positive".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let data = gen_example1(n_rows, n_contaminated, &mut rng)?;

    ensure_out_dir(&args.out_dir)?;
    let mut manifest = RunManifest::new(
        "simulate",
        seed,
        json!({
            "scenario": "example1",
            "N": n_rows,
            "N2": n_contaminated,
        }),
    );
    let mut csv = String::from("x,y\n");
    let y = data.dataset.response().expect("generator attaches responses");
    for i in 0..n_rows {
        let _ = writeln!(csv, "{},{}", data.dataset.row(i)[1], y[i]);
    }
    write_artifact(&mut manifest, &args.out_dir, "example1.csv", &csv)?;
    write_artifact(
        &mut manifest,
        &args.out_dir,
        "planted.idx",
        &render_sample(&data.planted),
    )?;
    manifest.write(&args.out_dir)?;
    println!(
        "simulate example1: N={n_rows} N2={n_contaminated} wall_ms={}",
        started.elapsed().as_millis()
    );
    Ok(())
}

fn study_config(args: &SimulateArgs, seed: u64) -> StudyConfig {
    let mut cfg = StudyConfig::desk_scale();
    cfg.seed = seed;
    if let Some(v) = args.n_rows {
        cfg.n_rows = v;
    }
    if let Some(v) = args.n_contaminated {
        cfg.n_contaminated = v;
    }
    if let Some(v) = args.n_datasets {
        cfg.n_datasets = v;
    }
    if let Some(v) = args.n_responses {
        cfg.n_responses = v;
    }
    if let Some(v) = args.n {
        cfg.sample_size = v;
    }
    if let Some(v) = args.prediction_points {
        cfg.prediction_points = v;
    }
    if let Some(v) = args.test_points {
        cfg.test_points = v;
    }
    if let Some(v) = args.srs_replicates {
        cfg.srs_replicates = v;
    }
    if let Some(v) = args.n_tilde {
        cfg.n_tilde = Some(v);
    }
    if let Some(v) = args.t_max {
        cfg.t_max = Some(v);
    }
    if let Some(v) = args.nu1 {
        cfg.nu1 = v;
    }
    if let Some(v) = args.nu2 {
        cfg.nu2 = v;
    }
    cfg
}

fn metrics_line(row: &MetricsRow) -> String {
    format!(
        "{},{},{},{},{},{},{}\n",
        row.strategy, row.mspe_x0, row.log_det, row.spe_x0, row.spe_xt, row.se_d0, row.se_dt
    )
}

const METRICS_HEADER: &str = "strategy,mspe_x0,log_det,spe_x0,spe_xt,se_d0,se_dt";

fn run_study_scenario(args: &SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let seed = resolve_seed(args.seed)?;
    let cfg = study_config(args, seed);
    cfg.validate()?;

    let outcome = run_study(&cfg)?;

    ensure_out_dir(&args.out_dir)?;
    let mut manifest = RunManifest::new(
        "simulate",
        seed,
        json!({
            "scenario": "study",
            "N": cfg.n_rows,
            "N2": cfg.n_contaminated,
            "H": cfg.n_datasets,
            "S": cfg.n_responses,
            "n": cfg.sample_size,
            "N0": cfg.prediction_points,
            "NT": cfg.test_points,
            "n_srs": cfg.srs_replicates,
            "n_tilde": cfg.n_tilde(),
            "t_max": cfg.t_max,
            "nu1": cfg.nu1,
            "nu2": cfg.nu2,
            "sigma_main": cfg.sigma_main,
            "sigma_contaminated": cfg.sigma_contaminated,
            "beta_main": cfg.beta_main.as_slice(),
            "beta_contaminated": cfg.beta_contaminated.as_slice(),
        }),
    );

    let mut results = String::from(METRICS_HEADER);
    results.push('\n');
    for row in &outcome.averages {
        results.push_str(&metrics_line(row));
    }
    write_artifact(&mut manifest, &args.out_dir, "results.csv", &results)?;

    let mut cells = format!("h,s,{METRICS_HEADER}\n");
    for cell in &outcome.cells {
        for row in &cell.rows {
            let _ = write!(
                cells,
                "{},{},{}",
                cell.dataset_index,
                cell.response_index,
                metrics_line(row)
            );
        }
    }
    write_artifact(&mut manifest, &args.out_dir, "cells.csv", &cells)?;

    if args.emit_data {
        for h in 0..cfg.n_datasets {
            for s in 0..cfg.n_responses {
                let cell = gen_study_cell(&cfg, h, s)?;
                let ds = &cell.data.dataset;
                let y = ds.response().expect("study cells carry responses");
                let mut body = String::new();
                for j in 1..=10 {
                    let _ = write!(body, "x{j}{}", if j == 10 { "" } else { "," });
                }
                body.push_str(",y\n");
                // header then rows; the intercept column is implicit
                let mut csv = body;
                for i in 0..ds.n_rows() {
                    let row = ds.row(i);
                    for j in 1..=10 {
                        let _ = write!(csv, "{},", row[j]);
                    }
                    let _ = writeln!(csv, "{}", y[i]);
                }
                write_artifact(
                    &mut manifest,
                    &args.out_dir,
                    &format!("study_data_h{h}_s{s}.csv"),
                    &csv,
                )?;
                if s == 0 {
                    write_artifact(
                        &mut manifest,
                        &args.out_dir,
                        &format!("study_planted_h{h}.idx"),
                        &render_sample(&cell.data.planted),
                    )?;
                }
            }
        }
    }

    let checksums: Vec<_> = outcome
        .cells
        .iter()
        .map(|c| {
            json!({
                "h": c.dataset_index,
                "s": c.response_index,
                "checksum": c.checksum,
            })
        })
        .collect();
    manifest.extra = json!({ "cell_checksums": checksums });
    manifest.write(&args.out_dir)?;

    println!("{METRICS_HEADER}");
    for row in &outcome.averages {
        print!("{}", metrics_line(row));
    }
    println!(
        "simulate study: cells={} wall_ms={}",
        outcome.cells.len(),
        started.elapsed().as_millis()
    );
    Ok(())
}
