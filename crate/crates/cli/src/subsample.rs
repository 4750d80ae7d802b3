//! `odsample subsample`: select `n` rows from a CSV pool.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use odsample::{
    init_sample, run_exchange, run_informative, CookThreshold, CriterionConfig, CriterionKind,
    GramState,
};

use crate::common::{render_sample, render_trace, resolve_seed};
use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, ingest_point_set};
use crate::manifest::{ensure_out_dir, write_artifact, RunManifest};

#[derive(Debug, Args)]
pub struct SubsampleArgs {
    /// Pool CSV (header row; all columns are factors unless claimed).
    #[arg(long)]
    pub input: PathBuf,
    /// Subsample size.
    #[arg(long)]
    pub n: usize,
    /// Optimality criterion: d | i.
    #[arg(long)]
    pub criterion: String,
    /// Screen tentative exchanges with Cook's distance (requires --response).
    #[arg(long)]
    pub informative: bool,
    /// High-leverage multiplier; `inf` disables the cap.
    #[arg(long, default_value_t = 2.0)]
    pub nu1: f64,
    /// Initialization multiplier.
    #[arg(long, default_value_t = 3.0)]
    pub nu2: f64,
    /// Candidates drawn per iteration (default 2n).
    #[arg(long = "n-tilde")]
    pub n_tilde: Option<usize>,
    /// Iteration budget (default 10n).
    #[arg(long = "t-max")]
    pub t_max: Option<usize>,
    /// Cook's distance cut-off (default 4/n).
    #[arg(long = "cook-threshold")]
    pub cook_threshold: Option<f64>,
    /// Updates between Gram rebuilds.
    #[arg(long = "rebuild-period", default_value_t = 100)]
    pub rebuild_period: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Prediction points CSV (required for --criterion i).
    #[arg(long = "prediction-set")]
    pub prediction_set: Option<PathBuf>,
    /// Response column name.
    #[arg(long)]
    pub response: Option<String>,
    /// Row identifier column name.
    #[arg(long = "id-col")]
    pub id_col: Option<String>,
    /// Fail instead of warn when initialization exhausts its budget.
    #[arg(long = "strict-init")]
    pub strict_init: bool,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}

pub fn run(args: &SubsampleArgs) -> Result<()> {
    let started = Instant::now();
    let kind = match args.criterion.as_str() {
        "d" | "D" => CriterionKind::D,
        "i" | "I" => CriterionKind::I,
        other => {
            return Err(CliError::Config(format!(
                "unknown criterion '{other}', expected 'd' or 'i'"
            )));
        }
    };
    if kind == CriterionKind::I && args.prediction_set.is_none() {
        return Err(CliError::Config(
            "--criterion i requires --prediction-set".into(),
        ));
    }
    if args.informative && args.response.is_none() {
        return Err(CliError::MissingResponse(
            "--informative requires --response".into(),
        ));
    }
    let seed = resolve_seed(args.seed)?;

    let ingested = ingest_csv(
        &args.input,
        args.response.as_deref(),
        args.id_col.as_deref(),
    )?;
    let dataset = ingested.dataset;
    let prediction_set = match &args.prediction_set {
        Some(path) => Some(ingest_point_set(path, &ingested.factor_names, None)?.0),
        None => None,
    };

    let n_tilde = args
        .n_tilde
        .unwrap_or_else(|| (2 * args.n).min(dataset.n_rows().saturating_sub(args.n)));
    let cfg = CriterionConfig {
        kind,
        nu1: args.nu1,
        nu2: args.nu2,
        n_tilde,
        cook_threshold: match args.cook_threshold {
            Some(v) => CookThreshold::Fixed(v),
            None => CookThreshold::FourOverN,
        },
        t_max: args.t_max,
        rebuild_period: args.rebuild_period,
        seed,
        prediction_set,
        strict_init: args.strict_init,
    };

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let init = init_sample(&dataset, args.n, &cfg, &mut rng)?;
    let result = if args.informative {
        run_informative(&dataset, args.n, &cfg, &init.sample, &mut rng)?
    } else {
        run_exchange(&dataset, args.n, &cfg, &init.sample, &mut rng)?
    };

    let final_state = GramState::build(&dataset, &result.sample)?;
    let max_leverage = result
        .sample
        .iter()
        .map(|&i| final_state.leverage_of(&dataset, i))
        .fold(f64::NEG_INFINITY, f64::max);

    ensure_out_dir(&args.out_dir)?;
    let config_echo = json!({
        "input": args.input.display().to_string(),
        "n": args.n,
        "criterion": if kind == CriterionKind::D { "d" } else { "i" },
        "informative": args.informative,
        "nu1": args.nu1,
        "nu2": args.nu2,
        "n_tilde": n_tilde,
        "t_max": cfg.t_max_for(args.n),
        "cook_threshold": cfg.cook_threshold.value(args.n),
        "rebuild_period": args.rebuild_period,
        "response": args.response,
        "id_col": args.id_col,
        "prediction_set": args.prediction_set.as_ref().map(|p| p.display().to_string()),
        "strict_init": args.strict_init,
    });
    let mut manifest = RunManifest::new("subsample", seed, config_echo);
    manifest.record_input(&args.input)?;
    if let Some(path) = &args.prediction_set {
        manifest.record_input(path)?;
    }
    write_artifact(
        &mut manifest,
        &args.out_dir,
        "sample.idx",
        &render_sample(&result.sample),
    )?;
    write_artifact(
        &mut manifest,
        &args.out_dir,
        "trace.csv",
        &render_trace(&result.trace),
    )?;
    write_artifact(
        &mut manifest,
        &args.out_dir,
        "init_trace.csv",
        &render_trace(&init.trace),
    )?;
    manifest.extra = json!({
        "init_converged": init.converged,
        "init_iterations": init.iterations_run,
        "converged": result.converged,
        "iterations": result.iterations_run,
        "final_log_det": result.final_log_det,
        "final_trace_criterion": result.final_trace_criterion,
        "max_leverage": max_leverage,
    });
    manifest.write(&args.out_dir)?;

    println!(
        "subsample: n={} iterations={} converged={} log_det={:.6} max_leverage={:.6} wall_ms={}",
        result.sample.len(),
        result.iterations_run,
        result.converged,
        result.final_log_det,
        max_leverage,
        started.elapsed().as_millis()
    );
    Ok(())
}
