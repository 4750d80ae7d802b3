//! `odsample evaluate`: score an existing sample file against a pool.

use std::path::PathBuf;

use clap::Args;
use nalgebra::DVector;
use serde_json::json;

use odsample::{fit_ols, gram::trace_product, GramState, OlsFit, PredictionSet};

use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, ingest_point_set, parse_coefficients, read_sample_idx};
use crate::manifest::{ensure_out_dir, write_artifact, RunManifest};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Sample file: one 0-based row index per line.
    #[arg(long)]
    pub sample: PathBuf,
    /// Response column name (in the pool and, when present, in the sets).
    #[arg(long)]
    pub response: Option<String>,
    /// Row identifier column name.
    #[arg(long = "id-col")]
    pub id_col: Option<String>,
    #[arg(long = "prediction-set")]
    pub prediction_set: Option<PathBuf>,
    #[arg(long = "test-set")]
    pub test_set: Option<PathBuf>,
    /// True coefficients as a comma-separated list (intercept first).
    #[arg(long = "beta-true")]
    pub beta_true: Option<String>,
    /// True noise standard deviation.
    #[arg(long = "sigma-true")]
    pub sigma_true: Option<f64>,
    /// Optional directory for metrics.csv and a manifest.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

struct SetWithResponses {
    points: PredictionSet,
    responses: Option<DVector<f64>>,
}

fn set_errors(
    fit: &OlsFit,
    set: &SetWithResponses,
    beta_true: Option<&DVector<f64>>,
) -> (Option<f64>, Option<f64>) {
    let m = set.points.n_points();
    let spe = beta_true.map(|beta| {
        (0..m)
            .map(|i| {
                let x = set.points.point(i);
                let d = fit.predict(x) - beta.dot(&x);
                d * d
            })
            .sum::<f64>()
            / m as f64
    });
    let se = set.responses.as_ref().map(|y| {
        (0..m)
            .map(|i| {
                let d = fit.predict(set.points.point(i)) - y[i];
                d * d
            })
            .sum::<f64>()
            / m as f64
    });
    (spe, se)
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let ingested = ingest_csv(
        &args.input,
        args.response.as_deref(),
        args.id_col.as_deref(),
    )?;
    let dataset = ingested.dataset;
    let sample = read_sample_idx(&args.sample, dataset.n_rows())?;
    let state = GramState::build(&dataset, &sample)?;

    let beta_true = args
        .beta_true
        .as_deref()
        .map(parse_coefficients)
        .transpose()?;
    if let Some(beta) = &beta_true {
        if beta.len() != dataset.dim() {
            return Err(CliError::ShapeMismatch(format!(
                "--beta-true has {} entries, the design has {} columns",
                beta.len(),
                dataset.dim()
            )));
        }
    }

    let load_set = |path: &Option<PathBuf>| -> Result<Option<SetWithResponses>> {
        match path {
            None => Ok(None),
            Some(p) => {
                let (points, responses) =
                    ingest_point_set(p, &ingested.factor_names, args.response.as_deref())?;
                Ok(Some(SetWithResponses { points, responses }))
            }
        }
    };
    let pred = load_set(&args.prediction_set)?;
    let test = load_set(&args.test_set)?;

    let fit = if dataset.response().is_some() && sample.len() > dataset.dim() {
        Some(fit_ols(&dataset, &sample)?)
    } else {
        None
    };

    let mut columns: Vec<(&str, String)> = vec![
        ("n", sample.len().to_string()),
        ("log_det", state.log_det().to_string()),
    ];
    if let Some(pred) = &pred {
        let trace =
            trace_product(state.gram_inv(), pred.points.cross()) / pred.points.n_points() as f64;
        columns.push(("trace_x0", trace.to_string()));
        if let Some(sigma) = args.sigma_true {
            columns.push(("mspe_x0", (sigma * sigma * trace).to_string()));
        }
    }
    if let Some(fit) = &fit {
        if let Some(pred) = &pred {
            let (spe, se) = set_errors(fit, pred, beta_true.as_ref());
            if let Some(v) = spe {
                columns.push(("spe_x0", v.to_string()));
            }
            if let Some(v) = se {
                columns.push(("se_d0", v.to_string()));
            }
        }
        if let Some(test) = &test {
            let (spe, se) = set_errors(fit, test, beta_true.as_ref());
            if let Some(v) = spe {
                columns.push(("spe_xt", v.to_string()));
            }
            if let Some(v) = se {
                columns.push(("se_dt", v.to_string()));
            }
        }
    }

    let header: Vec<&str> = columns.iter().map(|(name, _)| *name).collect();
    let values: Vec<&str> = columns.iter().map(|(_, v)| v.as_str()).collect();
    let rendered = format!("{}\n{}\n", header.join(","), values.join(","));
    print!("{rendered}");

    if let Some(out_dir) = &args.out_dir {
        ensure_out_dir(out_dir)?;
        let mut manifest = RunManifest::new(
            "evaluate",
            0,
            json!({
                "input": args.input.display().to_string(),
                "sample": args.sample.display().to_string(),
                "response": args.response,
                "prediction_set": args.prediction_set.as_ref().map(|p| p.display().to_string()),
                "test_set": args.test_set.as_ref().map(|p| p.display().to_string()),
                "beta_true": args.beta_true,
                "sigma_true": args.sigma_true,
            }),
        );
        manifest.record_input(&args.input)?;
        manifest.record_input(&args.sample)?;
        if let Some(p) = &args.prediction_set {
            manifest.record_input(p)?;
        }
        if let Some(p) = &args.test_set {
            manifest.record_input(p)?;
        }
        write_artifact(&mut manifest, out_dir, "metrics.csv", &rendered)?;
        manifest.write(out_dir)?;
    }
    Ok(())
}
