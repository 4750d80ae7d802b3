//! Synthetic data generators, evaluation metrics, and the contamination
//! study harness.
//!
//! Two generators are provided. The simple-regression generator
//! ([`gen_example1`]) plants a handful of rows whose covariate values sit far
//! outside the bulk and whose responses follow a sign-flipped slope: an
//! unconstrained D-exchange chases exactly those rows, a leverage-capped one
//! avoids them. The ten-factor generator ([`gen_study_x`] / [`gen_study_y`])
//! plants rows with mildly wider covariates but wildly different responses,
//! so only response-aware (informative) selection can avoid them.
//!
//! [`run_study`] runs all five selection strategies over a grid of generated
//! datasets and response replicates, evaluating each selected sample on
//! uncontaminated prediction and test sets. Cells of the grid are independent
//! and run in parallel; each derives its own random stream from
//! `(seed, h, s)`, so parallel and serial runs produce identical tables.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, Normal, Poisson, Uniform};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::criteria::{CookThreshold, CriterionConfig, CriterionKind};
use crate::dataset::{Dataset, PredictionSet};
use crate::diagnostics::{fit_ols, OlsFit};
use crate::error::{Error, Result};
use crate::gram::{trace_product, GramState, DEFAULT_REBUILD_PERIOD};
use crate::sampler::{init_sample, run_exchange, run_informative, srs};

/// Bulk regression line of the simple-regression generator.
pub const EXAMPLE1_BETA_BULK: [f64; 2] = [1.5, 2.7];
/// Sign-flipped line driving the planted responses.
pub const EXAMPLE1_BETA_PLANTED: [f64; 2] = [1.5, -2.7];
/// Bulk covariates: mean 3, standard deviation 2.
pub const EXAMPLE1_X_MEAN: f64 = 3.0;
pub const EXAMPLE1_X_SD_BULK: f64 = 2.0;
/// Bulk noise standard deviation.
pub const EXAMPLE1_NOISE_SD_BULK: f64 = 9.0;
/// Scale of the planted covariate deviations.
pub const EXAMPLE1_X_SD_PLANTED: f64 = 20.0;
/// Planted covariate deviations are resampled until they clear this margin,
/// six bulk standard deviations, so every planted row is an unambiguous
/// leverage point rather than a borderline one.
pub const EXAMPLE1_X_MIN_DEV: f64 = 12.0;
/// Planted noise standard deviation.
pub const EXAMPLE1_NOISE_SD_PLANTED: f64 = 20.0;

/// A generated dataset plus the indices of its planted contaminated rows.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub dataset: Dataset,
    /// Always the last rows of the dataset, ascending.
    pub planted: Vec<usize>,
}

/// Simple linear regression pool with `n_contaminated` planted rows at the
/// end: extreme covariates on a sign-flipped, noisier line.
pub fn gen_example1(
    n_rows: usize,
    n_contaminated: usize,
    rng: &mut impl Rng,
) -> Result<GeneratedData> {
    if n_contaminated >= n_rows {
        return Err(Error::Config(format!(
            "{n_contaminated} contaminated rows leave no bulk in {n_rows}"
        )));
    }
    let bulk = n_rows - n_contaminated;
    let x_bulk = Normal::new(EXAMPLE1_X_MEAN, EXAMPLE1_X_SD_BULK).unwrap();
    let noise_bulk = Normal::new(0.0, EXAMPLE1_NOISE_SD_BULK).unwrap();
    let dev_planted = Normal::new(0.0, EXAMPLE1_X_SD_PLANTED).unwrap();
    let noise_planted = Normal::new(0.0, EXAMPLE1_NOISE_SD_PLANTED).unwrap();

    let mut xs = Vec::with_capacity(n_rows);
    let mut ys = Vec::with_capacity(n_rows);
    for _ in 0..bulk {
        let x = x_bulk.sample(rng);
        xs.push(x);
        ys.push(EXAMPLE1_BETA_BULK[0] + EXAMPLE1_BETA_BULK[1] * x + noise_bulk.sample(rng));
    }
    for _ in 0..n_contaminated {
        let dev = loop {
            let v = dev_planted.sample(rng);
            if v.abs() >= EXAMPLE1_X_MIN_DEV {
                break v;
            }
        };
        let x = EXAMPLE1_X_MEAN + dev;
        xs.push(x);
        ys.push(
            EXAMPLE1_BETA_PLANTED[0] + EXAMPLE1_BETA_PLANTED[1] * x + noise_planted.sample(rng),
        );
    }
    let dataset = Dataset::from_factors(
        DMatrix::from_column_slice(n_rows, 1, &xs),
        Some(DVector::from_vec(ys)),
    )?;
    Ok(GeneratedData {
        dataset,
        planted: (bulk..n_rows).collect(),
    })
}

/// Covariance of each bulk bivariate-normal block (factors 4-5 and 6-7).
pub const STUDY_SIGMA1: [[f64; 2]; 2] = [[9.0, -1.0], [-1.0, 9.0]];
/// The planted-row variant of the same blocks.
pub const STUDY_SIGMA1_PLANTED: [[f64; 2]; 2] = [[25.0, 1.0], [1.0, 25.0]];
/// Scale matrix of the bivariate t block (factors 8-9, 3 degrees of freedom).
pub const STUDY_SIGMA2: [[f64; 2]; 2] = [[1.0, 0.5], [0.5, 1.0]];
/// Number of factors of the study generator (plus one intercept).
pub const STUDY_FACTORS: usize = 10;

fn cholesky_2x2(m: [[f64; 2]; 2]) -> DMatrix<f64> {
    let mat = DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
    nalgebra::Cholesky::new(mat)
        .expect("covariance blocks are positive definite")
        .l()
}

/// Ten-factor covariate pool:
///
/// * factors 1-3: iid `U(0, 5)`;
/// * factors 4-5 and 6-7: independent bivariate normal blocks, zero mean,
///   covariance [`STUDY_SIGMA1`] (bulk) or [`STUDY_SIGMA1_PLANTED`] (last
///   `n_contaminated` rows);
/// * factors 8-9: one bivariate t draw per row, 3 degrees of freedom, scale
///   [`STUDY_SIGMA2`];
/// * factor 10: Poisson(5).
///
/// Columns are drawn in factor order, each column (or block) row by row.
pub fn gen_study_x(
    n_rows: usize,
    n_contaminated: usize,
    rng: &mut impl Rng,
) -> Result<GeneratedData> {
    if n_contaminated > n_rows {
        return Err(Error::Config(format!(
            "{n_contaminated} contaminated rows exceed {n_rows}"
        )));
    }
    let bulk = n_rows - n_contaminated;
    let uniform = Uniform::new(0.0, 5.0).unwrap();
    let standard = Normal::new(0.0, 1.0).unwrap();
    let chi3 = ChiSquared::new(3.0).unwrap();
    let poisson = Poisson::new(5.0).unwrap();
    let l_bulk = cholesky_2x2(STUDY_SIGMA1);
    let l_planted = cholesky_2x2(STUDY_SIGMA1_PLANTED);
    let l_t = cholesky_2x2(STUDY_SIGMA2);

    let mut factors = DMatrix::zeros(n_rows, STUDY_FACTORS);
    for j in 0..3 {
        for i in 0..n_rows {
            factors[(i, j)] = uniform.sample(rng);
        }
    }
    for block in 0..2 {
        let (c0, c1) = (3 + 2 * block, 4 + 2 * block);
        for i in 0..n_rows {
            let z0 = standard.sample(rng);
            let z1 = standard.sample(rng);
            let l = if i < bulk { &l_bulk } else { &l_planted };
            factors[(i, c0)] = l[(0, 0)] * z0;
            factors[(i, c1)] = l[(1, 0)] * z0 + l[(1, 1)] * z1;
        }
    }
    for i in 0..n_rows {
        let z0 = standard.sample(rng);
        let z1 = standard.sample(rng);
        let w: f64 = chi3.sample(rng);
        let scale = (3.0 / w).sqrt();
        factors[(i, 7)] = l_t[(0, 0)] * z0 * scale;
        factors[(i, 8)] = (l_t[(1, 0)] * z0 + l_t[(1, 1)] * z1) * scale;
    }
    for i in 0..n_rows {
        factors[(i, 9)] = poisson.sample(rng);
    }
    let dataset = Dataset::from_factors(factors, None)?;
    Ok(GeneratedData {
        dataset,
        planted: (bulk..n_rows).collect(),
    })
}

/// Responses for a study pool: the bulk follows `beta_main` with
/// `sigma_main` noise, the last `n_contaminated` rows follow
/// `beta_contaminated` with `sigma_contaminated` noise.
pub fn gen_study_y(
    dataset: &Dataset,
    cfg: &StudyConfig,
    n_contaminated: usize,
    rng: &mut impl Rng,
) -> Result<DVector<f64>> {
    let n_rows = dataset.n_rows();
    if n_contaminated > n_rows {
        return Err(Error::Config(format!(
            "{n_contaminated} contaminated rows exceed {n_rows}"
        )));
    }
    if cfg.beta_main.len() != dataset.dim() || cfg.beta_contaminated.len() != dataset.dim() {
        return Err(Error::ShapeMismatch(format!(
            "coefficient length {} does not match design dimension {}",
            cfg.beta_main.len(),
            dataset.dim()
        )));
    }
    let standard = Normal::new(0.0, 1.0).unwrap();
    let bulk = n_rows - n_contaminated;
    let mut y = DVector::zeros(n_rows);
    for i in 0..n_rows {
        let (beta, sigma) = if i < bulk {
            (&cfg.beta_main, cfg.sigma_main)
        } else {
            (&cfg.beta_contaminated, cfg.sigma_contaminated)
        };
        y[i] = beta.dot(&dataset.row(i)) + sigma * standard.sample(rng);
    }
    Ok(y)
}

/// Prediction or test points bundled with their realized (uncontaminated)
/// responses.
#[derive(Debug, Clone)]
pub struct LabeledSet {
    pub points: PredictionSet,
    pub responses: DVector<f64>,
}

impl LabeledSet {
    pub fn new(points: PredictionSet, responses: DVector<f64>) -> Result<Self> {
        if points.n_points() != responses.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} responses for {} points",
                responses.len(),
                points.n_points()
            )));
        }
        Ok(Self { points, responses })
    }
}

/// The five selection strategies compared by the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Strategy {
    NoninfI,
    NoninfD,
    InfI,
    InfD,
    Srs,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::NoninfI,
        Strategy::NoninfD,
        Strategy::InfI,
        Strategy::InfD,
        Strategy::Srs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::NoninfI => "noninf_I",
            Strategy::NoninfD => "noninf_D",
            Strategy::InfI => "inf_I",
            Strategy::InfD => "inf_D",
            Strategy::Srs => "SRS",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated sample: information metrics plus prediction errors against
/// the true surface (`spe_*`) and the realized responses (`se_*`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricsRow {
    pub strategy: Strategy,
    /// `sigma^2 trace[(X'X)^-1 X0'X0] / N0`.
    pub mspe_x0: f64,
    /// `log |X'X|` of the selected sample.
    pub log_det: f64,
    /// Mean squared error of predictions against `beta' x` on the prediction set.
    pub spe_x0: f64,
    /// Same on the test set.
    pub spe_xt: f64,
    /// Mean squared error against realized responses on the prediction set.
    pub se_d0: f64,
    /// Same on the test set.
    pub se_dt: f64,
}

/// Evaluates one selected sample against prediction and test sets.
pub fn compute_metrics(
    dataset: &Dataset,
    sample: &[usize],
    fit: &OlsFit,
    pred: &LabeledSet,
    test: &LabeledSet,
    sigma2_true: f64,
    beta_true: &DVector<f64>,
    strategy: Strategy,
) -> Result<MetricsRow> {
    if beta_true.len() != dataset.dim() {
        return Err(Error::ShapeMismatch(format!(
            "true coefficient length {} does not match design dimension {}",
            beta_true.len(),
            dataset.dim()
        )));
    }
    let state = GramState::build(dataset, sample)?;
    let n0 = pred.points.n_points() as f64;
    let mspe_x0 = sigma2_true * trace_product(state.gram_inv(), pred.points.cross()) / n0;

    let errors = |set: &LabeledSet| {
        let m = set.points.n_points();
        let mut spe = 0.0;
        let mut se = 0.0;
        for i in 0..m {
            let x = set.points.point(i);
            let pred_val = fit.predict(x);
            let mu = beta_true.dot(&x);
            spe += (pred_val - mu) * (pred_val - mu);
            se += (pred_val - set.responses[i]) * (pred_val - set.responses[i]);
        }
        (spe / m as f64, se / m as f64)
    };
    let (spe_x0, se_d0) = errors(pred);
    let (spe_xt, se_dt) = errors(test);

    Ok(MetricsRow {
        strategy,
        mspe_x0,
        log_det: state.log_det(),
        spe_x0,
        spe_xt,
        se_d0,
        se_dt,
    })
}

/// Full configuration of the contamination study.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    /// Pool size `N` of each generated dataset.
    pub n_rows: usize,
    /// Planted contaminated rows `N2` per dataset.
    pub n_contaminated: usize,
    /// Number of generated datasets `H`.
    pub n_datasets: usize,
    /// Response replicates `S` per dataset.
    pub n_responses: usize,
    /// Subsample size `n`.
    pub sample_size: usize,
    /// Prediction-set size `N0`.
    pub prediction_points: usize,
    /// Test-set size `NT`.
    pub test_points: usize,
    /// SRS replicates per cell.
    pub srs_replicates: usize,
    pub beta_main: DVector<f64>,
    pub beta_contaminated: DVector<f64>,
    pub sigma_main: f64,
    pub sigma_contaminated: f64,
    pub seed: u64,
    pub nu1: f64,
    pub nu2: f64,
    /// Candidate pool size; defaults to `2 n`.
    pub n_tilde: Option<usize>,
    /// Exchange iteration budget; defaults to `10 n`.
    pub t_max: Option<usize>,
    pub rebuild_period: usize,
}

impl StudyConfig {
    /// Defaults sized so the whole study runs in minutes on a desktop.
    pub fn desk_scale() -> Self {
        Self {
            n_rows: 100_000,
            n_contaminated: 50,
            n_datasets: 3,
            n_responses: 5,
            sample_size: 500,
            prediction_points: 500,
            test_points: 500,
            srs_replicates: 10,
            beta_main: DVector::from_row_slice(&[
                1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0,
            ]),
            beta_contaminated: DVector::from_row_slice(&[
                1.0, 1.0, 1.0, 1.0, -2.0, -2.0, -2.0, -2.0, 1.0, -1.0, -1.0,
            ]),
            sigma_main: 3.0,
            sigma_contaminated: 20.0,
            seed: 0,
            nu1: 2.0,
            nu2: 3.0,
            n_tilde: None,
            t_max: None,
            rebuild_period: DEFAULT_REBUILD_PERIOD,
        }
    }

    pub fn n_tilde(&self) -> usize {
        self.n_tilde.unwrap_or(2 * self.sample_size)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = STUDY_FACTORS + 1;
        if self.n_contaminated >= self.n_rows {
            return Err(Error::Config("contaminated rows must leave a bulk".into()));
        }
        if self.sample_size > self.n_rows || self.sample_size <= dim {
            return Err(Error::Config(format!(
                "sample size must lie in ({dim}, {}]",
                self.n_rows
            )));
        }
        if self.n_datasets == 0 || self.n_responses == 0 || self.srs_replicates == 0 {
            return Err(Error::Config("replicate counts must be positive".into()));
        }
        if self.prediction_points <= dim || self.test_points <= dim {
            return Err(Error::Config(format!(
                "prediction and test sets need more than {dim} points"
            )));
        }
        if self.beta_main.len() != dim || self.beta_contaminated.len() != dim {
            return Err(Error::Config(format!(
                "coefficient vectors must have length {dim}"
            )));
        }
        if !(self.sigma_main >= 0.0) || !(self.sigma_contaminated >= 0.0) {
            return Err(Error::Config("noise levels must be non-negative".into()));
        }
        Ok(())
    }
}

/// Metrics of all five strategies on one `(h, s)` cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub dataset_index: usize,
    pub response_index: usize,
    /// One row per strategy, in [`Strategy::ALL`] order; the SRS row is
    /// already averaged over its replicates.
    pub rows: Vec<MetricsRow>,
    /// Digest of every selected sample in this cell.
    pub checksum: String,
}

/// Monte-Carlo averaged study table plus the per-cell breakdown.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    /// One averaged row per strategy, in [`Strategy::ALL`] order.
    pub averages: Vec<MetricsRow>,
    pub cells: Vec<CellResult>,
}

/// Derives a named random stream from the study seed and cell coordinates.
fn stream(seed: u64, tag: &str, h: usize, s: usize) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(tag.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update((h as u64).to_le_bytes());
    hasher.update((s as u64).to_le_bytes());
    ChaCha12Rng::from_seed(hasher.finalize().into())
}

fn labeled_set(cfg: &StudyConfig, n_points: usize, rng: &mut impl Rng) -> Result<LabeledSet> {
    let data = gen_study_x(n_points, 0, rng)?;
    let y = gen_study_y(&data.dataset, cfg, 0, rng)?;
    let all: Vec<usize> = (0..n_points).collect();
    let points = PredictionSet::from_design(data.dataset.design_rows(&all))?;
    LabeledSet::new(points, y)
}

/// The data of one study cell: the contaminated pool with the `(h, s)`
/// responses attached, plus the cell's clean prediction and test sets.
///
/// Covariates depend on `h` only (response replicates share the pool), while
/// responses and the evaluation sets are per-cell. Regenerating a cell is
/// exactly what [`run_study`] evaluates internally.
#[derive(Debug, Clone)]
pub struct StudyCellData {
    pub data: GeneratedData,
    pub pred: LabeledSet,
    pub test: LabeledSet,
}

/// Regenerates the dataset and evaluation sets of cell `(h, s)`.
pub fn gen_study_cell(cfg: &StudyConfig, h: usize, s: usize) -> Result<StudyCellData> {
    let mut rng = stream(cfg.seed, "odsample.study.cell", h, s);
    gen_cell_data(cfg, h, &mut rng)
}

/// Draw order: the pool covariates come from the `h`-stream, then the cell
/// stream drives responses, the prediction set, the test set, and (inside
/// [`run_study`]) the five strategies.
fn gen_cell_data(cfg: &StudyConfig, h: usize, rng: &mut impl Rng) -> Result<StudyCellData> {
    let mut x_rng = stream(cfg.seed, "odsample.study.x", h, 0);
    let data = gen_study_x(cfg.n_rows, cfg.n_contaminated, &mut x_rng)?;
    let y = gen_study_y(&data.dataset, cfg, cfg.n_contaminated, rng)?;
    let dataset = data.dataset.with_response(y)?;
    let pred = labeled_set(cfg, cfg.prediction_points, rng)?;
    let test = labeled_set(cfg, cfg.test_points, rng)?;
    Ok(StudyCellData {
        data: GeneratedData {
            dataset,
            planted: data.planted,
        },
        pred,
        test,
    })
}

/// Runs the five strategies over every `(h, s)` cell and averages the
/// metrics. Cells run in parallel; the result does not depend on scheduling.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutcome> {
    cfg.validate()?;
    let cells_idx: Vec<(usize, usize)> = (0..cfg.n_datasets)
        .flat_map(|h| (0..cfg.n_responses).map(move |s| (h, s)))
        .collect();
    let cells: Vec<CellResult> = cells_idx
        .par_iter()
        .map(|&(h, s)| run_cell(cfg, h, s))
        .collect::<Result<Vec<_>>>()?;

    let mut averages = Vec::with_capacity(Strategy::ALL.len());
    let denom = cells.len() as f64;
    for (pos, strategy) in Strategy::ALL.iter().enumerate() {
        let mut acc = MetricsRow {
            strategy: *strategy,
            mspe_x0: 0.0,
            log_det: 0.0,
            spe_x0: 0.0,
            spe_xt: 0.0,
            se_d0: 0.0,
            se_dt: 0.0,
        };
        for cell in &cells {
            let row = &cell.rows[pos];
            acc.mspe_x0 += row.mspe_x0 / denom;
            acc.log_det += row.log_det / denom;
            acc.spe_x0 += row.spe_x0 / denom;
            acc.spe_xt += row.spe_xt / denom;
            acc.se_d0 += row.se_d0 / denom;
            acc.se_dt += row.se_dt / denom;
        }
        averages.push(acc);
    }
    Ok(StudyOutcome { averages, cells })
}

fn base_config(cfg: &StudyConfig, kind: CriterionKind, pred: Option<PredictionSet>) -> CriterionConfig {
    CriterionConfig {
        kind,
        nu1: cfg.nu1,
        nu2: cfg.nu2,
        n_tilde: cfg.n_tilde(),
        cook_threshold: CookThreshold::FourOverN,
        t_max: cfg.t_max,
        rebuild_period: cfg.rebuild_period,
        seed: cfg.seed,
        prediction_set: pred,
        strict_init: false,
    }
}

fn run_cell(cfg: &StudyConfig, h: usize, s: usize) -> Result<CellResult> {
    let mut rng = stream(cfg.seed, "odsample.study.cell", h, s);
    let n = cfg.sample_size;

    let cell = gen_cell_data(cfg, h, &mut rng)?;
    let (dataset, pred, test) = (cell.data.dataset, cell.pred, cell.test);

    let sigma2_true = cfg.sigma_main * cfg.sigma_main;
    let d_cfg = base_config(cfg, CriterionKind::D, None);
    let i_cfg = base_config(cfg, CriterionKind::I, Some(pred.points.clone()));

    let mut rows = Vec::with_capacity(Strategy::ALL.len());
    let mut hasher = Sha256::new();
    hasher.update(b"odsample.study.samples");

    for strategy in Strategy::ALL {
        let row = match strategy {
            Strategy::Srs => {
                let mut acc: Option<MetricsRow> = None;
                for _ in 0..cfg.srs_replicates {
                    let sample = srs(&dataset, n, &mut rng)?;
                    digest_sample(&mut hasher, strategy, &sample);
                    let fit = fit_ols(&dataset, &sample)?;
                    let row = compute_metrics(
                        &dataset,
                        &sample,
                        &fit,
                        &pred,
                        &test,
                        sigma2_true,
                        &cfg.beta_main,
                        strategy,
                    )?;
                    acc = Some(match acc {
                        None => row,
                        Some(a) => MetricsRow {
                            strategy,
                            mspe_x0: a.mspe_x0 + row.mspe_x0,
                            log_det: a.log_det + row.log_det,
                            spe_x0: a.spe_x0 + row.spe_x0,
                            spe_xt: a.spe_xt + row.spe_xt,
                            se_d0: a.se_d0 + row.se_d0,
                            se_dt: a.se_dt + row.se_dt,
                        },
                    });
                }
                let a = acc.expect("at least one SRS replicate");
                let d = cfg.srs_replicates as f64;
                MetricsRow {
                    strategy,
                    mspe_x0: a.mspe_x0 / d,
                    log_det: a.log_det / d,
                    spe_x0: a.spe_x0 / d,
                    spe_xt: a.spe_xt / d,
                    se_d0: a.se_d0 / d,
                    se_dt: a.se_dt / d,
                }
            }
            _ => {
                let run_cfg = match strategy {
                    Strategy::NoninfI | Strategy::InfI => &i_cfg,
                    _ => &d_cfg,
                };
                let init = init_sample(&dataset, n, run_cfg, &mut rng)?;
                let result = match strategy {
                    Strategy::NoninfI | Strategy::NoninfD => {
                        run_exchange(&dataset, n, run_cfg, &init.sample, &mut rng)?
                    }
                    _ => run_informative(&dataset, n, run_cfg, &init.sample, &mut rng)?,
                };
                digest_sample(&mut hasher, strategy, &result.sample);
                let fit = fit_ols(&dataset, &result.sample)?;
                compute_metrics(
                    &dataset,
                    &result.sample,
                    &fit,
                    &pred,
                    &test,
                    sigma2_true,
                    &cfg.beta_main,
                    strategy,
                )?
            }
        };
        rows.push(row);
    }

    Ok(CellResult {
        dataset_index: h,
        response_index: s,
        rows,
        checksum: hex_digest(hasher),
    })
}

fn digest_sample(hasher: &mut Sha256, strategy: Strategy, sample: &[usize]) {
    hasher.update(strategy.as_str().as_bytes());
    hasher.update((sample.len() as u64).to_le_bytes());
    for &i in sample {
        hasher.update((i as u64).to_le_bytes());
    }
}

fn hex_digest(hasher: Sha256) -> String {
    let bytes = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
