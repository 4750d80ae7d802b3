//! D- and I-criterion scoring: deletion scores, addition scores, and the
//! candidate-set membership test used by the exchange loop.
//!
//! For the D-criterion the deletion score of a sampled row is its leverage
//! `h_i = x_i' G x_i` (delete the minimum) and the addition score of a
//! candidate is its prediction variance under the downdated sample (add the
//! maximum); maximizing it maximizes the post-addition determinant.
//!
//! For the I-criterion both scores measure the change of
//! `trace[(X'X)^-1 X0'X0]` caused by removing or adding one row:
//!
//! * deletion: `h~_i = x_i' G W G x_i / (1 - x_i' G x_i)` with `W = X0'X0`
//!   (removing row `i` increases the trace by exactly `h~_i`);
//! * addition: `x_j' G- W G- x_j / (1 + x_j' G- x_j)` with `G-` the
//!   downdated inverse (adding row `j` decreases the trace by the score).
//!
//! A candidate `j` replacing sampled row `m` enters the exchange set when its
//! post-swap leverage stays below the high-leverage cap `nu1 (k+1)/n` and the
//! exchange is not immediately undone: for D the post-swap leverage must
//! strictly exceed `h_m`, for I the post-swap deletion score of `j` must
//! strictly exceed the pre-swap deletion score of `m`.

use nalgebra::{DMatrix, DVector, DVectorView};
use serde::Serialize;

use crate::dataset::{Dataset, PredictionSet};
use crate::error::{Error, Result};
use crate::gram::{quad_form, GramState, SwapScalars, DEFAULT_REBUILD_PERIOD, DEGENERATE_LEVERAGE_TOL};

/// Which optimality criterion drives the exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriterionKind {
    /// Maximize `log |X'X|`.
    D,
    /// Minimize the summed prediction variance over a prediction set.
    I,
}

/// Cut-off for Cook's distance in the informative filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CookThreshold {
    /// The practical `4/n` rule.
    FourOverN,
    /// A fixed cut-off, for sensitivity studies.
    Fixed(f64),
}

impl CookThreshold {
    pub fn value(&self, n: usize) -> f64 {
        match self {
            CookThreshold::FourOverN => 4.0 / n as f64,
            CookThreshold::Fixed(v) => *v,
        }
    }
}

/// Tuning knobs for sample initialization and the exchange loop.
#[derive(Debug, Clone)]
pub struct CriterionConfig {
    pub kind: CriterionKind,
    /// High-leverage multiplier: candidates must keep their post-swap leverage
    /// below `nu1 (k+1)/n`. `f64::INFINITY` disables the cap.
    pub nu1: f64,
    /// Initialization multiplier: the starting sample is exchanged until its
    /// maximum leverage drops below `nu2 (k+1)/n`.
    pub nu2: f64,
    /// Candidate pool size drawn fresh each iteration.
    pub n_tilde: usize,
    pub cook_threshold: CookThreshold,
    /// Iteration budget; defaults to `10 n` when unset.
    pub t_max: Option<usize>,
    /// Updates between from-scratch rebuilds of the Gram inverse.
    pub rebuild_period: usize,
    pub seed: u64,
    /// Required for the I-criterion.
    pub prediction_set: Option<PredictionSet>,
    /// Fail instead of warn when initialization hits its iteration budget.
    pub strict_init: bool,
}

impl CriterionConfig {
    pub fn d_criterion(n_tilde: usize) -> Self {
        Self {
            kind: CriterionKind::D,
            nu1: 2.0,
            nu2: 3.0,
            n_tilde,
            cook_threshold: CookThreshold::FourOverN,
            t_max: None,
            rebuild_period: DEFAULT_REBUILD_PERIOD,
            seed: 0,
            prediction_set: None,
            strict_init: false,
        }
    }

    pub fn i_criterion(n_tilde: usize, prediction_set: PredictionSet) -> Self {
        Self {
            kind: CriterionKind::I,
            prediction_set: Some(prediction_set),
            ..Self::d_criterion(n_tilde)
        }
    }

    pub fn t_max_for(&self, n: usize) -> usize {
        self.t_max.unwrap_or(10 * n)
    }

    /// Upper leverage bound `nu1 (k+1)/n` for exchange candidates.
    pub fn leverage_cap(&self, dim: usize, n: usize) -> f64 {
        self.nu1 * dim as f64 / n as f64
    }

    /// Initialization bound `nu2 (k+1)/n`.
    pub fn init_cap(&self, dim: usize, n: usize) -> f64 {
        self.nu2 * dim as f64 / n as f64
    }

    pub fn validate(&self, dataset: &Dataset, n: usize) -> Result<()> {
        let n_rows = dataset.n_rows();
        let dim = dataset.dim();
        if n < dim {
            return Err(Error::Config(format!(
                "sample size {n} is below the design dimension {dim}"
            )));
        }
        if n > n_rows {
            return Err(Error::Config(format!(
                "sample size {n} exceeds the {n_rows} available rows"
            )));
        }
        if !(self.nu1 > 0.0) || !(self.nu2 > 0.0) {
            return Err(Error::Config("nu1 and nu2 must be positive".into()));
        }
        if self.n_tilde == 0 {
            return Err(Error::Config("candidate pool size must be positive".into()));
        }
        if self.n_tilde > n_rows - n {
            return Err(Error::Config(format!(
                "candidate pool size {} exceeds the {} rows outside the sample",
                self.n_tilde,
                n_rows - n
            )));
        }
        if let CookThreshold::Fixed(v) = self.cook_threshold {
            if !(v > 0.0) {
                return Err(Error::Config("Cook threshold must be positive".into()));
            }
        }
        match (&self.kind, &self.prediction_set) {
            (CriterionKind::I, None) => {
                return Err(Error::Config(
                    "the I-criterion requires a prediction set".into(),
                ));
            }
            (_, Some(ps)) if ps.dim() != dim => {
                return Err(Error::ShapeMismatch(format!(
                    "prediction set dimension {} does not match design dimension {dim}",
                    ps.dim()
                )));
            }
            _ => {}
        }
        if self.leverage_cap(dim, n) >= 1.0 && self.nu1.is_finite() {
            log::warn!(
                "nu1 (k+1)/n = {:.4} is not below one; the high-leverage filter is vacuous",
                self.leverage_cap(dim, n)
            );
        }
        Ok(())
    }
}

/// Deletion score of sampled row `i`: leverage for D, trace increase for I.
pub fn deletion_score(
    state: &GramState,
    dataset: &Dataset,
    i: usize,
    cfg: &CriterionConfig,
) -> Result<f64> {
    if !state.contains(i) {
        return Err(Error::ShapeMismatch(format!("row {i} is not in the sample")));
    }
    match cfg.kind {
        CriterionKind::D => Ok(state.leverage_of(dataset, i)),
        CriterionKind::I => {
            let w = cfg
                .prediction_set
                .as_ref()
                .ok_or_else(|| Error::Config("the I-criterion requires a prediction set".into()))?
                .cross();
            let x = dataset.row(i);
            let g_x = state.inverse_times(x);
            let h = g_x.dot(&x);
            if 1.0 - h <= DEGENERATE_LEVERAGE_TOL {
                return Err(Error::DegenerateRemoval {
                    index: i,
                    leverage: h,
                });
            }
            Ok(quad_form(w, g_x.column(0)) / (1.0 - h))
        }
    }
}

/// Addition score of a candidate row under the downdated inverse.
pub fn addition_score(
    downdated_inv: &DMatrix<f64>,
    x_j: DVectorView<'_, f64>,
    cfg: &CriterionConfig,
) -> Result<f64> {
    match cfg.kind {
        CriterionKind::D => Ok(quad_form(downdated_inv, x_j)),
        CriterionKind::I => {
            let w = cfg
                .prediction_set
                .as_ref()
                .ok_or_else(|| Error::Config("the I-criterion requires a prediction set".into()))?
                .cross();
            let g_x = downdated_inv * x_j;
            let denom = 1.0 + g_x.dot(&x_j);
            Ok(quad_form(w, g_x.column(0)) / denom)
        }
    }
}

/// Membership test for the exchange candidate set: both criterion bounds must
/// hold. Candidates whose exchange would be numerically degenerate are
/// rejected.
pub fn candidate_filter(
    state: &GramState,
    dataset: &Dataset,
    removed: usize,
    x_j: DVectorView<'_, f64>,
    cfg: &CriterionConfig,
) -> bool {
    let pick = match deletion_score(state, dataset, removed, cfg) {
        Ok(score) => DeletionPick {
            row: removed,
            pos: usize::MAX,
            score,
            leverage: state.leverage_of(dataset, removed),
        },
        Err(_) => return false,
    };
    let ctx = match SwapContext::new(state, dataset, &pick, cfg) {
        Ok(ctx) => ctx,
        Err(_) => return false,
    };
    ctx.evaluate(state, x_j).passes
}

/// Result of the per-iteration arg-min over deletion scores.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DeletionPick {
    pub row: usize,
    pub pos: usize,
    pub score: f64,
    pub leverage: f64,
}

/// Scans the sample for the unit to delete; ties break on the lowest row
/// index.
pub(crate) fn pick_deletion(
    state: &GramState,
    dataset: &Dataset,
    cfg: &CriterionConfig,
) -> Result<DeletionPick> {
    let w = cfg.prediction_set.as_ref().map(|ps| ps.cross());
    let mut best: Option<DeletionPick> = None;
    for (pos, &row) in state.sample().iter().enumerate() {
        let x = dataset.row(row);
        let leverage = state.leverage(x);
        let score = match cfg.kind {
            CriterionKind::D => leverage,
            CriterionKind::I => {
                if 1.0 - leverage <= DEGENERATE_LEVERAGE_TOL {
                    f64::INFINITY
                } else {
                    let g_x = state.inverse_times(x);
                    quad_form(w.expect("validated: I has a prediction set"), g_x.column(0))
                        / (1.0 - leverage)
                }
            }
        };
        let better = match &best {
            None => true,
            Some(b) => score < b.score || (score == b.score && row < b.row),
        };
        if better {
            best = Some(DeletionPick {
                row,
                pos,
                score,
                leverage,
            });
        }
    }
    let pick = best.ok_or_else(|| Error::ShapeMismatch("empty sample".into()))?;
    if !pick.score.is_finite() {
        return Err(Error::DegenerateRemoval {
            index: pick.row,
            leverage: pick.leverage,
        });
    }
    Ok(pick)
}

/// Per-iteration context frozen against one Gram state and one outgoing row.
/// All per-candidate quantities reduce to two quadratic forms plus dot
/// products against the vectors cached here.
pub(crate) struct SwapContext {
    /// Deletion score of the outgoing row (lower bound of the candidate set).
    pub removed_score: f64,
    pub h_removed: f64,
    /// `G x_m`.
    u: DVector<f64>,
    /// `nu1 (k+1)/n`.
    pub cap: f64,
    i_ctx: Option<ICtx>,
}

struct ICtx {
    /// `B = G W G`; `x' B x` is the quadratic form `v' W v` with `v = G x`.
    b: DMatrix<f64>,
    /// `G W u`; its dot with `x_j` is `u' W v`.
    gwu: DVector<f64>,
    /// `u' W u`.
    uwu: f64,
}

/// Everything the exchange loop needs to know about one candidate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CandidateEval {
    pub swap_leverage: f64,
    pub addition_score: f64,
    /// Value compared against the lower bound: the post-swap leverage for D,
    /// the post-swap deletion score for I.
    pub lower_value: f64,
    pub passes: bool,
}

impl SwapContext {
    pub(crate) fn new(
        state: &GramState,
        dataset: &Dataset,
        pick: &DeletionPick,
        cfg: &CriterionConfig,
    ) -> Result<Self> {
        if pick.leverage >= 1.0 - DEGENERATE_LEVERAGE_TOL {
            return Err(Error::DegenerateRemoval {
                index: pick.row,
                leverage: pick.leverage,
            });
        }
        let x_m = dataset.row(pick.row);
        let u = state.inverse_times(x_m);
        let h_removed = u.dot(&x_m);
        let cap = cfg.leverage_cap(dataset.dim(), state.sample_size());
        let i_ctx = match cfg.kind {
            CriterionKind::D => None,
            CriterionKind::I => {
                let w = cfg
                    .prediction_set
                    .as_ref()
                    .expect("validated: I has a prediction set")
                    .cross();
                let wg = w * state.gram_inv();
                let b = state.gram_inv() * &wg;
                let gwu = state.gram_inv() * (w * &u);
                let uwu = quad_form(w, u.column(0));
                Some(ICtx { b, gwu, uwu })
            }
        };
        Ok(Self {
            removed_score: pick.score,
            h_removed,
            u,
            cap,
            i_ctx,
        })
    }

    /// Scores one candidate against the frozen context.
    pub(crate) fn evaluate(&self, state: &GramState, x_j: DVectorView<'_, f64>) -> CandidateEval {
        let h_j = quad_form(state.gram_inv(), x_j);
        let c = self.u.dot(&x_j);
        let sc = SwapScalars::new(self.h_removed, h_j, c);
        let reject = |swap_leverage: f64| CandidateEval {
            swap_leverage,
            addition_score: f64::NAN,
            lower_value: f64::NAN,
            passes: false,
        };
        if sc.is_degenerate() {
            return reject(f64::NAN);
        }
        let swap_leverage = sc.swap_leverage();
        if !(swap_leverage < self.cap) {
            return reject(swap_leverage);
        }
        let one_minus_hm = 1.0 - self.h_removed;
        match &self.i_ctx {
            None => {
                let addition_score = h_j + c * c / one_minus_hm;
                CandidateEval {
                    swap_leverage,
                    addition_score,
                    lower_value: swap_leverage,
                    passes: swap_leverage > self.removed_score,
                }
            }
            Some(ictx) => {
                let v_w_v = quad_form(&ictx.b, x_j);
                let u_w_v = ictx.gwu.dot(&x_j);
                // w = (X~'X~)^-1 x_j = alpha u + beta v
                let alpha = c / sc.d;
                let beta = 1.0 - (c * c + one_minus_hm * h_j) / sc.d;
                let w_w_w =
                    alpha * alpha * ictx.uwu + 2.0 * alpha * beta * u_w_v + beta * beta * v_w_v;
                let den = 1.0 - swap_leverage;
                if den <= DEGENERATE_LEVERAGE_TOL {
                    return reject(swap_leverage);
                }
                let del_score_new = w_w_w / den;
                // addition score per the downdated inverse G- = G + u u'/(1-h_m)
                let gamma = c / one_minus_hm;
                let num = v_w_v + 2.0 * gamma * u_w_v + gamma * gamma * ictx.uwu;
                let addition_score = num / (1.0 + h_j + gamma * c);
                CandidateEval {
                    swap_leverage,
                    addition_score,
                    lower_value: del_score_new,
                    passes: del_score_new > self.removed_score,
                }
            }
        }
    }
}
