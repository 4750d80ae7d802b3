//! Exchange procedures: initialization, the non-informative D/I exchange,
//! the informative (Cook-filtered) variants, and the SRS baseline.
//!
//! Every procedure consumes one seeded random stream and is deterministic in
//! (dataset, config, seed). Draw order within one run: the SRS
//! initialization first, then the initialization exchanges (one candidate
//! pool plus one uniform pick per iteration), then one candidate pool per
//! main-loop iteration.
//!
//! One iteration of the main loop is one atomic delete-then-add exchange, so
//! the sample size is exactly `n` after every iteration. The loop stops early
//! when the candidate set comes up empty (converged) and otherwise runs to
//! `t_max`. In informative mode a candidate whose Cook's distance reaches the
//! threshold is recorded as rejected and the next-best survivor is tried; a
//! fully rejected pool ends the iteration without an exchange but does not
//! stop the run, because the next iteration draws a fresh pool.

use rand::Rng;
use serde::Serialize;

use crate::criteria::{pick_deletion, CriterionConfig, CriterionKind, SwapContext};
use crate::dataset::Dataset;
use crate::diagnostics::{cooks_distance, fit_ols};
use crate::error::{Error, Result};
use crate::gram::{trace_product, GramState, SwapScalars};

/// Outcome of one trace entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExchangeStatus {
    /// The exchange was applied.
    Accepted,
    /// The candidate won the addition score but failed the Cook filter.
    RejectedCook,
    /// The candidate set for this iteration was empty (or fully rejected).
    NoCandidates,
    /// The iteration budget ran out.
    Terminated,
}

impl ExchangeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExchangeStatus::Accepted => "accepted",
            ExchangeStatus::RejectedCook => "rejected_cook",
            ExchangeStatus::NoCandidates => "no_candidates",
            ExchangeStatus::Terminated => "terminated",
        }
    }
}

impl std::fmt::Display for ExchangeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One audit record of the exchange loop. Accepted rows carry the bounds that
/// held at acceptance time so the decision can be replayed offline.
#[derive(Debug, Clone)]
pub struct ExchangeTrace {
    pub iteration: usize,
    pub removed: usize,
    pub added: Option<usize>,
    /// Deletion score of the removed unit (leverage for D, trace score for I).
    pub removed_score: f64,
    /// Addition score of the added unit; zero when nothing was added.
    pub added_score: f64,
    /// Post-swap leverage of the added unit; zero when nothing was added.
    pub swap_leverage: f64,
    pub log_det_after: f64,
    pub status: ExchangeStatus,
    /// Lower bound the candidate had to strictly exceed.
    pub bound_lower: f64,
    /// Upper leverage bound `nu (k+1)/n` in force.
    pub bound_upper: f64,
    /// Value checked against `bound_lower` (post-swap leverage for D,
    /// post-swap deletion score for I).
    pub lower_value: f64,
    /// Cook's distance evaluated for the candidate (informative runs only).
    pub cook_distance: Option<f64>,
}

/// Result of an exchange run.
#[derive(Debug, Clone)]
pub struct SamplerResult {
    /// Selected row indices, ascending.
    pub sample: Vec<usize>,
    pub trace: Vec<ExchangeTrace>,
    pub final_log_det: f64,
    /// Final `trace[(X'X)^-1 X0'X0]` for I-criterion runs.
    pub final_trace_criterion: Option<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

/// Result of the initialization procedure.
#[derive(Debug, Clone)]
pub struct InitResult {
    /// Starting sample, ascending.
    pub sample: Vec<usize>,
    pub trace: Vec<ExchangeTrace>,
    pub iterations_run: usize,
    /// Whether the maximum leverage dropped below `nu2 (k+1)/n`.
    pub converged: bool,
}

/// Simple random sample without replacement, returned ascending.
pub fn srs(dataset: &Dataset, n: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let n_rows = dataset.n_rows();
    if n > n_rows {
        return Err(Error::Config(format!(
            "cannot draw {n} rows from {n_rows}"
        )));
    }
    let mut picked = rand::seq::index::sample(rng, n_rows, n).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Draws per-iteration candidate pools from the complement of the sample.
/// A stamp array makes the sparse regime allocation-free per draw.
struct CandidateDrawer {
    stamp: Vec<u32>,
    tag: u32,
}

impl CandidateDrawer {
    fn new(n_rows: usize) -> Self {
        Self {
            stamp: vec![0; n_rows],
            tag: 0,
        }
    }

    /// Uniform draw without replacement of `want` indices outside the sample,
    /// returned ascending.
    fn draw(&mut self, rng: &mut impl Rng, in_sample: &[bool], n_sampled: usize, want: usize) -> Vec<usize> {
        let n_rows = in_sample.len();
        let outside = n_rows - n_sampled;
        let take = want.min(outside);
        if take == 0 {
            return Vec::new();
        }
        let mut picked: Vec<usize>;
        if take * 4 >= outside {
            // dense regime: enumerate the complement once
            let complement: Vec<usize> = (0..n_rows).filter(|&i| !in_sample[i]).collect();
            if take == complement.len() {
                return complement;
            }
            let sel = rand::seq::index::sample(rng, complement.len(), take);
            picked = sel.iter().map(|k| complement[k]).collect();
        } else {
            if self.tag == u32::MAX {
                self.stamp.fill(0);
                self.tag = 0;
            }
            self.tag += 1;
            picked = Vec::with_capacity(take);
            while picked.len() < take {
                let i = rng.random_range(0..n_rows);
                if in_sample[i] || self.stamp[i] == self.tag {
                    continue;
                }
                self.stamp[i] = self.tag;
                picked.push(i);
            }
        }
        picked.sort_unstable();
        picked
    }
}

fn membership(n_rows: usize, sample: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n_rows];
    for &i in sample {
        mask[i] = true;
    }
    mask
}

/// Builds a starting sample without high-leverage points: start from SRS and
/// repeatedly exchange the maximum-leverage unit for a random candidate whose
/// post-swap leverage stays below `nu2 (k+1)/n`.
pub fn init_sample(
    dataset: &Dataset,
    n: usize,
    cfg: &CriterionConfig,
    rng: &mut impl Rng,
) -> Result<InitResult> {
    cfg.validate(dataset, n)?;
    let start = srs(dataset, n, rng)?;
    let mut state = GramState::build(dataset, &start)?;
    let mut in_sample = membership(dataset.n_rows(), &start);
    let mut drawer = CandidateDrawer::new(dataset.n_rows());
    let threshold = cfg.init_cap(dataset.dim(), n);
    let t_max = cfg.t_max_for(n);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;

    for t in 0..t_max {
        iterations_run = t;
        state.rebuild_if_drifting(dataset, cfg.rebuild_period)?;
        // max-leverage unit, ties broken on the lowest row index
        let mut worst_row = usize::MAX;
        let mut worst_h = f64::NEG_INFINITY;
        for &row in state.sample() {
            let h = state.leverage_of(dataset, row);
            if h > worst_h || (h == worst_h && row < worst_row) {
                worst_row = row;
                worst_h = h;
            }
        }
        if worst_h < threshold {
            converged = true;
            break;
        }
        let x_m = dataset.row(worst_row);
        let u = state.inverse_times(x_m);
        let h_m = u.dot(&x_m);
        let pool = drawer.draw(rng, &in_sample, n, cfg.n_tilde);
        let mut survivors: Vec<(usize, f64)> = Vec::new();
        for &j in &pool {
            let x_j = dataset.row(j);
            let sc = SwapScalars::new(h_m, state.leverage(x_j), u.dot(&x_j));
            if sc.is_degenerate() {
                continue;
            }
            let h_swap = sc.swap_leverage();
            if h_swap < threshold {
                survivors.push((j, h_swap));
            }
        }
        if survivors.is_empty() {
            trace.push(ExchangeTrace {
                iteration: t,
                removed: worst_row,
                added: None,
                removed_score: worst_h,
                added_score: 0.0,
                swap_leverage: 0.0,
                log_det_after: state.log_det(),
                status: ExchangeStatus::NoCandidates,
                bound_lower: f64::NEG_INFINITY,
                bound_upper: threshold,
                lower_value: 0.0,
                cook_distance: None,
            });
            continue;
        }
        let (added, h_swap) = survivors[rng.random_range(0..survivors.len())];
        state.apply_swap(dataset, worst_row, added)?;
        in_sample[worst_row] = false;
        in_sample[added] = true;
        trace.push(ExchangeTrace {
            iteration: t,
            removed: worst_row,
            added: Some(added),
            removed_score: worst_h,
            added_score: h_swap,
            swap_leverage: h_swap,
            log_det_after: state.log_det(),
            status: ExchangeStatus::Accepted,
            bound_lower: f64::NEG_INFINITY,
            bound_upper: threshold,
            lower_value: h_swap,
            cook_distance: None,
        });
    }

    if !converged {
        iterations_run = t_max;
        let worst = state
            .sample()
            .iter()
            .map(|&i| state.leverage_of(dataset, i))
            .fold(f64::NEG_INFINITY, f64::max);
        if cfg.strict_init {
            return Err(Error::InitFailed {
                max_leverage: worst,
                threshold,
                iterations: t_max,
            });
        }
        log::warn!(
            "initialization stopped at t_max = {t_max} with max leverage {worst:.6} >= {threshold:.6}"
        );
    }
    let mut sample = state.sample().to_vec();
    sample.sort_unstable();
    Ok(InitResult {
        sample,
        trace,
        iterations_run,
        converged,
    })
}

/// Non-informative exchange (D or I criterion, depending on the config).
pub fn run_exchange(
    dataset: &Dataset,
    n: usize,
    cfg: &CriterionConfig,
    initial: &[usize],
    rng: &mut impl Rng,
) -> Result<SamplerResult> {
    exchange_engine(dataset, n, cfg, initial, rng, false)
}

/// Informative exchange: as [`run_exchange`], but a winning candidate is only
/// accepted when its Cook's distance on the tentative post-swap sample stays
/// below the configured threshold.
pub fn run_informative(
    dataset: &Dataset,
    n: usize,
    cfg: &CriterionConfig,
    initial: &[usize],
    rng: &mut impl Rng,
) -> Result<SamplerResult> {
    if dataset.response().is_none() {
        return Err(Error::MissingResponse);
    }
    if n <= dataset.dim() {
        return Err(Error::InsufficientDof {
            n,
            dim: dataset.dim(),
        });
    }
    exchange_engine(dataset, n, cfg, initial, rng, true)
}

fn exchange_engine(
    dataset: &Dataset,
    n: usize,
    cfg: &CriterionConfig,
    initial: &[usize],
    rng: &mut impl Rng,
    informative: bool,
) -> Result<SamplerResult> {
    cfg.validate(dataset, n)?;
    if initial.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "initial sample has {} rows, expected {n}",
            initial.len()
        )));
    }
    let mut state = GramState::build(dataset, initial)?;
    let mut in_sample = membership(dataset.n_rows(), initial);
    let mut drawer = CandidateDrawer::new(dataset.n_rows());
    let cook_threshold = cfg.cook_threshold.value(n);
    let t_max = cfg.t_max_for(n);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;

    for t in 0..t_max {
        iterations_run = t + 1;
        state.rebuild_if_drifting(dataset, cfg.rebuild_period)?;
        let pick = pick_deletion(&state, dataset, cfg)?;
        let ctx = SwapContext::new(&state, dataset, &pick, cfg)?;
        let pool = drawer.draw(rng, &in_sample, n, cfg.n_tilde);

        // candidate set: pool entries passing both criterion bounds
        let mut survivors: Vec<Survivor> = Vec::new();
        let mut degenerate = 0usize;
        for &j in &pool {
            let eval = ctx.evaluate(&state, dataset.row(j));
            if eval.passes {
                survivors.push(Survivor {
                    row: j,
                    addition_score: eval.addition_score,
                    swap_leverage: eval.swap_leverage,
                    lower_value: eval.lower_value,
                });
            } else if eval.swap_leverage.is_nan() {
                degenerate += 1;
            }
        }
        if degenerate > 0 {
            log::debug!("iteration {t}: dropped {degenerate} degenerate exchange candidates");
        }

        if survivors.is_empty() {
            trace.push(no_candidates_row(t, &pick, &ctx, state.log_det()));
            converged = true;
            break;
        }
        // best addition score first; ties on the lowest row index (survivors
        // are already in ascending row order)
        survivors.sort_by(|a, b| b.addition_score.total_cmp(&a.addition_score));

        let mut accepted: Option<(Survivor, Option<f64>)> = None;
        if informative {
            for cand in &survivors {
                let mut tentative = state.sample().to_vec();
                tentative[pick.pos] = cand.row;
                let fit = fit_ols(dataset, &tentative)?;
                let cook = match cooks_distance(&fit, pick.pos) {
                    Ok(c) => c,
                    Err(Error::DegenerateLeverage { .. }) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                if cook < cook_threshold {
                    accepted = Some((*cand, Some(cook)));
                    break;
                }
                trace.push(ExchangeTrace {
                    iteration: t,
                    removed: pick.row,
                    added: Some(cand.row),
                    removed_score: pick.score,
                    added_score: cand.addition_score,
                    swap_leverage: cand.swap_leverage,
                    log_det_after: state.log_det(),
                    status: ExchangeStatus::RejectedCook,
                    bound_lower: ctx.removed_score,
                    bound_upper: ctx.cap,
                    lower_value: cand.lower_value,
                    cook_distance: Some(cook),
                });
            }
            if accepted.is_none() {
                // the whole pool failed the Cook filter: no exchange this
                // iteration, try a fresh pool next time
                trace.push(no_candidates_row(t, &pick, &ctx, state.log_det()));
                continue;
            }
        } else {
            accepted = Some((survivors[0], None));
        }

        let (winner, cook) = accepted.expect("exchange winner selected above");
        state.apply_swap(dataset, pick.row, winner.row)?;
        in_sample[pick.row] = false;
        in_sample[winner.row] = true;
        trace.push(ExchangeTrace {
            iteration: t,
            removed: pick.row,
            added: Some(winner.row),
            removed_score: pick.score,
            added_score: winner.addition_score,
            swap_leverage: winner.swap_leverage,
            log_det_after: state.log_det(),
            status: ExchangeStatus::Accepted,
            bound_lower: ctx.removed_score,
            bound_upper: ctx.cap,
            lower_value: winner.lower_value,
            cook_distance: cook,
        });
    }

    if !converged && t_max > 0 {
        // budget ran out: record the unit that would have left next
        let pick = pick_deletion(&state, dataset, cfg)?;
        trace.push(ExchangeTrace {
            iteration: t_max,
            removed: pick.row,
            added: None,
            removed_score: pick.score,
            added_score: 0.0,
            swap_leverage: 0.0,
            log_det_after: state.log_det(),
            status: ExchangeStatus::Terminated,
            bound_lower: pick.score,
            bound_upper: cfg.leverage_cap(dataset.dim(), n),
            lower_value: 0.0,
            cook_distance: None,
        });
    }

    let final_trace_criterion = match cfg.kind {
        CriterionKind::D => None,
        CriterionKind::I => Some(trace_product(
            state.gram_inv(),
            cfg.prediction_set
                .as_ref()
                .expect("validated: I has a prediction set")
                .cross(),
        )),
    };
    let mut sample = state.sample().to_vec();
    sample.sort_unstable();
    Ok(SamplerResult {
        sample,
        trace,
        final_log_det: state.log_det(),
        final_trace_criterion,
        iterations_run,
        converged,
    })
}

#[derive(Debug, Clone, Copy)]
struct Survivor {
    row: usize,
    addition_score: f64,
    swap_leverage: f64,
    lower_value: f64,
}

fn no_candidates_row(
    t: usize,
    pick: &crate::criteria::DeletionPick,
    ctx: &SwapContext,
    log_det: f64,
) -> ExchangeTrace {
    ExchangeTrace {
        iteration: t,
        removed: pick.row,
        added: None,
        removed_score: pick.score,
        added_score: 0.0,
        swap_leverage: 0.0,
        log_det_after: log_det,
        status: ExchangeStatus::NoCandidates,
        bound_lower: ctx.removed_score,
        bound_upper: ctx.cap,
        lower_value: 0.0,
        cook_distance: None,
    }
}
