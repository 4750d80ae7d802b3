//! Near-optimal subsampling of tall regression datasets, with outliers kept
//! out.
//!
//! Given a pool of `N` observations of a linear model with `k << N`
//! covariates, this crate selects a subsample of size `n` that is nearly
//! D-optimal (maximal information determinant) or nearly I-optimal (minimal
//! average prediction variance over a prediction set) while refusing the rows
//! that would corrupt the fit:
//!
//! * the **non-informative** exchange procedures use covariates only and keep
//!   every selected row's leverage below `nu1 (k+1)/n`, so high-leverage
//!   points never enter the sample;
//! * the **informative** variants additionally screen each tentative
//!   exchange with Cook's distance on the post-swap fit, excluding response
//!   outliers that sit at unremarkable covariate values.
//!
//! The exchange runs on closed-form rank-one and rank-two updates of the
//! inverse Gram matrix (see [`gram`]), so one iteration costs `O((n + N~)
//! (k+1)^2)` regardless of `N`. A simulation harness ([`simulation`])
//! regenerates contaminated pools, runs all five selection strategies (both
//! exchanges, their informative variants, and simple random sampling), and
//! evaluates them on clean prediction and test sets.
//!
//! ```
//! use nalgebra::DMatrix;
//! use rand::SeedableRng;
//! use rand_chacha::ChaCha12Rng;
//! use odsample::{CriterionConfig, Dataset, init_sample, run_exchange};
//!
//! # fn main() -> Result<(), odsample::Error> {
//! // a small pool: one factor on a grid, intercept added automatically
//! let factors = DMatrix::from_fn(400, 1, |i, _| (i as f64) / 40.0);
//! let dataset = Dataset::from_factors(factors, None)?;
//!
//! let mut cfg = CriterionConfig::d_criterion(100); // pool of 100 candidates per iteration
//! cfg.seed = 7;
//! let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
//! let init = init_sample(&dataset, 40, &cfg, &mut rng)?;
//! let result = run_exchange(&dataset, 40, &cfg, &init.sample, &mut rng)?;
//!
//! assert_eq!(result.sample.len(), 40);
//! let cap = cfg.leverage_cap(dataset.dim(), 40);
//! for row in &result.trace {
//!     if let Some(_) = row.added {
//!         assert!(row.swap_leverage < cap);
//!     }
//! }
//! # Ok(())
//! # }
//! ```

pub mod criteria;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod gram;
pub mod sampler;
pub mod simulation;

pub use criteria::{
    addition_score, candidate_filter, deletion_score, CookThreshold, CriterionConfig,
    CriterionKind,
};
pub use dataset::{Dataset, PredictionSet};
pub use diagnostics::{cooks_distance, fit_ols, OlsFit};
pub use error::{Error, Result};
pub use gram::{GramState, RebuildReport, SwapScalars};
pub use sampler::{
    init_sample, run_exchange, run_informative, srs, ExchangeStatus, ExchangeTrace, InitResult,
    SamplerResult,
};
pub use simulation::{
    compute_metrics, gen_example1, gen_study_cell, gen_study_x, gen_study_y, run_study,
    CellResult, GeneratedData, LabeledSet, MetricsRow, Strategy, StudyCellData, StudyConfig,
    StudyOutcome,
};

// The guide's code snippets double as doctests so the book can never drift
// from the API.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(leverage, "../../../book/src/leverage.md");
    chapter!(exchange, "../../../book/src/exchange.md");
    chapter!(influence, "../../../book/src/influence.md");
    chapter!(prediction, "../../../book/src/prediction.md");
    chapter!(study, "../../../book/src/study.md");
    chapter!(cli, "../../../book/src/cli.md");
}
