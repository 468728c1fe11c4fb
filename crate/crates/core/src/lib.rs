//! Model-agnostic feature importance for right-censored survival data.
//!
//! The centerpiece is a leave-one-covariate-out (LOCO) importance engine
//! driven by minipatch ensembles: many small random subsets of rows and
//! features, each fitted with a cheap survival model, aggregated so that
//! every observation is scored out-of-sample with and without each feature.
//! Around it sit the pieces a full study needs: dataset loading and
//! discretization, a random survival forest and penalized Cox models (both
//! usable as minipatch backends and as standalone predictors), a stability
//! battery (subsample rank distributions, Jaccard overlap curves, a
//! permutation pseudo-null), a repeated cross-validated C-index harness with
//! feature groupings, and a synthetic generator with planted signal for
//! end-to-end checks.
//!
//! ```no_run
//! use loco_surv::dataset::{DatasetSchema, SurvivalDataset};
//! use loco_surv::locomp::{self, LocoParams};
//! use loco_surv::backend::BackendSpec;
//!
//! let schema = DatasetSchema::plain("time", "event");
//! let ds = SurvivalDataset::load_csv("cohort.csv", &schema)?;
//! let (_, report) = locomp::loco(&ds, 16, &BackendSpec::default(), &LocoParams {
//!     k: 2000,
//!     seed: 7,
//!     ..LocoParams::default()
//! })?;
//! for name in locomp::rank(&report, 8)? {
//!     println!("{name}");
//! }
//! # Ok::<(), loco_surv::error::Error>(())
//! ```

pub mod backend;
pub mod cox;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod forest;
pub mod hazard;
pub mod locomp;
pub mod report;
pub mod stability;
pub mod stats;
pub mod svg;
pub mod synth;

pub use error::{Error, Result};

/// Configure the global worker pool. Call once, before any parallel work;
/// later calls are ignored (rayon pools are process-global). `workers = 0`
/// leaves the choice to rayon.
pub fn configure_workers(workers: usize) {
    if workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
}
