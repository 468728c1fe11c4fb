//! The JSON run configuration and its resolution against command-line
//! flags and the environment. Precedence: flag > config file > env var >
//! built-in default. The resolved config (minus `workers` and `out_dir`,
//! which never affect results) is hashed into every output's metadata.

use std::fs::File;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use loco_surv::backend::BackendSpec;
use loco_surv::dataset::DatasetSchema;
use loco_surv::error::{Error, Result};
use loco_surv::eval::{LambdaRule, ModelSpec};
use loco_surv::forest::ForestParams;
use loco_surv::locomp::LocoParams;
use loco_surv::synth::SynthConfig;

use crate::CommonArgs;

pub const WORKERS_ENV: &str = "LOCO_SURV_WORKERS";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// CSV dataset path; mutually exclusive with `synth`.
    pub dataset: Option<String>,
    /// Column roles for CSV loading; defaults to time/event columns named
    /// "time" and "event" with every feature treated as DBM.
    pub schema: Option<DatasetSchema>,
    /// Inline synthetic-data recipe; mutually exclusive with `dataset`.
    pub synth: Option<SynthConfig>,
    pub outcome_label: Option<String>,
    /// Time-grid intervals for discrete-hazard models.
    pub d: Option<usize>,
    /// Model used inside LOCO-MP minipatches (and, unless `cv.model`
    /// overrides it, the CV risk model).
    pub backend: Option<BackendSpec>,
    /// Drop near-constant features below this variance before anything else.
    pub variance_threshold: Option<f64>,
    pub loco: Option<LocoParams>,
    pub stability: Option<StabilitySection>,
    pub cv: Option<CvSection>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySection {
    /// Number of row subsamples (B).
    pub subsamples: usize,
    /// Subsample fraction of rows.
    pub fraction: f64,
    /// Permutations per tested feature (P).
    pub permutations: usize,
    /// Features for the permutation test; empty = the full-data top-1.
    pub permute_features: Vec<String>,
    /// Pin the scoring seed of permuted reruns to the original run's.
    pub reuse_run_seed: bool,
    /// Also run the forest permutation-importance baseline and compare.
    pub compare_rf: bool,
    /// Forest shape for that baseline.
    pub rf: ForestParams,
    /// Top-k cap for the Jaccard curve.
    pub jaccard_max_k: usize,
    /// Features shown in the rank-spread boxplot.
    pub plot_top: usize,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            subsamples: 10,
            fraction: 0.8,
            permutations: 25,
            permute_features: Vec::new(),
            reuse_run_seed: false,
            compare_rf: true,
            rf: ForestParams::default(),
            jaccard_max_k: 10,
            plot_top: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvSection {
    pub repeats: usize,
    pub folds: usize,
    pub stratify: bool,
    /// CV risk model; None derives it from `backend`.
    pub model: Option<ModelSpec>,
    /// Size of the frozen top-DBM set.
    pub top_k: usize,
    /// Top-k sweep values; empty = no sweep.
    pub k_list: Vec<usize>,
    /// Columns ablated from every grouping that contains them all.
    pub ablate: Vec<String>,
    /// Recompute the importance ranking inside each training fold instead
    /// of freezing it from the full data.
    pub refit_loco_per_fold: bool,
}

impl Default for CvSection {
    fn default() -> Self {
        Self {
            repeats: 6,
            folds: 5,
            stratify: true,
            model: None,
            top_k: 6,
            k_list: Vec::new(),
            ablate: Vec::new(),
            refit_loco_per_fold: false,
        }
    }
}

/// A fully resolved run: config after overrides, plus the fields that are
/// deliberately outside the reproducibility hash.
pub struct Resolved {
    pub cfg: RunConfig,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub seed: u64,
}

pub fn resolve(args: &CommonArgs) -> Result<Resolved> {
    let mut cfg: RunConfig = match &args.config {
        Some(path) => {
            let file = File::open(path).map_err(|e| {
                Error::InvalidInput(format!("cannot open config {}: {e}", path.display()))
            })?;
            serde_json::from_reader(file)
                .map_err(|e| Error::InvalidInput(format!("bad config: {e}")))?
        }
        None => RunConfig::default(),
    };

    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(k) = args.k {
        cfg.loco.get_or_insert_with(LocoParams::default).k = k;
    }
    if let Some(name) = &args.backend {
        cfg.backend = Some(backend_by_name(name, cfg.backend.as_ref())?);
    }
    if let Some(s) = args.stratify {
        cfg.cv.get_or_insert_with(CvSection::default).stratify = s;
    }
    if let Some(r) = args.refit_loco_per_fold {
        cfg.cv.get_or_insert_with(CvSection::default).refit_loco_per_fold = r;
    }
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    } else if cfg.workers.is_none() {
        if let Ok(raw) = std::env::var(WORKERS_ENV) {
            let parsed = raw.parse::<usize>().map_err(|_| {
                Error::InvalidInput(format!("{WORKERS_ENV}={raw:?} is not a worker count"))
            })?;
            cfg.workers = Some(parsed);
        }
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = Some(dir.display().to_string());
    }

    let seed = cfg.seed.unwrap_or(0);
    let out_dir = PathBuf::from(cfg.out_dir.clone().unwrap_or_else(|| ".".into()));
    let workers = cfg.workers.unwrap_or(0);
    Ok(Resolved { cfg, out_dir, workers, seed })
}

/// Switch the backend kind from a flag, keeping config hyperparameters
/// when the kind already matches and falling back to that kind's defaults
/// otherwise.
fn backend_by_name(name: &str, current: Option<&BackendSpec>) -> Result<BackendSpec> {
    let fresh = match name {
        "forest" => BackendSpec::default(),
        "cox_ridge" => BackendSpec::CoxRidge { lambda: 0.1 },
        "cox_lasso" => BackendSpec::CoxLasso { lambda: 0.1 },
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown backend {other:?}; expected forest, cox_ridge, or cox_lasso"
            )))
        }
    };
    Ok(match (name, current) {
        ("forest", Some(b @ BackendSpec::Forest { .. })) => b.clone(),
        ("cox_ridge", Some(b @ BackendSpec::CoxRidge { .. })) => b.clone(),
        ("cox_lasso", Some(b @ BackendSpec::CoxLasso { .. })) => b.clone(),
        _ => fresh,
    })
}

/// CV model implied by the LOCO backend when `cv.model` is absent: the
/// forest keeps its shape; Cox backends switch to inner-CV lambda tuning.
pub fn model_from_backend(backend: &BackendSpec) -> ModelSpec {
    match backend {
        BackendSpec::Forest { n_trees, mtry, min_leaf, max_depth } => ModelSpec::Forest {
            params: ForestParams {
                n_trees: *n_trees,
                mtry: *mtry,
                min_leaf: *min_leaf,
                max_depth: *max_depth,
                seed: 0,
            },
            n_trees_grid: None,
        },
        BackendSpec::CoxRidge { .. } => ModelSpec::Cox {
            penalty: loco_surv::cox::PenaltyKind::Ridge,
            lambda: LambdaRule::default(),
        },
        BackendSpec::CoxLasso { .. } => ModelSpec::Cox {
            penalty: loco_surv::cox::PenaltyKind::Lasso,
            lambda: LambdaRule::default(),
        },
        BackendSpec::Constant { .. } => ModelSpec::default(),
    }
}

/// The reproducibility hash covers everything that can change results;
/// `workers` and `out_dir` cannot, and keeping them out lets reruns at
/// different parallelism produce byte-identical artifacts.
pub fn hashable_config(cfg: &RunConfig) -> Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    let obj = v.as_object_mut().expect("config is an object");
    obj.remove("workers");
    obj.remove("out_dir");
    v
}
