//! Harrell's C-index, repeated stratified k-fold cross-validation, the
//! feature-grouping experiment, top-k robustness sweeps, and
//! covariate-omission ablations.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cox::{self, CoxModel, CoxParams, PenaltyKind};
use crate::dataset::{FeatureKind, SurvivalDataset, TimeGrid};
use crate::error::{Error, Result};
use crate::forest::{ForestParams, SurvivalForest};
use crate::stats::{median, mix_seed};

/// Harrell's concordance index. A pair is comparable when one subject's
/// time is strictly smaller and that subject experienced the event;
/// concordant pairs score 1, risk ties 0.5. Pairs whose earlier time is
/// censored, and pairs with tied times, are not comparable.
pub fn c_index(risks: &[f64], times: &[f64], events: &[bool]) -> Result<f64> {
    let n = risks.len();
    if n != times.len() || n != events.len() {
        return Err(Error::InvalidInput(format!(
            "risks ({}), times ({}) and events ({}) must have equal length",
            n,
            times.len(),
            events.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput("need at least two subjects".into()));
    }
    for (i, &r) in risks.iter().enumerate() {
        if !r.is_finite() {
            return Err(Error::InvalidInput(format!("risk {r} at row {i} is not finite")));
        }
    }
    let mut comparable = 0usize;
    let mut score = 0.0f64;
    for i in 0..n {
        if !events[i] {
            continue;
        }
        for j in 0..n {
            if times[i] < times[j] {
                comparable += 1;
                if risks[i] > risks[j] {
                    score += 1.0;
                } else if risks[i] == risks[j] {
                    score += 0.5;
                }
            }
        }
    }
    if comparable == 0 {
        return Err(Error::NoComparablePairs { n });
    }
    Ok(score / comparable as f64)
}

/// A named column set to evaluate. Columns are stored in dataset order, so
/// two groupings with the same member set produce bit-identical fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub name: String,
    pub columns: Vec<String>,
    /// How many ranked features went in, for the top-k variants.
    pub top_k: Option<usize>,
    /// Columns removed by ablation.
    pub omitted: Vec<String>,
}

impl Grouping {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, top_k: None, omitted: Vec::new() }
    }
}

fn names_of(ds: &SurvivalDataset, indices: &[usize]) -> Vec<String> {
    indices.iter().map(|&j| ds.feature_names()[j].to_string()).collect()
}

/// Resolve a grouping to column indices in dataset order.
fn resolve(ds: &SurvivalDataset, g: &Grouping) -> Result<Vec<usize>> {
    if g.columns.is_empty() {
        return Err(Error::InvalidInput(format!("grouping {:?} has no columns", g.name)));
    }
    let mut indices = Vec::with_capacity(g.columns.len());
    for name in &g.columns {
        let j = ds.index_of(name).ok_or_else(|| {
            Error::InvalidInput(format!("grouping {:?} references unknown column {name:?}", g.name))
        })?;
        indices.push(j);
    }
    indices.sort_unstable();
    indices.dedup();
    if indices.len() != g.columns.len() {
        return Err(Error::InvalidInput(format!("grouping {:?} lists a column twice", g.name)));
    }
    Ok(indices)
}

/// The five standard groupings, built from a frozen importance ranking of
/// the DBM features (descending; `ranked_dbm[..k]` is the top-k set).
pub fn standard_groupings(
    ds: &SurvivalDataset,
    ranked_dbm: &[String],
    k: usize,
) -> Result<Vec<Grouping>> {
    let conventional = names_of(ds, &ds.columns_of_kind(FeatureKind::Conventional));
    let dbm = names_of(ds, &ds.columns_of_kind(FeatureKind::Dbm));
    if conventional.is_empty() {
        return Err(Error::InvalidInput("dataset has no conventional features".into()));
    }
    if dbm.is_empty() {
        return Err(Error::InvalidInput("dataset has no DBM features".into()));
    }
    let top = top_columns(ds, ranked_dbm, k)?;

    let mut conv_plus_all = conventional.clone();
    conv_plus_all.extend(dbm.iter().cloned());
    let mut conv_plus_top = conventional.clone();
    conv_plus_top.extend(top.iter().cloned());

    Ok(vec![
        Grouping::new("conventional_only", conventional),
        Grouping::new("all_dbm", dbm),
        Grouping::new("conventional_plus_all_dbm", conv_plus_all),
        Grouping { top_k: Some(k), ..Grouping::new("top_dbm", top) },
        Grouping { top_k: Some(k), ..Grouping::new("conventional_plus_top_dbm", conv_plus_top) },
    ])
}

fn top_columns(ds: &SurvivalDataset, ranked_dbm: &[String], k: usize) -> Result<Vec<String>> {
    if k == 0 || k > ranked_dbm.len() {
        return Err(Error::InvalidInput(format!(
            "top-k = {k} must lie in 1..={}",
            ranked_dbm.len()
        )));
    }
    for name in &ranked_dbm[..k] {
        match ds.index_of(name) {
            Some(j) if ds.kinds()[j] == FeatureKind::Dbm => {}
            Some(_) => {
                return Err(Error::InvalidInput(format!(
                    "ranked feature {name:?} is not a DBM column"
                )))
            }
            None => {
                return Err(Error::InvalidInput(format!(
                    "ranked feature {name:?} is not a dataset column"
                )))
            }
        }
    }
    Ok(ranked_dbm[..k].to_vec())
}

/// Remove columns from a grouping, keeping a paper trail in the name.
pub fn ablate(g: &Grouping, omit: &[String]) -> Result<Grouping> {
    if omit.is_empty() {
        return Err(Error::InvalidInput("nothing to ablate".into()));
    }
    for name in omit {
        if !g.columns.contains(name) {
            return Err(Error::InvalidInput(format!(
                "cannot ablate {name:?}: not in grouping {:?}",
                g.name
            )));
        }
    }
    let columns: Vec<String> =
        g.columns.iter().filter(|c| !omit.contains(c)).cloned().collect();
    if columns.is_empty() {
        return Err(Error::InvalidInput(format!(
            "ablating {omit:?} leaves grouping {:?} empty",
            g.name
        )));
    }
    let mut omitted = g.omitted.clone();
    omitted.extend(omit.iter().cloned());
    Ok(Grouping {
        name: format!("{}_without_{}", g.name, omit.join("_")),
        columns,
        top_k: g.top_k,
        omitted,
    })
}

/// Which risk model the harness fits in every cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Forest {
        #[serde(default)]
        params: ForestParams,
        /// When set, the training split picks the forest size by inner
        /// cross-validation over these candidates (ties -> fewer trees).
        #[serde(default)]
        n_trees_grid: Option<Vec<usize>>,
    },
    Cox {
        penalty: PenaltyKind,
        #[serde(default)]
        lambda: LambdaRule,
    },
}

impl ModelSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelSpec::Forest { .. } => "forest",
            ModelSpec::Cox { penalty: PenaltyKind::Ridge, .. } => "cox_ridge",
            ModelSpec::Cox { penalty: PenaltyKind::Lasso, .. } => "cox_lasso",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Forest { params, n_trees_grid } => {
                if params.min_leaf == 0 {
                    return Err(Error::InvalidInput("min_leaf must be at least 1".into()));
                }
                match n_trees_grid {
                    Some(c) if c.is_empty() || c.contains(&0) => Err(Error::InvalidInput(
                        "n_trees_grid must list positive candidates".into(),
                    )),
                    None if params.n_trees == 0 => {
                        Err(Error::InvalidInput("n_trees must be at least 1".into()))
                    }
                    _ => Ok(()),
                }
            }
            ModelSpec::Cox { lambda, .. } => match lambda {
                LambdaRule::Fixed { value } if !(value.is_finite() && *value >= 0.0) => {
                    Err(Error::InvalidInput(format!(
                        "penalty strength {value} must be finite and >= 0"
                    )))
                }
                LambdaRule::InnerCv { points, decades, folds }
                    if *points == 0 || *folds < 2 || *decades <= 0.0 =>
                {
                    Err(Error::InvalidInput(
                        "inner CV needs points >= 1, folds >= 2, decades > 0".into(),
                    ))
                }
                _ => Ok(()),
            },
        }
    }
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Forest { params: ForestParams::default(), n_trees_grid: None }
    }
}

/// How the Cox penalty strength is chosen per training split.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LambdaRule {
    Fixed { value: f64 },
    /// Inner k-fold CV over a log grid descending from the training
    /// split's lambda_max; best mean inner C-index wins, ties -> larger
    /// lambda (more regularization).
    InnerCv { points: usize, decades: f64, folds: usize },
}

impl Default for LambdaRule {
    fn default() -> Self {
        LambdaRule::InnerCv { points: 20, decades: 4.0, folds: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvParams {
    pub repeats: usize,
    pub folds: usize,
    /// Time-grid intervals for forest fits (built from each training split).
    pub d: usize,
    pub stratify: bool,
    pub seed: u64,
}

impl Default for CvParams {
    fn default() -> Self {
        Self { repeats: 6, folds: 5, d: 16, stratify: true, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvCell {
    pub grouping: String,
    pub repeat: usize,
    pub fold: usize,
    /// None when the cell could not be scored; `note` says why.
    pub c_index: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupingSummary {
    pub name: String,
    pub median_c: Option<f64>,
    pub present: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CIndexReport {
    pub outcome_label: String,
    pub model: String,
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
    /// One hash per repeat over its fold assignment; every grouping within
    /// a repeat shares the partition, so sharing can be audited later.
    pub partition_hashes: Vec<String>,
    pub cells: Vec<CvCell>,
    pub summaries: Vec<GroupingSummary>,
}

impl CIndexReport {
    pub fn median_for(&self, grouping: &str) -> Option<f64> {
        self.summaries.iter().find(|s| s.name == grouping).and_then(|s| s.median_c)
    }

    /// Present C-index values for one grouping, repeat-major order.
    pub fn values_for(&self, grouping: &str) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.grouping == grouping)
            .filter_map(|c| c.c_index)
            .collect()
    }

    /// Cells where both groupings produced a value, matched by (repeat, fold).
    pub fn paired(&self, a: &str, b: &str) -> Vec<(f64, f64)> {
        let pick = |name: &str| -> Vec<&CvCell> {
            self.cells.iter().filter(|c| c.grouping == name).collect()
        };
        let ca = pick(a);
        let cb = pick(b);
        ca.iter()
            .filter_map(|cell| {
                let other = cb
                    .iter()
                    .find(|o| o.repeat == cell.repeat && o.fold == cell.fold)?;
                Some((cell.c_index?, other.c_index?))
            })
            .collect()
    }
}

/// Assign each row a fold id. With stratification the event and censored
/// strata are shuffled separately and dealt round-robin on one running
/// counter, so both strata spread evenly over folds.
fn assign_folds(
    events: &[bool],
    folds: usize,
    stratify: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let n = events.len();
    let mut order: Vec<usize> = if stratify {
        let mut with: Vec<usize> = (0..n).filter(|&i| events[i]).collect();
        let mut without: Vec<usize> = (0..n).filter(|&i| !events[i]).collect();
        with.shuffle(rng);
        without.shuffle(rng);
        with.extend(without);
        with
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(rng);
        all
    };
    let mut fold_of = vec![0usize; n];
    for (pos, i) in order.drain(..).enumerate() {
        fold_of[i] = pos % folds;
    }
    fold_of
}

fn partition_hash(repeat: usize, fold_of: &[usize]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((repeat as u64).to_le_bytes());
    for &f in fold_of {
        hasher.update((f as u32).to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A fitted model that can rank subjects by risk.
pub enum RiskModel {
    Forest(SurvivalForest),
    Cox(CoxModel),
}

impl RiskModel {
    pub fn risks(&self, ds: &SurvivalDataset) -> Result<Vec<f64>> {
        (0..ds.n_rows())
            .map(|i| match self {
                RiskModel::Forest(f) => f.predict_risk(ds.row(i)),
                RiskModel::Cox(m) => m.risk(ds.row(i)),
            })
            .collect()
    }
}

/// Fit the chosen model on a training split. Hyperparameters under an
/// inner-CV rule are chosen here, from the training split alone.
pub fn fit_risk_model(
    train: &SurvivalDataset,
    spec: &ModelSpec,
    d: usize,
    stratify: bool,
    seed: u64,
) -> Result<RiskModel> {
    match spec {
        ModelSpec::Forest { params, n_trees_grid } => {
            let n_trees = match n_trees_grid {
                None => params.n_trees,
                Some(cands) => {
                    if cands.is_empty() || cands.iter().any(|&c| c == 0) {
                        return Err(Error::InvalidInput(
                            "n_trees_grid must list positive candidates".into(),
                        ));
                    }
                    let mut cands = cands.clone();
                    cands.sort_unstable();
                    inner_select(train, &cands, 5, stratify, seed, |tr, &n_trees, s| {
                        let grid = TimeGrid::equal_width(tr.times(), d)?;
                        let p = ForestParams { n_trees, seed: s, ..params.clone() };
                        Ok(RiskModel::Forest(SurvivalForest::fit(tr, &grid, &p)?))
                    })?
                }
            };
            let grid = TimeGrid::equal_width(train.times(), d)?;
            let p = ForestParams { n_trees, seed, ..params.clone() };
            Ok(RiskModel::Forest(SurvivalForest::fit(train, &grid, &p)?))
        }
        ModelSpec::Cox { penalty, lambda } => {
            let lam = match lambda {
                LambdaRule::Fixed { value } => *value,
                LambdaRule::InnerCv { points, decades, folds } => {
                    if *points == 0 || *folds < 2 || *decades <= 0.0 {
                        return Err(Error::InvalidInput(
                            "inner CV needs points >= 1, folds >= 2, decades > 0".into(),
                        ));
                    }
                    let lmax = cox::lambda_max(train)?;
                    let grid = cox::lambda_grid(lmax.max(1e-4), *points, *decades);
                    inner_select(train, &grid, *folds, stratify, seed, |tr, &lam, _| {
                        let p = match penalty {
                            PenaltyKind::Ridge => CoxParams::ridge(lam),
                            PenaltyKind::Lasso => CoxParams::lasso(lam),
                        };
                        Ok(RiskModel::Cox(CoxModel::fit(tr, &p)?))
                    })?
                }
            };
            let p = match penalty {
                PenaltyKind::Ridge => CoxParams::ridge(lam),
                PenaltyKind::Lasso => CoxParams::lasso(lam),
            };
            Ok(RiskModel::Cox(CoxModel::fit(train, &p)?))
        }
    }
}

/// Pick the candidate with the best mean inner-fold C-index. All
/// candidates share one inner partition. Exact ties keep the earlier
/// candidate, so orderings encode the preference (descending lambda ->
/// more regularization; ascending tree count -> fewer trees).
fn inner_select<T: Copy>(
    train: &SurvivalDataset,
    candidates: &[T],
    folds: usize,
    stratify: bool,
    seed: u64,
    fit: impl Fn(&SurvivalDataset, &T, u64) -> Result<RiskModel>,
) -> Result<T> {
    let n = train.n_rows();
    if n < folds * 2 {
        return Err(Error::InvalidInput(format!(
            "training split of {n} rows is too small for {folds}-fold inner CV"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x1CF);
    let fold_of = assign_folds(train.events(), folds, stratify, &mut rng);
    let all_cols: Vec<usize> = (0..train.n_features()).collect();

    let mut best: Option<(f64, T)> = None;
    for (ci, cand) in candidates.iter().enumerate() {
        let mut values = Vec::new();
        for f in 0..folds {
            let tr_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
            let te_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
            if te_rows.is_empty() || !tr_rows.iter().any(|&i| train.events()[i]) {
                continue;
            }
            let tr = train.subset(&tr_rows, &all_cols)?;
            let te = train.subset(&te_rows, &all_cols)?;
            let model = match fit(&tr, cand, mix_seed(seed, 0x1CF0 + (ci * folds + f) as u64)) {
                Ok(m) => m,
                Err(e) if e.is_abort() => continue,
                Err(e) => return Err(e),
            };
            let risks = model.risks(&te)?;
            match c_index(&risks, te.times(), te.events()) {
                Ok(c) => values.push(c),
                Err(Error::NoComparablePairs { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        if values.is_empty() {
            continue;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if best.map_or(true, |(b, _)| mean > b) {
            best = Some((mean, *cand));
        }
    }
    best.map(|(_, c)| c).ok_or_else(|| {
        Error::InvalidInput("inner cross-validation produced no scoreable fold".into())
    })
}

/// Repeated stratified k-fold cross-validation over several feature
/// groupings. Fold partitions are drawn once per repeat and shared by all
/// groupings, and each (repeat, fold) cell uses one model seed across
/// groupings, so comparisons are paired. Cells that cannot be scored (no
/// training events, no comparable test pairs, a model that fails to fit)
/// are recorded as missing with a note, never imputed.
pub fn repeated_cv(
    ds: &SurvivalDataset,
    groupings: &[Grouping],
    spec: &ModelSpec,
    params: &CvParams,
    outcome_label: &str,
) -> Result<CIndexReport> {
    validate_cv(ds, params)?;
    spec.validate()?;
    if groupings.is_empty() {
        return Err(Error::InvalidInput("need at least one grouping".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for g in groupings {
        if !seen.insert(g.name.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate grouping name {:?}", g.name)));
        }
    }
    let resolved: Vec<Vec<usize>> =
        groupings.iter().map(|g| resolve(ds, g)).collect::<Result<_>>()?;

    let (partitions, partition_hashes) = make_partitions(ds, params);

    let jobs: Vec<(usize, usize, usize)> = (0..groupings.len())
        .flat_map(|g| {
            (0..params.repeats).flat_map(move |r| (0..params.folds).map(move |f| (g, r, f)))
        })
        .collect();

    let cells: Vec<CvCell> = jobs
        .par_iter()
        .map(|&(g, r, f)| {
            let cell_seed = mix_seed(params.seed, 0xCE11_0000 + (r * params.folds + f) as u64);
            run_cell(
                ds,
                &groupings[g].name,
                &resolved[g],
                &partitions[r],
                r,
                f,
                spec,
                params,
                cell_seed,
            )
        })
        .collect::<Result<_>>()?;

    let summaries = summarize(groupings, &cells);
    Ok(CIndexReport {
        outcome_label: outcome_label.to_string(),
        model: spec.tag().to_string(),
        repeats: params.repeats,
        folds: params.folds,
        seed: params.seed,
        partition_hashes,
        cells,
        summaries,
    })
}

/// Like [`repeated_cv`], but the groupings are rebuilt from each training
/// split by `make_groupings` (e.g. rerunning LOCO-MP per fold so the top-k
/// list never sees test rows). Every cell must yield the same grouping
/// names.
pub fn repeated_cv_refit(
    ds: &SurvivalDataset,
    make_groupings: &(dyn Fn(&SurvivalDataset, u64) -> Result<Vec<Grouping>> + Sync),
    spec: &ModelSpec,
    params: &CvParams,
    outcome_label: &str,
) -> Result<CIndexReport> {
    validate_cv(ds, params)?;
    spec.validate()?;
    let (partitions, partition_hashes) = make_partitions(ds, params);
    let n = ds.n_rows();
    let all_cols: Vec<usize> = (0..ds.n_features()).collect();

    let per_cell: Vec<Vec<CvCell>> = (0..params.repeats * params.folds)
        .into_par_iter()
        .map(|cell_idx| {
            let (r, f) = (cell_idx / params.folds, cell_idx % params.folds);
            let cell_seed = mix_seed(params.seed, 0xCE11_0000 + cell_idx as u64);
            let tr_rows: Vec<usize> = (0..n).filter(|&i| partitions[r][i] != f).collect();
            let train = ds.subset(&tr_rows, &all_cols)?;
            let groupings = make_groupings(&train, mix_seed(cell_seed, 0x6F17))?;
            if groupings.is_empty() {
                return Err(Error::InvalidInput("make_groupings returned no groupings".into()));
            }
            groupings
                .iter()
                .map(|g| {
                    let cols = resolve(ds, g)?;
                    run_cell(ds, &g.name, &cols, &partitions[r], r, f, spec, params, cell_seed)
                })
                .collect::<Result<Vec<CvCell>>>()
        })
        .collect::<Result<_>>()?;

    let names: Vec<String> = per_cell[0].iter().map(|c| c.grouping.clone()).collect();
    for cells in &per_cell {
        let here: Vec<String> = cells.iter().map(|c| c.grouping.clone()).collect();
        if here != names {
            return Err(Error::InvalidInput(format!(
                "per-fold groupings disagree: {names:?} vs {here:?}"
            )));
        }
    }
    let groupings: Vec<Grouping> =
        names.iter().map(|n| Grouping::new(n.clone(), vec!["refit".into()])).collect();
    let mut cells: Vec<CvCell> = Vec::with_capacity(per_cell.len() * names.len());
    for gi in 0..names.len() {
        for cell in &per_cell {
            cells.push(cell[gi].clone());
        }
    }
    let summaries = summarize(&groupings, &cells);
    Ok(CIndexReport {
        outcome_label: outcome_label.to_string(),
        model: spec.tag().to_string(),
        repeats: params.repeats,
        folds: params.folds,
        seed: params.seed,
        partition_hashes,
        cells,
        summaries,
    })
}

fn validate_cv(ds: &SurvivalDataset, params: &CvParams) -> Result<()> {
    if params.repeats == 0 {
        return Err(Error::InvalidInput("repeats must be at least 1".into()));
    }
    if params.folds < 2 {
        return Err(Error::InvalidInput("folds must be at least 2".into()));
    }
    if ds.n_rows() < params.folds {
        return Err(Error::InvalidInput(format!(
            "{} rows cannot fill {} folds",
            ds.n_rows(),
            params.folds
        )));
    }
    if params.d < 2 {
        return Err(Error::InvalidInput("time grid needs at least 2 intervals".into()));
    }
    Ok(())
}

fn make_partitions(ds: &SurvivalDataset, params: &CvParams) -> (Vec<Vec<usize>>, Vec<String>) {
    let mut partitions = Vec::with_capacity(params.repeats);
    let mut hashes = Vec::with_capacity(params.repeats);
    for r in 0..params.repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(0xF01D_0000 + r as u64);
        let fold_of = assign_folds(ds.events(), params.folds, params.stratify, &mut rng);
        hashes.push(partition_hash(r, &fold_of));
        partitions.push(fold_of);
    }
    (partitions, hashes)
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    ds: &SurvivalDataset,
    grouping: &str,
    cols: &[usize],
    fold_of: &[usize],
    repeat: usize,
    fold: usize,
    spec: &ModelSpec,
    params: &CvParams,
    cell_seed: u64,
) -> Result<CvCell> {
    let n = ds.n_rows();
    let tr_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
    let te_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
    let missing = |note: String| CvCell {
        grouping: grouping.to_string(),
        repeat,
        fold,
        c_index: None,
        note: Some(note),
    };
    if te_rows.is_empty() {
        return Ok(missing("empty test fold".into()));
    }
    if !tr_rows.iter().any(|&i| ds.events()[i]) {
        return Ok(missing("no events in training split".into()));
    }
    let train = ds.subset(&tr_rows, cols)?;
    let test = ds.subset(&te_rows, cols)?;
    let model = match fit_risk_model(&train, spec, params.d, params.stratify, cell_seed) {
        Ok(m) => m,
        Err(e) if e.is_abort() => return Ok(missing(format!("model fit failed: {e}"))),
        Err(Error::InvalidInput(msg)) => return Ok(missing(format!("model fit failed: {msg}"))),
        Err(e) => return Err(e),
    };
    let risks = model.risks(&test)?;
    match c_index(&risks, test.times(), test.events()) {
        Ok(c) => Ok(CvCell {
            grouping: grouping.to_string(),
            repeat,
            fold,
            c_index: Some(c),
            note: None,
        }),
        Err(Error::NoComparablePairs { .. }) => {
            Ok(missing("no comparable pairs in test fold".into()))
        }
        Err(e) => Err(e),
    }
}

fn summarize(groupings: &[Grouping], cells: &[CvCell]) -> Vec<GroupingSummary> {
    groupings
        .iter()
        .map(|g| {
            let values: Vec<f64> = cells
                .iter()
                .filter(|c| c.grouping == g.name)
                .filter_map(|c| c.c_index)
                .collect();
            let total = cells.iter().filter(|c| c.grouping == g.name).count();
            GroupingSummary {
                name: g.name.clone(),
                median_c: if values.is_empty() { None } else { Some(median(&values)) },
                present: values.len(),
                missing: total - values.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub k: usize,
    pub report: CIndexReport,
}

/// Rerun the grouping experiment at each top-k cut. All entries share the
/// same seed, hence the same fold partitions, so the series are paired
/// across k.
pub fn topk_sweep(
    ds: &SurvivalDataset,
    ranked_dbm: &[String],
    ks: &[usize],
    spec: &ModelSpec,
    params: &CvParams,
    outcome_label: &str,
) -> Result<Vec<SweepEntry>> {
    if ks.is_empty() {
        return Err(Error::InvalidInput("empty k range".into()));
    }
    let conventional = names_of(ds, &ds.columns_of_kind(FeatureKind::Conventional));
    let mut entries = Vec::with_capacity(ks.len());
    for &k in ks {
        let top = top_columns(ds, ranked_dbm, k)?;
        let mut groupings =
            vec![Grouping { top_k: Some(k), ..Grouping::new("top_dbm", top.clone()) }];
        if !conventional.is_empty() {
            let mut conv_plus_top = conventional.clone();
            conv_plus_top.extend(top);
            groupings.push(Grouping {
                top_k: Some(k),
                ..Grouping::new("conventional_plus_top_dbm", conv_plus_top)
            });
        }
        let report = repeated_cv(ds, &groupings, spec, params, outcome_label)?;
        entries.push(SweepEntry { k, report });
    }
    Ok(entries)
}
