//! Stability diagnostics for feature-importance methods: subsample rank
//! distributions, top-k Jaccard overlap curves, a permutation pseudo-null
//! with empirical p-values, and head-to-head rank-tightness comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::BackendSpec;
use crate::dataset::SurvivalDataset;
use crate::error::{Error, Result};
use crate::forest::{ForestParams, SurvivalForest};
use crate::locomp::{self, LocoParams};
use crate::stats::{competition_ranks, iqr, median, mix_seed, ordinal_order};

/// Anything that can score every feature of a dataset, higher = more
/// important. The `seed` argument controls all randomness of one scoring
/// run; implementations must be deterministic in it.
pub trait ImportanceMethod: Sync {
    fn name(&self) -> &str;
    fn scores(&self, ds: &SurvivalDataset, seed: u64) -> Result<Vec<f64>>;
}

/// Minipatch LOCO importance (delta_bar per feature).
pub struct LocoImportance {
    /// Intervals for the discretization grid.
    pub d: usize,
    pub backend: BackendSpec,
    /// Patch-shape parameters; the `seed` field is overridden per run.
    pub params: LocoParams,
}

impl ImportanceMethod for LocoImportance {
    fn name(&self) -> &str {
        "loco_mp"
    }

    fn scores(&self, ds: &SurvivalDataset, seed: u64) -> Result<Vec<f64>> {
        let params = LocoParams { seed, ..self.params.clone() };
        let (_, report) = locomp::loco(ds, self.d, &self.backend, &params)?;
        Ok(report.delta_bar)
    }
}

/// Classic random-survival-forest permutation importance (out-of-bag NLL
/// rise), as the baseline competitor.
pub struct RfImportance {
    pub d: usize,
    /// Forest size and shape; the `seed` field is overridden per run.
    pub params: ForestParams,
}

impl ImportanceMethod for RfImportance {
    fn name(&self) -> &str {
        "rf_imp"
    }

    fn scores(&self, ds: &SurvivalDataset, seed: u64) -> Result<Vec<f64>> {
        let grid = crate::dataset::TimeGrid::equal_width(ds.times(), self.d)?;
        let params = ForestParams { seed: mix_seed(seed, 0xF17), ..self.params.clone() };
        let forest = SurvivalForest::fit(ds, &grid, &params)?;
        forest.importance(ds, mix_seed(seed, 0x1417))
    }
}

/// One subsample's scoring run (None when the run aborted on censoring
/// saturation; the abort is recorded, not papered over).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsampleRun {
    pub rows: Vec<u32>,
    pub scores: Vec<f64>,
    /// Competition ranks of `scores`, descending (ties share the min rank).
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankDistribution {
    pub method: String,
    pub feature_names: Vec<String>,
    pub full_scores: Vec<f64>,
    pub full_ranks: Vec<usize>,
    pub subsamples: Vec<Option<SubsampleRun>>,
    pub fraction: f64,
    pub seed: u64,
}

impl RankDistribution {
    /// Ranks feature `j` received across completed subsamples.
    pub fn ranks_of(&self, j: usize) -> Vec<f64> {
        self.subsamples
            .iter()
            .flatten()
            .map(|run| run.ranks[j] as f64)
            .collect()
    }

    pub fn scores_of(&self, j: usize) -> Vec<f64> {
        self.subsamples.iter().flatten().map(|run| run.scores[j]).collect()
    }

    pub fn median_rank(&self, j: usize) -> f64 {
        median(&self.ranks_of(j))
    }

    pub fn median_score(&self, j: usize) -> f64 {
        median(&self.scores_of(j))
    }

    pub fn completed(&self) -> usize {
        self.subsamples.iter().flatten().count()
    }
}

/// Score the method on `b` row subsamples (fraction `frac`, drawn without
/// replacement) plus the full data. Subsample runs that abort on censoring
/// saturation are recorded as missing; more than half aborting fails the
/// whole battery.
pub fn subsample_ranks(
    ds: &SurvivalDataset,
    method: &dyn ImportanceMethod,
    b: usize,
    frac: f64,
    seed: u64,
) -> Result<RankDistribution> {
    if b == 0 {
        return Err(Error::InvalidInput("need at least one subsample".into()));
    }
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "subsample fraction {frac} must lie in (0, 1]"
        )));
    }
    let n = ds.n_rows();
    let size = ((frac * n as f64).floor() as usize).max(2);
    if size >= n && frac < 1.0 {
        return Err(Error::InvalidInput(format!(
            "dataset too small to subsample at fraction {frac}"
        )));
    }

    let full_scores = method.scores(ds, mix_seed(seed, 0xF00D))?;
    let full_ranks = competition_ranks(&full_scores);

    let all_cols: Vec<usize> = (0..ds.n_features()).collect();
    let mut subsamples = Vec::with_capacity(b);
    let mut aborted = 0usize;
    for bi in 0..b {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0x5B00 + bi as u64);
        let mut rows: Vec<usize> =
            rand::seq::index::sample(&mut rng, n, size.min(n)).iter().collect();
        rows.sort_unstable();
        let sub = ds.subset(&rows, &all_cols)?;
        match method.scores(&sub, mix_seed(seed, bi as u64)) {
            Ok(scores) => {
                let ranks = competition_ranks(&scores);
                subsamples.push(Some(SubsampleRun {
                    rows: rows.iter().map(|&r| r as u32).collect(),
                    scores,
                    ranks,
                }));
            }
            Err(Error::CensoringSaturation { .. }) => {
                aborted += 1;
                subsamples.push(None);
            }
            Err(other) => return Err(other),
        }
    }
    if aborted * 2 > b {
        return Err(Error::CensoringSaturation {
            skipped: aborted,
            total: b,
            limit_percent: 50,
        });
    }
    Ok(RankDistribution {
        method: method.name().to_string(),
        feature_names: ds.feature_names().to_vec(),
        full_scores,
        full_ranks,
        subsamples,
        fraction: frac,
        seed,
    })
}

/// Jaccard similarity of two name sets; two empty sets count as identical
/// (1.0) so a vacuous comparison does not read as instability.
pub fn jaccard(a: &[String], b: &[String]) -> f64 {
    use std::collections::HashSet;
    let sa: HashSet<&str> = a.iter().map(|s| s.as_str()).collect();
    let sb: HashSet<&str> = b.iter().map(|s| s.as_str()).collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JaccardPoint {
    pub k: usize,
    pub mean: f64,
    pub median: f64,
}

/// Overlap between the full-data top-k and each subsample's top-k, for
/// every k up to `k_max`.
pub fn jaccard_curve(dist: &RankDistribution, k_max: usize) -> Result<Vec<JaccardPoint>> {
    let m = dist.feature_names.len();
    if k_max == 0 || k_max > m {
        return Err(Error::InvalidInput(format!("k_max = {k_max} must lie in 1..={m}")));
    }
    if dist.completed() == 0 {
        return Err(Error::InvalidInput("no completed subsamples to compare".into()));
    }
    let top = |scores: &[f64], k: usize| -> Vec<String> {
        ordinal_order(scores)[..k]
            .iter()
            .map(|&j| dist.feature_names[j].clone())
            .collect()
    };
    let mut points = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let full_top = top(&dist.full_scores, k);
        let js: Vec<f64> = dist
            .subsamples
            .iter()
            .flatten()
            .map(|run| jaccard(&full_top, &top(&run.scores, k)))
            .collect();
        points.push(JaccardPoint { k, mean: js.iter().sum::<f64>() / js.len() as f64, median: median(&js) });
    }
    Ok(points)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermutationResult {
    pub feature: String,
    pub original_rank: usize,
    pub permuted_ranks: Vec<usize>,
    /// Add-one empirical p-value: (1 + #{permuted rank <= original}) / (P + 1).
    /// Its floor is 1/(P+1), never zero.
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermutationReport {
    pub method: String,
    pub n_permutations: usize,
    pub results: Vec<PermutationResult>,
}

/// Permutation pseudo-null for the named features: shuffle one column,
/// rerun the whole scoring pipeline, and see where the shuffled feature
/// lands. By default every rerun draws fresh randomness (patches, models);
/// `reuse_run_seed` pins the method seed to the original run's instead, so
/// only the shuffled column differs.
pub fn permutation_test(
    ds: &SurvivalDataset,
    method: &dyn ImportanceMethod,
    features: &[String],
    p: usize,
    seed: u64,
    reuse_run_seed: bool,
) -> Result<PermutationReport> {
    if p == 0 {
        return Err(Error::InvalidInput("need at least one permutation".into()));
    }
    if features.is_empty() {
        return Err(Error::InvalidInput("no features named for the permutation test".into()));
    }
    let mut targets = Vec::with_capacity(features.len());
    for name in features {
        let j = ds
            .index_of(name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown feature {name:?}")))?;
        targets.push(j);
    }

    let base_seed = mix_seed(seed, 0xF00D);
    let original_scores = method.scores(ds, base_seed)?;
    let original_ranks = competition_ranks(&original_scores);

    let mut results = Vec::with_capacity(targets.len());
    for (slot, &j) in targets.iter().enumerate() {
        let mut permuted_ranks = Vec::with_capacity(p);
        for perm in 0..p {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(0x9E80_0000 ^ ((slot as u64) << 20) ^ perm as u64);
            let mut column: Vec<f64> = ds.column(j).to_vec();
            rand::seq::SliceRandom::shuffle(&mut column[..], &mut rng);
            let shuffled = ds.with_column(j, column)?;
            let run_seed = if reuse_run_seed {
                base_seed
            } else {
                mix_seed(seed, 0xA000_0000 ^ ((slot as u64) << 20) ^ perm as u64)
            };
            let scores = method.scores(&shuffled, run_seed)?;
            let ranks = competition_ranks(&scores);
            permuted_ranks.push(ranks[j]);
        }
        let hits = permuted_ranks.iter().filter(|&&r| r <= original_ranks[j]).count();
        results.push(PermutationResult {
            feature: features[slot].clone(),
            original_rank: original_ranks[j],
            permuted_ranks,
            p_value: (1 + hits) as f64 / (p + 1) as f64,
        });
    }
    Ok(PermutationReport { method: method.name().to_string(), n_permutations: p, results })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityComparison {
    pub method_a: String,
    pub method_b: String,
    pub feature_names: Vec<String>,
    /// Per-feature IQR of subsample ranks under each method.
    pub rank_iqr_a: Vec<f64>,
    pub rank_iqr_b: Vec<f64>,
    /// Median of the per-feature IQRs: one tightness number per method
    /// (smaller = more stable rankings).
    pub median_iqr_a: f64,
    pub median_iqr_b: f64,
}

/// Compare how tightly two methods rank the same features across
/// subsamples. Both distributions must cover the same feature universe.
pub fn compare_importance(
    a: &RankDistribution,
    b: &RankDistribution,
) -> Result<StabilityComparison> {
    if a.feature_names != b.feature_names {
        return Err(Error::InvalidInput(
            "rank distributions cover different feature universes".into(),
        ));
    }
    if a.completed() < 2 || b.completed() < 2 {
        return Err(Error::InvalidInput(
            "need at least two completed subsamples per method to compare spreads".into(),
        ));
    }
    let m = a.feature_names.len();
    let rank_iqr_a: Vec<f64> = (0..m).map(|j| iqr(&a.ranks_of(j))).collect();
    let rank_iqr_b: Vec<f64> = (0..m).map(|j| iqr(&b.ranks_of(j))).collect();
    Ok(StabilityComparison {
        method_a: a.method.clone(),
        method_b: b.method.clone(),
        feature_names: a.feature_names.clone(),
        median_iqr_a: median(&rank_iqr_a),
        median_iqr_b: median(&rank_iqr_b),
        rank_iqr_a,
        rank_iqr_b,
    })
}
