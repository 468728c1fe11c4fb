//! The minipatch leave-one-covariate-out engine.
//!
//! K minipatches — random row subsets of size n crossed with random feature
//! subsets of size m — are each fitted with a cheap backend. For every
//! observation i, predictions are averaged over patches whose rows exclude
//! i (so all scoring is out-of-sample), once over all such patches and once
//! over the sub-ensemble that also excludes feature j. The importance of j
//! is the mean rise in censored NLL when j's patches are taken away:
//!
//! ```text
//! delta[i][j] = nll(mean curve excluding i and j) - nll(mean curve excluding i)
//! delta_bar[j] = mean over contributing i of delta[i][j]
//! ```
//!
//! Curves are averaged elementwise first and the loss is evaluated once on
//! the averaged curve.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::BackendSpec;
use crate::dataset::{SurvivalDataset, TimeGrid};
use crate::error::{Error, Result};
use crate::hazard::{nll_coded, EventCoding, HazardCurve};
use crate::stats::{mix_seed, ordinal_order};

/// One minipatch: sorted row and column index sets, both sampled uniformly
/// without replacement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiniPatch {
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocoParams {
    /// Rows per patch; `None` means `max(2, round(N / 5))`.
    pub n: Option<usize>,
    /// Features per patch; `None` means `ceil(sqrt(M))` capped at M.
    pub m: Option<usize>,
    /// Number of minipatches.
    pub k: usize,
    /// An observation contributes to a feature's mean only when both of its
    /// prediction averages pooled at least this many patches.
    pub min_count: usize,
    /// Abort when more than this fraction of patches carries zero events.
    pub max_skip_fraction: f64,
    pub event_coding: EventCoding,
    pub seed: u64,
}

impl Default for LocoParams {
    fn default() -> Self {
        Self {
            n: None,
            m: None,
            k: 10_000,
            min_count: 5,
            max_skip_fraction: 0.5,
            event_coding: EventCoding::EventIsOne,
            seed: 0,
        }
    }
}

impl LocoParams {
    pub fn resolve_n(&self, n_rows: usize) -> usize {
        self.n.unwrap_or(((n_rows as f64 / 5.0).round() as usize).max(2))
    }

    pub fn resolve_m(&self, n_features: usize) -> usize {
        self.m.unwrap_or((n_features as f64).sqrt().ceil() as usize).min(n_features)
    }
}

/// Backend seed for patch `k`, derived so patches are independent streams
/// of the master seed.
pub fn patch_seed(seed: u64, k: usize) -> u64 {
    mix_seed(seed, 0x70A7_0000 ^ k as u64)
}

/// Draw `k` minipatches of `n` rows x `m` columns from an `n_rows` x
/// `n_cols` dataset, uniformly without replacement, deterministically in
/// `seed`.
pub fn sample_minipatches(
    n_rows: usize,
    n_cols: usize,
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<MiniPatch>> {
    if n < 1 || n >= n_rows {
        return Err(Error::InvalidInput(format!(
            "patch rows n = {n} must satisfy 1 <= n < N = {n_rows} so every row is \
             sometimes held out"
        )));
    }
    if m < 1 || m > n_cols {
        return Err(Error::InvalidInput(format!(
            "patch features m = {m} must satisfy 1 <= m <= M = {n_cols}"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidInput("need at least one minipatch".into()));
    }
    let mut patches = Vec::with_capacity(k);
    for patch_idx in 0..k {
        // Fresh RNG per patch: stream `patch_idx` of the master seed, so
        // patch k is the same no matter how many patches precede it.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(patch_idx as u64);
        let mut rows: Vec<u32> =
            rand::seq::index::sample(&mut rng, n_rows, n).iter().map(|i| i as u32).collect();
        let mut cols: Vec<u32> =
            rand::seq::index::sample(&mut rng, n_cols, m).iter().map(|j| j as u32).collect();
        rows.sort_unstable();
        cols.sort_unstable();
        patches.push(MiniPatch { rows, cols });
    }
    Ok(patches)
}

/// Everything a LOCO run produces. Feature order matches the dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OcclusionReport {
    pub feature_names: Vec<String>,
    /// Mean loss increase per feature (higher = more important).
    pub delta_bar: Vec<f64>,
    /// 1..M, rank 1 = largest delta_bar; exact ties broken by feature index.
    pub rank: Vec<usize>,
    /// Normal-approximation 95% interval for each delta_bar (informational;
    /// patch reuse correlates the terms, so coverage is approximate).
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Observations that passed the min_count floor for each feature.
    pub n_contributing: Vec<usize>,
    /// Patches pooled into each observation's baseline average.
    pub mu_counts: Vec<u32>,
    /// Patches pooled into the feature-occluded average, per (row, feature).
    pub mu_excl_counts: Array2<u32>,
    pub skipped_patches: usize,
    pub total_patches: usize,
    pub params: LocoParams,
    pub backend: BackendSpec,
}

/// Abort threshold as a whole percent, for the error message.
fn limit_percent(frac: f64) -> u32 {
    (frac * 100.0).round() as u32
}

/// Run the engine over a fixed patch list. `grid` must cover `ds`'s times;
/// patches index into `ds` directly.
pub fn run(
    ds: &SurvivalDataset,
    grid: &TimeGrid,
    backend: &BackendSpec,
    patches: &[MiniPatch],
    params: &LocoParams,
) -> Result<OcclusionReport> {
    let n_rows = ds.n_rows();
    let n_feat = ds.n_features();
    let d = grid.d();
    if patches.is_empty() {
        return Err(Error::InvalidInput("no minipatches supplied".into()));
    }
    for (k, p) in patches.iter().enumerate() {
        if p.rows.is_empty() || p.rows.len() >= n_rows {
            return Err(Error::InvalidInput(format!(
                "patch {k} has {} rows; need 1 <= n < {n_rows}",
                p.rows.len()
            )));
        }
        if p.cols.is_empty() || p.cols.len() > n_feat {
            return Err(Error::InvalidInput(format!("patch {k} has a bad column count")));
        }
        if p.rows.iter().any(|&r| r as usize >= n_rows)
            || p.cols.iter().any(|&c| c as usize >= n_feat)
        {
            return Err(Error::InvalidInput(format!("patch {k} has out-of-range indices")));
        }
    }
    let outcomes = ds.discretize(grid)?;
    let events = ds.events();

    // Accumulators. The occluded average for (i, j) is recovered as
    // (total - included_j) / (count - count_included_j), so only the m
    // *included* columns of each patch need updating per row.
    let mut mu_sum = vec![0.0f64; n_rows * d];
    let mut mu_count = vec![0u32; n_rows];
    let mut incl_sum = vec![0.0f64; n_rows * n_feat * d];
    let mut incl_count = vec![0u32; n_rows * n_feat];
    let mut skipped = 0usize;

    // Patches are fitted in parallel chunks but folded into the
    // accumulators strictly in patch order, so results are identical at any
    // worker count.
    struct PatchOut {
        skipped: bool,
        cols: Vec<u32>,
        out_rows: Vec<u32>,
        /// Concatenated curves, one `d`-block per out-of-patch row.
        curves: Vec<f64>,
    }

    const CHUNK: usize = 64;
    for (chunk_idx, chunk) in patches.chunks(CHUNK).enumerate() {
        let base = chunk_idx * CHUNK;
        let outs: Vec<Result<PatchOut>> = chunk
            .par_iter()
            .enumerate()
            .map(|(off, patch)| {
                let k = base + off;
                if !patch.rows.iter().any(|&r| events[r as usize]) {
                    return Ok(PatchOut {
                        skipped: true,
                        cols: Vec::new(),
                        out_rows: Vec::new(),
                        curves: Vec::new(),
                    });
                }
                let rows: Vec<usize> = patch.rows.iter().map(|&r| r as usize).collect();
                let cols: Vec<usize> = patch.cols.iter().map(|&c| c as usize).collect();
                let sub = ds.subset(&rows, &cols)?;
                let model = backend.fit(&sub, grid, patch_seed(params.seed, k))?;
                let mut member = vec![false; n_rows];
                for &r in &rows {
                    member[r] = true;
                }
                let mut out_rows = Vec::with_capacity(n_rows - rows.len());
                let mut curves = Vec::with_capacity((n_rows - rows.len()) * d);
                let mut x = vec![0.0f64; cols.len()];
                for i in 0..n_rows {
                    if member[i] {
                        continue;
                    }
                    for (slot, &c) in cols.iter().enumerate() {
                        x[slot] = ds.features()[(i, c)];
                    }
                    let curve = model.predict(ndarray::ArrayView1::from(&x[..]), grid)?;
                    out_rows.push(i as u32);
                    curves.extend_from_slice(curve.values());
                }
                Ok(PatchOut { skipped: false, cols: patch.cols.clone(), out_rows, curves })
            })
            .collect();

        for out in outs {
            let out = out?;
            if out.skipped {
                skipped += 1;
                continue;
            }
            for (slot, &row) in out.out_rows.iter().enumerate() {
                let i = row as usize;
                let curve = &out.curves[slot * d..(slot + 1) * d];
                let ms = &mut mu_sum[i * d..(i + 1) * d];
                for (a, &b) in ms.iter_mut().zip(curve) {
                    *a += b;
                }
                mu_count[i] += 1;
                for &c in &out.cols {
                    let j = c as usize;
                    let is = &mut incl_sum[(i * n_feat + j) * d..(i * n_feat + j + 1) * d];
                    for (a, &b) in is.iter_mut().zip(curve) {
                        *a += b;
                    }
                    incl_count[i * n_feat + j] += 1;
                }
            }
        }
    }

    let total = patches.len();
    if (skipped as f64) > params.max_skip_fraction * total as f64 {
        return Err(Error::CensoringSaturation {
            skipped,
            total,
            limit_percent: limit_percent(params.max_skip_fraction),
        });
    }

    // Per-observation occlusion deltas, pooled per feature.
    let mut delta_sum = vec![0.0f64; n_feat];
    let mut delta_sq = vec![0.0f64; n_feat];
    let mut n_contributing = vec![0usize; n_feat];
    let mut mu_curve = vec![0.0f64; d];
    let mut excl_curve = vec![0.0f64; d];
    for i in 0..n_rows {
        let ct = mu_count[i];
        if (ct as usize) < params.min_count {
            continue;
        }
        for (s, v) in mu_curve.iter_mut().enumerate() {
            *v = mu_sum[i * d + s] / ct as f64;
        }
        let base_curve = HazardCurve::new(mu_curve.clone())?;
        let base = nll_coded(&base_curve, &outcomes[i], params.event_coding)?;
        for j in 0..n_feat {
            let ci = incl_count[i * n_feat + j];
            let ce = ct - ci;
            if (ce as usize) < params.min_count {
                continue;
            }
            for (s, v) in excl_curve.iter_mut().enumerate() {
                *v = (mu_sum[i * d + s] - incl_sum[(i * n_feat + j) * d + s]) / ce as f64;
            }
            let curve = HazardCurve::new(excl_curve.clone())?;
            let occluded = nll_coded(&curve, &outcomes[i], params.event_coding)?;
            let delta = occluded - base;
            delta_sum[j] += delta;
            delta_sq[j] += delta * delta;
            n_contributing[j] += 1;
        }
    }

    let mut delta_bar = vec![0.0f64; n_feat];
    let mut ci_low = vec![0.0f64; n_feat];
    let mut ci_high = vec![0.0f64; n_feat];
    for j in 0..n_feat {
        let nj = n_contributing[j];
        if nj == 0 {
            return Err(Error::ZeroContribution {
                feature: ds.name(j).to_string(),
                min_count: params.min_count,
            });
        }
        let mean = delta_sum[j] / nj as f64;
        delta_bar[j] = mean;
        let var = if nj > 1 {
            (delta_sq[j] - delta_sum[j] * delta_sum[j] / nj as f64) / (nj - 1) as f64
        } else {
            0.0
        };
        let half = 1.96 * (var.max(0.0) / nj as f64).sqrt();
        ci_low[j] = mean - half;
        ci_high[j] = mean + half;
    }

    let order = ordinal_order(&delta_bar);
    let mut rank = vec![0usize; n_feat];
    for (pos, &j) in order.iter().enumerate() {
        rank[j] = pos + 1;
    }

    let mu_excl_counts = Array2::from_shape_fn((n_rows, n_feat), |(i, j)| {
        mu_count[i] - incl_count[i * n_feat + j]
    });

    Ok(OcclusionReport {
        feature_names: ds.feature_names().to_vec(),
        delta_bar,
        rank,
        ci_low,
        ci_high,
        n_contributing,
        mu_counts: mu_count,
        mu_excl_counts,
        skipped_patches: skipped,
        total_patches: total,
        params: params.clone(),
        backend: backend.clone(),
    })
}

/// Names of the `top_k` most important features, descending, exact ties
/// broken by dataset column order.
pub fn rank(report: &OcclusionReport, top_k: usize) -> Result<Vec<String>> {
    let m = report.feature_names.len();
    if top_k == 0 || top_k > m {
        return Err(Error::InvalidInput(format!(
            "top_k = {top_k} must lie in 1..={m}"
        )));
    }
    let order = ordinal_order(&report.delta_bar);
    Ok(order[..top_k].iter().map(|&j| report.feature_names[j].clone()).collect())
}

/// Convenience pipeline: build an equal-width grid over the dataset's
/// times, sample patches per `params`, and run the engine.
pub fn loco(
    ds: &SurvivalDataset,
    d: usize,
    backend: &BackendSpec,
    params: &LocoParams,
) -> Result<(TimeGrid, OcclusionReport)> {
    let grid = TimeGrid::equal_width(ds.times(), d)?;
    let n = params.resolve_n(ds.n_rows());
    let m = params.resolve_m(ds.n_features());
    let patches = sample_minipatches(ds.n_rows(), ds.n_features(), n, m, params.k, params.seed)?;
    let report = run(ds, &grid, backend, &patches, params)?;
    Ok((grid, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureKind;
    use ndarray::Array2;
    use rand::Rng;

    fn signal_data(n: usize, m: usize, seed: u64) -> SurvivalDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Array2::zeros((n, m));
        let mut times = Vec::new();
        let mut events = Vec::new();
        for i in 0..n {
            for j in 0..m {
                features[(i, j)] = rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            let eta: f64 = 1.5 * features[(i, 0)];
            let u: f64 = rng.random();
            let t = -u.max(1e-12).ln() / (0.2 * eta.exp());
            times.push(t.clamp(1e-3, 50.0));
            events.push(rng.random::<f64>() < 0.7);
        }
        SurvivalDataset::new(
            features,
            (0..m).map(|j| format!("f{j}")).collect(),
            vec![FeatureKind::Dbm; m],
            times,
            events,
        )
        .unwrap()
    }

    #[test]
    fn sampling_respects_sizes_and_bounds() {
        let patches = sample_minipatches(50, 10, 10, 3, 200, 9).unwrap();
        assert_eq!(patches.len(), 200);
        for p in &patches {
            assert_eq!(p.rows.len(), 10);
            assert_eq!(p.cols.len(), 3);
            assert!(p.rows.windows(2).all(|w| w[0] < w[1]), "rows not distinct-sorted");
            assert!(p.cols.windows(2).all(|w| w[0] < w[1]));
            assert!(p.rows.iter().all(|&r| r < 50));
            assert!(p.cols.iter().all(|&c| c < 10));
        }
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let a = sample_minipatches(40, 8, 8, 3, 50, 1).unwrap();
        let b = sample_minipatches(40, 8, 8, 3, 50, 1).unwrap();
        let c = sample_minipatches(40, 8, 8, 3, 50, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_rejects_bad_sizes() {
        assert!(sample_minipatches(10, 5, 10, 2, 5, 0).is_err()); // n == N
        assert!(sample_minipatches(10, 5, 0, 2, 5, 0).is_err());
        assert!(sample_minipatches(10, 5, 4, 6, 5, 0).is_err()); // m > M
        assert!(sample_minipatches(10, 5, 4, 2, 0, 0).is_err());
    }

    #[test]
    fn constant_backend_scores_every_feature_zero() {
        let ds = signal_data(40, 4, 3);
        let backend = BackendSpec::Constant { h: 0.125 };
        let params = LocoParams { k: 200, seed: 5, ..Default::default() };
        let (_, report) = loco(&ds, 8, &backend, &params).unwrap();
        assert!(report.delta_bar.iter().all(|&v| v == 0.0), "{:?}", report.delta_bar);
    }

    #[test]
    fn informative_feature_outranks_noise() {
        let ds = signal_data(100, 5, 4);
        let backend = BackendSpec::default();
        let params = LocoParams { k: 400, seed: 11, ..Default::default() };
        let (_, report) = loco(&ds, 8, &backend, &params).unwrap();
        assert_eq!(report.rank[0], 1, "delta_bar {:?}", report.delta_bar);
        assert!(report.delta_bar[0] > 0.0);
        let top = rank(&report, 2).unwrap();
        assert_eq!(top[0], "f0");
    }

    #[test]
    fn ranks_are_a_permutation() {
        let ds = signal_data(60, 6, 6);
        let params = LocoParams { k: 150, seed: 2, ..Default::default() };
        let (_, report) = loco(&ds, 8, &BackendSpec::default(), &params).unwrap();
        let mut sorted = report.rank.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=6).collect::<Vec<_>>());
    }

    #[test]
    fn identical_runs_are_bitwise_equal() {
        let ds = signal_data(50, 4, 8);
        let params = LocoParams { k: 120, seed: 3, ..Default::default() };
        let (_, a) = loco(&ds, 8, &BackendSpec::default(), &params).unwrap();
        let (_, b) = loco(&ds, 8, &BackendSpec::default(), &params).unwrap();
        assert_eq!(a.delta_bar, b.delta_bar);
        assert_eq!(a.rank, b.rank);
    }

    #[test]
    fn saturated_censoring_aborts() {
        // 2 events in 60 rows: most 12-row patches see zero events.
        let mut ds = signal_data(60, 4, 9);
        let n = ds.n_rows();
        let mut events = vec![false; n];
        events[0] = true;
        events[1] = true;
        ds = SurvivalDataset::new(
            ds.features().clone(),
            ds.feature_names().to_vec(),
            ds.kinds().to_vec(),
            ds.times().to_vec(),
            events,
        )
        .unwrap();
        let params = LocoParams { k: 300, seed: 4, ..Default::default() };
        let err = loco(&ds, 8, &BackendSpec::default(), &params).unwrap_err();
        match err {
            Error::CensoringSaturation { skipped, total, .. } => {
                assert_eq!(total, 300);
                assert!(skipped > 150);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn min_count_floor_limits_contributions() {
        let ds = signal_data(30, 3, 10);
        // With k = 12 and n = 6, an average row is outside ~9.6 patches and
        // outside-with-j-excluded far fewer; a floor of 8 must drop rows.
        let params =
            LocoParams { k: 12, min_count: 8, seed: 6, ..Default::default() };
        let result = loco(&ds, 6, &BackendSpec::default(), &params);
        match result {
            Ok((_, report)) => {
                for j in 0..3 {
                    assert!(report.n_contributing[j] < ds.n_rows());
                }
            }
            Err(Error::ZeroContribution { .. }) => {} // also acceptable at this scale
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn report_counts_match_patch_membership() {
        let ds = signal_data(25, 3, 11);
        let grid = TimeGrid::equal_width(ds.times(), 6).unwrap();
        let patches = sample_minipatches(25, 3, 5, 2, 40, 7).unwrap();
        let params = LocoParams { k: 40, min_count: 1, seed: 7, ..Default::default() };
        let report = run(&ds, &grid, &BackendSpec::Constant { h: 0.25 }, &patches, &params).unwrap();
        for i in 0..25 {
            let expect =
                patches.iter().filter(|p| !p.rows.contains(&(i as u32))).count() as u32;
            assert_eq!(report.mu_counts[i], expect);
            for j in 0..3 {
                let expect_excl = patches
                    .iter()
                    .filter(|p| !p.rows.contains(&(i as u32)) && !p.cols.contains(&(j as u32)))
                    .count() as u32;
                assert_eq!(report.mu_excl_counts[(i, j)], expect_excl);
            }
        }
    }
}
