//! One function per subcommand: resolve the config, load or generate the
//! dataset, delegate to the library, and write every artifact with the
//! shared metadata header.

use std::fs;

use loco_surv::backend::BackendSpec;
use loco_surv::dataset::{DatasetSchema, SurvivalDataset};
use loco_surv::error::{Error, Result};
use loco_surv::eval::{self, CvParams, Grouping};
use loco_surv::locomp::{self, LocoParams};
use loco_surv::report::{self, RunMeta};
use loco_surv::stability::{
    self, LocoImportance, RankDistribution, RfImportance,
};
use loco_surv::stats::mix_seed;
use loco_surv::{svg, synth};

use crate::config::{self, CvSection, Resolved, RunConfig};
use crate::{Command, CommonArgs};

pub fn run(cmd: Command) -> Result<()> {
    let (args, handler): (&CommonArgs, fn(&Resolved) -> Result<()>) = match &cmd {
        Command::Synth(a) => (a, cmd_synth),
        Command::Loco(a) => (a, cmd_loco),
        Command::Stability(a) => (a, cmd_stability),
        Command::Cv(a) => (a, cmd_cv),
    };
    let resolved = config::resolve(args)?;
    loco_surv::configure_workers(resolved.workers);
    fs::create_dir_all(&resolved.out_dir)?;
    handler(&resolved)
}

fn meta_for(r: &Resolved) -> RunMeta {
    RunMeta::new(&config::hashable_config(&r.cfg), r.seed)
}

fn load_dataset(cfg: &RunConfig, seed: u64) -> Result<SurvivalDataset> {
    let ds = match (&cfg.dataset, &cfg.synth) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput(
                "config sets both a dataset path and a synth section; pick one".into(),
            ))
        }
        (None, None) => {
            return Err(Error::InvalidInput(
                "config needs either a dataset path or a synth section".into(),
            ))
        }
        (Some(path), None) => {
            let schema =
                cfg.schema.clone().unwrap_or_else(|| DatasetSchema::plain("time", "event"));
            SurvivalDataset::load_csv(path, &schema)?
        }
        (None, Some(sc)) => synth::generate(sc, seed)?.0,
    };
    match cfg.variance_threshold {
        Some(t) => ds.variance_filter(t, &[]),
        None => Ok(ds),
    }
}

fn loco_params(cfg: &RunConfig, seed: u64) -> LocoParams {
    LocoParams { seed, ..cfg.loco.clone().unwrap_or_default() }
}

fn grid_d(cfg: &RunConfig) -> usize {
    cfg.d.unwrap_or(16)
}

fn backend(cfg: &RunConfig) -> BackendSpec {
    cfg.backend.clone().unwrap_or_default()
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn cmd_synth(r: &Resolved) -> Result<()> {
    let sc = r.cfg.synth.as_ref().ok_or_else(|| {
        Error::InvalidInput("the synth command needs a synth section in the config".into())
    })?;
    let meta = meta_for(r);
    let (ds, truth) = synth::generate(sc, r.seed)?;
    ds.write_csv(r.out_dir.join("dataset.csv"), &meta.comment_lines())?;
    report::write_ground_truth(&r.out_dir.join("ground_truth.json"), &truth, &meta)?;
    report::write_json(&r.out_dir.join("schema.json"), &meta, &ds.schema())?;
    Ok(())
}

fn cmd_loco(r: &Resolved) -> Result<()> {
    let meta = meta_for(r);
    let ds = load_dataset(&r.cfg, r.seed)?;
    let params = loco_params(&r.cfg, r.seed);
    let (_, occ) = locomp::loco(&ds, grid_d(&r.cfg), &backend(&r.cfg), &params)?;
    report::write_occlusion_csv(&r.out_dir.join("occlusion.csv"), &occ, &meta)?;
    report::write_json(&r.out_dir.join("occlusion.json"), &meta, &occ)?;
    Ok(())
}

fn cmd_stability(r: &Resolved) -> Result<()> {
    let meta = meta_for(r);
    let ds = load_dataset(&r.cfg, r.seed)?;
    let st = r.cfg.stability.clone().unwrap_or_default();
    let d = grid_d(&r.cfg);
    let loco_method = LocoImportance {
        d,
        backend: backend(&r.cfg),
        params: loco_params(&r.cfg, r.seed),
    };

    let dist = stability::subsample_ranks(
        &ds,
        &loco_method,
        st.subsamples,
        st.fraction,
        mix_seed(r.seed, 0x5A_01),
    )?;
    report::write_rank_distribution_csv(
        &r.out_dir.join("rank_distribution_loco.csv"),
        &dist,
        &meta,
    )?;
    let k_max = st.jaccard_max_k.min(ds.n_features()).max(1);
    let curve = stability::jaccard_curve(&dist, k_max)?;
    report::write_jaccard_csv(&r.out_dir.join("jaccard_loco.csv"), &curve, &meta)?;

    if st.compare_rf {
        let rf_method = RfImportance { d, params: st.rf.clone() };
        let rf_dist = stability::subsample_ranks(
            &ds,
            &rf_method,
            st.subsamples,
            st.fraction,
            mix_seed(r.seed, 0x5A_02),
        )?;
        report::write_rank_distribution_csv(
            &r.out_dir.join("rank_distribution_rf.csv"),
            &rf_dist,
            &meta,
        )?;
        let rf_curve = stability::jaccard_curve(&rf_dist, k_max)?;
        report::write_jaccard_csv(&r.out_dir.join("jaccard_rf.csv"), &rf_curve, &meta)?;
        let cmp = stability::compare_importance(&dist, &rf_dist)?;
        report::write_comparison_csv(&r.out_dir.join("comparison.csv"), &cmp, &meta)?;
        report::write_json(&r.out_dir.join("comparison.json"), &meta, &cmp)?;
        let svg_text = rank_spread_svg(&dist, &rf_dist, st.plot_top, &meta);
        fs::write(r.out_dir.join("rank_spread.svg"), svg_text)?;
    }

    let features = if st.permute_features.is_empty() {
        let top = dist
            .full_ranks
            .iter()
            .position(|&rank| rank == 1)
            .expect("competition ranks always contain rank 1");
        vec![dist.feature_names[top].clone()]
    } else {
        st.permute_features.clone()
    };
    let perm = stability::permutation_test(
        &ds,
        &loco_method,
        &features,
        st.permutations,
        mix_seed(r.seed, 0x5A_03),
        st.reuse_run_seed,
    )?;
    report::write_permutation_csv(&r.out_dir.join("permutation.csv"), &perm, &meta)?;
    report::write_json(&r.out_dir.join("permutation.json"), &meta, &perm)?;
    for result in &perm.results {
        let values: Vec<f64> = result.permuted_ranks.iter().map(|&v| v as f64).collect();
        let bins = ds.n_features().min(30);
        let svg_text = svg::histogram(
            &values,
            bins,
            &format!("Permutation null for {} (p = {:.4})", result.feature, result.p_value),
            "rank of the permuted feature",
            &[(result.original_rank as f64, format!("observed rank {}", result.original_rank))],
            &meta,
        );
        fs::write(
            r.out_dir.join(format!("permutation_{}.svg", sanitize(&result.feature))),
            svg_text,
        )?;
    }
    Ok(())
}

/// Side-by-side boxes of subsample ranks, the paired stability picture:
/// for each of the top features (by the LOCO full-data rank), one box per
/// method.
fn rank_spread_svg(
    loco: &RankDistribution,
    rf: &RankDistribution,
    top: usize,
    meta: &RunMeta,
) -> String {
    let m = loco.feature_names.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&j| loco.full_ranks[j]);
    order.truncate(top.max(1));
    let mut groups = Vec::new();
    for &j in &order {
        groups.push((format!("{} L", loco.feature_names[j]), loco.ranks_of(j)));
        groups.push((format!("{} R", rf.feature_names[j]), rf.ranks_of(j)));
    }
    svg::boxplot(
        &groups,
        "Subsample rank spread: LOCO-MP (L) vs RF importance (R)",
        "rank across subsamples",
        meta,
    )
}

/// Rank every DBM feature of `data` by a LOCO-MP run on its DBM view.
fn rank_dbm(
    data: &SurvivalDataset,
    d: usize,
    backend: &BackendSpec,
    base: &LocoParams,
    seed: u64,
) -> Result<Vec<String>> {
    let view = data.dbm_view()?;
    let params = LocoParams { seed, ..base.clone() };
    let (_, occ) = locomp::loco(&view, d, backend, &params)?;
    locomp::rank(&occ, view.n_features())
}

fn groupings_with_ablations(
    ds: &SurvivalDataset,
    ranked: &[String],
    cv: &CvSection,
) -> Result<Vec<Grouping>> {
    let mut groupings = eval::standard_groupings(ds, ranked, cv.top_k)?;
    if !cv.ablate.is_empty() {
        let base = groupings.clone();
        for g in &base {
            if cv.ablate.iter().all(|name| g.columns.contains(name)) {
                groupings.push(eval::ablate(g, &cv.ablate)?);
            }
        }
    }
    Ok(groupings)
}

fn cmd_cv(r: &Resolved) -> Result<()> {
    let meta = meta_for(r);
    let ds = load_dataset(&r.cfg, r.seed)?;
    let cv = r.cfg.cv.clone().unwrap_or_default();
    let d = grid_d(&r.cfg);
    let be = backend(&r.cfg);
    let base_loco = loco_params(&r.cfg, r.seed);
    let model = cv.model.clone().unwrap_or_else(|| config::model_from_backend(&be));
    let params = CvParams {
        repeats: cv.repeats,
        folds: cv.folds,
        d,
        stratify: cv.stratify,
        seed: r.seed,
    };
    let outcome = r.cfg.outcome_label.clone().unwrap_or_else(|| "survival".into());

    let rep = if cv.refit_loco_per_fold {
        let make = |train: &SurvivalDataset, seed: u64| -> Result<Vec<Grouping>> {
            let ranked = rank_dbm(train, d, &be, &base_loco, seed)?;
            groupings_with_ablations(train, &ranked, &cv)
        };
        eval::repeated_cv_refit(&ds, &make, &model, &params, &outcome)?
    } else {
        let ranked = rank_dbm(&ds, d, &be, &base_loco, mix_seed(r.seed, 0xDB))?;
        report::write_json(&r.out_dir.join("ranked_dbm.json"), &meta, &ranked)?;
        let groupings = groupings_with_ablations(&ds, &ranked, &cv)?;
        let rep = eval::repeated_cv(&ds, &groupings, &model, &params, &outcome)?;
        if !cv.k_list.is_empty() {
            let entries = eval::topk_sweep(&ds, &ranked, &cv.k_list, &model, &params, &outcome)?;
            report::write_sweep_csv(&r.out_dir.join("sweep.csv"), &entries, &meta)?;
            let mut groups = Vec::new();
            for e in &entries {
                for summary in &e.report.summaries {
                    let tag = if summary.name == "top_dbm" { "top" } else { "conv+top" };
                    groups.push((
                        format!("k={} {}", e.k, tag),
                        e.report.values_for(&summary.name),
                    ));
                }
            }
            let svg_text = svg::boxplot(
                &groups,
                &format!("C-index across top-k cuts ({outcome})"),
                "C-index",
                &meta,
            );
            fs::write(r.out_dir.join("sweep.svg"), svg_text)?;
        }
        rep
    };

    report::write_cindex_csv(&r.out_dir.join("cindex.csv"), &rep, &meta)?;
    report::write_json(&r.out_dir.join("cindex.json"), &meta, &rep)?;
    let groups: Vec<(String, Vec<f64>)> = rep
        .summaries
        .iter()
        .map(|s| (s.name.clone(), rep.values_for(&s.name)))
        .collect();
    let svg_text = svg::boxplot(
        &groups,
        &format!("C-index by feature grouping ({outcome})"),
        "C-index",
        &meta,
    );
    fs::write(r.out_dir.join("cindex.svg"), svg_text)?;
    Ok(())
}
