//! Report serialization: every artifact (CSV, JSON, SVG) opens with the
//! same metadata block — tool version, canonical config hash, seed — so a
//! result file always identifies the run that produced it.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::eval::{CIndexReport, SweepEntry};
use crate::locomp::OcclusionReport;
use crate::stability::{JaccardPoint, PermutationReport, RankDistribution, StabilityComparison};
use crate::synth::GroundTruth;

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub tool: String,
    pub config_hash: String,
    pub seed: u64,
}

impl RunMeta {
    pub fn new(config: &Value, seed: u64) -> Self {
        Self {
            tool: format!("loco-surv {}", env!("CARGO_PKG_VERSION")),
            config_hash: config_hash(config),
            seed,
        }
    }

    pub fn comment_lines(&self) -> Vec<String> {
        vec![
            format!("tool: {}", self.tool),
            format!("config_hash: {}", self.config_hash),
            format!("seed: {}", self.seed),
        ]
    }

    fn json(&self) -> Value {
        json!({ "tool": self.tool, "config_hash": self.config_hash, "seed": self.seed })
    }
}

/// JSON with object keys sorted recursively and no whitespace: one byte
/// representation per logical config, so its hash is stable.
pub fn canonical_json(v: &Value) -> String {
    fn canon(v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                out.push('{');
                for (i, k) in keys.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&Value::String((*k).clone()).to_string());
                    out.push(':');
                    canon(&map[*k], out);
                }
                out.push('}');
            }
            Value::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    canon(item, out);
                }
                out.push(']');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    let mut out = String::new();
    canon(v, &mut out);
    out
}

pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(canonical_json(config).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// CSV with leading `# ` metadata comments, then a header row, then data.
pub fn write_table(
    path: &Path,
    meta: &RunMeta,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut file = File::create(path)?;
    for line in meta.comment_lines() {
        writeln!(file, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON document `{"meta": ..., "report": ...}` — metadata first.
pub fn write_json<T: Serialize>(path: &Path, meta: &RunMeta, report: &T) -> Result<()> {
    let doc = json!({ "meta": meta.json(), "report": serde_json::to_value(report)? });
    let mut file = File::create(path)?;
    file.write_all(serde_json::to_string_pretty(&doc)?.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Importance table sorted by rank: the headline LOCO-MP output.
pub fn write_occlusion_csv(path: &Path, report: &OcclusionReport, meta: &RunMeta) -> Result<()> {
    let m = report.feature_names.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&j| report.rank[j]);
    let rows: Vec<Vec<String>> = order
        .into_iter()
        .map(|j| {
            vec![
                report.rank[j].to_string(),
                report.feature_names[j].clone(),
                fmt(report.delta_bar[j]),
                fmt(report.ci_low[j]),
                fmt(report.ci_high[j]),
                report.n_contributing[j].to_string(),
            ]
        })
        .collect();
    write_table(
        path,
        meta,
        &["rank", "feature", "delta_bar", "ci_low", "ci_high", "n_contributing"],
        &rows,
    )
}

/// Long-format rank table: the full-data run plus every completed
/// subsample, one row per (feature, source).
pub fn write_rank_distribution_csv(
    path: &Path,
    dist: &RankDistribution,
    meta: &RunMeta,
) -> Result<()> {
    let mut rows = Vec::new();
    for (j, name) in dist.feature_names.iter().enumerate() {
        rows.push(vec![
            name.clone(),
            "full".to_string(),
            fmt(dist.full_scores[j]),
            dist.full_ranks[j].to_string(),
        ]);
    }
    for (b, run) in dist.subsamples.iter().enumerate() {
        if let Some(run) = run {
            for (j, name) in dist.feature_names.iter().enumerate() {
                rows.push(vec![
                    name.clone(),
                    format!("subsample_{b}"),
                    fmt(run.scores[j]),
                    run.ranks[j].to_string(),
                ]);
            }
        }
    }
    write_table(path, meta, &["feature", "source", "score", "rank"], &rows)
}

pub fn write_jaccard_csv(path: &Path, curve: &[JaccardPoint], meta: &RunMeta) -> Result<()> {
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|p| vec![p.k.to_string(), fmt(p.mean), fmt(p.median)])
        .collect();
    write_table(path, meta, &["k", "mean_jaccard", "median_jaccard"], &rows)
}

/// One row per (feature, permutation), with the feature's original rank
/// and p-value repeated for self-contained plotting.
pub fn write_permutation_csv(
    path: &Path,
    report: &PermutationReport,
    meta: &RunMeta,
) -> Result<()> {
    let mut rows = Vec::new();
    for r in &report.results {
        for (p, &rank) in r.permuted_ranks.iter().enumerate() {
            rows.push(vec![
                r.feature.clone(),
                r.original_rank.to_string(),
                fmt(r.p_value),
                p.to_string(),
                rank.to_string(),
            ]);
        }
    }
    write_table(
        path,
        meta,
        &["feature", "original_rank", "p_value", "permutation", "permuted_rank"],
        &rows,
    )
}

pub fn write_comparison_csv(
    path: &Path,
    cmp: &StabilityComparison,
    meta: &RunMeta,
) -> Result<()> {
    let mut rows = Vec::new();
    for (j, name) in cmp.feature_names.iter().enumerate() {
        rows.push(vec![name.clone(), cmp.method_a.clone(), fmt(cmp.rank_iqr_a[j])]);
        rows.push(vec![name.clone(), cmp.method_b.clone(), fmt(cmp.rank_iqr_b[j])]);
    }
    write_table(path, meta, &["feature", "method", "rank_iqr"], &rows)
}

/// The boxplot-ready long format: grouping, repeat, fold, C-index (blank
/// for missing cells), note.
pub fn write_cindex_csv(path: &Path, report: &CIndexReport, meta: &RunMeta) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            vec![
                c.grouping.clone(),
                c.repeat.to_string(),
                c.fold.to_string(),
                fmt_opt(c.c_index),
                c.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_table(path, meta, &["grouping", "repeat", "fold", "c_index", "note"], &rows)
}

pub fn write_sweep_csv(path: &Path, entries: &[SweepEntry], meta: &RunMeta) -> Result<()> {
    let mut rows = Vec::new();
    for e in entries {
        for c in &e.report.cells {
            rows.push(vec![
                e.k.to_string(),
                c.grouping.clone(),
                c.repeat.to_string(),
                c.fold.to_string(),
                fmt_opt(c.c_index),
                c.note.clone().unwrap_or_default(),
            ]);
        }
    }
    write_table(path, meta, &["k", "grouping", "repeat", "fold", "c_index", "note"], &rows)
}

pub fn write_ground_truth(path: &Path, truth: &GroundTruth, meta: &RunMeta) -> Result<()> {
    write_json(path, meta, truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys_recursively() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": {"z": [1, 2], "y": null}}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"a": {"y": null, "z": [1, 2]}, "b": 1}"#).unwrap();
        assert_eq!(canonical_json(&a), canonical_json(&b));
        assert_eq!(canonical_json(&a), r#"{"a":{"y":null,"z":[1,2]},"b":1}"#);
        assert_eq!(config_hash(&a), config_hash(&b));
        let c: Value = serde_json::from_str(r#"{"a": {"y": 0, "z": [1, 2]}, "b": 1}"#).unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn table_has_metadata_then_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let meta = RunMeta::new(&json!({"x": 1}), 7);
        write_table(
            &path,
            &meta,
            &["a", "b"],
            &[vec!["1".into(), "two".into()], vec![fmt(0.1 + 0.2), String::new()]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool: loco-surv "));
        assert!(lines[1].starts_with("# config_hash: "));
        assert_eq!(lines[2], "# seed: 7");
        assert_eq!(lines[3], "a,b");
        assert_eq!(lines[4], "1,two");
        assert_eq!(lines[5], "0.30000000000000004,");
    }

    #[test]
    fn json_document_puts_meta_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let meta = RunMeta::new(&json!({"x": 1}), 3);
        write_json(&path, &meta, &json!({"value": 42})).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.find("\"meta\"").unwrap() < text.find("\"report\"").unwrap());
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["meta"]["seed"], 3);
        assert_eq!(doc["report"]["value"], 42);
    }

    #[test]
    fn csv_quotes_awkward_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        let meta = RunMeta::new(&json!({}), 0);
        write_table(&path, &meta, &["name"], &[vec!["a,b \"c\"".into()]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"a,b \"\"c\"\"\""), "{text}");
    }
}
