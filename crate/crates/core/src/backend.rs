//! Pluggable survival models for minipatch fitting.
//!
//! A backend must do two things: fit on an arbitrary row/column subset, and
//! emit a discrete hazard curve for a new feature vector on a shared grid.
//! The forest and both Cox penalties qualify; the constant backend ignores
//! its training data entirely and exists for exactness tests (occluding a
//! feature cannot change its predictions).

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::cox::{CoxModel, CoxParams};
use crate::dataset::{SurvivalDataset, TimeGrid};
use crate::error::{Error, Result};
use crate::forest::{ForestParams, SurvivalForest};
use crate::hazard::HazardCurve;

fn default_patch_trees() -> usize {
    50
}

fn default_patch_min_leaf() -> usize {
    3
}

fn default_cox_lambda() -> f64 {
    0.1
}

/// Which model each minipatch is fitted with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    /// Small random survival forest (the default in-patch learner).
    Forest {
        #[serde(default = "default_patch_trees")]
        n_trees: usize,
        #[serde(default)]
        mtry: Option<usize>,
        #[serde(default = "default_patch_min_leaf")]
        min_leaf: usize,
        #[serde(default)]
        max_depth: Option<usize>,
    },
    CoxRidge {
        #[serde(default = "default_cox_lambda")]
        lambda: f64,
    },
    CoxLasso {
        #[serde(default = "default_cox_lambda")]
        lambda: f64,
    },
    /// Predicts the same flat hazard for every input, regardless of the
    /// training data.
    Constant { h: f64 },
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec::Forest {
            n_trees: default_patch_trees(),
            mtry: None,
            min_leaf: default_patch_min_leaf(),
            max_depth: None,
        }
    }
}

impl BackendSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BackendSpec::Forest { .. } => "forest",
            BackendSpec::CoxRidge { .. } => "cox_ridge",
            BackendSpec::CoxLasso { .. } => "cox_lasso",
            BackendSpec::Constant { .. } => "constant",
        }
    }

    /// Fit on `ds` (already restricted to a patch's rows and columns) with
    /// outcomes discretized on `grid`.
    pub fn fit(&self, ds: &SurvivalDataset, grid: &TimeGrid, seed: u64) -> Result<FittedModel> {
        match self {
            BackendSpec::Forest { n_trees, mtry, min_leaf, max_depth } => {
                let params = ForestParams {
                    n_trees: *n_trees,
                    mtry: *mtry,
                    min_leaf: *min_leaf,
                    max_depth: *max_depth,
                    seed,
                };
                Ok(FittedModel::Forest(SurvivalForest::fit(ds, grid, &params)?))
            }
            BackendSpec::CoxRidge { lambda } => {
                let model = CoxModel::fit(ds, &CoxParams::ridge(*lambda))?;
                Ok(FittedModel::Cox(model))
            }
            BackendSpec::CoxLasso { lambda } => {
                let model = CoxModel::fit(ds, &CoxParams::lasso(*lambda))?;
                Ok(FittedModel::Cox(model))
            }
            BackendSpec::Constant { h } => {
                if !(0.0..=1.0).contains(h) {
                    return Err(Error::InvalidInput(format!(
                        "constant backend hazard {h} must lie in [0, 1]"
                    )));
                }
                Ok(FittedModel::Constant(HazardCurve::constant(*h, grid.d())?))
            }
        }
    }
}

/// A backend fitted to one minipatch.
pub enum FittedModel {
    Forest(SurvivalForest),
    Cox(CoxModel),
    Constant(HazardCurve),
}

impl FittedModel {
    /// Hazard curve for a feature vector laid out in the backend's fitted
    /// column order.
    pub fn predict(&self, x: ArrayView1<'_, f64>, grid: &TimeGrid) -> Result<HazardCurve> {
        match self {
            FittedModel::Forest(f) => f.predict_hazard(x),
            FittedModel::Cox(c) => c.predict_hazard(x, grid),
            FittedModel::Constant(curve) => Ok(curve.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureKind;
    use ndarray::{array, Array2};

    fn tiny() -> (SurvivalDataset, TimeGrid) {
        let features: Array2<f64> = array![
            [0.0, 1.0],
            [1.0, 0.5],
            [2.0, -0.5],
            [3.0, 0.2],
            [4.0, 1.5],
            [5.0, -1.0],
        ];
        let ds = SurvivalDataset::new(
            features,
            vec!["a".into(), "b".into()],
            vec![FeatureKind::Dbm; 2],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            vec![true, false, true, true, false, true],
        )
        .unwrap();
        let grid = TimeGrid::equal_width(ds.times(), 4).unwrap();
        (ds, grid)
    }

    #[test]
    fn every_backend_fits_and_predicts() {
        let (ds, grid) = tiny();
        let specs = [
            BackendSpec::Forest { n_trees: 5, mtry: None, min_leaf: 1, max_depth: None },
            BackendSpec::CoxRidge { lambda: 0.5 },
            BackendSpec::CoxLasso { lambda: 0.05 },
            BackendSpec::Constant { h: 0.125 },
        ];
        for spec in specs {
            let model = spec.fit(&ds, &grid, 7).unwrap();
            let curve = model.predict(ds.row(0), &grid).unwrap();
            assert_eq!(curve.d(), 4);
        }
    }

    #[test]
    fn constant_backend_ignores_input() {
        let (ds, grid) = tiny();
        let model = BackendSpec::Constant { h: 0.25 }.fit(&ds, &grid, 0).unwrap();
        let a = model.predict(ds.row(0), &grid).unwrap();
        let b = model.predict(ds.row(5), &grid).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values(), &[0.25; 4]);
    }

    #[test]
    fn backend_spec_json_round_trips() {
        let spec = BackendSpec::default();
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<BackendSpec>(&s).unwrap(), spec);
        let parsed: BackendSpec = serde_json::from_str(r#"{"kind":"cox_ridge"}"#).unwrap();
        assert_eq!(parsed, BackendSpec::CoxRidge { lambda: 0.1 });
    }
}
