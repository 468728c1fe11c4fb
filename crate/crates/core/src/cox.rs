//! Penalized Cox proportional hazards: ridge via Newton-Raphson, lasso via
//! cyclic coordinate descent on the usual quadratic surrogate, both on the
//! Breslow partial likelihood with Breslow tie handling.
//!
//! Features are standardized internally (mean 0, unit variance); reported
//! coefficients are mapped back to the original scale. The fitted objective
//! is the **mean** partial log-likelihood minus the penalty, so `lambda`
//! has the familiar per-observation scale and `lambda >= lambda_max` zeroes
//! a lasso fit exactly.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::dataset::{SurvivalDataset, TimeGrid};
use crate::error::{Error, Result};
use crate::hazard::HazardCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    Ridge,
    Lasso,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxParams {
    pub penalty: PenaltyKind,
    pub lambda: f64,
    /// Convergence threshold on the largest coefficient change.
    pub tol: f64,
    pub max_iter: usize,
}

impl CoxParams {
    pub fn ridge(lambda: f64) -> Self {
        Self { penalty: PenaltyKind::Ridge, lambda, tol: 1e-7, max_iter: 1000 }
    }

    pub fn lasso(lambda: f64) -> Self {
        Self { penalty: PenaltyKind::Lasso, lambda, tol: 1e-7, max_iter: 1000 }
    }
}

/// Breslow baseline cumulative hazard: a step function with one increment
/// per distinct event time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHazard {
    pub times: Vec<f64>,
    pub increments: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoxModel {
    /// Coefficients on the original feature scale.
    beta: Vec<f64>,
    /// Coefficients on the standardized scale actually optimized.
    beta_std: Vec<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
    params: CoxParams,
    baseline: BaselineHazard,
    iterations: usize,
    /// Penalized objective after each outer iteration (ascending if all is
    /// well; kept for diagnostics and invariant tests).
    pub objective_trace: Vec<f64>,
}

/// Rows sorted by follow-up time with tie groups precomputed, plus the
/// standardized design matrix. The likelihood code works off this.
struct CoxData {
    /// Standardized features in time-sorted row order, N x M.
    x: Array2<f64>,
    /// Event indicator per sorted row.
    event: Vec<bool>,
    /// Sorted observation times (ascending).
    time: Vec<f64>,
    /// Tie groups as (start, end) ranges into the sorted order.
    groups: Vec<(usize, usize)>,
    n: usize,
    m: usize,
}

impl CoxData {
    fn build(ds: &SurvivalDataset) -> Result<(Self, Vec<f64>, Vec<f64>)> {
        let n = ds.n_rows();
        let m = ds.n_features();
        if ds.n_events() == 0 {
            return Err(Error::InvalidInput(
                "cannot fit a Cox model on a dataset with zero events".into(),
            ));
        }
        let mut means = vec![0.0; m];
        let mut scales = vec![1.0; m];
        for j in 0..m {
            let col = ds.column(j);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            means[j] = mean;
            scales[j] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ds.times()[a].partial_cmp(&ds.times()[b]).unwrap());
        let mut x = Array2::zeros((n, m));
        let mut event = Vec::with_capacity(n);
        let mut time = Vec::with_capacity(n);
        for (row, &i) in order.iter().enumerate() {
            for j in 0..m {
                x[(row, j)] = (ds.features()[(i, j)] - means[j]) / scales[j];
            }
            event.push(ds.events()[i]);
            time.push(ds.times()[i]);
        }
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || time[i] != time[start] {
                groups.push((start, i));
                start = i;
            }
        }
        Ok((Self { x, event, time, groups, n, m }, means, scales))
    }

    fn events_in(&self, g: (usize, usize)) -> usize {
        self.event[g.0..g.1].iter().filter(|&&e| e).count()
    }

    fn eta(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..self.m {
                    s += self.x[(i, j)] * beta[j];
                }
                s.clamp(-700.0, 700.0)
            })
            .collect()
    }

    /// Mean Breslow partial log-likelihood at `beta` (standardized scale).
    fn mean_loglik(&self, beta: &[f64]) -> f64 {
        let eta = self.eta(beta);
        let w: Vec<f64> = eta.iter().map(|&e| e.exp()).collect();
        let mut ll = 0.0;
        let mut s0 = 0.0;
        for &(lo, hi) in self.groups.iter().rev() {
            for i in lo..hi {
                s0 += w[i];
            }
            for i in lo..hi {
                if self.event[i] {
                    ll += eta[i] - s0.ln();
                }
            }
        }
        ll / self.n as f64
    }

    /// Mean log-likelihood, gradient, and negative Hessian at `beta`.
    fn loglik_grad_hess(&self, beta: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let m = self.m;
        let eta = self.eta(beta);
        let w: Vec<f64> = eta.iter().map(|&e| e.exp()).collect();
        let mut ll = 0.0;
        let mut grad = vec![0.0; m];
        let mut neg_hess = vec![0.0; m * m];
        let mut s0 = 0.0;
        let mut s1 = vec![0.0; m];
        let mut s2 = vec![0.0; m * m];
        for &(lo, hi) in self.groups.iter().rev() {
            for i in lo..hi {
                let wi = w[i];
                s0 += wi;
                for j in 0..m {
                    let xj = self.x[(i, j)];
                    s1[j] += wi * xj;
                    for k in j..m {
                        s2[j * m + k] += wi * xj * self.x[(i, k)];
                    }
                }
            }
            let d = self.events_in((lo, hi));
            if d == 0 {
                continue;
            }
            let df = d as f64;
            ll -= df * s0.ln();
            for i in lo..hi {
                if self.event[i] {
                    ll += eta[i];
                    for j in 0..m {
                        grad[j] += self.x[(i, j)];
                    }
                }
            }
            for j in 0..m {
                let mj = s1[j] / s0;
                grad[j] -= df * mj;
                for k in j..m {
                    let v = df * (s2[j * m + k] / s0 - mj * (s1[k] / s0));
                    neg_hess[j * m + k] += v;
                }
            }
        }
        let nf = self.n as f64;
        ll /= nf;
        for g in grad.iter_mut() {
            *g /= nf;
        }
        for j in 0..m {
            for k in j..m {
                neg_hess[j * m + k] /= nf;
                neg_hess[k * m + j] = neg_hess[j * m + k];
            }
        }
        (ll, grad, neg_hess)
    }

    /// Per-row score and curvature with respect to the linear predictor,
    /// evaluated at `eta`. Returns (score g_i, curvature w_i).
    fn eta_derivatives(&self, eta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w: Vec<f64> = eta.iter().map(|&e| e.exp()).collect();
        let mut s0_of_group = vec![0.0; self.groups.len()];
        let mut s0 = 0.0;
        for (gi, &(lo, hi)) in self.groups.iter().enumerate().rev() {
            for i in lo..hi {
                s0 += w[i];
            }
            s0_of_group[gi] = s0;
        }
        let mut g = vec![0.0; self.n];
        let mut curv = vec![0.0; self.n];
        let mut cum1 = 0.0; // sum over earlier-or-equal event groups of d/S0
        let mut cum2 = 0.0; // same with d/S0^2
        for (gi, &(lo, hi)) in self.groups.iter().enumerate() {
            let d = self.events_in((lo, hi)) as f64;
            if d > 0.0 {
                cum1 += d / s0_of_group[gi];
                cum2 += d / (s0_of_group[gi] * s0_of_group[gi]);
            }
            for i in lo..hi {
                let a = w[i] * cum1;
                g[i] = (self.event[i] as u8 as f64) - a;
                curv[i] = (a - w[i] * w[i] * cum2).max(0.0);
            }
        }
        (g, curv)
    }
}

/// Largest mean absolute score coordinate at `beta = 0` on the standardized
/// scale: the smallest lasso penalty that produces an all-zero fit.
pub fn lambda_max(ds: &SurvivalDataset) -> Result<f64> {
    let (data, _, _) = CoxData::build(ds)?;
    let (_, grad, _) = data.loglik_grad_hess(&vec![0.0; data.m]);
    Ok(grad.iter().fold(0.0f64, |acc, &g| acc.max(g.abs())))
}

/// Log-spaced grid of `points` lambdas from `lambda_max` down `decades`
/// orders of magnitude, descending.
pub fn lambda_grid(lambda_max: f64, points: usize, decades: f64) -> Vec<f64> {
    if points == 1 {
        return vec![lambda_max];
    }
    (0..points)
        .map(|i| lambda_max * 10f64.powf(-decades * i as f64 / (points - 1) as f64))
        .collect()
}

impl CoxModel {
    pub fn fit(ds: &SurvivalDataset, params: &CoxParams) -> Result<Self> {
        if !params.lambda.is_finite() || params.lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "penalty strength {} must be finite and >= 0",
                params.lambda
            )));
        }
        if params.tol <= 0.0 || params.max_iter == 0 {
            return Err(Error::InvalidInput("tol must be > 0 and max_iter >= 1".into()));
        }
        let (data, means, scales) = CoxData::build(ds)?;
        let (beta_std, iterations, objective_trace) = match params.penalty {
            PenaltyKind::Ridge => fit_ridge(&data, params)?,
            PenaltyKind::Lasso => fit_lasso(&data, params)?,
        };
        let beta: Vec<f64> =
            beta_std.iter().zip(&scales).map(|(&b, &s)| b / s).collect();

        // Breslow baseline from the centered linear predictor (numerically
        // safe; the centering constant is absorbed into the increments).
        let eta: Vec<f64> = {
            let mut e = Vec::with_capacity(data.n);
            for i in 0..data.n {
                let mut s = 0.0;
                for j in 0..data.m {
                    s += data.x[(i, j)] * beta_std[j];
                }
                e.push(s.clamp(-700.0, 700.0));
            }
            e
        };
        let w: Vec<f64> = eta.iter().map(|&e| e.exp()).collect();
        let mut s0_of_group = vec![0.0; data.groups.len()];
        let mut s0 = 0.0;
        for (gi, &(lo, hi)) in data.groups.iter().enumerate().rev() {
            for i in lo..hi {
                s0 += w[i];
            }
            s0_of_group[gi] = s0;
        }
        let mut times = Vec::new();
        let mut increments = Vec::new();
        for (gi, &(lo, hi)) in data.groups.iter().enumerate() {
            let d = data.events_in((lo, hi));
            if d > 0 {
                times.push(data.time[lo]);
                increments.push(d as f64 / s0_of_group[gi]);
            }
        }

        Ok(Self {
            beta,
            beta_std,
            means,
            scales,
            params: params.clone(),
            baseline: BaselineHazard { times, increments },
            iterations,
            objective_trace,
        })
    }

    /// Coefficients on the original feature scale.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_standardized(&self) -> &[f64] {
        &self.beta_std
    }

    pub fn baseline(&self) -> &BaselineHazard {
        &self.baseline
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Linear risk score `x . beta` on the original scale (no centering):
    /// strictly monotone in each coefficient's direction, suitable for
    /// ranking and concordance.
    pub fn risk(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != self.beta.len() {
            return Err(Error::InvalidInput(format!(
                "risk input has {} features, model has {}",
                x.len(),
                self.beta.len()
            )));
        }
        Ok(x.iter().zip(&self.beta).map(|(&v, &b)| v * b).sum())
    }

    fn centered_eta(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut s = 0.0;
        for (j, &v) in x.iter().enumerate() {
            s += self.beta_std[j] * (v - self.means[j]) / self.scales[j];
        }
        s.clamp(-700.0, 700.0)
    }

    /// Discrete hazard curve on `grid`: per interval,
    /// `h = 1 - exp(-exp(eta) * dH0)` with `dH0` the baseline increments
    /// falling in that interval. Errors if the baseline extends beyond the
    /// grid.
    pub fn predict_hazard(&self, x: ArrayView1<'_, f64>, grid: &TimeGrid) -> Result<HazardCurve> {
        if x.len() != self.beta.len() {
            return Err(Error::InvalidInput(format!(
                "prediction input has {} features, model has {}",
                x.len(),
                self.beta.len()
            )));
        }
        let d = grid.d();
        let mut dh0 = vec![0.0; d];
        for (&t, &inc) in self.baseline.times.iter().zip(&self.baseline.increments) {
            let s = grid.interval_of(t).map_err(|_| {
                Error::InvalidInput(format!(
                    "baseline event time {t} lies beyond the grid end {}; \
                     the grid must cover the training follow-up",
                    grid.end()
                ))
            })?;
            dh0[s] += inc;
        }
        let rel = self.centered_eta(x).exp();
        let h: Vec<f64> = dh0.iter().map(|&v| 1.0 - (-rel * v).exp()).collect();
        HazardCurve::new(h)
    }
}

fn penalty(beta: &[f64], params: &CoxParams) -> f64 {
    match params.penalty {
        PenaltyKind::Ridge => 0.5 * params.lambda * beta.iter().map(|b| b * b).sum::<f64>(),
        PenaltyKind::Lasso => params.lambda * beta.iter().map(|b| b.abs()).sum::<f64>(),
    }
}

fn fit_ridge(data: &CoxData, params: &CoxParams) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let m = data.m;
    let lambda = params.lambda;
    let mut beta = vec![0.0; m];
    let mut objective = data.mean_loglik(&beta) - penalty(&beta, params);
    let mut trace = vec![objective];
    for iter in 1..=params.max_iter {
        let (_, grad, mut neg_hess) = data.loglik_grad_hess(&beta);
        let pen_grad: Vec<f64> =
            grad.iter().zip(&beta).map(|(&g, &b)| g - lambda * b).collect();
        for j in 0..m {
            neg_hess[j * m + j] += lambda;
        }
        let mut step = pen_grad.clone();
        cholesky_solve(&mut neg_hess, &mut step, m)?;

        // Backtrack if a full Newton step overshoots the objective.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> =
                beta.iter().zip(&step).map(|(&b, &s)| b + scale * s).collect();
            let cand_obj = data.mean_loglik(&cand) - penalty(&cand, params);
            if cand_obj >= objective - 1e-10 {
                let delta = cand
                    .iter()
                    .zip(&beta)
                    .map(|(&a, &b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                beta = cand;
                objective = cand_obj;
                trace.push(objective);
                accepted = true;
                if delta < params.tol {
                    return Ok((beta, iter, trace));
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // The step cannot improve the objective even after halving:
            // treat the current point as converged.
            return Ok((beta, iter, trace));
        }
    }
    let (_, grad, _) = data.loglik_grad_hess(&beta);
    let pen_grad_norm = grad
        .iter()
        .zip(&beta)
        .map(|(&g, &b)| (g - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Err(Error::NoConvergence { iterations: params.max_iter, gradient_norm: pen_grad_norm })
}

fn fit_lasso(data: &CoxData, params: &CoxParams) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let m = data.m;
    let n = data.n as f64;
    let lambda = params.lambda;
    let mut beta = vec![0.0; m];
    let mut objective = data.mean_loglik(&beta) - penalty(&beta, params);
    let mut trace = vec![objective];
    for iter in 1..=params.max_iter {
        let eta = data.eta(&beta);
        let (score, curv) = data.eta_derivatives(&eta);
        // Working response for rows with usable curvature.
        let z: Vec<f64> = eta
            .iter()
            .zip(&score)
            .zip(&curv)
            .map(|((&e, &g), &w)| if w > 1e-10 { e + g / w } else { 0.0 })
            .collect();
        let w: Vec<f64> = curv.iter().map(|&w| if w > 1e-10 { w } else { 0.0 }).collect();

        // Cyclic coordinate descent on the weighted lasso surrogate.
        let mut b = beta.clone();
        let mut resid: Vec<f64> = (0..data.n)
            .map(|i| {
                let mut fit = 0.0;
                for j in 0..m {
                    fit += data.x[(i, j)] * b[j];
                }
                z[i] - fit
            })
            .collect();
        let denom: Vec<f64> = (0..m)
            .map(|j| (0..data.n).map(|i| w[i] * data.x[(i, j)].powi(2)).sum::<f64>() / n)
            .collect();
        for _sweep in 0..200 {
            let mut max_delta = 0.0f64;
            for j in 0..m {
                if denom[j] <= 1e-12 {
                    continue;
                }
                let mut rho = 0.0;
                for i in 0..data.n {
                    rho += w[i] * data.x[(i, j)] * resid[i];
                }
                rho = rho / n + denom[j] * b[j];
                let new = soft_threshold(rho, lambda) / denom[j];
                let delta = new - b[j];
                if delta != 0.0 {
                    for i in 0..data.n {
                        resid[i] -= data.x[(i, j)] * delta;
                    }
                    b[j] = new;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            if max_delta < params.tol {
                break;
            }
        }

        // Guard the outer step with backtracking on the true objective.
        let mut accepted = false;
        let mut cand = b;
        for _ in 0..30 {
            let cand_obj = data.mean_loglik(&cand) - penalty(&cand, params);
            if cand_obj >= objective - 1e-10 {
                let delta = cand
                    .iter()
                    .zip(&beta)
                    .map(|(&a, &bb)| (a - bb).abs())
                    .fold(0.0f64, f64::max);
                beta = cand;
                objective = cand_obj;
                trace.push(objective);
                accepted = true;
                if delta < params.tol {
                    let snapped = snap_zeros(beta, params.tol);
                    return Ok((snapped, iter, trace));
                }
                break;
            }
            cand = cand.iter().zip(&beta).map(|(&a, &bb)| 0.5 * (a + bb)).collect();
        }
        if !accepted {
            let snapped = snap_zeros(beta, params.tol);
            return Ok((snapped, iter, trace));
        }
    }
    let eta = data.eta(&beta);
    let (score, _) = data.eta_derivatives(&eta);
    let mut grad_norm = 0.0;
    for j in 0..m {
        let mut g = 0.0;
        for i in 0..data.n {
            g += data.x[(i, j)] * score[i];
        }
        grad_norm += (g / n).powi(2);
    }
    Err(Error::NoConvergence {
        iterations: params.max_iter,
        gradient_norm: grad_norm.sqrt(),
    })
}

/// Coefficients indistinguishable from zero at the convergence tolerance
/// are stored as exact zeros.
fn snap_zeros(mut beta: Vec<f64>, tol: f64) -> Vec<f64> {
    for b in beta.iter_mut() {
        if b.abs() < tol {
            *b = 0.0;
        }
    }
    beta
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Solve `A x = b` in place for symmetric positive definite `A` (row-major
/// m x m) via Cholesky; `b` is overwritten with the solution.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], m: usize) -> Result<()> {
    for attempt in 0..2 {
        let mut l = a.to_vec();
        let mut ok = true;
        for j in 0..m {
            let mut diag = l[j * m + j];
            for k in 0..j {
                diag -= l[j * m + k] * l[j * m + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                ok = false;
                break;
            }
            let diag = diag.sqrt();
            l[j * m + j] = diag;
            for i in j + 1..m {
                let mut v = l[i * m + j];
                for k in 0..j {
                    v -= l[i * m + k] * l[j * m + k];
                }
                l[i * m + j] = v / diag;
            }
        }
        if ok {
            // Forward then backward substitution.
            let mut y = b.to_vec();
            for i in 0..m {
                for k in 0..i {
                    y[i] -= l[i * m + k] * y[k];
                }
                y[i] /= l[i * m + i];
            }
            for i in (0..m).rev() {
                for k in i + 1..m {
                    y[i] -= l[k * m + i] * y[k];
                }
                y[i] /= l[i * m + i];
            }
            b.copy_from_slice(&y);
            return Ok(());
        }
        if attempt == 0 {
            for j in 0..m {
                a[j * m + j] += 1e-8;
            }
        }
    }
    Err(Error::InvalidInput(
        "singular (or indefinite) system in Newton step; increase the ridge penalty".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureKind;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ph_data(n: usize, coefs: &[f64], censor_frac: f64, seed: u64) -> SurvivalDataset {
        let m = coefs.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Array2::zeros((n, m));
        let mut times = Vec::new();
        let mut events = Vec::new();
        for i in 0..n {
            let mut eta = 0.0;
            for j in 0..m {
                let v: f64 = rng.sample(rand_distr::StandardNormal);
                features[(i, j)] = v;
                eta += coefs[j] * v;
            }
            let u: f64 = rng.random();
            let t = -u.max(1e-12).ln() / (0.1 * eta.exp());
            times.push(t.max(1e-6));
            events.push(rng.random::<f64>() >= censor_frac);
        }
        SurvivalDataset::new(
            features,
            (0..m).map(|j| format!("x{j}")).collect(),
            vec![FeatureKind::Dbm; m],
            times,
            events,
        )
        .unwrap()
    }

    #[test]
    fn huge_ridge_penalty_flattens_coefficients() {
        let ds = ph_data(60, &[1.0, -0.5, 0.25], 0.2, 1);
        let model = CoxModel::fit(&ds, &CoxParams::ridge(1e6)).unwrap();
        for &b in model.beta_standardized() {
            assert!(b.abs() < 1e-6, "beta {b} not shrunk");
        }
    }

    #[test]
    fn lasso_at_lambda_max_is_exactly_zero() {
        let ds = ph_data(80, &[0.8, -0.6, 0.0, 0.3], 0.3, 2);
        let lmax = lambda_max(&ds).unwrap();
        for lambda in [lmax, lmax * 1.5] {
            let model = CoxModel::fit(&ds, &CoxParams::lasso(lambda)).unwrap();
            assert!(model.beta().iter().all(|&b| b == 0.0), "beta {:?}", model.beta());
        }
        // Just below lambda_max at least one coefficient activates.
        let model = CoxModel::fit(&ds, &CoxParams::lasso(lmax * 0.8)).unwrap();
        assert!(model.beta().iter().any(|&b| b != 0.0));
    }

    #[test]
    fn lasso_produces_exact_zeros_on_noise_features() {
        let ds = ph_data(150, &[1.0, 0.0, 0.0, 0.0, 0.0], 0.2, 3);
        let lmax = lambda_max(&ds).unwrap();
        let model = CoxModel::fit(&ds, &CoxParams::lasso(lmax * 0.3)).unwrap();
        let beta = model.beta();
        assert!(beta[0] > 0.0);
        let zeros = beta.iter().filter(|&&b| b == 0.0).count();
        assert!(zeros >= 2, "expected sparse fit, got {beta:?}");
    }

    #[test]
    fn objective_trace_is_monotone() {
        let ds = ph_data(100, &[0.7, -0.4, 0.2], 0.3, 4);
        for params in [CoxParams::ridge(0.05), CoxParams::lasso(0.02)] {
            let model = CoxModel::fit(&ds, &params).unwrap();
            for w in model.objective_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-10, "objective decreased: {:?}", w);
            }
        }
    }

    #[test]
    fn breslow_loglik_matches_hand_computation() {
        // Three rows, two tied event times at t = 1, one event at t = 2.
        let features = ndarray::array![[1.0], [0.0], [2.0]];
        let ds = SurvivalDataset::new(
            features,
            vec!["x".into()],
            vec![FeatureKind::Dbm],
            vec![1.0, 1.0, 2.0],
            vec![true, true, true],
        )
        .unwrap();
        let (data, _, scales) = CoxData::build(&ds).unwrap();
        // Evaluate at a standardized beta equivalent to original beta = 0.3.
        let b_std = 0.3 * scales[0];
        let ll = data.mean_loglik(&[b_std]);
        // Hand formula on standardized x values.
        let xs: Vec<f64> = (0..3).map(|i| data.x[(i, 0)]).collect();
        let e: Vec<f64> = xs.iter().map(|&x| (b_std * x).exp()).collect();
        let hand = (b_std * xs[0] + b_std * xs[1] - 2.0 * (e[0] + e[1] + e[2]).ln()
            + b_std * xs[2]
            - e[2].ln())
            / 3.0;
        assert_relative_eq!(ll, hand, max_relative = 1e-12);
    }

    #[test]
    fn coefficients_return_to_original_scale() {
        let ds = ph_data(120, &[0.9, -0.3], 0.25, 5);
        let model = CoxModel::fit(&ds, &CoxParams::ridge(0.01)).unwrap();
        // Rescale feature 0 by 100 and refit: original-scale beta shrinks
        // by 100, risks are unchanged.
        let scaled: Vec<f64> = ds.column(0).iter().map(|&v| v * 100.0).collect();
        let ds2 = ds.with_column(0, scaled).unwrap();
        let model2 = CoxModel::fit(&ds2, &CoxParams::ridge(0.01)).unwrap();
        assert_relative_eq!(model.beta()[0], model2.beta()[0] * 100.0, max_relative = 1e-6);
        let r1 = model.risk(ds.row(3)).unwrap();
        let r2 = model2.risk(ds2.row(3)).unwrap();
        let s1 = model.risk(ds.row(7)).unwrap();
        let s2 = model2.risk(ds2.row(7)).unwrap();
        assert_eq!(r1 > s1, r2 > s2);
    }

    #[test]
    fn single_event_baseline_concentrates_in_its_interval() {
        // Constant feature forces beta = 0; one event among three at risk.
        let features = ndarray::array![[1.0], [1.0], [1.0]];
        let ds = SurvivalDataset::new(
            features,
            vec!["c".into()],
            vec![FeatureKind::Dbm],
            vec![5.0, 10.0, 15.0],
            vec![true, false, false],
        )
        .unwrap();
        let model = CoxModel::fit(&ds, &CoxParams::ridge(1.0)).unwrap();
        assert_eq!(model.beta(), &[0.0]);
        let grid = TimeGrid::equal_width(ds.times(), 3).unwrap();
        let curve = model.predict_hazard(ds.row(0), &grid).unwrap();
        // The event time 5.0 sits on the first boundary of the nudged
        // [0, 15 + eps] span, so its mass lands in interval 0.
        let expect = 1.0 - (-1.0f64 / 3.0).exp();
        assert_relative_eq!(curve.values()[0], expect, max_relative = 1e-12);
        assert_eq!(curve.values()[1], 0.0);
        assert_eq!(curve.values()[2], 0.0);
    }

    #[test]
    fn baseline_beyond_grid_is_an_error() {
        let ds = ph_data(50, &[0.5], 0.2, 6);
        let model = CoxModel::fit(&ds, &CoxParams::ridge(0.1)).unwrap();
        let short = TimeGrid::equal_width(&[ds.times()[0].min(1e-3)], 4).unwrap();
        assert!(model.predict_hazard(ds.row(0), &short).is_err());
    }

    #[test]
    fn ridge_path_has_no_jumps() {
        let ds = ph_data(90, &[0.8, -0.5, 0.3], 0.3, 7);
        let lmax = lambda_max(&ds).unwrap();
        let grid = lambda_grid(lmax, 20, 4.0);
        let mut prev: Option<Vec<f64>> = None;
        for &lambda in &grid {
            let model = CoxModel::fit(&ds, &CoxParams::ridge(lambda)).unwrap();
            let b = model.beta_standardized().to_vec();
            if let Some(p) = prev {
                let jump = b
                    .iter()
                    .zip(&p)
                    .map(|(&a, &q)| (a - q).abs())
                    .fold(0.0f64, f64::max);
                assert!(jump < 0.35, "jump {jump} at lambda {lambda}");
            }
            prev = Some(b);
        }
    }

    #[test]
    fn zero_event_dataset_is_rejected() {
        let ds = ph_data(30, &[0.5], 0.2, 8);
        let all_censored = SurvivalDataset::new(
            ds.features().clone(),
            ds.feature_names().to_vec(),
            ds.kinds().to_vec(),
            ds.times().to_vec(),
            vec![false; ds.n_rows()],
        )
        .unwrap();
        assert!(CoxModel::fit(&all_censored, &CoxParams::ridge(0.1)).is_err());
    }

    #[test]
    fn lambda_grid_spans_four_decades() {
        let g = lambda_grid(2.0, 20, 4.0);
        assert_eq!(g.len(), 20);
        assert_relative_eq!(g[0], 2.0);
        assert_relative_eq!(g[19], 2.0e-4, max_relative = 1e-9);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }
}
