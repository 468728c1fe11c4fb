//! Discrete-time hazard curves and the censored negative log-likelihood.
//!
//! A model prediction here is a vector of conditional hazards over the `d`
//! intervals of a [`TimeGrid`](crate::dataset::TimeGrid): `h[s]` is the
//! probability of the event landing in interval `s` given survival into it.
//! Interval indices are 0-based throughout, matching what
//! [`discretize`](crate::dataset::SurvivalDataset::discretize) produces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hazards are clamped into `[EPS_CLIP, 1 - EPS_CLIP]` before any logarithm
/// so raw 0/1 leaf hazards cannot produce infinite losses.
pub const EPS_CLIP: f64 = 1e-6;

#[inline]
pub fn clip(h: f64) -> f64 {
    h.clamp(EPS_CLIP, 1.0 - EPS_CLIP)
}

/// One subject's follow-up after discretization: the interval its observed
/// time fell into and whether the event was seen there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedOutcome {
    /// 0-based interval index, `0 <= q < d`.
    pub q: usize,
    /// True when the event was observed, false for right-censoring.
    pub event: bool,
}

/// Which value of the event indicator selects the event branch of the
/// likelihood. `EventIsOne` is the standard reading (indicator 1 = event
/// observed); `EventIsZero` flips it for transcription checks against
/// sources that pair the branches the other way around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCoding {
    #[default]
    EventIsOne,
    EventIsZero,
}

/// Per-interval conditional hazards for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardCurve {
    h: Vec<f64>,
}

impl HazardCurve {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidInput("hazard curve needs at least one interval".into()));
        }
        for (s, &v) in h.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "hazard value {v} at interval {s} is outside [0, 1]"
                )));
            }
        }
        Ok(Self { h })
    }

    /// A flat curve with the same hazard in every interval.
    pub fn constant(h: f64, d: usize) -> Result<Self> {
        Self::new(vec![h; d])
    }

    pub fn d(&self) -> usize {
        self.h.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    /// Probability of surviving the first `q` intervals:
    /// the product of `(1 - h)` over intervals `0..q`, so `survival(0) = 1`.
    /// Uses the same clipping as [`nll`] so the two agree exactly.
    pub fn survival(&self, q: usize) -> Result<f64> {
        if q > self.h.len() {
            return Err(Error::InvalidInput(format!(
                "survival index {q} exceeds curve length {}",
                self.h.len()
            )));
        }
        Ok(self.h[..q].iter().map(|&v| 1.0 - clip(v)).product())
    }

    /// Elementwise mean of a non-empty batch of equal-length curves.
    pub fn mean<'a, I>(curves: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a HazardCurve>,
    {
        let mut iter = curves.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidInput("cannot average zero hazard curves".into()))?;
        let mut sum = first.h.clone();
        let mut count = 1usize;
        for c in iter {
            if c.h.len() != sum.len() {
                return Err(Error::InvalidInput(format!(
                    "cannot average curves of lengths {} and {}",
                    sum.len(),
                    c.h.len()
                )));
            }
            for (a, b) in sum.iter_mut().zip(&c.h) {
                *a += b;
            }
            count += 1;
        }
        let n = count as f64;
        for a in sum.iter_mut() {
            *a /= n;
        }
        Self::new(sum)
    }
}

/// Negative log-likelihood of one discretized observation under a hazard
/// curve, with the standard event coding.
///
/// Event in interval `q`: `-log h[q] - log survival(q)`.
/// Censored in interval `q`: `-log survival(q + 1)` — the censored interval
/// itself is credited as survived, so censoring in the very first interval
/// still carries information.
pub fn nll(curve: &HazardCurve, obs: &ObservedOutcome) -> Result<f64> {
    nll_coded(curve, obs, EventCoding::EventIsOne)
}

/// [`nll`] with an explicit choice of which indicator value means "event".
pub fn nll_coded(curve: &HazardCurve, obs: &ObservedOutcome, coding: EventCoding) -> Result<f64> {
    let d = curve.h.len();
    if obs.q >= d {
        return Err(Error::InvalidInput(format!(
            "interval index {} out of range for a {d}-interval curve",
            obs.q
        )));
    }
    let event_branch = match coding {
        EventCoding::EventIsOne => obs.event,
        EventCoding::EventIsZero => !obs.event,
    };
    let mut log_surv = 0.0;
    for &v in &curve.h[..obs.q] {
        log_surv += (1.0 - clip(v)).ln();
    }
    if event_branch {
        Ok(-clip(curve.h[obs.q]).ln() - log_surv)
    } else {
        log_surv += (1.0 - clip(curve.h[obs.q])).ln();
        Ok(-log_surv)
    }
}

/// Mean NLL over a batch of (curve, outcome) pairs.
pub fn mean_nll(curves: &[HazardCurve], outcomes: &[ObservedOutcome]) -> Result<f64> {
    if curves.is_empty() {
        return Err(Error::InvalidInput("mean_nll over an empty batch".into()));
    }
    if curves.len() != outcomes.len() {
        return Err(Error::InvalidInput(format!(
            "mean_nll batch mismatch: {} curves vs {} outcomes",
            curves.len(),
            outcomes.len()
        )));
    }
    let mut total = 0.0;
    for (c, o) in curves.iter().zip(outcomes) {
        total += nll(c, o)?;
    }
    Ok(total / curves.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn curve(h: &[f64]) -> HazardCurve {
        HazardCurve::new(h.to_vec()).unwrap()
    }

    #[test]
    fn survival_of_zero_intervals_is_one() {
        let c = curve(&[0.3, 0.7]);
        assert_eq!(c.survival(0).unwrap(), 1.0);
    }

    #[test]
    fn survival_is_prefix_product() {
        let c = curve(&[0.5, 0.5]);
        assert_relative_eq!(c.survival(2).unwrap(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn event_in_first_interval() {
        let c = curve(&[0.5, 0.1]);
        let obs = ObservedOutcome { q: 0, event: true };
        assert_relative_eq!(nll(&c, &obs).unwrap(), 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn censored_in_last_interval() {
        let c = curve(&[0.5, 0.5]);
        let obs = ObservedOutcome { q: 1, event: false };
        assert_relative_eq!(nll(&c, &obs).unwrap(), 4f64.ln(), max_relative = 1e-12);
        // Exactly the survival identity: censoring credits the interval itself.
        assert_eq!(nll(&c, &obs).unwrap(), -c.survival(2).unwrap().ln());
    }

    #[test]
    fn flipped_coding_swaps_branches() {
        let c = curve(&[0.3, 0.2, 0.4]);
        let ev = ObservedOutcome { q: 1, event: true };
        let cen = ObservedOutcome { q: 1, event: false };
        assert_eq!(
            nll_coded(&c, &ev, EventCoding::EventIsZero).unwrap(),
            nll(&c, &cen).unwrap()
        );
        assert_eq!(
            nll_coded(&c, &cen, EventCoding::EventIsZero).unwrap(),
            nll(&c, &ev).unwrap()
        );
    }

    #[test]
    fn degenerate_hazards_stay_finite() {
        let d = 8;
        for h in [0.0, 1.0] {
            let c = HazardCurve::constant(h, d).unwrap();
            for q in 0..d {
                for event in [true, false] {
                    let v = nll(&c, &ObservedOutcome { q, event }).unwrap();
                    assert!(v.is_finite());
                    assert!(v <= -(EPS_CLIP.ln()) * (d as f64 + 1.0));
                }
            }
        }
    }

    #[test]
    fn likelihoods_telescope_to_one() {
        // Sum of event likelihoods over all intervals plus survival through
        // the whole grid must be 1 for any curve: the discrete model is a
        // proper distribution.
        let c = curve(&[0.25, 0.5, 0.125, 0.6]);
        let mut total = c.survival(4).unwrap();
        for q in 0..4 {
            total += (-nll(&c, &ObservedOutcome { q, event: true }).unwrap()).exp();
        }
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn out_of_range_interval_rejected() {
        let c = curve(&[0.5]);
        assert!(nll(&c, &ObservedOutcome { q: 1, event: true }).is_err());
    }

    #[test]
    fn mean_averages_elementwise() {
        let a = curve(&[0.2, 0.4]);
        let b = curve(&[0.6, 0.0]);
        let m = HazardCurve::mean([&a, &b]).unwrap();
        assert_eq!(m.values(), &[0.4, 0.2]);
    }

    #[test]
    fn mean_rejects_empty_and_mismatched() {
        assert!(HazardCurve::mean([]).is_err());
        let a = curve(&[0.2]);
        let b = curve(&[0.1, 0.3]);
        assert!(HazardCurve::mean([&a, &b]).is_err());
    }
}
