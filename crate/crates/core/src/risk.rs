//! Probabilistic collision risk.
//!
//! For every object the user and object positions are predicted on a grid of
//! offsets `s_k = k * interval_ds` up to `horizon_s_max`. At each offset the
//! collision probability is the overlap integral of the two Gaussians, scaled
//! by a cross-section area. The total over all objects drives a survival
//! function
//!
//! ```text
//! S(s_k) = exp(-sum_{j<k} (escape_rate + P(s_j) / dt) * ds)
//! ```
//!
//! and the per-object risk is `R_i = sum_k S(s_k) * p_i(s_k) / dt * ds`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::predict::{predict_belief, user_belief, GaussianBelief2D, UncertaintyParams};
use crate::scenario::{Frame, ObjectState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("summed covariance is singular (det = {0})")]
    SingularCovariance(f64),
    #[error("collision profiles are sampled on different grids")]
    GridMismatch,
    #[error("no collision profiles to combine")]
    NoProfiles,
    #[error("invalid risk parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiskParams {
    pub risk_threshold: f64,
    /// Prediction horizon in seconds.
    pub horizon_s_max: f64,
    /// Prediction sampling interval in seconds.
    pub interval_ds: f64,
    /// Base event rate (1/s) for avoiding a collision regardless of geometry.
    pub escape_rate: f64,
    /// Duration (s) over which a collision event is considered.
    pub event_duration_dt: f64,
    /// Area (m²) turning the overlap density into a probability.
    pub cross_section: f64,
    pub uncertainty: UncertaintyParams,
}

impl Default for RiskParams {
    fn default() -> Self {
        Self {
            risk_threshold: 0.05,
            horizon_s_max: 5.0,
            interval_ds: 0.1,
            escape_rate: 0.3,
            event_duration_dt: 0.5,
            cross_section: 0.25,
            uncertainty: UncertaintyParams::default(),
        }
    }
}

impl RiskParams {
    pub fn validate(&self) -> Result<(), RiskError> {
        let bad = |m: &str| Err(RiskError::InvalidParams(m.to_string()));
        if !(self.risk_threshold > 0.0 && self.risk_threshold < 1.0) {
            return bad("risk_threshold must lie in (0, 1)");
        }
        if !(self.horizon_s_max.is_finite() && self.horizon_s_max > 0.0) {
            return bad("horizon_s_max must be > 0");
        }
        if !(self.interval_ds > 0.0 && self.interval_ds <= self.horizon_s_max) {
            return bad("interval_ds must lie in (0, horizon_s_max]");
        }
        if !(self.escape_rate.is_finite() && self.escape_rate >= 0.0) {
            return bad("escape_rate must be >= 0");
        }
        if !(self.event_duration_dt.is_finite() && self.event_duration_dt > 0.0) {
            return bad("event_duration_dt must be > 0");
        }
        if !(self.cross_section.is_finite() && self.cross_section > 0.0) {
            return bad("cross_section must be > 0");
        }
        self.uncertainty
            .validate()
            .map_err(|e| RiskError::InvalidParams(e.to_string()))
    }

    /// Number of grid intervals `K`, the largest integer with `K * ds <= s_max`.
    pub fn steps(&self) -> usize {
        (self.horizon_s_max / self.interval_ds + 1e-9).floor() as usize
    }

    /// Prediction offsets `0, ds, ..., K * ds`.
    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps()).map(move |k| k as f64 * self.interval_ds)
    }
}

/// Collision probability samples `(s, p)` over the prediction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionProfile {
    samples: Vec<(f64, f64)>,
}

impl CollisionProfile {
    /// Builds a profile; panics if offsets are not strictly increasing or a
    /// probability leaves `[0, 1]`.
    pub fn new(samples: Vec<(f64, f64)>) -> Self {
        assert!(
            samples.windows(2).all(|w| w[0].0 < w[1].0),
            "profile offsets must be strictly increasing"
        );
        assert!(
            samples.iter().all(|(_, p)| (0.0..=1.0).contains(p)),
            "profile probabilities must lie in [0, 1]"
        );
        Self { samples }
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.samples.len() == other.samples.len()
            && self
                .samples
                .iter()
                .zip(&other.samples)
                .all(|(a, b)| a.0 == b.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskScore {
    pub id: u64,
    pub value: f64,
}

/// Overlap of two Gaussian position beliefs, scaled to a probability.
///
/// The integral of the product of two Gaussian densities is the density of
/// their mean difference under the summed covariance.
pub fn collision_probability(
    user: &GaussianBelief2D,
    obj: &GaussianBelief2D,
    cross_section: f64,
) -> Result<f64, RiskError> {
    let cov = user.cov + obj.cov;
    let (a, b, c) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
    let det = a * c - b * b;
    if det.is_nan() || det <= 0.0 {
        return Err(RiskError::SingularCovariance(det));
    }
    let d = obj.mean - user.mean;
    let maha = (c * d.x * d.x - 2.0 * b * d.x * d.y + a * d.y * d.y) / det;
    let density = (-0.5 * maha).exp() / (2.0 * PI * det.sqrt());
    Ok((cross_section * density).min(1.0))
}

pub fn object_collision_profile(obj: &ObjectState, params: &RiskParams) -> CollisionProfile {
    let u = &params.uncertainty;
    let samples = params
        .grid()
        .map(|s| {
            let user = user_belief(s, u).expect("grid offsets are non-negative");
            let belief = predict_belief(obj, s, u).expect("grid offsets are non-negative");
            // Positive sigma0 keeps the summed covariance positive definite.
            let p = collision_probability(&user, &belief, params.cross_section)
                .expect("positive-definite covariances");
            (s, p)
        })
        .collect();
    CollisionProfile { samples }
}

/// Pointwise sum over objects, clamped to 1.
pub fn total_collision_profile(
    profiles: &[CollisionProfile],
) -> Result<CollisionProfile, RiskError> {
    let (first, rest) = profiles.split_first().ok_or(RiskError::NoProfiles)?;
    if rest.iter().any(|p| !p.same_grid(first)) {
        return Err(RiskError::GridMismatch);
    }
    let samples = first
        .samples
        .iter()
        .enumerate()
        .map(|(k, &(s, p0))| {
            let sum = p0 + rest.iter().map(|p| p.samples[k].1).sum::<f64>();
            (s, sum.min(1.0))
        })
        .collect();
    Ok(CollisionProfile { samples })
}

/// Left-Riemann survival function on the profile grid, `S(0) = 1`.
pub fn survival_profile(total: &CollisionProfile, params: &RiskParams) -> Vec<(f64, f64)> {
    let ds = params.interval_ds;
    let mut acc = 0.0_f64;
    total
        .samples
        .iter()
        .map(|&(s, p)| {
            let out = (s, (-acc).exp());
            acc += (params.escape_rate + p / params.event_duration_dt) * ds;
            out
        })
        .collect()
}

/// Survival-weighted risk of one object, clamped to `[0, 1]`.
pub fn object_risk(
    id: u64,
    profile: &CollisionProfile,
    survival: &[(f64, f64)],
    params: &RiskParams,
) -> Result<RiskScore, RiskError> {
    if profile.samples.len() != survival.len()
        || profile
            .samples
            .iter()
            .zip(survival)
            .any(|(a, b)| a.0 != b.0)
    {
        return Err(RiskError::GridMismatch);
    }
    let scale = params.interval_ds / params.event_duration_dt;
    let value: f64 = profile
        .samples
        .iter()
        .zip(survival)
        .map(|(&(_, p), &(_, surv))| surv * p * scale)
        .sum();
    Ok(RiskScore {
        id,
        value: value.clamp(0.0, 1.0),
    })
}

/// Risk of every object in a frame.
///
/// The survival function is shared by all objects. When the left-Riemann sums
/// overshoot in saturated scenes, scores are rescaled so they never add up to
/// more than one.
pub fn frame_risks(frame: &Frame, params: &RiskParams) -> Vec<RiskScore> {
    if frame.objects.is_empty() {
        return Vec::new();
    }
    let profiles: Vec<_> = frame
        .objects
        .iter()
        .map(|o| object_collision_profile(o, params))
        .collect();
    let total = total_collision_profile(&profiles).expect("profiles share the parameter grid");
    let survival = survival_profile(&total, params);
    let mut scores: Vec<RiskScore> = frame
        .objects
        .iter()
        .zip(&profiles)
        .map(|(o, p)| object_risk(o.id, p, &survival, params).expect("shared grid"))
        .collect();
    let mass: f64 = scores.iter().map(|r| r.value).sum();
    if mass > 1.0 {
        for r in &mut scores {
            r.value /= mass;
        }
    }
    scores
}

/// Per-object warning decisions `(id, warn)` for a frame, in object order.
pub fn risk_warnings(frame: &Frame, params: &RiskParams) -> Vec<(u64, bool)> {
    frame_risks(frame, params)
        .into_iter()
        .map(|r| (r.id, r.value >= params.risk_threshold))
        .collect()
}
