//! Distance and time-to-contact warning baselines.

use serde::{Deserialize, Serialize};

use crate::predict::MIN_SPEED;
use crate::scenario::ObjectState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceParams {
    pub distance_threshold: f64,
    /// Half opening angle of the camera field of view, in degrees.
    pub fov_half_angle: f64,
}

impl Default for DistanceParams {
    fn default() -> Self {
        Self {
            distance_threshold: 1.5,
            fov_half_angle: 85.0,
        }
    }
}

impl DistanceParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.distance_threshold.is_finite() && self.distance_threshold > 0.0) {
            return Err("distance_threshold must be > 0".into());
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle <= 180.0) {
            return Err("fov_half_angle must lie in (0, 180]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TtcParams {
    pub distance_threshold: f64,
    pub time_threshold: f64,
}

impl Default for TtcParams {
    fn default() -> Self {
        Self {
            distance_threshold: 1.0,
            time_threshold: 4.0,
        }
    }
}

impl TtcParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.distance_threshold.is_finite() && self.distance_threshold > 0.0) {
            return Err("distance_threshold must be > 0".into());
        }
        if !(self.time_threshold.is_finite() && self.time_threshold > 0.0) {
            return Err("time_threshold must be > 0".into());
        }
        Ok(())
    }
}

/// Angle in degrees between the object position and the walking direction.
pub fn bearing_deg(obj: &ObjectState) -> f64 {
    obj.px.atan2(obj.py).to_degrees()
}

pub fn distance_warning(obj: &ObjectState, params: &DistanceParams) -> bool {
    obj.distance() < params.distance_threshold && bearing_deg(obj).abs() <= params.fov_half_angle
}

/// Closest point of approach under constant relative velocity: `(t*, d_min)`.
/// Approach times in the past are clamped to zero.
pub fn closest_approach(obj: &ObjectState) -> (f64, f64) {
    let p = obj.position();
    let v = obj.velocity();
    let vv = v.norm_squared();
    let t = if vv.sqrt() < MIN_SPEED {
        0.0
    } else {
        (-p.dot(&v) / vv).max(0.0)
    };
    (t, (p + v * t).norm())
}

pub fn ttc_warning(obj: &ObjectState, params: &TtcParams) -> bool {
    let (t, d) = closest_approach(obj);
    d < params.distance_threshold && t < params.time_threshold
}
