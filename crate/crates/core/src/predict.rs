//! Linear trajectory prediction with growing Gaussian position uncertainty.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::ObjectState;

/// Below this speed the motion direction is treated as undefined.
pub const MIN_SPEED: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PredictError {
    #[error("prediction offset must be non-negative, got {0}")]
    NegativeOffset(f64),
    #[error("invalid uncertainty parameters: {0}")]
    InvalidParams(&'static str),
}

/// Predicted position distribution at some offset into the future.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief2D {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

impl GaussianBelief2D {
    pub fn isotropic(mean: Vector2<f64>, std: f64) -> Self {
        Self {
            mean,
            cov: Matrix2::identity() * (std * std),
        }
    }
}

/// Standard deviation of a predicted position grows linearly with the offset:
/// `sigma0 + growth * s`, separately along and across the motion direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintyParams {
    pub sigma0: f64,
    pub growth_long: f64,
    pub growth_lat: f64,
}

impl Default for UncertaintyParams {
    fn default() -> Self {
        Self {
            sigma0: 0.1,
            growth_long: 0.3,
            growth_lat: 0.1,
        }
    }
}

impl UncertaintyParams {
    pub fn validate(&self) -> Result<(), PredictError> {
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(PredictError::InvalidParams("sigma0 must be > 0"));
        }
        if !(self.growth_long.is_finite() && self.growth_long >= 0.0) {
            return Err(PredictError::InvalidParams("growth_long must be >= 0"));
        }
        if !(self.growth_lat.is_finite() && self.growth_lat >= 0.0) {
            return Err(PredictError::InvalidParams("growth_lat must be >= 0"));
        }
        Ok(())
    }
}

fn check_offset(s: f64) -> Result<(), PredictError> {
    if s >= 0.0 {
        Ok(())
    } else {
        Err(PredictError::NegativeOffset(s))
    }
}

pub fn predict_position(state: &ObjectState, s: f64) -> Result<Vector2<f64>, PredictError> {
    check_offset(s)?;
    Ok(state.position() + state.velocity() * s)
}

pub fn predict_belief(
    state: &ObjectState,
    s: f64,
    u: &UncertaintyParams,
) -> Result<GaussianBelief2D, PredictError> {
    let mean = predict_position(state, s)?;
    let v = state.velocity();
    let speed = v.norm();
    if speed < MIN_SPEED {
        let std = u.sigma0 + u.growth_long.max(u.growth_lat) * s;
        return Ok(GaussianBelief2D::isotropic(mean, std));
    }
    let long = u.sigma0 + u.growth_long * s;
    let lat = u.sigma0 + u.growth_lat * s;
    let (c, sn) = (v.x / speed, v.y / speed);
    // R diag(long², lat²) Rᵀ with R = [dir, perp]
    let (l2, t2) = (long * long, lat * lat);
    let xx = c * c * l2 + sn * sn * t2;
    let yy = sn * sn * l2 + c * c * t2;
    let xy = c * sn * (l2 - t2);
    Ok(GaussianBelief2D {
        mean,
        cov: Matrix2::new(xx, xy, xy, yy),
    })
}

/// The user stays at the origin of its own frame; only the uncertainty grows.
pub fn user_belief(s: f64, u: &UncertaintyParams) -> Result<GaussianBelief2D, PredictError> {
    check_offset(s)?;
    Ok(GaussianBelief2D::isotropic(
        Vector2::zeros(),
        u.sigma0 + u.growth_lat * s,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn state(px: f64, py: f64, vx: f64, vy: f64) -> ObjectState {
        ObjectState::new(0, px, py, vx, vy)
    }

    #[test]
    fn position_examples() {
        assert_eq!(
            predict_position(&state(1.0, 2.0, 0.0, 0.0), 7.0).unwrap(),
            Vector2::new(1.0, 2.0)
        );
        assert_eq!(
            predict_position(&state(3.0, -4.0, 9.0, 9.0), 0.0).unwrap(),
            Vector2::new(3.0, -4.0)
        );
        assert_eq!(
            predict_position(&state(1.0, 2.0, 0.5, -1.0), 2.0).unwrap(),
            Vector2::new(2.0, 0.0)
        );
        assert_eq!(
            predict_position(&state(0.0, 0.0, 0.0, 0.0), -0.1),
            Err(PredictError::NegativeOffset(-0.1))
        );
    }

    #[test]
    fn belief_at_zero_offset_is_initial_sigma() {
        let u = UncertaintyParams::default();
        let b = predict_belief(&state(1.0, 1.0, 0.3, -2.0), 0.0, &u).unwrap();
        let expected = Matrix2::identity() * 0.01;
        assert!((b.cov - expected).abs().max() < 1e-15);
    }

    #[test]
    fn belief_long_axis_follows_velocity() {
        let u = UncertaintyParams {
            sigma0: 0.1,
            growth_long: 0.2,
            growth_lat: 0.05,
        };
        let b = predict_belief(&state(0.0, 0.0, 1.0, 0.0), 2.0, &u).unwrap();
        assert!(close(b.cov[(0, 0)], 0.25, 1e-12));
        assert!(close(b.cov[(1, 1)], 0.04, 1e-12));
        assert!(close(b.cov[(0, 1)], 0.0, 1e-15));
        assert_eq!(b.mean, Vector2::new(2.0, 0.0));
    }

    #[test]
    fn belief_diagonal_velocity_matches_hand_rotation() {
        let u = UncertaintyParams {
            sigma0: 0.1,
            growth_long: 0.2,
            growth_lat: 0.05,
        };
        let b = predict_belief(&state(0.0, 0.0, 1.0, 1.0), 2.0, &u).unwrap();
        // R = [[h,-h],[h,h]], h = 1/sqrt(2); R diag(0.25,0.04) Rᵀ
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = Matrix2::new(h, -h, h, h);
        let expected = r * Matrix2::new(0.25, 0.0, 0.0, 0.04) * r.transpose();
        assert!((b.cov - expected).abs().max() < 1e-12);
    }

    #[test]
    fn stationary_object_grows_isotropically() {
        let u = UncertaintyParams {
            sigma0: 0.1,
            growth_long: 0.2,
            growth_lat: 0.05,
        };
        let b = predict_belief(&state(4.0, 4.0, 0.0, 0.0), 3.0, &u).unwrap();
        let std: f64 = 0.1 + 0.6;
        assert!(close(b.cov[(0, 0)], std * std, 1e-12));
        assert!(close(b.cov[(1, 1)], std * std, 1e-12));
        assert_eq!(b.cov[(0, 1)], 0.0);
    }

    #[test]
    fn user_belief_examples() {
        let u = UncertaintyParams {
            sigma0: 0.1,
            growth_long: 0.3,
            growth_lat: 0.0,
        };
        let b0 = user_belief(0.0, &u).unwrap();
        assert_eq!(b0.mean, Vector2::zeros());
        assert!(close(b0.cov[(0, 0)].sqrt(), 0.1, 1e-15));
        let b = user_belief(100.0, &u).unwrap();
        assert!(close(b.cov[(1, 1)].sqrt(), 0.1, 1e-15));
        let grow = UncertaintyParams::default();
        let mut last = 0.0;
        for k in 0..50 {
            let v = user_belief(k as f64 * 0.1, &grow).unwrap().cov[(0, 0)];
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn params_validation() {
        assert!(UncertaintyParams::default().validate().is_ok());
        let bad = UncertaintyParams {
            sigma0: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = UncertaintyParams {
            growth_lat: -0.1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    fn eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
        let tr = m.trace();
        let det = m.determinant();
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }

    proptest! {
        #[test]
        fn position_is_affine_in_offset(
            px in -20.0..20.0f64, py in -20.0..20.0f64,
            vx in -3.0..3.0f64, vy in -3.0..3.0f64,
            a in 0.0..5.0f64, b in 0.0..5.0f64,
        ) {
            let s = state(px, py, vx, vy);
            let direct = predict_position(&s, a + b).unwrap();
            let mid = predict_position(&s, a).unwrap();
            let advanced = state(mid.x, mid.y, vx, vy);
            let stepped = predict_position(&advanced, b).unwrap();
            prop_assert!((direct - stepped).norm() < 1e-9);
        }

        #[test]
        fn covariance_eigenvalues_nondecreasing(
            vx in -3.0..3.0f64, vy in -3.0..3.0f64,
            sigma0 in 0.01..1.0f64, gl in 0.0..1.0f64, gt in 0.0..1.0f64,
            s in 0.0..8.0f64, ds in 0.0..2.0f64,
        ) {
            let u = UncertaintyParams { sigma0, growth_long: gl, growth_lat: gt };
            let st = state(1.0, 2.0, vx, vy);
            let (a0, a1) = eigenvalues(&predict_belief(&st, s, &u).unwrap().cov);
            let (b0, b1) = eigenvalues(&predict_belief(&st, s + ds, &u).unwrap().cov);
            prop_assert!(a0 > 0.0);
            prop_assert!(b0 >= a0 - 1e-12 && b1 >= a1 - 1e-12);
        }

        #[test]
        fn covariance_rotates_with_velocity(
            vx in -3.0..3.0f64, vy in -3.0..3.0f64,
            theta in -3.2..3.2f64, s in 0.0..6.0f64,
        ) {
            prop_assume!(vx.hypot(vy) > 1e-3);
            let u = UncertaintyParams { sigma0: 0.1, growth_long: 0.4, growth_lat: 0.05 };
            let (c, sn) = (theta.cos(), theta.sin());
            let r = Matrix2::new(c, -sn, sn, c);
            let v = r * Vector2::new(vx, vy);
            let base = predict_belief(&state(0.0, 0.0, vx, vy), s, &u).unwrap();
            let rotated = predict_belief(&state(0.0, 0.0, v.x, v.y), s, &u).unwrap();
            let expected = r * base.cov * r.transpose();
            prop_assert!((rotated.cov - expected).abs().max() < 1e-12);
        }
    }
}
