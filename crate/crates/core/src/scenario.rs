//! Ego-relative object states, frames, scenarios and warning streams.
//!
//! Coordinates are expressed in the user's frame: the user sits at the origin,
//! `+y` points in the walking direction and `+x` to the right. Velocities are
//! apparent velocities, i.e. the user's own motion is already superimposed.

use std::collections::BTreeMap;

use nalgebra::Vector2;
use thiserror::Error;

/// Default camera frame rate in Hz.
pub const DEFAULT_FRAME_RATE: f64 = 15.0;

/// Free-form scenario labels (template name, seed, noise settings, ...).
pub type Metadata = serde_json::Map<String, serde_json::Value>;

/// Snapshot of one tracked object relative to the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectState {
    pub id: u64,
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
}

impl ObjectState {
    pub fn new(id: u64, px: f64, py: f64, vx: f64, vy: f64) -> Self {
        Self { id, px, py, vx, vy }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.px, self.py)
    }

    pub fn velocity(&self) -> Vector2<f64> {
        Vector2::new(self.vx, self.vy)
    }

    pub fn distance(&self) -> f64 {
        self.px.hypot(self.py)
    }

    /// Name of the first non-finite kinematic field, if any.
    pub fn non_finite_field(&self) -> Option<&'static str> {
        [
            ("px", self.px),
            ("py", self.py),
            ("vx", self.vx),
            ("vy", self.vy),
        ]
        .into_iter()
        .find(|(_, v)| !v.is_finite())
        .map(|(name, _)| name)
    }
}

/// All objects seen at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: usize,
    pub time: f64,
    pub objects: Vec<ObjectState>,
}

impl Frame {
    pub fn new(index: usize, frame_rate: f64, objects: Vec<ObjectState>) -> Self {
        Self {
            index,
            time: frame_time(index, frame_rate),
            objects,
        }
    }

    pub fn object(&self, id: u64) -> Option<&ObjectState> {
        self.objects.iter().find(|o| o.id == id)
    }
}

pub fn frame_time(index: usize, frame_rate: f64) -> f64 {
    index as f64 / frame_rate
}

/// Which of the two frame sequences of a scenario an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    GroundTruth,
    Observed,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::GroundTruth => f.write_str("ground truth"),
            Channel::Observed => f.write_str("observed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("frame rate must be finite and positive, got {0}")]
    FrameRate(f64),
    #[error("ground truth has {ground_truth} frames but observed has {observed}")]
    LengthMismatch { ground_truth: usize, observed: usize },
    #[error("{channel} frame at position {position} has index {index}")]
    FrameIndex {
        channel: Channel,
        position: usize,
        index: usize,
    },
    #[error("{channel} frame {frame} has time {time}, expected {expected}")]
    FrameTime {
        channel: Channel,
        frame: usize,
        time: f64,
        expected: f64,
    },
    #[error("duplicate id {id} in {channel} frame {frame}")]
    DuplicateId {
        channel: Channel,
        frame: usize,
        id: u64,
    },
    #[error("non-finite {field} for object {id} in {channel} frame {frame}")]
    NonFinite {
        channel: Channel,
        frame: usize,
        id: u64,
        field: &'static str,
    },
}

/// Ground-truth and observed frame sequences sampled at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub frame_rate: f64,
    pub ground_truth: Vec<Frame>,
    pub observed: Vec<Frame>,
    pub metadata: Metadata,
}

impl Scenario {
    /// Builds a validated scenario.
    pub fn new(
        frame_rate: f64,
        ground_truth: Vec<Frame>,
        observed: Vec<Frame>,
        metadata: Metadata,
    ) -> Result<Self, ValidationError> {
        let s = Self {
            frame_rate,
            ground_truth,
            observed,
            metadata,
        };
        s.validate()?;
        Ok(s)
    }

    /// Scenario whose observed channel is an exact copy of the ground truth.
    pub fn noise_free(
        frame_rate: f64,
        ground_truth: Vec<Frame>,
        metadata: Metadata,
    ) -> Result<Self, ValidationError> {
        let observed = ground_truth.clone();
        Self::new(frame_rate, ground_truth, observed, metadata)
    }

    pub fn len(&self) -> usize {
        self.ground_truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground_truth.is_empty()
    }

    /// Time stamp of the last frame (0 for an empty scenario).
    pub fn end_time(&self) -> f64 {
        self.ground_truth.last().map_or(0.0, |f| f.time)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(ValidationError::FrameRate(self.frame_rate));
        }
        if self.ground_truth.len() != self.observed.len() {
            return Err(ValidationError::LengthMismatch {
                ground_truth: self.ground_truth.len(),
                observed: self.observed.len(),
            });
        }
        for (channel, frames) in [
            (Channel::GroundTruth, &self.ground_truth),
            (Channel::Observed, &self.observed),
        ] {
            validate_frames(channel, frames, self.frame_rate)?;
        }
        Ok(())
    }
}

fn validate_frames(
    channel: Channel,
    frames: &[Frame],
    frame_rate: f64,
) -> Result<(), ValidationError> {
    for (position, frame) in frames.iter().enumerate() {
        if frame.index != position {
            return Err(ValidationError::FrameIndex {
                channel,
                position,
                index: frame.index,
            });
        }
        let expected = frame_time(frame.index, frame_rate);
        if frame.time != expected {
            return Err(ValidationError::FrameTime {
                channel,
                frame: frame.index,
                time: frame.time,
                expected,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for obj in &frame.objects {
            if !seen.insert(obj.id) {
                return Err(ValidationError::DuplicateId {
                    channel,
                    frame: frame.index,
                    id: obj.id,
                });
            }
            if let Some(field) = obj.non_finite_field() {
                return Err(ValidationError::NonFinite {
                    channel,
                    frame: frame.index,
                    id: obj.id,
                    field,
                });
            }
        }
    }
    Ok(())
}

/// Per (frame index, object id) warning flags.
///
/// Cells that are absent read as "no warning".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WarningStream {
    cells: BTreeMap<(usize, u64), bool>,
}

impl WarningStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, frame: usize, id: u64, warn: bool) {
        self.cells.insert((frame, id), warn);
    }

    pub fn get(&self, frame: usize, id: u64) -> bool {
        self.cells.get(&(frame, id)).copied().unwrap_or(false)
    }

    pub fn contains(&self, frame: usize, id: u64) -> bool {
        self.cells.contains_key(&(frame, id))
    }

    /// All stored cells in (frame, id) order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, u64), bool)> + '_ {
        self.cells.iter().map(|(k, v)| (*k, *v))
    }

    /// Cells flagged as warning.
    pub fn warned(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.cells.iter().filter(|(_, w)| **w).map(|(k, _)| *k)
    }

    pub fn warn_count(&self) -> usize {
        self.cells.values().filter(|w| **w).count()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Ids that carry at least one warning.
    pub fn warned_ids(&self) -> std::collections::BTreeSet<u64> {
        self.warned().map(|(_, id)| id).collect()
    }
}

impl FromIterator<((usize, u64), bool)> for WarningStream {
    fn from_iter<T: IntoIterator<Item = ((usize, u64), bool)>>(iter: T) -> Self {
        Self {
            cells: iter.into_iter().collect(),
        }
    }
}
