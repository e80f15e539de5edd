//! Synthetic scenario templates and noise injection.
//!
//! All motion is apparent motion in the ego frame. Every object follows a
//! constant-turn-rate path anchored at its closest point `m` to the user,
//! reached at time `t_c` with velocity `v_c`. With `tau = t - t_c`,
//!
//! ```text
//! p(t) = m + (sin(w tau) v_c + (1 - cos(w tau)) J v_c) / w,   J(x, y) = (-y, x)
//! v(t) = R(w tau) v_c
//! ```
//!
//! which degenerates to `p(t) = m + v_c tau` for `w = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{Frame, Metadata, ObjectState, Scenario, DEFAULT_FRAME_RATE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("invalid noise spec: {0}")]
    InvalidNoise(String),
    #[error("unknown template kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    HeadOn,
    SideCollision,
    Crossing,
    CrowdApproach,
    StaticPass,
    Receding,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 6] = [
        TemplateKind::HeadOn,
        TemplateKind::SideCollision,
        TemplateKind::Crossing,
        TemplateKind::CrowdApproach,
        TemplateKind::StaticPass,
        TemplateKind::Receding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::HeadOn => "head_on",
            TemplateKind::SideCollision => "side_collision",
            TemplateKind::Crossing => "crossing",
            TemplateKind::CrowdApproach => "crowd_approach",
            TemplateKind::StaticPass => "static_pass",
            TemplateKind::Receding => "receding",
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TemplateKind {
    type Err = SynthError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SynthError::UnknownKind(s.to_string()))
    }
}

/// Scene description. Geometry fields apply to the kinds that use them:
///
/// * `start_distance`: initial range of the critical object (head-on, side,
///   crossing), the nearest crowd row, or the static obstacle.
/// * `miss_distance`: closest-approach distance of the critical object, or
///   the lateral clearance of the static obstacle.
/// * `turn_rate`: rad/s of the critical object's apparent motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioTemplate {
    pub kind: TemplateKind,
    pub duration: f64,
    pub frame_rate: f64,
    /// Object speeds are drawn uniformly from `[lo, hi]`.
    pub speed_range: (f64, f64),
    pub start_distance: f64,
    pub miss_distance: f64,
    pub turn_rate: f64,
    /// Crowd size.
    pub object_count: usize,
    /// Crowd members on a collision course.
    pub critical_count: usize,
    /// Extra passing objects that never enter the bubble.
    pub distractors: usize,
    pub seed: u64,
}

impl Default for ScenarioTemplate {
    fn default() -> Self {
        Self {
            kind: TemplateKind::HeadOn,
            duration: 20.0,
            frame_rate: DEFAULT_FRAME_RATE,
            speed_range: (1.0, 1.0),
            start_distance: 10.0,
            miss_distance: 0.0,
            turn_rate: 0.0,
            object_count: 5,
            critical_count: 1,
            distractors: 0,
            seed: 0,
        }
    }
}

impl ScenarioTemplate {
    pub fn new(kind: TemplateKind) -> Self {
        let mut t = Self {
            kind,
            ..Default::default()
        };
        match kind {
            TemplateKind::Crossing => t.miss_distance = 0.5,
            TemplateKind::StaticPass => t.miss_distance = 1.5,
            _ => {}
        }
        t
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidTemplate(m.to_string()));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad("duration must be > 0");
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return bad("frame_rate must be > 0");
        }
        let (lo, hi) = self.speed_range;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return bad("speed range must satisfy 0 <= lo <= hi");
        }
        if !(self.miss_distance.is_finite() && self.miss_distance >= 0.0) {
            return bad("miss_distance must be >= 0");
        }
        if !(self.start_distance.is_finite() && self.start_distance > 0.0) {
            return bad("start_distance must be > 0");
        }
        if !self.turn_rate.is_finite() {
            return bad("turn_rate must be finite");
        }
        let approaching = matches!(
            self.kind,
            TemplateKind::HeadOn | TemplateKind::SideCollision | TemplateKind::Crossing
        );
        if approaching && self.miss_distance >= self.start_distance {
            return bad("miss_distance must be below start_distance");
        }
        if approaching && lo <= 0.0 {
            return bad("approaching objects need a positive speed");
        }
        if self.kind == TemplateKind::CrowdApproach {
            if self.object_count == 0 {
                return bad("crowd needs at least one object");
            }
            if self.critical_count > self.object_count {
                return bad("critical_count exceeds object_count");
            }
        }
        Ok(())
    }
}

/// Constant-turn-rate apparent motion anchored at its closest point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub anchor: Vector2<f64>,
    pub anchor_velocity: Vector2<f64>,
    pub anchor_time: f64,
    pub turn_rate: f64,
}

impl Motion {
    pub fn linear(start: Vector2<f64>, velocity: Vector2<f64>) -> Self {
        Self {
            anchor: start,
            anchor_velocity: velocity,
            anchor_time: 0.0,
            turn_rate: 0.0,
        }
    }

    /// Motion passing at `miss` meters from the origin at time `t_c`.
    /// `side` picks which side of the user the object passes on.
    pub fn passing(velocity: Vector2<f64>, miss: f64, side: f64, t_c: f64, turn_rate: f64) -> Self {
        let dir = velocity.try_normalize(0.0).unwrap_or(Vector2::new(0.0, -1.0));
        let normal = Vector2::new(-dir.y, dir.x);
        Self {
            anchor: normal * (miss * side),
            anchor_velocity: velocity,
            anchor_time: t_c,
            turn_rate,
        }
    }

    pub fn state(&self, t: f64) -> (Vector2<f64>, Vector2<f64>) {
        let tau = t - self.anchor_time;
        let v = self.anchor_velocity;
        let w = self.turn_rate;
        if w.abs() < 1e-12 {
            return (self.anchor + v * tau, v);
        }
        let jv = Vector2::new(-v.y, v.x);
        let (s, c) = (w * tau).sin_cos();
        let p = self.anchor + (v * s + jv * (1.0 - c)) / w;
        (p, v * c + jv * s)
    }
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn sign(rng: &mut impl Rng) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

fn heading(deg: f64) -> Vector2<f64> {
    let r = deg.to_radians();
    Vector2::new(r.cos(), r.sin())
}

/// The critical object of an approaching template, passing at `miss` from the
/// user after covering roughly `start_distance`.
fn approach(t: &ScenarioTemplate, dir: Vector2<f64>, speed: f64, side: f64) -> Motion {
    let along = (t.start_distance.powi(2) - t.miss_distance.powi(2)).sqrt();
    Motion::passing(dir * speed, t.miss_distance, side, along / speed, t.turn_rate)
}

fn distractor(t: &ScenarioTemplate, rng: &mut impl Rng) -> Motion {
    let speed = uniform(rng, t.speed_range.0.max(0.3), t.speed_range.1.max(0.3));
    let dir = heading(uniform(rng, 0.0, 360.0));
    let miss = uniform(rng, 1.6, 3.5);
    let side = sign(rng);
    let t_c = uniform(rng, 0.2, 0.8) * t.duration;
    Motion::passing(dir * speed, miss, side, t_c, 0.0)
}

fn motions(t: &ScenarioTemplate, rng: &mut impl Rng) -> Vec<Motion> {
    let (lo, hi) = t.speed_range;
    let speed = uniform(rng, lo, hi);
    let mut out = Vec::new();
    match t.kind {
        TemplateKind::HeadOn => {
            out.push(approach(t, Vector2::new(0.0, -1.0), speed, sign(rng)));
        }
        TemplateKind::SideCollision => {
            // mostly lateral approach, from either side
            let from_right = sign(rng);
            let below = uniform(rng, 0.0, 30.0);
            let dir = Vector2::new(-from_right * below.to_radians().cos(), -below.to_radians().sin());
            out.push(approach(t, dir, speed, sign(rng)));
        }
        TemplateKind::Crossing => {
            let from_right = sign(rng);
            let below = uniform(rng, 35.0, 60.0);
            let dir = Vector2::new(-from_right * below.to_radians().cos(), -below.to_radians().sin());
            out.push(approach(t, dir, speed, sign(rng)));
        }
        TemplateKind::CrowdApproach => {
            // the user walks into a standing group: all members drift at -speed
            let v = Vector2::new(0.0, -speed);
            for k in 0..t.critical_count {
                let x = uniform(rng, -0.4, 0.4);
                let y = t.start_distance + 1.5 * k as f64 + 0.75;
                out.push(Motion::linear(Vector2::new(x, y), v));
            }
            let columns: [f64; 6] = [-1.6, 1.6, -2.6, 2.6, -3.6, 3.6];
            let others = t.object_count - t.critical_count;
            for k in 0..others {
                let x = columns[k % columns.len()];
                let x = x + x.signum() * uniform(rng, 0.0, 0.2);
                let y = t.start_distance + 1.5 * (k / columns.len()) as f64 + uniform(rng, -0.3, 0.3);
                out.push(Motion::linear(Vector2::new(x, y), v));
            }
        }
        TemplateKind::StaticPass => {
            let x = sign(rng) * t.miss_distance;
            out.push(Motion::linear(
                Vector2::new(x, t.start_distance),
                Vector2::new(0.0, -speed),
            ));
        }
        TemplateKind::Receding => {
            let dir = heading(90.0 + uniform(rng, -60.0, 60.0));
            let r0 = uniform(rng, 2.5, 4.0);
            out.push(Motion::linear(dir * r0, dir * speed));
        }
    }
    for _ in 0..t.distractors {
        out.push(distractor(t, rng));
    }
    out
}

/// Renders a template into a noise-free scenario. Object ids are `0..n` in
/// creation order; the critical object of approaching kinds is id 0.
pub fn generate_scenario(t: &ScenarioTemplate) -> Result<Scenario, SynthError> {
    t.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(t.seed);
    let motions = motions(t, &mut rng);
    let n_frames = (t.duration * t.frame_rate + 1e-9).floor() as usize + 1;
    let frames = (0..n_frames)
        .map(|i| {
            let time = i as f64 / t.frame_rate;
            let objects = motions
                .iter()
                .enumerate()
                .map(|(id, m)| {
                    let (p, v) = m.state(time);
                    ObjectState::new(id as u64, p.x, p.y, v.x, v.y)
                })
                .collect();
            Frame::new(i, t.frame_rate, objects)
        })
        .collect();
    let mut metadata = Metadata::new();
    metadata.insert("kind".into(), t.kind.name().into());
    metadata.insert(
        "template".into(),
        serde_json::to_value(t).expect("template serializes"),
    );
    Scenario::noise_free(t.frame_rate, frames, metadata)
        .map_err(|e| SynthError::InvalidTemplate(e.to_string()))
}

/// The 24-template standard suite: four of each kind, durations 10 to 30 s,
/// speeds 0.5 to 2 m/s. Roughly a quarter of all objects are critical.
pub fn standard_templates(seed: u64) -> Vec<ScenarioTemplate> {
    let mut out = Vec::with_capacity(24);
    for (k, kind) in TemplateKind::ALL.into_iter().enumerate() {
        for j in 0..4 {
            let tseed = derive_seed(seed, &[k as u64, j as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(tseed ^ 0x5eed);
            let speed = uniform(&mut rng, 0.5, 2.0);
            let mut t = ScenarioTemplate::new(kind);
            t.seed = tseed;
            t.speed_range = (speed, speed);
            t.start_distance = uniform(&mut rng, 7.0, 10.0);
            let encounter = t.start_distance / speed;
            t.duration = (encounter + 3.0 / speed + uniform(&mut rng, 1.0, 5.0)).clamp(10.0, 30.0);
            match kind {
                TemplateKind::HeadOn => {
                    t.miss_distance = uniform(&mut rng, 0.0, 0.5);
                    t.distractors = 1;
                }
                TemplateKind::SideCollision => {
                    t.miss_distance = uniform(&mut rng, 0.0, 0.6);
                    t.turn_rate = if j % 2 == 1 { sign(&mut rng) * uniform(&mut rng, 0.05, 0.15) } else { 0.0 };
                    t.distractors = 1;
                }
                TemplateKind::Crossing => {
                    t.miss_distance = uniform(&mut rng, 0.3, 0.8);
                    t.turn_rate = if j % 2 == 0 { sign(&mut rng) * uniform(&mut rng, 0.05, 0.15) } else { 0.0 };
                    t.distractors = 1;
                }
                TemplateKind::CrowdApproach => {
                    t.object_count = 6;
                    t.critical_count = 1;
                    t.start_distance = uniform(&mut rng, 6.0, 8.0);
                }
                TemplateKind::StaticPass => {
                    t.miss_distance = uniform(&mut rng, 1.3, 2.0);
                }
                TemplateKind::Receding => {
                    t.distractors = 1;
                    t.duration = uniform(&mut rng, 10.0, 20.0);
                }
            }
            out.push(t);
        }
    }
    out
}

pub fn standard_suite(seed: u64) -> Result<Vec<Scenario>, SynthError> {
    standard_templates(seed).iter().map(generate_scenario).collect()
}

/// Mixes a base seed with a path of indices (splitmix64 finalizer per step).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(base), |acc, &x| mix(acc ^ mix(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Per-axis standard deviation of position noise (m).
    pub position_sigma: f64,
    /// Probability per frame that a pair of observed ids is exchanged.
    pub id_swap_prob: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            position_sigma: 0.0,
            id_swap_prob: 0.0,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.position_sigma.is_finite() && self.position_sigma >= 0.0) {
            return Err(SynthError::InvalidNoise("position_sigma must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.id_swap_prob) {
            return Err(SynthError::InvalidNoise("id_swap_prob must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Observed velocities as finite differences of observed positions, matched
/// by observed id. First appearances get zero velocity.
pub fn recompute_velocities(s: &Scenario) -> Scenario {
    let mut out = s.clone();
    let rate = s.frame_rate;
    for f in 0..out.observed.len() {
        let (before, rest) = out.observed.split_at_mut(f);
        let prev = before.last();
        for obj in &mut rest[0].objects {
            match prev.and_then(|p| p.object(obj.id)) {
                Some(p) => {
                    obj.vx = (obj.px - p.px) * rate;
                    obj.vy = (obj.py - p.py) * rate;
                }
                None => {
                    obj.vx = 0.0;
                    obj.vy = 0.0;
                }
            }
        }
    }
    out
}

/// Adds i.i.d. Gaussian noise to observed positions and re-derives observed
/// velocities. `position_sigma == 0` leaves the scenario untouched.
pub fn add_position_noise(s: &Scenario, spec: &NoiseSpec) -> Scenario {
    if spec.position_sigma == 0.0 {
        return s.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[1]));
    let mut noisy = s.clone();
    for frame in &mut noisy.observed {
        for obj in &mut frame.objects {
            obj.px += spec.position_sigma * rng.sample::<f64, _>(StandardNormal);
            obj.py += spec.position_sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    recompute_velocities(&noisy)
}

/// Persistent id exchanges in the observed channel.
///
/// From frame 1 on, each frame draws a uniform number; with probability
/// `id_swap_prob` two distinct ids present in that frame exchange labels for
/// the rest of the scenario. Where a label changes its underlying object, the
/// observed velocity becomes the finite difference across the two objects,
/// as a two-frame velocity estimator would report it.
pub fn add_id_swaps(s: &Scenario, spec: &NoiseSpec) -> Scenario {
    if spec.id_swap_prob == 0.0 {
        return s.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[2]));
    let all_ids: BTreeSet<u64> = s
        .observed
        .iter()
        .flat_map(|f| f.objects.iter().map(|o| o.id))
        .collect();
    // label shown for each original id; always a bijection on all_ids
    let mut label: BTreeMap<u64, u64> = all_ids.iter().map(|&i| (i, i)).collect();
    let mut out = s.clone();
    let mut prev_owner: BTreeMap<u64, u64> = BTreeMap::new();
    for (f, frame) in s.observed.iter().enumerate() {
        if f > 0 {
            // fixed draw count per frame keeps swap sets nested in p
            let (u, x, y): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            let n = frame.objects.len();
            if u < spec.id_swap_prob && n >= 2 {
                let mut present: Vec<u64> = frame.objects.iter().map(|o| label[&o.id]).collect();
                present.sort_unstable();
                let i = ((x * n as f64) as usize).min(n - 1);
                let mut j = ((y * (n - 1) as f64) as usize).min(n - 2);
                if j >= i {
                    j += 1;
                }
                let (a, b) = (present[i], present[j]);
                for l in label.values_mut() {
                    if *l == a {
                        *l = b;
                    } else if *l == b {
                        *l = a;
                    }
                }
            }
        }
        let mut owner = BTreeMap::new();
        for obj in &mut out.observed[f].objects {
            let original = obj.id;
            obj.id = label[&original];
            owner.insert(obj.id, original);
        }
        if f > 0 {
            let rate = s.frame_rate;
            let (before, rest) = out.observed.split_at_mut(f);
            let prev = &before[f - 1];
            for obj in &mut rest[0].objects {
                let changed = prev_owner
                    .get(&obj.id)
                    .is_some_and(|o| *o != owner[&obj.id]);
                if changed {
                    if let Some(p) = prev.object(obj.id) {
                        obj.vx = (obj.px - p.px) * rate;
                        obj.vy = (obj.py - p.py) * rate;
                    }
                }
            }
        }
        out.observed[f].objects.sort_by_key(|o| o.id);
        prev_owner = owner;
    }
    out
}

/// Position noise followed by id swaps.
pub fn apply_noise(s: &Scenario, spec: &NoiseSpec) -> Scenario {
    add_id_swaps(&add_position_noise(s, spec), spec)
}
