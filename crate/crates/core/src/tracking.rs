//! Particle filter tracks with joint probabilistic data association (JPDAF).
//!
//! Each frame the tracker receives bare position detections (upstream ids are
//! ignored) and
//!
//! 1. propagates every particle with a constant-velocity model plus noise,
//! 2. gates detections against each track's predicted mean,
//! 3. enumerates the feasible joint assignment events and marginalizes them
//!    into per-track association probabilities `beta`,
//! 4. reweights particles with the `beta`-mixture of detection likelihoods and
//!    resamples when the effective sample size drops below half,
//! 5. spawns tentative tracks from unexplained detections, confirms them after
//!    a run of associations and deletes tracks after a run of misses.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::Vector2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{Frame, ObjectState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackError {
    #[error("track {0} is not confirmed")]
    Unconfirmed(u64),
    #[error("invalid tracker parameters: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerParams {
    pub particle_count: usize,
    /// Position diffusion per frame (m).
    pub process_noise_pos: f64,
    /// Velocity diffusion per frame (m/s).
    pub process_noise_vel: f64,
    /// Detection standard deviation (m).
    pub measurement_noise: f64,
    pub gate_radius: f64,
    pub detection_prob: f64,
    /// Clutter detections per m².
    pub clutter_density: f64,
    pub birth_confirm_frames: usize,
    pub death_miss_frames: usize,
    pub max_joint_events: usize,
    /// Velocity spread (m/s) of newly spawned particles.
    pub birth_velocity_std: f64,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            particle_count: 500,
            process_noise_pos: 0.05,
            process_noise_vel: 0.1,
            measurement_noise: 0.15,
            gate_radius: 1.0,
            detection_prob: 0.9,
            clutter_density: 1e-4,
            birth_confirm_frames: 3,
            death_miss_frames: 5,
            max_joint_events: 1000,
            birth_velocity_std: 1.0,
        }
    }
}

impl TrackerParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        let bad = |m| Err(TrackError::InvalidParams(m));
        if self.particle_count < 100 {
            return bad("particle_count must be >= 100");
        }
        let positive = [
            self.process_noise_pos,
            self.process_noise_vel,
            self.measurement_noise,
            self.gate_radius,
            self.clutter_density,
            self.birth_velocity_std,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("noise terms, gate and clutter density must be > 0");
        }
        if !(self.detection_prob > 0.0 && self.detection_prob <= 1.0) {
            return bad("detection_prob must lie in (0, 1]");
        }
        if self.birth_confirm_frames < 1 || self.death_miss_frames < 1 {
            return bad("birth and death frame counts must be >= 1");
        }
        if self.max_joint_events < 1 {
            return bad("max_joint_events must be >= 1");
        }
        Ok(())
    }
}

/// Particle state `[px, py, vx, vy]`.
pub type Particle = [f64; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub particles: Vec<Particle>,
    pub weights: Vec<f64>,
    pub miss_count: usize,
    pub hit_streak: usize,
    pub age: usize,
    pub confirmed: bool,
}

impl Track {
    pub fn spawn(id: u64, at: Vector2<f64>, params: &TrackerParams, rng: &mut impl Rng) -> Self {
        let n = params.particle_count;
        let particles = (0..n)
            .map(|_| {
                [
                    at.x + params.measurement_noise * rng.sample::<f64, _>(StandardNormal),
                    at.y + params.measurement_noise * rng.sample::<f64, _>(StandardNormal),
                    params.birth_velocity_std * rng.sample::<f64, _>(StandardNormal),
                    params.birth_velocity_std * rng.sample::<f64, _>(StandardNormal),
                ]
            })
            .collect();
        Self {
            id,
            particles,
            weights: vec![1.0 / n as f64; n],
            miss_count: 0,
            hit_streak: 1,
            age: 0,
            confirmed: params.birth_confirm_frames <= 1,
        }
    }

    /// Weighted mean of the particle states, accumulated as offsets from the
    /// first particle so a collapsed ensemble returns its state exactly.
    pub fn mean(&self) -> Particle {
        let Some(origin) = self.particles.first().copied() else {
            return [0.0; 4];
        };
        let mut d = [0.0; 4];
        let mut total = 0.0;
        for (p, w) in self.particles.iter().zip(&self.weights) {
            total += w;
            for k in 0..4 {
                d[k] += w * (p[k] - origin[k]);
            }
        }
        std::array::from_fn(|k| origin[k] + d[k] / total)
    }

    pub fn mean_position(&self) -> Vector2<f64> {
        let m = self.mean();
        Vector2::new(m[0], m[1])
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

pub fn estimate_state(track: &Track) -> Result<ObjectState, TrackError> {
    if !track.confirmed {
        return Err(TrackError::Unconfirmed(track.id));
    }
    let m = track.mean();
    Ok(ObjectState::new(track.id, m[0], m[1], m[2], m[3]))
}

/// Marginal association probabilities of one JPDA step.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    /// `beta[t][j]`: probability that detection `j` originates from track `t`.
    pub beta: Vec<Vec<f64>>,
    /// Probability that track `t` produced no detection.
    pub beta_none: Vec<f64>,
    /// Number of joint events that entered the marginalization.
    pub events_used: usize,
}

#[derive(Debug, Clone)]
struct JointEvent {
    log_weight: f64,
    /// Assigned detection per track.
    assignment: Vec<Option<usize>>,
}

impl PartialEq for JointEvent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for JointEvent {}
impl PartialOrd for JointEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for JointEvent {
    // Reversed so the binary heap keeps the weakest event on top.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .log_weight
            .total_cmp(&self.log_weight)
            .then_with(|| other.assignment.cmp(&self.assignment))
    }
}

/// Enumerates feasible joint events and marginalizes them.
///
/// `likelihood[t][j]` is `Some(l)` when detection `j` falls inside track `t`'s
/// gate, with `l` the predictive likelihood of the detection under the track.
/// Only the `max_events` most probable events are kept.
pub fn jpda_associate(
    likelihood: &[Vec<Option<f64>>],
    n_detections: usize,
    detection_prob: f64,
    clutter_density: f64,
    max_events: usize,
) -> Association {
    let n_tracks = likelihood.len();
    // Event weight relative to the all-clutter hypothesis:
    // prod over assigned (Pd * l / clutter) * prod over unassigned tracks (1 - Pd).
    let log_miss = if detection_prob < 1.0 {
        (1.0 - detection_prob).ln()
    } else {
        f64::NEG_INFINITY
    };
    let log_hit: Vec<Vec<Option<f64>>> = likelihood
        .iter()
        .map(|row| {
            row.iter()
                .map(|l| {
                    l.filter(|l| *l > 0.0)
                        .map(|l| (detection_prob * l / clutter_density).ln())
                })
                .collect()
        })
        .collect();

    let mut heap: BinaryHeap<JointEvent> = BinaryHeap::new();
    let mut assignment = vec![None; n_tracks];
    let mut used = vec![false; n_detections];
    enumerate(
        0,
        0.0,
        &log_hit,
        log_miss,
        &mut assignment,
        &mut used,
        &mut heap,
        max_events,
    );

    let events = heap.into_vec();
    let max_log = events
        .iter()
        .map(|e| e.log_weight)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut beta = vec![vec![0.0; n_detections]; n_tracks];
    let mut beta_none = vec![0.0; n_tracks];
    let mut total = 0.0;
    for e in &events {
        let w = (e.log_weight - max_log).exp();
        total += w;
        for (t, a) in e.assignment.iter().enumerate() {
            match a {
                Some(j) => beta[t][*j] += w,
                None => beta_none[t] += w,
            }
        }
    }
    if total > 0.0 {
        for t in 0..n_tracks {
            beta_none[t] /= total;
            for b in &mut beta[t] {
                *b /= total;
            }
        }
    } else {
        // Pd = 1 with some track lacking any gated detection: no event is
        // feasible, treat every track as missed.
        beta_none.iter_mut().for_each(|b| *b = 1.0);
    }
    Association {
        beta,
        beta_none,
        events_used: events.len(),
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    t: usize,
    log_w: f64,
    log_hit: &[Vec<Option<f64>>],
    log_miss: f64,
    assignment: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    heap: &mut BinaryHeap<JointEvent>,
    cap: usize,
) {
    if log_w == f64::NEG_INFINITY {
        return;
    }
    if t == log_hit.len() {
        let event = JointEvent {
            log_weight: log_w,
            assignment: assignment.clone(),
        };
        if heap.len() < cap {
            heap.push(event);
        } else if heap.peek().is_some_and(|weakest| event < *weakest) {
            heap.pop();
            heap.push(event);
        }
        return;
    }
    assignment[t] = None;
    enumerate(t + 1, log_w + log_miss, log_hit, log_miss, assignment, used, heap, cap);
    for j in 0..used.len() {
        if let (false, Some(lh)) = (used[j], log_hit[t][j]) {
            used[j] = true;
            assignment[t] = Some(j);
            enumerate(t + 1, log_w + lh, log_hit, log_miss, assignment, used, heap, cap);
            used[j] = false;
        }
    }
    assignment[t] = None;
}

fn gaussian2(dx: f64, dy: f64, sigma: f64) -> f64 {
    let var = sigma * sigma;
    (-(dx * dx + dy * dy) / (2.0 * var)).exp() / (2.0 * PI * var)
}

fn propagate(track: &mut Track, params: &TrackerParams, dt: f64, rng: &mut impl Rng) {
    for p in &mut track.particles {
        let n: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        p[0] += p[2] * dt + params.process_noise_pos * n[0];
        p[1] += p[3] * dt + params.process_noise_pos * n[1];
        p[2] += params.process_noise_vel * n[2];
        p[3] += params.process_noise_vel * n[3];
    }
}

/// Systematic resampling with a single uniform offset.
fn resample(track: &mut Track, rng: &mut impl Rng) {
    let n = track.particles.len();
    let step = 1.0 / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut cumulative = track.weights[0];
    let mut i = 0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        while u > cumulative && i + 1 < n {
            i += 1;
            cumulative += track.weights[i];
        }
        out.push(track.particles[i]);
        u += step;
    }
    track.particles = out;
    track.weights = vec![step; n];
}

/// Advances all tracks by one frame given this frame's detections.
///
/// New tracks take ids from `next_id`. Returns the association used for the
/// existing tracks (in their order before spawning and deletion).
pub fn jpdaf_step(
    tracks: &mut Vec<Track>,
    next_id: &mut u64,
    detections: &[Vector2<f64>],
    params: &TrackerParams,
    dt: f64,
    rng: &mut impl Rng,
) -> Association {
    for track in tracks.iter_mut() {
        propagate(track, params, dt, rng);
        track.age += 1;
    }

    // Per-particle detection likelihoods for gated pairs.
    let sigma = params.measurement_noise;
    let gate2 = params.gate_radius * params.gate_radius;
    let mut particle_lik: Vec<Vec<Option<Vec<f64>>>> = Vec::with_capacity(tracks.len());
    let mut likelihood: Vec<Vec<Option<f64>>> = Vec::with_capacity(tracks.len());
    for track in tracks.iter() {
        let mean = track.mean_position();
        let mut row_p = Vec::with_capacity(detections.len());
        let mut row = Vec::with_capacity(detections.len());
        for z in detections {
            if (z - mean).norm_squared() > gate2 {
                row_p.push(None);
                row.push(None);
                continue;
            }
            let lik: Vec<f64> = track
                .particles
                .iter()
                .map(|p| gaussian2(z.x - p[0], z.y - p[1], sigma))
                .collect();
            let l: f64 = lik.iter().zip(&track.weights).map(|(l, w)| l * w).sum();
            row_p.push(Some(lik));
            row.push(Some(l));
        }
        particle_lik.push(row_p);
        likelihood.push(row);
    }

    let assoc = jpda_associate(
        &likelihood,
        detections.len(),
        params.detection_prob,
        params.clutter_density,
        params.max_joint_events,
    );

    for (t, track) in tracks.iter_mut().enumerate() {
        let b0 = assoc.beta_none[t];
        let mut any = false;
        let mut new_w: Vec<f64> = vec![b0; track.particles.len()];
        for (j, lik) in particle_lik[t].iter().enumerate() {
            let (Some(lik), Some(l)) = (lik, likelihood[t][j]) else {
                continue;
            };
            let b = assoc.beta[t][j];
            if b <= 0.0 || l <= 0.0 {
                continue;
            }
            any = true;
            for (w, li) in new_w.iter_mut().zip(lik) {
                *w += b * li / l;
            }
        }
        if any {
            for (w, m) in track.weights.iter_mut().zip(&new_w) {
                *w *= m;
            }
            let total: f64 = track.weights.iter().sum();
            if total > 0.0 && total.is_finite() {
                track.weights.iter_mut().for_each(|w| *w /= total);
            } else {
                let n = track.weights.len();
                track.weights = vec![1.0 / n as f64; n];
            }
        }
        if track.effective_sample_size() < track.particles.len() as f64 / 2.0 {
            resample(track, rng);
        }

        if b0 < 0.5 {
            track.hit_streak += 1;
            track.miss_count = 0;
            if track.hit_streak >= params.birth_confirm_frames {
                track.confirmed = true;
            }
        } else {
            track.hit_streak = 0;
            track.miss_count += 1;
        }
    }

    // Detections mostly unexplained by existing tracks start new ones.
    let mut born = Vec::new();
    for (j, z) in detections.iter().enumerate() {
        let explained: f64 = assoc.beta.iter().map(|row| row[j]).sum();
        if explained < 0.5 {
            born.push(Track::spawn(*next_id, *z, params, rng));
            *next_id += 1;
        }
    }
    tracks.retain(|t| t.miss_count < params.death_miss_frames);
    tracks.extend(born);
    assoc
}

/// Owns the track set, id counter and random stream for one scenario.
#[derive(Debug, Clone)]
pub struct JpdafTracker {
    params: TrackerParams,
    dt: f64,
    rng: ChaCha8Rng,
    tracks: Vec<Track>,
    next_id: u64,
}

impl JpdafTracker {
    pub fn new(params: TrackerParams, frame_rate: f64, seed: u64) -> Self {
        Self {
            params,
            dt: 1.0 / frame_rate,
            rng: ChaCha8Rng::seed_from_u64(seed),
            tracks: Vec::new(),
            next_id: 0,
        }
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn step(&mut self, detections: &[Vector2<f64>]) -> Association {
        jpdaf_step(
            &mut self.tracks,
            &mut self.next_id,
            detections,
            &self.params,
            self.dt,
            &mut self.rng,
        )
    }

    /// Smoothed states of all confirmed tracks.
    pub fn estimates(&self) -> Vec<ObjectState> {
        self.tracks
            .iter()
            .filter_map(|t| estimate_state(t).ok())
            .collect()
    }
}

/// Runs the tracker over the observed channel, producing frames of confirmed
/// track estimates aligned with the input.
pub fn track_frames(
    observed: &[Frame],
    frame_rate: f64,
    params: &TrackerParams,
    seed: u64,
) -> Vec<Frame> {
    let mut tracker = JpdafTracker::new(*params, frame_rate, seed);
    observed
        .iter()
        .map(|f| {
            let detections: Vec<_> = f.objects.iter().map(|o| o.position()).collect();
            tracker.step(&detections);
            let mut objects = tracker.estimates();
            objects.sort_by_key(|o| o.id);
            Frame {
                index: f.index,
                time: f.time,
                objects,
            }
        })
        .collect()
}
