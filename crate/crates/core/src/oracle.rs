//! Ideal (ground-truth) warnings computed from complete trajectories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::{Scenario, WarningStream};

/// Tolerance on interval bounds when rasterizing onto frame times.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdealRules {
    /// Seconds of warning before the object enters the bubble.
    pub lead_time: f64,
    pub enter_radius: f64,
    pub exit_radius: f64,
}

impl Default for IdealRules {
    fn default() -> Self {
        Self {
            lead_time: 3.0,
            enter_radius: 1.0,
            exit_radius: 2.0,
        }
    }
}

impl IdealRules {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.enter_radius > 0.0 && self.enter_radius < self.exit_radius) {
            return Err("need 0 < enter_radius < exit_radius".into());
        }
        if self.lead_time.is_nan() || self.lead_time < 0.0 {
            return Err("lead_time must be >= 0".into());
        }
        Ok(())
    }
}

/// Closed warning interval `[start, end]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

/// Merged warning intervals per ground-truth object id, clipped to the
/// scenario time span.
pub fn ideal_intervals(scenario: &Scenario, rules: &IdealRules) -> BTreeMap<u64, Vec<Interval>> {
    // (time, distance) samples per object
    let mut tracks: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for frame in &scenario.ground_truth {
        for obj in &frame.objects {
            tracks
                .entry(obj.id)
                .or_default()
                .push((frame.time, obj.distance()));
        }
    }
    let end_time = scenario.end_time();
    tracks
        .into_iter()
        .map(|(id, samples)| {
            let mut raw = Vec::new();
            let mut inside_prev = false;
            for (k, &(t, d)) in samples.iter().enumerate() {
                let inside = d <= rules.enter_radius;
                if inside && !inside_prev {
                    let exit = samples[k + 1..]
                        .iter()
                        .find(|&&(_, d)| d > rules.exit_radius)
                        .map_or(end_time, |&(t, _)| t);
                    raw.push(Interval {
                        start: (t - rules.lead_time).max(0.0),
                        end: exit.min(end_time),
                    });
                }
                inside_prev = inside;
            }
            (id, merge(raw))
        })
        .collect()
}

fn merge(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.start <= last.end + TIME_EPS => last.end = last.end.max(iv.end),
            _ => out.push(iv),
        }
    }
    out
}

/// Rasterized ideal warning: one cell per ground-truth object and frame.
pub fn ideal_warning(scenario: &Scenario, rules: &IdealRules) -> WarningStream {
    let intervals = ideal_intervals(scenario, rules);
    let mut out = WarningStream::new();
    for frame in &scenario.ground_truth {
        for obj in &frame.objects {
            let warn = intervals.get(&obj.id).is_some_and(|ivs| {
                ivs.iter()
                    .any(|iv| frame.time >= iv.start - TIME_EPS && frame.time <= iv.end + TIME_EPS)
            });
            out.set(frame.index, obj.id, warn);
        }
    }
    out
}
