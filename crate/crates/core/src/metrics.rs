//! Frame/object confusion counts, warning IoU, stream association and
//! identity-switch counting.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::scenario::{Frame, WarningStream};

/// Default association gate in meters.
pub const DEFAULT_GATE: f64 = 0.75;

/// Ids at or above this value are pseudo-objects standing in for warnings
/// that could not be matched to any ground-truth object.
pub const UNMATCHED_ID_BASE: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, fp, fn_ }
    }

    pub fn iou(&self) -> f64 {
        iou(self)
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl std::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// `tp / (tp + fp + fn)`, or 1 when nothing was required and nothing given.
pub fn iou(c: &ConfusionCounts) -> f64 {
    let denom = c.tp + c.fp + c.fn_;
    if denom == 0 {
        1.0
    } else {
        c.tp as f64 / denom as f64
    }
}

/// Cell-wise comparison of an ideal and a method stream over the union of
/// their cells.
pub fn confusion(ideal: &WarningStream, method: &WarningStream) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for ((f, id), wi) in ideal.iter() {
        match (wi, method.get(f, id)) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => {}
        }
    }
    for ((f, id), wm) in method.iter() {
        if wm && !ideal.contains(f, id) {
            c.fp += 1;
        }
    }
    c
}

fn sq_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Greedy nearest-pair matching between two point sets: repeatedly takes the
/// closest remaining pair within `gate`. Ties break on the ids.
fn greedy_pairs(left: &[(u64, (f64, f64))], right: &[(u64, (f64, f64))], gate: f64) -> Vec<(u64, u64)> {
    let gate2 = gate * gate;
    let mut cand: Vec<(f64, u64, u64)> = Vec::new();
    for &(l, lp) in left {
        for &(r, rp) in right {
            let d = sq_dist(lp, rp);
            if d <= gate2 {
                cand.push((d, l, r));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_l = std::collections::BTreeSet::new();
    let mut used_r = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for (_, l, r) in cand {
        if !used_l.contains(&l) && !used_r.contains(&r) {
            used_l.insert(l);
            used_r.insert(r);
            out.push((l, r));
        }
    }
    out
}

fn positions(frame: &Frame) -> Vec<(u64, (f64, f64))> {
    frame.objects.iter().map(|o| (o.id, (o.px, o.py))).collect()
}

/// Maps warnings on method ids (observed or tracked) to ground-truth ids.
///
/// `method_frames` holds the states the method saw, aligned by frame index
/// with `ground_truth`. Each warned method object is matched to the nearest
/// unmatched ground-truth object within `gate`; warnings without a match
/// land on a fresh pseudo-object id so they still count as false positives.
pub fn associate_streams(
    method: &WarningStream,
    method_frames: &[Frame],
    ground_truth: &[Frame],
    gate: f64,
) -> WarningStream {
    let mut out = WarningStream::new();
    for (mf, gf) in method_frames.iter().zip(ground_truth) {
        let warned: Vec<_> = positions(mf)
            .into_iter()
            .filter(|(id, _)| method.get(mf.index, *id))
            .collect();
        if warned.is_empty() {
            continue;
        }
        let pairs = greedy_pairs(&warned, &positions(gf), gate);
        for &(_, gt) in &pairs {
            out.set(gf.index, gt, true);
        }
        let unmatched = warned
            .iter()
            .filter(|(id, _)| !pairs.iter().any(|(m, _)| m == id));
        for (k, _) in unmatched.enumerate() {
            out.set(gf.index, UNMATCHED_ID_BASE + k as u64, true);
        }
    }
    out
}

/// Per frame, the track id matched to each ground-truth id.
///
/// A pair from the previous frame is kept while both are present and still
/// within `gate`; the remaining objects are paired greedily by distance. This
/// keeps coincident objects from trading tracks on arbitrary ties.
pub fn match_tracks(
    track_frames: &[Frame],
    ground_truth: &[Frame],
    gate: f64,
) -> Vec<BTreeMap<u64, u64>> {
    let mut prev: BTreeMap<u64, u64> = BTreeMap::new();
    track_frames
        .iter()
        .zip(ground_truth)
        .map(|(tf, gf)| {
            let mut pairs: BTreeMap<u64, u64> = prev
                .iter()
                .filter(|&(&g, &t)| match (gf.object(g), tf.object(t)) {
                    (Some(go), Some(to)) => (go.position() - to.position()).norm() <= gate,
                    _ => false,
                })
                .map(|(&g, &t)| (g, t))
                .collect();
            let taken: Vec<u64> = pairs.values().copied().collect();
            let free_gt: Vec<_> = positions(gf)
                .into_iter()
                .filter(|(g, _)| !pairs.contains_key(g))
                .collect();
            let free_tracks: Vec<_> = positions(tf)
                .into_iter()
                .filter(|(t, _)| !taken.contains(t))
                .collect();
            pairs.extend(greedy_pairs(&free_gt, &free_tracks, gate));
            prev = pairs.clone();
            pairs
        })
        .collect()
}

/// Counts frames where a ground-truth object is matched to a different track
/// id than at its previous match.
pub fn id_switches(matches: &[BTreeMap<u64, u64>]) -> usize {
    let mut last: BTreeMap<u64, u64> = BTreeMap::new();
    let mut switches = 0;
    for frame in matches {
        for (&gt, &track) in frame {
            if let Some(prev) = last.insert(gt, track) {
                if prev != track {
                    switches += 1;
                }
            }
        }
    }
    switches
}
