use riskwarn::metrics::{id_switches, match_tracks, DEFAULT_GATE};
use riskwarn::scenario::{Frame, Metadata, ObjectState, Scenario};
use riskwarn::synth::{add_position_noise, NoiseSpec};
use riskwarn::tracking::{track_frames, TrackerParams};

const RATE: f64 = 15.0;

/// X pattern through the origin, both objects at the origin at t = 5 s.
fn crossing(swap_after: Option<usize>) -> Scenario {
    let gt: Vec<Frame> = (0..=150)
        .map(|i| {
            let t = i as f64 / RATE;
            Frame::new(
                i,
                RATE,
                vec![
                    ObjectState::new(0, -5.0 + t, -5.0 + t, 1.0, 1.0),
                    ObjectState::new(1, 5.0 - t, -5.0 + t, -1.0, 1.0),
                ],
            )
        })
        .collect();
    let observed = gt
        .iter()
        .map(|f| {
            let mut f = f.clone();
            if swap_after.is_some_and(|k| f.index >= k) {
                for o in &mut f.objects {
                    o.id = 1 - o.id;
                }
                f.objects.sort_by_key(|o| o.id);
            }
            f
        })
        .collect();
    Scenario::new(RATE, gt, observed, Metadata::new()).unwrap()
}

fn mean_error(est: &[Frame], gt: &[Frame]) -> f64 {
    let (mut sum, mut n) = (0.0, 0);
    for ((m, ef), gf) in match_tracks(est, gt, DEFAULT_GATE).iter().zip(est).zip(gt) {
        for (g, e) in m {
            sum += (gf.object(*g).unwrap().position() - ef.object(*e).unwrap().position()).norm();
            n += 1;
        }
    }
    sum / n as f64
}

#[test]
fn ids_swapped_after_crossing_are_repaired() {
    let s = crossing(Some(90));
    let raw = id_switches(&match_tracks(&s.observed, &s.ground_truth, DEFAULT_GATE));
    assert_eq!(raw, 2);
    for seed in 0..5 {
        let tracked = track_frames(&s.observed, RATE, &TrackerParams::default(), seed);
        assert_eq!(id_switches(&match_tracks(&tracked, &s.ground_truth, DEFAULT_GATE)), 0, "seed {seed}");
    }
}

#[test]
fn both_objects_are_tracked_through_the_crossing() {
    let s = crossing(None);
    let tracked = track_frames(&s.observed, RATE, &TrackerParams::default(), 1);
    let matches = match_tracks(&tracked, &s.ground_truth, DEFAULT_GATE);
    // confirmation takes a few frames; afterwards both stay matched
    assert!(matches[5..].iter().all(|m| m.len() == 2));
}

#[test]
fn tracker_smooths_position_noise() {
    let base = crossing(None);
    let mut wins = 0;
    for seed in 0..10 {
        let noisy = add_position_noise(&base, &NoiseSpec { position_sigma: 0.2, id_swap_prob: 0.0, seed });
        let tracked = track_frames(&noisy.observed, RATE, &TrackerParams::default(), seed);
        if mean_error(&tracked, &noisy.ground_truth) < mean_error(&noisy.observed, &noisy.ground_truth) {
            wins += 1;
        }
    }
    assert!(wins >= 9, "tracker better in {wins}/10 seeds");
}

#[test]
fn tracking_is_deterministic_per_seed() {
    let noisy = add_position_noise(&crossing(None), &NoiseSpec { position_sigma: 0.2, id_swap_prob: 0.0, seed: 4 });
    let a = track_frames(&noisy.observed, RATE, &TrackerParams::default(), 9);
    let b = track_frames(&noisy.observed, RATE, &TrackerParams::default(), 9);
    assert_eq!(a, b);
}

