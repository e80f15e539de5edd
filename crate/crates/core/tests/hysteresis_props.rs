use proptest::prelude::*;
use riskwarn::hysteresis::{apply_hysteresis, apply_to_stream, HysteresisParams};
use riskwarn::scenario::{Frame, ObjectState, WarningStream};

/// Maximal runs of equal values as (value, start, len).
fn runs(v: &[bool]) -> Vec<(bool, usize, usize)> {
    let mut out: Vec<(bool, usize, usize)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.0 == x => r.2 += 1,
            _ => out.push((x, i, 1)),
        }
    }
    out
}

proptest! {
    #[test]
    fn warnings_start_only_after_n_on_raw_warnings(
        raw in prop::collection::vec(any::<bool>(), 0..60),
        n_on in 1usize..5,
        n_off in 1usize..5,
    ) {
        let out = apply_hysteresis(&raw, &HysteresisParams { n_on, n_off });
        prop_assert_eq!(out.len(), raw.len());
        for (value, start, _) in runs(&out) {
            if value {
                // the n_on frames ending at the onset are raw warnings
                prop_assert!(start + 1 >= n_on);
                prop_assert!(raw[start + 1 - n_on..=start].iter().all(|&r| r));
            }
        }
    }

    #[test]
    fn gaps_inside_warnings_are_bridged(
        raw in prop::collection::vec(any::<bool>(), 0..60),
        n_on in 1usize..5,
        n_off in 1usize..5,
    ) {
        let out = apply_hysteresis(&raw, &HysteresisParams { n_on, n_off });
        for (i, _) in out.iter().enumerate().filter(|(_, &o)| o) {
            // while on, a switch-off needs n_off raw clears ending at that frame
            if i + 1 < out.len() && !out[i + 1] {
                let end = i + 1;
                prop_assert!(end + 1 >= n_off);
                prop_assert!(raw[end + 1 - n_off..=end].iter().all(|&r| !r));
            }
        }
    }

    #[test]
    fn unit_thresholds_reproduce_raw(raw in prop::collection::vec(any::<bool>(), 0..60)) {
        prop_assert_eq!(apply_hysteresis(&raw, &HysteresisParams { n_on: 1, n_off: 1 }), raw);
    }

    #[test]
    fn per_object_streams_match_per_sequence_filtering(
        a in prop::collection::vec(any::<bool>(), 1..40),
        b_seed in prop::collection::vec(any::<bool>(), 1..40),
        n_on in 1usize..4,
        n_off in 1usize..4,
    ) {
        let n = a.len().min(b_seed.len());
        let params = HysteresisParams { n_on, n_off };
        let frames: Vec<Frame> = (0..n)
            .map(|i| Frame::new(i, 15.0, vec![ObjectState::new(3, 1.0, 0.0, 0.0, 0.0), ObjectState::new(9, -1.0, 0.0, 0.0, 0.0)]))
            .collect();
        let mut raw = WarningStream::new();
        for i in 0..n {
            raw.set(i, 3, a[i]);
            raw.set(i, 9, b_seed[i]);
        }
        let out = apply_to_stream(&raw, &frames, &params);
        let fa = apply_hysteresis(&a[..n], &params);
        let fb = apply_hysteresis(&b_seed[..n], &params);
        for i in 0..n {
            prop_assert_eq!(out.get(i, 3), fa[i]);
            prop_assert_eq!(out.get(i, 9), fb[i]);
        }
    }
}

#[test]
fn late_object_starts_off() {
    let params = HysteresisParams { n_on: 2, n_off: 2 };
    let frames: Vec<Frame> = (0..4)
        .map(|i| {
            let mut objs = vec![ObjectState::new(0, 1.0, 0.0, 0.0, 0.0)];
            if i >= 2 {
                objs.push(ObjectState::new(1, 2.0, 0.0, 0.0, 0.0));
            }
            Frame::new(i, 15.0, objs)
        })
        .collect();
    let mut raw = WarningStream::new();
    for i in 0..4 {
        raw.set(i, 0, true);
        if i >= 2 {
            raw.set(i, 1, true);
        }
    }
    let out = apply_to_stream(&raw, &frames, &params);
    assert_eq!((0..4).map(|i| out.get(i, 0)).collect::<Vec<_>>(), [false, true, true, true]);
    assert!(!out.contains(1, 1));
    assert!(!out.get(2, 1));
    assert!(out.get(3, 1));
}
