//! Two-threshold warning hysteresis.
//!
//! A warning switches on after `n_on` consecutive raw warnings and off after
//! `n_off` consecutive raw clears. The switch is causal: output changes on the
//! frame that completes the run, never retroactively.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::{Frame, WarningStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HysteresisParams {
    pub n_on: usize,
    pub n_off: usize,
}

impl Default for HysteresisParams {
    fn default() -> Self {
        Self {
            n_on: 2,
            n_off: 5,
        }
    }
}

impl HysteresisParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_on < 1 || self.n_off < 1 {
            return Err("n_on and n_off must be >= 1".into());
        }
        Ok(())
    }
}

/// Online state machine for one object.
#[derive(Debug, Clone)]
pub struct Hysteresis {
    params: HysteresisParams,
    on: bool,
    run: usize,
}

impl Hysteresis {
    pub fn new(params: HysteresisParams) -> Self {
        Self {
            params,
            on: false,
            run: 0,
        }
    }

    pub fn is_on(&self) -> bool {
        self.on
    }

    /// Feeds one raw decision and returns the filtered one.
    pub fn push(&mut self, raw: bool) -> bool {
        if raw != self.on {
            self.run += 1;
            let needed = if self.on {
                self.params.n_off
            } else {
                self.params.n_on
            };
            if self.run >= needed {
                self.on = raw;
                self.run = 0;
            }
        } else {
            self.run = 0;
        }
        self.on
    }
}

pub fn apply_hysteresis(raw: &[bool], params: &HysteresisParams) -> Vec<bool> {
    let mut h = Hysteresis::new(*params);
    raw.iter().map(|&r| h.push(r)).collect()
}

/// Applies hysteresis per object id over a frame sequence.
///
/// A state machine starts (OFF) at the first frame an id appears in. Frames in
/// which a known id is absent count as raw clears; output cells are only
/// produced where the id is present.
pub fn apply_to_stream(
    raw: &WarningStream,
    frames: &[Frame],
    params: &HysteresisParams,
) -> WarningStream {
    let mut machines: BTreeMap<u64, Hysteresis> = BTreeMap::new();
    let mut out = WarningStream::new();
    for frame in frames {
        for obj in &frame.objects {
            machines
                .entry(obj.id)
                .or_insert_with(|| Hysteresis::new(*params));
        }
        for (&id, machine) in machines.iter_mut() {
            let present = frame.object(id).is_some();
            let on = machine.push(present && raw.get(frame.index, id));
            if present {
                out.set(frame.index, id, on);
            }
        }
    }
    out
}
