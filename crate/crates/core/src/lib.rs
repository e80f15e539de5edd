//! Collision warning for visually impaired pedestrians: a probabilistic risk
//! model, distance and time-to-contact baselines, warning post-processing,
//! JPDAF track stabilization, and the tooling to evaluate and tune them on
//! synthetic scenarios.

pub mod baselines;
pub mod experiment;
pub mod hysteresis;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod predict;
pub mod risk;
pub mod scenario;
pub mod synth;
pub mod tracking;
pub mod tune;
