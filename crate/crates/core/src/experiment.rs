//! End-to-end experiment pipeline: configuration, per-scenario evaluation,
//! noise sweeps, tuning and correlation studies, and their output tables.
//!
//! Evaluation of one scenario:
//! observed states, optionally replaced by JPDAF track estimates, then
//! per-frame method warnings, optional hysteresis, association of warned
//! objects to ground truth, and confusion counts against the ideal warning.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{distance_warning, ttc_warning, DistanceParams, TtcParams};
use crate::hysteresis::{apply_to_stream, HysteresisParams};
use crate::metrics::{associate_streams, confusion, ConfusionCounts, DEFAULT_GATE};
use crate::oracle::{ideal_warning, IdealRules};
use crate::risk::{risk_warnings, RiskParams};
use crate::scenario::{Frame, Scenario, WarningStream};
use crate::synth::{apply_noise, derive_seed, standard_suite, NoiseSpec, SynthError};
use crate::tracking::{track_frames, TrackerParams};
use crate::tune::{
    ga_optimize, parameter_sweep, sweep_correlations, GaConfig, GaResult, ParamDim, ParamSpace,
    Scale, TuneError,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no scenarios to evaluate")]
    EmptySuite,
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Risk,
    Ttc,
    Distance,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Risk, Method::Ttc, Method::Distance];

    pub fn name(self) -> &'static str {
        match self {
            Method::Risk => "risk",
            Method::Ttc => "ttc",
            Method::Distance => "distance",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    #[serde(alias = "hyst")]
    Hysteresis,
    #[serde(alias = "hyst-jpdaf")]
    HysteresisJpdaf,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Plain, Variant::Hysteresis, Variant::HysteresisJpdaf];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Hysteresis => "hyst",
            Variant::HysteresisJpdaf => "hyst-jpdaf",
        }
    }

    pub fn uses_tracker(self) -> bool {
        self == Variant::HysteresisJpdaf
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Variant::Plain),
            "hyst" | "hysteresis" => Ok(Variant::Hysteresis),
            "hyst-jpdaf" | "hysteresis_jpdaf" => Ok(Variant::HysteresisJpdaf),
            _ => Err(ExperimentError::Config(format!("unknown variant `{s}`"))),
        }
    }
}

/// Parameters of all three warning methods.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodParams {
    pub risk: RiskParams,
    pub ttc: TtcParams,
    pub distance: DistanceParams,
}

impl MethodParams {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.risk
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.ttc.validate().map_err(ExperimentError::Config)?;
        self.distance.validate().map_err(ExperimentError::Config)
    }
}

/// Hysteresis settings per method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HysteresisSet {
    pub risk: HysteresisParams,
    pub ttc: HysteresisParams,
    pub distance: HysteresisParams,
}

impl Default for HysteresisSet {
    fn default() -> Self {
        Self {
            risk: HysteresisParams { n_on: 2, n_off: 5 },
            ttc: HysteresisParams { n_on: 2, n_off: 3 },
            distance: HysteresisParams { n_on: 1, n_off: 3 },
        }
    }
}

impl HysteresisSet {
    pub fn uniform(p: HysteresisParams) -> Self {
        Self {
            risk: p,
            ttc: p,
            distance: p,
        }
    }

    pub fn get(&self, m: Method) -> HysteresisParams {
        match m {
            Method::Risk => self.risk,
            Method::Ttc => self.ttc,
            Method::Distance => self.distance,
        }
    }
}

/// Everything needed to turn a scenario into confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub methods: MethodParams,
    pub hysteresis: HysteresisSet,
    pub tracker: TrackerParams,
    pub ideal: IdealRules,
    pub gate: Gate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Gate(pub f64);

impl Default for Gate {
    fn default() -> Self {
        Gate(DEFAULT_GATE)
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.methods.validate()?;
        for m in Method::ALL {
            self.hysteresis
                .get(m)
                .validate()
                .map_err(ExperimentError::Config)?;
        }
        self.tracker
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.ideal.validate().map_err(ExperimentError::Config)?;
        if !(self.gate.0.is_finite() && self.gate.0 > 0.0) {
            return Err(ExperimentError::Config("gate must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sigmas: Vec<f64>,
    pub swap_probs: Vec<f64>,
    pub repeats: usize,
    pub methods: Vec<Method>,
    pub variants: Vec<Variant>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 0.05, 0.1, 0.2, 0.3, 0.5],
            swap_probs: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.2],
            repeats: 30,
            methods: Method::ALL.to_vec(),
            variants: vec![Variant::Plain, Variant::Hysteresis],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningConfig {
    pub methods: Vec<Method>,
    /// Also tune the uncertainty growth and cross-section of the risk model.
    pub extended_risk_space: bool,
    pub ga: GaConfig,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            extended_risk_space: true,
            ga: GaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for CorrelateConfig {
    fn default() -> Self {
        Self {
            samples: 500,
            seed: 0,
        }
    }
}

/// Top-level configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Base seed for suites, noise and trackers.
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    pub method: Option<Method>,
    pub variant: Option<Variant>,
    pub pipeline: PipelineParams,
    pub sweep: SweepConfig,
    pub tuning: TuningConfig,
    pub correlate: CorrelateConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.pipeline.validate()?;
        let sw = &self.sweep;
        if sw.sigmas.is_empty() || sw.swap_probs.is_empty() || sw.repeats == 0 {
            return Err(ExperimentError::Config("sweep grids must be non-empty".into()));
        }
        for &sigma in &sw.sigmas {
            NoiseSpec {
                position_sigma: sigma,
                ..Default::default()
            }
            .validate()?;
        }
        for &p in &sw.swap_probs {
            NoiseSpec {
                id_swap_prob: p,
                ..Default::default()
            }
            .validate()?;
        }
        self.tuning.ga.validate()?;
        Ok(())
    }
}

/// Which half of the seed space a suite comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Eval,
}

pub fn suite_seed(seed: u64, split: Split) -> u64 {
    match split {
        Split::Train => derive_seed(seed, &[0x7a11]),
        Split::Eval => derive_seed(seed, &[0xe7a1]),
    }
}

pub fn generate_suite(seed: u64, split: Split) -> Result<Vec<Scenario>, ExperimentError> {
    Ok(standard_suite(suite_seed(seed, split))?)
}

/// Raw per-frame warnings of one method over a frame sequence.
pub fn method_warnings(method: Method, params: &MethodParams, frames: &[Frame]) -> WarningStream {
    let mut out = WarningStream::new();
    for frame in frames {
        match method {
            Method::Risk => {
                for (id, warn) in risk_warnings(frame, &params.risk) {
                    out.set(frame.index, id, warn);
                }
            }
            Method::Ttc => {
                for o in &frame.objects {
                    out.set(frame.index, o.id, ttc_warning(o, &params.ttc));
                }
            }
            Method::Distance => {
                for o in &frame.objects {
                    out.set(frame.index, o.id, distance_warning(o, &params.distance));
                }
            }
        }
    }
    out
}

/// A scenario prepared for repeated evaluation: the ideal stream is computed
/// once.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub ideal: WarningStream,
}

impl Prepared {
    pub fn new(scenario: Scenario, rules: &IdealRules) -> Self {
        let ideal = ideal_warning(&scenario, rules);
        Self { scenario, ideal }
    }
}

pub fn prepare_all(scenarios: Vec<Scenario>, rules: &IdealRules) -> Vec<Prepared> {
    scenarios
        .into_par_iter()
        .map(|s| Prepared::new(s, rules))
        .collect()
}

/// States the warning method sees for a variant.
pub fn method_input(
    scenario: &Scenario,
    variant: Variant,
    tracker: &TrackerParams,
    seed: u64,
) -> Vec<Frame> {
    if variant.uses_tracker() {
        track_frames(&scenario.observed, scenario.frame_rate, tracker, seed)
    } else {
        scenario.observed.clone()
    }
}

/// Confusion counts of a method on states already produced for a variant.
pub fn score_frames(
    prepared: &Prepared,
    frames: &[Frame],
    method: Method,
    variant: Variant,
    params: &PipelineParams,
) -> ConfusionCounts {
    let raw = method_warnings(method, &params.methods, frames);
    let stream = match variant {
        Variant::Plain => raw,
        _ => apply_to_stream(&raw, frames, &params.hysteresis.get(method)),
    };
    let matched = associate_streams(&stream, frames, &prepared.scenario.ground_truth, params.gate.0);
    confusion(&prepared.ideal, &matched)
}

/// Full pipeline on one scenario. `seed` drives the tracker.
pub fn evaluate_scenario(
    prepared: &Prepared,
    method: Method,
    variant: Variant,
    params: &PipelineParams,
    seed: u64,
) -> ConfusionCounts {
    let frames = method_input(&prepared.scenario, variant, &params.tracker, seed);
    score_frames(prepared, &frames, method, variant, params)
}

fn tracker_seed(seed: u64, scenario: usize) -> u64 {
    derive_seed(seed, &[0x7ac4, scenario as u64])
}

/// Per-scenario counts, in suite order.
pub fn evaluate_suite(
    suite: &[Prepared],
    method: Method,
    variant: Variant,
    params: &PipelineParams,
    seed: u64,
) -> Vec<ConfusionCounts> {
    suite
        .par_iter()
        .enumerate()
        .map(|(k, p)| evaluate_scenario(p, method, variant, params, tracker_seed(seed, k)))
        .collect()
}

pub fn pooled(counts: &[ConfusionCounts]) -> ConfusionCounts {
    counts.iter().copied().sum()
}

/// Noise seed shared by every (sigma, p) cell so that cells differ only in
/// noise magnitude and swap threshold.
pub fn noise_seed(seed: u64, repeat: usize, scenario: usize) -> u64 {
    derive_seed(seed, &[0x0015e, repeat as u64, scenario as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: Method,
    pub variant: Variant,
    pub sigma: f64,
    pub swap_prob: f64,
    pub repeat: usize,
    pub counts: ConfusionCounts,
}

impl SweepRow {
    pub fn iou(&self) -> f64 {
        self.counts.iou()
    }
}

/// Pooled counts per (method, variant, sigma, p, repeat). Rows are ordered by
/// sigma, p, repeat, method, variant.
pub fn sweep_noise(
    suite: &[Prepared],
    params: &PipelineParams,
    sweep: &SweepConfig,
    seed: u64,
) -> Vec<SweepRow> {
    let mut jobs = Vec::new();
    for (si, _) in sweep.sigmas.iter().enumerate() {
        for (pi, _) in sweep.swap_probs.iter().enumerate() {
            for r in 0..sweep.repeats {
                for k in 0..suite.len() {
                    jobs.push((si, pi, r, k));
                }
            }
        }
    }
    let needs_tracker = sweep.variants.iter().any(|v| v.uses_tracker());
    let n_cols = sweep.methods.len() * sweep.variants.len();
    // per job: counts for each (method, variant) column
    let per_job: Vec<Vec<ConfusionCounts>> = jobs
        .par_iter()
        .map(|&(si, pi, r, k)| {
            let prepared = &suite[k];
            let spec = NoiseSpec {
                position_sigma: sweep.sigmas[si],
                id_swap_prob: sweep.swap_probs[pi],
                seed: noise_seed(seed, r, k),
            };
            let noisy = Prepared {
                scenario: apply_noise(&prepared.scenario, &spec),
                ideal: prepared.ideal.clone(),
            };
            let tracked = needs_tracker.then(|| {
                track_frames(
                    &noisy.scenario.observed,
                    noisy.scenario.frame_rate,
                    &params.tracker,
                    derive_seed(spec.seed, &[0x7ac4]),
                )
            });
            let mut out = Vec::with_capacity(n_cols);
            for &m in &sweep.methods {
                for &v in &sweep.variants {
                    let frames = match (&tracked, v.uses_tracker()) {
                        (Some(t), true) => t.as_slice(),
                        _ => noisy.scenario.observed.as_slice(),
                    };
                    out.push(score_frames(&noisy, frames, m, v, params));
                }
            }
            out
        })
        .collect();

    let mut rows = Vec::new();
    let n = suite.len();
    for (chunk, job) in per_job.chunks(n).zip(jobs.chunks(n)) {
        let (si, pi, r, _) = job[0];
        let mut col = 0;
        for &m in &sweep.methods {
            for &v in &sweep.variants {
                rows.push(SweepRow {
                    method: m,
                    variant: v,
                    sigma: sweep.sigmas[si],
                    swap_prob: sweep.swap_probs[pi],
                    repeat: r,
                    counts: chunk.iter().map(|c| c[col]).sum(),
                });
                col += 1;
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub method: Method,
    pub variant: Variant,
    pub sigma: f64,
    pub swap_prob: f64,
    pub mean_iou: f64,
    pub std_iou: f64,
    pub repeats: usize,
}

/// Mean and sample standard deviation of IoU over repeats, per cell, in
/// first-appearance order.
pub fn summarize_sweep(rows: &[SweepRow]) -> Vec<CellSummary> {
    let mut keys: Vec<(Method, Variant, u64, u64)> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let key = (r.method, r.variant, r.sigma.to_bits(), r.swap_prob.to_bits());
        match keys.iter().position(|k| *k == key) {
            Some(i) => values[i].push(r.iou()),
            None => {
                keys.push(key);
                values.push(vec![r.iou()]);
            }
        }
    }
    keys.into_iter()
        .zip(values)
        .map(|((method, variant, s, p), v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = if v.len() > 1 {
                v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            CellSummary {
                method,
                variant,
                sigma: f64::from_bits(s),
                swap_prob: f64::from_bits(p),
                mean_iou: mean,
                std_iou: var.sqrt(),
                repeats: v.len(),
            }
        })
        .collect()
}

/// Tunable parameter space of a method.
pub fn param_space(method: Method, extended: bool) -> ParamSpace {
    let dims = match method {
        Method::Risk => {
            let mut d = vec![
                ParamDim::new("risk_threshold", 1e-3, 0.5, Scale::Log),
                ParamDim::new("horizon_s_max", 3.0, 10.0, Scale::Linear),
                ParamDim::new("interval_ds", 0.02, 0.5, Scale::Log),
                ParamDim::new("escape_rate", 0.01, 2.0, Scale::Log),
            ];
            if extended {
                d.extend([
                    ParamDim::new("sigma0", 0.05, 1.0, Scale::Log),
                    ParamDim::new("growth_long", 0.0, 1.0, Scale::Linear),
                    ParamDim::new("growth_lat", 0.0, 0.5, Scale::Linear),
                    ParamDim::new("cross_section", 0.05, 2.0, Scale::Log),
                ]);
            }
            d
        }
        Method::Ttc => vec![
            ParamDim::new("distance_threshold", 0.2, 3.0, Scale::Linear),
            ParamDim::new("time_threshold", 0.5, 8.0, Scale::Linear),
        ],
        Method::Distance => vec![ParamDim::new("distance_threshold", 0.2, 3.0, Scale::Linear)],
    };
    ParamSpace::new(dims).expect("built-in spaces are valid")
}

fn slot<'a>(method: Method, params: &'a mut MethodParams, name: &str) -> Option<&'a mut f64> {
    let risk = &mut params.risk;
    Some(match (method, name) {
        (Method::Risk, "risk_threshold") => &mut risk.risk_threshold,
        (Method::Risk, "horizon_s_max") => &mut risk.horizon_s_max,
        (Method::Risk, "interval_ds") => &mut risk.interval_ds,
        (Method::Risk, "escape_rate") => &mut risk.escape_rate,
        (Method::Risk, "event_duration_dt") => &mut risk.event_duration_dt,
        (Method::Risk, "cross_section") => &mut risk.cross_section,
        (Method::Risk, "sigma0") => &mut risk.uncertainty.sigma0,
        (Method::Risk, "growth_long") => &mut risk.uncertainty.growth_long,
        (Method::Risk, "growth_lat") => &mut risk.uncertainty.growth_lat,
        (Method::Ttc, "distance_threshold") => &mut params.ttc.distance_threshold,
        (Method::Ttc, "time_threshold") => &mut params.ttc.time_threshold,
        (Method::Distance, "distance_threshold") => &mut params.distance.distance_threshold,
        (Method::Distance, "fov_half_angle") => &mut params.distance.fov_half_angle,
        _ => return None,
    })
}

/// Writes named parameter values of `method` into `params`.
pub fn apply_values(
    method: Method,
    params: &mut MethodParams,
    names: &[&str],
    values: &[f64],
) -> Result<(), ExperimentError> {
    for (&name, &x) in names.iter().zip(values) {
        *slot(method, params, name).ok_or_else(|| {
            ExperimentError::Config(format!("{method} has no tunable parameter `{name}`"))
        })? = x;
    }
    Ok(())
}

/// Current values of the named parameters (NaN for unknown names).
pub fn current_values(method: Method, params: &MethodParams, names: &[&str]) -> Vec<f64> {
    let mut probe = *params;
    names
        .iter()
        .map(|&name| slot(method, &mut probe, name).map_or(f64::NAN, |v| *v))
        .collect()
}

/// Pooled IoU of a method with the given parameter vector, plain variant.
pub fn suite_fitness(
    suite: &[Prepared],
    method: Method,
    base: &PipelineParams,
    names: &[&str],
    values: &[f64],
) -> f64 {
    let mut params = *base;
    if apply_values(method, &mut params.methods, names, values).is_err()
        || params.methods.validate().is_err()
    {
        return f64::NEG_INFINITY;
    }
    // sequential inside: the optimizer parallelizes across individuals
    let counts: ConfusionCounts = suite
        .iter()
        .map(|p| {
            score_frames(
                p,
                &p.scenario.observed,
                method,
                Variant::Plain,
                &params,
            )
        })
        .sum();
    counts.iou()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub method: Method,
    pub names: Vec<String>,
    pub result: GaResult,
    /// Fitness of the starting parameters.
    pub baseline: f64,
}

/// Tunes one method on `suite`, seeding the population with the current
/// parameters, and writes the best values into `params`.
pub fn tune_method(
    suite: &[Prepared],
    method: Method,
    params: &mut PipelineParams,
    tuning: &TuningConfig,
) -> Result<TuneOutcome, ExperimentError> {
    if suite.is_empty() {
        return Err(ExperimentError::EmptySuite);
    }
    let space = param_space(method, tuning.extended_risk_space);
    let names = space.names();
    let start = current_values(method, &params.methods, &names);
    let base = *params;
    let fitness = |x: &[f64]| suite_fitness(suite, method, &base, &names, x);
    let baseline = fitness(&start);
    let mut ga = tuning.ga;
    ga.seed = derive_seed(tuning.ga.seed, &[method as u64]);
    let result = ga_optimize(&space, fitness, &ga, Some(&start))?;
    apply_values(method, &mut params.methods, &names, &result.best_params)?;
    Ok(TuneOutcome {
        method,
        names: names.iter().map(|s| s.to_string()).collect(),
        result,
        baseline,
    })
}

/// The four named risk parameters swept in the correlation study.
pub fn correlation_space() -> ParamSpace {
    param_space(Method::Risk, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub samples: Vec<(Vec<f64>, f64)>,
}

/// Latin-hypercube sweep of the four risk parameters (the rest held at
/// `params`) and the Spearman matrix over parameters and pooled IoU.
pub fn correlate(
    suite: &[Prepared],
    params: &PipelineParams,
    cfg: &CorrelateConfig,
) -> Result<Correlation, ExperimentError> {
    if suite.is_empty() {
        return Err(ExperimentError::EmptySuite);
    }
    let space = correlation_space();
    let names = space.names();
    let samples = parameter_sweep(
        &space,
        |x| suite_fitness(suite, Method::Risk, params, &names, x),
        cfg.samples,
        cfg.seed,
    )?;
    let matrix = sweep_correlations(&samples)?;
    let mut labels: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    labels.push("iou".into());
    Ok(Correlation {
        labels,
        matrix,
        samples,
    })
}

/// Fixed-precision float formatting shared by all tables.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.6}")
}

pub fn write_counts_table<W: Write>(
    w: W,
    method: Method,
    variant: Variant,
    names: &[String],
    counts: &[ConfusionCounts],
) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["scenario", "method", "variant", "tp", "fp", "fn", "iou"])?;
    let total = pooled(counts);
    let rows = names.iter().map(String::as_str).zip(counts).chain([("pooled", &total)]);
    for (name, c) in rows {
        wr.write_record([
            name.to_string(),
            method.to_string(),
            variant.to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            fmt_f(c.iou()),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_sweep_table<W: Write>(w: W, rows: &[SweepRow]) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "method", "variant", "sigma", "swap_prob", "repeat", "tp", "fp", "fn", "iou",
    ])?;
    for r in rows {
        wr.write_record([
            r.method.to_string(),
            r.variant.to_string(),
            fmt_f(r.sigma),
            fmt_f(r.swap_prob),
            r.repeat.to_string(),
            r.counts.tp.to_string(),
            r.counts.fp.to_string(),
            r.counts.fn_.to_string(),
            fmt_f(r.iou()),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_summary_table<W: Write>(w: W, cells: &[CellSummary]) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "method", "variant", "sigma", "swap_prob", "repeats", "mean_iou", "std_iou",
    ])?;
    for c in cells {
        wr.write_record([
            c.method.to_string(),
            c.variant.to_string(),
            fmt_f(c.sigma),
            fmt_f(c.swap_prob),
            c.repeats.to_string(),
            fmt_f(c.mean_iou),
            fmt_f(c.std_iou),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_history_table<W: Write>(w: W, outcomes: &[TuneOutcome]) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["method", "generation", "best", "mean", "best_ever"])?;
    for o in outcomes {
        for g in &o.result.history {
            wr.write_record([
                o.method.to_string(),
                g.generation.to_string(),
                fmt_f(g.best),
                fmt_f(g.mean),
                fmt_f(g.best_ever),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn write_matrix_table<W: Write>(
    w: W,
    labels: &[String],
    matrix: &[Vec<f64>],
) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    wr.write_record(&header)?;
    for (label, row) in labels.iter().zip(matrix) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|&x| fmt_f(x)));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_samples_table<W: Write>(
    w: W,
    labels: &[String],
    samples: &[(Vec<f64>, f64)],
) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(labels)?;
    for (x, y) in samples {
        let mut rec: Vec<String> = x.iter().map(|&v| fmt_f(v)).collect();
        rec.push(fmt_f(*y));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// One pooled row per evaluated (method, variant).
pub fn write_pooled_table<W: Write>(
    w: W,
    rows: &[(Method, Variant, ConfusionCounts)],
) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["method", "variant", "tp", "fp", "fn", "iou"])?;
    for (m, v, c) in rows {
        wr.write_record([
            m.to_string(),
            v.to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            fmt_f(c.iou()),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Tuned values per method, plus starting and final fitness.
pub fn write_tune_table<W: Write>(w: W, outcomes: &[TuneOutcome]) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["method", "param", "value"])?;
    for o in outcomes {
        let m = o.method.to_string();
        for (name, &v) in o.names.iter().zip(&o.result.best_params) {
            wr.write_record([m.clone(), name.clone(), fmt_f(v)])?;
        }
        wr.write_record([m.clone(), "baseline_iou".into(), fmt_f(o.baseline)])?;
        wr.write_record([m, "tuned_iou".into(), fmt_f(o.result.best_fitness)])?;
    }
    wr.flush()?;
    Ok(())
}
