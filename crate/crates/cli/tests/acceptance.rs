//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskwarn::experiment::{
    correlate, evaluate_suite, generate_suite, pooled, prepare_all, summarize_sweep, sweep_noise,
    tune_method, CellSummary, Config, CorrelateConfig, Method, PipelineParams, Prepared, Split,
    SweepConfig, TuningConfig, Variant,
};
use riskwarn::hysteresis::{apply_hysteresis, HysteresisParams};
use riskwarn::metrics::{confusion, id_switches, iou, match_tracks, ConfusionCounts, DEFAULT_GATE};
use riskwarn::oracle::{ideal_intervals, ideal_warning, IdealRules};
use riskwarn::predict::GaussianBelief2D;
use riskwarn::risk::{collision_probability, frame_risks, survival_profile, CollisionProfile, RiskParams};
use riskwarn::scenario::{Frame, Metadata, ObjectState, Scenario, WarningStream};
use riskwarn::synth::{
    add_id_swaps, add_position_noise, generate_scenario, NoiseSpec, ScenarioTemplate, TemplateKind,
};
use riskwarn::tracking::{track_frames, TrackerParams};

type Outcome = Result<String, String>;

struct Report {
    failed: usize,
}

impl Report {
    fn run(&mut self, id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut outcome = f();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                let detail = match &outcome {
                    Ok(d) | Err(d) => d.clone(),
                };
                outcome = Err(format!("{detail}; runtime {elapsed:.1?} exceeds {limit:?}"));
            }
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            self.failed += 1;
        }
        println!("{tag} [{id:2}] {name} ({elapsed:.1?}): {detail}");
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---- 1: closed-form overlap and survival --------------------------------

fn random_belief(rng: &mut impl Rng) -> GaussianBelief2D {
    let angle: f64 = rng.random_range(0.0..PI);
    let (c, s) = angle.sin_cos();
    let rot = Matrix2::new(c, -s, s, c);
    let a: f64 = rng.random_range(0.05..1.5);
    let b: f64 = rng.random_range(0.05..1.5);
    GaussianBelief2D {
        mean: Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        cov: rot * Matrix2::new(a * a, 0.0, 0.0, b * b) * rot.transpose(),
    }
}

fn density(b: &GaussianBelief2D, x: Vector2<f64>) -> f64 {
    let inv = b.cov.try_inverse().expect("positive definite");
    let d = x - b.mean;
    (-0.5 * d.dot(&(inv * d))).exp() / (2.0 * PI * b.cov.determinant().sqrt())
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

/// Composite Gauss-Legendre over a box of +-10 std around the product's
/// peak, in the product's principal axes.
fn overlap_quadrature(a: &GaussianBelief2D, b: &GaussianBelief2D, rule: &[(f64, f64)]) -> f64 {
    let pa = a.cov.try_inverse().unwrap();
    let pb = b.cov.try_inverse().unwrap();
    let cov = (pa + pb).try_inverse().unwrap();
    let center = cov * (pa * a.mean + pb * b.mean);
    let eig = cov.symmetric_eigen();
    let panels = 24;
    let mut total = 0.0;
    let axis = |k: usize| {
        let half = 10.0 * eig.eigenvalues[k].sqrt();
        let width = 2.0 * half / panels as f64;
        (0..panels).flat_map(move |p| {
            let mid = -half + (p as f64 + 0.5) * width;
            rule.iter().map(move |&(x, w)| (mid + 0.5 * width * x, 0.5 * width * w))
        })
    };
    for (u, wu) in axis(0) {
        for (v, wv) in axis(1) {
            let x = center + eig.eigenvectors.column(0) * u + eig.eigenvectors.column(1) * v;
            total += wu * wv * density(a, x) * density(b, x);
        }
    }
    total
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rule = gauss_legendre(8);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let (a, b) = (random_belief(&mut rng), random_belief(&mut rng));
        let cross = rng.random_range(0.01..0.5);
        let got = collision_probability(&a, &b, cross).map_err(|e| e.to_string())?;
        let want = (cross * overlap_quadrature(&a, &b, &rule)).min(1.0);
        worst = worst.max((got - want).abs() / want);
    }
    let mut surv_err = 0.0_f64;
    for (c, escape, dt, ds) in [(0.0, 0.3, 0.5, 0.1), (0.2, 0.0, 1.0, 0.05), (0.7, 1.3, 0.25, 0.02)] {
        let params = RiskParams {
            escape_rate: escape,
            event_duration_dt: dt,
            interval_ds: ds,
            ..Default::default()
        };
        let profile = CollisionProfile::new(params.grid().map(|s| (s, c)).collect());
        for (s, v) in survival_profile(&profile, &params) {
            let want = (-(escape + c / dt) * s).exp();
            surv_err = surv_err.max((v - want).abs());
        }
    }
    check(
        worst <= 1e-6 && surv_err <= 1e-12,
        format!("max overlap rel err {worst:.2e} (<= 1e-6), max survival err {surv_err:.2e} (<= 1e-12)"),
    )
}

// ---- 2: discretization convergence ---------------------------------------

fn criterion_2() -> Outcome {
    let s = generate_scenario(&ScenarioTemplate::new(TemplateKind::HeadOn)).map_err(|e| e.to_string())?;
    // object 3 m ahead
    let frame = s
        .ground_truth
        .iter()
        .find(|f| f.objects[0].distance() <= 3.0)
        .ok_or("object never within 3 m")?;
    let risk_at = |ds: f64| {
        let params = RiskParams {
            interval_ds: ds,
            ..Default::default()
        };
        frame_risks(frame, &params)[0].value
    };
    let reference = risk_at(0.001);
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&ds| (risk_at(ds) - reference).abs())
        .collect();
    let rel = errs[0] / reference;
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let first_order = ratios.iter().all(|r| (1.5..=2.5).contains(r));
    check(
        rel < 0.02 && first_order,
        format!("R(0.001)={reference:.5}, rel err at ds=0.1 {:.3}% (< 2%), halving ratios {ratios:.2?} (in [1.5, 2.5])", rel * 100.0),
    )
}

// ---- 3: oracle and metric ----------------------------------------------

fn random_stream(rng: &mut impl Rng, frames: usize, ids: u64, density: f64) -> WarningStream {
    let mut w = WarningStream::new();
    for f in 0..frames {
        for id in 0..ids {
            if rng.random_bool(density) {
                w.set(f, id, rng.random_bool(0.5));
            }
        }
    }
    w
}

fn criterion_3() -> Outcome {
    let s = generate_scenario(&ScenarioTemplate::new(TemplateKind::HeadOn)).map_err(|e| e.to_string())?;
    let rules = IdealRules::default();
    let ivs = ideal_intervals(&s, &rules);
    let iv = ivs.get(&0).and_then(|v| v.first()).ok_or("no ideal interval")?;
    // enters the 1 m bubble at t = 9, leaves 2 m at t = 12
    let frame = 1.0 / s.frame_rate;
    let (want_start, want_end) = (9.0 - rules.lead_time, 12.0);
    let interval_ok = (iv.start - want_start).abs() <= frame && (iv.end - want_end).abs() <= frame;
    let stream = ideal_warning(&s, &rules);
    let warned: Vec<f64> = s
        .ground_truth
        .iter()
        .filter(|f| stream.get(f.index, 0))
        .map(|f| f.time)
        .collect();
    let raster_ok = warned.first().is_some_and(|t| (t - want_start).abs() <= frame)
        && warned.last().is_some_and(|t| (t - want_end).abs() <= frame);
    let iou_ok = iou(&ConfusionCounts::new(5, 3, 2)) == 0.5;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for _ in 0..100 {
        let frames = rng.random_range(1..8);
        let ids = rng.random_range(1..5);
        let a = random_stream(&mut rng, frames, ids, 0.7);
        let b = random_stream(&mut rng, frames, ids, 0.7);
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for f in 0..frames {
            for id in 0..ids {
                match (a.get(f, id), b.get(f, id)) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
            }
        }
        if confusion(&a, &b) != ConfusionCounts::new(tp, fp, fn_) {
            mismatches += 1;
        }
    }
    check(
        interval_ok && raster_ok && iou_ok && mismatches == 0,
        format!(
            "interval [{:.3}, {:.3}] vs [{want_start}, {want_end}], iou(5,3,2)=0.5: {iou_ok}, brute-force mismatches {mismatches}/100",
            iv.start, iv.end
        ),
    )
}

// ---- 4: hysteresis ------------------------------------------------------

/// Reference machine: looks back over the raw history instead of keeping a
/// run counter.
fn reference_hysteresis(raw: &[bool], n_on: usize, n_off: usize) -> Vec<bool> {
    let mut out: Vec<bool> = Vec::with_capacity(raw.len());
    for t in 0..raw.len() {
        let prev = t.checked_sub(1).is_some_and(|p| out[p]);
        let needed = if prev { n_off } else { n_on };
        let target = !prev;
        // the run of `target` must have started after the last state change
        let last_change = (0..t).rev().find(|&k| out[k] != prev).map_or(0, |k| k + 1);
        let run = raw[last_change..=t].iter().rev().take_while(|&&r| r == target).count();
        out.push(if run >= needed { target } else { prev });
    }
    out
}

fn criterion_4() -> Outcome {
    let mut checked = 0usize;
    for n_on in 1..=3 {
        for n_off in 1..=3 {
            let params = HysteresisParams { n_on, n_off };
            for len in 0..=12 {
                for bits in 0u32..(1 << len) {
                    let raw: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
                    let got = apply_hysteresis(&raw, &params);
                    let want = reference_hysteresis(&raw, n_on, n_off);
                    if got != want {
                        return Err(format!("n_on={n_on} n_off={n_off} raw={raw:?}: {got:?} != {want:?}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} sequences agree exactly"))
}

// ---- 5: tracker ---------------------------------------------------------

/// Two objects on an X through the origin, crossing it together at t = 5 s.
fn crossing() -> Scenario {
    let rate = 15.0;
    let frames = (0..=150)
        .map(|i| {
            let t = i as f64 / rate;
            Frame::new(
                i,
                rate,
                vec![
                    ObjectState::new(0, -5.0 + t, -5.0 + t, 1.0, 1.0),
                    ObjectState::new(1, 5.0 - t, -5.0 + t, -1.0, 1.0),
                ],
            )
        })
        .collect();
    Scenario::noise_free(rate, frames, Metadata::new()).expect("valid crossing")
}

fn mean_error(estimates: &[Frame], gt: &[Frame]) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (m, (ef, gf)) in match_tracks(estimates, gt, DEFAULT_GATE).iter().zip(estimates.iter().zip(gt)) {
        for (g, e) in m {
            let (Some(go), Some(eo)) = (gf.object(*g), ef.object(*e)) else {
                continue;
            };
            sum += (go.position() - eo.position()).norm();
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

fn criterion_5() -> Outcome {
    let base = crossing();
    let tracker = TrackerParams::default();
    // smallest p giving exactly one swap for this noise seed
    let swapped = (1..=1000)
        .map(|k| NoiseSpec {
            position_sigma: 0.0,
            id_swap_prob: k as f64 * 1e-3,
            seed: 5,
        })
        .map(|spec| (spec.id_swap_prob, add_id_swaps(&base, &spec)))
        .find(|(_, s)| id_switches(&match_tracks(&s.observed, &s.ground_truth, DEFAULT_GATE)) > 0)
        .ok_or("no swap for any p")?;
    let (p, s) = swapped;
    let raw_switches = id_switches(&match_tracks(&s.observed, &s.ground_truth, DEFAULT_GATE));
    let tracked = track_frames(&s.observed, s.frame_rate, &tracker, 5);
    let jpdaf_switches = id_switches(&match_tracks(&tracked, &s.ground_truth, DEFAULT_GATE));

    let mut wins = 0;
    let (mut raw_sum, mut jpdaf_sum) = (0.0, 0.0);
    for seed in 0..30u64 {
        let noisy = add_position_noise(
            &base,
            &NoiseSpec {
                position_sigma: 0.2,
                id_swap_prob: 0.0,
                seed,
            },
        );
        let raw_err = mean_error(&noisy.observed, &noisy.ground_truth).ok_or("no raw matches")?;
        let tracked = track_frames(&noisy.observed, noisy.frame_rate, &tracker, seed);
        let jpdaf_err = mean_error(&tracked, &noisy.ground_truth).unwrap_or(f64::INFINITY);
        raw_sum += raw_err;
        jpdaf_sum += jpdaf_err;
        if jpdaf_err < raw_err {
            wins += 1;
        }
    }
    check(
        jpdaf_switches == 0 && raw_switches >= 2 && wins >= 28,
        format!(
            "one swap at p={p:.3}: raw id switches {raw_switches} (>= 2), JPDAF {jpdaf_switches} (= 0); \
             JPDAF error below raw in {wins}/30 seeds (>= 28), mean {:.3} m vs {:.3} m",
            jpdaf_sum / 30.0,
            raw_sum / 30.0
        ),
    )
}

// ---- 6-9: experiments with tuned parameters -------------------------------

struct Tuned {
    params: PipelineParams,
    eval: Vec<Prepared>,
}

fn criterion_6(tuned: &mut Option<Tuned>) -> Outcome {
    let base = PipelineParams::default();
    let train = prepare_all(generate_suite(0, Split::Train).map_err(|e| e.to_string())?, &base.ideal);
    let eval = prepare_all(generate_suite(0, Split::Eval).map_err(|e| e.to_string())?, &base.ideal);
    let mut params = base;
    let tuning = TuningConfig::default();
    for m in Method::ALL {
        tune_method(&train, m, &mut params, &tuning).map_err(|e| e.to_string())?;
    }
    let score: BTreeMap<Method, f64> = Method::ALL
        .into_iter()
        .map(|m| (m, pooled(&evaluate_suite(&eval, m, Variant::Plain, &params, 0)).iou()))
        .collect();
    let (risk, ttc, dist) = (score[&Method::Risk], score[&Method::Ttc], score[&Method::Distance]);
    *tuned = Some(Tuned { params, eval });
    check(
        risk >= 0.80 && ttc >= 0.80 && dist <= risk.max(ttc) - 0.05,
        format!("eval-suite pooled IoU risk {risk:.3} (>= 0.80), ttc {ttc:.3} (>= 0.80), distance {dist:.3} (<= best - 0.05)"),
    )
}

fn cell(cells: &[CellSummary], m: Method, v: Variant, sigma: f64, p: f64) -> &CellSummary {
    cells
        .iter()
        .find(|c| c.method == m && c.variant == v && c.sigma == sigma && c.swap_prob == p)
        .expect("cell present")
}

fn criterion_7(t: &Tuned) -> Outcome {
    let sweep = SweepConfig::default();
    let cells = summarize_sweep(&sweep_noise(&t.eval, &t.params, &sweep, 0));
    let mut ok = true;
    let mut lines = Vec::new();
    for m in Method::ALL {
        let mut sigma_violations = Vec::new();
        for v in [Variant::Plain, Variant::Hysteresis] {
            for &p in &sweep.swap_probs {
                for w in sweep.sigmas.windows(2) {
                    let (a, b) = (cell(&cells, m, v, w[0], p), cell(&cells, m, v, w[1], p));
                    if b.mean_iou > a.mean_iou {
                        let rise = b.mean_iou - a.mean_iou;
                        sigma_violations.push((v, p, w[1], rise, rise <= a.std_iou.max(b.std_iou)));
                    }
                }
            }
        }
        let mut hyst_violations = Vec::new();
        for &sigma in &sweep.sigmas {
            for &p in &sweep.swap_probs {
                let plain = cell(&cells, m, Variant::Plain, sigma, p).mean_iou;
                let hyst = cell(&cells, m, Variant::Hysteresis, sigma, p).mean_iou;
                if hyst < plain {
                    hyst_violations.push(format!("(s={sigma},p={p}):{:+.3}", hyst - plain));
                }
            }
        }
        let sigma_ok = sigma_violations.len() <= 1 && sigma_violations.iter().all(|v| v.4);
        let hyst_ok = hyst_violations.len() <= 1;
        ok &= sigma_ok && hyst_ok;
        let sv: Vec<String> = sigma_violations
            .iter()
            .map(|(v, p, s, r, within)| format!("{v} p={p} s={s} +{r:.4}{}", if *within { "" } else { " beyond std" }))
            .collect();
        lines.push(format!(
            "{m}: sigma violations {} {sv:?}, hyst<plain cells {} {hyst_violations:?}",
            sigma_violations.len(),
            hyst_violations.len()
        ));
    }
    check(ok, lines.join("; "))
}

fn criterion_8(t: &Tuned) -> Outcome {
    let sweep = SweepConfig {
        sigmas: vec![0.2],
        swap_probs: vec![0.05],
        variants: Variant::ALL.to_vec(),
        ..Default::default()
    };
    let cells = summarize_sweep(&sweep_noise(&t.eval, &t.params, &sweep, 0));
    let mean = |m, v| cell(&cells, m, v, 0.2, 0.05).mean_iou;
    let mut ok = true;
    let mut lines = Vec::new();
    for m in Method::ALL {
        let (pl, hy, hj) = (
            mean(m, Variant::Plain),
            mean(m, Variant::Hysteresis),
            mean(m, Variant::HysteresisJpdaf),
        );
        ok &= hj >= hy && hy >= pl;
        lines.push(format!("{m} {pl:.3} <= {hy:.3} <= {hj:.3}"));
    }
    let best = cells
        .iter()
        .max_by(|a, b| a.mean_iou.total_cmp(&b.mean_iou))
        .expect("cells");
    let risk_best = best.method == Method::Risk && best.variant == Variant::HysteresisJpdaf;
    ok &= risk_best;
    lines.push(format!("best cell {} {} {:.3}", best.method, best.variant, best.mean_iou));
    check(ok, lines.join(", "))
}

fn criterion_9(t: &Tuned) -> Outcome {
    let corr = correlate(&t.eval, &t.params, &CorrelateConfig::default()).map_err(|e| e.to_string())?;
    let last = corr.labels.len() - 1;
    let rho = |name: &str| {
        let i = corr.labels.iter().position(|l| l == name).expect("label");
        corr.matrix[i][last].abs()
    };
    let (escape, threshold, interval) = (rho("escape_rate"), rho("risk_threshold"), rho("interval_ds"));
    check(
        escape > interval && threshold > interval,
        format!(
            "|rho| vs IoU over {} samples: escape_rate {escape:.3}, risk_threshold {threshold:.3}, interval_ds {interval:.3}",
            corr.samples.len()
        ),
    )
}

// ---- 10: determinism ----------------------------------------------------

fn run_cli(config: &Path, out: &Path, workers: usize, args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_riskwarn"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--workers")
        .arg(workers.to_string())
        .args(args)
        .status()
        .map_err(|e| e.to_string())?;
    check(status.success(), String::new()).map(|_| ()).map_err(|_| format!("riskwarn {args:?} failed"))
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).expect("readable output") {
            let p = e.expect("entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).expect("readable file"));
            }
        }
    }
    out
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = Config {
        seed: 7,
        ..Default::default()
    };
    cfg.sweep.sigmas = vec![0.0, 0.2];
    cfg.sweep.swap_probs = vec![0.0, 0.05];
    cfg.sweep.repeats = 2;
    cfg.sweep.variants = Variant::ALL.to_vec();
    cfg.tuning.ga.population_size = 8;
    cfg.tuning.ga.generations = 2;
    cfg.correlate.samples = 24;
    let config = tmp.path().join("config.toml");
    fs::write(&config, cfg.to_toml()).map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for workers in [1, 3, 1] {
        let out = tmp.path().join(format!("run{}", trees.len()));
        for cmd in [&["generate", "--sigma-sweep"][..], &["evaluate"], &["sweep-noise"], &["tune"], &["correlate"]] {
            run_cli(&config, &out, workers, cmd)?;
        }
        trees.push(read_tree(&out));
    }
    let files = trees[0].len();
    let identical = trees.windows(2).all(|w| w[0] == w[1]);
    check(
        identical && files > 0,
        format!("{files} output files byte-identical across runs with 1, 3 and 1 workers: {identical}"),
    )
}

fn main() {
    let mut report = Report { failed: 0 };
    let secs = |s| Some(Duration::from_secs(s));
    report.run(1, "risk core vs quadrature and closed-form survival", secs(10), criterion_1);
    report.run(2, "risk discretization convergence", secs(5), criterion_2);
    report.run(3, "ideal warning, IoU and confusion", None, criterion_3);
    report.run(4, "hysteresis exhaustive agreement", None, criterion_4);
    report.run(5, "tracker identity and smoothing", secs(60), criterion_5);
    let mut tuned = None;
    report.run(6, "noise-free tuned IoU", secs(600), || criterion_6(&mut tuned));
    match &tuned {
        Some(t) => {
            report.run(7, "noise-robustness trends", None, || criterion_7(t));
            report.run(8, "variant ordering at sigma=0.2, p=0.05", None, || criterion_8(t));
            report.run(9, "parameter correlation study", secs(600), || criterion_9(t));
        }
        None => {
            for (id, name) in [(7, "noise-robustness trends"), (8, "variant ordering"), (9, "parameter correlation study")] {
                report.run(id, name, None, || Err("tuning did not complete".into()));
            }
        }
    }
    report.run(10, "deterministic tables across worker counts", None, criterion_10);
    println!("acceptance: {} of 10 criteria failed", report.failed);
    if report.failed > 0 {
        std::process::exit(1);
    }
}
