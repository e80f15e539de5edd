//! `riskwarn`: generate suites, evaluate warning methods, sweep noise, tune
//! and correlate parameters. All results are written as CSV tables.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use riskwarn::experiment::{
    correlate, evaluate_suite, generate_suite, pooled, prepare_all, summarize_sweep, sweep_noise,
    tune_method, write_counts_table, write_history_table, write_matrix_table, write_pooled_table,
    write_samples_table, write_summary_table, write_sweep_table, write_tune_table, Config, Method,
    Split, Variant,
};
use riskwarn::io::{load_scenario, save_scenario};
use riskwarn::scenario::Scenario;
use riskwarn::synth::{apply_noise, derive_seed, NoiseSpec};

#[derive(Debug, Parser)]
#[command(name = "riskwarn", version, about = "Collision-warning evaluation harness")]
struct Cli {
    /// TOML configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// risk, ttc or distance.
    #[arg(long, global = true)]
    method: Option<Method>,
    /// plain, hyst or hyst-jpdaf.
    #[arg(long, global = true)]
    variant: Option<Variant>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the standard scenario suite as scenario files.
    Generate {
        /// Which seeded suite to write.
        #[arg(long, default_value = "eval", value_parser = ["train", "eval"])]
        split: String,
        /// Also write one noisy copy of the suite per sigma of the sweep grid.
        #[arg(long)]
        sigma_sweep: bool,
    },
    /// Score methods and variants against the ideal warnings.
    Evaluate {
        /// Directory of scenario files; defaults to the generated eval suite.
        #[arg(long)]
        scenarios: Option<PathBuf>,
    },
    /// Repeat evaluation over a grid of position noise and ID swap rates.
    SweepNoise,
    /// Tune method parameters with the genetic algorithm on the train suite.
    Tune,
    /// Latin-hypercube sweep of the risk parameters and Spearman matrix.
    Correlate,
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            Config::from_toml(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if cli.method.is_some() {
        cfg.method = cli.method;
    }
    if cli.variant.is_some() {
        cfg.variant = cli.variant;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn methods(cfg: &Config, fallback: &[Method]) -> Vec<Method> {
    cfg.method.map_or_else(|| fallback.to_vec(), |m| vec![m])
}

fn variants(cfg: &Config, fallback: &[Variant]) -> Vec<Variant> {
    cfg.variant.map_or_else(|| fallback.to_vec(), |v| vec![v])
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    let path = dir.join(name);
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating directory {}", dir.display()))
}

fn scenario_name(k: usize, s: &Scenario) -> String {
    let kind = s
        .metadata
        .get("kind")
        .and_then(|v| v.as_str())
        .unwrap_or("scenario");
    format!("{k:02}_{kind}")
}

fn write_suite(dir: &Path, suite: &[Scenario]) -> Result<()> {
    ensure_dir(dir)?;
    for (k, s) in suite.iter().enumerate() {
        save_scenario(s, dir.join(format!("{}.jsonl", scenario_name(k, s))))?;
    }
    Ok(())
}

fn load_dir(dir: &Path) -> Result<(Vec<String>, Vec<Scenario>)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading scenario directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "jsonl"));
    paths.sort();
    if paths.is_empty() {
        bail!("no .jsonl scenario files in {}", dir.display());
    }
    let names = paths
        .iter()
        .map(|p| p.file_stem().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    let suite = paths.iter().map(load_scenario).collect::<Result<_, _>>()?;
    Ok((names, suite))
}

fn cmd_generate(cfg: &Config, out: &Path, split: &str, sigma_sweep: bool) -> Result<()> {
    let split = if split == "train" { Split::Train } else { Split::Eval };
    let suite = generate_suite(cfg.seed, split)?;
    write_suite(out, &suite)?;
    if sigma_sweep {
        for &sigma in &cfg.sweep.sigmas {
            let noisy: Vec<Scenario> = suite
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let spec = NoiseSpec {
                        position_sigma: sigma,
                        id_swap_prob: 0.0,
                        seed: derive_seed(cfg.seed, &[0x9e4, k as u64]),
                    };
                    apply_noise(s, &spec)
                })
                .collect();
            write_suite(&out.join(format!("sigma_{sigma:.3}")), &noisy)?;
        }
    }
    Ok(())
}

fn cmd_evaluate(cfg: &Config, out: &Path, scenarios: Option<&Path>) -> Result<()> {
    let (names, suite) = match scenarios {
        Some(dir) => load_dir(dir)?,
        None => {
            let suite = generate_suite(cfg.seed, Split::Eval)?;
            let names = suite
                .iter()
                .enumerate()
                .map(|(k, s)| scenario_name(k, s))
                .collect();
            (names, suite)
        }
    };
    let prepared = prepare_all(suite, &cfg.pipeline.ideal);
    let mut summary = Vec::new();
    for m in methods(cfg, &Method::ALL) {
        for v in variants(cfg, &Variant::ALL) {
            let counts = evaluate_suite(&prepared, m, v, &cfg.pipeline, cfg.seed);
            write_counts_table(create(out, &format!("evaluate_{m}_{v}.csv"))?, m, v, &names, &counts)?;
            summary.push((m, v, pooled(&counts)));
        }
    }
    write_pooled_table(create(out, "evaluate.csv")?, &summary)?;
    Ok(())
}

fn cmd_sweep(cfg: &Config, out: &Path) -> Result<()> {
    let mut sweep = cfg.sweep.clone();
    sweep.methods = methods(cfg, &sweep.methods);
    sweep.variants = variants(cfg, &sweep.variants);
    let suite = prepare_all(generate_suite(cfg.seed, Split::Eval)?, &cfg.pipeline.ideal);
    let rows = sweep_noise(&suite, &cfg.pipeline, &sweep, cfg.seed);
    write_sweep_table(create(out, "sweep.csv")?, &rows)?;
    write_summary_table(create(out, "sweep_summary.csv")?, &summarize_sweep(&rows))?;
    Ok(())
}

fn cmd_tune(cfg: &Config, out: &Path) -> Result<()> {
    let train = prepare_all(generate_suite(cfg.seed, Split::Train)?, &cfg.pipeline.ideal);
    let mut tuned = cfg.clone();
    let mut outcomes = Vec::new();
    for m in methods(cfg, &cfg.tuning.methods) {
        outcomes.push(tune_method(&train, m, &mut tuned.pipeline, &cfg.tuning)?);
    }
    write_history_table(create(out, "tune_history.csv")?, &outcomes)?;
    write_tune_table(create(out, "tune_params.csv")?, &outcomes)?;
    // run-time choices, not tuning results
    tuned.workers = 0;
    tuned.method = None;
    tuned.variant = None;
    let path = out.join("tuned.toml");
    fs::write(&path, tuned.to_toml()).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_correlate(cfg: &Config, out: &Path) -> Result<()> {
    let suite = prepare_all(generate_suite(cfg.seed, Split::Eval)?, &cfg.pipeline.ideal);
    let corr = correlate(&suite, &cfg.pipeline, &cfg.correlate)?;
    write_matrix_table(create(out, "correlation.csv")?, &corr.labels, &corr.matrix)?;
    write_samples_table(create(out, "correlation_samples.csv")?, &corr.labels, &corr.samples)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
        .context("starting worker pool")?;
    ensure_dir(&cli.out)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Generate { split, sigma_sweep } => cmd_generate(&cfg, out, split, *sigma_sweep),
        Command::Evaluate { scenarios } => cmd_evaluate(&cfg, out, scenarios.as_deref()),
        Command::SweepNoise => cmd_sweep(&cfg, out),
        Command::Tune => cmd_tune(&cfg, out),
        Command::Correlate => cmd_correlate(&cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("riskwarn: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
