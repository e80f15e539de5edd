//! Real-coded genetic algorithm, Latin-hypercube sweeps and Spearman rank
//! correlation.
//!
//! Individuals live in the unit cube; each axis maps linearly or
//! logarithmically onto its parameter bounds.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuneError {
    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("columns have different lengths")]
    RaggedColumns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDim {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub scale: Scale,
}

impl ParamDim {
    pub fn new(name: &str, lower: f64, upper: f64, scale: Scale) -> Self {
        Self {
            name: name.to_string(),
            lower,
            upper,
            scale,
        }
    }

    /// Maps `u` in `[0, 1]` onto the bounds (clamping out-of-range input).
    pub fn from_unit(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self.scale {
            Scale::Linear => self.lower + u * (self.upper - self.lower),
            Scale::Log => (self.lower.ln() + u * (self.upper.ln() - self.lower.ln())).exp(),
        }
        .clamp(self.lower, self.upper)
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        let x = x.clamp(self.lower, self.upper);
        match self.scale {
            Scale::Linear => (x - self.lower) / (self.upper - self.lower),
            Scale::Log => (x.ln() - self.lower.ln()) / (self.upper.ln() - self.lower.ln()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub dims: Vec<ParamDim>,
}

impl ParamSpace {
    pub fn new(dims: Vec<ParamDim>) -> Result<Self, TuneError> {
        let s = Self { dims };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), TuneError> {
        if self.dims.is_empty() {
            return Err(TuneError::InvalidSpace("no dimensions".into()));
        }
        for d in &self.dims {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower < d.upper) {
                return Err(TuneError::InvalidSpace(format!("{}: need lower < upper", d.name)));
            }
            if d.scale == Scale::Log && d.lower <= 0.0 {
                return Err(TuneError::InvalidSpace(format!(
                    "{}: log scale needs lower > 0",
                    d.name
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.dims.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn from_unit(&self, unit: &[f64]) -> Vec<f64> {
        self.dims.iter().zip(unit).map(|(d, &u)| d.from_unit(u)).collect()
    }

    pub fn to_unit(&self, values: &[f64]) -> Vec<f64> {
        self.dims.iter().zip(values).map(|(d, &x)| d.to_unit(x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Mutation step as a fraction of each parameter range.
    pub mutation_sigma: f64,
    pub elitism_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 40,
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            mutation_sigma: 0.1,
            elitism_count: 2,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), TuneError> {
        let bad = |m: &str| Err(TuneError::InvalidConfig(m.to_string()));
        if self.population_size < 4 {
            return bad("population_size must be >= 4");
        }
        if self.tournament_size < 1 {
            return bad("tournament_size must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("rates must lie in [0, 1]");
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma >= 0.0) {
            return bad("mutation_sigma must be >= 0");
        }
        if self.elitism_count > self.population_size {
            return bad("elitism_count exceeds population_size");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_ever: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best_params: Vec<f64>,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
    pub evaluations: usize,
}

/// Fitness values keyed by the exact bit pattern of an individual.
struct Cache<'a, F> {
    space: &'a ParamSpace,
    fitness: &'a F,
    seen: HashMap<Vec<u64>, f64>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Cache<'_, F> {
    fn key(unit: &[f64]) -> Vec<u64> {
        unit.iter().map(|u| u.to_bits()).collect()
    }

    fn evaluate(&mut self, population: &[Vec<f64>]) -> Vec<f64> {
        let mut missing: Vec<&Vec<f64>> = Vec::new();
        for ind in population {
            let k = Self::key(ind);
            if !self.seen.contains_key(&k) && !missing.iter().any(|m| Self::key(m) == k) {
                missing.push(ind);
            }
        }
        let (space, fitness) = (self.space, self.fitness);
        let fresh: Vec<f64> = missing
            .par_iter()
            .map(|ind| {
                let f = fitness(&space.from_unit(ind));
                if f.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    f
                }
            })
            .collect();
        for (ind, f) in missing.into_iter().zip(fresh) {
            self.seen.insert(Self::key(ind), f);
        }
        population.iter().map(|ind| self.seen[&Self::key(ind)]).collect()
    }
}

fn tournament<'a>(
    population: &'a [Vec<f64>],
    scores: &[f64],
    size: usize,
    rng: &mut impl Rng,
) -> &'a [f64] {
    let mut best = rng.random_range(0..population.len());
    for _ in 1..size {
        let c = rng.random_range(0..population.len());
        if scores[c] > scores[best] {
            best = c;
        }
    }
    &population[best]
}

/// Maximizes `fitness` over `space`.
///
/// `seed_individual` (in parameter units) replaces one random member of the
/// initial population, so the result is never worse than that point. Fitness
/// calls within a generation run on the rayon pool; results do not depend on
/// the pool size.
pub fn ga_optimize<F>(
    space: &ParamSpace,
    fitness: F,
    cfg: &GaConfig,
    seed_individual: Option<&[f64]>,
) -> Result<GaResult, TuneError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    space.validate()?;
    cfg.validate()?;
    let d = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut population: Vec<Vec<f64>> = (0..cfg.population_size)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    if let Some(x) = seed_individual {
        population[0] = space.to_unit(x);
    }
    let mut cache = Cache {
        space,
        fitness: &fitness,
        seen: HashMap::new(),
    };
    let mut best_unit = population[0].clone();
    let mut best_fitness = f64::NEG_INFINITY;
    let mut history = Vec::with_capacity(cfg.generations + 1);

    for generation in 0..=cfg.generations {
        let scores = cache.evaluate(&population);
        for (ind, &s) in population.iter().zip(&scores) {
            if s > best_fitness {
                best_fitness = s;
                best_unit = ind.clone();
            }
        }
        let gen_best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        history.push(GenerationStats {
            generation,
            best: gen_best,
            mean: scores.iter().sum::<f64>() / scores.len() as f64,
            best_ever: best_fitness,
        });
        if generation == cfg.generations {
            break;
        }

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut next: Vec<Vec<f64>> = order[..cfg.elitism_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < cfg.population_size {
            let a = tournament(&population, &scores, cfg.tournament_size, &mut rng);
            let b = tournament(&population, &scores, cfg.tournament_size, &mut rng);
            let (mut c1, mut c2) = (a.to_vec(), b.to_vec());
            if rng.random::<f64>() < cfg.crossover_rate {
                for g in 0..d {
                    let lo = a[g].min(b[g]) - 0.1;
                    let hi = a[g].max(b[g]) + 0.1;
                    c1[g] = rng.random_range(lo..hi).clamp(0.0, 1.0);
                    c2[g] = rng.random_range(lo..hi).clamp(0.0, 1.0);
                }
            }
            for child in [&mut c1, &mut c2] {
                for g in child.iter_mut() {
                    if rng.random::<f64>() < cfg.mutation_rate {
                        let step: f64 = rng.sample(StandardNormal);
                        *g = (*g + cfg.mutation_sigma * step).clamp(0.0, 1.0);
                    }
                }
            }
            next.push(c1);
            if next.len() < cfg.population_size {
                next.push(c2);
            }
        }
        population = next;
    }

    Ok(GaResult {
        best_params: space.from_unit(&best_unit),
        best_fitness,
        history,
        evaluations: cache.seen.len(),
    })
}

/// `n` Latin-hypercube points in the `d`-dimensional unit cube: every axis
/// has exactly one point in each of its `n` equal bins.
pub fn latin_hypercube(n: usize, d: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; d]; n];
    for axis in 0..d {
        let mut bins: Vec<usize> = (0..n).collect();
        bins.shuffle(rng);
        for (point, bin) in points.iter_mut().zip(bins) {
            point[axis] = (bin as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    points
}

/// Evaluates `fitness` on a Latin-hypercube design over `space`.
pub fn parameter_sweep<F>(
    space: &ParamSpace,
    fitness: F,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(Vec<f64>, f64)>, TuneError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    space.validate()?;
    if n_samples < 2 {
        return Err(TuneError::TooFewSamples {
            needed: 2,
            got: n_samples,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let design: Vec<Vec<f64>> = latin_hypercube(n_samples, space.len(), &mut rng)
        .iter()
        .map(|u| space.from_unit(u))
        .collect();
    let scores: Vec<f64> = design.par_iter().map(|x| fitness(x)).collect();
    Ok(design.into_iter().zip(scores).collect())
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Pairwise Spearman correlation between columns. A constant column has zero
/// correlation with every other column.
pub fn spearman_matrix(columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, TuneError> {
    let n = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != n) {
        return Err(TuneError::RaggedColumns);
    }
    if n < 3 {
        return Err(TuneError::TooFewSamples { needed: 3, got: n });
    }
    let ranks: Vec<Vec<f64>> = columns.iter().map(|c| average_ranks(c)).collect();
    let m = columns.len();
    let mut out = vec![vec![0.0; m]; m];
    for i in 0..m {
        out[i][i] = 1.0;
        for j in 0..i {
            let r = pearson(&ranks[i], &ranks[j]);
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}

/// Spearman matrix over the parameters and score of sweep samples; the score
/// is the last row and column.
pub fn sweep_correlations(samples: &[(Vec<f64>, f64)]) -> Result<Vec<Vec<f64>>, TuneError> {
    let d = samples.first().map_or(0, |s| s.0.len());
    let mut columns: Vec<Vec<f64>> = (0..d)
        .map(|k| samples.iter().map(|s| s.0[k]).collect())
        .collect();
    columns.push(samples.iter().map(|s| s.1).collect());
    spearman_matrix(&columns)
}
