//! Adaptive genetic search over feature masks.
//!
//! Generational GA with binary tournament selection, uniform crossover and
//! per-bit mutation. Crossover and mutation probabilities follow the
//! individual's fitness relative to the population:
//!
//! ```text
//! p = p_max - (p_max - p_min)(f_avg - f)/(f_avg - f_min)   if f <= f_avg
//! p = p_max                                                 otherwise
//! ```
//!
//! The best individual is carried over unchanged each generation and the run
//! stops once it has not changed for `stagnation_limit` generations.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::criterion::{mvmr_score, FeatureMetricsCache};
use crate::dataset::FeatureMask;
use crate::error::{Error, Result};

pub const DEFAULT_POPULATION: usize = 50;
pub const DEFAULT_STAGNATION: usize = 200;
pub const DEFAULT_MAX_FEATURES: usize = 50;
pub const DEFAULT_MAX_GENERATIONS: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub mask: FeatureMask,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn unevaluated(mask: FeatureMask) -> Self {
        Self { mask, fitness: None }
    }

    pub fn evaluate(cache: &FeatureMetricsCache, mask: FeatureMask) -> Result<Self> {
        let fitness = mvmr_score(cache, &mask)?;
        Ok(Self {
            mask,
            fitness: Some(fitness),
        })
    }

    fn score(&self) -> Result<f64> {
        self.fitness
            .ok_or_else(|| Error::InvalidInput("individual has not been evaluated".into()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub stagnation_limit: usize,
    pub pc_max: f64,
    pub pc_min: f64,
    pub pm_max: f64,
    pub pm_min: f64,
    /// Upper bound on selected features; clamped to the feature count.
    pub max_features: usize,
    pub max_generations: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: DEFAULT_POPULATION,
            stagnation_limit: DEFAULT_STAGNATION,
            pc_max: 0.90,
            pc_min: 0.50,
            pm_max: 0.10,
            pm_min: 0.01,
            max_features: DEFAULT_MAX_FEATURES,
            max_generations: DEFAULT_MAX_GENERATIONS,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size < 4 {
            return bad(format!("population size must be >= 4, got {}", self.population_size));
        }
        if self.stagnation_limit < 1 {
            return bad("stagnation limit must be >= 1".into());
        }
        if self.max_features < 1 {
            return bad("max features must be >= 1".into());
        }
        if self.max_generations < 1 {
            return bad("max generations must be >= 1".into());
        }
        for (name, lo, hi) in [
            ("crossover", self.pc_min, self.pc_max),
            ("mutation", self.pm_min, self.pm_max),
        ] {
            if !(0.0 < lo && lo < hi && hi <= 1.0) {
                return bad(format!(
                    "{name} probabilities need 0 < min < max <= 1, got min {lo}, max {hi}"
                ));
            }
        }
        Ok(())
    }

    pub fn cap(&self, n_features: usize) -> usize {
        self.max_features.min(n_features)
    }
}

fn adaptive_rate(f: f64, f_avg: f64, f_min: f64, max: f64, min: f64) -> f64 {
    if f > f_avg || f_avg <= f_min {
        return max;
    }
    let t = (f_avg - f) / (f_avg - f_min);
    if t >= 1.0 {
        min
    } else if t <= 0.0 {
        max
    } else {
        (max - (max - min) * t).clamp(min, max)
    }
}

/// Crossover probability for a pair whose better fitness is `f_c`.
pub fn adaptive_pc(f_c: f64, f_avg: f64, f_min: f64, cfg: &GaConfig) -> f64 {
    adaptive_rate(f_c, f_avg, f_min, cfg.pc_max, cfg.pc_min)
}

/// Mutation probability for an individual of fitness `f_m`.
pub fn adaptive_pm(f_m: f64, f_avg: f64, f_min: f64, cfg: &GaConfig) -> f64 {
    adaptive_rate(f_m, f_avg, f_min, cfg.pm_max, cfg.pm_min)
}

/// Draws two distinct individuals and returns the index of the fitter
/// (lower score). Ties go to the first draw.
pub fn binary_tournament<R: Rng + ?Sized>(pop: &[Individual], rng: &mut R) -> Result<usize> {
    if pop.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "tournament needs at least 2 individuals, got {}",
            pop.len()
        )));
    }
    let first = rng.random_range(0..pop.len());
    let mut second = rng.random_range(0..pop.len() - 1);
    if second >= first {
        second += 1;
    }
    Ok(if pop[second].score()? < pop[first].score()? {
        second
    } else {
        first
    })
}

/// With probability `pc`, swaps each gene between the parents with
/// probability one half. No repair.
pub fn uniform_crossover<R: Rng + ?Sized>(
    a: &FeatureMask,
    b: &FeatureMask,
    pc: f64,
    rng: &mut R,
) -> (FeatureMask, FeatureMask) {
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    if rng.random::<f64>() < pc {
        for i in 0..a.len() {
            if rng.random_bool(0.5) {
                c1.set(i, b.get(i));
                c2.set(i, a.get(i));
            }
        }
    }
    (c1, c2)
}

pub fn crossover<R: Rng + ?Sized>(
    a: &FeatureMask,
    b: &FeatureMask,
    pc: f64,
    cap: usize,
    rng: &mut R,
) -> (FeatureMask, FeatureMask) {
    let (c1, c2) = uniform_crossover(a, b, pc, rng);
    let c1 = repair(c1, cap, rng);
    let c2 = repair(c2, cap, rng);
    (c1, c2)
}

/// Flips each bit independently with probability `pm`. No repair.
pub fn flip_bits<R: Rng + ?Sized>(mask: &FeatureMask, pm: f64, rng: &mut R) -> FeatureMask {
    let mut out = mask.clone();
    for i in 0..out.len() {
        if rng.random::<f64>() < pm {
            out.flip(i);
        }
    }
    out
}

pub fn mutate<R: Rng + ?Sized>(mask: &FeatureMask, pm: f64, cap: usize, rng: &mut R) -> FeatureMask {
    repair(flip_bits(mask, pm, rng), cap, rng)
}

/// Brings the popcount into `[1, cap]`: an empty mask gains one random bit,
/// an oversized one loses random set bits.
pub fn repair<R: Rng + ?Sized>(mut mask: FeatureMask, cap: usize, rng: &mut R) -> FeatureMask {
    let cap = cap.max(1);
    let count = mask.count();
    if count == 0 && !mask.is_empty() {
        let i = rng.random_range(0..mask.len());
        mask.set(i, true);
    } else if count > cap {
        let mut on = mask.indices();
        on.shuffle(rng);
        for &i in &on[..count - cap] {
            mask.set(i, false);
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Stagnation,
    MaxGenerations,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_mask: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaTrace {
    pub generations: Vec<GenerationStats>,
    pub terminated_at: usize,
    pub reason: TerminationReason,
    pub evaluations: usize,
}

impl GaTrace {
    pub fn best_fitness(&self) -> impl Iterator<Item = f64> + '_ {
        self.generations.iter().map(|g| g.best_fitness)
    }
}

fn random_mask<R: Rng + ?Sized>(d: usize, cap: usize, rng: &mut R) -> FeatureMask {
    let k = rng.random_range(1..=cap);
    let chosen = index::sample(rng, d, k).into_vec();
    FeatureMask::from_indices(d, &chosen)
}

fn fittest(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate().skip(1) {
        if ind.fitness < pop[best].fitness {
            best = i;
        }
    }
    best
}

/// Runs the adaptive GA to termination and returns the best individual.
pub fn run(cache: &FeatureMetricsCache, cfg: &GaConfig) -> Result<(Individual, GaTrace)> {
    cfg.validate()?;
    let d = cache.n_features();
    let cap = cfg.cap(d);
    let n = cfg.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluations = 0usize;
    let mut evaluate = |mask: FeatureMask| {
        evaluations += 1;
        Individual::evaluate(cache, mask)
    };

    let mut pop = (0..n)
        .map(|_| evaluate(random_mask(d, cap, &mut rng)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = pop[fittest(&pop)].clone();
    let mut unchanged = 0usize;
    let mut generation = 0usize;
    let mut history = Vec::new();

    let reason = loop {
        let scores: Vec<f64> = pop.iter().map(|i| i.score()).collect::<Result<_>>()?;
        let f_min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let f_avg = scores.iter().sum::<f64>() / n as f64;
        history.push(GenerationStats {
            generation,
            best_fitness: best.score()?,
            mean_fitness: f_avg,
            best_mask: best.mask.indices(),
        });
        if unchanged >= cfg.stagnation_limit {
            break TerminationReason::Stagnation;
        }
        if generation >= cfg.max_generations {
            break TerminationReason::MaxGenerations;
        }

        let mut next = Vec::with_capacity(n);
        next.push(best.clone());
        while next.len() < n {
            let a = binary_tournament(&pop, &mut rng)?;
            let b = binary_tournament(&pop, &mut rng)?;
            let f_c = scores[a].min(scores[b]);
            let pc = adaptive_pc(f_c, f_avg, f_min, cfg);
            let (c1, c2) = crossover(&pop[a].mask, &pop[b].mask, pc, cap, &mut rng);
            for child in [c1, c2] {
                if next.len() == n {
                    break;
                }
                let f_m = evaluate(child)?;
                let pm = adaptive_pm(f_m.score()?, f_avg, f_min, cfg);
                let mutated = mutate(&f_m.mask, pm, cap, &mut rng);
                next.push(evaluate(mutated)?);
            }
        }
        pop = next;
        generation += 1;

        let candidate = &pop[fittest(&pop)];
        if candidate.fitness < best.fitness {
            best = candidate.clone();
            unchanged = 0;
        } else {
            unchanged += 1;
        }
    };

    log::info!(
        "search finished after {generation} generations ({reason:?}), best score {:.6} with {} features",
        best.score()?,
        best.mask.count()
    );
    Ok((
        best,
        GaTrace {
            generations: history,
            terminated_at: generation,
            reason,
            evaluations,
        },
    ))
}
