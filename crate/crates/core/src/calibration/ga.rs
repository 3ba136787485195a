use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MigrationDirection {
    /// Subpopulation `n` sends to `n + 1`, the last wrapping to the first.
    Forward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub subpopulations: usize,
    pub tournament_size: usize,
    pub crossover_fraction: f64,
    pub crossover_ratio: f64,
    pub mutation_scale: f64,
    pub mutation_shrink: f64,
    pub migration_fraction: f64,
    pub migration_interval: usize,
    pub migration_direction: MigrationDirection,
    /// `None` means 100 generations per parameter.
    pub max_generations: Option<usize>,
    pub fitness_tolerance: f64,
    /// Window over which the best objective must improve by the tolerance.
    pub stall_generations: usize,
    /// Share of each subpopulation copied unchanged into the next generation
    /// (at least one individual).
    pub elite_fraction: f64,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 200,
            subpopulations: 4,
            tournament_size: 2,
            crossover_fraction: 0.8,
            crossover_ratio: 1.0,
            mutation_scale: 1.0,
            mutation_shrink: 1.0,
            migration_fraction: 0.2,
            migration_interval: 20,
            migration_direction: MigrationDirection::Forward,
            max_generations: None,
            fitness_tolerance: 1e-4,
            stall_generations: 50,
            elite_fraction: 0.05,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn generations_for(&self, n_params: usize) -> usize {
        self.max_generations.unwrap_or(100 * n_params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.subpopulations == 0 {
            return bad("need at least one subpopulation".into());
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be positive".into());
        }
        if self.population < 2 * self.tournament_size {
            return bad(format!(
                "population {} is smaller than twice the tournament size {}",
                self.population, self.tournament_size
            ));
        }
        if self.population / self.subpopulations < self.tournament_size {
            return bad(format!(
                "{} subpopulations leave fewer than {} individuals each",
                self.subpopulations, self.tournament_size
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_fraction) {
            return bad(format!("crossover fraction must lie in [0, 1], got {}", self.crossover_fraction));
        }
        if !(0.0..=1.0).contains(&self.migration_fraction) {
            return bad(format!("migration fraction must lie in [0, 1], got {}", self.migration_fraction));
        }
        if !(0.0..1.0).contains(&self.elite_fraction) {
            return bad(format!("elite fraction must lie in [0, 1), got {}", self.elite_fraction));
        }
        if !(self.fitness_tolerance > 0.0) {
            return bad(format!("fitness tolerance must be positive, got {}", self.fitness_tolerance));
        }
        if !(self.mutation_scale >= 0.0 && self.mutation_shrink >= 0.0 && self.crossover_ratio >= 0.0) {
            return bad("mutation scale, shrink and crossover ratio must be non-negative".into());
        }
        if self.migration_interval == 0 {
            return bad("migration interval must be positive".into());
        }
        Ok(())
    }
}

/// `child_i = p1_i + r_i ratio (p2_i - p1_i)` with a fresh `r_i ~ U[0, 1]` per gene.
pub fn intermediate_crossover<R: Rng + ?Sized>(p1: &[f64], p2: &[f64], ratio: f64, rng: &mut R) -> Vec<f64> {
    assert_eq!(p1.len(), p2.len(), "parents differ in length");
    p1.iter().zip(p2).map(|(a, b)| a + rng.random::<f64>() * ratio * (b - a)).collect()
}

/// Add zero-mean Gaussian noise with standard deviation
/// `scale (1 - shrink g / G) (hi - lo)` to every gene, then clamp to bounds.
pub fn gaussian_mutation<R: Rng + ?Sized>(
    individual: &[f64],
    generation: usize,
    max_generations: usize,
    cfg: &GaConfig,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> Vec<f64> {
    let progress = if max_generations == 0 { 1.0 } else { generation as f64 / max_generations as f64 };
    let sd = (cfg.mutation_scale * (1.0 - cfg.mutation_shrink * progress)).max(0.0);
    individual
        .iter()
        .zip(bounds)
        .map(|(&x, &(lo, hi))| {
            let s = sd * (hi - lo);
            if s > 0.0 {
                let n = Normal::new(0.0, s).expect("positive finite sd");
                (x + n.sample(rng)).clamp(lo, hi)
            } else {
                x.clamp(lo, hi)
            }
        })
        .collect()
}

/// Index of the fittest (lowest) of `size` distinct, uniformly drawn
/// candidates, the lower index winning ties.
pub fn tournament_select<R: Rng + ?Sized>(fitnesses: &[f64], size: usize, rng: &mut R) -> usize {
    assert!(size > 0 && size <= fitnesses.len(), "tournament size {size} for {} individuals", fitnesses.len());
    sample(rng, fitnesses.len(), size)
        .into_iter()
        .min_by(|&a, &b| fitnesses[a].total_cmp(&fitnesses[b]).then(a.cmp(&b)))
        .expect("non-empty tournament")
}

fn sorted_indices(fitness: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
    idx
}

/// Forward migration at generations that are multiples of the interval: the
/// best `round(fraction n)` of subpopulation `k` replace the worst of `k + 1`.
/// Emigrants are chosen before any replacement happens.
pub fn migrate(subpops: &mut [Vec<Vec<f64>>], fitnesses: &mut [Vec<f64>], cfg: &GaConfig, generation: usize) {
    let n_sub = subpops.len();
    if n_sub < 2 || cfg.migration_fraction == 0.0 || generation % cfg.migration_interval != 0 {
        return;
    }
    let emigrants: Vec<Vec<(Vec<f64>, f64)>> = (0..n_sub)
        .map(|k| {
            let count = (cfg.migration_fraction * subpops[k].len() as f64).round() as usize;
            sorted_indices(&fitnesses[k]).into_iter().take(count).map(|i| (subpops[k][i].clone(), fitnesses[k][i])).collect()
        })
        .collect();
    for (k, group) in emigrants.into_iter().enumerate() {
        let target = (k + 1) % n_sub;
        let worst: Vec<usize> = sorted_indices(&fitnesses[target]).into_iter().rev().take(group.len()).collect();
        for (slot, (ind, fit)) in worst.into_iter().zip(group) {
            subpops[target][slot] = ind;
            fitnesses[target][slot] = fit;
        }
    }
}

/// Per-generation record of the whole population.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Vec<f64>,
    pub objective: f64,
    pub history: Vec<GenerationStats>,
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for one individual, whatever order it is processed in.
fn individual_rng(seed: u64, generation: usize, sub: usize, index: usize) -> ChaCha8Rng {
    let s = mix(mix(mix(seed) ^ generation as u64) ^ ((sub as u64) << 32 | index as u64));
    ChaCha8Rng::seed_from_u64(s)
}

fn evaluate<F>(individuals: &[Vec<f64>], objective: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    individuals
        .par_iter()
        .map(|p| match objective(p) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        })
        .collect()
}

fn subpop_sizes(cfg: &GaConfig) -> Vec<usize> {
    let base = cfg.population / cfg.subpopulations;
    let extra = cfg.population % cfg.subpopulations;
    (0..cfg.subpopulations).map(|k| base + usize::from(k < extra)).collect()
}

/// Minimise `objective` over the box `bounds`. Failed or non-finite
/// evaluations count as infinitely bad.
pub fn ga_run<F>(objective: F, bounds: &[(f64, f64)], cfg: &GaConfig) -> Result<GaOutcome>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if bounds.is_empty() {
        return Err(Error::InvalidInput("no parameters to optimise".into()));
    }
    if let Some((i, b)) = bounds.iter().enumerate().find(|(_, b)| !(b.0 <= b.1 && b.0.is_finite() && b.1.is_finite())) {
        return Err(Error::InvalidInput(format!("bounds of parameter {i} are invalid: {b:?}")));
    }
    let max_gen = cfg.generations_for(bounds.len());
    let sizes = subpop_sizes(cfg);

    let mut subpops: Vec<Vec<Vec<f64>>> = sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            (0..n)
                .map(|i| {
                    let mut rng = individual_rng(cfg.rng_seed, 0, k, i);
                    bounds.iter().map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo }).collect()
                })
                .collect()
        })
        .collect();
    let mut fits: Vec<Vec<f64>> = subpops.iter().map(|s| evaluate(s, &objective)).collect();
    if fits.iter().flatten().all(|f| f.is_infinite()) {
        return Err(Error::InfeasiblePopulation);
    }

    let mut history = vec![stats(0, &subpops, &fits)];
    for g in 1..=max_gen {
        let mut next: Vec<Vec<Vec<f64>>> = Vec::with_capacity(subpops.len());
        for (k, (pop, fit)) in subpops.iter().zip(&fits).enumerate() {
            let n = pop.len();
            let n_elite = ((cfg.elite_fraction * n as f64).round() as usize).clamp(1, n);
            let n_cross = (cfg.crossover_fraction * (n - n_elite) as f64).round() as usize;
            let order = sorted_indices(fit);
            let mut children: Vec<Vec<f64>> = order[..n_elite].iter().map(|&i| pop[i].clone()).collect();
            let bred: Vec<Vec<f64>> = (n_elite..n)
                .into_par_iter()
                .map(|slot| {
                    let mut rng = individual_rng(cfg.rng_seed, g, k, slot);
                    if slot < n_elite + n_cross {
                        let a = tournament_select(fit, cfg.tournament_size, &mut rng);
                        let b = tournament_select(fit, cfg.tournament_size, &mut rng);
                        let child = intermediate_crossover(&pop[a], &pop[b], cfg.crossover_ratio, &mut rng);
                        child.iter().zip(bounds).map(|(&x, &(lo, hi))| x.clamp(lo, hi)).collect()
                    } else {
                        let a = tournament_select(fit, cfg.tournament_size, &mut rng);
                        gaussian_mutation(&pop[a], g, max_gen, cfg, bounds, &mut rng)
                    }
                })
                .collect();
            children.extend(bred);
            next.push(children);
        }
        let mut next_fits: Vec<Vec<f64>> = next
            .iter()
            .zip(&fits)
            .zip(&sizes)
            .map(|((pop, old), &n)| {
                let n_elite = ((cfg.elite_fraction * n as f64).round() as usize).clamp(1, n);
                let order = sorted_indices(old);
                let mut f: Vec<f64> = order[..n_elite].iter().map(|&i| old[i]).collect();
                f.extend(evaluate(&pop[n_elite..], &objective));
                f
            })
            .collect();
        migrate(&mut next, &mut next_fits, cfg, g);
        subpops = next;
        fits = next_fits;
        history.push(stats(g, &subpops, &fits));
        if g >= cfg.stall_generations {
            let then = history[g - cfg.stall_generations].best;
            let now = history[g].best;
            if then - now < cfg.fitness_tolerance {
                break;
            }
        }
    }
    let last = history.last().expect("non-empty history");
    Ok(GaOutcome { best: last.best_params.clone(), objective: last.best, history })
}

fn stats(generation: usize, subpops: &[Vec<Vec<f64>>], fits: &[Vec<f64>]) -> GenerationStats {
    let mut best = f64::INFINITY;
    let mut best_params = Vec::new();
    let (mut sum, mut count) = (0.0, 0usize);
    for (pop, fit) in subpops.iter().zip(fits) {
        for (p, &f) in pop.iter().zip(fit) {
            if f < best {
                best = f;
                best_params.clone_from(p);
            }
            if f.is_finite() {
                sum += f;
                count += 1;
            }
        }
    }
    let mean = if count > 0 { sum / count as f64 } else { f64::INFINITY };
    GenerationStats { generation, best, mean, best_params }
}
