//! Exact path simulation (Gillespie's direct method) used as an independent
//! Monte Carlo check of the deterministic solvers.
//!
//! # Random numbers
//!
//! Every path owns its generator: path `k` of a run with seed `s` uses
//! xoshiro256++ seeded through SplitMix64 with `s ^ k`. Uniforms are
//! `(x >> 11) * 2^-53` and exponential holding times use the inverse CDF
//! `-ln(1 - U) / q`. Results therefore depend only on the inputs, not on
//! thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::Partition;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::model::{Generator, ParamCtmc};
use crate::reduce::first_passage_distribution;

pub const DEFAULT_JUMP_BUDGET: u64 = 1_000_000;

/// Minimum number of paths accepted by [`empirical_distribution`].
pub const MIN_PATHS: u64 = 100;

/// Random stream of a single path.
#[derive(Debug, Clone)]
pub struct PathRng(Xoshiro256PlusPlus);

impl PathRng {
    pub fn for_path(seed: u64, path: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed ^ path))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential with the given rate, by inversion.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -(1.0 - self.uniform()).ln() / rate
    }
}

/// Cumulative weights over candidate targets.
#[derive(Debug, Clone)]
struct Categorical {
    targets: Vec<usize>,
    cumulative: Vec<f64>,
}

impl Categorical {
    fn new(weights: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut targets = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (i, w) in weights {
            if w > 0.0 {
                acc += w;
                targets.push(i);
                cumulative.push(acc);
            }
        }
        for c in cumulative.iter_mut() {
            *c /= acc;
        }
        Self { targets, cumulative }
    }

    fn sample(&self, u: f64) -> usize {
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.targets[k.min(self.targets.len() - 1)]
    }
}

/// Exit rates and jump distributions of a generator.
#[derive(Debug, Clone)]
struct JumpTable {
    exit: Vec<f64>,
    jumps: Vec<Option<Categorical>>,
}

impl JumpTable {
    fn new(g: &Generator) -> Self {
        let n = g.len();
        let m = g.matrix();
        let exit: Vec<f64> = (0..n).map(|i| g.exit_rate(i).max(0.0)).collect();
        let jumps = (0..n)
            .map(|i| {
                if exit[i] > 0.0 {
                    Some(Categorical::new((0..n).filter(|&j| j != i).map(|j| (j, m[(i, j)]))))
                } else {
                    None
                }
            })
            .collect();
        Self { exit, jumps }
    }

    /// Holding time in `state` and the next state; `None` when absorbing.
    fn step(&self, state: usize, rng: &mut PathRng) -> Option<(f64, usize)> {
        let jump = self.jumps[state].as_ref()?;
        let hold = rng.exponential(self.exit[state]);
        Some((hold, jump.sample(rng.uniform())))
    }
}

fn initial_sampler(pi: &Distribution) -> Categorical {
    Categorical::new(pi.probs().iter().copied().enumerate())
}

/// One simulated path up to a horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub labels: Vec<String>,
    /// `states[0]` is the initial state, `states[k]` the state after jump `k`.
    pub states: Vec<usize>,
    /// Jump times `J_1 < J_2 < ...`, all at most `horizon`.
    pub jump_times: Vec<f64>,
    pub horizon: f64,
    pub seed: u64,
    /// The path reached a state with zero exit rate and stayed there.
    pub absorbed: bool,
}

impl PathSample {
    pub fn state_at(&self, t: f64) -> usize {
        let k = self.jump_times.partition_point(|&j| j <= t);
        self.states[k]
    }

    /// Holding times of all completed visits.
    pub fn holding_times(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.jump_times
            .iter()
            .map(|&j| {
                let h = j - prev;
                prev = j;
                h
            })
            .collect()
    }
}

fn check_labels(g: &Generator, pi: &Distribution) -> Result<()> {
    if g.labels() != pi.labels() {
        return Err(Error::LabelMismatch);
    }
    Ok(())
}

/// Simulates one path on `[0, horizon]`, stopping before the first jump
/// after the horizon.
pub fn simulate_path(g: &Generator, pi: &Distribution, horizon: f64, seed: u64) -> Result<PathSample> {
    check_labels(g, pi)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let table = JumpTable::new(g);
    let mut rng = PathRng::for_path(seed, 0);
    let mut state = initial_sampler(pi).sample(rng.uniform());
    let mut states = vec![state];
    let mut jump_times = Vec::new();
    let mut clock = 0.0;
    let mut absorbed = false;
    loop {
        match table.step(state, &mut rng) {
            None => {
                absorbed = true;
                break;
            }
            Some((hold, next)) => {
                clock += hold;
                if clock > horizon {
                    break;
                }
                jump_times.push(clock);
                states.push(next);
                state = next;
            }
        }
    }
    Ok(PathSample {
        labels: g.labels().to_vec(),
        states,
        jump_times,
        horizon,
        seed,
        absorbed,
    })
}

fn state_at_time(table: &JumpTable, init: &Categorical, t: f64, rng: &mut PathRng) -> usize {
    let mut state = init.sample(rng.uniform());
    let mut clock = 0.0;
    while let Some((hold, next)) = table.step(state, rng) {
        clock += hold;
        if clock > t {
            break;
        }
        state = next;
    }
    state
}

/// Monte Carlo estimate of a distribution with per-entry standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Empirical {
    pub dist: Distribution,
    /// `sqrt(p (1 - p) / n)` for each entry.
    pub stderr: Vec<f64>,
    pub n_paths: u64,
}

impl Empirical {
    fn from_counts(labels: Vec<String>, counts: &[u64], n_paths: u64) -> Result<Self> {
        let n = n_paths as f64;
        let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        let stderr = probs.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
        Ok(Self {
            dist: Distribution::normalized(labels, probs)?,
            stderr,
            n_paths,
        })
    }
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Fraction of `n_paths` independent paths found in each state at time `t`.
pub fn empirical_distribution(g: &Generator, pi: &Distribution, t: f64, n_paths: u64, seed: u64) -> Result<Empirical> {
    check_labels(g, pi)?;
    if n_paths < MIN_PATHS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_PATHS} paths, got {n_paths}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let table = JumpTable::new(g);
    let init = initial_sampler(pi);
    let n = g.len();
    let counts = (0..n_paths)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, k| {
                let mut rng = PathRng::for_path(seed, k);
                acc[state_at_time(&table, &init, t, &mut rng)] += 1;
                acc
            },
        )
        .reduce(|| vec![0u64; n], add_counts);
    Empirical::from_counts(g.labels().to_vec(), &counts, n_paths)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

/// Levels reported for the first-passage time.
pub const PASSAGE_QUANTILES: [f64; 3] = [0.5, 0.9, 0.99];

/// Simulated entry into the slow set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstPassageSample {
    /// Empirical law of the state in which the slow set is entered.
    pub hitting: Empirical,
    /// Nearest-rank quantiles of the entrance time.
    pub quantiles: Vec<Quantile>,
}

impl FirstPassageSample {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles.iter().find(|q| q.level == level).map(|q| q.value)
    }
}

fn nearest_rank(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let rank = ((level * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Simulates the chain at `lambda` from `pi` until it first enters the slow
/// states of `p`; paths that start there stop at time zero.
pub fn sample_first_passage(
    m: &ParamCtmc,
    lambda: f64,
    pi: &Distribution,
    p: &Partition,
    n_paths: u64,
    seed: u64,
    jump_budget: u64,
) -> Result<FirstPassageSample> {
    if p.labels() != m.states() || pi.labels() != m.states() {
        return Err(Error::LabelMismatch);
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    // refuses when some fast states cannot reach the slow set at this lambda
    first_passage_distribution(m, lambda, pi)?;
    let g = m.generator_at(lambda)?;
    let table = JumpTable::new(&g);
    let init = initial_sampler(pi);
    let mut slow_pos = vec![None; m.len()];
    for (k, &i) in p.slow().iter().enumerate() {
        slow_pos[i] = Some(k);
    }
    let outcomes = (0..n_paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = PathRng::for_path(seed, k);
            let mut state = init.sample(rng.uniform());
            let mut clock = 0.0;
            let mut jumps = 0u64;
            while slow_pos[state].is_none() {
                if jumps >= jump_budget {
                    return Err(Error::PathBudgetExceeded {
                        path: k,
                        budget: jump_budget,
                    });
                }
                let (hold, next) = table.step(state, &mut rng).ok_or(Error::PathBudgetExceeded {
                    path: k,
                    budget: jump_budget,
                })?;
                clock += hold;
                state = next;
                jumps += 1;
            }
            Ok((clock, slow_pos[state].expect("loop exits on a slow state")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut counts = vec![0u64; p.n_slow()];
    let mut times: Vec<f64> = Vec::with_capacity(outcomes.len());
    for (t, k) in outcomes {
        counts[k] += 1;
        times.push(t);
    }
    times.sort_by(f64::total_cmp);
    Ok(FirstPassageSample {
        hitting: Empirical::from_counts(p.slow_labels(), &counts, n_paths)?,
        quantiles: PASSAGE_QUANTILES
            .iter()
            .map(|&level| Quantile {
                level,
                value: nearest_rank(&times, level),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::classify::classify_states;
    use nalgebra::DMatrix;

    fn two_state(a: f64, b: f64) -> Generator {
        Generator::new(
            vec!["x".into(), "y".into()],
            DMatrix::from_row_slice(2, 2, &[-a, a, b, -b]),
        )
        .unwrap()
    }

    #[test]
    fn zero_generator_never_moves() {
        let g = Generator::new(vec!["3".into(), "4".into()], DMatrix::zeros(2, 2)).unwrap();
        let pi = Distribution::point_mass(g.labels().to_vec(), "4").unwrap();
        let path = simulate_path(&g, &pi, 100.0, 7).unwrap();
        assert!(path.absorbed);
        assert_eq!(path.states, vec![1]);
        assert!(path.jump_times.is_empty());

        let pi = Distribution::new(g.labels().to_vec(), vec![0.25, 0.75]).unwrap();
        let e = empirical_distribution(&g, &pi, 3.0, 1000, 1).unwrap();
        let e0 = empirical_distribution(&g, &pi, 0.0, 1000, 1).unwrap();
        assert_eq!(e.dist, e0.dist);
    }

    #[test]
    fn paths_are_reproducible() {
        let g = two_state(1.0, 1.0);
        let pi = Distribution::point_mass(g.labels().to_vec(), "x").unwrap();
        let a = simulate_path(&g, &pi, 50.0, 42).unwrap();
        let b = simulate_path(&g, &pi, 50.0, 42).unwrap();
        assert_eq!(a, b);
        assert!(!a.jump_times.is_empty());
        assert!(a.jump_times.windows(2).all(|w| w[0] < w[1]));
        assert!(a.jump_times.iter().all(|&t| t <= 50.0));
        assert!(a.holding_times().iter().all(|&h| h > 0.0));
        let c = simulate_path(&g, &pi, 50.0, 43).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.state_at(0.0), 0);
    }

    #[test]
    fn counterexample_first_jump_goes_to_three() {
        let m = ParamCtmc::from_json(bundled::COUNTEREXAMPLE).unwrap();
        let g = m.generator_at(100.0).unwrap();
        let pi = Distribution::point_mass(m.states().to_vec(), "1").unwrap();
        let n = 4000;
        let to_three = (0..n)
            .filter(|&s| {
                let path = simulate_path(&g, &pi, 10.0, s).unwrap();
                path.states.get(1) == Some(&2)
            })
            .count();
        let p = 100.0 / 101.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((to_three as f64 / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn empirical_matches_two_state_solution() {
        let g = two_state(2.0, 1.0);
        let pi = Distribution::point_mass(g.labels().to_vec(), "x").unwrap();
        let e = empirical_distribution(&g, &pi, 1.0, 100_000, 2024).unwrap();
        let exact = crate::solve::transient_distribution(&g, &pi, 1.0).unwrap();
        for k in 0..2 {
            assert!((e.dist.probs()[k] - exact.probs()[k]).abs() <= 4.0 * e.stderr[k]);
        }
    }

    #[test]
    fn empirical_at_time_zero_matches_initial() {
        let g = two_state(2.0, 1.0);
        let pi = Distribution::new(g.labels().to_vec(), vec![0.3, 0.7]).unwrap();
        let e = empirical_distribution(&g, &pi, 0.0, 10_000, 5).unwrap();
        assert!((e.dist.probs()[0] - 0.3).abs() <= 4.0 * e.stderr[0]);
        assert!(empirical_distribution(&g, &pi, 0.0, 99, 5).is_err());
    }

    #[test]
    fn exponential_holding_mean() {
        let q = 2.5;
        let n = 100_000u64;
        let mut rng = PathRng::for_path(99, 0);
        let mean = (0..n).map(|_| rng.exponential(q)).sum::<f64>() / n as f64;
        assert!((mean - 1.0 / q).abs() <= 4.0 / q / (n as f64).sqrt());
    }

    #[test]
    fn first_passage_from_slow_start_is_immediate() {
        let m = ParamCtmc::from_json(bundled::COUNTEREXAMPLE).unwrap();
        let p = classify_states(&m).unwrap();
        let pi = Distribution::new(m.states().to_vec(), vec![0.0, 0.0, 0.4, 0.6]).unwrap();
        let s = sample_first_passage(&m, 10.0, &pi, &p, 1000, 3, DEFAULT_JUMP_BUDGET).unwrap();
        assert!(s.quantiles.iter().all(|q| q.value == 0.0));
        assert!((s.hitting.dist.probs()[0] - 0.4).abs() <= 4.0 * s.hitting.stderr[0]);
    }

    #[test]
    fn jump_budget_is_enforced() {
        let m = ParamCtmc::from_json(bundled::COUNTEREXAMPLE).unwrap();
        let p = classify_states(&m).unwrap();
        let pi = Distribution::point_mass(m.states().to_vec(), "1").unwrap();
        // at lambda = 0.01 a fast state bounces many times before leaving
        let r = sample_first_passage(&m, 0.01, &pi, &p, 200, 3, 1);
        assert!(matches!(r, Err(Error::PathBudgetExceeded { .. })));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = ParamCtmc::from_json(bundled::MWC).unwrap();
        let g = m.generator_at(10.0).unwrap();
        let pi = Distribution::uniform(m.states().to_vec());
        let a = empirical_distribution(&g, &pi, 2.0, 5000, 11).unwrap();
        let b = empirical_distribution(&g, &pi, 2.0, 5000, 11).unwrap();
        assert_eq!(a, b);
        let p = classify_states(&m).unwrap();
        let x = sample_first_passage(&m, 10.0, &pi, &p, 5000, 11, DEFAULT_JUMP_BUDGET).unwrap();
        let y = sample_first_passage(&m, 10.0, &pi, &p, 5000, 11, DEFAULT_JUMP_BUDGET).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.5), 50.0);
        assert_eq!(nearest_rank(&v, 0.9), 90.0);
        assert_eq!(nearest_rank(&v, 0.99), 99.0);
        assert_eq!(nearest_rank(&[3.0], 0.5), 3.0);
    }
}
