//! Seeded random models for tests and benchmarks.
//!
//! Every model has a strongly connected support (a random Hamiltonian cycle
//! plus random chords). Fast states get a rate that grows with `lambda` on
//! their cycle edge, slow states a rate with a positive finite limit, so the
//! only assumption left to filter on is reachability of the slow set.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::expr::RationalExpr;
use crate::model::ParamCtmc;
use crate::reduce::Reduction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Largest state count; the count is drawn uniformly from `2..=max_states`.
    pub max_states: usize,
    /// Probability that a state is fast; at least one state is always slow.
    pub fast_prob: f64,
    /// Probability of each chord beyond the cycle.
    pub edge_prob: f64,
    /// Restrict every rate to `a*lambda + b` with `a, b >= 0`.
    pub affine: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            max_states: 8,
            fast_prob: 0.5,
            edge_prob: 0.35,
            affine: false,
        }
    }
}

impl SynthConfig {
    pub fn affine() -> Self {
        Self {
            affine: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy)]
enum Growth {
    Growing,
    Bounded,
    Any,
}

fn coef(rng: &mut Xoshiro256PlusPlus) -> String {
    let k: u32 = rng.random_range(1..=10);
    if k.is_multiple_of(2) {
        (k / 2).to_string()
    } else {
        format!("{k}/2")
    }
}

fn rate_text(rng: &mut Xoshiro256PlusPlus, growth: Growth, affine: bool) -> String {
    let (c, d, e) = (coef(rng), coef(rng), coef(rng));
    let growing = |rng: &mut Xoshiro256PlusPlus| -> String {
        match (affine, rng.random_range(0..3)) {
            (_, 0) => format!("{c}*lambda"),
            (true, _) | (false, 1) => format!("{c}*lambda + {d}"),
            _ => format!("({c}*lambda*lambda + {d})/(lambda + {e})"),
        }
    };
    let bounded = |rng: &mut Xoshiro256PlusPlus| -> String {
        match (affine, rng.random_range(0..3)) {
            (true, _) | (false, 0) => c.clone(),
            (false, 1) => format!("({c}*lambda + {d})/(lambda + {e})"),
            _ => format!("{c} + {d}/lambda"),
        }
    };
    match growth {
        Growth::Growing => growing(rng),
        Growth::Bounded => bounded(rng),
        Growth::Any => {
            if affine {
                if rng.random_bool(0.5) {
                    growing(rng)
                } else {
                    bounded(rng)
                }
            } else {
                match rng.random_range(0..4) {
                    0 | 1 => growing(rng),
                    2 => bounded(rng),
                    _ => format!("{c}/(lambda + {d})"),
                }
            }
        }
    }
}

/// One random model; it satisfies every assumption except, possibly,
/// reachability of the slow set from the fast states.
pub fn random_model(seed: u64, cfg: &SynthConfig) -> ParamCtmc {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let n = rng.random_range(2..=cfg.max_states.max(2));
    let mut fast: Vec<bool> = (0..n).map(|_| rng.random_bool(cfg.fast_prob)).collect();
    let anchor = rng.random_range(0..n);
    fast[anchor] = false;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut rates = Vec::new();
    let mut used = vec![vec![false; n]; n];
    for k in 0..n {
        let (i, j) = (order[k], order[(k + 1) % n]);
        let growth = if fast[i] { Growth::Growing } else { Growth::Bounded };
        used[i][j] = true;
        rates.push((i, j, rate_text(&mut rng, growth, cfg.affine)));
    }
    for (i, row) in used.iter().enumerate() {
        for (j, &taken) in row.iter().enumerate() {
            if i == j || taken || !rng.random_bool(cfg.edge_prob) {
                continue;
            }
            let growth = if fast[i] {
                Growth::Any
            } else if cfg.affine || rng.random_bool(0.7) {
                Growth::Bounded
            } else {
                // vanishing rates leave the limit exit rate positive via the cycle edge
                Growth::Any
            };
            let text = match growth {
                Growth::Any if !fast[i] => format!("{}/lambda", coef(&mut rng)),
                g => rate_text(&mut rng, g, cfg.affine),
            };
            rates.push((i, j, text));
        }
    }
    let states: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    let rates = rates.into_iter().map(|(i, j, text)| {
        let e = RationalExpr::parse(&text).expect("generated rate parses");
        (states[i].clone(), states[j].clone(), e)
    });
    ParamCtmc::new(format!("synth-{seed}"), states.clone(), rates).expect("generated model is well formed")
}

/// The first `count` models, scanning seeds from `seed` upwards, whose
/// reduction exists and satisfies `accept`.
pub fn sample_models<F>(seed: u64, count: usize, cfg: &SynthConfig, accept: F) -> Vec<(ParamCtmc, Reduction)>
where
    F: Fn(&ParamCtmc, &Reduction) -> bool,
{
    let mut out = Vec::with_capacity(count);
    let mut s = seed;
    while out.len() < count {
        let m = random_model(s, cfg);
        s = s.wrapping_add(1);
        if let Ok(r) = Reduction::analyze(&m) {
            if accept(&m, &r) {
                out.push((m, r));
            }
        }
    }
    out
}

/// A reducible random model for the given seed, scanning forward as needed.
pub fn reducible_model(seed: u64, cfg: &SynthConfig) -> (ParamCtmc, Reduction) {
    sample_models(seed, 1, cfg, |_, _| true).remove(0)
}
