//! Fixtures shared by the benchmarks.

use slowchain::synth::{self, SynthConfig};
use slowchain::{bundled, Distribution, ParamCtmc, Reduction};

pub fn three_state() -> ParamCtmc {
    ParamCtmc::from_json(bundled::THREE_STATE).expect("bundled model loads")
}

pub fn counterexample() -> ParamCtmc {
    ParamCtmc::from_json(bundled::COUNTEREXAMPLE).expect("bundled model loads")
}

/// Reducible random models with exactly `n` states.
pub fn random_models(n: usize, count: usize) -> Vec<(ParamCtmc, Reduction)> {
    let cfg = SynthConfig {
        max_states: n,
        ..SynthConfig::default()
    };
    synth::sample_models(0, count, &cfg, |m, _| m.len() == n)
}

pub fn point(m: &ParamCtmc, state: &str) -> Distribution {
    Distribution::point_mass(m.states().to_vec(), state).expect("state exists")
}
