//! Reduction of continuous-time Markov chains whose rates depend on a scale
//! parameter `lambda` to the chain on their slow states.
//!
//! A model gives every off-diagonal rate as a rational function of `lambda`.
//! States whose total exit rate grows without bound are fast; the rest are
//! slow. As `lambda -> inf` the chain, observed on the slow states, converges
//! to a reduced chain whose generator is built from the limiting jump matrix.
//! The crate computes that reduced chain exactly where possible and provides
//! the numerical and Monte Carlo tools to compare it with the chain at finite
//! `lambda`.
//!
//! ```
//! use slowchain::{bundled, ParamCtmc, Reduction};
//!
//! let model = ParamCtmc::from_json(bundled::THREE_STATE).unwrap();
//! let reduction = Reduction::analyze(&model).unwrap();
//! assert_eq!(reduction.partition.slow_labels(), vec!["1", "2"]);
//! let gamma = reduction.chain.gamma.matrix();
//! assert!((gamma[(0, 1)] - 5.0).abs() < 1e-12);
//! ```

pub mod bundled;
pub mod classify;
pub mod dist;
mod error;
pub mod expm;
pub mod expr;
mod graph;
pub mod model;
pub mod numfmt;
pub mod reduce;
pub mod solve;
pub mod sp;
pub mod ssa;
pub mod synth;

pub use classify::{classify_states, limit_jump_matrix, LimitData, Partition};
pub use dist::{tv_distance, Distribution};
pub use error::{Error, Result};
pub use expr::{LimitValue, RationalExpr};
pub use model::{Generator, ParamCtmc, ValidationReport};
pub use reduce::{
    check_slow_reachability, collapse_distribution, first_passage_distribution, reduced_generator, reduced_irreducible,
    sufficient_condition, ReducedChain, Reduction,
};
pub use solve::{
    embed_slow_distribution, lambda_sweep, stationary_distribution, sup_tv_on_grid, transient_distribution,
    transient_trajectory, SupTv, SweepResult, TimeGrid, Trajectory,
};
pub use sp::{outer_expansion, sp_classify, sp_collapse, sp_decompose, sp_reduced_generator, SpDecomposition};
pub use ssa::{empirical_distribution, sample_first_passage, simulate_path, Empirical, FirstPassageSample, PathSample};
