//! The reduced chain on the slow states and the distributions it starts from.
//!
//! With the limiting jump matrix split into blocks over fast states `A` and
//! slow states `B`, the reduced generator is
//!
//! ```text
//! Gamma = Q_BB + Q_BA (I - Omega_AA)^{-1} Omega_AB
//! ```
//!
//! and a distribution `pi = (pi_A, pi_B)` collapses onto `B` as
//! `pi_B + pi_A (I - Omega_AA)^{-1} Omega_AB`. Both only exist when every fast
//! state can reach `B` in the jump chain.

use nalgebra::DMatrix;

use crate::classify::{classify_states, limit_jump_matrix, LimitData, Partition};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::graph;
use crate::model::{Generator, ParamCtmc};

const DIST_TOLERANCE: f64 = 1e-10;

/// Generator of the limit chain on the slow states.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedChain {
    pub labels: Vec<String>,
    pub gamma: Generator,
}

/// Fast states (block indices `< n_fast`) that belong to a closed class of
/// `omega`'s support digraph lying entirely inside the fast block.
fn trapped_fast_states(omega: &DMatrix<f64>, n_fast: usize) -> Vec<usize> {
    graph::closed_classes(&graph::support_digraph(omega))
        .into_iter()
        .filter(|class| class.iter().all(|&v| v < n_fast))
        .flatten()
        .collect()
}

fn undefined(p: &Partition, trapped: &[usize]) -> Error {
    let perm = p.perm();
    Error::ReducedChainUndefined(trapped.iter().map(|&k| p.labels()[perm[k]].clone()).collect())
}

/// True iff every fast state reaches the slow set in the limiting jump chain.
pub fn check_slow_reachability(ld: &LimitData, p: &Partition) -> bool {
    trapped_fast_states(&ld.omega, p.n_fast()).is_empty()
}

/// Solves `(I - omega_aa) X = rhs` by partially pivoted LU.
fn solve_fundamental(omega_aa: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = omega_aa.nrows();
    let lhs = DMatrix::identity(n, n) - omega_aa;
    let x = lhs.lu().solve(rhs).ok_or(Error::SingularSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

pub fn reduced_generator(ld: &LimitData, p: &Partition) -> Result<ReducedChain> {
    let trapped = trapped_fast_states(&ld.omega, p.n_fast());
    if !trapped.is_empty() {
        return Err(undefined(p, &trapped));
    }
    let gamma = if p.n_fast() == 0 {
        ld.q_bb.clone()
    } else {
        let absorption = solve_fundamental(&ld.omega_aa, &ld.omega_ab)?;
        &ld.q_bb + &ld.q_ba * absorption
    };
    let labels = p.slow_labels();
    Ok(ReducedChain {
        gamma: Generator::new(labels.clone(), gamma)?,
        labels,
    })
}

/// `pi_B + pi_A (I - W_AA)^{-1} W_AB` for a jump matrix `w` in block order.
fn passage_distribution(w: &DMatrix<f64>, p: &Partition, pi: &Distribution) -> Result<Distribution> {
    if pi.labels() != p.labels() {
        return Err(Error::LabelMismatch);
    }
    let trapped = trapped_fast_states(w, p.n_fast());
    if !trapped.is_empty() {
        return Err(undefined(p, &trapped));
    }
    let na = p.n_fast();
    let nb = p.n_slow();
    let probs = pi.probs();
    let mut out: Vec<f64> = p.slow().iter().map(|&i| probs[i]).collect();
    if na > 0 {
        let pi_a = DMatrix::from_iterator(na, 1, p.fast().iter().map(|&i| probs[i]));
        let w_aa = w.view((0, 0), (na, na)).into_owned();
        let w_ab = w.view((0, na), (na, nb));
        // y^T = pi_A (I - W_AA)^{-1}  <=>  (I - W_AA)^T y = pi_A^T
        let y = solve_fundamental(&w_aa.transpose(), &pi_a)?;
        let forwarded = w_ab.transpose() * y;
        for (o, f) in out.iter_mut().zip(forwarded.iter()) {
            *o += f;
        }
    }
    Distribution::from_computed(p.slow_labels(), out, DIST_TOLERANCE)
}

/// Limit of the first-passage distribution of the slow set.
pub fn collapse_distribution(pi: &Distribution, ld: &LimitData, p: &Partition) -> Result<Distribution> {
    passage_distribution(&ld.omega, p, pi)
}

/// Exact distribution of the state in which the chain at `lambda` first
/// enters the slow set, starting from `pi`.
pub fn first_passage_distribution(m: &ParamCtmc, lambda: f64, pi: &Distribution) -> Result<Distribution> {
    let p = classify_states(m)?;
    let g = m.generator_at(lambda)?;
    let w = p.to_block_order(&g.jump_matrix());
    passage_distribution(&w, &p, pi)
}

/// Whether the reduced chain is irreducible. A single slow state counts as
/// irreducible.
pub fn reduced_irreducible(rc: &ReducedChain) -> bool {
    rc.gamma.is_irreducible()
}

/// Strong connectivity of the slow-to-slow limit rates; implies
/// [`reduced_irreducible`].
pub fn sufficient_condition(ld: &LimitData) -> bool {
    graph::is_strongly_connected(&graph::support_digraph(&ld.q_bb))
}

/// Everything derived from a model's limit structure.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub partition: Partition,
    pub limits: LimitData,
    pub chain: ReducedChain,
}

impl Reduction {
    pub fn analyze(m: &ParamCtmc) -> Result<Self> {
        let partition = classify_states(m)?;
        let limits = limit_jump_matrix(m, &partition)?;
        let chain = reduced_generator(&limits, &partition)?;
        Ok(Self {
            partition,
            limits,
            chain,
        })
    }

    /// Initial distribution of the reduced chain matching `pi` on the full
    /// state space.
    pub fn collapse(&self, pi: &Distribution) -> Result<Distribution> {
        collapse_distribution(pi, &self.limits, &self.partition)
    }

    pub fn is_irreducible(&self) -> bool {
        reduced_irreducible(&self.chain)
    }
}
