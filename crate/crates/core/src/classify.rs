//! Fast/slow classification by exact limits and the limiting jump matrix.

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::LimitValue;
use crate::model::ParamCtmc;

/// Split of the state space into fast states `A` (exit rate tends to
/// infinity) and slow states `B`. Indices refer to the model's state order;
/// both lists are ascending. The block order used for matrices is all of `A`
/// followed by all of `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    labels: Vec<String>,
    fast: Vec<usize>,
    slow: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<String>, fast: Vec<usize>, slow: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        let mut seen = vec![false; n];
        for &i in fast.iter().chain(&slow) {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(
                    "partition is not a split of the state space".into(),
                ));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("partition does not cover every state".into()));
        }
        if slow.is_empty() {
            return Err(Error::EmptySlowSpace);
        }
        let mut fast = fast;
        let mut slow = slow;
        fast.sort_unstable();
        slow.sort_unstable();
        Ok(Self { labels, fast, slow })
    }

    /// Original state labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn fast(&self) -> &[usize] {
        &self.fast
    }

    pub fn slow(&self) -> &[usize] {
        &self.slow
    }

    pub fn fast_labels(&self) -> Vec<String> {
        self.fast.iter().map(|&i| self.labels[i].clone()).collect()
    }

    pub fn slow_labels(&self) -> Vec<String> {
        self.slow.iter().map(|&i| self.labels[i].clone()).collect()
    }

    pub fn n_fast(&self) -> usize {
        self.fast.len()
    }

    pub fn n_slow(&self) -> usize {
        self.slow.len()
    }

    /// `perm()[k]` is the original index of the state in block position `k`.
    pub fn perm(&self) -> Vec<usize> {
        self.fast.iter().chain(&self.slow).copied().collect()
    }

    /// Labels in block order.
    pub fn block_labels(&self) -> Vec<String> {
        self.perm().into_iter().map(|i| self.labels[i].clone()).collect()
    }

    /// Reorders a square matrix given in original state order into block
    /// order.
    pub fn to_block_order(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let perm = self.perm();
        DMatrix::from_fn(perm.len(), perm.len(), |r, c| m[(perm[r], perm[c])])
    }
}

/// Limits as `lambda -> inf` of the jump matrix and the slow rows of the
/// generator, all in block order.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitData {
    pub omega: DMatrix<f64>,
    pub omega_aa: DMatrix<f64>,
    pub omega_ab: DMatrix<f64>,
    pub q_ba: DMatrix<f64>,
    pub q_bb: DMatrix<f64>,
}

/// Classifies each state by the exact limit of its exit rate.
pub fn classify_states(m: &ParamCtmc) -> Result<Partition> {
    let mut fast = Vec::new();
    let mut slow = Vec::new();
    let mut zero_exit = Vec::new();
    for i in 0..m.len() {
        match m.exit_rate(i).limit_at_infinity()? {
            LimitValue::PlusInfinity => fast.push(i),
            LimitValue::Finite(q) => {
                if q.is_zero() {
                    zero_exit.push(m.states()[i].clone());
                }
                slow.push(i);
            }
        }
    }
    if slow.is_empty() {
        return Err(Error::EmptySlowSpace);
    }
    if !zero_exit.is_empty() {
        return Err(Error::ZeroSlowExitRate(zero_exit));
    }
    Partition::new(m.states().to_vec(), fast, slow)
}

/// Computes `omega_ij = lim q_ij / q_i` and the slow-row limits exactly and
/// converts them to floating point.
pub fn limit_jump_matrix(m: &ParamCtmc, p: &Partition) -> Result<LimitData> {
    let perm = p.perm();
    let n = perm.len();
    let na = p.n_fast();
    let nb = p.n_slow();
    let mut omega = DMatrix::zeros(n, n);
    let mut q_slow = DMatrix::zeros(nb, n);
    for (r, &i) in perm.iter().enumerate() {
        let exit = m.exit_rate(i);
        let is_slow = r >= na;
        for (c, &j) in perm.iter().enumerate() {
            if i == j {
                continue;
            }
            let Some(rate) = m.rate(i, j) else { continue };
            let ratio = rate.checked_div(&exit)?;
            omega[(r, c)] = ratio.limit_at_infinity()?.to_f64();
            if is_slow {
                let lim = rate.limit_at_infinity()?;
                if lim.is_infinite() {
                    return Err(Error::InvalidArgument(format!(
                        "slow state `{}` has an unbounded rate",
                        m.states()[i]
                    )));
                }
                q_slow[(r - na, c)] = lim.to_f64();
            }
        }
        if is_slow {
            q_slow[(r - na, r)] = -exit.limit_at_infinity()?.to_f64();
        }
    }
    Ok(LimitData {
        omega_aa: omega.view((0, 0), (na, na)).into_owned(),
        omega_ab: omega.view((0, na), (na, nb)).into_owned(),
        q_ba: q_slow.view((0, 0), (nb, na)).into_owned(),
        q_bb: q_slow.view((0, na), (nb, nb)).into_owned(),
        omega,
    })
}
