//! Chains of the singularly perturbed form `Q(lambda) = lambda * Qt + Qh`.
//!
//! For these chains the slow states are the absorbing states of `Qt`, the
//! fast states are its transient states, and the reduced generator has the
//! closed form
//!
//! ```text
//! Gamma = Qh_BB - Qh_BA Qt_AA^{-1} Qt_AB
//! ```
//!
//! This module computes it straight from the two coefficient matrices, with
//! no use of the limiting jump matrix, so agreement with
//! [`crate::reduce::reduced_generator`] is an independent check.

use nalgebra::DMatrix;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::classify::Partition;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::graph;
use crate::model::{Generator, ParamCtmc};
use crate::reduce::ReducedChain;
use crate::solve::transient_distribution;

/// The `lambda` coefficient `tilde` and the constant part `hat` of an affine
/// generator, in the model's state order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpDecomposition {
    pub labels: Vec<String>,
    pub tilde: DMatrix<f64>,
    pub hat: DMatrix<f64>,
}

impl SpDecomposition {
    pub fn generator_at(&self, lambda: f64) -> DMatrix<f64> {
        &self.tilde * lambda + &self.hat
    }
}

fn fill_diagonal(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        let out: f64 = (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
        m[(i, i)] = -out;
    }
}

/// Splits every rate `a * lambda + b` into its two coefficients. Fails with
/// the offending keys if some rate is not affine or has a negative
/// coefficient.
pub fn sp_decompose(m: &ParamCtmc) -> Result<SpDecomposition> {
    let n = m.len();
    let mut tilde = DMatrix::zeros(n, n);
    let mut hat = DMatrix::zeros(n, n);
    let mut bad = Vec::new();
    for ((i, j), e) in m.rates() {
        match e.affine_decompose() {
            Some((a, b)) if !a.is_negative() && !b.is_negative() => {
                tilde[(i, j)] = a.to_f64().unwrap_or(f64::NAN);
                hat[(i, j)] = b.to_f64().unwrap_or(f64::NAN);
            }
            _ => bad.push(m.rate_key(i, j)),
        }
    }
    if !bad.is_empty() {
        return Err(Error::NotSingularlyPerturbed { keys: bad });
    }
    fill_diagonal(&mut tilde);
    fill_diagonal(&mut hat);
    Ok(SpDecomposition {
        labels: m.states().to_vec(),
        tilde,
        hat,
    })
}

/// Slow states are the absorbing states of `tilde`. Any recurrent class of
/// `tilde` with two or more states violates the reduction assumptions.
pub fn sp_classify(d: &SpDecomposition) -> Result<Partition> {
    let n = d.labels.len();
    for class in graph::closed_classes(&graph::support_digraph(&d.tilde)) {
        if class.len() >= 2 {
            return Err(Error::FastRecurrentClass {
                states: class.iter().map(|&i| d.labels[i].clone()).collect(),
            });
        }
    }
    let (slow, fast): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| d.tilde[(i, i)] == 0.0);
    Partition::new(d.labels.clone(), fast, slow)
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// `Qt_AA^{-1} Qt_AB`, solved with full pivoting.
fn fast_exit_operator(d: &SpDecomposition, p: &Partition) -> Result<DMatrix<f64>> {
    let t_aa = select(&d.tilde, p.fast(), p.fast());
    let t_ab = select(&d.tilde, p.fast(), p.slow());
    let x = t_aa.full_piv_lu().solve(&t_ab).ok_or(Error::SingularSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

pub fn sp_reduced_generator(d: &SpDecomposition, p: &Partition) -> Result<ReducedChain> {
    let h_bb = select(&d.hat, p.slow(), p.slow());
    let gamma = if p.n_fast() == 0 {
        h_bb
    } else {
        let h_ba = select(&d.hat, p.slow(), p.fast());
        h_bb - h_ba * fast_exit_operator(d, p)?
    };
    let labels = p.slow_labels();
    Ok(ReducedChain {
        gamma: Generator::new(labels.clone(), gamma)?,
        labels,
    })
}

/// `pi_B - pi_A Qt_AA^{-1} Qt_AB`.
pub fn sp_collapse(d: &SpDecomposition, p: &Partition, pi: &Distribution) -> Result<Distribution> {
    if pi.labels() != d.labels.as_slice() {
        return Err(Error::LabelMismatch);
    }
    let probs = pi.probs();
    let mut out: Vec<f64> = p.slow().iter().map(|&i| probs[i]).collect();
    if p.n_fast() > 0 {
        let x = fast_exit_operator(d, p)?;
        for (k, &i) in p.fast().iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o -= probs[i] * x[(k, c)];
            }
        }
    }
    Distribution::normalized(p.slow_labels(), out)
}

/// Zero-order outer expansion on the slow states: `gamma_pi * exp(Gamma t)`.
pub fn outer_expansion(rc: &ReducedChain, gamma_pi: &Distribution, t: f64) -> Result<Distribution> {
    transient_distribution(&rc.gamma, gamma_pi, t)
}

/// Summary of the affine analysis of a model, as emitted by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct SpReport {
    pub fast: Vec<String>,
    pub slow: Vec<String>,
    pub tilde: Vec<Vec<f64>>,
    pub hat: Vec<Vec<f64>>,
    pub gamma_sp: Vec<Vec<f64>>,
    pub gamma_general: Vec<Vec<f64>>,
    pub max_abs_difference: f64,
    pub classification_agrees: bool,
}

pub(crate) fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Runs the affine path end to end and compares it with the general one.
pub fn sp_report(m: &ParamCtmc) -> Result<SpReport> {
    let d = sp_decompose(m)?;
    let p = sp_classify(&d)?;
    let rc = sp_reduced_generator(&d, &p)?;
    let general = crate::reduce::Reduction::analyze(m)?;
    let diff = (rc.gamma.matrix() - general.chain.gamma.matrix()).amax();
    Ok(SpReport {
        fast: p.fast_labels(),
        slow: p.slow_labels(),
        tilde: rows(&d.tilde),
        hat: rows(&d.hat),
        gamma_sp: rows(rc.gamma.matrix()),
        gamma_general: rows(general.chain.gamma.matrix()),
        max_abs_difference: diff,
        classification_agrees: p == general.partition,
    })
}
