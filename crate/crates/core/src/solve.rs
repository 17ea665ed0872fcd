//! Transient and stationary analysis of generators, and the comparison of a
//! chain at finite `lambda` with its reduced chain.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::Partition;
use crate::dist::{tv_distance, Distribution};
use crate::error::{Error, Result};
use crate::expm::expm;
use crate::model::{Generator, ParamCtmc};
use crate::numfmt::format_sig12;
use crate::reduce::Reduction;

const DIST_TOLERANCE: f64 = 1e-8;

/// Number of steps in the default grid over `[0, T]`.
pub const DEFAULT_GRID_STEPS: u32 = 2000;

/// Equally spaced times `t0, t0 + step, ...` up to and including `t_end`
/// (when it falls on the grid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, step: f64) -> Result<Self> {
        if !(t0 >= 0.0 && t0 < t_end && t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= t0 < T, got t0={t0}, T={t_end}"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        Ok(Self { t0, t_end, step })
    }

    /// `[0, t_end]` with the default number of steps.
    pub fn with_default_step(t_end: f64) -> Result<Self> {
        Self::new(0.0, t_end, t_end / f64::from(DEFAULT_GRID_STEPS))
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end - self.t0) / self.step + 1e-9).floor() as usize
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps()).map(|k| self.t0 + k as f64 * self.step).collect()
    }
}

/// Distributions of a chain at increasing times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub dists: Vec<Distribution>,
}

impl Trajectory {
    /// Header `t,<label>...` then one row per time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (t, d) in self.times.iter().zip(&self.dists) {
            out.push_str(&format_sig12(*t));
            for p in d.probs() {
                out.push(',');
                out.push_str(&format_sig12(*p));
            }
            out.push('\n');
        }
        out
    }
}

fn check_labels(g: &Generator, pi: &Distribution) -> Result<()> {
    if g.labels() != pi.labels() {
        return Err(Error::LabelMismatch);
    }
    Ok(())
}

fn row_times(pi: &[f64], m: &DMatrix<f64>) -> Vec<f64> {
    let row = DVector::from_column_slice(pi).transpose() * m;
    row.iter().copied().collect()
}

/// `pi * exp(t G)`, renormalized.
pub fn transient_distribution(g: &Generator, pi: &Distribution, t: f64) -> Result<Distribution> {
    check_labels(g, pi)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(pi.clone());
    }
    let propagator = expm(&(g.matrix() * t))?;
    Distribution::from_computed(g.labels().to_vec(), row_times(pi.probs(), &propagator), DIST_TOLERANCE)
}

/// Distributions on every grid time, stepping with a single propagator
/// `exp(step G)`.
pub fn transient_trajectory(g: &Generator, pi: &Distribution, grid: &TimeGrid) -> Result<Trajectory> {
    let start = transient_distribution(g, pi, grid.t0)?;
    let step = expm(&(g.matrix() * grid.step))?;
    let times = grid.times();
    let mut dists = Vec::with_capacity(times.len());
    let mut current = start;
    dists.push(current.clone());
    for _ in 1..times.len() {
        let next = row_times(current.probs(), &step);
        current = Distribution::from_computed(g.labels().to_vec(), next, DIST_TOLERANCE)?;
        dists.push(current.clone());
    }
    Ok(Trajectory {
        labels: g.labels().to_vec(),
        times,
        dists,
    })
}

/// Solves `mu Q^c = (0, ..., 0, 1)` where `Q^c` is `G` with its last column
/// replaced by ones.
pub fn stationary_distribution(g: &Generator) -> Result<Distribution> {
    if !g.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let n = g.len();
    let mut qc = g.matrix().clone();
    qc.column_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let mu = qc.transpose().lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    Distribution::from_computed(g.labels().to_vec(), mu.iter().copied().collect(), DIST_TOLERANCE)
}

/// Places a distribution on slow states into the full state space, with
/// zero mass on fast states.
pub fn embed_slow_distribution(d: &Distribution, p: &Partition) -> Result<Distribution> {
    let labels = p.labels().to_vec();
    let slow = p.slow_labels();
    let mut probs = vec![0.0; labels.len()];
    for (l, &v) in d.labels().iter().zip(d.probs()) {
        if !slow.contains(l) {
            return Err(Error::LabelMismatch);
        }
        let i = labels
            .iter()
            .position(|x| x == l)
            .expect("slow labels are state labels");
        probs[i] = v;
    }
    Distribution::new(labels, probs)
}

/// Grid estimate of a supremum over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupTv {
    pub sup: f64,
    pub argmax_t: f64,
}

fn max_tv(x: &Trajectory, y: &Trajectory, p: &Partition) -> Result<SupTv> {
    let mut best = SupTv {
        sup: -1.0,
        argmax_t: x.times[0],
    };
    for ((t, dx), dy) in x.times.iter().zip(&x.dists).zip(&y.dists) {
        let d = tv_distance(dx, &embed_slow_distribution(dy, p)?)?;
        if d > best.sup {
            best = SupTv { sup: d, argmax_t: *t };
        }
    }
    Ok(best)
}

/// Largest total variation distance over `grid` between the chain at
/// `lambda` started from `pi` and the reduced chain started from the
/// collapse of `pi` (which is `pi` itself when `pi` lives on the slow
/// states).
pub fn sup_tv_on_grid(
    m: &ParamCtmc,
    lambda: f64,
    reduction: &Reduction,
    pi: &Distribution,
    grid: &TimeGrid,
) -> Result<SupTv> {
    let y = transient_trajectory(&reduction.chain.gamma, &reduction.collapse(pi)?, grid)?;
    let x = transient_trajectory(&m.generator_at(lambda)?, pi, grid)?;
    max_tv(&x, &y, &reduction.partition)
}

/// `sup_tv_on_grid` for each of a list of increasing `lambda` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub lambdas: Vec<f64>,
    pub sup_tv: Vec<f64>,
    pub argmax_t: Vec<f64>,
    pub grid: TimeGrid,
}

impl SweepResult {
    /// Header `lambda,sup_tv,argmax_t` then one row per `lambda`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,sup_tv,argmax_t\n");
        for ((l, s), t) in self.lambdas.iter().zip(&self.sup_tv).zip(&self.argmax_t) {
            out.push_str(&format!(
                "{},{},{}\n",
                format_sig12(*l),
                format_sig12(*s),
                format_sig12(*t)
            ));
        }
        out
    }
}

pub fn lambda_sweep(m: &ParamCtmc, pi: &Distribution, grid: &TimeGrid, lambdas: &[f64]) -> Result<SweepResult> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("no lambda values given".into()));
    }
    if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) || lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "lambda values must be positive and increasing".into(),
        ));
    }
    let reduction = Reduction::analyze(m)?;
    let y = transient_trajectory(&reduction.chain.gamma, &reduction.collapse(pi)?, grid)?;
    let results = lambdas
        .par_iter()
        .map(|&lambda| {
            let x = transient_trajectory(&m.generator_at(lambda)?, pi, grid)?;
            max_tv(&x, &y, &reduction.partition)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        lambdas: lambdas.to_vec(),
        sup_tv: results.iter().map(|r| r.sup).collect(),
        argmax_t: results.iter().map(|r| r.argmax_t).collect(),
        grid: *grid,
    })
}
