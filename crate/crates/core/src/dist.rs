use serde::Serialize;

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// A probability vector over labelled states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl Distribution {
    /// Checked constructor: entries must be nonnegative and sum to one within
    /// `1e-12`.
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() || labels.is_empty() {
            return Err(Error::LabelMismatch);
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} is negative or not finite"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { labels, probs })
    }

    /// Clamps round-off negatives to zero and rescales to unit mass.
    pub fn normalized(labels: Vec<String>, mut probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() || labels.is_empty() {
            return Err(Error::LabelMismatch);
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("distribution entry".into()));
        }
        for p in probs.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::NonFinite("distribution has no mass".into()));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(Self { labels, probs })
    }

    /// For vectors produced by a numerical solve: entries above `-tol` are
    /// clamped to zero and the mass is rescaled to one, anything worse is an
    /// error.
    pub(crate) fn from_computed(labels: Vec<String>, mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        if labels.len() != probs.len() || labels.is_empty() {
            return Err(Error::LabelMismatch);
        }
        for p in probs.iter_mut() {
            if !p.is_finite() {
                return Err(Error::NonFinite("computed probability".into()));
            }
            if *p < 0.0 {
                if *p < -tol {
                    return Err(Error::NonFinite(format!("computed probability {p} is negative")));
                }
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::NonFinite(format!("computed probabilities sum to {total}")));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(Self { labels, probs })
    }

    pub fn point_mass(labels: Vec<String>, at: &str) -> Result<Self> {
        let idx = labels
            .iter()
            .position(|l| l == at)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown state `{at}`")))?;
        let mut probs = vec![0.0; labels.len()];
        probs[idx] = 1.0;
        Ok(Self { labels, probs })
    }

    pub fn uniform(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            probs: vec![1.0 / n as f64; n],
            labels,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.probs[i])
    }

    /// The same distribution listed in `order`, which must be a permutation
    /// of this distribution's labels.
    pub fn reordered(&self, order: &[String]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::LabelMismatch);
        }
        let probs = order
            .iter()
            .map(|l| self.prob(l).ok_or(Error::LabelMismatch))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            labels: order.to_vec(),
            probs,
        })
    }
}

/// Total variation distance `1/2 * sum |mu_i - nu_i|`.
pub fn tv_distance(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    if mu.labels != nu.labels {
        return Err(Error::LabelMismatch);
    }
    let d = 0.5 * mu.probs.iter().zip(&nu.probs).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn tv_examples() {
        let a = Distribution::new(labels(2), vec![0.5, 0.5]).unwrap();
        let b = Distribution::new(labels(2), vec![0.25, 0.75]).unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 0.25);
        let d1 = Distribution::point_mass(labels(3), "1").unwrap();
        let d2 = Distribution::point_mass(labels(3), "2").unwrap();
        assert_eq!(tv_distance(&d1, &d2).unwrap(), 1.0);
        assert_eq!(tv_distance(&a, &d1), Err(Error::LabelMismatch));
    }

    #[test]
    fn constructor_rejects_bad_vectors() {
        assert!(Distribution::new(labels(2), vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(labels(2), vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(labels(2), vec![1.0]).is_err());
        let d = Distribution::normalized(labels(2), vec![-1e-17, 2.0]).unwrap();
        assert_eq!(d.probs(), &[0.0, 1.0]);
    }
}
