//! Parameterized chains, their JSON model documents, and numeric generators.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::expr::{LimitValue, RationalExpr};
use crate::graph;

/// Rates are checked for nonnegativity at these values of `lambda` (and at
/// infinity through the leading coefficient).
pub const VALIDATION_SAMPLES: [f64; 4] = [1.0, 10.0, 1e3, 1e6];

const INITIAL_SUM_TOLERANCE: f64 = 1e-9;

/// Relative tolerance used when a matrix is accepted as a generator.
const GENERATOR_TOLERANCE: f64 = 1e-9;

/// A finite-state chain whose off-diagonal rates are rational functions of
/// `lambda`. Pairs without an entry have rate identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCtmc {
    name: String,
    states: Vec<String>,
    rates: BTreeMap<(usize, usize), RationalExpr>,
    initial: Option<Distribution>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    name: String,
    states: Vec<String>,
    rates: BTreeMap<String, String>,
    #[serde(default)]
    initial: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Serialize)]
struct ModelDocumentOut<'a> {
    name: &'a str,
    states: &'a [String],
    rates: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<BTreeMap<String, f64>>,
}

pub fn rate_key(from: &str, to: &str) -> String {
    format!("{from}->{to}")
}

impl ParamCtmc {
    pub fn new<I>(name: impl Into<String>, states: Vec<String>, rates: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, RationalExpr)>,
    {
        if states.len() < 2 {
            return Err(Error::Format("a model needs at least two states".into()));
        }
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if s.is_empty() || s.contains("->") {
                return Err(Error::Format(format!("invalid state label `{s}`")));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateState(s.clone()));
            }
        }
        let mut map = BTreeMap::new();
        for (from, to, expr) in rates {
            let key = rate_key(&from, &to);
            let i = *index.get(&from).ok_or_else(|| Error::UnknownStateInRateKey {
                key: key.clone(),
                state: from.clone(),
            })?;
            let j = *index.get(&to).ok_or_else(|| Error::UnknownStateInRateKey {
                key: key.clone(),
                state: to.clone(),
            })?;
            if i == j {
                return Err(Error::Format(format!("self-loop rate `{key}` is not allowed")));
            }
            if map.contains_key(&(i, j)) {
                return Err(Error::Format(format!("rate `{key}` given twice")));
            }
            if !expr.is_zero() {
                map.insert((i, j), expr);
            }
        }
        Ok(Self {
            name: name.into(),
            states,
            rates: map,
            initial: None,
        })
    }

    pub fn with_initial(mut self, initial: Distribution) -> Result<Self> {
        if initial.labels() != self.states.as_slice() {
            return Err(Error::LabelMismatch);
        }
        self.initial = Some(initial);
        Ok(self)
    }

    /// Reads a JSON model document.
    pub fn from_json(document: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(document).map_err(|e| Error::Format(e.to_string()))?;
        let mut rates = Vec::with_capacity(doc.rates.len());
        for (key, text) in &doc.rates {
            let (from, to) = key
                .split_once("->")
                .ok_or_else(|| Error::Format(format!("rate key `{key}` is not of the form `src->dst`")))?;
            let expr = RationalExpr::parse(text).map_err(|e| Error::Rate {
                key: key.clone(),
                source: Box::new(e),
            })?;
            rates.push((from.to_string(), to.to_string(), expr));
        }
        let model = Self::new(doc.name, doc.states, rates)?;
        match doc.initial {
            None => Ok(model),
            Some(init) => {
                let d = model.distribution_from_map(&init)?;
                model.with_initial(d)
            }
        }
    }

    /// A distribution on this model's states from a `state -> probability`
    /// map; unnamed states get zero and the total must be one within `1e-9`.
    pub fn distribution_from_map(&self, map: &BTreeMap<String, f64>) -> Result<Distribution> {
        let mut probs = vec![0.0; self.states.len()];
        for (label, &p) in map {
            let i = self
                .index_of(label)
                .ok_or_else(|| Error::Format(format!("initial distribution names unknown state `{label}`")))?;
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::Format(format!("initial probability of `{label}` is invalid")));
            }
            probs[i] = p;
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > INITIAL_SUM_TOLERANCE {
            return Err(Error::Format(format!("initial distribution sums to {total}")));
        }
        Distribution::normalized(self.states.clone(), probs)
    }

    pub fn to_json(&self) -> String {
        let rates = self
            .rates
            .iter()
            .map(|(&(i, j), e)| (rate_key(&self.states[i], &self.states[j]), e.to_string()))
            .collect();
        let initial = self
            .initial
            .as_ref()
            .map(|d| d.labels().iter().cloned().zip(d.probs().iter().copied()).collect());
        let out = ModelDocumentOut {
            name: &self.name,
            states: &self.states,
            rates,
            initial,
        };
        serde_json::to_string_pretty(&out).expect("model serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn initial(&self) -> Option<&Distribution> {
        self.initial.as_ref()
    }

    pub fn rate(&self, from: usize, to: usize) -> Option<&RationalExpr> {
        self.rates.get(&(from, to))
    }

    /// Nonzero rates as `((from, to), expression)` in index order.
    pub fn rates(&self) -> impl Iterator<Item = ((usize, usize), &RationalExpr)> {
        self.rates.iter().map(|(&k, v)| (k, v))
    }

    pub fn rate_key(&self, from: usize, to: usize) -> String {
        rate_key(&self.states[from], &self.states[to])
    }

    /// Total exit rate `q_i(lambda)` of state `i`, in exact arithmetic.
    pub fn exit_rate(&self, i: usize) -> RationalExpr {
        self.rates.range((i, 0)..(i + 1, 0)).map(|(_, e)| e).sum()
    }

    /// The model with `c*lambda` substituted for `lambda` in every rate.
    pub fn rescale_lambda(&self, c: &num_rational::BigRational) -> Self {
        Self {
            name: self.name.clone(),
            states: self.states.clone(),
            rates: self.rates.iter().map(|(k, e)| (*k, e.rescale_lambda(c))).collect(),
            initial: self.initial.clone(),
        }
    }

    /// Numeric generator `Q(lambda)`; the diagonal is the negative row sum.
    pub fn generator_at(&self, lambda: f64) -> Result<Generator> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        let n = self.states.len();
        let mut m = DMatrix::zeros(n, n);
        for (&(i, j), e) in &self.rates {
            let v = e.evaluate(lambda)?;
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeRate {
                    from: self.states[i].clone(),
                    to: self.states[j].clone(),
                    lambda,
                    value: v,
                });
            }
            m[(i, j)] = v;
        }
        for i in 0..n {
            let out: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
            m[(i, i)] = -out;
        }
        Ok(Generator {
            labels: self.states.clone(),
            matrix: m,
        })
    }

    pub(crate) fn support_digraph(&self) -> petgraph::graph::DiGraph<(), ()> {
        graph::edges_digraph(self.states.len(), self.rates.keys().copied())
    }

    /// Checks the standing assumptions; never fails, the report carries
    /// every violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (&(i, j), e) in &self.rates {
            let key = self.rate_key(i, j);
            for &lambda in &VALIDATION_SAMPLES {
                match e.evaluate(lambda) {
                    Ok(v) if v >= 0.0 => {}
                    Ok(v) => violations.push(RateViolation {
                        key: key.clone(),
                        lambda: Some(lambda),
                        reason: format!("negative value {v}"),
                    }),
                    Err(err) => violations.push(RateViolation {
                        key: key.clone(),
                        lambda: Some(lambda),
                        reason: err.to_string(),
                    }),
                }
            }
            if e.limit_at_infinity().is_err() {
                violations.push(RateViolation {
                    key,
                    lambda: None,
                    reason: "eventually negative".into(),
                });
            }
        }

        let strongly_connected = graph::is_strongly_connected(&self.support_digraph());

        let mut fast_states = Vec::new();
        let mut slow_states = Vec::new();
        let mut zero_exit_slow_states = Vec::new();
        let mut classification_failed = false;
        for i in 0..self.states.len() {
            match self.exit_rate(i).limit_at_infinity() {
                Ok(LimitValue::PlusInfinity) => fast_states.push(self.states[i].clone()),
                Ok(LimitValue::Finite(q)) => {
                    if num_traits::Zero::is_zero(&q) {
                        zero_exit_slow_states.push(self.states[i].clone());
                    }
                    slow_states.push(self.states[i].clone());
                }
                Err(_) => classification_failed = true,
            }
        }

        let mut failures = Vec::new();
        if !violations.is_empty() {
            failures.push("some rates are negative at a validation sample or eventually negative".to_string());
        }
        if !strongly_connected {
            failures.push("support digraph is not strongly connected".to_string());
        }
        if classification_failed {
            failures.push("some exit rates are eventually negative".to_string());
        } else if slow_states.is_empty() {
            failures.push("slow state space is empty".to_string());
        }
        if !zero_exit_slow_states.is_empty() {
            failures.push(format!(
                "slow states with zero limiting exit rate: {}",
                zero_exit_slow_states.join(", ")
            ));
        }

        ValidationReport {
            passed: failures.is_empty(),
            nonnegativity: NonnegativityCheck {
                method: "sampled",
                samples: VALIDATION_SAMPLES.to_vec(),
                violations,
            },
            strongly_connected,
            fast_states,
            slow_states,
            zero_exit_slow_states,
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateViolation {
    pub key: String,
    /// `None` stands for the limit `lambda -> inf`.
    pub lambda: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonnegativityCheck {
    pub method: &'static str,
    pub samples: Vec<f64>,
    pub violations: Vec<RateViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub nonnegativity: NonnegativityCheck,
    pub strongly_connected: bool,
    pub fast_states: Vec<String>,
    pub slow_states: Vec<String>,
    pub zero_exit_slow_states: Vec<String>,
    pub failures: Vec<String>,
}

/// A transition rate matrix at a fixed parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    labels: Vec<String>,
    matrix: DMatrix<f64>,
}

impl Generator {
    /// Accepts `matrix` if its off-diagonals are nonnegative and its rows sum
    /// to zero, both up to a relative round-off tolerance.
    pub fn new(labels: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::LabelMismatch);
        }
        for i in 0..n {
            let scale = matrix.row(i).iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            let mut sum = 0.0;
            for j in 0..n {
                let v = matrix[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("generator entry ({i}, {j})")));
                }
                if i != j && v < -GENERATOR_TOLERANCE * scale {
                    return Err(Error::NotAGenerator(format!(
                        "negative off-diagonal entry {v} at ({i}, {j})"
                    )));
                }
                sum += v;
            }
            if sum.abs() > GENERATOR_TOLERANCE * scale {
                return Err(Error::NotAGenerator(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { labels, matrix })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.matrix[(i, i)]
    }

    /// Strong connectivity of the support digraph; a single state counts
    /// as irreducible.
    pub fn is_irreducible(&self) -> bool {
        graph::is_strongly_connected(&graph::support_digraph(&self.matrix))
    }

    /// Jump-chain transition matrix `q_ij / q_i`; rows of absorbing states
    /// are left zero.
    pub fn jump_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            let q = self.exit_rate(i);
            if i == j || q <= 0.0 {
                0.0
            } else {
                self.matrix[(i, j)] / q
            }
        })
    }

    /// Largest `|row sum|` over all rows.
    pub fn max_row_sum_error(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}
