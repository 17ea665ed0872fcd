//! Property checks shared by the proptest suite and the acceptance harness.
#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

use slowchain::synth::{self, SynthConfig};
use slowchain::{
    bundled, empirical_distribution, first_passage_distribution, sp_classify, sp_decompose, sp_reduced_generator,
    stationary_distribution, transient_distribution, tv_distance, Distribution, Error, LimitValue, ParamCtmc,
    RationalExpr, Reduction,
};

pub type Check = std::result::Result<(), TestCaseError>;

pub fn bundled_models() -> Vec<ParamCtmc> {
    bundled::ALL
        .iter()
        .map(|(_, doc)| ParamCtmc::from_json(doc).unwrap())
        .collect()
}

fn fail<E: std::fmt::Debug>(e: E) -> TestCaseError {
    TestCaseError::fail(format!("{e:?}"))
}

/// Runs `test` over `cases` inputs from a fixed-seed generator and returns
/// the number of cases on success.
pub fn run_deterministic<S, F>(cases: u32, strategy: S, test: F) -> std::result::Result<u32, String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Check,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(config, rng);
    match runner.run(&strategy, test) {
        Ok(()) => Ok(cases),
        Err(TestError::Fail(reason, value)) => Err(format!("{reason} for {value:?}")),
        Err(TestError::Abort(reason)) => Err(reason.to_string()),
    }
}

// ---------------------------------------------------------------- expressions

#[derive(Debug, Clone)]
pub enum Ast {
    Num(String),
    Lambda,
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>),
}

fn number() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..50).prop_map(|n| n.to_string()),
        (0u32..20, 1u32..100).prop_map(|(a, b)| format!("{a}.{b:02}")),
    ]
}

pub fn ast() -> impl Strategy<Value = Ast> {
    let leaf = prop_oneof![number().prop_map(Ast::Num), Just(Ast::Lambda)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Ast::Neg(Box::new(a))),
            (prop::sample::select(vec!['+', '-', '*', '/']), inner.clone(), inner).prop_map(|(op, a, b)| Ast::Bin(
                op,
                Box::new(a),
                Box::new(b)
            )),
        ]
    })
}

fn precedence(a: &Ast) -> u8 {
    match a {
        Ast::Bin('+' | '-', ..) => 1,
        Ast::Bin(..) => 2,
        Ast::Neg(_) => 3,
        _ => 4,
    }
}

/// Renders with the fewest parentheses the grammar allows.
pub fn render(a: &Ast) -> String {
    match a {
        Ast::Num(s) => s.clone(),
        Ast::Lambda => "lambda".into(),
        Ast::Neg(x) => {
            let inner = render(x);
            if precedence(x) < 3 {
                format!("-({inner})")
            } else {
                format!("-{inner}")
            }
        }
        Ast::Bin(op, l, r) => {
            let p = precedence(a);
            let ls = if precedence(l) < p {
                format!("({})", render(l))
            } else {
                render(l)
            };
            let rs = if precedence(r) <= p && precedence(r) < 3 {
                format!("({})", render(r))
            } else {
                render(r)
            };
            format!("{ls} {op} {rs}")
        }
    }
}

/// Direct interpretation in floating point, with a magnitude bound used to
/// scale the comparison tolerance. `None` near a pole.
pub fn interpret(a: &Ast, lambda: f64) -> Option<(f64, f64)> {
    Some(match a {
        Ast::Num(s) => {
            let v: f64 = s.parse().ok()?;
            (v, v.abs())
        }
        Ast::Lambda => (lambda, lambda.abs()),
        Ast::Neg(x) => {
            let (v, m) = interpret(x, lambda)?;
            (-v, m)
        }
        Ast::Bin(op, l, r) => {
            let (x, mx) = interpret(l, lambda)?;
            let (y, my) = interpret(r, lambda)?;
            match op {
                '+' => (x + y, mx + my),
                '-' => (x - y, mx + my),
                '*' => (x * y, mx * my),
                _ => {
                    if y.abs() <= 1e-6 * my.max(1.0) {
                        return None;
                    }
                    (x / y, mx / y.abs() + x.abs() * my / (y * y))
                }
            }
        }
    })
}

pub fn check_round_trip(a: Ast) -> Check {
    let text = render(&a);
    let e = match RationalExpr::parse(&text) {
        Ok(e) => e,
        Err(Error::ZeroDenominator) => return Ok(()),
        Err(err) => return Err(fail((text, err))),
    };
    for lambda in [0.5, 1.0, 7.0, 1e3] {
        let Some((direct, mag)) = interpret(&a, lambda) else {
            continue;
        };
        if !direct.is_finite() || !mag.is_finite() {
            continue;
        }
        let v = match e.evaluate(lambda) {
            Ok(v) => v,
            Err(Error::PoleAtLambda { .. }) => continue,
            Err(err) => return Err(fail((&text, err))),
        };
        prop_assert!(
            (v - direct).abs() <= 1e-9 * mag.max(direct.abs()).max(1e-300),
            "{text} at {lambda}: {v} vs {direct}"
        );
    }
    Ok(())
}

pub fn check_canonical_idempotent(a: Ast) -> Check {
    let Ok(e) = RationalExpr::parse(&render(&a)) else {
        return Ok(());
    };
    let again = RationalExpr::parse(&e.to_string()).map_err(fail)?;
    prop_assert_eq!(again.numerator(), e.numerator());
    prop_assert_eq!(again.denominator(), e.denominator());
    Ok(())
}

pub fn check_limit_vs_evaluate(a: Ast) -> Check {
    let Ok(e) = RationalExpr::parse(&render(&a)) else {
        return Ok(());
    };
    if let Ok(LimitValue::Finite(l)) = e.limit_at_infinity() {
        let l = LimitValue::Finite(l).to_f64();
        let v = e.evaluate(1e12).map_err(fail)?;
        prop_assert!((v - l).abs() <= 1e-4 * l.abs().max(1.0), "{e}: {v} vs {l}");
    }
    Ok(())
}

// --------------------------------------------------------------- models

fn any_model(seed: u64) -> (ParamCtmc, Reduction) {
    synth::reducible_model(seed, &SynthConfig::default())
}

pub fn check_generator_invariants(seed: u64, lambda: f64) -> Check {
    let m = synth::random_model(seed, &SynthConfig::default());
    prop_assert_eq!(m.validate(), m.validate());
    let g = m.generator_at(lambda).map_err(fail)?;
    let q = g.matrix();
    for i in 0..q.nrows() {
        let scale = q[(i, i)].abs().max(1.0);
        let sum: f64 = q.row(i).iter().sum();
        prop_assert!(sum.abs() <= 1e-12 * scale, "row {i} sums to {sum}");
        for j in 0..q.ncols() {
            if i != j {
                prop_assert!(q[(i, j)] >= 0.0);
            }
        }
    }
    Ok(())
}

pub fn check_omega_numeric(m: &ParamCtmc) -> Check {
    let r = Reduction::analyze(m).map_err(fail)?;
    let numeric = r
        .partition
        .to_block_order(&m.generator_at(1e10).map_err(fail)?.jump_matrix());
    let diff = (numeric - &r.limits.omega).amax();
    prop_assert!(diff <= 1e-6, "{}: {diff}", m.name());
    Ok(())
}

pub fn check_partition_rescale(seed: u64) -> Check {
    let m = synth::random_model(seed, &SynthConfig::default());
    let two = num_rational::BigRational::from_integer(2.into());
    let a = slowchain::classify_states(&m);
    let b = slowchain::classify_states(&m.rescale_lambda(&two));
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn check_gamma_invariants(seed: u64) -> Check {
    let (_, r) = any_model(seed);
    let g = r.chain.gamma.matrix();
    let q_bb = &r.limits.q_bb;
    for i in 0..g.nrows() {
        let sum: f64 = g.row(i).iter().sum();
        prop_assert!(sum.abs() <= 1e-10, "row {i} of Gamma sums to {sum}");
        for j in 0..g.ncols() {
            if i != j {
                prop_assert!(g[(i, j)] >= 0.0, "Gamma[{i},{j}] = {}", g[(i, j)]);
                prop_assert!(g[(i, j)] >= q_bb[(i, j)] - 1e-12, "dominance fails at ({i},{j})");
            }
        }
    }
    Ok(())
}

fn random_distribution(labels: Vec<String>, weights: &[f64]) -> Distribution {
    let w: Vec<f64> = (0..labels.len()).map(|k| weights[k % weights.len()]).collect();
    Distribution::normalized(labels, w).unwrap()
}

pub fn check_collapse_is_distribution(seed: u64, weights: Vec<f64>) -> Check {
    let (m, r) = any_model(seed);
    let pi = random_distribution(m.states().to_vec(), &weights);
    let g = r.collapse(&pi).map_err(fail)?;
    prop_assert!(g.probs().iter().all(|&p| (0.0..=1.0).contains(&p)));
    prop_assert!((g.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    Ok(())
}

pub fn check_first_passage_consistency(m: &ParamCtmc, r: &Reduction, pi: &Distribution) -> Check {
    let exact = r.collapse(pi).map_err(fail)?;
    let fp = first_passage_distribution(m, 1e8, pi).map_err(fail)?;
    for (a, b) in exact.probs().iter().zip(fp.probs()) {
        prop_assert!((a - b).abs() <= 1e-6, "{}: {a} vs {b}", m.name());
    }
    Ok(())
}

/// Smallest `N <= 10000` with the Neumann partial sum within `tol` of the
/// fundamental matrix, together with the first-passage mass of each row.
pub fn neumann(r: &Reduction, tol: f64) -> Option<(usize, Vec<f64>)> {
    let a = &r.limits.omega_aa;
    let n = a.nrows();
    if n == 0 {
        return Some((0, Vec::new()));
    }
    let target = (DMatrix::identity(n, n) - a).lu().try_inverse()?;
    let mut power = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for big_n in 0..=10_000 {
        if (&sum - &target).amax() <= tol {
            let mass = (&sum * &r.limits.omega_ab).row_iter().map(|row| row.sum()).collect();
            return Some((big_n, mass));
        }
        power = &power * a;
        sum += &power;
    }
    None
}

pub fn check_neumann(r: &Reduction) -> Check {
    let (_, mass) = neumann(r, 1e-10).ok_or_else(|| fail("no convergence within 10000 terms"))?;
    for m in mass {
        prop_assert!((m - 1.0).abs() <= 1e-8, "first-passage mass {m}");
    }
    Ok(())
}

fn moderate_generator(seed: u64, lambda: f64) -> slowchain::Generator {
    synth::random_model(seed, &SynthConfig::default())
        .generator_at(lambda)
        .unwrap()
}

pub fn check_semigroup(seed: u64, lambda: f64, s: f64, t: f64) -> Check {
    let g = moderate_generator(seed, lambda);
    let pi = Distribution::uniform(g.labels().to_vec());
    let two_step = transient_distribution(&g, &transient_distribution(&g, &pi, s).map_err(fail)?, t).map_err(fail)?;
    let one_step = transient_distribution(&g, &pi, s + t).map_err(fail)?;
    for (a, b) in two_step.probs().iter().zip(one_step.probs()) {
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
    Ok(())
}

pub fn check_time_regularity(model: usize, lambda: f64, i: usize, t: f64, h: f64) -> Check {
    let m = &bundled_models()[model];
    let g = m.generator_at(lambda).map_err(fail)?;
    let i = i % g.len();
    let start = Distribution::point_mass(g.labels().to_vec(), &g.labels()[i]).unwrap();
    let at_t = transient_distribution(&g, &start, t).map_err(fail)?;
    let at_th = transient_distribution(&g, &start, t + h).map_err(fail)?;
    let bound = 1.0 - (-g.exit_rate(i) * h).exp();
    for (a, b) in at_th.probs().iter().zip(at_t.probs()) {
        prop_assert!((a - b).abs() <= bound + 1e-9, "{} > {bound}", (a - b).abs());
    }
    Ok(())
}

pub fn check_stationarity(seed: u64, lambda: f64, t: f64) -> Check {
    let g = moderate_generator(seed, lambda);
    let mu = stationary_distribution(&g).map_err(fail)?;
    let later = transient_distribution(&g, &mu, t).map_err(fail)?;
    for (a, b) in later.probs().iter().zip(mu.probs()) {
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
    Ok(())
}

/// `d_TV(mu_B(lambda), mu_B) + sum_A mu_A(lambda)` for the stationary law
/// `mu(lambda)` of the full chain and `mu_B` of the reduced chain.
pub fn stationary_gap(m: &ParamCtmc, r: &Reduction, lambda: f64) -> slowchain::Result<f64> {
    let mu = stationary_distribution(&m.generator_at(lambda)?)?;
    let limit = stationary_distribution(&r.chain.gamma)?;
    let p = &r.partition;
    let fast_mass: f64 = p.fast().iter().map(|&i| mu.probs()[i]).sum();
    let slow: Vec<f64> = p.slow().iter().map(|&i| mu.probs()[i]).collect();
    let total: f64 = slow.iter().sum();
    let conditional = Distribution::new(p.slow_labels(), slow.iter().map(|x| x / total).collect())?;
    Ok(tv_distance(&conditional, &limit)? + fast_mass)
}

pub fn irreducible_models(seed: u64, count: usize) -> Vec<(ParamCtmc, Reduction)> {
    synth::sample_models(seed, count, &SynthConfig::default(), |_, r| r.is_irreducible())
}

pub fn check_stationary_trend(m: &ParamCtmc, r: &Reduction) -> Check {
    let gaps: Vec<f64> = [10.0, 1e3, 1e5]
        .iter()
        .map(|&l| stationary_gap(m, r, l))
        .collect::<slowchain::Result<_>>()
        .map_err(fail)?;
    prop_assert!(gaps[2] <= 1e-3, "{}: gap {gaps:?}", m.name());
    prop_assert!(gaps[2] < gaps[0], "{}: gap {gaps:?}", m.name());
    Ok(())
}

/// Empirical law at time `t` against the matrix exponential, per state
/// within four binomial standard errors of the exact probability.
pub fn check_ssa_agreement(m: &ParamCtmc, lambda: f64, t: f64, paths: u64, seed: u64) -> Check {
    let g = m.generator_at(lambda).map_err(fail)?;
    let pi = m
        .initial()
        .cloned()
        .unwrap_or_else(|| Distribution::uniform(m.states().to_vec()));
    let exact = transient_distribution(&g, &pi, t).map_err(fail)?;
    let emp = empirical_distribution(&g, &pi, t, paths, seed).map_err(fail)?;
    for (k, (&p, &q)) in exact.probs().iter().zip(emp.dist.probs()).enumerate() {
        let se = (p * (1.0 - p) / paths as f64).sqrt();
        prop_assert!(
            (p - q).abs() <= 4.0 * se + 1e-12,
            "{} state {} at lambda={lambda}: exact {p}, empirical {q}, stderr {se}",
            m.name(),
            m.states()[k]
        );
    }
    Ok(())
}

pub fn check_sp_equivalence(m: &ParamCtmc) -> Check {
    let d = sp_decompose(m).map_err(fail)?;
    let general = Reduction::analyze(m).map_err(fail)?;
    let p = sp_classify(&d).map_err(fail)?;
    prop_assert_eq!(&p, &general.partition);
    let rc = sp_reduced_generator(&d, &p).map_err(fail)?;
    let diff = (rc.gamma.matrix() - general.chain.gamma.matrix()).amax();
    prop_assert!(diff <= 1e-10, "{}: |Gamma_sp - Gamma| = {diff}", m.name());
    Ok(())
}

pub fn affine_models(seed: u64, count: usize) -> Vec<ParamCtmc> {
    synth::sample_models(seed, count, &SynthConfig::affine(), |_, _| true)
        .into_iter()
        .map(|(m, _)| m)
        .collect()
}
