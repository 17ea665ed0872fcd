//! Command-line front end: argument model, subcommand dispatch and output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use slowchain::numfmt::format_sig12;
use slowchain::solve::DEFAULT_GRID_STEPS;
use slowchain::sp::sp_report;
use slowchain::ssa::DEFAULT_JUMP_BUDGET;
use slowchain::{
    check_slow_reachability, empirical_distribution, first_passage_distribution, lambda_sweep, sample_first_passage,
    sp_classify, sp_collapse, sp_decompose, stationary_distribution, sufficient_condition, sup_tv_on_grid,
    transient_trajectory, tv_distance, Distribution, ParamCtmc, Reduction, TimeGrid, ValidationReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the model assumptions and print the report
    Validate,
    /// Split the states into fast and slow and print the limit jump matrix
    Classify,
    /// Reduced generator, collapsed initial law and irreducibility
    Reduce,
    /// Stationary law at --lambda and of the reduced chain
    Stationary,
    /// Transient law on a time grid: the chain at --lambda, or the reduced chain without it
    Transient,
    /// Largest distance to the reduced chain over a time grid at --lambda
    Compare,
    /// `compare` for each value of --lambdas
    Sweep,
    /// Monte Carlo estimate of the law at time --T
    Simulate,
    /// Entrance law of the slow states: exact value against simulation
    #[command(name = "firstpassage")]
    FirstPassage,
    /// Affine decomposition and the cross-checked reduced generator
    Sp,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Classify => "classify",
            Command::Reduce => "reduce",
            Command::Stationary => "stationary",
            Command::Transient => "transient",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
            Command::Simulate => "simulate",
            Command::FirstPassage => "firstpassage",
            Command::Sp => "sp",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Transient | Command::Sweep | Command::Simulate | Command::FirstPassage => Format::Csv,
            _ => Format::Json,
        }
    }

    fn supports_csv(self) -> bool {
        matches!(
            self,
            Command::Transient | Command::Compare | Command::Sweep | Command::Simulate | Command::FirstPassage
        )
    }
}

/// Raw command line.
#[derive(Debug, Parser)]
#[command(
    name = "slowchain",
    version,
    about = "Reduce two-time-scale Markov chains to their slow states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Model file (JSON)
    #[arg(long, global = true, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Value of the scale parameter
    #[arg(long, global = true, value_name = "X", conflicts_with = "lambdas")]
    pub lambda: Option<f64>,
    /// Comma-separated increasing values of the scale parameter
    #[arg(long, global = true, value_name = "X,Y,Z", value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    /// Initial law: a state label, `uniform`, or a JSON file mapping states to probabilities
    #[arg(long, global = true, value_name = "STATE|uniform|FILE")]
    pub pi: Option<String>,
    /// Start of the time grid
    #[arg(long, global = true, value_name = "R")]
    pub t0: Option<f64>,
    /// End of the time grid, or the observation time for `simulate`
    #[arg(long = "T", global = true, value_name = "R")]
    pub t_end: Option<f64>,
    /// Grid step; defaults to 1/2000 of the window
    #[arg(long, global = true, value_name = "R")]
    pub step: Option<f64>,
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Number of simulated paths
    #[arg(long, global = true, value_name = "N", default_value_t = 10_000)]
    pub paths: u64,
    /// Write the result here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Print nothing on stdout except errors
    #[arg(long, global = true)]
    pub quiet: bool,
}

/// A checked invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: PathBuf,
    pub lambdas: Vec<f64>,
    /// Unresolved `--pi` argument; falls back to the model's initial law.
    pub pi: Option<String>,
    pub t0: f64,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub seed: u64,
    pub n_paths: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub quiet: bool,
}

impl TryFrom<Cli> for RunConfig {
    type Error = CliError;

    fn try_from(cli: Cli) -> Result<Self, CliError> {
        let model = cli.model.ok_or_else(|| CliError::Usage("--model is required".into()))?;
        let lambdas = match cli.lambda {
            Some(l) => vec![l],
            None => cli.lambdas,
        };
        if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(CliError::Usage("lambda values must be positive".into()));
        }
        if cli.step.is_some_and(|s| s.is_nan() || s <= 0.0) {
            return Err(CliError::Usage("--step must be positive".into()));
        }
        if cli.paths == 0 {
            return Err(CliError::Usage("--paths must be at least 1".into()));
        }
        let format = cli.format.unwrap_or(cli.command.default_format());
        if format == Format::Csv && !cli.command.supports_csv() {
            return Err(CliError::Usage(format!("`{}` has no CSV output", cli.command.name())));
        }
        Ok(Self {
            command: cli.command,
            model,
            lambdas,
            pi: cli.pi,
            t0: cli.t0.unwrap_or(0.0),
            t_end: cli.t_end,
            step: cli.step,
            seed: cli.seed,
            n_paths: cli.paths,
            output: cli.output,
            format,
            quiet: cli.quiet,
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] slowchain::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("model failed validation: {}", .0.failures.join("; "))]
    Validation(Box<ValidationReport>),
}

impl CliError {
    /// 1 for a model that fails validation, 2 when the reduction
    /// assumptions fail, 3 for I/O, format and usage errors.
    pub fn exit_code(&self) -> i32 {
        use slowchain::Error as E;
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } | CliError::Usage(_) => 3,
            CliError::Core(e) => match e {
                E::ReducedChainUndefined(_)
                | E::FastRecurrentClass { .. }
                | E::NotSingularlyPerturbed { .. }
                | E::NotIrreducible
                | E::SingularSystem
                | E::PathBudgetExceeded { .. } => 2,
                E::NegativeRate { .. }
                | E::PoleAtLambda { .. }
                | E::EventuallyNegative
                | E::EmptySlowSpace
                | E::ZeroSlowExitRate(_)
                | E::NotAGenerator(_)
                | E::NonFinite(_) => 1,
                _ => 3,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "IoError",
            CliError::Usage(_) => "UsageError",
            CliError::Validation(_) => "ValidationFailed",
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Validation(report) = self {
            v["report"] = serde_json::to_value(report).expect("report serializes");
        }
        v.to_string()
    }
}

/// What a successful run writes, and the exit code to return.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub body: String,
    pub exit_code: i32,
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn json_out<T: Serialize>(v: &T) -> Result<String, CliError> {
    Ok(pretty(v))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn csv_table(header: &str, rows: impl IntoIterator<Item = (String, Vec<f64>)>) -> String {
    let mut out = format!("{header}\n");
    for (first, values) in rows {
        out.push_str(&first);
        for v in values {
            out.push(',');
            out.push_str(&format_sig12(v));
        }
        out.push('\n');
    }
    out
}

struct Session<'a> {
    cfg: &'a RunConfig,
    model: ParamCtmc,
}

impl Session<'_> {
    fn single_lambda(&self) -> Result<f64, CliError> {
        match self.cfg.lambdas.as_slice() {
            [l] => Ok(*l),
            _ => Err(CliError::Usage(format!(
                "`{}` needs exactly one --lambda",
                self.cfg.command.name()
            ))),
        }
    }

    fn t_end(&self) -> Result<f64, CliError> {
        self.cfg
            .t_end
            .ok_or_else(|| CliError::Usage(format!("`{}` needs --T", self.cfg.command.name())))
    }

    fn grid(&self) -> Result<TimeGrid, CliError> {
        let t_end = self.t_end()?;
        let t0 = self.cfg.t0;
        let step = self.cfg.step.unwrap_or((t_end - t0) / DEFAULT_GRID_STEPS as f64);
        Ok(TimeGrid::new(t0, t_end, step)?)
    }

    fn pi(&self) -> Result<Option<Distribution>, CliError> {
        let states = self.model.states().to_vec();
        Ok(match self.cfg.pi.as_deref() {
            None => self.model.initial().cloned(),
            Some("uniform") => Some(Distribution::uniform(states)),
            Some(label) if self.model.index_of(label).is_some() => Some(Distribution::point_mass(states, label)?),
            Some(file) => {
                let path = PathBuf::from(file);
                let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
                let map: BTreeMap<String, f64> =
                    serde_json::from_str(&text).map_err(|e| slowchain::Error::Format(format!("{file}: {e}")))?;
                Some(self.model.distribution_from_map(&map)?)
            }
        })
    }

    fn required_pi(&self) -> Result<Distribution, CliError> {
        self.pi()?.ok_or_else(|| {
            CliError::Usage(format!(
                "`{}` needs --pi or an initial law in the model",
                self.cfg.command.name()
            ))
        })
    }

    fn run(&self) -> Result<Emitted, CliError> {
        let report = self.model.validate();
        if self.cfg.command == Command::Validate {
            return Ok(Emitted {
                body: pretty(&report),
                exit_code: if report.passed { 0 } else { 1 },
            });
        }
        if !report.passed {
            return Err(CliError::Validation(Box::new(report)));
        }
        let body = match self.cfg.command {
            Command::Validate => unreachable!("handled above"),
            Command::Classify => self.classify()?,
            Command::Reduce => self.reduce()?,
            Command::Stationary => self.stationary()?,
            Command::Transient => self.transient()?,
            Command::Compare => self.compare()?,
            Command::Sweep => self.sweep()?,
            Command::Simulate => self.simulate()?,
            Command::FirstPassage => self.first_passage()?,
            Command::Sp => self.sp()?,
        };
        Ok(Emitted { body, exit_code: 0 })
    }

    fn classify(&self) -> Result<String, CliError> {
        let p = slowchain::classify_states(&self.model)?;
        let ld = slowchain::limit_jump_matrix(&self.model, &p)?;
        json_out(&json!({
            "fast": p.fast_labels(),
            "slow": p.slow_labels(),
            "block_order": p.block_labels(),
            "omega": rows(&ld.omega),
            "slow_reachable": check_slow_reachability(&ld, &p),
        }))
    }

    fn reduce(&self) -> Result<String, CliError> {
        let r = Reduction::analyze(&self.model)?;
        let gamma_pi = self.pi()?.map(|pi| r.collapse(&pi)).transpose()?;
        json_out(&json!({
            "slow": r.chain.labels,
            "gamma": rows(r.chain.gamma.matrix()),
            "irreducible": r.is_irreducible(),
            "sufficient_condition": sufficient_condition(&r.limits),
            "gamma_pi": gamma_pi,
        }))
    }

    fn stationary(&self) -> Result<String, CliError> {
        let lambda = self.single_lambda()?;
        let mu = stationary_distribution(&self.model.generator_at(lambda)?)?;
        let r = Reduction::analyze(&self.model)?;
        let (limit, gap) = if r.is_irreducible() {
            let limit = stationary_distribution(&r.chain.gamma)?;
            let p = &r.partition;
            let fast_mass: f64 = p.fast().iter().map(|&i| mu.probs()[i]).sum();
            let slow: Vec<f64> = p.slow().iter().map(|&i| mu.probs()[i]).collect();
            let conditional = Distribution::normalized(p.slow_labels(), slow)?;
            let tv = tv_distance(&conditional, &limit)?;
            (
                Some(limit),
                Some(json!({"tv_slow": tv, "fast_mass": fast_mass, "total": tv + fast_mass})),
            )
        } else {
            (None, None)
        };
        json_out(&json!({
            "lambda": lambda,
            "mu": mu,
            "reduced_irreducible": r.is_irreducible(),
            "mu_reduced": limit,
            "gap": gap,
        }))
    }

    fn transient(&self) -> Result<String, CliError> {
        let pi = self.required_pi()?;
        let grid = self.grid()?;
        let traj = match self.cfg.lambdas.as_slice() {
            [] => {
                let r = Reduction::analyze(&self.model)?;
                transient_trajectory(&r.chain.gamma, &r.collapse(&pi)?, &grid)?
            }
            [l] => transient_trajectory(&self.model.generator_at(*l)?, &pi, &grid)?,
            _ => return Err(CliError::Usage("`transient` takes at most one --lambda".into())),
        };
        match self.cfg.format {
            Format::Csv => Ok(traj.to_csv()),
            Format::Json => json_out(&traj),
        }
    }

    fn compare(&self) -> Result<String, CliError> {
        let lambda = self.single_lambda()?;
        let pi = self.required_pi()?;
        let grid = self.grid()?;
        let r = Reduction::analyze(&self.model)?;
        let s = sup_tv_on_grid(&self.model, lambda, &r, &pi, &grid)?;
        match self.cfg.format {
            Format::Csv => Ok(csv_table(
                "lambda,sup_tv,argmax_t",
                [(format_sig12(lambda), vec![s.sup, s.argmax_t])],
            )),
            Format::Json => json_out(&json!({"lambda": lambda, "sup_tv": s.sup, "argmax_t": s.argmax_t, "grid": grid})),
        }
    }

    fn sweep(&self) -> Result<String, CliError> {
        if self.cfg.lambdas.is_empty() {
            return Err(CliError::Usage("`sweep` needs --lambdas".into()));
        }
        let pi = self.required_pi()?;
        let res = lambda_sweep(&self.model, &pi, &self.grid()?, &self.cfg.lambdas)?;
        match self.cfg.format {
            Format::Csv => Ok(res.to_csv()),
            Format::Json => json_out(&res),
        }
    }

    fn simulate(&self) -> Result<String, CliError> {
        let lambda = self.single_lambda()?;
        let pi = self.required_pi()?;
        let t = self.t_end()?;
        let g = self.model.generator_at(lambda)?;
        let emp = empirical_distribution(&g, &pi, t, self.cfg.n_paths, self.cfg.seed)?;
        match self.cfg.format {
            Format::Csv => Ok(csv_table(
                "state,probability,stderr",
                emp.dist
                    .labels()
                    .iter()
                    .zip(emp.dist.probs())
                    .zip(&emp.stderr)
                    .map(|((l, p), s)| (l.clone(), vec![*p, *s])),
            )),
            Format::Json => json_out(&json!({
                "lambda": lambda, "t": t, "seed": self.cfg.seed, "empirical": emp,
            })),
        }
    }

    fn first_passage(&self) -> Result<String, CliError> {
        let lambda = self.single_lambda()?;
        let pi = self.required_pi()?;
        let p = slowchain::classify_states(&self.model)?;
        let exact = first_passage_distribution(&self.model, lambda, &pi)?;
        let sample = sample_first_passage(
            &self.model,
            lambda,
            &pi,
            &p,
            self.cfg.n_paths,
            self.cfg.seed,
            DEFAULT_JUMP_BUDGET,
        )?;
        let table: Vec<(String, Vec<f64>)> = exact
            .labels()
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let row = vec![
                    exact.probs()[k],
                    sample.hitting.dist.probs()[k],
                    sample.hitting.stderr[k],
                ];
                (l.clone(), row)
            })
            .collect();
        match self.cfg.format {
            Format::Csv => Ok(csv_table("state,formula,empirical,stderr", table)),
            Format::Json => {
                let states: Vec<_> = table
                    .iter()
                    .map(|(l, v)| json!({"state": l, "formula": v[0], "empirical": v[1], "stderr": v[2]}))
                    .collect();
                json_out(&json!({
                    "lambda": lambda,
                    "n_paths": self.cfg.n_paths,
                    "seed": self.cfg.seed,
                    "states": states,
                    "passage_time_quantiles": sample.quantiles,
                }))
            }
        }
    }

    fn sp(&self) -> Result<String, CliError> {
        let report = sp_report(&self.model)?;
        let gamma_pi = match self.pi()? {
            Some(pi) => {
                let d = sp_decompose(&self.model)?;
                let p = sp_classify(&d)?;
                Some(sp_collapse(&d, &p, &pi)?)
            }
            None => None,
        };
        json_out(&json!({ "report": report, "gamma_pi": gamma_pi }))
    }
}

/// Runs the subcommand and returns what it would write.
pub fn execute(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let text = std::fs::read_to_string(&cfg.model).map_err(|e| io_error(&cfg.model, e))?;
    let model = ParamCtmc::from_json(&text)?;
    Session { cfg, model }.run()
}

/// Runs the subcommand, writes its result to `--output` or stdout and any
/// error as JSON on stderr, and returns the process exit code.
pub fn run_command(cfg: &RunConfig) -> i32 {
    let outcome = execute(cfg).and_then(|emitted| {
        match &cfg.output {
            Some(path) => std::fs::write(path, &emitted.body).map_err(|e| io_error(path, e))?,
            None if !cfg.quiet => {
                let mut out = std::io::stdout().lock();
                out.write_all(emitted.body.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| io_error(std::path::Path::new("<stdout>"), e))?;
            }
            None => {}
        }
        Ok(emitted.exit_code)
    });
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}
