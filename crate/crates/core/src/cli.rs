//! Command-line frontend: argument parsing, experiment dispatch and the JSON
//! and CSV artifacts each command emits.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bayes_tomo::{bloch_ball_grid, convergence_experiment, GridSpec, PriorGrid};
use crate::classical::{
    anticorrelation_table, enumerated_representation, extension_feasible_classical,
    finite_representation, is_symmetric_dist, limit_convergence_demo, ClassicalCertificate,
    CountFamily,
};
use crate::definetti::{
    induced_sequence_distribution, mix_product_operators, reconstruct_multisystem_operator,
    witness_report,
};
use crate::error::Error;
use crate::exchange::{
    extension_feasible, ghz_state, is_symmetric, pure_marginal_shortcut, MultiSystemState,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::opalg::{ComplexMatrix, HermitianOperator, SubsystemShape};
use crate::random::{random_qubit, random_weights};
use crate::realhilbert::{
    dimension_gap, real_basis_count, real_product_span_residual, sigma2_ensemble,
    sigma2_pair_state, validate_real_state,
};
use crate::scalar::Rational;
use crate::states_povm::{
    build_minimal_ic_povm, density_from_bloch, dual_frame, tetrahedron_povm, BlochVector,
    DensityOperator, Povm,
};

/// Schema identifier carried by every envelope.
pub const SCHEMA: &str = "qdf/1";
/// Seed used when neither `--seed` nor `QDF_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;
/// Largest `M` accepted by the classical commands.
pub const MAX_URN: usize = 512;
/// Largest `M` for which `classical urn` also enumerates the full table.
pub const MAX_ENUMERATED_URN: usize = 16;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "qdf",
    version,
    about = "Quantum and classical de Finetti experiments"
)]
pub struct Cli {
    /// RNG seed; falls back to QDF_SEED, then 42.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Also write the command's table as CSV to this path.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Build a POVM and report its frame properties.
    #[command(subcommand)]
    Povm(PovmCommand),
    /// Mix, measure and reconstruct multi-qubit states.
    #[command(subcommand)]
    Definetti(DefinettiCommand),
    /// Bayesian tomography experiments.
    #[command(subcommand)]
    Tomo(TomoCommand),
    /// Symmetric objects that admit no exchangeable extension.
    Counterexample {
        #[arg(value_enum)]
        variant: Counterexample,
    },
    /// Urn representation of binary exchangeable sequences.
    #[command(subcommand)]
    Classical(ClassicalCommand),
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PovmCommand {
    Build(PovmBuild),
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(group(ArgGroup::new("kind").required(true).args(["d", "tetrahedron"])))]
pub struct PovmBuild {
    /// Hilbert-space dimension of a minimal informationally complete POVM.
    #[arg(long = "d")]
    pub d: Option<usize>,
    /// The four-outcome qubit tetrahedron POVM.
    #[arg(long)]
    pub tetrahedron: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DefinettiCommand {
    Roundtrip(Roundtrip),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Random qubit states with random weights.
    Random,
    /// Equal mixture of the two sigma_2 eigenstates.
    Real,
    /// diag(1.25, -0.25) with weight 0.1 next to I/2.
    Nonphysical,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Roundtrip {
    #[arg(long, value_enum, default_value_t = EnsembleKind::Random)]
    pub ensemble: EnsembleKind,
    /// Number of systems.
    #[arg(long = "n", default_value_t = 2)]
    pub n: usize,
    /// Components of a random ensemble.
    #[arg(long, default_value_t = 3)]
    pub components: usize,
    /// Even system counts for the witness growth table.
    #[arg(
        long = "witness-n",
        value_delimiter = ',',
        default_value = "2,4,6,8,10,12,14,16,18,20,22"
    )]
    pub witness_n: Vec<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TomoCommand {
    Run(TomoRun),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorShape {
    Uniform,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TomoPovm {
    Tetrahedron,
    MinimalIc,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TomoRun {
    /// Cumulative numbers of trials at which to report.
    #[arg(
        long = "k-list",
        value_delimiter = ',',
        default_value = "100,1000,10000"
    )]
    pub k_list: Vec<u64>,
    /// Total grid points including the center.
    #[arg(long = "grid-points", default_value_t = 200)]
    pub grid_points: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1.0")]
    pub radii: Vec<f64>,
    #[arg(long = "prior-a", value_enum, default_value_t = PriorShape::Uniform)]
    pub prior_a: PriorShape,
    #[arg(long = "prior-b", value_enum, default_value_t = PriorShape::Mixed)]
    pub prior_b: PriorShape,
    /// Bloch vector of the true state.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0,0,0.5"
    )]
    pub bloch: Vec<f64>,
    #[arg(long, value_enum, default_value_t = TomoPovm::Tetrahedron)]
    pub povm: TomoPovm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Counterexample {
    Ghz,
    Real,
    Anticorrelation,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalCommand {
    Urn(Urn),
    Limit(Limit),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Urn {
    #[arg(long = "M")]
    pub big_m: usize,
    #[arg(long = "N")]
    pub big_n: usize,
    /// `uniform` or `point:Z` with Z in [0, 1].
    #[arg(long, default_value = "uniform", value_parser = parse_family)]
    pub family: CountFamily,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Limit {
    #[arg(long, default_value = "uniform", value_parser = parse_family)]
    pub family: CountFamily,
    #[arg(long = "N")]
    pub big_n: usize,
    #[arg(long = "M-list", value_delimiter = ',', required = true)]
    pub m_list: Vec<usize>,
}

fn parse_family(s: &str) -> std::result::Result<CountFamily, String> {
    if s == "uniform" {
        return Ok(CountFamily::Uniform);
    }
    let z = s
        .strip_prefix("point:")
        .ok_or_else(|| format!("unknown family '{s}', expected 'uniform' or 'point:Z'"))?;
    let z: f64 = z
        .parse()
        .map_err(|e| format!("bad point mass '{z}': {e}"))?;
    if !(0.0..=1.0).contains(&z) {
        return Err(format!("point mass {z} outside [0, 1]"));
    }
    Ok(CountFamily::PointMass { z })
}

/// Echo of the resolved experiment parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<u64>>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_spec: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    pub format: Format,
    /// Every parsed argument of the subcommand.
    pub args: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub schema: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub version: String,
    pub payload: Value,
    pub wall_time_ms: f64,
}

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e {
                Error::Resource(_) | Error::Overflow(_) => 3,
                Error::PriorSupport(_) | Error::DegeneratePosterior | Error::NotAWitness { .. } => {
                    4
                }
                Error::Numerical(_)
                | Error::NotPositiveDefinite { .. }
                | Error::NotInformationallyComplete { .. } => 5,
                _ => 2,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Payload plus an optional CSV rendering of its main table.
pub struct CommandOutput {
    pub payload: Value,
    pub csv: Option<String>,
}

/// Parsed command line with the seed resolved.
pub struct Resolved {
    pub cli: Cli,
    pub seed: u64,
}

/// `--seed`, else `QDF_SEED`, else [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> CliResult<u64> {
    match (flag, env) {
        (Some(s), _) => Ok(s),
        (None, Some(v)) => v.trim().parse().map_err(|_| {
            CliError::Config(format!("QDF_SEED='{v}' is not a 64-bit unsigned integer"))
        }),
        (None, None) => Ok(DEFAULT_SEED),
    }
}

impl Resolved {
    pub fn new(cli: Cli) -> CliResult<Self> {
        let env = std::env::var("QDF_SEED").ok();
        let seed = resolve_seed(cli.seed, env.as_deref())?;
        Ok(Self { cli, seed })
    }

    pub fn command_name(&self) -> String {
        match &self.cli.command {
            Command::Povm(PovmCommand::Build(_)) => "povm build".into(),
            Command::Definetti(DefinettiCommand::Roundtrip(_)) => "definetti roundtrip".into(),
            Command::Tomo(TomoCommand::Run(_)) => "tomo run".into(),
            Command::Counterexample { variant } => {
                format!("counterexample {}", enum_name(variant))
            }
            Command::Classical(ClassicalCommand::Urn(_)) => "classical urn".into(),
            Command::Classical(ClassicalCommand::Limit(_)) => "classical limit".into(),
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        let mut config = ExperimentConfig {
            command: self.command_name(),
            d: None,
            n: None,
            k: None,
            seed: self.seed,
            grid_spec: None,
            output_path: self.cli.output.as_ref().map(|p| p.display().to_string()),
            format: self.cli.format,
            args: serde_json::to_value(&self.cli.command).expect("arguments serialize"),
        };
        match &self.cli.command {
            Command::Povm(PovmCommand::Build(b)) => {
                config.d = Some(if b.tetrahedron { 2 } else { b.d.unwrap_or(0) });
            }
            Command::Definetti(DefinettiCommand::Roundtrip(r)) => {
                config.d = Some(2);
                config.n = Some(r.n);
            }
            Command::Tomo(TomoCommand::Run(t)) => {
                config.d = Some(2);
                config.k = Some(t.k_list.clone());
                config.grid_spec = Some(GridSpec {
                    radii: t.radii.clone(),
                    points: t.grid_points,
                });
            }
            Command::Classical(ClassicalCommand::Urn(u)) => config.n = Some(u.big_n),
            Command::Classical(ClassicalCommand::Limit(l)) => config.n = Some(l.big_n),
            Command::Counterexample { .. } => {}
        }
        config
    }

    /// Runs the command without touching the filesystem or stdout.
    pub fn execute(&self) -> CliResult<CommandOutput> {
        match &self.cli.command {
            Command::Povm(PovmCommand::Build(b)) => povm_build(b),
            Command::Definetti(DefinettiCommand::Roundtrip(r)) => definetti_roundtrip(r, self.seed),
            Command::Tomo(TomoCommand::Run(t)) => tomo_run(t, self.seed),
            Command::Counterexample { variant } => counterexample(*variant),
            Command::Classical(ClassicalCommand::Urn(u)) => classical_urn(u),
            Command::Classical(ClassicalCommand::Limit(l)) => classical_limit(l),
        }
    }

    pub fn envelope(&self) -> CliResult<(ResultEnvelope, Option<String>)> {
        let start = Instant::now();
        let out = self.execute()?;
        let envelope = ResultEnvelope {
            schema: SCHEMA.into(),
            command: self.command_name(),
            config: self.config(),
            version: env!("CARGO_PKG_VERSION").into(),
            payload: out.payload,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        Ok((envelope, out.csv))
    }
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

/// Parses `args`, runs the command, writes its artifacts and returns the exit code.
pub fn run<I, S>(args: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_parsed(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_parsed(cli: Cli) -> CliResult<()> {
    let resolved = Resolved::new(cli)?;
    let (envelope, csv) = resolved.envelope()?;
    if let Some(path) = &resolved.cli.csv {
        let table = csv.as_ref().ok_or_else(|| {
            CliError::Config(format!("'{}' produces no CSV table", envelope.command))
        })?;
        std::fs::write(path, table)?;
    }
    let main = match resolved.cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&envelope).expect("envelope serializes");
            s.push('\n');
            s
        }
        Format::Csv => csv.ok_or_else(|| {
            CliError::Config(format!("'{}' produces no CSV table", envelope.command))
        })?,
    };
    match &resolved.cli.output {
        Some(path) => std::fs::write(path, main)?,
        None => print!("{main}"),
    }
    Ok(())
}

/// Formats a float for CSV with 17 significant digits.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Complex matrix as row-major nested `[re, im]` pairs.
pub fn matrix_json(m: &ComplexMatrix<f64>) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect();
    json!(rows)
}

fn povm_build(b: &PovmBuild) -> CliResult<CommandOutput> {
    let povm: Povm<f64> = if b.tetrahedron {
        tetrahedron_povm()
    } else {
        let d = b.d.unwrap_or(0);
        if !(2..=5).contains(&d) {
            return Err(CliError::Config(format!("--d must lie in [2, 5], got {d}")));
        }
        build_minimal_ic_povm(d)?
    };
    let frame = dual_frame(&povm)?;
    let max_probability = povm
        .elements()
        .iter()
        .map(|e| e.eig().max_value())
        .fold(0.0, f64::max);
    let mut csv = String::from("outcome,max_eigenvalue,trace\n");
    for (a, e) in povm.elements().iter().enumerate() {
        let _ = writeln!(
            csv,
            "{a},{},{}",
            csv_float(e.eig().max_value()),
            csv_float(e.trace())
        );
    }
    let payload = json!({
        "label": povm.label(),
        "d": povm.dim(),
        "n_elements": povm.len(),
        "elements": povm.elements().iter().map(|e| matrix_json(e.matrix())).collect::<Vec<_>>(),
        "identity_residual": povm.identity_residual(),
        "gram_rank": povm.gram_rank(),
        "gram_min_singular_value": frame.min_singular_value(),
        "max_outcome_probability": max_probability,
    });
    Ok(CommandOutput {
        payload,
        csv: Some(csv),
    })
}

fn nonphysical_component() -> HermitianOperator<f64> {
    HermitianOperator::from_real_diagonal(&[1.25, -0.25])
}

fn definetti_roundtrip(r: &Roundtrip, seed: u64) -> CliResult<CommandOutput> {
    if !(1..=3).contains(&r.n) {
        return Err(CliError::Config(format!(
            "--n must lie in [1, 3], got {}",
            r.n
        )));
    }
    let (weights, components): (Vec<f64>, Vec<HermitianOperator<f64>>) = match r.ensemble {
        EnsembleKind::Random => {
            if !(1..=8).contains(&r.components) {
                return Err(CliError::Config(format!(
                    "--components must lie in [1, 8], got {}",
                    r.components
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_weights(r.components, &mut rng);
            let states = (0..r.components)
                .map(|_| random_qubit::<f64, _>(&mut rng).into_operator())
                .collect();
            (w, states)
        }
        EnsembleKind::Real => {
            let e = sigma2_ensemble::<f64>();
            let ops = e.states().iter().map(|s| s.as_operator().clone()).collect();
            (e.weights().to_vec(), ops)
        }
        EnsembleKind::Nonphysical => (
            vec![0.1, 0.9],
            vec![
                nonphysical_component(),
                DensityOperator::maximally_mixed(2).into_operator(),
            ],
        ),
    };
    let mixed = mix_product_operators(&weights, &components, r.n)?;
    let povm = tetrahedron_povm::<f64>();
    let frame = dual_frame(&povm)?;
    let shape = SubsystemShape::new(2, r.n)?;
    let state = DensityOperator::new(mixed.clone())
        .ok()
        .and_then(|rho| MultiSystemState::new(shape, rho).ok());
    let mut table_csv = String::from("sequence,probability\n");
    let roundtrip = match &state {
        Some(s) => {
            let seq = induced_sequence_distribution(s, &povm)?;
            let back = reconstruct_multisystem_operator(&seq, &frame)?;
            for (i, p) in seq.probs().iter().enumerate() {
                let label: Vec<String> = seq.sequence_of(i).iter().map(|a| a.to_string()).collect();
                let _ = writeln!(table_csv, "{},{}", label.join(""), csv_float(*p));
            }
            json!({
                "residual": back.max_abs_diff(&mixed),
                "table_exchangeability_residual": seq.exchangeability_residual(),
                "state_symmetric": is_symmetric(s, 1e-10),
            })
        }
        None => Value::Null,
    };
    let nonphysical = components.iter().position(|c| c.eig().min_value() < -1e-12);
    let witness = match nonphysical {
        Some(idx) => {
            if r.witness_n.iter().any(|&n| n == 0 || n % 2 == 1) {
                return Err(CliError::Config(
                    "--witness-n entries must be positive and even".into(),
                ));
            }
            let w = witness_report(&weights, &components, idx, &r.witness_n)?;
            json!({
                "component": idx,
                "lambda": w.lambda,
                "pi": matrix_json(w.pi_op.matrix()),
                "growth": w.growth.iter().map(|(n, v)| json!([n, v])).collect::<Vec<_>>(),
                "first_exceeding_n": w.first_exceeding,
            })
        }
        None => Value::Null,
    };
    let payload = json!({
        "ensemble": r.ensemble,
        "n": r.n,
        "povm": povm.label(),
        "weights": weights,
        "components": components.iter().map(|c| matrix_json(c.matrix())).collect::<Vec<_>>(),
        "mixture_is_state": state.is_some(),
        "roundtrip": roundtrip,
        "witness": witness,
    });
    Ok(CommandOutput {
        payload,
        csv: state.map(|_| table_csv),
    })
}

fn tomo_run(t: &TomoRun, seed: u64) -> CliResult<CommandOutput> {
    if t.k_list.is_empty() {
        return Err(CliError::Config("--k-list is empty".into()));
    }
    if t.k_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Config("--k-list must be nondecreasing".into()));
    }
    if let Some(&k) = t.k_list.last() {
        if k > 10_000_000 {
            return Err(CliError::Core(Error::Resource(format!(
                "K = {k} exceeds 10^7 trials"
            ))));
        }
    }
    if t.grid_points > 20_000 {
        return Err(CliError::Core(Error::Resource(format!(
            "{} grid points exceed 20000",
            t.grid_points
        ))));
    }
    let [s1, s2, s3] = <[f64; 3]>::try_from(t.bloch.as_slice())
        .map_err(|_| CliError::Config("--bloch needs three components".into()))?;
    let truth = density_from_bloch(BlochVector::new(s1, s2, s3)?);
    let spec = GridSpec {
        radii: t.radii.clone(),
        points: t.grid_points,
    };
    let grid = bloch_ball_grid::<f64>(&spec)?;
    let make = |shape: PriorShape| match shape {
        PriorShape::Uniform => PriorGrid::uniform(grid.clone()),
        PriorShape::Mixed => PriorGrid::mixed_biased(grid.clone()),
    };
    let (prior_a, prior_b) = (make(t.prior_a)?, make(t.prior_b)?);
    let povm = match t.povm {
        TomoPovm::Tetrahedron => tetrahedron_povm(),
        TomoPovm::MinimalIc => build_minimal_ic_povm(2)?,
    };
    let trace = convergence_experiment(&prior_a, &prior_b, &truth, &povm, &t.k_list, seed)?;
    let mut csv = String::from("K,dist_ab,dist_a_true,dist_b_true\n");
    for row in &trace.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            row.k,
            csv_float(row.dist_ab),
            csv_float(row.dist_a_true),
            csv_float(row.dist_b_true)
        );
    }
    let payload = json!({
        "povm": povm.label(),
        "true_bloch": [s1, s2, s3],
        "grid_points": grid.len(),
        "prior_a": t.prior_a,
        "prior_b": t.prior_b,
        "rows": trace.rows,
        "max_normalization_error": trace.max_normalization_error,
        "final_counts": trace.final_counts,
    });
    Ok(CommandOutput {
        payload,
        csv: Some(csv),
    })
}

fn counterexample(variant: Counterexample) -> CliResult<CommandOutput> {
    let payload = match variant {
        Counterexample::Ghz => {
            let ghz = ghz_state::<f64>();
            let shortcut = pure_marginal_shortcut(&ghz, 1);
            let report = extension_feasible(&ghz, 1, DEFAULT_MAX_ITER, DEFAULT_TOL)?;
            json!({
                "n": ghz.count(),
                "symmetric": is_symmetric(&ghz, 1e-12),
                "extended_n": ghz.count() + 1,
                "shortcut_verdict": shortcut,
                "verdict": report.verdict,
                "reason": report.reason,
                "iterations": report.iterations,
            })
        }
        Counterexample::Real => {
            let op = sigma2_pair_state::<f64>();
            let validity = validate_real_state(&op);
            let span = real_product_span_residual(&op, 2)?;
            let gap = dimension_gap(2, 2)?;
            let mixed = mix_product_operators(
                sigma2_ensemble::<f64>().weights(),
                &sigma2_ensemble::<f64>()
                    .states()
                    .iter()
                    .map(|s| s.as_operator().clone())
                    .collect::<Vec<_>>(),
                2,
            )?;
            let state = MultiSystemState::new(
                SubsystemShape::new(2, 2)?,
                DensityOperator::new(mixed.clone())?,
            )?;
            let povm = tetrahedron_povm::<f64>();
            let back = reconstruct_multisystem_operator(
                &induced_sequence_distribution(&state, &povm)?,
                &dual_frame(&povm)?,
            )?;
            json!({
                "state": op.entries().chunks(4).collect::<Vec<_>>(),
                "valid": validity.valid,
                "validation": validity,
                "span_residual": span.residual_norm,
                "dimension_gap": gap,
                "real_basis_count": real_basis_count(2),
                "complex_roundtrip_residual": back.max_abs_diff(&mixed),
            })
        }
        Counterexample::Anticorrelation => {
            let table = anticorrelation_table::<Rational>();
            let ext = extension_feasible_classical(&table, 1)?;
            let certificate = match &ext.certificate {
                ClassicalCertificate::Farkas {
                    multipliers,
                    trail,
                    contradiction,
                } => json!({
                    "farkas_multipliers": multipliers.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                    "trail": trail.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    "contradiction": contradiction.as_ref().map(|c| json!({
                        "derived": c.derived.to_string(),
                        "violated": c.violated.to_string(),
                    })),
                }),
                other => {
                    return Err(CliError::Core(Error::Numerical(format!(
                        "unexpected certificate {other:?}"
                    ))))
                }
            };
            json!({
                "table": table.probs().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "symmetric": is_symmetric_dist(&table, &Rational::from_integer(0.into())),
                "extra_m": 1,
                "verdict": ext.verdict,
                "certificate": certificate,
            })
        }
    };
    Ok(CommandOutput { payload, csv: None })
}

fn check_urn_size(big_m: usize, big_n: usize) -> CliResult<()> {
    if big_m == 0 || big_m > MAX_URN {
        return Err(CliError::Config(format!(
            "--M must lie in [1, {MAX_URN}], got {big_m}"
        )));
    }
    if big_n == 0 || big_n > big_m {
        return Err(CliError::Config(format!(
            "--N must lie in [1, M], got {big_n}"
        )));
    }
    Ok(())
}

fn classical_urn(u: &Urn) -> CliResult<CommandOutput> {
    check_urn_size(u.big_m, u.big_n)?;
    let counts = u.family.at::<f64>(u.big_m)?;
    let p = finite_representation(&counts, u.big_n)?;
    let enumerated = if u.big_m <= MAX_ENUMERATED_URN {
        Some(enumerated_representation(&counts, u.big_n)?)
    } else {
        None
    };
    let residual = enumerated.as_ref().map(|e| {
        e.iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let mut csv = String::from("n,p,p_enumerated\n");
    for (n, v) in p.iter().enumerate() {
        let e = enumerated
            .as_ref()
            .map(|e| csv_float(e[n]))
            .unwrap_or_default();
        let _ = writeln!(csv, "{n},{},{e}", csv_float(*v));
    }
    let payload = json!({
        "family": u.family,
        "M": u.big_m,
        "N": u.big_n,
        "count_distribution": counts.probs(),
        "p": p,
        "p_enumerated": enumerated,
        "enumeration_residual": residual,
    });
    Ok(CommandOutput {
        payload,
        csv: Some(csv),
    })
}

fn classical_limit(l: &Limit) -> CliResult<CommandOutput> {
    if l.m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(
            "--M-list must be strictly increasing".into(),
        ));
    }
    for &m in &l.m_list {
        check_urn_size(m, l.big_n)?;
    }
    let rows = limit_convergence_demo::<f64>(&l.family, l.big_n, &l.m_list)?;
    let limit = l.family.limit(l.big_n);
    let mut csv = String::from("M,n,p,limit,gap\n");
    for row in &rows {
        for (n, v) in row.values.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{},{n},{},{},{}",
                row.m_trials,
                csv_float(*v),
                csv_float(limit[n]),
                csv_float(v - limit[n])
            );
        }
    }
    let payload = json!({
        "family": l.family,
        "N": l.big_n,
        "limit": limit,
        "rows": rows.iter().map(|r| json!({
            "M": r.m_trials,
            "values": r.values,
            "max_gap": r.max_gap,
        })).collect::<Vec<_>>(),
    });
    Ok(CommandOutput {
        payload,
        csv: Some(csv),
    })
}
