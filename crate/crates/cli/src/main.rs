use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use stoq_cli::generate::{generate_instance, GenParams, Generator};
use stoq_cli::io::{write_text, InstanceFile, MatrixPayload, ReportFile};
use stoq_cli::suite::{run_suite, Suite, SuiteConfig};
use stoq_cli::{CliError, CliResult};
use stoq_core::collapse::{compile_matrices_capped, gap_audit_with, plan};
use stoq_core::dyadic::build_sampler;
use stoq_core::extension::{extension_operator_compressed_capped, ExtensionLayout, DEFAULT_MAX_DIM};
use stoq_core::product_value::{grid_tolerance, omega_plus_alternating, omega_plus_grid};
use stoq_core::rounding::{adaptive_round, BosonicState, RoundingSchedule};
use stoq_core::tensor::{lambda_max, top_eigenpair};
use stoq_core::verifier::{acceptance_matrix, hermitian_overlap, raw_overlap};

#[derive(Parser)]
#[command(name = "stoq", version, about = "Nonnegative verifier toolkit: generators, extensions, rounding and invariant suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides every default tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    max_dim: usize,
    #[arg(long, default_value_t = 2)]
    r_actual: usize,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> SuiteConfig {
        SuiteConfig { seed: self.seed, tol: self.tol, max_dim: self.max_dim, r_actual: self.r_actual, ..SuiteConfig::default() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance file.
    Gen {
        #[arg(value_enum)]
        generator: Generator,
        #[arg(long, value_delimiter = ',', default_value = "2,2")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 6)]
        bits: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0.6)]
        weight: f64,
        #[arg(long, default_value_t = 2)]
        copies: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        mixed: bool,
        #[arg(long, default_value_t = 0.2)]
        sparsity: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Compress a verifier into G, H and M.
    Compress {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Bounds on the nonnegative product value.
    Value {
        instance: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the extension value over copy numbers.
    Extend {
        instance: PathBuf,
        #[arg(long, default_value_t = 4)]
        copies: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Round an extension state to a product witness.
    Round {
        instance: PathBuf,
        #[arg(long, default_value_t = 4)]
        copies: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Build a dyadic symmetrizer and check it.
    Symmetrizer {
        #[arg(long, default_value_t = 2)]
        copies: usize,
        #[arg(long, default_value_t = 0.25)]
        eta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Plan, compile and audit the collapse construction.
    Collapse {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 0.25)]
        eta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run an invariant suite over instance files.
    Suite {
        #[arg(value_enum)]
        suite: Suite,
        instances: Vec<PathBuf>,
        #[arg(long, default_value_t = 4)]
        copies: usize,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit(common: &Common, text: &str) -> CliResult<()> {
    match &common.out {
        Some(path) => write_text(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_with_report(common: &Common, mut data: Value, report: &ReportFile) -> CliResult<bool> {
    data["report"] = serde_json::to_value(report)?;
    emit(common, &serde_json::to_string_pretty(&data)?)?;
    if !report.passed() {
        eprintln!("{} of {} checks failed", report.summary.failed, report.summary.total);
    }
    Ok(report.passed())
}

fn run(command: Command) -> CliResult<bool> {
    match command {
        Command::Gen { generator, dims, bits, scale, weight, copies, d, mixed, sparsity, common } => {
            let params = GenParams { dims, bits, scale, weight, copies, d, mixed, sparsity };
            let inst = generate_instance(generator, &params, common.seed)?;
            emit(&common, &inst.to_json()?)?;
            Ok(true)
        }
        Command::Compress { instance, common } => {
            let inst = InstanceFile::read(&instance)?;
            let v = inst.as_verifier().ok_or_else(|| incompatible(&inst, Suite::BranchOverlap))?;
            let data = json!({
                "raw_overlap": MatrixPayload::from_operator(&raw_overlap(v)?),
                "hermitian_overlap": MatrixPayload::from_operator(&hermitian_overlap(v)?),
                "acceptance": MatrixPayload::from_operator(&acceptance_matrix(v)?),
            });
            let report = run_suite(Suite::BranchOverlap, std::slice::from_ref(&inst), &common.config())?;
            emit_with_report(&common, data, &report)
        }
        Command::Value { instance, restarts, common } => {
            let inst = InstanceFile::read(&instance)?;
            let m = inst.operator()?;
            let alt = omega_plus_alternating(&m, restarts, common.seed)?;
            let dims = m.layout().dims().to_vec();
            let mut data = json!({
                "lambda_max": lambda_max(&m)?,
                "omega_lower": alt.value,
                "witness": alt.witness.factors().iter().map(|f| f.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
            if dims.len() <= 3 && dims.iter().all(|&d| d <= 3) {
                let g = if dims.len() <= 2 && dims.iter().all(|&d| d == 2) { 400 } else { 40 };
                data["grid_value"] = json!(omega_plus_grid(&m, g)?);
                data["grid_tolerance"] = json!(grid_tolerance(dims.len(), g));
            }
            let config = SuiteConfig { restarts, ..common.config() };
            let report = run_suite(Suite::ProductValue, std::slice::from_ref(&inst), &config)?;
            emit_with_report(&common, data, &report)
        }
        Command::Extend { instance, copies, common } => {
            let inst = InstanceFile::read(&instance)?;
            let m = inst.operator()?;
            let mut sweep = Vec::new();
            for r in 1..=copies.max(1) {
                let e = extension_operator_compressed_capped(&m, r, common.max_dim)?;
                sweep.push(json!({ "copies": r, "compressed_dim": e.dim(), "lambda": lambda_max(&e)? }));
            }
            let config = SuiteConfig { copies, ..common.config() };
            let report = run_suite(Suite::Sandwich, std::slice::from_ref(&inst), &config)?;
            emit_with_report(&common, json!({ "sweep": sweep }), &report)
        }
        Command::Round { instance, copies, epsilon, common } => {
            let inst = InstanceFile::read(&instance)?;
            let m = inst.operator()?;
            let dims = m.layout().dims().to_vec();
            let state = match inst.payload {
                stoq_cli::io::Payload::BosonicState(ref s) => s.to_state()?,
                _ => {
                    let e = extension_operator_compressed_capped(&m, copies.max(1), common.max_dim)?;
                    let (_, c) = top_eigenpair(&e)?;
                    BosonicState::from_compressed(ExtensionLayout::uniform(&dims, copies.max(1))?, &c)?
                }
            };
            let schedule = RoundingSchedule::new(epsilon, &dims, 1000)?;
            let result = adaptive_round(&state, &m, &schedule)?;
            let data = json!({
                "witness": result.witness.factors().iter().map(|f| f.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "initial_value": result.initial_value,
                "achieved": result.achieved,
                "certified_loss": result.certified_loss,
                "loss_bound": result.loss_bound,
                "schedule_loss": result.schedule_loss,
                "trace": result.trace,
            });
            let config = SuiteConfig { copies, epsilon, ..common.config() };
            let report = run_suite(Suite::Rounding, std::slice::from_ref(&inst), &config)?;
            emit_with_report(&common, data, &report)
        }
        Command::Symmetrizer { copies, eta, common } => {
            let s = build_sampler(copies, eta)?;
            let tv = s.total_variation();
            let data = json!({
                "copies": s.copies(),
                "eta": s.eta(),
                "branch_bits": s.q(),
                "permutations": s.n(),
                "branches": s.big_q(),
                "full_rounds": s.l_count(),
                "identity_surplus": s.b(),
                "total_variation": tv.to_string(),
                "total_variation_f64": tv.to_f64(),
            });
            let config = SuiteConfig { copies, eta: Some(eta), ..common.config() };
            let mut report = run_suite(Suite::Symmetrizer, &[], &config)?;
            let prefix = format!("R{copies:02}/");
            report = ReportFile::new(
                report.suite.clone(),
                report.seed,
                report.records.into_iter().filter(|r| r.name.starts_with(&prefix)).collect(),
            );
            emit_with_report(&common, data, &report)
        }
        Command::Collapse { instance, c, s, eta, common } => {
            let inst = InstanceFile::read(&instance)?;
            let m = inst.operator()?;
            let dims = m.layout().dims().to_vec();
            let p = plan(dims.len(), &dims, c, s, common.r_actual)?.with_eta_actual(eta)?;
            let compiled = compile_matrices_capped(&m, &p, common.max_dim)?;
            let mut data = json!({ "plan": p, "perturbation": compiled.perturbation });
            if dims.len() <= 3 && dims.iter().all(|&d| d <= 3) {
                let planted = inst.as_matrix().and_then(|mp| mp.planted_value);
                data["audit"] = serde_json::to_value(gap_audit_with(&m, &p, &compiled, planted)?)?;
            }
            let config = SuiteConfig { c, s, eta: Some(eta), ..common.config() };
            let report = run_suite(Suite::Collapse, std::slice::from_ref(&inst), &config)?;
            emit_with_report(&common, data, &report)
        }
        Command::Suite { suite, instances, copies, eta, epsilon, common } => {
            let files = instances.iter().map(|p| InstanceFile::read(p)).collect::<CliResult<Vec<_>>>()?;
            let config = SuiteConfig { copies, eta, epsilon, ..common.config() };
            let report = run_suite(suite, &files, &config)?;
            emit(&common, &report.to_json()?)?;
            if !report.passed() {
                eprintln!("{} of {} checks failed", report.summary.failed, report.summary.total);
            }
            Ok(report.passed())
        }
    }
}

fn incompatible(inst: &InstanceFile, suite: Suite) -> CliError {
    CliError::Incompatible { index: 0, kind: inst.kind().into(), suite: suite.name().into() }
}
