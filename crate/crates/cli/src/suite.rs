//! Invariant suites over instance files.

use nalgebra::DVector;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use stoq_core::collapse::{compile_circuit, compile_matrices_capped, gap_audit_with, plan};
use stoq_core::distances::{
    check_tensorization, entropy, hellinger_squared, kl, mutual_information, split_hellinger, JointDistribution,
};
use stoq_core::dyadic::build_sampler;
use stoq_core::extension::{extension_operator_compressed_capped, sym_projector, ExtensionLayout};
use stoq_core::product_value::{grid_tolerance, omega_plus_alternating, omega_plus_grid, product_value};
use stoq_core::rounding::{adaptive_round, BosonicState, RoundingSchedule, StopReason};
use stoq_core::tensor::{extremal_eigenvalues, lambda_max, top_eigenpair, RealOperator, RegisterLayout};
use stoq_core::verifier::{
    acceptance_as_overlap, acceptance_matrix, hermitian_overlap, raw_overlap, simulate_standard_model,
    BranchOverlapVerifier, DEFAULT_SIM_CAP,
};

use crate::error::{CliError, CliResult};
use crate::io::{CheckRecord, InstanceFile, Payload, ReportFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Structure of compressed verifier matrices (verifier instances).
    BranchOverlap,
    /// Hellinger, KL and tensorization inequalities (distribution instances).
    Distances,
    /// Nonnegative product value oracles (matrix instances).
    ProductValue,
    /// Lift lower bound and monotonicity of the extension values (matrix instances).
    Sandwich,
    /// Adaptive rounding with per-step checks (matrix or bosonic-state instances).
    Rounding,
    /// Exact combinatorics of the dyadic symmetrizer (no instances).
    Symmetrizer,
    /// Dyadic extension compilation and gap bookkeeping (matrix or verifier instances).
    Collapse,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::BranchOverlap => "branch-overlap",
            Suite::Distances => "distances",
            Suite::ProductValue => "product-value",
            Suite::Sandwich => "sandwich",
            Suite::Rounding => "rounding",
            Suite::Symmetrizer => "symmetrizer",
            Suite::Collapse => "collapse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides every default tolerance when set.
    pub tol: Option<f64>,
    pub max_dim: usize,
    /// Largest copy number swept by the sandwich, rounding and symmetrizer suites.
    pub copies: usize,
    pub r_actual: usize,
    pub eta: Option<f64>,
    pub epsilon: f64,
    pub restarts: usize,
    pub c: f64,
    pub s: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: None,
            max_dim: stoq_core::extension::DEFAULT_MAX_DIM,
            copies: 4,
            r_actual: 2,
            eta: None,
            epsilon: 0.5,
            restarts: 50,
            c: 0.7,
            s: 0.5,
        }
    }
}

impl SuiteConfig {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

/// Runs `suite` over `instances`; records are sorted by name.
pub fn run_suite(suite: Suite, instances: &[InstanceFile], config: &SuiteConfig) -> CliResult<ReportFile> {
    let mut records = Vec::new();
    if suite == Suite::Symmetrizer {
        symmetrizer_checks(config, &mut records)?;
    }
    for (index, inst) in instances.iter().enumerate() {
        let incompatible =
            || CliError::Incompatible { index, kind: inst.kind().into(), suite: suite.name().into() };
        let prefix = format!("{index:03}");
        match (suite, &inst.payload) {
            (Suite::BranchOverlap, Payload::Verifier(v)) => branch_checks(&prefix, v, config, index, &mut records)?,
            (Suite::Distances, Payload::Distribution(d)) => {
                let p = JointDistribution::new(RegisterLayout::new(d.dims.clone())?, d.probs.clone())?;
                distance_checks(&prefix, &p, config, &mut records)?;
            }
            (Suite::ProductValue, Payload::Matrix(_)) => value_checks(&prefix, inst, config, &mut records)?,
            (Suite::Sandwich, Payload::Matrix(_)) => sandwich_checks(&prefix, inst, config, &mut records)?,
            (Suite::Rounding, Payload::Matrix(_) | Payload::BosonicState(_)) => {
                rounding_checks(&prefix, inst, config, &mut records)?
            }
            (Suite::Collapse, Payload::Matrix(_) | Payload::Verifier(_)) => {
                collapse_checks(&prefix, inst, config, &mut records)?
            }
            _ => return Err(incompatible()),
        }
    }
    Ok(ReportFile::new(suite.name(), config.seed, records))
}

fn name(prefix: &str, check: &str) -> String {
    format!("{prefix}/{check}")
}

fn branch_checks(
    prefix: &str,
    v: &BranchOverlapVerifier,
    config: &SuiteConfig,
    index: usize,
    out: &mut Vec<CheckRecord>,
) -> CliResult<()> {
    let g = raw_overlap(v)?;
    let h = hermitian_overlap(v)?;
    let m = acceptance_matrix(v)?;
    let min_g = g.matrix().min();
    out.push(CheckRecord::at_least(name(prefix, "raw-overlap-nonnegative"), "entrywise nonnegativity of G", min_g, 0.0, 0.0));
    out.push(CheckRecord::at_most(
        name(prefix, "hermitian-overlap-symmetric"),
        "H equals its transpose",
        h.asymmetry(),
        0.0,
        config.tol(1e-12),
    ));
    out.push(CheckRecord::at_most(
        name(prefix, "hermitian-overlap-norm"),
        "‖H‖ ≤ 1",
        h.operator_norm(),
        1.0,
        config.tol(1e-9),
    ));
    let (lo, hi) = extremal_eigenvalues(&m)?;
    out.push(CheckRecord::at_least(name(prefix, "acceptance-min-eigenvalue"), "0 ⪯ (I+H)/2", lo, 0.0, config.tol(1e-9)));
    out.push(CheckRecord::at_most(name(prefix, "acceptance-max-eigenvalue"), "(I+H)/2 ⪯ I", hi, 1.0, config.tol(1e-9)));
    if v.num_bits() < DEFAULT_SIM_CAP {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (index as u64).wrapping_mul(0x9e37_79b9));
        let psi = random_unit(&mut rng, m.dim());
        let sim = simulate_standard_model(v, &psi)?;
        out.push(CheckRecord::close(
            name(prefix, "standard-model-agreement"),
            "controlled-circuit simulation equals ½(1+⟨ψ,Hψ⟩)",
            sim,
            0.5 * (1.0 + h.quadratic_form(&psi)),
            config.tol(1e-9),
        ));
        let lifted = hermitian_overlap(&acceptance_as_overlap(v)?)?;
        out.push(CheckRecord::at_most(
            name(prefix, "acceptance-as-overlap"),
            "one extra branch bit turns (I+H)/2 into a hermitian overlap",
            lifted.max_abs_diff(&m),
            0.0,
            config.tol(1e-12),
        ));
    }
    Ok(())
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    let norm = v.norm();
    if norm == 0.0 {
        DVector::from_element(n, 1.0 / (n as f64).sqrt())
    } else {
        v / norm
    }
}

fn distance_checks(prefix: &str, p: &JointDistribution, config: &SuiteConfig, out: &mut Vec<CheckRecord>) -> CliResult<()> {
    let tol = config.tol(1e-12);
    let product = p.product_of_marginals();
    out.push(CheckRecord::at_least(
        name(prefix, "hellinger-kl-product"),
        "D_KL(P‖∏p_i) ≥ 2 d_H(P,∏p_i)²",
        kl(p, &product)?,
        2.0 * hellinger_squared(p, &product)?,
        tol,
    ));
    let uniform = JointDistribution::uniform(p.layout().clone());
    out.push(CheckRecord::at_least(
        name(prefix, "hellinger-kl-uniform"),
        "D_KL(P‖U) ≥ 2 d_H(P,U)²",
        kl(p, &uniform)?,
        2.0 * hellinger_squared(p, &uniform)?,
        tol,
    ));
    out.push(CheckRecord::at_least(name(prefix, "entropy-nonnegative"), "H(P) ≥ 0", entropy(p), 0.0, tol));
    let m = p.num_coords();
    if m >= 2 {
        let rest: Vec<usize> = (1..m).collect();
        let mi = mutual_information(p, &[0], &rest)?;
        let split = split_hellinger(p, 0);
        out.push(CheckRecord::at_least(
            name(prefix, "mutual-information-hellinger"),
            "I(X_1; rest) ≥ 2 d_H(P, p_1⊗p_rest)²",
            mi,
            2.0 * split * split,
            tol,
        ));
        let delta = (0..m - 1).map(|i| split_hellinger(p, i)).fold(0.0, f64::max);
        let report = check_tensorization(p, delta)?;
        out.push(
            CheckRecord::at_most(
                name(prefix, "tensorization"),
                "local δ-independence gives d_H(P,∏p_i) ≤ (m−1)δ",
                report.global,
                (m - 1) as f64 * delta,
                tol,
            )
            .with_value("delta", delta),
        );
    }
    Ok(())
}

fn in_grid_regime(dims: &[usize]) -> bool {
    dims.len() <= 3 && dims.iter().all(|&d| d <= 3)
}

fn value_checks(prefix: &str, inst: &InstanceFile, config: &SuiteConfig, out: &mut Vec<CheckRecord>) -> CliResult<()> {
    let payload = inst.as_matrix().expect("matrix instance");
    let m = payload.to_operator()?;
    let lambda = lambda_max(&m)?;
    let alt = omega_plus_alternating(&m, config.restarts, config.seed)?;
    out.push(CheckRecord::at_most(
        name(prefix, "alternating-below-lambda"),
        "ω₊ ≤ λ_max(M)",
        alt.value,
        lambda,
        config.tol(1e-9),
    ));
    let min_step = alt
        .histories
        .iter()
        .flat_map(|h| h.windows(2).map(|w| w[1] - w[0]))
        .fold(0.0, f64::min);
    out.push(CheckRecord::at_least(
        name(prefix, "alternating-monotone"),
        "Perron updates never decrease the product value",
        min_step,
        0.0,
        config.tol(1e-12),
    ));
    let dims = m.layout().dims().to_vec();
    if in_grid_regime(&dims) {
        let g = if dims.len() == 2 && dims.iter().all(|&d| d == 2) { 400 } else { 40 };
        let grid = omega_plus_grid(&m, g)?;
        let gtol = grid_tolerance(dims.len(), g);
        out.push(
            CheckRecord::at_most(
                name(prefix, "alternating-within-grid"),
                "feasible values stay below the grid value plus its accuracy",
                alt.value,
                grid,
                gtol,
            )
            .with_value("grid_points", g as f64),
        );
    }
    if let Some(w) = payload.to_witness()? {
        let value = product_value(&m, &w)?;
        if let Some(planted) = payload.planted_value {
            out.push(CheckRecord::close(
                name(prefix, "planted-witness-value"),
                "the planted witness attains its recorded value",
                value,
                planted,
                config.tol(1e-12),
            ));
        }
        out.push(CheckRecord::at_most(
            name(prefix, "planted-below-lambda"),
            "product values never exceed λ_max(M)",
            value,
            lambda,
            config.tol(1e-9),
        ));
    }
    if inst.metadata.generator == "entangled" {
        let d = dims[0] as f64;
        out.push(CheckRecord::close(name(prefix, "entangled-omega"), "ω₊(|Φ⟩⟨Φ|) = 1/d", alt.value, 1.0 / d, config.tol(1e-6)));
        out.push(CheckRecord::close(name(prefix, "entangled-lambda"), "λ_max(|Φ⟩⟨Φ|) = 1", lambda, 1.0, config.tol(1e-9)));
    }
    Ok(())
}

fn best_lower_bound(inst: &InstanceFile, m: &RealOperator, config: &SuiteConfig) -> CliResult<f64> {
    let mut best = omega_plus_alternating(m, config.restarts, config.seed)?.value;
    if let Some(w) = inst.as_matrix().and_then(|p| p.to_witness().transpose()) {
        best = best.max(product_value(m, &w?)?);
    }
    Ok(best)
}

fn sandwich_checks(prefix: &str, inst: &InstanceFile, config: &SuiteConfig, out: &mut Vec<CheckRecord>) -> CliResult<()> {
    let m = inst.operator()?;
    let tol = config.tol(1e-9);
    let omega = best_lower_bound(inst, &m, config)?;
    let mut prev: Option<f64> = None;
    for r in 1..=config.copies.max(1) {
        let e = extension_operator_compressed_capped(&m, r, config.max_dim)?;
        let lambda = lambda_max(&e)?;
        let tag = format!("R{r:02}");
        out.push(
            CheckRecord::at_most(name(prefix, &format!("{tag}/lift")), "ω₊ ≤ Λ_R", omega, lambda, tol)
                .with_value("compressed_dim", e.dim() as f64),
        );
        if let Some(p) = prev {
            out.push(CheckRecord::at_most(name(prefix, &format!("{tag}/monotone")), "Λ_R ≤ Λ_{R−1}", lambda, p, tol));
        } else {
            out.push(CheckRecord::close(name(prefix, "R01/equals-lambda-max"), "Λ_1 = λ_max(M)", lambda, lambda_max(&m)?, tol));
        }
        prev = Some(lambda);
    }
    if inst.metadata.generator == "entangled" {
        let d = m.layout().dims()[0] as f64;
        out.push(CheckRecord::close(name(prefix, "omega"), "ω₊(|Φ⟩⟨Φ|) = 1/d", omega, 1.0 / d, config.tol(1e-6)));
    }
    Ok(())
}

fn rounding_checks(prefix: &str, inst: &InstanceFile, config: &SuiteConfig, out: &mut Vec<CheckRecord>) -> CliResult<()> {
    let m = inst.operator()?;
    let dims = m.layout().dims().to_vec();
    let state = match &inst.payload {
        Payload::BosonicState(s) => s.to_state()?,
        _ => {
            let r = config.copies.max(1);
            let e = extension_operator_compressed_capped(&m, r, config.max_dim)?;
            let (_, c) = top_eigenpair(&e)?;
            BosonicState::from_compressed(ExtensionLayout::uniform(&dims, r)?, &c)?
        }
    };
    let schedule = RoundingSchedule::new(config.epsilon, &dims, 1000)?;
    let result = adaptive_round(&state, &m, &schedule)?;
    let tol = config.tol(1e-9);
    let (d2, mu) = (schedule.delta * schedule.delta, schedule.mu);
    for (j, step) in result.trace.steps.iter().enumerate() {
        let tag = format!("step{j:03}");
        out.push(CheckRecord::close(
            name(prefix, &format!("{tag}/value-preserved")),
            "Σ_a w_a V(ρ^a) = V(ρ)",
            step.averaged_value,
            step.value_before,
            tol,
        ));
        if step.hypothesis {
            out.push(CheckRecord::at_most(
                name(prefix, &format!("{tag}/entropy-drop")),
                "Σ_a w_a H(ρ^a) ≤ H(ρ) − 2δ²",
                step.averaged_entropy,
                step.entropy_before - 2.0 * d2,
                tol,
            ));
            out.push(CheckRecord::at_least(
                name(prefix, &format!("{tag}/potential-increase")),
                "Φ(next) ≥ Φ(current) + 2μδ²",
                step.potential_after,
                step.potential_before + 2.0 * mu * d2,
                tol,
            ));
        }
        out.push(CheckRecord::at_least(
            name(prefix, &format!("{tag}/potential-nondecreasing")),
            "Φ never decreases along the chosen path",
            step.potential_after,
            step.potential_before,
            tol,
        ));
        out.push(
            CheckRecord::at_least(
                name(prefix, &format!("{tag}/residual-support")),
                "residuals stay separately symmetric",
                if step.residual_support_ok { 1.0 } else { 0.0 },
                1.0,
                0.0,
            )
            .with_value("block", step.block as f64)
            .with_value("outcome", step.outcome as f64),
        );
    }
    out.push(CheckRecord::at_least(
        name(prefix, "direct-round-bound"),
        "product value ≥ V − 2√2·γ",
        result.terminal.achieved,
        result.terminal.tested_value - 2.0 * std::f64::consts::SQRT_2 * result.terminal.gamma,
        tol,
    ));
    out.push(
        CheckRecord::at_least(
            name(prefix, "loss-bound"),
            "product value ≥ V(ρ) − μH(ρ) − 2√2·γ",
            result.achieved,
            result.initial_value - result.loss_bound,
            tol,
        )
        .with_value("steps", result.trace.steps.len() as f64)
        .with_value("copies_exhausted", if result.trace.stop == StopReason::CopiesExhausted { 1.0 } else { 0.0 })
        .with_value("schedule_loss", result.schedule_loss)
        .with_value("certified_loss", result.certified_loss),
    );
    Ok(())
}

fn symmetrizer_checks(config: &SuiteConfig, out: &mut Vec<CheckRecord>) -> CliResult<()> {
    let etas = match config.eta {
        Some(e) => vec![e],
        None => vec![0.5, 0.25, 0.1],
    };
    for r in 1..=config.copies.clamp(1, 6) {
        for &eta in &etas {
            let s = build_sampler(r, eta)?;
            let tag = format!("R{r:02}/eta{eta}");
            let tv = s.total_variation();
            let tv_f = num_to_f64(&tv);
            let mut rec = CheckRecord::at_most(format!("{tag}/total-variation"), "Σ|p(τ)−1/N| ≤ η (exact)", tv_f, eta, 0.0);
            rec.pass = s.tv_within_eta();
            out.push(rec.with_value("closed_form", num_to_f64(&s.total_variation_closed_form())));
            out.push(CheckRecord::at_least(
                format!("{tag}/inverse-invariance"),
                "p(τ) = p(τ⁻¹) exactly",
                if s.is_inverse_invariant() { 1.0 } else { 0.0 },
                1.0,
                0.0,
            ));
            out.push(
                CheckRecord::close(format!("{tag}/branch-bits"), "q = ⌈log₂(2N/η)⌉", s.q() as f64, s.q_estimate() as f64, 0.0)
                    .with_value("b", s.b() as f64),
            );
            if 2usize.pow(r as u32) <= config.max_dim && r <= 4 {
                let p = s.approx_projector_capped(2, config.max_dim)?;
                out.push(CheckRecord::at_most(format!("{tag}/self-adjoint"), "Π̃ = Π̃ᵀ", p.asymmetry(), 0.0, config.tol(1e-14)));
                out.push(CheckRecord::at_least(format!("{tag}/nonnegative"), "Π̃ ≥ 0 entrywise", p.matrix().min(), 0.0, 0.0));
                out.push(CheckRecord::at_most(format!("{tag}/contraction"), "‖Π̃‖ ≤ 1", p.operator_norm(), 1.0, config.tol(1e-12)));
                let dev = p.sub(&sym_projector(2, r)?)?.operator_norm();
                out.push(CheckRecord::at_most(format!("{tag}/projector-deviation"), "‖Π̃ − Π‖ ≤ η", dev, eta, config.tol(1e-9)));
            }
        }
    }
    Ok(())
}

fn num_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn collapse_checks(prefix: &str, inst: &InstanceFile, config: &SuiteConfig, out: &mut Vec<CheckRecord>) -> CliResult<()> {
    let m = inst.operator()?;
    let dims = m.layout().dims().to_vec();
    let eta = config.eta.unwrap_or(0.25);
    let p = plan(dims.len(), &dims, config.c, config.s, config.r_actual)?.with_eta_actual(eta)?;
    let compiled = compile_matrices_capped(&m, &p, config.max_dim)?;
    let tol = config.tol(1e-9);
    out.push(CheckRecord::close(
        name(prefix, "gap-identity"),
        "c′ − s′ = 11Δ/32",
        p.c_prime - p.s_prime,
        p.gap_prime,
        config.tol(1e-14),
    ));
    out.push(CheckRecord::at_most(
        name(prefix, "perturbation"),
        "‖Ẽ − 𝓔‖ ≤ 2(k−1)η",
        compiled.perturbation,
        p.perturbation_bound(),
        tol,
    ));
    let (lo, hi) = extremal_eigenvalues(&compiled.tilde_e)?;
    out.push(CheckRecord::at_least(name(prefix, "tilde-e-psd"), "0 ⪯ Ẽ", lo, 0.0, tol));
    out.push(CheckRecord::at_most(name(prefix, "tilde-e-contraction"), "Ẽ ⪯ I", hi, 1.0, tol));
    out.push(CheckRecord::at_most(
        name(prefix, "tilde-c-half-shift"),
        "C̃ = (I + Ẽ)/2",
        compiled.tilde_c.max_abs_diff(&compiled.tilde_e.half_shift()),
        0.0,
        config.tol(1e-12),
    ));
    if in_grid_regime(&dims) {
        let planted = inst.as_matrix().and_then(|mp| mp.planted_value);
        let audit = gap_audit_with(&m, &p, &compiled, planted)?;
        out.push(CheckRecord::at_most(
            name(prefix, "eigenvalue-perturbation"),
            "|λ_max(Ẽ) − λ_max(𝓔)| ≤ 2(k−1)η",
            (audit.lambda_tilde - audit.lambda_exact).abs(),
            audit.perturbation_bound,
            tol,
        ));
        out.push(
            CheckRecord::at_least(
                name(prefix, "yes-case-lift"),
                "λ_max(Ẽ) ≥ ω₊_lower − 2(k−1)η",
                audit.lambda_tilde,
                audit.yes_lower_bound,
                tol,
            )
            .with_value("omega_lower", audit.omega_lower)
            .with_value("omega_upper", audit.omega_upper)
            .with_value("no_case_bound_uncertified", audit.no_case_bound)
            .with_value("no_case_observed_slack", audit.no_case_observed_slack),
        );
    }
    if let Some(v) = inst.as_verifier() {
        let sampler = p.sampler()?;
        let k = v.witness_registers().len();
        let witness: usize = v.witness_registers()[..k - 1].iter().sum::<usize>() * p.r_actual
            + v.witness_registers()[k - 1];
        let bits = witness + v.ancilla().z + 2 * (k - 1) * sampler.q() as usize + v.ancilla().r + 1;
        if bits <= DEFAULT_SIM_CAP {
            let circuit = compile_circuit(v, &p)?;
            out.push(CheckRecord::at_most(
                name(prefix, "circuit-matches-matrices"),
                "compiled circuit's hermitian overlap equals Ẽ",
                hermitian_overlap(&circuit)?.max_abs_diff(&compiled.tilde_e),
                0.0,
                tol,
            ));
        }
    }
    Ok(())
}
