//! Collapsing `k` unentangled provers to one: the parameter schedule, the
//! dyadic separately symmetric extension as matrices and as a circuit, and
//! the gap bookkeeping.

use serde::{Deserialize, Serialize};

use crate::dyadic::{build_sampler, DyadicPermutationSampler};
use crate::error::{Error, Result};
use crate::extension::{extension_operator_capped, ExtensionLayout, DEFAULT_MAX_DIM};
use crate::permutation::Permutation;
use crate::product_value::{grid_tolerance, omega_plus_alternating, omega_plus_grid};
use crate::rounding::entropy_budget;
use crate::tensor::{embed_on_tested, lambda_max, psd_interval_check, tensor, RealOperator, RegisterLayout, PSD_TOL};
use crate::verifier::{AncillaSpec, BranchOverlapVerifier, Gate, ReversibleCircuit, Simulator};

pub const PERTURBATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapsePlan {
    pub k: usize,
    pub base_dims: Vec<usize>,
    pub c: f64,
    pub s: f64,
    /// `Δ = c − s`.
    pub delta_gap: f64,
    /// `Δ/4`.
    pub epsilon: f64,
    /// `max{1, Σ ln d_i}`.
    pub entropy_budget: f64,
    /// `1 + ⌈128 B (k−1)²/ε³⌉`, kept as a float since it can be astronomically large.
    pub r_theoretical: f64,
    /// `Δ/(64(k−1))`.
    pub eta: f64,
    /// `2(k−1)η`.
    pub alpha: f64,
    pub c_prime: f64,
    pub s_prime: f64,
    pub gap_prime: f64,
    /// Copies actually used when building matrices and circuits.
    pub r_actual: usize,
    /// Symmetrizer accuracy actually used, when it differs from `eta`.
    pub eta_actual: Option<f64>,
}

/// The schedule for `k` provers with completeness `c` and soundness `s`.
pub fn plan(k: usize, dims: &[usize], c: f64, s: f64, r_actual: usize) -> Result<CollapsePlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k}; at least two provers are needed")));
    }
    if dims.len() != k || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!("dims {dims:?} do not describe {k} registers")));
    }
    if !(0.0..=1.0).contains(&c) || !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("c = {c}, s = {s} must lie in [0, 1]")));
    }
    if c <= s {
        return Err(Error::InvalidArgument(format!("completeness {c} does not exceed soundness {s}")));
    }
    if r_actual == 0 {
        return Err(Error::InvalidArgument("r_actual must be at least 1".into()));
    }
    let km1 = (k - 1) as f64;
    let delta_gap = c - s;
    let epsilon = delta_gap / 4.0;
    let b = entropy_budget(dims);
    let r_theoretical = 1.0 + (128.0 * b * km1 * km1 / epsilon.powi(3)).ceil();
    let eta = delta_gap / (64.0 * km1);
    let alpha = 2.0 * km1 * eta;
    let c_prime = (1.0 + c - alpha) / 2.0;
    let s_prime = (1.0 + s + epsilon + alpha) / 2.0;
    Ok(CollapsePlan {
        k,
        base_dims: dims.to_vec(),
        c,
        s,
        delta_gap,
        epsilon,
        entropy_budget: b,
        r_theoretical,
        eta,
        alpha,
        c_prime,
        s_prime,
        gap_prime: 11.0 * delta_gap / 32.0,
        r_actual,
        eta_actual: None,
    })
}

impl CollapsePlan {
    /// Uses a coarser symmetrizer than the schedule's `η`.
    pub fn with_eta_actual(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidArgument(format!("eta = {eta} outside (0, 1)")));
        }
        self.eta_actual = Some(eta);
        Ok(self)
    }

    pub fn with_dims(mut self, dims: &[usize]) -> Result<Self> {
        if dims.len() != self.k {
            return Err(Error::InvalidArgument(format!("dims {dims:?} do not describe {} registers", self.k)));
        }
        self.base_dims = dims.to_vec();
        self.entropy_budget = entropy_budget(dims);
        let km1 = (self.k - 1) as f64;
        self.r_theoretical = 1.0 + (128.0 * self.entropy_budget * km1 * km1 / self.epsilon.powi(3)).ceil();
        Ok(self)
    }

    pub fn effective_eta(&self) -> f64 {
        self.eta_actual.unwrap_or(self.eta)
    }

    /// `2(k−1)η` at the effective `η`.
    pub fn perturbation_bound(&self) -> f64 {
        2.0 * (self.k - 1) as f64 * self.effective_eta()
    }

    /// `c′ − s′`, which equals `11Δ/32`.
    pub fn gap_identity_residual(&self) -> f64 {
        (self.c_prime - self.s_prime) - self.gap_prime
    }

    pub fn r_actual_reaches_theory(&self) -> bool {
        self.r_actual as f64 >= self.r_theoretical
    }

    pub fn sampler(&self) -> Result<DyadicPermutationSampler> {
        build_sampler(self.r_actual, self.effective_eta())
    }

    pub fn extension_layout(&self) -> Result<ExtensionLayout> {
        ExtensionLayout::uniform(&self.base_dims, self.r_actual)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExtensionVerifier {
    pub plan: CollapsePlan,
    /// `Π̃_R^{A_1} ⊗ ⋯ ⊗ Π̃_R^{A_{k−1}} ⊗ I`.
    pub tilde_pi: RealOperator,
    /// `Π̃ (M ⊗ I) Π̃`.
    pub tilde_e: RealOperator,
    /// `(I + Ẽ)/2`.
    pub tilde_c: RealOperator,
    /// `𝓔_R(M)` at `R_actual`.
    pub exact_e: RealOperator,
    /// `‖Ẽ − 𝓔‖`.
    pub perturbation: f64,
    pub perturbation_holds: bool,
    /// `0 ⪯ Ẽ ⪯ I`.
    pub interval_holds: bool,
    pub circuit: Option<BranchOverlapVerifier>,
}

pub fn compile_matrices(m_op: &RealOperator, plan: &CollapsePlan) -> Result<CompiledExtensionVerifier> {
    compile_matrices_capped(m_op, plan, DEFAULT_MAX_DIM)
}

pub fn compile_matrices_capped(m_op: &RealOperator, plan: &CollapsePlan, cap: usize) -> Result<CompiledExtensionVerifier> {
    if m_op.layout().dims() != plan.base_dims {
        return Err(Error::DimensionMismatch(format!(
            "operator layout {:?} vs plan dims {:?}",
            m_op.layout().dims(),
            plan.base_dims
        )));
    }
    let layout = plan.extension_layout()?;
    let full = layout.full_layout();
    if full.total_dim() > cap {
        return Err(Error::CapExceeded { size: full.total_dim(), cap });
    }
    let sampler = plan.sampler()?;
    let mut tilde_pi = RealOperator::identity(RegisterLayout::new(vec![])?);
    for &d in &plan.base_dims[..plan.k - 1] {
        tilde_pi = tensor(&tilde_pi, &sampler.approx_projector_capped(d, usize::MAX)?);
    }
    let last = *plan.base_dims.last().expect("k ≥ 2");
    tilde_pi = tensor(&tilde_pi, &RealOperator::identity(RegisterLayout::new(vec![last])?));
    let tested = embed_on_tested(m_op, &full, &layout.tested_positions())?;
    let tilde_e = tilde_pi.mul(&tested)?.mul(&tilde_pi)?.symmetric_part();
    let tilde_c = tilde_e.half_shift();
    let exact_e = extension_operator_capped(m_op, plan.r_actual, cap)?;
    let perturbation = tilde_e.sub(&exact_e)?.operator_norm();
    Ok(CompiledExtensionVerifier {
        plan: plan.clone(),
        perturbation_holds: perturbation <= plan.perturbation_bound() + PERTURBATION_TOL,
        interval_holds: psd_interval_check(&tilde_e, PSD_TOL)?,
        tilde_pi,
        tilde_e,
        tilde_c,
        exact_e,
        perturbation,
        circuit: None,
    })
}

/// One-witness verifier whose hermitian overlap is `Ẽ` for `M` the
/// acceptance matrix of `v`.
///
/// Bits: the `R` copies of each of the first `k−1` witness registers, the
/// last register, the zero ancillas of `v`, the branch registers
/// `t_1, u_1, …, t_{k−1}, u_{k−1}` of `q` bits each, then the plus
/// ancillas of the acceptance-as-overlap form of `v`.
pub fn compile_circuit(v: &BranchOverlapVerifier, plan: &CollapsePlan) -> Result<BranchOverlapVerifier> {
    compile_circuit_with(v, plan, &Simulator::default())
}

pub fn compile_circuit_with(v: &BranchOverlapVerifier, plan: &CollapsePlan, sim: &Simulator) -> Result<BranchOverlapVerifier> {
    let widths = v.witness_registers();
    if widths.len() != plan.k {
        return Err(Error::DimensionMismatch(format!(
            "verifier has {} witness registers, plan expects {}",
            widths.len(),
            plan.k
        )));
    }
    let dims: Vec<usize> = widths.iter().map(|&b| 1usize << b).collect();
    if dims != plan.base_dims {
        return Err(Error::DimensionMismatch(format!("register dims {dims:?} vs plan {:?}", plan.base_dims)));
    }
    let inner = sim.acceptance_as_overlap(v)?;
    let sampler = plan.sampler()?;
    let q = sampler.q() as usize;
    let r = plan.r_actual;
    let blocks = plan.k - 1;

    let mut block_offsets = Vec::with_capacity(blocks);
    let mut offset = 0;
    for &b in &widths[..blocks] {
        block_offsets.push(offset);
        offset += r * b;
    }
    let last_offset = offset;
    let witness_bits = last_offset + widths[blocks];
    let AncillaSpec { z, r: plus } = inner.ancilla();
    let branch_offset = witness_bits + z;
    let branch_bits = 2 * blocks * q;
    let total = branch_offset + branch_bits + plus;
    if total > sim.max_bits {
        return Err(Error::CapExceeded { size: total, cap: sim.max_bits });
    }

    // tested copy of each block, the last register, then the ancillas
    let mut map = Vec::with_capacity(inner.num_bits());
    for (i, &b) in widths[..blocks].iter().enumerate() {
        map.extend(block_offsets[i]..block_offsets[i] + b);
    }
    map.extend(last_offset..witness_bits);
    map.extend(witness_bits..witness_bits + z);
    map.extend(branch_offset + branch_bits..total);
    let body = inner.circuit().remapped(&map, total)?;

    let t_reg = |i: usize| branch_offset + 2 * i * q;
    let u_reg = |i: usize| branch_offset + (2 * i + 1) * q;
    let mut gates = Vec::new();
    for i in 0..blocks {
        gates.extend(routing_gates(&sampler, u_reg(i), q, block_offsets[i], widths[i], r));
    }
    gates.extend(body.gates().iter().cloned());
    for i in 0..blocks {
        gates.extend(routing_gates(&sampler, t_reg(i), q, block_offsets[i], widths[i], r));
    }

    let mut registers: Vec<usize> = Vec::with_capacity(blocks * r + 1);
    for &b in &widths[..blocks] {
        registers.extend(std::iter::repeat_n(b, r));
    }
    registers.push(widths[blocks]);
    BranchOverlapVerifier::new(
        registers,
        AncillaSpec { z, r: branch_bits + plus },
        ReversibleCircuit::new(total, gates)?,
    )
}

/// `Σ_t |t⟩⟨t| ⊗ U_{π(t)}` on one block: for every branch value with a
/// nontrivial permutation, a routing network controlled on all `q` bits.
fn routing_gates(
    sampler: &DyadicPermutationSampler,
    branch: usize,
    q: usize,
    block_offset: usize,
    width: usize,
    copies: usize,
) -> Vec<Gate> {
    let bits: Vec<usize> = (block_offset..block_offset + copies * width).collect();
    let mut gates = Vec::new();
    for t in 0..sampler.big_q() {
        let tau = sampler.pi_of(t).expect("in range");
        if tau.is_identity() {
            continue;
        }
        let images: Vec<usize> = (0..copies * width)
            .map(|x| tau.apply(x / width) * width + x % width)
            .collect();
        let route = Gate::WirePermutation {
            bits: bits.clone(),
            perm: Permutation::new(images).expect("bijection"),
        };
        let zeros: Vec<usize> = (0..q)
            .filter(|&j| (t >> (q - 1 - j)) & 1 == 0)
            .map(|j| branch + j)
            .collect();
        gates.extend(zeros.iter().map(|&target| Gate::Not { target }));
        let mut nested = route;
        for j in (0..q).rev() {
            nested = Gate::ControlledSubcircuit { control: branch + j, body: vec![nested] };
        }
        gates.push(nested);
        gates.extend(zeros.iter().map(|&target| Gate::Not { target }));
    }
    gates
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapAudit {
    pub omega_lower: f64,
    pub omega_upper: f64,
    /// Where the completeness value comes from.
    pub witness_source: String,
    pub lambda_exact: f64,
    pub lambda_tilde: f64,
    pub perturbation_bound: f64,
    pub perturbation_holds: bool,
    /// `ω₊_lower − 2(k−1)η`.
    pub yes_lower_bound: f64,
    pub yes_case_holds: bool,
    /// `ω₊_upper + ε + α`, the soundness-side bound.
    pub no_case_bound: f64,
    /// `no_case_bound − λ_max(Ẽ)`; positive when the bound happens to hold.
    pub no_case_observed_slack: f64,
    /// Only `R_actual ≥ R_theoretical` certifies the soundness side.
    pub no_case_certified: bool,
}

/// Eigenvalue bookkeeping of the compiled verifier against `ω₊(M)`.
pub fn gap_audit(m_op: &RealOperator, plan: &CollapsePlan, compiled: &CompiledExtensionVerifier) -> Result<GapAudit> {
    gap_audit_with(m_op, plan, compiled, None)
}

/// As [`gap_audit`], with the value of a planted witness when one is known.
pub fn gap_audit_with(
    m_op: &RealOperator,
    plan: &CollapsePlan,
    compiled: &CompiledExtensionVerifier,
    planted_value: Option<f64>,
) -> Result<GapAudit> {
    let dims = m_op.layout().dims();
    if dims.len() > 3 || dims.iter().any(|&d| d > 3) {
        return Err(Error::InvalidArgument(format!(
            "dims {dims:?} exceed the grid oracle regime (at most 3 registers of dimension ≤ 3)"
        )));
    }
    let grid_points = 60;
    let grid = omega_plus_grid(m_op, grid_points)?;
    let alternating = omega_plus_alternating(m_op, 50, 0)?.value;
    let mut omega_lower = grid.max(alternating);
    let witness_source = match planted_value {
        Some(v) if v >= omega_lower => {
            omega_lower = v;
            "planted witness".to_string()
        }
        _ => "best known witness value".to_string(),
    };
    let lambda_exact = lambda_max(&compiled.exact_e)?;
    let lambda_tilde = lambda_max(&compiled.tilde_e)?;
    let omega_upper = (grid + grid_tolerance(dims.len(), grid_points)).min(lambda_exact);
    let bound = plan.perturbation_bound();
    let yes_lower_bound = omega_lower - bound;
    let no_case_bound = omega_upper + plan.epsilon + bound;
    Ok(GapAudit {
        omega_lower,
        omega_upper,
        witness_source,
        lambda_exact,
        lambda_tilde,
        perturbation_bound: bound,
        perturbation_holds: (lambda_tilde - lambda_exact).abs() <= bound + PERTURBATION_TOL,
        yes_lower_bound,
        yes_case_holds: lambda_tilde >= yes_lower_bound - PERTURBATION_TOL,
        no_case_bound,
        no_case_observed_slack: no_case_bound - lambda_tilde,
        no_case_certified: plan.r_actual_reaches_theory(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::{acceptance_matrix, hermitian_overlap};
    use nalgebra::DVector;

    #[test]
    fn worked_plan() {
        let p = plan(2, &[2, 2], 0.7, 0.5, 3).unwrap();
        assert!((p.delta_gap - 0.2).abs() < 1e-15);
        assert!((p.epsilon - 0.05).abs() < 1e-15);
        assert!((p.eta - 0.003125).abs() < 1e-15);
        assert!((p.alpha - 0.00625).abs() < 1e-15);
        assert!((p.gap_prime - 0.06875).abs() < 1e-15);
        assert!((p.entropy_budget - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!(p.gap_identity_residual().abs() < 1e-14);
        assert!(!p.r_actual_reaches_theory());
    }

    #[test]
    fn plan_rejects_bad_input() {
        assert!(plan(2, &[2, 2], 0.5, 0.5, 1).is_err());
        assert!(plan(1, &[2], 0.7, 0.5, 1).is_err());
        assert!(plan(2, &[2, 2], 0.7, 0.5, 0).is_err());
        assert!(plan(3, &[2, 2], 0.7, 0.5, 1).is_err());
    }

    #[test]
    fn uniform_sampler_gives_exact_extension() {
        let m = RealOperator::from_row_major(
            RegisterLayout::new(vec![2, 2]).unwrap(),
            &[0.5, 0.1, 0.0, 0.2, 0.1, 0.3, 0.1, 0.0, 0.0, 0.1, 0.4, 0.1, 0.2, 0.0, 0.1, 0.5],
        )
        .unwrap();
        let p = plan(2, &[2, 2], 0.7, 0.5, 2).unwrap().with_eta_actual(0.5).unwrap();
        assert_eq!(p.sampler().unwrap().b(), 0);
        let c = compile_matrices(&m, &p).unwrap();
        assert!(c.perturbation < 1e-12);
        assert!((c.tilde_c.matrix() - c.tilde_e.half_shift().matrix()).amax() < 1e-12);
    }

    #[test]
    fn identity_operator() {
        let id = RealOperator::identity(RegisterLayout::new(vec![2, 2]).unwrap());
        let p = plan(2, &[2, 2], 0.7, 0.5, 3).unwrap().with_eta_actual(0.25).unwrap();
        let c = compile_matrices(&id, &p).unwrap();
        let pi2 = c.tilde_pi.mul(&c.tilde_pi).unwrap();
        assert!(c.tilde_e.max_abs_diff(&pi2) < 1e-12);
        assert!(lambda_max(&c.tilde_e).unwrap() <= 1.0 + 1e-9);
        assert!(c.perturbation_holds && c.interval_holds);
    }

    fn one_bit_verifier() -> BranchOverlapVerifier {
        // CNOT from the first witness bit onto the second, then a Toffoli
        // with the plus ancilla onto the zero ancilla
        let circuit = ReversibleCircuit::new(
            4,
            vec![Gate::Cnot { control: 0, target: 1 }, Gate::Toffoli { c1: 1, c2: 3, target: 2 }],
        )
        .unwrap();
        BranchOverlapVerifier::new(vec![1, 1], AncillaSpec { z: 1, r: 1 }, circuit).unwrap()
    }

    #[test]
    fn circuit_matches_matrices() {
        let v = one_bit_verifier();
        let m = acceptance_matrix(&v).unwrap();
        let p = plan(2, &[2, 2], 0.7, 0.5, 2).unwrap().with_eta_actual(0.5).unwrap();
        let compiled = compile_circuit(&v, &p).unwrap();
        let h = hermitian_overlap(&compiled).unwrap();
        let c = compile_matrices(&m, &p).unwrap();
        assert!(h.max_abs_diff(&c.tilde_e) < 1e-9);

        let w = DVector::from_vec(vec![0.6, 0.8]);
        let x = DVector::from_vec(vec![0.28, 0.96]);
        let lift = crate::tensor::tensor_vectors(&[w.clone(), w, x]);
        let acc = crate::verifier::acceptance_probability(&compiled, &lift).unwrap();
        assert!((acc - 0.5 * (1.0 + c.tilde_e.quadratic_form(&lift))).abs() < 1e-9);
    }

    #[test]
    fn identity_circuit_gives_pi_squared() {
        let v = BranchOverlapVerifier::new(vec![1, 1], AncillaSpec { z: 0, r: 0 }, ReversibleCircuit::empty(2)).unwrap();
        let p = plan(2, &[2, 2], 0.7, 0.5, 3).unwrap().with_eta_actual(0.8).unwrap();
        let compiled = compile_circuit(&v, &p).unwrap();
        let h = hermitian_overlap(&compiled).unwrap();
        let id = RealOperator::identity(RegisterLayout::new(vec![2, 2]).unwrap());
        let c = compile_matrices(&id, &p).unwrap();
        let pi2 = c.tilde_pi.mul(&c.tilde_pi).unwrap();
        assert!(h.max_abs_diff(&pi2) < 1e-9);
    }

    #[test]
    fn audit_planted_yes_instance() {
        let mut e = DVector::zeros(4);
        e[0] = 1.0;
        let m = RealOperator::projector(RegisterLayout::new(vec![2, 2]).unwrap(), &e).unwrap();
        let p = plan(2, &[2, 2], 0.7, 0.5, 3).unwrap().with_eta_actual(0.25).unwrap();
        let c = compile_matrices(&m, &p).unwrap();
        let a = gap_audit_with(&m, &p, &c, Some(1.0)).unwrap();
        assert_eq!(a.witness_source, "planted witness");
        assert!(a.lambda_tilde >= 1.0 - 2.0 * 0.25 - 1e-9);
        assert!(a.yes_case_holds && a.perturbation_holds);
        assert!(!a.no_case_certified);
    }

    #[test]
    fn audit_identity() {
        let id = RealOperator::identity(RegisterLayout::new(vec![2, 2]).unwrap());
        let p = plan(2, &[2, 2], 0.7, 0.5, 2).unwrap().with_eta_actual(0.5).unwrap();
        let c = compile_matrices(&id, &p).unwrap();
        let a = gap_audit(&id, &p, &c).unwrap();
        for x in [a.omega_lower, a.omega_upper, a.lambda_exact, a.lambda_tilde] {
            assert!((x - 1.0).abs() < 1e-9, "{a:?}");
        }
    }
}
