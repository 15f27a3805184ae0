//! Rounding separately bosonic states to nonnegative product witnesses:
//! computational-basis measurement of the tested registers, square-root
//! marginal rounding, one-copy conditioning and the entropy potential.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::distances::{entropy, hellinger, split_hellinger, JointDistribution, ZERO_PROB};
use crate::error::{Error, Result};
use crate::extension::{lift_for, ExtensionLayout, SeparableIsometry};
use crate::product_value::{product_value, ProductWitness};
use crate::tensor::{is_entrywise_nonneg, RealOperator, SYMMETRY_TOL};

pub const NORM_TOL: f64 = 1e-10;
pub const SUPPORT_TOL: f64 = 1e-9;
pub const STEP_TOL: f64 = 1e-9;
/// Margin by which a Hellinger violation must exceed `δ` before the
/// entropy-drop and potential-increase inequalities are asserted.
pub const HYPOTHESIS_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum StateRepr {
    Pure(DVector<f64>),
    Mixed(DMatrix<f64>),
}

/// A real state on the full extended register, supported on the separately
/// symmetric subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonicState {
    layout: ExtensionLayout,
    repr: StateRepr,
    support_violation: f64,
}

impl BosonicState {
    pub fn pure(layout: ExtensionLayout, v: DVector<f64>) -> Result<Self> {
        let iso = SeparableIsometry::new(&layout)?;
        check_len(iso.full_dim(), v.len())?;
        if (v.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm {} is not 1", v.norm())));
        }
        let violation = (&v - iso.project(&v)).norm_squared();
        Self::checked(layout, StateRepr::Pure(v), violation)
    }

    pub fn mixed(layout: ExtensionLayout, rho: DMatrix<f64>) -> Result<Self> {
        let iso = SeparableIsometry::new(&layout)?;
        check_len(iso.full_dim(), rho.nrows())?;
        if !rho.is_square() {
            return Err(Error::DimensionMismatch("density matrix is not square".into()));
        }
        let asym = (&rho - rho.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        if (rho.trace() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("trace {} is not 1", rho.trace())));
        }
        let min_eig = rho.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -SUPPORT_TOL {
            return Err(Error::InvalidArgument(format!("density matrix has eigenvalue {min_eig}")));
        }
        // for ρ ⪰ 0 the trace norm of (I−Π)ρ(I−Π) is Tr ρ − Tr ΠρΠ
        let violation = (rho.trace() - iso.project_density(&rho).trace()).abs();
        Self::checked(layout, StateRepr::Mixed(rho), violation)
    }

    fn checked(layout: ExtensionLayout, repr: StateRepr, violation: f64) -> Result<Self> {
        if violation > SUPPORT_TOL {
            return Err(Error::Precondition(format!(
                "state leaves the separately symmetric subspace by {violation:.3e}"
            )));
        }
        Ok(Self { layout, repr, support_violation: violation })
    }

    /// Expands occupation-number coordinates through the isometry.
    pub fn from_compressed(layout: ExtensionLayout, c: &DVector<f64>) -> Result<Self> {
        let iso = SeparableIsometry::new(&layout)?;
        check_len(iso.compressed_dim(), c.len())?;
        let v = iso.expand(c);
        Self::pure(layout, v)
    }

    /// `x_1^{⊗r_1} ⊗ ⋯ ⊗ x_m`.
    pub fn lifted(w: &ProductWitness, layout: ExtensionLayout) -> Result<Self> {
        let v = lift_for(w, &layout)?;
        Self::pure(layout, v)
    }

    pub fn layout(&self) -> &ExtensionLayout {
        &self.layout
    }

    pub fn repr(&self) -> &StateRepr {
        &self.repr
    }

    pub fn support_violation(&self) -> f64 {
        self.support_violation
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }

    /// Density matrix in full coordinates.
    pub fn density(&self) -> DMatrix<f64> {
        match &self.repr {
            StateRepr::Pure(v) => v * v.transpose(),
            StateRepr::Mixed(rho) => rho.clone(),
        }
    }

    /// Reduced state on the tested registers `(A_{1,1}, …, A_{m−1,1}, A_m)`.
    pub fn tested_marginal(&self) -> DMatrix<f64> {
        let split = TestedSplit::new(&self.layout);
        match &self.repr {
            StateRepr::Pure(v) => {
                let mut psi = DMatrix::zeros(split.tested_dim, split.rest_dim);
                for (s, &(t, r)) in split.parts.iter().enumerate() {
                    psi[(t, r)] = v[s];
                }
                &psi * psi.transpose()
            }
            StateRepr::Mixed(rho) => {
                let mut out = DMatrix::zeros(split.tested_dim, split.tested_dim);
                for (s, &(ts, rs)) in split.parts.iter().enumerate() {
                    for (u, &(tu, ru)) in split.parts.iter().enumerate() {
                        if rs == ru {
                            out[(ts, tu)] += rho[(s, u)];
                        }
                    }
                }
                out
            }
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch(format!("expected dimension {expected}, got {got}")));
    }
    Ok(())
}

struct TestedSplit {
    parts: Vec<(usize, usize)>,
    tested_dim: usize,
    rest_dim: usize,
}

impl TestedSplit {
    fn new(layout: &ExtensionLayout) -> Self {
        let full = layout.full_layout();
        let tested = layout.tested_positions();
        let rest: Vec<usize> = (0..full.num_registers()).filter(|p| !tested.contains(p)).collect();
        let tested_layout = full.select(&tested).expect("valid positions");
        let rest_layout = full.select(&rest).expect("valid positions");
        let parts = (0..full.total_dim())
            .map(|s| {
                let digits = full.digits_of(s);
                let t: Vec<usize> = tested.iter().map(|&p| digits[p]).collect();
                let r: Vec<usize> = rest.iter().map(|&p| digits[p]).collect();
                (tested_layout.index_of(&t), rest_layout.index_of(&r))
            })
            .collect();
        Self { parts, tested_dim: tested_layout.total_dim(), rest_dim: rest_layout.total_dim() }
    }
}

/// Distribution of computational-basis outcomes on the tested registers.
pub fn measured_distribution(rho: &BosonicState) -> Result<JointDistribution> {
    let marginal = rho.tested_marginal();
    let probs: Vec<f64> = marginal.diagonal().iter().map(|&p| p.max(0.0)).collect();
    JointDistribution::from_weights(rho.layout.base_layout(), probs)
}

/// `V(ρ) = Tr[M ρ_test]`.
pub fn tested_value(rho: &BosonicState, m_op: &RealOperator) -> Result<f64> {
    if m_op.layout().dims() != rho.layout.base_dims() {
        return Err(Error::DimensionMismatch(format!(
            "operator layout {:?} vs state base {:?}",
            m_op.layout().dims(),
            rho.layout.base_dims()
        )));
    }
    Ok(m_op.matrix().component_mul(&rho.tested_marginal()).sum())
}

/// `V(ρ) − μ H_test(ρ)`.
pub fn potential(rho: &BosonicState, m_op: &RealOperator, mu: f64) -> Result<f64> {
    if mu < 0.0 {
        return Err(Error::InvalidArgument(format!("mu = {mu} is negative")));
    }
    let v = tested_value(rho, m_op)?;
    if mu == 0.0 {
        return Ok(v);
    }
    Ok(v - mu * entropy(&measured_distribution(rho)?))
}

fn check_rounding_operator(m_op: &RealOperator) -> Result<()> {
    if !is_entrywise_nonneg(m_op, 0.0) {
        return Err(Error::Precondition("operator has a negative entry".into()));
    }
    if !m_op.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::NotSymmetric(m_op.asymmetry()));
    }
    let norm = m_op.operator_norm();
    if norm > 1.0 + STEP_TOL {
        return Err(Error::Precondition(format!("operator norm {norm} exceeds 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectRound {
    pub witness: ProductWitness,
    /// `d_H(P, ∏ p_i)`.
    pub gamma: f64,
    pub tested_value: f64,
    pub achieved: f64,
    /// `achieved ≥ tested_value − 2√2·gamma − 1e−9`.
    pub bound_holds: bool,
}

/// Rounds to the square roots of the measured marginals.
pub fn direct_round(rho: &BosonicState, m_op: &RealOperator) -> Result<DirectRound> {
    check_rounding_operator(m_op)?;
    let p = measured_distribution(rho)?;
    let gamma = hellinger(&p, &p.product_of_marginals())?;
    let factors = (0..p.num_coords())
        .map(|i| {
            let x = DVector::from_iterator(
                p.layout().dims()[i],
                p.coordinate_marginal(i).into_iter().map(f64::sqrt),
            );
            let norm = x.norm();
            x / norm
        })
        .collect();
    let witness = ProductWitness::new(factors)?;
    let value = tested_value(rho, m_op)?;
    let achieved = product_value(m_op, &witness)?;
    Ok(DirectRound {
        witness,
        gamma,
        tested_value: value,
        achieved,
        bound_holds: achieved >= value - 2.0 * std::f64::consts::SQRT_2 * gamma - STEP_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOutcome {
    pub outcome: usize,
    pub weight: f64,
    pub residual: BosonicState,
}

/// Measures the first copy of `block` and relabels the remaining copies.
/// Outcomes of weight below `1e−15` are omitted.
pub fn condition_step(rho: &BosonicState, block: usize) -> Result<Vec<ConditionOutcome>> {
    let layout = &rho.layout;
    if block >= layout.num_blocks() {
        return Err(Error::InvalidArgument(format!("block {block} is not an extended block")));
    }
    let next = layout.with_one_fewer(block)?;
    let offset: usize = layout.copies()[..block].iter().sum();
    let full = layout.full_layout();
    let small = next.full_layout();
    let d = layout.base_dims()[block];
    // full index of (small index with digit a inserted at offset)
    let insert = |s: usize, a: usize| -> usize {
        let mut digits = small.digits_of(s);
        digits.insert(offset, a);
        full.index_of(&digits)
    };
    let n = small.total_dim();
    let mut out = Vec::new();
    for a in 0..d {
        let map: Vec<usize> = (0..n).map(|s| insert(s, a)).collect();
        match &rho.repr {
            StateRepr::Pure(v) => {
                let phi = DVector::from_fn(n, |s, _| v[map[s]]);
                let weight = phi.norm_squared();
                if weight < ZERO_PROB {
                    continue;
                }
                let residual = BosonicState::pure(next.clone(), phi / weight.sqrt())?;
                out.push(ConditionOutcome { outcome: a, weight, residual });
            }
            StateRepr::Mixed(r) => {
                let block_rho = DMatrix::from_fn(n, n, |s, t| r[(map[s], map[t])]);
                let weight = block_rho.trace();
                if weight < ZERO_PROB {
                    continue;
                }
                let residual = BosonicState::mixed(next.clone(), block_rho / weight)?;
                out.push(ConditionOutcome { outcome: a, weight, residual });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingSchedule {
    pub epsilon: f64,
    /// `max{1, Σ ln d_i}`.
    pub entropy_budget: f64,
    pub delta: f64,
    pub mu: f64,
    pub max_steps: usize,
}

impl RoundingSchedule {
    /// `δ = ε/(4√2(m−1))`, `μ = ε/(4L)`.
    pub fn new(epsilon: f64, dims: &[usize], max_steps: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon = {epsilon} outside (0, 1]")));
        }
        if dims.len() < 2 {
            return Err(Error::InvalidArgument("schedule needs at least two registers".into()));
        }
        if max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be positive".into()));
        }
        let m = dims.len() as f64;
        let entropy_budget = entropy_budget(dims);
        Ok(Self {
            epsilon,
            entropy_budget,
            delta: epsilon / (4.0 * std::f64::consts::SQRT_2 * (m - 1.0)),
            mu: epsilon / (4.0 * entropy_budget),
            max_steps,
        })
    }

    /// The schedule with `T = ⌈128 L (m−1)²/ε³⌉` steps.
    pub fn with_step_bound(epsilon: f64, dims: &[usize]) -> Result<Self> {
        let base = Self::new(epsilon, dims, 1)?;
        Ok(Self { max_steps: step_bound(epsilon, dims), ..base })
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        if delta <= 0.0 {
            return Err(Error::InvalidArgument(format!("delta = {delta} is not positive")));
        }
        Ok(Self { delta, ..self })
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        if mu <= 0.0 {
            return Err(Error::InvalidArgument(format!("mu = {mu} is not positive")));
        }
        Ok(Self { mu, ..self })
    }
}

pub fn entropy_budget(dims: &[usize]) -> f64 {
    dims.iter().map(|&d| (d as f64).ln()).sum::<f64>().max(1.0)
}

/// `⌈128 L (m−1)²/ε³⌉`, saturating.
pub fn step_bound(epsilon: f64, dims: &[usize]) -> usize {
    let m = dims.len() as f64;
    let t = (128.0 * entropy_budget(dims) * (m - 1.0).powi(2) / epsilon.powi(3)).ceil();
    if t >= usize::MAX as f64 {
        usize::MAX
    } else {
        t as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub block: usize,
    pub outcome: usize,
    pub weight: f64,
    /// `d_H(P, p_i ⊗ p_ī)` of the conditioned block before the step.
    pub hellinger_violation: f64,
    pub value_before: f64,
    pub value_after: f64,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub potential_before: f64,
    pub potential_after: f64,
    /// `Σ_a w_a V(ρ^a)`.
    pub averaged_value: f64,
    /// `Σ_a w_a H_test(ρ^a)`.
    pub averaged_entropy: f64,
    pub value_preserved: bool,
    /// Violation exceeds `δ` by at least the hypothesis margin.
    pub hypothesis: bool,
    pub entropy_drop_holds: bool,
    pub potential_increase_holds: bool,
    pub potential_nondecreasing: bool,
    pub residual_support_ok: bool,
}

impl StepRecord {
    pub fn all_hold(&self) -> bool {
        self.value_preserved
            && self.entropy_drop_holds
            && self.potential_increase_holds
            && self.potential_nondecreasing
            && self.residual_support_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Every block is within `δ` of independent.
    Converged,
    /// A block violates the condition but every violating block has one copy left.
    CopiesExhausted,
    /// The schedule's step budget ran out.
    StepBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingTrace {
    pub steps: Vec<StepRecord>,
    pub stop: StopReason,
    pub final_copies: Vec<usize>,
    pub final_violations: Vec<f64>,
}

impl RoundingTrace {
    pub fn exhausted(&self) -> bool {
        self.stop != StopReason::Converged
    }

    pub fn all_steps_hold(&self) -> bool {
        self.steps.iter().all(StepRecord::all_hold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRound {
    pub witness: ProductWitness,
    pub trace: RoundingTrace,
    pub initial_value: f64,
    pub achieved: f64,
    pub terminal: DirectRound,
    /// `V(ρ) − achieved`.
    pub certified_loss: f64,
    /// `μ H_test(ρ) + 2√2·γ` with `γ` the terminal Hellinger distance; the
    /// loss never exceeds it.
    pub loss_bound: f64,
    /// `μ L + 2√2 (m−1) δ`, the loss allowed when the loop converges.
    pub schedule_loss: f64,
    pub bound_holds: bool,
}

/// Conditions greedily until every block is `δ`-close to independent, then
/// rounds directly.
pub fn adaptive_round(rho: &BosonicState, m_op: &RealOperator, schedule: &RoundingSchedule) -> Result<AdaptiveRound> {
    check_rounding_operator(m_op)?;
    let mu = schedule.mu;
    let delta = schedule.delta;
    let initial_value = tested_value(rho, m_op)?;
    let initial_entropy = entropy(&measured_distribution(rho)?);
    let mut current = rho.clone();
    let mut steps = Vec::new();

    let stop = loop {
        let p = measured_distribution(&current)?;
        let blocks = current.layout.num_blocks();
        let violations: Vec<f64> = (0..blocks).map(|i| split_hellinger(&p, i)).collect();
        if violations.iter().all(|&h| h <= delta) {
            break StopReason::Converged;
        }
        if steps.len() >= schedule.max_steps {
            break StopReason::StepBudget;
        }
        let mut chosen: Option<usize> = None;
        for i in 0..blocks {
            if violations[i] > delta
                && current.layout.copies()[i] >= 2
                && chosen.is_none_or(|c| violations[i] > violations[c])
            {
                chosen = Some(i);
            }
        }
        let Some(block) = chosen else {
            break StopReason::CopiesExhausted;
        };

        let value_before = tested_value(&current, m_op)?;
        let entropy_before = entropy(&p);
        let potential_before = value_before - mu * entropy_before;
        let outcomes = condition_step(&current, block)?;
        let mut averaged_value = 0.0;
        let mut averaged_entropy = 0.0;
        let mut best: Option<(f64, f64, f64, &ConditionOutcome)> = None;
        for o in &outcomes {
            let v = tested_value(&o.residual, m_op)?;
            let h = entropy(&measured_distribution(&o.residual)?);
            averaged_value += o.weight * v;
            averaged_entropy += o.weight * h;
            let phi = v - mu * h;
            if best.is_none_or(|b| phi > b.0) {
                best = Some((phi, v, h, o));
            }
        }
        let (potential_after, value_after, entropy_after, picked) =
            best.ok_or_else(|| Error::Precondition("conditioning produced no outcome".into()))?;
        let hypothesis = violations[block] > delta + HYPOTHESIS_MARGIN;
        let record = StepRecord {
            block,
            outcome: picked.outcome,
            weight: picked.weight,
            hellinger_violation: violations[block],
            value_before,
            value_after,
            entropy_before,
            entropy_after,
            potential_before,
            potential_after,
            averaged_value,
            averaged_entropy,
            value_preserved: (averaged_value - value_before).abs() <= STEP_TOL,
            hypothesis,
            entropy_drop_holds: !hypothesis
                || averaged_entropy <= entropy_before - 2.0 * delta * delta + STEP_TOL,
            potential_increase_holds: !hypothesis
                || potential_after >= potential_before + 2.0 * mu * delta * delta - STEP_TOL,
            potential_nondecreasing: potential_after >= potential_before - STEP_TOL,
            residual_support_ok: outcomes.iter().all(|o| o.residual.support_violation() <= SUPPORT_TOL),
        };
        let next = picked.residual.clone();
        steps.push(record);
        current = next;
    };

    let p = measured_distribution(&current)?;
    let final_violations = (0..current.layout.num_blocks()).map(|i| split_hellinger(&p, i)).collect();
    let terminal = direct_round(&current, m_op)?;
    let m = rho.layout.base_dims().len() as f64;
    let sqrt8 = 2.0 * std::f64::consts::SQRT_2;
    let loss_bound = mu * initial_entropy + sqrt8 * terminal.gamma;
    let achieved = terminal.achieved;
    Ok(AdaptiveRound {
        witness: terminal.witness.clone(),
        trace: RoundingTrace {
            steps,
            stop,
            final_copies: current.layout.copies().to_vec(),
            final_violations,
        },
        initial_value,
        achieved,
        certified_loss: initial_value - achieved,
        loss_bound,
        schedule_loss: mu * schedule.entropy_budget + sqrt8 * (m - 1.0) * delta,
        bound_holds: achieved >= initial_value - loss_bound - STEP_TOL,
        terminal,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{extension_operator_compressed, SeparableIsometry};
    use crate::tensor::{top_eigenpair, RegisterLayout};

    fn bell_projector() -> RealOperator {
        let mut v = DVector::zeros(4);
        v[0] = std::f64::consts::FRAC_1_SQRT_2;
        v[3] = std::f64::consts::FRAC_1_SQRT_2;
        RealOperator::projector(RegisterLayout::new(vec![2, 2]).unwrap(), &v).unwrap()
    }

    fn ghz() -> BosonicState {
        let layout = ExtensionLayout::new(vec![2, 2], vec![2]).unwrap();
        let mut v = DVector::zeros(8);
        v[0] = std::f64::consts::FRAC_1_SQRT_2;
        v[7] = std::f64::consts::FRAC_1_SQRT_2;
        BosonicState::pure(layout, v).unwrap()
    }

    #[test]
    fn support_check_rejects_antisymmetric() {
        let layout = ExtensionLayout::new(vec![2, 2], vec![2]).unwrap();
        let mut v = DVector::zeros(8);
        v[0b010] = std::f64::consts::FRAC_1_SQRT_2;
        v[0b100] = -std::f64::consts::FRAC_1_SQRT_2;
        assert!(matches!(BosonicState::pure(layout, v), Err(Error::Precondition(_))));
    }

    #[test]
    fn measurement_examples() {
        let p = measured_distribution(&ghz()).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.0, 0.0, 0.5]);

        let w = ProductWitness::new(vec![
            DVector::from_vec(vec![0.6, 0.8]),
            DVector::from_vec(vec![0.0, 1.0]),
        ])
        .unwrap();
        let lifted = BosonicState::lifted(&w, ExtensionLayout::new(vec![2, 2], vec![3]).unwrap()).unwrap();
        let p = measured_distribution(&lifted).unwrap();
        let expected = [0.0, 0.36, 0.0, 0.64];
        for (a, b) in p.probs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }

        let layout = ExtensionLayout::new(vec![2, 2], vec![2]).unwrap();
        let iso = SeparableIsometry::new(&layout).unwrap().dense();
        let rho = &iso * iso.transpose() / iso.ncols() as f64;
        let mixed = BosonicState::mixed(layout, rho).unwrap();
        let p = measured_distribution(&mixed).unwrap();
        assert!(p.probs().iter().all(|&x| x > 0.0));
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tested_value_examples() {
        let w = ProductWitness::new(vec![
            DVector::from_vec(vec![0.6, 0.8]),
            DVector::from_vec(vec![0.28, 0.96]),
        ])
        .unwrap();
        let m = bell_projector();
        let lifted = BosonicState::lifted(&w, ExtensionLayout::new(vec![2, 2], vec![3]).unwrap()).unwrap();
        let v = tested_value(&lifted, &m).unwrap();
        assert!((v - product_value(&m, &w).unwrap()).abs() < 1e-12);
        let id = RealOperator::identity(RegisterLayout::new(vec![2, 2]).unwrap());
        assert!((tested_value(&ghz(), &id).unwrap() - 1.0).abs() < 1e-12);

        let e = extension_operator_compressed(&m, 3).unwrap();
        let (lambda, c) = top_eigenpair(&e).unwrap();
        let top = BosonicState::from_compressed(ExtensionLayout::uniform(&[2, 2], 3).unwrap(), &c).unwrap();
        assert!((tested_value(&top, &m).unwrap() - lambda).abs() < 1e-9);
    }

    #[test]
    fn direct_round_ghz() {
        let r = direct_round(&ghz(), &bell_projector()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for f in r.witness.factors() {
            assert!((f - DVector::from_vec(vec![h, h])).amax() < 1e-12);
        }
        assert!((r.gamma.powi(2) - (1.0 - h)).abs() < 1e-12);
        assert!(r.bound_holds);
    }

    #[test]
    fn direct_round_lifted_is_exact() {
        let w = ProductWitness::new(vec![
            DVector::from_vec(vec![0.6, 0.8]),
            DVector::from_vec(vec![0.28, 0.96]),
        ])
        .unwrap();
        let lifted = BosonicState::lifted(&w, ExtensionLayout::new(vec![2, 2], vec![2]).unwrap()).unwrap();
        let r = direct_round(&lifted, &bell_projector()).unwrap();
        assert!(r.gamma < 1e-7);
        assert!((r.achieved - r.tested_value).abs() < 1e-10);
    }

    #[test]
    fn condition_ghz() {
        let outcomes = condition_step(&ghz(), 0).unwrap();
        assert_eq!(outcomes.len(), 2);
        for (a, o) in outcomes.iter().enumerate() {
            assert_eq!(o.outcome, a);
            assert!((o.weight - 0.5).abs() < 1e-12);
            let p = measured_distribution(&o.residual).unwrap();
            assert!(entropy(&p).abs() < 1e-12);
            assert_eq!(p.probs()[3 * a], 1.0);
        }
        let single = &outcomes[0].residual;
        assert!(condition_step(single, 0).is_err());
    }

    #[test]
    fn condition_product_state() {
        let w = ProductWitness::new(vec![
            DVector::from_vec(vec![0.6, 0.8]),
            DVector::from_vec(vec![0.28, 0.96]),
        ])
        .unwrap();
        let layout = ExtensionLayout::new(vec![2, 2], vec![3]).unwrap();
        let lifted = BosonicState::lifted(&w, layout.clone()).unwrap();
        let smaller = BosonicState::lifted(&w, layout.with_one_fewer(0).unwrap()).unwrap();
        let outcomes = condition_step(&lifted, 0).unwrap();
        assert!((outcomes[0].weight - 0.36).abs() < 1e-12);
        assert!((outcomes[1].weight - 0.64).abs() < 1e-12);
        for o in outcomes {
            let (StateRepr::Pure(a), StateRepr::Pure(b)) = (o.residual.repr(), smaller.repr()) else {
                panic!("pure states expected");
            };
            assert!((a - b).amax() < 1e-12);
        }
    }

    #[test]
    fn potential_examples() {
        let m = bell_projector();
        let g = ghz();
        assert_eq!(potential(&g, &m, 0.0).unwrap(), tested_value(&g, &m).unwrap());
        let w = ProductWitness::basis(&RegisterLayout::new(vec![2, 2]).unwrap(), &[1, 1]).unwrap();
        let basis = BosonicState::lifted(&w, ExtensionLayout::new(vec![2, 2], vec![2]).unwrap()).unwrap();
        assert_eq!(potential(&basis, &m, 0.7).unwrap(), tested_value(&basis, &m).unwrap());
        assert!(potential(&g, &m, 0.1).unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn schedule_values() {
        let s = RoundingSchedule::new(0.5, &[2, 2], 10).unwrap();
        assert!((s.delta - 0.5 / (4.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((s.entropy_budget - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy_budget(&[2]), 1.0);
        assert!((s.mu - 0.5 / (4.0 * 2.0 * 2f64.ln())).abs() < 1e-15);
        assert!(RoundingSchedule::new(0.0, &[2, 2], 1).is_err());
        assert!(RoundingSchedule::new(0.5, &[2, 2], 0).is_err());
        assert_eq!(RoundingSchedule::with_step_bound(1.0, &[2, 2]).unwrap().max_steps, 178);
    }

    #[test]
    fn adaptive_lifted_no_steps() {
        let w = ProductWitness::new(vec![
            DVector::from_vec(vec![0.6, 0.8]),
            DVector::from_vec(vec![0.28, 0.96]),
        ])
        .unwrap();
        let lifted = BosonicState::lifted(&w, ExtensionLayout::new(vec![2, 2], vec![3]).unwrap()).unwrap();
        let s = RoundingSchedule::new(0.5, &[2, 2], 5).unwrap();
        let r = adaptive_round(&lifted, &bell_projector(), &s).unwrap();
        assert!(r.trace.steps.is_empty());
        assert_eq!(r.trace.stop, StopReason::Converged);
        assert!(r.certified_loss.abs() < 1e-10);
    }

    #[test]
    fn adaptive_ghz_one_step() {
        let s = RoundingSchedule::new(0.5, &[2, 2], 5).unwrap().with_delta(0.3).unwrap();
        let m = bell_projector();
        let r = adaptive_round(&ghz(), &m, &s).unwrap();
        assert_eq!(r.trace.steps.len(), 1);
        assert_eq!(r.trace.stop, StopReason::Converged);
        let step = &r.trace.steps[0];
        assert!(step.all_hold());
        assert!(step.hypothesis);
        assert!((r.achieved - step.value_after).abs() < 1e-12);
        assert_eq!(r.witness.factors()[0][step.outcome], 1.0);
        assert!(r.bound_holds);
    }
}
