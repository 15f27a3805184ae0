//! Branch-overlap verifiers: reversible circuits over bits, compressed by a
//! `|0^z⟩|+^r⟩` ancilla state.
//!
//! Bit `0` is the most significant bit of a basis index. A verifier's bits
//! are laid out as witness bits, then the `z` zero-initialized ancillas,
//! then the `r` plus-initialized ancillas.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::tensor::{RealOperator, RegisterLayout};

/// Default limit on simulated bits (dense vectors of at most `2^20` entries).
pub const DEFAULT_SIM_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Gate {
    Not { target: usize },
    Cnot { control: usize, target: usize },
    Toffoli { c1: usize, c2: usize, target: usize },
    Swap { a: usize, b: usize },
    /// The bit at `bits[j]` moves to `bits[perm(j)]`.
    WirePermutation { bits: Vec<usize>, perm: Permutation },
    /// Runs `body` when `control` is set. `body` addresses the same bit space
    /// and never touches `control`.
    ControlledSubcircuit { control: usize, body: Vec<Gate> },
}

impl Gate {
    fn touched_bits(&self, out: &mut Vec<usize>) {
        match self {
            Gate::Not { target } => out.push(*target),
            Gate::Cnot { control, target } => out.extend([*control, *target]),
            Gate::Toffoli { c1, c2, target } => out.extend([*c1, *c2, *target]),
            Gate::Swap { a, b } => out.extend([*a, *b]),
            Gate::WirePermutation { bits, .. } => out.extend(bits),
            Gate::ControlledSubcircuit { control, body } => {
                out.push(*control);
                for g in body {
                    g.touched_bits(out);
                }
            }
        }
    }

    fn validate(&self, num_bits: usize) -> Result<()> {
        let local: Vec<usize> = match self {
            Gate::Not { target } => vec![*target],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Toffoli { c1, c2, target } => vec![*c1, *c2, *target],
            Gate::Swap { a, b } => vec![*a, *b],
            Gate::WirePermutation { bits, perm } => {
                if bits.len() != perm.len() {
                    return Err(Error::InvalidArgument(format!(
                        "wire permutation over {} bits with a permutation of {}",
                        bits.len(),
                        perm.len()
                    )));
                }
                bits.clone()
            }
            Gate::ControlledSubcircuit { control, body } => {
                let mut inner = Vec::new();
                for g in body {
                    g.validate(num_bits)?;
                    g.touched_bits(&mut inner);
                }
                if inner.contains(control) {
                    return Err(Error::InvalidArgument(format!(
                        "controlled subcircuit touches its control bit {control}"
                    )));
                }
                vec![*control]
            }
        };
        let mut seen = Vec::with_capacity(local.len());
        for b in local {
            if b >= num_bits {
                return Err(Error::InvalidArgument(format!("bit {b} out of range 0..{num_bits}")));
            }
            if seen.contains(&b) {
                return Err(Error::InvalidArgument(format!("bit {b} repeated within a gate")));
            }
            seen.push(b);
        }
        Ok(())
    }

    fn remap(&self, map: &[usize]) -> Gate {
        match self {
            Gate::Not { target } => Gate::Not { target: map[*target] },
            Gate::Cnot { control, target } => Gate::Cnot { control: map[*control], target: map[*target] },
            Gate::Toffoli { c1, c2, target } => Gate::Toffoli {
                c1: map[*c1],
                c2: map[*c2],
                target: map[*target],
            },
            Gate::Swap { a, b } => Gate::Swap { a: map[*a], b: map[*b] },
            Gate::WirePermutation { bits, perm } => Gate::WirePermutation {
                bits: bits.iter().map(|&b| map[b]).collect(),
                perm: perm.clone(),
            },
            Gate::ControlledSubcircuit { control, body } => Gate::ControlledSubcircuit {
                control: map[*control],
                body: body.iter().map(|g| g.remap(map)).collect(),
            },
        }
    }

    fn apply(&self, x: usize, n: usize) -> usize {
        let mask = |b: usize| 1usize << (n - 1 - b);
        let bit = |b: usize| x & mask(b) != 0;
        match self {
            Gate::Not { target } => x ^ mask(*target),
            Gate::Cnot { control, target } => {
                if bit(*control) {
                    x ^ mask(*target)
                } else {
                    x
                }
            }
            Gate::Toffoli { c1, c2, target } => {
                if bit(*c1) && bit(*c2) {
                    x ^ mask(*target)
                } else {
                    x
                }
            }
            Gate::Swap { a, b } => {
                if bit(*a) != bit(*b) {
                    x ^ mask(*a) ^ mask(*b)
                } else {
                    x
                }
            }
            Gate::WirePermutation { bits, perm } => {
                let mut y = x;
                for &b in bits {
                    y &= !mask(b);
                }
                for (j, &b) in bits.iter().enumerate() {
                    if bit(b) {
                        y |= mask(bits[perm.apply(j)]);
                    }
                }
                y
            }
            Gate::ControlledSubcircuit { control, body } => {
                if bit(*control) {
                    body.iter().fold(x, |acc, g| g.apply(acc, n))
                } else {
                    x
                }
            }
        }
    }
}

/// A classical reversible circuit on `num_bits` bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversibleCircuit {
    num_bits: usize,
    gates: Vec<Gate>,
}

impl ReversibleCircuit {
    pub fn new(num_bits: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(num_bits)?;
        }
        Ok(Self { num_bits, gates })
    }

    pub fn empty(num_bits: usize) -> Self {
        Self { num_bits, gates: Vec::new() }
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_bits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Image of basis index `x`.
    pub fn apply(&self, x: usize) -> usize {
        self.gates.iter().fold(x, |acc, g| g.apply(acc, self.num_bits))
    }

    /// The same circuit with bit `b` renamed to `map[b]` inside a
    /// `num_bits`-bit space.
    pub fn remapped(&self, map: &[usize], num_bits: usize) -> Result<Self> {
        if map.len() != self.num_bits {
            return Err(Error::DimensionMismatch(format!(
                "bit map of length {} for a {}-bit circuit",
                map.len(),
                self.num_bits
            )));
        }
        Self::new(num_bits, self.gates.iter().map(|g| g.remap(map)).collect())
    }

    /// Single gate running the whole circuit when `control` is set.
    pub fn controlled_by(&self, control: usize) -> Gate {
        Gate::ControlledSubcircuit { control, body: self.gates.clone() }
    }
}

/// Basis-index map of a circuit: `images[x] = C(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitPermutation {
    num_bits: usize,
    images: Vec<usize>,
}

impl CircuitPermutation {
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.images.len()];
        self.images
            .iter()
            .all(|&y| y < seen.len() && !std::mem::replace(&mut seen[y], true))
    }

    /// Dense permutation matrix with `C[C(x), x] = 1`.
    pub fn to_operator(&self) -> RealOperator {
        let layout = RegisterLayout::uniform(2, self.num_bits).expect("bits");
        let n = self.images.len();
        let mut m = DMatrix::zeros(n, n);
        for (x, &y) in self.images.iter().enumerate() {
            m[(y, x)] = 1.0;
        }
        RealOperator::new(layout, m).expect("square")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaSpec {
    /// Bits initialized to `|0⟩`.
    pub z: usize,
    /// Bits initialized to `|+⟩`.
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchOverlapVerifier {
    /// Bit width of each witness register.
    witness_registers: Vec<usize>,
    ancilla: AncillaSpec,
    circuit: ReversibleCircuit,
}

impl BranchOverlapVerifier {
    pub fn new(
        witness_registers: Vec<usize>,
        ancilla: AncillaSpec,
        circuit: ReversibleCircuit,
    ) -> Result<Self> {
        if witness_registers.is_empty() || witness_registers.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "witness registers {witness_registers:?} must be nonempty with positive widths"
            )));
        }
        let w: usize = witness_registers.iter().sum();
        if circuit.num_bits() != w + ancilla.z + ancilla.r {
            return Err(Error::DimensionMismatch(format!(
                "circuit has {} bits but witness + ancillas = {}",
                circuit.num_bits(),
                w + ancilla.z + ancilla.r
            )));
        }
        Ok(Self { witness_registers, ancilla, circuit })
    }

    pub fn witness_registers(&self) -> &[usize] {
        &self.witness_registers
    }

    pub fn witness_bits(&self) -> usize {
        self.witness_registers.iter().sum()
    }

    pub fn ancilla(&self) -> AncillaSpec {
        self.ancilla
    }

    pub fn circuit(&self) -> &ReversibleCircuit {
        &self.circuit
    }

    pub fn num_bits(&self) -> usize {
        self.circuit.num_bits()
    }

    /// Layout with one register of dimension `2^{b_i}` per witness register.
    pub fn witness_layout(&self) -> RegisterLayout {
        RegisterLayout::new(self.witness_registers.iter().map(|&b| 1usize << b).collect())
            .expect("positive widths")
    }
}

/// Simulation settings shared by the verifier operations.
#[derive(Debug, Clone, Copy)]
pub struct Simulator {
    pub max_bits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Self { max_bits: DEFAULT_SIM_CAP }
    }
}

impl Simulator {
    pub fn new(max_bits: usize) -> Self {
        Self { max_bits }
    }

    fn check(&self, bits: usize) -> Result<()> {
        if bits > self.max_bits {
            return Err(Error::CapExceeded { size: bits, cap: self.max_bits });
        }
        Ok(())
    }

    pub fn circuit_permutation(&self, c: &ReversibleCircuit) -> Result<CircuitPermutation> {
        self.check(c.num_bits())?;
        let images = (0..1usize << c.num_bits()).map(|x| c.apply(x)).collect();
        Ok(CircuitPermutation { num_bits: c.num_bits(), images })
    }

    /// `G = (I_W ⊗ ⟨η|) C (I_W ⊗ |η⟩)`.
    pub fn raw_overlap(&self, v: &BranchOverlapVerifier) -> Result<RealOperator> {
        self.check(v.num_bits())?;
        let AncillaSpec { z, r } = v.ancilla;
        let wdim = 1usize << v.witness_bits();
        let anc_bits = z + r;
        let zero_mask = ((1usize << z) - 1) << r;
        let weight = 0.5f64.powi(r as i32);
        let mut g = DMatrix::zeros(wdim, wdim);
        for w in 0..wdim {
            for s in 0..1usize << r {
                let y = v.circuit.apply((w << anc_bits) | s);
                if y & zero_mask == 0 {
                    g[(y >> anc_bits, w)] += weight;
                }
            }
        }
        RealOperator::new(v.witness_layout(), g)
    }

    /// `H = (G + Gᵀ)/2`.
    pub fn hermitian_overlap(&self, v: &BranchOverlapVerifier) -> Result<RealOperator> {
        Ok(self.raw_overlap(v)?.symmetric_part())
    }

    /// `M = (I + H)/2`.
    pub fn acceptance_matrix(&self, v: &BranchOverlapVerifier) -> Result<RealOperator> {
        Ok(self.hermitian_overlap(v)?.half_shift())
    }

    /// `½(1 + ⟨ψ, H ψ⟩)`.
    pub fn acceptance_probability(&self, v: &BranchOverlapVerifier, psi: &DVector<f64>) -> Result<f64> {
        check_witness(v, psi)?;
        Ok(self.acceptance_matrix(v)?.quadratic_form(psi))
    }

    /// Runs the controlled circuit `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ C` on an output
    /// qubit prepared in `|+⟩` and returns `½(1 + ⟨X_O⟩)`.
    pub fn simulate_standard_model(&self, v: &BranchOverlapVerifier, psi: &DVector<f64>) -> Result<f64> {
        check_witness(v, psi)?;
        let n = v.num_bits() + 1;
        self.check(n)?;
        let shift: Vec<usize> = (1..n).collect();
        let body = v.circuit.remapped(&shift, n)?;
        let u = ReversibleCircuit::new(n, vec![body.controlled_by(0)])?;

        let AncillaSpec { z, r } = v.ancilla;
        let anc_bits = z + r;
        let w_bits = v.witness_bits();
        let amp = std::f64::consts::FRAC_1_SQRT_2 * 0.5f64.powi(r as i32).sqrt();
        let mut out = vec![0.0; 1usize << n];
        for o in 0..2usize {
            for (w, &pw) in psi.iter().enumerate() {
                if pw == 0.0 {
                    continue;
                }
                for s in 0..1usize << r {
                    let x = (o << (n - 1)) | (w << anc_bits) | s;
                    out[u.apply(x)] += amp * pw;
                }
            }
        }
        let flip = 1usize << (n - 1);
        let x_expectation: f64 = out.iter().enumerate().map(|(x, &a)| a * out[x ^ flip]).sum();
        debug_assert!(w_bits + anc_bits + 1 == n);
        Ok(0.5 * (1.0 + x_expectation))
    }

    /// Verifier whose hermitian overlap is the acceptance matrix of `v`:
    /// one extra `|+⟩` branch bit selects between the identity and `C`.
    pub fn acceptance_as_overlap(&self, v: &BranchOverlapVerifier) -> Result<BranchOverlapVerifier> {
        let n = v.num_bits();
        self.check(n + 1)?;
        let mut circuit = ReversibleCircuit::empty(n + 1);
        circuit.push(v.circuit.controlled_by(n))?;
        BranchOverlapVerifier::new(
            v.witness_registers.clone(),
            AncillaSpec { z: v.ancilla.z, r: v.ancilla.r + 1 },
            circuit,
        )
    }
}

fn check_witness(v: &BranchOverlapVerifier, psi: &DVector<f64>) -> Result<()> {
    if psi.len() != 1usize << v.witness_bits() {
        return Err(Error::DimensionMismatch(format!(
            "witness of length {} for {} witness bits",
            psi.len(),
            v.witness_bits()
        )));
    }
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("witness norm {} is not 1", psi.norm())));
    }
    Ok(())
}

/// Shorthands with the default simulation cap.
pub fn circuit_permutation(c: &ReversibleCircuit) -> Result<CircuitPermutation> {
    Simulator::default().circuit_permutation(c)
}

pub fn raw_overlap(v: &BranchOverlapVerifier) -> Result<RealOperator> {
    Simulator::default().raw_overlap(v)
}

pub fn hermitian_overlap(v: &BranchOverlapVerifier) -> Result<RealOperator> {
    Simulator::default().hermitian_overlap(v)
}

pub fn acceptance_matrix(v: &BranchOverlapVerifier) -> Result<RealOperator> {
    Simulator::default().acceptance_matrix(v)
}

pub fn acceptance_probability(v: &BranchOverlapVerifier, psi: &DVector<f64>) -> Result<f64> {
    Simulator::default().acceptance_probability(v, psi)
}

pub fn simulate_standard_model(v: &BranchOverlapVerifier, psi: &DVector<f64>) -> Result<f64> {
    Simulator::default().simulate_standard_model(v, psi)
}

pub fn acceptance_as_overlap(v: &BranchOverlapVerifier) -> Result<BranchOverlapVerifier> {
    Simulator::default().acceptance_as_overlap(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn one_bit(anc: AncillaSpec, gates: Vec<Gate>) -> BranchOverlapVerifier {
        let c = ReversibleCircuit::new(1 + anc.z + anc.r, gates).unwrap();
        BranchOverlapVerifier::new(vec![1], anc, c).unwrap()
    }

    #[test]
    fn permutation_examples() {
        let id = circuit_permutation(&ReversibleCircuit::empty(3)).unwrap();
        assert_eq!(id.images(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        let not = ReversibleCircuit::new(1, vec![Gate::Not { target: 0 }]).unwrap();
        assert_eq!(circuit_permutation(&not).unwrap().to_operator().matrix(), &x());
        let cnot = ReversibleCircuit::new(2, vec![Gate::Cnot { control: 0, target: 1 }]).unwrap();
        assert_eq!(cnot.apply(0b10), 0b11);
        assert_eq!(cnot.apply(0b01), 0b01);
    }

    #[test]
    fn gate_validation() {
        assert!(ReversibleCircuit::new(2, vec![Gate::Cnot { control: 1, target: 1 }]).is_err());
        assert!(ReversibleCircuit::new(2, vec![Gate::Not { target: 2 }]).is_err());
        let bad = Gate::ControlledSubcircuit { control: 0, body: vec![Gate::Not { target: 0 }] };
        assert!(ReversibleCircuit::new(2, vec![bad]).is_err());
        let wp = Gate::WirePermutation { bits: vec![0, 1], perm: Permutation::identity(3) };
        assert!(ReversibleCircuit::new(3, vec![wp]).is_err());
    }

    #[test]
    fn wire_permutation_moves_bits() {
        // bit at position 0 -> 1, 1 -> 2, 2 -> 0
        let perm = Permutation::new(vec![1, 2, 0]).unwrap();
        let c = ReversibleCircuit::new(3, vec![Gate::WirePermutation { bits: vec![0, 1, 2], perm }]).unwrap();
        assert_eq!(c.apply(0b100), 0b010);
        assert_eq!(c.apply(0b110), 0b011);
        assert!(circuit_permutation(&c).unwrap().is_bijection());
    }

    #[test]
    fn cap_is_enforced() {
        let sim = Simulator::new(4);
        assert!(matches!(
            sim.circuit_permutation(&ReversibleCircuit::empty(5)),
            Err(Error::CapExceeded { size: 5, cap: 4 })
        ));
    }

    #[test]
    fn raw_overlap_examples() {
        let v = one_bit(AncillaSpec { z: 0, r: 0 }, vec![Gate::Not { target: 0 }]);
        assert_eq!(raw_overlap(&v).unwrap().matrix(), &x());

        let v = one_bit(AncillaSpec { z: 0, r: 1 }, vec![Gate::Cnot { control: 0, target: 1 }]);
        assert_eq!(raw_overlap(&v).unwrap().matrix(), &DMatrix::identity(2, 2));

        let v = one_bit(AncillaSpec { z: 0, r: 1 }, vec![Gate::Cnot { control: 1, target: 0 }]);
        let expected = (DMatrix::identity(2, 2) + x()) * 0.5;
        assert_eq!(raw_overlap(&v).unwrap().matrix(), &expected);
    }

    #[test]
    fn zero_ancilla_filters_branches() {
        // flipping a |0⟩ ancilla makes every branch orthogonal to ⟨0|
        let v = one_bit(AncillaSpec { z: 1, r: 0 }, vec![Gate::Not { target: 1 }]);
        assert_eq!(raw_overlap(&v).unwrap().matrix(), &DMatrix::zeros(2, 2));
    }

    #[test]
    fn hermitian_and_acceptance_examples() {
        let v = one_bit(AncillaSpec { z: 0, r: 0 }, vec![Gate::Not { target: 0 }]);
        assert_eq!(hermitian_overlap(&v).unwrap().matrix(), &x());
        assert_eq!(acceptance_matrix(&v).unwrap().matrix(), &((DMatrix::identity(2, 2) + x()) * 0.5));
        let id = one_bit(AncillaSpec { z: 0, r: 0 }, vec![]);
        assert_eq!(acceptance_matrix(&id).unwrap().matrix(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn acceptance_probability_examples() {
        let v = one_bit(AncillaSpec { z: 0, r: 0 }, vec![Gate::Not { target: 0 }]);
        let e0 = DVector::from_vec(vec![1.0, 0.0]);
        let plus = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        assert!((acceptance_probability(&v, &e0).unwrap() - 0.5).abs() < 1e-15);
        assert!((acceptance_probability(&v, &plus).unwrap() - 1.0).abs() < 1e-15);
        let id = one_bit(AncillaSpec { z: 0, r: 0 }, vec![]);
        assert!((acceptance_probability(&id, &plus).unwrap() - 1.0).abs() < 1e-15);
        assert!(acceptance_probability(&v, &DVector::from_vec(vec![1.0, 1.0])).is_err());
    }

    #[test]
    fn standard_model_examples() {
        let plus = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        let e1 = DVector::from_vec(vec![0.0, 1.0]);
        let id = one_bit(AncillaSpec { z: 0, r: 0 }, vec![]);
        assert!((simulate_standard_model(&id, &e1).unwrap() - 1.0).abs() < 1e-15);
        let v = one_bit(AncillaSpec { z: 0, r: 0 }, vec![Gate::Not { target: 0 }]);
        assert!((simulate_standard_model(&v, &plus).unwrap() - 1.0).abs() < 1e-15);
        assert!((simulate_standard_model(&v, &e1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn acceptance_as_overlap_examples() {
        let id = one_bit(AncillaSpec { z: 0, r: 0 }, vec![]);
        let out = acceptance_as_overlap(&id).unwrap();
        assert_eq!(hermitian_overlap(&out).unwrap().matrix(), &DMatrix::identity(2, 2));

        let v = one_bit(AncillaSpec { z: 0, r: 0 }, vec![Gate::Not { target: 0 }]);
        let out = acceptance_as_overlap(&v).unwrap();
        let expected = (DMatrix::identity(2, 2) + x()) * 0.5;
        assert_eq!(raw_overlap(&out).unwrap().matrix(), &expected);
        assert_eq!(hermitian_overlap(&out).unwrap().matrix(), &expected);
    }

    #[test]
    fn witness_layout_groups_bits() {
        let c = ReversibleCircuit::empty(4);
        let v = BranchOverlapVerifier::new(vec![1, 2], AncillaSpec { z: 1, r: 0 }, c).unwrap();
        assert_eq!(v.witness_layout().dims(), &[2, 4]);
        assert!(BranchOverlapVerifier::new(vec![1], AncillaSpec { z: 0, r: 0 }, ReversibleCircuit::empty(2)).is_err());
    }
}
