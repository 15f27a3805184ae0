//! Seeded instance generators.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::distances::JointDistribution;
use crate::error::{Error, Result};
use crate::extension::{ExtensionLayout, SeparableIsometry};
use crate::product_value::ProductWitness;
use crate::rounding::BosonicState;
use crate::tensor::{lambda_max, RealOperator, RegisterLayout};
use crate::verifier::{AncillaSpec, BranchOverlapVerifier, Gate, ReversibleCircuit};

/// A circuit of `num_gates` uniformly chosen NOT, CNOT, TOFFOLI and SWAP gates.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, num_bits: usize, num_gates: usize) -> Result<ReversibleCircuit> {
    if num_bits == 0 {
        return Err(Error::InvalidArgument("a circuit needs at least one bit".into()));
    }
    let mut gates = Vec::with_capacity(num_gates);
    for _ in 0..num_gates {
        let kinds = match num_bits {
            1 => 1,
            2 => 3,
            _ => 4,
        };
        let pick = distinct_bits(rng, num_bits, 3.min(num_bits));
        let gate = match rng.random_range(0..kinds) {
            0 => Gate::Not { target: pick[0] },
            1 => Gate::Cnot { control: pick[0], target: pick[1] },
            2 => Gate::Swap { a: pick[0], b: pick[1] },
            _ => Gate::Toffoli { c1: pick[0], c2: pick[1], target: pick[2] },
        };
        gates.push(gate);
    }
    ReversibleCircuit::new(num_bits, gates)
}

fn distinct_bits<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, n, count).into_vec()
}

/// A verifier on at most `max_bits` bits with one to three witness
/// registers and random zero and plus ancillas.
pub fn random_verifier<R: Rng + ?Sized>(rng: &mut R, max_bits: usize) -> Result<BranchOverlapVerifier> {
    if max_bits < 2 {
        return Err(Error::InvalidArgument("verifiers need at least two bits".into()));
    }
    let budget = rng.random_range(2..=max_bits);
    let num_registers = rng.random_range(1..=3.min(budget));
    let mut registers = vec![1; num_registers];
    let mut remaining = budget - num_registers;
    let extra_witness = rng.random_range(0..=remaining.min(3));
    for _ in 0..extra_witness {
        let i = rng.random_range(0..num_registers);
        registers[i] += 1;
    }
    remaining -= extra_witness;
    let z = rng.random_range(0..=remaining);
    let r = remaining - z;
    let n = budget;
    let num_gates = rng.random_range(1..=3 * n);
    let circuit = random_circuit(rng, n, num_gates)?;
    BranchOverlapVerifier::new(registers, AncillaSpec { z, r }, circuit)
}

/// `M = BᵀB / λ_max(BᵀB) · scale` with `B` entrywise nonnegative; about half
/// of the entries of `B` are zero.
pub fn random_nonneg_contraction<R: Rng + ?Sized>(rng: &mut R, layout: &RegisterLayout, scale: f64) -> Result<RealOperator> {
    if !(0.0..=1.0).contains(&scale) {
        return Err(Error::InvalidArgument(format!("scale = {scale} outside [0, 1]")));
    }
    let n = layout.total_dim();
    let b = DMatrix::from_fn(n, n, |_, _| if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 });
    let mut gram = b.transpose() * &b;
    if gram.amax() == 0.0 {
        gram[(0, 0)] = 1.0;
    }
    let gram = (&gram + gram.transpose()) * 0.5;
    let op = RealOperator::new(layout.clone(), gram)?;
    let top = lambda_max(&op)?;
    Ok(op.scale(scale / top))
}

/// A random entrywise nonnegative product unit vector.
pub fn random_product_witness<R: Rng + ?Sized>(rng: &mut R, layout: &RegisterLayout) -> Result<ProductWitness> {
    let factors = layout
        .dims()
        .iter()
        .map(|&d| {
            let x = DVector::from_fn(d, |_, _| rng.random::<f64>() + 1e-3);
            let norm = x.norm();
            x / norm
        })
        .collect();
    ProductWitness::new(factors)
}

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub operator: RealOperator,
    pub witness: ProductWitness,
    /// `w + (1 − w)⟨u, N u⟩`, the value of the planted witness.
    pub planted_value: f64,
}

/// `M = (1 − w) N + w |u⟩⟨u|` with `N` a random nonnegative contraction and
/// `u` a random nonnegative product unit vector.
pub fn planted_product_instance<R: Rng + ?Sized>(rng: &mut R, layout: &RegisterLayout, weight: f64) -> Result<PlantedInstance> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::InvalidArgument(format!("weight = {weight} outside [0, 1]")));
    }
    let noise = random_nonneg_contraction(rng, layout, 1.0)?;
    let witness = random_product_witness(rng, layout)?;
    let u = witness.tensor();
    let planted = RealOperator::projector(layout.clone(), &u)?;
    let operator = noise.scale(1.0 - weight).add(&planted.scale(weight))?.symmetric_part();
    let planted_value = weight + (1.0 - weight) * noise.quadratic_form(&u);
    Ok(PlantedInstance { operator, witness, planted_value })
}

/// `|Φ⟩⟨Φ|` with `|Φ⟩ = d^{−1/2} Σ_i |i, i⟩`.
pub fn max_entangled_projector(d: usize) -> Result<RealOperator> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let layout = RegisterLayout::new(vec![d, d])?;
    let mut v = DVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = 1.0 / (d as f64).sqrt();
    }
    RealOperator::projector(layout, &v)
}

/// A pure separately bosonic state with Gaussian occupation-number
/// amplitudes, or nonnegative ones when `nonneg` is set.
pub fn random_bosonic_pure<R: Rng + ?Sized>(rng: &mut R, layout: &ExtensionLayout, nonneg: bool) -> Result<BosonicState> {
    let iso = SeparableIsometry::new(layout)?;
    let c = random_unit(rng, iso.compressed_dim(), nonneg);
    BosonicState::pure(layout.clone(), iso.expand(&c))
}

/// A mixture of `components` random pure separately bosonic states.
pub fn random_bosonic_mixed<R: Rng + ?Sized>(rng: &mut R, layout: &ExtensionLayout, components: usize) -> Result<BosonicState> {
    if components == 0 {
        return Err(Error::InvalidArgument("a mixture needs at least one component".into()));
    }
    let iso = SeparableIsometry::new(layout)?;
    let n = iso.full_dim();
    let weights: Vec<f64> = (0..components).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = DMatrix::zeros(n, n);
    for w in weights {
        let v = iso.expand(&random_unit(rng, iso.compressed_dim(), false));
        rho += (&v * v.transpose()) * (w / total);
    }
    rho = (&rho + rho.transpose()) * 0.5;
    let trace = rho.trace();
    BosonicState::mixed(layout.clone(), rho / trace)
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize, nonneg: bool) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| {
            let x: f64 = rng.sample(StandardNormal);
            if nonneg {
                x.abs()
            } else {
                x
            }
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// A random joint distribution; each outcome is zeroed with probability
/// `sparsity`.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, layout: &RegisterLayout, sparsity: f64) -> Result<JointDistribution> {
    loop {
        let weights: Vec<f64> = (0..layout.total_dim())
            .map(|_| if rng.random_bool(sparsity.clamp(0.0, 1.0)) { 0.0 } else { rng.random::<f64>() })
            .collect();
        if weights.iter().any(|&w| w > 0.0) {
            return JointDistribution::from_weights(layout.clone(), weights);
        }
    }
}
