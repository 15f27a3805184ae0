//! Deterministic instance generators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use stoq_core::extension::ExtensionLayout;
use stoq_core::random::{
    max_entangled_projector, planted_product_instance, random_bosonic_mixed, random_bosonic_pure,
    random_distribution, random_nonneg_contraction, random_verifier,
};
use stoq_core::tensor::RegisterLayout;

use crate::error::{CliError, CliResult};
use crate::io::{DistributionPayload, InstanceFile, MatrixPayload, Metadata, Payload, StatePayload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Random reversible-circuit verifier.
    Circuit,
    /// `BᵀB/‖BᵀB‖·scale` with `B` entrywise nonnegative.
    Contraction,
    /// `(1−w)N + w|u⟩⟨u|` with a nonnegative product `u`.
    Planted,
    /// Projector onto the maximally entangled state of two `d`-level registers.
    Entangled,
    /// Random joint distribution.
    Distribution,
    /// Random separately bosonic state with a contraction to round against.
    Bosonic,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Circuit => "circuit",
            Generator::Contraction => "contraction",
            Generator::Planted => "planted",
            Generator::Entangled => "entangled",
            Generator::Distribution => "distribution",
            Generator::Bosonic => "bosonic",
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        <Self as clap::ValueEnum>::from_str(s, true).map_err(|_| CliError::Invalid(format!("unknown generator {s}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub dims: Vec<usize>,
    /// Bit budget for circuit verifiers.
    pub bits: usize,
    pub scale: f64,
    pub weight: f64,
    /// Copies per extended block for bosonic states.
    pub copies: usize,
    /// Local dimension for the entangled family.
    pub d: usize,
    pub mixed: bool,
    pub sparsity: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self { dims: vec![2, 2], bits: 6, scale: 1.0, weight: 0.6, copies: 2, d: 2, mixed: false, sparsity: 0.2 }
    }
}

pub fn generate_instance(generator: Generator, params: &GenParams, seed: u64) -> CliResult<InstanceFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut notes = Vec::new();
    let (payload, dims) = match generator {
        Generator::Circuit => {
            let v = random_verifier(&mut rng, params.bits)?;
            let dims = v.witness_layout().dims().to_vec();
            (Payload::Verifier(v), dims)
        }
        Generator::Contraction => {
            let layout = RegisterLayout::new(params.dims.clone())?;
            let m = random_nonneg_contraction(&mut rng, &layout, params.scale)?;
            (Payload::Matrix(MatrixPayload::from_operator(&m)), params.dims.clone())
        }
        Generator::Planted => {
            let layout = RegisterLayout::new(params.dims.clone())?;
            let inst = planted_product_instance(&mut rng, &layout, params.weight)?;
            let mut payload = MatrixPayload::from_operator(&inst.operator);
            payload.witness = Some(inst.witness.factors().iter().map(|f| f.iter().copied().collect()).collect());
            payload.planted_value = Some(inst.planted_value);
            notes.push(format!("planted weight {}", params.weight));
            (Payload::Matrix(payload), params.dims.clone())
        }
        Generator::Entangled => {
            let m = max_entangled_projector(params.d)?;
            (Payload::Matrix(MatrixPayload::from_operator(&m)), vec![params.d, params.d])
        }
        Generator::Distribution => {
            let layout = RegisterLayout::new(params.dims.clone())?;
            let p = random_distribution(&mut rng, &layout, params.sparsity)?;
            (
                Payload::Distribution(DistributionPayload { dims: params.dims.clone(), probs: p.probs().to_vec() }),
                params.dims.clone(),
            )
        }
        Generator::Bosonic => {
            let copies = vec![params.copies; params.dims.len().saturating_sub(1)];
            let layout = ExtensionLayout::new(params.dims.clone(), copies)?;
            let state = if params.mixed {
                random_bosonic_mixed(&mut rng, &layout, 2)?
            } else {
                random_bosonic_pure(&mut rng, &layout, false)?
            };
            let m = random_nonneg_contraction(&mut rng, &RegisterLayout::new(params.dims.clone())?, params.scale)?;
            let mut payload = StatePayload::from_state(&state);
            payload.operator = Some(MatrixPayload::from_operator(&m));
            (Payload::BosonicState(payload), params.dims.clone())
        }
    };
    Ok(InstanceFile::new(
        payload,
        Metadata { seed: Some(seed), generator: generator.name().into(), dims, notes },
    ))
}
