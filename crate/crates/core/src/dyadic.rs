//! Dyadic approximate symmetrizer: an inverse-invariant distribution on
//! `S_R` whose probabilities are multiples of `2^{-q}`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::extension::DEFAULT_MAX_DIM;
use crate::permutation::{factorial, unrank_lexicographic, Permutation};
use crate::tensor::{copy_permutation, RealOperator, RegisterLayout};

/// Largest copy count whose factorial fits the branch arithmetic.
pub const MAX_COPIES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPermutationSampler {
    copies: usize,
    eta: f64,
    q: u32,
    n: u64,
    big_q: u64,
    l_count: u64,
    b: u64,
    enumeration: Vec<Permutation>,
}

/// Builds the sampler with the fewest branch bits `q` satisfying `2 R!/2^q ≤ η`.
pub fn build_sampler(copies: usize, eta: f64) -> Result<DyadicPermutationSampler> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta = {eta} outside (0, 1)")));
    }
    if copies == 0 || copies > MAX_COPIES {
        return Err(Error::InvalidArgument(format!("copies = {copies} outside 1..={MAX_COPIES}")));
    }
    let n = factorial(copies).expect("bounded by MAX_COPIES");
    let eta_exact = BigRational::from_float(eta).expect("finite");
    let mut q = 0u32;
    loop {
        let ratio = BigRational::new(BigInt::from(2 * n), BigInt::from(1u64) << q);
        if ratio <= eta_exact {
            break;
        }
        q += 1;
        if q > 62 {
            return Err(Error::InvalidArgument(format!("eta = {eta} needs more than 62 branch bits")));
        }
    }
    let big_q = 1u64 << q;
    let l_count = big_q / n;
    let b = big_q - l_count * n;
    let enumeration = (0..n)
        .map(|rank| unrank_lexicographic(copies, rank))
        .collect::<Result<Vec<_>>>()?;
    Ok(DyadicPermutationSampler { copies, eta, q, n, big_q, l_count, b, enumeration })
}

impl DyadicPermutationSampler {
    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Branch bits.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// `R!`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `2^q`.
    pub fn big_q(&self) -> u64 {
        self.big_q
    }

    /// `⌊Q/N⌋`.
    pub fn l_count(&self) -> u64 {
        self.l_count
    }

    /// Leftover branch values mapped to the identity.
    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn enumeration(&self) -> &[Permutation] {
        &self.enumeration
    }

    /// `⌈log₂(2N/η)⌉`, which equals `q` up to floating rounding of `η`.
    pub fn q_estimate(&self) -> u32 {
        (2.0 * self.n as f64 / self.eta).log2().ceil().max(0.0) as u32
    }

    /// `π(t)`: `τ_{t mod N}` below `L·N`, the identity above.
    pub fn pi_of(&self, t: u64) -> Result<&Permutation> {
        if t >= self.big_q {
            return Err(Error::InvalidArgument(format!("branch value {t} ≥ {}", self.big_q)));
        }
        if t < self.l_count * self.n {
            Ok(&self.enumeration[(t % self.n) as usize])
        } else {
            Ok(&self.enumeration[0])
        }
    }

    /// Exact probabilities `p(τ)`.
    pub fn distribution(&self) -> BTreeMap<Permutation, BigRational> {
        let q = BigInt::from(self.big_q);
        self.enumeration
            .iter()
            .enumerate()
            .map(|(rank, tau)| {
                let count = if rank == 0 { self.l_count + self.b } else { self.l_count };
                (tau.clone(), BigRational::new(BigInt::from(count), q.clone()))
            })
            .collect()
    }

    /// `Σ_τ |p(τ) − 1/N|`, exactly.
    pub fn total_variation(&self) -> BigRational {
        let uniform = BigRational::new(BigInt::from(1), BigInt::from(self.n));
        self.distribution()
            .values()
            .fold(BigRational::zero(), |acc, p| acc + (p - &uniform).abs())
    }

    /// Closed form `2b(N−1)/(NQ)`.
    pub fn total_variation_closed_form(&self) -> BigRational {
        BigRational::new(
            BigInt::from(2 * self.b) * BigInt::from(self.n - 1),
            BigInt::from(self.n) * BigInt::from(self.big_q),
        )
    }

    pub fn is_inverse_invariant(&self) -> bool {
        let dist = self.distribution();
        dist.iter().all(|(tau, p)| dist.get(&tau.inverse()) == Some(p))
    }

    pub fn tv_within_eta(&self) -> bool {
        BigRational::from_float(self.eta).is_some_and(|eta| self.total_variation() <= eta)
    }

    /// `E_t U_{π(t)}` on `A^{⊗R}`.
    pub fn approx_projector(&self, local_dim: usize) -> Result<RealOperator> {
        self.approx_projector_capped(local_dim, DEFAULT_MAX_DIM)
    }

    pub fn approx_projector_capped(&self, local_dim: usize, cap: usize) -> Result<RealOperator> {
        let layout = RegisterLayout::uniform(local_dim, self.copies)?;
        let dim = layout.total_dim();
        if dim > cap {
            return Err(Error::CapExceeded { size: dim, cap });
        }
        let mut acc = DMatrix::zeros(dim, dim);
        for (tau, p) in self.distribution() {
            let weight = p.to_f64().expect("finite");
            acc += copy_permutation(&tau, local_dim).matrix() * weight;
        }
        RealOperator::new(layout, acc)
    }
}
