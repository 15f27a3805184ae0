//! Classical distributions over product alphabets: Hellinger distance,
//! relative entropy, Shannon entropy and mutual information (all in nats).

use crate::error::{Error, Result};
use crate::tensor::RegisterLayout;

/// Probabilities below this are treated as exact zeros.
pub const ZERO_PROB: f64 = 1e-15;
const NORMALIZATION_TOL: f64 = 1e-10;

/// A distribution on the product alphabet of a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    layout: RegisterLayout,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(layout: RegisterLayout, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for alphabet of size {}",
                probs.len(),
                layout.total_dim()
            )));
        }
        if let Some(p) = probs.iter().find(|&&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative or NaN probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self { layout, probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(layout: RegisterLayout, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("weights have no mass".into()));
        }
        Self::new(layout, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn point_mass(layout: RegisterLayout, index: usize) -> Self {
        let mut probs = vec![0.0; layout.total_dim()];
        probs[index] = 1.0;
        Self { layout, probs }
    }

    pub fn uniform(layout: RegisterLayout) -> Self {
        let n = layout.total_dim();
        Self { layout, probs: vec![1.0 / n as f64; n] }
    }

    /// Product of one-coordinate distributions.
    pub fn product(factors: &[Vec<f64>]) -> Result<Self> {
        let layout = RegisterLayout::new(factors.iter().map(Vec::len).collect())?;
        let probs = (0..layout.total_dim())
            .map(|i| {
                layout
                    .digits_of(i)
                    .iter()
                    .zip(factors)
                    .map(|(&x, f)| f[x])
                    .product()
            })
            .collect();
        Self::new(layout, probs)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_coords(&self) -> usize {
        self.layout.num_registers()
    }

    /// Marginal on `coords`, with coordinates in the given order.
    pub fn marginal(&self, coords: &[usize]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("empty coordinate set".into()));
        }
        let sub = self.layout.select(coords)?;
        let mut probs = vec![0.0; sub.total_dim()];
        for (i, &p) in self.probs.iter().enumerate() {
            probs[self.project_index(i, coords)] += p;
        }
        Ok(Self { layout: sub, probs })
    }

    /// One-coordinate marginal as a plain vector.
    pub fn coordinate_marginal(&self, coord: usize) -> Vec<f64> {
        let d = self.layout.dims()[coord];
        let stride = self.layout.strides()[coord];
        let mut out = vec![0.0; d];
        for (i, &p) in self.probs.iter().enumerate() {
            out[(i / stride) % d] += p;
        }
        out
    }

    pub fn product_of_marginals(&self) -> Self {
        let factors: Vec<Vec<f64>> = (0..self.num_coords())
            .map(|c| self.coordinate_marginal(c))
            .collect();
        let probs = (0..self.layout.total_dim())
            .map(|i| {
                self.layout
                    .digits_of(i)
                    .iter()
                    .zip(&factors)
                    .map(|(&x, f)| f[x])
                    .product()
            })
            .collect();
        Self { layout: self.layout.clone(), probs }
    }

    /// `p_coord ⊗ p_rest` laid out in the original coordinate order.
    pub fn split_product(&self, coord: usize) -> Self {
        let rest: Vec<usize> = (0..self.num_coords()).filter(|&c| c != coord).collect();
        let single = self.coordinate_marginal(coord);
        if rest.is_empty() {
            return self.clone();
        }
        let rest_marginal = self.marginal(&rest).expect("nonempty rest");
        let d = self.layout.dims()[coord];
        let stride = self.layout.strides()[coord];
        let probs = (0..self.layout.total_dim())
            .map(|i| single[(i / stride) % d] * rest_marginal.probs[self.project_index(i, &rest)])
            .collect();
        Self { layout: self.layout.clone(), probs }
    }

    /// Independent product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let layout = self.layout.concat(&other.layout);
        let mut probs = Vec::with_capacity(layout.total_dim());
        for &p in &self.probs {
            for &q in &other.probs {
                probs.push(p * q);
            }
        }
        Self { layout, probs }
    }

    fn project_index(&self, index: usize, coords: &[usize]) -> usize {
        let digits = self.layout.digits_of(index);
        coords
            .iter()
            .fold(0, |acc, &c| acc * self.layout.dims()[c] + digits[c])
    }

    fn check_same_alphabet(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch(format!(
                "alphabets {:?} and {:?}",
                self.layout.dims(),
                other.layout.dims()
            )));
        }
        Ok(())
    }
}

fn affinity(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&a, &b)| (a * b).sqrt()).sum()
}

/// Squared Hellinger distance `1 − Σ √(p q)`, clamped to `[0, 1]`.
pub fn hellinger_squared(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    Ok((1.0 - affinity(&p.probs, &q.probs)).clamp(0.0, 1.0))
}

pub fn hellinger(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    hellinger_squared(p, q).map(f64::sqrt)
}

/// `D_KL(p‖q)` in nats; `+∞` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    let mut total = 0.0;
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        if a <= ZERO_PROB {
            continue;
        }
        if b <= ZERO_PROB {
            return Ok(f64::INFINITY);
        }
        total += a * (a / b).ln();
    }
    Ok(total.max(0.0))
}

pub fn entropy(p: &JointDistribution) -> f64 {
    -p.probs
        .iter()
        .filter(|&&x| x > ZERO_PROB)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// `I(X_A; X_B)` as the relative entropy of the joint to the product of the
/// two block marginals. `coords_a ∪ coords_b` must be every coordinate.
pub fn mutual_information(
    p: &JointDistribution,
    coords_a: &[usize],
    coords_b: &[usize],
) -> Result<f64> {
    let m = p.num_coords();
    let mut seen = vec![false; m];
    for &c in coords_a.iter().chain(coords_b) {
        if c >= m || std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidArgument(format!(
                "coordinate sets {coords_a:?} and {coords_b:?} must partition 0..{m}"
            )));
        }
    }
    if seen.iter().any(|s| !s) || coords_a.is_empty() || coords_b.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "coordinate sets {coords_a:?} and {coords_b:?} must partition 0..{m}"
        )));
    }
    let pa = p.marginal(coords_a)?;
    let pb = p.marginal(coords_b)?;
    let mut total = 0.0;
    for (i, &x) in p.probs.iter().enumerate() {
        if x <= ZERO_PROB {
            continue;
        }
        let q = pa.probs[p.project_index(i, coords_a)] * pb.probs[p.project_index(i, coords_b)];
        total += x * (x / q).ln();
    }
    Ok(total.max(0.0))
}

/// `d_H(P, p_i ⊗ p_ī)`: how far coordinate `coord` is from independent of the rest.
pub fn split_hellinger(p: &JointDistribution, coord: usize) -> f64 {
    let q = p.split_product(coord);
    (1.0 - affinity(&p.probs, &q.probs)).clamp(0.0, 1.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HellingerKlReport {
    pub kl: f64,
    /// Squared Hellinger distance.
    pub hellinger_sq: f64,
    pub holds: bool,
}

/// Checks `D_KL(p‖q) ≥ 2 d_H(p, q)²`.
pub fn check_hellinger_kl(p: &JointDistribution, q: &JointDistribution) -> Result<HellingerKlReport> {
    let kl = kl(p, q)?;
    let hellinger_sq = hellinger_squared(p, q)?;
    Ok(HellingerKlReport { kl, hellinger_sq, holds: kl >= 2.0 * hellinger_sq - 1e-12 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorizationReport {
    /// `d_H(P, p_i ⊗ p_ī)` for every coordinate except the last.
    pub per_coordinate: Vec<f64>,
    /// `d_H(P, ∏ p_i)`.
    pub global: f64,
    pub holds: bool,
}

/// Checks that local closeness to independence (every coordinate but the
/// last within `delta`) implies `d_H(P, ∏ p_i) ≤ (m − 1)·delta`.
pub fn check_tensorization(p: &JointDistribution, delta: f64) -> Result<TensorizationReport> {
    let m = p.num_coords();
    if m < 2 {
        return Err(Error::InvalidArgument("tensorization needs at least two coordinates".into()));
    }
    let per_coordinate: Vec<f64> = (0..m - 1).map(|i| split_hellinger(p, i)).collect();
    let global = hellinger(p, &p.product_of_marginals())?;
    let hypothesis = per_coordinate.iter().all(|&h| h <= delta);
    let holds = !hypothesis || global <= (m - 1) as f64 * delta + 1e-12;
    Ok(TensorizationReport { per_coordinate, global, holds })
}
