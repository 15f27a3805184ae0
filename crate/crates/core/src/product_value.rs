//! The nonnegative product value `ω₊(M)`: the maximum of
//! `⟨⊗x_i, M ⊗x_i⟩` over entrywise-nonnegative unit vectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{is_entrywise_nonneg, tensor_vectors, RealOperator, RegisterLayout, SYMMETRY_TOL};

const UNIT_TOL: f64 = 1e-10;

/// One nonnegative unit vector per register.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWitness {
    factors: Vec<DVector<f64>>,
}

impl ProductWitness {
    pub fn new(factors: Vec<DVector<f64>>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.iter().any(|&x| x < 0.0) {
                return Err(Error::InvalidArgument(format!("factor {i} has a negative entry")));
            }
            if (f.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidArgument(format!("factor {i} has norm {}", f.norm())));
            }
        }
        Ok(Self { factors })
    }

    /// Entrywise absolute values of arbitrary unit factors.
    pub fn from_abs(factors: &[DVector<f64>]) -> Result<Self> {
        Self::new(factors.iter().map(|f| f.abs()).collect())
    }

    /// The witness `(e_{a_1}, …, e_{a_m})`.
    pub fn basis(layout: &RegisterLayout, digits: &[usize]) -> Result<Self> {
        let factors = layout
            .dims()
            .iter()
            .zip(digits)
            .map(|(&d, &a)| {
                let mut e = DVector::zeros(d);
                e[a] = 1.0;
                e
            })
            .collect();
        Self::new(factors)
    }

    pub fn uniform(layout: &RegisterLayout) -> Self {
        Self {
            factors: layout
                .dims()
                .iter()
                .map(|&d| DVector::from_element(d, 1.0 / (d as f64).sqrt()))
                .collect(),
        }
    }

    pub fn factors(&self) -> &[DVector<f64>] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.len()).collect()
    }

    pub fn tensor(&self) -> DVector<f64> {
        tensor_vectors(&self.factors)
    }
}

fn check_layout(m_op: &RealOperator, dims: &[usize]) -> Result<()> {
    if m_op.layout().dims() != dims {
        return Err(Error::DimensionMismatch(format!(
            "operator layout {:?} vs witness dims {dims:?}",
            m_op.layout().dims()
        )));
    }
    Ok(())
}

/// `⟨⊗x_i, M ⊗x_i⟩`.
pub fn product_value(m_op: &RealOperator, w: &ProductWitness) -> Result<f64> {
    product_form(m_op, w.factors())
}

/// Same quadratic form for arbitrary (possibly signed) factors.
pub fn product_form(m_op: &RealOperator, factors: &[DVector<f64>]) -> Result<f64> {
    let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
    check_layout(m_op, &dims)?;
    Ok(m_op.quadratic_form(&tensor_vectors(factors)))
}

/// `K_i = (⊗_{j≠i} x_j ⊗ I_i)ᵀ M (⊗_{j≠i} x_j ⊗ I_i)`, the form seen by factor `i`.
pub fn induced_matrix(m_op: &RealOperator, factors: &[DVector<f64>], i: usize) -> DMatrix<f64> {
    let layout = m_op.layout();
    let n = layout.total_dim();
    let d = layout.dims()[i];
    let mut weight = vec![0.0; n];
    let mut digit = vec![0; n];
    for (x, (w, a)) in weight.iter_mut().zip(digit.iter_mut()).enumerate() {
        let digits = layout.digits_of(x);
        *a = digits[i];
        *w = digits
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, &xj)| factors[j][xj])
            .product();
    }
    let m = m_op.matrix();
    let mut k = DMatrix::zeros(d, d);
    for y in 0..n {
        if weight[y] == 0.0 {
            continue;
        }
        for x in 0..n {
            if weight[x] != 0.0 {
                k[(digit[x], digit[y])] += weight[x] * m[(x, y)] * weight[y];
            }
        }
    }
    k
}

/// Nonnegative top eigenvector of an entrywise-nonnegative symmetric matrix.
/// On a degenerate top eigenvalue the previous factor is projected onto the
/// top eigenspace before taking absolute values.
pub fn perron_vector(k: &DMatrix<f64>, previous: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(k.clone());
    let top = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cutoff = top - 1e-12 * top.abs().max(1.0);
    let space: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= cutoff)
        .map(|(j, _)| eig.eigenvectors.column(j).into_owned())
        .collect();
    let mut proj = DVector::zeros(k.nrows());
    for v in &space {
        proj.axpy(v.dot(previous), v, 1.0);
    }
    let chosen = if proj.norm() > 1e-12 { proj.abs() } else { space[0].abs() };
    let norm = chosen.norm();
    chosen / norm
}

fn nonneg_unit_grid(d: usize, points: usize) -> Vec<DVector<f64>> {
    let g = points.max(2);
    let angle = |k: usize| std::f64::consts::FRAC_PI_2 * k as f64 / (g - 1) as f64;
    match d {
        1 => vec![DVector::from_element(1, 1.0)],
        2 => (0..g)
            .map(|k| DVector::from_vec(vec![angle(k).cos(), angle(k).sin()]))
            .collect(),
        3 => {
            let mut out = Vec::with_capacity(g * g);
            for a in 0..g {
                let (st, ct) = angle(a).sin_cos();
                for b in 0..g {
                    let (sp, cp) = angle(b).sin_cos();
                    out.push(DVector::from_vec(vec![ct, st * cp, st * sp]));
                }
            }
            out
        }
        _ => unreachable!("grid regime is checked by the caller"),
    }
}

/// Additive accuracy of [`omega_plus_grid`] for contractions.
pub fn grid_tolerance(num_registers: usize, grid_points_per_angle: usize) -> f64 {
    4.0 * num_registers as f64 * std::f64::consts::PI / grid_points_per_angle as f64
}

/// Maximum of the product value over a spherical-coordinate grid of the
/// nonnegative orthant of each factor. Certified lower bound on `ω₊`.
pub fn omega_plus_grid(m_op: &RealOperator, grid_points_per_angle: usize) -> Result<f64> {
    let dims = m_op.layout().dims();
    if dims.len() > 3 || dims.iter().any(|&d| d > 3) {
        return Err(Error::Precondition(format!(
            "grid oracle supports at most 3 registers of dimension at most 3, got {dims:?}"
        )));
    }
    let grids: Vec<Vec<DVector<f64>>> = dims
        .iter()
        .map(|&d| nonneg_unit_grid(d, grid_points_per_angle))
        .collect();
    Ok(grid_max(m_op.matrix(), dims, &grids))
}

fn grid_max(m: &DMatrix<f64>, dims: &[usize], grids: &[Vec<DVector<f64>>]) -> f64 {
    if dims.len() == 1 {
        return grids[0]
            .iter()
            .map(|x| x.dot(&(m * x)))
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let d = dims[0];
    let rest: usize = dims[1..].iter().product();
    let mut best = f64::NEG_INFINITY;
    let mut reduced = DMatrix::zeros(rest, rest);
    for x in &grids[0] {
        reduced.fill(0.0);
        for a in 0..d {
            for b in 0..d {
                let w = x[a] * x[b];
                if w != 0.0 {
                    reduced += m.view((a * rest, b * rest), (rest, rest)) * w;
                }
            }
        }
        best = best.max(grid_max(&reduced, &dims[1..], &grids[1..]));
    }
    best
}

#[derive(Debug, Clone)]
pub struct AlternatingConfig {
    pub restarts: usize,
    pub seed: u64,
    pub stagnation_tol: f64,
    pub max_sweeps: usize,
}

impl Default for AlternatingConfig {
    fn default() -> Self {
        Self { restarts: 50, seed: 0, stagnation_tol: 1e-10, max_sweeps: 10_000 }
    }
}

#[derive(Debug, Clone)]
pub struct AlternatingResult {
    pub value: f64,
    pub witness: ProductWitness,
    /// Product value after every factor update, one list per restart.
    pub histories: Vec<Vec<f64>>,
}

/// Block-coordinate ascent with Perron-vector updates, best of seeded restarts.
pub fn omega_plus_alternating(m_op: &RealOperator, restarts: usize, seed: u64) -> Result<AlternatingResult> {
    omega_plus_alternating_with(m_op, &AlternatingConfig { restarts, seed, ..Default::default() })
}

pub fn omega_plus_alternating_with(m_op: &RealOperator, config: &AlternatingConfig) -> Result<AlternatingResult> {
    if !is_entrywise_nonneg(m_op, 0.0) {
        return Err(Error::Precondition("operator has negative entries".into()));
    }
    if !m_op.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::NotSymmetric(m_op.asymmetry()));
    }
    let dims = m_op.layout().dims().to_vec();
    let mut seeder = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<(f64, Vec<DVector<f64>>)> = None;
    let mut histories = Vec::with_capacity(config.restarts.max(1));

    for _ in 0..config.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seeder.next_u64());
        let mut factors: Vec<DVector<f64>> = dims
            .iter()
            .map(|&d| {
                let v = DVector::from_fn(d, |_, _| rng.random::<f64>() + 1e-3);
                let n = v.norm();
                v / n
            })
            .collect();
        let mut value = product_form(m_op, &factors)?;
        let mut history = vec![value];
        for _ in 0..config.max_sweeps {
            let before = value;
            for i in 0..dims.len() {
                let k = induced_matrix(m_op, &factors, i);
                factors[i] = perron_vector(&k, &factors[i]);
                value = product_form(m_op, &factors)?;
                history.push(value);
            }
            if value - before < config.stagnation_tol {
                break;
            }
        }
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, factors));
        }
        histories.push(history);
    }
    let (value, factors) = best.expect("at least one restart");
    Ok(AlternatingResult { value, witness: ProductWitness::new(factors)?, histories })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_entangled(d: usize) -> RealOperator {
        let layout = RegisterLayout::new(vec![d, d]).unwrap();
        let mut v = DVector::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = 1.0 / (d as f64).sqrt();
        }
        RealOperator::projector(layout, &v).unwrap()
    }

    fn basis_projector(dims: Vec<usize>, index: usize) -> RealOperator {
        let layout = RegisterLayout::new(dims).unwrap();
        let mut v = DVector::zeros(layout.total_dim());
        v[index] = 1.0;
        RealOperator::projector(layout, &v).unwrap()
    }

    #[test]
    fn product_value_examples() {
        let layout = RegisterLayout::new(vec![2, 3]).unwrap();
        let id = RealOperator::identity(layout.clone());
        let w = ProductWitness::uniform(&layout);
        assert!((product_value(&id, &w).unwrap() - 1.0).abs() < 1e-15);

        let e00 = ProductWitness::basis(&RegisterLayout::new(vec![2, 2]).unwrap(), &[0, 0]).unwrap();
        assert!((product_value(&max_entangled(2), &e00).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(product_value(&basis_projector(vec![2, 2], 0), &e00).unwrap(), 1.0);
        assert!(product_value(&id, &e00).is_err());
    }

    #[test]
    fn witness_validation() {
        assert!(ProductWitness::new(vec![DVector::from_vec(vec![-1.0, 0.0])]).is_err());
        assert!(ProductWitness::new(vec![DVector::from_vec(vec![1.0, 1.0])]).is_err());
        let w = ProductWitness::from_abs(&[DVector::from_vec(vec![-0.6, 0.8])]).unwrap();
        assert_eq!(w.factors()[0], DVector::from_vec(vec![0.6, 0.8]));
    }

    #[test]
    fn grid_examples() {
        let id = RealOperator::identity(RegisterLayout::new(vec![2, 3]).unwrap());
        assert!((omega_plus_grid(&id, 5).unwrap() - 1.0).abs() < 1e-12);
        let g = omega_plus_grid(&max_entangled(2), 2000).unwrap();
        assert!((g - 0.5).abs() < 1e-4);
        let b = omega_plus_grid(&basis_projector(vec![2, 2], 0), 50).unwrap();
        assert!((b - 1.0).abs() < 1e-6);
        assert!(omega_plus_grid(&max_entangled(4), 10).is_err());
    }

    #[test]
    fn alternating_examples() {
        let id = RealOperator::identity(RegisterLayout::new(vec![2, 2]).unwrap());
        assert!((omega_plus_alternating(&id, 3, 1).unwrap().value - 1.0).abs() < 1e-12);
        for d in 2..=4 {
            let r = omega_plus_alternating(&max_entangled(d), 50, 7).unwrap();
            assert!((r.value - 1.0 / d as f64).abs() < 1e-8, "d = {d}: {}", r.value);
        }
    }

    #[test]
    fn alternating_rejects_signed_input() {
        let m = RealOperator::from_row_major(RegisterLayout::new(vec![2]).unwrap(), &[1.0, -0.1, -0.1, 1.0])
            .unwrap();
        assert!(omega_plus_alternating(&m, 2, 0).is_err());
    }

    #[test]
    fn perron_vector_handles_degeneracy() {
        let k = DMatrix::identity(3, 3);
        let prev = DVector::from_vec(vec![0.0, -0.6, 0.8]);
        assert_eq!(perron_vector(&k, &prev), DVector::from_vec(vec![0.0, 0.6, 0.8]));
        let v = perron_vector(&k, &DVector::zeros(3));
        assert!(v.iter().all(|&x| x >= 0.0));
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }
}
