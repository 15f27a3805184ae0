//! Real linear algebra on tensor-product registers.
//!
//! Basis vectors of a [`RegisterLayout`] are addressed by mixed-radix digit
//! tuples with the first register most significant, which makes
//! [`tensor`] the ordinary Kronecker product.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::Permutation;

/// Default tolerance for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Default tolerance for spectral interval checks.
pub const PSD_TOL: f64 = 1e-9;
/// Above this dimension [`lambda_max`] switches to restarted Lanczos.
pub const DENSE_EIGEN_CUTOFF: usize = 512;

/// Local dimensions `d_1, …, d_m` of a tensor-product register.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct RegisterLayout {
    dims: Vec<usize>,
    total: usize,
}

impl TryFrom<Vec<usize>> for RegisterLayout {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<RegisterLayout> for Vec<usize> {
    fn from(l: RegisterLayout) -> Self {
        l.dims
    }
}

impl RegisterLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!("zero local dimension in {dims:?}")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidArgument(format!("dimension overflow for {dims:?}")))?;
        Ok(Self { dims, total })
    }

    /// `d` repeated `copies` times.
    pub fn uniform(d: usize, copies: usize) -> Result<Self> {
        Self::new(vec![d; copies])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_registers(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims).expect("product of valid layouts")
    }

    /// Stride of each register in the flat index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for (slot, &d) in digits.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        digits
    }

    /// Sub-layout on the given register positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        let dims = positions
            .iter()
            .map(|&p| {
                self.dims
                    .get(p)
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("position {p} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }
}

/// A computational-basis vector of a layout, as a digit tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisIndex(Vec<usize>);

impl BasisIndex {
    pub fn new(layout: &RegisterLayout, digits: Vec<usize>) -> Result<Self> {
        if digits.len() != layout.num_registers()
            || digits.iter().zip(layout.dims()).any(|(&x, &d)| x >= d)
        {
            return Err(Error::InvalidArgument(format!(
                "digits {digits:?} do not address layout {:?}",
                layout.dims()
            )));
        }
        Ok(Self(digits))
    }

    pub fn from_flat(layout: &RegisterLayout, index: usize) -> Self {
        Self(layout.digits_of(index))
    }

    pub fn flat(&self, layout: &RegisterLayout) -> usize {
        layout.index_of(&self.0)
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }
}

/// A dense real square matrix acting on a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RealOperator {
    layout: RegisterLayout,
    matrix: DMatrix<f64>,
}

impl RealOperator {
    pub fn new(layout: RegisterLayout, matrix: DMatrix<f64>) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for layout {:?} of dimension {n}",
                matrix.nrows(),
                matrix.ncols(),
                layout.dims()
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let n = layout.total_dim();
        Self { layout, matrix: DMatrix::identity(n, n) }
    }

    pub fn zeros(layout: RegisterLayout) -> Self {
        let n = layout.total_dim();
        Self { layout, matrix: DMatrix::zeros(n, n) }
    }

    pub fn from_row_major(layout: RegisterLayout, entries: &[f64]) -> Result<Self> {
        let n = layout.total_dim();
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        Self::new(layout, DMatrix::from_row_slice(n, n, entries))
    }

    /// Rank-one projector `|v⟩⟨v|`.
    pub fn projector(layout: RegisterLayout, v: &DVector<f64>) -> Result<Self> {
        Self::new(layout, v * v.transpose())
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.matrix.transpose().as_slice().to_vec()
    }

    pub fn transpose(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.transpose() }
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetric_part(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: (&self.matrix + self.matrix.transpose()) * 0.5,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { layout: self.layout.clone(), matrix: &self.matrix * s }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix - &other.matrix })
    }

    /// Matrix product, keeping `self`'s layout.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix * &other.matrix })
    }

    /// `(I + self)/2`, the affine map from overlaps to acceptance matrices.
    pub fn half_shift(&self) -> Self {
        let n = self.dim();
        Self {
            layout: self.layout.clone(),
            matrix: (DMatrix::identity(n, n) + &self.matrix) * 0.5,
        }
    }

    pub fn with_layout(self, layout: RegisterLayout) -> Result<Self> {
        Self::new(layout, self.matrix)
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.matrix * v))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }

    /// Largest absolute entry of `A − Aᵀ`.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.matrix
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

/// Kronecker product with concatenated layout.
pub fn tensor(a: &RealOperator, b: &RealOperator) -> RealOperator {
    RealOperator {
        layout: a.layout.concat(&b.layout),
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

/// Kronecker product of vectors.
pub fn tensor_vectors(factors: &[DVector<f64>]) -> DVector<f64> {
    factors
        .iter()
        .fold(DVector::from_element(1, 1.0), |acc, f| acc.kronecker(f))
}

/// `M ⊗ I_rest` with `M` acting on `tested_positions` of `full_layout`.
pub fn embed_on_tested(
    m_op: &RealOperator,
    full_layout: &RegisterLayout,
    tested_positions: &[usize],
) -> Result<RealOperator> {
    let tested = full_layout.select(tested_positions)?;
    if tested.dims() != m_op.layout().dims() {
        return Err(Error::DimensionMismatch(format!(
            "operator layout {:?} vs tested registers {:?}",
            m_op.layout().dims(),
            tested.dims()
        )));
    }
    let mut seen = vec![false; full_layout.num_registers()];
    for &p in tested_positions {
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidArgument(format!("repeated position {p}")));
        }
    }

    let strides = full_layout.strides();
    let tested_strides: Vec<usize> = tested_positions.iter().map(|&p| strides[p]).collect();
    let n = full_layout.total_dim();
    let t = tested.total_dim();
    let mut out = DMatrix::zeros(n, n);
    for col in 0..n {
        let digits = full_layout.digits_of(col);
        let tested_col = tested_positions
            .iter()
            .fold(0, |acc, &p| acc * full_layout.dims()[p] + digits[p]);
        let base = col
            - tested_positions
                .iter()
                .zip(&tested_strides)
                .map(|(&p, &s)| digits[p] * s)
                .sum::<usize>();
        for tested_row in 0..t {
            let value = m_op.matrix[(tested_row, tested_col)];
            if value == 0.0 {
                continue;
            }
            let row_digits = tested.digits_of(tested_row);
            let row = base
                + row_digits
                    .iter()
                    .zip(&tested_strides)
                    .map(|(&x, &s)| x * s)
                    .sum::<usize>();
            out[(row, col)] = value;
        }
    }
    RealOperator::new(full_layout.clone(), out)
}

/// Image of a basis index under the factor permutation that moves factor
/// `j` to position `tau(j)`.
pub fn permute_factors(tau: &Permutation, layout: &RegisterLayout, index: usize) -> usize {
    let digits = layout.digits_of(index);
    let mut out = vec![0; digits.len()];
    for (j, &x) in digits.iter().enumerate() {
        out[tau.apply(j)] = x;
    }
    layout.index_of(&out)
}

/// Permutation matrix `U_τ` on `A^{⊗R}`, `U_τ |a_1 … a_R⟩ = |b⟩` with `b_{τ(j)} = a_j`.
pub fn copy_permutation(tau: &Permutation, local_dim: usize) -> RealOperator {
    let layout = RegisterLayout::uniform(local_dim, tau.len()).expect("valid local dimension");
    let n = layout.total_dim();
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        m[(permute_factors(tau, &layout, a), a)] = 1.0;
    }
    RealOperator { layout, matrix: m }
}

pub fn is_entrywise_nonneg(op: &RealOperator, tol: f64) -> bool {
    op.matrix.iter().all(|&x| x >= -tol)
}

/// Whether every eigenvalue lies in `[−tol, 1 + tol]`.
pub fn psd_interval_check(op: &RealOperator, tol: f64) -> Result<bool> {
    let (lo, hi) = extremal_eigenvalues(op)?;
    Ok(lo >= -tol && hi <= 1.0 + tol)
}

/// Smallest and largest eigenvalue of a symmetric operator (dense solver).
pub fn extremal_eigenvalues(op: &RealOperator) -> Result<(f64, f64)> {
    ensure_symmetric(op)?;
    if op.dim() == 0 {
        return Ok((0.0, 0.0));
    }
    let eig = SymmetricEigen::new(op.matrix.clone());
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

fn ensure_symmetric(op: &RealOperator) -> Result<()> {
    let scale = op.matrix.amax().max(1.0);
    let asym = op.asymmetry();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Largest eigenvalue of a symmetric operator.
pub fn lambda_max(op: &RealOperator) -> Result<f64> {
    top_eigenpair(op).map(|(l, _)| l)
}

/// Largest eigenvalue and a unit eigenvector. Dense below
/// [`DENSE_EIGEN_CUTOFF`], restarted Lanczos above.
pub fn top_eigenpair(op: &RealOperator) -> Result<(f64, DVector<f64>)> {
    ensure_symmetric(op)?;
    if op.dim() <= DENSE_EIGEN_CUTOFF {
        Ok(dense_top_eigenpair(&op.matrix))
    } else {
        lanczos_top_eigenpair(&op.matrix, &LanczosConfig::default())
    }
}

pub fn dense_top_eigenpair(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let (k, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    (value, eig.eigenvectors.column(k).into_owned())
}

#[derive(Debug, Clone)]
pub struct LanczosConfig {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual tolerance relative to `max(1, |θ|)`.
    pub tol: f64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { krylov_dim: 120, max_restarts: 400, tol: 1e-11 }
    }
}

/// Explicitly restarted Lanczos with full reorthogonalization.
///
/// Each cycle builds a Krylov basis from the current Ritz vector; a cycle
/// that hits an invariant subspace restarts from a perturbed start vector
/// instead of deflating.
pub fn lanczos_top_eigenpair(
    m: &DMatrix<f64>,
    config: &LanczosConfig,
) -> Result<(f64, DVector<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if n == 1 {
        return Ok((m[(0, 0)], DVector::from_element(1, 1.0)));
    }
    let k = config.krylov_dim.min(n).max(2);
    // deterministic start with components in every coordinate
    let mut start = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract());
    start /= start.norm();
    let mut iterations = 0;

    for restart in 0..config.max_restarts {
        let mut basis: Vec<DVector<f64>> = vec![start.clone()];
        let mut alphas = Vec::with_capacity(k);
        let mut betas: Vec<f64> = Vec::with_capacity(k);
        let mut breakdown = false;
        for j in 0..k {
            iterations += 1;
            let mut w = m * &basis[j];
            let alpha = basis[j].dot(&w);
            alphas.push(alpha);
            for _ in 0..2 {
                for v in &basis {
                    let c = v.dot(&w);
                    w.axpy(-c, v, 1.0);
                }
            }
            let beta = w.norm();
            betas.push(beta);
            if beta <= 1e-13 * alpha.abs().max(1.0) {
                breakdown = true;
                break;
            }
            if j + 1 < k {
                basis.push(w / beta);
            }
        }

        let size = alphas.len();
        let mut tri = DMatrix::zeros(size, size);
        for i in 0..size {
            tri[(i, i)] = alphas[i];
            if i + 1 < size {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let (theta, s) = dense_top_eigenpair(&tri);
        let mut ritz = DVector::zeros(n);
        for (i, v) in basis.iter().take(size).enumerate() {
            ritz.axpy(s[i], v, 1.0);
        }
        ritz /= ritz.norm();
        let residual = (m * &ritz - &ritz * theta).norm();
        if residual <= config.tol * theta.abs().max(1.0) {
            return Ok((theta, ritz));
        }
        start = ritz;
        if breakdown {
            // invariant subspace without convergence: nudge out of it
            let nudge = DVector::from_fn(n, |i, _| {
                (((i + 7 * restart + 1) as f64) * 0.754_877_666).fract() - 0.5
            });
            start += nudge * 1e-3;
            start /= start.norm();
        }
    }
    Err(Error::NonConvergence(iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::all_permutations;

    fn pauli_x() -> RealOperator {
        RealOperator::from_row_major(RegisterLayout::new(vec![2]).unwrap(), &[0.0, 1.0, 1.0, 0.0])
            .unwrap()
    }

    fn id(d: usize) -> RealOperator {
        RealOperator::identity(RegisterLayout::new(vec![d]).unwrap())
    }

    #[test]
    fn layout_digits_round_trip() {
        let l = RegisterLayout::new(vec![2, 3, 2]).unwrap();
        assert_eq!(l.total_dim(), 12);
        assert_eq!(l.strides(), vec![6, 2, 1]);
        for i in 0..12 {
            assert_eq!(l.index_of(&l.digits_of(i)), i);
        }
        assert!(RegisterLayout::new(vec![2, 0]).is_err());
        assert!(BasisIndex::new(&l, vec![1, 3, 0]).is_err());
        assert_eq!(BasisIndex::new(&l, vec![1, 2, 1]).unwrap().flat(&l), 11);
    }

    #[test]
    fn identity_tensor_identity() {
        let t = tensor(&id(2), &id(2));
        assert_eq!(t, RealOperator::identity(RegisterLayout::new(vec![2, 2]).unwrap()));
    }

    #[test]
    fn x_tensor_i_flips_first_digit() {
        let t = tensor(&pauli_x(), &id(2));
        let l = t.layout().clone();
        let from = l.index_of(&[0, 1]);
        let to = l.index_of(&[1, 1]);
        let mut e = DVector::zeros(4);
        e[from] = 1.0;
        let image = t.apply(&e);
        assert_eq!(image[to], 1.0);
        assert_eq!(image.sum(), 1.0);
    }

    #[test]
    fn tensor_matches_four_index_definition() {
        let a = RealOperator::from_row_major(RegisterLayout::new(vec![2]).unwrap(), &[0.3, -1.2, 2.5, 0.7])
            .unwrap();
        let b = RealOperator::from_row_major(RegisterLayout::new(vec![2]).unwrap(), &[1.1, 0.4, -0.9, 3.0])
            .unwrap();
        let t = tensor(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(t.get(2 * i + k, 2 * j + l), a.get(i, j) * b.get(k, l));
                    }
                }
            }
        }
    }

    #[test]
    fn embed_on_single_positions() {
        let full = RegisterLayout::new(vec![2, 2]).unwrap();
        assert_eq!(embed_on_tested(&pauli_x(), &full, &[0]).unwrap(), tensor(&pauli_x(), &id(2)));
        assert_eq!(embed_on_tested(&pauli_x(), &full, &[1]).unwrap(), tensor(&id(2), &pauli_x()));
    }

    #[test]
    fn embed_on_all_positions_is_identity_map() {
        let l = RegisterLayout::new(vec![2, 3]).unwrap();
        let m = RealOperator::new(l.clone(), DMatrix::from_fn(6, 6, |i, j| (i * 7 + j) as f64)).unwrap();
        assert_eq!(embed_on_tested(&m, &l, &[0, 1]).unwrap(), m);
    }

    #[test]
    fn embed_matches_routing_conjugation() {
        // M on positions (0, 2) of (2, 3, 2): route to (0, 2, 1) order, tensor with I_3, route back.
        let ml = RegisterLayout::new(vec![2, 2]).unwrap();
        let m = RealOperator::new(ml, DMatrix::from_fn(4, 4, |i, j| 1.0 + i as f64 - 0.5 * j as f64)).unwrap();
        let full = RegisterLayout::new(vec![2, 3, 2]).unwrap();
        let embedded = embed_on_tested(&m, &full, &[0, 2]).unwrap();

        let routed_layout = RegisterLayout::new(vec![2, 2, 3]).unwrap();
        let routed = tensor(&m, &id(3));
        // P maps full index (a, b, c) to routed index (a, c, b)
        let mut p = DMatrix::zeros(12, 12);
        for idx in 0..12 {
            let d = full.digits_of(idx);
            p[(routed_layout.index_of(&[d[0], d[2], d[1]]), idx)] = 1.0;
        }
        let conj = p.transpose() * routed.matrix() * &p;
        assert!((conj - embedded.matrix()).amax() < 1e-15);
    }

    #[test]
    fn embed_rejects_mismatch() {
        let full = RegisterLayout::new(vec![2, 3]).unwrap();
        assert!(embed_on_tested(&pauli_x(), &full, &[1]).is_err());
    }

    #[test]
    fn copy_permutation_examples() {
        assert_eq!(
            copy_permutation(&Permutation::identity(3), 2),
            RealOperator::identity(RegisterLayout::uniform(2, 3).unwrap())
        );
        let swap = copy_permutation(&Permutation::transposition(2, 0, 1), 2);
        assert_eq!(swap.get(2, 1), 1.0); // |01⟩ -> |10⟩
        let cycle = Permutation::new(vec![1, 2, 0]).unwrap();
        let prod = copy_permutation(&cycle, 2).mul(&copy_permutation(&cycle.inverse(), 2)).unwrap();
        assert_eq!(prod, RealOperator::identity(RegisterLayout::uniform(2, 3).unwrap()));
    }

    #[test]
    fn copy_permutation_transpose_is_inverse() {
        for r in 1..=5 {
            for d in 1..=3 {
                if d == 3 && r == 5 {
                    continue;
                }
                for tau in all_permutations(r) {
                    assert_eq!(
                        copy_permutation(&tau, d).transpose(),
                        copy_permutation(&tau.inverse(), d)
                    );
                }
            }
        }
        // the d = 3, R = 5 case on a sample of permutations
        for tau in all_permutations(5).into_iter().step_by(7) {
            assert_eq!(copy_permutation(&tau, 3).transpose(), copy_permutation(&tau.inverse(), 3));
        }
    }

    #[test]
    fn copy_permutation_is_homomorphism() {
        let s = Permutation::new(vec![2, 0, 1, 3]).unwrap();
        let t = Permutation::new(vec![1, 0, 3, 2]).unwrap();
        let lhs = copy_permutation(&s, 2).mul(&copy_permutation(&t, 2)).unwrap();
        assert_eq!(lhs, copy_permutation(&s.compose(&t), 2));
    }

    #[test]
    fn nonnegativity_tolerance() {
        assert!(is_entrywise_nonneg(&id(3), 0.0));
        let bad = pauli_x().sub(&id(2).scale(2.0)).unwrap();
        assert!(!is_entrywise_nonneg(&bad, 0.0));
        let dust = RealOperator::from_row_major(RegisterLayout::new(vec![2]).unwrap(), &[1.0, -1e-14, -1e-14, 1.0])
            .unwrap();
        assert!(is_entrywise_nonneg(&dust, 1e-12));
    }

    #[test]
    fn psd_interval_examples() {
        assert!(psd_interval_check(&id(2).scale(0.5), 0.0).unwrap());
        assert!(!psd_interval_check(&id(2).scale(2.0), PSD_TOL).unwrap());
        let asym = RealOperator::from_row_major(RegisterLayout::new(vec![2]).unwrap(), &[0.0, 1.0, 0.0, 0.0])
            .unwrap();
        assert!(matches!(psd_interval_check(&asym, PSD_TOL), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn lambda_max_of_maximally_entangled_projector() {
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]) / 2f64.sqrt();
        let m = RealOperator::projector(RegisterLayout::new(vec![2, 2]).unwrap(), &v).unwrap();
        assert!((lambda_max(&m).unwrap() - 1.0).abs() < 1e-12);
        assert!((lambda_max(&id(5)).unwrap() - 1.0).abs() < 1e-12);
    }
}
