//! Symmetric subspaces and the separately symmetric extension
//! `𝓔_R(M) = Π_R^{<m} (M_tested ⊗ I_rest) Π_R^{<m}`.
//!
//! The extended register is `A_1^{⊗r_1} ⊗ ⋯ ⊗ A_{m−1}^{⊗r_{m−1}} ⊗ A_m`,
//! blocks laid out contiguously. The tested registers are the first copy of
//! every extended block plus the final register.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::product_value::{omega_plus_alternating, omega_plus_grid, ProductWitness};
use crate::tensor::{
    embed_on_tested, lambda_max, permute_factors, tensor, tensor_vectors, RealOperator, RegisterLayout,
};

/// Default cap on the dimension of dense operators built here.
pub const DEFAULT_MAX_DIM: usize = 4096;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(())
}

/// Occupation-number basis of `Sym^R(A)` for `dim A = d`.
#[derive(Debug, Clone)]
pub struct SymmetricBasis {
    local_dim: usize,
    copies: usize,
    occupations: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    class_sizes: Vec<f64>,
}

impl SymmetricBasis {
    pub fn new(local_dim: usize, copies: usize) -> Result<Self> {
        if local_dim == 0 || copies == 0 {
            return Err(Error::InvalidArgument("local dimension and copies must be positive".into()));
        }
        let mut occupations = Vec::new();
        let mut current = vec![0; local_dim];
        fill_occupations(&mut current, 0, copies, &mut occupations);
        let index = occupations
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let class_sizes = occupations.iter().map(|n| multinomial(copies, n)).collect();
        Ok(Self { local_dim, copies, occupations, index, class_sizes })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    /// Occupation vectors `(n_1, …, n_d)` in descending lexicographic order, so
    /// that `Sym^1(A)` keeps the basis order of `A`.
    pub fn occupations(&self) -> &[Vec<usize>] {
        &self.occupations
    }

    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Number of strings `R!/∏ n_j!` in occupation class `k`.
    pub fn class_size(&self, k: usize) -> f64 {
        self.class_sizes[k]
    }

    /// Occupation class of a basis string of `A^{⊗R}`.
    pub fn class_of_digits(&self, digits: &[usize]) -> usize {
        let mut occ = vec![0; self.local_dim];
        for &a in digits {
            occ[a] += 1;
        }
        self.index[&occ]
    }

    /// Dense isometry `V : Sym^R(A) → A^{⊗R}`; column `k` is the normalized
    /// uniform superposition of class `k`.
    pub fn isometry(&self) -> DMatrix<f64> {
        let layout = RegisterLayout::uniform(self.local_dim, self.copies).expect("valid");
        let mut v = DMatrix::zeros(layout.total_dim(), self.dim());
        for s in 0..layout.total_dim() {
            let k = self.class_of_digits(&layout.digits_of(s));
            v[(s, k)] = 1.0 / self.class_sizes[k].sqrt();
        }
        v
    }
}

fn fill_occupations(current: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for n in (0..=remaining).rev() {
        current[pos] = n;
        fill_occupations(current, pos + 1, remaining - n, out);
    }
}

fn multinomial(total: usize, parts: &[usize]) -> f64 {
    let mut value = 1.0;
    let mut placed = 0;
    for &n in parts {
        for i in 1..=n {
            placed += 1;
            value *= placed as f64 / i as f64;
        }
    }
    debug_assert_eq!(placed, total);
    value.round()
}

/// `Π_R = V Vᵀ` on `A^{⊗R}`: entry `1/|class|` between strings sharing an
/// occupation class.
pub fn sym_projector(local_dim: usize, copies: usize) -> Result<RealOperator> {
    sym_projector_capped(local_dim, copies, DEFAULT_MAX_DIM)
}

pub fn sym_projector_capped(local_dim: usize, copies: usize, cap: usize) -> Result<RealOperator> {
    let layout = RegisterLayout::uniform(local_dim, copies)?;
    check_cap(layout.total_dim(), cap)?;
    let basis = SymmetricBasis::new(local_dim, copies)?;
    let classes: Vec<usize> = (0..layout.total_dim())
        .map(|s| basis.class_of_digits(&layout.digits_of(s)))
        .collect();
    let n = layout.total_dim();
    let matrix = DMatrix::from_fn(n, n, |s, t| {
        if classes[s] == classes[t] {
            1.0 / basis.class_size(classes[s])
        } else {
            0.0
        }
    });
    RealOperator::new(layout, matrix)
}

/// Shape of an extended register: `copies[i]` copies of `base_dims[i]` for
/// every register but the last, which stays single.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionLayout {
    base_dims: Vec<usize>,
    copies: Vec<usize>,
}

impl ExtensionLayout {
    pub fn new(base_dims: Vec<usize>, copies: Vec<usize>) -> Result<Self> {
        if base_dims.len() < 2 {
            return Err(Error::InvalidArgument("extension needs at least two registers".into()));
        }
        if copies.len() + 1 != base_dims.len() || copies.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "copies {copies:?} do not match base dims {base_dims:?}"
            )));
        }
        RegisterLayout::new(base_dims.clone())?;
        Ok(Self { base_dims, copies })
    }

    /// `R` copies of every register but the last.
    pub fn uniform(base_dims: &[usize], copies: usize) -> Result<Self> {
        Self::new(base_dims.to_vec(), vec![copies; base_dims.len().saturating_sub(1)])
    }

    pub fn base_dims(&self) -> &[usize] {
        &self.base_dims
    }

    pub fn base_layout(&self) -> RegisterLayout {
        RegisterLayout::new(self.base_dims.clone()).expect("validated")
    }

    pub fn copies(&self) -> &[usize] {
        &self.copies
    }

    pub fn num_blocks(&self) -> usize {
        self.copies.len()
    }

    /// Register position of the first copy of each block, then the final register.
    pub fn tested_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.base_dims.len());
        let mut offset = 0;
        for &r in &self.copies {
            out.push(offset);
            offset += r;
        }
        out.push(offset);
        out
    }

    pub fn full_layout(&self) -> RegisterLayout {
        let mut dims = Vec::new();
        for (&d, &r) in self.base_dims.iter().zip(&self.copies) {
            dims.extend(std::iter::repeat_n(d, r));
        }
        dims.push(*self.base_dims.last().expect("nonempty"));
        RegisterLayout::new(dims).expect("valid dims")
    }

    pub fn full_dim(&self) -> usize {
        self.full_layout().total_dim()
    }

    pub fn compressed_layout(&self) -> RegisterLayout {
        let mut dims: Vec<usize> = self
            .base_dims
            .iter()
            .zip(&self.copies)
            .map(|(&d, &r)| binomial(d + r - 1, r))
            .collect();
        dims.push(*self.base_dims.last().expect("nonempty"));
        RegisterLayout::new(dims).expect("valid dims")
    }

    /// Same layout with block `block` holding one copy fewer.
    pub fn with_one_fewer(&self, block: usize) -> Result<Self> {
        let mut copies = self.copies.clone();
        if copies[block] < 2 {
            return Err(Error::Precondition(format!("block {block} has a single copy")));
        }
        copies[block] -= 1;
        Self::new(self.base_dims.clone(), copies)
    }
}

/// The isometry from `Sym^{r_1}(A_1) ⊗ ⋯ ⊗ Sym^{r_{m−1}}(A_{m−1}) ⊗ A_m`
/// into the full extended register.
#[derive(Debug, Clone)]
pub struct SeparableIsometry {
    layout: ExtensionLayout,
    bases: Vec<SymmetricBasis>,
    class_of: Vec<usize>,
    coefficient: Vec<f64>,
}

impl SeparableIsometry {
    pub fn new(layout: &ExtensionLayout) -> Result<Self> {
        Self::with_cap(layout, usize::MAX)
    }

    pub fn with_cap(layout: &ExtensionLayout, cap: usize) -> Result<Self> {
        let full = layout.full_layout();
        check_cap(full.total_dim(), cap)?;
        let bases = layout
            .base_dims
            .iter()
            .zip(&layout.copies)
            .map(|(&d, &r)| SymmetricBasis::new(d, r))
            .collect::<Result<Vec<_>>>()?;
        let compressed = layout.compressed_layout();
        let mut class_of = Vec::with_capacity(full.total_dim());
        let mut coefficient = Vec::with_capacity(full.total_dim());
        for s in 0..full.total_dim() {
            let digits = full.digits_of(s);
            let mut cdigits = Vec::with_capacity(bases.len() + 1);
            let mut size = 1.0;
            let mut offset = 0;
            for (basis, &r) in bases.iter().zip(&layout.copies) {
                let k = basis.class_of_digits(&digits[offset..offset + r]);
                size *= basis.class_size(k);
                cdigits.push(k);
                offset += r;
            }
            cdigits.push(digits[offset]);
            class_of.push(compressed.index_of(&cdigits));
            coefficient.push(1.0 / size.sqrt());
        }
        Ok(Self { layout: layout.clone(), bases, class_of, coefficient })
    }

    pub fn layout(&self) -> &ExtensionLayout {
        &self.layout
    }

    pub fn bases(&self) -> &[SymmetricBasis] {
        &self.bases
    }

    pub fn full_dim(&self) -> usize {
        self.class_of.len()
    }

    pub fn compressed_dim(&self) -> usize {
        self.layout.compressed_layout().total_dim()
    }

    /// `V c`.
    pub fn expand(&self, c: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.full_dim(), |s, _| c[self.class_of[s]] * self.coefficient[s])
    }

    /// `Vᵀ v`.
    pub fn compress(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut c = DVector::zeros(self.compressed_dim());
        for (s, &x) in v.iter().enumerate() {
            c[self.class_of[s]] += self.coefficient[s] * x;
        }
        c
    }

    /// `Π^{<m} v`: averages amplitudes over each product occupation class.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        self.expand(&self.compress(v))
    }

    /// `Π^{<m} ρ Π^{<m}`.
    pub fn project_density(&self, rho: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.full_dim();
        let c = self.compressed_dim();
        // Vᵀ ρ V without forming V
        let mut left = DMatrix::<f64>::zeros(c, n);
        for s in 0..n {
            for t in 0..n {
                left[(self.class_of[s], t)] += self.coefficient[s] * rho[(s, t)];
            }
        }
        let mut core = DMatrix::<f64>::zeros(c, c);
        for t in 0..n {
            for k in 0..c {
                core[(k, self.class_of[t])] += left[(k, t)] * self.coefficient[t];
            }
        }
        DMatrix::from_fn(n, n, |s, t| {
            self.coefficient[s] * core[(self.class_of[s], self.class_of[t])] * self.coefficient[t]
        })
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(self.full_dim(), self.compressed_dim());
        for s in 0..self.full_dim() {
            v[(s, self.class_of[s])] = self.coefficient[s];
        }
        v
    }
}

fn check_base_layout(m_op: &RealOperator) -> Result<()> {
    if m_op.layout().num_registers() < 2 {
        return Err(Error::InvalidArgument(
            "extension needs an operator on at least two registers".into(),
        ));
    }
    Ok(())
}

/// `𝓔_R(M)` on the full extended register.
pub fn extension_operator(m_op: &RealOperator, copies: usize) -> Result<RealOperator> {
    extension_operator_capped(m_op, copies, DEFAULT_MAX_DIM)
}

pub fn extension_operator_capped(m_op: &RealOperator, copies: usize, cap: usize) -> Result<RealOperator> {
    check_base_layout(m_op)?;
    let layout = ExtensionLayout::uniform(m_op.layout().dims(), copies)?;
    let full = layout.full_layout();
    check_cap(full.total_dim(), cap)?;
    let tested = embed_on_tested(m_op, &full, &layout.tested_positions())?;
    let proj = separable_projector(&layout)?;
    let e = proj.mul(&tested)?.mul(&proj)?;
    Ok(e.symmetric_part())
}

/// `Π_{r_1}^{A_1} ⊗ ⋯ ⊗ Π_{r_{m−1}}^{A_{m−1}} ⊗ I_{A_m}` as a dense operator.
pub fn separable_projector(layout: &ExtensionLayout) -> Result<RealOperator> {
    let last = *layout.base_dims.last().expect("nonempty");
    let mut proj = RealOperator::identity(RegisterLayout::new(vec![])?);
    for (&d, &r) in layout.base_dims.iter().zip(&layout.copies) {
        proj = tensor(&proj, &sym_projector_capped(d, r, usize::MAX)?);
    }
    Ok(tensor(&proj, &RealOperator::identity(RegisterLayout::new(vec![last])?)))
}

/// `Vᵀ (M_tested ⊗ I) V` in occupation-number coordinates, built from the
/// one-copy decomposition `|n⟩ = Σ_a √(n_a/R) |a⟩ ⊗ |n − e_a⟩`.
pub fn extension_operator_compressed(m_op: &RealOperator, copies: usize) -> Result<RealOperator> {
    extension_operator_compressed_capped(m_op, copies, DEFAULT_MAX_DIM)
}

pub fn extension_operator_compressed_capped(
    m_op: &RealOperator,
    copies: usize,
    cap: usize,
) -> Result<RealOperator> {
    check_base_layout(m_op)?;
    let layout = ExtensionLayout::uniform(m_op.layout().dims(), copies)?;
    compressed_operator_for(m_op, &layout, cap)
}

/// Compressed extension for arbitrary per-block copy numbers.
pub fn compressed_operator_for(m_op: &RealOperator, layout: &ExtensionLayout, cap: usize) -> Result<RealOperator> {
    if m_op.layout().dims() != layout.base_dims() {
        return Err(Error::DimensionMismatch(format!(
            "operator layout {:?} vs extension base {:?}",
            m_op.layout().dims(),
            layout.base_dims()
        )));
    }
    let clayout = layout.compressed_layout();
    let cdim = clayout.total_dim();
    check_cap(cdim, cap)?;
    let bases = layout
        .base_dims
        .iter()
        .zip(&layout.copies)
        .map(|(&d, &r)| SymmetricBasis::new(d, r))
        .collect::<Result<Vec<_>>>()?;
    let base = m_op.layout();
    let blocks = bases.len();
    let last_dim = *layout.base_dims.last().expect("nonempty");
    let m = m_op.matrix();
    let mut out = DMatrix::zeros(cdim, cdim);

    for col in 0..cdim {
        let cdigits = clayout.digits_of(col);
        let a_last = cdigits[blocks];
        // removal choices per block: (a, amplitude, residual occupation)
        let removals: Vec<Vec<(usize, f64, Vec<usize>)>> = bases
            .iter()
            .zip(&cdigits)
            .map(|(basis, &k)| {
                let n = &basis.occupations()[k];
                let r = basis.copies() as f64;
                (0..basis.local_dim())
                    .filter(|&a| n[a] > 0)
                    .map(|a| {
                        let mut res = n.clone();
                        res[a] -= 1;
                        (a, (n[a] as f64 / r).sqrt(), res)
                    })
                    .collect()
            })
            .collect();

        for_each_choice(&removals, &mut |picked| {
            let alpha: f64 = picked.iter().map(|p| p.1).product();
            let mut a_digits: Vec<usize> = picked.iter().map(|p| p.0).collect();
            a_digits.push(a_last);
            let a_index = base.index_of(&a_digits);
            // insertion choices per block
            let insertions: Vec<Vec<(usize, f64, usize)>> = bases
                .iter()
                .zip(picked)
                .map(|(basis, p)| {
                    let r = basis.copies() as f64;
                    (0..basis.local_dim())
                        .map(|b| {
                            let mut occ = p.2.clone();
                            occ[b] += 1;
                            let amp = (occ[b] as f64 / r).sqrt();
                            (b, amp, basis.index_of(&occ).expect("valid occupation"))
                        })
                        .collect()
                })
                .collect();
            for_each_choice(&insertions, &mut |ins| {
                let beta: f64 = ins.iter().map(|p| p.1).product();
                let mut b_digits: Vec<usize> = ins.iter().map(|p| p.0).collect();
                let mut rdigits: Vec<usize> = ins.iter().map(|p| p.2).collect();
                for b_last in 0..last_dim {
                    b_digits.push(b_last);
                    rdigits.push(b_last);
                    let value = m[(base.index_of(&b_digits), a_index)];
                    if value != 0.0 {
                        out[(clayout.index_of(&rdigits), col)] += beta * alpha * value;
                    }
                    b_digits.pop();
                    rdigits.pop();
                }
            });
        });
    }
    RealOperator::new(clayout, out).map(|e| e.symmetric_part())
}

fn for_each_choice<T>(options: &[Vec<T>], f: &mut dyn FnMut(&[&T])) {
    fn rec<'a, T>(options: &'a [Vec<T>], picked: &mut Vec<&'a T>, f: &mut dyn FnMut(&[&T])) {
        if picked.len() == options.len() {
            f(picked);
            return;
        }
        for o in &options[picked.len()] {
            picked.push(o);
            rec(options, picked, f);
            picked.pop();
        }
    }
    rec(options, &mut Vec::with_capacity(options.len()), f);
}

/// `Λ_R(M)` through the compressed operator.
pub fn lambda_r(m_op: &RealOperator, copies: usize) -> Result<f64> {
    lambda_max(&extension_operator_compressed(m_op, copies)?)
}

/// `x_1^{⊗R} ⊗ ⋯ ⊗ x_{m−1}^{⊗R} ⊗ x_m` in full coordinates.
pub fn lift_product_witness(w: &ProductWitness, copies: usize) -> Result<DVector<f64>> {
    let layout = ExtensionLayout::uniform(&w.dims(), copies)?;
    lift_for(w, &layout)
}

pub fn lift_for(w: &ProductWitness, layout: &ExtensionLayout) -> Result<DVector<f64>> {
    if w.dims() != layout.base_dims() {
        return Err(Error::DimensionMismatch(format!(
            "witness dims {:?} vs extension base {:?}",
            w.dims(),
            layout.base_dims()
        )));
    }
    let mut factors = Vec::new();
    for (f, &r) in w.factors().iter().zip(&layout.copies) {
        factors.extend(std::iter::repeat_n(f.clone(), r));
    }
    factors.push(w.factors().last().expect("nonempty").clone());
    Ok(tensor_vectors(&factors))
}

/// Lifted witness in occupation-number coordinates:
/// `⟨n|x^{⊗R}⟩ = √(R!/∏n_j!) ∏ x_j^{n_j}`.
pub fn lift_product_witness_compressed(w: &ProductWitness, copies: usize) -> Result<DVector<f64>> {
    let layout = ExtensionLayout::uniform(&w.dims(), copies)?;
    let mut factors = Vec::new();
    for (f, &r) in w.factors().iter().zip(&layout.copies) {
        let basis = SymmetricBasis::new(f.len(), r)?;
        factors.push(DVector::from_fn(basis.dim(), |k, _| {
            let n = &basis.occupations()[k];
            basis.class_size(k).sqrt() * n.iter().zip(f.iter()).map(|(&nj, &x)| x.powi(nj as i32)).product::<f64>()
        }));
    }
    factors.push(w.factors().last().expect("nonempty").clone());
    Ok(tensor_vectors(&factors))
}

/// Reorders the tensor factors of `M`: register `order[k]` becomes register `k`.
pub fn reorder_registers(m_op: &RealOperator, order: &[usize]) -> Result<RealOperator> {
    let layout = m_op.layout();
    let perm = Permutation::new(order.to_vec())?.inverse();
    if perm.len() != layout.num_registers() {
        return Err(Error::DimensionMismatch(format!(
            "order of length {} for {} registers",
            order.len(),
            layout.num_registers()
        )));
    }
    let new_layout = RegisterLayout::new(order.iter().map(|&i| layout.dims()[i]).collect())?;
    let n = layout.total_dim();
    // digit j of the old index moves to position perm(j)
    let images: Vec<usize> = (0..n)
        .map(|x| {
            let digits = layout.digits_of(x);
            let mut out = vec![0; digits.len()];
            for (j, &a) in digits.iter().enumerate() {
                out[perm.apply(j)] = a;
            }
            new_layout.index_of(&out)
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            m[(images[x], images[y])] = m_op.get(x, y);
        }
    }
    RealOperator::new(new_layout, m)
}

/// Moves register `last` to the unextended final slot.
pub fn with_unextended(m_op: &RealOperator, last: usize) -> Result<RealOperator> {
    let m = m_op.layout().num_registers();
    let mut order: Vec<usize> = (0..m).filter(|&i| i != last).collect();
    order.push(last);
    reorder_registers(m_op, &order)
}

#[derive(Debug, Clone, Copy)]
pub struct SandwichConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Grid points per angle for the grid oracle, when in its regime.
    pub grid_points: Option<usize>,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        Self { restarts: 50, seed: 0, grid_points: Some(60) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub copies: usize,
    /// Best certified lower bound on `ω₊` (feasible witness value).
    pub omega_lower: f64,
    pub lambda_r: f64,
    pub lambda_prev: Option<f64>,
    pub lift_holds: bool,
    pub monotone_holds: bool,
    /// `Λ_R − ω₊_lower`, the accuracy the extension demonstrably reaches.
    pub implied_epsilon: f64,
    /// Copies the convergence bound asks for at `implied_epsilon`.
    pub copies_for_implied: f64,
}

/// Lower sandwich bound `ω₊ ≤ Λ_R` and monotonicity `Λ_R ≤ Λ_{R−1}`.
pub fn check_sandwich(m_op: &RealOperator, copies: usize) -> Result<SandwichReport> {
    check_sandwich_with(m_op, copies, &SandwichConfig::default())
}

pub fn check_sandwich_with(m_op: &RealOperator, copies: usize, config: &SandwichConfig) -> Result<SandwichReport> {
    let dims = m_op.layout().dims();
    let mut omega_lower = omega_plus_alternating(m_op, config.restarts, config.seed)?.value;
    if let Some(g) = config.grid_points {
        if dims.len() <= 3 && dims.iter().all(|&d| d <= 3) {
            omega_lower = omega_lower.max(omega_plus_grid(m_op, g)?);
        }
    }
    let lambda = lambda_r(m_op, copies)?;
    let lambda_prev = if copies >= 2 { Some(lambda_r(m_op, copies - 1)?) } else { None };
    let m = dims.len() as f64;
    let entropy_budget = dims.iter().map(|&d| (d as f64).ln()).sum::<f64>().max(1.0);
    let implied = (lambda - omega_lower).max(0.0);
    let copies_needed = if implied > 0.0 {
        1.0 + (128.0 * entropy_budget * (m - 1.0).powi(2) / implied.min(1.0).powi(3)).ceil()
    } else {
        f64::INFINITY
    };
    Ok(SandwichReport {
        copies,
        omega_lower,
        lambda_r: lambda,
        lambda_prev,
        lift_holds: omega_lower <= lambda + 1e-9,
        monotone_holds: lambda_prev.is_none_or(|p| lambda <= p + 1e-9),
        implied_epsilon: implied,
        copies_for_implied: copies_needed,
    })
}

/// Permutation of the full extended register applying `tau` to block `block`.
pub fn block_permutation_index(layout: &ExtensionLayout, block: usize, tau: &Permutation, index: usize) -> usize {
    let full = layout.full_layout();
    let offset: usize = layout.copies[..block].iter().sum();
    let r = layout.copies[block];
    let digits = full.digits_of(index);
    let block_layout = RegisterLayout::uniform(layout.base_dims[block], r).expect("valid");
    let local = block_layout.index_of(&digits[offset..offset + r]);
    let moved = block_layout.digits_of(permute_factors(tau, &block_layout, local));
    let mut out = digits;
    out[offset..offset + r].copy_from_slice(&moved);
    full.index_of(&out)
}
