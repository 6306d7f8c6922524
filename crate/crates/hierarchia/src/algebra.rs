//! Labeled operators on finite tensor products of d-level systems.
//!
//! A [`LabeledOperator`] is a dense complex matrix acting on an ordered set of
//! named particles. Labels are kept sorted ascending; label order maps to
//! tensor-factor order left-to-right with row-major mixed-radix indexing, so
//! every operator has exactly one canonical matrix representation.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{capacity, domain, Result};

/// Particle identifier. Positive integers throughout.
pub type Label = u32;

/// Largest matrix side supported (d^n ≤ 4096, e.g. d = 4, n = 6).
pub const MAX_SIDE: usize = 4096;

/// Dense complex operator on the tensor product indexed by a sorted label set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    labels: Vec<Label>,
    dim: usize,
    matrix: DMatrix<C64>,
}

fn check_side(dim: usize, n: usize) -> Result<usize> {
    if dim < 2 {
        return Err(domain(format!("single-particle dimension must be ≥ 2, got {dim}")));
    }
    let mut side = 1usize;
    for _ in 0..n {
        side = side
            .checked_mul(dim)
            .filter(|&s| s <= MAX_SIDE)
            .ok_or_else(|| capacity(format!("matrix side d^{n} exceeds {MAX_SIDE} for d = {dim}")))?;
    }
    Ok(side)
}

/// Decompose a flat index into `n` base-`dim` digits, most significant first.
fn digits(mut idx: usize, dim: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0usize; n];
    for k in (0..n).rev() {
        out[k] = idx % dim;
        idx /= dim;
    }
    out
}

fn flat(digits: &[usize], dim: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * dim + d)
}

impl LabeledOperator {
    /// Build an operator, canonicalizing the label order.
    ///
    /// `labels` may come in any order; the matrix is given in that factor
    /// order and is permuted into ascending-label order.
    pub fn new(labels: Vec<Label>, dim: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let n = labels.len();
        let side = check_side(dim, n)?;
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(domain(format!(
                "matrix is {}x{}, expected {side}x{side} for {n} particles at d = {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut sorted: Vec<Label> = labels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(domain(format!("labels must be distinct, got {labels:?}")));
        }
        if sorted == labels {
            return Ok(Self { labels, dim, matrix });
        }
        // position in `labels` of the q-th smallest label
        let perm: Vec<usize> = sorted
            .iter()
            .map(|l| labels.iter().position(|x| x == l).unwrap())
            .collect();
        let mut out = DMatrix::<C64>::zeros(side, side);
        let old_index = |new_idx: usize| -> usize {
            let j = digits(new_idx, dim, n);
            let mut i = vec![0usize; n];
            for (q, &p) in perm.iter().enumerate() {
                i[p] = j[q];
            }
            flat(&i, dim)
        };
        let row_map: Vec<usize> = (0..side).map(old_index).collect();
        for r in 0..side {
            for c in 0..side {
                out[(r, c)] = matrix[(row_map[r], row_map[c])];
            }
        }
        Ok(Self { labels: sorted, dim, matrix: out })
    }

    /// Identity on the given labels.
    pub fn identity(labels: Vec<Label>, dim: usize) -> Result<Self> {
        let mut sorted = labels;
        sorted.sort_unstable();
        let side = check_side(dim, sorted.len())?;
        Ok(Self { labels: sorted, dim, matrix: DMatrix::identity(side, side) })
    }

    /// Zero operator on the given labels.
    pub fn zeros(labels: Vec<Label>, dim: usize) -> Result<Self> {
        let mut sorted = labels;
        sorted.sort_unstable();
        let side = check_side(dim, sorted.len())?;
        Ok(Self { labels: sorted, dim, matrix: DMatrix::zeros(side, side) })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn particles(&self) -> usize {
        self.labels.len()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<Label>, dim: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(matrix.nrows(), dim.pow(labels.len() as u32));
        Self { labels, dim, matrix }
    }

    /// Move the operator onto a different label set of the same size,
    /// preserving factor order (k-th factor goes to k-th smallest new label).
    pub fn relabeled(&self, new_labels: &[Label]) -> Result<Self> {
        if new_labels.len() != self.labels.len() {
            return Err(domain(format!(
                "relabel needs {} labels, got {}",
                self.labels.len(),
                new_labels.len()
            )));
        }
        let mut sorted = new_labels.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(domain(format!("labels must be distinct, got {new_labels:?}")));
        }
        Ok(Self { labels: sorted, dim: self.dim, matrix: self.matrix.clone() })
    }

    /// Tensor with identities so the result acts on `target` ⊇ `self.labels`.
    pub fn embed(&self, target: &[Label]) -> Result<Self> {
        let mut tgt = target.to_vec();
        tgt.sort_unstable();
        tgt.dedup();
        if tgt.len() != target.len() {
            return Err(domain(format!("target labels must be distinct, got {target:?}")));
        }
        for l in &self.labels {
            if !tgt.contains(l) {
                return Err(domain(format!("label {l} not contained in target {target:?}")));
            }
        }
        if tgt == self.labels {
            return Ok(self.clone());
        }
        let m = tgt.len();
        let side = check_side(self.dim, m)?;
        let d = self.dim;
        // positions of op labels / complement labels within the target
        let op_pos: Vec<usize> =
            self.labels.iter().map(|l| tgt.iter().position(|x| x == l).unwrap()).collect();
        let id_pos: Vec<usize> = (0..m).filter(|p| !op_pos.contains(p)).collect();
        let n_op = self.labels.len();
        let op_side = self.matrix.nrows();
        let id_count = side / op_side;
        let mut out = DMatrix::<C64>::zeros(side, side);
        for a in 0..op_side {
            let da = digits(a, d, n_op);
            for b in 0..op_side {
                let v = self.matrix[(a, b)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let db = digits(b, d, n_op);
                for e in 0..id_count {
                    let de = digits(e, d, id_pos.len());
                    let mut dr = vec![0usize; m];
                    let mut dc = vec![0usize; m];
                    for (k, &p) in op_pos.iter().enumerate() {
                        dr[p] = da[k];
                        dc[p] = db[k];
                    }
                    for (k, &p) in id_pos.iter().enumerate() {
                        dr[p] = de[k];
                        dc[p] = de[k];
                    }
                    out[(flat(&dr, d), flat(&dc, d))] = v;
                }
            }
        }
        Ok(Self { labels: tgt, dim: d, matrix: out })
    }

    /// Trace out the given labels; the result acts on the remaining ones
    /// (a 1×1 scalar operator when everything is traced).
    pub fn partial_trace(&self, traced: &[Label]) -> Result<Self> {
        for l in traced {
            if !self.labels.contains(l) {
                return Err(domain(format!("cannot trace unknown label {l}")));
            }
        }
        let mut traced_sorted = traced.to_vec();
        traced_sorted.sort_unstable();
        traced_sorted.dedup();
        let kept: Vec<Label> =
            self.labels.iter().copied().filter(|l| !traced_sorted.contains(l)).collect();
        let d = self.dim;
        let n = self.labels.len();
        let kept_pos: Vec<usize> =
            kept.iter().map(|l| self.labels.iter().position(|x| x == l).unwrap()).collect();
        let tr_pos: Vec<usize> = (0..n).filter(|p| !kept_pos.contains(p)).collect();
        let out_side = d.pow(kept.len() as u32);
        let tr_count = d.pow(tr_pos.len() as u32);
        let mut out = DMatrix::<C64>::zeros(out_side, out_side);
        for r in 0..out_side {
            let drr = digits(r, d, kept.len());
            for c in 0..out_side {
                let dcc = digits(c, d, kept.len());
                let mut acc = C64::new(0.0, 0.0);
                for e in 0..tr_count {
                    let de = digits(e, d, tr_pos.len());
                    let mut dr = vec![0usize; n];
                    let mut dc = vec![0usize; n];
                    for (k, &p) in kept_pos.iter().enumerate() {
                        dr[p] = drr[k];
                        dc[p] = dcc[k];
                    }
                    for (k, &p) in tr_pos.iter().enumerate() {
                        dr[p] = de[k];
                        dc[p] = de[k];
                    }
                    acc += self.matrix[(flat(&dr, d), flat(&dc, d))];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(Self { labels: kept, dim: d, matrix: out })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diagonal().iter().sum()
    }

    /// Trace norm (sum of singular values).
    ///
    /// Hermitian inputs use the eigenvalue route directly; otherwise singular
    /// values come from the Hermitian square, which costs half the digits for
    /// tiny singular values — fine at the tolerances used here.
    pub fn trace_norm(&self) -> f64 {
        let herm_err = self.hermiticity_error();
        let scale = self.max_abs().max(1e-300);
        if herm_err <= 1e-13 * scale.max(1.0) {
            let eig = self.matrix.clone().symmetric_eigen();
            eig.eigenvalues.iter().map(|l| l.abs()).sum()
        } else {
            let sq = self.matrix.adjoint() * &self.matrix;
            let eig = sq.symmetric_eigen();
            eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum()
        }
    }

    /// Eigenvalues assuming the operator is Hermitian, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    pub fn adjoint(&self) -> Self {
        Self { labels: self.labels.clone(), dim: self.dim, matrix: self.matrix.adjoint() }
    }

    /// max |A − A†| over entries.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.matrix.adjoint();
        (&self.matrix - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        Self { labels: self.labels.clone(), dim: self.dim, matrix: m }
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |A − B| over entries; labels must match.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.labels, other.labels, "max_abs_diff on mismatched labels");
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { labels: self.labels.clone(), dim: self.dim, matrix: self.matrix.clone() * factor }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.labels != other.labels {
            return Err(domain(format!(
                "cannot add operators on {:?} and {:?}",
                self.labels, other.labels
            )));
        }
        Ok(Self {
            labels: self.labels.clone(),
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_re(-1.0))
    }

    /// Matrix product; both operators must live on the same labels.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.labels != other.labels {
            return Err(domain(format!(
                "cannot multiply operators on {:?} and {:?}",
                self.labels, other.labels
            )));
        }
        Ok(Self {
            labels: self.labels.clone(),
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// Conjugate by a particle relabeling of the label set onto itself:
    /// factor at `labels[k]` moves to `sigma[k]`.
    pub fn permuted(&self, sigma: &[Label]) -> Result<Self> {
        let mut sorted = sigma.to_vec();
        sorted.sort_unstable();
        if sorted != self.labels {
            return Err(domain(format!(
                "permutation {sigma:?} is not a bijection of {:?}",
                self.labels
            )));
        }
        Self::new(sigma.to_vec(), self.dim, self.matrix.clone())
    }

    /// Violations of the state contract (Hermiticity, positivity) at `tol`.
    pub fn validate_state(&self, tol: f64) -> Vec<StateViolation> {
        let mut out = Vec::new();
        let herm = self.hermiticity_error();
        if herm > tol {
            out.push(StateViolation::NotHermitian { error: herm });
        }
        let min_eig = self
            .hermitian_part()
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -tol {
            out.push(StateViolation::NotPositive { min_eigenvalue: min_eig });
        }
        out
    }
}

/// A reported deviation from the density-operator contract.
#[derive(Debug, Clone, PartialEq)]
pub enum StateViolation {
    NotHermitian { error: f64 },
    NotPositive { min_eigenvalue: f64 },
}

impl std::fmt::Display for StateViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotHermitian { error } => write!(f, "not Hermitian (max |A - A†| = {error:.3e})"),
            Self::NotPositive { min_eigenvalue } => {
                write!(f, "not positive (min eigenvalue = {min_eigenvalue:.3e})")
            }
        }
    }
}

/// Embed every factor into the union of all label sets and multiply.
///
/// Factors on disjoint label sets commute, so for those the order is
/// irrelevant; overlapping factors multiply left to right.
pub fn product_on_union(factors: &[LabeledOperator]) -> Result<LabeledOperator> {
    let first = factors.first().ok_or_else(|| domain("product of zero factors"))?;
    let dim = first.dim();
    let mut union: Vec<Label> = Vec::new();
    for f in factors {
        union.extend_from_slice(f.labels());
    }
    union.sort_unstable();
    union.dedup();
    let mut acc = factors[0].embed(&union)?;
    for f in &factors[1..] {
        if f.dim() != dim {
            return Err(domain("product factors have mismatched single-particle dimensions"));
        }
        acc = acc.matmul(&f.embed(&union)?)?;
    }
    Ok(acc)
}

/// Average an operator over all permutations of its label set.
///
/// Keeps Hermiticity and positivity; the output commutes with every particle
/// exchange, which is what the identical-particle hierarchies assume.
pub fn symmetrize(op: &LabeledOperator) -> Result<LabeledOperator> {
    let labels = op.labels().to_vec();
    let n = labels.len();
    if n <= 1 {
        return Ok(op.clone());
    }
    let mut perm = labels.clone();
    let mut acc = LabeledOperator::zeros(labels.clone(), op.dim())?;
    let mut count = 0usize;
    // Heap's algorithm over label positions
    let mut c = vec![0usize; n];
    acc = acc.add(&op.permuted(&perm)?)?;
    count += 1;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            acc = acc.add(&op.permuted(&perm)?)?;
            count += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(acc.scale_re(1.0 / count as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    fn pauli_z() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    #[test]
    fn embed_identity_is_identity() {
        let id = LabeledOperator::identity(vec![1], 2).unwrap();
        let emb = id.embed(&[1, 2]).unwrap();
        assert_eq!(emb.matrix(), &DMatrix::<C64>::identity(4, 4));
    }

    #[test]
    fn embed_x_on_second_factor_matches_kronecker() {
        // I ⊗ X by hand
        let x = LabeledOperator::new(vec![2], 2, pauli_x()).unwrap();
        let emb = x.embed(&[1, 2]).unwrap();
        let expected = DMatrix::<C64>::identity(2, 2).kronecker(&pauli_x());
        assert_eq!(emb.matrix(), &expected);
    }

    #[test]
    fn embed_scales_trace() {
        let a = LabeledOperator::new(
            vec![1],
            2,
            DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 1.), c(0., -1.), c(3., 0.)]),
        )
        .unwrap();
        let emb = a.embed(&[1, 2, 3]).unwrap();
        let expect = a.trace() * c(4.0, 0.0);
        assert!((emb.trace() - expect).norm() < 1e-13);
    }

    #[test]
    fn embed_rejects_missing_label() {
        let a = LabeledOperator::identity(vec![3], 2).unwrap();
        assert!(a.embed(&[1, 2]).is_err());
    }

    #[test]
    fn canonicalization_is_order_independent() {
        // swapping factors twice recovers the original matrix
        let m = DMatrix::<C64>::from_fn(4, 4, |r, no| c((r * 4 + no) as f64, (r + no) as f64));
        let a = LabeledOperator::new(vec![2, 1], 2, m.clone()).unwrap();
        let back = LabeledOperator::new(vec![2, 1], 2, a.matrix().clone()).unwrap();
        assert_eq!(back.matrix(), &m);

        // a 3-cycle of factors against the hand Kronecker product: the matrix
        // given in listed order (2, 3, 1) as A⊗B⊗C must canonicalize to
        // C⊗A⊗B on sorted labels (1, 2, 3)
        let am = pauli_x();
        let bm = pauli_z();
        let cm = DMatrix::from_row_slice(2, 2, &[c(0.3, 0.), c(0., 1.), c(0., -1.), c(0.8, 0.)]);
        let listed = am.kronecker(&bm).kronecker(&cm);
        let op = LabeledOperator::new(vec![2, 3, 1], 2, listed).unwrap();
        let expected = cm.kronecker(&am).kronecker(&bm);
        assert_eq!(op.labels(), &[1, 2, 3]);
        assert!(op.max_abs_diff(&LabeledOperator::new(vec![1, 2, 3], 2, expected).unwrap()) < 1e-14);

        // product of single-factor operators reorders the same way
        let x2 = LabeledOperator::new(vec![2], 2, pauli_x()).unwrap();
        let z1 = LabeledOperator::new(vec![1], 2, pauli_z()).unwrap();
        let prod = product_on_union(&[x2, z1]).unwrap();
        let expected = pauli_z().kronecker(&pauli_x());
        assert!(
            prod.max_abs_diff(&LabeledOperator::new(vec![1, 2], 2, expected).unwrap()) < 1e-14
        );
    }

    #[test]
    fn partial_trace_of_product_state_factorizes() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.7, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.)]);
        let b = DMatrix::from_row_slice(2, 2, &[c(0.4, 0.), c(0., 0.1), c(0., -0.1), c(0.6, 0.)]);
        let ab = LabeledOperator::new(vec![1, 2], 2, a.kronecker(&b)).unwrap();
        let reduced = ab.partial_trace(&[2]).unwrap();
        let tr_b: C64 = b.diagonal().iter().sum();
        let expected = LabeledOperator::new(vec![1], 2, a * tr_b).unwrap();
        assert!(reduced.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn partial_trace_all_labels_is_full_trace() {
        let m = DMatrix::<C64>::from_fn(4, 4, |r, no| c((r + 1) as f64, no as f64));
        let a = LabeledOperator::new(vec![1, 2], 2, m).unwrap();
        let s = a.partial_trace(&[1, 2]).unwrap();
        assert_eq!(s.particles(), 0);
        assert!((s.matrix()[(0, 0)] - a.trace()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_matches_index_contraction_oracle() {
        // independent einsum-style contraction over block structure
        let mut rng = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng as f64 / u64::MAX as f64) - 0.5
        };
        let m = DMatrix::<C64>::from_fn(4, 4, |_, _| c(next(), next()));
        let m = (&m + m.adjoint()).scale(0.5);
        let a = LabeledOperator::new(vec![1, 2], 2, m.clone()).unwrap();
        // trace second factor: out[i][j] = Σ_k M[(i,k),(j,k)]
        let mut oracle = DMatrix::<C64>::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    oracle[(i, j)] += m[(i * 2 + k, j * 2 + k)];
                }
            }
        }
        let out = a.partial_trace(&[2]).unwrap();
        assert!(out.max_abs_diff(&LabeledOperator::new(vec![1], 2, oracle).unwrap()) < 1e-14);
    }

    #[test]
    fn trace_norm_of_identity_and_diag() {
        let id = LabeledOperator::identity(vec![1], 2).unwrap();
        assert!((id.trace_norm() - 2.0).abs() < 1e-12);
        let z = LabeledOperator::new(vec![1], 2, pauli_z()).unwrap();
        assert!((z.trace_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_matches_eigenvalue_oracle() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(-0.5, 0.0)],
        );
        let a = LabeledOperator::new(vec![1], 2, m).unwrap();
        // eigenvalues of [[1, w],[w*, -0.5]]: λ = (t ± sqrt(t² - 4Δ))/2
        let t = 0.5;
        let det = 1.0 * (-0.5) - (0.3f64.powi(2) + 0.4f64.powi(2));
        let disc = (t * t - 4.0 * det).sqrt();
        let l1: f64 = (t + disc) / 2.0;
        let l2: f64 = (t - disc) / 2.0;
        assert!((a.trace_norm() - (l1.abs() + l2.abs())).abs() < 1e-12);
    }

    #[test]
    fn validate_state_flags_negativity() {
        let bad = LabeledOperator::new(
            vec![1],
            2,
            DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-0.1, 0.)]),
        )
        .unwrap();
        let v = bad.validate_state(1e-10);
        assert!(matches!(v.as_slice(), [StateViolation::NotPositive { .. }]));
        let mixed = LabeledOperator::identity(vec![1], 2).unwrap().scale_re(0.5);
        assert!(mixed.validate_state(1e-10).is_empty());
    }

    #[test]
    fn embed_partial_trace_adjointness() {
        // tr(embed(A, Y)·B) = tr(A · ptr(B, Y∖labels(A)))
        let mut seed = 7u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a_m = DMatrix::<C64>::from_fn(2, 2, |_, _| c(next(), next()));
        let b_m = DMatrix::<C64>::from_fn(8, 8, |_, _| c(next(), next()));
        let a = LabeledOperator::new(vec![2], 2, a_m).unwrap();
        let b = LabeledOperator::new(vec![1, 2, 3], 2, b_m).unwrap();
        let lhs = (a.embed(&[1, 2, 3]).unwrap().matmul(&b).unwrap()).trace();
        let rhs = a.matmul(&b.partial_trace(&[1, 3]).unwrap()).unwrap().trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn trace_then_embed_scales_by_dim_power() {
        let a = LabeledOperator::new(vec![1], 2, pauli_x()).unwrap();
        let emb = a.embed(&[1, 2, 3]).unwrap();
        let back = emb.partial_trace(&[2, 3]).unwrap();
        assert!(back.max_abs_diff(&a.scale_re(4.0)) < 1e-13);
    }

    #[test]
    fn symmetrize_fixes_exchange() {
        let m = DMatrix::<C64>::from_fn(4, 4, |r, no| c((r * 4 + no) as f64, 0.0));
        let a = LabeledOperator::new(vec![1, 2], 2, (&m + m.adjoint()).scale(0.5)).unwrap();
        let s = symmetrize(&a).unwrap();
        let swapped = s.permuted(&[2, 1]).unwrap();
        assert!(s.max_abs_diff(&swapped) < 1e-13);
    }
}
