//! Propagation groups, their generators, and the observable/state duality
//! functionals.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::{LabeledOperator, Label};
use crate::error::{capacity, domain, Error, Result};
use crate::model::ModelSpec;
use crate::sequence::OperatorSequence;

/// Forward (`e^{−itH} · e^{itH}`) or inverse conjugation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Which part of the evolution generator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorPart {
    /// −i[H_n, ·] with the model's interaction scale inside H_n.
    Full,
    /// −i[Σ_j h(j), ·].
    Free,
    /// −i[Φ(j₁,j₂), ·] with the bare pair potential (no coupling factor);
    /// hierarchy right-hand sides multiply by the model coupling themselves.
    Interaction(Label, Label),
}

struct HamEig {
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

/// Owns a model plus per-particle-count Hermitian eigendecompositions of the
/// n-particle energies; applies the conjugation groups and generators.
///
/// All methods take `&self`; the eigendecomposition caches fill lazily behind
/// `OnceLock`, so a `Dynamics` can be shared freely across threads.
pub struct Dynamics {
    model: ModelSpec,
    eigs: Vec<OnceLock<HamEig>>,
}

impl Dynamics {
    pub fn new(model: ModelSpec) -> Self {
        let mut eigs = Vec::with_capacity(model.n_max());
        eigs.resize_with(model.n_max(), OnceLock::new);
        Self { model, eigs }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    fn eig(&self, n: usize) -> Result<&HamEig> {
        if n == 0 || n > self.model.n_max() {
            return Err(capacity(format!(
                "{n} particles outside the supported range 1..={}",
                self.model.n_max()
            )));
        }
        if self.eigs[n - 1].get().is_none() {
            let ham = self.model.hamiltonian(n)?;
            let se = ham.into_matrix().symmetric_eigen();
            let _ =
                self.eigs[n - 1].set(HamEig { values: se.eigenvalues, vectors: se.eigenvectors });
        }
        Ok(self.eigs[n - 1].get().expect("just initialized"))
    }

    /// The unitary `e^{−itH_n}` for `n` identical particles.
    pub fn unitary(&self, n: usize, t: f64) -> Result<DMatrix<C64>> {
        let eig = self.eig(n)?;
        let mut scaled = eig.vectors.clone();
        for j in 0..scaled.ncols() {
            let phase = C64::from_polar(1.0, -t * eig.values[j]);
            scaled.column_mut(j).iter_mut().for_each(|v| *v *= phase);
        }
        Ok(&scaled * eig.vectors.adjoint())
    }

    /// Conjugate `op` by the full evolution on its own label set:
    /// `e^{−itH} op e^{itH}` (inverse direction flips the sign of `t`).
    pub fn propagate(
        &self,
        op: &LabeledOperator,
        t: f64,
        dir: Direction,
    ) -> Result<LabeledOperator> {
        let t = match dir {
            Direction::Forward => t,
            Direction::Inverse => -t,
        };
        let n = op.particles();
        if n == 0 {
            return Ok(op.clone());
        }
        let u = self.unitary(n, t)?;
        let m = &u * op.matrix() * u.adjoint();
        Ok(LabeledOperator::from_parts_unchecked(op.labels().to_vec(), op.dim(), m))
    }

    /// Conjugate by a product of group factors, one per disjoint label block,
    /// each factor acting only within its block (identical-particle dynamics
    /// at the block's size).
    pub fn propagate_blocks(
        &self,
        op: &LabeledOperator,
        blocks: &[Vec<Label>],
        t: f64,
    ) -> Result<LabeledOperator> {
        let u = self.block_unitary(op.labels(), blocks, t)?;
        let m = &u * op.matrix() * u.adjoint();
        Ok(LabeledOperator::from_parts_unchecked(op.labels().to_vec(), op.dim(), m))
    }

    /// Π over blocks of `e^{−itH_{|block|}}` embedded into `ambient`.
    pub fn block_unitary(
        &self,
        ambient: &[Label],
        blocks: &[Vec<Label>],
        t: f64,
    ) -> Result<DMatrix<C64>> {
        let side = self.model.d().pow(ambient.len() as u32);
        let mut acc = DMatrix::<C64>::identity(side, side);
        for b in blocks {
            if b.is_empty() {
                continue;
            }
            for l in b {
                if !ambient.contains(l) {
                    return Err(domain(format!("block label {l} outside ambient {ambient:?}")));
                }
            }
            let u = self.unitary(b.len(), t)?;
            let u_op = LabeledOperator::new(b.clone(), self.model.d(), u)?.embed(ambient)?;
            acc = u_op.into_matrix() * acc;
        }
        Ok(acc)
    }

    /// Apply a generator part to `op` (labels may be any sorted set).
    pub fn apply_generator(
        &self,
        op: &LabeledOperator,
        part: GeneratorPart,
    ) -> Result<LabeledOperator> {
        let labels = op.labels().to_vec();
        let ham = match part {
            GeneratorPart::Full => self.model.hamiltonian_on(&labels)?,
            GeneratorPart::Free => {
                let mut acc = LabeledOperator::zeros(labels.clone(), self.model.d())?;
                for &j in &labels {
                    acc = acc.add(&self.model.h_on(j).embed(&labels)?)?;
                }
                acc
            }
            GeneratorPart::Interaction(j1, j2) => {
                if !labels.contains(&j1) || !labels.contains(&j2) {
                    return Err(domain(format!(
                        "interaction labels ({j1}, {j2}) not contained in {labels:?}"
                    )));
                }
                self.model.phi_on(j1, j2)?.embed(&labels)?
            }
        };
        let m = (ham.matrix() * op.matrix() - op.matrix() * ham.matrix()) * C64::new(0.0, -1.0);
        Ok(LabeledOperator::from_parts_unchecked(labels, op.dim(), m))
    }

    /// The interaction generator with the model coupling folded in:
    /// `ε · (−i[Φ(j₁,j₂), ·])` — the piece entering every hierarchy
    /// right-hand side for this model's evolution.
    pub fn interaction_scaled(
        &self,
        op: &LabeledOperator,
        j1: Label,
        j2: Label,
    ) -> Result<LabeledOperator> {
        Ok(self
            .apply_generator(op, GeneratorPart::Interaction(j1, j2))?
            .scale_re(self.model.epsilon()))
    }
}

/// The normalization factor `Σ_n (1/n!) Tr D_n` (the n = 0 term is the scalar).
pub fn normalization(d: &OperatorSequence) -> C64 {
    let mut acc = d.scalar_0();
    for (n, op) in d.iter() {
        let fact = (1..=n).fold(1.0f64, |a, k| a * k as f64);
        acc += op.trace() / fact;
    }
    acc
}

/// Normalized mean value `(I,D)^{−1} Σ_n (1/n!) Tr A_n D_n`.
///
/// Real for self-adjoint observables on valid states; the imaginary residual
/// is returned alongside as a diagnostic.
pub fn mean_value(a: &OperatorSequence, d: &OperatorSequence) -> Result<(f64, f64)> {
    let norm = normalization(d);
    if norm.norm() < 1e-14 {
        return Err(Error::DegenerateState(format!(
            "normalization factor is {norm} — cannot form mean values"
        )));
    }
    let mut acc = a.scalar_0() * d.scalar_0();
    let top = a.support_max().min(d.support_max());
    let mut fact = 1.0f64;
    for n in 1..=top {
        fact *= n as f64;
        acc += a.get(n).matmul(&d.get(n))?.trace() / fact;
    }
    let v = acc / norm;
    Ok((v.re, v.im))
}

/// Unnormalized reduced pairing `Σ_s (1/s!) Tr B_s F_s`.
pub fn mean_value_reduced(b: &OperatorSequence, f: &OperatorSequence) -> Result<(f64, f64)> {
    let mut acc = b.scalar_0() * f.scalar_0();
    let top = b.support_max().min(f.support_max());
    let mut fact = 1.0f64;
    for s in 1..=top {
        fact *= s as f64;
        acc += b.get(s).matmul(&f.get(s))?.trace() / fact;
    }
    Ok((acc.re, acc.im))
}

/// Reduced observables: `B_s = Σ_{n≤s} (−1)^n Σ_{|J|=n} A_{s−n}((1..s)∖J)`,
/// each term embedded back onto `(1..s)`; `B_0 = A_0`.
///
/// `B_s` does not vanish above the support of `A`, so the caller picks the
/// cutoff `s_max` (usually the support of the state it will be paired with).
pub fn reduce_observable(a: &OperatorSequence, s_max: usize) -> Result<OperatorSequence> {
    let d = a.dim();
    let mut out = OperatorSequence::new(d, a.scalar_0());
    for s in 1..=s_max {
        let labels: Vec<Label> = (1..=s as Label).collect();
        let mut acc = LabeledOperator::zeros(labels.clone(), d)?;
        for n in 0..=s {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            if n == s {
                // every particle removed: the scalar component enters
                let shift = LabeledOperator::identity(labels.clone(), d)?
                    .scale(a.scalar_0() * C64::new(sign, 0.0));
                acc = acc.add(&shift)?;
                continue;
            }
            for kept in subsets_of_size(&labels, s - n) {
                let placed = a.get_on(&kept)?.embed(&labels)?;
                acc = acc.add(&placed.scale_re(sign))?;
            }
        }
        out.insert(s, acc)?;
    }
    Ok(out)
}

/// All size-`k` subsets of `items`, in lexicographic order.
pub(crate) fn subsets_of_size(items: &[Label], k: usize) -> Vec<Vec<Label>> {
    let n = items.len();
    if k > n {
        return vec![];
    }
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
