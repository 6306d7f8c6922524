//! Model data: single-particle energy, pair potential, coupling, capacity.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::algebra::{LabeledOperator, Label, MAX_SIDE};
use crate::error::{capacity, domain, Result};

/// Tolerance for the structural matrix checks at construction time.
pub const SPEC_TOL: f64 = 1e-12;

/// A finite model of identical d-level particles: one-body energy `h`,
/// exchange-symmetric two-body potential `phi`, coupling `epsilon`, and the
/// largest particle number `n_max` the instance supports.
///
/// Dimensionless units with ħ = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    d: usize,
    h: DMatrix<C64>,
    phi: DMatrix<C64>,
    epsilon: f64,
    n_max: usize,
}

fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The operator exchanging the two tensor factors of a d²-dimensional space.
pub fn swap_matrix(d: usize) -> DMatrix<C64> {
    let side = d * d;
    DMatrix::from_fn(side, side, |r, c| {
        let (r1, r2) = (r / d, r % d);
        let (c1, c2) = (c / d, c % d);
        if r1 == c2 && r2 == c1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

impl ModelSpec {
    pub fn new(
        d: usize,
        h: DMatrix<C64>,
        phi: DMatrix<C64>,
        epsilon: f64,
        n_max: usize,
    ) -> Result<Self> {
        if d < 2 {
            return Err(domain(format!("single-particle dimension must be ≥ 2, got {d}")));
        }
        if n_max < 1 {
            return Err(domain("n_max must be ≥ 1"));
        }
        if h.nrows() != d || h.ncols() != d {
            return Err(domain(format!("h must be {d}x{d}, got {}x{}", h.nrows(), h.ncols())));
        }
        let dd = d * d;
        if phi.nrows() != dd || phi.ncols() != dd {
            return Err(domain(format!(
                "phi must be {dd}x{dd}, got {}x{}",
                phi.nrows(),
                phi.ncols()
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(domain(format!("epsilon must be finite and ≥ 0, got {epsilon}")));
        }
        let herm_h = hermiticity_error(&h);
        if herm_h > SPEC_TOL {
            return Err(domain(format!("h is not Hermitian (max |h - h†| = {herm_h:.3e})")));
        }
        let herm_phi = hermiticity_error(&phi);
        if herm_phi > SPEC_TOL {
            return Err(domain(format!("phi is not Hermitian (max |phi - phi†| = {herm_phi:.3e})")));
        }
        let swap = swap_matrix(d);
        let exch = (&swap * &phi * &swap - &phi).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if exch > SPEC_TOL {
            return Err(domain(format!(
                "phi is not exchange-symmetric (max |SWAP·phi·SWAP - phi| = {exch:.3e})"
            )));
        }
        let side = d.checked_pow(n_max as u32).filter(|&s| s <= MAX_SIDE);
        if side.is_none() {
            return Err(capacity(format!("d^n_max = {d}^{n_max} exceeds the {MAX_SIDE} envelope")));
        }
        Ok(Self { d, h, phi, epsilon, n_max })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn h(&self) -> &DMatrix<C64> {
        &self.h
    }

    pub fn phi(&self) -> &DMatrix<C64> {
        &self.phi
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Same model with a different coupling (scaling sweeps).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.d, self.h.clone(), self.phi.clone(), epsilon, self.n_max)
    }

    /// The one-body term as an operator on a single label.
    pub fn h_on(&self, label: Label) -> LabeledOperator {
        LabeledOperator::new(vec![label], self.d, self.h.clone()).expect("validated at construction")
    }

    /// The bare pair potential on two labels (smaller label is the first factor).
    pub fn phi_on(&self, a: Label, b: Label) -> Result<LabeledOperator> {
        if a == b {
            return Err(domain(format!("pair potential needs distinct labels, got ({a}, {b})")));
        }
        LabeledOperator::new(vec![a.min(b), a.max(b)], self.d, self.phi.clone())
    }

    /// The n-particle energy Σ_j h(j) + ε Σ_{j₁<j₂} Φ(j₁,j₂) on labels `1..=n`.
    pub fn hamiltonian(&self, n: usize) -> Result<LabeledOperator> {
        self.hamiltonian_on(&(1..=n as Label).collect::<Vec<_>>())
    }

    /// The energy operator on an arbitrary sorted label set.
    pub fn hamiltonian_on(&self, labels: &[Label]) -> Result<LabeledOperator> {
        let n = labels.len();
        if n == 0 {
            return Err(domain("hamiltonian needs at least one label"));
        }
        if n > self.n_max {
            return Err(capacity(format!("{n} particles exceed n_max = {}", self.n_max)));
        }
        let mut acc = LabeledOperator::zeros(labels.to_vec(), self.d)?;
        for &j in labels {
            acc = acc.add(&self.h_on(j).embed(labels)?)?;
        }
        if self.epsilon != 0.0 {
            for (i, &a) in labels.iter().enumerate() {
                for &b in &labels[i + 1..] {
                    let pair = self.phi_on(a, b)?.embed(labels)?;
                    acc = acc.add(&pair.scale_re(self.epsilon))?;
                }
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_model(epsilon: f64) -> ModelSpec {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0., 0.), c(0., 0.), c(-0.5, 0.)]);
        // exchange-symmetric interaction: ZZ plus symmetric off-diagonal piece
        let phi = DMatrix::from_row_slice(
            4,
            4,
            &[
                c(1.0, 0.),
                c(0., 0.),
                c(0., 0.),
                c(0.2, 0.),
                c(0., 0.),
                c(-1.0, 0.),
                c(0.3, 0.),
                c(0., 0.),
                c(0., 0.),
                c(0.3, 0.),
                c(-1.0, 0.),
                c(0., 0.),
                c(0.2, 0.),
                c(0., 0.),
                c(0., 0.),
                c(1.0, 0.),
            ],
        );
        ModelSpec::new(2, h, phi, epsilon, 4).unwrap()
    }

    #[test]
    fn rejects_non_hermitian_h() {
        let h = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        let phi = DMatrix::identity(4, 4);
        assert!(ModelSpec::new(2, h, phi, 0.1, 2).is_err());
    }

    #[test]
    fn rejects_exchange_asymmetric_phi() {
        let h = DMatrix::identity(2, 2);
        let mut phi = DMatrix::<C64>::zeros(4, 4);
        // |01⟩⟨01| alone is not SWAP-invariant
        phi[(1, 1)] = c(1.0, 0.0);
        assert!(ModelSpec::new(2, h, phi, 0.1, 2).is_err());
    }

    #[test]
    fn hamiltonian_is_hermitian_and_permutation_invariant() {
        let model = sample_model(0.3);
        let h3 = model.hamiltonian(3).unwrap();
        assert!(h3.hermiticity_error() < 1e-12);
        // conjugating with any particle permutation leaves H fixed
        for sigma in [[2u32, 1, 3], [3, 2, 1], [1, 3, 2], [2, 3, 1]] {
            let perm = h3.permuted(&sigma).unwrap();
            assert!(h3.max_abs_diff(&perm) < 1e-12, "permutation {sigma:?}");
        }
    }

    #[test]
    fn hamiltonian_capacity() {
        let model = sample_model(0.1);
        assert!(model.hamiltonian(5).is_err());
    }
}
