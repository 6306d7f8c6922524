//! Seeded random instances for verification suites and tests.
//!
//! Hermitian draws symmetrize standard-normal real/imaginary parts; densities
//! come from `G·G†` normalized to unit trace. Sequence components are averaged
//! over particle permutations so the identical-particle hierarchies apply.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{symmetrize, LabeledOperator, Label};
use crate::error::Result;
use crate::sequence::OperatorSequence;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box–Muller.
fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn gaussian_matrix(side: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    DMatrix::from_fn(side, side, |_, _| C64::new(normal(rng), normal(rng)))
}

pub fn random_hermitian(side: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let g = gaussian_matrix(side, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Positive unit-trace matrix `G·G† / Tr`.
pub fn random_density(side: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let g = gaussian_matrix(side, rng);
    let p = &g * g.adjoint();
    let tr: C64 = p.diagonal().iter().sum();
    p / tr
}

pub fn random_hermitian_op(labels: &[Label], d: usize, rng: &mut impl Rng) -> LabeledOperator {
    let side = d.pow(labels.len() as u32);
    LabeledOperator::new(labels.to_vec(), d, random_hermitian(side, rng))
        .expect("well-formed random operator")
}

pub fn random_density_op(labels: &[Label], d: usize, rng: &mut impl Rng) -> LabeledOperator {
    let side = d.pow(labels.len() as u32);
    LabeledOperator::new(labels.to_vec(), d, random_density(side, rng))
        .expect("well-formed random operator")
}

/// Random state sequence `(1, D_1, …, D_support)` of unit-trace positive
/// components, exchange-symmetrized when `symmetric` is set.
pub fn random_state_sequence(
    d: usize,
    support: usize,
    rng: &mut impl Rng,
    symmetric: bool,
) -> OperatorSequence {
    let mut seq = OperatorSequence::state(d);
    for n in 1..=support {
        let labels: Vec<Label> = (1..=n as Label).collect();
        let mut op = random_density_op(&labels, d, rng);
        if symmetric {
            op = symmetrize(&op).expect("symmetrization");
        }
        seq.insert(n, op).expect("canonical labels");
    }
    seq
}

/// Random Hermitian observable sequence with zero scalar component.
pub fn random_observable_sequence(
    d: usize,
    support: usize,
    rng: &mut impl Rng,
    symmetric: bool,
) -> OperatorSequence {
    let mut seq = OperatorSequence::zero_scalar(d);
    for n in 1..=support {
        let labels: Vec<Label> = (1..=n as Label).collect();
        let mut op = random_hermitian_op(&labels, d, rng);
        if symmetric {
            op = symmetrize(&op).expect("symmetrization");
        }
        seq.insert(n, op).expect("canonical labels");
    }
    seq
}

/// Random correlation-style sequence: Hermitian symmetrized components,
/// scaled down with particle count so composed states stay well-conditioned.
pub fn random_correlation_sequence(
    d: usize,
    support: usize,
    rng: &mut impl Rng,
) -> OperatorSequence {
    let mut seq = OperatorSequence::state(d);
    for n in 1..=support {
        let labels: Vec<Label> = (1..=n as Label).collect();
        let op = symmetrize(&random_hermitian_op(&labels, d, rng))
            .expect("symmetrization")
            .scale_re(1.0 / (n as f64 * n as f64));
        seq.insert(n, op).expect("canonical labels");
    }
    seq
}

/// The additive observable built from a one-particle operator:
/// components `Σ_i a(i)` up to `support`.
pub fn additive_observable(a1: &LabeledOperator, support: usize) -> Result<OperatorSequence> {
    let d = a1.dim();
    let mut seq = OperatorSequence::zero_scalar(d);
    for s in 1..=support {
        let labels: Vec<Label> = (1..=s as Label).collect();
        let mut acc = LabeledOperator::zeros(labels.clone(), d)?;
        for &j in &labels {
            acc = acc.add(&a1.relabeled(&[j])?.embed(&labels)?)?;
        }
        seq.insert(s, acc)?;
    }
    Ok(seq)
}
