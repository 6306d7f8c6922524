//! Finite-dimensional many-body state hierarchies, verification-grade.
//!
//! Everything acts on tensor products of d-level systems with a bounded
//! particle number: density sequences and their correlation cumulants, the
//! nonlinear correlation dynamics, reduced (traced) state descriptions with
//! their series solutions and hierarchies, kinetic functionals for the
//! one-particle correlation operator, and the mean-field limit. Each
//! construction ships with an independent route used by the verification
//! suites in [`experiment`].

pub mod algebra;
pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod kinetic;
pub mod model;
pub mod partitions;
pub mod quad;
pub mod random;
pub mod reduced;
pub mod sequence;

pub use algebra::{LabeledOperator, Label, StateViolation};
pub use dynamics::{Direction, Dynamics, GeneratorPart};
pub use error::{Error, Result};
pub use model::ModelSpec;
pub use sequence::OperatorSequence;

#[cfg(test)]
pub(crate) mod test_fixtures {
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C64;

    use crate::model::ModelSpec;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// A d = 2 model with a generic exchange-symmetric interaction that
    /// commutes with neither the one-body term nor itself across particles.
    pub fn sample_model(epsilon: f64, n_max: usize) -> ModelSpec {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]);
        let sx = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let sy = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        );
        let sz = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let phi = sx.kronecker(&sx)
            + sz.kronecker(&sz) * c(0.6)
            + sy.kronecker(&sy) * c(0.2)
            + (sx.kronecker(&sz) + sz.kronecker(&sx)) * c(0.3);
        ModelSpec::new(2, h, phi, epsilon, n_max).expect("fixture model is valid")
    }
}
