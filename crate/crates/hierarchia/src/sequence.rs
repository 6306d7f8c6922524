//! Finitely supported sequences of labeled operators indexed by particle count.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::algebra::{LabeledOperator, Label};
use crate::error::{domain, Result};

/// A sequence `(a_0, a_1(1), a_2(1,2), …)` with finitely many nonzero entries.
///
/// The component at particle count `n ≥ 1` lives on labels `(1..=n)`; the
/// scalar component at `n = 0` is stored separately. Missing entries below
/// the support maximum are treated as zero operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSequence {
    dim: usize,
    scalar_0: C64,
    entries: BTreeMap<usize, LabeledOperator>,
}

impl OperatorSequence {
    pub fn new(dim: usize, scalar_0: C64) -> Self {
        Self { dim, scalar_0, entries: BTreeMap::new() }
    }

    /// Conventional state sequence head: scalar component 1.
    pub fn state(dim: usize) -> Self {
        Self::new(dim, C64::new(1.0, 0.0))
    }

    /// Sequence with zero scalar component (chaos-style correlation data,
    /// observables with no vacuum part).
    pub fn zero_scalar(dim: usize) -> Self {
        Self::new(dim, C64::new(0.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scalar_0(&self) -> C64 {
        self.scalar_0
    }

    pub fn set_scalar_0(&mut self, v: C64) {
        self.scalar_0 = v;
    }

    /// Insert the `n`-particle component; it must live on labels `(1..=n)`.
    pub fn insert(&mut self, n: usize, op: LabeledOperator) -> Result<()> {
        if n == 0 {
            return Err(domain("the n = 0 component is the scalar; use set_scalar_0"));
        }
        let expected: Vec<Label> = (1..=n as Label).collect();
        if op.labels() != expected.as_slice() {
            return Err(domain(format!(
                "component {n} must act on labels {expected:?}, got {:?}",
                op.labels()
            )));
        }
        if op.dim() != self.dim {
            return Err(domain(format!(
                "component dimension {} does not match sequence dimension {}",
                op.dim(),
                self.dim
            )));
        }
        self.entries.insert(n, op);
        Ok(())
    }

    /// Largest `n` with a stored entry (0 when only the scalar is present).
    pub fn support_max(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn stored(&self, n: usize) -> Option<&LabeledOperator> {
        self.entries.get(&n)
    }

    /// The `n`-particle component, materializing zeros for gaps.
    pub fn get(&self, n: usize) -> LabeledOperator {
        match self.entries.get(&n) {
            Some(op) => op.clone(),
            None => {
                let labels: Vec<Label> = (1..=n as Label).collect();
                LabeledOperator::zeros(labels, self.dim).expect("component within envelope")
            }
        }
    }

    /// The component relabeled onto an arbitrary sorted label set of size `n`.
    pub fn get_on(&self, labels: &[Label]) -> Result<LabeledOperator> {
        let n = labels.len();
        if n == 0 {
            return Err(domain("cannot materialize a sequence component on zero labels"));
        }
        self.get(n).relabeled(labels)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &LabeledOperator)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn map<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &LabeledOperator) -> Result<LabeledOperator>,
    {
        let mut out = Self::new(self.dim, self.scalar_0);
        for (n, op) in self.iter() {
            out.insert(n, f(n, op)?)?;
        }
        Ok(out)
    }

    /// max over components of the entrywise difference; supports must match in dim.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let top = self.support_max().max(other.support_max());
        let mut worst = (self.scalar_0 - other.scalar_0).norm();
        for n in 1..=top {
            worst = worst.max(self.get(n).max_abs_diff(&other.get(n)));
        }
        worst
    }
}
