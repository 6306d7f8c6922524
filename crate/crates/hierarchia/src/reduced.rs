//! Reduced density operators and reduced correlation operators: definitions by
//! partial trace, cumulant series solutions, cluster expansions between them,
//! hierarchy right-hand sides, and the dispersion functional.
//!
//! Every series over the traced particle number is a finite sum: the model's
//! `n_max` is part of the state universe, so the identities checked here are
//! exact at fixed capacity rather than asymptotic statements.

use num_complex::Complex64 as C64;

use crate::algebra::{product_on_union, LabeledOperator, Label};
use crate::correlations::{
    cluster_compose_on, cluster_compose_sequence, cluster_invert, group_cumulant,
    group_cumulant_split, nonlinear_group_on_elements,
};
use crate::dynamics::{normalization, Dynamics, GeneratorPart};
use crate::error::{domain, Error, Result};
use crate::partitions::{enumerate_partitions, enumerate_two_block, mobius_weight};
use crate::quad::gauss_legendre_unit;
use crate::sequence::OperatorSequence;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

fn canonical_labels(s: usize) -> Vec<Label> {
    (1..=s as Label).collect()
}

fn tail_labels(s: usize, n: usize) -> Vec<Label> {
    ((s + 1) as Label..=(s + n) as Label).collect()
}

/// `F_s = (I,D)^{−1} Σ_n (1/n!) Tr_{s+1..s+n} D_{s+n}`, summed to the support.
pub fn reduce_density(d_seq: &OperatorSequence, s: usize) -> Result<LabeledOperator> {
    let norm = normalization(d_seq);
    if norm.norm() < 1e-14 {
        return Err(Error::DegenerateState("state normalizes to zero".into()));
    }
    let mut acc = LabeledOperator::zeros(canonical_labels(s), d_seq.dim())?;
    let top = d_seq.support_max();
    for total in s..=top.max(s) {
        if total > top {
            break;
        }
        let n = total - s;
        let traced = d_seq.get(total).partial_trace(&tail_labels(s, n))?;
        acc = acc.add(&traced.scale_re(1.0 / factorial(n)))?;
    }
    Ok(acc.scale(C64::new(1.0, 0.0) / norm))
}

/// Reduced components `1..=top` as a sequence (scalar head 1).
pub fn reduce_density_sequence(d_seq: &OperatorSequence, top: usize) -> Result<OperatorSequence> {
    let mut out = OperatorSequence::state(d_seq.dim());
    for s in 1..=top {
        out.insert(s, reduce_density(d_seq, s)?)?;
    }
    Ok(out)
}

/// Series solution for the reduced components:
/// `F_s(t) = Σ_n (1/n!) Tr_{s+1..s+n} 𝔄_{1+n}(t, {1..s}, s+1, …) F⁰_{s+n}`,
/// where the generating operator is the (1+n)-th order cumulant with the
/// retained particles merged into one cluster.
pub fn reduced_series(
    dynamics: &Dynamics,
    f0: &OperatorSequence,
    t: f64,
    s: usize,
) -> Result<LabeledOperator> {
    let cap = f0.support_max().min(dynamics.model().n_max());
    let mut acc = LabeledOperator::zeros(canonical_labels(s), f0.dim())?;
    if s > cap {
        return Ok(acc);
    }
    for n in 0..=(cap - s) {
        let total = s + n;
        let mut clusters: Vec<Vec<Label>> = vec![canonical_labels(s)];
        clusters.extend(tail_labels(s, n).into_iter().map(|l| vec![l]));
        let cum = group_cumulant(dynamics, &clusters, t, &f0.get(total))?;
        let traced = cum.partial_trace(&tail_labels(s, n))?;
        acc = acc.add(&traced.scale_re(1.0 / factorial(n)))?;
    }
    Ok(acc)
}

/// Evolve the reduced sequence componentwise up to `top`.
pub fn reduced_series_sequence(
    dynamics: &Dynamics,
    f0: &OperatorSequence,
    t: f64,
    top: usize,
) -> Result<OperatorSequence> {
    let mut out = OperatorSequence::state(f0.dim());
    out.set_scalar_0(f0.scalar_0());
    for s in 1..=top {
        out.insert(s, reduced_series(dynamics, f0, t, s)?)?;
    }
    Ok(out)
}

/// Hierarchy right-hand side for reduced densities:
/// `𝒩*_s F_s + Σ_{j≤s} Tr_{s+1} ε𝒩_int(j, s+1) F_{s+1}`.
///
/// `F_{s+1}` is zero beyond the support or the capacity, which closes the
/// system at the top component.
pub fn bbgky_rhs(dynamics: &Dynamics, f: &OperatorSequence, s: usize) -> Result<LabeledOperator> {
    let fs = f.get(s);
    let mut acc = dynamics.apply_generator(&fs, GeneratorPart::Full)?;
    if s + 1 <= dynamics.model().n_max() {
        let fs1 = f.get(s + 1);
        if fs1.max_abs() > 0.0 {
            let tail = vec![(s + 1) as Label];
            for j in 1..=s as Label {
                let coll = dynamics.interaction_scaled(&fs1, j, (s + 1) as Label)?;
                acc = acc.add(&coll.partial_trace(&tail)?)?;
            }
        }
    }
    Ok(acc)
}

/// Iterated-collision expansion of the reduced evolution, truncated at
/// `order` insertions; the time simplex is integrated with Gauss–Legendre
/// nodes per axis (32 for order ≤ 2, 12 at order 3).
pub fn perturbation_series(
    dynamics: &Dynamics,
    f0: &OperatorSequence,
    t: f64,
    s: usize,
    order: usize,
) -> Result<LabeledOperator> {
    if order > 3 {
        return Err(Error::Capacity("perturbation chains beyond order 3 are not supported".into()));
    }
    let nodes = if order <= 2 { 32 } else { 12 };
    let rule = gauss_legendre_unit(nodes);
    let cap = f0.support_max().min(dynamics.model().n_max());
    let mut acc = dynamics.propagate(&f0.get(s), t, crate::dynamics::Direction::Forward)?;
    for n in 1..=order {
        if s + n > cap {
            break;
        }
        let mut term = LabeledOperator::zeros(canonical_labels(s), f0.dim())?;
        let mut times = Vec::with_capacity(n);
        nested_chain(dynamics, f0, t, s, n, &rule, &mut times, t, 1.0, &mut term)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Recursive Gauss–Legendre sweep over the ordered simplex
/// `t ≥ t₁ ≥ … ≥ t_n ≥ 0`; at the innermost level evaluates the collision
/// chain and accumulates with the quadrature weight.
fn nested_chain(
    dynamics: &Dynamics,
    f0: &OperatorSequence,
    t: f64,
    s: usize,
    n: usize,
    rule: &[(f64, f64)],
    times: &mut Vec<f64>,
    upper: f64,
    weight: f64,
    acc: &mut LabeledOperator,
) -> Result<()> {
    if times.len() == n {
        let chain = collision_chain(dynamics, f0, t, s, times)?;
        *acc = acc.add(&chain.scale_re(weight))?;
        return Ok(());
    }
    for &(x, w) in rule {
        let tk = upper * x;
        times.push(tk);
        nested_chain(dynamics, f0, t, s, n, rule, times, tk, weight * w * upper, acc)?;
        times.pop();
    }
    Ok(())
}

/// `𝒢_s(t−t₁) Σ_{j₁≤s} ε𝒩(j₁,s+1) 𝒢_{s+1}(t₁−t₂) … 𝒢_{s+n}(t_n) F⁰_{s+n}`,
/// traced over `s+1..s+n`; each collided particle is traced as soon as
/// nothing further acts on it.
fn collision_chain(
    dynamics: &Dynamics,
    f0: &OperatorSequence,
    t: f64,
    s: usize,
    times: &[f64],
) -> Result<LabeledOperator> {
    use crate::dynamics::Direction::Forward;
    let n = times.len();
    let mut op = f0.get(s + n);
    op = dynamics.propagate(&op, times[n - 1], Forward)?;
    for k in (1..=n).rev() {
        let fresh = (s + k) as Label;
        let mut coll = LabeledOperator::zeros(op.labels().to_vec(), op.dim())?;
        for j in 1..=(s + k - 1) as Label {
            coll = coll.add(&dynamics.interaction_scaled(&op, j, fresh)?)?;
        }
        op = coll.partial_trace(&[fresh])?;
        let dt = if k == 1 { t - times[0] } else { times[k - 2] - times[k - 1] };
        op = dynamics.propagate(&op, dt, Forward)?;
    }
    Ok(op)
}

/// A cluster ground: the retained particles as one element plus individual
/// tail particles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterGround {
    head: Vec<Label>,
    tail: Vec<Label>,
}

impl ClusterGround {
    pub fn new(mut head: Vec<Label>, mut tail: Vec<Label>) -> Result<Self> {
        if head.is_empty() {
            return Err(domain("cluster ground needs a nonempty head"));
        }
        head.sort_unstable();
        tail.sort_unstable();
        if tail.iter().any(|l| head.contains(l)) {
            return Err(domain("cluster head and tail must be disjoint"));
        }
        Ok(Self { head, tail })
    }

    pub fn head(&self) -> &[Label] {
        &self.head
    }

    pub fn tail(&self) -> &[Label] {
        &self.tail
    }

    /// The element list: the head as one cluster, tails as singletons.
    pub fn elements(&self) -> Vec<Vec<Label>> {
        let mut e = vec![self.head.clone()];
        e.extend(self.tail.iter().map(|&l| vec![l]));
        e
    }
}

/// Correlation operator of a cluster of particles.
///
/// The element ground treats `head` as a single particle cluster; initial data
/// per element block are the ground's cumulants of the composed initial state
/// and evolve under the element-ground analogue of the correlation group. The
/// resulting operators are exactly the head-merged cumulants of the propagated
/// state, which is what the recomposition identity below checks.
pub fn cluster_correlation(
    dynamics: &Dynamics,
    g0: &OperatorSequence,
    t: f64,
    ground: &ClusterGround,
) -> Result<LabeledOperator> {
    let elements = ground.elements();
    cluster_correlation_on_elements(dynamics, g0, t, &elements)
}

fn cluster_correlation_on_elements(
    dynamics: &Dynamics,
    g0: &OperatorSequence,
    t: f64,
    elements: &[Vec<Label>],
) -> Result<LabeledOperator> {
    let elems = elements.to_vec();
    let g0c = g0.clone();
    nonlinear_group_on_elements(dynamics, elements, t, &mut |block_idx| {
        element_ground_cumulant(&g0c, &elems, block_idx)
    })
}

/// Cumulant of the composed state over an element sub-ground:
/// `Σ_{Q ⊢ block} μ(Q) Π_X D⁰(θ(X))` with `D⁰` composed from `g0`.
fn element_ground_cumulant(
    g0: &OperatorSequence,
    elements: &[Vec<Label>],
    block_idx: &[usize],
) -> Result<LabeledOperator> {
    let mut flat: Vec<Label> = Vec::new();
    for &i in block_idx {
        flat.extend_from_slice(&elements[i]);
    }
    flat.sort_unstable();
    let idx_labels: Vec<Label> = block_idx.iter().map(|&i| i as Label).collect();
    let mut acc = LabeledOperator::zeros(flat.clone(), g0.dim())?;
    for q in enumerate_partitions(&idx_labels)? {
        let mut factors = Vec::with_capacity(q.len());
        for x in q.blocks() {
            let mut theta: Vec<Label> = Vec::new();
            for &i in x {
                theta.extend_from_slice(&elements[i as usize]);
            }
            theta.sort_unstable();
            factors.push(cluster_compose_on(g0, &theta)?);
        }
        let term = product_on_union(&factors)?.embed(&flat)?;
        acc = acc.add(&term.scale_re(mobius_weight(&q) as f64))?;
    }
    Ok(acc)
}

/// Reduced component reconstructed through the cluster-correlation route:
/// recompose the evolved cluster correlations over each ground
/// `({1..s}, s+1, …, s+n)`, trace the tails, normalize.
///
/// Agrees with `reduce_density` of the propagated composed state exactly at
/// fixed capacity; this is the two-route check on the cluster machinery.
pub fn reduced_density_from_clusters(
    dynamics: &Dynamics,
    g0: &OperatorSequence,
    t: f64,
    s: usize,
) -> Result<LabeledOperator> {
    let n_max = dynamics.model().n_max();
    if s > n_max {
        return Err(Error::Capacity(format!("s = {s} exceeds n_max = {n_max}")));
    }
    let d0 = cluster_compose_sequence(g0, n_max)?;
    let norm = normalization(&d0);
    if norm.norm() < 1e-14 {
        return Err(Error::DegenerateState("composed state normalizes to zero".into()));
    }
    let mut acc = LabeledOperator::zeros(canonical_labels(s), g0.dim())?;
    for n in 0..=(n_max - s) {
        let ground = ClusterGround::new(canonical_labels(s), tail_labels(s, n))?;
        let elements = ground.elements();
        let idx_labels: Vec<Label> = (0..elements.len() as Label).collect();
        let universe: Vec<Label> = canonical_labels(s + n);
        // recomposition over the element ground restores the state component
        let mut dt_n = LabeledOperator::zeros(universe.clone(), g0.dim())?;
        for p in enumerate_partitions(&idx_labels)? {
            let mut factors = Vec::with_capacity(p.len());
            for x in p.blocks() {
                let sub: Vec<Vec<Label>> =
                    x.iter().map(|&i| elements[i as usize].clone()).collect();
                factors.push(cluster_correlation_on_elements(dynamics, g0, t, &sub)?);
            }
            dt_n = dt_n.add(&product_on_union(&factors)?.embed(&universe)?)?;
        }
        let traced = dt_n.partial_trace(&tail_labels(s, n))?;
        acc = acc.add(&traced.scale_re(1.0 / factorial(n)))?;
    }
    Ok(acc.scale(C64::new(1.0, 0.0) / norm))
}

/// The bare trace series over evolved cluster correlations,
/// `Σ_n (1/n!) Tr_{s+1..s+n} g_{1+n}(t)`.
///
/// This is the grand-canonical form of the reduced component: it coincides
/// with `reduce_density` only in the untruncated limit, so it is exposed as a
/// diagnostic rather than asserted against the trace route at fixed capacity.
pub fn cluster_trace_series(
    dynamics: &Dynamics,
    g0: &OperatorSequence,
    t: f64,
    s: usize,
) -> Result<LabeledOperator> {
    let n_max = dynamics.model().n_max();
    let mut acc = LabeledOperator::zeros(canonical_labels(s), g0.dim())?;
    for n in 0..=(n_max.saturating_sub(s)) {
        let ground = ClusterGround::new(canonical_labels(s), tail_labels(s, n))?;
        let g1n = cluster_correlation(dynamics, g0, t, &ground)?;
        let traced = g1n.partial_trace(&tail_labels(s, n))?;
        acc = acc.add(&traced.scale_re(1.0 / factorial(n)))?;
    }
    Ok(acc)
}

/// Cluster expansion from reduced densities to reduced correlations:
/// `G_s = Σ_P (−1)^{|P|−1}(|P|−1)! Π F(X)`; `G₁ = F₁`.
pub fn reduced_corr_from_f(f: &OperatorSequence, s: usize) -> Result<LabeledOperator> {
    cluster_invert(f, s)
}

/// Inverse expansion: `F_s = Σ_P Π G(X)`.
pub fn f_from_reduced_corr(g: &OperatorSequence, s: usize) -> Result<LabeledOperator> {
    cluster_compose_on(g, &canonical_labels(s))
}

/// Evolution of reduced correlation operators, computed through the exact
/// cluster route: compose the initial correlations into reduced densities,
/// evolve those with the cumulant series, and invert the cluster expansion at
/// time `t`. Solves the nonlinear hierarchy below identically at fixed
/// capacity for every component under the top one.
pub fn reduced_correlation_series(
    dynamics: &Dynamics,
    g_big0: &OperatorSequence,
    t: f64,
    s: usize,
) -> Result<LabeledOperator> {
    let top = dynamics.model().n_max();
    let f0 = cluster_compose_sequence(g_big0, top)?;
    let f_t = reduced_series_sequence(dynamics, &f0, t, s)?;
    cluster_invert(&f_t, s)
}

/// Whole-sequence variant of [`reduced_correlation_series`].
pub fn reduced_correlation_sequence(
    dynamics: &Dynamics,
    g_big0: &OperatorSequence,
    t: f64,
    top: usize,
) -> Result<OperatorSequence> {
    let cap = dynamics.model().n_max();
    let f0 = cluster_compose_sequence(g_big0, cap)?;
    let f_t = reduced_series_sequence(dynamics, &f0, t, top)?;
    let mut out = OperatorSequence::state(g_big0.dim());
    for s in 1..=top {
        out.insert(s, cluster_invert(&f_t, s)?)?;
    }
    Ok(out)
}

/// The (1+n)-th order cumulant of the composed nonlinear evolutions:
/// `Σ_{P ⊢ ({head}, tails)} μ(P) ·` (the correlation evolution whose dynamics
/// keeps interactions only inside each part θ(X_i)), evaluated on the full
/// label set. The first-order term (one part) is the correlation group itself.
pub fn nonlinear_cumulant(
    dynamics: &Dynamics,
    head: &[Label],
    tails: &[Label],
    g0: &OperatorSequence,
    t: f64,
) -> Result<LabeledOperator> {
    let mut elements: Vec<Vec<Label>> = vec![head.to_vec()];
    elements.extend(tails.iter().map(|&l| vec![l]));
    let idx_labels: Vec<Label> = (0..elements.len() as Label).collect();
    let mut universe: Vec<Label> = elements.iter().flatten().copied().collect();
    universe.sort_unstable();
    let mut acc = LabeledOperator::zeros(universe.clone(), g0.dim())?;
    for p in enumerate_partitions(&idx_labels)? {
        let mut parts: Vec<Vec<Label>> = Vec::with_capacity(p.len());
        for x in p.blocks() {
            let mut theta: Vec<Label> = Vec::new();
            for &i in x {
                theta.extend_from_slice(&elements[i as usize]);
            }
            theta.sort_unstable();
            parts.push(theta);
        }
        let term = split_correlation_group(dynamics, &universe, &parts, g0, t)?;
        acc = acc.add(&term.scale_re(mobius_weight(&p) as f64))?;
    }
    Ok(acc)
}

/// The correlation evolution generated by the dynamics with interactions
/// across the given parts removed:
/// `Σ_{Q ⊢ universe} 𝔄^{split}_{|Q|}(t, blocks of Q) Π G⁰(X)`.
fn split_correlation_group(
    dynamics: &Dynamics,
    universe: &[Label],
    parts: &[Vec<Label>],
    g0: &OperatorSequence,
    t: f64,
) -> Result<LabeledOperator> {
    let mut acc = LabeledOperator::zeros(universe.to_vec(), g0.dim())?;
    for q in enumerate_partitions(universe)? {
        let factors: Vec<LabeledOperator> =
            q.blocks().iter().map(|b| g0.get_on(b)).collect::<Result<_>>()?;
        let operand = product_on_union(&factors)?.embed(universe)?;
        let term =
            group_cumulant_split(dynamics, q.blocks(), Some(parts), t, &operand)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// The series of nonlinear cumulants,
/// `Σ_n (1/n!) Tr_{s+1..s+n} 𝔄_{1+n}(t; {1..s}, s+1, … | G(0))`.
///
/// This is the structural expansion of the reduced correlation evolution. It
/// agrees with [`reduced_correlation_series`] in the untruncated limit and
/// exactly under the anchors (t = 0, no interaction, chaos data at s = 1);
/// at fixed capacity and s ≥ 2 the two allocate their truncation tails
/// differently, so cross-checks use the anchors.
pub fn cumulant_expansion_series(
    dynamics: &Dynamics,
    g_big0: &OperatorSequence,
    t: f64,
    s: usize,
) -> Result<LabeledOperator> {
    let n_max = dynamics.model().n_max();
    let mut acc = LabeledOperator::zeros(canonical_labels(s), g_big0.dim())?;
    if s > n_max {
        return Err(Error::Capacity(format!("s = {s} exceeds n_max = {n_max}")));
    }
    for n in 0..=(n_max - s) {
        let cum =
            nonlinear_cumulant(dynamics, &canonical_labels(s), &tail_labels(s, n), g_big0, t)?;
        let traced = cum.partial_trace(&tail_labels(s, n))?;
        acc = acc.add(&traced.scale_re(1.0 / factorial(n)))?;
    }
    Ok(acc)
}

/// Reduced correlations from uncorrelated initial data:
/// `G_s(t) = Σ_n (1/n!) Tr_{s+1..s+n} 𝔄_{s+n}(t) Π G₁⁰(i)` with the fully
/// declustered cumulants.
pub fn chaos_correlation_series(
    dynamics: &Dynamics,
    g1_0: &LabeledOperator,
    t: f64,
    s: usize,
) -> Result<LabeledOperator> {
    if g1_0.particles() != 1 {
        return Err(domain("chaos initial data is a one-particle operator"));
    }
    let n_max = dynamics.model().n_max();
    if s > n_max {
        return Err(Error::Capacity(format!("s = {s} exceeds n_max = {n_max}")));
    }
    let mut acc = LabeledOperator::zeros(canonical_labels(s), g1_0.dim())?;
    for n in 0..=(n_max - s) {
        let total = s + n;
        let labels = canonical_labels(total);
        let factors: Vec<LabeledOperator> =
            labels.iter().map(|&l| g1_0.relabeled(&[l])).collect::<Result<_>>()?;
        let operand = product_on_union(&factors)?;
        let clusters: Vec<Vec<Label>> = labels.iter().map(|&l| vec![l]).collect();
        let cum = group_cumulant(dynamics, &clusters, t, &operand)?;
        let traced = cum.partial_trace(&tail_labels(s, n))?;
        acc = acc.add(&traced.scale_re(1.0 / factorial(n)))?;
    }
    Ok(acc)
}

/// Right-hand side of the nonlinear hierarchy for reduced correlations:
/// the full generator, the bilinear interaction inside `(1..s)`, the traced
/// collision on `G_{s+1}`, and the traced collision on split products with
/// the collided pair separated.
pub fn nonlinear_bbgky_rhs(
    dynamics: &Dynamics,
    g: &OperatorSequence,
    s: usize,
) -> Result<LabeledOperator> {
    let labels = canonical_labels(s);
    let gs = g.get(s);
    let mut acc = dynamics.apply_generator(&gs, GeneratorPart::Full)?;
    if s >= 2 {
        for (x1, x2) in enumerate_two_block(&labels)? {
            let prod = product_on_union(&[g.get_on(&x1)?, g.get_on(&x2)?])?.embed(&labels)?;
            for &i1 in &x1 {
                for &i2 in &x2 {
                    acc = acc.add(&dynamics.interaction_scaled(&prod, i1, i2)?)?;
                }
            }
        }
    }
    let fresh = (s + 1) as Label;
    if s + 1 <= dynamics.model().n_max() {
        let ext = canonical_labels(s + 1);
        let tail = vec![fresh];
        // linear collision term
        let gs1 = g.get(s + 1);
        if gs1.max_abs() > 0.0 {
            for i in 1..=s as Label {
                let coll = dynamics.interaction_scaled(&gs1, i, fresh)?;
                acc = acc.add(&coll.partial_trace(&tail)?)?;
            }
        }
        // bilinear collision term: splits separating i from the fresh particle
        for (x1, x2) in enumerate_two_block(&ext)? {
            let (with_fresh, without) =
                if x2.contains(&fresh) { (x2.clone(), x1.clone()) } else { (x1.clone(), x2.clone()) };
            let prod =
                product_on_union(&[g.get_on(&without)?, g.get_on(&with_fresh)?])?.embed(&ext)?;
            for &i in &without {
                let coll = dynamics.interaction_scaled(&prod, i, fresh)?;
                acc = acc.add(&coll.partial_trace(&tail)?)?;
            }
        }
    }
    Ok(acc)
}

/// Dispersion of an additive observable built from `a₁`:
/// `Tr₁ (a₁² − ⟨A⟩²) G₁ + Tr₁₂ a₁(1) a₁(2) G₂` with `⟨A⟩ = Tr₁ a₁ G₁`.
pub fn dispersion(a1: &LabeledOperator, g: &OperatorSequence) -> Result<f64> {
    if a1.particles() != 1 {
        return Err(domain("dispersion takes a one-particle observable"));
    }
    let a1 = a1.relabeled(&[1])?;
    let g1 = g.get(1);
    let g2 = g.get(2);
    let mean = a1.matmul(&g1)?.trace().re;
    let a1sq = a1.matmul(&a1)?;
    let id = LabeledOperator::identity(vec![1], a1.dim())?;
    let centered = a1sq.sub(&id.scale_re(mean * mean))?;
    let term1 = centered.matmul(&g1)?.trace().re;
    let pair = product_on_union(&[a1.relabeled(&[1])?, a1.relabeled(&[2])?])?;
    let term2 = pair.matmul(&g2)?.trace().re;
    Ok(term1 + term2)
}
