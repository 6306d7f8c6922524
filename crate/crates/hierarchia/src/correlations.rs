//! Cluster expansions between state and correlation sequences, cumulants of
//! the propagation groups, the nonlinear group of correlation dynamics, and
//! its hierarchy right-hand side.

use crate::algebra::{product_on_union, LabeledOperator, Label};
use crate::dynamics::{Dynamics, GeneratorPart};
use crate::error::{domain, Result};
use crate::partitions::{enumerate_partitions, enumerate_two_block, mobius_weight};
use crate::sequence::OperatorSequence;

/// Compose correlations into the state component on an arbitrary label set:
/// `D(Y) = Σ_{P ⊢ Y} Π_{X ∈ P} g_{|X|}(X)`.
pub fn cluster_compose_on(g: &OperatorSequence, labels: &[Label]) -> Result<LabeledOperator> {
    let mut acc = LabeledOperator::zeros(labels.to_vec(), g.dim())?;
    for p in enumerate_partitions(labels)? {
        let factors: Vec<LabeledOperator> =
            p.blocks().iter().map(|b| g.get_on(b)).collect::<Result<_>>()?;
        let term = product_on_union(&factors)?;
        acc = acc.add(&term.embed(labels)?)?;
    }
    Ok(acc)
}

/// `D_n` on the canonical labels `(1..=n)`.
pub fn cluster_compose(g: &OperatorSequence, n: usize) -> Result<LabeledOperator> {
    cluster_compose_on(g, &(1..=n as Label).collect::<Vec<_>>())
}

/// Compose every component up to `top` into a state sequence.
pub fn cluster_compose_sequence(g: &OperatorSequence, top: usize) -> Result<OperatorSequence> {
    let mut out = OperatorSequence::state(g.dim());
    for n in 1..=top {
        out.insert(n, cluster_compose(g, n)?)?;
    }
    Ok(out)
}

/// Extract the correlation component on an arbitrary label set:
/// `g(Y) = Σ_{P ⊢ Y} (−1)^{|P|−1}(|P|−1)! Π_{X ∈ P} D_{|X|}(X)`.
pub fn cluster_invert_on(d_seq: &OperatorSequence, labels: &[Label]) -> Result<LabeledOperator> {
    let mut acc = LabeledOperator::zeros(labels.to_vec(), d_seq.dim())?;
    for p in enumerate_partitions(labels)? {
        let factors: Vec<LabeledOperator> =
            p.blocks().iter().map(|b| d_seq.get_on(b)).collect::<Result<_>>()?;
        let term = product_on_union(&factors)?.embed(labels)?;
        acc = acc.add(&term.scale_re(mobius_weight(&p) as f64))?;
    }
    Ok(acc)
}

/// `g_s` on the canonical labels `(1..=s)`.
pub fn cluster_invert(d_seq: &OperatorSequence, s: usize) -> Result<LabeledOperator> {
    cluster_invert_on(d_seq, &(1..=s as Label).collect::<Vec<_>>())
}

/// Invert every component up to `top` into a correlation sequence.
pub fn cluster_invert_sequence(d_seq: &OperatorSequence, top: usize) -> Result<OperatorSequence> {
    let mut out = OperatorSequence::state(d_seq.dim());
    for s in 1..=top {
        out.insert(s, cluster_invert(d_seq, s)?)?;
    }
    Ok(out)
}

/// Cumulant of the propagation groups over a set of disjoint clusters:
///
/// `Σ_{P' ⊢ clusters} (−1)^{|P'|−1}(|P'|−1)! Π_{Z ∈ P'} G_{θ(Z)}(t)` applied
/// to `operand`, where each merged block `Z` propagates as one interacting
/// unit on its flattened labels θ(Z). The operand may live on a superset of
/// the flattened clusters; the group factors embed.
///
/// The first-order cumulant (a single cluster) is the group itself; with the
/// interaction switched off all higher orders vanish identically.
pub fn group_cumulant(
    dynamics: &Dynamics,
    clusters: &[Vec<Label>],
    t: f64,
    operand: &LabeledOperator,
) -> Result<LabeledOperator> {
    group_cumulant_split(dynamics, clusters, None, t, operand)
}

/// Cumulant of group products with an optional split of the dynamics.
///
/// When `parts` is given, the group factor for a merged block `Z` is the
/// product of the interacting groups on `θ(Z) ∩ part` over the parts — the
/// dynamics with the interaction across part boundaries removed. This is the
/// building block of the composed nonlinear evolutions.
pub fn group_cumulant_split(
    dynamics: &Dynamics,
    clusters: &[Vec<Label>],
    parts: Option<&[Vec<Label>]>,
    t: f64,
    operand: &LabeledOperator,
) -> Result<LabeledOperator> {
    let k = clusters.len();
    if k == 0 {
        return Err(domain("cumulant of zero clusters"));
    }
    let mut union: Vec<Label> = clusters.iter().flatten().copied().collect();
    union.sort_unstable();
    let distinct = union.windows(2).all(|w| w[0] < w[1]);
    if !distinct {
        return Err(domain(format!("clusters must be disjoint, got {clusters:?}")));
    }
    if union.iter().any(|l| !operand.labels().contains(l)) {
        return Err(domain(format!(
            "operand lives on {:?}, cumulant clusters flatten to {union:?}",
            operand.labels()
        )));
    }
    let idx: Vec<Label> = (0..k as Label).collect();
    let mut acc = LabeledOperator::zeros(operand.labels().to_vec(), operand.dim())?;
    for p in enumerate_partitions(&idx)? {
        // each block of cluster indices merges into one propagating unit
        let mut blocks: Vec<Vec<Label>> = Vec::with_capacity(p.len());
        for z in p.blocks() {
            let mut merged: Vec<Label> = Vec::new();
            for &ci in z {
                merged.extend_from_slice(&clusters[ci as usize]);
            }
            merged.sort_unstable();
            match parts {
                None => blocks.push(merged),
                Some(ys) => {
                    for y in ys {
                        let piece: Vec<Label> =
                            merged.iter().copied().filter(|l| y.contains(l)).collect();
                        if !piece.is_empty() {
                            blocks.push(piece);
                        }
                    }
                }
            }
        }
        let term = dynamics.propagate_blocks(operand, &blocks, t)?;
        acc = acc.add(&term.scale_re(mobius_weight(&p) as f64))?;
    }
    Ok(acc)
}

/// The nonlinear evolution on an arbitrary element ground.
///
/// Elements are disjoint label clusters; `initial(block)` supplies the
/// initial datum for a set of elements (given by indices into `elements`) as
/// an operator on the block's flattened labels. Computes
/// `Σ_{P ⊢ elements} 𝔄_{|P|}(t, {θ(X₁)}, …) Π_X initial(X)`.
pub fn nonlinear_group_on_elements(
    dynamics: &Dynamics,
    elements: &[Vec<Label>],
    t: f64,
    initial: &mut dyn FnMut(&[usize]) -> Result<LabeledOperator>,
) -> Result<LabeledOperator> {
    let mut universe: Vec<Label> = elements.iter().flatten().copied().collect();
    universe.sort_unstable();
    let idx: Vec<Label> = (0..elements.len() as Label).collect();
    let mut acc = LabeledOperator::zeros(universe.clone(), dynamics.model().d())?;
    for p in enumerate_partitions(&idx)? {
        let mut clusters: Vec<Vec<Label>> = Vec::with_capacity(p.len());
        let mut factors: Vec<LabeledOperator> = Vec::with_capacity(p.len());
        for block in p.blocks() {
            let block_idx: Vec<usize> = block.iter().map(|&b| b as usize).collect();
            let mut flat: Vec<Label> = Vec::new();
            for &bi in &block_idx {
                flat.extend_from_slice(&elements[bi]);
            }
            flat.sort_unstable();
            clusters.push(flat);
            factors.push(initial(&block_idx)?);
        }
        let operand = product_on_union(&factors)?.embed(&universe)?;
        let term = group_cumulant(dynamics, &clusters, t, &operand)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// The group of correlation dynamics:
/// `g_s(t) = Σ_{P ⊢ (1..s)} 𝔄_{|P|}(t, {X₁}, …) Π_j g⁰(X_j)`.
pub fn nonlinear_group(
    dynamics: &Dynamics,
    g0: &OperatorSequence,
    t: f64,
    s: usize,
) -> Result<LabeledOperator> {
    let elements: Vec<Vec<Label>> = (1..=s as Label).map(|l| vec![l]).collect();
    nonlinear_group_on_elements(dynamics, &elements, t, &mut |block| {
        let labels: Vec<Label> = block.iter().map(|&i| (i + 1) as Label).collect();
        g0.get_on(&labels)
    })
}

/// Evolve a whole correlation sequence up to `top`.
pub fn nonlinear_group_sequence(
    dynamics: &Dynamics,
    g0: &OperatorSequence,
    t: f64,
    top: usize,
) -> Result<OperatorSequence> {
    let mut out = OperatorSequence::state(g0.dim());
    out.set_scalar_0(g0.scalar_0());
    for s in 1..=top {
        out.insert(s, nonlinear_group(dynamics, g0, t, s)?)?;
    }
    Ok(out)
}

/// Right-hand side of the correlation hierarchy at component `s`:
/// the full generator on `g_s` plus, for every unordered split of `(1..s)`
/// into `(X₁, X₂)`, the coupling-scaled interaction over all cross pairs
/// applied to the product `g(X₁)g(X₂)`.
pub fn correlation_hierarchy_rhs(
    dynamics: &Dynamics,
    g: &OperatorSequence,
    s: usize,
) -> Result<LabeledOperator> {
    let labels: Vec<Label> = (1..=s as Label).collect();
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
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Direction;
    use crate::random;
    use crate::test_fixtures::sample_model;

    #[test]
    fn compose_small_components() {
        let mut rng = random::rng(101);
        let g = random::random_correlation_sequence(2, 2, &mut rng);
        // n = 1: the correlation itself
        assert!(cluster_compose(&g, 1).unwrap().max_abs_diff(&g.get(1)) < 1e-14);
        // n = 2: g₂ + g₁(1)g₁(2)
        let pair = product_on_union(&[g.get_on(&[1]).unwrap(), g.get_on(&[2]).unwrap()]).unwrap();
        let expect = g.get(2).add(&pair).unwrap();
        assert!(cluster_compose(&g, 2).unwrap().max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn compose_matches_recursive_oracle() {
        // independent recursion: D(S) = Σ_{X ∋ min S} g(X)·D(S∖X)
        fn oracle(g: &OperatorSequence, labels: &[Label]) -> LabeledOperator {
            if labels.is_empty() {
                panic!("oracle needs a nonempty set");
            }
            let mut acc = LabeledOperator::zeros(labels.to_vec(), g.dim()).unwrap();
            let first = labels[0];
            let rest: Vec<Label> = labels[1..].to_vec();
            let all_subsets: Vec<Vec<Label>> = (0..(1u32 << rest.len()))
                .map(|mask| {
                    rest.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &l)| l).collect()
                })
                .collect();
            for sub in all_subsets {
                let mut block = vec![first];
                block.extend_from_slice(&sub);
                block.sort_unstable();
                let complement: Vec<Label> =
                    labels.iter().copied().filter(|l| !block.contains(l)).collect();
                let factor = g.get_on(&block).unwrap();
                let term = if complement.is_empty() {
                    factor.embed(labels).unwrap()
                } else {
                    product_on_union(&[factor, oracle(g, &complement)])
                        .unwrap()
                        .embed(labels)
                        .unwrap()
                };
                acc = acc.add(&term).unwrap();
            }
            acc
        }
        let mut rng = random::rng(59);
        let g = random::random_correlation_sequence(2, 4, &mut rng);
        let got = cluster_compose(&g, 4).unwrap();
        let want = oracle(&g, &[1, 2, 3, 4]);
        assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn invert_small_components() {
        let mut rng = random::rng(61);
        let d_seq = random::random_state_sequence(2, 2, &mut rng, false);
        assert!(cluster_invert(&d_seq, 1).unwrap().max_abs_diff(&d_seq.get(1)) < 1e-14);
        let pair =
            product_on_union(&[d_seq.get_on(&[1]).unwrap(), d_seq.get_on(&[2]).unwrap()]).unwrap();
        let expect = d_seq.get(2).sub(&pair).unwrap();
        assert!(cluster_invert(&d_seq, 2).unwrap().max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn product_states_have_no_correlations() {
        let mut rng = random::rng(67);
        let rho = random::random_density_op(&[1], 2, &mut rng);
        let mut d_seq = OperatorSequence::state(2);
        for n in 1..=4usize {
            let labels: Vec<Label> = (1..=n as Label).collect();
            let factors: Vec<LabeledOperator> =
                labels.iter().map(|&l| rho.relabeled(&[l]).unwrap()).collect();
            d_seq.insert(n, product_on_union(&factors).unwrap()).unwrap();
        }
        for s in 2..=4usize {
            assert!(cluster_invert(&d_seq, s).unwrap().max_abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn compose_invert_roundtrip() {
        let mut rng = random::rng(71);
        for support in 1..=5usize {
            let g = random::random_correlation_sequence(2, support, &mut rng);
            let d_seq = cluster_compose_sequence(&g, support).unwrap();
            let back = cluster_invert_sequence(&d_seq, support).unwrap();
            assert!(g.max_abs_diff(&back) < 1e-11, "support {support}");
            let d_back = cluster_compose_sequence(&back, support).unwrap();
            assert!(d_seq.max_abs_diff(&d_back) < 1e-11);
        }
    }

    #[test]
    fn first_order_cumulant_is_the_group() {
        let dynamics = Dynamics::new(sample_model(0.7, 3));
        let mut rng = random::rng(73);
        let op = random::random_hermitian_op(&[1, 2, 3], 2, &mut rng);
        let cum = group_cumulant(&dynamics, &[vec![1, 2, 3]], 0.9, &op).unwrap();
        let grp = dynamics.propagate(&op, 0.9, Direction::Forward).unwrap();
        assert!(cum.max_abs_diff(&grp) < 1e-12);
    }

    #[test]
    fn second_order_cumulant_two_terms() {
        let dynamics = Dynamics::new(sample_model(0.7, 2));
        let mut rng = random::rng(79);
        let op = random::random_hermitian_op(&[1, 2], 2, &mut rng);
        let t = 0.6;
        let cum = group_cumulant(&dynamics, &[vec![1], vec![2]], t, &op).unwrap();
        let full = dynamics.propagate(&op, t, Direction::Forward).unwrap();
        let split = dynamics.propagate_blocks(&op, &[vec![1], vec![2]], t).unwrap();
        let expect = full.sub(&split).unwrap();
        assert!(cum.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn cumulants_vanish_without_interaction() {
        let dynamics = Dynamics::new(sample_model(0.0, 3));
        let mut rng = random::rng(83);
        let op = random::random_hermitian_op(&[1, 2, 3], 2, &mut rng);
        let cluster_sets: [Vec<Vec<Label>>; 2] =
            [vec![vec![1], vec![2], vec![3]], vec![vec![1, 2], vec![3]]];
        for clusters in cluster_sets {
            let cum = group_cumulant(&dynamics, &clusters, 1.1, &op).unwrap();
            assert!(cum.max_abs() < 1e-11, "clusters {clusters:?}");
        }
    }

    #[test]
    fn nonlinear_group_at_zero_time_is_identity() {
        let dynamics = Dynamics::new(sample_model(0.5, 3));
        let mut rng = random::rng(89);
        let g0 = random::random_correlation_sequence(2, 3, &mut rng);
        for s in 1..=3usize {
            let gs = nonlinear_group(&dynamics, &g0, 0.0, s).unwrap();
            assert!(gs.max_abs_diff(&g0.get(s)) < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn nonlinear_group_under_chaos_data() {
        // with only a one-particle component the evolution is the declustered
        // cumulant applied to the product
        let dynamics = Dynamics::new(sample_model(0.4, 3));
        let mut rng = random::rng(97);
        let g1 = random::random_hermitian_op(&[1], 2, &mut rng);
        let mut g0 = OperatorSequence::zero_scalar(2);
        g0.insert(1, g1.clone()).unwrap();
        let t = 0.8;
        let s = 3;
        let labels: Vec<Label> = (1..=s as Label).collect();
        let got = nonlinear_group(&dynamics, &g0, t, s).unwrap();
        let prod = product_on_union(
            &labels.iter().map(|&l| g1.relabeled(&[l]).unwrap()).collect::<Vec<_>>(),
        )
        .unwrap();
        let clusters: Vec<Vec<Label>> = labels.iter().map(|&l| vec![l]).collect();
        let want = group_cumulant(&dynamics, &clusters, t, &prod).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn nonlinear_group_matches_conjugation_roundtrip() {
        // compose → propagate → invert is the independent route
        let dynamics = Dynamics::new(sample_model(0.6, 3));
        let mut rng = random::rng(103);
        let g0 = random::random_correlation_sequence(2, 3, &mut rng);
        let t = 1.0;
        let d0 = cluster_compose_sequence(&g0, 3).unwrap();
        let dt = d0.map(|_, op| dynamics.propagate(op, t, Direction::Forward)).unwrap();
        for s in 1..=3usize {
            let direct = nonlinear_group(&dynamics, &g0, t, s).unwrap();
            let via_state = cluster_invert(&dt, s).unwrap();
            assert!(direct.max_abs_diff(&via_state) < 1e-10, "s = {s}");
        }
    }

    #[test]
    fn semigroup_property_of_correlation_dynamics() {
        let dynamics = Dynamics::new(sample_model(0.5, 3));
        let mut rng = random::rng(107);
        let g0 = random::random_correlation_sequence(2, 3, &mut rng);
        let (t, s_time) = (0.4, 0.3);
        let mid = nonlinear_group_sequence(&dynamics, &g0, t, 3).unwrap();
        for s in 1..=3usize {
            let two_step = nonlinear_group(&dynamics, &mid, s_time, s).unwrap();
            let one_step = nonlinear_group(&dynamics, &g0, t + s_time, s).unwrap();
            assert!(two_step.max_abs_diff(&one_step) < 1e-9, "s = {s}");
        }
    }

    #[test]
    fn hierarchy_rhs_structure() {
        let dynamics = Dynamics::new(sample_model(0.8, 2));
        let mut rng = random::rng(109);
        let g = random::random_correlation_sequence(2, 2, &mut rng);
        // s = 1: just the generator
        let rhs1 = correlation_hierarchy_rhs(&dynamics, &g, 1).unwrap();
        let gen1 = dynamics.apply_generator(&g.get(1), GeneratorPart::Full).unwrap();
        assert!(rhs1.max_abs_diff(&gen1) < 1e-13);
        // without interaction only the free part remains
        let free_dyn = Dynamics::new(sample_model(0.0, 2));
        let rhs_free = correlation_hierarchy_rhs(&free_dyn, &g, 2).unwrap();
        let gen_free = free_dyn.apply_generator(&g.get(2), GeneratorPart::Free).unwrap();
        assert!(rhs_free.max_abs_diff(&gen_free) < 1e-12);
    }

    #[test]
    fn hierarchy_residual_converges_at_second_order() {
        let dynamics = Dynamics::new(sample_model(0.7, 3));
        let mut rng = random::rng(113);
        let g0 = random::random_correlation_sequence(2, 3, &mut rng);
        let t = 0.5;
        for s in 1..=3usize {
            let err_at = |eta: f64| {
                let plus = nonlinear_group_sequence(&dynamics, &g0, t + eta, 3).unwrap();
                let minus = nonlinear_group_sequence(&dynamics, &g0, t - eta, 3).unwrap();
                let deriv = plus.get(s).sub(&minus.get(s)).unwrap().scale_re(0.5 / eta);
                let at_t = nonlinear_group_sequence(&dynamics, &g0, t, 3).unwrap();
                deriv.max_abs_diff(&correlation_hierarchy_rhs(&dynamics, &at_t, s).unwrap())
            };
            let e1 = err_at(1e-3);
            let e2 = err_at(5e-4);
            let order = (e1 / e2).log2();
            assert!(order >= 1.9, "s = {s}: observed order {order} (errors {e1:.3e}, {e2:.3e})");
        }
    }
}
