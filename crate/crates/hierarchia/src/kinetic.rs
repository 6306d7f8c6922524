//! The kinetic description: one-particle correlation series, scattering
//! cumulants and generating operators of correlation functionals, the closed
//! kinetic equation, and the mean-field (Vlasov/Hartree) limit experiments.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::algebra::{product_on_union, LabeledOperator, Label};
use crate::correlations::{cluster_compose_sequence, group_cumulant};
use crate::dynamics::{Direction, Dynamics, GeneratorPart};
use crate::error::{domain, Error, Result};
use crate::model::ModelSpec;
use crate::partitions::enumerate_dissections;
use crate::quad::gauss_legendre_unit;
use crate::reduced::{reduced_correlation_series, reduced_series};
use crate::sequence::OperatorSequence;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

fn canonical_labels(s: usize) -> Vec<Label> {
    (1..=s as Label).collect()
}

/// One-particle state snapshot along a kinetic trajectory.
#[derive(Debug, Clone)]
pub struct KineticState {
    pub t: f64,
    pub g1: LabeledOperator,
}

/// Chaos sequence `(0, g₁, 0, …)` for one-particle initial data.
pub fn chaos_sequence(g1: &LabeledOperator) -> Result<OperatorSequence> {
    if g1.particles() != 1 {
        return Err(domain("chaos data is a one-particle operator"));
    }
    let mut seq = OperatorSequence::zero_scalar(g1.dim());
    seq.insert(1, g1.relabeled(&[1])?)?;
    Ok(seq)
}

/// The one-particle correlation operator evolved from uncorrelated data.
///
/// Computed through the reduced-density route (compose the chaos sequence,
/// apply the cumulant series at component one); the declustered-cumulant sum
/// is an independent path used as its oracle.
pub fn one_particle_series(
    dynamics: &Dynamics,
    g1_0: &LabeledOperator,
    t: f64,
) -> Result<LabeledOperator> {
    let chaos = chaos_sequence(g1_0)?;
    let f0 = cluster_compose_sequence(&chaos, dynamics.model().n_max())?;
    reduced_series(dynamics, &f0, t, 1)
}

/// Scattering cumulant: the declustered cumulant on `labels` composed with
/// the inverse one-particle groups, `𝔄(t) Π_i 𝒢₁(−t, i)`, applied to
/// `operand` (which may live on a superset of `labels`).
pub fn apply_scattering_cumulant(
    dynamics: &Dynamics,
    labels: &[Label],
    t: f64,
    operand: &LabeledOperator,
) -> Result<LabeledOperator> {
    let singles: Vec<Vec<Label>> = labels.iter().map(|&l| vec![l]).collect();
    let pulled = dynamics.propagate_blocks(operand, &singles, -t)?;
    group_cumulant(dynamics, &singles, t, &pulled)
}

/// Generating operator of the correlation functionals, applied to `operand`
/// on `(1..s+n)`.
///
/// Order `n = 0` is the scattering cumulant of the retained particles;
/// `n = 1` adds the single-recollision correction. Those two are pinned by
/// closed forms; higher orders follow the same dissection sum but are only
/// reachable with `experimental` set.
pub fn apply_generating_v(
    dynamics: &Dynamics,
    t: f64,
    s: usize,
    n: usize,
    operand: &LabeledOperator,
    experimental: bool,
) -> Result<LabeledOperator> {
    if n >= 2 && !experimental {
        return Err(domain(format!(
            "generating operators at recollision order {n} ≥ 2 are experimental"
        )));
    }
    let expected = canonical_labels(s + n);
    if operand.labels() != expected.as_slice() {
        return Err(domain(format!(
            "operand must live on {expected:?}, got {:?}",
            operand.labels()
        )));
    }
    let mut acc = LabeledOperator::zeros(expected.clone(), operand.dim())?;
    // compositions of peel counts (n₁, …, n_k), each ≥ 1, total ≤ n
    for (k, comp) in peel_compositions(n) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let m_final = n - comp.iter().sum::<usize>();
        let coeff = factorial(n) * sign / factorial(m_final);
        // peel factors apply right to left (j = k down to 1), then the head
        // scattering cumulant on (1..s+m_final)
        let mut op = operand.clone();
        let mut m_prev = n;
        let mut ranges: Vec<(usize, usize)> = Vec::new(); // (m_j, m_{j-1}) per j
        for &nj in &comp {
            let m_j = m_prev - nj;
            ranges.push((m_j, m_prev));
            m_prev = m_j;
        }
        for &(m_j, m_prev_j) in ranges.iter().rev() {
            op = apply_peel_factor(dynamics, t, s, m_j, m_prev_j, &op)?;
        }
        let head = canonical_labels(s + m_final);
        op = apply_scattering_cumulant(dynamics, &head, t, &op)?;
        acc = acc.add(&op.scale_re(coeff))?;
    }
    Ok(acc)
}

/// All `(k, (n₁..n_k))` with `n_j ≥ 1` and `Σ n_j ≤ n` (the empty composition
/// included).
fn peel_compositions(n: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = vec![(0, Vec::new())];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for base in &frontier {
            let used: usize = base.iter().sum();
            for nj in 1..=(n.saturating_sub(used)) {
                let mut c = base.clone();
                c.push(nj);
                out.push((c.len(), c.clone()));
                next.push(c);
            }
        }
        frontier = next;
    }
    out
}

/// One peel factor: the dissection sum over the peeled labels
/// `Z = (s+m_j+1 .. s+m_{j−1})` with base particles from `(1..s+m_j)`:
/// `Σ_D (1/|D|!) Σ_{i₁≠…≠i_{|D|}} Π_l (1/|X_l|!) 𝔄̂_{1+|X_l|}(t, i_l, X_l)`.
fn apply_peel_factor(
    dynamics: &Dynamics,
    t: f64,
    s: usize,
    m_j: usize,
    m_prev: usize,
    operand: &LabeledOperator,
) -> Result<LabeledOperator> {
    let z: Vec<Label> = ((s + m_j + 1) as Label..=(s + m_prev) as Label).collect();
    let base: Vec<Label> = canonical_labels(s + m_j);
    let mut acc = LabeledOperator::zeros(operand.labels().to_vec(), operand.dim())?;
    for d in enumerate_dissections(&z, s + m_j)? {
        let q = d.len();
        if q > base.len() {
            continue;
        }
        let dissection_weight = 1.0 / factorial(q);
        for tuple in ordered_tuples(&base, q) {
            let mut term = operand.clone();
            let mut weight = dissection_weight;
            for (l, block) in d.blocks().iter().enumerate() {
                let mut labels = vec![tuple[l]];
                labels.extend_from_slice(block);
                labels.sort_unstable();
                weight /= factorial(block.len());
                term = apply_scattering_cumulant(dynamics, &labels, t, &term)?;
            }
            acc = acc.add(&term.scale_re(weight))?;
        }
    }
    Ok(acc)
}

/// Ordered tuples of `q` distinct values from `items`.
fn ordered_tuples(items: &[Label], q: usize) -> Vec<Vec<Label>> {
    if q == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let rest: Vec<Label> =
            items.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &l)| l).collect();
        for mut tail in ordered_tuples(&rest, q - 1) {
            let mut tup = vec![x];
            tup.append(&mut tail);
            out.push(tup);
        }
    }
    out
}

/// Correlation functional: the reduced correlations expressed through the
/// current one-particle operator,
/// `G_s(t | g₁) = Σ_{n≤order} (1/n!) Tr_{s+1..s+n} 𝔙_{s+n}(t) Π g₁(i)`.
pub fn correlation_functional(
    dynamics: &Dynamics,
    g1_t: &LabeledOperator,
    t: f64,
    s: usize,
    order: usize,
    experimental: bool,
) -> Result<LabeledOperator> {
    if g1_t.particles() != 1 {
        return Err(domain("correlation functionals take a one-particle operator"));
    }
    let n_max = dynamics.model().n_max();
    if s > n_max {
        return Err(Error::Capacity(format!("s = {s} exceeds n_max = {n_max}")));
    }
    let mut acc = LabeledOperator::zeros(canonical_labels(s), g1_t.dim())?;
    for n in 0..=order.min(n_max - s) {
        let total = s + n;
        let labels = canonical_labels(total);
        let factors: Vec<LabeledOperator> =
            labels.iter().map(|&l| g1_t.relabeled(&[l])).collect::<Result<_>>()?;
        let operand = product_on_union(&factors)?;
        let v = apply_generating_v(dynamics, t, s, n, &operand, experimental)?;
        let tails: Vec<Label> = ((s + 1) as Label..=total as Label).collect();
        acc = acc.add(&v.partial_trace(&tails)?.scale_re(1.0 / factorial(n)))?;
    }
    Ok(acc)
}

/// Right-hand side of the closed kinetic equation for the one-particle
/// correlation operator:
/// `𝒩*(1)g₁ + Tr₂ ε𝒩_int(1,2) g₁g₁ + Tr₂ ε𝒩_int(1,2) g₂`.
pub fn gke_rhs(
    dynamics: &Dynamics,
    g1: &LabeledOperator,
    g2: &LabeledOperator,
) -> Result<LabeledOperator> {
    let g1 = g1.relabeled(&[1])?;
    let free = dynamics.apply_generator(&g1, GeneratorPart::Full)?;
    let prod = product_on_union(&[g1.relabeled(&[1])?, g1.relabeled(&[2])?])?;
    let mf = dynamics.interaction_scaled(&prod, 1, 2)?.partial_trace(&[2])?;
    let coll = dynamics.interaction_scaled(&g2.relabeled(&[1, 2])?, 1, 2)?.partial_trace(&[2])?;
    free.add(&mf)?.add(&coll)
}

/// Mean-field equation right-hand side with the bare pair potential:
/// `𝒩*(1)g₁ + Tr₂ 𝒩_int(1,2) g₁(1)g₁(2)`.
pub fn vlasov_rhs(dynamics: &Dynamics, g1: &LabeledOperator) -> Result<LabeledOperator> {
    let g1 = g1.relabeled(&[1])?;
    let free = dynamics.apply_generator(&g1, GeneratorPart::Free)?;
    let prod = product_on_union(&[g1.relabeled(&[1])?, g1.relabeled(&[2])?])?;
    let mf =
        dynamics.apply_generator(&prod, GeneratorPart::Interaction(1, 2))?.partial_trace(&[2])?;
    free.add(&mf)
}

const BLOWUP_FACTOR: f64 = 1e3;

/// Classical fourth-order integration of the mean-field flow, re-symmetrized
/// each step; aborts when the norm blows up.
pub fn integrate_vlasov(
    dynamics: &Dynamics,
    g1_0: &LabeledOperator,
    t_grid: &[f64],
    dt: f64,
) -> Result<Vec<KineticState>> {
    if !(dt > 0.0) {
        return Err(domain("step size must be positive"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(domain("time grid must be increasing and nonnegative"));
    }
    let limit = BLOWUP_FACTOR * (g1_0.max_abs() + 1.0);
    let mut state = g1_0.relabeled(&[1])?.hermitian_part();
    let mut now = 0.0f64;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while now < target - 1e-13 {
            let step = dt.min(target - now);
            state = rk4_step(&state, step, &mut |y| vlasov_rhs(dynamics, y))?;
            state = state.hermitian_part();
            now += step;
            if state.max_abs() > limit {
                return Err(Error::Divergence(format!(
                    "mean-field flow exceeded {limit:.1e} at t = {now:.4}"
                )));
            }
        }
        out.push(KineticState { t: target, g1: state.clone() });
    }
    Ok(out)
}

fn rk4_step(
    y: &LabeledOperator,
    dt: f64,
    rhs: &mut dyn FnMut(&LabeledOperator) -> Result<LabeledOperator>,
) -> Result<LabeledOperator> {
    let k1 = rhs(y)?;
    let k2 = rhs(&y.add(&k1.scale_re(dt / 2.0))?)?;
    let k3 = rhs(&y.add(&k2.scale_re(dt / 2.0))?)?;
    let k4 = rhs(&y.add(&k3.scale_re(dt))?)?;
    let incr = k1.add(&k2.scale_re(2.0))?.add(&k3.scale_re(2.0))?.add(&k4)?.scale_re(dt / 6.0);
    y.add(&incr)
}

/// Truncated iterated-integral mean-field series: free one-particle streaming
/// between bare collision insertions, each insertion coupling one fresh
/// particle, integrated over the ordered time simplex.
pub fn vlasov_series(
    dynamics: &Dynamics,
    g1_0: &LabeledOperator,
    t: f64,
    order: usize,
) -> Result<LabeledOperator> {
    if order > 3 {
        return Err(Error::Capacity("mean-field chains beyond order 3 are not supported".into()));
    }
    let g1_0 = g1_0.relabeled(&[1])?;
    let nodes = if order <= 2 { 32 } else { 12 };
    let rule = gauss_legendre_unit(nodes);
    let mut acc = dynamics.propagate(&g1_0, t, Direction::Forward)?;
    let cap = dynamics.model().n_max();
    for n in 1..=order {
        if 1 + n > cap {
            break;
        }
        let mut term = LabeledOperator::zeros(vec![1], g1_0.dim())?;
        let mut times = Vec::with_capacity(n);
        nested_free_chain(dynamics, &g1_0, t, n, &rule, &mut times, t, 1.0, &mut term)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn nested_free_chain(
    dynamics: &Dynamics,
    g1_0: &LabeledOperator,
    t: f64,
    n: usize,
    rule: &[(f64, f64)],
    times: &mut Vec<f64>,
    upper: f64,
    weight: f64,
    acc: &mut LabeledOperator,
) -> Result<()> {
    if times.len() == n {
        let chain = free_collision_chain(dynamics, g1_0, t, times)?;
        *acc = acc.add(&chain.scale_re(weight))?;
        return Ok(());
    }
    for &(x, w) in rule {
        let tk = upper * x;
        times.push(tk);
        nested_free_chain(dynamics, g1_0, t, n, rule, times, tk, weight * w * upper, acc)?;
        times.pop();
    }
    Ok(())
}

/// `𝒢₁(t−t₁,1) 𝒩(1,2) Π𝒢₁(t₁−t₂) … Σ_{k≤n}𝒩(k,n+1) Π𝒢₁(t_n) Π g₁⁰(i)`
/// traced over `2..n+1`, with free streaming and the bare potential.
fn free_collision_chain(
    dynamics: &Dynamics,
    g1_0: &LabeledOperator,
    t: f64,
    times: &[f64],
) -> Result<LabeledOperator> {
    let n = times.len();
    let labels = canonical_labels(1 + n);
    let factors: Vec<LabeledOperator> =
        labels.iter().map(|&l| g1_0.relabeled(&[l])).collect::<Result<_>>()?;
    let mut op = product_on_union(&factors)?;
    let singles =
        |count: usize| -> Vec<Vec<Label>> { (1..=count as Label).map(|l| vec![l]).collect() };
    op = dynamics.propagate_blocks(&op, &singles(1 + n), times[n - 1])?;
    for k in (1..=n).rev() {
        let fresh = (1 + k) as Label;
        let mut coll = LabeledOperator::zeros(op.labels().to_vec(), op.dim())?;
        for j in 1..=k as Label {
            coll =
                coll.add(&dynamics.apply_generator(&op, GeneratorPart::Interaction(j, fresh))?)?;
        }
        op = coll.partial_trace(&[fresh])?;
        let dt = if k == 1 { t - times[0] } else { times[k - 2] - times[k - 1] };
        op = dynamics.propagate_blocks(&op, &singles(k), dt)?;
    }
    Ok(op)
}

/// Finite-dimensional Hartree flow
/// `i ∂ψ = h ψ + (Tr₂ Φ (I ⊗ |ψ⟩⟨ψ|)) ψ` with the bare potential.
pub fn integrate_hartree(
    model: &ModelSpec,
    psi0: &DVector<C64>,
    t_grid: &[f64],
    dt: f64,
) -> Result<Vec<DVector<C64>>> {
    let d = model.d();
    if psi0.len() != d {
        return Err(domain(format!("wavefunction has length {}, expected {d}", psi0.len())));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(domain("initial wavefunction must be normalized"));
    }
    if !(dt > 0.0) {
        return Err(domain("step size must be positive"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(domain("time grid must be increasing and nonnegative"));
    }
    let h = model.h().clone();
    let phi = model.phi().clone();
    let rhs = |psi: &DVector<C64>| -> DVector<C64> {
        let mut mf = DMatrix::<C64>::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..d {
                    for cp in 0..d {
                        acc += phi[(a * d + c, b * d + cp)] * psi[cp] * psi[c].conj();
                    }
                }
                mf[(a, b)] = acc;
            }
        }
        (&h * psi + mf * psi) * C64::new(0.0, -1.0)
    };
    let mut psi = psi0.clone();
    let mut now = 0.0f64;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while now < target - 1e-13 {
            let step = dt.min(target - now);
            let k1 = rhs(&psi);
            let k2 = rhs(&(&psi + &k1 * C64::new(step / 2.0, 0.0)));
            let k3 = rhs(&(&psi + &k2 * C64::new(step / 2.0, 0.0)));
            let k4 = rhs(&(&psi + &k3 * C64::new(step, 0.0)));
            psi += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
                * C64::new(step / 6.0, 0.0);
            now += step;
            if psi.norm() > BLOWUP_FACTOR {
                return Err(Error::Divergence(format!("Hartree flow blew up at t = {now:.4}")));
            }
        }
        out.push(psi.clone());
    }
    Ok(out)
}

/// Decreasing positive coupling schedule for scaling sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSchedule {
    epsilons: Vec<f64>,
}

impl ScalingSchedule {
    pub fn new(epsilons: Vec<f64>) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(domain("scaling schedule must be nonempty"));
        }
        if epsilons.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(domain("scaling schedule entries must be positive and finite"));
        }
        if epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(domain("scaling schedule must be strictly decreasing"));
        }
        Ok(Self { epsilons })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }
}

/// One row of the mean-field sweep table.
#[derive(Debug, Clone)]
pub struct MeanFieldRow {
    pub epsilon: f64,
    pub t: f64,
    /// `‖ε G₁(t) − g₁(t)‖₁` against the integrated mean-field reference.
    pub err_g1_tracenorm: f64,
    /// `‖ε² G₂(t)‖₁`.
    pub err_g2_scaled: f64,
    /// `‖𝔄₂(t) f₂‖₁ / ε` for the fixed pair operand `g₁⁰(1) g₁⁰(2)`.
    pub cumulant_decay: f64,
    /// Log-log slope of the G₁ error over the whole schedule.
    pub fitted_slope: f64,
}

/// Sweep the coupling schedule with scaled initial data `G₁⁰ = g₁⁰/ε` and
/// measure convergence toward the mean-field flow.
///
/// Runs are independent and execute in parallel; rows come back ordered by
/// decreasing coupling.
pub fn mean_field_experiment(
    model: &ModelSpec,
    schedule: &ScalingSchedule,
    g1_0: &LabeledOperator,
    t: f64,
) -> Result<Vec<MeanFieldRow>> {
    if g1_0.particles() != 1 {
        return Err(domain("mean-field initial data is a one-particle operator"));
    }
    let g1_0 = g1_0.relabeled(&[1])?;
    let reference_dyn = Dynamics::new(model.with_epsilon(0.0)?);
    let dt = 1e-3;
    let reference =
        integrate_vlasov(&reference_dyn, &g1_0, &[t], dt)?.pop().expect("one grid point").g1;
    let pair = product_on_union(&[g1_0.relabeled(&[1])?, g1_0.relabeled(&[2])?])?;

    let partial: Vec<Result<(f64, f64, f64)>> = schedule
        .epsilons()
        .par_iter()
        .map(|&eps| {
            let dynamics = Dynamics::new(model.with_epsilon(eps)?);
            let scaled0 = g1_0.scale_re(1.0 / eps);
            let g1_t = one_particle_series(&dynamics, &scaled0, t)?;
            let err_g1 = g1_t.scale_re(eps).sub(&reference)?.trace_norm();
            let g2_t = crate::reduced::chaos_correlation_series(&dynamics, &scaled0, t, 2)?;
            let err_g2 = g2_t.scale_re(eps * eps).trace_norm();
            let cum = group_cumulant(&dynamics, &[vec![1], vec![2]], t, &pair)?;
            Ok((err_g1, err_g2, cum.trace_norm() / eps))
        })
        .collect();

    let mut measured = Vec::with_capacity(partial.len());
    for r in partial {
        measured.push(r?);
    }
    let xs: Vec<f64> = schedule.epsilons().iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = measured.iter().map(|(e1, _, _)| e1.max(1e-300).ln()).collect();
    let slope = fit_slope(&xs, &ys);
    Ok(schedule
        .epsilons()
        .iter()
        .zip(measured)
        .map(|(&epsilon, (err_g1_tracenorm, err_g2_scaled, cumulant_decay))| MeanFieldRow {
            epsilon,
            t,
            err_g1_tracenorm,
            err_g2_scaled,
            cumulant_decay,
            fitted_slope: slope,
        })
        .collect())
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Exact reduced pair correlation for chaos data — the closure used when the
/// kinetic equation is checked with its collision term evaluated exactly.
pub fn exact_pair_correlation(
    dynamics: &Dynamics,
    g1_0: &LabeledOperator,
    t: f64,
) -> Result<LabeledOperator> {
    let chaos = chaos_sequence(g1_0)?;
    reduced_correlation_series(dynamics, &chaos, t, 2)
}
