// Temporary numeric probes for route-equivalence behavior at fixed capacity.
use hierarchia::correlations::{cluster_compose_sequence, cluster_invert_sequence};
use hierarchia::dynamics::Direction;
use hierarchia::model::ModelSpec;
use hierarchia::random;
use hierarchia::reduced::*;
use hierarchia::{Dynamics, OperatorSequence};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn model(eps: f64, n_max: usize) -> ModelSpec {
    let c = |re: f64| C64::new(re, 0.0);
    let h = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]);
    let sx = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let sz = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let phi = sx.kronecker(&sx) + sz.kronecker(&sz) * c(0.6) + (sx.kronecker(&sz) + sz.kronecker(&sx)) * c(0.3);
    ModelSpec::new(2, h, phi, eps, n_max).unwrap()
}

#[test]
fn probe_routes() {
    let n_max = 3usize;
    let dynamics = Dynamics::new(model(0.4, n_max));
    let mut rng = random::rng(2024);
    let t = 0.7;

    // symmetric random initial state
    let d0 = random::random_state_sequence(2, n_max, &mut rng, true);
    let dt = d0.map(|_, op| dynamics.propagate(op, t, Direction::Forward)).unwrap();

    // 1. reduced_series vs reduce_density of propagated state
    let f0 = reduce_density_sequence(&d0, n_max).unwrap();
    for s in 1..=2usize {
        let via_trace = reduce_density(&dt, s).unwrap();
        let via_series = reduced_series(&dynamics, &f0, t, s).unwrap();
        println!("P1 s={s}: |trace - series| = {:.3e}", via_trace.max_abs_diff(&via_series));
    }

    // 2. cluster recomposition route vs trace route
    let g0 = cluster_invert_sequence(&d0, n_max).unwrap();
    for s in 1..=2usize {
        let via_trace = reduce_density(&dt, s).unwrap();
        let via_clusters = reduced_density_from_clusters(&dynamics, &g0, t, s).unwrap();
        println!("P2 s={s}: |trace - clusters| = {:.3e}", via_trace.max_abs_diff(&via_clusters));
    }

    // 3. literal cluster trace series vs trace route (expect a real gap)
    for s in 1..=2usize {
        let via_trace = reduce_density(&dt, s).unwrap();
        let literal = cluster_trace_series(&dynamics, &g0, t, s).unwrap();
        println!("P3 s={s}: |trace - literal| = {:.3e}", via_trace.max_abs_diff(&literal));
    }

    // 4. cumulant expansion vs cluster-route reduced correlations
    let mut gb0 = OperatorSequence::state(2);
    for n in 1..=n_max {
        let labels: Vec<u32> = (1..=n as u32).collect();
        let op = random::random_hermitian_op(&labels, 2, &mut rng).scale_re(0.3 / n as f64);
        let op = hierarchia::algebra::symmetrize(&op).unwrap();
        gb0.insert(n, op).unwrap();
    }
    for s in 1..=2usize {
        let exact = reduced_correlation_series(&dynamics, &gb0, t, s).unwrap();
        let expansion = cumulant_expansion_series(&dynamics, &gb0, t, s).unwrap();
        println!("P4 s={s}: |cluster-route - expansion| = {:.3e}", exact.max_abs_diff(&expansion));
    }

    // 5. residual of the cluster-route correlations against the nonlinear hierarchy
    for s in 1..=2usize {
        let err_at = |eta: f64| {
            let plus = reduced_correlation_sequence(&dynamics, &gb0, t + eta, n_max).unwrap();
            let minus = reduced_correlation_sequence(&dynamics, &gb0, t - eta, n_max).unwrap();
            let deriv = plus.get(s).sub(&minus.get(s)).unwrap().scale_re(0.5 / eta);
            let at_t = reduced_correlation_sequence(&dynamics, &gb0, t, n_max).unwrap();
            deriv.max_abs_diff(&nonlinear_bbgky_rhs(&dynamics, &at_t, s).unwrap())
        };
        let e1 = err_at(1e-3);
        let e2 = err_at(5e-4);
        println!("P5 s={s}: residual order = {:.3} (e1={e1:.3e}, e2={e2:.3e})", (e1 / e2).log2());
    }

    // 5b. same residual at the TOP component (expect breakdown)
    {
        let s = n_max;
        let err_at = |eta: f64| {
            let plus = reduced_correlation_sequence(&dynamics, &gb0, t + eta, n_max).unwrap();
            let minus = reduced_correlation_sequence(&dynamics, &gb0, t - eta, n_max).unwrap();
            let deriv = plus.get(s).sub(&minus.get(s)).unwrap().scale_re(0.5 / eta);
            let at_t = reduced_correlation_sequence(&dynamics, &gb0, t, n_max).unwrap();
            deriv.max_abs_diff(&nonlinear_bbgky_rhs(&dynamics, &at_t, s).unwrap())
        };
        let e1 = err_at(1e-3);
        let e2 = err_at(5e-4);
        println!("P5b s={s}: residual order = {:.3} (e1={e1:.3e}, e2={e2:.3e})", (e1 / e2).log2());
    }

    // 6. cumulant-expansion residual against the hierarchy (expect breakdown at s>=2?)
    for s in 1..=2usize {
        let seq_at = |tt: f64| {
            let mut seq = OperatorSequence::state(2);
            for k in 1..=n_max {
                seq.insert(k, cumulant_expansion_series(&dynamics, &gb0, tt, k).unwrap()).unwrap();
            }
            seq
        };
        let err_at = |eta: f64| {
            let plus = seq_at(t + eta);
            let minus = seq_at(t - eta);
            let deriv = plus.get(s).sub(&minus.get(s)).unwrap().scale_re(0.5 / eta);
            deriv.max_abs_diff(&nonlinear_bbgky_rhs(&dynamics, &seq_at(t), s).unwrap())
        };
        let e1 = err_at(1e-3);
        let e2 = err_at(5e-4);
        println!("P6 s={s}: expansion residual order = {:.3} (e1={e1:.3e}, e2={e2:.3e})", (e1 / e2).log2());
    }

    // 7. chaos comparison: expansion == chaos series (per-level identity)
    let g1 = random::random_hermitian_op(&[1], 2, &mut rng).scale_re(0.5);
    let mut chaos0 = OperatorSequence::zero_scalar(2);
    chaos0.insert(1, g1.clone()).unwrap();
    for s in 1..=2usize {
        let a = cumulant_expansion_series(&dynamics, &chaos0, t, s).unwrap();
        let b = chaos_correlation_series(&dynamics, &g1, t, s).unwrap();
        println!("P7 s={s}: |expansion(chaos) - chaos_series| = {:.3e}", a.max_abs_diff(&b));
    }

    // 8. under chaos, cluster-route G1 == chaos series at s=1 (level-matched)
    {
        let a = reduced_correlation_series(&dynamics, &chaos0, t, 1).unwrap();
        let b = chaos_correlation_series(&dynamics, &g1, t, 1).unwrap();
        println!("P8 s=1: |cluster-route(chaos) - chaos_series| = {:.3e}", a.max_abs_diff(&b));
        let a2 = reduced_correlation_series(&dynamics, &chaos0, t, 2).unwrap();
        let b2 = chaos_correlation_series(&dynamics, &g1, t, 2).unwrap();
        println!("P8 s=2: |cluster-route(chaos) - chaos_series| = {:.3e}", a2.max_abs_diff(&b2));
    }

    // 9. compose of evolved correlation sequence == propagated compose (sanity)
    {
        let gt = cluster_invert_sequence(&dt, n_max).unwrap();
        let back = cluster_compose_sequence(&gt, n_max).unwrap();
        println!("P9: |compose(invert(D(t))) - D(t)| = {:.3e}", back.max_abs_diff(&dt));
    }
}
