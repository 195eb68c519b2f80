use super::*;
use crate::trap::{Expansion, TrapConfig};
use crate::{AMU, TWO_PI};

/// Two ions sharing one 500 kHz mode (η = 0.1 each), τ = 20 µs, first-order
/// sideband Hamiltonian, noiseless, δ grid {0}.
pub(crate) fn toy_problem(n_segments: usize) -> FeasibilityProblem {
    let nu = TWO_PI * 0.5e6;
    let tau = 20e-6;
    let b = 0.5f64.sqrt();
    let dk = TrapConfig::delta_k_for(171.0 * AMU, nu, b, 0.1);
    let mut trap = TrapConfig::new(171.0 * AMU, vec![nu], vec![vec![b], vec![b]], dk).unwrap();
    trap.spillover_fraction = 0.0;
    FeasibilityProblem {
        trap,
        noise: NoiseModel::noiseless(1),
        targets: (0, 1),
        n_segments,
        gate_time: tau,
        max_amplitude: TWO_PI * 400e3,
        detuning_range: (nu + 0.5 * TWO_PI / tau, nu + 3.5 * TWO_PI / tau),
        drift_tolerance: 0.0,
        target_infidelity: 0.01,
        drift_grid: vec![0.0],
        nbar: vec![0.0],
        cutoffs: vec![8],
        integrator: IntegratorSettings {
            rel_tol: 1e-7,
            abs_tol: 1e-9,
            adaptive_fock: false,
            expansion: Expansion::Series { order: 1, carrier: false },
            ..Default::default()
        },
    }
}

fn sota_candidate(p: &FeasibilityProblem) -> Candidate {
    let mu = p.trap.mode_freqs[0] + TWO_PI / p.gate_time;
    let d = crate::sota::sota_design(p.gate_time, 1, mu, &p.trap, p.targets, crate::sota::BELL_PHASE, Default::default())
        .unwrap();
    Candidate { amplitudes: vec![d.pulse.amplitudes[0]; p.n_segments], detuning: mu }
}

#[test]
fn zero_pulse_leaves_half_infidelity() {
    let p = toy_problem(3);
    let c = Candidate { amplitudes: vec![0.0; 3], detuning: p.detuning_range.0 };
    let r = evaluate(&c, &p).unwrap();
    assert!((r.worst_infidelity - 0.5).abs() < 1e-9, "{}", r.worst_infidelity);
    assert!(!r.feasible);
}

#[test]
fn analytic_ms_candidate_is_feasible() {
    let p = toy_problem(3);
    let r = evaluate(&sota_candidate(&p), &p).unwrap();
    assert!(r.worst_infidelity <= 1e-3, "{:?}", r.curve);
    assert!(r.feasible);
}

#[test]
fn worst_is_max_over_grid() {
    let mut p = toy_problem(1);
    p.drift_tolerance = TWO_PI * 2e3;
    p.drift_grid = default_drift_grid(p.drift_tolerance, 3);
    p.validate().unwrap();
    let r = evaluate(&sota_candidate(&p), &p).unwrap();
    let at_zero = r.curve.iter().find(|q| q.drift == 0.0).unwrap().infidelity;
    let max = r.curve.iter().map(|q| q.infidelity).fold(0.0, f64::max);
    assert_eq!(r.worst_infidelity, max);
    assert!(r.worst_infidelity >= at_zero);
    assert!(r.curve.iter().any(|q| q.infidelity > at_zero));
}

#[test]
fn drift_grid_and_bounds_checked() {
    assert_eq!(default_drift_grid(2.0, 5), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    assert_eq!(default_drift_grid(0.0, 5), vec![0.0]);
    let mut p = toy_problem(3);
    p.drift_tolerance = 1.0;
    assert!(p.validate().is_err());
    let mut p = toy_problem(3);
    p.detuning_range = (2.0, 1.0);
    assert!(p.validate().is_err());
    let p = toy_problem(3);
    let mut c = sota_candidate(&p);
    c.amplitudes[1] = p.max_amplitude * 1.01;
    assert!(evaluate(&c, &p).is_err());
}

#[test]
fn failed_integration_is_penalized() {
    let mut p = toy_problem(3);
    p.integrator.max_cutoffs = vec![3];
    p.integrator.adaptive_fock = true;
    p.cutoffs = vec![3];
    let r = evaluate(&sota_candidate(&p), &p).unwrap();
    assert_eq!(r.worst_infidelity, FAILURE_PENALTY);
    assert!(r.curve[0].failure.is_some());
}

#[test]
fn symmetric_encoding_mirrors() {
    let p = toy_problem(5);
    let x = [1.0, 2.0, 3.0, 7.0];
    let c = p.decode(&x, true);
    assert_eq!(c.amplitudes, vec![1.0, 2.0, 3.0, 2.0, 1.0]);
    assert_eq!(c.detuning, 7.0);
    assert_eq!(p.encode(&c, true), x.to_vec());
    assert_eq!(p.dimension(true), 4);
    assert_eq!(p.dimension(false), 6);
}

#[test]
fn toy_feasibility_search() {
    let p = toy_problem(3);
    let s = DESettings { population: Some(20), seed: 2, max_evaluations: Some(5000), ..Default::default() };
    let r = differential_evolution(&p, &s, None).unwrap();
    assert!(r.feasible, "best {}", r.evaluation.worst_infidelity);
    assert_eq!(r.stop, StopReason::Target);
    assert!(r.best.in_bounds(&p));
    // no stale caching: re-evaluation reproduces the reported value
    assert_eq!(evaluate(&r.best, &p).unwrap().worst_infidelity, r.evaluation.worst_infidelity);
    for w in r.history.windows(2) {
        assert!(w[1].best <= w[0].best);
    }
}

#[test]
fn symmetric_search_returns_mirrored_pulse() {
    let p = toy_problem(3);
    let s = DESettings { population: Some(8), max_generations: 2, symmetric: true, seed: 5, ..Default::default() };
    let r = differential_evolution(&p, &s, None).unwrap();
    assert_eq!(r.best.amplitudes[0], r.best.amplitudes[2]);
    assert!(r.best.in_bounds(&p));
    assert_eq!(r.evaluations, 24);
}

#[test]
fn gate_time_scan_warm_starts() {
    let p = toy_problem(1);
    let warm = sota_candidate(&p);
    // a single-generation search from the analytic candidate is feasible at τ
    // and reused as the seed for the shorter τ
    let s = DESettings { population: Some(4), max_generations: 0, seed: 3, ..Default::default() };
    let first = differential_evolution(&p, &s, Some(&warm)).unwrap();
    assert!(first.feasible);
    assert_eq!(first.evaluations, 4);
    let scan = minimize_gate_time(&p, &s, &[p.gate_time, 0.5 * p.gate_time]).unwrap();
    assert_eq!(scan.entries.len(), 2);
    assert!(minimize_gate_time(&p, &s, &[1e-5, 2e-5]).is_err());
    match scan.shortest() {
        Some(e) => assert!(e.result.feasible),
        None => assert!(scan.entries.iter().all(|e| !e.result.feasible)),
    }
}
