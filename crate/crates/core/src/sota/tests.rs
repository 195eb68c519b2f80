use proptest::prelude::*;

use super::kernels::quadrature::rule;
use super::*;
use crate::lindblad::{initial_state, integrate_qme, IntegratorSettings, NoiseModel};
use crate::quantum::CompositeSpace;
use crate::trap::{homogeneous_chain, Expansion};
use crate::{AMU, TWO_PI};

fn two_ion_trap(nu: f64, eta: f64) -> TrapConfig {
    let b = 0.5f64.sqrt();
    let dk = TrapConfig::delta_k_for(171.0 * AMU, nu, b, eta);
    let mut t = TrapConfig::new(171.0 * AMU, vec![nu], vec![vec![b], vec![b]], dk).unwrap();
    t.spillover_fraction = 0.0;
    t
}

fn chain_trap(n: usize) -> TrapConfig {
    let modes = homogeneous_chain(n, TWO_PI * 3.07e6, TWO_PI * 2.96e6).unwrap();
    let dk = TrapConfig::delta_k_for(171.0 * AMU, modes.freqs[0], modes.vectors[0][0], 0.065);
    TrapConfig::new(171.0 * AMU, modes.freqs, modes.vectors, dk).unwrap()
}

fn quad_displacement(w: f64, mu: f64, a: f64, b: f64) -> C64 {
    let panels = ((b - a) * (w.abs() + mu.abs()) / 2.0).ceil().max(4.0) as usize;
    rule(a, b, panels, 20).into_iter().map(|(t, wt)| C64::from_polar(wt * (mu * t).sin(), w * t)).sum()
}

/// Θ by nested quadrature of the defining double integral.
#[allow(clippy::needless_range_loop)]
fn quad_phase(omega: &[f64], tau: f64, mu: f64, trap: &TrapConfig, targets: (usize, usize)) -> f64 {
    let m = omega.len();
    let h = tau / m as f64;
    let eta = trap.lamb_dicke_params();
    let mut total = 0.0;
    for (l, nu) in trap.mode_freqs.iter().enumerate() {
        let w = nu + trap.drift;
        let coupling = 2.0 * eta[targets.0][l] * eta[targets.1][l];
        let panels = ((h * (w + mu)) / 3.0).ceil().max(2.0) as usize;
        for k in 0..m {
            for (t1, w1) in rule(k as f64 * h, (k + 1) as f64 * h, panels, 12) {
                let mut inner = 0.0;
                for kk in 0..=k {
                    let hi = if kk == k { t1 } else { (kk + 1) as f64 * h };
                    let p = ((hi - kk as f64 * h) * (w + mu) / 3.0).ceil().max(1.0) as usize;
                    inner += omega[kk]
                        * rule(kk as f64 * h, hi, p, 12)
                            .into_iter()
                            .map(|(t2, w2)| w2 * (mu * t2).sin() * (w * (t1 - t2)).sin())
                            .sum::<f64>();
                }
                total += coupling * omega[k] * w1 * (mu * t1).sin() * inner;
            }
        }
    }
    total
}

#[test]
fn commensurate_single_segment_closes() {
    let nu = TWO_PI * 3.0e6;
    let tau = 50e-6;
    let mu = nu + TWO_PI / tau;
    let m = displacement_matrix(tau, 1, mu, &two_ion_trap(nu, 0.065)).unwrap();
    assert!(m[[0, 0]].norm() / tau < 1e-12);
    // off-commensurate: the dominant term survives
    let m = displacement_matrix(tau, 1, mu + TWO_PI * 3e3, &two_ion_trap(nu, 0.065)).unwrap();
    assert!(m[[0, 0]].norm() / tau > 1e-4);
}

#[test]
fn halving_segments_adds_columns() {
    let trap = chain_trap(3);
    let (tau, mu) = (20e-6, TWO_PI * 2.93e6);
    let coarse = displacement_matrix(tau, 3, mu, &trap).unwrap();
    let fine = displacement_matrix(tau, 6, mu, &trap).unwrap();
    for l in 0..3 {
        for k in 0..3 {
            let sum = fine[[l, 2 * k]] + fine[[l, 2 * k + 1]];
            assert!((coarse[[l, k]] - sum).norm() < 1e-12 * tau);
        }
    }
}

#[test]
fn chain_closure_is_exact_at_2n_plus_1() {
    let trap = chain_trap(7);
    let (tau, mu) = (35e-6, TWO_PI * 2.89e6);
    let m = displacement_matrix(tau, 15, mu, &trap).unwrap();
    let sol = closure_solve(&m, None).unwrap();
    assert!(!sol.degenerate);
    assert!(closure_residual(&m, &sol.direction, tau) <= 1e-10);
    let norm: f64 = sol.direction.iter().map(|x| x * x).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    assert!(sol.direction.iter().find(|x| x.abs() > 1e-12).unwrap() > &0.0);
    // scaling the amplitudes scales the unnormalized residual
    let raw = |w: &[f64]| closure_residual(&m, w, tau) * w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let doubled: Vec<f64> = sol.direction.iter().map(|x| 3.0 * x).collect();
    assert!((raw(&doubled) - 3.0 * raw(&sol.direction)).abs() <= 1e-15);
}

#[test]
fn extra_segments_flag_degeneracy() {
    let trap = two_ion_trap(TWO_PI * 3e6, 0.065);
    let m = displacement_matrix(30e-6, 5, TWO_PI * 3.1e6, &trap).unwrap();
    assert!(closure_solve(&m, None).unwrap().degenerate);
}

#[test]
fn symmetric_kernel_gives_reversal_symmetric_solution() {
    let nu = TWO_PI * 3.0e6;
    let tau = 20e-6;
    // μτ ∈ 2πℤ makes the closure conditions invariant under time reversal
    let mu = TWO_PI * 3.1e6;
    let trap = two_ion_trap(nu, 0.065);
    let m = displacement_matrix(tau, 3, mu, &trap).unwrap();
    let sol = closure_solve(&m, None).unwrap();
    let rev: Vec<f64> = sol.direction.iter().rev().copied().collect();
    let overlap: f64 = rev.iter().zip(&sol.direction).map(|(a, b)| a * b).sum();
    assert!((overlap.abs() - 1.0).abs() < 1e-9, "overlap {overlap}");
    assert!((closure_residual(&m, &rev, tau) - closure_residual(&m, &sol.direction, tau)).abs() < 1e-12);
}

#[test]
fn phase_kernel_is_symmetric_and_bilinear() {
    let trap = chain_trap(4);
    let g = phase_kernel(30e-6, 5, TWO_PI * 2.95e6, &trap, (1, 2)).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert!((g[[i, j]] - g[[j, i]]).abs() <= 1e-12 * g.iter().map(|x| x.abs()).fold(0.0, f64::max));
        }
    }
    let w = [1e5, -2e5, 3e5, 0.5e5, 1e5];
    let th = geometric_phase(&w, 30e-6, TWO_PI * 2.95e6, &trap, (1, 2)).unwrap();
    let w3: Vec<f64> = w.iter().map(|x| 3.0 * x).collect();
    let th3 = geometric_phase(&w3, 30e-6, TWO_PI * 2.95e6, &trap, (1, 2)).unwrap();
    assert!((th3 - 9.0 * th).abs() < 1e-12 * th3.abs());
    assert_eq!(geometric_phase(&[0.0; 5], 30e-6, TWO_PI * 2.95e6, &trap, (1, 2)).unwrap(), 0.0);
}

#[test]
fn design_hits_target_phase() {
    let trap = chain_trap(7);
    let d = sota_design(35e-6, 15, TWO_PI * 2.89e6, &trap, (2, 3), BELL_PHASE, SotaOptions::default()).unwrap();
    assert!((d.phase.abs() - BELL_PHASE).abs() <= 1e-12);
    assert!(d.residual <= 1e-9);
    let recomputed = geometric_phase(&d.pulse.signed_amplitudes(), 35e-6, TWO_PI * 2.89e6, &trap, (2, 3)).unwrap();
    assert!((recomputed - d.phase).abs() < 1e-12);
    let weighted =
        sota_design(35e-6, 15, TWO_PI * 2.89e6, &trap, (2, 3), BELL_PHASE, SotaOptions { eta_weighted: true }).unwrap();
    assert!(weighted.residual <= 1e-9);
}

#[test]
fn zero_coupling_is_degenerate() {
    let mut trap = two_ion_trap(TWO_PI * 3e6, 0.065);
    trap.mode_matrix = vec![vec![1.0], vec![0.0]];
    let err = sota_design(20e-6, 3, TWO_PI * 3.05e6, &trap, (0, 1), BELL_PHASE, SotaOptions::default()).unwrap_err();
    assert!(matches!(err, Error::DegenerateDesign(_)));
    assert!(sota_design(20e-6, 3, TWO_PI * 3.05e6, &trap, (0, 1), -1.0, SotaOptions::default()).is_err());
}

#[test]
fn linear_theory_simulation_confirms_bell_phase() {
    // With only the first-order sideband terms the Magnus series ends at
    // second order, so the design must produce a Bell state.
    let nu = TWO_PI * 3.0e6;
    let tau = 40e-6;
    let trap = two_ion_trap(nu, 0.05);
    let d = sota_design(tau, 3, nu + TWO_PI * 60e3, &trap, (0, 1), BELL_PHASE, SotaOptions::default()).unwrap();
    let rho0 = initial_state(&CompositeSpace::new(2, vec![10]).unwrap(), &trap, &[0.0]).unwrap();
    let settings = IntegratorSettings {
        expansion: Expansion::Series { order: 1, carrier: false },
        adaptive_fock: false,
        ..Default::default()
    };
    let out = integrate_qme(&rho0, &d.pulse, &trap, &NoiseModel::noiseless(1), &settings).unwrap();
    assert!(out.infidelity < 1e-5, "I = {}", out.infidelity);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn displacement_matches_quadrature(
        nu_mhz in 2.5f64..3.5, mu_mhz in 2.5f64..3.5, tau_us in 2.0f64..12.0, m in 1usize..5,
    ) {
        let trap = two_ion_trap(TWO_PI * nu_mhz * 1e6, 0.065);
        let (tau, mu) = (tau_us * 1e-6, TWO_PI * mu_mhz * 1e6);
        let mat = displacement_matrix(tau, m, mu, &trap).unwrap();
        let h = tau / m as f64;
        for k in 0..m {
            let q = quad_displacement(TWO_PI * nu_mhz * 1e6, mu, k as f64 * h, (k + 1) as f64 * h);
            prop_assert!((mat[[0, k]] - q).norm() <= 1e-10 * tau);
        }
    }

    #[test]
    fn phase_matches_quadrature(
        mu_mhz in 2.8f64..3.2, tau_us in 2.0f64..6.0, w in proptest::collection::vec(-1.0f64..1.0, 1..4),
    ) {
        let trap = chain_trap(3);
        let omega: Vec<f64> = w.iter().map(|x| x * TWO_PI * 200e3).collect();
        let (tau, mu) = (tau_us * 1e-6, TWO_PI * mu_mhz * 1e6);
        let exact = geometric_phase(&omega, tau, mu, &trap, (0, 2)).unwrap();
        let num = quad_phase(&omega, tau, mu, &trap, (0, 2));
        prop_assert!((exact - num).abs() <= 1e-8 * (1.0 + exact.abs()), "{} vs {}", exact, num);
    }
}
