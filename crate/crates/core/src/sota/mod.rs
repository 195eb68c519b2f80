//! Segmented-pulse baseline: phase-space closure by null-space solve, then
//! scaling to the entangling phase, all within linear (first-sideband) theory.

mod kernels;

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{invalid, Error, Result};
use crate::trap::{PulseSequence, TrapConfig};
use crate::C64;

/// Phase that turns `|00⟩` into a maximally entangled Bell state.
pub const BELL_PHASE: f64 = std::f64::consts::FRAC_PI_4;

/// Linear-theory kernels of a segmented pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureSystem {
    /// `M_{lk} = ∫_{seg k} e^{i(ν_l+δ)t} sin(μt) dt`, modes × segments.
    pub displacement: Array2<C64>,
    /// Symmetric `G` with `Θ = Ωᵀ G Ω`, segments × segments.
    pub phase_kernel: Array2<f64>,
}

fn check(tau: f64, m: usize) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return invalid("gate time must be positive");
    }
    if m == 0 {
        return invalid("need at least one segment");
    }
    Ok(())
}

fn mode_frequencies(trap: &TrapConfig) -> Vec<f64> {
    trap.mode_freqs.iter().map(|nu| nu + trap.drift).collect()
}

/// Per-segment displacement integrals, modes × segments.
pub fn displacement_matrix(tau: f64, m: usize, mu: f64, trap: &TrapConfig) -> Result<Array2<C64>> {
    check(tau, m)?;
    let h = tau / m as f64;
    let freqs = mode_frequencies(trap);
    Ok(Array2::from_shape_fn((freqs.len(), m), |(l, k)| {
        kernels::sideband_integral(freqs[l], mu, k as f64 * h, (k + 1) as f64 * h)
    }))
}

/// Symmetric geometric-phase kernel for targets `(r, s)`:
///
/// ```text
/// Θ = 2 Σ_l η_rl η_sl ∬_{t'>t''} Ω(t')Ω(t'') sin(μt') sin(μt'') sin((ν_l+δ)(t'−t''))
/// ```
///
/// The factor 2 counts both orderings of the two-ion cross term, so
/// `U ∝ exp(iΘ S_r S_s)` and `Θ = π/4` entangles maximally.
pub fn phase_kernel(tau: f64, m: usize, mu: f64, trap: &TrapConfig, targets: (usize, usize)) -> Result<Array2<f64>> {
    check(tau, m)?;
    let (r, s) = targets;
    if r >= trap.n_ions || s >= trap.n_ions || r == s {
        return invalid(format!("targets ({r}, {s}) invalid for {} ions", trap.n_ions));
    }
    let h = tau / m as f64;
    let eta = trap.lamb_dicke_params();
    let freqs = mode_frequencies(trap);
    let mut g = Array2::<f64>::zeros((m, m));
    for (l, &w) in freqs.iter().enumerate() {
        let coupling = 2.0 * eta[r][l] * eta[s][l];
        if coupling == 0.0 {
            continue;
        }
        let seg: Vec<C64> = (0..m)
            .map(|k| kernels::sideband_integral(w, mu, k as f64 * h, (k + 1) as f64 * h))
            .collect();
        for k in 0..m {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            g[[k, k]] += coupling * kernels::triangle_phase_integral(w, mu, a, b);
            for kk in 0..k {
                // t' in segment k, t'' in earlier segment kk; split evenly
                let v = 0.5 * coupling * (seg[k] * seg[kk].conj()).im;
                g[[k, kk]] += v;
                g[[kk, k]] += v;
            }
        }
    }
    Ok(g)
}

pub fn closure_system(tau: f64, m: usize, mu: f64, trap: &TrapConfig, targets: (usize, usize)) -> Result<ClosureSystem> {
    Ok(ClosureSystem {
        displacement: displacement_matrix(tau, m, mu, trap)?,
        phase_kernel: phase_kernel(tau, m, mu, trap, targets)?,
    })
}

/// `Θ(Ω)` for signed segment amplitudes.
pub fn geometric_phase(omega: &[f64], tau: f64, mu: f64, trap: &TrapConfig, targets: (usize, usize)) -> Result<f64> {
    let g = phase_kernel(tau, omega.len(), mu, trap, targets)?;
    Ok(quadratic_form(&g, omega))
}

fn quadratic_form(g: &Array2<f64>, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, xi) in x.iter().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            acc += xi * g[[i, j]] * xj;
        }
    }
    acc
}

/// `‖M Ω‖₂ / (τ ‖Ω‖₂)`: dimensionless closure residual.
pub fn closure_residual(displacement: &Array2<C64>, omega: &[f64], tau: f64) -> f64 {
    let norm = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let r: f64 = displacement
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(omega).map(|(m, w)| m * *w).sum::<C64>().norm_sqr())
        .sum();
    r.sqrt() / (tau * norm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureSolution {
    /// Unit-norm real amplitudes; first nonzero entry positive.
    pub direction: Vec<f64>,
    /// Singular values of the stacked real system, ascending.
    pub singular_values: Vec<f64>,
    /// More than one direction attains the minimum.
    pub degenerate: bool,
}

/// Unit vector minimizing `‖M_R Ω̂‖` where `M_R` stacks `Re M` over `Im M`.
///
/// `weights` optionally scales the rows of mode `l`. Relative singular
/// values below `1e-10` count as zero when deciding degeneracy.
pub fn closure_solve(displacement: &Array2<C64>, weights: Option<&[f64]>) -> Result<ClosureSolution> {
    let (n, m) = displacement.dim();
    if m == 0 {
        return invalid("empty displacement matrix");
    }
    if let Some(w) = weights {
        if w.len() != n {
            return invalid(format!("{} weights for {n} modes", w.len()));
        }
    }
    let scale = displacement.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    // zero-pad to at least m rows so the SVD yields all m right vectors
    let rows = (2 * n).max(m);
    let mut a = DMatrix::<f64>::zeros(rows, m);
    for l in 0..n {
        let w = weights.map_or(1.0, |w| w[l]);
        for k in 0..m {
            let z = displacement[[l, k]] * (w / scale);
            a[(2 * l, k)] = z.re;
            a[(2 * l + 1, k)] = z.im;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::DegenerateDesign("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]).then(i.cmp(&j)));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let top = singular_values.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let smallest = singular_values[0];
    let near = singular_values.iter().filter(|&&s| s - smallest <= 1e-10 * top).count();

    let mut direction: Vec<f64> = v_t.row(order[0]).iter().copied().collect();
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    direction.iter_mut().for_each(|x| *x /= norm);
    if let Some(first) = direction.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            direction.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(ClosureSolution { direction, singular_values, degenerate: near > 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SotaOptions {
    /// Weight each mode's closure rows by the targets' participation
    /// `√(η_rl² + η_sl²)` instead of treating modes equally.
    pub eta_weighted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SotaDesign {
    pub pulse: PulseSequence,
    pub closure: ClosureSolution,
    /// Geometric phase of the scaled pulse; negative on the `|Φ₋⟩`-type branch.
    pub phase: f64,
    /// Closure residual of the scaled pulse.
    pub residual: f64,
}

/// Closure direction scaled so that `|Θ| = theta_target`.
pub fn sota_design(
    tau: f64,
    m: usize,
    mu: f64,
    trap: &TrapConfig,
    targets: (usize, usize),
    theta_target: f64,
    options: SotaOptions,
) -> Result<SotaDesign> {
    if !(theta_target > 0.0) {
        return invalid("target phase must be positive");
    }
    let system = closure_system(tau, m, mu, trap, targets)?;
    let weights = options.eta_weighted.then(|| {
        let eta = trap.lamb_dicke_params();
        (0..trap.n_modes())
            .map(|l| (eta[targets.0][l].powi(2) + eta[targets.1][l].powi(2)).sqrt())
            .collect::<Vec<_>>()
    });
    let closure = closure_solve(&system.displacement, weights.as_deref())?;
    let theta_hat = quadratic_form(&system.phase_kernel, &closure.direction);
    let g_scale = system.phase_kernel.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if theta_hat.abs() <= 1e-14 * g_scale || theta_hat == 0.0 {
        return Err(Error::DegenerateDesign(format!("closure direction carries no phase (Θ = {theta_hat:e})")));
    }
    let c = (theta_target / theta_hat.abs()).sqrt();
    let signed: Vec<f64> = closure.direction.iter().map(|x| c * x).collect();
    let pulse = PulseSequence::from_signed(tau, &signed, mu, targets)?;
    Ok(SotaDesign {
        phase: quadratic_form(&system.phase_kernel, &signed),
        residual: closure_residual(&system.displacement, &signed, tau),
        pulse,
        closure,
    })
}

#[cfg(test)]
mod tests;
