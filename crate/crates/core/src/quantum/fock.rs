use ndarray::Array2;

use crate::error::{invalid, Result};
use crate::{CMatrix, C64};

/// Single-qubit operators in the `|0⟩, |1⟩` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitOperators {
    /// `|1⟩⟨0|`
    pub sigma_plus: CMatrix,
    /// `|0⟩⟨1|`
    pub sigma_minus: CMatrix,
    /// `diag(−1, +1)`
    pub sigma_z: CMatrix,
    pub identity: CMatrix,
}

pub fn qubit_operators() -> QubitOperators {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    QubitOperators {
        sigma_plus: ndarray::arr2(&[[z, z], [o, z]]),
        sigma_minus: ndarray::arr2(&[[z, o], [z, z]]),
        sigma_z: ndarray::arr2(&[[-o, z], [z, o]]),
        identity: ndarray::arr2(&[[o, z], [z, o]]),
    }
}

/// Truncated annihilation operator, `⟨n−1|a|n⟩ = √n`.
pub fn ladder_operator(cutoff: usize) -> Result<CMatrix> {
    if cutoff < 2 {
        return invalid(format!("Fock cutoff {cutoff} < 2"));
    }
    let mut a = Array2::zeros((cutoff, cutoff));
    for n in 1..cutoff {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn number_operator(cutoff: usize) -> Result<CMatrix> {
    if cutoff < 2 {
        return invalid(format!("Fock cutoff {cutoff} < 2"));
    }
    Ok(Array2::from_diag(&ndarray::Array1::from_iter(
        (0..cutoff).map(|n| C64::new(n as f64, 0.0)),
    )))
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Generalized Laguerre polynomials `L_n^{(k)}(x)` for `n = 0..count`.
fn laguerre_column(k: usize, x: f64, count: usize) -> Vec<f64> {
    let k = k as f64;
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    out.push(1.0 + k - x);
    for i in 1..count - 1 {
        let fi = i as f64;
        let next = ((2.0 * fi + 1.0 + k - x) * out[i] - (fi + k) * out[i - 1]) / (fi + 1.0);
        out.push(next);
    }
    out
}

/// Fock-basis matrix of `D(α) = exp(α a† − α* a)` restricted to the first
/// `cutoff` levels.
///
/// Entries use the closed form in associated Laguerre polynomials, so the
/// truncated matrix is the exact restriction of the infinite operator rather
/// than the exponential of a truncated generator.
pub fn displacement_operator(alpha: C64, cutoff: usize) -> Result<CMatrix> {
    if cutoff < 2 {
        return invalid(format!("Fock cutoff {cutoff} < 2"));
    }
    let x = alpha.norm_sqr();
    let envelope = (-0.5 * x).exp();
    let lnf: Vec<f64> = (0..cutoff).map(ln_factorial).collect();
    let mut d = Array2::zeros((cutoff, cutoff));
    let minus_conj = -alpha.conj();
    for k in 0..cutoff {
        // L_n^{(k)} for every n with n + k < cutoff
        let lag = laguerre_column(k, x, cutoff - k);
        let alpha_k = alpha.powu(k as u32);
        let conj_k = minus_conj.powu(k as u32);
        for (n, &l) in lag.iter().enumerate() {
            let m = n + k;
            let ratio = (0.5 * (lnf[n] - lnf[m])).exp() * envelope * l;
            d[[m, n]] = alpha_k * ratio;
            if k > 0 {
                d[[n, m]] = conj_k * ratio;
            }
        }
    }
    Ok(d)
}

/// Bose–Einstein populations `n̄ⁿ/(1+n̄)ⁿ⁺¹` renormalized over `cutoff` levels.
pub fn thermal_populations(nbar: f64, cutoff: usize) -> Result<Vec<f64>> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return invalid(format!("mean phonon number {nbar} must be finite and ≥ 0"));
    }
    if cutoff < 2 {
        return invalid(format!("Fock cutoff {cutoff} < 2"));
    }
    let ratio = nbar / (1.0 + nbar);
    let mut p: Vec<f64> = (0..cutoff).map(|n| ratio.powi(n as i32) / (1.0 + nbar)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}
