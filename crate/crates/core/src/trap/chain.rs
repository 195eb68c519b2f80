use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::{C64, HBAR};

/// Linear Paul trap, transverse modes, and drive imperfections.
///
/// All frequencies are angular (rad/s). `mode_matrix[j][l]` is the
/// participation `b_{jl}` of ion `j` in mode `l`; mode 0 is the
/// centre-of-mass mode and frequencies are listed in descending order.
/// A trap may carry fewer modes than ions when only a subset of modes is
/// simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub n_ions: usize,
    /// kg
    pub ion_mass: f64,
    pub mode_freqs: Vec<f64>,
    pub mode_matrix: Vec<Vec<f64>>,
    /// Raman wave-vector difference, rad/m.
    pub delta_k: f64,
    /// Common offset δ of all mode frequencies.
    pub drift: f64,
    pub mode_phases: Vec<f64>,
    /// χ of the `χ Σ_{l<l'} n_l n_{l'}` coupling.
    pub cross_kerr: f64,
    /// Fraction of a target's Rabi frequency seen by its neighbours.
    pub spillover_fraction: f64,
    /// Rabi-frequency scale of the first and second target ion.
    pub asymmetry: [f64; 2],
    /// Autler–Townes detuning shift per squared Rabi frequency, s/rad.
    pub at_coefficient: f64,
    /// ω0; removed by the rotating frame, kept for the record.
    pub qubit_splitting: f64,
    /// Δ of the Raman beams; enters only through `at_coefficient`.
    pub raman_detuning: f64,
}

impl TrapConfig {
    /// A trap with default imperfections (2 % spillover, symmetric beams,
    /// no drift, cross-Kerr or Autler–Townes shift).
    pub fn new(ion_mass: f64, mode_freqs: Vec<f64>, mode_matrix: Vec<Vec<f64>>, delta_k: f64) -> Result<Self> {
        let cfg = Self {
            n_ions: mode_matrix.len(),
            ion_mass,
            mode_phases: vec![0.0; mode_freqs.len()],
            mode_freqs,
            mode_matrix,
            delta_k,
            drift: 0.0,
            cross_kerr: 0.0,
            spillover_fraction: 0.02,
            asymmetry: [1.0, 1.0],
            at_coefficient: 0.0,
            qubit_splitting: 0.0,
            raman_detuning: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n_modes(&self) -> usize {
        self.mode_freqs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n_modes = self.n_modes();
        if self.n_ions == 0 || n_modes == 0 {
            return invalid("trap needs at least one ion and one mode");
        }
        if self.mode_matrix.len() != self.n_ions || self.mode_matrix.iter().any(|r| r.len() != n_modes) {
            return invalid(format!("mode matrix must be {} × {n_modes}", self.n_ions));
        }
        if self.mode_phases.len() != n_modes {
            return invalid("one mode phase per mode required");
        }
        if !(self.ion_mass > 0.0) {
            return invalid("ion mass must be positive");
        }
        let min_freq = self.mode_freqs.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_freq > 0.0) {
            return invalid("mode frequencies must be positive");
        }
        if self.drift.abs() >= 0.1 * min_freq {
            return invalid(format!("drift {} rad/s is not small against the lowest mode", self.drift));
        }
        for a in 0..n_modes {
            for b in a..n_modes {
                let dot: f64 = self.mode_matrix.iter().map(|r| r[a] * r[b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-10 {
                    return invalid(format!("mode vectors {a} and {b} not orthonormal (overlap {dot})"));
                }
            }
        }
        if self.spillover_fraction < 0.0 || self.asymmetry.iter().any(|&a| a < 0.0) {
            return invalid("spillover and asymmetry must be non-negative");
        }
        Ok(())
    }

    /// Same trap with drift δ.
    pub fn with_drift(&self, drift: f64) -> Self {
        Self { drift, ..self.clone() }
    }

    /// Keeps only the listed modes (in the given order).
    pub fn with_modes(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() || modes.iter().any(|&l| l >= self.n_modes()) {
            return invalid(format!("mode selection {modes:?} invalid for {} modes", self.n_modes()));
        }
        Ok(Self {
            mode_freqs: modes.iter().map(|&l| self.mode_freqs[l]).collect(),
            mode_phases: modes.iter().map(|&l| self.mode_phases[l]).collect(),
            mode_matrix: self.mode_matrix.iter().map(|r| modes.iter().map(|&l| r[l]).collect()).collect(),
            ..self.clone()
        })
    }

    /// `η_{jl} = b_{jl} Δk √(ħ / 2m(ν_l + δ))`, indexed `[ion][mode]`.
    pub fn lamb_dicke_params(&self) -> Vec<Vec<f64>> {
        let scale: Vec<f64> = self
            .mode_freqs
            .iter()
            .map(|&nu| self.delta_k * (HBAR / (2.0 * self.ion_mass * (nu + self.drift))).sqrt())
            .collect();
        self.mode_matrix
            .iter()
            .map(|row| row.iter().zip(&scale).map(|(b, s)| b * s).collect())
            .collect()
    }

    /// Entries `(ion, mode, η²(2n̄+1))` violating the Lamb-Dicke regime,
    /// flagged above 0.1.
    pub fn lamb_dicke_violations(&self, nbar: &[f64]) -> Vec<(usize, usize, f64)> {
        let eta = self.lamb_dicke_params();
        let mut out = Vec::new();
        for (j, row) in eta.iter().enumerate() {
            for (l, &e) in row.iter().enumerate() {
                let v = e * e * (2.0 * nbar.get(l).copied().unwrap_or(0.0) + 1.0);
                if v > 0.1 {
                    out.push((j, l, v));
                }
            }
        }
        out
    }

    /// `e^{−i((ν_l+δ)t + φ_l)}`
    pub fn position_phase(&self, mode: usize, t: f64) -> C64 {
        C64::from_polar(1.0, -((self.mode_freqs[mode] + self.drift) * t + self.mode_phases[mode]))
    }

    /// Wave-vector difference giving `η_{ion,mode} = eta` at zero drift.
    pub fn delta_k_for(ion_mass: f64, mode_freq: f64, participation: f64, eta: f64) -> f64 {
        eta / (participation * (HBAR / (2.0 * ion_mass * mode_freq)).sqrt())
    }
}

/// Transverse normal modes of a Coulomb crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModes {
    /// rad/s, descending (centre of mass first)
    pub freqs: Vec<f64>,
    /// `[ion][mode]`
    pub vectors: Vec<Vec<f64>>,
    /// Dimensionless equilibrium positions.
    pub positions: Vec<f64>,
}

/// Equilibrium positions of `n` ions in a harmonic axial well, in units of
/// the length scale `(e²/4πε₀ m ω_z²)^{1/3}`.
fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let spacing = 2.018 / (n as f64).powf(0.559);
    let mut u = DVector::from_fn(n, |m, _| (m as f64 - (n as f64 - 1.0) / 2.0) * spacing);
    for _ in 0..100 {
        let mut f = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, n);
        for m in 0..n {
            f[m] = u[m];
            jac[(m, m)] = 1.0;
            for p in 0..n {
                if p == m {
                    continue;
                }
                let d = u[m] - u[p];
                f[m] -= d.signum() / (d * d);
                let k = 2.0 / d.abs().powi(3);
                jac[(m, m)] += k;
                jac[(m, p)] -= k;
            }
        }
        let step = jac
            .lu()
            .solve(&f)
            .ok_or_else(|| crate::Error::InvalidArgument("singular chain Jacobian".into()))?;
        u -= &step;
        if step.amax() < 1e-14 {
            return Ok(u.iter().copied().collect());
        }
    }
    invalid("ion equilibrium did not converge")
}

/// Transverse modes of a homogeneous `n`-ion chain whose spectrum runs from
/// `com_freq` (centre of mass) down to `lowest_freq`, both rad/s.
pub fn homogeneous_chain(n: usize, com_freq: f64, lowest_freq: f64) -> Result<ChainModes> {
    if n == 0 {
        return invalid("chain needs at least one ion");
    }
    if n > 1 && !(lowest_freq < com_freq && lowest_freq > 0.0) {
        return invalid("lowest mode must lie below the centre-of-mass mode");
    }
    let u = equilibrium_positions(n)?;
    // Coulomb part of the transverse Hessian; its eigenvalues are ≤ 0 with
    // the centre-of-mass eigenvalue exactly 0.
    let mut k = DMatrix::<f64>::zeros(n, n);
    for m in 0..n {
        for p in 0..n {
            if m != p {
                let c = 1.0 / (u[m] - u[p]).abs().powi(3);
                k[(m, p)] = c;
                k[(m, m)] -= c;
            }
        }
    }
    let eig = k.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let kappa_min = eig.eigenvalues[order[n - 1]];
    let omega_z_sq = if n > 1 { (lowest_freq.powi(2) - com_freq.powi(2)) / kappa_min } else { 0.0 };

    let freqs = order
        .iter()
        .map(|&i| (com_freq.powi(2) + omega_z_sq * eig.eigenvalues[i].min(0.0)).sqrt())
        .collect();
    let mut vectors = vec![vec![0.0; n]; n];
    for (l, &i) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        let first = col.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
        let sign = first.signum();
        for j in 0..n {
            vectors[j][l] = sign * col[j];
        }
    }
    Ok(ChainModes { freqs, vectors, positions: u })
}
