use serde::{Deserialize, Serialize};

use super::chain::TrapConfig;
use crate::error::{invalid, Result};

/// Bichromatic phase for which the beat note `cos(μt + φ)` becomes
/// `sin(μt)`: the spin-dependent force starts from zero at `t = 0`.
pub const SINE_DRIVE_PHASE: f64 = -std::f64::consts::FRAC_PI_2;

/// Piecewise-constant amplitude-modulated Mølmer–Sørensen drive.
///
/// Both targets see the same envelope. Segments flagged in `negative`
/// carry a sign flip of the spin-dependent force (a π shift of the beat
/// note); amplitudes themselves stay non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    /// τ, s
    pub gate_time: f64,
    /// Ω_k, rad/s
    pub amplitudes: Vec<f64>,
    #[serde(default)]
    pub negative: Vec<bool>,
    /// μ, rad/s
    pub detuning: f64,
    /// φ of the first and second target ion.
    pub ion_phases: [f64; 2],
    /// Chain indices (r, s), zero-based.
    pub targets: (usize, usize),
}

impl PulseSequence {
    pub fn new(gate_time: f64, amplitudes: Vec<f64>, detuning: f64, targets: (usize, usize)) -> Result<Self> {
        let negative = vec![false; amplitudes.len()];
        let p = Self { gate_time, amplitudes, negative, detuning, ion_phases: [SINE_DRIVE_PHASE; 2], targets };
        p.validate()?;
        Ok(p)
    }

    /// Builds a pulse from signed amplitudes, moving signs into `negative`.
    pub fn from_signed(gate_time: f64, signed: &[f64], detuning: f64, targets: (usize, usize)) -> Result<Self> {
        let mut p = Self::new(gate_time, signed.iter().map(|x| x.abs()).collect(), detuning, targets)?;
        p.negative = signed.iter().map(|&x| x < 0.0).collect();
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gate_time > 0.0) || !self.gate_time.is_finite() {
            return invalid("gate time must be positive");
        }
        if self.amplitudes.is_empty() {
            return invalid("pulse needs at least one segment");
        }
        if self.amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return invalid("segment amplitudes must be finite and non-negative");
        }
        if !self.negative.is_empty() && self.negative.len() != self.amplitudes.len() {
            return invalid("sign mask length differs from segment count");
        }
        if self.targets.0 == self.targets.1 {
            return invalid("target ions must differ");
        }
        Ok(())
    }

    pub fn n_segments(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn segment_duration(&self) -> f64 {
        self.gate_time / self.n_segments() as f64
    }

    /// `t_k = kτ/m` for `k = 0..=m`.
    pub fn boundaries(&self) -> Vec<f64> {
        let m = self.n_segments();
        (0..=m).map(|k| self.gate_time * k as f64 / m as f64).collect()
    }

    /// Segment holding `t` under the half-open rule `[t_k, t_{k+1})`; times
    /// at or beyond τ fall in the last segment.
    pub fn segment_index(&self, t: f64) -> usize {
        let m = self.n_segments();
        let k = (t / self.segment_duration()).floor();
        if k < 0.0 {
            0
        } else {
            (k as usize).min(m - 1)
        }
    }

    pub fn signed_amplitude(&self, k: usize) -> f64 {
        if self.negative.get(k).copied().unwrap_or(false) {
            -self.amplitudes[k]
        } else {
            self.amplitudes[k]
        }
    }

    pub fn signed_amplitudes(&self) -> Vec<f64> {
        (0..self.n_segments()).map(|k| self.signed_amplitude(k)).collect()
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.amplitudes.iter().copied().fold(0.0, f64::max)
    }

    /// Unsigned amplitude in force at `t`.
    pub fn amplitude_at(&self, t: f64) -> f64 {
        self.amplitudes[self.segment_index(t)]
    }

    /// Beat-note phase `∫₀ᵗ μ_eff dt'` inside segment `segment`.
    pub fn drive_phase(&self, at_coefficient: f64, segment: usize, t: f64) -> f64 {
        let dt = self.segment_duration();
        let mut shift: f64 = self.amplitudes[..segment].iter().map(|a| a * a * dt).sum();
        shift += self.amplitudes[segment].powi(2) * (t - segment as f64 * dt);
        self.detuning * t + at_coefficient * shift
    }
}

/// `μ_eff(t) = μ + κ_AT Ω(t)²`.
pub fn effective_detuning(pulse: &PulseSequence, trap: &TrapConfig, t: f64) -> f64 {
    pulse.detuning + trap.at_coefficient * pulse.amplitude_at(t).powi(2)
}

/// An ion receiving light, with its share of the segment amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenIon {
    pub chain_index: usize,
    /// Ω_j = factor · Ω_k
    pub factor: f64,
    pub phase: f64,
    /// Which target (0 or 1) this ion is, if any.
    pub target: Option<usize>,
}

/// Targets plus, when spillover is on, their nearest neighbours, in chain
/// order.
///
/// A target contributes `asymmetry` to itself and `spillover · asymmetry`
/// to each neighbour. Contributions to the same ion add as amplitudes, so an
/// adjacent target pair also feel each other's spillover. A non-target
/// neighbour takes the phase of the target that illuminates it (the first
/// one, when two do).
pub fn driven_ions(pulse: &PulseSequence, trap: &TrapConfig) -> Result<Vec<DrivenIon>> {
    let (r, s) = pulse.targets;
    let n = trap.n_ions;
    if r >= n || s >= n {
        return invalid(format!("targets ({r}, {s}) outside a {n}-ion chain"));
    }
    let targets = [r, s];
    let mut ions: Vec<DrivenIon> = Vec::new();
    for ion in 0..n {
        let mut factor = 0.0;
        let mut phase = None;
        let mut lit = false;
        let own = targets.iter().position(|&t| t == ion);
        for (w, &t) in targets.iter().enumerate() {
            if t == ion {
                factor += trap.asymmetry[w];
                lit = true;
            } else if trap.spillover_fraction > 0.0 && t.abs_diff(ion) == 1 {
                factor += trap.spillover_fraction * trap.asymmetry[w];
                lit = true;
                phase.get_or_insert(pulse.ion_phases[w]);
            }
        }
        if lit {
            let phase = own.map(|w| pulse.ion_phases[w]).or(phase).unwrap_or(0.0);
            ions.push(DrivenIon { chain_index: ion, factor, phase, target: own });
        }
    }
    Ok(ions)
}

/// Signed amplitude on every ion of the chain during segment `k`.
pub fn drive_pattern(pulse: &PulseSequence, trap: &TrapConfig, k: usize) -> Result<Vec<f64>> {
    if k >= pulse.n_segments() {
        return invalid(format!("segment {k} ≥ {}", pulse.n_segments()));
    }
    let mut out = vec![0.0; trap.n_ions];
    for ion in driven_ions(pulse, trap)? {
        out[ion.chain_index] = ion.factor * pulse.signed_amplitude(k);
    }
    Ok(out)
}
