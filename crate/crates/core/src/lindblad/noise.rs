use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{embed_sparse, ladder_operator, number_operator, qubit_operators, Slot, SparseOperator};
use crate::trap::GateHamiltonian;
use crate::{CMatrix, C64};

/// The five noise channels of a linear Paul trap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseSource {
    Heating,
    MotionalDephasing,
    Rayleigh,
    Raman,
    Intensity,
}

impl NoiseSource {
    pub const ALL: [NoiseSource; 5] = [
        NoiseSource::Heating,
        NoiseSource::MotionalDephasing,
        NoiseSource::Rayleigh,
        NoiseSource::Raman,
        NoiseSource::Intensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseSource::Heating => "heating",
            NoiseSource::MotionalDephasing => "motional-dephasing",
            NoiseSource::Rayleigh => "rayleigh",
            NoiseSource::Raman => "raman",
            NoiseSource::Intensity => "intensity",
        }
    }
}

impl fmt::Display for NoiseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseSource::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown noise source `{s}`")))
    }
}

/// Which sources contribute jump operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceFlags {
    pub heating: bool,
    pub motional_dephasing: bool,
    pub rayleigh: bool,
    pub raman: bool,
    pub intensity: bool,
}

impl SourceFlags {
    pub const ALL: SourceFlags =
        SourceFlags { heating: true, motional_dephasing: true, rayleigh: true, raman: true, intensity: true };
    pub const NONE: SourceFlags =
        SourceFlags { heating: false, motional_dephasing: false, rayleigh: false, raman: false, intensity: false };

    pub fn get(&self, source: NoiseSource) -> bool {
        match source {
            NoiseSource::Heating => self.heating,
            NoiseSource::MotionalDephasing => self.motional_dephasing,
            NoiseSource::Rayleigh => self.rayleigh,
            NoiseSource::Raman => self.raman,
            NoiseSource::Intensity => self.intensity,
        }
    }

    pub fn set(&mut self, source: NoiseSource, on: bool) {
        let slot = match source {
            NoiseSource::Heating => &mut self.heating,
            NoiseSource::MotionalDephasing => &mut self.motional_dephasing,
            NoiseSource::Rayleigh => &mut self.rayleigh,
            NoiseSource::Raman => &mut self.raman,
            NoiseSource::Intensity => &mut self.intensity,
        };
        *slot = on;
    }
}

/// Decoherence rates in 1/s, with per-source switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Γ_l per simulated mode.
    pub heating_rates: Vec<f64>,
    pub motional_dephasing: f64,
    pub rayleigh: f64,
    pub raman: f64,
    pub intensity: f64,
    pub enabled: SourceFlags,
    /// Add a `σ⁻` partner to every Raman jump.
    #[serde(default)]
    pub symmetric_raman: bool,
    /// Scatter only on the two target ions instead of every simulated ion.
    #[serde(default)]
    pub scatter_targets_only: bool,
    /// Ω_ref for the intensity jump; the pulse's peak amplitude when unset.
    #[serde(default)]
    pub intensity_reference: Option<f64>,
}

impl NoiseModel {
    /// Linear Paul trap defaults: CoM heating 100/s, other modes 10/s,
    /// Γ_MC = 27.7/s, Γ_EL = 1.5e-3/s, Γ_R = 30/s, Γ_P = 70/s.
    ///
    /// Mode 0 is taken to be the centre-of-mass mode.
    pub fn table1(n_modes: usize) -> Self {
        let heating_rates = (0..n_modes).map(|l| if l == 0 { 100.0 } else { 10.0 }).collect();
        Self {
            heating_rates,
            motional_dephasing: 27.7,
            rayleigh: 1.5e-3,
            raman: 30.0,
            intensity: 70.0,
            enabled: SourceFlags::ALL,
            symmetric_raman: false,
            scatter_targets_only: false,
            intensity_reference: None,
        }
    }

    /// Default rates with every source switched off.
    pub fn noiseless(n_modes: usize) -> Self {
        Self { enabled: SourceFlags::NONE, ..Self::table1(n_modes) }
    }

    /// Only `source` enabled.
    pub fn only(&self, source: NoiseSource) -> Self {
        let mut out = self.clone();
        out.enabled = SourceFlags::NONE;
        out.enabled.set(source, true);
        out
    }

    /// `source` switched off, others unchanged.
    pub fn without(&self, source: NoiseSource) -> Self {
        let mut out = self.clone();
        out.enabled.set(source, false);
        out
    }

    /// Same model restricted to a subset of the modes (indices into
    /// `heating_rates`).
    pub fn with_modes(&self, modes: &[usize]) -> Result<Self> {
        let mut rates = Vec::with_capacity(modes.len());
        for &l in modes {
            match self.heating_rates.get(l) {
                Some(&r) => rates.push(r),
                None => return invalid(format!("mode {l} has no heating rate")),
            }
        }
        Ok(Self { heating_rates: rates, ..self.clone() })
    }

    /// Sources that are both enabled and carry a nonzero rate.
    pub fn active_sources(&self) -> Vec<NoiseSource> {
        NoiseSource::ALL
            .into_iter()
            .filter(|&s| {
                self.enabled.get(s)
                    && match s {
                        NoiseSource::Heating => self.heating_rates.iter().any(|&r| r > 0.0),
                        NoiseSource::MotionalDephasing => self.motional_dephasing > 0.0,
                        NoiseSource::Rayleigh => self.rayleigh > 0.0,
                        NoiseSource::Raman => self.raman > 0.0,
                        NoiseSource::Intensity => self.intensity > 0.0,
                    }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let rates = self
            .heating_rates
            .iter()
            .chain([&self.motional_dephasing, &self.rayleigh, &self.raman, &self.intensity]);
        for &r in rates {
            if !(r >= 0.0) || !r.is_finite() {
                return invalid(format!("noise rate {r} must be finite and non-negative"));
            }
        }
        if let Some(w) = self.intensity_reference {
            if !(w > 0.0) {
                return invalid(format!("intensity reference {w} must be positive"));
            }
        }
        Ok(())
    }
}

/// A jump operator, fixed or proportional to the drive Hamiltonian.
#[derive(Debug, Clone)]
pub enum JumpOperator {
    /// Includes the square root of its rate.
    Static(SparseOperator),
    /// `scale · H_drive(t)`.
    Drive { scale: f64 },
}

#[derive(Debug, Clone)]
pub struct Jump {
    pub source: NoiseSource,
    pub label: String,
    pub operator: JumpOperator,
}

impl Jump {
    /// Dense matrix of the jump at time `t` in `segment`.
    pub fn matrix_at(&self, hamiltonian: &GateHamiltonian, segment: usize, t: f64) -> CMatrix {
        match &self.operator {
            JumpOperator::Static(op) => op.to_dense(),
            JumpOperator::Drive { scale } => {
                let d = hamiltonian.space().dimension();
                let frame = hamiltonian.frame(segment, t);
                let mut h = CMatrix::zeros((d, d));
                hamiltonian.apply_drive(&frame, &crate::quantum::identity(d), C64::new(*scale, 0.0), &mut h);
                h
            }
        }
    }
}

/// Jump operators for `noise` on the space of `hamiltonian`.
///
/// The intensity jump is `√Γ_P · H_drive(t)/Ω_ref`: the drive part only,
/// made dimensionless by the reference Rabi frequency.
pub fn build_jump_operators(noise: &NoiseModel, hamiltonian: &GateHamiltonian) -> Result<Vec<Jump>> {
    noise.validate()?;
    let space = hamiltonian.space();
    if noise.heating_rates.len() != space.n_modes() {
        return invalid(format!(
            "{} heating rates for {} modes",
            noise.heating_rates.len(),
            space.n_modes()
        ));
    }
    let on = |s: NoiseSource| noise.enabled.get(s);
    let mut jumps = Vec::new();
    let mut push = |source, label: String, op: &CMatrix, slot, rate: f64| -> Result<()> {
        if rate > 0.0 {
            let op = embed_sparse(op, slot, space)?.scaled(C64::new(rate.sqrt(), 0.0));
            jumps.push(Jump { source, label, operator: JumpOperator::Static(op) });
        }
        Ok(())
    };

    for (l, &cutoff) in space.fock_cutoffs().iter().enumerate() {
        if on(NoiseSource::Heating) {
            let a = ladder_operator(cutoff)?;
            let rate = noise.heating_rates[l];
            push(NoiseSource::Heating, format!("a_{l}"), &a, Slot::Mode(l), rate)?;
            push(NoiseSource::Heating, format!("a+_{l}"), &crate::quantum::dagger(&a), Slot::Mode(l), rate)?;
        }
    }
    for (l, &cutoff) in space.fock_cutoffs().iter().enumerate() {
        if on(NoiseSource::MotionalDephasing) {
            let rate = noise.motional_dephasing / std::f64::consts::PI;
            push(NoiseSource::MotionalDephasing, format!("n_{l}"), &number_operator(cutoff)?, Slot::Mode(l), rate)?;
        }
    }

    let q = qubit_operators();
    let half_z = q.sigma_z.mapv(|z| z * 0.5);
    let scattered: Vec<usize> = hamiltonian
        .ions()
        .iter()
        .enumerate()
        .filter(|(_, ion)| !noise.scatter_targets_only || ion.target.is_some())
        .map(|(j, _)| j)
        .collect();
    for &j in &scattered {
        if on(NoiseSource::Rayleigh) {
            push(NoiseSource::Rayleigh, format!("sz/2_{j}"), &half_z, Slot::Qubit(j), noise.rayleigh)?;
        }
    }
    for &j in &scattered {
        if on(NoiseSource::Raman) {
            push(NoiseSource::Raman, format!("s+_{j}"), &q.sigma_plus, Slot::Qubit(j), noise.raman)?;
            if noise.symmetric_raman {
                push(NoiseSource::Raman, format!("s-_{j}"), &q.sigma_minus, Slot::Qubit(j), noise.raman)?;
            }
        }
    }

    if on(NoiseSource::Intensity) && noise.intensity > 0.0 {
        let reference = noise.intensity_reference.unwrap_or_else(|| hamiltonian.pulse().peak_amplitude());
        if reference > 0.0 {
            jumps.push(Jump {
                source: NoiseSource::Intensity,
                label: "H".into(),
                operator: JumpOperator::Drive { scale: noise.intensity.sqrt() / reference },
            });
        }
    }
    Ok(jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::{Expansion, PulseSequence, TrapConfig};
    use crate::{AMU, TWO_PI};

    fn hamiltonian() -> GateHamiltonian {
        let b = 0.5f64.sqrt();
        let mut trap = TrapConfig::new(
            171.0 * AMU,
            vec![TWO_PI * 3e6, TWO_PI * 2.9e6],
            vec![vec![b, b], vec![b, -b]],
            2e7,
        )
        .unwrap();
        trap.spillover_fraction = 0.0;
        let pulse = PulseSequence::new(50e-6, vec![TWO_PI * 50e3], TWO_PI * 3.02e6, (0, 1)).unwrap();
        GateHamiltonian::new(&trap, &pulse, &[4, 4], Expansion::Exact).unwrap()
    }

    #[test]
    fn default_jump_count() {
        let jumps = build_jump_operators(&NoiseModel::table1(2), &hamiltonian()).unwrap();
        assert_eq!(jumps.len(), 11);
        let count = |s| jumps.iter().filter(|j| j.source == s).count();
        assert_eq!(count(NoiseSource::Heating), 4);
        assert_eq!(count(NoiseSource::MotionalDephasing), 2);
        assert_eq!(count(NoiseSource::Rayleigh), 2);
        assert_eq!(count(NoiseSource::Raman), 2);
        assert_eq!(count(NoiseSource::Intensity), 1);
    }

    #[test]
    fn all_off_is_empty() {
        assert!(build_jump_operators(&NoiseModel::noiseless(2), &hamiltonian()).unwrap().is_empty());
    }

    #[test]
    fn dephasing_prefactor() {
        let h = hamiltonian();
        let jumps = build_jump_operators(&NoiseModel::table1(2).only(NoiseSource::MotionalDephasing), &h).unwrap();
        let JumpOperator::Static(op) = &jumps[0].operator else { panic!() };
        // |q=00, n0=1, n1=0⟩ has index 4
        let m = op.to_dense();
        assert!((m[[4, 4]].re - (27.7 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn flags_and_variants() {
        let h = hamiltonian();
        let mut noise = NoiseModel::table1(2).only(NoiseSource::Raman);
        assert_eq!(build_jump_operators(&noise, &h).unwrap().len(), 2);
        noise.symmetric_raman = true;
        assert_eq!(build_jump_operators(&noise, &h).unwrap().len(), 4);
        noise.raman = 0.0;
        assert!(build_jump_operators(&noise, &h).unwrap().is_empty());
        assert!(noise.active_sources().is_empty());

        let bad = NoiseModel { rayleigh: -1.0, ..NoiseModel::table1(2) };
        assert!(build_jump_operators(&bad, &h).is_err());
        assert!(build_jump_operators(&NoiseModel::table1(3), &h).is_err());
        assert_eq!("motional-dephasing".parse::<NoiseSource>().unwrap(), NoiseSource::MotionalDephasing);
        assert!("laser".parse::<NoiseSource>().is_err());
    }

    #[test]
    fn intensity_jump_scales_drive() {
        let h = hamiltonian();
        let noise = NoiseModel::table1(2).only(NoiseSource::Intensity);
        let jumps = build_jump_operators(&noise, &h).unwrap();
        let m = jumps[0].matrix_at(&h, 0, 7e-6);
        let expect = h.dense(0, 7e-6).mapv(|z| z * 70f64.sqrt() / (TWO_PI * 50e3));
        assert!(crate::quantum::max_abs_diff(&m, &expect) < 1e-12);
    }
}
