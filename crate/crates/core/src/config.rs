//! On-disk scenario description (TOML) and built-in presets.
//!
//! Frequencies are cyclic and carry an `_hz` suffix in files; they become
//! angular (rad/s) once built. Rates are in 1/s (`_per_s`), times carry
//! `_us` or `_s`. Unknown keys are rejected and errors name the offending
//! key path.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lindblad::{IntegratorSettings, NoiseModel, NoiseSource, SourceFlags};
use crate::optimize::{default_drift_grid, DESettings, FeasibilityProblem};
use crate::trap::{homogeneous_chain, Expansion, PulseSequence, TrapConfig};
use crate::{AMU, TWO_PI};

pub const PRESETS: [&str; 2] = ["yb7", "toy2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub trap: TrapSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub gate: GateSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

/// A homogeneous chain whose transverse spectrum spans `com_freq_hz` down to
/// `lowest_freq_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub n_ions: usize,
    pub com_freq_hz: f64,
    pub lowest_freq_hz: f64,
}

/// Either `chain` or `mode_freqs_hz` + `mode_matrix`; either `delta_k_per_m`
/// or `lamb_dicke_com` (η of the first ion on mode 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub ion_mass_amu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_freqs_hz: Option<Vec<f64>>,
    /// `[ion][mode]` participations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_k_per_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lamb_dicke_com: Option<f64>,
    /// Simulate only these modes (zero-based, all when unset).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<usize>>,
    #[serde(default)]
    pub drift_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_phases_rad: Option<Vec<f64>>,
    #[serde(default)]
    pub cross_kerr_hz: f64,
    #[serde(default = "default_spillover")]
    pub spillover_fraction: f64,
    #[serde(default = "unit_pair")]
    pub asymmetry: [f64; 2],
    #[serde(default)]
    pub at_coefficient_s_per_rad: f64,
    #[serde(default)]
    pub qubit_splitting_hz: f64,
    #[serde(default)]
    pub raman_detuning_hz: f64,
}

fn default_spillover() -> f64 {
    0.02
}

fn unit_pair() -> [f64; 2] {
    [1.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// One rate per chain mode; CoM 100/s, others 10/s when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heating_per_s: Option<Vec<f64>>,
    pub motional_dephasing_per_s: f64,
    pub rayleigh_per_s: f64,
    pub raman_per_s: f64,
    pub intensity_per_s: f64,
    pub enabled: Vec<NoiseSource>,
    pub symmetric_raman: bool,
    pub scatter_targets_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity_reference_hz: Option<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let t = NoiseModel::table1(1);
        Self {
            heating_per_s: None,
            motional_dephasing_per_s: t.motional_dephasing,
            rayleigh_per_s: t.rayleigh,
            raman_per_s: t.raman,
            intensity_per_s: t.intensity,
            enabled: NoiseSource::ALL.to_vec(),
            symmetric_raman: false,
            scatter_targets_only: false,
            intensity_reference_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    /// Zero-based chain indices.
    pub targets: [usize; 2],
    pub gate_time_us: f64,
    pub segments: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_hz: Option<f64>,
    /// Ω_k/2π per segment; a negative entry flips that segment's sign.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes_hz: Option<Vec<f64>>,
    /// Thermal occupation per simulated mode (zero when unset).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<Vec<f64>>,
    /// Initial Fock cutoff per simulated mode (3 when unset).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionName {
    Exact,
    FirstOrder,
    FirstOrderSidebands,
    SecondOrder,
    SecondOrderSidebands,
}

impl From<ExpansionName> for Expansion {
    fn from(e: ExpansionName) -> Self {
        match e {
            ExpansionName::Exact => Expansion::Exact,
            ExpansionName::FirstOrder => Expansion::Series { order: 1, carrier: true },
            ExpansionName::FirstOrderSidebands => Expansion::Series { order: 1, carrier: false },
            ExpansionName::SecondOrder => Expansion::Series { order: 2, carrier: true },
            ExpansionName::SecondOrderSidebands => Expansion::Series { order: 2, carrier: false },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step_s: Option<f64>,
    pub adaptive_fock: bool,
    pub fock_grow_threshold: f64,
    pub fock_shrink_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_cutoffs: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_cutoffs: Option<Vec<usize>>,
    pub trace_tolerance: f64,
    pub positivity_tolerance: f64,
    /// Uniform observable samples over the gate (0 for none).
    pub samples: usize,
    pub expansion: ExpansionName,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorSettings::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step_s: None,
            adaptive_fock: d.adaptive_fock,
            fock_grow_threshold: d.fock_grow_threshold,
            fock_shrink_threshold: d.fock_shrink_threshold,
            min_cutoffs: None,
            max_cutoffs: None,
            trace_tolerance: d.trace_tolerance,
            positivity_tolerance: d.positivity_tolerance,
            samples: 0,
            expansion: ExpansionName::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub max_amplitude_hz: f64,
    pub detuning_min_hz: f64,
    pub detuning_max_hz: f64,
    #[serde(default)]
    pub drift_tolerance_hz: f64,
    /// Uniform δ grid size over `[−δ_tol, δ_tol]`.
    #[serde(default = "default_drift_points")]
    pub drift_points: usize,
    pub target_infidelity: f64,
    /// Descending τ grid for `gate-time`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tau_grid_us: Vec<f64>,
    #[serde(default)]
    pub de: DESettings,
}

fn default_drift_points() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub sample_rate_hz: f64,
    pub width_threshold: f64,
    pub scan_drift_min_hz: f64,
    pub scan_drift_max_hz: f64,
    pub scan_points: usize,
    /// Simulated mode whose trajectory is transformed.
    pub trajectory_mode: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            sample_rate_hz: 10e6,
            width_threshold: crate::spectral::DEFAULT_WIDTH_THRESHOLD,
            scan_drift_min_hz: -5e3,
            scan_drift_max_hz: 5e3,
            scan_points: 21,
            trajectory_mode: 0,
        }
    }
}

/// Bounds and settings of the feasibility search, in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    pub max_amplitude: f64,
    pub detuning_range: (f64, f64),
    pub drift_tolerance: f64,
    pub drift_grid: Vec<f64>,
    pub target_infidelity: f64,
    /// s, descending.
    pub tau_grid: Vec<f64>,
    pub de: DESettings,
}

/// A validated configuration in internal units (rad/s, s).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Restricted to the simulated modes.
    pub trap: TrapConfig,
    pub noise: NoiseModel,
    pub targets: (usize, usize),
    pub gate_time: f64,
    pub n_segments: usize,
    pub detuning: Option<f64>,
    pub pulse: Option<PulseSequence>,
    pub nbar: Vec<f64>,
    pub cutoffs: Vec<usize>,
    pub integrator: IntegratorSettings,
    pub optimizer: Option<OptimizerSettings>,
    pub sample_rate: f64,
    pub width_threshold: f64,
    /// rad/s
    pub scan_drifts: Vec<f64>,
    pub trajectory_mode: usize,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().trim().to_string();
            Error::Config(if path == "." { msg } else { format!("{path}: {msg}") })
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "yb7" => Ok(yb7()),
            "toy2" => Ok(toy2()),
            _ => Err(Error::Config(format!("unknown preset `{name}` (expected one of {PRESETS:?})"))),
        }
    }

    fn build_trap(&self) -> Result<TrapConfig> {
        let t = &self.trap;
        let mass = t.ion_mass_amu * AMU;
        let (freqs, matrix) = match (&t.chain, &t.mode_freqs_hz, &t.mode_matrix) {
            (Some(c), None, None) => {
                let m = homogeneous_chain(c.n_ions, TWO_PI * c.com_freq_hz, TWO_PI * c.lowest_freq_hz)?;
                (m.freqs, m.vectors)
            }
            (None, Some(f), Some(b)) => (f.iter().map(|x| TWO_PI * x).collect(), b.clone()),
            _ => return Err(Error::Config("trap: give either `chain` or both `mode_freqs_hz` and `mode_matrix`".into())),
        };
        let delta_k = match (t.delta_k_per_m, t.lamb_dicke_com) {
            (Some(dk), None) => dk,
            (None, Some(eta)) => {
                let b = matrix.first().and_then(|r| r.first()).map_or(0.0, |b| b.abs());
                if b == 0.0 {
                    return Err(Error::Config("trap.lamb_dicke_com: first ion does not move in mode 0".into()));
                }
                TrapConfig::delta_k_for(mass, freqs[0], b, eta)
            }
            _ => return Err(Error::Config("trap: give exactly one of `delta_k_per_m` and `lamb_dicke_com`".into())),
        };
        let mut trap = TrapConfig::new(mass, freqs, matrix, delta_k)?;
        trap.drift = TWO_PI * t.drift_hz;
        if let Some(p) = &t.mode_phases_rad {
            trap.mode_phases = p.clone();
        }
        trap.cross_kerr = TWO_PI * t.cross_kerr_hz;
        trap.spillover_fraction = t.spillover_fraction;
        trap.asymmetry = t.asymmetry;
        trap.at_coefficient = t.at_coefficient_s_per_rad;
        trap.qubit_splitting = TWO_PI * t.qubit_splitting_hz;
        trap.raman_detuning = TWO_PI * t.raman_detuning_hz;
        trap.validate()?;
        Ok(trap)
    }

    fn build_noise(&self, n_modes: usize) -> Result<NoiseModel> {
        let n = &self.noise;
        let mut model = NoiseModel::table1(n_modes);
        if let Some(h) = &n.heating_per_s {
            if h.len() != n_modes {
                return Err(Error::Config(format!("noise.heating_per_s: {} rates for {n_modes} modes", h.len())));
            }
            model.heating_rates = h.clone();
        }
        model.motional_dephasing = n.motional_dephasing_per_s;
        model.rayleigh = n.rayleigh_per_s;
        model.raman = n.raman_per_s;
        model.intensity = n.intensity_per_s;
        model.enabled = SourceFlags::NONE;
        for &s in &n.enabled {
            model.enabled.set(s, true);
        }
        model.symmetric_raman = n.symmetric_raman;
        model.scatter_targets_only = n.scatter_targets_only;
        model.intensity_reference = n.intensity_reference_hz.map(|f| TWO_PI * f);
        model.validate()?;
        Ok(model)
    }

    /// Converts to internal units and validates every part.
    pub fn build(&self) -> Result<Scenario> {
        let full = self.build_trap()?;
        let noise = self.build_noise(full.n_modes())?;
        let (trap, noise) = match &self.trap.modes {
            Some(m) => (full.with_modes(m)?, noise.with_modes(m)?),
            None => (full, noise),
        };
        let n_modes = trap.n_modes();
        let g = &self.gate;
        let targets = (g.targets[0], g.targets[1]);
        let gate_time = g.gate_time_us * 1e-6;
        let detuning = g.detuning_hz.map(|f| TWO_PI * f);
        let pulse = match &g.amplitudes_hz {
            Some(a) => {
                if a.len() != g.segments {
                    return Err(Error::Config(format!("gate.amplitudes_hz: {} values for {} segments", a.len(), g.segments)));
                }
                let mu = detuning.ok_or_else(|| Error::Config("gate.detuning_hz is required with amplitudes_hz".into()))?;
                let signed: Vec<f64> = a.iter().map(|x| TWO_PI * x).collect();
                Some(PulseSequence::from_signed(gate_time, &signed, mu, targets)?)
            }
            None => None,
        };
        let per_mode = |name: &str, v: &Option<Vec<f64>>| -> Result<Vec<f64>> {
            match v {
                Some(v) if v.len() != n_modes => {
                    Err(Error::Config(format!("gate.{name}: {} values for {n_modes} simulated modes", v.len())))
                }
                Some(v) => Ok(v.clone()),
                None => Ok(vec![0.0; n_modes]),
            }
        };
        let nbar = per_mode("nbar", &g.nbar)?;
        let cutoffs = match &g.cutoffs {
            Some(c) if c.len() != n_modes => {
                return Err(Error::Config(format!("gate.cutoffs: {} values for {n_modes} simulated modes", c.len())))
            }
            Some(c) => c.clone(),
            None => vec![3; n_modes],
        };

        let i = &self.integrator;
        let mut integrator = IntegratorSettings {
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            max_step: i.max_step_s,
            adaptive_fock: i.adaptive_fock,
            fock_grow_threshold: i.fock_grow_threshold,
            fock_shrink_threshold: i.fock_shrink_threshold,
            min_cutoffs: i.min_cutoffs.clone().unwrap_or_default(),
            max_cutoffs: i.max_cutoffs.clone().unwrap_or_default(),
            trace_tolerance: i.trace_tolerance,
            positivity_tolerance: i.positivity_tolerance,
            expansion: i.expansion.into(),
            ..Default::default()
        };
        if i.samples > 0 {
            integrator = integrator.with_uniform_samples(gate_time, i.samples);
        }
        integrator.validate()?;

        let optimizer = match &self.optimizer {
            Some(o) => {
                let tol = TWO_PI * o.drift_tolerance_hz;
                let mut drift_grid = default_drift_grid(tol, o.drift_points);
                if tol > 0.0 && o.drift_points % 2 == 0 {
                    drift_grid.push(0.0);
                    drift_grid.sort_by(f64::total_cmp);
                }
                o.de.validate()?;
                Some(OptimizerSettings {
                    max_amplitude: TWO_PI * o.max_amplitude_hz,
                    detuning_range: (TWO_PI * o.detuning_min_hz, TWO_PI * o.detuning_max_hz),
                    drift_tolerance: tol,
                    drift_grid,
                    target_infidelity: o.target_infidelity,
                    tau_grid: o.tau_grid_us.iter().map(|t| t * 1e-6).collect(),
                    de: o.de.clone(),
                })
            }
            None => None,
        };

        let a = &self.analysis;
        if !(a.scan_drift_min_hz <= a.scan_drift_max_hz) || a.scan_points == 0 {
            return Err(Error::Config("analysis: need scan_drift_min_hz ≤ scan_drift_max_hz and scan_points ≥ 1".into()));
        }
        let scan_drifts = (0..a.scan_points)
            .map(|k| {
                let f = if a.scan_points == 1 { 0.0 } else { k as f64 / (a.scan_points - 1) as f64 };
                TWO_PI * (a.scan_drift_min_hz + f * (a.scan_drift_max_hz - a.scan_drift_min_hz))
            })
            .collect();
        if a.trajectory_mode >= n_modes {
            return Err(Error::Config(format!("analysis.trajectory_mode {} ≥ {n_modes} modes", a.trajectory_mode)));
        }

        let scenario = Scenario {
            trap,
            noise,
            targets,
            gate_time,
            n_segments: g.segments,
            detuning,
            pulse,
            nbar,
            cutoffs,
            integrator,
            optimizer,
            sample_rate: a.sample_rate_hz,
            width_threshold: a.width_threshold,
            scan_drifts,
            trajectory_mode: a.trajectory_mode,
        };
        if scenario.optimizer.is_some() {
            scenario.problem()?.validate()?;
        }
        Ok(scenario)
    }
}

impl Scenario {
    /// The feasibility problem; needs an `[optimizer]` section.
    pub fn problem(&self) -> Result<FeasibilityProblem> {
        let o = self.optimizer.as_ref().ok_or_else(|| Error::Config("missing [optimizer] section".into()))?;
        Ok(FeasibilityProblem {
            trap: self.trap.clone(),
            noise: self.noise.clone(),
            targets: self.targets,
            n_segments: self.n_segments,
            gate_time: self.gate_time,
            max_amplitude: o.max_amplitude,
            detuning_range: o.detuning_range,
            drift_tolerance: o.drift_tolerance,
            target_infidelity: o.target_infidelity,
            drift_grid: o.drift_grid.clone(),
            nbar: self.nbar.clone(),
            cutoffs: self.cutoffs.clone(),
            integrator: self.integrator.clone(),
        })
    }

    /// Evaluation context for an existing pulse: the optimizer problem when
    /// configured, otherwise one whose bounds are taken from the pulse (so the
    /// intensity jump is referenced to the pulse's peak amplitude).
    pub fn problem_for(&self, pulse: &PulseSequence) -> Result<FeasibilityProblem> {
        if self.optimizer.is_some() {
            return Ok(FeasibilityProblem { gate_time: pulse.gate_time, n_segments: pulse.n_segments(), ..self.problem()? });
        }
        let peak = pulse.peak_amplitude();
        let mut noise = self.noise.clone();
        if peak > 0.0 {
            noise.intensity_reference.get_or_insert(peak);
        }
        Ok(FeasibilityProblem {
            trap: self.trap.clone(),
            noise,
            targets: self.targets,
            n_segments: pulse.n_segments(),
            gate_time: pulse.gate_time,
            max_amplitude: peak,
            detuning_range: (pulse.detuning, pulse.detuning),
            drift_tolerance: 0.0,
            target_infidelity: 0.01,
            drift_grid: vec![0.0],
            nbar: self.nbar.clone(),
            cutoffs: self.cutoffs.clone(),
            integrator: self.integrator.clone(),
        })
    }

    /// The configured pulse.
    pub fn pulse(&self) -> Result<&PulseSequence> {
        self.pulse.as_ref().ok_or_else(|| Error::Config("gate.amplitudes_hz is not set".into()))
    }

    /// Detuning from the configuration, required for designs.
    pub fn detuning(&self) -> Result<f64> {
        match self.detuning {
            Some(mu) => Ok(mu),
            None => invalid("gate.detuning_hz is not set"),
        }
    }
}

/// Seven ¹⁷¹Yb⁺ ions, transverse modes from 3.07 MHz (CoM) to 2.96 MHz,
/// η = 0.065 on the CoM mode, default noise rates, targets (2, 3).
fn yb7() -> Config {
    Config {
        trap: TrapSection {
            ion_mass_amu: 171.0,
            chain: Some(ChainSection { n_ions: 7, com_freq_hz: 3.07e6, lowest_freq_hz: 2.96e6 }),
            mode_freqs_hz: None,
            mode_matrix: None,
            delta_k_per_m: None,
            lamb_dicke_com: Some(0.065),
            modes: None,
            drift_hz: 0.0,
            mode_phases_rad: None,
            cross_kerr_hz: 0.0,
            spillover_fraction: default_spillover(),
            asymmetry: unit_pair(),
            at_coefficient_s_per_rad: 0.0,
            qubit_splitting_hz: 0.0,
            raman_detuning_hz: 0.0,
        },
        noise: NoiseSection::default(),
        gate: GateSection {
            targets: [2, 3],
            gate_time_us: 35.0,
            segments: 15,
            detuning_hz: Some(2.89e6),
            amplitudes_hz: None,
            nbar: None,
            cutoffs: None,
        },
        integrator: IntegratorSection::default(),
        optimizer: Some(OptimizerSection {
            max_amplitude_hz: 840e3,
            detuning_min_hz: 2.65e6,
            detuning_max_hz: 3.35e6,
            drift_tolerance_hz: 1.5e3,
            drift_points: default_drift_points(),
            target_infidelity: 0.01,
            tau_grid_us: vec![35.0, 30.0, 25.0],
            de: DESettings::default(),
        }),
        analysis: AnalysisSection::default(),
    }
}

/// Two ions sharing one 10 MHz mode (η = 0.1 per ion), τ = 50 µs, one
/// segment at μ = ν + 1/τ, cutoff 15, noise switched off.
fn toy2() -> Config {
    let b = 0.5f64.sqrt();
    Config {
        trap: TrapSection {
            ion_mass_amu: 171.0,
            chain: None,
            mode_freqs_hz: Some(vec![10e6]),
            mode_matrix: Some(vec![vec![b], vec![b]]),
            delta_k_per_m: None,
            lamb_dicke_com: Some(0.1),
            modes: None,
            drift_hz: 0.0,
            mode_phases_rad: None,
            cross_kerr_hz: 0.0,
            spillover_fraction: 0.0,
            asymmetry: unit_pair(),
            at_coefficient_s_per_rad: 0.0,
            qubit_splitting_hz: 0.0,
            raman_detuning_hz: 0.0,
        },
        noise: NoiseSection { enabled: Vec::new(), ..NoiseSection::default() },
        gate: GateSection {
            targets: [0, 1],
            gate_time_us: 50.0,
            segments: 1,
            detuning_hz: Some(10.02e6),
            amplitudes_hz: None,
            nbar: None,
            cutoffs: Some(vec![15]),
        },
        integrator: IntegratorSection { adaptive_fock: false, ..IntegratorSection::default() },
        optimizer: Some(OptimizerSection {
            max_amplitude_hz: 150e3,
            detuning_min_hz: 10.01e6,
            detuning_max_hz: 10.07e6,
            drift_tolerance_hz: 0.0,
            drift_points: 1,
            target_infidelity: 0.01,
            tau_grid_us: Vec::new(),
            de: DESettings::default(),
        }),
        analysis: AnalysisSection::default(),
    }
}
