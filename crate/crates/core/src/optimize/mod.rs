//! Robust-gate feasibility search: differential evolution over segment
//! amplitudes and detuning, scored by the worst infidelity over drift.

mod de;

use serde::{Deserialize, Serialize};

pub use de::{minimize, DEOutcome, DESettings, GenerationRecord, StopReason};

use crate::error::{invalid, Result};
use crate::lindblad::{initial_state, integrate_qme, GateResult, IntegrationStats, IntegratorSettings, NoiseModel};
use crate::quantum::CompositeSpace;
use crate::trap::{driven_ions, PulseSequence, TrapConfig};

/// Infidelity charged when the integrator fails.
pub const FAILURE_PENALTY: f64 = 1.0;

/// `n` uniform drift values over `[−tol, tol]` (just `[0]` when `tol = 0`).
/// Odd `n` includes zero.
pub fn default_drift_grid(tol: f64, n: usize) -> Vec<f64> {
    if tol == 0.0 || n < 2 {
        return vec![0.0];
    }
    (0..n).map(|k| -tol + 2.0 * tol * k as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityProblem {
    pub trap: TrapConfig,
    pub noise: NoiseModel,
    /// Chain indices (r, s).
    pub targets: (usize, usize),
    pub n_segments: usize,
    /// τ, s
    pub gate_time: f64,
    /// Ω_max, rad/s
    pub max_amplitude: f64,
    /// [μ_min, μ_max], rad/s
    pub detuning_range: (f64, f64),
    /// δ_tol, rad/s
    pub drift_tolerance: f64,
    /// I_◎
    pub target_infidelity: f64,
    /// δ values, rad/s
    pub drift_grid: Vec<f64>,
    /// Thermal occupation per mode.
    pub nbar: Vec<f64>,
    /// Initial Fock cutoff per mode.
    pub cutoffs: Vec<usize>,
    pub integrator: IntegratorSettings,
}

impl FeasibilityProblem {
    pub fn validate(&self) -> Result<()> {
        self.trap.validate()?;
        self.noise.validate()?;
        self.integrator.validate()?;
        let (lo, hi) = self.detuning_range;
        if !(lo < hi) {
            return invalid("μ_min must lie below μ_max");
        }
        if self.n_segments == 0 || !(self.gate_time > 0.0) || !(self.max_amplitude > 0.0) {
            return invalid("segments, gate time and Ω_max must be positive");
        }
        if !(self.target_infidelity > 0.0 && self.target_infidelity < 1.0) {
            return invalid("I_◎ must lie in (0, 1)");
        }
        if self.drift_tolerance < 0.0 {
            return invalid("δ_tol must be non-negative");
        }
        let has = |v: f64| self.drift_grid.iter().any(|&d| (d - v).abs() <= 1e-9 * self.drift_tolerance.max(1.0));
        if !has(0.0) || !has(self.drift_tolerance) || !has(-self.drift_tolerance) {
            return invalid("δ grid must contain −δ_tol, 0 and +δ_tol");
        }
        if self.nbar.len() != self.trap.n_modes() || self.cutoffs.len() != self.trap.n_modes() {
            return invalid("nbar and cutoffs need one entry per mode");
        }
        if self.noise.heating_rates.len() != self.trap.n_modes() {
            return invalid("noise model needs one heating rate per mode");
        }
        Ok(())
    }

    /// Search-space dimension: amplitudes (half of them when symmetric) plus μ.
    pub fn dimension(&self, symmetric: bool) -> usize {
        self.free_amplitudes(symmetric) + 1
    }

    fn free_amplitudes(&self, symmetric: bool) -> usize {
        if symmetric {
            self.n_segments.div_ceil(2)
        } else {
            self.n_segments
        }
    }

    pub fn bounds(&self, symmetric: bool) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, self.max_amplitude); self.free_amplitudes(symmetric)];
        b.push(self.detuning_range);
        b
    }

    pub fn decode(&self, x: &[f64], symmetric: bool) -> Candidate {
        let k = self.free_amplitudes(symmetric);
        let amplitudes = if symmetric {
            (0..self.n_segments).map(|i| x[i.min(self.n_segments - 1 - i)]).collect()
        } else {
            x[..k].to_vec()
        };
        Candidate { amplitudes, detuning: x[k] }
    }

    pub fn encode(&self, c: &Candidate, symmetric: bool) -> Vec<f64> {
        let mut x: Vec<f64> = c.amplitudes[..self.free_amplitudes(symmetric)].to_vec();
        x.push(c.detuning);
        x
    }

    /// Noise used for evaluation: the intensity jump is referenced to Ω_max
    /// unless set explicitly.
    pub fn evaluation_noise(&self) -> NoiseModel {
        let mut n = self.noise.clone();
        n.intensity_reference.get_or_insert(self.max_amplitude);
        n
    }

    pub fn with_gate_time(&self, gate_time: f64) -> Self {
        Self { gate_time, ..self.clone() }
    }
}

/// Amplitudes and detuning of one pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Ω_k, rad/s
    pub amplitudes: Vec<f64>,
    /// μ, rad/s
    pub detuning: f64,
}

impl Candidate {
    pub fn in_bounds(&self, problem: &FeasibilityProblem) -> bool {
        let (lo, hi) = problem.detuning_range;
        self.amplitudes.len() == problem.n_segments
            && self.amplitudes.iter().all(|&a| (0.0..=problem.max_amplitude).contains(&a))
            && (lo..=hi).contains(&self.detuning)
    }

    pub fn to_pulse(&self, problem: &FeasibilityProblem) -> Result<PulseSequence> {
        PulseSequence::new(problem.gate_time, self.amplitudes.clone(), self.detuning, problem.targets)
    }
}

/// Infidelity at one drift value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftPoint {
    pub drift: f64,
    pub infidelity: f64,
    /// Integrator error, if the point was charged the penalty.
    pub failure: Option<String>,
    #[serde(skip)]
    pub stats: Option<IntegrationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationResult {
    pub worst_infidelity: f64,
    pub curve: Vec<DriftPoint>,
    pub feasible: bool,
}

/// Full-QME infidelity of `pulse` at each drift, using the problem's trap,
/// noise, thermal state and integrator.
pub fn drift_curve(pulse: &PulseSequence, problem: &FeasibilityProblem, drifts: &[f64]) -> Result<Vec<DriftPoint>> {
    let ctx = DriftContext::new(pulse, problem)?;
    drifts.iter().map(|&d| ctx.point(d)).collect()
}

/// What every drift point of one pulse shares.
pub(crate) struct DriftContext<'a> {
    pulse: &'a PulseSequence,
    problem: &'a FeasibilityProblem,
    space: CompositeSpace,
    noise: NoiseModel,
}

impl<'a> DriftContext<'a> {
    pub(crate) fn new(pulse: &'a PulseSequence, problem: &'a FeasibilityProblem) -> Result<Self> {
        Self::with_noise(pulse, problem, problem.evaluation_noise())
    }

    pub(crate) fn with_noise(pulse: &'a PulseSequence, problem: &'a FeasibilityProblem, noise: NoiseModel) -> Result<Self> {
        let n_qubits = driven_ions(pulse, &problem.trap)?.len();
        let space = CompositeSpace::new(n_qubits, problem.cutoffs.clone())?;
        Ok(Self { pulse, problem, space, noise })
    }

    pub(crate) fn gate(&self, drift: f64) -> Result<GateResult> {
        let trap = self.problem.trap.with_drift(drift);
        let rho0 = initial_state(&self.space, &trap, &self.problem.nbar)?;
        integrate_qme(&rho0, self.pulse, &trap, &self.noise, &self.problem.integrator)
    }

    pub(crate) fn point(&self, drift: f64) -> Result<DriftPoint> {
        // an out-of-range drift is a caller error, not a failed candidate
        self.problem.trap.with_drift(drift).validate()?;
        Ok(match self.gate(drift) {
            Ok(r) => DriftPoint { drift, infidelity: r.infidelity, failure: None, stats: Some(r.stats) },
            Err(e) => DriftPoint { drift, infidelity: FAILURE_PENALTY, failure: Some(e.to_string()), stats: None },
        })
    }
}

/// Worst-case infidelity of `candidate` over the problem's drift grid.
pub fn evaluate(candidate: &Candidate, problem: &FeasibilityProblem) -> Result<EvaluationResult> {
    if !candidate.in_bounds(problem) {
        return invalid("candidate outside the search box");
    }
    let curve = drift_curve(&candidate.to_pulse(problem)?, problem, &problem.drift_grid)?;
    let worst = curve.iter().map(|p| p.infidelity).fold(0.0, f64::max);
    Ok(EvaluationResult { worst_infidelity: worst, feasible: worst <= problem.target_infidelity, curve })
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best: Candidate,
    pub evaluation: EvaluationResult,
    pub feasible: bool,
    pub history: Vec<GenerationRecord>,
    pub generation_seconds: Vec<f64>,
    pub evaluations: usize,
    pub stop: StopReason,
}

/// DE search for a feasible candidate; stops at the first feasible best.
/// `warm_start` seeds population member 0.
pub fn differential_evolution(
    problem: &FeasibilityProblem,
    settings: &DESettings,
    warm_start: Option<&Candidate>,
) -> Result<OptimizationResult> {
    problem.validate()?;
    let sym = settings.symmetric;
    let objective = |x: &[f64]| {
        let c = problem.decode(x, sym);
        match evaluate(&c, problem) {
            Ok(r) => (r.worst_infidelity, Some(r)),
            Err(_) => (FAILURE_PENALTY, None),
        }
    };
    let initial: Vec<Vec<f64>> = warm_start
        .filter(|c| c.amplitudes.len() == problem.n_segments)
        .map(|c| problem.encode(c, sym))
        .into_iter()
        .collect();
    let out = minimize(objective, &problem.bounds(sym), settings, Some(problem.target_infidelity), &initial)?;
    let best = problem.decode(&out.best, sym);
    let evaluation = match out.best_data {
        Some(r) => r,
        None => evaluate(&best, problem)?,
    };
    Ok(OptimizationResult {
        feasible: evaluation.feasible,
        best,
        evaluation,
        history: out.history,
        generation_seconds: out.generation_seconds,
        evaluations: out.evaluations,
        stop: out.stop,
    })
}

#[derive(Debug, Clone)]
pub struct GateTimeEntry {
    pub gate_time: f64,
    pub result: OptimizationResult,
}

#[derive(Debug, Clone)]
pub struct GateTimeScan {
    /// One entry per τ, in grid order.
    pub entries: Vec<GateTimeEntry>,
}

impl GateTimeScan {
    /// Shortest τ with a feasible candidate.
    pub fn shortest(&self) -> Option<&GateTimeEntry> {
        self.entries
            .iter()
            .filter(|e| e.result.feasible)
            .min_by(|a, b| a.gate_time.total_cmp(&b.gate_time))
    }
}

/// Runs the feasibility search for each τ of a descending grid, warm-starting
/// from the previous τ's best candidate.
pub fn minimize_gate_time(problem: &FeasibilityProblem, settings: &DESettings, taus: &[f64]) -> Result<GateTimeScan> {
    if taus.is_empty() || taus.windows(2).any(|w| !(w[1] < w[0])) {
        return invalid("τ grid must be non-empty and strictly descending");
    }
    let mut entries: Vec<GateTimeEntry> = Vec::with_capacity(taus.len());
    for &tau in taus {
        let p = problem.with_gate_time(tau);
        let warm = entries.last().map(|e| e.result.best.clone());
        let result = differential_evolution(&p, settings, warm.as_ref())?;
        entries.push(GateTimeEntry { gate_time: tau, result });
    }
    Ok(GateTimeScan { entries })
}

#[cfg(test)]
mod tests;
