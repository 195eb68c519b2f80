use serde::{Deserialize, Serialize};

use super::dopri::{advance, Halt, StepControl, StepStats};
use super::equation::{MasterEquation, Workspace};
use super::noise::NoiseModel;
use super::observables::{infidelity, parity_population, plus_projected_ladder, reduced_gate_state, sparse_expectation};
use crate::error::{invalid, Error, Result};
use crate::quantum::{resize_fock, thermal_state, CompositeSpace, DensityMatrix, SparseOperator};
use crate::trap::{Expansion, GateHamiltonian, PulseSequence, TrapConfig};
use crate::{CMatrix, C64};

pub const DEFAULT_MIN_CUTOFF: usize = 3;
pub const DEFAULT_MAX_CUTOFF: usize = 60;
/// Levels added per growth event.
const GROW_STEP: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step in seconds; unbounded when unset.
    pub max_step: Option<f64>,
    /// Adapt the Fock cutoffs during integration.
    pub adaptive_fock: bool,
    /// Grow a mode when its top level holds more than this population.
    pub fock_grow_threshold: f64,
    /// Shrink a mode when its top level holds less than this population.
    pub fock_shrink_threshold: f64,
    /// Per-mode bounds; empty means [`DEFAULT_MIN_CUTOFF`] / [`DEFAULT_MAX_CUTOFF`].
    pub min_cutoffs: Vec<usize>,
    pub max_cutoffs: Vec<usize>,
    /// Fail when `|tr ρ − 1|` exceeds this after any step.
    pub trace_tolerance: f64,
    /// Fail when the final state has an eigenvalue below `−positivity_tolerance`.
    pub positivity_tolerance: f64,
    /// Times at which observables are recorded.
    pub sample_times: Vec<f64>,
    /// Keep the full state at each sample time.
    pub keep_states: bool,
    #[serde(skip, default = "exact")]
    pub expansion: Expansion,
}

fn exact() -> Expansion {
    Expansion::Exact
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: None,
            adaptive_fock: true,
            fock_grow_threshold: 1e-6,
            fock_shrink_threshold: 1e-9,
            min_cutoffs: Vec::new(),
            max_cutoffs: Vec::new(),
            trace_tolerance: 1e-6,
            positivity_tolerance: crate::quantum::POSITIVITY_TOL,
            sample_times: Vec::new(),
            keep_states: false,
            expansion: Expansion::Exact,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return invalid("tolerances must be positive");
        }
        for t in [self.fock_grow_threshold, self.fock_shrink_threshold] {
            if !(t > 0.0 && t < 1.0) {
                return invalid(format!("Fock threshold {t} outside (0, 1)"));
            }
        }
        if self.fock_shrink_threshold >= self.fock_grow_threshold {
            return invalid("shrink threshold must lie below the grow threshold");
        }
        if self.max_step.is_some_and(|h| !(h > 0.0)) {
            return invalid("max_step must be positive");
        }
        Ok(())
    }

    /// `n` evenly spaced sample times on `[0, duration]`, endpoints included.
    pub fn with_uniform_samples(mut self, duration: f64, n: usize) -> Self {
        self.sample_times = (0..n).map(|k| duration * k as f64 / (n.max(2) - 1) as f64).collect();
        self
    }

    fn bounds(&self, mode: usize) -> (usize, usize) {
        (
            self.min_cutoffs.get(mode).copied().unwrap_or(DEFAULT_MIN_CUTOFF),
            self.max_cutoffs.get(mode).copied().unwrap_or(DEFAULT_MAX_CUTOFF),
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IntegrationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub resizes: usize,
    pub peak_dimension: usize,
    pub max_trace_drift: f64,
    pub max_hermiticity_defect: f64,
    pub final_min_eigenvalue: f64,
}

/// Observables recorded at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub trace: f64,
    /// `ā_l` per mode; empty without a gate drive.
    pub mode_amplitudes: Vec<C64>,
    pub mean_phonons: Vec<f64>,
    pub state: Option<DensityMatrix>,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: DensityMatrix,
    pub samples: Vec<Sample>,
    pub stats: IntegrationStats,
}

#[derive(Debug, Clone)]
pub struct GateResult {
    pub rho4: DensityMatrix,
    pub infidelity: f64,
    pub parity: f64,
    pub samples: Vec<Sample>,
    pub final_cutoffs: Vec<usize>,
    pub stats: IntegrationStats,
    pub final_state: DensityMatrix,
}

/// `|0…0⟩⟨0…0| ⊗ ⊗_l thermal(n̄_l)` on `space`.
pub fn initial_state(space: &CompositeSpace, trap: &TrapConfig, nbar: &[f64]) -> Result<DensityMatrix> {
    if space.n_modes() != trap.n_modes() || nbar.len() != trap.n_modes() {
        return invalid(format!(
            "{} occupations and {} space modes for {} trap modes",
            nbar.len(),
            space.n_modes(),
            trap.n_modes()
        ));
    }
    let mut rho = DensityMatrix::basis(CompositeSpace::qubits(space.n_qubits())?, 0)?;
    for (&n, &c) in nbar.iter().zip(space.fock_cutoffs()) {
        rho = rho.tensor(&thermal_state(n, c)?)?;
    }
    Ok(rho)
}

/// Populations of each level of each mode.
fn mode_populations(space: &CompositeSpace, rho: &CMatrix) -> Vec<Vec<f64>> {
    let cutoffs = space.fock_cutoffs();
    let m = space.mode_dimension();
    let mut pops: Vec<Vec<f64>> = cutoffs.iter().map(|&c| vec![0.0; c]).collect();
    let mut digits = vec![0usize; cutoffs.len()];
    for k in 0..m {
        let mut rem = k;
        for l in (0..cutoffs.len()).rev() {
            digits[l] = rem % cutoffs[l];
            rem /= cutoffs[l];
        }
        let p: f64 = (0..space.qubit_dimension()).map(|q| rho[[q * m + k, q * m + k]].re).sum();
        for (l, &n) in digits.iter().enumerate() {
            pops[l][n] += p;
        }
    }
    pops
}

/// Cutoffs the state should move to, if any mode needs resizing.
fn plan_resize(space: &CompositeSpace, rho: &CMatrix, settings: &IntegratorSettings) -> Result<Option<Vec<usize>>> {
    let pops = mode_populations(space, rho);
    let mut cutoffs = space.fock_cutoffs().to_vec();
    let mut changed = false;
    for (l, p) in pops.iter().enumerate() {
        let c = cutoffs[l];
        let (lo, hi) = settings.bounds(l);
        let top = p[c - 1];
        if top > settings.fock_grow_threshold {
            if c >= hi {
                return Err(Error::TruncationOverflow { mode: l, max: hi });
            }
            cutoffs[l] = (c + GROW_STEP).min(hi);
            changed = true;
        } else if c > lo && c > 2 && top < settings.fock_shrink_threshold && p[c - 2] < 0.1 * settings.fock_grow_threshold {
            cutoffs[l] = c - 1;
            changed = true;
        }
    }
    Ok(changed.then_some(cutoffs))
}

fn hermiticity_and_trace(m: &CMatrix) -> (f64, f64) {
    let d = m.nrows();
    let mut herm = 0.0f64;
    let mut tr = 0.0;
    for i in 0..d {
        tr += m[[i, i]].re;
        for j in i..d {
            herm = herm.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    (herm, tr)
}

struct Recorder {
    times: Vec<f64>,
    next: usize,
    keep_states: bool,
    samples: Vec<Sample>,
    probes: Option<(CompositeSpace, Vec<SparseOperator>)>,
}

impl Recorder {
    fn record(&mut self, eq: &MasterEquation, t: f64, rho: &CMatrix) -> Result<()> {
        let space = eq.space();
        if let Some(targets) = eq.target_qubits() {
            if self.probes.as_ref().is_none_or(|(s, _)| s != space) {
                let ops = (0..space.n_modes())
                    .map(|l| plus_projected_ladder(space, targets, l))
                    .collect::<Result<Vec<_>>>()?;
                self.probes = Some((space.clone(), ops));
            }
        }
        let mode_amplitudes = match (&self.probes, eq.target_qubits()) {
            (Some((_, ops)), Some(_)) => ops.iter().map(|op| sparse_expectation(op, rho)).collect(),
            _ => Vec::new(),
        };
        let mean_phonons = mode_populations(space, rho)
            .iter()
            .map(|p| p.iter().enumerate().map(|(n, x)| n as f64 * x).sum())
            .collect();
        let trace = rho.diag().iter().map(|z| z.re).sum();
        let state = if self.keep_states { Some(DensityMatrix::new(space.clone(), rho.clone())?) } else { None };
        self.samples.push(Sample { time: t, trace, mode_amplitudes, mean_phonons, state });
        Ok(())
    }
}

/// Integrates `eq` from `boundaries[0]` to its last entry. The right-hand
/// side may be discontinuous only at the boundaries, which are hit exactly;
/// interval `k` is passed to the equation as its segment index.
pub fn evolve(
    eq: &MasterEquation,
    rho0: &DensityMatrix,
    boundaries: &[f64],
    settings: &IntegratorSettings,
) -> Result<Evolution> {
    settings.validate()?;
    if rho0.space() != eq.space() {
        return invalid("initial state and equation live on different spaces");
    }
    if boundaries.len() < 2 || boundaries.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("boundaries must be increasing with at least two entries");
    }
    let t_end = *boundaries.last().expect("checked");
    let mut times = settings.sample_times.clone();
    if times.iter().any(|&t| t < boundaries[0] || t > t_end || !t.is_finite()) {
        return invalid("sample times must lie inside the integration interval");
    }
    times.sort_by(|a, b| a.total_cmp(b));

    let ctl = StepControl {
        rel_tol: settings.rel_tol,
        abs_tol: settings.abs_tol,
        max_step: settings.max_step.unwrap_or(f64::INFINITY),
    };
    let mut eq = eq.clone();
    let mut rho = rho0.matrix().as_standard_layout().into_owned();
    let mut work = Workspace::new(eq.space().dimension());
    let mut steps = StepStats::default();
    let mut stats = IntegrationStats { peak_dimension: eq.space().dimension(), ..Default::default() };
    let mut rec = Recorder { times, next: 0, keep_states: settings.keep_states, samples: Vec::new(), probes: None };
    while rec.next < rec.times.len() && rec.times[rec.next] <= boundaries[0] {
        rec.record(&eq, boundaries[0], &rho)?;
        rec.next += 1;
    }

    let mut h = 0.0;
    for (segment, w) in boundaries.windows(2).enumerate() {
        let mut t = w[0];
        while t < w[1] {
            let mut failure: Option<Error> = None;
            let mut resize: Option<Vec<usize>> = None;
            let (reached, halt) = {
                let eq_ref = &eq;
                let work_ref = &mut work;
                advance(
                    |t, y, out| eq_ref.rhs(segment, t, y, out, work_ref),
                    t,
                    w[1],
                    &mut rho,
                    &mut h,
                    &ctl,
                    &mut steps,
                    |step| {
                        let end = step.t_old + step.h;
                        while rec.next < rec.times.len() && rec.times[rec.next] <= end {
                            let ts = rec.times[rec.next];
                            let y = step.interpolate(ts);
                            if let Err(e) = rec.record(eq_ref, ts, &y) {
                                failure = Some(e);
                                return true;
                            }
                            rec.next += 1;
                        }
                        let (herm, tr) = hermiticity_and_trace(step.y_new);
                        stats.max_hermiticity_defect = stats.max_hermiticity_defect.max(herm);
                        stats.max_trace_drift = stats.max_trace_drift.max((tr - 1.0).abs());
                        if (tr - 1.0).abs() > settings.trace_tolerance || !tr.is_finite() {
                            failure = Some(Error::IntegrationFailure {
                                time: end,
                                reason: format!("trace drifted to {tr}"),
                            });
                            return true;
                        }
                        if settings.adaptive_fock && eq_ref.space().n_modes() > 0 {
                            match plan_resize(eq_ref.space(), step.y_new, settings) {
                                Ok(Some(c)) => {
                                    resize = Some(c);
                                    return true;
                                }
                                Ok(None) => {}
                                Err(e) => {
                                    failure = Some(e);
                                    return true;
                                }
                            }
                        }
                        false
                    },
                )
            };
            if let Some(e) = failure {
                return Err(e);
            }
            if halt == Halt::StepUnderflow {
                return Err(Error::IntegrationFailure { time: reached, reason: "step size underflow".into() });
            }
            t = reached;
            if let Some(cutoffs) = resize {
                let Some(next) = eq.resized(&cutoffs) else {
                    // constant problems keep their space
                    continue;
                };
                let next = next?;
                let mut state = DensityMatrix::new(eq.space().clone(), rho)?;
                for (l, &c) in cutoffs.iter().enumerate() {
                    if c != state.space().fock_cutoffs()[l] {
                        state = resize_fock(&state, l, c, settings.fock_shrink_threshold)?.state;
                    }
                }
                rho = state.into_matrix();
                eq = next;
                work = Workspace::new(eq.space().dimension());
                stats.resizes += 1;
                stats.peak_dimension = stats.peak_dimension.max(eq.space().dimension());
            }
        }
    }
    // samples exactly at the end
    while rec.next < rec.times.len() {
        rec.record(&eq, t_end, &rho)?;
        rec.next += 1;
    }

    let final_state = DensityMatrix::new(eq.space().clone(), rho)?;
    stats.final_min_eigenvalue = final_state.min_eigenvalue();
    if stats.final_min_eigenvalue < -settings.positivity_tolerance {
        return Err(Error::IntegrationFailure {
            time: t_end,
            reason: format!("final state has eigenvalue {}", stats.final_min_eigenvalue),
        });
    }
    stats.accepted_steps = steps.accepted;
    stats.rejected_steps = steps.rejected;
    stats.rhs_evaluations = steps.rhs_evaluations;
    Ok(Evolution { final_state, samples: rec.samples, stats })
}

/// Integrates the gate master equation over the pulse and evaluates the
/// target-pair observables. The Fock cutoffs are those of `rho0`.
pub fn integrate_qme(
    rho0: &DensityMatrix,
    pulse: &PulseSequence,
    trap: &TrapConfig,
    noise: &NoiseModel,
    settings: &IntegratorSettings,
) -> Result<GateResult> {
    let ham = GateHamiltonian::new(trap, pulse, rho0.space().fock_cutoffs(), settings.expansion)?;
    if ham.space() != rho0.space() {
        return invalid(format!(
            "initial state has {} qubits; the drive lights {} ions",
            rho0.space().n_qubits(),
            ham.space().n_qubits()
        ));
    }
    let targets = ham.target_qubits();
    let eq = MasterEquation::gate(ham, noise)?;
    let evolution = evolve(&eq, rho0, &pulse.boundaries(), settings)?;
    let rho4 = reduced_gate_state(&evolution.final_state, targets)?;
    Ok(GateResult {
        infidelity: infidelity(&rho4)?,
        parity: parity_population(&rho4)?,
        rho4,
        samples: evolution.samples,
        final_cutoffs: evolution.final_state.space().fock_cutoffs().to_vec(),
        stats: evolution.stats,
        final_state: evolution.final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{embed_sparse, ladder_operator, max_abs_diff, qubit_operators, Slot};
    use crate::{AMU, TWO_PI};

    fn coherent_ket(alpha: C64, cutoff: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(cutoff);
        let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..cutoff {
            out.push(term);
            term = term * alpha / ((n + 1) as f64).sqrt();
        }
        out
    }

    fn fixed(settings: IntegratorSettings) -> IntegratorSettings {
        IntegratorSettings { adaptive_fock: false, ..settings }
    }

    #[test]
    fn free_evolution_is_identity() {
        let space = CompositeSpace::new(1, vec![4]).unwrap();
        let eq = MasterEquation::constant(space.clone(), None, vec![]).unwrap();
        let rho0 = DensityMatrix::maximally_mixed(space);
        let out = evolve(&eq, &rho0, &[0.0, 1e-4], &fixed(Default::default())).unwrap();
        assert!(max_abs_diff(out.final_state.matrix(), rho0.matrix()) <= 1e-12);
    }

    #[test]
    fn damped_mode_oracle() {
        let cutoff = 20;
        let gamma: f64 = 3.0e3;
        let space = CompositeSpace::new(0, vec![cutoff]).unwrap();
        let a = embed_sparse(&ladder_operator(cutoff).unwrap(), Slot::Mode(0), &space).unwrap();
        let eq = MasterEquation::constant(space.clone(), None, vec![a.scaled(C64::new(gamma.sqrt(), 0.0))]).unwrap();
        let rho0 = DensityMatrix::pure(space, &coherent_ket(C64::new(1.2, 0.5), cutoff)).unwrap();
        let n0: f64 = (0..cutoff).map(|n| n as f64 * rho0.matrix()[[n, n]].re).sum();
        let settings = fixed(IntegratorSettings::default()).with_uniform_samples(1e-3, 11);
        let out = evolve(&eq, &rho0, &[0.0, 1e-3], &settings).unwrap();
        assert_eq!(out.samples.len(), 11);
        for s in &out.samples {
            let expect = n0 * (-gamma * s.time).exp();
            assert!((s.mean_phonons[0] - expect).abs() <= 1e-6 * expect, "t={} {} vs {}", s.time, s.mean_phonons[0], expect);
        }
    }

    #[test]
    fn pure_dephasing_oracle() {
        let gamma: f64 = 2.5e3;
        let space = CompositeSpace::qubits(1).unwrap();
        let half_z = qubit_operators().sigma_z.mapv(|z| z * 0.5 * gamma.sqrt());
        let l = embed_sparse(&half_z, Slot::Qubit(0), &space).unwrap();
        let eq = MasterEquation::constant(space.clone(), None, vec![l]).unwrap();
        let h = 0.5f64.sqrt();
        let rho0 = DensityMatrix::pure(space, &[C64::new(h, 0.0), C64::new(0.0, h)]).unwrap();
        let settings = fixed(IntegratorSettings { keep_states: true, ..Default::default() }).with_uniform_samples(1e-3, 6);
        let out = evolve(&eq, &rho0, &[0.0, 1e-3], &settings).unwrap();
        for s in &out.samples {
            let c = s.state.as_ref().unwrap().matrix()[[0, 1]].norm();
            let expect = 0.5 * (-gamma * s.time / 2.0).exp();
            assert!((c - expect).abs() <= 1e-6 * expect);
        }
    }

    fn small_trap(n_modes: usize) -> TrapConfig {
        let b = 0.5f64.sqrt();
        let (freqs, matrix) = if n_modes == 1 {
            (vec![TWO_PI * 3e6], vec![vec![b], vec![b]])
        } else {
            (vec![TWO_PI * 3e6, TWO_PI * 2.9e6], vec![vec![b, b], vec![b, -b]])
        };
        let eta = 0.065;
        let dk = TrapConfig::delta_k_for(171.0 * AMU, freqs[0], b, eta);
        let mut t = TrapConfig::new(171.0 * AMU, freqs, matrix, dk).unwrap();
        t.spillover_fraction = 0.0;
        t
    }

    fn small_pulse() -> PulseSequence {
        PulseSequence::new(20e-6, vec![TWO_PI * 80e3, TWO_PI * 60e3], TWO_PI * 3.05e6, (0, 1)).unwrap()
    }

    #[test]
    fn matrix_form_matches_superoperator() {
        let trap = small_trap(1);
        let pulse = small_pulse();
        let ham = GateHamiltonian::new(&trap, &pulse, &[4], Expansion::Exact).unwrap();
        let mut noise = NoiseModel::table1(1);
        noise.heating_rates = vec![3e3];
        noise.raman = 2e3;
        noise.intensity = 5e3;
        let eq = MasterEquation::gate(ham, &noise).unwrap();
        let d = eq.space().dimension();
        // a random Hermitian, not necessarily positive, test matrix
        let x = CMatrix::from_shape_fn((d, d), |(i, j)| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i == j { 0.0 } else if i < j { (a * 0.7 - b).cos() } else { -(a * 0.7 - b).cos() };
            C64::new((a * 1.3 + b * 0.4).sin(), im)
        });
        for (seg, t) in [(0, 3.3e-6), (1, 17.1e-6)] {
            let mut out = CMatrix::zeros((d, d));
            let mut work = Workspace::new(d);
            eq.rhs(seg, t, &x, &mut out, &mut work);
            let sup = eq.superoperator(seg, t);
            let v = ndarray::Array1::from_iter(x.iter().copied());
            let w = sup.dot(&v).into_shape_with_order((d, d)).unwrap();
            let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(max_abs_diff(&out, &w) <= 1e-12 * scale, "segment {seg}");
        }
    }

    #[test]
    fn vectorized_integration_agrees() {
        let trap = small_trap(1);
        let pulse = PulseSequence::new(1.5e-6, vec![TWO_PI * 80e3, TWO_PI * 60e3], TWO_PI * 3.05e6, (0, 1)).unwrap();
        let rho0 = initial_state(&CompositeSpace::new(2, vec![3]).unwrap(), &trap, &[0.0]).unwrap();
        let mut noise = NoiseModel::table1(1);
        noise.heating_rates = vec![3e4];
        noise.raman = 1e4;
        let settings = fixed(IntegratorSettings { rel_tol: 1e-10, abs_tol: 1e-12, ..Default::default() });
        let result = integrate_qme(&rho0, &pulse, &trap, &noise, &settings).unwrap();

        let ham = GateHamiltonian::new(&trap, &pulse, &[3], Expansion::Exact).unwrap();
        let eq = MasterEquation::gate(ham, &noise).unwrap();
        let d = rho0.space().dimension();
        let ctl = StepControl { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY };
        let mut y = CMatrix::from_shape_vec((d * d, 1), rho0.matrix().iter().copied().collect()).unwrap();
        let mut h = 0.0;
        let mut stats = StepStats::default();
        for (seg, w) in pulse.boundaries().windows(2).enumerate() {
            advance(
                |t, y, out| out.assign(&eq.superoperator(seg, t).dot(y)),
                w[0],
                w[1],
                &mut y,
                &mut h,
                &ctl,
                &mut stats,
                |_| false,
            );
        }
        let vec_final = y.into_shape_with_order((d, d)).unwrap();
        assert!(max_abs_diff(&vec_final, result.final_state.matrix()) < 1e-8);
    }

    #[test]
    fn noiseless_gate_conserves_purity_and_trace() {
        let trap = small_trap(2);
        let rho0 = initial_state(&CompositeSpace::new(2, vec![5, 4]).unwrap(), &trap, &[0.0, 0.0]).unwrap();
        let pulse = PulseSequence::new(8e-6, vec![TWO_PI * 80e3, TWO_PI * 60e3], TWO_PI * 3.05e6, (0, 1)).unwrap();
        let out = integrate_qme(&rho0, &pulse, &trap, &NoiseModel::noiseless(2), &fixed(Default::default())).unwrap();
        assert!((out.final_state.purity() - 1.0).abs() < 1e-8);
        assert!(out.stats.max_trace_drift < 1e-8);
        assert!(out.stats.max_hermiticity_defect < 1e-10);
        assert!((out.rho4.trace().re - 1.0).abs() < 1e-8);
        assert!((0.0..=1.0).contains(&out.infidelity));
    }

    #[test]
    fn adaptive_cutoffs_grow_and_track_reference() {
        let trap = small_trap(1);
        let pulse = PulseSequence::new(20e-6, vec![TWO_PI * 150e3], TWO_PI * 3.05e6, (0, 1)).unwrap();
        let start = initial_state(&CompositeSpace::new(2, vec![3]).unwrap(), &trap, &[0.0]).unwrap();
        let adaptive = integrate_qme(&start, &pulse, &trap, &NoiseModel::noiseless(1), &Default::default()).unwrap();
        let big = initial_state(&CompositeSpace::new(2, vec![20]).unwrap(), &trap, &[0.0]).unwrap();
        let reference = integrate_qme(&big, &pulse, &trap, &NoiseModel::noiseless(1), &fixed(Default::default())).unwrap();
        assert!(adaptive.stats.resizes > 0);
        assert!(adaptive.stats.peak_dimension < reference.stats.peak_dimension);
        assert!((adaptive.infidelity - reference.infidelity).abs() < 1e-6);
    }

    #[test]
    fn overflow_is_reported() {
        let trap = small_trap(1);
        let pulse = PulseSequence::new(20e-6, vec![TWO_PI * 150e3], TWO_PI * 3.05e6, (0, 1)).unwrap();
        let start = initial_state(&CompositeSpace::new(2, vec![3]).unwrap(), &trap, &[0.0]).unwrap();
        let settings = IntegratorSettings { max_cutoffs: vec![4], ..Default::default() };
        let err = integrate_qme(&start, &pulse, &trap, &NoiseModel::noiseless(1), &settings).unwrap_err();
        assert_eq!(err, Error::TruncationOverflow { mode: 0, max: 4 });
    }

    #[test]
    fn initial_state_moments() {
        let trap = small_trap(2);
        let space = CompositeSpace::new(2, vec![40, 3]).unwrap();
        let rho = initial_state(&space, &trap, &[0.4, 0.0]).unwrap();
        rho.validate().unwrap();
        let pops = mode_populations(&space, rho.matrix());
        let n0: f64 = pops[0].iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        assert!((n0 - 0.4).abs() < 1e-6);
        assert!((pops[1][0] - 1.0).abs() < 1e-15);
        assert!(initial_state(&space, &trap, &[0.1]).is_err());
    }
}
