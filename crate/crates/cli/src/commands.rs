use std::path::PathBuf;

use iongate::config::{Config, Scenario};
use iongate::lindblad::{initial_state, integrate_qme, GateResult};
use iongate::optimize::{differential_evolution, minimize_gate_time, DriftPoint, OptimizationResult};
use iongate::quantum::CompositeSpace;
use iongate::sota::{sota_design, SotaOptions, BELL_PHASE};
use iongate::spectral::{dft, noise_budget as budget, robustness_scan, sample_pulse, spectral_width, trajectory_spectrum};
use iongate::trap::{driven_ions, PulseSequence};
use iongate::TWO_PI;

use crate::error::{CliError, Result};
use crate::run::{num, RunDir};
use crate::Common;

/// Samples recorded when a trajectory is needed and the config asks for none.
const DEFAULT_TRAJECTORY_SAMPLES: usize = 2001;

fn setup(c: &Common, name: &str, workers: Option<usize>) -> Result<(Config, Scenario, RunDir)> {
    let cfg = c.config()?;
    let scenario = cfg.build()?;
    let seed = cfg.optimizer.as_ref().map(|o| o.de.seed);
    let run = RunDir::create(&c.out, name, &cfg, seed, workers)?;
    Ok((cfg, scenario, run))
}

/// The configuration with `pulse` written into its gate section.
fn with_pulse(cfg: &Config, pulse: &PulseSequence) -> Config {
    let mut out = cfg.clone();
    out.gate.gate_time_us = pulse.gate_time * 1e6;
    out.gate.segments = pulse.n_segments();
    out.gate.detuning_hz = Some(pulse.detuning / TWO_PI);
    out.gate.amplitudes_hz = Some(pulse.signed_amplitudes().iter().map(|a| a / TWO_PI).collect());
    out
}

fn write_pulse(run: &mut RunDir, cfg: &Config, pulse: &PulseSequence) -> Result<()> {
    let t = pulse.boundaries();
    let rows = (0..pulse.n_segments()).map(|k| {
        vec![
            k.to_string(),
            num(t[k] * 1e6),
            num(t[k + 1] * 1e6),
            num(pulse.signed_amplitude(k) / TWO_PI),
        ]
    });
    run.write_csv("pulse.csv", &["segment", "start_us", "end_us", "amplitude_hz"], rows)?;
    run.write_text("pulse-config.toml", &with_pulse(cfg, pulse).to_toml()?)?;
    run.summary("detuning_hz", pulse.detuning / TWO_PI);
    Ok(())
}

fn write_curve(run: &mut RunDir, name: &str, points: &[DriftPoint]) -> Result<()> {
    let rows = points.iter().map(|p| {
        vec![num(p.drift / TWO_PI), num(p.infidelity), p.failure.clone().unwrap_or_default()]
    });
    run.write_csv(name, &["drift_hz", "infidelity", "failure"], rows)
}

fn simulate_pulse(s: &Scenario, pulse: &PulseSequence, min_samples: usize) -> Result<GateResult> {
    let problem = s.problem_for(pulse)?;
    let mut settings = problem.integrator.clone();
    if settings.sample_times.len() < min_samples {
        settings = settings.with_uniform_samples(pulse.gate_time, min_samples);
    }
    let n_qubits = driven_ions(pulse, &s.trap)?.len();
    let rho0 = initial_state(&CompositeSpace::new(n_qubits, s.cutoffs.clone())?, &s.trap, &s.nbar)?;
    Ok(integrate_qme(&rho0, pulse, &s.trap, &problem.evaluation_noise(), &settings)?)
}

pub fn simulate(c: &Common, workers: Option<usize>) -> Result<PathBuf> {
    let (_, s, mut run) = setup(c, "simulate", workers)?;
    let pulse = s.pulse()?.clone();
    let r = simulate_pulse(&s, &pulse, 2)?;
    run.write_csv(
        "result.csv",
        &["infidelity", "parity", "final_cutoffs"],
        [vec![
            num(r.infidelity),
            num(r.parity),
            r.final_cutoffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
        ]],
    )?;
    let m = r.rho4.matrix();
    let rows = m.indexed_iter().map(|((i, j), z)| vec![i.to_string(), j.to_string(), num(z.re), num(z.im)]);
    run.write_csv("rho4.csv", &["row", "col", "re", "im"], rows)?;
    let rows = r.samples.iter().flat_map(|smp| {
        smp.mode_amplitudes.iter().zip(&smp.mean_phonons).enumerate().map(move |(l, (a, n))| {
            vec![num(smp.time * 1e6), l.to_string(), num(a.re), num(a.im), num(*n), num(smp.trace)]
        })
    });
    run.write_csv("trajectory.csv", &["time_us", "mode", "re", "im", "mean_phonons", "trace"], rows)?;
    run.summary("infidelity", r.infidelity);
    run.summary("parity", r.parity);
    run.stats(r.stats);
    run.finish()
}

pub fn design_sota(c: &Common, workers: Option<usize>) -> Result<PathBuf> {
    let (cfg, s, mut run) = setup(c, "design-sota", workers)?;
    let d = sota_design(s.gate_time, s.n_segments, s.detuning()?, &s.trap, s.targets, BELL_PHASE, SotaOptions::default())?;
    write_pulse(&mut run, &cfg, &d.pulse)?;
    run.write_csv(
        "design.csv",
        &["closure_residual", "geometric_phase", "degenerate", "peak_amplitude_hz"],
        [vec![num(d.residual), num(d.phase), d.closure.degenerate.to_string(), num(d.pulse.peak_amplitude() / TWO_PI)]],
    )?;
    run.summary("closure_residual", d.residual);
    run.summary("geometric_phase", d.phase);
    run.finish()
}

fn write_search(run: &mut RunDir, cfg: &Config, s: &Scenario, r: &OptimizationResult) -> Result<()> {
    let problem = s.problem()?;
    let pulse = r.best.to_pulse(&problem)?;
    write_pulse(run, cfg, &pulse)?;
    // wall time lives in its own file so that histories of equal runs are
    // byte-identical
    let rows = r.history.iter().map(|h| vec![h.generation.to_string(), num(h.best), h.evaluations.to_string()]);
    run.write_csv("history.csv", &["generation", "best_infidelity", "evaluations"], rows)?;
    let rows = r.history.iter().zip(&r.generation_seconds).map(|(h, t)| vec![h.generation.to_string(), num(*t)]);
    run.write_csv("timing.csv", &["generation", "wall_seconds"], rows)?;
    write_curve(run, "curve.csv", &r.evaluation.curve)?;
    run.summary("feasible", r.feasible);
    run.summary("worst_infidelity", r.evaluation.worst_infidelity);
    run.summary("evaluations", r.evaluations as i64);
    run.summary("stop", format!("{:?}", r.stop).to_lowercase());
    for p in &r.evaluation.curve {
        if let Some(st) = p.stats {
            run.stats(st);
        }
    }
    Ok(())
}

pub fn optimize(c: &Common, workers: Option<usize>) -> Result<PathBuf> {
    let (cfg, s, mut run) = setup(c, "optimize", workers)?;
    let problem = s.problem()?;
    let mut de = s.optimizer.as_ref().map(|o| o.de.clone()).unwrap_or_default();
    de.workers = workers.or(de.workers);
    let r = differential_evolution(&problem, &de, None)?;
    write_search(&mut run, &cfg, &s, &r)?;
    run.finish()
}

pub fn scan_robustness(c: &Common, workers: Option<usize>) -> Result<PathBuf> {
    let (_, s, mut run) = setup(c, "scan-robustness", workers)?;
    let pulse = s.pulse()?;
    let curve = robustness_scan(pulse, &s.problem_for(pulse)?, &s.scan_drifts)?;
    write_curve(&mut run, "robustness.csv", &curve.points)?;
    run.summary("argmin_drift_hz", curve.argmin / TWO_PI);
    run.summary("worst_infidelity", curve.worst());
    run.finish()
}

pub fn spectrum(c: &Common, trajectory: bool, workers: Option<usize>) -> Result<PathBuf> {
    let (_, s, mut run) = setup(c, "spectrum", workers)?;
    let pulse = s.pulse()?.clone();
    let samples = sample_pulse(&pulse, s.sample_rate)?;
    let spec = dft(&samples, s.sample_rate)?;
    let rows = (0..spec.frequencies.len())
        .map(|k| vec![num(spec.frequencies[k]), num(spec.magnitude[k] / TWO_PI), num(spec.phase[k])]);
    run.write_csv("spectrum.csv", &["frequency_hz", "magnitude_hz", "phase_rad"], rows)?;
    let width = spectral_width(&spec, s.width_threshold)?;
    run.summary("spectral_width_hz", width);
    run.summary("samples", samples.len() as i64);
    if trajectory {
        let r = simulate_pulse(&s, &pulse, DEFAULT_TRAJECTORY_SAMPLES)?;
        let l = s.trajectory_mode;
        let times: Vec<f64> = r.samples.iter().map(|x| x.time).collect();
        let values: Vec<_> = r.samples.iter().map(|x| x.mode_amplitudes[l]).collect();
        let ts = trajectory_spectrum(&times, &values)?;
        let rows = (0..ts.frequencies.len()).map(|k| vec![num(ts.frequencies[k]), num(ts.magnitude[k]), num(ts.phase[k])]);
        run.write_csv("trajectory-spectrum.csv", &["frequency_hz", "magnitude", "phase_rad"], rows)?;
        run.stats(r.stats);
    }
    run.finish()
}

pub fn noise_budget(c: &Common, workers: Option<usize>) -> Result<PathBuf> {
    let (_, s, mut run) = setup(c, "noise-budget", workers)?;
    let pulse = s.pulse()?;
    let b = budget(pulse, &s.problem_for(pulse)?)?;
    let rows = b.contributions.iter().map(|c| {
        vec![c.source.to_string(), num(c.without), num(c.fraction), num(c.excess_fraction)]
    });
    run.write_csv("budget.csv", &["source", "infidelity_without", "fraction", "excess_fraction"], rows)?;
    run.summary("total_infidelity", b.total);
    run.summary("noiseless_infidelity", b.noiseless);
    run.finish()
}

pub fn gate_time(c: &Common, workers: Option<usize>) -> Result<PathBuf> {
    let (cfg, s, mut run) = setup(c, "gate-time", workers)?;
    let problem = s.problem()?;
    let o = s.optimizer.as_ref().ok_or_else(|| CliError::Usage("gate-time needs an [optimizer] section".into()))?;
    if o.tau_grid.is_empty() {
        return Err(CliError::Usage("optimizer.tau_grid_us is empty".into()));
    }
    let mut de = o.de.clone();
    de.workers = workers.or(de.workers);
    let scan = minimize_gate_time(&problem, &de, &o.tau_grid)?;
    let rows = scan.entries.iter().map(|e| {
        vec![
            num(e.gate_time * 1e6),
            e.result.feasible.to_string(),
            num(e.result.evaluation.worst_infidelity),
            e.result.evaluations.to_string(),
        ]
    });
    run.write_csv("gate-time.csv", &["tau_us", "feasible", "worst_infidelity", "evaluations"], rows)?;
    match scan.shortest() {
        Some(e) => {
            run.summary("shortest_tau_us", e.gate_time * 1e6);
            let mut s = s.clone();
            s.gate_time = e.gate_time;
            write_search(&mut run, &cfg, &s, &e.result)?;
        }
        None => run.summary("shortest_tau_us", "none"),
    }
    run.finish()
}
