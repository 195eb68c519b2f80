//! Pulse and trajectory spectra, robustness scans and noise budgets.

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lindblad::{NoiseModel, NoiseSource, SourceFlags};
use crate::optimize::{DriftContext, DriftPoint, FeasibilityProblem};
use crate::trap::PulseSequence;
use crate::{C64, TWO_PI};

/// Default fraction of the peak magnitude bounding the main lobe.
pub const DEFAULT_WIDTH_THRESHOLD: f64 = 0.5;

/// One-sided DFT of a real series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Hz; bin `k` sits at `k f_s / n`.
    pub frequencies: Vec<f64>,
    /// `|X_k|`, unnormalized.
    pub magnitude: Vec<f64>,
    /// `arg X_k` in `[0, 2π)`.
    pub phase: Vec<f64>,
    pub sample_rate: f64,
    pub n_samples: usize,
}

/// 2 for one-sided bins that stand for a mirrored pair, else 1.
fn fold_weight(k: usize, n: usize) -> f64 {
    if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
        1.0
    } else {
        2.0
    }
}

impl Spectrum {
    /// Hz between adjacent bins.
    pub fn bin_width(&self) -> f64 {
        self.sample_rate / self.n_samples as f64
    }

    /// `(1/n) Σ_k |X_k|²` over the full two-sided transform, which equals
    /// `Σ |x_j|²` by Parseval.
    pub fn energy(&self) -> f64 {
        let n = self.n_samples;
        let sum: f64 = self
            .magnitude
            .iter()
            .enumerate()
            .map(|(k, m)| {
                m * m * fold_weight(k, n)
            })
            .sum();
        sum / n as f64
    }

    /// Energy (as in [`Spectrum::energy`]) of bins with `lo ≤ f ≤ hi`.
    pub fn band_energy(&self, lo: f64, hi: f64) -> f64 {
        let n = self.n_samples;
        self.frequencies
            .iter()
            .zip(&self.magnitude)
            .enumerate()
            .filter(|(_, (f, _))| (lo..=hi).contains(*f))
            .map(|(k, (_, m))| {
                m * m * fold_weight(k, n)
            })
            .sum::<f64>()
            / n as f64
    }

    pub fn peak_bin(&self) -> usize {
        (0..self.magnitude.len()).fold(0, |b, k| if self.magnitude[k] > self.magnitude[b] { k } else { b })
    }
}

/// Zero-order-hold samples of the signed envelope at `t_j = j / f_s` over
/// `[0, τ)`. Segment `k` owns samples `⌊t_k f_s⌋ ≤ j < ⌊t_{k+1} f_s⌋`.
pub fn sample_pulse(pulse: &PulseSequence, sample_rate: f64) -> Result<Vec<f64>> {
    let m = pulse.n_segments();
    if !(sample_rate >= 2.0 * m as f64 / pulse.gate_time) {
        return invalid(format!(
            "sample rate {sample_rate} Hz below 2m/τ = {} Hz",
            2.0 * m as f64 / pulse.gate_time
        ));
    }
    // the small offset keeps exact products such as 35e-6 · 1e7 from
    // rounding one sample short
    let index = |t: f64| (t * sample_rate * (1.0 + 1e-12)).floor() as usize;
    let boundaries = pulse.boundaries();
    let n = index(pulse.gate_time);
    let mut out = vec![0.0; n];
    for k in 0..m {
        let (a, b) = (index(boundaries[k]), index(boundaries[k + 1]).min(n));
        out[a..b].fill(pulse.signed_amplitude(k));
    }
    Ok(out)
}

fn one_sided(buf: &[C64], sample_rate: f64) -> Spectrum {
    let n = buf.len();
    let bins = n / 2 + 1;
    Spectrum {
        frequencies: (0..bins).map(|k| k as f64 * sample_rate / n as f64).collect(),
        magnitude: buf[..bins].iter().map(|z| z.norm()).collect(),
        phase: buf[..bins].iter().map(|z| z.arg().rem_euclid(TWO_PI)).collect(),
        sample_rate,
        n_samples: n,
    }
}

/// `X_k = Σ_j x_j e^{−2πi jk/n}` for `k = 0..=n/2`.
pub fn dft(samples: &[f64], sample_rate: f64) -> Result<Spectrum> {
    if samples.is_empty() {
        return invalid("cannot transform an empty series");
    }
    if !(sample_rate > 0.0) {
        return invalid("sample rate must be positive");
    }
    let mut buf: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    Ok(one_sided(&buf, sample_rate))
}

/// Width in Hz of the contiguous run of bins around the global peak whose
/// magnitude is at least `threshold` × peak. A single bin counts as one
/// bin width.
pub fn spectral_width(spectrum: &Spectrum, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return invalid(format!("threshold {threshold} outside (0, 1)"));
    }
    let p = spectrum.peak_bin();
    let floor = threshold * spectrum.magnitude[p];
    let mag = &spectrum.magnitude;
    let mut lo = p;
    while lo > 0 && mag[lo - 1] >= floor {
        lo -= 1;
    }
    let mut hi = p;
    while hi + 1 < mag.len() && mag[hi + 1] >= floor {
        hi += 1;
    }
    Ok((hi - lo + 1) as f64 * spectrum.bin_width())
}

/// Spectrum of `Re ā(t)` from a uniformly sampled trajectory.
pub fn trajectory_spectrum(times: &[f64], amplitudes: &[C64]) -> Result<Spectrum> {
    if times.len() != amplitudes.len() || times.len() < 2 {
        return invalid("trajectory needs matching times and values, at least two of each");
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return invalid("trajectory is not uniformly sampled");
    }
    let re: Vec<f64> = amplitudes.iter().map(|z| z.re).collect();
    dft(&re, 1.0 / dt)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessCurve {
    pub points: Vec<DriftPoint>,
    /// δ* of the smallest infidelity, rad/s.
    pub argmin: f64,
}

impl RobustnessCurve {
    pub fn worst(&self) -> f64 {
        self.points.iter().map(|p| p.infidelity).fold(0.0, f64::max)
    }
}

/// Full-QME infidelity at each drift, evaluated in parallel and returned in
/// input order. Integration failures carry the evaluation penalty and are
/// flagged per point.
pub fn robustness_scan(pulse: &PulseSequence, problem: &FeasibilityProblem, drifts: &[f64]) -> Result<RobustnessCurve> {
    if drifts.is_empty() || drifts.iter().any(|d| !d.is_finite()) {
        return invalid("drift list must be non-empty and finite");
    }
    let ctx = DriftContext::new(pulse, problem)?;
    let points = drifts.par_iter().map(|&d| ctx.point(d)).collect::<Result<Vec<_>>>()?;
    let best = (0..points.len()).fold(0, |b, i| if points[i].infidelity < points[b].infidelity { i } else { b });
    Ok(RobustnessCurve { argmin: points[best].drift, points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceContribution {
    pub source: NoiseSource,
    /// I with this source's jumps removed.
    pub without: f64,
    /// `(I_all − I_without) / I_all`
    pub fraction: f64,
    /// `(I_all − I_without) / (I_all − I_noiseless)`: the share of the
    /// noise-induced infidelity, exactly 1 when this is the only source.
    pub excess_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub total: f64,
    pub noiseless: f64,
    /// Enabled sources only, in canonical order. Fractions need not sum to 1.
    pub contributions: Vec<SourceContribution>,
}

/// Leave-one-out attribution of the zero-drift infidelity to each enabled
/// noise source.
pub fn noise_budget(pulse: &PulseSequence, problem: &FeasibilityProblem) -> Result<NoiseBudget> {
    let noise = problem.evaluation_noise();
    let enabled: Vec<NoiseSource> = NoiseSource::ALL.into_iter().filter(|&s| noise.enabled.get(s)).collect();
    if enabled.is_empty() {
        return invalid("noise budget needs at least one enabled source");
    }
    let run = |n: NoiseModel| -> Result<f64> { Ok(DriftContext::with_noise(pulse, problem, n)?.gate(0.0)?.infidelity) };
    let mut variants = vec![noise.clone(), NoiseModel { enabled: SourceFlags::NONE, ..noise.clone() }];
    variants.extend(enabled.iter().map(|&s| noise.without(s)));
    let values = variants.into_par_iter().map(run).collect::<Result<Vec<_>>>()?;
    let (total, noiseless) = (values[0], values[1]);
    if total <= 0.0 {
        return Err(Error::UndefinedBudget("total infidelity is zero".into()));
    }
    let contributions = enabled
        .iter()
        .zip(&values[2..])
        .map(|(&source, &without)| SourceContribution {
            source,
            without,
            fraction: (total - without) / total,
            excess_fraction: (total - without) / (total - noiseless),
        })
        .collect();
    Ok(NoiseBudget { total, noiseless, contributions })
}
