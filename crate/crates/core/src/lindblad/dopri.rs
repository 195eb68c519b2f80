//! Dormand–Prince 5(4) with the standard fourth-order continuous extension.

use crate::{CMatrix, C64};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order weights (identical to the last row of `A`: FSAL).
#[cfg(test)]
pub(crate) const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];

/// Fifth minus fourth order.
const E: [f64; 7] = [
    -71.0 / 57600.0,
    0.0,
    71.0 / 16695.0,
    -71.0 / 1920.0,
    17253.0 / 339200.0,
    -22.0 / 525.0,
    1.0 / 40.0,
];

/// Dense-output polynomial coefficients: stage `i` contributes
/// `Σ_p P[i][p] θ^{p+1}`.
pub(crate) const P: [[f64; 4]; 7] = [
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
    [0.0; 4],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
];

/// Method order used by the step-size controller.
pub const ORDER: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

/// One accepted step, with enough data for dense output.
pub struct AcceptedStep<'a> {
    pub t_old: f64,
    pub h: f64,
    pub y_old: &'a CMatrix,
    pub y_new: &'a CMatrix,
    stages: &'a [CMatrix; 7],
}

impl AcceptedStep<'_> {
    /// Continuous extension at `t ∈ [t_old, t_old + h]`.
    pub fn interpolate(&self, t: f64) -> CMatrix {
        let theta = ((t - self.t_old) / self.h).clamp(0.0, 1.0);
        let mut out = self.y_old.clone();
        for (i, k) in self.stages.iter().enumerate() {
            let mut w = 0.0;
            let mut pow = theta;
            for p in P[i] {
                w += p * pow;
                pow *= theta;
            }
            if w != 0.0 {
                out.scaled_add(C64::new(self.h * w, 0.0), k);
            }
        }
        out
    }
}

/// Why [`advance`] returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halt {
    Reached,
    /// The observer asked to stop after the step ending at the returned time.
    Requested,
    /// The controller could not meet the tolerance.
    StepUnderflow,
}

fn error_norm(err: &CMatrix, y0: &CMatrix, y1: &CMatrix, ctl: &StepControl) -> f64 {
    let mut worst = 0.0f64;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let scale = ctl.abs_tol + ctl.rel_tol * a.norm().max(b.norm());
        worst = worst.max(e.norm() / scale);
    }
    worst
}

/// Integrates `y' = f(t, y)` from `t0` towards `t1`, smooth on that interval.
///
/// `h` carries the step-size suggestion between calls. The observer sees
/// every accepted step and may return `true` to stop early.
#[allow(clippy::too_many_arguments)]
pub fn advance<F, O>(
    mut f: F,
    t0: f64,
    t1: f64,
    y: &mut CMatrix,
    h: &mut f64,
    ctl: &StepControl,
    stats: &mut StepStats,
    mut observe: O,
) -> (f64, Halt)
where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
    O: FnMut(&AcceptedStep<'_>) -> bool,
{
    let zero = || CMatrix::zeros(y.raw_dim());
    let mut k: [CMatrix; 7] = std::array::from_fn(|_| zero());
    let mut stage = zero();
    let mut y_new = zero();
    let mut err = zero();

    let mut t = t0;
    f(t, y, &mut k[0]);
    stats.rhs_evaluations += 1;

    if !(*h > 0.0) {
        let ny = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nf = k[0].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        *h = if nf > 0.0 { 0.01 * ny.max(1e-12) / nf } else { t1 - t0 };
    }

    let span = t1 - t0;
    while t1 - t > 1e-14 * span.abs().max(1e-300) {
        let mut step = h.min(ctl.max_step).min(t1 - t);
        // avoid a sliver of a step before the end
        if t1 - t - step < 1e-3 * step {
            step = t1 - t;
        }
        loop {
            for s in 1..7 {
                stage.assign(y);
                for (j, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        stage.scaled_add(C64::new(step * a, 0.0), &k[j]);
                    }
                }
                let (_, rest) = k.split_at_mut(s);
                if s < 6 {
                    f(t + C[s] * step, &stage, &mut rest[0]);
                } else {
                    y_new.assign(&stage);
                    f(t + step, &y_new, &mut rest[0]);
                }
                stats.rhs_evaluations += 1;
            }
            err.fill(C64::new(0.0, 0.0));
            for (i, e) in E.iter().enumerate() {
                if *e != 0.0 {
                    err.scaled_add(C64::new(step * e, 0.0), &k[i]);
                }
            }
            let en = error_norm(&err, y, &y_new, ctl);
            if en <= 1.0 {
                let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-1.0 / ORDER as f64)).clamp(0.2, 5.0) };
                let accepted = AcceptedStep { t_old: t, h: step, y_old: y, y_new: &y_new, stages: &k };
                let stop = observe(&accepted);
                stats.accepted += 1;
                t = if t1 - (t + step) <= 1e-14 * span.abs() { t1 } else { t + step };
                y.assign(&y_new);
                k.swap(0, 6);
                *h = step * factor;
                if stop {
                    return (t, Halt::Requested);
                }
                break;
            }
            stats.rejected += 1;
            let factor = if en.is_finite() { (0.9 * en.powf(-1.0 / ORDER as f64)).clamp(0.2, 1.0) } else { 0.2 };
            step *= factor;
            if step < 1e-12 * span.abs() {
                return (t, Halt::StepUnderflow);
            }
        }
    }
    (t1, Halt::Reached)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_elem((1, 1), C64::new(x, 0.0))
    }

    #[test]
    fn tableau_consistency() {
        for (s, row) in A.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert!((sum - C[s]).abs() < 1e-14, "row {s}");
        }
        for i in 0..7 {
            let dense_end: f64 = P[i].iter().sum();
            assert!((dense_end - B[i]).abs() < 1e-12, "stage {i}: {dense_end} vs {}", B[i]);
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(E.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn exponential_growth_accuracy() {
        let ctl = StepControl { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 1.0 };
        let mut y = scalar(1.0);
        let mut h = 0.0;
        let mut stats = StepStats::default();
        let mut samples = Vec::new();
        let (t, halt) = advance(
            |_, y, out| out.assign(y),
            0.0,
            2.0,
            &mut y,
            &mut h,
            &ctl,
            &mut stats,
            |s| {
                let mid = s.t_old + 0.37 * s.h;
                samples.push((mid, s.interpolate(mid)[[0, 0]].re));
                false
            },
        );
        assert_eq!((t, halt), (2.0, Halt::Reached));
        assert!((y[[0, 0]].re - 2f64.exp()).abs() < 1e-8 * 2f64.exp());
        for (tm, v) in samples {
            assert!((v - tm.exp()).abs() < 1e-7 * tm.exp(), "dense output at {tm}");
        }
    }

    #[test]
    fn convergence_order() {
        // Fixed-tolerance error should scale roughly as tol when tol shrinks.
        let run = |tol: f64| {
            let ctl = StepControl { rel_tol: tol, abs_tol: tol, max_step: 10.0 };
            let mut y = scalar(0.0);
            let mut h = 0.0;
            let mut stats = StepStats::default();
            advance(|t, _, out| out[[0, 0]] = C64::new((3.0 * t).cos(), 0.0), 0.0, 5.0, &mut y, &mut h, &ctl, &mut stats, |_| false);
            ((y[[0, 0]].re - (15.0f64).sin() / 3.0).abs(), stats.accepted)
        };
        let (e1, n1) = run(1e-6);
        let (e2, n2) = run(1e-9);
        assert!(e2 < e1);
        // fifth order: 1000× tighter tolerance costs about 1000^{1/5} ≈ 4× steps
        let ratio = n2 as f64 / n1 as f64;
        assert!(ratio > 2.0 && ratio < 8.0, "step ratio {ratio}");
    }
}
