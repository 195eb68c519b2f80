//! Closed-form segment integrals of the first-sideband force `sin(μt) e^{iωt}`.

use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// `sin(x)/x`, exact at zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫_a^b e^{iwt} dt`; the `w → 0` limit is `b − a`.
pub(crate) fn exp_integral(w: f64, a: f64, b: f64) -> C64 {
    let h = b - a;
    C64::from_polar(h * sinc(w * h / 2.0), w * (a + b) / 2.0)
}

/// `∫_a^b e^{iωt} sin(μt) dt`.
pub(crate) fn sideband_integral(omega: f64, mu: f64, a: f64, b: f64) -> C64 {
    (exp_integral(omega + mu, a, b) - exp_integral(omega - mu, a, b)) / (2.0 * I)
}

/// `ψ_n(x) = ∫₀¹ sⁿ e^{xs} ds` for `n = 0..=n_max`.
fn psi(x: C64, n_max: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
    if x.norm() < 5.0 {
        // Σ_k x^k / (k! (n + k + 1))
        for (n, slot) in out.iter_mut().enumerate() {
            let mut term = C64::new(1.0, 0.0);
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..80 {
                let add = term / (n + k + 1) as f64;
                acc += add;
                if add.norm() < 1e-18 * acc.norm() {
                    break;
                }
                term = term * x / (k + 1) as f64;
            }
            *slot = acc;
        }
    } else {
        // forward recurrence is stable for n ≤ |x|
        let ex = x.exp();
        out[0] = (ex - 1.0) / x;
        for n in 1..=n_max {
            out[n] = (ex - n as f64 * out[n - 1]) / x;
        }
    }
    out
}

/// `F(x, y) = ∫₀¹ e^{xs} ∫₀ˢ e^{yu} du ds`.
fn nested_unit(x: C64, y: C64) -> C64 {
    if y.norm() < 1e-2 {
        // Σ_n yⁿ ψ_{n+1}(x) / (n+1)!
        const TERMS: usize = 6;
        let p = psi(x, TERMS + 1);
        let mut acc = C64::new(0.0, 0.0);
        let mut coeff = C64::new(1.0, 0.0);
        for n in 0..=TERMS {
            coeff /= (n + 1) as f64;
            acc += coeff * p[n + 1];
            coeff *= y;
        }
        acc
    } else {
        (psi(x + y, 0)[0] - psi(x, 0)[0]) / y
    }
}

/// `∫_a^b e^{ipt'} ∫_a^{t'} e^{iqt''} dt'' dt'`.
pub(crate) fn nested_exp_integral(p: f64, q: f64, a: f64, b: f64) -> C64 {
    let h = b - a;
    C64::from_polar(h * h, (p + q) * a) * nested_unit(I * (p * h), I * (q * h))
}

/// `∫_a^b dt' ∫_a^{t'} dt'' sin(μt') sin(μt'') sin(ω(t' − t''))`.
pub(crate) fn triangle_phase_integral(omega: f64, mu: f64, a: f64, b: f64) -> f64 {
    // sin(μt')e^{iωt'} · sin(μt'')e^{−iωt''}, expanded into exponentials
    let outer = [(omega + mu, 1.0), (omega - mu, -1.0)];
    let inner = [(mu - omega, 1.0), (-mu - omega, -1.0)];
    let mut acc = C64::new(0.0, 0.0);
    for (p, sp) in outer {
        for (q, sq) in inner {
            acc += sp * sq * nested_exp_integral(p, q, a, b);
        }
    }
    // the two 1/(2i) factors give −1/4
    (acc * -0.25).im
}

#[cfg(test)]
pub(crate) mod quadrature {
    /// Gauss–Legendre nodes and weights on [−1, 1].
    pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    let dp = {
                        let (mut p0, mut p1) = (1.0, z);
                        for k in 2..=n {
                            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                            p0 = p1;
                            p1 = p2;
                        }
                        n as f64 * (z * p1 - p0) / (z * z - 1.0)
                    };
                    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                    break;
                }
            }
            x[i] = z;
        }
        (x, w)
    }

    /// Composite Gauss–Legendre rule on [a, b].
    pub fn rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::quadrature::rule;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let r = rule(0.0, 2.0, 1, 8);
        let v: f64 = r.iter().map(|(t, w)| w * t.powi(15)).sum();
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn secular_limit_is_finite() {
        let v = sideband_integral(3.0, 3.0, 0.0, 2.0);
        // ∫ e^{3it} sin(3t) = ∫ (e^{6it} − 1)/(2i)
        let expect = (exp_integral(6.0, 0.0, 2.0) - 2.0) / (2.0 * I);
        assert!((v - expect).norm() < 1e-15);
        assert!(triangle_phase_integral(3.0, 3.0, 0.0, 2.0).is_finite());
        assert!(triangle_phase_integral(0.0, 0.0, 0.0, 2.0).abs() < 1e-15);
    }

    #[test]
    fn additivity_over_segments() {
        let (w, mu) = (7.3, 6.1);
        let whole = sideband_integral(w, mu, 0.5, 2.5);
        let split = sideband_integral(w, mu, 0.5, 1.5) + sideband_integral(w, mu, 1.5, 2.5);
        assert!((whole - split).norm() < 1e-14);
    }

    fn quad_sideband(w: f64, mu: f64, a: f64, b: f64) -> C64 {
        rule(a, b, 40, 20).into_iter().map(|(t, wt)| C64::from_polar(wt * (mu * t).sin(), w * t)).sum()
    }

    fn quad_triangle(w: f64, mu: f64, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for (t1, w1) in rule(a, b, 12, 16) {
            let inner: f64 = rule(a, t1, 12, 16)
                .into_iter()
                .map(|(t2, w2)| w2 * (mu * t2).sin() * (w * (t1 - t2)).sin())
                .sum();
            acc += w1 * (mu * t1).sin() * inner;
        }
        acc
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn sideband_matches_quadrature(w in 0.1f64..20.0, mu in 0.1f64..20.0, a in 0.0f64..2.0, len in 0.1f64..2.0) {
            let exact = sideband_integral(w, mu, a, a + len);
            let num = quad_sideband(w, mu, a, a + len);
            prop_assert!((exact - num).norm() < 1e-10 * (1.0 + exact.norm()));
        }

        #[test]
        fn triangle_matches_quadrature(w in 0.1f64..12.0, dmu in -2.0f64..2.0, a in 0.0f64..2.0, len in 0.1f64..1.5) {
            let mu = (w + dmu).abs().max(0.05);
            let exact = triangle_phase_integral(w, mu, a, a + len);
            let num = quad_triangle(w, mu, a, a + len);
            prop_assert!((exact - num).abs() < 1e-10 * (1.0 + exact.abs()), "{exact} vs {num}");
        }

        #[test]
        fn near_resonance_branch_is_continuous(w in 1.0f64..10.0, eps in -1e-3f64..1e-3) {
            let a = triangle_phase_integral(w, w + eps, 0.3, 1.3);
            let b = triangle_phase_integral(w, w + eps + 2e-2, 0.3, 1.3);
            // small parameter change, small value change
            prop_assert!((a - b).abs() < 0.1);
            let q = quad_triangle(w, w + eps, 0.3, 1.3);
            prop_assert!((a - q).abs() < 1e-10);
        }
    }
}
