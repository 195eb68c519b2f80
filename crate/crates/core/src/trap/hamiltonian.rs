use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2};

use super::chain::TrapConfig;
pub use super::pulse::DrivenIon;
use super::pulse::{driven_ions, PulseSequence};
use crate::error::{invalid, Result};
use crate::quantum::{
    displacement_operator, embed_sparse, kron, ladder_operator, CompositeSpace, Operator, Slot,
};
use crate::{CMatrix, C64};

/// How the spin-motion factor `e^{iβ_j(t)}` is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    /// Exact displacement operators (no Lamb-Dicke expansion).
    Exact,
    /// Taylor expansion to `order` (1 or 2) in η. Dropping the `carrier`
    /// removes the zeroth-order term, leaving only sideband couplings.
    Series { order: u8, carrier: bool },
}

/// Interaction-picture Hamiltonian of the driven ions, divided by ħ (rad/s).
///
/// ```text
/// H(t) = Σ_j −Ω_j(t) cos(Φ(t) + φ_j) (σ⁺_j e^{i(β_j(t) − φ_j)} + h.c.) + χ Σ_{l<l'} n_l n_{l'}
/// ```
///
/// with `Φ(t) = ∫ μ_eff` and `e^{iβ_j(t)} = ⊗_l D(iη_{jl} e^{iθ_l(t)})`,
/// `θ_l(t) = (ν_l + δ)t + φ_l`. The operator is never formed densely during
/// integration: since `D(α e^{iθ}) = P D(α) P†` with `P = e^{iθ a†a}`, each
/// ion's motional factor is a fixed matrix conjugated by a diagonal phase.
#[derive(Debug, Clone)]
pub struct GateHamiltonian {
    trap: TrapConfig,
    pulse: PulseSequence,
    expansion: Expansion,
    space: CompositeSpace,
    ions: Vec<DrivenIon>,
    /// Motional factor at t = 0 for each driven ion, on the mode space.
    couplings: Vec<CMatrix>,
    /// Phonon numbers `[mode index][mode]`.
    occupations: Vec<Vec<f64>>,
    kerr: Vec<f64>,
}

/// `H(t)` frozen at one time: per-ion spin coefficients and motional factors.
#[derive(Debug, Clone)]
pub struct DriveFrame {
    /// Coefficient of `σ⁺_j ⊗ E_j`.
    pub coefficients: Vec<C64>,
    pub factors: Vec<CMatrix>,
    pub factors_dag: Vec<CMatrix>,
}

impl GateHamiltonian {
    pub fn new(trap: &TrapConfig, pulse: &PulseSequence, cutoffs: &[usize], expansion: Expansion) -> Result<Self> {
        trap.validate()?;
        pulse.validate()?;
        if cutoffs.len() != trap.n_modes() {
            return invalid(format!("{} cutoffs for {} modes", cutoffs.len(), trap.n_modes()));
        }
        if let Expansion::Series { order, .. } = expansion {
            if !(1..=2).contains(&order) {
                return invalid("series expansion order must be 1 or 2");
            }
        }
        let ions = driven_ions(pulse, trap)?;
        let space = CompositeSpace::new(ions.len(), cutoffs.to_vec())?;
        let mode_space = CompositeSpace::new(0, cutoffs.to_vec())?;
        let eta = trap.lamb_dicke_params();

        let mut couplings = Vec::with_capacity(ions.len());
        for ion in &ions {
            let row = &eta[ion.chain_index];
            let e = match expansion {
                Expansion::Exact => {
                    let mut acc: Option<CMatrix> = None;
                    for (l, &c) in cutoffs.iter().enumerate() {
                        let d = displacement_operator(C64::new(0.0, row[l]), c)?;
                        acc = Some(match acc {
                            None => d,
                            Some(a) => kron(&a, &d),
                        });
                    }
                    acc.expect("at least one mode")
                }
                Expansion::Series { order, carrier } => {
                    let dim = mode_space.dimension();
                    let mut beta = Array2::<C64>::zeros((dim, dim));
                    for (l, &c) in cutoffs.iter().enumerate() {
                        let a = ladder_operator(c)?;
                        let x = &a + &crate::quantum::dagger(&a);
                        beta = beta + embed_sparse(&x, Slot::Mode(l), &mode_space)?.to_dense() * C64::new(row[l], 0.0);
                    }
                    let mut e = beta.mapv(|z| z * C64::new(0.0, 1.0));
                    if order >= 2 {
                        e = e - beta.dot(&beta) * C64::new(0.5, 0.0);
                    }
                    if carrier {
                        e = e + crate::quantum::identity(dim);
                    }
                    e
                }
            };
            couplings.push(e);
        }

        let occupations: Vec<Vec<f64>> = (0..mode_space.dimension())
            .map(|m| mode_space.digits(m).into_iter().map(|n| n as f64).collect())
            .collect();
        let kerr = occupations
            .iter()
            .map(|n| {
                let mut acc = 0.0;
                for a in 0..n.len() {
                    for b in a + 1..n.len() {
                        acc += n[a] * n[b];
                    }
                }
                trap.cross_kerr * acc
            })
            .collect();

        Ok(Self {
            trap: trap.clone(),
            pulse: pulse.clone(),
            expansion,
            space,
            ions,
            couplings,
            occupations,
            kerr,
        })
    }

    /// Same model on different Fock cutoffs.
    pub fn with_cutoffs(&self, cutoffs: &[usize]) -> Result<Self> {
        Self::new(&self.trap, &self.pulse, cutoffs, self.expansion)
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn ions(&self) -> &[DrivenIon] {
        &self.ions
    }

    pub fn pulse(&self) -> &PulseSequence {
        &self.pulse
    }

    pub fn trap(&self) -> &TrapConfig {
        &self.trap
    }

    pub fn expansion(&self) -> Expansion {
        self.expansion
    }

    /// Qubit slots of the two targets.
    pub fn target_qubits(&self) -> (usize, usize) {
        let find = |w: usize| self.ions.iter().position(|i| i.target == Some(w)).expect("targets are driven");
        (find(0), find(1))
    }

    /// Cross-Kerr energies on the full space diagonal.
    pub fn kerr_diagonal(&self) -> Vec<f64> {
        let q = self.space.qubit_dimension();
        (0..q).flat_map(|_| self.kerr.iter().copied()).collect()
    }

    pub fn has_kerr(&self) -> bool {
        self.kerr.iter().any(|&k| k != 0.0)
    }

    /// Evaluates the drive at time `t` inside segment `segment`.
    pub fn frame(&self, segment: usize, t: f64) -> DriveFrame {
        let amp = self.pulse.signed_amplitude(segment);
        let beat = self.pulse.drive_phase(self.trap.at_coefficient, segment, t);
        let coefficients = self
            .ions
            .iter()
            .map(|ion| {
                let c = -ion.factor * amp * (beat + ion.phase).cos();
                C64::from_polar(c, -ion.phase)
            })
            .collect();

        let theta: Vec<f64> = self
            .trap
            .mode_freqs
            .iter()
            .zip(&self.trap.mode_phases)
            .map(|(nu, phi)| (nu + self.trap.drift) * t + phi)
            .collect();
        let phases: Vec<C64> = self
            .occupations
            .iter()
            .map(|n| C64::from_polar(1.0, n.iter().zip(&theta).map(|(a, b)| a * b).sum()))
            .collect();

        let mut factors = Vec::with_capacity(self.couplings.len());
        let mut factors_dag = Vec::with_capacity(self.couplings.len());
        for e0 in &self.couplings {
            let e = Array2::from_shape_fn(e0.raw_dim(), |(a, b)| phases[a] * e0[[a, b]] * phases[b].conj());
            factors_dag.push(crate::quantum::dagger(&e));
            factors.push(e);
        }
        DriveFrame { coefficients, factors, factors_dag }
    }

    /// `out += scale · H_drive · x` for the drive part of `H` (no cross-Kerr).
    pub fn apply_drive(&self, frame: &DriveFrame, x: &CMatrix, scale: C64, out: &mut CMatrix) {
        let m = self.space.mode_dimension();
        let nq = self.space.n_qubits();
        let one = C64::new(1.0, 0.0);
        for (j, g) in frame.coefficients.iter().enumerate() {
            if g.norm() == 0.0 {
                continue;
            }
            let bit = 1usize << (nq - 1 - j);
            let up = scale * g;
            let down = scale * g.conj();
            for q0 in (0..1usize << nq).filter(|q| q & bit == 0) {
                let q1 = q0 | bit;
                let (lo, hi) = (q0 * m, q1 * m);
                // σ⁺ raises qubit j: block q1 ← E · block q0
                general_mat_mul(
                    up,
                    &frame.factors[j],
                    &x.slice(s![lo..lo + m, ..]),
                    one,
                    &mut out.slice_mut(s![hi..hi + m, ..]),
                );
                general_mat_mul(
                    down,
                    &frame.factors_dag[j],
                    &x.slice(s![hi..hi + m, ..]),
                    one,
                    &mut out.slice_mut(s![lo..lo + m, ..]),
                );
            }
        }
    }

    /// Dense `H(t)` including cross-Kerr.
    pub fn dense(&self, segment: usize, t: f64) -> CMatrix {
        let d = self.space.dimension();
        let frame = self.frame(segment, t);
        let mut h = Array2::zeros((d, d));
        self.apply_drive(&frame, &crate::quantum::identity(d), C64::new(1.0, 0.0), &mut h);
        for (i, k) in self.kerr_diagonal().into_iter().enumerate() {
            h[[i, i]] += k;
        }
        h
    }

    /// Dense `H(t)` as an operator, picking the segment from `t`.
    pub fn at(&self, t: f64) -> Operator {
        let seg = self.pulse.segment_index(t);
        Operator::new(self.space.clone(), self.dense(seg, t)).expect("dimensions agree")
    }
}

/// `H(t)` on `space`, which must hold exactly the driven ions and the
/// trap's modes.
pub fn hamiltonian_at(pulse: &PulseSequence, trap: &TrapConfig, space: &CompositeSpace, t: f64) -> Result<Operator> {
    let ions = driven_ions(pulse, trap)?;
    if space.n_qubits() != ions.len() || space.n_modes() != trap.n_modes() {
        return invalid(format!(
            "space has {} qubits and {} modes; the drive needs {} ions and {} modes",
            space.n_qubits(),
            space.n_modes(),
            ions.len(),
            trap.n_modes()
        ));
    }
    Ok(GateHamiltonian::new(trap, pulse, space.fock_cutoffs(), Expansion::Exact)?.at(t))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{dagger, embed, hermiticity_defect, max_abs_diff, number_operator, qubit_operators};
    use crate::{AMU, TWO_PI};

    fn trap(n_modes: usize) -> TrapConfig {
        let b = 0.5f64.sqrt();
        let (freqs, matrix) = if n_modes == 1 {
            (vec![TWO_PI * 3e6], vec![vec![b], vec![b]])
        } else {
            (vec![TWO_PI * 3e6, TWO_PI * 2.9e6], vec![vec![b, b], vec![b, -b]])
        };
        let mut t = TrapConfig::new(171.0 * AMU, freqs, matrix, 2.0e7).unwrap();
        t.spillover_fraction = 0.0;
        t
    }

    #[test]
    fn zero_drive_zero_hamiltonian() {
        let t = trap(2);
        let p = PulseSequence::new(1e-5, vec![0.0, 0.0], TWO_PI * 3.02e6, (0, 1)).unwrap();
        let h = GateHamiltonian::new(&t, &p, &[3, 3], Expansion::Exact).unwrap();
        assert!(h.dense(1, 7.3e-6).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn hermitian_at_random_times() {
        let mut t = trap(2);
        t.cross_kerr = 40.0;
        t.mode_phases = vec![0.4, 1.9];
        let p = PulseSequence::new(1e-5, vec![3e5, 1e5, 2e5], TWO_PI * 3.02e6, (0, 1)).unwrap();
        let h = GateHamiltonian::new(&t, &p, &[4, 3], Expansion::Exact).unwrap();
        for k in 0..7 {
            let time = 1e-5 * (k as f64 * 0.137 + 0.01);
            let m = h.at(time);
            assert!(hermiticity_defect(m.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn matches_explicit_construction() {
        // Build Eq.-style H from embedded operators and dense exponentials.
        let mut t = trap(2);
        t.mode_phases = vec![0.3, -0.8];
        t.drift = TWO_PI * 1e3;
        let p = PulseSequence::new(1e-5, vec![2e5, 4e5], TWO_PI * 3.05e6, (0, 1)).unwrap();
        let cut = [4, 3];
        let h = GateHamiltonian::new(&t, &p, &cut, Expansion::Exact).unwrap();
        let space = h.space().clone();
        let time = 6.1e-6;
        let eta = t.lamb_dicke_params();
        let d = space.dimension();
        let mut expect = Array2::<C64>::zeros((d, d));
        let sp = qubit_operators().sigma_plus;
        for (j, ion) in h.ions().iter().enumerate() {
            let mut disp = crate::quantum::identity(d);
            for l in 0..2 {
                let alpha = C64::new(0.0, eta[ion.chain_index][l])
                    * t.position_phase(l, time).conj();
                let dl = displacement_operator(alpha, cut[l]).unwrap();
                disp = disp.dot(embed(&dl, Slot::Mode(l), &space).unwrap().matrix());
            }
            let spj = embed(&sp, Slot::Qubit(j), &space).unwrap();
            let term = spj.matrix().dot(&disp) * C64::from_polar(1.0, -ion.phase);
            let coeff = -p.amplitudes[1] * (p.detuning * time + ion.phase).cos();
            expect = expect + (&term + &dagger(&term)) * C64::new(coeff, 0.0);
        }
        assert!(max_abs_diff(&h.dense(1, time), &expect) < 1e-9 * 4e5);
    }

    #[test]
    fn linear_in_amplitudes() {
        let t = trap(1);
        let p1 = PulseSequence::new(1e-5, vec![1e5, 0.0], TWO_PI * 3.02e6, (0, 1)).unwrap();
        let p2 = PulseSequence::new(1e-5, vec![3e5, 0.0], TWO_PI * 3.02e6, (0, 1)).unwrap();
        let h1 = GateHamiltonian::new(&t, &p1, &[5], Expansion::Exact).unwrap().dense(0, 2e-6);
        let h2 = GateHamiltonian::new(&t, &p2, &[5], Expansion::Exact).unwrap().dense(0, 2e-6);
        assert!(max_abs_diff(&(h1 * C64::new(3.0, 0.0)), &h2) < 1e-9);
    }

    #[test]
    fn cross_kerr_commutes_with_number_operators() {
        let mut t = trap(2);
        t.cross_kerr = 25.0;
        let p = PulseSequence::new(1e-5, vec![0.0], TWO_PI * 3.02e6, (0, 1)).unwrap();
        let h = GateHamiltonian::new(&t, &p, &[3, 4], Expansion::Exact).unwrap();
        let hm = Operator::new(h.space().clone(), h.dense(0, 1e-6)).unwrap();
        assert!(hm.matrix().iter().any(|z| z.norm() > 0.0));
        for l in 0..2 {
            let c = h.space().fock_cutoffs()[l];
            let n = embed(&number_operator(c).unwrap(), Slot::Mode(l), h.space()).unwrap();
            assert!(hm.commutator(&n).unwrap().matrix().iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn periodic_at_commensurate_times() {
        // With δ = 0, φ_l = 0 and μ = 2ν/2... the motional factor repeats
        // every 2π/ν and the beat note every 2π/μ; pick μ = ν/1 so both do.
        let t = trap(1);
        let nu = t.mode_freqs[0];
        let p = PulseSequence::new(1e-5, vec![2e5], nu * 1.5, (0, 1)).unwrap();
        let h = GateHamiltonian::new(&t, &p, &[5], Expansion::Exact).unwrap();
        let period = 2.0 * TWO_PI / nu; // 2 mode periods = 3 beat periods
        let a = h.dense(0, 1.3e-7);
        let b = h.dense(0, 1.3e-7 + period);
        assert!(max_abs_diff(&a, &b) < 1e-6 * 2e5);
    }

    #[test]
    fn series_tracks_exact_for_small_eta() {
        // Compare away from the truncation edge, where the truncated series
        // misses products through levels above the cutoff.
        let mut t = trap(1);
        t.delta_k *= 0.01;
        let p = PulseSequence::new(1e-5, vec![2e5], TWO_PI * 3.02e6, (0, 1)).unwrap();
        let build = |e| GateHamiltonian::new(&t, &p, &[8], e).unwrap().dense(0, 3e-6);
        let low_block_diff = |a: &CMatrix, b: &CMatrix| {
            let mut worst = 0.0f64;
            for i in 0..32 {
                for j in 0..32 {
                    if i % 8 < 4 && j % 8 < 4 {
                        worst = worst.max((a[[i, j]] - b[[i, j]]).norm());
                    }
                }
            }
            worst
        };
        let exact = build(Expansion::Exact);
        let e1 = low_block_diff(&exact, &build(Expansion::Series { order: 1, carrier: true }));
        let e2 = low_block_diff(&exact, &build(Expansion::Series { order: 2, carrier: true }));
        assert!(e2 < 1e-3 * e1, "{e2} vs {e1}");
        assert!(e2 < 1e-9 * 2e5);
    }

    #[test]
    fn rejects_mismatched_space() {
        let t = trap(1);
        let p = PulseSequence::new(1e-5, vec![2e5], TWO_PI * 3.02e6, (0, 1)).unwrap();
        let bad = CompositeSpace::new(3, vec![4]).unwrap();
        assert!(hamiltonian_at(&p, &t, &bad, 0.0).is_err());
        let good = CompositeSpace::new(2, vec![4]).unwrap();
        assert!(hamiltonian_at(&p, &t, &good, 0.0).is_ok());
    }
}
