use ndarray::Array2;

use super::noise::{build_jump_operators, Jump, JumpOperator, NoiseModel};
use crate::error::{invalid, Result};
use crate::quantum::{dagger, kron, CompositeSpace, SparseOperator};
use crate::trap::GateHamiltonian;
use crate::{CMatrix, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Right-hand side of `ρ̇ = −i[H(t), ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`.
///
/// Diagonal pieces (cross-Kerr energies, and `Σ L†L` for the static jumps,
/// which is diagonal for every trap noise source) are applied elementwise.
/// The drive enters through [`GateHamiltonian::apply_drive`] and is never
/// formed densely.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    space: CompositeSpace,
    drive: Option<GateHamiltonian>,
    noise: Option<NoiseModel>,
    static_hamiltonian: Option<SparseOperator>,
    jumps: Vec<Jump>,
    sandwiches: Vec<SparseOperator>,
    decay: Option<SparseOperator>,
    /// `−i e_i − ½ g_i` for the diagonal energies and decay rates.
    diagonal: Vec<C64>,
    /// Square of the intensity-jump scale.
    drive_jump: Option<f64>,
}

/// Scratch buffers reused across right-hand-side evaluations.
#[derive(Debug, Clone)]
pub struct Workspace {
    z: CMatrix,
    zt: CMatrix,
    w: CMatrix,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        let z = CMatrix::zeros((dim, dim));
        Self { zt: z.clone(), w: z.clone(), z }
    }
}

impl MasterEquation {
    /// Gate dynamics: drive Hamiltonian, cross-Kerr and the jumps of `noise`.
    pub fn gate(hamiltonian: GateHamiltonian, noise: &NoiseModel) -> Result<Self> {
        let jumps = build_jump_operators(noise, &hamiltonian)?;
        let energies = hamiltonian.kerr_diagonal();
        let space = hamiltonian.space().clone();
        Self::assemble(space, Some(hamiltonian), Some(noise.clone()), None, energies, jumps)
    }

    /// Time-independent problem with an arbitrary Hamiltonian and jumps
    /// (jump operators include the square roots of their rates).
    pub fn constant(space: CompositeSpace, hamiltonian: Option<SparseOperator>, jumps: Vec<SparseOperator>) -> Result<Self> {
        let d = space.dimension();
        if hamiltonian.as_ref().is_some_and(|h| h.dim() != d) || jumps.iter().any(|l| l.dim() != d) {
            return invalid(format!("operators must act on dimension {d}"));
        }
        let (energies, static_h) = match hamiltonian {
            None => (vec![0.0; d], None),
            Some(h) => match h.as_diagonal() {
                Some(diag) => (diag.into_iter().map(|z| z.re).collect(), None),
                None => (vec![0.0; d], Some(h)),
            },
        };
        let jumps = jumps
            .into_iter()
            .enumerate()
            .map(|(k, op)| Jump {
                source: super::noise::NoiseSource::Heating,
                label: format!("L{k}"),
                operator: JumpOperator::Static(op),
            })
            .collect();
        Self::assemble(space, None, None, static_h, energies, jumps)
    }

    fn assemble(
        space: CompositeSpace,
        drive: Option<GateHamiltonian>,
        noise: Option<NoiseModel>,
        static_hamiltonian: Option<SparseOperator>,
        energies: Vec<f64>,
        jumps: Vec<Jump>,
    ) -> Result<Self> {
        let d = space.dimension();
        let mut sandwiches = Vec::new();
        let mut decay_sum: Option<SparseOperator> = None;
        let mut drive_jump = None;
        for jump in &jumps {
            match &jump.operator {
                JumpOperator::Static(l) => {
                    let ldl = l.adjoint().mul(l);
                    decay_sum = Some(match decay_sum {
                        None => ldl,
                        Some(acc) => acc.add(&ldl),
                    });
                    sandwiches.push(l.clone());
                }
                JumpOperator::Drive { scale } => {
                    if drive.is_none() {
                        return invalid("drive-proportional jump without a drive");
                    }
                    *drive_jump.get_or_insert(0.0) += scale * scale;
                }
            }
        }
        let mut diagonal: Vec<C64> = energies.iter().map(|&e| -I * e).collect();
        let decay = match decay_sum.as_ref().map(|g| g.as_diagonal()) {
            None => None,
            Some(Some(g)) => {
                for (c, gi) in diagonal.iter_mut().zip(g) {
                    *c -= 0.5 * gi.re;
                }
                None
            }
            Some(None) => decay_sum,
        };
        debug_assert_eq!(diagonal.len(), d);
        Ok(Self { space, drive, noise, static_hamiltonian, jumps, sandwiches, decay, diagonal, drive_jump })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn hamiltonian(&self) -> Option<&GateHamiltonian> {
        self.drive.as_ref()
    }

    /// Target qubit slots, when the equation models a gate.
    pub fn target_qubits(&self) -> Option<(usize, usize)> {
        self.drive.as_ref().map(|h| h.target_qubits())
    }

    /// The same gate model on new Fock cutoffs; `None` for constant problems,
    /// whose operators cannot be rebuilt.
    pub fn resized(&self, cutoffs: &[usize]) -> Option<Result<Self>> {
        let (h, noise) = (self.drive.as_ref()?, self.noise.as_ref()?);
        Some(h.with_cutoffs(cutoffs).and_then(|h| Self::gate(h, noise)))
    }

    /// `out = ρ̇` at time `t` inside `segment`.
    pub fn rhs(&self, segment: usize, t: f64, rho: &CMatrix, out: &mut CMatrix, work: &mut Workspace) {
        let d = self.space.dimension();
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let z = &mut work.z;
        z.fill(zero);

        if let Some(h) = &self.drive {
            let frame = h.frame(segment, t);
            h.apply_drive(&frame, rho, one, z);
            if let Some(s) = self.drive_jump {
                // H ρ H = H (Hρ)†, H² ρ = H (Hρ)
                work.zt.assign(&z.t());
                work.zt.mapv_inplace(|v| v.conj());
                out.fill(zero);
                h.apply_drive(&frame, &work.zt, C64::new(s, 0.0), out);
                work.w.fill(zero);
                h.apply_drive(&frame, z, C64::new(-0.5 * s, 0.0), &mut work.w);
                for i in 0..d {
                    for j in 0..d {
                        out[[i, j]] += work.w[[i, j]] + work.w[[j, i]].conj();
                    }
                }
            } else {
                out.fill(zero);
            }
        } else {
            out.fill(zero);
        }
        if let Some(hs) = &self.static_hamiltonian {
            hs.mul_dense_into(rho, one, z);
        }

        // −i(Z − Z†) plus the diagonal energies and decay
        let zs = z.as_slice().expect("standard layout");
        let rs = rho.as_slice().expect("standard layout");
        let os = out.as_slice_mut().expect("standard layout");
        for i in 0..d {
            let ci = self.diagonal[i];
            for j in 0..d {
                let k = i * d + j;
                let coherent = -I * (zs[k] - zs[j * d + i].conj());
                os[k] += coherent + rs[k] * (ci + self.diagonal[j].conj());
            }
        }

        for l in &self.sandwiches {
            l.sandwich_into(rho, 1.0, out);
        }
        if let Some(g) = &self.decay {
            let w = &mut work.w;
            w.fill(zero);
            g.mul_dense_into(rho, C64::new(-0.5, 0.0), w);
            for i in 0..d {
                for j in 0..d {
                    out[[i, j]] += w[[i, j]] + w[[j, i]].conj();
                }
            }
        }
    }

    /// Dense `H(t)` (drive, cross-Kerr and any static part).
    pub fn dense_hamiltonian(&self, segment: usize, t: f64) -> CMatrix {
        let mut h = match &self.drive {
            Some(g) => g.dense(segment, t),
            None => Array2::from_diag(&ndarray::Array1::from_iter(
                self.diagonal.iter().map(|c| C64::new(-c.im, 0.0)),
            )),
        };
        if let Some(hs) = &self.static_hamiltonian {
            h = h + hs.to_dense();
        }
        h
    }

    /// Row-major vectorized Liouvillian, `vec(ρ̇) = 𝓛 vec(ρ)` with
    /// `vec(ρ)[i·d + j] = ρ_ij`. Dense and `d² × d²`: small systems only.
    pub fn superoperator(&self, segment: usize, t: f64) -> CMatrix {
        let d = self.space.dimension();
        let id = crate::quantum::identity(d);
        let h = self.dense_hamiltonian(segment, t);
        let mut out = (kron(&h, &id) - kron(&id, &h.t().to_owned())).mapv(|z| -I * z);
        for jump in &self.jumps {
            let l = match (&jump.operator, &self.drive) {
                (JumpOperator::Drive { .. }, Some(g)) => jump.matrix_at(g, segment, t),
                (JumpOperator::Static(op), _) => op.to_dense(),
                _ => unreachable!("checked in assemble"),
            };
            let ldl = dagger(&l).dot(&l);
            out = out + kron(&l, &l.mapv(|z| z.conj()));
            out = out - (kron(&ldl, &id) + kron(&id, &ldl.t().to_owned())).mapv(|z| z * 0.5);
        }
        out
    }
}
