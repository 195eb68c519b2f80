use ndarray::Array2;

use super::fock::thermal_populations;
use super::operator::kron;
use super::space::{CompositeSpace, Slot};
use crate::error::{invalid, Error, Result};
use crate::{CMatrix, C64};

/// Tolerances a physical state must meet.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: CompositeSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix without checking physicality; see [`DensityMatrix::validate`].
    pub fn new(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dimension();
        if matrix.dim() != (d, d) {
            return invalid(format!("matrix {:?} does not match space dimension {d}", matrix.dim()));
        }
        Ok(Self { space, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `ket`.
    pub fn pure(space: CompositeSpace, ket: &[C64]) -> Result<Self> {
        if ket.len() != space.dimension() {
            return invalid(format!("ket of length {} for dimension {}", ket.len(), space.dimension()));
        }
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return invalid("zero ket");
        }
        let d = ket.len();
        let matrix = Array2::from_shape_fn((d, d), |(i, j)| ket[i] * ket[j].conj() / (norm * norm));
        Ok(Self { space, matrix })
    }

    /// Computational basis projector `|i⟩⟨i|`.
    pub fn basis(space: CompositeSpace, index: usize) -> Result<Self> {
        let d = space.dimension();
        if index >= d {
            return invalid(format!("basis index {index} ≥ dimension {d}"));
        }
        let mut matrix = Array2::zeros((d, d));
        matrix[[index, index]] = C64::new(1.0, 0.0);
        Ok(Self { space, matrix })
    }

    pub fn maximally_mixed(space: CompositeSpace) -> Self {
        let d = space.dimension();
        let matrix = Array2::from_diag_elem(d, C64::new(1.0 / d as f64, 0.0));
        Self { space, matrix }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    /// `tr ρ²`
    pub fn purity(&self) -> f64 {
        // ρ Hermitian: tr ρ² = Σ |ρ_ij|²
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        super::hermiticity_defect(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        super::hermitian_eigenvalues(&self.matrix)[0]
    }

    /// `tr(O ρ)` for an operator on the same space.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.dim() != self.matrix.dim() {
            return invalid("operator dimension mismatch");
        }
        let mut acc = C64::new(0.0, 0.0);
        for ((i, j), &o) in op.indexed_iter() {
            if o.norm() > 0.0 {
                acc += o * self.matrix[[j, i]];
            }
        }
        Ok(acc)
    }

    /// Checks Hermiticity, unit trace and numerical positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return invalid(format!("not Hermitian: defect {herm:.3e}"));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return invalid(format!("trace {tr} differs from 1"));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return invalid(format!("minimum eigenvalue {min:.3e} is negative"));
        }
        Ok(())
    }

    /// `self ⊗ other`. Slot ordering requires `self` to carry no modes or
    /// `other` to carry no qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.space.n_modes() > 0 && other.space.n_qubits() > 0 {
            return invalid("tensor product would place qubits after modes");
        }
        let cutoffs = self
            .space
            .fock_cutoffs()
            .iter()
            .chain(other.space.fock_cutoffs())
            .copied()
            .collect();
        let space = CompositeSpace::new(self.space.n_qubits() + other.space.n_qubits(), cutoffs)?;
        Ok(Self { space, matrix: kron(&self.matrix, &other.matrix) })
    }
}

/// Single-mode thermal state with Bose–Einstein populations.
pub fn thermal_state(nbar: f64, cutoff: usize) -> Result<DensityMatrix> {
    let p = thermal_populations(nbar, cutoff)?;
    let space = CompositeSpace::new(0, vec![cutoff])?;
    let matrix = Array2::from_diag(&ndarray::Array1::from_iter(p.into_iter().map(|x| C64::new(x, 0.0))));
    Ok(DensityMatrix { space, matrix })
}

/// Traces out every slot not in `keep`. The result keeps slot order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[Slot]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return invalid("partial trace must keep at least one slot");
    }
    let space = rho.space();
    let mut positions = keep.iter().map(|&s| space.slot_position(s)).collect::<Result<Vec<_>>>()?;
    positions.sort_unstable();
    positions.dedup();

    let dims = space.slot_dims();
    let n_kept_qubits = positions.iter().filter(|&&p| p < space.n_qubits()).count();
    let kept_cutoffs: Vec<usize> =
        positions.iter().filter(|&&p| p >= space.n_qubits()).map(|&p| dims[p]).collect();
    let reduced = CompositeSpace::new(n_kept_qubits, kept_cutoffs)?;
    let dk = reduced.dimension();
    let dt = space.dimension() / dk;

    // Group full indices by their traced-out part.
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dt];
    for i in 0..space.dimension() {
        let digits = space.digits(i);
        let (mut k, mut t) = (0usize, 0usize);
        for (s, (&d, &n)) in digits.iter().zip(&dims).enumerate() {
            if positions.binary_search(&s).is_ok() {
                k = k * n + d;
            } else {
                t = t * n + d;
            }
        }
        groups[t].push((i, k));
    }
    let m = rho.matrix();
    let mut out = Array2::zeros((dk, dk));
    for group in &groups {
        for &(i, ki) in group {
            for &(j, kj) in group {
                out[[ki, kj]] += m[[i, j]];
            }
        }
    }
    DensityMatrix::new(reduced, out)
}

/// Outcome of [`resize_fock`].
#[derive(Debug, Clone, PartialEq)]
pub struct Resized {
    pub state: DensityMatrix,
    /// Population on the levels that were cut away.
    pub discarded: f64,
}

/// Changes the cutoff of `mode`. Growing zero-pads; shrinking truncates,
/// renormalizes the trace and fails if more than `leakage_bound` population
/// is discarded.
pub fn resize_fock(rho: &DensityMatrix, mode: usize, new_cutoff: usize, leakage_bound: f64) -> Result<Resized> {
    let space = rho.space();
    let new_space = space.with_cutoff(mode, new_cutoff)?;
    let pos = space.slot_position(Slot::Mode(mode))?;
    let old_cutoff = space.fock_cutoffs()[mode];

    // old flat index → new flat index, None if truncated away
    let map: Vec<Option<usize>> = (0..space.dimension())
        .map(|i| {
            let digits = space.digits(i);
            (digits[pos] < new_cutoff).then(|| new_space.flat_index(&digits))
        })
        .collect();

    let m = rho.matrix();
    let discarded: f64 = map
        .iter()
        .enumerate()
        .filter(|(_, n)| n.is_none())
        .map(|(i, _)| m[[i, i]].re)
        .sum();
    if new_cutoff < old_cutoff && discarded > leakage_bound {
        return Err(Error::TruncationLeakage { discarded, bound: leakage_bound });
    }

    let d = new_space.dimension();
    let mut out = Array2::zeros((d, d));
    for (i, ni) in map.iter().enumerate() {
        let Some(ni) = ni else { continue };
        for (j, nj) in map.iter().enumerate() {
            if let Some(nj) = nj {
                out[[*ni, *nj]] = m[[i, j]];
            }
        }
    }
    if new_cutoff < old_cutoff && discarded != 0.0 {
        let tr = out.diag().sum().re;
        if tr > 0.0 {
            out.mapv_inplace(|z| z / tr);
        }
    }
    Ok(Resized { state: DensityMatrix::new(new_space, out)?, discarded })
}
