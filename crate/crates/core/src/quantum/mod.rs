//! Hilbert-space primitives.
//!
//! Basis conventions used everywhere in the crate:
//!
//! - A qubit has basis order `|0⟩, |1⟩`, with `σ⁺ = |1⟩⟨0|` and
//!   `σᶻ = diag(−1, +1)` so that `σᶻ|1⟩ = +|1⟩`.
//! - A composite space orders its tensor slots qubits first (ascending ion
//!   index), then motional modes (ascending mode index). The first slot is
//!   the most significant digit of the flat index.

mod fock;
mod operator;
mod space;
mod state;

pub use fock::{
    displacement_operator, ladder_operator, number_operator, qubit_operators,
    thermal_populations, QubitOperators,
};
pub use operator::{embed, embed_sparse, kron, Operator, SparseOperator};
pub use space::{CompositeSpace, Slot};
pub use state::{
    partial_trace, resize_fock, thermal_state, DensityMatrix, Resized, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL,
};

use crate::{CMatrix, C64};
use ndarray::Array2;

/// Hermitian conjugate of a dense matrix.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// `max |A − B|` over all entries.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entry of `|A − A†|`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let n = a.nrows();
    let m = nalgebra::DMatrix::<C64>::from_fn(n, n, |i, j| 0.5 * (a[[i, j]] + a[[j, i]].conj()));
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub(crate) fn identity(n: usize) -> CMatrix {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}
