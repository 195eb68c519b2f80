use crate::error::{invalid, Result};
use crate::quantum::{embed_sparse, ladder_operator, partial_trace, DensityMatrix, Slot, SparseOperator};
use crate::{CMatrix, C64};

/// 4×4 state of the two target qubits.
pub fn reduced_gate_state(rho: &DensityMatrix, targets: (usize, usize)) -> Result<DensityMatrix> {
    if targets.0 == targets.1 {
        return invalid("target qubits must differ");
    }
    partial_trace(rho, &[Slot::Qubit(targets.0), Slot::Qubit(targets.1)])
}

fn check_two_qubit(rho4: &DensityMatrix) -> Result<&CMatrix> {
    if rho4.space().n_qubits() != 2 || rho4.space().n_modes() != 0 {
        return invalid("expected a two-qubit state");
    }
    Ok(rho4.matrix())
}

/// `⟨Φ|ρ|Φ⟩` for `|Φ⟩ = (|00⟩ + sign·i|11⟩)/√2`.
pub fn bell_fidelity(rho4: &DensityMatrix, sign: f64) -> Result<f64> {
    let m = check_two_qubit(rho4)?;
    let c = C64::new(0.0, sign);
    let v = m[[0, 0]] + m[[3, 3]] + c * m[[0, 3]] + c.conj() * m[[3, 0]];
    Ok(0.5 * v.re)
}

/// `1 − max_± ⟨Φ±|ρ|Φ±⟩`, clamped to `[0, 1]`.
pub fn infidelity(rho4: &DensityMatrix) -> Result<f64> {
    let f = bell_fidelity(rho4, 1.0)?.max(bell_fidelity(rho4, -1.0)?);
    Ok((1.0 - f).clamp(0.0, 1.0))
}

/// Even-parity population `ρ_{00,00} + ρ_{11,11}`.
pub fn parity_population(rho4: &DensityMatrix) -> Result<f64> {
    let m = check_two_qubit(rho4)?;
    Ok((m[[0, 0]].re + m[[3, 3]].re).clamp(0.0, 1.0))
}

/// `|++⟩⟨++| ⊗ a_l` on the full space, with normalized `|+⟩`.
pub(crate) fn plus_projected_ladder(
    space: &crate::quantum::CompositeSpace,
    targets: (usize, usize),
    mode: usize,
) -> Result<SparseOperator> {
    let plus = CMatrix::from_elem((2, 2), C64::new(0.5, 0.0));
    let cutoff = *space
        .fock_cutoffs()
        .get(mode)
        .ok_or_else(|| crate::Error::InvalidArgument(format!("mode {mode} not in space")))?;
    let pr = embed_sparse(&plus, Slot::Qubit(targets.0), space)?;
    let ps = embed_sparse(&plus, Slot::Qubit(targets.1), space)?;
    let a = embed_sparse(&ladder_operator(cutoff)?, Slot::Mode(mode), space)?;
    Ok(pr.mul(&ps).mul(&a))
}

/// `tr(O ρ)` for sparse `O`.
pub(crate) fn sparse_expectation(op: &SparseOperator, rho: &CMatrix) -> C64 {
    op.triplets().map(|(i, j, v)| v * rho[[j, i]]).sum()
}

/// `ā_l(t) = tr(|++⟩⟨++| ⊗ a_l ρ(t))` over a series of states.
pub fn mode_trajectory(series: &[(f64, DensityMatrix)], targets: (usize, usize), mode: usize) -> Result<Vec<(f64, C64)>> {
    let mut cache: Option<(crate::quantum::CompositeSpace, SparseOperator)> = None;
    let mut out = Vec::with_capacity(series.len());
    for (t, rho) in series {
        if cache.as_ref().is_none_or(|(s, _)| s != rho.space()) {
            cache = Some((rho.space().clone(), plus_projected_ladder(rho.space(), targets, mode)?));
        }
        let op = &cache.as_ref().expect("filled above").1;
        out.push((*t, sparse_expectation(op, rho.matrix())));
    }
    Ok(out)
}
