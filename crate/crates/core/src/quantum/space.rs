use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A tensor slot of a [`CompositeSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Qubit(usize),
    Mode(usize),
}

/// `n_qubits` two-level systems followed by truncated Fock spaces.
///
/// Mode `l` keeps the levels `0..fock_cutoffs[l]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompositeSpace {
    n_qubits: usize,
    fock_cutoffs: Vec<usize>,
}

impl CompositeSpace {
    pub fn new(n_qubits: usize, fock_cutoffs: Vec<usize>) -> Result<Self> {
        if let Some(c) = fock_cutoffs.iter().find(|&&c| c < 2) {
            return invalid(format!("Fock cutoff {c} < 2"));
        }
        if n_qubits == 0 && fock_cutoffs.is_empty() {
            return invalid("empty composite space");
        }
        Ok(Self { n_qubits, fock_cutoffs })
    }

    pub fn qubits(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_modes(&self) -> usize {
        self.fock_cutoffs.len()
    }

    pub fn fock_cutoffs(&self) -> &[usize] {
        &self.fock_cutoffs
    }

    pub fn n_slots(&self) -> usize {
        self.n_qubits + self.fock_cutoffs.len()
    }

    /// `2^n_qubits`.
    pub fn qubit_dimension(&self) -> usize {
        1 << self.n_qubits
    }

    /// Product of the Fock cutoffs.
    pub fn mode_dimension(&self) -> usize {
        self.fock_cutoffs.iter().product()
    }

    pub fn dimension(&self) -> usize {
        self.qubit_dimension() * self.mode_dimension()
    }

    /// Local dimensions in slot order.
    pub fn slot_dims(&self) -> Vec<usize> {
        std::iter::repeat_n(2, self.n_qubits)
            .chain(self.fock_cutoffs.iter().copied())
            .collect()
    }

    /// Flat position of `slot` in the tensor order.
    pub fn slot_position(&self, slot: Slot) -> Result<usize> {
        match slot {
            Slot::Qubit(q) if q < self.n_qubits => Ok(q),
            Slot::Mode(l) if l < self.n_modes() => Ok(self.n_qubits + l),
            _ => invalid(format!("{slot:?} not in a space with {} qubits and {} modes", self.n_qubits, self.n_modes())),
        }
    }

    pub fn slot_at(&self, position: usize) -> Slot {
        if position < self.n_qubits {
            Slot::Qubit(position)
        } else {
            Slot::Mode(position - self.n_qubits)
        }
    }

    pub fn slot_dim(&self, slot: Slot) -> Result<usize> {
        Ok(match slot {
            Slot::Qubit(_) => {
                self.slot_position(slot)?;
                2
            }
            Slot::Mode(l) => {
                self.slot_position(slot)?;
                self.fock_cutoffs[l]
            }
        })
    }

    /// Stride of each slot in the flat index.
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.slot_dims();
        let mut strides = vec![1; dims.len()];
        for s in (0..dims.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        strides
    }

    /// Same space with mode `mode` truncated at `cutoff`.
    pub fn with_cutoff(&self, mode: usize, cutoff: usize) -> Result<Self> {
        if mode >= self.n_modes() {
            return invalid(format!("mode {mode} out of range"));
        }
        let mut cutoffs = self.fock_cutoffs.clone();
        cutoffs[mode] = cutoff;
        Self::new(self.n_qubits, cutoffs)
    }

    /// Split a flat index into per-slot digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let dims = self.slot_dims();
        let mut out = vec![0; dims.len()];
        for s in (0..dims.len()).rev() {
            out[s] = index % dims[s];
            index /= dims[s];
        }
        out
    }

    /// Inverse of [`CompositeSpace::digits`].
    pub fn flat_index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(self.slot_dims())
            .fold(0, |acc, (&d, n)| acc * n + d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_product() {
        let s = CompositeSpace::new(2, vec![3, 5]).unwrap();
        assert_eq!(s.dimension(), 4 * 15);
        assert_eq!(s.slot_dims(), vec![2, 2, 3, 5]);
        assert_eq!(s.strides(), vec![30, 15, 5, 1]);
    }

    #[test]
    fn rejects_small_cutoff() {
        assert!(CompositeSpace::new(1, vec![1]).is_err());
        assert!(CompositeSpace::new(0, vec![]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let s = CompositeSpace::new(2, vec![3, 4]).unwrap();
        for i in 0..s.dimension() {
            assert_eq!(s.flat_index(&s.digits(i)), i);
        }
        assert_eq!(s.digits(12 + 4 + 3), vec![0, 1, 1, 3]);
    }
}
