use ndarray::{Array2, Zip};

use super::space::{CompositeSpace, Slot};
use crate::error::{invalid, Result};
use crate::{CMatrix, C64};

/// A dense operator on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: CompositeSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dimension();
        if matrix.dim() != (d, d) {
            return invalid(format!("matrix {:?} does not match space dimension {d}", matrix.dim()));
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: CompositeSpace) -> Self {
        let d = space.dimension();
        Self { space, matrix: super::identity(d) }
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

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), matrix: super::dagger(&self.matrix) }
    }

    pub fn dot(&self, other: &Operator) -> Result<Operator> {
        if self.space != other.space {
            return invalid("operator spaces differ");
        }
        Ok(Self { space: self.space.clone(), matrix: self.matrix.dot(&other.matrix) })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        let ab = self.dot(other)?;
        let ba = other.dot(self)?;
        Ok(Self { space: self.space.clone(), matrix: ab.matrix - ba.matrix })
    }
}

/// Compressed-row sparse complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            cols.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, values }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let triplets = m
            .indexed_iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|((r, c), &v)| (r, c, v))
            .collect();
        Self::from_triplets(m.nrows(), triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.triplets() {
            m[[r, c]] += v;
        }
        m
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &SparseOperator) -> Self {
        let mut triplets = Vec::new();
        for (r, k, a) in self.triplets() {
            for idx in other.row_ptr[k]..other.row_ptr[k + 1] {
                triplets.push((r, other.cols[idx], a * other.values[idx]));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    pub fn add(&self, other: &SparseOperator) -> Self {
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()).collect())
    }

    /// Diagonal entries if the matrix is diagonal.
    pub fn as_diagonal(&self) -> Option<Vec<C64>> {
        let mut diag = vec![C64::new(0.0, 0.0); self.dim];
        for (r, c, v) in self.triplets() {
            if r != c {
                return None;
            }
            diag[r] += v;
        }
        Some(diag)
    }

    /// `out += scale · self · x`.
    pub fn mul_dense_into(&self, x: &CMatrix, scale: C64, out: &mut CMatrix) {
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.values[k] * scale;
                let src = x.row(self.cols[k]);
                let mut dst = out.row_mut(r);
                Zip::from(&mut dst).and(&src).for_each(|d, &s| *d += v * s);
            }
        }
    }

    /// `out += scale · x · self†`.
    pub fn mul_dense_adjoint_into(&self, x: &CMatrix, scale: C64, out: &mut CMatrix) {
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.values[k].conj() * scale;
                let j = self.cols[k];
                for r in 0..x.nrows() {
                    out[[r, i]] += x[[r, j]] * v;
                }
            }
        }
    }

    /// `out += scale · self · x · self†`.
    pub fn sandwich_into(&self, x: &CMatrix, scale: f64, out: &mut CMatrix) {
        let mut tmp = Array2::zeros(x.raw_dim());
        self.mul_dense_into(x, C64::new(1.0, 0.0), &mut tmp);
        self.mul_dense_adjoint_into(&tmp, C64::new(scale, 0.0), out);
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ((i, j), &x) in a.indexed_iter() {
        if x.norm() == 0.0 {
            continue;
        }
        out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
            .zip_mut_with(b, |o, &y| *o = x * y);
    }
    out
}

/// Places a local operator on `slot`, identity elsewhere.
pub fn embed_sparse(op: &CMatrix, slot: Slot, space: &CompositeSpace) -> Result<SparseOperator> {
    let pos = space.slot_position(slot)?;
    let local = space.slot_dim(slot)?;
    if op.dim() != (local, local) {
        return invalid(format!("{:?} operator for {slot:?} of dimension {local}", op.dim()));
    }
    let dims = space.slot_dims();
    let stride: usize = dims[pos + 1..].iter().product();
    let outer: usize = dims[..pos].iter().product();
    let mut triplets = Vec::new();
    for ((a, b), &v) in op.indexed_iter() {
        if v.norm() == 0.0 {
            continue;
        }
        for o in 0..outer {
            let base = o * local * stride;
            for inner in 0..stride {
                triplets.push((base + a * stride + inner, base + b * stride + inner, v));
            }
        }
    }
    Ok(SparseOperator::from_triplets(space.dimension(), triplets))
}

/// Dense version of [`embed_sparse`].
pub fn embed(op: &CMatrix, slot: Slot, space: &CompositeSpace) -> Result<Operator> {
    let sparse = embed_sparse(op, slot, space)?;
    Operator::new(space.clone(), sparse.to_dense())
}
