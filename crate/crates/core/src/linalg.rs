//! Dense complex linear algebra on qubit registers.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::state::{
    check_qubits, qubit_bit, DensityMatrix, HermitianOperator, Partition, PureState, C64, DEFAULT_MAX_QUBITS,
    HERMITIAN_TOLERANCE,
};

pub fn identity2() -> Matrix2<C64> {
    Matrix2::identity()
}

pub fn sigma_x() -> Matrix2<C64> {
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    Matrix2::new(o, l, l, o)
}

pub fn sigma_y() -> Matrix2<C64> {
    let o = C64::new(0.0, 0.0);
    Matrix2::new(o, C64::new(0.0, -1.0), C64::new(0.0, 1.0), o)
}

pub fn sigma_z() -> Matrix2<C64> {
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    Matrix2::new(l, o, o, -l)
}

/// Kronecker product of two matrices (or column vectors). When both sides
/// have power-of-two dimension the qubit count of the result is checked
/// against `cap`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>, cap: usize) -> Result<DMatrix<C64>> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) => (r, c),
        _ => return Err(Error::QubitCapExceeded { n: usize::MAX, cap }),
    };
    let qubits = rows.max(cols).trailing_zeros() as usize;
    if rows.max(cols).is_power_of_two() && qubits > cap {
        return Err(Error::QubitCapExceeded { n: qubits, cap });
    }
    Ok(a.kronecker(b))
}

/// Operator and state types that compose by tensor product.
pub trait Kron: Sized {
    fn kron_with(&self, other: &Self) -> Result<Self>;
}

impl Kron for PureState {
    fn kron_with(&self, other: &Self) -> Result<Self> {
        self.kron(other)
    }
}

impl Kron for DensityMatrix {
    fn kron_with(&self, other: &Self) -> Result<Self> {
        self.kron(other)
    }
}

impl Kron for HermitianOperator {
    fn kron_with(&self, other: &Self) -> Result<Self> {
        let n = self.n_qubits() + other.n_qubits();
        check_qubits(n, DEFAULT_MAX_QUBITS)?;
        Ok(HermitianOperator::from_matrix_unchecked(n, self.matrix().kronecker(other.matrix())))
    }
}

/// Scatters the low bits of `value` into the set bits of `mask`, lowest
/// first.
pub(crate) fn deposit(mut value: usize, mask: usize) -> usize {
    let mut out = 0;
    let mut m = mask;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        if value & 1 == 1 {
            out |= bit;
        }
        value >>= 1;
        m &= m - 1;
    }
    out
}

/// Traces out subsystem `A` of `part`, returning the state of `B` with the
/// remaining qubits in their original order.
pub fn partial_trace(rho: &DensityMatrix, part: &Partition) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if part.n_qubits() != n {
        return Err(Error::InvalidPartition(format!("partition is for {} qubits, state has {n}", part.n_qubits())));
    }
    let traced = part.index_mask_a();
    let kept = (rho.dim() - 1) & !traced;
    let n_kept = n - part.size_a();
    let kept_index: Vec<usize> = (0..1 << n_kept).map(|i| deposit(i, kept)).collect();
    let traced_index: Vec<usize> = (0..1 << part.size_a()).map(|a| deposit(a, traced)).collect();
    let m = rho.matrix();
    let out = DMatrix::from_fn(kept_index.len(), kept_index.len(), |i, j| {
        traced_index.iter().map(|&a| m[(kept_index[i] | a, kept_index[j] | a)]).sum::<C64>()
    });
    Ok(DensityMatrix::from_matrix_unchecked(n_kept, out))
}

/// Transposes the indices of subsystem `A`. The result is Hermitian with
/// unit trace but may have negative eigenvalues.
pub fn partial_transpose(rho: &DensityMatrix, part: &Partition) -> Result<HermitianOperator> {
    partial_transpose_matrix(rho.n_qubits(), rho.matrix(), part)
}

pub fn partial_transpose_operator(op: &HermitianOperator, part: &Partition) -> Result<HermitianOperator> {
    partial_transpose_matrix(op.n_qubits(), op.matrix(), part)
}

fn partial_transpose_matrix(n: usize, m: &DMatrix<C64>, part: &Partition) -> Result<HermitianOperator> {
    if part.n_qubits() != n {
        return Err(Error::InvalidPartition(format!("partition is for {} qubits, operator has {n}", part.n_qubits())));
    }
    Ok(HermitianOperator::from_matrix_unchecked(n, transpose_index_bits(m, part.index_mask_a())))
}

/// Transposes the basis-index bits selected by `index_mask`. Unlike a
/// [`Partition`], the mask may be empty or cover every qubit.
pub(crate) fn transpose_index_bits(m: &DMatrix<C64>, index_mask: usize) -> DMatrix<C64> {
    let a = index_mask;
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let src_row = (i & !a) | (j & a);
        let src_col = (j & !a) | (i & a);
        m[(src_row, src_col)]
    })
}

pub(crate) fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn sorted_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Ascending real spectrum of a Hermitian matrix.
pub fn hermitian_spectrum(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let deviation = hermiticity_deviation(m);
    if !(deviation <= HERMITIAN_TOLERANCE) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(sorted_eigenvalues(m))
}

/// Applies a single-qubit operator to `qubit` of a state vector in place.
pub fn apply_single_qubit(vec: &mut [C64], n_qubits: usize, qubit: usize, op: &Matrix2<C64>) {
    let bit = qubit_bit(n_qubits, qubit);
    for k in 0..vec.len() {
        if k & bit == 0 {
            let (a0, a1) = (vec[k], vec[k | bit]);
            vec[k] = op[(0, 0)] * a0 + op[(0, 1)] * a1;
            vec[k | bit] = op[(1, 0)] * a0 + op[(1, 1)] * a1;
        }
    }
}

/// `(op_0 ⊗ ... ⊗ op_(n-1)) |v>`.
pub fn apply_local_product(v: &DVector<C64>, n_qubits: usize, ops: &[Matrix2<C64>]) -> DVector<C64> {
    let mut out = v.clone();
    for (q, op) in ops.iter().enumerate() {
        apply_single_qubit(out.as_mut_slice(), n_qubits, q, op);
    }
    out
}

/// Left-multiplies every column of `m` by the product operator.
pub(crate) fn apply_local_product_left(
    m: &DMatrix<C64>,
    n_qubits: usize,
    ops: &[Option<Matrix2<C64>>],
) -> DMatrix<C64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let slice = col.as_mut_slice();
        for (q, op) in ops.iter().enumerate() {
            if let Some(op) = op {
                apply_single_qubit(slice, n_qubits, q, op);
            }
        }
    }
    out
}

/// Conjugates `m` by the product operator: `O m O^†`.
pub(crate) fn conjugate_local_product(m: &DMatrix<C64>, n_qubits: usize, ops: &[Option<Matrix2<C64>>]) -> DMatrix<C64> {
    let left = apply_local_product_left(m, n_qubits, ops);
    let right = apply_local_product_left(&left.adjoint(), n_qubits, ops);
    right.adjoint()
}
