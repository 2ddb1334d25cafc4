//! State and operator data model.
//!
//! Basis convention: qubit 0 (the leftmost qubit in ket notation) is the most
//! significant bit of a basis index, so `|q0 q1 ... q(n-1)>` has index
//! `q0 * 2^(n-1) + ... + q(n-1)`. Qubit positions in this crate are 0-based.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub type C64 = Complex<f64>;

/// Default hard cap on register size.
pub const DEFAULT_MAX_QUBITS: usize = 14;
/// Allowed deviation of the squared norm (pure) or trace (mixed) from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Allowed entrywise deviation from Hermiticity.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_qubits(n: usize, cap: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidParameters("a register needs at least one qubit".into()));
    }
    if n > cap || n >= usize::BITS as usize - 1 {
        return Err(Error::QubitCapExceeded { n, cap });
    }
    Ok(1usize << n)
}

/// Bit of a basis index that stores the given qubit.
#[inline]
pub fn qubit_bit(n_qubits: usize, qubit: usize) -> usize {
    1usize << (n_qubits - 1 - qubit)
}

/// A normalized pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Validates length and normalization; amplitudes further than
    /// [`NORM_TOLERANCE`] from unit norm are rejected.
    pub fn new(n_qubits: usize, amplitudes: DVector<C64>) -> Result<Self> {
        Self::with_cap(n_qubits, amplitudes, DEFAULT_MAX_QUBITS)
    }

    pub fn with_cap(n_qubits: usize, amplitudes: DVector<C64>, cap: usize) -> Result<Self> {
        let dim = check_qubits(n_qubits, cap)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
        }
        let norm_sq = amplitudes.norm_squared();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalize(n_qubits: usize, amplitudes: DVector<C64>) -> Result<Self> {
        let dim = check_qubits(n_qubits, DEFAULT_MAX_QUBITS)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        Ok(Self { n_qubits, amplitudes: amplitudes.unscale(norm) })
    }

    /// Computational basis state; `bits[q]` is the value of qubit `q`.
    pub fn basis(bits: &[bool]) -> Result<Self> {
        let n = bits.len();
        let dim = check_qubits(n, DEFAULT_MAX_QUBITS)?;
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits: n, amplitudes })
    }

    pub(crate) fn from_normalized_unchecked(n_qubits: usize, amplitudes: DVector<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { n_qubits: self.n_qubits, matrix: &self.amplitudes * self.amplitudes.adjoint() }
    }

    pub fn kron(&self, other: &PureState) -> Result<PureState> {
        self.kron_capped(other, DEFAULT_MAX_QUBITS)
    }

    pub fn kron_capped(&self, other: &PureState, cap: usize) -> Result<PureState> {
        let n = self.n_qubits + other.n_qubits;
        check_qubits(n, cap)?;
        Ok(PureState { n_qubits: n, amplitudes: self.amplitudes.kronecker(&other.amplitudes) })
    }

    /// Applies `sigma_x` to every qubit.
    pub fn flip_all(&self) -> PureState {
        let full = self.dim() - 1;
        let amplitudes = DVector::from_fn(self.dim(), |k, _| self.amplitudes[k ^ full]);
        PureState { n_qubits: self.n_qubits, amplitudes }
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_cap(n_qubits, matrix, DEFAULT_MAX_QUBITS)
    }

    pub fn with_cap(n_qubits: usize, matrix: DMatrix<C64>, cap: usize) -> Result<Self> {
        let op = HermitianOperator::with_cap(n_qubits, matrix, cap)?;
        op.into_density()
    }

    /// Convex combination of pure states. Weights must be non-negative and
    /// sum to one.
    pub fn mixture(terms: &[(f64, &PureState)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidParameters("empty mixture".into()))?;
        let n = first.1.n_qubits;
        let dim = first.1.dim();
        let mut total = 0.0;
        let mut matrix = DMatrix::zeros(dim, dim);
        for &(w, psi) in terms {
            if psi.n_qubits != n {
                return Err(Error::DimensionMismatch { expected: dim, found: psi.dim() });
            }
            if !(w >= 0.0) {
                return Err(Error::InvalidParameters(format!("negative mixture weight {w}")));
            }
            total += w;
            matrix += (&psi.amplitudes * psi.amplitudes.adjoint()) * C64::new(w, 0.0);
        }
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::TraceNotOne { trace: total });
        }
        Ok(Self { n_qubits: n, matrix })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = check_qubits(n_qubits, DEFAULT_MAX_QUBITS)?;
        let matrix = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        Ok(Self { n_qubits, matrix })
    }

    /// `(1 - p) * self + p * other`, `p` in `[0, 1]`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameters(format!("mixing weight {p} outside [0, 1]")));
        }
        let matrix = &self.matrix * C64::new(1.0 - p, 0.0) + &other.matrix * C64::new(p, 0.0);
        Ok(Self { n_qubits: self.n_qubits, matrix })
    }

    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: DMatrix<C64>) -> Self {
        Self { n_qubits, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<psi|rho|psi>`.
    pub fn expectation_projector(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        Ok(psi.amplitudes.dotc(&(&self.matrix * &psi.amplitudes)).re)
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator { n_qubits: self.n_qubits, matrix: self.matrix.clone() }
    }

    pub fn spectrum(&self) -> Vec<f64> {
        linalg::sorted_eigenvalues(&self.matrix)
    }

    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let n = self.n_qubits + other.n_qubits;
        check_qubits(n, DEFAULT_MAX_QUBITS)?;
        Ok(DensityMatrix { n_qubits: n, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// Frobenius distance to another operator of the same size.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// Hermitian operator that need not be positive, e.g. a partial transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

impl HermitianOperator {
    pub fn new(n_qubits: usize, matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_cap(n_qubits, matrix, DEFAULT_MAX_QUBITS)
    }

    pub fn with_cap(n_qubits: usize, matrix: DMatrix<C64>, cap: usize) -> Result<Self> {
        let dim = check_qubits(n_qubits, cap)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        let deviation = linalg::hermiticity_deviation(&matrix);
        if !(deviation <= HERMITIAN_TOLERANCE) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { n_qubits, matrix })
    }

    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: DMatrix<C64>) -> Self {
        Self { n_qubits, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Real eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::sorted_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum().first().copied().unwrap_or(f64::NAN)
    }

    /// Checks trace and positivity, returning a density matrix.
    pub fn into_density(self) -> Result<DensityMatrix> {
        let trace = self.trace();
        if (trace - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::TraceNotOne { trace });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -PSD_TOLERANCE {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityMatrix { n_qubits: self.n_qubits, matrix: self.matrix })
    }
}

/// Bipartition `A:B` of a register. Subsystem `A` is stored as a bit mask
/// over qubit positions (bit `q` set means qubit `q` is in `A`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Partition {
    n_qubits: usize,
    mask_a: u64,
}

impl Partition {
    /// `mask_a` bit `q` selects qubit `q`; `A` must be neither empty nor full.
    pub fn new(n_qubits: usize, mask_a: u64) -> Result<Self> {
        if !(2..=63).contains(&n_qubits) {
            return Err(Error::InvalidPartition(format!("a bipartition needs 2..=63 qubits, got {n_qubits}")));
        }
        let full = (1u64 << n_qubits) - 1;
        if mask_a & !full != 0 {
            return Err(Error::InvalidPartition(format!(
                "mask {mask_a:#b} selects qubits outside a {n_qubits}-qubit register"
            )));
        }
        if mask_a == 0 || mask_a == full {
            return Err(Error::InvalidPartition("subsystem A must be a proper nonempty subset".into()));
        }
        Ok(Self { n_qubits, mask_a })
    }

    pub fn from_qubits(n_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &q in qubits {
            if q >= n_qubits {
                return Err(Error::InvalidPartition(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            mask |= 1 << q;
        }
        Self::new(n_qubits, mask)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mask_a(&self) -> u64 {
        self.mask_a
    }

    pub fn contains(&self, qubit: usize) -> bool {
        qubit < self.n_qubits && self.mask_a >> qubit & 1 == 1
    }

    pub fn size_a(&self) -> usize {
        self.mask_a.count_ones() as usize
    }

    pub fn qubits_a(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.contains(q)).collect()
    }

    pub fn qubits_b(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| !self.contains(q)).collect()
    }

    pub fn complement(&self) -> Partition {
        let full = (1u64 << self.n_qubits) - 1;
        Partition { n_qubits: self.n_qubits, mask_a: full & !self.mask_a }
    }

    /// Mask of basis-index bits belonging to `A`.
    pub fn index_mask_a(&self) -> usize {
        self.qubits_a().into_iter().fold(0, |acc, q| acc | qubit_bit(self.n_qubits, q))
    }

    /// All `2^(n-1) - 1` bipartitions, with qubit 0 always in `A`.
    pub fn all(n_qubits: usize) -> Result<Vec<Partition>> {
        if !(2..=24).contains(&n_qubits) {
            return Err(Error::InvalidPartition(format!(
                "exhaustive enumeration supports 2..=24 qubits, got {n_qubits}"
            )));
        }
        let full = (1u64 << n_qubits) - 1;
        Ok((0..1u64 << (n_qubits - 1))
            .map(|rest| 1 | rest << 1)
            .filter(|&m| m != full)
            .map(|mask_a| Partition { n_qubits, mask_a })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PureStateFile {
    pub n_qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DensityMatrixFile {
    pub n_qubits: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// Either state file layout, distinguished by its `amplitudes` or `matrix`
/// key.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum StateFile {
    Pure(PureStateFile),
    Mixed(DensityMatrixFile),
}

impl From<&PureState> for PureStateFile {
    fn from(psi: &PureState) -> Self {
        PureStateFile { n_qubits: psi.n_qubits, amplitudes: psi.amplitudes.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl From<&DensityMatrix> for DensityMatrixFile {
    fn from(rho: &DensityMatrix) -> Self {
        let dim = rho.dim();
        DensityMatrixFile {
            n_qubits: rho.n_qubits,
            matrix: (0..dim)
                .map(|r| (0..dim).map(|c| [rho.matrix[(r, c)].re, rho.matrix[(r, c)].im]).collect())
                .collect(),
        }
    }
}

impl PureStateFile {
    pub fn into_state(self, cap: usize) -> Result<PureState> {
        let amps =
            DVector::from_iterator(self.amplitudes.len(), self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)));
        PureState::with_cap(self.n_qubits, amps, cap)
    }
}

impl DensityMatrixFile {
    pub fn into_state(self, cap: usize) -> Result<DensityMatrix> {
        let dim = self.matrix.len();
        if let Some(row) = self.matrix.iter().find(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
        }
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            let [re, im] = self.matrix[r][c];
            C64::new(re, im)
        });
        DensityMatrix::with_cap(self.n_qubits, matrix, cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized_amplitudes() {
        let amps = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(PureState::new(1, amps.clone()), Err(Error::NotNormalized { .. })));
        let psi = PureState::normalize(1, amps).unwrap();
        assert!((psi.amplitude(0).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_wrong_length_and_cap() {
        let amps = DVector::from_element(3, C64::new(1.0 / 3f64.sqrt(), 0.0));
        assert!(matches!(PureState::new(2, amps), Err(Error::DimensionMismatch { .. })));
        let amps = DVector::from_element(2, C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert!(matches!(PureState::with_cap(1, amps, 0), Err(Error::QubitCapExceeded { .. })));
    }

    #[test]
    fn basis_index_uses_qubit_zero_as_msb() {
        let psi = PureState::basis(&[false, true]).unwrap();
        assert_eq!(psi.amplitude(1), C64::new(1.0, 0.0));
        let psi = PureState::basis(&[true, false, false]).unwrap();
        assert_eq!(psi.amplitude(4), C64::new(1.0, 0.0));
    }

    #[test]
    fn density_validation() {
        let bad_trace = DMatrix::from_diagonal_element(2, 2, C64::new(0.6, 0.0));
        assert!(matches!(DensityMatrix::new(1, bad_trace), Err(Error::TraceNotOne { .. })));
        let negative = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.2, 0.0)],
        );
        assert!(matches!(DensityMatrix::new(1, negative), Err(Error::NotPositive { .. })));
        let skew = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.2, 0.0), C64::new(0.5, 0.0)],
        );
        assert!(matches!(DensityMatrix::new(1, skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn partition_rules() {
        assert!(Partition::new(3, 0).is_err());
        assert!(Partition::new(3, 0b111).is_err());
        assert!(Partition::new(3, 0b1000).is_err());
        let p = Partition::from_qubits(4, &[0, 2]).unwrap();
        assert_eq!(p.qubits_b(), vec![1, 3]);
        assert_eq!(p.index_mask_a(), 0b1010);
        assert_eq!(Partition::all(4).unwrap().len(), 7);
        assert_eq!(Partition::all(7).unwrap().len(), 63);
    }

    #[test]
    fn state_files_round_trip() {
        let psi = PureState::normalize(1, DVector::from_vec(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.7)])).unwrap();
        let text = serde_json::to_string(&PureStateFile::from(&psi)).unwrap();
        match serde_json::from_str::<StateFile>(&text).unwrap() {
            StateFile::Pure(f) => assert_eq!(f.into_state(DEFAULT_MAX_QUBITS).unwrap(), psi),
            StateFile::Mixed(_) => panic!("parsed as density matrix"),
        }
        let rho = psi.to_density();
        let text = serde_json::to_string(&DensityMatrixFile::from(&rho)).unwrap();
        match serde_json::from_str::<StateFile>(&text).unwrap() {
            StateFile::Mixed(f) => assert_eq!(f.into_state(DEFAULT_MAX_QUBITS).unwrap(), rho),
            StateFile::Pure(_) => panic!("parsed as pure state"),
        }
    }
}
