//! Anti-state verification and the σ_y plus partial-transposition
//! universal-NOT recipe.

use serde::Serialize;

use crate::correlations::{CorrelationSource, PauliTransform};
use crate::error::{Error, Result};
use crate::linalg::{conjugate_local_product, sigma_y, transpose_index_bits};
use crate::state::{qubit_bit, DensityMatrix, HermitianOperator, PSD_TOLERANCE};

pub const ANTI_TOLERANCE: f64 = 1e-9;

/// Largest register for which every order is swept.
pub const MAX_SWEEP_QUBITS: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderDeviation {
    pub order: usize,
    /// `max |T(ρ̄) + T(ρ)|` over words of this order.
    pub flip_deviation: f64,
    /// `max |T(ρ̄) - T(ρ)|` over words of this order.
    pub preserve_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntiReport {
    pub n_qubits: usize,
    pub is_full_order_anti: bool,
    pub odd_orders_flipped: bool,
    pub even_orders_preserved: bool,
    /// Full-order flip deviation.
    pub max_deviation: f64,
    pub odd_deviation: f64,
    pub even_deviation: f64,
    pub tolerance: f64,
    pub orders: Vec<OrderDeviation>,
}

fn sweep_cost(n: usize) -> u128 {
    (1u128 << (2 * n)) * (1u128 << n)
}

/// Values of all `4^n` words, lexicographic over `0xyz`.
pub(crate) fn all_word_values<S: CorrelationSource + ?Sized>(state: &S) -> Result<Vec<f64>> {
    let n = state.n_qubits();
    if n > MAX_SWEEP_QUBITS {
        return Err(Error::WorkBudgetExceeded { cost: sweep_cost(n), budget: sweep_cost(MAX_SWEEP_QUBITS) });
    }
    let mut transform = PauliTransform::all_orders(n);
    Ok(state.pauli_transform(&mut transform).to_vec())
}

/// Number of non-identity letters of the word at a lexicographic index.
pub(crate) fn order_of_index(mut index: usize, n: usize) -> usize {
    let mut order = 0;
    for _ in 0..n {
        order += !index.is_multiple_of(4) as usize;
        index /= 4;
    }
    order
}

pub fn antistate_check<A, B>(rho: &A, rho_bar: &B) -> Result<AntiReport>
where
    A: CorrelationSource + ?Sized,
    B: CorrelationSource + ?Sized,
{
    antistate_check_with_tolerance(rho, rho_bar, ANTI_TOLERANCE)
}

pub fn antistate_check_with_tolerance<A, B>(rho: &A, rho_bar: &B, tolerance: f64) -> Result<AntiReport>
where
    A: CorrelationSource + ?Sized,
    B: CorrelationSource + ?Sized,
{
    let n = rho.n_qubits();
    if rho_bar.n_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho_bar.n_qubits() });
    }
    let t = all_word_values(rho)?;
    let t_bar = all_word_values(rho_bar)?;

    let mut orders: Vec<OrderDeviation> =
        (1..=n).map(|order| OrderDeviation { order, flip_deviation: 0.0, preserve_deviation: 0.0 }).collect();
    for (index, (a, b)) in t.iter().zip(&t_bar).enumerate().skip(1) {
        let entry = &mut orders[order_of_index(index, n) - 1];
        entry.flip_deviation = entry.flip_deviation.max((b + a).abs());
        entry.preserve_deviation = entry.preserve_deviation.max((b - a).abs());
    }

    let max_deviation = orders[n - 1].flip_deviation;
    let odd_deviation = orders.iter().filter(|o| o.order % 2 == 1).map(|o| o.flip_deviation).fold(0.0, f64::max);
    let even_deviation = orders.iter().filter(|o| o.order % 2 == 0).map(|o| o.preserve_deviation).fold(0.0, f64::max);
    Ok(AntiReport {
        n_qubits: n,
        is_full_order_anti: max_deviation <= tolerance,
        odd_orders_flipped: odd_deviation <= tolerance,
        even_orders_preserved: even_deviation <= tolerance,
        max_deviation,
        odd_deviation,
        even_deviation,
        tolerance,
        orders,
    })
}

/// Outcome of `(σ_y^{⊗A} ρ σ_y^{⊗A})^{T_A}`.
#[derive(Debug, Clone)]
pub struct UnotResult {
    pub subset: Vec<usize>,
    pub operator: HermitianOperator,
    pub min_eigenvalue: f64,
    pub physical: bool,
    /// Full-order flip deviation between `ρ` and the output, when physical.
    pub anti_deviation: Option<f64>,
}

impl UnotResult {
    pub fn output(&self) -> Option<DensityMatrix> {
        if self.physical {
            self.operator.clone().into_density().ok()
        } else {
            None
        }
    }
}

pub fn universal_not_attempt(rho: &DensityMatrix, subset: &[usize]) -> Result<UnotResult> {
    universal_not_attempt_with_tolerance(rho, subset, PSD_TOLERANCE)
}

fn checked_subset(n: usize, subset: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() || sorted.iter().any(|&q| q >= n) {
        return Err(Error::InvalidPartition(format!("subset {subset:?} must list distinct qubits below {n}")));
    }
    if sorted.len().is_multiple_of(2) {
        return Err(Error::InvalidPartition(format!(
            "subset {subset:?} has even size; the map needs an odd number of qubits"
        )));
    }
    Ok(sorted)
}

/// `(σ_y^{⊗A} X σ_y^{⊗A})^{T_A}` on any Hermitian operator. The map is its
/// own inverse.
pub fn universal_not_operator(op: &HermitianOperator, subset: &[usize]) -> Result<HermitianOperator> {
    let n = op.n_qubits();
    let sorted = checked_subset(n, subset)?;
    let ops: Vec<_> = (0..n).map(|q| sorted.contains(&q).then(sigma_y)).collect();
    let conjugated = conjugate_local_product(op.matrix(), n, &ops);
    let mask = sorted.iter().fold(0, |acc, &q| acc | qubit_bit(n, q));
    Ok(HermitianOperator::from_matrix_unchecked(n, transpose_index_bits(&conjugated, mask)))
}

/// `subset` holds 0-based qubit positions; it must have odd size and may
/// cover the whole register.
pub fn universal_not_attempt_with_tolerance(
    rho: &DensityMatrix,
    subset: &[usize],
    tolerance: f64,
) -> Result<UnotResult> {
    let n = rho.n_qubits();
    let sorted = checked_subset(n, subset)?;
    let operator = universal_not_operator(&rho.as_operator(), &sorted)?;
    let min_eigenvalue = operator.min_eigenvalue();
    let physical = min_eigenvalue >= -tolerance;

    let anti_deviation = if physical {
        let output = DensityMatrix::from_matrix_unchecked(n, operator.matrix().clone());
        let deviation = full_order_flip_deviation(rho, &output);
        if deviation > ANTI_TOLERANCE {
            return Err(Error::Consistency(format!("physical output is not an anti-state: deviation {deviation:e}")));
        }
        Some(deviation)
    } else {
        None
    };
    Ok(UnotResult { subset: sorted, operator, min_eigenvalue, physical, anti_deviation })
}

fn full_order_flip_deviation(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let mut transform = PauliTransform::full_order(a.n_qubits());
    let ta = transform.density(a).to_vec();
    let tb = transform.density(b);
    ta.iter().zip(tb).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max)
}
