//! Entanglement and genuine multipartite entanglement certifiers.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::annealer::{minimize_blocks, AnnealConfig, BlockSearch};
use crate::correlations::{binomial, full_tensor, tensor_entry, CorrelationSource, OrderFilter, Pauli, PauliWord};
use crate::error::{Error, Result};
use crate::linalg::{apply_local_product, deposit, partial_transpose, sigma_x, sigma_y};
use crate::state::{DensityMatrix, Partition, PureState, C64, PSD_TOLERANCE};
use crate::statelib::{dicke, dicke_pair, product_from_bloch, DickeParams, EvenFamily};

pub const BIPRODUCT_TOLERANCE: f64 = 1e-9;
pub const SUPPORT_TOLERANCE: f64 = 1e-9;
pub const OVERLAP_THRESHOLD: f64 = 1e-6;
/// Overlaps at or below this are treated as exact zeros.
pub const OVERLAP_ZERO: f64 = 1e-12;
pub const EXHAUSTIVE_MAX_QUBITS: usize = 7;
pub const MIN_SAMPLED_SPLITS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GmeMethod {
    Ppt,
    BiproductCondition,
    SubspaceOverlap,
    ProductMimicNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmeVerdict {
    pub certified: bool,
    pub inconclusive: bool,
    pub method: GmeMethod,
    pub witness_value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptResult {
    pub min_eigenvalue: f64,
    pub is_ppt: bool,
}

pub fn ppt_check(rho: &DensityMatrix, part: &Partition) -> Result<PptResult> {
    ppt_check_with_tolerance(rho, part, PSD_TOLERANCE)
}

pub fn ppt_check_with_tolerance(rho: &DensityMatrix, part: &Partition, tolerance: f64) -> Result<PptResult> {
    let min_eigenvalue = partial_transpose(rho, part)?.min_eigenvalue();
    Ok(PptResult { min_eigenvalue, is_ppt: min_eigenvalue >= -tolerance })
}

/// PPT test on every bipartition. Negativity on every cut is necessary but
/// not sufficient for GME above two qubits, so only two-qubit states can
/// be certified this way.
pub fn ppt_verdict(rho: &DensityMatrix, tolerance: f64) -> Result<GmeVerdict> {
    let mut worst_ppt = f64::INFINITY;
    let mut all_npt = true;
    for part in Partition::all(rho.n_qubits())? {
        let r = ppt_check_with_tolerance(rho, &part, tolerance)?;
        all_npt &= !r.is_ppt;
        worst_ppt = worst_ppt.min(r.min_eigenvalue);
    }
    let two = rho.n_qubits() == 2;
    Ok(GmeVerdict {
        certified: two && all_npt,
        inconclusive: !two && all_npt,
        method: GmeMethod::Ppt,
        witness_value: worst_ppt,
        detail: if all_npt {
            "partial transpose has a negative eigenvalue on every bipartition".into()
        } else {
            "state is PPT across at least one bipartition".into()
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiproductCheck {
    pub pair: (usize, usize),
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Last qubit of `A` and first qubit of `B`.
pub fn default_pair(part: &Partition) -> (usize, usize) {
    let a = part.qubits_a();
    let b = part.qubits_b();
    (*a.last().expect("A is nonempty"), b[0])
}

/// `T_xx T_yy = T_xy T_yx` on a pair straddling the cut, a necessary
/// condition for a pure state that is product across it.
pub fn biproduct_condition<S: CorrelationSource + ?Sized>(
    state: &S,
    part: &Partition,
    pair: Option<(usize, usize)>,
) -> Result<BiproductCheck> {
    let n = state.n_qubits();
    if part.n_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: part.n_qubits() });
    }
    let (i, j) = pair.unwrap_or_else(|| default_pair(part));
    if i >= n || j >= n || !part.contains(i) || part.contains(j) {
        return Err(Error::InvalidPartition(format!("pair ({i}, {j}) does not straddle the partition")));
    }
    let t = |a, b| tensor_entry(state, &PauliWord::pair(n, i, a, j, b));
    let lhs = t(Pauli::X, Pauli::X)? * t(Pauli::Y, Pauli::Y)?;
    let rhs = t(Pauli::X, Pauli::Y)? * t(Pauli::Y, Pauli::X)?;
    Ok(BiproductCheck { pair: (i, j), lhs, rhs, satisfied: (lhs - rhs).abs() <= BIPRODUCT_TOLERANCE })
}

/// Bipartitions covered by a sweep: all of them up to
/// [`EXHAUSTIVE_MAX_QUBITS`], otherwise a seeded sample of distinct splits.
pub fn sweep_partitions(n: usize, seed: u64) -> Result<Vec<Partition>> {
    if n <= EXHAUSTIVE_MAX_QUBITS {
        return Partition::all(n);
    }
    let total = (1usize << (n - 1)) - 1;
    let count = MIN_SAMPLED_SPLITS.min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = sample(&mut rng, total, count).into_vec();
    picks.sort_unstable();
    // Qubit 0 is always in A; pick the membership of the other n - 1.
    picks.into_iter().map(|rest| Partition::new(n, 1 | (rest as u64) << 1)).collect()
}

/// Pure-state GME test: the state is GME when the bi-product condition
/// fails on every bipartition.
pub fn biproduct_verdict(state: &PureState, seed: u64) -> Result<GmeVerdict> {
    let parts = sweep_partitions(state.n_qubits(), seed)?;
    let mut margin = f64::INFINITY;
    let mut satisfied_on = None;
    for part in &parts {
        let c = biproduct_condition(state, part, None)?;
        margin = margin.min((c.lhs - c.rhs).abs());
        if c.satisfied && satisfied_on.is_none() {
            satisfied_on = Some(part.qubits_a());
        }
    }
    let exhaustive = state.n_qubits() <= EXHAUSTIVE_MAX_QUBITS;
    let certified = satisfied_on.is_none() && exhaustive;
    Ok(GmeVerdict {
        certified,
        inconclusive: satisfied_on.is_some() || !exhaustive,
        method: GmeMethod::BiproductCondition,
        witness_value: margin,
        detail: match satisfied_on {
            Some(a) => format!("condition holds across A = {a:?}; no conclusion"),
            None if exhaustive => format!("condition fails on all {} bipartitions", parts.len()),
            None => format!("condition fails on {} sampled bipartitions", parts.len()),
        },
    })
}

/// Pair correlations of one bipartition of a Dicke mixture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DickeSplitCheck {
    pub mask_a: u64,
    pub pair: (usize, usize),
    pub lhs: f64,
    pub rhs: f64,
    /// Largest difference between `D^e` and `D^(n-e)` pair correlations.
    pub partner_deviation: f64,
    /// Largest `|<D^e| σ_a σ_b |D^(n-e)>|`.
    pub cross_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DickeCertificate {
    pub verdict: GmeVerdict,
    pub splits: Vec<DickeSplitCheck>,
}

/// GME test for `½|D^e><D^e| + ½|D^(n-e)><D^(n-e)|`. Every pure state of
/// the span has the same pair correlations as `D^e` (cross terms vanish by
/// excitation parity), so failing the bi-product condition on `D^e` on a
/// cut excludes every bi-product decomposition across it.
pub fn certify_dicke_mixture(n: usize, e: usize, coeffs: &[f64], seed: u64) -> Result<DickeCertificate> {
    if let Some(bad) = coeffs.iter().find(|c| !(**c > 0.0)) {
        return Err(Error::HypothesesViolated(format!("coefficient {bad} is not strictly positive")));
    }
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParameters(format!("the Dicke mixture needs an odd qubit count, got {n}")));
    }
    let params = DickeParams::new(n, e, coeffs.to_vec())?;
    let (d, d_bar) = dicke_pair(&params);

    let mut splits = Vec::new();
    let mut cache = std::collections::BTreeMap::new();
    for part in sweep_partitions(n, seed)? {
        let pair = default_pair(&part);
        let check = match cache.get(&pair) {
            Some(c) => DickeSplitCheck { mask_a: part.mask_a(), ..Clone::clone(c) },
            None => {
                let c = dicke_split_check(&d, &d_bar, &part, pair)?;
                cache.insert(pair, c.clone());
                c
            }
        };
        splits.push(check);
    }

    let consistent =
        splits.iter().all(|s| s.partner_deviation <= BIPRODUCT_TOLERANCE && s.cross_term <= BIPRODUCT_TOLERANCE);
    let margin = splits.iter().map(|s| s.lhs - s.rhs).fold(f64::INFINITY, f64::min);
    let exhaustive = n <= EXHAUSTIVE_MAX_QUBITS;
    let certified = consistent && margin > BIPRODUCT_TOLERANCE && exhaustive;
    let detail = if !consistent {
        "span correlations are not uniform; reduction does not apply".to_string()
    } else if margin <= BIPRODUCT_TOLERANCE {
        "bi-product condition holds on some bipartition".to_string()
    } else if exhaustive {
        format!("bi-product condition fails on all {} bipartitions", splits.len())
    } else {
        format!("bi-product condition fails on {} sampled bipartitions", splits.len())
    };
    Ok(DickeCertificate {
        verdict: GmeVerdict {
            certified,
            inconclusive: !certified && consistent && margin > BIPRODUCT_TOLERANCE,
            method: GmeMethod::BiproductCondition,
            witness_value: margin,
            detail,
        },
        splits,
    })
}

fn dicke_split_check(
    d: &PureState,
    d_bar: &PureState,
    part: &Partition,
    pair: (usize, usize),
) -> Result<DickeSplitCheck> {
    let n = d.n_qubits();
    let main = biproduct_condition(d, part, Some(pair))?;
    let mut partner_deviation = 0.0f64;
    let mut cross_term = 0.0f64;
    let (i, j) = pair;
    for a in [Pauli::X, Pauli::Y] {
        for b in [Pauli::X, Pauli::Y] {
            let word = PauliWord::pair(n, i, a, j, b);
            partner_deviation = partner_deviation.max((tensor_entry(d, &word)? - tensor_entry(d_bar, &word)?).abs());
            let mut ops = vec![crate::linalg::identity2(); n];
            ops[i] = if a == Pauli::X { sigma_x() } else { sigma_y() };
            ops[j] = if b == Pauli::X { sigma_x() } else { sigma_y() };
            let image = apply_local_product(d_bar.amplitudes(), n, &ops);
            cross_term = cross_term.max(d.amplitudes().dotc(&image).norm());
        }
    }
    Ok(DickeSplitCheck { mask_a: part.mask_a(), pair, lhs: main.lhs, rhs: main.rhs, partner_deviation, cross_term })
}

/// Orthonormal basis of the span of `states` by modified Gram-Schmidt.
fn orthonormal_basis(states: &[PureState]) -> Result<DMatrix<C64>> {
    let dim = states[0].dim();
    let mut columns: Vec<DVector<C64>> = Vec::new();
    for s in states {
        let mut v = s.amplitudes().clone();
        for q in &columns {
            let c = q.dotc(&v);
            v -= q * c;
        }
        let norm = v.norm();
        if norm < 1e-8 {
            return Err(Error::Consistency("family members are linearly dependent".into()));
        }
        columns.push(v.unscale(norm));
    }
    Ok(DMatrix::from_columns(&columns).resize(dim, columns.len(), C64::new(0.0, 0.0)))
}

/// `‖(1 - Π) ρ (1 - Π)‖_F` for the projector onto the family span.
pub fn support_residual(rho: &DensityMatrix, family: &EvenFamily) -> Result<f64> {
    if rho.n_qubits() != family.n_qubits() {
        return Err(Error::DimensionMismatch { expected: family.n_qubits(), found: rho.n_qubits() });
    }
    let q = orthonormal_basis(&family.members)?;
    let outside = |m: &DMatrix<C64>| m - &q * (q.adjoint() * m);
    let left = outside(rho.matrix());
    let both = outside(&left.adjoint()).adjoint();
    Ok(both.norm())
}

/// Support test against the span of the four family members followed by
/// the overlap with `ψ1`, which must vanish for any bi-separable state in
/// the span.
pub fn certify_even_family(rho: &DensityMatrix, family: &EvenFamily) -> Result<GmeVerdict> {
    let overlap = rho.expectation_projector(&family.members[0])?;
    let verdict = |certified, inconclusive, detail: String| GmeVerdict {
        certified,
        inconclusive,
        method: GmeMethod::SubspaceOverlap,
        witness_value: overlap,
        detail,
    };
    if !family.satisfies_hypotheses() {
        return Ok(verdict(false, true, "family coefficients are not all strictly positive".into()));
    }
    let residual = support_residual(rho, family)?;
    if residual > SUPPORT_TOLERANCE {
        return Ok(verdict(false, false, format!("support leaves the family span (residual {residual:e})")));
    }
    Ok(if overlap > OVERLAP_THRESHOLD {
        verdict(true, false, format!("in span with overlap {overlap} on ψ1"))
    } else if overlap > OVERLAP_ZERO {
        verdict(false, true, format!("overlap {overlap:e} is below the decision threshold"))
    } else {
        verdict(false, false, "in span and orthogonal to ψ1".into())
    })
}

/// Pair correlations `(T_xx, T_yy, T_zz)` of the symmetric Dicke state
/// `D^e_n` on any two qubits, in closed form.
pub fn dicke_pair_correlations(n: usize, e: usize) -> (f64, f64, f64) {
    assert!(n >= 2 && e <= n, "need n >= 2 and e <= n");
    let c = |a: i64, b: i64| if a < 0 || b < 0 || b > a { 0.0 } else { binomial(a as u64, b as u64) as f64 };
    let (n, e) = (n as i64, e as i64);
    let total = c(n, e);
    let txy = 2.0 * c(n - 2, e - 1) / total;
    let tzz = (c(n - 2, e) + c(n - 2, e - 2) - 2.0 * c(n - 2, e - 1)) / total;
    (txy, txy, tzz)
}

/// Smallest register size at which `T_zz` of `D^e_n` is non-negative.
pub fn mimic_threshold(e: usize) -> usize {
    let e = e as f64;
    ((1.0 + 4.0 * e + (1.0 + 8.0 * e).sqrt()) / 2.0 - 1e-12).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductMimic {
    pub n: usize,
    pub e: usize,
    pub threshold_n: usize,
    pub pair_correlations: [f64; 3],
    pub bloch_vector: Option<[f64; 3]>,
    /// Largest mismatch on nonzero order-2 entries, when a vector exists.
    pub max_deviation: Option<f64>,
}

impl ProductMimic {
    pub fn verdict(&self) -> GmeVerdict {
        GmeVerdict {
            certified: false,
            inconclusive: self.bloch_vector.is_none(),
            method: GmeMethod::ProductMimicNegative,
            witness_value: self.pair_correlations[2],
            detail: match self.bloch_vector {
                Some(_) => "pair correlations are reproduced by a product state".into(),
                None => "T_zz < 0; no product state reproduces the pair correlations".into(),
            },
        }
    }
}

/// Product state `|φ>^{⊗n}` reproducing the nonzero pair correlations of
/// the symmetric Dicke state, when one exists. The threshold uses
/// `min(e, n - e)` since `D^e_n` and `D^(n-e)_n` share pair correlations.
pub fn product_mimic(n: usize, e: usize) -> Result<ProductMimic> {
    if n < 2 || e == 0 || e >= n {
        return Err(Error::InvalidParameters(format!("need 1 <= e <= n - 1, got n = {n}, e = {e}")));
    }
    let (txx, tyy, tzz) = dicke_pair_correlations(n, e);
    let threshold_n = mimic_threshold(e.min(n - e));
    let mut out =
        ProductMimic { n, e, threshold_n, pair_correlations: [txx, tyy, tzz], bloch_vector: None, max_deviation: None };
    if n < threshold_n {
        return Ok(out);
    }
    let r = [txx.sqrt(), tyy.sqrt(), tzz.max(0.0).sqrt()];
    let mimic = product_from_bloch(n, r)?;
    let target = full_tensor(&dicke(&DickeParams::uniform(n, e)?), &OrderFilter::Orders([2].into()))?;
    let mut worst = 0.0f64;
    for (word, &value) in target.entries() {
        if value.abs() > 1e-12 {
            worst = worst.max((tensor_entry(&mimic, word)? - value).abs());
        }
    }
    if worst > 1e-9 {
        return Err(Error::Consistency(format!("product mimic deviates by {worst:e}")));
    }
    out.bloch_vector = Some(r);
    out.max_deviation = Some(worst);
    Ok(out)
}

/// Recognizes a symmetric or generalized Dicke pure state.
pub fn recognize_dicke(state: &PureState) -> Option<DickeParams> {
    let n = state.n_qubits();
    let amps = state.amplitudes();
    let e = (0..amps.len()).find(|&k| amps[k].norm() > 1e-12)?.count_ones() as usize;
    let params_patterns = crate::statelib::dicke_patterns(n, e);
    let mut coeffs = Vec::with_capacity(params_patterns.len());
    for bits in &params_patterns {
        let index = bits.iter().fold(0, |acc, &b| acc << 1 | b as usize);
        let a = amps[index];
        if a.im.abs() > 1e-12 || a.re <= 1e-12 {
            return None;
        }
        coeffs.push(a.re);
    }
    let params = DickeParams::normalized(n, e, coeffs).ok()?;
    ((dicke(&params).amplitudes() - amps).norm() < 1e-9).then_some(params)
}

/// Recognizes `½|D^e><D^e| + ½|D^(n-e)><D^(n-e)|` with `e < n/2` from the
/// diagonal weights, confirmed by reconstruction.
pub fn recognize_dicke_mixture(rho: &DensityMatrix) -> Option<DickeParams> {
    let n = rho.n_qubits();
    if n.is_multiple_of(2) {
        return None;
    }
    let m = rho.matrix();
    let first = (0..rho.dim()).find(|&k| m[(k, k)].re > 1e-12)?;
    let weight = first.count_ones() as usize;
    let e = weight.min(n - weight);
    let coeffs: Vec<f64> = crate::statelib::dicke_patterns(n, e)
        .iter()
        .map(|bits| {
            let k = bits.iter().fold(0, |acc, &b| acc << 1 | b as usize);
            (2.0 * m[(k, k)].re).max(0.0).sqrt()
        })
        .collect();
    let params = DickeParams::normalized(n, e, coeffs).ok()?;
    let rebuilt = crate::statelib::dicke_mixture(&params).ok()?;
    (rebuilt.distance(rho) < 1e-9).then_some(params)
}

/// Best bi-product state found for one bipartition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsificationPoint {
    pub mask_a: u64,
    pub residual: f64,
    pub overlap: f64,
    pub objective: f64,
}

/// Penalized search for a bi-product state in the family span with
/// nonzero `ψ1` overlap. Minimizes `residual - ratio * overlap` over
/// `|ξ>_A |η>_B` on every bipartition, where `residual = 1 - ‖Π v‖²`.
/// A value below zero is a counterexample with `residual < ratio * overlap`.
pub fn falsify_even_family(family: &EvenFamily, ratio: f64, cfg: &AnnealConfig) -> Result<Vec<FalsificationPoint>> {
    let n = family.n_qubits();
    let q = orthonormal_basis(&family.members)?;
    let psi1 = family.members[0].amplitudes().clone();
    let mut out = Vec::new();
    for part in Partition::all(n)? {
        let mask_a = part.index_mask_a();
        let mask_b = ((1usize << n) - 1) & !mask_a;
        let (size_a, size_b) = (part.size_a(), n - part.size_a());
        let embed = |blocks: &[Vec<C64>]| {
            let mut v = DVector::zeros(1 << n);
            for (ia, &xa) in blocks[0].iter().enumerate() {
                let base = deposit(ia, mask_a);
                for (ib, &yb) in blocks[1].iter().enumerate() {
                    v[base | deposit(ib, mask_b)] = xa * yb;
                }
            }
            v
        };
        let measure = |v: &DVector<C64>| {
            let inside = q.adjoint() * v;
            let residual = (1.0 - inside.norm_squared()).max(0.0);
            let overlap = psi1.dotc(v).norm_sqr();
            (residual, overlap)
        };
        let search = BlockSearch { block_dims: vec![1 << size_a, 1 << size_b] };
        let result = minimize_blocks(&search, cfg, |blocks: &[Vec<C64>]| {
            let (r, o) = measure(&embed(blocks));
            r - ratio * o
        })?;
        let (residual, overlap) = measure(&embed(&result.best_blocks));
        out.push(FalsificationPoint { mask_a: part.mask_a(), residual, overlap, objective: result.best_objective });
    }
    Ok(out)
}
