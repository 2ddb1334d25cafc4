//! Constructors for the state families used throughout the toolkit.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::correlations::binomial;
use crate::error::{Error, Result};
use crate::state::{check_qubits, qubit_bit, DensityMatrix, PureState, C64, DEFAULT_MAX_QUBITS, NORM_TOLERANCE};

fn check_unit_sum_of_squares(values: &[f64]) -> Result<()> {
    let norm_sq: f64 = values.iter().map(|v| v * v).sum();
    if !((norm_sq - 1.0).abs() <= NORM_TOLERANCE) {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// Parses a bit pattern such as `"1011"`.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::InvalidParameters(format!("bad bit {c:?} in pattern {s:?}"))),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

/// Real coefficients of a single-excitation superposition
/// `α_0 |10..0> + α_1 |01..0> + ... + α_(m-1) |00..1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct WParams {
    alphas: Vec<f64>,
}

impl WParams {
    /// Coefficients must be non-negative with unit sum of squares. Zeros are
    /// accepted; see [`WParams::satisfies_hypotheses`].
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidParameters("no coefficients".into()));
        }
        if let Some(bad) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidParameters(format!("coefficient {bad} is negative or not finite")));
        }
        check_unit_sum_of_squares(&alphas)?;
        check_qubits(alphas.len(), DEFAULT_MAX_QUBITS)?;
        Ok(WParams { alphas })
    }

    /// Rescales non-negative weights to unit norm.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameters("weights have zero norm".into()));
        }
        Self::new(weights.into_iter().map(|w| w / norm).collect())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::normalized(vec![1.0; m])
    }

    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// All coefficients strictly positive, as the subspace argument needs.
    pub fn satisfies_hypotheses(&self) -> bool {
        self.alphas.iter().all(|&a| a > 0.0)
    }
}

pub fn generalized_w(p: &WParams) -> PureState {
    let m = p.m();
    let mut amps = DVector::zeros(1 << m);
    for (q, &a) in p.alphas.iter().enumerate() {
        amps[qubit_bit(m, q)] = C64::new(a, 0.0);
    }
    PureState::from_normalized_unchecked(m, amps)
}

/// `σ_x^{⊗m}` applied to [`generalized_w`].
pub fn generalized_anti_w(p: &WParams) -> PureState {
    generalized_w(p).flip_all()
}

/// Positive coefficients of an `e`-excitation superposition, listed in
/// canonical pattern order: excited positions in lexicographic order, so
/// `11000, 10100, ..., 00011` for `n = 5, e = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeParams {
    n: usize,
    e: usize,
    coeffs: Vec<f64>,
}

impl DickeParams {
    pub fn new(n: usize, e: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_qubits(n, DEFAULT_MAX_QUBITS)?;
        if e > n {
            return Err(Error::InvalidParameters(format!("{e} excitations on {n} qubits")));
        }
        let expected = binomial(n as u64, e as u64) as usize;
        if coeffs.len() != expected {
            return Err(Error::InvalidParameters(format!(
                "expected {expected} coefficients for n = {n}, e = {e}, got {}",
                coeffs.len()
            )));
        }
        if let Some(bad) = coeffs.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::InvalidParameters(format!("coefficient {bad} is not strictly positive")));
        }
        check_unit_sum_of_squares(&coeffs)?;
        Ok(DickeParams { n, e, coeffs })
    }

    pub fn normalized(n: usize, e: usize, weights: Vec<f64>) -> Result<Self> {
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameters("weights have zero norm".into()));
        }
        Self::new(n, e, weights.into_iter().map(|w| w / norm).collect())
    }

    pub fn uniform(n: usize, e: usize) -> Result<Self> {
        let count = binomial(n as u64, e as u64) as usize;
        Self::normalized(n, e, vec![1.0; count])
    }

    /// Coefficients keyed by bit pattern, e.g. `{"110": 0.6, ...}`.
    pub fn from_map(n: usize, e: usize, map: &BTreeMap<String, f64>) -> Result<Self> {
        let patterns = dicke_patterns(n, e);
        let mut coeffs = Vec::with_capacity(patterns.len());
        for bits in &patterns {
            let key = format_bits(bits);
            let value = map
                .get(&key)
                .ok_or_else(|| Error::InvalidParameters(format!("missing coefficient for pattern {key}")))?;
            coeffs.push(*value);
        }
        if map.len() != patterns.len() {
            return Err(Error::InvalidParameters(format!("expected {} patterns, got {}", patterns.len(), map.len())));
        }
        Self::new(n, e, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn patterns(&self) -> Vec<Vec<bool>> {
        dicke_patterns(self.n, self.e)
    }

    pub fn is_uniform(&self) -> bool {
        let first = self.coeffs[0];
        self.coeffs.iter().all(|c| (c - first).abs() <= 1e-12)
    }

    /// Parameters of the `(n - e)`-excitation partner in which pattern `P`
    /// carries the coefficient of its bitwise complement.
    pub fn complement(&self) -> DickeParams {
        let partner = dicke_patterns(self.n, self.n - self.e);
        let index: BTreeMap<Vec<bool>, f64> = self.patterns().into_iter().zip(self.coeffs.iter().copied()).collect();
        let coeffs = partner.iter().map(|bits| index[&bits.iter().map(|b| !b).collect::<Vec<_>>()]).collect();
        DickeParams { n: self.n, e: self.n - self.e, coeffs }
    }
}

/// All `e`-excitation patterns of `n` qubits in canonical order.
pub fn dicke_patterns(n: usize, e: usize) -> Vec<Vec<bool>> {
    fn rec(n: usize, e: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<bool>>) {
        if current.len() == e {
            let mut bits = vec![false; n];
            for &q in current.iter() {
                bits[q] = true;
            }
            out.push(bits);
            return;
        }
        for q in start..n {
            current.push(q);
            rec(n, e, q + 1, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, e, 0, &mut Vec::new(), &mut out);
    out
}

pub fn dicke(p: &DickeParams) -> PureState {
    let mut amps = DVector::zeros(1 << p.n);
    for (bits, &c) in p.patterns().iter().zip(&p.coeffs) {
        amps[bits_to_index(bits)] = C64::new(c, 0.0);
    }
    PureState::from_normalized_unchecked(p.n, amps)
}

/// `D^e` and its complement-paired partner `D^(n-e)`.
pub fn dicke_pair(p: &DickeParams) -> (PureState, PureState) {
    (dicke(p), dicke(&p.complement()))
}

/// Even mixture `½|D^e><D^e| + ½|D^(n-e)><D^(n-e)|` for odd `n`.
pub fn dicke_mixture(p: &DickeParams) -> Result<DensityMatrix> {
    if p.n.is_multiple_of(2) {
        return Err(Error::InvalidParameters(format!("the Dicke mixture needs an odd qubit count, got {}", p.n)));
    }
    let (d, d_bar) = dicke_pair(p);
    DensityMatrix::mixture(&[(0.5, &d), (0.5, &d_bar)])
}

/// The four pure states and their uniform mixture for an even register of
/// `2m` qubits built from a generalized W state on `m` qubits.
#[derive(Debug, Clone)]
pub struct EvenFamily {
    pub params: WParams,
    pub phi: Vec<bool>,
    /// `ψ1 = (|0..0>|ψ> + |ψ>|0..0>)/√2`, `ψ2 = (|1..1>|ψ̄> - |ψ̄>|1..1>)/√2`,
    /// `ψ3 = |φ>|ψ>`, `ψ4 = |ψ>|φ>`.
    pub members: [PureState; 4],
    pub rho0: DensityMatrix,
}

impl EvenFamily {
    pub fn n_qubits(&self) -> usize {
        2 * self.params.m()
    }

    pub fn satisfies_hypotheses(&self) -> bool {
        self.params.satisfies_hypotheses()
    }

    /// `½|ψ3><ψ3| + ½|ψ4><ψ4|`, which is bi-separable.
    pub fn biseparable_pair(&self) -> DensityMatrix {
        DensityMatrix::mixture(&[(0.5, &self.members[2]), (0.5, &self.members[3])]).expect("members share a register")
    }
}

/// Default `φ`: a single excitation on the first of `m` qubits.
pub fn default_phi(m: usize) -> Vec<bool> {
    let mut bits = vec![false; m];
    bits[0] = true;
    bits
}

pub fn even_n_family(p: &WParams, phi: Option<&[bool]>) -> Result<EvenFamily> {
    let m = p.m();
    if m < 2 {
        return Err(Error::InvalidParameters(format!("the even family needs N = 2m >= 4 qubits, got N = {}", 2 * m)));
    }
    check_qubits(2 * m, DEFAULT_MAX_QUBITS)?;
    let phi = phi.map(<[bool]>::to_vec).unwrap_or_else(|| default_phi(m));
    if phi.len() != m {
        return Err(Error::InvalidParameters(format!("φ must have {m} qubits, got {}", phi.len())));
    }
    if phi.iter().filter(|&&b| b).count() % 2 == 0 {
        return Err(Error::InvalidParameters(format!(
            "φ = {} must contain an odd number of excitations",
            format_bits(&phi)
        )));
    }

    let psi = generalized_w(p);
    let psi_bar = generalized_anti_w(p);
    let zeros = PureState::basis(&vec![false; m])?;
    let ones = PureState::basis(&vec![true; m])?;
    let phi_state = PureState::basis(&phi)?;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    let psi1 = (zeros.kron(&psi)?.amplitudes() + psi.kron(&zeros)?.amplitudes()) * h;
    let psi2 = (ones.kron(&psi_bar)?.amplitudes() - psi_bar.kron(&ones)?.amplitudes()) * h;
    let members =
        [PureState::new(2 * m, psi1)?, PureState::new(2 * m, psi2)?, phi_state.kron(&psi)?, psi.kron(&phi_state)?];

    // ψ1 has one excitation, ψ2 has N - 1 and ψ3, ψ4 an even number, so
    // these pairs are orthogonal. ψ3 and ψ4 overlap when φ has weight one.
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)] {
        let overlap = members[i].inner(&members[j])?.norm();
        if overlap > 1e-12 {
            return Err(Error::Consistency(format!("family members {} and {} overlap by {overlap}", i + 1, j + 1)));
        }
    }

    let rho0 =
        DensityMatrix::mixture(&[(0.25, &members[0]), (0.25, &members[1]), (0.25, &members[2]), (0.25, &members[3])])?;
    Ok(EvenFamily { params: p.clone(), phi, members, rho0 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NamedState {
    Ghz,
    /// `(|01> + |10>)/√2`.
    BellPsiPlus,
    /// `(|01> - |10>)/√2`.
    BellPsiMinus,
    Basis(Vec<bool>),
}

pub fn named_state(name: &NamedState, n: usize) -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        NamedState::Ghz => {
            let dim = check_qubits(n, DEFAULT_MAX_QUBITS)?;
            let mut amps = DVector::zeros(dim);
            amps[0] = C64::new(h, 0.0);
            amps[dim - 1] = C64::new(h, 0.0);
            Ok(PureState::from_normalized_unchecked(n, amps))
        }
        NamedState::BellPsiPlus | NamedState::BellPsiMinus => {
            if n != 2 {
                return Err(Error::InvalidParameters(format!("Bell states have 2 qubits, not {n}")));
            }
            let sign = if *name == NamedState::BellPsiPlus { 1.0 } else { -1.0 };
            let amps = DVector::from_vec(vec![
                C64::new(0.0, 0.0),
                C64::new(h, 0.0),
                C64::new(sign * h, 0.0),
                C64::new(0.0, 0.0),
            ]);
            Ok(PureState::from_normalized_unchecked(2, amps))
        }
        NamedState::Basis(bits) => {
            if bits.len() != n {
                return Err(Error::InvalidParameters(format!(
                    "pattern {} does not have {n} qubits",
                    format_bits(bits)
                )));
            }
            PureState::basis(bits)
        }
    }
}

/// `a|00> + b|11>` with real Schmidt coefficients.
pub fn schmidt_state(a: f64, b: f64) -> Result<PureState> {
    let amps = DVector::from_vec(vec![C64::new(a, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(b, 0.0)]);
    PureState::new(2, amps)
}

/// Two-qubit state with only local Bloch vectors,
/// `¼(1 + a·σ ⊗ 1 + 1 ⊗ b·σ)`.
pub fn local_bloch_state(a: [f64; 3], b: [f64; 3]) -> Result<DensityMatrix> {
    let local = |v: [f64; 3]| {
        let [x, y, z] = v;
        nalgebra::Matrix2::new(C64::new(z, 0.0), C64::new(x, -y), C64::new(x, y), C64::new(-z, 0.0))
    };
    let to_dyn = |m: nalgebra::Matrix2<C64>| DMatrix::from_iterator(2, 2, m.iter().copied());
    let id = DMatrix::<C64>::identity(2, 2);
    let matrix = (DMatrix::<C64>::identity(4, 4) + to_dyn(local(a)).kronecker(&id) + id.kronecker(&to_dyn(local(b))))
        * C64::new(0.25, 0.0);
    DensityMatrix::new(2, matrix)
}

/// `ρ = ½|ψ+><ψ+| + ½|11><11|` and its partner with `ψ-`.
pub fn two_qubit_anti_pair() -> (DensityMatrix, DensityMatrix) {
    let plus = named_state(&NamedState::BellPsiPlus, 2).expect("two qubits");
    let minus = named_state(&NamedState::BellPsiMinus, 2).expect("two qubits");
    let ones = PureState::basis(&[true, true]).expect("two qubits");
    (
        DensityMatrix::mixture(&[(0.5, &plus), (0.5, &ones)]).expect("valid mixture"),
        DensityMatrix::mixture(&[(0.5, &minus), (0.5, &ones)]).expect("valid mixture"),
    )
}

/// Single-qubit pure state with the given Bloch vector.
pub fn qubit_from_bloch(r: [f64; 3]) -> Result<PureState> {
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameters(format!("Bloch vector has norm {norm}")));
    }
    let theta = r[2].clamp(-1.0, 1.0).acos();
    let phi = r[1].atan2(r[0]);
    let amps = DVector::from_vec(vec![C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]);
    PureState::normalize(1, amps)
}

/// `|φ>^{⊗n}` for the single-qubit state with Bloch vector `r`.
pub fn product_from_bloch(n: usize, r: [f64; 3]) -> Result<PureState> {
    let single = qubit_from_bloch(r)?;
    let mut out = single.clone();
    for _ in 1..n {
        out = out.kron(&single)?;
    }
    Ok(out)
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    let dim = check_qubits(n, DEFAULT_MAX_QUBITS)?;
    let amps = DVector::from_fn(dim, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    PureState::normalize(n, amps)
}

/// Tensor product of independent Haar-random single-qubit states.
pub fn random_product_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    let mut out = random_pure_state(1, rng)?;
    for _ in 1..n {
        out = out.kron(&random_pure_state(1, rng)?)?;
    }
    Ok(out)
}

/// Random density matrix `G G† / Tr(G G†)` with `G` a `2^n x rank`
/// complex Gaussian matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let dim = check_qubits(n, DEFAULT_MAX_QUBITS)?;
    if rank == 0 {
        return Err(Error::InvalidParameters("rank must be positive".into()));
    }
    let g = DMatrix::from_fn(dim, rank, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let m = &g * g.adjoint();
    let trace = m.trace().re;
    Ok(DensityMatrix::from_matrix_unchecked(n, m.unscale(trace)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{full_tensor, tensor_entry, OrderFilter, PauliWord};

    fn word(s: &str) -> PauliWord {
        s.parse().unwrap()
    }

    #[test]
    fn symmetric_w3() {
        let p = WParams::uniform(3).unwrap();
        let w = generalized_w(&p);
        let s = 1.0 / 3f64.sqrt();
        for idx in [4, 2, 1] {
            assert!((w.amplitude(idx).re - s).abs() < 1e-15);
        }
        assert!((tensor_entry(&w, &word("zzz")).unwrap() + 1.0).abs() < 1e-12);
        let w_bar = generalized_anti_w(&p);
        assert!((tensor_entry(&w_bar, &word("zzz")).unwrap() - 1.0).abs() < 1e-12);
        for idx in [3, 5, 6] {
            assert!((w_bar.amplitude(idx).re - s).abs() < 1e-15);
        }
    }

    #[test]
    fn two_qubit_w_is_conditional_bell_state() {
        let w = generalized_w(&WParams::uniform(2).unwrap());
        let bell = named_state(&NamedState::BellPsiPlus, 2).unwrap();
        assert!((w.fidelity(&bell).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w_params_validation() {
        assert!(WParams::new(vec![0.6, 0.6]).is_err());
        assert!(WParams::new(vec![-0.6, 0.8]).is_err());
        let degenerate = WParams::new(vec![1.0, 0.0]).unwrap();
        assert!(!degenerate.satisfies_hypotheses());
        assert!(WParams::new(vec![0.6, 0.8]).unwrap().satisfies_hypotheses());
    }

    #[test]
    fn dicke_validation() {
        assert!(DickeParams::new(3, 1, vec![0.8, 0.6]).is_err());
        assert!(DickeParams::new(3, 1, vec![0.8, 0.6, 0.0]).is_err());
        assert!(DickeParams::new(3, 4, vec![]).is_err());
        assert!(DickeParams::new(3, 1, vec![0.8, 0.36, 0.48]).is_ok());
    }

    #[test]
    fn dicke_w3_matches_generalized_w() {
        let d = dicke(&DickeParams::uniform(3, 1).unwrap());
        let w = generalized_w(&WParams::uniform(3).unwrap());
        assert!((d.amplitudes() - w.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn dicke_pattern_order_and_map() {
        let pats: Vec<String> = dicke_patterns(4, 2).iter().map(|b| format_bits(b)).collect();
        assert_eq!(pats, ["1100", "1010", "1001", "0110", "0101", "0011"]);
        let map: BTreeMap<String, f64> =
            [("100", 0.8), ("010", 0.36), ("001", 0.48)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let p = DickeParams::from_map(3, 1, &map).unwrap();
        assert_eq!(p.coeffs(), &[0.8, 0.36, 0.48]);
    }

    #[test]
    fn complement_is_bit_flip_of_dicke() {
        let p = DickeParams::new(3, 1, vec![0.8, 0.36, 0.48]).unwrap();
        let (d, d_bar) = dicke_pair(&p);
        assert!((d.flip_all().amplitudes() - d_bar.amplitudes()).norm() < 1e-15);
        assert_eq!(d_bar.amplitude(0b011).re, 0.8);
    }

    #[test]
    fn dicke_mixture_requires_odd_n() {
        assert!(dicke_mixture(&DickeParams::uniform(4, 1).unwrap()).is_err());
        let rho = dicke_mixture(&DickeParams::uniform(5, 2).unwrap()).unwrap();
        let t = full_tensor(&rho, &OrderFilter::Full).unwrap();
        assert!(t.max_abs() < 1e-9);
    }

    #[test]
    fn even_family_rejects_bad_phi_and_size() {
        let p = WParams::uniform(2).unwrap();
        assert!(even_n_family(&p, Some(&[true, true])).is_err());
        assert!(even_n_family(&p, Some(&[true])).is_err());
        assert!(even_n_family(&WParams::uniform(1).unwrap(), None).is_err());
    }

    #[test]
    fn even_family_rank_and_overlap() {
        let fam = even_n_family(&WParams::uniform(2).unwrap(), None).unwrap();
        let spectrum = fam.rho0.spectrum();
        assert_eq!(spectrum.iter().filter(|&&v| v > 1e-9).count(), 4);
        let overlap = fam.rho0.expectation_projector(&fam.members[0]).unwrap();
        assert!((overlap - 0.25).abs() < 1e-12);
    }

    #[test]
    fn named_states() {
        let ghz = named_state(&NamedState::Ghz, 3).unwrap();
        assert!((ghz.amplitude(0).re - ghz.amplitude(7).re).abs() < 1e-15);
        let minus = named_state(&NamedState::BellPsiMinus, 2).unwrap();
        assert!(minus.amplitude(1).re > 0.0 && minus.amplitude(2).re < 0.0);
        let basis = named_state(&NamedState::Basis(vec![true, true]), 2).unwrap();
        assert_eq!(basis.amplitude(3).re, 1.0);
        assert!(named_state(&NamedState::BellPsiPlus, 3).is_err());
    }

    #[test]
    fn two_qubit_anti_pair_tensors() {
        let (rho, rho_bar) = two_qubit_anti_pair();
        for (w, a, b) in [("xx", 0.5, -0.5), ("yy", 0.5, -0.5), ("zz", 0.0, 0.0), ("xy", 0.0, 0.0)] {
            assert!((tensor_entry(&rho, &word(w)).unwrap() - a).abs() < 1e-12, "{w}");
            assert!((tensor_entry(&rho_bar, &word(w)).unwrap() - b).abs() < 1e-12, "{w}");
        }
    }

    #[test]
    fn local_bloch_state_rejects_non_positive() {
        assert!(local_bloch_state([0.3, 0.0, 0.0], [0.0, 0.4, 0.0]).is_ok());
        assert!(local_bloch_state([0.9, 0.0, 0.0], [0.0, 0.9, 0.0]).is_err());
    }

    #[test]
    fn bloch_round_trip() {
        let r = [0.48, -0.6, 0.64];
        let q = qubit_from_bloch(r).unwrap();
        for (i, w) in ["x", "y", "z"].iter().enumerate() {
            assert!((tensor_entry(&q, &word(w)).unwrap() - r[i]).abs() < 1e-12);
        }
    }
}
