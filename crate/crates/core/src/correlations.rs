//! Pauli correlation functions.
//!
//! A correlation tensor entry is `T_w = Tr(rho σ_w1 ⊗ ... ⊗ σ_wn)` for a word
//! `w` over `{0, x, y, z}`, where `0` stands for the identity. Words of
//! order `n` (no identity slot) are the full-order correlations; lower
//! orders are marginal correlations between subsets of qubits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Matrix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{qubit_bit, DensityMatrix, PureState, C64};

/// Entries with magnitude below this are not stored in a [`CorrelationTensor`].
pub const DROP_THRESHOLD: f64 = 1e-12;
/// Largest imaginary part tolerated in an expectation value.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;
/// Default limit on `words * 2^n` for a tensor sweep.
pub const DEFAULT_WORK_BUDGET: u128 = 10_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => '0',
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c {
            '0' => Some(Pauli::I),
            'x' | 'X' => Some(Pauli::X),
            'y' | 'Y' => Some(Pauli::Y),
            'z' | 'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            Pauli::I => linalg::identity2(),
            Pauli::X => linalg::sigma_x(),
            Pauli::Y => linalg::sigma_y(),
            Pauli::Z => linalg::sigma_z(),
        }
    }
}

/// A tensor index such as `xx0z`, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord(Vec<Pauli>);

impl PauliWord {
    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliWord(letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of non-identity slots.
    pub fn order(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_full_order(&self) -> bool {
        self.order() == self.len()
    }

    /// Word with `a` at qubit `i`, `b` at qubit `j` and identity elsewhere.
    pub fn pair(n: usize, i: usize, a: Pauli, j: usize, b: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[i] = a;
        letters[j] = b;
        PauliWord(letters)
    }

    pub fn masks(&self) -> WordMasks {
        WordMasks::new(self)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidWord("empty word".into()));
        }
        s.chars()
            .map(|c| Pauli::from_symbol(c).ok_or_else(|| Error::InvalidWord(format!("{s:?}: bad letter {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(PauliWord)
    }
}

impl Serialize for PauliWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bit-level form of a Pauli word acting on basis indices:
/// `σ_w |k> = i^y_count (-1)^popcount(k & sign) |k ^ flip>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordMasks {
    pub flip: usize,
    pub sign: usize,
    pub y_count: u32,
}

impl WordMasks {
    pub fn new(word: &PauliWord) -> Self {
        let n = word.len();
        let mut masks = WordMasks { flip: 0, sign: 0, y_count: 0 };
        for (q, p) in word.letters().iter().enumerate() {
            let bit = qubit_bit(n, q);
            match p {
                Pauli::I => {}
                Pauli::X => masks.flip |= bit,
                Pauli::Y => {
                    masks.flip |= bit;
                    masks.sign |= bit;
                    masks.y_count += 1;
                }
                Pauli::Z => masks.sign |= bit,
            }
        }
        masks
    }

    fn global_phase(&self) -> C64 {
        match self.y_count % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    #[inline]
    fn sign_of(&self, k: usize) -> f64 {
        if (k & self.sign).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Anything whose Pauli expectation values can be evaluated.
pub trait CorrelationSource: Sync {
    fn n_qubits(&self) -> usize;

    fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    /// `Tr(rho σ_w)` before discarding the imaginary part.
    fn raw_expectation(&self, masks: &WordMasks) -> C64;

    /// Runs a [`PauliTransform`] on this state.
    fn pauli_transform<'t>(&self, transform: &'t mut PauliTransform) -> &'t [f64];
}

impl CorrelationSource for PureState {
    fn n_qubits(&self) -> usize {
        PureState::n_qubits(self)
    }

    fn raw_expectation(&self, masks: &WordMasks) -> C64 {
        let amps = self.amplitudes().as_slice();
        let sum: C64 = amps.iter().enumerate().map(|(k, &a)| amps[k ^ masks.flip].conj() * a * masks.sign_of(k)).sum();
        sum * masks.global_phase()
    }

    fn pauli_transform<'t>(&self, transform: &'t mut PauliTransform) -> &'t [f64] {
        transform.pure(self.amplitudes().as_slice())
    }
}

impl CorrelationSource for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }

    fn raw_expectation(&self, masks: &WordMasks) -> C64 {
        let m = self.matrix();
        let sum: C64 = (0..self.dim()).map(|k| m[(k, k ^ masks.flip)] * masks.sign_of(k)).sum();
        sum * masks.global_phase()
    }

    fn pauli_transform<'t>(&self, transform: &'t mut PauliTransform) -> &'t [f64] {
        transform.density(self)
    }
}

/// `σ_w |psi>` computed in `O(2^n)` without forming the operator.
pub fn apply_pauli_word(state: &PureState, word: &PauliWord) -> Result<DVector<C64>> {
    check_word(state.n_qubits(), word)?;
    let masks = word.masks();
    let phase = masks.global_phase();
    let amps = state.amplitudes();
    let mut out = DVector::zeros(amps.len());
    for (k, &a) in amps.iter().enumerate() {
        out[k ^ masks.flip] = a * phase * masks.sign_of(k);
    }
    Ok(out)
}

fn check_word(n: usize, word: &PauliWord) -> Result<()> {
    if word.len() != n {
        return Err(Error::InvalidWord(format!("word {word} has length {}, state has {n} qubits", word.len())));
    }
    Ok(())
}

fn real_part(value: C64) -> Result<f64> {
    if value.im.abs() > IMAGINARY_TOLERANCE {
        return Err(Error::ImaginaryResidue { imag: value.im });
    }
    Ok(value.re)
}

/// A single tensor entry `T_w`.
pub fn tensor_entry<S: CorrelationSource + ?Sized>(state: &S, word: &PauliWord) -> Result<f64> {
    check_word(state.n_qubits(), word)?;
    real_part(state.raw_expectation(&word.masks()))
}

/// Which correlation orders a tensor sweep covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderFilter {
    Full,
    All,
    Orders(BTreeSet<usize>),
}

impl OrderFilter {
    pub fn resolve(&self, n: usize) -> Result<BTreeSet<usize>> {
        match self {
            OrderFilter::Full => Ok(BTreeSet::from([n])),
            OrderFilter::All => Ok((0..=n).collect()),
            OrderFilter::Orders(set) => {
                if let Some(&bad) = set.iter().find(|&&k| k > n) {
                    return Err(Error::InvalidParameters(format!("order {bad} exceeds the register size {n}")));
                }
                Ok(set.clone())
            }
        }
    }
}

impl FromStr for OrderFilter {
    type Err = Error;

    /// Parses `full`, `all` or a comma-separated list such as `1,3`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(OrderFilter::Full),
            "all" => Ok(OrderFilter::All),
            list => list
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidParameters(format!("bad order {t:?}"))))
                .collect::<Result<BTreeSet<_>>>()
                .map(OrderFilter::Orders),
        }
    }
}

/// All words whose order lies in `orders`, in lexicographic order.
pub fn words_of_orders(n: usize, orders: &BTreeSet<usize>) -> Vec<PauliWord> {
    let mut words = Vec::new();
    for support in 0u64..1 << n {
        let k = support.count_ones() as usize;
        if !orders.contains(&k) {
            continue;
        }
        let positions: Vec<usize> = (0..n).filter(|q| support >> q & 1 == 1).collect();
        for mut code in 0..3usize.pow(k as u32) {
            let mut letters = vec![Pauli::I; n];
            for &q in positions.iter().rev() {
                letters[q] = Pauli::AXES[code % 3];
                code /= 3;
            }
            words.push(PauliWord(letters));
        }
    }
    words.sort();
    words
}

/// Number of words of order `k` on `n` qubits: `C(n, k) 3^k`.
pub fn word_count(n: usize, orders: &BTreeSet<usize>) -> u128 {
    orders.iter().map(|&k| binomial(n as u64, k as u64) * 3u128.pow(k as u32)).sum()
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Sparse correlation tensor restricted to the orders that were computed.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    n_qubits: usize,
    orders: BTreeSet<usize>,
    entries: BTreeMap<PauliWord, f64>,
    threshold: f64,
}

impl CorrelationTensor {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn orders(&self) -> &BTreeSet<usize> {
        &self.orders
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Stored (non-negligible) entries in lexicographic word order.
    pub fn entries(&self) -> &BTreeMap<PauliWord, f64> {
        &self.entries
    }

    /// Value of `word`, zero when it was dropped; `None` when its order was
    /// not part of the sweep.
    pub fn get(&self, word: &PauliWord) -> Option<f64> {
        if word.len() != self.n_qubits || !self.orders.contains(&word.order()) {
            return None;
        }
        Some(self.entries.get(word).copied().unwrap_or(0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_file(&self) -> TensorFile {
        TensorFile {
            n_qubits: self.n_qubits,
            entries: self.entries.iter().map(|(w, &v)| (w.to_string(), v)).collect(),
            threshold: self.threshold,
        }
    }
}

/// JSON layout of a tensor: `{"n_qubits", "entries": {"xx00": v}, "threshold"}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TensorFile {
    pub n_qubits: usize,
    pub entries: BTreeMap<String, f64>,
    pub threshold: f64,
}

pub fn full_tensor<S: CorrelationSource + ?Sized>(state: &S, orders: &OrderFilter) -> Result<CorrelationTensor> {
    full_tensor_with_budget(state, orders, DEFAULT_WORK_BUDGET)
}

/// Sweeps every word of the requested orders. The sweep runs on the rayon
/// pool; results are merged in word order so the output does not depend on
/// the thread count.
pub fn full_tensor_with_budget<S: CorrelationSource + ?Sized>(
    state: &S,
    orders: &OrderFilter,
    budget: u128,
) -> Result<CorrelationTensor> {
    let n = state.n_qubits();
    let orders = orders.resolve(n)?;
    let cost = word_count(n, &orders) * state.dim() as u128;
    if cost > budget {
        return Err(Error::WorkBudgetExceeded { cost, budget });
    }
    let words = words_of_orders(n, &orders);
    let values =
        words.par_iter().map(|w| real_part(state.raw_expectation(&w.masks()))).collect::<Result<Vec<f64>>>()?;
    let entries = words.into_iter().zip(values).filter(|(_, v)| v.abs() >= DROP_THRESHOLD).collect();
    Ok(CorrelationTensor { n_qubits: n, orders, entries, threshold: DROP_THRESHOLD })
}

/// Sum of squared full-order entries, `L = Σ_{j ∈ {x,y,z}^n} T_j²`.
pub fn correlation_length<S: CorrelationSource + ?Sized>(state: &S) -> Result<f64> {
    let n = state.n_qubits();
    let orders = BTreeSet::from([n]);
    let cost = word_count(n, &orders) * state.dim() as u128;
    if cost > DEFAULT_WORK_BUDGET {
        return Err(Error::WorkBudgetExceeded { cost, budget: DEFAULT_WORK_BUDGET });
    }
    let words = words_of_orders(n, &orders);
    let squares = words
        .par_iter()
        .map(|w| real_part(state.raw_expectation(&w.masks())).map(|v| v * v))
        .collect::<Result<Vec<f64>>>()?;
    Ok(squares.iter().sum())
}

/// Unit vector selecting the observable `m · σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct MeasurementSetting([f64; 3]);

impl MeasurementSetting {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= Self::TOLERANCE) {
            return Err(Error::InvalidSetting { norm });
        }
        Ok(MeasurementSetting(v))
    }

    /// Polar angle `theta` from `z`, azimuth `phi` from `x`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        MeasurementSetting([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
    }

    pub fn x() -> Self {
        MeasurementSetting([1.0, 0.0, 0.0])
    }

    pub fn y() -> Self {
        MeasurementSetting([0.0, 1.0, 0.0])
    }

    pub fn z() -> Self {
        MeasurementSetting([0.0, 0.0, 1.0])
    }

    pub fn vector(&self) -> [f64; 3] {
        self.0
    }

    /// `m · σ`.
    pub fn observable(&self) -> Matrix2<C64> {
        let [x, y, z] = self.0;
        Matrix2::new(C64::new(z, 0.0), C64::new(x, -y), C64::new(x, y), C64::new(-z, 0.0))
    }

    /// Projector onto the +1 outcome, `(1 + m · σ) / 2`.
    pub fn plus_projector(&self) -> Matrix2<C64> {
        (linalg::identity2() + self.observable()) * C64::new(0.5, 0.0)
    }
}

impl TryFrom<[f64; 3]> for MeasurementSetting {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        MeasurementSetting::new(v)
    }
}

impl From<MeasurementSetting> for [f64; 3] {
    fn from(m: MeasurementSetting) -> Self {
        m.0
    }
}

/// States whose correlations can be evaluated for arbitrary local settings.
pub trait LocalExpectation: CorrelationSource {
    /// `Tr(rho O_0 ⊗ ... ⊗ O_(n-1))`.
    fn local_product_expectation(&self, ops: &[Matrix2<C64>]) -> C64;
}

impl LocalExpectation for PureState {
    fn local_product_expectation(&self, ops: &[Matrix2<C64>]) -> C64 {
        let image = linalg::apply_local_product(self.amplitudes(), self.n_qubits(), ops);
        self.amplitudes().dotc(&image)
    }
}

impl LocalExpectation for DensityMatrix {
    fn local_product_expectation(&self, ops: &[Matrix2<C64>]) -> C64 {
        let ops: Vec<_> = ops.iter().copied().map(Some).collect();
        linalg::apply_local_product_left(self.matrix(), self.n_qubits(), &ops).trace()
    }
}

/// Correlation function `E(m_1, ..., m_n)` for arbitrary measurement
/// directions, evaluated directly on the state.
pub fn general_correlation<S: LocalExpectation + ?Sized>(state: &S, settings: &[MeasurementSetting]) -> Result<f64> {
    let n = state.n_qubits();
    if settings.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: settings.len() });
    }
    for s in settings {
        MeasurementSetting::new(s.0)?;
    }
    let ops: Vec<_> = settings.iter().map(|s| s.observable()).collect();
    real_part(state.local_product_expectation(&ops))
}

/// Values of every word of a pure (or mixed) state via a per-qubit Pauli
/// transform of the density matrix, in `O(n 4^n)`.
///
/// Output is indexed lexicographically with qubit 0 as the most significant
/// letter: letters `x, y, z` when restricted to full order, `0, x, y, z`
/// otherwise.
#[derive(Debug, Clone)]
pub struct PauliTransform {
    n_qubits: usize,
    include_identity: bool,
    spread: Vec<usize>,
    front: Vec<C64>,
    back: Vec<C64>,
    values: Vec<f64>,
}

impl PauliTransform {
    pub fn full_order(n_qubits: usize) -> Self {
        Self::new(n_qubits, false)
    }

    pub fn all_orders(n_qubits: usize) -> Self {
        Self::new(n_qubits, true)
    }

    fn new(n_qubits: usize, include_identity: bool) -> Self {
        let spread =
            (0..1usize << n_qubits).map(|x| (0..n_qubits).fold(0, |acc, b| acc | (x >> b & 1) << (2 * b))).collect();
        let letters: usize = if include_identity { 4 } else { 3 };
        PauliTransform {
            n_qubits,
            include_identity,
            spread,
            front: vec![C64::new(0.0, 0.0); 1 << (2 * n_qubits)],
            back: vec![C64::new(0.0, 0.0); 1 << (2 * n_qubits)],
            values: vec![0.0; letters.pow(n_qubits as u32)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn letters(&self) -> &'static [Pauli] {
        if self.include_identity {
            &Pauli::ALL
        } else {
            &Pauli::AXES
        }
    }

    /// Word at a given output position.
    pub fn word(&self, mut index: usize) -> PauliWord {
        let letters = self.letters();
        let mut out = vec![Pauli::I; self.n_qubits];
        for slot in out.iter_mut().rev() {
            *slot = letters[index % letters.len()];
            index /= letters.len();
        }
        PauliWord(out)
    }

    /// Correlation values of `|psi><psi|` for normalized amplitudes `psi`.
    pub fn pure(&mut self, psi: &[C64]) -> &[f64] {
        assert_eq!(psi.len(), 1 << self.n_qubits, "amplitude length mismatch");
        for (r, &a) in psi.iter().enumerate() {
            let row = 2 * self.spread[r];
            for (c, &b) in psi.iter().enumerate() {
                self.front[row + self.spread[c]] = a * b.conj();
            }
        }
        self.run()
    }

    pub fn density(&mut self, rho: &DensityMatrix) -> &[f64] {
        assert_eq!(rho.n_qubits(), self.n_qubits, "qubit count mismatch");
        let m = rho.matrix();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                self.front[2 * self.spread[r] + self.spread[c]] = m[(r, c)];
            }
        }
        self.run()
    }

    fn run(&mut self) -> &[f64] {
        let n = self.n_qubits;
        let letters = if self.include_identity { 4 } else { 3 };
        let mut inner = 1usize;
        // Digit d = 2 r + c of the (row, column) bit pair of one qubit.
        for q in (0..n).rev() {
            let outer = 1usize << (2 * q);
            for o in 0..outer {
                for i in 0..inner {
                    let src = |d: usize| self.front[(o * 4 + d) * inner + i];
                    let (a00, a01, a10, a11) = (src(0), src(1), src(2), src(3));
                    let x = a01 + a10;
                    let d = a01 - a10;
                    let y = C64::new(-d.im, d.re);
                    let z = a00 - a11;
                    let base = o * letters * inner + i;
                    if self.include_identity {
                        self.back[base] = a00 + a11;
                        self.back[base + inner] = x;
                        self.back[base + 2 * inner] = y;
                        self.back[base + 3 * inner] = z;
                    } else {
                        self.back[base] = x;
                        self.back[base + inner] = y;
                        self.back[base + 2 * inner] = z;
                    }
                }
            }
            std::mem::swap(&mut self.front, &mut self.back);
            inner *= letters;
        }
        for (v, z) in self.values.iter_mut().zip(&self.front) {
            *v = z.re;
        }
        &self.values
    }
}
