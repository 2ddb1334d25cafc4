//! Brute-force oracles built from explicit Kronecker products, independent
//! of the library's kernels.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qcorr::{DensityMatrix, PureState, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli(letter: char) -> DMatrix<C64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match letter {
        '0' => DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        'x' => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        'y' => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        'z' => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        other => panic!("not a Pauli letter: {other}"),
    }
}

/// Materialized `σ_{w1} ⊗ ... ⊗ σ_{wN}`, first letter most significant.
pub fn word_operator(word: &str) -> DMatrix<C64> {
    word.chars().fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, l| acc.kronecker(&pauli(l)))
}

pub fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    factors.iter().fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, f| acc.kronecker(f))
}

pub fn projector(psi: &PureState) -> DMatrix<C64> {
    psi.amplitudes() * psi.amplitudes().adjoint()
}

/// `Tr(ρ σ_word)` by dense multiplication.
pub fn trace_oracle(rho: &DMatrix<C64>, word: &str) -> f64 {
    (rho * word_operator(word)).trace().re
}

pub fn pure_oracle(psi: &PureState, word: &str) -> f64 {
    trace_oracle(&projector(psi), word)
}

pub fn density_oracle(rho: &DensityMatrix, word: &str) -> f64 {
    trace_oracle(rho.matrix(), word)
}

/// Every word over `letters` of length `n`, first letter most significant.
pub fn all_words(n: usize, letters: &str) -> Vec<String> {
    let letters: Vec<char> = letters.chars().collect();
    let mut words = vec![String::new()];
    for _ in 0..n {
        words = words.into_iter().flat_map(|w| letters.iter().map(move |&l| format!("{w}{l}"))).collect();
    }
    words
}

/// Amplitudes indexed by basis patterns such as `"0110"`.
pub fn pure_from_patterns(n: usize, terms: &[(&str, f64)]) -> PureState {
    let mut v = DVector::<C64>::zeros(1 << n);
    for (bits, amp) in terms {
        let k = usize::from_str_radix(bits, 2).unwrap();
        v[k] += c(*amp, 0.0);
    }
    PureState::normalize(n, v).unwrap()
}

/// Partial transpose by explicit index swapping on the qubits in `subset`.
pub fn partial_transpose_oracle(m: &DMatrix<C64>, n: usize, subset: &[usize]) -> DMatrix<C64> {
    let dim = 1 << n;
    let mut out = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for col in 0..dim {
            let (mut r2, mut c2) = (r, col);
            for &q in subset {
                let bit = 1 << (n - 1 - q);
                if (r ^ col) & bit != 0 {
                    r2 ^= bit;
                    c2 ^= bit;
                }
            }
            out[(r2, c2)] = m[(r, col)];
        }
    }
    out
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
