//! Conditioned Clauser–Horne inequality on the last two qubits.
//!
//! The expression is
//! `CH = P(+|a1) + P(+|b1) - P(++|a1b1) - P(++|a1b2) - P(++|a2b1) + P(++|a2b2)`,
//! whose local range is `[0, 1]`. Quantum states reach `-(√2-1)/2`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{LocalExpectation, MeasurementSetting};
use crate::error::{Error, Result};
use crate::linalg::apply_local_product_left;
use crate::state::{DensityMatrix, C64};

pub const VIOLATION_TOLERANCE: f64 = 1e-9;
pub const NOISE_TOLERANCE: f64 = 1e-6;
/// `p_plus` at or below this is treated as an impossible conditioning event.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// Two settings for each of the last two parties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChSettings {
    pub a: [MeasurementSetting; 2],
    pub b: [MeasurementSetting; 2],
}

impl ChSettings {
    /// Equatorial settings at 0, π/2 and ±π/4, optimal for `(|01⟩+|10⟩)/√2`.
    pub fn optimal() -> Self {
        let eq = |phi: f64| MeasurementSetting::from_angles(FRAC_PI_2, phi);
        ChSettings { a: [eq(0.0), eq(FRAC_PI_2)], b: [eq(FRAC_PI_4), eq(-FRAC_PI_4)] }
    }

    fn to_angles(self) -> Vec<f64> {
        [self.a[0], self.a[1], self.b[0], self.b[1]]
            .iter()
            .flat_map(|s| {
                let [x, y, z] = s.vector();
                [z.clamp(-1.0, 1.0).acos(), y.atan2(x)]
            })
            .collect()
    }

    fn from_angles(p: &[f64]) -> Self {
        let s = |i: usize| MeasurementSetting::from_angles(p[2 * i], p[2 * i + 1]);
        ChSettings { a: [s(0), s(1)], b: [s(2), s(3)] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellSpec {
    /// Settings of the first `N - 2` parties, conditioned on `+1`.
    pub leading_settings: Vec<MeasurementSetting>,
    pub ch_settings: ChSettings,
}

impl BellSpec {
    /// `σ_z` on every leading party and the optimal CH settings.
    pub fn recipe(n_qubits: usize) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::InvalidParameters(format!("need at least 2 qubits, got {n_qubits}")));
        }
        Ok(BellSpec {
            leading_settings: vec![MeasurementSetting::z(); n_qubits - 2],
            ch_settings: ChSettings::optimal(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.leading_settings.len() + 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellValue {
    pub p_plus: f64,
    /// `None` when the conditioning event has zero probability.
    pub ch_conditional: Option<f64>,
    pub product: f64,
    pub violated: bool,
    pub zero_probability: bool,
}

fn plus_probability(rho: &DensityMatrix, settings: &[Option<MeasurementSetting>]) -> f64 {
    let ops: Vec<Matrix2<C64>> =
        settings.iter().map(|s| s.map_or_else(Matrix2::identity, |s| s.plus_projector())).collect();
    rho.local_product_expectation(&ops).re
}

pub fn ch_expression(rho2: &DensityMatrix, settings: &ChSettings) -> Result<f64> {
    if rho2.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho2.n_qubits() });
    }
    let [a1, a2] = settings.a.map(Some);
    let [b1, b2] = settings.b.map(Some);
    let p = |a, b| plus_probability(rho2, &[a, b]);
    Ok(p(a1, None) + p(None, b1) - p(a1, b1) - p(a1, b2) - p(a2, b1) + p(a2, b2))
}

/// Probability of `+1` on every leading party and the normalized two-qubit
/// state of the last two parties given that outcome.
pub fn conditional_state(rho: &DensityMatrix, leading: &[MeasurementSetting]) -> Result<(f64, Option<DensityMatrix>)> {
    let n = rho.n_qubits();
    if n < 2 || leading.len() != n - 2 {
        return Err(Error::DimensionMismatch { expected: n.saturating_sub(2), found: leading.len() });
    }
    let ops: Vec<_> = leading.iter().map(|s| Some(s.plus_projector())).chain([None, None]).collect();
    let projected = apply_local_product_left(rho.matrix(), n, &ops);
    let mut block = DMatrix::<C64>::zeros(4, 4);
    for lead in 0..1usize << (n - 2) {
        block += projected.view((4 * lead, 4 * lead), (4, 4));
    }
    let p_plus = block.trace().re;
    if p_plus <= ZERO_PROBABILITY {
        return Ok((p_plus.max(0.0), None));
    }
    block /= C64::new(p_plus, 0.0);
    let hermitian = (&block + block.adjoint()) * C64::new(0.5, 0.0);
    Ok((p_plus, Some(DensityMatrix::from_matrix_unchecked(2, hermitian))))
}

pub fn evaluate_inequality(rho: &DensityMatrix, spec: &BellSpec) -> Result<BellValue> {
    if spec.n_qubits() != rho.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: rho.n_qubits().saturating_sub(2),
            found: spec.leading_settings.len(),
        });
    }
    let (p_plus, conditional) = conditional_state(rho, &spec.leading_settings)?;
    let Some(conditional) = conditional else {
        return Ok(BellValue { p_plus, ch_conditional: None, product: 0.0, violated: false, zero_probability: true });
    };
    let ch = ch_expression(&conditional, &spec.ch_settings)?;
    let product = p_plus * ch;
    Ok(BellValue {
        p_plus,
        ch_conditional: Some(ch),
        product,
        violated: product < -VIOLATION_TOLERANCE,
        zero_probability: false,
    })
}

/// Largest white-noise weight `p` for which `(1-p)ρ + p I/2^N` still gives a
/// negative product, bracketed to [`NOISE_TOLERANCE`].
pub fn noise_threshold(rho: &DensityMatrix, spec: &BellSpec) -> Result<f64> {
    if !evaluate_inequality(rho, spec)?.violated {
        return Err(Error::Precondition("the inequality is not violated by the input state".into()));
    }
    let noise = DensityMatrix::maximally_mixed(rho.n_qubits())?;
    let product_at = |p: f64| -> Result<f64> { Ok(evaluate_inequality(&rho.mix(&noise, p)?, spec)?.product) };
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > NOISE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if product_at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChOptimum {
    pub settings: ChSettings,
    pub value: f64,
}

struct ChCost<'a>(&'a DensityMatrix);

impl CostFunction for ChCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(ch_expression(self.0, &ChSettings::from_angles(p))?)
    }
}

fn refine(rho2: &DensityMatrix, start: Vec<f64>) -> Result<ChOptimum> {
    let simplex: Vec<Vec<f64>> = std::iter::once(start.clone())
        .chain((0..start.len()).map(|i| {
            let mut v = start.clone();
            v[i] += 0.3;
            v
        }))
        .collect();
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-13).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let result = Executor::new(ChCost(rho2), solver)
        .configure(|s| s.max_iters(4000))
        .run()
        .map_err(|e| Error::Consistency(e.to_string()))?;
    let best = result.state().best_param.clone().unwrap_or(start);
    let settings = ChSettings::from_angles(&best);
    Ok(ChOptimum { settings, value: ch_expression(rho2, &settings)? })
}

/// Minimizes the CH expression over all settings with Nelder–Mead from
/// `initial` (or the optimal equatorial settings) plus `restarts` random
/// starting points.
pub fn optimize_ch_settings(
    rho2: &DensityMatrix,
    initial: Option<&ChSettings>,
    restarts: usize,
    seed: u64,
) -> Result<ChOptimum> {
    if rho2.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho2.n_qubits() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = std::iter::once(initial.copied().unwrap_or_else(ChSettings::optimal).to_angles())
        .chain((0..restarts).map(|_| (0..8).map(|_| rng.random_range(-3.0..3.0)).collect()))
        .collect();
    let results: Vec<ChOptimum> = starts.into_par_iter().map(|s| refine(rho2, s)).collect::<Result<_>>()?;
    Ok(results.into_iter().min_by(|x, y| x.value.total_cmp(&y.value)).expect("at least one start"))
}

/// Keeps the leading settings and replaces the CH settings by those
/// minimizing the conditional expression.
pub fn refine_spec(rho: &DensityMatrix, spec: &BellSpec, restarts: usize, seed: u64) -> Result<BellSpec> {
    let (_, conditional) = conditional_state(rho, &spec.leading_settings)?;
    let Some(conditional) = conditional else {
        return Err(Error::Precondition("conditioning event has zero probability".into()));
    };
    let best = optimize_ch_settings(&conditional, Some(&spec.ch_settings), restarts, seed)?;
    Ok(BellSpec { leading_settings: spec.leading_settings.clone(), ch_settings: best.settings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statelib::{named_state, NamedState};
    use crate::PureState;

    const OPTIMUM: f64 = -(std::f64::consts::SQRT_2 - 1.0) / 2.0;

    fn psi_plus() -> DensityMatrix {
        named_state(&NamedState::BellPsiPlus, 2).unwrap().to_density()
    }

    #[test]
    fn psi_plus_reaches_the_optimum() {
        let v = ch_expression(&psi_plus(), &ChSettings::optimal()).unwrap();
        assert!((v - OPTIMUM).abs() < 1e-12);
    }

    #[test]
    fn white_noise_value() {
        let v = ch_expression(&DensityMatrix::maximally_mixed(2).unwrap(), &ChSettings::optimal()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_state_is_local() {
        let zero = PureState::basis(&[false, false]).unwrap().to_density();
        let v = ch_expression(&zero, &ChSettings::optimal()).unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn wrong_dimension() {
        let ghz = named_state(&NamedState::Ghz, 3).unwrap().to_density();
        assert!(ch_expression(&ghz, &ChSettings::optimal()).is_err());
        assert!(evaluate_inequality(&ghz, &BellSpec::recipe(4).unwrap()).is_err());
    }

    #[test]
    fn zero_probability_is_flagged() {
        // |1⟩ on the leading qubit never gives +1 for σ_z.
        let one = PureState::basis(&[true, false, false]).unwrap().to_density();
        let v = evaluate_inequality(&one, &BellSpec::recipe(3).unwrap()).unwrap();
        assert!(v.zero_probability && !v.violated && v.product == 0.0 && v.ch_conditional.is_none());
    }

    #[test]
    fn optimizer_does_not_lose_the_optimum() {
        let best = optimize_ch_settings(&psi_plus(), None, 2, 1).unwrap();
        assert!(best.value <= OPTIMUM + 1e-12);
        assert!(best.value >= OPTIMUM - 1e-9);
    }

    #[test]
    fn optimizer_finds_violation_from_random_starts() {
        let minus = named_state(&NamedState::BellPsiMinus, 2).unwrap().to_density();
        let best = optimize_ch_settings(&minus, Some(&ChSettings::optimal()), 4, 3).unwrap();
        assert!((best.value - OPTIMUM).abs() < 1e-6, "{}", best.value);
    }

    #[test]
    fn spec_json_uses_triples() {
        let json = serde_json::to_value(BellSpec::recipe(3).unwrap()).unwrap();
        assert_eq!(json["leading_settings"][0], serde_json::json!([0.0, 0.0, 1.0]));
        let bad = r#"{"leading_settings":[[0,0,2]],"ch_settings":{"a":[[1,0,0],[0,1,0]],"b":[[1,0,0],[0,1,0]]}}"#;
        assert!(serde_json::from_str::<BellSpec>(bad).is_err());
    }
}
