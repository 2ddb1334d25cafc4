mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use qcorr::antistate::{antistate_check, universal_not_attempt, universal_not_operator};
use qcorr::bell::{ch_expression, evaluate_inequality, BellSpec, ChSettings};
use qcorr::correlations::{full_tensor, tensor_entry, MeasurementSetting, OrderFilter, PauliTransform};
use qcorr::gme::{biproduct_condition, dicke_pair_correlations};
use qcorr::linalg::{kron, partial_trace, partial_transpose, partial_transpose_operator};
use qcorr::state::DEFAULT_MAX_QUBITS;
use qcorr::statelib::{
    dicke, dicke_pair, generalized_anti_w, generalized_w, random_density_matrix, random_product_state,
    random_pure_state, schmidt_state, DickeParams, WParams,
};
use qcorr::{DensityMatrix, Partition, PureState, C64};
use rand::seq::index::sample;
use rand::Rng;

fn random_partition<R: Rng>(n: usize, rng: &mut R) -> Partition {
    let full = (1u64 << n) - 1;
    let mask = rng.random_range(1..full);
    Partition::new(n, mask).unwrap()
}

fn random_setting<R: Rng>(rng: &mut R) -> MeasurementSetting {
    let z: f64 = rng.random_range(-1.0..1.0);
    MeasurementSetting::from_angles(z.acos(), rng.random_range(-3.2..3.2))
}

fn random_spec<R: Rng>(n: usize, rng: &mut R) -> BellSpec {
    BellSpec {
        leading_settings: (0..n - 2).map(|_| random_setting(rng)).collect(),
        ch_settings: ChSettings {
            a: [random_setting(rng), random_setting(rng)],
            b: [random_setting(rng), random_setting(rng)],
        },
    }
}

fn full_order_values(rho: &DensityMatrix) -> Vec<f64> {
    PauliTransform::full_order(rho.n_qubits()).density(rho).to_vec()
}

fn pure_full_order(psi: &PureState) -> Vec<f64> {
    PauliTransform::full_order(psi.n_qubits()).pure(psi.amplitudes().as_slice()).to_vec()
}

fn is_psd(rho: &DensityMatrix) -> bool {
    rho.spectrum()[0] >= -1e-9
}

fn positive_weights<R: Rng>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(0.05..1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_in_either_grouping(seed: u64, n in 3usize..=5) {
        let mut rng = rng(seed);
        let rho = random_density_matrix(n, rng.random_range(1..=4), &mut rng).unwrap();
        // Trace out qubits {0, last} at once, and one after the other.
        let both = partial_trace(&rho, &Partition::from_qubits(n, &[0, n - 1]).unwrap()).unwrap();
        let first = partial_trace(&rho, &Partition::from_qubits(n, &[n - 1]).unwrap()).unwrap();
        let second = partial_trace(&first, &Partition::from_qubits(n - 1, &[0]).unwrap()).unwrap();
        let other = partial_trace(&rho, &Partition::from_qubits(n, &[0]).unwrap()).unwrap();
        let other = partial_trace(&other, &Partition::from_qubits(n - 1, &[n - 2]).unwrap()).unwrap();
        for kept in [&both, &second, &other] {
            prop_assert!((kept.trace() - 1.0).abs() < 1e-10);
            prop_assert!(is_psd(kept));
        }
        prop_assert!(max_abs_diff(both.matrix(), second.matrix()) < 1e-12);
        prop_assert!(max_abs_diff(both.matrix(), other.matrix()) < 1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution(seed: u64, n in 2usize..=5) {
        let mut rng = rng(seed);
        let rho = random_density_matrix(n, 2, &mut rng).unwrap();
        let part = random_partition(n, &mut rng);
        let once = partial_transpose(&rho, &part).unwrap();
        prop_assert!((once.trace() - 1.0).abs() < 1e-12);
        let twice = partial_transpose_operator(&once, &part).unwrap();
        prop_assert_eq!(twice.matrix(), rho.matrix());
    }

    #[test]
    fn kron_is_associative(seed: u64) {
        let mut rng = rng(seed);
        let mut m = |r: usize, c: usize| DMatrix::<C64>::from_fn(r, c, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (a, b, c) = (m(2, 4), m(4, 2), m(2, 2));
        let cap = DEFAULT_MAX_QUBITS;
        let left = kron(&kron(&a, &b, cap).unwrap(), &c, cap).unwrap();
        let right = kron(&a, &kron(&b, &c, cap).unwrap(), cap).unwrap();
        prop_assert!(max_abs_diff(&left, &right) < 1e-12);
    }

    #[test]
    fn density_spectrum_is_a_probability_vector(seed: u64, n in 1usize..=5, rank in 1usize..=6) {
        let mut rng = rng(seed);
        let rho = random_density_matrix(n, rank, &mut rng).unwrap();
        let s = rho.spectrum();
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.iter().all(|&x| (-1e-9..=1.0 + 1e-9).contains(&x)));
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tensor_entries_are_bounded(seed: u64, n in 1usize..=4) {
        let mut rng = rng(seed);
        let rho = random_density_matrix(n, 2, &mut rng).unwrap();
        let t = full_tensor(&rho, &OrderFilter::All).unwrap();
        prop_assert!(t.max_abs() <= 1.0 + 1e-9);
        let identity = "0".repeat(n).parse().unwrap();
        prop_assert!((t.get(&identity).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_state_tensor(theta in 0.0f64..std::f64::consts::FRAC_PI_2) {
        let (a, b) = (theta.cos(), theta.sin());
        let psi = schmidt_state(a, b).unwrap();
        let t = full_tensor(&psi, &OrderFilter::Full).unwrap();
        for w in all_words(2, "xyz") {
            let expected = match w.as_str() {
                "zz" => 1.0,
                "xx" => 2.0 * a * b,
                "yy" => -2.0 * a * b,
                _ => 0.0,
            };
            prop_assert!((t.get(&w.parse().unwrap()).unwrap_or(0.0) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn anti_partners_cancel_in_even_mixtures(seed: u64, odd in prop::sample::select(vec![3usize, 5])) {
        let mut rng = rng(seed);
        let e = rng.random_range(1..odd);
        let count = qcorr::statelib::dicke_patterns(odd, e).len();
        let params = DickeParams::normalized(odd, e, positive_weights(count, &mut rng)).unwrap();
        let (d, d_bar) = dicke_pair(&params);
        let report = antistate_check(&d, &d_bar).unwrap();
        prop_assert!(report.is_full_order_anti);
        let mix = DensityMatrix::mixture(&[(0.5, &d), (0.5, &d_bar)]).unwrap();
        prop_assert!(full_order_values(&mix).iter().all(|v| v.abs() < 1e-10));

        let w = WParams::normalized(positive_weights(odd, &mut rng)).unwrap();
        let (psi, psi_bar) = (generalized_w(&w), generalized_anti_w(&w));
        let flipped = psi.flip_all();
        prop_assert_eq!(flipped.amplitudes(), psi_bar.amplitudes());
        let (t, t_bar) = (pure_full_order(&psi), pure_full_order(&psi_bar));
        prop_assert!(t.iter().zip(&t_bar).all(|(a, b)| (a + b).abs() < 1e-10));
    }

    #[test]
    fn dicke_superpositions_share_pair_correlations(seed: u64) {
        let mut rng = rng(seed);
        let d1 = dicke(&DickeParams::uniform(3, 1).unwrap());
        let d2 = dicke(&DickeParams::uniform(3, 2).unwrap());
        let phase: f64 = rng.random_range(0.0..6.3);
        let a: f64 = rng.random_range(0.0..1.0);
        let v = d1.amplitudes() * C64::new(a.sqrt(), 0.0)
            + d2.amplitudes() * C64::from_polar((1.0 - a).sqrt(), phase);
        let phi = PureState::normalize(3, v).unwrap();
        for part in Partition::all(3).unwrap() {
            let reference = biproduct_condition(&d1, &part, None).unwrap();
            let c = biproduct_condition(&phi, &part, None).unwrap();
            prop_assert!((c.lhs - reference.lhs).abs() < 1e-12);
            prop_assert!((c.rhs - reference.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn unot_is_trace_preserving_and_involutive(seed: u64, n in 1usize..=6) {
        let mut rng = rng(seed);
        let rho = random_density_matrix(n, rng.random_range(1..=4), &mut rng).unwrap();
        let size = 2 * rng.random_range(0..n.div_ceil(2)) + 1;
        let subset = sample(&mut rng, n, size).into_vec();
        let once = universal_not_operator(&rho.as_operator(), &subset).unwrap();
        prop_assert!((once.trace() - 1.0).abs() < 1e-12);
        prop_assert!(max_abs_diff(once.matrix(), &once.matrix().adjoint()) < 1e-14);
        let twice = universal_not_operator(&once, &subset).unwrap();
        prop_assert!(max_abs_diff(twice.matrix(), rho.matrix()) < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn physical_unot_outputs_are_anti_states(seed: u64, n in 1usize..=6, rank in 1usize..=16) {
        let mut rng = rng(seed);
        let rho = random_density_matrix(n, rank, &mut rng).unwrap();
        let size = 2 * rng.random_range(0..n.div_ceil(2)) + 1;
        let subset = sample(&mut rng, n, size).into_vec();
        let r = universal_not_attempt(&rho, &subset).unwrap();
        if let Some(output) = r.output() {
            prop_assert!(antistate_check(&rho, &output).unwrap().is_full_order_anti);
        }
    }

    #[test]
    fn odd_pure_states_transpose_physically(seed: u64, half in 0usize..=2) {
        let n = 2 * half + 1;
        let mut rng = rng(seed);
        let rho = random_pure_state(n, &mut rng).unwrap().to_density();
        let r = universal_not_attempt(&rho, &(0..n).collect::<Vec<_>>()).unwrap();
        prop_assert!(r.physical);
        prop_assert!(antistate_check(&rho, &r.output().unwrap()).unwrap().is_full_order_anti);
    }

    #[test]
    fn product_states_never_violate(seed: u64, n in 2usize..=5) {
        let mut rng = rng(seed);
        let psi = random_product_state(n, &mut rng).unwrap().to_density();
        let v = evaluate_inequality(&psi, &random_spec(n, &mut rng)).unwrap();
        prop_assert!(v.product >= -1e-9, "{v:?}");
        prop_assert!((v.product - v.p_plus * v.ch_conditional.unwrap_or(0.0)).abs() < 1e-15);
    }

    #[test]
    fn ch_respects_the_no_signalling_range(seed: u64, rank in 1usize..=4) {
        let mut rng = rng(seed);
        let rho = random_density_matrix(2, rank, &mut rng).unwrap();
        let spec = random_spec(2, &mut rng);
        let ch = ch_expression(&rho, &spec.ch_settings).unwrap();
        prop_assert!((-0.5..=1.5).contains(&ch), "{ch}");
        prop_assert!(ch >= -(2f64.sqrt() - 1.0) / 2.0 - 1e-12, "{ch}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn biproduct_states_satisfy_the_condition(seed: u64, n in 2usize..=6) {
        let mut rng = rng(seed);
        let part = random_partition(n, &mut rng);
        let xi = random_pure_state(part.size_a(), &mut rng).unwrap();
        let eta = random_pure_state(n - part.size_a(), &mut rng).unwrap();
        let mut v = nalgebra::DVector::<C64>::zeros(1 << n);
        let (a_qubits, b_qubits) = (part.qubits_a(), part.qubits_b());
        for (ia, &x) in xi.amplitudes().iter().enumerate() {
            for (ib, &y) in eta.amplitudes().iter().enumerate() {
                let mut index = 0;
                for (k, &q) in a_qubits.iter().enumerate() {
                    index |= (ia >> (a_qubits.len() - 1 - k) & 1) << (n - 1 - q);
                }
                for (k, &q) in b_qubits.iter().enumerate() {
                    index |= (ib >> (b_qubits.len() - 1 - k) & 1) << (n - 1 - q);
                }
                v[index] = x * y;
            }
        }
        let state = PureState::new(n, v).unwrap();
        let c = biproduct_condition(&state, &part, None).unwrap();
        prop_assert!(c.satisfied, "{c:?}");
        let (i, j) = (a_qubits[0], *b_qubits.last().unwrap());
        prop_assert!(biproduct_condition(&state, &part, Some((i, j))).unwrap().satisfied);
    }
}

#[test]
fn dicke_sum_rule() {
    for n in 2..=10 {
        for e in 1..n {
            let (xx, yy, zz) = dicke_pair_correlations(n, e);
            assert!((xx + yy + zz - 1.0).abs() < 1e-12, "n = {n}, e = {e}");
        }
    }
}

#[test]
fn dicke_closed_forms_match_the_trace_oracle() {
    for n in 2..=6 {
        for e in 1..n {
            let d = dicke(&DickeParams::uniform(n, e).unwrap());
            let (xx, yy, zz) = dicke_pair_correlations(n, e);
            let pad = "0".repeat(n - 2);
            for (l, v) in [('x', xx), ('y', yy), ('z', zz)] {
                assert!((pure_oracle(&d, &format!("{l}{l}{pad}")) - v).abs() < 1e-10);
                let word = format!("{pad}{l}{l}").parse().unwrap();
                assert!((tensor_entry(&d, &word).unwrap() - v).abs() < 1e-10);
            }
        }
    }
}
