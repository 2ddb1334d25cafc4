mod common;

use common::*;
use qcorr::annealer::AnnealConfig;
use qcorr::antistate::antistate_check;
use qcorr::bell::{conditional_state, evaluate_inequality, noise_threshold, BellSpec};
use qcorr::correlations::{correlation_length, full_tensor, OrderFilter};
use qcorr::gme::{
    certify_dicke_mixture, certify_even_family, falsify_even_family, mimic_threshold, ppt_check, product_mimic,
    OVERLAP_THRESHOLD,
};
use qcorr::statelib::{
    dicke, dicke_mixture, even_n_family, generalized_anti_w, generalized_w, named_state, two_qubit_anti_pair,
    DickeParams, NamedState, WParams,
};
use qcorr::{DensityMatrix, Error, Partition, PureState};
use rand::Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn bell_states() -> Vec<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[("00", h), ("11", h)], [("00", h), ("11", -h)], [("01", h), ("10", h)], [("01", h), ("10", -h)]]
        .iter()
        .map(|terms| pure_from_patterns(2, terms))
        .collect()
}

#[test]
fn w_and_anti_w_zzz() {
    let p = WParams::uniform(3).unwrap();
    assert!((pure_oracle(&generalized_w(&p), "zzz") + 1.0).abs() < 1e-12);
    assert!((pure_oracle(&generalized_anti_w(&p), "zzz") - 1.0).abs() < 1e-12);
}

#[test]
fn dicke_examples() {
    let d52 = dicke(&DickeParams::uniform(5, 2).unwrap());
    assert!((pure_oracle(&d52, "xx000") - 0.6).abs() < 1e-12);
    let d31 = dicke(&DickeParams::uniform(3, 1).unwrap());
    let w3 = generalized_w(&WParams::uniform(3).unwrap());
    assert!((d31.amplitudes() - w3.amplitudes()).norm() < 1e-12);
}

#[test]
fn uneven_dicke_mixture_has_no_full_order_correlations() {
    let p = DickeParams::new(3, 1, vec![0.8, 0.36, 0.48]).unwrap();
    let rho = dicke_mixture(&p).unwrap();
    for word in all_words(3, "xyz") {
        assert!(density_oracle(&rho, &word).abs() < 1e-12, "{word}");
    }
    assert!(full_tensor(&rho, &OrderFilter::Full).unwrap().entries().is_empty());
}

#[test]
fn even_family_structure() {
    let fam = even_n_family(&WParams::uniform(2).unwrap(), None).unwrap();
    assert_eq!(fam.rho0.spectrum().iter().filter(|&&l| l > 1e-9).count(), 4);
    let overlap = projector(&fam.members[0]) * fam.rho0.matrix();
    assert!((overlap.trace().re - 0.25).abs() < 1e-12);
    // ψ3 and ψ4 share |φ>|φ> when φ has a single excitation.
    let h34 = fam.members[2].inner(&fam.members[3]).unwrap().norm();
    assert!((h34 - 0.5).abs() < 1e-12);

    let odd = even_n_family(&WParams::uniform(3).unwrap(), Some(&[true, true, true])).unwrap();
    assert!(odd.members[2].inner(&odd.members[3]).unwrap().norm() < 1e-12);
    assert!(even_n_family(&WParams::uniform(2).unwrap(), Some(&[true, true])).is_err());
    assert!(even_n_family(&WParams::uniform(1).unwrap(), None).is_err());
}

#[test]
fn even_family_zero_weight_is_flagged() {
    let p = WParams::new(vec![1.0, 0.0]).unwrap();
    assert!(!p.satisfies_hypotheses());
    let fam = even_n_family(&p, None).unwrap();
    let v = certify_even_family(&fam.rho0, &fam).unwrap();
    assert!(!v.certified && v.inconclusive);
}

#[test]
fn two_qubit_anti_pair_entries() {
    let (rho, rho_bar) = two_qubit_anti_pair();
    for (word, value) in [("xx", 0.5), ("yy", 0.5), ("zz", 0.0)] {
        assert!((density_oracle(&rho, word) - value).abs() < 1e-12, "{word}");
        assert!((density_oracle(&rho_bar, word) + value).abs() < 1e-12, "{word}");
    }
    let mix = rho.mix(&rho_bar, 0.5).unwrap();
    assert!(ppt_check(&mix, &Partition::new(2, 1).unwrap()).unwrap().is_ppt);
}

#[test]
fn ghz_is_not_its_own_anti_state() {
    let g = named_state(&NamedState::Ghz, 3).unwrap();
    let r = antistate_check(&g, &g).unwrap();
    assert!(!r.is_full_order_anti);
    assert!((r.max_deviation - 2.0).abs() < 1e-12);
}

#[test]
fn dicke_mixture_certificates() {
    let mut rng = rng(11);
    for _ in 0..5 {
        let coeffs: Vec<f64> = (0..10).map(|_| rng.random_range(0.05..1.0)).collect();
        let p = DickeParams::normalized(5, 2, coeffs).unwrap();
        let cert = certify_dicke_mixture(5, 2, p.coeffs(), 0).unwrap();
        assert!(cert.verdict.certified);
        assert_eq!(cert.splits.len(), 15);
        for s in &cert.splits {
            assert!(s.partner_deviation < 1e-12 && s.cross_term < 1e-12);
        }
    }
    let err = certify_dicke_mixture(3, 1, &[0.6, 0.8, 0.0], 0).unwrap_err();
    assert!(matches!(err, Error::HypothesesViolated(_)));
    assert!(certify_dicke_mixture(4, 1, &[0.5; 4], 0).is_err());
}

#[test]
fn maximally_mixed_and_biseparable_are_not_certified() {
    let fam = even_n_family(&WParams::uniform(2).unwrap(), None).unwrap();
    let v = certify_even_family(&DensityMatrix::maximally_mixed(4).unwrap(), &fam).unwrap();
    assert!(!v.certified && !v.inconclusive);
    let v = certify_even_family(&fam.biseparable_pair(), &fam).unwrap();
    assert!(!v.certified && v.witness_value.abs() < 1e-12);
}

#[test]
fn product_mimic_examples() {
    assert_eq!(mimic_threshold(1), 4);
    assert_eq!(mimic_threshold(2), 7);
    let m = product_mimic(3, 1).unwrap();
    assert!(m.bloch_vector.is_none() && m.verdict().inconclusive);
    let m = product_mimic(4, 1).unwrap();
    let r = m.bloch_vector.unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((r[0] - h).abs() < 1e-12 && (r[1] - h).abs() < 1e-12 && r[2].abs() < 1e-12);
    // D^3_4 shares the pair correlations of D^1_4.
    assert_eq!(product_mimic(4, 3).unwrap().threshold_n, 4);
}

#[test]
fn bell_values_on_even_family() {
    for n in [4usize, 6] {
        let fam = even_n_family(&WParams::uniform(n / 2).unwrap(), None).unwrap();
        let spec = BellSpec::recipe(n).unwrap();
        let v = evaluate_inequality(&fam.rho0, &spec).unwrap();
        assert!((v.p_plus - 1.0 / (2.0 * n as f64)).abs() < 1e-12);
        assert!((v.product + (SQRT2 - 1.0) / (4.0 * n as f64)).abs() < 1e-10);
        let (_, cond) = conditional_state(&fam.rho0, &spec.leading_settings).unwrap();
        let cond = cond.unwrap();
        let best = bell_states().iter().map(|b| cond.expectation_projector(b).unwrap()).fold(0.0, f64::max);
        assert!((best - 1.0).abs() < 1e-10);
    }
}

#[test]
fn noise_thresholds_are_pinned() {
    // The Bell product is linear in ρ: at p = 0 it is -(√2-1)/(4N) and for
    // white noise it is 2^-(N-2) · 1/2.
    for (n, white) in [(4usize, 0.125), (6, 1.0 / 32.0)] {
        let fam = even_n_family(&WParams::uniform(n / 2).unwrap(), None).unwrap();
        let spec = BellSpec::recipe(n).unwrap();
        let zero = (SQRT2 - 1.0) / (4.0 * n as f64);
        let expected = zero / (zero + white);
        let p = noise_threshold(&fam.rho0, &spec).unwrap();
        assert!((p - expected).abs() < 1e-6, "N = {n}: {p} vs {expected}");
    }
    let p4 = noise_threshold(
        &even_n_family(&WParams::uniform(2).unwrap(), None).unwrap().rho0,
        &BellSpec::recipe(4).unwrap(),
    )
    .unwrap();
    assert!((p4 - 0.171_572_875_253_809_9).abs() < 1e-6);

    let white = DensityMatrix::maximally_mixed(4).unwrap();
    let spec = BellSpec::recipe(4).unwrap();
    assert!(!evaluate_inequality(&white, &spec).unwrap().violated);
    assert!(matches!(noise_threshold(&white, &spec), Err(Error::Precondition(_))));
}

#[test]
fn correlation_length_of_mixtures() {
    let w = generalized_w(&WParams::uniform(3).unwrap());
    let aw = generalized_anti_w(&WParams::uniform(3).unwrap());
    let mix = DensityMatrix::mixture(&[(0.5, &w), (0.5, &aw)]).unwrap();
    assert!(correlation_length(&mix).unwrap() < 1e-20);
    let expected: f64 = all_words(3, "xyz").iter().map(|w3| pure_oracle(&w, w3).powi(2)).sum();
    assert!((correlation_length(&w).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn no_even_family_counterexample() {
    let fam = even_n_family(&WParams::uniform(2).unwrap(), None).unwrap();
    let cfg = AnnealConfig { restarts: 4, ..AnnealConfig::evidence() };
    let points = falsify_even_family(&fam, 1e-3, &cfg).unwrap();
    assert_eq!(points.len(), 7);
    for p in &points {
        assert!(p.residual > 1e-3 || p.overlap < OVERLAP_THRESHOLD, "{p:?}");
    }
}
