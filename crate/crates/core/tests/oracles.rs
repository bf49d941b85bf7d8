//! Cross-checks against independent computations.

use approx::assert_abs_diff_eq;
use dickesep::ppt::PptEvaluator;
use dickesep::volume::{ppt_gds_volume_with, rational_to_f64, VolumeEstimate};
use dickesep::{
    certify, gds_volume, ppt_gds_volume, sample_gds_simplex, sds_volume_formula, sds_volume_mc, Execution,
    DEFAULT_EPSILON, DEFAULT_PPT_TOL,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two qubits: χ = (a, b, c) is PPT iff 4ac ≥ b², so the PPT region has
/// volume ∫₀^{1/2} sqrt(1 - 2b) db = 1/3.
#[test]
fn two_qubit_ppt_volume_matches_integral() {
    let v = ppt_gds_volume(2, 400_000, 11).unwrap();
    let exact = VolumeEstimate::exact(1.0 / 3.0);
    assert!(v.z_score(&exact) < 4.0, "{v:?}");
    assert_eq!(rational_to_f64(&sds_volume_formula(2)), 1.0 / 3.0);
}

#[test]
fn two_qubit_ppt_condition_is_quadratic() {
    let eval = PptEvaluator::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10_000 {
        let chi = sample_gds_simplex(2, &mut rng);
        let (a, b, c) = (chi.chi(0), chi.chi(1), chi.chi(2));
        let margin = 4.0 * a * c - b * b;
        if margin.abs() > 1e-9 {
            assert_eq!(eval.is_ppt(chi.populations(), DEFAULT_PPT_TOL), margin > 0.0, "{chi:?}");
        }
    }
}

#[test]
fn formula_matches_monte_carlo_at_small_n() {
    for n in [2, 3] {
        let exact = VolumeEstimate::exact(rational_to_f64(&sds_volume_formula(n)));
        let mc = sds_volume_mc(n, 400_000, 13);
        assert!(mc.z_score(&exact) < 4.0, "n={n}: {mc:?} vs {exact:?}");
        // PPT is exact for N <= 3, so the PPT volume equals the mixture volume.
        let ppt = ppt_gds_volume(n, 400_000, 14).unwrap();
        assert!(ppt.z_score(&exact) < 4.0, "n={n}: {ppt:?} vs {exact:?}");
    }
}

#[test]
fn volumes_are_nested() {
    for n in 2..=5 {
        let full = rational_to_f64(&gds_volume(n));
        let ppt = ppt_gds_volume(n, 200_000, 15).unwrap();
        let sds = rational_to_f64(&sds_volume_formula(n));
        assert!(ppt.mean <= full, "n={n}");
        assert!(sds <= ppt.mean + 4.0 * ppt.std_error, "n={n}: {sds} vs {ppt:?}");
    }
}

#[test]
fn four_qubit_certify_agrees_with_ppt() {
    let eval = PptEvaluator::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut hard = 0;
    for _ in 0..10_000 {
        let chi = sample_gds_simplex(4, &mut rng);
        let report = eval.report(chi.populations(), DEFAULT_PPT_TOL);
        if report.min_eig().abs() < 1e-8 {
            continue;
        }
        hard += usize::from(certify(&chi, DEFAULT_EPSILON).is_certified() != report.ppt);
    }
    assert_eq!(hard, 0);
}

/// Counts sampled four-qubit states rejected by exactly one cut, as
/// `(1|3 only, 2|2 only)`.
fn single_cut_rejections(samples: usize, seed: u64) -> (usize, usize) {
    let eval = PptEvaluator::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut only_k1, mut only_k2) = (0, 0);
    for _ in 0..samples {
        let chi = sample_gds_simplex(4, &mut rng);
        let r = eval.min_eigenvalues(chi.populations());
        let (k1, k2) = (r[0].min_eig < -1e-8, r[1].min_eig < -1e-8);
        only_k1 += usize::from(k1 && !k2);
        only_k2 += usize::from(k2 && !k1);
    }
    (only_k1, only_k2)
}

#[test]
fn two_by_two_cut_rejects_states_the_single_qubit_cut_accepts() {
    let (_, only_k2) = single_cut_rejections(100_000, 17);
    assert!(only_k2 > 0);
}

/// No sampled or optimized state is rejected by the 1|3 cut alone, so this
/// direction is not witnessed.
#[test]
#[ignore = "no four-qubit GDS state is NPT across 1|3 but PPT across 2|2"]
fn single_qubit_cut_rejects_states_the_two_by_two_cut_accepts() {
    let (only_k1, _) = single_cut_rejections(100_000, 17);
    assert!(only_k1 > 0);
}

#[test]
fn execution_policy_does_not_change_estimates() {
    let a = ppt_gds_volume_with(Execution::Sequential, 4, 200_000, 18).unwrap();
    let b = ppt_gds_volume_with(Execution::Parallel, 4, 200_000, 18).unwrap();
    assert_eq!(a, b);
    assert_abs_diff_eq!(a.mean, 3.808e-3, epsilon = 6.0 * a.std_error);
}
