// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! End-to-end checks across modules at small qubit counts.

use transvec_core::design_certify::{empirical_distance, empirical_distance_direct, order_independence};
use transvec_core::rep_theory::{run_suite, CheckMode};
use transvec_core::spectral_analysis::{full_spectrum, second_eigenvalue, second_eigenvalue_blocks};
use transvec_core::twirl_superops::{build_gp, build_gt, build_h, compose, DEFAULT_CAP};

#[test]
fn block_and_dense_second_eigenvalues_agree() {
    for (t, m) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        let dense = second_eigenvalue(t, m, DEFAULT_CAP).unwrap();
        let blocks = second_eigenvalue_blocks(t, m, DEFAULT_CAP).unwrap();
        assert!((dense - blocks).abs() < 1e-9, "t={t} m={m}: {dense} vs {blocks}");
    }
}

#[test]
fn spectral_distance_matches_matrix_power() {
    for (t, m) in [(2, 2), (3, 2)] {
        for k in [1, 3, 6] {
            let spectral = empirical_distance(t, m, k, DEFAULT_CAP).unwrap().op_norm;
            let direct = empirical_distance_direct(t, m, k).unwrap();
            assert!((spectral - direct).abs() < 1e-10, "t={t} m={m} k={k}: {spectral} vs {direct}");
        }
    }
}

#[test]
fn haar_twirl_is_fixed_by_the_scheme() {
    for t in [2, 3] {
        let g = compose(&build_gt(t, 2).unwrap(), &build_gp(t, 2).unwrap()).unwrap();
        let h = build_h(t, 2).unwrap();
        assert!(compose(&g, &h).unwrap().exact_eq(&h).unwrap());
        assert!(compose(&h, &g).unwrap().exact_eq(&h).unwrap());
    }
}

#[test]
fn spectrum_accounts_for_every_dimension() {
    for (t, m) in [(2, 3), (3, 2)] {
        let g = compose(&build_gt(t, m).unwrap(), &build_gp(t, m).unwrap()).unwrap();
        let report = full_spectrum(&g, DEFAULT_CAP).unwrap();
        assert_eq!(report.total_multiplicity(), g.dim());
    }
}

#[test]
fn pauli_placement_does_not_matter() {
    assert!(order_independence(3, 2, 3).unwrap());
}

#[test]
fn two_qubit_suite_passes_and_control_fails() {
    assert!(run_suite(2, CheckMode::Exhaustive, false).unwrap().passed());
    assert!(!run_suite(2, CheckMode::Exhaustive, true).unwrap().passed());
}
