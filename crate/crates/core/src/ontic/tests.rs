use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channels::{dilation_channel, unitary_channel, UnitaryOperator};
use crate::qcore::gates::*;
use crate::qcore::linalg::{c, max_abs, ONE, ZERO};
use crate::qcore::{random, CVector, HilbertSpace, PureState};
use crate::tolerance::DEFAULT_DEGENERACY_GAP as DEG;

fn ab() -> HilbertSpace {
    HilbertSpace::new([("a", 2), ("b", 2)]).unwrap()
}

fn random_dilation(rng: &mut ChaCha8Rng, s: &HilbertSpace, de: usize) -> QuantumChannel {
    let e = HilbertSpace::single("env", de).unwrap();
    let w = s.tensor(&e).unwrap();
    let u = UnitaryOperator::new(w.clone(), random::unitary(rng, w.total_dim())).unwrap();
    let rho_e = random::density_matrix(rng, &e);
    let s_labels = s.labels();
    dilation_channel(&u, &rho_e, &s_labels, &["env"]).unwrap()
}

#[test]
fn pure_state_has_one_live_entry() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = random::pure_state(&mut rng, &HilbertSpace::single("x", 3).unwrap());
    let dec = ontic_decomposition(&psi.density(), DEG);
    assert_eq!(dec.len(), 3);
    assert_abs_diff_eq!(dec.entries()[0].probability, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(dec.entries()[0].state.inner(&psi).norm(), 1.0, epsilon = 1e-12);
    assert!(!dec.entries()[0].null);
    assert!(dec.entries()[1..].iter().all(|e| e.null));
}

#[test]
fn maximally_mixed_qubit_is_one_degenerate_group() {
    let dec = ontic_decomposition(&DensityMatrix::maximally_mixed(HilbertSpace::qubit("q")), DEG);
    assert_eq!(dec.probabilities(), vec![0.5, 0.5]);
    assert_eq!(dec.degeneracy_groups(), &[vec![0, 1]]);
    // canonical basis inside the group is the standard one
    assert_abs_diff_eq!(
        max_abs(&(dec.basis() - crate::qcore::linalg::identity(2))),
        0.0,
        epsilon = 1e-15
    );
}

#[test]
fn improper_mixture_example() {
    // |ψ⟩ = 0.6|↑↑⟩ + 0.8|↓↓⟩ reduced onto the first factor
    let psi = PureState::from_slice(ab(), &[c(0.6, 0.0), ZERO, ZERO, c(0.8, 0.0)]).unwrap();
    let dec = ontic_decomposition(&psi.reduced(&["a"]).unwrap(), DEG);
    assert_abs_diff_eq!(dec.entries()[0].probability, 0.64, epsilon = 1e-12);
    assert_abs_diff_eq!(dec.entries()[1].probability, 0.36, epsilon = 1e-12);
    assert_abs_diff_eq!(dec.entries()[0].state.amplitudes()[1].norm(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(dec.entries()[1].state.amplitudes()[0].norm(), 1.0, epsilon = 1e-12);
    assert!(!dec.is_degenerate());
}

#[test]
fn degenerate_basis_does_not_depend_on_solver_rotation() {
    // same state written in two rotated eigenbases of its degenerate block
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let space = HilbertSpace::single("x", 4).unwrap();
    let u = random::unitary(&mut rng, 4);
    let rho_diag = CMatrix::from_diagonal(&CVector::from_vec(vec![
        c(0.4, 0.0),
        c(0.2, 0.0),
        c(0.2, 0.0),
        c(0.2, 0.0),
    ]));
    let rho = DensityMatrix::new(space.clone(), &u * &rho_diag * u.adjoint()).unwrap();
    let mut block = crate::qcore::linalg::identity(4);
    let v = random::unitary(&mut rng, 3);
    block.view_mut((1, 1), (3, 3)).copy_from(&v);
    let u2 = &u * block;
    let rho2 = DensityMatrix::new(space, &u2 * &rho_diag * u2.adjoint()).unwrap();
    let d1 = ontic_decomposition(&rho, DEG);
    let d2 = ontic_decomposition(&rho2, DEG);
    assert_eq!(d1.degeneracy_groups(), &[vec![1, 2, 3]]);
    assert!(max_abs(&(d1.basis() - d2.basis())) < 1e-9);
}

#[test]
fn closed_system_chain_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let space = HilbertSpace::single("x", 3).unwrap();
    let psi = random::pure_state(&mut rng, &space);
    let u = UnitaryOperator::new(space, random::unitary(&mut rng, 3)).unwrap();
    let table = single_system_conditional(&unitary_channel(&u), &psi.density(), DEG).unwrap();
    assert_abs_diff_eq!(table.value(0, &[0]), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(table.value(0, &[1]), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(table.value(0, &[2]), 0.0, epsilon = 1e-12);
}

#[test]
fn identity_channel_gives_identity_table() {
    let rho = DensityMatrix::diagonal(ab(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
    let table = single_system_conditional(&QuantumChannel::identity(ab()), &rho, DEG).unwrap();
    for w in 0..4 {
        for k in 0..4 {
            assert_abs_diff_eq!(table.value(w, &[k]), if w == k { 1.0 } else { 0.0 }, epsilon = 1e-12);
        }
    }
}

/// Tr[(P₁ ⊗ P₂) X] by explicit index sums.
fn brute_trace(p1: &CMatrix, p2: &CMatrix, x: &CMatrix) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    // (P₁⊗P₂)_{(ij),(kl)} X_{(kl),(ij)}
                    acc += p1[(i, k)] * p2[(j, l)] * x[(2 * k + l, 2 * i + j)];
                }
            }
        }
    }
    acc.re
}

#[test]
fn cnot_bipartite_table_matches_brute_force() {
    let rho = DensityMatrix::diagonal(ab(), &[0.7, 0.0, 0.0, 0.3]).unwrap();
    let u = UnitaryOperator::new(ab(), cnot()).unwrap();
    let table = conditional_probabilities(&unitary_channel(&u), &rho, &[vec!["a"], vec!["b"]], DEG).unwrap();

    // parent ontic states: |00⟩, |11⟩, then the null block in canonical order |01⟩, |10⟩
    let parent = [0usize, 3, 1, 2];
    // evolved marginals are diag(0.7, 0.3) and |0⟩⟨0|, so both subsystem bases are standard
    let proj = |k: usize| {
        let mut m = CMatrix::zeros(2, 2);
        m[(k, k)] = ONE;
        m
    };
    let cn = cnot();
    for (w, &basis_index) in parent.iter().enumerate() {
        let mut pw = CMatrix::zeros(4, 4);
        pw[(basis_index, basis_index)] = ONE;
        let evolved = &cn * pw * cn.adjoint();
        for i1 in 0..2 {
            for i2 in 0..2 {
                let expected = brute_trace(&proj(i1), &proj(i2), &evolved);
                assert_abs_diff_eq!(table.value(w, &[i1, i2]), expected, epsilon = 1e-12);
            }
        }
    }
    // |11⟩ → |10⟩
    assert_abs_diff_eq!(table.value(1, &[1, 0]), 1.0, epsilon = 1e-12);
}

#[test]
fn dephasing_of_plus_minus_mixture() {
    let s = HilbertSpace::qubit("s");
    let plus = PureState::new(s.clone(), ket_plus()).unwrap().density();
    let minus = PureState::new(s.clone(), ket_minus()).unwrap().density();
    let rho = DensityMatrix::mixture(&[(0.7, &plus), (0.3, &minus)]).unwrap();
    let mut up = CMatrix::zeros(2, 2);
    up[(0, 0)] = ONE;
    let mut down = CMatrix::zeros(2, 2);
    down[(1, 1)] = ONE;
    let dephasing = QuantumChannel::new(s.clone(), s, vec![up, down]).unwrap();
    let table = single_system_conditional(&dephasing, &rho, DEG).unwrap();
    for w in 0..2 {
        for k in 0..2 {
            assert_abs_diff_eq!(table.value(w, &[k]), 0.5, epsilon = 1e-12);
        }
    }
}

#[test]
fn bad_partition_is_rejected() {
    let rho = DensityMatrix::maximally_mixed(ab());
    let ch = QuantumChannel::identity(ab());
    let err = conditional_probabilities(&ch, &rho, &[vec!["a"]], DEG).unwrap_err();
    assert!(matches!(err, Error::BadPartition(_)));
    let err = conditional_probabilities(&ch, &rho, &[vec!["a"], vec!["a", "b"]], DEG).unwrap_err();
    assert!(matches!(err, Error::BadPartition(_)));
}

#[test]
fn bayesian_identity_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random::density_matrix(&mut rng, &HilbertSpace::qubit("a"));
    let b = random::density_matrix(&mut rng, &HilbertSpace::qubit("b"));
    let product = crate::qcore::tensor(&a, &b).unwrap();
    let defect =
        bayesian_propagation_check(&QuantumChannel::identity(ab()), &product, &[vec!["a"], vec!["b"]], DEG).unwrap();
    assert!(defect <= 1e-12, "{defect}");

    let ch = random_dilation(&mut rng, &ab(), 2);
    let rho = random::density_matrix(&mut rng, &ab());
    let defect = bayesian_propagation_check(&ch, &rho, &[vec!["a"], vec!["b"]], DEG).unwrap();
    assert!(defect <= 1e-9, "{defect}");

    let w = HilbertSpace::new([("a", 2), ("b", 3)]).unwrap();
    let u = UnitaryOperator::new(w.clone(), random::unitary(&mut rng, 6)).unwrap();
    let rho = random::density_matrix(&mut rng, &w);
    let defect = bayesian_propagation_check(&unitary_channel(&u), &rho, &[vec!["b"], vec!["a"]], DEG).unwrap();
    assert!(defect <= 1e-9, "{defect}");
}

#[test]
fn psd_pairing_examples() {
    let i3 = crate::qcore::linalg::identity(3);
    assert_abs_diff_eq!(psd_pairing_check(&i3, &i3).unwrap(), 3.0, epsilon = 1e-14);
    let mut p = CMatrix::zeros(2, 2);
    p[(0, 0)] = ONE;
    let mut q = CMatrix::zeros(2, 2);
    q[(1, 1)] = ONE;
    assert_abs_diff_eq!(psd_pairing_check(&p, &q).unwrap(), 0.0, epsilon = 1e-15);
    let err = psd_pairing_check(&pauli_z(), &p).unwrap_err();
    assert!(matches!(err, Error::NotPSD { .. }));
}

#[test]
fn table_serialization() {
    let rho = DensityMatrix::diagonal(ab(), &[0.7, 0.0, 0.0, 0.3]).unwrap();
    let u = UnitaryOperator::new(ab(), cnot()).unwrap();
    let table = conditional_probabilities(&unitary_channel(&u), &rho, &[vec!["a"], vec!["b"]], DEG).unwrap();
    let csv = table.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("w,i1,i2,p"));
    assert_eq!(csv.lines().count(), 1 + 16);
    assert_eq!(lines.next(), Some("0,0,0,1"));

    let json = serde_json::to_value(table.to_json()).unwrap();
    for key in ["parent_indices", "splits", "values"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let back = ConditionalProbabilityTable::from_json(serde_json::from_value(json).unwrap()).unwrap();
    assert_eq!(back.values().len(), 4);
    assert_eq!(back.split_dims(), vec![2, 2]);
    assert_eq!(back.tuple_of(3), vec![1, 1]);
}

#[test]
fn kernel_validation() {
    assert!(ConditionalProbabilityTable::kernel("q", vec![vec![0.5, 0.5], vec![0.1, 0.9]]).is_ok());
    let err = ConditionalProbabilityTable::kernel("q", vec![vec![0.5, 0.6], vec![0.1, 0.9]]).unwrap_err();
    assert!(matches!(err, Error::NotADistribution(_)));
    let err = ConditionalProbabilityTable::kernel("q", vec![vec![1.5, -0.5], vec![0.1, 0.9]]).unwrap_err();
    assert!(matches!(err, Error::NotADistribution(_)));
}

#[test]
fn short_time_continuity() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let s = HilbertSpace::qubit("s");
    let e = HilbertSpace::qubit("e");
    let w = s.tensor(&e).unwrap();
    for _ in 0..5 {
        let h = random::unit_norm_hermitian(&mut rng, 4);
        let rho_s = random::density_matrix(&mut rng, &s);
        let rho_e = random::density_matrix(&mut rng, &e);
        let mut worst_c = 0.0_f64;
        for t in [1e-5, 1e-4, 1e-3] {
            let u = UnitaryOperator::evolution(w.clone(), &h, t).unwrap();
            let ch = dilation_channel(&u, &rho_e, &["s"], &["e"]).unwrap();
            let table = single_system_conditional(&ch, &rho_s, DEG).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    worst_c = worst_c.max((table.value(a, &[b]) - delta).abs() / t);
                }
            }
        }
        assert!(worst_c < 1.0, "empirical continuity constant {worst_c}");
    }
}

#[test]
fn values_are_phase_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let ch = random_dilation(&mut rng, &ab(), 2);
    let rho = random::density_matrix(&mut rng, &ab());
    let table = single_system_conditional(&ch, &rho, DEG).unwrap();
    let parent = ontic_decomposition(&rho, DEG);
    let evolved = ontic_decomposition(&apply(&ch, &rho).unwrap(), DEG);
    for (w, pe) in parent.entries().iter().enumerate() {
        let phase = Complex64::from_polar(1.0, rng.random::<f64>() * 6.0);
        let v = pe.state.amplitudes() * phase;
        let out = ch.apply_operator(&crate::qcore::linalg::outer(&v));
        for (k, ee) in evolved.entries().iter().enumerate() {
            let phase = Complex64::from_polar(1.0, rng.random::<f64>() * 6.0);
            let u = ee.state.amplitudes() * phase;
            let value = u.dotc(&(&out * &u)).re;
            assert_abs_diff_eq!(table.value(w, &[k]), value.max(0.0), epsilon = 1e-12);
        }
    }
}

#[test]
fn decomposition_invariants_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let space = HilbertSpace::new([("a", 3), ("b", 3)]).unwrap();
    for _ in 0..10 {
        let rho = random::density_matrix(&mut rng, &space);
        let dec = ontic_decomposition(&rho, DEG);
        assert_abs_diff_eq!(dec.probabilities().iter().sum::<f64>(), 1.0, epsilon = 1e-10);
        assert!(dec.orthonormality_defect() < 1e-10);
        assert!(max_abs(&(dec.reconstruct() - rho.matrix())) < 1e-10);
        for e in dec.entries() {
            assert!(max_abs(&(&e.projector - e.state.projector())) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tables_are_distributions(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = HilbertSpace::new([("a", da), ("b", db)]).unwrap();
        let ch = random_dilation(&mut rng, &s, 2);
        let rho = random::density_matrix(&mut rng, &s);
        let table = conditional_probabilities(&ch, &rho, &[vec!["a"], vec!["b"]], DEG).unwrap();
        prop_assert!(table.min_value() >= -1e-10);
        prop_assert!(table.max_row_sum_defect() <= 1e-9);
        prop_assert!(bayesian_propagation_check(&ch, &rho, &[vec!["a"], vec!["b"]], DEG).unwrap() <= 1e-9);
    }

    #[test]
    fn psd_pairs_are_nonnegative(seed in any::<u64>(), d in 1usize..=9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g1 = random::ginibre(&mut rng, d, d);
        let g2 = random::ginibre(&mut rng, d, d);
        let a = &g1 * g1.adjoint();
        let b = &g2 * g2.adjoint();
        prop_assert!(psd_pairing_check(&a, &b).unwrap() >= -1e-12);
    }
}
