use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channels::{apply, channels_equal, dilation_channel, unitary_channel, UnitaryOperator};
use crate::qcore::gates::*;
use crate::qcore::linalg::{c, max_abs, ONE, ZERO};
use crate::qcore::{random, tensor, PureState};
use crate::tolerance::DEFAULT_DEGENERACY_GAP as DEG;

fn se() -> HilbertSpace {
    HilbertSpace::new([("s", 2), ("e", 2)]).unwrap()
}

fn basis_projector(d: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(k, k)] = ONE;
    m
}

fn random_channel(rng: &mut ChaCha8Rng, space: &HilbertSpace) -> QuantumChannel {
    let anc = HilbertSpace::qubit("anc");
    let w = space.tensor(&anc).unwrap();
    let u = UnitaryOperator::new(w.clone(), random::unitary(rng, w.total_dim())).unwrap();
    let rho = random::density_matrix(rng, &anc);
    dilation_channel(&u, &rho, &space.labels(), &["anc"]).unwrap()
}

/// Random single-qubit channel on `label`.
fn local_channel(rng: &mut ChaCha8Rng, label: &str) -> QuantumChannel {
    random_channel(rng, &HilbertSpace::qubit(label))
}

#[test]
fn identity_parent_gives_identity() {
    for k in 0..2 {
        let (ch, report) =
            conditional_channel_given_env(&QuantumChannel::identity(se()), &basis_projector(2, k), &["s"]).unwrap();
        assert!(report.is_cptp());
        assert!(channels_equal(&ch, &QuantumChannel::identity(HilbertSpace::qubit("s"))).unwrap());
    }
}

#[test]
fn factorized_parent_gives_local_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let es = local_channel(&mut rng, "s");
    let ee = local_channel(&mut rng, "e");
    let parent = es.tensor(&ee).unwrap();
    for _ in 0..4 {
        let phi = random::pure_state(&mut rng, &HilbertSpace::qubit("e"));
        let (ch, report) = conditional_channel_given_env(&parent, &phi.projector(), &["s"]).unwrap();
        assert!(report.is_cptp());
        assert!(channels_equal(&ch, &es).unwrap());
    }
}

#[test]
fn cnot_conditioned_on_environment() {
    let cnot_ch = unitary_channel(&UnitaryOperator::new(se(), cnot()).unwrap());
    // S controls: with E = |1⟩ the control populations survive but the
    // coherences are lost to the target
    let (ch, _) = conditional_channel_given_env(&cnot_ch, &basis_projector(2, 1), &["s"]).unwrap();
    let x = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]);
    let out = ch.apply_operator(&x);
    assert!(max_abs(&(out - CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), ZERO, ZERO, c(0.4, 0.0)]))) < 1e-14);

    // E controls (environment listed first): E = |1⟩ flips S, E = |0⟩ leaves it
    let es = HilbertSpace::new([("e", 2), ("s", 2)]).unwrap();
    let e_controls = unitary_channel(&UnitaryOperator::new(es, cnot()).unwrap());
    let (flip, report) = conditional_channel_given_env(&e_controls, &basis_projector(2, 1), &["s"]).unwrap();
    assert!(report.is_cptp());
    let expected = unitary_channel(&UnitaryOperator::new(HilbertSpace::qubit("s"), pauli_x()).unwrap());
    assert!(channels_equal(&flip, &expected).unwrap());
    let (keep, _) = conditional_channel_given_env(&e_controls, &basis_projector(2, 0), &["s"]).unwrap();
    assert!(channels_equal(&keep, &QuantumChannel::identity(HilbertSpace::qubit("s"))).unwrap());
}

#[test]
fn environment_projector_is_validated() {
    let ch = QuantumChannel::identity(se());
    let half = CMatrix::identity(2, 2) * c(0.5, 0.0);
    assert!(matches!(
        conditional_channel_given_env(&ch, &half, &["s"]),
        Err(Error::NotAProjector { .. })
    ));
    let full = CMatrix::identity(2, 2);
    assert!(matches!(
        conditional_channel_given_env(&ch, &full, &["s"]),
        Err(Error::NotAProjector { .. })
    ));
    assert!(matches!(
        conditional_channel_given_env(&ch, &basis_projector(3, 0), &["s"]),
        Err(Error::SpaceMismatch(_))
    ));
}

#[test]
fn product_state_identity_channel_table() {
    let rho = tensor(
        &DensityMatrix::diagonal(HilbertSpace::qubit("s"), &[0.9, 0.1]).unwrap(),
        &DensityMatrix::diagonal(HilbertSpace::qubit("e"), &[0.7, 0.3]).unwrap(),
    )
    .unwrap();
    let table = parent_conditioned_probabilities(&QuantumChannel::identity(se()), &rho, &["s"], DEG).unwrap();
    // parent ontic order: 0.63 |00⟩, 0.27 |01⟩, 0.07 |10⟩, 0.03 |11⟩
    let s_of_parent = [0usize, 0, 1, 1];
    for (w, &s) in s_of_parent.iter().enumerate() {
        for k in 0..2 {
            assert_abs_diff_eq!(table.value(w, &[k]), if k == s { 1.0 } else { 0.0 }, epsilon = 1e-12);
        }
    }
}

#[test]
fn uncorrelated_parent_matches_conditioned_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let parent_ch = random_channel(&mut rng, &se());
    let rho_s = random::density_matrix(&mut rng, &HilbertSpace::qubit("s"));
    let rho_e = random::density_matrix(&mut rng, &HilbertSpace::qubit("e"));
    let rho_w = tensor(&rho_s, &rho_e).unwrap();
    let table = parent_conditioned_probabilities(&parent_ch, &rho_w, &["s"], DEG).unwrap();

    let parent = ontic_decomposition(&rho_w, DEG);
    let s_dec = ontic_decomposition(&rho_s, DEG);
    let e_dec = ontic_decomposition(&rho_e, DEG);
    let s_after = ontic_decomposition(
        &partial_trace(&apply(&parent_ch, &rho_w).unwrap(), &["s"]).unwrap(),
        DEG,
    );
    for (w, entry) in parent.entries().iter().enumerate() {
        // locate the product pair (s, e) with P_W = P_S ⊗ P_E
        let (si, ei) = (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .find(|&(a, b)| {
                let prod = linalg::kron(&s_dec.entries()[a].projector, &e_dec.entries()[b].projector);
                max_abs(&(prod - &entry.projector)) < 1e-9
            })
            .expect("product eigenprojector");
        let (cond, _) = conditional_channel_given_env(&parent_ch, &e_dec.entries()[ei].projector, &["s"]).unwrap();
        let evolved = cond.apply_operator(&s_dec.entries()[si].projector);
        for (k, s_state) in s_after.entries().iter().enumerate() {
            let direct = linalg::trace_of_product(&s_state.projector, &evolved).re;
            assert_abs_diff_eq!(table.value(w, &[k]), direct.max(0.0), epsilon = 1e-10);
        }
    }
}

#[test]
fn factorization_examples() {
    let up_down = basis_projector(4, 1);
    let r = projector_factorization_check(&up_down, &se(), &["s"]).unwrap();
    assert!(r.factorizes);
    assert!(r.defect <= 1e-12);

    let bell = PureState::new(se(), ket_bell()).unwrap().projector();
    let r = projector_factorization_check(&bell, &se(), &["s"]).unwrap();
    assert!(!r.factorizes);
    // best candidate is 1/2 ⊗ 1/2 with residual √(3/4)
    assert_abs_diff_eq!(r.defect, 0.75f64.sqrt(), epsilon = 1e-12);
    assert!(r.defect >= 0.4);

    // rank-2 product: |0⟩⟨0| ⊗ 1
    let p = linalg::kron(&basis_projector(2, 0), &CMatrix::identity(2, 2));
    let r = projector_factorization_check(&p, &se(), &["s"]).unwrap();
    assert!(r.factorizes, "{}", r.defect);

    // environment listed first in the parent
    let es = HilbertSpace::new([("e", 2), ("s", 2)]).unwrap();
    assert!(
        projector_factorization_check(&basis_projector(4, 2), &es, &["s"])
            .unwrap()
            .factorizes
    );

    let not_projector = CMatrix::identity(4, 4) * c(0.5, 0.0);
    assert!(matches!(
        projector_factorization_check(&not_projector, &se(), &["s"]),
        Err(Error::NotAProjector { .. })
    ));
}

#[test]
fn bell_parent_eigenprojectors_do_not_factorize() {
    let bell = PureState::new(se(), ket_bell()).unwrap().density();
    let dec = ontic_decomposition(&bell, DEG);
    let r = projector_factorization_check(&dec.entries()[0].projector, &se(), &["s"]).unwrap();
    assert!(!r.factorizes);
}

#[test]
fn witness_examples() {
    let pair = bell_vs_mixed();
    let cnot_ch = witness_channel("cnot").unwrap();
    let same = nonlinearity_witness(&cnot_ch, &pair.rho_1, &pair.rho_1, &["s"]).unwrap();
    assert_eq!(same.reduced_distance_after, 0.0);

    let r = nonlinearity_witness(&cnot_ch, &pair.rho_1, &pair.rho_2, &["s"]).unwrap();
    assert!(r.marginal_distance_before <= 1e-12);
    assert_abs_diff_eq!(r.reduced_distance_after, 0.5, epsilon = 1e-10);

    // CNOT|Φ⁺⟩ = |+⟩|0⟩
    let out = apply(&cnot_ch, &pair.rho_1).unwrap();
    let plus = PureState::new(HilbertSpace::qubit("s"), ket_plus()).unwrap().density();
    assert!(max_abs(&(partial_trace(&out, &["s"]).unwrap().matrix() - plus.matrix())) < 1e-12);

    let fac = witness_channel("factorized").unwrap();
    let r = nonlinearity_witness(&fac, &pair.rho_1, &pair.rho_2, &["s"]).unwrap();
    assert!(r.reduced_distance_after <= 1e-10);

    let json = serde_json::to_value(r.to_json("factorized", &pair.id)).unwrap();
    for key in ["distance_before", "distance_after", "channel", "pair_id"] {
        assert!(json.get(key).is_some());
    }
    assert!(witness_channel("bogus").is_err());
}

#[test]
fn witness_needs_equal_marginals() {
    let up = PureState::new(se(), CVector::from_vec(vec![ONE, ZERO, ZERO, ZERO]))
        .unwrap()
        .density();
    let err = nonlinearity_witness(&witness_channel("cnot").unwrap(), &up, &bell_vs_mixed().rho_2, &["s"]).unwrap_err();
    match err {
        Error::NotAWitnessPair { distance } => assert_abs_diff_eq!(distance, 0.5, epsilon = 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn werner_library() {
    assert!(werner_pair(1.5).is_err());
    for pair in witness_library() {
        let cnot_ch = witness_channel("cnot").unwrap();
        let r = nonlinearity_witness(&cnot_ch, &pair.rho_1, &pair.rho_2, &["s"]).unwrap();
        assert!(r.reduced_distance_after > 0.1, "{}", pair.id);
        let r = nonlinearity_witness(
            &witness_channel("factorized").unwrap(),
            &pair.rho_1,
            &pair.rho_2,
            &["s"],
        )
        .unwrap();
        assert!(r.reduced_distance_after <= 1e-10, "{}", pair.id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conditioned_channels_are_cptp(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parent = random_channel(&mut rng, &se());
        let phi = random::pure_state(&mut rng, &HilbertSpace::qubit("e"));
        let (_, report) = conditional_channel_given_env(&parent, &phi.projector(), &["s"]).unwrap();
        prop_assert!(report.is_cptp(), "{report:?}");
    }

    #[test]
    fn parent_conditioned_rows_are_distributions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parent = random_channel(&mut rng, &se());
        let rho = random::density_matrix(&mut rng, &se());
        let table = parent_conditioned_probabilities(&parent, &rho, &["s"], DEG).unwrap();
        prop_assert!(table.min_value() >= -1e-10);
        prop_assert!(table.max_row_sum_defect() <= 1e-9);
    }

    #[test]
    fn factorized_channels_act_linearly(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parent = local_channel(&mut rng, "s").tensor(&local_channel(&mut rng, "e")).unwrap();
        // two parents with the same s marginal: ρ_S ⊗ σ and a correlated one
        let rho_s = random::density_matrix(&mut rng, &HilbertSpace::qubit("s"));
        let sigma = random::density_matrix(&mut rng, &HilbertSpace::qubit("e"));
        let product = tensor(&rho_s, &sigma).unwrap();
        let mut corr = product.matrix().clone();
        let eps = c(0.05, 0.02);
        // add a traceless correlation that leaves both marginals alone
        let z = pauli_z();
        let x = pauli_x();
        let kz = linalg::kron(&z, &x) * eps;
        corr += &kz + kz.adjoint();
        let rho_2 = DensityMatrix::from_computed(se(), corr);
        prop_assume!(rho_2.is_ok());
        let r = nonlinearity_witness(&parent, &product, &rho_2.unwrap(), &["s"]).unwrap();
        prop_assert!(r.reduced_distance_after <= 1e-10);
    }
}
