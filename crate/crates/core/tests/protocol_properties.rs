//! Extraction, conveyor and GHZ behaviour, with dense-oracle references.

mod common;

use matryoshka_core::analysis::{cavity_field_ratios, state_fidelity};
use matryoshka_core::matryoshka::{bell_schedule, verify_matryoshka, BellLabel, InitialState};
use matryoshka_core::oracle::{dense_expm_evolve, dense_hamiltonian, expm};
use matryoshka_core::propagator::t_star;
use matryoshka_core::protocols::{
    conveyor_run, extract_pair, ghz_fidelity, ghz_protocol, ChainClass, ExtractOptions,
};
use matryoshka_core::{build_hamiltonian, reduced_density, ChainSpec, Error, SiteIndex, StateVector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

fn evolved(spec: &ChainSpec, start: &StateVector) -> StateVector {
    dense_expm_evolve(&build_hamiltonian(spec).unwrap(), start, t_star(spec.lambda)).unwrap()
}

#[test]
fn extraction_preserves_inner_marginals() {
    for n in [5, 7] {
        let spec = ChainSpec::matryoshka(n, 1.0).unwrap();
        let v = evolved(&spec, &StateVector::all_zero(n).unwrap());
        let out = extract_pair(&v, ExtractOptions::default()).unwrap();
        assert!((out.v_after.norm() - 1.0).abs() < 1e-12);
        for k in 2..n {
            let s = SiteIndex::new(k, n).unwrap();
            let before = reduced_density(&v, &[s]).unwrap();
            let after = reduced_density(&out.v_after, &[s]).unwrap();
            assert!(before.trace_distance(&after).unwrap() < 1e-10);
        }
        for k in [1, n] {
            let s = SiteIndex::new(k, n).unwrap();
            assert!((reduced_density(&out.v_after, &[s]).unwrap().z_expectation().unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn n7_extraction_gives_psi_minus() {
    let spec = ChainSpec::matryoshka(7, 1.0).unwrap();
    let out = extract_pair(&evolved(&spec, &StateVector::all_zero(7).unwrap()), ExtractOptions::default()).unwrap();
    let overlap: Complex64 = out
        .pair_state
        .iter()
        .zip(BellLabel::PsiMinus.amplitudes())
        .map(|(a, b)| a.conj() * b)
        .sum();
    assert!((overlap.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn perturbed_extraction_needs_force() {
    let spec = ChainSpec::matryoshka(3, 1.0).unwrap().with_field_ratios(&[0.05, 0.05, 0.05]).unwrap();
    let v = evolved(&spec, &StateVector::all_zero(3).unwrap());
    match extract_pair(&v, ExtractOptions::default()) {
        Err(Error::PairNotPure { purity, .. }) => assert!(purity < 1.0 - 1e-6),
        other => panic!("expected PairNotPure, got {other:?}"),
    }
    let forced = extract_pair(&v, ExtractOptions { force: true, ..Default::default() }).unwrap();
    assert!(forced.pair_fidelity < 1.0 && forced.pair_fidelity > 0.99, "{}", forced.pair_fidelity);
}

#[test]
fn conveyor_alternates_for_n5_and_n7() {
    for n in [5, 7] {
        let recs = conveyor_run(&ChainSpec::matryoshka(n, 1.0).unwrap(), 6).unwrap();
        assert_eq!(recs.len(), 6);
        for (k, r) in recs.iter().enumerate() {
            assert_eq!(r.round, k + 1);
            assert!(r.extraction_concurrence >= 1.0 - 1e-8, "N = {n} round {}", r.round);
            let want = if k % 2 == 0 { ChainClass::MatryoshkaLike } else { ChainClass::ZBasisSeparable };
            assert_eq!(r.post_extraction_chain_class, want, "N = {n} round {}", r.round);
            assert!(r.internal_state_fidelity >= 1.0 - 1e-9);
            assert!((r.label_fidelity - 1.0).abs() < 1e-9);
        }
        let json = serde_json::to_string(&recs).unwrap();
        let back: Vec<matryoshka_core::protocols::ConveyorRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, recs);
    }
}

#[test]
fn separable_phase_evolves_back_into_full_matryoshka() {
    for n in [5, 7] {
        let spec = ChainSpec::matryoshka(n, 1.0).unwrap();
        let first = extract_pair(&evolved(&spec, &StateVector::all_zero(n).unwrap()), ExtractOptions::default()).unwrap();
        let second = extract_pair(&evolved(&spec, &first.v_after), ExtractOptions::default()).unwrap();
        let again = evolved(&spec, &second.v_after);
        for p in bell_schedule(n, InitialState::All0).unwrap().pairs {
            let rho = reduced_density(&again, &[p.low, p.high]).unwrap();
            assert!(matryoshka_core::analysis::concurrence(&rho).unwrap() >= 1.0 - 1e-8);
        }
    }
}

#[test]
fn pre_hadamard_state_returns_to_basis_state() {
    for n in [3, 5, 7] {
        let spec = ChainSpec::matryoshka(n, 1.0).unwrap();
        let mid = evolved(&spec, &StateVector::all_zero(n).unwrap());
        let report = verify_matryoshka(&mid, &bell_schedule(n, InitialState::All0).unwrap()).unwrap();
        assert!(report.is_matryoshka(1e-9));
        let back = evolved(&spec, &mid);
        assert!(back.amplitude(0).norm() >= 1.0 - 1e-9);
    }
}

/// The GHZ recipe with a Kronecker-built Hadamard and the Padé exponential.
fn oracle_ghz(spec: &ChainSpec) -> f64 {
    let n = spec.n_sites;
    let c = (n + 1) / 2;
    let hd = build_hamiltonian(spec).unwrap();
    let u = expm(&(dense_hamiltonian(&hd) * Complex64::new(0.0, -t_star(spec.lambda)))).unwrap();
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let had = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
    let mut kick = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for site in (1..=n).rev() {
        let f = if site == c { had.clone() } else { DMatrix::identity(2, 2) };
        kick = kick.kronecker(&f);
    }
    let mut v0 = DVector::from_element(1 << n, Complex64::new(0.0, 0.0));
    v0[0] = Complex64::new(1.0, 0.0);
    let out = &u * (kick * (&u * v0));
    (out[0].norm() + out[(1 << n) - 1].norm()) * FRAC_1_SQRT_2
}

#[test]
fn ghz_matches_oracle_recipe() {
    for n in [3, 5, 7] {
        let spec = ChainSpec::matryoshka(n, 1.0).unwrap();
        let main = ghz_protocol(&spec).unwrap();
        let reference = oracle_ghz(&spec);
        assert!((main.ghz_fidelity - reference).abs() < 1e-9);
        assert!(main.ghz_fidelity >= 1.0 - 1e-8, "N = {n}");
        let (f, phi) = ghz_fidelity(&main.state.scaled(Complex64::from_polar(1.0, 0.4)));
        assert!((f - main.ghz_fidelity).abs() < 1e-14);
        assert!((phi - main.relative_phase).abs() < 1e-12);
    }
    let perturbed = ChainSpec::matryoshka(3, 1.0).unwrap().with_field_ratios(&cavity_field_ratios()).unwrap();
    let main = ghz_protocol(&perturbed).unwrap();
    assert!((main.ghz_fidelity - oracle_ghz(&perturbed)).abs() < 1e-9);
    assert!(main.ghz_fidelity < 1.0 && main.ghz_fidelity >= 0.98, "{}", main.ghz_fidelity);
    assert!(state_fidelity(&main.state, &main.state).unwrap() > 0.999_999);
}
