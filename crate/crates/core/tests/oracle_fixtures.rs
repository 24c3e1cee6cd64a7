//! Oracle cases for every derived value, stored as JSON fixtures.
//!
//! Set `MATRYOSHKA_REGEN_ORACLE=1` to rewrite the fixtures. Otherwise each case
//! is recomputed, checked against its stored reference, and the main build is
//! gated on a discrepancy below 1e-8.

use std::path::PathBuf;

use matryoshka_core::analysis::{concurrence, cavity_field_ratios, cavity_point_check, cavity_point_scaled, state_fidelity};
use matryoshka_core::matryoshka::{bell_schedule, ideal_matryoshka_state, InitialState};
use matryoshka_core::oracle::{
    dense_expm_evolve, dense_heisenberg, exhaustive_pauli_decompose, OracleReport, OracleValue,
};
use matryoshka_core::propagator::{heisenberg_evolve, t_star};
use matryoshka_core::protocols::{conveyor_run, extract_pair, ghz_protocol, ExtractOptions};
use matryoshka_core::{
    build_hamiltonian, gate_apply, ChainSpec, DensityMatrix, Pauli, PauliString, Propagator, SiteIndex,
    StateVector,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

const GATE: f64 = 1e-8;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/oracle")
}

fn regenerate() -> bool {
    std::env::var("MATRYOSHKA_REGEN_ORACLE").is_ok_and(|v| v == "1")
}

fn check(report: OracleReport) {
    let dir = fixture_dir();
    if regenerate() {
        report.write_fixture(&dir).unwrap();
    } else {
        let stored = OracleReport::read_fixture(&dir, &report.case_id)
            .unwrap_or_else(|e| panic!("{e}; run with MATRYOSHKA_REGEN_ORACLE=1"));
        let drift = stored.reference_value.distance(&report.reference_value).unwrap();
        assert!(drift < GATE, "{}: oracle drifted from fixture by {drift:e}", report.case_id);
    }
    assert!(
        report.discrepancy < GATE,
        "{}: discrepancy {:e}",
        report.case_id,
        report.discrepancy
    );
}

fn spec(n: usize) -> ChainSpec {
    ChainSpec::matryoshka(n, 1.0).unwrap()
}

fn oracle_evolve(spec: &ChainSpec, v: &StateVector) -> StateVector {
    dense_expm_evolve(&build_hamiltonian(spec).unwrap(), v, t_star(spec.lambda)).unwrap()
}

fn main_evolve(spec: &ChainSpec, v: &StateVector) -> StateVector {
    Propagator::with_default_method(build_hamiltonian(spec).unwrap())
        .unwrap()
        .evolve(v, t_star(spec.lambda))
        .unwrap()
}

#[test]
fn evolved_matryoshka_states() {
    for n in [3, 5, 7] {
        let zero = StateVector::all_zero(n).unwrap();
        check(
            OracleReport::new(
                format!("evolve_all_zero_n{n}"),
                OracleValue::from_state(&oracle_evolve(&spec(n), &zero)),
                OracleValue::from_state(&main_evolve(&spec(n), &zero)),
            )
            .unwrap(),
        );
    }
}

#[test]
fn schedule_fidelities() {
    for n in [3, 5, 7, 9] {
        for initial in [InitialState::All0, InitialState::All1] {
            let ideal = ideal_matryoshka_state(&bell_schedule(n, initial).unwrap()).unwrap();
            let start = initial.state(n).unwrap();
            check(
                OracleReport::new(
                    format!("schedule_{initial:?}_n{n}").to_lowercase(),
                    OracleValue::Scalar(state_fidelity(&ideal, &oracle_evolve(&spec(n), &start)).unwrap()),
                    OracleValue::Scalar(state_fidelity(&ideal, &main_evolve(&spec(n), &start)).unwrap()),
                )
                .unwrap(),
            );
        }
    }
}

#[test]
fn heisenberg_pair_operators() {
    for n in [3, 5] {
        let h = build_hamiltonian(&spec(n)).unwrap();
        for i in 1..=(n - 1) / 2 {
            for (name, letter) in [("xx", Pauli::X), ("yy", Pauli::Y)] {
                let op = PauliString::from_sparse(n, &[(i, letter), (n - i + 1, letter)]).unwrap();
                let reference = exhaustive_pauli_decompose(&dense_heisenberg(&h, &op, t_star(1.0)).unwrap()).unwrap();
                let main = heisenberg_evolve(&h, &op, t_star(1.0), None).unwrap();
                check(
                    OracleReport::new(
                        format!("heisenberg_{name}{i}_n{n}"),
                        OracleValue::from_terms(&reference),
                        OracleValue::from_terms(&main.decomposition),
                    )
                    .unwrap(),
                );
            }
        }
    }
}

/// Largest eigenvalue route to `C = max(0, λ₁ − λ₂ − λ₃ − λ₄)` via a general Schur decomposition.
fn brute_concurrence(rho: &DMatrix<Complex64>) -> f64 {
    let mut yy = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
    for (r, c, s) in [(0, 3, -1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 0, -1.0)] {
        yy[(r, c)] = Complex64::new(s, 0.0);
    }
    let tilde = &yy * rho.map(|z| z.conj()) * &yy;
    let ev = (rho * tilde).schur().eigenvalues().unwrap();
    let mut l: Vec<f64> = ev.iter().map(|e| e.re.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

#[test]
fn werner_concurrence() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = nalgebra::DVector::from_column_slice(&[
        Complex64::new(0.0, 0.0),
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::new(0.0, 0.0),
    ]);
    let m = (&psi * psi.adjoint()) * Complex64::new(0.5, 0.0)
        + DMatrix::identity(4, 4) * Complex64::new(0.125, 0.0);
    let sites = vec![SiteIndex::new(1, 2).unwrap(), SiteIndex::new(2, 2).unwrap()];
    let rho = DensityMatrix::new(sites, m.clone()).unwrap();
    check(
        OracleReport::new(
            "werner_p0.5_concurrence",
            OracleValue::Scalar(brute_concurrence(&m)),
            OracleValue::Scalar(concurrence(&rho).unwrap()),
        )
        .unwrap(),
    );
}

fn oracle_field_fidelity(ratios: &[f64]) -> f64 {
    let zero = StateVector::all_zero(3).unwrap();
    let ideal = oracle_evolve(&spec(3), &zero);
    let perturbed = oracle_evolve(&spec(3).with_field_ratios(ratios).unwrap(), &zero);
    state_fidelity(&ideal, &perturbed).unwrap()
}

#[test]
fn cavity_point_fidelities() {
    check(
        OracleReport::new(
            "cavity_point",
            OracleValue::Scalar(oracle_field_fidelity(&cavity_field_ratios())),
            OracleValue::Scalar(cavity_point_check().unwrap()),
        )
        .unwrap(),
    );
    check(
        OracleReport::new(
            "cavity_point_doubled",
            OracleValue::Scalar(oracle_field_fidelity(&cavity_field_ratios().map(|r| 2.0 * r))),
            OracleValue::Scalar(cavity_point_scaled(2.0).unwrap()),
        )
        .unwrap(),
    );
}

/// Largest eigenvalue of the `(1, 3)` marginal, computed by explicit summation.
fn boundary_weight(v: &StateVector) -> f64 {
    let mut rho = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
    for b in 0..8usize {
        for b2 in 0..8usize {
            if (b >> 1) & 1 != (b2 >> 1) & 1 {
                continue;
            }
            let r = 2 * (b & 1) + ((b >> 2) & 1);
            let c = 2 * (b2 & 1) + ((b2 >> 2) & 1);
            rho[(r, c)] += v.amplitude(b) * v.amplitude(b2).conj();
        }
    }
    let ev = rho.schur().eigenvalues().unwrap();
    ev.iter().map(|e| e.re).fold(f64::MIN, f64::max)
}

#[test]
fn forced_extraction_under_fields() {
    let perturbed = spec(3).with_field_ratios(&[0.05, 0.05, 0.05]).unwrap();
    let zero = StateVector::all_zero(3).unwrap();
    let main = extract_pair(&main_evolve(&perturbed, &zero), ExtractOptions { force: true, ..Default::default() }).unwrap();
    check(
        OracleReport::new(
            "forced_extraction_b0.05_n3",
            OracleValue::Scalar(boundary_weight(&oracle_evolve(&perturbed, &zero))),
            OracleValue::Scalar(main.pair_fidelity),
        )
        .unwrap(),
    );
}

fn oracle_ghz(spec: &ChainSpec) -> f64 {
    let n = spec.n_sites;
    let mid = oracle_evolve(spec, &StateVector::all_zero(n).unwrap());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = 1usize << ((n + 1) / 2 - 1);
    let mut kicked = vec![Complex64::new(0.0, 0.0); 1 << n];
    for b in 0..1usize << n {
        let a = mid.amplitude(b) * h;
        kicked[b & !c] += a;
        kicked[b | c] += if b & c == 0 { a } else { -a };
    }
    let out = oracle_evolve(spec, &StateVector::from_amplitudes(n, kicked).unwrap());
    (out.amplitude(0).norm() + out.amplitude((1 << n) - 1).norm()) * h
}

#[test]
fn ghz_fidelities() {
    for n in [3, 5, 7] {
        check(
            OracleReport::new(
                format!("ghz_n{n}"),
                OracleValue::Scalar(oracle_ghz(&spec(n))),
                OracleValue::Scalar(ghz_protocol(&spec(n)).unwrap().ghz_fidelity),
            )
            .unwrap(),
        );
    }
    let perturbed = spec(3).with_field_ratios(&cavity_field_ratios()).unwrap();
    check(
        OracleReport::new(
            "ghz_cavity_fields_n3",
            OracleValue::Scalar(oracle_ghz(&perturbed)),
            OracleValue::Scalar(ghz_protocol(&perturbed).unwrap().ghz_fidelity),
        )
        .unwrap(),
    );
}

#[test]
fn conveyor_concurrences() {
    let n = 7;
    let mut v = StateVector::all_zero(n).unwrap();
    let mut reference = Vec::new();
    for _ in 0..4 {
        let evolved = oracle_evolve(&spec(n), &v);
        let out = extract_pair(&evolved, ExtractOptions::default()).unwrap();
        // Pure pair: C = 2|ad − bc|.
        let [a, b, c, d] = out.pair_state;
        reference.push(2.0 * (a * d - b * c).norm());
        v = out.v_after;
    }
    let main: Vec<f64> = conveyor_run(&spec(n), 4)
        .unwrap()
        .iter()
        .map(|r| r.extraction_concurrence)
        .collect();
    check(
        OracleReport::new(
            "conveyor_n7_concurrences",
            OracleValue::Amplitudes(reference.iter().map(|&c| [c, 0.0]).collect()),
            OracleValue::Amplitudes(main.iter().map(|&c| [c, 0.0]).collect()),
        )
        .unwrap(),
    );
}

#[test]
fn hadamard_gate_matches_explicit_sum() {
    // The main GHZ path uses gate_apply; confirm it against the explicit butterfly used above.
    let v = oracle_evolve(&spec(5), &StateVector::all_zero(5).unwrap());
    let main = gate_apply(&v, SiteIndex::new(3, 5).unwrap(), &matryoshka_core::state::gates::hadamard()).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut want = vec![Complex64::new(0.0, 0.0); 32];
    for b in 0..32usize {
        let a = v.amplitude(b) * h;
        want[b & !4] += a;
        want[b | 4] += if b & 4 == 0 { a } else { -a };
    }
    let want = StateVector::from_amplitudes(5, want).unwrap();
    assert!(main.distance(&want).unwrap() < 1e-14);
}
