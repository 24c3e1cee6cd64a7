#![allow(dead_code)]

use matryoshka_core::{HamiltonianTerms, Pauli, PauliString, StateVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(n, amps).unwrap()
}

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// A Hermitian sum of `terms` random Pauli strings with weights in [-2, 2].
pub fn random_hamiltonian(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> HamiltonianTerms {
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let list = (0..terms)
        .map(|_| {
            let letters: Vec<(usize, Pauli)> =
                (1..=n).map(|s| (s, LETTERS[rng.random_range(0..4)])).collect();
            (
                rng.random_range(-2.0..2.0),
                PauliString::from_sparse(n, &letters).unwrap(),
            )
        })
        .collect();
    HamiltonianTerms::new(n, list).unwrap()
}
