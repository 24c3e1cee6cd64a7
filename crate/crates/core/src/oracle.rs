//! Brute-force reference implementations.
//!
//! Nothing here shares code with the propagator: the Hamiltonian is rebuilt
//! from Kronecker products of 2×2 letters, and the exponential uses Padé
//! scaling-and-squaring instead of a spectral decomposition or Krylov space.
//! These routines are slow by design and exist to validate the fast paths.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::HamiltonianTerms;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::state::StateVector;
use crate::C_ZERO;

pub const MAX_EXPM_SITES: usize = 10;
pub const MAX_DECOMPOSE_SITES: usize = 5;
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;
const DROP_BELOW: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn letter_matrix(p: Pauli) -> DMatrix<Complex64> {
    let z = C_ZERO;
    let entries = match p {
        Pauli::I => [c(1.0, 0.0), z, z, c(1.0, 0.0)],
        Pauli::X => [z, c(1.0, 0.0), c(1.0, 0.0), z],
        Pauli::Y => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        Pauli::Z => [c(1.0, 0.0), z, z, c(-1.0, 0.0)],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Dense matrix of a Pauli string as `P_N ⊗ … ⊗ P_1` (site 1 least significant).
pub fn dense_pauli(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, p.phase().to_complex());
    for letter in p.letters().into_iter().rev() {
        m = m.kronecker(&letter_matrix(letter));
    }
    m
}

pub fn dense_hamiltonian(h: &HamiltonianTerms) -> DMatrix<Complex64> {
    let dim = h.dim();
    let mut m = DMatrix::from_element(dim, dim, C_ZERO);
    for (w, p) in h.terms() {
        m += dense_pauli(p) * c(*w, 0.0);
    }
    m
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` by degree-13 Padé approximation with scaling and squaring.
pub fn expm(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * c(0.5f64.powi(s), 0.0);
    let b = PADE13.map(|x| c(x, 0.0));
    let id = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Numerical("singular Padé denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// `exp(−iHt)|v⟩` through a dense Padé exponential.
pub fn dense_expm_evolve(h: &HamiltonianTerms, v: &StateVector, t: f64) -> Result<StateVector> {
    let n = h.n_sites();
    if n > MAX_EXPM_SITES {
        return Err(Error::TooLarge {
            what: "dense oracle exponential",
            n_sites: n,
            max: MAX_EXPM_SITES,
        });
    }
    if v.n_sites() != n {
        return Err(Error::Dimension {
            expected: n,
            found: v.n_sites(),
        });
    }
    let u = expm(&(dense_hamiltonian(h) * c(0.0, -t)))?;
    let out = u * DVector::from_column_slice(v.amplitudes());
    StateVector::normalized(n, out.iter().copied().collect())
}

/// `U(t)† P U(t)` built from the dense Padé exponential.
pub fn dense_heisenberg(h: &HamiltonianTerms, p: &PauliString, t: f64) -> Result<DMatrix<Complex64>> {
    if h.n_sites() > MAX_EXPM_SITES {
        return Err(Error::TooLarge {
            what: "dense oracle exponential",
            n_sites: h.n_sites(),
            max: MAX_EXPM_SITES,
        });
    }
    let u = expm(&(dense_hamiltonian(h) * c(0.0, -t)))?;
    Ok(u.adjoint() * dense_pauli(p) * u)
}

/// Every Hermitian Pauli string on `n` sites, in base-4 letter order.
fn every_string(n: usize) -> Vec<PauliString> {
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    (0..4usize.pow(n as u32))
        .map(|code| {
            let letters: Vec<(usize, Pauli)> = (0..n)
                .map(|k| (k + 1, LETTERS[(code >> (2 * k)) & 3]))
                .collect();
            PauliString::from_sparse(n, &letters).expect("sites in range")
        })
        .collect()
}

/// `M = Σ c_P P` over all `4^N` strings, with `c_P = tr(P M)/2^N`.
/// Coefficients below `1e−12` in modulus are dropped.
pub fn exhaustive_pauli_decompose(m: &DMatrix<Complex64>) -> Result<Vec<(Complex64, PauliString)>> {
    let dim = m.nrows();
    if dim != m.ncols() || !dim.is_power_of_two() || dim < 2 {
        return Err(Error::validation(format!(
            "expected a square 2^N matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_DECOMPOSE_SITES {
        return Err(Error::TooLarge {
            what: "exhaustive Pauli decomposition",
            n_sites: n,
            max: MAX_DECOMPOSE_SITES,
        });
    }
    let mut terms = Vec::new();
    let mut rebuilt = DMatrix::from_element(dim, dim, C_ZERO);
    for p in every_string(n) {
        let dp = dense_pauli(&p);
        let coeff = (&dp * m).trace() / c(dim as f64, 0.0);
        if coeff.norm() > DROP_BELOW {
            rebuilt += &dp * coeff;
            terms.push((coeff, p));
        }
    }
    let err = (&rebuilt - m).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if err > RECONSTRUCTION_TOLERANCE {
        return Err(Error::Numerical(format!(
            "Pauli reconstruction error {err:e}"
        )));
    }
    Ok(terms)
}

/// Serialized shape of a compared quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleValue {
    Scalar(f64),
    /// `[re, im]` per basis index.
    Amplitudes(Vec<[f64; 2]>),
    /// Pauli string text → `[re, im]`.
    PauliTerms(BTreeMap<String, [f64; 2]>),
}

impl OracleValue {
    pub fn from_state(v: &StateVector) -> Self {
        OracleValue::Amplitudes(v.amplitudes().iter().map(|z| [z.re, z.im]).collect())
    }

    pub fn from_terms(terms: &[(Complex64, PauliString)]) -> Self {
        OracleValue::PauliTerms(
            terms
                .iter()
                .map(|(z, p)| (p.to_string(), [z.re, z.im]))
                .collect(),
        )
    }

    /// Euclidean distance; missing Pauli terms count as zero.
    pub fn distance(&self, other: &OracleValue) -> Result<f64> {
        match (self, other) {
            (OracleValue::Scalar(a), OracleValue::Scalar(b)) => Ok((a - b).abs()),
            (OracleValue::Amplitudes(a), OracleValue::Amplitudes(b)) => {
                if a.len() != b.len() {
                    return Err(Error::Dimension {
                        expected: a.len(),
                        found: b.len(),
                    });
                }
                Ok(a.iter()
                    .zip(b)
                    .map(|(x, y)| (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2))
                    .sum::<f64>()
                    .sqrt())
            }
            (OracleValue::PauliTerms(a), OracleValue::PauliTerms(b)) => {
                let zero = [0.0, 0.0];
                let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
                Ok(keys
                    .into_iter()
                    .map(|k| {
                        let x = a.get(k).unwrap_or(&zero);
                        let y = b.get(k).unwrap_or(&zero);
                        (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt())
            }
            _ => Err(Error::validation("oracle values have different shapes")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub case_id: String,
    pub reference_value: OracleValue,
    pub main_value: OracleValue,
    pub discrepancy: f64,
}

impl OracleReport {
    pub fn new(case_id: impl Into<String>, reference_value: OracleValue, main_value: OracleValue) -> Result<Self> {
        let discrepancy = reference_value.distance(&main_value)?;
        Ok(OracleReport {
            case_id: case_id.into(),
            reference_value,
            main_value,
            discrepancy,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `<dir>/<case_id>.json`.
    pub fn write_fixture(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{}.json", self.case_id));
        std::fs::write(&path, self.to_json() + "\n")
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn read_fixture(dir: &Path, case_id: &str) -> Result<Self> {
        let path = dir.join(format!("{case_id}.json"));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
