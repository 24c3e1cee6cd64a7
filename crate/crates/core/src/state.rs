//! Full state vectors over `2^N` computational basis states.
//!
//! Basis index `b` encodes site `k` in bit `k − 1`: site 1 is the
//! least-significant bit. `|0⟩` is the ground state of a spin and the `+1`
//! eigenstate of `Z`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, SiteIndex};
use crate::{i_pow, C_ZERO};

pub const MAX_STATE_SITES: usize = 30;
pub const NORM_TOLERANCE: f64 = 1e-10;
pub const UNITARY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_STATE_SITES {
        return Err(Error::TooLarge {
            what: "StateVector",
            n_sites,
            max: MAX_STATE_SITES,
        });
    }
    Ok(())
}

impl StateVector {
    /// The computational basis state with index `index`.
    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        check_sites(n_sites)?;
        let dim = 1usize << n_sites;
        if index >= dim {
            return Err(Error::validation(format!(
                "basis index {index} out of range for {n_sites} sites"
            )));
        }
        let mut amplitudes = vec![C_ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_sites, amplitudes })
    }

    /// Z-basis product state; `bits[k]` is the value of site `k + 1`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut index = 0usize;
        for (k, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => index |= 1 << k,
                _ => return Err(Error::validation(format!("bit value {b} is not 0 or 1"))),
            }
        }
        StateVector::basis(bits.len(), index)
    }

    pub fn all_zero(n_sites: usize) -> Result<Self> {
        StateVector::basis(n_sites, 0)
    }

    pub fn all_one(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        StateVector::basis(n_sites, (1 << n_sites) - 1)
    }

    /// Wraps amplitudes that must already have unit norm.
    pub fn from_amplitudes(n_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_sites(n_sites)?;
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::Dimension {
                expected: 1 << n_sites,
                found: amplitudes.len(),
            });
        }
        let v = StateVector { n_sites, amplitudes };
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::validation(format!("state norm {norm} is not 1")));
        }
        Ok(v)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_sites(n_sites)?;
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::Dimension {
                expected: 1 << n_sites,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validation("cannot normalize a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector { n_sites, amplitudes })
    }

    /// Internal constructor for amplitudes produced by norm-preserving maps.
    pub(crate) fn from_raw(n_sites: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_sites);
        StateVector { n_sites, amplitudes }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            n_sites: self.n_sites,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Euclidean distance `‖self − other‖`, phase-sensitive.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Index of the largest-magnitude amplitude (lowest index on ties).
    pub fn dominant_index(&self) -> usize {
        let mut best = 0;
        for (k, a) in self.amplitudes.iter().enumerate() {
            if a.norm() > self.amplitudes[best].norm() + 1e-15 {
                best = k;
            }
        }
        best
    }

    /// Value (0/1) of `site` in basis index `index`.
    pub fn bit_of(index: usize, site: SiteIndex) -> u8 {
        (index >> site.bit() & 1) as u8
    }
}

/// `P|v⟩` without materializing `P`.
pub fn pauli_apply(p: &PauliString, v: &StateVector) -> Result<StateVector> {
    if p.n_sites() != v.n_sites() {
        return Err(Error::Dimension {
            expected: v.n_sites(),
            found: p.n_sites(),
        });
    }
    let x = p.x_mask() as usize;
    let mut out = vec![C_ZERO; v.dim()];
    for (b, &a) in v.amplitudes().iter().enumerate() {
        out[b ^ x] = i_pow(p.action_power(b)) * a;
    }
    Ok(StateVector::from_raw(v.n_sites(), out))
}

pub fn is_unitary(u: &Matrix2<Complex64>, tol: f64) -> bool {
    let prod = u.adjoint() * u;
    let id = Matrix2::<Complex64>::identity();
    (prod - id).iter().all(|e| e.norm() <= tol)
}

/// Applies a single-site unitary to the tensor factor of `site`.
pub fn gate_apply(v: &StateVector, site: SiteIndex, u: &Matrix2<Complex64>) -> Result<StateVector> {
    let site = site.check(v.n_sites())?;
    if !is_unitary(u, UNITARY_TOLERANCE) {
        return Err(Error::validation("gate matrix is not unitary within 1e-12"));
    }
    let mask = 1usize << site.bit();
    let mut out = v.amplitudes().to_vec();
    for b in 0..v.dim() {
        if b & mask != 0 {
            continue;
        }
        let a0 = v.amplitude(b);
        let a1 = v.amplitude(b | mask);
        out[b] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
        out[b | mask] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
    }
    Ok(StateVector::from_raw(v.n_sites(), out))
}

/// `⟨v|P|v⟩` for a Hermitian string.
pub fn expectation(v: &StateVector, p: &PauliString) -> Result<f64> {
    if !p.is_hermitian() {
        return Err(Error::validation(format!("{p} is not Hermitian")));
    }
    let pv = pauli_apply(p, v)?;
    let value = v.inner(&pv)?;
    if value.im.abs() > NORM_TOLERANCE {
        return Err(Error::Numerical(format!(
            "expectation of Hermitian {p} has imaginary part {}",
            value.im
        )));
    }
    Ok(value.re)
}

pub mod gates {
    use nalgebra::Matrix2;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity() -> Matrix2<Complex64> {
        Matrix2::identity()
    }

    pub fn hadamard() -> Matrix2<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Matrix2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0))
    }

    pub fn pauli_x() -> Matrix2<Complex64> {
        Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
    }

    pub fn pauli_y() -> Matrix2<Complex64> {
        Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
    }

    pub fn pauli_z() -> Matrix2<Complex64> {
        Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
    }
}
