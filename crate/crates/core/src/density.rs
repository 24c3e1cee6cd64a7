//! Reduced density matrices of one or two sites.
//!
//! Within a reduced matrix the first listed site is the most-significant bit,
//! so for sites `(p, q)` the row index is `2·bit_p + bit_q` and `|01⟩_pq` is
//! row 1. This matches how Bell labels are written.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::SiteIndex;
use crate::state::StateVector;
use crate::C_ZERO;

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-12;
pub const PSD_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    sites: Vec<SiteIndex>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(sites: Vec<SiteIndex>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << sites.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        let rho = DensityMatrix { sites, matrix };
        let herm = (&rho.matrix - rho.matrix.adjoint()).iter().fold(0.0f64, |m, e| m.max(e.norm()));
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::validation(format!(
                "density matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::validation(format!("density matrix trace {tr} is not 1")));
        }
        let min_eig = rho.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::validation(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector `psi` over the given sites.
    pub fn pure(sites: Vec<SiteIndex>, psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        DensityMatrix::new(sites, &v * v.adjoint())
    }

    pub fn sites(&self) -> &[SiteIndex] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
        self.matrix.iter().map(|e| e.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap_with_pure(&self, psi: &[Complex64]) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = &self.matrix - &other.matrix;
        let ev = SymmetricEigen::new(diff).eigenvalues;
        Ok(0.5 * ev.iter().map(|e| e.abs()).sum::<f64>())
    }

    /// Expectation of Z on the single site (one-site matrices only).
    pub fn z_expectation(&self) -> Result<f64> {
        if self.sites.len() != 1 {
            return Err(Error::validation("Z expectation needs a one-site density matrix"));
        }
        Ok(self.matrix[(0, 0)].re - self.matrix[(1, 1)].re)
    }
}

/// Partial trace of `|v⟩⟨v|` down to one or two distinct sites.
pub fn reduced_density(v: &StateVector, sites: &[SiteIndex]) -> Result<DensityMatrix> {
    if sites.is_empty() || sites.len() > 2 {
        return Err(Error::validation(format!(
            "reduced density needs 1 or 2 sites, got {}",
            sites.len()
        )));
    }
    let checked: Vec<SiteIndex> = sites
        .iter()
        .map(|s| s.check(v.n_sites()))
        .collect::<Result<_>>()?;
    if checked.len() == 2 && checked[0] == checked[1] {
        return Err(Error::validation(format!("site {} listed twice", checked[0])));
    }
    let matrix = partial_trace(v, &checked);
    let norm_sq = v.norm().powi(2);
    DensityMatrix::new(checked, matrix / Complex64::new(norm_sq, 0.0))
}

/// Unnormalized partial trace onto `sites` (first site = most significant bit).
pub(crate) fn partial_trace(v: &StateVector, sites: &[SiteIndex]) -> DMatrix<Complex64> {
    let k = sites.len();
    let dim = 1usize << k;
    let site_mask: usize = sites.iter().map(|s| 1usize << s.bit()).sum();
    let local_index = |b: usize| -> usize {
        sites
            .iter()
            .fold(0usize, |acc, s| (acc << 1) | (b >> s.bit() & 1))
    };
    let embed = |r: usize, rest: usize| -> usize {
        let mut b = rest;
        for (j, s) in sites.iter().enumerate() {
            if r >> (k - 1 - j) & 1 == 1 {
                b |= 1 << s.bit();
            }
        }
        b
    };
    let amps = v.amplitudes();
    let mut rho = DMatrix::from_element(dim, dim, C_ZERO);
    for (b, &a) in amps.iter().enumerate() {
        if a == C_ZERO {
            continue;
        }
        let r = local_index(b);
        let rest = b & !site_mask;
        for c in 0..dim {
            rho[(r, c)] += a * amps[embed(c, rest)].conj();
        }
    }
    rho
}
