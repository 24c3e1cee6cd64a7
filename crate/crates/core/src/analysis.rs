//! Entanglement and fidelity measures, and the stray-field fidelity sweep.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_hamiltonian, ChainSpec, CouplingPattern};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::propagator::{t_star, Method, Propagator};
use crate::state::StateVector;
use crate::C_ZERO;

/// Eigenvalues of ρ below this are treated as round-off when forming √ρ.
const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Wootters concurrence of a two-qubit state.
///
/// The `λ_i` are the singular values of `√ρ (Y⊗Y) √ρ*`, which equal the square
/// roots of the eigenvalues of `ρ ρ̃` without taking a second square root.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::validation(format!(
            "concurrence needs a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    let eig = SymmetricEigen::new(rho.matrix().clone());
    let mut sqrt_rho = DMatrix::from_element(4, 4, C_ZERO);
    for k in 0..4 {
        let p = eig.eigenvalues[k];
        if p <= EIGENVALUE_FLOOR {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        sqrt_rho += (&v * v.adjoint()) * Complex64::new(p.sqrt(), 0.0);
    }
    // Y⊗Y flips |00⟩↔|11⟩ and |01⟩↔|10⟩ with signs (+1 on |00⟩,|11⟩ ... ) = antidiagonal [-1, 1, 1, -1].
    let mut yy = DMatrix::from_element(4, 4, C_ZERO);
    yy[(0, 3)] = Complex64::new(-1.0, 0.0);
    yy[(1, 2)] = Complex64::new(1.0, 0.0);
    yy[(2, 1)] = Complex64::new(1.0, 0.0);
    yy[(3, 0)] = Complex64::new(-1.0, 0.0);
    let m = &sqrt_rho * yy * sqrt_rho.map(|z| z.conj());
    let mut sv: Vec<f64> = m.singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok((sv[0] - sv[1] - sv[2] - sv[3]).clamp(0.0, 1.0))
}

/// `|⟨a|b⟩|`.
pub fn state_fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

/// One grid point of a field sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub b1_ratio: f64,
    pub b2_ratio: f64,
    pub fidelity: f64,
}

/// Fidelity surface over `(B₁/J, B₂/J)` for one `B₃/J` slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub b3_ratio: f64,
    /// Row-major: `b1` outer, `b2` inner, both ascending.
    pub grid: Vec<SweepPoint>,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    /// Wall-clock time; excluded from serialized output so reruns are byte-identical.
    #[serde(skip)]
    pub runtime_seconds: f64,
}

pub const DEFAULT_GRID_POINTS: usize = 21;
pub const DEFAULT_B3_RATIOS: [f64; 3] = [0.0, 0.05, 0.1];
pub const MAX_FIELD_RATIO: f64 = 0.1;

/// `grid_points` evenly spaced values over `[0, max]`, endpoints included.
pub fn ratio_axis(grid_points: usize, max: f64) -> Vec<f64> {
    (0..grid_points)
        .map(|k| max * k as f64 / (grid_points - 1) as f64)
        .collect()
}

/// The unperturbed state at `t*`; the reference for every fidelity in a sweep.
pub fn reference_state(base: &ChainSpec, t: f64) -> Result<StateVector> {
    let clean = base.clone().with_fields(vec![0.0; base.n_sites])?;
    let prop = Propagator::with_default_method(build_hamiltonian(&clean)?)?;
    prop.evolve(&StateVector::all_zero(base.n_sites)?, t)
}

/// Fidelity at `t` between the unperturbed and field-perturbed evolutions of `|0…0⟩`.
pub fn perturbed_fidelity(base: &ChainSpec, ratios: &[f64], t: f64) -> Result<f64> {
    let reference = reference_state(base, t)?;
    perturbed_fidelity_against(base, &reference, ratios, t)
}

fn perturbed_fidelity_against(
    base: &ChainSpec,
    reference: &StateVector,
    ratios: &[f64],
    t: f64,
) -> Result<f64> {
    let spec = base.clone().with_field_ratios(ratios)?;
    let prop = Propagator::new(build_hamiltonian(&spec)?, Method::EigenDecomposition)?;
    let evolved = prop.evolve(&StateVector::all_zero(base.n_sites)?, t)?;
    state_fidelity(reference, &evolved)
}

/// Sweeps `B₁/J, B₂/J ∈ [0, 0.1]` for each `B₃/J` slice on an N = 3 chain.
pub fn field_sweep(base: &ChainSpec, grid_points: usize, b3_ratios: &[f64]) -> Result<Vec<SweepResult>> {
    field_sweep_at(base, grid_points, b3_ratios, t_star(base.lambda))
}

pub fn field_sweep_at(
    base: &ChainSpec,
    grid_points: usize,
    b3_ratios: &[f64],
    t: f64,
) -> Result<Vec<SweepResult>> {
    if base.n_sites != 3 || base.pattern != CouplingPattern::MatryoshkaAlternating {
        return Err(Error::validation(
            "field sweep needs a 3-site chain with the alternating matryoshka pattern",
        ));
    }
    if grid_points < 2 {
        return Err(Error::validation("grid needs at least 2 points per axis"));
    }
    if let Some(r) = b3_ratios.iter().find(|r| !(0.0..=MAX_FIELD_RATIO).contains(*r)) {
        return Err(Error::validation(format!("B3 ratio {r} outside [0, 0.1]")));
    }
    let reference = reference_state(base, t)?;
    let axis = ratio_axis(grid_points, MAX_FIELD_RATIO);
    b3_ratios
        .iter()
        .map(|&b3| {
            let start = Instant::now();
            let grid = axis
                .iter()
                .flat_map(|&b1| axis.iter().map(move |&b2| (b1, b2)))
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&(b1, b2)| {
                    let fidelity = perturbed_fidelity_against(base, &reference, &[b1, b2, b3], t)?;
                    Ok(SweepPoint { b1_ratio: b1, b2_ratio: b2, fidelity })
                })
                .collect::<Result<Vec<_>>>()?;
            let min_fidelity = grid.iter().map(|p| p.fidelity).fold(f64::INFINITY, f64::min);
            let mean_fidelity = grid.iter().map(|p| p.fidelity).sum::<f64>() / grid.len() as f64;
            Ok(SweepResult {
                b3_ratio: b3,
                grid,
                min_fidelity,
                mean_fidelity,
                runtime_seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Coupling scale and stray fields (MHz) of the cavity-array parameter set.
pub const CAVITY_COUPLING_MHZ: f64 = 270.0;
pub const CAVITY_FIELDS_MHZ: [f64; 3] = [7.8, 19.6, 12.6];

pub fn cavity_field_ratios() -> [f64; 3] {
    CAVITY_FIELDS_MHZ.map(|b| b / CAVITY_COUPLING_MHZ)
}

/// Fidelity of the N = 3 matryoshka state with the cavity-array stray fields.
pub fn cavity_point_check() -> Result<f64> {
    cavity_point_scaled(1.0)
}

/// As [`cavity_point_check`] with every field multiplied by `scale`.
pub fn cavity_point_scaled(scale: f64) -> Result<f64> {
    let base = ChainSpec::matryoshka(3, 1.0)?;
    let ratios = cavity_field_ratios().map(|r| r * scale);
    perturbed_fidelity(&base, &ratios, t_star(1.0))
}

/// `%.{digits}g`-style formatting: shortest of fixed/scientific, trailing zeros trimmed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "b1_ratio,b2_ratio,b3_ratio,fidelity";

impl SweepResult {
    /// One row per grid point, 12 significant digits, after an optional `#` comment line.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        let _ = writeln!(out, "{CSV_HEADER}");
        for p in &self.grid {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                format_significant(p.b1_ratio, 12),
                format_significant(p.b2_ratio, 12),
                format_significant(self.b3_ratio, 12),
                format_significant(p.fidelity, 12)
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceSummary {
    pub b3_ratio: f64,
    pub points: usize,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
}

pub fn sweep_summary(results: &[SweepResult]) -> Vec<SliceSummary> {
    results
        .iter()
        .map(|r| SliceSummary {
            b3_ratio: r.b3_ratio,
            points: r.grid.len(),
            min_fidelity: r.min_fidelity,
            mean_fidelity: r.mean_fidelity,
        })
        .collect()
}
