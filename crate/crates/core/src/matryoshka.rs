//! Matryoshka states: nested Bell pairs on mirror-symmetric sites.
//!
//! For the alternating-zero chain started in `|0…0⟩`, the state at `t*` is
//!
//! ```text
//! c odd:  |0⟩_c ⊗ Ψ⁺ on (2i+1, N−2i) ⊗ Ψ⁻ on (2i, N−2i+1)
//! c even: |1⟩_c ⊗ Ψ⁻ on (2i+1, N−2i) ⊗ Ψ⁺ on (2i, N−2i+1)
//! ```
//!
//! where `c = (N+1)/2` and `Ψ± = (|01⟩ ± |10⟩)/√2` with the lower site first.
//! Odd-indexed pairs run over `i = 0..=⌊(N−3)/4⌋` and even-indexed pairs over
//! `i = 1..=⌊(N−1)/4⌋`, which covers every non-central site for any odd `N`.
//! Starting from `|1…1⟩` flips only the central spin.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::analysis::{concurrence, state_fidelity};
use crate::chain::{build_hamiltonian, ChainSpec};
use crate::density::reduced_density;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, SiteIndex};
use crate::propagator::{all_z_strings, heisenberg_evolve, hermitian_spectral_norm, MAX_HEISENBERG_SITES};
use crate::state::StateVector;
use crate::C_ZERO;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
    ];

    /// Amplitudes over `|00⟩, |01⟩, |10⟩, |11⟩`, lower site first.
    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellLabel::PsiPlus => [C_ZERO, h, h, C_ZERO],
            BellLabel::PsiMinus => [C_ZERO, h, -h, C_ZERO],
            BellLabel::PhiPlus => [h, C_ZERO, C_ZERO, h],
            BellLabel::PhiMinus => [h, C_ZERO, C_ZERO, -h],
        }
    }

    /// Best-matching label for a two-site state and its fidelity `⟨B|ρ|B⟩`.
    pub fn best_fit(rho: &crate::density::DensityMatrix) -> Result<(BellLabel, f64)> {
        let mut best = (BellLabel::PsiPlus, f64::NEG_INFINITY);
        for label in BellLabel::ALL {
            let f = rho.overlap_with_pure(&label.amplitudes())?;
            if f > best.1 + 1e-12 {
                best = (label, f);
            }
        }
        Ok(best)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    All0,
    All1,
}

impl InitialState {
    pub fn state(self, n_sites: usize) -> Result<StateVector> {
        match self {
            InitialState::All0 => StateVector::all_zero(n_sites),
            InitialState::All1 => StateVector::all_one(n_sites),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledPair {
    pub low: SiteIndex,
    pub high: SiteIndex,
    pub label: BellLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatryoshkaSchedule {
    pub n_sites: usize,
    pub central_site: SiteIndex,
    pub central_value: u8,
    /// Sorted by `low`.
    pub pairs: Vec<ScheduledPair>,
}

/// Mirror pairs `(i, N − i + 1)` for `i = 1..c`.
pub fn symmetric_pairs(n_sites: usize) -> Vec<(SiteIndex, SiteIndex)> {
    (1..=(n_sites - 1) / 2)
        .map(|i| (SiteIndex::unchecked(i), SiteIndex::unchecked(n_sites - i + 1)))
        .collect()
}

/// Predicted pair labels and central value at `t*`.
pub fn bell_schedule(n_sites: usize, initial: InitialState) -> Result<MatryoshkaSchedule> {
    if n_sites < 3 || n_sites % 2 == 0 {
        return Err(Error::validation(format!(
            "matryoshka schedules need odd N >= 3, got {n_sites}"
        )));
    }
    let c = (n_sites + 1) / 2;
    let (central, odd_label, even_label) = if c % 2 == 1 {
        (0u8, BellLabel::PsiPlus, BellLabel::PsiMinus)
    } else {
        (1u8, BellLabel::PsiMinus, BellLabel::PsiPlus)
    };
    let central_value = match initial {
        InitialState::All0 => central,
        InitialState::All1 => 1 - central,
    };
    let mut pairs = Vec::with_capacity((n_sites - 1) / 2);
    for i in 0..=(n_sites - 3) / 4 {
        pairs.push(ScheduledPair {
            low: SiteIndex::new(2 * i + 1, n_sites)?,
            high: SiteIndex::new(n_sites - 2 * i, n_sites)?,
            label: odd_label,
        });
    }
    for i in 1..=(n_sites - 1) / 4 {
        pairs.push(ScheduledPair {
            low: SiteIndex::new(2 * i, n_sites)?,
            high: SiteIndex::new(n_sites - 2 * i + 1, n_sites)?,
            label: even_label,
        });
    }
    pairs.sort_by_key(|p| p.low);
    Ok(MatryoshkaSchedule {
        n_sites,
        central_site: SiteIndex::new(c, n_sites)?,
        central_value,
        pairs,
    })
}

/// Tensor product of Bell pairs and fixed Z-basis sites; every site must be
/// covered exactly once.
pub fn product_state(
    n_sites: usize,
    pairs: &[ScheduledPair],
    fixed: &[(SiteIndex, u8)],
) -> Result<StateVector> {
    let mut covered = 0u64;
    let mut claim = |s: SiteIndex| -> Result<()> {
        let s = s.check(n_sites)?;
        let bit = 1u64 << s.bit();
        if covered & bit != 0 {
            return Err(Error::validation(format!("site {s} appears twice")));
        }
        covered |= bit;
        Ok(())
    };
    for p in pairs {
        claim(p.low)?;
        claim(p.high)?;
    }
    for &(s, value) in fixed {
        claim(s)?;
        if value > 1 {
            return Err(Error::validation(format!("site value {value} is not 0 or 1")));
        }
    }
    if covered.count_ones() as usize != n_sites {
        return Err(Error::validation("product state does not cover every site"));
    }
    let amps: Vec<Complex64> = (0..1usize << n_sites)
        .map(|b| {
            if fixed
                .iter()
                .any(|&(s, v)| StateVector::bit_of(b, s) != v)
            {
                return C_ZERO;
            }
            pairs.iter().fold(Complex64::new(1.0, 0.0), |acc, p| {
                let idx = 2 * StateVector::bit_of(b, p.low) as usize
                    + StateVector::bit_of(b, p.high) as usize;
                acc * p.label.amplitudes()[idx]
            })
        })
        .collect();
    StateVector::from_amplitudes(n_sites, amps)
}

pub fn ideal_matryoshka_state(sched: &MatryoshkaSchedule) -> Result<StateVector> {
    product_state(
        sched.n_sites,
        &sched.pairs,
        &[(sched.central_site, sched.central_value)],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub low: SiteIndex,
    pub high: SiteIndex,
    pub label: BellLabel,
    pub concurrence: f64,
    pub bell_fidelity: f64,
    pub purity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralReport {
    pub site: SiteIndex,
    pub expected_value: u8,
    pub purity: f64,
    pub z_expectation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n_sites: usize,
    pub pairs: Vec<PairReport>,
    pub central: CentralReport,
    /// `|⟨ideal|v⟩|`.
    pub global_fidelity: f64,
}

impl VerificationReport {
    pub fn min_concurrence(&self) -> f64 {
        self.pairs.iter().map(|p| p.concurrence).fold(1.0, f64::min)
    }

    /// All pairs maximally entangled and the central spin pure, within `tol`.
    pub fn is_matryoshka(&self, tol: f64) -> bool {
        self.min_concurrence() >= 1.0 - tol && self.central.purity >= 1.0 - tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn verify_matryoshka(v: &StateVector, sched: &MatryoshkaSchedule) -> Result<VerificationReport> {
    if v.n_sites() != sched.n_sites {
        return Err(Error::Dimension {
            expected: sched.n_sites,
            found: v.n_sites(),
        });
    }
    let pairs = sched
        .pairs
        .par_iter()
        .map(|p| {
            let rho = reduced_density(v, &[p.low, p.high])?;
            Ok(PairReport {
                low: p.low,
                high: p.high,
                label: p.label,
                concurrence: concurrence(&rho)?,
                bell_fidelity: rho.overlap_with_pure(&p.label.amplitudes())?,
                purity: rho.purity(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rho_c = reduced_density(v, &[sched.central_site])?;
    let ideal = ideal_matryoshka_state(sched)?;
    Ok(VerificationReport {
        n_sites: sched.n_sites,
        pairs,
        central: CentralReport {
            site: sched.central_site,
            expected_value: sched.central_value,
            purity: rho_c.purity(),
            z_expectation: rho_c.z_expectation()?,
        },
        global_fidelity: state_fidelity(&ideal, v)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairOperator {
    XX,
    YY,
}

impl PairOperator {
    fn letter(self) -> Pauli {
        match self {
            PairOperator::XX => Pauli::X,
            PairOperator::YY => Pauli::Y,
        }
    }
}

/// Coefficient threshold for declaring a single Z-string match.
pub const FLUX_MATCH_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxMatch {
    pub i: usize,
    pub kind: PairOperator,
    /// Signed best Z-string (`±Z…Z`), whether or not it passes the match test.
    pub best: PauliString,
    pub coefficient: f64,
    pub matched: bool,
    /// Operator 2-norm of `evolved − best`.
    pub residual: f64,
    /// `(−1)^{(N−2i+1)/2}`.
    pub predicted_sign: i8,
}

impl FluxMatch {
    pub fn sign_matches(&self) -> bool {
        self.coefficient.signum() as i8 == self.predicted_sign
    }
}

/// Evolves each symmetric pair operator `σ_i σ_{N−i+1}` (σ = X, Y) of the
/// alternating chain to time `t` and projects it onto the Z-only strings.
pub fn flux_check(n_sites: usize, lambda: f64, t: f64) -> Result<Vec<FluxMatch>> {
    if n_sites > MAX_HEISENBERG_SITES {
        return Err(Error::TooLarge {
            what: "flux check",
            n_sites,
            max: MAX_HEISENBERG_SITES,
        });
    }
    let h = build_hamiltonian(&ChainSpec::matryoshka(n_sites, lambda)?)?;
    let z_strings = all_z_strings(n_sites)?;
    let jobs: Vec<(usize, PairOperator)> = (1..=(n_sites - 1) / 2)
        .flat_map(|i| [(i, PairOperator::XX), (i, PairOperator::YY)])
        .collect();
    jobs.par_iter()
        .map(|&(i, kind)| {
            let op = PauliString::from_sparse(
                n_sites,
                &[(i, kind.letter()), (n_sites - i + 1, kind.letter())],
            )?;
            let evolved = heisenberg_evolve(&h, &op, t, Some(&z_strings))?;
            let mut coeffs: Vec<(f64, PauliString)> = evolved
                .decomposition
                .iter()
                .map(|(c, q)| (c.re, *q))
                .collect();
            coeffs.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
            let (coefficient, string) = coeffs
                .first()
                .copied()
                .unwrap_or((0.0, PauliString::identity(n_sites)?));
            let rest_small = coeffs
                .iter()
                .skip(1)
                .all(|(c, _)| c.abs() <= FLUX_MATCH_THRESHOLD);
            let matched = coefficient.abs() >= 1.0 - FLUX_MATCH_THRESHOLD && rest_small;
            let best = if coefficient < 0.0 { string.negated() } else { string };
            let best_dense = {
                let mut m = crate::chain::HamiltonianTerms::new(n_sites, vec![(1.0, string)])?.to_dense();
                if coefficient < 0.0 {
                    m = -m;
                }
                m
            };
            let residual = hermitian_spectral_norm(&(&evolved.matrix - best_dense));
            let predicted_sign = if ((n_sites - 2 * i + 1) / 2) % 2 == 0 { 1 } else { -1 };
            Ok(FluxMatch {
                i,
                kind,
                best,
                coefficient,
                matched,
                residual,
                predicted_sign,
            })
        })
        .collect()
}
