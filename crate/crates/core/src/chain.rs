//! Coupling patterns and Hamiltonian assembly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::state::StateVector;
use crate::{i_pow, C_ZERO};

fn check_chain_length(n_sites: usize) -> Result<()> {
    if n_sites < 3 || n_sites % 2 == 0 {
        return Err(Error::validation(format!(
            "chain length must be odd and at least 3, got {n_sites}"
        )));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::validation(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// `J_i = λ √(i (N − i))` for bonds `i = 1..N−1`.
pub fn perfect_transfer_couplings(n_sites: usize, lambda: f64) -> Result<Vec<f64>> {
    check_chain_length(n_sites)?;
    check_lambda(lambda)?;
    Ok((1..n_sites)
        .map(|i| lambda * ((i * (n_sites - i)) as f64).sqrt())
        .collect())
}

/// Alternating-zero pattern: odd bonds keep only `YY`, even bonds only `XX`,
/// each with the perfect-transfer magnitude. Returns `(J_X, J_Y)`.
pub fn matryoshka_couplings(n_sites: usize, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let base = perfect_transfer_couplings(n_sites, lambda)?;
    let mut j_x = vec![0.0; base.len()];
    let mut j_y = vec![0.0; base.len()];
    for (k, &j) in base.iter().enumerate() {
        let bond = k + 1;
        if bond % 2 == 1 {
            j_y[k] = j;
        } else {
            j_x[k] = j;
        }
    }
    Ok((j_x, j_y))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingPattern {
    PerfectTransfer,
    MatryoshkaAlternating,
    Custom { j_x: Vec<f64>, j_y: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub lambda: f64,
    pub pattern: CouplingPattern,
    /// Local Z field on each site, in coupling units.
    pub fields: Vec<f64>,
}

impl ChainSpec {
    pub fn new(n_sites: usize, lambda: f64, pattern: CouplingPattern) -> Result<Self> {
        let spec = ChainSpec {
            n_sites,
            lambda,
            pattern,
            fields: vec![0.0; n_sites],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn matryoshka(n_sites: usize, lambda: f64) -> Result<Self> {
        ChainSpec::new(n_sites, lambda, CouplingPattern::MatryoshkaAlternating)
    }

    pub fn with_fields(mut self, fields: Vec<f64>) -> Result<Self> {
        self.fields = fields;
        self.validate()?;
        Ok(self)
    }

    /// Sets `B_i = ratio_i · J_ref`, where `J_ref` is [`ChainSpec::reference_coupling`].
    pub fn with_field_ratios(self, ratios: &[f64]) -> Result<Self> {
        let j_ref = self.reference_coupling()?;
        let fields = ratios.iter().map(|r| r * j_ref).collect();
        self.with_fields(fields)
    }

    pub fn validate(&self) -> Result<()> {
        check_chain_length(self.n_sites)?;
        match &self.pattern {
            CouplingPattern::PerfectTransfer | CouplingPattern::MatryoshkaAlternating => {
                check_lambda(self.lambda)?
            }
            CouplingPattern::Custom { j_x, j_y } => {
                for (name, arr) in [("j_x", j_x), ("j_y", j_y)] {
                    if arr.len() != self.n_sites - 1 {
                        return Err(Error::validation(format!(
                            "{name} has {} entries, expected {}",
                            arr.len(),
                            self.n_sites - 1
                        )));
                    }
                    if arr.iter().any(|v| !v.is_finite()) {
                        return Err(Error::validation(format!("{name} has non-finite entries")));
                    }
                }
            }
        }
        if self.fields.len() != self.n_sites {
            return Err(Error::validation(format!(
                "b_fields has {} entries, expected {}",
                self.fields.len(),
                self.n_sites
            )));
        }
        if self.fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("b_fields has non-finite entries"));
        }
        Ok(())
    }

    /// `(J_X, J_Y)` bond arrays of length `N − 1`.
    pub fn couplings(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        match &self.pattern {
            CouplingPattern::PerfectTransfer => {
                let j = perfect_transfer_couplings(self.n_sites, self.lambda)?;
                Ok((j.clone(), j))
            }
            CouplingPattern::MatryoshkaAlternating => matryoshka_couplings(self.n_sites, self.lambda),
            CouplingPattern::Custom { j_x, j_y } => Ok((j_x.clone(), j_y.clone())),
        }
    }

    /// Reference coupling for field ratios: the first bond's larger coupling
    /// (`J_Y,1` for the alternating pattern).
    pub fn reference_coupling(&self) -> Result<f64> {
        let (j_x, j_y) = self.couplings()?;
        let j = j_x[0].abs().max(j_y[0].abs());
        if j == 0.0 {
            return Err(Error::validation("first bond has no coupling to use as reference"));
        }
        Ok(j)
    }

    /// Parses the TOML chain grammar (see [`ChainConfig`]).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ChainConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.try_into()
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&ChainConfig::from(self)).map_err(|e| Error::Config(e.to_string()))
    }
}

/// On-disk chain description.
///
/// ```toml
/// n_sites = 7
/// lambda = 1.0
/// pattern = "matryoshka"        # "perfect-transfer" | "matryoshka" | "custom"
/// b_fields = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]   # optional, defaults to zeros
/// # j_x = [...]; j_y = [...]   # required for "custom", N − 1 entries each
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub n_sites: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub pattern: PatternName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_fields: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_y: Option<Vec<f64>>,
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternName {
    PerfectTransfer,
    Matryoshka,
    Custom,
}

impl From<&ChainSpec> for ChainConfig {
    fn from(spec: &ChainSpec) -> Self {
        let (pattern, j_x, j_y) = match &spec.pattern {
            CouplingPattern::PerfectTransfer => (PatternName::PerfectTransfer, None, None),
            CouplingPattern::MatryoshkaAlternating => (PatternName::Matryoshka, None, None),
            CouplingPattern::Custom { j_x, j_y } => {
                (PatternName::Custom, Some(j_x.clone()), Some(j_y.clone()))
            }
        };
        ChainConfig {
            n_sites: spec.n_sites,
            lambda: spec.lambda,
            pattern,
            b_fields: Some(spec.fields.clone()),
            j_x,
            j_y,
        }
    }
}

impl TryFrom<ChainConfig> for ChainSpec {
    type Error = Error;

    fn try_from(cfg: ChainConfig) -> Result<Self> {
        let pattern = match (cfg.pattern, cfg.j_x, cfg.j_y) {
            (PatternName::Custom, Some(j_x), Some(j_y)) => CouplingPattern::Custom { j_x, j_y },
            (PatternName::Custom, _, _) => {
                return Err(Error::Config("pattern \"custom\" needs both j_x and j_y".into()))
            }
            (_, Some(_), _) | (_, _, Some(_)) => {
                return Err(Error::Config(
                    "j_x/j_y are only accepted with pattern \"custom\"".into(),
                ))
            }
            (PatternName::PerfectTransfer, None, None) => CouplingPattern::PerfectTransfer,
            (PatternName::Matryoshka, None, None) => CouplingPattern::MatryoshkaAlternating,
        };
        let spec = ChainSpec {
            n_sites: cfg.n_sites,
            lambda: cfg.lambda,
            pattern,
            fields: cfg.b_fields.unwrap_or_else(|| vec![0.0; cfg.n_sites]),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A real-weighted sum of Hermitian Pauli strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerms {
    n_sites: usize,
    terms: Vec<(f64, PauliString)>,
}

impl HamiltonianTerms {
    pub fn new(n_sites: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (w, p) in &terms {
            if p.n_sites() != n_sites {
                return Err(Error::Dimension {
                    expected: n_sites,
                    found: p.n_sites(),
                });
            }
            if !p.is_hermitian() {
                return Err(Error::validation(format!("term {p} is not Hermitian")));
            }
            if !w.is_finite() {
                return Err(Error::validation(format!("term {p} has weight {w}")));
            }
        }
        Ok(HamiltonianTerms { n_sites, terms })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `out = H · input`, matrix-free.
    pub fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.dim());
        out.iter_mut().for_each(|o| *o = C_ZERO);
        for (w, p) in &self.terms {
            let x = p.x_mask() as usize;
            for (b, &a) in input.iter().enumerate() {
                out[b ^ x] += i_pow(p.action_power(b)) * a * *w;
            }
        }
    }

    pub fn apply(&self, v: &StateVector) -> Result<Vec<Complex64>> {
        if v.n_sites() != self.n_sites {
            return Err(Error::Dimension {
                expected: self.n_sites,
                found: v.n_sites(),
            });
        }
        let mut out = vec![C_ZERO; self.dim()];
        self.apply_into(v.amplitudes(), &mut out);
        Ok(out)
    }

    /// `⟨v|H|v⟩`.
    pub fn energy(&self, v: &StateVector) -> Result<f64> {
        let hv = self.apply(v)?;
        Ok(v.amplitudes().iter().zip(&hv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re)
    }

    /// Dense `2^N × 2^N` matrix.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, C_ZERO);
        for (w, p) in &self.terms {
            let x = p.x_mask() as usize;
            for b in 0..dim {
                m[(b ^ x, b)] += i_pow(p.action_power(b)) * *w;
            }
        }
        m
    }
}

/// Nonzero `XX`, `YY` and `Z` terms, grouped by site: for each site `i`,
/// `X_iX_{i+1}`, then `Y_iY_{i+1}`, then `Z_i`.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<HamiltonianTerms> {
    let (j_x, j_y) = spec.couplings()?;
    let n = spec.n_sites;
    let mut terms = Vec::new();
    for i in 1..=n {
        if i < n {
            if j_x[i - 1] != 0.0 {
                terms.push((j_x[i - 1], PauliString::from_sparse(n, &[(i, Pauli::X), (i + 1, Pauli::X)])?));
            }
            if j_y[i - 1] != 0.0 {
                terms.push((j_y[i - 1], PauliString::from_sparse(n, &[(i, Pauli::Y), (i + 1, Pauli::Y)])?));
            }
        }
        if spec.fields[i - 1] != 0.0 {
            terms.push((spec.fields[i - 1], PauliString::single(n, i, Pauli::Z)?));
        }
    }
    HamiltonianTerms::new(n, terms)
}
