//! Exact time evolution `exp(−iHt)` of states and Heisenberg-picture operators.
//!
//! Two methods are available. [`Method::EigenDecomposition`] diagonalizes the
//! dense Hamiltonian once and reuses the spectrum for every `evolve` call.
//! [`Method::KrylovLanczos`] applies `H` matrix-free and builds a Lanczos basis
//! per step. It uses a residual-based error estimate and halves the step size
//! until the estimate meets the tolerance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::chain::HamiltonianTerms;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::state::StateVector;
use crate::{i_pow, C_ZERO};

pub const MAX_EIGEN_SITES: usize = 12;
pub const MAX_KRYLOV_SITES: usize = 20;
pub const MAX_HEISENBERG_SITES: usize = 8;
pub const MAX_EXHAUSTIVE_DECOMPOSITION_SITES: usize = 5;
pub const DEFAULT_KRYLOV_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_KRYLOV_SUBSPACE: usize = 40;

/// Time at which the alternating-zero chain reaches its matryoshka state.
///
/// With `H = Σ J (XX or YY)` and `J_i = λ√(i(N−i))`, this is `π/(4λ)` for every
/// odd `N`. The N = 3 case is closed-form: with `A = Y₁Y₂` and `B = X₂X₃`,
/// `{A, B} = 0` gives `H² = 4λ²` and `U(t) = cos(2λt) − i sin(2λt)(A + B)/√2`.
pub fn t_star(lambda: f64) -> f64 {
    PI / (4.0 * lambda)
}

/// `2t*`: the chain returns to a Z-basis product state.
pub fn revival_time(lambda: f64) -> f64 {
    2.0 * t_star(lambda)
}

/// The transfer time `π/λ` quoted for a Hamiltonian that carries extra
/// factors of ½; exposed for users who want to test that convention.
pub fn half_factor_t_star(lambda: f64) -> f64 {
    PI / lambda
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    EigenDecomposition,
    KrylovLanczos { tolerance: f64, max_subspace: usize },
}

impl Method {
    pub fn krylov_default() -> Self {
        Method::KrylovLanczos {
            tolerance: DEFAULT_KRYLOV_TOLERANCE,
            max_subspace: DEFAULT_KRYLOV_SUBSPACE,
        }
    }

    /// Eigendecomposition up to 12 sites, Krylov beyond.
    pub fn default_for(n_sites: usize) -> Self {
        if n_sites <= MAX_EIGEN_SITES {
            Method::EigenDecomposition
        } else {
            Method::krylov_default()
        }
    }
}

#[derive(Clone, Debug)]
struct Spectrum {
    energies: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

#[derive(Clone, Debug)]
pub struct Propagator {
    hamiltonian: HamiltonianTerms,
    method: Method,
    spectrum: Option<Spectrum>,
}

impl Propagator {
    pub fn new(hamiltonian: HamiltonianTerms, method: Method) -> Result<Self> {
        let n = hamiltonian.n_sites();
        let spectrum = match method {
            Method::EigenDecomposition => {
                if n > MAX_EIGEN_SITES {
                    return Err(Error::TooLarge {
                        what: "eigendecomposition propagator",
                        n_sites: n,
                        max: MAX_EIGEN_SITES,
                    });
                }
                let eig = SymmetricEigen::new(hamiltonian.to_dense());
                Some(Spectrum {
                    energies: eig.eigenvalues,
                    vectors: eig.eigenvectors,
                })
            }
            Method::KrylovLanczos { tolerance, max_subspace } => {
                if n > MAX_KRYLOV_SITES {
                    return Err(Error::TooLarge {
                        what: "Krylov propagator",
                        n_sites: n,
                        max: MAX_KRYLOV_SITES,
                    });
                }
                if !(tolerance > 0.0) || max_subspace == 0 {
                    return Err(Error::validation(
                        "Krylov tolerance must be positive and the subspace non-empty",
                    ));
                }
                None
            }
        };
        Ok(Propagator {
            hamiltonian,
            method,
            spectrum,
        })
    }

    pub fn with_default_method(hamiltonian: HamiltonianTerms) -> Result<Self> {
        let method = Method::default_for(hamiltonian.n_sites());
        Propagator::new(hamiltonian, method)
    }

    pub fn hamiltonian(&self) -> &HamiltonianTerms {
        &self.hamiltonian
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// `exp(−iHt)|v⟩`.
    pub fn evolve(&self, v: &StateVector, t: f64) -> Result<StateVector> {
        if v.n_sites() != self.hamiltonian.n_sites() {
            return Err(Error::Dimension {
                expected: self.hamiltonian.n_sites(),
                found: v.n_sites(),
            });
        }
        if !t.is_finite() {
            return Err(Error::validation(format!("evolution time {t} is not finite")));
        }
        if t == 0.0 || self.hamiltonian.is_empty() {
            return Ok(v.clone());
        }
        let out = match (&self.method, &self.spectrum) {
            (Method::EigenDecomposition, Some(spec)) => spectral_evolve(spec, v.amplitudes(), t),
            (Method::KrylovLanczos { tolerance, max_subspace }, _) => krylov_evolve(
                &self.hamiltonian,
                v.amplitudes(),
                t,
                *tolerance,
                *max_subspace,
            )?,
            (Method::EigenDecomposition, None) => unreachable!("spectrum computed in new()"),
        };
        Ok(StateVector::from_raw(v.n_sites(), out))
    }

    /// Evolves by one protocol period `t_star`.
    pub fn evolve_until_revival(&self, v: &StateVector, t_star: f64) -> Result<StateVector> {
        self.evolve(v, t_star)
    }

    /// Dense `U(t) = exp(−iHt)`; eigendecomposition method only.
    pub fn unitary(&self, t: f64) -> Result<DMatrix<Complex64>> {
        let spec = self.spectrum.as_ref().ok_or_else(|| {
            Error::validation("dense unitaries need the eigendecomposition method")
        })?;
        let phases = DVector::from_iterator(
            spec.energies.len(),
            spec.energies.iter().map(|e| Complex64::from_polar(1.0, -e * t)),
        );
        let mut scaled = spec.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        Ok(scaled * spec.vectors.adjoint())
    }
}

fn spectral_evolve(spec: &Spectrum, v: &[Complex64], t: f64) -> Vec<Complex64> {
    let v = DVector::from_column_slice(v);
    let mut coeffs = spec.vectors.adjoint() * v;
    for (c, e) in coeffs.iter_mut().zip(spec.energies.iter()) {
        *c *= Complex64::from_polar(1.0, -e * t);
    }
    (&spec.vectors * coeffs).iter().cloned().collect()
}

fn vnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn vdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

struct LanczosBasis {
    vectors: Vec<Vec<Complex64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    /// Norm of the residual left after the last vector; zero on breakdown.
    residual: f64,
}

fn lanczos(h: &HamiltonianTerms, start: &[Complex64], max_subspace: usize) -> LanczosBasis {
    let dim = start.len();
    let norm = vnorm(start);
    let mut vectors = vec![start.iter().map(|a| a / norm).collect::<Vec<_>>()];
    let mut alphas = Vec::with_capacity(max_subspace);
    let mut betas = Vec::with_capacity(max_subspace);
    let mut w = vec![C_ZERO; dim];
    let mut scale = 0.0f64;
    let mut residual = 0.0;
    for j in 0..max_subspace {
        h.apply_into(&vectors[j], &mut w);
        let alpha = vdot(&vectors[j], &w).re;
        alphas.push(alpha);
        for (wk, vk) in w.iter_mut().zip(&vectors[j]) {
            *wk -= vk * alpha;
        }
        if j > 0 {
            let beta_prev = betas[j - 1];
            for (wk, vk) in w.iter_mut().zip(&vectors[j - 1]) {
                *wk -= vk * beta_prev;
            }
        }
        // Full reorthogonalization, twice.
        for _ in 0..2 {
            for v in &vectors {
                let c = vdot(v, &w);
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= vk * c;
                }
            }
        }
        let beta = vnorm(&w);
        scale = scale.max(alpha.abs()).max(beta);
        if beta <= 1e-13 * scale.max(1.0) {
            residual = 0.0;
            break;
        }
        residual = beta;
        if j + 1 == max_subspace {
            break;
        }
        betas.push(beta);
        vectors.push(w.iter().map(|a| a / beta).collect());
    }
    LanczosBasis {
        vectors,
        alphas,
        betas,
        residual,
    }
}

/// `exp(−iTs)e₁` for the Lanczos tridiagonal `T`.
fn tridiagonal_exp_e1(alphas: &[f64], betas: &[f64], s: f64) -> Vec<Complex64> {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        t[(k, k)] = alphas[k];
        if k + 1 < m {
            t[(k, k + 1)] = betas[k];
            t[(k + 1, k)] = betas[k];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|r| {
            (0..m)
                .map(|k| {
                    let q = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                    Complex64::from_polar(q, -eig.eigenvalues[k] * s)
                })
                .sum()
        })
        .collect()
}

const MAX_KRYLOV_STEPS: usize = 100_000;

fn krylov_evolve(
    h: &HamiltonianTerms,
    v: &[Complex64],
    t: f64,
    tolerance: f64,
    max_subspace: usize,
) -> Result<Vec<Complex64>> {
    let total = t.abs();
    let sign = t.signum();
    let mut w = v.to_vec();
    let mut done = 0.0;
    let mut step = total;
    let mut steps = 0;
    while done < total {
        let beta0 = vnorm(&w);
        if beta0 == 0.0 {
            return Ok(w);
        }
        let basis = lanczos(h, &w, max_subspace);
        let m = basis.alphas.len();
        let (y, dt) = loop {
            let dt = step.min(total - done);
            let y = tridiagonal_exp_e1(&basis.alphas, &basis.betas, sign * dt);
            let err = basis.residual * y[m - 1].norm() * beta0;
            if err <= tolerance * dt / total {
                break (y, dt);
            }
            step = dt / 2.0;
            if step < total * 1e-12 {
                return Err(Error::Convergence(format!(
                    "step size fell below {:.3e} with error estimate {err:.3e} \
                     (tolerance {tolerance:e}, subspace {max_subspace})",
                    total * 1e-12
                )));
            }
        };
        let mut next = vec![C_ZERO; w.len()];
        for (coef, vec) in y.iter().zip(&basis.vectors) {
            let c = coef * beta0;
            for (n, a) in next.iter_mut().zip(vec) {
                *n += a * c;
            }
        }
        w = next;
        done += dt;
        steps += 1;
        if steps > MAX_KRYLOV_STEPS {
            return Err(Error::Convergence(format!(
                "exceeded {MAX_KRYLOV_STEPS} steps at t = {done} of {total}"
            )));
        }
        step = (2.0 * dt).min(total);
    }
    Ok(w)
}

/// A Heisenberg-evolved operator `U†(t) P U(t)` and its Pauli-basis expansion.
#[derive(Clone, Debug)]
pub struct HeisenbergOperator {
    pub matrix: DMatrix<Complex64>,
    /// `(c, Q)` with `c = tr(Q† M)/2^N`; coefficients below 1e-12 are dropped.
    pub decomposition: Vec<(Complex64, PauliString)>,
}

/// `tr(Q† M) / 2^N` without materializing `Q`.
pub fn pauli_coefficient(m: &DMatrix<Complex64>, q: &PauliString) -> Complex64 {
    let dim = m.nrows();
    let x = q.x_mask() as usize;
    let sum: Complex64 = (0..dim)
        .map(|b| i_pow(q.action_power(b)).conj() * m[(b ^ x, b)])
        .sum();
    sum / dim as f64
}

/// Every Pauli string on `n` sites with phase +1, ordered by (x mask, z mask).
pub fn all_pauli_strings(n_sites: usize) -> Result<Vec<PauliString>> {
    if n_sites > MAX_EXHAUSTIVE_DECOMPOSITION_SITES {
        return Err(Error::TooLarge {
            what: "exhaustive Pauli enumeration",
            n_sites,
            max: MAX_EXHAUSTIVE_DECOMPOSITION_SITES,
        });
    }
    let size = 1u64 << n_sites;
    let mut out = Vec::with_capacity((size * size) as usize);
    for x in 0..size {
        for z in 0..size {
            out.push(PauliString::from_masks(n_sites, x, z, crate::pauli::Phase::PlusOne)?);
        }
    }
    Ok(out)
}

/// All `2^N` Z-only strings, ordered by mask.
pub fn all_z_strings(n_sites: usize) -> Result<Vec<PauliString>> {
    (0..1u64 << n_sites)
        .map(|mask| PauliString::z_string(n_sites, mask))
        .collect()
}

/// `U†(t) P U(t)` as a dense matrix, expanded over all `4^N` strings when
/// `N ≤ 5` and `candidates` is `None`, or over `candidates` otherwise.
pub fn heisenberg_evolve(
    h: &HamiltonianTerms,
    p: &PauliString,
    t: f64,
    candidates: Option<&[PauliString]>,
) -> Result<HeisenbergOperator> {
    let n = h.n_sites();
    if n > MAX_HEISENBERG_SITES {
        return Err(Error::TooLarge {
            what: "dense Heisenberg evolution",
            n_sites: n,
            max: MAX_HEISENBERG_SITES,
        });
    }
    if p.n_sites() != n {
        return Err(Error::Dimension {
            expected: n,
            found: p.n_sites(),
        });
    }
    let dense_p = {
        let pm = HamiltonianTerms::new(n, vec![(1.0, p.with_phase(crate::pauli::Phase::PlusOne))])?;
        pm.to_dense() * p.phase().to_complex()
    };
    let prop = Propagator::new(h.clone(), Method::EigenDecomposition)?;
    let u = prop.unitary(t)?;
    let matrix = u.adjoint() * dense_p * &u;

    let owned;
    let basis: &[PauliString] = match candidates {
        Some(c) => c,
        None => {
            owned = all_pauli_strings(n).map_err(|_| {
                Error::validation(format!(
                    "Pauli decomposition for N = {n} needs a candidate set (exhaustive only up to N = 5)"
                ))
            })?;
            &owned
        }
    };
    let mut decomposition = Vec::new();
    for q in basis {
        if q.n_sites() != n {
            return Err(Error::Dimension {
                expected: n,
                found: q.n_sites(),
            });
        }
        let c = pauli_coefficient(&matrix, q);
        if c.norm() > 1e-12 {
            decomposition.push((c, *q));
        }
    }
    Ok(HeisenbergOperator {
        matrix,
        decomposition,
    })
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn hermitian_spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, e| acc.max(e.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hamiltonian, ChainSpec};
    use crate::state::expectation;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn n3() -> HamiltonianTerms {
        build_hamiltonian(&ChainSpec::matryoshka(3, 1.0).unwrap()).unwrap()
    }

    /// Closed form for the N = 3 alternating chain at λ = 1:
    /// `U(t)|000⟩ = cos(2t)|000⟩ − i sin(2t)(A + B)|000⟩/√2`,
    /// with `Y₁Y₂|000⟩ = −|110⟩` (sites 1,2) and `X₂X₃|000⟩ = |011⟩` (sites 2,3).
    fn closed_form_n3(t: f64) -> Vec<Complex64> {
        let s = (2.0 * t).sin() / 2f64.sqrt();
        let mut out = vec![C_ZERO; 8];
        out[0] = c((2.0 * t).cos(), 0.0);
        out[0b011] = c(0.0, -s) * -1.0;
        out[0b110] = c(0.0, -s);
        out
    }

    #[test]
    fn t_star_values() {
        assert!((t_star(1.0) - PI / 4.0).abs() < 1e-15);
        assert!((revival_time(2.0) - PI / 4.0).abs() < 1e-15);
        assert!((half_factor_t_star(1.0) - PI).abs() < 1e-15);
    }

    #[test]
    fn zero_time_is_identity() {
        let p = Propagator::with_default_method(n3()).unwrap();
        let v = StateVector::from_bits(&[1, 0, 1]).unwrap();
        assert_eq!(p.evolve(&v, 0.0).unwrap(), v);
    }

    #[test]
    fn n3_matches_closed_form_at_several_times() {
        let p = Propagator::with_default_method(n3()).unwrap();
        let zero = StateVector::all_zero(3).unwrap();
        for &t in &[0.1, 0.4, t_star(1.0), 1.3, revival_time(1.0)] {
            let got = p.evolve(&zero, t).unwrap();
            let want = StateVector::from_raw(3, closed_form_n3(t));
            assert!(got.distance(&want).unwrap() < 1e-12, "t = {t}");
        }
        // At t* the state is −i|1⟩₂Ψ⁻₁₃: +i on |110⟩ (sites 1,2) and −i on |011⟩ (sites 2,3).
        let at_star = p.evolve(&zero, t_star(1.0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((at_star.amplitude(0b011) - c(0.0, h)).norm() < 1e-12);
        assert!((at_star.amplitude(0b110) - c(0.0, -h)).norm() < 1e-12);
    }

    #[test]
    fn krylov_matches_closed_form() {
        let p = Propagator::new(n3(), Method::krylov_default()).unwrap();
        let zero = StateVector::all_zero(3).unwrap();
        let got = p.evolve(&zero, 0.9).unwrap();
        let want = StateVector::from_raw(3, closed_form_n3(0.9));
        assert!(got.distance(&want).unwrap() < 1e-10);
    }

    #[test]
    fn krylov_reports_non_convergence() {
        let h = build_hamiltonian(&ChainSpec::matryoshka(7, 1.0).unwrap()).unwrap();
        let p = Propagator::new(h, Method::KrylovLanczos { tolerance: 1e-300, max_subspace: 2 }).unwrap();
        let v = StateVector::all_zero(7).unwrap();
        assert!(matches!(p.evolve(&v, 5.0), Err(Error::Convergence(_))));
    }

    #[test]
    fn size_limits_enforced() {
        let h = build_hamiltonian(&ChainSpec::matryoshka(13, 1.0).unwrap()).unwrap();
        assert!(matches!(
            Propagator::new(h.clone(), Method::EigenDecomposition),
            Err(Error::TooLarge { .. })
        ));
        assert_eq!(Method::default_for(13), Method::krylov_default());
        let p = Propagator::with_default_method(n3()).unwrap();
        assert!(matches!(
            p.evolve(&StateVector::all_zero(5).unwrap(), 1.0),
            Err(Error::Dimension { .. })
        ));
        let x = PauliString::z_string(13, 1).unwrap();
        assert!(heisenberg_evolve(&h, &x, 1.0, None).is_err());
    }

    #[test]
    fn revival_examples() {
        let p = Propagator::with_default_method(n3()).unwrap();
        let zero = StateVector::all_zero(3).unwrap();
        let twice = p.evolve(&zero, revival_time(1.0)).unwrap();
        assert!((zero.inner(&twice).unwrap().norm() - 1.0).abs() < 1e-12);
        // U(t*)² = cos(π) = −1
        assert!((twice.amplitude(0) - c(-1.0, 0.0)).norm() < 1e-12);
        let mu = p.evolve(&zero, t_star(1.0)).unwrap();
        let back = p.evolve_until_revival(&mu, t_star(1.0)).unwrap();
        assert!((back.amplitude(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_examples_n3() {
        let h = n3();
        let x1x3: PauliString = "XIX".parse().unwrap();
        let at0 = heisenberg_evolve(&h, &x1x3, 0.0, None).unwrap();
        assert_eq!(at0.decomposition.len(), 1);
        assert!((at0.decomposition[0].0 - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(at0.decomposition[0].1, x1x3);

        let xx = heisenberg_evolve(&h, &x1x3, t_star(1.0), None).unwrap();
        assert_eq!(xx.decomposition.len(), 1);
        assert_eq!(xx.decomposition[0].1.to_string(), "+ZZI");
        assert!((xx.decomposition[0].0 - c(-1.0, 0.0)).norm() < 1e-12);

        let yy = heisenberg_evolve(&h, &"YIY".parse().unwrap(), t_star(1.0), None).unwrap();
        assert_eq!(yy.decomposition.len(), 1);
        assert_eq!(yy.decomposition[0].1.to_string(), "+IZZ");
        assert!((yy.decomposition[0].0 - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn heisenberg_consistent_with_schrodinger() {
        let spec = ChainSpec::matryoshka(5, 0.7).unwrap().with_fields(vec![0.1, -0.2, 0.05, 0.0, 0.3]).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let prop = Propagator::with_default_method(h.clone()).unwrap();
        let v = StateVector::normalized(5, (0..32).map(|k| c((k as f64).sin(), (k as f64 * 0.3).cos())).collect()).unwrap();
        for s in ["XIIIX", "YZIXY", "IIZII"] {
            let p: PauliString = s.parse().unwrap();
            let op = heisenberg_evolve(&h, &p, 0.83, Some(&[])).unwrap();
            let psi = DVector::from_column_slice(v.amplitudes());
            let lhs = (psi.adjoint() * &op.matrix * &psi)[(0, 0)].re;
            let rhs = expectation(&prop.evolve(&v, 0.83).unwrap(), &p).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "{s}: {lhs} vs {rhs}");
        }
    }
}
