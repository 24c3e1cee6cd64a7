//! Pauli strings in the symplectic bitmask representation.
//!
//! A string on `n` sites is stored as an X mask, a Z mask and a phase that is
//! a power of `i`. Bit `k` of each mask belongs to site `k + 1`. The letter on a
//! site is `X` when only the X bit is set, `Z` when only the Z bit is set, and
//! `Y` when both are set, so the represented operator is
//!
//! ```text
//! phase · ⊗_k letter_k,   letter_k ∈ {I, X, Y, Z}
//! ```
//!
//! with `Y` the ordinary Hermitian Pauli matrix (not `XZ`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest chain a `PauliString` can describe.
pub const MAX_PAULI_SITES: usize = 64;

/// A 1-based site label, validated against a chain length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteIndex(usize);

impl SiteIndex {
    pub fn new(value: usize, n_sites: usize) -> Result<Self> {
        if value == 0 || value > n_sites {
            return Err(Error::SiteOutOfRange { site: value, n_sites });
        }
        Ok(SiteIndex(value))
    }

    /// Builds a label without checking it against a chain; `value` must be ≥ 1.
    pub(crate) fn unchecked(value: usize) -> Self {
        debug_assert!(value >= 1);
        SiteIndex(value)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based bit position of this site in a basis index.
    pub fn bit(self) -> usize {
        self.0 - 1
    }

    pub fn check(self, n_sites: usize) -> Result<Self> {
        SiteIndex::new(self.0, n_sites)
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-site product `self · rhs` as (letter, power of i).
    fn product(self, rhs: Pauli) -> (Pauli, u8) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (p, 0),
            (a, b) if a == b => (I, 0),
            (X, Y) => (Z, 1),
            (Y, Z) => (X, 1),
            (Z, X) => (Y, 1),
            (Y, X) => (Z, 3),
            (Z, Y) => (X, 3),
            (X, Z) => (Y, 3),
            _ => unreachable!(),
        }
    }
}

/// Global phase of a Pauli string: `i^k` for `k` in 0..4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_power(k: u8) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn power(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn is_real(self) -> bool {
        self.power() % 2 == 0
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        crate::i_pow(self.power())
    }

    fn prefix(self) -> &'static str {
        match self {
            Phase::PlusOne => "+",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_sites: usize,
    x_mask: u64,
    z_mask: u64,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_PAULI_SITES {
            return Err(Error::TooLarge {
                what: "PauliString",
                n_sites,
                max: MAX_PAULI_SITES,
            });
        }
        Ok(PauliString {
            n_sites,
            x_mask: 0,
            z_mask: 0,
            phase: Phase::PlusOne,
        })
    }

    pub fn from_masks(n_sites: usize, x_mask: u64, z_mask: u64, phase: Phase) -> Result<Self> {
        let mut p = PauliString::identity(n_sites)?;
        let valid = if n_sites == 64 { u64::MAX } else { (1u64 << n_sites) - 1 };
        if (x_mask | z_mask) & !valid != 0 {
            return Err(Error::validation(format!(
                "mask bits beyond site {n_sites} are set"
            )));
        }
        p.x_mask = x_mask;
        p.z_mask = z_mask;
        p.phase = phase;
        Ok(p)
    }

    /// String with the given letters on the given sites and identity elsewhere.
    pub fn from_sparse(n_sites: usize, letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = PauliString::identity(n_sites)?;
        for &(site, letter) in letters {
            let s = SiteIndex::new(site, n_sites)?;
            if p.letter(s) != Pauli::I {
                return Err(Error::validation(format!("site {site} given twice")));
            }
            p.set_letter(s, letter);
        }
        Ok(p)
    }

    /// A single letter on one site.
    pub fn single(n_sites: usize, site: usize, letter: Pauli) -> Result<Self> {
        PauliString::from_sparse(n_sites, &[(site, letter)])
    }

    /// Z on every site of `mask` (bit k ↔ site k + 1).
    pub fn z_string(n_sites: usize, mask: u64) -> Result<Self> {
        PauliString::from_masks(n_sites, 0, mask, Phase::PlusOne)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn negated(self) -> Self {
        let phase = Phase::from_power(self.phase.power() + 2);
        self.with_phase(phase)
    }

    pub fn letter(&self, site: SiteIndex) -> Pauli {
        let b = site.bit();
        Pauli::from_bits(self.x_mask >> b & 1 == 1, self.z_mask >> b & 1 == 1)
    }

    fn set_letter(&mut self, site: SiteIndex, letter: Pauli) {
        let b = site.bit();
        let (x, z) = letter.bits();
        self.x_mask = (self.x_mask & !(1 << b)) | ((x as u64) << b);
        self.z_mask = (self.z_mask & !(1 << b)) | ((z as u64) << b);
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (1..=self.n_sites)
            .map(|s| self.letter(SiteIndex::unchecked(s)))
            .collect()
    }

    /// Sites carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        let m = self.x_mask | self.z_mask;
        (0..self.n_sites).filter(|b| m >> b & 1 == 1).map(|b| b + 1).collect()
    }

    pub fn is_identity_letters(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Every letter is Hermitian, so the string is Hermitian iff its phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn is_z_only(&self) -> bool {
        self.x_mask == 0
    }

    /// Number of `Y` letters; each contributes a factor `i` when acting on the basis.
    pub(crate) fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Coefficient and target for `P|b⟩ = coeff · |b ⊕ x⟩`, with `i^k` returned as `k`.
    #[inline]
    pub(crate) fn action_power(&self, basis: usize) -> u8 {
        let sign = ((basis as u64 & self.z_mask).count_ones() % 2) as u8 * 2;
        ((self.phase.power() as u32 + self.y_count() + sign as u32) % 4) as u8
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let a = (self.x_mask & other.z_mask).count_ones();
        let b = (self.z_mask & other.x_mask).count_ones();
        (a + b) % 2 == 0
    }

    /// The inverse; Pauli letters square to the identity, so only the phase changes.
    pub fn inverse(&self) -> Self {
        let phase = Phase::from_power((4 - self.phase.power()) % 4);
        self.with_phase(phase)
    }

    pub fn mul(&self, rhs: &PauliString) -> Result<PauliString> {
        pauli_mul(self, rhs)
    }
}

/// Product `P·Q` with exact phase bookkeeping.
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    if p.n_sites != q.n_sites {
        return Err(Error::Dimension {
            expected: p.n_sites,
            found: q.n_sites,
        });
    }
    let mut power = p.phase.power() + q.phase.power();
    let mut out = PauliString::identity(p.n_sites)?;
    for s in 1..=p.n_sites {
        let site = SiteIndex::unchecked(s);
        let (letter, k) = p.letter(site).product(q.letter(site));
        power += k;
        out.set_letter(site, letter);
    }
    out.phase = Phase::from_power(power);
    Ok(out)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phase.prefix())?;
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `[+|-][i]LETTERS`, letters for sites 1..N in order, e.g. `-iYZX`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'+') => (0u8, &s[1..]),
            Some(b'-') => (2u8, &s[1..]),
            _ => (0u8, s),
        };
        let (imag, letters) = match rest.strip_prefix('i') {
            Some(r) => (1u8, r),
            None => (0u8, rest),
        };
        let mut p = PauliString::identity(letters.len())?;
        for (k, ch) in letters.chars().enumerate() {
            let letter = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(Error::validation(format!(
                        "unexpected Pauli letter {other:?} in {s:?}"
                    )))
                }
            };
            p.set_letter(SiteIndex::unchecked(k + 1), letter);
        }
        p.phase = Phase::from_power(sign + imag);
        Ok(p)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
