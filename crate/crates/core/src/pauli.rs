//! Pauli strings and stabilizer groups in the binary symplectic picture.
//!
//! A Pauli string on `n` qubits is stored as two packed bit vectors `x` and
//! `z` together with a phase exponent `k` so that the operator is
//! `i^k * P_0 ⊗ ... ⊗ P_{n-1}`, where qubit `q` carries `I`, `X`, `Z` or the
//! Hermitian `Y` depending on `(x_q, z_q)`. With this convention every
//! Hermitian string has `k ∈ {0, 2}`.
//!
//! Products accumulate the phase modulo 4; stabilizer groups only ever expose
//! generators with sign ±1.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("a Pauli string needs at least one qubit")]
    Empty,
    #[error("cannot parse Pauli string `{0}`")]
    Parse(String),
    #[error("generator {0} is not Hermitian")]
    NonHermitian(usize),
    #[error("generators {0} and {1} anticommute")]
    Anticommuting(usize, usize),
    #[error("generators are not independent")]
    Dependent,
    #[error("expected {expected} generators, got {got}")]
    GeneratorCount { expected: usize, got: usize },
    #[error("two-qubit measurement needs distinct qubits, got {0} twice")]
    SameQubit(usize),
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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
}

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Pauli operator on `n` qubits with a phase in `{1, i, -1, -i}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self, PauliError> {
        if n == 0 {
            return Err(PauliError::Empty);
        }
        Ok(Self {
            n,
            x: vec![0; words_for(n)],
            z: vec![0; words_for(n)],
            phase: 0,
        })
    }

    /// Builds `X_{xs} Z_{zs}` with phase +1. A qubit listed in both sets
    /// carries the Hermitian `Y`.
    pub fn from_support(n: usize, xs: &[usize], zs: &[usize]) -> Result<Self, PauliError> {
        let mut p = Self::identity(n)?;
        for &q in xs {
            p.check_index(q)?;
            p.set_x(q, true);
        }
        for &q in zs {
            p.check_index(q)?;
            p.set_z(q, true);
        }
        Ok(p)
    }

    /// Builds a string from per-qubit bits; `phase` is the exponent of `i`.
    pub fn from_bits(x: &[bool], z: &[bool], phase: u8) -> Result<Self, PauliError> {
        if x.len() != z.len() {
            return Err(PauliError::LengthMismatch(x.len(), z.len()));
        }
        let mut p = Self::identity(x.len())?;
        for q in 0..x.len() {
            p.set_x(q, x[q]);
            p.set_z(q, z[q]);
        }
        p.phase = phase % 4;
        Ok(p)
    }

    pub fn single(n: usize, q: usize, op: Pauli) -> Result<Self, PauliError> {
        let mut p = Self::identity(n)?;
        p.check_index(q)?;
        let (x, z) = op.bits();
        p.set_x(q, x);
        p.set_z(q, z);
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Phase exponent `k` of the prefactor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x(&self, q: usize) -> bool {
        (self.x[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn z(&self, q: usize) -> bool {
        (self.z[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x(q), self.z(q))
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// True when every qubit carries the identity (the phase is ignored).
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Same operator with the sign flipped.
    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.phase = (p.phase + 2) % 4;
        p
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    fn check_index(&self, q: usize) -> Result<(), PauliError> {
        if q >= self.n {
            Err(PauliError::QubitOutOfRange {
                index: q,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn set_x(&mut self, q: usize, v: bool) {
        let mask = 1u64 << (q % WORD);
        if v {
            self.x[q / WORD] |= mask;
        } else {
            self.x[q / WORD] &= !mask;
        }
    }

    pub(crate) fn set_z(&mut self, q: usize, v: bool) {
        let mask = 1u64 << (q % WORD);
        if v {
            self.z[q / WORD] |= mask;
        } else {
            self.z[q / WORD] &= !mask;
        }
    }

    /// Column `c` of the `[x | z]` layout.
    pub(crate) fn column(&self, c: usize) -> bool {
        if c < self.n {
            self.x(c)
        } else {
            self.z(c - self.n)
        }
    }

    /// `self <- self * rhs`, with no length check.
    pub(crate) fn mul_right_unchecked(&mut self, rhs: &PauliString) {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for w in 0..self.x.len() {
            let (x1, z1) = (self.x[w], self.z[w]);
            let (x2, z2) = (rhs.x[w], rhs.z[w]);
            let (px1, py1, pz1) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (px2, py2, pz2) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
            plus += ((px1 & py2) | (py1 & pz2) | (pz1 & px2)).count_ones();
            minus += ((px1 & pz2) | (py1 & px2) | (pz1 & py2)).count_ones();
            self.x[w] = x1 ^ x2;
            self.z[w] = z1 ^ z2;
        }
        let total = self.phase as u32 + rhs.phase as u32 + plus + 3 * minus;
        self.phase = (total % 4) as u8;
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        parity == 0
    }

    /// Conjugation by a Hadamard on qubit `q`: swaps X and Z, Y picks up a sign.
    pub(crate) fn hadamard_unchecked(&mut self, q: usize) {
        let (x, z) = (self.x(q), self.z(q));
        if x && z {
            self.phase = (self.phase + 2) % 4;
        }
        self.set_x(q, z);
        self.set_z(q, x);
    }
}

/// Group product `p · q`.
pub fn multiply(p: &PauliString, q: &PauliString) -> Result<PauliString, PauliError> {
    if p.n != q.n {
        return Err(PauliError::LengthMismatch(p.n, q.n));
    }
    let mut out = p.clone();
    out.mul_right_unchecked(q);
    Ok(out)
}

/// Whether `p` and `q` commute (vanishing symplectic form).
pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool, PauliError> {
    if p.n != q.n {
        return Err(PauliError::LengthMismatch(p.n, q.n));
    }
    Ok(p.commutes_unchecked(q))
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            let c = match self.get(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Dense form such as `"XZI"`, `"-YY"` or `"+iZ"`; qubit 0 is leftmost.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PauliError::Parse(s.to_string());
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let mut p = Self::identity(body.chars().count()).map_err(|_| bad())?;
        for (q, c) in body.chars().enumerate() {
            let (x, z) = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(bad()),
            }
            .bits();
            p.set_x(q, x);
            p.set_z(q, z);
        }
        p.phase = phase;
        Ok(p)
    }
}

/// Result of a postselected `Z_a Z_b` measurement with the `+1` outcome kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Postselected {
    /// The observable was random; the state was projected with probability 1/2.
    Projected(StabilizerGroup),
    /// The observable was already `+1`; the state is unchanged.
    Deterministic(StabilizerGroup),
    /// The observable was certainly `-1`; the `+1` branch has probability 0.
    Impossible,
}

impl Postselected {
    pub fn probability(&self) -> f64 {
        match self {
            Postselected::Projected(_) => 0.5,
            Postselected::Deterministic(_) => 1.0,
            Postselected::Impossible => 0.0,
        }
    }

    pub fn group(&self) -> Option<&StabilizerGroup> {
        match self {
            Postselected::Projected(g) | Postselected::Deterministic(g) => Some(g),
            Postselected::Impossible => None,
        }
    }

    pub fn into_group(self) -> Option<StabilizerGroup> {
        match self {
            Postselected::Projected(g) | Postselected::Deterministic(g) => Some(g),
            Postselected::Impossible => None,
        }
    }
}

/// A full-rank stabilizer group: `n` independent, commuting, Hermitian
/// generators on `n` qubits. The zero-qubit group is allowed and describes
/// an empty register.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<PauliString>,
}

impl StabilizerGroup {
    pub fn new(generators: Vec<PauliString>) -> Result<Self, PauliError> {
        let n = generators.first().map_or(0, |g| g.n);
        let group = Self { n, generators };
        group.validate()?;
        Ok(group)
    }

    pub fn empty() -> Self {
        Self {
            n: 0,
            generators: Vec::new(),
        }
    }

    /// Parses one dense Pauli string per element, e.g. `["XZ", "ZX"]`.
    pub fn from_strs(gens: &[&str]) -> Result<Self, PauliError> {
        let generators = gens
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<PauliString>, _>>()?;
        Self::new(generators)
    }

    /// The product state `|+>^n`, stabilized by every `X_q`.
    pub fn plus_state(n: usize) -> Result<Self, PauliError> {
        let generators = (0..n)
            .map(|q| PauliString::single(n, q, Pauli::X))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(generators)
    }

    pub(crate) fn from_generators_unchecked(generators: Vec<PauliString>) -> Self {
        let n = generators.first().map_or(0, |g| g.n);
        let group = Self { n, generators };
        debug_assert!(group.validate().is_ok(), "{:?}", group.validate());
        group
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Checks generator count, Hermiticity, commutation and independence.
    pub fn validate(&self) -> Result<(), PauliError> {
        if self.generators.len() != self.n {
            return Err(PauliError::GeneratorCount {
                expected: self.n,
                got: self.generators.len(),
            });
        }
        for (i, g) in self.generators.iter().enumerate() {
            if g.n != self.n {
                return Err(PauliError::LengthMismatch(self.n, g.n));
            }
            if !g.is_hermitian() {
                return Err(PauliError::NonHermitian(i));
            }
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.generators[i].commutes_unchecked(&self.generators[j]) {
                    return Err(PauliError::Anticommuting(i, j));
                }
            }
        }
        let (rows, _) = row_reduce(self.generators.clone(), self.n);
        if rows.iter().any(|r| r.is_identity_up_to_phase()) {
            return Err(PauliError::Dependent);
        }
        Ok(())
    }

    fn check_index(&self, q: usize) -> Result<(), PauliError> {
        if q >= self.n {
            Err(PauliError::QubitOutOfRange {
                index: q,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Conjugates every generator by a Hadamard on qubit `q`.
    pub fn apply_hadamard(&self, q: usize) -> Result<Self, PauliError> {
        self.check_index(q)?;
        let mut generators = self.generators.clone();
        for g in &mut generators {
            g.hadamard_unchecked(q);
        }
        Ok(Self::from_generators_unchecked(generators))
    }

    /// Measures `Z_{q1} Z_{q2}` and keeps only the `+1` outcome.
    ///
    /// When the observable anticommutes with some generators, the
    /// lowest-index one is replaced by `+Z_{q1} Z_{q2}` after being
    /// multiplied into every other anticommuting generator.
    pub fn measure_zz_postselect(&self, q1: usize, q2: usize) -> Result<Postselected, PauliError> {
        self.check_index(q1)?;
        self.check_index(q2)?;
        if q1 == q2 {
            return Err(PauliError::SameQubit(q1));
        }
        let zz = PauliString::from_support(self.n, &[], &[q1, q2])?;
        let anti: Vec<usize> = (0..self.n)
            .filter(|&i| !self.generators[i].commutes_unchecked(&zz))
            .collect();
        if let Some((&first, rest)) = anti.split_first() {
            let mut generators = self.generators.clone();
            let pivot = generators[first].clone();
            for &i in rest {
                generators[i].mul_right_unchecked(&pivot);
            }
            generators[first] = zz;
            return Ok(Postselected::Projected(Self::from_generators_unchecked(
                generators,
            )));
        }
        match self.sign_of(&zz)? {
            Some(true) => Ok(Postselected::Deterministic(self.clone())),
            Some(false) => Ok(Postselected::Impossible),
            None => {
                unreachable!("an observable commuting with a full-rank group lies in it up to sign")
            }
        }
    }

    /// Row-reduced echelon form over the columns `x_0..x_{n-1}, z_0..z_{n-1}`.
    /// Two groups are equal iff their canonical forms are identical.
    pub fn canonical_form(&self) -> Self {
        let (rows, _) = row_reduce(self.generators.clone(), self.n);
        Self::from_generators_unchecked(rows)
    }

    /// `Some(true)` if `p` is in the group, `Some(false)` if `-p` is,
    /// `None` if neither.
    pub fn sign_of(&self, p: &PauliString) -> Result<Option<bool>, PauliError> {
        if p.n != self.n {
            return Err(PauliError::LengthMismatch(self.n, p.n));
        }
        let (rows, pivots) = row_reduce(self.generators.clone(), self.n);
        let mut rest = p.clone();
        for (row, &col) in rows.iter().zip(&pivots) {
            if rest.column(col) {
                rest.mul_right_unchecked(row);
            }
        }
        if !rest.is_identity_up_to_phase() {
            return Ok(None);
        }
        // rest = p * g = i^k, so p = i^k g with g in the group.
        Ok(match rest.phase {
            0 => Some(true),
            2 => Some(false),
            _ => None,
        })
    }

    /// True iff `p` belongs to the group with sign +1.
    pub fn is_stabilized_by(&self, p: &PauliString) -> Result<bool, PauliError> {
        Ok(self.sign_of(p)? == Some(true))
    }

    /// Whether the two groups generate the same set of operators.
    pub fn same_group(&self, other: &StabilizerGroup) -> bool {
        self.n == other.n && self.canonical_form() == other.canonical_form()
    }
}

/// Gauss-Jordan elimination; returns the reduced rows (zero rows last) and
/// the pivot column of each nonzero row.
fn row_reduce(mut rows: Vec<PauliString>, n: usize) -> (Vec<PauliString>, Vec<usize>) {
    let mut pivots = Vec::with_capacity(rows.len());
    let mut next = 0;
    for col in 0..2 * n {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| rows[r].column(col)) else {
            continue;
        };
        rows.swap(next, found);
        let pivot = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && row.column(col) {
                row.mul_right_unchecked(&pivot);
            }
        }
        pivots.push(col);
        next += 1;
    }
    (rows, pivots)
}

impl fmt::Debug for StabilizerGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.generators.iter().map(|g| g.to_string()))
            .finish()
    }
}

impl fmt::Display for StabilizerGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn group(gens: &[&str]) -> StabilizerGroup {
        StabilizerGroup::from_strs(gens).unwrap()
    }

    type Mat = [[Complex64; 2]; 2];

    fn matrix(op: Pauli) -> Mat {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match op {
            Pauli::I => [[one, o], [o, one]],
            Pauli::X => [[o, one], [one, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[one, o], [o, -one]],
        }
    }

    fn matmul(a: &Mat, b: &Mat) -> Mat {
        let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for col in 0..2 {
                for k in 0..2 {
                    c[r][col] += a[r][k] * b[k][col];
                }
            }
        }
        c
    }

    #[test]
    fn single_qubit_products_match_matrices() {
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for a in all {
            for b in all {
                let prod = multiply(
                    &PauliString::single(1, 0, a).unwrap(),
                    &PauliString::single(1, 0, b).unwrap(),
                )
                .unwrap();
                let phase = Complex64::new(0.0, 1.0).powi(prod.phase() as i32);
                let expected = matmul(&matrix(a), &matrix(b));
                let got = matrix(prod.get(0));
                for r in 0..2 {
                    for c in 0..2 {
                        assert!(
                            (phase * got[r][c] - expected[r][c]).norm() < 1e-12,
                            "{a:?}{b:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zz_times_xx_is_minus_yy() {
        assert_eq!(multiply(&p("ZZ"), &p("XX")).unwrap(), p("-YY"));
    }

    #[test]
    fn star_example_product() {
        // X2 Z1 times X3 Z4, qubits 1..4 mapped to 0..3.
        let a = PauliString::from_support(4, &[1], &[0]).unwrap();
        let b = PauliString::from_support(4, &[2], &[3]).unwrap();
        assert_eq!(multiply(&a, &b).unwrap(), p("ZXXZ"));
    }

    #[test]
    fn hermitian_squares_to_identity() {
        for s in ["XYZ", "-YIY", "ZZXX", "Y"] {
            let sq = multiply(&p(s), &p(s)).unwrap();
            assert!(sq.is_identity_up_to_phase());
            assert_eq!(sq.phase(), 0);
        }
    }

    #[test]
    fn products_across_word_boundary() {
        let n = 130;
        let a = PauliString::from_support(n, &[0, 64, 129], &[64, 100]).unwrap();
        let b = PauliString::from_support(n, &[64, 100], &[0, 129]).unwrap();
        let ab = multiply(&a, &b).unwrap();
        let ba = multiply(&b, &a).unwrap();
        if commutes(&a, &b).unwrap() {
            assert_eq!(ab, ba);
        } else {
            assert_eq!(ab, ba.negated());
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert_eq!(
            multiply(&p("X"), &p("XX")),
            Err(PauliError::LengthMismatch(1, 2))
        );
        assert!(commutes(&p("X"), &p("XX")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!commutes(&p("X"), &p("Z")).unwrap());
        assert!(commutes(&p("XZ"), &p("ZX")).unwrap());
        // X2X3Z1Z4 against Z2Z3.
        assert!(commutes(&p("ZXXZ"), &p("IZZI")).unwrap());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("-iXYZ").to_string(), "-iXYZ");
        assert_eq!(p("XI").to_string(), "+XI");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn construction_rejects_bad_groups() {
        assert_eq!(
            StabilizerGroup::from_strs(&["X", "Z"]).unwrap_err(),
            PauliError::GeneratorCount {
                expected: 1,
                got: 2
            }
        );
        assert_eq!(
            StabilizerGroup::from_strs(&["XI", "ZI"]).unwrap_err(),
            PauliError::Anticommuting(0, 1)
        );
        assert_eq!(
            StabilizerGroup::from_strs(&["XX", "XX"]).unwrap_err(),
            PauliError::Dependent
        );
        assert_eq!(
            StabilizerGroup::from_strs(&["+iX"]).unwrap_err(),
            PauliError::NonHermitian(0)
        );
    }

    #[test]
    fn hadamard_on_two_qubit_graph() {
        let g = group(&["XZ", "ZX"]);
        let h = g.apply_hadamard(1).unwrap();
        assert_eq!(h.generators(), &[p("XX"), p("ZZ")]);
        assert_eq!(h.apply_hadamard(1).unwrap(), g);
        assert!(g.apply_hadamard(2).is_err());
    }

    #[test]
    fn hadamard_flips_sign_of_y() {
        let g = group(&["YY", "XX"]);
        let h = g.apply_hadamard(0).unwrap();
        assert_eq!(h.generators()[0], p("-YY"));
        assert_eq!(h.generators()[1], p("ZX"));
    }

    #[test]
    fn bell_pairs_zz_measurement() {
        // {X1Z2, X2Z1, X3Z4, X4Z3}, measure Z2Z3 (0-based 1, 2).
        let g = group(&["XZII", "ZXII", "IIXZ", "IIZX"]);
        let out = g.measure_zz_postselect(1, 2).unwrap();
        assert_eq!(out.probability(), 0.5);
        let expected = group(&["IZZI", "ZXXZ", "XZII", "IIZX"]);
        assert!(out.group().unwrap().same_group(&expected));
        // X2Z1 no longer belongs: it anticommutes with Z2Z3.
        assert!(!out.group().unwrap().is_stabilized_by(&p("ZXII")).unwrap());
    }

    #[test]
    fn zz_already_present_or_forbidden() {
        let g = group(&["ZZ", "XX"]);
        let out = g.measure_zz_postselect(0, 1).unwrap();
        assert_eq!(out, Postselected::Deterministic(g.clone()));
        assert_eq!(out.probability(), 1.0);

        let flipped = group(&["-ZZ", "XX"]);
        let out = flipped.measure_zz_postselect(0, 1).unwrap();
        assert_eq!(out, Postselected::Impossible);
        assert_eq!(out.probability(), 0.0);
        assert!(g.measure_zz_postselect(0, 0).is_err());
        assert!(g.measure_zz_postselect(0, 5).is_err());
    }

    #[test]
    fn star_example_through_hadamard() {
        let measured = group(&["IZZI", "ZXXZ", "XZII", "IIZX"]);
        let star = measured.apply_hadamard(2).unwrap();
        let textbook = group(&["ZXZZ", "XZII", "IZXI", "IZIX"]);
        assert_eq!(star.canonical_form(), textbook.canonical_form());
    }

    #[test]
    fn canonical_form_examples() {
        assert_eq!(
            group(&["XX", "ZZ"]).canonical_form(),
            group(&["XX", "-YY"]).canonical_form()
        );
        assert_ne!(
            group(&["XI", "IZ"]).canonical_form(),
            group(&["XI", "IX"]).canonical_form()
        );
        let g = group(&["ZXZZ", "XZII", "IZXI", "IZIX"]);
        let c = g.canonical_form();
        assert_eq!(c.canonical_form(), c);
    }

    #[test]
    fn membership_examples() {
        let star = group(&["ZXZZ", "XZII", "IZXI", "IZIX"]);
        assert!(star.is_stabilized_by(&p("ZXZZ")).unwrap());
        assert!(star.is_stabilized_by(&p("IIII")).unwrap());
        assert!(!star.is_stabilized_by(&p("-ZXZZ")).unwrap());
        // Product of the three leaf generators.
        assert!(star.is_stabilized_by(&p("XZXX")).unwrap());
        assert_eq!(star.sign_of(&p("-XZXX")).unwrap(), Some(false));
        assert_eq!(star.sign_of(&p("XIII")).unwrap(), None);
        assert!(star.is_stabilized_by(&p("XX")).is_err());
    }
}
