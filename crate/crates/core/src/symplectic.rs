//! Phaseless Pauli arithmetic in the binary symplectic `(x | z)` picture.
//!
//! A qubit carries `I`, `X`, `Y` or `Z` for `(x, z)` = `(0,0)`, `(1,0)`, `(1,1)`,
//! `(0,1)`. Phases are not tracked: every operator here stands for its class
//! modulo `{±1, ±i}`, which is all that group membership, commutation and weight
//! depend on.
//!
//! Row reduction uses the interleaved column order `x_1, z_1, x_2, z_2, …`, so
//! the reduced form of a generator matrix is canonical for the group it spans.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymplecticError {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },
    #[error("constraint needs two distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("invalid Pauli character {0:?}")]
    Parse(char),
    #[error("empty Pauli string")]
    Empty,
}

/// Single-qubit Pauli letter. The discriminant is the integer label `g`
/// with `σ⁰ = I, σ¹ = X, σ² = Y, σ³ = Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Letter {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn label(self) -> u8 {
        self as u8
    }

    pub fn from_label(g: u8) -> Option<Self> {
        Self::ALL.get(g as usize).copied()
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' | '1' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// A phaseless `n`-qubit Pauli operator stored as packed `x` and `z` words.
///
/// Bits beyond `n` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
        }
    }

    /// Builds the operator acting as `letter` on `qubit` and trivially elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, letter);
        p
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (i, &l) in letters.iter().enumerate() {
            p.set(i, l);
        }
        p
    }

    /// Integer labels `g_i ∈ {0,1,2,3}` per qubit.
    pub fn from_labels(labels: &[u8]) -> Option<Self> {
        let letters = labels
            .iter()
            .map(|&g| Letter::from_label(g))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_letters(&letters))
    }

    pub fn labels(&self) -> Vec<u8> {
        (0..self.n).map(|i| self.letter(i).label()).collect()
    }

    /// Packs a string of at most 64 qubits from raw bit masks (bit `i` = qubit `i`).
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= WORD, "from_masks supports at most 64 qubits");
        let mask = low_mask(n);
        Self {
            n,
            x: vec![x & mask],
            z: vec![z & mask],
        }
    }

    /// Raw `(x, z)` masks for strings of at most 64 qubits.
    pub fn masks(&self) -> Option<(u64, u64)> {
        match self.x.len() {
            0 => Some((0, 0)),
            1 => Some((self.x[0], self.z[0])),
            _ => None,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, i: usize) -> bool {
        (self.x[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn z_bit(&self, i: usize) -> bool {
        (self.z[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn letter(&self, i: usize) -> Letter {
        Letter::from_bits(self.x_bit(i), self.z_bit(i))
    }

    pub fn set(&mut self, i: usize, letter: Letter) {
        assert!(i < self.n, "qubit {i} out of range for {} qubits", self.n);
        let (x, z) = letter.bits();
        let bit = 1u64 << (i % WORD);
        let w = i / WORD;
        self.x[w] = if x { self.x[w] | bit } else { self.x[w] & !bit };
        self.z[w] = if z { self.z[w] | bit } else { self.z[w] & !bit };
    }

    /// Bit of the interleaved column `c` (`x_q` for even `c`, `z_q` for odd).
    pub fn column(&self, c: usize) -> bool {
        if c.is_multiple_of(2) {
            self.x_bit(c / 2)
        } else {
            self.z_bit(c / 2)
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    fn check_len(&self, other: &Self) -> Result<(), SymplecticError> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(SymplecticError::Dimension {
                expected: self.n,
                found: other.n,
            })
        }
    }

    /// Symplectic product over GF(2); `false` means the operators commute.
    pub fn symplectic_product(&self, other: &Self) -> Result<bool, SymplecticError> {
        self.check_len(other)?;
        Ok(self.symplectic_unchecked(other))
    }

    pub(crate) fn symplectic_unchecked(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        for w in 0..self.x.len() {
            acc += (self.x[w] & other.z[w]).count_ones() + (self.z[w] & other.x[w]).count_ones();
        }
        acc & 1 == 1
    }

    pub fn commutes(&self, other: &Self) -> Result<bool, SymplecticError> {
        Ok(!self.symplectic_product(other)?)
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, SymplecticError> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    pub(crate) fn mul_assign_unchecked(&mut self, other: &Self) {
        for w in 0..self.x.len() {
            self.x[w] ^= other.x[w];
            self.z[w] ^= other.z[w];
        }
    }

    /// Drops the listed qubits (any order, no duplicates), keeping the rest in order.
    pub fn remove_qubits(&self, drop: &[usize]) -> Self {
        let mut keep = Vec::with_capacity(self.n);
        for i in 0..self.n {
            if !drop.contains(&i) {
                keep.push(self.letter(i));
            }
        }
        Self::from_letters(&keep)
    }

    /// Embeds `self` into `total` qubits starting at qubit `offset`.
    pub fn padded(&self, total: usize, offset: usize) -> Self {
        assert!(offset + self.n <= total);
        let mut out = Self::identity(total);
        for i in 0..self.n {
            out.set(offset + i, self.letter(i));
        }
        out
    }

    /// Hex serialisation of the packed words, x words then z words.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(32 * self.x.len());
        for w in self.x.iter().chain(&self.z) {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= WORD {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "{}", self.letter(i).to_char())?;
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
    type Err = SymplecticError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(SymplecticError::Empty);
        }
        let letters = s
            .chars()
            .map(|c| Letter::from_char(c).ok_or(SymplecticError::Parse(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_letters(&letters))
    }
}

pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool, SymplecticError> {
    p.commutes(q)
}

pub fn multiply(p: &PauliString, q: &PauliString) -> Result<PauliString, SymplecticError> {
    p.multiply(q)
}

pub fn weight(p: &PauliString) -> usize {
    p.weight()
}

/// An ordered list of generators on a common number of qubits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GeneratorMatrix {
    n: usize,
    rows: Vec<PauliString>,
}

impl fmt::Debug for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows.iter().map(|r| r.to_string())).finish()
    }
}

impl GeneratorMatrix {
    pub fn empty(n: usize) -> Self {
        Self { n, rows: Vec::new() }
    }

    pub fn new(n: usize, rows: Vec<PauliString>) -> Result<Self, SymplecticError> {
        for r in &rows {
            if r.num_qubits() != n {
                return Err(SymplecticError::Dimension {
                    expected: n,
                    found: r.num_qubits(),
                });
            }
        }
        Ok(Self { n, rows })
    }

    /// Parses rows of `I/X/Y/Z` text; all rows must share a length.
    pub fn parse_rows<S: AsRef<str>>(n: usize, rows: &[S]) -> Result<Self, SymplecticError> {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().parse())
            .collect::<Result<Vec<PauliString>, _>>()?;
        Self::new(n, rows)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliString] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: PauliString) -> Result<(), SymplecticError> {
        if row.num_qubits() != self.n {
            return Err(SymplecticError::Dimension {
                expected: self.n,
                found: row.num_qubits(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn into_rows(self) -> Vec<PauliString> {
        self.rows
    }

    pub fn echelon(&self) -> Echelon {
        Echelon::new(self)
    }

    pub fn rref(&self) -> GeneratorMatrix {
        self.echelon().into_matrix()
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    pub fn contains(&self, p: &PauliString) -> Result<bool, SymplecticError> {
        if p.num_qubits() != self.n {
            return Err(SymplecticError::Dimension {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        Ok(self.echelon().reduce(p).is_identity())
    }

    /// Generators of `{g ∈ ⟨self⟩ : g carries the same letter on qubits a and b}`.
    pub fn constrained_subgroup(&self, a: usize, b: usize) -> Result<GeneratorMatrix, SymplecticError> {
        let split = LetterMatch::new(self, a, b)?;
        Ok(GeneratorMatrix {
            n: self.n,
            rows: split.kernel,
        })
    }

    /// Every element of the generated group. Exponential; for small groups only.
    pub fn expand(&self) -> Vec<PauliString> {
        let mut out = vec![PauliString::identity(self.n)];
        for row in &self.rows {
            let extra: Vec<_> = out
                .iter()
                .map(|g| {
                    let mut h = g.clone();
                    h.mul_assign_unchecked(row);
                    h
                })
                .collect();
            out.extend(extra);
        }
        out
    }
}

pub fn rref(m: &GeneratorMatrix) -> GeneratorMatrix {
    m.rref()
}

pub fn contains(m: &GeneratorMatrix, p: &PauliString) -> Result<bool, SymplecticError> {
    m.contains(p)
}

pub fn constrained_subgroup(m: &GeneratorMatrix, a: usize, b: usize) -> Result<GeneratorMatrix, SymplecticError> {
    m.constrained_subgroup(a, b)
}

/// Reduced row-echelon form with the pivot column of every row.
#[derive(Debug, Clone)]
pub struct Echelon {
    n: usize,
    rows: Vec<PauliString>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn new(m: &GeneratorMatrix) -> Self {
        let mut rows: Vec<PauliString> = m.rows.iter().filter(|r| !r.is_identity()).cloned().collect();
        let mut pivots = Vec::new();
        let mut top = 0;
        for col in 0..2 * m.n {
            if top == rows.len() {
                break;
            }
            let Some(found) = (top..rows.len()).find(|&r| rows[r].column(col)) else {
                continue;
            };
            rows.swap(top, found);
            let (head, tail) = rows.split_at_mut(top);
            let (pivot, rest) = tail.split_first_mut().expect("pivot row present");
            for r in head.iter_mut().chain(rest.iter_mut()) {
                if r.column(col) {
                    r.mul_assign_unchecked(pivot);
                }
            }
            pivots.push(col);
            top += 1;
        }
        rows.truncate(top);
        Self { n: m.n, rows, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[PauliString] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Clears every pivot column of `p`; the result is the canonical coset
    /// representative and is the identity iff `p` lies in the group.
    pub fn reduce(&self, p: &PauliString) -> PauliString {
        let mut out = p.clone();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if out.column(col) {
                out.mul_assign_unchecked(row);
            }
        }
        out
    }

    pub fn into_matrix(self) -> GeneratorMatrix {
        GeneratorMatrix {
            n: self.n,
            rows: self.rows,
        }
    }
}

/// Splits a generator set against the two letter-matching functionals
/// `x_a + x_b` and `z_a + z_b`.
///
/// `kernel` generates the matching subgroup; the pivot generators let any
/// operator be shifted by a group element so that it matches on `a, b`.
#[derive(Debug, Clone)]
pub struct LetterMatch {
    a: usize,
    b: usize,
    kernel: Vec<PauliString>,
    // (functional bit, generator whose value has that bit as its lowest set bit)
    pivots: Vec<(u8, PauliString)>,
}

impl LetterMatch {
    pub fn new(m: &GeneratorMatrix, a: usize, b: usize) -> Result<Self, SymplecticError> {
        for q in [a, b] {
            if q >= m.n {
                return Err(SymplecticError::QubitIndex { index: q, n: m.n });
            }
        }
        if a == b {
            return Err(SymplecticError::SameQubit(a));
        }
        let mut pending: Vec<PauliString> = m.rows.clone();
        let mut pivots = Vec::with_capacity(2);
        for bit in 0..2u8 {
            let Some(pos) = pending.iter().position(|g| (mismatch(g, a, b) >> bit) & 1 == 1) else {
                continue;
            };
            let pivot = pending.remove(pos);
            for g in pending.iter_mut() {
                if (mismatch(g, a, b) >> bit) & 1 == 1 {
                    g.mul_assign_unchecked(&pivot);
                }
            }
            pivots.push((bit, pivot));
        }
        Ok(Self {
            a,
            b,
            kernel: pending,
            pivots,
        })
    }

    pub fn kernel(&self) -> &[PauliString] {
        &self.kernel
    }

    /// Number of independent functionals that are nonzero on the group.
    pub fn constraint_rank(&self) -> usize {
        self.pivots.len()
    }

    /// Multiplies `p` by a group element so it carries equal letters on `a`
    /// and `b`; `None` when no such element exists.
    pub fn align(&self, p: &PauliString) -> Option<PauliString> {
        let mut out = p.clone();
        for (bit, pivot) in &self.pivots {
            if (mismatch(&out, self.a, self.b) >> bit) & 1 == 1 {
                out.mul_assign_unchecked(pivot);
            }
        }
        (mismatch(&out, self.a, self.b) == 0).then_some(out)
    }
}

/// Bit 0: `x_a ⊕ x_b`, bit 1: `z_a ⊕ z_b`.
fn mismatch(p: &PauliString, a: usize, b: usize) -> u8 {
    ((p.x_bit(a) ^ p.x_bit(b)) as u8) | (((p.z_bit(a) ^ p.z_bit(b)) as u8) << 1)
}
