//! Stabilizer codes: the seed catalog, logical-operator completion, structural
//! verification and the plain-text code file format.
//!
//! The text format is
//!
//! ```text
//! n k
//! <n-k stabilizer rows>
//! ---
//! <k logical X rows>
//! <k logical Z rows>
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::symplectic::{GeneratorMatrix, Letter, PauliString, SymplecticError};

const TEN_ONE_FOUR: &str = include_str!("../data/ten_one_four.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("unknown seed code {0:?}")]
    UnknownSeed(String),
    #[error("invalid stabilizers: {0}")]
    InvalidStabilizers(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
}

/// An `[[n, k]]` stabilizer code with one representative per logical generator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StabilizerCode {
    n: usize,
    k: usize,
    stabilizers: GeneratorMatrix,
    logical_x: Vec<PauliString>,
    logical_z: Vec<PauliString>,
}

impl fmt::Debug for StabilizerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StabilizerCode[[{}, {}]] {{ stabilizers: {:?}, ", self.n, self.k, self.stabilizers)?;
        write!(f, "logical_x: {:?}, logical_z: {:?} }}", self.logical_x, self.logical_z)
    }
}

impl StabilizerCode {
    /// Assembles a code; only shapes are checked here, see [`verify`] for the
    /// group-theoretic conditions.
    pub fn new(
        stabilizers: GeneratorMatrix,
        logical_x: Vec<PauliString>,
        logical_z: Vec<PauliString>,
    ) -> Result<Self, CodeError> {
        let n = stabilizers.num_qubits();
        if logical_x.len() != logical_z.len() {
            return Err(CodeError::InvalidStabilizers(format!(
                "{} logical X but {} logical Z operators",
                logical_x.len(),
                logical_z.len()
            )));
        }
        for l in logical_x.iter().chain(&logical_z) {
            if l.num_qubits() != n {
                return Err(SymplecticError::Dimension {
                    expected: n,
                    found: l.num_qubits(),
                }
                .into());
            }
        }
        let k = logical_x.len();
        Ok(Self {
            n,
            k,
            stabilizers,
            logical_x,
            logical_z,
        })
    }

    /// Completes logical operators for a commuting, independent generator set.
    pub fn from_stabilizers(stabilizers: GeneratorMatrix) -> Result<Self, CodeError> {
        let (lx, lz, _) = complete_logicals(&stabilizers)?;
        Self::new(stabilizers, lx, lz)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn stabilizers(&self) -> &GeneratorMatrix {
        &self.stabilizers
    }

    pub fn logical_x(&self) -> &[PauliString] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliString] {
        &self.logical_z
    }

    /// Logical generators in the order `X_1, Z_1, X_2, Z_2, …`.
    pub fn logical_generators(&self) -> impl Iterator<Item = &PauliString> {
        self.logical_x
            .iter()
            .zip(&self.logical_z)
            .flat_map(|(x, z)| [x, z])
    }

    pub fn seed(seed: Seed) -> Self {
        seed.code()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.k);
        for row in self.stabilizers.rows() {
            s.push_str(&format!("{row}\n"));
        }
        s.push_str("---\n");
        for l in self.logical_x.iter().chain(&self.logical_z) {
            s.push_str(&format!("{l}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, CodeError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (code, rest) = parse_code_lines(&mut lines)?;
        if let Some((line, extra)) = rest {
            return Err(CodeError::Parse {
                line,
                msg: format!("unexpected trailing content {extra:?}"),
            });
        }
        Ok(code)
    }
}

type Parsed<'a> = (StabilizerCode, Option<(usize, &'a str)>);

/// Parses the code section of a code or network file. Returns the code and the
/// first line past the logical rows, if any.
pub(crate) fn parse_code_lines<'a, I>(lines: &mut I) -> Result<Parsed<'a>, CodeError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let mut content = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = content.next().ok_or(CodeError::Parse {
        line: 1,
        msg: "missing \"n k\" header".into(),
    })?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CodeError::Parse { line, msg: e.to_string() })?;
    let [n, k] = nums[..] else {
        return Err(CodeError::Parse {
            line,
            msg: format!("expected \"n k\", got {header:?}"),
        });
    };
    if k > n {
        return Err(CodeError::Parse {
            line,
            msg: format!("k = {k} exceeds n = {n}"),
        });
    }
    let stabs = (0..n - k)
        .map(|_| read_row(&mut content, n, line, "a stabilizer row"))
        .collect::<Result<Vec<_>, _>>()?;
    match content.next() {
        Some((_, "---")) => {}
        Some((line, other)) => {
            return Err(CodeError::Parse {
                line,
                msg: format!("expected \"---\" separator, got {other:?}"),
            })
        }
        None => {
            return Err(CodeError::Parse {
                line,
                msg: "missing \"---\" separator".into(),
            })
        }
    }
    let lx = (0..k)
        .map(|_| read_row(&mut content, n, line, "a logical X row"))
        .collect::<Result<Vec<_>, _>>()?;
    let lz = (0..k)
        .map(|_| read_row(&mut content, n, line, "a logical Z row"))
        .collect::<Result<Vec<_>, _>>()?;
    let code = StabilizerCode::new(GeneratorMatrix::new(n, stabs)?, lx, lz)?;
    Ok((code, content.next()))
}

fn read_row<'a>(
    content: &mut impl Iterator<Item = (usize, &'a str)>,
    n: usize,
    header_line: usize,
    what: &str,
) -> Result<PauliString, CodeError> {
    let (line, text) = content.next().ok_or(CodeError::Parse {
        line: header_line,
        msg: format!("file ended before {what}"),
    })?;
    let p: PauliString = text.parse().map_err(|e: SymplecticError| CodeError::Parse {
        line,
        msg: e.to_string(),
    })?;
    if p.num_qubits() != n {
        return Err(CodeError::Parse {
            line,
            msg: format!("row has {} qubits, expected {n}", p.num_qubits()),
        });
    }
    Ok(p)
}

/// Catalog of small building-block codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Seed {
    /// The `[[5,1,3]]` code.
    FiveQubit,
    /// The purified five-qubit code, a `[[6,0]]` stabilizer state.
    SixQubitState,
    /// The `[[4,2,2]]` error-detecting code.
    FourTwoTwo,
    /// A `[[10,1,4]]` code.
    TenOneFour,
}

impl Seed {
    pub const ALL: [Seed; 4] = [Seed::FiveQubit, Seed::SixQubitState, Seed::FourTwoTwo, Seed::TenOneFour];

    pub fn name(self) -> &'static str {
        match self {
            Seed::FiveQubit => "five_qubit",
            Seed::SixQubitState => "six_qubit_state",
            Seed::FourTwoTwo => "four_two_two",
            Seed::TenOneFour => "ten_one_four",
        }
    }

    /// Advertised `(n, k)`.
    pub fn signature(self) -> (usize, usize) {
        match self {
            Seed::FiveQubit => (5, 1),
            Seed::SixQubitState => (6, 0),
            Seed::FourTwoTwo => (4, 2),
            Seed::TenOneFour => (10, 1),
        }
    }

    pub fn code(self) -> StabilizerCode {
        let rows = |n: usize, rows: &[&str]| GeneratorMatrix::parse_rows(n, rows).expect("catalog rows parse");
        match self {
            Seed::FiveQubit => StabilizerCode::new(
                rows(5, &["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]),
                vec!["XXXXX".parse().unwrap()],
                vec!["ZZZZZ".parse().unwrap()],
            )
            .expect("five-qubit code shape"),
            Seed::SixQubitState => StabilizerCode::new(
                rows(6, &["XZZXII", "IXZZXI", "XIXZZI", "ZXIXZI", "XXXXXX", "ZZZZZZ"]),
                vec![],
                vec![],
            )
            .expect("six-qubit state shape"),
            Seed::FourTwoTwo => StabilizerCode::from_stabilizers(rows(4, &["XXXX", "ZZZZ"])).expect("[[4,2,2]] completes"),
            Seed::TenOneFour => {
                let rows: Vec<&str> = TEN_ONE_FOUR
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .collect();
                StabilizerCode::from_stabilizers(GeneratorMatrix::parse_rows(10, &rows).expect("[[10,1,4]] data parses"))
                    .expect("[[10,1,4]] completes")
            }
        }
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Seed {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Seed::ALL
            .into_iter()
            .find(|seed| seed.name() == s.trim())
            .ok_or_else(|| CodeError::UnknownSeed(s.to_string()))
    }
}

pub fn seed(name: &str) -> Result<StabilizerCode, CodeError> {
    Ok(name.parse::<Seed>()?.code())
}

/// Operators `E_j` with `E_j` anticommuting with stabilizer `j` only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PureErrorSet {
    pub errors: Vec<PauliString>,
}

/// Symplectic completion of a stabilizer generator set.
///
/// Returns `k = n - r` logical pairs and `r` mutually commuting pure errors.
/// Logical representatives are reduced against the stabilizer echelon form, so
/// the output depends only on the input rows and their order.
pub fn complete_logicals(
    stabilizers: &GeneratorMatrix,
) -> Result<(Vec<PauliString>, Vec<PauliString>, PureErrorSet), CodeError> {
    let n = stabilizers.num_qubits();
    let rows = stabilizers.rows();
    let r = rows.len();
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate().skip(i + 1) {
            if a.symplectic_unchecked(b) {
                return Err(CodeError::InvalidStabilizers(format!(
                    "generators {} ({a}) and {} ({b}) anticommute",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let echelon = stabilizers.echelon();
    if echelon.rank() != r {
        return Err(CodeError::InvalidStabilizers(format!(
            "{r} generators have rank {}",
            echelon.rank()
        )));
    }

    let basis: Vec<PauliString> = (0..n)
        .flat_map(|q| [PauliString::single(n, q, Letter::X), PauliString::single(n, q, Letter::Z)])
        .collect();

    // Syndrome elimination: find combinations of single-qubit operators whose
    // syndrome against the stabilizers is a unit vector.
    let mut cands: Vec<(Vec<bool>, PauliString)> = basis
        .iter()
        .map(|b| (rows.iter().map(|s| s.symplectic_unchecked(b)).collect(), b.clone()))
        .collect();
    let mut errors: Vec<(Vec<bool>, PauliString)> = Vec::with_capacity(r);
    for bit in 0..r {
        let pos = (0..cands.len())
            .find(|&c| cands[c].0[bit])
            .expect("independent stabilizers have full-rank syndromes");
        let (syn, op) = cands.swap_remove(pos);
        for (s, p) in cands.iter_mut() {
            if s[bit] {
                for (a, b) in s.iter_mut().zip(&syn) {
                    *a ^= *b;
                }
                p.mul_assign_unchecked(&op);
            }
        }
        for (s, p) in errors.iter_mut() {
            if s[bit] {
                for (a, b) in s.iter_mut().zip(&syn) {
                    *a ^= *b;
                }
                p.mul_assign_unchecked(&op);
            }
        }
        errors.push((syn, op));
    }
    let mut errors: Vec<PauliString> = errors.into_iter().map(|(_, p)| p).collect();
    // Make the pure errors commute among themselves; multiplying E_l by S_j
    // flips its commutation with E_j and nothing else.
    for l in 0..r {
        for j in 0..l {
            if errors[l].symplectic_unchecked(&errors[j]) {
                errors[l].mul_assign_unchecked(&rows[j]);
            }
        }
    }

    // Project the single-qubit basis onto the symplectic complement of
    // span(S, E), then pair it up by symplectic Gram-Schmidt.
    let mut pool: Vec<PauliString> = basis
        .iter()
        .map(|b| {
            let mut p = b.clone();
            for (s, e) in rows.iter().zip(&errors) {
                if b.symplectic_unchecked(e) {
                    p.mul_assign_unchecked(s);
                }
                if b.symplectic_unchecked(s) {
                    p.mul_assign_unchecked(e);
                }
            }
            p
        })
        .filter(|p| !p.is_identity())
        .collect();
    let mut logical_x = Vec::new();
    let mut logical_z = Vec::new();
    while let Some(v) = pool.first().cloned() {
        let Some(wpos) = pool.iter().position(|w| v.symplectic_unchecked(w)) else {
            // Only reachable if the pool degenerates; the complement is symplectic.
            pool.remove(0);
            continue;
        };
        let w = pool.remove(wpos);
        pool.remove(0);
        for u in pool.iter_mut() {
            let with_w = u.symplectic_unchecked(&w);
            let with_v = u.symplectic_unchecked(&v);
            if with_w {
                u.mul_assign_unchecked(&v);
            }
            if with_v {
                u.mul_assign_unchecked(&w);
            }
        }
        pool.retain(|p| !p.is_identity());
        logical_x.push(echelon.reduce(&v));
        logical_z.push(echelon.reduce(&w));
    }
    debug_assert_eq!(logical_x.len(), n - r);
    Ok((logical_x, logical_z, PureErrorSet { errors }))
}

/// The individual structural checks run by [`verify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    /// Row and logical counts match `n - k` and `k`.
    Shape,
    /// The stabilizer rows are independent.
    StabilizerRank,
    /// The stabilizer group is abelian.
    StabilizersCommute,
    /// Every logical commutes with every stabilizer.
    LogicalsCommuteWithStabilizers,
    /// `X_a` and `Z_b` anticommute iff `a == b`; same-type logicals commute.
    LogicalPairing,
    /// No logical representative lies in the stabilizer group.
    LogicalOutsideStabilizerGroup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<(Check, bool)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn failures(&self) -> Vec<Check> {
        self.checks.iter().filter(|(_, ok)| !ok).map(|(c, _)| *c).collect()
    }

    pub fn check(&self, which: Check) -> bool {
        self.checks.iter().any(|(c, ok)| *c == which && *ok)
    }
}

pub fn verify(code: &StabilizerCode) -> VerifyReport {
    let stabs = code.stabilizers.rows();
    let shape = stabs.len() + code.k == code.n
        && code.logical_x.len() == code.k
        && code.logical_z.len() == code.k
        && stabs.iter().chain(&code.logical_x).chain(&code.logical_z).all(|p| p.num_qubits() == code.n);
    if !shape {
        return VerifyReport {
            checks: vec![(Check::Shape, false)],
        };
    }
    let echelon = code.stabilizers.echelon();
    let rank = echelon.rank() == stabs.len();
    let abelian = stabs
        .iter()
        .enumerate()
        .all(|(i, a)| stabs[i + 1..].iter().all(|b| !a.symplectic_unchecked(b)));
    let logicals: Vec<&PauliString> = code.logical_x.iter().chain(&code.logical_z).collect();
    let normal = logicals.iter().all(|l| stabs.iter().all(|s| !l.symplectic_unchecked(s)));
    let mut pairing = true;
    for a in 0..code.k {
        for b in 0..code.k {
            let xz = code.logical_x[a].symplectic_unchecked(&code.logical_z[b]);
            let xx = code.logical_x[a].symplectic_unchecked(&code.logical_x[b]);
            let zz = code.logical_z[a].symplectic_unchecked(&code.logical_z[b]);
            if xz != (a == b) || xx || zz {
                pairing = false;
            }
        }
    }
    let outside = logicals.iter().all(|l| !echelon.reduce(l).is_identity());
    VerifyReport {
        checks: vec![
            (Check::Shape, true),
            (Check::StabilizerRank, rank),
            (Check::StabilizersCommute, abelian),
            (Check::LogicalsCommuteWithStabilizers, normal),
            (Check::LogicalPairing, pairing),
            (Check::LogicalOutsideStabilizerGroup, outside),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn five_qubit_matches_table() {
        let c = Seed::FiveQubit.code();
        assert_eq!((c.n(), c.k()), (5, 1));
        let rows: Vec<String> = c.stabilizers().rows().iter().map(|r| r.to_string()).collect();
        assert_eq!(rows, ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]);
        assert_eq!(c.logical_x(), &[p("XXXXX")]);
        assert_eq!(c.logical_z(), &[p("ZZZZZ")]);
        assert!(verify(&c).passed());
    }

    #[test]
    fn six_qubit_state_matches_table() {
        let c = Seed::SixQubitState.code();
        assert_eq!((c.n(), c.k()), (6, 0));
        assert_eq!(c.stabilizers().rows()[4], p("XXXXXX"));
        assert_eq!(c.stabilizers().rows()[5], p("ZZZZZZ"));
        assert!(verify(&c).passed());
    }

    #[test]
    fn catalog_signatures_and_verification() {
        for seed in Seed::ALL {
            let c = seed.code();
            assert_eq!((c.n(), c.k()), seed.signature(), "{seed}");
            assert!(verify(&c).passed(), "{seed}: {:?}", verify(&c).failures());
        }
        assert!(matches!(seed("seven_qubit"), Err(CodeError::UnknownSeed(_))));
        assert_eq!(seed("four_two_two").unwrap().k(), 2);
    }

    #[test]
    fn completion_for_five_qubit_lands_in_table_cosets() {
        let c = Seed::FiveQubit.code();
        let (lx, lz, pe) = complete_logicals(c.stabilizers()).unwrap();
        assert_eq!((lx.len(), lz.len(), pe.errors.len()), (1, 1, 4));
        let code = StabilizerCode::new(c.stabilizers().clone(), lx.clone(), lz.clone()).unwrap();
        assert!(verify(&code).passed());
        let mut extended = c.stabilizers().clone();
        extended.push(p("XXXXX")).unwrap();
        extended.push(p("ZZZZZ")).unwrap();
        assert!(extended.contains(&lx[0]).unwrap());
        assert!(extended.contains(&lz[0]).unwrap());
    }

    #[test]
    fn completion_for_four_two_two() {
        let stabs = GeneratorMatrix::parse_rows(4, &["XXXX", "ZZZZ"]).unwrap();
        let (lx, lz, pe) = complete_logicals(&stabs).unwrap();
        assert_eq!(lx.len(), 2);
        let code = StabilizerCode::new(stabs.clone(), lx, lz).unwrap();
        assert!(verify(&code).passed());
        check_pure_errors(&stabs, &pe);
    }

    #[test]
    fn completion_with_no_stabilizers() {
        let (lx, lz, pe) = complete_logicals(&GeneratorMatrix::empty(1)).unwrap();
        assert_eq!(lx, vec![p("X")]);
        assert_eq!(lz, vec![p("Z")]);
        assert!(pe.errors.is_empty());
    }

    #[test]
    fn completion_rejects_bad_input() {
        let anti = GeneratorMatrix::parse_rows(2, &["XI", "ZI"]).unwrap();
        assert!(matches!(complete_logicals(&anti), Err(CodeError::InvalidStabilizers(_))));
        let dep = GeneratorMatrix::parse_rows(2, &["XX", "XX"]).unwrap();
        assert!(matches!(complete_logicals(&dep), Err(CodeError::InvalidStabilizers(_))));
    }

    fn check_pure_errors(stabs: &GeneratorMatrix, pe: &PureErrorSet) {
        for (j, e) in pe.errors.iter().enumerate() {
            for (i, s) in stabs.rows().iter().enumerate() {
                assert_eq!(!e.commutes(s).unwrap(), i == j);
            }
        }
    }

    #[test]
    fn completion_spans_the_full_pauli_group() {
        for seed in Seed::ALL {
            let c = seed.code();
            let (lx, lz, pe) = complete_logicals(c.stabilizers()).unwrap();
            check_pure_errors(c.stabilizers(), &pe);
            let mut all = c.stabilizers().clone();
            for q in lx.into_iter().chain(lz).chain(pe.errors) {
                all.push(q).unwrap();
            }
            assert_eq!(all.rank(), 2 * c.n(), "{seed}");
        }
    }

    #[test]
    fn completion_is_deterministic() {
        let stabs = Seed::TenOneFour.code().stabilizers().clone();
        assert_eq!(complete_logicals(&stabs).unwrap(), complete_logicals(&stabs).unwrap());
    }

    #[test]
    fn verify_flags_broken_codes() {
        let c = Seed::FiveQubit.code();
        let mut rows = c.stabilizers().rows().to_vec();
        rows[1] = rows[0].clone();
        let dup = StabilizerCode::new(GeneratorMatrix::new(5, rows).unwrap(), c.logical_x().to_vec(), c.logical_z().to_vec())
            .unwrap();
        let report = verify(&dup);
        assert!(!report.check(Check::StabilizerRank));

        let inside = StabilizerCode::new(
            c.stabilizers().clone(),
            vec![c.stabilizers().rows()[0].clone()],
            c.logical_z().to_vec(),
        )
        .unwrap();
        assert!(verify(&inside).failures().contains(&Check::LogicalOutsideStabilizerGroup));
    }

    #[test]
    fn stabilizer_group_sizes() {
        for seed in [Seed::FiveQubit, Seed::SixQubitState, Seed::FourTwoTwo] {
            let c = seed.code();
            let mut group = c.stabilizers().expand();
            group.sort();
            group.dedup();
            assert_eq!(group.len(), 1 << (c.n() - c.k()));
        }
    }

    #[test]
    fn text_format_round_trip() {
        for seed in Seed::ALL {
            let c = seed.code();
            let text = c.to_text();
            let back = StabilizerCode::from_text(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_text(), text);
        }
        let five = Seed::FiveQubit.code().to_text();
        assert!(five.starts_with("5 1\nXZZXI\n"));
        assert!(five.ends_with("---\nXXXXX\nZZZZZ\n"));
    }

    #[test]
    fn text_format_errors() {
        assert!(StabilizerCode::from_text("").is_err());
        assert!(StabilizerCode::from_text("2 1\nXX\nZZ\n").is_err());
        assert!(StabilizerCode::from_text("2 1\nXX\n---\nXI\n").is_err());
        let err = StabilizerCode::from_text("2 1\nXQ\n---\nXI\nZZ\n").unwrap_err();
        assert!(matches!(err, CodeError::Parse { line: 2, .. }));
    }
}
