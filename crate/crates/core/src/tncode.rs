//! Tensor-network codes built from seed codes, and fusion of two tensor legs.
//!
//! Fusing legs `a` and `b` contracts them with an `XX`/`ZZ` Bell pair: the new
//! stabilizer group is the subgroup of elements carrying equal letters on `a`
//! and `b`, restricted to the other qubits, and every logical coset is mapped
//! through an element of the coset that also matches on `a` and `b`. The fusion
//! is valid only when every logical class survives and the stabilizer rank
//! drops by exactly two.

use std::fmt;

use thiserror::Error;

use crate::codes::{parse_code_lines, verify, CodeError, StabilizerCode, VerifyReport};
use crate::symplectic::{GeneratorMatrix, LetterMatch, PauliString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TnError {
    #[error("qubit {0} is not live in this network")]
    DeadQubit(usize),
    #[error("cannot fuse qubit {0} with itself")]
    SameQubit(usize),
    #[error("action {0} is not allowed in the current network")]
    ActionNotAllowed(Action),
    #[error("fused code failed verification: {0:?}")]
    Unverified(VerifyReport),
    #[error("network file: {0}")]
    Format(String),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Why a structurally possible fusion is nevertheless invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionFailure {
    /// Some logical class has no representative matching on the fused legs,
    /// i.e. the `XX`/`ZZ` measurement would measure logical information.
    MeasuresLogical,
    /// The surviving stabilizer group has the wrong rank.
    RankDeficient,
}

impl fmt::Display for FusionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionFailure::MeasuresLogical => "measures_logical",
            FusionFailure::RankDeficient => "rank_deficient",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FuseError {
    Failure(FusionFailure),
    Precondition(TnError),
}

impl From<TnError> for FuseError {
    fn from(e: TnError) -> Self {
        FuseError::Precondition(e)
    }
}

/// An unordered pair of node ids, stored with `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub i: usize,
    pub j: usize,
}

impl Action {
    pub fn new(a: usize, b: usize) -> Self {
        Self {
            i: a.min(b),
            j: a.max(b),
        }
    }

    pub fn count(node_count: usize) -> usize {
        node_count * (node_count + 1) / 2
    }

    /// Position in the row-major enumeration `(0,0), (0,1), …, (0,N-1), (1,1), …`.
    pub fn index(self, node_count: usize) -> usize {
        debug_assert!(self.j < node_count);
        // Rows 0..i hold N, N-1, …, N-i+1 actions.
        self.i * node_count - self.i * self.i.saturating_sub(1) / 2 + (self.j - self.i)
    }

    pub fn from_index(index: usize, node_count: usize) -> Option<Self> {
        Self::all(node_count).nth(index)
    }

    pub fn all(node_count: usize) -> impl Iterator<Item = Action> {
        (0..node_count).flat_map(move |i| (i..node_count).map(move |j| Action { i, j }))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// A stabilizer code whose qubits are grouped into the nodes they came from.
///
/// Qubits are addressed by their label in the freshly combined network; labels
/// of fused qubits disappear, the rest keep their relative order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorNetworkCode {
    code: StabilizerCode,
    node_count: usize,
    labels: Vec<usize>,
    node_of: Vec<usize>,
}

impl TensorNetworkCode {
    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Original labels of the live qubits, in code order.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Node of each live qubit, in code order.
    pub fn node_of(&self) -> &[usize] {
        &self.node_of
    }

    pub fn live_on(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .zip(&self.node_of)
            .filter(move |(_, &nd)| nd == node)
            .map(|(&l, _)| l)
    }

    fn live_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.node_count];
        for &nd in &self.node_of {
            counts[nd] += 1;
        }
        counts
    }

    fn position(&self, label: usize) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn is_allowed(&self, a: Action) -> bool {
        if a.j >= self.node_count {
            return false;
        }
        let counts = self.live_counts();
        if a.i == a.j {
            counts[a.i] >= 2
        } else {
            counts[a.i] >= 1 && counts[a.j] >= 1
        }
    }

    /// Structurally possible actions in index order.
    pub fn allowed_actions(&self) -> Vec<Action> {
        let counts = self.live_counts();
        Action::all(self.node_count)
            .filter(|a| {
                if a.i == a.j {
                    counts[a.i] >= 2
                } else {
                    counts[a.i] >= 1 && counts[a.j] >= 1
                }
            })
            .collect()
    }

    /// Lowest live qubit on node `i`, then the lowest other live qubit on node `j`.
    pub fn resolve_action(&self, a: Action) -> Result<(usize, usize), TnError> {
        if !self.is_allowed(a) {
            return Err(TnError::ActionNotAllowed(a));
        }
        let first = self.live_on(a.i).next().expect("allowed action has a live qubit");
        let second = self
            .live_on(a.j)
            .find(|&q| q != first)
            .expect("allowed action has a second live qubit");
        Ok((first, second))
    }

    pub fn apply(&self, a: Action) -> Result<TensorNetworkCode, FuseError> {
        let (qa, qb) = self.resolve_action(a)?;
        self.fuse(qa, qb)
    }

    /// Contracts the legs of qubits `qa` and `qb` (labels).
    pub fn fuse(&self, qa: usize, qb: usize) -> Result<TensorNetworkCode, FuseError> {
        if qa == qb {
            return Err(TnError::SameQubit(qa).into());
        }
        let pa = self.position(qa).ok_or(TnError::DeadQubit(qa))?;
        let pb = self.position(qb).ok_or(TnError::DeadQubit(qb))?;
        let n = self.code.n();
        let k = self.code.k();
        let split = LetterMatch::new(self.code.stabilizers(), pa, pb).expect("positions are valid and distinct");

        let align = |ls: &[PauliString]| -> Option<Vec<PauliString>> {
            ls.iter().map(|l| split.align(l).map(|m| m.remove_qubits(&[pa, pb]))).collect()
        };
        let (Some(lx), Some(lz)) = (align(self.code.logical_x()), align(self.code.logical_z())) else {
            return Err(FuseError::Failure(FusionFailure::MeasuresLogical));
        };

        let restricted: Vec<PauliString> = split.kernel().iter().map(|g| g.remove_qubits(&[pa, pb])).collect();
        let echelon = GeneratorMatrix::new(n - 2, restricted).expect("restricted rows share a length").echelon();
        if echelon.rank() + k != n - 2 {
            return Err(FuseError::Failure(FusionFailure::RankDeficient));
        }
        let lx = lx.iter().map(|l| echelon.reduce(l)).collect();
        let lz = lz.iter().map(|l| echelon.reduce(l)).collect();
        let code = StabilizerCode::new(echelon.into_matrix(), lx, lz).map_err(TnError::from)?;
        let report = verify(&code);
        if !report.passed() {
            // A logical pair collapsing onto the stabilizer group is the only
            // way a rank-consistent fusion can fail verification.
            return Err(FuseError::Failure(FusionFailure::MeasuresLogical));
        }
        let keep = |v: &[usize]| -> Vec<usize> {
            v.iter()
                .enumerate()
                .filter(|&(p, _)| p != pa && p != pb)
                .map(|(_, &x)| x)
                .collect()
        };
        Ok(TensorNetworkCode {
            code,
            node_count: self.node_count,
            labels: keep(&self.labels),
            node_of: keep(&self.node_of),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = self.code.to_text();
        s.push_str(&format!("nodes: {}\n", self.node_count));
        for nd in &self.node_of {
            s.push_str(&format!("{nd}\n"));
        }
        s
    }

    /// Parses the network format; live qubits are relabelled `0..n`.
    pub fn from_text(text: &str) -> Result<Self, TnError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (code, next) = parse_code_lines(&mut lines)?;
        let Some((line, header)) = next else {
            return Err(TnError::Format("missing \"nodes:\" section".into()));
        };
        let rest = header
            .strip_prefix("nodes:")
            .ok_or_else(|| TnError::Format(format!("line {line}: expected \"nodes:\", got {header:?}")))?
            .trim();
        let mut node_of = Vec::with_capacity(code.n());
        for (line, l) in lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('#')) {
            node_of.push(
                l.parse::<usize>()
                    .map_err(|e| TnError::Format(format!("line {line}: {e}")))?,
            );
        }
        if node_of.len() != code.n() {
            return Err(TnError::Format(format!(
                "{} node ids for {} qubits",
                node_of.len(),
                code.n()
            )));
        }
        let used = node_of.iter().max().map_or(0, |m| m + 1);
        let node_count = if rest.is_empty() {
            used
        } else {
            rest.parse::<usize>()
                .map_err(|e| TnError::Format(format!("line {line}: {e}")))?
        };
        if node_count < used {
            return Err(TnError::Format(format!("node id {} exceeds node count {node_count}", used - 1)));
        }
        let report = verify(&code);
        if !report.passed() {
            return Err(TnError::Unverified(report));
        }
        Ok(Self {
            labels: (0..code.n()).collect(),
            code,
            node_count,
            node_of,
        })
    }
}

/// Disjoint union of seed codes, one node per seed, qubits contiguous in order.
pub fn combine(seeds: &[StabilizerCode]) -> TensorNetworkCode {
    assert!(!seeds.is_empty(), "combine needs at least one seed");
    let n: usize = seeds.iter().map(StabilizerCode::n).sum();
    let mut stabs = GeneratorMatrix::empty(n);
    let mut lx = Vec::new();
    let mut lz = Vec::new();
    let mut node_of = Vec::with_capacity(n);
    let mut offset = 0;
    for (node, c) in seeds.iter().enumerate() {
        for row in c.stabilizers().rows() {
            stabs.push(row.padded(n, offset)).expect("padded rows have n qubits");
        }
        lx.extend(c.logical_x().iter().map(|l| l.padded(n, offset)));
        lz.extend(c.logical_z().iter().map(|l| l.padded(n, offset)));
        node_of.extend(std::iter::repeat_n(node, c.n()));
        offset += c.n();
    }
    TensorNetworkCode {
        code: StabilizerCode::new(stabs, lx, lz).expect("combined code shape"),
        node_count: seeds.len(),
        labels: (0..n).collect(),
        node_of,
    }
}
