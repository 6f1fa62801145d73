//! Exact code distance and operator-weight histograms.
//!
//! Every nontrivial logical coset `S·L` is walked in Gray-code order over the
//! stabilizer generators, so each step costs one XOR of packed words and one
//! popcount per coset. The walk is split into independent partitions by fixing
//! the top generator bits; partitions run on the rayon pool and their results
//! merge by `min` or by histogram addition.
//!
//! [`distance_oracle`] is an independent increasing-weight search used to
//! cross-check the enumerator.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::RwLock;
use rayon::prelude::*;
use thiserror::Error;

use crate::codes::StabilizerCode;
use crate::environment::{percept_key, PerceptKey};
use crate::symplectic::PauliString;

pub const DEFAULT_BUDGET_BITS: u32 = 30;

const PARTITION_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistanceError {
    #[error("distance is undefined for a code with no logical qubits")]
    NoLogicals,
    #[error("enumeration needs n + k = {needed} bits, budget is {budget}")]
    Budget { needed: usize, budget: u32 },
}

/// Weight distributions of the stabilizer group and of the nontrivial logical cosets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightHistogram {
    pub stabilizer_counts: BTreeMap<usize, u64>,
    pub logical_counts: BTreeMap<usize, u64>,
}

impl WeightHistogram {
    pub fn min_logical_weight(&self) -> Option<usize> {
        self.logical_counts.iter().find(|(_, &c)| c > 0).map(|(&w, _)| w)
    }

    /// CSV with columns `class,weight,count`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,weight,count\n");
        for (class, counts) in [("stabilizer", &self.stabilizer_counts), ("logical", &self.logical_counts)] {
            for (w, c) in counts {
                s.push_str(&format!("{class},{w},{c}\n"));
            }
        }
        s
    }
}

/// Stabilizer generators and all nontrivial logical offsets as `(x, z)` masks.
struct Packed {
    gens: Vec<(u64, u64)>,
    offsets: Vec<(u64, u64)>,
}

fn pack(code: &StabilizerCode, budget: u32) -> Result<Packed, DistanceError> {
    if code.k() == 0 {
        return Err(DistanceError::NoLogicals);
    }
    let needed = code.n() + code.k();
    if needed > budget as usize || code.n() > 64 {
        return Err(DistanceError::Budget { needed, budget });
    }
    let masks = |p: &PauliString| p.masks().expect("at most 64 qubits");
    let gens = code.stabilizers().rows().iter().map(masks).collect();
    let logical: Vec<(u64, u64)> = code.logical_generators().map(masks).collect();
    let offsets = (1u64..1 << logical.len())
        .map(|sel| {
            logical
                .iter()
                .enumerate()
                .filter(|(b, _)| sel >> b & 1 == 1)
                .fold((0, 0), |(x, z), (_, l)| (x ^ l.0, z ^ l.1))
        })
        .collect();
    Ok(Packed { gens, offsets })
}

/// Calls `f` on every element of `⟨gens⟩` whose top generator bits equal `part`.
#[inline]
fn walk_partition<F: FnMut(u64, u64)>(gens: &[(u64, u64)], low: usize, part: usize, mut f: F) {
    let (mut x, mut z) = (0u64, 0u64);
    for (b, g) in gens[low..].iter().enumerate() {
        if part >> b & 1 == 1 {
            x ^= g.0;
            z ^= g.1;
        }
    }
    f(x, z);
    for i in 1u64..1 << low {
        let g = gens[i.trailing_zeros() as usize];
        x ^= g.0;
        z ^= g.1;
        f(x, z);
    }
}

fn split(gens: usize) -> (usize, usize) {
    let high = gens.min(PARTITION_BITS);
    (gens - high, 1 << high)
}

/// Visits every element of the coset `S·L`, where `L` is the product of the
/// logical generators (ordered `X_1, Z_1, X_2, …`) selected by `logical_mask`.
pub fn walk_coset<F: FnMut(PauliString)>(code: &StabilizerCode, logical_mask: u64, mut f: F) -> Result<(), DistanceError> {
    if code.n() > 64 {
        return Err(DistanceError::Budget {
            needed: code.n() + code.k(),
            budget: 64,
        });
    }
    let gens: Vec<(u64, u64)> = code.stabilizers().rows().iter().map(|p| p.masks().unwrap()).collect();
    let (lx, lz) = code
        .logical_generators()
        .enumerate()
        .filter(|(b, _)| logical_mask >> b & 1 == 1)
        .fold((0, 0), |(x, z), (_, l)| {
            let (a, b) = l.masks().unwrap();
            (x ^ a, z ^ b)
        });
    let (low, parts) = split(gens.len());
    for part in 0..parts {
        walk_partition(&gens, low, part, |x, z| f(PauliString::from_masks(code.n(), x ^ lx, z ^ lz)));
    }
    Ok(())
}

/// Exact distance with the default enumeration budget, without caching.
pub fn distance(code: &StabilizerCode) -> Result<usize, DistanceError> {
    distance_with_budget(code, DEFAULT_BUDGET_BITS)
}

pub fn distance_with_budget(code: &StabilizerCode, budget: u32) -> Result<usize, DistanceError> {
    let packed = pack(code, budget)?;
    let (low, parts) = split(packed.gens.len());
    let d = (0..parts)
        .into_par_iter()
        .map(|part| {
            let mut best = u32::MAX;
            walk_partition(&packed.gens, low, part, |x, z| {
                for &(ox, oz) in &packed.offsets {
                    best = best.min(((x ^ ox) | (z ^ oz)).count_ones());
                }
            });
            best
        })
        .min()
        .expect("at least one partition");
    Ok(d as usize)
}

pub fn weight_histograms(code: &StabilizerCode) -> Result<WeightHistogram, DistanceError> {
    weight_histograms_with_budget(code, DEFAULT_BUDGET_BITS)
}

pub fn weight_histograms_with_budget(code: &StabilizerCode, budget: u32) -> Result<WeightHistogram, DistanceError> {
    let packed = pack(code, budget)?;
    let n = code.n();
    let (low, parts) = split(packed.gens.len());
    let (stab, logical) = (0..parts)
        .into_par_iter()
        .map(|part| {
            let mut stab = vec![0u64; n + 1];
            let mut logical = vec![0u64; n + 1];
            walk_partition(&packed.gens, low, part, |x, z| {
                stab[(x | z).count_ones() as usize] += 1;
                for &(ox, oz) in &packed.offsets {
                    logical[((x ^ ox) | (z ^ oz)).count_ones() as usize] += 1;
                }
            });
            (stab, logical)
        })
        .reduce(
            || (vec![0; n + 1], vec![0; n + 1]),
            |(mut s1, mut l1), (s2, l2)| {
                s1.iter_mut().zip(&s2).for_each(|(a, b)| *a += b);
                l1.iter_mut().zip(&l2).for_each(|(a, b)| *a += b);
                (s1, l1)
            },
        );
    let to_map = |v: Vec<u64>| v.into_iter().enumerate().filter(|(_, c)| *c > 0).collect();
    Ok(WeightHistogram {
        stabilizer_counts: to_map(stab),
        logical_counts: to_map(logical),
    })
}

/// Smallest `w` such that some weight-`w` Pauli commutes with every stabilizer
/// but lies outside the stabilizer group. Cost grows as `Σ C(n,w)·3^w`.
pub fn distance_oracle(code: &StabilizerCode) -> Result<usize, DistanceError> {
    let n = code.n();
    if code.k() == 0 {
        return Err(DistanceError::NoLogicals);
    }
    assert!(n <= 64, "oracle packs operators into single words");
    let stabs: Vec<(u64, u64)> = code.stabilizers().rows().iter().map(|p| p.masks().unwrap()).collect();
    let echelon = code.stabilizers().echelon();
    for w in 1..=n {
        let mut support: u64 = (1u64 << w) - 1;
        let limit = if n == 64 { u64::MAX } else { 1u64 << n };
        let qubits = |s: u64| (0..n).filter(move |q| s >> q & 1 == 1);
        while support < limit {
            let sites: Vec<usize> = qubits(support).collect();
            for mut letters in 0..3usize.pow(w as u32) {
                let (mut x, mut z) = (0u64, 0u64);
                for &q in &sites {
                    // 0 → X, 1 → Y, 2 → Z
                    match letters % 3 {
                        0 => x |= 1 << q,
                        1 => {
                            x |= 1 << q;
                            z |= 1 << q
                        }
                        _ => z |= 1 << q,
                    }
                    letters /= 3;
                }
                let normal = stabs
                    .iter()
                    .all(|&(sx, sz)| ((x & sz).count_ones() + (z & sx).count_ones()) % 2 == 0);
                if normal && !echelon.reduce(&PauliString::from_masks(n, x, z)).is_identity() {
                    return Ok(w);
                }
            }
            if w == n {
                break;
            }
            // Gosper's hack: next larger integer with the same popcount.
            let c = support & support.wrapping_neg();
            let r = support + c;
            support = (((r ^ support) >> 2) / c) | r;
        }
    }
    unreachable!("a code with k >= 1 has a nontrivial logical operator")
}

/// Distance computation with a shared cache keyed by percept key.
#[derive(Debug)]
pub struct DistanceEngine {
    budget_bits: u32,
    cache: RwLock<HashMap<PerceptKey, usize>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl Default for DistanceEngine {
    fn default() -> Self {
        Self::new(DEFAULT_BUDGET_BITS)
    }
}

impl DistanceEngine {
    pub fn new(budget_bits: u32) -> Self {
        Self {
            budget_bits,
            cache: RwLock::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn budget_bits(&self) -> u32 {
        self.budget_bits
    }

    pub fn distance(&self, code: &StabilizerCode) -> Result<usize, DistanceError> {
        self.distance_keyed(&percept_key(code), code)
    }

    /// As [`DistanceEngine::distance`] when the caller already holds the key.
    pub fn distance_keyed(&self, key: &PerceptKey, code: &StabilizerCode) -> Result<usize, DistanceError> {
        if let Some(&d) = self.cache.read().get(key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(d);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let d = distance_with_budget(code, self.budget_bits)?;
        self.cache.write().insert(key.clone(), d);
        Ok(d)
    }

    pub fn cached(&self, key: &PerceptKey) -> Option<usize> {
        self.cache.read().get(key).copied()
    }

    pub fn histograms(&self, code: &StabilizerCode) -> Result<WeightHistogram, DistanceError> {
        weight_histograms_with_budget(code, self.budget_bits)
    }

    /// `(hits, misses)` since construction.
    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    pub fn len(&self) -> usize {
        self.cache.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
