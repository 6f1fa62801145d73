//! Manifests, brute-force reports, the RL-versus-random comparison and the
//! two-seed fusion scan.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tnfuse::codes::{verify, Seed};
use tnfuse::distance::{DistanceEngine, WeightHistogram};
use tnfuse::environment::{CodeTables, Signature};
use tnfuse::search::{random_search_probability, BruteForceResult, PartialSearch};
use tnfuse::tncode::{combine, FuseError};

use crate::campaign::Summary;
use crate::{CliError, ExperimentConfig};

pub const FORMAT_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn code_tables_hash() -> String {
    sha256_hex(CodeTables::embedded().source_text().as_bytes())
}

pub fn manifest(command: &str, cfg: &ExperimentConfig, extra: Value) -> Value {
    json!({
        "command": command,
        "tnfuse_version": env!("CARGO_PKG_VERSION"),
        "format_version": FORMAT_VERSION,
        "config": cfg,
        "config_text": cfg.to_text(),
        "code_tables_sha256": code_tables_hash(),
        "seeds": cfg.seeds.iter().map(|s| {
            let (n, k) = s.signature();
            json!({"name": s.name(), "n": n, "k": k})
        }).collect::<Vec<_>>(),
        "extra": extra,
    })
}

pub fn write_manifest(dir: &Path, command: &str, cfg: &ExperimentConfig, extra: Value) -> Result<(), CliError> {
    let m = serde_json::to_vec_pretty(&manifest(command, cfg, extra)).map_err(|e| CliError::Other(e.to_string()))?;
    let path = dir.join("manifest.json");
    fs::write(&path, m).map_err(CliError::io(format!("writing {}", path.display())))
}

fn histogram_json(h: &WeightHistogram) -> Value {
    json!({
        "stabilizer": h.stabilizer_counts.iter().map(|(w, c)| (w.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
        "logical": h.logical_counts.iter().map(|(w, c)| (w.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
    })
}

fn sig_json(s: &Option<Signature>) -> Value {
    s.map_or(Value::Null, |s| json!([s.n, s.k, s.d]))
}

/// Structured brute-force report. `partial` carries the resume token when the
/// node budget ran out.
pub fn brute_force_report(
    cfg: &ExperimentConfig,
    r: &BruteForceResult,
    wall: Duration,
    partial: Option<&PartialSearch>,
) -> Value {
    let start = cfg.environment().network();
    let best_codes: Vec<Value> = r
        .best
        .iter()
        .map(|(key, seq)| {
            let mut tn = start.clone();
            for &a in seq {
                tn = tn.apply(a).expect("witness replays");
            }
            json!({
                "key": key.as_str(),
                "sequence": seq.iter().map(|a| [a.i, a.j]).collect::<Vec<_>>(),
                "network": tn.to_text(),
                "histogram": r.histograms_of_best.get(key).map(histogram_json),
            })
        })
        .collect();
    json!({
        "seeds": cfg.seeds.iter().map(|s| s.name()).collect::<Vec<_>>(),
        "steps": r.steps,
        "enumeration": r.enumeration.to_string(),
        "best_distance": r.best_distance,
        "best_signature": sig_json(&r.best_signature),
        "optimal_sequence_count": r.optimal_sequence_count.to_string(),
        "complete_sequences": r.complete_sequences.to_string(),
        "pruned_sequences": r.pruned_sequences.to_string(),
        "total_sequences": r.total_sequences.to_string(),
        "ordered_sequences": r.ordered_sequences.to_string(),
        "distinct_best_keys": r.best.len(),
        "best_codes": best_codes,
        "stats": {
            "nodes": r.stats.nodes,
            "leaves": r.stats.leaves,
            "disallowed": r.stats.disallowed,
            "measures_logical": r.stats.measures_logical,
            "rank_deficient": r.stats.rank_deficient,
            "memo_hits": r.stats.memo_hits,
        },
        "first_actions": [r.first_actions.0, r.first_actions.1],
        "complete": partial.is_none(),
        "resume": partial.map(|p| p.resume.to_string()),
        "wall_time_s": wall.as_secs_f64(),
    })
}

/// `code,class,weight,count` rows for every best code of a brute-force run.
pub fn best_histograms_csv(r: &BruteForceResult) -> String {
    let mut s = String::from("code,class,weight,count\n");
    for (i, h) in r.histograms_of_best.values().enumerate() {
        for line in h.to_csv().lines().skip(1) {
            s.push_str(&format!("{i},{line}\n"));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    /// Number of trials played so far (1-based).
    pub t: usize,
    pub rl_frequency: f64,
    pub random_probability: f64,
}

/// Per trial, the fraction of simulations whose environment ended that trial
/// at `target`, next to the probability that `t` uniform draws found one of
/// `n_opt` optimal sequences out of `total`.
pub fn compare(summary: &Summary, target: Signature, n_opt: u128, total: u128) -> Vec<CompareRow> {
    let want = [target.n, target.k, target.d];
    (0..summary.trials)
        .map(|trial| {
            let hits = summary
                .final_signatures
                .iter()
                .zip(&summary.final_completed)
                .filter(|(sigs, done)| sigs[trial] == want && done[trial])
                .count();
            CompareRow {
                t: trial + 1,
                rl_frequency: hits as f64 / summary.simulations as f64,
                random_probability: random_search_probability(n_opt, total, (trial + 1) as u64),
            }
        })
        .collect()
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut s = String::from("t,rl_frequency,random_probability\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.t, r.rl_frequency, r.random_probability));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanOutcome {
    Code { signature: Signature, verified: bool },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub qa: usize,
    pub qb: usize,
    pub outcome: ScanOutcome,
}

/// Fuses every pair of legs that sit on different nodes of the combined
/// network (every pair, for a single seed).
pub fn fuse_scan(seeds: &[Seed], engine: &DistanceEngine) -> Result<Vec<ScanRow>, CliError> {
    if seeds.is_empty() {
        return Err(CliError::Config("fuse-demo needs at least one seed".into()));
    }
    let codes: Vec<_> = seeds.iter().map(|s| s.code()).collect();
    let tn = combine(&codes);
    let n = tn.code().n();
    let mut rows = Vec::new();
    for qa in 0..n {
        for qb in qa + 1..n {
            if seeds.len() > 1 && tn.node_of()[qa] == tn.node_of()[qb] {
                continue;
            }
            let outcome = match tn.fuse(qa, qb) {
                Ok(next) => {
                    let c = next.code();
                    ScanOutcome::Code {
                        signature: Signature {
                            n: c.n(),
                            k: c.k(),
                            d: engine.distance(c)?,
                        },
                        verified: verify(c).passed(),
                    }
                }
                Err(FuseError::Failure(f)) => ScanOutcome::Failed(f.to_string()),
                Err(FuseError::Precondition(e)) => ScanOutcome::Failed(e.to_string()),
            };
            rows.push(ScanRow { qa, qb, outcome });
        }
    }
    Ok(rows)
}
