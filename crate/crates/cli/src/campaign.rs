//! Multi-simulation campaigns: each simulation gets its own rng stream
//! (`rng_seed + i`) and, for agent runs, a fresh agent.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tnfuse::distance::DistanceEngine;
use tnfuse::environment::{CodeTables, FusionEnv, Signature, StepRecord, TrialRecord};
use tnfuse::search::random_baseline;
use tnfuse::Agent;

use crate::report::write_manifest;
use crate::{CliError, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignKind {
    Rl,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestCode {
    pub trial: usize,
    pub signature: Signature,
    pub network: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub simulation: usize,
    pub trials: Vec<TrialRecord>,
    /// Agent h rows at the end of the simulation (agent runs only).
    pub snapshot: Vec<(String, Vec<f64>)>,
    /// Highest-distance code that ended a completed trial, first occurrence.
    pub best: Option<BestCode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub kind: CampaignKind,
    pub config: ExperimentConfig,
    pub runs: Vec<SimulationRun>,
}

impl Campaign {
    /// How many simulations ended their last trial with a completed code of
    /// distance `d`.
    pub fn final_trial_hits(&self, d: usize) -> usize {
        self.runs
            .iter()
            .filter(|r| {
                r.trials
                    .last()
                    .is_some_and(|t| t.completed && t.final_signature.d == d)
            })
            .count()
    }

    pub fn step_rows(&self) -> impl Iterator<Item = &StepRecord> {
        self.runs.iter().flat_map(|r| r.trials.iter().flat_map(|t| t.steps.iter()))
    }
}

fn shared(cfg: &ExperimentConfig) -> (Arc<DistanceEngine>, Arc<CodeTables>) {
    (
        Arc::new(DistanceEngine::new(cfg.distance_budget_bits)),
        CodeTables::embedded(),
    )
}

fn note_best(best: &mut Option<BestCode>, trial: usize, env: &FusionEnv, completed: bool) {
    let sig = env.signature();
    if completed && best.as_ref().is_none_or(|b| sig.d > b.signature.d) {
        *best = Some(BestCode {
            trial,
            signature: sig,
            network: env.state().to_text(),
        });
    }
}

fn run_agent_simulation(
    cfg: &ExperimentConfig,
    simulation: usize,
    engine: Arc<DistanceEngine>,
    tables: Arc<CodeTables>,
) -> Result<SimulationRun, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(simulation as u64));
    let mut agent = Agent::new(cfg.seeds.len(), cfg.agent()?).map_err(|e| CliError::Config(e.to_string()))?;
    let mut env = FusionEnv::new(cfg.environment(), engine, tables)?;
    let mut trials = Vec::with_capacity(cfg.trials);
    let mut best = None;
    for trial in 0..cfg.trials {
        agent.end_trial();
        let mut out = env.reset();
        let mut steps = Vec::with_capacity(cfg.steps);
        let mut completed = true;
        while !out.done {
            let action = agent.select_action(&out.percept, &out.allowed, &mut rng);
            out = env.step(action)?;
            agent.update(out.reward as f64);
            completed &= out.failure.is_none();
            steps.push(StepRecord {
                simulation,
                trial,
                step: env.step_index(),
                action,
                signature: out.signature,
                reward: out.reward,
                done: out.done,
            });
        }
        note_best(&mut best, trial, &env, completed);
        trials.push(TrialRecord {
            trial,
            steps,
            final_signature: env.signature(),
            completed,
        });
    }
    let snapshot = agent
        .snapshot()
        .into_iter()
        .map(|(k, h)| (k.to_string(), h.to_vec()))
        .collect();
    Ok(SimulationRun {
        simulation,
        trials,
        snapshot,
        best,
    })
}

fn run_random_simulation(
    cfg: &ExperimentConfig,
    simulation: usize,
    engine: Arc<DistanceEngine>,
    tables: Arc<CodeTables>,
) -> Result<SimulationRun, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(simulation as u64));
    let mut env = FusionEnv::new(cfg.environment(), engine, tables)?;
    let trials = random_baseline(&mut env, simulation, cfg.trials, &mut rng)?;
    let mut best: Option<BestCode> = None;
    for t in &trials {
        if t.completed && best.as_ref().is_none_or(|b| t.final_signature.d > b.signature.d) {
            // Replay to recover the network text.
            let mut tn = cfg.environment().network();
            for s in &t.steps {
                tn = tn.apply(s.action).map_err(|e| CliError::Other(format!("replay failed: {e:?}")))?;
            }
            best = Some(BestCode {
                trial: t.trial,
                signature: t.final_signature,
                network: tn.to_text(),
            });
        }
    }
    Ok(SimulationRun {
        simulation,
        trials,
        snapshot: Vec::new(),
        best,
    })
}

fn run(cfg: &ExperimentConfig, kind: CampaignKind, engine: Option<Arc<DistanceEngine>>) -> Result<Campaign, CliError> {
    cfg.validate()?;
    let (default_engine, tables) = shared(cfg);
    let engine = engine.unwrap_or(default_engine);
    let runs = (0..cfg.simulations)
        .into_par_iter()
        .map(|i| match kind {
            CampaignKind::Rl => run_agent_simulation(cfg, i, engine.clone(), tables.clone()),
            CampaignKind::Random => run_random_simulation(cfg, i, engine.clone(), tables.clone()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Campaign {
        kind,
        config: cfg.clone(),
        runs,
    })
}

/// Agent campaign. Pass an engine to share its distance cache across runs.
pub fn run_rl(cfg: &ExperimentConfig, engine: Option<Arc<DistanceEngine>>) -> Result<Campaign, CliError> {
    run(cfg, CampaignKind::Rl, engine)
}

/// Uniform-random campaign with the same shape as [`run_rl`].
pub fn run_random(cfg: &ExperimentConfig, engine: Option<Arc<DistanceEngine>>) -> Result<Campaign, CliError> {
    run(cfg, CampaignKind::Random, engine)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryBestCode {
    pub simulation: usize,
    pub trial: usize,
    pub signature: [usize; 3],
    pub network: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: CampaignKind,
    pub simulations: usize,
    pub trials: usize,
    /// Mean over simulations of the distance at the end of each trial.
    pub per_trial_mean_distance: Vec<f64>,
    /// Fraction of simulations whose trial ended, completed, at the best known
    /// distance for its `(n, k)`.
    pub per_trial_optimal_frequency: Vec<f64>,
    /// `[n, k, d]` at the end of each trial, per simulation.
    pub final_signatures: Vec<Vec<[usize; 3]>>,
    pub final_completed: Vec<Vec<bool>>,
    pub best_codes: Vec<SummaryBestCode>,
}

fn sig3(s: Signature) -> [usize; 3] {
    [s.n, s.k, s.d]
}

pub fn summarize(c: &Campaign, tables: &CodeTables) -> Result<Summary, CliError> {
    let sims = c.runs.len();
    let trials = c.config.trials;
    let mut mean = vec![0.0; trials];
    let mut freq = vec![0.0; trials];
    for r in &c.runs {
        for t in &r.trials {
            let s = t.final_signature;
            mean[t.trial] += s.d as f64;
            if t.completed && s.d == tables.best_known_distance(s.n, s.k)? {
                freq[t.trial] += 1.0;
            }
        }
    }
    for v in mean.iter_mut().chain(freq.iter_mut()) {
        *v /= sims as f64;
    }
    Ok(Summary {
        kind: c.kind,
        simulations: sims,
        trials,
        per_trial_mean_distance: mean,
        per_trial_optimal_frequency: freq,
        final_signatures: c
            .runs
            .iter()
            .map(|r| r.trials.iter().map(|t| sig3(t.final_signature)).collect())
            .collect(),
        final_completed: c.runs.iter().map(|r| r.trials.iter().map(|t| t.completed).collect()).collect(),
        best_codes: c
            .runs
            .iter()
            .filter_map(|r| {
                r.best.as_ref().map(|b| SummaryBestCode {
                    simulation: r.simulation,
                    trial: b.trial,
                    signature: sig3(b.signature),
                    network: b.network.clone(),
                })
            })
            .collect(),
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(CliError::io(format!("writing {}", path.display())))
}

/// Writes per-simulation step logs, their ordered merge `steps.csv`, agent
/// snapshots, `summary.json` and `manifest.json` under `dir`.
pub fn write_campaign(c: &Campaign, summary: &Summary, dir: &Path, command: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    let mut merged = Vec::new();
    writeln!(merged, "{}", StepRecord::CSV_HEADER).expect("write to vec");
    for r in &c.runs {
        let mut buf = Vec::new();
        writeln!(buf, "{}", StepRecord::CSV_HEADER).expect("write to vec");
        for t in &r.trials {
            for s in &t.steps {
                writeln!(buf, "{}", s.to_csv_row()).expect("write to vec");
            }
        }
        write_file(&dir.join(format!("steps_sim{:03}.csv", r.simulation)), &buf)?;
        let body = buf.splitn(2, |&b| b == b'\n').nth(1).unwrap_or(&[]);
        merged.extend_from_slice(body);
        if c.kind == CampaignKind::Rl {
            let mut snap = Vec::new();
            for (key, h) in &r.snapshot {
                let vals: Vec<String> = h.iter().map(|v| v.to_string()).collect();
                writeln!(snap, "{key}\t{}", vals.join("\t")).expect("write to vec");
            }
            write_file(&dir.join(format!("agent_sim{:03}.tsv", r.simulation)), &snap)?;
        }
    }
    write_file(&dir.join("steps.csv"), &merged)?;
    let json = serde_json::to_vec_pretty(summary).map_err(|e| CliError::Other(e.to_string()))?;
    write_file(&dir.join("summary.json"), &json)?;
    write_manifest(dir, command, &c.config, serde_json::json!({}))
}
