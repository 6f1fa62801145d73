use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use tnfuse::codes::StabilizerCode;
use tnfuse::distance::{distance_oracle, DistanceEngine};
use tnfuse::environment::{CodeTables, Signature};
use tnfuse::search::{brute_force, BruteForceOptions, Enumeration, ResumeToken, SearchError};
use tnfuse::tncode::TensorNetworkCode;
use tnfuse_cli::campaign::{run_random, run_rl, summarize, write_campaign, Summary};
use tnfuse_cli::config::parse_seeds;
use tnfuse_cli::report::{
    best_histograms_csv, brute_force_report, compare, compare_csv, fuse_scan, write_manifest, ScanOutcome,
};
use tnfuse_cli::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "tnfuse", version, about = "Search for high-distance stabilizer codes by fusing tensor-network seeds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key (repeatable), e.g. --set steps=5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct CodeSource {
    /// Catalog seed name
    #[arg(long, conflicts_with_all = ["code", "network"])]
    seed: Option<String>,
    /// Code file (stabilizers and logicals)
    #[arg(long, conflicts_with = "network")]
    code: Option<PathBuf>,
    /// Network file (code plus node assignment)
    #[arg(long)]
    network: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an agent campaign and write step logs, summary and manifest
    RunRl(ConfigArgs),
    /// Run uniformly random fusion sequences with the same log format
    RandomBaseline(ConfigArgs),
    /// Exhaustively search all fusion sequences of the configured length
    BruteForce {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "multiset")]
        enumeration: Enumeration,
        #[arg(long)]
        no_memo: bool,
        #[arg(long)]
        no_histograms: bool,
        /// Stop after this many search nodes and print a resume token
        #[arg(long)]
        max_nodes: Option<u64>,
        #[arg(long)]
        resume: Option<ResumeToken>,
    },
    /// Print the signature of a code
    Distance {
        #[command(flatten)]
        source: CodeSource,
        /// Cross-check against the increasing-weight search
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = tnfuse::distance::DEFAULT_BUDGET_BITS)]
        budget: u32,
    },
    /// Fuse every cross-node leg pair of a seed list and report the results
    FuseDemo {
        #[arg(long, default_value = "five_qubit, five_qubit")]
        seeds: String,
    },
    /// Stabilizer and logical weight histograms as CSV
    Histogram {
        #[command(flatten)]
        source: CodeSource,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = tnfuse::distance::DEFAULT_BUDGET_BITS)]
        budget: u32,
    },
    /// Join a campaign summary with the random-search success probability
    Compare {
        #[arg(long)]
        summary: PathBuf,
        /// Brute-force report supplying the optimal and total sequence counts
        #[arg(long)]
        report: Option<PathBuf>,
        /// Target signature n,k,d (defaults to the report's best signature)
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        n_opt: Option<u128>,
        #[arg(long)]
        total: Option<u128>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    }
    fs::write(path, contents).map_err(CliError::io(format!("writing {}", path.display())))
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::parse(&read(p)?)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_overrides(&args.overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn load_code(src: &CodeSource) -> Result<StabilizerCode, CliError> {
    match (&src.seed, &src.code, &src.network) {
        (Some(name), _, _) => Ok(tnfuse::codes::seed(name)?),
        (_, Some(p), _) => StabilizerCode::from_text(&read(p)?).map_err(|e| CliError::Config(e.to_string())),
        (_, _, Some(p)) => Ok(TensorNetworkCode::from_text(&read(p)?)?.code().clone()),
        _ => Err(CliError::Config("give one of --seed, --code or --network".into())),
    }
}

fn print_summary(s: &Summary) {
    let last = s.trials - 1;
    println!(
        "{} simulations x {} trials: final mean distance {:.3}, final optimal frequency {:.3}",
        s.simulations, s.trials, s.per_trial_mean_distance[last], s.per_trial_optimal_frequency[last]
    );
    for b in &s.best_codes {
        println!(
            "  simulation {}: best [[{}, {}, {}]] first at trial {}",
            b.simulation, b.signature[0], b.signature[1], b.signature[2], b.trial
        );
    }
}

fn campaign(args: &ConfigArgs, rl: bool) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let c = if rl { run_rl(&cfg, None)? } else { run_random(&cfg, None)? };
    let s = summarize(&c, &CodeTables::embedded())?;
    write_campaign(&c, &s, &cfg.output_dir, if rl { "run-rl" } else { "random-baseline" })?;
    print_summary(&s);
    println!("logs written to {}", cfg.output_dir.display());
    Ok(())
}

fn parse_signature(s: &str) -> Result<Signature, CliError> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("target {s:?}: {e}")))?;
    match v[..] {
        [n, k, d] => Ok(Signature { n, k, d }),
        _ => Err(CliError::Config(format!("target {s:?} must be n,k,d"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RunRl(args) => campaign(&args, true),
        Command::RandomBaseline(args) => campaign(&args, false),
        Command::BruteForce {
            cfg,
            enumeration,
            no_memo,
            no_histograms,
            max_nodes,
            resume,
        } => {
            let cfg = load_config(&cfg)?;
            let engine = DistanceEngine::new(cfg.distance_budget_bits);
            let opts = BruteForceOptions {
                enumeration,
                memoize: !no_memo,
                histograms: !no_histograms,
                max_nodes,
                resume,
            };
            let start = Instant::now();
            let outcome = brute_force(&cfg.environment(), &engine, &opts);
            let wall = start.elapsed();
            let (result, partial) = match outcome {
                Ok(r) => (r, None),
                Err(SearchError::Budget(p)) => (p.result.clone(), Some(p)),
                Err(e) => return Err(e.into()),
            };
            let report = brute_force_report(&cfg, &result, wall, partial.as_deref());
            let dir = &cfg.output_dir;
            write(&dir.join("report.json"), serde_json::to_vec_pretty(&report).expect("json"))?;
            write(&dir.join("best_histograms.csv"), best_histograms_csv(&result))?;
            write_manifest(dir, "brute-force", &cfg, json!({"enumeration": enumeration.to_string()}))?;
            match result.best_signature {
                Some(s) => println!(
                    "best {s}: {} optimal of {} sequences ({} distinct codes)",
                    result.optimal_sequence_count,
                    result.total_sequences,
                    result.best.len()
                ),
                None => println!("no fusion sequence of length {} succeeds", cfg.steps),
            }
            if let Some(p) = partial {
                println!("stopped early; resume with --resume {}", p.resume);
                return Err(CliError::Budget(format!("node budget reached; resume with {}", p.resume)));
            }
            Ok(())
        }
        Command::Distance { source, oracle, budget } => {
            let code = load_code(&source)?;
            let d = DistanceEngine::new(budget).distance(&code)?;
            println!("[[{}, {}, {}]]", code.n(), code.k(), d);
            if oracle {
                let o = distance_oracle(&code)?;
                println!("oracle: {o}");
                if o != d {
                    return Err(CliError::Other(format!("distance {d} disagrees with oracle {o}")));
                }
            }
            Ok(())
        }
        Command::FuseDemo { seeds } => {
            let seeds = parse_seeds(&seeds)?;
            let rows = fuse_scan(&seeds, &DistanceEngine::default())?;
            println!("qa,qb,result");
            for r in rows {
                match r.outcome {
                    ScanOutcome::Code { signature, verified } => {
                        println!("{},{},{signature}{}", r.qa, r.qb, if verified { "" } else { " (unverified)" })
                    }
                    ScanOutcome::Failed(why) => println!("{},{},{why}", r.qa, r.qb),
                }
            }
            Ok(())
        }
        Command::Histogram { source, out, budget } => {
            let code = load_code(&source)?;
            let csv = DistanceEngine::new(budget).histograms(&code)?.to_csv();
            match out {
                Some(p) => write(&p, csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::Compare {
            summary,
            report,
            target,
            n_opt,
            total,
            out,
        } => {
            let summary: Summary =
                serde_json::from_str(&read(&summary)?).map_err(|e| CliError::Config(format!("summary: {e}")))?;
            let report: Option<Value> = match report {
                Some(p) => Some(serde_json::from_str(&read(&p)?).map_err(|e| CliError::Config(format!("report: {e}")))?),
                None => None,
            };
            let from_report = |field: &str| -> Option<u128> {
                report.as_ref()?.get(field)?.as_str()?.parse().ok()
            };
            let n_opt = n_opt
                .or_else(|| from_report("optimal_sequence_count"))
                .ok_or_else(|| CliError::Config("need --n-opt or a brute-force --report".into()))?;
            let total = total
                .or_else(|| from_report("total_sequences"))
                .ok_or_else(|| CliError::Config("need --total or a brute-force --report".into()))?;
            let target = match target {
                Some(t) => parse_signature(&t)?,
                None => {
                    let v = report
                        .as_ref()
                        .and_then(|r| r.get("best_signature"))
                        .and_then(|v| serde_json::from_value::<[usize; 3]>(v.clone()).ok())
                        .ok_or_else(|| CliError::Config("need --target or a report with a best signature".into()))?;
                    Signature { n: v[0], k: v[1], d: v[2] }
                }
            };
            if total == 0 || n_opt > total {
                return Err(CliError::Config(format!("need 0 <= n_opt ({n_opt}) <= total ({total}), total >= 1")));
            }
            let csv = compare_csv(&compare(&summary, target, n_opt, total));
            match out {
                Some(p) => write(&p, csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tnfuse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
