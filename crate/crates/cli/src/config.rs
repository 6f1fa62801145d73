//! Experiment configuration: flat `key = value` files plus command-line
//! overrides of the same form.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::Serialize;
use tnfuse::codes::Seed;
use tnfuse::distance::DEFAULT_BUDGET_BITS;
use tnfuse::environment::EnvironmentConfig;
use tnfuse::AgentConfig;

use crate::CliError;

pub const KEYS: [&str; 10] = [
    "seeds",
    "steps",
    "trials",
    "simulations",
    "beta",
    "eta",
    "gamma",
    "rng_seed",
    "output_dir",
    "distance_budget_bits",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(serialize_with = "seed_names")]
    pub seeds: Vec<Seed>,
    pub steps: usize,
    pub trials: usize,
    pub simulations: usize,
    pub beta: f64,
    pub eta: f64,
    pub gamma: f64,
    pub rng_seed: u64,
    pub output_dir: PathBuf,
    pub distance_budget_bits: u32,
}

fn seed_names<S: serde::Serializer>(seeds: &[Seed], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(seeds.iter().map(|x| x.name()))
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seeds: Vec::new(),
            steps: 0,
            trials: 1000,
            simulations: 20,
            beta: 1.0,
            eta: 0.05,
            gamma: 0.0,
            rng_seed: 0,
            output_dir: PathBuf::from("runs"),
            distance_budget_bits: DEFAULT_BUDGET_BITS,
        }
    }
}

/// `five_qubit, six_qubit_state*3` → one five-qubit seed and three copies of
/// the six-qubit state.
pub fn parse_seeds(v: &str) -> Result<Vec<Seed>, CliError> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, count) = match item.split_once('*') {
            Some((name, c)) => {
                let c = c
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::Config(format!("seed repeat count in {item:?}: {e}")))?;
                (name.trim(), c)
            }
            None => (item, 1),
        };
        let seed: Seed = name.parse().map_err(|e: tnfuse::codes::CodeError| CliError::Config(e.to_string()))?;
        out.extend(std::iter::repeat_n(seed, count));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| CliError::Config(format!("{key} = {v:?}: {e}")))
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "seeds" => self.seeds = parse_seeds(v)?,
            "steps" => self.steps = parse_num(key, v)?,
            "trials" => self.trials = parse_num(key, v)?,
            "simulations" => self.simulations = parse_num(key, v)?,
            "beta" => self.beta = parse_num(key, v)?,
            "eta" => self.eta = parse_num(key, v)?,
            "gamma" => self.gamma = parse_num(key, v)?,
            "rng_seed" => self.rng_seed = parse_num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "distance_budget_bits" => self.distance_budget_bits = parse_num(key, v)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key {key:?} (expected one of {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment. A key may appear
    /// once per text.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(CliError::Config(format!("line {}: duplicate key {k:?}", i + 1)));
            }
            self.set(k, v).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), CliError> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override {o:?} is not key=value")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.seeds.is_empty() {
            return bad("seeds must name at least one seed code");
        }
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.simulations == 0 {
            return bad("simulations must be at least 1");
        }
        if self.distance_budget_bits == 0 || self.distance_budget_bits > 64 {
            return bad("distance_budget_bits must lie in 1..=64");
        }
        self.agent().map(|_| ())
    }

    pub fn agent(&self) -> Result<AgentConfig, CliError> {
        AgentConfig::new(self.beta, self.eta, self.gamma).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn environment(&self) -> EnvironmentConfig {
        EnvironmentConfig {
            seeds: self.seeds.clone(),
            steps: self.steps,
            rng_seed: self.rng_seed,
        }
    }

    /// Resolved config in file syntax.
    pub fn to_text(&self) -> String {
        let seeds: Vec<&str> = self.seeds.iter().map(|s| s.name()).collect();
        format!(
            "seeds = {}\nsteps = {}\ntrials = {}\nsimulations = {}\nbeta = {}\neta = {}\ngamma = {}\nrng_seed = {}\noutput_dir = {}\ndistance_budget_bits = {}\n",
            seeds.join(", "),
            self.steps,
            self.trials,
            self.simulations,
            self.beta,
            self.eta,
            self.gamma,
            self.rng_seed,
            self.output_dir.display(),
            self.distance_budget_bits
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!((c.trials, c.simulations, c.distance_budget_bits), (1000, 20, 30));
        assert_eq!((c.beta, c.eta, c.gamma), (1.0, 0.05, 0.0));
    }

    #[test]
    fn parse_file() {
        let c = ExperimentConfig::parse(
            "# table two\nseeds = five_qubit, six_qubit_state*3\nsteps = 5\ntrials=10 # short\nbeta = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.seeds.len(), 4);
        assert_eq!(c.seeds[3], Seed::SixQubitState);
        assert_eq!((c.steps, c.trials, c.beta), (5, 10, 0.5));
        assert_eq!(c.simulations, 20);
        c.validate().unwrap();
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "seeds = five_qubit\nsteps = 2\ncolour = red\n",
            "seeds = five_qubit\nsteps = 2\nsteps = 3\n",
            "seeds = seven_qubit\n",
            "steps = two\n",
            "just words\n",
            "seeds = five_qubit*x\n",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(CliError::Config(_))), "{text:?}");
        }
        let mut c = ExperimentConfig::parse("seeds = five_qubit\nsteps = 2\n").unwrap();
        c.validate().unwrap();
        for (k, v) in [("steps", "0"), ("trials", "0"), ("simulations", "0"), ("beta", "0"), ("eta", "2")] {
            let mut d = c.clone();
            d.set(k, v).unwrap();
            assert!(matches!(d.validate(), Err(CliError::Config(_))), "{k}");
        }
        c.apply_overrides(&["trials=7"]).unwrap();
        assert_eq!(c.trials, 7);
        assert!(c.apply_overrides(&["trials"]).is_err());
        assert!(matches!(ExperimentConfig::default().validate(), Err(CliError::Config(_))));
    }
}
