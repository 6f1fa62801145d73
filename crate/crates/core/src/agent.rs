//! Projective-simulation agent: a two-layer percept → action network with
//! h-values (learned weights) and glow values (per-trial credit assignment).
//!
//! Each time step: [`ProjectiveAgent::select_action`] samples an allowed
//! action from a softmax over the percept's h row and sets that edge's glow to
//! 1; [`ProjectiveAgent::update`] then applies
//!
//! ```text
//! h <- h + reward * g + gamma * (1 - h)
//! g <- (1 - eta) * g
//! ```

use std::collections::HashMap;

use num_traits::Float;
use rand::Rng;
use thiserror::Error;

use crate::environment::PerceptKey;
use crate::tncode::Action;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("beta must be positive and finite, got {0}")]
    Beta(f64),
    #[error("eta must lie in [0, 1], got {0}")]
    Eta(f64),
    #[error("gamma must lie in [0, 1], got {0}")]
    Gamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig<F = f64> {
    pub beta: F,
    pub eta: F,
    pub gamma: F,
}

impl<F: Float> AgentConfig<F> {
    pub fn new(beta: F, eta: F, gamma: F) -> Result<Self, AgentError> {
        let cfg = Self { beta, eta, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let f = |x: F| x.to_f64().unwrap_or(f64::NAN);
        if !(self.beta > F::zero() && self.beta.is_finite()) {
            return Err(AgentError::Beta(f(self.beta)));
        }
        if !(self.eta >= F::zero() && self.eta <= F::one()) {
            return Err(AgentError::Eta(f(self.eta)));
        }
        if !(self.gamma >= F::zero() && self.gamma <= F::one()) {
            return Err(AgentError::Gamma(f(self.gamma)));
        }
        Ok(())
    }
}

/// Softmax of `beta * row[a]` restricted to the indices in `allowed`,
/// returned in the order of `allowed`.
pub fn softmax<F: Float>(beta: F, row: &[F], allowed: &[usize]) -> Vec<F> {
    let max = allowed.iter().map(|&a| row[a]).fold(F::neg_infinity(), F::max);
    let w: Vec<F> = allowed.iter().map(|&a| (beta * (row[a] - max)).exp()).collect();
    let total = w.iter().fold(F::zero(), |acc, &x| acc + x);
    w.into_iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone)]
pub struct ProjectiveAgent<F = f64> {
    cfg: AgentConfig<F>,
    node_count: usize,
    action_count: usize,
    percepts: HashMap<PerceptKey, usize>,
    keys: Vec<PerceptKey>,
    h: Vec<F>,
    g: Vec<F>,
    // Flat indices of nonzero glow entries.
    glowing: Vec<usize>,
}

impl<F: Float> ProjectiveAgent<F> {
    pub fn new(node_count: usize, cfg: AgentConfig<F>) -> Result<Self, AgentError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            node_count,
            action_count: Action::count(node_count),
            percepts: HashMap::new(),
            keys: Vec::new(),
            h: Vec::new(),
            g: Vec::new(),
            glowing: Vec::new(),
        })
    }

    pub fn config(&self) -> &AgentConfig<F> {
        &self.cfg
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn percept_count(&self) -> usize {
        self.keys.len()
    }

    fn row(&mut self, key: &PerceptKey) -> usize {
        if let Some(&r) = self.percepts.get(key) {
            return r;
        }
        let r = self.keys.len();
        self.percepts.insert(key.clone(), r);
        self.keys.push(key.clone());
        self.h.extend(std::iter::repeat_n(F::one(), self.action_count));
        self.g.extend(std::iter::repeat_n(F::zero(), self.action_count));
        r
    }

    pub fn h_row(&self, key: &PerceptKey) -> Option<&[F]> {
        let r = *self.percepts.get(key)?;
        Some(&self.h[r * self.action_count..(r + 1) * self.action_count])
    }

    pub fn g_row(&self, key: &PerceptKey) -> Option<&[F]> {
        let r = *self.percepts.get(key)?;
        Some(&self.g[r * self.action_count..(r + 1) * self.action_count])
    }

    pub fn h_value(&self, key: &PerceptKey, a: Action) -> Option<F> {
        self.h_row(key).map(|row| row[a.index(self.node_count())])
    }

    pub fn g_value(&self, key: &PerceptKey, a: Action) -> Option<F> {
        self.g_row(key).map(|row| row[a.index(self.node_count())])
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Selection probabilities for `allowed`, in the same order. Unknown
    /// percepts behave like a fresh row.
    pub fn probabilities(&self, key: &PerceptKey, allowed: &[Action]) -> Vec<F> {
        let n = self.node_count();
        let idx: Vec<usize> = allowed.iter().map(|a| a.index(n)).collect();
        match self.h_row(key) {
            Some(row) => softmax(self.cfg.beta, row, &idx),
            None => {
                let fresh = vec![F::one(); self.action_count];
                softmax(self.cfg.beta, &fresh, &idx)
            }
        }
    }

    /// Samples an allowed action and marks its edge with glow 1.
    ///
    /// # Panics
    /// If `allowed` is empty.
    pub fn select_action<R: Rng + ?Sized>(&mut self, key: &PerceptKey, allowed: &[Action], rng: &mut R) -> Action {
        assert!(!allowed.is_empty(), "select_action needs at least one allowed action");
        self.row(key);
        let p = self.probabilities(key, allowed);
        let u = F::from(rng.gen::<f64>()).expect("uniform draw representable");
        let mut acc = F::zero();
        let mut chosen = allowed[allowed.len() - 1];
        for (&a, &pa) in allowed.iter().zip(&p) {
            acc = acc + pa;
            if u < acc {
                chosen = a;
                break;
            }
        }
        self.record_step(key, chosen);
        chosen
    }

    /// Sets the glow of edge (key, a) to 1.
    pub fn record_step(&mut self, key: &PerceptKey, a: Action) {
        let r = self.row(key);
        let i = r * self.action_count + a.index(self.node_count());
        if self.g[i] == F::zero() {
            self.glowing.push(i);
        }
        self.g[i] = F::one();
    }

    pub fn update(&mut self, reward: F) {
        let AgentConfig { eta, gamma, .. } = self.cfg;
        let step = |h: F, g: F| h + reward * g + gamma * (F::one() - h);
        if gamma != F::zero() {
            for (h, &g) in self.h.iter_mut().zip(&self.g) {
                *h = step(*h, g);
            }
        } else {
            // With no damping only glowing edges can move.
            for &i in &self.glowing {
                self.h[i] = step(self.h[i], self.g[i]);
            }
        }
        let keep = F::one() - eta;
        let g = &mut self.g;
        self.glowing.retain(|&i| {
            g[i] = keep * g[i];
            g[i] != F::zero()
        });
    }

    pub fn end_trial(&mut self) {
        for &i in &self.glowing {
            self.g[i] = F::zero();
        }
        self.glowing.clear();
    }

    /// (percept, h row) pairs in discovery order.
    pub fn snapshot(&self) -> Vec<(&PerceptKey, &[F])> {
        self.keys
            .iter()
            .enumerate()
            .map(|(r, k)| (k, &self.h[r * self.action_count..(r + 1) * self.action_count]))
            .collect()
    }

    pub fn h_matrix(&self) -> &[F] {
        &self.h
    }

    pub fn g_matrix(&self) -> &[F] {
        &self.g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn key(s: &str) -> PerceptKey {
        // Percept keys are opaque; any distinct codes give distinct keys.
        let code = crate::codes::seed(s).unwrap();
        crate::environment::percept_key(&code)
    }

    fn all(nodes: usize) -> Vec<Action> {
        Action::all(nodes).collect()
    }

    fn agent(nodes: usize, beta: f64, eta: f64, gamma: f64) -> ProjectiveAgent<f64> {
        ProjectiveAgent::new(nodes, AgentConfig::new(beta, eta, gamma).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert_eq!(AgentConfig::new(0.0, 0.1, 0.0), Err(AgentError::Beta(0.0)));
        assert_eq!(AgentConfig::new(1.0, 1.5, 0.0), Err(AgentError::Eta(1.5)));
        assert_eq!(AgentConfig::new(1.0, 0.5, -0.1), Err(AgentError::Gamma(-0.1)));
        assert!(AgentConfig::new(f64::INFINITY, 0.5, 0.0).is_err());
        assert!(AgentConfig::new(0.5f32, 1.0, 0.0).is_ok());
    }

    #[test]
    fn fresh_row_is_uniform() {
        let a = agent(4, 1.0, 0.05, 0.0);
        let allowed = all(4);
        assert_eq!(allowed.len(), 10);
        for p in a.probabilities(&key("five_qubit"), &allowed) {
            assert!((p - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_arithmetic() {
        let e = std::f64::consts::E;
        let p = softmax(1.0, &[2.0, 1.0, 1.0], &[0, 1, 2]);
        let z = e * e + 2.0 * e;
        let want = [e * e / z, e / z, e / z];
        for (x, y) in p.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(softmax(1.0, &[5.0, 1.0], &[0]), vec![1.0]);
    }

    #[test]
    fn update_examples() {
        let k = key("five_qubit");
        let a0 = Action::new(0, 0);

        let mut a = agent(2, 1.0, 0.0, 0.0);
        a.record_step(&k, a0);
        a.update(2.0);
        assert!((a.h_value(&k, a0).unwrap() - 3.0).abs() < 1e-12);

        // Damping pulls every entry toward 1, glowing or not.
        let mut a = agent(2, 1.0, 0.0, 0.0);
        a.record_step(&k, a0);
        a.update(1.0);
        assert_eq!(a.h_value(&k, a0), Some(2.0));
        a.cfg.gamma = 0.1;
        a.end_trial();
        a.record_step(&k, Action::new(1, 1));
        a.update(0.0);
        assert!((a.h_value(&k, a0).unwrap() - 1.9).abs() < 1e-12);

        let mut a = agent(2, 1.0, 0.05, 0.0);
        a.record_step(&k, a0);
        a.update(0.0);
        assert!((a.g_value(&k, a0).unwrap() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn glow_decay_across_steps() {
        let (k1, k2) = (key("five_qubit"), key("four_two_two"));
        let (e1, e2) = (Action::new(0, 1), Action::new(1, 2));

        let mut a = agent(3, 1.0, 0.05, 0.0);
        a.record_step(&k1, e1);
        let lit: Vec<_> = a.g_matrix().iter().filter(|&&g| g != 0.0).collect();
        assert_eq!(lit, vec![&1.0]);
        a.update(0.0);
        a.record_step(&k2, e2);
        assert!((a.g_value(&k1, e1).unwrap() - 0.95).abs() < 1e-12);
        assert_eq!(a.g_value(&k2, e2), Some(1.0));

        let mut a = agent(3, 1.0, 1.0, 0.0);
        a.record_step(&k1, e1);
        a.update(0.0);
        a.record_step(&k2, e2);
        a.update(1.0);
        assert_eq!(a.g_value(&k1, e1), Some(0.0));
        assert_eq!(a.h_value(&k1, e1), Some(1.0));
    }

    #[test]
    fn end_trial_clears_glow_keeps_h() {
        let k = key("five_qubit");
        let mut a = agent(3, 1.0, 0.05, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            a.select_action(&k, &all(3), &mut rng);
            a.update(1.0);
        }
        let h = a.h_matrix().to_vec();
        a.end_trial();
        assert!(a.g_matrix().iter().all(|&g| g == 0.0));
        assert_eq!(a.h_matrix(), &h[..]);
        assert_eq!(a.percept_count(), 1);
    }

    #[test]
    fn end_trial_on_fresh_agent_is_noop() {
        let k = key("five_qubit");
        let run = |clear: bool| {
            let mut a = agent(3, 1.0, 0.05, 0.0);
            if clear {
                a.end_trial();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let picks: Vec<_> = (0..20).map(|_| a.select_action(&k, &all(3), &mut rng)).collect();
            picks
        };
        assert_eq!(run(false), run(true));
    }

    #[test]
    fn zero_reward_no_damping_is_fixed_point() {
        let mut a = agent(3, 2.0, 0.3, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in ["five_qubit", "four_two_two", "six_qubit_state"] {
            a.select_action(&key(s), &all(3), &mut rng);
            a.update(0.0);
        }
        assert!(a.h_matrix().iter().all(|&h| h == 1.0));
    }

    #[test]
    fn sparse_and_dense_updates_agree() {
        // gamma = 0 takes the sparse path; compare with the formula applied to
        // every entry.
        let ks = [key("five_qubit"), key("four_two_two")];
        let mut a = agent(3, 1.0, 0.2, 0.0);
        let mut h = [1.0f64; 2 * 6];
        let mut g = [0.0f64; 2 * 6];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in 0..40 {
            let r = t % 2;
            let act = a.select_action(&ks[r], &all(3), &mut rng);
            g[r * 6 + act.index(3)] = 1.0;
            let reward = (t % 5) as f64 - 2.0;
            for i in 0..h.len() {
                h[i] = h[i] + reward * g[i] + 0.0 * (1.0 - h[i]);
                g[i] *= 1.0 - 0.2;
            }
            a.update(reward);
            if t % 7 == 6 {
                a.end_trial();
                g.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        assert_eq!(a.h_matrix(), &h[..]);
        assert_eq!(a.g_matrix(), &g[..]);
    }

    #[test]
    fn replay_is_bit_identical() {
        let ks = [key("five_qubit"), key("four_two_two"), key("ten_one_four")];
        let run = || {
            let mut a = agent(4, 1.0, 0.05, 0.01);
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let mut picks = Vec::new();
            for t in 0..200 {
                let allowed: Vec<Action> = all(4).into_iter().filter(|x| x.index(4) % 3 != t % 3).collect();
                picks.push(a.select_action(&ks[t % 3], &allowed, &mut rng));
                a.update(if t % 4 == 0 { 1.0 } else { -0.5 });
                if t % 10 == 9 {
                    a.end_trial();
                }
            }
            (picks, a.h_matrix().to_vec(), a.g_matrix().to_vec())
        };
        let (p1, h1, g1) = run();
        let (p2, h2, g2) = run();
        assert_eq!(p1, p2);
        assert!(h1.iter().zip(&h2).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(g1.iter().zip(&g2).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn learned_preference_dominates_sampling() {
        let k = key("five_qubit");
        let mut a = agent(2, 1.0, 0.0, 0.0);
        let fav = Action::new(0, 1);
        for _ in 0..20 {
            a.record_step(&k, fav);
            a.update(1.0);
            a.end_trial();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hits = (0..1000).filter(|_| a.select_action(&k, &all(2), &mut rng) == fav).count();
        assert!(hits > 990);
        let only = [Action::new(1, 1)];
        assert_eq!(a.select_action(&k, &only, &mut rng), only[0]);
    }

    #[test]
    fn works_in_single_precision() {
        let k = key("five_qubit");
        let mut a = ProjectiveAgent::<f32>::new(2, AgentConfig::new(1.0f32, 0.05, 0.0).unwrap()).unwrap();
        a.record_step(&k, Action::new(0, 0));
        a.update(2.0);
        assert_eq!(a.h_value(&k, Action::new(0, 0)), Some(3.0f32));
        let p = a.probabilities(&k, &all(2));
        assert!((p.iter().sum::<f32>() - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one_and_is_shift_invariant(
            row in prop::collection::vec(-50.0f64..50.0, 1..30),
            mask in any::<u32>(),
            beta in 0.01f64..5.0,
            c in -100.0f64..100.0,
        ) {
            let mut allowed: Vec<usize> = (0..row.len()).filter(|i| mask >> (i % 32) & 1 == 1).collect();
            if allowed.is_empty() {
                allowed.push(0);
            }
            let p = softmax(beta, &row, &allowed);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let shifted: Vec<f64> = row.iter().map(|x| x + c).collect();
            let q = softmax(beta, &shifted, &allowed);
            for (x, y) in p.iter().zip(&q) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
