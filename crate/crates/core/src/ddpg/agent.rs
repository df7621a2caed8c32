use super::buffer::{ReplayBuffer, Transition};
use super::DdpgError;
use crate::nn::{adam_step, soft_update, Activation, AdamState, Gradients, Mlp};
use crate::rng::Rng;

/// Training hyperparameters. Defaults are the production configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DdpgConfig {
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub warmup_steps: usize,
    pub noise_sigma: f64,
    pub updates_per_step: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden: (usize, usize),
    pub seed: u64,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        DdpgConfig {
            gamma: 0.99,
            tau: 0.005,
            batch_size: 64,
            buffer_capacity: 100_000,
            warmup_steps: 1000,
            noise_sigma: 0.1,
            updates_per_step: 1,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            hidden: (64, 64),
            seed: 0,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<(), DdpgError> {
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(DdpgError::Parameter(format!("gamma must be in [0, 1), got {}", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(DdpgError::Parameter(format!("tau must be in (0, 1], got {}", self.tau)));
        }
        if self.batch_size == 0 || self.batch_size > self.buffer_capacity {
            return Err(DdpgError::Parameter(format!(
                "batch size {} must be in [1, buffer capacity {}]",
                self.batch_size, self.buffer_capacity
            )));
        }
        if self.updates_per_step == 0 {
            return Err(DdpgError::Parameter("updates_per_step must be >= 1".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(DdpgError::Parameter(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err(DdpgError::Parameter("learning rates must be > 0".into()));
        }
        if self.hidden.0 == 0 || self.hidden.1 == 0 {
            return Err(DdpgError::Parameter("hidden layer sizes must be > 0".into()));
        }
        Ok(())
    }
}

fn reinit_final_layer(mlp: &mut Mlp, rng: &mut Rng, bound: f64) {
    let (weights, biases) = mlp.params_mut();
    let last = weights.len() - 1;
    for v in weights[last].iter_mut() {
        *v = rng.uniform(-bound, bound);
    }
    for v in biases[last].iter_mut() {
        *v = rng.uniform(-bound, bound);
    }
}

/// The four networks, their optimizers, the replay buffer and the
/// exploration rng. Targets start as exact copies of the live networks.
pub struct Agent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub actor_opt: AdamState,
    pub critic_opt: AdamState,
    pub buffer: ReplayBuffer,
    pub cfg: DdpgConfig,
    rng: Rng,
    obs_dim: usize,
    act_dim: usize,
}

impl Agent {
    pub fn new(obs_dim: usize, act_dim: usize, cfg: DdpgConfig) -> Result<Self, DdpgError> {
        cfg.validate()?;
        if obs_dim == 0 || act_dim == 0 {
            return Err(DdpgError::Parameter("observation and action must be non-empty".into()));
        }
        let mut rng = Rng::new(cfg.seed);
        let (h1, h2) = cfg.hidden;
        let mut actor = Mlp::new(&[obs_dim, h1, h2, act_dim], Activation::Tanh, rng.next_u64())?;
        let mut critic =
            Mlp::new(&[obs_dim + act_dim, h1, h2, 1], Activation::Identity, rng.next_u64())?;
        // Final layers start near zero so the initial policy is quiet and
        // early Q estimates are small.
        reinit_final_layer(&mut actor, &mut rng, 3e-3);
        reinit_final_layer(&mut critic, &mut rng, 3e-3);
        let target_actor = actor.clone();
        let target_critic = critic.clone();
        let actor_opt = AdamState::new(&actor, cfg.actor_lr);
        let critic_opt = AdamState::new(&critic, cfg.critic_lr);
        let buffer = ReplayBuffer::new(cfg.buffer_capacity);
        Ok(Agent {
            actor,
            critic,
            target_actor,
            target_critic,
            actor_opt,
            critic_opt,
            buffer,
            cfg,
            rng,
            obs_dim,
            act_dim,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn rng_state(&self) -> [u64; 4] {
        self.rng.state()
    }

    pub fn set_rng_state(&mut self, s: [u64; 4]) {
        self.rng = Rng::from_state(s);
    }

    /// Uniform minibatch drawn with the agent's own rng. Enforces a full
    /// batch: training never updates from a thinner buffer.
    pub fn sample_batch(&mut self) -> Result<Vec<Transition>, DdpgError> {
        if self.buffer.len() < self.cfg.batch_size {
            return Err(DdpgError::NotReady(format!(
                "buffer holds {} transitions, batch needs {}",
                self.buffer.len(),
                self.cfg.batch_size
            )));
        }
        self.buffer.sample(self.cfg.batch_size, &mut self.rng)
    }

    /// Policy output, optionally with Gaussian exploration noise, clamped
    /// to the unit box.
    pub fn act(&mut self, obs: &[f64], explore: bool) -> Result<Vec<f64>, DdpgError> {
        let mut a = self.actor.forward(obs)?;
        if explore && self.cfg.noise_sigma > 0.0 {
            for v in &mut a {
                *v += self.cfg.noise_sigma * self.rng.normal();
            }
        }
        for v in &mut a {
            *v = v.clamp(-1.0, 1.0);
        }
        Ok(a)
    }

    fn critic_input(&self, s: &[f64], a: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.obs_dim + self.act_dim);
        x.extend_from_slice(s);
        x.extend_from_slice(a);
        x
    }

    /// Bellman targets `y_i = r_i + gamma * (1 - done_i) * Q'(s', mu'(s'))`.
    /// Terminal transitions truncate the bootstrap entirely.
    pub fn critic_targets(&self, batch: &[Transition]) -> Result<Vec<f64>, DdpgError> {
        let mut y = Vec::with_capacity(batch.len());
        for t in batch {
            let bootstrap = if t.done {
                0.0
            } else {
                let mut a_next = self.target_actor.forward(&t.s_next)?;
                for v in &mut a_next {
                    *v = v.clamp(-1.0, 1.0);
                }
                let q = self.target_critic.forward(&self.critic_input(&t.s_next, &a_next))?[0];
                self.cfg.gamma * q
            };
            y.push(t.r + bootstrap);
        }
        Ok(y)
    }

    /// One Adam step on the critic, descending the mean squared TD error.
    /// Returns the pre-step loss.
    pub fn update_critic(&mut self, batch: &[Transition]) -> Result<f64, DdpgError> {
        if batch.is_empty() {
            return Err(DdpgError::Parameter("empty minibatch".into()));
        }
        let y = self.critic_targets(batch)?;
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let mut grads = Gradients::zeros_like(&self.critic);
        for (t, y_i) in batch.iter().zip(y.iter()) {
            let x = self.critic_input(&t.s, &t.a);
            let q = self.critic.forward(&x)?[0];
            let err = q - y_i;
            loss += err * err / n;
            let (g, _) = self.critic.backward(&x, &[2.0 * err / n])?;
            grads.add_scaled(&g, 1.0);
        }
        if !loss.is_finite() || !grads.is_finite() {
            return Err(DdpgError::Training(format!("non-finite critic loss {loss}")));
        }
        adam_step(&mut self.critic_opt, &mut self.critic, &grads)?;
        Ok(loss)
    }

    /// Gradient of mean Q over the batch with respect to the actor
    /// parameters, chained through the critic's action input. Returns the
    /// ascent direction as a descent gradient (negated) plus the mean Q.
    pub(crate) fn actor_gradient(
        &self,
        batch: &[Transition],
    ) -> Result<(Gradients, f64), DdpgError> {
        let n = batch.len() as f64;
        let mut grads = Gradients::zeros_like(&self.actor);
        let mut mean_q = 0.0;
        for t in batch {
            let a = self.actor.forward(&t.s)?;
            let x = self.critic_input(&t.s, &a);
            mean_q += self.critic.forward(&x)?[0] / n;
            let (_, dx) = self.critic.backward(&x, &[1.0])?;
            // Ascent on Q: feed the negated action gradient through the
            // actor so Adam's descent climbs the objective.
            let upstream: Vec<f64> = dx[self.obs_dim..].iter().map(|g| -g / n).collect();
            let (g, _) = self.actor.backward(&t.s, &upstream)?;
            grads.add_scaled(&g, 1.0);
        }
        Ok((grads, mean_q))
    }

    /// One Adam ascent step on the actor objective; returns the pre-step
    /// mean Q.
    pub fn update_actor(&mut self, batch: &[Transition]) -> Result<f64, DdpgError> {
        if batch.is_empty() {
            return Err(DdpgError::Parameter("empty minibatch".into()));
        }
        let (grads, mean_q) = self.actor_gradient(batch)?;
        if !mean_q.is_finite() || !grads.is_finite() {
            return Err(DdpgError::Training(format!("non-finite actor objective {mean_q}")));
        }
        adam_step(&mut self.actor_opt, &mut self.actor, &grads)?;
        Ok(mean_q)
    }

    /// Polyak-blend both target networks toward the live ones.
    pub fn update_targets(&mut self) {
        let tau = self.cfg.tau;
        soft_update(&mut self.target_actor, &self.actor, tau)
            .expect("targets share the live architectures");
        soft_update(&mut self.target_critic, &self.critic, tau)
            .expect("targets share the live architectures");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> DdpgConfig {
        DdpgConfig { hidden: (8, 8), buffer_capacity: 256, batch_size: 4, ..DdpgConfig::default() }
    }

    fn tr(s: f64, a: f64, r: f64, s2: f64, done: bool) -> Transition {
        Transition { s: vec![s, 0.0], a: vec![a], r, s_next: vec![s2, 0.0], done }
    }

    #[test]
    fn act_is_repeatable_without_exploration() {
        let mut agent = Agent::new(2, 1, tiny_cfg()).unwrap();
        let obs = [0.3, -0.7];
        let a = agent.act(&obs, false).unwrap();
        let b = agent.act(&obs, false).unwrap();
        assert_eq!(a, b);
        assert!(a[0].abs() <= 1.0);
    }

    #[test]
    fn zero_sigma_exploration_is_deterministic() {
        let cfg = DdpgConfig { noise_sigma: 0.0, ..tiny_cfg() };
        let mut agent = Agent::new(2, 1, cfg).unwrap();
        let obs = [0.1, 0.2];
        let a = agent.act(&obs, true).unwrap();
        let b = agent.act(&obs, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exploration_stays_in_unit_box() {
        let cfg = DdpgConfig { noise_sigma: 5.0, ..tiny_cfg() };
        let mut agent = Agent::new(2, 1, cfg).unwrap();
        for _ in 0..100 {
            let a = agent.act(&[0.0, 0.0], true).unwrap();
            assert!(a[0] >= -1.0 && a[0] <= 1.0);
        }
    }

    #[test]
    fn targets_start_as_exact_copies() {
        let agent = Agent::new(3, 2, tiny_cfg()).unwrap();
        assert_eq!(agent.actor, agent.target_actor);
        assert_eq!(agent.critic, agent.target_critic);
    }

    #[test]
    fn myopic_targets_equal_rewards() {
        let cfg = DdpgConfig { gamma: 0.0, ..tiny_cfg() };
        let agent = Agent::new(2, 1, cfg).unwrap();
        let batch = vec![tr(0.1, 0.2, 1.5, 0.3, false), tr(0.4, -0.1, -2.0, 0.5, false)];
        let y = agent.critic_targets(&batch).unwrap();
        assert_eq!(y, vec![1.5, -2.0]);
    }

    #[test]
    fn terminal_transitions_truncate_bootstrap() {
        let agent = Agent::new(2, 1, tiny_cfg()).unwrap();
        let batch = vec![tr(0.1, 0.2, 3.25, 0.3, true)];
        let y = agent.critic_targets(&batch).unwrap();
        assert_eq!(y, vec![3.25]);
    }

    #[test]
    fn zero_target_networks_give_reward_targets() {
        let mut agent = Agent::new(2, 1, tiny_cfg()).unwrap();
        let zero = crate::nn::Mlp::new(agent.target_critic.layer_sizes(), Activation::Identity, 0)
            .unwrap();
        // Polyak with tau 1 copies, so build a zero critic via soft_update
        // from a zeroed clone.
        let mut zeroed = zero;
        {
            let (w, b) = zeroed.params_mut();
            for layer in w.iter_mut().chain(b.iter_mut()) {
                layer.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        crate::nn::soft_update(&mut agent.target_critic, &zeroed, 1.0).unwrap();
        let batch = vec![tr(0.7, -0.3, 0.5, 0.2, false)];
        let y = agent.critic_targets(&batch).unwrap();
        assert_eq!(y, vec![0.5]);
    }

    #[test]
    fn critic_fixed_point_has_zero_loss() {
        // Zero critic, zero targets, zero rewards: Q == y == 0 everywhere.
        let mut agent = Agent::new(2, 1, DdpgConfig { gamma: 0.0, ..tiny_cfg() }).unwrap();
        {
            let (w, b) = agent.critic.params_mut();
            for layer in w.iter_mut().chain(b.iter_mut()) {
                layer.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let batch = vec![tr(0.1, 0.1, 0.0, 0.0, false), tr(-0.2, 0.3, 0.0, 0.0, false)];
        let before = agent.critic.clone();
        let loss = agent.update_critic(&batch).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(agent.critic, before, "zero gradient leaves parameters unchanged");
    }

    #[test]
    fn critic_loss_decreases_on_frozen_batch() {
        let cfg = DdpgConfig { critic_lr: 1e-4, gamma: 0.0, ..tiny_cfg() };
        let mut agent = Agent::new(2, 1, cfg).unwrap();
        let batch: Vec<Transition> = (0..8)
            .map(|k| {
                let s = k as f64 / 8.0;
                tr(s, 0.5 - s / 4.0, (s * 3.0).sin(), 0.0, false)
            })
            .collect();
        let mut prev = f64::INFINITY;
        for _ in 0..100 {
            let loss = agent.update_critic(&batch).unwrap();
            assert!(loss <= prev + 1e-12, "loss rose: {prev} -> {loss}");
            prev = loss;
        }
    }

    #[test]
    fn hand_built_absolute_value_critic_drives_actor_to_zero() {
        // Critic computes Q(s, a) = -|a| via relu(a) + relu(-a); the
        // optimum is a = 0, so actor updates must shrink |mu(s)|.
        let cfg = DdpgConfig { hidden: (2, 2), actor_lr: 1e-2, ..tiny_cfg() };
        let mut agent = Agent::new(1, 1, cfg).unwrap();
        let mut critic = crate::nn::Mlp::new(&[2, 2, 1], Activation::Identity, 0).unwrap();
        {
            let (w, b) = critic.params_mut();
            // Layer 0: rows read [s, a]; h0 = relu(a), h1 = relu(-a).
            w[0].copy_from_slice(&[0.0, 1.0, 0.0, -1.0]);
            b[0].copy_from_slice(&[0.0, 0.0]);
            // Output: -(h0 + h1).
            w[1].copy_from_slice(&[-1.0, -1.0]);
            b[1].copy_from_slice(&[0.0]);
        }
        agent.critic = critic;

        // Push the policy visibly away from the optimum first (the final
        // layer starts near zero).
        {
            let (_, b) = agent.actor.params_mut();
            let last = b.len() - 1;
            b[last][0] = 0.5;
        }

        let probe = vec![0.4];
        let batch: Vec<Transition> = (0..6)
            .map(|k| Transition {
                s: vec![k as f64 / 6.0 - 0.5],
                a: vec![0.0],
                r: 0.0,
                s_next: vec![0.0],
                done: true,
            })
            .collect();
        let before = agent.actor.forward(&probe).unwrap()[0].abs();
        for _ in 0..50 {
            agent.update_actor(&batch).unwrap();
        }
        let after = agent.actor.forward(&probe).unwrap()[0].abs();
        assert!(after < before, "|mu| should shrink: {before} -> {after}");
    }

    #[test]
    fn zero_critic_leaves_actor_unchanged() {
        let mut agent = Agent::new(2, 1, tiny_cfg()).unwrap();
        {
            let (w, b) = agent.critic.params_mut();
            for layer in w.iter_mut().chain(b.iter_mut()) {
                layer.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let before = agent.actor.clone();
        let batch = vec![tr(0.3, 0.0, 0.0, 0.0, true)];
        agent.update_actor(&batch).unwrap();
        assert_eq!(agent.actor, before);
    }

    #[test]
    fn actor_gradient_matches_finite_differences() {
        let cfg = DdpgConfig { hidden: (6, 6), ..tiny_cfg() };
        let agent = Agent::new(2, 1, cfg).unwrap();
        let batch: Vec<Transition> = (0..4)
            .map(|k| tr(0.2 * k as f64 - 0.3, 0.0, 0.0, 0.0, true))
            .collect();
        let (grads, _) = agent.actor_gradient(&batch).unwrap();

        let mean_q = |actor: &Mlp| -> f64 {
            let mut total = 0.0;
            for t in &batch {
                let a = actor.forward(&t.s).unwrap();
                let x: Vec<f64> = t.s.iter().chain(a.iter()).copied().collect();
                total += agent.critic.forward(&x).unwrap()[0];
            }
            total / batch.len() as f64
        };

        let h = 1e-5;
        let mut checked = 0;
        for l in 0..grads.weights.len() {
            for i in (0..grads.weights[l].len()).step_by(5) {
                let mut plus = agent.actor.clone();
                let mut minus = agent.actor.clone();
                let mut plus2 = agent.actor.clone();
                let mut minus2 = agent.actor.clone();
                {
                    plus.params_mut().0[l][i] += h;
                    minus.params_mut().0[l][i] -= h;
                    plus2.params_mut().0[l][i] += h / 2.0;
                    minus2.params_mut().0[l][i] -= h / 2.0;
                }
                let fd = (mean_q(&plus) - mean_q(&minus)) / (2.0 * h);
                let fd2 = (mean_q(&plus2) - mean_q(&minus2)) / h;
                if (fd - fd2).abs() > 1e-6 * fd.abs().max(fd2.abs()).max(1e-3) {
                    continue; // kink in the window
                }
                // Stored gradient is the descent direction of -Q.
                let analytic = -grads.weights[l][i];
                let denom = analytic.abs().max(fd.abs()).max(1e-6);
                assert!(
                    (analytic - fd).abs() / denom < 1e-4,
                    "layer {l} idx {i}: analytic {analytic} vs fd {fd}"
                );
                checked += 1;
            }
        }
        assert!(checked > 10, "ran {checked} probes");
    }

    #[test]
    fn target_updates_blend_and_converge() {
        let mut agent = Agent::new(2, 1, tiny_cfg()).unwrap();
        // Disturb the live actor so the targets lag.
        {
            let (w, _) = agent.actor.params_mut();
            w[0][0] += 1.0;
        }
        let gap0 = agent.actor.params().0[0][0] - agent.target_actor.params().0[0][0];
        agent.update_targets();
        let gap1 = agent.actor.params().0[0][0] - agent.target_actor.params().0[0][0];
        assert!((gap1 - gap0 * (1.0 - agent.cfg.tau)).abs() < 1e-12);

        let mut full = Agent::new(2, 1, DdpgConfig { tau: 1.0, ..tiny_cfg() }).unwrap();
        {
            let (w, _) = full.actor.params_mut();
            w[0][0] += 2.0;
        }
        full.update_targets();
        assert_eq!(full.actor, full.target_actor);
    }

    #[test]
    fn targets_stay_inside_live_parameter_history() {
        // Soft updates are convex blends, so a target parameter can never
        // leave the interval spanned by the live parameter's history.
        let mut agent = Agent::new(2, 1, tiny_cfg()).unwrap();
        for k in 0..32 {
            agent.buffer.push(tr(k as f64 * 0.07 - 1.0, 0.1, (k as f64).sin(), 0.0, k % 6 == 0));
        }
        let probe = |m: &Mlp| m.params().0[0][0];
        let mut lo = probe(&agent.actor);
        let mut hi = lo;
        for _ in 0..60 {
            let batch = agent.sample_batch().unwrap();
            agent.update_critic(&batch).unwrap();
            agent.update_actor(&batch).unwrap();
            agent.update_targets();
            lo = lo.min(probe(&agent.actor));
            hi = hi.max(probe(&agent.actor));
            let t = probe(&agent.target_actor);
            assert!(
                t >= lo - 1e-15 && t <= hi + 1e-15,
                "target {t} left the live history interval [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn updates_do_not_touch_stored_transitions() {
        let mut agent = Agent::new(2, 1, tiny_cfg()).unwrap();
        for k in 0..16 {
            agent.buffer.push(tr(k as f64 * 0.1, 0.05, -0.2, 0.0, k % 5 == 0));
        }
        let snapshot: Vec<Transition> = (0..16).map(|i| agent.buffer.get(i).clone()).collect();
        let batch = agent.buffer.sample(4, &mut Rng::new(3)).unwrap();
        agent.update_critic(&batch).unwrap();
        agent.update_actor(&batch).unwrap();
        agent.update_targets();
        for (i, t) in snapshot.iter().enumerate() {
            assert_eq!(agent.buffer.get(i), t);
        }
    }
}
