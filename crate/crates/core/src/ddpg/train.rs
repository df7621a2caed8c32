use super::agent::Agent;
use super::buffer::Transition;
use super::DdpgError;
use crate::env::Environment;
use crate::rng::Rng;

/// Per-episode training log row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub steps: usize,
    pub episode_return: f64,
    /// Mean critic loss over this episode's updates (0 before warmup).
    pub critic_loss: f64,
    /// Mean actor objective over this episode's updates.
    pub actor_obj: f64,
    /// Forward displacement the environment reported for the episode.
    pub forward_disp: f64,
}

pub const METRICS_HEADER: &str = "episode,steps,return,critic_loss,actor_obj";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingMetrics {
    pub episodes: Vec<EpisodeRecord>,
}

impl TrainingMetrics {
    /// CSV with the frozen five-column schema.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(METRICS_HEADER);
        out.push('\n');
        for e in &self.episodes {
            out.push_str(&format!(
                "{},{},{:?},{:?},{:?}\n",
                e.episode, e.steps, e.episode_return, e.critic_loss, e.actor_obj
            ));
        }
        out
    }

    pub fn mean_return_of_last(&self, n: usize) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        let tail = &self.episodes[self.episodes.len().saturating_sub(n)..];
        tail.iter().map(|e| e.episode_return).sum::<f64>() / tail.len() as f64
    }
}

/// Deterministic per-episode reset seed.
fn episode_seed(base: u64, episode: u64) -> u64 {
    Rng::new(base).derive(episode).next_u64()
}

/// Off-policy training loop. Per environment step: act with exploration,
/// store the transition, then (once past warmup) run the configured number
/// of critic/actor/target updates. Fully deterministic in the agent seed.
pub fn train<E: Environment>(
    agent: &mut Agent,
    env: &mut E,
    episodes: usize,
) -> Result<TrainingMetrics, DdpgError> {
    if env.obs_dim() != agent.obs_dim() || env.action_dim() != agent.act_dim() {
        return Err(DdpgError::Parameter(format!(
            "agent is {}->{} but environment is {}->{}",
            agent.obs_dim(),
            agent.act_dim(),
            env.obs_dim(),
            env.action_dim()
        )));
    }
    let mut metrics = TrainingMetrics::default();
    let mut global_step: usize = 0;

    for episode in 0..episodes {
        let mut obs = env.reset(episode_seed(agent.cfg.seed, episode as u64));
        let mut episode_return = 0.0;
        let mut steps = 0;
        let mut critic_loss_sum = 0.0;
        let mut actor_obj_sum = 0.0;
        let mut updates = 0usize;

        loop {
            let action = agent.act(&obs, true)?;
            let out = env.step(&action)?;
            agent.buffer.push(Transition {
                s: obs,
                a: action,
                r: out.reward,
                s_next: out.observation.clone(),
                done: out.done,
            });
            obs = out.observation;
            episode_return += out.reward;
            steps += 1;
            global_step += 1;

            if global_step >= agent.cfg.warmup_steps && agent.buffer.len() >= agent.cfg.batch_size
            {
                for _ in 0..agent.cfg.updates_per_step {
                    let batch = agent.sample_batch()?;
                    critic_loss_sum += agent.update_critic(&batch)?;
                    actor_obj_sum += agent.update_actor(&batch)?;
                    agent.update_targets();
                    updates += 1;
                }
            }
            if out.done {
                break;
            }
        }

        metrics.episodes.push(EpisodeRecord {
            episode,
            steps,
            episode_return,
            critic_loss: if updates > 0 { critic_loss_sum / updates as f64 } else { 0.0 },
            actor_obj: if updates > 0 { actor_obj_sum / updates as f64 } else { 0.0 },
            forward_disp: env.forward_progress(),
        });
    }
    Ok(metrics)
}

/// Greedy evaluation without exploration; returns each episode's return.
pub fn evaluate<E: Environment>(
    agent: &mut Agent,
    env: &mut E,
    episodes: usize,
    seed_base: u64,
) -> Result<Vec<f64>, DdpgError> {
    let mut returns = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let mut obs = env.reset(episode_seed(seed_base, episode as u64));
        let mut total = 0.0;
        loop {
            let action = agent.act(&obs, false)?;
            let out = env.step(&action)?;
            total += out.reward;
            obs = out.observation;
            if out.done {
                break;
            }
        }
        returns.push(total);
    }
    Ok(returns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddpg::DdpgConfig;
    use crate::env::PointMassEnv;

    fn toy_cfg() -> DdpgConfig {
        DdpgConfig {
            hidden: (16, 16),
            batch_size: 16,
            buffer_capacity: 4096,
            warmup_steps: 100,
            ..DdpgConfig::default()
        }
    }

    #[test]
    fn zero_episodes_is_a_no_op() {
        let mut agent = Agent::new(2, 1, toy_cfg()).unwrap();
        let snapshot = agent.actor.clone();
        let mut env = PointMassEnv::new();
        let metrics = train(&mut agent, &mut env, 0).unwrap();
        assert!(metrics.episodes.is_empty());
        assert_eq!(agent.actor, snapshot);
        assert_eq!(metrics.to_csv(), format!("{METRICS_HEADER}\n"));
    }

    #[test]
    fn warmup_gate_blocks_updates() {
        let cfg = DdpgConfig { warmup_steps: 1_000_000, ..toy_cfg() };
        let mut agent = Agent::new(2, 1, cfg).unwrap();
        let before = agent.actor.clone();
        let mut env = PointMassEnv::new();
        let metrics = train(&mut agent, &mut env, 3).unwrap();
        assert_eq!(agent.actor, before, "no updates before warmup");
        assert_eq!(agent.buffer.len(), 150, "buffer still fills");
        assert!(metrics.episodes.iter().all(|e| e.critic_loss == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut agent = Agent::new(3, 2, toy_cfg()).unwrap();
        let mut env = PointMassEnv::new();
        assert!(train(&mut agent, &mut env, 1).is_err());
    }

    #[test]
    fn training_is_deterministic_in_seed() {
        let run = || {
            let mut agent = Agent::new(2, 1, toy_cfg()).unwrap();
            let mut env = PointMassEnv::new();
            train(&mut agent, &mut env, 8).unwrap().to_csv()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn metrics_rows_have_episode_shape() {
        let mut agent = Agent::new(2, 1, toy_cfg()).unwrap();
        let mut env = PointMassEnv::new();
        let metrics = train(&mut agent, &mut env, 5).unwrap();
        assert_eq!(metrics.episodes.len(), 5);
        for (k, e) in metrics.episodes.iter().enumerate() {
            assert_eq!(e.episode, k);
            assert_eq!(e.steps, 50);
            assert!(e.episode_return.is_finite());
        }
        let csv = metrics.to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with(METRICS_HEADER));
    }

    #[test]
    fn evaluation_is_noise_free_and_repeatable() {
        let mut agent = Agent::new(2, 1, toy_cfg()).unwrap();
        let mut env = PointMassEnv::new();
        train(&mut agent, &mut env, 5).unwrap();
        let a = evaluate(&mut agent, &mut env, 3, 99).unwrap();
        let b = evaluate(&mut agent, &mut env, 3, 99).unwrap();
        assert_eq!(a, b);
    }
}
