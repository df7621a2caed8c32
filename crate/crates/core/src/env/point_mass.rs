use super::{EnvError, Environment, StepOutcome};

/// 1-D "reach the target" task with an analytic optimal return, used to
/// sanity-check the learning stack. The mass starts at the origin, the
/// action moves it by up to `max_step` per step, and each step pays
/// `1 - |x - target|`. Fixed horizon, fully deterministic.
pub struct PointMassEnv {
    x: f64,
    steps: usize,
    done: bool,
    pub target: f64,
    pub max_step: f64,
    pub horizon: usize,
}

impl Default for PointMassEnv {
    fn default() -> Self {
        PointMassEnv { x: 0.0, steps: 0, done: false, target: 1.0, max_step: 0.1, horizon: 50 }
    }
}

impl PointMassEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Return of the best policy: run at full speed toward the target,
    /// then hold. Closed form, independent of any learned controller.
    pub fn optimal_return(&self) -> f64 {
        let mut x: f64 = 0.0;
        let mut total = 0.0;
        for _ in 0..self.horizon {
            let step = (self.target - x).clamp(-self.max_step, self.max_step);
            x += step;
            total += 1.0 - (x - self.target).abs();
        }
        total
    }
}

impl Environment for PointMassEnv {
    fn obs_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.x = 0.0;
        self.steps = 0;
        self.done = false;
        vec![self.x, self.target - self.x]
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, EnvError> {
        if self.done {
            return Err(EnvError::Usage("step called on a finished episode".into()));
        }
        let a = action.first().copied().unwrap_or(0.0).clamp(-1.0, 1.0);
        self.x = (self.x + a * self.max_step).clamp(-2.0, 4.0);
        self.steps += 1;
        self.done = self.steps >= self.horizon;
        let reward = 1.0 - (self.x - self.target).abs();
        Ok(StepOutcome {
            observation: vec![self.x, self.target - self.x],
            reward,
            done: self.done,
        })
    }

    fn forward_progress(&self) -> f64 {
        self.x
    }
}
