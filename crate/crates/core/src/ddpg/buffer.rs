use super::DdpgError;
use crate::rng::Rng;

/// One experience tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub done: bool,
}

/// Bounded FIFO store of transitions; insertion beyond capacity evicts the
/// oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    write_cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        debug_assert!(capacity > 0);
        ReplayBuffer { capacity, storage: Vec::new(), write_cursor: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.write_cursor] = t;
        }
        self.write_cursor = (self.write_cursor + 1) % self.capacity;
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.storage[i]
    }

    /// Uniform minibatch with replacement, deterministic in the rng state.
    /// An empty buffer is not ready; fullness relative to the batch size is
    /// enforced by the agent's warmup gate.
    pub fn sample(&self, batch_size: usize, rng: &mut Rng) -> Result<Vec<Transition>, DdpgError> {
        if self.storage.is_empty() {
            return Err(DdpgError::NotReady("buffer is empty".into()));
        }
        Ok((0..batch_size).map(|_| self.storage[rng.below(self.storage.len())].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(tag: f64) -> Transition {
        Transition { s: vec![tag], a: vec![0.0], r: tag, s_next: vec![tag], done: false }
    }

    #[test]
    fn fifo_eviction() {
        let mut buf = ReplayBuffer::new(3);
        for k in 1..=4 {
            buf.push(t(k as f64));
        }
        assert_eq!(buf.len(), 3);
        let kept: Vec<f64> = (0..3).map(|i| buf.get(i).r).collect();
        assert!(kept.contains(&2.0) && kept.contains(&3.0) && kept.contains(&4.0));
        assert!(!kept.contains(&1.0));
    }

    #[test]
    fn push_on_empty() {
        let mut buf = ReplayBuffer::new(10);
        buf.push(t(1.0));
        assert_eq!(buf.len(), 1);
    }

    #[test]
    fn many_pushes_keep_newest() {
        let mut buf = ReplayBuffer::new(1000);
        for k in 0..10_000 {
            buf.push(t(k as f64));
        }
        assert_eq!(buf.len(), 1000);
        let min = (0..1000).map(|i| buf.get(i).r).fold(f64::INFINITY, f64::min);
        assert_eq!(min, 9000.0);
    }

    #[test]
    fn sample_with_replacement_from_single_item() {
        let mut buf = ReplayBuffer::new(8);
        buf.push(t(7.0));
        let mut rng = Rng::new(0);
        let batch = buf.sample(4, &mut rng).unwrap();
        assert_eq!(batch.len(), 4);
        assert!(batch.iter().all(|x| x.r == 7.0));
    }

    #[test]
    fn sample_is_deterministic_in_rng() {
        let mut buf = ReplayBuffer::new(64);
        for k in 0..64 {
            buf.push(t(k as f64));
        }
        let a = buf.sample(16, &mut Rng::new(5)).unwrap();
        let b = buf.sample(16, &mut Rng::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_buffer_is_not_ready() {
        let buf = ReplayBuffer::new(64);
        assert!(buf.sample(2, &mut Rng::new(0)).is_err());
    }
}
