//! Fixed-capacity circular sample buffer for the online trainer.

use crate::gait::{GaitDataset, GaitSample, JointAngles, PhaseLabel};

/// Ring of (angles, phase target) pairs; once full, the oldest entry is
/// overwritten first and iteration still yields chronological order.
#[derive(Debug, Clone)]
pub struct CircularBuffer {
    data: Vec<(JointAngles, PhaseLabel)>,
    capacity: usize,
    write: usize,
    len: usize,
}

impl CircularBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        CircularBuffer {
            data: vec![([0.0; 6], PhaseLabel::Double); capacity],
            capacity,
            write: 0,
            len: 0,
        }
    }

    /// O(1) append, overwriting the oldest entry when full.
    pub fn push(&mut self, angles: JointAngles, phase: PhaseLabel) {
        self.data[self.write] = (angles, phase);
        self.write = (self.write + 1) % self.capacity;
        if self.len < self.capacity {
            self.len += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Chronologically ordered copy of the current contents as a dataset,
    /// with timestamps synthesized at the given rate.
    pub fn snapshot(&self, sample_rate: f64) -> GaitDataset {
        let start = if self.len < self.capacity {
            0
        } else {
            self.write
        };
        let samples = (0..self.len)
            .map(|i| {
                let (angles, phase) = self.data[(start + i) % self.capacity];
                GaitSample {
                    t: i as f64 / sample_rate,
                    angles,
                    phase,
                }
            })
            .collect();
        GaitDataset {
            samples,
            sample_rate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angle(v: f64) -> JointAngles {
        [v, 0.0, 0.0, 0.0, 0.0, 0.0]
    }

    #[test]
    fn ring_overwrites_oldest_first() {
        let mut buf = CircularBuffer::new(3);
        for v in [1.0, 2.0, 3.0, 4.0] {
            buf.push(angle(v), PhaseLabel::Double);
        }
        let snap = buf.snapshot(100.0);
        let firsts: Vec<f64> = snap.samples.iter().map(|s| s.angles[0]).collect();
        assert_eq!(firsts, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn capacity_2000_fills_in_twenty_seconds_at_100hz() {
        let mut buf = CircularBuffer::new(2000);
        for i in 0..2000 {
            assert!(!buf.is_full(), "full early at sample {i}");
            buf.push(angle(i as f64), PhaseLabel::Left);
        }
        // Exactly at t = 20 s the buffer is full for the first time.
        assert!(buf.is_full());
    }

    #[test]
    fn snapshots_are_stable_reads() {
        let mut buf = CircularBuffer::new(4);
        buf.push(angle(1.0), PhaseLabel::Left);
        buf.push(angle(2.0), PhaseLabel::Right);
        let a = buf.snapshot(100.0);
        let b = buf.snapshot(100.0);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_buffer_snapshot_is_empty_dataset() {
        let buf = CircularBuffer::new(8);
        assert!(buf.snapshot(100.0).is_empty());
    }

    #[test]
    fn snapshot_timestamps_follow_index_over_rate() {
        let mut buf = CircularBuffer::new(3);
        for v in [1.0, 2.0, 3.0, 4.0, 5.0] {
            buf.push(angle(v), PhaseLabel::Double);
        }
        let snap = buf.snapshot(100.0);
        for (i, s) in snap.samples.iter().enumerate() {
            assert!((s.t - i as f64 / 100.0).abs() < 1e-9);
        }
    }
}
