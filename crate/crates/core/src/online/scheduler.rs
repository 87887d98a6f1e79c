//! Fixed-period training scheduler with postponement.

/// Fires a training cycle every `period` seconds, starting one full period
/// in (so the sample buffer is already full at the first cycle). A cycle
/// that finds the trainer busy is postponed one period rather than queued.
#[derive(Debug, Clone)]
pub struct Scheduler {
    period: f64,
    next_due: f64,
}

impl Scheduler {
    pub fn new(period: f64) -> Self {
        assert!(period > 0.0, "scheduler period must be positive");
        Scheduler {
            period,
            next_due: period,
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn next_due(&self) -> f64 {
        self.next_due
    }

    /// Checks whether a training cycle should run at time `t`. Due slots
    /// are consumed either way; a busy trainer forfeits the slot.
    pub fn try_fire(&mut self, t: f64, busy: bool) -> bool {
        if t < self.next_due {
            return false;
        }
        while self.next_due <= t {
            self.next_due += self.period;
        }
        !busy
    }

    /// Skips any slots that elapsed while a training cycle was running.
    pub fn skip_missed(&mut self, t: f64) {
        while self.next_due <= t {
            self.next_due += self.period;
        }
    }
}
