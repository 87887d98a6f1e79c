//! Gait domain types, synthetic gait generation and CSV persistence.

mod csv;
mod generate;

pub use csv::{load_csv, save_csv, CSV_HEADER};
pub use generate::{generate_gait, generate_gait_with_phase};

use crate::error::{Error, Result};

/// Number of actuated sagittal joints: hips, knees and ankles of both legs.
pub const JOINT_COUNT: usize = 6;

/// One frame of joint angles, ordered
/// `[left hip, left knee, left ankle, right hip, right knee, right ankle]`,
/// in radians.
pub type JointAngles = [f64; JOINT_COUNT];

/// Default acquisition rate of the joint encoders.
pub const DEFAULT_SAMPLE_RATE: f64 = 100.0;

const DEG: f64 = std::f64::consts::PI / 180.0;

/// Hip flexion/extension range of motion, radians.
pub const HIP_ROM: (f64, f64) = (-30.0 * DEG, 125.0 * DEG);
/// Knee flexion/extension range of motion, radians.
pub const KNEE_ROM: (f64, f64) = (-5.0 * DEG, 125.0 * DEG);
/// Ankle flexion/extension range of motion, radians.
pub const ANKLE_ROM: (f64, f64) = (-70.0 * DEG, 70.0 * DEG);

/// Range of motion for the joint at `index` in [`JointAngles`] order.
pub fn joint_rom(index: usize) -> (f64, f64) {
    match index % 3 {
        0 => HIP_ROM,
        1 => KNEE_ROM,
        _ => ANKLE_ROM,
    }
}

/// Stance state of the gait cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    /// Left single stance (right leg swinging).
    Left,
    /// Double stance (both feet on the ground).
    Double,
    /// Right single stance (left leg swinging).
    Right,
}

impl PhaseLabel {
    /// Numeric encoding of the phase: left -1, double 0, right +1.
    pub fn value(self) -> f64 {
        match self {
            PhaseLabel::Left => -1.0,
            PhaseLabel::Double => 0.0,
            PhaseLabel::Right => 1.0,
        }
    }

    /// Inverse of [`PhaseLabel::value`]; exact match only.
    pub fn from_value(v: f64) -> Option<Self> {
        if v == -1.0 {
            Some(PhaseLabel::Left)
        } else if v == 0.0 {
            Some(PhaseLabel::Double)
        } else if v == 1.0 {
            Some(PhaseLabel::Right)
        } else {
            None
        }
    }

    /// CSV token for this label.
    pub fn token(self) -> &'static str {
        match self {
            PhaseLabel::Left => "-1",
            PhaseLabel::Double => "0",
            PhaseLabel::Right => "1",
        }
    }

    /// Parses a CSV token.
    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "-1" => Some(PhaseLabel::Left),
            "0" => Some(PhaseLabel::Double),
            "1" => Some(PhaseLabel::Right),
            _ => None,
        }
    }

    /// All labels in class order `[Left, Double, Right]`.
    pub const ALL: [PhaseLabel; 3] = [PhaseLabel::Left, PhaseLabel::Double, PhaseLabel::Right];
}

/// Numeric encoding of a phase label.
pub fn phase_to_value(label: PhaseLabel) -> f64 {
    label.value()
}

/// One 100 Hz frame: timestamp, six joint angles and the ground-truth phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitSample {
    /// Seconds since the start of the recording.
    pub t: f64,
    pub angles: JointAngles,
    pub phase: PhaseLabel,
}

/// An ordered gait recording at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitDataset {
    pub samples: Vec<GaitSample>,
    pub sample_rate: f64,
}

impl GaitDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Ground-truth phase values of all samples.
    pub fn phase_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.phase.value()).collect()
    }

    /// Chronological sub-dataset over an index range.
    pub fn slice(&self, range: std::ops::Range<usize>) -> GaitDataset {
        GaitDataset {
            samples: self.samples[range].to_vec(),
            sample_rate: self.sample_rate,
        }
    }
}

/// One treadmill segment: a target belt speed held for a duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedSegment {
    pub speed_kmh: f64,
    pub duration_s: f64,
}

/// A walking protocol: a sequence of speed segments with ramped transitions.
///
/// The first `transition_s` seconds of every segment after the first ramp
/// linearly from the previous speed, so the total duration is exactly the
/// sum of segment durations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    pub segments: Vec<SpeedSegment>,
    pub transition_s: f64,
}

impl SpeedProfile {
    pub fn new(segments: Vec<SpeedSegment>, transition_s: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Config("speed profile has no segments".into()));
        }
        for seg in &segments {
            if seg.speed_kmh < 0.0 {
                return Err(Error::Config(format!(
                    "negative speed {} km/h",
                    seg.speed_kmh
                )));
            }
            if seg.duration_s <= 0.0 {
                return Err(Error::Config(format!(
                    "non-positive segment duration {} s",
                    seg.duration_s
                )));
            }
        }
        if transition_s < 0.0 {
            return Err(Error::Config("negative transition duration".into()));
        }
        Ok(SpeedProfile {
            segments,
            transition_s,
        })
    }

    /// The calibration protocol: 1, 2, 3, 3.5, 3, 2, 1 km/h for 30 s each,
    /// with 2 s speed transitions.
    pub fn calibration() -> Self {
        let speeds = [1.0, 2.0, 3.0, 3.5, 3.0, 2.0, 1.0];
        SpeedProfile {
            segments: speeds
                .iter()
                .map(|&speed_kmh| SpeedSegment {
                    speed_kmh,
                    duration_s: 30.0,
                })
                .collect(),
            transition_s: 2.0,
        }
    }

    /// A single constant-speed segment.
    pub fn steady(speed_kmh: f64, duration_s: f64) -> Result<Self> {
        SpeedProfile::new(
            vec![SpeedSegment {
                speed_kmh,
                duration_s,
            }],
            2.0,
        )
    }

    /// Ground walking with no imposed speed: per-cycle segments jittered
    /// +/-15% around 2.5 km/h.
    pub fn free(duration_s: f64, seed: u64) -> Result<Self> {
        use rand::{Rng, SeedableRng};
        if duration_s <= 0.0 {
            return Err(Error::Config("non-positive free-walk duration".into()));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x6672_6565);
        let mut segments = Vec::new();
        let mut remaining = duration_s;
        while remaining > 0.0 {
            let dur = remaining.min(1.2);
            segments.push(SpeedSegment {
                speed_kmh: 2.5 * (1.0 + rng.random_range(-0.15..0.15)),
                duration_s: dur,
            });
            remaining -= dur;
        }
        SpeedProfile::new(segments, 0.4)
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Instantaneous belt speed at time `t`, ramping linearly over the first
    /// `transition_s` seconds of each segment after the first.
    pub fn speed_at(&self, t: f64) -> f64 {
        let mut start = 0.0;
        let mut prev_speed = self.segments[0].speed_kmh;
        for (i, seg) in self.segments.iter().enumerate() {
            let end = start + seg.duration_s;
            if t < end || i == self.segments.len() - 1 {
                if i > 0 && self.transition_s > 0.0 && t - start < self.transition_s {
                    let frac = ((t - start) / self.transition_s).clamp(0.0, 1.0);
                    return prev_speed + (seg.speed_kmh - prev_speed) * frac;
                }
                return seg.speed_kmh;
            }
            prev_speed = seg.speed_kmh;
            start = end;
        }
        prev_speed
    }
}
