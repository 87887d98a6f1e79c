//! Deterministic synthetic gait generator.
//!
//! Stands in for treadmill recordings: per-leg sinusoid-plus-offset joint
//! trajectories over a gait cycle whose frequency scales with belt speed,
//! with a contact schedule yielding alternating left / double / right
//! stance labels. Labels are noise-free ground truth; Gaussian noise is
//! added to the angles only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    GaitDataset, GaitSample, JointAngles, PhaseLabel, SpeedProfile, DEFAULT_SAMPLE_RATE,
};
use crate::error::{Error, Result};

/// Gait cycle frequency in Hz at a given belt speed; zero means standing.
fn cadence_hz(speed_kmh: f64) -> f64 {
    if speed_kmh <= 0.0 {
        0.0
    } else {
        0.3 + 0.2 * speed_kmh
    }
}

/// Fraction of the gait cycle spent in double stance; shrinks with speed.
fn double_stance_duty(speed_kmh: f64) -> f64 {
    (0.35 - 0.05 * speed_kmh).clamp(0.10, 0.35)
}

/// Stance label from the cycle phase `c` in [0, 1).
///
/// Window layout per cycle: left single stance, double, right single
/// stance, double. The two double-stance windows each take `duty / 2`.
fn label_at(c: f64, duty: f64) -> PhaseLabel {
    let single = (1.0 - duty) / 2.0;
    if c < single {
        PhaseLabel::Left
    } else if c < single + duty / 2.0 {
        PhaseLabel::Double
    } else if c < 2.0 * single + duty / 2.0 {
        PhaseLabel::Right
    } else {
        PhaseLabel::Double
    }
}

/// Continuous ground-truth phase: piecewise linear through the window
/// midpoints, -1 mid left stance, 0 mid double stance, +1 mid right stance.
fn continuous_phase(c: f64, duty: f64) -> f64 {
    let single = (1.0 - duty) / 2.0;
    // Anchor points (cycle phase, value) over one cycle.
    let anchors = [
        (single / 2.0, -1.0),
        (single + duty / 4.0, 0.0),
        (1.5 * single + duty / 2.0, 1.0),
        (1.0 - duty / 4.0, 0.0),
    ];
    let (first, last) = (anchors[0], anchors[3]);
    if c < first.0 {
        let (x0, y0) = (last.0 - 1.0, last.1);
        return y0 + (first.1 - y0) * (c - x0) / (first.0 - x0);
    }
    for w in anchors.windows(2) {
        if c < w[1].0 {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            return y0 + (y1 - y0) * (c - x0) / (x1 - x0);
        }
    }
    let (x0, y0) = last;
    let (x1, y1) = (first.0 + 1.0, first.1);
    y0 + (y1 - y0) * (c - x0) / (x1 - x0)
}

/// Per-joint waveform over one leg cycle at phase angle `theta` (radians).
///
/// Knee and ankle carry a third-harmonic component on top of the
/// fundamental, as walking kinematics do; the harmonic phases differ
/// slightly between the legs (no gait is perfectly symmetric), which also
/// keeps the six angles from collapsing into three mirrored features.
fn leg_angles(theta: f64, amp: f64, right: bool) -> [f64; 3] {
    let (knee_h3, ankle_h1, ankle_h3) = if right {
        (0.9, 2.4, -0.5)
    } else {
        (0.4, 2.0, -1.2)
    };
    let hip = 0.26 + 0.35 * amp * theta.sin();
    let knee = 0.55
        + amp
            * (0.33 * (theta - std::f64::consts::FRAC_PI_2).sin()
                + 0.20 * (3.0 * theta + knee_h3).sin());
    let ankle =
        0.05 + amp * (0.13 * (theta + ankle_h1).sin() + 0.12 * (3.0 * theta + ankle_h3).sin());
    [hip, knee, ankle]
}

/// Generates a synthetic gait dataset at 100 Hz.
///
/// Deterministic for fixed `(profile, seed, noise_std)`. Labels come from
/// the contact schedule and are never noisy.
pub fn generate_gait(profile: &SpeedProfile, seed: u64, noise_std: f64) -> Result<GaitDataset> {
    generate_gait_with_phase(profile, seed, noise_std).map(|(ds, _)| ds)
}

/// Like [`generate_gait`], also returning the continuous ground-truth phase
/// per sample (the signal the discrete labels are cut from).
pub fn generate_gait_with_phase(
    profile: &SpeedProfile,
    seed: u64,
    noise_std: f64,
) -> Result<(GaitDataset, Vec<f64>)> {
    if profile.segments.is_empty() {
        return Err(Error::Config("speed profile has no segments".into()));
    }
    if noise_std < 0.0 {
        return Err(Error::Config("negative noise std".into()));
    }
    let fs = DEFAULT_SAMPLE_RATE;
    let n = (profile.total_duration() * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if noise_std > 0.0 {
        Some(Normal::new(0.0, noise_std).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };

    let mut samples = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    let mut cycle = 0.0_f64; // accumulated cycle phase in [0, 1)
    let two_pi = 2.0 * std::f64::consts::PI;

    for k in 0..n {
        let t = k as f64 / fs;
        let speed = profile.speed_at(t);
        let standing = speed <= 0.0;
        let duty = double_stance_duty(speed);
        let amp = (0.6 + 0.1 * speed).clamp(0.5, 1.0);

        let (phase, phi) = if standing {
            (PhaseLabel::Double, 0.0)
        } else {
            (label_at(cycle, duty), continuous_phase(cycle, duty))
        };

        let left = leg_angles(two_pi * cycle, amp, false);
        let right = leg_angles(two_pi * (cycle + 0.5), amp, true);
        let mut angles: JointAngles = [left[0], left[1], left[2], right[0], right[1], right[2]];
        if let Some(dist) = &noise {
            for a in &mut angles {
                *a += dist.sample(&mut rng);
            }
        }

        samples.push(GaitSample { t, angles, phase });
        phases.push(phi);

        cycle += cadence_hz(speed) / fs;
        if cycle >= 1.0 {
            cycle -= 1.0;
        }
    }

    Ok((
        GaitDataset {
            samples,
            sample_rate: fs,
        },
        phases,
    ))
}
