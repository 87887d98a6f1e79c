//! Deterministic single-process online runner.
//!
//! Both roles are stepped by the same simulated clock and datagrams are
//! delivered losslessly in order, so a loopback run is exactly
//! reproducible from its seeds.

use super::control_loop::{ControlConfig, ControlLoop, ControlStats, TraceRow};
use super::trainer::{TrainCycle, Trainer, TrainerConfig};
use crate::error::Result;
use crate::gait::{generate_gait_with_phase, SpeedProfile};
use crate::metrics::{mean_windowed_accuracy, StreamMetrics, StreamPoint};

/// Loopback run configuration.
#[derive(Debug, Clone)]
pub struct LoopbackConfig {
    pub profile: SpeedProfile,
    /// Seed of the synthetic gait stream.
    pub seed: u64,
    pub noise_std: f64,
    pub control: ControlConfig,
    pub trainer: TrainerConfig,
    /// Sliding metric window, seconds.
    pub window_s: f64,
}

impl Default for LoopbackConfig {
    fn default() -> Self {
        LoopbackConfig {
            profile: SpeedProfile::steady(3.5, 300.0).expect("valid steady profile"),
            seed: 0,
            noise_std: 0.02,
            control: ControlConfig::default(),
            trainer: TrainerConfig::default(),
            window_s: 5.0,
        }
    }
}

/// Everything a loopback run produces.
#[derive(Debug)]
pub struct LoopbackReport {
    pub trace: Vec<TraceRow>,
    pub metrics: Vec<StreamPoint>,
    pub train_cycles: Vec<TrainCycle>,
    pub control_stats: ControlStats,
    pub updates_emitted: usize,
    /// Buffer state at the first executed training cycle.
    pub buffer_full_at_first_training: Option<bool>,
    /// Mean 5 s-window accuracy over everything at or after t = 10 s.
    pub post10s_mean_windowed_accuracy: Option<f64>,
    pub empty_cycles: u64,
}

/// Runs control loop and trainer in lockstep over a synthetic gait stream.
pub fn run_loopback(config: &LoopbackConfig) -> Result<LoopbackReport> {
    let (dataset, truth_phi) =
        generate_gait_with_phase(&config.profile, config.seed, config.noise_std)?;
    let mut trainer = Trainer::new(config.trainer.clone())?;
    let mut control = ControlLoop::new(config.control.clone(), trainer.net().clone());
    let mut stream = StreamMetrics::new(config.window_s, dataset.sample_rate)?;

    let mut metrics = Vec::with_capacity(dataset.len());
    let mut pending_weights: Option<Vec<u8>> = None;
    let mut updates_emitted = 0;

    for (k, (sample, &phi)) in dataset.samples.iter().zip(&truth_phi).enumerate() {
        // Weight updates land between ticks: the swap is atomic from the
        // control loop's perspective.
        if let Some(frame) = pending_weights.take() {
            if let Some(ack) = control.apply_datagram(&frame) {
                trainer.on_datagram(&ack);
            }
        }
        let (row, batch) = control.tick(sample, phi);
        metrics.push(stream.push(row.estimate, row.label, sample.phase));
        if let Some(batch) = batch {
            trainer.on_datagram(&batch);
        }
        let t = k as f64 / dataset.sample_rate;
        if let Some(frame) = trainer.poll(t, false) {
            updates_emitted += 1;
            pending_weights = Some(frame);
        }
    }

    let post10 = mean_windowed_accuracy(&metrics, 10.0);
    Ok(LoopbackReport {
        trace: control.trace().to_vec(),
        control_stats: control.stats(),
        train_cycles: trainer.cycles().to_vec(),
        buffer_full_at_first_training: trainer.cycles().first().map(|c| c.buffer_full),
        empty_cycles: trainer.empty_cycles(),
        updates_emitted,
        metrics,
        post10s_mean_windowed_accuracy: post10,
    })
}
