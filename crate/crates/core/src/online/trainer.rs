//! The trainer side: buffer incoming samples, retrain on schedule, ship
//! weights back.

use super::buffer::CircularBuffer;
use super::scheduler::Scheduler;
use super::wire::{self, WireMessage};
use crate::error::Result;
use crate::estimators::{regression_layer_sizes, rom_scaling, Activation, FeedforwardNet};
use crate::gait::{JointAngles, PhaseLabel};
use crate::training::{train_sequential_dataset, SeqTrainConfig, TargetKind};

/// Trainer configuration. The buffer capacity is `period * sample_rate`,
/// so the first training cycle already sees a full window.
#[derive(Debug, Clone)]
pub struct TrainerConfig {
    pub period_s: f64,
    pub sample_rate: f64,
    pub seq: SeqTrainConfig,
    /// Seed of the initial small random weights.
    pub net_seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            period_s: 20.0,
            sample_rate: 100.0,
            seq: SeqTrainConfig::default(),
            net_seed: 0,
        }
    }
}

/// One executed training cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainCycle {
    /// Time the cycle fired.
    pub t: f64,
    pub buffer_len: usize,
    /// Whether the buffer was full when snapshotted.
    pub buffer_full: bool,
    pub updates_applied: usize,
    pub skipped_non_finite: usize,
    /// Sequence number of the WEIGHTS frame this cycle emitted.
    pub seq: u32,
}

/// Receives sample batches, owns the online net, and emits weight updates.
#[derive(Debug)]
pub struct Trainer {
    config: TrainerConfig,
    buffer: CircularBuffer,
    scheduler: Scheduler,
    net: FeedforwardNet,
    next_seq: u32,
    cycles: Vec<TrainCycle>,
    batches_received: u64,
    decode_errors: u64,
    dropped_samples: u64,
    empty_cycles: u64,
    acked: Vec<u32>,
}

impl Trainer {
    /// Builds the trainer with a fresh random net. The online net is
    /// configured before any data exists, so its input scaling comes from
    /// the joint ranges of motion.
    pub fn new(config: TrainerConfig) -> Result<Self> {
        config.seq.validate()?;
        let capacity = (config.period_s * config.sample_rate).round() as usize;
        let net = FeedforwardNet::random(
            regression_layer_sizes(),
            Activation::Linear,
            rom_scaling(),
            config.net_seed,
        )?;
        Ok(Trainer {
            buffer: CircularBuffer::new(capacity.max(1)),
            scheduler: Scheduler::new(config.period_s),
            net,
            config,
            next_seq: 0,
            cycles: Vec::new(),
            batches_received: 0,
            decode_errors: 0,
            dropped_samples: 0,
            empty_cycles: 0,
            acked: Vec::new(),
        })
    }

    pub fn net(&self) -> &FeedforwardNet {
        &self.net
    }

    pub fn buffer(&self) -> &CircularBuffer {
        &self.buffer
    }

    pub fn cycles(&self) -> &[TrainCycle] {
        &self.cycles
    }

    pub fn decode_errors(&self) -> u64 {
        self.decode_errors
    }

    pub fn dropped_samples(&self) -> u64 {
        self.dropped_samples
    }

    pub fn empty_cycles(&self) -> u64 {
        self.empty_cycles
    }

    /// WEIGHTS sequence numbers acknowledged by the control side.
    pub fn acked(&self) -> &[u32] {
        &self.acked
    }

    /// Ingests one datagram. Sample batches fill the buffer; targets that
    /// are not a valid phase encoding are dropped and counted. Malformed
    /// datagrams are dropped and counted.
    pub fn on_datagram(&mut self, bytes: &[u8]) {
        match wire::decode(bytes) {
            Ok(WireMessage::SampleBatch { samples, .. }) => {
                self.batches_received += 1;
                for s in samples {
                    let mut angles: JointAngles = [0.0; 6];
                    for (dst, src) in angles.iter_mut().zip(&s.angles) {
                        *dst = *src as f64;
                    }
                    match PhaseLabel::from_value(s.target as f64) {
                        Some(phase) => self.buffer.push(angles, phase),
                        None => self.dropped_samples += 1,
                    }
                }
            }
            Ok(WireMessage::Ack { acked, .. }) => self.acked.push(acked),
            Ok(WireMessage::Weights { .. }) => self.decode_errors += 1,
            Err(_) => self.decode_errors += 1,
        }
    }

    /// Runs a training cycle when one is due: snapshots the buffer, makes
    /// one sequential pass, and returns the encoded WEIGHTS frame. A due
    /// cycle with an empty buffer is skipped and no frame is sent.
    pub fn poll(&mut self, t: f64, busy: bool) -> Option<Vec<u8>> {
        if !self.scheduler.try_fire(t, busy) {
            return None;
        }
        if self.buffer.is_empty() {
            self.empty_cycles += 1;
            return None;
        }
        let buffer_len = self.buffer.len();
        let buffer_full = self.buffer.is_full();
        let snapshot = self.buffer.snapshot(self.config.sample_rate);
        // The net is configured before any data exists; once real data is
        // in hand, fix the input scaling from the first window (the
        // untrained weights don't care) and keep it from then on.
        if self.cycles.is_empty() {
            self.net.input_scaling =
                crate::estimators::scaling_from_angles(snapshot.samples.iter().map(|s| &s.angles));
        }
        let (trained, report) = train_sequential_dataset(
            &self.net,
            &snapshot,
            TargetKind::Regression,
            &self.config.seq,
        )
        .expect("snapshot is non-empty and matches the net");
        self.net = trained;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.cycles.push(TrainCycle {
            t,
            buffer_len,
            buffer_full,
            updates_applied: report.updates_applied,
            skipped_non_finite: report.skipped_non_finite,
            seq,
        });
        Some(wire::encode(&WireMessage::Weights {
            seq,
            net: self.net.clone(),
        }))
    }

    /// Forfeits schedule slots that elapsed while a cycle was running.
    pub fn note_time(&mut self, t: f64) {
        self.scheduler.skip_missed(t);
    }
}
