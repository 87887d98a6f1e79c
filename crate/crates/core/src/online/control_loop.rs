//! The 100 Hz control-side loop: estimate, control, stream, swap weights.

use super::wire::{self, WireMessage, WireSample};
use crate::control::{BlendWeights, Controller, ControllerConfig, ExoParams, Strategy};
use crate::estimators::{threshold_classify, FeedforwardNet};
use crate::gait::{GaitSample, PhaseLabel};

/// Control-loop configuration.
#[derive(Debug, Clone)]
pub struct ControlConfig {
    pub sample_rate: f64,
    /// Samples per SAMPLE_BATCH datagram.
    pub batch_len: usize,
    pub strategy: Strategy,
    pub controller: ControllerConfig,
    pub params: ExoParams,
    /// Shadow mode: the network output is recorded but never drives the
    /// assistance; the controller runs on ground truth. In closed-loop
    /// mode the estimate drives the Blend strategy.
    pub shadow: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            sample_rate: 100.0,
            batch_len: 50,
            strategy: Strategy::Blend,
            controller: ControllerConfig::default(),
            params: ExoParams::default(),
            shadow: true,
        }
    }
}

/// One recorded control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// Raw network output at this tick.
    pub estimate: f64,
    /// Thresholded estimate.
    pub label: PhaseLabel,
    /// Generation of the network that produced the estimate; bumps by one
    /// per applied weight update.
    pub generation: u64,
    pub weights: BlendWeights,
    pub torques: [f64; 6],
}

/// Counters exposed after a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ControlStats {
    pub ticks: u64,
    pub batches_sent: u64,
    pub updates_applied: u64,
    pub decode_errors: u64,
    /// Ticks where the estimator failed or went non-finite and the
    /// previous estimate was held.
    pub estimate_holds: u64,
}

/// Owns the current network and the controller; single-threaded. Weight
/// updates arrive as datagrams and are swapped in whole between ticks, so a
/// tick never sees a partially applied net.
#[derive(Debug)]
pub struct ControlLoop {
    config: ControlConfig,
    net: FeedforwardNet,
    generation: u64,
    controller: Controller,
    pending: Vec<WireSample>,
    next_seq: u32,
    last_estimate: f64,
    tick_no: u64,
    stats: ControlStats,
    trace: Vec<TraceRow>,
}

impl ControlLoop {
    pub fn new(config: ControlConfig, initial_net: FeedforwardNet) -> Self {
        let controller = Controller::new(config.strategy, config.controller, config.params);
        let batch_len = config.batch_len;
        ControlLoop {
            config,
            net: initial_net,
            generation: 0,
            controller,
            pending: Vec::with_capacity(batch_len),
            next_seq: 0,
            last_estimate: 0.0,
            tick_no: 0,
            stats: ControlStats::default(),
            trace: Vec::new(),
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn stats(&self) -> ControlStats {
        self.stats
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<TraceRow> {
        self.trace
    }

    /// Runs one 100 Hz tick: estimates the phase with the current net,
    /// steps the controller, and queues the sample for the trainer.
    /// Returns an encoded SAMPLE_BATCH whenever one fills up. Estimator
    /// trouble never interrupts the loop; the previous estimate is held.
    pub fn tick(&mut self, sample: &GaitSample, truth_phi: f64) -> (TraceRow, Option<Vec<u8>>) {
        let dt = 1.0 / self.config.sample_rate;
        let t = self.tick_no as f64 * dt;
        self.tick_no += 1;
        self.stats.ticks += 1;

        match self.net.forward(&sample.angles) {
            Ok(y) if y[0].is_finite() => self.last_estimate = y[0],
            _ => self.stats.estimate_holds += 1,
        }
        let estimate = self.last_estimate;
        let label = threshold_classify(estimate, self.config.controller.theta).label;

        // Shadow mode never lets the estimate into the assistance; in
        // closed-loop mode it drives the continuous blend, while the
        // switching strategies stay on the ground-truth gate.
        let phi_control = if !self.config.shadow && self.config.strategy == Strategy::Blend {
            estimate
        } else {
            truth_phi
        };
        let (torque, weights) = self.controller.step(phi_control, &sample.angles, dt);

        let row = TraceRow {
            t,
            estimate,
            label,
            generation: self.generation,
            weights,
            torques: torque.0,
        };
        self.trace.push(row);

        // Ground-truth target (the FSR-equivalent label) rides along with
        // the angles for the trainer.
        let mut angles = [0.0f32; 6];
        for (dst, src) in angles.iter_mut().zip(&sample.angles) {
            *dst = *src as f32;
        }
        self.pending.push(WireSample {
            angles,
            target: sample.phase.value() as f32,
        });
        let datagram = if self.pending.len() >= self.config.batch_len {
            let samples = std::mem::take(&mut self.pending);
            let seq = self.next_seq;
            self.next_seq += 1;
            self.stats.batches_sent += 1;
            Some(wire::encode(&WireMessage::SampleBatch { seq, samples }))
        } else {
            None
        };
        (row, datagram)
    }

    /// Feeds a received datagram. A valid WEIGHTS frame with matching input
    /// width replaces the whole net and returns an encoded ACK; anything
    /// else is dropped and counted.
    pub fn apply_datagram(&mut self, bytes: &[u8]) -> Option<Vec<u8>> {
        match wire::decode(bytes) {
            Ok(WireMessage::Weights { seq, net }) => {
                if net.input_size() != self.net.input_size() || !net.is_finite() {
                    self.stats.decode_errors += 1;
                    return None;
                }
                self.net = net;
                self.generation += 1;
                self.stats.updates_applied += 1;
                let ack_seq = self.next_seq;
                self.next_seq += 1;
                Some(wire::encode(&WireMessage::Ack {
                    seq: ack_seq,
                    acked: seq,
                }))
            }
            Ok(_) => {
                self.stats.decode_errors += 1;
                None
            }
            Err(_) => {
                self.stats.decode_errors += 1;
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{regression_layer_sizes, rom_scaling, Activation};
    use crate::gait::{generate_gait_with_phase, SpeedProfile};

    fn test_net(seed: u64) -> FeedforwardNet {
        FeedforwardNet::random(
            regression_layer_sizes(),
            Activation::Linear,
            rom_scaling(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn batches_fill_every_half_second() {
        let (ds, phi) =
            generate_gait_with_phase(&SpeedProfile::steady(3.5, 2.0).unwrap(), 1, 0.0).unwrap();
        let mut cl = ControlLoop::new(ControlConfig::default(), test_net(1));
        let mut batches = 0;
        for (s, &p) in ds.samples.iter().zip(&phi) {
            if cl.tick(s, p).1.is_some() {
                batches += 1;
            }
        }
        assert_eq!(batches, 4); // 200 ticks / 50 per batch
        assert_eq!(cl.stats().batches_sent, 4);
    }

    #[test]
    fn truncated_weights_never_change_the_net() {
        let (ds, phi) =
            generate_gait_with_phase(&SpeedProfile::steady(2.0, 1.0).unwrap(), 2, 0.0).unwrap();
        let mut cl = ControlLoop::new(ControlConfig::default(), test_net(2));
        let update = wire::encode(&wire::WireMessage::Weights {
            seq: 0,
            net: test_net(3),
        });
        for (i, (s, &p)) in ds.samples.iter().zip(&phi).enumerate() {
            cl.tick(s, p);
            // Inject progressively truncated frames mid-run.
            if i % 10 == 5 {
                let cut = update.len() - 1 - (i % update.len());
                assert!(cl.apply_datagram(&update[..cut]).is_none());
            }
        }
        assert_eq!(cl.generation(), 0);
        assert!(cl.trace().iter().all(|r| r.generation == 0));
        assert!(cl.stats().decode_errors > 0);
    }

    #[test]
    fn applied_update_bumps_generation_and_acks() {
        let (ds, phi) =
            generate_gait_with_phase(&SpeedProfile::steady(2.0, 1.0).unwrap(), 4, 0.0).unwrap();
        let mut cl = ControlLoop::new(ControlConfig::default(), test_net(4));
        for (s, &p) in ds.samples.iter().zip(&phi).take(50) {
            cl.tick(s, p);
        }
        let update = wire::encode(&wire::WireMessage::Weights {
            seq: 17,
            net: test_net(5),
        });
        let ack = cl.apply_datagram(&update).expect("ack for valid weights");
        match wire::decode(&ack).unwrap() {
            wire::WireMessage::Ack { acked, .. } => assert_eq!(acked, 17),
            other => panic!("expected ack, got {other:?}"),
        }
        for (s, &p) in ds.samples.iter().zip(&phi).skip(50) {
            cl.tick(s, p);
        }
        assert_eq!(cl.generation(), 1);
        let boundaries = cl
            .trace()
            .windows(2)
            .filter(|w| w[1].generation != w[0].generation)
            .count();
        assert_eq!(boundaries, 1);
    }

    #[test]
    fn shadow_and_closed_loop_fsm_traces_are_identical() {
        let (ds, phi) =
            generate_gait_with_phase(&SpeedProfile::steady(3.0, 3.0).unwrap(), 6, 0.01).unwrap();
        let mk = |shadow| ControlConfig {
            strategy: Strategy::Fsm,
            shadow,
            ..ControlConfig::default()
        };
        let mut shadowed = ControlLoop::new(mk(true), test_net(6));
        let mut closed = ControlLoop::new(mk(false), test_net(6));
        for (s, &p) in ds.samples.iter().zip(&phi) {
            let (a, _) = shadowed.tick(s, p);
            let (b, _) = closed.tick(s, p);
            assert_eq!(a.torques, b.torques);
        }
    }

    #[test]
    fn closed_loop_blend_uses_the_estimate() {
        let (ds, phi) =
            generate_gait_with_phase(&SpeedProfile::steady(3.0, 2.0).unwrap(), 7, 0.01).unwrap();
        let mk = |shadow| ControlConfig {
            strategy: Strategy::Blend,
            shadow,
            ..ControlConfig::default()
        };
        // A net with nonzero output so estimate != truth.
        let mut shadowed = ControlLoop::new(mk(true), test_net(8));
        let mut closed = ControlLoop::new(mk(false), test_net(8));
        let mut differs = false;
        for (s, &p) in ds.samples.iter().zip(&phi) {
            let (a, _) = shadowed.tick(s, p);
            let (b, _) = closed.tick(s, p);
            if a.weights != b.weights {
                differs = true;
            }
        }
        assert!(differs, "closed-loop blend should follow the estimate");
    }
}
