//! True two-process mode over UDP sockets.
//!
//! The control runner never blocks on the network: it drains its socket
//! between ticks and a missing trainer only means no weight updates ever
//! arrive. Sample batches are fire-and-forget; weight updates are
//! acknowledged and retried once.

use std::net::UdpSocket;
use std::time::{Duration, Instant};

use super::control_loop::{ControlConfig, ControlLoop, ControlStats, TraceRow};
use super::trainer::{TrainCycle, Trainer, TrainerConfig};
use crate::error::Result;
use crate::estimators::FeedforwardNet;
use crate::gait::GaitDataset;
use crate::metrics::{StreamMetrics, StreamPoint};

const RECV_BUF: usize = 65536;

/// Runs the control role over UDP, replaying a dataset at the configured
/// rate. With `realtime` the loop paces itself to wall-clock 100 Hz;
/// otherwise it free-runs (useful for tests).
pub fn run_control_udp(
    dataset: &GaitDataset,
    truth_phi: &[f64],
    config: ControlConfig,
    initial_net: FeedforwardNet,
    bind: &str,
    trainer_addr: &str,
    window_s: f64,
    realtime: bool,
) -> Result<(Vec<TraceRow>, Vec<StreamPoint>, ControlStats)> {
    let socket = UdpSocket::bind(bind)?;
    socket.set_nonblocking(true)?;
    let mut control = ControlLoop::new(config, initial_net);
    let mut stream = StreamMetrics::new(window_s, dataset.sample_rate)?;
    let mut metrics = Vec::with_capacity(dataset.len());
    let mut buf = [0u8; RECV_BUF];
    let dt = Duration::from_secs_f64(1.0 / dataset.sample_rate);
    let start = Instant::now();

    for (k, (sample, &phi)) in dataset.samples.iter().zip(truth_phi).enumerate() {
        if realtime {
            let target = start + dt * k as u32;
            while Instant::now() < target {
                std::thread::sleep(Duration::from_micros(200));
            }
        }
        // Drain pending datagrams; weight swaps happen here, between ticks.
        loop {
            match socket.recv_from(&mut buf) {
                Ok((n, src)) => {
                    if let Some(ack) = control.apply_datagram(&buf[..n]) {
                        let _ = socket.send_to(&ack, src);
                    }
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => break,
                Err(_) => break,
            }
        }
        let (row, batch) = control.tick(sample, phi);
        metrics.push(stream.push(row.estimate, row.label, sample.phase));
        if let Some(batch) = batch {
            // Fire and forget; a dead trainer must not stall the loop.
            let _ = socket.send_to(&batch, trainer_addr);
        }
    }
    let stats = control.stats();
    Ok((control.into_trace(), metrics, stats))
}

/// Counters from a trainer run.
#[derive(Debug, Clone)]
pub struct TrainerUdpStats {
    pub cycles: Vec<TrainCycle>,
    pub weights_sent: u64,
    pub retries: u64,
    pub unacknowledged: u64,
    pub decode_errors: u64,
    pub dropped_samples: u64,
}

/// Runs the trainer role over UDP for a fixed duration.
///
/// Weight frames are sent to `control_addr` and wait up to 100 ms for an
/// acknowledgment, with one retry; sample batches keep being ingested
/// while waiting.
pub fn run_trainer_udp(
    config: TrainerConfig,
    bind: &str,
    control_addr: &str,
    duration_s: f64,
) -> Result<TrainerUdpStats> {
    let socket = UdpSocket::bind(bind)?;
    socket.set_read_timeout(Some(Duration::from_millis(20)))?;
    let mut trainer = Trainer::new(config)?;
    let mut buf = [0u8; RECV_BUF];
    let start = Instant::now();
    let mut weights_sent = 0u64;
    let mut retries = 0u64;
    let mut unacknowledged = 0u64;

    while start.elapsed().as_secs_f64() < duration_s {
        match socket.recv_from(&mut buf) {
            Ok((n, _)) => trainer.on_datagram(&buf[..n]),
            Err(e)
                if e.kind() == std::io::ErrorKind::WouldBlock
                    || e.kind() == std::io::ErrorKind::TimedOut => {}
            Err(_) => {}
        }
        let t = start.elapsed().as_secs_f64();
        if let Some(frame) = trainer.poll(t, false) {
            let seq = trainer.cycles().last().expect("cycle just ran").seq;
            let mut acked = false;
            for attempt in 0..2 {
                if socket.send_to(&frame, control_addr).is_err() {
                    log::warn!("weight send failed (attempt {attempt})");
                }
                weights_sent += 1;
                let deadline = Instant::now() + Duration::from_millis(100);
                while Instant::now() < deadline {
                    if let Ok((n, _)) = socket.recv_from(&mut buf) {
                        trainer.on_datagram(&buf[..n]);
                    }
                    if trainer.acked().contains(&seq) {
                        acked = true;
                        break;
                    }
                }
                if acked {
                    break;
                }
                if attempt == 0 {
                    retries += 1;
                }
            }
            if !acked {
                unacknowledged += 1;
                log::warn!("weight update {seq} never acknowledged");
            }
            trainer.note_time(start.elapsed().as_secs_f64());
        }
    }
    Ok(TrainerUdpStats {
        cycles: trainer.cycles().to_vec(),
        weights_sent,
        retries,
        unacknowledged,
        decode_errors: trainer.decode_errors(),
        dropped_samples: trainer.dropped_samples(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Strategy;
    use crate::estimators::{regression_layer_sizes, rom_scaling, Activation};
    use crate::gait::{generate_gait_with_phase, SpeedProfile};

    fn initial_net(seed: u64) -> FeedforwardNet {
        FeedforwardNet::random(
            regression_layer_sizes(),
            Activation::Linear,
            rom_scaling(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn control_completes_with_trainer_absent() {
        let (ds, phi) =
            generate_gait_with_phase(&SpeedProfile::steady(3.0, 3.0).unwrap(), 1, 0.01).unwrap();
        // 127.0.0.1:9 is the discard port; nothing is listening there.
        let (trace, metrics, stats) = run_control_udp(
            &ds,
            &phi,
            ControlConfig::default(),
            initial_net(0),
            "127.0.0.1:0",
            "127.0.0.1:9",
            5.0,
            false,
        )
        .unwrap();
        assert_eq!(trace.len(), ds.len());
        assert_eq!(metrics.len(), ds.len());
        assert_eq!(stats.updates_applied, 0);
        assert!(trace.iter().all(|r| r.generation == 0));
    }

    #[test]
    fn two_role_exchange_applies_updates() {
        let ctrl_sock = UdpSocket::bind("127.0.0.1:0").unwrap();
        let train_sock = UdpSocket::bind("127.0.0.1:0").unwrap();
        let ctrl_addr = ctrl_sock.local_addr().unwrap().to_string();
        let train_addr = train_sock.local_addr().unwrap().to_string();
        drop(ctrl_sock);
        drop(train_sock);

        let (ds, phi) =
            generate_gait_with_phase(&SpeedProfile::steady(3.5, 3.0).unwrap(), 2, 0.02).unwrap();

        // The trainer stops before the control run ends so every weight
        // update it emits can still be acknowledged.
        let trainer_handle = {
            let train_addr = train_addr.clone();
            let ctrl_addr = ctrl_addr.clone();
            std::thread::spawn(move || {
                run_trainer_udp(
                    TrainerConfig {
                        period_s: 0.5,
                        net_seed: 11,
                        ..TrainerConfig::default()
                    },
                    &train_addr,
                    &ctrl_addr,
                    2.4,
                )
                .unwrap()
            })
        };
        let config = ControlConfig {
            strategy: Strategy::Blend,
            ..ControlConfig::default()
        };
        let (trace, _, stats) = run_control_udp(
            &ds,
            &phi,
            config,
            initial_net(11),
            &ctrl_addr,
            &train_addr,
            5.0,
            true, // real-time pacing so scheduler time aligns with sample time
        )
        .unwrap();
        let trainer_stats = trainer_handle.join().unwrap();

        assert!(trainer_stats.weights_sent > 0, "trainer never trained");
        assert!(stats.updates_applied > 0, "control never applied weights");
        assert!(trace.iter().any(|r| r.generation > 0));
        assert_eq!(trainer_stats.unacknowledged, 0);
    }
}
