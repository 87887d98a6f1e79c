//! Two-process online training architecture.
//!
//! A control loop streams (angles, ground-truth phase) samples to a trainer
//! over a binary UDP protocol; the trainer accumulates them in a circular
//! buffer, retrains the network on a fixed schedule, and ships the weights
//! back, where the control loop swaps them in atomically between ticks.
//! A deterministic single-process loopback runner steps both roles from
//! one clock for reproducible tests; true two-process UDP runners pace the
//! control loop in real time.

mod buffer;
mod control_loop;
mod loopback;
mod scheduler;
mod trainer;
mod udp;
pub mod wire;

pub use buffer::CircularBuffer;
pub use control_loop::{ControlConfig, ControlLoop, ControlStats, TraceRow};
pub use loopback::{run_loopback, LoopbackConfig, LoopbackReport};
pub use scheduler::Scheduler;
pub use trainer::{TrainCycle, Trainer, TrainerConfig};
pub use udp::{run_control_udp, run_trainer_udp, TrainerUdpStats};
