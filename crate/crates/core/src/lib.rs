//! Gait phase estimation toolkit.
//!
//! Estimates the walking phase (left stance / double stance / right stance)
//! of a lower-limb exoskeleton from its six sagittal joint angles, blends
//! gravity-compensation controllers across stance transitions, and retrains
//! the estimator online from a live sample stream.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`gait`] — domain types, a deterministic synthetic gait generator and
//!   CSV persistence
//! - [`estimators`] — linear regression and feedforward-network estimators
//!   plus the threshold decision rule
//! - [`training`] — Levenberg-Marquardt training with validation stop,
//!   per-sample sequential training and the temporal k-fold harness
//! - [`control`] — gravity statics for the left/right grounded-chain models
//!   and the FSM / smoothed-FSM / blend switching strategies
//! - [`metrics`] — RMSE, accuracy, monotonicity deviation and sliding-window
//!   online metrics
//! - [`online`] — the two-process control/trainer architecture: circular
//!   buffer, training scheduler, binary UDP wire protocol and runners

pub mod control;
pub mod error;
pub mod estimators;
pub mod gait;
pub mod metrics;
pub mod online;
pub mod training;

pub use error::{Error, Result};
pub use estimators::{FeedforwardNet, LinearRegressor, PhaseEstimate};
pub use gait::{GaitDataset, GaitSample, JointAngles, PhaseLabel, SpeedProfile, JOINT_COUNT};
