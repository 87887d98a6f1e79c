//! Levenberg-Marquardt training with validation stop.
//!
//! Damped Gauss-Newton on the flattened parameter vector: each step solves
//! `(J'J + lambda I) d = J'e` and applies `p - d`, shrinking lambda on
//! accepted steps and growing it on rejected ones. Training halts at the
//! epoch cap, when lambda blows past its limit, or when the validation
//! error has gone `max_validation_failures` accepted steps without a new
//! best; the returned net is the best-validation snapshot.

use std::io::Write;

use nalgebra::{Cholesky, DVector};

use super::backprop::{jacobian_and_error, sse};
use super::{TargetKind, TrainingSet};
use crate::error::{Error, Result};
use crate::estimators::FeedforwardNet;
use crate::gait::GaitDataset;

/// Levenberg-Marquardt hyperparameters.
#[derive(Debug, Clone)]
pub struct LMConfig {
    pub lambda_init: f64,
    /// Multiplier applied to lambda when a step is rejected.
    pub lambda_up: f64,
    /// Multiplier applied to lambda when a step is accepted.
    pub lambda_down: f64,
    /// Training aborts the current run once lambda exceeds this.
    pub lambda_max: f64,
    pub max_epochs: usize,
    /// Accepted steps without a new validation best before stopping.
    pub max_validation_failures: usize,
    /// Leading fraction of the data used for training.
    pub train_fraction: f64,
    /// Fraction right after the training block used for validation stop.
    pub validation_fraction: f64,
    /// Seed for weight initialization where this config creates nets.
    pub rng_seed: u64,
}

impl Default for LMConfig {
    fn default() -> Self {
        LMConfig {
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
            lambda_max: 1e10,
            max_epochs: 1000,
            max_validation_failures: 6,
            train_fraction: 0.70,
            validation_fraction: 0.15,
            rng_seed: 0,
        }
    }
}

impl LMConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_init <= 0.0 {
            return Err(Error::Config("lambda_init must be positive".into()));
        }
        if self.lambda_up <= 1.0 {
            return Err(Error::Config("lambda_up must exceed 1".into()));
        }
        if !(0.0 < self.lambda_down && self.lambda_down < 1.0) {
            return Err(Error::Config("lambda_down must be in (0, 1)".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        let (ft, fv) = (self.train_fraction, self.validation_fraction);
        if !(0.0 < ft && ft < 1.0) || !(0.0 < fv && fv < 1.0) || ft + fv > 1.0 {
            return Err(Error::Config(
                "split fractions must lie in (0,1) and sum to at most 1".into(),
            ));
        }
        Ok(())
    }
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxEpochs,
    ValidationStop,
    LambdaLimit,
}

/// One attempted step. `epoch` counts accepted steps; rejected attempts
/// carry the epoch they were trying to reach.
#[derive(Debug, Clone, Copy)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Damping used for this attempt.
    pub lambda: f64,
    /// Training SSE after the attempted step.
    pub train_sse: f64,
    /// Validation SSE after the step; NaN for rejected attempts or when no
    /// validation split exists.
    pub val_sse: f64,
    pub accepted: bool,
}

/// Full training history plus the selected snapshot.
#[derive(Debug, Clone)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
    pub stop: StopReason,
    /// Accepted epoch with the best validation error (0 = initial net).
    pub best_val_epoch: usize,
    pub best_val_sse: f64,
    /// Training SSE of the returned network.
    pub final_train_sse: f64,
    /// Sizes of the chronological train/validation splits.
    pub train_len: usize,
    pub val_len: usize,
}

impl TrainLog {
    /// Per-sample validation MSE of the returned snapshot; NaN without a
    /// validation split.
    pub fn val_mse(&self) -> f64 {
        self.best_val_sse / self.val_len as f64
    }
}

impl TrainLog {
    pub fn accepted_epochs(&self) -> usize {
        self.records.iter().filter(|r| r.accepted).count()
    }

    /// Writes the log as CSV: epoch, lambda, train_sse, val_sse, accepted.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epoch,lambda,train_sse,val_sse,accepted")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.epoch, r.lambda, r.train_sse, r.val_sse, r.accepted as u8
            )?;
        }
        Ok(())
    }
}

/// Trains a network by Levenberg-Marquardt on a gait dataset.
pub fn train_lm_dataset(
    net: &FeedforwardNet,
    dataset: &GaitDataset,
    kind: TargetKind,
    config: &LMConfig,
) -> Result<(FeedforwardNet, TrainLog)> {
    train_lm(net, &TrainingSet::from_dataset(dataset, kind), config)
}

/// Trains a network by Levenberg-Marquardt on an explicit training set.
///
/// The set is split chronologically: the leading `train_fraction` trains,
/// the next `validation_fraction` drives the validation stop.
pub fn train_lm(
    net: &FeedforwardNet,
    data: &TrainingSet,
    config: &LMConfig,
) -> Result<(FeedforwardNet, TrainLog)> {
    config.validate()?;
    if data.len() < 10 {
        return Err(Error::Contract(format!(
            "LM training needs at least 10 samples, got {}",
            data.len()
        )));
    }

    let n = data.len();
    let n_train = ((n as f64 * config.train_fraction).floor() as usize).max(1);
    let n_val = ((n as f64 * config.validation_fraction).floor() as usize).min(n - n_train);
    let train = data.slice(0..n_train);
    let val = data.slice(n_train..n_train + n_val);

    let mut net = net.clone();
    let p = net.param_count();
    let (mut jacobian, mut errors) = jacobian_and_error(&net, &train)?;
    let mut train_sse = errors.norm_squared();
    if !train_sse.is_finite() {
        return Err(Error::Numeric("initial training error is non-finite".into()));
    }

    let val_sse_of = |net: &FeedforwardNet| -> Result<f64> {
        if val.is_empty() {
            Ok(f64::NAN)
        } else {
            sse(net, &val)
        }
    };

    let mut lambda = config.lambda_init;
    let mut best_params = net.params_flat();
    let mut best_val = val_sse_of(&net)?;
    let mut best_epoch = 0usize;
    let mut val_failures = 0usize;
    let mut records = Vec::new();
    let mut epoch = 0usize;
    let mut stop = StopReason::MaxEpochs;

    'training: while epoch < config.max_epochs {
        if jacobian.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite Jacobian entry".into()));
        }
        let jtj = jacobian.tr_mul(&jacobian);
        let gradient = jacobian.tr_mul(&errors);
        let current_params = net.params_flat();

        // Inner damping loop: retry with larger lambda until a step
        // decreases the training SSE.
        loop {
            let mut damped = jtj.clone();
            for i in 0..p {
                damped[(i, i)] += lambda;
            }
            let step = Cholesky::new(damped).map(|ch| ch.solve(&gradient));
            let attempted = epoch + 1;
            let used_lambda = lambda;

            let candidate_sse = if let Some(step) = &step {
                let candidate: DVector<f64> = &current_params - step;
                net.set_params_flat(candidate.as_slice());
                sse(&net, &train)?
            } else {
                f64::INFINITY // singular system: treat as a rejected step
            };

            if candidate_sse.is_finite() && candidate_sse < train_sse {
                epoch = attempted;
                train_sse = candidate_sse;
                lambda = (lambda * config.lambda_down).max(1e-20);
                let val_sse = val_sse_of(&net)?;
                records.push(EpochRecord {
                    epoch,
                    lambda: used_lambda,
                    train_sse,
                    val_sse,
                    accepted: true,
                });
                if !val.is_empty() {
                    if val_sse < best_val {
                        best_val = val_sse;
                        best_params = net.params_flat();
                        best_epoch = epoch;
                        val_failures = 0;
                    } else {
                        val_failures += 1;
                        if val_failures >= config.max_validation_failures {
                            stop = StopReason::ValidationStop;
                            break 'training;
                        }
                    }
                }
                let refreshed = jacobian_and_error(&net, &train)?;
                jacobian = refreshed.0;
                errors = refreshed.1;
                break;
            }

            // Rejected: restore parameters and raise the damping.
            net.set_params_flat(current_params.as_slice());
            records.push(EpochRecord {
                epoch: attempted,
                lambda: used_lambda,
                train_sse: candidate_sse,
                val_sse: f64::NAN,
                accepted: false,
            });
            lambda *= config.lambda_up;
            if lambda > config.lambda_max {
                stop = StopReason::LambdaLimit;
                break 'training;
            }
        }
    }

    // Regularization by validation stop: hand back the best-validation
    // snapshot whenever a validation split exists.
    if !val.is_empty() {
        net.set_params_flat(best_params.as_slice());
    }
    let final_train_sse = sse(&net, &train)?;
    let log = TrainLog {
        records,
        stop,
        best_val_epoch: best_epoch,
        best_val_sse: best_val,
        final_train_sse,
        train_len: n_train,
        val_len: n_val,
    };
    Ok((net, log))
}
