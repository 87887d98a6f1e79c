//! Sequential (incremental) training: per-sample gradient steps applied in
//! chronological order, one pass per epoch. This is the online path; epochs
//! defaults to 1 so each received batch is used exactly once.

use super::backprop::output_jacobian;
use super::{TargetKind, TrainingSet};
use crate::error::{Error, Result};
use crate::estimators::FeedforwardNet;
use crate::gait::GaitDataset;

/// Sequential training hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct SeqTrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for SeqTrainConfig {
    fn default() -> Self {
        SeqTrainConfig {
            learning_rate: 0.01,
            epochs: 1,
        }
    }
}

impl SeqTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 {
            return Err(Error::Config("negative learning rate".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counters from one sequential training call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SeqTrainReport {
    /// Per-sample updates applied to the parameters.
    pub updates_applied: usize,
    /// Updates skipped because they contained non-finite values.
    pub skipped_non_finite: usize,
}

/// One sequential pass per epoch over a gait batch.
pub fn train_sequential_dataset(
    net: &FeedforwardNet,
    batch: &GaitDataset,
    kind: TargetKind,
    config: &SeqTrainConfig,
) -> Result<(FeedforwardNet, SeqTrainReport)> {
    train_sequential(net, &TrainingSet::from_dataset(batch, kind), config)
}

/// Per-sample gradient descent in chronological order.
///
/// Each sample applies `p <- p - lr * J_i' e_i` where `J_i` is that
/// sample's error Jacobian; samples whose update is non-finite are skipped
/// and counted. Deterministic.
pub fn train_sequential(
    net: &FeedforwardNet,
    batch: &TrainingSet,
    config: &SeqTrainConfig,
) -> Result<(FeedforwardNet, SeqTrainReport)> {
    config.validate()?;
    if batch.is_empty() {
        return Err(Error::Contract("empty training batch".into()));
    }
    let m = net.output_size();
    if batch.targets[0].len() != m {
        return Err(Error::Contract(format!(
            "targets have {} outputs, network has {m}",
            batch.targets[0].len()
        )));
    }

    let mut net = net.clone();
    let p = net.param_count();
    let mut params = net.params_flat();
    let mut report = SeqTrainReport::default();

    for _ in 0..config.epochs {
        for (x, t) in batch.inputs.iter().zip(&batch.targets) {
            let trace = net.forward_traced(x)?;
            let y = trace.activations.last().unwrap();
            let jac = output_jacobian(&net, &trace);

            // J_i' e_i with J_i = d e / d p = -d y / d p.
            let mut update = vec![0.0f64; p];
            for k in 0..m {
                let e_k = t[k] - y[k];
                for col in 0..p {
                    update[col] += -jac[(k, col)] * e_k;
                }
            }
            if update.iter().any(|v| !v.is_finite()) {
                report.skipped_non_finite += 1;
                continue;
            }
            for col in 0..p {
                params[col] -= config.learning_rate * update[col];
            }
            net.set_params_flat(params.as_slice());
            report.updates_applied += 1;
        }
    }
    Ok((net, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{regression_layer_sizes, Activation};
    use crate::training::sse;

    fn small_batch() -> TrainingSet {
        let inputs: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                (0..6)
                    .map(|j| ((i * 7 + j * 3) as f64 * 0.1).sin() * 0.5)
                    .collect()
            })
            .collect();
        let targets = inputs
            .iter()
            .map(|x| vec![(x[0] + x[3]).tanh()])
            .collect();
        TrainingSet::new(inputs, targets).unwrap()
    }

    fn test_net(seed: u64) -> FeedforwardNet {
        FeedforwardNet::random(
            regression_layer_sizes(),
            Activation::Linear,
            vec![(-1.0, 1.0); 6],
            seed,
        )
        .unwrap()
    }

    #[test]
    fn zero_learning_rate_leaves_net_bit_identical() {
        let net = test_net(21);
        let config = SeqTrainConfig {
            learning_rate: 0.0,
            epochs: 1,
        };
        let (trained, report) = train_sequential(&net, &small_batch(), &config).unwrap();
        assert_eq!(net, trained);
        assert_eq!(report.updates_applied, 10);
    }

    #[test]
    fn repeated_single_sample_error_is_non_increasing() {
        let mut net = test_net(22);
        let batch = small_batch().slice(0..1);
        let config = SeqTrainConfig {
            learning_rate: 1e-3,
            epochs: 1,
        };
        let mut last = sse(&net, &batch).unwrap();
        for _ in 0..50 {
            let (next, _) = train_sequential(&net, &batch, &config).unwrap();
            let err = sse(&next, &batch).unwrap();
            assert!(err <= last + 1e-15, "error rose from {last} to {err}");
            last = err;
            net = next;
        }
    }

    #[test]
    fn one_pass_equals_composed_per_sample_updates() {
        let net = test_net(23);
        let batch = small_batch();
        let config = SeqTrainConfig::default();
        let (all_at_once, _) = train_sequential(&net, &batch, &config).unwrap();

        let mut stepped = net;
        for i in 0..batch.len() {
            let single = batch.slice(i..i + 1);
            stepped = train_sequential(&stepped, &single, &config).unwrap().0;
        }
        assert_eq!(all_at_once, stepped);
    }

    #[test]
    fn each_sample_touched_exactly_once_per_epoch() {
        let net = test_net(24);
        let batch = small_batch();
        let (_, report) = train_sequential(&net, &batch, &SeqTrainConfig::default()).unwrap();
        assert_eq!(report.updates_applied + report.skipped_non_finite, batch.len());
        let two = SeqTrainConfig {
            learning_rate: 0.01,
            epochs: 2,
        };
        let (_, report) = train_sequential(&net, &batch, &two).unwrap();
        assert_eq!(report.updates_applied, 2 * batch.len());
    }

    #[test]
    fn empty_batch_is_contract_error() {
        let net = test_net(25);
        let empty = TrainingSet::new(vec![], vec![]).unwrap();
        assert!(matches!(
            train_sequential(&net, &empty, &SeqTrainConfig::default()),
            Err(Error::Contract(_))
        ));
    }
}
