//! Network training: Levenberg-Marquardt with validation stop for the
//! offline path, per-sample sequential updates for the online path, and the
//! temporal k-fold evaluation harness.

mod backprop;
mod kfold;
mod lm;
mod sequential;

pub use backprop::{error_jacobian, jacobian_and_error, sse};
pub use kfold::{
    fold_ranges, kfold_evaluate, kfold_evaluate_with, train_network, FoldMetrics, FoldReport,
    ModelKind, Predictor,
};
pub use lm::{train_lm, train_lm_dataset, EpochRecord, LMConfig, StopReason, TrainLog};
pub use sequential::{train_sequential, train_sequential_dataset, SeqTrainConfig, SeqTrainReport};

use crate::error::{Error, Result};
use crate::gait::{GaitDataset, PhaseLabel};

/// What the network is trained to output for each sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// The scalar phase value in {-1, 0, 1}.
    Regression,
    /// One-hot class vector in `[Left, Double, Right]` order.
    OneHot,
}

impl TargetKind {
    pub fn target_for(self, phase: PhaseLabel) -> Vec<f64> {
        match self {
            TargetKind::Regression => vec![phase.value()],
            TargetKind::OneHot => {
                let mut t = vec![0.0; 3];
                let idx = match phase {
                    PhaseLabel::Left => 0,
                    PhaseLabel::Double => 1,
                    PhaseLabel::Right => 2,
                };
                t[idx] = 1.0;
                t
            }
        }
    }

    pub fn output_size(self) -> usize {
        match self {
            TargetKind::Regression => 1,
            TargetKind::OneHot => 3,
        }
    }
}

/// Paired inputs and targets in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl TrainingSet {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Contract(format!(
                "{} inputs vs {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if let (Some(x0), Some(t0)) = (inputs.first(), targets.first()) {
            if inputs.iter().any(|x| x.len() != x0.len())
                || targets.iter().any(|t| t.len() != t0.len())
            {
                return Err(Error::Contract("ragged training rows".into()));
            }
        }
        Ok(TrainingSet { inputs, targets })
    }

    pub fn from_dataset(dataset: &GaitDataset, kind: TargetKind) -> Self {
        TrainingSet {
            inputs: dataset.samples.iter().map(|s| s.angles.to_vec()).collect(),
            targets: dataset
                .samples
                .iter()
                .map(|s| kind.target_for(s.phase))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> TrainingSet {
        TrainingSet {
            inputs: self.inputs[range.clone()].to_vec(),
            targets: self.targets[range].to_vec(),
        }
    }
}
