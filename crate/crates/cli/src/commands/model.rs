//! Model files: linear regressors as JSON, networks as `.nnw` frames.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gpk_core::estimators::{classify, threshold_classify, Activation, LinearRegressor};
use gpk_core::gait::{JointAngles, PhaseLabel};
use gpk_core::online::wire;
use gpk_core::FeedforwardNet;

/// A loaded phase estimator.
pub enum Model {
    Linear(LinearRegressor),
    Net(FeedforwardNet),
}

impl Model {
    /// Loads by extension: `.json` linear, `.nnw` network.
    pub fn load(path: &Path) -> Result<Model> {
        if !path.exists() {
            bail!("model file {} does not exist", path.display());
        }
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let linear: LinearRegressor = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                Ok(Model::Linear(linear))
            }
            Some("nnw") => Ok(Model::Net(
                wire::load_net(path).with_context(|| format!("loading {}", path.display()))?,
            )),
            other => bail!(
                "unknown model extension {other:?} (expected .json or .nnw) in {}",
                path.display()
            ),
        }
    }

    /// Saves into `dir` and returns the file path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        match self {
            Model::Linear(linear) => {
                let path = dir.join("model.json");
                std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(linear)?))
                    .with_context(|| format!("writing {}", path.display()))?;
                Ok(path)
            }
            Model::Net(net) => {
                let path = dir.join("model.nnw");
                wire::save_net(net, &path)
                    .with_context(|| format!("writing {}", path.display()))?;
                Ok(path)
            }
        }
    }

    /// Numeric estimate and label decision for one frame. Regression
    /// models classify through the threshold rule; a softmax net uses its
    /// argmax.
    pub fn predict(&self, angles: &JointAngles, theta: f64) -> (f64, PhaseLabel) {
        match self {
            Model::Linear(linear) => {
                let y = linear.predict(angles);
                (y, threshold_classify(y, theta).label)
            }
            Model::Net(net) if net.output_activation() == Activation::Softmax => {
                let est = classify(net, angles).expect("matching input size");
                (est.value, est.label)
            }
            Model::Net(net) => {
                let y = net.forward(angles).expect("matching input size")[0];
                (y, threshold_classify(y, theta).label)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Model::Linear(l) => format!(
                "linear regressor (bias {:.4}{})",
                l.bias,
                if l.rank_deficient { ", rank deficient" } else { "" }
            ),
            Model::Net(net) => format!(
                "feedforward net {:?} ({})",
                net.layer_sizes(),
                match net.output_activation() {
                    Activation::Softmax => "classifier",
                    _ => "regression",
                }
            ),
        }
    }
}
