//! Phase estimators: linear regression, feedforward-network regression and
//! a feedforward-network classifier, plus the threshold decision rule that
//! turns a continuous regression output into a stance label.

mod linear;
pub(crate) mod net;

pub use linear::{fit_linear, fit_linear_with, LinearFitOptions, LinearRegressor};
pub use net::{
    classifier_layer_sizes, regression_layer_sizes, rom_scaling, scaling_from_angles, Activation,
    FeedforwardNet, HIDDEN_LAYERS,
};

use crate::error::{Error, Result};
use crate::gait::{JointAngles, PhaseLabel};

/// Default decision band half-width around zero.
pub const DEFAULT_THETA: f64 = 0.1;

/// Raw estimator output backing a phase decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawOutput {
    /// Continuous regression output.
    Scalar(f64),
    /// Class scores in `[Left, Double, Right]` order.
    Scores([f64; 3]),
}

/// A phase decision together with the raw output it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    pub raw: RawOutput,
    pub label: PhaseLabel,
    /// Numeric encoding of `label`.
    pub value: f64,
}

/// Applies the three-band threshold rule to a regression output.
///
/// Left below `-theta`, Right above `+theta`, Double inside the closed
/// middle band (both band edges map to Double).
pub fn threshold_classify(y_reg: f64, theta: f64) -> PhaseEstimate {
    debug_assert!(theta > 0.0, "threshold must be positive");
    let label = if y_reg < -theta {
        PhaseLabel::Left
    } else if y_reg > theta {
        PhaseLabel::Right
    } else {
        PhaseLabel::Double
    };
    PhaseEstimate {
        raw: RawOutput::Scalar(y_reg),
        label,
        value: label.value(),
    }
}

/// Classifies with a softmax network: argmax over the three class scores.
///
/// Ties are broken toward Double, then Left.
pub fn classify(net: &FeedforwardNet, angles: &JointAngles) -> Result<PhaseEstimate> {
    if net.output_size() != 3 || net.output_activation() != Activation::Softmax {
        return Err(Error::Contract(
            "classify requires a 3-output softmax network".into(),
        ));
    }
    let out = net.forward(angles)?;
    let scores = [out[0], out[1], out[2]];
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Preference order among exact ties: Double, Left, Right.
    let label = [(1, PhaseLabel::Double), (0, PhaseLabel::Left), (2, PhaseLabel::Right)]
        .iter()
        .find(|(i, _)| scores[*i] == max)
        .map(|&(_, l)| l)
        .expect("scores contain their own maximum");
    Ok(PhaseEstimate {
        raw: RawOutput::Scores(scores),
        label,
        value: label.value(),
    })
}

/// Argmax decision on explicit class scores; same tie-break as [`classify`].
pub fn classify_scores(scores: [f64; 3]) -> PhaseEstimate {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let label = [(1, PhaseLabel::Double), (0, PhaseLabel::Left), (2, PhaseLabel::Right)]
        .iter()
        .find(|(i, _)| scores[*i] == max)
        .map(|&(_, l)| l)
        .expect("scores contain their own maximum");
    PhaseEstimate {
        raw: RawOutput::Scores(scores),
        label,
        value: label.value(),
    }
}
