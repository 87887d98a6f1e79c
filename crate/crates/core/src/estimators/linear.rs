//! Least-squares linear phase regression on the six joint angles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{threshold_classify, PhaseEstimate};
use crate::error::{Error, Result};
use crate::gait::{GaitDataset, JointAngles, JOINT_COUNT};

/// Affine phase regressor `y = w . angles + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRegressor {
    pub coefficients: [f64; JOINT_COUNT],
    pub bias: f64,
    /// Set when the design matrix was rank deficient and the minimum-norm
    /// solution was taken.
    pub rank_deficient: bool,
}

impl LinearRegressor {
    pub fn predict(&self, angles: &JointAngles) -> f64 {
        self.coefficients
            .iter()
            .zip(angles)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias
    }

    /// Thresholded phase decision on the regression output.
    pub fn estimate(&self, angles: &JointAngles, theta: f64) -> PhaseEstimate {
        threshold_classify(self.predict(angles), theta)
    }

    /// Sum of squared residuals on a dataset.
    pub fn residual_sse(&self, dataset: &GaitDataset) -> f64 {
        dataset
            .samples
            .iter()
            .map(|s| {
                let e = s.phase.value() - self.predict(&s.angles);
                e * e
            })
            .sum()
    }
}

/// Options for [`fit_linear_with`].
#[derive(Debug, Clone, Copy)]
pub struct LinearFitOptions {
    /// Include an intercept term. Without it the fit is the pure
    /// coefficients-only form.
    pub include_bias: bool,
}

impl Default for LinearFitOptions {
    fn default() -> Self {
        LinearFitOptions { include_bias: true }
    }
}

/// Least-squares fit of the phase value against the joint angles.
pub fn fit_linear(dataset: &GaitDataset) -> Result<LinearRegressor> {
    fit_linear_with(dataset, LinearFitOptions::default())
}

/// Least-squares fit with explicit options.
///
/// Solved through the SVD, so a rank-deficient design matrix yields the
/// minimum-norm solution (and sets the diagnostic flag) instead of failing.
pub fn fit_linear_with(dataset: &GaitDataset, opts: LinearFitOptions) -> Result<LinearRegressor> {
    let n = dataset.len();
    if n < JOINT_COUNT + 1 {
        return Err(Error::Contract(format!(
            "linear fit needs at least {} samples, got {n}",
            JOINT_COUNT + 1
        )));
    }
    let mut labels = dataset.samples.iter().map(|s| s.phase);
    let first = labels.next().unwrap();
    if labels.all(|l| l == first) {
        return Err(Error::Contract(
            "linear fit needs at least 2 distinct labels".into(),
        ));
    }

    let cols = if opts.include_bias {
        JOINT_COUNT + 1
    } else {
        JOINT_COUNT
    };
    let design = DMatrix::from_fn(n, cols, |i, j| {
        if j < JOINT_COUNT {
            dataset.samples[i].angles[j]
        } else {
            1.0
        }
    });
    let targets = DVector::from_fn(n, |i, _| dataset.samples[i].phase.value());

    let svd = design.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = sigma_max * n.max(cols) as f64 * f64::EPSILON;
    let rank = svd.rank(eps);
    let solution = svd
        .solve(&targets, eps)
        .map_err(|e| Error::Numeric(e.to_string()))?;

    let mut coefficients = [0.0; JOINT_COUNT];
    coefficients.copy_from_slice(&solution.as_slice()[..JOINT_COUNT]);
    Ok(LinearRegressor {
        coefficients,
        bias: if opts.include_bias {
            solution[JOINT_COUNT]
        } else {
            0.0
        },
        rank_deficient: rank < cols,
    })
}
