//! Analytic error Jacobian via per-sample backpropagation.
//!
//! Error convention is `e = target - output`, so each Jacobian row is the
//! negated gradient of one output for one sample. Rows are ordered
//! sample-major: sample 0 outputs 0..m, sample 1 outputs 0..m, ...

use nalgebra::{DMatrix, DVector};

use super::TrainingSet;
use crate::error::{Error, Result};
use crate::estimators::net::ForwardTrace;
use crate::estimators::{Activation, FeedforwardNet};

/// Gradient rows d(output_k)/d(params) for one forward pass, in the
/// flattened parameter order of [`FeedforwardNet::params_flat`].
pub(crate) fn output_jacobian(net: &FeedforwardNet, trace: &ForwardTrace) -> DMatrix<f64> {
    let p = net.param_count();
    let m = net.output_size();
    let layer_count = net.weights.len();
    let y = trace.activations.last().unwrap();
    let mut jac = DMatrix::zeros(m, p);

    for k in 0..m {
        let mut delta = match net.output_activation() {
            Activation::Linear => {
                let mut d = DVector::zeros(m);
                d[k] = 1.0;
                d
            }
            // d softmax_k / d z_j = y_k (delta_kj - y_j)
            Activation::Softmax => {
                DVector::from_fn(m, |j, _| y[k] * ((if j == k { 1.0 } else { 0.0 }) - y[j]))
            }
            Activation::Tanh => unreachable!("rejected at construction"),
        };

        let mut col_end = p;
        for l in (0..layer_count).rev() {
            let a_prev = &trace.activations[l];
            let rows = net.layer_sizes[l + 1];
            let cols = net.layer_sizes[l];
            let col_start = col_end - (rows * cols + rows);

            for r in 0..rows {
                let dr = delta[r];
                let base = col_start + r * cols;
                for c in 0..cols {
                    jac[(k, base + c)] = dr * a_prev[c];
                }
            }
            let bias_base = col_start + rows * cols;
            for r in 0..rows {
                jac[(k, bias_base + r)] = delta[r];
            }

            if l > 0 {
                let mut d_prev = net.weights[l].tr_mul(&delta);
                for i in 0..d_prev.len() {
                    let a = a_prev[i];
                    d_prev[i] *= 1.0 - a * a; // tanh'
                }
                delta = d_prev;
            }
            col_end = col_start;
        }
    }
    jac
}

/// Exact analytic Jacobian of the per-sample error vector with respect to
/// the flattened parameters, together with that error vector.
pub fn jacobian_and_error(
    net: &FeedforwardNet,
    data: &TrainingSet,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = data.len();
    let m = net.output_size();
    let p = net.param_count();
    if n == 0 {
        return Err(Error::Contract("empty training set".into()));
    }
    if data.targets[0].len() != m {
        return Err(Error::Contract(format!(
            "targets have {} outputs, network has {m}",
            data.targets[0].len()
        )));
    }
    let mut jacobian = DMatrix::zeros(n * m, p);
    let mut errors = DVector::zeros(n * m);
    for i in 0..n {
        let trace = net.forward_traced(&data.inputs[i])?;
        let y = trace.activations.last().unwrap();
        let out_jac = output_jacobian(net, &trace);
        for k in 0..m {
            errors[i * m + k] = data.targets[i][k] - y[k];
            for col in 0..p {
                jacobian[(i * m + k, col)] = -out_jac[(k, col)];
            }
        }
    }
    Ok((jacobian, errors))
}

/// Jacobian of the per-sample error vector (see [`jacobian_and_error`]).
pub fn error_jacobian(net: &FeedforwardNet, data: &TrainingSet) -> Result<DMatrix<f64>> {
    jacobian_and_error(net, data).map(|(j, _)| j)
}

/// Summed squared error of the network over a training set.
pub fn sse(net: &FeedforwardNet, data: &TrainingSet) -> Result<f64> {
    let mut total = 0.0;
    for (x, t) in data.inputs.iter().zip(&data.targets) {
        let y = net.forward(x)?;
        for (tk, yk) in t.iter().zip(&y) {
            let e = tk - yk;
            total += e * e;
        }
    }
    Ok(total)
}
