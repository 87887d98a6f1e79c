//! Feedforward network with tanh hidden layers.
//!
//! The same structure serves the offline regression and classifier nets and
//! the online net; weights live in plain dense matrices so training code can
//! flatten them into a single parameter vector.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gait::{joint_rom, JOINT_COUNT};

/// Hidden layer widths shared by every network in the pipeline.
pub const HIDDEN_LAYERS: [usize; 3] = [8, 6, 3];

/// Layer sizes of the scalar-output regression network.
pub fn regression_layer_sizes() -> Vec<usize> {
    vec![JOINT_COUNT, 8, 6, 3, 1]
}

/// Layer sizes of the three-class softmax classifier.
pub fn classifier_layer_sizes() -> Vec<usize> {
    vec![JOINT_COUNT, 8, 6, 3, 3]
}

/// Unit activation tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Linear,
    Softmax,
}

impl Activation {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Linear => 1,
            Activation::Softmax => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Linear),
            2 => Some(Activation::Softmax),
            _ => None,
        }
    }
}

/// Fully connected feedforward network.
///
/// Inputs are min/max scaled to [-1, 1] with ranges stored in the net, so a
/// trained net is self-contained. Hidden layers are tanh; the output layer
/// is linear (regression) or softmax (classification).
#[derive(Debug, Clone, PartialEq)]
pub struct FeedforwardNet {
    pub(crate) layer_sizes: Vec<usize>,
    pub(crate) weights: Vec<DMatrix<f64>>,
    pub(crate) biases: Vec<DVector<f64>>,
    pub(crate) hidden_activation: Activation,
    pub(crate) output_activation: Activation,
    pub(crate) input_scaling: Vec<(f64, f64)>,
}

/// Captured activations of one forward pass; `activations[0]` is the scaled
/// input and the last entry is the network output.
pub(crate) struct ForwardTrace {
    pub activations: Vec<DVector<f64>>,
}

impl FeedforwardNet {
    /// A zero-weight network.
    pub fn zeros(
        layer_sizes: Vec<usize>,
        output_activation: Activation,
        input_scaling: Vec<(f64, f64)>,
    ) -> Result<Self> {
        Self::validate(&layer_sizes, output_activation, &input_scaling)?;
        let weights = layer_sizes
            .windows(2)
            .map(|w| DMatrix::zeros(w[1], w[0]))
            .collect();
        let biases = layer_sizes[1..]
            .iter()
            .map(|&n| DVector::zeros(n))
            .collect();
        Ok(FeedforwardNet {
            layer_sizes,
            weights,
            biases,
            hidden_activation: Activation::Tanh,
            output_activation,
            input_scaling,
        })
    }

    /// Seeded random initialization: uniform in [-0.5, 0.5] scaled by
    /// 1/sqrt(fan-in), drawn layer by layer, weights row-major then biases.
    pub fn random(
        layer_sizes: Vec<usize>,
        output_activation: Activation,
        input_scaling: Vec<(f64, f64)>,
        seed: u64,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, output_activation, input_scaling)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..net.weights.len() {
            let fan_in = net.layer_sizes[l] as f64;
            let scale = 1.0 / fan_in.sqrt();
            let (rows, cols) = net.weights[l].shape();
            for r in 0..rows {
                for c in 0..cols {
                    net.weights[l][(r, c)] = rng.random_range(-0.5..0.5) * scale;
                }
            }
            for r in 0..rows {
                net.biases[l][r] = rng.random_range(-0.5..0.5) * scale;
            }
        }
        Ok(net)
    }

    fn validate(
        layer_sizes: &[usize],
        output_activation: Activation,
        input_scaling: &[(f64, f64)],
    ) -> Result<()> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(
                "network needs at least input and output layers".into(),
            ));
        }
        if layer_sizes.iter().any(|&n| n == 0) {
            return Err(Error::Config("zero-width layer".into()));
        }
        if input_scaling.len() != layer_sizes[0] {
            return Err(Error::Config(format!(
                "input scaling has {} entries for {} inputs",
                input_scaling.len(),
                layer_sizes[0]
            )));
        }
        if input_scaling.iter().any(|&(lo, hi)| lo >= hi) {
            return Err(Error::Config("input scaling needs min < max".into()));
        }
        if output_activation == Activation::Tanh {
            return Err(Error::Config(
                "output activation must be linear or softmax".into(),
            ));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn input_scaling(&self) -> &[(f64, f64)] {
        &self.input_scaling
    }

    /// Min/max scaling of a raw input to [-1, 1].
    fn scale_input(&self, input: &[f64]) -> DVector<f64> {
        DVector::from_fn(input.len(), |i, _| {
            let (lo, hi) = self.input_scaling[i];
            2.0 * (input[i] - lo) / (hi - lo) - 1.0
        })
    }

    /// Forward pass. Pure; fails only on an input size mismatch.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut trace = self.forward_traced(input)?;
        let out = trace.activations.pop().unwrap();
        Ok(out.as_slice().to_vec())
    }

    pub(crate) fn forward_traced(&self, input: &[f64]) -> Result<ForwardTrace> {
        if input.len() != self.input_size() {
            return Err(Error::Contract(format!(
                "input has {} features, network expects {}",
                input.len(),
                self.input_size()
            )));
        }
        let mut activations = Vec::with_capacity(self.weights.len() + 1);
        activations.push(self.scale_input(input));
        let last = self.weights.len() - 1;
        for l in 0..self.weights.len() {
            let mut z = &self.weights[l] * activations.last().unwrap() + &self.biases[l];
            if l == last {
                match self.output_activation {
                    Activation::Linear => {}
                    Activation::Softmax => softmax_in_place(&mut z),
                    Activation::Tanh => unreachable!("rejected at construction"),
                }
            } else {
                z.apply(|v| *v = v.tanh());
            }
            activations.push(z);
        }
        Ok(ForwardTrace { activations })
    }

    /// Total number of weights and biases.
    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[1] * w[0] + w[1])
            .sum()
    }

    /// Flattens all parameters: per layer, weights row-major then biases.
    pub fn params_flat(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.param_count());
        let mut k = 0;
        for l in 0..self.weights.len() {
            let (rows, cols) = self.weights[l].shape();
            for r in 0..rows {
                for c in 0..cols {
                    out[k] = self.weights[l][(r, c)];
                    k += 1;
                }
            }
            for r in 0..rows {
                out[k] = self.biases[l][r];
                k += 1;
            }
        }
        out
    }

    /// Inverse of [`params_flat`].
    pub fn set_params_flat(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count(), "parameter length mismatch");
        let mut k = 0;
        for l in 0..self.weights.len() {
            let (rows, cols) = self.weights[l].shape();
            for r in 0..rows {
                for c in 0..cols {
                    self.weights[l][(r, c)] = params[k];
                    k += 1;
                }
            }
            for r in 0..rows {
                self.biases[l][r] = params[k];
                k += 1;
            }
        }
    }

    /// True when every parameter is finite.
    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

fn softmax_in_place(z: &mut DVector<f64>) {
    let max = z.max();
    z.apply(|v| *v = (*v - max).exp());
    let sum = z.sum();
    z.apply(|v| *v /= sum);
}

/// Per-feature (min, max) over a set of angle frames; degenerate ranges are
/// widened so the scaling stays invertible.
pub fn scaling_from_angles<'a>(frames: impl Iterator<Item = &'a [f64; JOINT_COUNT]>) -> Vec<(f64, f64)> {
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); JOINT_COUNT];
    for frame in frames {
        for (j, &a) in frame.iter().enumerate() {
            ranges[j].0 = ranges[j].0.min(a);
            ranges[j].1 = ranges[j].1.max(a);
        }
    }
    for r in &mut ranges {
        if !r.0.is_finite() || !r.1.is_finite() || r.1 - r.0 < 1e-12 {
            let center = if r.0.is_finite() { r.0 } else { 0.0 };
            *r = (center - 0.5, center + 0.5);
        }
    }
    ranges
}

/// Fixed scaling from the joint ranges of motion; used when a net must be
/// configured before any data exists (the online trainer).
pub fn rom_scaling() -> Vec<(f64, f64)> {
    (0..JOINT_COUNT).map(joint_rom).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_scaling(n: usize) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0); n]
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = FeedforwardNet::zeros(regression_layer_sizes(), Activation::Linear, unit_scaling(6))
            .unwrap();
        let y = net.forward(&[0.3, -0.2, 0.8, 0.0, -0.9, 0.5]).unwrap();
        assert_eq!(y, vec![0.0]);
    }

    #[test]
    fn single_layer_identity_passthrough() {
        let mut net =
            FeedforwardNet::zeros(vec![1, 1], Activation::Linear, unit_scaling(1)).unwrap();
        net.weights[0][(0, 0)] = 1.0;
        for x in [-0.9, -0.1, 0.0, 0.4, 1.0] {
            let y = net.forward(&[x]).unwrap();
            assert!((y[0] - x).abs() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let net = FeedforwardNet::zeros(regression_layer_sizes(), Activation::Linear, unit_scaling(6))
            .unwrap();
        assert!(net.forward(&[0.0; 4]).is_err());
    }

    #[test]
    fn params_flat_roundtrip() {
        let net = FeedforwardNet::random(
            classifier_layer_sizes(),
            Activation::Softmax,
            unit_scaling(6),
            99,
        )
        .unwrap();
        let params = net.params_flat();
        assert_eq!(params.len(), net.param_count());
        let mut copy = FeedforwardNet::zeros(
            classifier_layer_sizes(),
            Activation::Softmax,
            unit_scaling(6),
        )
        .unwrap();
        copy.set_params_flat(params.as_slice());
        assert_eq!(net, copy);
    }

    #[test]
    fn random_init_is_seed_deterministic() {
        let a = FeedforwardNet::random(regression_layer_sizes(), Activation::Linear, unit_scaling(6), 7)
            .unwrap();
        let b = FeedforwardNet::random(regression_layer_sizes(), Activation::Linear, unit_scaling(6), 7)
            .unwrap();
        assert_eq!(a, b);
        let c = FeedforwardNet::random(regression_layer_sizes(), Activation::Linear, unit_scaling(6), 8)
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_scaling_rejected() {
        let mut scaling = unit_scaling(6);
        scaling[2] = (1.0, 1.0);
        assert!(FeedforwardNet::zeros(regression_layer_sizes(), Activation::Linear, scaling).is_err());
    }

    proptest! {
        #[test]
        fn softmax_outputs_sum_to_one(
            seed in 0u64..1000,
            x in proptest::collection::vec(-2.0f64..2.0, 6),
        ) {
            let net = FeedforwardNet::random(
                classifier_layer_sizes(),
                Activation::Softmax,
                vec![(-2.0, 2.0); 6],
                seed,
            )
            .unwrap();
            let y = net.forward(&x).unwrap();
            let sum: f64 = y.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(y.iter().all(|&v| v > 0.0));
        }

        /// An affine input change absorbed into the stored scaling leaves
        /// the output unchanged.
        #[test]
        fn scaling_absorbs_affine_input_changes(
            seed in 0u64..1000,
            x in proptest::collection::vec(-1.0f64..1.0, 6),
            gain in 0.1f64..5.0,
            offset in -3.0f64..3.0,
        ) {
            let base = FeedforwardNet::random(
                regression_layer_sizes(),
                Activation::Linear,
                vec![(-1.5, 1.5); 6],
                seed,
            )
            .unwrap();
            let mut rescaled = base.clone();
            for r in &mut rescaled.input_scaling {
                *r = (gain * r.0 + offset, gain * r.1 + offset);
            }
            let x2: Vec<f64> = x.iter().map(|v| gain * v + offset).collect();
            let y1 = base.forward(&x).unwrap();
            let y2 = rescaled.forward(&x2).unwrap();
            prop_assert!((y1[0] - y2[0]).abs() < 1e-10);
        }
    }
}
