//! Dense feed-forward networks with reverse-mode gradients.
//!
//! Everything is `f64` and batch-first: inputs are `(batch, features)`
//! matrices, weights are `(out, in)`. Forward passes are pure; training
//! callers run [`DenseNet::forward_trace`] and feed the trace to
//! [`DenseNet::backward`] together with the gradient of the loss with
//! respect to the network output.

pub mod adam;
pub mod checkpoint;

pub use adam::Adam;
pub use checkpoint::{read_net, write_net};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::NetError;

/// Elementwise nonlinearity of one layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative given pre-activation `z` and activation `a = f(z)`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Identity => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Activation, NetError> {
        match tag {
            0 => Ok(Activation::Relu),
            1 => Ok(Activation::Tanh),
            2 => Ok(Activation::Identity),
            other => Err(NetError::BadActivation(other)),
        }
    }
}

/// One dense layer: `a = f(x W^T + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// `(out, in)` weight matrix.
    pub weights: Array2<f64>,
    /// `(out,)` bias vector.
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }
}

/// A stack of dense layers.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

/// Intermediate values kept from a forward pass for backpropagation.
pub struct ForwardTrace {
    /// Input to each layer (the first entry is the network input).
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of each layer.
    pre: Vec<Array2<f64>>,
    /// Activations of each layer; the last entry is the network output.
    post: Vec<Array2<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Array2<f64> {
        self.post.last().expect("trace always has layers")
    }
}

/// Parameter gradients, shaped like the network.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Clone, Debug)]
pub struct LayerGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseNet {
    /// Build from explicit layers; dimensions must chain.
    pub fn from_layers(layers: Vec<Layer>) -> Result<DenseNet, NetError> {
        if layers.is_empty() {
            return Err(NetError::Truncated);
        }
        for i in 1..layers.len() {
            if layers[i].input_dim() != layers[i - 1].output_dim() {
                return Err(NetError::BrokenChain {
                    layer: i,
                    takes: layers[i].input_dim(),
                    produces: layers[i - 1].output_dim(),
                });
            }
        }
        Ok(DenseNet { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").output_dim()
    }

    /// Layer widths from input to output, e.g. `[77, 64, 64, 16]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(Layer::output_dim));
        d
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// All parameters flattened (weights row-major, then bias, per layer).
    /// Used by finite-difference checks.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    /// Inverse of [`DenseNet::params_flat`].
    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<(), NetError> {
        if flat.len() != self.param_count() {
            return Err(NetError::DimMismatch {
                expected: self.param_count(),
                got: flat.len(),
            });
        }
        let mut at = 0;
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = flat[at];
                at += 1;
            }
            for b in l.bias.iter_mut() {
                *b = flat[at];
                at += 1;
            }
        }
        Ok(())
    }

    /// Pure forward pass over a batch.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, NetError> {
        if x.ncols() != self.input_dim() {
            return Err(NetError::DimMismatch {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let mut a = x.to_owned();
        for layer in &self.layers {
            let mut z = a.dot(&layer.weights.t());
            z += &layer.bias;
            z.mapv_inplace(|v| layer.activation.apply(v));
            a = z;
        }
        Ok(a)
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        if x.len() != self.input_dim() {
            return Err(NetError::DimMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let batch = Array2::from_shape_vec((1, x.len()), x.to_vec())
            .expect("shape matches by construction");
        let out = self.forward_batch(batch.view())?;
        Ok(out.row(0).to_vec())
    }

    /// Forward pass that records everything backpropagation needs.
    pub fn forward_trace(&self, x: ArrayView2<f64>) -> Result<ForwardTrace, NetError> {
        if x.ncols() != self.input_dim() {
            return Err(NetError::DimMismatch {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for layer in &self.layers {
            inputs.push(a.clone());
            let mut z = a.dot(&layer.weights.t());
            z += &layer.bias;
            pre.push(z.clone());
            z.mapv_inplace(|v| layer.activation.apply(v));
            post.push(z.clone());
            a = z;
        }
        Ok(ForwardTrace { inputs, pre, post })
    }

    /// Reverse-mode pass. `output_grad` is dLoss/dOutput for the batch used
    /// in the trace (any scaling, e.g. `1/batch`, is the caller's business).
    /// Returns parameter gradients summed over the batch and dLoss/dInput.
    pub fn backward(&self, trace: &ForwardTrace, output_grad: &Array2<f64>) -> (Gradients, Array2<f64>) {
        assert_eq!(
            output_grad.dim(),
            trace.output().dim(),
            "output gradient shape must match the traced output"
        );
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = output_grad.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            // dLoss/dZ = dLoss/dA * f'(z)
            let z = &trace.pre[idx];
            let a = &trace.post[idx];
            ndarray::Zip::from(&mut g).and(z).and(a).for_each(|gi, &zi, &ai| {
                *gi *= layer.activation.derivative(zi, ai);
            });
            let dw = g.t().dot(&trace.inputs[idx]);
            let db = g.sum_axis(Axis(0));
            grads.push(LayerGrad {
                weights: dw,
                bias: db,
            });
            g = g.dot(&layer.weights);
        }
        grads.reverse();
        (Gradients { layers: grads }, g)
    }
}

/// Polyak-average `online` into `target`: `t = tau * o + (1 - tau) * t`.
pub fn soft_update(target: &mut DenseNet, online: &DenseNet, tau: f64) {
    assert_eq!(
        target.dims(),
        online.dims(),
        "soft update requires identical architectures"
    );
    for (tl, ol) in target.layers.iter_mut().zip(&online.layers) {
        ndarray::Zip::from(&mut tl.weights)
            .and(&ol.weights)
            .for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
        ndarray::Zip::from(&mut tl.bias)
            .and(&ol.bias)
            .for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
    }
}

/// Initialise a network in the style customary for deterministic
/// policy-gradient agents: hidden layers uniform in
/// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, the output layer uniform in
/// `[-3e-3, 3e-3]` so early outputs stay near zero.
pub fn init_policy_style(
    input: usize,
    hidden: &[usize],
    output: usize,
    hidden_activation: Activation,
    output_activation: Activation,
    rng: &mut ChaCha8Rng,
) -> DenseNet {
    assert!(input > 0 && output > 0, "layer widths must be positive");
    let mut layers = Vec::with_capacity(hidden.len() + 1);
    let mut fan_in = input;
    for &width in hidden {
        assert!(width > 0, "layer widths must be positive");
        let bound = 1.0 / (fan_in as f64).sqrt();
        layers.push(random_layer(width, fan_in, bound, hidden_activation, rng));
        fan_in = width;
    }
    layers.push(random_layer(output, fan_in, 3.0e-3, output_activation, rng));
    DenseNet::from_layers(layers).expect("dims chain by construction")
}

fn random_layer(
    out: usize,
    inp: usize,
    bound: f64,
    activation: Activation,
    rng: &mut ChaCha8Rng,
) -> Layer {
    let weights =
        Array2::from_shape_fn((out, inp), |_| rng.gen_range(-bound..=bound));
    let bias = Array1::from_shape_fn(out, |_| rng.gen_range(-bound..=bound));
    Layer {
        weights,
        bias,
        activation,
    }
}
