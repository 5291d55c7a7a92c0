//! Adam optimiser with bias correction.

use ndarray::{Array1, Array2};

use crate::nn::{DenseNet, Gradients};

/// First/second-moment state for one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentPair {
    pub weights_m: Array2<f64>,
    pub weights_v: Array2<f64>,
    pub bias_m: Array1<f64>,
    pub bias_v: Array1<f64>,
}

/// Adam state bound to one network's shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Number of steps taken so far.
    pub t: u64,
    pub moments: Vec<MomentPair>,
}

impl Adam {
    /// Fresh state (zero moments) for `net` with standard betas
    /// (0.9, 0.999) and epsilon 1e-8.
    pub fn new(net: &DenseNet, learning_rate: f64) -> Adam {
        let moments = net
            .layers()
            .iter()
            .map(|l| MomentPair {
                weights_m: Array2::zeros(l.weights.dim()),
                weights_v: Array2::zeros(l.weights.dim()),
                bias_m: Array1::zeros(l.bias.len()),
                bias_v: Array1::zeros(l.bias.len()),
            })
            .collect();
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1.0e-8,
            t: 0,
            moments,
        }
    }

    /// Apply one update. Gradient shapes must match the network.
    pub fn step(&mut self, net: &mut DenseNet, grads: &Gradients) {
        assert_eq!(
            grads.layers.len(),
            self.moments.len(),
            "gradient/optimiser layer count mismatch"
        );
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let lr = self.learning_rate;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);

        for ((layer, grad), mom) in net
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.moments)
        {
            ndarray::Zip::from(&mut layer.weights)
                .and(&mut mom.weights_m)
                .and(&mut mom.weights_v)
                .and(&grad.weights)
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + eps);
                });
            ndarray::Zip::from(&mut layer.bias)
                .and(&mut mom.bias_m)
                .and(&mut mom.bias_v)
                .and(&grad.bias)
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + eps);
                });
        }
    }
}
