//! Fully connected networks with hand-written backpropagation.
//!
//! A layer computes `z = W x + b`, `h = act(z)`. Backward walks the layers in
//! reverse, carrying `dL/dh` and multiplying by `diag(act'(z)) W` at each step.
//! Forward and backward work on one sample at a time; mini-batching is the
//! caller's job (average per-sample gradients).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Relu,
    Identity,
}

/// Numerically stable logistic function; only ever exponentiates `-|x|`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Sigmoid, Activation::Relu, Activation::Identity];

    #[inline]
    pub fn value(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative at `x`. `relu'(0)` is 0.
    #[inline]
    pub fn slope(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn apply(self, z: &Tensor) -> Tensor {
        z.map(|x| self.value(x))
    }

    pub fn derivative(self, z: &Tensor) -> Tensor {
        z.map(|x| self.slope(x))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(Error::invalid(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Softmax over the network output followed by log-loss.
    SoftmaxCrossEntropy,
    /// `mean_i (h_i - t_i)^2`
    MeanSquaredError,
}

impl Loss {
    pub const ALL: [Loss; 2] = [Loss::SoftmaxCrossEntropy, Loss::MeanSquaredError];

    pub fn as_str(self) -> &'static str {
        match self {
            Loss::SoftmaxCrossEntropy => "softmax_ce",
            Loss::MeanSquaredError => "mse",
        }
    }

    pub fn eval(self, prediction: &Tensor, target: &Tensor) -> Result<f64> {
        prediction.check_same_shape(target)?;
        match self {
            Loss::MeanSquaredError => {
                let n = prediction.len().max(1) as f64;
                let ss: f64 = prediction
                    .data()
                    .iter()
                    .zip(target.data())
                    .map(|(h, t)| (h - t) * (h - t))
                    .sum();
                Ok(ss / n)
            }
            Loss::SoftmaxCrossEntropy => {
                check_distribution(target)?;
                let lse = log_sum_exp(prediction.data());
                // -Σ t_i log p_i with log p_i = z_i - lse
                let loss = target
                    .data()
                    .iter()
                    .zip(prediction.data())
                    .filter(|(t, _)| **t != 0.0)
                    .map(|(t, z)| t * (lse - z))
                    .sum::<f64>();
                Ok(loss.max(0.0))
            }
        }
    }

    /// `dL/dh` at the network output.
    pub fn gradient(self, prediction: &Tensor, target: &Tensor) -> Result<Tensor> {
        prediction.check_same_shape(target)?;
        match self {
            Loss::MeanSquaredError => {
                let n = prediction.len().max(1) as f64;
                Ok(prediction.sub(target)?.scale(2.0 / n))
            }
            Loss::SoftmaxCrossEntropy => {
                check_distribution(target)?;
                softmax(prediction).sub(target)
            }
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softmax_ce" | "cross_entropy" => Ok(Loss::SoftmaxCrossEntropy),
            "mse" => Ok(Loss::MeanSquaredError),
            other => Err(Error::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

fn check_distribution(target: &Tensor) -> Result<()> {
    let ok = target.data().iter().all(|&t| (0.0..=1.0).contains(&t))
        && (target.sum() - 1.0).abs() <= 1e-9;
    if ok {
        Ok(())
    } else {
        Err(Error::invalid("cross-entropy target must be a probability vector"))
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

pub fn softmax(z: &Tensor) -> Tensor {
    let max = z.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps = z.map(|v| (v - max).exp());
    let total = exps.sum();
    exps.scale(1.0 / total)
}

/// One-hot encoding of `label` over `classes`.
pub fn one_hot(label: usize, classes: usize) -> Tensor {
    let mut t = Tensor::zeros(&[classes]);
    t.data_mut()[label] = 1.0;
    t
}

/// Index of the largest element (first on ties).
pub fn argmax(t: &Tensor) -> usize {
    let mut best = 0;
    for (i, &v) in t.data().iter().enumerate() {
        if v > t.data()[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
struct Cache {
    input: Tensor,
    pre_activation: Tensor,
}

#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub weights: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
    pub grad_weights: Tensor,
    pub grad_bias: Tensor,
    cache: Option<Cache>,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        let (out, inp) = match weights.shape() {
            &[o, i] => (o, i),
            s => return Err(Error::invalid(format!("weights must be a matrix, got {s:?}"))),
        };
        if bias.shape() != [out] || out == 0 || inp == 0 {
            return Err(Error::ShapeMismatch {
                left: weights.shape().to_vec(),
                right: bias.shape().to_vec(),
            });
        }
        Ok(DenseLayer {
            grad_weights: Tensor::zeros(&[out, inp]),
            grad_bias: Tensor::zeros(&[out]),
            weights,
            bias,
            activation,
            cache: None,
        })
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let z = self.weights.matvec(x)?.add(&self.bias)?;
        let h = self.activation.apply(&z);
        self.cache = Some(Cache {
            input: x.clone(),
            pre_activation: z,
        });
        Ok(h)
    }

    fn predict(&self, x: &Tensor) -> Result<Tensor> {
        let z = self.weights.matvec(x)?.add(&self.bias)?;
        Ok(self.activation.apply(&z))
    }

    /// Takes `dL/dh` for this layer's output, fills the parameter gradients,
    /// and returns `dL/dh` for its input.
    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self.cache.as_ref().ok_or(Error::MissingForward)?;
        let delta = upstream.mul(&self.activation.derivative(&cache.pre_activation))?;
        self.grad_weights = Tensor::outer(&delta, &cache.input);
        let downstream = self.weights.matvec_transposed(&delta)?;
        self.grad_bias = delta;
        Ok(downstream)
    }

    /// Joint Frobenius norm of the weight and bias gradients.
    pub fn gradient_norm(&self) -> f64 {
        (self.grad_weights.norm_sq() + self.grad_bias.norm_sq()).sqrt()
    }
}

/// Layer sizes and activations. `sizes` has one more entry than `activations`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub loss: Loss,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.activations.is_empty() || self.sizes.len() != self.activations.len() + 1 {
            return Err(Error::invalid(format!(
                "network needs at least one layer and sizes.len() == activations.len() + 1 (got {} sizes, {} activations)",
                self.sizes.len(),
                self.activations.len()
            )));
        }
        if self.sizes.contains(&0) {
            return Err(Error::invalid("layer sizes must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    /// One entry per layer, input side first.
    pub layer_norms: Vec<f64>,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub layers: Vec<DenseLayer>,
    pub loss: Loss,
}

/// Half-width of the uniform initializer for a layer.
///
/// `sqrt(6 / (fan_in + fan_out))`, times 4 for sigmoid layers.
pub fn init_limit(fan_in: usize, fan_out: usize, activation: Activation) -> f64 {
    let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
    match activation {
        Activation::Sigmoid => 4.0 * s,
        Activation::Relu | Activation::Identity => s,
    }
}

/// Builds a network with uniform Glorot-style weights and zero biases.
pub fn init_network(spec: &NetworkSpec, stream: &mut RngStream) -> Result<Network> {
    spec.validate()?;
    let layers = spec
        .sizes
        .windows(2)
        .zip(&spec.activations)
        .map(|(io, &act)| {
            let (fan_in, fan_out) = (io[0], io[1]);
            let s = init_limit(fan_in, fan_out, act);
            let w = stream.uniform(-s, s, &[fan_out, fan_in])?;
            DenseLayer::new(w, Tensor::zeros(&[fan_out]), act)
        })
        .collect::<Result<Vec<_>>>()?;
    Network::new(layers, spec.loss)
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>, loss: Loss) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("network has no layers"));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::ShapeMismatch {
                    left: pair[0].weights.shape().to_vec(),
                    right: pair[1].weights.shape().to_vec(),
                });
            }
        }
        Ok(Network { layers, loss })
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn outputs(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    /// Computes the output and caches what backward needs.
    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let mut h = x.clone();
        for layer in &mut self.layers {
            h = layer.forward(&h)?;
        }
        Ok(h)
    }

    /// Forward without touching the caches.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.predict(&h)?;
        }
        Ok(h)
    }

    /// Backpropagates the loss against `target` through the cached forward
    /// pass. Gradients are overwritten, not accumulated.
    pub fn backward(&mut self, target: &Tensor) -> Result<GradientReport> {
        let last = self.layers.len() - 1;
        let cache = self.layers[last].cache.as_ref().ok_or(Error::MissingForward)?;
        let output = self.layers[last].activation.apply(&cache.pre_activation);
        let loss = self.loss.eval(&output, target)?;
        let mut upstream = self.loss.gradient(&output, target)?;
        for layer in self.layers.iter_mut().rev() {
            upstream = layer.backward(&upstream)?;
        }
        Ok(GradientReport {
            layer_norms: self.layers.iter().map(DenseLayer::gradient_norm).collect(),
            loss,
        })
    }

    /// Drops the forward caches.
    pub fn clear_cache(&mut self) {
        for layer in &mut self.layers {
            layer.cache = None;
        }
    }

    pub fn zero_grad(&mut self) {
        for layer in &mut self.layers {
            layer.grad_weights.fill(0.0);
            layer.grad_bias.fill(0.0);
        }
    }

    /// Parameters in `[W0, b0, W1, b1, ...]` order.
    pub fn parameters(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| [&l.weights, &l.bias]).collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
            .collect()
    }

    /// Gradients aligned with [`Network::parameters`].
    pub fn gradients(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [&l.grad_weights, &l.grad_bias])
            .collect()
    }

    /// Loss of the current parameters on one sample, without caching.
    pub fn sample_loss(&self, x: &Tensor, target: &Tensor) -> Result<f64> {
        let out = self.predict(x)?;
        self.loss.eval(&out, target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_net(w: f64) -> Network {
        let layer = DenseLayer::new(
            Tensor::from_rows(&[vec![w]]).unwrap(),
            Tensor::zeros(&[1]),
            Activation::Identity,
        )
        .unwrap();
        Network::new(vec![layer], Loss::MeanSquaredError).unwrap()
    }

    #[test]
    fn activation_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(Activation::Relu.value(-3.0), 0.0);
        assert_eq!(Activation::Relu.value(3.0), 3.0);
        assert_eq!(Activation::Identity.value(-2.5), -2.5);
    }

    #[test]
    fn sigmoid_saturates_without_overflow() {
        // 1/(1+e^-1000) = 1 - 5.08e-435 rounds to exactly 1 in binary64,
        // and e^-1000 underflows below the smallest subnormal.
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert!(sigmoid(-710.0).is_finite());
        assert_eq!(Activation::Sigmoid.slope(1000.0), 0.0);
    }

    #[test]
    fn derivative_values() {
        assert_eq!(Activation::Sigmoid.slope(0.0), 0.25);
        assert_eq!(Activation::Relu.slope(0.0), 0.0);
        assert_eq!(Activation::Relu.slope(1e-300), 1.0);
        assert_eq!(Activation::Identity.slope(123.0), 1.0);
        assert!(Activation::Sigmoid.slope(10.0) < 1e-4);
        assert!(Activation::Sigmoid.slope(-10.0) < 1e-4);
    }

    #[test]
    fn sigmoid_derivative_identity() {
        for i in -400..=400 {
            let x = i as f64 * 0.05;
            let s = sigmoid(x);
            assert!((Activation::Sigmoid.slope(x) - s * (1.0 - s)).abs() <= 1e-15);
        }
    }

    #[test]
    fn identity_network_passes_through() {
        let mut net = identity_net(1.0);
        let out = net.forward(&Tensor::from_vec(vec![4.25])).unwrap();
        assert_eq!(out.data(), &[4.25]);
    }

    #[test]
    fn zero_sigmoid_layer_gives_half() {
        let layer = DenseLayer::new(Tensor::zeros(&[1, 1]), Tensor::zeros(&[1]), Activation::Sigmoid).unwrap();
        let mut net = Network::new(vec![layer], Loss::MeanSquaredError).unwrap();
        assert_eq!(net.forward(&Tensor::from_vec(vec![5.0])).unwrap().data(), &[0.5]);
    }

    #[test]
    fn one_dimensional_chain_rule() {
        let mut net = identity_net(1.0);
        net.forward(&Tensor::from_vec(vec![1.0])).unwrap();
        let report = net.backward(&Tensor::from_vec(vec![0.0])).unwrap();
        assert_eq!(net.layers[0].grad_weights.data(), &[2.0]);
        assert_eq!(net.layers[0].grad_bias.data(), &[2.0]);
        assert_eq!(report.loss, 1.0);
        assert_eq!(report.layer_norms.len(), 1);
    }

    #[test]
    fn backward_before_forward_errors() {
        let mut net = identity_net(1.0);
        assert!(matches!(
            net.backward(&Tensor::from_vec(vec![0.0])),
            Err(Error::MissingForward)
        ));
    }

    #[test]
    fn forward_dimension_mismatch() {
        let mut net = identity_net(1.0);
        assert!(net.forward(&Tensor::from_vec(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn backward_target_shape_mismatch() {
        let mut net = identity_net(1.0);
        net.forward(&Tensor::from_vec(vec![1.0])).unwrap();
        assert!(net.backward(&Tensor::from_vec(vec![0.0, 1.0])).is_err());
    }

    #[test]
    fn two_layer_relu_matches_hand_composition() {
        let w1 = Tensor::from_rows(&[vec![0.5, -1.0], vec![2.0, 0.25], vec![-0.75, 1.5]]).unwrap();
        let b1 = Tensor::from_vec(vec![0.1, -0.2, 0.3]);
        let w2 = Tensor::from_rows(&[vec![1.0, -0.5, 0.25]]).unwrap();
        let b2 = Tensor::from_vec(vec![0.05]);
        let mut net = Network::new(
            vec![
                DenseLayer::new(w1.clone(), b1.clone(), Activation::Relu).unwrap(),
                DenseLayer::new(w2.clone(), b2.clone(), Activation::Relu).unwrap(),
            ],
            Loss::MeanSquaredError,
        )
        .unwrap();
        let x = [0.7, -0.3];
        let hidden: Vec<f64> = (0..3)
            .map(|i| {
                let z = w1.row(i)[0] * x[0] + w1.row(i)[1] * x[1] + b1.data()[i];
                if z > 0.0 { z } else { 0.0 }
            })
            .collect();
        let z2 = w2.row(0)[0] * hidden[0] + w2.row(0)[1] * hidden[1] + w2.row(0)[2] * hidden[2] + b2.data()[0];
        let expected = z2.max(0.0);
        let got = net.forward(&Tensor::from_vec(x.to_vec())).unwrap();
        assert_eq!(got.data(), &[expected]);
        assert_eq!(net.predict(&Tensor::from_vec(x.to_vec())).unwrap().data(), &[expected]);
    }

    #[test]
    fn loss_values() {
        let ones = Tensor::from_vec(vec![1.0, 1.0]);
        assert_eq!(Loss::MeanSquaredError.eval(&ones, &ones).unwrap(), 0.0);
        let logits = Tensor::from_vec(vec![0.0, 0.0]);
        let target = Tensor::from_vec(vec![1.0, 0.0]);
        let ce = Loss::SoftmaxCrossEntropy.eval(&logits, &target).unwrap();
        assert!((ce - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn loss_matches_high_precision_reference() {
        // Reference values evaluated with 50-digit arithmetic (mpmath).
        let logits = Tensor::from_vec(vec![1.5, -2.25, 0.125, 3.0]);
        let target = Tensor::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        let ce = Loss::SoftmaxCrossEntropy.eval(&logits, &target).unwrap();
        assert!((ce - CE_REFERENCE).abs() < 1e-12, "{ce}");
        let pred = Tensor::from_vec(vec![0.3, -1.7, 2.2]);
        let tgt = Tensor::from_vec(vec![1.1, 0.4, -0.6]);
        let mse = Loss::MeanSquaredError.eval(&pred, &tgt).unwrap();
        assert!((mse - MSE_REFERENCE).abs() < 1e-12, "{mse}");
    }

    const CE_REFERENCE: f64 = 3.125598252594946;
    const MSE_REFERENCE: f64 = 4.296666666666667;

    #[test]
    fn cross_entropy_rejects_bad_target() {
        let logits = Tensor::from_vec(vec![0.0, 0.0]);
        assert!(Loss::SoftmaxCrossEntropy.eval(&logits, &Tensor::from_vec(vec![1.0, 1.0])).is_err());
        assert!(Loss::SoftmaxCrossEntropy.eval(&logits, &Tensor::from_vec(vec![1.0])).is_err());
    }

    #[test]
    fn large_logits_stay_finite() {
        let logits = Tensor::from_vec(vec![1000.0, -1000.0]);
        let target = Tensor::from_vec(vec![0.0, 1.0]);
        let ce = Loss::SoftmaxCrossEntropy.eval(&logits, &target).unwrap();
        assert_eq!(ce, 2000.0);
        let g = Loss::SoftmaxCrossEntropy.gradient(&logits, &target).unwrap();
        assert!(g.is_finite());
    }

    #[test]
    fn init_is_deterministic_with_zero_bias() {
        let spec = NetworkSpec {
            sizes: vec![2, 1],
            activations: vec![Activation::Relu],
            loss: Loss::MeanSquaredError,
        };
        let a = init_network(&spec, &mut RngStream::new(5)).unwrap();
        let b = init_network(&spec, &mut RngStream::new(5)).unwrap();
        assert_eq!(a.layers[0].weights, b.layers[0].weights);
        assert!(a.layers[0].bias.data().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn init_std_matches_scheme() {
        // uniform(-s, s) has std s / sqrt(3)
        for act in [Activation::Relu, Activation::Sigmoid] {
            let spec = NetworkSpec {
                sizes: vec![100, 100],
                activations: vec![act],
                loss: Loss::MeanSquaredError,
            };
            let net = init_network(&spec, &mut RngStream::new(17)).unwrap();
            let w = &net.layers[0].weights;
            assert_eq!(w.len(), 10_000);
            let mean = w.sum() / w.len() as f64;
            let std = (w.data().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
            let target = init_limit(100, 100, act) / 3f64.sqrt();
            assert!((std - target).abs() < 0.2 * target, "{act}: {std} vs {target}");
        }
    }

    #[test]
    fn empty_spec_rejected() {
        let spec = NetworkSpec {
            sizes: vec![3],
            activations: vec![],
            loss: Loss::MeanSquaredError,
        };
        assert!(init_network(&spec, &mut RngStream::new(0)).is_err());
        let spec = NetworkSpec {
            sizes: vec![3, 0],
            activations: vec![Activation::Relu],
            loss: Loss::MeanSquaredError,
        };
        assert!(init_network(&spec, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn mismatched_layers_rejected() {
        let a = DenseLayer::new(Tensor::zeros(&[3, 2]), Tensor::zeros(&[3]), Activation::Relu).unwrap();
        let b = DenseLayer::new(Tensor::zeros(&[1, 4]), Tensor::zeros(&[1]), Activation::Relu).unwrap();
        assert!(Network::new(vec![a, b], Loss::MeanSquaredError).is_err());
    }

    #[test]
    fn backward_is_idempotent() {
        let spec = NetworkSpec {
            sizes: vec![4, 5, 3],
            activations: vec![Activation::Sigmoid, Activation::Identity],
            loss: Loss::SoftmaxCrossEntropy,
        };
        let mut net = init_network(&spec, &mut RngStream::new(3)).unwrap();
        let x = Tensor::from_vec(vec![0.1, -0.4, 0.9, 0.3]);
        let t = one_hot(1, 3);
        net.forward(&x).unwrap();
        let r1 = net.backward(&t).unwrap();
        let g1: Vec<Tensor> = net.gradients().into_iter().cloned().collect();
        net.zero_grad();
        let r2 = net.backward(&t).unwrap();
        let g2: Vec<Tensor> = net.gradients().into_iter().cloned().collect();
        assert_eq!(r1, r2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn forward_bitwise_deterministic() {
        let spec = NetworkSpec {
            sizes: vec![6, 8, 8, 2],
            activations: vec![Activation::Relu, Activation::Sigmoid, Activation::Identity],
            loss: Loss::SoftmaxCrossEntropy,
        };
        let mut net = init_network(&spec, &mut RngStream::new(8)).unwrap();
        let x = RngStream::new(1).normal(0.0, 1.0, &[6]).unwrap();
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        assert_eq!(a.data(), b.data());
    }
}
