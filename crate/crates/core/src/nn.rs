//! Minimal dense-network engine: fully connected ReLU/identity layers with
//! hand-chained forward/backward passes, the two losses, and Adam.
//!
//! Everything is `f64`. Forward passes return an explicit [`ForwardTrace`]
//! holding the per-layer activations; `backward` consumes a trace, which makes
//! "backward without forward" unrepresentable and keeps networks freely
//! shareable across threads for read-only evaluation.
//!
//! One-hot inputs get a dedicated fast path (`forward_onehot`). It produces
//! bit-identical results to the dense path: multiplying a weight row by a
//! one-hot vector selects a single column exactly, in floating point too.

use crate::error::{Error, Result};
use crate::rng::standard_normal;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Identity => x,
        }
    }

    /// Derivative as a function of the pre-activation; relu' at 0 is 0.
    #[inline]
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// One fully connected layer; weights are row-major `out_dim x in_dim`.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Shape("layer dimensions must be positive".into()));
        }
        if weights.len() != in_dim * out_dim {
            return Err(Error::Shape(format!(
                "weights: expected {}x{}={} values, got {}",
                out_dim,
                in_dim,
                in_dim * out_dim,
                weights.len()
            )));
        }
        if biases.len() != out_dim {
            return Err(Error::Shape(format!(
                "biases: expected {} values, got {}",
                out_dim,
                biases.len()
            )));
        }
        if weights.iter().chain(biases.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer parameters must be finite".into()));
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            biases,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// `pre = W x + b`, written into `pre` (length `out_dim`).
    fn affine(&self, input: &[f64], pre: &mut [f64]) {
        for (j, p) in pre.iter_mut().enumerate() {
            let row = &self.weights[j * self.in_dim..(j + 1) * self.in_dim];
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(input.iter()) {
                acc += w * x;
            }
            *p = acc + self.biases[j];
        }
    }

    /// `pre = W e_hot + b`: column `hot` plus bias.
    fn affine_onehot(&self, hot: usize, pre: &mut [f64]) {
        for (j, p) in pre.iter_mut().enumerate() {
            *p = self.weights[j * self.in_dim + hot] + self.biases[j];
        }
    }
}

/// The input a forward pass saw, kept for the weight-gradient outer product.
#[derive(Debug, Clone)]
enum TraceInput {
    Dense(Vec<f64>),
    OneHot { index: usize, len: usize },
}

impl TraceInput {
    fn len(&self) -> usize {
        match self {
            TraceInput::Dense(v) => v.len(),
            TraceInput::OneHot { len, .. } => *len,
        }
    }
}

/// Per-layer pre- and post-activation values from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: TraceInput,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl ForwardTrace {
    /// Final-layer output of the pass that produced this trace.
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("trace has at least one layer")
    }
}

/// Per-layer parameter gradients.
#[derive(Debug, Clone)]
pub struct LayerGradients {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

/// Gradients for every parameter of a network, in layer order.
#[derive(Debug, Clone)]
pub struct NetworkGradients {
    pub layers: Vec<LayerGradients>,
}

impl NetworkGradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradients {
                    d_weights: vec![0.0; l.weights.len()],
                    d_biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            for g in &mut l.d_weights {
                *g *= factor;
            }
            for g in &mut l.d_biases {
                *g *= factor;
            }
        }
    }

    /// Tensor views in the same order as [`Network::tensors_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.d_weights.as_slice(), l.d_biases.as_slice()])
            .collect()
    }

    /// All gradient values flattened in tensor order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.d_weights);
            out.extend_from_slice(&l.d_biases);
        }
        out
    }
}

/// A feed-forward stack of dense layers.
#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<DenseLayer>,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::Shape(format!(
                    "layer output {} does not chain into next input {}",
                    pair[0].out_dim, pair[1].in_dim
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    /// `[in_0, out_0, out_1, ..]`: the dimension chain.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Tensor sizes in order `[w0, b0, w1, b1, ..]`, matching `tensors_mut`.
    pub fn tensor_sizes(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.len(), l.biases.len()])
            .collect()
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.biases.as_slice()])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                let DenseLayer {
                    weights, biases, ..
                } = l;
                [weights.as_mut_slice(), biases.as_mut_slice()]
            })
            .collect()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[offset..offset + nw]);
            offset += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&flat[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "network takes {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input must be finite".into()));
        }
        Ok(())
    }

    /// Output only, no trace; for evaluation where no backward will follow.
    pub fn infer(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut cur = input.to_vec();
        for layer in &self.layers {
            let mut next = vec![0.0; layer.out_dim];
            layer.affine(&cur, &mut next);
            for v in &mut next {
                *v = layer.activation.apply(*v);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// `infer` for a one-hot input vector with a 1 at `hot`.
    pub fn infer_onehot(&self, hot: usize) -> Result<Vec<f64>> {
        if hot >= self.input_dim() {
            return Err(Error::Shape(format!(
                "one-hot index {hot} out of range for input width {}",
                self.input_dim()
            )));
        }
        let first = &self.layers[0];
        let mut cur = vec![0.0; first.out_dim];
        first.affine_onehot(hot, &mut cur);
        for v in &mut cur {
            *v = first.activation.apply(*v);
        }
        for layer in &self.layers[1..] {
            let mut next = vec![0.0; layer.out_dim];
            layer.affine(&cur, &mut next);
            for v in &mut next {
                *v = layer.activation.apply(*v);
            }
            cur = next;
        }
        Ok(cur)
    }

    fn run_forward(&self, input: TraceInput) -> ForwardTrace {
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut p = vec![0.0; layer.out_dim];
            if l == 0 {
                match &input {
                    TraceInput::Dense(x) => layer.affine(x, &mut p),
                    TraceInput::OneHot { index, .. } => layer.affine_onehot(*index, &mut p),
                }
            } else {
                layer.affine(&post[l - 1], &mut p);
            }
            let a: Vec<f64> = p.iter().map(|&v| layer.activation.apply(v)).collect();
            pre.push(p);
            post.push(a);
        }
        ForwardTrace { input, pre, post }
    }

    /// Forward pass retaining per-layer activations for a later `backward`.
    pub fn forward(&self, input: &[f64]) -> Result<ForwardTrace> {
        self.check_input(input)?;
        Ok(self.run_forward(TraceInput::Dense(input.to_vec())))
    }

    /// `forward` for a one-hot input; the trace remembers the hot index so the
    /// first layer's weight gradient stays sparse in `backward`.
    pub fn forward_onehot(&self, hot: usize) -> Result<ForwardTrace> {
        if hot >= self.input_dim() {
            return Err(Error::Shape(format!(
                "one-hot index {hot} out of range for input width {}",
                self.input_dim()
            )));
        }
        Ok(self.run_forward(TraceInput::OneHot {
            index: hot,
            len: self.input_dim(),
        }))
    }

    fn check_trace(&self, trace: &ForwardTrace) -> Result<()> {
        if trace.pre.len() != self.layers.len()
            || trace.input.len() != self.input_dim()
            || trace
                .pre
                .iter()
                .zip(&self.layers)
                .any(|(p, l)| p.len() != l.out_dim)
        {
            return Err(Error::Shape(
                "forward trace does not match this network".into(),
            ));
        }
        Ok(())
    }

    /// Backprop of a scalar loss whose gradient at the network output is
    /// `output_grad`. Returns parameter gradients and the gradient with
    /// respect to the network input.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        output_grad: &[f64],
    ) -> Result<(NetworkGradients, Vec<f64>)> {
        let mut grads = NetworkGradients::zeros_like(self);
        let input_grad = self
            .backward_into(trace, output_grad, &mut grads, true)?
            .expect("input gradient was requested");
        Ok((grads, input_grad))
    }

    /// Backprop accumulating parameter gradients into `grads` (`+=`), so a
    /// batch can share one accumulator. Returns the input gradient when
    /// `want_input_grad` is set.
    pub fn backward_into(
        &self,
        trace: &ForwardTrace,
        output_grad: &[f64],
        grads: &mut NetworkGradients,
        want_input_grad: bool,
    ) -> Result<Option<Vec<f64>>> {
        self.check_trace(trace)?;
        if output_grad.len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "output gradient length {} does not match output width {}",
                output_grad.len(),
                self.output_dim()
            )));
        }
        if grads.layers.len() != self.layers.len() {
            return Err(Error::Shape("gradient accumulator mismatch".into()));
        }

        // dL/d post of the layer currently being processed.
        let mut delta: Vec<f64> = output_grad.to_vec();
        let mut input_grad = None;

        for (l, layer) in self.layers.iter().enumerate().rev() {
            // dL/d pre.
            let mut dpre = delta;
            for (d, &p) in dpre.iter_mut().zip(&trace.pre[l]) {
                *d *= layer.activation.derivative(p);
            }

            let acc = &mut grads.layers[l];
            for (d, db) in dpre.iter().zip(acc.d_biases.iter_mut()) {
                *db += d;
            }

            let below: Option<&[f64]> = if l > 0 {
                Some(&trace.post[l - 1])
            } else {
                None
            };
            match (l, &trace.input) {
                (0, TraceInput::OneHot { index, .. }) => {
                    // Only column `index` of the weight gradient is nonzero.
                    for (j, d) in dpre.iter().enumerate() {
                        acc.d_weights[j * layer.in_dim + index] += d;
                    }
                }
                _ => {
                    let x: &[f64] = match below {
                        Some(p) => p,
                        None => match &trace.input {
                            TraceInput::Dense(v) => v,
                            TraceInput::OneHot { .. } => unreachable!(),
                        },
                    };
                    for (j, d) in dpre.iter().enumerate() {
                        let row = &mut acc.d_weights[j * layer.in_dim..(j + 1) * layer.in_dim];
                        for (dw, xv) in row.iter_mut().zip(x.iter()) {
                            *dw += d * xv;
                        }
                    }
                }
            }

            // dL/d post of the layer below (or the network input).
            if l > 0 || want_input_grad {
                let mut prev = vec![0.0; layer.in_dim];
                for (j, d) in dpre.iter().enumerate() {
                    let row = &layer.weights[j * layer.in_dim..(j + 1) * layer.in_dim];
                    for (pv, w) in prev.iter_mut().zip(row.iter()) {
                        *pv += w * d;
                    }
                }
                if l == 0 {
                    input_grad = Some(prev);
                    break;
                }
                delta = prev;
            } else {
                break;
            }
        }
        Ok(input_grad)
    }
}

/// He-style initialization: weights `N(0, 2/fan_in)`, biases zero.
/// Deterministic for a fixed rng state.
pub fn init_network<R: Rng>(
    layer_sizes: &[usize],
    activations: &[Activation],
    rng: &mut R,
) -> Result<Network> {
    if layer_sizes.len() < 2 {
        return Err(Error::Shape(
            "need at least an input and an output size".into(),
        ));
    }
    if activations.len() != layer_sizes.len() - 1 {
        return Err(Error::Shape(format!(
            "{} layers need {} activations, got {}",
            layer_sizes.len() - 1,
            layer_sizes.len() - 1,
            activations.len()
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Shape("layer sizes must be positive".into()));
    }
    let mut layers = Vec::with_capacity(activations.len());
    for (l, &activation) in activations.iter().enumerate() {
        let in_dim = layer_sizes[l];
        let out_dim = layer_sizes[l + 1];
        let std = (2.0 / in_dim as f64).sqrt();
        let weights: Vec<f64> = (0..in_dim * out_dim)
            .map(|_| std * standard_normal(rng))
            .collect();
        layers.push(DenseLayer::new(
            in_dim,
            out_dim,
            weights,
            vec![0.0; out_dim],
            activation,
        )?);
    }
    Network::new(layers)
}

/// Numerically stable softmax cross-entropy against a class index.
/// Returns the loss and its gradient with respect to the logits.
pub fn cross_entropy_with_logits(logits: &[f64], target_class: usize) -> Result<(f64, Vec<f64>)> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits must be finite".into()));
    }
    if target_class >= logits.len() {
        return Err(Error::Shape(format!(
            "target class {} out of range for {} logits",
            target_class,
            logits.len()
        )));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp_sum: f64 = logits.iter().map(|&l| (l - max).exp()).sum();
    let loss = max + exp_sum.ln() - logits[target_class];
    let mut grad: Vec<f64> = logits.iter().map(|&l| (l - max).exp() / exp_sum).collect();
    grad[target_class] -= 1.0;
    Ok((loss, grad))
}

/// Squared error `(prediction - target)^2` and its prediction gradient.
pub fn mse(prediction: f64, target: f64) -> Result<(f64, f64)> {
    if !prediction.is_finite() || !target.is_finite() {
        return Err(Error::NonFinite("mse arguments must be finite".into()));
    }
    let diff = prediction - target;
    Ok((diff * diff, 2.0 * diff))
}

/// Adam with bias correction over a fixed list of parameter tensors.
///
/// `t` increments exactly once per `step` call no matter how many tensors the
/// call updates, so a whole network (or a trunk plus its value head) advances
/// as one unit.
#[derive(Debug, Clone)]
pub struct AdamState {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(learning_rate: f64, tensor_sizes: &[usize]) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            m: tensor_sizes.iter().map(|&s| vec![0.0; s]).collect(),
            v: tensor_sizes.iter().map(|&s| vec![0.0; s]).collect(),
        }
    }

    /// Rebuild a previously serialized state.
    pub fn from_parts(
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        t: u64,
        m: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if m.len() != v.len() || m.iter().zip(&v).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::Shape("adam moment shapes disagree".into()));
        }
        Ok(Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            t,
            m,
            v,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn first_moments(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Vec<f64>] {
        &self.v
    }

    /// One bias-corrected Adam update across all tensors.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam tracks {} tensors, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(grads.iter()).zip(&self.m) {
            if p.len() != m.len() || g.len() != m.len() {
                return Err(Error::Shape("adam tensor shape mismatch".into()));
            }
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for i in 0..param.len() {
                let g = grad[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                param[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdcheck::{central_difference, max_relative_error};
    use crate::rng::seeded;

    fn identity_layer(dim: usize, activation: Activation) -> DenseLayer {
        let mut w = vec![0.0; dim * dim];
        for i in 0..dim {
            w[i * dim + i] = 1.0;
        }
        DenseLayer::new(dim, dim, w, vec![0.0; dim], activation).unwrap()
    }

    #[test]
    fn forward_identity_passthrough() {
        let net = Network::new(vec![identity_layer(3, Activation::Identity)]).unwrap();
        let x = [0.5, -2.0, 3.25];
        let trace = net.forward(&x).unwrap();
        assert_eq!(trace.output(), &x);
        assert_eq!(net.infer(&x).unwrap(), &x);
    }

    #[test]
    fn forward_relu_clamps_negative_bias() {
        let mut layer = identity_layer(4, Activation::Relu);
        layer.biases = vec![-1.0; 4];
        let net = Network::new(vec![layer]).unwrap();
        let out = net.infer(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, vec![0.0; 4]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn forward_matches_straight_line_recompute() {
        // Independent reference: explicit index arithmetic, no shared code path.
        let mut rng = seeded(17);
        let net = init_network(
            &[4, 3, 2],
            &[Activation::Relu, Activation::Identity],
            &mut rng,
        )
        .unwrap();
        let x = [0.3, -0.7, 1.1, 0.05];

        let l0 = &net.layers()[0];
        let mut h = [0.0; 3];
        for j in 0..3 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += l0.weights()[j * 4 + k] * x[k];
            }
            acc += l0.biases()[j];
            h[j] = if acc > 0.0 { acc } else { 0.0 };
        }
        let l1 = &net.layers()[1];
        let mut y = [0.0; 2];
        for j in 0..2 {
            let mut acc = 0.0;
            for k in 0..3 {
                acc += l1.weights()[j * 3 + k] * h[k];
            }
            y[j] = acc + l1.biases()[j];
        }

        let out = net.infer(&x).unwrap();
        assert_eq!(out.as_slice(), &y);
        let trace = net.forward(&x).unwrap();
        assert_eq!(trace.output(), &y);
    }

    #[test]
    fn forward_rejects_bad_shapes_and_nonfinite() {
        let net = Network::new(vec![identity_layer(3, Activation::Identity)]).unwrap();
        assert!(matches!(net.infer(&[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(matches!(
            net.infer(&[1.0, f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn onehot_paths_match_dense_bitwise() {
        let mut rng = seeded(23);
        let net =
            init_network(&[7, 5, 4], &[Activation::Relu, Activation::Relu], &mut rng).unwrap();
        for hot in 0..7 {
            let mut dense = vec![0.0; 7];
            dense[hot] = 1.0;
            let a = net.infer(&dense).unwrap();
            let b = net.infer_onehot(hot).unwrap();
            assert_eq!(
                a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );

            let ta = net.forward(&dense).unwrap();
            let tb = net.forward_onehot(hot).unwrap();
            let (ga, _) = net.backward(&ta, &[0.4, -1.0, 0.25, 2.0]).unwrap();
            let (gb, _) = net.backward(&tb, &[0.4, -1.0, 0.25, 2.0]).unwrap();
            for (la, lb) in ga.layers.iter().zip(gb.layers.iter()) {
                assert_eq!(la.d_weights, lb.d_weights);
                assert_eq!(la.d_biases, lb.d_biases);
            }
        }
    }

    #[test]
    fn backward_zero_output_grad_gives_zero_grads() {
        let mut rng = seeded(3);
        let net = init_network(
            &[4, 6, 2],
            &[Activation::Relu, Activation::Identity],
            &mut rng,
        )
        .unwrap();
        let trace = net.forward(&[1.0, 0.0, -1.0, 0.5]).unwrap();
        let (grads, input_grad) = net.backward(&trace, &[0.0, 0.0]).unwrap();
        assert!(grads.flatten().iter().all(|&g| g == 0.0));
        assert!(input_grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_single_identity_layer_is_outer_product() {
        let layer = DenseLayer::new(
            3,
            2,
            vec![0.1, 0.2, 0.3, -0.1, 0.0, 0.4],
            vec![0.0, 0.0],
            Activation::Identity,
        )
        .unwrap();
        let net = Network::new(vec![layer]).unwrap();
        let x = [2.0, -1.0, 0.5];
        let g = [3.0, -2.0];
        let trace = net.forward(&x).unwrap();
        let (grads, _) = net.backward(&trace, &g).unwrap();
        // dW[j,k] = g[j] * x[k], products written out by hand.
        let expect: Vec<f64> = vec![6.0, -3.0, 1.5, -4.0, 2.0, -1.0];
        assert_eq!(grads.layers[0].d_weights, expect);
        assert_eq!(grads.layers[0].d_biases, g.to_vec());
    }

    #[test]
    fn backward_matches_finite_differences() {
        for seed in [1u64, 2, 3] {
            let mut rng = seeded(seed);
            let net = init_network(
                &[5, 8, 7, 3],
                &[Activation::Relu, Activation::Relu, Activation::Identity],
                &mut rng,
            )
            .unwrap();
            let x: Vec<f64> = (0..5).map(|i| ((i as f64) * 0.7).sin()).collect();
            // Scalar loss: dot(output, c) with fixed coefficients.
            let c = [0.31, -1.2, 0.77];

            let trace = net.forward(&x).unwrap();
            let (grads, _) = net.backward(&trace, &c).unwrap();

            let base = net.params_flat();
            let numeric = central_difference(
                |theta| {
                    let mut probe = net.clone();
                    probe.set_params_flat(theta).unwrap();
                    let out = probe.infer(&x).unwrap();
                    out.iter().zip(c.iter()).map(|(o, k)| o * k).sum()
                },
                &base,
                1e-5,
            );
            let err = max_relative_error(&grads.flatten(), &numeric);
            assert!(err < 1e-5, "seed {seed}: max rel err {err}");
        }
    }

    #[test]
    fn cross_entropy_uniform_logits_is_ln2() {
        let (loss, grad) = cross_entropy_with_logits(&[0.0, 0.0], 1).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((grad[0] - 0.5).abs() < 1e-15);
        assert!((grad[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_saturated_correct_is_tiny() {
        let (loss, _) = cross_entropy_with_logits(&[30.0, -30.0], 0).unwrap();
        assert!(loss >= 0.0);
        assert!(loss < 1e-12, "loss {loss}");
    }

    #[test]
    fn cross_entropy_rejects_nonfinite() {
        assert!(matches!(
            cross_entropy_with_logits(&[f64::INFINITY, 0.0], 0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let logits = [0.8, -1.3];
        for target in 0..2 {
            let (_, grad) = cross_entropy_with_logits(&logits, target).unwrap();
            let numeric = central_difference(
                |l| cross_entropy_with_logits(l, target).unwrap().0,
                &logits,
                1e-6,
            );
            let err = max_relative_error(&grad, &numeric);
            assert!(err < 1e-6, "target {target}: err {err}");
        }
    }

    #[test]
    fn mse_values_and_gradient() {
        assert_eq!(mse(0.5, 0.5).unwrap(), (0.0, 0.0));
        assert_eq!(mse(1.0, 0.0).unwrap(), (1.0, 2.0));
        let (_, g) = mse(0.3, 0.9).unwrap();
        let numeric = central_difference(|p| mse(p[0], 0.9).unwrap().0, &[0.3], 1e-6);
        assert!((g - numeric[0]).abs() < 1e-9);
    }

    #[test]
    fn adam_zero_gradient_leaves_params() {
        let mut state = AdamState::new(0.001, &[3]);
        let mut p = vec![1.0, -2.0, 0.5];
        let orig = p.clone();
        state.step(&mut [&mut p], &[&[0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(p, orig);
        assert_eq!(state.t(), 1);
    }

    #[test]
    fn adam_first_step_is_nearly_signed_learning_rate() {
        let mut state = AdamState::new(0.001, &[1]);
        let mut p = vec![0.0];
        state.step(&mut [&mut p], &[&[5.0]]).unwrap();
        // Reference: -lr * g / (|g| + eps) computed independently.
        assert!((p[0] - (-0.000999999998)).abs() < 1e-15, "got {}", p[0]);
    }

    #[test]
    fn adam_three_step_trace_matches_reference() {
        // Frozen from an independent straight-line computation of the
        // canonical update (m-hat/v-hat form), lr 0.001, betas 0.9/0.999.
        let mut state = AdamState::new(0.001, &[1]);
        let mut p = vec![0.5];
        let expected = [0.49900000003333334, 0.498855479509286, 0.4982363523279808];
        for (g, want) in [0.3, -0.2, 0.7].iter().zip(expected.iter()) {
            state.step(&mut [&mut p], &[&[*g]]).unwrap();
            assert!(
                (p[0] - want).abs() < 1e-12,
                "t={} got {} want {}",
                state.t(),
                p[0],
                want
            );
        }
    }

    #[test]
    fn adam_first_step_magnitude_bounded_by_lr() {
        let mut rng = seeded(8);
        use rand::Rng;
        for _ in 0..50 {
            let g: f64 = rng.gen_range(-100.0..100.0);
            let mut state = AdamState::new(0.001, &[1]);
            let mut p = vec![0.0];
            state.step(&mut [&mut p], &[&[g]]).unwrap();
            assert!(p[0].abs() <= 0.001 + 1e-12, "g={g} step={}", p[0]);
        }
    }

    #[test]
    fn adam_rejects_shape_mismatch() {
        let mut state = AdamState::new(0.001, &[2]);
        let mut p = vec![0.0];
        assert!(matches!(
            state.step(&mut [&mut p], &[&[1.0]]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn init_deterministic_and_shaped() {
        let a = init_network(&[35, 128], &[Activation::Relu], &mut seeded(4)).unwrap();
        let b = init_network(&[35, 128], &[Activation::Relu], &mut seeded(4)).unwrap();
        assert_eq!(a.layers()[0].weights(), b.layers()[0].weights());
        assert_eq!(a.layers()[0].weights().len(), 128 * 35);
        assert_eq!(a.layers()[0].biases().len(), 128);
        assert!(a.layers()[0].biases().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn init_variance_near_he_target() {
        let mut rng = seeded(12);
        let net = init_network(&[100, 100], &[Activation::Relu], &mut rng).unwrap();
        let w = net.layers()[0].weights();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / w.len() as f64;
        let target = 2.0 / 100.0;
        assert!(
            (var - target).abs() < 0.2 * target,
            "var {var} target {target}"
        );
    }

    #[test]
    fn forward_is_bit_deterministic() {
        let mut rng = seeded(77);
        let net = init_network(
            &[6, 9, 4],
            &[Activation::Relu, Activation::Identity],
            &mut rng,
        )
        .unwrap();
        let x: Vec<f64> = (0..6).map(|i| (i as f64 * 0.13).cos()).collect();
        let a = net.infer(&x).unwrap();
        let b = net.infer(&x).unwrap();
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cross_entropy_nonnegative_and_decreasing_in_correct_logit(
                l0 in -5.0f64..5.0,
                l1 in -5.0f64..5.0,
                bump in 0.01f64..3.0,
                target in 0usize..2,
            ) {
                let (loss, _) = cross_entropy_with_logits(&[l0, l1], target).unwrap();
                prop_assert!(loss >= 0.0);

                let mut raised = [l0, l1];
                raised[target] += bump;
                let (raised_loss, _) = cross_entropy_with_logits(&raised, target).unwrap();
                prop_assert!(
                    raised_loss < loss,
                    "raising the correct logit {l0},{l1} (target {target}) by {bump} \
                     did not reduce the loss: {loss} -> {raised_loss}"
                );
            }

            #[test]
            fn adam_first_step_bounded_for_any_gradient(
                g in prop::num::f64::NORMAL.prop_filter("nonzero", |g| g.abs() > 1e-12),
            ) {
                let mut state = AdamState::new(0.001, &[1]);
                let mut p = vec![0.0];
                state.step(&mut [&mut p], &[&[g]]).unwrap();
                prop_assert!(p[0].abs() <= 0.001 + 1e-12);
            }
        }
    }
}
