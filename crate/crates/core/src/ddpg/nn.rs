//! Dense multilayer perceptron with hand-written backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Self::Identity => x,
            Self::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    fn derivative_from_output<T: Scalar>(self, y: T) -> T {
        match self {
            Self::Identity => T::one(),
            Self::Tanh => T::one() - y * y,
        }
    }
}

/// `y = act(W x + b)`, `W` stored row-major as `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T = f64> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
    pub activation: Activation,
}

impl<T: Scalar> Layer<T> {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            biases: vec![T::zero(); outputs],
            activation,
        }
    }

    fn forward_into(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, &b)| self.activation.apply(b + dot(row, x))),
        );
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
/// The summation order is fixed, so results stay reproducible.
#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail = ra.iter().zip(rb).fold(T::zero(), |s, (&x, &y)| s + x * y);
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T = f64> {
    pub layers: Vec<Layer<T>>,
}

/// Per-layer activations kept for the backward pass; `values[0]` is the input.
#[derive(Debug, Clone, Default)]
pub struct ForwardTrace<T = f64> {
    pub values: Vec<Vec<T>>,
}

impl<T> ForwardTrace<T> {
    pub fn output(&self) -> &[T] {
        self.values.last().expect("trace holds at least the input")
    }
}

impl<T: Scalar> Mlp<T> {
    /// All-zero network with `sizes = [input, hidden.., output]`.
    pub fn zeros(sizes: &[usize], hidden: Activation, output: Activation) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| Layer::zeros(w[0], w[1], if k == last { output } else { hidden }))
            .collect();
        Self { layers }
    }

    /// Uniform `±1/√fan_in` initialization, with the output layer drawn from `±final_scale`.
    pub fn random<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        final_scale: f64,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeros(sizes, hidden, output);
        let n = net.layers.len();
        for (k, layer) in net.layers.iter_mut().enumerate() {
            let bound = if k + 1 == n {
                final_scale
            } else {
                1.0 / (layer.inputs as f64).sqrt()
            };
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = T::lit(rng.random_range(-bound..=bound));
            }
        }
        net
    }

    /// Zeros with the same shape.
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer::zeros(l.inputs, l.outputs, l.activation))
                .collect(),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_size())
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().expect("non-empty").outputs
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &T> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn fill_zero(&mut self) {
        self.params_mut().for_each(|p| *p = T::zero());
    }

    pub fn all_finite(&self) -> bool {
        self.params().all(|p| p.is_finite())
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.input_size(), "input width mismatch");
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    pub fn forward_trace(&self, x: &[T]) -> ForwardTrace<T> {
        assert_eq!(x.len(), self.input_size(), "input width mismatch");
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(x.to_vec());
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.forward_into(values.last().expect("non-empty"), &mut out);
            values.push(out);
        }
        ForwardTrace { values }
    }

    /// Backpropagates `grad_output` (∂L/∂output) through a recorded forward pass,
    /// accumulating parameter gradients into `grads` and returning ∂L/∂input.
    pub fn backward(
        &self,
        trace: &ForwardTrace<T>,
        grad_output: &[T],
        grads: &mut Mlp<T>,
    ) -> Vec<T> {
        self.backprop(trace, grad_output, Some(grads))
    }

    /// ∂L/∂input only; parameter gradients are not formed.
    pub fn input_gradient(&self, trace: &ForwardTrace<T>, grad_output: &[T]) -> Vec<T> {
        self.backprop(trace, grad_output, None)
    }

    fn backprop(
        &self,
        trace: &ForwardTrace<T>,
        grad_output: &[T],
        mut grads: Option<&mut Mlp<T>>,
    ) -> Vec<T> {
        let mut delta: Vec<T> = grad_output.to_vec();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.values[k];
            let output = &trace.values[k + 1];
            for (d, &y) in delta.iter_mut().zip(output) {
                *d *= layer.activation.derivative_from_output(y);
            }
            let mut grad_in = vec![T::zero(); layer.inputs];
            for (&d, w_row) in delta.iter().zip(layer.weights.chunks_exact(layer.inputs)) {
                for (gi, &w) in grad_in.iter_mut().zip(w_row) {
                    *gi += w * d;
                }
            }
            if let Some(g) = grads.as_deref_mut() {
                let g = &mut g.layers[k];
                for ((&d, gb), g_row) in delta
                    .iter()
                    .zip(g.biases.iter_mut())
                    .zip(g.weights.chunks_exact_mut(layer.inputs))
                {
                    *gb += d;
                    for (gw, &x) in g_row.iter_mut().zip(input) {
                        *gw += d * x;
                    }
                }
            }
            delta = grad_in;
        }
        delta
    }

    /// `self ← tau·online + (1 − tau)·self`.
    pub fn soft_update_from(&mut self, online: &Mlp<T>, tau: T) {
        for (t, &o) in self.params_mut().zip(online.params()) {
            *t = tau * o + (T::one() - tau) * *t;
        }
    }

    pub fn same_shape(&self, other: &Mlp<T>) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.inputs == b.inputs && a.outputs == b.outputs && a.activation == b.activation
            })
    }
}
