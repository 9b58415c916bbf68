use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::{Activation, NeuralError, Result};

/// One dense layer: `a = act(W x + b)` with `W` stored `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }
}

/// A small fully connected network in 64-bit floats.
///
/// The final layer's activations are multiplied by `output_scale`, which is
/// how the actor produces values in `(0, M)` from a sigmoid.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<Layer>,
    output_scale: f64,
    // Bumped on every parameter mutation; forward traces remember the value
    // they were recorded against so a backward pass on stale data is refused.
    revision: u64,
}

/// Per-parameter partials of a scalar loss, congruent with an `Mlp`.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone)]
pub struct LayerGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Gradients {
    /// Zero gradients congruent with `net`.
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerGrad {
                    weights: Array2::zeros(l.weights.dim()),
                    bias: Array1::zeros(l.bias.len()),
                })
                .collect(),
        }
    }

    /// Adds `other` in place; shapes must be congruent.
    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            layer.weights *= factor;
            layer.bias *= factor;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite()))
    }

    /// Iterator over all partials in a fixed order (layer by layer, weights
    /// row-major then bias).
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
    }
}

/// Intermediate values of one forward pass, needed for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: Array1<f64>,
    // Pre-activations z_l and post-activations a_l per layer.
    pre: Vec<Array1<f64>>,
    post: Vec<Array1<f64>>,
    revision: u64,
}

impl ForwardTrace {
    /// Network output recorded by this trace (scale already applied).
    pub fn output(&self) -> Array1<f64> {
        self.post.last().expect("trace has at least one layer").clone()
    }
}

impl Mlp {
    /// Two-layer perceptron `in -> hidden (relu) -> out (out_act)`, with the
    /// output multiplied by `output_scale`. Weights use scaled-uniform fan-in
    /// initialization, seeded.
    pub fn two_layer(
        in_dim: usize,
        hidden: usize,
        out_dim: usize,
        out_act: Activation,
        output_scale: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = vec![
            init_layer(in_dim, hidden, Activation::Relu, &mut rng),
            init_layer(hidden, out_dim, out_act, &mut rng),
        ];
        Mlp { layers, output_scale, revision: 0 }
    }

    pub fn from_layers(layers: Vec<Layer>, output_scale: f64) -> Self {
        assert!(!layers.is_empty(), "network needs at least one layer");
        for pair in layers.windows(2) {
            assert_eq!(
                pair[0].out_dim(),
                pair[1].in_dim(),
                "adjacent layer dims must be compatible"
            );
        }
        Mlp { layers, output_scale, revision: 0 }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output_scale(&self) -> f64 {
        self.output_scale
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").out_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Checks this network against an expected `(input, output)` signature.
    pub fn ensure_shape(&self, in_dim: usize, out_dim: usize) -> Result<()> {
        if self.input_dim() != in_dim || self.output_dim() != out_dim {
            return Err(NeuralError::ShapeMismatch {
                expected: format!("{}->{}", in_dim, out_dim),
                found: format!("{}->{}", self.input_dim(), self.output_dim()),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Array1<f64>> {
        Ok(self.forward_trace(input)?.output())
    }

    /// Forward pass keeping every intermediate value for `backward`.
    pub fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace> {
        if input.len() != self.input_dim() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.input_dim(),
                found: input.len(),
            });
        }
        let input = Array1::from_vec(input.to_vec());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.weights.dot(&x) + &layer.bias;
            let mut a = z.mapv(|v| layer.activation.apply(v));
            if i == last {
                a *= self.output_scale;
            }
            pre.push(z);
            post.push(a.clone());
            x = a;
        }
        Ok(ForwardTrace { input, pre, post, revision: self.revision })
    }

    /// Exact analytic backward pass.
    ///
    /// `upstream` is dL/dy for the scaled network output y. Returns the
    /// parameter gradients and dL/dx with respect to the network input, which
    /// the policy-gradient chain rule needs from the critic.
    pub fn backward(&self, trace: &ForwardTrace, upstream: &[f64]) -> Result<(Gradients, Array1<f64>)> {
        if trace.revision != self.revision {
            return Err(NeuralError::StaleTrace);
        }
        if upstream.len() != self.output_dim() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.output_dim(),
                found: upstream.len(),
            });
        }
        let last = self.layers.len() - 1;
        let mut grads: Vec<LayerGrad> = Vec::with_capacity(self.layers.len());
        let mut delta = Array1::from_vec(upstream.to_vec());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let mut scale = 1.0;
            if i == last {
                scale = self.output_scale;
            }
            // dL/dz = dL/da * scale * act'(z)
            let dz = &delta * scale * &trace.pre[i].mapv(|z| layer.activation.derivative(z));
            let layer_input = if i == 0 { &trace.input } else { &trace.post[i - 1] };
            let dw = dz.view().insert_axis(Axis(1)).to_owned() * layer_input.view().insert_axis(Axis(0));
            grads.push(LayerGrad { weights: dw, bias: dz.clone() });
            delta = layer.weights.t().dot(&dz);
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, delta))
    }

    /// Direct parameter access for the optimizer and soft updates. Any call
    /// invalidates outstanding forward traces.
    pub fn layers_mut(&mut self) -> &mut Vec<Layer> {
        self.revision += 1;
        &mut self.layers
    }

    pub(crate) fn bump_revision(&mut self) {
        self.revision += 1;
    }

    pub fn congruent_with(&self, other: &Mlp) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| {
                    a.weights.dim() == b.weights.dim()
                        && a.bias.len() == b.bias.len()
                        && a.activation == b.activation
                })
            && self.output_scale == other.output_scale
    }
}

fn init_layer(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Layer {
    let bound = 1.0 / (in_dim as f64).sqrt();
    let weights = Array2::from_shape_fn((out_dim, in_dim), |_| rng.random_range(-bound..bound));
    let bias = Array1::from_shape_fn(out_dim, |_| rng.random_range(-bound..bound));
    Layer { weights, bias, activation }
}

/// Target network blend: `target <- tau * online + (1 - tau) * target`.
pub fn soft_update(target: &mut Mlp, online: &Mlp, tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(NeuralError::InvalidTau(tau));
    }
    if !target.congruent_with(online) {
        return Err(NeuralError::ShapeMismatch {
            expected: format!("{}->{}", online.input_dim(), online.output_dim()),
            found: format!("{}->{}", target.input_dim(), target.output_dim()),
        });
    }
    // t + tau*(o - t) keeps target == online an exact fixed point; tau == 1
    // is special-cased so it copies exactly.
    let blend = move |tv: &mut f64, ov: &f64| {
        if tau == 1.0 {
            *tv = *ov;
        } else {
            *tv += tau * (*ov - *tv);
        }
    };
    for (t, o) in target.layers.iter_mut().zip(online.layers.iter()) {
        t.weights.zip_mut_with(&o.weights, |tv, ov| blend(tv, ov));
        t.bias.zip_mut_with(&o.bias, |tv, ov| blend(tv, ov));
    }
    target.bump_revision();
    Ok(())
}
