use ndarray::{Array1, Array2};

use crate::mlp::{Gradients, Mlp};

#[derive(Debug, Clone)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        AdamConfig { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    /// The gradient contained a NaN or infinity; the step was skipped.
    SkippedNonFinite,
}

/// Adaptive-moment optimizer. Deterministic given its state and inputs.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
    t: i32,
}

impl Adam {
    pub fn new(config: AdamConfig, net: &Mlp) -> Self {
        let m = net
            .layers()
            .iter()
            .map(|l| (Array2::zeros(l.weights.dim()), Array1::zeros(l.bias.len())))
            .collect::<Vec<_>>();
        let v = m.clone();
        Adam { config, m, v, t: 0 }
    }

    pub fn learning_rate(&self) -> f64 {
        self.config.learning_rate
    }

    /// Applies one descent step. Non-finite gradients are rejected: the step
    /// is skipped, optimizer state is untouched, and the incident is logged
    /// by the caller via the returned outcome.
    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) -> StepOutcome {
        if !grads.is_finite() {
            return StepOutcome::SkippedNonFinite;
        }
        self.t += 1;
        let b1 = self.config.beta1;
        let b2 = self.config.beta2;
        let bc1 = 1.0 - b1.powi(self.t);
        let bc2 = 1.0 - b2.powi(self.t);
        let lr = self.config.learning_rate;
        let eps = self.config.epsilon;
        for (i, layer) in net.layers_mut().iter_mut().enumerate() {
            let g = &grads.layers[i];
            let (mw, mb) = &mut self.m[i];
            let (vw, vb) = &mut self.v[i];
            mw.zip_mut_with(&g.weights, |m, g| *m = b1 * *m + (1.0 - b1) * g);
            mb.zip_mut_with(&g.bias, |m, g| *m = b1 * *m + (1.0 - b1) * g);
            vw.zip_mut_with(&g.weights, |v, g| *v = b2 * *v + (1.0 - b2) * g * g);
            vb.zip_mut_with(&g.bias, |v, g| *v = b2 * *v + (1.0 - b2) * g * g);
            ndarray::Zip::from(&mut layer.weights)
                .and(&*mw)
                .and(&*vw)
                .for_each(|w, m, v| *w -= lr * (m / bc1) / ((v / bc2).sqrt() + eps));
            ndarray::Zip::from(&mut layer.bias)
                .and(&*mb)
                .and(&*vb)
                .for_each(|w, m, v| *w -= lr * (m / bc1) / ((v / bc2).sqrt() + eps));
        }
        StepOutcome::Applied
    }
}
