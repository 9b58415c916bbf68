//! Laplace exploration noise with exact multiplicative decay.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dvsl_env::N_CONTROLLED_LANES;

#[derive(Debug, Clone)]
pub struct LaplaceNoise {
    b0: f64,
    decay: f64,
    steps: u32,
}

impl LaplaceNoise {
    pub fn new(b0: f64, decay: f64) -> Self {
        assert!(b0 > 0.0 && decay > 0.0 && decay <= 1.0);
        LaplaceNoise { b0, decay, steps: 0 }
    }

    /// Current scale b = b0 * decay^n, computed from the step count so the
    /// closed form holds bit-exactly.
    pub fn scale(&self) -> f64 {
        self.b0 * self.decay.powi(self.steps as i32)
    }

    pub fn decay_step(&mut self) {
        self.steps += 1;
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// One Laplace(0, b) draw via inverse-CDF sampling.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random_range(-0.5..0.5);
        let b = self.scale();
        -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
    }

    pub fn sample_vec(&self, rng: &mut ChaCha8Rng) -> [f64; N_CONTROLLED_LANES] {
        let mut out = [0.0; N_CONTROLLED_LANES];
        for v in out.iter_mut() {
            *v = self.sample(rng);
        }
        out
    }
}
