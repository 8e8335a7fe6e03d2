//! Deterministic RNG for sensor-noise synthesis and randomized checks.
//!
//! The generator is SplitMix64: a single 64-bit state advanced by the golden
//! constant and scrambled by two xor-shift multiplies. Gaussians come from
//! the Box-Muller transform on the uniform stream. Both algorithms are fixed
//! here on purpose: a seed pins the entire simulation output, so CSV files
//! reproduce bit-for-bit across runs and platforms with the same libm.

use crate::so3::Vec3;

/// SplitMix64 stream with Box-Muller gaussians.
#[derive(Debug, Clone)]
pub struct SimRng {
    state: u64,
    spare_gaussian: Option<f64>,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_gaussian: None,
        }
    }

    /// Next raw 64-bit value.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; the second value of each pair is
    /// cached so consecutive draws consume the uniform stream evenly.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        // 1 - uniform() lies in (0, 1], keeping the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_gaussian = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Vector of three independent gaussians with the given standard
    /// deviation.
    pub fn gaussian_vec3(&mut self, std: f64) -> Vec3 {
        Vec3::new(
            std * self.gaussian(),
            std * self.gaussian(),
            std * self.gaussian(),
        )
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniformly distributed unit vector.
    pub fn unit_vector(&mut self) -> Vec3 {
        loop {
            let v = self.gaussian_vec3(1.0);
            let n = v.norm();
            if n > 1e-6 {
                return v / n;
            }
        }
    }
}
