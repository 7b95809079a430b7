use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Matrix;

/// Seeded parameter initializer.
#[derive(Debug, Clone)]
pub struct Init {
    rng: ChaCha8Rng,
}

impl Init {
    pub const EMBEDDING_RANGE: f64 = 0.05;

    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, n: usize, bound: f64) -> Vec<f64> {
        (0..n).map(|_| self.rng.gen_range(-bound..=bound)).collect()
    }

    /// Uniform(-0.05, 0.05) embedding rows.
    pub fn embedding(&mut self, rows: usize, dim: usize) -> Matrix {
        let data = self.uniform(rows * dim, Self::EMBEDDING_RANGE);
        Matrix::from_vec(rows, dim, data).expect("sized by construction")
    }

    /// Xavier/Glorot uniform for an `out x in` weight.
    pub fn xavier(&mut self, rows: usize, cols: usize) -> Matrix {
        let bound = libm::sqrt(6.0 / (rows + cols).max(1) as f64);
        let data = self.uniform(rows * cols, bound);
        Matrix::from_vec(rows, cols, data).expect("sized by construction")
    }
}
