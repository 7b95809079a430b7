use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::params::join;
use super::{dot, softmax, Activation, Init, Linear, Matrix, ParamSet, ParamView, ParamViewMut};
use crate::{Error, Result};

/// Single-head scaled dot-product self-attention with a position-wise
/// feed-forward map and a residual connection:
///
/// `z_i = Σ_j softmax_j(q_i·k_j / √d) v_j`, `out_i = x_i + tanh(W_o z_i + b_o)`
///
/// where `q = W_q x`, `k = W_k x`, `v = W_v x`. No positional encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfAttention {
    pub query: Matrix,
    pub key: Matrix,
    pub value: Matrix,
    pub output: Linear,
}

#[derive(Debug, Clone)]
pub struct AttentionCache {
    x: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    // tanh(W_o z + b_o)
    mapped: Vec<Vec<f64>>,
}

impl AttentionCache {
    /// Row `i` holds the attention distribution of position `i`.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn outputs(&self) -> Vec<Vec<f64>> {
        self.x
            .iter()
            .zip(&self.mapped)
            .map(|(x, m)| x.iter().zip(m).map(|(a, b)| a + b).collect())
            .collect()
    }
}

impl SelfAttention {
    pub fn init(dim: usize, init: &mut Init) -> Self {
        Self {
            query: init.xavier(dim, dim),
            key: init.xavier(dim, dim),
            value: init.xavier(dim, dim),
            output: Linear::init(dim, dim, init),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            query: Matrix::zeros(dim, dim),
            key: Matrix::zeros(dim, dim),
            value: Matrix::zeros(dim, dim),
            output: Linear::zeros(dim, dim),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.dim())
    }

    pub fn dim(&self) -> usize {
        self.query.cols()
    }

    fn scale(&self) -> f64 {
        1.0 / libm::sqrt(self.dim() as f64)
    }

    pub fn forward(&self, seq: &[Vec<f64>]) -> Result<AttentionCache> {
        if seq.is_empty() {
            return Err(Error::Contract("self-attention over an empty sequence".into()));
        }
        if let Some(x) = seq.iter().find(|x| x.len() != self.dim()) {
            return Err(Error::Dimension(format!(
                "attention input has {} values, expected {}",
                x.len(),
                self.dim()
            )));
        }
        let q: Vec<Vec<f64>> = seq.iter().map(|x| self.query.matvec(x)).collect();
        let k: Vec<Vec<f64>> = seq.iter().map(|x| self.key.matvec(x)).collect();
        let v: Vec<Vec<f64>> = seq.iter().map(|x| self.value.matvec(x)).collect();
        let scale = self.scale();
        let mut weights = Vec::with_capacity(seq.len());
        let mut z = Vec::with_capacity(seq.len());
        let mut mapped = Vec::with_capacity(seq.len());
        for qi in &q {
            let logits: Vec<f64> = k.iter().map(|kj| dot(qi, kj) * scale).collect();
            let w = softmax(&logits)?;
            let mut zi = vec![0.0; self.dim()];
            for (wj, vj) in w.iter().zip(&v) {
                zi.iter_mut().zip(vj).for_each(|(a, b)| *a += wj * b);
            }
            mapped.push(self.output.apply(&zi, Activation::Tanh)?);
            weights.push(w);
            z.push(zi);
        }
        Ok(AttentionCache { x: seq.to_vec(), q, k, v, weights, z, mapped })
    }

    pub fn backward(&self, cache: &AttentionCache, d_out: &[Vec<f64>], grad: &mut SelfAttention) -> Vec<Vec<f64>> {
        let n = cache.x.len();
        let d = self.dim();
        let scale = self.scale();
        let mut dx: Vec<Vec<f64>> = d_out.to_vec();
        let mut dq = vec![vec![0.0; d]; n];
        let mut dk = vec![vec![0.0; d]; n];
        let mut dv = vec![vec![0.0; d]; n];
        for i in 0..n {
            let d_pre: Vec<f64> = d_out[i]
                .iter()
                .zip(&cache.mapped[i])
                .map(|(g, y)| g * (1.0 - y * y))
                .collect();
            let dz = self.output.backward(&cache.z[i], &d_pre, &mut grad.output);
            let w = &cache.weights[i];
            let dw: Vec<f64> = cache.v.iter().map(|vj| dot(&dz, vj)).collect();
            for j in 0..n {
                dv[j].iter_mut().zip(&dz).for_each(|(a, b)| *a += w[j] * b);
            }
            let mean = dot(w, &dw);
            for j in 0..n {
                let ds = w[j] * (dw[j] - mean) * scale;
                if ds == 0.0 {
                    continue;
                }
                dq[i].iter_mut().zip(&cache.k[j]).for_each(|(a, b)| *a += ds * b);
                dk[j].iter_mut().zip(&cache.q[i]).for_each(|(a, b)| *a += ds * b);
            }
        }
        for i in 0..n {
            let x = &cache.x[i];
            grad.query.outer_acc(&dq[i], x);
            grad.key.outer_acc(&dk[i], x);
            grad.value.outer_acc(&dv[i], x);
            self.query.matvec_t_acc(&dq[i], &mut dx[i]);
            self.key.matvec_t_acc(&dk[i], &mut dx[i]);
            self.value.matvec_t_acc(&dv[i], &mut dx[i]);
        }
        dx
    }
}

impl ParamSet for SelfAttention {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<ParamView<'a>>) {
        for (name, m) in [("query", &self.query), ("key", &self.key), ("value", &self.value)] {
            out.push(ParamView { name: join(prefix, name), shape: vec![m.rows(), m.cols()], data: m.data() });
        }
        self.output.collect(&join(prefix, "output"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<ParamViewMut<'a>>) {
        for (name, m) in [("query", &mut self.query), ("key", &mut self.key), ("value", &mut self.value)] {
            let shape = vec![m.rows(), m.cols()];
            out.push(ParamViewMut { name: join(prefix, name), shape, data: m.data_mut() });
        }
        self.output.collect_mut(&join(prefix, "output"), out);
    }
}
