use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::params::join;
use super::{Init, Matrix, ParamSet, ParamView, ParamViewMut};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(v),
            Activation::Identity => v,
        }
    }

    /// Derivative expressed through the activation's output.
    pub fn derivative_at_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// Affine map `W x + b` with `W: out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn new(weight: Matrix, bias: Vec<f64>) -> Result<Self> {
        if weight.rows() != bias.len() {
            return Err(Error::Dimension(format!(
                "weight has {} rows but bias has {} entries",
                weight.rows(),
                bias.len()
            )));
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { weight: Matrix::zeros(out_dim, in_dim), bias: vec![0.0; out_dim] }
    }

    pub fn init(in_dim: usize, out_dim: usize, init: &mut Init) -> Self {
        Self { weight: init.xavier(out_dim, in_dim), bias: vec![0.0; out_dim] }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.in_dim(), self.out_dim())
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    /// Pre-activation `W x + b`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim() {
            return Err(Error::Dimension(format!(
                "linear layer expects input of {} values, got {}",
                self.in_dim(),
                x.len()
            )));
        }
        let mut y = self.bias.clone();
        self.weight.matvec_acc(x, &mut y);
        Ok(y)
    }

    /// `activation(W x + b)`
    pub fn apply(&self, x: &[f64], activation: Activation) -> Result<Vec<f64>> {
        let mut y = self.forward(x)?;
        y.iter_mut().for_each(|v| *v = activation.apply(*v));
        Ok(y)
    }

    /// Given the gradient at the pre-activation, accumulate `dW`, `db` into
    /// `grad` and return the gradient with respect to `x`.
    pub fn backward(&self, x: &[f64], d_pre: &[f64], grad: &mut Linear) -> Vec<f64> {
        grad.weight.outer_acc(d_pre, x);
        grad.bias.iter_mut().zip(d_pre).for_each(|(g, d)| *g += d);
        let mut dx = vec![0.0; self.in_dim()];
        self.weight.matvec_t_acc(d_pre, &mut dx);
        dx
    }
}

impl ParamSet for Linear {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<ParamView<'a>>) {
        out.push(ParamView {
            name: join(prefix, "weight"),
            shape: vec![self.weight.rows(), self.weight.cols()],
            data: self.weight.data(),
        });
        out.push(ParamView { name: join(prefix, "bias"), shape: vec![self.bias.len()], data: &self.bias });
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<ParamViewMut<'a>>) {
        let shape = vec![self.weight.rows(), self.weight.cols()];
        out.push(ParamViewMut { name: join(prefix, "weight"), shape, data: self.weight.data_mut() });
        let shape = vec![self.bias.len()];
        out.push(ParamViewMut { name: join(prefix, "bias"), shape, data: &mut self.bias });
    }
}

/// A stack of [`Linear`] layers sharing one activation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward {
    pub layers: Vec<Linear>,
    pub activation: Activation,
}

/// Per-layer inputs and activated outputs of one [`FeedForward`] pass.
#[derive(Debug, Clone)]
pub struct FeedForwardCache {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<Vec<f64>>,
}

impl FeedForwardCache {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().or(self.inputs.first()).map_or(&[], |v| v.as_slice())
    }
}

impl FeedForward {
    /// `sizes = [in, hidden.., out]`
    pub fn init(sizes: &[usize], activation: Activation, init: &mut Init) -> Self {
        let layers = sizes.windows(2).map(|w| Linear::init(w[0], w[1], init)).collect();
        Self { layers, activation }
    }

    pub fn zeros_like(&self) -> Self {
        Self { layers: self.layers.iter().map(Linear::zeros_like).collect(), activation: self.activation }
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, Linear::in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, Linear::out_dim)
    }

    pub fn forward(&self, x: &[f64]) -> Result<FeedForwardCache> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_vec();
        for layer in &self.layers {
            let y = layer.apply(&cur, self.activation)?;
            inputs.push(core::mem::replace(&mut cur, y.clone()));
            outputs.push(y);
        }
        if self.layers.is_empty() {
            inputs.push(cur);
        }
        Ok(FeedForwardCache { inputs, outputs })
    }

    pub fn backward(&self, cache: &FeedForwardCache, d_out: &[f64], grad: &mut FeedForward) -> Vec<f64> {
        let mut d = d_out.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let d_pre: Vec<f64> = d
                .iter()
                .zip(&cache.outputs[i])
                .map(|(g, y)| g * self.activation.derivative_at_output(*y))
                .collect();
            d = layer.backward(&cache.inputs[i], &d_pre, &mut grad.layers[i]);
        }
        d
    }
}

impl ParamSet for FeedForward {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<ParamView<'a>>) {
        for (i, l) in self.layers.iter().enumerate() {
            l.collect(&join(prefix, &format!("{i}")), out);
        }
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<ParamViewMut<'a>>) {
        for (i, l) in self.layers.iter_mut().enumerate() {
            l.collect_mut(&join(prefix, &format!("{i}")), out);
        }
    }
}
