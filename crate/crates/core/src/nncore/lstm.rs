use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::params::join;
use super::{Init, Matrix, ParamSet, ParamView, ParamViewMut};
use crate::{Error, Result};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Unidirectional LSTM cell.
///
/// Gate rows are stacked as `[input; forget; output; candidate]`, each block
/// `hidden` rows tall: `z = W_x x + W_h h + b`, `i,f,o = σ(z)`,
/// `g = tanh(z)`, `c' = f∘c + i∘g`, `h' = o∘tanh(c')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    pub w_x: Matrix,
    pub w_h: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Step {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    // activated gates, 4*hidden
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

/// Everything [`Lstm::backward`] needs from one forward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    steps: Vec<Step>,
}

impl LstmCache {
    pub fn hidden_states(&self) -> Vec<Vec<f64>> {
        self.steps.iter().map(|s| s.h.clone()).collect()
    }

    pub fn final_hidden(&self) -> &[f64] {
        &self.steps.last().expect("non-empty by construction").h
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl Lstm {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_x: Matrix::zeros(4 * hidden, input),
            w_h: Matrix::zeros(4 * hidden, hidden),
            bias: vec![0.0; 4 * hidden],
        }
    }

    pub fn init(input: usize, hidden: usize, init: &mut Init) -> Self {
        Self {
            w_x: init.xavier(4 * hidden, input),
            w_h: init.xavier(4 * hidden, hidden),
            bias: vec![0.0; 4 * hidden],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.hidden_dim())
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_h.cols()
    }

    /// Run over `seq` from hidden state `h0` and a zero cell state.
    pub fn forward(&self, seq: &[Vec<f64>], h0: &[f64]) -> Result<LstmCache> {
        let hd = self.hidden_dim();
        if seq.is_empty() {
            return Err(Error::Contract("LSTM over an empty sequence".into()));
        }
        if h0.len() != hd {
            return Err(Error::Dimension(format!("initial state has {} values, hidden size is {hd}", h0.len())));
        }
        let mut steps = Vec::with_capacity(seq.len());
        let mut h = h0.to_vec();
        let mut c = vec![0.0; hd];
        for x in seq {
            if x.len() != self.input_dim() {
                return Err(Error::Dimension(format!(
                    "LSTM input has {} values, expected {}",
                    x.len(),
                    self.input_dim()
                )));
            }
            let mut z = self.bias.clone();
            self.w_x.matvec_acc(x, &mut z);
            self.w_h.matvec_acc(&h, &mut z);
            for v in &mut z[..3 * hd] {
                *v = sigmoid(*v);
            }
            for v in &mut z[3 * hd..] {
                *v = libm::tanh(*v);
            }
            let mut c_new = vec![0.0; hd];
            let mut tanh_c = vec![0.0; hd];
            let mut h_new = vec![0.0; hd];
            for j in 0..hd {
                let (i, f, o, g) = (z[j], z[hd + j], z[2 * hd + j], z[3 * hd + j]);
                c_new[j] = f * c[j] + i * g;
                tanh_c[j] = libm::tanh(c_new[j]);
                h_new[j] = o * tanh_c[j];
            }
            let h_prev = core::mem::replace(&mut h, h_new.clone());
            let c_prev = core::mem::replace(&mut c, c_new);
            steps.push(Step { x: x.clone(), h_prev, c_prev, gates: z, tanh_c, h: h_new });
        }
        Ok(LstmCache { steps })
    }

    /// Back-propagate through time.
    ///
    /// `d_hidden[t]` is the upstream gradient at output position `t`. Returns
    /// the input gradients per position and the gradient at `h0`.
    pub fn backward(&self, cache: &LstmCache, d_hidden: &[Vec<f64>], grad: &mut Lstm) -> (Vec<Vec<f64>>, Vec<f64>) {
        let hd = self.hidden_dim();
        let n = cache.steps.len();
        debug_assert_eq!(d_hidden.len(), n);
        let mut dxs = vec![Vec::new(); n];
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        let mut dz = vec![0.0; 4 * hd];
        for t in (0..n).rev() {
            let s = &cache.steps[t];
            for j in 0..hd {
                let dh = d_hidden[t][j] + dh_next[j];
                let (i, f, o, g) = (s.gates[j], s.gates[hd + j], s.gates[2 * hd + j], s.gates[3 * hd + j]);
                let tc = s.tanh_c[j];
                let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
                dz[j] = dc * g * i * (1.0 - i);
                dz[hd + j] = dc * s.c_prev[j] * f * (1.0 - f);
                dz[2 * hd + j] = dh * tc * o * (1.0 - o);
                dz[3 * hd + j] = dc * i * (1.0 - g * g);
                dc_next[j] = dc * f;
            }
            grad.w_x.outer_acc(&dz, &s.x);
            grad.w_h.outer_acc(&dz, &s.h_prev);
            grad.bias.iter_mut().zip(&dz).for_each(|(g, d)| *g += d);
            let mut dx = vec![0.0; self.input_dim()];
            self.w_x.matvec_t_acc(&dz, &mut dx);
            dxs[t] = dx;
            dh_next.fill(0.0);
            self.w_h.matvec_t_acc(&dz, &mut dh_next);
        }
        (dxs, dh_next)
    }

    /// Convenience for encoders that only read the last hidden state.
    pub fn backward_final(&self, cache: &LstmCache, d_final: &[f64], grad: &mut Lstm) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = cache.len();
        let mut d = vec![vec![0.0; self.hidden_dim()]; n];
        d[n - 1].copy_from_slice(d_final);
        self.backward(cache, &d, grad)
    }
}

impl ParamSet for Lstm {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<ParamView<'a>>) {
        out.push(ParamView { name: join(prefix, "w_x"), shape: vec![self.w_x.rows(), self.w_x.cols()], data: self.w_x.data() });
        out.push(ParamView { name: join(prefix, "w_h"), shape: vec![self.w_h.rows(), self.w_h.cols()], data: self.w_h.data() });
        out.push(ParamView { name: join(prefix, "bias"), shape: vec![self.bias.len()], data: &self.bias });
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<ParamViewMut<'a>>) {
        let shape = vec![self.w_x.rows(), self.w_x.cols()];
        out.push(ParamViewMut { name: join(prefix, "w_x"), shape, data: self.w_x.data_mut() });
        let shape = vec![self.w_h.rows(), self.w_h.cols()];
        out.push(ParamViewMut { name: join(prefix, "w_h"), shape, data: self.w_h.data_mut() });
        let shape = vec![self.bias.len()];
        out.push(ParamViewMut { name: join(prefix, "bias"), shape, data: &mut self.bias });
    }
}

/// Two LSTMs reading the sequence in opposite directions from a shared
/// initial hidden state. Output at position `t` is `[fwd_t ; bwd_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstm {
    pub fwd: Lstm,
    pub bwd: Lstm,
}

#[derive(Debug, Clone)]
pub struct BiLstmCache {
    fwd: LstmCache,
    // runs over the reversed sequence
    bwd: LstmCache,
}

impl BiLstmCache {
    pub fn outputs(&self) -> Vec<Vec<f64>> {
        let n = self.fwd.len();
        (0..n)
            .map(|t| {
                let mut v = self.fwd.steps[t].h.clone();
                v.extend_from_slice(&self.bwd.steps[n - 1 - t].h);
                v
            })
            .collect()
    }
}

impl BiLstm {
    pub fn init(input: usize, hidden: usize, init: &mut Init) -> Self {
        Self { fwd: Lstm::init(input, hidden, init), bwd: Lstm::init(input, hidden, init) }
    }

    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self { fwd: Lstm::zeros(input, hidden), bwd: Lstm::zeros(input, hidden) }
    }

    pub fn zeros_like(&self) -> Self {
        Self { fwd: self.fwd.zeros_like(), bwd: self.bwd.zeros_like() }
    }

    pub fn hidden_dim(&self) -> usize {
        self.fwd.hidden_dim()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.hidden_dim()
    }

    pub fn forward(&self, seq: &[Vec<f64>], h0: &[f64]) -> Result<BiLstmCache> {
        let fwd = self.fwd.forward(seq, h0)?;
        let reversed: Vec<Vec<f64>> = seq.iter().rev().cloned().collect();
        let bwd = self.bwd.forward(&reversed, h0)?;
        Ok(BiLstmCache { fwd, bwd })
    }

    /// Returns input gradients per position and the summed gradient at `h0`.
    pub fn backward(&self, cache: &BiLstmCache, d_out: &[Vec<f64>], grad: &mut BiLstm) -> (Vec<Vec<f64>>, Vec<f64>) {
        let hd = self.hidden_dim();
        let n = d_out.len();
        let d_fwd: Vec<Vec<f64>> = d_out.iter().map(|d| d[..hd].to_vec()).collect();
        let d_bwd: Vec<Vec<f64>> = d_out.iter().rev().map(|d| d[hd..].to_vec()).collect();
        let (mut dxs, mut dh0) = self.fwd.backward(&cache.fwd, &d_fwd, &mut grad.fwd);
        let (dxs_rev, dh0_b) = self.bwd.backward(&cache.bwd, &d_bwd, &mut grad.bwd);
        for (t, dx) in dxs.iter_mut().enumerate() {
            dx.iter_mut().zip(&dxs_rev[n - 1 - t]).for_each(|(a, b)| *a += b);
        }
        dh0.iter_mut().zip(&dh0_b).for_each(|(a, b)| *a += b);
        (dxs, dh0)
    }
}

impl ParamSet for BiLstm {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<ParamView<'a>>) {
        self.fwd.collect(&join(prefix, "fwd"), out);
        self.bwd.collect(&join(prefix, "bwd"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<ParamViewMut<'a>>) {
        self.fwd.collect_mut(&join(prefix, "fwd"), out);
        self.bwd.collect_mut(&join(prefix, "bwd"), out);
    }
}
