use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ArchConfig;
use crate::dataset::Standardizer;
use crate::error::{Error, Result};
use crate::metrics::Detector;
use crate::neural::{
    conv3x3_backward, conv3x3_forward, fc_backward, fc_forward, maxpool2x2_backward, maxpool2x2_forward,
    relu_backward, relu_forward, softmax_backward, softmax_from_logits, softmax_logits, ConvParams, FcParams,
    PoolIndex, SoftmaxParams, Tensor,
};
use crate::sensing::{Hypothesis, ReportMode, SensingMatrix};

/// Trainable parameters, in declaration order: conv blocks, FC1, FC2, softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layers {
    pub convs: Vec<ConvParams>,
    pub fc1: FcParams,
    pub fc2: FcParams,
    pub softmax: SoftmaxParams,
}

impl Layers {
    pub fn zeros_like(&self) -> Self {
        Self {
            convs: self.convs.iter().map(|c| ConvParams::zeros(c.in_ch, c.out_ch)).collect(),
            fc1: FcParams::zeros(self.fc1.n_in, self.fc1.n_out),
            fc2: FcParams::zeros(self.fc2.n_in, self.fc2.n_out),
            softmax: SoftmaxParams::zeros(self.softmax.n_in),
        }
    }

    /// Parameter blocks in declaration order.
    pub fn blocks(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(2 * self.convs.len() + 5);
        for c in &self.convs {
            out.push(&c.weights);
            out.push(&c.bias);
        }
        out.extend([&self.fc1.weights[..], &self.fc1.bias, &self.fc2.weights, &self.fc2.bias, &self.softmax.weights]);
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(2 * self.convs.len() + 5);
        for c in &mut self.convs {
            out.push(&mut c.weights);
            out.push(&mut c.bias);
        }
        out.extend([
            &mut self.fc1.weights[..],
            &mut self.fc1.bias,
            &mut self.fc2.weights,
            &mut self.fc2.bias,
            &mut self.softmax.weights,
        ]);
        out
    }

    pub fn n_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    pub(crate) fn add_assign(&mut self, other: &Layers) {
        for (a, b) in self.blocks_mut().into_iter().zip(other.blocks()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub(crate) fn scale(&mut self, s: f64) {
        for a in self.blocks_mut() {
            a.iter_mut().for_each(|x| *x *= s);
        }
    }
}

/// The fusion CNN plus everything needed to feed it raw reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnModel {
    pub arch: ArchConfig,
    /// `(n_su, n_bands)` of the input matrix.
    pub input_dims: (usize, usize),
    pub mode: ReportMode,
    pub layers: Layers,
    /// Input row `r` is SU `su_permutation[r]`.
    pub su_permutation: Vec<usize>,
    /// Present for SD models.
    pub standardizer: Option<Standardizer>,
}

/// Class probabilities and the resulting decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Output {
    pub probs: [f64; 2],
    pub decision: Hypothesis,
}

impl Output {
    /// `H0` only when its probability is strictly larger; ties protect the PU.
    pub fn from_probs(probs: [f64; 2]) -> Self {
        let decision = if probs[0] > probs[1] { Hypothesis::H0 } else { Hypothesis::H1 };
        Self { probs, decision }
    }
}

/// Build and initialize `[conv3x3 → ReLU → maxpool]×N_C → FC → ReLU → FC → softmax`
/// for an `input_dims` matrix, with the identity SU order.
pub fn build_model<R: Rng + ?Sized>(arch: &ArchConfig, input_dims: (usize, usize), rng: &mut R) -> Result<CnnModel> {
    arch.validate()?;
    let flat = arch.flat_len(input_dims)?;
    let mut in_ch = 1;
    let mut convs = Vec::with_capacity(arch.n_conv_blocks);
    for &depth in &arch.conv_depths {
        convs.push(ConvParams::init(in_ch, depth, rng));
        in_ch = depth;
    }
    let (f1, f2) = arch.fc_widths;
    let fc1 = FcParams::init(flat, f1, rng);
    let fc2 = FcParams::init(f1, f2, rng);
    let softmax = SoftmaxParams::init(f2, rng);
    Ok(CnnModel {
        arch: arch.clone(),
        input_dims,
        mode: ReportMode::Sd,
        layers: Layers { convs, fc1, fc2, softmax },
        su_permutation: (0..input_dims.0).collect(),
        standardizer: None,
    })
}

pub fn count_parameters(model: &CnnModel) -> usize {
    model.layers.n_params()
}

/// Intermediate values kept for the backward pass.
pub(crate) struct Cache {
    conv_in: Vec<Tensor>,
    conv_out: Vec<Tensor>,
    pools: Vec<PoolIndex>,
    flat: Vec<f64>,
    fc1_out: Vec<f64>,
    hidden: Vec<f64>,
    fc2_out: Vec<f64>,
    pub(crate) logits: [f64; 2],
}

impl CnnModel {
    pub fn n_params(&self) -> usize {
        self.layers.n_params()
    }

    /// Standardize and row-permute a raw matrix into the network input.
    pub fn prepare_input(&self, m: &SensingMatrix) -> Result<Tensor> {
        if m.mode != self.mode {
            return Err(Error::ModeMismatch { expected: self.mode.name(), found: m.mode.name() });
        }
        if m.dims() != self.input_dims {
            return Err(Error::Shape(alloc::format!(
                "model takes {:?} matrices, got {:?}",
                self.input_dims,
                m.dims()
            )));
        }
        let feats = crate::dataset::features(self.standardizer.as_ref(), m);
        let nb = m.n_bands;
        let mut data = Vec::with_capacity(feats.len());
        for &src in &self.su_permutation {
            data.extend_from_slice(&feats[src * nb..(src + 1) * nb]);
        }
        Tensor::from_vec(m.n_su, nb, 1, data)
    }

    pub(crate) fn forward_cached(&self, x: &Tensor) -> Result<Cache> {
        if x.shape() != (self.input_dims.0, self.input_dims.1, 1) {
            return Err(Error::Shape(alloc::format!("input tensor {:?} does not match the model", x.shape())));
        }
        let nc = self.layers.convs.len();
        let mut conv_in = Vec::with_capacity(nc);
        let mut conv_out = Vec::with_capacity(nc);
        let mut pools = Vec::with_capacity(nc);
        let mut cur = x.clone();
        for p in &self.layers.convs {
            let y = conv3x3_forward(&cur, p)?;
            let r = relu_forward(&y);
            let (pooled, idx) = maxpool2x2_forward(&r);
            conv_in.push(cur);
            conv_out.push(y);
            pools.push(idx);
            cur = pooled;
        }
        let flat = cur.data;
        let fc1_out = fc_forward(&flat, &self.layers.fc1)?;
        let hidden: Vec<f64> = fc1_out.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        let fc2_out = fc_forward(&hidden, &self.layers.fc2)?;
        let logits = softmax_logits(&fc2_out, &self.layers.softmax)?;
        Ok(Cache { conv_in, conv_out, pools, flat, fc1_out, hidden, fc2_out, logits })
    }

    /// Parameter gradients for upstream logit gradient `grad_logits`.
    pub(crate) fn backward(&self, cache: &Cache, grad_logits: [f64; 2]) -> Result<Layers> {
        let l = &self.layers;
        let (g_fc2_out, g_soft) = softmax_backward(&cache.fc2_out, &l.softmax, grad_logits)?;
        let (g_hidden, g_fc2) = fc_backward(&cache.hidden, &l.fc2, &g_fc2_out)?;
        let g_fc1_out: Vec<f64> =
            g_hidden.iter().zip(&cache.fc1_out).map(|(&g, &v)| if v > 0.0 { g } else { 0.0 }).collect();
        let (g_flat, g_fc1) = fc_backward(&cache.flat, &l.fc1, &g_fc1_out)?;
        debug_assert_eq!(g_flat.len(), cache.flat.len());

        let nc = l.convs.len();
        let mut conv_grads: Vec<ConvParams> = Vec::with_capacity(nc);
        let last = &cache.pools[nc - 1];
        let (ph, pw, pc) = (
            last.input_shape.0.div_ceil(2),
            last.input_shape.1.div_ceil(2),
            last.input_shape.2,
        );
        let mut grad = Tensor::from_vec(ph, pw, pc, g_flat)?;
        for i in (0..nc).rev() {
            let g_relu = maxpool2x2_backward(&cache.pools[i], &grad)?;
            let g_conv = relu_backward(&cache.conv_out[i], &g_relu)?;
            let (g_in, g_p) = conv3x3_backward(&cache.conv_in[i], &l.convs[i], &g_conv)?;
            conv_grads.push(g_p);
            grad = g_in;
        }
        conv_grads.reverse();
        Ok(Layers { convs: conv_grads, fc1: g_fc1, fc2: g_fc2, softmax: g_soft })
    }

    /// Run the network on a prepared (standardized, permuted) input.
    pub fn forward(&self, x: &Tensor) -> Result<Output> {
        let cache = self.forward_cached(x)?;
        Ok(Output::from_probs(softmax_from_logits(cache.logits)))
    }

    /// Logits for a prepared input.
    pub fn logits(&self, x: &Tensor) -> Result<[f64; 2]> {
        Ok(self.forward_cached(x)?.logits)
    }

    /// Decide H0/H1 for a raw sensing matrix.
    pub fn predict(&self, m: &SensingMatrix) -> Result<Hypothesis> {
        Ok(self.forward(&self.prepare_input(m)?)?.decision)
    }

    pub fn predict_batch(&self, ms: &[SensingMatrix]) -> Result<Vec<Hypothesis>> {
        ms.iter().map(|m| self.predict(m)).collect()
    }

    /// Check that every layer chains from the declared input and that the
    /// stored SU order is a permutation.
    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        let flat = self.arch.flat_len(self.input_dims)?;
        let l = &self.layers;
        let mut in_ch = 1;
        if l.convs.len() != self.arch.n_conv_blocks {
            return Err(Error::Shape("conv block count differs from the architecture".into()));
        }
        for (c, &d) in l.convs.iter().zip(&self.arch.conv_depths) {
            if c.in_ch != in_ch || c.out_ch != d || c.weights.len() != 9 * in_ch * d || c.bias.len() != d {
                return Err(Error::Shape("conv block does not chain".into()));
            }
            in_ch = d;
        }
        let (f1, f2) = self.arch.fc_widths;
        let fc_ok = |p: &FcParams, i: usize, o: usize| {
            p.n_in == i && p.n_out == o && p.weights.len() == i * o && p.bias.len() == o
        };
        if !fc_ok(&l.fc1, flat, f1) || !fc_ok(&l.fc2, f1, f2) {
            return Err(Error::Shape("fully connected layers do not chain".into()));
        }
        if l.softmax.n_in != f2 || l.softmax.weights.len() != 2 * f2 {
            return Err(Error::Shape("softmax layer does not chain".into()));
        }
        let mut seen = alloc::vec![false; self.input_dims.0];
        if self.su_permutation.len() != self.input_dims.0
            || !self.su_permutation.iter().all(|&i| i < seen.len() && !core::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidArgument("su_permutation is not a bijection".into()));
        }
        if self.mode == ReportMode::Sd && self.standardizer.is_none() {
            return Err(Error::InvalidArgument("SD model has no standardizer".into()));
        }
        Ok(())
    }
}

impl Detector for CnnModel {
    fn decide(&self, m: &SensingMatrix) -> Result<Hypothesis> {
        self.predict(m)
    }
}
