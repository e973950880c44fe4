use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::softmax_from_logits;
use crate::error::{Error, Result};

/// Affine layer `y = W x + b`, `W` stored row-major `n_out × n_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcParams {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl FcParams {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self { n_in, n_out, weights: vec![0.0; n_in * n_out], bias: vec![0.0; n_out] }
    }

    pub fn init<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        Self { n_in, n_out, weights: super::he_normal(n_in * n_out, n_in, rng), bias: vec![0.0; n_out] }
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn check(&self, x_len: usize) -> Result<()> {
        if self.weights.len() != self.n_in * self.n_out || self.bias.len() != self.n_out {
            return Err(Error::Shape("fc parameter arrays do not match declared widths".into()));
        }
        if x_len != self.n_in {
            return Err(Error::Shape(alloc::format!("fc expects {} inputs, got {x_len}", self.n_in)));
        }
        Ok(())
    }
}

pub fn fc_forward(x: &[f64], p: &FcParams) -> Result<Vec<f64>> {
    p.check(x.len())?;
    Ok(p
        .weights
        .chunks_exact(p.n_in)
        .zip(&p.bias)
        .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect())
}

/// Returns `(dL/dx, dL/dparams)` for upstream gradient `grad_out`.
pub fn fc_backward(x: &[f64], p: &FcParams, grad_out: &[f64]) -> Result<(Vec<f64>, FcParams)> {
    p.check(x.len())?;
    if grad_out.len() != p.n_out {
        return Err(Error::Shape("fc upstream gradient has the wrong length".into()));
    }
    let mut gx = vec![0.0; p.n_in];
    let mut gp = FcParams::zeros(p.n_in, p.n_out);
    for (o, &g) in grad_out.iter().enumerate() {
        gp.bias[o] = g;
        let row = &p.weights[o * p.n_in..(o + 1) * p.n_in];
        let grow = &mut gp.weights[o * p.n_in..(o + 1) * p.n_in];
        for i in 0..p.n_in {
            grow[i] = g * x[i];
            gx[i] += g * row[i];
        }
    }
    Ok((gx, gp))
}

/// Two-class softmax read-out without bias; row `e` of `weights` scores class `e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxParams {
    pub n_in: usize,
    pub weights: Vec<f64>,
}

impl SoftmaxParams {
    pub fn zeros(n_in: usize) -> Self {
        Self { n_in, weights: vec![0.0; 2 * n_in] }
    }

    pub fn init<R: Rng + ?Sized>(n_in: usize, rng: &mut R) -> Self {
        Self { n_in, weights: super::he_normal(2 * n_in, n_in, rng) }
    }

    pub fn n_params(&self) -> usize {
        self.weights.len()
    }

    fn check(&self, x_len: usize) -> Result<()> {
        if self.weights.len() != 2 * self.n_in || x_len != self.n_in {
            return Err(Error::Shape(alloc::format!(
                "softmax expects {} inputs and {} weights",
                self.n_in,
                2 * self.n_in
            )));
        }
        Ok(())
    }
}

/// Class scores `W_S^e · x`.
pub fn softmax_logits(x: &[f64], p: &SoftmaxParams) -> Result<[f64; 2]> {
    p.check(x.len())?;
    let dot = |row: &[f64]| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
    Ok([dot(&p.weights[..p.n_in]), dot(&p.weights[p.n_in..])])
}

/// Class probabilities `exp(W_S^e x) / Σ_i exp(W_S^i x)`.
pub fn softmax2(x: &[f64], p: &SoftmaxParams) -> Result<[f64; 2]> {
    Ok(softmax_from_logits(softmax_logits(x, p)?))
}

/// Backward through the logits: returns `(dL/dx, dL/dW_S)`.
pub fn softmax_backward(x: &[f64], p: &SoftmaxParams, grad_logits: [f64; 2]) -> Result<(Vec<f64>, SoftmaxParams)> {
    p.check(x.len())?;
    let n = p.n_in;
    let mut gx = vec![0.0; n];
    let mut gp = SoftmaxParams::zeros(n);
    for (e, &g) in grad_logits.iter().enumerate() {
        for i in 0..n {
            gp.weights[e * n + i] = g * x[i];
            gx[i] += g * p.weights[e * n + i];
        }
    }
    Ok((gx, gp))
}
