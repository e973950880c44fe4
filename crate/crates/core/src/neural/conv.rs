use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

/// 3×3 kernel bank. Weight `[ky][kx][c_in][c_out]` lives at
/// `((ky·3 + kx)·in_ch + c_in)·out_ch + c_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams {
    pub in_ch: usize,
    pub out_ch: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvParams {
    pub fn zeros(in_ch: usize, out_ch: usize) -> Self {
        Self { in_ch, out_ch, weights: vec![0.0; 9 * in_ch * out_ch], bias: vec![0.0; out_ch] }
    }

    pub fn init<R: Rng + ?Sized>(in_ch: usize, out_ch: usize, rng: &mut R) -> Self {
        Self {
            in_ch,
            out_ch,
            weights: super::he_normal(9 * in_ch * out_ch, 9 * in_ch, rng),
            bias: vec![0.0; out_ch],
        }
    }

    #[inline]
    pub fn w_index(&self, ky: usize, kx: usize, c_in: usize, c_out: usize) -> usize {
        ((ky * 3 + kx) * self.in_ch + c_in) * self.out_ch + c_out
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.weights.len() != 9 * self.in_ch * self.out_ch || self.bias.len() != self.out_ch {
            return Err(Error::Shape("conv parameter arrays do not match declared depths".into()));
        }
        Ok(())
    }
}

/// Rows `ky` whose source row `row + ky - 1` is inside `0..len`.
#[inline]
fn taps(pos: usize, len: usize) -> core::ops::Range<usize> {
    let lo = if pos == 0 { 1 } else { 0 };
    let hi = if pos + 1 >= len { 2 } else { 3 };
    lo..hi
}

/// Stride-1, zero-padded 3×3 convolution; output has the input's spatial size.
pub fn conv3x3_forward(x: &Tensor, p: &ConvParams) -> Result<Tensor> {
    p.check()?;
    if x.channels != p.in_ch {
        return Err(Error::Shape(alloc::format!("conv expects {} channels, got {}", p.in_ch, x.channels)));
    }
    let (h, w) = (x.height, x.width);
    let mut y = Tensor::zeros(h, w, p.out_ch);
    for m in 0..h {
        for n in 0..w {
            let out = y.index(m, n, 0);
            let acc = &mut y.data[out..out + p.out_ch];
            acc.copy_from_slice(&p.bias);
            for ky in taps(m, h) {
                for kx in taps(n, w) {
                    let src = x.index(m + ky - 1, n + kx - 1, 0);
                    for ci in 0..p.in_ch {
                        let xv = x.data[src + ci];
                        let wi = p.w_index(ky, kx, ci, 0);
                        for (a, wv) in acc.iter_mut().zip(&p.weights[wi..wi + p.out_ch]) {
                            *a += xv * wv;
                        }
                    }
                }
            }
        }
    }
    Ok(y)
}

/// Gradients of a scalar loss with respect to the conv input and parameters.
pub fn conv3x3_backward(x: &Tensor, p: &ConvParams, grad_out: &Tensor) -> Result<(Tensor, ConvParams)> {
    p.check()?;
    if x.channels != p.in_ch || grad_out.shape() != (x.height, x.width, p.out_ch) {
        return Err(Error::Shape("conv backward shapes are inconsistent".into()));
    }
    let (h, w) = (x.height, x.width);
    let mut gx = Tensor::zeros(h, w, p.in_ch);
    let mut gp = ConvParams::zeros(p.in_ch, p.out_ch);
    for m in 0..h {
        for n in 0..w {
            let go = grad_out.index(m, n, 0);
            let g = &grad_out.data[go..go + p.out_ch];
            for (b, gv) in gp.bias.iter_mut().zip(g) {
                *b += gv;
            }
            for ky in taps(m, h) {
                for kx in taps(n, w) {
                    let src = x.index(m + ky - 1, n + kx - 1, 0);
                    for ci in 0..p.in_ch {
                        let xv = x.data[src + ci];
                        let wi = p.w_index(ky, kx, ci, 0);
                        let wrow = &p.weights[wi..wi + p.out_ch];
                        let mut acc = 0.0;
                        for ((gw, wv), gv) in gp.weights[wi..wi + p.out_ch].iter_mut().zip(wrow).zip(g) {
                            *gw += xv * gv;
                            acc += wv * gv;
                        }
                        gx.data[src + ci] += acc;
                    }
                }
            }
        }
    }
    Ok((gx, gp))
}
