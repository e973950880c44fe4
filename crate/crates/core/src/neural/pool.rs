use alloc::vec::Vec;

use super::Tensor;
use crate::error::{Error, Result};

/// Routing table from a max-pool forward pass: for each output element the
/// flat input index that won its window, or `None` when the zero padding won.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolIndex {
    pub input_shape: (usize, usize, usize),
    pub argmax: Vec<Option<usize>>,
}

/// 2×2 max-pooling with stride 2, per channel. Odd spatial sizes are
/// zero-padded on the high side. Ties go to the first element in window
/// scan order (top-left, top-right, bottom-left, bottom-right).
pub fn maxpool2x2_forward(x: &Tensor) -> (Tensor, PoolIndex) {
    let oh = x.height.div_ceil(2);
    let ow = x.width.div_ceil(2);
    let c = x.channels;
    let mut y = Tensor::zeros(oh, ow, c);
    let mut argmax = Vec::with_capacity(oh * ow * c);
    for i in 0..oh {
        for j in 0..ow {
            for ch in 0..c {
                let mut best = f64::NEG_INFINITY;
                let mut arg = None;
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let (r, col) = (2 * i + dy, 2 * j + dx);
                    let (v, idx) = if r < x.height && col < x.width {
                        let k = x.index(r, col, ch);
                        (x.data[k], Some(k))
                    } else {
                        (0.0, None)
                    };
                    if v > best {
                        best = v;
                        arg = idx;
                    }
                }
                let o = y.index(i, j, ch);
                y.data[o] = best;
                argmax.push(arg);
            }
        }
    }
    (y, PoolIndex { input_shape: x.shape(), argmax })
}

pub fn maxpool2x2_backward(index: &PoolIndex, grad_out: &Tensor) -> Result<Tensor> {
    if grad_out.data.len() != index.argmax.len() {
        return Err(Error::Shape("pool gradient does not match its routing table".into()));
    }
    let (h, w, c) = index.input_shape;
    let mut gx = Tensor::zeros(h, w, c);
    for (g, arg) in grad_out.data.iter().zip(&index.argmax) {
        if let Some(k) = arg {
            gx.data[*k] += g;
        }
    }
    Ok(gx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn window_max() {
        let x = Tensor::from_vec(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (y, idx) = maxpool2x2_forward(&x);
        assert_eq!(y.data, vec![4.0]);
        assert_eq!(idx.argmax, vec![Some(3)]);
    }

    #[test]
    fn ties_route_to_first_element() {
        let x = Tensor::from_vec(4, 4, 1, vec![2.5; 16]).unwrap();
        let (y, idx) = maxpool2x2_forward(&x);
        assert!(y.data.iter().all(|&v| v == 2.5));
        let g = Tensor::from_vec(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let gx = maxpool2x2_backward(&idx, &g).unwrap();
        let mut expected = vec![0.0; 16];
        expected[0] = 1.0;
        expected[2] = 2.0;
        expected[8] = 3.0;
        expected[10] = 4.0;
        assert_eq!(gx.data, expected);
    }

    #[test]
    fn reference_input_shrinks_to_half() {
        let (y, _) = maxpool2x2_forward(&Tensor::zeros(32, 16, 8));
        assert_eq!(y.shape(), (16, 8, 8));
    }

    #[test]
    fn odd_sizes_pad_high_side() {
        let x = Tensor::from_vec(3, 1, 1, vec![-1.0, -2.0, -3.0]).unwrap();
        let (y, idx) = maxpool2x2_forward(&x);
        assert_eq!(y.shape(), (2, 1, 1));
        // padding zeros win against negative entries
        assert_eq!(y.data, vec![0.0, 0.0]);
        assert_eq!(idx.argmax, vec![None, None]);
        let x = Tensor::from_vec(3, 1, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let (y, idx) = maxpool2x2_forward(&x);
        assert_eq!(y.data, vec![2.0, 3.0]);
        assert_eq!(idx.argmax, vec![Some(1), Some(2)]);
    }
}
