//! Dense-tensor layers with hand-written backward passes: 3×3 convolution,
//! ReLU, 2×2 max-pooling, fully connected, bias-free two-class softmax and
//! cross-entropy, plus the Adam optimizer.

mod adam;
mod conv;
mod dense;
mod loss;
mod pool;
mod relu;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use conv::{conv3x3_backward, conv3x3_forward, ConvParams};
pub use dense::{fc_backward, fc_forward, softmax2, softmax_backward, softmax_logits, FcParams, SoftmaxParams};
pub use loss::{cross_entropy, softmax_from_logits, PROB_FLOOR};
pub use pool::{maxpool2x2_backward, maxpool2x2_forward, PoolIndex};
pub use relu::{relu_backward, relu_forward};
pub use tensor::Tensor;

use rand::Rng;
use rand_distr::StandardNormal;

/// Fan-in scaled Gaussian, `std = sqrt(2 / fan_in)`.
pub(crate) fn he_normal<R: Rng + ?Sized>(n: usize, fan_in: usize, rng: &mut R) -> alloc::vec::Vec<f64> {
    let std = crate::math::sqrt(2.0 / fan_in as f64);
    (0..n).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
}
