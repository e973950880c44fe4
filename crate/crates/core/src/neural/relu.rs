use super::Tensor;
use crate::error::Result;

pub fn relu_forward(x: &Tensor) -> Tensor {
    let data = x.data.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
    Tensor { data, ..*x }
}

/// Passes the gradient where the input was strictly positive; the
/// subgradient at exactly zero is taken as 0.
pub fn relu_backward(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    x.same_shape(grad_out, "relu backward")?;
    let data = x.data.iter().zip(&grad_out.data).map(|(&v, &g)| if v > 0.0 { g } else { 0.0 }).collect();
    Ok(Tensor { data, ..*x })
}
