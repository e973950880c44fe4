use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layer sizes of the fusion CNN.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchConfig {
    pub n_conv_blocks: usize,
    /// Output depth of each conv block.
    pub conv_depths: Vec<usize>,
    /// Widths of the two fully connected layers.
    pub fc_widths: (usize, usize),
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self { n_conv_blocks: 3, conv_depths: vec![8, 8, 8], fc_widths: (8, 8) }
    }
}

impl ArchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_conv_blocks == 0 {
            return Err(Error::InvalidArgument("at least one conv block is required".into()));
        }
        if self.conv_depths.len() != self.n_conv_blocks {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} conv depths for {} blocks",
                self.conv_depths.len(),
                self.n_conv_blocks
            )));
        }
        if self.conv_depths.contains(&0) || self.fc_widths.0 == 0 || self.fc_widths.1 == 0 {
            return Err(Error::InvalidArgument("layer depths and widths must be positive".into()));
        }
        Ok(())
    }

    /// Spatial size at the input and after every conv block.
    pub fn spatial_chain(&self, input: (usize, usize)) -> Result<Vec<(usize, usize)>> {
        if input.0 < 2 || input.1 < 2 {
            return Err(Error::Shape(alloc::format!("input {}×{} is smaller than 2×2", input.0, input.1)));
        }
        let mut chain = vec![input];
        let (mut h, mut w) = input;
        for _ in 0..self.n_conv_blocks {
            h = h.div_ceil(2);
            w = w.div_ceil(2);
            if h == 0 || w == 0 {
                return Err(Error::Shape("spatial size collapsed to zero".into()));
            }
            chain.push((h, w));
        }
        Ok(chain)
    }

    /// Length of the flattened conv output.
    pub fn flat_len(&self, input: (usize, usize)) -> Result<usize> {
        let (h, w) = *self.spatial_chain(input)?.last().expect("chain is nonempty");
        Ok(h * w * self.conv_depths[self.n_conv_blocks - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_chain() {
        let a = ArchConfig::default();
        assert_eq!(a.spatial_chain((32, 16)).unwrap(), vec![(32, 16), (16, 8), (8, 4), (4, 2)]);
        assert_eq!(a.flat_len((32, 16)).unwrap(), 64);
    }

    #[test]
    fn rejects_tiny_inputs_and_bad_configs() {
        let a = ArchConfig::default();
        assert!(a.spatial_chain((1, 16)).is_err());
        assert!(ArchConfig { n_conv_blocks: 0, conv_depths: vec![], ..Default::default() }.validate().is_err());
        assert!(ArchConfig { conv_depths: vec![8, 8], ..Default::default() }.validate().is_err());
        assert!(ArchConfig { fc_widths: (0, 8), ..Default::default() }.validate().is_err());
    }
}
