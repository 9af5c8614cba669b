use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structure class: minimum stack length `r` and minimum arc length `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub r: usize,
    pub lambda: usize,
}

impl Params {
    pub fn new(r: usize, lambda: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParams(
                "minimum stack length r must be >= 1".into(),
            ));
        }
        if lambda == 0 {
            return Err(Error::InvalidParams(
                "minimum arc length lambda must be >= 1".into(),
            ));
        }
        Ok(Params { r, lambda })
    }

    /// Shortest sequence that can carry an arc: `r` nested pairs around an
    /// inner segment of `lambda - 1` vertices.
    pub fn min_paired_length(&self) -> usize {
        2 * self.r + self.lambda - 1
    }

    pub fn validate(&self) -> Result<()> {
        Params::new(self.r, self.lambda).map(|_| ())
    }
}

impl std::fmt::Display for Params {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "r={}, lambda={}", self.r, self.lambda)
    }
}
