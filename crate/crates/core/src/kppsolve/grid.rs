use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform 1D grid with `n` nodes on `[x_lo, x_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_lo: f64,
    x_hi: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::param(format!("grid needs at least 3 nodes, got {n}")));
        }
        if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::param(format!("invalid grid interval [{x_lo}, {x_hi}]")));
        }
        Ok(Self { x_lo, x_hi, n })
    }

    /// Grid whose spacing is `dx`, up to rounding of the node count.
    pub fn with_spacing(x_lo: f64, x_hi: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::param("grid spacing must be positive"));
        }
        let n = ((x_hi - x_lo) / dx).round() as usize + 1;
        Self::new(x_lo, x_hi, n)
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            return self.x_hi;
        }
        self.x_lo + (self.x_hi - self.x_lo) * (i as f64 / (self.n - 1) as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Grid with every cell split in two.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }
}
