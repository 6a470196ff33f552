//! The explicit oscillating coefficient `a0(t)`.
//!
//! Blocks are defined by `l_0 = 0`, `L_n = l_n + 4^-(n+1)`,
//! `l_{n+1} = L_n + n + 1`. On the long plateaus `[L_n, l_{n+1}]` the
//! coefficient equals 1 (n even) or 2 (n odd); on the short spikes
//! `[l_n, L_n]` it is a piecewise-linear hat joining the neighbouring
//! plateaus through its extremum at the block midpoint: `2^(n/2)` for even
//! `n`, `2^-((n+1)/2)` for odd `n`. `a0` is even in `t`. Its least mean is 1
//! and its greatest mean is 2, while `inf a0 = 0` and `sup a0 = inf`.

use super::linear::PiecewiseLinear;
use crate::{Error, Result};

/// Largest block index we tabulate; spikes beyond this are `2^31` tall.
const MAX_BLOCK: usize = 62;

/// Block boundaries `(l_n, L_n)` for `n = 0..=n_max`.
pub fn block_bounds(n_max: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut l = 0.0_f64;
    for n in 0..=n_max {
        let big_l = l + 0.25_f64.powi(n as i32 + 1);
        out.push((l, big_l));
        l = big_l + (n + 1) as f64;
    }
    out
}

/// Plateau value on `[L_n, l_{n+1}]`.
pub fn plateau(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        2.0
    }
}

/// Extremum of the spike on `[l_n, L_n]` (maximum for even `n`, minimum for odd).
pub fn spike_extremum(n: usize) -> f64 {
    if n == 0 {
        1.0
    } else if n % 2 == 0 {
        2f64.powi((n / 2) as i32)
    } else {
        2f64.powi(-(((n + 1) / 2) as i32))
    }
}

/// Knots of `a0` on `[0, t_max]`.
fn half_line_knots(t_max: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let bounds = block_bounds(MAX_BLOCK);
    if bounds[MAX_BLOCK].0 < t_max {
        return Err(Error::param(format!(
            "oscillating coefficient tabulated only up to |t| = {}",
            bounds[MAX_BLOCK].0
        )));
    }
    let mut knots = vec![0.0];
    let mut values = vec![1.0];
    for (n, &(l, big_l)) in bounds.iter().enumerate() {
        if n > 0 {
            let mid = 0.5 * (l + big_l);
            knots.extend([l, mid, big_l]);
            values.extend([plateau(n - 1), spike_extremum(n), plateau(n)]);
        } else {
            knots.push(big_l);
            values.push(1.0);
        }
        let next_l = big_l + (n + 1) as f64;
        if next_l >= t_max {
            knots.push(next_l);
            values.push(plateau(n));
            break;
        }
    }
    Ok((knots, values))
}

/// Symmetric table of `a0` on `[-t_max, t_max]`.
pub(crate) fn table(t_max: f64) -> Result<PiecewiseLinear> {
    let (k, v) = half_line_knots(t_max)?;
    let mut knots: Vec<f64> = k.iter().rev().map(|t| -t).collect();
    let mut values: Vec<f64> = v.iter().rev().copied().collect();
    knots.extend_from_slice(&k[1..]);
    values.extend_from_slice(&v[1..]);
    PiecewiseLinear::new(knots, values)
}
