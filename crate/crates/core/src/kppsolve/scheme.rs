//! One time step of the monotone splitting scheme.
//!
//! 1. explicit reaction `u <- u + dt * abar * u (1 - u)`, where `abar` is the
//!    exact average of `a` over the step;
//! 2. implicit diffusion (and, in a moving frame, advection) with zero-flux
//!    ends: `(I - dt (D2 + c D1)) u_new = u`.
//!
//! The reaction map is nondecreasing on `[0, max u]` when
//! `dt * abar * max(1, 2 max u - 1) <= 1/2`. The implicit matrix is an
//! M-matrix with unit row sums: `D1` is central when the cell Peclet number
//! `|c| dx / 2` is at most 1 and upwind otherwise. The Thomas recurrences
//! below only add nonnegative multiples, so monotonicity also holds in
//! floating point.

use super::Grid1D;
use crate::coeff::CoefficientPath;
use crate::{Error, Result};

/// Factored tridiagonal matrix with nonpositive off-diagonals, stored as
/// magnitudes.
#[derive(Debug, Clone)]
pub(crate) struct Tridiag {
    /// `|sub-diagonal|` of row `i`.
    lower: Vec<f64>,
    /// `|super-diagonal| / pivot` of row `i`.
    ratio: Vec<f64>,
    pivot: Vec<f64>,
}

impl Tridiag {
    pub fn factor(lower: Vec<f64>, diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut ratio = vec![0.0; n];
        let mut pivot = vec![0.0; n];
        pivot[0] = diag[0];
        ratio[0] = upper[0] / pivot[0];
        for i in 1..n {
            pivot[i] = diag[i] - lower[i] * ratio[i - 1];
            ratio[i] = upper[i] / pivot[i];
        }
        Self { lower, ratio, pivot }
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] /= self.pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] + self.lower[i] * rhs[i - 1]) / self.pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] += self.ratio[i] * rhs[i + 1];
        }
    }
}

/// Builds the implicit operator `I - dt (D2 + c D1)` with zero-flux ends.
pub(crate) fn implicit_operator(grid: &Grid1D, dt: f64, c: f64) -> Tridiag {
    let n = grid.len();
    let dx = grid.dx();
    let r = dt / (dx * dx);
    let (lo_off, hi_off, diag_extra) = if c.abs() * dx <= 2.0 {
        let beta = c * dt / (2.0 * dx);
        (r - beta, r + beta, 0.0)
    } else if c > 0.0 {
        let k = c * dt / dx;
        (r, r + k, k)
    } else {
        let k = -c * dt / dx;
        (r + k, r, k)
    };
    let mut lower = vec![lo_off; n];
    let mut upper = vec![hi_off; n];
    let mut diag = vec![1.0 + 2.0 * r + diag_extra; n];
    // mirrored ghost nodes; advection vanishes with the gradient
    lower[0] = 0.0;
    upper[0] = 2.0 * r;
    diag[0] = 1.0 + 2.0 * r;
    lower[n - 1] = 2.0 * r;
    upper[n - 1] = 0.0;
    diag[n - 1] = 1.0 + 2.0 * r;
    Tridiag::factor(lower, &diag, &upper)
}

/// Explicit reaction sub-step; returns the step-averaged rate used.
pub(crate) fn react(u: &mut [f64], path: &CoefficientPath, t: f64, t_next: f64) -> Result<f64> {
    let dt = t_next - t;
    let rate = path.integral(t, t_next)? / dt;
    let u_max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let value = dt * rate * (2.0 * u_max - 1.0).max(1.0);
    if value > 0.5 {
        return Err(Error::Monotonicity {
            t,
            dt,
            rate,
            u_max,
            value,
        });
    }
    let k = dt * rate;
    for v in u.iter_mut() {
        *v += k * (*v * (1.0 - *v));
    }
    Ok(rate)
}

/// Fixed-step integrator; `frame_mu` selects the moving frame with speed
/// `(mu^2 + a)/mu`.
pub(crate) struct Stepper {
    grid: Grid1D,
    dt: f64,
    frame_mu: Option<f64>,
    cached: Option<(f64, Tridiag)>,
}

impl Stepper {
    pub fn new(grid: Grid1D, dt: f64, frame_mu: Option<f64>) -> Self {
        Self {
            grid,
            dt,
            frame_mu,
            cached: None,
        }
    }

    /// Advances `u` in place over `[t, t + dt]`; returns the frame displacement.
    pub fn advance(&mut self, u: &mut [f64], path: &CoefficientPath, t: f64) -> Result<f64> {
        self.advance_to(u, path, t, t + self.dt)
    }

    /// Same as `advance` with the step end given explicitly, so the final
    /// step of a run lands on its end time without rounding past it.
    pub fn advance_to(&mut self, u: &mut [f64], path: &CoefficientPath, t: f64, t_next: f64) -> Result<f64> {
        let rate = react(u, path, t, t_next)?;
        let c = match self.frame_mu {
            Some(mu) => mu + rate / mu,
            None => 0.0,
        };
        let stale = !matches!(&self.cached, Some((cc, _)) if *cc == c);
        if stale {
            self.cached = Some((c, implicit_operator(&self.grid, self.dt, c)));
        }
        self.cached.as_ref().unwrap().1.solve(u);
        Ok(c * self.dt)
    }
}
