//! Seeded real-noise realizations `t -> xi(theta_t omega)`.
//!
//! A realization is an exact-step Ornstein-Uhlenbeck path `X` started from
//! its stationary law and squashed through `xi = xi_max * tanh(X)`. The
//! squash is odd, so the stationary mean of `xi` stays zero, and
//! `|xi| <= xi_max < 1` keeps `1 + xi` bounded away from zero.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linear::PiecewiseLinear;
use crate::{Error, Result};

/// Generator parameters of a squashed OU realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub seed: u64,
    /// Mean-reversion rate (1/time).
    pub kappa: f64,
    /// Volatility of the underlying OU process.
    pub sigma: f64,
    /// Squash ceiling, in (0, 1).
    pub xi_max: f64,
    /// Sample step.
    pub dt: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            seed: 0,
            kappa: 1.0,
            sigma: 0.5,
            xi_max: 0.75,
            dt: 1e-2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoisePath {
    params: Option<NoiseParams>,
    samples: Arc<PiecewiseLinear>,
    offset: f64,
}

impl NoisePath {
    /// Squashed OU realization sampled on `[t_lo, t_hi]` with step `params.dt`.
    pub fn ou(params: NoiseParams, t_lo: f64, t_hi: f64) -> Result<Self> {
        let NoiseParams {
            seed,
            kappa,
            sigma,
            xi_max,
            dt,
        } = params;
        if !(kappa > 0.0) {
            return Err(Error::param("noise mean-reversion rate must be positive"));
        }
        if !(sigma >= 0.0) {
            return Err(Error::param("noise volatility must be nonnegative"));
        }
        if !(xi_max > 0.0 && xi_max < 1.0) {
            return Err(Error::param("noise ceiling must lie in (0, 1)"));
        }
        if !(dt > 0.0) || !(t_hi > t_lo) {
            return Err(Error::param("noise needs dt > 0 and a nonempty range"));
        }
        let n = ((t_hi - t_lo) / dt).ceil() as usize + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let decay = (-kappa * dt).exp();
        let step_sd = sigma * ((1.0 - decay * decay) / (2.0 * kappa)).sqrt();
        let stationary_sd = sigma / (2.0 * kappa).sqrt();

        let z0: f64 = StandardNormal.sample(&mut rng);
        let mut x = stationary_sd * z0;
        let mut samples = Vec::with_capacity(n);
        samples.push(xi_max * x.tanh());
        for _ in 1..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            x = decay * x + step_sd * z;
            samples.push(xi_max * x.tanh());
        }
        Ok(Self {
            params: Some(params),
            samples: Arc::new(PiecewiseLinear::uniform(t_lo, dt, samples)?),
            offset: 0.0,
        })
    }

    /// Noise given by explicit samples on a uniform grid.
    pub fn from_samples(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|v| !(v.abs() < 1.0)) {
            return Err(Error::param("noise samples must satisfy |xi| < 1"));
        }
        Ok(Self {
            params: None,
            samples: Arc::new(PiecewiseLinear::uniform(t0, dt, samples)?),
            offset: 0.0,
        })
    }

    /// `xi` identically equal to `c` on `[t_lo, t_hi]`.
    pub fn constant(c: f64, t_lo: f64, t_hi: f64, dt: f64) -> Result<Self> {
        if !(t_hi > t_lo) || !(dt > 0.0) {
            return Err(Error::param("constant noise needs dt > 0 and a nonempty range"));
        }
        let n = ((t_hi - t_lo) / dt).ceil() as usize + 1;
        Self::from_samples(t_lo, dt, vec![c; n])
    }

    pub fn params(&self) -> Option<&NoiseParams> {
        self.params.as_ref()
    }

    pub fn dt(&self) -> f64 {
        let k = self.samples.knots();
        k[1] - k[0]
    }

    /// Range `[t_lo, t_hi]` in this path's (shifted) time.
    pub fn range(&self) -> (f64, f64) {
        (self.samples.start() - self.offset, self.samples.end() - self.offset)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Time translation: `shift(p, s).eval(t) == p.eval(t + s)`.
    pub fn shift(&self, s: f64) -> Self {
        Self {
            offset: self.offset + s,
            ..self.clone()
        }
    }

    fn check(&self, t: f64) -> Result<f64> {
        let tb = t + self.offset;
        let (lo, hi) = (self.samples.start(), self.samples.end());
        if !(tb >= lo && tb <= hi) {
            let (l, h) = self.range();
            return Err(Error::OutOfRange { t, lo: l, hi: h });
        }
        Ok(tb)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.samples.eval(self.check(t)?))
    }

    /// `int_s^t xi`.
    pub fn integral(&self, s: f64, t: f64) -> Result<f64> {
        let (a, b) = (self.check(s)?, self.check(t)?);
        Ok(self.samples.primitive(b) - self.samples.primitive(a))
    }

    /// Primitive measured from the first sample, in base coordinates.
    pub(crate) fn base_primitive(&self, tb: f64) -> f64 {
        self.samples.primitive(tb)
    }

    /// Sample nodes in base coordinates.
    pub(crate) fn base_knots(&self) -> &[f64] {
        self.samples.knots()
    }

    pub fn samples(&self) -> &[f64] {
        self.samples.values()
    }

    /// Realized `(min xi, max xi)` over the sampled range.
    pub fn realized_bounds(&self) -> (f64, f64) {
        let v = self.samples.values();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Guaranteed lower bound on `xi` beyond the sampled range as well.
    pub fn floor(&self) -> f64 {
        match &self.params {
            Some(p) => -p.xi_max,
            None => self.realized_bounds().0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64) -> NoiseParams {
        NoiseParams {
            seed,
            kappa: 1.0,
            sigma: 0.5,
            xi_max: 0.5,
            dt: 1e-2,
        }
    }

    #[test]
    fn zero_volatility_is_zero_noise() {
        let p = NoisePath::ou(NoiseParams { sigma: 0.0, ..params(3) }, 0.0, 10.0).unwrap();
        assert!(p.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn same_seed_same_samples() {
        let a = NoisePath::ou(params(42), 0.0, 50.0).unwrap();
        let b = NoisePath::ou(params(42), 0.0, 50.0).unwrap();
        let c = NoisePath::ou(params(43), 0.0, 50.0).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn samples_respect_ceiling() {
        let p = NoisePath::ou(NoiseParams { sigma: 5.0, ..params(1) }, 0.0, 100.0).unwrap();
        let (lo, hi) = p.realized_bounds();
        assert!(lo >= -0.5 && hi <= 0.5);
    }

    #[test]
    fn long_run_mean_is_zero_within_monte_carlo_error() {
        // N_eff = horizon * kappa / 2 independent draws
        let kappa = 1.0;
        let horizon = 1e4 / kappa;
        let p = NoisePath::ou(params(7), 0.0, horizon).unwrap();
        let xs = p.samples();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let n_eff = horizon * kappa / 2.0;
        assert!(mean.abs() < 3.0 * var.sqrt() / n_eff.sqrt(), "mean {mean}");
    }

    #[test]
    fn shift_translates_time() {
        let p = NoisePath::ou(params(9), -20.0, 20.0).unwrap();
        let q = p.shift(3.5);
        for k in 0..100 {
            let t = -20.0 + k as f64 * 0.3;
            assert_eq!(q.eval(t).unwrap(), p.eval(t + 3.5).unwrap());
        }
        assert!(q.eval(17.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NoisePath::ou(NoiseParams { kappa: 0.0, ..params(0) }, 0.0, 1.0).is_err());
        assert!(NoisePath::ou(NoiseParams { xi_max: 1.0, ..params(0) }, 0.0, 1.0).is_err());
        assert!(NoisePath::from_samples(0.0, 0.1, vec![0.0, -1.0]).is_err());
    }
}
