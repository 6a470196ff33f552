//! Bounded-primitive decomposition of a growth rate.
//!
//! For a rate `b` whose long-window averages of `scale * b` exceed `gamma`,
//! pick a block length `T` such that every block mean
//! `eps_k = (1/T) int_{kT}^{(k+1)T} scale * b` is at least `gamma`, and set
//! `B(t) = int_{kT}^t (scale * b - eps_k)` on block `k`. Then `B` is
//! continuous, vanishes at every breakpoint, is bounded, and
//! `scale * b - B' = eps_k >= gamma` inside every block.

use serde::Serialize;

use super::{estimate_means, CoefficientPath};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PiecewiseB {
    path: CoefficientPath,
    scale: f64,
    gamma: f64,
    block_len: f64,
    first_block: i64,
    block_means: Vec<f64>,
    sup_norm: f64,
}

/// Serializable summary of a [`PiecewiseB`].
#[derive(Debug, Clone, Serialize)]
pub struct BlockSummary {
    pub block_len: f64,
    pub scale: f64,
    pub gamma: f64,
    pub range: (f64, f64),
    pub min_block_mean: f64,
    pub sup_norm: f64,
}

/// Searches `T = r_min * 2^j`, `T <= (horizon length) / 4`, for the first
/// block length whose block means of `scale * b` all reach `gamma`.
pub fn build_b(
    path: &CoefficientPath,
    gamma: f64,
    scale: f64,
    r_min: f64,
    horizon: (f64, f64),
) -> Result<PiecewiseB> {
    let (h0, h1) = horizon;
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::param(format!("scale must lie in (0, 1], got {scale}")));
    }
    if !(r_min > 0.0) || !(h1 - h0 >= 4.0 * r_min) {
        return Err(Error::HorizonTooShort(format!(
            "horizon [{h0}, {h1}] must hold four blocks of length {r_min}"
        )));
    }
    let est = estimate_means(path, r_min, r_min / 4.0, horizon)?;
    if !(gamma < scale * est.a_low) {
        return Err(Error::param(format!(
            "gamma = {gamma} must be below scale * least mean = {}",
            scale * est.a_low
        )));
    }

    let mut block_len = r_min;
    let mut worst = None;
    while block_len <= (h1 - h0) / 4.0 {
        let first = (h0 / block_len).ceil() as i64;
        let last = (h1 / block_len).floor() as i64; // exclusive
        let mut means = Vec::with_capacity((last - first).max(0) as usize);
        let mut bad = None;
        for k in first..last {
            let (s, t) = (k as f64 * block_len, (k + 1) as f64 * block_len);
            let m = scale * path.integral(s, t)? / block_len;
            if m < gamma && bad.is_none() {
                bad = Some((s, t, m));
            }
            means.push(m);
        }
        match bad {
            None if !means.is_empty() => {
                let mut b = PiecewiseB {
                    path: path.clone(),
                    scale,
                    gamma,
                    block_len,
                    first_block: first,
                    block_means: means,
                    sup_norm: 0.0,
                };
                b.sup_norm = b.compute_sup_norm()?;
                return Ok(b);
            }
            None => {}
            Some(w) => worst = Some(w),
        }
        block_len *= 2.0;
    }
    let (start, end, mean) = worst.unwrap_or((h0, h1, f64::NAN));
    Err(Error::NoAdmissibleBlock {
        max_block: block_len / 2.0,
        start,
        end,
        mean,
        gamma,
    })
}

impl PiecewiseB {
    pub fn block_len(&self) -> f64 {
        self.block_len
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn block_means(&self) -> &[f64] {
        &self.block_means
    }

    /// Breakpoints `t_k = kT` covered, including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.block_means.len())
            .map(|i| (self.first_block + i as i64) as f64 * self.block_len)
            .collect()
    }

    pub fn range(&self) -> (f64, f64) {
        let lo = self.first_block as f64 * self.block_len;
        (lo, lo + self.block_means.len() as f64 * self.block_len)
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn min_block_mean(&self) -> f64 {
        self.block_means.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> BlockSummary {
        BlockSummary {
            block_len: self.block_len,
            scale: self.scale,
            gamma: self.gamma,
            range: self.range(),
            min_block_mean: self.min_block_mean(),
            sup_norm: self.sup_norm,
        }
    }

    fn block_of(&self, t: f64) -> Result<(usize, f64)> {
        let (lo, hi) = self.range();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let k = (((t - lo) / self.block_len).floor() as usize).min(self.block_means.len() - 1);
        Ok((k, lo + k as f64 * self.block_len))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let (k, start) = self.block_of(t)?;
        Ok(self.scale * self.path.integral(start, t)? - self.block_means[k] * (t - start))
    }

    /// `B'(t) = scale * b(t) - eps_k`; one-sided at breakpoints.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        let (k, _) = self.block_of(t)?;
        Ok(self.scale * self.path.eval(t)? - self.block_means[k])
    }

    fn compute_sup_norm(&self) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for (k, &eps) in self.block_means.iter().enumerate() {
            let s = (self.first_block + k as i64) as f64 * self.block_len;
            let t = s + self.block_len;
            let mut pts: Vec<f64> = (0..=256).map(|i| s + self.block_len * i as f64 / 256.0).collect();
            pts.extend(self.path.nodes_between(s, t));
            pts.sort_by(f64::total_cmp);
            let slope = |x: f64| -> Result<f64> { Ok(self.scale * self.path.eval(x)? - eps) };
            let value = |x: f64| -> Result<f64> { Ok(self.scale * self.path.integral(s, x)? - eps * (x - s)) };
            let mut prev = (pts[0], slope(pts[0])?);
            for &x in &pts[1..] {
                let d = slope(x)?;
                sup = sup.max(value(x)?.abs());
                if prev.1 * d < 0.0 {
                    // root of the (locally linear) slope: a local extremum of B
                    let r = prev.0 + (x - prev.0) * prev.1 / (prev.1 - d);
                    sup = sup.max(value(r)?.abs());
                }
                prev = (x, d);
            }
        }
        Ok(sup)
    }
}
