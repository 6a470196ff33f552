use serde::{Deserialize, Serialize};

use super::CoefficientPath;
use crate::{Error, Result};

/// Finite-horizon estimate of the least, average and greatest means.
///
/// `a_low` / `a_high` are the extreme averages over all windows `[s, t]`
/// with endpoints on the stride grid of the horizon and `t - s >= r_min`;
/// `a_mean` is the average over the whole horizon (itself one of those
/// windows, so `a_low <= a_mean <= a_high` always holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub r_min: f64,
    pub horizon: (f64, f64),
    pub stride: f64,
    pub a_low: f64,
    pub a_mean: f64,
    pub a_high: f64,
    /// Window attaining `a_low`.
    pub low_window: (f64, f64),
    /// Window attaining `a_high`.
    pub high_window: (f64, f64),
}

/// Average of `a` over `[s, t]`.
pub fn windowed_mean(path: &CoefficientPath, s: f64, t: f64) -> Result<f64> {
    if !(t > s) {
        return Err(Error::param(format!("window bounds reversed or empty: [{s}, {t}]")));
    }
    Ok(path.integral(s, t)? / (t - s))
}

pub fn estimate_means(
    path: &CoefficientPath,
    r_min: f64,
    stride: f64,
    horizon: (f64, f64),
) -> Result<MeanEstimate> {
    let (s0, s1) = horizon;
    if !(r_min > 0.0) || !(stride > 0.0) {
        return Err(Error::param("window length and stride must be positive"));
    }
    if !(s1 - s0 >= 2.0 * r_min) {
        return Err(Error::HorizonTooShort(format!(
            "horizon [{s0}, {s1}] shorter than twice the window {r_min}"
        )));
    }
    if stride > r_min {
        return Err(Error::param("stride must not exceed the window length"));
    }
    let mut grid: Vec<f64> = Vec::new();
    let mut k = 0usize;
    loop {
        let g = s0 + k as f64 * stride;
        if g > s1 - 1e-9 * stride {
            break;
        }
        grid.push(g);
        k += 1;
    }
    grid.push(s1);
    let prim: Vec<f64> = grid
        .iter()
        .map(|&g| path.integral(s0, g))
        .collect::<Result<_>>()?;

    let tol = 1e-9 * r_min;
    let n = grid.len();
    let mut low = (f64::INFINITY, 0, 0);
    let mut high = (f64::NEG_INFINITY, 0, 0);
    for i in 0..n {
        let first = grid.partition_point(|&g| g - grid[i] < r_min - tol);
        for j in first..n {
            let m = (prim[j] - prim[i]) / (grid[j] - grid[i]);
            if m < low.0 {
                low = (m, i, j);
            }
            if m > high.0 {
                high = (m, i, j);
            }
        }
    }
    let a_mean = prim[n - 1] / (s1 - s0);
    Ok(MeanEstimate {
        r_min,
        horizon,
        stride,
        a_low: low.0.min(a_mean),
        a_mean,
        a_high: high.0.max(a_mean),
        low_window: (grid[low.1], grid[low.2]),
        high_window: (grid[high.1], grid[high.2]),
    })
}

/// [`estimate_means`] at `r_min, 2 r_min, 4 r_min, ...` while the horizon
/// holds two windows; shows the trend of the estimates toward the limit.
pub fn mean_ladder(
    path: &CoefficientPath,
    r_min: f64,
    stride: f64,
    horizon: (f64, f64),
) -> Result<Vec<MeanEstimate>> {
    let mut out = Vec::new();
    let mut r = r_min;
    while 2.0 * r <= horizon.1 - horizon.0 {
        out.push(estimate_means(path, r, stride, horizon)?);
        r *= 2.0;
    }
    if out.is_empty() {
        return Err(Error::HorizonTooShort(format!(
            "horizon {horizon:?} holds no window of length {r_min}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{make_constant, make_periodic, make_switching, make_tabulated};
    use std::f64::consts::PI;

    #[test]
    fn windowed_mean_examples() {
        let c = make_constant(1.0, 0.0, 10.0).unwrap();
        assert_eq!(windowed_mean(&c, 0.0, 10.0).unwrap(), 1.0);
        let p = make_periodic(1.0, 0.5, 2.0 * PI, 0.0, 10.0).unwrap();
        assert!((windowed_mean(&p, 0.0, 2.0 * PI).unwrap() - 1.0).abs() < 1e-15);
        let s5 = make_switching(0.0, 10.0).unwrap();
        assert_eq!(windowed_mean(&s5, 0.25, 1.25).unwrap(), 1.0);
        assert!(windowed_mean(&c, 3.0, 1.0).is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_piecewise_linear() {
        // 1 + t on [0, 2] sampled at 0, 1, 2: mean over [0, 2] is 2
        let p = make_tabulated(0.0, 1.0, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(windowed_mean(&p, 0.0, 2.0).unwrap(), 2.0);
        // mean over [0.5, 1.5] is 2 as well
        assert!((windowed_mean(&p, 0.5, 1.5).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_means() {
        let c = make_constant(1.0, 0.0, 100.0).unwrap();
        let m = estimate_means(&c, 5.0, 0.5, (0.0, 100.0)).unwrap();
        assert_eq!((m.a_low, m.a_mean, m.a_high), (1.0, 1.0, 1.0));
    }

    #[test]
    fn periodic_means_over_whole_periods() {
        // windows are at least ten periods long; any window average differs
        // from 1 by at most amplitude * period / (pi * r) = 1/(10 pi) * ...
        // with stride = period every window is a whole number of periods.
        let period = 2.0 * PI;
        let p = make_periodic(1.0, 0.5, period, 0.0, 40.0 * period).unwrap();
        let m = estimate_means(&p, 10.0 * period, period, (0.0, 40.0 * period)).unwrap();
        assert!((m.a_low - 1.0).abs() < 1e-8);
        assert!((m.a_high - 1.0).abs() < 1e-8);
        assert!((m.a_mean - 1.0).abs() < 1e-8);
    }

    #[test]
    fn switching_least_and_greatest_means() {
        let p = make_switching(0.0, 300.0).unwrap();
        let m = estimate_means(&p, 5.0, 0.05, (0.0, 300.0)).unwrap();
        assert!((0.95..=1.05).contains(&m.a_low), "{m:?}");
        assert!((1.9..=2.05).contains(&m.a_high), "{m:?}");
    }

    #[test]
    fn rejects_short_horizon() {
        let c = make_constant(1.0, 0.0, 100.0).unwrap();
        assert!(matches!(
            estimate_means(&c, 30.0, 1.0, (0.0, 50.0)),
            Err(Error::HorizonTooShort(_))
        ));
    }

    #[test]
    fn ladder_narrows() {
        let p = make_switching(0.0, 200.0).unwrap();
        let ladder = mean_ladder(&p, 5.0, 0.25, (0.0, 200.0)).unwrap();
        assert!(ladder.len() >= 4);
        for w in ladder.windows(2) {
            assert!(w[1].a_low >= w[0].a_low - 1e-12);
            assert!(w[1].a_high <= w[0].a_high + 1e-12);
        }
    }
}
