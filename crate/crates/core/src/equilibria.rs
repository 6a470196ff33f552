//! Spatially homogeneous solutions, the random equilibrium of the
//! real-noise logistic equation, and the exponential stability bound.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coeff::{CoefficientPath, NoisePath};
use crate::fmt::sig;
use crate::kppsolve::Trajectory;
use crate::{Error, Result};

/// Target for the truncated-tail bound of the equilibrium integral.
pub const TAIL_TARGET: f64 = 1e-8;

/// Solution of `u' = a(t) u (1 - u)`, `u(0) = u0`:
/// `u = u0 e^A / (1 - u0 + u0 e^A)` with `A = int_0^t a`.
pub fn logistic_solution(u0: f64, path: &CoefficientPath, t: f64) -> Result<f64> {
    if !(u0 >= 0.0) {
        return Err(Error::param(format!("initial value must be nonnegative, got {u0}")));
    }
    if u0 == 0.0 {
        return Ok(0.0);
    }
    let growth = path.integral(0.0, t)?;
    // divide through by u0 e^A to stay finite for large A
    Ok(u0 / (u0 + (1.0 - u0) * (-growth).exp()))
}

/// `int_a^b exp((s - b) + int_b^s xi) ds` by the trapezoid rule on the
/// noise grid (plus the two end points).
pub fn discounted_integral(noise: &NoisePath, a: f64, b: f64) -> Result<f64> {
    if !(b >= a) {
        return Err(Error::param("discounted integral needs a <= b"));
    }
    noise.eval(a)?;
    noise.eval(b)?;
    let off = noise.offset();
    let (ab, bb) = (a + off, b + off);
    let pb = noise.base_primitive(bb);
    let f = |sb: f64| ((sb - bb) + noise.base_primitive(sb) - pb).exp();
    let knots = noise.base_knots();
    let i0 = knots.partition_point(|&k| k <= ab);
    let i1 = knots.partition_point(|&k| k < bb);
    let mut acc = 0.0;
    let mut prev = (ab, f(ab));
    for &k in &knots[i0.min(i1)..i1] {
        let fk = f(k);
        acc += 0.5 * (k - prev.0) * (prev.1 + fk);
        prev = (k, fk);
    }
    acc += 0.5 * (bb - prev.0) * (prev.1 + 1.0);
    Ok(acc)
}

/// Solution of `u' = u (1 + xi(t) - u)`, `u(0) = u0`:
/// `u = u0 e^{t + int_0^t xi} / (1 + u0 int_0^t e^{s + int_0^s xi} ds)`.
pub fn real_noise_ode_solution(u0: f64, noise: &NoisePath, t: f64) -> Result<f64> {
    if !(u0 >= 0.0) {
        return Err(Error::param(format!("initial value must be nonnegative, got {u0}")));
    }
    if u0 == 0.0 {
        return Ok(0.0);
    }
    let growth = t + noise.integral(0.0, t)?;
    let j = discounted_integral(noise, 0.0, t)?;
    Ok(u0 / ((-growth).exp() + u0 * j))
}

/// One evaluation of the random equilibrium `Y(theta_t omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSample {
    pub t: f64,
    pub y: f64,
    pub t_trunc: f64,
    /// Bound on the omitted tail of `1/Y`.
    pub tail_bound: f64,
    /// Resulting bound on the relative error of `Y`.
    pub rel_error: f64,
}

/// Tail of `int_{-inf}^{t - T} e^{(s - t) + int_t^s xi} ds` given `xi >= floor`.
pub fn tail_bound(floor: f64, t_trunc: f64) -> f64 {
    let rate = 1.0 + floor;
    (-rate * t_trunc).exp() / rate
}

/// Smallest (rounded-up) truncation whose tail bound is below [`TAIL_TARGET`],
/// using the guaranteed floor of the noise.
pub fn default_truncation(noise: &NoisePath) -> f64 {
    let rate = 1.0 + noise.floor();
    ((1.0 / (TAIL_TARGET * rate)).ln() / rate).ceil()
}

/// `Y(theta_t omega) = 1 / int_{-inf}^0 e^{s + int_0^s xi(theta_{t+r} omega) dr} ds`,
/// with the integral truncated to `[-t_trunc, 0]`.
pub fn random_equilibrium(noise: &NoisePath, t: f64, t_trunc: f64) -> Result<EquilibriumSample> {
    if !(t_trunc > 0.0) {
        return Err(Error::param("truncation must be positive"));
    }
    let (lo, _) = noise.range();
    if t - t_trunc < lo {
        return Err(Error::InsufficientHistory {
            needed: t - t_trunc,
            available: lo,
        });
    }
    let inv = discounted_integral(noise, t - t_trunc, t)?;
    let tail = tail_bound(noise.floor(), t_trunc);
    Ok(EquilibriumSample {
        t,
        y: 1.0 / inv,
        t_trunc,
        tail_bound: tail,
        rel_error: tail / inv,
    })
}

/// Tabulates `Y(theta_t omega)` on the noise nodes covering `[t_lo, t_hi]`.
///
/// The truncated integral is carried forward node by node, so the whole
/// table costs one pass over the noise samples. Returns the time of the
/// first tabulated node and the values.
pub(crate) fn equilibrium_samples(
    noise: &NoisePath,
    t_lo: f64,
    t_hi: f64,
    t_trunc: f64,
) -> Result<(f64, Vec<f64>)> {
    let (lo, hi) = noise.range();
    if t_lo - t_trunc < lo {
        return Err(Error::InsufficientHistory {
            needed: t_lo - t_trunc,
            available: lo,
        });
    }
    if t_hi > hi {
        return Err(Error::OutOfRange { t: t_hi, lo, hi });
    }
    let off = noise.offset();
    let knots = noise.base_knots();
    let h = noise.dt();
    let j0 = ((t_lo + off - knots[0]) / h - 1e-9).floor().max(0.0) as usize;
    let j1 = (((t_hi + off - knots[0]) / h + 1e-9).ceil() as usize).min(knots.len() - 1);

    if j0 == 0 {
        return Err(Error::InsufficientHistory {
            needed: t_lo - t_trunc,
            available: lo,
        });
    }
    let mut inv = 0.0;
    let mut prev_p = noise.base_primitive(knots[0]);
    let mut out = Vec::with_capacity(j1 + 1 - j0);
    for j in 1..=j1 {
        let p = noise.base_primitive(knots[j]);
        let dt = knots[j] - knots[j - 1];
        let decay = (-dt - (p - prev_p)).exp();
        inv = decay * inv + 0.5 * dt * (decay + 1.0);
        prev_p = p;
        if j >= j0 {
            out.push(1.0 / inv);
        }
    }
    Ok((knots[j0] - off, out))
}

/// The amplitude in `||u(t) - 1|| <= M e^{-int_0^t a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityBound {
    pub m: f64,
    pub u0_inf: f64,
    pub u0_sup: f64,
}

impl StabilityBound {
    /// `M e^{-int_0^t a}`.
    pub fn at(&self, path: &CoefficientPath, t: f64) -> Result<f64> {
        Ok(self.m * (-path.integral(0.0, t)?).exp())
    }
}

/// `M = max{1, sup u0} * max{|1 - 1/min{1, inf u0}|, |1 - 1/max{1, sup u0}|}`.
pub fn stability_bound(u0_inf: f64, u0_sup: f64) -> Result<StabilityBound> {
    if !(u0_inf > 0.0) {
        return Err(Error::param(format!(
            "stability bound needs strictly positive initial data, got inf {u0_inf}"
        )));
    }
    if !(u0_sup >= u0_inf) {
        return Err(Error::param("sup of the initial data below its inf"));
    }
    let low = (1.0 - 1.0 / u0_inf.min(1.0)).abs();
    let high = (1.0 - 1.0 / u0_sup.max(1.0)).abs();
    Ok(StabilityBound {
        m: u0_sup.max(1.0) * low.max(high),
        u0_inf,
        u0_sup,
    })
}

/// Discretization allowance `c_space dx^2 + c_time dt` used when comparing
/// computed solutions with exact inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackModel {
    pub c_space: f64,
    pub c_time: f64,
}

impl SlackModel {
    /// Constants calibrated against the homogeneous closed form (time) and a
    /// smooth spatial self-convergence study (space) for `a <= 2` and data in
    /// `[0.1, 2]`; see the `slack_calibration` test. The observed ratios are
    /// about 0.64 and 6e-4.
    pub const CALIBRATED: SlackModel = SlackModel {
        c_space: 0.01,
        c_time: 1.0,
    };

    pub fn slack(&self, dx: f64, dt: f64) -> f64 {
        self.c_space * dx * dx + self.c_time * dt
    }
}

impl Default for SlackModel {
    fn default() -> Self {
        Self::CALIBRATED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub t: f64,
    pub sup_dist: f64,
    pub bound: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub bound: StabilityBound,
    pub slack: f64,
    pub rows: Vec<StabilityRow>,
    /// Largest `sup_dist - bound` over the stored frames.
    pub max_violation: f64,
    pub t_max_violation: f64,
    /// `int_0^{t_end} a`; when it stays small the distance to 1 plateaus.
    pub decay_integral: f64,
    pub passed: bool,
}

impl StabilityReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,sup_dist,bound,violation")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", sig(r.t), sig(r.sup_dist), sig(r.bound), sig(r.violation))?;
        }
        Ok(())
    }
}

/// Checks `||u(t) - 1||_inf <= M e^{-int_0^t a} + slack` on every stored frame.
pub fn verify_stability_decay(
    trajectory: &Trajectory,
    path: &CoefficientPath,
    bound: &StabilityBound,
    slack: f64,
) -> Result<StabilityReport> {
    let frames = trajectory.frames();
    let first = frames
        .first()
        .ok_or_else(|| Error::param("empty trajectory"))?;
    let u_min = first.values().iter().copied().fold(f64::INFINITY, f64::min);
    if !(u_min > 0.0) {
        return Err(Error::param(format!(
            "stability check needs strictly positive initial data, min is {u_min}"
        )));
    }
    let mut rows = Vec::with_capacity(frames.len());
    let mut worst = (f64::NEG_INFINITY, first.t());
    for f in frames {
        let sup_dist = f.values().iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
        let b = bound.at(path, f.t())?;
        let violation = sup_dist - b;
        if violation > worst.0 {
            worst = (violation, f.t());
        }
        rows.push(StabilityRow {
            t: f.t(),
            sup_dist,
            bound: b,
            violation,
        });
    }
    let t_end = frames.last().unwrap().t();
    Ok(StabilityReport {
        bound: *bound,
        slack,
        rows,
        max_violation: worst.0,
        t_max_violation: worst.1,
        decay_integral: path.integral(0.0, t_end)?,
        passed: worst.0 <= slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{make_constant, make_switching, NoiseParams};

    /// Classical RK4 with fixed step; independent oracle for the ODE.
    fn rk4(f: impl Fn(f64, f64) -> f64, u0: f64, t_end: f64, n: usize) -> f64 {
        let h = t_end / n as f64;
        let mut u = u0;
        for i in 0..n {
            let t = i as f64 * h;
            let k1 = f(t, u);
            let k2 = f(t + h / 2.0, u + h / 2.0 * k1);
            let k3 = f(t + h / 2.0, u + h / 2.0 * k2);
            let k4 = f(t + h, u + h * k3);
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        u
    }

    #[test]
    fn logistic_examples() {
        let p = make_constant(1.0, 0.0, 10.0).unwrap();
        assert_eq!(logistic_solution(1.0, &p, 4.0).unwrap(), 1.0);
        assert_eq!(logistic_solution(0.0, &p, 4.0).unwrap(), 0.0);
        let t = 3f64.ln();
        let u = logistic_solution(0.5, &p, t).unwrap();
        assert!((u - 0.75).abs() < 1e-14);
        assert!((rk4(|_, u| u * (1.0 - u), 0.5, t, 2000) - 0.75).abs() < 1e-9);
        let t = 2f64.ln();
        let u = logistic_solution(2.0, &p, t).unwrap();
        assert!((u - 4.0 / 3.0).abs() < 1e-14);
        assert!((rk4(|_, u| u * (1.0 - u), 2.0, t, 2000) - 4.0 / 3.0).abs() < 1e-9);
        assert!(logistic_solution(-0.1, &p, 1.0).is_err());
    }

    #[test]
    fn logistic_matches_rk4_on_oscillating_rate() {
        let p = make_switching(-1.0, 30.0).unwrap();
        for &u0 in &[0.1, 0.5, 2.0] {
            let exact = logistic_solution(u0, &p, 5.0).unwrap();
            let ode = rk4(|t, u| p.eval(t).unwrap() * u * (1.0 - u), u0, 5.0, 200_000);
            assert!((exact - ode).abs() < 1e-6, "u0={u0}: {exact} vs {ode}");
        }
    }

    #[test]
    fn logistic_monotone() {
        let p = make_constant(1.3, 0.0, 10.0).unwrap();
        let mut prev = 0.0;
        for i in 1..100 {
            let u = logistic_solution(i as f64 / 100.0, &p, 2.0).unwrap();
            assert!(u > prev);
            prev = u;
        }
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let u = logistic_solution(3.0, &p, i as f64 * 0.2).unwrap();
            assert!(u < prev && u > 1.0);
            prev = u;
        }
    }

    #[test]
    fn stability_bound_examples() {
        assert_eq!(stability_bound(1.0, 1.0).unwrap().m, 0.0);
        assert_eq!(stability_bound(2.0, 2.0).unwrap().m, 1.0);
        assert_eq!(stability_bound(0.5, 2.0).unwrap().m, 2.0);
        assert!(stability_bound(0.0, 1.0).is_err());
        assert!(stability_bound(2.0, 1.0).is_err());
    }

    #[test]
    fn conserved_quantity_is_exact() {
        // (1/u - 1) e^{int a} is constant along the logistic flow
        let p = make_switching(-1.0, 30.0).unwrap();
        for &u0 in &[0.3, 2.0] {
            let c0 = 1.0 / u0 - 1.0;
            // keep e^{int a} moderate so 1/u - 1 is not swamped by rounding
            for i in 0..20 {
                let t = 0.4 * i as f64;
                let u = logistic_solution(u0, &p, t).unwrap();
                let c = (1.0 / u - 1.0) * p.integral(0.0, t).unwrap().exp();
                assert!((c - c0).abs() < 1e-10 * c0.abs().max(1.0));
                // the bound holds, with equality at t = 0 when u0 >= 1
                let b = stability_bound(u0, u0).unwrap();
                let lhs = (u - 1.0).abs();
                assert!(lhs <= b.at(&p, t).unwrap() * (1.0 + 1e-12));
                if i == 0 && u0 >= 1.0 {
                    assert!((lhs - b.m).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn equilibrium_of_constant_noise() {
        let zero = NoisePath::constant(0.0, -100.0, 10.0, 1e-3).unwrap();
        let s = random_equilibrium(&zero, 0.0, 40.0).unwrap();
        assert!((s.y - 1.0).abs() < 1e-6);
        assert!((s.tail_bound - (-40f64).exp()).abs() < 1e-30);

        // int_{-inf}^0 e^{1.5 s} ds = 2/3
        let half = NoisePath::constant(0.5, -100.0, 10.0, 1e-3).unwrap();
        let s = random_equilibrium(&half, 0.0, 40.0).unwrap();
        assert!((s.y - 1.5).abs() < 1e-6);
        assert!(random_equilibrium(&half, 0.0, 200.0).is_err());
    }

    #[test]
    fn real_noise_ode_examples() {
        let zero = NoisePath::constant(0.0, -1.0, 10.0, 1e-3).unwrap();
        let u = real_noise_ode_solution(0.5, &zero, 3f64.ln()).unwrap();
        assert!((u - 0.75).abs() < 1e-7);
        assert_eq!(real_noise_ode_solution(0.0, &zero, 1.0).unwrap(), 0.0);
        assert!(real_noise_ode_solution(-1.0, &zero, 1.0).is_err());
    }

    fn ou(seed: u64) -> NoisePath {
        let p = NoiseParams {
            seed,
            kappa: 1.0,
            sigma: 0.5,
            xi_max: 0.5,
            dt: 1e-3,
        };
        NoisePath::ou(p, -60.0, 60.0).unwrap()
    }

    #[test]
    fn equilibrium_residual() {
        // forward difference of Y against the trapezoid average of
        // Y (1 + xi - Y) over each grid cell
        let noise = ou(11);
        let t_trunc = default_truncation(&noise);
        assert!(tail_bound(noise.floor(), t_trunc) < TAIL_TARGET);
        let path = crate::coeff::equilibrium_path(&noise, 0.0, 50.0, Some(t_trunc)).unwrap();
        let h = noise.dt();
        let mut worst: f64 = 0.0;
        let n = (50.0 / h) as usize;
        for i in 0..n {
            let t = i as f64 * h;
            let (y0, y1) = (path.eval(t).unwrap(), path.eval(t + h).unwrap());
            let (x0, x1) = (noise.eval(t).unwrap(), noise.eval(t + h).unwrap());
            let rhs = 0.5 * (y0 * (1.0 + x0 - y0) + y1 * (1.0 + x1 - y1));
            worst = worst.max(((y1 - y0) / h - rhs).abs());
        }
        assert!(worst <= 1e-3, "residual {worst}");
    }

    #[test]
    fn equilibrium_is_invariant_under_the_flow() {
        let noise = ou(5);
        let t_trunc = default_truncation(&noise);
        let y0 = random_equilibrium(&noise, 0.0, t_trunc).unwrap();
        for i in 0..=50 {
            let t = i as f64;
            let u = real_noise_ode_solution(y0.y, &noise, t).unwrap();
            let yt = random_equilibrium(&noise, t, t_trunc).unwrap();
            assert!((u / yt.y - 1.0).abs() < 2.0 * (y0.rel_error + yt.rel_error) + 1e-10);
        }
    }

    #[test]
    fn cocycle_property() {
        let noise = ou(8);
        let t_trunc = default_truncation(&noise);
        let t0 = 7.3;
        let y = random_equilibrium(&noise, t0, t_trunc).unwrap();
        let shifted = noise.shift(t0);
        for i in 0..20 {
            let t = i as f64 * 2.0;
            let u = real_noise_ode_solution(y.y, &shifted, t).unwrap();
            let target = random_equilibrium(&noise, t0 + t, t_trunc).unwrap();
            assert!((u - target.y).abs() <= 2.0 * target.rel_error * target.y + 1e-10);
        }
    }

    #[test]
    fn tabulated_equilibrium_matches_pointwise() {
        let noise = ou(2);
        let path = crate::coeff::equilibrium_path(&noise, 0.0, 20.0, None).unwrap();
        for i in 0..20 {
            let t = i as f64;
            let direct = random_equilibrium(&noise, t, 50.0).unwrap();
            assert!((path.eval(t).unwrap() / direct.y - 1.0).abs() < 1e-7);
        }
    }
}
