//! Explicit super- and subsolutions built on the exponential profiles
//! `e^{-mu (x - C(t))}`, `C(t) = int_0^t (mu^2 + a)/mu`, and their
//! certification against computed solutions.
//!
//! * supersolution: `phi_+ = min(1, e^{-mu (x - C)})`;
//! * lower solution: `e^{-mu xi} - d e^{(mt/mu - 1) B(t) - mt xi}`,
//!   `xi = x - C(t)`, valid right of `rho(t) = C + ln d/(mt - mu) + B/mu`;
//! * capped lower solution: the lower solution, held at its maximum left of
//!   the maximizing point `x_w(t)`.
//!
//! Here `mt` stands for the second exponent `mu_tilde` and `B` is the
//! negated bounded primitive from [`crate::coeff::build_b`] with
//! `gamma = mt * mu` and `scale = 1 - delta`, so that
//! `(1 - delta) a + B' >= mt * mu` inside every block.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{build_b, estimate_means, CoefficientPath, PiecewiseB};
use crate::fmt::sig;
use crate::kppsolve::{Grid1D, Trajectory};
use crate::{Error, Result};

/// Safety factor of [`delta_for`].
pub const DELTA_MARGIN: f64 = 1.05;

/// `c(t) = (mu^2 + a(t))/mu`.
pub fn speed_integrand(path: &CoefficientPath, mu: f64, t: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok((mu * mu + path.eval(t)?) / mu)
}

/// `C(t) = int_0^t c`.
pub fn frame_position(path: &CoefficientPath, mu: f64, t: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(mu * t + path.integral(0.0, t)? / mu)
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("exponent must be positive, got {mu}")))
    }
}

/// Smallest admissible `d`:
/// `max(e^{k |B|} / (delta k), e^{k |B|})` with `k = mu_tilde/mu - 1`.
///
/// The first branch makes `d delta k e^{k B(t)} >= 1` for every `t`, since
/// `B(t) >= -|B|`; the second makes the validity region lie in `xi >= 0`.
pub fn lower_threshold(mu: f64, mu_tilde: f64, delta: f64, b_norm: f64) -> Result<f64> {
    check_exponents(mu, mu_tilde)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(b_norm >= 0.0) {
        return Err(Error::param("sup norm must be nonnegative"));
    }
    let k = mu_tilde / mu - 1.0;
    Ok(((k * b_norm).exp() / (delta * k)).max((k * b_norm).exp()))
}

fn check_exponents(mu: f64, mu_tilde: f64) -> Result<()> {
    check_mu(mu)?;
    if !(mu < mu_tilde && mu_tilde < 2.0 * mu) {
        return Err(Error::param(format!(
            "need mu < mu_tilde < 2 mu, got mu = {mu}, mu_tilde = {mu_tilde}"
        )));
    }
    Ok(())
}

/// Largest `delta` with `(1 - delta) a_low >= DELTA_MARGIN * mu_tilde * mu`.
pub fn delta_for(mu: f64, mu_tilde: f64, a_low: f64) -> Result<f64> {
    check_exponents(mu, mu_tilde)?;
    let delta = 1.0 - DELTA_MARGIN * mu_tilde * mu / a_low;
    if !(delta > 0.0) {
        return Err(Error::param(format!(
            "no admissible delta: {DELTA_MARGIN} * mu_tilde * mu = {} >= least mean {a_low}",
            DELTA_MARGIN * mu_tilde * mu
        )));
    }
    Ok(delta)
}

/// Maximum over `x` of `e^{-mu xi} - d e^{k b - mt xi}` and its location
/// `xi*` relative to `C(t)`.
pub fn lower_peak(mu: f64, mu_tilde: f64, d: f64, b: f64) -> (f64, f64) {
    let xi = ((d * mu_tilde / mu).ln() + (mu_tilde / mu - 1.0) * b) / (mu_tilde - mu);
    (xi, (-mu * xi).exp() * (1.0 - mu / mu_tilde))
}

/// Parameters of the lower solution, validated against a path.
#[derive(Debug, Clone)]
pub struct WaveParams {
    pub mu: f64,
    pub mu_tilde: f64,
    pub delta: f64,
    pub d: f64,
    pub d_b: f64,
    pub a_low: f64,
    path: CoefficientPath,
    b: Arc<PiecewiseB>,
}

/// How [`WaveParams::build`] chooses the block decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub r_min: f64,
    pub horizon: (f64, f64),
}

impl WaveParams {
    /// Builds `B` for `gamma = mu_tilde * mu`, `scale = 1 - delta` and takes
    /// `d = d_b` unless `d` is given (which must then be `>= d_b`).
    ///
    /// Accepts `mu_tilde` up to `2 mu`; the least mean enters only through
    /// `(1 - delta) a_low > mu_tilde * mu`.
    pub fn build(
        path: &CoefficientPath,
        mu: f64,
        mu_tilde: f64,
        delta: Option<f64>,
        d: Option<f64>,
        blocks: BlockSpec,
    ) -> Result<Self> {
        check_exponents(mu, mu_tilde)?;
        let est = estimate_means(path, blocks.r_min, blocks.r_min / 4.0, blocks.horizon)?;
        let delta = match delta {
            Some(d) => d,
            None => delta_for(mu, mu_tilde, est.a_low)?,
        };
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
        }
        if !((1.0 - delta) * est.a_low > mu_tilde * mu) {
            return Err(Error::param(format!(
                "(1 - delta) * least mean = {} must exceed mu_tilde * mu = {}",
                (1.0 - delta) * est.a_low,
                mu_tilde * mu
            )));
        }
        let b = build_b(path, mu_tilde * mu, 1.0 - delta, blocks.r_min, blocks.horizon)?;
        let d_b = lower_threshold(mu, mu_tilde, delta, b.sup_norm())?;
        let d = d.unwrap_or(d_b);
        if !(d >= d_b) {
            return Err(Error::param(format!("d = {d} below the threshold {d_b}")));
        }
        Ok(Self {
            mu,
            mu_tilde,
            delta,
            d,
            d_b,
            a_low: est.a_low,
            path: path.clone(),
            b: Arc::new(b),
        })
    }

    pub fn blocks(&self) -> &PiecewiseB {
        &self.b
    }

    pub fn path(&self) -> &CoefficientPath {
        &self.path
    }

    /// `k = mu_tilde/mu - 1`.
    pub fn k(&self) -> f64 {
        self.mu_tilde / self.mu - 1.0
    }

    /// Shifted, sign-flipped primitive `B(t + t0)` and its derivative.
    fn b_at(&self, t: f64) -> Result<(f64, f64)> {
        Ok((-self.b.value(t)?, -self.b.derivative(t)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Super,
    Sub,
}

/// Direction of a certified inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `u <= bound`.
    Below,
    /// `u >= bound`.
    Above,
}

#[derive(Debug, Clone)]
enum Shape {
    Constant(f64),
    Exponential {
        path: CoefficientPath,
        mu: f64,
        capped: bool,
    },
    Lower {
        path: CoefficientPath,
        wave: Arc<WaveParams>,
        t0: f64,
        capped: bool,
    },
}

/// An explicit function of `(t, x)` used as a comparison bound.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    kind: BoundKind,
    shape: Shape,
}

/// `min(1, e^{-mu (x - C(t))})`.
pub fn supersolution(path: &CoefficientPath, mu: f64) -> Result<BoundCurve> {
    check_mu(mu)?;
    Ok(BoundCurve {
        kind: BoundKind::Super,
        shape: Shape::Exponential {
            path: path.clone(),
            mu,
            capped: true,
        },
    })
}

/// `e^{-mu (x - C(t))}` without the cap; solves the linearized equation.
pub fn linear_supersolution(path: &CoefficientPath, mu: f64) -> Result<BoundCurve> {
    check_mu(mu)?;
    Ok(BoundCurve {
        kind: BoundKind::Super,
        shape: Shape::Exponential {
            path: path.clone(),
            mu,
            capped: false,
        },
    })
}

/// The lower solution, valid right of `rho(t)`.
pub fn lower_solution(params: &WaveParams) -> BoundCurve {
    BoundCurve {
        kind: BoundKind::Sub,
        shape: Shape::Lower {
            path: params.path.clone(),
            wave: Arc::new(params.clone()),
            t0: 0.0,
            capped: false,
        },
    }
}

/// The lower solution under the path shifted by `t0`, flat left of its
/// maximizer `x_w(t)`; valid on the whole line.
pub fn capped_lower(params: &WaveParams, t0: f64) -> BoundCurve {
    BoundCurve {
        kind: BoundKind::Sub,
        shape: Shape::Lower {
            path: params.path.shift(t0),
            wave: Arc::new(params.clone()),
            t0,
            capped: true,
        },
    }
}

impl BoundCurve {
    pub fn constant(kind: BoundKind, value: f64) -> Self {
        Self {
            kind,
            shape: Shape::Constant(value),
        }
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn describe(&self) -> String {
        match &self.shape {
            Shape::Constant(c) => format!("constant {}", sig(*c)),
            Shape::Exponential { mu, capped, .. } => {
                format!("exponential mu={}{}", sig(*mu), if *capped { " capped" } else { "" })
            }
            Shape::Lower { wave, t0, capped, .. } => format!(
                "lower mu={} mu_tilde={} delta={} d={} t0={}{}",
                sig(wave.mu),
                sig(wave.mu_tilde),
                sig(wave.delta),
                sig(wave.d),
                sig(*t0),
                if *capped { " capped" } else { "" }
            ),
        }
    }

    /// `C(t)` of the underlying profile; `None` for constants.
    pub fn frame_position(&self, t: f64) -> Result<Option<f64>> {
        match &self.shape {
            Shape::Constant(_) => Ok(None),
            Shape::Exponential { path, mu, .. } => frame_position(path, *mu, t).map(Some),
            Shape::Lower { path, wave, .. } => frame_position(path, wave.mu, t).map(Some),
        }
    }

    /// Left end `rho(t)` of the validity half-line; `None` when the curve is
    /// valid everywhere.
    pub fn validity_start(&self, t: f64) -> Result<Option<f64>> {
        match &self.shape {
            Shape::Lower {
                path,
                wave,
                t0,
                capped: false,
            } => {
                let c = frame_position(path, wave.mu, t)?;
                let (b, _) = wave.b_at(t + t0)?;
                Ok(Some(c + wave.d.ln() / (wave.mu_tilde - wave.mu) + b / wave.mu))
            }
            _ => Ok(None),
        }
    }

    /// Maximizer `x_w(t)` of a lower profile.
    pub fn peak_position(&self, t: f64) -> Result<Option<f64>> {
        match &self.shape {
            Shape::Lower { path, wave, t0, .. } => {
                let c = frame_position(path, wave.mu, t)?;
                let (b, _) = wave.b_at(t + t0)?;
                Ok(Some(c + lower_peak(wave.mu, wave.mu_tilde, wave.d, b).0))
            }
            _ => Ok(None),
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        match &self.shape {
            Shape::Constant(c) => Ok(*c),
            Shape::Exponential { path, mu, capped } => {
                let v = (-mu * (x - frame_position(path, *mu, t)?)).exp();
                Ok(if *capped { v.min(1.0) } else { v })
            }
            Shape::Lower {
                path,
                wave,
                t0,
                capped,
            } => {
                let c = frame_position(path, wave.mu, t)?;
                let (b, _) = wave.b_at(t + t0)?;
                let (xi_peak, peak) = lower_peak(wave.mu, wave.mu_tilde, wave.d, b);
                let xi = x - c;
                if *capped && xi <= xi_peak {
                    return Ok(peak);
                }
                Ok(lower_profile(wave, xi, b))
            }
        }
    }

    /// Residual `phi_t - phi_xx - a phi (1 - phi)` from closed-form
    /// derivatives (for the uncapped exponential, the linear residual
    /// `phi_t - phi_xx - a phi`). Capped pieces use the uncapped formula;
    /// `t` must not be a breakpoint of `B`.
    pub fn residual(&self, t: f64, x: f64) -> Result<f64> {
        match &self.shape {
            Shape::Constant(c) => {
                let _ = (t, x);
                Err(Error::param(format!("residual of constant {c} needs a path")))
            }
            Shape::Exponential { path, mu, .. } => {
                let a = path.eval(t)?;
                let ct = (mu * mu + a) / mu;
                let phi = (-mu * (x - frame_position(path, *mu, t)?)).exp();
                Ok(mu * ct * phi - mu * mu * phi - a * phi)
            }
            Shape::Lower { path, wave, t0, .. } => {
                let a = path.eval(t)?;
                let (mu, mt, d, k) = (wave.mu, wave.mu_tilde, wave.d, wave.k());
                let ct = (mu * mu + a) / mu;
                let xi = x - frame_position(path, mu, t)?;
                let (b, db) = wave.b_at(t + t0)?;
                let e1 = (-mu * xi).exp();
                let e2 = (k * b - mt * xi).exp();
                let phi = e1 - d * e2;
                let phi_t = mu * ct * e1 - d * (k * db + mt * ct) * e2;
                let phi_xx = mu * mu * e1 - d * mt * mt * e2;
                Ok(phi_t - phi_xx - a * phi * (1.0 - phi))
            }
        }
    }

    /// Samples on `grid` at each time: `t,x,value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W, grid: &Grid1D, times: &[f64]) -> Result<()> {
        writeln!(w, "# {}", self.describe())?;
        writeln!(w, "t,x,value")?;
        for &t in times {
            for x in grid.nodes() {
                writeln!(w, "{},{},{}", sig(t), sig(x), sig(self.eval(t, x)?))?;
            }
        }
        Ok(())
    }
}

fn lower_profile(wave: &WaveParams, xi: f64, b: f64) -> f64 {
    (-wave.mu * xi).exp() - wave.d * (wave.k() * b - wave.mu_tilde * xi).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingRow {
    pub t: f64,
    /// Largest signed violation over the validity region (negative when the
    /// inequality holds strictly everywhere).
    pub max_violation: f64,
    /// Lab position of the largest violation.
    pub location: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub bound: String,
    pub relation: Relation,
    pub slack: f64,
    pub rows: Vec<OrderingRow>,
    pub max_violation: f64,
    pub t_max_violation: f64,
    pub passed: bool,
}

impl OrderingReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,max_violation,location")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", sig(r.t), sig(r.max_violation), sig(r.location))?;
        }
        Ok(())
    }
}

/// Checks `u <= bound` or `u >= bound` at every stored frame, restricted to
/// the bound's validity region. Fails with [`Error::InconsistentInitial`] if
/// the first frame already violates the relation beyond `slack`.
pub fn certify_ordering(
    trajectory: &Trajectory,
    bound: &BoundCurve,
    relation: Relation,
    slack: f64,
) -> Result<OrderingReport> {
    if !(slack >= 0.0) {
        return Err(Error::param("slack must be nonnegative"));
    }
    let mut rows = Vec::with_capacity(trajectory.frames().len());
    for (j, f) in trajectory.frames().iter().enumerate() {
        let t = f.t();
        let rho = bound.validity_start(t)?;
        let mut worst = f64::NEG_INFINITY;
        let mut location = f64::NAN;
        for (i, &u) in f.values().iter().enumerate() {
            let x = f.lab_x(i);
            if rho.is_some_and(|r| x < r) {
                continue;
            }
            let b = bound.eval(t, x)?;
            let v = match relation {
                Relation::Below => u - b,
                Relation::Above => b - u,
            };
            if v > worst {
                worst = v;
                location = x;
            }
        }
        if j == 0 && worst > slack {
            return Err(Error::InconsistentInitial {
                violation: worst,
                x: location,
            });
        }
        rows.push(OrderingRow {
            t,
            max_violation: worst,
            location,
        });
    }
    let (t_max_violation, max_violation) = rows
        .iter()
        .map(|r| (r.t, r.max_violation))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((f64::NAN, f64::NEG_INFINITY));
    Ok(OrderingReport {
        bound: bound.describe(),
        relation,
        slack,
        rows,
        max_violation,
        t_max_violation,
        passed: max_violation <= slack,
    })
}
