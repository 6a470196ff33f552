use crate::{Error, Result};

/// Piecewise-linear function through a nondecreasing list of knots.
///
/// Repeated knots encode jumps; the value right of the jump wins.
#[derive(Debug, Clone)]
pub(crate) struct PiecewiseLinear {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Integral from `knots[0]` to `knots[i]`.
    cumulative: Vec<f64>,
    /// `(t0, dt)` when knots are uniform, used for O(1) lookup.
    uniform: Option<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::param("piecewise-linear path needs >= 2 matching knots and values"));
        }
        if knots.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::param("knots must be nondecreasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("path values must be finite"));
        }
        let mut cumulative = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..knots.len() {
            acc += 0.5 * (knots[i] - knots[i - 1]) * (values[i] + values[i - 1]);
            cumulative.push(acc);
        }
        Ok(Self {
            knots,
            values,
            cumulative,
            uniform: None,
        })
    }

    pub fn uniform(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::param("sample step must be positive"));
        }
        let knots = (0..values.len()).map(|i| t0 + i as f64 * dt).collect();
        let mut p = Self::new(knots, values)?;
        p.uniform = Some((t0, dt));
        Ok(p)
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index `i` of the segment `[knots[i], knots[i+1]]` holding `t`.
    fn segment(&self, t: f64) -> usize {
        let last = self.knots.len() - 2;
        if let Some((t0, dt)) = self.uniform {
            let guess = ((t - t0) / dt).floor();
            let mut i = if guess <= 0.0 { 0 } else { (guess as usize).min(last) };
            // floor() can land one segment off near a knot
            if i > 0 && self.knots[i] > t {
                i -= 1;
            } else if i < last && self.knots[i + 1] <= t {
                i += 1;
            }
            return i;
        }
        let p = self.knots.partition_point(|&k| k <= t);
        p.saturating_sub(1).min(last)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        if k1 <= k0 {
            return self.values[i + 1];
        }
        let w = ((t - k0) / (k1 - k0)).clamp(0.0, 1.0);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// Integral from the first knot to `t`; exact for this interpolant.
    pub fn primitive(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let k0 = self.knots[i];
        let v = self.eval(t);
        self.cumulative[i] + 0.5 * (t - k0) * (self.values[i] + v)
    }

    /// Maximum over `[s, t]`.
    pub fn max_on(&self, s: f64, t: f64) -> f64 {
        let mut m = self.eval(s).max(self.eval(t));
        let i0 = self.knots.partition_point(|&k| k <= s);
        let i1 = self.knots.partition_point(|&k| k < t);
        for v in &self.values[i0.min(i1)..i1] {
            m = m.max(*v);
        }
        m
    }

    /// Minimum over `[s, t]`.
    pub fn min_on(&self, s: f64, t: f64) -> f64 {
        let mut m = self.eval(s).min(self.eval(t));
        let i0 = self.knots.partition_point(|&k| k <= s);
        let i1 = self.knots.partition_point(|&k| k < t);
        for v in &self.values[i0.min(i1)..i1] {
            m = m.min(*v);
        }
        m
    }
}
