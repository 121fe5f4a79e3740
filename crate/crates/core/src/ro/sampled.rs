use std::f64::consts::LN_10;

use crate::error::{Error, Result};

/// How a sampled function continues past its last node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// Constant continuation with the last value.
    Hold,
    /// The samples repeat with period `len - 1` nodes in log-space.
    Periodic,
}

/// A bounded real function on `[1, ∞)` stored as samples on a uniform grid
/// in `ln t`, piecewise linear between nodes.
///
/// Node `k` sits at `t = 10^(k / points_per_decade)`. The running integral
/// `∫₁ᵗ f(τ)/τ dτ = ∫₀^{ln t} f(e^u) du` is tabulated once with the
/// trapezoid rule, which is exact for the piecewise-linear interpolant.
#[derive(Debug, Clone)]
pub struct SampledFn {
    points_per_decade: usize,
    values: Vec<f64>,
    tail: Tail,
    cumulative: Vec<f64>,
}

impl SampledFn {
    pub fn new(points_per_decade: usize, values: Vec<f64>, tail: Tail) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFunction("sampled function has no values".into()));
        }
        if points_per_decade == 0 {
            return Err(Error::InvalidFunction("points_per_decade must be positive".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!(
                "sampled function must be bounded, found {v}"
            )));
        }
        if tail == Tail::Periodic && values.len() < 2 {
            return Err(Error::InvalidFunction("periodic tail needs at least two nodes".into()));
        }
        let h = LN_10 / points_per_decade as f64;
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Ok(SampledFn {
            points_per_decade,
            values,
            tail,
            cumulative,
        })
    }

    pub fn constant(v: f64) -> Result<Self> {
        SampledFn::new(1, vec![v], Tail::Hold)
    }

    /// Samples `f` at the nodes covering `decades` decades.
    pub fn from_fn(
        f: impl Fn(f64) -> f64,
        decades: usize,
        points_per_decade: usize,
        tail: Tail,
    ) -> Result<Self> {
        let n = decades * points_per_decade;
        let values = (0..=n)
            .map(|k| f(10f64.powf(k as f64 / points_per_decade as f64)))
            .collect();
        SampledFn::new(points_per_decade, values, tail)
    }

    fn step(&self) -> f64 {
        LN_10 / self.points_per_decade as f64
    }

    fn last(&self) -> usize {
        self.values.len() - 1
    }

    pub fn points_per_decade(&self) -> usize {
        self.points_per_decade
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Folds a log-coordinate `u ≥ 0` into the sampled range.
    fn fold(&self, u: f64) -> (f64, f64) {
        let h = self.step();
        let span = self.last() as f64 * h;
        match self.tail {
            Tail::Periodic if u > span => {
                let periods = (u / span).floor();
                (u - periods * span, periods)
            }
            _ => (u, 0.0),
        }
    }

    fn value_at_log(&self, u: f64) -> f64 {
        let (u, _) = self.fold(u);
        let s = u / self.step();
        let last = self.last();
        if s >= last as f64 {
            return self.values[last];
        }
        let k = s.floor() as usize;
        let f = s - k as f64;
        self.values[k] + f * (self.values[k + 1] - self.values[k])
    }

    /// Value at `t ≥ 1`.
    pub fn value(&self, t: f64) -> f64 {
        self.value_at_log(t.ln().max(0.0))
    }

    /// `∫₁ᵗ f(τ)/τ dτ` for `t ≥ 1`.
    pub fn log_integral(&self, t: f64) -> f64 {
        let u = t.ln().max(0.0);
        let (u, periods) = self.fold(u);
        let h = self.step();
        let last = self.last();
        let full = self.cumulative[last];
        let s = u / h;
        let partial = if s >= last as f64 {
            full + (u - last as f64 * h) * self.values[last]
        } else {
            let k = s.floor() as usize;
            let f = s - k as f64;
            let (a, b) = (self.values[k], self.values[k + 1]);
            self.cumulative[k] + h * (f * a + 0.5 * f * f * (b - a))
        };
        periods * full + partial
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn constant_gamma_integrates_to_log() {
        let g = SampledFn::constant(1.0).unwrap();
        for t in [1.0, std::f64::consts::E, 10.0, 1e6] {
            assert!((g.log_integral(t) - t.ln()).abs() < 1e-12 * (1.0 + t.ln()));
        }
    }

    #[test]
    fn matches_independent_quadrature() {
        let g = SampledFn::from_fn(|t| (t.ln()).sin(), 4, 64, Tail::Hold).unwrap();
        // Oracle: Simpson on the interpolant itself, after u = ln τ.
        for t in [1.5, 7.0, 123.0, 9000.0] {
            let oracle = simpson(|u| g.value(u.exp()), 0.0, f64::ln(t), 200_000);
            assert!((g.log_integral(t) - oracle).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn periodic_tail_repeats() {
        // one decade of 1 followed by one decade of 2, repeating
        let ppd = 64;
        let mut v = vec![1.0; ppd];
        v.extend(vec![2.0; ppd]);
        v.push(1.0);
        let g = SampledFn::new(ppd, v, Tail::Periodic).unwrap();
        assert_eq!(g.value(10f64.powf(0.5)), 1.0);
        assert_eq!(g.value(10f64.powf(1.5)), 2.0);
        assert_eq!(g.value(10f64.powf(2.5)), 1.0);
        let per_period = g.log_integral(100.0);
        assert!((g.log_integral(1e6) - 3.0 * per_period).abs() < 1e-9);
    }

    #[test]
    fn hold_tail_extends_linearly_in_log() {
        let g = SampledFn::from_fn(|_| 2.0, 1, 8, Tail::Hold).unwrap();
        assert!((g.log_integral(1e3) - 2.0 * 1e3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbounded_or_empty() {
        assert!(SampledFn::new(8, vec![], Tail::Hold).is_err());
        assert!(SampledFn::new(8, vec![1.0, f64::INFINITY], Tail::Hold).is_err());
        assert!(SampledFn::new(0, vec![1.0], Tail::Hold).is_err());
    }
}
