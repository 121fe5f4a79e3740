use serde::{Deserialize, Serialize};

use super::RoFunction;
use crate::error::{Error, Result};
use crate::grid::GeometricGrid;

/// Thresholds for the RO-condition scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoCheckConfig {
    /// Largest tolerated relative growth of the running worst ratio across
    /// the final t-decade.
    pub growth_threshold: f64,
}

impl Default for RoCheckConfig {
    fn default() -> Self {
        RoCheckConfig {
            growth_threshold: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoCheck {
    pub is_ro: bool,
    /// `max φ(λt)/φ(t) ∨ φ(t)/φ(λt)` over the sampled `(t, λ)`; may be `inf`.
    pub worst_c: f64,
    /// Running worst ratio at the end of each t-decade.
    pub decade_worst: Vec<f64>,
}

/// Scans the RO condition `c⁻¹ ≤ φ(λt)/φ(t) ≤ c` on sampled `(t, λ)`.
///
/// A finite grid cannot prove boundedness, so the verdict is that the running
/// worst ratio is finite and has stopped growing over the last t-decade.
pub fn verify_ro_condition(
    phi: &RoFunction,
    a: f64,
    t_grid: &GeometricGrid,
    lambda_grid: &GeometricGrid,
    cfg: &RoCheckConfig,
) -> Result<RoCheck> {
    if !(a > 1.0) {
        return Err(Error::Domain(format!("RO check needs a > 1, got {a}")));
    }
    t_grid.validate()?;
    lambda_grid.validate()?;
    let lambdas = lambda_grid.points();
    if lambdas.iter().any(|&l| l < 1.0 || l > a * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("lambda grid must lie in [1, {a}]")));
    }
    let ts = t_grid.points();
    let t0 = ts[0];

    let mut running = 0.0f64;
    let mut decade_worst = Vec::new();
    let mut current_decade = 0i64;
    for &t in &ts {
        // Decade k covers (t0·10^k, t0·10^{k+1}], so a grid ending on a
        // decade boundary does not open a one-point decade.
        let decade = (((t / t0).log10() - 1e-9).ceil() as i64 - 1).max(0);
        if decade > current_decade {
            decade_worst.push(running);
            current_decade = decade;
        }
        let base = phi.log_eval(t)?;
        for &l in &lambdas {
            let d = (phi.log_eval(l * t)? - base).abs();
            running = running.max(d);
        }
    }
    decade_worst.push(running);
    // Work with log-ratios throughout; exponentiate only for the report.
    let worst_log = running;
    let worst_c = worst_log.exp();
    let decade_worst: Vec<f64> = decade_worst.into_iter().map(f64::exp).collect();

    let stable = match decade_worst.len() {
        0 | 1 => true,
        n => {
            let (prev, last) = (decade_worst[n - 2], decade_worst[n - 1]);
            last.is_finite() && last <= prev * (1.0 + cfg.growth_threshold)
        }
    };
    Ok(RoCheck {
        is_ro: worst_c.is_finite() && stable,
        worst_c,
        decade_worst,
    })
}

/// Sampled lower/upper Matuszewska index estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub sigma0: f64,
    pub sigma1: f64,
    pub worst_c: f64,
}

/// Sampling used by [`matuszewska_indices`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexGrids {
    pub t: GeometricGrid,
    pub lambda: GeometricGrid,
    /// Upper end `a` of the RO pre-check.
    pub ro_a: f64,
    pub ro_lambda: GeometricGrid,
    pub ro: RoCheckConfig,
}

impl Default for IndexGrids {
    fn default() -> Self {
        IndexGrids {
            t: GeometricGrid::decades(0, 8, 32),
            lambda: GeometricGrid::new(2.0, 1e4, 8),
            ro_a: 2.0,
            ro_lambda: GeometricGrid::new(1.0, 2.0, 32),
            ro: RoCheckConfig::default(),
        }
    }
}

/// Estimates `σ₀(φ)`, `σ₁(φ)` as the inf / sup of `ln(φ(λt)/φ(t)) / ln λ` over
/// the sampled `(t, λ)`, after confirming the RO condition on the same
/// t-grid. The estimate is cached on `phi`.
pub fn matuszewska_indices(phi: &RoFunction, grids: &IndexGrids) -> Result<IndexEstimate> {
    let check = verify_ro_condition(phi, grids.ro_a, &grids.t, &grids.ro_lambda, &grids.ro)?;
    if !check.is_ro {
        return Err(Error::IndexUndefined(format!(
            "function failed the RO scan (worst ratio {:e} still growing)",
            check.worst_c
        )));
    }
    grids.lambda.validate()?;
    let lambdas = grids.lambda.points();
    if lambdas[0] <= 1.0 {
        return Err(Error::Domain("index lambda grid must start above 1".into()));
    }
    let log_lambdas: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in grids.t.points() {
        let base = phi.log_eval(t)?;
        for (&l, &ll) in lambdas.iter().zip(&log_lambdas) {
            let slope = (phi.log_eval(l * t)? - base) / ll;
            lo = lo.min(slope);
            hi = hi.max(slope);
        }
    }
    let est = IndexEstimate {
        sigma0: lo,
        sigma1: hi,
        worst_c: check.worst_c,
    };
    phi.cache_indices(est);
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ro::{SampledFn, Tail};

    fn ro_grids() -> (GeometricGrid, GeometricGrid) {
        (GeometricGrid::decades(0, 6, 32), GeometricGrid::new(1.0, 2.0, 32))
    }

    /// exp(√t), tabulated in log form well past the scanned range.
    fn exp_sqrt() -> RoFunction {
        let ts: Vec<f64> = GeometricGrid::decades(0, 7, 64).points();
        let log_t = ts.iter().map(|t| t.ln()).collect();
        let log_v = ts.iter().map(|t| t.sqrt()).collect();
        RoFunction::tabulated_log(log_t, log_v, 0.0).unwrap()
    }

    #[test]
    fn power_is_ro_with_exact_constant() {
        let (tg, lg) = ro_grids();
        let r = verify_ro_condition(&RoFunction::power(2.0), 2.0, &tg, &lg, &Default::default())
            .unwrap();
        assert!(r.is_ro);
        assert!((r.worst_c - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exp_sqrt_is_not_ro() {
        let (tg, lg) = ro_grids();
        let f = exp_sqrt();
        let r = verify_ro_condition(&f, 2.0, &tg, &lg, &Default::default()).unwrap();
        // Oracle: the ratio at λ = 2 is exp(√(2t) − √t), growing without bound.
        let oracle = |t: f64| ((2.0 * t).sqrt() - t.sqrt()).exp();
        assert!(oracle(1e6) / oracle(1e5) > 1e100);
        assert!(!r.is_ro);
        let n = r.decade_worst.len();
        assert!(r.decade_worst[n - 1] > 1e10 * r.decade_worst[n - 2]);
        assert!(matches!(
            matuszewska_indices(&f, &IndexGrids { t: tg, ..Default::default() }),
            Err(Error::IndexUndefined(_))
        ));
    }

    #[test]
    fn bounded_oscillation_is_ro() {
        let beta = SampledFn::from_fn(|t| t.ln().sin(), 16, 64, Tail::Hold).unwrap();
        let f = RoFunction::gamma_integral(beta, SampledFn::constant(0.0).unwrap());
        let (tg, lg) = ro_grids();
        let r = verify_ro_condition(&f, 2.0, &tg, &lg, &Default::default()).unwrap();
        // Oracle: brute-force scan of the closed form exp(sin ln t).
        let mut oracle = 0.0f64;
        for t in tg.points() {
            for l in lg.points() {
                oracle = oracle.max(((l * t).ln().sin() - t.ln().sin()).abs());
            }
        }
        assert!(r.is_ro);
        assert!(r.worst_c <= std::f64::consts::E.powi(2));
        assert!((r.worst_c.ln() - oracle).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_arguments() {
        let (tg, lg) = ro_grids();
        let f = RoFunction::one();
        assert!(verify_ro_condition(&f, 1.0, &tg, &lg, &Default::default()).is_err());
        let wide = GeometricGrid::new(1.0, 3.0, 8);
        assert!(verify_ro_condition(&f, 2.0, &tg, &wide, &Default::default()).is_err());
    }

    #[test]
    fn pure_power_indices() {
        let f = RoFunction::power(2.0);
        let est = matuszewska_indices(&f, &IndexGrids::default()).unwrap();
        assert!((est.sigma0 - 2.0).abs() < 1e-9 && (est.sigma1 - 2.0).abs() < 1e-9);
        assert_eq!(f.cached_indices(), Some(est));
    }

    /// Independent brute-force log-ratio scan over the same sample points.
    fn scan(phi: impl Fn(f64) -> f64, grids: &IndexGrids) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in grids.t.points() {
            for l in grids.lambda.points() {
                let s = (phi(l * t) / phi(t)).ln() / l.ln();
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        (lo, hi)
    }

    #[test]
    fn slowly_varying_factor_matches_scan() {
        let grids = IndexGrids::default();
        let f = RoFunction::log_power(0.5, vec![1.0]);
        let est = matuszewska_indices(&f, &grids).unwrap();
        let (lo, hi) =
            scan(|t| t.sqrt() * (std::f64::consts::E - 1.0 + t).ln(), &grids);
        assert!((est.sigma0 - lo).abs() < 1e-9 && (est.sigma1 - hi).abs() < 1e-9);
        // The log factor only inflates the ratios, so the true index 1/2 is a
        // lower bound for both estimates.
        assert!(est.sigma0 >= 0.5 && est.sigma0 < 0.55);
        assert!(est.sigma1 > est.sigma0);
    }

    #[test]
    fn alternating_gamma_indices() {
        let ppd = 64;
        let mut v = vec![1.0; ppd];
        v.extend(vec![2.0; ppd]);
        v.push(1.0);
        let gamma = SampledFn::new(ppd, v, Tail::Periodic).unwrap();
        let f = RoFunction::gamma_integral(SampledFn::constant(0.0).unwrap(), gamma.clone());
        let grids = IndexGrids::default();
        let est = matuszewska_indices(&f, &grids).unwrap();
        let (lo, hi) = scan(|t| gamma.log_integral(t).exp(), &grids);
        assert!((est.sigma0 - lo).abs() < 1e-9 && (est.sigma1 - hi).abs() < 1e-9);
        assert!((est.sigma0 - 1.0).abs() <= 0.1, "sigma0 = {}", est.sigma0);
        assert!((est.sigma1 - 2.0).abs() <= 0.1, "sigma1 = {}", est.sigma1);
    }
}
