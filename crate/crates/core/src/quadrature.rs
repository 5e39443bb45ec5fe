//! Composite Simpson quadrature with interval halving.
//!
//! Integrals over (0, 1) here typically carry a `1/t` or `1/(1-t)` factor,
//! so [`integrate`] splits the range at dyadic points `2^-k` and `1 - 2^-k`
//! before applying Simpson on each piece. Every piece then spans at most a
//! factor of two in distance to the nearest endpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    /// Successive halvings must agree to this relative tolerance.
    pub rel_tol: f64,
    /// Absolute floor for pieces whose integral is (near) zero.
    pub abs_tol: f64,
    /// Hard cap on panels per piece.
    pub max_panels: usize,
    /// Restricts continuous weights to `[epsilon, 1 - epsilon]`.
    pub epsilon: Option<f64>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-15,
            max_panels: 1 << 20,
            epsilon: None,
        }
    }
}

impl QuadConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_panels < 4 {
            return Err(Error::InvalidArgument(format!(
                "invalid quadrature settings {self:?}"
            )));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::InvalidArgument(format!(
                    "epsilon must lie in (0, 0.5), got {eps}"
                )));
            }
        }
        Ok(())
    }

    /// Integration domain for continuous weights.
    pub fn domain(&self) -> (f64, f64) {
        match self.epsilon {
            Some(eps) => (eps, 1.0 - eps),
            None => (0.0, 1.0),
        }
    }
}

const MIN_PANELS: usize = 8;

/// Composite Simpson on one smooth piece, doubling the panel count until two
/// successive estimates agree. Returns the Richardson-corrected estimate.
///
/// The endpoints are sampled one ulp inside the interval, so `f` may jump
/// exactly at `a` or `b`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (ia, ib) = if a < b {
        (a.next_up(), b.next_down())
    } else {
        (a.next_down(), b.next_up())
    };
    let ends = f(ia) + f(ib);
    let mut n = 2usize;
    let mut h = (b - a) / 2.0;
    let mut odd = f(a + h);
    let mut even = 0.0;
    let mut previous = h / 3.0 * (ends + 4.0 * odd);
    loop {
        n *= 2;
        h /= 2.0;
        even += odd;
        odd = (0..n / 2).map(|i| f(a + (2 * i + 1) as f64 * h)).sum::<f64>();
        let current = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        let diff = (current - previous).abs();
        if n >= MIN_PANELS && (diff <= cfg.rel_tol * current.abs() || diff <= cfg.abs_tol) {
            return Ok(current + (current - previous) / 15.0);
        }
        if !current.is_finite() || n >= cfg.max_panels {
            return Err(Error::QuadratureNotConverged {
                lo: a,
                hi: b,
                panels: n,
            });
        }
        previous = current;
    }
}

/// Dyadic split points strictly inside `(a, b)`, ascending.
fn dyadic_nodes(a: f64, b: f64) -> Vec<f64> {
    let mut nodes = Vec::new();
    for k in 1..=60 {
        let x = (0.5f64).powi(k);
        if x > a && x < b {
            nodes.push(x);
        }
        let y = 1.0 - x;
        if k <= 52 && y > a && y < b && y != x {
            nodes.push(y);
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// All piece boundaries for integrating over `[a, b]`: the ends, any
/// `breakpoints` inside, and the dyadic nodes.
pub fn piece_boundaries(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut nodes = vec![a, b];
    nodes.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    nodes.extend(dyadic_nodes(a, b));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// Integral of `f` over `[a, b]` where `f` is smooth between consecutive
/// `breakpoints`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-integrate(f, b, a, breakpoints, cfg)?);
    }
    let nodes = piece_boundaries(a, b, breakpoints);
    let mut acc = CompensatedSum::new();
    for w in nodes.windows(2) {
        acc.add(simpson(f, w[0], w[1], cfg)?);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadConfig::default();
        let v = simpson(&|t: f64| t * t * t - t, 0.0, 1.0, &cfg).unwrap();
        assert!((v - (0.25 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_over_many_decades() {
        let cfg = QuadConfig::default();
        let v = integrate(&|t: f64| 1.0 / t, 1e-6, 0.5, &[], &cfg).unwrap();
        let exact = (0.5f64 / 1e-6).ln();
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn log_singularity_near_one() {
        let cfg = QuadConfig::default();
        let v = integrate(&|t: f64| 1.0 / (1.0 - t), 0.0, 0.999, &[], &cfg).unwrap();
        let exact = -(0.001f64).ln();
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn discontinuity_at_breakpoint() {
        let cfg = QuadConfig::default();
        let f = |t: f64| if t < 0.3 { 1.0 } else { 2.0 };
        let v = integrate(&f, 0.0, 1.0, &[0.3], &cfg).unwrap();
        assert!((v - (0.3 + 1.4)).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_negate() {
        let cfg = QuadConfig::default();
        let f = |t: f64| t.exp();
        let a = integrate(&f, 0.2, 0.7, &[], &cfg).unwrap();
        let b = integrate(&f, 0.7, 0.2, &[], &cfg).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn panel_cap_reports_failure() {
        let cfg = QuadConfig {
            max_panels: 16,
            ..QuadConfig::default()
        };
        let err = simpson(&|t: f64| (200.0 * t).sin().abs(), 0.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn epsilon_validation() {
        assert!(QuadConfig::default().with_epsilon(0.0).validate().is_err());
        assert!(QuadConfig::default().with_epsilon(1e-6).validate().is_ok());
        assert_eq!(QuadConfig::default().with_epsilon(0.1).domain(), (0.1, 0.9));
    }
}
