//! Threshold-weighting functions ω(t) and their cumulative integrals
//!
//! ```text
//! W1(x) = ∫₀ˣ ω(t)/t dt        W0(x) = ∫₀ˣ ω(t)/(1-t) dt
//! ```
//!
//! A subject with score `f` and outcome `y` contributes `y·W1(f) - (1-y)·W0(f)`
//! to the continuous net benefit, so these two functions are all the
//! evaluation code needs from a weight.
//!
//! A [`WeightSpec`] may mix a continuous part with point masses. Point masses
//! have no density; they enter W1/W0 as jumps of `mass/t*` and
//! `mass/(1-t*)` just above `t*`.

use serde::{Deserialize, Serialize};

use crate::confusion::check_threshold;
use crate::error::{Endpoint, Error, Result};
use crate::quadrature::{integrate, piece_boundaries, simpson, QuadConfig};
use crate::sum::CompensatedSum;

fn one() -> f64 {
    1.0
}

/// Piecewise-linear function on (0, 1), constant beyond the first and last
/// grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let curve = Self { grid, values };
        curve.validate()?;
        Ok(curve)
    }

    pub fn constant(value: f64) -> Self {
        Self {
            grid: vec![0.5],
            values: vec![value],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.len() != self.values.len() {
            return Err(Error::InvalidWeightSpec(format!(
                "tabulated curve needs matching nonempty grid and values ({} vs {})",
                self.grid.len(),
                self.values.len()
            )));
        }
        if self.grid.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::InvalidWeightSpec(
                "tabulated grid must lie inside (0, 1)".into(),
            ));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidWeightSpec(
                "tabulated grid must be strictly ascending".into(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidWeightSpec(
                "tabulated values must be finite".into(),
            ));
        }
        Ok(())
    }

    fn validate_nonnegative(&self, what: &str) -> Result<()> {
        self.validate()?;
        if self.values.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidWeightSpec(format!(
                "{what} must be nonnegative"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if t <= self.grid[0] {
            return self.values[0];
        }
        if t >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let j = self.grid.partition_point(|&g| g <= t);
        let (x0, x1) = (self.grid[j - 1], self.grid[j]);
        let (y0, y1) = (self.values[j - 1], self.values[j]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    fn left_limit(&self) -> f64 {
        self.values[0]
    }

    fn right_limit(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Harmonic combination `1 / (1/tp_benefit + 1/fp_harm)`; zero when either
/// side is zero.
fn harmonic(tp_benefit: f64, fp_harm: f64) -> f64 {
    if tp_benefit <= 0.0 || fp_harm <= 0.0 {
        0.0
    } else {
        1.0 / (1.0 / tp_benefit + 1.0 / fp_harm)
    }
}

/// Importance of a threshold given the benefit of a true positive and the
/// benefit of avoiding a false positive.
pub fn harmonic_weight(tp_benefit: f64, fp_harm: f64) -> Result<f64> {
    if !(tp_benefit > 0.0 && fp_harm > 0.0) || !tp_benefit.is_finite() || !fp_harm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "harmonic weight needs positive finite arguments, got ({tp_benefit}, {fp_harm})"
        )));
    }
    Ok(harmonic(tp_benefit, fp_harm))
}

/// Declarative weighting function over thresholds.
///
/// Densities passed to the `ThresholdDensity*` and `HarmonicUtilities`
/// variants are themselves `WeightSpec`s, so a point-mass distribution of
/// thresholds is expressed as `PointMass` and mixtures as `Sum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    PointMass {
        t_star: f64,
        #[serde(default = "one")]
        mass: f64,
    },
    Uniform {
        #[serde(default = "one")]
        level: f64,
    },
    /// `scale · t(1-t)`
    Parabola {
        #[serde(default = "one")]
        scale: f64,
    },
    /// Gaussian density with the given mean and sd, set to zero outside
    /// `[lower, upper]` (not renormalized).
    TruncatedGaussian {
        mean: f64,
        sd: f64,
        lower: f64,
        upper: f64,
    },
    /// Log-normal density parameterized by the mean and sd of the variable
    /// itself.
    LogNormalDensity { variable_mean: f64, variable_sd: f64 },
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    /// `p(t) · harmonic(tp_benefit(t), fp_harm(t))`, with `p ≡ 1` when no
    /// density is given.
    HarmonicUtilities {
        tp_benefit: TabulatedCurve,
        fp_harm: TabulatedCurve,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density: Option<Box<WeightSpec>>,
    },
    /// `p(t) · t`: threshold density with constant true-positive benefit.
    ThresholdDensityConstantTpBenefit { density: Box<WeightSpec> },
    /// `p(t) · (1-t)`: threshold density with constant false-positive harm.
    ThresholdDensityConstantFpHarm { density: Box<WeightSpec> },
    Scaled { factor: f64, spec: Box<WeightSpec> },
    Sum { parts: Vec<WeightSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub mass: f64,
}

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * SQRT_2PI)
}

/// Underlying normal (mu, sigma) of a log-normal with the given mean and sd.
pub fn lognormal_parameters(mean: f64, sd: f64) -> (f64, f64) {
    let sigma2 = (1.0 + (sd / mean).powi(2)).ln();
    (mean.ln() - sigma2 / 2.0, sigma2.sqrt())
}

fn lognormal_pdf(t: f64, mean: f64, sd: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let (mu, sigma) = lognormal_parameters(mean, sd);
    let z = (t.ln() - mu) / sigma;
    (-0.5 * z * z - t.ln()).exp() / (sigma * SQRT_2PI)
}

impl WeightSpec {
    pub fn harmonic_from_utilities(
        a: &TabulatedCurve,
        b: &TabulatedCurve,
        c: &TabulatedCurve,
        d: &TabulatedCurve,
        density: Option<WeightSpec>,
    ) -> Result<Self> {
        let mut grid: Vec<f64> = [a, b, c, d]
            .iter()
            .flat_map(|curve| curve.grid.iter().copied())
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let tp = grid.iter().map(|&t| a.eval(t) - c.eval(t)).collect();
        let fp = grid.iter().map(|&t| d.eval(t) - b.eval(t)).collect();
        let spec = WeightSpec::HarmonicUtilities {
            tp_benefit: TabulatedCurve::new(grid.clone(), tp)?,
            fp_harm: TabulatedCurve::new(grid, fp)?,
            density: density.map(Box::new),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidWeightSpec(msg));
        match self {
            WeightSpec::PointMass { t_star, mass } => {
                if !(*t_star > 0.0 && *t_star < 1.0) {
                    return bad(format!("point mass location {t_star} outside (0, 1)"));
                }
                if !(*mass > 0.0) || !mass.is_finite() {
                    return bad(format!("point mass {mass} must be positive"));
                }
            }
            WeightSpec::Uniform { level } => {
                if !(*level > 0.0) || !level.is_finite() {
                    return bad(format!("uniform level {level} must be positive"));
                }
            }
            WeightSpec::Parabola { scale } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return bad(format!("parabola scale {scale} must be positive"));
                }
            }
            WeightSpec::TruncatedGaussian {
                mean,
                sd,
                lower,
                upper,
            } => {
                if !mean.is_finite() || !(*sd > 0.0) || !sd.is_finite() {
                    return bad("gaussian needs finite mean and positive sd".to_string());
                }
                if !(*lower >= 0.0 && lower < upper && *upper <= 1.0) {
                    return bad(format!(
                        "gaussian truncation [{lower}, {upper}] must satisfy 0 <= lower < upper <= 1"
                    ));
                }
            }
            WeightSpec::LogNormalDensity {
                variable_mean,
                variable_sd,
            } => {
                if !(*variable_mean > 0.0) || !(*variable_sd > 0.0) {
                    return bad("log-normal mean and sd must be positive".into());
                }
            }
            WeightSpec::Tabulated { grid, values } => {
                TabulatedCurve {
                    grid: grid.clone(),
                    values: values.clone(),
                }
                .validate_nonnegative("tabulated weight values")?;
            }
            WeightSpec::HarmonicUtilities {
                tp_benefit,
                fp_harm,
                density,
            } => {
                tp_benefit.validate_nonnegative("true-positive benefit a - c")?;
                fp_harm.validate_nonnegative("false-positive harm d - b")?;
                if let Some(p) = density {
                    p.validate()?;
                }
            }
            WeightSpec::ThresholdDensityConstantTpBenefit { density }
            | WeightSpec::ThresholdDensityConstantFpHarm { density } => density.validate()?,
            WeightSpec::Scaled { factor, spec } => {
                if !(*factor > 0.0) || !factor.is_finite() {
                    return bad(format!("scale factor {factor} must be positive"));
                }
                spec.validate()?;
            }
            WeightSpec::Sum { parts } => {
                if parts.is_empty() {
                    return bad("sum of weights needs at least one part".into());
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Point masses of ω (location, mass).
    pub fn atoms(&self) -> Vec<Atom> {
        let mapped = |p: &WeightSpec, m: &dyn Fn(f64) -> f64| {
            p.atoms()
                .into_iter()
                .map(|a| Atom {
                    t: a.t,
                    mass: a.mass * m(a.t),
                })
                .filter(|a| a.mass > 0.0)
                .collect::<Vec<_>>()
        };
        match self {
            WeightSpec::PointMass { t_star, mass } => vec![Atom {
                t: *t_star,
                mass: *mass,
            }],
            WeightSpec::HarmonicUtilities {
                tp_benefit,
                fp_harm,
                density: Some(p),
            } => mapped(p, &|t| harmonic(tp_benefit.eval(t), fp_harm.eval(t))),
            WeightSpec::ThresholdDensityConstantTpBenefit { density } => mapped(density, &|t| t),
            WeightSpec::ThresholdDensityConstantFpHarm { density } => {
                mapped(density, &|t| 1.0 - t)
            }
            WeightSpec::Scaled { factor, spec } => mapped(spec, &|_| *factor),
            WeightSpec::Sum { parts } => parts.iter().flat_map(|p| p.atoms()).collect(),
            _ => Vec::new(),
        }
    }

    /// Whether ω has a (not identically zero) continuous part.
    pub fn has_density(&self) -> bool {
        match self {
            WeightSpec::PointMass { .. } => false,
            WeightSpec::HarmonicUtilities {
                density: Some(p), ..
            }
            | WeightSpec::ThresholdDensityConstantTpBenefit { density: p }
            | WeightSpec::ThresholdDensityConstantFpHarm { density: p }
            | WeightSpec::Scaled { spec: p, .. } => p.has_density(),
            WeightSpec::Sum { parts } => parts.iter().any(WeightSpec::has_density),
            _ => true,
        }
    }

    /// Continuous part of ω at `t`, excluding point masses.
    pub fn density(&self, t: f64) -> f64 {
        match self {
            WeightSpec::PointMass { .. } => 0.0,
            WeightSpec::Uniform { level } => *level,
            WeightSpec::Parabola { scale } => scale * t * (1.0 - t),
            WeightSpec::TruncatedGaussian {
                mean,
                sd,
                lower,
                upper,
            } => {
                if t >= *lower && t <= *upper {
                    normal_pdf(t, *mean, *sd)
                } else {
                    0.0
                }
            }
            WeightSpec::LogNormalDensity {
                variable_mean,
                variable_sd,
            } => lognormal_pdf(t, *variable_mean, *variable_sd),
            WeightSpec::Tabulated { grid, values } => TabulatedCurve {
                grid: grid.clone(),
                values: values.clone(),
            }
            .eval(t),
            WeightSpec::HarmonicUtilities {
                tp_benefit,
                fp_harm,
                density,
            } => {
                let h = harmonic(tp_benefit.eval(t), fp_harm.eval(t));
                match density {
                    Some(p) => h * p.density(t),
                    None => h,
                }
            }
            WeightSpec::ThresholdDensityConstantTpBenefit { density } => density.density(t) * t,
            WeightSpec::ThresholdDensityConstantFpHarm { density } => {
                density.density(t) * (1.0 - t)
            }
            WeightSpec::Scaled { factor, spec } => factor * spec.density(t),
            WeightSpec::Sum { parts } => parts.iter().map(|p| p.density(t)).sum(),
        }
    }

    /// Points in (0, 1) where the continuous part may have a kink or jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match self {
            WeightSpec::TruncatedGaussian { lower, upper, .. } => vec![*lower, *upper],
            WeightSpec::Tabulated { grid, .. } => grid.clone(),
            WeightSpec::HarmonicUtilities {
                tp_benefit,
                fp_harm,
                density,
            } => {
                let mut v = tp_benefit.grid.clone();
                v.extend(&fp_harm.grid);
                if let Some(p) = density {
                    v.extend(p.breakpoints());
                }
                v
            }
            WeightSpec::ThresholdDensityConstantTpBenefit { density }
            | WeightSpec::ThresholdDensityConstantFpHarm { density }
            | WeightSpec::Scaled { spec: density, .. } => density.breakpoints(),
            WeightSpec::Sum { parts } => parts.iter().flat_map(|p| p.breakpoints()).collect(),
            _ => Vec::new(),
        };
        out.retain(|&t| t > 0.0 && t < 1.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Whether the continuous part has a positive limit at 0⁺ and at 1⁻.
    /// A positive limit at 0 makes W1 diverge there; at 1, W0.
    pub fn positive_at_edges(&self) -> (bool, bool) {
        match self {
            WeightSpec::PointMass { .. } | WeightSpec::Parabola { .. } => (false, false),
            WeightSpec::Uniform { .. } => (true, true),
            WeightSpec::TruncatedGaussian { lower, upper, .. } => (*lower <= 0.0, *upper >= 1.0),
            // the density is positive (if tiny) at t = 1
            WeightSpec::LogNormalDensity { .. } => (false, true),
            WeightSpec::Tabulated { values, .. } => {
                (values[0] > 0.0, values[values.len() - 1] > 0.0)
            }
            WeightSpec::HarmonicUtilities {
                tp_benefit,
                fp_harm,
                density,
            } => {
                let h0 = harmonic(tp_benefit.left_limit(), fp_harm.left_limit()) > 0.0;
                let h1 = harmonic(tp_benefit.right_limit(), fp_harm.right_limit()) > 0.0;
                match density {
                    Some(p) => {
                        let (p0, p1) = p.positive_at_edges();
                        (h0 && p0, h1 && p1)
                    }
                    None => (h0, h1),
                }
            }
            WeightSpec::ThresholdDensityConstantTpBenefit { density } => {
                (false, density.positive_at_edges().1)
            }
            WeightSpec::ThresholdDensityConstantFpHarm { density } => {
                (density.positive_at_edges().0, false)
            }
            WeightSpec::Scaled { spec, .. } => spec.positive_at_edges(),
            WeightSpec::Sum { parts } => parts.iter().fold((false, false), |acc, p| {
                let e = p.positive_at_edges();
                (acc.0 || e.0, acc.1 || e.1)
            }),
        }
    }

    /// ω multiplied by `factor`, folding the factor into parameters where
    /// the variant has one.
    pub fn scaled(&self, factor: f64) -> WeightSpec {
        if factor == 1.0 {
            return self.clone();
        }
        match self {
            WeightSpec::PointMass { t_star, mass } => WeightSpec::PointMass {
                t_star: *t_star,
                mass: mass * factor,
            },
            WeightSpec::Uniform { level } => WeightSpec::Uniform {
                level: level * factor,
            },
            WeightSpec::Parabola { scale } => WeightSpec::Parabola {
                scale: scale * factor,
            },
            WeightSpec::Tabulated { grid, values } => WeightSpec::Tabulated {
                grid: grid.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
            WeightSpec::Scaled { factor: f, spec } => WeightSpec::Scaled {
                factor: f * factor,
                spec: spec.clone(),
            },
            WeightSpec::Sum { parts } => WeightSpec::Sum {
                parts: parts.iter().map(|p| p.scaled(factor)).collect(),
            },
            other => WeightSpec::Scaled {
                factor,
                spec: Box::new(other.clone()),
            },
        }
    }

    /// Total mass ∫ω over (0, 1) plus point masses.
    pub fn total_mass(&self, cfg: &QuadConfig) -> Result<f64> {
        let mut acc: CompensatedSum = self.atoms().iter().map(|a| a.mass).collect();
        if self.has_density() {
            let f = |t: f64| self.density(t);
            acc.add(integrate(&f, 0.0, 1.0, &self.breakpoints(), cfg)?);
        }
        Ok(acc.value())
    }

    /// Errors unless the spec is a probability density on (0, 1).
    pub fn check_density(&self, cfg: &QuadConfig) -> Result<()> {
        const TOL: f64 = 1e-6;
        self.validate()?;
        let mass = self.total_mass(cfg)?;
        if (mass - 1.0).abs() > TOL {
            return Err(Error::NotADensity {
                mass,
                tolerance: TOL,
            });
        }
        Ok(())
    }
}

/// Pointwise ω(t). Specs containing point masses have no density.
pub fn weight_value(spec: &WeightSpec, t: f64) -> Result<f64> {
    check_threshold(t)?;
    spec.validate()?;
    if !spec.atoms().is_empty() {
        return Err(Error::NoDensity);
    }
    Ok(spec.density(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CumulativeMethod {
    ClosedForm,
    Quadrature,
}

/// ω = alpha + beta·t on [lo, hi].
#[derive(Debug, Clone, Copy)]
struct LinearPiece {
    lo: f64,
    hi: f64,
    alpha: f64,
    beta: f64,
}

impl LinearPiece {
    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// ∫ (alpha/t + beta) dt from y to x, both clamped to the piece.
    fn w1_between(&self, y: f64, x: f64) -> f64 {
        let (cy, cx) = (self.clamp(y), self.clamp(x));
        if cx == cy {
            return 0.0;
        }
        let log_part = if self.alpha == 0.0 {
            0.0
        } else {
            self.alpha * (cx / cy).ln()
        };
        log_part + self.beta * (cx - cy)
    }

    /// ∫ (alpha + beta t)/(1-t) dt from y to x, both clamped to the piece.
    fn w0_between(&self, y: f64, x: f64) -> f64 {
        let (cy, cx) = (self.clamp(y), self.clamp(x));
        if cx == cy {
            return 0.0;
        }
        let k = self.alpha + self.beta;
        let log_part = if k == 0.0 {
            0.0
        } else {
            k * ((1.0 - cy) / (1.0 - cx)).ln()
        };
        log_part - self.beta * (cx - cy)
    }
}

/// Cumulative integrals of a generic continuous part, tabulated at nodes and
/// refined locally on lookup.
#[derive(Debug, Clone)]
struct QuadTable {
    spec: WeightSpec,
    nodes: Vec<f64>,
    /// ∫ ω/t from `nodes[anchor1]`; `-inf` entries where divergent.
    c1: Vec<f64>,
    /// ∫ ω/(1-t) from `nodes[0]`; `+inf` entries where divergent.
    c0: Vec<f64>,
    cfg: QuadConfig,
}

const TABLE_GRID: usize = 64;

fn nudge(t: f64) -> f64 {
    t.clamp(1e-300, 1.0 - f64::EPSILON / 2.0)
}

/// ∫ ω/(1-t) over [a, b] inside one table segment. Above 1/2 the integral
/// is taken in s = 1 - t, where `1 - t` is exact.
fn w0_piece(spec: &WeightSpec, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    if a >= 0.5 && b - a <= f64::EPSILON {
        // below the resolution of t: one midpoint evaluation
        let mid = a + 0.5 * (b - a);
        return Ok((b - a) * spec.density(mid) / (1.0 - mid));
    }
    if a >= 0.5 {
        // keep t strictly inside (a, b) so jumps at the ends stay one-sided
        let (ta, tb) = (a.next_up(), b.next_down().max(a.next_up()));
        let g = |s: f64| {
            let s = s.max(1e-300);
            spec.density((1.0 - s).clamp(ta, tb)) / s
        };
        simpson(&g, 1.0 - b, 1.0 - a, cfg)
    } else {
        let g = |t: f64| {
            let t = nudge(t);
            spec.density(t) / (1.0 - t)
        };
        simpson(&g, a, b, cfg)
    }
}

impl QuadTable {
    fn build(
        spec: WeightSpec,
        lo: f64,
        hi: f64,
        diverge0: bool,
        diverge1: bool,
        cfg: QuadConfig,
    ) -> Result<Self> {
        let mut marks = spec.breakpoints();
        marks.extend((1..TABLE_GRID).map(|i| i as f64 / TABLE_GRID as f64));
        let nodes = piece_boundaries(lo, hi, &marks);
        let m = nodes.len();
        let g1 = |t: f64| {
            let t = nudge(t);
            spec.density(t) / t
        };

        let mut seg1 = vec![0.0; m];
        let mut seg0 = vec![0.0; m];
        for k in 1..m {
            let (a, b) = (nodes[k - 1], nodes[k]);
            seg1[k] = if k == 1 && diverge0 {
                f64::INFINITY
            } else {
                simpson(&g1, a, b, &cfg)?
            };
            seg0[k] = if k == m - 1 && diverge1 {
                f64::INFINITY
            } else {
                w0_piece(&spec, a, b, &cfg)?
            };
        }

        let anchor1 = if diverge0 {
            nodes.partition_point(|&x| x < 0.5).min(m - 1)
        } else {
            0
        };
        let mut c1 = vec![0.0; m];
        let mut acc = CompensatedSum::new();
        for k in anchor1 + 1..m {
            acc.add(seg1[k]);
            c1[k] = acc.value();
        }
        let mut acc = CompensatedSum::new();
        for k in (0..anchor1).rev() {
            acc.add(seg1[k + 1]);
            c1[k] = -acc.value();
        }
        let mut c0 = vec![0.0; m];
        let mut acc = CompensatedSum::new();
        for k in 1..m {
            acc.add(seg0[k]);
            c0[k] = acc.value();
        }
        Ok(Self {
            spec,
            nodes,
            c1,
            c0,
            cfg,
        })
    }

    fn locate(&self, x: f64) -> usize {
        // index k with nodes[k] <= x < nodes[k+1], clamped to valid segments
        let k = self.nodes.partition_point(|&n| n <= x);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }

    fn integrate_local<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<f64> {
        integrate(f, a, b, &[], &self.cfg)
    }

    /// ∫ ω/t from the anchor node to x (x clamped to the table range).
    fn v1(&self, x: f64) -> Result<f64> {
        let x = x.clamp(self.nodes[0], self.nodes[self.nodes.len() - 1]);
        let spec = &self.spec;
        let g1 = |t: f64| {
            let t = nudge(t);
            spec.density(t) / t
        };
        let k = self.locate(x);
        if x == self.nodes[k] {
            return Ok(self.c1[k]);
        }
        if self.c1[k].is_finite() {
            Ok(self.c1[k] + self.integrate_local(&g1, self.nodes[k], x)?)
        } else {
            Ok(self.c1[k + 1] - self.integrate_local(&g1, x, self.nodes[k + 1])?)
        }
    }

    /// ∫ ω/(1-t) from the first node to x (x clamped to the table range).
    fn v0(&self, x: f64) -> Result<f64> {
        let x = x.clamp(self.nodes[0], self.nodes[self.nodes.len() - 1]);
        let k = self.locate(x);
        if x == self.nodes[k] {
            return Ok(self.c0[k]);
        }
        if x == self.nodes[k + 1] {
            return Ok(self.c0[k + 1]);
        }
        Ok(self.c0[k] + w0_piece(&self.spec, self.nodes[k], x, &self.cfg)?)
    }
}

/// Evaluable W1 and W0 for a weight spec.
#[derive(Debug, Clone)]
pub struct CumulativeWeights {
    domain: (f64, f64),
    atoms: Vec<Atom>,
    linear: Vec<LinearPiece>,
    parabola: f64,
    table: Option<QuadTable>,
    w1_divergent_at_zero: bool,
    w0_divergent_at_one: bool,
    method: CumulativeMethod,
    cfg: QuadConfig,
}

#[derive(Default)]
struct Decomposition {
    atoms: Vec<Atom>,
    linear: Vec<(f64, f64, f64, f64)>,
    parabola: f64,
    generic: Vec<WeightSpec>,
}

fn decompose(spec: &WeightSpec, factor: f64, out: &mut Decomposition) {
    match spec {
        WeightSpec::PointMass { t_star, mass } => out.atoms.push(Atom {
            t: *t_star,
            mass: mass * factor,
        }),
        WeightSpec::Uniform { level } => out.linear.push((0.0, 1.0, level * factor, 0.0)),
        WeightSpec::Parabola { scale } => out.parabola += scale * factor,
        WeightSpec::Tabulated { grid, values } => {
            let n = grid.len();
            out.linear.push((0.0, grid[0], values[0] * factor, 0.0));
            for j in 1..n {
                let (x0, x1) = (grid[j - 1], grid[j]);
                let slope = (values[j] - values[j - 1]) / (x1 - x0);
                let intercept = values[j - 1] - slope * x0;
                out.linear
                    .push((x0, x1, intercept * factor, slope * factor));
            }
            out.linear
                .push((grid[n - 1], 1.0, values[n - 1] * factor, 0.0));
        }
        WeightSpec::Scaled { factor: f, spec } => decompose(spec, factor * f, out),
        WeightSpec::Sum { parts } => {
            for p in parts {
                decompose(p, factor, out);
            }
        }
        other => {
            out.atoms
                .extend(other.atoms().into_iter().map(|a| Atom {
                    t: a.t,
                    mass: a.mass * factor,
                }));
            if other.has_density() {
                out.generic.push(other.scaled(factor));
            }
        }
    }
}

impl CumulativeWeights {
    /// Builds W1/W0 without insisting that W1 converges at 0. Use
    /// [`cumulative`] unless only differences `W(x) - W(y)` are needed.
    pub fn build(spec: &WeightSpec, cfg: &QuadConfig) -> Result<Self> {
        spec.validate()?;
        cfg.validate()?;
        let (lo, hi) = cfg.domain();
        let mut parts = Decomposition::default();
        decompose(spec, 1.0, &mut parts);

        let mut w1_div = false;
        let mut w0_div = false;
        let linear: Vec<LinearPiece> = parts
            .linear
            .iter()
            .filter_map(|&(a, b, alpha, beta)| {
                let (a, b) = (a.max(lo), b.min(hi));
                (a < b).then_some(LinearPiece {
                    lo: a,
                    hi: b,
                    alpha,
                    beta,
                })
            })
            .collect();
        for p in &linear {
            if p.lo == 0.0 && p.alpha > 0.0 {
                w1_div = true;
            }
            if p.hi == 1.0 && p.alpha + p.beta > 0.0 {
                w0_div = true;
            }
        }

        let table = if parts.generic.is_empty() {
            None
        } else {
            let generic = if parts.generic.len() == 1 {
                parts.generic.pop().unwrap()
            } else {
                WeightSpec::Sum {
                    parts: parts.generic,
                }
            };
            let (e0, e1) = generic.positive_at_edges();
            let d0 = e0 && lo == 0.0;
            let d1 = e1 && hi == 1.0;
            w1_div |= d0;
            w0_div |= d1;
            Some(QuadTable::build(generic, lo, hi, d0, d1, *cfg)?)
        };
        let method = if table.is_some() {
            CumulativeMethod::Quadrature
        } else {
            CumulativeMethod::ClosedForm
        };
        Ok(Self {
            domain: (lo, hi),
            atoms: parts.atoms,
            linear,
            parabola: parts.parabola,
            table,
            w1_divergent_at_zero: w1_div,
            w0_divergent_at_one: w0_div,
            method,
            cfg: *cfg,
        })
    }

    pub fn method(&self) -> CumulativeMethod {
        self.method
    }

    pub fn tolerance(&self) -> f64 {
        self.cfg.rel_tol
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn w1_converges(&self) -> bool {
        !self.w1_divergent_at_zero
    }

    pub fn w0_converges(&self) -> bool {
        !self.w0_divergent_at_one
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.domain.0, self.domain.1)
    }

    /// Continuous part of ∫ ω/t from y to x.
    pub(crate) fn continuous_w1_between(&self, y: f64, x: f64) -> Result<f64> {
        let (cy, cx) = (self.clamp(y), self.clamp(x));
        if cx == cy {
            return Ok(0.0);
        }
        if self.w1_divergent_at_zero && (cx == 0.0 || cy == 0.0) {
            return Err(Error::Divergent {
                quantity: "W1",
                endpoint: Endpoint::Zero,
            });
        }
        let mut acc = CompensatedSum::new();
        for p in &self.linear {
            acc.add(p.w1_between(cy, cx));
        }
        if self.parabola != 0.0 {
            let anti = |t: f64| t - t * t / 2.0;
            acc.add(self.parabola * (anti(cx) - anti(cy)));
        }
        if let Some(table) = &self.table {
            acc.add(table.v1(cx)? - table.v1(cy)?);
        }
        Ok(acc.value())
    }

    /// Continuous part of ∫ ω/(1-t) from y to x.
    pub(crate) fn continuous_w0_between(&self, y: f64, x: f64) -> Result<f64> {
        let (cy, cx) = (self.clamp(y), self.clamp(x));
        if cx == cy {
            return Ok(0.0);
        }
        if self.w0_divergent_at_one && (cx == 1.0 || cy == 1.0) {
            return Err(Error::Divergent {
                quantity: "W0",
                endpoint: Endpoint::One,
            });
        }
        let mut acc = CompensatedSum::new();
        for p in &self.linear {
            acc.add(p.w0_between(cy, cx));
        }
        if self.parabola != 0.0 {
            acc.add(self.parabola * (cx * cx - cy * cy) / 2.0);
        }
        if let Some(table) = &self.table {
            acc.add(table.v0(cx)? - table.v0(cy)?);
        }
        Ok(acc.value())
    }

    fn atom_jump(&self, y: f64, x: f64, f: impl Fn(&Atom) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for a in &self.atoms {
            let above_x = (x > a.t) as i32;
            let above_y = (y > a.t) as i32;
            let d = above_x - above_y;
            if d != 0 {
                acc.add(d as f64 * f(a));
            }
        }
        acc.value()
    }

    /// ∫ ω(t)/t over (y, x], point masses included when strictly below x.
    /// Finite for interior arguments even when W1 itself diverges.
    pub fn w1_between(&self, y: f64, x: f64) -> Result<f64> {
        Ok(self.continuous_w1_between(y, x)? + self.atom_jump(y, x, |a| a.mass / a.t))
    }

    pub fn w0_between(&self, y: f64, x: f64) -> Result<f64> {
        Ok(self.continuous_w0_between(y, x)? + self.atom_jump(y, x, |a| a.mass / (1.0 - a.t)))
    }

    pub fn w1(&self, x: f64) -> Result<f64> {
        if self.w1_divergent_at_zero && self.clamp(x) > 0.0 {
            return Err(Error::Divergent {
                quantity: "W1",
                endpoint: Endpoint::Zero,
            });
        }
        self.w1_between(0.0, x)
    }

    pub fn w0(&self, x: f64) -> Result<f64> {
        self.w0_between(0.0, x)
    }

    /// W1(1): the normalizing constant.
    pub fn total_w1(&self) -> Result<f64> {
        self.w1(1.0)
    }
}

/// W1/W0 for `spec`; errors if W1 diverges at 0 (as it does for any weight
/// with ω(0⁺) > 0 unless `cfg.epsilon` is set).
pub fn cumulative(spec: &WeightSpec, cfg: &QuadConfig) -> Result<CumulativeWeights> {
    let cw = CumulativeWeights::build(spec, cfg)?;
    if !cw.w1_converges() {
        return Err(Error::Divergent {
            quantity: "W1",
            endpoint: Endpoint::Zero,
        });
    }
    Ok(cw)
}

/// Scales `spec` so that ∫ ω(t)/t dt = 1.
pub fn normalize(spec: &WeightSpec, cfg: &QuadConfig) -> Result<WeightSpec> {
    let total = cumulative(spec, cfg)?.total_w1()?;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidWeightSpec(format!(
            "cannot normalize: integral of w(t)/t is {total}"
        )));
    }
    Ok(spec.scaled(1.0 / total))
}

/// The weights of the two cardiovascular examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamplePresets {
    /// Lifestyle management: Gaussian(0.10, 0.02) kept below 10%.
    pub lifestyle: WeightSpec,
    /// Statins: point mass at 10%.
    pub statins: WeightSpec,
    /// Single treatment with log-normal thresholds (mean 10%, sd 3%) and
    /// constant false-positive harm.
    pub threshold_density: WeightSpec,
}

pub const EXAMPLE_THRESHOLD: f64 = 0.10;

/// Example presets, normalized unless `normalized` is false. The lifestyle
/// weight is positive at t = 0, so normalizing it needs `cfg.epsilon`.
pub fn example_weights(normalized: bool, cfg: &QuadConfig) -> Result<ExamplePresets> {
    let raw = ExamplePresets {
        lifestyle: WeightSpec::TruncatedGaussian {
            mean: 0.10,
            sd: 0.02,
            lower: 0.0,
            upper: 0.10,
        },
        statins: WeightSpec::PointMass {
            t_star: EXAMPLE_THRESHOLD,
            mass: 1.0,
        },
        threshold_density: WeightSpec::ThresholdDensityConstantFpHarm {
            density: Box::new(WeightSpec::LogNormalDensity {
                variable_mean: 0.10,
                variable_sd: 0.03,
            }),
        },
    };
    if !normalized {
        return Ok(raw);
    }
    Ok(ExamplePresets {
        lifestyle: normalize(&raw.lifestyle, cfg)?,
        statins: normalize(&raw.statins, cfg)?,
        threshold_density: normalize(&raw.threshold_density, cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    /// Midpoint Riemann sum with `panels` panels over [lo, hi].
    fn riemann<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
        let h = (hi - lo) / panels as f64;
        (0..panels)
            .map(|i| f(lo + (i as f64 + 0.5) * h))
            .collect::<CompensatedSum>()
            .value()
            * h
    }

    #[test]
    fn pointwise_values() {
        assert_eq!(weight_value(&WeightSpec::Parabola { scale: 1.0 }, 0.5).unwrap(), 0.25);
        assert_eq!(weight_value(&WeightSpec::Uniform { level: 1.0 }, 0.37).unwrap(), 1.0);
        let fp = WeightSpec::ThresholdDensityConstantFpHarm {
            density: Box::new(WeightSpec::Uniform { level: 1.0 }),
        };
        assert!((weight_value(&fp, 0.3).unwrap() - 0.7).abs() < 1e-15);
        let pm = WeightSpec::PointMass {
            t_star: 0.2,
            mass: 1.0,
        };
        assert!(matches!(weight_value(&pm, 0.2), Err(Error::NoDensity)));
        assert!(weight_value(&WeightSpec::Uniform { level: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn harmonic_weight_examples() {
        assert_eq!(harmonic_weight(2.0, 2.0).unwrap(), 1.0);
        assert!((harmonic_weight(10.0, 0.5).unwrap() - 1.0 / 2.1).abs() < 1e-15);
        assert!((harmonic_weight(10.0, 0.5).unwrap() - 0.476190).abs() < 1e-6);
        assert!((harmonic_weight(15.0, 1.0).unwrap() - 0.9375).abs() < 1e-15);
        assert!(harmonic_weight(0.0, 1.0).is_err());
        assert!(harmonic_weight(1.0, -2.0).is_err());
    }

    #[test]
    fn harmonic_weight_surface_properties() {
        let axis: Vec<f64> = (1..=30).map(|i| i as f64 * 0.5).collect();
        for &a in &axis {
            for &b in &axis {
                let w = harmonic_weight(a, b).unwrap();
                assert_eq!(w, harmonic_weight(b, a).unwrap());
                assert!(w <= a.min(b));
                assert!(harmonic_weight(a + 0.5, b).unwrap() >= w);
                assert!(harmonic_weight(a, b + 0.5).unwrap() >= w);
            }
        }
    }

    #[test]
    fn parabola_closed_form() {
        let cw = cumulative(&WeightSpec::Parabola { scale: 1.0 }, &cfg()).unwrap();
        assert_eq!(cw.method(), CumulativeMethod::ClosedForm);
        assert_eq!(cw.w1(1.0).unwrap(), 0.5);
        assert_eq!(cw.w0(1.0).unwrap(), 0.5);
        assert_eq!(cw.w1(0.0).unwrap(), 0.0);
        assert!((cw.w1(0.3).unwrap() - (0.3 - 0.045)).abs() < 1e-16);
    }

    #[test]
    fn point_mass_closed_form() {
        let cw = cumulative(
            &WeightSpec::PointMass {
                t_star: 0.1,
                mass: 1.0,
            },
            &cfg(),
        )
        .unwrap();
        assert_eq!(cw.w1(0.2).unwrap(), 10.0);
        assert_eq!(cw.w1(0.1).unwrap(), 0.0);
        assert_eq!(cw.w0(0.2).unwrap(), 1.0 / 0.9);
        assert_eq!(cw.w1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn uniform_diverges_without_epsilon() {
        let err = cumulative(&WeightSpec::Uniform { level: 1.0 }, &cfg()).unwrap_err();
        assert!(matches!(
            err,
            Error::Divergent {
                endpoint: Endpoint::Zero,
                ..
            }
        ));
        let cw = cumulative(&WeightSpec::Uniform { level: 1.0 }, &cfg().with_epsilon(1e-6))
            .unwrap();
        assert!((cw.w1(0.5).unwrap() - (0.5f64 / 1e-6).ln()).abs() < 1e-12);
        // differences stay finite without a cutoff
        let cw = CumulativeWeights::build(&WeightSpec::Uniform { level: 1.0 }, &cfg()).unwrap();
        assert!((cw.w1_between(0.2, 0.4).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn w0_divergence_is_reported_only_at_one() {
        let spec = WeightSpec::ThresholdDensityConstantTpBenefit {
            density: Box::new(WeightSpec::Uniform { level: 1.0 }),
        };
        let cw = cumulative(&spec, &cfg()).unwrap();
        let x: f64 = 0.2;
        assert!((cw.w0(x).unwrap() - (-x - (1.0 - x).ln())).abs() < 1e-10);
        assert!(matches!(
            cw.w0(1.0),
            Err(Error::Divergent {
                endpoint: Endpoint::One,
                ..
            })
        ));
    }

    #[test]
    fn closed_forms_match_riemann_sums() {
        let specs = [
            WeightSpec::Parabola { scale: 1.7 },
            WeightSpec::Tabulated {
                grid: vec![0.2, 0.5, 0.8],
                values: vec![0.0, 1.0, 0.0],
            },
            WeightSpec::Sum {
                parts: vec![
                    WeightSpec::Parabola { scale: 1.0 },
                    WeightSpec::Tabulated {
                        grid: vec![0.1, 0.4],
                        values: vec![0.0, 2.0],
                    },
                ],
            },
        ];
        for spec in specs {
            let cw = cumulative(&spec, &cfg()).unwrap();
            assert_eq!(cw.method(), CumulativeMethod::ClosedForm);
            for x in [0.15, 0.5, 0.93] {
                let r1 = riemann(|t| spec.density(t) / t, 0.0, x, 1_000_000);
                let r0 = riemann(|t| spec.density(t) / (1.0 - t), 0.0, x, 1_000_000);
                assert!((cw.w1(x).unwrap() - r1).abs() < 1e-6, "{spec:?} W1({x})");
                assert!((cw.w0(x).unwrap() - r0).abs() < 1e-6, "{spec:?} W0({x})");
            }
        }
    }

    #[test]
    fn quadrature_matches_riemann_sums() {
        let spec = WeightSpec::TruncatedGaussian {
            mean: 0.3,
            sd: 0.1,
            lower: 0.1,
            upper: 0.6,
        };
        let cw = cumulative(&spec, &cfg()).unwrap();
        assert_eq!(cw.method(), CumulativeMethod::Quadrature);
        for x in [0.05, 0.2, 0.45, 0.99] {
            let r1 = riemann(|t| spec.density(t) / t, 0.0, x, 1_000_000);
            let r0 = riemann(|t| spec.density(t) / (1.0 - t), 0.0, x, 1_000_000);
            assert!((cw.w1(x).unwrap() - r1).abs() < 1e-6);
            assert!((cw.w0(x).unwrap() - r0).abs() < 1e-6);
        }
    }

    #[test]
    fn normalization() {
        let n = normalize(&WeightSpec::Parabola { scale: 1.0 }, &cfg()).unwrap();
        assert_eq!(n, WeightSpec::Parabola { scale: 2.0 });
        let n = normalize(
            &WeightSpec::PointMass {
                t_star: 0.25,
                mass: 1.0,
            },
            &cfg(),
        )
        .unwrap();
        assert_eq!(
            n,
            WeightSpec::PointMass {
                t_star: 0.25,
                mass: 0.25
            }
        );
        assert_eq!(normalize(&n, &cfg()).unwrap(), n);
        assert!(normalize(&WeightSpec::Uniform { level: 1.0 }, &cfg()).is_err());
    }

    #[test]
    fn normalized_generic_spec_has_unit_w1() {
        let spec = WeightSpec::TruncatedGaussian {
            mean: 0.1,
            sd: 0.02,
            lower: 0.0,
            upper: 0.1,
        };
        let c = cfg().with_epsilon(1e-6);
        let n = normalize(&spec, &c).unwrap();
        let total = cumulative(&n, &c).unwrap().total_w1().unwrap();
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn presets() {
        let c = cfg().with_epsilon(1e-6);
        let raw = example_weights(false, &c).unwrap();
        assert_eq!(raw.lifestyle.density(0.12), 0.0);
        assert!(raw.lifestyle.density(0.09) > 0.0);
        if let WeightSpec::ThresholdDensityConstantFpHarm { density } = &raw.threshold_density {
            let mass = density.total_mass(&cfg()).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "log-normal mass {mass}");
        } else {
            panic!("unexpected preset shape");
        }
        let normalized = example_weights(true, &c).unwrap();
        match normalized.statins {
            WeightSpec::PointMass { t_star, mass } => {
                assert_eq!(t_star, 0.1);
                assert!((mass - 0.1).abs() < 1e-16);
            }
            other => panic!("unexpected {other:?}"),
        }
        // the lifestyle weight is positive at 0 and needs a cutoff
        assert!(example_weights(true, &cfg()).is_err());
    }

    #[test]
    fn lognormal_moment_inversion() {
        let (mu, sigma) = lognormal_parameters(0.10, 0.03);
        let mean = (mu + sigma * sigma / 2.0).exp();
        let var = ((sigma * sigma).exp() - 1.0) * (2.0 * mu + sigma * sigma).exp();
        assert!((mean - 0.10).abs() < 1e-15);
        assert!((var.sqrt() - 0.03).abs() < 1e-15);
    }

    #[test]
    fn json_schema_round_trip_and_unknown_keys() {
        let spec: WeightSpec = serde_json::from_str(r#"{"type":"parabola"}"#).unwrap();
        assert_eq!(spec, WeightSpec::Parabola { scale: 1.0 });
        let nested: WeightSpec = serde_json::from_str(
            r#"{"type":"threshold_density_constant_fp_harm",
                "density":{"type":"log_normal_density","variable_mean":0.1,"variable_sd":0.03}}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&nested).unwrap();
        assert_eq!(serde_json::from_str::<WeightSpec>(&text).unwrap(), nested);
        assert!(serde_json::from_str::<WeightSpec>(r#"{"type":"parabola","scal":2}"#).is_err());
    }

    #[test]
    fn harmonic_offsets_cancel() {
        let grid = vec![0.1, 0.5, 0.9];
        let curve = |v: [f64; 3]| TabulatedCurve::new(grid.clone(), v.to_vec()).unwrap();
        let (a, b, c, d) = (
            curve([5.0, 7.0, 9.0]),
            curve([0.0, 0.5, 1.0]),
            curve([1.0, 1.0, 2.0]),
            curve([2.0, 3.0, 4.0]),
        );
        let base = WeightSpec::harmonic_from_utilities(&a, &b, &c, &d, None).unwrap();
        let shift = |x: &TabulatedCurve, k: f64| {
            TabulatedCurve::new(x.grid.clone(), x.values.iter().map(|v| v + k).collect()).unwrap()
        };
        let shifted = WeightSpec::harmonic_from_utilities(
            &shift(&a, 3.0),
            &shift(&b, 1.5),
            &shift(&c, 3.0),
            &shift(&d, 1.5),
            None,
        )
        .unwrap();
        for t in [0.05, 0.3, 0.7] {
            assert!((base.density(t) - shifted.density(t)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn harmonic_spec_bounded_by_utilities(
            tp in prop::collection::vec(0.01f64..20.0, 3),
            fp in prop::collection::vec(0.01f64..20.0, 3),
            t in 0.001f64..0.999,
        ) {
            let grid = vec![0.2, 0.5, 0.8];
            let tp = TabulatedCurve::new(grid.clone(), tp).unwrap();
            let fp = TabulatedCurve::new(grid, fp).unwrap();
            let spec = WeightSpec::HarmonicUtilities { tp_benefit: tp.clone(), fp_harm: fp.clone(), density: None };
            let w = weight_value(&spec, t).unwrap();
            prop_assert!(w >= 0.0);
            prop_assert!(w <= tp.eval(t).min(fp.eval(t)) + 1e-12);
        }

        #[test]
        fn normalize_gives_unit_w1(scale in 0.1f64..10.0, t_star in 0.01f64..0.99, mass in 0.1f64..5.0) {
            let spec = WeightSpec::Sum { parts: vec![
                WeightSpec::Parabola { scale },
                WeightSpec::PointMass { t_star, mass },
            ]};
            let n = normalize(&spec, &cfg()).unwrap();
            let total = cumulative(&n, &cfg()).unwrap().total_w1().unwrap();
            prop_assert!((total - 1.0).abs() < 1e-8);
        }
    }
}
