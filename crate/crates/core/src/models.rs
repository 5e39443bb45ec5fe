//! Logistic regression by iteratively reweighted least squares, with an
//! optional ridge penalty on the non-intercept coefficients.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Ridge penalty λ ≥ 0; the intercept is not penalized.
    pub ridge: f64,
    /// Converged when the largest coefficient update is below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            ridge: 0.0,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub max_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub feature_names: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub ridge: f64,
    pub diagnostics: FitDiagnostics,
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn well_conditioned(chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> bool {
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d.abs()), hi.max(d.abs())));
    lo > 1e-7 * hi
}

const SEPARATION_HINT: &str =
    "the outcome may be perfectly separated by the features; try a ridge penalty > 0";

/// Fits `P(y = 1 | x) = sigmoid(b0 + x·b)` maximizing the weighted
/// log-likelihood minus `ridge/2 · |b|²`. `x` has one row per subject.
pub fn fit_logistic(
    x: &DMatrix<f64>,
    feature_names: &[String],
    y: &[bool],
    weights: &[f64],
    opts: &FitOptions,
) -> Result<LogisticModel> {
    let (n, p) = x.shape();
    if feature_names.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} feature names for {p} columns",
            feature_names.len()
        )));
    }
    if y.len() != n || weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} rows, {} outcomes, {} weights",
            y.len(),
            weights.len()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if x.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument(
            "features and weights must be finite, weights nonnegative".into(),
        ));
    }
    if !(opts.ridge >= 0.0) || !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidArgument(format!("invalid fit options {opts:?}")));
    }

    let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let yv = DVector::from_iterator(n, y.iter().map(|&v| v as u8 as f64));
    let mut beta = DVector::zeros(p + 1);
    let mut max_change = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        let eta = &design * &beta;
        let mu = eta.map(sigmoid);
        let resid = DVector::from_iterator(n, (0..n).map(|i| weights[i] * (yv[i] - mu[i])));
        let mut grad = design.transpose() * resid;
        let wdiag = DVector::from_iterator(n, (0..n).map(|i| weights[i] * mu[i] * (1.0 - mu[i])));
        let weighted = DMatrix::from_fn(n, p + 1, |i, j| design[(i, j)] * wdiag[i]);
        let mut hess = design.transpose() * weighted;
        for j in 1..=p {
            hess[(j, j)] += opts.ridge;
            grad[j] -= opts.ridge * beta[j];
        }
        let step = match hess.cholesky().filter(well_conditioned) {
            Some(chol) => chol.solve(&grad),
            None if iter > 1 && opts.ridge == 0.0 => {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    max_change,
                    hint: SEPARATION_HINT,
                })
            }
            None => return Err(Error::SingularDesign),
        };
        beta += &step;
        max_change = step.amax();
        if !max_change.is_finite() {
            return Err(Error::NonConvergence {
                iterations: iter,
                max_change,
                hint: SEPARATION_HINT,
            });
        }
        if max_change < opts.tol {
            return Ok(LogisticModel {
                feature_names: feature_names.to_vec(),
                intercept: beta[0],
                coefficients: beta.iter().skip(1).copied().collect(),
                ridge: opts.ridge,
                diagnostics: FitDiagnostics {
                    iterations: iter,
                    max_change,
                },
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        max_change,
        hint: SEPARATION_HINT,
    })
}

impl LogisticModel {
    /// A model with the given coefficients (no fit).
    pub fn from_coefficients(names: Vec<String>, intercept: f64, coefficients: Vec<f64>) -> Result<Self> {
        if names.len() != coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} coefficients",
                names.len(),
                coefficients.len()
            )));
        }
        Ok(Self {
            feature_names: names,
            intercept,
            coefficients,
            ridge: 0.0,
            diagnostics: FitDiagnostics {
                iterations: 0,
                max_change: 0.0,
            },
        })
    }

    pub fn linear_predictor(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "model has {} features, input has {}",
                self.coefficients.len(),
                x.ncols()
            )));
        }
        Ok(x.row_iter()
            .map(|row| {
                self.intercept
                    + row
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .collect())
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        Ok(self.linear_predictor(x)?.into_iter().map(sigmoid).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Bernoulli, Distribution, StandardNormal};

    fn no_features(n: usize) -> DMatrix<f64> {
        DMatrix::zeros(n, 0)
    }

    #[test]
    fn intercept_only_fits_logit_of_mean() {
        let y = [true, false, true, false];
        let m = fit_logistic(&no_features(4), &[], &y, &[1.0; 4], &FitOptions::default()).unwrap();
        assert!(m.intercept.abs() < 1e-12);
        let y = [true, true, true, false];
        let m = fit_logistic(&no_features(4), &[], &y, &[1.0; 4], &FitOptions::default()).unwrap();
        assert!((m.intercept - 3f64.ln()).abs() < 1e-10);
        assert!((m.intercept - 1.0986).abs() < 1e-4);
        let p = m.predict(&no_features(1)).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn trivial_predictions() {
        let m = LogisticModel::from_coefficients(vec!["a".into()], 0.0, vec![0.0]).unwrap();
        let x = DMatrix::from_row_slice(3, 1, &[-2.0, 0.0, 5.0]);
        assert_eq!(m.predict(&x).unwrap(), vec![0.5; 3]);
        assert!(m.predict(&DMatrix::zeros(2, 2)).is_err());
        assert_eq!(sigmoid(0.0), 0.5);
    }

    fn simulate(n: usize, seed: u64, coef: &[f64], intercept: f64) -> (DMatrix<f64>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = coef.len();
        let x = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
        let y = (0..n)
            .map(|i| {
                let eta = intercept + (0..p).map(|j| x[(i, j)] * coef[j]).sum::<f64>();
                Bernoulli::new(sigmoid(eta)).unwrap().sample(&mut rng)
            })
            .collect();
        (x, y)
    }

    #[test]
    fn recovers_known_coefficients() {
        let truth = [0.8, -0.5, 0.3];
        let (x, y) = simulate(5000, 42, &truth, -1.0);
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let m = fit_logistic(&x, &names, &y, &vec![1.0; 5000], &FitOptions::default()).unwrap();
        assert!((m.intercept + 1.0).abs() < 0.1);
        for (b, t) in m.coefficients.iter().zip(truth) {
            assert!((b - t).abs() < 0.1, "{b} vs {t}");
        }
    }

    #[test]
    fn score_equation_and_weight_scaling() {
        let (x, y) = simulate(400, 7, &[1.0, -0.4], 0.2);
        let names = vec!["a".to_string(), "b".to_string()];
        let w: Vec<f64> = (0..400).map(|i| 0.5 + (i % 3) as f64).collect();
        let m = fit_logistic(&x, &names, &y, &w, &FitOptions::default()).unwrap();
        let p = m.predict(&x).unwrap();
        let total: f64 = w.iter().sum();
        let mean_p: f64 = p.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
        let prev: f64 = y.iter().zip(&w).map(|(&a, b)| a as u8 as f64 * b).sum::<f64>() / total;
        assert!((mean_p - prev).abs() < 1e-10);

        let doubled: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
        let m2 = fit_logistic(&x, &names, &y, &doubled, &FitOptions::default()).unwrap();
        assert!((m.intercept - m2.intercept).abs() < 1e-9);
        for (a, b) in m.coefficients.iter().zip(&m2.coefficients) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn separation_needs_ridge() {
        let x = DMatrix::from_row_slice(6, 1, &[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]);
        let y = [false, false, false, true, true, true];
        let names = vec!["x".to_string()];
        let err = fit_logistic(&x, &names, &y, &[1.0; 6], &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }), "{err:?}");
        assert!(err.to_string().contains("ridge"));
        let opts = FitOptions {
            ridge: 1.0,
            ..FitOptions::default()
        };
        let m = fit_logistic(&x, &names, &y, &[1.0; 6], &opts).unwrap();
        assert!(m.coefficients[0] > 0.0);
    }

    #[test]
    fn singular_design() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 4.0, 8.0]);
        let y = [true, false, false, true];
        let names = vec!["a".to_string(), "b".to_string()];
        let err = fit_logistic(&x, &names, &y, &[1.0; 4], &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SingularDesign), "{err:?}");
    }
}
