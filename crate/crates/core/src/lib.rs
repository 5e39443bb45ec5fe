//! Decision curves, binary net benefit and continuous net benefit for
//! risk-prediction scores.
//!
//! A score `f` flags a subject at threshold `t` when `f > t`. Net benefit at
//! `t` is `TP(t) - t/(1-t)·FP(t)` per capita, and continuous net benefit
//! integrates the rescaled curve `NB(t)/t` against a weight over thresholds:
//!
//! ```
//! use netbenefit::{continuous_net_benefit, EvaluationDataset, QuadConfig, WeightSpec};
//!
//! let ds = EvaluationDataset::single(
//!     "model",
//!     vec![0.9, 0.2, 0.8, 0.1],
//!     vec![true, false, true, false],
//! )
//! .unwrap();
//! let spec = WeightSpec::Parabola { scale: 1.0 };
//! let cnb = continuous_net_benefit(&ds, "model", &spec, &QuadConfig::default()).unwrap();
//! assert!((cnb.value - 0.2375).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cnb;
pub mod cohort;
pub mod confusion;
pub mod dataset;
pub mod error;
pub mod models;
pub mod netbenefit;
pub mod oracle;
pub mod quadrature;
pub mod resample;
pub mod sum;
pub mod weighting;

pub use cnb::{
    aunb, aunb_alt, brier, cnb_by_threshold_quadrature, cnb_contributions, cnb_difference,
    continuous_net_benefit, expected_net_benefit, log_likelihood, treat_all_cnb, CnbEstimate,
    CnbUnit,
};
pub use confusion::{sweep, ClassificationCurve, Confusion};
pub use dataset::{EvaluationDataset, Schema};
pub use error::{Error, Result};
pub use netbenefit::{decision_curve, net_benefit, DecisionCurveTable};
pub use quadrature::QuadConfig;
pub use resample::{bootstrap_ci, optimism_correct, BootstrapConfig, ConfidenceInterval};
pub use weighting::{cumulative, normalize, TabulatedCurve, WeightSpec};
