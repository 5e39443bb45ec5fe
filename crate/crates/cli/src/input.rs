use std::path::Path;

use netbenefit::netbenefit::default_grid;
use netbenefit::weighting::example_weights;
use netbenefit::{EvaluationDataset, QuadConfig, Schema, WeightSpec};
use serde::de::DeserializeOwned;

use crate::args::{InputArgs, WeightArgs};
use crate::CliError;

pub fn load_dataset(a: &InputArgs) -> Result<EvaluationDataset, CliError> {
    let schema: Schema = a.schema.parse()?;
    Ok(EvaluationDataset::load_csv(&a.input, &schema)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn quad_config(w: &WeightArgs) -> Result<QuadConfig, CliError> {
    let cfg = match w.epsilon {
        Some(e) => QuadConfig::default().with_epsilon(e),
        None => QuadConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Preset name, inline JSON, or a path to a JSON file.
pub fn weight_spec(w: &WeightArgs, cfg: &QuadConfig) -> Result<WeightSpec, CliError> {
    let raw = w.weights.trim();
    let spec = match raw {
        "parabola" => WeightSpec::Parabola { scale: 1.0 },
        "uniform" => WeightSpec::Uniform { level: 1.0 },
        "lifestyle" | "statins" | "threshold-density" => {
            let p = example_weights(false, cfg)?;
            match raw {
                "lifestyle" => p.lifestyle,
                "statins" => p.statins,
                _ => p.threshold_density,
            }
        }
        _ if raw.starts_with('{') => serde_json::from_str(raw)
            .map_err(|e| CliError::Usage(format!("weight spec: {e}")))?,
        _ => read_json(Path::new(raw))?,
    };
    spec.validate()?;
    if w.normalize {
        Ok(netbenefit::normalize(&spec, cfg)?)
    } else {
        Ok(spec)
    }
}

/// `0.15`, `0.05,0.1`, or `start:stop:step` (inclusive).
pub fn grid(spec: Option<&str>) -> Result<Vec<f64>, CliError> {
    let Some(s) = spec else {
        return Ok(default_grid());
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("grid value '{x}' is not a number")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(CliError::Usage(format!("bad grid range '{s}'")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // Rounded to 12 digits so 0.01:0.99:0.01 gives 0.07, not 0.07000000000000001.
            Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(CliError::Usage(format!("bad grid '{s}'"))),
    }
}

pub fn model_pair(ds: &EvaluationDataset, spec: Option<&str>) -> Result<(String, String), CliError> {
    match spec {
        Some(s) => match s.split_once(':') {
            Some((a, b)) => {
                ds.model_index(a)?;
                ds.model_index(b)?;
                Ok((a.to_string(), b.to_string()))
            }
            None => Err(CliError::Usage(format!("--models expects first:second, got '{s}'"))),
        },
        None => match ds.models() {
            [a, b, ..] => Ok((a.clone(), b.clone())),
            _ => Err(CliError::Usage("compare needs at least two models".into())),
        },
    }
}
