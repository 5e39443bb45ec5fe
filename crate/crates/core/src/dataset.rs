//! Evaluation data: per-subject scores for one or more models, a binary
//! outcome and a nonnegative sample weight.
//!
//! Storage is columnar. Datasets are validated on construction and never
//! mutated afterwards.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::compensated_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationDataset {
    models: Vec<String>,
    scores: Vec<Vec<f64>>,
    outcomes: Vec<bool>,
    weights: Vec<f64>,
    total_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub total_weight: f64,
    pub prevalence: f64,
    pub models: Vec<String>,
}

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub outcome: String,
    pub scores: Vec<String>,
    #[serde(default)]
    pub weight: Option<String>,
}

impl FromStr for Schema {
    type Err = Error;

    /// Parses `outcome=COL,scores=COL1:COL2,weight=COL`.
    fn from_str(s: &str) -> Result<Self> {
        let mut outcome = None;
        let mut scores = None;
        let mut weight = None;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("schema entry '{part}' is not key=value"))
            })?;
            let value = value.trim();
            match key.trim() {
                "outcome" => outcome = Some(value.to_string()),
                "scores" => {
                    scores = Some(
                        value
                            .split(':')
                            .map(|c| c.trim().to_string())
                            .filter(|c| !c.is_empty())
                            .collect::<Vec<_>>(),
                    )
                }
                "weight" => weight = Some(value.to_string()),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown schema key '{other}' (expected outcome, scores, weight)"
                    )))
                }
            }
        }
        let outcome =
            outcome.ok_or_else(|| Error::InvalidArgument("schema needs outcome=COL".into()))?;
        let scores = scores
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::InvalidArgument("schema needs scores=COL[:COL...]".into()))?;
        Ok(Schema {
            outcome,
            scores,
            weight,
        })
    }
}

impl EvaluationDataset {
    /// Builds a dataset from columns. `scores[k]` holds the scores of
    /// `models[k]`; `weights` defaults to 1 for every subject.
    pub fn new(
        models: Vec<String>,
        scores: Vec<Vec<f64>>,
        outcomes: Vec<bool>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = outcomes.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if models.is_empty() {
            return Err(Error::InvalidDataset("at least one model is required".into()));
        }
        if models.len() != scores.len() {
            return Err(Error::InvalidDataset(format!(
                "{} model ids but {} score columns",
                models.len(),
                scores.len()
            )));
        }
        for (i, m) in models.iter().enumerate() {
            if models[..i].contains(m) {
                return Err(Error::InvalidDataset(format!("duplicate model id '{m}'")));
            }
        }
        for (model, column) in models.iter().zip(&scores) {
            if column.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "model '{model}' has {} scores for {n} subjects",
                    column.len()
                )));
            }
            if let Some((i, s)) = column
                .iter()
                .enumerate()
                .find(|(_, s)| !(0.0..=1.0).contains(*s))
            {
                return Err(Error::Cell {
                    row: i + 1,
                    column: model.clone(),
                    message: format!("score {s} outside [0, 1]"),
                });
            }
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; n]);
        if weights.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} weights for {n} subjects",
                weights.len()
            )));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::Cell {
                row: i + 1,
                column: "weight".into(),
                message: format!("weight {w} is negative or not finite"),
            });
        }
        let total_weight = compensated_sum(weights.iter().copied());
        if !(total_weight > 0.0) || !total_weight.is_finite() {
            return Err(Error::InvalidDataset(format!(
                "total weight must be positive and finite, got {total_weight}"
            )));
        }
        Ok(Self {
            models,
            scores,
            outcomes,
            weights,
            total_weight,
        })
    }

    /// Single-model convenience constructor.
    pub fn single(model: &str, scores: Vec<f64>, outcomes: Vec<bool>) -> Result<Self> {
        Self::new(vec![model.to_string()], vec![scores], outcomes, None)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn model_index(&self, model: &str) -> Result<usize> {
        self.models
            .iter()
            .position(|m| m == model)
            .ok_or_else(|| Error::UnknownModel(model.to_string()))
    }

    pub fn scores(&self, model: &str) -> Result<&[f64]> {
        Ok(&self.scores[self.model_index(model)?])
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn prevalence(&self) -> f64 {
        let events = compensated_sum(
            self.outcomes
                .iter()
                .zip(&self.weights)
                .filter(|(y, _)| **y)
                .map(|(_, w)| *w),
        );
        events / self.total_weight
    }

    pub fn summarize(&self) -> DatasetSummary {
        DatasetSummary {
            n: self.len(),
            total_weight: self.total_weight,
            prevalence: self.prevalence(),
            models: self.models.clone(),
        }
    }

    /// Dataset made of the subjects at `indices` (repeats allowed), each
    /// carrying its scores, outcome and weight.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let pick = |col: &[f64]| indices.iter().map(|&i| col[i]).collect::<Vec<_>>();
        Self::new(
            self.models.clone(),
            self.scores.iter().map(|c| pick(c)).collect(),
            indices.iter().map(|&i| self.outcomes[i]).collect(),
            Some(pick(&self.weights)),
        )
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn rescale_weights(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.models.clone(),
            self.scores.clone(),
            self.outcomes.clone(),
            Some(self.weights.iter().map(|w| w * factor).collect()),
        )
    }

    /// Copy with an extra score column.
    pub fn with_model(&self, model: &str, scores: Vec<f64>) -> Result<Self> {
        let mut models = self.models.clone();
        models.push(model.to_string());
        let mut columns = self.scores.clone();
        columns.push(scores);
        Self::new(
            models,
            columns,
            self.outcomes.clone(),
            Some(self.weights.clone()),
        )
    }

    /// Copy keeping only the named models, in the given order.
    pub fn select_models(&self, models: &[&str]) -> Result<Self> {
        let columns = models
            .iter()
            .map(|m| self.scores(m).map(<[f64]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            models.iter().map(|m| m.to_string()).collect(),
            columns,
            self.outcomes.clone(),
            Some(self.weights.clone()),
        )
    }

    pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(file, schema)
    }

    /// Reads comma-separated UTF-8 text with a header row. Row numbers in
    /// errors count data rows from 1.
    pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let locate = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let outcome_col = locate(&schema.outcome)?;
        let score_cols = schema
            .scores
            .iter()
            .map(|s| locate(s))
            .collect::<Result<Vec<_>>>()?;
        let weight_col = schema.weight.as_deref().map(locate).transpose()?;

        let mut scores = vec![Vec::new(); score_cols.len()];
        let mut outcomes = Vec::new();
        let mut weights = weight_col.map(|_| Vec::new());

        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record?;
            let cell = |col: usize, name: &str| -> Result<f64> {
                let raw = record.get(col).ok_or_else(|| Error::Cell {
                    row,
                    column: name.to_string(),
                    message: "missing cell".into(),
                })?;
                let value: f64 = raw.parse().map_err(|_| Error::Cell {
                    row,
                    column: name.to_string(),
                    message: format!("'{raw}' is not a number"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Cell {
                        row,
                        column: name.to_string(),
                        message: format!("'{raw}' is not finite"),
                    });
                }
                Ok(value)
            };

            let y = cell(outcome_col, &schema.outcome)?;
            if y == 0.0 {
                outcomes.push(false);
            } else if y == 1.0 {
                outcomes.push(true);
            } else {
                return Err(Error::Cell {
                    row,
                    column: schema.outcome.clone(),
                    message: format!("outcome {y} is not 0 or 1"),
                });
            }
            for ((col, name), column) in score_cols.iter().zip(&schema.scores).zip(&mut scores) {
                let s = cell(*col, name)?;
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::Cell {
                        row,
                        column: name.clone(),
                        message: format!("score {s} outside [0, 1]"),
                    });
                }
                column.push(s);
            }
            if let (Some(col), Some(ws)) = (weight_col, weights.as_mut()) {
                let name = schema.weight.as_deref().unwrap_or("weight");
                let w = cell(col, name)?;
                if w < 0.0 {
                    return Err(Error::Cell {
                        row,
                        column: name.to_string(),
                        message: format!("weight {w} is negative"),
                    });
                }
                ws.push(w);
            }
        }
        if outcomes.is_empty() {
            return Err(Error::EmptyInput);
        }
        Self::new(schema.scores.clone(), scores, outcomes, weights)
    }

    /// Writes the dataset as CSV with columns `outcome`, one per model, and
    /// `weight`. Floats use the shortest representation that parses back to
    /// the same value.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        for reserved in ["outcome", "weight"] {
            if self.models.iter().any(|m| m == reserved) {
                return Err(Error::InvalidDataset(format!(
                    "model id '{reserved}' collides with a reserved column"
                )));
            }
        }
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["outcome".to_string()];
        header.extend(self.models.iter().cloned());
        header.push("weight".into());
        wtr.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![if self.outcomes[i] { "1" } else { "0" }.to_string()];
            row.extend(self.scores.iter().map(|c| c[i].to_string()));
            row.push(self.weights[i].to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(|source| Error::Io {
            path: "<writer>".into(),
            source,
        })?;
        Ok(())
    }

    /// Schema matching the layout produced by [`EvaluationDataset::write_csv`].
    pub fn written_schema(&self) -> Schema {
        Schema {
            outcome: "outcome".into(),
            scores: self.models.clone(),
            weight: Some("weight".into()),
        }
    }
}
