use std::fs::File;
use std::io::{BufWriter, Write};

use netbenefit::ConfidenceInterval;
use serde::Serialize;

use crate::args::OutputArgs;
use crate::CliError;

pub fn open(out: &OutputArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &out.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::Usage(format!("{}: {e}", path.display()))
        })?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn internal(e: std::io::Error) -> CliError {
    CliError::Internal(format!("writing output: {e}"))
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: &'a C,
    result: &'a R,
}

/// `{"command", "config", "result"}`, values per capita.
pub fn json<C: Serialize, R: Serialize>(
    w: &mut dyn Write,
    command: &str,
    config: &C,
    result: &R,
) -> Result<(), CliError> {
    let env = Envelope {
        command,
        config,
        result,
    };
    serde_json::to_writer_pretty(&mut *w, &env).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(w).map_err(internal)
}

/// Per-capita value as "per 100 people", at most 4 decimals.
pub fn per100(v: f64) -> String {
    let s = format!("{:.4}", v * 100.0);
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn ci_text(ci: Option<&ConfidenceInterval>) -> String {
    match ci {
        Some(ci) => format!(
            " ({:.0}% CI {} to {})",
            ci.level * 100.0,
            per100(ci.lower),
            per100(ci.upper)
        ),
        None => String::new(),
    }
}
