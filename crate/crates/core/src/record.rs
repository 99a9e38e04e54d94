//! Per-run optimization traces and their on-disk CSV form.
//!
//! Every optimizer produces a [`RunRecord`]: one row per objective
//! evaluation with the cumulative budget cost, the queried parameters, the
//! observed energy, and the best observation so far. Records serialize to a
//! versioned CSV (`bopt-v1`): `#`-prefixed metadata lines, a header row,
//! then data rows with the theta vector embedded as a JSON array in a single
//! quoted column. Floats round-trip exactly (shortest representation).

use std::path::Path;
use thiserror::Error;

pub const CSV_SCHEMA: &str = "bopt-v1";

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("schema tag '{found}' is not '{CSV_SCHEMA}'")]
    WrongSchema { found: String },
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One objective evaluation inside a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    /// 1-based evaluation index.
    pub iteration: usize,
    /// Budget units spent up to and including this evaluation.
    pub cumulative_cost: f64,
    pub theta: Vec<f64>,
    pub observed_energy: f64,
    /// Minimum observed energy so far (monotone non-increasing).
    pub best_observed: f64,
    /// Best posterior-mean value, for the arms that compute one.
    pub incumbent_eta: Option<f64>,
}

/// A full optimization run: arm label, seed, and the evaluation rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub arm: String,
    pub seed: u64,
    pub rows: Vec<IterationRow>,
}

/// `(cost, theta)` at every strict improvement of the best observation.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub cumulative_cost: f64,
    pub theta: Vec<f64>,
    pub best_observed: f64,
}

/// A trace point re-evaluated on the noise-free simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedTracePoint {
    pub cumulative_cost: f64,
    pub theta: Vec<f64>,
    pub best_observed: f64,
    pub exact_energy: f64,
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl RunRecord {
    /// The best-so-far trajectory: the first row plus every row where
    /// `best_observed` strictly improves.
    pub fn trace_trajectory(&self) -> Vec<TracePoint> {
        let mut out = Vec::new();
        let mut best = f64::INFINITY;
        for row in &self.rows {
            if row.best_observed < best {
                best = row.best_observed;
                out.push(TracePoint {
                    cumulative_cost: row.cumulative_cost,
                    theta: row.theta.clone(),
                    best_observed: row.best_observed,
                });
            }
        }
        out
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema: {CSV_SCHEMA}\n"));
        out.push_str(&format!("# arm: {}\n", self.arm));
        out.push_str(&format!("# seed: {}\n", self.seed));
        out.push_str(
            "iteration,cumulative_cost,theta,observed_energy,best_observed,incumbent_eta\n",
        );
        for row in &self.rows {
            let theta = serde_json::to_string(&row.theta).expect("theta serializes");
            let eta = row.incumbent_eta.map(fmt_f64).unwrap_or_default();
            out.push_str(&format!(
                "{},{},\"{}\",{},{},{}\n",
                row.iteration,
                fmt_f64(row.cumulative_cost),
                theta,
                fmt_f64(row.observed_energy),
                fmt_f64(row.best_observed),
                eta
            ));
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self, RecordError> {
        let mut arm = String::new();
        let mut seed = 0u64;
        let mut schema_seen = false;
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("schema:") {
                    let found = v.trim().to_string();
                    if found != CSV_SCHEMA {
                        return Err(RecordError::WrongSchema { found });
                    }
                    schema_seen = true;
                } else if let Some(v) = rest.strip_prefix("arm:") {
                    arm = v.trim().to_string();
                } else if let Some(v) = rest.strip_prefix("seed:") {
                    seed = v.trim().parse().map_err(|_| RecordError::Malformed {
                        line: line_no,
                        msg: format!("bad seed '{}'", v.trim()),
                    })?;
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                header_seen = true; // column header row
                continue;
            }
            let fields = split_csv_line(line).map_err(|msg| RecordError::Malformed {
                line: line_no,
                msg,
            })?;
            if fields.len() != 6 {
                return Err(RecordError::Malformed {
                    line: line_no,
                    msg: format!("expected 6 fields, found {}", fields.len()),
                });
            }
            let parse_f = |s: &str, what: &str| -> Result<f64, RecordError> {
                s.parse().map_err(|_| RecordError::Malformed {
                    line: line_no,
                    msg: format!("bad {what} '{s}'"),
                })
            };
            let theta: Vec<f64> =
                serde_json::from_str(&fields[2]).map_err(|e| RecordError::Malformed {
                    line: line_no,
                    msg: format!("bad theta: {e}"),
                })?;
            rows.push(IterationRow {
                iteration: fields[0].parse().map_err(|_| RecordError::Malformed {
                    line: line_no,
                    msg: format!("bad iteration '{}'", fields[0]),
                })?,
                cumulative_cost: parse_f(&fields[1], "cumulative_cost")?,
                theta,
                observed_energy: parse_f(&fields[3], "observed_energy")?,
                best_observed: parse_f(&fields[4], "best_observed")?,
                incumbent_eta: if fields[5].is_empty() {
                    None
                } else {
                    Some(parse_f(&fields[5], "incumbent_eta")?)
                },
            });
        }
        if !schema_seen {
            return Err(RecordError::WrongSchema {
                found: "<missing>".to_string(),
            });
        }
        Ok(Self { arm, seed, rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RecordError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|source| RecordError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RecordError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| RecordError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text)
    }
}

/// Serialize a validated trajectory (`bopt-v1` family, extra column).
pub fn validated_trace_to_csv(
    arm: &str,
    seed: u64,
    points: &[ValidatedTracePoint],
) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema: {CSV_SCHEMA}\n"));
    out.push_str(&format!("# arm: {arm}\n"));
    out.push_str(&format!("# seed: {seed}\n"));
    out.push_str("cumulative_cost,theta,best_observed,exact_energy\n");
    for p in points {
        let theta = serde_json::to_string(&p.theta).expect("theta serializes");
        out.push_str(&format!(
            "{},\"{}\",{},{}\n",
            fmt_f64(p.cumulative_cost),
            theta,
            fmt_f64(p.best_observed),
            fmt_f64(p.exact_energy)
        ));
    }
    out
}

pub fn validated_trace_from_csv(text: &str) -> Result<Vec<ValidatedTracePoint>, RecordError> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let fields = split_csv_line(line).map_err(|msg| RecordError::Malformed {
            line: line_no,
            msg,
        })?;
        if fields.len() != 4 {
            return Err(RecordError::Malformed {
                line: line_no,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let parse_f = |s: &str| -> Result<f64, RecordError> {
            s.parse().map_err(|_| RecordError::Malformed {
                line: line_no,
                msg: format!("bad float '{s}'"),
            })
        };
        out.push(ValidatedTracePoint {
            cumulative_cost: parse_f(&fields[0])?,
            theta: serde_json::from_str(&fields[1]).map_err(|e| RecordError::Malformed {
                line: line_no,
                msg: format!("bad theta: {e}"),
            })?,
            best_observed: parse_f(&fields[2])?,
            exact_energy: parse_f(&fields[3])?,
        });
    }
    Ok(out)
}

/// Split one CSV line, honoring double-quoted fields (the theta column).
fn split_csv_line(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    current.push('"');
                } else {
                    in_quotes = false;
                }
            }
            '"' => in_quotes = true,
            ',' if !in_quotes => {
                fields.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    if in_quotes {
        return Err("unterminated quoted field".to_string());
    }
    fields.push(current);
    Ok(fields)
}
