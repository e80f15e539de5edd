//! Line-delimited scenario files.
//!
//! ```text
//! {"frame_rate":15.0,"metadata":{"template":"head_on"}}
//! {"f":0,"gt":[[0,0.3,10.0,0.0,-1.0]]}
//! {"f":0,"obs":[[0,0.3,10.0,0.0,-1.0]]}
//! ...
//! ```
//!
//! Rows are `[id, px, py, vx, vy]`. Non-finite values written by other tools
//! (`NaN`, `Infinity`, `null`, or the same words quoted) parse, and are then
//! rejected by validation with the offending field and frame.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{Frame, Metadata, ObjectState, Scenario, ValidationError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: invalid scenario: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: ValidationError,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    frame_rate: f64,
    #[serde(default)]
    metadata: Metadata,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GtLine {
    f: usize,
    gt: Vec<Row>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObsLine {
    f: usize,
    obs: Vec<Row>,
}

#[derive(Serialize)]
struct GtLineOut<'a> {
    f: usize,
    gt: &'a [(u64, f64, f64, f64, f64)],
}

#[derive(Serialize)]
struct ObsLineOut<'a> {
    f: usize,
    obs: &'a [(u64, f64, f64, f64, f64)],
}

#[derive(Deserialize)]
struct Row(u64, Num, Num, Num, Num);

/// A number that may also be spelled as a non-finite token.
struct Num(f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
            Null(()),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Num(v)),
            Raw::Null(()) => Ok(Num(f64::NAN)),
            Raw::Text(t) => match t.as_str() {
                "NaN" | "nan" => Ok(Num(f64::NAN)),
                "Infinity" | "inf" => Ok(Num(f64::INFINITY)),
                "-Infinity" | "-inf" => Ok(Num(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, found string {other:?}"
                ))),
            },
        }
    }
}

impl Row {
    fn into_state(self) -> ObjectState {
        ObjectState::new(self.0, self.1 .0, self.2 .0, self.3 .0, self.4 .0)
    }
}

/// Quotes bare `NaN` / `Infinity` / `-Infinity` tokens outside string
/// literals so the line becomes valid JSON.
fn quote_non_finite_tokens(line: &str) -> std::borrow::Cow<'_, str> {
    if !line.contains("NaN") && !line.contains("Infinity") {
        return line.into();
    }
    let mut out = String::with_capacity(line.len() + 8);
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = line;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
            out.push(c);
            rest = &rest[1..];
            continue;
        }
        if let Some(tok) = ["-Infinity", "Infinity", "NaN"]
            .into_iter()
            .find(|t| rest.starts_with(t))
        {
            out.push('"');
            out.push_str(tok);
            out.push('"');
            rest = &rest[tok.len()..];
            continue;
        }
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    out.into()
}

/// Parses scenario text; `path` is only used in error messages.
pub fn parse_scenario(text: &str, path: &Path) -> Result<Scenario, ScenarioError> {
    let parse_err = |line: usize, message: String| ScenarioError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (line_no, header_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header line".into()))?;
    let header: Header = serde_json::from_str(&quote_non_finite_tokens(header_line))
        .map_err(|e| parse_err(line_no, format!("bad header: {e}")))?;
    let frame_rate = header.frame_rate;

    let mut ground_truth = Vec::new();
    let mut observed = Vec::new();
    while let Some((gt_no, gt_line)) = lines.next() {
        let gt: GtLine = serde_json::from_str(&quote_non_finite_tokens(gt_line))
            .map_err(|e| parse_err(gt_no, format!("expected ground-truth record: {e}")))?;
        let (obs_no, obs_line) = lines.next().ok_or_else(|| {
            parse_err(gt_no + 1, format!("missing observed record for frame {}", gt.f))
        })?;
        let obs: ObsLine = serde_json::from_str(&quote_non_finite_tokens(obs_line))
            .map_err(|e| parse_err(obs_no, format!("expected observed record: {e}")))?;
        if obs.f != gt.f {
            return Err(parse_err(
                obs_no,
                format!("observed record for frame {} follows frame {}", obs.f, gt.f),
            ));
        }
        let time = crate::scenario::frame_time(gt.f, frame_rate);
        ground_truth.push(Frame {
            index: gt.f,
            time,
            objects: gt.gt.into_iter().map(Row::into_state).collect(),
        });
        observed.push(Frame {
            index: obs.f,
            time,
            objects: obs.obs.into_iter().map(Row::into_state).collect(),
        });
    }

    Scenario::new(frame_rate, ground_truth, observed, header.metadata).map_err(|source| {
        ScenarioError::Invalid {
            path: path.to_path_buf(),
            source,
        }
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, path)
}

/// Serializes a scenario to its text form.
pub fn write_scenario<W: Write>(s: &Scenario, mut w: W) -> std::io::Result<()> {
    let header = Header {
        frame_rate: s.frame_rate,
        metadata: s.metadata.clone(),
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    let rows = |f: &Frame| -> Vec<(u64, f64, f64, f64, f64)> {
        f.objects
            .iter()
            .map(|o| (o.id, o.px, o.py, o.vx, o.vy))
            .collect()
    };
    for (gt, obs) in s.ground_truth.iter().zip(&s.observed) {
        let gt_rows = rows(gt);
        let obs_rows = rows(obs);
        let gt_line = GtLineOut {
            f: gt.index,
            gt: &gt_rows,
        };
        let obs_line = ObsLineOut {
            f: obs.index,
            obs: &obs_rows,
        };
        writeln!(w, "{}", serde_json::to_string(&gt_line)?)?;
        writeln!(w, "{}", serde_json::to_string(&obs_line)?)?;
    }
    w.flush()
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    let io_err = |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    write_scenario(s, BufWriter::new(file)).map_err(io_err)
}
