//! Report envelope, error classification, and output rendering.
//!
//! Every subcommand produces a typed result wrapped in a common envelope.
//! Reports render as pretty JSON when written to a file or a pipe and as a
//! short table when stdout is a terminal. Exit codes are a stable contract:
//! 0 success, 1 algorithmic failure, 2 I/O or argument error.

use qlap_core::graph::GraphError;
use qlap_core::qpe::QpeError;
use qlap_core::resources::ResourceError;
use qlap_core::spectral::SpectralError;
use serde::Serialize;
use std::io::{IsTerminal, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("quantum partitioning supports k = 2 only, got k = {k}; use --engine classical for k-way splits")]
    UnsupportedK { k: usize },
    #[error("graph has {components} connected components; split the components and partition each separately")]
    ComponentSplitAdvised { components: usize },
    #[error("{0}")]
    Algorithm(String),
}

impl CliError {
    /// Stable exit-code contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. }
            | CliError::Write { .. }
            | CliError::Graph(_)
            | CliError::InvalidArgument(_)
            | CliError::UnsupportedK { .. } => 2,
            CliError::ComponentSplitAdvised { .. } | CliError::Algorithm(_) => 1,
        }
    }
}

impl From<QpeError> for CliError {
    fn from(e: QpeError) -> CliError {
        match e {
            QpeError::Disconnected { components } => {
                CliError::ComponentSplitAdvised { components }
            }
            QpeError::InvalidPrecision { .. }
            | QpeError::NoAncillas { .. }
            | QpeError::ZeroShots
            | QpeError::ZeroSamples => CliError::InvalidArgument(e.to_string()),
            QpeError::Graph(g) => CliError::Graph(g),
            other => CliError::Algorithm(other.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> CliError {
        match e {
            SpectralError::Graph(g) => CliError::Graph(g),
            other => CliError::Algorithm(other.to_string()),
        }
    }
}

impl From<ResourceError> for CliError {
    fn from(e: ResourceError) -> CliError {
        match e {
            ResourceError::Graph(g) => CliError::Graph(g),
            other => CliError::InvalidArgument(other.to_string()),
        }
    }
}

/// Basic facts about the analyzed graph, echoed in every report.
#[derive(Debug, Clone, Serialize)]
pub struct GraphInfo {
    pub path: String,
    pub num_vertices: usize,
    pub num_edges: usize,
}

/// Common wrapper around each subcommand's result.
#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphInfo>,
    /// Seconds since the Unix epoch; omitted under --no-timestamp.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unix_timestamp: Option<u64>,
    /// Total command runtime; omitted under --no-timestamp.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, graph: Option<GraphInfo>, result: T) -> Report<T> {
        Report {
            command,
            graph,
            unix_timestamp: None,
            wall_clock_ms: None,
            result,
        }
    }

    pub fn with_timing(mut self, wall_clock_ms: f64) -> Report<T> {
        self.unix_timestamp = Some(
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        );
        self.wall_clock_ms = Some(wall_clock_ms);
        self
    }
}

/// Writes the report: JSON to `--out` or to a piped stdout, a short table
/// when stdout is a terminal. `table` supplies the human-readable lines.
pub fn emit<T: Serialize>(
    report: &Report<T>,
    out: Option<&Path>,
    table: &str,
) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Algorithm(format!("report serialization failed: {e}")))?;
    match out {
        Some(path) => {
            std::fs::write(path, format!("{json}\n")).map_err(|source| CliError::Write {
                path: path.display().to_string(),
                source,
            })?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let payload = if stdout.is_terminal() {
                format!("{table}\n")
            } else {
                format!("{json}\n")
            };
            stdout
                .write_all(payload.as_bytes())
                .map_err(|source| CliError::Write {
                    path: String::from("<stdout>"),
                    source,
                })?;
        }
    }
    Ok(())
}

/// Two-column table body used by the terminal rendering.
pub fn table_lines(title: &str, rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::from(title);
    for (k, v) in rows {
        out.push('\n');
        out.push_str(&format!("  {k:<width$}  {v}"));
    }
    out
}
