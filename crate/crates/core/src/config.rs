//! TOML run configuration shared by every front end.
//!
//! The accepted keys are listed in `schema/run-config.schema.json` at the
//! repository root. A missing `[party]` table falls back to the worked
//! example inputs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adversary::{AdversaryStrategy, ChannelError, ChannelModel};
use crate::golden::example_config;
use crate::metrics::BellDiagonalDist;
use crate::montecarlo::Execution;
use crate::protocol::{Protocol, ProtocolConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunConfigError {
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid channel: {0}")]
    Channel(#[from] ChannelError),
    #[error("invalid channel: {0}")]
    Distribution(String),
    #[error("`channel.p` and `channel.bell_diagonal` are mutually exclusive")]
    ChannelConflict,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    /// Structured JSON document.
    #[default]
    Doc,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Doc => "doc",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "doc" => Ok(OutputFormat::Doc),
            other => Err(format!("unknown format `{other}` (expected csv or doc)")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Total Pauli error probability per traversal.
    pub p: f64,
    /// Relative weights of X, Y, Z errors; uniform when absent.
    pub weights: Option<[f64; 3]>,
    /// Bell-diagonal weights `[δ1, δ2, δ3, δ4]`, in place of `p`.
    pub bell_diagonal: Option<[f64; 4]>,
}

impl ChannelConfig {
    pub fn model(&self) -> Result<ChannelModel, RunConfigError> {
        if let Some(w) = self.bell_diagonal {
            if self.p != 0.0 || self.weights.is_some() {
                return Err(RunConfigError::ChannelConflict);
            }
            let dist = BellDiagonalDist::new(w)
                .map_err(|e| RunConfigError::Distribution(e.to_string()))?;
            return Ok(ChannelModel::bell_diagonal(&dist));
        }
        Ok(ChannelModel::with_error_distribution(
            self.p,
            self.weights.unwrap_or([1.0; 3]),
        )?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for output files; standard output when absent.
    pub dir: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub seed: u64,
    pub trials: u64,
    #[serde(serialize_with = "display", deserialize_with = "parse")]
    pub adversary: AdversaryStrategy,
    pub execution: Execution,
    pub party: ProtocolConfig,
    pub channel: ChannelConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            protocol: Protocol::Qsdc,
            seed: 0,
            trials: 1000,
            adversary: AdversaryStrategy::None,
            execution: Execution::Parallel,
            party: example_config(Protocol::Qsdc),
            channel: ChannelConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }
}

fn display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn parse<'de, T, D>(d: D) -> Result<T, D::Error>
where
    T: FromStr<Err = String>,
    D: Deserializer<'de>,
{
    String::deserialize(d)?
        .parse()
        .map_err(serde::de::Error::custom)
}
