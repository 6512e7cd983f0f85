//! The three measurement-device-independent protocols driven over a
//! [`Register`](crate::register::Register), with every classical
//! announcement recorded in a [`Transcript`].

mod bits;
pub mod checks;
mod dsqc;
pub mod encoding;
mod qd;
mod qsdc;
pub mod randomness;
mod session;
pub mod transcript;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bits::{BitString, ParseBitsError};
pub use dsqc::run_dsqc;
pub use qd::run_qd;
pub use qsdc::run_qsdc;
pub use randomness::{Decision, DecoySet, Randomness, ScriptValue, Scripted, Seeded, Sequence};
pub use transcript::{Event, Record, Stage, Status, Transcript};

use crate::adversary::{AdversaryStrategy, ChannelModel};
use crate::metrics::SecurityReport;
use crate::register::QuantumError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Qsdc,
    Qd,
    Dsqc,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Qsdc, Protocol::Qd, Protocol::Dsqc];
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Qsdc => "qsdc",
            Protocol::Qd => "qd",
            Protocol::Dsqc => "dsqc",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qsdc" => Ok(Protocol::Qsdc),
            "qd" => Ok(Protocol::Qd),
            "dsqc" => Ok(Protocol::Dsqc),
            other => Err(format!(
                "unknown protocol `{other}` (expected qsdc, qd or dsqc)"
            )),
        }
    }
}

/// Maximum tolerated error fraction per check family. A check passes when
/// its fraction is at most the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub decoy: f64,
    pub auth: f64,
    pub check: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            decoy: 0.1,
            auth: 0.0,
            check: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Alice's secret message.
    pub message: BitString,
    /// Bob's message, used only by the dialogue protocol.
    #[serde(default)]
    pub bob_message: Option<BitString>,
    pub identity_alice: BitString,
    pub identity_bob: BitString,
    /// Check bits inserted by each sender.
    #[serde(default)]
    pub check_bits: usize,
    /// Size of `D_A` and of `D_B`.
    #[serde(default)]
    pub decoys: usize,
    /// Size of Alice's fresh decoy set `D_A'`.
    #[serde(default)]
    pub fresh_decoys: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Φ+ pairs sacrificed on the Bob→Alice link to estimate ε_z and ε_x.
    /// Zero falls back to decoy statistics.
    #[serde(default)]
    pub sacrificed_pairs: usize,
}

impl ProtocolConfig {
    /// Identity length in pairs.
    pub fn k(&self) -> usize {
        self.identity_alice.len() / 2
    }

    pub fn validate(&self, protocol: Protocol) -> Result<(), ConfigError> {
        for id in [&self.identity_alice, &self.identity_bob] {
            if id.len() % 2 != 0 {
                return Err(ConfigError::OddIdentity(id.len()));
            }
            if id.is_empty() {
                return Err(ConfigError::EmptyIdentity);
            }
        }
        if self.identity_alice.len() != self.identity_bob.len() {
            return Err(ConfigError::IdentityLengthMismatch {
                alice: self.identity_alice.len(),
                bob: self.identity_bob.len(),
            });
        }
        let t = self.thresholds;
        for (name, v) in [("decoy", t.decoy), ("auth", t.auth), ("check", t.check)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Threshold { name, value: v });
            }
        }
        match protocol {
            Protocol::Qsdc | Protocol::Dsqc => {
                let total = self.message.len() + self.check_bits;
                if !total.is_multiple_of(2) {
                    return Err(ConfigError::OddPayload(total));
                }
            }
            Protocol::Qd => {
                let bob = self
                    .bob_message
                    .as_ref()
                    .ok_or(ConfigError::MissingBobMessage)?;
                if bob.len() != self.message.len() {
                    return Err(ConfigError::MessageLengthMismatch {
                        alice: self.message.len(),
                        bob: bob.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("message plus check bits has odd length {0}; two bits ride on each pair")]
    OddPayload(usize),
    #[error("identity has odd length {0}")]
    OddIdentity(usize),
    #[error("identities must hold at least one pair")]
    EmptyIdentity,
    #[error("identity lengths differ: Alice {alice}, Bob {bob}")]
    IdentityLengthMismatch { alice: usize, bob: usize },
    #[error("the dialogue protocol needs a message from Bob")]
    MissingBobMessage,
    #[error("dialogue messages must have equal length: Alice {alice}, Bob {bob}")]
    MessageLengthMismatch { alice: usize, bob: usize },
    #[error("threshold `{name}` = {value} is outside [0, 1]")]
    Threshold { name: &'static str, value: f64 },
    #[error("check positions {positions:?} are invalid for length {total}")]
    CheckPositions { positions: Vec<usize>, total: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("scripted value for {decision:?} is unusable: {reason}")]
    Script { decision: Decision, reason: String },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("protocol logic error: {0}")]
    Logic(String),
}

/// Runs `protocol` end to end. An abort is a normal outcome reported in the
/// transcript; `Err` means the inputs or the engine itself were unusable.
pub fn run(
    protocol: Protocol,
    cfg: &ProtocolConfig,
    adversary: &AdversaryStrategy,
    channel: &ChannelModel,
    rand: &mut dyn Randomness,
) -> Result<(Transcript, SecurityReport), ProtocolError> {
    match protocol {
        Protocol::Qsdc => run_qsdc(cfg, adversary, channel, rand),
        Protocol::Qd => run_qd(cfg, adversary, channel, rand),
        Protocol::Dsqc => run_dsqc(cfg, adversary, channel, rand),
    }
}
