//! Ordered record of one protocol run.
//!
//! Serialized as JSON lines: a `header` record, one `event` record per
//! event, and a closing `status` record. Positions are 0-based in the data;
//! [`Transcript::render`] shows them 1-based.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::{BitString, Protocol};
use crate::adversary::Link;
use crate::pauli::{Basis, BellLabel, CoverOp, PauliOp, ProductQubit};
use crate::register::{Party, Role, SlotId};

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;

/// Security checks that can abort a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// `D_A` decoys that travelled Bob→Alice→UTP under covers.
    DecoyBobAlice,
    /// Alice's fresh decoys on the Alice→UTP link.
    DecoyAliceUtp,
    /// `D_B` decoys on the Bob→UTP link.
    DecoyBobUtp,
    /// Alice checks Bob's identity.
    AuthenticateBob,
    /// Bob checks Alice's identity.
    AuthenticateAlice,
    /// Bob compares Alice's check bits.
    CheckBits,
    /// Alice compares Bob's check bits (dialogue only).
    CheckBitsReverse,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::DecoyBobAlice => "decoy_bob_alice",
            Stage::DecoyAliceUtp => "decoy_alice_utp",
            Stage::DecoyBobUtp => "decoy_bob_utp",
            Stage::AuthenticateBob => "authenticate_bob",
            Stage::AuthenticateAlice => "authenticate_alice",
            Stage::CheckBits => "check_bits",
            Stage::CheckBitsReverse => "check_bits_reverse",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotRef {
    pub id: SlotId,
    pub name: String,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseHit {
    pub slot: String,
    pub op: PauliOp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    /// A sender's private check-bit insertion.
    CheckBits {
        set: String,
        positions: Vec<usize>,
        values: BitString,
        extended: BitString,
    },
    PreparePairs {
        set: String,
        labels: Vec<BellLabel>,
    },
    PrepareDecoys {
        set: String,
        states: Vec<ProductQubit>,
    },
    /// Snapshot of an ordered sequence as its holder sees it.
    Sequence {
        name: String,
        slots: Vec<SlotRef>,
    },
    Encode {
        set: String,
        ops: Vec<PauliOp>,
    },
    ApplyCovers {
        set: String,
        covers: Vec<CoverOp>,
    },
    RemoveCovers {
        set: String,
        covers: Vec<CoverOp>,
    },
    Transmit {
        link: Link,
        sequence: String,
        qubits: usize,
    },
    Intercept {
        link: Link,
        forwarded: Vec<ProductQubit>,
    },
    Noise {
        link: Link,
        hits: Vec<NoiseHit>,
    },
    /// Sacrificed-pair statistics as `(errors, samples)`.
    Estimate {
        link: Link,
        pairs: usize,
        z: (u64, u64),
        x: (u64, u64),
    },
    AnnouncePositions {
        set: String,
        within: String,
        role: Role,
        positions: Vec<usize>,
    },
    AnnounceBases {
        set: String,
        bases: Vec<Basis>,
    },
    AnnounceCovers {
        set: String,
        covers: Vec<CoverOp>,
    },
    AnnounceCheckBits {
        set: String,
        positions: Vec<usize>,
        values: BitString,
    },
    Measure {
        set: String,
        results: Vec<ProductQubit>,
    },
    BellMeasure {
        set: String,
        results: Vec<BellLabel>,
    },
    Discard {
        sequence: String,
        removed: usize,
    },
    Verdict {
        stage: Stage,
        errors: usize,
        total: usize,
        error_fraction: f64,
        threshold: f64,
        pass: bool,
    },
    Skipped {
        stage: Stage,
        reason: String,
    },
    Decode {
        set: String,
        bits: BitString,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub index: usize,
    pub step: String,
    pub actor: Party,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    Aborted { stage: Stage, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema_version: u32,
    pub protocol: Protocol,
    pub records: Vec<Record>,
    pub status: Status,
    /// What Bob recovered of Alice's message.
    pub decoded: Option<BitString>,
    /// What Alice recovered of Bob's message (dialogue only).
    pub decoded_reverse: Option<BitString>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Header {
        schema_version: u32,
        protocol: Protocol,
    },
    Event(Record),
    Status {
        #[serde(flatten)]
        status: Status,
        decoded: Option<BitString>,
        decoded_reverse: Option<BitString>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptParseError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("transcript is missing its {0} record")]
    Missing(&'static str),
    #[error("unsupported transcript schema version {0}")]
    Version(u32),
}

impl Transcript {
    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    pub fn abort_stage(&self) -> Option<Stage> {
        match &self.status {
            Status::Aborted { stage, .. } => Some(*stage),
            Status::Completed => None,
        }
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.records.iter().map(|r| &r.event)
    }

    /// Results of the Bell measurements on set `set`, if they happened.
    pub fn bell_results(&self, set: &str) -> Option<&[BellLabel]> {
        self.events().find_map(|e| match e {
            Event::BellMeasure { set: s, results } if s == set => Some(results.as_slice()),
            _ => None,
        })
    }

    pub fn verdict(&self, stage: Stage) -> Option<bool> {
        self.events().find_map(|e| match e {
            Event::Verdict { stage: s, pass, .. } if *s == stage => Some(*pass),
            _ => None,
        })
    }

    /// Number of cover operations announced publicly.
    pub fn announced_covers(&self) -> usize {
        self.events()
            .map(|e| match e {
                Event::AnnounceCovers { covers, .. } => covers.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &Line| {
            out.push_str(&serde_json::to_string(line).expect("transcript records serialize"));
            out.push('\n');
        };
        push(&Line::Header {
            schema_version: self.schema_version,
            protocol: self.protocol,
        });
        for r in &self.records {
            push(&Line::Event(r.clone()));
        }
        push(&Line::Status {
            status: self.status.clone(),
            decoded: self.decoded.clone(),
            decoded_reverse: self.decoded_reverse.clone(),
        });
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TranscriptParseError> {
        let mut header = None;
        let mut records = Vec::new();
        let mut tail = None;
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let parsed: Line =
                serde_json::from_str(line).map_err(|source| TranscriptParseError::Json {
                    line: i + 1,
                    source,
                })?;
            match parsed {
                Line::Header {
                    schema_version,
                    protocol,
                } => header = Some((schema_version, protocol)),
                Line::Event(r) => records.push(r),
                Line::Status {
                    status,
                    decoded,
                    decoded_reverse,
                } => tail = Some((status, decoded, decoded_reverse)),
            }
        }
        let (schema_version, protocol) = header.ok_or(TranscriptParseError::Missing("header"))?;
        if schema_version != TRANSCRIPT_SCHEMA_VERSION {
            return Err(TranscriptParseError::Version(schema_version));
        }
        let (status, decoded, decoded_reverse) =
            tail.ok_or(TranscriptParseError::Missing("status"))?;
        Ok(Transcript {
            schema_version,
            protocol,
            records,
            status,
            decoded,
            decoded_reverse,
        })
    }

    /// Human-readable listing with 1-based positions.
    pub fn render(&self) -> String {
        let mut out = format!("{} transcript\n", self.protocol.to_string().to_uppercase());
        for r in &self.records {
            let _ = writeln!(out, "[{:>3}] {:<5} {}", r.step, r.actor, describe(&r.event));
        }
        let _ = match &self.status {
            Status::Completed => writeln!(out, "completed"),
            Status::Aborted { stage, reason } => writeln!(out, "aborted at {stage}: {reason}"),
        };
        if let Some(m) = &self.decoded {
            let _ = writeln!(out, "decoded message: {m}");
        }
        if let Some(m) = &self.decoded_reverse {
            let _ = writeln!(out, "decoded reverse message: {m}");
        }
        out
    }
}

fn list<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn one_based(positions: &[usize]) -> String {
    list(&positions.iter().map(|p| p + 1).collect::<Vec<_>>())
}

fn describe(e: &Event) -> String {
    match e {
        Event::CheckBits {
            set,
            positions,
            values,
            extended,
        } => {
            format!(
                "inserts check bits {values} at {} giving {set} = {extended}",
                one_based(positions)
            )
        }
        Event::PreparePairs { set, labels } => format!("prepares {set} = {{{}}}", list(labels)),
        Event::PrepareDecoys { set, states } => format!("prepares {set} = {{{}}}", list(states)),
        Event::Sequence { name, slots } => {
            let names: Vec<&str> = slots.iter().map(|s| s.name.as_str()).collect();
            format!("{name} = {{{}}}", names.join(", "))
        }
        Event::Encode { set, ops } => format!("applies {{{}}} to {set}", list(ops)),
        Event::ApplyCovers { set, covers } => format!("covers {set} with {{{}}}", list(covers)),
        Event::RemoveCovers { set, covers } => format!("uncovers {set} with {{{}}}", list(covers)),
        Event::Transmit {
            link,
            sequence,
            qubits,
        } => format!("sends {sequence} ({qubits} qubits) on {link}"),
        Event::Intercept { link, forwarded } => {
            format!("intercepts {link}, forwards {{{}}}", list(forwarded))
        }
        Event::Noise { link, hits } => {
            let hits: Vec<String> = hits
                .iter()
                .map(|h| format!("{}:{}", h.slot, h.op))
                .collect();
            format!("noise on {link}: {}", hits.join(", "))
        }
        Event::Estimate { link, pairs, z, x } => {
            format!(
                "sacrifices {pairs} pairs on {link}: Z {}/{}, X {}/{}",
                z.0, z.1, x.0, x.1
            )
        }
        Event::AnnouncePositions {
            set,
            within,
            positions,
            ..
        } => {
            format!(
                "announces {set} at positions {} of {within}",
                one_based(positions)
            )
        }
        Event::AnnounceBases { set, bases } => {
            format!("announces bases of {set}: {{{}}}", list(bases))
        }
        Event::AnnounceCovers { set, covers } => {
            format!("announces covers of {set}: {{{}}}", list(covers))
        }
        Event::AnnounceCheckBits {
            set,
            positions,
            values,
        } => {
            format!(
                "announces check bits of {set}: {values} at {}",
                one_based(positions)
            )
        }
        Event::Measure { set, results } => format!("measures {set}: {{{}}}", list(results)),
        Event::BellMeasure { set, results } => {
            format!("Bell-measures {set}: {{{}}}", list(results))
        }
        Event::Discard { sequence, removed } => {
            format!("discards {removed} measured qubits from {sequence}")
        }
        Event::Verdict {
            stage,
            errors,
            total,
            error_fraction,
            threshold,
            pass,
        } => format!(
            "{stage}: {errors}/{total} errors ({error_fraction:.4}) vs threshold {threshold}: {}",
            if *pass { "pass" } else { "FAIL" }
        ),
        Event::Skipped { stage, reason } => format!("{stage} skipped: {reason}"),
        Event::Decode { set, bits } => format!("decodes {set} = {bits}"),
    }
}
