//! The three worked examples as scripted runs, and a checker that replays
//! them and reports the first place a transcript departs from the expected
//! sequences, announcements and results.

use std::fmt;

use serde::Serialize;

use crate::adversary::{AdversaryStrategy, ChannelModel};
use crate::pauli::{Basis, BellLabel, CoverOp, PauliOp, ProductQubit};
use crate::protocol::{
    run, BitString, Decision, DecoySet, Event, Protocol, ProtocolConfig, ScriptValue, Scripted,
    Sequence, Stage, Status, Thresholds, Transcript,
};
use crate::register::Party;

use BellLabel::{PhiMinus as PhM, PhiPlus as PhP, PsiMinus as PsM, PsiPlus as PsP};

const ZERO: ProductQubit = ProductQubit::ZERO;
const ONE: ProductQubit = ProductQubit::ONE;
const PLUS: ProductQubit = ProductQubit::PLUS;
const MINUS: ProductQubit = ProductQubit::MINUS;

fn bits(s: &str) -> BitString {
    s.parse().expect("fixture bit strings are binary")
}

/// Inputs of the worked example for `protocol`.
pub fn example_config(protocol: Protocol) -> ProtocolConfig {
    let (message, bob_message, check_bits, fresh) = match protocol {
        Protocol::Qsdc => ("011010", None, 4, 4),
        Protocol::Qd => ("011", Some(bits("100")), 2, 4),
        Protocol::Dsqc => ("011010", None, 4, 3),
    };
    ProtocolConfig {
        message: bits(message),
        bob_message,
        identity_alice: bits("1011"),
        identity_bob: bits("0111"),
        check_bits,
        decoys: 4,
        fresh_decoys: fresh,
        thresholds: Thresholds::default(),
        sacrificed_pairs: 0,
    }
}

/// Every random choice the worked example makes, pinned.
pub fn example_randomness(protocol: Protocol) -> Scripted {
    use ScriptValue::*;
    let s = Scripted::new(0)
        .with(
            Decision::Decoys(DecoySet::DA),
            Qubits(vec![PLUS, ONE, ZERO, PLUS]),
        )
        .with(
            Decision::Decoys(DecoySet::DB),
            Qubits(vec![MINUS, ZERO, ONE, ZERO]),
        )
        .with(
            Decision::Interleave(Sequence::QA),
            Pattern(vec![0, 0, 1, 2, 0, 2, 1, 0, 0, 2, 0, 0, 2]),
        )
        .with(
            Decision::Interleave(Sequence::QB),
            Pattern(vec![0, 1, 0, 0, 0, 2, 2, 1, 0, 2, 0, 0, 2]),
        )
        .with(
            Decision::IdentityMasks,
            Paulis(vec![PauliOp::Z, PauliOp::I]),
        );
    let one_way = |s: Scripted| {
        s.with(Decision::CheckBits(Party::Alice), Bits(bits("1001")))
            .with(
                Decision::CheckPositions(Party::Alice),
                Positions(vec![1, 2, 6, 8]),
            )
            .with(
                Decision::RandomPairs,
                Labels(vec![PsP, PhP, PhP, PsM, PhM, PsM, PsP]),
            )
            .with(Decision::IdentityCarriers, Positions(vec![1, 4]))
    };
    match protocol {
        Protocol::Qsdc => one_way(s)
            .with(
                Decision::Interleave(Sequence::QAPrime),
                Pattern(vec![0, 1, 0, 0, 1, 0, 0, 0, 0]),
            )
            .with(
                Decision::Covers,
                Covers(vec![CoverOp::H, CoverOp::YH, CoverOp::Y, CoverOp::I]),
            )
            .with(
                Decision::Decoys(DecoySet::DAPrime),
                Qubits(vec![ZERO, PLUS, MINUS, ONE]),
            )
            .with(
                Decision::Interleave(Sequence::QADoublePrime),
                Pattern(vec![0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0]),
            ),
        Protocol::Qd => s
            .with(Decision::CheckBits(Party::Alice), Bits(bits("10")))
            .with(
                Decision::CheckPositions(Party::Alice),
                Positions(vec![0, 3]),
            )
            .with(Decision::CheckBits(Party::Bob), Bits(bits("01")))
            .with(Decision::CheckPositions(Party::Bob), Positions(vec![1, 3]))
            .with(
                Decision::QdPairClass,
                Flags(vec![true, false, true, false, false]),
            )
            .with(Decision::RandomPairs, Labels(vec![PhP, PhM]))
            .with(
                Decision::Interleave(Sequence::Carriers),
                Pattern(vec![0, 1, 0, 0, 1, 0, 0]),
            )
            .with(
                Decision::QdOperator,
                Flags(vec![false, true, true, false, true]),
            )
            .with(
                Decision::Interleave(Sequence::QAPrime),
                Pattern(vec![0, 1, 0, 0, 1, 0, 0, 0, 0]),
            )
            .with(
                Decision::Covers,
                Covers(vec![CoverOp::H, CoverOp::YH, CoverOp::Y, CoverOp::I]),
            )
            .with(
                Decision::Decoys(DecoySet::DAPrime),
                Qubits(vec![ZERO, PLUS, MINUS, ONE]),
            )
            .with(
                Decision::Interleave(Sequence::QADoublePrime),
                Pattern(vec![0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0]),
            ),
        Protocol::Dsqc => {
            use CoverOp::{H, I, Y, YH};
            one_way(s)
                .with(
                    Decision::Interleave(Sequence::QAPrime),
                    Pattern(vec![0, 2, 1, 0, 2, 2, 0, 1, 0, 2, 0, 0, 0]),
                )
                .with(
                    Decision::Covers,
                    Covers(vec![YH, H, I, H, I, Y, H, H, YH, I, Y, YH, H]),
                )
                .with(
                    Decision::Decoys(DecoySet::DAPrime),
                    Qubits(vec![MINUS, ONE, ZERO]),
                )
                .with(
                    Decision::Interleave(Sequence::QADoublePrime),
                    Pattern(vec![1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1, 0]),
                )
        }
    }
}

/// One observable fact of a worked example.
#[derive(Clone, Debug, PartialEq)]
pub enum Expect {
    Sequence(&'static str, Vec<&'static str>),
    Encode(&'static str, Vec<PauliOp>),
    Positions(&'static str, &'static str, Vec<usize>),
    Bases(&'static str, Vec<Basis>),
    Covers(&'static str, Vec<CoverOp>),
    Measure(&'static str, Vec<ProductQubit>),
    Bell(&'static str, Vec<BellLabel>),
    Decode(&'static str, &'static str),
    Pass(Stage),
    Completed,
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expect::Sequence(n, v) => write!(f, "sequence {n} = {{{}}}", v.join(", ")),
            Expect::Encode(s, v) => write!(f, "operators on {s} = {v:?}"),
            Expect::Positions(s, w, v) => write!(f, "positions of {s} in {w} = {v:?}"),
            Expect::Bases(s, v) => write!(f, "bases of {s} = {v:?}"),
            Expect::Covers(s, v) => write!(f, "covers of {s} = {v:?}"),
            Expect::Measure(s, v) => write!(f, "measurement of {s} = {v:?}"),
            Expect::Bell(s, v) => write!(f, "Bell results on {s} = {v:?}"),
            Expect::Decode(s, b) => write!(f, "decoded {s} = {b}"),
            Expect::Pass(st) => write!(f, "{st} passes"),
            Expect::Completed => write!(f, "run completes"),
        }
    }
}

/// What the transcript says about the thing `e` refers to, if it matches
/// the kind and set of `e`.
fn observe(e: &Expect, ev: &Event) -> Option<String> {
    let show = |v: &dyn fmt::Debug| Some(format!("{v:?}"));
    match (e, ev) {
        (Expect::Sequence(n, _), Event::Sequence { name, slots }) if name == n => {
            show(&slots.iter().map(|s| s.name.as_str()).collect::<Vec<_>>())
        }
        (Expect::Encode(s, _), Event::Encode { set, ops }) if set == s => show(ops),
        (
            Expect::Positions(s, w, _),
            Event::AnnouncePositions {
                set,
                within,
                positions,
                ..
            },
        ) if set == s && within == w => show(positions),
        (Expect::Bases(s, _), Event::AnnounceBases { set, bases }) if set == s => show(bases),
        (Expect::Covers(s, _), Event::AnnounceCovers { set, covers }) if set == s => show(covers),
        (Expect::Measure(s, _), Event::Measure { set, results }) if set == s => show(results),
        (Expect::Bell(s, _), Event::BellMeasure { set, results }) if set == s => show(results),
        (Expect::Decode(s, _), Event::Decode { set, bits }) if set == s => Some(bits.to_string()),
        (Expect::Pass(st), Event::Verdict { stage, pass, .. }) if stage == st => {
            Some(pass.to_string())
        }
        _ => None,
    }
}

fn wanted(e: &Expect) -> String {
    let show = |v: &dyn fmt::Debug| format!("{v:?}");
    match e {
        Expect::Sequence(_, v) => show(v),
        Expect::Encode(_, v) => show(v),
        Expect::Positions(_, _, v) => show(v),
        Expect::Bases(_, v) => show(v),
        Expect::Covers(_, v) => show(v),
        Expect::Measure(_, v) => show(v),
        Expect::Bell(_, v) => show(v),
        Expect::Decode(_, b) => b.to_string(),
        Expect::Pass(_) => "true".into(),
        Expect::Completed => String::new(),
    }
}

/// Where a replay first disagreed with the example.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divergence {
    pub expected: String,
    /// What the transcript held instead, or `None` if nothing matching was
    /// recorded.
    pub found: Option<String>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.found {
            Some(x) => write!(f, "expected {}, found {x}", self.expected),
            None => write!(
                f,
                "expected {}, but the transcript has no such record",
                self.expected
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleReport {
    pub protocol: Protocol,
    pub checked: usize,
    pub divergence: Option<Divergence>,
    /// Set when the engine itself refused the scripted run.
    pub error: Option<String>,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none() && self.error.is_none()
    }
}

/// Walks `expectations` in order against `transcript`; each must be found
/// after the previous one.
pub fn compare(transcript: &Transcript, expectations: &[Expect]) -> (usize, Option<Divergence>) {
    let mut cursor = 0;
    for (n, e) in expectations.iter().enumerate() {
        if *e == Expect::Completed {
            if transcript.status != Status::Completed {
                let found = Some(format!("{:?}", transcript.status));
                return (
                    n,
                    Some(Divergence {
                        expected: e.to_string(),
                        found,
                    }),
                );
            }
            continue;
        }
        let hit = transcript.records[cursor..]
            .iter()
            .enumerate()
            .find_map(|(i, r)| observe(e, &r.event).map(|seen| (cursor + i, seen)));
        match hit {
            Some((i, seen)) if seen == wanted(e) => cursor = i + 1,
            Some((_, seen)) => {
                return (
                    n,
                    Some(Divergence {
                        expected: e.to_string(),
                        found: Some(seen),
                    }),
                )
            }
            None => {
                return (
                    n,
                    Some(Divergence {
                        expected: e.to_string(),
                        found: None,
                    }),
                )
            }
        }
    }
    (expectations.len(), None)
}

/// Facts stated by the worked example for `protocol`, in transcript order.
pub fn expectations(protocol: Protocol) -> Vec<Expect> {
    use Expect::*;
    use PauliOp::{I as PI, X, Y, Z};
    let q_a = vec![
        "a1", "a2", "a'1", "|+>", "a3", "|1>", "a'2", "a4", "a5", "|0>", "a6", "a7", "|+>",
    ];
    let q_b = vec![
        "b1", "b'1", "b2", "b3", "b4", "|->", "|0>", "b'2", "b5", "|1>", "b6", "b7", "|0>",
    ];
    let decoy_b = [
        Positions("D_B", "Q_B", vec![5, 6, 9, 12]),
        Bases("D_B", vec![Basis::X, Basis::Z, Basis::Z, Basis::Z]),
        Measure("D_B", vec![MINUS, ZERO, ONE, ZERO]),
        Pass(Stage::DecoyBobUtp),
    ];
    let q_a2 = vec![
        "a1", "a'1", "a2", "|0>", "a3", "a'2", "|+>", "a4", "|->", "a5", "a6", "|1>", "a7",
    ];
    let mdi_middle = |s_a_name: &'static str| {
        let mut v = vec![
            Covers("D_A", vec![CoverOp::H, CoverOp::YH, CoverOp::Y, CoverOp::I]),
            Measure("D_A^1", vec![ZERO, PLUS, ONE, PLUS]),
            Pass(Stage::DecoyBobAlice),
            Sequence("Q_A''", q_a2.clone()),
            Positions("D_A'", "Q_A''", vec![3, 6, 8, 11]),
            Bases("D_A'", vec![Basis::Z, Basis::X, Basis::X, Basis::Z]),
            Measure("D_A'", vec![ZERO, PLUS, MINUS, ONE]),
            Pass(Stage::DecoyAliceUtp),
        ];
        v.extend(decoy_b.clone());
        v.extend([
            Positions("I_A'", "Q_A''", vec![1, 5]),
            Positions("I_B", "Q_B", vec![1, 7]),
            Bell("I", vec![PhP, PsM]),
            Pass(Stage::AuthenticateBob),
            Positions("C_A", s_a_name, vec![1, 4]),
            Bell("C", vec![PsM, PhP]),
            Pass(Stage::AuthenticateAlice),
        ]);
        v
    };
    match protocol {
        Protocol::Qsdc => {
            let mut v = vec![
                Sequence("Q_A", q_a.clone()),
                Sequence("Q_B", q_b.clone()),
                Positions("I_A", "Q_A", vec![2, 6]),
                Positions("D_A", "Q_A", vec![3, 5, 9, 12]),
                Encode("S_A", vec![X, Y, X, Y, Z, X, Y]),
                Encode("I_A", vec![Z, PI]),
                Sequence(
                    "Q_A'",
                    vec!["a1", "a'1", "a2", "a3", "a'2", "a4", "a5", "a6", "a7"],
                ),
                Bases("D_A", vec![Basis::X, Basis::Z, Basis::Z, Basis::X]),
            ];
            v.extend(mdi_middle("S_A'"));
            v.extend([
                Bell("M", vec![PhP, PsP, PhP, PhM, PhM]),
                Decode("m'", "0101100110"),
                Pass(Stage::CheckBits),
                Decode("m", "011010"),
                Completed,
            ]);
            v
        }
        Protocol::Qd => {
            let mut v = vec![
                Sequence("S_A'", vec!["a1", "a2", "a3", "a4", "a5", "a6", "a7"]),
                Sequence("Q_A", q_a.clone()),
                Sequence("Q_B", q_b.clone()),
                Positions("C_A", "Q_A", vec![1, 8]),
                Positions("I_A", "Q_A", vec![2, 6]),
                Positions("D_A", "Q_A", vec![3, 5, 9, 12]),
                Encode("S_A", vec![X, Z, Y, PI, Y]),
                Encode("C_A", vec![Y, Z]),
                Sequence("S_A''", vec!["a1", "a2", "a3", "a4", "a5", "a6", "a7"]),
                Encode("I_A", vec![Z, PI]),
                Sequence(
                    "Q_A'",
                    vec!["a1", "a'1", "a2", "a3", "a'2", "a4", "a5", "a6", "a7"],
                ),
                Bases("D_A", vec![Basis::X, Basis::Z, Basis::Z, Basis::X]),
            ];
            v.extend(mdi_middle("S_A''"));
            v.extend([
                Bell("M", vec![PhM, PhM, PhM, PhM, PsM]),
                Decode("m_b'", "10010"),
                Decode("m_a'", "10101"),
                Pass(Stage::CheckBits),
                Pass(Stage::CheckBitsReverse),
                Decode("m_a", "011"),
                Decode("m_b", "100"),
                Completed,
            ]);
            v
        }
        Protocol::Dsqc => {
            use CoverOp::{H, I, YH};
            let mut v = vec![
                Sequence("Q_A", q_a.clone()),
                Sequence("Q_B", q_b.clone()),
                Positions("I_A", "Q_A", vec![2, 6]),
                Positions("D_A", "Q_A", vec![3, 5, 9, 12]),
                Encode("S_A", vec![X, Y, X, Y, Z, X, Y]),
                Encode("I_A", vec![Z, PI]),
                Sequence(
                    "Q_A'",
                    vec![
                        "a1", "|+>", "a'1", "a2", "|1>", "|0>", "a3", "a'2", "a4", "|+>", "a5",
                        "a6", "a7",
                    ],
                ),
                Sequence(
                    "Q_A''",
                    vec![
                        "|->", "a1", "|+>", "a'1", "a2", "|1>", "|1>", "|0>", "a3", "a'2", "a4",
                        "|+>", "a5", "a6", "|0>", "a7",
                    ],
                ),
                Positions("D_A'", "Q_A''", vec![0, 6, 14]),
                Bases("D_A'", vec![Basis::X, Basis::Z, Basis::Z]),
                Measure("D_A'", vec![MINUS, ONE, ZERO]),
                Pass(Stage::DecoyAliceUtp),
            ];
            v.extend(decoy_b);
            v.extend([
                Bases("D_A", vec![Basis::X, Basis::Z, Basis::Z, Basis::X]),
                Positions("D_A", "Q_A''", vec![2, 5, 7, 11]),
                Covers("D_A", vec![H, I, CoverOp::Y, I]),
                Pass(Stage::DecoyBobAlice),
                Sequence(
                    "Q_A^1",
                    vec!["a1", "a'1", "a2", "a3", "a'2", "a4", "a5", "a6", "a7"],
                ),
                Sequence(
                    "Q_B^1",
                    vec!["b1", "b'1", "b2", "b3", "b4", "b'2", "b5", "b6", "b7"],
                ),
                Covers("Q_A^1", vec![YH, I, H, H, H, YH, CoverOp::Y, YH, H]),
                Positions("I_A'", "Q_A^2", vec![1, 4]),
                Positions("I_B", "Q_B^1", vec![1, 5]),
                Bell("I", vec![PhP, PsM]),
                Pass(Stage::AuthenticateBob),
                Positions("C_A", "S_A'", vec![1, 4]),
                Bell("C", vec![PsM, PhP]),
                Pass(Stage::AuthenticateAlice),
                Bell("M", vec![PhP, PsP, PhP, PhM, PhM]),
                Decode("m'", "0101100110"),
                Pass(Stage::CheckBits),
                Decode("m", "011010"),
                Completed,
            ]);
            v
        }
    }
}

/// Replays the worked example for `protocol` over a noiseless channel.
pub fn replay(protocol: Protocol) -> Result<Transcript, crate::protocol::ProtocolError> {
    let cfg = example_config(protocol);
    let mut rand = example_randomness(protocol);
    run(
        protocol,
        &cfg,
        &AdversaryStrategy::None,
        &ChannelModel::noiseless(),
        &mut rand,
    )
    .map(|(t, _)| t)
}

pub fn verify_example(protocol: Protocol) -> ExampleReport {
    match replay(protocol) {
        Ok(t) => {
            let (checked, divergence) = compare(&t, &expectations(protocol));
            ExampleReport {
                protocol,
                checked,
                divergence,
                error: None,
            }
        }
        Err(e) => ExampleReport {
            protocol,
            checked: 0,
            divergence: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn verify_examples() -> Vec<ExampleReport> {
    Protocol::ALL.iter().map(|&p| verify_example(p)).collect()
}
