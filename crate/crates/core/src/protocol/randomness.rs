//! Where the protocol engine gets its random choices.
//!
//! Every classical choice a party makes is a named [`Decision`]. A
//! [`Scripted`] source can pin any of them, which is how worked examples are
//! replayed exactly; everything else (measurement outcomes, noise, Eve) comes
//! from the underlying RNG.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BitString;
use crate::pauli::{BellLabel, CoverOp, PauliOp, ProductQubit};
use crate::register::Party;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecoySet {
    DA,
    DB,
    DAPrime,
}

/// Sequences built by interleaving smaller sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sequence {
    /// Dialogue carriers mixed into Bob's message pairs.
    Carriers,
    QA,
    QB,
    QAPrime,
    QADoublePrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Decision {
    CheckBits(Party),
    CheckPositions(Party),
    /// Bob's uniformly random pairs: message pairs, or dialogue carriers.
    RandomPairs,
    /// Dialogue: Ψ (true) or Φ (false) option per bit of Bob's message.
    QdPairClass,
    /// Dialogue: second operator option per bit of Alice's message.
    QdOperator,
    Decoys(DecoySet),
    Interleave(Sequence),
    /// Indices of `S_A` that carry Alice's identity.
    IdentityCarriers,
    /// Alice's random Paulis on `I_A`.
    IdentityMasks,
    Covers,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ScriptValue {
    Bits(BitString),
    Flags(Vec<bool>),
    Positions(Vec<usize>),
    Labels(Vec<BellLabel>),
    Qubits(Vec<ProductQubit>),
    Paulis(Vec<PauliOp>),
    Covers(Vec<CoverOp>),
    /// Source set index for each element of an interleaved sequence.
    Pattern(Vec<usize>),
}

pub trait Randomness {
    fn rng(&mut self) -> &mut dyn RngCore;

    /// A pinned value for `decision`, if any.
    fn scripted(&mut self, _decision: Decision) -> Option<ScriptValue> {
        None
    }
}

/// Plain ChaCha8 randomness.
#[derive(Clone, Debug)]
pub struct Seeded(ChaCha8Rng);

impl Seeded {
    pub fn new(seed: u64) -> Self {
        Seeded(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent stream `trial` under a master seed.
    pub fn for_trial(master: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(trial);
        Seeded(rng)
    }
}

impl Randomness for Seeded {
    fn rng(&mut self) -> &mut dyn RngCore {
        &mut self.0
    }
}

/// Pinned decisions on top of a seeded RNG. Each pinned value is used once.
#[derive(Clone, Debug)]
pub struct Scripted {
    rng: ChaCha8Rng,
    entries: BTreeMap<Decision, ScriptValue>,
}

impl Scripted {
    pub fn new(seed: u64) -> Self {
        Scripted {
            rng: ChaCha8Rng::seed_from_u64(seed),
            entries: BTreeMap::new(),
        }
    }

    pub fn with(mut self, decision: Decision, value: ScriptValue) -> Self {
        self.entries.insert(decision, value);
        self
    }

    pub fn set(&mut self, decision: Decision, value: ScriptValue) {
        self.entries.insert(decision, value);
    }

    /// Decisions that were pinned but never asked for.
    pub fn unused(&self) -> Vec<Decision> {
        self.entries.keys().copied().collect()
    }
}

impl Randomness for Scripted {
    fn rng(&mut self) -> &mut dyn RngCore {
        &mut self.rng
    }

    fn scripted(&mut self, decision: Decision) -> Option<ScriptValue> {
        self.entries.remove(&decision)
    }
}
