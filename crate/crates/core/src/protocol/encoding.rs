//! Classical ↔ quantum encoding rules shared by the three protocols.

use rand::seq::index::sample;
use rand::Rng;

use super::{BitString, ConfigError};
use crate::pauli::{apply_pauli_to_bell, pauli_between, BellLabel, PauliOp};

/// Check bits inserted into a message, with their 0-based positions in the
/// extended string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckedMessage {
    pub extended: BitString,
    pub positions: Vec<usize>,
    pub values: BitString,
}

impl CheckedMessage {
    /// Drops the check positions from `received`, recovering the payload.
    pub fn strip(&self, received: &BitString) -> BitString {
        remove_positions(received, &self.positions)
    }

    /// Number of check positions where `received` disagrees with the values.
    pub fn mismatches(&self, received: &BitString) -> usize {
        self.positions
            .iter()
            .zip(self.values.bits())
            .filter(|(&p, &v)| received.get(p) != Some(v))
            .count()
    }
}

/// Places `values` at `positions` (sorted, 0-based, within `|m| + |values|`)
/// and fills the remaining slots with `m` in order.
pub fn insert_check_bits_at(
    m: &BitString,
    positions: &[usize],
    values: &BitString,
) -> Result<CheckedMessage, ConfigError> {
    let total = m.len() + values.len();
    let sorted = positions.windows(2).all(|w| w[0] < w[1]);
    if positions.len() != values.len() || !sorted || positions.last().is_some_and(|&p| p >= total) {
        return Err(ConfigError::CheckPositions {
            positions: positions.to_vec(),
            total,
        });
    }
    let mut out = Vec::with_capacity(total);
    let mut payload = m.bits().iter();
    let mut checks = positions.iter().zip(values.bits()).peekable();
    for i in 0..total {
        match checks.peek() {
            Some((&p, &v)) if p == i => {
                out.push(v);
                checks.next();
            }
            _ => out.push(
                *payload
                    .next()
                    .expect("payload covers the remaining positions"),
            ),
        }
    }
    Ok(CheckedMessage {
        extended: out.into(),
        positions: positions.to_vec(),
        values: values.clone(),
    })
}

/// Inserts `c` uniformly random check bits at uniformly random positions.
pub fn insert_check_bits<R: Rng + ?Sized>(m: &BitString, c: usize, rng: &mut R) -> CheckedMessage {
    let total = m.len() + c;
    let mut positions = sample(rng, total, c).into_vec();
    positions.sort_unstable();
    let values: BitString = (0..c).map(|_| rng.random::<bool>()).collect();
    insert_check_bits_at(m, &positions, &values).expect("sampled positions are valid")
}

pub fn remove_positions(bits: &BitString, positions: &[usize]) -> BitString {
    bits.bits()
        .iter()
        .enumerate()
        .filter(|(i, _)| !positions.contains(i))
        .map(|(_, &b)| b)
        .collect()
}

/// 00→Φ+, 01→Φ−, 10→Ψ+, 11→Ψ− per 2-bit chunk.
pub fn identity_to_bell(id: &BitString) -> Result<Vec<BellLabel>, ConfigError> {
    if !id.len().is_multiple_of(2) {
        return Err(ConfigError::OddIdentity(id.len()));
    }
    Ok(id
        .pairs()
        .map(|(h, l)| BellLabel::from_identity_bits(h, l))
        .collect())
}

/// 00→I, 01→σx, 10→iσy, 11→σz.
pub fn message_to_pauli(hi: bool, lo: bool) -> PauliOp {
    PauliOp::from_message_bits(hi, lo)
}

/// Pauli per 2-bit chunk of an even-length string.
pub fn bits_to_paulis(bits: &BitString) -> Vec<PauliOp> {
    bits.pairs().map(|(h, l)| message_to_pauli(h, l)).collect()
}

/// Recovers the two bits Alice encoded on a pair prepared as `initial`.
pub fn decode_qsdc(initial: BellLabel, measured: BellLabel) -> (bool, bool) {
    pauli_between(initial, measured).message_bits()
}

/// Bob's dialogue preparation: bit 0 → Φ+ or Ψ+, bit 1 → Φ− or Ψ−;
/// `psi` picks the Ψ option.
pub fn qd_prepare_with(bob_bit: bool, psi: bool) -> BellLabel {
    match (bob_bit, psi) {
        (false, false) => BellLabel::PhiPlus,
        (false, true) => BellLabel::PsiPlus,
        (true, false) => BellLabel::PhiMinus,
        (true, true) => BellLabel::PsiMinus,
    }
}

pub fn qd_prepare<R: Rng + ?Sized>(bob_bit: bool, rng: &mut R) -> BellLabel {
    qd_prepare_with(bob_bit, rng.random())
}

/// Alice's dialogue encoding: bit 0 → I or σz, bit 1 → σx or iσy;
/// `second` picks the second option.
pub fn qd_encode_with(alice_bit: bool, second: bool) -> PauliOp {
    match (alice_bit, second) {
        (false, false) => PauliOp::I,
        (false, true) => PauliOp::Z,
        (true, false) => PauliOp::X,
        (true, true) => PauliOp::Y,
    }
}

pub fn qd_encode<R: Rng + ?Sized>(alice_bit: bool, rng: &mut R) -> PauliOp {
    qd_encode_with(alice_bit, rng.random())
}

/// `(alice_bit, bob_bit)`: Bob's bit is the sign class of the prepared pair,
/// Alice's bit is whether the Φ/Ψ class changed.
pub fn qd_decode(initial: BellLabel, measured: BellLabel) -> (bool, bool) {
    (initial.is_psi() != measured.is_psi(), initial.is_minus())
}

/// What Alice infers about the prepared pair from her own operator and the
/// announced result.
pub fn qd_initial_from_alice(op: PauliOp, measured: BellLabel) -> BellLabel {
    apply_pauli_to_bell(op, measured)
}
