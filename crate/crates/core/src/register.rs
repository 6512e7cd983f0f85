//! Qubit register holding Bell-pair halves and basis-tagged product qubits.
//!
//! States stay symbolic: a pair is a [`BellLabel`], a lone qubit is a
//! [`ProductQubit`]. A cover on an entangled half is kept as a pending
//! annotation on the slot, since `H` on one half leaves the Bell basis.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::pauli::{
    apply_cover_to_product, apply_pauli_to_bell, apply_pauli_to_product, compose_pauli, Basis,
    BellLabel, CoverOp, PauliOp, ProductQubit,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairId(pub usize);

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "slot#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
    Utp,
    Eve,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
            Party::Utp => "utp",
            Party::Eve => "eve",
        })
    }
}

/// Bookkeeping tag. Never consulted by the measurement rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Message,
    Identity,
    Decoy,
    CheckCarrier,
    Estimation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Content {
    Half { pair: PairId, cover: CoverOp },
    Product(ProductQubit),
    Measured,
}

#[derive(Clone, Debug)]
pub struct Slot {
    pub role: Role,
    pub holder: Party,
    pub name: String,
    content: Content,
}

impl Slot {
    pub fn content(&self) -> Content {
        self.content
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairState {
    pub label: BellLabel,
    pub halves: [SlotId; 2],
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuantumError {
    #[error("{0} has already been measured")]
    AlreadyMeasured(SlotId),
    #[error("Bell measurement needs two distinct slots, got {0} twice")]
    SameSlot(SlotId),
    #[error("{0} is an entangled half still under a Hadamard-type cover")]
    CoveredHalf(SlotId),
    #[error("{0} does not exist")]
    UnknownSlot(SlotId),
}

/// Uniform draws used by the measurement rules. Implemented for every RNG;
/// tests implement it directly to enumerate all branches exactly.
pub trait Coin {
    /// Uniform integer in `0..n`.
    fn choose(&mut self, n: usize) -> usize;
}

impl<R: RngCore + ?Sized> Coin for R {
    fn choose(&mut self, n: usize) -> usize {
        self.random_range(0..n)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Register {
    slots: Vec<Slot>,
    pairs: Vec<PairState>,
}

impl Register {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, id: SlotId) -> Result<&Slot, QuantumError> {
        self.slots.get(id.0).ok_or(QuantumError::UnknownSlot(id))
    }

    fn slot_mut(&mut self, id: SlotId) -> Result<&mut Slot, QuantumError> {
        self.slots
            .get_mut(id.0)
            .ok_or(QuantumError::UnknownSlot(id))
    }

    pub fn pair(&self, id: PairId) -> &PairState {
        &self.pairs[id.0]
    }

    /// Live label of the pair a slot belongs to, ignoring any pending cover.
    pub fn pair_label_of(&self, id: SlotId) -> Option<BellLabel> {
        match self.slots.get(id.0)?.content {
            Content::Half { pair, .. } => Some(self.pairs[pair.0].label),
            _ => None,
        }
    }

    pub fn set_role(&mut self, id: SlotId, role: Role) -> Result<(), QuantumError> {
        self.slot_mut(id)?.role = role;
        Ok(())
    }

    pub fn set_holder(&mut self, id: SlotId, holder: Party) -> Result<(), QuantumError> {
        self.slot_mut(id)?.holder = holder;
        Ok(())
    }

    pub fn prepare_pair(
        &mut self,
        label: BellLabel,
        role: Role,
        holder: Party,
        names: [String; 2],
    ) -> (SlotId, SlotId) {
        let pair = PairId(self.pairs.len());
        let [na, nb] = names;
        let a = self.push(
            role,
            holder,
            na,
            Content::Half {
                pair,
                cover: CoverOp::I,
            },
        );
        let b = self.push(
            role,
            holder,
            nb,
            Content::Half {
                pair,
                cover: CoverOp::I,
            },
        );
        self.pairs.push(PairState {
            label,
            halves: [a, b],
            alive: true,
        });
        (a, b)
    }

    pub fn prepare_product(
        &mut self,
        q: ProductQubit,
        role: Role,
        holder: Party,
        name: String,
    ) -> SlotId {
        self.push(role, holder, name, Content::Product(q))
    }

    fn push(&mut self, role: Role, holder: Party, name: String, content: Content) -> SlotId {
        let id = SlotId(self.slots.len());
        self.slots.push(Slot {
            role,
            holder,
            name,
            content,
        });
        id
    }

    pub fn apply_pauli(&mut self, id: SlotId, p: PauliOp) -> Result<(), QuantumError> {
        match self.slot(id)?.content {
            Content::Measured => Err(QuantumError::AlreadyMeasured(id)),
            Content::Product(q) => {
                self.slot_mut(id)?.content = Content::Product(apply_pauli_to_product(p, q));
                Ok(())
            }
            Content::Half { pair, cover } => {
                // P·C = C·(C†PC): push the Pauli under the pending cover.
                let pair = &mut self.pairs[pair.0];
                pair.label = apply_pauli_to_bell(cover.conjugate(p), pair.label);
                Ok(())
            }
        }
    }

    pub fn apply_cover(&mut self, id: SlotId, c: CoverOp) -> Result<(), QuantumError> {
        let slot = self.slot_mut(id)?;
        slot.content = match slot.content {
            Content::Measured => return Err(QuantumError::AlreadyMeasured(id)),
            Content::Product(q) => Content::Product(apply_cover_to_product(c, q)),
            Content::Half { pair, cover } => Content::Half {
                pair,
                cover: c.compose(cover),
            },
        };
        Ok(())
    }

    /// Applies the inverse of `c`.
    pub fn uncover(&mut self, id: SlotId, c: CoverOp) -> Result<(), QuantumError> {
        self.apply_cover(id, c.inverse())
    }

    /// Replaces the content of a slot with a freshly prepared product qubit
    /// (intercept-and-resend). Any entanglement the slot had is broken first
    /// by the caller's measurement.
    pub fn resend(&mut self, id: SlotId, q: ProductQubit) -> Result<(), QuantumError> {
        let slot = self.slot_mut(id)?;
        slot.content = Content::Product(q);
        Ok(())
    }

    /// Single-qubit measurement in `basis`. The slot is consumed.
    pub fn measure_single<C: Coin + ?Sized>(
        &mut self,
        id: SlotId,
        basis: Basis,
        coin: &mut C,
    ) -> Result<bool, QuantumError> {
        let outcome = match self.slot(id)?.content {
            Content::Measured => return Err(QuantumError::AlreadyMeasured(id)),
            Content::Product(q) => {
                if q.basis == basis {
                    q.bit
                } else {
                    coin.choose(2) == 1
                }
            }
            Content::Half { pair, cover } => {
                let bit = coin.choose(2) == 1;
                // Seeing `bit` on C·h is projecting the bare half h onto C†|basis,bit⟩.
                let projected =
                    apply_cover_to_product(cover.inverse(), ProductQubit::new(basis, bit));
                let state = self.pairs[pair.0];
                let partner = if state.halves[0] == id {
                    state.halves[1]
                } else {
                    state.halves[0]
                };
                self.collapse_partner(
                    partner,
                    apply_pauli_to_product(state.label.as_pauli(), projected),
                )?;
                self.pairs[pair.0].alive = false;
                bit
            }
        };
        self.slot_mut(id)?.content = Content::Measured;
        Ok(outcome)
    }

    /// Sets an entangled half to the product state its bare qubit collapsed
    /// to, re-applying whatever cover was pending on it.
    fn collapse_partner(&mut self, id: SlotId, bare: ProductQubit) -> Result<(), QuantumError> {
        let slot = self.slot_mut(id)?;
        if let Content::Half { cover, .. } = slot.content {
            slot.content = Content::Product(apply_cover_to_product(cover, bare));
        }
        Ok(())
    }

    // Folds a Pauli-type pending cover into the pair label. Hadamard-type
    // covers have no Bell-label form.
    fn bare_half(&mut self, id: SlotId) -> Result<Option<PairId>, QuantumError> {
        match self.slot(id)?.content {
            Content::Measured => Err(QuantumError::AlreadyMeasured(id)),
            Content::Product(_) => Ok(None),
            Content::Half { pair, cover } => {
                let p = cover.as_pauli().ok_or(QuantumError::CoveredHalf(id))?;
                let st = &mut self.pairs[pair.0];
                st.label = apply_pauli_to_bell(p, st.label);
                self.slot_mut(id)?.content = Content::Half {
                    pair,
                    cover: CoverOp::I,
                };
                Ok(Some(pair))
            }
        }
    }

    /// Joint measurement of two slots in the Bell basis. Both are consumed.
    pub fn measure_bell<C: Coin + ?Sized>(
        &mut self,
        a: SlotId,
        b: SlotId,
        coin: &mut C,
    ) -> Result<BellLabel, QuantumError> {
        if a == b {
            return Err(QuantumError::SameSlot(a));
        }
        for id in [a, b] {
            match self.slot(id)?.content {
                Content::Measured => return Err(QuantumError::AlreadyMeasured(id)),
                Content::Half { cover, .. } if cover.as_pauli().is_none() => {
                    return Err(QuantumError::CoveredHalf(id))
                }
                _ => {}
            }
        }
        let pa = self.bare_half(a)?;
        let pb = self.bare_half(b)?;
        let outcome = match (pa, pb) {
            (Some(x), Some(y)) if x == y => {
                self.pairs[x.0].alive = false;
                self.pairs[x.0].label
            }
            (Some(x), Some(y)) => {
                let m = BellLabel::ALL[coin.choose(4)];
                let lx = self.pairs[x.0].label;
                let ly = self.pairs[y.0].label;
                let rest_x = self.other_half(x, a);
                let rest_y = self.other_half(y, b);
                self.pairs[x.0].alive = false;
                self.pairs[y.0].alive = false;
                let label = BellLabel::from_pauli(compose_pauli(
                    m.as_pauli(),
                    compose_pauli(lx.as_pauli(), ly.as_pauli()),
                ));
                let joined = PairId(self.pairs.len());
                self.pairs.push(PairState {
                    label,
                    halves: [rest_x, rest_y],
                    alive: true,
                });
                for id in [rest_x, rest_y] {
                    if let Content::Half { cover, .. } = self.slot(id)?.content {
                        self.slot_mut(id)?.content = Content::Half {
                            pair: joined,
                            cover,
                        };
                    }
                }
                m
            }
            (Some(x), None) => self.teleport(x, a, b, coin)?,
            (None, Some(y)) => self.teleport(y, b, a, coin)?,
            (None, None) => {
                let (qa, qb) = match (self.slot(a)?.content, self.slot(b)?.content) {
                    (Content::Product(qa), Content::Product(qb)) => (qa, qb),
                    _ => unreachable!("non-half slots are products here"),
                };
                product_bell_outcome(qa, qb, coin)
            }
        };
        self.slot_mut(a)?.content = Content::Measured;
        self.slot_mut(b)?.content = Content::Measured;
        Ok(outcome)
    }

    fn other_half(&self, pair: PairId, id: SlotId) -> SlotId {
        let h = self.pairs[pair.0].halves;
        if h[0] == id {
            h[1]
        } else {
            h[0]
        }
    }

    // Bell measurement of a product qubit with one half of a live pair: the
    // product state reappears on the partner up to the outcome and label Paulis.
    fn teleport<C: Coin + ?Sized>(
        &mut self,
        pair: PairId,
        half: SlotId,
        product: SlotId,
        coin: &mut C,
    ) -> Result<BellLabel, QuantumError> {
        let q = match self.slot(product)?.content {
            Content::Product(q) => q,
            _ => unreachable!("teleport source is a product qubit"),
        };
        let m = BellLabel::ALL[coin.choose(4)];
        let label = self.pairs[pair.0].label;
        let partner = self.other_half(pair, half);
        let correction = compose_pauli(m.as_pauli(), label.as_pauli());
        self.pairs[pair.0].alive = false;
        self.collapse_partner(partner, apply_pauli_to_product(correction, q))?;
        Ok(m)
    }
}

fn product_bell_outcome<C: Coin + ?Sized>(
    a: ProductQubit,
    b: ProductQubit,
    coin: &mut C,
) -> BellLabel {
    use BellLabel::*;
    let candidates = match (a.basis, b.basis) {
        (Basis::Z, Basis::Z) if a.bit == b.bit => [PhiPlus, PhiMinus],
        (Basis::Z, Basis::Z) => [PsiPlus, PsiMinus],
        (Basis::X, Basis::X) if a.bit == b.bit => [PhiPlus, PsiPlus],
        (Basis::X, Basis::X) => [PhiMinus, PsiMinus],
        _ => return BellLabel::ALL[coin.choose(4)],
    };
    candidates[coin.choose(2)]
}

/// Draws a uniformly random Bell label.
pub fn random_label<R: Rng + ?Sized>(rng: &mut R) -> BellLabel {
    BellLabel::ALL[rng.random_range(0..4)]
}
