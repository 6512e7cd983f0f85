//! Phase-free symbolic algebra for Bell pairs, Pauli operators, cover
//! operations and basis-tagged single qubits.
//!
//! Every state and operator here is tracked modulo global phase. The four
//! Bell states are encoded as the Pauli applied to one half of `Φ+`
//! (`Φ+ ↔ I`, `Ψ+ ↔ X`, `Ψ− ↔ iY`, `Φ− ↔ Z`), which turns every rule about
//! acting on a pair into a group operation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Single-qubit Pauli operator modulo global phase. `Y` stands for `iσy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub const ALL: [PauliOp; 4] = [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z];

    // (x, z) symplectic bits; composition is XOR.
    fn bits(self) -> (bool, bool) {
        match self {
            PauliOp::I => (false, false),
            PauliOp::X => (true, false),
            PauliOp::Y => (true, true),
            PauliOp::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliOp::I,
            (true, false) => PauliOp::X,
            (true, true) => PauliOp::Y,
            (false, true) => PauliOp::Z,
        }
    }

    /// Flips the computational-basis bit (X or Y component).
    pub fn flips_z_basis(self) -> bool {
        self.bits().0
    }

    /// Flips the `|±⟩` bit (Z or Y component).
    pub fn flips_x_basis(self) -> bool {
        self.bits().1
    }

    /// Two-bit message encoding: 00→I, 01→σx, 10→iσy, 11→σz.
    pub fn from_message_bits(hi: bool, lo: bool) -> Self {
        match (hi, lo) {
            (false, false) => PauliOp::I,
            (false, true) => PauliOp::X,
            (true, false) => PauliOp::Y,
            (true, true) => PauliOp::Z,
        }
    }

    pub fn message_bits(self) -> (bool, bool) {
        match self {
            PauliOp::I => (false, false),
            PauliOp::X => (false, true),
            PauliOp::Y => (true, false),
            PauliOp::Z => (true, true),
        }
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PauliOp::I => "I",
            PauliOp::X => "σx",
            PauliOp::Y => "iσy",
            PauliOp::Z => "σz",
        };
        f.write_str(s)
    }
}

/// Product of two Paulis modulo global phase.
pub fn compose_pauli(p: PauliOp, q: PauliOp) -> PauliOp {
    let (px, pz) = p.bits();
    let (qx, qz) = q.bits();
    PauliOp::from_bits(px ^ qx, pz ^ qz)
}

/// One of the four Bell states, without phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    #[serde(rename = "Phi+")]
    PhiPlus,
    #[serde(rename = "Phi-")]
    PhiMinus,
    #[serde(rename = "Psi+")]
    PsiPlus,
    #[serde(rename = "Psi-")]
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    /// Pauli that takes `Φ+` to this label when applied to either half.
    pub fn as_pauli(self) -> PauliOp {
        match self {
            BellLabel::PhiPlus => PauliOp::I,
            BellLabel::PsiPlus => PauliOp::X,
            BellLabel::PsiMinus => PauliOp::Y,
            BellLabel::PhiMinus => PauliOp::Z,
        }
    }

    pub fn from_pauli(p: PauliOp) -> Self {
        match p {
            PauliOp::I => BellLabel::PhiPlus,
            PauliOp::X => BellLabel::PsiPlus,
            PauliOp::Y => BellLabel::PsiMinus,
            PauliOp::Z => BellLabel::PhiMinus,
        }
    }

    /// Identity-string encoding of a 2-bit chunk: 00→Φ+, 01→Φ−, 10→Ψ+, 11→Ψ−.
    pub fn from_identity_bits(hi: bool, lo: bool) -> Self {
        match (hi, lo) {
            (false, false) => BellLabel::PhiPlus,
            (false, true) => BellLabel::PhiMinus,
            (true, false) => BellLabel::PsiPlus,
            (true, true) => BellLabel::PsiMinus,
        }
    }

    /// `Ψ±` (anti-correlated in Z).
    pub fn is_psi(self) -> bool {
        matches!(self, BellLabel::PsiPlus | BellLabel::PsiMinus)
    }

    /// `Φ−` or `Ψ−` (anti-correlated in X).
    pub fn is_minus(self) -> bool {
        matches!(self, BellLabel::PhiMinus | BellLabel::PsiMinus)
    }

    /// Whether the two halves disagree when both are measured in `basis`.
    pub fn anticorrelated_in(self, basis: Basis) -> bool {
        match basis {
            Basis::Z => self.is_psi(),
            Basis::X => self.is_minus(),
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellLabel::PhiPlus => "Φ+",
            BellLabel::PhiMinus => "Φ−",
            BellLabel::PsiPlus => "Ψ+",
            BellLabel::PsiMinus => "Ψ−",
        };
        f.write_str(s)
    }
}

/// Applies `p` to one half of a pair. Side-independent modulo phase.
pub fn apply_pauli_to_bell(p: PauliOp, label: BellLabel) -> BellLabel {
    BellLabel::from_pauli(compose_pauli(p, label.as_pauli()))
}

/// The Pauli that maps `initial` to `measured`.
pub fn pauli_between(initial: BellLabel, measured: BellLabel) -> PauliOp {
    compose_pauli(measured.as_pauli(), initial.as_pauli())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn flipped(self) -> Self {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
        })
    }
}

/// Eigenstate of Z or X: `(Z,0)=|0⟩`, `(Z,1)=|1⟩`, `(X,0)=|+⟩`, `(X,1)=|−⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductQubit {
    pub basis: Basis,
    pub bit: bool,
}

impl ProductQubit {
    pub const ZERO: ProductQubit = ProductQubit {
        basis: Basis::Z,
        bit: false,
    };
    pub const ONE: ProductQubit = ProductQubit {
        basis: Basis::Z,
        bit: true,
    };
    pub const PLUS: ProductQubit = ProductQubit {
        basis: Basis::X,
        bit: false,
    };
    pub const MINUS: ProductQubit = ProductQubit {
        basis: Basis::X,
        bit: true,
    };
    pub const ALL: [ProductQubit; 4] = [Self::ZERO, Self::ONE, Self::PLUS, Self::MINUS];

    pub fn new(basis: Basis, bit: bool) -> Self {
        ProductQubit { basis, bit }
    }

    pub fn ket(self) -> &'static str {
        match (self.basis, self.bit) {
            (Basis::Z, false) => "|0>",
            (Basis::Z, true) => "|1>",
            (Basis::X, false) => "|+>",
            (Basis::X, true) => "|->",
        }
    }

    fn symbol(self) -> &'static str {
        match (self.basis, self.bit) {
            (Basis::Z, false) => "0",
            (Basis::Z, true) => "1",
            (Basis::X, false) => "+",
            (Basis::X, true) => "-",
        }
    }
}

impl fmt::Display for ProductQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ket())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognised qubit state `{0}` (expected 0, 1, + or -)")]
pub struct ParseQubitError(String);

impl FromStr for ProductQubit {
    type Err = ParseQubitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('>')
            .trim_end_matches('⟩');
        match inner {
            "0" => Ok(Self::ZERO),
            "1" => Ok(Self::ONE),
            "+" => Ok(Self::PLUS),
            "-" | "−" => Ok(Self::MINUS),
            _ => Err(ParseQubitError(s.to_string())),
        }
    }
}

impl Serialize for ProductQubit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for ProductQubit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Applies a Pauli to a basis-tagged qubit.
pub fn apply_pauli_to_product(p: PauliOp, q: ProductQubit) -> ProductQubit {
    let flip = match q.basis {
        Basis::Z => p.flips_z_basis(),
        Basis::X => p.flips_x_basis(),
    };
    ProductQubit::new(q.basis, q.bit ^ flip)
}

/// Cover operation `{I, iσy, H, iσy·H}`. `YH` means H first, then iσy.
///
/// Modulo phase the four covers form a Klein four-group and each is its own
/// inverse, so "uncovering" is applying the same cover again.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoverOp {
    I,
    Y,
    H,
    YH,
}

impl CoverOp {
    pub const ALL: [CoverOp; 4] = [CoverOp::I, CoverOp::Y, CoverOp::H, CoverOp::YH];

    fn bits(self) -> (bool, bool) {
        match self {
            CoverOp::I => (false, false),
            CoverOp::Y => (true, false),
            CoverOp::H => (false, true),
            CoverOp::YH => (true, true),
        }
    }

    fn from_bits(y: bool, h: bool) -> Self {
        match (y, h) {
            (false, false) => CoverOp::I,
            (true, false) => CoverOp::Y,
            (false, true) => CoverOp::H,
            (true, true) => CoverOp::YH,
        }
    }

    /// Contains a Hadamard, i.e. exchanges the Z and X bases.
    pub fn has_hadamard(self) -> bool {
        self.bits().1
    }

    /// Product of two covers modulo phase.
    pub fn compose(self, other: CoverOp) -> CoverOp {
        let (ay, ah) = self.bits();
        let (by, bh) = other.bits();
        CoverOp::from_bits(ay ^ by, ah ^ bh)
    }

    pub fn inverse(self) -> CoverOp {
        self
    }

    /// `C† P C`: the Pauli that, applied *before* this cover, has the same
    /// effect as `p` applied after it.
    pub fn conjugate(self, p: PauliOp) -> PauliOp {
        if !self.has_hadamard() {
            return p;
        }
        match p {
            PauliOp::X => PauliOp::Z,
            PauliOp::Z => PauliOp::X,
            other => other,
        }
    }

    /// The Pauli equivalent of a cover without a Hadamard.
    pub fn as_pauli(self) -> Option<PauliOp> {
        match self {
            CoverOp::I => Some(PauliOp::I),
            CoverOp::Y => Some(PauliOp::Y),
            _ => None,
        }
    }
}

impl fmt::Display for CoverOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoverOp::I => "I",
            CoverOp::Y => "iσy",
            CoverOp::H => "H",
            CoverOp::YH => "iσyH",
        })
    }
}

pub fn apply_cover_to_product(c: CoverOp, q: ProductQubit) -> ProductQubit {
    let (y, h) = c.bits();
    let basis = if h { q.basis.flipped() } else { q.basis };
    ProductQubit::new(basis, q.bit ^ y)
}

/// Basis in which a covered qubit prepared in `prep_basis` must be measured.
pub fn effective_basis(prep_basis: Basis, c: CoverOp) -> Basis {
    if c.has_hadamard() {
        prep_basis.flipped()
    } else {
        prep_basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BellLabel::*;

    #[test]
    fn compose_examples() {
        assert_eq!(compose_pauli(PauliOp::X, PauliOp::X), PauliOp::I);
        assert_eq!(compose_pauli(PauliOp::I, PauliOp::Y), PauliOp::Y);
        assert_eq!(compose_pauli(PauliOp::X, PauliOp::Z), PauliOp::Y);
    }

    #[test]
    fn group_laws() {
        for p in PauliOp::ALL {
            assert_eq!(compose_pauli(p, p), PauliOp::I);
            for q in PauliOp::ALL {
                assert_eq!(compose_pauli(p, q), compose_pauli(q, p));
                for r in PauliOp::ALL {
                    assert_eq!(
                        compose_pauli(p, compose_pauli(q, r)),
                        compose_pauli(compose_pauli(p, q), r)
                    );
                }
            }
        }
    }

    #[test]
    fn pauli_on_bell_examples() {
        assert_eq!(apply_pauli_to_bell(PauliOp::X, PhiPlus), PsiPlus);
        assert_eq!(apply_pauli_to_bell(PauliOp::Y, PsiMinus), PhiPlus);
        assert_eq!(apply_pauli_to_bell(PauliOp::I, PhiMinus), PhiMinus);
    }

    #[test]
    fn pauli_on_bell_full_map() {
        let swaps = [
            (PauliOp::X, [(PhiPlus, PsiPlus), (PhiMinus, PsiMinus)]),
            (PauliOp::Y, [(PhiPlus, PsiMinus), (PhiMinus, PsiPlus)]),
            (PauliOp::Z, [(PhiPlus, PhiMinus), (PsiPlus, PsiMinus)]),
        ];
        for (p, pairs) in swaps {
            for (a, b) in pairs {
                assert_eq!(apply_pauli_to_bell(p, a), b);
                assert_eq!(apply_pauli_to_bell(p, b), a);
            }
        }
    }

    #[test]
    fn table_closure_and_round_trip() {
        for p in PauliOp::ALL {
            let image: std::collections::BTreeSet<_> = BellLabel::ALL
                .iter()
                .map(|&l| apply_pauli_to_bell(p, l))
                .collect();
            assert_eq!(image.len(), 4);
            for l in BellLabel::ALL {
                assert_eq!(apply_pauli_to_bell(p, apply_pauli_to_bell(p, l)), l);
                assert_eq!(pauli_between(l, apply_pauli_to_bell(p, l)), p);
            }
        }
    }

    #[test]
    fn cover_examples() {
        assert_eq!(
            apply_cover_to_product(CoverOp::H, ProductQubit::PLUS),
            ProductQubit::ZERO
        );
        assert_eq!(
            apply_cover_to_product(CoverOp::Y, ProductQubit::ZERO),
            ProductQubit::ONE
        );
        assert_eq!(
            apply_cover_to_product(CoverOp::I, ProductQubit::PLUS),
            ProductQubit::PLUS
        );
        assert_eq!(
            apply_cover_to_product(CoverOp::YH, ProductQubit::ONE),
            ProductQubit::PLUS
        );
    }

    #[test]
    fn cover_closure() {
        for c in CoverOp::ALL {
            for q in ProductQubit::ALL {
                let covered = apply_cover_to_product(c, q);
                assert!(ProductQubit::ALL.contains(&covered));
                assert_eq!(apply_cover_to_product(c.inverse(), covered), q);
                assert_eq!(covered.basis, effective_basis(q.basis, c));
            }
            for d in CoverOp::ALL {
                for q in ProductQubit::ALL {
                    assert_eq!(
                        apply_cover_to_product(d, apply_cover_to_product(c, q)),
                        apply_cover_to_product(d.compose(c), q)
                    );
                }
            }
        }
    }

    #[test]
    fn effective_basis_examples() {
        assert_eq!(effective_basis(Basis::Z, CoverOp::YH), Basis::X);
        assert_eq!(effective_basis(Basis::X, CoverOp::H), Basis::Z);
        assert_eq!(effective_basis(Basis::Z, CoverOp::I), Basis::Z);
    }

    #[test]
    fn conjugation_commutes_through_product_qubits() {
        for c in CoverOp::ALL {
            for p in PauliOp::ALL {
                for q in ProductQubit::ALL {
                    let after = apply_pauli_to_product(p, apply_cover_to_product(c, q));
                    let before =
                        apply_cover_to_product(c, apply_pauli_to_product(c.conjugate(p), q));
                    assert_eq!(after, before);
                }
            }
        }
    }

    #[test]
    fn product_qubit_parses_kets() {
        for q in ProductQubit::ALL {
            assert_eq!(q.ket().parse::<ProductQubit>().unwrap(), q);
        }
        assert!("2".parse::<ProductQubit>().is_err());
    }
}
