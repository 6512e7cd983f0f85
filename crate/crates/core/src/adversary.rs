//! Channel noise and eavesdropper strategies.
//!
//! Everything here sees only what travels on a quantum link or is broadcast
//! publicly. None of these functions take identity strings or messages.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{BellDiagonalDist, RateSamples};
use crate::pauli::{Basis, BellLabel, PauliOp, ProductQubit};
use crate::register::{Party, QuantumError, Register, Role, SlotId};

/// Independent Pauli channel: each qubit on each traversal picks one of
/// `I, X, Y, Z` with the stored probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Probabilities of `I, X, Y, Z`.
    probs: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("channel probabilities {0:?} must be non-negative and sum to 1")]
    InvalidProbabilities([f64; 4]),
    #[error("error probability {0} outside [0, 1]")]
    InvalidErrorProbability(f64),
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl ChannelModel {
    pub fn noiseless() -> Self {
        Self {
            probs: [1.0, 0.0, 0.0, 0.0],
        }
    }

    /// With probability `p` one of `X, Y, Z` uniformly.
    pub fn uniform(p: f64) -> Result<Self, ChannelError> {
        Self::with_error_distribution(p, [1.0, 1.0, 1.0])
    }

    /// With probability `p` one of `X, Y, Z`, weighted by `weights`.
    pub fn with_error_distribution(p: f64, weights: [f64; 3]) -> Result<Self, ChannelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::InvalidErrorProbability(p));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || total <= 0.0 {
            return Err(ChannelError::InvalidProbabilities([
                1.0 - p,
                weights[0],
                weights[1],
                weights[2],
            ]));
        }
        let [wx, wy, wz] = weights.map(|w| p * w / total);
        Ok(Self {
            probs: [1.0 - p, wx, wy, wz],
        })
    }

    /// Channel that turns `Φ+` into the Bell-diagonal state `dist`:
    /// `δ1→I, δ2→Z, δ3→X, δ4→Y`.
    pub fn bell_diagonal(dist: &BellDiagonalDist) -> Self {
        let [d1, d2, d3, d4] = dist.weights();
        Self {
            probs: [d1, d3, d4, d2],
        }
    }

    pub fn from_probabilities(probs: [f64; 4]) -> Result<Self, ChannelError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| *p < 0.0 || !p.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(ChannelError::InvalidProbabilities(probs));
        }
        Ok(Self { probs })
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.probs
    }

    pub fn error_probability(&self) -> f64 {
        1.0 - self.probs[0]
    }

    pub fn is_noiseless(&self) -> bool {
        self.probs[0] >= 1.0
    }

    /// Expected `(ε_z, ε_x)` for one traversal of half of a pair.
    pub fn expected_rates(&self) -> (f64, f64) {
        let [_, x, y, z] = self.probs;
        (x + y, z + y)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliOp {
        if self.is_noiseless() {
            return PauliOp::I;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (p, op) in self.probs.iter().zip(PauliOp::ALL) {
            acc += p;
            if u < acc {
                return op;
            }
        }
        PauliOp::Z
    }
}

/// Sends one qubit through `model`; returns the Pauli that hit it.
pub fn apply_channel<R: Rng + ?Sized>(
    register: &mut Register,
    slot: SlotId,
    model: &ChannelModel,
    rng: &mut R,
) -> Result<PauliOp, QuantumError> {
    let op = model.sample(rng);
    if op != PauliOp::I {
        register.apply_pauli(slot, op)?;
    }
    Ok(op)
}

/// Quantum links of the three protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Link {
    BobToAlice,
    AliceToUtp,
    BobToUtp,
}

impl Link {
    pub fn endpoints(self) -> (Party, Party) {
        match self {
            Link::BobToAlice => (Party::Bob, Party::Alice),
            Link::AliceToUtp => (Party::Alice, Party::Utp),
            Link::BobToUtp => (Party::Bob, Party::Utp),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::BobToAlice => "bob-to-alice",
            Link::AliceToUtp => "alice-to-utp",
            Link::BobToUtp => "bob-to-utp",
        })
    }
}

impl FromStr for Link {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bob-to-alice" => Ok(Link::BobToAlice),
            "alice-to-utp" => Ok(Link::AliceToUtp),
            "bob-to-utp" => Ok(Link::BobToUtp),
            other => Err(format!("unknown link `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisPolicy {
    #[default]
    Uniform,
    Fixed(Basis),
}

impl BasisPolicy {
    pub fn pick<R: Rng + ?Sized>(self, rng: &mut R) -> Basis {
        match self {
            BasisPolicy::Uniform => {
                if rng.random::<bool>() {
                    Basis::X
                } else {
                    Basis::Z
                }
            }
            BasisPolicy::Fixed(b) => b,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum AdversaryStrategy {
    #[default]
    None,
    /// Eve captures `Q_A` on its way to Alice and plays Alice's part.
    ImpersonateAlice,
    /// Eve plays Bob's part from the start.
    ImpersonateBob,
    /// Eve measures every qubit on `link` and resends what she saw.
    InterceptResend { link: Link, policy: BasisPolicy },
}

impl AdversaryStrategy {
    pub fn impersonates_alice(&self) -> bool {
        matches!(self, AdversaryStrategy::ImpersonateAlice)
    }

    pub fn impersonates_bob(&self) -> bool {
        matches!(self, AdversaryStrategy::ImpersonateBob)
    }

    pub fn intercepts(&self, link: Link) -> Option<BasisPolicy> {
        match *self {
            AdversaryStrategy::InterceptResend { link: l, policy } if l == link => Some(policy),
            _ => None,
        }
    }
}

impl fmt::Display for AdversaryStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryStrategy::None => f.write_str("none"),
            AdversaryStrategy::ImpersonateAlice => f.write_str("impersonate-alice"),
            AdversaryStrategy::ImpersonateBob => f.write_str("impersonate-bob"),
            AdversaryStrategy::InterceptResend { link, policy } => match policy {
                BasisPolicy::Uniform => write!(f, "intercept-resend:{link}"),
                BasisPolicy::Fixed(b) => write!(f, "intercept-resend:{link}:{b}"),
            },
        }
    }
}

impl FromStr for AdversaryStrategy {
    type Err = String;

    /// `none`, `impersonate-alice`, `impersonate-bob`,
    /// `intercept-resend:<link>[:Z|X]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => return Ok(AdversaryStrategy::None),
            "impersonate-alice" => return Ok(AdversaryStrategy::ImpersonateAlice),
            "impersonate-bob" => return Ok(AdversaryStrategy::ImpersonateBob),
            _ => {}
        }
        let mut parts = s.split(':');
        if parts.next() != Some("intercept-resend") {
            return Err(format!("unknown adversary `{s}`"));
        }
        let link = parts
            .next()
            .ok_or("intercept-resend needs a link")?
            .parse()?;
        let policy = match parts.next() {
            None => BasisPolicy::Uniform,
            Some("Z") | Some("z") => BasisPolicy::Fixed(Basis::Z),
            Some("X") | Some("x") => BasisPolicy::Fixed(Basis::X),
            Some(other) => return Err(format!("unknown basis policy `{other}`")),
        };
        if parts.next().is_some() {
            return Err(format!("trailing fields in `{s}`"));
        }
        Ok(AdversaryStrategy::InterceptResend { link, policy })
    }
}

/// Eve measures a qubit in transit and forwards a fresh qubit matching her
/// outcome. Returns what she forwarded.
pub fn eve_intercept_resend<R: Rng + ?Sized>(
    policy: BasisPolicy,
    register: &mut Register,
    slot: SlotId,
    rng: &mut R,
) -> Result<ProductQubit, QuantumError> {
    let basis = policy.pick(rng);
    let bit = register.measure_single(slot, basis, rng)?;
    let forwarded = ProductQubit::new(basis, bit);
    register.resend(slot, forwarded)?;
    Ok(forwarded)
}

/// What an impostor Alice applies to the identity carriers: uniform Paulis,
/// since she does not hold `Id_A`.
pub fn impostor_identity_paulis<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<PauliOp> {
    (0..k)
        .map(|_| PauliOp::ALL[rng.random_range(0..4)])
        .collect()
}

/// What an impostor Bob prepares for the identity pairs: uniform labels,
/// since he does not hold `Id_B`.
pub fn impostor_identity_pairs<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<BellLabel> {
    (0..k)
        .map(|_| BellLabel::ALL[rng.random_range(0..4)])
        .collect()
}

/// Virtual-qubit estimate of `(ε_z, ε_x)` on one link: `pairs` copies of `Φ+`
/// have one half sent through `model` (and `adversary`, if it targets
/// `link`), then both halves are measured in a common random basis.
pub fn sacrificed_pair_samples<R: Rng + ?Sized>(
    pairs: usize,
    link: Link,
    model: &ChannelModel,
    adversary: &AdversaryStrategy,
    rng: &mut R,
) -> Result<RateSamples, QuantumError> {
    let mut reg = Register::new();
    let mut samples = RateSamples::default();
    let (from, to) = link.endpoints();
    for i in 0..pairs {
        let names = [format!("v{}", i + 1), format!("w{}", i + 1)];
        let (sent, kept) = reg.prepare_pair(BellLabel::PhiPlus, Role::Estimation, from, names);
        if let Some(policy) = adversary.intercepts(link) {
            eve_intercept_resend(policy, &mut reg, sent, rng)?;
        }
        apply_channel(&mut reg, sent, model, rng)?;
        reg.set_holder(sent, to)?;
        let basis = if rng.random::<bool>() {
            Basis::X
        } else {
            Basis::Z
        };
        let a = reg.measure_single(sent, basis, rng)?;
        let b = reg.measure_single(kept, basis, rng)?;
        let counter = match basis {
            Basis::Z => &mut samples.z,
            Basis::X => &mut samples.x,
        };
        counter.1 += 1;
        if a != b {
            counter.0 += 1;
        }
    }
    Ok(samples)
}
