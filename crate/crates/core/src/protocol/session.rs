//! Shared machinery for the protocol runners: drawing decisions, moving
//! sequences over links, running security stages and logging it all.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::checks::{decoy_check, verify_authentication, CheckOutcome};
use super::encoding::{insert_check_bits_at, CheckedMessage};
use super::randomness::{Decision, DecoySet, Randomness, ScriptValue, Sequence};
use super::transcript::{
    Event, NoiseHit, Record, SlotRef, Stage, Status, Transcript, TRANSCRIPT_SCHEMA_VERSION,
};
use super::{BitString, ConfigError, Protocol, ProtocolConfig, ProtocolError};
use crate::adversary::{
    apply_channel, eve_intercept_resend, sacrificed_pair_samples, AdversaryStrategy, ChannelModel,
    Link,
};
use crate::metrics::{Estimator, RateSamples, SecurityReport, StageCheck};
use crate::pauli::{
    apply_cover_to_product, effective_basis, Basis, BellLabel, CoverOp, PauliOp, ProductQubit,
};
use crate::register::{random_label, Party, QuantumError, Register, Role, SlotId};

/// Why a runner stopped early.
pub(super) enum Halt {
    Abort(Stage, String),
    Fail(ProtocolError),
}

impl From<ProtocolError> for Halt {
    fn from(e: ProtocolError) -> Self {
        Halt::Fail(e)
    }
}

impl From<QuantumError> for Halt {
    fn from(e: QuantumError) -> Self {
        Halt::Fail(e.into())
    }
}

impl From<ConfigError> for Halt {
    fn from(e: ConfigError) -> Self {
        Halt::Fail(e.into())
    }
}

pub(super) type Flow<T = ()> = Result<T, Halt>;

#[derive(Default)]
pub(super) struct Decoded {
    pub forward: Option<BitString>,
    pub reverse: Option<BitString>,
}

pub(super) struct Session<'a> {
    pub cfg: &'a ProtocolConfig,
    pub adversary: &'a AdversaryStrategy,
    protocol: Protocol,
    channel: &'a ChannelModel,
    rand: &'a mut dyn Randomness,
    pub reg: Register,
    /// Who actually plays Alice and Bob.
    pub alice: Party,
    pub bob: Party,
    step: &'static str,
    records: Vec<Record>,
    stages: Vec<StageCheck>,
    decoy_samples: RateSamples,
    sacrificed: Option<RateSamples>,
    check_samples: (u64, u64),
}

impl<'a> Session<'a> {
    pub fn new(
        protocol: Protocol,
        cfg: &'a ProtocolConfig,
        adversary: &'a AdversaryStrategy,
        channel: &'a ChannelModel,
        rand: &'a mut dyn Randomness,
    ) -> Self {
        Session {
            cfg,
            adversary,
            protocol,
            channel,
            rand,
            reg: Register::new(),
            alice: if adversary.impersonates_alice() {
                Party::Eve
            } else {
                Party::Alice
            },
            bob: if adversary.impersonates_bob() {
                Party::Eve
            } else {
                Party::Bob
            },
            step: "",
            records: Vec::new(),
            stages: Vec::new(),
            decoy_samples: RateSamples::default(),
            sacrificed: None,
            check_samples: (0, 0),
        }
    }

    pub fn rng(&mut self) -> &mut dyn RngCore {
        self.rand.rng()
    }

    pub fn step(&mut self, step: &'static str) {
        self.step = step;
    }

    pub fn log(&mut self, actor: Party, event: Event) {
        let index = self.records.len();
        self.records.push(Record {
            index,
            step: self.step.to_string(),
            actor,
            event,
        });
    }

    // ---- decisions -------------------------------------------------------

    fn pinned<T>(
        &mut self,
        decision: Decision,
        len: usize,
        extract: fn(ScriptValue) -> Option<Vec<T>>,
    ) -> Flow<Option<Vec<T>>> {
        let Some(value) = self.rand.scripted(decision) else {
            return Ok(None);
        };
        let bad = |reason: String| Halt::Fail(ProtocolError::Script { decision, reason });
        let items = extract(value).ok_or_else(|| bad("wrong value kind".into()))?;
        if items.len() != len {
            return Err(bad(format!("expected {len} entries, got {}", items.len())));
        }
        Ok(Some(items))
    }

    pub fn labels(&mut self, decision: Decision, n: usize) -> Flow<Vec<BellLabel>> {
        let pinned = self.pinned(decision, n, |v| match v {
            ScriptValue::Labels(l) => Some(l),
            _ => None,
        })?;
        Ok(pinned.unwrap_or_else(|| (0..n).map(|_| random_label(self.rng())).collect()))
    }

    pub fn flags(&mut self, decision: Decision, n: usize) -> Flow<Vec<bool>> {
        let pinned = self.pinned(decision, n, |v| match v {
            ScriptValue::Flags(f) => Some(f),
            ScriptValue::Bits(b) => Some(b.bits().to_vec()),
            _ => None,
        })?;
        Ok(pinned.unwrap_or_else(|| (0..n).map(|_| self.rng().random()).collect()))
    }

    pub fn decoy_states(&mut self, set: DecoySet, n: usize) -> Flow<Vec<ProductQubit>> {
        let pinned = self.pinned(Decision::Decoys(set), n, |v| match v {
            ScriptValue::Qubits(q) => Some(q),
            _ => None,
        })?;
        Ok(pinned.unwrap_or_else(|| {
            (0..n)
                .map(|_| ProductQubit::ALL[self.rng().random_range(0..4)])
                .collect()
        }))
    }

    pub fn paulis(&mut self, decision: Decision, n: usize) -> Flow<Vec<PauliOp>> {
        let pinned = self.pinned(decision, n, |v| match v {
            ScriptValue::Paulis(p) => Some(p),
            _ => None,
        })?;
        Ok(pinned.unwrap_or_else(|| {
            (0..n)
                .map(|_| PauliOp::ALL[self.rng().random_range(0..4)])
                .collect()
        }))
    }

    pub fn covers(&mut self, n: usize) -> Flow<Vec<CoverOp>> {
        let pinned = self.pinned(Decision::Covers, n, |v| match v {
            ScriptValue::Covers(c) => Some(c),
            _ => None,
        })?;
        Ok(pinned.unwrap_or_else(|| {
            (0..n)
                .map(|_| CoverOp::ALL[self.rng().random_range(0..4)])
                .collect()
        }))
    }

    /// Sorted `k`-subset of `0..total`.
    pub fn subset(&mut self, decision: Decision, total: usize, k: usize) -> Flow<Vec<usize>> {
        let pinned = self.pinned(decision, k, |v| match v {
            ScriptValue::Positions(p) => Some(p),
            _ => None,
        })?;
        match pinned {
            Some(p) => {
                if p.windows(2).any(|w| w[0] >= w[1]) || p.last().is_some_and(|&x| x >= total) {
                    let reason = format!("positions {p:?} are not a sorted subset of 0..{total}");
                    return Err(Halt::Fail(ProtocolError::Script { decision, reason }));
                }
                Ok(p)
            }
            None => {
                let mut p = sample(self.rng(), total, k).into_vec();
                p.sort_unstable();
                Ok(p)
            }
        }
    }

    /// Uniform interleaving of sets with the given sizes, as a source index
    /// per output position.
    pub fn pattern(&mut self, seq: Sequence, counts: &[usize]) -> Flow<Vec<usize>> {
        let total: usize = counts.iter().sum();
        let decision = Decision::Interleave(seq);
        let pinned = self.pinned(decision, total, |v| match v {
            ScriptValue::Pattern(p) => Some(p),
            _ => None,
        })?;
        if let Some(p) = pinned {
            let ok = counts
                .iter()
                .enumerate()
                .all(|(i, &c)| p.iter().filter(|&&x| x == i).count() == c);
            if !ok {
                let reason = format!("pattern {p:?} does not match set sizes {counts:?}");
                return Err(Halt::Fail(ProtocolError::Script { decision, reason }));
            }
            return Ok(p);
        }
        let mut p: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
            .collect();
        p.shuffle(self.rng());
        Ok(p)
    }

    pub fn interleave(&mut self, seq: Sequence, sets: &[&[SlotId]]) -> Flow<Vec<SlotId>> {
        let counts: Vec<usize> = sets.iter().map(|s| s.len()).collect();
        let pattern = self.pattern(seq, &counts)?;
        let mut cursors = vec![0; sets.len()];
        Ok(pattern
            .into_iter()
            .map(|i| {
                cursors[i] += 1;
                sets[i][cursors[i] - 1]
            })
            .collect())
    }

    /// Inserts check bits into `m` on behalf of `owner`.
    pub fn check_bits(
        &mut self,
        owner: Party,
        actor: Party,
        set: &str,
        m: &BitString,
    ) -> Flow<CheckedMessage> {
        let c = self.cfg.check_bits;
        let positions = self.subset(Decision::CheckPositions(owner), m.len() + c, c)?;
        let values: BitString = self.flags(Decision::CheckBits(owner), c)?.into();
        let checked = insert_check_bits_at(m, &positions, &values)?;
        self.log(
            actor,
            Event::CheckBits {
                set: set.into(),
                positions: checked.positions.clone(),
                values: checked.values.clone(),
                extended: checked.extended.clone(),
            },
        );
        Ok(checked)
    }

    // ---- qubits ----------------------------------------------------------

    pub fn prepare_pairs(
        &mut self,
        labels: &[BellLabel],
        roles: &[Role],
        holder: Party,
        names: impl Fn(usize) -> [String; 2],
    ) -> (Vec<SlotId>, Vec<SlotId>) {
        labels
            .iter()
            .zip(roles)
            .enumerate()
            .map(|(i, (&l, &r))| self.reg.prepare_pair(l, r, holder, names(i)))
            .unzip()
    }

    pub fn prepare_decoys(&mut self, states: &[ProductQubit], holder: Party) -> Vec<SlotId> {
        states
            .iter()
            .map(|&q| {
                self.reg
                    .prepare_product(q, Role::Decoy, holder, q.ket().to_string())
            })
            .collect()
    }

    pub fn snapshot(&mut self, actor: Party, name: &str, seq: &[SlotId]) -> Flow {
        let slots = seq
            .iter()
            .map(|&id| {
                let s = self.reg.slot(id)?;
                Ok(SlotRef {
                    id,
                    name: s.name.clone(),
                    role: s.role,
                })
            })
            .collect::<Result<Vec<_>, QuantumError>>()?;
        self.log(
            actor,
            Event::Sequence {
                name: name.into(),
                slots,
            },
        );
        Ok(())
    }

    pub fn apply_paulis(
        &mut self,
        actor: Party,
        set: &str,
        slots: &[SlotId],
        ops: &[PauliOp],
    ) -> Flow {
        for (&s, &p) in slots.iter().zip(ops) {
            self.reg.apply_pauli(s, p)?;
        }
        self.log(
            actor,
            Event::Encode {
                set: set.into(),
                ops: ops.to_vec(),
            },
        );
        Ok(())
    }

    pub fn apply_covers(
        &mut self,
        actor: Party,
        set: &str,
        slots: &[SlotId],
        covers: &[CoverOp],
    ) -> Flow {
        for (&s, &c) in slots.iter().zip(covers) {
            self.reg.apply_cover(s, c)?;
        }
        self.log(
            actor,
            Event::ApplyCovers {
                set: set.into(),
                covers: covers.to_vec(),
            },
        );
        Ok(())
    }

    /// Moves `seq` over `link`: Eve's interception (if she targets the link)
    /// comes first, then channel noise on every qubit.
    pub fn transmit(
        &mut self,
        sender: Party,
        receiver: Party,
        link: Link,
        name: &str,
        seq: &[SlotId],
    ) -> Flow {
        self.log(
            sender,
            Event::Transmit {
                link,
                sequence: name.into(),
                qubits: seq.len(),
            },
        );
        if let Some(policy) = self.adversary.intercepts(link) {
            let mut forwarded = Vec::with_capacity(seq.len());
            for &s in seq {
                forwarded.push(eve_intercept_resend(
                    policy,
                    &mut self.reg,
                    s,
                    self.rand.rng(),
                )?);
            }
            self.log(Party::Eve, Event::Intercept { link, forwarded });
        }
        let mut hits = Vec::new();
        for &s in seq {
            let op = apply_channel(&mut self.reg, s, self.channel, self.rand.rng())?;
            if op != PauliOp::I {
                hits.push(NoiseHit {
                    slot: self.reg.slot(s)?.name.clone(),
                    op,
                });
            }
        }
        if !hits.is_empty() {
            self.log(Party::Eve, Event::Noise { link, hits });
        }
        for &s in seq {
            self.reg.set_holder(s, receiver)?;
        }
        Ok(())
    }

    /// Sacrificed-pair estimate of ε_z, ε_x on the Bob→Alice link.
    pub fn sacrifice_pairs(&mut self) -> Flow {
        let pairs = self.cfg.sacrificed_pairs;
        if pairs == 0 {
            return Ok(());
        }
        let link = Link::BobToAlice;
        let s =
            sacrificed_pair_samples(pairs, link, self.channel, self.adversary, self.rand.rng())?;
        self.sacrificed = Some(s);
        self.log(
            self.bob,
            Event::Estimate {
                link,
                pairs,
                z: s.z,
                x: s.x,
            },
        );
        Ok(())
    }

    pub fn announce_positions(
        &mut self,
        actor: Party,
        set: &str,
        within: &str,
        role: Role,
        positions: &[usize],
    ) {
        self.log(
            actor,
            Event::AnnouncePositions {
                set: set.into(),
                within: within.into(),
                role,
                positions: positions.to_vec(),
            },
        );
    }

    // ---- security stages -------------------------------------------------

    pub fn verdict(&mut self, stage: Stage, judge: Party, outcome: CheckOutcome) -> Flow {
        let CheckOutcome {
            errors,
            total,
            error_fraction,
            threshold,
            pass,
        } = outcome;
        self.log(
            judge,
            Event::Verdict {
                stage,
                errors,
                total,
                error_fraction,
                threshold,
                pass,
            },
        );
        self.stages.push(StageCheck {
            stage,
            errors,
            total,
            error_fraction,
            threshold,
            pass,
        });
        if pass {
            Ok(())
        } else {
            let reason = format!("{errors}/{total} errors exceed threshold {threshold}");
            Err(Halt::Abort(stage, reason))
        }
    }

    pub fn skip(&mut self, stage: Stage, actor: Party, reason: &str) {
        self.log(
            actor,
            Event::Skipped {
                stage,
                reason: reason.into(),
            },
        );
    }

    /// UTP measures decoys in the basis their preparation and covers imply,
    /// announces the results, and `judge` compares them.
    pub fn decoy_stage(
        &mut self,
        stage: Stage,
        judge: Party,
        set: &str,
        slots: &[SlotId],
        prepared: &[ProductQubit],
        covers: Option<&[CoverOp]>,
    ) -> Flow {
        let mut outcomes = Vec::with_capacity(slots.len());
        for (i, (&s, q)) in slots.iter().zip(prepared).enumerate() {
            let basis = effective_basis(q.basis, covers.map_or(CoverOp::I, |c| c[i]));
            outcomes.push((basis, self.reg.measure_single(s, basis, self.rand.rng())?));
        }
        let results = outcomes
            .iter()
            .map(|&(b, bit)| ProductQubit::new(b, bit))
            .collect();
        self.log(
            Party::Utp,
            Event::Measure {
                set: set.into(),
                results,
            },
        );
        let outcome = decoy_check(prepared, covers, &outcomes, self.cfg.thresholds.decoy)?;
        for (i, (q, &(basis, bit))) in prepared.iter().zip(&outcomes).enumerate() {
            let want = apply_cover_to_product(covers.map_or(CoverOp::I, |c| c[i]), *q);
            let counter = match basis {
                Basis::Z => &mut self.decoy_samples.z,
                Basis::X => &mut self.decoy_samples.x,
            };
            counter.1 += 1;
            counter.0 += u64::from(want.bit != bit);
        }
        self.verdict(stage, judge, outcome)
    }

    pub fn bell_measure(&mut self, set: &str, pairs: &[(SlotId, SlotId)]) -> Flow<Vec<BellLabel>> {
        let mut results = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            results.push(self.reg.measure_bell(a, b, self.rand.rng())?);
        }
        self.log(
            Party::Utp,
            Event::BellMeasure {
                set: set.into(),
                results: results.clone(),
            },
        );
        Ok(results)
    }

    pub fn authenticate(
        &mut self,
        stage: Stage,
        judge: Party,
        expected: &[BellLabel],
        announced: &[BellLabel],
    ) -> Flow {
        let outcome = verify_authentication(expected, announced, self.cfg.thresholds.auth)?;
        self.verdict(stage, judge, outcome)
    }

    /// Public check-bit comparison: `owner` announces, `judge` compares.
    pub fn compare_check_bits(
        &mut self,
        stage: Stage,
        owner: Party,
        judge: Party,
        set: &str,
        checked: &CheckedMessage,
        received: &BitString,
    ) -> Flow {
        self.log(
            owner,
            Event::AnnounceCheckBits {
                set: set.into(),
                positions: checked.positions.clone(),
                values: checked.values.clone(),
            },
        );
        let errors = checked.mismatches(received);
        let total = checked.positions.len();
        self.check_samples.0 += errors as u64;
        self.check_samples.1 += total as u64;
        let outcome = CheckOutcome::from_counts(errors, total, self.cfg.thresholds.check);
        self.verdict(stage, judge, outcome)
    }

    pub fn finish(
        self,
        flow: Flow<Decoded>,
    ) -> Result<(Transcript, SecurityReport), ProtocolError> {
        let (status, decoded) = match flow {
            Ok(d) => (Status::Completed, d),
            Err(Halt::Abort(stage, reason)) => {
                (Status::Aborted { stage, reason }, Decoded::default())
            }
            Err(Halt::Fail(e)) => return Err(e),
        };
        let abort_stage = match &status {
            Status::Aborted { stage, .. } => Some(*stage),
            Status::Completed => None,
        };
        let (estimator, mut samples) = match self.sacrificed {
            Some(s) => (Estimator::SacrificedPairs, s),
            None => (Estimator::Decoys, self.decoy_samples),
        };
        samples.e = self.check_samples;
        let report = SecurityReport::from_samples(
            self.protocol,
            abort_stage,
            self.stages,
            estimator,
            samples,
        );
        let transcript = Transcript {
            schema_version: TRANSCRIPT_SCHEMA_VERSION,
            protocol: self.protocol,
            records: self.records,
            status,
            decoded: decoded.forward,
            decoded_reverse: decoded.reverse,
        };
        Ok((transcript, report))
    }
}

/// Slots of `seq` at `positions`.
pub(super) fn pick(seq: &[SlotId], positions: &[usize]) -> Flow<Vec<SlotId>> {
    positions
        .iter()
        .map(|&p| {
            seq.get(p).copied().ok_or_else(|| {
                Halt::Fail(ProtocolError::Logic(format!(
                    "position {p} outside a sequence of {}",
                    seq.len()
                )))
            })
        })
        .collect()
}

/// `seq` with `positions` removed, order kept.
pub(super) fn without(seq: &[SlotId], positions: &[usize]) -> Vec<SlotId> {
    seq.iter()
        .enumerate()
        .filter(|(i, _)| !positions.contains(i))
        .map(|(_, &s)| s)
        .collect()
}

/// 0-based positions of `subset` within `seq`, in `seq` order.
pub(super) fn positions_of(seq: &[SlotId], subset: &[SlotId]) -> Vec<usize> {
    seq.iter()
        .enumerate()
        .filter(|(_, s)| subset.contains(s))
        .map(|(i, _)| i)
        .collect()
}

/// Sorted union of position lists.
pub(super) fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}
