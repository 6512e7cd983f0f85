//! One-way direct communication, plus the stages it shares with the other
//! two protocols.

use rand::Rng;

use super::encoding::{bits_to_paulis, decode_qsdc, identity_to_bell, CheckedMessage};
use super::randomness::{Decision, DecoySet, Randomness, Sequence};
use super::session::{pick, positions_of, union, without, Decoded, Flow, Session};
use super::transcript::{Event, Stage};
use super::{BitString, Protocol, ProtocolConfig, ProtocolError, Transcript};
use crate::adversary::{
    impostor_identity_pairs, impostor_identity_paulis, AdversaryStrategy, ChannelModel, Link,
};
use crate::metrics::SecurityReport;
use crate::pauli::{apply_pauli_to_bell, BellLabel, PauliOp, ProductQubit};
use crate::register::{Party, Role, SlotId};

pub fn run_qsdc(
    cfg: &ProtocolConfig,
    adversary: &AdversaryStrategy,
    channel: &ChannelModel,
    rand: &mut dyn Randomness,
) -> Result<(Transcript, SecurityReport), ProtocolError> {
    cfg.validate(Protocol::Qsdc)?;
    let mut s = Session::new(Protocol::Qsdc, cfg, adversary, channel, rand);
    let flow = qsdc(&mut s);
    s.finish(flow)
}

fn qsdc(s: &mut Session) -> Flow<Decoded> {
    let front = one_way_front(s)?;
    let alice = s.alice;

    s.step("3b");
    let masks = s.paulis(Decision::IdentityMasks, front.i_a.len())?;
    s.apply_paulis(alice, "I_A", &front.i_a, &masks)?;
    let q_a_prime = s.interleave(Sequence::QAPrime, &[&front.s_a, &front.i_a])?;
    s.snapshot(alice, "Q_A'", &q_a_prime)?;

    let results = mdi_tail(
        s,
        &Tail {
            q_a_prime: &q_a_prime,
            i_a: &front.i_a,
            d_a: &front.d_a,
            masks: &masks,
            carriers: &front.carriers,
            carrier_expect: &front.carrier_expect,
            bob: &front.bob,
            s_a_name: "S_A'",
            s_b_name: "S_B",
        },
    )?;
    finish_one_way(s, &front, &results, "11")
}

/// What Bob built in step 2.
pub(super) struct BobSide {
    pub s_labels: Vec<BellLabel>,
    pub s_b: Vec<SlotId>,
    pub i_a: Vec<SlotId>,
    pub i_b: Vec<SlotId>,
    pub d_a_states: Vec<ProductQubit>,
    pub d_a: Vec<SlotId>,
    pub d_b_states: Vec<ProductQubit>,
    pub d_b: Vec<SlotId>,
    pub q_a: Vec<SlotId>,
    pub q_b: Vec<SlotId>,
}

/// Identity pairs, decoys, and the interleaved `Q_A`/`Q_B` around Bob's
/// already prepared message pairs; then `Q_A` goes to Alice.
pub(super) fn bob_prepares(
    s: &mut Session,
    s_labels: Vec<BellLabel>,
    s_a: Vec<SlotId>,
    s_b: Vec<SlotId>,
    steps: [&'static str; 3],
) -> Flow<BobSide> {
    let bob = s.bob;
    let k = s.cfg.k();
    s.step(steps[0]);
    let id_labels = if s.adversary.impersonates_bob() {
        impostor_identity_pairs(k, s.rng())
    } else {
        identity_to_bell(&s.cfg.identity_bob)?
    };
    let (i_a, i_b) = s.prepare_pairs(&id_labels, &vec![Role::Identity; k], bob, |i| {
        [format!("a'{}", i + 1), format!("b'{}", i + 1)]
    });
    s.log(
        bob,
        Event::PreparePairs {
            set: "I".into(),
            labels: id_labels.clone(),
        },
    );

    s.step(steps[1]);
    let d = s.cfg.decoys;
    let d_a_states = s.decoy_states(DecoySet::DA, d)?;
    let d_b_states = s.decoy_states(DecoySet::DB, d)?;
    let d_a = s.prepare_decoys(&d_a_states, bob);
    let d_b = s.prepare_decoys(&d_b_states, bob);
    s.log(
        bob,
        Event::PrepareDecoys {
            set: "D_A".into(),
            states: d_a_states.clone(),
        },
    );
    s.log(
        bob,
        Event::PrepareDecoys {
            set: "D_B".into(),
            states: d_b_states.clone(),
        },
    );

    let q_a = s.interleave(Sequence::QA, &[&s_a, &i_a, &d_a])?;
    let q_b = s.interleave(Sequence::QB, &[&s_b, &i_b, &d_b])?;
    s.snapshot(bob, "Q_A", &q_a)?;
    s.snapshot(bob, "Q_B", &q_b)?;

    s.step(steps[2]);
    s.transmit(bob, s.alice, Link::BobToAlice, "Q_A", &q_a)?;
    s.sacrifice_pairs()?;

    Ok(BobSide {
        s_labels,
        s_b,
        i_a,
        i_b,
        d_a_states,
        d_a,
        d_b_states,
        d_b,
        q_a,
        q_b,
    })
}

/// Everything up to Alice's encoding of `S_A`, shared by the one-way
/// protocols.
pub(super) struct OneWayFront {
    pub checked: CheckedMessage,
    pub bob: BobSide,
    /// Alice's view of `S_A`, `I_A`, `D_A`.
    pub s_a: Vec<SlotId>,
    pub i_a: Vec<SlotId>,
    pub d_a: Vec<SlotId>,
    /// Indices of `S_A` carrying Alice's identity.
    pub carriers: Vec<usize>,
    /// What Bob should see on the carrier pairs.
    pub carrier_expect: Vec<BellLabel>,
}

pub(super) fn one_way_front(s: &mut Session) -> Flow<OneWayFront> {
    let (alice, bob) = (s.alice, s.bob);
    let k = s.cfg.k();

    s.step("1");
    let message = if s.adversary.impersonates_alice() {
        let n = s.cfg.message.len();
        (0..n).map(|_| s.rng().random::<bool>()).collect()
    } else {
        s.cfg.message.clone()
    };
    let checked = s.check_bits(Party::Alice, alice, "m'", &message)?;
    let pairs = checked.extended.len() / 2 + k;

    s.step("2a");
    let s_labels = s.labels(Decision::RandomPairs, pairs)?;
    let (s_a, s_b) = s.prepare_pairs(&s_labels, &vec![Role::Message; pairs], bob, |i| {
        [format!("a{}", i + 1), format!("b{}", i + 1)]
    });
    s.log(
        bob,
        Event::PreparePairs {
            set: "S".into(),
            labels: s_labels.clone(),
        },
    );
    let bob_side = bob_prepares(s, s_labels, s_a, s_b, ["2b", "2c", "2d"])?;

    s.step("2e");
    let pos_i = positions_of(&bob_side.q_a, &bob_side.i_a);
    let pos_d = positions_of(&bob_side.q_a, &bob_side.d_a);
    s.announce_positions(bob, "I_A", "Q_A", Role::Identity, &pos_i);
    s.announce_positions(bob, "D_A", "Q_A", Role::Decoy, &pos_d);
    let i_a = pick(&bob_side.q_a, &pos_i)?;
    let d_a = pick(&bob_side.q_a, &pos_d)?;
    let s_a_view = without(&bob_side.q_a, &union(&pos_i, &pos_d));

    s.step("3a");
    let carriers = s.subset(Decision::IdentityCarriers, pairs, k)?;
    let id_ops = if s.adversary.impersonates_alice() {
        impostor_identity_paulis(k, s.rng())
    } else {
        bits_to_paulis(&s.cfg.identity_alice)
    };
    let mut msg_ops = bits_to_paulis(&checked.extended).into_iter();
    let mut id_iter = id_ops.iter();
    let mut ops = Vec::with_capacity(pairs);
    for i in 0..pairs {
        if carriers.contains(&i) {
            ops.push(*id_iter.next().expect("k identity operators"));
        } else {
            ops.push(msg_ops.next().expect("one operator per message pair"));
        }
    }
    for &c in &carriers {
        s.reg.set_role(s_a_view[c], Role::CheckCarrier)?;
        s.reg.set_role(bob_side.s_b[c], Role::CheckCarrier)?;
    }
    s.apply_paulis(alice, "S_A", &s_a_view, &ops)?;
    let honest_id = bits_to_paulis(&s.cfg.identity_alice);
    let carrier_expect = carriers
        .iter()
        .zip(&honest_id)
        .map(|(&c, &p)| apply_pauli_to_bell(p, bob_side.s_labels[c]))
        .collect();

    Ok(OneWayFront {
        checked,
        bob: bob_side,
        s_a: s_a_view,
        i_a,
        d_a,
        carriers,
        carrier_expect,
    })
}

pub(super) struct Tail<'x> {
    pub q_a_prime: &'x [SlotId],
    pub i_a: &'x [SlotId],
    pub d_a: &'x [SlotId],
    pub masks: &'x [PauliOp],
    pub carriers: &'x [usize],
    pub carrier_expect: &'x [BellLabel],
    pub bob: &'x BobSide,
    pub s_a_name: &'static str,
    pub s_b_name: &'static str,
}

/// Covered `D_A` check, fresh decoys, `D_B` check, authentication and the
/// message measurements. Returns UTP's results on the message pairs.
pub(super) fn mdi_tail(s: &mut Session, t: &Tail) -> Flow<Vec<BellLabel>> {
    let (alice, bob) = (s.alice, s.bob);
    let b = t.bob;
    let d_a_view = t.d_a;

    s.step("3c");
    let covers = s.covers(d_a_view.len())?;
    s.apply_covers(alice, "D_A", d_a_view, &covers)?;
    s.step("3d");
    s.transmit(alice, Party::Utp, Link::AliceToUtp, "D_A^1", d_a_view)?;

    s.step("4");
    s.log(
        bob,
        Event::AnnounceBases {
            set: "D_A".into(),
            bases: b.d_a_states.iter().map(|q| q.basis).collect(),
        },
    );
    s.log(
        alice,
        Event::AnnounceCovers {
            set: "D_A".into(),
            covers: covers.clone(),
        },
    );

    s.step("5");
    s.decoy_stage(
        Stage::DecoyBobAlice,
        bob,
        "D_A^1",
        d_a_view,
        &b.d_a_states,
        Some(&covers),
    )?;

    s.step("6");
    let fresh = s.decoy_states(DecoySet::DAPrime, s.cfg.fresh_decoys)?;
    let d_a2 = s.prepare_decoys(&fresh, alice);
    s.log(
        alice,
        Event::PrepareDecoys {
            set: "D_A'".into(),
            states: fresh.clone(),
        },
    );
    let q_a2 = s.interleave(Sequence::QADoublePrime, &[t.q_a_prime, &d_a2])?;
    s.snapshot(alice, "Q_A''", &q_a2)?;
    s.transmit(alice, Party::Utp, Link::AliceToUtp, "Q_A''", &q_a2)?;

    s.step("7");
    let pos_d2 = positions_of(&q_a2, &d_a2);
    s.announce_positions(alice, "D_A'", "Q_A''", Role::Decoy, &pos_d2);
    s.log(
        alice,
        Event::AnnounceBases {
            set: "D_A'".into(),
            bases: fresh.iter().map(|q| q.basis).collect(),
        },
    );
    let utp_d2 = pick(&q_a2, &pos_d2)?;
    s.decoy_stage(Stage::DecoyAliceUtp, alice, "D_A'", &utp_d2, &fresh, None)?;

    s.step("8");
    s.transmit(bob, Party::Utp, Link::BobToUtp, "Q_B", &b.q_b)?;
    let pos_db = positions_of(&b.q_b, &b.d_b);
    s.announce_positions(bob, "D_B", "Q_B", Role::Decoy, &pos_db);
    s.log(
        bob,
        Event::AnnounceBases {
            set: "D_B".into(),
            bases: b.d_b_states.iter().map(|q| q.basis).collect(),
        },
    );
    let utp_db = pick(&b.q_b, &pos_db)?;
    s.decoy_stage(Stage::DecoyBobUtp, bob, "D_B", &utp_db, &b.d_b_states, None)?;

    let seqs = Measured {
        q_a: &q_a2,
        q_a_name: "Q_A''",
        removed_a: &pos_d2,
        q_b: &b.q_b,
        q_b_name: "Q_B",
        removed_b: &pos_db,
    };
    authenticate_and_measure(s, t, &seqs, ["9a", "9b", "10"])
}

/// The sequences UTP holds when authentication starts, with the positions
/// already consumed by decoy checks.
pub(super) struct Measured<'x> {
    pub q_a: &'x [SlotId],
    pub q_a_name: &'static str,
    pub removed_a: &'x [usize],
    pub q_b: &'x [SlotId],
    pub q_b_name: &'static str,
    pub removed_b: &'x [usize],
}

pub(super) fn authenticate_and_measure(
    s: &mut Session,
    t: &Tail,
    m: &Measured,
    steps: [&'static str; 3],
) -> Flow<Vec<BellLabel>> {
    let (alice, bob) = (s.alice, s.bob);
    let b = t.bob;

    s.step(steps[0]);
    let pos_ia = positions_of(m.q_a, t.i_a);
    let pos_ib = positions_of(m.q_b, &b.i_b);
    s.announce_positions(alice, "I_A'", m.q_a_name, Role::Identity, &pos_ia);
    s.announce_positions(bob, "I_B", m.q_b_name, Role::Identity, &pos_ib);
    let pairs: Vec<_> = pick(m.q_a, &pos_ia)?
        .into_iter()
        .zip(pick(m.q_b, &pos_ib)?)
        .collect();
    let id_results = s.bell_measure("I", &pairs)?;
    if s.adversary.impersonates_alice() {
        s.skip(
            Stage::AuthenticateBob,
            Party::Eve,
            "the party checking Bob is an impostor",
        );
    } else {
        let honest = identity_to_bell(&s.cfg.identity_bob)?;
        let expected: Vec<BellLabel> = honest
            .iter()
            .zip(t.masks)
            .map(|(&l, &p)| apply_pauli_to_bell(p, l))
            .collect();
        s.authenticate(Stage::AuthenticateBob, alice, &expected, &id_results)?;
    }

    s.step(steps[1]);
    let s_a_utp = without(m.q_a, &union(m.removed_a, &pos_ia));
    let s_b_utp = without(m.q_b, &union(m.removed_b, &pos_ib));
    s.snapshot(Party::Utp, t.s_a_name, &s_a_utp)?;
    s.snapshot(Party::Utp, t.s_b_name, &s_b_utp)?;
    s.announce_positions(alice, "C_A", t.s_a_name, Role::CheckCarrier, t.carriers);
    let c_pairs: Vec<_> = pick(&s_a_utp, t.carriers)?
        .into_iter()
        .zip(pick(&s_b_utp, t.carriers)?)
        .collect();
    let c_results = s.bell_measure("C", &c_pairs)?;
    if s.adversary.impersonates_bob() {
        s.skip(
            Stage::AuthenticateAlice,
            Party::Eve,
            "the party checking Alice is an impostor",
        );
    } else {
        s.authenticate(Stage::AuthenticateAlice, bob, t.carrier_expect, &c_results)?;
    }

    s.step(steps[2]);
    let msg_pairs: Vec<_> = without(&s_a_utp, t.carriers)
        .into_iter()
        .zip(without(&s_b_utp, t.carriers))
        .collect();
    s.bell_measure("M", &msg_pairs)
}

/// Bob's decoding and the check-bit comparison for the one-way protocols.
pub(super) fn finish_one_way(
    s: &mut Session,
    front: &OneWayFront,
    results: &[BellLabel],
    step: &'static str,
) -> Flow<Decoded> {
    let (alice, bob) = (s.alice, s.bob);
    let message_idx: Vec<usize> = (0..front.bob.s_labels.len())
        .filter(|i| !front.carriers.contains(i))
        .collect();
    let decoded: BitString = message_idx
        .iter()
        .zip(results)
        .flat_map(|(&i, &r)| {
            let (hi, lo) = decode_qsdc(front.bob.s_labels[i], r);
            [hi, lo]
        })
        .collect();
    s.log(
        bob,
        Event::Decode {
            set: "m'".into(),
            bits: decoded.clone(),
        },
    );

    s.step(step);
    s.compare_check_bits(Stage::CheckBits, alice, bob, "m'", &front.checked, &decoded)?;
    let m = front.checked.strip(&decoded);
    s.log(
        bob,
        Event::Decode {
            set: "m".into(),
            bits: m.clone(),
        },
    );
    Ok(Decoded {
        forward: Some(m),
        reverse: None,
    })
}
