//! Deterministic secure communication: like the one-way direct protocol, but
//! every qubit Alice sends is covered, so UTP needs her cover announcements
//! before it can measure anything.

use super::qsdc::{authenticate_and_measure, finish_one_way, one_way_front, Measured, Tail};
use super::randomness::{Decision, DecoySet, Randomness, Sequence};
use super::session::{pick, positions_of, union, without, Decoded, Flow, Session};
use super::transcript::{Event, Stage};
use super::{Protocol, ProtocolConfig, ProtocolError, Transcript};
use crate::adversary::{AdversaryStrategy, ChannelModel, Link};
use crate::metrics::SecurityReport;
use crate::register::{Party, Role};

pub fn run_dsqc(
    cfg: &ProtocolConfig,
    adversary: &AdversaryStrategy,
    channel: &ChannelModel,
    rand: &mut dyn Randomness,
) -> Result<(Transcript, SecurityReport), ProtocolError> {
    cfg.validate(Protocol::Dsqc)?;
    let mut s = Session::new(Protocol::Dsqc, cfg, adversary, channel, rand);
    let flow = dsqc(&mut s);
    s.finish(flow)
}

fn dsqc(s: &mut Session) -> Flow<Decoded> {
    let front = one_way_front(s)?;
    let (alice, bob) = (s.alice, s.bob);
    let b = &front.bob;

    s.step("3b");
    let masks = s.paulis(Decision::IdentityMasks, front.i_a.len())?;
    s.apply_paulis(alice, "I_A", &front.i_a, &masks)?;
    let q_a1 = s.interleave(Sequence::QAPrime, &[&front.s_a, &front.i_a, &front.d_a])?;
    s.snapshot(alice, "Q_A'", &q_a1)?;

    s.step("3c");
    let covers = s.covers(q_a1.len())?;
    s.apply_covers(alice, "Q_A'", &q_a1, &covers)?;
    let fresh = s.decoy_states(DecoySet::DAPrime, s.cfg.fresh_decoys)?;
    let d_a2 = s.prepare_decoys(&fresh, alice);
    s.log(
        alice,
        Event::PrepareDecoys {
            set: "D_A'".into(),
            states: fresh.clone(),
        },
    );
    let q_a2 = s.interleave(Sequence::QADoublePrime, &[&q_a1, &d_a2])?;
    s.snapshot(alice, "Q_A''", &q_a2)?;
    s.transmit(alice, Party::Utp, Link::AliceToUtp, "Q_A''", &q_a2)?;

    s.step("4");
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

    s.step("5");
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

    s.step("6");
    let pos_da = positions_of(&q_a2, &front.d_a);
    let cover_of = |slot| covers[q_a1.iter().position(|&x| x == slot).expect("slot of Q_A'")];
    let da_covers: Vec<_> = front.d_a.iter().map(|&x| cover_of(x)).collect();
    s.log(
        bob,
        Event::AnnounceBases {
            set: "D_A".into(),
            bases: b.d_a_states.iter().map(|q| q.basis).collect(),
        },
    );
    s.announce_positions(alice, "D_A", "Q_A''", Role::Decoy, &pos_da);
    s.log(
        alice,
        Event::AnnounceCovers {
            set: "D_A".into(),
            covers: da_covers.clone(),
        },
    );
    let utp_da = pick(&q_a2, &pos_da)?;
    s.decoy_stage(
        Stage::DecoyBobAlice,
        bob,
        "D_A",
        &utp_da,
        &b.d_a_states,
        Some(&da_covers),
    )?;

    s.step("7");
    let removed = union(&pos_d2, &pos_da);
    let q_a_rest = without(&q_a2, &removed);
    let q_b_rest = without(&b.q_b, &pos_db);
    s.log(
        Party::Utp,
        Event::Discard {
            sequence: "Q_A''".into(),
            removed: removed.len(),
        },
    );
    s.log(
        Party::Utp,
        Event::Discard {
            sequence: "Q_B".into(),
            removed: pos_db.len(),
        },
    );
    s.snapshot(Party::Utp, "Q_A^1", &q_a_rest)?;
    s.snapshot(Party::Utp, "Q_B^1", &q_b_rest)?;
    let rest_covers: Vec<_> = q_a_rest.iter().map(|&x| cover_of(x)).collect();
    s.log(
        alice,
        Event::AnnounceCovers {
            set: "Q_A^1".into(),
            covers: rest_covers.clone(),
        },
    );
    for (&slot, &c) in q_a_rest.iter().zip(&rest_covers) {
        s.reg.uncover(slot, c)?;
    }
    s.log(
        Party::Utp,
        Event::RemoveCovers {
            set: "Q_A^1".into(),
            covers: rest_covers,
        },
    );
    s.snapshot(Party::Utp, "Q_A^2", &q_a_rest)?;

    let tail = Tail {
        q_a_prime: &q_a1,
        i_a: &front.i_a,
        d_a: &front.d_a,
        masks: &masks,
        carriers: &front.carriers,
        carrier_expect: &front.carrier_expect,
        bob: b,
        s_a_name: "S_A'",
        s_b_name: "S_B",
    };
    let measured = Measured {
        q_a: &q_a_rest,
        q_a_name: "Q_A^2",
        removed_a: &[],
        q_b: &q_b_rest,
        q_b_name: "Q_B^1",
        removed_b: &[],
    };
    let results = authenticate_and_measure(s, &tail, &measured, ["8a", "8b", "9"])?;
    finish_one_way(s, &front, &results, "10")
}
