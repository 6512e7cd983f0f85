//! Quantum dialogue: both parties exchange a message over the same pairs.

use rand::Rng;

use super::encoding::{
    bits_to_paulis, qd_decode, qd_encode_with, qd_initial_from_alice, qd_prepare_with,
};
use super::qsdc::{bob_prepares, mdi_tail, Tail};
use super::randomness::{Decision, Randomness, Sequence};
use super::session::{pick, positions_of, union, without, Decoded, Flow, Session};
use super::transcript::{Event, Stage};
use super::{BitString, Protocol, ProtocolConfig, ProtocolError, Transcript};
use crate::adversary::{impostor_identity_paulis, AdversaryStrategy, ChannelModel};
use crate::metrics::SecurityReport;
use crate::pauli::apply_pauli_to_bell;
use crate::register::{Party, Role};

pub fn run_qd(
    cfg: &ProtocolConfig,
    adversary: &AdversaryStrategy,
    channel: &ChannelModel,
    rand: &mut dyn Randomness,
) -> Result<(Transcript, SecurityReport), ProtocolError> {
    cfg.validate(Protocol::Qd)?;
    let mut s = Session::new(Protocol::Qd, cfg, adversary, channel, rand);
    let flow = qd(&mut s);
    s.finish(flow)
}

fn random_bits(s: &mut Session, n: usize) -> BitString {
    (0..n).map(|_| s.rng().random::<bool>()).collect()
}

fn qd(s: &mut Session) -> Flow<Decoded> {
    let (alice, bob) = (s.alice, s.bob);
    let k = s.cfg.k();
    let n = s.cfg.message.len();

    s.step("1");
    let m_a = if s.adversary.impersonates_alice() {
        random_bits(s, n)
    } else {
        s.cfg.message.clone()
    };
    let m_b = match (&s.cfg.bob_message, s.adversary.impersonates_bob()) {
        (Some(m), false) => m.clone(),
        _ => random_bits(s, n),
    };
    let checked_a = s.check_bits(Party::Alice, alice, "m_a'", &m_a)?;
    let checked_b = s.check_bits(Party::Bob, bob, "m_b'", &m_b)?;
    let len = checked_b.extended.len();

    s.step("2a");
    let classes = s.flags(Decision::QdPairClass, len)?;
    let msg_labels: Vec<_> = checked_b
        .extended
        .bits()
        .iter()
        .zip(&classes)
        .map(|(&bit, &psi)| qd_prepare_with(bit, psi))
        .collect();
    let c_labels = s.labels(Decision::RandomPairs, k)?;
    let pattern = s.pattern(Sequence::Carriers, &[len, k])?;
    let (mut mi, mut ci) = (msg_labels.iter(), c_labels.iter());
    let combined: Vec<_> = pattern
        .iter()
        .map(|&p| *if p == 0 { mi.next() } else { ci.next() }.expect("pattern counts"))
        .collect();
    let roles: Vec<_> = pattern
        .iter()
        .map(|&p| {
            if p == 0 {
                Role::Message
            } else {
                Role::CheckCarrier
            }
        })
        .collect();
    let carriers: Vec<usize> = (0..pattern.len()).filter(|&i| pattern[i] == 1).collect();
    let (s_a, s_b) = s.prepare_pairs(&combined, &roles, bob, |i| {
        [format!("a{}", i + 1), format!("b{}", i + 1)]
    });
    s.log(
        bob,
        Event::PreparePairs {
            set: "S".into(),
            labels: msg_labels,
        },
    );
    s.log(
        bob,
        Event::PreparePairs {
            set: "C".into(),
            labels: c_labels,
        },
    );
    s.snapshot(bob, "S_A'", &s_a)?;
    s.snapshot(bob, "S_B'", &s_b)?;
    let c_slots = pick(&s_a, &carriers)?;
    let b = bob_prepares(s, combined, s_a, s_b, ["2c", "2d", "2e"])?;

    s.step("2f");
    let pos_c = positions_of(&b.q_a, &c_slots);
    let pos_i = positions_of(&b.q_a, &b.i_a);
    let pos_d = positions_of(&b.q_a, &b.d_a);
    s.announce_positions(bob, "C_A", "Q_A", Role::CheckCarrier, &pos_c);
    s.announce_positions(bob, "I_A", "Q_A", Role::Identity, &pos_i);
    s.announce_positions(bob, "D_A", "Q_A", Role::Decoy, &pos_d);
    let c_a = pick(&b.q_a, &pos_c)?;
    let i_a = pick(&b.q_a, &pos_i)?;
    let d_a = pick(&b.q_a, &pos_d)?;
    let msg_a = without(&b.q_a, &union(&union(&pos_c, &pos_i), &pos_d));

    s.step("3a");
    let choices = s.flags(Decision::QdOperator, len)?;
    let ops: Vec<_> = checked_a
        .extended
        .bits()
        .iter()
        .zip(&choices)
        .map(|(&bit, &second)| qd_encode_with(bit, second))
        .collect();
    s.apply_paulis(alice, "S_A", &msg_a, &ops)?;
    let id_ops = if s.adversary.impersonates_alice() {
        impostor_identity_paulis(k, s.rng())
    } else {
        bits_to_paulis(&s.cfg.identity_alice)
    };
    s.apply_paulis(alice, "C_A", &c_a, &id_ops)?;
    let s_a2 = without(&b.q_a, &union(&pos_i, &pos_d));
    s.snapshot(alice, "S_A''", &s_a2)?;

    s.step("3b");
    let masks = s.paulis(Decision::IdentityMasks, k)?;
    s.apply_paulis(alice, "I_A", &i_a, &masks)?;
    let q_a1 = s.interleave(Sequence::QAPrime, &[&s_a2, &i_a])?;
    s.snapshot(alice, "Q_A'", &q_a1)?;

    let honest_id = bits_to_paulis(&s.cfg.identity_alice);
    let carrier_expect: Vec<_> = carriers
        .iter()
        .zip(&honest_id)
        .map(|(&c, &p)| apply_pauli_to_bell(p, b.s_labels[c]))
        .collect();
    let tail = Tail {
        q_a_prime: &q_a1,
        i_a: &i_a,
        d_a: &d_a,
        masks: &masks,
        carriers: &carriers,
        carrier_expect: &carrier_expect,
        bob: &b,
        s_a_name: "S_A''",
        s_b_name: "S_B'",
    };
    let results = mdi_tail(s, &tail)?;

    let msg_idx: Vec<usize> = (0..b.s_labels.len())
        .filter(|i| !carriers.contains(i))
        .collect();
    let dec_a: BitString = msg_idx
        .iter()
        .zip(&results)
        .map(|(&i, &r)| qd_decode(b.s_labels[i], r).0)
        .collect();
    let dec_b: BitString = ops
        .iter()
        .zip(&results)
        .map(|(&op, &r)| qd_decode(qd_initial_from_alice(op, r), r).1)
        .collect();
    s.log(
        alice,
        Event::Decode {
            set: "m_b'".into(),
            bits: dec_b.clone(),
        },
    );
    s.log(
        bob,
        Event::Decode {
            set: "m_a'".into(),
            bits: dec_a.clone(),
        },
    );

    s.step("11");
    s.compare_check_bits(Stage::CheckBits, alice, bob, "m_a'", &checked_a, &dec_a)?;
    s.compare_check_bits(
        Stage::CheckBitsReverse,
        bob,
        alice,
        "m_b'",
        &checked_b,
        &dec_b,
    )?;
    let out_a = checked_a.strip(&dec_a);
    let out_b = checked_b.strip(&dec_b);
    s.log(
        bob,
        Event::Decode {
            set: "m_a".into(),
            bits: out_a.clone(),
        },
    );
    s.log(
        alice,
        Event::Decode {
            set: "m_b".into(),
            bits: out_b.clone(),
        },
    );
    Ok(Decoded {
        forward: Some(out_a),
        reverse: Some(out_b),
    })
}
