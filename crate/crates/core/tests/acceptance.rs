//! Acceptance gate: one line per criterion, non-zero exit if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qsdc_core::adversary::{AdversaryStrategy, ChannelModel};
use qsdc_core::golden::{replay, verify_examples};
use qsdc_core::metrics::{
    binary_entropy, impersonation_detection_probability, lemma1_check, secrecy_capacity,
    BellDiagonalDist,
};
use qsdc_core::montecarlo::{Campaign, Execution};
use qsdc_core::pauli::{BellLabel, PauliOp};
use qsdc_core::protocol::encoding::{decode_qsdc, qd_decode, qd_encode_with, qd_prepare_with};
use qsdc_core::protocol::{run, BitString, Protocol, Seeded, Stage};
use qsdc_core::register::{Party, Register, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{check_against_oracle, oracle_scenarios, random_config};
use BellLabel::{PhiMinus as PhM, PhiPlus as PhP, PsiMinus as PsM, PsiPlus as PsP};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn within_sigmas(got: f64, want: f64, n: u64, k: f64) -> bool {
    let sigma = (want * (1.0 - want) / n as f64).sqrt();
    (got - want).abs() <= k * sigma
}

fn golden_examples() -> Outcome {
    let mut checked = 0;
    for r in verify_examples() {
        ensure!(
            r.passed(),
            "{}: {:?} {:?}",
            r.protocol,
            r.divergence,
            r.error
        );
        checked += r.checked;
    }
    let bits = |s: &str| s.parse::<BitString>().unwrap();
    let qsdc = replay(Protocol::Qsdc).map_err(|e| e.to_string())?;
    let qd = replay(Protocol::Qd).map_err(|e| e.to_string())?;
    let dsqc = replay(Protocol::Dsqc).map_err(|e| e.to_string())?;
    ensure!(
        qsdc.bell_results("M") == Some(&[PhP, PsP, PhP, PhM, PhM][..]),
        "QSDC message outcomes"
    );
    ensure!(
        qd.bell_results("M") == Some(&[PhM, PhM, PhM, PhM, PsM][..]),
        "QD message outcomes"
    );
    for t in [&qsdc, &qd, &dsqc] {
        ensure!(
            t.bell_results("I") == Some(&[PhP, PsM][..]),
            "{}: Id_B outcomes",
            t.protocol
        );
        ensure!(
            t.bell_results("C") == Some(&[PsM, PhP][..]),
            "{}: Id_A outcomes",
            t.protocol
        );
    }
    ensure!(
        qsdc.decoded == Some(bits("011010")),
        "QSDC decoded {:?}",
        qsdc.decoded
    );
    ensure!(
        dsqc.decoded == Some(bits("011010")),
        "DSQC decoded {:?}",
        dsqc.decoded
    );
    ensure!(
        qd.decoded == Some(bits("011")) && qd.decoded_reverse == Some(bits("100")),
        "QD decoded {:?} / {:?}",
        qd.decoded,
        qd.decoded_reverse
    );
    Ok(format!("3 examples, {checked} recorded steps match"))
}

fn round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in Protocol::ALL {
        for i in 0..1000u64 {
            let n = rng.random_range(1..=32);
            let k = rng.random_range(1..=8);
            let mut c = rng.random_range(0..=8);
            if p != Protocol::Qd && (n + c) % 2 == 1 {
                c += 1;
            }
            let cfg = random_config(
                rng.random(),
                n,
                k,
                c,
                rng.random_range(0..=8),
                rng.random_range(0..=8),
            );
            let (t, _) = run(
                p,
                &cfg,
                &AdversaryStrategy::None,
                &ChannelModel::noiseless(),
                &mut Seeded::new(i),
            )
            .map_err(|e| format!("{p} run {i}: {e}"))?;
            ensure!(t.is_completed(), "{p} run {i} aborted");
            ensure!(
                t.decoded.as_ref() == Some(&cfg.message),
                "{p} run {i} decoded wrongly"
            );
            if p == Protocol::Qd {
                ensure!(
                    t.decoded_reverse == cfg.bob_message,
                    "QD run {i} reverse message"
                );
            }
        }
    }
    Ok("3 × 1000 runs decoded exactly".into())
}

fn impersonation() -> Outcome {
    let trials = 10_000;
    let mut worst: f64 = 0.0;
    for (pi, p) in Protocol::ALL.into_iter().enumerate() {
        for k in 1..=4u32 {
            let cfg = random_config(u64::from(k), 4, k as usize, 2, 2, 2);
            for (ai, adv) in [
                AdversaryStrategy::ImpersonateAlice,
                AdversaryStrategy::ImpersonateBob,
            ]
            .into_iter()
            .enumerate()
            {
                let c = Campaign {
                    protocol: p,
                    config: &cfg,
                    adversary: adv,
                    channel: ChannelModel::noiseless(),
                    // Every campaign gets its own seed so the 24 checks are independent.
                    master_seed: 100 * pi as u64 + 10 * u64::from(k) + ai as u64,
                    trials,
                };
                let s = c
                    .run(Execution::Parallel)
                    .map_err(|e| e.to_string())?
                    .summary;
                let want = impersonation_detection_probability(k);
                let got = s.detected.mean;
                let sigma = (want * (1.0 - want) / trials as f64).sqrt();
                worst = worst.max((got - want).abs() / sigma);
                ensure!(
                    within_sigmas(got, want, trials, 3.0),
                    "{p} {adv} k={k}: {got} vs {want}"
                );
                let stage = if adv.impersonates_alice() {
                    Stage::AuthenticateAlice
                } else {
                    Stage::AuthenticateBob
                };
                ensure!(
                    s.abort_stages.keys().all(|&st| st == stage),
                    "{p} {adv} k={k}: aborts at {:?}",
                    s.abort_stages
                );
            }
        }
    }
    Ok(format!(
        "24 campaigns of {trials}, worst deviation {worst:.2}σ"
    ))
}

fn oracle_equivalence() -> Outcome {
    let scenarios = oracle_scenarios();
    let mut compared = 0;
    for sc in &scenarios {
        if check_against_oracle(sc)? {
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} scenarios equal the oracle exactly, {} refused H-covered Bell inputs",
        scenarios.len() - compared
    ))
}

/// Prepares `initial`, applies `op` to the first half and measures in the Bell basis.
fn encode_measure(initial: BellLabel, op: PauliOp) -> BellLabel {
    let mut reg = Register::new();
    let (a, b) = reg.prepare_pair(initial, Role::Message, Party::Bob, ["a".into(), "b".into()]);
    reg.apply_pauli(a, op).unwrap();
    reg.measure_bell(a, b, &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap()
}

fn tables() -> Outcome {
    use PauliOp::{I, X, Y, Z};
    // Bob prepares, message bits, Alice's unitary, final joint state.
    #[rustfmt::skip]
    let qsdc = [
        (PhP, "00", I, PhP), (PhP, "01", X, PsP), (PhP, "10", Y, PsM), (PhP, "11", Z, PhM),
        (PhM, "00", I, PhM), (PhM, "01", X, PsM), (PhM, "10", Y, PsP), (PhM, "11", Z, PhP),
        (PsP, "00", I, PsP), (PsP, "01", X, PhP), (PsP, "10", Y, PhM), (PsP, "11", Z, PsM),
        (PsM, "00", I, PsM), (PsM, "01", X, PhM), (PsM, "10", Y, PhP), (PsM, "11", Z, PsP),
    ];
    for (initial, bits, op, fin) in qsdc {
        let (hi, lo) = (bits.as_bytes()[0] == b'1', bits.as_bytes()[1] == b'1');
        ensure!(
            PauliOp::from_message_bits(hi, lo) == op,
            "{bits} should encode as {op:?}"
        );
        let got = encode_measure(initial, op);
        ensure!(
            got == fin,
            "{initial:?} with {op:?} gave {got:?}, want {fin:?}"
        );
        ensure!(
            decode_qsdc(initial, got) == (hi, lo),
            "{initial:?}/{fin:?} should decode to {bits}"
        );
    }
    // Alice bit, Bob bit, Bob prepares, Alice's unitary, final joint state.
    #[rustfmt::skip]
    let qd = [
        (0, 0, PhP, I, PhP), (0, 0, PhP, Z, PhM), (0, 0, PsP, I, PsP), (0, 0, PsP, Z, PsM),
        (0, 1, PhM, I, PhM), (0, 1, PhM, Z, PhP), (0, 1, PsM, I, PsM), (0, 1, PsM, Z, PsP),
        (1, 0, PhP, X, PsP), (1, 0, PhP, Y, PsM), (1, 0, PsP, X, PhP), (1, 0, PsP, Y, PhM),
        (1, 1, PhM, X, PsM), (1, 1, PhM, Y, PsP), (1, 1, PsM, X, PhM), (1, 1, PsM, Y, PhP),
    ];
    for (a, b, initial, op, fin) in qd {
        let (a, b) = (a == 1, b == 1);
        ensure!(
            qd_prepare_with(b, initial.is_psi()) == initial,
            "Bob bit {b} should allow {initial:?}"
        );
        ensure!(
            qd_encode_with(a, matches!(op, Z | Y)) == op,
            "Alice bit {a} should allow {op:?}"
        );
        let got = encode_measure(initial, op);
        ensure!(
            got == fin,
            "{initial:?} with {op:?} gave {got:?}, want {fin:?}"
        );
        ensure!(
            qd_decode(initial, got) == (a, b),
            "{initial:?}/{fin:?} should decode to ({a}, {b})"
        );
    }
    Ok("16 + 16 rows round-trip".into())
}

fn lemma1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_gap = f64::INFINITY;
    for _ in 0..10_000 {
        // Normalised exponentials are uniform on the simplex.
        let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
        let s: f64 = e.iter().sum();
        let d = BellDiagonalDist::new(e.map(|x| x / s)).map_err(|e| e.to_string())?;
        let c = lemma1_check(&d);
        ensure!(c.holds, "fails at {:?}: {} > {}", d.weights(), c.lhs, c.rhs);
        worst_gap = worst_gap.min(c.rhs - c.lhs);
    }
    let mut lattice = 0;
    for a in 0..=4 {
        for b in 0..=4 - a {
            for c in 0..=4 - a - b {
                let w = [a, b, c, 4 - a - b - c].map(|x| f64::from(x) / 4.0);
                let check = lemma1_check(&BellDiagonalDist::new(w).map_err(|e| e.to_string())?);
                ensure!(check.holds, "fails at {w:?}");
                lattice += 1;
            }
        }
    }
    ensure!(lattice == 35, "{lattice} lattice points");
    let u = lemma1_check(&BellDiagonalDist::uniform());
    ensure!(
        (u.lhs - 2.0).abs() <= 1e-12 && (u.rhs - 2.0).abs() <= 1e-12,
        "uniform: {} vs {}",
        u.lhs,
        u.rhs
    );
    Ok(format!(
        "10000 samples + {lattice} lattice points hold, min slack {worst_gap:.3e}, uniform 2 = 2"
    ))
}

fn bounds() -> Outcome {
    let h = |x| binary_entropy(x).unwrap();
    let cap = |e, z, x| secrecy_capacity(e, z, x).unwrap();
    ensure!(h(0.5) == 1.0, "h(0.5) = {}", h(0.5));
    ensure!(
        cap(0.0, 0.0, 0.0) == 2.0,
        "C(0,0,0) = {}",
        cap(0.0, 0.0, 0.0)
    );
    // Reference values from 50-digit evaluation.
    ensure!(
        (cap(0.05, 0.05, 0.05) - 1.1408091286521316).abs() <= 1e-5,
        "C(.05,.05,.05)"
    );
    ensure!(
        (h(0.2) + h(0.3) - 1.603218994118055).abs() <= 1e-12,
        "h(0.2)+h(0.3)"
    );
    ensure!((h(0.11) - 0.499915958164528).abs() <= 1e-12, "h(0.11)");
    Ok(format!(
        "h(0.5) = 1, C(0,0,0) = 2, C(0.05,0.05,0.05) = {:.9}",
        cap(0.05, 0.05, 0.05)
    ))
}

fn noise_calibration() -> Outcome {
    let pairs = 100_000;
    let mut cfg = random_config(8, 2, 1, 0, 0, 0);
    cfg.sacrificed_pairs = pairs;
    cfg.thresholds.decoy = 1.0;
    cfg.thresholds.auth = 1.0;
    cfg.thresholds.check = 1.0;
    let channel = ChannelModel::uniform(0.3).map_err(|e| e.to_string())?;
    let (_, r) = run(
        Protocol::Qsdc,
        &cfg,
        &AdversaryStrategy::None,
        &channel,
        &mut Seeded::new(30),
    )
    .map_err(|e| e.to_string())?;
    let z = r.eps_z.ok_or("no ε_z")?;
    let x = r.eps_x.ok_or("no ε_x")?;
    // Each pair is measured in one random basis.
    ensure!(
        z.samples + x.samples == pairs as u64,
        "{} + {} samples",
        z.samples,
        x.samples
    );
    ensure!(
        within_sigmas(z.value, 0.2, z.samples, 3.0),
        "ε_z = {}",
        z.value
    );
    ensure!(
        within_sigmas(x.value, 0.2, x.samples, 3.0),
        "ε_x = {}",
        x.value
    );
    Ok(format!(
        "ε_z = {:.4}, ε_x = {:.4} over {pairs} pairs",
        z.value, x.value
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "golden examples",
            golden_examples,
            Some(Duration::from_secs(1)),
        ),
        (
            "noiseless round trips",
            round_trips,
            Some(Duration::from_secs(10)),
        ),
        (
            "impersonation detection",
            impersonation,
            Some(Duration::from_secs(60)),
        ),
        ("oracle equivalence", oracle_equivalence, None),
        ("encoding tables", tables, None),
        ("entropy inequality", lemma1, None),
        ("security bound values", bounds, None),
        ("noise calibration", noise_calibration, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut outcome = check();
        let took = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, limit) {
            if took > limit {
                outcome = Err(format!("took {took:.2?}, limit {limit:?}"));
            }
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] {}. {name}: {detail} ({took:.2?})", i + 1);
        failed += usize::from(outcome.is_err());
    }
    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
