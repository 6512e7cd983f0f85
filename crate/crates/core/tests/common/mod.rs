#![allow(dead_code)]

use std::collections::BTreeMap;

use qsdc_core::oracle::{oracle_distribution, Gate, Init, Outcome, Scenario, Step};
use qsdc_core::pauli::{Basis, BellLabel, CoverOp, PauliOp, ProductQubit};
use qsdc_core::protocol::{BitString, ProtocolConfig, Thresholds};
use qsdc_core::register::{Coin, Party, QuantumError, Register, Role, SlotId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_bits(rng: &mut impl Rng, n: usize) -> BitString {
    (0..n).map(|_| rng.random::<bool>()).collect()
}

/// A valid configuration with random messages and identities.
pub fn random_config(
    seed: u64,
    n: usize,
    k: usize,
    c: usize,
    d: usize,
    fresh: usize,
) -> ProtocolConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    ProtocolConfig {
        message: random_bits(&mut rng, n),
        bob_message: Some(random_bits(&mut rng, n)),
        identity_alice: random_bits(&mut rng, 2 * k),
        identity_bob: random_bits(&mut rng, 2 * k),
        check_bits: c,
        decoys: d,
        fresh_decoys: fresh,
        thresholds: Thresholds::default(),
        sacrificed_pairs: 0,
    }
}

/// Replays a fixed list of choices, then records how many were used. Each
/// choice is `(value, n)`; the probability of a path is the product of `1/n`.
pub struct PathCoin {
    pub script: Vec<usize>,
    pub used: Vec<usize>,
}

impl Coin for PathCoin {
    fn choose(&mut self, n: usize) -> usize {
        let i = self.used.len();
        self.used.push(n);
        self.script.get(i).copied().unwrap_or(0) % n
    }
}

/// Runs `f` along every branch of its coin choices, returning the exact
/// distribution of its outputs with probabilities as multiples of `1/256`.
pub fn enumerate<T: Ord + Clone>(mut f: impl FnMut(&mut PathCoin) -> T) -> BTreeMap<T, u32> {
    let mut out = BTreeMap::new();
    let mut stack = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let mut coin = PathCoin {
            script: prefix.clone(),
            used: Vec::new(),
        };
        let result = f(&mut coin);
        if coin.used.len() > prefix.len() {
            // Branch on the first unscripted choice.
            let n = coin.used[prefix.len()];
            for v in 0..n {
                let mut p = prefix.clone();
                p.push(v);
                stack.push(p);
            }
            continue;
        }
        let denom: usize = coin.used.iter().product();
        assert!(
            256 % denom == 0,
            "branch probability 1/{denom} is not a multiple of 1/256"
        );
        *out.entry(result).or_insert(0) += (256 / denom) as u32;
    }
    out
}

/// Runs a scenario on the symbolic register along one coin path. `None`
/// when the register refuses a step (a Bell measurement on an H-covered half).
pub fn run_symbolic(sc: &Scenario, coin: &mut PathCoin) -> Option<Vec<Outcome>> {
    let mut reg = Register::new();
    let mut ids: BTreeMap<usize, SlotId> = BTreeMap::new();
    for init in &sc.init {
        match *init {
            Init::Pair(a, b, label) => {
                let (x, y) = reg.prepare_pair(
                    label,
                    Role::Message,
                    Party::Bob,
                    [format!("q{a}"), format!("q{b}")],
                );
                ids.insert(a, x);
                ids.insert(b, y);
            }
            Init::Product(q, state) => {
                ids.insert(
                    q,
                    reg.prepare_product(state, Role::Decoy, Party::Bob, format!("q{q}")),
                );
            }
        }
    }
    let mut out = Vec::new();
    for step in &sc.steps {
        match *step {
            Step::Apply(q, Gate::Pauli(p)) => reg.apply_pauli(ids[&q], p).unwrap(),
            Step::Apply(q, Gate::Cover(c)) => reg.apply_cover(ids[&q], c).unwrap(),
            Step::Measure(q, basis) => out.push(Outcome::Bit(
                reg.measure_single(ids[&q], basis, coin).unwrap(),
            )),
            Step::Bell(a, b) => match reg.measure_bell(ids[&a], ids[&b], coin) {
                Ok(l) => out.push(Outcome::Bell(l)),
                Err(QuantumError::CoveredHalf(_)) => return None,
                Err(e) => panic!("{e}"),
            },
        }
    }
    Some(out)
}

/// No gate, each Pauli, and each cover.
fn gates() -> Vec<Option<Gate>> {
    let mut g = vec![None];
    g.extend(
        PauliOp::ALL
            .into_iter()
            .skip(1)
            .map(|p| Some(Gate::Pauli(p))),
    );
    g.extend(
        CoverOp::ALL
            .into_iter()
            .skip(1)
            .map(|c| Some(Gate::Cover(c))),
    );
    g
}

fn with_gates(init: Vec<Init>, gated: &[usize], plan: &[Step], out: &mut Vec<Scenario>) {
    let gs = gates();
    let mut idx = vec![0usize; gated.len()];
    loop {
        let mut steps: Vec<Step> = gated
            .iter()
            .zip(&idx)
            .filter_map(|(&q, &i)| gs[i].map(|g| Step::Apply(q, g)))
            .collect();
        steps.extend_from_slice(plan);
        out.push(Scenario {
            init: init.clone(),
            steps,
        });
        let Some(pos) = (0..idx.len()).find(|&j| idx[j] + 1 < gs.len()) else {
            break;
        };
        idx[pos] += 1;
        for j in idx.iter_mut().take(pos) {
            *j = 0;
        }
    }
}

fn products(first: usize, n: usize) -> Vec<Vec<Init>> {
    let mut all = vec![Vec::new()];
    for q in first..first + n {
        all = all
            .into_iter()
            .flat_map(|v| {
                ProductQubit::ALL.into_iter().map(move |s| {
                    let mut v = v.clone();
                    v.push(Init::Product(q, s));
                    v
                })
            })
            .collect();
    }
    all
}

/// Every initial configuration of at most two pairs or four product qubits,
/// each with a gate on selected qubits and each measurement plan that
/// exercises a distinct single-qubit or Bell rule.
pub fn oracle_scenarios() -> Vec<Scenario> {
    use Step::{Bell, Measure};
    let mut out = Vec::new();
    let bb: Vec<(Basis, Basis)> = bases()
        .into_iter()
        .flat_map(|a| bases().map(move |b| (a, b)))
        .collect();

    for n in 1..=4 {
        for init in products(0, n) {
            let mut plans: Vec<Vec<Step>> = Vec::new();
            match n {
                1 => plans.extend(bases().map(|b| vec![Measure(0, b)])),
                2 => {
                    plans.push(vec![Bell(0, 1)]);
                    plans.extend(bb.iter().map(|&(a, b)| vec![Measure(0, a), Measure(1, b)]));
                }
                3 => plans.extend(bases().map(|b| vec![Bell(0, 1), Measure(2, b)])),
                _ => plans.push(vec![Bell(0, 1), Bell(2, 3)]),
            }
            let gated: &[usize] = if n == 2 { &[0, 1] } else { &[0] };
            for plan in plans {
                with_gates(init.clone(), gated, &plan, &mut out);
            }
        }
    }

    for label in BellLabel::ALL {
        let pair = vec![Init::Pair(0, 1, label)];
        let mut plans = vec![vec![Bell(0, 1)], vec![Bell(1, 0)]];
        for &(a, b) in &bb {
            plans.push(vec![Measure(0, a), Measure(1, b)]);
            plans.push(vec![Measure(1, b), Measure(0, a)]);
        }
        for plan in plans {
            with_gates(pair.clone(), &[0, 1], &plan, &mut out);
        }
        for extra in products(2, 1) {
            let init: Vec<Init> = pair.iter().copied().chain(extra).collect();
            for b in bases() {
                for plan in [
                    vec![Bell(0, 2), Measure(1, b)],
                    vec![Bell(2, 1), Measure(0, b)],
                ] {
                    with_gates(init.clone(), &[0, 1], &plan, &mut out);
                }
            }
        }
        for extra in products(2, 2) {
            let init: Vec<Init> = pair.iter().copied().chain(extra).collect();
            with_gates(init, &[0, 1], &[Bell(0, 2), Bell(1, 3)], &mut out);
        }
    }

    for l1 in BellLabel::ALL {
        for l2 in BellLabel::ALL {
            let init = vec![Init::Pair(0, 1, l1), Init::Pair(2, 3, l2)];
            let mut plans = vec![
                vec![Bell(0, 1), Bell(2, 3)],
                vec![Bell(1, 2), Bell(0, 3)],
                vec![Bell(1, 3), Bell(2, 0)],
            ];
            for &(a, b) in &bb {
                plans.push(vec![Bell(1, 2), Measure(0, a), Measure(3, b)]);
                plans.push(vec![Measure(1, a), Bell(0, 2), Measure(3, b)]);
            }
            for plan in plans {
                with_gates(init.clone(), &[1, 3], &plan, &mut out);
            }
        }
    }
    out
}

/// Compares the symbolic rules with the oracle on one scenario. Returns
/// `false` when the register refused the scenario, which is only allowed for
/// Bell measurements on H-covered halves.
pub fn check_against_oracle(sc: &Scenario) -> Result<bool, String> {
    let refused = run_symbolic(
        sc,
        &mut PathCoin {
            script: Vec::new(),
            used: Vec::new(),
        },
    )
    .is_none();
    if refused {
        return Ok(false);
    }
    let symbolic =
        enumerate(|coin| run_symbolic(sc, coin).expect("refusal does not depend on the coin"));
    let oracle = oracle_distribution(sc).map_err(|e| e.to_string())?;
    let mut scaled = BTreeMap::new();
    for (k, p) in &oracle {
        let units = p * 256.0;
        if (units - units.round()).abs() > 1e-9 {
            return Err(format!(
                "{sc:?}: oracle probability {p} of {k:?} is not a multiple of 1/256"
            ));
        }
        if units.round() > 0.0 {
            scaled.insert(k.clone(), units.round() as u32);
        }
    }
    if scaled != symbolic {
        return Err(format!(
            "{sc:?}: oracle {scaled:?} vs symbolic {symbolic:?}"
        ));
    }
    Ok(true)
}

pub fn bases() -> [Basis; 2] {
    [Basis::Z, Basis::X]
}
