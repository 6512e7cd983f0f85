//! Dense state-vector reference for at most four qubits.
//!
//! Builds amplitudes straight from the ket definitions and applies explicit
//! 2×2 matrices and projectors. It shares nothing with the symbolic rules in
//! [`crate::register`] beyond the label enums, and exists to check them.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::pauli::{Basis, BellLabel, CoverOp, PauliOp, ProductQubit};

pub const MAX_QUBITS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("scenario uses {0} qubits, the oracle supports at most {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("qubit {0} is referenced but never prepared, or prepared twice")]
    BadQubit(usize),
}

#[derive(Clone, Copy, Debug)]
pub enum Init {
    /// Bell state on `(first, second)`.
    Pair(usize, usize, BellLabel),
    Product(usize, ProductQubit),
}

#[derive(Clone, Copy, Debug)]
pub enum Gate {
    Pauli(PauliOp),
    Cover(CoverOp),
}

#[derive(Clone, Copy, Debug)]
pub enum Step {
    Apply(usize, Gate),
    Measure(usize, Basis),
    Bell(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Bit(bool),
    Bell(BellLabel),
}

#[derive(Clone, Debug, Default)]
pub struct Scenario {
    pub init: Vec<Init>,
    pub steps: Vec<Step>,
}

/// Exact outcome distribution: one entry per sequence of measurement results.
pub type Distribution = BTreeMap<Vec<Outcome>, f64>;

type Vec2 = [Complex64; 2];
type Vec4 = [Complex64; 4];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ket(q: ProductQubit) -> Vec2 {
    let h = FRAC_1_SQRT_2;
    match (q.basis, q.bit) {
        (Basis::Z, false) => [c(1.0), c(0.0)],
        (Basis::Z, true) => [c(0.0), c(1.0)],
        (Basis::X, false) => [c(h), c(h)],
        (Basis::X, true) => [c(h), c(-h)],
    }
}

// Amplitudes over |00>,|01>,|10>,|11> (first qubit is the high bit).
fn bell(label: BellLabel) -> Vec4 {
    let h = FRAC_1_SQRT_2;
    let z = c(0.0);
    match label {
        BellLabel::PhiPlus => [c(h), z, z, c(h)],
        BellLabel::PhiMinus => [c(h), z, z, c(-h)],
        BellLabel::PsiPlus => [z, c(h), c(h), z],
        BellLabel::PsiMinus => [z, c(h), c(-h), z],
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn matrix(g: Gate) -> Mat2 {
    let h = FRAC_1_SQRT_2;
    let (o, l) = (c(0.0), c(1.0));
    let pauli = |p: PauliOp| -> Mat2 {
        match p {
            PauliOp::I => [[l, o], [o, l]],
            PauliOp::X => [[o, l], [l, o]],
            // iσy = |0><1| - |1><0|
            PauliOp::Y => [[o, l], [-l, o]],
            PauliOp::Z => [[l, o], [o, -l]],
        }
    };
    let hadamard = [[c(h), c(h)], [c(h), c(-h)]];
    match g {
        Gate::Pauli(p) => pauli(p),
        Gate::Cover(CoverOp::I) => pauli(PauliOp::I),
        Gate::Cover(CoverOp::Y) => pauli(PauliOp::Y),
        Gate::Cover(CoverOp::H) => hadamard,
        Gate::Cover(CoverOp::YH) => mul(pauli(PauliOp::Y), hadamard),
    }
}

fn mul(a: Mat2, b: Mat2) -> Mat2 {
    let mut out = [[c(0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

struct State {
    n: usize,
    amps: Vec<Complex64>,
}

impl State {
    fn bit(&self, idx: usize, q: usize) -> usize {
        (idx >> (self.n - 1 - q)) & 1
    }

    fn with_bit(&self, idx: usize, q: usize, v: usize) -> usize {
        let shift = self.n - 1 - q;
        (idx & !(1 << shift)) | (v << shift)
    }

    fn apply(&mut self, q: usize, m: Mat2) {
        let mut out = vec![c(0.0); self.amps.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let row = self.bit(idx, q);
            for (col, entry) in m[row].iter().enumerate() {
                *slot += entry * self.amps[self.with_bit(idx, q, col)];
            }
        }
        self.amps = out;
    }

    // (|v><v| on q) |ψ>
    fn project1(&self, q: usize, v: Vec2) -> Vec<Complex64> {
        (0..self.amps.len())
            .map(|idx| {
                let overlap: Complex64 = (0..2)
                    .map(|b| v[b].conj() * self.amps[self.with_bit(idx, q, b)])
                    .sum();
                v[self.bit(idx, q)] * overlap
            })
            .collect()
    }

    fn project2(&self, a: usize, b: usize, v: Vec4) -> Vec<Complex64> {
        (0..self.amps.len())
            .map(|idx| {
                let mut overlap = c(0.0);
                for ba in 0..2 {
                    for bb in 0..2 {
                        let j = self.with_bit(self.with_bit(idx, a, ba), b, bb);
                        overlap += v[ba * 2 + bb].conj() * self.amps[j];
                    }
                }
                v[self.bit(idx, a) * 2 + self.bit(idx, b)] * overlap
            })
            .collect()
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn initial_state(init: &[Init]) -> Result<State, OracleError> {
    let mut owner: Vec<Option<usize>> = Vec::new();
    let mut claim = |q: usize, who: usize| -> Result<(), OracleError> {
        if owner.len() <= q {
            owner.resize(q + 1, None);
        }
        if owner[q].replace(who).is_some() {
            return Err(OracleError::BadQubit(q));
        }
        Ok(())
    };
    for (i, part) in init.iter().enumerate() {
        match *part {
            Init::Pair(a, b, _) => {
                claim(a, i)?;
                claim(b, i)?;
            }
            Init::Product(a, _) => claim(a, i)?,
        }
    }
    let n = owner.len();
    if n > MAX_QUBITS {
        return Err(OracleError::TooManyQubits(n));
    }
    if let Some(q) = owner.iter().position(Option::is_none) {
        return Err(OracleError::BadQubit(q));
    }
    let mut state = State {
        n,
        amps: vec![c(0.0); 1 << n],
    };
    for idx in 0..(1usize << n) {
        let mut amp = c(1.0);
        for part in init {
            amp *= match *part {
                Init::Pair(a, b, label) => bell(label)[state.bit(idx, a) * 2 + state.bit(idx, b)],
                Init::Product(a, q) => ket(q)[state.bit(idx, a)],
            };
        }
        state.amps[idx] = amp;
    }
    Ok(state)
}

/// Enumerates every branch of the measurement plan and returns the exact
/// probability of each outcome sequence (zero-probability branches omitted).
pub fn oracle_distribution(scenario: &Scenario) -> Result<Distribution, OracleError> {
    let state = initial_state(&scenario.init)?;
    for step in &scenario.steps {
        let refs: &[usize] = match step {
            Step::Apply(q, _) | Step::Measure(q, _) => std::slice::from_ref(q),
            Step::Bell(a, b) => &[*a, *b][..],
        };
        if let Some(&q) = refs.iter().find(|&&q| q >= state.n) {
            return Err(OracleError::BadQubit(q));
        }
    }
    let mut out = Distribution::new();
    branch(state, &scenario.steps, Vec::new(), 1.0, &mut out);
    Ok(out)
}

fn branch(mut state: State, steps: &[Step], seen: Vec<Outcome>, p: f64, out: &mut Distribution) {
    const EPS: f64 = 1e-12;
    let Some((step, rest)) = steps.split_first() else {
        *out.entry(seen).or_insert(0.0) += p;
        return;
    };
    let mut fork = |amps: Vec<Complex64>, outcome: Outcome| {
        let w = norm2(&amps);
        if w < EPS {
            return;
        }
        let scale = c(1.0 / w.sqrt());
        let next = State {
            n: state.n,
            amps: amps.into_iter().map(|a| a * scale).collect(),
        };
        let mut seen = seen.clone();
        seen.push(outcome);
        branch(next, rest, seen, p * w, out);
    };
    match *step {
        Step::Apply(q, g) => {
            state.apply(q, matrix(g));
            branch(state, rest, seen, p, out);
        }
        Step::Measure(q, basis) => {
            for bit in [false, true] {
                fork(
                    state.project1(q, ket(ProductQubit::new(basis, bit))),
                    Outcome::Bit(bit),
                );
            }
        }
        Step::Bell(a, b) => {
            for label in BellLabel::ALL {
                fork(state.project2(a, b, bell(label)), Outcome::Bell(label));
            }
        }
    }
}
