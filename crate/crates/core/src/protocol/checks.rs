//! Error-rate comparisons behind every security verdict.

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::pauli::{apply_cover_to_product, Basis, BellLabel, CoverOp, ProductQubit};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub errors: usize,
    pub total: usize,
    pub error_fraction: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckOutcome {
    pub fn from_counts(errors: usize, total: usize, threshold: f64) -> Self {
        let error_fraction = if total == 0 {
            0.0
        } else {
            errors as f64 / total as f64
        };
        CheckOutcome {
            errors,
            total,
            error_fraction,
            threshold,
            pass: error_fraction <= threshold,
        }
    }
}

/// Compares the announced Bell results with the states the verifier expects.
pub fn verify_authentication(
    expected: &[BellLabel],
    announced: &[BellLabel],
    threshold: f64,
) -> Result<CheckOutcome, ProtocolError> {
    if expected.len() != announced.len() {
        return Err(ProtocolError::LengthMismatch {
            expected: expected.len(),
            got: announced.len(),
        });
    }
    let errors = expected
        .iter()
        .zip(announced)
        .filter(|(a, b)| a != b)
        .count();
    Ok(CheckOutcome::from_counts(errors, expected.len(), threshold))
}

/// Compares UTP outcomes on decoys with what their preparation and covers
/// predict. `covers = None` means the decoys travelled uncovered.
pub fn decoy_check(
    prepared: &[ProductQubit],
    covers: Option<&[CoverOp]>,
    outcomes: &[(Basis, bool)],
    threshold: f64,
) -> Result<CheckOutcome, ProtocolError> {
    if prepared.len() != outcomes.len() || covers.is_some_and(|c| c.len() != prepared.len()) {
        return Err(ProtocolError::LengthMismatch {
            expected: prepared.len(),
            got: outcomes.len(),
        });
    }
    let mut errors = 0;
    for (i, (&q, &(basis, bit))) in prepared.iter().zip(outcomes).enumerate() {
        let cover = covers.map_or(CoverOp::I, |c| c[i]);
        let want = apply_cover_to_product(cover, q);
        if want.basis != basis {
            return Err(ProtocolError::Logic(format!(
                "decoy {i} measured in {basis} but its covered state {want} needs {}",
                want.basis
            )));
        }
        if want.bit != bit {
            errors += 1;
        }
    }
    Ok(CheckOutcome::from_counts(errors, prepared.len(), threshold))
}
