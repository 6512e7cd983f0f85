//! Entropies, error-rate estimators and the secrecy-capacity bound.
//!
//! Logarithms are base 2 throughout; `0·log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::protocol::{Protocol, Stage};

/// Slack for probability normalisation and inequality checks.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("{0} is not a probability")]
    Domain(f64),
    #[error("invalid distribution {0:?}: entries must be non-negative and sum to 1")]
    InvalidDistribution([f64; 4]),
    #[error("no samples available to estimate {0}")]
    InsufficientData(&'static str),
    #[error("{errors} errors out of {samples} samples")]
    BadCounts { errors: u64, samples: u64 },
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn check_probability(x: f64) -> Result<(), MetricsError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(MetricsError::Domain(x))
    }
}

pub fn binary_entropy(x: f64) -> Result<f64, MetricsError> {
    check_probability(x)?;
    Ok(plogp(x) + plogp(1.0 - x))
}

/// Weights of `Φ+, Φ−, Ψ+, Ψ−` in a Bell-diagonal state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalDist([f64; 4]);

impl BellDiagonalDist {
    pub fn new(weights: [f64; 4]) -> Result<Self, MetricsError> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > TOLERANCE {
            return Err(MetricsError::InvalidDistribution(weights));
        }
        Ok(Self(weights))
    }

    pub fn uniform() -> Self {
        Self([0.25; 4])
    }

    pub fn weights(&self) -> [f64; 4] {
        self.0
    }
}

pub fn shannon_entropy(dist: &BellDiagonalDist) -> f64 {
    dist.0.iter().copied().map(plogp).sum()
}

/// Bit-flip and phase-flip rates `(ε_z, ε_x) = (δ3+δ4, δ2+δ4)`.
pub fn rates_from_dist(dist: &BellDiagonalDist) -> (f64, f64) {
    let [_, d2, d3, d4] = dist.0;
    ((d3 + d4).min(1.0), (d2 + d4).min(1.0))
}

/// Upper bound on Eve's information per encoded pair, `h(ε_z) + h(ε_x)`.
pub fn holevo_bound(dist: &BellDiagonalDist) -> f64 {
    let (ez, ex) = rates_from_dist(dist);
    plogp(ez) + plogp(1.0 - ez) + plogp(ex) + plogp(1.0 - ex)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `H(δ) ≤ h(δ2+δ4) + h(δ3+δ4)`.
pub fn lemma1_check(dist: &BellDiagonalDist) -> Lemma1Check {
    let lhs = shannon_entropy(dist);
    let rhs = holevo_bound(dist);
    Lemma1Check {
        lhs,
        rhs,
        holds: lhs <= rhs + TOLERANCE,
    }
}

/// Lower bound `2 − h(ε_e) − h(ε_z) − h(ε_x)` on the secrecy capacity.
pub fn secrecy_capacity(eps_e: f64, eps_z: f64, eps_x: f64) -> Result<f64, MetricsError> {
    Ok(2.0 - binary_entropy(eps_e)? - binary_entropy(eps_z)? - binary_entropy(eps_x)?)
}

/// Transmission is secure only for a strictly positive capacity bound.
pub fn is_secure(capacity: f64) -> bool {
    capacity > 0.0
}

/// Chance that `k` identity pairs expose an impostor: `1 − 4^−k`.
pub fn impersonation_detection_probability(k: u32) -> f64 {
    1.0 - 0.25f64.powi(k as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub value: f64,
    pub errors: u64,
    pub samples: u64,
}

impl RateEstimate {
    /// Binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        (self.value * (1.0 - self.value) / self.samples as f64).sqrt()
    }
}

pub fn estimate_rate(
    errors: u64,
    samples: u64,
    what: &'static str,
) -> Result<RateEstimate, MetricsError> {
    if samples == 0 {
        return Err(MetricsError::InsufficientData(what));
    }
    if errors > samples {
        return Err(MetricsError::BadCounts { errors, samples });
    }
    Ok(RateEstimate {
        value: errors as f64 / samples as f64,
        errors,
        samples,
    })
}

/// Raw `(errors, samples)` counters behind the three error rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateSamples {
    pub z: (u64, u64),
    pub x: (u64, u64),
    pub e: (u64, u64),
}

impl RateSamples {
    pub fn merge(&mut self, other: &RateSamples) {
        for (a, b) in [
            (&mut self.z, other.z),
            (&mut self.x, other.x),
            (&mut self.e, other.e),
        ] {
            a.0 += b.0;
            a.1 += b.1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFragment {
    pub eps_z: RateEstimate,
    pub eps_x: RateEstimate,
    pub eps_e: RateEstimate,
}

/// ε_z, ε_x from sacrificed-pair (or decoy) comparisons and ε_e from check-bit
/// mismatches. Every rate needs at least one sample.
pub fn estimate_rates(samples: &RateSamples) -> Result<RateFragment, MetricsError> {
    Ok(RateFragment {
        eps_z: estimate_rate(samples.z.0, samples.z.1, "eps_z")?,
        eps_x: estimate_rate(samples.x.0, samples.x.1, "eps_x")?,
        eps_e: estimate_rate(samples.e.0, samples.e.1, "eps_e")?,
    })
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Where ε_z and ε_x came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Φ+ pairs sacrificed on the Bob→Alice link.
    SacrificedPairs,
    /// Decoy outcomes grouped by measurement basis.
    Decoys,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCheck {
    pub stage: Stage,
    pub errors: usize,
    pub total: usize,
    pub error_fraction: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub schema_version: u32,
    pub protocol: Protocol,
    pub completed: bool,
    pub abort_stage: Option<Stage>,
    /// The run aborted at some security stage.
    pub detected: bool,
    pub stages: Vec<StageCheck>,
    pub estimator: Estimator,
    pub samples: RateSamples,
    pub eps_z: Option<RateEstimate>,
    pub eps_x: Option<RateEstimate>,
    pub eps_e: Option<RateEstimate>,
    /// `h(ε_z) + h(ε_x)`.
    pub holevo_bound: Option<f64>,
    pub capacity_lower_bound: Option<f64>,
    pub secure: Option<bool>,
}

impl SecurityReport {
    /// Fills every quantity the samples support; anything without data stays
    /// `None`.
    pub fn from_samples(
        protocol: Protocol,
        abort_stage: Option<Stage>,
        stages: Vec<StageCheck>,
        estimator: Estimator,
        samples: RateSamples,
    ) -> Self {
        let eps_z = estimate_rate(samples.z.0, samples.z.1, "eps_z").ok();
        let eps_x = estimate_rate(samples.x.0, samples.x.1, "eps_x").ok();
        let eps_e = estimate_rate(samples.e.0, samples.e.1, "eps_e").ok();
        let h = |r: RateEstimate| binary_entropy(r.value).expect("rates are probabilities");
        let holevo_bound = eps_z.zip(eps_x).map(|(z, x)| h(z) + h(x));
        let capacity_lower_bound = match (eps_e, eps_z, eps_x) {
            (Some(e), Some(z), Some(x)) => secrecy_capacity(e.value, z.value, x.value).ok(),
            _ => None,
        };
        SecurityReport {
            schema_version: REPORT_SCHEMA_VERSION,
            protocol,
            completed: abort_stage.is_none(),
            abort_stage,
            detected: abort_stage.is_some(),
            stages,
            estimator,
            samples,
            eps_z,
            eps_x,
            eps_e,
            holevo_bound,
            capacity_lower_bound,
            secure: capacity_lower_bound.map(is_secure),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 0.4999159581645280 at 40 digits
        close(binary_entropy(0.11).unwrap(), 0.499916, 1e-6);
        assert_eq!(binary_entropy(1.5), Err(MetricsError::Domain(1.5)));
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn shannon_entropy_values() {
        assert_eq!(shannon_entropy(&BellDiagonalDist::uniform()), 2.0);
        assert_eq!(
            shannon_entropy(&BellDiagonalDist::new([1.0, 0.0, 0.0, 0.0]).unwrap()),
            0.0
        );
        let d = BellDiagonalDist::new([0.5, 0.25, 0.125, 0.125]).unwrap();
        assert_eq!(shannon_entropy(&d), 1.75);
    }

    #[test]
    fn invalid_distributions_are_rejected() {
        assert!(BellDiagonalDist::new([0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(BellDiagonalDist::new([1.1, -0.1, 0.0, 0.0]).is_err());
        assert!(BellDiagonalDist::new([f64::NAN, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn rates_from_dist_values() {
        let r = |w| rates_from_dist(&BellDiagonalDist::new(w).unwrap());
        assert_eq!(r([1.0, 0.0, 0.0, 0.0]), (0.0, 0.0));
        assert_eq!(r([0.0, 0.0, 0.0, 1.0]), (1.0, 1.0));
        let (ez, ex) = r([0.7, 0.1, 0.1, 0.1]);
        close(ez, 0.2, 1e-15);
        close(ex, 0.2, 1e-15);
    }

    #[test]
    fn holevo_bound_values() {
        assert_eq!(holevo_bound(&BellDiagonalDist::uniform()), 2.0);
        assert_eq!(
            holevo_bound(&BellDiagonalDist::new([1.0, 0.0, 0.0, 0.0]).unwrap()),
            0.0
        );
        let d = BellDiagonalDist::new([0.6, 0.2, 0.1, 0.1]).unwrap();
        // h(0.2) + h(0.3) = 1.6032189941180550
        close(holevo_bound(&d), 1.603219, 1e-5);
    }

    #[test]
    fn lemma1_boundary_cases() {
        let u = lemma1_check(&BellDiagonalDist::uniform());
        assert_eq!((u.lhs, u.rhs, u.holds), (2.0, 2.0, true));
        let p = lemma1_check(&BellDiagonalDist::new([1.0, 0.0, 0.0, 0.0]).unwrap());
        assert_eq!((p.lhs, p.rhs, p.holds), (0.0, 0.0, true));
    }

    #[test]
    fn secrecy_capacity_values() {
        assert_eq!(secrecy_capacity(0.0, 0.0, 0.0).unwrap(), 2.0);
        assert!(is_secure(2.0));
        let worst = secrecy_capacity(0.5, 0.5, 0.5).unwrap();
        assert_eq!(worst, -1.0);
        assert!(!is_secure(worst));
        // 2 - 3 h(0.05) = 1.1408091286521316
        close(secrecy_capacity(0.05, 0.05, 0.05).unwrap(), 1.140809, 1e-5);
        assert!(secrecy_capacity(0.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn detection_probability_values() {
        assert_eq!(impersonation_detection_probability(0), 0.0);
        assert_eq!(impersonation_detection_probability(1), 0.75);
        assert_eq!(impersonation_detection_probability(3), 0.984375);
    }

    #[test]
    fn estimate_rates_counts() {
        let s = RateSamples {
            z: (0, 10),
            x: (0, 10),
            e: (25, 100),
        };
        let f = estimate_rates(&s).unwrap();
        assert_eq!(f.eps_z.value, 0.0);
        assert_eq!(f.eps_x.value, 0.0);
        assert_eq!(f.eps_e.value, 0.25);
        let empty = RateSamples { z: (0, 0), ..s };
        assert_eq!(
            estimate_rates(&empty),
            Err(MetricsError::InsufficientData("eps_z"))
        );
        assert!(estimate_rate(3, 2, "x").is_err());
    }

    fn simplex() -> impl Strategy<Value = BellDiagonalDist> {
        prop::array::uniform4(0.0f64..1.0).prop_filter_map("non-degenerate", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-9)
                .then(|| BellDiagonalDist::new(w.map(|x| x / s)).ok())
                .flatten()
        })
    }

    proptest! {
        #[test]
        fn binary_entropy_is_symmetric(x in 0.0f64..=1.0) {
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a <= 1.0);
        }

        #[test]
        fn chain_consistency(d in simplex()) {
            prop_assert!(shannon_entropy(&d) <= holevo_bound(&d) + TOLERANCE);
        }

        #[test]
        fn factorised_distributions_reach_equality(y in 0.0f64..=1.0, z in 0.0f64..=1.0) {
            // Y ~ (δ2+δ4) and Z ~ (δ3+δ4) independent.
            let w = [(1.0 - y) * (1.0 - z), y * (1.0 - z), (1.0 - y) * z, y * z];
            let d = BellDiagonalDist::new(w).unwrap();
            let c = lemma1_check(&d);
            prop_assert!((c.lhs - c.rhs).abs() < 1e-9);
        }

        #[test]
        fn capacity_is_monotone(a in 0.0f64..0.5, b in 0.0f64..0.5, step in 0.0f64..0.1) {
            let bumped = (a + step).min(0.5);
            let base = secrecy_capacity(a, b, b).unwrap();
            prop_assert!(secrecy_capacity(bumped, b, b).unwrap() <= base + 1e-12);
            prop_assert!(secrecy_capacity(b, bumped, b).unwrap() <= secrecy_capacity(b, a, b).unwrap() + 1e-12);
            prop_assert!(secrecy_capacity(b, b, bumped).unwrap() <= secrecy_capacity(b, b, a).unwrap() + 1e-12);
        }
    }
}
