//! Batches of independent protocol runs.
//!
//! Trial `t` of a campaign draws from `Seeded::for_trial(master_seed, t)`:
//! the master seed picks the ChaCha key and the trial index picks the stream,
//! so trials never share randomness and can run in any order.

use std::collections::BTreeMap;
use std::io;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryStrategy, ChannelModel};
use crate::metrics::{RateSamples, SecurityReport};
use crate::protocol::{run, Protocol, ProtocolConfig, ProtocolError, Seeded, Stage};

pub const CAMPAIGN_SCHEMA_VERSION: u32 = 1;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Falls back to sequential without the `parallel` feature.
    #[default]
    Parallel,
}

impl std::str::FromStr for Execution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(Execution::Sequential),
            "parallel" => Ok(Execution::Parallel),
            other => Err(format!(
                "unknown execution `{other}` (expected sequential or parallel)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Campaign<'a> {
    pub protocol: Protocol,
    pub config: &'a ProtocolConfig,
    pub adversary: AdversaryStrategy,
    pub channel: ChannelModel,
    pub master_seed: u64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: u64,
    pub abort_stage: Option<Stage>,
    pub samples: RateSamples,
    pub eps_z: Option<f64>,
    pub eps_x: Option<f64>,
    pub eps_e: Option<f64>,
}

impl TrialRow {
    fn from_report(trial: u64, r: &SecurityReport) -> Self {
        TrialRow {
            trial,
            abort_stage: r.abort_stage,
            samples: r.samples,
            eps_z: r.eps_z.map(|e| e.value),
            eps_x: r.eps_x.map(|e| e.value),
            eps_e: r.eps_e.map(|e| e.value),
        }
    }

    pub fn completed(&self) -> bool {
        self.abort_stage.is_none()
    }

    pub fn detected(&self) -> bool {
        self.abort_stage.is_some()
    }
}

/// A proportion with its normal-approximation 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub mean: f64,
    pub ci95: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Option<Self> {
        if trials == 0 {
            return None;
        }
        let mean = successes as f64 / trials as f64;
        let ci95 = Z95 * (mean * (1.0 - mean) / trials as f64).sqrt();
        Some(Proportion {
            successes,
            trials,
            mean,
            ci95,
        })
    }

    pub fn std_error(&self) -> f64 {
        self.ci95 / Z95
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub schema_version: u32,
    pub protocol: Protocol,
    pub adversary: String,
    pub master_seed: u64,
    pub trials: u64,
    pub completed: Proportion,
    pub detected: Proportion,
    pub abort_stages: BTreeMap<Stage, u64>,
    /// Pooled over every sample of every trial.
    pub eps_z: Option<Proportion>,
    pub eps_x: Option<Proportion>,
    pub eps_e: Option<Proportion>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    pub rows: Vec<TrialRow>,
    pub summary: CampaignSummary,
}

impl Campaign<'_> {
    pub fn trial(&self, t: u64) -> Result<SecurityReport, ProtocolError> {
        let mut rand = Seeded::for_trial(self.master_seed, t);
        run(
            self.protocol,
            self.config,
            &self.adversary,
            &self.channel,
            &mut rand,
        )
        .map(|(_, r)| r)
    }

    pub fn run(&self, exec: Execution) -> Result<CampaignResult, ProtocolError> {
        self.config.validate(self.protocol)?;
        let one = |t| self.trial(t).map(|r| TrialRow::from_report(t, &r));
        let rows = match exec {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..self.trials)
                .into_par_iter()
                .map(one)
                .collect::<Result<Vec<_>, _>>()?,
            _ => (0..self.trials).map(one).collect::<Result<Vec<_>, _>>()?,
        };
        let summary = self.summarize(&rows);
        Ok(CampaignResult { rows, summary })
    }

    fn summarize(&self, rows: &[TrialRow]) -> CampaignSummary {
        let n = rows.len() as u64;
        let completed = rows.iter().filter(|r| r.completed()).count() as u64;
        let mut abort_stages = BTreeMap::new();
        let mut pooled = RateSamples::default();
        for r in rows {
            if let Some(s) = r.abort_stage {
                *abort_stages.entry(s).or_insert(0) += 1;
            }
            pooled.merge(&r.samples);
        }
        CampaignSummary {
            schema_version: CAMPAIGN_SCHEMA_VERSION,
            protocol: self.protocol,
            adversary: self.adversary.to_string(),
            master_seed: self.master_seed,
            trials: n,
            completed: Proportion::new(completed, n).expect("at least one trial"),
            detected: Proportion::new(n - completed, n).expect("at least one trial"),
            abort_stages,
            eps_z: Proportion::new(pooled.z.0, pooled.z.1),
            eps_x: Proportion::new(pooled.x.0, pooled.x.1),
            eps_e: Proportion::new(pooled.e.0, pooled.e.1),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl CampaignResult {
    /// One row per trial, then a `mean` row and a `ci95` row of half-widths.
    /// The first line is a `#` comment carrying the schema version.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> Result<(), csv::Error> {
        writeln!(w, "# schema_version={CAMPAIGN_SCHEMA_VERSION}")?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "trial",
            "status",
            "abort_stage",
            "eps_z",
            "eps_x",
            "eps_e",
            "detected",
        ])?;
        for r in &self.rows {
            out.write_record([
                r.trial.to_string(),
                if r.completed() {
                    "completed"
                } else {
                    "aborted"
                }
                .to_string(),
                r.abort_stage.map(|s| s.to_string()).unwrap_or_default(),
                opt(r.eps_z),
                opt(r.eps_x),
                opt(r.eps_e),
                u8::from(r.detected()).to_string(),
            ])?;
        }
        let s = &self.summary;
        let rates = [s.eps_z, s.eps_x, s.eps_e];
        for (name, pick) in [
            ("mean", (|p: &Proportion| p.mean) as fn(&Proportion) -> f64),
            ("ci95", |p| p.ci95),
        ] {
            let mut rec = vec![
                name.to_string(),
                pick(&s.completed).to_string(),
                String::new(),
            ];
            rec.extend(rates.iter().map(|r| opt(r.as_ref().map(pick))));
            rec.push(pick(&s.detected).to_string());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}
