use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qsdc_core::adversary::AdversaryStrategy;
use qsdc_core::config::{OutputFormat, RunConfig};
use qsdc_core::montecarlo::Execution;
use qsdc_core::protocol::{BitString, Protocol};

#[derive(Parser, Debug)]
#[command(
    name = "qsdc-sim",
    version,
    about = "Simulate MDI secure direct communication with mutual authentication"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Execute one protocol run and write its transcript and security report.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Replay the worked example for the protocol with its scripted choices.
        #[arg(long)]
        example: bool,
        /// Print a readable transcript to stderr.
        #[arg(long)]
        render: bool,
    },
    /// Run independent seeded trials and aggregate detection and error rates.
    Montecarlo {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Replay the three worked examples and compare every recorded step.
    VerifyExamples {
        #[arg(long, default_value = "doc")]
        format: OutputFormat,
    },
    /// Evaluate a security formula.
    Metrics {
        #[arg(long, default_value = "doc", global = true)]
        format: OutputFormat,
        #[command(subcommand)]
        what: MetricsCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum MetricsCommand {
    /// Binary entropy h(x).
    Entropy { x: f64 },
    /// Secrecy-capacity lower bound 2 − h(ε_e) − h(ε_z) − h(ε_x).
    Capacity { eps_e: f64, eps_z: f64, eps_x: f64 },
    /// Chance of exposing an impostor with k identity pairs.
    Detection {
        #[arg(long)]
        k: u32,
    },
    /// Compare H(δ) with h(ε_z) + h(ε_x) for Bell-diagonal weights of Φ+, Φ−, Ψ+, Ψ−.
    Lemma1 {
        #[arg(num_args = 4, required = true)]
        weights: Vec<f64>,
    },
}

/// Every key of the config file, as a flag. Flags override the file.
#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub protocol: Option<Protocol>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// none, impersonate-alice, impersonate-bob or intercept-resend:<link>[:Z|X].
    #[arg(long)]
    pub adversary: Option<AdversaryStrategy>,
    #[arg(long)]
    pub execution: Option<Execution>,
    /// Binary, or hex with a 0x prefix.
    #[arg(long, value_parser = parse_bits)]
    pub message: Option<BitString>,
    #[arg(long, value_parser = parse_bits)]
    pub bob_message: Option<BitString>,
    #[arg(long, value_parser = parse_bits)]
    pub identity_alice: Option<BitString>,
    #[arg(long, value_parser = parse_bits)]
    pub identity_bob: Option<BitString>,
    #[arg(long)]
    pub check_bits: Option<usize>,
    #[arg(long)]
    pub decoys: Option<usize>,
    #[arg(long)]
    pub fresh_decoys: Option<usize>,
    #[arg(long)]
    pub sacrificed_pairs: Option<usize>,
    #[arg(long)]
    pub threshold_decoy: Option<f64>,
    #[arg(long)]
    pub threshold_auth: Option<f64>,
    #[arg(long)]
    pub threshold_check: Option<f64>,
    /// Pauli error probability per traversal.
    #[arg(long)]
    pub noise_p: Option<f64>,
    /// Relative X,Y,Z error weights.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub noise_weights: Option<Vec<f64>>,
    /// Bell-diagonal channel weights of Φ+,Φ−,Ψ+,Ψ−, replacing --noise-p.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub bell_diagonal: Option<Vec<f64>>,
    /// Output directory; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<OutputFormat>,
}

fn parse_bits(s: &str) -> Result<BitString, String> {
    BitString::parse_flexible(s).map_err(|e| e.to_string())
}

fn set<T>(slot: &mut T, v: &Option<T>)
where
    T: Clone,
{
    if let Some(v) = v {
        *slot = v.clone();
    }
}

impl RunArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.protocol, &self.protocol);
        set(&mut cfg.seed, &self.seed);
        set(&mut cfg.trials, &self.trials);
        set(&mut cfg.adversary, &self.adversary);
        set(&mut cfg.execution, &self.execution);
        set(&mut cfg.party.message, &self.message);
        if self.bob_message.is_some() {
            cfg.party.bob_message = self.bob_message.clone();
        }
        set(&mut cfg.party.identity_alice, &self.identity_alice);
        set(&mut cfg.party.identity_bob, &self.identity_bob);
        set(&mut cfg.party.check_bits, &self.check_bits);
        set(&mut cfg.party.decoys, &self.decoys);
        set(&mut cfg.party.fresh_decoys, &self.fresh_decoys);
        set(&mut cfg.party.sacrificed_pairs, &self.sacrificed_pairs);
        set(&mut cfg.party.thresholds.decoy, &self.threshold_decoy);
        set(&mut cfg.party.thresholds.auth, &self.threshold_auth);
        set(&mut cfg.party.thresholds.check, &self.threshold_check);
        if let Some(p) = self.noise_p {
            cfg.channel.p = p;
            cfg.channel.bell_diagonal = None;
        }
        if let Some(w) = &self.noise_weights {
            cfg.channel.weights = Some([w[0], w[1], w[2]]);
            cfg.channel.bell_diagonal = None;
        }
        if let Some(d) = &self.bell_diagonal {
            cfg.channel.bell_diagonal = Some([d[0], d[1], d[2], d[3]]);
            cfg.channel.p = 0.0;
            cfg.channel.weights = None;
        }
        if self.out.is_some() {
            cfg.output.dir = self.out.clone();
        }
        set(&mut cfg.output.format, &self.format);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_win_over_file_values() {
        let mut cfg =
            RunConfig::from_toml("seed = 3\n[channel]\nbell_diagonal = [0.7, 0.1, 0.1, 0.1]")
                .unwrap();
        let args = RunArgs {
            seed: Some(11),
            noise_p: Some(0.2),
            threshold_auth: Some(0.5),
            ..Default::default()
        };
        args.apply(&mut cfg);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.channel.p, 0.2);
        assert_eq!(cfg.channel.bell_diagonal, None);
        assert_eq!(cfg.party.thresholds.auth, 0.5);
        assert_eq!(cfg.trials, RunConfig::default().trials);
    }
}
