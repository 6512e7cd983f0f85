//! `qsdc-sim`: runs, campaigns, example replays and metric evaluation.
//!
//! Exit codes: 0 success, 1 example mismatch, 2 protocol abort, 64 usage or
//! configuration error, 65 metric domain error, 74 I/O error.

mod args;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use qsdc_core::config::{OutputFormat, RunConfig};
use qsdc_core::golden::{example_config, example_randomness, verify_examples};
use qsdc_core::metrics::{
    binary_entropy, impersonation_detection_probability, lemma1_check, secrecy_capacity,
    BellDiagonalDist,
};
use qsdc_core::montecarlo::Campaign;
use qsdc_core::protocol::{run, Randomness, Seeded};
use serde_json::json;

use args::{Cli, Command, MetricsCommand, RunArgs};

const EXIT_MISMATCH: u8 = 1;
const EXIT_ABORTED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Domain(_) => EXIT_DATA,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("qsdc-sim: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Run {
            args,
            example,
            render,
        } => cmd_run(&args, example, render),
        Command::Montecarlo { args } => cmd_montecarlo(&args),
        Command::VerifyExamples { format } => cmd_verify(format),
        Command::Metrics { format, what } => cmd_metrics(format, what),
    }
}

fn load(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            RunConfig::from_toml(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    args.apply(&mut cfg);
    cfg.party
        .validate(cfg.protocol)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if cfg.trials == 0 {
        return Err(Failure::Usage("trials must be at least 1".into()));
    }
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn stdout(bytes: &[u8]) -> Result<(), Failure> {
    io::stdout()
        .write_all(bytes)
        .map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn pretty(v: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s.into_bytes()
}

fn cmd_run(args: &RunArgs, example: bool, render: bool) -> Result<u8, Failure> {
    let mut cfg = load(args)?;
    let mut rand: Box<dyn Randomness> = if example {
        cfg.party = example_config(cfg.protocol);
        Box::new(example_randomness(cfg.protocol))
    } else {
        Box::new(Seeded::new(cfg.seed))
    };
    let channel = cfg
        .channel
        .model()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (transcript, report) = run(
        cfg.protocol,
        &cfg.party,
        &cfg.adversary,
        &channel,
        rand.as_mut(),
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;

    if render {
        eprint!("{}", transcript.render());
    }
    match &cfg.output.dir {
        Some(dir) => {
            let t = write_file(dir, "transcript.jsonl", transcript.to_jsonl().as_bytes())?;
            let r = write_file(dir, "report.json", &pretty(&report))?;
            eprintln!("wrote {} and {}", t.display(), r.display());
        }
        None => stdout(&pretty(&report))?,
    }
    Ok(if transcript.is_completed() {
        0
    } else {
        EXIT_ABORTED
    })
}

fn cmd_montecarlo(args: &RunArgs) -> Result<u8, Failure> {
    let cfg = load(args)?;
    let channel = cfg
        .channel
        .model()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let campaign = Campaign {
        protocol: cfg.protocol,
        config: &cfg.party,
        adversary: cfg.adversary,
        channel,
        master_seed: cfg.seed,
        trials: cfg.trials,
    };
    let result = campaign
        .run(cfg.execution)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let mut csv = Vec::new();
    result
        .write_csv(&mut csv)
        .map_err(|e| Failure::Io(e.to_string()))?;
    let summary = pretty(&result.summary);
    match &cfg.output.dir {
        Some(dir) => {
            let c = write_file(dir, "trials.csv", &csv)?;
            let s = write_file(dir, "summary.json", &summary)?;
            eprintln!("wrote {} and {}", c.display(), s.display());
        }
        None => match cfg.output.format {
            OutputFormat::Csv => stdout(&csv)?,
            OutputFormat::Doc => stdout(&summary)?,
        },
    }
    Ok(0)
}

fn cmd_verify(format: OutputFormat) -> Result<u8, Failure> {
    let reports = verify_examples();
    let out = match format {
        OutputFormat::Doc => pretty(&reports),
        OutputFormat::Csv => {
            let mut s = String::from("protocol,result,checked,detail\n");
            for r in &reports {
                let detail = r
                    .error
                    .clone()
                    .or(r.divergence.as_ref().map(|d| d.to_string()))
                    .unwrap_or_default();
                s += &format!(
                    "{},{},{},\"{}\"\n",
                    r.protocol,
                    if r.passed() { "pass" } else { "fail" },
                    r.checked,
                    detail.replace('"', "\"\"")
                );
            }
            s.into_bytes()
        }
    };
    stdout(&out)?;
    Ok(if reports.iter().all(|r| r.passed()) {
        0
    } else {
        EXIT_MISMATCH
    })
}

fn cmd_metrics(format: OutputFormat, what: MetricsCommand) -> Result<u8, Failure> {
    let domain = |e: qsdc_core::metrics::MetricsError| Failure::Domain(e.to_string());
    let fields: Vec<(&str, serde_json::Value)> = match what {
        MetricsCommand::Entropy { x } => vec![
            ("x", json!(x)),
            ("entropy", json!(binary_entropy(x).map_err(domain)?)),
        ],
        MetricsCommand::Capacity {
            eps_e,
            eps_z,
            eps_x,
        } => {
            let c = secrecy_capacity(eps_e, eps_z, eps_x).map_err(domain)?;
            vec![
                ("eps_e", json!(eps_e)),
                ("eps_z", json!(eps_z)),
                ("eps_x", json!(eps_x)),
                ("capacity", json!(c)),
            ]
        }
        MetricsCommand::Detection { k } => {
            vec![
                ("k", json!(k)),
                ("detection", json!(impersonation_detection_probability(k))),
            ]
        }
        MetricsCommand::Lemma1 { weights } => {
            let w: [f64; 4] = weights.try_into().expect("clap enforces four values");
            let check = lemma1_check(&BellDiagonalDist::new(w).map_err(domain)?);
            vec![
                ("lhs", json!(check.lhs)),
                ("rhs", json!(check.rhs)),
                ("holds", json!(check.holds)),
            ]
        }
    };
    let out = match format {
        OutputFormat::Doc => pretty(&serde_json::Value::Object(
            fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )),
        OutputFormat::Csv => {
            let head: Vec<_> = fields.iter().map(|(k, _)| k.to_string()).collect();
            let row: Vec<_> = fields.iter().map(|(_, v)| v.to_string()).collect();
            format!("{}\n{}\n", head.join(","), row.join(",")).into_bytes()
        }
    };
    stdout(&out)?;
    Ok(0)
}
