//! Command-line interface: `simulate`, `audit` and `fit`.
//!
//! Exit status is 0 on success, 1 when a run fails or any replication
//! fails, and 2 for invalid arguments or input.

pub mod campaign;
pub mod fit;
pub mod ingest;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::designs::DesignKind;
use crate::error::Error;
use crate::sampler::SamplerKind;

pub use campaign::{cmd_audit, cmd_simulate, CampaignReport, ScenarioConfig};
pub use fit::{cmd_fit, FitConfig};

#[derive(Debug, Parser)]
#[command(name = "bglasso", version, about = "Bayesian adaptive graphical lasso samplers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run replications over graph designs and report losses and edge recovery.
    Simulate(ScenarioArgs),
    /// Count positive-definiteness violations only.
    Audit(ScenarioArgs),
    /// Fit one chain to a CSV data matrix.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Sweeps discarded before draws are retained.
    #[arg(long, default_value_t = 5000)]
    pub burnin: usize,
    /// Retained draws.
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    /// Sweeps per retained draw.
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Gamma shape hyperparameter for the shrinkage parameters.
    #[arg(long, default_value_t = 1e-2)]
    pub r: f64,
    /// Gamma rate hyperparameter for the shrinkage parameters.
    #[arg(long, default_value_t = 1e-6)]
    pub s: f64,
    /// Edge threshold on the posterior mean.
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
    /// Threshold the signed entry rather than its absolute value.
    #[arg(long)]
    pub signed_threshold: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Comma-separated designs (ar1, ar2, block, star, circle, full) or "all".
    #[arg(long, default_value = "all")]
    pub design: String,
    #[arg(long, default_value_t = 30)]
    pub p: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Comma-separated samplers (bgs, hrs) or "both".
    #[arg(long, default_value = "both")]
    pub sampler: String,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    /// Use (TN + FN) in the MCC denominator instead of (TN + FP).
    #[arg(long)]
    pub mcc_as_printed: bool,
    #[command(flatten)]
    pub chain: ChainArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file, one observation per row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "hrs")]
    pub sampler: SamplerKind,
    /// Centre and scale every column before fitting.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub chain: ChainArgs,
}

fn parse_list<T: std::str::FromStr<Err = Error>>(text: &str, all_word: &str, all: &[T]) -> Result<Vec<T>, Error>
where
    T: Copy + PartialEq,
{
    if text.trim().eq_ignore_ascii_case(all_word) {
        return Ok(all.to_vec());
    }
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let v = item.parse()?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

impl ScenarioArgs {
    pub fn to_config(&self) -> Result<ScenarioConfig, Error> {
        Ok(ScenarioConfig {
            designs: parse_list(&self.design, "all", &DesignKind::ALL)?,
            p: self.p,
            n: self.n,
            samplers: parse_list(&self.sampler, "both", &[SamplerKind::Bgs, SamplerKind::Hrs])?,
            burn_in: self.chain.burnin,
            draws: self.chain.draws,
            replications: self.reps,
            r: self.chain.r,
            s: self.chain.s,
            threshold: self.chain.threshold,
            seed: self.chain.seed,
            thin: self.chain.thin,
            mcc_as_printed: self.mcc_as_printed,
            abs_threshold: !self.chain.signed_threshold,
            out: self.chain.out.clone(),
        })
    }
}

impl FitArgs {
    pub fn to_config(&self) -> FitConfig {
        FitConfig {
            data: self.data.clone(),
            sampler: self.sampler,
            burn_in: self.chain.burnin,
            draws: self.chain.draws,
            thin: self.chain.thin,
            r: self.chain.r,
            s: self.chain.s,
            threshold: self.chain.threshold,
            abs_threshold: !self.chain.signed_threshold,
            standardize: self.standardize,
            seed: self.chain.seed,
            out: self.chain.out.clone(),
        }
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_) | Error::UnsupportedDesign { .. } | Error::Parse { .. } => 2,
        _ => 1,
    }
}

fn report_failures(report: &CampaignReport) -> i32 {
    for f in &report.failures {
        eprintln!(
            "replication failed: design {} sampler {} replication {} (seed {}, stream {}): {}",
            f.design, f.sampler, f.replication, f.seed, f.stream_id, f.error
        );
    }
    i32::from(!report.failures.is_empty())
}

/// Runs the parsed command and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Simulate(args) => args.to_config().and_then(|c| cmd_simulate(&c)).map(|r| report_failures(&r)),
        Command::Audit(args) => args.to_config().and_then(|c| cmd_audit(&c)).map(|r| report_failures(&r)),
        Command::Fit(args) => cmd_fit(&args.to_config()).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (program name first) and runs; clap usage errors exit 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_parse() {
        let cli = Cli::try_parse_from(["bglasso", "audit", "--design", "circle, ar1", "--sampler", "hrs"]).unwrap();
        let Command::Audit(args) = cli.command else { panic!() };
        let cfg = args.to_config().unwrap();
        assert_eq!(cfg.designs, vec![DesignKind::Circle, DesignKind::Ar1]);
        assert_eq!(cfg.samplers, vec![SamplerKind::Hrs]);
        assert_eq!(cfg.burn_in, 5000);
        assert!(cfg.abs_threshold);
    }

    #[test]
    fn unknown_design_is_config_error() {
        let cli = Cli::try_parse_from(["bglasso", "simulate", "--design", "ring"]).unwrap();
        let Command::Simulate(args) = cli.command else { panic!() };
        let e = args.to_config().unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with_args(["bglasso", "simulate", "--p", "abc"]), 2);
        assert_eq!(main_with_args(["bglasso"]), 2);
    }
}
