//! Fitting a single chain to user-supplied data.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::designs::scatter_matrix;
use crate::error::{Error, Result};
use crate::metrics::{adjacency_from_estimate, unit_diag_scale};
use crate::rng::RngStream;
use crate::sampler::{run_chain, ChainConfig, ChainOutput, SamplerKind};

use super::ingest::ingest_csv;
use super::output::{write_adjacency, write_json, Manifest};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub data: PathBuf,
    pub sampler: SamplerKind,
    pub burn_in: usize,
    pub draws: usize,
    pub thin: usize,
    pub r: f64,
    pub s: f64,
    pub threshold: f64,
    pub abs_threshold: bool,
    pub standardize: bool,
    pub seed: u64,
    pub out: PathBuf,
}

impl FitConfig {
    pub fn chain_config(&self) -> ChainConfig {
        ChainConfig {
            burn_in: self.burn_in,
            draws: self.draws,
            thin: self.thin,
            r: self.r,
            s: self.s,
            ..ChainConfig::new(self.sampler)
        }
    }
}

#[derive(Serialize)]
struct Timing {
    wall_secs: f64,
    chain_secs: f64,
}

/// Reads the data, runs one chain and writes the posterior summaries.
pub fn cmd_fit(cfg: &FitConfig) -> Result<ChainOutput> {
    let start = Instant::now();
    if !(cfg.threshold > 0.0 && cfg.threshold.is_finite()) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {}", cfg.threshold)));
    }
    let chain = cfg.chain_config();
    chain.validate()?;
    let data = ingest_csv(&cfg.data, cfg.standardize)?;
    if data.rows() < 2 || data.cols() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 rows and 2 columns, got {} x {}",
            data.rows(),
            data.cols()
        )));
    }
    let scatter = scatter_matrix(&data.data);
    let out = run_chain(&scatter, data.rows(), &chain, &mut RngStream::new(cfg.seed, 0))?;

    let dir = &cfg.out;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(dir.join("manifest.json"), &Manifest::new("fit", cfg))?;
    out.posterior_mean.write_csv(dir.join("omega_mean.csv"))?;
    unit_diag_scale(&out.posterior_mean)?.write_csv(dir.join("omega_scaled.csv"))?;
    write_adjacency(
        dir.join("adjacency.csv"),
        &adjacency_from_estimate(&out.posterior_mean, cfg.threshold, cfg.abs_threshold),
    )?;
    write_json(dir.join("audit.json"), &out.audit)?;
    write_json(
        dir.join("timing.json"),
        &Timing {
            wall_secs: start.elapsed().as_secs_f64(),
            chain_secs: out.elapsed_secs,
        },
    )?;
    Ok(out)
}
