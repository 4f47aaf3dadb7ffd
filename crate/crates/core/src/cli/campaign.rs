//! Simulation campaigns: replications over designs and samplers.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designs::{build_design, scatter_matrix, simulate_data, DesignKind, GraphDesign};
use crate::error::{Error, Result};
use crate::metrics::{
    adjacency_from_estimate, confusion_counts, frobenius_loss, stein_loss, ConfusionCounts,
};
use crate::rng::RngStream;
use crate::sampler::{run_chain, ChainConfig, SamplerKind, ViolationAudit};

use super::output::{write_csv_rows, write_json, Manifest};

/// Stream-id tags keep data, chain and bootstrap randomness apart.
const DATA_TAG: u64 = 1 << 60;
const CHAIN_TAG: u64 = 2 << 60;
const BOOTSTRAP_TAG: u64 = 3 << 60;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub designs: Vec<DesignKind>,
    pub p: usize,
    pub n: usize,
    pub samplers: Vec<SamplerKind>,
    pub burn_in: usize,
    pub draws: usize,
    pub replications: usize,
    pub r: f64,
    pub s: f64,
    pub threshold: f64,
    pub seed: u64,
    pub thin: usize,
    pub mcc_as_printed: bool,
    /// Threshold `|ω̂ᵢⱼ|` (true) or the signed `ω̂ᵢⱼ` (false).
    pub abs_threshold: bool,
    pub out: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            designs: DesignKind::ALL.to_vec(),
            p: 30,
            n: 50,
            samplers: vec![SamplerKind::Bgs, SamplerKind::Hrs],
            burn_in: 5000,
            draws: 10_000,
            replications: 50,
            r: 1e-2,
            s: 1e-6,
            threshold: 1e-3,
            seed: 0,
            thin: 1,
            mcc_as_printed: false,
            abs_threshold: true,
            out: PathBuf::from("out"),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.designs.is_empty() || self.samplers.is_empty() {
            return bad("at least one design and one sampler are required".into());
        }
        if self.p < 2 || self.n == 0 || self.draws == 0 || self.replications == 0 || self.thin == 0 {
            return bad("p >= 2 and n, draws, reps, thin >= 1 are required".into());
        }
        for (name, v) in [("r", self.r), ("s", self.s), ("threshold", self.threshold)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for &kind in &self.designs {
            build_design(GraphDesign { kind, p: self.p })?;
        }
        Ok(())
    }

    pub fn chain_config(&self, kind: SamplerKind) -> ChainConfig {
        ChainConfig {
            burn_in: self.burn_in,
            draws: self.draws,
            thin: self.thin,
            r: self.r,
            s: self.s,
            ..ChainConfig::new(kind)
        }
    }

    fn design_index(kind: DesignKind) -> u64 {
        DesignKind::ALL.iter().position(|&d| d == kind).unwrap() as u64
    }

    /// Stream for the data of replication `rep`; shared by all samplers.
    pub fn data_stream(&self, design: DesignKind, rep: usize) -> RngStream {
        RngStream::new(self.seed, DATA_TAG | Self::design_index(design) << 32 | rep as u64)
    }

    pub fn chain_stream(&self, design: DesignKind, sampler: SamplerKind, rep: usize) -> RngStream {
        let s = match sampler {
            SamplerKind::Bgs => 0,
            SamplerKind::Hrs => 1,
        };
        RngStream::new(
            self.seed,
            CHAIN_TAG | s << 40 | Self::design_index(design) << 32 | rep as u64,
        )
    }
}

/// One line of `replications.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub design: DesignKind,
    pub p: usize,
    pub n: usize,
    pub sampler: SamplerKind,
    pub replication: usize,
    pub stein: f64,
    pub frobenius: f64,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub specificity: f64,
    pub sensitivity: f64,
    pub mcc: f64,
}

impl ReplicationRow {
    pub fn counts(&self) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp,
            tn: self.tn,
            fp: self.fp,
            fn_: self.fn_,
        }
    }
}

/// One line of `audit.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub design: DesignKind,
    pub p: usize,
    pub n: usize,
    pub sampler: SamplerKind,
    pub replication: usize,
    pub updates_total: u64,
    pub violations: u64,
    pub after_beta: u64,
    pub after_gamma: u64,
    pub violation_ratio: f64,
}

impl AuditRow {
    fn new(design: DesignKind, cfg: &ScenarioConfig, sampler: SamplerKind, rep: usize, audit: &ViolationAudit) -> Self {
        use crate::sampler::Stage;
        AuditRow {
            design,
            p: cfg.p,
            n: cfg.n,
            sampler,
            replication: rep,
            updates_total: audit.updates_total,
            violations: audit.violations,
            after_beta: audit.stage_count(Stage::AfterBeta),
            after_gamma: audit.stage_count(Stage::AfterGamma),
            violation_ratio: audit.violation_ratio(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub design: DesignKind,
    pub sampler: SamplerKind,
    pub replication: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianWithSe {
    pub median: f64,
    pub se: f64,
}

/// Summary for one (design, sampler) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub design: DesignKind,
    pub p: usize,
    pub n: usize,
    pub sampler: SamplerKind,
    pub replications_ok: usize,
    pub stein: Option<MedianWithSe>,
    pub frobenius: Option<MedianWithSe>,
    pub pooled: ConfusionCounts,
    pub specificity: f64,
    pub sensitivity: f64,
    pub mcc: f64,
    pub audit: ViolationAudit,
    pub violation_ratio: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CampaignReport {
    pub rows: Vec<ReplicationRow>,
    pub audits: Vec<AuditRow>,
    pub cells: Vec<CellAggregate>,
    pub failures: Vec<ReplicationFailure>,
}

impl CampaignReport {
    pub fn cell(&self, design: DesignKind, sampler: SamplerKind) -> Option<&CellAggregate> {
        self.cells.iter().find(|c| c.design == design && c.sampler == sampler)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Median and its bootstrap standard error over `resamples` resamples.
pub fn median_with_bootstrap_se<R: Rng + ?Sized>(values: &[f64], resamples: usize, rng: &mut R) -> Option<MedianWithSe> {
    let med = median(values)?;
    let n = values.len();
    let mut boot = Vec::with_capacity(resamples);
    let mut buf = vec![0.0; n];
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = values[rng.gen_range(0..n)];
        }
        boot.push(median(&buf).unwrap());
    }
    let mean = boot.iter().sum::<f64>() / resamples as f64;
    let var = boot.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (resamples.max(2) - 1) as f64;
    Some(MedianWithSe {
        median: med,
        se: var.sqrt(),
    })
}

/// Aggregates replication rows into per-cell medians and pooled criteria.
///
/// Depends only on the rows, the audits and the seed, so it can be rerun on
/// rows read back from `replications.csv`.
pub fn aggregate(cfg: &ScenarioConfig, rows: &[ReplicationRow], audits: &[AuditRow]) -> Vec<CellAggregate> {
    let mut cells = Vec::new();
    for (cell_index, (&design, &sampler)) in cfg
        .designs
        .iter()
        .flat_map(|d| cfg.samplers.iter().map(move |s| (d, s)))
        .enumerate()
    {
        let mine: Vec<&ReplicationRow> = rows
            .iter()
            .filter(|r| r.design == design && r.sampler == sampler)
            .collect();
        let stein: Vec<f64> = mine.iter().map(|r| r.stein).filter(|v| v.is_finite()).collect();
        let frob: Vec<f64> = mine.iter().map(|r| r.frobenius).collect();
        let mut rng = RngStream::new(cfg.seed, BOOTSTRAP_TAG | cell_index as u64);
        let stein = median_with_bootstrap_se(&stein, BOOTSTRAP_RESAMPLES, &mut rng);
        let frobenius = median_with_bootstrap_se(&frob, BOOTSTRAP_RESAMPLES, &mut rng);
        let mut pooled = ConfusionCounts::default();
        for r in &mine {
            pooled.add(&r.counts());
        }
        let scores = pooled.scores(cfg.mcc_as_printed);
        let mut audit = ViolationAudit::new();
        for a in audits.iter().filter(|a| a.design == design && a.sampler == sampler) {
            audit.updates_total += a.updates_total;
            audit.violations += a.violations;
            *audit.by_column_stage.get_mut("after_beta").unwrap() += a.after_beta;
            *audit.by_column_stage.get_mut("after_gamma").unwrap() += a.after_gamma;
        }
        cells.push(CellAggregate {
            design,
            p: cfg.p,
            n: cfg.n,
            sampler,
            replications_ok: mine.len(),
            stein,
            frobenius,
            pooled,
            specificity: scores.specificity,
            sensitivity: scores.sensitivity,
            mcc: scores.mcc,
            violation_ratio: audit.violation_ratio(),
            audit,
        });
    }
    cells
}

struct JobResult {
    row: Option<ReplicationRow>,
    audit: AuditRow,
    elapsed: f64,
}

fn run_job(
    cfg: &ScenarioConfig,
    design: DesignKind,
    sampler: SamplerKind,
    rep: usize,
    with_metrics: bool,
) -> std::result::Result<JobResult, ReplicationFailure> {
    let fail = |e: Error| ReplicationFailure {
        design,
        sampler,
        replication: rep,
        seed: cfg.seed,
        stream_id: cfg.chain_stream(design, sampler, rep).stream_id(),
        error: e.to_string(),
    };
    let start = Instant::now();
    let model = build_design(GraphDesign { kind: design, p: cfg.p }).map_err(fail)?;
    let y = simulate_data(&model, cfg.n, &mut cfg.data_stream(design, rep)).map_err(fail)?;
    let scatter = scatter_matrix(&y);
    let out = run_chain(&scatter, cfg.n, &cfg.chain_config(sampler), &mut cfg.chain_stream(design, sampler, rep))
        .map_err(fail)?;
    let audit = AuditRow::new(design, cfg, sampler, rep, &out.audit);
    let row = if with_metrics {
        let omega_hat = &out.posterior_mean;
        // A BGS posterior mean can be indefinite; Stein's loss is then undefined.
        let stein = stein_loss(omega_hat, &model.omega_true).unwrap_or(f64::NAN);
        let frobenius = frobenius_loss(omega_hat, &model.omega_true).map_err(fail)?;
        let adj = adjacency_from_estimate(omega_hat, cfg.threshold, cfg.abs_threshold);
        let counts = confusion_counts(&adj, &model.adjacency_true).map_err(fail)?;
        let scores = counts.scores(cfg.mcc_as_printed);
        Some(ReplicationRow {
            design,
            p: cfg.p,
            n: cfg.n,
            sampler,
            replication: rep,
            stein,
            frobenius,
            tp: counts.tp,
            tn: counts.tn,
            fp: counts.fp,
            fn_: counts.fn_,
            specificity: scores.specificity,
            sensitivity: scores.sensitivity,
            mcc: scores.mcc,
        })
    } else {
        None
    };
    Ok(JobResult {
        row,
        audit,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Runs every (design, sampler, replication) job, in parallel, and collects
/// the results in a fixed order.
pub fn run_campaign(cfg: &ScenarioConfig, with_metrics: bool) -> Result<(CampaignReport, f64)> {
    cfg.validate()?;
    let jobs: Vec<(DesignKind, SamplerKind, usize)> = cfg
        .designs
        .iter()
        .flat_map(|&d| {
            cfg.samplers
                .iter()
                .flat_map(move |&s| (0..cfg.replications).map(move |k| (d, s, k)))
        })
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(d, s, k)| run_job(cfg, d, s, k, with_metrics))
        .collect();
    let mut report = CampaignReport::default();
    let mut cpu_secs = 0.0;
    for r in results {
        match r {
            Ok(job) => {
                report.rows.extend(job.row);
                report.audits.push(job.audit);
                cpu_secs += job.elapsed;
            }
            Err(f) => report.failures.push(f),
        }
    }
    report.cells = aggregate(cfg, &report.rows, &report.audits);
    Ok((report, cpu_secs))
}

#[derive(Serialize)]
struct Aggregate<'a> {
    cells: &'a [CellAggregate],
    failures: &'a [ReplicationFailure],
}

#[derive(Serialize)]
struct Timing {
    wall_secs: f64,
    chain_secs_total: f64,
}

fn write_common(cfg: &ScenarioConfig, command: &str, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_json(out.join("manifest.json"), &Manifest::new(command, cfg))
}

/// `simulate`: losses, structure scores and audit for every replication.
pub fn cmd_simulate(cfg: &ScenarioConfig) -> Result<CampaignReport> {
    let start = Instant::now();
    let (report, cpu) = run_campaign(cfg, true)?;
    write_common(cfg, "simulate", &cfg.out)?;
    write_csv_rows(cfg.out.join("replications.csv"), &report.rows)?;
    write_csv_rows(cfg.out.join("audit.csv"), &report.audits)?;
    write_json(
        cfg.out.join("aggregate.json"),
        &Aggregate {
            cells: &report.cells,
            failures: &report.failures,
        },
    )?;
    write_json(
        cfg.out.join("timing.json"),
        &Timing {
            wall_secs: start.elapsed().as_secs_f64(),
            chain_secs_total: cpu,
        },
    )?;
    Ok(report)
}

/// `audit`: positive-definiteness violation counts only.
pub fn cmd_audit(cfg: &ScenarioConfig) -> Result<CampaignReport> {
    let start = Instant::now();
    let (report, cpu) = run_campaign(cfg, false)?;
    write_common(cfg, "audit", &cfg.out)?;
    write_csv_rows(cfg.out.join("audit.csv"), &report.audits)?;
    write_json(
        cfg.out.join("aggregate.json"),
        &Aggregate {
            cells: &report.cells,
            failures: &report.failures,
        },
    )?;
    write_json(
        cfg.out.join("timing.json"),
        &Timing {
            wall_secs: start.elapsed().as_secs_f64(),
            chain_secs_total: cpu,
        },
    )?;
    Ok(report)
}
