use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pd_check, quad_form_unchecked, SymMatrix};
use crate::metrics::PosteriorMeanAccumulator;

use super::audit::{Stage, ViolationAudit};
use super::partition::ColumnPartition;
use super::state::{Clamps, GibbsState};
use super::updates::{
    bgs_update_beta, hrs_update_beta, update_gamma, update_lambda_column, update_tau_column,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// Unconstrained normal draw of the off-diagonal column.
    Bgs,
    /// Hit-and-run draw restricted to the positive-definite region.
    Hrs,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Bgs => "bgs",
            SamplerKind::Hrs => "hrs",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bgs" => Ok(SamplerKind::Bgs),
            "hrs" => Ok(SamplerKind::Hrs),
            other => Err(Error::InvalidParameter(format!("unknown sampler {other:?} (expected bgs or hrs)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnOrder {
    #[default]
    Ascending,
    Descending,
}

impl ColumnOrder {
    fn columns(self, p: usize) -> Vec<usize> {
        match self {
            ColumnOrder::Ascending => (0..p).collect(),
            ColumnOrder::Descending => (0..p).rev().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub kind: SamplerKind,
    pub burn_in: usize,
    /// Number of retained draws.
    pub draws: usize,
    /// Sweeps per retained draw.
    pub thin: usize,
    pub r: f64,
    pub s: f64,
    pub clamps: Clamps,
    pub order: ColumnOrder,
    /// Keep every retained `Ω` in memory, not just the running mean.
    pub keep_draws: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            kind: SamplerKind::Hrs,
            burn_in: 5000,
            draws: 10_000,
            thin: 1,
            r: 1e-2,
            s: 1e-6,
            clamps: Clamps::default(),
            order: ColumnOrder::Ascending,
            keep_draws: false,
        }
    }
}

impl ChainConfig {
    pub fn new(kind: SamplerKind) -> Self {
        ChainConfig {
            kind,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 || self.thin == 0 {
            return Err(Error::InvalidParameter("draws and thin must be at least 1".into()));
        }
        if !(self.r > 0.0 && self.s > 0.0 && self.r.is_finite() && self.s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hyperparameters must be positive, got r = {}, s = {}",
                self.r, self.s
            )));
        }
        self.clamps.validate()
    }
}

#[derive(Clone, Debug)]
pub struct ChainOutput {
    pub posterior_mean: SymMatrix,
    pub draws_used: usize,
    /// Retained draws, empty unless `keep_draws` was set.
    pub draws: Vec<SymMatrix>,
    pub audit: ViolationAudit,
    pub elapsed_secs: f64,
    pub final_state: GibbsState,
}

/// One pass over all columns of `Ω`.
///
/// Every column update checks `Ω` twice: after the new off-diagonal column is
/// written (old diagonal) and after the diagonal is reset. The HRS path
/// treats a failed check as a numerical error; the BGS path records it and
/// continues.
pub fn sweep<R: Rng + ?Sized>(
    state: &mut GibbsState,
    kind: SamplerKind,
    clamps: &Clamps,
    order: ColumnOrder,
    audit: &mut ViolationAudit,
    rng: &mut R,
) -> Result<()> {
    let p = state.dim();
    let first_sweep = state.sweeps_done == 0;
    for (visit, i) in order.columns(p).into_iter().enumerate() {
        // No β draw for the very first column of the very first sweep.
        let skip_beta = first_sweep && visit == 0;
        update_column(state, i, kind, clamps, skip_beta, audit, rng)?;
    }
    state.sweeps_done += 1;
    state
        .refresh_covariance()
        .map_err(|e| e.at_column(p - 1, "end_of_sweep"))
}

fn update_column<R: Rng + ?Sized>(
    state: &mut GibbsState,
    i: usize,
    kind: SamplerKind,
    clamps: &Clamps,
    skip_beta: bool,
    audit: &mut ViolationAudit,
    rng: &mut R,
) -> Result<()> {
    let part = ColumnPartition::from_cached_inverse(state, i).map_err(|e| e.at_column(i, "partition"))?;
    if kind == SamplerKind::Hrs && !(part.gamma > 0.0) {
        return Err(Error::StateNotPd.at_column(i, "partition"));
    }
    let lead = part.leading().to_vec();
    let mut failed = Vec::new();

    let beta = if skip_beta {
        part.beta.clone()
    } else {
        match kind {
            SamplerKind::Bgs => bgs_update_beta(&part, rng),
            SamplerKind::Hrs => hrs_update_beta(&part, rng),
        }
        .map_err(|e| e.at_column(i, "beta"))?
    };
    for (k, &j) in lead.iter().enumerate() {
        state.omega.set(j, i, beta[k]);
    }
    if pd_check(&state.omega).is_none() {
        if kind == SamplerKind::Hrs {
            return Err(Error::StateNotPd.at_column(i, Stage::AfterBeta.label()));
        }
        failed.push(Stage::AfterBeta);
    }

    let gamma = update_gamma(&part, state.n, rng).map_err(|e| e.at_column(i, "gamma"))?;
    let a_beta = part.omega11_inv.matvec(&beta);
    let omega22 = gamma + quad_form_unchecked(&beta, &part.omega11_inv);
    state.omega.set(i, i, omega22);
    if pd_check(&state.omega).is_none() {
        if kind == SamplerKind::Hrs {
            return Err(Error::StateNotPd.at_column(i, Stage::AfterGamma.label()));
        }
        failed.push(Stage::AfterGamma);
    }

    let (lambda12, lambda22) = update_lambda_column(&beta, omega22, state.r, state.s, clamps, rng)
        .map_err(|e| e.at_column(i, "lambda"))?;
    let tau12 = update_tau_column(&lambda12, &beta, clamps, rng).map_err(|e| e.at_column(i, "tau"))?;
    for (k, &j) in lead.iter().enumerate() {
        state.lambda.set(j, i, lambda12[k]);
        state.tau.set(j, i, tau12[k]);
    }
    state.lambda.set(i, i, lambda22);

    // Block inverse of the updated Ω in terms of Ω₁₁⁻¹, β and γ.
    let sigma = &mut state.covariance;
    for (a, &ja) in lead.iter().enumerate() {
        for (b, &jb) in lead.iter().enumerate().skip(a) {
            sigma.set(ja, jb, part.omega11_inv.get(a, b) + a_beta[a] * a_beta[b] / gamma);
        }
        sigma.set(ja, i, -a_beta[a] / gamma);
    }
    sigma.set(i, i, 1.0 / gamma);

    audit.record_update(&failed);
    Ok(())
}

/// Runs `burn_in` discarded sweeps followed by `draws × thin` sweeps, keeping
/// every `thin`-th state, starting from `Ω = I`.
pub fn run_chain<R: Rng + ?Sized>(
    scatter: &SymMatrix,
    n: usize,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<ChainOutput> {
    config.validate()?;
    let start = Instant::now();
    let mut state = GibbsState::initial(scatter.clone(), n, config.r, config.s)?;
    let mut audit = ViolationAudit::new();
    for _ in 0..config.burn_in {
        sweep(&mut state, config.kind, &config.clamps, config.order, &mut audit, rng)?;
    }
    let mut mean = PosteriorMeanAccumulator::new(state.dim());
    let mut draws = Vec::new();
    for _ in 0..config.draws {
        for _ in 0..config.thin {
            sweep(&mut state, config.kind, &config.clamps, config.order, &mut audit, rng)?;
        }
        mean.push(&state.omega)?;
        if config.keep_draws {
            draws.push(state.omega.clone());
        }
    }
    let summary = mean.finish()?;
    Ok(ChainOutput {
        posterior_mean: summary.omega_hat,
        draws_used: summary.draws_used,
        draws,
        audit,
        elapsed_secs: start.elapsed().as_secs_f64(),
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{is_pd, spd_inverse};
    use crate::rng::RngStream;

    fn scatter_for(p: usize, n: usize, seed: u64) -> SymMatrix {
        let omega = SymMatrix::from_fn(p, |i, j| match (i as isize - j as isize).abs() {
            0 => 2.0,
            1 => 1.0,
            _ => 0.0,
        });
        let sigma = spd_inverse(&omega).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let mut s = SymMatrix::zeros(p);
        for _ in 0..n {
            let y = crate::distributions::sample_mvn(&vec![0.0; p], &sigma, &mut rng).unwrap();
            for a in 0..p {
                for b in a..p {
                    s.set(a, b, s.get(a, b) + y[a] * y[b]);
                }
            }
        }
        s
    }

    #[test]
    fn minimal_chain() {
        let s = scatter_for(5, 20, 1);
        let cfg = ChainConfig {
            burn_in: 0,
            draws: 1,
            ..ChainConfig::new(SamplerKind::Hrs)
        };
        let out = run_chain(&s, 20, &cfg, &mut RngStream::new(2, 0)).unwrap();
        assert_eq!(out.draws_used, 1);
        assert!(is_pd(&out.posterior_mean));
        assert_eq!(out.audit.updates_total, 5);
    }

    #[test]
    fn chain_is_deterministic() {
        let s = scatter_for(6, 30, 3);
        for kind in [SamplerKind::Bgs, SamplerKind::Hrs] {
            let cfg = ChainConfig {
                burn_in: 20,
                draws: 30,
                keep_draws: true,
                ..ChainConfig::new(kind)
            };
            let a = run_chain(&s, 30, &cfg, &mut RngStream::new(4, 9)).unwrap();
            let b = run_chain(&s, 30, &cfg, &mut RngStream::new(4, 9)).unwrap();
            assert_eq!(a.posterior_mean, b.posterior_mean);
            assert_eq!(a.draws, b.draws);
            assert_eq!(a.audit, b.audit);
        }
    }

    #[test]
    fn sweep_touches_every_column_and_keeps_symmetry() {
        let s = scatter_for(7, 30, 5);
        let mut state = GibbsState::initial(s, 30, 1e-2, 1e-6).unwrap();
        let mut audit = ViolationAudit::new();
        let mut rng = RngStream::new(6, 0);
        for _ in 0..50 {
            sweep(&mut state, SamplerKind::Hrs, &Clamps::default(), ColumnOrder::Ascending, &mut audit, &mut rng).unwrap();
            assert!(state.omega.is_symmetric());
            assert!(state.tau.is_symmetric() && state.lambda.is_symmetric());
            assert!(is_pd(&state.omega));
        }
        assert_eq!(audit.updates_total, 50 * 7);
        assert_eq!(audit.violations, 0);
        let before = state.omega.clone();
        sweep(&mut state, SamplerKind::Hrs, &Clamps::default(), ColumnOrder::Descending, &mut audit, &mut rng).unwrap();
        // every diagonal entry is redrawn
        assert!((0..7).all(|i| state.omega.get(i, i) != before.get(i, i)));
        for i in 0..7 {
            assert_eq!(state.tau.get(i, i), 0.0);
            for j in 0..7 {
                assert!(state.lambda.get(i, j) > 0.0);
                if i != j {
                    assert!(state.tau.get(i, j) > 0.0);
                }
            }
        }
    }

    #[test]
    fn cached_inverse_tracks_omega() {
        let s = scatter_for(6, 12, 7);
        for kind in [SamplerKind::Bgs, SamplerKind::Hrs] {
            let mut state = GibbsState::initial(s.clone(), 12, 1e-2, 1e-6).unwrap();
            let mut audit = ViolationAudit::new();
            let mut rng = RngStream::new(8, 0);
            for _ in 0..20 {
                sweep(&mut state, kind, &Clamps::default(), ColumnOrder::Ascending, &mut audit, &mut rng).unwrap();
            }
            // mid-sweep: update one column and compare the rank-update cache to a fresh inverse
            update_column(&mut state, 2, kind, &Clamps::default(), false, &mut audit, &mut rng).unwrap();
            let fresh = spd_inverse(&state.omega).unwrap();
            let scale = fresh.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
            assert!(state.covariance.max_abs_diff(&fresh) < 1e-8 * scale);
        }
    }

    #[test]
    fn gamma_round_trip() {
        let s = scatter_for(5, 40, 9);
        let mut state = GibbsState::initial(s, 40, 1e-2, 1e-6).unwrap();
        let mut audit = ViolationAudit::new();
        let mut rng = RngStream::new(10, 0);
        for _ in 0..10 {
            sweep(&mut state, SamplerKind::Hrs, &Clamps::default(), ColumnOrder::Ascending, &mut audit, &mut rng).unwrap();
        }
        for i in 0..5 {
            let part = super::super::make_partition(&state, i).unwrap();
            let mut rebuilt = state.clone();
            rebuilt.omega.set(i, i, part.omega22());
            let again = super::super::make_partition(&rebuilt, i).unwrap();
            assert!((again.gamma - part.gamma).abs() <= 1e-10 * part.gamma);
            assert_eq!(rebuilt.omega.get(i, i), part.omega22());
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = ChainConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.draws = 0;
        assert!(cfg.validate().is_err());
        assert_eq!("HRS".parse::<SamplerKind>().unwrap(), SamplerKind::Hrs);
        assert!("xyz".parse::<SamplerKind>().is_err());
    }
}
