//! Full-conditional draws for a single partitioned column.

use rand::Rng;

use crate::distributions::{
    sample_gamma, sample_inverse_gaussian, sample_mvn_canonical, sample_truncated_normal,
    sample_unit_sphere,
};
use crate::error::{Error, Result};
use crate::matrix::{dot, spd_inverse, SymMatrix};

use super::partition::ColumnPartition;
use super::state::Clamps;

/// `C⁻¹ = (s₂₂ + 2λ₂₂) Ω₁₁⁻¹ + D_τ⁻¹`.
fn c_inverse(part: &ColumnPartition) -> SymMatrix {
    let scale = part.s22 + 2.0 * part.lambda22;
    let mut inner = part.omega11_inv.scaled(scale);
    for (k, &t) in part.tau12.iter().enumerate() {
        inner.set(k, k, inner.get(k, k) + 1.0 / t);
    }
    inner
}

/// `C = {(s₂₂ + 2λ₂₂) Ω₁₁⁻¹ + D_τ⁻¹}⁻¹`, the covariance of the β conditional.
pub fn compute_c_matrix(part: &ColumnPartition) -> Result<SymMatrix> {
    spd_inverse(&c_inverse(part))
}

/// `C⁻¹ v` without forming `C`.
pub fn c_inverse_times(part: &ColumnPartition, v: &[f64]) -> Vec<f64> {
    let scale = part.s22 + 2.0 * part.lambda22;
    part.omega11_inv
        .matvec(v)
        .into_iter()
        .zip(v.iter().zip(&part.tau12))
        .map(|(av, (vk, tk))| scale * av + vk / tk)
        .collect()
}

/// Unconstrained draw β ~ N(−C s₁₂, C).
///
/// Sampled in canonical form from the precision `C⁻¹`, so `C` itself is
/// never formed. The draw may leave `Ω` indefinite.
pub fn bgs_update_beta<R: Rng + ?Sized>(part: &ColumnPartition, rng: &mut R) -> Result<Vec<f64>> {
    let linear: Vec<f64> = part.s12.iter().map(|v| -v).collect();
    sample_mvn_canonical(&linear, &c_inverse(part), rng)
}

/// Interval of step sizes `κ` keeping `β + κα` inside the PD region.
///
/// Solves `aκ² + 2bκ − γ < 0` with `a = αᵀΩ₁₁⁻¹α`, `b = βᵀΩ₁₁⁻¹α`. Roots are
/// taken in the cancellation-free form, so `lo < 0 < hi` holds in floating
/// point whenever `γ > 0`.
pub fn hit_and_run_interval(
    alpha: &[f64],
    beta: &[f64],
    omega11_inv: &SymMatrix,
    gamma: f64,
) -> Result<(f64, f64)> {
    if !(gamma > 0.0) {
        return Err(Error::StateNotPd);
    }
    let a_alpha = omega11_inv.matvec(alpha);
    interval_from_coefficients(dot(alpha, &a_alpha), dot(beta, &a_alpha), gamma)
}

fn interval_from_coefficients(a: f64, b: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0) {
        return Err(Error::StateNotPd);
    }
    if !(a > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::LeadingBlockNotPd);
    }
    let disc = (b * b + a * gamma).sqrt();
    let (lo, hi) = if b >= 0.0 {
        (-(b + disc) / a, gamma / (b + disc))
    } else {
        (-gamma / (disc - b), (disc - b) / a)
    };
    Ok((lo, hi))
}

/// Everything produced by one hit-and-run move.
#[derive(Clone, Debug)]
pub struct HitAndRunStep {
    pub alpha: Vec<f64>,
    pub kappa: f64,
    pub lo: f64,
    pub hi: f64,
    pub mu_kappa: f64,
    pub sigma_kappa: f64,
    pub beta: Vec<f64>,
}

/// One hit-and-run move for β along a uniform random direction.
///
/// With `truncate = false` the step size is drawn from the untruncated line
/// conditional; that variant exists to compare against the unconstrained
/// sampler.
pub fn hit_and_run_step<R: Rng + ?Sized>(
    part: &ColumnPartition,
    truncate: bool,
    rng: &mut R,
) -> Result<HitAndRunStep> {
    let m = part.beta.len();
    let alpha = sample_unit_sphere(m, rng);
    let a_alpha = part.omega11_inv.matvec(&alpha);
    let (lo, hi) = if truncate {
        interval_from_coefficients(dot(&alpha, &a_alpha), dot(&part.beta, &a_alpha), part.gamma)?
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    let scale = part.s22 + 2.0 * part.lambda22;
    let c_inv_alpha: Vec<f64> = a_alpha
        .iter()
        .zip(alpha.iter().zip(&part.tau12))
        .map(|(av, (al, t))| scale * av + al / t)
        .collect();
    let precision = dot(&alpha, &c_inv_alpha);
    if !(precision > 0.0 && precision.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let mu_kappa = -(dot(&part.s12, &alpha) + dot(&part.beta, &c_inv_alpha)) / precision;
    let sigma_kappa = precision.sqrt().recip();
    let kappa = sample_truncated_normal(mu_kappa, sigma_kappa, lo, hi, rng)?;
    debug_assert!(lo < kappa && kappa < hi);
    let beta = part.beta.iter().zip(&alpha).map(|(b, a)| b + kappa * a).collect();
    Ok(HitAndRunStep {
        alpha,
        kappa,
        lo,
        hi,
        mu_kappa,
        sigma_kappa,
        beta,
    })
}

/// Draw of β from N(−C s₁₂, C) restricted to `βᵀΩ₁₁⁻¹β < ω₂₂` by one
/// hit-and-run move from the current β.
pub fn hrs_update_beta<R: Rng + ?Sized>(part: &ColumnPartition, rng: &mut R) -> Result<Vec<f64>> {
    Ok(hit_and_run_step(part, true, rng)?.beta)
}

/// γ ~ Ga(n/2 + 1, rate = s₂₂/2 + λ₂₂).
pub fn update_gamma<R: Rng + ?Sized>(part: &ColumnPartition, n: usize, rng: &mut R) -> Result<f64> {
    sample_gamma(n as f64 / 2.0 + 1.0, part.s22 / 2.0 + part.lambda22, rng)
}

/// λᵢⱼ ~ Ga(r + 1, rate = s + |ωᵢⱼ|) for the column's off-diagonal entries and
/// its diagonal, clamped to `[lambda_min, lambda_max]`.
pub fn update_lambda_column<R: Rng + ?Sized>(
    beta: &[f64],
    omega22: f64,
    r: f64,
    s: f64,
    clamps: &Clamps,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    let clamp = |v: f64| v.clamp(clamps.lambda_min, clamps.lambda_max);
    let lambda12 = beta
        .iter()
        .map(|b| sample_gamma(r + 1.0, s + b.abs(), rng).map(clamp))
        .collect::<Result<Vec<f64>>>()?;
    let lambda22 = clamp(sample_gamma(r + 1.0, s + omega22.abs(), rng)?);
    Ok((lambda12, lambda22))
}

/// τᵢⱼ = 1/υ with υ ~ IG(λᵢⱼ / max(|ωᵢⱼ|, floor), λᵢⱼ²), clamped to `[tau_min, tau_max]`.
pub fn update_tau_column<R: Rng + ?Sized>(
    lambda12: &[f64],
    beta: &[f64],
    clamps: &Clamps,
    rng: &mut R,
) -> Result<Vec<f64>> {
    lambda12
        .iter()
        .zip(beta)
        .map(|(&lam, &b)| {
            let mean = lam / b.abs().max(clamps.omega_floor);
            let upsilon = sample_inverse_gaussian(mean, lam * lam, rng)?;
            Ok((1.0 / upsilon).clamp(clamps.tau_min, clamps.tau_max))
        })
        .collect()
}
