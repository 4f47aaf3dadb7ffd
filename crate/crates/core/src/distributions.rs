//! Random variates used by the column updates.
//!
//! Every sampler validates its parameters and returns `Err` instead of
//! panicking on nonsense input; the draws themselves are plain `f64`s.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::matrix::{cholesky_with_floor, pd_check, SymMatrix};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standardized lower bound beyond which the one-sided tail is sampled by rejection.
const TAIL_START: f64 = 5.0;

/// Upper bound on retries when mapping a standardized draw back onto a
/// floating-point interval that is narrower than a few ulps.
const MAX_INTERVAL_RETRIES: usize = 1000;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Gamma draw with density ∝ x^(shape−1) e^(−rate·x).
///
/// The second argument is a RATE, not a scale.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    check_positive("gamma shape", shape)?;
    check_positive("gamma rate", rate)?;
    let dist = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::InvalidParameter(format!("gamma({shape}, {rate}): {e}")))?;
    loop {
        let x = dist.sample(rng);
        // Underflow to zero is possible for shape < 1; the support is open.
        if x > 0.0 {
            return Ok(x);
        }
    }
}

/// Inverse Gaussian draw IG(mean, shape) by the Michael–Schucany–Haas transform.
pub fn sample_inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> Result<f64> {
    check_positive("inverse Gaussian mean", mean)?;
    check_positive("inverse Gaussian shape", shape)?;
    loop {
        let z = standard_normal(rng);
        let w = mean * z * z / shape;
        // Smaller root of the chi-square transform, written without the
        // cancellation in μ + μ²y/2λ − (μ/2λ)√(4μλy + μ²y²).
        let x = mean * (1.0 - 2.0 * w / (w + (w * w + 4.0 * w).sqrt()));
        let x = if w == 0.0 { mean } else { x };
        let u: f64 = rng.gen();
        let draw = if u * (mean + x) <= mean { x } else { mean * mean / x };
        if draw > 0.0 && draw.is_finite() {
            return Ok(draw);
        }
    }
}

/// N(mu, sigma²) conditioned on the open interval (lo, hi).
///
/// Either bound may be infinite. Central intervals use the inverse CDF,
/// intervals deep in a tail use exponential or uniform rejection, so the
/// draw stays exact however far into the tail the interval sits.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mu: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64> {
    check_positive("truncated normal sigma", sigma)?;
    if !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("truncated normal mean must be finite, got {mu}")));
    }
    if !(lo < hi) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    let a = (lo - mu) / sigma;
    let b = (hi - mu) / sigma;
    for _ in 0..MAX_INTERVAL_RETRIES {
        let x = mu + sigma * standard_truncated(a, b, rng);
        if lo < x && x < hi {
            return Ok(x);
        }
    }
    Err(Error::InvalidParameter(format!(
        "truncation interval ({lo}, {hi}) too narrow to sample at scale {sigma}"
    )))
}

/// N(0, 1) restricted to (a, b), a < b.
fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a >= 0.0 {
        upper_truncated(a, b, rng)
    } else if b <= 0.0 {
        -upper_truncated(-b, -a, rng)
    } else if b - a < 0.5 {
        // Short interval around the mode.
        uniform_rejection(a, b, 0.0, rng)
    } else {
        let lo = normal_cdf(a);
        let hi = normal_cdf(b);
        loop {
            let u = lo + (hi - lo) * rng.gen::<f64>();
            let x = -SQRT_2 * erfc_inv(2.0 * u);
            if a < x && x < b {
                return x;
            }
        }
    }
}

/// N(0, 1) restricted to (a, b) with 0 ≤ a < b.
fn upper_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if (b - a) * a.max(1.0) < 0.5 {
        return uniform_rejection(a, b, a, rng);
    }
    if a >= TAIL_START {
        // Exponential proposal with the optimal rate for the tail beyond a.
        let rate = 0.5 * (a + (a * a + 4.0).sqrt());
        loop {
            let u: f64 = rng.gen();
            let x = a - (1.0 - u).ln() / rate;
            if x >= b {
                continue;
            }
            let accept = (-0.5 * (x - rate) * (x - rate)).exp();
            if rng.gen::<f64>() < accept && x > a {
                return x;
            }
        }
    }
    // Inverse survival function keeps precision for moderately large a.
    let q_hi = upper_tail(a);
    let q_lo = upper_tail(b);
    loop {
        let u = q_lo + (q_hi - q_lo) * rng.gen::<f64>();
        let x = SQRT_2 * erfc_inv(2.0 * u);
        if a < x && x < b {
            return x;
        }
    }
}

/// Uniform proposal on (a, b) accepted with φ(x)/φ(mode); `mode` must maximize φ on the interval.
fn uniform_rejection<R: Rng + ?Sized>(a: f64, b: f64, mode: f64, rng: &mut R) -> f64 {
    loop {
        let x = a + (b - a) * rng.gen::<f64>();
        if !(a < x && x < b) {
            continue;
        }
        let accept = (0.5 * (mode * mode - x * x)).exp();
        if rng.gen::<f64>() < accept {
            return x;
        }
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// P(Z > x) for standard normal Z.
pub fn upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Uniform direction on the unit sphere in `dim` dimensions.
pub fn sample_unit_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    assert!(dim >= 1, "sphere dimension must be at least 1");
    loop {
        let z: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            return z.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// Multivariate normal draw `mean + L z` with `cov = L Lᵀ`.
///
/// Any covariance with strictly positive Cholesky pivots is accepted, so
/// near-degenerate covariances such as `1e-12 · I` still sample.
pub fn sample_mvn<R: Rng + ?Sized>(mean: &[f64], cov: &SymMatrix, rng: &mut R) -> Result<Vec<f64>> {
    if mean.len() != cov.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.dim(),
            got: mean.len(),
        });
    }
    let chol = cholesky_with_floor(cov, 0.0).ok_or(Error::NotPositiveDefinite)?;
    let z: Vec<f64> = (0..mean.len()).map(|_| standard_normal(rng)).collect();
    let lz = chol.mul_lower(&z);
    Ok(mean.iter().zip(lz).map(|(m, v)| m + v).collect())
}

/// Draw from N(P⁻¹h, P⁻¹) given the precision `P` and linear term `h`,
/// using one Cholesky factorization of `P` and no explicit inverse.
pub fn sample_mvn_canonical<R: Rng + ?Sized>(
    linear: &[f64],
    precision: &SymMatrix,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if linear.len() != precision.dim() {
        return Err(Error::DimensionMismatch {
            expected: precision.dim(),
            got: linear.len(),
        });
    }
    let chol = pd_check(precision).ok_or(Error::NotPositiveDefinite)?;
    let mean = chol.solve(linear);
    let z: Vec<f64> = (0..linear.len()).map(|_| standard_normal(rng)).collect();
    let noise = chol.solve_upper(&z);
    Ok(mean.iter().zip(noise).map(|(m, e)| m + e).collect())
}
