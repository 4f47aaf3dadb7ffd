use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{spd_inverse, SymMatrix};

/// Bounds applied to the latent-variable draws.
///
/// With `s` as small as 1e-6 the λ conditional puts mass on enormous values
/// whenever `|ωᵢⱼ|` is near zero, and τ follows; without bounds the column
/// precision matrix overflows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clamps {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Floor on `|ωᵢⱼ|` inside the inverse Gaussian mean `λᵢⱼ / |ωᵢⱼ|`.
    pub omega_floor: f64,
}

impl Default for Clamps {
    fn default() -> Self {
        Clamps {
            lambda_min: 1e-6,
            lambda_max: 1e6,
            tau_min: 1e-10,
            tau_max: 1e10,
            omega_floor: 1e-10,
        }
    }
}

impl Clamps {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.lambda_min
            && self.lambda_min < self.lambda_max
            && 0.0 < self.tau_min
            && self.tau_min < self.tau_max
            && self.omega_floor > 0.0
            && self.lambda_max.is_finite()
            && self.tau_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid clamp bounds {self:?}")))
        }
    }
}

/// Full sampler state for one chain.
///
/// `covariance` caches `Ω⁻¹`; it is updated in O(p²) after every column and
/// recomputed from scratch at the end of each sweep.
#[derive(Clone, Debug)]
pub struct GibbsState {
    pub(crate) omega: SymMatrix,
    pub(crate) covariance: SymMatrix,
    pub(crate) tau: SymMatrix,
    pub(crate) lambda: SymMatrix,
    pub(crate) scatter: SymMatrix,
    pub(crate) n: usize,
    pub(crate) r: f64,
    pub(crate) s: f64,
    pub(crate) sweeps_done: u64,
}

impl GibbsState {
    /// Starting point `Ω = I`, `τᵢⱼ = 1`, `λᵢⱼ = 1`.
    pub fn initial(scatter: SymMatrix, n: usize, r: f64, s: f64) -> Result<Self> {
        let p = scatter.dim();
        let tau = SymMatrix::from_fn(p, |i, j| if i == j { 0.0 } else { 1.0 });
        let lambda = SymMatrix::from_fn(p, |_, _| 1.0);
        Self::new(SymMatrix::identity(p), tau, lambda, scatter, n, r, s)
    }

    pub fn new(
        omega: SymMatrix,
        tau: SymMatrix,
        lambda: SymMatrix,
        scatter: SymMatrix,
        n: usize,
        r: f64,
        s: f64,
    ) -> Result<Self> {
        let p = omega.dim();
        if p < 2 {
            return Err(Error::InvalidParameter(format!(
                "block Gibbs sampling needs p >= 2, got p = {p}"
            )));
        }
        for (name, m) in [("tau", &tau), ("lambda", &lambda), ("scatter", &scatter)] {
            if m.dim() != p {
                return Err(Error::InvalidParameter(format!(
                    "{name} is {}x{}, expected {p}x{p}",
                    m.dim(),
                    m.dim()
                )));
            }
        }
        if n == 0 {
            return Err(Error::InvalidParameter("sample size n must be positive".into()));
        }
        if !(r > 0.0 && s > 0.0 && r.is_finite() && s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "prior hyperparameters must be positive, got r = {r}, s = {s}"
            )));
        }
        for i in 0..p {
            if tau.get(i, i) != 0.0 {
                return Err(Error::InvalidParameter("tau diagonal must be zero".into()));
            }
            for j in 0..p {
                if i != j && !(tau.get(i, j) > 0.0 && tau.get(i, j).is_finite()) {
                    return Err(Error::InvalidParameter(format!("tau[{i}][{j}] must be positive")));
                }
                if !(lambda.get(i, j) > 0.0 && lambda.get(i, j).is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda[{i}][{j}] must be positive")));
                }
            }
        }
        if scatter.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("scatter matrix has non-finite entries".into()));
        }
        let covariance = spd_inverse(&omega).map_err(|_| Error::StateNotPd)?;
        Ok(GibbsState {
            omega,
            covariance,
            tau,
            lambda,
            scatter,
            n,
            r,
            s,
            sweeps_done: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn omega(&self) -> &SymMatrix {
        &self.omega
    }

    pub fn tau(&self) -> &SymMatrix {
        &self.tau
    }

    pub fn lambda(&self) -> &SymMatrix {
        &self.lambda
    }

    pub fn scatter(&self) -> &SymMatrix {
        &self.scatter
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hyperparameters(&self) -> (f64, f64) {
        (self.r, self.s)
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    pub(crate) fn refresh_covariance(&mut self) -> Result<()> {
        self.covariance = spd_inverse(&self.omega).map_err(|_| Error::StateNotPd)?;
        Ok(())
    }
}
