//! Population model over log-scale random effects.
//!
//! `alpha_s ~ N(mu, Sigma)` across subjects with priors
//!
//! ```text
//! mu          ~ N(0, I)
//! Sigma | a   ~ IW(nu + D - 1, 2 nu diag(1/a_1, ..., 1/a_D))
//! a_d         ~ InvGamma(1/2, 1/A_d^2)
//! ```
//!
//! The auxiliary `a` makes every standard deviation half-t(nu, A_d) a priori
//! and, for `nu = 2`, every correlation uniform on (-1, 1). All three
//! conditionals are conjugate.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Factor};

/// Half-t scale: one value for every coordinate or one per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleSpec {
    Shared(f64),
    PerCoordinate(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub nu: f64,
    pub a_scale: ScaleSpec,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            nu: 2.0,
            a_scale: ScaleSpec::Shared(1.0),
        }
    }
}

impl Hyperparameters {
    pub fn scales(&self, dim: usize) -> Result<Vec<f64>> {
        let v = match &self.a_scale {
            ScaleSpec::Shared(x) => vec![*x; dim],
            ScaleSpec::PerCoordinate(v) if v.len() == dim => v.clone(),
            ScaleSpec::PerCoordinate(v) => {
                return Err(invalid(format!("a_scale has {} entries, model has {dim}", v.len())))
            }
        };
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(invalid("half-t scales must be positive"));
        }
        if !(self.nu >= 2.0) {
            return Err(invalid(format!("nu must be >= 2, got {}", self.nu)));
        }
        Ok(v)
    }
}

/// Population mean, covariance and prior auxiliaries.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupState {
    pub mu: Vec<f64>,
    pub sigma: DMatrix<f64>,
    pub a: Vec<f64>,
    pub nu: f64,
    pub a_scale: Vec<f64>,
}

impl GroupState {
    /// `mu = 0`, `Sigma = I`, `a = 1`.
    pub fn initial(dim: usize, hyper: &Hyperparameters) -> Result<Self> {
        Ok(Self {
            mu: vec![0.0; dim],
            sigma: DMatrix::identity(dim, dim),
            a: vec![1.0; dim],
            nu: hyper.nu,
            a_scale: hyper.scales(dim)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.sigma.nrows() != d || self.sigma.ncols() != d || self.a.len() != d || self.a_scale.len() != d {
            return Err(invalid("group state dimensions disagree"));
        }
        if self.a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(invalid("auxiliaries must be positive"));
        }
        if !(self.nu >= 2.0) {
            return Err(invalid(format!("nu must be >= 2, got {}", self.nu)));
        }
        let asym = (&self.sigma - self.sigma.transpose()).abs().max();
        if asym > 1e-10 * self.sigma.abs().max().max(1.0) {
            return Err(invalid("sigma is not symmetric"));
        }
        if !linalg::is_positive_definite(&self.sigma) {
            return Err(invalid(format!(
                "sigma is not positive definite (smallest eigenvalue {:e})",
                linalg::min_eigenvalue(&self.sigma)
            )));
        }
        Ok(())
    }
}

fn prior_scale(a: &[f64], nu: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(a.len(), a.iter().map(|x| 2.0 * nu / x)))
}

/// Joint log prior density of `(mu, Sigma, a)`.
pub fn log_prior(gs: &GroupState) -> Result<f64> {
    gs.validate()?;
    let d = gs.dim();
    let zero = vec![0.0; d];
    let mu_part = Factor::new(&DMatrix::identity(d, d))?.mvn_log_density(&gs.mu, &zero);
    let sigma_part = linalg::inv_wishart_log_density(&gs.sigma, gs.nu + d as f64 - 1.0, &prior_scale(&gs.a, gs.nu))?;
    let a_part: f64 = gs
        .a
        .iter()
        .zip(&gs.a_scale)
        .map(|(&a, &s)| linalg::inv_gamma_log_density(a, 0.5, 1.0 / (s * s)))
        .sum();
    Ok(mu_part + sigma_part + a_part)
}

/// Draw `mu | alpha, Sigma ~ N(Λ Σ⁻¹ Σ_s α_s, Λ)` with `Λ = (I + S Σ⁻¹)⁻¹`.
pub fn sample_mu<A: AsRef<[f64]>, R: Rng + ?Sized>(alphas: &[A], sigma: &DMatrix<f64>, rng: &mut R) -> Result<Vec<f64>> {
    let d = sigma.nrows();
    let sigma_inv = Factor::new(sigma)?.inverse();
    let mut total = nalgebra::DVector::<f64>::zeros(d);
    for a in alphas {
        let a = a.as_ref();
        if a.len() != d {
            return Err(invalid("alpha length differs from sigma"));
        }
        total += nalgebra::DVector::from_column_slice(a);
    }
    let precision = DMatrix::identity(d, d) + &sigma_inv * alphas.len() as f64;
    let pf = Factor::new(&precision)?;
    let cov = pf.inverse();
    let mean = &cov * (&sigma_inv * total);
    // mean + L_P⁻ᵀ z has covariance P⁻¹
    let z = nalgebra::DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let step = pf
        .lower()
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::Numerical("singular posterior precision".into()))?;
    Ok((mean + step).iter().copied().collect())
}

/// Degrees of freedom and scale matrix of `Sigma | alpha, mu, a`.
pub fn sigma_conditional<A: AsRef<[f64]>>(alphas: &[A], mu: &[f64], a: &[f64], nu: f64) -> (f64, DMatrix<f64>) {
    let d = mu.len();
    let mut scale = prior_scale(a, nu);
    for alpha in alphas {
        let dev = nalgebra::DVector::from_iterator(d, alpha.as_ref().iter().zip(mu).map(|(x, m)| x - m));
        scale += &dev * dev.transpose();
    }
    (nu + d as f64 - 1.0 + alphas.len() as f64, scale)
}

/// Draw `Sigma | alpha, mu, a ~ IW(nu + D - 1 + S, 2 nu diag(1/a) + Σ_s (α_s − μ)(α_s − μ)ᵀ)`.
pub fn sample_sigma<A: AsRef<[f64]>, R: Rng + ?Sized>(
    alphas: &[A],
    mu: &[f64],
    a: &[f64],
    nu: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let (df, scale) = sigma_conditional(alphas, mu, a, nu);
    linalg::sample_inv_wishart(df, &scale, rng)
}

/// Draw `a_d | Sigma ~ InvGamma((nu + D)/2, nu (Σ⁻¹)_dd + 1/A_d²)` independently.
pub fn sample_a<R: Rng + ?Sized>(sigma: &DMatrix<f64>, nu: f64, a_scale: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let d = sigma.nrows();
    let inv = Factor::new(sigma)?.inverse();
    (0..d)
        .map(|k| linalg::sample_inv_gamma(0.5 * (nu + d as f64), nu * inv[(k, k)] + 1.0 / (a_scale[k] * a_scale[k]), rng))
        .collect()
}

/// `ln N(alpha; mu, Sigma)`.
pub fn log_density_alpha(alpha: &[f64], mu: &[f64], sigma: &DMatrix<f64>) -> Result<f64> {
    if alpha.len() != mu.len() || mu.len() != sigma.nrows() {
        return Err(invalid("dimension mismatch"));
    }
    linalg::mvn_log_density(alpha, mu, sigma)
}

/// Ancestral draw `a → Sigma → mu` from the prior.
pub fn sample_prior<R: Rng + ?Sized>(dim: usize, hyper: &Hyperparameters, rng: &mut R) -> Result<GroupState> {
    let a_scale = hyper.scales(dim)?;
    let a = a_scale
        .iter()
        .map(|s| linalg::sample_inv_gamma(0.5, 1.0 / (s * s), rng))
        .collect::<Result<Vec<_>>>()?;
    let sigma = linalg::sample_inv_wishart(hyper.nu + dim as f64 - 1.0, &prior_scale(&a, hyper.nu), rng)?;
    let mu = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    Ok(GroupState {
        mu,
        sigma,
        a,
        nu: hyper.nu,
        a_scale,
    })
}
