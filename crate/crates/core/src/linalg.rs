//! Cholesky-based multivariate normal and inverse-Wishart helpers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const MAX_JITTER_ROUNDS: usize = 3;

/// Lower Cholesky factor `L` of a symmetric positive-definite matrix.
#[derive(Clone, Debug)]
pub struct Factor {
    l: DMatrix<f64>,
    log_det: f64,
}

impl Factor {
    /// Factorizes `m`, adding `1e-10·trace/D` to the diagonal up to three
    /// times before giving up.
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if d == 0 || d != m.ncols() {
            return Err(Error::Numerical(format!("cannot factor a {}x{} matrix", m.nrows(), m.ncols())));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let jitter = 1e-10 * m.trace().abs() / d as f64;
        let mut work = m.clone();
        for round in 0..=MAX_JITTER_ROUNDS {
            if round > 0 {
                for i in 0..d {
                    work[(i, i)] += jitter;
                }
            }
            if let Some(ch) = work.clone().cholesky() {
                let l = ch.unpack();
                let log_det = 2.0 * l.diagonal().iter().map(|x| x.ln()).sum::<f64>();
                return Ok(Self { l, log_det });
            }
        }
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eigenvalue(m),
        })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// `ln |M|`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Factor of `c²·M`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            l: &self.l * c,
            log_det: self.log_det + 2.0 * self.dim() as f64 * c.ln(),
        }
    }

    /// `|L⁻¹ (x − mean)|²`.
    pub fn mahalanobis2(&self, x: &[f64], mean: &[f64]) -> f64 {
        let d = self.dim();
        let mut z = [0.0f64; 64];
        let mut heap;
        let z: &mut [f64] = if d <= 64 {
            &mut z[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut total = 0.0;
        for i in 0..d {
            let mut acc = x[i] - mean[i];
            for j in 0..i {
                acc -= self.l[(i, j)] * z[j];
            }
            z[i] = acc / self.l[(i, i)];
            total += z[i] * z[i];
        }
        total
    }

    /// Multivariate normal log-density with this factor as covariance.
    pub fn mvn_log_density(&self, x: &[f64], mean: &[f64]) -> f64 {
        -0.5 * (self.dim() as f64 * LN_2PI + self.log_det + self.mahalanobis2(x, mean))
    }

    /// Draw `mean + L z`, `z ~ N(0, I)`.
    pub fn sample<R: Rng + ?Sized>(&self, mean: &[f64], rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        (0..d)
            .map(|i| mean[i] + (0..=i).map(|j| self.l[(i, j)] * z[j]).sum::<f64>())
            .collect()
    }

    /// `M⁻¹`.
    pub fn inverse(&self) -> DMatrix<f64> {
        let d = self.dim();
        let l_inv = self
            .l
            .clone()
            .solve_lower_triangular(&DMatrix::identity(d, d))
            .expect("cholesky factor has a positive diagonal");
        let inv = l_inv.transpose() * l_inv;
        symmetrize(inv)
    }
}

pub fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.iter().any(|x| !x.is_finite()) {
        return f64::NAN;
    }
    symmetrize(m.clone())
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|x| x.is_finite()) && m.clone().cholesky().is_some()
}

/// Multivariate normal log-density, factorizing `cov` on the fly.
pub fn mvn_log_density(x: &[f64], mean: &[f64], cov: &DMatrix<f64>) -> Result<f64> {
    Ok(Factor::new(cov)?.mvn_log_density(x, mean))
}

/// `ln Γ_D(x)`, the multivariate gamma function.
pub fn ln_multigamma(d: usize, x: f64) -> f64 {
    let d_f = d as f64;
    d_f * (d_f - 1.0) / 4.0 * std::f64::consts::PI.ln()
        + (1..=d).map(|j| ln_gamma(x + (1.0 - j as f64) / 2.0)).sum::<f64>()
}

/// Inverse-Wishart `IW(df, scale)` log-density, density proportional to
/// `|Σ|^{-(df+D+1)/2} exp(-tr(scale Σ⁻¹)/2)`.
pub fn inv_wishart_log_density(sigma: &DMatrix<f64>, df: f64, scale: &DMatrix<f64>) -> Result<f64> {
    let d = sigma.nrows();
    let fs = Factor::new(sigma)?;
    let fp = Factor::new(scale)?;
    let trace = (scale * fs.inverse()).trace();
    Ok(0.5 * df * fp.log_det()
        - 0.5 * df * d as f64 * std::f64::consts::LN_2
        - ln_multigamma(d, 0.5 * df)
        - 0.5 * (df + d as f64 + 1.0) * fs.log_det()
        - 0.5 * trace)
}

/// Inverse-Wishart draw via the Bartlett decomposition of the matching
/// Wishart precision.
pub fn sample_inv_wishart<R: Rng + ?Sized>(df: f64, scale: &DMatrix<f64>, rng: &mut R) -> Result<DMatrix<f64>> {
    let d = scale.nrows();
    if !(df > d as f64 - 1.0) {
        return Err(Error::Numerical(format!("inverse-Wishart needs df > D - 1, got {df} for D = {d}")));
    }
    let l = Factor::new(scale)?.l;
    let mut bartlett = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let chi = ChiSquared::new(df - i as f64).map_err(|e| Error::Numerical(e.to_string()))?;
        bartlett[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            bartlett[(i, j)] = rng.sample(StandardNormal);
        }
    }
    // Σ = (L A⁻ᵀ)(L A⁻ᵀ)ᵀ
    let a_inv = bartlett
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .ok_or_else(|| Error::Numerical("degenerate Bartlett factor".into()))?;
    let b = l * a_inv.transpose();
    Ok(symmetrize(&b * b.transpose()))
}

/// `InvGamma(shape, rate)` draw: the reciprocal of `Gamma(shape, 1/rate)`.
pub fn sample_inv_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Numerical(format!("InvGamma({shape}, {rate}): {e}")))?;
    Ok(1.0 / g.sample(rng))
}

pub fn inv_gamma_log_density(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - rate / x
}

pub fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}
