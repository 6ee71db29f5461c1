//! Linear ballistic accumulator: first-passage densities, the race
//! likelihood and trial simulation.
//!
//! Each accumulator starts at a uniform point in `[0, A]`, rises linearly at a
//! drift drawn from `Normal(v, s)` truncated to positive values, and finishes
//! when it reaches the absolute threshold `c = A + b_gap`. The drift SD `s` is
//! fixed at 1 and is not a free parameter.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::normal;

/// Drift-rate standard deviation shared by every accumulator.
pub const DRIFT_SD: f64 = 1.0;

/// Below this start-point range the closed-form zero-range limit is used.
pub const ZERO_RANGE_SWITCH: f64 = 1e-6;

/// Smallest admissible `v / s`; keeps the truncation normalizer representable.
pub const MIN_DRIFT_Z: f64 = -8.0;

/// Natural-scale parameters of one accumulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulatorParams {
    /// Distance from the top of the start-point range to the threshold.
    pub b_gap: f64,
    /// Width of the uniform start-point distribution (`A`).
    pub start_range: f64,
    /// Mean of the (pre-truncation) drift distribution.
    pub drift: f64,
    /// Non-decision time in seconds.
    pub non_decision: f64,
}

impl AccumulatorParams {
    pub fn new(b_gap: f64, start_range: f64, drift: f64, non_decision: f64) -> Result<Self> {
        let p = Self {
            b_gap,
            start_range,
            drift,
            non_decision,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.b_gap.is_finite()
            && self.start_range.is_finite()
            && self.drift.is_finite()
            && self.non_decision.is_finite();
        if !finite {
            return Err(invalid(format!("non-finite accumulator parameters {self:?}")));
        }
        if self.b_gap <= 0.0 {
            return Err(invalid(format!("b_gap must be > 0, got {}", self.b_gap)));
        }
        if self.start_range < 0.0 {
            return Err(invalid(format!("start range must be >= 0, got {}", self.start_range)));
        }
        if self.non_decision < 0.0 {
            return Err(invalid(format!("non-decision time must be >= 0, got {}", self.non_decision)));
        }
        if self.drift / DRIFT_SD <= MIN_DRIFT_Z {
            return Err(invalid(format!(
                "drift {} too negative: v/s must exceed {MIN_DRIFT_Z}",
                self.drift
            )));
        }
        Ok(())
    }

    /// Absolute threshold `c = A + b_gap`.
    #[inline]
    pub fn threshold(&self) -> f64 {
        self.start_range + self.b_gap
    }

    #[inline]
    pub(crate) fn node(&self) -> Node {
        Node::new(self)
    }
}

/// One observed decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub subject: String,
    pub task: String,
    pub cell: String,
    /// 0-based accumulator index of the given response.
    pub response: usize,
    /// Response time in seconds.
    pub rt: f64,
}

/// Precomputed per-accumulator constants for repeated evaluation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Node {
    c: f64,
    range: f64,
    v: f64,
    inv_z: f64,
}

impl Node {
    #[inline]
    pub(crate) fn new(p: &AccumulatorParams) -> Self {
        Self {
            c: p.threshold(),
            range: p.start_range,
            v: p.drift,
            inv_z: 1.0 / normal::cdf(p.drift / DRIFT_SD),
        }
    }

    #[inline]
    pub(crate) fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let (c, a, v, s) = (self.c, self.range, self.v, DRIFT_SD);
        if a < ZERO_RANGE_SWITCH {
            let z = (c / t - v) / s;
            return c / (t * t * s) * normal::pdf(z) * self.inv_z;
        }
        let ts = t * s;
        let z1 = (c - a - t * v) / ts;
        let z2 = (c - t * v) / ts;
        let bracket = -v * normal::cdf(z1) + s * normal::pdf(z1) + v * normal::cdf(z2) - s * normal::pdf(z2);
        (bracket * self.inv_z / a).max(0.0)
    }

    #[inline]
    pub(crate) fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t.is_infinite() {
            return 1.0;
        }
        let (c, a, v, s) = (self.c, self.range, self.v, DRIFT_SD);
        if a < ZERO_RANGE_SWITCH {
            return (normal::cdf((v - c / t) / s) * self.inv_z).min(1.0);
        }
        let ts = t * s;
        let u1 = c - a - t * v;
        let u2 = c - t * v;
        let z1 = u1 / ts;
        let z2 = u2 / ts;
        let bracket = 1.0 + (u1 / a) * normal::cdf(z1) - (u2 / a) * normal::cdf(z2)
            + (ts / a) * normal::pdf(z1)
            - (ts / a) * normal::pdf(z2);
        (bracket * self.inv_z).clamp(0.0, 1.0)
    }

    /// `ln(1 - F(t))`.
    #[inline]
    pub(crate) fn log_survival(&self, t: f64) -> f64 {
        (-self.cdf(t)).ln_1p()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t == f64::NEG_INFINITY {
        return Err(invalid(format!("time must be a number, got {t}")));
    }
    Ok(())
}

/// Finishing-time density of a single accumulator at decision time `t`.
///
/// Returns 0 for `t <= 0`.
pub fn node_pdf(t: f64, p: &AccumulatorParams) -> Result<f64> {
    check_time(t)?;
    if !t.is_finite() {
        return Err(invalid("time must be finite"));
    }
    p.validate()?;
    Ok(p.node().pdf(t))
}

/// Finishing-time distribution function of a single accumulator.
pub fn node_cdf(t: f64, p: &AccumulatorParams) -> Result<f64> {
    check_time(t)?;
    p.validate()?;
    Ok(p.node().cdf(t))
}

fn check_race(params: &[AccumulatorParams], min_len: usize) -> Result<()> {
    if params.len() < min_len {
        return Err(invalid(format!(
            "need at least {min_len} accumulators, got {}",
            params.len()
        )));
    }
    let tau = params[0].non_decision;
    for p in params {
        p.validate()?;
        if p.non_decision != tau {
            return Err(invalid("accumulators of one trial must share the non-decision time"));
        }
    }
    Ok(())
}

/// Log joint density of the observed (response, rt) under a race between
/// the given accumulators. `-inf` when `rt` does not exceed the
/// non-decision time.
pub fn defective_log_density(trial: &TrialRecord, params: &[AccumulatorParams]) -> Result<f64> {
    check_race(params, 2)?;
    if trial.response >= params.len() {
        return Err(invalid(format!(
            "response index {} out of range for {} accumulators",
            trial.response,
            params.len()
        )));
    }
    if !trial.rt.is_finite() {
        return Err(invalid(format!("non-finite rt {}", trial.rt)));
    }
    let d = trial.rt - params[0].non_decision;
    if d <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(race_log_density(params.iter().map(|p| p.node()), trial.response, d))
}

#[inline]
pub(crate) fn race_log_density(nodes: impl Iterator<Item = Node>, response: usize, d: f64) -> f64 {
    let mut total = 0.0;
    for (k, node) in nodes.enumerate() {
        total += if k == response {
            node.pdf(d).ln()
        } else {
            node.log_survival(d)
        };
    }
    total
}

/// Uniform start point in `[0, range)`.
pub fn sample_start<R: Rng + ?Sized>(range: f64, rng: &mut R) -> f64 {
    range * rng.random::<f64>()
}

/// Drift from `Normal(v, s)` truncated to `(0, inf)`, by inversion.
pub fn sample_drift<R: Rng + ?Sized>(v: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    // -Z is truncated above at v/s, so -Z = Φ⁻¹(u·Φ(v/s)).
    let tail = normal::quantile(u * normal::cdf(v / DRIFT_SD));
    (v - DRIFT_SD * tail).max(f64::MIN_POSITIVE)
}

/// Simulate one race. Start points and drifts are drawn accumulator by
/// accumulator, start first.
pub fn simulate_trial<R: Rng + ?Sized>(params: &[AccumulatorParams], rng: &mut R) -> Result<(usize, f64)> {
    check_race(params, 1)?;
    Ok(simulate_unchecked(params, rng))
}

pub(crate) fn simulate_unchecked<R: Rng + ?Sized>(params: &[AccumulatorParams], rng: &mut R) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, p) in params.iter().enumerate() {
        let start = sample_start(p.start_range, rng);
        let drift = sample_drift(p.drift, rng);
        let time = (p.threshold() - start) / drift;
        if time < best.1 {
            best = (k, time);
        }
    }
    (best.0, best.1 + params[0].non_decision)
}
