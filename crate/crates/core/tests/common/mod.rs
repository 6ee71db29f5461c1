//! Independent numerical oracles shared by the integration tests. Nothing
//! here calls into the library's density code.

#![allow(dead_code)]

use std::f64::consts::PI;

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF via the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 24)
}

/// `∫_0^∞ f` via `t = u / (1 - u)`, split into panels so narrow peaks are
/// not missed by the first Simpson estimate.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: &F, tol: f64) -> f64 {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let t = u / (1.0 - u);
        let v = f(t) / ((1.0 - u) * (1.0 - u));
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let panels = 64;
    (0..panels)
        .map(|k| {
            let a = k as f64 / panels as f64;
            let b = (k + 1) as f64 / panels as f64;
            adaptive_simpson(&g, a, b, tol / panels as f64)
        })
        .sum()
}

/// Normalised distribution on a grid from unnormalised log-density values,
/// with a piecewise-linear density (trapezoid CDF).
pub struct GridDist {
    pub x: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl GridDist {
    pub fn from_log_density(x: Vec<f64>, log_f: &[f64]) -> Self {
        assert!(log_f.iter().all(|l| !l.is_nan()), "NaN in oracle log density");
        let top = log_f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let f: Vec<f64> = log_f.iter().map(|l| (l - top).exp()).collect();
        let mut cdf = vec![0.0; x.len()];
        for i in 1..x.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
        }
        let total = cdf[x.len() - 1];
        for c in &mut cdf {
            *c /= total;
        }
        Self { x, cdf }
    }

    pub fn cdf_at(&self, v: f64) -> f64 {
        if v <= self.x[0] {
            return 0.0;
        }
        let n = self.x.len();
        if v >= self.x[n - 1] {
            return 1.0;
        }
        let i = self.x.partition_point(|&g| g <= v);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let w = (v - x0) / (x1 - x0);
        c0 + (c1 - c0) * w
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            assert!(c.is_finite(), "oracle CDF is not finite at {x}");
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// ln Γ via the Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `ln InvGamma(x; shape, rate)`.
pub fn ln_inv_gamma(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - rate / x
}

pub fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * PI * var).ln() + (x - mean) * (x - mean) / var)
}

/// Single-accumulator finishing-time density written out from the
/// geometry: start point uniform on `[0, a]`, drift `N(v, 1)` truncated to
/// positive values, threshold `c = a + b_gap`.
pub fn lba_pdf(t: f64, b_gap: f64, a: f64, v: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let c = a + b_gap;
    let norm = std_normal_cdf(v);
    if a == 0.0 {
        return c / (t * t) * std_normal_pdf(c / t - v) / norm;
    }
    let z1 = (c - a) / t - v;
    let z2 = c / t - v;
    // f(t) = (1/a) ∫_{c-a}^{c} (x/t²) φ(x/t − v) dx / Φ(v)
    let f = (v * (std_normal_cdf(z2) - std_normal_cdf(z1)) + std_normal_pdf(z1) - std_normal_pdf(z2)) / (a * norm);
    f.max(0.0)
}

/// Closed-form zero-start-range limit with threshold `c`.
pub fn lba_pdf_point_start(t: f64, c: f64, v: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    c / (t * t) * std_normal_pdf(c / t - v) / std_normal_cdf(v)
}

/// Survivor function of one accumulator by quadrature of [`lba_pdf`].
pub fn lba_survival(t: f64, b_gap: f64, a: f64, v: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let f = |s: f64| lba_pdf(s, b_gap, a, v);
    let panels = 8;
    let w = t / panels as f64;
    let mass: f64 = (0..panels)
        .map(|k| adaptive_simpson(&f, k as f64 * w, (k + 1) as f64 * w, 1e-13))
        .sum();
    (1.0 - mass).clamp(0.0, 1.0)
}

/// One-parameter model: a single task whose only free coordinate is the
/// log correct-response drift; threshold gap, start range, error drift and
/// non-decision time are fixed.
pub const ONE_PARAM_MODEL: &str = r#"{
  "tasks": [{
    "name": "task",
    "params": ["v_c"],
    "cells": {
      "left":  {"accumulators": [
        {"b": 0.8, "A": 0.5, "v": "v_c", "tau": 0.2, "correct": true},
        {"b": 0.8, "A": 0.5, "v": 1.0, "tau": 0.2, "correct": false}]},
      "right": {"accumulators": [
        {"b": 0.8, "A": 0.5, "v": 1.0, "tau": 0.2, "correct": false},
        {"b": 0.8, "A": 0.5, "v": "v_c", "tau": 0.2, "correct": true}]}
    }
  }],
  "vector_order": ["v_c"]
}"#;

/// Log prior density of a single subject's effect under the hierarchy with
/// `D = 1`, `nu = 2`, half-t scale 1, integrated over `mu`, `sigma²` and the
/// auxiliary `a` numerically.
pub struct MarginalEffectPrior {
    log_s2: Vec<f64>,
    log_p_s2: Vec<f64>,
}

impl MarginalEffectPrior {
    pub fn new() -> Self {
        // p(σ²) = ∫ InvGamma(σ²; 1, 2/a) InvGamma(a; 1/2, 1) da, on log grids
        let log_a = linspace(-25.0, 25.0, 4001);
        let log_s2 = linspace(-25.0, 25.0, 2001);
        let log_p_s2 = log_s2
            .iter()
            .map(|&ls| {
                let s2 = ls.exp();
                let vals: Vec<f64> = log_a
                    .iter()
                    .map(|&la| {
                        let a = la.exp();
                        ln_inv_gamma(s2, 1.0, 2.0 / a) + ln_inv_gamma(a, 0.5, 1.0) + la
                    })
                    .collect();
                log_trapezoid(&log_a, &vals)
            })
            .collect();
        Self { log_s2, log_p_s2 }
    }

    /// `ln p(alpha) = ln ∫ N(alpha; 0, 1 + σ²) p(σ²) dσ²`.
    pub fn log_density(&self, alpha: f64) -> f64 {
        let vals: Vec<f64> = self
            .log_s2
            .iter()
            .zip(&self.log_p_s2)
            .map(|(&ls, &lp)| ln_normal(alpha, 0.0, 1.0 + ls.exp()) + lp + ls)
            .collect();
        log_trapezoid(&self.log_s2, &vals)
    }
}

/// `ln ∫ exp(y) dx` by the trapezoid rule on log values.
pub fn log_trapezoid(x: &[f64], log_y: &[f64]) -> f64 {
    let top = log_y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for i in 1..x.len() {
        total += 0.5 * ((log_y[i] - top).exp() + (log_y[i - 1] - top).exp()) * (x[i] - x[i - 1]);
    }
    top + total.ln()
}
