//! Posterior summaries: correlations, back-transformed group means,
//! per-subject point estimates, joint-vs-separate precision, posterior
//! predictive data and descriptive cross-task statistics.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::design::{ModelSpec, SubjectEffects};
use crate::error::{invalid, Result};
use crate::lba::{simulate_trial, TrialRecord};
use crate::normal;
use crate::rng::{self, Purpose};
use crate::sampler::{DesignCount, Draw, PosteriorChain};

/// Type-7 (linear interpolation) sample quantile. `p` in `[0, 1]`.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean and sample SD (`n − 1` denominator; 0 for fewer than two values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Pearson correlation; `None` when fewer than two pairs or either
/// variable has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// `corr_ij = Σ_ij / sqrt(Σ_ii Σ_jj)` with an exact unit diagonal.
pub fn cov_to_corr(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = sigma.nrows();
    if d != sigma.ncols() {
        return Err(invalid("covariance matrix must be square"));
    }
    let sd: Vec<f64> = (0..d).map(|i| sigma[(i, i)].sqrt()).collect();
    if let Some(i) = sd.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(invalid(format!("diagonal entry {i} is {}", sigma[(i, i)])));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else {
            (sigma[(i, j)] / (sd[i] * sd[j])).clamp(-1.0, 1.0)
        }
    }))
}

/// The ±3 SD rule; a zero posterior mean is never reliable.
pub fn is_reliable(mean: f64, sd: f64) -> bool {
    mean != 0.0 && mean.abs() >= 3.0 * sd
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSummary {
    pub mean: DMatrix<f64>,
    pub sd: DMatrix<f64>,
    pub reliable: DMatrix<bool>,
    pub param_names: Vec<String>,
    pub block_labels: Vec<String>,
}

impl CorrelationSummary {
    pub fn dim(&self) -> usize {
        self.mean.nrows()
    }

    /// Long-format rows for every `(i, j)` pair, including the diagonal.
    pub fn rows(&self) -> Vec<CorrelationRow> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(CorrelationRow {
                    row: self.param_names[i].clone(),
                    col: self.param_names[j].clone(),
                    row_block: self.block_labels[i].clone(),
                    col_block: self.block_labels[j].clone(),
                    mean: self.mean[(i, j)],
                    sd: self.sd[(i, j)],
                    reliable: self.reliable[(i, j)],
                });
            }
        }
        out
    }

    /// Rebuilds a summary from the rows written by [`Self::rows`].
    pub fn from_rows(rows: &[CorrelationRow]) -> Result<Self> {
        let d = (rows.len() as f64).sqrt().round() as usize;
        if d * d != rows.len() || d == 0 {
            return Err(invalid(format!("{} correlation rows is not a square count", rows.len())));
        }
        let names: Vec<String> = rows[..d].iter().map(|r| r.col.clone()).collect();
        let labels: Vec<String> = rows[..d].iter().map(|r| r.col_block.clone()).collect();
        let mut mean = DMatrix::zeros(d, d);
        let mut sd = DMatrix::zeros(d, d);
        let mut reliable = DMatrix::from_element(d, d, false);
        for (k, r) in rows.iter().enumerate() {
            let (i, j) = (k / d, k % d);
            if r.row != names[i] || r.col != names[j] {
                return Err(invalid(format!("correlation row {} out of order", k + 1)));
            }
            mean[(i, j)] = r.mean;
            sd[(i, j)] = r.sd;
            reliable[(i, j)] = r.reliable;
        }
        Ok(Self {
            mean,
            sd,
            reliable,
            param_names: names,
            block_labels: labels,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub row: String,
    pub col: String,
    pub row_block: String,
    pub col_block: String,
    pub mean: f64,
    pub sd: f64,
    pub reliable: bool,
}

/// Element-wise mean/SD of draw-wise correlation matrices.
pub fn correlation_summary_from<'a>(
    sigmas: impl IntoIterator<Item = &'a DMatrix<f64>>,
    param_names: &[String],
    block_labels: &[String],
) -> Result<CorrelationSummary> {
    let d = param_names.len();
    let mut corrs = Vec::new();
    for s in sigmas {
        corrs.push(cov_to_corr(s)?);
    }
    let n = corrs.len();
    if n == 0 {
        return Err(invalid("no draws to summarize"));
    }
    // shifted accumulation keeps identical draws exactly identical
    let first = &corrs[0];
    let mut shift = DMatrix::<f64>::zeros(d, d);
    for c in &corrs {
        shift += c - first;
    }
    let mut mean = first + shift / n as f64;
    let mut sd = DMatrix::<f64>::zeros(d, d);
    if n > 1 {
        for c in &corrs {
            sd += (c - &mean).map(|x| x * x);
        }
        sd = sd.map(|x| (x / (n - 1) as f64).sqrt());
    }
    for i in 0..d {
        for j in 0..i {
            let m = 0.5 * (mean[(i, j)] + mean[(j, i)]);
            let s = 0.5 * (sd[(i, j)] + sd[(j, i)]);
            mean[(i, j)] = m;
            mean[(j, i)] = m;
            sd[(i, j)] = s;
            sd[(j, i)] = s;
        }
        mean[(i, i)] = 1.0;
        sd[(i, i)] = 0.0;
    }
    let reliable = DMatrix::from_fn(d, d, |i, j| i != j && is_reliable(mean[(i, j)], sd[(i, j)]));
    Ok(CorrelationSummary {
        mean,
        sd,
        reliable,
        param_names: param_names.to_vec(),
        block_labels: block_labels.to_vec(),
    })
}

pub fn correlation_summary(chain: &PosteriorChain) -> Result<CorrelationSummary> {
    let sigmas: Vec<DMatrix<f64>> = chain.inference_draws().iter().map(|d| d.sigma_matrix()).collect();
    correlation_summary_from(&sigmas, &chain.meta.param_names, &chain.meta.block_labels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupMeanRow {
    pub param: String,
    pub block: String,
    pub mean: f64,
    pub sd: f64,
}

/// Mean and SD over draws of `exp(mu_d)`.
pub fn group_mean_table(chain: &PosteriorChain) -> Vec<GroupMeanRow> {
    let draws = chain.inference_draws();
    (0..chain.dim())
        .map(|k| {
            let v: Vec<f64> = draws.iter().map(|d| d.mu[k].exp()).collect();
            let (mean, sd) = mean_sd(&v);
            GroupMeanRow {
                param: chain.meta.param_names[k].clone(),
                block: chain.meta.block_labels[k].clone(),
                mean,
                sd,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectPoint {
    pub subject: String,
    pub param: String,
    pub block: String,
    /// Posterior mean of `alpha`.
    pub log_mean: f64,
    /// Posterior mean of `exp(alpha)`.
    pub natural_mean: f64,
    /// Posterior SD of `alpha`.
    pub log_sd: f64,
}

/// Per-subject posterior summaries of the random effects, subject-major.
pub fn subject_effect_points(chain: &PosteriorChain) -> Vec<EffectPoint> {
    let draws = chain.inference_draws();
    let d = chain.dim();
    let mut out = Vec::with_capacity(chain.n_subjects() * d);
    for (s, subject) in chain.meta.subjects.iter().enumerate() {
        for k in 0..d {
            let v: Vec<f64> = draws.iter().map(|dr| dr.alpha[s * d + k]).collect();
            let (log_mean, log_sd) = mean_sd(&v);
            let natural_mean = v.iter().map(|x| x.exp()).sum::<f64>() / v.len() as f64;
            out.push(EffectPoint {
                subject: subject.clone(),
                param: chain.meta.param_names[k].clone(),
                block: chain.meta.block_labels[k].clone(),
                log_mean,
                natural_mean,
                log_sd,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRow {
    pub subject: String,
    pub param: String,
    pub block: String,
    pub sd_joint: f64,
    pub sd_independent: f64,
}

impl PrecisionRow {
    /// `100 (sd_joint − sd_independent) / sd_independent`.
    pub fn percent_change(&self) -> f64 {
        100.0 * (self.sd_joint - self.sd_independent) / self.sd_independent
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPrecision {
    pub block: String,
    pub median_percent_change: f64,
    /// Fraction of points with `sd_joint < sd_independent`.
    pub fraction_below: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionReport {
    pub rows: Vec<PrecisionRow>,
    pub blocks: Vec<BlockPrecision>,
}

impl PrecisionReport {
    pub fn fraction_below(&self) -> f64 {
        let below = self.rows.iter().filter(|r| r.sd_joint < r.sd_independent).count();
        below as f64 / self.rows.len() as f64
    }
}

/// Compares random-effect posterior SDs from a joint fit against fits of
/// parameter subsets (typically one per task), matched by subject id and
/// parameter name.
pub fn precision_compare(joint: &PosteriorChain, independent: &[PosteriorChain]) -> Result<PrecisionReport> {
    let mut lookup: BTreeMap<(String, String), f64> = BTreeMap::new();
    for chain in independent {
        if sorted(&chain.meta.subjects) != sorted(&joint.meta.subjects) {
            return Err(invalid("subject sets differ between joint and independent chains"));
        }
        for p in subject_effect_points(chain) {
            if lookup.insert((p.subject.clone(), p.param.clone()), p.log_sd).is_some() {
                return Err(invalid(format!("parameter {} appears in more than one independent chain", p.param)));
            }
        }
    }
    let mut rows = Vec::new();
    for p in subject_effect_points(joint) {
        let sd_independent = *lookup
            .get(&(p.subject.clone(), p.param.clone()))
            .ok_or_else(|| invalid(format!("parameter {} missing from the independent chains", p.param)))?;
        rows.push(PrecisionRow {
            subject: p.subject,
            param: p.param,
            block: p.block,
            sd_joint: p.log_sd,
            sd_independent,
        });
    }
    if rows.len() != lookup.len() {
        return Err(invalid("independent chains hold parameters absent from the joint chain"));
    }
    let mut labels: Vec<String> = Vec::new();
    for l in &joint.meta.block_labels {
        if !labels.contains(l) {
            labels.push(l.clone());
        }
    }
    let blocks = labels
        .into_iter()
        .map(|block| {
            let in_block: Vec<&PrecisionRow> = rows.iter().filter(|r| r.block == block).collect();
            let changes: Vec<f64> = in_block.iter().map(|r| r.percent_change()).collect();
            let below = in_block.iter().filter(|r| r.sd_joint < r.sd_independent).count();
            BlockPrecision {
                median_percent_change: median(&changes),
                fraction_below: below as f64 / in_block.len() as f64,
                block,
            }
        })
        .collect();
    Ok(PrecisionReport { rows, blocks })
}

fn sorted(v: &[String]) -> Vec<&String> {
    let mut s: Vec<&String> = v.iter().collect();
    s.sort();
    s
}

/// Simulated data for one posterior draw.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictiveSet {
    /// Position of the draw among the chain's inference draws.
    pub draw_index: usize,
    pub iter: u64,
    pub trials: Vec<TrialRecord>,
}

/// Indices of `k` draws spread evenly over `n`.
pub fn spread_indices(n: usize, k: usize) -> Vec<usize> {
    if n == 0 || k == 0 {
        return Vec::new();
    }
    (0..k).map(|i| (i * n) / k).collect()
}

/// Simulates the design (trial counts per subject/task/cell) once for
/// each of `draws` posterior draws spread evenly over the chain.
pub fn posterior_predictive(
    chain: &PosteriorChain,
    design: &[DesignCount],
    draws: usize,
    seed: u64,
) -> Result<Vec<PredictiveSet>> {
    let spec = &chain.meta.model;
    let pool = chain.inference_draws();
    if draws > 0 && pool.is_empty() {
        return Err(invalid("chain has no draws"));
    }
    let d = chain.dim();
    let mut out = Vec::with_capacity(draws);
    for idx in spread_indices(pool.len(), draws) {
        let draw: &Draw = pool[idx];
        let mut trials = Vec::new();
        for row in design {
            let s = chain
                .meta
                .subjects
                .iter()
                .position(|x| *x == row.subject)
                .ok_or_else(|| invalid(format!("subject {} not in chain", row.subject)))?;
            let fx = SubjectEffects::new(row.subject.clone(), draw.alpha[s * d..(s + 1) * d].to_vec());
            let params = crate::design::resolve(spec, &row.task, &row.cell, &fx)?;
            let cell = spec.cell_index(&row.task, &row.cell).expect("resolved above");
            let mut r = rng::stream(seed, Purpose::Predict, idx as u64, (rng::subject_key(&row.subject) ^ cell.0 as u64).rotate_left(7));
            for _ in 0..row.n {
                let (response, rt) = simulate_trial(&params, &mut r)?;
                trials.push(TrialRecord {
                    subject: row.subject.clone(),
                    task: row.task.clone(),
                    cell: row.cell.clone(),
                    response,
                    rt,
                });
            }
        }
        out.push(PredictiveSet {
            draw_index: idx,
            iter: draw.iter,
            trials,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectTaskStats {
    pub subject: String,
    pub task: String,
    pub n: usize,
    pub mean_rt: f64,
    /// Trials in cells with a tagged correct accumulator.
    pub n_scored: usize,
    pub accuracy: Option<f64>,
    pub probit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskPairCorrelation {
    pub task_a: String,
    pub task_b: String,
    pub n_subjects: usize,
    pub r_rt: Option<f64>,
    pub r_probit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossTaskSummary {
    pub stats: Vec<SubjectTaskStats>,
    pub pairs: Vec<TaskPairCorrelation>,
}

/// `Φ⁻¹` of accuracy clamped to `[1/(2n), 1 − 1/(2n)]`.
pub fn clamped_probit(accuracy: f64, n: usize) -> f64 {
    let lo = 1.0 / (2.0 * n as f64);
    normal::quantile(accuracy.clamp(lo, 1.0 - lo))
}

/// Per-subject mean RT and probit accuracy per task, and Pearson
/// correlations of both across subjects for every task pair. Correlations
/// are `None` with fewer than three shared subjects or zero variance.
pub fn descriptive_cross_task(data: &[TrialRecord], spec: &ModelSpec) -> Result<CrossTaskSummary> {
    // (subject, task) -> (n, rt sum, scored, correct); subjects in first-appearance order
    let mut order: Vec<String> = Vec::new();
    let mut acc: BTreeMap<(usize, usize), (usize, f64, usize, usize)> = BTreeMap::new();
    let tasks = spec.task_names();
    for t in data {
        let idx = spec
            .cell_index(&t.task, &t.cell)
            .ok_or_else(|| invalid(format!("no mapping for task {:?} cell {:?}", t.task, t.cell)))?;
        let s = match order.iter().position(|x| *x == t.subject) {
            Some(s) => s,
            None => {
                order.push(t.subject.clone());
                order.len() - 1
            }
        };
        let k = tasks.iter().position(|x| *x == t.task).expect("mapped task");
        let e = acc.entry((s, k)).or_insert((0, 0.0, 0, 0));
        e.0 += 1;
        e.1 += t.rt;
        if let Some(c) = spec.correct_response(idx) {
            e.2 += 1;
            e.3 += (t.response == c) as usize;
        }
    }
    let mut stats = Vec::new();
    for (&(s, k), &(n, rt_sum, scored, correct)) in &acc {
        let accuracy = (scored > 0).then(|| correct as f64 / scored as f64);
        stats.push(SubjectTaskStats {
            subject: order[s].clone(),
            task: tasks[k].to_string(),
            n,
            mean_rt: rt_sum / n as f64,
            n_scored: scored,
            accuracy,
            probit: accuracy.map(|a| clamped_probit(a, scored)),
        });
    }
    let mut pairs = Vec::new();
    for a in 0..tasks.len() {
        for b in a + 1..tasks.len() {
            let (mut rt_a, mut rt_b, mut pr_a, mut pr_b) = (vec![], vec![], vec![], vec![]);
            let mut n_subjects = 0;
            for s in 0..order.len() {
                let (Some(x), Some(y)) = (acc.get(&(s, a)), acc.get(&(s, b))) else { continue };
                n_subjects += 1;
                rt_a.push(x.1 / x.0 as f64);
                rt_b.push(y.1 / y.0 as f64);
                if x.2 > 0 && y.2 > 0 {
                    pr_a.push(clamped_probit(x.3 as f64 / x.2 as f64, x.2));
                    pr_b.push(clamped_probit(y.3 as f64 / y.2 as f64, y.2));
                }
            }
            let gated = |u: &[f64], v: &[f64]| if u.len() >= 3 { pearson(u, v) } else { None };
            pairs.push(TaskPairCorrelation {
                task_a: tasks[a].to_string(),
                task_b: tasks[b].to_string(),
                n_subjects,
                r_rt: gated(&rt_a, &rt_b),
                r_probit: gated(&pr_a, &pr_b),
            });
        }
    }
    Ok(CrossTaskSummary { stats, pairs })
}

/// Writes any serializable rows as a CSV table with a header.
pub fn write_table<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    crate::chain::write_atomic(path, &bytes)
}

pub fn read_table<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}
