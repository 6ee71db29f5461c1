//! Particle Metropolis-within-Gibbs over `(mu, Sigma, a, alpha_1..S)`.
//!
//! Each sweep draws `mu`, `Sigma` and `a` from their conjugate conditionals
//! and then refreshes every subject's random effects with a
//! conditional importance-sampling step: the current value is kept as
//! particle 0, `R - 1` fresh particles are proposed, and one particle is
//! selected in proportion to `likelihood × population density / proposal
//! density`.
//!
//! Three stages run back to back. Burn-in and adaptation propose from a
//! mixture of the population distribution and a local Gaussian around the
//! current value. At the end of adaptation a Gaussian is fitted to every
//! subject's adaptation draws; sampling then proposes from that Gaussian
//! mixed with the population distribution. The sampling-stage proposal does
//! not depend on the current value, which keeps the retained-particle kernel
//! exactly invariant for the conditional posterior.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{group_by_subject, validate_spec, CellIndex, ModelSpec, SubjectEffects};
use crate::error::{invalid, Error, Result};
use crate::hierarchy::{self, GroupState, Hyperparameters};
use crate::lba::TrialRecord;
use crate::likelihood::SubjectData;
use crate::linalg::Factor;
use crate::rng::{self, Purpose, Stream};

/// Unique adaptation draws a subject needs before its proposal is fitted.
pub const MIN_UNIQUE_FOR_FIT: usize = 20;
/// Ridge added to fitted proposal covariances.
pub const PROPOSAL_RIDGE: f64 = 1e-6;
/// Share of the fitted component in the sampling-stage proposal.
pub const FITTED_WEIGHT: f64 = 0.9;
const INIT_VARIANCE: f64 = 0.1;
const MAX_INIT_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    BurnIn,
    Adaptation,
    Sampling,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::BurnIn, Stage::Adaptation, Stage::Sampling];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::BurnIn => "burn_in",
            Stage::Adaptation => "adaptation",
            Stage::Sampling => "sampling",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub burn_in: usize,
    pub adaptation: usize,
    pub sampling: usize,
}

impl StageCounts {
    pub fn new(burn_in: usize, adaptation: usize, sampling: usize) -> Self {
        Self {
            burn_in,
            adaptation,
            sampling,
        }
    }

    pub fn get(&self, stage: Stage) -> usize {
        match stage {
            Stage::BurnIn => self.burn_in,
            Stage::Adaptation => self.adaptation,
            Stage::Sampling => self.sampling,
        }
    }
}

/// Where initial random effects are centred.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitCenter {
    /// `MVN(mu0 = 0, 0.1 I)` for every coordinate.
    Zero,
    /// As `Zero`, except coordinates used as a non-decision time are centred
    /// at `ln(min rt / 2)` over the subject's trials that use them.
    #[default]
    DataTau,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub particles_per_stage: StageCounts,
    pub draws_per_stage: StageCounts,
    /// `(w_prior, w_local)` for the burn-in/adaptation mixture proposal.
    pub mixture_weights: (f64, f64),
    /// Scale `ε` of the local component `MVN(alpha_current, ε² Σ)`.
    pub local_scale: f64,
    pub seed: u64,
    pub thin: usize,
    pub workers: usize,
    pub init: InitCenter,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            particles_per_stage: StageCounts::new(100, 100, 50),
            draws_per_stage: StageCounts::new(500, 500, 2000),
            mixture_weights: (0.5, 0.5),
            local_scale: 0.5,
            seed: 0,
            thin: 1,
            workers: 1,
            init: InitCenter::default(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        for s in Stage::ALL {
            if self.particles_per_stage.get(s) == 0 || self.draws_per_stage.get(s) == 0 {
                return Err(invalid(format!("{} particle and draw counts must be >= 1", s.as_str())));
            }
        }
        let (wp, wl) = self.mixture_weights;
        if !(wp > 0.0 && wl > 0.0 && ((wp + wl) - 1.0).abs() < 1e-9) {
            return Err(invalid(format!("mixture weights must be positive and sum to 1, got ({wp}, {wl})")));
        }
        if !(self.local_scale > 0.0 && self.local_scale.is_finite()) {
            return Err(invalid("local_scale must be > 0"));
        }
        if self.thin == 0 || self.workers == 0 {
            return Err(invalid("thin and workers must be >= 1"));
        }
        Ok(())
    }
}

/// Per-sweep quantities shared by every subject update.
pub struct GroupContext {
    pub mu: Vec<f64>,
    pub population: Factor,
    pub local: Factor,
}

impl GroupContext {
    pub fn new(gs: &GroupState, local_scale: f64) -> Result<Self> {
        let population = Factor::new(&gs.sigma)?;
        let local = population.scaled(local_scale);
        Ok(Self {
            mu: gs.mu.clone(),
            population,
            local,
        })
    }
}

/// Subject-specific Gaussian fitted to adaptation draws.
#[derive(Clone, Debug)]
pub struct FittedProposal {
    pub mean: Vec<f64>,
    pub factor: Factor,
}

impl FittedProposal {
    /// Empirical mean and covariance (plus ridge) of the draws.
    pub fn fit(draws: &[Vec<f64>]) -> Result<Self> {
        let n = draws.len();
        if n < 2 {
            return Err(invalid("need at least two draws to fit a proposal"));
        }
        let d = draws[0].len();
        let mean: Vec<f64> = (0..d).map(|k| draws.iter().map(|x| x[k]).sum::<f64>() / n as f64).collect();
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for x in draws {
            for i in 0..d {
                for j in 0..=i {
                    cov[(i, j)] += (x[i] - mean[i]) * (x[j] - mean[j]);
                }
            }
        }
        for i in 0..d {
            for j in 0..=i {
                let v = cov[(i, j)] / (n - 1) as f64;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
            cov[(i, i)] += PROPOSAL_RIDGE;
        }
        Ok(Self {
            mean,
            factor: Factor::new(&cov)?,
        })
    }
}

/// Proposal used to generate the `R - 1` fresh particles.
#[derive(Clone, Copy, Debug)]
pub enum SubjectProposal<'a> {
    /// `w_prior·MVN(mu, Σ) + w_local·MVN(alpha_current, ε²Σ)`.
    Mixture { w_prior: f64 },
    /// `FITTED_WEIGHT·MVN(fitted) + (1 − FITTED_WEIGHT)·MVN(mu, Σ)`.
    Fitted(&'a FittedProposal),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleOutcome {
    pub alpha: Vec<f64>,
    /// Index of the selected particle; 0 is the retained one.
    pub selected: usize,
    /// Every particle had weight zero; the current value was kept.
    pub degenerate: bool,
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// One conditional importance-sampling update of a subject's random effects.
pub fn particle_update<R: Rng + ?Sized>(
    data: &SubjectData,
    spec: &ModelSpec,
    current: &[f64],
    group: &GroupContext,
    proposal: SubjectProposal<'_>,
    particles: usize,
    rng: &mut R,
) -> ParticleOutcome {
    if particles <= 1 {
        return ParticleOutcome {
            alpha: current.to_vec(),
            selected: 0,
            degenerate: false,
        };
    }
    let mu = &group.mu;
    let log_q = |x: &[f64]| -> f64 {
        match proposal {
            SubjectProposal::Mixture { w_prior } => log_add(
                w_prior.ln() + group.population.mvn_log_density(x, mu),
                (1.0 - w_prior).ln() + group.local.mvn_log_density(x, current),
            ),
            SubjectProposal::Fitted(fit) => log_add(
                FITTED_WEIGHT.ln() + fit.factor.mvn_log_density(x, &fit.mean),
                (1.0 - FITTED_WEIGHT).ln() + group.population.mvn_log_density(x, mu),
            ),
        }
    };
    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(particles);
    candidates.push(current.to_vec());
    for _ in 1..particles {
        let u: f64 = rng.random();
        let x = match proposal {
            SubjectProposal::Mixture { w_prior } => {
                if u < w_prior {
                    group.population.sample(mu, rng)
                } else {
                    group.local.sample(current, rng)
                }
            }
            SubjectProposal::Fitted(fit) => {
                if u < FITTED_WEIGHT {
                    fit.factor.sample(&fit.mean, rng)
                } else {
                    group.population.sample(mu, rng)
                }
            }
        };
        candidates.push(x);
    }
    let log_w: Vec<f64> = candidates
        .iter()
        .map(|x| {
            let ll = data.log_likelihood(spec, x);
            if ll == f64::NEG_INFINITY {
                return ll;
            }
            let w = ll + group.population.mvn_log_density(x, mu) - log_q(x);
            if w.is_nan() {
                f64::NEG_INFINITY
            } else {
                w
            }
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let u: f64 = rng.random();
    if max == f64::NEG_INFINITY {
        return ParticleOutcome {
            alpha: current.to_vec(),
            selected: 0,
            degenerate: true,
        };
    }
    let weights: Vec<f64> = log_w.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut selected = particles - 1;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            selected = k;
            break;
        }
    }
    while weights[selected] == 0.0 {
        selected -= 1;
    }
    ParticleOutcome {
        alpha: candidates.swap_remove(selected),
        selected,
        degenerate: false,
    }
}

/// Spec-level wrapper of [`particle_update`] over a [`GroupState`].
#[allow(clippy::too_many_arguments)]
pub fn particle_update_subject<R: Rng + ?Sized>(
    data: &SubjectData,
    spec: &ModelSpec,
    alpha_current: &SubjectEffects,
    gs: &GroupState,
    proposal: SubjectProposal<'_>,
    local_scale: f64,
    particles: usize,
    rng: &mut R,
) -> Result<(SubjectEffects, bool)> {
    let ctx = GroupContext::new(gs, local_scale)?;
    let out = particle_update(data, spec, &alpha_current.alpha, &ctx, proposal, particles, rng);
    Ok((SubjectEffects::new(alpha_current.subject_id.clone(), out.alpha), out.degenerate))
}

/// One stored draw. `sigma` is row-major, `alpha` subject-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub iter: u64,
    pub stage: Stage,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub a: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Draw {
    pub fn sigma_matrix(&self) -> DMatrix<f64> {
        let d = self.mu.len();
        DMatrix::from_row_slice(d, d, &self.sigma)
    }

    pub fn subject_alpha(&self, s: usize) -> &[f64] {
        let d = self.mu.len();
        &self.alpha[s * d..(s + 1) * d]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignCount {
    pub subject: String,
    pub task: String,
    pub cell: String,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHashes {
    pub data: String,
    pub model: String,
    pub config: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub param_names: Vec<String>,
    pub block_labels: Vec<String>,
    pub subjects: Vec<String>,
    pub model: ModelSpec,
    pub config: SamplerConfig,
    pub hyper: Hyperparameters,
    pub hashes: InputHashes,
    pub design: Vec<DesignCount>,
    pub degenerate_updates: u64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorChain {
    pub meta: ChainMeta,
    pub draws: Vec<Draw>,
}

impl PosteriorChain {
    pub fn dim(&self) -> usize {
        self.meta.param_names.len()
    }

    pub fn n_subjects(&self) -> usize {
        self.meta.subjects.len()
    }

    pub fn stage_draws(&self, stage: Stage) -> impl Iterator<Item = &Draw> {
        self.draws.iter().filter(move |d| d.stage == stage)
    }

    /// Draws used for inference: the sampling stage, or every draw if the
    /// chain has no sampling-stage records.
    pub fn inference_draws(&self) -> Vec<&Draw> {
        let s: Vec<&Draw> = self.stage_draws(Stage::Sampling).collect();
        if s.is_empty() {
            self.draws.iter().collect()
        } else {
            s
        }
    }
}

/// Chain state between sweeps.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub group: GroupState,
    pub alphas: Vec<Vec<f64>>,
}

fn tau_centers(spec: &ModelSpec, trials: &[TrialRecord]) -> HashMap<usize, f64> {
    let mut min_rt: HashMap<usize, f64> = HashMap::new();
    for t in trials {
        let Some(idx) = spec.cell_index(&t.task, &t.cell) else { continue };
        if let Some(i) = spec.tau_coordinate(idx) {
            let e = min_rt.entry(i).or_insert(f64::INFINITY);
            *e = e.min(t.rt);
        }
    }
    min_rt.into_iter().map(|(i, m)| (i, (0.5 * m).ln())).collect()
}

/// Initial state: `mu = 0`, `Sigma = I`, `a = 1`, and per subject the first
/// draw from `MVN(center, 0.1 I)` with finite likelihood.
pub fn init_chain(
    subjects: &[(String, Vec<TrialRecord>)],
    prepared: &[SubjectData],
    spec: &ModelSpec,
    cfg: &SamplerConfig,
    hyper: &Hyperparameters,
) -> Result<ChainState> {
    let d = spec.dim();
    let group = GroupState::initial(d, hyper)?;
    let init_factor = Factor::new(&(DMatrix::identity(d, d) * INIT_VARIANCE))?;
    let mut alphas = Vec::with_capacity(prepared.len());
    for ((id, trials), data) in subjects.iter().zip(prepared) {
        let mut center = group.mu.clone();
        if cfg.init == InitCenter::DataTau {
            for (i, c) in tau_centers(spec, trials) {
                center[i] = c;
            }
        }
        let mut rng = rng::stream(cfg.seed, Purpose::Init, rng::subject_key(id), 0);
        let start = (0..MAX_INIT_ATTEMPTS)
            .map(|_| init_factor.sample(&center, &mut rng))
            .find(|x| data.log_likelihood(spec, x).is_finite())
            .ok_or_else(|| Error::Init {
                subject: id.clone(),
                reason: format!("no finite-likelihood start in {MAX_INIT_ATTEMPTS} attempts"),
            })?;
        alphas.push(start);
    }
    Ok(ChainState { group, alphas })
}

/// Draws `mu`, `Sigma`, `a` in turn.
pub fn update_group(state: &mut ChainState, rng: &mut Stream) -> Result<()> {
    let g = &mut state.group;
    g.mu = hierarchy::sample_mu(&state.alphas, &g.sigma, rng)?;
    g.sigma = hierarchy::sample_sigma(&state.alphas, &g.mu, &g.a, g.nu, rng)?;
    g.a = hierarchy::sample_a(&g.sigma, g.nu, &g.a_scale, rng)?;
    Ok(())
}

/// Particle Metropolis-within-Gibbs driver.
pub struct Sampler<'a> {
    spec: &'a ModelSpec,
    cfg: SamplerConfig,
    hyper: Hyperparameters,
}

impl<'a> Sampler<'a> {
    pub fn new(spec: &'a ModelSpec, cfg: SamplerConfig) -> Self {
        Self {
            spec,
            cfg,
            hyper: Hyperparameters::default(),
        }
    }

    pub fn with_hyper(mut self, hyper: Hyperparameters) -> Self {
        self.hyper = hyper;
        self
    }

    pub fn run(&self, data: &[TrialRecord]) -> Result<PosteriorChain> {
        let spec = self.spec;
        let cfg = &self.cfg;
        cfg.validate()?;
        self.hyper.scales(spec.dim())?;
        validate_spec(spec, data).check()?;
        let subjects = group_by_subject(data);
        if subjects.is_empty() {
            return Err(invalid("no trials"));
        }
        let prepared = subjects
            .iter()
            .map(|(id, trials)| SubjectData::new(id.clone(), trials, spec))
            .collect::<Result<Vec<_>>>()?;
        let keys: Vec<u64> = subjects.iter().map(|(id, _)| rng::subject_key(id)).collect();
        let mut state = init_chain(&subjects, &prepared, spec, cfg, &self.hyper)?;

        let pool = if cfg.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build()
                    .map_err(|e| invalid(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };

        let mut meta = ChainMeta {
            param_names: spec.param_names().to_vec(),
            block_labels: spec.block_labels(),
            subjects: subjects.iter().map(|(id, _)| id.clone()).collect(),
            model: spec.clone(),
            config: cfg.clone(),
            hyper: self.hyper.clone(),
            hashes: InputHashes::default(),
            design: design_counts(spec, &subjects),
            degenerate_updates: 0,
            warnings: Vec::new(),
        };
        let mut draws = Vec::new();
        let mut history: Vec<Vec<Vec<f64>>> = vec![Vec::new(); subjects.len()];
        let mut unique = vec![0usize; subjects.len()];
        let mut fitted: Vec<Option<FittedProposal>> = vec![None; subjects.len()];
        let mut iter: u64 = 0;
        let w_prior = cfg.mixture_weights.0;

        for stage in Stage::ALL {
            let particles = cfg.particles_per_stage.get(stage);
            let sweeps = cfg.draws_per_stage.get(stage) * cfg.thin;
            for k in 0..sweeps {
                iter += 1;
                let mut group_rng = rng::stream(cfg.seed, Purpose::Group, iter, 0);
                update_group(&mut state, &mut group_rng)?;
                let ctx = GroupContext::new(&state.group, cfg.local_scale)?;
                let update = |s: usize| {
                    let proposal = match (stage, &fitted[s]) {
                        (Stage::Sampling, Some(fit)) => SubjectProposal::Fitted(fit),
                        _ => SubjectProposal::Mixture { w_prior },
                    };
                    let mut rng = rng::stream(cfg.seed, Purpose::Subject, keys[s], iter);
                    particle_update(&prepared[s], spec, &state.alphas[s], &ctx, proposal, particles, &mut rng)
                };
                let outcomes: Vec<ParticleOutcome> = match &pool {
                    Some(pool) => pool.install(|| (0..prepared.len()).into_par_iter().map(update).collect()),
                    None => (0..prepared.len()).map(update).collect(),
                };
                for (s, out) in outcomes.into_iter().enumerate() {
                    if out.degenerate {
                        meta.degenerate_updates += 1;
                    }
                    if stage == Stage::Adaptation {
                        if out.selected != 0 {
                            unique[s] += 1;
                        }
                        history[s].push(out.alpha.clone());
                    }
                    state.alphas[s] = out.alpha;
                }
                if (k + 1) % cfg.thin == 0 {
                    draws.push(snapshot(iter, stage, &state));
                }
            }
            if stage == Stage::Adaptation {
                for s in 0..prepared.len() {
                    let id = &subjects[s].0;
                    if unique[s] + 1 < MIN_UNIQUE_FOR_FIT {
                        let msg = format!(
                            "subject {id}: only {} unique adaptation draws; keeping the mixture proposal",
                            unique[s] + 1
                        );
                        log::warn!("{msg}");
                        meta.warnings.push(msg);
                        continue;
                    }
                    match FittedProposal::fit(&history[s]) {
                        Ok(fit) => fitted[s] = Some(fit),
                        Err(e) => {
                            let msg = format!("subject {id}: proposal fit failed ({e}); keeping the mixture proposal");
                            log::warn!("{msg}");
                            meta.warnings.push(msg);
                        }
                    }
                }
                history.clear();
            }
        }
        Ok(PosteriorChain { meta, draws })
    }
}

fn snapshot(iter: u64, stage: Stage, state: &ChainState) -> Draw {
    let g = &state.group;
    let d = g.dim();
    let mut sigma = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            sigma.push(g.sigma[(i, j)]);
        }
    }
    Draw {
        iter,
        stage,
        mu: g.mu.clone(),
        sigma,
        a: g.a.clone(),
        alpha: state.alphas.concat(),
    }
}

fn design_counts(spec: &ModelSpec, subjects: &[(String, Vec<TrialRecord>)]) -> Vec<DesignCount> {
    let mut out = Vec::new();
    for (id, trials) in subjects {
        let mut counts: Vec<(CellIndex, usize)> = Vec::new();
        for t in trials {
            if let Some(idx) = spec.cell_index(&t.task, &t.cell) {
                match counts.iter_mut().find(|(c, _)| *c == idx) {
                    Some((_, n)) => *n += 1,
                    None => counts.push((idx, 1)),
                }
            }
        }
        counts.sort();
        for (idx, n) in counts {
            let (task, cell) = spec.cell_name(idx);
            out.push(DesignCount {
                subject: id.clone(),
                task: task.to_string(),
                cell: cell.to_string(),
                n,
            });
        }
    }
    out
}

/// Fit with default hyperparameters.
pub fn run_chain(data: &[TrialRecord], spec: &ModelSpec, cfg: &SamplerConfig) -> Result<PosteriorChain> {
    Sampler::new(spec, cfg.clone()).run(data)
}
