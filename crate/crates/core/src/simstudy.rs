//! Parameter-recovery harness: generate hierarchical data under a chosen
//! covariance regime, refit, and score the recovered covariance elements.

use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::{mean_sd, quantile_sorted};
use crate::design::{ModelDocument, ModelSpec, SubjectEffects};
use crate::error::{invalid, Error, Result};
use crate::fixtures;
use crate::hierarchy::{GroupState, Hyperparameters};
use crate::lba::{simulate_trial, TrialRecord};
use crate::linalg::{min_eigenvalue, Factor};
use crate::rng::{self, Purpose};
use crate::sampler::{PosteriorChain, SamplerConfig, StageCounts};

/// Covariance regime used to generate data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Version {
    /// The base covariance as given.
    #[default]
    Matched,
    /// Covariances between coordinates of different blocks set to zero.
    ZeroBetween,
    /// Every correlation set to `target_r`, variances kept.
    UniformR,
}

impl Version {
    pub const ALL: [Version; 3] = [Version::Matched, Version::ZeroBetween, Version::UniformR];

    pub fn as_str(self) -> &'static str {
        match self {
            Version::Matched => "matched",
            Version::ZeroBetween => "zero_between",
            Version::UniformR => "uniform_r",
        }
    }
}

impl FromStr for Version {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Version::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown version {s:?}")))
    }
}

/// A generating group state with `a = 1` and default hyperparameters.
pub fn generator_state(mu: Vec<f64>, sigma: DMatrix<f64>) -> Result<GroupState> {
    let d = mu.len();
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(invalid("generator mean and covariance dimensions differ"));
    }
    let hyper = Hyperparameters::default();
    let gs = GroupState {
        mu,
        sigma,
        a: vec![1.0; d],
        nu: hyper.nu,
        a_scale: hyper.scales(d)?,
    };
    Factor::new(&gs.sigma)?;
    Ok(gs)
}

/// Applies a covariance regime to `base`; `blocks[d]` labels the block of
/// coordinate `d`.
pub fn build_generator(version: Version, base: &GroupState, target_r: f64, blocks: &[usize]) -> Result<GroupState> {
    let d = base.dim();
    if blocks.len() != d {
        return Err(invalid(format!("{} block labels for {d} coordinates", blocks.len())));
    }
    if !crate::linalg::is_positive_definite(&base.sigma) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eigenvalue(&base.sigma),
        });
    }
    let s = &base.sigma;
    let sigma = match version {
        Version::Matched => s.clone(),
        Version::ZeroBetween => DMatrix::from_fn(d, d, |i, j| if blocks[i] == blocks[j] { s[(i, j)] } else { 0.0 }),
        Version::UniformR => DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                s[(i, i)]
            } else {
                target_r * (s[(i, i)] * s[(j, j)]).sqrt()
            }
        }),
    };
    if sigma.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eigenvalue(&sigma),
        });
    }
    let mut out = base.clone();
    out.sigma = sigma;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimDesign {
    pub subjects: usize,
    pub trials_per_task: usize,
    pub generator: GroupState,
    pub version: Version,
    pub target_r: f64,
    pub seed: u64,
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        if self.subjects < 2 {
            return Err(invalid("a simulation needs at least two subjects"));
        }
        if self.trials_per_task == 0 {
            return Err(invalid("trials_per_task must be >= 1"));
        }
        Factor::new(&self.generator.sigma)?;
        Ok(())
    }
}

/// Trials per `(task, cell)`.
pub type CellPlan = Vec<(String, String, usize)>;

/// Splits `n` trials per task as evenly as possible over the task's
/// cells, earlier cells taking any remainder.
pub fn even_plan(spec: &ModelSpec, trials_per_task: usize) -> CellPlan {
    let mut plan = Vec::new();
    for task in &spec.document().tasks {
        let k = task.cells.len();
        for (i, cell) in task.cells.keys().enumerate() {
            let n = trials_per_task / k + usize::from(i < trials_per_task % k);
            plan.push((task.name.clone(), cell.clone(), n));
        }
    }
    plan
}

pub fn subject_id(s: usize) -> String {
    format!("s{:03}", s + 1)
}

/// Simulates `plan` for one subject at log-scale effects `alpha`.
pub fn simulate_subject(spec: &ModelSpec, id: &str, alpha: &[f64], plan: &CellPlan, seed: u64) -> Result<Vec<TrialRecord>> {
    let mut r = rng::stream(seed, Purpose::Generate, rng::subject_key(id), 1);
    let fx = SubjectEffects::new(id, alpha.to_vec());
    let mut out = Vec::new();
    for (task, cell, n) in plan {
        let params = crate::design::resolve(spec, task, cell, &fx)?;
        for _ in 0..*n {
            let (response, rt) = simulate_trial(&params, &mut r)?;
            out.push(TrialRecord {
                subject: id.to_string(),
                task: task.clone(),
                cell: cell.clone(),
                response,
                rt,
            });
        }
    }
    Ok(out)
}

/// Draws `alpha_s ~ MVN(mu, Sigma)` for every subject and simulates the
/// plan for each. Deterministic given `design.seed`.
pub fn generate_dataset(design: &SimDesign, spec: &ModelSpec, plan: &CellPlan) -> Result<(Vec<TrialRecord>, Vec<SubjectEffects>)> {
    design.validate()?;
    if design.generator.dim() != spec.dim() {
        return Err(invalid(format!("generator has {} coordinates, model has {}", design.generator.dim(), spec.dim())));
    }
    let factor = Factor::new(&design.generator.sigma)?;
    let mut data = Vec::new();
    let mut truth = Vec::with_capacity(design.subjects);
    for s in 0..design.subjects {
        let id = subject_id(s);
        let mut r = rng::stream(design.seed, Purpose::Generate, rng::subject_key(&id), 0);
        let alpha = factor.sample(&design.generator.mu, &mut r);
        data.extend(simulate_subject(spec, &id, &alpha, plan, design.seed)?);
        truth.push(SubjectEffects::new(id, alpha));
    }
    Ok((data, truth))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub element: String,
    pub kind: String,
    pub generating: f64,
    pub posterior_mean: f64,
    pub lo95: f64,
    pub hi95: f64,
    pub covers: bool,
    pub excludes_zero: bool,
}

impl RecoveryRow {
    pub fn is_between(&self) -> bool {
        self.kind == "between"
    }

    pub fn contains_zero(&self) -> bool {
        !self.excludes_zero
    }
}

/// Scores every lower-triangle covariance element (diagonal included)
/// against the generating covariance with equal-tailed 95% intervals.
pub fn score_recovery(chain: &PosteriorChain, generating: &DMatrix<f64>, blocks: &[usize]) -> Result<Vec<RecoveryRow>> {
    let d = chain.dim();
    if generating.nrows() != d || blocks.len() != d {
        return Err(invalid("generating covariance does not match the chain"));
    }
    let draws = chain.inference_draws();
    if draws.is_empty() {
        return Err(invalid("chain has no draws"));
    }
    let names = &chain.meta.param_names;
    let mut rows = Vec::new();
    for i in 0..d {
        for j in 0..=i {
            let mut v: Vec<f64> = draws.iter().map(|dr| dr.sigma[i * d + j]).collect();
            let (posterior_mean, _) = mean_sd(&v);
            v.sort_by(f64::total_cmp);
            let lo95 = quantile_sorted(&v, 0.025);
            let hi95 = quantile_sorted(&v, 0.975);
            let g = generating[(i, j)];
            let kind = if i == j {
                "variance"
            } else if blocks[i] == blocks[j] {
                "within"
            } else {
                "between"
            };
            rows.push(RecoveryRow {
                element: format!("{}~{}", names[i], names[j]),
                kind: kind.to_string(),
                generating: g,
                posterior_mean,
                lo95,
                hi95,
                covers: lo95 <= g && g <= hi95,
                excludes_zero: lo95 > 0.0 || hi95 < 0.0,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTally {
    pub version: Version,
    pub elements: usize,
    pub covered: usize,
    pub between: usize,
    pub between_containing_zero: usize,
    pub between_excluding_zero: usize,
}

pub fn tally(version: Version, rows: &[RecoveryRow]) -> RecoveryTally {
    let between: Vec<&RecoveryRow> = rows.iter().filter(|r| r.is_between()).collect();
    RecoveryTally {
        version,
        elements: rows.len(),
        covered: rows.iter().filter(|r| r.covers).count(),
        between: between.len(),
        between_containing_zero: between.iter().filter(|r| r.contains_zero()).count(),
        between_excluding_zero: between.iter().filter(|r| r.excludes_zero).count(),
    }
}

/// Study size presets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// D = 6, S = 40, n = 250.
    #[default]
    Desk,
    /// D = 14, S = 100, n = 1000.
    Full,
}

/// Log-normal generator for the two-session design from reference natural
/// scale means and posterior-mean correlations.
pub fn reference_generator(scale: Scale) -> Result<(ModelSpec, GroupState)> {
    let corr = fixtures::application1_correlations();
    match scale {
        Scale::Desk => {
            let idx = fixtures::DESK_COORDINATES;
            let all = fixtures::application1_log_sds();
            let sd: Vec<f64> = idx.iter().map(|&i| all[i]).collect();
            let mu = idx.iter().map(|&i| fixtures::APPLICATION1_GROUP_MEANS[i].ln()).collect();
            let sigma = DMatrix::from_fn(6, 6, |i, j| corr[(idx[i], idx[j])] * sd[i] * sd[j]);
            Ok((fixtures::desk_model(), generator_state(mu, sigma)?))
        }
        Scale::Full => {
            let sd = fixtures::application1_log_sds();
            let mu = fixtures::APPLICATION1_GROUP_MEANS.iter().map(|m| m.ln()).collect();
            let sigma = DMatrix::from_fn(14, 14, |i, j| corr[(i, j)] * sd[i] * sd[j]);
            Ok((fixtures::application1(), generator_state(mu, sigma)?))
        }
    }
}

/// Explicit log-scale generator: means, SDs and a correlation matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub mu: Vec<f64>,
    pub sd: Vec<f64>,
    pub corr: Vec<Vec<f64>>,
}

impl GeneratorSpec {
    pub fn to_state(&self) -> Result<GroupState> {
        let d = self.mu.len();
        if self.sd.len() != d || self.corr.len() != d || self.corr.iter().any(|r| r.len() != d) {
            return Err(invalid("generator mu, sd and corr dimensions differ"));
        }
        let sigma = DMatrix::from_fn(d, d, |i, j| self.corr[i][j] * self.sd[i] * self.sd[j]);
        generator_state(self.mu.clone(), sigma)
    }
}

/// Sampler settings sized for the desk-scale study.
pub fn desk_sampler() -> SamplerConfig {
    SamplerConfig {
        particles_per_stage: StageCounts::new(30, 30, 15),
        draws_per_stage: StageCounts::new(300, 300, 1500),
        ..SamplerConfig::default()
    }
}

/// Contents of a study design file. Unset fields fall back to the preset
/// for `scale`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub scale: Scale,
    pub subjects: Option<usize>,
    pub trials_per_task: Option<usize>,
    pub version: Version,
    pub target_r: Option<f64>,
    pub seed: u64,
    pub model: Option<ModelDocument>,
    pub generator: Option<GeneratorSpec>,
    pub sampler: Option<SamplerConfig>,
}

/// A fully resolved study: model, design and sampler settings.
#[derive(Clone, Debug)]
pub struct Study {
    pub spec: ModelSpec,
    pub design: SimDesign,
    pub plan: CellPlan,
    pub sampler: SamplerConfig,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves the configuration for one covariance regime.
    pub fn resolve(&self, version: Version) -> Result<Study> {
        let (preset_spec, preset_gen) = reference_generator(self.scale)?;
        let (default_s, default_n) = match self.scale {
            Scale::Desk => (40, 250),
            Scale::Full => (100, 1000),
        };
        let spec = match &self.model {
            Some(doc) => ModelSpec::new(doc.clone())?,
            None => preset_spec,
        };
        let base = match &self.generator {
            Some(g) => g.to_state()?,
            None if self.model.is_none() => preset_gen,
            None => return Err(invalid("a custom model needs an explicit generator")),
        };
        if base.dim() != spec.dim() {
            return Err(invalid(format!("generator has {} coordinates, model has {}", base.dim(), spec.dim())));
        }
        let target_r = self.target_r.unwrap_or(0.8);
        let generator = build_generator(version, &base, target_r, spec.blocks())?;
        let design = SimDesign {
            subjects: self.subjects.unwrap_or(default_s),
            trials_per_task: self.trials_per_task.unwrap_or(default_n),
            generator,
            version,
            target_r,
            seed: self.seed,
        };
        design.validate()?;
        let plan = even_plan(&spec, design.trials_per_task);
        let mut sampler = self.sampler.clone().unwrap_or_else(desk_sampler);
        sampler.seed = self.seed;
        Ok(Study {
            spec,
            design,
            plan,
            sampler,
        })
    }
}

/// Generates, refits and scores one regime.
pub fn run_recovery(study: &Study) -> Result<(PosteriorChain, Vec<RecoveryRow>)> {
    let (data, _) = generate_dataset(&study.design, &study.spec, &study.plan)?;
    let chain = crate::sampler::run_chain(&data, &study.spec, &study.sampler)?;
    let rows = score_recovery(&chain, &study.design.generator.sigma, study.spec.blocks())?;
    Ok((chain, rows))
}
