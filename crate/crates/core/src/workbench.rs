//! Command implementations behind the `accjoint` binary: configuration,
//! artifact writing and the machine-readable error vocabulary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{self, CorrelationSummary};
use crate::chain::{self, sha256_hex};
use crate::design::{self, ModelSpec};
use crate::error::Error;
use crate::hierarchy::Hyperparameters;
use crate::lba::TrialRecord;
use crate::sampler::{PosteriorChain, Sampler, SamplerConfig};
use crate::simstudy::{self, StudyConfig, Version};
use crate::svg;

pub const SEED_ENV: &str = "ACCJOINT_SEED";

/// Failure of a command, reported on stderr as
/// `{"error": {"code": ..., "message": ...}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.code {
            "E_DATA_NOT_FOUND" | "E_MODEL_NOT_FOUND" | "E_CONFIG_NOT_FOUND" | "E_CHAIN_NOT_FOUND" | "E_DESIGN_NOT_FOUND" => 2,
            "E_CONFIG" | "E_MODEL" | "E_INVALID_INPUT" | "E_VALIDATION" => 3,
            "E_INIT" | "E_NUMERICAL" | "E_NOT_PD" => 4,
            _ => 5,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) => "E_INVALID_INPUT",
            Error::Config(_) => "E_VALIDATION",
            Error::Numerical(_) => "E_NUMERICAL",
            Error::Init { .. } => "E_INIT",
            Error::NotPositiveDefinite { .. } => "E_NOT_PD",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_CONFIG",
            Error::Csv(_) => "E_DATA",
        };
        CliError::new(code, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn require(path: &Path, code: &'static str, what: &str) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::new(code, format!("{what} {}: {e}", path.display())))
}

fn out_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::new("E_IO", format!("output directory {}: {e}", path.display())))
}

/// Seed precedence: explicit flag, then `ACCJOINT_SEED`, then the config.
pub fn effective_seed(flag: Option<u64>, config: u64) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::new("E_CONFIG", format!("{SEED_ENV}={v:?} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(config),
    }
}

/// Contents of `fit.json`. Paths given on the command line take
/// precedence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub sampler: SamplerConfig,
    pub hyper: Hyperparameters,
    pub heatmap: bool,
    pub predictive_draws: usize,
    /// Chains of separate fits compared against the joint fit.
    pub compare_chains: Vec<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            data: None,
            model: None,
            out: None,
            sampler: SamplerConfig::default(),
            hyper: Hyperparameters::default(),
            heatmap: true,
            predictive_draws: 0,
            compare_chains: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct FitArgs {
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Writes the standard summaries of a chain into `dir`.
pub fn write_summaries(chain: &PosteriorChain, dir: &Path, heatmap: bool) -> CliResult<Option<CorrelationSummary>> {
    analysis::write_table(dir.join("group_means.csv"), &analysis::group_mean_table(chain))?;
    analysis::write_table(dir.join("subject_effects.csv"), &analysis::subject_effect_points(chain))?;
    let summary = if chain.dim() > 0 && !chain.draws.is_empty() {
        let s = analysis::correlation_summary(chain)?;
        analysis::write_table(dir.join("correlation_summary.csv"), &s.rows())?;
        if heatmap {
            chain::write_atomic(dir.join("heatmap.svg"), svg::emit_heatmap(&s, None).as_bytes())?;
        }
        Some(s)
    } else {
        None
    };
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictiveRow {
    pub draw: usize,
    pub iter: u64,
    pub subject: String,
    pub task: String,
    pub cell: String,
    pub response: usize,
    pub rt: f64,
}

fn write_predictive(chain: &PosteriorChain, draws: usize, seed: u64, path: &Path) -> CliResult<usize> {
    let sets = analysis::posterior_predictive(chain, &chain.meta.design, draws, seed)?;
    let rows: Vec<PredictiveRow> = sets
        .iter()
        .flat_map(|s| {
            s.trials.iter().map(move |t| PredictiveRow {
                draw: s.draw_index,
                iter: s.iter,
                subject: t.subject.clone(),
                task: t.task.clone(),
                cell: t.cell.clone(),
                response: t.response,
                rt: t.rt,
            })
        })
        .collect();
    analysis::write_table(path, &rows)?;
    Ok(sets.len())
}

fn load_chain(path: &Path) -> CliResult<PosteriorChain> {
    if !path.exists() {
        return Err(CliError::new("E_CHAIN_NOT_FOUND", format!("chain {} not found", path.display())));
    }
    Ok(chain::load(path)?)
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<PosteriorChain> {
    let (cfg, config_bytes) = match &args.config {
        Some(p) => {
            let bytes = require(p, "E_CONFIG_NOT_FOUND", "config")?;
            let cfg: FitConfig = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::new("E_CONFIG", format!("config {}: {e}", p.display())))?;
            (cfg, bytes)
        }
        None => {
            let cfg = FitConfig::default();
            let bytes = serde_json::to_vec(&cfg).expect("config serializes");
            (cfg, bytes)
        }
    };
    let data_path = args
        .data
        .clone()
        .or(cfg.data.clone())
        .ok_or_else(|| CliError::new("E_DATA_NOT_FOUND", "no data file given"))?;
    let model_path = args
        .model
        .clone()
        .or(cfg.model.clone())
        .ok_or_else(|| CliError::new("E_MODEL_NOT_FOUND", "no model file given"))?;
    let out = args
        .out
        .clone()
        .or(cfg.out.clone())
        .ok_or_else(|| CliError::new("E_CONFIG", "no output directory given"))?;
    let data_bytes = require(&data_path, "E_DATA_NOT_FOUND", "data file")?;
    let model_bytes = require(&model_path, "E_MODEL_NOT_FOUND", "model file")?;
    let trials: Vec<TrialRecord> =
        design::read_trials_from(&data_bytes[..]).map_err(|e| CliError::new("E_DATA", e.to_string()))?;
    let text = String::from_utf8_lossy(&model_bytes);
    let spec = ModelSpec::from_json(&text).map_err(|e| CliError::new("E_MODEL", e.to_string()))?;
    let report = design::validate_spec(&spec, &trials);
    if !report.is_ok() {
        let detail = serde_json::to_string(&report).unwrap_or_default();
        return Err(CliError::new("E_VALIDATION", format!("data do not match the model: {detail}")));
    }

    let mut sampler = cfg.sampler.clone();
    sampler.seed = effective_seed(args.seed, sampler.seed)?;
    if let Some(w) = args.workers {
        sampler.workers = w;
    }
    out_dir(&out)?;
    let mut chain = Sampler::new(&spec, sampler.clone()).with_hyper(cfg.hyper.clone()).run(&trials)?;
    chain.meta.hashes.data = sha256_hex(&data_bytes);
    chain.meta.hashes.model = sha256_hex(&model_bytes);
    chain.meta.hashes.config = sha256_hex(&config_bytes);
    chain::save(&out, &chain)?;
    write_summaries(&chain, &out, cfg.heatmap)?;
    if cfg.predictive_draws > 0 {
        write_predictive(&chain, cfg.predictive_draws, sampler.seed, &out.join("predictive.csv"))?;
    }
    if !cfg.compare_chains.is_empty() {
        let others = cfg
            .compare_chains
            .iter()
            .map(|p| load_chain(p))
            .collect::<CliResult<Vec<_>>>()?;
        let report = analysis::precision_compare(&chain, &others)?;
        analysis::write_table(out.join("precision.csv"), &report.rows)?;
        analysis::write_table(out.join("precision_blocks.csv"), &report.blocks)?;
    }
    Ok(chain)
}

pub fn cmd_summarize(chain_path: &Path, out: &Path, heatmap: bool) -> CliResult<()> {
    let chain = load_chain(chain_path)?;
    out_dir(out)?;
    write_summaries(&chain, out, heatmap)?;
    Ok(())
}

pub fn cmd_predict(chain_path: &Path, draws: usize, out: &Path, seed: Option<u64>) -> CliResult<usize> {
    let chain = load_chain(chain_path)?;
    let seed = effective_seed(seed, chain.meta.config.seed)?;
    out_dir(out)?;
    write_predictive(&chain, draws, seed, &out.join("predictive.csv"))
}

fn load_study(path: &Path) -> CliResult<StudyConfig> {
    let bytes = require(path, "E_DESIGN_NOT_FOUND", "design file")?;
    let mut cfg: StudyConfig =
        serde_json::from_slice(&bytes).map_err(|e| CliError::new("E_CONFIG", format!("design {}: {e}", path.display())))?;
    cfg.seed = effective_seed(None, cfg.seed)?;
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub subject: String,
    pub param: String,
    pub alpha: f64,
}

#[derive(Serialize)]
struct GeneratorFile<'a> {
    version: Version,
    mu: &'a [f64],
    sigma: Vec<Vec<f64>>,
}

fn write_generator(study: &simstudy::Study, out: &Path) -> CliResult<()> {
    let g = &study.design.generator;
    let d = g.dim();
    let file = GeneratorFile {
        version: study.design.version,
        mu: &g.mu,
        sigma: (0..d).map(|i| (0..d).map(|j| g.sigma[(i, j)]).collect()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(Error::from)?;
    text.push('\n');
    chain::write_atomic(out.join("generator.json"), text.as_bytes())?;
    let mut model = study.spec.to_json();
    model.push('\n');
    chain::write_atomic(out.join("model.json"), model.as_bytes())?;
    Ok(())
}

/// Generates a dataset; writes `trials.csv`, `truth.csv`, `model.json` and
/// `generator.json`.
pub fn cmd_simulate(design_path: &Path, out: &Path, version: Option<Version>) -> CliResult<usize> {
    let cfg = load_study(design_path)?;
    let study = cfg.resolve(version.unwrap_or(cfg.version))?;
    let (data, truth) = simstudy::generate_dataset(&study.design, &study.spec, &study.plan)?;
    out_dir(out)?;
    let mut csv = Vec::new();
    design::write_trials_to(&mut csv, &data)?;
    chain::write_atomic(out.join("trials.csv"), &csv)?;
    let rows: Vec<TruthRow> = truth
        .iter()
        .flat_map(|t| {
            t.alpha.iter().zip(study.spec.param_names()).map(move |(a, p)| TruthRow {
                subject: t.subject_id.clone(),
                param: p.clone(),
                alpha: *a,
            })
        })
        .collect();
    analysis::write_table(out.join("truth.csv"), &rows)?;
    write_generator(&study, out)?;
    Ok(data.len())
}

/// Simulate, fit and score one covariance regime; writes the chain,
/// `recovery_report.csv` and `recovery_plot.svg`.
pub fn cmd_recover(design_path: &Path, version: Version, out: &Path) -> CliResult<simstudy::RecoveryTally> {
    let cfg = load_study(design_path)?;
    let study = cfg.resolve(version)?;
    out_dir(out)?;
    let (mut chain, rows) = simstudy::run_recovery(&study)?;
    chain.meta.hashes.config = sha256_hex(&fs::read(design_path).map_err(Error::from)?);
    chain::save(out, &chain)?;
    write_generator(&study, out)?;
    analysis::write_table(out.join("recovery_report.csv"), &rows)?;
    chain::write_atomic(out.join("recovery_plot.svg"), svg::emit_recovery_plot(&rows).as_bytes())?;
    let tally = simstudy::tally(version, &rows);
    let mut text = serde_json::to_string_pretty(&tally).map_err(Error::from)?;
    text.push('\n');
    chain::write_atomic(out.join("recovery_tally.json"), text.as_bytes())?;
    Ok(tally)
}

/// Column names of a foreign trial table, for data exported by other tools.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    pub subject: String,
    pub task: String,
    pub cell: String,
    pub response: String,
    pub rt: String,
    /// Multiplier taking the rt column to seconds (0.001 for milliseconds).
    pub rt_scale: f64,
    /// Recodes response labels to accumulator indices; identity if empty.
    pub responses: BTreeMap<String, usize>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            subject: "subject".into(),
            task: "task".into(),
            cell: "cell".into(),
            response: "response".into(),
            rt: "rt".into(),
            rt_scale: 1.0,
            responses: BTreeMap::new(),
        }
    }
}

/// Reads a CSV with arbitrary column names into trial records.
pub fn read_mapped_trials(path: &Path, map: &ColumnMap) -> crate::Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| crate::error::invalid(format!("column {name:?} not found")))
    };
    let (cs, ct, cc, cr, crt) = (col(&map.subject)?, col(&map.task)?, col(&map.cell)?, col(&map.response)?, col(&map.rt)?);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let raw = rec[cr].trim();
        let response = match map.responses.get(raw) {
            Some(&k) => k,
            None => raw
                .parse()
                .map_err(|_| crate::error::invalid(format!("line {line}: response {raw:?} is not mapped")))?,
        };
        let rt: f64 = rec[crt]
            .trim()
            .parse()
            .map_err(|_| crate::error::invalid(format!("line {line}: bad rt {:?}", &rec[crt])))?;
        out.push(TrialRecord {
            subject: rec[cs].trim().to_string(),
            task: rec[ct].trim().to_string(),
            cell: rec[cc].trim().to_string(),
            response,
            rt: rt * map.rt_scale,
        });
    }
    Ok(out)
}
