//! Declarative mapping from experimental design cells to named parameters.
//!
//! A [`ModelSpec`] lists, per task, the parameter names it owns and for every
//! cell the per-accumulator assignment of threshold gap (`b`), start-point
//! range (`A`), drift (`v`) and non-decision time (`tau`). A reference is
//! either the name of a coordinate of the subject vector (natural value
//! `exp(alpha[name])`) or a fixed natural-scale number.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{config, invalid, Error, Result};
use crate::lba::{AccumulatorParams, TrialRecord};

/// A parameter reference: a named coordinate or a fixed natural-scale value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamRef {
    Named(String),
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulatorMap {
    pub b: ParamRef,
    #[serde(rename = "A")]
    pub a: ParamRef,
    pub v: ParamRef,
    pub tau: ParamRef,
    /// Whether this accumulator matches the stimulus (a correct response).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub accumulators: Vec<AccumulatorMap>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskBlock {
    pub name: String,
    pub params: Vec<String>,
    pub cells: BTreeMap<String, CellSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub tasks: Vec<TaskBlock>,
    pub vector_order: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Slot {
    Index(usize),
    Fixed(f64),
}

impl Slot {
    #[inline]
    fn value(self, alpha: &[f64]) -> f64 {
        match self {
            Slot::Index(i) => alpha[i].exp(),
            Slot::Fixed(x) => x,
        }
    }
}

#[derive(Clone, Debug)]
struct CompiledAcc {
    b: Slot,
    a: Slot,
    v: Slot,
    tau: Slot,
}

#[derive(Clone, Debug)]
struct CompiledCell {
    task: String,
    name: String,
    accs: Vec<CompiledAcc>,
    correct: Option<usize>,
}

/// Dense index of a (task, cell) pair within a [`ModelSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex(pub usize);

/// Validated model specification. Immutable once built.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ModelDocument", into = "ModelDocument")]
pub struct ModelSpec {
    doc: ModelDocument,
    index: HashMap<String, usize>,
    block: Vec<usize>,
    cells: Vec<CompiledCell>,
    lookup: HashMap<(String, String), CellIndex>,
}

impl From<ModelSpec> for ModelDocument {
    fn from(spec: ModelSpec) -> Self {
        spec.doc
    }
}

impl TryFrom<ModelDocument> for ModelSpec {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        ModelSpec::new(doc)
    }
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.doc == other.doc
    }
}

fn check_fixed(kind: &str, x: f64) -> Result<()> {
    let ok = x.is_finite()
        && match kind {
            "b" => x > 0.0,
            "v" => x > crate::lba::MIN_DRIFT_Z * crate::lba::DRIFT_SD,
            _ => x >= 0.0,
        };
    if ok {
        Ok(())
    } else {
        Err(config(format!("invalid fixed value {x} for {kind}")))
    }
}

impl ModelSpec {
    pub fn new(doc: ModelDocument) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, name) in doc.vector_order.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(config(format!("parameter {name:?} repeated in vector_order")));
            }
        }
        if index.is_empty() {
            return Err(config("vector_order is empty"));
        }
        let mut block = vec![usize::MAX; index.len()];
        let mut task_names = BTreeSet::new();
        let mut cells = Vec::new();
        let mut lookup = HashMap::new();
        for (ti, task) in doc.tasks.iter().enumerate() {
            if !task_names.insert(task.name.clone()) {
                return Err(config(format!("task {:?} declared twice", task.name)));
            }
            if task.cells.is_empty() {
                return Err(config(format!("task {:?} has no cells", task.name)));
            }
            for name in &task.params {
                let &i = index
                    .get(name)
                    .ok_or_else(|| config(format!("parameter {name:?} of task {:?} missing from vector_order", task.name)))?;
                if block[i] != usize::MAX {
                    return Err(config(format!("parameter {name:?} owned by more than one task")));
                }
                block[i] = ti;
            }
            let owned: BTreeSet<&String> = task.params.iter().collect();
            for (cell_name, cell) in &task.cells {
                let where_ = format!("{}/{}", task.name, cell_name);
                if cell.accumulators.len() < 2 {
                    return Err(config(format!("cell {where_} needs at least two accumulators")));
                }
                let slot = |kind: &str, r: &ParamRef| -> Result<Slot> {
                    match r {
                        ParamRef::Named(n) => {
                            if !owned.contains(n) {
                                return Err(config(format!("cell {where_} references {n:?}, not a parameter of its task")));
                            }
                            Ok(Slot::Index(index[n]))
                        }
                        ParamRef::Fixed(x) => {
                            check_fixed(kind, *x)?;
                            Ok(Slot::Fixed(*x))
                        }
                    }
                };
                let mut accs = Vec::with_capacity(cell.accumulators.len());
                for acc in &cell.accumulators {
                    accs.push(CompiledAcc {
                        b: slot("b", &acc.b)?,
                        a: slot("A", &acc.a)?,
                        v: slot("v", &acc.v)?,
                        tau: slot("tau", &acc.tau)?,
                    });
                }
                if accs.iter().any(|a| a.tau != accs[0].tau) {
                    return Err(config(format!("accumulators of cell {where_} must share one tau")));
                }
                let tagged: Vec<usize> = cell
                    .accumulators
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.correct == Some(true))
                    .map(|(k, _)| k)
                    .collect();
                if tagged.len() > 1 {
                    return Err(config(format!("cell {where_} tags more than one correct accumulator")));
                }
                lookup.insert((task.name.clone(), cell_name.clone()), CellIndex(cells.len()));
                cells.push(CompiledCell {
                    task: task.name.clone(),
                    name: cell_name.clone(),
                    accs,
                    correct: tagged.first().copied(),
                });
            }
        }
        if let Some(i) = block.iter().position(|&b| b == usize::MAX) {
            return Err(config(format!(
                "parameter {:?} in vector_order is not owned by any task",
                doc.vector_order[i]
            )));
        }
        Ok(Self {
            doc,
            index,
            block,
            cells,
            lookup,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("model document serializes")
    }

    pub fn document(&self) -> &ModelDocument {
        &self.doc
    }

    /// Length `D` of the subject parameter vector.
    pub fn dim(&self) -> usize {
        self.doc.vector_order.len()
    }

    pub fn param_names(&self) -> &[String] {
        &self.doc.vector_order
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn task_names(&self) -> Vec<&str> {
        self.doc.tasks.iter().map(|t| t.name.as_str()).collect()
    }

    /// Task index owning each coordinate of the parameter vector.
    pub fn blocks(&self) -> &[usize] {
        &self.block
    }

    /// Task name owning each coordinate of the parameter vector.
    pub fn block_labels(&self) -> Vec<String> {
        self.block.iter().map(|&t| self.doc.tasks[t].name.clone()).collect()
    }

    pub fn cell_index(&self, task: &str, cell: &str) -> Option<CellIndex> {
        self.lookup.get(&(task.to_string(), cell.to_string())).copied()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// `(task, cell)` names for a cell index.
    pub fn cell_name(&self, idx: CellIndex) -> (&str, &str) {
        let c = &self.cells[idx.0];
        (&c.task, &c.name)
    }

    pub fn accumulator_count(&self, idx: CellIndex) -> usize {
        self.cells[idx.0].accs.len()
    }

    /// Index of the accumulator tagged `correct`, if any.
    pub fn correct_response(&self, idx: CellIndex) -> Option<usize> {
        self.cells[idx.0].correct
    }

    /// Natural-scale accumulator parameters of a cell, without validation.
    /// Returns `false` if any value is unusable (e.g. `exp` overflowed).
    #[inline]
    pub(crate) fn resolve_into(&self, idx: CellIndex, alpha: &[f64], out: &mut Vec<AccumulatorParams>) -> bool {
        out.clear();
        let mut ok = true;
        for acc in &self.cells[idx.0].accs {
            let p = AccumulatorParams {
                b_gap: acc.b.value(alpha),
                start_range: acc.a.value(alpha),
                drift: acc.v.value(alpha),
                non_decision: acc.tau.value(alpha),
            };
            ok &= p.b_gap.is_finite() && p.b_gap > 0.0 && p.start_range.is_finite() && p.drift.is_finite()
                && p.non_decision.is_finite();
            out.push(p);
        }
        ok
    }

    /// Coordinate used as the cell's non-decision time, unless it is fixed.
    pub fn tau_coordinate(&self, idx: CellIndex) -> Option<usize> {
        match self.cells[idx.0].accs[0].tau {
            Slot::Index(i) => Some(i),
            Slot::Fixed(_) => None,
        }
    }

    /// The model restricted to one task, keeping the task's parameters in
    /// their original relative order.
    pub fn single_task(&self, task: &str) -> Result<ModelSpec> {
        let t = self
            .doc
            .tasks
            .iter()
            .position(|b| b.name == task)
            .ok_or_else(|| invalid(format!("unknown task {task:?}")))?;
        let vector_order = self
            .doc
            .vector_order
            .iter()
            .zip(&self.block)
            .filter(|(_, &b)| b == t)
            .map(|(n, _)| n.clone())
            .collect();
        ModelSpec::new(ModelDocument {
            tasks: vec![self.doc.tasks[t].clone()],
            vector_order,
        })
    }

    pub fn resolve_index(&self, idx: CellIndex, alpha: &[f64]) -> Result<Vec<AccumulatorParams>> {
        if alpha.len() != self.dim() {
            return Err(invalid(format!("alpha has length {}, model has {}", alpha.len(), self.dim())));
        }
        let mut out = Vec::new();
        self.resolve_into(idx, alpha, &mut out);
        for p in &out {
            p.validate()?;
        }
        Ok(out)
    }
}

/// One subject's log-scale random effects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectEffects {
    pub subject_id: String,
    pub alpha: Vec<f64>,
}

impl SubjectEffects {
    pub fn new(subject_id: impl Into<String>, alpha: Vec<f64>) -> Self {
        Self {
            subject_id: subject_id.into(),
            alpha,
        }
    }

    pub fn natural(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.exp()).collect()
    }
}

/// Natural-scale parameters for every accumulator of `(task, cell)`.
pub fn resolve(spec: &ModelSpec, task: &str, cell: &str, alpha: &SubjectEffects) -> Result<Vec<AccumulatorParams>> {
    let idx = spec
        .cell_index(task, cell)
        .ok_or_else(|| config(format!("no mapping for task {task:?} cell {cell:?}")))?;
    spec.resolve_index(idx, &alpha.alpha)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub task: String,
    pub cell: String,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.task, self.cell)
    }
}

/// Coverage of a data set by a model specification.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Observed cells the model does not map, with trial counts.
    pub unmapped: Vec<(CellKey, usize)>,
    /// Parameters in `vector_order` that no cell references.
    pub unused_params: Vec<String>,
    /// Trials per mapped cell.
    pub cell_counts: Vec<(CellKey, usize)>,
    /// Trials whose response index exceeds the cell's accumulator count.
    pub bad_responses: usize,
    /// Trials with a non-positive or non-finite rt.
    pub bad_rts: usize,
}

impl CoverageReport {
    pub fn is_ok(&self) -> bool {
        self.unmapped.is_empty() && self.bad_responses == 0 && self.bad_rts == 0
    }

    pub fn check(self) -> Result<Self> {
        if self.is_ok() {
            return Ok(self);
        }
        let mut parts = Vec::new();
        if !self.unmapped.is_empty() {
            let names: Vec<String> = self.unmapped.iter().map(|(k, _)| k.to_string()).collect();
            parts.push(format!("unmapped cells: {}", names.join(", ")));
        }
        if self.bad_responses > 0 {
            parts.push(format!("{} trials with out-of-range response", self.bad_responses));
        }
        if self.bad_rts > 0 {
            parts.push(format!("{} trials with invalid rt", self.bad_rts));
        }
        Err(config(parts.join("; ")))
    }
}

pub fn validate_spec(spec: &ModelSpec, data: &[TrialRecord]) -> CoverageReport {
    let mut counts: BTreeMap<CellKey, usize> = BTreeMap::new();
    let mut report = CoverageReport::default();
    for t in data {
        let key = CellKey {
            task: t.task.clone(),
            cell: t.cell.clone(),
        };
        *counts.entry(key).or_default() += 1;
        if !(t.rt.is_finite() && t.rt > 0.0) {
            report.bad_rts += 1;
        }
        if let Some(idx) = spec.cell_index(&t.task, &t.cell) {
            if t.response >= spec.accumulator_count(idx) {
                report.bad_responses += 1;
            }
        }
    }
    for (key, n) in counts {
        if spec.cell_index(&key.task, &key.cell).is_some() {
            report.cell_counts.push((key, n));
        } else {
            report.unmapped.push((key, n));
        }
    }
    let mut used = vec![false; spec.dim()];
    for cell in &spec.cells {
        for acc in &cell.accs {
            for s in [acc.b, acc.a, acc.v, acc.tau] {
                if let Slot::Index(i) = s {
                    used[i] = true;
                }
            }
        }
    }
    report.unused_params = spec
        .param_names()
        .iter()
        .zip(used)
        .filter(|(_, u)| !u)
        .map(|(n, _)| n.clone())
        .collect();
    report
}

/// Trials grouped by subject, in order of first appearance.
pub fn group_by_subject(data: &[TrialRecord]) -> Vec<(String, Vec<TrialRecord>)> {
    let mut order: Vec<(String, Vec<TrialRecord>)> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for t in data {
        let i = *seen.entry(t.subject.as_str()).or_insert_with(|| {
            order.push((t.subject.clone(), Vec::new()));
            order.len() - 1
        });
        order[i].1.push(t.clone());
    }
    order
}

pub const TRIALS_HEADER: [&str; 5] = ["subject", "task", "cell", "response", "rt"];

pub fn read_trials_from<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != TRIALS_HEADER {
        return Err(invalid(format!(
            "trials header must be {}, got {}",
            TRIALS_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn read_trials(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    read_trials_from(std::fs::File::open(path)?)
}

/// Writes `subject,task,cell,response,rt` with rt at 6 decimals.
pub fn write_trials_to<W: Write>(writer: W, data: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRIALS_HEADER)?;
    for t in data {
        w.write_record([
            t.subject.as_str(),
            t.task.as_str(),
            t.cell.as_str(),
            &t.response.to_string(),
            &format!("{:.6}", t.rt),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials(path: impl AsRef<Path>, data: &[TrialRecord]) -> Result<()> {
    write_trials_to(std::fs::File::create(path)?, data)
}
