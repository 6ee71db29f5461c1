//! Per-subject log-likelihood under a model specification.

use crate::design::{CellIndex, ModelSpec, SubjectEffects};
use crate::error::{config, invalid, Result};
use crate::lba::{defective_log_density, race_log_density, AccumulatorParams, Node, TrialRecord};

/// Sum of per-trial race log-densities at natural parameters `exp(alpha)`.
/// Evaluated trial by trial in input order.
pub fn subject_log_likelihood(trials: &[TrialRecord], alpha: &SubjectEffects, spec: &ModelSpec) -> Result<f64> {
    if alpha.alpha.len() != spec.dim() {
        return Err(invalid(format!(
            "alpha has length {}, model has {}",
            alpha.alpha.len(),
            spec.dim()
        )));
    }
    let mut total = 0.0;
    for t in trials {
        if t.subject != trials[0].subject {
            return Err(invalid("trials span more than one subject"));
        }
        let idx = spec
            .cell_index(&t.task, &t.cell)
            .ok_or_else(|| config(format!("no mapping for task {:?} cell {:?}", t.task, t.cell)))?;
        let params = spec.resolve_index(idx, &alpha.alpha)?;
        total += defective_log_density(t, &params)?;
    }
    Ok(total)
}

struct CellTrials {
    cell: CellIndex,
    min_rt: f64,
    responses: Vec<u32>,
    rts: Vec<f64>,
}

/// One subject's trials bucketed by design cell for fast repeated
/// likelihood evaluation.
pub struct SubjectData {
    pub id: String,
    cells: Vec<CellTrials>,
    n_trials: usize,
}

impl SubjectData {
    pub fn new(id: impl Into<String>, trials: &[TrialRecord], spec: &ModelSpec) -> Result<Self> {
        let id = id.into();
        let mut cells: Vec<CellTrials> = Vec::new();
        for t in trials {
            if t.subject != id {
                return Err(invalid(format!("trial of subject {:?} given to subject {id:?}", t.subject)));
            }
            let idx = spec
                .cell_index(&t.task, &t.cell)
                .ok_or_else(|| config(format!("no mapping for task {:?} cell {:?}", t.task, t.cell)))?;
            if t.response >= spec.accumulator_count(idx) {
                return Err(invalid(format!("response {} out of range in {}/{}", t.response, t.task, t.cell)));
            }
            if !(t.rt.is_finite() && t.rt > 0.0) {
                return Err(invalid(format!("invalid rt {} for subject {id:?}", t.rt)));
            }
            let pos = match cells.iter().position(|c| c.cell == idx) {
                Some(p) => p,
                None => {
                    cells.push(CellTrials {
                        cell: idx,
                        min_rt: f64::INFINITY,
                        responses: Vec::new(),
                        rts: Vec::new(),
                    });
                    cells.len() - 1
                }
            };
            let c = &mut cells[pos];
            c.min_rt = c.min_rt.min(t.rt);
            c.responses.push(t.response as u32);
            c.rts.push(t.rt);
        }
        cells.sort_by_key(|c| c.cell);
        Ok(Self {
            id,
            cells,
            n_trials: trials.len(),
        })
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    /// Log-likelihood at `alpha`; `-inf` for parameters that cannot
    /// produce the data (including overflowed natural values).
    pub fn log_likelihood(&self, spec: &ModelSpec, alpha: &[f64]) -> f64 {
        let mut params: Vec<AccumulatorParams> = Vec::with_capacity(4);
        let mut nodes: Vec<Node> = Vec::with_capacity(4);
        let mut total = 0.0;
        for c in &self.cells {
            if !spec.resolve_into(c.cell, alpha, &mut params) {
                return f64::NEG_INFINITY;
            }
            let tau = params[0].non_decision;
            if c.min_rt <= tau {
                return f64::NEG_INFINITY;
            }
            nodes.clear();
            nodes.extend(params.iter().map(|p| p.node()));
            for (&resp, &rt) in c.responses.iter().zip(&c.rts) {
                total += race_log_density(nodes.iter().copied(), resp as usize, rt - tau);
            }
            if total == f64::NEG_INFINITY {
                return total;
            }
        }
        if total.is_nan() {
            f64::NEG_INFINITY
        } else {
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::resolve;
    use crate::fixtures;
    use crate::lba::simulate_trial;
    use crate::rng::{stream, Purpose};

    fn simulated(spec: &ModelSpec, alpha: &[f64], n: usize) -> Vec<TrialRecord> {
        let mut rng = stream(9, Purpose::Misc, 0, 0);
        let fx = SubjectEffects::new("s", alpha.to_vec());
        let cells = ["left", "right"];
        (0..n)
            .map(|i| {
                let cell = cells[i % 2];
                let p = resolve(spec, "task", cell, &fx).unwrap();
                let (response, rt) = simulate_trial(&p, &mut rng).unwrap();
                TrialRecord {
                    subject: "s".into(),
                    task: "task".into(),
                    cell: cell.into(),
                    response,
                    rt,
                }
            })
            .collect()
    }

    #[test]
    fn empty_and_singleton() {
        let spec = fixtures::tiny_model();
        let alpha = SubjectEffects::new("s", vec![0.0, -0.5, 1.0, -1.6]);
        assert_eq!(subject_log_likelihood(&[], &alpha, &spec).unwrap(), 0.0);
        let data = simulated(&spec, &alpha.alpha, 1);
        let p = resolve(&spec, &data[0].task, &data[0].cell, &alpha).unwrap();
        assert_eq!(
            subject_log_likelihood(&data, &alpha, &spec).unwrap(),
            defective_log_density(&data[0], &p).unwrap()
        );
    }

    #[test]
    fn matches_naive_summation() {
        let spec = fixtures::tiny_model();
        let alpha = SubjectEffects::new("s", vec![0.2, -0.4, 1.1, -1.7]);
        let data = simulated(&spec, &alpha.alpha, 100);
        // straightforward re-evaluation: resolve and sum per trial
        let mut naive = 0.0;
        for t in &data {
            let p = resolve(&spec, &t.task, &t.cell, &alpha).unwrap();
            naive += defective_log_density(t, &p).unwrap();
        }
        let ll = subject_log_likelihood(&data, &alpha, &spec).unwrap();
        assert!((ll - naive).abs() < 1e-12);
        let fast = SubjectData::new("s", &data, &spec).unwrap().log_likelihood(&spec, &alpha.alpha);
        assert!((fast - naive).abs() < 1e-9 * naive.abs());
    }

    #[test]
    fn impossible_and_invalid() {
        let spec = fixtures::tiny_model();
        let alpha = vec![0.0, -0.5, 1.0, -1.6];
        let data = simulated(&spec, &alpha, 20);
        let prepared = SubjectData::new("s", &data, &spec).unwrap();
        // tau = e^1 s exceeds every rt
        let mut late = alpha.clone();
        late[3] = 1.0;
        assert_eq!(prepared.log_likelihood(&spec, &late), f64::NEG_INFINITY);
        let fx = SubjectEffects::new("s", late);
        assert_eq!(subject_log_likelihood(&data, &fx, &spec).unwrap(), f64::NEG_INFINITY);
        let mut huge = alpha.clone();
        huge[0] = 800.0;
        assert_eq!(prepared.log_likelihood(&spec, &huge), f64::NEG_INFINITY);

        let mut bad = data.clone();
        bad[0].cell = "speed2".into();
        let err = subject_log_likelihood(&bad, &SubjectEffects::new("s", alpha.clone()), &spec);
        assert!(matches!(err, Err(crate::Error::Config(_))));
        bad[0].cell = "left".into();
        bad[1].subject = "other".into();
        assert!(subject_log_likelihood(&bad, &SubjectEffects::new("s", alpha), &spec).is_err());
    }
}
