//! Chain-level invariants of the particle sampler.

use std::time::{Duration, Instant};

use accjoint::analysis::cov_to_corr;
use accjoint::fixtures;
use accjoint::lba::TrialRecord;
use accjoint::sampler::{run_chain, SamplerConfig, StageCounts};
use accjoint::simstudy::{even_plan, simulate_subject, subject_id};

fn tiny_data() -> Vec<TrialRecord> {
    let spec = fixtures::tiny_model();
    let plan = even_plan(&spec, 80);
    let alphas = [
        [0.1, -0.4, 1.0, -1.6],
        [0.3, -0.6, 0.9, -1.5],
        [-0.1, -0.5, 1.2, -1.7],
        [0.2, -0.3, 0.8, -1.6],
        [0.0, -0.5, 1.1, -1.5],
    ];
    alphas
        .iter()
        .enumerate()
        .flat_map(|(s, a)| simulate_subject(&spec, &subject_id(s), a, &plan, 77).unwrap())
        .collect()
}

fn cfg(seed: u64) -> SamplerConfig {
    SamplerConfig {
        particles_per_stage: StageCounts::new(30, 30, 20),
        draws_per_stage: StageCounts::new(150, 150, 600),
        seed,
        ..SamplerConfig::default()
    }
}

/// Mean and batch-means standard error of a series.
fn mean_and_mcse(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let batches = 20;
    let size = n / batches;
    let bm: Vec<f64> = (0..batches)
        .map(|b| x[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let var = bm.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (batches - 1) as f64;
    (m, (var / batches as f64).sqrt())
}

#[test]
fn subject_order_does_not_change_group_posterior() {
    let spec = fixtures::tiny_model();
    let data = tiny_data();
    let mut reordered = data.clone();
    reordered.sort_by(|a, b| b.subject.cmp(&a.subject));
    let c1 = run_chain(&data, &spec, &cfg(3)).unwrap();
    let c2 = run_chain(&reordered, &spec, &cfg(3)).unwrap();
    assert_ne!(c1.meta.subjects, c2.meta.subjects);
    for d in 0..spec.dim() {
        let x1: Vec<f64> = c1.inference_draws().iter().map(|dr| dr.mu[d]).collect();
        let x2: Vec<f64> = c2.inference_draws().iter().map(|dr| dr.mu[d]).collect();
        let (m1, e1) = mean_and_mcse(&x1);
        let (m2, e2) = mean_and_mcse(&x2);
        let tol = 3.0 * (e1 * e1 + e2 * e2).sqrt();
        assert!((m1 - m2).abs() <= tol.max(1e-12), "mu[{d}]: {m1} vs {m2} (tol {tol})");
    }
}

#[test]
fn stored_covariances_are_positive_definite() {
    let spec = fixtures::tiny_model();
    let chain = run_chain(&tiny_data(), &spec, &cfg(4)).unwrap();
    for draw in &chain.draws {
        let sigma = draw.sigma_matrix();
        assert!(sigma.clone().cholesky().is_some(), "iteration {}", draw.iter);
        let r = cov_to_corr(&sigma).unwrap();
        assert!(r.iter().all(|x| x.abs() <= 1.0));
    }
}

#[test]
fn fourteen_parameter_start_is_fast() {
    let spec = fixtures::application1();
    let plan = even_plan(&spec, 300);
    let mu: Vec<f64> = fixtures::APPLICATION1_GROUP_MEANS.iter().map(|m| m.ln()).collect();
    let data: Vec<TrialRecord> = (0..19)
        .flat_map(|s| simulate_subject(&spec, &subject_id(s), &mu, &plan, 12).unwrap())
        .collect();
    let cfg = SamplerConfig {
        particles_per_stage: StageCounts::new(1, 1, 1),
        draws_per_stage: StageCounts::new(1, 1, 1),
        ..SamplerConfig::default()
    };
    let t = Instant::now();
    let chain = run_chain(&data, &spec, &cfg).unwrap();
    assert!(t.elapsed() < Duration::from_secs(5), "{:?}", t.elapsed());
    assert_eq!(chain.n_subjects(), 19);
}
