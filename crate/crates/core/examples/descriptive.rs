//! Cross-task descriptive correlations of mean RT and probit accuracy on
//! data simulated from the three-task model.

use accjoint::analysis::descriptive_cross_task;
use accjoint::fixtures;
use accjoint::simstudy::{even_plan, generate_dataset, generator_state, SimDesign, Version};
use nalgebra::DMatrix;

fn main() -> accjoint::Result<()> {
    let spec = fixtures::application2();
    let d = spec.dim();
    let threshold: Vec<bool> = spec.param_names().iter().map(|n| n.contains(".b_")).collect();
    let sigma = DMatrix::from_fn(d, d, |i, j| match (i == j, threshold[i] && threshold[j]) {
        (true, true) => 0.09,
        (true, false) => 0.0025,
        (false, true) => 0.081,
        (false, false) => 0.0,
    });
    let mu = fixtures::APPLICATION2_GROUP_MEANS.iter().map(|m| m.ln()).collect();
    let design = SimDesign {
        subjects: 30,
        trials_per_task: 300,
        generator: generator_state(mu, sigma)?,
        version: Version::Matched,
        target_r: 0.0,
        seed: 4,
    };
    let (data, _) = generate_dataset(&design, &spec, &even_plan(&spec, 300))?;
    let summary = descriptive_cross_task(&data, &spec)?;
    for p in &summary.pairs {
        println!(
            "{:>6} ~ {:<6} n={}  r(mean rt) {:+.2}  r(probit accuracy) {:+.2}",
            p.task_a,
            p.task_b,
            p.n_subjects,
            p.r_rt.unwrap_or(f64::NAN),
            p.r_probit.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
