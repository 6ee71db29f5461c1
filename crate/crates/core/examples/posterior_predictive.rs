//! Posterior predictive datasets compared with the observed accuracy and
//! mean response time.

use accjoint::analysis::posterior_predictive;
use accjoint::sampler::{run_chain, SamplerConfig, StageCounts};
use accjoint::simstudy::{StudyConfig, Version};

fn summary(trials: &[accjoint::lba::TrialRecord]) -> (f64, f64) {
    let correct = trials
        .iter()
        .filter(|t| t.response == usize::from(t.cell == "right"))
        .count() as f64;
    let rt = trials.iter().map(|t| t.rt).sum::<f64>();
    (correct / trials.len() as f64, rt / trials.len() as f64)
}

fn main() -> accjoint::Result<()> {
    let study = StudyConfig {
        subjects: Some(10),
        trials_per_task: Some(200),
        ..StudyConfig::default()
    }
    .resolve(Version::Matched)?;
    let (data, _) = accjoint::simstudy::generate_dataset(&study.design, &study.spec, &study.plan)?;
    let cfg = SamplerConfig {
        particles_per_stage: StageCounts::new(30, 30, 15),
        draws_per_stage: StageCounts::new(200, 200, 400),
        ..SamplerConfig::default()
    };
    let chain = run_chain(&data, &study.spec, &cfg)?;
    let sets = posterior_predictive(&chain, &chain.meta.design, 20, 5)?;
    let (acc, rt) = summary(&data);
    println!("observed   accuracy {acc:.3}  mean rt {rt:.3}");
    for set in sets.iter().take(5) {
        let (a, r) = summary(&set.trials);
        println!("draw {:>4}  accuracy {a:.3}  mean rt {r:.3}", set.iter);
    }
    let rts: Vec<f64> = sets.iter().map(|s| summary(&s.trials).1).collect();
    let below = rts.iter().filter(|&&r| r < rt).count();
    println!("{below} of {} predictive mean rts fall below the observed one", rts.len());
    Ok(())
}
