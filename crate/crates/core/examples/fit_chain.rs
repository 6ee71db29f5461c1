//! Fit the joint model to simulated two-session data, store the chain and
//! read it back.

use accjoint::chain;
use accjoint::sampler::{run_chain, SamplerConfig, StageCounts};
use accjoint::simstudy::{StudyConfig, Version};

fn main() -> accjoint::Result<()> {
    let study = StudyConfig {
        subjects: Some(12),
        trials_per_task: Some(200),
        ..StudyConfig::default()
    }
    .resolve(Version::Matched)?;
    let (data, truth) = accjoint::simstudy::generate_dataset(&study.design, &study.spec, &study.plan)?;
    let cfg = SamplerConfig {
        particles_per_stage: StageCounts::new(30, 30, 15),
        draws_per_stage: StageCounts::new(200, 200, 500),
        seed: 11,
        ..SamplerConfig::default()
    };
    let fitted = run_chain(&data, &study.spec, &cfg)?;
    println!("{} draws, {} degenerate updates", fitted.draws.len(), fitted.meta.degenerate_updates);
    for w in &fitted.meta.warnings {
        println!("warning: {w}");
    }

    let draws = fitted.inference_draws();
    for (d, name) in fitted.meta.param_names.iter().enumerate() {
        let est = draws.iter().map(|x| x.mu[d]).sum::<f64>() / draws.len() as f64;
        let sample = truth.iter().map(|t| t.alpha[d]).sum::<f64>() / truth.len() as f64;
        println!("{name:<8} posterior mean mu {est:+.3}  sample mean of true effects {sample:+.3}");
    }

    let dir = std::env::temp_dir().join("accjoint-fit-example");
    chain::save(&dir, &fitted)?;
    let back = chain::load(dir.join(chain::CHAIN_FILE))?;
    println!("reloaded {} draws from {}: identical {}", back.draws.len(), dir.display(), back.draws == fitted.draws);
    Ok(())
}
