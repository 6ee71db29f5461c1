//! Correlation summary with reliability flags, group means on the natural
//! scale, and an SVG heatmap.

use accjoint::analysis::{correlation_summary, group_mean_table};
use accjoint::sampler::{run_chain, SamplerConfig, StageCounts};
use accjoint::simstudy::{StudyConfig, Version};
use accjoint::svg;

fn main() -> accjoint::Result<()> {
    let study = StudyConfig {
        subjects: Some(20),
        trials_per_task: Some(150),
        ..StudyConfig::default()
    }
    .resolve(Version::UniformR)?;
    let (data, _) = accjoint::simstudy::generate_dataset(&study.design, &study.spec, &study.plan)?;
    let cfg = SamplerConfig {
        particles_per_stage: StageCounts::new(30, 30, 15),
        draws_per_stage: StageCounts::new(200, 200, 600),
        ..SamplerConfig::default()
    };
    let chain = run_chain(&data, &study.spec, &cfg)?;

    for row in group_mean_table(&chain) {
        println!("{:<8} {:.3} ({:.3})", row.param, row.mean, row.sd);
    }
    let summary = correlation_summary(&chain)?;
    let d = summary.dim();
    for i in 0..d {
        let line: Vec<String> = (0..d)
            .map(|j| format!("{:+.2}{}", summary.mean[(i, j)], if summary.reliable[(i, j)] { "*" } else { " " }))
            .collect();
        println!("{:<8} {}", summary.param_names[i], line.join(" "));
    }
    let path = std::env::temp_dir().join("accjoint-heatmap.svg");
    std::fs::write(&path, svg::emit_heatmap(&summary, None))?;
    println!("heatmap written to {}", path.display());
    Ok(())
}
