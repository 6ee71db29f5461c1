//! Single-accumulator densities, a two-choice race and simulated trials.

use accjoint::lba::{defective_log_density, node_cdf, node_pdf, simulate_trial, AccumulatorParams, TrialRecord};
use accjoint::rng::{stream, Purpose};

fn main() -> accjoint::Result<()> {
    let correct = AccumulatorParams::new(1.33, 0.73, 3.12, 0.19)?;
    let error = AccumulatorParams::new(1.33, 0.73, 1.50, 0.19)?;
    println!("{:>6} {:>10} {:>10}", "t", "pdf", "cdf");
    for t in [0.1, 0.2, 0.3, 0.5, 0.8, 1.2] {
        println!("{t:>6.2} {:>10.5} {:>10.5}", node_pdf(t, &correct)?, node_cdf(t, &correct)?);
    }

    let race = [correct, error];
    for (response, rt) in [(0, 0.55), (1, 0.55), (0, 0.15)] {
        let trial = TrialRecord {
            subject: "s1".into(),
            task: "demo".into(),
            cell: "left".into(),
            response,
            rt,
        };
        println!("log density of response {response} at {rt} s: {:.4}", defective_log_density(&trial, &race)?);
    }

    let mut rng = stream(1, Purpose::Misc, 0, 0);
    let sims: Vec<(usize, f64)> = (0..10_000).map(|_| simulate_trial(&race, &mut rng)).collect::<accjoint::Result<_>>()?;
    let acc = sims.iter().filter(|(r, _)| *r == 0).count() as f64 / sims.len() as f64;
    let mean_rt = sims.iter().map(|(_, t)| t).sum::<f64>() / sims.len() as f64;
    println!("simulated accuracy {acc:.3}, mean rt {mean_rt:.3} s");
    Ok(())
}
