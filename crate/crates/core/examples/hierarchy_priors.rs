//! Prior draws of the population covariance and one round of the
//! conjugate group-level updates.

use accjoint::analysis::{cov_to_corr, mean_sd};
use accjoint::hierarchy::{sample_a, sample_mu, sample_prior, sample_sigma, Hyperparameters};
use accjoint::rng::{stream, Purpose};
use nalgebra::DMatrix;

fn main() -> accjoint::Result<()> {
    let hyper = Hyperparameters::default();
    let mut rng = stream(7, Purpose::Misc, 0, 0);
    let mut corr = Vec::new();
    let mut sds = Vec::new();
    for _ in 0..20_000 {
        let g = sample_prior(2, &hyper, &mut rng)?;
        corr.push(cov_to_corr(&g.sigma)?[(0, 1)]);
        sds.push(g.sigma[(0, 0)].sqrt());
    }
    let below = |x: f64| corr.iter().filter(|&&r| r <= x).count() as f64 / corr.len() as f64;
    println!("prior correlation CDF at -0.5, 0, 0.5: {:.3} {:.3} {:.3}", below(-0.5), below(0.0), below(0.5));
    let mut sorted = sds.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("prior sd median {:.3}", sorted[sorted.len() / 2]);

    let alphas: Vec<Vec<f64>> = (0..30).map(|s| vec![0.1 * (s % 5) as f64, 1.0 - 0.05 * (s % 7) as f64]).collect();
    let sigma = DMatrix::identity(2, 2) * 0.1;
    let mu = sample_mu(&alphas, &sigma, &mut rng)?;
    let a = vec![1.0, 1.0];
    let new_sigma = sample_sigma(&alphas, &mu, &a, hyper.nu, &mut rng)?;
    let new_a = sample_a(&new_sigma, hyper.nu, &[1.0, 1.0], &mut rng)?;
    println!("mu {mu:.3?}");
    println!("sigma {new_sigma:.4}");
    println!("a {new_a:.3?}");
    let (m, s) = mean_sd(&corr);
    println!("prior correlation mean {m:.3} sd {s:.3} (uniform: 0, {:.3})", (1.0f64 / 3.0).sqrt());
    Ok(())
}
