//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed. Positional
//! arguments select criteria by number (`cargo test --test acceptance -- 4 6`).

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use accjoint::analysis::{self, correlation_summary_from, descriptive_cross_task, is_reliable, precision_compare};
use accjoint::design::ModelSpec;
use accjoint::hierarchy::{sample_a, sample_mu, sample_prior, sample_sigma, Hyperparameters};
use accjoint::lba::{defective_log_density, node_pdf, AccumulatorParams, TrialRecord};
use accjoint::sampler::{run_chain, SamplerConfig, StageCounts};
use accjoint::simstudy::{
    self, desk_sampler, generate_dataset, generator_state, reference_generator, run_recovery, tally, Scale, SimDesign,
    StudyConfig, Version,
};
use accjoint::{chain, fixtures};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    (1, "lba density vs monte carlo", lba_density_vs_monte_carlo),
    (2, "defective density normalization", defective_normalization),
    (3, "zero start-range limit", zero_range_limit),
    (4, "conjugate conditionals", conjugate_conditionals),
    (5, "prior correlation marginal", prior_correlation_marginal),
    (6, "sampler exactness toy model", sampler_exactness),
    (7, "desk recovery study", desk_recovery),
    (8, "joint precision gain", precision_gain),
    (9, "reliability rule", reliability_rule),
    (10, "descriptive statistics", descriptive_statistics),
    (11, "determinism", determinism),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (n, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        ran += 1;
        failed += usize::from(!o.pass);
        println!(
            "acceptance {n:>2} {name:<34} {} {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn truncated_drift(v: f64, rng: &mut ChaCha8Rng) -> f64 {
    let n = Normal::new(v, 1.0).unwrap();
    loop {
        let d = n.sample(rng);
        if d > 0.0 {
            return d;
        }
    }
}

// (b_gap, A, v) at natural-scale magnitudes of the two applications
const DENSITY_SETTINGS: [(f64, f64, f64); 6] = [
    (1.33, 0.73, 3.12),
    (1.39, 0.73, 1.50),
    (1.80, 0.92, 3.24),
    (2.15, 1.34, 2.94),
    (3.04, 1.78, 4.04),
    (1.71, 0.89, 0.77),
];

fn lba_density_vs_monte_carlo() -> Outcome {
    const N: usize = 1_000_000;
    const BINS: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for &(b, a, v) in &DENSITY_SETTINGS {
        let p = AccumulatorParams::new(b, a, v, 0.0).unwrap();
        let mut times: Vec<f64> = (0..N)
            .map(|_| {
                let start = a * rng.random::<f64>();
                (a + b - start) / truncated_drift(v, &mut rng)
            })
            .collect();
        times.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let lo = times[(0.005 * N as f64) as usize];
        let hi = times[(0.995 * N as f64) as usize];
        let w = (hi - lo) / BINS as f64;
        let mut counts = [0usize; BINS];
        for &t in &times {
            if t >= lo && t < hi {
                counts[(((t - lo) / w) as usize).min(BINS - 1)] += 1;
            }
        }
        for (k, &c) in counts.iter().enumerate() {
            let (x0, x1) = (lo + k as f64 * w, lo + (k + 1) as f64 * w);
            let expected = adaptive_simpson(&|t| node_pdf(t, &p).unwrap(), x0, x1, 1e-10) / w;
            let observed = c as f64 / (N as f64 * w);
            worst = worst.max((observed - expected).abs());
        }
    }
    outcome(worst < 0.02, format!("max bin error {worst:.4} (< 0.02)"))
}

fn defective_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let tau = rng.random_range(0.1..0.4);
        let race: Vec<AccumulatorParams> = (0..2)
            .map(|_| {
                AccumulatorParams::new(
                    rng.random_range(0.2..3.0),
                    rng.random_range(0.0..2.0),
                    rng.random_range(-1.0..4.5),
                    tau,
                )
                .unwrap()
            })
            .collect();
        let total: f64 = (0..2)
            .map(|response| {
                let f = |d: f64| {
                    if d <= 0.0 {
                        return 0.0;
                    }
                    let trial = TrialRecord {
                        subject: "s".into(),
                        task: "t".into(),
                        cell: "c".into(),
                        response,
                        rt: tau + d,
                    };
                    defective_log_density(&trial, &race).unwrap().exp()
                };
                integrate_half_line(&f, 1e-10)
            })
            .sum();
        worst = worst.max((total - 1.0).abs());
    }
    outcome(worst < 1e-4, format!("max |total mass - 1| {worst:.2e} (< 1e-4)"))
}

fn zero_range_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let b = rng.random_range(0.3..3.0);
        let v = rng.random_range(-1.0..4.5);
        let t = rng.random_range(0.1..3.0);
        let general = node_pdf(t, &AccumulatorParams::new(b, 1e-6, v, 0.0).unwrap()).unwrap();
        let limit = lba_pdf_point_start(t, b, v);
        worst = worst.max((general - limit).abs());
    }
    outcome(worst < 1e-5, format!("max |general - limit| {worst:.2e} (< 1e-5)"))
}

fn conjugate_conditionals() -> Outcome {
    const DRAWS: usize = 100_000;
    let alphas: Vec<Vec<f64>> = [0.3, -0.2, 0.5, 0.1, 0.4].iter().map(|&x| vec![x]).collect();
    let nu = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(404);

    // mu | alpha, sigma² = 0.2
    let s2 = 0.2;
    let grid = linspace(-4.0, 4.0, 40_001);
    let logf: Vec<f64> = grid
        .iter()
        .map(|&m| ln_normal(m, 0.0, 1.0) + alphas.iter().map(|x| ln_normal(x[0], m, s2)).sum::<f64>())
        .collect();
    let oracle = GridDist::from_log_density(grid, &logf);
    let sigma = DMatrix::from_element(1, 1, s2);
    let draws: Vec<f64> = (0..DRAWS).map(|_| sample_mu(&alphas, &sigma, &mut rng).unwrap()[0]).collect();
    let ks_mu = ks_distance(&draws, |x| oracle.cdf_at(x));

    // ln sigma² | alpha, mu = 0.2, a = 0.7; prior IW(nu, 2 nu / a) is InvGamma(nu/2, nu/a) in one dimension
    let (mu, a) = (0.2, 0.7);
    let grid = linspace(-15.0, 8.0, 40_001);
    let logf: Vec<f64> = grid
        .iter()
        .map(|&l| {
            let v = l.exp();
            ln_inv_gamma(v, nu / 2.0, nu / a) + alphas.iter().map(|x| ln_normal(x[0], mu, v)).sum::<f64>() + l
        })
        .collect();
    let oracle = GridDist::from_log_density(grid, &logf);
    let draws: Vec<f64> = (0..DRAWS)
        .map(|_| sample_sigma(&alphas, &[mu], &[a], nu, &mut rng).unwrap()[(0, 0)].ln())
        .collect();
    let ks_sigma = ks_distance(&draws, |x| oracle.cdf_at(x));

    // ln a | sigma² = 0.3 with half-t scale 1
    let s2 = 0.3;
    let grid = linspace(-15.0, 12.0, 40_001);
    let logf: Vec<f64> = grid
        .iter()
        .map(|&l| {
            let a = l.exp();
            ln_inv_gamma(a, 0.5, 1.0) + ln_inv_gamma(s2, nu / 2.0, nu / a) + l
        })
        .collect();
    let oracle = GridDist::from_log_density(grid, &logf);
    let sigma = DMatrix::from_element(1, 1, s2);
    let draws: Vec<f64> = (0..DRAWS)
        .map(|_| sample_a(&sigma, nu, &[1.0], &mut rng).unwrap()[0].ln())
        .collect();
    let ks_a = ks_distance(&draws, |x| oracle.cdf_at(x));

    let worst = ks_mu.max(ks_sigma).max(ks_a);
    outcome(
        worst < 0.01,
        format!("KS mu {ks_mu:.4}, sigma {ks_sigma:.4}, a {ks_a:.4} (< 0.01)"),
    )
}

fn prior_correlation_marginal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let hyper = Hyperparameters::default();
    let r: Vec<f64> = (0..20_000)
        .map(|_| {
            let g = sample_prior(2, &hyper, &mut rng).unwrap();
            g.sigma[(0, 1)] / (g.sigma[(0, 0)] * g.sigma[(1, 1)]).sqrt()
        })
        .collect();
    let ks = ks_distance(&r, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0));
    outcome(ks < 0.02, format!("KS vs Uniform(-1, 1) {ks:.4} (< 0.02)"))
}

fn sampler_exactness() -> Outcome {
    let spec = ModelSpec::from_json(ONE_PARAM_MODEL).unwrap();
    let plan = vec![("task".to_string(), "left".to_string(), 10), ("task".to_string(), "right".to_string(), 10)];
    let data = simstudy::simulate_subject(&spec, "s1", &[2.0f64.ln()], &plan, 606).unwrap();

    // posterior of the single effect: likelihood times the hierarchy's marginal prior
    let prior = MarginalEffectPrior::new();
    let grid = linspace(-3.0, 3.5, 651);
    let logf: Vec<f64> = grid
        .iter()
        .map(|&alpha| {
            let vc = alpha.exp();
            let ll: f64 = data
                .iter()
                .map(|t| {
                    let d = t.rt - 0.2;
                    let correct = usize::from(t.cell == "right");
                    let (v_resp, v_other) = if t.response == correct { (vc, 1.0) } else { (1.0, vc) };
                    lba_pdf(d, 0.8, 0.5, v_resp).ln() + lba_survival(d, 0.8, 0.5, v_other).ln()
                })
                .sum();
            ll + prior.log_density(alpha)
        })
        .collect();
    let oracle = GridDist::from_log_density(grid, &logf);

    let cfg = SamplerConfig {
        draws_per_stage: StageCounts::new(500, 500, 20_000),
        seed: 607,
        thin: 5,
        ..SamplerConfig::default()
    };
    let chain = run_chain(&data, &spec, &cfg).unwrap();
    let draws: Vec<f64> = chain.inference_draws().iter().map(|d| d.alpha[0]).collect();
    let ks = ks_distance(&draws, |x| oracle.cdf_at(x));
    outcome(
        ks < 0.02 && draws.len() == 20_000,
        format!("KS vs grid posterior {ks:.4} over {} draws (< 0.02)", draws.len()),
    )
}

fn desk_recovery() -> Outcome {
    let t = Instant::now();
    let cfg = StudyConfig::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for v in Version::ALL {
        let study = cfg.resolve(v).unwrap();
        let (_, rows) = run_recovery(&study).unwrap();
        let s = tally(v, &rows);
        let ok = match v {
            Version::Matched => s.covered as f64 >= 0.85 * s.elements as f64,
            Version::ZeroBetween => s.between_containing_zero >= 8,
            Version::UniformR => s.between_excluding_zero == s.between,
        };
        pass &= ok && s.elements == 21 && s.between == 9;
        parts.push(match v {
            Version::Matched => format!("matched covered {}/{}", s.covered, s.elements),
            Version::ZeroBetween => format!("zero_between contain 0 {}/{}", s.between_containing_zero, s.between),
            Version::UniformR => format!("uniform_r exclude 0 {}/{}", s.between_excluding_zero, s.between),
        });
    }
    let elapsed = t.elapsed();
    pass &= elapsed <= Duration::from_secs(30 * 60);
    outcome(pass, format!("{}; {:.0}s (<= 1800s)", parts.join(", "), elapsed.as_secs_f64()))
}

fn precision_gain() -> Outcome {
    let (spec, generator) = reference_generator(Scale::Desk).unwrap();
    let design = SimDesign {
        subjects: 30,
        trials_per_task: 600,
        generator,
        version: Version::Matched,
        target_r: 0.0,
        seed: 808,
    };
    let plan: Vec<(String, String, usize)> = [("out", 75), ("in", 300)]
        .iter()
        .flat_map(|&(task, n)| ["left", "right"].map(|cell| (task.to_string(), cell.to_string(), n)))
        .collect();
    let (data, _) = generate_dataset(&design, &spec, &plan).unwrap();
    let cfg = SamplerConfig {
        seed: 809,
        ..desk_sampler()
    };
    let joint = run_chain(&data, &spec, &cfg).unwrap();
    let independent: Vec<_> = ["out", "in"]
        .iter()
        .map(|task| {
            let sub = spec.single_task(task).unwrap();
            let own: Vec<TrialRecord> = data.iter().filter(|t| t.task == *task).cloned().collect();
            run_chain(&own, &sub, &cfg).unwrap()
        })
        .collect();
    let report = precision_compare(&joint, &independent).unwrap();
    let block = |b: &str| {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.block == b).collect();
        let joint_sd: Vec<f64> = rows.iter().map(|r| r.sd_joint).collect();
        let indep_sd: Vec<f64> = rows.iter().map(|r| r.sd_independent).collect();
        let change: Vec<f64> = rows.iter().map(|r| r.percent_change()).collect();
        (analysis::median(&joint_sd), analysis::median(&indep_sd), analysis::median(&change))
    };
    let (small_joint, small_indep, small_change) = block("out");
    let (_, _, large_change) = block("in");
    let pass = small_joint < small_indep && -small_change > -large_change;
    outcome(
        pass,
        format!(
            "small task median SD {small_joint:.4} joint vs {small_indep:.4} independent; median change small {small_change:+.1}% vs large {large_change:+.1}%"
        ),
    )
}

fn reliability_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for case in 0..400 {
        let d = rng.random_range(2..7);
        let n = rng.random_range(1..40);
        let base = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let spread = rng.random_range(0.0..1.0);
        let sigmas: Vec<DMatrix<f64>> = (0..n)
            .map(|_| {
                let m = &base + DMatrix::from_fn(d, d, |_, _| spread * rng.random_range(-1.0..1.0));
                &m * m.transpose() + DMatrix::identity(d, d) * 0.05
            })
            .collect();
        // every tenth case repeats one draw so the SD is exactly zero
        let sigmas = if case % 10 == 0 { vec![sigmas[0].clone(); n.max(2)] } else { sigmas };
        let names: Vec<String> = (0..d).map(|i| format!("p{i}")).collect();
        let s = correlation_summary_from(&sigmas, &names, &names).unwrap();
        for i in 0..d {
            for j in 0..d {
                let (m, sd) = (s.mean[(i, j)], s.sd[(i, j)]);
                let expect = i != j && m != 0.0 && m.abs() >= 3.0 * sd;
                checked += 1;
                mismatches += usize::from(s.reliable[(i, j)] != expect);
            }
        }
    }
    for _ in 0..10_000 {
        let m: f64 = rng.random_range(-1.0..1.0);
        let sd: f64 = rng.random_range(0.0..0.5);
        checked += 1;
        mismatches += usize::from(is_reliable(m, sd) != (m != 0.0 && m.abs() >= 3.0 * sd));
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over {checked} cells"))
}

fn bisect_probit(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if std_normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn textbook_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn descriptive_statistics() -> Outcome {
    let spec = fixtures::desk_model();
    // (subject, task, cell, response, rt); left is answered by accumulator 0, right by 1
    #[rustfmt::skip]
    let rows: &[(&str, &str, &str, usize, f64)] = &[
        ("a", "out", "left", 0, 0.512), ("a", "out", "right", 1, 0.634), ("a", "out", "left", 1, 0.701), ("a", "out", "right", 1, 0.455),
        ("a", "in", "left", 0, 0.603), ("a", "in", "right", 0, 0.822), ("a", "in", "left", 0, 0.577),
        ("b", "out", "left", 0, 0.431), ("b", "out", "right", 1, 0.398), ("b", "out", "left", 0, 0.467),
        ("b", "in", "left", 0, 0.489), ("b", "in", "right", 1, 0.533), ("b", "in", "right", 1, 0.508), ("b", "in", "left", 0, 0.471),
        ("c", "out", "left", 1, 0.905), ("c", "out", "right", 0, 0.861), ("c", "out", "left", 0, 0.788), ("c", "out", "right", 1, 0.944),
        ("c", "in", "left", 1, 0.998), ("c", "in", "right", 1, 1.021), ("c", "in", "left", 0, 0.877),
        ("d", "out", "left", 0, 0.622), ("d", "out", "right", 1, 0.587), ("d", "out", "left", 0, 0.645), ("d", "out", "right", 0, 0.701),
        ("d", "in", "left", 0, 0.655), ("d", "in", "right", 1, 0.690), ("d", "in", "left", 1, 0.734), ("d", "in", "right", 1, 0.612),
        ("e", "out", "left", 0, 0.733), ("e", "out", "right", 1, 0.802), ("e", "out", "left", 0, 0.765),
        ("e", "in", "left", 0, 0.811), ("e", "in", "right", 0, 0.756), ("e", "in", "left", 0, 0.843), ("e", "in", "right", 1, 0.790),
    ];
    let data: Vec<TrialRecord> = rows
        .iter()
        .map(|&(s, task, cell, response, rt)| TrialRecord {
            subject: s.into(),
            task: task.into(),
            cell: cell.into(),
            response,
            rt,
        })
        .collect();
    let summary = descriptive_cross_task(&data, &spec).unwrap();

    let subjects = ["a", "b", "c", "d", "e"];
    let per = |task: &str| -> (Vec<f64>, Vec<f64>) {
        subjects
            .iter()
            .map(|s| {
                let mine: Vec<_> = rows.iter().filter(|r| r.0 == *s && r.1 == task).collect();
                let n = mine.len() as f64;
                let rt = mine.iter().map(|r| r.4).sum::<f64>() / n;
                let correct = mine.iter().filter(|r| r.3 == usize::from(r.2 == "right")).count() as f64;
                let acc = (correct / n).clamp(0.5 / n, 1.0 - 0.5 / n);
                (rt, bisect_probit(acc))
            })
            .unzip()
    };
    let (rt_out, pr_out) = per("out");
    let (rt_in, pr_in) = per("in");
    let pair = &summary.pairs[0];
    let err_rt = (pair.r_rt.unwrap() - textbook_pearson(&rt_out, &rt_in)).abs();
    let err_pr = (pair.r_probit.unwrap() - textbook_pearson(&pr_out, &pr_in)).abs();
    let mut err_stats: f64 = 0.0;
    for st in &summary.stats {
        let k = subjects.iter().position(|s| *s == st.subject).unwrap();
        let (rt, pr) = if st.task == "out" { (rt_out[k], pr_out[k]) } else { (rt_in[k], pr_in[k]) };
        err_stats = err_stats.max((st.mean_rt - rt).abs()).max((st.probit.unwrap() - pr).abs());
    }
    let fixture_ok = err_rt < 1e-12 && err_pr < 1e-12 && err_stats < 1e-12 && summary.stats.len() == 10;

    // strong between-task threshold correlations in the three-task model
    let spec = fixtures::application2();
    let d = spec.dim();
    let names = spec.param_names();
    let is_threshold: Vec<bool> = names.iter().map(|n| n.split('.').nth(1).unwrap().starts_with("b_")).collect();
    let sd: Vec<f64> = is_threshold.iter().map(|&b| if b { 0.3 } else { 0.05 }).collect();
    let sigma = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            sd[i] * sd[i]
        } else if is_threshold[i] && is_threshold[j] {
            0.9 * sd[i] * sd[j]
        } else {
            0.0
        }
    });
    let mu = fixtures::APPLICATION2_GROUP_MEANS.iter().map(|m| m.ln()).collect();
    let design = SimDesign {
        subjects: 40,
        trials_per_task: 200,
        generator: generator_state(mu, sigma).unwrap(),
        version: Version::Matched,
        target_r: 0.0,
        seed: 1010,
    };
    let (sim, _) = generate_dataset(&design, &spec, &simstudy::even_plan(&spec, 200)).unwrap();
    let sim_summary = descriptive_cross_task(&sim, &spec).unwrap();
    let rs: Vec<f64> = sim_summary.pairs.iter().map(|p| p.r_rt.unwrap_or(f64::NAN)).collect();
    let positive = rs.len() == 3 && rs.iter().all(|r| *r > 0.0);

    outcome(
        fixture_ok && positive,
        format!(
            "fixture max error rt-r {err_rt:.1e}, probit-r {err_pr:.1e}, stats {err_stats:.1e} (< 1e-12); simulated RT correlations {}",
            rs.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn determinism() -> Outcome {
    let spec = fixtures::tiny_model();
    let plan = simstudy::even_plan(&spec, 60);
    let mut data = Vec::new();
    for (s, alpha) in [[0.0, -0.5, 1.0, -1.6], [0.2, -0.4, 0.8, -1.5], [-0.1, -0.6, 1.1, -1.7]].iter().enumerate() {
        data.extend(simstudy::simulate_subject(&spec, &simstudy::subject_id(s), alpha, &plan, 1111).unwrap());
    }
    let cfg = SamplerConfig {
        particles_per_stage: StageCounts::new(20, 20, 10),
        draws_per_stage: StageCounts::new(40, 40, 60),
        seed: 1112,
        ..SamplerConfig::default()
    };
    let bytes = |dir: &std::path::Path| {
        let c = run_chain(&data, &spec, &cfg).unwrap();
        chain::save(dir, &c).unwrap();
        std::fs::read(dir.join(chain::CHAIN_FILE)).unwrap()
    };
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (b1, b2) = (bytes(d1.path()), bytes(d2.path()));
    outcome(
        b1 == b2 && !b1.is_empty(),
        format!("two runs wrote {} and {} bytes, identical: {}", b1.len(), b2.len(), b1 == b2),
    )
}
