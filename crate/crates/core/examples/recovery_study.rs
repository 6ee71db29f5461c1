//! Desk-scale covariance recovery: simulate each regime, refit, and report
//! interval coverage of the generating covariance.
//!
//! Run with `cargo run --release --example recovery_study [version]`.

use std::time::Instant;

use accjoint::simstudy::{run_recovery, tally, StudyConfig, Version};

fn main() -> accjoint::Result<()> {
    let versions: Vec<Version> = match std::env::args().nth(1) {
        Some(v) => vec![v.parse()?],
        None => Version::ALL.to_vec(),
    };
    let cfg = StudyConfig::default();
    for v in versions {
        let study = cfg.resolve(v)?;
        let t = Instant::now();
        let (_, rows) = run_recovery(&study)?;
        for r in &rows {
            println!(
                "{:<16} {:<9} true {:+.4}  mean {:+.4}  [{:+.4}, {:+.4}]{}",
                r.element,
                r.kind,
                r.generating,
                r.posterior_mean,
                r.lo95,
                r.hi95,
                if r.covers { "" } else { "  MISS" }
            );
        }
        let t_ = tally(v, &rows);
        println!(
            "{}: covered {}/{}, between containing zero {}/{}, excluding zero {}/{} ({:.0?})",
            v.as_str(),
            t_.covered,
            t_.elements,
            t_.between_containing_zero,
            t_.between,
            t_.between_excluding_zero,
            t_.between,
            t.elapsed()
        );
    }
    Ok(())
}
