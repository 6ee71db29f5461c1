//! Mapping log-scale random effects onto accumulators through a model
//! document, and checking a dataset against it.

use accjoint::design::{resolve, validate_spec, SubjectEffects};
use accjoint::fixtures;
use accjoint::simstudy::{even_plan, simulate_subject};

fn main() -> accjoint::Result<()> {
    let spec = fixtures::application1();
    println!("{} coordinates over tasks {:?}", spec.dim(), spec.task_names());
    for (name, block) in spec.param_names().iter().zip(spec.block_labels()) {
        print!("{name}[{block}] ");
    }
    println!();

    let alpha: Vec<f64> = fixtures::APPLICATION1_GROUP_MEANS.iter().map(|m| m.ln()).collect();
    let fx = SubjectEffects::new("s1", alpha.clone());
    for cell in ["accuracy_left", "neutral_right", "missing_cell"] {
        match resolve(&spec, "out", cell, &fx) {
            Ok(accs) => {
                for (k, a) in accs.iter().enumerate() {
                    println!(
                        "out/{cell} accumulator {k}: b_gap {:.2} A {:.2} v {:.2} tau {:.2}",
                        a.b_gap, a.start_range, a.drift, a.non_decision
                    );
                }
            }
            Err(e) => println!("out/{cell}: {e}"),
        }
    }

    let mut data = simulate_subject(&spec, "s1", &alpha, &even_plan(&spec, 60), 3)?;
    data[0].cell = "not_a_cell".into();
    let report = validate_spec(&spec, &data);
    println!("coverage ok: {}", report.is_ok());
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
