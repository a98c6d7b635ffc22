//! Regenerates the committed n = 10 fixture set and its exhaustive fronts.
//!
//! cargo run -p fedeploy-core --example make_fixtures -- crates/core/tests/fixtures

use std::path::PathBuf;

use fedeploy_core::ga::check_solvable;
use fedeploy_core::synthetic::{random_instance, InstanceShape};
use fedeploy_core::{enumerate_pareto, ProblemInstanceF64};

fn fixture_name(k: usize) -> String {
    if k == 0 {
        "small10".to_string()
    } else {
        format!("small10_{k}")
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/tests/fixtures".into())
        .into();
    std::fs::create_dir_all(&dir)?;
    let shape = InstanceShape::default();
    let mut seed = 1000u64;
    for k in 0..10 {
        let inst: ProblemInstanceF64 = loop {
            let candidate = random_instance(&shape, seed);
            seed += 1;
            if check_solvable(&candidate).is_ok() {
                break candidate;
            }
        };
        let name = fixture_name(k);
        inst.save(dir.join(format!("{name}.json")))?;
        let front = enumerate_pareto(&inst)?;
        std::fs::write(
            dir.join(format!("{name}.front.json")),
            serde_json::to_string_pretty(&front)?,
        )?;
        println!("{name}: seed {} front {}", seed - 1, front.len());
    }
    Ok(())
}
