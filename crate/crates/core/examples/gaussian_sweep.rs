//! A small first-passage sweep through the runner: standard Gaussian jumps in
//! three dimensions, binary branching on average, path purging at `q_c`.
//!
//! ```text
//! cargo run --release --example gaussian_sweep -- [samples]
//! ```

use brw_fpt::runner::{parse_config_str, run_experiment};
use std::path::Path;

const CONFIG: &str = r#"
kind = "fpt_sweep"
seed = 2024
samples = 200
x_values = [5.0, 10.0, 15.0]
q_c = 4000
output = "target/example-output/gaussian_sweep"

[model]
kind = "gaussian"
d = 3
covariance = [1, 0, 0, 0, 1, 0, 0, 0, 1]

[offspring]
p1 = 0.5
p3 = 0.5
"#;

fn main() -> brw_fpt::Result<()> {
    let mut plan = parse_config_str(CONFIG, Path::new("gaussian_sweep.toml"))?;
    if let Some(n) = std::env::args().nth(1) {
        plan.samples = n.parse().expect("samples must be an integer");
    }
    let result = run_experiment(&plan)?;

    println!(
        "{:>6} {:>6} {:>9} {:>7} {:>7} {:>9}",
        "x", "hits", "mean", "std", "median", "A(x)"
    );
    for s in &result.summaries {
        let Some(summary) = &s.summary else { continue };
        println!(
            "{:>6} {:>6} {:>9.3} {:>7.3} {:>7} {:>9.3}",
            s.x,
            s.n_hits,
            summary.mean,
            summary.std,
            summary.median(),
            s.prediction.unwrap_or(f64::NAN)
        );
    }
    for f in &result.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
