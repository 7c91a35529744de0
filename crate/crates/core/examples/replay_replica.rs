//! Every replica is a pure function of `(master seed, x index, replica,
//! restart)`, so any row of a sweep can be re-run on its own.

use brw_fpt::runner::{parse_config_str, replay, run_replicas};
use std::path::Path;

const CONFIG: &str = r#"
kind = "fpt_sweep"
seed = 99
samples = 20
x_values = [6.0, 12.0]
workers = 2

[model]
kind = "uniform_sphere"
d = 3

[offspring]
p0 = 0.05
p1 = 0.55
p3 = 0.4
mode = "delayed"
"#;

fn main() -> brw_fpt::Result<()> {
    let plan = parse_config_str(CONFIG, Path::new("replay.toml"))?;
    let records = run_replicas(&plan)?;
    let record = &records[records.len() - 3];
    let original = record.outcome.as_ref().expect("replica succeeded");
    println!(
        "x = {}, replica {}: {:?} after {} restarts",
        record.x, record.replica, original.status, original.restarts
    );

    let again = replay(&plan, record.x_index, record.replica, original.restarts)?;
    println!("replayed: {:?}", again.status);
    assert_eq!(&again, original);
    Ok(())
}
