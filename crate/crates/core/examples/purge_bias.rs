//! First-passage times with and without path purging. Purging keeps the
//! particles furthest along the tilt direction, so the hitting time barely
//! moves while the population stays bounded. A very small `q_c` can lose
//! the whole front near the target and miss the ball altogether.

use brw_fpt::engine::{FptConfig, FptSimulator, PurgeRule};
use brw_fpt::seeding::ReplicaKey;
use brw_fpt::{JumpModel, OffspringLaw};

struct Run {
    mean: f64,
    peak: usize,
    misses: u64,
}

fn run(sim: &FptSimulator, replicas: u64) -> brw_fpt::Result<Run> {
    let (mut total, mut hits, mut peak) = (0, 0, 0);
    for r in 0..replicas {
        let out = sim.run_conditioned(ReplicaKey::new(15, 0, r), 1000)?;
        if let Some(tau) = out.tau() {
            total += tau;
            hits += 1;
        }
        peak = peak.max(out.peak_size);
    }
    Ok(Run {
        mean: total as f64 / hits.max(1) as f64,
        peak,
        misses: replicas - hits,
    })
}

fn main() -> brw_fpt::Result<()> {
    let model = JumpModel::standard_gaussian(3)?;
    let law = OffspringLaw::classical(0.0, 0.5, 0.5)?;
    let x = 10.0;
    let replicas = 200;

    let unpurged = FptSimulator::new(&model, law, FptConfig::new(x, 200).unpurged())?;
    let base = run(&unpurged, replicas)?;
    println!("unpurged:    mean tau {:.3}, peak population {}", base.mean, base.peak);
    for q_c in [200, 2000, 9000] {
        let purged = FptSimulator::new(&model, law, FptConfig::new(x, 200).with_purge(PurgeRule::new(q_c)?))?;
        let p = run(&purged, replicas)?;
        println!(
            "q_c = {q_c:>5}: mean tau {:.3}, peak population {}, bias {:+.2}%, misses {}",
            p.mean,
            p.peak,
            100.0 * (p.mean - base.mean) / base.mean,
            p.misses
        );
    }
    Ok(())
}
