//! Particles near the maximum of a one-dimensional walk: the number within
//! `x` of `m_n` grows like `x e^{c2 x}`.

use brw_fpt::engine::{frontier_position, run_frontier_count, FrontierConfig};
use brw_fpt::seeding::ReplicaKey;
use brw_fpt::stats::ols_slope;
use brw_fpt::{JumpModel, Marginal, OffspringLaw};

fn main() -> brw_fpt::Result<()> {
    let model = JumpModel::product(vec![Marginal::Uniform { half_width: 1.0 }])?;
    let law = OffspringLaw::ternary(0.1)?;
    let steps = 64;
    let offsets: Vec<f64> = (2..=8).map(f64::from).collect();
    let config = FrontierConfig::new(steps, offsets.clone());
    let (m_n, c1, c2) = frontier_position(&model, law.rho(), steps)?;
    println!("n = {steps}, c1 = {c1:.5}, c2 = {c2:.5}, m_n = {m_n:.3}");

    let replicas = 100;
    let mut totals = vec![0u64; offsets.len()];
    for r in 0..replicas {
        let counts = run_frontier_count(&model, &law, &config, ReplicaKey::new(1, 0, r))?;
        for (t, (_, c)) in totals.iter_mut().zip(&counts.counts) {
            *t += c;
        }
    }
    let mut points = Vec::new();
    for (x, t) in offsets.iter().zip(&totals) {
        let mean = *t as f64 / replicas as f64;
        println!("x = {x}: mean count {mean:.2}");
        points.push((*x, (mean / x).ln()));
    }
    let slope = ols_slope(&points)?;
    println!("slope of log(count / x) = {slope:.4} ({:.3} c2)", slope / c2);
    Ok(())
}
