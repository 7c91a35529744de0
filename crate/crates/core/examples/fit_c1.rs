//! Recovers the front speed from simulated first-passage means by fitting
//! `E[τ_x] = x / c1 + B log x + C`, then compares with the solver.

use brw_fpt::engine::{FptConfig, FptSimulator, PurgeRule};
use brw_fpt::seeding::ReplicaKey;
use brw_fpt::stats::{fit_linear_log, summarize, tightness_report, FptSampleSet};
use brw_fpt::{JumpModel, OffspringLaw, RateFunction};

fn main() -> brw_fpt::Result<()> {
    let model = JumpModel::uniform_sphere(3)?;
    let law = OffspringLaw::classical(0.0, 0.7, 0.3)?;
    let c1 = RateFunction::full(&model).solve_c1_hat(law.rho())?.c1_hat;

    let mut sets = Vec::new();
    for (i, x) in [8.0, 16.0, 24.0, 32.0].into_iter().enumerate() {
        let config = FptConfig::new(x, 10 * (x / c1).ceil() as u64).with_purge(PurgeRule::new(9000)?);
        let sim = FptSimulator::new(&model, law, config)?;
        let taus = (0..150)
            .map(|r| {
                let out = sim.run_conditioned(ReplicaKey::new(9, i as u32, r), 1000)?;
                Ok(out.tau().expect("max_steps is generous"))
            })
            .collect::<brw_fpt::Result<Vec<u64>>>()?;
        let set = FptSampleSet::new(x, taus);
        let s = summarize(&set)?;
        println!("x = {x:>4}: mean {:.2}, std {:.2}", s.mean, s.std);
        sets.push(set);
    }

    let points: Vec<(f64, f64)> = sets
        .iter()
        .map(|s| (s.x, s.samples.iter().sum::<u64>() as f64 / s.samples.len() as f64))
        .collect();
    let fit = fit_linear_log(&points)?;
    println!("fit: 1/c1 = {:.4}, B = {:.3}, C = {:.3}", fit.inv_c1, fit.b, fit.c);
    println!("c1 fitted = {:.4}, solver = {c1:.4}", fit.c1_hat_empirical);
    println!("max std ratio = {:.3}", tightness_report(&sets)?.max_ratio);
    Ok(())
}
