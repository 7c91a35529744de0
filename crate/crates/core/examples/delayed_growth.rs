//! Delayed branching: growth rate of the ordinary-particle count against the
//! root of `x² − (p1 + p3) x − 2 p3 (1 − p0)`, and the slower front it implies.

use brw_fpt::asymptotics::{delayed_constants, delayed_rho, predict_a, predict_a_tilde};
use brw_fpt::engine::{growth_rate, ordinary_count_trajectory};
use brw_fpt::seeding::replica_rng;
use brw_fpt::{JumpModel, OffspringLaw, RateFunction};

fn main() -> brw_fpt::Result<()> {
    let model = JumpModel::uniform_sphere(3)?;
    for (p0, p3) in [(0.0, 0.1), (0.004, 0.3), (0.0, 1.0)] {
        let p1 = 1.0 - p0 - p3;
        let delayed = OffspringLaw::delayed(p0, p1, p3)?;
        let classical = OffspringLaw::classical(p0, p1, p3)?;

        let mut rng = replica_rng(42);
        let mut rates = Vec::new();
        while rates.len() < 200 {
            let traj = ordinary_count_trajectory(&delayed, 200, &mut rng);
            rates.extend(growth_rate(&traj, 100, 200));
        }
        let measured = rates.iter().sum::<f64>() / rates.len() as f64;

        let (c1_tilde, c2_tilde) = delayed_constants(&model, &delayed)?;
        let c1 = RateFunction::marginal(&model).solve_c1(classical.rho())?;
        println!("p0 = {p0}, p1 = {p1:.3}, p3 = {p3}");
        println!(
            "  rho = {:.5}  rho_tilde = {:.5}  measured = {measured:.5}",
            classical.rho(),
            delayed_rho(p0, p1, p3)?
        );
        println!("  c1 = {c1:.5}  c1_tilde = {c1_tilde:.5}  c2_tilde = {c2_tilde:.5}");
        let c2 = RateFunction::marginal(&model).grad_i(&[c1])?[0];
        for x in [10.0, 30.0] {
            let a = predict_a(x, c1, c2, 3)?.total;
            let a_tilde = predict_a_tilde(x, &model, &delayed, 3)?.total;
            println!("  x = {x}: A = {a:.2}  A_tilde = {a_tilde:.2}");
        }
    }
    Ok(())
}
