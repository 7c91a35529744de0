//! Speed constants and first-passage predictions for a few jump laws.
//!
//! ```text
//! cargo run --example theory_constants -- 2.0
//! ```

use brw_fpt::asymptotics::{predict_a, predict_a_hat};
use brw_fpt::{JumpModel, Marginal, RateFunction};

fn main() -> brw_fpt::Result<()> {
    let rho: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(2.0), |s| s.parse())
        .expect("rho must be a number");
    let models = [
        ("uniform sphere d=3", JumpModel::uniform_sphere(3)?),
        ("standard gaussian d=3", JumpModel::standard_gaussian(3)?),
        (
            "correlated gaussian",
            JumpModel::gaussian_row_major(3, &[1.0, 0.5, 0.25, 0.5, 1.5, 0.5, 0.25, 0.5, 0.5])?,
        ),
        (
            "uniform x gaussian x two-point",
            JumpModel::product(vec![
                Marginal::Uniform { half_width: 1.0 },
                Marginal::Gaussian { variance: 2.0 },
                Marginal::TwoPoint { a: 0.5 },
            ])?,
        ),
    ];

    println!("rho = {rho}");
    for (name, model) in &models {
        let k = RateFunction::full(model).solve_c1_hat(rho)?;
        let normal = RateFunction::full(model).purge_normal(rho)?;
        println!("\n{name}");
        println!("  c1 = {:.8}  c2 = {:.8}", k.c1_marginal, k.c2_marginal);
        println!("  c1_hat = {:.8}  c2_vec = {:.6?}", k.c1_hat, k.c2_vec);
        println!("  purge normal = {normal:.6?}");
        for x in [10.0, 20.0, 40.0] {
            let a = predict_a(x, k.c1_marginal, k.c2_marginal, model.dim())?;
            let a_hat = predict_a_hat(x, &k, model.dim())?;
            println!("  x = {x:>4}: A = {:>8.3}  A_hat = {:>8.3}", a.total, a_hat.total);
        }
    }
    Ok(())
}
