//! Linear images of a spherically symmetric law: the speed and tilt of
//! `T ζ` follow from those of `ζ` through `‖T⁻¹ e₁‖`.

use brw_fpt::{apply_linear_transform, JumpModel, RateFunction};
use nalgebra::DMatrix;

fn main() -> brw_fpt::Result<()> {
    let rho = 1.6;
    let t = DMatrix::from_row_slice(3, 3, &[1.5, 0.4, 0.0, -0.3, 1.0, 0.6, 0.2, 0.0, 0.8]);
    let scale = t.clone().try_inverse().expect("T is invertible").column(0).norm();

    for (name, base) in [
        ("standard gaussian", JumpModel::standard_gaussian(3)?),
        ("uniform sphere", JumpModel::uniform_sphere(3)?),
    ] {
        let image = apply_linear_transform(&base, t.clone())?;
        let kb = RateFunction::full(&base).solve_c1_hat(rho)?;
        let ki = RateFunction::full(&image).solve_c1_hat(rho)?;
        println!("{name}");
        println!("  1/c1_hat(T zeta)            = {:.10}", 1.0 / ki.c1_hat);
        println!("  |T^-1 e1| / c1_hat(zeta)    = {:.10}", scale / kb.c1_hat);
        println!("  c1_hat * d1 I   (T zeta)    = {:.10}", ki.c1_hat * ki.c2_vec[0]);
        println!("  c1_hat * d1 I   (zeta)      = {:.10}", kb.c1_hat * kb.c2_vec[0]);
    }
    Ok(())
}
