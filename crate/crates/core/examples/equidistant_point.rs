//! Best equidistant point of a 3x2 system, both ways.
//!
//! Run with `cargo run --example equidistant_point`.

use chebyshev_lowrank::equidistant::{alternates, equidistant_by_determinants, equidistant_by_signs};
use chebyshev_lowrank::Matrix;

fn main() -> chebyshev_lowrank::Result<()> {
    let v = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])?;
    let a = [0.0, 0.0, 1.0];

    let det = equidistant_by_determinants(&v, &a)?;
    let sig = equidistant_by_signs(&v, &a)?;
    let d = det.cofactors.clone().unwrap();

    println!("deleted-row determinants {:?}", d);
    println!("determinant route: u = {:?}, rho = {}", det.u, det.rho);
    println!("sign route:        u = {:?}, rho = {}", sig.u, sig.rho);
    println!("null vector        {:?}", sig.null_vector.unwrap());

    let w = det.residual(&v, &a);
    println!("residual {:?}, alternates: {}", w, alternates(&w, &d));
    Ok(())
}
