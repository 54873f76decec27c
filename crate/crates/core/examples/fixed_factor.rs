//! Best `U` for a fixed `V`, one independent exchange per row.
//!
//! Run with `cargo run --example fixed_factor`.

use chebyshev_lowrank::{fixed_factor_solve, Matrix, RemezOptions};

fn main() -> chebyshev_lowrank::Result<()> {
    // rows (0,1,2) and (2,1,0) against the constant column
    let a = Matrix::from_rows(&[[0.0, 1.0, 2.0], [2.0, 1.0, 0.0]])?;
    let v = Matrix::column(&[1.0, 1.0, 1.0]);
    let sol = fixed_factor_solve(&a, &v, &RemezOptions::default(), None)?;
    println!("U = {:?}", sol.u);
    println!("error = {}", sol.mu);
    for (i, row) in sol.per_row.iter().enumerate() {
        println!("row {}: active {:?} after {} sets", i, row.active_set, row.iterations);
    }

    // exact data is recovered
    let u0 = Matrix::from_rows(&[[1.0, -2.0], [0.5, 3.0], [2.0, 0.0]])?;
    let v = Matrix::from_rows(&[[1.0, 0.0], [0.3, 1.0], [-1.0, 2.0], [0.7, -0.4]])?;
    let exact = fixed_factor_solve(&u0.matmul_transpose(&v)?, &v, &RemezOptions::default(), None)?;
    println!("exact rank-2 data: error = {:.3e}", exact.mu);
    Ok(())
}
