//! φ-functions of a small matrix via the augmented-matrix exponential.

use merb::oracle::{phi_stack, DenseMatrix};

fn main() -> merb::Result<()> {
    let z = DenseMatrix::from_row_slice(2, &[-1.0, 2.0, -2.0, -1.0])?;
    let stack = phi_stack(&z, 4)?;
    for k in 0..=4 {
        println!("φ_{k}(Z) =\n{:.6}", stack.get(k));
    }
    println!("recurrence residual {:.2e}", stack.recurrence_residual(&z));

    // scalar: φ_1(1) = e - 1
    let one = phi_stack(&DenseMatrix::from_row_slice(1, &[1.0])?, 1)?;
    println!("φ_1(1) = {:.15} (e - 1 = {:.15})", one.get(1)[(0, 0)], std::f64::consts::E - 1.0);
    Ok(())
}
