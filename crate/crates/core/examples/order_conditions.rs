//! Stiff order-condition residuals of every method on a random matrix triple.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use merb::oracle::{check_order_conditions, check_weak_order_conditions, DenseMatrix};
use merb::MerbMethod;

fn random(rng: &mut ChaCha8Rng, d: usize) -> merb::Result<DenseMatrix> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let norm = a.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    DenseMatrix::new(a / norm)
}

fn main() -> merb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (z, k, m) = (random(&mut rng, 5)?, random(&mut rng, 5)?, random(&mut rng, 5)?);
    for order in 3..=6 {
        let method = MerbMethod::by_order(order).unwrap();
        println!("{}:", method.name());
        let weak = check_weak_order_conditions(&method)?;
        for ((cond, r), (_, w)) in check_order_conditions(&method, &z, &k, &m)?.into_iter().zip(weak) {
            println!("  condition {cond}: residual {r:.2e} (at Z = 0: {w:.2e})");
        }
    }
    Ok(())
}
