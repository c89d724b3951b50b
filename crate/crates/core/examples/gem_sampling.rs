//! Poisson-Dirichlet(1) draws by stick breaking, and a few of their statistics.

use splitmerge::diagnostics::{interval_count, moment_sum, w_stat};
use splitmerge::samplers::{sample_gem, RngStream};

fn main() -> splitmerge::Result<()> {
    let mut rng = RngStream::new(2024, 0);
    let p = sample_gem(&mut rng, 1e-9)?;
    println!("{} parts, dust {:.2e}", p.len(), p.dust());
    for (i, x) in p.parts().iter().take(6).enumerate() {
        println!("  p_{} = {x:.6}", i + 1);
    }
    println!("sum p^0.6 = {:.4}", moment_sum(&p, 0.6)?);
    println!("W_3 = {:.4}", w_stat(&p, 3)?);
    let counts: Vec<usize> = (0..10).map(|m| interval_count(&p, m)).collect();
    println!("dyadic counts J_0..J_9: {counts:?}");
    Ok(())
}
