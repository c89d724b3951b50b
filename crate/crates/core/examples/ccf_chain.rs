//! A long CCF run from the trivial partition; the moment sum settles near 1/alpha.

use splitmerge::chains::ccf_step_in_place;
use splitmerge::diagnostics::moment_sum;
use splitmerge::partitions::ContinuousPartition;
use splitmerge::samplers::RngStream;

fn main() -> splitmerge::Result<()> {
    let alpha = 0.6;
    let mut p = ContinuousPartition::unit();
    let mut rng = RngStream::new(13, 0);
    let mut window = 0.0;
    for k in 1..=100_000 {
        ccf_step_in_place(&mut p, &mut rng);
        window += moment_sum(&p, alpha)?;
        if k % 10_000 == 0 {
            println!("k = {k:>6}: {:>5} parts, largest {:.4}, mean sum p^{alpha} over window {:.4}", p.len(), p.part(1), window / 1e4);
            window = 0.0;
        }
    }
    println!("target 1/alpha = {:.4}", 1.0 / alpha);
    Ok(())
}
