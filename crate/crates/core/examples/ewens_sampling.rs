//! Cycle types of uniform permutations against the exact Ewens weights.

use splitmerge::chains::{empirical_counts, ewens_pmf};
use splitmerge::diagnostics::chi_square_p_value;
use splitmerge::partitions::IntegerPartition;
use splitmerge::samplers::{sample_ewens, RngStream};

fn main() -> splitmerge::Result<()> {
    let n = 5;
    let pi = ewens_pmf(n)?;
    let draw = |l: &IntegerPartition, rng: &mut RngStream| sample_ewens(l.n(), rng);
    let (states, counts) = empirical_counts(draw, &IntegerPartition::single(n), 1, 100_000, 1)?;
    println!("{:<12} {:>10} {:>10}", "type", "exact", "sampled");
    for ((l, w), c) in states.iter().zip(pi.to_f64()).zip(&counts) {
        println!("{:<12} {:>10.5} {:>10.5}", l.to_string(), w, *c as f64 / 1e5);
    }
    println!("chi-square p-value {:.3}", chi_square_p_value(&counts, &pi.to_f64()));
    Ok(())
}
