//! Exact and simulated total variation to the Ewens law for DCF(8).
//!
//! The chain has period two, so from a single class the distance levels off
//! at 1/2 instead of vanishing.

use std::sync::Arc;

use num_traits::ToPrimitive;
use splitmerge::chains::{
    dcf_step, empirical_distribution, ewens_pmf_over, exact_kernel, ExactDistribution,
};
use splitmerge::diagnostics::{tv_distance, tv_distance_exact};
use splitmerge::partitions::IntegerPartition;

fn main() -> splitmerge::Result<()> {
    let n = 8;
    let kernel = exact_kernel(n)?;
    let pi = ewens_pmf_over(Arc::clone(kernel.states()))?;
    let start = IntegerPartition::single(n);
    let mut mu = ExactDistribution::point_mass(Arc::clone(kernel.states()), &start)?;
    for k in 0..=12 {
        let exact = tv_distance_exact(&mu, &pi)?.to_f64().unwrap_or(f64::NAN);
        let sim = empirical_distribution(dcf_step, &start, k, 20_000, 5)?;
        let mc = tv_distance(&sim, &pi.to_f64())?;
        println!("k = {k:>2}: exact TV {exact:.5}   simulated {mc:.5}");
        mu = kernel.push_forward(&mu)?;
    }
    Ok(())
}
