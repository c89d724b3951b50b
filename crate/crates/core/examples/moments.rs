//! Moment sums under PD(1) and the one-step stationarity residual of CCF.

use splitmerge::diagnostics::{gem_moment_report, stationarity_residual};
use splitmerge::samplers::{sample_gem, RngStream};

fn main() -> splitmerge::Result<()> {
    for alpha in [0.5, 0.6, 0.8, 1.5] {
        let r = gem_moment_report(alpha, 10_000, 1, 1e-9)?;
        println!(
            "alpha {alpha}: mean {:.4} +- {:.4} (1/alpha = {:.4}), dust bound {:.1e}",
            r.sample_mean,
            r.std_error,
            1.0 / alpha,
            r.dust_bound
        );
    }
    let gem = |rng: &mut RngStream| sample_gem(rng, 1e-9);
    for m in 1..=6 {
        let est = stationarity_residual(gem, m, 20_000, 2)?;
        println!("W_{m} one-step residual {:+.5} +- {:.5}", est.mean, est.std_error);
    }
    Ok(())
}
