//! The exact DCF(n) transition matrix and its reversibility.

use splitmerge::chains::{check_detailed_balance, exact_kernel, stationarity_violation};

fn main() -> splitmerge::Result<()> {
    let kernel = exact_kernel(4)?;
    kernel.write_csv(std::io::stdout())?;
    for n in 2..=10 {
        let k = exact_kernel(n)?;
        println!(
            "n = {n:>2}: {:>2} states, detailed-balance gap {}, stationarity gap {}",
            k.states().len(),
            check_detailed_balance(&k)?,
            stationarity_violation(&k)?
        );
    }
    Ok(())
}
