//! The coupled CCF / DCF(n) construction from a GEM draw.

use splitmerge::coupling::run_coupling;
use splitmerge::samplers::{sample_gem, RngStream};

fn main() -> splitmerge::Result<()> {
    let n = 1000;
    let mut rng = RngStream::new(1, 0);
    let p = sample_gem(&mut rng, 1e-9)?;
    let trace = run_coupling(&p, n, 40, &mut rng)?;
    println!("N_l(0) = {}, rho_0 = {:.3}", trace.initial_parts, trace.rho0());
    for r in trace.records.iter().step_by(5) {
        println!("k = {:>2}  rho = {:>7.3}  e = {}  |p - l/n|_1 = {:.5}", r.k, r.rho, u8::from(r.e), r.l1_gap);
    }
    match trace.tau {
        Some(tau) => println!("decoupled at step {tau}"),
        None => println!("still coupled after {} steps", trace.records.len() - 1),
    }
    println!("bound violations: {}", trace.bound_violations().len());
    Ok(())
}
