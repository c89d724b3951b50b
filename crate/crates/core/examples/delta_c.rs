//! Decay of Delta_C(k) = P(X_k in nC) - pi(nC) for DCF(8) started at (4,4).

use std::sync::Arc;

use num_traits::ToPrimitive;
use splitmerge::chains::ExactDistribution;
use splitmerge::partitions::{CylinderSet, IntegerPartition};
use splitmerge::spectral::SpectralModel;

fn main() -> splitmerge::Result<()> {
    let model = SpectralModel::new(8)?;
    let start = ExactDistribution::point_mass(Arc::clone(model.states()), &IntegerPartition::new(vec![4, 4])?)?;
    for spec in ["0.6,0.7", "0.35,0.4;0.35,0.4", "0.55,0.9"] {
        let cylinder = CylinderSet::parse(spec)?;
        let seq = model.delta_c_sequence(&start, &cylinder, 60)?;
        println!("C = {spec}");
        for k in [0, 1, 2, 5, 10, 20, 40, 59, 60] {
            println!("  k = {k:>2}: {:+.3e}", seq[k].to_f64().unwrap_or(f64::NAN));
        }
    }
    // the last cylinder only holds (7,1) at n = 8, so parity keeps Delta near +-1/7
    Ok(())
}
