//! Young-diagram operations behind the Murnaghan-Nakayama rule.

use splitmerge::partitions::{Cell, IntegerPartition};
use splitmerge::spectral::character;

fn main() -> splitmerge::Result<()> {
    let lambda = IntegerPartition::new(vec![8, 8, 7, 7, 4, 3, 1, 1])?;
    println!("lambda            {lambda}");
    println!("conjugate         {}", lambda.conjugate());
    println!("diagonal length   {}", lambda.diagonal_length());

    let cell = Cell::new(2, 3);
    let rim = lambda.rim_segment(cell)?;
    println!("rim segment at {cell}: {} cells, hook length {}", rim.len(), lambda.hook_length(cell)?);
    println!("after stripping   {}", lambda.strip_rim(cell)?);

    let gamma = IntegerPartition::new(vec![5, 3, 1])?;
    for mu in [vec![9], vec![8, 1], vec![3, 3, 3], vec![1; 9]] {
        let mu = IntegerPartition::new(mu)?;
        println!("chi_{mu}({gamma}) = {}", character(&mu, &gamma)?);
    }
    Ok(())
}
