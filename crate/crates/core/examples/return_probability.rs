//! Return probabilities to the n-cycle class and the constant in P >= C/k.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use splitmerge::spectral::return_probability;

fn main() -> splitmerge::Result<()> {
    println!("P(X_2 = (3)) = {}", return_probability(3, 1)?);
    for n in [5, 10, 20, 50] {
        let row: Vec<String> = [1, 2, 4, 8]
            .iter()
            .map(|&k| format!("{:.4}", return_probability(n, k).unwrap().to_f64().unwrap()))
            .collect();
        println!("n = {n:>2}, k = 1, 2, 4, 8: {}", row.join("  "));
    }
    let mut min = f64::INFINITY;
    for n in 2..=50usize {
        for k in 1..n as u32 {
            let kp = return_probability(n, k)? * BigRational::from_integer(k.into());
            min = min.min(kp.to_f64().unwrap());
        }
    }
    println!("min k * P over n <= 50, k < n: {min:.4}");
    Ok(())
}
