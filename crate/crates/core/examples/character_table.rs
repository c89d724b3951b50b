//! The character table of S_6 and the eigenvalues of DCF(6).

use splitmerge::spectral::{CharacterTable, Spectrum};

fn main() -> splitmerge::Result<()> {
    let n = 6;
    let table = CharacterTable::build(n)?;
    let spectrum = Spectrum::new(n)?;
    print!("{:<14} {:>7}", "lambda", "theta");
    for gamma in table.states().iter() {
        print!(" {:>6}", gamma.to_string());
    }
    println!();
    for (l, lambda) in table.states().iter().enumerate() {
        print!("{:<14} {:>7}", lambda.to_string(), spectrum.eigenvalues()[l].to_string());
        for chi in table.row(l) {
            print!(" {chi:>6}");
        }
        println!();
    }
    Ok(())
}
