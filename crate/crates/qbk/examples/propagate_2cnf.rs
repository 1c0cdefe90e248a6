//! Computes the resolution closure of a 2-CNF formula.

use qbk::formula::ConjunctiveFormula;
use qbk::twocnf::propagate;

fn main() {
    let phi = ConjunctiveFormula::from_dimacs(&[&[1, 2], &[-2, 3], &[-3, 4], &[-1]]);
    let p = propagate(&phi).expect("2-CNF input");
    println!("units: {:?}", p.units.iter().map(ToString::to_string).collect::<Vec<_>>());
    println!("binaries: {}", p.binaries.len());
    let clash = ConjunctiveFormula::from_dimacs(&[&[1], &[-1, 2], &[-2]]);
    println!("clash is bottom: {}", propagate(&clash).expect("2-CNF input").bottom);
}
