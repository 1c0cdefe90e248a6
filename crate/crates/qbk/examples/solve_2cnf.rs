//! Decides random disjunctions of 2-CNF formulas and checks them against the oracle.

use qbk::gen::{gen_random, GenClass, GeneratorSpec};
use qbk::oracle::{evaluate, OracleBudget};
use qbk::twocnf::solve_2cnf_traced;

fn main() {
    for seed in 0..5 {
        let phi = gen_random(&GeneratorSpec { seed, n: 8, k: 3, q: 3, class: GenClass::TwoCnf, ..Default::default() });
        let (value, trace) = solve_2cnf_traced(&phi).expect("2-CNF disjuncts");
        let expected = evaluate(&phi, &OracleBudget::default()).expect("within budget");
        assert_eq!(value, expected);
        println!("seed {seed}: {value} after {} stages", trace.stages.len());
    }
}
