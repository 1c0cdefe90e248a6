//! Decides random disjunctions of affine systems and checks them against the oracle.

use qbk::affine::solve_affine_traced;
use qbk::gen::{gen_random, GenClass, GeneratorSpec};
use qbk::oracle::{evaluate, OracleBudget};

fn main() {
    for seed in 0..5 {
        let phi = gen_random(&GeneratorSpec { seed, n: 8, k: 3, q: 3, class: GenClass::Affine, ..Default::default() });
        let (value, trace) = solve_affine_traced(&phi).expect("affine disjuncts");
        let expected = evaluate(&phi, &OracleBudget::default()).expect("within budget");
        assert_eq!(value, expected);
        for s in &trace.stages {
            println!("seed {seed} round {} {}: k={} vars={}", s.round, s.stage, s.disjuncts, s.variables);
        }
        println!("seed {seed}: {value}");
    }
}
