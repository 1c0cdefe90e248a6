//! Reduces six affine disjuncts to four.

use qbk::formula::FreshVarPool;
use qbk::gen::{gen_random, GenClass, GeneratorSpec};
use qbk::oracle::{evaluate, OracleBudget};
use qbk::transforms::squish_to_four;

fn main() {
    let phi = gen_random(&GeneratorSpec { seed: 1, n: 4, k: 6, d: 2, density: 0.5, class: GenClass::Affine, ..Default::default() });
    let out = squish_to_four(&phi, &mut FreshVarPool::for_formula(&phi)).expect("affine disjuncts");
    println!("{} disjuncts over {} variables -> {} over {}", phi.k(), phi.prefix.num_vars(), out.k(), out.prefix.num_vars());
    let budget = OracleBudget::default();
    assert_eq!(evaluate(&out, &budget).expect("within budget"), evaluate(&phi, &budget).expect("within budget"));
}
