//! Turns a backdoor into disjuncts and back, keeping the truth value.

use std::collections::BTreeSet;

use qbk::formula::FreshVarPool;
use qbk::gen::{gen_random_3cnf_qbf, GeneratorSpec};
use qbk::oracle::{evaluate, evaluate_qbf, OracleBudget};
use qbk::transforms::{backdoor_to_disjunct, backdoor_to_disjunct_qe, disjunct_to_backdoor};

fn main() {
    let budget = OracleBudget::default();
    let phi = gen_random_3cnf_qbf(&GeneratorSpec { seed: 7, n: 6, density: 2.0, ..Default::default() });
    let value = evaluate_qbf(&phi, &budget).expect("within budget");
    let b = BTreeSet::from([1, 2]);

    let disj = backdoor_to_disjunct(&phi, &b).expect("backdoor in prefix");
    println!("disj: {} disjuncts, value {}", disj.k(), evaluate(&disj, &budget).expect("within budget"));

    let qe = backdoor_to_disjunct_qe(&phi, &b, &mut FreshVarPool::above(phi.max_var())).expect("backdoor in prefix");
    println!("qe: {} disjuncts over {} variables", qe.k(), qe.prefix.num_vars());
    assert_eq!(evaluate(&qe, &budget).expect("within budget"), value);

    let (back, z) = disjunct_to_backdoor(&disj).expect("clausal disjuncts");
    println!("back to one formula with backdoor {z:?}");
    assert_eq!(evaluate_qbf(&back, &budget).expect("within budget"), value);
}
