//! Finds strong and enhanced backdoors of the one-variable family.

use qbk::class::BaseClass;
use qbk::detect::{enhanced_backdoor, strong_backdoor_2cnf, strong_backdoor_horn};
use qbk::gen::gen_phi_n;

fn main() {
    for n in 1..=3 {
        let phi = gen_phi_n(n).expect("n is positive");
        let two = strong_backdoor_2cnf(&phi, 1).expect("search runs");
        let horn = strong_backdoor_horn(&phi, 1).expect("search runs");
        let enhanced = enhanced_backdoor(&phi, 1, BaseClass::TwoCnf { q: 2 }).expect("search runs");
        println!("n={n}: {} clauses, 2cnf {two:?}, horn {horn:?}, enhanced {enhanced:?}", phi.matrix.clauses.len());
        assert!(strong_backdoor_2cnf(&phi, 0).expect("search runs").is_none());
    }
}
