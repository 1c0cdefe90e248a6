//! Eliminates a guarded universal set and decides a planted enhanced backdoor instance.

use qbk::class::BaseClass;
use qbk::gen::{gen_enhanced, gen_guarded, GenClass, GeneratorSpec};
use qbk::guarded::{compute_beta, evaluate_with_enhanced_backdoor};
use qbk::oracle::{evaluate, evaluate_qbf, OracleBudget};

fn main() {
    let budget = OracleBudget::default();
    let (phi, y) = gen_guarded(&GeneratorSpec { seed: 3, n: 8, k: 2, q: 2, ..Default::default() });
    let (beta, residual) = compute_beta(&phi, &y).expect("closed universal set");
    println!("guarded {y:?}, beta {beta}");
    assert_eq!(evaluate(&residual, &budget).expect("within budget"), evaluate(&phi, &budget).expect("within budget"));

    let spec = GeneratorSpec { seed: 5, n: 8, density: 1.0, class: GenClass::Horn, ..Default::default() };
    let p = gen_enhanced(&spec, 1, 3);
    let value = evaluate_with_enhanced_backdoor(&p.formula, &p.backdoor, BaseClass::HornExists).expect("valid backdoor");
    println!("backdoor {:?} guarded {:?}: {value}", p.backdoor, p.guarded);
    assert_eq!(value, evaluate_qbf(&p.formula, &budget).expect("within budget"));
}
