mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use qbk::formula::{AffineEquation, ConjunctiveFormula, DisjunctQbf, FreshVarPool, QbfFormula, Quant, QuantifierPrefix, Var};
use qbk::gen::{gen_random, GenClass, GeneratorSpec};
use qbk::oracle::{equisatisfiable, evaluate, evaluate_qbf, OracleBudget};
use qbk::transforms::{
    backdoor_to_disjunct, backdoor_to_disjunct_qe, disj_expand, disjunct_to_backdoor, eliminate_variable,
    part_expand, squish, squish_step, squish_to_four,
};
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

fn single(seed: u64) -> QbfFormula {
    single_disjunct(&gen_random(&GeneratorSpec { k: 1, ..transform_spec(seed) }))
}

fn pick(seed: u64, from: &BTreeSet<Var>, max: usize) -> BTreeSet<Var> {
    let mut rng = rng(seed);
    let vars: Vec<Var> = from.iter().copied().collect();
    let size = rng.gen_range(0..=max.min(vars.len()));
    vars.choose_multiple(&mut rng, size).copied().collect()
}

fn truth(phi: &DisjunctQbf) -> bool {
    evaluate(phi, &OracleBudget::default()).unwrap()
}

#[test]
fn two_variable_backdoor_gives_four_disjuncts() {
    // x = 1, y = 2, v = 3, w = 4: (x ∨ y) ∧ (v ∨ w) ∧ (x ⊕ v = 1)
    let prefix = QuantifierPrefix::new(vec![(Quant::Forall, vec![1, 2]), (Quant::Exists, vec![3, 4])])
        .unwrap();
    let mut matrix = clauses(&[&[1, 2], &[3, 4]]);
    matrix.equations.push(AffineEquation::new([1, 3], true));
    let phi = QbfFormula::new(prefix, matrix).unwrap();
    let out = backdoor_to_disjunct(&phi, &BTreeSet::from([1, 3])).unwrap();
    assert_eq!(out.k(), 4);
    assert_eq!(out.prefix, phi.prefix);
    for d in &out.disjuncts {
        let free: ConjunctiveFormula = d.delete_vars(&BTreeSet::from([1, 3]));
        assert!(free.clauses.iter().all(|c| c.len() <= 1));
    }
    assert_eq!(truth(&out), evaluate_qbf(&phi, &OracleBudget::default()).unwrap());
}

#[test]
fn qe_of_single_innermost_existential_doubles() {
    let prefix = QuantifierPrefix::new(vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2])]).unwrap();
    let phi = QbfFormula::new(prefix, clauses(&[&[1, 2], &[-1, -2]])).unwrap();
    let out = backdoor_to_disjunct_qe(&phi, &BTreeSet::from([2]), &mut FreshVarPool::above(2)).unwrap();
    assert_eq!(out.k(), 2);
    assert!(truth(&out));
}

#[test]
fn disjunct_to_backdoor_pads_to_power_of_two() {
    let phi = gen_random(&GeneratorSpec { seed: 3, n: 5, k: 3, q: 2, class: GenClass::ThreeCnf, ..Default::default() });
    let (q, z) = disjunct_to_backdoor(&phi).unwrap();
    assert_eq!(z.len(), 2);
    assert_eq!(q.prefix.innermost().map(|b| b.quant), Some(Quant::Exists));
    assert_eq!(evaluate_qbf(&q, &OracleBudget::default()).unwrap(), truth(&phi));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, rng_seed: RngSeed::Fixed(0x7a5), ..ProptestConfig::default() })]

    #[test]
    fn disj_is_pointwise_equivalent(seed in 0u64..100_000) {
        let phi = single(seed);
        let b = pick(seed, &phi.matrix.vars(), 4);
        let out = backdoor_to_disjunct(&phi, &b).unwrap();
        prop_assert_eq!(out.k(), 1 << b.len());
        prop_assert!(equisatisfiable(&phi.to_disjunct(), &out, &OracleBudget::default()).unwrap());
        prop_assert_eq!(truth(&out), evaluate_qbf(&phi, &OracleBudget::default()).unwrap());
    }

    #[test]
    fn disj_expansion_is_equisatisfiable(seed in 0u64..100_000) {
        let phi = single(seed);
        let x = pick(seed, &phi.matrix.vars(), 4);
        let parts = disj_expand(&phi.matrix, &x).unwrap();
        prop_assert_eq!(parts.len(), 1 << x.len());
        prop_assert_eq!(parts.iter().any(brute_sat), brute_sat(&phi.matrix));
    }

    #[test]
    fn part_with_innermost_selectors_is_equivalent(seed in 0u64..100_000) {
        let phi = gen_random(&transform_spec(seed));
        let x = pick(seed, &phi.matrix_vars(), 3);
        let mut pool = FreshVarPool::for_formula(&phi);
        let mut prefix = phi.prefix.clone();
        let mut disjuncts = Vec::new();
        for d in &phi.disjuncts {
            let exp = part_expand(d, &x, &mut pool);
            prop_assert_eq!(exp.disjuncts.len(), 2 * x.len() + 1);
            prefix = prefix.with_innermost(Quant::Forall, exp.selectors);
            disjuncts.extend(exp.disjuncts);
        }
        prop_assert_eq!(truth(&DisjunctQbf { prefix, disjuncts }), truth(&phi));
    }

    #[test]
    fn part_holds_for_every_selector_value_exactly_when_phi_does(seed in 0u64..100_000) {
        let phi = single(seed).matrix;
        let x = pick(seed, &phi.vars(), 3);
        let exp = part_expand(&phi, &x, &mut FreshVarPool::above(phi.max_var()));
        let vars: Vec<Var> = phi.vars().into_iter().collect();
        for sigma in assignments(&vars) {
            let all = assignments(&exp.selectors).all(|a| {
                let tau = sigma.union(&a);
                exp.disjuncts.iter().any(|d| d.eval(|v| tau.get(v).unwrap_or(false)))
            });
            prop_assert_eq!(all, phi.eval(|v| sigma.get(v).unwrap()));
        }
    }

    #[test]
    fn squish_keeps_truth(seed in 0u64..100_000) {
        let phi = gen_random(&six_disjunct_spec(seed));
        let out = squish(&phi, 4, 1, &mut FreshVarPool::for_formula(&phi)).unwrap();
        prop_assert_eq!(out.k(), 4);
        let tail: Vec<Quant> = out.prefix.blocks().iter().rev().take(2).map(|b| b.quant).collect();
        prop_assert_eq!(tail, vec![Quant::Forall, Quant::Exists]);
        prop_assert_eq!(truth(&out), truth(&phi));
    }

    #[test]
    fn squish_to_four_keeps_truth(seed in 0u64..100_000, k in 1usize..7) {
        let phi = gen_random(&GeneratorSpec { k, n: 3 + (seed % 3) as usize, ..six_disjunct_spec(seed) });
        let out = squish_to_four(&phi, &mut FreshVarPool::for_formula(&phi)).unwrap();
        prop_assert_eq!(out.k(), 4);
        if k > 4 {
            prop_assert!(squish_step(k).is_some());
        }
        prop_assert_eq!(truth(&out), truth(&phi));
    }

    #[test]
    fn quantifier_elimination_is_equivalent(seed in 0u64..100_000) {
        let phi = single(seed);
        let b = pick(seed, &phi.prefix.var_set(), 2);
        let n = phi.prefix.num_vars();
        let out = backdoor_to_disjunct_qe(&phi, &b, &mut FreshVarPool::above(phi.max_var())).unwrap();
        let cap = if b.is_empty() { 1 } else { 1usize << (1 << (b.len() - 1)) };
        prop_assert!(out.k() <= cap, "{} disjuncts for |B|={}", out.k(), b.len());
        prop_assert!(out.prefix.num_vars() <= (1 << b.len()) * n);
        prop_assert!(out.prefix.var_set().is_disjoint(&b));
        prop_assert_eq!(truth(&out), evaluate_qbf(&phi, &OracleBudget::default()).unwrap());
    }

    #[test]
    fn single_elimination_is_equivalent(seed in 0u64..100_000) {
        let phi = gen_random(&transform_spec(seed));
        let vars = phi.prefix.vars();
        let x = vars[seed as usize % vars.len()];
        let out = eliminate_variable(&phi, x, &mut FreshVarPool::for_formula(&phi)).unwrap();
        prop_assert!(!out.prefix.contains(x));
        prop_assert_eq!(truth(&out), truth(&phi));
    }

    #[test]
    fn disjunct_to_backdoor_round_trip(seed in 0u64..100_000) {
        let clausal = [GenClass::TwoCnf, GenClass::ThreeCnf, GenClass::Horn][(seed % 3) as usize];
        let phi = gen_random(&GeneratorSpec { class: clausal, n: 4 + (seed % 5) as usize, ..transform_spec(seed) });
        let (q, z) = disjunct_to_backdoor(&phi).unwrap();
        let padded = phi.k().next_power_of_two();
        prop_assert_eq!(z.len(), padded.trailing_zeros() as usize);
        let expected = truth(&phi);
        prop_assert_eq!(evaluate_qbf(&q, &OracleBudget::default()).unwrap(), expected);
        let back = backdoor_to_disjunct(&q, &z).unwrap();
        prop_assert_eq!(back.k(), 1 << z.len());
        prop_assert_eq!(truth(&back), expected);
    }
}

#[test]
fn squish_rejects_too_many_disjuncts() {
    let phi = gen_random(&GeneratorSpec { k: 7, ..six_disjunct_spec(0) });
    assert!(squish(&phi, 4, 1, &mut FreshVarPool::for_formula(&phi)).is_err());
    assert!(squish(&phi, 4, 3, &mut FreshVarPool::for_formula(&phi)).is_err());
}

#[test]
fn empty_disj_set_is_identity() {
    let phi = single(4);
    assert_eq!(disj_expand(&phi.matrix, &BTreeSet::new()).unwrap(), vec![phi.matrix.clone()]);
    let exp = part_expand(&phi.matrix, &BTreeSet::new(), &mut FreshVarPool::above(phi.max_var()));
    assert_eq!(exp.disjuncts.len(), 1);
    assert!(exp.selectors.is_empty());
}
