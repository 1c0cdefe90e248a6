mod common;

use std::collections::BTreeSet;

use qbk::class::BaseClass;
use qbk::detect::{
    enhanced_backdoor, enhanced_backdoor_qalt_stats, enhanced_backdoor_stats, important_separators,
    strong_backdoor_2cnf, strong_backdoor_horn, SeparatorQuery,
};
use qbk::formula::{QbfFormula, Var};
use qbk::gen::{gen_random, gen_random_3cnf_qbf, GenClass, GeneratorSpec};
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

fn single(spec: &GeneratorSpec) -> QbfFormula {
    let phi = gen_random(&GeneratorSpec { k: 1, ..spec.clone() });
    QbfFormula::new(phi.prefix, phi.disjuncts[0].clone()).unwrap()
}

#[test]
fn separators_match_definition() {
    let mut several = 0;
    for seed in 0..300u64 {
        let mut rng = rng(seed);
        let n = rng.gen_range(4..=12);
        let p = rng.gen_range(0.15..0.4);
        let g = random_graph(&mut rng, n, p);
        let vertices: Vec<Var> = (1..=n as Var).collect();
        let (nx, ny) = (rng.gen_range(1..=2), rng.gen_range(2..=4));
        let x: BTreeSet<Var> = vertices.choose_multiple(&mut rng, nx).copied().collect();
        let y: BTreeSet<Var> = vertices.choose_multiple(&mut rng, ny).copied().collect();
        let cap = if seed % 10 == 0 { 0 } else { rng.gen_range(2..=3) };
        let expected = brute_important_separators(&g, &x, &y, cap);
        let q = SeparatorQuery { graph: g, source: x, sink: y, size_cap: cap };
        let mut got = important_separators(&q).into_vec();
        got.sort();
        assert_eq!(got, expected, "seed {seed}");
        several += usize::from(got.len() > 1);
    }
    assert!(several >= 20, "{several} instances with several separators");
}

#[test]
fn strong_backdoors_are_minimum() {
    for seed in 0..200u64 {
        let spec = GeneratorSpec {
            seed,
            n: 6 + (seed % 9) as usize,
            q: 1 + (seed % 3) as usize,
            density: 0.3 + 0.1 * (seed % 5) as f64,
            ..Default::default()
        };
        let phi = gen_random_3cnf_qbf(&spec);
        let k = (seed % 4) as usize;
        for (class, found) in [
            (BaseClass::TwoCnf { q: 0 }, strong_backdoor_2cnf(&phi, k).unwrap()),
            (BaseClass::HornExists, strong_backdoor_horn(&phi, k).unwrap()),
        ] {
            assert_eq!(found.as_ref().map(BTreeSet::len), brute_strong_min(&phi, k, class), "seed {seed} {class}");
            if let Some(b) = found {
                assert!(validate_strong(&phi.matrix, &b, class), "seed {seed} {class}");
            }
        }
    }
}

#[test]
fn alternation_backdoors_agree_with_brute_force() {
    let mut yes = 0;
    for seed in 0..200u64 {
        let spec = GeneratorSpec {
            seed,
            n: 6 + (seed % 9) as usize,
            q: 2 + (seed % 4) as usize,
            density: 0.3 + 0.15 * (seed % 4) as f64,
            class: GenClass::ThreeCnf,
            ..Default::default()
        };
        let phi = single(&spec);
        let (k, q) = ((seed % 3) as usize, (seed / 3 % 3) as usize);
        let (found, stats) = enhanced_backdoor_qalt_stats(&phi, k, q);
        assert!(u128::from(stats.nodes) <= stats.node_cap);
        assert_eq!(found.is_some(), brute_qalt_exists(&phi, k, q), "seed {seed}");
        if let Some(b) = found {
            assert!(b.len() <= k && validate_enhanced_qalt(&phi, &b, q), "seed {seed}");
            yes += 1;
        }
    }
    assert!((20..180).contains(&yes), "{yes} positive instances");
}


#[test]
fn enhanced_backdoors_agree_with_brute_force() {
    let mut yes = 0;
    for seed in 0..300u64 {
        let (phi, class) = detection_instance(seed);
        let k = (seed / 2 % 3) as usize;
        let (found, stats) = enhanced_backdoor_stats(&phi, k, class).unwrap();
        assert!(u128::from(stats.nodes) <= stats.node_cap);
        assert_eq!(found.is_some(), brute_enhanced_exists(&phi, k, class), "seed {seed} {class} k={k}");
        if let Some(b) = found {
            assert!(b.len() <= k && validate_enhanced(&phi, &b, class), "seed {seed}");
            yes += 1;
        }
    }
    assert!((30..270).contains(&yes), "{yes} positive instances");
}

#[test]
fn class_fragment_is_enforced() {
    let (phi, _) = detection_instance(2);
    assert!(enhanced_backdoor(&phi, 1, BaseClass::HornExists).is_err());
    assert!(strong_backdoor_2cnf(&phi, 1).is_err());
}
