mod common;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use qbk::class::enhanced_violation;
use qbk::gen::gen_guarded;
use qbk::guarded::{
    compute_beta, compute_beta_with, disjunct_arity, evaluate_with_enhanced_backdoor, GuardedElimState, Replacement,
};
use qbk::oracle::{evaluate, evaluate_qbf, OracleBudget};

use common::*;

#[test]
fn beta_preserves_truth() {
    let budget = OracleBudget::default();
    for seed in 0..200 {
        let (phi, y) = gen_guarded(&guarded_spec(seed));
        let (beta, residual) = compute_beta(&phi, &y).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(beta.domain().is_subset(&y), "seed {seed}");
        assert_eq!(evaluate(&phi, &budget).unwrap(), evaluate(&residual, &budget).unwrap(), "seed {seed}");
    }
}

#[test]
fn disj_replacement_agrees_with_part() {
    let budget = OracleBudget::default();
    for seed in 0..100 {
        let (phi, y) = gen_guarded(&guarded_spec(seed));
        let (_, part) = compute_beta_with(&phi, &y, Replacement::Part).unwrap();
        let (_, disj) = compute_beta_with(&phi, &y, Replacement::Disj).unwrap();
        assert_eq!(evaluate(&part, &budget).unwrap(), evaluate(&disj, &budget).unwrap(), "seed {seed}");
    }
}

#[test]
fn enhanced_evaluation_matches_oracle() {
    let budget = OracleBudget::default();
    for seed in 0..200 {
        let (phi, b, class) = planted(seed);
        assert_eq!(enhanced_violation(&phi, &b, class), None, "seed {seed}");
        let got = evaluate_with_enhanced_backdoor(&phi, &b, class).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert_eq!(got, evaluate_qbf(&phi, &budget).unwrap(), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() })]

    #[test]
    fn steps_shrink_progress_and_bound_growth(seed in 0u64..10_000) {
        let (phi, y) = gen_guarded(&guarded_spec(seed));
        let mut state = GuardedElimState::new(&phi, &y, Replacement::Part).unwrap();
        loop {
            let before = state.progress();
            let size = state.current.k();
            let arity = state.current.disjuncts.iter().map(|d| disjunct_arity(d, &y)).max().unwrap_or(0);
            if state.advance().unwrap() {
                break;
            }
            prop_assert!(state.current.k() <= (2 * arity + 1) * size);
            prop_assert!(state.progress().iter().rev().lt(before.iter().rev()));
        }
    }

    #[test]
    fn beta_stays_inside_y(seed in 0u64..10_000) {
        let (phi, y) = gen_guarded(&guarded_spec(seed));
        let (beta, _) = compute_beta(&phi, &y).unwrap();
        prop_assert!(beta.domain().is_subset(&y));
    }
}
