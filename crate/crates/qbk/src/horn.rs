//! Propositional HORN satisfiability by forward chaining.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::formula::{Clause, ConjunctiveFormula, PartialAssignment, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HornError {
    #[error("clause {0} has more than one positive literal")]
    NotHorn(String),
    #[error("equation {0} is not a unit")]
    NotUnit(String),
}

pub fn is_horn_clause(c: &Clause) -> bool {
    c.positive_count() <= 1
}

pub fn is_horn(phi: &ConjunctiveFormula) -> bool {
    phi.clauses.iter().all(is_horn_clause) && phi.equations.iter().all(|e| e.len() <= 1)
}

/// Least model of a HORN formula, or `None` when unsatisfiable.
///
/// Unit equations are read as unit clauses. Variables of `phi` absent
/// from the least model are set to false.
pub fn horn_sat(phi: &ConjunctiveFormula) -> Result<Option<PartialAssignment>, HornError> {
    let mut rules: Vec<(Vec<Var>, Option<Var>)> = Vec::with_capacity(phi.len());
    for c in &phi.clauses {
        if !is_horn_clause(c) {
            return Err(HornError::NotHorn(format!("{c:?}")));
        }
        let body = c.lits().iter().filter(|l| !l.is_positive()).map(|l| l.var()).collect();
        let head = c.lits().iter().find(|l| l.is_positive()).map(|l| l.var());
        rules.push((body, head));
    }
    for e in &phi.equations {
        match e.vars() {
            [] => rules.push((Vec::new(), None)),
            [v] if e.rhs() => rules.push((Vec::new(), Some(*v))),
            [v] => rules.push((vec![*v], None)),
            _ => return Err(HornError::NotUnit(format!("{e:?}"))),
        }
    }
    let mut watchers: BTreeMap<Var, Vec<usize>> = BTreeMap::new();
    let mut missing: Vec<usize> = Vec::with_capacity(rules.len());
    for (i, (body, _)) in rules.iter().enumerate() {
        for &v in body {
            watchers.entry(v).or_default().push(i);
        }
        missing.push(body.len());
    }
    let mut truth: BTreeMap<Var, bool> = BTreeMap::new();
    let mut queue: VecDeque<usize> = (0..rules.len()).filter(|&i| missing[i] == 0).collect();
    while let Some(i) = queue.pop_front() {
        let Some(h) = rules[i].1 else {
            return Ok(None);
        };
        if truth.insert(h, true).is_some() {
            continue;
        }
        for &j in watchers.get(&h).map(Vec::as_slice).unwrap_or(&[]) {
            missing[j] -= 1;
            if missing[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    let mut model = PartialAssignment::new();
    for v in phi.vars() {
        model.set(v, truth.contains_key(&v));
    }
    Ok(Some(model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::AffineEquation;

    #[test]
    fn chain_reaches_contradiction() {
        let phi = ConjunctiveFormula::from_dimacs(&[&[1], &[-1, 2], &[-2, -1]]);
        assert_eq!(horn_sat(&phi).unwrap(), None);
    }

    #[test]
    fn least_model() {
        let phi = ConjunctiveFormula::from_dimacs(&[&[1], &[-1, 2], &[-3, 4], &[-2, -3]]);
        let m = horn_sat(&phi).unwrap().unwrap();
        assert_eq!(m, PartialAssignment::from_pairs([(1, true), (2, true), (3, false), (4, false)]));
        assert!(phi.eval(|v| m.get(v).unwrap()));
    }

    #[test]
    fn empty_formula_and_empty_clause() {
        assert!(horn_sat(&ConjunctiveFormula::top()).unwrap().is_some());
        assert!(horn_sat(&ConjunctiveFormula::bottom()).unwrap().is_none());
    }

    #[test]
    fn rejects_non_horn() {
        let phi = ConjunctiveFormula::from_dimacs(&[&[1, 2]]);
        assert!(matches!(horn_sat(&phi), Err(HornError::NotHorn(_))));
    }

    #[test]
    fn unit_equations() {
        let phi = ConjunctiveFormula::new(
            ConjunctiveFormula::from_dimacs(&[&[-1, 2]]).clauses,
            vec![AffineEquation::new([1], true), AffineEquation::new([2], false)],
        );
        assert_eq!(horn_sat(&phi).unwrap(), None);
    }
}
