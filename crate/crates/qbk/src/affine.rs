//! Evaluation of disjunctive affine QBF over GF(2).

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::{AffineEquation, ConjunctiveFormula, DisjunctQbf, PartialAssignment, Quant, QuantifierPrefix, Var};
use crate::trace::SolveTrace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error("clausal constraint in affine input")]
    NotAffine,
    #[error("innermost block is {found:?}, expected {expected:?}")]
    WrongInnermost { expected: Quant, found: Option<Quant> },
    #[error("disjunct {0} is not in reduced echelon form")]
    NotReduced(usize),
    #[error("disjunct {index} has {count} equations on the innermost block, limit {limit}")]
    HeavyDisjunct { index: usize, count: usize, limit: usize },
    #[error("bound violated: {0}")]
    BoundViolated(String),
}

/// Augmented GF(2) matrix; the last bit of each row is the right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMatrix {
    pub columns: Vec<Var>,
    pub rows: Vec<FixedBitSet>,
}

impl AffineMatrix {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    fn rhs(&self, row: &FixedBitSet) -> bool {
        row.contains(self.columns.len())
    }

    fn leading(&self, row: &FixedBitSet) -> Option<usize> {
        row.ones().next().filter(|&c| c < self.columns.len())
    }

    pub fn from_equations(equations: &[AffineEquation], columns: Vec<Var>) -> AffineMatrix {
        let index: BTreeMap<Var, usize> = columns.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let width = columns.len() + 1;
        let rows = equations
            .iter()
            .map(|e| {
                let mut row = FixedBitSet::with_capacity(width);
                for v in e.vars() {
                    row.insert(index[v]);
                }
                row.set(width - 1, e.rhs());
                row
            })
            .collect();
        AffineMatrix { columns, rows }
    }

    pub fn to_equations(&self) -> Vec<AffineEquation> {
        self.rows
            .iter()
            .map(|r| AffineEquation::new(r.ones().filter(|&c| c < self.columns.len()).map(|c| self.columns[c]), self.rhs(r)))
            .collect()
    }

    /// Zero rows last, leading ones strictly rightward, pivot columns cleared elsewhere.
    pub fn is_reduced_echelon(&self) -> bool {
        let mut last: Option<usize> = None;
        let mut seen_zero = false;
        for row in &self.rows {
            match self.leading(row) {
                None => {
                    if row.contains(self.columns.len()) {
                        return false;
                    }
                    seen_zero = true;
                }
                Some(c) => {
                    if seen_zero || last.is_some_and(|l| c <= l) {
                        return false;
                    }
                    if self.rows.iter().filter(|r| r.contains(c)).count() != 1 {
                        return false;
                    }
                    last = Some(c);
                }
            }
        }
        true
    }

    /// In-place Gauss–Jordan elimination; `false` when `0 = 1` arises.
    fn reduce(&mut self) -> bool {
        let n = self.columns.len();
        let mut pivot_row = 0;
        for col in 0..n {
            let Some(found) = (pivot_row..self.rows.len()).find(|&r| self.rows[r].contains(col)) else { continue };
            self.rows.swap(pivot_row, found);
            let pivot = self.rows[pivot_row].clone();
            for r in 0..self.rows.len() {
                if r != pivot_row && self.rows[r].contains(col) {
                    self.rows[r].symmetric_difference_with(&pivot);
                }
            }
            pivot_row += 1;
        }
        let consistent = self.rows[pivot_row..].iter().all(|r| !r.contains(n));
        self.rows.truncate(pivot_row);
        consistent
    }

    /// One solution with free columns set to 0; `self` must be reduced.
    pub fn solution(&self) -> PartialAssignment {
        let mut tau = PartialAssignment::from_pairs(self.columns.iter().map(|&v| (v, false)));
        for row in &self.rows {
            if let Some(c) = self.leading(row) {
                tau.set(self.columns[c], self.rhs(row));
            }
        }
        tau
    }
}

/// Columns from the innermost prefix position outward (descending id within a block).
pub fn column_order(vars: &BTreeSet<Var>, prefix: &QuantifierPrefix) -> Vec<Var> {
    let mut out = Vec::with_capacity(vars.len());
    for block in prefix.blocks().iter().rev() {
        let mut vs: Vec<Var> = block.vars.iter().copied().filter(|v| vars.contains(v)).collect();
        vs.sort_unstable_by(|a, b| b.cmp(a));
        out.extend(vs);
    }
    let mut rest: Vec<Var> = vars.iter().copied().filter(|v| !prefix.contains(*v)).collect();
    rest.sort_unstable_by(|a, b| b.cmp(a));
    out.extend(rest);
    out
}

/// Reduced echelon form of `φ`, or `None` when inconsistent.
pub fn gaussian_reduce(phi: &ConjunctiveFormula, prefix: &QuantifierPrefix) -> Result<Option<AffineMatrix>, AffineError> {
    if !phi.clauses.is_empty() {
        return Err(AffineError::NotAffine);
    }
    let mut m = AffineMatrix::from_equations(&phi.equations, column_order(&phi.vars(), prefix));
    Ok(m.reduce().then_some(m))
}

/// Solvability of an equation list; returns one solution.
pub fn solve_system(equations: &[AffineEquation]) -> Option<PartialAssignment> {
    let vars: BTreeSet<Var> = equations.iter().flat_map(|e| e.vars().iter().copied()).collect();
    let mut m = AffineMatrix::from_equations(equations, vars.into_iter().collect());
    m.reduce().then(|| m.solution())
}

/// GF(2) rank of the left-hand sides.
pub fn rank(equations: &[AffineEquation]) -> usize {
    let vars: BTreeSet<Var> = equations.iter().flat_map(|e| e.vars().iter().copied()).collect();
    let lhs: Vec<AffineEquation> = equations.iter().map(|e| AffineEquation::new(e.vars().iter().copied(), false)).collect();
    let mut m = AffineMatrix::from_equations(&lhs, vars.into_iter().collect());
    m.reduce();
    m.rows.len()
}

fn check_affine(phi: &DisjunctQbf) -> Result<(), AffineError> {
    if phi.disjuncts.iter().any(|d| !d.clauses.is_empty()) {
        return Err(AffineError::NotAffine);
    }
    Ok(())
}

fn reduced_disjunct(d: &ConjunctiveFormula, prefix: &QuantifierPrefix) -> Result<Option<ConjunctiveFormula>, AffineError> {
    Ok(gaussian_reduce(d, prefix)?.map(|m| ConjunctiveFormula::from_equations(m.to_equations())))
}

/// Replaces every disjunct by its reduced echelon system; drops inconsistent ones.
pub fn triangulate(phi: &DisjunctQbf) -> Result<DisjunctQbf, AffineError> {
    check_affine(phi)?;
    let mut disjuncts = Vec::with_capacity(phi.k());
    for d in &phi.disjuncts {
        if let Some(r) = reduced_disjunct(d, &phi.prefix)? {
            disjuncts.push(r);
        }
    }
    Ok(DisjunctQbf { prefix: phi.prefix.clone(), disjuncts })
}

fn is_reduced(d: &ConjunctiveFormula, prefix: &QuantifierPrefix) -> bool {
    let m = AffineMatrix::from_equations(&d.equations, column_order(&d.vars(), prefix));
    m.is_reduced_echelon()
}

fn innermost_is(prefix: &QuantifierPrefix, quant: Quant) -> Result<BTreeSet<Var>, AffineError> {
    match prefix.innermost() {
        Some(b) if b.quant == quant => Ok(b.vars.iter().copied().collect()),
        other => Err(AffineError::WrongInnermost { expected: quant, found: other.map(|b| b.quant) }),
    }
}

fn check_reduced(phi: &DisjunctQbf) -> Result<(), AffineError> {
    check_affine(phi)?;
    for (i, d) in phi.disjuncts.iter().enumerate() {
        if !is_reduced(d, &phi.prefix) {
            return Err(AffineError::NotReduced(i));
        }
    }
    Ok(())
}

/// Removes an innermost existential block with all its equations.
pub fn drop_innermost_existential_aff(phi: &DisjunctQbf) -> Result<DisjunctQbf, AffineError> {
    let xq = innermost_is(&phi.prefix, Quant::Exists)?;
    check_reduced(phi)?;
    Ok(DisjunctQbf {
        prefix: phi.prefix.without_innermost(),
        disjuncts: phi.disjuncts.iter().map(|d| d.split_touching(&xq).1).collect(),
    })
}

fn touching_count(d: &ConjunctiveFormula, xq: &BTreeSet<Var>) -> usize {
    d.equations.iter().filter(|e| e.vars().iter().any(|v| xq.contains(v))).count()
}

/// Repeatedly drops a disjunct with at least `k` equations on the innermost universal block.
pub fn prune_heavy_disjuncts_aff(phi: &DisjunctQbf) -> Result<DisjunctQbf, AffineError> {
    let xq = innermost_is(&phi.prefix, Quant::Forall)?;
    check_reduced(phi)?;
    let mut disjuncts = phi.disjuncts.clone();
    while let Some(i) = disjuncts.iter().position(|d| touching_count(d, &xq) >= disjuncts.len()) {
        disjuncts.remove(i);
    }
    Ok(DisjunctQbf { prefix: phi.prefix.clone(), disjuncts })
}

/// Per-disjunct data for universal elimination: the equations meeting `X_q`.
struct Split {
    /// `(A ∩ X_q, A ∖ X_q, b)` per equation meeting `X_q`.
    touching: Vec<(Vec<Var>, Vec<Var>, bool)>,
    rest: Vec<AffineEquation>,
}

impl Split {
    fn new(d: &ConjunctiveFormula, xq: &BTreeSet<Var>) -> Split {
        let mut touching = Vec::new();
        let mut rest = Vec::new();
        for e in &d.equations {
            let (inner, outer): (Vec<Var>, Vec<Var>) = e.vars().iter().partition(|v| xq.contains(v));
            if inner.is_empty() {
                rest.push(e.clone());
            } else {
                touching.push((inner, outer, e.rhs()));
            }
        }
        Split { touching, rest }
    }

    /// Class of `τ`: the value of each projected left-hand side.
    fn class_of(&self, tau: &PartialAssignment) -> Vec<bool> {
        self.touching
            .iter()
            .map(|(inner, _, _)| inner.iter().fold(false, |acc, &v| acc ^ tau.get(v).unwrap_or(false)))
            .collect()
    }

    /// `S_φ(τ)` for the class given by `signs`.
    fn system(&self, signs: &[bool]) -> Vec<AffineEquation> {
        self.touching.iter().zip(signs).map(|((inner, _, _), &s)| AffineEquation::new(inner.iter().copied(), s)).collect()
    }

    /// `φ[τ]` for the class given by `signs`.
    fn residual(&self, signs: &[bool]) -> Vec<AffineEquation> {
        let mut out = self.rest.clone();
        for ((_, outer, b), &s) in self.touching.iter().zip(signs) {
            out.push(AffineEquation::new(outer.iter().copied(), b ^ s));
        }
        out
    }
}

/// An assignment of `X_q` outside every chosen class, if one exists.
fn uncovered_witness(splits: &[Split], chosen: &BTreeMap<usize, Vec<bool>>) -> Option<PartialAssignment> {
    let systems: Vec<Vec<AffineEquation>> = chosen.iter().map(|(&i, signs)| splits[i].system(signs)).collect();
    fn go(systems: &[Vec<AffineEquation>], acc: &mut Vec<AffineEquation>) -> Option<PartialAssignment> {
        let Some((first, rest)) = systems.split_first() else { return solve_system(acc) };
        for e in first {
            acc.push(AffineEquation::new(e.vars().iter().copied(), !e.rhs()));
            if solve_system(acc).is_some() {
                if let Some(tau) = go(rest, acc) {
                    acc.pop();
                    return Some(tau);
                }
            }
            acc.pop();
        }
        None
    }
    go(&systems, &mut Vec::new())
}

/// Statistics of one universal-block elimination.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UniversalElimination {
    pub classes_per_disjunct: Vec<u128>,
    pub covers: usize,
}

/// Eliminates the innermost universal block by enumerating minimal class covers.
pub fn eliminate_universal_block_aff(phi: &DisjunctQbf) -> Result<DisjunctQbf, AffineError> {
    eliminate_universal_block_aff_stats(phi).map(|(r, _)| r)
}

pub fn eliminate_universal_block_aff_stats(phi: &DisjunctQbf) -> Result<(DisjunctQbf, UniversalElimination), AffineError> {
    let xq = innermost_is(&phi.prefix, Quant::Forall)?;
    check_reduced(phi)?;
    let k = phi.k();
    for (i, d) in phi.disjuncts.iter().enumerate() {
        let count = touching_count(d, &xq);
        if count >= k {
            return Err(AffineError::HeavyDisjunct { index: i, count, limit: k });
        }
    }
    let splits: Vec<Split> = phi.disjuncts.iter().map(|d| Split::new(d, &xq)).collect();
    let class_cap = if k == 0 { 1 } else { 1u128 << (k - 1).min(127) };
    let mut stats = UniversalElimination::default();
    for s in &splits {
        let projected: Vec<AffineEquation> = s.system(&vec![false; s.touching.len()]);
        if rank(&projected) != projected.len() {
            return Err(AffineError::BoundViolated("projected equations are linearly dependent".into()));
        }
        let classes = 1u128 << s.touching.len();
        if classes > class_cap {
            return Err(AffineError::BoundViolated(format!("{classes} classes > 2^(k-1)")));
        }
        stats.classes_per_disjunct.push(classes);
    }

    let mut covers: BTreeSet<BTreeMap<usize, Vec<bool>>> = BTreeSet::new();
    let mut visited: BTreeSet<BTreeMap<usize, Vec<bool>>> = BTreeSet::new();
    let mut stack = vec![BTreeMap::new()];
    while let Some(chosen) = stack.pop() {
        if !visited.insert(chosen.clone()) {
            continue;
        }
        match uncovered_witness(&splits, &chosen) {
            None => {
                if !chosen.is_empty() {
                    covers.insert(chosen);
                }
            }
            Some(tau) => {
                for (j, s) in splits.iter().enumerate().rev() {
                    if !chosen.contains_key(&j) {
                        let mut next = chosen.clone();
                        next.insert(j, s.class_of(&tau));
                        stack.push(next);
                    }
                }
            }
        }
    }
    let minimal: Vec<&BTreeMap<usize, Vec<bool>>> = covers
        .iter()
        .filter(|c| !covers.iter().any(|o| o.len() < c.len() && o.iter().all(|(i, s)| c.get(i) == Some(s))))
        .collect();
    stats.covers = minimal.len();
    let cap = (class_cap.saturating_add(1)).checked_pow(k as u32).unwrap_or(u128::MAX);
    if minimal.len() as u128 > cap {
        return Err(AffineError::BoundViolated(format!("{} disjuncts > (2^(k-1)+1)^k", minimal.len())));
    }
    let prefix = phi.prefix.without_innermost();
    let mut disjuncts = Vec::with_capacity(minimal.len());
    for cover in minimal {
        let eqs: Vec<AffineEquation> = cover.iter().flat_map(|(&i, signs)| splits[i].residual(signs)).collect();
        if let Some(r) = reduced_disjunct(&ConjunctiveFormula::from_equations(eqs), &prefix)? {
            disjuncts.push(r);
        }
    }
    Ok((DisjunctQbf { prefix, disjuncts }, stats))
}

/// `a ⊨ b` for consistent systems; `a` must be in reduced echelon form.
fn implies(a: &ConjunctiveFormula, b: &ConjunctiveFormula) -> bool {
    let vars: BTreeSet<Var> = a.vars().union(&b.vars()).copied().collect();
    let columns: Vec<Var> = vars.into_iter().collect();
    let mut base = AffineMatrix::from_equations(&a.equations, columns.clone());
    base.reduce();
    let pivots: Vec<(usize, FixedBitSet)> = base.rows.iter().map(|r| (base.leading(r).expect("non-zero"), r.clone())).collect();
    let probe = AffineMatrix::from_equations(&b.equations, columns);
    probe.rows.into_iter().all(|mut row| {
        for (c, p) in &pivots {
            if row.contains(*c) {
                row.symmetric_difference_with(p);
            }
        }
        row.is_clear()
    })
}

/// Drops duplicates and disjuncts implying another one, then unused prefix variables.
pub fn simplify(phi: &DisjunctQbf) -> DisjunctQbf {
    let mut ds: Vec<ConjunctiveFormula> = phi.disjuncts.iter().map(ConjunctiveFormula::canonical).collect();
    ds.sort();
    ds.dedup();
    let mut keep = vec![true; ds.len()];
    for i in 0..ds.len() {
        for j in 0..ds.len() {
            if i != j && keep[j] && implies(&ds[i], &ds[j]) {
                keep[i] = false;
                break;
            }
        }
    }
    let disjuncts = ds.into_iter().zip(keep).filter(|(_, k)| *k).map(|(d, _)| d).collect();
    DisjunctQbf { prefix: phi.prefix.clone(), disjuncts }.prune_prefix()
}

pub fn solve_affine(phi: &DisjunctQbf) -> Result<bool, AffineError> {
    solve_affine_traced(phi).map(|(r, _)| r)
}

pub fn solve_affine_traced(phi: &DisjunctQbf) -> Result<(bool, SolveTrace), AffineError> {
    check_affine(phi)?;
    let mut trace = SolveTrace::default();
    let mut cur = triangulate(phi)?;
    let mut round = 0;
    loop {
        // Pruning the prefix can merge blocks, which changes the column order.
        cur = triangulate(&simplify(&cur))?;
        trace.push(round, "triangulate", cur.k(), 0, cur.prefix.num_vars());
        if cur.k() == 0 {
            return Ok((false, trace));
        }
        if cur.disjuncts.iter().any(ConjunctiveFormula::is_top) {
            return Ok((true, trace));
        }
        let Some(inner) = cur.prefix.innermost() else {
            return Ok((true, trace));
        };
        round += 1;
        if inner.quant == Quant::Exists {
            cur = drop_innermost_existential_aff(&cur)?;
            trace.push(round, "drop-exists", cur.k(), 0, cur.prefix.num_vars());
        } else {
            cur = prune_heavy_disjuncts_aff(&cur)?;
            trace.push(round, "prune", cur.k(), 0, cur.prefix.num_vars());
            if cur.k() == 0 {
                return Ok((false, trace));
            }
            let (next, stats) = eliminate_universal_block_aff_stats(&cur)?;
            let classes = stats.classes_per_disjunct.iter().copied().max().unwrap_or(0);
            trace.push(round, "classes", cur.k(), classes as usize, cur.prefix.num_vars());
            trace.push(round, "eliminate-forall", next.k(), stats.covers, next.prefix.num_vars());
            cur = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eqs(rows: &[(&[Var], bool)]) -> ConjunctiveFormula {
        ConjunctiveFormula::from_equations(rows.iter().map(|(vs, b)| AffineEquation::new(vs.iter().copied(), *b)).collect())
    }

    fn prefix(blocks: Vec<(Quant, Vec<Var>)>) -> QuantifierPrefix {
        QuantifierPrefix::new(blocks).unwrap()
    }

    #[test]
    fn back_substitutes_unit_row() {
        // x = 1, y = 2
        let p = prefix(vec![(Quant::Exists, vec![1, 2])]);
        let m = gaussian_reduce(&eqs(&[(&[1, 2], false), (&[2], true)]), &p).unwrap().unwrap();
        let got: BTreeSet<AffineEquation> = m.to_equations().into_iter().collect();
        let want: BTreeSet<AffineEquation> = [AffineEquation::new([1], true), AffineEquation::new([2], true)].into();
        assert_eq!(got, want);
        assert!(m.is_reduced_echelon());
    }

    #[test]
    fn inconsistent_is_none() {
        let p = prefix(vec![(Quant::Exists, vec![1])]);
        assert!(gaussian_reduce(&eqs(&[(&[1], false), (&[1], true)]), &p).unwrap().is_none());
    }

    #[test]
    fn exists_drop_examples() {
        // y = 1, x = 2
        let p = prefix(vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2])]);
        let phi = triangulate(&DisjunctQbf::new(p.clone(), vec![eqs(&[(&[1, 2], true)])]).unwrap()).unwrap();
        assert!(drop_innermost_existential_aff(&phi).unwrap().disjuncts[0].is_top());
        let phi = triangulate(&DisjunctQbf::new(p, vec![eqs(&[(&[1], true), (&[1, 2], false)])]).unwrap()).unwrap();
        let out = drop_innermost_existential_aff(&phi).unwrap();
        assert_eq!(out.disjuncts[0], eqs(&[(&[1], true)]));
        assert!(!solve_affine(&out).unwrap());
    }

    #[test]
    fn lone_heavy_disjunct_is_pruned() {
        let p = prefix(vec![(Quant::Forall, vec![1])]);
        let phi = DisjunctQbf::new(p, vec![eqs(&[(&[1], false)])]).unwrap();
        assert_eq!(prune_heavy_disjuncts_aff(&phi).unwrap().k(), 0);
        assert!(!solve_affine(&phi).unwrap());
    }

    #[test]
    fn complementary_parities_cover() {
        // x = 1, z = 2
        let p = prefix(vec![(Quant::Exists, vec![1]), (Quant::Forall, vec![2])]);
        let phi = DisjunctQbf::new(p, vec![eqs(&[(&[1, 2], false)]), eqs(&[(&[1, 2], true)])]).unwrap();
        let out = eliminate_universal_block_aff(&triangulate(&phi).unwrap()).unwrap();
        let got: BTreeSet<ConjunctiveFormula> = out.disjuncts.into_iter().collect();
        let want: BTreeSet<ConjunctiveFormula> = [eqs(&[(&[1], false)]), eqs(&[(&[1], true)])].into();
        assert_eq!(got, want);
        assert!(solve_affine(&phi).unwrap());
    }
}
