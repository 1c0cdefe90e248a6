//! Rewritings between backdoor form and disjunct form: quantifier
//! elimination, `disj`, `part`, splitting and squishing.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::{
    AffineEquation, Clause, ConjunctiveFormula, DisjunctQbf, FreshVarPool, Lit, PartialAssignment, Quant,
    QbfFormula, Var,
};

/// Largest variable set `disj` will expand.
pub const MAX_DISJ_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("expansion over {0} variables exceeds the limit of 20")]
    TooManyVars(usize),
    #[error("variable {0} is not in the prefix")]
    NotInPrefix(Var),
    #[error("equations cannot be widened by selector literals")]
    NotClausal,
    #[error("constraint outside the unit/equality fragment: {0}")]
    OutsideFragment(String),
    #[error("split needs at least two pieces, got {0}")]
    SplitArity(usize),
    #[error("{have} disjuncts exceed the {capacity} slots of squish({k},{p})")]
    TooManyDisjuncts { have: usize, capacity: usize, k: usize, p: u32 },
    #[error("invalid squish parameters k={k}, p={p}")]
    InvalidSquish { k: usize, p: u32 },
    #[error("empty disjunction")]
    EmptyDisjunction,
}

/// Quantifier elimination of `x` with copies of later-block variables.
///
/// Existential: `φ_j[x=0]` for all `j`, then `φ'_j[x=1]`. Universal: all
/// products `φ_j[x=0] ∧ φ'_l[x=1]`.
pub fn eliminate_variable(phi: &DisjunctQbf, x: Var, pool: &mut FreshVarPool) -> Result<DisjunctQbf, TransformError> {
    let block = phi.prefix.block_of(x).ok_or(TransformError::NotInPrefix(x))?;
    pool.reserve_through(phi.max_var());
    let used = phi.matrix_vars();
    let mut copies: BTreeMap<Var, Var> = BTreeMap::new();
    for b in &phi.prefix.blocks()[block + 1..] {
        for &v in &b.vars {
            if used.contains(&v) {
                copies.insert(v, pool.fresh());
            }
        }
    }
    let zero = PartialAssignment::from_pairs([(x, false)]);
    let one = PartialAssignment::from_pairs([(x, true)]);
    let low: Vec<ConjunctiveFormula> = phi.disjuncts.iter().map(|d| d.apply(&zero)).collect();
    let high: Vec<ConjunctiveFormula> = phi.disjuncts.iter().map(|d| d.rename(&copies).apply(&one)).collect();
    let disjuncts = match phi.prefix.blocks()[block].quant {
        Quant::Exists => low.into_iter().chain(high).collect(),
        Quant::Forall => low.iter().flat_map(|a| high.iter().map(move |b| a.and(b))).collect(),
    };
    let prefix = phi.prefix.with_copies(&copies).without_vars(&BTreeSet::from([x]));
    Ok(DisjunctQbf { prefix, disjuncts })
}

/// Eliminates the variables of `b_set`, innermost first.
pub fn backdoor_to_disjunct_qe(
    phi: &QbfFormula,
    b_set: &BTreeSet<Var>,
    pool: &mut FreshVarPool,
) -> Result<DisjunctQbf, TransformError> {
    let mut order: Vec<Var> = b_set.iter().copied().collect();
    for &v in &order {
        if !phi.prefix.contains(v) {
            return Err(TransformError::NotInPrefix(v));
        }
    }
    order.sort_by_key(|&v| (std::cmp::Reverse(phi.prefix.block_of(v)), std::cmp::Reverse(v)));
    let mut cur = phi.to_disjunct();
    for v in order {
        cur = eliminate_variable(&cur, v, pool)?;
    }
    Ok(cur)
}

/// Unit constraints fixing `tau`, as equations or as clauses.
fn units(tau: &PartialAssignment, as_equations: bool) -> ConjunctiveFormula {
    let mut out = ConjunctiveFormula::top();
    for (v, b) in tau.iter() {
        if as_equations {
            out.equations.push(AffineEquation::new([v], b));
        } else {
            out.clauses.push(Clause::unit(Lit::new(v, b)));
        }
    }
    out
}

fn unit_style(phi: &ConjunctiveFormula) -> bool {
    phi.clauses.is_empty() && !phi.equations.is_empty()
}

/// `disj(φ,X)`: `φ[τ] ∧ U_τ` for every `τ` over `X`, first variable most significant.
pub fn disj_expand(phi: &ConjunctiveFormula, x_set: &BTreeSet<Var>) -> Result<Vec<ConjunctiveFormula>, TransformError> {
    disj_expand_styled(phi, x_set, unit_style(phi))
}

fn disj_expand_styled(
    phi: &ConjunctiveFormula,
    x_set: &BTreeSet<Var>,
    as_equations: bool,
) -> Result<Vec<ConjunctiveFormula>, TransformError> {
    if x_set.len() > MAX_DISJ_VARS {
        return Err(TransformError::TooManyVars(x_set.len()));
    }
    let xs: Vec<Var> = x_set.iter().copied().collect();
    let out: Vec<ConjunctiveFormula> = (0..1u64 << xs.len())
        .map(|mask| {
            let tau = PartialAssignment::from_mask(&xs, mask);
            phi.apply(&tau).and(&units(&tau, as_equations))
        })
        .collect();
    assert_eq!(out.len(), 1usize << xs.len());
    Ok(out)
}

/// `𝒬.disj(φ,B)` on the same prefix.
pub fn backdoor_to_disjunct(phi: &QbfFormula, b_set: &BTreeSet<Var>) -> Result<DisjunctQbf, TransformError> {
    if let Some(&v) = b_set.iter().find(|&&v| !phi.prefix.contains(v)) {
        return Err(TransformError::NotInPrefix(v));
    }
    Ok(DisjunctQbf { prefix: phi.prefix.clone(), disjuncts: disj_expand(&phi.matrix, b_set)? })
}

/// Conjunctive form with an innermost existential selector block `Z`.
///
/// Disjunct `i` (after padding to a power of two) owns tuple `t_i`, the
/// binary digits of `i`; each of its clauses is widened by `z ≠ t_i`.
pub fn disjunct_to_backdoor(phi: &DisjunctQbf) -> Result<(QbfFormula, BTreeSet<Var>), TransformError> {
    if phi.disjuncts.iter().any(|d| !d.equations.is_empty()) {
        return Err(TransformError::NotClausal);
    }
    match phi.k() {
        0 => {
            return Ok((
                QbfFormula { prefix: phi.prefix.clone(), matrix: ConjunctiveFormula::bottom() },
                BTreeSet::new(),
            ))
        }
        1 => {
            return Ok((
                QbfFormula { prefix: phi.prefix.clone(), matrix: phi.disjuncts[0].clone() },
                BTreeSet::new(),
            ))
        }
        _ => {}
    }
    let size = phi.k().next_power_of_two();
    let q = size.trailing_zeros() as usize;
    let mut pool = FreshVarPool::for_formula(phi);
    let z = pool.take(q);
    let mut clauses = Vec::new();
    for i in 0..size {
        let d = if i < phi.k() { &phi.disjuncts[i] } else { &phi.disjuncts[0] };
        let guard: Vec<Lit> = (0..q).map(|j| Lit::new(z[j], i >> (q - 1 - j) & 1 == 0)).collect();
        for c in &d.clauses {
            let widened = Clause::new(c.lits().iter().copied().chain(guard.iter().copied()))
                .expect("selector variables are fresh");
            clauses.push(widened);
        }
    }
    let prefix = phi.prefix.with_innermost(Quant::Exists, z.clone());
    Ok((QbfFormula { prefix, matrix: ConjunctiveFormula::from_clauses(clauses) }, z.into_iter().collect()))
}

/// Output of [`part_expand`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartExpansion {
    pub disjuncts: Vec<ConjunctiveFormula>,
    /// `a_1 … a_t`, aligned with the sorted variables of `X`.
    pub selectors: Vec<Var>,
}

/// `part(φ,X)`: each constraint of `C(φ,X)` goes to the part of its least `X` variable.
pub fn part_expand(phi: &ConjunctiveFormula, x_set: &BTreeSet<Var>, pool: &mut FreshVarPool) -> PartExpansion {
    pool.reserve_through(phi.max_var());
    let xs: Vec<Var> = x_set.iter().copied().collect();
    let t = xs.len();
    let selectors = pool.take(t);
    let as_equations = unit_style(phi);
    let mut parts = vec![ConjunctiveFormula::top(); t + 1];
    for c in &phi.clauses {
        let slot = xs.iter().position(|&x| c.contains_var(x)).map_or(0, |i| i + 1);
        parts[slot].clauses.push(c.clone());
    }
    for e in &phi.equations {
        let slot = xs.iter().position(|&x| e.contains_var(x)).map_or(0, |i| i + 1);
        parts[slot].equations.push(e.clone());
    }
    let unit = |v: Var, b: bool| {
        units(&PartialAssignment::from_pairs([(v, b)]), as_equations)
    };
    let mut disjuncts = Vec::with_capacity(2 * t + 1);
    let mut first = parts[0].clone();
    for &a in &selectors {
        first = first.and(&unit(a, false));
    }
    disjuncts.push(first);
    for i in 0..t {
        for b in [true, false] {
            let tau = PartialAssignment::from_pairs([(xs[i], b)]);
            disjuncts.push(unit(selectors[i], true).and(&parts[i + 1].apply(&tau)).and(&unit(xs[i], b)));
        }
    }
    assert_eq!(disjuncts.len(), 2 * t + 1);
    let (touching, _) = phi.split_touching(x_set);
    if touching.is_clausal() {
        let total: usize = disjuncts.iter().map(ConjunctiveFormula::size).sum();
        assert!(total <= phi.size() + 5 * t + 2, "part size bound violated");
    }
    PartExpansion { disjuncts, selectors }
}

/// `⋀_τ part[τ]` over all selector assignments, as a list of conjuncts.
pub fn part_selector_conjuncts(expansion: &PartExpansion) -> Vec<Vec<ConjunctiveFormula>> {
    let t = expansion.selectors.len();
    (0..1u64 << t)
        .map(|mask| {
            let tau = PartialAssignment::from_mask(&expansion.selectors, mask);
            expansion.disjuncts.iter().map(|d| d.apply(&tau)).collect()
        })
        .collect()
}

enum Atom {
    /// Literal `ℓ` as a unit.
    Unit(Lit),
    /// `u ⊕ v = b`.
    Pair(Var, Var, bool),
    Bottom,
}

fn atoms(phi: &ConjunctiveFormula) -> Result<Vec<Atom>, TransformError> {
    let mut out = Vec::with_capacity(phi.len());
    for c in &phi.clauses {
        match c.lits() {
            [] => out.push(Atom::Bottom),
            [l] => out.push(Atom::Unit(*l)),
            _ => return Err(TransformError::OutsideFragment(format!("{c:?}"))),
        }
    }
    for e in &phi.equations {
        match e.vars() {
            [] => out.push(Atom::Bottom),
            [v] => out.push(Atom::Unit(Lit::new(*v, e.rhs()))),
            [u, v] => out.push(Atom::Pair(*u, *v, e.rhs())),
            _ => return Err(TransformError::OutsideFragment(format!("{e:?}"))),
        }
    }
    Ok(out)
}

/// Splits a unit/equality formula into `q` pieces chained through fresh variables.
pub fn split_formula(
    phi: &ConjunctiveFormula,
    q: usize,
    pool: &mut FreshVarPool,
) -> Result<Vec<ConjunctiveFormula>, TransformError> {
    if q < 2 {
        return Err(TransformError::SplitArity(q));
    }
    let atoms = atoms(phi)?;
    pool.reserve_through(phi.max_var());
    let mut pieces = vec![ConjunctiveFormula::top(); q];
    for atom in atoms {
        let (head, tail_var, tail_rhs) = match atom {
            Atom::Bottom => {
                pieces[0].equations.push(AffineEquation::bottom());
                continue;
            }
            Atom::Unit(l) => (None, l.var(), !l.is_positive()),
            Atom::Pair(u, v, b) => (Some((v, b)), u, false),
        };
        let ys = pool.take(q - 1);
        pieces[0].equations.push(match head {
            None => AffineEquation::new([ys[0]], true),
            Some((v, b)) => AffineEquation::new([ys[0], v], b),
        });
        for j in 1..q - 1 {
            pieces[j].equations.push(AffineEquation::new([ys[j - 1], ys[j]], false));
        }
        pieces[q - 1].equations.push(AffineEquation::new([ys[q - 2], tail_var], tail_rhs));
    }
    Ok(pieces)
}

/// Rewrites unit and two-variable equations as clauses.
pub fn gamma_aff_to_clauses(phi: &ConjunctiveFormula) -> Result<ConjunctiveFormula, TransformError> {
    let mut clauses = phi.clauses.clone();
    for e in &phi.equations {
        match *e.vars() {
            [] if e.rhs() => clauses.push(Clause::empty()),
            [] => {}
            [v] => clauses.push(Clause::unit(Lit::new(v, e.rhs()))),
            [u, v] => {
                let b = e.rhs();
                clauses.push(Clause::new([Lit::new(u, true), Lit::new(v, b)]).expect("distinct"));
                clauses.push(Clause::new([Lit::new(u, false), Lit::new(v, !b)]).expect("distinct"));
            }
            _ => return Err(TransformError::OutsideFragment(format!("{e:?}"))),
        }
    }
    Ok(ConjunctiveFormula::from_clauses(clauses))
}

pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `r`-subsets of `0..n` in colexicographic order.
pub fn colex_subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    out
}

/// Squishes up to `C(k,2^p)` disjuncts into `k`, appending `∃(Y∪Z) ∀W`.
pub fn squish(phi: &DisjunctQbf, k: usize, p: u32, pool: &mut FreshVarPool) -> Result<DisjunctQbf, TransformError> {
    let width = 1usize.checked_shl(p).filter(|&w| w <= k && k > 0).ok_or(TransformError::InvalidSquish { k, p })?;
    let capacity = binomial(k, width);
    if phi.k() == 0 {
        return Err(TransformError::EmptyDisjunction);
    }
    if phi.k() as u128 > capacity {
        return Err(TransformError::TooManyDisjuncts { have: phi.k(), capacity: capacity as usize, k, p });
    }
    let capacity = capacity as usize;
    let mut padded = phi.disjuncts.clone();
    while padded.len() < capacity {
        padded.push(phi.disjuncts[0].clone());
    }
    pool.reserve_through(phi.max_var());
    if p == 0 {
        for d in &padded {
            atoms(d)?;
        }
        return Ok(DisjunctQbf { prefix: phi.prefix.clone(), disjuncts: padded });
    }
    let subsets = colex_subsets(k, width);
    let mut targets = vec![ConjunctiveFormula::top(); k];
    let first_y = pool.peek();
    for (i, d) in padded.iter().enumerate() {
        let pieces = split_formula(d, width, pool)?;
        for (j, piece) in pieces.into_iter().enumerate() {
            let s = subsets[i][j];
            targets[s] = targets[s].and(&piece);
        }
    }
    let y: Vec<Var> = (first_y..pool.peek()).collect();
    let p = p as usize;
    let z: Vec<Vec<Var>> = (0..k).map(|_| pool.take(p)).collect();
    let w = pool.take(p);
    for (s, target) in targets.iter_mut().enumerate() {
        for l in 0..p {
            target.equations.push(AffineEquation::new([z[s][l], w[l]], false));
        }
    }
    let mut ex = y;
    ex.extend(z.iter().flatten().copied());
    let prefix = phi.prefix.with_innermost(Quant::Exists, ex).with_innermost(Quant::Forall, w);
    let m: usize = padded.iter().map(ConjunctiveFormula::len).sum();
    let out_atoms: usize = targets.iter().map(ConjunctiveFormula::len).sum();
    assert_eq!(out_atoms, m * width + k * p, "squish atom count");
    assert_eq!(targets.len(), k);
    Ok(DisjunctQbf { prefix, disjuncts: targets })
}

/// The `(k', p)` chosen for one squishing round from `k` disjuncts.
pub fn squish_step(k: usize) -> Option<(usize, u32)> {
    for kp in 4..k {
        let mut best: Option<(u128, u32)> = None;
        let mut p = 1u32;
        while (1usize << p) <= kp {
            let w = 1usize << p;
            if 3 * w >= kp && 3 * w <= 2 * kp {
                let c = binomial(kp, w);
                if c >= k as u128 && best.is_none_or(|(bc, _)| c > bc) {
                    best = Some((c, p));
                }
            }
            p += 1;
        }
        if let Some((_, p)) = best {
            return Some((kp, p));
        }
    }
    None
}

/// Repeated squishing down to exactly four disjuncts.
pub fn squish_to_four(phi: &DisjunctQbf, pool: &mut FreshVarPool) -> Result<DisjunctQbf, TransformError> {
    if phi.k() == 0 {
        return Err(TransformError::EmptyDisjunction);
    }
    for d in &phi.disjuncts {
        atoms(d)?;
    }
    let mut cur = phi.clone();
    while cur.k() < 4 {
        cur.disjuncts.push(cur.disjuncts[0].clone());
    }
    while cur.k() > 4 {
        let (kp, p) = squish_step(cur.k()).ok_or(TransformError::InvalidSquish { k: cur.k(), p: 0 })?;
        cur = squish(&cur, kp, p, pool)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::QuantifierPrefix;

    #[test]
    fn disj_single_var() {
        let phi = ConjunctiveFormula::from_dimacs(&[&[1, 2]]);
        let out = disj_expand(&phi, &BTreeSet::from([1])).unwrap();
        assert_eq!(out[0], ConjunctiveFormula::from_dimacs(&[&[2], &[-1]]));
        assert_eq!(out[1], ConjunctiveFormula::from_dimacs(&[&[1]]));
    }

    #[test]
    fn part_worked_example() {
        // x1=1, x2=2, z=3
        let phi = ConjunctiveFormula::from_dimacs(&[&[1, 2], &[1, 3], &[2, 3]]);
        let mut pool = FreshVarPool::above(3);
        let e = part_expand(&phi, &BTreeSet::from([1, 2]), &mut pool);
        assert_eq!(e.selectors, vec![4, 5]);
        let expect: Vec<ConjunctiveFormula> = vec![
            ConjunctiveFormula::from_dimacs(&[&[-4], &[-5]]),
            ConjunctiveFormula::from_dimacs(&[&[4], &[1]]),
            ConjunctiveFormula::from_dimacs(&[&[4], &[2], &[3], &[-1]]),
            ConjunctiveFormula::from_dimacs(&[&[5], &[2]]),
            ConjunctiveFormula::from_dimacs(&[&[5], &[3], &[-2]]),
        ];
        let got: Vec<ConjunctiveFormula> = e.disjuncts.iter().map(ConjunctiveFormula::canonical).collect();
        let want: Vec<ConjunctiveFormula> = expect.iter().map(ConjunctiveFormula::canonical).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn split_unit_example() {
        let phi = ConjunctiveFormula::from_dimacs(&[&[1]]);
        let mut pool = FreshVarPool::above(1);
        let pieces = split_formula(&phi, 2, &mut pool).unwrap();
        assert_eq!(pieces[0].equations, vec![AffineEquation::new([2], true)]);
        assert_eq!(pieces[1].equations, vec![AffineEquation::new([1, 2], false)]);
    }

    #[test]
    fn squish_path() {
        assert_eq!(squish_step(6), Some((4, 1)));
        assert_eq!(squish_step(20), Some((7, 2)));
        assert_eq!(squish_step(7), Some((5, 1)));
        assert_eq!(squish_step(5), Some((4, 1)));
    }

    #[test]
    fn colex_order() {
        assert_eq!(
            colex_subsets(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]
        );
    }

    #[test]
    fn exists_elimination_of_innermost() {
        let prefix = QuantifierPrefix::new(vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2])]).unwrap();
        let phi = DisjunctQbf::new(prefix, vec![ConjunctiveFormula::from_dimacs(&[&[1, 2]])]).unwrap();
        let mut pool = FreshVarPool::for_formula(&phi);
        let out = eliminate_variable(&phi, 2, &mut pool).unwrap();
        assert_eq!(out.disjuncts, vec![ConjunctiveFormula::from_dimacs(&[&[1]]), ConjunctiveFormula::top()]);
        assert_eq!(out.prefix.vars(), vec![1]);
    }
}
