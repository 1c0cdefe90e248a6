//! Elimination of guarded universal sets and enhanced-backdoor evaluation.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::affine::{solve_affine, AffineError};
use crate::class::{deletion_violation, BaseClass, Violation};
use crate::formula::{
    ConjunctiveFormula, DisjunctQbf, FreshVarPool, PartialAssignment, QbfFormula, Quant, Var,
};
use crate::graph::{boundary, primal_graph, universal_components};
use crate::horn::{horn_sat, is_horn, HornError};
use crate::transforms::{
    backdoor_to_disjunct, disj_expand, eliminate_variable, part_expand, TransformError,
};
use crate::twocnf::{solve_2cnf, TwoCnfError};

/// Largest intermediate disjunct count before giving up.
pub const MAX_GUARDED_DISJUNCTS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardedError {
    #[error("Y is not closed: constraint {0} leaves Y")]
    NotClosed(String),
    #[error("variable {0} of Y is not universal")]
    NotUniversal(Var),
    #[error("Y-constraints of arity {0} where units are required")]
    ArityTooHigh(usize),
    #[error("{disjuncts} disjuncts exceed the limit of {limit}")]
    TooLarge { disjuncts: usize, limit: usize },
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("not in the class after reduction: {0}")]
    ClassViolation(Violation),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    TwoCnf(#[from] TwoCnfError),
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Horn(#[from] HornError),
}

fn y_count(vars: &[Var], y_set: &BTreeSet<Var>) -> usize {
    vars.iter().filter(|v| y_set.contains(v)).count()
}

/// `Δ(φ,Y)`.
pub fn disjunct_arity(phi: &ConjunctiveFormula, y_set: &BTreeSet<Var>) -> usize {
    phi.constraints().map(|c| y_count(&c.vars(), y_set)).max().unwrap_or(0)
}

fn check_closed(phi: &DisjunctQbf, y_set: &BTreeSet<Var>) -> Result<(), GuardedError> {
    for c in phi.constraints() {
        let vs = c.vars();
        let inside = y_count(&vs, y_set);
        if inside > 0 && inside < vs.len() {
            return Err(GuardedError::NotClosed(format!("{c:?}")));
        }
    }
    Ok(())
}

/// Rewrites every equation inside `Y` as its truth-table CNF.
pub fn clausify_inside(phi: &DisjunctQbf, y_set: &BTreeSet<Var>) -> DisjunctQbf {
    let disjuncts = phi
        .disjuncts
        .iter()
        .map(|d| {
            let mut out = ConjunctiveFormula::from_clauses(d.clauses.clone());
            for e in &d.equations {
                if y_count(e.vars(), y_set) > 0 {
                    out.clauses.extend(e.to_cnf());
                } else {
                    out.equations.push(e.clone());
                }
            }
            out
        })
        .collect();
    DisjunctQbf { prefix: phi.prefix.clone(), disjuncts }
}

/// `Y_N`: the variables of `Y` left unmatched by a maximum matching
/// between `Y` and the disjuncts that contain them.
pub fn closed_unit_reduce(phi: &DisjunctQbf, y_set: &BTreeSet<Var>) -> Result<BTreeSet<Var>, GuardedError> {
    let mut adjacency: Vec<Vec<Var>> = Vec::with_capacity(phi.k());
    for d in &phi.disjuncts {
        let a = disjunct_arity(d, y_set);
        if a > 1 {
            return Err(GuardedError::ArityTooHigh(a));
        }
        adjacency.push(d.vars().intersection(y_set).copied().collect());
    }
    let mut owner: BTreeMap<Var, usize> = BTreeMap::new();
    for j in 0..adjacency.len() {
        let mut seen = BTreeSet::new();
        augment(j, &adjacency, &mut owner, &mut seen);
    }
    let y_n: BTreeSet<Var> = y_set.iter().copied().filter(|v| !owner.contains_key(v)).collect();
    assert!(y_set.len() - y_n.len() <= phi.k(), "matched more variables than disjuncts");
    Ok(y_n)
}

fn augment(j: usize, adjacency: &[Vec<Var>], owner: &mut BTreeMap<Var, usize>, seen: &mut BTreeSet<Var>) -> bool {
    for &v in &adjacency[j] {
        if !seen.insert(v) {
            continue;
        }
        let free = match owner.get(&v) {
            None => true,
            Some(&other) => augment(other, adjacency, owner, seen),
        };
        if free {
            owner.insert(v, j);
            return true;
        }
    }
    false
}

/// Result of [`greedy_falsify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GreedyOutcome {
    /// Assignment of `Y_N` falsifying every disjunct of arity above one.
    Falsified(PartialAssignment),
    /// A surviving disjunct and a hitting set of it with respect to `Y`.
    Stuck { index: usize, hitting_set: BTreeSet<Var> },
}

fn falsified(phi: &ConjunctiveFormula, tau: &PartialAssignment) -> bool {
    phi.clauses
        .iter()
        .any(|c| c.lits().iter().all(|l| tau.get(l.var()) == Some(!l.is_positive())))
}

/// Greedily falsifies the high-arity disjuncts using clauses inside `Y_N`.
pub fn greedy_falsify(phi: &DisjunctQbf, y_set: &BTreeSet<Var>, y_n: &BTreeSet<Var>) -> GreedyOutcome {
    let high: Vec<usize> = (0..phi.k()).filter(|&j| disjunct_arity(&phi.disjuncts[j], y_set) > 1).collect();
    let mut beta = PartialAssignment::new();
    let mut progress = true;
    while progress {
        progress = false;
        for &j in &high {
            let d = &phi.disjuncts[j];
            if falsified(d, &beta) {
                continue;
            }
            let eligible = d.clauses.iter().find(|c| {
                !c.is_empty() && c.vars().all(|v| y_n.contains(&v) && !beta.contains(v))
            });
            if let Some(c) = eligible {
                for l in c.lits() {
                    beta.set(l.var(), !l.is_positive());
                }
                progress = true;
            }
        }
    }
    if let Some(&index) = high.iter().find(|&&j| !falsified(&phi.disjuncts[j], &beta)) {
        let d = &phi.disjuncts[index];
        let own = d.vars();
        let hitting_set: BTreeSet<Var> = beta
            .domain()
            .into_iter()
            .chain(y_set.difference(y_n).copied())
            .filter(|v| own.contains(v))
            .collect();
        for c in d.constraints() {
            let vs = c.vars();
            assert!(
                y_count(&vs, y_set) == 0 || vs.iter().any(|v| hitting_set.contains(v)),
                "greedy hitting set misses a Y-constraint"
            );
        }
        let bound = phi.k() * phi.disjuncts.iter().map(|d| disjunct_arity(d, y_set)).max().unwrap_or(0);
        assert!(hitting_set.len() <= bound, "hitting set above k·Δ");
        return GreedyOutcome::Stuck { index, hitting_set };
    }
    for &v in y_n {
        if !beta.contains(v) {
            beta.set(v, false);
        }
    }
    GreedyOutcome::Falsified(beta)
}

/// How a stuck disjunct is replaced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Replacement {
    /// `part(φ,Y_φ)` under a fresh innermost universal selector block.
    Part,
    /// `disj(φ,Y_φ)`.
    Disj,
}

/// One iteration of the β computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaStep {
    pub disjuncts: usize,
    /// Disjunct counts per `Y`-arity `0..=d`.
    pub progress: Vec<usize>,
    pub hitting_set: usize,
}

/// Working state `Φⁱ` of the β computation.
#[derive(Clone, Debug)]
pub struct GuardedElimState {
    pub current: DisjunctQbf,
    pub step: usize,
    pub selector_sets: Vec<Vec<Var>>,
    pub y_set: BTreeSet<Var>,
    pub beta: Option<PartialAssignment>,
    pub history: Vec<BetaStep>,
    replacement: Replacement,
    pool: FreshVarPool,
    d: usize,
}

impl GuardedElimState {
    pub fn new(phi: &DisjunctQbf, y_set: &BTreeSet<Var>, replacement: Replacement) -> Result<Self, GuardedError> {
        if let Some(&v) = y_set.iter().find(|&&v| !phi.prefix.is_universal(v)) {
            return Err(GuardedError::NotUniversal(v));
        }
        check_closed(phi, y_set)?;
        let current = clausify_inside(phi, y_set);
        let d = current.disjuncts.iter().map(|x| disjunct_arity(x, y_set)).max().unwrap_or(0);
        Ok(GuardedElimState {
            pool: FreshVarPool::for_formula(&current),
            current,
            step: 0,
            selector_sets: Vec::new(),
            y_set: y_set.clone(),
            beta: None,
            history: Vec::new(),
            replacement,
            d,
        })
    }

    /// `f(Φⁱ)`.
    pub fn progress(&self) -> Vec<usize> {
        let mut f = vec![0; self.d + 1];
        for x in &self.current.disjuncts {
            f[disjunct_arity(x, &self.y_set)] += 1;
        }
        f
    }

    /// Runs one iteration; returns true once β is known.
    pub fn advance(&mut self) -> Result<bool, GuardedError> {
        if self.beta.is_some() {
            return Ok(true);
        }
        let y = &self.y_set;
        let low: Vec<ConjunctiveFormula> =
            self.current.disjuncts.iter().filter(|x| disjunct_arity(x, y) <= 1).cloned().collect();
        let low_count = low.len();
        let low_qbf = DisjunctQbf { prefix: self.current.prefix.clone(), disjuncts: low };
        let y_n = closed_unit_reduce(&low_qbf, y)?;
        if y.len() - y_n.len() > low_count {
            return Err(GuardedError::BoundViolated(format!(
                "{} unmatched-away variables for {low_count} unit disjuncts",
                y.len() - y_n.len()
            )));
        }
        let f_old = self.progress();
        let size_old = self.current.k();
        let arity_old = self.current.disjuncts.iter().map(|x| disjunct_arity(x, y)).max().unwrap_or(0);
        match greedy_falsify(&self.current, y, &y_n) {
            GreedyOutcome::Falsified(beta) => {
                let left = y.iter().filter(|v| !beta.contains(**v)).count();
                if left > size_old {
                    return Err(GuardedError::BoundViolated(format!("{left} Y-variables left for {size_old} disjuncts")));
                }
                self.history.push(BetaStep { disjuncts: size_old, progress: f_old, hitting_set: 0 });
                self.beta = Some(beta);
                Ok(true)
            }
            GreedyOutcome::Stuck { index, hitting_set } => {
                let phi = &self.current.disjuncts[index];
                let (replacement, selectors) = match self.replacement {
                    Replacement::Part => {
                        let exp = part_expand(phi, &hitting_set, &mut self.pool);
                        (exp.disjuncts, exp.selectors)
                    }
                    Replacement::Disj => (disj_expand(phi, &hitting_set)?, Vec::new()),
                };
                let mut disjuncts = Vec::with_capacity(size_old + replacement.len());
                disjuncts.extend(self.current.disjuncts[..index].iter().cloned());
                disjuncts.extend(replacement);
                disjuncts.extend(self.current.disjuncts[index + 1..].iter().cloned());
                if disjuncts.len() > MAX_GUARDED_DISJUNCTS {
                    return Err(GuardedError::TooLarge { disjuncts: disjuncts.len(), limit: MAX_GUARDED_DISJUNCTS });
                }
                let prefix = self.current.prefix.with_innermost(Quant::Forall, selectors.clone());
                self.history.push(BetaStep { disjuncts: size_old, progress: f_old.clone(), hitting_set: hitting_set.len() });
                self.current = DisjunctQbf { prefix, disjuncts };
                self.selector_sets.push(selectors);
                self.step += 1;
                if self.replacement == Replacement::Part && self.current.k() > (2 * arity_old + 1) * size_old {
                    return Err(GuardedError::BoundViolated(format!(
                        "{} disjuncts after a step from {size_old} at arity {arity_old}",
                        self.current.k()
                    )));
                }
                let f_new = self.progress();
                if f_new.iter().rev().cmp(f_old.iter().rev()) != std::cmp::Ordering::Less {
                    return Err(GuardedError::BoundViolated(format!("progress {f_new:?} not below {f_old:?}")));
                }
                check_closed(&self.current, y)
                    .map_err(|e| GuardedError::BoundViolated(format!("closedness lost: {e}")))?;
                Ok(false)
            }
        }
    }

    pub fn run(&mut self) -> Result<PartialAssignment, GuardedError> {
        while !self.advance()? {}
        Ok(self.beta.clone().expect("advance returned true"))
    }
}

/// β with `Φ ⇔ Φ[β]`, and `Φ[β]`.
pub fn compute_beta(phi: &DisjunctQbf, y_set: &BTreeSet<Var>) -> Result<(PartialAssignment, DisjunctQbf), GuardedError> {
    compute_beta_with(phi, y_set, Replacement::Part)
}

pub fn compute_beta_with(
    phi: &DisjunctQbf,
    y_set: &BTreeSet<Var>,
    replacement: Replacement,
) -> Result<(PartialAssignment, DisjunctQbf), GuardedError> {
    let mut state = GuardedElimState::new(phi, y_set, replacement)?;
    let beta = state.run()?;
    Ok((beta.clone(), phi.apply(&beta)))
}

/// β for a conjunctive formula, computed on `disj(φ, δ(Y))`.
pub fn guarded_beta(phi: &QbfFormula, y_set: &BTreeSet<Var>) -> Result<PartialAssignment, GuardedError> {
    if let Some(&v) = y_set.iter().find(|&&v| !phi.prefix.is_universal(v)) {
        return Err(GuardedError::NotUniversal(v));
    }
    let delta = boundary(&primal_graph(&phi.to_disjunct()), y_set);
    let expanded = DisjunctQbf { prefix: phi.prefix.clone(), disjuncts: disj_expand(&phi.matrix, &delta)? };
    let (beta, _) = compute_beta(&expanded, y_set)?;
    Ok(beta)
}

/// `Φ[β]` for the guarded universal set `Y`.
pub fn eliminate_guarded(phi: &QbfFormula, y_set: &BTreeSet<Var>) -> Result<QbfFormula, GuardedError> {
    Ok(phi.apply(&guarded_beta(phi, y_set)?))
}

/// Decides `Φ` from an enhanced backdoor `B` to `class`.
pub fn evaluate_with_enhanced_backdoor(
    phi: &QbfFormula,
    b_set: &BTreeSet<Var>,
    class: BaseClass,
) -> Result<bool, GuardedError> {
    let y = universal_components(&phi.to_disjunct(), b_set);
    let beta = guarded_beta(phi, &y)?;
    let reduced = phi.apply(&beta);
    let backdoor: BTreeSet<Var> = b_set
        .iter()
        .chain(y.iter())
        .copied()
        .filter(|&v| !beta.contains(v) && reduced.prefix.contains(v))
        .collect();
    if let Some(v) = deletion_violation(&reduced, &backdoor, class) {
        return Err(GuardedError::ClassViolation(v));
    }
    match class {
        BaseClass::TwoCnf { .. } => Ok(solve_2cnf(&backdoor_to_disjunct(&reduced, &backdoor)?)?),
        BaseClass::Affine { .. } => {
            if reduced.matrix.is_top() {
                return Ok(true);
            }
            Ok(solve_affine(&backdoor_to_disjunct(&reduced, &backdoor)?)?)
        }
        BaseClass::HornExists => solve_horn_backdoor(&reduced, &backdoor),
    }
}

/// Quantifier-eliminates `B` innermost first, dropping unsatisfiable
/// disjuncts after every step, then asks for one satisfiable disjunct.
fn solve_horn_backdoor(phi: &QbfFormula, b_set: &BTreeSet<Var>) -> Result<bool, GuardedError> {
    let mut order: Vec<Var> = b_set.iter().copied().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(phi.prefix.block_of(v)), std::cmp::Reverse(v)));
    let mut cur = phi.to_disjunct();
    let mut pool = FreshVarPool::for_formula(&cur);
    prune_unsatisfiable(&mut cur)?;
    for v in order {
        cur = eliminate_variable(&cur, v, &mut pool)?;
        prune_unsatisfiable(&mut cur)?;
        if cur.k() > MAX_GUARDED_DISJUNCTS {
            return Err(GuardedError::TooLarge { disjuncts: cur.k(), limit: MAX_GUARDED_DISJUNCTS });
        }
    }
    for d in &cur.disjuncts {
        if horn_sat(d)?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Drops HORN disjuncts without a model; others are kept as they are.
fn prune_unsatisfiable(phi: &mut DisjunctQbf) -> Result<(), GuardedError> {
    let mut kept = Vec::with_capacity(phi.k());
    for d in phi.disjuncts.drain(..) {
        if !is_horn(&d) || horn_sat(&d)?.is_some() {
            kept.push(d.canonical());
        }
    }
    kept.sort();
    kept.dedup();
    phi.disjuncts = kept;
    Ok(())
}
