//! Evaluation of disjunctive 2-CNF QBF: resolution closure, selector
//! groups, reducible-variable splitting and block elimination.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::{
    Clause, ConjunctiveFormula, DisjunctQbf, FreshVarPool, Lit, PartialAssignment, Quant, QuantifierPrefix, Var,
};
use crate::trace::SolveTrace;
use crate::transforms;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwoCnfError {
    #[error("clause {0} is wider than two literals")]
    TooWide(String),
    #[error("equations are not allowed in 2-CNF input")]
    HasEquations,
    #[error("innermost block is {found:?}, expected {expected:?}")]
    WrongInnermost { expected: Quant, found: Option<Quant> },
    #[error("disjunct {0} is not propagated")]
    NotPropagated(usize),
    #[error("variable {0} is not reducible in the selected group")]
    NotReducible(Var),
    #[error("unknown group")]
    UnknownGroup,
    #[error("existential block present")]
    HasExistential,
    #[error("bound violated: {0}")]
    BoundViolated(String),
}

/// `prop(φ)`: resolution-closed 2-CNF without subsumed clauses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Propagated2Cnf {
    pub units: BTreeSet<Lit>,
    pub binaries: BTreeSet<Clause>,
    pub bottom: bool,
}

impl Propagated2Cnf {
    pub fn bottom() -> Propagated2Cnf {
        Propagated2Cnf { bottom: true, ..Default::default() }
    }

    pub fn is_top(&self) -> bool {
        !self.bottom && self.units.is_empty() && self.binaries.is_empty()
    }

    /// Units first, then binaries; `⊥` as one empty clause.
    pub fn to_formula(&self) -> ConjunctiveFormula {
        if self.bottom {
            return ConjunctiveFormula::bottom();
        }
        let mut clauses: Vec<Clause> = self.units.iter().map(|&l| Clause::unit(l)).collect();
        clauses.extend(self.binaries.iter().cloned());
        ConjunctiveFormula::from_clauses(clauses)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self.units.iter().map(|l| l.var()).collect();
        for c in &self.binaries {
            out.extend(c.vars());
        }
        out
    }

    /// Number of unit clauses over `set`.
    pub fn units_in(&self, set: &BTreeSet<Var>) -> usize {
        self.units.iter().filter(|l| set.contains(&l.var())).count()
    }

    /// `self ⊨ c`, complete because the closure holds every prime implicate.
    pub fn implies_clause(&self, c: &Clause) -> bool {
        if self.bottom || c.lits().iter().any(|l| self.units.contains(l)) {
            return true;
        }
        c.len() == 2 && self.binaries.contains(c)
    }

    /// `self ⊨ other`.
    pub fn implies(&self, other: &Propagated2Cnf) -> bool {
        if self.bottom {
            return true;
        }
        if other.bottom {
            return false;
        }
        other.units.iter().all(|l| self.units.contains(l)) && other.binaries.iter().all(|c| self.implies_clause(c))
    }

    /// Removes every clause touching `vars`.
    pub fn without_vars(&self, vars: &BTreeSet<Var>) -> Propagated2Cnf {
        Propagated2Cnf {
            units: self.units.iter().copied().filter(|l| !vars.contains(&l.var())).collect(),
            binaries: self.binaries.iter().filter(|c| !c.vars().any(|v| vars.contains(&v))).cloned().collect(),
            bottom: self.bottom,
        }
    }
}

/// Implication graph over the literals of a 2-CNF, with transitive closure.
pub struct ImplicationGraph {
    vars: Vec<Var>,
    reach: Vec<FixedBitSet>,
}

impl ImplicationGraph {
    fn node(&self, l: Lit) -> usize {
        let i = self.vars.binary_search(&l.var()).expect("literal of the formula");
        2 * i + usize::from(!l.is_positive())
    }

    fn lit(&self, node: usize) -> Lit {
        Lit::new(self.vars[node / 2], node % 2 == 0)
    }

    /// Arcs `¬a → b` and `¬b → a` per clause `(a ∨ b)`; `¬a → a` per unit.
    pub fn build(clauses: &[Clause]) -> ImplicationGraph {
        let vars: Vec<Var> = clauses.iter().flat_map(|c| c.vars()).collect::<BTreeSet<_>>().into_iter().collect();
        let n = 2 * vars.len();
        let mut g = ImplicationGraph { vars, reach: vec![FixedBitSet::with_capacity(n); n] };
        for c in clauses {
            match c.lits() {
                [a] => {
                    let (na, pa) = (g.node(a.negate()), g.node(*a));
                    g.reach[na].insert(pa);
                }
                [a, b] => {
                    let (na, pb) = (g.node(a.negate()), g.node(*b));
                    let (nb, pa) = (g.node(b.negate()), g.node(*a));
                    g.reach[na].insert(pb);
                    g.reach[nb].insert(pa);
                }
                _ => {}
            }
        }
        g
    }

    /// Warshall closure over bitset rows.
    pub fn close(&mut self) {
        let n = self.reach.len();
        for k in 0..n {
            let row_k = self.reach[k].clone();
            for i in 0..n {
                if i != k && self.reach[i].contains(k) {
                    self.reach[i].union_with(&row_k);
                }
            }
        }
    }

    pub fn reaches(&self, a: Lit, b: Lit) -> bool {
        self.reach[self.node(a)].contains(self.node(b))
    }
}

fn check_2cnf(phi: &ConjunctiveFormula) -> Result<(), TwoCnfError> {
    if !phi.equations.is_empty() {
        return Err(TwoCnfError::HasEquations);
    }
    if let Some(c) = phi.clauses.iter().find(|c| c.len() > 2) {
        return Err(TwoCnfError::TooWide(format!("{c:?}")));
    }
    Ok(())
}

/// `prop(φ)` by transitive closure of the implication graph.
pub fn propagate(phi: &ConjunctiveFormula) -> Result<Propagated2Cnf, TwoCnfError> {
    check_2cnf(phi)?;
    if phi.clauses.iter().any(Clause::is_empty) {
        return Ok(Propagated2Cnf::bottom());
    }
    let mut g = ImplicationGraph::build(&phi.clauses);
    g.close();
    let n = g.reach.len();
    let mut units = BTreeSet::new();
    let mut unit_var = vec![false; n / 2];
    for node in 0..n {
        if g.reach[node ^ 1].contains(node) {
            if unit_var[node / 2] {
                return Ok(Propagated2Cnf::bottom());
            }
            unit_var[node / 2] = true;
            units.insert(g.lit(node));
        }
    }
    let mut binaries = BTreeSet::new();
    for a in 0..n {
        if unit_var[a / 2] {
            continue;
        }
        for b in g.reach[a ^ 1].ones() {
            if b / 2 <= a / 2 || unit_var[b / 2] {
                continue;
            }
            binaries.insert(Clause::new([g.lit(a), g.lit(b)]).expect("distinct variables"));
        }
    }
    Ok(Propagated2Cnf { units, binaries, bottom: false })
}

fn propagate_all(phi: &DisjunctQbf) -> Result<Vec<Propagated2Cnf>, TwoCnfError> {
    phi.disjuncts.iter().map(propagate).collect()
}

fn is_propagated(d: &ConjunctiveFormula) -> Result<bool, TwoCnfError> {
    Ok(propagate(d)?.to_formula().canonical() == d.canonical())
}

fn innermost_is(prefix: &QuantifierPrefix, quant: Quant) -> Result<BTreeSet<Var>, TwoCnfError> {
    match prefix.innermost() {
        Some(b) if b.quant == quant => Ok(b.vars.iter().copied().collect()),
        other => Err(TwoCnfError::WrongInnermost { expected: quant, found: other.map(|b| b.quant) }),
    }
}

/// Removes an innermost existential block and every clause touching it.
pub fn drop_innermost_existential(phi: &DisjunctQbf) -> Result<DisjunctQbf, TwoCnfError> {
    let xq = innermost_is(&phi.prefix, Quant::Exists)?;
    for (i, d) in phi.disjuncts.iter().enumerate() {
        if !is_propagated(d)? {
            return Err(TwoCnfError::NotPropagated(i));
        }
    }
    Ok(DisjunctQbf {
        prefix: phi.prefix.without_innermost(),
        disjuncts: phi.disjuncts.iter().map(|d| d.split_touching(&xq).1).collect(),
    })
}

/// Selector groups `Φ_L` keyed by their literal set over `A`.
#[derive(Clone, Debug)]
pub struct SelState {
    pub groups: BTreeMap<Vec<Lit>, Vec<Propagated2Cnf>>,
    /// `a_1, a_2, …` in allocation order.
    pub selectors: Vec<Var>,
    pub pool: FreshVarPool,
    /// Disjunct count of the formula entering `sel`.
    pub k: usize,
    /// `…∃(X_{q−1} ∪ A) ∀X_q`.
    pub prefix: QuantifierPrefix,
    pub xq: BTreeSet<Var>,
    pub xq_minus_1: BTreeSet<Var>,
    pub updates: usize,
}

impl SelState {
    pub fn num_disjuncts(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    /// Cap on selector count `2k² + k`.
    pub fn selector_cap(&self) -> usize {
        2 * self.k * self.k + self.k
    }

    fn unit_cap(&self) -> usize {
        2 * self.k
    }

    fn selector(&mut self, index: usize) -> Var {
        while self.selectors.len() <= index {
            let a = self.pool.fresh();
            self.selectors.push(a);
            let block = self.prefix.num_blocks() - 2;
            self.prefix = self.prefix.with_vars_in_block(block, &[a]);
        }
        self.selectors[index]
    }
}

/// `2^e` saturating into `u128`.
fn pow2(e: usize) -> u128 {
    if e >= 127 {
        u128::MAX
    } else {
        1u128 << e
    }
}

fn with_units(base: &ConjunctiveFormula, lits: &[Lit]) -> ConjunctiveFormula {
    let mut out = base.clone();
    out.clauses.extend(lits.iter().map(|&l| Clause::unit(l)));
    out
}

/// Property (A2): all members share the clauses free of `X_q`.
fn shares_outer_part(members: &[Propagated2Cnf], xq: &BTreeSet<Var>) -> bool {
    let mut it = members.iter().map(|m| m.without_vars(xq));
    match it.next() {
        None => true,
        Some(first) => it.all(|m| m == first),
    }
}

/// `φ^SEL_I`: conjunction of the disjuncts in `set` without their `X_q` clauses.
pub fn sel_conjunction(phi: &DisjunctQbf, set: &[usize]) -> Result<ConjunctiveFormula, TwoCnfError> {
    let xq = innermost_is(&phi.prefix, Quant::Forall)?;
    Ok(set.iter().fold(ConjunctiveFormula::top(), |acc, &i| acc.and(&phi.disjuncts[i].split_touching(&xq).1)))
}

/// `SEL(Φ)`: one group per satisfiable non-empty `I ⊆ [k]`.
pub fn sel(phi: &DisjunctQbf, pool: &mut FreshVarPool) -> Result<SelState, TwoCnfError> {
    let xq = innermost_is(&phi.prefix, Quant::Forall)?;
    let mut props = Vec::with_capacity(phi.k());
    for (i, d) in phi.disjuncts.iter().enumerate() {
        if !is_propagated(d)? {
            return Err(TwoCnfError::NotPropagated(i));
        }
        props.push(propagate(d)?);
    }
    pool.reserve_through(phi.max_var());
    let outer = phi.prefix.without_innermost();
    let xq_minus_1: BTreeSet<Var> = match outer.innermost() {
        Some(b) if b.quant == Quant::Exists => b.vars.iter().copied().collect(),
        _ => BTreeSet::new(),
    };
    let k = phi.k();
    let mut state = SelState {
        groups: BTreeMap::new(),
        selectors: Vec::new(),
        pool: pool.clone(),
        k,
        prefix: outer.with_innermost(Quant::Exists, vec![]).with_innermost(Quant::Forall, xq.iter().copied().collect()),
        xq: xq.clone(),
        xq_minus_1,
        updates: 0,
    };
    if k == 0 {
        *pool = state.pool.clone();
        return Ok(state);
    }
    // ∃A must sit between the outer blocks and X_q even when X_{q−1} is empty.
    let a: Vec<Var> = (0..k).map(|_| state.pool.fresh()).collect();
    state.selectors = a.clone();
    state.prefix = outer.with_innermost(Quant::Exists, a.clone()).with_innermost(Quant::Forall, xq.iter().copied().collect());
    let outer_parts: Vec<ConjunctiveFormula> = phi.disjuncts.iter().map(|d| d.split_touching(&xq).1).collect();

    // DFS over I in increasing order of members; an unsatisfiable φ^SEL_I prunes all supersets.
    let mut stack: Vec<(Vec<usize>, ConjunctiveFormula)> = (0..k).rev().map(|i| (vec![i], outer_parts[i].clone())).collect();
    while let Some((set, sel_part)) = stack.pop() {
        let sel_prop = propagate(&sel_part)?;
        if sel_prop.bottom {
            continue;
        }
        let lits: Vec<Lit> = (0..k).map(|j| Lit::new(a[j], set.contains(&j))).collect();
        let mut members = Vec::new();
        for &i in &set {
            let m = propagate(&with_units(&phi.disjuncts[i].and(&sel_part), &lits))?;
            if !m.bottom {
                members.push(m);
            }
        }
        if !members.is_empty() {
            if members.len() > k {
                return Err(TwoCnfError::BoundViolated(format!("SEL group of size {} > k={k}", members.len())));
            }
            if !shares_outer_part(&members, &xq) {
                return Err(TwoCnfError::BoundViolated("SEL group members differ outside X_q".into()));
            }
            state.groups.insert(lits, members);
        }
        let last = *set.last().expect("non-empty");
        for j in (last + 1..k).rev() {
            let mut next = set.clone();
            next.push(j);
            stack.push((next, sel_part.and(&outer_parts[j])));
        }
    }
    *pool = state.pool.clone();
    Ok(state)
}

/// Polarities of `x` in clauses of `m` that also contain an `X_q` variable.
fn polarities_with_xq(m: &Propagated2Cnf, x: Var, xq: &BTreeSet<Var>) -> (bool, bool) {
    let mut pos = false;
    let mut neg = false;
    for c in &m.binaries {
        if c.contains_var(x) && c.vars().any(|v| xq.contains(&v)) {
            for l in c.lits() {
                if l.var() == x {
                    if l.is_positive() {
                        pos = true;
                    } else {
                        neg = true;
                    }
                }
            }
        }
    }
    (pos, neg)
}

/// `x ∈ X_{q−1}` occurs positively and negatively next to `X_q` in light members.
pub fn is_reducible(state: &SelState, members: &[Propagated2Cnf], x: Var) -> bool {
    if !state.xq_minus_1.contains(&x) {
        return false;
    }
    let mut pos = false;
    let mut neg = false;
    for m in members {
        if m.units_in(&state.xq) >= state.unit_cap() {
            continue;
        }
        let (p, n) = polarities_with_xq(m, x, &state.xq);
        pos |= p;
        neg |= n;
    }
    pos && neg
}

fn first_reducible(state: &SelState, members: &[Propagated2Cnf]) -> Option<Var> {
    let mut candidates = BTreeSet::new();
    for m in members {
        if m.units_in(&state.xq) < state.unit_cap() {
            for c in &m.binaries {
                if c.vars().any(|v| state.xq.contains(&v)) {
                    candidates.extend(c.vars().filter(|v| state.xq_minus_1.contains(v)));
                }
            }
        }
    }
    candidates.into_iter().find(|&x| is_reducible(state, members, x))
}

/// `f(Φ_L) = Σ min(2k, #X_q-units)` with `⊥` slots counted as `2k`.
fn progress(state: &SelState, members: &[Propagated2Cnf], slots: usize) -> usize {
    let cap = state.unit_cap();
    let live: usize = members.iter().map(|m| m.units_in(&state.xq).min(cap)).sum();
    live + (slots - members.len()) * cap
}

/// Replaces `Φ_L` by its `x = 1` and `x = 0` refinements under a fresh selector.
pub fn red_update(state: &SelState, l_set: &[Lit], x: Var) -> Result<SelState, TwoCnfError> {
    let mut next = state.clone();
    apply_red_update(&mut next, l_set, x)?;
    Ok(next)
}

fn apply_red_update(next: &mut SelState, l_set: &[Lit], x: Var) -> Result<(), TwoCnfError> {
    let members = next.groups.get(l_set).ok_or(TwoCnfError::UnknownGroup)?.clone();
    if !is_reducible(next, &members, x) {
        return Err(TwoCnfError::NotReducible(x));
    }
    let a = next.selector(l_set.len());
    if next.selectors.len() > next.selector_cap() {
        return Err(TwoCnfError::BoundViolated(format!(
            "{} selectors > 2k²+k = {}",
            next.selectors.len(),
            next.selector_cap()
        )));
    }
    next.groups.remove(l_set);
    let before = progress(next, &members, members.len());
    for value in [true, false] {
        let tau = PartialAssignment::from_pairs([(x, value)]);
        let mut refined = Vec::new();
        for m in &members {
            let reduced = m.to_formula().apply(&tau);
            let p = propagate(&with_units(&reduced, &[Lit::new(x, value), Lit::new(a, value)]))?;
            if !p.bottom {
                refined.push(p);
            }
        }
        if progress(next, &refined, members.len()) <= before {
            return Err(TwoCnfError::BoundViolated("RED update did not increase f".into()));
        }
        if !shares_outer_part(&refined, &next.xq) {
            return Err(TwoCnfError::BoundViolated("RED group members differ outside X_q".into()));
        }
        if !refined.is_empty() {
            let mut key = l_set.to_vec();
            key.push(Lit::new(a, value));
            next.groups.insert(key, refined);
        }
    }
    next.updates += 1;
    Ok(())
}

/// Applies updates until no group has a reducible variable.
pub fn red_fixpoint(state: &SelState) -> Result<SelState, TwoCnfError> {
    let mut cur = state.clone();
    let mut pending: BTreeSet<Vec<Lit>> = cur.groups.keys().cloned().collect();
    while let Some(key) = pending.pop_first() {
        let Some(members) = cur.groups.get(&key) else { continue };
        if let Some(x) = first_reducible(&cur, members) {
            apply_red_update(&mut cur, &key, x)?;
            let mut child = key.clone();
            child.push(Lit::pos(cur.selectors[key.len()]));
            for value in [true, false] {
                *child.last_mut().expect("non-empty") = Lit::new(cur.selectors[key.len()], value);
                if cur.groups.contains_key(&child) {
                    pending.insert(child.clone());
                }
            }
        }
    }
    let k = cur.k;
    let group_cap = pow2(2 * k * k + k);
    if cur.groups.len() as u128 > group_cap {
        return Err(TwoCnfError::BoundViolated(format!("{} groups > 2^(2k²+k)", cur.groups.len())));
    }
    if cur.num_disjuncts() as u128 > group_cap.saturating_mul(k as u128) {
        return Err(TwoCnfError::BoundViolated(format!("{} disjuncts > k·2^(2k²+k)", cur.num_disjuncts())));
    }
    if let Some((_, m)) = cur.groups.iter().find(|(_, m)| m.len() > k) {
        return Err(TwoCnfError::BoundViolated(format!("group of size {} > k={k}", m.len())));
    }
    Ok(cur)
}

/// Drops members with at least `2k` units over `X_q`.
pub fn prune_heavy_disjuncts(state: &SelState) -> SelState {
    let mut out = state.clone();
    let cap = state.unit_cap();
    for members in out.groups.values_mut() {
        members.retain(|m| m.units_in(&state.xq) < cap);
    }
    out.groups.retain(|_, m| !m.is_empty());
    out
}

/// Removes `X_{q−1}` and its clauses; `A` stays as the innermost existential block.
pub fn drop_xqminus1(state: &SelState) -> DisjunctQbf {
    let disjuncts = state
        .groups
        .values()
        .flat_map(|ms| ms.iter().map(|m| m.without_vars(&state.xq_minus_1).to_formula()))
        .collect();
    DisjunctQbf { prefix: state.prefix.without_vars(&state.xq_minus_1), disjuncts }
}

/// Eliminates the existential selector block directly left of the innermost `∀` block.
///
/// When the selector literal sets of distinct groups pairwise clash, each
/// group gets its own copy of the universal block; otherwise falls back to
/// variable-by-variable elimination.
pub fn eliminate_selectors(phi: &DisjunctQbf, selectors: &BTreeSet<Var>) -> DisjunctQbf {
    let xq = innermost_is(&phi.prefix, Quant::Forall).unwrap_or_default();
    let mut groups: BTreeMap<Vec<Lit>, Vec<ConjunctiveFormula>> = BTreeMap::new();
    for d in &phi.disjuncts {
        let (sel_part, rest) = d.split_touching(selectors);
        let clean = sel_part.clauses.iter().all(|c| c.len() == 1);
        if !clean || !sel_part.equations.is_empty() {
            return eliminate_selectors_by_qe(phi, selectors);
        }
        let key: Vec<Lit> = sel_part.clauses.iter().map(|c| c.lits()[0]).collect::<BTreeSet<_>>().into_iter().collect();
        groups.entry(key).or_default().push(rest);
    }
    let keys: Vec<&Vec<Lit>> = groups.keys().collect();
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i + 1..] {
            if !a.iter().any(|l| b.contains(&l.negate())) {
                return eliminate_selectors_by_qe(phi, selectors);
            }
        }
    }
    // Groups with equal residuals are the same disjunct of `⋁_L ∀X_q Ψ_L`.
    let mut distinct: BTreeSet<Vec<ConjunctiveFormula>> = BTreeSet::new();
    for members in groups.into_values() {
        let mut canon: Vec<ConjunctiveFormula> = members.iter().map(ConjunctiveFormula::canonical).collect();
        canon.sort();
        canon.dedup();
        distinct.insert(canon);
    }
    // A group whose members all occur in another group is implied by it.
    let all: Vec<Vec<ConjunctiveFormula>> = distinct.into_iter().collect();
    let distinct: Vec<&Vec<ConjunctiveFormula>> = all
        .iter()
        .filter(|g| !all.iter().any(|h| h.len() > g.len() && g.iter().all(|m| h.binary_search(m).is_ok())))
        .collect();
    let mut pool = FreshVarPool::for_formula(phi);
    let mut disjuncts = Vec::new();
    let mut copies: Vec<Var> = Vec::new();
    for (gi, members) in distinct.into_iter().enumerate() {
        if gi == 0 {
            disjuncts.extend(members.iter().cloned());
            continue;
        }
        let used: BTreeSet<Var> = members.iter().flat_map(|m| m.vars()).filter(|v| xq.contains(v)).collect();
        let map: BTreeMap<Var, Var> = used.into_iter().map(|v| (v, pool.fresh())).collect();
        copies.extend(map.values().copied());
        disjuncts.extend(members.iter().map(|m| m.rename(&map)));
    }
    let last = phi.prefix.num_blocks() - 1;
    let prefix = phi.prefix.without_vars(selectors);
    let prefix = if copies.is_empty() {
        prefix
    } else {
        let idx = prefix.num_blocks() - 1;
        debug_assert!(last >= idx);
        prefix.with_vars_in_block(idx, &copies)
    };
    DisjunctQbf { prefix, disjuncts }
}

fn eliminate_selectors_by_qe(phi: &DisjunctQbf, selectors: &BTreeSet<Var>) -> DisjunctQbf {
    let mut cur = phi.clone();
    let mut pool = FreshVarPool::for_formula(phi);
    for &a in selectors.iter().rev() {
        if cur.prefix.contains(a) {
            cur = transforms::eliminate_variable(&cur, a, &mut pool).expect("selector is quantified");
        }
    }
    cur
}

/// Falsifies one clause per disjunct consistently; `true` when impossible.
pub fn solve_universal_only(phi: &DisjunctQbf) -> Result<bool, TwoCnfError> {
    if phi.prefix.blocks().iter().any(|b| b.quant == Quant::Exists) {
        return Err(TwoCnfError::HasExistential);
    }
    for d in &phi.disjuncts {
        check_2cnf(d)?;
    }
    let mut pending: Vec<&ConjunctiveFormula> = Vec::new();
    for d in &phi.disjuncts {
        if d.clauses.iter().any(Clause::is_empty) {
            continue;
        }
        if d.clauses.is_empty() {
            return Ok(true);
        }
        pending.push(d);
    }
    let mut assignment: BTreeMap<Var, bool> = BTreeMap::new();
    Ok(!falsify_all(&pending, &mut vec![false; pending.len()], &mut assignment))
}

fn falsifiable(c: &Clause, assignment: &BTreeMap<Var, bool>) -> bool {
    c.lits().iter().all(|l| assignment.get(&l.var()).is_none_or(|&b| !l.value_under(b)))
}

fn falsify_all(pending: &[&ConjunctiveFormula], done: &mut [bool], assignment: &mut BTreeMap<Var, bool>) -> bool {
    let mut forced = Vec::new();
    let mut best: Option<(usize, Vec<&Clause>)> = None;
    let mut stuck = false;
    for (i, d) in pending.iter().enumerate() {
        if done[i] {
            continue;
        }
        if d.clauses.iter().any(|c| c.lits().iter().all(|l| assignment.get(&l.var()) == Some(&!l.is_positive()))) {
            done[i] = true;
            forced.push(i);
            continue;
        }
        let options: Vec<&Clause> = d.clauses.iter().filter(|c| falsifiable(c, assignment)).collect();
        if options.is_empty() {
            stuck = true;
            break;
        }
        if best.as_ref().is_none_or(|(_, o)| options.len() < o.len()) {
            best = Some((i, options));
        }
    }
    let found = !stuck
        && match best {
            None => true,
            Some((i, options)) => {
                done[i] = true;
                let mut ok = false;
                for c in options {
                    let added: Vec<Var> =
                        c.lits().iter().map(|l| l.var()).filter(|v| !assignment.contains_key(v)).collect();
                    for l in c.lits() {
                        assignment.insert(l.var(), !l.is_positive());
                    }
                    ok = falsify_all(pending, done, assignment);
                    for v in added {
                        assignment.remove(&v);
                    }
                    if ok {
                        break;
                    }
                }
                done[i] = false;
                ok
            }
        };
    for i in forced {
        done[i] = false;
    }
    found
}

/// `∃A ∀X_q. ⋁_L (L ∧ Ψ_L)` with pairwise clashing `L` holds iff some `∀X_q. Ψ_L` holds.
fn solve_groups_separately(state: &SelState) -> Result<bool, TwoCnfError> {
    let prefix = QuantifierPrefix::new(vec![(Quant::Forall, state.xq.iter().copied().collect())])
        .expect("single block");
    let selectors: BTreeSet<Var> = state.selectors.iter().copied().collect();
    for members in state.groups.values() {
        let disjuncts = members
            .iter()
            .map(|m| m.without_vars(&state.xq_minus_1).without_vars(&selectors).to_formula())
            .collect();
        let group = simplify(&DisjunctQbf { prefix: prefix.clone(), disjuncts })?;
        if group.disjuncts.iter().any(ConjunctiveFormula::is_top) || solve_universal_only(&group)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Propagates, drops `⊥`, duplicates and disjuncts implying another one.
pub fn simplify(phi: &DisjunctQbf) -> Result<DisjunctQbf, TwoCnfError> {
    let mut props: Vec<Propagated2Cnf> = propagate_all(phi)?.into_iter().filter(|p| !p.bottom).collect();
    props.sort();
    props.dedup();
    let mut keep = vec![true; props.len()];
    for i in 0..props.len() {
        for j in 0..props.len() {
            if i != j && keep[j] && props[i].implies(&props[j]) {
                keep[i] = false;
                break;
            }
        }
    }
    let disjuncts: Vec<ConjunctiveFormula> =
        props.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| p.to_formula()).collect();
    Ok(DisjunctQbf { prefix: phi.prefix.clone(), disjuncts }.prune_prefix())
}

/// Evaluates a disjunctive 2-CNF QBF.
pub fn solve_2cnf(phi: &DisjunctQbf) -> Result<bool, TwoCnfError> {
    solve_2cnf_traced(phi).map(|(r, _)| r)
}

pub fn solve_2cnf_traced(phi: &DisjunctQbf) -> Result<(bool, SolveTrace), TwoCnfError> {
    for d in &phi.disjuncts {
        check_2cnf(d)?;
    }
    let mut trace = SolveTrace::default();
    let mut cur = phi.clone();
    let mut round = 0;
    loop {
        cur = simplify(&cur)?;
        trace.push(round, "simplify", cur.k(), 0, cur.prefix.num_vars());
        if cur.k() == 0 {
            return Ok((false, trace));
        }
        if cur.disjuncts.iter().any(ConjunctiveFormula::is_top) {
            return Ok((true, trace));
        }
        let Some(inner) = cur.prefix.innermost() else {
            return Ok((false, trace));
        };
        if inner.quant == Quant::Exists {
            cur = drop_innermost_existential(&cur)?;
            trace.push(round, "drop-exists", cur.k(), 0, cur.prefix.num_vars());
            continue;
        }
        if cur.prefix.num_blocks() == 1 {
            let r = solve_universal_only(&cur)?;
            trace.push(round, "universal", cur.k(), 0, cur.prefix.num_vars());
            return Ok((r, trace));
        }
        round += 1;
        let mut pool = FreshVarPool::for_formula(&cur);
        let state = sel(&cur, &mut pool)?;
        trace.push(round, "sel", state.num_disjuncts(), state.groups.len(), state.prefix.num_vars());
        let state = red_fixpoint(&state)?;
        trace.push(round, "red", state.num_disjuncts(), state.groups.len(), state.prefix.num_vars());
        let state = prune_heavy_disjuncts(&state);
        trace.push(round, "prune", state.num_disjuncts(), state.groups.len(), state.prefix.num_vars());
        let dropped = drop_xqminus1(&state);
        trace.push(round, "drop-xq-1", dropped.k(), state.groups.len(), dropped.prefix.num_vars());
        if dropped.prefix.num_blocks() <= 2 {
            let r = solve_groups_separately(&state)?;
            trace.push(round, "universal-groups", dropped.k(), state.groups.len(), dropped.prefix.num_vars());
            return Ok((r, trace));
        }
        let selectors: BTreeSet<Var> = state.selectors.iter().copied().collect();
        cur = eliminate_selectors(&dropped, &selectors);
        trace.push(round, "qe-selectors", cur.k(), 0, cur.prefix.num_vars());
    }
}
