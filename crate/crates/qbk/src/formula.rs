//! Formula data model: literals, clauses, GF(2) equations, quantifier
//! prefixes and the conjunctive / disjunctive QBF containers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Dense positive variable identifier.
pub type Var = u32;

/// Structural errors raised while assembling formulas.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("variable {0} is quantified more than once")]
    DuplicateQuantified(Var),
    #[error("variable {0} occurs in the matrix but not in the prefix")]
    Unquantified(Var),
    #[error("variable id 0 is not allowed")]
    ZeroVariable,
}

/// A literal: variable plus polarity, packed as `var << 1 | negative`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        assert!(var >= 1, "variable ids start at 1");
        Lit(var << 1 | u32::from(!positive))
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, false)
    }

    /// Parses a DIMACS integer literal; `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Lit> {
        if value == 0 {
            return None;
        }
        Some(Lit::new(value.unsigned_abs() as Var, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var());
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    /// Dense index usable for literal-indexed tables.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// Value of the literal under a value of its variable.
    pub fn value_under(self, var_value: bool) -> bool {
        var_value == self.is_positive()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Disjunction of literals over pairwise distinct variables, sorted by variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Builds a normalized clause; `None` when the literals form a tautology.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Clause> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause { lits })
    }

    /// Builds a clause from DIMACS integers; `None` on tautology.
    pub fn from_dimacs(values: &[i64]) -> Option<Clause> {
        Clause::new(values.iter().filter_map(|&v| Lit::from_dimacs(v)))
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn unit(lit: Lit) -> Clause {
        Clause { lits: vec![lit] }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.lits.iter().any(|l| l.var() == var)
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.contains(&lit)
    }

    pub fn positive_count(&self) -> usize {
        self.lits.iter().filter(|l| l.is_positive()).count()
    }

    /// Reduces the clause under `tau`; `None` when satisfied.
    pub fn apply(&self, tau: &PartialAssignment) -> Option<Clause> {
        let mut out = Vec::with_capacity(self.lits.len());
        for &l in &self.lits {
            match tau.get(l.var()) {
                Some(v) if l.value_under(v) => return None,
                Some(_) => {}
                None => out.push(l),
            }
        }
        Some(Clause { lits: out })
    }

    /// Removes the given variables from the clause (variable deletion).
    pub fn delete_vars(&self, vars: &BTreeSet<Var>) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|l| !vars.contains(&l.var())).collect(),
        }
    }

    /// Renames variables; `None` if the renaming creates a tautology.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Option<Clause> {
        Clause::new(
            self.lits
                .iter()
                .map(|l| Lit::new(*map.get(&l.var()).unwrap_or(&l.var()), l.is_positive())),
        )
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.lits.iter().any(|l| l.value_under(value(l.var())))
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// GF(2) equation `⊕ vars = rhs`; `(∅, 1)` is the explicit falsity marker.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineEquation {
    vars: Vec<Var>,
    rhs: bool,
}

impl AffineEquation {
    /// Builds a normalized equation; repeated variables cancel pairwise.
    pub fn new(vars: impl IntoIterator<Item = Var>, rhs: bool) -> AffineEquation {
        let mut vars: Vec<Var> = vars.into_iter().collect();
        vars.sort_unstable();
        let mut out: Vec<Var> = Vec::with_capacity(vars.len());
        for v in vars {
            if out.last() == Some(&v) {
                out.pop();
            } else {
                out.push(v);
            }
        }
        AffineEquation { vars: out, rhs }
    }

    pub fn bottom() -> AffineEquation {
        AffineEquation { vars: Vec::new(), rhs: true }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rhs(&self) -> bool {
        self.rhs
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn is_bottom(&self) -> bool {
        self.vars.is_empty() && self.rhs
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.vars.binary_search(&var).is_ok()
    }

    /// `(A∖V(τ), b + A[τ])`; `None` when it reduces to `(∅, 0)`.
    pub fn apply(&self, tau: &PartialAssignment) -> Option<AffineEquation> {
        let mut rhs = self.rhs;
        let mut vars = Vec::with_capacity(self.vars.len());
        for &v in &self.vars {
            match tau.get(v) {
                Some(b) => rhs ^= b,
                None => vars.push(v),
            }
        }
        if vars.is_empty() && !rhs {
            None
        } else {
            Some(AffineEquation { vars, rhs })
        }
    }

    pub fn delete_vars(&self, del: &BTreeSet<Var>) -> AffineEquation {
        AffineEquation {
            vars: self.vars.iter().copied().filter(|v| !del.contains(v)).collect(),
            rhs: self.rhs,
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> AffineEquation {
        AffineEquation::new(self.vars.iter().map(|v| *map.get(v).unwrap_or(v)), self.rhs)
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.vars.iter().fold(false, |acc, &v| acc ^ value(v)) == self.rhs
    }

    /// Equivalent clause set: one clause per falsifying assignment.
    pub fn to_cnf(&self) -> Vec<Clause> {
        let n = self.vars.len();
        assert!(n <= 20, "equation too wide for truth-table CNF");
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << n) {
            let parity = mask.count_ones() % 2 == 1;
            if parity == self.rhs {
                continue;
            }
            let lits = self
                .vars
                .iter()
                .enumerate()
                .map(|(i, &v)| Lit::new(v, mask >> i & 1 == 0));
            out.push(Clause::new(lits).expect("distinct variables"));
        }
        out
    }
}

impl fmt::Debug for AffineEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "={}]", u8::from(self.rhs))
    }
}

/// Borrowed view of either kind of constraint.
#[derive(Clone, Copy, Debug)]
pub enum Constraint<'a> {
    Clause(&'a Clause),
    Equation(&'a AffineEquation),
}

impl Constraint<'_> {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            Constraint::Clause(c) => c.vars().collect(),
            Constraint::Equation(e) => e.vars().to_vec(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Constraint::Clause(c) => c.len(),
            Constraint::Equation(e) => e.len(),
        }
    }

    pub fn touches(&self, set: &BTreeSet<Var>) -> bool {
        match self {
            Constraint::Clause(c) => c.vars().any(|v| set.contains(&v)),
            Constraint::Equation(e) => e.vars().iter().any(|v| set.contains(v)),
        }
    }
}

/// Conjunction of clauses and GF(2) equations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ConjunctiveFormula {
    pub clauses: Vec<Clause>,
    pub equations: Vec<AffineEquation>,
}

impl ConjunctiveFormula {
    pub fn new(clauses: Vec<Clause>, equations: Vec<AffineEquation>) -> ConjunctiveFormula {
        ConjunctiveFormula { clauses, equations }
    }

    pub fn from_clauses(clauses: Vec<Clause>) -> ConjunctiveFormula {
        ConjunctiveFormula { clauses, equations: Vec::new() }
    }

    pub fn from_equations(equations: Vec<AffineEquation>) -> ConjunctiveFormula {
        ConjunctiveFormula { clauses: Vec::new(), equations }
    }

    /// Clausal formula from DIMACS integer rows; tautologies are dropped.
    pub fn from_dimacs(rows: &[&[i64]]) -> ConjunctiveFormula {
        ConjunctiveFormula::from_clauses(rows.iter().filter_map(|r| Clause::from_dimacs(r)).collect())
    }

    /// The empty conjunction.
    pub fn top() -> ConjunctiveFormula {
        ConjunctiveFormula::default()
    }

    /// A single empty clause.
    pub fn bottom() -> ConjunctiveFormula {
        ConjunctiveFormula::from_clauses(vec![Clause::empty()])
    }

    pub fn is_clausal(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn is_affine(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_mixed(&self) -> bool {
        !self.clauses.is_empty() && !self.equations.is_empty()
    }

    /// True when an empty clause or a `(∅,1)` equation is present.
    pub fn has_bottom(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty) || self.equations.iter().any(AffineEquation::is_bottom)
    }

    /// No constraints at all.
    pub fn is_top(&self) -> bool {
        self.clauses.is_empty() && self.equations.is_empty()
    }

    /// Number of constraints `|φ|`.
    pub fn len(&self) -> usize {
        self.clauses.len() + self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total constraint arity `‖φ‖`.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum::<usize>()
            + self.equations.iter().map(AffineEquation::len).sum::<usize>()
    }

    pub fn constraints(&self) -> impl Iterator<Item = Constraint<'_>> {
        self.clauses
            .iter()
            .map(Constraint::Clause)
            .chain(self.equations.iter().map(Constraint::Equation))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            out.extend(c.vars());
        }
        for e in &self.equations {
            out.extend(e.vars().iter().copied());
        }
        out
    }

    pub fn max_var(&self) -> Var {
        self.vars().last().copied().unwrap_or(0)
    }

    /// `φ[τ]`: satisfied clauses and `(∅,0)` equations vanish, `⊥` markers stay.
    pub fn apply(&self, tau: &PartialAssignment) -> ConjunctiveFormula {
        ConjunctiveFormula {
            clauses: self.clauses.iter().filter_map(|c| c.apply(tau)).collect(),
            equations: self.equations.iter().filter_map(|e| e.apply(tau)).collect(),
        }
    }

    /// `φ − S`: deletes the variables from every constraint.
    pub fn delete_vars(&self, vars: &BTreeSet<Var>) -> ConjunctiveFormula {
        ConjunctiveFormula {
            clauses: self.clauses.iter().map(|c| c.delete_vars(vars)).collect(),
            equations: self.equations.iter().map(|e| e.delete_vars(vars)).collect(),
        }
    }

    /// Splits into `(C(φ,S), φ ∖ C(φ,S))`.
    pub fn split_touching(&self, set: &BTreeSet<Var>) -> (ConjunctiveFormula, ConjunctiveFormula) {
        let mut inside = ConjunctiveFormula::top();
        let mut outside = ConjunctiveFormula::top();
        for c in &self.clauses {
            if c.vars().any(|v| set.contains(&v)) {
                inside.clauses.push(c.clone());
            } else {
                outside.clauses.push(c.clone());
            }
        }
        for e in &self.equations {
            if e.vars().iter().any(|v| set.contains(v)) {
                inside.equations.push(e.clone());
            } else {
                outside.equations.push(e.clone());
            }
        }
        (inside, outside)
    }

    /// Conjunction of two formulas (constraint lists concatenated).
    pub fn and(&self, other: &ConjunctiveFormula) -> ConjunctiveFormula {
        let mut out = self.clone();
        out.clauses.extend(other.clauses.iter().cloned());
        out.equations.extend(other.equations.iter().cloned());
        out
    }

    /// Renames variables; tautologies created by the renaming are dropped.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> ConjunctiveFormula {
        ConjunctiveFormula {
            clauses: self.clauses.iter().filter_map(|c| c.rename(map)).collect(),
            equations: self
                .equations
                .iter()
                .map(|e| e.rename(map))
                .filter(|e| !(e.is_empty() && !e.rhs()))
                .collect(),
        }
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool + Copy) -> bool {
        self.clauses.iter().all(|c| c.eval(value)) && self.equations.iter().all(|e| e.eval(value))
    }

    /// Sorted, deduplicated copy; used for set-level comparisons.
    pub fn canonical(&self) -> ConjunctiveFormula {
        let mut out = self.clone();
        out.clauses.sort();
        out.clauses.dedup();
        out.equations.sort();
        out.equations.dedup();
        out
    }
}

impl fmt::Debug for ConjunctiveFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_top() {
            return write!(f, "⊤");
        }
        let mut first = true;
        for c in &self.clauses {
            if !first {
                write!(f, "∧")?;
            }
            first = false;
            write!(f, "{c:?}")?;
        }
        for e in &self.equations {
            if !first {
                write!(f, "∧")?;
            }
            first = false;
            write!(f, "{e:?}")?;
        }
        Ok(())
    }
}

/// Quantifier symbol.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Quant {
    Exists,
    Forall,
}

impl Quant {
    pub fn flip(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Quant::Exists => 'e',
            Quant::Forall => 'a',
        }
    }
}

/// One quantifier block; variables kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Block {
    pub quant: Quant,
    pub vars: Vec<Var>,
}

/// Alternating sequence of disjoint quantifier blocks.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct QuantifierPrefix {
    blocks: Vec<Block>,
    /// `level[v]` is the block index of `v` plus one, 0 when unquantified.
    level: Vec<u32>,
}

impl QuantifierPrefix {
    /// Normalizes: drops empty blocks, merges equal neighbours, sorts variables.
    pub fn new(blocks: Vec<(Quant, Vec<Var>)>) -> Result<QuantifierPrefix, FormulaError> {
        let mut merged: Vec<Block> = Vec::new();
        for (quant, vars) in blocks {
            if vars.is_empty() {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.quant == quant => last.vars.extend(vars),
                _ => merged.push(Block { quant, vars }),
            }
        }
        let max = merged.iter().flat_map(|b| b.vars.iter()).copied().max().unwrap_or(0);
        let mut level = vec![0u32; max as usize + 1];
        for (i, b) in merged.iter_mut().enumerate() {
            b.vars.sort_unstable();
            for &v in &b.vars {
                if v == 0 {
                    return Err(FormulaError::ZeroVariable);
                }
                if level[v as usize] != 0 {
                    return Err(FormulaError::DuplicateQuantified(v));
                }
                level[v as usize] = i as u32 + 1;
            }
        }
        Ok(QuantifierPrefix { blocks: merged, level })
    }

    pub fn empty() -> QuantifierPrefix {
        QuantifierPrefix::default()
    }

    fn rebuild(blocks: Vec<(Quant, Vec<Var>)>) -> QuantifierPrefix {
        QuantifierPrefix::new(blocks).expect("derived prefix stays disjoint")
    }

    fn raw(&self) -> Vec<(Quant, Vec<Var>)> {
        self.blocks.iter().map(|b| (b.quant, b.vars.clone())).collect()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Number of quantifier alternations (blocks minus one).
    pub fn alternations(&self) -> usize {
        self.blocks.len().saturating_sub(1)
    }

    pub fn block_of(&self, var: Var) -> Option<usize> {
        match self.level.get(var as usize) {
            Some(&l) if l > 0 => Some(l as usize - 1),
            _ => None,
        }
    }

    pub fn quant_of(&self, var: Var) -> Option<Quant> {
        self.block_of(var).map(|i| self.blocks[i].quant)
    }

    pub fn contains(&self, var: Var) -> bool {
        self.block_of(var).is_some()
    }

    pub fn is_universal(&self, var: Var) -> bool {
        self.quant_of(var) == Some(Quant::Forall)
    }

    pub fn is_existential(&self, var: Var) -> bool {
        self.quant_of(var) == Some(Quant::Exists)
    }

    /// `a` sits in a strictly earlier block than `b`.
    pub fn is_left_of(&self, a: Var, b: Var) -> bool {
        matches!((self.block_of(a), self.block_of(b)), (Some(x), Some(y)) if x < y)
    }

    /// Variables in prefix order (blocks outermost first, ids ascending inside).
    pub fn vars(&self) -> Vec<Var> {
        self.blocks.iter().flat_map(|b| b.vars.iter().copied()).collect()
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        self.vars().into_iter().collect()
    }

    pub fn num_vars(&self) -> usize {
        self.blocks.iter().map(|b| b.vars.len()).sum()
    }

    pub fn max_var(&self) -> Var {
        self.blocks.iter().flat_map(|b| b.vars.iter()).copied().max().unwrap_or(0)
    }

    pub fn vars_with(&self, quant: Quant) -> BTreeSet<Var> {
        self.blocks
            .iter()
            .filter(|b| b.quant == quant)
            .flat_map(|b| b.vars.iter().copied())
            .collect()
    }

    pub fn innermost(&self) -> Option<&Block> {
        self.blocks.last()
    }

    pub fn without_innermost(&self) -> QuantifierPrefix {
        let mut raw = self.raw();
        raw.pop();
        QuantifierPrefix::rebuild(raw)
    }

    /// Appends an innermost block (merged when the quantifier repeats).
    pub fn with_innermost(&self, quant: Quant, vars: Vec<Var>) -> QuantifierPrefix {
        let mut raw = self.raw();
        raw.push((quant, vars));
        QuantifierPrefix::rebuild(raw)
    }

    /// Appends an outermost block.
    pub fn with_outermost(&self, quant: Quant, vars: Vec<Var>) -> QuantifierPrefix {
        let mut raw = vec![(quant, vars)];
        raw.extend(self.raw());
        QuantifierPrefix::rebuild(raw)
    }

    /// Removes variables; empty blocks vanish and neighbours merge.
    pub fn without_vars(&self, vars: &BTreeSet<Var>) -> QuantifierPrefix {
        let raw = self
            .raw()
            .into_iter()
            .map(|(q, vs)| (q, vs.into_iter().filter(|v| !vars.contains(v)).collect()))
            .collect();
        QuantifierPrefix::rebuild(raw)
    }

    /// Keeps only the given variables.
    pub fn restricted_to(&self, vars: &BTreeSet<Var>) -> QuantifierPrefix {
        let raw = self
            .raw()
            .into_iter()
            .map(|(q, vs)| (q, vs.into_iter().filter(|v| vars.contains(v)).collect()))
            .collect();
        QuantifierPrefix::rebuild(raw)
    }

    /// Adds each `copy` to the block of its `original`.
    pub fn with_copies(&self, copies: &BTreeMap<Var, Var>) -> QuantifierPrefix {
        let mut raw = self.raw();
        for (orig, copy) in copies {
            let i = self.block_of(*orig).expect("copied variable must be quantified");
            raw[i].1.push(*copy);
        }
        QuantifierPrefix::rebuild(raw)
    }

    /// Adds variables to block `index`.
    pub fn with_vars_in_block(&self, index: usize, vars: &[Var]) -> QuantifierPrefix {
        let mut raw = self.raw();
        raw[index].1.extend_from_slice(vars);
        QuantifierPrefix::rebuild(raw)
    }

    /// Swaps every quantifier.
    pub fn flipped(&self) -> QuantifierPrefix {
        QuantifierPrefix::rebuild(self.raw().into_iter().map(|(q, v)| (q.flip(), v)).collect())
    }
}

/// Conjunctive QBF `𝒬.φ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QbfFormula {
    pub prefix: QuantifierPrefix,
    pub matrix: ConjunctiveFormula,
}

impl QbfFormula {
    pub fn new(prefix: QuantifierPrefix, matrix: ConjunctiveFormula) -> Result<QbfFormula, FormulaError> {
        if let Some(v) = matrix.vars().into_iter().find(|&v| !prefix.contains(v)) {
            return Err(FormulaError::Unquantified(v));
        }
        Ok(QbfFormula { prefix, matrix })
    }

    pub fn max_var(&self) -> Var {
        self.prefix.max_var().max(self.matrix.max_var())
    }

    /// `Φ[τ]` with assigned variables removed from the prefix.
    pub fn apply(&self, tau: &PartialAssignment) -> QbfFormula {
        QbfFormula {
            prefix: self.prefix.without_vars(&tau.domain()),
            matrix: self.matrix.apply(tau),
        }
    }

    pub fn to_disjunct(&self) -> DisjunctQbf {
        DisjunctQbf { prefix: self.prefix.clone(), disjuncts: vec![self.matrix.clone()] }
    }
}

/// Shared prefix over a disjunction of conjunctive matrices.
///
/// An empty disjunct list is the constant false formula.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DisjunctQbf {
    pub prefix: QuantifierPrefix,
    pub disjuncts: Vec<ConjunctiveFormula>,
}

impl DisjunctQbf {
    pub fn new(prefix: QuantifierPrefix, disjuncts: Vec<ConjunctiveFormula>) -> Result<DisjunctQbf, FormulaError> {
        for d in &disjuncts {
            if let Some(v) = d.vars().into_iter().find(|&v| !prefix.contains(v)) {
                return Err(FormulaError::Unquantified(v));
            }
        }
        Ok(DisjunctQbf { prefix, disjuncts })
    }

    pub fn k(&self) -> usize {
        self.disjuncts.len()
    }

    pub fn max_var(&self) -> Var {
        self.disjuncts
            .iter()
            .map(ConjunctiveFormula::max_var)
            .max()
            .unwrap_or(0)
            .max(self.prefix.max_var())
    }

    pub fn matrix_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for d in &self.disjuncts {
            out.extend(d.vars());
        }
        out
    }

    pub fn constraints(&self) -> impl Iterator<Item = Constraint<'_>> {
        self.disjuncts.iter().flat_map(|d| d.constraints())
    }

    pub fn is_clausal(&self) -> bool {
        self.disjuncts.iter().all(ConjunctiveFormula::is_clausal)
    }

    pub fn is_affine(&self) -> bool {
        self.disjuncts.iter().all(ConjunctiveFormula::is_affine)
    }

    /// Removes prefix variables that no disjunct mentions.
    pub fn prune_prefix(&self) -> DisjunctQbf {
        DisjunctQbf {
            prefix: self.prefix.restricted_to(&self.matrix_vars()),
            disjuncts: self.disjuncts.clone(),
        }
    }

    /// `Φ[τ]` with assigned variables removed from the prefix.
    pub fn apply(&self, tau: &PartialAssignment) -> DisjunctQbf {
        DisjunctQbf {
            prefix: self.prefix.without_vars(&tau.domain()),
            disjuncts: self.disjuncts.iter().map(|d| d.apply(tau)).collect(),
        }
    }
}

/// Map from variables to truth values.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct PartialAssignment {
    bindings: BTreeMap<Var, bool>,
}

impl PartialAssignment {
    pub fn new() -> PartialAssignment {
        PartialAssignment::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, bool)>) -> PartialAssignment {
        PartialAssignment { bindings: pairs.into_iter().collect() }
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.bindings.get(&var).copied()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.bindings.insert(var, value);
    }

    pub fn contains(&self, var: Var) -> bool {
        self.bindings.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// `V(τ)`.
    pub fn domain(&self) -> BTreeSet<Var> {
        self.bindings.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.bindings.iter().map(|(&v, &b)| (v, b))
    }

    /// Union with a disjoint assignment.
    pub fn union(&self, other: &PartialAssignment) -> PartialAssignment {
        let mut out = self.clone();
        out.bindings.extend(other.iter());
        out
    }

    /// Assignment of `vars` (ascending) given by the bits of `mask`, first variable most significant.
    pub fn from_mask(vars: &[Var], mask: u64) -> PartialAssignment {
        let n = vars.len();
        PartialAssignment::from_pairs(vars.iter().enumerate().map(|(i, &v)| (v, mask >> (n - 1 - i) & 1 == 1)))
    }
}

impl fmt::Display for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, b) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}", if b { i64::from(v) } else { -i64::from(v) })?;
        }
        Ok(())
    }
}

/// Issues variable ids above every id of the formula being extended.
#[derive(Clone, Debug)]
pub struct FreshVarPool {
    next: Var,
}

impl FreshVarPool {
    /// Pool whose first id is `max_existing + 1`.
    pub fn above(max_existing: Var) -> FreshVarPool {
        FreshVarPool { next: max_existing + 1 }
    }

    pub fn for_formula(phi: &DisjunctQbf) -> FreshVarPool {
        FreshVarPool::above(phi.max_var())
    }

    pub fn fresh(&mut self) -> Var {
        let v = self.next;
        self.next += 1;
        v
    }

    pub fn take(&mut self, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.fresh()).collect()
    }

    pub fn peek(&self) -> Var {
        self.next
    }

    /// Makes sure future ids exceed `var`.
    pub fn reserve_through(&mut self, var: Var) {
        self.next = self.next.max(var + 1);
    }
}
