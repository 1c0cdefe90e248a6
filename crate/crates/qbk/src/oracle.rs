//! Exhaustive game-tree evaluation of disjunctive QBF.

use thiserror::Error;

use crate::formula::{DisjunctQbf, PartialAssignment, QbfFormula, Quant, Var};

/// Hard ceiling on the number of relevant variables.
pub const MAX_ORACLE_VARS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("prefixes differ")]
    PrefixMismatch,
    #[error("max_vars {0} is above the hard limit of 30")]
    InvalidBudget(usize),
}

/// Limits on oracle work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    max_vars: usize,
    max_nodes: u64,
}

impl OracleBudget {
    pub fn new(max_vars: usize, max_nodes: u64) -> Result<OracleBudget, OracleError> {
        if max_vars > MAX_ORACLE_VARS {
            return Err(OracleError::InvalidBudget(max_vars));
        }
        Ok(OracleBudget { max_vars, max_nodes })
    }

    pub fn max_vars(&self) -> usize {
        self.max_vars
    }

    pub fn max_nodes(&self) -> u64 {
        self.max_nodes
    }
}

impl Default for OracleBudget {
    fn default() -> OracleBudget {
        OracleBudget { max_vars: MAX_ORACLE_VARS, max_nodes: 200_000_000 }
    }
}

enum Cons {
    Clause(Vec<(usize, bool)>),
    Equation(Vec<usize>, bool),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    True,
    False,
    Open,
}

/// Indexed form of a formula; variable index = position in prefix order.
struct Compiled {
    vars: Vec<Var>,
    quants: Vec<Quant>,
    disjuncts: Vec<Vec<Cons>>,
}

impl Compiled {
    fn new(phi: &DisjunctQbf, budget: &OracleBudget) -> Result<Compiled, OracleError> {
        let used = phi.matrix_vars();
        let mut vars = Vec::new();
        let mut quants = Vec::new();
        for b in phi.prefix.blocks() {
            for &v in &b.vars {
                if used.contains(&v) {
                    vars.push(v);
                    quants.push(b.quant);
                }
            }
        }
        if vars.len() > budget.max_vars {
            return Err(OracleError::BudgetExceeded(format!(
                "{} relevant variables, limit {}",
                vars.len(),
                budget.max_vars
            )));
        }
        let mut index = vec![usize::MAX; phi.max_var() as usize + 1];
        for (i, &v) in vars.iter().enumerate() {
            index[v as usize] = i;
        }
        let disjuncts = phi
            .disjuncts
            .iter()
            .map(|d| {
                let mut cs: Vec<Cons> = d
                    .clauses
                    .iter()
                    .map(|c| Cons::Clause(c.lits().iter().map(|l| (index[l.var() as usize], l.is_positive())).collect()))
                    .collect();
                cs.extend(
                    d.equations
                        .iter()
                        .map(|e| Cons::Equation(e.vars().iter().map(|&v| index[v as usize]).collect(), e.rhs())),
                );
                cs
            })
            .collect();
        Ok(Compiled { vars, quants, disjuncts })
    }
}

struct Search<'a> {
    c: &'a Compiled,
    value: Vec<Option<bool>>,
    nodes: u64,
    max_nodes: u64,
    relevant: Vec<bool>,
}

impl Search<'_> {
    fn cons_status(&self, cons: &Cons) -> Status {
        match cons {
            Cons::Clause(lits) => {
                let mut open = false;
                for &(i, pos) in lits {
                    match self.value[i] {
                        Some(b) if b == pos => return Status::True,
                        Some(_) => {}
                        None => open = true,
                    }
                }
                if open {
                    Status::Open
                } else {
                    Status::False
                }
            }
            Cons::Equation(vs, rhs) => {
                let mut acc = false;
                for &i in vs {
                    match self.value[i] {
                        Some(b) => acc ^= b,
                        None => return Status::Open,
                    }
                }
                if acc == *rhs {
                    Status::True
                } else {
                    Status::False
                }
            }
        }
    }

    /// Matrix status; marks variables of open constraints in live disjuncts.
    fn status(&mut self) -> Status {
        self.relevant.iter_mut().for_each(|r| *r = false);
        let mut any_open = false;
        for d in &self.c.disjuncts {
            let mut dstatus = Status::True;
            for cons in d {
                match self.cons_status(cons) {
                    Status::False => {
                        dstatus = Status::False;
                        break;
                    }
                    Status::Open => dstatus = Status::Open,
                    Status::True => {}
                }
            }
            match dstatus {
                Status::True => return Status::True,
                Status::False => {}
                Status::Open => {
                    any_open = true;
                    for cons in d {
                        if self.cons_status(cons) == Status::Open {
                            match cons {
                                Cons::Clause(lits) => lits.iter().for_each(|&(i, _)| self.relevant[i] = true),
                                Cons::Equation(vs, _) => vs.iter().for_each(|&i| self.relevant[i] = true),
                            }
                        }
                    }
                }
            }
        }
        if any_open {
            Status::Open
        } else {
            Status::False
        }
    }

    fn next_var(&self) -> Option<usize> {
        (0..self.c.vars.len()).find(|&i| self.value[i].is_none() && self.relevant[i])
    }

    fn eval(&mut self) -> Result<bool, OracleError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(OracleError::BudgetExceeded(format!("more than {} game-tree nodes", self.max_nodes)));
        }
        match self.status() {
            Status::True => return Ok(true),
            Status::False => return Ok(false),
            Status::Open => {}
        }
        let i = self.next_var().expect("open matrix has an unassigned variable");
        let exists = self.c.quants[i] == Quant::Exists;
        for b in [false, true] {
            self.value[i] = Some(b);
            let r = self.eval()?;
            if r == exists {
                self.value[i] = None;
                return Ok(r);
            }
        }
        self.value[i] = None;
        Ok(!exists)
    }

    /// Follows one losing line of a false formula, recording the branch values.
    fn descend_losing(&mut self) -> Result<(), OracleError> {
        loop {
            match self.status() {
                Status::Open => {}
                _ => return Ok(()),
            }
            let i = self.next_var().expect("open matrix has an unassigned variable");
            if self.c.quants[i] == Quant::Forall {
                self.value[i] = Some(false);
                if self.eval()? {
                    self.value[i] = Some(true);
                }
            } else {
                self.value[i] = Some(false);
            }
        }
    }
}

fn search<'a>(c: &'a Compiled, budget: &OracleBudget) -> Search<'a> {
    Search {
        c,
        value: vec![None; c.vars.len()],
        nodes: 0,
        max_nodes: budget.max_nodes,
        relevant: vec![false; c.vars.len()],
    }
}

/// Truth value by game-tree search; an empty disjunct list is false.
pub fn evaluate(phi: &DisjunctQbf, budget: &OracleBudget) -> Result<bool, OracleError> {
    let c = Compiled::new(phi, budget)?;
    search(&c, budget).eval()
}

pub fn evaluate_qbf(phi: &QbfFormula, budget: &OracleBudget) -> Result<bool, OracleError> {
    evaluate(&phi.to_disjunct(), budget)
}

/// One total assignment along a universal winning line, or `None` when true.
pub fn winning_counterexample(
    phi: &DisjunctQbf,
    budget: &OracleBudget,
) -> Result<Option<PartialAssignment>, OracleError> {
    let c = Compiled::new(phi, budget)?;
    let mut s = search(&c, budget);
    if s.eval()? {
        return Ok(None);
    }
    s.descend_losing()?;
    let mut tau = PartialAssignment::new();
    for v in phi.prefix.vars() {
        tau.set(v, false);
    }
    for (i, &v) in c.vars.iter().enumerate() {
        tau.set(v, s.value[i].unwrap_or(false));
    }
    Ok(Some(tau))
}

/// Matrices agree on every total assignment of the shared prefix.
pub fn equisatisfiable(a: &DisjunctQbf, b: &DisjunctQbf, budget: &OracleBudget) -> Result<bool, OracleError> {
    if a.prefix != b.prefix {
        return Err(OracleError::PrefixMismatch);
    }
    let vars = a.prefix.vars();
    if vars.len() > budget.max_vars {
        return Err(OracleError::BudgetExceeded(format!(
            "{} variables, limit {}",
            vars.len(),
            budget.max_vars
        )));
    }
    let mut index = vec![0usize; a.max_var().max(b.max_var()) as usize + 1];
    for (i, &v) in vars.iter().enumerate() {
        index[v as usize] = i;
    }
    let holds = |phi: &DisjunctQbf, mask: u64| {
        phi.disjuncts.iter().any(|d| d.eval(|v| mask >> index[v as usize] & 1 == 1))
    };
    let total = 1u64 << vars.len();
    if total > budget.max_nodes {
        return Err(OracleError::BudgetExceeded(format!("{total} assignments")));
    }
    Ok((0..total).all(|mask| holds(a, mask) == holds(b, mask)))
}
