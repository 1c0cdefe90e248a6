//! Base classes for (enhanced) backdoors and their membership tests.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{ConjunctiveFormula, QbfFormula, Quant, QuantifierPrefix, Var};
use crate::graph::universal_components;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("unknown class tag {0:?}")]
    UnknownTag(String),
}

/// `D_q(2CNF)`, `D_q(d-AFF)` or `D_∃(HORN)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseClass {
    TwoCnf { q: usize },
    Affine { q: usize, d: usize },
    HornExists,
}

impl BaseClass {
    /// Alternation budget of the class.
    pub fn alternations(self) -> usize {
        match self {
            BaseClass::TwoCnf { q } | BaseClass::Affine { q, .. } => q,
            BaseClass::HornExists => 0,
        }
    }

    /// Builds a class from a CLI tag (`2cnf`, `aff`, `horn`).
    pub fn from_tag(tag: &str, q: usize, d: usize) -> Result<BaseClass, ClassError> {
        match tag.to_ascii_lowercase().as_str() {
            "2cnf" => Ok(BaseClass::TwoCnf { q }),
            "aff" | "affine" => Ok(BaseClass::Affine { q, d }),
            "horn" => Ok(BaseClass::HornExists),
            _ => Err(ClassError::UnknownTag(tag.to_string())),
        }
    }
}

impl fmt::Display for BaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseClass::TwoCnf { q } => write!(f, "D_{q}(2CNF)"),
            BaseClass::Affine { q, d } => write!(f, "D_{q}({d}-AFF)"),
            BaseClass::HornExists => write!(f, "D_E(HORN)"),
        }
    }
}

impl FromStr for BaseClass {
    type Err = ClassError;

    /// Parses `2cnf`, `2cnf:q`, `aff:q:d` or `horn`.
    fn from_str(s: &str) -> Result<BaseClass, ClassError> {
        let mut parts = s.split(':');
        let tag = parts.next().unwrap_or_default();
        let nums: Vec<usize> = parts
            .map(|p| p.parse().map_err(|_| ClassError::UnknownTag(s.to_string())))
            .collect::<Result<_, _>>()?;
        match (tag, nums.as_slice()) {
            ("horn", []) => Ok(BaseClass::HornExists),
            ("2cnf", []) => Ok(BaseClass::TwoCnf { q: 0 }),
            ("2cnf", [q]) => Ok(BaseClass::TwoCnf { q: *q }),
            ("aff", [q, d]) => Ok(BaseClass::Affine { q: *q, d: *d }),
            _ => Err(ClassError::UnknownTag(s.to_string())),
        }
    }
}

/// Reason a formula lies outside a class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The constraint (after deletion) breaks the syntactic condition.
    Constraint(String),
    /// The residual prefix has this many alternations.
    Alternations(usize),
    /// A universal variable survives in an existential class.
    Universal(Var),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Constraint(c) => write!(f, "constraint {c}"),
            Violation::Alternations(a) => write!(f, "{a} quantifier alternations"),
            Violation::Universal(v) => write!(f, "universal variable {v}"),
        }
    }
}

/// Residual prefix over the variables that still occur in `matrix`.
pub fn residual_prefix(prefix: &QuantifierPrefix, matrix: &ConjunctiveFormula) -> QuantifierPrefix {
    prefix.restricted_to(&matrix.vars())
}

/// First constraint of `matrix` outside the syntactic fragment of `class`.
pub fn constraint_violation(matrix: &ConjunctiveFormula, class: BaseClass) -> Option<String> {
    match class {
        BaseClass::TwoCnf { .. } => {
            if let Some(e) = matrix.equations.first() {
                return Some(format!("{e:?}"));
            }
            matrix.clauses.iter().find(|c| c.len() > 2).map(|c| format!("{c:?}"))
        }
        BaseClass::HornExists => {
            if let Some(e) = matrix.equations.iter().find(|e| e.len() > 1) {
                return Some(format!("{e:?}"));
            }
            matrix.clauses.iter().find(|c| c.positive_count() > 1).map(|c| format!("{c:?}"))
        }
        BaseClass::Affine { d, .. } => {
            if let Some(c) = matrix.clauses.first() {
                return Some(format!("{c:?}"));
            }
            matrix.equations.iter().find(|e| e.len() > d).map(|e| format!("{e:?}"))
        }
    }
}

/// Membership of `Φ − S` in `class`.
pub fn deletion_violation(phi: &QbfFormula, removed: &BTreeSet<Var>, class: BaseClass) -> Option<Violation> {
    let matrix = phi.matrix.delete_vars(removed);
    if let Some(c) = constraint_violation(&matrix, class) {
        return Some(Violation::Constraint(c));
    }
    let prefix = residual_prefix(&phi.prefix.without_vars(removed), &matrix);
    if class == BaseClass::HornExists {
        if let Some(b) = prefix.blocks().iter().find(|b| b.quant == Quant::Forall) {
            return Some(Violation::Universal(b.vars[0]));
        }
    }
    if prefix.alternations() > class.alternations() {
        return Some(Violation::Alternations(prefix.alternations()));
    }
    None
}

/// `B ∪ U(Φ,B)`.
pub fn enhanced_closure(phi: &QbfFormula, b_set: &BTreeSet<Var>) -> BTreeSet<Var> {
    let mut out = universal_components(&phi.to_disjunct(), b_set);
    out.extend(b_set.iter().copied());
    out
}

/// Checks that `B` is an enhanced backdoor of `Φ` to `class`.
pub fn enhanced_violation(phi: &QbfFormula, b_set: &BTreeSet<Var>, class: BaseClass) -> Option<Violation> {
    deletion_violation(phi, &enhanced_closure(phi, b_set), class)
}
