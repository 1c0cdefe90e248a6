//! Seeded instance generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{
    AffineEquation, Clause, ConjunctiveFormula, DisjunctQbf, FreshVarPool, Lit, QbfFormula, Quant, QuantifierPrefix,
    Var,
};
use crate::transforms::{self, TransformError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("class {0} is empty")]
    EmptyClass(usize),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("n must be at least 1")]
    ZeroN,
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Random,
    Squished,
    Mcis,
    PhiN,
}

/// Constraint language of random instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenClass {
    TwoCnf,
    ThreeCnf,
    Horn,
    Affine,
    Mixed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub seed: u64,
    /// Variable count.
    pub n: usize,
    /// Disjunct count.
    pub k: usize,
    /// Quantifier block count.
    pub q: usize,
    /// Largest equation arity.
    pub d: usize,
    /// Constraints per variable in each disjunct.
    pub density: f64,
    pub class: GenClass,
    /// Quantifier of the outermost block; drawn from the seed when `None`.
    pub outermost: Option<Quant>,
}

impl Default for GeneratorSpec {
    fn default() -> GeneratorSpec {
        GeneratorSpec {
            family: Family::Random,
            seed: 0,
            n: 8,
            k: 2,
            q: 2,
            d: 3,
            density: 1.0,
            class: GenClass::TwoCnf,
            outermost: None,
        }
    }
}

fn rng_for(spec: &GeneratorSpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

/// Variables `1..=n` cut into `q` non-empty consecutive blocks (fewer when `n < q`).
pub fn random_prefix(rng: &mut impl Rng, n: usize, q: usize, outermost: Option<Quant>) -> QuantifierPrefix {
    let q = q.clamp(1, n.max(1));
    let first = outermost.unwrap_or(if rng.gen_bool(0.5) { Quant::Exists } else { Quant::Forall });
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(q - 1).collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut blocks = Vec::new();
    let mut start = 0;
    let mut quant = first;
    for end in cuts {
        blocks.push((quant, ((start + 1) as Var..=end as Var).collect()));
        quant = quant.flip();
        start = end;
    }
    QuantifierPrefix::new(blocks).expect("fresh blocks")
}

fn distinct_vars(rng: &mut impl Rng, n: usize, width: usize) -> Vec<Var> {
    let mut all: Vec<Var> = (1..=n as Var).collect();
    all.shuffle(rng);
    all.truncate(width.min(n));
    all
}

fn random_clause(rng: &mut impl Rng, n: usize, width: usize, max_positive: Option<usize>) -> Clause {
    let vars = distinct_vars(rng, n, width);
    let mut lits: Vec<Lit> = vars.iter().map(|&v| Lit::new(v, rng.gen_bool(0.5))).collect();
    if let Some(cap) = max_positive {
        let mut seen = 0;
        for l in lits.iter_mut() {
            if l.is_positive() {
                seen += 1;
                if seen > cap {
                    *l = l.negate();
                }
            }
        }
    }
    Clause::new(lits).expect("distinct variables")
}

fn random_equation(rng: &mut impl Rng, n: usize, d: usize) -> AffineEquation {
    let arity = rng.gen_range(1..=d.max(1));
    AffineEquation::new(distinct_vars(rng, n, arity), rng.gen_bool(0.5))
}

fn random_disjunct(rng: &mut impl Rng, spec: &GeneratorSpec) -> ConjunctiveFormula {
    let m = (spec.density * spec.n as f64).round() as usize;
    let n = spec.n;
    let mut clauses = Vec::new();
    let mut equations = Vec::new();
    for _ in 0..m {
        match spec.class {
            GenClass::TwoCnf => {
                let width = if rng.gen_bool(0.2) { 1 } else { 2 };
                clauses.push(random_clause(rng, n, width, None));
            }
            GenClass::ThreeCnf => clauses.push(random_clause(rng, n, 3, None)),
            GenClass::Horn => {
                let width = rng.gen_range(1..=3);
                clauses.push(random_clause(rng, n, width, Some(1)));
            }
            GenClass::Affine => equations.push(random_equation(rng, n, spec.d)),
            GenClass::Mixed => {
                if rng.gen_bool(0.5) {
                    let width = rng.gen_range(1..=3);
                    clauses.push(random_clause(rng, n, width, None));
                } else {
                    equations.push(random_equation(rng, n, spec.d));
                }
            }
        }
    }
    ConjunctiveFormula::new(clauses, equations)
}

/// Random `k`-disjunct formula over `n` variables in `q` blocks.
pub fn gen_random(spec: &GeneratorSpec) -> DisjunctQbf {
    let mut rng = rng_for(spec);
    let prefix = random_prefix(&mut rng, spec.n, spec.q, spec.outermost);
    let disjuncts = (0..spec.k).map(|_| random_disjunct(&mut rng, spec)).collect();
    DisjunctQbf::new(prefix, disjuncts).expect("variables in range")
}

/// Random 3-CNF QBF with `round(density·n)` clauses.
pub fn gen_random_3cnf_qbf(spec: &GeneratorSpec) -> QbfFormula {
    let mut rng = rng_for(spec);
    let prefix = random_prefix(&mut rng, spec.n, spec.q, spec.outermost);
    let m = (spec.density * spec.n as f64).round() as usize;
    let clauses = (0..m).map(|_| random_clause(&mut rng, spec.n, 3, None)).collect();
    QbfFormula::new(prefix, ConjunctiveFormula::from_clauses(clauses)).expect("variables in range")
}

/// Dual formula: flipped prefix, one disjunct of unit equations per clause.
pub fn negate_cnf_qbf(phi: &QbfFormula) -> DisjunctQbf {
    let disjuncts = phi
        .matrix
        .clauses
        .iter()
        .map(|c| {
            ConjunctiveFormula::from_equations(
                c.lits().iter().map(|l| AffineEquation::new([l.var()], !l.is_positive())).collect(),
            )
        })
        .collect();
    DisjunctQbf { prefix: phi.prefix.flipped(), disjuncts }
}

pub fn gen_negated_3cnf(spec: &GeneratorSpec) -> DisjunctQbf {
    negate_cnf_qbf(&gen_random_3cnf_qbf(spec))
}

/// Random affine `k`-disjunct formula squished down to four disjuncts.
pub fn gen_squished(spec: &GeneratorSpec) -> Result<DisjunctQbf, GenError> {
    let base = GeneratorSpec { class: GenClass::Affine, d: spec.d.min(2), ..spec.clone() };
    let phi = gen_random(&base);
    let mut pool = FreshVarPool::for_formula(&phi);
    Ok(transforms::squish_to_four(&phi, &mut pool)?)
}

/// Between one and `max_width` distinct variables of `pool`, sorted.
fn pick(rng: &mut impl Rng, pool: &[Var], max_width: usize) -> Vec<Var> {
    let width = rng.gen_range(1..=max_width.max(1));
    let mut vs: Vec<Var> = pool.choose_multiple(rng, width.min(pool.len())).copied().collect();
    vs.sort_unstable();
    vs
}

fn clause_over(rng: &mut impl Rng, vars: &[Var], max_positive: Option<usize>) -> Clause {
    let mut positives = 0;
    let lits = vars.iter().map(|&v| {
        let mut pos = rng.gen_bool(0.5);
        if pos && max_positive.is_some_and(|cap| positives >= cap) {
            pos = false;
        }
        positives += usize::from(pos);
        Lit::new(v, pos)
    });
    Clause::new(lits.collect::<Vec<_>>()).expect("distinct variables")
}

/// Random disjunctive formula with a closed universal set `Y` of at most six variables.
///
/// Half of the constraints lie inside `Y` with arity up to `d`; under
/// [`GenClass::Mixed`] some of those are equations.
pub fn gen_guarded(spec: &GeneratorSpec) -> (DisjunctQbf, BTreeSet<Var>) {
    let mut rng = rng_for(spec);
    let prefix = random_prefix(&mut rng, spec.n, spec.q, spec.outermost);
    let universals: Vec<Var> = prefix.vars_with(Quant::Forall).into_iter().collect();
    let y: Vec<Var> = universals.into_iter().filter(|_| rng.gen_bool(0.6)).take(6).collect();
    let y_set: BTreeSet<Var> = y.iter().copied().collect();
    let rest: Vec<Var> = (1..=spec.n as Var).filter(|v| !y_set.contains(v)).collect();
    let m = (spec.density * spec.n as f64).round() as usize;
    let mut disjuncts = Vec::with_capacity(spec.k);
    for _ in 0..spec.k {
        let mut d = ConjunctiveFormula::top();
        for _ in 0..m {
            let inside = !y.is_empty() && (rest.is_empty() || rng.gen_bool(0.5));
            if inside {
                let vars = pick(&mut rng, &y, spec.d);
                if spec.class == GenClass::Mixed && vars.len() > 1 && rng.gen_bool(0.3) {
                    d.equations.push(AffineEquation::new(vars, rng.gen_bool(0.5)));
                } else {
                    d.clauses.push(clause_over(&mut rng, &vars, None));
                }
            } else if !rest.is_empty() {
                let vars = pick(&mut rng, &rest, 2);
                d.clauses.push(clause_over(&mut rng, &vars, None));
            }
        }
        disjuncts.push(d);
    }
    (DisjunctQbf::new(prefix, disjuncts).expect("variables in range"), y_set)
}

/// Conjunctive formula with a planted enhanced backdoor.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedBackdoor {
    pub formula: QbfFormula,
    pub backdoor: BTreeSet<Var>,
    /// Universal variables attached only to the backdoor and to each other.
    pub guarded: BTreeSet<Var>,
}

/// Random formula where `backdoor_size` variables plus a guarded universal
/// set of at most `guarded_cap` variables form a deletion backdoor to
/// `spec.class` (2CNF, HORN or affine).
///
/// Constraints on the guarded set have up to three of its variables and at
/// most one backdoor variable. Under HORN every universal is guarded or,
/// beyond the cap, joins the backdoor, so the residual is existential.
pub fn gen_enhanced(spec: &GeneratorSpec, backdoor_size: usize, guarded_cap: usize) -> PlantedBackdoor {
    let mut rng = rng_for(spec);
    let prefix = random_prefix(&mut rng, spec.n, spec.q, spec.outermost);
    let mut order: Vec<Var> = (1..=spec.n as Var).collect();
    order.shuffle(&mut rng);
    let mut backdoor: Vec<Var> = order.iter().copied().take(backdoor_size).collect();
    let mut guarded = Vec::new();
    let mut rest = Vec::new();
    for &v in &order[backdoor.len()..] {
        let universal = prefix.is_universal(v);
        let horn = spec.class == GenClass::Horn;
        if universal && guarded.len() < guarded_cap && (horn || rng.gen_bool(0.5)) {
            guarded.push(v);
        } else if universal && horn {
            backdoor.push(v);
        } else {
            rest.push(v);
        }
    }
    let m = (spec.density * spec.n as f64).round() as usize;
    let mut matrix = ConjunctiveFormula::top();
    for _ in 0..m {
        let on_guarded = !guarded.is_empty() && (rest.is_empty() || rng.gen_bool(0.35));
        if !on_guarded && rest.is_empty() {
            continue;
        }
        let vars = if on_guarded {
            pick(&mut rng, &guarded, 3)
        } else {
            let width = match spec.class {
                GenClass::TwoCnf => 2,
                GenClass::Affine => spec.d,
                _ => 3,
            };
            pick(&mut rng, &rest, width)
        };
        let extra: Vec<Var> = if !backdoor.is_empty() && rng.gen_bool(0.6) {
            vec![backdoor[rng.gen_range(0..backdoor.len())]]
        } else {
            Vec::new()
        };
        if spec.class == GenClass::Affine {
            matrix.equations.push(AffineEquation::new(vars.into_iter().chain(extra), rng.gen_bool(0.5)));
            continue;
        }
        let cap = (spec.class == GenClass::Horn && !on_guarded).then_some(1);
        let mut lits = clause_over(&mut rng, &vars, cap).lits().to_vec();
        lits.extend(extra.iter().map(|&v| Lit::new(v, rng.gen_bool(0.5))));
        matrix.clauses.push(Clause::new(lits).expect("distinct variables"));
    }
    PlantedBackdoor {
        formula: QbfFormula::new(prefix, matrix).expect("variables in range"),
        backdoor: backdoor.into_iter().collect(),
        guarded: guarded.into_iter().collect(),
    }
}

/// Graph with vertices `0..n` partitioned into colour classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McisInstance {
    pub adjacency: Vec<BTreeSet<usize>>,
    pub classes: Vec<Vec<usize>>,
}

impl McisInstance {
    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds every intra-class edge.
    pub fn cliqueify(&self) -> McisInstance {
        let mut out = self.clone();
        for class in &self.classes {
            for &a in class {
                for &b in class {
                    if a != b {
                        out.adjacency[a].insert(b);
                    }
                }
            }
        }
        out
    }
}

/// `∀X∃Z. ⋀_v (x_v ∨ ⋁_{u∈N(v)} ¬x_u ∨ ¬z_{c(v)}) ∧ (z_1 ∨ … ∨ z_k)`.
///
/// `x_v = v + 1` and `z_i = n + i + 1`; false iff a multicoloured independent set exists.
pub fn gen_mcis(graph: &McisInstance) -> Result<QbfFormula, GenError> {
    let n = graph.num_vertices();
    let mut class_of = vec![None; n];
    for (i, class) in graph.classes.iter().enumerate() {
        if class.is_empty() {
            return Err(GenError::EmptyClass(i));
        }
        for &v in class {
            if v >= n {
                return Err(GenError::VertexOutOfRange(v));
            }
            class_of[v] = Some(i);
        }
    }
    let x = |v: usize| v as Var + 1;
    let z = |i: usize| (n + i) as Var + 1;
    let mut clauses = Vec::new();
    for v in 0..n {
        let Some(i) = class_of[v] else { continue };
        let mut lits = vec![Lit::pos(x(v)), Lit::neg(z(i))];
        lits.extend(graph.adjacency[v].iter().filter(|&&u| u != v).map(|&u| Lit::neg(x(u))));
        clauses.push(Clause::new(lits).expect("distinct variables"));
    }
    clauses.push(Clause::new((0..graph.classes.len()).map(|i| Lit::pos(z(i)))).expect("distinct variables"));
    let prefix = QuantifierPrefix::new(vec![
        (Quant::Forall, (0..n).map(x).collect()),
        (Quant::Exists, (0..graph.classes.len()).map(z).collect()),
    ])
    .expect("fresh blocks");
    Ok(QbfFormula::new(prefix, ConjunctiveFormula::from_clauses(clauses)).expect("variables in range"))
}

/// Random graph on `n` vertices with edge probability `density`, split round-robin into `k` classes.
pub fn gen_random_graph(spec: &GeneratorSpec) -> McisInstance {
    let mut rng = rng_for(spec);
    let n = spec.n;
    let mut adjacency = vec![BTreeSet::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(spec.density.clamp(0.0, 1.0)) {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
    }
    let k = spec.k.clamp(1, n.max(1));
    let classes = (0..k).map(|i| (i..n).step_by(k).collect()).collect();
    McisInstance { adjacency, classes }
}

/// `∀y_1…y_{n+2} ∃x`: all clauses on `x` and two `Y` variables with at most one positive `Y` literal.
///
/// `y_i = i` and `x = n + 3`.
pub fn gen_phi_n(n: usize) -> Result<QbfFormula, GenError> {
    if n == 0 {
        return Err(GenError::ZeroN);
    }
    let ys: Vec<Var> = (1..=n as Var + 2).collect();
    let x = n as Var + 3;
    let mut clauses = Vec::new();
    for (i, &a) in ys.iter().enumerate() {
        for &b in &ys[i + 1..] {
            for (pa, pb) in [(false, false), (true, false), (false, true)] {
                for px in [true, false] {
                    let c = Clause::new([Lit::new(a, pa), Lit::new(b, pb), Lit::new(x, px)]).expect("distinct");
                    clauses.push(c);
                }
            }
        }
    }
    let prefix = QuantifierPrefix::new(vec![(Quant::Forall, ys), (Quant::Exists, vec![x])]).expect("fresh blocks");
    Ok(QbfFormula::new(prefix, ConjunctiveFormula::from_clauses(clauses)).expect("variables in range"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let spec = GeneratorSpec { seed: 1, ..Default::default() };
        assert_eq!(gen_random(&spec), gen_random(&spec));
    }

    #[test]
    fn zero_density_is_top() {
        let spec = GeneratorSpec { density: 0.0, k: 1, ..Default::default() };
        assert!(gen_random(&spec).disjuncts[0].is_top());
    }

    #[test]
    fn two_cnf_widths() {
        for seed in 0..20 {
            let spec = GeneratorSpec { seed, ..Default::default() };
            assert!(gen_random(&spec).disjuncts.iter().flat_map(|d| &d.clauses).all(|c| c.len() <= 2));
        }
    }

    #[test]
    fn phi_one_has_eighteen_clauses() {
        assert_eq!(gen_phi_n(1).unwrap().matrix.clauses.len(), 18);
    }

    #[test]
    fn mcis_clause_count() {
        let g = McisInstance { adjacency: vec![BTreeSet::from([1]), BTreeSet::from([0])], classes: vec![vec![0], vec![1]] };
        assert_eq!(gen_mcis(&g).unwrap().matrix.clauses.len(), 3);
    }

    #[test]
    fn negation_of_single_unit() {
        let p = QuantifierPrefix::new(vec![(Quant::Exists, vec![1])]).unwrap();
        let phi = QbfFormula::new(p, ConjunctiveFormula::from_dimacs(&[&[1]])).unwrap();
        let dual = negate_cnf_qbf(&phi);
        assert_eq!(dual.prefix.blocks()[0].quant, Quant::Forall);
        assert_eq!(dual.disjuncts[0].equations, vec![AffineEquation::new([1], false)]);
    }
}
