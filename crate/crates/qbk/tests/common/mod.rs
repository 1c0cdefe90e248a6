//! Naive reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use qbk::class::BaseClass;
use qbk::formula::{ConjunctiveFormula, DisjunctQbf, PartialAssignment, QbfFormula, Quant, QuantifierPrefix, Var};
use qbk::gen::{gen_enhanced, gen_random, GenClass, GeneratorSpec};
use qbk::graph::PrimalGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All subsets of `items` with at most `max` elements, smallest first.
pub fn subsets_up_to(items: &[Var], max: usize) -> Vec<BTreeSet<Var>> {
    let mut out = vec![BTreeSet::new()];
    let mut frontier = vec![(BTreeSet::new(), 0usize)];
    for _ in 0..max {
        let mut next = Vec::new();
        for (set, start) in frontier {
            for (i, &v) in items.iter().enumerate().skip(start) {
                let mut s: BTreeSet<Var> = set.clone();
                s.insert(v);
                out.push(s.clone());
                next.push((s, i + 1));
            }
        }
        frontier = next;
    }
    out
}

/// Every assignment of `vars`.
pub fn assignments(vars: &[Var]) -> impl Iterator<Item = PartialAssignment> + '_ {
    (0u64..1 << vars.len()).map(move |bits| {
        PartialAssignment::from_pairs(vars.iter().enumerate().map(|(i, &v)| (v, bits >> i & 1 == 1)))
    })
}

pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> PrimalGraph {
    let mut g = PrimalGraph::new();
    for v in 1..=n as Var {
        g.add_vertex(v);
        for u in 1..v {
            if rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

fn bfs(g: &PrimalGraph, start: impl IntoIterator<Item = Var>, blocked: &BTreeSet<Var>) -> BTreeSet<Var> {
    let mut seen: BTreeSet<Var> = start.into_iter().filter(|v| !blocked.contains(v) && g.contains(*v)).collect();
    let mut queue: VecDeque<Var> = seen.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for u in g.neighbors(v) {
            if !blocked.contains(&u) && seen.insert(u) {
                queue.push_back(u);
            }
        }
    }
    seen
}

pub fn naive_reach(g: &PrimalGraph, x: &BTreeSet<Var>, s: &BTreeSet<Var>) -> BTreeSet<Var> {
    bfs(g, x.iter().copied(), s)
}

pub fn naive_separates(g: &PrimalGraph, x: &BTreeSet<Var>, y: &BTreeSet<Var>, s: &BTreeSet<Var>) -> bool {
    naive_reach(g, x, s).is_disjoint(y)
}

/// Important separators of size at most `cap`, straight from the definition.
pub fn brute_important_separators(
    g: &PrimalGraph,
    x: &BTreeSet<Var>,
    y: &BTreeSet<Var>,
    cap: usize,
) -> Vec<BTreeSet<Var>> {
    let vertices: Vec<Var> = g.vertices().collect();
    let seps: Vec<(BTreeSet<Var>, BTreeSet<Var>)> = subsets_up_to(&vertices, cap)
        .into_iter()
        .filter(|s| naive_separates(g, x, y, s))
        .map(|s| {
            let r = naive_reach(g, x, &s);
            (s, r)
        })
        .collect();
    let mut out: Vec<BTreeSet<Var>> = seps
        .iter()
        .filter(|(s, r)| {
            let minimal = s.iter().all(|v| {
                let mut smaller = s.clone();
                smaller.remove(v);
                !naive_separates(g, x, y, &smaller)
            });
            let dominated = seps.iter().any(|(t, rt)| t.len() <= s.len() && r.is_subset(rt) && r != rt);
            minimal && !dominated
        })
        .map(|(s, _)| s.clone())
        .collect();
    out.sort();
    out
}

/// Primal graph of a formula built directly from the constraints.
pub fn naive_primal(phi: &QbfFormula) -> PrimalGraph {
    let mut g = PrimalGraph::new();
    for v in phi.prefix.vars() {
        g.add_vertex(v);
    }
    let scopes = phi
        .matrix
        .clauses
        .iter()
        .map(|c| c.vars().collect::<Vec<_>>())
        .chain(phi.matrix.equations.iter().map(|e| e.vars().to_vec()));
    for scope in scopes {
        for (i, &a) in scope.iter().enumerate() {
            for &b in &scope[i + 1..] {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Universal variables cut off from every existential variable by `b`.
pub fn naive_universal_closure(phi: &QbfFormula, b: &BTreeSet<Var>) -> BTreeSet<Var> {
    let g = naive_primal(phi);
    let exists: BTreeSet<Var> = phi.prefix.vars().into_iter().filter(|&v| !phi.prefix.is_universal(v)).collect();
    phi.prefix
        .vars()
        .into_iter()
        .filter(|v| phi.prefix.is_universal(*v) && !b.contains(v))
        .filter(|&v| bfs(&g, [v], b).is_disjoint(&exists))
        .collect()
}

/// Alternations of the prefix order restricted to `vars`.
pub fn naive_alternations(prefix: &QuantifierPrefix, vars: &BTreeSet<Var>) -> usize {
    let quants: Vec<Quant> = prefix
        .blocks()
        .iter()
        .flat_map(|b| b.vars.iter().filter(|v| vars.contains(v)).map(move |_| b.quant))
        .collect();
    quants.windows(2).filter(|w| w[0] != w[1]).count()
}

fn syntactic_member(matrix: &ConjunctiveFormula, class: BaseClass) -> bool {
    match class {
        BaseClass::TwoCnf { .. } => matrix.equations.is_empty() && matrix.clauses.iter().all(|c| c.len() <= 2),
        BaseClass::HornExists => {
            matrix.equations.iter().all(|e| e.len() <= 1)
                && matrix.clauses.iter().all(|c| c.lits().iter().filter(|l| l.is_positive()).count() <= 1)
        }
        BaseClass::Affine { d, .. } => matrix.clauses.is_empty() && matrix.equations.iter().all(|e| e.len() <= d),
    }
}

/// `Φ − removed` lies in `class`.
pub fn naive_member_after_deletion(phi: &QbfFormula, removed: &BTreeSet<Var>, class: BaseClass) -> bool {
    let matrix = phi.matrix.delete_vars(removed);
    let vars = matrix.vars();
    if !syntactic_member(&matrix, class) {
        return false;
    }
    if class == BaseClass::HornExists && vars.iter().any(|&v| phi.prefix.is_universal(v)) {
        return false;
    }
    naive_alternations(&phi.prefix, &vars) <= class.alternations()
}

/// Independent enhanced backdoor check.
pub fn validate_enhanced(phi: &QbfFormula, b: &BTreeSet<Var>, class: BaseClass) -> bool {
    let mut removed = naive_universal_closure(phi, b);
    removed.extend(b);
    naive_member_after_deletion(phi, &removed, class)
}

/// Enhanced backdoor check through all `2^|b|` instantiations of `b`.
pub fn validate_enhanced_by_instantiation(phi: &QbfFormula, b: &BTreeSet<Var>, class: BaseClass) -> bool {
    let guarded = naive_universal_closure(phi, b);
    let vars: Vec<Var> = b.iter().copied().collect();
    assert!(vars.len() <= 10);
    let ok = assignments(&vars).all(|tau| {
        let reduced = QbfFormula::new(phi.prefix.clone(), phi.matrix.apply(&tau)).unwrap();
        naive_member_after_deletion(&reduced, &guarded, class)
    });
    ok
}

pub fn brute_enhanced_exists(phi: &QbfFormula, k: usize, class: BaseClass) -> bool {
    subsets_up_to(&phi.prefix.vars(), k).iter().any(|b| validate_enhanced(phi, b, class))
}

pub fn validate_enhanced_qalt(phi: &QbfFormula, b: &BTreeSet<Var>, q: usize) -> bool {
    let mut removed = naive_universal_closure(phi, b);
    removed.extend(b);
    naive_alternations(&phi.prefix, &phi.matrix.delete_vars(&removed).vars()) <= q
}

pub fn brute_qalt_exists(phi: &QbfFormula, k: usize, q: usize) -> bool {
    subsets_up_to(&phi.prefix.vars(), k).iter().any(|b| validate_enhanced_qalt(phi, b, q))
}

/// Every instantiation of `b` leaves a matrix in the clause fragment.
pub fn validate_strong(matrix: &ConjunctiveFormula, b: &BTreeSet<Var>, class: BaseClass) -> bool {
    let vars: Vec<Var> = b.iter().copied().collect();
    assert!(vars.len() <= 10);
    let ok = assignments(&vars).all(|tau| syntactic_member(&matrix.apply(&tau), class));
    ok
}

pub fn brute_strong_min(phi: &QbfFormula, k: usize, class: BaseClass) -> Option<usize> {
    let vars: Vec<Var> = phi.matrix.vars().into_iter().collect();
    subsets_up_to(&vars, k).into_iter().find(|b| validate_strong(&phi.matrix, b, class)).map(|b| b.len())
}

/// Satisfiability by enumerating every assignment.
pub fn brute_sat(phi: &ConjunctiveFormula) -> bool {
    let vars: Vec<Var> = phi.vars().into_iter().collect();
    let sat = assignments(&vars).any(|tau| phi.eval(|v| tau.get(v).unwrap()));
    sat
}

/// Maximum matching size by trying every injective choice.
pub fn brute_matching(edges: &BTreeMap<usize, BTreeSet<Var>>) -> usize {
    fn go(keys: &[usize], edges: &BTreeMap<usize, BTreeSet<Var>>, used: &mut BTreeSet<Var>) -> usize {
        let Some((&first, rest)) = keys.split_first() else {
            return 0;
        };
        let mut best = go(rest, edges, used);
        for &v in &edges[&first] {
            if used.insert(v) {
                best = best.max(1 + go(rest, edges, used));
                used.remove(&v);
            }
        }
        best
    }
    let keys: Vec<usize> = edges.keys().copied().collect();
    go(&keys, edges, &mut BTreeSet::new())
}

pub fn clauses(rows: &[&[i64]]) -> ConjunctiveFormula {
    ConjunctiveFormula::from_dimacs(rows)
}

pub fn single_disjunct(phi: &DisjunctQbf) -> QbfFormula {
    assert_eq!(phi.k(), 1);
    QbfFormula::new(phi.prefix.clone(), phi.disjuncts[0].clone()).unwrap()
}

/// Random disjunctive 2CNF instances: n ≤ 12, k ≤ 3, q ≤ 4.
pub fn twocnf_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        seed,
        n: 4 + (seed % 9) as usize,
        k: 1 + (seed % 3) as usize,
        q: 1 + (seed / 3 % 4) as usize,
        density: 0.5 + (seed % 5) as f64 * 0.15,
        class: GenClass::TwoCnf,
        ..Default::default()
    }
}

/// Random disjunctive affine instances: n ≤ 12, k ≤ 3, q ≤ 4.
pub fn affine_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        seed,
        n: 4 + (seed % 9) as usize,
        k: 1 + (seed % 3) as usize,
        q: 1 + (seed / 3 % 4) as usize,
        density: 0.2 + (seed % 5) as f64 * 0.1,
        class: GenClass::Affine,
        ..Default::default()
    }
}

/// Instances for the guarded elimination; odd seeds are sparse with several disjuncts.
pub fn guarded_spec(seed: u64) -> GeneratorSpec {
    let sparse = seed % 2 == 1;
    GeneratorSpec {
        seed,
        n: 6 + (seed % 7) as usize,
        k: if sparse { 2 + (seed / 2 % 2) as usize } else { 1 + (seed % 3) as usize },
        q: 1 + (seed / 3 % 4) as usize,
        d: if sparse { 2 + (seed / 2 % 2) as usize } else { 1 + (seed / 2 % 3) as usize },
        density: if sparse { 0.4 + 0.1 * (seed / 2 % 4) as f64 } else { 0.6 + 0.2 * (seed % 4) as f64 },
        class: if seed % 5 == 0 { GenClass::Mixed } else { GenClass::TwoCnf },
        ..Default::default()
    }
}

/// Formula with a planted enhanced backdoor, and the class it reduces to.
pub fn planted(seed: u64) -> (QbfFormula, BTreeSet<Var>, BaseClass) {
    let class = [GenClass::TwoCnf, GenClass::Horn, GenClass::Affine][(seed % 3) as usize];
    let spec = GeneratorSpec {
        seed,
        n: 6 + (seed % 7) as usize,
        q: 1 + (seed / 3 % 3) as usize,
        d: 2,
        density: 0.8 + 0.2 * (seed % 3) as f64,
        class,
        ..Default::default()
    };
    let p = gen_enhanced(&spec, 1, 3);
    let q = p.formula.prefix.num_blocks();
    let base = match class {
        GenClass::TwoCnf => BaseClass::TwoCnf { q },
        GenClass::Horn => BaseClass::HornExists,
        _ => BaseClass::Affine { q, d: 2 },
    };
    (p.formula, p.backdoor, base)
}

/// Small instances over every constraint language, for the transforms.
pub fn transform_spec(seed: u64) -> GeneratorSpec {
    let classes = [GenClass::TwoCnf, GenClass::ThreeCnf, GenClass::Horn, GenClass::Affine, GenClass::Mixed];
    GeneratorSpec {
        seed,
        n: 4 + (seed % 6) as usize,
        k: 1 + (seed / 5 % 3) as usize,
        q: 1 + (seed / 2 % 4) as usize,
        d: 2 + (seed % 2) as usize,
        density: 0.4 + 0.3 * (seed / 3 % 4) as f64,
        class: classes[(seed % 5) as usize],
        ..Default::default()
    }
}

/// Six-disjunct instances in the unit/equality fragment.
pub fn six_disjunct_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        seed,
        n: 4 + (seed % 3) as usize,
        k: 6,
        q: 1 + (seed % 3) as usize,
        d: 2,
        density: 0.3 + 0.1 * (seed % 3) as f64,
        class: GenClass::Affine,
        ..Default::default()
    }
}

/// The three-disjunct 2CNF example over `∀x ∃y ∀z`; `x_i = i`, `y_i = 3 + i`, `z_i = 6 + i`.
pub fn example_del() -> DisjunctQbf {
    let prefix = QuantifierPrefix::new(vec![
        (Quant::Forall, vec![1, 2, 3]),
        (Quant::Exists, vec![4, 5, 6]),
        (Quant::Forall, vec![7, 8, 9]),
    ])
    .unwrap();
    DisjunctQbf::new(
        prefix,
        vec![
            clauses(&[&[-2, 1], &[-5, 3], &[-5, 8], &[-6, 7]]),
            clauses(&[&[2], &[-3, 4], &[-5, 6], &[-6, 9]]),
            clauses(&[&[-3, 2], &[-4, 9], &[-8, 5]]),
        ],
    )
    .unwrap()
}

/// Detection instances: n ≤ 14; every fourth seed carries a planted backdoor.
pub fn detection_instance(seed: u64) -> (QbfFormula, BaseClass) {
    let kind = seed % 3;
    let q = (seed / 3 % 3) as usize;
    let spec = GeneratorSpec {
        seed,
        n: 6 + (seed % 9) as usize,
        q: 1 + (seed / 9 % 4) as usize,
        d: 2,
        density: 0.2 + 0.1 * (seed / 3 % 4) as f64,
        class: if kind == 2 { GenClass::Affine } else { GenClass::ThreeCnf },
        ..Default::default()
    };
    let phi = if seed % 4 == 0 {
        let class = [GenClass::TwoCnf, GenClass::Horn, GenClass::Affine][kind as usize];
        gen_enhanced(&GeneratorSpec { class, density: 0.8, ..spec }, 1, 3).formula
    } else {
        single_disjunct(&gen_random(&GeneratorSpec { k: 1, ..spec }))
    };
    let class = match kind {
        0 => BaseClass::TwoCnf { q },
        1 => BaseClass::HornExists,
        _ => BaseClass::Affine { q, d: 2 },
    };
    (phi, class)
}
