//! Strong and enhanced backdoor detection, and important separators.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::class::{constraint_violation, enhanced_closure, residual_prefix, BaseClass};
use crate::formula::{ConjunctiveFormula, QbfFormula, Quant, Var};
use crate::graph::{primal_graph, PrimalGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error("the matrix has equations; a clausal matrix is required")]
    NotClausal,
    #[error("the matrix has clauses; an affine matrix is required")]
    NotAffine,
}

fn require_clausal(phi: &QbfFormula) -> Result<(), DetectError> {
    if phi.matrix.equations.is_empty() {
        Ok(())
    } else {
        Err(DetectError::NotClausal)
    }
}

/// Variables to branch on for the first clause of `φ − B` outside the target.
type Witness = fn(&ConjunctiveFormula, &BTreeSet<Var>) -> Option<Vec<Var>>;

fn long_clause(matrix: &ConjunctiveFormula, removed: &BTreeSet<Var>) -> Option<Vec<Var>> {
    matrix.clauses.iter().find_map(|c| {
        let rest: Vec<Var> = c.vars().filter(|v| !removed.contains(v)).collect();
        (rest.len() > 2).then(|| rest[..3].to_vec())
    })
}

fn two_positive(matrix: &ConjunctiveFormula, removed: &BTreeSet<Var>) -> Option<Vec<Var>> {
    matrix.clauses.iter().find_map(|c| {
        let pos: Vec<Var> =
            c.lits().iter().filter(|l| l.is_positive() && !removed.contains(&l.var())).map(|l| l.var()).collect();
        (pos.len() > 1).then(|| pos[..2].to_vec())
    })
}

fn hitting_search(matrix: &ConjunctiveFormula, chosen: &mut BTreeSet<Var>, budget: usize, witness: Witness) -> bool {
    let Some(branch) = witness(matrix, chosen) else {
        return true;
    };
    if budget == 0 {
        return false;
    }
    for v in branch {
        chosen.insert(v);
        if hitting_search(matrix, chosen, budget - 1, witness) {
            return true;
        }
        chosen.remove(&v);
    }
    false
}

/// Smallest set of size at most `k`, found by iterative deepening.
fn smallest_hitting(matrix: &ConjunctiveFormula, k: usize, witness: Witness) -> Option<BTreeSet<Var>> {
    (0..=k).find_map(|budget| {
        let mut chosen = BTreeSet::new();
        hitting_search(matrix, &mut chosen, budget, witness).then_some(chosen)
    })
}

/// Minimum strong backdoor to 2CNF of size at most `k`.
pub fn strong_backdoor_2cnf(phi: &QbfFormula, k: usize) -> Result<Option<BTreeSet<Var>>, DetectError> {
    require_clausal(phi)?;
    Ok(smallest_hitting(&phi.matrix, k, long_clause))
}

/// Minimum strong backdoor to HORN of size at most `k`.
pub fn strong_backdoor_horn(phi: &QbfFormula, k: usize) -> Result<Option<BTreeSet<Var>>, DetectError> {
    require_clausal(phi)?;
    Ok(smallest_hitting(&phi.matrix, k, two_positive))
}

/// Important `X`-`Y` separators of size at most `size_cap` in `graph`.
#[derive(Clone, Debug)]
pub struct SeparatorQuery {
    pub graph: PrimalGraph,
    pub source: BTreeSet<Var>,
    pub sink: BTreeSet<Var>,
    pub size_cap: usize,
}

/// Result of [`important_separators`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Separators {
    /// Every separator is larger than the cap.
    Infeasible,
    /// All important separators within the cap; `[∅]` when already disconnected.
    Found(Vec<BTreeSet<Var>>),
}

impl Separators {
    pub fn into_vec(self) -> Vec<BTreeSet<Var>> {
        match self {
            Separators::Infeasible => Vec::new(),
            Separators::Found(v) => v,
        }
    }
}

const INF: u32 = u32::MAX / 4;

/// Unit-capacity vertex graph with two extra undeletable terminals.
struct CutGraph {
    vars: Vec<Var>,
    adj: Vec<Vec<usize>>,
    sink: usize,
}

impl CutGraph {
    fn new(q: &SeparatorQuery) -> (CutGraph, Vec<usize>) {
        let vars: Vec<Var> = q.graph.vertices().collect();
        let index = |v: Var| vars.binary_search(&v).ok();
        let n = vars.len();
        let (s, t) = (n, n + 1);
        let mut adj = vec![Vec::new(); n + 2];
        for (i, &v) in vars.iter().enumerate() {
            for u in q.graph.neighbors(v) {
                if let Some(j) = index(u) {
                    adj[i].push(j);
                }
            }
        }
        for &x in &q.source {
            if let Some(i) = index(x) {
                adj[s].push(i);
                adj[i].push(s);
            }
        }
        for &y in &q.sink {
            if let Some(i) = index(y) {
                adj[t].push(i);
                adj[i].push(t);
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        (CutGraph { vars, adj, sink: t }, vec![s])
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Reach of `source` avoiding deleted vertices.
    fn reach(&self, source: &[bool], deleted: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&v| source[v] && !deleted[v]).collect();
        for &v in &queue {
            seen[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if !seen[u] && !deleted[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Minimum vertex cut between `source` and the sink, with the
    /// separator closest to the sink; `None` when above `cap`.
    fn farthest_min_cut(&self, source: &[bool], deleted: &[bool], cap: usize) -> Option<Vec<usize>> {
        let n = self.len();
        // node 2v = v_in, 2v+1 = v_out, 2n = super source
        let total = 2 * n + 1;
        let mut to: Vec<usize> = Vec::new();
        let mut capacity: Vec<u32> = Vec::new();
        let mut head: Vec<Vec<usize>> = vec![Vec::new(); total];
        let mut add = |a: usize, b: usize, c: u32, head: &mut Vec<Vec<usize>>| {
            head[a].push(to.len());
            to.push(b);
            capacity.push(c);
            head[b].push(to.len());
            to.push(a);
            capacity.push(0);
        };
        for v in 0..n {
            if deleted[v] {
                continue;
            }
            let c = if source[v] || v == self.sink { INF } else { 1 };
            add(2 * v, 2 * v + 1, c, &mut head);
            for &u in &self.adj[v] {
                if !deleted[u] {
                    add(2 * v + 1, 2 * u, INF, &mut head);
                }
            }
            if source[v] {
                add(2 * n, 2 * v, INF, &mut head);
            }
        }
        let target = 2 * self.sink;
        let mut flow = 0usize;
        loop {
            let mut parent = vec![usize::MAX; total];
            let mut seen = vec![false; total];
            seen[2 * n] = true;
            let mut queue = VecDeque::from([2 * n]);
            while let Some(a) = queue.pop_front() {
                for &e in &head[a] {
                    let b = to[e];
                    if !seen[b] && capacity[e] > 0 {
                        seen[b] = true;
                        parent[b] = e;
                        queue.push_back(b);
                    }
                }
            }
            if !seen[target] {
                break;
            }
            let mut bottleneck = INF;
            let mut b = target;
            while b != 2 * n {
                let e = parent[b];
                bottleneck = bottleneck.min(capacity[e]);
                b = to[e ^ 1];
            }
            if bottleneck >= INF {
                return None;
            }
            let mut b = target;
            while b != 2 * n {
                let e = parent[b];
                capacity[e] -= bottleneck;
                capacity[e ^ 1] += bottleneck;
                b = to[e ^ 1];
            }
            flow += bottleneck as usize;
            if flow > cap {
                return None;
            }
        }
        // nodes that still reach the sink in the residual graph
        let mut reaches = vec![false; total];
        reaches[target] = true;
        let mut queue = VecDeque::from([target]);
        while let Some(b) = queue.pop_front() {
            for &e in &head[b] {
                let a = to[e];
                if !reaches[a] && capacity[e ^ 1] > 0 {
                    reaches[a] = true;
                    queue.push_back(a);
                }
            }
        }
        let cut: Vec<usize> =
            (0..n).filter(|&v| !deleted[v] && !reaches[2 * v] && reaches[2 * v + 1]).collect();
        debug_assert_eq!(cut.len(), flow);
        Some(cut)
    }

    fn enumerate(&self, source: Vec<bool>, deleted: Vec<bool>, cap: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(cut) = self.farthest_min_cut(&source, &deleted, cap) else {
            return;
        };
        if cut.is_empty() {
            let mut s = chosen.clone();
            s.sort_unstable();
            out.push(s);
            return;
        }
        let mut cut_deleted = deleted.clone();
        for &v in &cut {
            cut_deleted[v] = true;
        }
        let far = self.reach(&source, &cut_deleted);
        let v = cut[0];
        let mut without = deleted;
        without[v] = true;
        chosen.push(v);
        self.enumerate(source, without.clone(), cap - 1, chosen, out);
        chosen.pop();
        without[v] = false;
        let mut grown = far;
        grown[v] = true;
        self.enumerate(grown, without, cap, chosen, out);
    }
}

fn separator_reach(g: &PrimalGraph, source: &BTreeSet<Var>, s: &BTreeSet<Var>) -> BTreeSet<Var> {
    let start: BTreeSet<Var> = source.iter().copied().filter(|v| !s.contains(v) && g.contains(*v)).collect();
    g.reachable(&start, s)
}

fn separates(g: &PrimalGraph, source: &BTreeSet<Var>, sink: &BTreeSet<Var>, s: &BTreeSet<Var>) -> bool {
    separator_reach(g, source, s).iter().all(|v| !sink.contains(v) || s.contains(v))
}

/// Inclusion-minimal `X`-`Y` separator.
pub fn is_minimal_separator(g: &PrimalGraph, source: &BTreeSet<Var>, sink: &BTreeSet<Var>, s: &BTreeSet<Var>) -> bool {
    separates(g, source, sink, s)
        && s.iter().all(|v| {
            let mut smaller = s.clone();
            smaller.remove(v);
            !separates(g, source, sink, &smaller)
        })
}

/// All important separators of size at most the cap, by branching on a
/// vertex of the farthest minimum cut.
pub fn important_separators(q: &SeparatorQuery) -> Separators {
    let (cg, sources) = CutGraph::new(q);
    let mut source = vec![false; cg.len()];
    for s in sources {
        source[s] = true;
    }
    if cg.farthest_min_cut(&source, &vec![false; cg.len()], q.size_cap).is_none() {
        return Separators::Infeasible;
    }
    let mut raw = Vec::new();
    cg.enumerate(source, vec![false; cg.len()], q.size_cap, &mut Vec::new(), &mut raw);
    let mut candidates: Vec<BTreeSet<Var>> =
        raw.into_iter().map(|s| s.into_iter().map(|i| cg.vars[i]).collect()).collect();
    candidates.sort();
    candidates.dedup();
    let reaches: Vec<BTreeSet<Var>> =
        candidates.iter().map(|s| separator_reach(&q.graph, &q.source, s)).collect();
    let mut out = Vec::new();
    for (i, s) in candidates.iter().enumerate() {
        if !is_minimal_separator(&q.graph, &q.source, &q.sink, s) {
            continue;
        }
        let dominated = candidates.iter().enumerate().any(|(j, t)| {
            j != i && t.len() <= s.len() && reaches[i].is_subset(&reaches[j]) && reaches[i] != reaches[j]
        });
        if !dominated {
            out.push(s.clone());
        }
    }
    let limit = 4u128.saturating_pow(q.size_cap as u32);
    assert!(out.len() as u128 <= limit, "{} important separators above 4^{}", out.len(), q.size_cap);
    Separators::Found(out)
}

/// Node of the detection search tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchNode {
    pub chosen: BTreeSet<Var>,
    pub depth: usize,
}

/// Work done by a detection run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub node_cap: u128,
}

/// `Φ − (B ∪ U(Φ,B))` with the prefix cut down to the remaining matrix variables.
pub fn enhanced_residual(phi: &QbfFormula, b_set: &BTreeSet<Var>) -> QbfFormula {
    let removed = enhanced_closure(phi, b_set);
    let matrix = phi.matrix.delete_vars(&removed);
    let prefix = residual_prefix(&phi.prefix.without_vars(&removed), &matrix);
    QbfFormula { prefix, matrix }
}

#[derive(Clone, Copy)]
enum Target {
    Alternations(usize),
    Class(BaseClass),
}

struct Search<'a> {
    phi: &'a QbfFormula,
    k: usize,
    target: Target,
    existentials: BTreeSet<Var>,
    graph: PrimalGraph,
    stats: SearchStats,
}

impl Search<'_> {
    /// Children for branching on `x`: `B ∪ {x}`, plus `B ∪ S` for every
    /// important `x`-`V_∃` separator `S` when `x` is universal.
    fn children_for(&self, node: &SearchNode, x: Var, out: &mut Vec<BTreeSet<Var>>) {
        let mut with_x = node.chosen.clone();
        with_x.insert(x);
        out.push(with_x);
        if !self.phi.prefix.is_universal(x) {
            return;
        }
        let graph = self.graph.without(&node.chosen);
        let query = SeparatorQuery {
            graph,
            source: BTreeSet::from([x]),
            sink: self.existentials.difference(&node.chosen).copied().collect(),
            size_cap: self.k - node.chosen.len(),
        };
        for s in important_separators(&query).into_vec() {
            if !s.is_empty() {
                out.push(node.chosen.union(&s).copied().collect());
            }
        }
    }

    fn children(&self, node: &SearchNode, residual: &QbfFormula) -> Option<Vec<BTreeSet<Var>>> {
        let mut out = Vec::new();
        let blocks = residual.prefix.blocks();
        let alternation_cap = match self.target {
            Target::Alternations(q) => q,
            Target::Class(c) => c.alternations(),
        };
        if residual.prefix.alternations() > alternation_cap {
            for b in blocks.iter().take(alternation_cap + 2) {
                self.children_for(node, b.vars[0], &mut out);
            }
            return Some(out);
        }
        let Target::Class(class) = self.target else {
            return None;
        };
        let branch: Vec<Var> = match class {
            BaseClass::TwoCnf { .. } => long_clause(&residual.matrix, &BTreeSet::new())?,
            BaseClass::HornExists => two_positive(&residual.matrix, &BTreeSet::new())?,
            BaseClass::Affine { d, .. } => {
                let e = residual.matrix.equations.iter().find(|e| e.len() > d)?;
                if e.len() > self.k - node.chosen.len() + d {
                    return Some(Vec::new());
                }
                e.vars().to_vec()
            }
        };
        for x in branch {
            self.children_for(node, x, &mut out);
        }
        Some(out)
    }

    fn is_member(&self, residual: &QbfFormula) -> bool {
        match self.target {
            Target::Alternations(q) => residual.prefix.alternations() <= q,
            Target::Class(c) => {
                let universal = residual.prefix.blocks().iter().any(|b| b.quant == Quant::Forall);
                residual.prefix.alternations() <= c.alternations()
                    && constraint_violation(&residual.matrix, c).is_none()
                    && !(c == BaseClass::HornExists && universal)
            }
        }
    }

    fn dfs(&mut self, node: SearchNode) -> Option<BTreeSet<Var>> {
        self.stats.nodes += 1;
        assert!(
            u128::from(self.stats.nodes) <= self.stats.node_cap,
            "search tree exceeded {} nodes",
            self.stats.node_cap
        );
        let residual = enhanced_residual(self.phi, &node.chosen);
        if self.is_member(&residual) {
            return Some(node.chosen);
        }
        if node.chosen.len() >= self.k {
            return None;
        }
        let mut kids = self.children(&node, &residual)?;
        let mut seen = BTreeSet::new();
        kids.retain(|c| c.len() <= self.k && seen.insert(c.clone()));
        for chosen in kids {
            let child = SearchNode { chosen, depth: node.depth + 1 };
            if let Some(found) = self.dfs(child) {
                return Some(found);
            }
        }
        None
    }
}

fn node_cap(k: usize, q: usize, class: Option<BaseClass>) -> u128 {
    let sep = 4u128.saturating_pow(k as u32);
    let per = |branch: u128| branch.saturating_mul(sep.saturating_add(1)).saturating_add(1);
    let alt = per(q as u128 + 2).saturating_pow(k as u32).saturating_mul(k as u128 + 1);
    let stage = match class {
        None => 1,
        Some(BaseClass::TwoCnf { .. }) => per(3).saturating_pow(k as u32),
        Some(BaseClass::HornExists) => per(2).saturating_pow(k as u32),
        Some(BaseClass::Affine { d, .. }) => per((k + d) as u128).saturating_pow(k as u32),
    };
    alt.saturating_mul(stage.saturating_mul(k as u128 + 1))
}

fn run_search(phi: &QbfFormula, k: usize, target: Target) -> (Option<BTreeSet<Var>>, SearchStats) {
    let (q, class) = match target {
        Target::Alternations(q) => (q, None),
        Target::Class(c) => (c.alternations(), Some(c)),
    };
    let mut search = Search {
        phi,
        k,
        target,
        existentials: phi.prefix.vars_with(Quant::Exists),
        graph: primal_graph(&phi.to_disjunct()),
        stats: SearchStats { nodes: 0, node_cap: node_cap(k, q, class) },
    };
    let found = search.dfs(SearchNode { chosen: BTreeSet::new(), depth: 0 });
    (found, search.stats)
}

/// Enhanced backdoor of size at most `k` to formulas with at most `q` alternations.
pub fn enhanced_backdoor_qalt(phi: &QbfFormula, k: usize, q: usize) -> Option<BTreeSet<Var>> {
    enhanced_backdoor_qalt_stats(phi, k, q).0
}

pub fn enhanced_backdoor_qalt_stats(phi: &QbfFormula, k: usize, q: usize) -> (Option<BTreeSet<Var>>, SearchStats) {
    run_search(phi, k, Target::Alternations(q))
}

/// Enhanced backdoor of size at most `k` to `class`.
pub fn enhanced_backdoor(phi: &QbfFormula, k: usize, class: BaseClass) -> Result<Option<BTreeSet<Var>>, DetectError> {
    enhanced_backdoor_stats(phi, k, class).map(|(b, _)| b)
}

pub fn enhanced_backdoor_stats(
    phi: &QbfFormula,
    k: usize,
    class: BaseClass,
) -> Result<(Option<BTreeSet<Var>>, SearchStats), DetectError> {
    match class {
        BaseClass::Affine { .. } if !phi.matrix.clauses.is_empty() => return Err(DetectError::NotAffine),
        BaseClass::TwoCnf { .. } | BaseClass::HornExists => require_clausal(phi)?,
        _ => {}
    }
    Ok(run_search(phi, k, Target::Class(class)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::enhanced_violation;
    use crate::formula::QuantifierPrefix;

    fn qbf(blocks: Vec<(Quant, Vec<Var>)>, rows: &[&[i64]]) -> QbfFormula {
        QbfFormula::new(QuantifierPrefix::new(blocks).unwrap(), ConjunctiveFormula::from_dimacs(rows)).unwrap()
    }

    fn set(vs: &[Var]) -> BTreeSet<Var> {
        vs.iter().copied().collect()
    }

    #[test]
    fn strong_2cnf_examples() {
        let one = qbf(vec![(Quant::Exists, vec![1, 2, 3])], &[&[1, 2, 3]]);
        assert_eq!(strong_backdoor_2cnf(&one, 1).unwrap(), Some(set(&[1])));
        let two = qbf(vec![(Quant::Exists, vec![1, 2, 3, 4, 5, 6])], &[&[1, 2, 3], &[4, 5, 6]]);
        assert_eq!(strong_backdoor_2cnf(&two, 1).unwrap(), None);
        assert_eq!(strong_backdoor_2cnf(&two, 2).unwrap().map(|b| b.len()), Some(2));
    }

    #[test]
    fn strong_horn_examples() {
        let phi = qbf(vec![(Quant::Exists, vec![1, 2, 3])], &[&[1, 2, -3]]);
        assert_eq!(strong_backdoor_horn(&phi, 1).unwrap(), Some(set(&[1])));
        let horn = qbf(vec![(Quant::Exists, vec![1, 2])], &[&[1, -2], &[-1]]);
        assert_eq!(strong_backdoor_horn(&horn, 0).unwrap(), Some(BTreeSet::new()));
    }

    fn path(vs: &[Var]) -> PrimalGraph {
        let mut g = PrimalGraph::new();
        for w in vs.windows(2) {
            g.add_edge(w[0], w[1]);
        }
        g
    }

    #[test]
    fn path_separator_is_nearest_the_sink() {
        let q = SeparatorQuery { graph: path(&[1, 2, 3]), source: set(&[1]), sink: set(&[3]), size_cap: 1 };
        assert_eq!(important_separators(&q), Separators::Found(vec![set(&[3])]));
    }

    #[test]
    fn shared_vertex_needs_a_cut() {
        let q = SeparatorQuery { graph: path(&[1, 2]), source: set(&[1]), sink: set(&[1]), size_cap: 0 };
        assert_eq!(important_separators(&q), Separators::Infeasible);
        let q = SeparatorQuery { size_cap: 1, ..q };
        assert_eq!(important_separators(&q), Separators::Found(vec![set(&[1])]));
    }

    #[test]
    fn disconnected_gives_empty_separator() {
        let mut g = path(&[1, 2]);
        g.add_vertex(3);
        let q = SeparatorQuery { graph: g, source: set(&[1]), sink: set(&[3]), size_cap: 2 };
        assert_eq!(important_separators(&q), Separators::Found(vec![BTreeSet::new()]));
    }

    #[test]
    fn qalt_already_within_bound() {
        let phi = qbf(vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2])], &[&[1, 2]]);
        assert_eq!(enhanced_backdoor_qalt(&phi, 0, 1), Some(BTreeSet::new()));
    }

    #[test]
    fn qalt_needs_one_variable() {
        let phi = qbf(
            vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2]), (Quant::Forall, vec![3])],
            &[&[1, 2], &[2, 3]],
        );
        assert_eq!(enhanced_backdoor_qalt(&phi, 0, 0), None);
        let b = enhanced_backdoor_qalt(&phi, 1, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert!(enhanced_residual(&phi, &b).prefix.alternations() == 0);
    }

    #[test]
    fn enhanced_horn_uses_guarded_universals() {
        let phi = qbf(vec![(Quant::Forall, vec![1, 2]), (Quant::Exists, vec![3, 4])], &[&[1, 2, 3], &[3, -4]]);
        let class = BaseClass::HornExists;
        let b = enhanced_backdoor(&phi, 1, class).unwrap().unwrap();
        assert_eq!(enhanced_violation(&phi, &b, class), None);
    }

    #[test]
    fn in_class_gives_empty_set() {
        let phi = qbf(vec![(Quant::Exists, vec![1, 2])], &[&[1, 2]]);
        let b = enhanced_backdoor(&phi, 2, BaseClass::TwoCnf { q: 0 }).unwrap();
        assert_eq!(b, Some(BTreeSet::new()));
    }
}
