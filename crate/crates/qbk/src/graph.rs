//! Primal graph of a formula and the structural measures built on it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::formula::{DisjunctQbf, Var};

/// Undirected graph on variables; edge iff two variables share a constraint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrimalGraph {
    adjacency: BTreeMap<Var, BTreeSet<Var>>,
}

impl PrimalGraph {
    pub fn new() -> PrimalGraph {
        PrimalGraph::default()
    }

    pub fn add_vertex(&mut self, v: Var) {
        self.adjacency.entry(v).or_default();
    }

    pub fn add_edge(&mut self, a: Var, b: Var) {
        if a == b {
            self.add_vertex(a);
            return;
        }
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
    }

    /// Adds a clique on `vars`.
    pub fn add_clique(&mut self, vars: &[Var]) {
        for (i, &a) in vars.iter().enumerate() {
            self.add_vertex(a);
            for &b in &vars[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Var> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn contains(&self, v: Var) -> bool {
        self.adjacency.contains_key(&v)
    }

    pub fn neighbors(&self, v: Var) -> impl Iterator<Item = Var> + '_ {
        self.adjacency.get(&v).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn has_edge(&self, a: Var, b: Var) -> bool {
        self.adjacency.get(&a).is_some_and(|s| s.contains(&b))
    }

    /// Induced subgraph after deleting `removed`.
    pub fn without(&self, removed: &BTreeSet<Var>) -> PrimalGraph {
        let adjacency = self
            .adjacency
            .iter()
            .filter(|(v, _)| !removed.contains(v))
            .map(|(&v, ns)| (v, ns.iter().copied().filter(|u| !removed.contains(u)).collect()))
            .collect();
        PrimalGraph { adjacency }
    }

    /// Vertices reachable from `start` (inclusive) avoiding `blocked`.
    pub fn reachable(&self, start: &BTreeSet<Var>, blocked: &BTreeSet<Var>) -> BTreeSet<Var> {
        let mut seen: BTreeSet<Var> = BTreeSet::new();
        let mut queue: VecDeque<Var> = VecDeque::new();
        for &s in start {
            if self.contains(s) && !blocked.contains(&s) && seen.insert(s) {
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for u in self.neighbors(v) {
                if !blocked.contains(&u) && seen.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Connected components in ascending order of their least vertex.
    pub fn components(&self) -> Vec<BTreeSet<Var>> {
        let mut seen: BTreeSet<Var> = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.vertices() {
            if seen.contains(&v) {
                continue;
            }
            let comp = self.reachable(&BTreeSet::from([v]), &BTreeSet::new());
            seen.extend(comp.iter().copied());
            out.push(comp);
        }
        out
    }
}

/// Primal graph over all disjuncts; every prefix variable is a vertex.
pub fn primal_graph(phi: &DisjunctQbf) -> PrimalGraph {
    let mut g = PrimalGraph::new();
    for v in phi.prefix.vars() {
        g.add_vertex(v);
    }
    for c in phi.constraints() {
        g.add_clique(&c.vars());
    }
    g
}

/// `δ(Y) = N(Y) ∖ Y`.
pub fn boundary(g: &PrimalGraph, y_set: &BTreeSet<Var>) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for &y in y_set {
        out.extend(g.neighbors(y).filter(|u| !y_set.contains(u)));
    }
    out
}

/// `U(Φ,B)`: union of components of `G_P(Φ) − B` without existential variables.
pub fn universal_components(phi: &DisjunctQbf, b_set: &BTreeSet<Var>) -> BTreeSet<Var> {
    let g = primal_graph(phi).without(b_set);
    let mut out = BTreeSet::new();
    for comp in g.components() {
        if comp.iter().all(|&v| phi.prefix.is_universal(v)) {
            out.extend(comp);
        }
    }
    out
}

/// `Δ(Φ,Y)`: the largest number of `Y` variables in one constraint.
pub fn max_y_arity(phi: &DisjunctQbf, y_set: &BTreeSet<Var>) -> usize {
    phi.constraints()
        .map(|c| c.vars().iter().filter(|v| y_set.contains(v)).count())
        .max()
        .unwrap_or(0)
}

/// True when every constraint touching `Y` lies inside `Y`.
pub fn is_closed(phi: &DisjunctQbf, y_set: &BTreeSet<Var>) -> bool {
    phi.constraints().all(|c| {
        let vs = c.vars();
        !vs.iter().any(|v| y_set.contains(v)) || vs.iter().all(|v| y_set.contains(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{AffineEquation, ConjunctiveFormula, Quant, QuantifierPrefix};

    fn dq(blocks: Vec<(Quant, Vec<Var>)>, ds: Vec<ConjunctiveFormula>) -> DisjunctQbf {
        DisjunctQbf::new(QuantifierPrefix::new(blocks).unwrap(), ds).unwrap()
    }

    #[test]
    fn triangle_from_clause() {
        let phi = dq(vec![(Quant::Exists, vec![1, 2, 3])], vec![ConjunctiveFormula::from_dimacs(&[&[1, 2, 3]])]);
        let g = primal_graph(&phi);
        assert_eq!(g.num_edges(), 3);
    }

    #[test]
    fn path_boundary() {
        let phi = dq(
            vec![(Quant::Exists, vec![1, 2, 3])],
            vec![ConjunctiveFormula::from_dimacs(&[&[1, 2]]), ConjunctiveFormula::from_dimacs(&[&[2, 3]])],
        );
        let g = primal_graph(&phi);
        assert_eq!(boundary(&g, &BTreeSet::from([2])), BTreeSet::from([1, 3]));
        assert!(boundary(&g, &BTreeSet::from([1, 2, 3])).is_empty());
        assert!(boundary(&g, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn universal_component_examples() {
        let phi = dq(
            vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2])],
            vec![ConjunctiveFormula::from_dimacs(&[&[1, 2]])],
        );
        assert_eq!(universal_components(&phi, &BTreeSet::from([2])), BTreeSet::from([1]));
        assert!(universal_components(&phi, &BTreeSet::new()).is_empty());
        let phi = dq(
            vec![(Quant::Forall, vec![1, 2]), (Quant::Exists, vec![3])],
            vec![ConjunctiveFormula::from_dimacs(&[&[1, 2]])],
        );
        assert_eq!(universal_components(&phi, &BTreeSet::new()), BTreeSet::from([1, 2]));
    }

    #[test]
    fn arity_examples() {
        let phi = dq(
            vec![(Quant::Forall, vec![1, 2, 3]), (Quant::Exists, vec![4])],
            vec![ConjunctiveFormula::new(
                vec![],
                vec![AffineEquation::new([1, 2, 3], false)],
            )],
        );
        assert_eq!(max_y_arity(&phi, &BTreeSet::from([1, 3])), 2);
        assert_eq!(max_y_arity(&phi, &BTreeSet::from([4])), 0);
    }
}
