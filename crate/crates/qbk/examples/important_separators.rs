//! Enumerates important separators between two vertex sets.

use std::collections::BTreeSet;

use qbk::detect::{important_separators, SeparatorQuery};
use qbk::graph::PrimalGraph;

fn main() {
    let mut graph = PrimalGraph::new();
    for (a, b) in [(1, 2), (1, 3), (2, 4), (3, 4), (4, 5), (5, 6), (4, 7), (7, 6)] {
        graph.add_edge(a, b);
    }
    for cap in 0..=3 {
        let q = SeparatorQuery { graph: graph.clone(), source: BTreeSet::from([1]), sink: BTreeSet::from([6]), size_cap: cap };
        println!("cap {cap}: {:?}", important_separators(&q));
    }
}
