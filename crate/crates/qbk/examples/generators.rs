//! Builds the seeded instance families and prints their shapes.

use qbk::gen::{gen_mcis, gen_negated_3cnf, gen_random_graph, gen_squished, GeneratorSpec};

fn main() {
    let spec = GeneratorSpec { seed: 42, n: 6, k: 6, d: 2, density: 0.5, ..Default::default() };
    let dual = gen_negated_3cnf(&GeneratorSpec { density: 2.0, ..spec.clone() });
    println!("negated 3-CNF: {} disjuncts, {} variables", dual.k(), dual.prefix.num_vars());
    let squished = gen_squished(&spec).expect("six disjuncts");
    println!("squished: {} disjuncts, {} variables", squished.k(), squished.prefix.num_vars());
    let graph = gen_random_graph(&GeneratorSpec { n: 6, k: 3, density: 0.4, ..spec });
    let mcis = gen_mcis(&graph).expect("non-empty classes");
    println!("mcis: {} classes, {} clauses", graph.classes.len(), mcis.matrix.clauses.len());
}
