//! Evaluates a small QBF with the exhaustive oracle and prints a losing play.

use qbk::io::parse_qdimacs;
use qbk::oracle::{evaluate_qbf, winning_counterexample, OracleBudget};

fn main() {
    let budget = OracleBudget::default();
    for text in ["p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n", "p cnf 2 2\ne 1 0\na 2 0\n1 2 0\n-1 -2 0\n"] {
        let phi = parse_qdimacs(text).expect("valid QDIMACS");
        let value = evaluate_qbf(&phi, &budget).expect("within budget");
        println!("{} -> {}", text.lines().nth(1).unwrap_or(""), if value { "TRUE" } else { "FALSE" });
        if let Some(play) = winning_counterexample(&phi.to_disjunct(), &budget).expect("within budget") {
            println!("  losing play: {play}");
        }
    }
}
