//! Writes and parses both input dialects.

use qbk::gen::{gen_random, gen_random_3cnf_qbf, GenClass, GeneratorSpec};
use qbk::io::{parse_disjunct_format, parse_qdimacs, write_disjunct_format, write_qdimacs};

fn main() {
    let spec = GeneratorSpec { seed: 11, n: 5, density: 1.5, ..Default::default() };
    let phi = gen_random_3cnf_qbf(&spec);
    let text = write_qdimacs(&phi).expect("clausal matrix");
    print!("{text}");
    assert_eq!(parse_qdimacs(&text).expect("own output parses"), phi);

    let disj = gen_random(&GeneratorSpec { k: 2, class: GenClass::Affine, ..spec });
    let text = write_disjunct_format(&disj);
    print!("{text}");
    assert_eq!(parse_disjunct_format(&text).expect("own output parses"), disj);
}
