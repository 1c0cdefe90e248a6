//! Backdoor-based evaluation of quantified Boolean formulas.

pub mod affine;
pub mod bench;
pub mod class;
pub mod cli;
pub mod detect;
pub mod formula;
pub mod gen;
pub mod graph;
pub mod guarded;
pub mod horn;
pub mod io;
pub mod oracle;
pub mod trace;
pub mod transforms;
pub mod twocnf;
