//! Benchmark harness writing one CSV row per instance and solver.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::affine::solve_affine_traced;
use crate::formula::DisjunctQbf;
use crate::io::{parse_any, Format};
use crate::oracle::{evaluate, OracleBudget};
use crate::trace::SolveTrace;
use crate::twocnf::solve_2cnf_traced;

/// Schema line written before the CSV header.
pub const SCHEMA: &str = "# qbk-bench v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("unknown solver tag {0:?}")]
    UnknownSolver(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    TwoCnf,
    Affine,
    Oracle,
}

impl FromStr for Solver {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Solver, BenchError> {
        match s {
            "2cnf" => Ok(Solver::TwoCnf),
            "affine" | "aff" => Ok(Solver::Affine),
            "oracle" => Ok(Solver::Oracle),
            _ => Err(BenchError::UnknownSolver(s.to_string())),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::TwoCnf => "2cnf",
            Solver::Affine => "affine",
            Solver::Oracle => "oracle",
        })
    }
}

/// One CSV row; `error` is set when reading or solving failed.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub solver: Solver,
    pub answer: Option<bool>,
    pub oracle: Option<bool>,
    pub disjuncts: usize,
    pub stages: String,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn disagrees(&self) -> bool {
        matches!((self.answer, self.oracle), (Some(a), Some(o)) if a != o)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn disagreements(&self) -> usize {
        self.rows.iter().filter(|r| r.disagrees()).count()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), csv::Error> {
        let mut out = out;
        writeln!(out, "{SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["instance", "solver", "answer", "oracle", "disjuncts", "stages", "wall_ms", "error"])?;
        let flag = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
        for r in &self.rows {
            w.write_record([
                r.instance.clone(),
                r.solver.to_string(),
                flag(r.answer),
                flag(r.oracle),
                r.disjuncts.to_string(),
                r.stages.clone(),
                format!("{:.3}", r.wall_ms),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `round:stage:disjuncts` for every recorded stage, `;`-separated.
pub fn stage_summary(trace: &SolveTrace) -> String {
    trace.stages.iter().map(|s| format!("{}:{}:{}", s.round, s.stage, s.disjuncts)).collect::<Vec<_>>().join(";")
}

fn run_one(name: &str, phi: &DisjunctQbf, solver: Solver, budget: &OracleBudget) -> BenchRow {
    let oracle = evaluate(phi, budget).ok();
    let start = Instant::now();
    let result: Result<(bool, SolveTrace), String> = match solver {
        Solver::TwoCnf => solve_2cnf_traced(phi).map_err(|e| e.to_string()),
        Solver::Affine => solve_affine_traced(phi).map_err(|e| e.to_string()),
        Solver::Oracle => evaluate(phi, budget).map(|v| (v, SolveTrace::default())).map_err(|e| e.to_string()),
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1000.0;
    let (answer, stages, error) = match result {
        Ok((v, trace)) => (Some(v), stage_summary(&trace), None),
        Err(e) => (None, String::new(), Some(e)),
    };
    BenchRow { instance: name.to_string(), solver, answer, oracle, disjuncts: phi.k(), stages, wall_ms, error }
}

fn failed(name: &str, solver: Solver, error: String) -> BenchRow {
    BenchRow {
        instance: name.to_string(),
        solver,
        answer: None,
        oracle: None,
        disjuncts: 0,
        stages: String::new(),
        wall_ms: 0.0,
        error: Some(error),
    }
}

fn load(path: &Path, format: Option<Format>) -> Result<DisjunctQbf, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    parse_any(&text, format).map_err(|e| e.to_string())
}

/// Runs every solver on every instance in parallel; rows follow input order.
pub fn bench_instances(instances: &[(String, DisjunctQbf)], solvers: &[Solver], budget: &OracleBudget) -> BenchReport {
    let jobs: Vec<(&(String, DisjunctQbf), Solver)> =
        instances.iter().flat_map(|i| solvers.iter().map(move |&s| (i, s))).collect();
    let rows = jobs.par_iter().map(|((name, phi), s)| run_one(name, phi, *s, budget)).collect();
    BenchReport { rows }
}

/// [`bench_instances`] over files; read failures become error rows.
pub fn bench_run(corpus: &[PathBuf], solvers: &[Solver], format: Option<Format>, budget: &OracleBudget) -> BenchReport {
    let jobs: Vec<(&PathBuf, Solver)> = corpus.iter().flat_map(|p| solvers.iter().map(move |&s| (p, s))).collect();
    let rows = jobs
        .par_iter()
        .map(|(path, s)| {
            let name = path.display().to_string();
            match load(path, format) {
                Ok(phi) => run_one(&name, &phi, *s, budget),
                Err(e) => failed(&name, *s, e),
            }
        })
        .collect();
    BenchReport { rows }
}
