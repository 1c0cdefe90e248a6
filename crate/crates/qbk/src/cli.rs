//! The `qbk` command line.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::affine::solve_affine_traced;
use crate::bench::{bench_run, Solver};
use crate::class::BaseClass;
use crate::detect::{enhanced_backdoor, strong_backdoor_2cnf, strong_backdoor_horn};
use crate::formula::{DisjunctQbf, FreshVarPool, QbfFormula, Quant, Var};
use crate::gen::{
    gen_enhanced, gen_guarded, gen_mcis, gen_negated_3cnf, gen_phi_n, gen_random, gen_random_3cnf_qbf,
    gen_random_graph, gen_squished, Family, GenClass, GeneratorSpec,
};
use crate::guarded::{compute_beta, evaluate_with_enhanced_backdoor};
use crate::io::{parse_any, write_disjunct_format, write_qdimacs, Format};
use crate::oracle::{winning_counterexample, OracleBudget};
use crate::trace::SolveTrace;
use crate::transforms::{
    backdoor_to_disjunct, disj_expand, disjunct_to_backdoor, part_expand, squish, squish_to_four,
};
use crate::twocnf::solve_2cnf_traced;

const EXIT_TRUE: u8 = 10;
const EXIT_FALSE: u8 = 20;

#[derive(Parser, Debug)]
#[command(name = "qbk", version, about = "Backdoor-based QBF evaluation toolkit")]
pub struct Cli {
    /// Input dialect, or output dialect for `generate` and `transform`.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Seed for generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Qdimacs,
    Dqbf,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Qdimacs => Format::Qdimacs,
            FormatArg::Dqbf => Format::Dqbf,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustive evaluation.
    Oracle {
        #[command(subcommand)]
        op: OracleOp,
    },
    /// FPT evaluation of disjunctive formulas.
    Solve {
        #[command(subcommand)]
        op: SolveOp,
    },
    /// Rewrites between conjunctive and disjunctive forms.
    Transform(TransformArgs),
    /// Backdoor detection.
    Detect(DetectArgs),
    /// Guarded universal elimination.
    Guarded {
        #[command(subcommand)]
        op: GuardedOp,
    },
    /// Seeded instance generation.
    Generate(GenerateArgs),
    /// Solver comparison over a corpus, as CSV.
    Bench(BenchArgs),
}

#[derive(Subcommand, Debug)]
enum OracleOp {
    /// Prints TRUE or FALSE, and a losing line of play when false.
    Eval { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum SolveOp {
    #[command(name = "2cnf")]
    TwoCnf {
        file: PathBuf,
        /// Prints per-stage disjunct counts.
        #[arg(long)]
        trace: bool,
    },
    Affine {
        file: PathBuf,
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TransformKind {
    Disj,
    Part,
    Squish,
    ToBackdoor,
    ToDisjunct,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[arg(value_enum)]
    kind: TransformKind,
    input: PathBuf,
    output: PathBuf,
    /// Comma-separated variables for `disj`, `part` and `to-disjunct`.
    #[arg(long, value_delimiter = ',')]
    vars: Vec<Var>,
    /// Target disjunct count for `squish`; squishes to four when omitted.
    #[arg(long)]
    k: Option<usize>,
    /// Split exponent for `squish`.
    #[arg(long)]
    p: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DetectKind {
    #[value(name = "2cnf")]
    TwoCnf,
    Horn,
    Enhanced,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(value_enum)]
    kind: DetectKind,
    file: PathBuf,
    #[arg(short = 'k', long = "k")]
    k: usize,
    /// `2cnf`, `aff` or `horn` for enhanced detection.
    #[arg(long, default_value = "2cnf")]
    class: String,
    #[arg(long, default_value_t = 0)]
    q: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
}

#[derive(Subcommand, Debug)]
enum GuardedOp {
    /// Prints β and the residual formula.
    Eliminate {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        y: Vec<Var>,
    },
    /// Evaluates with an enhanced backdoor.
    Solve {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        backdoor: Vec<Var>,
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 0)]
        q: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Random,
    Squished,
    Mcis,
    PhiN,
    #[value(name = "3cnf")]
    ThreeCnf,
    Negated3cnf,
    Guarded,
    Enhanced,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClassArg {
    #[value(name = "2cnf")]
    TwoCnf,
    #[value(name = "3cnf")]
    ThreeCnf,
    Horn,
    Affine,
    Mixed,
}

impl From<ClassArg> for GenClass {
    fn from(c: ClassArg) -> GenClass {
        match c {
            ClassArg::TwoCnf => GenClass::TwoCnf,
            ClassArg::ThreeCnf => GenClass::ThreeCnf,
            ClassArg::Horn => GenClass::Horn,
            ClassArg::Affine => GenClass::Affine,
            ClassArg::Mixed => GenClass::Mixed,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    q: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[arg(long, value_enum, default_value = "2cnf")]
    class: ClassArg,
    /// Planted backdoor size for `enhanced`.
    #[arg(long, default_value_t = 1)]
    backdoor: usize,
    /// Adds intra-class edges before the MCIS reduction.
    #[arg(long)]
    cliqueify: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    files: Vec<PathBuf>,
    /// Comma-separated solver tags: `2cnf`, `affine`, `oracle`.
    #[arg(long, value_delimiter = ',', default_value = "2cnf")]
    solvers: Vec<String>,
    /// CSV output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

type CliResult = Result<ExitCode, String>;

fn read(path: &Path, format: Option<Format>) -> Result<DisjunctQbf, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_any(&text, format).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_conjunctive(path: &Path, format: Option<Format>) -> Result<QbfFormula, String> {
    let phi = read(path, format)?;
    match phi.disjuncts.as_slice() {
        [m] => Ok(QbfFormula { prefix: phi.prefix.clone(), matrix: m.clone() }),
        _ => Err(format!("{}: expected a single conjunctive matrix, found {} disjuncts", path.display(), phi.k())),
    }
}

/// QDIMACS when possible and not overridden, else the disjunct format.
fn render(phi: &DisjunctQbf, format: Option<Format>) -> Result<String, String> {
    let conjunctive = phi.k() == 1 && phi.disjuncts[0].equations.is_empty();
    match format {
        Some(Format::Dqbf) => Ok(write_disjunct_format(phi)),
        Some(Format::Qdimacs) if !conjunctive => Err("output is not a single clausal matrix".to_string()),
        _ if conjunctive => {
            let q = QbfFormula { prefix: phi.prefix.clone(), matrix: phi.disjuncts[0].clone() };
            write_qdimacs(&q).map_err(|e| e.to_string())
        }
        _ => Ok(write_disjunct_format(phi)),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict(value: bool) -> ExitCode {
    println!("{}", if value { "TRUE" } else { "FALSE" });
    ExitCode::from(if value { EXIT_TRUE } else { EXIT_FALSE })
}

fn var_set(set: &BTreeSet<Var>) -> String {
    let items: Vec<String> = set.iter().map(Var::to_string).collect();
    format!("{{{}}}", items.join(" "))
}

fn print_trace(trace: &SolveTrace) {
    for s in &trace.stages {
        eprintln!(
            "round {} {:<12} disjuncts {} groups {} variables {}",
            s.round, s.stage, s.disjuncts, s.groups, s.variables
        );
    }
}

fn oracle(op: OracleOp, format: Option<Format>) -> CliResult {
    let OracleOp::Eval { file } = op;
    let phi = read(&file, format)?;
    let budget = OracleBudget::default();
    match winning_counterexample(&phi, &budget).map_err(|e| e.to_string())? {
        None => Ok(verdict(true)),
        Some(tau) => {
            println!("c losing play: {tau}");
            Ok(verdict(false))
        }
    }
}

fn solve(op: SolveOp, format: Option<Format>) -> CliResult {
    let (value, trace, show) = match op {
        SolveOp::TwoCnf { file, trace } => {
            let (v, t) = solve_2cnf_traced(&read(&file, format)?).map_err(|e| e.to_string())?;
            (v, t, trace)
        }
        SolveOp::Affine { file, trace } => {
            let (v, t) = solve_affine_traced(&read(&file, format)?).map_err(|e| e.to_string())?;
            (v, t, trace)
        }
    };
    if show {
        print_trace(&trace);
    }
    Ok(verdict(value))
}

fn transform(args: TransformArgs, format: Option<Format>) -> CliResult {
    let vars: BTreeSet<Var> = args.vars.iter().copied().collect();
    let out = match args.kind {
        TransformKind::ToDisjunct => {
            let phi = read_conjunctive(&args.input, None)?;
            backdoor_to_disjunct(&phi, &vars).map_err(|e| e.to_string())?
        }
        TransformKind::ToBackdoor => {
            let phi = read(&args.input, None)?;
            let (q, b) = disjunct_to_backdoor(&phi).map_err(|e| e.to_string())?;
            eprintln!("backdoor {}", var_set(&b));
            q.to_disjunct()
        }
        TransformKind::Disj => {
            let phi = read(&args.input, None)?;
            let mut disjuncts = Vec::new();
            for d in &phi.disjuncts {
                disjuncts.extend(disj_expand(d, &vars).map_err(|e| e.to_string())?);
            }
            DisjunctQbf { prefix: phi.prefix, disjuncts }
        }
        TransformKind::Part => {
            let phi = read(&args.input, None)?;
            let mut pool = FreshVarPool::for_formula(&phi);
            let mut prefix = phi.prefix.clone();
            let mut disjuncts = Vec::new();
            for d in &phi.disjuncts {
                let exp = part_expand(d, &vars, &mut pool);
                prefix = prefix.with_innermost(Quant::Forall, exp.selectors);
                disjuncts.extend(exp.disjuncts);
            }
            DisjunctQbf { prefix, disjuncts }
        }
        TransformKind::Squish => {
            let phi = read(&args.input, None)?;
            let mut pool = FreshVarPool::for_formula(&phi);
            match (args.k, args.p) {
                (Some(k), Some(p)) => squish(&phi, k, p, &mut pool),
                (None, None) => squish_to_four(&phi, &mut pool),
                _ => return Err("--k and --p go together".to_string()),
            }
            .map_err(|e| e.to_string())?
        }
    };
    emit(&render(&out, format)?, Some(&args.output))?;
    Ok(ExitCode::SUCCESS)
}

fn detect(args: DetectArgs, format: Option<Format>) -> CliResult {
    let phi = read_conjunctive(&args.file, format)?;
    let found = match args.kind {
        DetectKind::TwoCnf => strong_backdoor_2cnf(&phi, args.k),
        DetectKind::Horn => strong_backdoor_horn(&phi, args.k),
        DetectKind::Enhanced => {
            let class = BaseClass::from_tag(&args.class, args.q, args.d).map_err(|e| e.to_string())?;
            enhanced_backdoor(&phi, args.k, class)
        }
    }
    .map_err(|e| e.to_string())?;
    println!("{}", found.as_ref().map_or("NONE".to_string(), var_set));
    Ok(ExitCode::SUCCESS)
}

fn guarded(op: GuardedOp, format: Option<Format>) -> CliResult {
    match op {
        GuardedOp::Eliminate { file, y } => {
            let phi = read(&file, format)?;
            let y: BTreeSet<Var> = y.into_iter().collect();
            let (beta, residual) = compute_beta(&phi, &y).map_err(|e| e.to_string())?;
            let mut text = String::new();
            let _ = writeln!(text, "{}", format!("c beta {beta}").trim_end());
            text.push_str(&render(&residual, format)?);
            emit(&text, None)?;
            Ok(ExitCode::SUCCESS)
        }
        GuardedOp::Solve { file, backdoor, class, q, d } => {
            let phi = read_conjunctive(&file, format)?;
            let class = BaseClass::from_tag(&class, q, d).map_err(|e| e.to_string())?;
            let b: BTreeSet<Var> = backdoor.into_iter().collect();
            let value = evaluate_with_enhanced_backdoor(&phi, &b, class).map_err(|e| e.to_string())?;
            Ok(verdict(value))
        }
    }
}

fn generate(args: GenerateArgs, seed: u64, format: Option<Format>) -> CliResult {
    let family = match args.family {
        FamilyArg::Squished => Family::Squished,
        FamilyArg::Mcis => Family::Mcis,
        FamilyArg::PhiN => Family::PhiN,
        _ => Family::Random,
    };
    let spec = GeneratorSpec {
        family,
        seed,
        n: args.n,
        k: args.k,
        q: args.q,
        d: args.d,
        density: args.density,
        class: args.class.into(),
        outermost: None,
    };
    let mut header = String::new();
    let phi = match args.family {
        FamilyArg::Random => gen_random(&spec),
        FamilyArg::Squished => gen_squished(&spec).map_err(|e| e.to_string())?,
        FamilyArg::Mcis => {
            let graph = gen_random_graph(&spec);
            let graph = if args.cliqueify { graph.cliqueify() } else { graph };
            gen_mcis(&graph).map_err(|e| e.to_string())?.to_disjunct()
        }
        FamilyArg::PhiN => gen_phi_n(args.n).map_err(|e| e.to_string())?.to_disjunct(),
        FamilyArg::ThreeCnf => gen_random_3cnf_qbf(&spec).to_disjunct(),
        FamilyArg::Negated3cnf => gen_negated_3cnf(&spec),
        FamilyArg::Guarded => {
            let (phi, y) = gen_guarded(&spec);
            let _ = writeln!(header, "c guarded {}", var_set(&y));
            phi
        }
        FamilyArg::Enhanced => {
            let planted = gen_enhanced(&spec, args.backdoor, 3);
            let _ = writeln!(header, "c backdoor {}", var_set(&planted.backdoor));
            let _ = writeln!(header, "c guarded {}", var_set(&planted.guarded));
            planted.formula.to_disjunct()
        }
    };
    header.push_str(&render(&phi, format)?);
    emit(&header, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs, format: Option<Format>) -> CliResult {
    let solvers: Vec<Solver> =
        args.solvers.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(|e| format!("{e}"))?;
    let report = bench_run(&args.files, &solvers, format, &OracleBudget::default());
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(|e| e.to_string())?;
    emit(&String::from_utf8_lossy(&buf), args.out.as_deref())?;
    let bad = report.disagreements();
    if bad > 0 {
        return Err(format!("{bad} solver/oracle disagreements"));
    }
    Ok(ExitCode::SUCCESS)
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> ExitCode {
    let format = cli.format.map(Format::from);
    let result = match cli.command {
        Command::Oracle { op } => oracle(op, format),
        Command::Solve { op } => solve(op, format),
        Command::Transform(a) => transform(a, format),
        Command::Detect(a) => detect(a, format),
        Command::Guarded { op } => guarded(op, format),
        Command::Generate(a) => generate(a, cli.seed, format),
        Command::Bench(a) => bench(a, format),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}

/// Entry point of the `qbk` binary; usage errors exit with 1.
pub fn run() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            ExitCode::from(code)
        }
    }
}
