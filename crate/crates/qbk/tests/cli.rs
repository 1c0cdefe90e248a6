use std::path::PathBuf;
use std::process::{Command, Output};

fn qbk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbk")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("qbk-cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn generated(name: &str, args: &[&str]) -> String {
    let path = scratch(name, "");
    let mut full = vec!["generate"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    let out = qbk(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn oracle_exit_codes() {
    let t = scratch("true.qdimacs", "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n");
    let out = qbk(&["oracle", "eval", &t]);
    assert_eq!(code(&out), 10);
    assert!(stdout(&out).starts_with("TRUE"));
    let f = scratch("false.qdimacs", "p cnf 2 2\ne 1 0\na 2 0\n1 2 0\n-1 -2 0\n");
    let out = qbk(&["oracle", "eval", &f]);
    assert_eq!(code(&out), 20);
    assert!(stdout(&out).lines().any(|l| l == "FALSE"));
    assert!(stdout(&out).contains("c losing play:"));
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(code(&qbk(&["oracle", "eval", "/nonexistent/file"])), 1);
    assert_eq!(code(&qbk(&["frobnicate"])), 1);
    assert_eq!(code(&qbk(&["detect", "2cnf"])), 1);
    let bad = scratch("bad.qdimacs", "p cnf 1 1\n2 0\n");
    assert_eq!(code(&qbk(&["oracle", "eval", &bad])), 1);
    let affine = generated("affine-for-2cnf.dqbf", &["random", "--class", "affine", "--n", "4"]);
    assert_eq!(code(&qbk(&["solve", "2cnf", &affine])), 1);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&qbk(&["--help"])), 0);
    assert_eq!(code(&qbk(&["--version"])), 0);
    assert_eq!(code(&qbk(&["solve", "--help"])), 0);
}

#[test]
fn solvers_agree_with_oracle() {
    for seed in 0..12u32 {
        let seed = seed.to_string();
        for (class, solver) in [("2cnf", "2cnf"), ("affine", "affine")] {
            let file = generated(
                &format!("{class}-{seed}.dqbf"),
                &["random", "--class", class, "--n", "7", "--k", "2", "--q", "3", "--seed", &seed],
            );
            let expected = code(&qbk(&["oracle", "eval", &file]));
            let out = qbk(&["solve", solver, &file, "--trace"]);
            assert_eq!(code(&out), expected, "{class} seed {seed}");
            assert!(String::from_utf8_lossy(&out.stderr).starts_with("round 0"));
        }
    }
}

#[test]
fn transforms_keep_truth() {
    for seed in 0..6u32 {
        let seed = seed.to_string();
        let file = generated(&format!("t-{seed}.dqbf"), &["random", "--n", "6", "--k", "2", "--seed", &seed]);
        let expected = code(&qbk(&["oracle", "eval", &file]));
        for (kind, extra) in [("disj", vec!["--vars", "1,2"]), ("part", vec!["--vars", "2,3"])] {
            let out_file = scratch(&format!("t-{seed}-{kind}.dqbf"), "");
            let mut args = vec!["transform", kind, file.as_str(), out_file.as_str()];
            args.extend(extra);
            assert_eq!(code(&qbk(&args)), 0, "{kind}");
            assert_eq!(code(&qbk(&["oracle", "eval", &out_file])), expected, "{kind} seed {seed}");
        }
    }
    let six = generated("six.dqbf", &["random", "--class", "affine", "--k", "6", "--n", "4", "--d", "2", "--density", "0.3"]);
    let squished = scratch("six-squished.dqbf", "");
    assert_eq!(code(&qbk(&["transform", "squish", &six, &squished])), 0);
    assert_eq!(code(&qbk(&["oracle", "eval", &squished])), code(&qbk(&["oracle", "eval", &six])));
    assert!(std::fs::read_to_string(&squished).unwrap().starts_with("p dqbf"));
}

#[test]
fn detect_on_phi_one() {
    let phi = generated("phi1.qdimacs", &["phi-n", "--n", "1", "--format", "qdimacs"]);
    assert!(std::fs::read_to_string(&phi).unwrap().contains("p cnf 4 18"));
    for kind in ["2cnf", "horn"] {
        let out = qbk(&["detect", kind, &phi, "-k", "1"]);
        assert_eq!(code(&out), 0);
        assert_eq!(stdout(&out).trim(), "{4}");
    }
    let out = qbk(&["detect", "2cnf", &phi, "-k", "0"]);
    assert_eq!(stdout(&out).trim(), "NONE");
}

#[test]
fn guarded_commands() {
    let file = generated("guarded.dqbf", &["guarded", "--n", "8", "--k", "2", "--q", "2", "--seed", "3"]);
    let text = std::fs::read_to_string(&file).unwrap();
    let y = text.lines().find_map(|l| l.strip_prefix("c guarded ")).expect("guarded header");
    let y = y.trim_matches(|c| c == '{' || c == '}').replace(' ', ",");
    if !y.is_empty() {
        let out = qbk(&["guarded", "eliminate", &file, "--y", &y]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("c beta"));
    }
    let planted = generated("planted.qdimacs", &["enhanced", "--class", "horn", "--n", "8", "--seed", "5", "--density", "1.0"]);
    let text = std::fs::read_to_string(&planted).unwrap();
    let b = text.lines().find_map(|l| l.strip_prefix("c backdoor ")).expect("backdoor header");
    let b = b.trim_matches(|c| c == '{' || c == '}').replace(' ', ",");
    let expected = code(&qbk(&["oracle", "eval", &planted]));
    let out = qbk(&["guarded", "solve", &planted, "--backdoor", &b, "--class", "horn"]);
    assert_eq!(code(&out), expected, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_writes_csv() {
    let a = generated("bench-a.dqbf", &["random", "--n", "6", "--seed", "1"]);
    let b = generated("bench-b.dqbf", &["random", "--n", "6", "--seed", "2"]);
    let out = qbk(&["bench", &a, &b, "--solvers", "2cnf,oracle"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# qbk-bench v1"));
    assert!(lines.next().unwrap().starts_with("instance,solver,answer,oracle"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn format_flag_selects_output_dialect() {
    let q = qbk(&["generate", "3cnf", "--n", "5", "--format", "qdimacs"]);
    assert!(stdout(&q).lines().any(|l| l.starts_with("p cnf")));
    let d = qbk(&["generate", "3cnf", "--n", "5", "--format", "dqbf"]);
    assert!(stdout(&d).lines().any(|l| l.starts_with("p dqbf")));
    assert_eq!(code(&qbk(&["generate", "random", "--seed", "9"])), 0);
    assert_eq!(stdout(&qbk(&["generate", "random", "--seed", "9"])), stdout(&qbk(&["generate", "random", "--seed", "9"])));
}
