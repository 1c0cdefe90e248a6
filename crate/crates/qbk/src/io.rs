//! QDIMACS and disjunct-format readers and writers.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{
    AffineEquation, Clause, ConjunctiveFormula, DisjunctQbf, FormulaError, Lit, Quant, QbfFormula,
    QuantifierPrefix, Var,
};

/// Parse failure with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing or malformed problem line")]
    BadHeader,
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("variable {var} exceeds declared count {declared}")]
    VariableOutOfRange { var: Var, declared: Var },
    #[error("empty quantifier block")]
    EmptyBlock,
    #[error("variable {0} quantified twice")]
    DuplicateQuantifier(Var),
    #[error("quantifier line after matrix content")]
    PrefixAfterMatrix,
    #[error("unterminated constraint at end of input")]
    Unterminated,
    #[error("constraint before the first disjunct section")]
    BodyOutsideDisjunct,
    #[error("disjunct section index {found}, expected {expected}")]
    BadSectionIndex { found: usize, expected: usize },
    #[error("declared {declared} disjuncts, found {found}")]
    DisjunctCount { declared: usize, found: usize },
    #[error("disjunct mixes clauses and equations")]
    MixedDisjunct,
    #[error("malformed equation line")]
    BadEquation,
}

/// Writer failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WriteError {
    #[error("QDIMACS cannot carry GF(2) equations")]
    EquationsInQdimacs,
}

/// Input dialect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Qdimacs,
    Dqbf,
}

/// Detects the dialect from the first problem line; defaults to QDIMACS.
pub fn detect_format(text: &str) -> Format {
    for line in text.lines() {
        let t = line.trim_start();
        if t.starts_with('p') {
            return if t.split_whitespace().nth(1) == Some("dqbf") { Format::Dqbf } else { Format::Qdimacs };
        }
    }
    Format::Qdimacs
}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokens_of_line(line_no: usize, line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..i], line: line_no, column: s + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], line: line_no, column: s + 1 });
    }
    out
}

fn int(tok: &Token<'_>) -> Result<i64, ParseError> {
    tok.text
        .parse::<i64>()
        .map_err(|_| err(tok.line, tok.column, ParseErrorKind::UnexpectedToken(tok.text.to_string())))
}

fn var_in_range(tok: &Token<'_>, value: i64, declared: Var) -> Result<Var, ParseError> {
    let v = value.unsigned_abs();
    if v > u64::from(declared) {
        return Err(err(tok.line, tok.column, ParseErrorKind::VariableOutOfRange { var: v as Var, declared }));
    }
    Ok(v as Var)
}

/// Meaningful lines with their 1-based numbers (comments and blanks dropped).
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('c')
        })
}

struct PrefixBuilder {
    blocks: Vec<(Quant, Vec<Var>)>,
    seen: Vec<bool>,
}

impl PrefixBuilder {
    fn new(n: Var) -> PrefixBuilder {
        PrefixBuilder { blocks: Vec::new(), seen: vec![false; n as usize + 1] }
    }

    fn push_line(&mut self, toks: &[Token<'_>], declared: Var) -> Result<(), ParseError> {
        let head = &toks[0];
        let quant = if head.text == "a" { Quant::Forall } else { Quant::Exists };
        let mut vars = Vec::new();
        let mut closed = false;
        for tok in &toks[1..] {
            if closed {
                return Err(err(tok.line, tok.column, ParseErrorKind::UnexpectedToken(tok.text.to_string())));
            }
            let value = int(tok)?;
            if value == 0 {
                closed = true;
                continue;
            }
            if value < 0 {
                return Err(err(tok.line, tok.column, ParseErrorKind::UnexpectedToken(tok.text.to_string())));
            }
            let v = var_in_range(tok, value, declared)?;
            if self.seen[v as usize] {
                return Err(err(tok.line, tok.column, ParseErrorKind::DuplicateQuantifier(v)));
            }
            self.seen[v as usize] = true;
            vars.push(v);
        }
        if !closed {
            let last = toks.last().expect("non-empty line");
            return Err(err(last.line, last.column + last.text.len(), ParseErrorKind::Unterminated));
        }
        if vars.is_empty() {
            return Err(err(head.line, head.column, ParseErrorKind::EmptyBlock));
        }
        self.blocks.push((quant, vars));
        Ok(())
    }

    /// Appends unquantified variables `1..=n` as an innermost existential block.
    fn finish(mut self, n: Var, line: usize) -> Result<QuantifierPrefix, ParseError> {
        let free: Vec<Var> = (1..=n).filter(|&v| !self.seen[v as usize]).collect();
        self.blocks.push((Quant::Exists, free));
        QuantifierPrefix::new(self.blocks).map_err(|e| match e {
            FormulaError::DuplicateQuantified(v) => err(line, 1, ParseErrorKind::DuplicateQuantifier(v)),
            _ => err(line, 1, ParseErrorKind::BadHeader),
        })
    }
}

fn parse_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    keyword: &str,
) -> Result<(usize, Var, usize), ParseError> {
    let (no, line) = lines.next().ok_or_else(|| err(1, 1, ParseErrorKind::BadHeader))?;
    let toks = tokens_of_line(no, line);
    if toks.len() != 4 || toks[0].text != "p" || toks[1].text != keyword {
        return Err(err(no, toks.first().map_or(1, |t| t.column), ParseErrorKind::BadHeader));
    }
    let n = int(&toks[2])?;
    let m = int(&toks[3])?;
    if n < 0 || m < 0 || n > i64::from(u32::MAX >> 2) {
        return Err(err(no, toks[2].column, ParseErrorKind::BadHeader));
    }
    Ok((no, n as Var, m as usize))
}

/// Parses QDIMACS text; unquantified variables join an innermost existential block.
pub fn parse_qdimacs(text: &str) -> Result<QbfFormula, ParseError> {
    let mut lines = content_lines(text);
    let (header_line, n, _m) = parse_header(&mut lines, "cnf")?;
    let mut prefix = PrefixBuilder::new(n);
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    let mut in_matrix = false;
    let mut last_line = header_line;
    for (no, line) in lines {
        last_line = no;
        let toks = tokens_of_line(no, line);
        if toks[0].text == "a" || toks[0].text == "e" {
            if in_matrix || open.is_some() {
                return Err(err(no, toks[0].column, ParseErrorKind::PrefixAfterMatrix));
            }
            prefix.push_line(&toks, n)?;
            continue;
        }
        in_matrix = true;
        for tok in &toks {
            let value = int(tok)?;
            if value == 0 {
                if let Some(c) = Clause::new(current.drain(..)) {
                    clauses.push(c);
                }
                open = None;
            } else {
                let v = var_in_range(tok, value, n)?;
                current.push(Lit::new(v, value > 0));
                open.get_or_insert((tok.line, tok.column));
            }
        }
    }
    if let Some((l, c)) = open {
        return Err(err(l, c, ParseErrorKind::Unterminated));
    }
    let prefix = prefix.finish(n, last_line)?;
    Ok(QbfFormula { prefix, matrix: ConjunctiveFormula::from_clauses(clauses) })
}

/// Options for [`parse_disjunct_format_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct DqbfOptions {
    pub allow_mixed: bool,
}

/// Parses the disjunct format with mixed disjuncts rejected.
pub fn parse_disjunct_format(text: &str) -> Result<DisjunctQbf, ParseError> {
    parse_disjunct_format_with(text, DqbfOptions::default())
}

pub fn parse_disjunct_format_with(text: &str, options: DqbfOptions) -> Result<DisjunctQbf, ParseError> {
    let mut lines = content_lines(text);
    let (header_line, n, k) = parse_header(&mut lines, "dqbf")?;
    let mut prefix = PrefixBuilder::new(n);
    let mut disjuncts: Vec<ConjunctiveFormula> = Vec::new();
    let mut section_line: Vec<usize> = Vec::new();
    let mut last_line = header_line;
    for (no, line) in lines {
        last_line = no;
        let toks = tokens_of_line(no, line);
        let head = &toks[0];
        match head.text {
            "a" | "e" => {
                if !disjuncts.is_empty() {
                    return Err(err(no, head.column, ParseErrorKind::PrefixAfterMatrix));
                }
                prefix.push_line(&toks, n)?;
            }
            "d" => {
                if toks.len() != 3 || toks[2].text != "0" {
                    return Err(err(no, head.column, ParseErrorKind::UnexpectedToken(line.trim().to_string())));
                }
                let idx = int(&toks[1])?;
                let expected = disjuncts.len() + 1;
                if idx != expected as i64 {
                    return Err(err(
                        no,
                        toks[1].column,
                        ParseErrorKind::BadSectionIndex { found: idx.max(0) as usize, expected },
                    ));
                }
                disjuncts.push(ConjunctiveFormula::top());
                section_line.push(no);
            }
            "x" => {
                let Some(current) = disjuncts.last_mut() else {
                    return Err(err(no, head.column, ParseErrorKind::BodyOutsideDisjunct));
                };
                current.equations.push(parse_equation(&toks, n)?);
            }
            _ => {
                let Some(current) = disjuncts.last_mut() else {
                    return Err(err(no, head.column, ParseErrorKind::BodyOutsideDisjunct));
                };
                let mut lits = Vec::new();
                let mut closed = false;
                for tok in &toks {
                    if closed {
                        return Err(err(tok.line, tok.column, ParseErrorKind::UnexpectedToken(tok.text.to_string())));
                    }
                    let value = int(tok)?;
                    if value == 0 {
                        closed = true;
                    } else {
                        let v = var_in_range(tok, value, n)?;
                        lits.push(Lit::new(v, value > 0));
                    }
                }
                if !closed {
                    return Err(err(no, head.column, ParseErrorKind::Unterminated));
                }
                if let Some(c) = Clause::new(lits) {
                    current.clauses.push(c);
                }
            }
        }
    }
    if disjuncts.len() != k {
        return Err(err(last_line, 1, ParseErrorKind::DisjunctCount { declared: k, found: disjuncts.len() }));
    }
    if k == 0 {
        return Err(err(header_line, 1, ParseErrorKind::DisjunctCount { declared: k, found: 0 }));
    }
    if !options.allow_mixed {
        if let Some(i) = disjuncts.iter().position(ConjunctiveFormula::is_mixed) {
            return Err(err(section_line[i], 1, ParseErrorKind::MixedDisjunct));
        }
    }
    let prefix = prefix.finish(n, last_line)?;
    Ok(DisjunctQbf { prefix, disjuncts })
}

fn parse_equation(toks: &[Token<'_>], n: Var) -> Result<AffineEquation, ParseError> {
    let head = &toks[0];
    let bad = || err(head.line, head.column, ParseErrorKind::BadEquation);
    let zero = toks.iter().position(|t| t.text == "0").ok_or_else(bad)?;
    if toks.len() != zero + 3 || toks[zero + 1].text != "=" {
        return Err(bad());
    }
    let mut vars = Vec::new();
    for tok in &toks[1..zero] {
        let value = int(tok)?;
        if value <= 0 {
            return Err(err(tok.line, tok.column, ParseErrorKind::BadEquation));
        }
        vars.push(var_in_range(tok, value, n)?);
    }
    let rhs = match toks[zero + 2].text {
        "0" => false,
        "1" => true,
        _ => return Err(err(toks[zero + 2].line, toks[zero + 2].column, ParseErrorKind::BadEquation)),
    };
    Ok(AffineEquation::new(vars, rhs))
}

fn write_prefix(out: &mut String, prefix: &QuantifierPrefix) {
    for b in prefix.blocks() {
        out.push(b.quant.letter());
        for v in &b.vars {
            let _ = write!(out, " {v}");
        }
        out.push_str(" 0\n");
    }
}

fn write_clause(out: &mut String, c: &Clause) {
    for l in c.lits() {
        let _ = write!(out, "{} ", l.to_dimacs());
    }
    out.push_str("0\n");
}

fn write_equation(out: &mut String, e: &AffineEquation) {
    out.push('x');
    for v in e.vars() {
        let _ = write!(out, " {v}");
    }
    let _ = writeln!(out, " 0 = {}", u8::from(e.rhs()));
}

/// Writes `p cnf n m`, the prefix, then clauses in stored order.
pub fn write_qdimacs(phi: &QbfFormula) -> Result<String, WriteError> {
    if !phi.matrix.equations.is_empty() {
        return Err(WriteError::EquationsInQdimacs);
    }
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", phi.max_var(), phi.matrix.clauses.len());
    write_prefix(&mut out, &phi.prefix);
    for c in &phi.matrix.clauses {
        write_clause(&mut out, c);
    }
    Ok(out)
}

/// Writes `p dqbf n k`, the prefix, then one `d i 0` section per disjunct.
pub fn write_disjunct_format(phi: &DisjunctQbf) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p dqbf {} {}", phi.max_var(), phi.k());
    write_prefix(&mut out, &phi.prefix);
    for (i, d) in phi.disjuncts.iter().enumerate() {
        let _ = writeln!(out, "d {} 0", i + 1);
        for c in &d.clauses {
            write_clause(&mut out, c);
        }
        for e in &d.equations {
            write_equation(&mut out, e);
        }
    }
    out
}

/// Reads either dialect into disjunct form.
pub fn parse_any(text: &str, format: Option<Format>) -> Result<DisjunctQbf, ParseError> {
    match format.unwrap_or_else(|| detect_format(text)) {
        Format::Qdimacs => parse_qdimacs(text).map(|q| q.to_disjunct()),
        Format::Dqbf => parse_disjunct_format(text),
    }
}
