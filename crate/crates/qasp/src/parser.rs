//! Text formats: the `.qasp` quantified-program syntax, QDIMACS, and the
//! `p dnf` variant used for DNF matrices.
//!
//! A `.qasp` file is a sequence of sections introduced by `%@exists`,
//! `%@forall` and `%@constraint` directive lines; each section body is plain
//! ASP-Core style rule text. Exactly one `%@constraint` section, last.

use std::fmt;

use thiserror::Error;

use crate::ast::{
    AggElement, AggFunc, Aggregate, Atom, ArithOp, BodyLiteral, ChoiceElement, CmpOp,
    HeadForm, Program, QuantifiedProgram, Quantifier, Rule, Term, check_stratified,
};
use crate::qbf::{Matrix, Qbf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError { span, message: message.into() }
    }
}

type PResult<T> = Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Directive(String),
    Not,
    Count,
    Sum,
    Dot,
    DotDot,
    Comma,
    Semi,
    Colon,
    If,
    Pipe,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Directive(d) => write!(f, "`%@{d}`"),
            Tok::Not => write!(f, "`not`"),
            Tok::Count => write!(f, "`#count`"),
            Tok::Sum => write!(f, "`#sum`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::DotDot => write!(f, "`..`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::If => write!(f, "`:-`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Ne => write!(f, "`!=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    file: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, file: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1, file }
    }

    fn span(&self) -> SourceSpan {
        SourceSpan { file: self.file.to_string(), line: self.line, column: self.col }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = *self.src.get(self.pos)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> PResult<Vec<(Tok, SourceSpan)>> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
                self.bump();
            }
            let span = self.span();
            let Some(c) = self.peek() else { break };
            match c {
                b'%' => {
                    self.bump();
                    if self.peek() == Some(b'@') {
                        self.bump();
                        let mut word = String::new();
                        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_')
                        {
                            word.push(self.bump().unwrap() as char);
                        }
                        out.push((Tok::Directive(word), span));
                    } else {
                        while matches!(self.peek(), Some(c) if c != b'\n') {
                            self.bump();
                        }
                    }
                }
                b'0'..=b'9' => {
                    let mut n: i64 = 0;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        let d = (self.bump().unwrap() - b'0') as i64;
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(d))
                            .ok_or_else(|| ParseError::new(span.clone(), "integer literal overflows"))?;
                    }
                    out.push((Tok::Int(n), span));
                }
                b'a'..=b'z' | b'_' => {
                    let mut word = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                        word.push(self.bump().unwrap() as char);
                    }
                    let tok = if word == "not" { Tok::Not } else { Tok::Ident(word) };
                    out.push((tok, span));
                }
                b'A'..=b'Z' => {
                    let mut word = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                        word.push(self.bump().unwrap() as char);
                    }
                    out.push((Tok::Var(word), span));
                }
                b'#' => {
                    self.bump();
                    let mut word = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                        word.push(self.bump().unwrap() as char);
                    }
                    let tok = match word.as_str() {
                        "count" => Tok::Count,
                        "sum" => Tok::Sum,
                        other => {
                            return Err(ParseError::new(
                                span,
                                format!("unsupported aggregate `#{other}`"),
                            ))
                        }
                    };
                    out.push((tok, span));
                }
                b'.' => {
                    self.bump();
                    if self.peek() == Some(b'.') {
                        self.bump();
                        out.push((Tok::DotDot, span));
                    } else {
                        out.push((Tok::Dot, span));
                    }
                }
                b':' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        out.push((Tok::If, span));
                    } else {
                        out.push((Tok::Colon, span));
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Tok::Le, span));
                    } else {
                        out.push((Tok::Lt, span));
                    }
                }
                b'>' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Tok::Ge, span));
                    } else {
                        out.push((Tok::Gt, span));
                    }
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Tok::Ne, span));
                    } else {
                        return Err(ParseError::new(span, "expected `!=`"));
                    }
                }
                b'=' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                    }
                    out.push((Tok::Eq, span));
                }
                b',' => {
                    self.bump();
                    out.push((Tok::Comma, span));
                }
                b';' => {
                    self.bump();
                    out.push((Tok::Semi, span));
                }
                b'|' => {
                    self.bump();
                    out.push((Tok::Pipe, span));
                }
                b'(' => {
                    self.bump();
                    out.push((Tok::LParen, span));
                }
                b')' => {
                    self.bump();
                    out.push((Tok::RParen, span));
                }
                b'{' => {
                    self.bump();
                    out.push((Tok::LBrace, span));
                }
                b'}' => {
                    self.bump();
                    out.push((Tok::RBrace, span));
                }
                b'+' => {
                    self.bump();
                    out.push((Tok::Plus, span));
                }
                b'-' => {
                    self.bump();
                    out.push((Tok::Minus, span));
                }
                b'*' => {
                    self.bump();
                    out.push((Tok::Star, span));
                }
                b'/' => {
                    self.bump();
                    out.push((Tok::Slash, span));
                }
                other => {
                    return Err(ParseError::new(
                        span,
                        format!("unexpected character `{}`", other as char),
                    ));
                }
            }
        }
        Ok(out)
    }

    fn is_cmp(tok: &Tok) -> Option<CmpOp> {
        match tok {
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Eq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Ge => Some(CmpOp::Ge),
            Tok::Gt => Some(CmpOp::Gt),
            _ => None,
        }
    }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    file: String,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn span(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, s)| s.clone())
            .unwrap_or(SourceSpan { file: self.file.clone(), line: 1, column: 1 })
    }

    fn next(&mut self) -> PResult<Tok> {
        let span = self.span();
        let t = self
            .toks
            .get(self.pos)
            .map(|(t, _)| t.clone())
            .ok_or_else(|| ParseError::new(span, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        let span = self.span();
        let t = self.next()?;
        if t == tok {
            Ok(())
        } else {
            Err(ParseError::new(span, format!("expected {tok}, found {t}")))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    // term := addsub
    fn term(&mut self) -> PResult<Term> {
        let mut t = self.term_mul()?;
        loop {
            if self.eat(&Tok::Plus) {
                t = Term::Arith(ArithOp::Add, Box::new(t), Box::new(self.term_mul()?));
            } else if self.eat(&Tok::Minus) {
                t = Term::Arith(ArithOp::Sub, Box::new(t), Box::new(self.term_mul()?));
            } else {
                break;
            }
        }
        Ok(t)
    }

    fn term_mul(&mut self) -> PResult<Term> {
        let mut t = self.term_unary()?;
        loop {
            if self.eat(&Tok::Star) {
                t = Term::Arith(ArithOp::Mul, Box::new(t), Box::new(self.term_unary()?));
            } else if self.eat(&Tok::Slash) {
                t = Term::Arith(ArithOp::Div, Box::new(t), Box::new(self.term_unary()?));
            } else {
                break;
            }
        }
        Ok(t)
    }

    fn term_unary(&mut self) -> PResult<Term> {
        if self.eat(&Tok::Minus) {
            let span = self.span();
            match self.term_unary()? {
                Term::Int(n) => Ok(Term::Int(-n)),
                _ => Err(ParseError::new(span, "unary minus applies to integer literals only")),
            }
        } else {
            self.term_primary()
        }
    }

    fn term_primary(&mut self) -> PResult<Term> {
        let span = self.span();
        match self.next()? {
            Tok::Int(n) => Ok(Term::Int(n)),
            Tok::Ident(s) => Ok(Term::Const(s)),
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            t => Err(ParseError::new(span, format!("expected a term, found {t}"))),
        }
    }

    /// A term that may be an interval (fact arguments only).
    fn arg_term(&mut self) -> PResult<Term> {
        let t = self.term()?;
        if self.eat(&Tok::DotDot) {
            let hi = self.term()?;
            Ok(Term::Interval(Box::new(t), Box::new(hi)))
        } else {
            Ok(t)
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let span = self.span();
        let name = match self.next()? {
            Tok::Ident(s) => s,
            t => return Err(ParseError::new(span, format!("expected an atom, found {t}"))),
        };
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.arg_term()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(Atom::new(name, args))
    }

    /// A positive/negative atom or a comparison literal.
    fn simple_literal(&mut self) -> PResult<BodyLiteral> {
        if self.eat(&Tok::Not) {
            return Ok(BodyLiteral::Neg(self.atom()?));
        }
        // Atom iff an identifier not followed by a comparison/arith operator
        // (0-arity atoms) or followed by `(` (atoms with arguments).
        let span = self.span();
        if let Some(Tok::Ident(_)) = self.peek() {
            let after = self.peek2();
            let atom_like = matches!(after, Some(Tok::LParen))
                || !matches!(
                    after,
                    Some(
                        Tok::Lt | Tok::Le
                            | Tok::Eq
                            | Tok::Ne
                            | Tok::Ge
                            | Tok::Gt
                            | Tok::Plus
                            | Tok::Minus
                            | Tok::Star
                            | Tok::Slash
                    )
                );
            if atom_like {
                let a = self.atom()?;
                // `p(X) < 2` would be ill-formed; atoms are not terms.
                if let Some(op) = self.peek().and_then(Lexer::is_cmp) {
                    let _ = op;
                    return Err(ParseError::new(span, "an atom cannot be compared"));
                }
                return Ok(BodyLiteral::Pos(a));
            }
        }
        let l = self.term()?;
        let op_span = self.span();
        let op = self
            .peek()
            .and_then(Lexer::is_cmp)
            .ok_or_else(|| ParseError::new(op_span, "expected a comparison operator"))?;
        self.pos += 1;
        let r = self.term()?;
        Ok(BodyLiteral::Cmp(l, op, r))
    }

    fn aggregate(&mut self, func: AggFunc) -> PResult<BodyLiteral> {
        self.expect(Tok::LBrace)?;
        let mut elements = Vec::new();
        if self.peek() != Some(&Tok::RBrace) {
            loop {
                let mut tuple = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    tuple.push(self.term()?);
                }
                let mut condition = Vec::new();
                if self.eat(&Tok::Colon) {
                    condition.push(self.simple_literal()?);
                    while self.eat(&Tok::Comma) {
                        condition.push(self.simple_literal()?);
                    }
                }
                elements.push(AggElement { tuple, condition });
                if !self.eat(&Tok::Semi) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let span = self.span();
        let op = self
            .peek()
            .and_then(Lexer::is_cmp)
            .ok_or_else(|| ParseError::new(span, "expected a comparison after the aggregate"))?;
        self.pos += 1;
        let bound = self.term()?;
        Ok(BodyLiteral::Agg(Aggregate { func, elements, op, bound }))
    }

    fn body_literal(&mut self) -> PResult<BodyLiteral> {
        match self.peek() {
            Some(Tok::Count) => {
                self.pos += 1;
                self.aggregate(AggFunc::Count)
            }
            Some(Tok::Sum) => {
                self.pos += 1;
                self.aggregate(AggFunc::Sum)
            }
            _ => self.simple_literal(),
        }
    }

    fn choice_body(&mut self, lower: Option<Term>) -> PResult<HeadForm> {
        self.expect(Tok::LBrace)?;
        let mut elements = Vec::new();
        if self.peek() != Some(&Tok::RBrace) {
            loop {
                let atom = self.atom()?;
                let mut condition = Vec::new();
                if self.eat(&Tok::Colon) {
                    condition.push(self.simple_literal()?);
                    while self.eat(&Tok::Comma) {
                        condition.push(self.simple_literal()?);
                    }
                }
                elements.push(ChoiceElement { atom, condition });
                if !self.eat(&Tok::Semi) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let upper = match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Some(Term::Int(n))
            }
            Some(Tok::Var(v)) => {
                let v = v.clone();
                self.pos += 1;
                Some(Term::Var(v))
            }
            _ => None,
        };
        Ok(HeadForm::Choice { lower, upper, elements })
    }

    fn head(&mut self) -> PResult<HeadForm> {
        match (self.peek(), self.peek2()) {
            (Some(Tok::LBrace), _) => self.choice_body(None),
            (Some(Tok::Int(n)), Some(Tok::LBrace)) => {
                let lower = Term::Int(*n);
                self.pos += 1;
                self.choice_body(Some(lower))
            }
            (Some(Tok::Var(v)), Some(Tok::LBrace)) => {
                let lower = Term::Var(v.clone());
                self.pos += 1;
                self.choice_body(Some(lower))
            }
            _ => {
                let mut atoms = vec![self.atom()?];
                while self.eat(&Tok::Pipe) {
                    atoms.push(self.atom()?);
                }
                Ok(HeadForm::Disjunction(atoms))
            }
        }
    }

    fn rule(&mut self) -> PResult<Rule> {
        let span = self.span();
        let head = if self.peek() == Some(&Tok::If) {
            HeadForm::Disjunction(Vec::new())
        } else {
            self.head()?
        };
        let mut body = Vec::new();
        if self.eat(&Tok::If) {
            if self.peek() != Some(&Tok::Dot) {
                body.push(self.body_literal()?);
                while self.eat(&Tok::Comma) {
                    body.push(self.body_literal()?);
                }
            }
        }
        self.expect(Tok::Dot)?;
        let rule = Rule { head, body };
        validate_rule(&rule, &span)?;
        Ok(rule)
    }
}

fn validate_rule(rule: &Rule, span: &SourceSpan) -> PResult<()> {
    if let Err(var) = rule.check_safety() {
        return Err(ParseError::new(
            span.clone(),
            format!("unsafe rule: variable {var} does not occur in a positive body atom"),
        ));
    }
    if !rule.is_fact() {
        let mut has_interval = false;
        for a in rule.atoms() {
            for t in &a.args {
                has_interval |= t.has_interval();
            }
        }
        if has_interval {
            return Err(ParseError::new(
                span.clone(),
                "interval terms are only allowed in facts",
            ));
        }
    }
    Ok(())
}

fn parse_rules(parser: &mut Parser, stop_at_directive: bool) -> PResult<Vec<Rule>> {
    let mut rules = Vec::new();
    loop {
        if parser.at_end() {
            break;
        }
        if stop_at_directive {
            if let Some(Tok::Directive(_)) = parser.peek() {
                break;
            }
        }
        rules.push(parser.rule()?);
    }
    Ok(rules)
}

/// Parses a plain rule list (no section directives), e.g. an instance file.
pub fn parse_program_text(text: &str) -> PResult<Program> {
    parse_program_text_named(text, "<input>")
}

pub fn parse_program_text_named(text: &str, file: &str) -> PResult<Program> {
    let toks = Lexer::new(text, file).tokens()?;
    let mut parser = Parser { toks, pos: 0, file: file.to_string() };
    let rules = parse_rules(&mut parser, false)?;
    Ok(Program::new(rules))
}

/// Parses a `.qasp` quantified program.
pub fn parse_aspq(text: &str) -> PResult<QuantifiedProgram> {
    parse_aspq_named(text, "<input>")
}

pub fn parse_aspq_named(text: &str, file: &str) -> PResult<QuantifiedProgram> {
    let toks = Lexer::new(text, file).tokens()?;
    let mut parser = Parser { toks, pos: 0, file: file.to_string() };

    let mut blocks: Vec<(Quantifier, Program)> = Vec::new();
    let mut constraint: Option<Program> = None;
    if parser.at_end() {
        return Err(ParseError::new(parser.span(), "empty prefix: no quantifier sections"));
    }
    while !parser.at_end() {
        let span = parser.span();
        let tok = parser.next()?;
        let name = match tok {
            Tok::Directive(d) => d,
            t => {
                return Err(ParseError::new(
                    span,
                    format!("expected a `%@` section directive, found {t}"),
                ))
            }
        };
        if constraint.is_some() {
            return Err(ParseError::new(span, "the %@constraint section must come last"));
        }
        match name.as_str() {
            "exists" | "forall" => {
                let q = if name == "exists" { Quantifier::Exists } else { Quantifier::Forall };
                let rules = parse_rules(&mut parser, true)?;
                blocks.push((q, Program::new(rules)));
            }
            "constraint" => {
                let span = parser.span();
                let rules = parse_rules(&mut parser, true)?;
                let program = Program::new(rules);
                for r in &program.rules {
                    if !r.is_normal() {
                        return Err(ParseError::new(
                            span.clone(),
                            format!("constraint section rule is not normal: {r}"),
                        ));
                    }
                }
                if check_stratified(&program)
                    .map_err(|e| ParseError::new(span.clone(), e.to_string()))?
                    == false
                {
                    return Err(ParseError::new(span, "constraint section not stratified"));
                }
                constraint = Some(program);
            }
            other => {
                return Err(ParseError::new(span, format!("unknown section directive `%@{other}`")));
            }
        }
    }
    let constraint = constraint.ok_or_else(|| {
        ParseError::new(
            SourceSpan { file: file.to_string(), line: 1, column: 1 },
            "missing %@constraint section",
        )
    })?;
    if blocks.is_empty() {
        return Err(ParseError::new(
            SourceSpan { file: file.to_string(), line: 1, column: 1 },
            "empty prefix: a quantified program needs at least one quantifier block",
        ));
    }
    Ok(QuantifiedProgram { blocks, constraint })
}

/// Parses QDIMACS. Matrix variables not bound by the prefix are appended as
/// an innermost existential block.
pub fn parse_qdimacs(text: &str) -> PResult<Qbf> {
    parse_dimacs_like(text, "cnf")
}

/// Parses the DNF twin format `p dnf <vars> <cubes>`.
pub fn parse_pdnf(text: &str) -> PResult<Qbf> {
    parse_dimacs_like(text, "dnf")
}

/// Dispatches on the problem line, accepting either matrix kind.
pub fn parse_qbf_file(text: &str) -> PResult<Qbf> {
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with("p ") {
            if line.split_whitespace().nth(1) == Some("dnf") {
                return parse_pdnf(text);
            }
            break;
        }
    }
    parse_qdimacs(text)
}

fn parse_dimacs_like(text: &str, kind: &str) -> PResult<Qbf> {
    let span_at = |line: usize| SourceSpan { file: "<qdimacs>".to_string(), line, column: 1 };
    let mut num_vars: Option<i64> = None;
    let mut num_clauses: Option<usize> = None;
    let mut prefix: Vec<(Quantifier, Vec<u32>)> = Vec::new();
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut seen_clause = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if num_vars.is_some() {
                return Err(ParseError::new(span_at(lineno), "duplicate problem line"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != kind {
                return Err(ParseError::new(
                    span_at(lineno),
                    format!("malformed problem line, expected `p {kind} <vars> <clauses>`"),
                ));
            }
            num_vars = Some(parts[2].parse::<i64>().map_err(|_| {
                ParseError::new(span_at(lineno), "malformed problem line: bad variable count")
            })?);
            num_clauses = Some(parts[3].parse::<usize>().map_err(|_| {
                ParseError::new(span_at(lineno), "malformed problem line: bad clause count")
            })?);
            continue;
        }
        let nv = num_vars
            .ok_or_else(|| ParseError::new(span_at(lineno), "problem line must come first"))?;
        if line.starts_with('a') || line.starts_with('e') {
            if seen_clause {
                return Err(ParseError::new(
                    span_at(lineno),
                    "quantifier line after the first clause",
                ));
            }
            let q = if line.starts_with('a') { Quantifier::Forall } else { Quantifier::Exists };
            let mut vars = Vec::new();
            let mut terminated = false;
            for part in line[1..].split_whitespace() {
                let v: i64 = part.parse().map_err(|_| {
                    ParseError::new(span_at(lineno), "malformed quantifier line")
                })?;
                if v == 0 {
                    terminated = true;
                    break;
                }
                if v < 0 || v > nv {
                    return Err(ParseError::new(
                        span_at(lineno),
                        format!("variable {v} out of declared range 1..{nv}"),
                    ));
                }
                vars.push(v as u32);
            }
            if !terminated {
                return Err(ParseError::new(span_at(lineno), "missing terminating 0"));
            }
            if vars.is_empty() {
                return Err(ParseError::new(span_at(lineno), "empty quantifier block"));
            }
            prefix.push((q, vars));
            continue;
        }
        // Clause (or cube) line.
        seen_clause = true;
        let mut lits = Vec::new();
        let mut terminated = false;
        for part in line.split_whitespace() {
            let v: i64 = part
                .parse()
                .map_err(|_| ParseError::new(span_at(lineno), "malformed clause line"))?;
            if v == 0 {
                terminated = true;
                break;
            }
            if v.abs() > nv {
                return Err(ParseError::new(
                    span_at(lineno),
                    format!("literal {v} out of declared range 1..{nv}"),
                ));
            }
            lits.push(v);
        }
        if !terminated {
            return Err(ParseError::new(span_at(lineno), "missing terminating 0"));
        }
        clauses.push(lits);
    }

    let nv = num_vars.ok_or_else(|| ParseError::new(span_at(1), "missing problem line"))?;
    if let Some(nc) = num_clauses {
        if clauses.len() != nc {
            return Err(ParseError::new(
                span_at(1),
                format!("declared {nc} clauses, found {}", clauses.len()),
            ));
        }
    }
    // Bind-once check and implicit existential closure of free variables.
    let mut bound = vec![false; nv as usize + 1];
    for (_, vars) in &prefix {
        for &v in vars {
            if bound[v as usize] {
                return Err(ParseError::new(
                    span_at(1),
                    format!("variable {v} bound more than once in the prefix"),
                ));
            }
            bound[v as usize] = true;
        }
    }
    let mut free = Vec::new();
    for clause in &clauses {
        for &l in clause {
            let v = l.unsigned_abs() as u32;
            if !bound[v as usize] && !free.contains(&v) {
                free.push(v);
            }
        }
    }
    if !free.is_empty() {
        free.sort_unstable();
        prefix.push((Quantifier::Exists, free));
    }
    if prefix.is_empty() {
        // No quantifiers and no variables used; a single empty-scope
        // existential block keeps the prefix nonempty.
        prefix.push((Quantifier::Exists, Vec::new()));
    }
    let matrix = if kind == "cnf" { Matrix::Cnf(clauses) } else { Matrix::Dnf(clauses) };
    Ok(Qbf { prefix, matrix })
}
