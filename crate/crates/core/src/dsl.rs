//! A small expression language for `F: (ℝᵏ)ⁿ → ℝᵏ`, `g: ℝᵏ → ℝᵏ` and scalar
//! comparison functions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := number | var | call | '-' factor | '(' expr ')'
//! var    := 'x' digits ('[' digits ']')?
//! call   := ('min' | 'max' | 'abs') '(' expr (',' expr)* ')'
//! ```
//!
//! `xᵢ` is the `i`-th argument (1-based) and `xᵢ[j]` its `j`-th component.
//! A mapping with `k > 1` is written as a bracketed component list
//! `[e₁, …, e_k]`; inside component `j` a bare `xᵢ` means `xᵢ[j]`.
//! `abs` takes one argument, `min` and `max` exactly two. Further functions
//! (`exp`, `sqrt`, …) would slot in as extra [`Func`] variants.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::map::{EvalError, Mapping, SelfMap};

/// A source offset. Spans never take part in equality, so two trees parsed
/// from differently spaced text compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span(pub usize);

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Abs => 1,
            Func::Min | Func::Max => 2,
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        match name {
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// A nonnegative finite literal; negative values are `Neg(Num)`.
    Num(f64),
    /// 1-based argument and optional 1-based component.
    Var {
        arg: usize,
        component: Option<usize>,
    },
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        /// Start of the right operand.
        span: Span,
    },
    Call {
        func: Func,
        args: Vec<Expr>,
    },
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }

    /// Evaluates with `args[i][j]` bound to `x{i+1}[j+1]`; a bare variable
    /// reads `component`.
    fn eval_at(&self, args: &[Vec<f64>], component: usize) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var { arg, component: c } => {
                let j = c.map_or(component, |c| c - 1);
                args[arg - 1][j]
            }
            Expr::Neg(e) => -e.eval_at(args, component)?,
            Expr::Binary { op, lhs, rhs, span } => {
                let a = lhs.eval_at(args, component)?;
                let b = rhs.eval_at(args, component)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(EvalError::DivisionByZero { offset: span.0 }),
                    BinOp::Div => a / b,
                }
            }
            Expr::Call { func, args: call_args } => {
                let a = call_args[0].eval_at(args, component)?;
                match func {
                    Func::Abs => a.abs(),
                    Func::Min => a.min(call_args[1].eval_at(args, component)?),
                    Func::Max => a.max(call_args[1].eval_at(args, component)?),
                }
            }
        })
    }

    /// Evaluates a scalar expression with `x{i+1}` bound to `vars[i]`.
    pub fn eval_scalar(&self, vars: &[f64]) -> Result<f64, EvalError> {
        let args: Vec<Vec<f64>> = vars.iter().map(|&v| alloc::vec![v]).collect();
        self.check_vars(vars.len(), 1)?;
        self.eval_at(&args, 0)
    }

    fn check_vars(&self, n: usize, k: usize) -> Result<(), EvalError> {
        match self {
            Expr::Num(_) => Ok(()),
            Expr::Var { arg, component } => {
                if *arg > n {
                    Err(EvalError::Arity {
                        expected: *arg,
                        found: n,
                    })
                } else if component.is_some_and(|c| c > k) {
                    Err(EvalError::Dimension {
                        argument: *arg,
                        expected: component.unwrap(),
                        found: k,
                    })
                } else {
                    Ok(())
                }
            }
            Expr::Neg(e) => e.check_vars(n, k),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.check_vars(n, k)?;
                rhs.check_vars(n, k)
            }
            Expr::Call { args, .. } => args.iter().try_for_each(|a| a.check_vars(n, k)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var { arg, component: None } => write!(f, "x{arg}"),
            Expr::Var {
                arg,
                component: Some(c),
            } => write!(f, "x{arg}[{c}]"),
            Expr::Neg(e) => {
                if e.precedence() < 3 {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-{e}")
                }
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let p = op.precedence();
                if lhs.precedence() < p {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if rhs.precedence() <= p {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed mapping `(ℝᵏ)ⁿ → ℝᵏ`: one expression per output component.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingAst {
    arity: usize,
    dim: usize,
    components: Vec<Expr>,
}

impl MappingAst {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Builds a mapping from already-parsed component expressions.
    pub fn from_components(arity: usize, dim: usize, components: Vec<Expr>) -> Result<Self, EvalError> {
        if components.len() != dim {
            return Err(EvalError::Dimension {
                argument: 0,
                expected: dim,
                found: components.len(),
            });
        }
        for c in &components {
            c.check_vars(arity, dim)?;
        }
        Ok(MappingAst { arity, dim, components })
    }

    pub fn eval_point(&self, args: &[Vec<f64>]) -> Result<Vec<f64>, EvalError> {
        if args.len() != self.arity {
            return Err(EvalError::Arity {
                expected: self.arity,
                found: args.len(),
            });
        }
        if let Some((i, a)) = args.iter().enumerate().find(|(_, a)| a.len() != self.dim) {
            return Err(EvalError::Dimension {
                argument: i + 1,
                expected: self.dim,
                found: a.len(),
            });
        }
        self.components
            .iter()
            .enumerate()
            .map(|(j, e)| e.eval_at(args, j))
            .collect()
    }
}

impl fmt::Display for MappingAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 1 {
            return write!(f, "{}", self.components[0]);
        }
        f.write_str("[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

/// Canonical text for a mapping; it parses back to an equal tree.
pub fn format_mapping(ast: &MappingAst) -> String {
    ast.to_string()
}

impl Mapping<Vec<f64>> for MappingAst {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, args: &[Vec<f64>]) -> Result<Vec<f64>, EvalError> {
        self.eval_point(args)
    }
}

impl SelfMap<Vec<f64>> for MappingAst {
    fn eval(&self, x: &Vec<f64>) -> Result<Vec<f64>, EvalError> {
        self.eval_point(core::slice::from_ref(x))
    }

    fn is_identity(&self) -> bool {
        self.arity == 1
            && self.components.iter().enumerate().all(|(j, c)| match c {
                Expr::Var { arg: 1, component } => component.is_none_or(|c| c == j + 1),
                _ => false,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownVariable,
    Arity,
    IndexRange,
}

impl ParseErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::UnknownVariable => "unknown_variable",
            ParseErrorKind::Arity => "arity",
            ParseErrorKind::IndexRange => "index_range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} error at line {line}, column {column}: {message}", kind.as_str())]
pub struct ParseError {
    /// Byte offset into the source.
    pub offset: usize,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
    k: usize,
}

fn error_at(src: &str, offset: usize, kind: ParseErrorKind, message: String) -> ParseError {
    // EOF errors point at the last character so the offset stays inside
    let offset = if offset >= src.len() && !src.is_empty() {
        src.char_indices().last().map_or(0, |(i, _)| i)
    } else {
        offset
    };
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
    ParseError {
        offset,
        line,
        column,
        kind,
        message,
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, start));
            i += 1;
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let frac = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == frac {
                    return Err(error_at(
                        src,
                        i,
                        ParseErrorKind::Syntax,
                        "expected digits after `.`".into(),
                    ));
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                i += 1;
                if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                    i += 1;
                }
                let exp = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == exp {
                    return Err(error_at(
                        src,
                        i,
                        ParseErrorKind::Syntax,
                        "expected exponent digits".into(),
                    ));
                }
            }
            let text = &src[start..i];
            let value: f64 = text
                .parse()
                .map_err(|_| error_at(src, start, ParseErrorKind::Syntax, format!("bad number `{text}`")))?;
            if !value.is_finite() {
                return Err(error_at(
                    src,
                    start,
                    ParseErrorKind::Syntax,
                    format!("number `{text}` overflows"),
                ));
            }
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].into()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(error_at(
                src,
                start,
                ParseErrorKind::Syntax,
                format!("unexpected character `{ch}`"),
            ));
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, offset: usize, kind: ParseErrorKind, message: String) -> ParseError {
        error_at(self.src, offset, kind, message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.err(
            self.offset(),
            ParseErrorKind::Syntax,
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<usize, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let span = Span(self.offset());
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let span = Span(self.offset());
            let rhs = self.factor()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::lookup(&name) {
                    self.call(func, start)
                } else if let Some(digits) = name
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                {
                    self.var(digits, start)
                } else {
                    Err(self.err(start, ParseErrorKind::Syntax, format!("unknown identifier `{name}`")))
                }
            }
            _ => Err(self.unexpected("a number, variable, call or `(`")),
        }
    }

    fn var(&mut self, digits: &str, start: usize) -> Result<Expr, ParseError> {
        let arg: usize = digits.parse().unwrap_or(usize::MAX);
        if arg == 0 || arg > self.n {
            return Err(self.err(
                start,
                ParseErrorKind::UnknownVariable,
                format!("variable `x{digits}` is not one of x1..x{}", self.n),
            ));
        }
        let component = if *self.peek() == Tok::LBracket {
            self.bump();
            let at = self.offset();
            let is_num = matches!(self.bump().0, Tok::Num(_));
            let raw = self.src[at..self.offset()].trim_end();
            let j = match raw.parse::<usize>() {
                Ok(j) if is_num => j,
                _ => return Err(self.err(at, ParseErrorKind::Syntax, "component index must be an integer".into())),
            };
            if j == 0 || j > self.k {
                return Err(self.err(
                    at,
                    ParseErrorKind::IndexRange,
                    format!("component {j} is outside 1..={}", self.k),
                ));
            }
            self.expect(Tok::RBracket, "`]`")?;
            Some(j)
        } else {
            None
        };
        Ok(Expr::Var { arg, component })
    }

    fn call(&mut self, func: Func, start: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(` after function name")?;
        let mut args = alloc::vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        if args.len() != func.arity() {
            return Err(self.err(
                start,
                ParseErrorKind::Arity,
                format!(
                    "`{}` takes {} argument(s), got {}",
                    func.name(),
                    func.arity(),
                    args.len()
                ),
            ));
        }
        Ok(Expr::Call { func, args })
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.unexpected("an operator or end of input"))
        }
    }
}

/// Parses a single scalar-valued expression over `x1..x{n}` with points of
/// dimension `k`.
pub fn parse_expr(text: &str, n: usize, k: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text,
        toks: lex(text)?,
        pos: 0,
        n,
        k,
    };
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a mapping `(ℝᵏ)ⁿ → ℝᵏ`. For `k = 1` the text is one expression;
/// otherwise a bracketed list of `k` expressions.
pub fn parse_mapping(text: &str, n: usize, k: usize) -> Result<MappingAst, ParseError> {
    if text.trim().is_empty() {
        return Err(error_at(text, 0, ParseErrorKind::Syntax, "empty expression".into()));
    }
    let mut p = Parser {
        src: text,
        toks: lex(text)?,
        pos: 0,
        n,
        k,
    };
    let components = if *p.peek() == Tok::LBracket {
        let open = p.bump().1;
        let mut comps = alloc::vec![p.expr()?];
        while *p.peek() == Tok::Comma {
            p.bump();
            comps.push(p.expr()?);
        }
        p.expect(Tok::RBracket, "`]` or `,`")?;
        if comps.len() != k {
            return Err(p.err(
                open,
                ParseErrorKind::Arity,
                format!("mapping has {} components, expected {k}", comps.len()),
            ));
        }
        comps
    } else if k == 1 {
        alloc::vec![p.expr()?]
    } else {
        return Err(p.unexpected("`[` opening a component list"));
    };
    p.finish()?;
    Ok(MappingAst {
        arity: n,
        dim: k,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn eval1(text: &str, n: usize, args: &[f64]) -> Result<f64, EvalError> {
        let ast = parse_mapping(text, n, 1).unwrap();
        let args: Vec<Vec<f64>> = args.iter().map(|&a| vec![a]).collect();
        ast.eval_point(&args).map(|v| v[0])
    }

    #[test]
    fn parse_and_eval_examples() {
        assert_eq!(eval1("(x1 + x2)/6 + 1", 2, &[3.0, 9.0]).unwrap(), 3.0);
        assert_eq!(eval1("x1 + x2 * 2", 2, &[1.0, 2.0]).unwrap(), 5.0);
        assert_eq!(eval1("min(x1, x2)", 2, &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(eval1("abs(x1 - x2)", 2, &[2.0, 5.0]).unwrap(), 3.0);
        assert_eq!(eval1("max(x1, -x2)", 2, &[-4.0, 3.0]).unwrap(), -3.0);
        assert_eq!(eval1("--x1", 1, &[2.0]).unwrap(), 2.0);
        assert_eq!(eval1("1.5e1 + 2E-1", 1, &[0.0]).unwrap(), 15.2);
        assert_eq!(eval1("x1[1] * 2", 1, &[4.0]).unwrap(), 8.0);
    }

    #[test]
    fn division_by_zero_reports_divisor() {
        let text = "x1/ (x2 - x2)";
        let err = eval1(text, 2, &[1.0, 3.0]).unwrap_err();
        assert_eq!(err, EvalError::DivisionByZero { offset: 4 });
        assert_eq!(&text[4..5], "(");
    }

    #[test]
    fn unknown_variable() {
        let err = parse_mapping("x3", 2, 1).unwrap_err();
        assert_eq!(
            (err.kind, err.offset, err.line, err.column),
            (ParseErrorKind::UnknownVariable, 0, 1, 1)
        );
        let err = parse_mapping("x1 + x0", 2, 1).unwrap_err();
        assert_eq!((err.kind, err.offset), (ParseErrorKind::UnknownVariable, 5));
    }

    #[test]
    fn arity_errors() {
        let err = parse_mapping("1 + abs(x1, x2)", 2, 1).unwrap_err();
        assert_eq!((err.kind, err.offset), (ParseErrorKind::Arity, 4));
        let err = parse_mapping("min(x1)", 2, 1).unwrap_err();
        assert_eq!((err.kind, err.offset), (ParseErrorKind::Arity, 0));
        let err = parse_mapping("max(x1, x2, x1)", 2, 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Arity);
        let err = parse_mapping("[x1, x2, x1]", 2, 2).unwrap_err();
        assert_eq!((err.kind, err.offset), (ParseErrorKind::Arity, 0));
    }

    #[test]
    fn index_range_errors() {
        let err = parse_mapping("x1[3]", 2, 2).unwrap_err();
        assert!(err.kind == ParseErrorKind::Syntax || err.kind == ParseErrorKind::IndexRange);
        let err = parse_mapping("[x1[3], x1]", 2, 2).unwrap_err();
        assert_eq!((err.kind, err.offset), (ParseErrorKind::IndexRange, 4));
        let err = parse_mapping("x2[0]", 2, 1).unwrap_err();
        assert_eq!((err.kind, err.offset), (ParseErrorKind::IndexRange, 3));
        let err = parse_mapping("x1[1.5]", 1, 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn syntax_errors_with_positions() {
        let cases: &[(&str, usize)] = &[
            ("x1 +", 3),
            ("(x1", 2),
            ("x1 x2", 3),
            ("sin(x1)", 0),
            ("x1 # 2", 3),
            ("2.", 1),
            ("1e", 1),
            ("y", 0),
            ("x1 +\n  * 2", 7),
            (")", 0),
        ];
        for &(text, offset) in cases {
            let err = parse_mapping(text, 2, 1).unwrap_err();
            assert_eq!(err.kind, ParseErrorKind::Syntax, "{text}: {err}");
            assert_eq!(err.offset, offset, "{text}: {err}");
            assert!(err.offset < text.len());
        }
        let err = parse_mapping("x1 +\n  * 2", 2, 1).unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        let err = parse_mapping("   ", 1, 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn vector_mappings() {
        let ast = parse_mapping("[x1[1] + x2[2], max(x1, x2)]", 2, 2).unwrap();
        let out = ast.eval_point(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(out, vec![5.0, 4.0]);
        assert!(parse_mapping("x1 + x2", 2, 2).is_err());
        assert!(ast.eval_point(&[vec![1.0], vec![3.0, 4.0]]).is_err());
        assert!(ast.eval_point(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn identity_detection() {
        assert!(SelfMap::is_identity(&parse_mapping("x1", 1, 1).unwrap()));
        assert!(SelfMap::is_identity(&parse_mapping("[x1, x1[2]]", 1, 2).unwrap()));
        assert!(!SelfMap::is_identity(&parse_mapping("[x1[2], x1[1]]", 1, 2).unwrap()));
        assert!(!SelfMap::is_identity(&parse_mapping("2 * x1", 1, 1).unwrap()));
    }

    #[test]
    fn format_round_trips() {
        for text in [
            "(x1+x2)/6+1",
            "1.5",
            "min(max(x1, x2), x1)",
            "x1 - (x2 - 3)",
            "-(x1 + 1) * -x2",
            "x1 / (x2 / 2)",
            "1e-7 * x1 + 123456789012345680000",
            "abs(--x1)",
        ] {
            let ast = parse_mapping(text, 2, 1).unwrap();
            let formatted = format_mapping(&ast);
            let again = parse_mapping(&formatted, 2, 1).unwrap();
            assert_eq!(ast, again, "{text} -> {formatted}");
            assert_eq!(format_mapping(&again), formatted);
        }
        assert_eq!(
            format_mapping(&parse_mapping("(x1+x2)/6+1", 2, 1).unwrap()),
            "(x1 + x2) / 6.0 + 1.0"
        );
        let lit = parse_mapping("1.5", 1, 1).unwrap();
        assert_eq!(lit.components()[0], Expr::Num(1.5));
        assert_eq!(format_mapping(&lit), "1.5");
    }

    #[test]
    fn associativity_and_precedence() {
        let pairs = [
            ("x1-x2-x3", "(x1-x2)-x3"),
            ("x1*x2+x3", "(x1*x2)+x3"),
            ("x1/x2/x3", "(x1/x2)/x3"),
            ("x1+x2*x3", "x1+(x2*x3)"),
        ];
        for (a, b) in pairs {
            assert_eq!(parse_mapping(a, 3, 1).unwrap(), parse_mapping(b, 3, 1).unwrap());
        }
        assert_ne!(
            parse_mapping("x1-x2-x3", 3, 1).unwrap(),
            parse_mapping("x1-(x2-x3)", 3, 1).unwrap()
        );
    }

    #[test]
    fn scalar_eval() {
        let e = parse_expr("x1 / 3", 1, 1).unwrap();
        assert_eq!(e.eval_scalar(&[3.0]).unwrap(), 1.0);
        assert!(e.eval_scalar(&[]).is_err());
    }

    fn arb_expr(n: usize) -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0..1e6f64).prop_map(Expr::Num),
            (1..=n).prop_map(|arg| Expr::Var { arg, component: None }),
            (1..=n).prop_map(|arg| Expr::Var {
                arg,
                component: Some(1)
            }),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Expr::Binary {
                        op,
                        lhs: Box::new(l),
                        rhs: Box::new(r),
                        span: Span(0)
                    }),
                inner.clone().prop_map(|e| Expr::Call {
                    func: Func::Abs,
                    args: vec![e]
                }),
                (prop_oneof![Just(Func::Min), Just(Func::Max)], inner.clone(), inner)
                    .prop_map(|(func, a, b)| Expr::Call { func, args: vec![a, b] }),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn format_parse_format_is_stable(e in arb_expr(3)) {
            let ast = MappingAst::from_components(3, 1, vec![e]).unwrap();
            let text = format_mapping(&ast);
            let parsed = parse_mapping(&text, 3, 1).unwrap();
            prop_assert_eq!(&parsed, &ast);
            prop_assert_eq!(format_mapping(&parsed), text);
        }

        #[test]
        fn error_offsets_are_in_bounds(text in "[x0-9+*/() ,\\-\\[\\]a-z.]{1,24}") {
            if let Err(e) = parse_mapping(&text, 2, 2) {
                prop_assert!(e.offset < text.len() || text.is_empty());
                prop_assert!(text.is_char_boundary(e.offset));
            }
        }

        #[test]
        fn precedence_on_random_values(a in -1e3..1e3f64, b in -1e3..1e3f64, c in -1e3..1e3f64) {
            let args = [vec![a], vec![b], vec![c]];
            let ev = |t: &str| parse_mapping(t, 3, 1).unwrap().eval_point(&args).unwrap()[0];
            prop_assert_eq!(ev("x1-x2-x3").to_bits(), (a - b - c).to_bits());
            prop_assert_eq!(ev("x1*x2+x3").to_bits(), (a * b + c).to_bits());
            prop_assert_eq!(ev("x1-x2-x3").to_bits(), ev("(x1-x2)-x3").to_bits());
            prop_assert_eq!(ev("x1*x2+x3").to_bits(), ev("(x1*x2)+x3").to_bits());
        }
    }
}
