//! Expression language for metric components in a coordinate chart.
//!
//! ```text
//! expr    := expr ('+' | '-') expr | expr ('*' | '/') expr
//!          | '-' expr | expr '^' expr | primary
//! primary := number | x<i> | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | sinh | cosh | sqrt
//! ```
//!
//! Precedence from tightest: `^`, unary `-`, `* /`, `+ -`. Binary `+ - * /`
//! associate to the left, `^` to the right, so `-x1^2` is `-(x1^2)` and
//! `x1^x2^2` is `x1^(x2^2)`. Coordinates are numbered from 1.

use std::fmt;
use std::iter::Peekable;
use std::str::CharIndices;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message} (at '{token}')")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }

    fn right_assoc(self) -> bool {
        self == BinOp::Pow
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Coordinate `x<i>`, 1-based.
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x.get(i - 1).copied().unwrap_or(f64::NAN),
            Expr::Neg(e) => -e.eval(x),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(x)),
        }
    }

    /// Highest coordinate index referenced, 0 for constants.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => *i,
            Expr::Neg(e) | Expr::Call(_, e) => e.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => ATOM_PRECEDENCE,
            Expr::Neg(_) => NEG_PRECEDENCE,
            Expr::Binary(op, ..) => op.precedence(),
        }
    }
}

struct Wrapped<'a>(&'a Expr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints with the minimal parentheses that parse back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(e) => write!(f, "-{}", Wrapped(e, e.precedence() < NEG_PRECEDENCE)),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, a, b) => {
                let prec = op.precedence();
                let (left_parens, right_parens) = if op.right_assoc() {
                    (a.precedence() <= prec, b.precedence() < NEG_PRECEDENCE)
                } else {
                    (a.precedence() < prec, b.precedence() <= prec)
                };
                write!(
                    f,
                    "{}{}{}",
                    Wrapped(a, left_parens),
                    op.symbol(),
                    Wrapped(b, right_parens)
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(BinOp),
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
    text: String,
}

struct Lexer<'a> {
    src: &'a str,
    chars: Peekable<CharIndices<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Self {
            src,
            chars: src.char_indices().peekable(),
            line,
        }
    }

    fn column(&self, byte: usize) -> usize {
        self.src[..byte].chars().count() + 1
    }

    fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        while let Some(&(start, c)) = self.chars.peek() {
            if c.is_whitespace() {
                self.chars.next();
                continue;
            }
            let column = self.column(start);
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => {
                    self.chars.next();
                    Tok::Op(match c {
                        '+' => BinOp::Add,
                        '-' => BinOp::Sub,
                        '*' => BinOp::Mul,
                        '/' => BinOp::Div,
                        _ => BinOp::Pow,
                    })
                }
                '(' => {
                    self.chars.next();
                    Tok::LParen
                }
                ')' => {
                    self.chars.next();
                    Tok::RParen
                }
                ',' => {
                    self.chars.next();
                    Tok::Comma
                }
                c if c.is_ascii_digit() || c == '.' => self.number(start)?,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let end = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                    Tok::Ident(self.src[start..end].to_string())
                }
                other => {
                    return Err(ParseError {
                        line: self.line,
                        column,
                        token: other.to_string(),
                        message: "unexpected character".into(),
                    })
                }
            };
            let end = self.chars.peek().map_or(self.src.len(), |&(i, _)| i);
            out.push(Token {
                tok,
                column,
                text: self.src[start..end].to_string(),
            });
        }
        out.push(Token {
            tok: Tok::Eof,
            column: self.src.chars().count() + 1,
            text: "end of input".into(),
        });
        Ok(out)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> usize {
        while let Some(&(_, c)) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            self.chars.next();
        }
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let mut end = self.take_while(|c| c.is_ascii_digit());
        if self.src[end..].starts_with('.') {
            self.chars.next();
            end = self.take_while(|c| c.is_ascii_digit());
        }
        // Exponent only when digits follow, so `2exp` lexes as `2` `exp`.
        let rest = &self.src[end..];
        let exp_len = exponent_len(rest);
        for _ in 0..exp_len {
            self.chars.next();
        }
        end += exp_len;
        let text = &self.src[start..end];
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError {
            line: self.line,
            column: self.column(start),
            token: text.to_string(),
            message: "malformed number".into(),
        })
    }
}

fn exponent_len(rest: &str) -> usize {
    let bytes = rest.as_bytes();
    if bytes.first().is_none_or(|b| *b != b'e' && *b != b'E') {
        return 0;
    }
    let mut i = 1;
    if matches!(bytes.get(1), Some(b'+') | Some(b'-')) {
        i = 2;
    }
    let digits = bytes[i..].iter().take_while(|b| b.is_ascii_digit()).count();
    if digits == 0 {
        0
    } else {
        i + digits
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, token: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: token.column,
            token: token.text.clone(),
            message: message.into(),
        }
    }

    fn parse(mut self) -> Result<Expr, ParseError> {
        let expr = self.climb(0)?;
        let next = self.peek().clone();
        match next.tok {
            Tok::Eof => Ok(expr),
            Tok::RParen => Err(self.error(&next, "unmatched closing parenthesis")),
            _ => Err(self.error(&next, "unexpected token")),
        }
    }

    fn climb(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(op) = self.peek().tok {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let next_min = if op.right_assoc() { prec } else { prec + 1 };
            let rhs = self.climb(next_min)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Op(BinOp::Sub) {
            self.bump();
            let operand = self.climb(NEG_PRECEDENCE)?;
            return Ok(Expr::Neg(Box::new(operand)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let token = self.bump();
        match &token.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::LParen => {
                let inner = self.climb(0)?;
                self.expect_close()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(index) = coordinate_index(name) {
                    return Ok(Expr::Var(index));
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(self.error(&token, "unknown identifier"));
                };
                let open = self.bump();
                if open.tok != Tok::LParen {
                    return Err(self.error(&open, format!("expected '(' after {name}")));
                }
                let arg = self.climb(0)?;
                if self.peek().tok == Tok::Comma {
                    let mut count = 1;
                    while self.peek().tok == Tok::Comma {
                        self.bump();
                        self.climb(0)?;
                        count += 1;
                    }
                    return Err(self.error(
                        &token,
                        format!("wrong arity: {name} takes 1 argument, got {count}"),
                    ));
                }
                self.expect_close()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::Eof => Err(self.error(&token, "unexpected end of input")),
            _ => Err(self.error(&token, "unexpected token")),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        let token = self.bump();
        match token.tok {
            Tok::RParen => Ok(()),
            Tok::Eof => Err(self.error(&token, "unclosed parenthesis")),
            _ => Err(self.error(&token, "expected ')'")),
        }
    }
}

fn coordinate_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

/// Parses a single expression; `line` is only used for error positions.
pub fn parse_expr(src: &str, line: usize) -> Result<Expr, ParseError> {
    let tokens = Lexer::new(src, line).tokenize()?;
    Parser {
        tokens,
        pos: 0,
        line,
    }
    .parse()
}

/// A metric component: its source text and the parsed tree.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricExpression {
    pub source: String,
    pub ast: Expr,
}

impl MetricExpression {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        Self::parse_at(source, 1)
    }

    pub fn parse_at(source: &str, line: usize) -> Result<Self, ParseError> {
        Ok(Self {
            source: source.to_string(),
            ast: parse_expr(source, line)?,
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.ast.eval(x)
    }
}

/// Parses a list of component sources; errors report the list position as
/// the line number.
pub fn parse_metric<S: AsRef<str>>(sources: &[S]) -> Result<Vec<MetricExpression>, ParseError> {
    sources
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let s = s.as_ref();
            if s.trim().is_empty() {
                return Err(ParseError {
                    line: i + 1,
                    column: 1,
                    token: String::new(),
                    message: "empty expression".into(),
                });
            }
            MetricExpression::parse_at(s, i + 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(src: &str) -> Expr {
        parse_expr(src, 1).unwrap()
    }

    fn num(v: f64) -> Box<Expr> {
        Box::new(Expr::Num(v))
    }

    fn var(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(i))
    }

    #[test]
    fn stereographic_factor() {
        let e = p("4/(1+x1^2+x2^2)^2");
        let denom = Expr::Binary(
            BinOp::Add,
            Box::new(Expr::Binary(
                BinOp::Add,
                num(1.0),
                Box::new(Expr::Binary(BinOp::Pow, var(1), num(2.0))),
            )),
            Box::new(Expr::Binary(BinOp::Pow, var(2), num(2.0))),
        );
        let expected = Expr::Binary(
            BinOp::Div,
            num(4.0),
            Box::new(Expr::Binary(BinOp::Pow, Box::new(denom), num(2.0))),
        );
        assert_eq!(e, expected);
        assert!((e.eval(&[1.0, 1.0]) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn power_is_right_associative() {
        let e = p("x1 ^ x2 ^ 2");
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Pow,
                var(1),
                Box::new(Expr::Binary(BinOp::Pow, var(2), num(2.0)))
            )
        );
        assert_eq!(e.eval(&[2.0, 3.0]), 512.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(p("-x1^2").eval(&[3.0]), -9.0);
        assert_eq!(p("2^-1"), Expr::Binary(BinOp::Pow, num(2.0), Box::new(Expr::Neg(num(1.0)))));
        assert_eq!(p("1-2-3").eval(&[]), -4.0);
        assert_eq!(p("8/4/2").eval(&[]), 1.0);
        assert_eq!(p("2*-x1").eval(&[3.0]), -6.0);
        assert_eq!(p("1.5e-3*1e3").eval(&[]), 1.5);
    }

    #[test]
    fn functions() {
        let x = [0.3];
        assert_eq!(p("sin(x1)").eval(&x), 0.3f64.sin());
        assert_eq!(p("cosh(2*x1)").eval(&x), 0.6f64.cosh());
        assert_eq!(p("sqrt(exp(x1))").eval(&x), 0.3f64.exp().sqrt());
    }

    #[test]
    fn unclosed_parenthesis() {
        let err = parse_expr("sin(x1", 1).unwrap_err();
        assert_eq!(err.column, 7);
        assert_eq!(err.message, "unclosed parenthesis");
    }

    #[test]
    fn error_cases() {
        let err = parse_expr("x1 + y", 3).unwrap_err();
        assert_eq!((err.line, err.column, err.token.as_str()), (3, 6, "y"));
        assert_eq!(err.message, "unknown identifier");

        let err = parse_expr("sin(x1, x2)", 1).unwrap_err();
        assert!(err.message.starts_with("wrong arity"), "{err}");

        assert!(parse_expr("x0", 1).is_err());
        assert!(parse_expr("1 +", 1).is_err());
        assert!(parse_expr("(1))", 1).is_err());
        assert!(parse_expr("2 x1", 1).is_err());
        assert!(parse_expr("sin x1", 1).is_err());
        assert!(parse_expr("1 $ 2", 1).is_err());

        let errs = parse_metric(&["1", "x1 +"]).unwrap_err();
        assert_eq!(errs.line, 2);
        assert!(parse_metric(&[" "]).is_err());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|v| Expr::Num(v as f64 / 8.0)),
            (1usize..5).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let ops = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            let funcs = prop_oneof![
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Exp),
                Just(Func::Sinh),
                Just(Func::Cosh),
                Just(Func::Sqrt),
            ];
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (funcs, inner.clone()).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
                (ops, inner.clone(), inner)
                    .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            prop_assert_eq!(parse_expr(&printed, 1).unwrap(), e, "{}", printed);
        }
    }
}
