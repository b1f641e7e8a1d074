//! Text format for metric definitions.
//!
//! ```text
//! funk(2)
//! euclidean(3)
//! riemannian(2) { 1 + x[1]^2, 0; 0, 1 }
//! randers(2) { 1, 0; 0, 1; 0.1*x[2], -0.1*x[1] }
//! custom(2) { y[1]^2 + y[2]^2 }          # the expression is F²
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment running to the end
//! of the line. Parse errors carry a 1-based `line:column`.

use std::fmt;

use thiserror::Error;

use crate::jet::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("coefficient entries may depend on x only, found y[{0}]")]
    VelocityInCoefficient(usize),
}

/// Scalar expression over the coordinates `x[1..n]` and `y[1..n]`.
///
/// Indices are stored 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X(usize),
    Y(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> crate::Result<S> {
        Ok(match self {
            Expr::Num(v) => x[0].lift(*v),
            Expr::X(i) => x[*i].clone(),
            Expr::Y(i) => y[*i].clone(),
            Expr::Neg(a) => a.eval(x, y)?.neg(),
            Expr::Add(a, b) => a.eval(x, y)?.add(&b.eval(x, y)?),
            Expr::Sub(a, b) => a.eval(x, y)?.sub(&b.eval(x, y)?),
            Expr::Mul(a, b) => a.eval(x, y)?.mul(&b.eval(x, y)?),
            Expr::Div(a, b) => a.eval(x, y)?.div(&b.eval(x, y)?)?,
            Expr::Pow(a, k) => a.eval(x, y)?.powi(*k)?,
            Expr::Sqrt(a) => a.eval(x, y)?.sqrt()?,
        })
    }

    fn first_velocity(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::X(_) => None,
            Expr::Y(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sqrt(a) => a.first_velocity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.first_velocity().or_else(|| b.first_velocity())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "(-{})", v.abs()),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X(i) => write!(f, "x[{}]", i + 1),
            Expr::Y(i) => write!(f, "y[{}]", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) if *k < 0 => write!(f, "({a})^({k})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Euclidean,
    Riemannian,
    Randers,
    Funk,
    Custom,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Riemannian => "riemannian",
            MetricKind::Randers => "randers",
            MetricKind::Funk => "funk",
            MetricKind::Custom => "custom",
        }
    }
}

/// A parsed metric definition.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Euclidean { dim: usize },
    Funk { dim: usize },
    /// `F² = a_ij(x) yⁱ yʲ`
    Riemannian { dim: usize, a: Vec<Vec<Expr>> },
    /// `F = sqrt(a_ij(x) yⁱ yʲ) + b_i(x) yⁱ`
    Randers {
        dim: usize,
        a: Vec<Vec<Expr>>,
        b: Vec<Expr>,
    },
    /// User expression for F².
    Custom { dim: usize, f2: Expr },
}

impl MetricSpec {
    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Euclidean { dim }
            | MetricSpec::Funk { dim }
            | MetricSpec::Riemannian { dim, .. }
            | MetricSpec::Randers { dim, .. }
            | MetricSpec::Custom { dim, .. } => *dim,
        }
    }

    pub fn kind(&self) -> MetricKind {
        match self {
            MetricSpec::Euclidean { .. } => MetricKind::Euclidean,
            MetricSpec::Funk { .. } => MetricKind::Funk,
            MetricSpec::Riemannian { .. } => MetricKind::Riemannian,
            MetricSpec::Randers { .. } => MetricKind::Randers,
            MetricSpec::Custom { .. } => MetricKind::Custom,
        }
    }
}

fn write_matrix(f: &mut fmt::Formatter<'_>, a: &[Vec<Expr>]) -> fmt::Result {
    for (r, row) in a.iter().enumerate() {
        if r > 0 {
            write!(f, "; ")?;
        }
        write_list(f, row)?;
    }
    Ok(())
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (c, e) in items.iter().enumerate() {
        if c > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::Euclidean { dim } => write!(f, "euclidean({dim})"),
            MetricSpec::Funk { dim } => write!(f, "funk({dim})"),
            MetricSpec::Riemannian { dim, a } => {
                write!(f, "riemannian({dim}) {{ ")?;
                write_matrix(f, a)?;
                write!(f, " }}")
            }
            MetricSpec::Randers { dim, a, b } => {
                write!(f, "randers({dim}) {{ ")?;
                write_matrix(f, a)?;
                write!(f, "; ")?;
                write_list(f, b)?;
                write!(f, " }}")
            }
            MetricSpec::Custom { dim, f2 } => write!(f, "custom({dim}) {{ {f2} }}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64, String),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(_, s) => write!(f, "number `{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Cursor {
    chars: Vec<char>,
    i: usize,
    line: usize,
    column: usize,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.i + offset).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.i];
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        c
    }

    fn take_while(&mut self, s: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(self.bump());
        }
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut cur = Cursor {
        chars: text.chars().collect(),
        i: 0,
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let (line, column) = (cur.line, cur.column);
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            cur.take_while(&mut s, |c| c.is_ascii_alphanumeric() || c == '_');
            Tok::Ident(s)
        } else if c.is_ascii_digit() || c == '.' {
            let mut s = String::new();
            cur.take_while(&mut s, |c| c.is_ascii_digit() || c == '.');
            if matches!(cur.peek(), Some('e' | 'E')) {
                let sign = usize::from(matches!(cur.peek_at(1), Some('+' | '-')));
                if cur.peek_at(1 + sign).is_some_and(|c| c.is_ascii_digit()) {
                    for _ in 0..=sign {
                        s.push(cur.bump());
                    }
                    cur.take_while(&mut s, |c| c.is_ascii_digit());
                }
            }
            let value: f64 = s.parse().map_err(|_| ParseError {
                line,
                column,
                kind: ParseErrorKind::Syntax {
                    expected: "a number".into(),
                    found: format!("`{s}`"),
                },
            })?;
            Tok::Number(value, s)
        } else if "()[]{},;+-*/^".contains(c) {
            cur.bump();
            Tok::Sym(c)
        } else {
            return Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::Syntax {
                    expected: "a token".into(),
                    found: format!("`{c}`"),
                },
            });
        };
        out.push(Spanned { tok, line, column });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line: cur.line,
        column: cur.column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, at: &Spanned, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: at.line,
            column: at.column,
            kind,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let at = self.peek();
        self.error_at(
            at,
            ParseErrorKind::Syntax {
                expected: expected.into(),
                found: at.tok.to_string(),
            },
        )
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.is_sym(c) {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn expect_int(&mut self) -> Result<(usize, Spanned), ParseError> {
        let at = self.peek().clone();
        match &at.tok {
            Tok::Number(v, s) if !s.contains(['.', 'e', 'E']) && *v < u32::MAX as f64 => {
                self.next();
                Ok((*v as usize, at))
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn metric(&mut self) -> Result<MetricSpec, ParseError> {
        let head = self.next();
        let name = match &head.tok {
            Tok::Ident(s) => s.clone(),
            _ => {
                return Err(self.error_at(
                    &head,
                    ParseErrorKind::Syntax {
                        expected: "a metric kind".into(),
                        found: head.tok.to_string(),
                    },
                ))
            }
        };
        if !["euclidean", "funk", "riemannian", "randers", "custom"].contains(&name.as_str()) {
            return Err(self.error_at(&head, ParseErrorKind::UnknownIdentifier(name)));
        }
        self.expect_sym('(')?;
        let (dim, dim_tok) = self.expect_int()?;
        if dim < 2 {
            return Err(self.error_at(
                &dim_tok,
                ParseErrorKind::DimensionMismatch(format!("dimension must be at least 2, got {dim}")),
            ));
        }
        self.dim = dim;
        self.expect_sym(')')?;
        let spec = match name.as_str() {
            "euclidean" => MetricSpec::Euclidean { dim },
            "funk" => MetricSpec::Funk { dim },
            "custom" => {
                self.expect_sym('{')?;
                let f2 = self.expr()?;
                self.expect_sym('}')?;
                MetricSpec::Custom { dim, f2 }
            }
            _ => {
                let open = self.peek().clone();
                self.expect_sym('{')?;
                let mut lists = vec![self.coefficient_list()?];
                while self.is_sym(';') {
                    self.next();
                    lists.push(self.coefficient_list()?);
                }
                self.expect_sym('}')?;
                let rows_expected = if name == "randers" { dim + 1 } else { dim };
                if lists.len() != rows_expected {
                    return Err(self.error_at(
                        &open,
                        ParseErrorKind::DimensionMismatch(format!(
                            "expected {rows_expected} `;`-separated lists, found {}",
                            lists.len()
                        )),
                    ));
                }
                for (r, (list, at)) in lists.iter().enumerate() {
                    if list.len() != dim {
                        return Err(self.error_at(
                            at,
                            ParseErrorKind::DimensionMismatch(format!(
                                "list {} has {} entries, expected {dim}",
                                r + 1,
                                list.len()
                            )),
                        ));
                    }
                }
                let mut lists: Vec<Vec<Expr>> = lists.into_iter().map(|(l, _)| l).collect();
                if name == "randers" {
                    let b = lists.pop().expect("length checked");
                    MetricSpec::Randers { dim, a: lists, b }
                } else {
                    MetricSpec::Riemannian { dim, a: lists }
                }
            }
        };
        if self.peek().tok != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        Ok(spec)
    }

    fn coefficient_list(&mut self) -> Result<(Vec<Expr>, Spanned), ParseError> {
        let start = self.peek().clone();
        let mut items = Vec::new();
        loop {
            let at = self.peek().clone();
            let e = self.expr()?;
            if let Some(i) = e.first_velocity() {
                return Err(self.error_at(&at, ParseErrorKind::VelocityInCoefficient(i + 1)));
            }
            items.push(e);
            if self.is_sym(',') {
                self.next();
            } else {
                break;
            }
        }
        Ok((items, start))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.is_sym('+') {
                self.next();
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.is_sym('-') {
                self.next();
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.is_sym('*') {
                self.next();
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.is_sym('/') {
                self.next();
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym('-') {
            self.next();
            return Ok(match self.unary()? {
                Expr::Num(v) => Expr::Num(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.is_sym('^') {
            return Ok(base);
        }
        self.next();
        let parenthesized = self.is_sym('(');
        if parenthesized {
            self.next();
        }
        let negative = self.is_sym('-');
        if negative {
            self.next();
        }
        let (k, at) = self.expect_int()?;
        if k > i32::MAX as usize {
            return Err(self.error_at(
                &at,
                ParseErrorKind::Syntax {
                    expected: "a small integer exponent".into(),
                    found: at.tok.to_string(),
                },
            ));
        }
        if parenthesized {
            self.expect_sym(')')?;
        }
        let k = if negative { -(k as i32) } else { k as i32 };
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.peek().clone();
        match &at.tok {
            Tok::Number(v, _) => {
                self.next();
                Ok(Expr::Num(*v))
            }
            Tok::Sym('(') => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) if name == "sqrt" => {
                self.next();
                self.expect_sym('(')?;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(Expr::Sqrt(Box::new(e)))
            }
            Tok::Ident(name) if name == "x" || name == "y" => {
                let is_x = name == "x";
                self.next();
                self.expect_sym('[')?;
                let (i, idx_tok) = self.expect_int()?;
                if i == 0 || i > self.dim {
                    return Err(self.error_at(
                        &idx_tok,
                        ParseErrorKind::DimensionMismatch(format!(
                            "index {i} outside 1..{}",
                            self.dim
                        )),
                    ));
                }
                self.expect_sym(']')?;
                Ok(if is_x { Expr::X(i - 1) } else { Expr::Y(i - 1) })
            }
            Tok::Ident(name) => Err(self.error_at(&at, ParseErrorKind::UnknownIdentifier(name.clone()))),
            _ => Err(self.unexpected("an expression")),
        }
    }
}

/// Parses a metric definition.
pub fn parse_metric(text: &str) -> Result<MetricSpec, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0, dim: 0 };
    parser.metric()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn builtins() {
        assert_eq!(parse_metric("funk(2)").unwrap(), MetricSpec::Funk { dim: 2 });
        assert_eq!(parse_metric(" euclidean ( 3 ) ").unwrap(), MetricSpec::Euclidean { dim: 3 });
    }

    #[test]
    fn custom_euclidean() {
        let spec = parse_metric("custom(2) { (y[1]^2 + y[2]^2) }").unwrap();
        let MetricSpec::Custom { dim: 2, f2 } = &spec else {
            panic!("wrong kind: {spec:?}")
        };
        let v = f2.eval(&[0.3, 0.4], &[3.0, 4.0]).unwrap();
        assert_eq!(v, 25.0);
    }

    #[test]
    fn randers_lists() {
        let spec = parse_metric("randers(2) { 1, 0; 0, 1; 0.1*x[2], -0.1*x[1] }").unwrap();
        match spec {
            MetricSpec::Randers { dim, a, b } => {
                assert_eq!(dim, 2);
                assert_eq!(a.len(), 2);
                assert_eq!(b[1], Expr::Mul(Box::new(Expr::Num(-0.1)), Box::new(Expr::X(0))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn error_positions() {
        let err = parse_metric("custom(2) {\n  y[1]^2 + * y[2] }").unwrap_err();
        assert_eq!((err.line, err.column), (2, 12));
        assert!(matches!(err.kind, ParseErrorKind::Syntax { .. }));
        assert!(err.to_string().starts_with("2:12:"));

        let err = parse_metric("custom(2) { y[3]^2 }").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::DimensionMismatch(_)));
        assert_eq!(err.column, 15);

        let err = parse_metric("custom(2) { z[1] }").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("z".into()));

        let err = parse_metric("finsler(2)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("finsler".into()));

        let err = parse_metric("riemannian(2) { 1, 0; 0 }").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::DimensionMismatch(_)));

        let err = parse_metric("riemannian(2) { 1, y[1]; 0, 1 }").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VelocityInCoefficient(1));

        let err = parse_metric("funk(1)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::DimensionMismatch(_)));
    }

    #[test]
    fn powers_and_precedence() {
        let spec = parse_metric("custom(2) { -y[1]^2 + 2*y[2]^-2 - x[1]^(-1) }").unwrap();
        let MetricSpec::Custom { f2, .. } = spec else { unreachable!() };
        let v = f2.eval(&[0.5, 0.0], &[3.0, 2.0]).unwrap();
        assert!((v - (-9.0 + 0.5 - 2.0)).abs() < 1e-15);
    }

    fn expr_text(depth: u32) -> BoxedStrategy<String> {
        let leaf = prop_oneof![
            (0u32..100).prop_map(|v| format!("{}", v as f64 / 8.0)),
            (1usize..=3).prop_map(|i| format!("x[{i}]")),
            (1usize..=3).prop_map(|i| format!("y[{i}]")),
        ];
        leaf.prop_recursive(depth, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), 0usize..4).prop_map(|(a, b, op)| {
                    let op = ["+", "-", "*", "/"][op];
                    format!("({a} {op} {b})")
                }),
                inner.clone().prop_map(|a| format!("-{a}")),
                inner.clone().prop_map(|a| format!("sqrt({a})")),
                (inner, -3i32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            ]
        })
        .boxed()
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(body in expr_text(4)) {
            let text = format!("custom(3) {{ {body} }}");
            let spec = parse_metric(&text).unwrap();
            let printed = spec.to_string();
            prop_assert_eq!(parse_metric(&printed).unwrap(), spec);
        }
    }

    #[test]
    fn matrix_round_trip() {
        for text in [
            "riemannian(2) { 1 + x[1]^2, 0.5*x[2]; 0.5*x[2], 2 }",
            "randers(2) { 1, 0; 0, 1; 0.1*x[2], -0.1*x[1] }",
            "funk(3)",
        ] {
            let spec = parse_metric(text).unwrap();
            assert_eq!(parse_metric(&spec.to_string()).unwrap(), spec);
        }
    }
}
