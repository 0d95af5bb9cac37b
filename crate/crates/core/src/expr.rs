//! Scalar expressions in the single variable `t`, used to write entries of
//! `A(t)` in system files.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func    := exp | sin | cos | sqrt | ln | abs
//! ```
//!
//! `^` binds tighter than unary minus and is right associative, so
//! `-2^2 = -4` and `2^3^2 = 512`. Implicit multiplication is not accepted.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Ln,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64) -> Result<f64> {
        let domain = |reason| Error::Domain {
            node: self.to_string(),
            t,
            reason,
        };
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Neg(e) => -e.eval(t)?,
            Expr::Binary(op, l, r) => {
                let (a, b) = (l.eval(t)?, r.eval(t)?);
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(domain("division by zero"));
                        }
                        a / b
                    }
                    BinaryOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(domain("fractional power of a negative number"));
                        }
                        if a == 0.0 && b < 0.0 {
                            return Err(domain("negative power of zero"));
                        }
                        a.powf(b)
                    }
                }
            }
            Expr::Call(f, arg) => {
                let x = arg.eval(t)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Abs => x.abs(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(domain("square root of a negative number"));
                        }
                        x.sqrt()
                    }
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(domain("logarithm of a non-positive number"));
                        }
                        x.ln()
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(domain("non-finite result"));
        }
        Ok(v)
    }

    /// True when the expression does not mention `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Binary(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }
}

/// Fully parenthesised; reparses to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("t"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l}{}{r})", op.symbol()),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let tokens = lex(src)?;
    if tokens.len() == 1 {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.unexpected("operator or end of input")),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((Tok::Op(c as char), i));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("number `{text}` out of range"),
                    });
                }
                out.push((Tok::Num(v), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Error {
        let found = match self.peek() {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        };
        Error::Syntax {
            offset: self.offset(),
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "t" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    _ => match Func::from_name(&name) {
                        Some(func) => {
                            if self.peek() != &Tok::LParen {
                                return Err(self.unexpected(&format!("`(` after `{name}`")));
                            }
                            self.bump();
                            let arg = self.expr()?;
                            self.expect_rparen()?;
                            Ok(Expr::Call(func, Box::new(arg)))
                        }
                        None => Err(Error::UnknownIdentifier { name, offset }),
                    },
                }
            }
            _ => Err(self.unexpected("number, `t`, function call or `(`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == &Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ev(s: &str, t: f64) -> f64 {
        parse(s).unwrap().eval(t).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1+2*3", 0.0), 7.0);
        assert_eq!(ev("1+2*3", 42.0), 7.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("8/4/2", 0.0), 1.0);
        assert_eq!(ev("8-4-2", 0.0), 2.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("2*-3", 0.0), -6.0);
        assert_eq!(ev("(1+2)*3", 0.0), 9.0);
    }

    #[test]
    fn functions_and_variable() {
        assert_eq!(ev("exp(-t)", 0.0), 1.0);
        assert_eq!(ev("-3", 17.0), -3.0);
        assert_abs_diff_eq!(ev("exp(-2*t)", 1.0), (-2f64).exp(), epsilon = 1e-16);
        assert_abs_diff_eq!(ev("exp(-2*t)", 1.0), 0.135335, epsilon = 1e-6);
        assert_abs_diff_eq!(ev("sqrt(10)", 0.0), 3.16227766016838, epsilon = 1e-14);
        assert_abs_diff_eq!(ev("sqrt(10)*sin(3*t)", 0.5), 10f64.sqrt() * 1.5f64.sin(), epsilon = 1e-15);
        assert_eq!(ev("abs(-t) + ln(1)", 2.0), 2.0);
        assert_abs_diff_eq!(ev("cos(pi)", 0.0), -1.0, epsilon = 1e-15);
        assert_eq!(ev(" 1.5e2 + 2E-1 ", 0.0), 150.2);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("2t") {
            Err(Error::Syntax { offset, message }) => {
                assert_eq!(offset, 1);
                assert!(message.contains("expected"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("1 + "), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(parse("(1"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("exp 1"), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(parse("1 $ 2"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("1e999"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse("x + 1"),
            Err(Error::UnknownIdentifier {
                name: "x".into(),
                offset: 0
            })
        );
        assert!(matches!(parse("2*tan(t)"), Err(Error::UnknownIdentifier { offset: 2, .. })));
    }

    #[test]
    fn domain_errors_name_the_node() {
        let e = parse("1 + sqrt(t)").unwrap();
        match e.eval(-1.0) {
            Err(Error::Domain { node, reason, .. }) => {
                assert_eq!(node, "sqrt(t)");
                assert!(reason.contains("negative"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("ln(t)").unwrap().eval(0.0).is_err());
        assert!(parse("1/t").unwrap().eval(0.0).is_err());
        assert!(parse("exp(t)").unwrap().eval(1e6).is_err());
        assert!(parse("t^0.5").unwrap().eval(-4.0).is_err());
    }

    #[test]
    fn constant_detection() {
        assert!(parse("sqrt(10)*2").unwrap().is_constant());
        assert!(!parse("exp(-t)").unwrap().is_constant());
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(|v| format!("{v}")),
            Just("t".to_string()),
            Just("pi".to_string()),
        ];
        leaf.prop_recursive(5, 40, 3, |inner| {
            prop_oneof![
                (inner.clone(), prop::sample::select(vec!['+', '-', '*', '/']), inner.clone())
                    .prop_map(|(a, op, b)| format!("{a} {op} {b}")),
                (inner.clone(), 0u8..4).prop_map(|(a, k)| format!("({a})^{k}")),
                inner.clone().prop_map(|a| format!("-{a}")),
                (prop::sample::select(vec!["sin", "cos", "abs", "exp"]), inner.clone())
                    .prop_map(|(f, a)| format!("{f}(({a})/1000)")),
                inner.prop_map(|a| format!("({a})")),
            ]
        })
    }

    fn same(a: Result<f64>, b: Result<f64>) -> bool {
        match (a, b) {
            (Ok(x), Ok(y)) => x == y || (x - y).abs() <= 1e-12 * x.abs().max(1.0),
            (Err(_), Err(_)) => true,
            _ => false,
        }
    }

    proptest! {
        #[test]
        fn display_round_trip(src in arb_expr(), ts in prop::collection::vec(-10.0f64..10.0, 100)) {
            let e = parse(&src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            for t in ts {
                prop_assert!(same(e.eval(t), again.eval(t)));
            }
        }

        #[test]
        fn parenthesising_is_transparent(src in arb_expr(), t in -10.0f64..10.0) {
            let a = parse(&src).unwrap();
            let b = parse(&format!("({src})")).unwrap();
            prop_assert!(same(a.eval(t), b.eval(t)));
        }
    }
}
