//! Recursive-descent parser for `"(" expr "," expr ")"`.
//!
//! ```text
//! map    := "(" expr "," expr ")"
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := unary ("^" integer)?
//! unary  := "-" unary | atom
//! atom   := number | "x" | "y" | func "(" expr ")" | "(" expr ")"
//! func   := "sinh" | "cosh" | "asinh" | "sqrt" | "abs"
//! ```

use thiserror::Error;

use super::ast::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("malformed exponent at offset {offset}: {message}")]
    MalformedExponent { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::MalformedExponent { offset, .. } => *offset,
        }
    }

    fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integral: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num { value, .. } => format!("number {value}"),
            Tok::Ident(name) => format!("`{name}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn starts_operand(&self) -> bool {
        matches!(
            self,
            Tok::Num { .. } | Tok::Ident(_) | Tok::Minus | Tok::LParen
        )
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                let mut integral = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integral = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::syntax(start, format!("invalid number `{text}`")))?;
                out.push((Tok::Num { value, integral }, start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::syntax(
                    start,
                    format!("unexpected character `{ch}`"),
                ));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
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

    fn expect(&mut self, want: Tok, context: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::syntax(
                self.offset(),
                format!(
                    "expected {} {context}, found {}",
                    want.describe(),
                    self.peek().describe()
                ),
            ))
        }
    }

    // A binary operator at `op_offset` must be followed by an operand.
    fn require_operand(&self, op: &Tok, op_offset: usize) -> Result<(), ParseError> {
        if self.peek().starts_operand() {
            Ok(())
        } else {
            Err(ParseError::syntax(
                op_offset,
                format!(
                    "operator {} is missing its right operand (found {})",
                    op.describe(),
                    self.peek().describe()
                ),
            ))
        }
    }

    fn map(&mut self) -> Result<(Expr, Expr), ParseError> {
        self.expect(Tok::LParen, "to open the map")?;
        let first = self.expr()?;
        self.expect(Tok::Comma, "between the two components")?;
        let second = self.expr()?;
        self.expect(Tok::RParen, "to close the map")?;
        if *self.peek() != Tok::End {
            return Err(ParseError::syntax(
                self.offset(),
                format!("trailing input starting with {}", self.peek().describe()),
            ));
        }
        Ok((first, second))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while matches!(self.peek(), Tok::Plus | Tok::Minus) {
            let (op, at) = self.bump();
            self.require_operand(&op, at)?;
            let rhs = self.term()?;
            lhs = match op {
                Tok::Plus => Expr::Add(Box::new(lhs), Box::new(rhs)),
                _ => Expr::Sub(Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while matches!(self.peek(), Tok::Star | Tok::Slash) {
            let (op, at) = self.bump();
            self.require_operand(&op, at)?;
            let rhs = self.factor()?;
            lhs = match op {
                Tok::Star => Expr::Mul(Box::new(lhs), Box::new(rhs)),
                _ => Expr::Div(Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let (_, caret_at) = self.bump();
        let at = self.offset();
        match self.bump() {
            (
                Tok::Num {
                    value,
                    integral: true,
                },
                _,
            ) if value <= u32::MAX as f64 => Ok(Expr::Pow(Box::new(base), value as u32)),
            (Tok::Num { .. }, _) => Err(ParseError::MalformedExponent {
                offset: at,
                message: "exponent must be a non-negative integer literal".into(),
            }),
            (Tok::Minus, _) => Err(ParseError::MalformedExponent {
                offset: at,
                message: "negative exponents are not supported".into(),
            }),
            (other, _) => Err(ParseError::MalformedExponent {
                offset: caret_at,
                message: format!("expected an integer after `^`, found {}", other.describe()),
            }),
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            let (op, at) = self.bump();
            self.require_operand(&op, at)?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            (Tok::Num { value, .. }, _) => Ok(Expr::Const(value)),
            (Tok::Ident(name), _) => match name.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                other => {
                    let func =
                        Func::from_name(other).ok_or_else(|| ParseError::UnknownIdentifier {
                            offset: at,
                            name: other.to_string(),
                        })?;
                    self.expect(Tok::LParen, &format!("after `{}`", func.name()))?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, &format!("to close `{}(`", func.name()))?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            (Tok::LParen, _) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "to close the parenthesis")?;
                Ok(inner)
            }
            (tok, _) => Err(ParseError::syntax(
                at,
                format!("expected an operand, found {}", tok.describe()),
            )),
        }
    }
}

/// Parse a component pair `"(f1, f2)"`.
pub fn parse_pair(src: &str) -> Result<(Expr, Expr), ParseError> {
    let toks = tokenize(src)?;
    Parser { toks, pos: 0 }.map()
}

/// Parse a single scalar expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::syntax(
            p.offset(),
            format!("trailing input starting with {}", p.peek().describe()),
        ));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse_expr("1 - 2 - 3").unwrap(),
            Expr::Sub(
                b(Expr::Sub(b(Expr::Const(1.0)), b(Expr::Const(2.0)))),
                b(Expr::Const(3.0))
            )
        );
        assert_eq!(
            parse_expr("x + y * 2").unwrap(),
            Expr::Add(b(Expr::X), b(Expr::Mul(b(Expr::Y), b(Expr::Const(2.0)))))
        );
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        // factor := unary ("^" integer)?
        assert_eq!(
            parse_expr("-y^2").unwrap(),
            Expr::Pow(b(Expr::Neg(b(Expr::Y))), 2)
        );
        assert_eq!(
            parse_expr("-(y^2)").unwrap(),
            Expr::Neg(b(Expr::Pow(b(Expr::Y), 2)))
        );
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse_expr("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse_expr(".25").unwrap(), Expr::Const(0.25));
        assert_eq!(parse_expr("2E2").unwrap(), Expr::Const(200.0));
    }

    #[test]
    fn stray_operator_reports_its_offset() {
        let err = parse_pair("(x - , y)").unwrap_err();
        assert!(
            matches!(err, ParseError::Syntax { offset: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_pair("(sin(x), y)").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                offset: 1,
                name: "sin".into()
            }
        );
        assert!(matches!(
            parse_pair("(z, y)").unwrap_err(),
            ParseError::UnknownIdentifier { offset: 1, .. }
        ));
    }

    #[test]
    fn malformed_exponents() {
        for src in ["(x^2.5, y)", "(x^-1, y)", "(x^y, y)", "(x^1e2, y)"] {
            let err = parse_pair(src).unwrap_err();
            assert!(
                matches!(err, ParseError::MalformedExponent { .. }),
                "{src}: {err:?}"
            );
        }
        assert_eq!(parse_pair("(x^0, y)").unwrap().0, Expr::Pow(b(Expr::X), 0));
    }

    #[test]
    fn structural_errors() {
        for src in [
            "x, y",
            "(x, y",
            "(x y)",
            "(x, y) z",
            "(x,)",
            "(sinh x, y)",
            "(x # y, y)",
            "()",
        ] {
            assert!(parse_pair(src).is_err(), "{src} should fail");
        }
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(
            parse_pair(" ( x-y ^3 ,\n -y ) ").unwrap(),
            parse_pair("(x-y^3,-y)").unwrap()
        );
    }
}
