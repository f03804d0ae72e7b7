//! Arithmetic expressions for mask coefficients.
//!
//! Mask files carry coefficients either as JSON numbers or as exact surd
//! expressions like `"(93-13*sqrt(31))/(320*sqrt(2))"`. The grammar is the
//! minimum needed for such tables: decimal literals, `+ - * /`, parentheses,
//! unary minus, and `sqrt(..)`. Whitespace between tokens is ignored.
//! Evaluation is plain `f64`, left to right; there is no symbolic
//! simplification.

use std::fmt;

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Decimal literal, kept as written. Guaranteed to parse as a finite `f64`.
    Literal(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
}

/// Syntax error with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Runtime evaluation failure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value")]
    NegativeSqrt,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(String),
    Sqrt,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(s) => write!(f, "number `{s}`"),
            Token::Sqrt => write!(f, "`sqrt`"),
            Token::Plus => write!(f, "`+`"),
            Token::Minus => write!(f, "`-`"),
            Token::Star => write!(f, "`*`"),
            Token::Slash => write!(f, "`/`"),
            Token::LParen => write!(f, "`(`"),
            Token::RParen => write!(f, "`)`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                tokens.push((i, Token::Plus));
                i += 1;
            }
            b'-' => {
                tokens.push((i, Token::Minus));
                i += 1;
            }
            b'*' => {
                tokens.push((i, Token::Star));
                i += 1;
            }
            b'/' => {
                tokens.push((i, Token::Slash));
                i += 1;
            }
            b'(' => {
                tokens.push((i, Token::LParen));
                i += 1;
            }
            b')' => {
                tokens.push((i, Token::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                let mut seen_dot = false;
                let mut seen_digit = false;
                while i < bytes.len() {
                    match bytes[i] {
                        b'0'..=b'9' => {
                            seen_digit = true;
                            i += 1;
                        }
                        b'.' if !seen_dot => {
                            seen_dot = true;
                            i += 1;
                        }
                        _ => break,
                    }
                }
                if !seen_digit {
                    return Err(ParseError {
                        offset: start,
                        message: "expected digits in numeric literal".into(),
                    });
                }
                tokens.push((start, Token::Number(text[start..i].to_string())));
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word = &text[start..i];
                if word == "sqrt" {
                    tokens.push((start, Token::Sqrt));
                } else {
                    return Err(ParseError {
                        offset: start,
                        message: format!("unknown identifier `{word}`"),
                    });
                }
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    message: format!(
                        "unknown token starting with `{}`",
                        text[i..].chars().next().unwrap()
                    ),
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    end_offset: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.end_offset, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Token) -> Result<(), ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(ParseError {
                offset,
                message: format!("expected {want}, found {t}"),
            }),
            None => Err(ParseError {
                offset,
                message: format!("expected {want}, found end of input"),
            }),
        }
    }

    // sum := product (('+' | '-') product)*
    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(Token::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // product := unary (('*' | '/') unary)*
    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary := '-' unary | primary
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Token::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    // primary := number | 'sqrt' '(' sum ')' | '(' sum ')'
    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Token::Number(s)) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Expr::Literal(s.clone())),
                _ => Err(ParseError {
                    offset,
                    message: format!("literal `{s}` is not a finite number"),
                }),
            },
            Some(Token::Sqrt) => {
                self.expect(&Token::LParen)?;
                let inner = self.sum()?;
                self.expect(&Token::RParen)?;
                Ok(Expr::Sqrt(Box::new(inner)))
            }
            Some(Token::LParen) => {
                let inner = self.sum()?;
                self.expect(&Token::RParen)?;
                Ok(inner)
            }
            Some(t) => Err(ParseError {
                offset,
                message: format!("expected a value, found {t}"),
            }),
            None => Err(ParseError {
                offset,
                message: "expected a value, found end of input".into(),
            }),
        }
    }
}

/// Parse `text` into an [`Expr`] under standard precedence
/// (unary minus over `* /` over `+ -`, all left-associative).
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end_offset: text.len(),
    };
    let expr = parser.sum()?;
    if parser.pos < tokens.len() {
        return Err(ParseError {
            offset: parser.offset(),
            message: format!(
                "trailing input after expression: {}",
                parser.peek().unwrap()
            ),
        });
    }
    Ok(expr)
}

/// Evaluate an expression in `f64` arithmetic.
pub fn eval_expr(e: &Expr) -> Result<f64, EvalError> {
    match e {
        // validated at parse time; a hand-built Literal that does not parse
        // evaluates to NaN rather than panicking
        Expr::Literal(s) => Ok(s.parse::<f64>().unwrap_or(f64::NAN)),
        Expr::Neg(a) => Ok(-eval_expr(a)?),
        Expr::Add(a, b) => Ok(eval_expr(a)? + eval_expr(b)?),
        Expr::Sub(a, b) => Ok(eval_expr(a)? - eval_expr(b)?),
        Expr::Mul(a, b) => Ok(eval_expr(a)? * eval_expr(b)?),
        Expr::Div(a, b) => {
            let d = eval_expr(b)?;
            if d == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            Ok(eval_expr(a)? / d)
        }
        Expr::Sqrt(a) => {
            let v = eval_expr(a)?;
            if v < 0.0 {
                return Err(EvalError::NegativeSqrt);
            }
            Ok(v.sqrt())
        }
    }
}

/// Parse and evaluate in one step.
pub fn eval_str(text: &str) -> Result<f64, String> {
    let expr = parse_expr(text).map_err(|e| e.to_string())?;
    eval_expr(&expr).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str) -> f64 {
        eval_expr(&parse_expr(text).unwrap()).unwrap()
    }

    #[test]
    fn integer_arithmetic() {
        assert_eq!(ev("2+2"), 4.0);
        assert_eq!(ev("0"), 0.0);
        assert_eq!(ev("1+2*3"), 7.0);
        assert_eq!(ev("(1+2)*3"), 9.0);
        assert_eq!(ev("8/2/2"), 2.0);
        assert_eq!(ev("1-2-3"), -4.0);
    }

    #[test]
    fn sqrt_basics() {
        assert_eq!(ev("sqrt(4)"), 2.0);
        assert_eq!(ev("sqrt(2)/2"), std::f64::consts::SQRT_2 / 2.0);
    }

    #[test]
    fn unary_minus_precedence() {
        assert_eq!(ev("-2*3"), -6.0);
        assert_eq!(ev("2*-3"), -6.0);
        assert_eq!(ev("--2"), 2.0);
        assert_eq!(ev("-sqrt(9)"), -3.0);
        assert_eq!(ev("1--1"), 2.0);
    }

    // values frozen from a 40-digit arbitrary-precision evaluation
    #[test]
    #[allow(clippy::excessive_precision)]
    fn surd_coefficients() {
        assert!((ev("(93-13*sqrt(31))/(640*sqrt(2))") - 0.022781061670737731471).abs() < 1e-16);
        assert!((ev("(4-4*sqrt(7))/16") - (-0.41143782776614764763)).abs() < 1e-15);
    }

    #[test]
    fn whitespace_ignored() {
        assert_eq!(ev(" 1 +\t2 * sqrt( 4 ) "), 5.0);
    }

    #[test]
    fn literal_roundtrip_exact() {
        for lit in [
            "0",
            "1",
            "0.5",
            "123.456",
            "0.1",
            "3.1415926535897931",
            ".25",
        ] {
            assert_eq!(ev(lit), lit.parse::<f64>().unwrap());
        }
    }

    #[test]
    fn division_by_zero_is_eval_error() {
        let e = parse_expr("1/(2-2)").unwrap();
        assert_eq!(eval_expr(&e), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn negative_sqrt_is_eval_error() {
        let e = parse_expr("sqrt(1-2)").unwrap();
        assert_eq!(eval_expr(&e), Err(EvalError::NegativeSqrt));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_expr("1+").unwrap_err();
        assert_eq!(err.offset, 2);
        let err = parse_expr("(1+2").unwrap_err();
        assert_eq!(err.offset, 4);
        let err = parse_expr("1+2)").unwrap_err();
        assert_eq!(err.offset, 3);
        let err = parse_expr("2^3").unwrap_err();
        assert_eq!(err.offset, 1);
        let err = parse_expr("sin(1)").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(parse_expr("").is_err());
        assert!(parse_expr("   ").is_err());
    }

    #[test]
    fn bare_dot_rejected() {
        assert!(parse_expr(".").is_err());
        assert!(parse_expr("1 + .").is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn literal(value: f64, negative: bool) -> String {
            // moderate magnitudes keep Display output exponent-free
            if negative {
                format!("-{value}")
            } else {
                format!("{value}")
            }
        }

        proptest! {
            // a + b*c must bind the product first; Display output of f64
            // round-trips exactly, so the comparison is bit-level
            #[test]
            fn precedence(
                a in 0.1f64..1000.0, b in 0.1f64..1000.0, c in 0.1f64..1000.0,
                sa: bool, sb: bool, sc: bool,
            ) {
                let text = format!(
                    "{}+{}*{}",
                    literal(a, sa),
                    literal(b, sb),
                    literal(c, sc)
                );
                let a = if sa { -a } else { a };
                let b = if sb { -b } else { b };
                let c = if sc { -c } else { c };
                prop_assert_eq!(ev(&text), a + b * c);
            }

            #[test]
            fn literal_roundtrip(int_part in 0u64..1_000_000_000_000, frac in 0u32..1_000_000) {
                let text = format!("{int_part}.{frac:06}");
                prop_assert_eq!(ev(&text), text.parse::<f64>().unwrap());
            }

            // parsing arbitrary input returns a value or a located error,
            // never panics
            #[test]
            fn parse_is_total_on_grammar_alphabet(text in "[0-9sqrt+\\-*/(). ]{0,48}") {
                match parse_expr(&text) {
                    Ok(e) => {
                        let _ = eval_expr(&e);
                    }
                    Err(err) => prop_assert!(err.offset <= text.len()),
                }
            }

            #[test]
            fn parse_is_total_on_arbitrary_input(text in ".{0,32}") {
                match parse_expr(&text) {
                    Ok(e) => {
                        let _ = eval_expr(&e);
                    }
                    Err(err) => prop_assert!(err.offset <= text.len()),
                }
            }
        }
    }
}
