//! Recursive-descent parser for rate expressions.
//!
//! ```text
//! expr   := term { ("+"|"-") term } ;
//! term   := factor { ("*"|"/") factor } ;
//! factor := NUMBER | "lambda" | "(" expr ")" | "-" factor ;
//! ```
//!
//! Arithmetic is carried out exactly while parsing, so the result is already
//! in canonical form.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::RationalExpr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigRational),
    Lambda,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(n) => format!("number `{n}`"),
            Token::Lambda => "`lambda`".into(),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn syntax(position: usize, expected: &str, found: impl Into<String>) -> Error {
    Error::Syntax {
        position,
        expected: expected.to_string(),
        found: found.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Token::Plus)),
            b'-' => out.push((start, Token::Minus)),
            b'*' => out.push((start, Token::Star)),
            b'/' => out.push((start, Token::Slash)),
            b'(' => out.push((start, Token::LParen)),
            b')' => out.push((start, Token::RParen)),
            b'0'..=b'9' => {
                let mut end = i;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                let int_part = &text[i..end];
                let mut frac_part = "";
                if end < bytes.len() && bytes[end] == b'.' {
                    let frac_start = end + 1;
                    let mut frac_end = frac_start;
                    while frac_end < bytes.len() && bytes[frac_end].is_ascii_digit() {
                        frac_end += 1;
                    }
                    if frac_end == frac_start {
                        let found = text[frac_start..]
                            .chars()
                            .next()
                            .map_or("end of input".to_string(), |ch| format!("`{ch}`"));
                        return Err(syntax(frac_start, "digit after decimal point", found));
                    }
                    frac_part = &text[frac_start..frac_end];
                    end = frac_end;
                }
                out.push((start, Token::Number(decimal(int_part, frac_part))));
                i = end;
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = i;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                let word = &text[i..end];
                if word != "lambda" {
                    return Err(syntax(start, "number, `lambda` or `(`", format!("identifier `{word}`")));
                }
                out.push((start, Token::Lambda));
                i = end;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(
                    start,
                    "number, `lambda`, operator or parenthesis",
                    format!("`{ch}`"),
                ));
            }
        }
        i += 1;
    }
    out.push((text.len(), Token::End));
    Ok(out)
}

fn decimal(int_part: &str, frac_part: &str) -> BigRational {
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().expect("digits only");
    let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
    BigRational::new(numer, denom)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RationalExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Token::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalExpr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    acc = &acc * &self.factor()?;
                }
                Token::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc.checked_div(&rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RationalExpr> {
        let at = self.offset();
        match self.bump() {
            Token::Number(n) => Ok(RationalExpr::constant(n)),
            Token::Lambda => Ok(RationalExpr::lambda()),
            Token::Minus => Ok(-&self.factor()?),
            Token::LParen => {
                let inner = self.expr()?;
                let close_at = self.offset();
                match self.bump() {
                    Token::RParen => Ok(inner),
                    other => Err(syntax(close_at, "`)`", other.describe())),
                }
            }
            other => Err(syntax(at, "number, `lambda`, `(` or `-`", other.describe())),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<RationalExpr> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let e = parser.expr()?;
    let at = parser.offset();
    match parser.peek() {
        Token::End => Ok(e),
        other => Err(syntax(at, "operator or end of input", other.describe())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(decimal("2", "5"), BigRational::new(5.into(), 2.into()));
        assert_eq!(decimal("0", "1"), BigRational::new(1.into(), 10.into()));
        assert_eq!(decimal("17", ""), BigRational::from_integer(17.into()));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("1++") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(1"), Err(Error::Syntax { position: 2, .. })));
        assert!(matches!(parse("1 2"), Err(Error::Syntax { position: 2, .. })));
        assert!(matches!(parse("mu"), Err(Error::Syntax { position: 0, .. })));
        assert!(matches!(parse("1."), Err(Error::Syntax { .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { position: 0, .. })));
        assert!(matches!(parse("2^3"), Err(Error::Syntax { position: 1, .. })));
    }

    #[test]
    fn division_by_zero_polynomial() {
        assert_eq!(parse("1/(lambda-lambda)"), Err(Error::ZeroDenominator));
        assert_eq!(parse("1/0"), Err(Error::ZeroDenominator));
    }
}
