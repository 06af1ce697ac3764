//! Recursive-descent parser for the monomial expression grammar used in
//! config files: sums of terms built from numbers, the imaginary unit `i`,
//! variables `x1..xn` / `xi1..xin`, products, integer powers and
//! parentheses. Example: `xi2^2 + x2^2 + i*(x2*xi1 - x1*xi2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::poly::PolynomialSymbol;
use crate::symplectic::QuadraticSymbol;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    ImaginaryUnit,
    Var { axis: usize, momentum: bool },
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let bytes: Vec<char> = input.chars().collect();
    let mut pos = 0;
    while pos < bytes.len() {
        let ch = bytes[pos];
        match ch {
            c if c.is_whitespace() => pos += 1,
            '+' => {
                tokens.push(Token::Plus);
                pos += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                pos += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                pos += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                pos += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                pos += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                pos += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_digit()
                        || bytes[pos] == '.'
                        || bytes[pos] == 'e'
                        || bytes[pos] == 'E'
                        || ((bytes[pos] == '+' || bytes[pos] == '-')
                            && pos > start
                            && (bytes[pos - 1] == 'e' || bytes[pos - 1] == 'E')))
                {
                    pos += 1;
                }
                let text: String = bytes[start..pos].iter().collect();
                let value: f64 = text
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number literal '{text}'")))?;
                tokens.push(Token::Number(value));
            }
            'i' | 'x' => {
                let start = pos;
                while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric()) {
                    pos += 1;
                }
                let word: String = bytes[start..pos].iter().collect();
                tokens.push(parse_word(&word)?);
            }
            other => {
                return Err(Error::Parse(format!("unexpected character '{other}'")));
            }
        }
    }
    Ok(tokens)
}

fn parse_word(word: &str) -> Result<Token> {
    if word == "i" {
        return Ok(Token::ImaginaryUnit);
    }
    let (momentum, index_str) = if let Some(rest) = word.strip_prefix("xi") {
        (true, rest)
    } else if let Some(rest) = word.strip_prefix('x') {
        (false, rest)
    } else {
        return Err(Error::Parse(format!("unknown identifier '{word}'")));
    };
    let index: usize = index_str
        .parse()
        .map_err(|_| Error::Parse(format!("bad variable index in '{word}'")))?;
    if index == 0 {
        return Err(Error::Parse(format!("variable indices start at 1, got '{word}'")));
    }
    Ok(Token::Var { axis: index - 1, momentum })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<PolynomialSymbol> {
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Token::Plus => {
                    self.next();
                    acc = acc.add(&self.term()?)?;
                }
                Token::Minus => {
                    self.next();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<PolynomialSymbol> {
        let mut acc = self.unary()?;
        while let Some(Token::Star) = self.peek() {
            self.next();
            acc = acc.mul(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<PolynomialSymbol> {
        match self.peek() {
            Some(Token::Minus) => {
                self.next();
                Ok(self.unary()?.scaled(C64::new(-1.0, 0.0)))
            }
            Some(Token::Plus) => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<PolynomialSymbol> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.next();
            let exp = match self.next() {
                Some(Token::Number(v)) if v >= 0.0 && v.fract() == 0.0 => v as u32,
                other => {
                    return Err(Error::Parse(format!(
                        "exponent must be a nonnegative integer, got {other:?}"
                    )))
                }
            };
            let mut acc = PolynomialSymbol::constant(self.n, C64::new(1.0, 0.0));
            for _ in 0..exp {
                acc = acc.mul(&base)?;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<PolynomialSymbol> {
        match self.next() {
            Some(Token::Number(v)) => Ok(PolynomialSymbol::constant(self.n, C64::new(v, 0.0))),
            Some(Token::ImaginaryUnit) => {
                Ok(PolynomialSymbol::constant(self.n, C64::new(0.0, 1.0)))
            }
            Some(Token::Var { axis, momentum }) => {
                if axis >= self.n {
                    return Err(Error::Parse(format!(
                        "variable index {} exceeds declared dimension n = {}",
                        axis + 1,
                        self.n
                    )));
                }
                let mut alpha = vec![0u32; self.n];
                let mut beta = vec![0u32; self.n];
                if momentum {
                    beta[axis] = 1;
                } else {
                    alpha[axis] = 1;
                }
                PolynomialSymbol::monomial(self.n, alpha, beta, Complex64::new(1.0, 0.0))
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(Error::Parse("missing closing parenthesis".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an expression into a polynomial symbol in `n` position and `n`
/// momentum variables.
pub fn parse_polynomial(input: &str, n: usize) -> Result<PolynomialSymbol> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension n must be positive".into()));
    }
    let tokens = tokenize(input)?;
    let mut parser = Parser { tokens, pos: 0, n };
    let poly = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::Parse(format!(
            "trailing input after position {}",
            parser.pos
        )));
    }
    Ok(poly)
}

/// Parses an expression that must be a homogeneous degree-2 form.
pub fn parse_quadratic(input: &str, n: usize) -> Result<QuadraticSymbol> {
    parse_polynomial(input, n)?.to_quadratic()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_kfp_expression() {
        let q = parse_quadratic("xi2^2 + x2^2 + i*(x2*xi1 - x1*xi2)", 2).unwrap();
        let built = crate::models::kfp(2).unwrap();
        let diff = q.matrix() - built.matrix();
        assert!(crate::linalg::max_norm(&diff) < 1e-15);
    }

    #[test]
    fn parses_coefficients_and_powers() {
        let p = parse_polynomial("2.5*x1^2 - 0.5*xi1*x1 + 3", 1).unwrap();
        assert_eq!(p.eval_real(&[1.0, 2.0]).unwrap(), C64::new(2.5 - 1.0 + 3.0, 0.0));
    }

    #[test]
    fn imaginary_unit_multiplies() {
        let p = parse_polynomial("i*x1^2", 1).unwrap();
        assert_eq!(p.eval_real(&[2.0, 0.0]).unwrap(), C64::new(0.0, 4.0));
    }

    #[test]
    fn rejects_non_quadratic_for_forms() {
        assert!(parse_quadratic("x1^3", 1).is_err());
        assert!(parse_quadratic("x1 + x1^2", 1).is_err());
    }

    #[test]
    fn rejects_out_of_range_variables() {
        assert!(parse_polynomial("x3^2", 2).is_err());
        assert!(parse_polynomial("x0^2", 2).is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_polynomial("x1 $ x2", 2).is_err());
        assert!(parse_polynomial("(x1", 1).is_err());
        assert!(parse_polynomial("x1^1.5", 1).is_err());
    }

    #[test]
    fn scientific_notation_coefficients() {
        let p = parse_polynomial("1e-2*x1^2", 1).unwrap();
        assert_eq!(p.eval_real(&[10.0, 0.0]).unwrap(), C64::new(1.0, 0.0));
    }
}
