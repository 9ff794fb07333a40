//! Symbol mini-language: sums and products of numbers, `abs2(z1)`, `abs2(z2)`
//! and the `bump` preset, with parentheses, unary minus and integer powers.
//!
//! ```text
//! 1-abs2(z1)
//! abs2(z1)*abs2(z2)
//! 0.5*bump + 2*(abs2(z1) - 1)^2
//! ```

use std::collections::BTreeMap;
use std::fmt;

use berezin_core::symbol::{DiscSymbol, RadialSymbol, SeparableSymbol, SeparableTerm};
use berezin_core::BumpSymbol;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("symbol `{text}`: {message}")]
pub struct ExprError {
    pub text: String,
    pub message: String,
}

/// Exponents of `(|z1|², |z2|², χ(|z1|))`.
type Key = [u32; 3];

/// A polynomial in `|z1|²`, `|z2|²` and the bump `χ(|z1|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolExpr {
    text: String,
    terms: BTreeMap<Key, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    Abs2Z1,
    Abs2Z2,
    Bump,
    Plus,
    Minus,
    Star,
    Caret,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let s: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let c = s[i];
        let single = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '^' => Some(Token::Caret),
            '(' => Some(Token::Open),
            ')' => Some(Token::Close),
            _ => None,
        };
        if let Some(t) = single {
            out.push(t);
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < s.len() && (s[i].is_ascii_digit() || s[i] == '.') {
                i += 1;
            }
            if i < s.len() && (s[i] == 'e' || s[i] == 'E') {
                i += 1;
                if i < s.len() && (s[i] == '+' || s[i] == '-') {
                    i += 1;
                }
                while i < s.len() && s[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit: String = s[start..i].iter().collect();
            let v: f64 = lit.parse().map_err(|_| format!("bad number `{lit}`"))?;
            out.push(Token::Num(v));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == '_') {
                i += 1;
            }
            let word: String = s[start..i].iter().collect();
            match word.as_str() {
                "bump" => out.push(Token::Bump),
                "abs2" => {
                    let rest: String = s[i..].iter().take(4).collect();
                    match rest.as_str() {
                        "(z1)" => out.push(Token::Abs2Z1),
                        "(z2)" => out.push(Token::Abs2Z2),
                        _ => return Err("expected `abs2(z1)` or `abs2(z2)`".into()),
                    }
                    i += 4;
                }
                other => return Err(format!("unknown name `{other}`")),
            }
            continue;
        }
        return Err(format!("unexpected character `{c}`"));
    }
    Ok(out)
}

type Poly = BTreeMap<Key, f64>;

fn poly_const(c: f64) -> Poly {
    BTreeMap::from([([0, 0, 0], c)])
}

fn poly_add(mut a: Poly, b: &Poly, sign: f64) -> Poly {
    for (k, v) in b {
        *a.entry(*k).or_insert(0.0) += sign * v;
    }
    a
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
            *out.entry(k).or_insert(0.0) += va * vb;
        }
    }
    out
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Poly, String> {
        let mut acc = self.term()?;
        while let Some(op @ (Token::Plus | Token::Minus)) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = poly_add(acc, &rhs, if op == Token::Plus { 1.0 } else { -1.0 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, String> {
        let mut acc = self.unary()?;
        while self.peek() == Some(Token::Star) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = poly_mul(&acc, &rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, String> {
        if self.peek() == Some(Token::Minus) {
            self.pos += 1;
            let p = self.unary()?;
            return Ok(poly_add(Poly::new(), &p, -1.0));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly, String> {
        let base = self.atom()?;
        if self.peek() != Some(Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let e = match self.next() {
            Some(Token::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= 64.0 => v as u32,
            _ => return Err("exponent must be an integer in 0..=64".into()),
        };
        let mut acc = poly_const(1.0);
        for _ in 0..e {
            acc = poly_mul(&acc, &base);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Poly, String> {
        match self.next() {
            Some(Token::Num(v)) => Ok(poly_const(v)),
            Some(Token::Abs2Z1) => Ok(BTreeMap::from([([1, 0, 0], 1.0)])),
            Some(Token::Abs2Z2) => Ok(BTreeMap::from([([0, 1, 0], 1.0)])),
            Some(Token::Bump) => Ok(BTreeMap::from([([0, 0, 1], 1.0)])),
            Some(Token::Open) => {
                let p = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(p),
                    _ => Err("missing `)`".into()),
                }
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of input".into()),
        }
    }
}

impl SymbolExpr {
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        let err = |message: String| ExprError {
            text: text.to_string(),
            message,
        };
        let tokens = tokenize(text).map_err(err)?;
        if tokens.is_empty() {
            return Err(err("empty symbol".into()));
        }
        let mut p = Parser { tokens, pos: 0 };
        let mut terms = p.expr().map_err(err)?;
        if p.pos != p.tokens.len() {
            return Err(err(format!("trailing input at token {}", p.pos + 1)));
        }
        if terms.values().any(|v| !v.is_finite()) {
            return Err(err("coefficients must be finite".into()));
        }
        terms.retain(|_, v| *v != 0.0);
        Ok(Self {
            text: text.to_string(),
            terms,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn uses_z2(&self) -> bool {
        self.terms.keys().any(|k| k[1] > 0)
    }

    pub fn uses_bump(&self) -> bool {
        self.terms.keys().any(|k| k[2] > 0)
    }

    /// Value from `x = |z1|²`, `y = |z2|²` and `b = χ(|z1|)`.
    pub fn value(&self, x: f64, y: f64, b: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c * x.powi(k[0] as i32) * y.powi(k[1] as i32) * b.powi(k[2] as i32))
            .sum()
    }

    fn fail(&self, message: &str) -> ExprError {
        ExprError {
            text: self.text.clone(),
            message: message.into(),
        }
    }

    /// `ψ(r)` with `φ(z1, z2) = ψ(|z1|)`, for the Reinhardt domain.
    pub fn to_radial(&self, bump: &BumpSymbol) -> Result<RadialSymbol, ExprError> {
        if self.uses_z2() {
            return Err(self.fail("only symbols of |z1| are supported on the Reinhardt domain"));
        }
        let mut poly: Vec<f64> = Vec::new();
        let mut bump_scale = 0.0;
        let mut rest: Vec<(Key, f64)> = Vec::new();
        for (k, c) in &self.terms {
            match k {
                [a, 0, 0] => {
                    let i = 2 * *a as usize;
                    if poly.len() <= i {
                        poly.resize(i + 1, 0.0);
                    }
                    poly[i] += c;
                }
                [0, 0, 1] => bump_scale += c,
                _ => rest.push((*k, *c)),
            }
        }
        let mut parts = Vec::new();
        if !poly.is_empty() {
            parts.push(RadialSymbol::Polynomial(poly));
        }
        if bump_scale != 0.0 {
            parts.push(RadialSymbol::Bump {
                bump: bump.clone(),
                scale: bump_scale,
            });
        }
        if !rest.is_empty() {
            let support = if rest.iter().all(|(k, _)| k[2] > 0) { bump.support() } else { (0.0, 1.0) };
            let b = bump.clone();
            parts.push(RadialSymbol::Custom {
                label: self.text.clone(),
                f: std::sync::Arc::new(move |r: f64| {
                    let (x, chi) = (r * r, b.value(r));
                    rest.iter()
                        .map(|(k, c)| c * x.powi(k[0] as i32) * chi.powi(k[2] as i32))
                        .sum()
                }),
                support: Some(support),
                breakpoints: bump.breakpoints().to_vec(),
            });
        }
        Ok(match parts.len() {
            0 => RadialSymbol::zero(),
            1 => parts.pop().unwrap(),
            _ => RadialSymbol::Sum(parts),
        })
    }

    /// Separable form on a product of `arity` discs (`arity ≤ 2`).
    pub fn to_separable(&self, arity: usize) -> Result<SeparableSymbol, ExprError> {
        if self.uses_bump() {
            return Err(self.fail("the bump preset is only defined on the Reinhardt domain"));
        }
        if arity < 2 && self.uses_z2() {
            return Err(self.fail("z2 is not a coordinate of the disc"));
        }
        let factor = |e: u32| match e {
            0 => DiscSymbol::constant(1.0),
            1 => DiscSymbol::abs2(),
            e => {
                let mut c = vec![0.0; 2 * e as usize + 1];
                c[2 * e as usize] = 1.0;
                DiscSymbol::Radial(RadialSymbol::Polynomial(c))
            }
        };
        let terms: Vec<SeparableTerm> = self
            .terms
            .iter()
            .map(|(k, c)| SeparableTerm {
                coefficient: *c,
                factors: (0..arity).map(|j| factor(k[j])).collect(),
            })
            .collect();
        if terms.is_empty() {
            return Ok(SeparableSymbol::constant(arity, 0.0));
        }
        SeparableSymbol::new(arity, terms).map_err(|e| self.fail(&e.to_string()))
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
