//! Lexer and parser for the text grammar shared by scalars, series,
//! Λ-polynomials, coordinate changes and algebra presentations.
//!
//! Precedence, tightest first: unary minus, power, product (explicit `*`,
//! `/` or juxtaposition), sum. A sign in front of a summand belongs to the sum,
//! so `-z^2` is −(z²); a unary minus inside a product binds before the power.

use std::collections::HashMap;

use num_rational::Rational64;
use superfield::{Parity, Variant};

use crate::error::{CliError, Pos, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    Newline,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos { line: ln + 1, col: i + 1 };
            if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let st = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Token { tok: Tok::Num(chars[st..i].iter().collect()), pos });
            } else if c.is_alphabetic() || c == '_' {
                let st = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[st..i].iter().collect()), pos });
            } else if "+-*/^()[]{},=;".contains(c) {
                out.push(Token { tok: Tok::Sym(c), pos });
                i += 1;
            } else {
                return Err(CliError::parse(pos, format!("unexpected character '{}'", c)));
            }
        }
        out.push(Token { tok: Tok::Newline, pos: Pos { line: ln + 1, col: chars.len() + 1 } });
    }
    let end = out.last().map(|t| t.pos).unwrap_or(Pos { line: 1, col: 1 });
    out.push(Token { tok: Tok::End, pos: end });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(String, Pos),
    Ident(String, Pos),
    /// O(n): every term of degree ≥ n is unknown.
    BigO(i32, Pos),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, Pos),
    Pow(Box<Expr>, i64, Pos),
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Num(_, p) | Expr::Ident(_, p) | Expr::BigO(_, p) | Expr::Div(_, _, p) | Expr::Pow(_, _, p) => *p,
            Expr::Neg(a) | Expr::Add(a, _) | Expr::Sub(a, _) | Expr::Mul(a, _) => a.pos(),
        }
    }

    pub fn idents(&self, out: &mut Vec<(String, Pos)>) {
        match self {
            Expr::Ident(n, p) => out.push((n.clone(), *p)),
            Expr::Num(..) | Expr::BigO(..) => {}
            Expr::Neg(a) | Expr::Pow(a, _, _) => a.idents(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => {
                a.idents(out);
                b.idents(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChangeSpec {
    pub f: Expr,
    pub psi: Vec<Expr>,
    pub variant: Option<Variant>,
    pub pos: Pos,
}

impl ChangeSpec {
    fn exprs(&self) -> impl Iterator<Item = &Expr> {
        std::iter::once(&self.f).chain(self.psi.iter())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DefValue {
    Expr(Expr),
    Change(ChangeSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Def {
    pub name: String,
    pub value: DefValue,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub name: String,
    pub parity: Parity,
    pub weight: Option<Rational64>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BracketSpec {
    pub a: String,
    pub b: String,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraSpec {
    pub name: String,
    pub variant: Variant,
    pub n: usize,
    pub gens: Vec<GenSpec>,
    pub brackets: Vec<BracketSpec>,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedDocument {
    pub defs: Vec<Def>,
    pub algebras: Vec<AlgebraSpec>,
}

impl ParsedDocument {
    pub fn def(&self, name: &str) -> Option<&Def> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn algebra(&self, name: Option<&str>) -> Option<&AlgebraSpec> {
        match name {
            Some(n) => self.algebras.iter().find(|a| a.name == n),
            None => self.algebras.first(),
        }
    }

    /// Names of the change definitions, in order.
    pub fn changes(&self) -> Vec<&str> {
        self.defs.iter().filter(|d| matches!(d.value, DefValue::Change(_))).map(|d| d.name.as_str()).collect()
    }
}

/// Identifiers with a fixed meaning; they cannot be redefined.
pub fn is_reserved(name: &str) -> bool {
    let indexed = |p: &str| name.strip_prefix(p).is_some_and(|r| !r.is_empty() && r.chars().all(|c| c.is_ascii_digit()));
    matches!(name, "z" | "w" | "i" | "l" | "x" | "T" | "S" | "O" | "let" | "change" | "gen" | "variant" | "algebra")
        || ["th", "ze", "a", "x", "S"].iter().any(|p| indexed(p))
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    /// Newlines are insignificant inside brackets.
    depth: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        Ok(Parser { toks: lex(src)?, at: 0, depth: 0 })
    }

    fn skip_nl(&mut self) {
        while self.depth > 0 && self.toks[self.at].tok == Tok::Newline {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> &Token {
        self.skip_nl();
        &self.toks[self.at]
    }

    fn next(&mut self) -> Token {
        self.skip_nl();
        let t = self.toks[self.at].clone();
        if t.tok != Tok::End {
            self.at += 1;
        }
        t
    }

    fn is_sym(&mut self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<Pos> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(t.pos)
        } else {
            Err(CliError::parse(t.pos, format!("expected '{}', found {}", c, describe(&t.tok))))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => Err(CliError::parse(t.pos, format!("expected a name, found {}", describe(&other)))),
        }
    }

    fn open(&mut self, c: char) -> Result<Pos> {
        let p = self.expect_sym(c)?;
        self.depth += 1;
        Ok(p)
    }

    fn close(&mut self, c: char) -> Result<()> {
        self.expect_sym(c)?;
        self.depth -= 1;
        Ok(())
    }

    fn starts_factor(&mut self) -> bool {
        matches!(self.peek().tok, Tok::Num(_) | Tok::Ident(_) | Tok::Sym('('))
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = if self.eat_sym('-') {
            Expr::Neg(Box::new(self.product()?))
        } else {
            self.eat_sym('+');
            self.product()?
        };
        loop {
            if self.eat_sym('+') {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat_sym('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.power()?;
        loop {
            if self.eat_sym('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.power()?));
            } else if self.is_sym('/') {
                let p = self.next().pos;
                e = Expr::Div(Box::new(e), Box::new(self.power()?), p);
            } else if self.starts_factor() {
                e = Expr::Mul(Box::new(e), Box::new(self.power()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.is_sym('^') {
            let p = self.next().pos;
            let paren = self.eat_sym('(');
            let neg = self.eat_sym('-');
            let t = self.next();
            let Tok::Num(s) = t.tok else {
                return Err(CliError::parse(t.pos, "exponent must be an integer"));
            };
            let k: i64 = s.parse().map_err(|_| CliError::parse(t.pos, "exponent too large"))?;
            if paren {
                self.expect_sym(')')?;
            }
            return Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }, p));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok {
            Tok::Num(s) => Ok(Expr::Num(s, t.pos)),
            Tok::Ident(s) if s == "O" && self.is_sym('(') => {
                self.open('(')?;
                let n = self.next();
                let Tok::Num(v) = n.tok else {
                    return Err(CliError::parse(n.pos, "O(n) needs an integer"));
                };
                self.close(')')?;
                let v: i32 = v.parse().map_err(|_| CliError::parse(n.pos, "order too large"))?;
                Ok(Expr::BigO(v, t.pos))
            }
            Tok::Ident(s) => Ok(Expr::Ident(s, t.pos)),
            Tok::Sym('(') => {
                self.depth += 1;
                let e = self.sum()?;
                self.close(')')?;
                Ok(e)
            }
            other => Err(CliError::parse(t.pos, format!("unexpected {}", describe(&other)))),
        }
    }

    /// `change { F = …, Psi = … }` after the keyword.
    fn change_block(&mut self, pos: Pos) -> Result<ChangeSpec> {
        self.open('{')?;
        let mut f = None;
        let mut psi: Vec<(usize, Expr)> = Vec::new();
        let mut variant = None;
        loop {
            if self.is_sym('}') {
                break;
            }
            let (key, kp) = self.ident()?;
            self.expect_sym('=')?;
            if key == "variant" {
                let (v, vp) = self.ident()?;
                variant = Some(parse_variant(&v).ok_or_else(|| CliError::parse(vp, "variant is nk or nw"))?);
            } else if key == "F" {
                if f.is_some() {
                    return Err(CliError::parse(kp, "F given twice"));
                }
                f = Some(self.sum()?);
            } else if let Some(idx) = psi_index(&key) {
                if psi.iter().any(|(i, _)| *i == idx) {
                    return Err(CliError::parse(kp, format!("{} given twice", key)));
                }
                psi.push((idx, self.sum()?));
            } else {
                return Err(CliError::parse(kp, format!("unknown change component {}", key)));
            }
            if !self.eat_sym(',') && !self.eat_sym(';') {
                break;
            }
        }
        self.close('}')?;
        let f = f.ok_or_else(|| CliError::parse(pos, "change needs F"))?;
        psi.sort_by_key(|(i, _)| *i);
        if psi.iter().enumerate().any(|(k, (i, _))| *i != k + 1) {
            return Err(CliError::parse(pos, "Psi components must be Psi1..PsiN without gaps"));
        }
        Ok(ChangeSpec { f, psi: psi.into_iter().map(|(_, e)| e).collect(), variant, pos })
    }

    /// `(F, Psi1, …)`.
    fn change_tuple(&mut self) -> Result<ChangeSpec> {
        let pos = self.open('(')?;
        let f = self.sum()?;
        let mut psi = Vec::new();
        while self.eat_sym(',') {
            psi.push(self.sum()?);
        }
        self.close(')')?;
        Ok(ChangeSpec { f, psi, variant: None, pos })
    }

    /// A tuple when a top-level comma follows the first component.
    fn looks_like_tuple(&self) -> bool {
        let mut d = 0i32;
        for t in &self.toks[self.at..] {
            match t.tok {
                Tok::Sym('(') | Tok::Sym('[') | Tok::Sym('{') => d += 1,
                Tok::Sym(')') | Tok::Sym(']') | Tok::Sym('}') => {
                    d -= 1;
                    if d == 0 {
                        return false;
                    }
                }
                Tok::Sym(',') if d == 1 => return true,
                Tok::End => return false,
                _ => {}
            }
        }
        false
    }

    fn def_value(&mut self) -> Result<DefValue> {
        if let Tok::Ident(s) = &self.peek().tok {
            if s == "change" {
                let p = self.next().pos;
                return Ok(DefValue::Change(self.change_block(p)?));
            }
        }
        if self.is_sym('(') && self.looks_like_tuple() {
            return Ok(DefValue::Change(self.change_tuple()?));
        }
        Ok(DefValue::Expr(self.sum()?))
    }

    fn end_of_statement(&mut self) -> Result<()> {
        let t = self.next();
        match t.tok {
            Tok::Newline | Tok::End | Tok::Sym(';') => Ok(()),
            other => Err(CliError::parse(t.pos, format!("unexpected {} after statement", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(s) => format!("number {}", s),
        Tok::Ident(s) => format!("'{}'", s),
        Tok::Sym(c) => format!("'{}'", c),
        Tok::Newline => "end of line".into(),
        Tok::End => "end of input".into(),
    }
}

fn psi_index(key: &str) -> Option<usize> {
    if key == "Psi" {
        return Some(1);
    }
    key.strip_prefix("Psi").and_then(|r| r.parse().ok()).filter(|i| *i >= 1)
}

pub fn parse_variant(s: &str) -> Option<Variant> {
    match s.to_ascii_lowercase().as_str() {
        "nk" => Some(Variant::NK),
        "nw" => Some(Variant::NW),
        _ => None,
    }
}

fn parse_weight(p: &mut Parser) -> Result<Rational64> {
    let neg = p.eat_sym('-');
    let t = p.next();
    let Tok::Num(a) = t.tok else {
        return Err(CliError::parse(t.pos, "weight must be a rational p/q"));
    };
    let a: i64 = a.parse().map_err(|_| CliError::parse(t.pos, "weight too large"))?;
    let mut w = Rational64::from(a);
    if p.eat_sym('/') {
        let t = p.next();
        let Tok::Num(b) = t.tok else {
            return Err(CliError::parse(t.pos, "weight must be a rational p/q"));
        };
        let b: i64 = b.parse().map_err(|_| CliError::parse(t.pos, "weight too large"))?;
        if b == 0 {
            return Err(CliError::parse(t.pos, "zero denominator"));
        }
        w /= Rational64::from(b);
    }
    Ok(if neg { -w } else { w })
}

/// Collects presentation lines for one algebra.
struct AlgebraBuilder {
    spec: Option<AlgebraSpec>,
}

impl AlgebraBuilder {
    fn statement(&mut self, p: &mut Parser, word: &str, pos: Pos, name: &str) -> Result<bool> {
        match word {
            "variant" => {
                if self.spec.is_some() {
                    return Err(CliError::parse(pos, "variant header given twice"));
                }
                let (v, vp) = p.ident()?;
                let variant = parse_variant(&v).ok_or_else(|| CliError::parse(vp, "variant is NK or NW"))?;
                let t = p.next();
                let Tok::Num(n) = t.tok else {
                    return Err(CliError::parse(t.pos, "variant header needs N"));
                };
                let n: usize = n.parse().map_err(|_| CliError::parse(t.pos, "N too large"))?;
                if n > 8 {
                    return Err(CliError::parse(t.pos, "N must be at most 8"));
                }
                self.spec = Some(AlgebraSpec { name: name.into(), variant, n, gens: Vec::new(), brackets: Vec::new(), pos });
            }
            "gen" => {
                let spec = self.spec.as_mut().ok_or_else(|| CliError::parse(pos, "gen before the variant header"))?;
                let (g, gp) = p.ident()?;
                if is_reserved(&g) || spec.gens.iter().any(|x| x.name == g) {
                    return Err(CliError::parse(gp, format!("generator name {} is reserved or repeated", g)));
                }
                let (par, pp) = p.ident()?;
                let parity = match par.as_str() {
                    "even" => Parity::Even,
                    "odd" => Parity::Odd,
                    _ => return Err(CliError::parse(pp, "parity is even or odd")),
                };
                let mut weight = None;
                if let Tok::Ident(k) = &p.peek().tok {
                    if k == "weight" {
                        p.next();
                        weight = Some(parse_weight(p)?);
                    }
                }
                spec.gens.push(GenSpec { name: g, parity, weight, pos: gp });
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn bracket(&mut self, p: &mut Parser, pos: Pos) -> Result<()> {
        let spec = self.spec.as_mut().ok_or_else(|| CliError::parse(pos, "bracket before the variant header"))?;
        p.depth += 1;
        let (a, _) = p.ident()?;
        p.expect_sym(',')?;
        let (b, _) = p.ident()?;
        p.close(']')?;
        p.expect_sym('=')?;
        let rhs = p.sum()?;
        for g in [&a, &b] {
            if !spec.gens.iter().any(|x| &x.name == g) {
                return Err(CliError::parse(pos, format!("unknown generator {}", g)));
            }
        }
        if spec.brackets.iter().any(|x| x.a == a && x.b == b) {
            return Err(CliError::parse(pos, format!("[{},{}] given twice", a, b)));
        }
        spec.brackets.push(BracketSpec { a, b, rhs, pos });
        Ok(())
    }
}

/// Parse a document of definitions, change blocks and algebra presentations.
/// Presentation lines outside an `algebra NAME { … }` block form the algebra
/// called `main`.
pub fn parse(src: &str) -> Result<ParsedDocument> {
    let mut p = Parser::new(src)?;
    let mut doc = ParsedDocument::default();
    let mut top = AlgebraBuilder { spec: None };
    let mut names: HashMap<String, Pos> = HashMap::new();
    loop {
        let t = p.next();
        let pos = t.pos;
        match t.tok {
            Tok::End => break,
            Tok::Newline | Tok::Sym(';') => continue,
            Tok::Sym('[') => {
                top.bracket(&mut p, pos)?;
                p.end_of_statement()?;
            }
            Tok::Ident(w) if w == "let" => {
                let (name, np) = p.ident()?;
                if is_reserved(&name) {
                    return Err(CliError::parse(np, format!("{} is a reserved name", name)));
                }
                if let Some(prev) = names.get(&name) {
                    return Err(CliError::parse(np, format!("{} already defined at line {}", name, prev.line)));
                }
                p.expect_sym('=')?;
                let value = p.def_value()?;
                // only earlier definitions may be referenced
                let mut ids = Vec::new();
                match &value {
                    DefValue::Expr(e) => e.idents(&mut ids),
                    DefValue::Change(c) => c.exprs().for_each(|e| e.idents(&mut ids)),
                }
                names.insert(name.clone(), np);
                doc.defs.push(Def { name, value, pos: np });
                for (id, ip) in ids {
                    if id == doc.defs.last().unwrap().name {
                        return Err(CliError::parse(ip, format!("{} refers to itself", id)));
                    }
                }
                p.end_of_statement()?;
            }
            Tok::Ident(w) if w == "algebra" => {
                let (name, _) = p.ident()?;
                p.expect_sym('{')?;
                let mut b = AlgebraBuilder { spec: None };
                loop {
                    let t = p.next();
                    match t.tok {
                        Tok::Sym('}') => break,
                        Tok::Newline | Tok::Sym(';') => continue,
                        Tok::Sym('[') => {
                            b.bracket(&mut p, t.pos)?;
                            if !p.is_sym('}') {
                                p.end_of_statement()?;
                            }
                        }
                        Tok::Ident(w) => {
                            if !b.statement(&mut p, &w, t.pos, &name)? {
                                return Err(CliError::parse(t.pos, format!("unexpected '{}' in algebra block", w)));
                            }
                            if !p.is_sym('}') {
                                p.end_of_statement()?;
                            }
                        }
                        Tok::End => return Err(CliError::parse(t.pos, "unclosed algebra block")),
                        other => return Err(CliError::parse(t.pos, format!("unexpected {}", describe(&other)))),
                    }
                }
                let spec = b.spec.ok_or_else(|| CliError::parse(pos, "algebra block without a variant header"))?;
                if doc.algebras.iter().any(|a| a.name == spec.name) {
                    return Err(CliError::parse(pos, format!("algebra {} defined twice", spec.name)));
                }
                doc.algebras.push(spec);
            }
            Tok::Ident(w) => {
                if !top.statement(&mut p, &w, pos, "main")? {
                    return Err(CliError::parse(pos, format!("unexpected '{}' at start of statement", w)));
                }
                p.end_of_statement()?;
            }
            other => return Err(CliError::parse(pos, format!("unexpected {}", describe(&other)))),
        }
    }
    if let Some(spec) = top.spec {
        doc.algebras.insert(0, spec);
    }
    check_forward_refs(&doc)?;
    Ok(doc)
}

fn check_forward_refs(doc: &ParsedDocument) -> Result<()> {
    for (k, d) in doc.defs.iter().enumerate() {
        let mut ids = Vec::new();
        match &d.value {
            DefValue::Expr(e) => e.idents(&mut ids),
            DefValue::Change(c) => c.exprs().for_each(|e| e.idents(&mut ids)),
        }
        for (id, ip) in ids {
            if doc.defs[k + 1..].iter().any(|x| x.name == id) {
                return Err(CliError::parse(ip, format!("forward reference to {}", id)));
            }
        }
    }
    Ok(())
}

/// A single expression, e.g. a parameter value or a series.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser::new(src)?;
    p.depth = 1;
    let e = p.sum()?;
    let t = p.next();
    if t.tok != Tok::End {
        return Err(CliError::parse(t.pos, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(e)
}

/// An inline change: `change { … }` or `(F, Psi…)`.
pub fn parse_change(src: &str) -> Result<ChangeSpec> {
    let mut p = Parser::new(src)?;
    p.depth = 1;
    let v = p.def_value()?;
    let t = p.next();
    if t.tok != Tok::End {
        return Err(CliError::parse(t.pos, format!("unexpected {}", describe(&t.tok))));
    }
    match v {
        DefValue::Change(c) => Ok(c),
        DefValue::Expr(e) => Err(CliError::parse(e.pos(), "expected a change block or an (F, Psi) tuple")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        // leading sign belongs to the sum: −(z²)
        let e = parse_expr("-z^2").unwrap();
        assert!(matches!(e, Expr::Neg(ref b) if matches!(**b, Expr::Pow(_, 2, _))));
        // inside a product the minus binds first
        let e = parse_expr("2*-z^2").unwrap();
        let Expr::Mul(_, b) = e else { panic!() };
        assert!(matches!(*b, Expr::Pow(ref x, 2, _) if matches!(**x, Expr::Neg(_))));
        let e = parse_expr("z^-2").unwrap();
        assert!(matches!(e, Expr::Pow(_, -2, _)));
        // juxtaposition is a product and binds tighter than +
        let e = parse_expr("2T + 3l").unwrap();
        assert!(matches!(e, Expr::Add(ref a, _) if matches!(**a, Expr::Mul(..))));
    }

    #[test]
    fn change_forms() {
        let d = parse("let r = change { F = z + z^2, Psi = th1*(1+z) }").unwrap();
        assert_eq!(d.changes(), ["r"]);
        let c = parse_change("(z, th1 + a1)").unwrap();
        assert_eq!(c.psi.len(), 1);
        let d = parse("let r = change {\n  F = z,\n  Psi2 = th2,\n  Psi1 = th1,\n  variant = nw\n}\n").unwrap();
        let DefValue::Change(c) = &d.defs[0].value else { panic!() };
        assert_eq!(c.psi.len(), 2);
        assert_eq!(c.variant, Some(Variant::NW));
        assert!(parse("let r = change { F = z, Psi2 = th2 }").is_err());
    }

    #[test]
    fn presentation() {
        let src = "variant NK 1\ngen G odd weight 3/2\n[G,G] = (2T + 3l + x1 S)G + (1/3) l^2 x1 c\n";
        let d = parse(src).unwrap();
        let a = d.algebra(None).unwrap();
        assert_eq!((a.n, a.variant), (1, Variant::NK));
        assert_eq!(a.gens[0].weight, Some(Rational64::new(3, 2)));
        assert_eq!(a.brackets.len(), 1);
        assert!(parse("gen G odd").is_err());
        assert!(parse("variant NK 1\ngen G odd\n[G,H] = 0").is_err());
    }

    #[test]
    fn names_and_references() {
        let d = parse("let f = z + z^2\nlet r = (f, th1)\n").unwrap();
        assert_eq!(d.defs.len(), 2);
        let e = parse("let r = (f, th1)\nlet f = z\n").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 1, col: 10, .. }), "{:?}", e);
        assert!(parse("let f = z\nlet f = z^2").is_err());
        assert!(parse("let th1 = z").is_err());
        assert!(parse("let f = f + z").is_err());
        let e = parse("let f = z +\n").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 1, .. }));
        assert!(matches!(parse("let f = z $ 2"), Err(CliError::Parse { line: 1, col: 11, .. })));
    }
}
