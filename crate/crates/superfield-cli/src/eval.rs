//! Evaluation of parsed expressions as scalars, series, changes and
//! Λ-polynomials.

use std::collections::BTreeMap;

use superfield::disk::CoordinateChange;
use superfield::lca::{LCAPresentation, LTerm, LambdaPoly, OpMono};
use superfield::{Chart, Scalar, SuperSeries, Variant};

use crate::error::{CliError, Pos, Result};
use crate::parse::{AlgebraSpec, ChangeSpec, DefValue, Expr, ParsedDocument};

pub struct Eval<'a> {
    pub doc: Option<&'a ParsedDocument>,
    /// Grassmann generators a1..ak available to literals.
    pub grassmann: u32,
}

fn indexed(name: &str, prefix: &str) -> Option<usize> {
    let r = name.strip_prefix(prefix)?;
    if r.is_empty() || !r.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    r.parse().ok()
}

fn number(s: &str) -> Scalar {
    let chunk = Scalar::int(1_000_000_000);
    let mut out = Scalar::zero();
    let digits = s.as_bytes();
    let head = digits.len() % 9;
    let mut parts: Vec<&[u8]> = Vec::new();
    if head > 0 {
        parts.push(&digits[..head]);
    }
    parts.extend(digits[head..].chunks(9));
    for p in parts {
        let v: i64 = std::str::from_utf8(p).unwrap().parse().unwrap();
        out = out.mul(&chunk).add(&Scalar::int(v));
    }
    out
}

/// Grassmann literal a_k, checked against the session's generator count.
fn grassmann(name: &str, k: u32, pos: Pos) -> Result<Option<Scalar>> {
    match indexed(name, "a") {
        Some(i) if i >= 1 && i as u32 <= k => Ok(Some(Scalar::gen(i as u32))),
        Some(i) => Err(CliError::parse(pos, format!("a{} exceeds the {} Grassmann generators of this session", i, k))),
        None => Ok(None),
    }
}

fn is_series_var(name: &str) -> bool {
    matches!(name, "z" | "w") || indexed(name, "th").is_some() || indexed(name, "ze").is_some()
}

fn is_lambda_var(name: &str) -> bool {
    matches!(name, "l" | "x" | "T" | "S") || indexed(name, "x").is_some() || indexed(name, "S").is_some()
}

impl<'a> Eval<'a> {
    pub fn new(doc: Option<&'a ParsedDocument>, grassmann: u32) -> Eval<'a> {
        Eval { doc, grassmann }
    }

    fn def_expr(&self, name: &str, pos: Pos) -> Result<Option<&'a Expr>> {
        let Some(doc) = self.doc else { return Ok(None) };
        match doc.def(name).map(|d| &d.value) {
            Some(DefValue::Expr(e)) => Ok(Some(e)),
            Some(DefValue::Change(_)) => Err(CliError::parse(pos, format!("{} is a change, not a value", name))),
            None => Ok(None),
        }
    }

    /// Constants: rationals, i, Grassmann generators and parameters.
    pub fn scalar(&self, e: &Expr) -> Result<Scalar> {
        Ok(match e {
            Expr::Num(s, _) => number(s),
            Expr::Ident(n, p) => {
                if n == "i" {
                    Scalar::i()
                } else if let Some(g) = grassmann(n, self.grassmann, *p)? {
                    g
                } else if is_series_var(n) || is_lambda_var(n) || n == "O" {
                    return Err(CliError::parse(*p, format!("{} is not a constant", n)));
                } else if let Some(d) = self.def_expr(n, *p)? {
                    self.scalar(d)?
                } else {
                    Scalar::param(n)
                }
            }
            Expr::BigO(_, p) => return Err(CliError::parse(*p, "O(n) is not a constant")),
            Expr::Neg(a) => self.scalar(a)?.neg(),
            Expr::Add(a, b) => self.scalar(a)?.add(&self.scalar(b)?),
            Expr::Sub(a, b) => self.scalar(a)?.sub(&self.scalar(b)?),
            Expr::Mul(a, b) => self.scalar(a)?.mul(&self.scalar(b)?),
            Expr::Div(a, b, _) => self.scalar(a)?.mul(&self.scalar(b)?.invert()?),
            Expr::Pow(a, k, _) => {
                let base = self.scalar(a)?;
                if *k >= 0 {
                    base.pow(*k as u32)
                } else {
                    base.invert()?.pow(k.unsigned_abs() as u32)
                }
            }
        })
    }

    pub fn series(&self, e: &Expr, chart: Chart, trunc: i32) -> Result<SuperSeries> {
        let konst = |c: Scalar| SuperSeries::constant(chart, trunc, c);
        Ok(match e {
            Expr::Ident(n, p) if is_series_var(n) => {
                if n == "z" {
                    SuperSeries::z(chart, trunc)
                } else if let Some(i) = indexed(n, "th") {
                    if i == 0 || i > chart.n {
                        return Err(CliError::parse(*p, format!("{} needs N ≥ {}, this change has N = {}", n, i, chart.n)));
                    }
                    SuperSeries::theta(chart, trunc, i)
                } else {
                    return Err(CliError::parse(*p, format!("{} only appears in two-point series", n)));
                }
            }
            Expr::Ident(n, p) => match self.def_expr(n, *p)? {
                Some(d) => self.series(d, chart, trunc)?,
                None => konst(self.scalar(e)?),
            },
            Expr::Num(..) => konst(self.scalar(e)?),
            Expr::BigO(k, _) => SuperSeries::zero(chart, k - 1),
            Expr::Neg(a) => self.series(a, chart, trunc)?.neg(),
            Expr::Add(a, b) => self.series(a, chart, trunc)?.add(&self.series(b, chart, trunc)?),
            Expr::Sub(a, b) => self.series(a, chart, trunc)?.sub(&self.series(b, chart, trunc)?),
            Expr::Mul(a, b) => self.series(a, chart, trunc)?.mul(&self.series(b, chart, trunc)?),
            Expr::Div(a, b, _) => self.series(a, chart, trunc)?.div(&self.series(b, chart, trunc)?)?,
            Expr::Pow(a, k, _) => {
                let base = self.series(a, chart, trunc)?;
                if *k >= 0 {
                    base.pow(*k as u32)
                } else {
                    base.invert()?.pow(k.unsigned_abs() as u32)
                }
            }
        })
    }

    /// N is the number of Ψ components; `complex` selects the θ⁺, θ⁻ chart.
    pub fn change(&self, spec: &ChangeSpec, trunc: i32, complex: bool, variant: Variant) -> Result<CoordinateChange> {
        let n = spec.psi.len();
        let chart = if complex {
            if n != 2 {
                return Err(CliError::parse(spec.pos, format!("complex N = 2 chart needs two Psi components, got {}", n)));
            }
            Chart::complex2()
        } else {
            Chart::new(n)
        };
        let f = self.series(&spec.f, chart, trunc)?;
        let psi = spec.psi.iter().map(|e| self.series(e, chart, trunc)).collect::<Result<Vec<_>>>()?;
        Ok(CoordinateChange::new(f, psi, spec.variant.unwrap_or(variant))?)
    }

    pub fn lambda(&self, e: &Expr, alg: &LCAPresentation) -> Result<LExpr> {
        let one = |op: OpMono, gen: Option<usize>| LExpr::single(op, gen, Scalar::one());
        Ok(match e {
            Expr::Ident(n, p) => {
                if let Some(g) = alg.index(n) {
                    one(OpMono::ONE, Some(g))
                } else if n == "l" {
                    one(OpMono::lam(1), None)
                } else if n == "T" {
                    one(OpMono::t(1), None)
                } else if n == "x" || n == "S" || indexed(n, "x").is_some() || indexed(n, "S").is_some() {
                    let i = if n.len() == 1 {
                        if alg.n != 1 {
                            return Err(CliError::parse(*p, format!("bare {} is only allowed when N = 1", n)));
                        }
                        1
                    } else {
                        indexed(n, &n[..1]).unwrap()
                    };
                    if i == 0 || i > alg.n {
                        return Err(CliError::parse(*p, format!("{} needs N ≥ {}", n, i)));
                    }
                    one(if n.starts_with('x') { OpMono::chi(i) } else { OpMono::s(i) }, None)
                } else if indexed(n, "a").is_some() {
                    return Err(CliError::parse(*p, "Grassmann constants are not allowed in structure constants"));
                } else {
                    LExpr::single(OpMono::ONE, None, self.scalar(e)?)
                }
            }
            Expr::Num(..) => LExpr::single(OpMono::ONE, None, self.scalar(e)?),
            Expr::BigO(_, p) => return Err(CliError::parse(*p, "O(n) is not allowed in a bracket")),
            Expr::Neg(a) => self.lambda(a, alg)?.scale(&Scalar::int(-1)),
            Expr::Add(a, b) => self.lambda(a, alg)?.add(&self.lambda(b, alg)?),
            Expr::Sub(a, b) => self.lambda(a, alg)?.add(&self.lambda(b, alg)?.scale(&Scalar::int(-1))),
            Expr::Mul(a, b) => self.lambda(a, alg)?.mul(&self.lambda(b, alg)?, alg.variant, a.pos())?,
            Expr::Div(a, b, p) => {
                let d = self.lambda(b, alg)?.as_scalar().ok_or_else(|| CliError::parse(*p, "can only divide by a constant"))?;
                self.lambda(a, alg)?.scale(&d.invert()?)
            }
            Expr::Pow(a, k, p) => {
                if *k < 0 {
                    return Err(CliError::parse(*p, "negative powers are not allowed in a bracket"));
                }
                let base = self.lambda(a, alg)?;
                let mut out = one(OpMono::ONE, None);
                for _ in 0..*k {
                    out = out.mul(&base, alg.variant, *p)?;
                }
                out
            }
        })
    }

    /// Build a presentation; reversed pairs come from skew-symmetry and
    /// pairs given in neither order stay undefined.
    pub fn algebra(&self, spec: &AlgebraSpec) -> Result<LCAPresentation> {
        let mut alg = LCAPresentation::new(&spec.name, spec.n, spec.variant);
        for g in &spec.gens {
            alg.gen(&g.name, g.parity, g.weight);
        }
        for b in &spec.brackets {
            let a = alg.index(&b.a).unwrap();
            let c = alg.index(&b.b).unwrap();
            let p = self.lambda(&b.rhs, &alg)?.into_poly(&alg);
            alg.set(a, c, p).map_err(|e| match e {
                superfield::Error::Parity(m) => CliError::Parity(format!("[{},{}] at line {}: {}", b.a, b.b, b.pos.line, m)),
                superfield::Error::NonCanonical(m) => CliError::parse(b.pos, m),
                other => other.into(),
            })?;
        }
        alg.complete(false);
        Ok(alg)
    }
}

/// Λ-expression during evaluation. Unlike a finished Λ-polynomial it keeps
/// T and S on the vacuum, since a generator may still be multiplied in.
#[derive(Clone, Debug, Default)]
pub struct LExpr(BTreeMap<LTerm, Scalar>);

impl LExpr {
    fn single(op: OpMono, gen: Option<usize>, c: Scalar) -> LExpr {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(LTerm { op, gen }, c);
        }
        LExpr(m)
    }

    fn push(&mut self, k: LTerm, c: Scalar) {
        let v = self.0.entry(k).or_insert_with(Scalar::zero);
        *v += &c;
        if v.is_zero() {
            self.0.remove(&k);
        }
    }

    fn add(&self, o: &LExpr) -> LExpr {
        let mut out = self.clone();
        for (k, c) in &o.0 {
            out.push(*k, c.clone());
        }
        out
    }

    fn scale(&self, s: &Scalar) -> LExpr {
        let mut out = LExpr::default();
        for (k, c) in &self.0 {
            out.push(*k, c.mul(s));
        }
        out
    }

    fn as_scalar(&self) -> Option<Scalar> {
        let mut s = Scalar::zero();
        for (k, c) in &self.0 {
            if k.op != OpMono::ONE || k.gen.is_some() {
                return None;
            }
            s = s.add(c);
        }
        Some(s)
    }

    /// Operators compose left to right and act on at most one generator,
    /// which must stand rightmost.
    fn mul(&self, o: &LExpr, variant: Variant, pos: Pos) -> Result<LExpr> {
        let mut out = LExpr::default();
        for (ka, ca) in &self.0 {
            for (kb, cb) in &o.0 {
                if ka.gen.is_some() {
                    if kb.op != OpMono::ONE || kb.gen.is_some() {
                        return Err(CliError::parse(pos, "operators and generators must stand left of the generator"));
                    }
                    out.push(*ka, ca.mul(cb));
                    continue;
                }
                if let Some((sg, m)) = ka.op.mul(&kb.op, variant) {
                    out.push(LTerm { op: m, gen: kb.gen }, ca.mul(cb).mul(&Scalar::int(sg)));
                }
            }
        }
        Ok(out)
    }

    fn into_poly(self, alg: &LCAPresentation) -> LambdaPoly {
        let mut p = alg.empty_poly();
        for (k, c) in self.0 {
            p.push(c, k.op, k.gen);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse, parse_expr};
    use superfield::lca::catalog;

    fn ev() -> Eval<'static> {
        Eval::new(None, 4)
    }

    #[test]
    fn scalars() {
        let s = ev().scalar(&parse_expr("3/2 c - a2 a1").unwrap()).unwrap();
        assert_eq!(s.to_string(), "a1*a2 + 3/2*c");
        assert_eq!(ev().scalar(&parse_expr("(1 + i)^2").unwrap()).unwrap(), Scalar::i().mul(&Scalar::int(2)));
        assert_eq!(ev().scalar(&parse_expr("123456789012345678901/123456789012345678901").unwrap()).unwrap(), Scalar::one());
        assert!(ev().scalar(&parse_expr("a5").unwrap()).is_err());
        assert!(ev().scalar(&parse_expr("z").unwrap()).is_err());
        assert_eq!(ev().scalar(&parse_expr("t^-1 t").unwrap()).unwrap(), Scalar::one());
    }

    #[test]
    fn series_and_truncation() {
        let ch = Chart::new(1);
        let s = ev().series(&parse_expr("z + z^2 + z^5 + O(4)").unwrap(), ch, 6).unwrap();
        assert_eq!(s.trunc(), 3);
        assert_eq!(s.to_string(), "z + z^2");
        let s = ev().series(&parse_expr("1/(1 - z)").unwrap(), ch, 3).unwrap();
        assert_eq!(s.to_string(), "1 + z + z^2 + z^3");
        assert!(ev().series(&parse_expr("th2").unwrap(), ch, 3).is_err());
    }

    #[test]
    fn parity_error_on_bad_change() {
        let d = parse("let bad = change { F = th1, Psi = z }").unwrap();
        let DefValue::Change(c) = &d.defs[0].value else { panic!() };
        let e = Eval::new(Some(&d), 4).change(c, 4, false, Variant::NK).unwrap_err();
        assert!(matches!(e, CliError::Parity(_)), "{:?}", e);
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn k1_bracket_line() {
        let src = "variant NK 1\ngen G odd weight 3/2\n[G,G] = (2T + 3l + x1 S)G + (1/3) l^2 x1 c\n";
        let d = parse(src).unwrap();
        let alg = ev().algebra(d.algebra(None).unwrap()).unwrap();
        let k = catalog("k", &catalog::CatalogParams { n: 1, ..Default::default() }).unwrap();
        assert_eq!(alg.table[&(0, 0)], k.table[&(0, 0)]);
    }

    #[test]
    fn bracket_errors() {
        let bad = "variant NK 1\ngen G odd\n[G,G] = G T\n";
        assert!(ev().algebra(parse(bad).unwrap().algebra(None).unwrap()).is_err());
        let odd = "variant NK 1\ngen G odd\n[G,G] = x1 G\n";
        let e = ev().algebra(parse(odd).unwrap().algebra(None).unwrap()).unwrap_err();
        assert!(matches!(e, CliError::Parity(_)));
    }
}
