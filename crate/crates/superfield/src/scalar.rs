//! Exact coefficients: ℚ(i) with free commuting parameters, tensored with a
//! finite exterior algebra on generators α₁, α₂, ….
//!
//! Parameters may carry negative exponents so that a monomial body such as
//! `t` can be inverted; anything else with a non-monomial body is rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::AddAssign;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// An element of ℚ(i).
pub type Qi = Complex<BigRational>;

pub fn qi_int(n: i64) -> Qi {
    Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
}

pub fn qi_frac(p: i64, q: i64) -> Qi {
    Complex::new(
        BigRational::new(BigInt::from(p), BigInt::from(q)),
        BigRational::zero(),
    )
}

pub fn qi_i() -> Qi {
    Complex::new(BigRational::zero(), BigRational::one())
}

/// Sign of reordering the product of two exterior monomials into increasing
/// order. `None` when the monomials overlap (the product vanishes).
pub fn reorder_sign(a: u32, b: u32) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut neg = false;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        let above = if j >= 31 { 0 } else { a >> (j + 1) };
        if above.count_ones() % 2 == 1 {
            neg = !neg;
        }
        rest &= rest - 1;
    }
    Some(neg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(bits: u32) -> Parity {
        if bits.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
    pub fn add(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
    pub fn from_bool(odd: bool) -> Parity {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Monomial in the named parameters, sorted by name, exponents nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PMono(Vec<(Arc<str>, i32)>);

impl PMono {
    pub fn one() -> PMono {
        PMono(Vec::new())
    }

    pub fn var(name: &str) -> PMono {
        PMono(vec![(Arc::from(name), 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Arc<str>, i32)] {
        &self.0
    }

    pub fn mul(&self, other: &PMono) -> PMono {
        if other.0.is_empty() {
            return self.clone();
        }
        if self.0.is_empty() {
            return other.clone();
        }
        let mut out: Vec<(Arc<str>, i32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            if j >= other.0.len() || (i < self.0.len() && self.0[i].0 < other.0[j].0) {
                out.push(self.0[i].clone());
                i += 1;
            } else if i >= self.0.len() || other.0[j].0 < self.0[i].0 {
                out.push(other.0[j].clone());
                j += 1;
            } else {
                let e = self.0[i].1 + other.0[j].1;
                if e != 0 {
                    out.push((self.0[i].0.clone(), e));
                }
                i += 1;
                j += 1;
            }
        }
        PMono(out)
    }

    pub fn inverse(&self) -> PMono {
        PMono(self.0.iter().map(|(n, e)| (n.clone(), -e)).collect())
    }

    fn degree_of(&self, name: &str) -> i32 {
        self.0
            .iter()
            .find(|(n, _)| &**n == name)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    fn without(&self, name: &str) -> PMono {
        PMono(self.0.iter().filter(|(n, _)| &**n != name).cloned().collect())
    }
}

/// Grassmann-valued exact scalar. Keys are (parameter monomial, exterior
/// monomial as a bitmask with bit k standing for α_{k+1}).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Scalar {
    terms: BTreeMap<(PMono, u32), Qi>,
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar { terms: BTreeMap::new() }
    }

    pub fn one() -> Scalar {
        Scalar::from_qi(qi_int(1))
    }

    pub fn from_qi(q: Qi) -> Scalar {
        Scalar::term(q, PMono::one(), 0)
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::from_qi(qi_int(n))
    }

    pub fn frac(p: i64, q: i64) -> Scalar {
        Scalar::from_qi(qi_frac(p, q))
    }

    pub fn i() -> Scalar {
        Scalar::from_qi(qi_i())
    }

    /// A free even parameter such as `c` or `m`.
    pub fn param(name: &str) -> Scalar {
        Scalar::term(qi_int(1), PMono::var(name), 0)
    }

    /// The Grassmann generator α_k (k ≥ 1).
    pub fn gen(k: u32) -> Scalar {
        assert!((1..=32).contains(&k), "Grassmann generator index out of range");
        Scalar::term(qi_int(1), PMono::one(), 1 << (k - 1))
    }

    pub fn term(q: Qi, p: PMono, mask: u32) -> Scalar {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert((p, mask), q);
        }
        Scalar { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMono, u32, &Qi)> {
        self.terms.iter().map(|((p, m), q)| (p, *m, q))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        *self == Scalar::one()
    }

    /// The plain number if this scalar has no parameters and no Grassmann part.
    pub fn as_qi(&self) -> Option<Qi> {
        if self.terms.is_empty() {
            return Some(qi_int(0));
        }
        if self.terms.len() == 1 {
            let ((p, m), q) = self.terms.iter().next().unwrap();
            if p.is_one() && *m == 0 {
                return Some(q.clone());
            }
        }
        None
    }

    fn add_term(&mut self, key: (PMono, u32), q: Qi) {
        if q.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v = &*v + q;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, q);
            }
        }
    }

    /// Grassmann parity; `None` for a mixed scalar. Zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|(_, m)| Parity::of(*m));
        let first = match it.next() {
            Some(p) => p,
            None => return Some(Parity::Even),
        };
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn part(&self, parity: Parity) -> Scalar {
        Scalar {
            terms: self
                .terms
                .iter()
                .filter(|((_, m), _)| Parity::of(*m) == parity)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Reduction modulo nilpotents.
    pub fn body(&self) -> Scalar {
        Scalar {
            terms: self
                .terms
                .iter()
                .filter(|((_, m), _)| *m == 0)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn grassmann_support(&self) -> u32 {
        self.terms.keys().fold(0, |acc, (_, m)| acc | m)
    }

    pub fn scale(&self, q: &Qi) -> Scalar {
        if q.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * q)).collect(),
        }
    }

    /// Multiply every term by ±1 according to `f(mask)`.
    pub fn sign_by(&self, f: impl Fn(u32) -> bool) -> Scalar {
        Scalar {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), if f(k.1) { -v.clone() } else { v.clone() }))
                .collect(),
        }
    }

    /// Apply the grading automorphism a ↦ (−1)^{|a|} a.
    pub fn grade_involution(&self) -> Scalar {
        self.sign_by(|m| m.count_ones() % 2 == 1)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for ((pa, ma), qa) in &self.terms {
            for ((pb, mb), qb) in &other.terms {
                if let Some(neg) = reorder_sign(*ma, *mb) {
                    let q = qa * qb;
                    let q = if neg { -q } else { q };
                    out.add_term((pa.mul(pb), ma | mb), q);
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut out = Scalar::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Inverse via the geometric series in the nilpotent part. The body must
    /// be a single nonzero term (a number times a parameter monomial).
    pub fn invert(&self) -> Result<Scalar> {
        let body = self.body();
        if body.terms.len() != 1 {
            return Err(Error::NotInvertible(format!("scalar with body {}", body)));
        }
        let ((p, _), q) = body.terms.iter().next().unwrap();
        let binv = Scalar::term(q.inv(), p.inverse(), 0);
        // self = body·(1 + n), n nilpotent
        let n = binv.mul(self).sub(&Scalar::one());
        let mut sum = Scalar::one();
        let mut pw = Scalar::one();
        let neg_n = n.neg();
        loop {
            pw = pw.mul(&neg_n);
            if pw.is_zero() {
                break;
            }
            sum = sum.add(&pw);
        }
        Ok(sum.mul(&binv))
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), -v.clone());
        }
        out
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
        }
    }

    /// Substitute a number for a parameter.
    pub fn subst_param(&self, name: &str, value: &Qi) -> Scalar {
        let mut out = Scalar::zero();
        for ((p, m), q) in &self.terms {
            let e = p.degree_of(name);
            if e == 0 {
                out.add_term((p.clone(), *m), q.clone());
                continue;
            }
            if value.is_zero() {
                if e < 0 {
                    // a pole at zero; keep the term rather than divide by zero
                    out.add_term((p.clone(), *m), q.clone());
                }
                continue;
            }
            let mut f = qi_int(1);
            let base = if e > 0 { value.clone() } else { value.inv() };
            for _ in 0..e.abs() {
                f = f * base.clone();
            }
            out.add_term((p.without(name), *m), q * f);
        }
        out
    }

    /// Remove Grassmann generator `bit` from terms that contain it, treating
    /// it as sitting at the far right of each exterior monomial. Terms
    /// without it are dropped.
    pub fn strip_generator_right(&self, bit: u32) -> Scalar {
        let b = 1u32 << bit;
        let mut out = Scalar::zero();
        for ((p, m), q) in &self.terms {
            if m & b == 0 {
                continue;
            }
            let rest = m & !b;
            // α^{rest}·α_b = sign · α^{m}
            let neg = reorder_sign(rest, b).unwrap();
            out.add_term((p.clone(), rest), if neg { -q.clone() } else { q.clone() });
        }
        out
    }

    pub fn mentions_generator(&self, bit: u32) -> bool {
        self.terms.keys().any(|(_, m)| m & (1 << bit) != 0)
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        for (k, v) in &rhs.terms {
            self.add_term(k.clone(), v.clone());
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text for an element of ℚ(i), parenthesized when it has two parts.
pub fn fmt_qi(q: &Qi) -> String {
    match (q.re.is_zero(), q.im.is_zero()) {
        (true, true) => "0".into(),
        (false, true) => fmt_rat(&q.re),
        (true, false) => {
            if q.im.is_one() {
                "i".into()
            } else if (-q.im.clone()).is_one() {
                "-i".into()
            } else {
                format!("{}*i", fmt_rat(&q.im))
            }
        }
        (false, false) => {
            let mag = q.im.abs();
            let body = if mag.is_one() { "i".to_string() } else { format!("{}*i", fmt_rat(&mag)) };
            let im = if q.im.is_negative() {
                format!(" - {}", body)
            } else {
                format!(" + {}", body)
            };
            format!("({}{})", fmt_rat(&q.re), im)
        }
    }
}

pub(crate) fn fmt_factors(p: &PMono, mask: u32) -> Vec<String> {
    let mut f = Vec::new();
    for (n, e) in p.factors() {
        if *e == 1 {
            f.push(n.to_string());
        } else {
            f.push(format!("{}^{}", n, e));
        }
    }
    let mut m = mask;
    while m != 0 {
        let k = m.trailing_zeros();
        f.push(format!("a{}", k + 1));
        m &= m - 1;
    }
    f
}

/// Write `coef * factors` joined into a sum, handling signs and unit coefficients.
pub(crate) fn push_term(out: &mut String, q: &Qi, factors: &[String]) {
    let neg = q.im.is_zero() && q.re.is_negative();
    let mag = if neg { -q.clone() } else { q.clone() };
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    let c = fmt_qi(&mag);
    if factors.is_empty() {
        out.push_str(&c);
    } else {
        if c != "1" {
            out.push_str(&c);
            out.push('*');
        }
        out.push_str(&factors.join("*"));
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut s = String::new();
        for ((p, m), q) in &self.terms {
            push_term(&mut s, q, &fmt_factors(p, *m));
        }
        write!(f, "{}", s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(k: u32) -> Scalar {
        Scalar::gen(k)
    }

    #[test]
    fn exterior_signs() {
        assert_eq!(a(1).mul(&a(2)).add(&a(2).mul(&a(1))), Scalar::zero());
        assert!(a(1).mul(&a(1)).is_zero());
        let x = Scalar::one().add(&a(1).mul(&a(2)));
        let y = Scalar::one().sub(&a(1).mul(&a(2)));
        assert!(x.mul(&y).is_one());
    }

    #[test]
    fn body_and_inverse() {
        let x = Scalar::int(3).add(&a(1).mul(&a(2)).scale(&qi_int(2)));
        assert_eq!(x.body(), Scalar::int(3));
        assert!(a(1).body().is_zero());
        let c = Scalar::param("c").add(&Scalar::param("m").mul(&a(1)).mul(&a(2)));
        assert_eq!(c.body(), Scalar::param("c"));
        let inv = Scalar::one().add(&a(1).mul(&a(2))).invert().unwrap();
        assert_eq!(inv, Scalar::one().sub(&a(1).mul(&a(2))));
        assert_eq!(Scalar::int(2).invert().unwrap(), Scalar::frac(1, 2));
        assert!(matches!(a(1).invert(), Err(Error::NotInvertible(_))));
        let t = Scalar::param("t").add(&a(1).mul(&a(3)));
        assert!(t.mul(&t.invert().unwrap()).is_one());
    }

    #[test]
    fn i_squared() {
        assert_eq!(Scalar::i().mul(&Scalar::i()), Scalar::int(-1));
    }

    #[test]
    fn display() {
        let x = Scalar::frac(-3, 2).mul(&Scalar::param("c")).add(&a(2).mul(&a(1)));
        assert_eq!(x.to_string(), "-a1*a2 - 3/2*c");
        assert_eq!(Scalar::i().add(&Scalar::int(1)).to_string(), "(1 + i)");
    }
}
