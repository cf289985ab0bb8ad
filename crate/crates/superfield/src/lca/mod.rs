//! SUSY Lie conformal algebras given by generators and Λ-brackets, and the
//! Lie superalgebra of their modes.
//!
//! Conventions. A Λ-bracket is stored as a polynomial in λ, χ^i with
//! coefficients in ∇-words T^k S^K applied to a generator (or to the
//! vacuum, for central terms). The structure modes are
//! a_{(j|J)}b = j!·ε(J)·[coefficient of λ^jχ^J], where
//! ε(J) = (−1)^{s(s−1)/2 + s(N−s)} σ(J, N∖J), s = |J|. This is what the
//! residue of e^{ZΛ}Y(a,Z)b gives once θ^{N∖J}θ^J is brought to θ^{N}.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{reorder_sign, Parity, Qi, Scalar};
use crate::series::Variant;

pub mod catalog;
pub mod ope;
pub mod physics;

pub use catalog::{catalog, catalog_names, CatalogParams};
pub use ope::{ope_distribution, OpeReport};
pub use physics::{
    check_table, expected_bracket, relabel_modes, PhysElement, PhysField, PhysicsBasis, TableReport,
};

/// σ(I, J) with θ^Iθ^J = σ(I,J)θ^{I∪J}.
pub fn sign_sigma(i: u32, j: u32) -> Result<i64> {
    match reorder_sign(i, j) {
        Some(neg) => Ok(if neg { -1 } else { 1 }),
        None => Err(Error::Overlap),
    }
}

/// σ(J, N∖J).
pub fn sign_sigma_full(j: u32, n: usize) -> i64 {
    let full = (1u32 << n) - 1;
    sign_sigma(j & full, full & !j).expect("complement is disjoint")
}

/// Sign relating the coefficient of λ^jχ^J to a_{(j|J)}b.
pub fn epsilon(j: u32, n: usize) -> i64 {
    let s = j.count_ones() as usize;
    let e = s * s.saturating_sub(1) / 2 + s * (n - s);
    let sg = if e % 2 == 0 { 1 } else { -1 };
    sg * sign_sigma_full(j, n)
}

fn factorial(k: u32) -> BigInt {
    (1..=k as i64).fold(BigInt::one(), |a, b| a * BigInt::from(b))
}

fn rq(r: BigRational) -> Qi {
    Qi::new(r, BigRational::zero())
}

fn sq(r: BigRational) -> Scalar {
    Scalar::from_qi(rq(r))
}

/// Product x^A·x^B of ordered monomials in anticommuting letters whose
/// squares are central. Returns the sign, the surviving letters and the
/// number of squares produced.
pub(crate) fn clifford(a: u32, b: u32) -> (i64, u32, u32) {
    let mut cur = a;
    let mut sign = 1i64;
    let mut squares = 0;
    let mut rest = b;
    while rest != 0 {
        let i = rest.trailing_zeros();
        rest &= rest - 1;
        let bit = 1u32 << i;
        let above = if i >= 31 { 0 } else { cur >> (i + 1) };
        if above.count_ones() % 2 == 1 {
            sign = -sign;
        }
        if cur & bit != 0 {
            cur &= !bit;
            squares += 1;
        } else {
            cur |= bit;
        }
    }
    (sign, cur, squares)
}

/// λ^lam χ^chi T^t S^s in this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OpMono {
    pub lam: u32,
    pub chi: u32,
    pub t: u32,
    pub s: u32,
}

impl OpMono {
    pub const ONE: OpMono = OpMono { lam: 0, chi: 0, t: 0, s: 0 };

    pub fn lam(k: u32) -> OpMono {
        OpMono { lam: k, ..OpMono::ONE }
    }
    pub fn chi(i: usize) -> OpMono {
        OpMono { chi: 1 << (i - 1), ..OpMono::ONE }
    }
    pub fn t(k: u32) -> OpMono {
        OpMono { t: k, ..OpMono::ONE }
    }
    pub fn s(i: usize) -> OpMono {
        OpMono { s: 1 << (i - 1), ..OpMono::ONE }
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.chi ^ self.s)
    }

    /// Product in the canonical order, with (χ^i)² = −λ and (S^i)² = T in
    /// the NK variant and both zero in the NW variant.
    pub fn mul(&self, o: &OpMono, variant: Variant) -> Option<(i64, OpMono)> {
        // χ^{J1} S^{K1} χ^{J2}: move χ^{J2} left across S^{K1}
        let mut sign = if (self.s.count_ones() * o.chi.count_ones()) % 2 == 1 { -1 } else { 1 };
        let (s1, chi, nc) = clifford(self.chi, o.chi);
        let (s2, s, ns) = clifford(self.s, o.s);
        if variant == Variant::NW && (nc > 0 || ns > 0) {
            return None;
        }
        sign *= s1 * s2;
        if nc % 2 == 1 {
            sign = -sign;
        }
        Some((sign, OpMono { lam: self.lam + o.lam + nc, chi, t: self.t + o.t + ns, s }))
    }
}

fn fmt_letters(f: &mut Vec<String>, base: &str, mask: u32, n_hint: usize) {
    for i in 0..32 {
        if mask & (1 << i) != 0 {
            if n_hint == 1 {
                f.push(base.to_string());
            } else {
                f.push(format!("{}{}", base, i + 1));
            }
        }
    }
}

/// One term of a Λ-polynomial: an operator monomial applied to a generator,
/// or to the vacuum when `gen` is `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LTerm {
    pub op: OpMono,
    pub gen: Option<usize>,
}

/// Canonical Λ-polynomial with values in ∇-words of generators.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaPoly {
    pub n: usize,
    pub variant: Variant,
    pub terms: BTreeMap<LTerm, Scalar>,
}

impl LambdaPoly {
    pub fn zero(n: usize, variant: Variant) -> LambdaPoly {
        LambdaPoly { n, variant, terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add c·op·g. Terms with T or S acting on the vacuum vanish.
    pub fn push(&mut self, c: Scalar, op: OpMono, gen: Option<usize>) {
        if c.is_zero() || (gen.is_none() && (op.t > 0 || op.s != 0)) {
            return;
        }
        let key = LTerm { op, gen };
        let v = self.terms.entry(key).or_insert_with(Scalar::zero);
        *v += &c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn with(mut self, c: Scalar, op: OpMono, gen: Option<usize>) -> LambdaPoly {
        self.push(c, op, gen);
        self
    }

    pub fn add(&self, o: &LambdaPoly) -> LambdaPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.push(c.clone(), k.op, k.gen);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> LambdaPoly {
        let mut out = LambdaPoly::zero(self.n, self.variant);
        for (k, v) in &self.terms {
            out.push(c.mul(v), k.op, k.gen);
        }
        out
    }

    /// Left multiplication by c·op.
    pub fn lmul(&self, c: &Scalar, op: &OpMono) -> LambdaPoly {
        let mut out = LambdaPoly::zero(self.n, self.variant);
        for (k, v) in &self.terms {
            if let Some((sg, m)) = op.mul(&k.op, self.variant) {
                out.push(c.mul(v).scale(&rq(BigRational::from_integer(sg.into()))), m, k.gen);
            }
        }
        out
    }

    /// Check that every index fits N and that the term parities agree.
    pub fn check(&self, gens: &[Generator], expect: Parity) -> Result<()> {
        let full = (1u32 << self.n) - 1;
        for k in self.terms.keys() {
            if (k.op.chi | k.op.s) & !full != 0 {
                return Err(Error::NonCanonical(format!("index beyond N = {}", self.n)));
            }
            let gp = match k.gen {
                Some(g) => gens.get(g).ok_or_else(|| Error::NonCanonical("unknown generator".into()))?.parity,
                None => Parity::Even,
            };
            if k.op.parity().add(gp) != expect {
                return Err(Error::Parity(format!("term of parity {:?}, expected {:?}", k.op.parity().add(gp), expect)));
            }
        }
        Ok(())
    }

    pub fn display_with(&self, gens: &[Generator]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let mut f = Vec::new();
            if k.op.lam == 1 {
                f.push("l".to_string());
            } else if k.op.lam > 1 {
                f.push(format!("l^{}", k.op.lam));
            }
            fmt_letters(&mut f, "x", k.op.chi, self.n);
            if k.op.t == 1 {
                f.push("T".into());
            } else if k.op.t > 1 {
                f.push(format!("T^{}", k.op.t));
            }
            fmt_letters(&mut f, "S", k.op.s, self.n);
            if let Some(g) = k.gen {
                f.push(gens[g].name.clone());
            }
            let body = f.join(" ");
            let cs = c.to_string();
            parts.push(if body.is_empty() {
                cs
            } else if c.is_one() {
                body
            } else if c.neg().is_one() {
                format!("-{}", body)
            } else {
                format!("({}) {}", cs, body)
            });
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    pub parity: Parity,
    pub weight: Option<Rational64>,
}

/// ∇-words applied to generators or the vacuum: (T-power, S-mask, generator).
pub type Nabla = BTreeMap<(u32, u32, Option<usize>), Scalar>;

fn nabla_push(n: &mut Nabla, key: (u32, u32, Option<usize>), c: Scalar) {
    if c.is_zero() {
        return;
    }
    let v = n.entry(key).or_insert_with(Scalar::zero);
    *v += &c;
    if v.is_zero() {
        n.remove(&key);
    }
}

/// Structure modes of one ordered pair: (j, J) ↦ a_{(j|J)}b.
pub type StructureModes = BTreeMap<(u32, u32), Nabla>;

/// Recover a_{(j|J)}b from the Λ-bracket.
pub fn modes_from_lambda(p: &LambdaPoly) -> Result<StructureModes> {
    let full = (1u32 << p.n) - 1;
    let mut out = StructureModes::new();
    for (k, c) in &p.terms {
        if (k.op.chi | k.op.s) & !full != 0 {
            return Err(Error::NonCanonical(format!("index beyond N = {}", p.n)));
        }
        let f = rq(BigRational::from_integer(factorial(k.op.lam) * epsilon(k.op.chi, p.n)));
        let e = out.entry((k.op.lam, k.op.chi)).or_default();
        nabla_push(e, (k.op.t, k.op.s, k.gen), c.scale(&f));
    }
    out.retain(|_, v| !v.is_empty());
    Ok(out)
}

/// Reassemble [a_Λ b] = Σ ε(J) λ^j/j! χ^J a_{(j|J)}b.
pub fn lambda_from_modes(m: &StructureModes, n: usize, variant: Variant) -> LambdaPoly {
    let mut out = LambdaPoly::zero(n, variant);
    for (&(j, jm), nab) in m {
        let f = rq(BigRational::new(BigInt::from(epsilon(jm, n)), factorial(j)));
        for (&(t, s, g), c) in nab {
            out.push(c.scale(&f), OpMono { lam: j, chi: jm, t, s }, g);
        }
    }
    out
}

/// Structure modes b_{(j|J)}a from those of (a, b), by the skew-symmetry
/// Y(b,Z)a = (−1)^{|a||b|} e^{Z∇} Y(a,−Z)b.
pub fn skew_modes(m: &StructureModes, pa: Parity, pb: Parity, n: usize, variant: Variant) -> StructureModes {
    let full = (1u32 << n) - 1;
    let ab = pa.is_odd() && pb.is_odd();
    let mut out = StructureModes::new();
    for (&(k, kmask), nab) in m {
        let nk = n as u32 - kmask.count_ones();
        // L ⊆ K, J = K ∖ L, and p = k − j
        let mut l = kmask;
        loop {
            let jm = kmask & !l;
            let ll = l.count_ones();
            let mut e = nk as i64 + 1 + k as i64 + (ll * ll.saturating_sub(1) / 2) as i64 + (ll * nk) as i64;
            if ab {
                e += 1;
            }
            let sg = if e % 2 == 0 { 1 } else { -1 } * sign_sigma(l, full & !kmask).unwrap();
            for j in 0..=k {
                let p = k - j;
                let coef = rq(BigRational::new(BigInt::from(sg), factorial(p)));
                let dst = out.entry((j, jm)).or_default();
                for (&(t, s, g), c) in nab {
                    if g.is_none() && (p > 0 || l != 0) {
                        continue;
                    }
                    let lhs = OpMono { t: p, s: l, ..OpMono::ONE };
                    if let Some((s2, mo)) = lhs.mul(&OpMono { t, s, ..OpMono::ONE }, variant) {
                        nabla_push(dst, (mo.t, mo.s, g), c.scale(&coef).scale(&rq(BigRational::from_integer(s2.into()))));
                    }
                }
            }
            if l == 0 {
                break;
            }
            l = (l - 1) & kmask;
        }
    }
    out.retain(|_, v| !v.is_empty());
    out
}

#[derive(Clone, Debug)]
pub struct LCAPresentation {
    pub name: String,
    pub n: usize,
    pub variant: Variant,
    pub gens: Vec<Generator>,
    pub table: BTreeMap<(usize, usize), LambdaPoly>,
}

impl LCAPresentation {
    pub fn new(name: &str, n: usize, variant: Variant) -> LCAPresentation {
        LCAPresentation { name: name.into(), n, variant, gens: Vec::new(), table: BTreeMap::new() }
    }

    pub fn gen(&mut self, name: &str, parity: Parity, weight: Option<Rational64>) -> usize {
        self.gens.push(Generator { name: name.into(), parity, weight });
        self.gens.len() - 1
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn empty_poly(&self) -> LambdaPoly {
        LambdaPoly::zero(self.n, self.variant)
    }

    pub fn set(&mut self, a: usize, b: usize, p: LambdaPoly) -> Result<()> {
        let expect = self.gens[a].parity.add(self.gens[b].parity).add(Parity::from_bool(self.n % 2 == 1));
        p.check(&self.gens, expect)?;
        self.table.insert((a, b), p);
        Ok(())
    }

    /// Fill reversed pairs by skew-symmetry. With `zero_rest`, pairs with
    /// neither order given are set to zero.
    pub fn complete(&mut self, zero_rest: bool) {
        let k = self.gens.len();
        for a in 0..k {
            for b in 0..k {
                if self.table.contains_key(&(a, b)) {
                    continue;
                }
                if let Some(p) = self.table.get(&(b, a)) {
                    let m = modes_from_lambda(p).expect("canonical entry");
                    let r = skew_modes(&m, self.gens[b].parity, self.gens[a].parity, self.n, self.variant);
                    let lp = lambda_from_modes(&r, self.n, self.variant);
                    self.table.insert((a, b), lp);
                } else if zero_rest {
                    self.table.insert((a, b), self.empty_poly());
                }
            }
        }
    }

    pub fn structure_modes(&self, a: usize, b: usize) -> Result<StructureModes> {
        match self.table.get(&(a, b)) {
            Some(p) => modes_from_lambda(p),
            None => Err(Error::MissingStructureConstant(self.gens[a].name.clone(), self.gens[b].name.clone())),
        }
    }

    pub fn full_mask(&self) -> u32 {
        (1u32 << self.n) - 1
    }

    /// |a_{(n|I)}| = |a| + N − |I|.
    pub fn mode_parity(&self, m: &GenMode) -> Parity {
        self.gens[m.0].parity.add(Parity::from_bool((self.n as u32 - m.2.count_ones()) % 2 == 1))
    }

    pub fn display_table(&self) -> String {
        let mut out = String::new();
        for (&(a, b), p) in &self.table {
            out += &format!("[{},{}] = {}\n", self.gens[a].name, self.gens[b].name, p.display_with(&self.gens));
        }
        out
    }
}

/// A generator mode a_{(n|I)}: (generator, n, I).
pub type GenMode = (usize, i64, u32);

/// Finite sum of generator modes plus a central scalar.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ModeElement {
    pub terms: BTreeMap<GenMode, Scalar>,
    pub central: Scalar,
}

impl ModeElement {
    pub fn zero() -> ModeElement {
        ModeElement { terms: BTreeMap::new(), central: Scalar::zero() }
    }

    pub fn mode(m: GenMode) -> ModeElement {
        ModeElement::zero().plus_term(m, Scalar::one())
    }

    pub fn central(c: Scalar) -> ModeElement {
        ModeElement { terms: BTreeMap::new(), central: c }
    }

    /// Vacuum modes reduce to the identity at (−1|N) and vanish otherwise.
    pub fn vacuum_mode(n: i64, mask: u32, nn: usize) -> ModeElement {
        if n == -1 && mask == (1u32 << nn) - 1 {
            ModeElement::central(Scalar::one())
        } else {
            ModeElement::zero()
        }
    }

    pub fn plus_term(mut self, m: GenMode, c: Scalar) -> ModeElement {
        self.push(m, c);
        self
    }

    pub fn push(&mut self, m: GenMode, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(m).or_insert_with(Scalar::zero);
        *v += &c;
        if v.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.central.is_zero()
    }

    pub fn add(&self, o: &ModeElement) -> ModeElement {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.push(*m, c.clone());
        }
        out.central = out.central.add(&o.central);
        out
    }

    pub fn sub(&self, o: &ModeElement) -> ModeElement {
        self.add(&o.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> ModeElement {
        let mut out = ModeElement::zero();
        for (m, v) in &self.terms {
            out.push(*m, c.mul(v));
        }
        out.central = c.mul(&self.central);
        out
    }

    pub fn display_with(&self, alg: &LCAPresentation) -> String {
        let mut parts = Vec::new();
        for (&(g, n, i), c) in &self.terms {
            let idx = if alg.n == 0 { format!("{}", n) } else { format!("{}|{}", n, mask_str(i)) };
            let body = format!("{}_({})", alg.gens[g].name, idx);
            parts.push(if c.is_one() { body } else { format!("({})*{}", c, body) });
        }
        if !self.central.is_zero() || parts.is_empty() {
            parts.push(format!("{}", self.central));
        }
        parts.join(" + ")
    }
}

/// Index set as a string such as "{1,3}".
pub fn mask_str(m: u32) -> String {
    let v: Vec<String> = (0..32).filter(|i| m & (1 << i) != 0).map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

/// Laurent polynomial in one even w and odd ζ^i with rational coefficients.
pub(crate) type WPoly = BTreeMap<(i64, u32), BigRational>;

fn wpush(p: &mut WPoly, k: (i64, u32), c: BigRational) {
    if c.is_zero() {
        return;
    }
    let v = p.entry(k).or_insert_with(BigRational::zero);
    *v += c;
    if v.is_zero() {
        p.remove(&k);
    }
}

fn w_dw(p: &WPoly) -> WPoly {
    let mut out = WPoly::new();
    for (&(e, x), c) in p {
        wpush(&mut out, (e - 1, x), c * BigRational::from_integer(e.into()));
    }
    out
}

/// D^i = ∂_{ζ^i} (NW) or ∂_{ζ^i} + ζ^i∂_w (NK), i zero-based.
pub(crate) fn w_d(p: &WPoly, i: u32, variant: Variant) -> WPoly {
    let bit = 1u32 << i;
    let mut out = WPoly::new();
    for (&(e, x), c) in p {
        let below = (x & (bit - 1)).count_ones();
        let sg = if below % 2 == 0 { c.clone() } else { -c.clone() };
        if x & bit != 0 {
            wpush(&mut out, (e, x & !bit), sg);
        } else if variant == Variant::NK && e != 0 {
            wpush(&mut out, (e - 1, x | bit), sg * BigRational::from_integer(e.into()));
        }
    }
    out
}

/// ∂_w^t D^{k1}(D^{k2}(…)) with the highest index applied first.
pub(crate) fn w_op(p: &WPoly, t: u32, s: u32, variant: Variant) -> WPoly {
    let mut out = p.clone();
    for i in (0..32).rev() {
        if s & (1 << i) != 0 {
            out = w_d(&out, i, variant);
        }
    }
    for _ in 0..t {
        out = w_dw(&out);
    }
    out
}

/// D_W^{(j|J)} W^{n|I} = (−1)^{|J|(|J|+1)/2}/j! ∂_w^j D^J (ζ^I w^n).
pub(crate) fn d_jj_monomial(n: i64, i: u32, j: u32, jm: u32, variant: Variant) -> WPoly {
    let mut p = WPoly::new();
    p.insert((n, i), BigRational::one());
    let q = w_op(&p, j, jm, variant);
    let l = jm.count_ones();
    let mut c = BigRational::new(BigInt::one(), factorial(j));
    if (l * (l + 1) / 2) % 2 == 1 {
        c = -c;
    }
    q.into_iter().map(|(k, v)| (k, v * c.clone())).collect()
}

/// Mode calculus for one presentation, with memoized generator brackets.
pub struct ModeCalc<'a> {
    pub alg: &'a LCAPresentation,
    smodes: HashMap<(usize, usize), StructureModes>,
    cache: RefCell<HashMap<(GenMode, GenMode), ModeElement>>,
}

impl<'a> ModeCalc<'a> {
    pub fn new(alg: &'a LCAPresentation) -> ModeCalc<'a> {
        let mut smodes = HashMap::new();
        for (&(a, b), p) in &alg.table {
            if let Ok(m) = modes_from_lambda(p) {
                smodes.insert((a, b), m);
            }
        }
        ModeCalc { alg, smodes, cache: RefCell::new(HashMap::new()) }
    }

    pub fn structure(&self, a: usize, b: usize) -> Result<&StructureModes> {
        self.smodes
            .get(&(a, b))
            .ok_or_else(|| Error::MissingStructureConstant(self.alg.gens[a].name.clone(), self.alg.gens[b].name.clone()))
    }

    /// Coefficient (to the right) of ζ^X w^e in Y(c, W), c a ∇-combination.
    pub fn field_coeff(&self, c: &Nabla, e: i64, x: u32) -> ModeElement {
        let n = self.alg.n;
        let full = self.alg.full_mask();
        let mut out = ModeElement::zero();
        for (&(t, s, g), coef) in c {
            let g = match g {
                None => {
                    if t == 0 && s == 0 && e == 0 && x == 0 {
                        out.central = out.central.add(coef);
                    }
                    continue;
                }
                Some(g) => g,
            };
            let d = s.count_ones() as i64;
            for e2 in e + t as i64..=e + t as i64 + d {
                for x2 in 0..(1u32 << n) {
                    let mut p = WPoly::new();
                    p.insert((e2, x2), BigRational::one());
                    let q = w_op(&p, t, s, self.alg.variant);
                    if let Some(k) = q.get(&(e, x)) {
                        out.push((g, -1 - e2, full & !x2), coef.scale(&rq(k.clone())));
                    }
                }
            }
        }
        out
    }

    /// [a_{(n|I)}, b_{(m|M)}] for generator modes.
    pub fn gen_bracket(&self, x: GenMode, y: GenMode) -> Result<ModeElement> {
        if let Some(r) = self.cache.borrow().get(&(x, y)) {
            return Ok(r.clone());
        }
        let r = self.gen_bracket_uncached(x, y)?;
        self.cache.borrow_mut().insert((x, y), r.clone());
        Ok(r)
    }

    fn gen_bracket_uncached(&self, x: GenMode, y: GenMode) -> Result<ModeElement> {
        let (a, n, im) = x;
        let (b, m, mm) = y;
        let nn = self.alg.n as u32;
        let full = self.alg.full_mask();
        let target = full & !mm;
        let te = -1 - m;
        let il = im.count_ones();
        let mut out = ModeElement::zero();
        for (&(j, jm), c) in self.structure(a, b)? {
            let jl = jm.count_ones();
            let par = jl * nn + il * nn + il * jl;
            let sg = if par % 2 == 0 { 1 } else { -1 } * sign_sigma_full(jm, self.alg.n) * sign_sigma_full(im, self.alg.n);
            let f = d_jj_monomial(n, im, j, jm, self.alg.variant);
            for (&(fe, fm), fc) in &f {
                if fm & !target != 0 {
                    continue;
                }
                let xm = target & !fm;
                let s2 = sign_sigma(fm, xm).unwrap() * sg;
                let k = fc * BigRational::from_integer(s2.into());
                let part = self.field_coeff(c, te - fe, xm);
                out = out.add(&part.scale(&sq(k)));
            }
        }
        if self.alg.mode_parity(&x).is_odd() && target.count_ones() % 2 == 1 {
            out = out.scale(&Scalar::int(-1));
        }
        Ok(out)
    }

    /// Bilinear extension; coefficients are assumed even.
    pub fn bracket(&self, x: &ModeElement, y: &ModeElement) -> Result<ModeElement> {
        let mut out = ModeElement::zero();
        for (mx, cx) in &x.terms {
            for (my, cy) in &y.terms {
                let r = self.gen_bracket(*mx, *my)?;
                out = out.add(&r.scale(&cx.mul(cy)));
            }
        }
        Ok(out)
    }
}

/// [x, y] for two mode elements of `alg`.
pub fn mode_bracket(x: &ModeElement, y: &ModeElement, alg: &LCAPresentation) -> Result<ModeElement> {
    ModeCalc::new(alg).bracket(x, y)
}

#[derive(Clone, Debug, Default)]
pub struct ConsistencyReport {
    pub pairs: usize,
    pub triples: usize,
    pub antisymmetry_failures: Vec<String>,
    pub jacobi_failures: Vec<String>,
}

impl ConsistencyReport {
    pub fn antisymmetry(&self) -> bool {
        self.antisymmetry_failures.is_empty()
    }
    pub fn jacobi(&self) -> bool {
        self.jacobi_failures.is_empty()
    }
}

/// Generator modes with |n| ≤ window and every index set.
pub fn window_modes(alg: &LCAPresentation, window: i64) -> Vec<GenMode> {
    let mut v = Vec::new();
    for g in 0..alg.gens.len() {
        for n in -window..=window {
            for i in 0..(1u32 << alg.n) {
                v.push((g, n, i));
            }
        }
    }
    v
}

/// Super-antisymmetry on all pairs with |n| ≤ window; graded Jacobi on
/// triples with |n₁| + |n₂| + |n₃| ≤ window.
pub fn check_mode_consistency(alg: &LCAPresentation, window: i64) -> Result<ConsistencyReport> {
    let calc = ModeCalc::new(alg);
    let modes = window_modes(alg, window);
    let mut rep = ConsistencyReport::default();
    let name = |m: &GenMode| format!("{}_({}|{})", alg.gens[m.0].name, m.1, mask_str(m.2));
    let sgn = |x: &GenMode, y: &GenMode| {
        if alg.mode_parity(x).is_odd() && alg.mode_parity(y).is_odd() {
            Scalar::int(-1)
        } else {
            Scalar::one()
        }
    };
    for x in &modes {
        for y in &modes {
            rep.pairs += 1;
            let xy = calc.gen_bracket(*x, *y)?;
            let yx = calc.gen_bracket(*y, *x)?;
            if !xy.add(&yx.scale(&sgn(x, y))).is_zero() {
                rep.antisymmetry_failures.push(format!("[{}, {}]", name(x), name(y)));
            }
        }
    }
    for x in &modes {
        for y in &modes {
            if x.1.abs() + y.1.abs() > window {
                continue;
            }
            for z in &modes {
                if x.1.abs() + y.1.abs() + z.1.abs() > window {
                    continue;
                }
                rep.triples += 1;
                let yz = ModeElement::mode(*y);
                let lhs = calc.bracket(&ModeElement::mode(*x), &calc.gen_bracket(*y, *z)?)?;
                let xy = calc.gen_bracket(*x, *y)?;
                let r1 = calc.bracket(&xy, &ModeElement::mode(*z))?;
                let xz = calc.gen_bracket(*x, *z)?;
                let r2 = calc.bracket(&yz, &xz)?.scale(&sgn(x, y));
                if !lhs.sub(&r1).sub(&r2).is_zero() {
                    rep.jacobi_failures.push(format!("({}, {}, {})", name(x), name(y), name(z)));
                }
            }
        }
    }
    Ok(rep)
}

pub(crate) fn rat(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub(crate) fn is_integral(r: &Rational64) -> bool {
    r.denom().abs() == 1
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.parity.is_odd() { "odd" } else { "even" };
        match self.weight {
            Some(w) => write!(f, "gen {} {} weight {}", self.name, p, w),
            None => write!(f, "gen {} {}", self.name, p),
        }
    }
}

#[cfg(test)]
mod tests;
