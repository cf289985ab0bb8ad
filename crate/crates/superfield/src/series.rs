//! Truncated super-series in one chart Z = (z, θ¹..θᴺ) or a pair of charts
//! (Z, W) = (z, w, θ¹..θᴺ, ζ¹..ζᴺ).
//!
//! Terms are stored as `c · z^a w^b θ^I ζ^J` with the coefficient on the left
//! and the odd variables in the fixed order θ¹..θᴺ ζ¹..ζᴺ. Precision is a
//! bound on the total even degree a + b; odd variables carry degree zero.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{fmt_factors, push_term, qi_frac, qi_int, reorder_sign, Parity, Qi, Scalar};

pub mod delta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    NW,
    NK,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::NW => write!(f, "NW"),
            Variant::NK => write!(f, "NK"),
        }
    }
}

/// Which half of a two-chart series a variable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Z,
    W,
}

/// Chart descriptor. In the complex N = 2 chart the two odd variables are
/// θ⁺ (index 1) and θ⁻ (index 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    pub n: usize,
    pub biv: bool,
    pub complex: bool,
}

impl Chart {
    pub fn new(n: usize) -> Chart {
        Chart { n, biv: false, complex: false }
    }

    pub fn complex2() -> Chart {
        Chart { n: 2, biv: false, complex: true }
    }

    pub fn bivariate(self) -> Chart {
        Chart { biv: true, ..self }
    }

    pub fn single(self) -> Chart {
        Chart { biv: false, ..self }
    }

    /// Bit index of the i-th (1-based) odd variable on a side.
    pub fn odd_bit(&self, side: Side, i: usize) -> u32 {
        match side {
            Side::Z => (i - 1) as u32,
            Side::W => (self.n + i - 1) as u32,
        }
    }

    /// The NK inner product Σ c·x^i y^j of odd coordinates: Σθ^iζ^i in
    /// real charts, ½(θ⁺ζ⁻ + θ⁻ζ⁺) in the complex chart.
    pub fn pairing(&self) -> Vec<(usize, usize, Qi)> {
        if self.complex {
            vec![(1, 2, qi_frac(1, 2)), (2, 1, qi_frac(1, 2))]
        } else {
            (1..=self.n).map(|i| (i, i, qi_int(1))).collect()
        }
    }

    pub fn side_mask(&self, side: Side) -> u32 {
        let base = (1u32 << self.n) - 1;
        match side {
            Side::Z => base,
            Side::W => base << self.n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub ez: i32,
    pub ew: i32,
    pub odd: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { ez: 0, ew: 0, odd: 0 };

    pub fn degree(&self) -> i32 {
        self.ez + self.ew
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.odd)
    }
}

pub type Terms = BTreeMap<Mono, Scalar>;

pub(crate) fn add_into(t: &mut Terms, m: Mono, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match t.get_mut(&m) {
        Some(v) => {
            *v += &c;
            if v.is_zero() {
                t.remove(&m);
            }
        }
        None => {
            t.insert(m, c);
        }
    }
}

/// Product of two term maps with Koszul signs. `keep` filters output monomials.
pub(crate) fn mul_terms(a: &Terms, b: &Terms, keep: impl Fn(&Mono) -> bool) -> Terms {
    let mut out = Terms::new();
    let b_split: Vec<(Mono, Scalar, Scalar)> = b
        .iter()
        .map(|(m, c)| (*m, c.part(Parity::Even), c.part(Parity::Odd)))
        .collect();
    for (ma, ca) in a {
        let odd_a = ma.parity().is_odd();
        for (mb, ce, co) in &b_split {
            let m = Mono { ez: ma.ez + mb.ez, ew: ma.ew + mb.ew, odd: ma.odd | mb.odd };
            if !keep(&m) {
                continue;
            }
            let neg = match reorder_sign(ma.odd, mb.odd) {
                Some(n) => n,
                None => continue,
            };
            // (ca·ma)(cb·mb) = ca·(−1)^{|ma||cb|} cb·ma·mb
            let cb = if odd_a { ce.sub(co) } else { ce.add(co) };
            let mut c = ca.mul(&cb);
            if neg {
                c = c.neg();
            }
            add_into(&mut out, m, c);
        }
    }
    out
}

/// Truncated super-series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperSeries {
    chart: Chart,
    trunc: i32,
    terms: Terms,
}

impl SuperSeries {
    pub fn zero(chart: Chart, trunc: i32) -> SuperSeries {
        SuperSeries { chart, trunc, terms: Terms::new() }
    }

    pub fn from_terms(chart: Chart, trunc: i32, terms: Terms) -> SuperSeries {
        let terms = terms
            .into_iter()
            .filter(|(m, c)| m.degree() <= trunc && !c.is_zero())
            .collect();
        SuperSeries { chart, trunc, terms }
    }

    pub fn constant(chart: Chart, trunc: i32, c: Scalar) -> SuperSeries {
        let mut t = Terms::new();
        add_into(&mut t, Mono::ONE, c);
        SuperSeries::from_terms(chart, trunc, t)
    }

    pub fn one(chart: Chart, trunc: i32) -> SuperSeries {
        SuperSeries::constant(chart, trunc, Scalar::one())
    }

    pub fn monomial(chart: Chart, trunc: i32, c: Scalar, m: Mono) -> SuperSeries {
        let mut t = Terms::new();
        add_into(&mut t, m, c);
        SuperSeries::from_terms(chart, trunc, t)
    }

    /// The even variable of a side (z or w).
    pub fn even_var(chart: Chart, trunc: i32, side: Side) -> SuperSeries {
        let m = match side {
            Side::Z => Mono { ez: 1, ew: 0, odd: 0 },
            Side::W => Mono { ez: 0, ew: 1, odd: 0 },
        };
        SuperSeries::monomial(chart, trunc, Scalar::one(), m)
    }

    /// The i-th odd variable (1-based) of a side.
    pub fn odd_var(chart: Chart, trunc: i32, side: Side, i: usize) -> SuperSeries {
        let m = Mono { ez: 0, ew: 0, odd: 1 << chart.odd_bit(side, i) };
        SuperSeries::monomial(chart, trunc, Scalar::one(), m)
    }

    pub fn z(chart: Chart, trunc: i32) -> SuperSeries {
        SuperSeries::even_var(chart, trunc, Side::Z)
    }

    pub fn theta(chart: Chart, trunc: i32, i: usize) -> SuperSeries {
        SuperSeries::odd_var(chart, trunc, Side::Z, i)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn trunc(&self) -> i32 {
        self.trunc
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn coeff(&self, m: &Mono) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn with_trunc(&self, trunc: i32) -> SuperSeries {
        let t = trunc.min(self.trunc);
        SuperSeries::from_terms(self.chart, t, self.terms.clone())
    }

    /// Lowest total degree present, or trunc+1 for the zero series.
    pub fn valuation(&self) -> i32 {
        self.terms.keys().map(|m| m.degree()).min().unwrap_or(self.trunc + 1)
    }

    /// Parity of a homogeneous series; `None` when mixed. Zero is even.
    pub fn parity(&self) -> Option<Parity> {
        let mut seen: Option<Parity> = None;
        for (m, c) in &self.terms {
            let p = match c.parity() {
                Some(p) => p.add(m.parity()),
                None => return None,
            };
            match seen {
                None => seen = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(seen.unwrap_or(Parity::Even))
    }

    pub fn part(&self, p: Parity) -> SuperSeries {
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            let want = if m.parity() == p { Parity::Even } else { Parity::Odd };
            add_into(&mut t, *m, c.part(want));
        }
        SuperSeries { chart: self.chart, trunc: self.trunc, terms: t }
    }

    fn check(&self, other: &SuperSeries) -> Result<()> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch(format!("{:?} vs {:?}", self.chart, other.chart)));
        }
        Ok(())
    }

    pub fn add(&self, other: &SuperSeries) -> SuperSeries {
        self.check(other).expect("chart mismatch in add");
        let trunc = self.trunc.min(other.trunc);
        let mut t = self.terms.clone();
        for (m, c) in &other.terms {
            add_into(&mut t, *m, c.clone());
        }
        SuperSeries::from_terms(self.chart, trunc, t)
    }

    pub fn sub(&self, other: &SuperSeries) -> SuperSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SuperSeries {
        SuperSeries {
            chart: self.chart,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn try_mul(&self, other: &SuperSeries) -> Result<SuperSeries> {
        self.check(other)?;
        let trunc = (self.trunc + other.valuation()).min(other.trunc + self.valuation());
        let t = mul_terms(&self.terms, &other.terms, |m| m.degree() <= trunc);
        Ok(SuperSeries::from_terms(self.chart, trunc, t))
    }

    pub fn mul(&self, other: &SuperSeries) -> SuperSeries {
        self.try_mul(other).expect("chart mismatch in mul")
    }

    /// Left multiplication by a constant scalar.
    pub fn scale(&self, c: &Scalar) -> SuperSeries {
        SuperSeries::constant(self.chart, self.trunc + self.valuation(), c.clone())
            .mul(self)
            .with_trunc(self.trunc)
    }

    pub fn scale_q(&self, q: &Qi) -> SuperSeries {
        SuperSeries {
            chart: self.chart,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, c.scale(q)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> SuperSeries {
        self.scale_q(&qi_int(n))
    }

    pub fn pow(&self, n: u32) -> SuperSeries {
        let mut out = SuperSeries::one(self.chart, self.trunc);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Multiplicative inverse; the coefficient of 1 must be invertible.
    pub fn invert(&self) -> Result<SuperSeries> {
        let c0 = self.coeff(&Mono::ONE);
        let c0inv = c0.invert().map_err(|_| {
            Error::NotInvertible(format!("series with constant term {}", c0))
        })?;
        let unit = SuperSeries::constant(self.chart, self.trunc, c0inv);
        // self·c0⁻¹ = 1 + n with n topologically nilpotent
        let n = self.mul(&unit).sub(&SuperSeries::one(self.chart, self.trunc));
        let neg_n = n.neg();
        let mut sum = SuperSeries::one(self.chart, self.trunc);
        let mut pw = SuperSeries::one(self.chart, self.trunc);
        loop {
            pw = pw.mul(&neg_n).with_trunc(self.trunc);
            if pw.is_zero() {
                break;
            }
            sum = sum.add(&pw);
        }
        Ok(unit.mul(&sum).with_trunc(self.trunc))
    }

    pub fn div(&self, other: &SuperSeries) -> Result<SuperSeries> {
        Ok(self.mul(&other.invert()?))
    }

    /// ∂ with respect to the even variable of a side. Precision drops by one.
    pub fn d_even(&self, side: Side) -> SuperSeries {
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            let (e, m2) = match side {
                Side::Z => (m.ez, Mono { ez: m.ez - 1, ..*m }),
                Side::W => (m.ew, Mono { ew: m.ew - 1, ..*m }),
            };
            if e != 0 {
                add_into(&mut t, m2, c.scale(&qi_int(e as i64)));
            }
        }
        SuperSeries::from_terms(self.chart, self.trunc - 1, t)
    }

    /// Antiderivative in z with zero constant of integration. Precision rises by one.
    pub fn integrate_z(&self) -> SuperSeries {
        assert!(!self.chart.biv);
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            assert!(m.ez != -1, "cannot integrate z^-1");
            add_into(&mut t, Mono { ez: m.ez + 1, ..*m }, c.scale(&qi_frac(1, (m.ez + 1) as i64)));
        }
        SuperSeries::from_terms(self.chart, self.trunc + 1, t)
    }

    /// Left partial derivative with respect to the odd variable with bit `b`.
    pub fn d_odd_bit(&self, b: u32) -> SuperSeries {
        let bit = 1u32 << b;
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            if m.odd & bit == 0 {
                continue;
            }
            let below = (m.odd & (bit - 1)).count_ones();
            // ∂(c·x) = (−1)^{|c|} c ∂x, and ∂ passes `below` odd variables
            let c = c.sign_by(|mask| (mask.count_ones() + below) % 2 == 1);
            add_into(&mut t, Mono { odd: m.odd & !bit, ..*m }, c);
        }
        SuperSeries::from_terms(self.chart, self.trunc, t)
    }

    pub fn d_odd(&self, side: Side, i: usize) -> SuperSeries {
        self.d_odd_bit(self.chart.odd_bit(side, i))
    }

    /// ∂_{x} + coef·y·∂_{even} for odd variables x, y on `side`.
    pub fn odd_plus(&self, side: Side, x: usize, y: usize, coef: Qi) -> SuperSeries {
        let a = self.d_odd(side, x);
        let yv = SuperSeries::odd_var(self.chart, self.trunc, side, y);
        let b = yv.mul(&self.d_even(side)).scale_q(&coef);
        a.add(&b)
    }

    pub fn derive(&self, d: Derivation) -> Result<SuperSeries> {
        self.derive_on(Side::Z, d)
    }

    /// Apply a derivation acting on the variables of one side.
    pub fn derive_on(&self, side: Side, d: Derivation) -> Result<SuperSeries> {
        let n = self.chart.n;
        let in_range = |i: usize| i >= 1 && i <= n;
        if side == Side::W && !self.chart.biv {
            return Err(Error::UnknownDerivation("W-side derivation on a one-chart series".into()));
        }
        match d {
            Derivation::Dz => Ok(self.d_even(side)),
            Derivation::Dtheta(i) if in_range(i) => Ok(self.d_odd(side, i)),
            Derivation::D(i) if in_range(i) => Ok(self.odd_plus(side, i, i, qi_int(1))),
            Derivation::Dbar(i) if in_range(i) => Ok(self.odd_plus(side, i, i, qi_int(-1))),
            Derivation::Dplus if self.chart.complex => Ok(self.odd_plus(side, 2, 1, qi_frac(1, 2))),
            Derivation::Dminus if self.chart.complex => {
                Ok(self.odd_plus(side, 1, 2, qi_frac(1, 2)))
            }
            other => Err(Error::UnknownDerivation(format!("{:?} on {:?}", other, self.chart))),
        }
    }

    /// Substitute series for every variable. `even` holds images of z (and w),
    /// `odd` images of the odd variables in bit order. All images must live in
    /// a common target chart.
    pub fn substitute(&self, even: &[SuperSeries], odd: &[SuperSeries]) -> SuperSeries {
        let target = even[0].chart;
        let mut prec = even.iter().chain(odd).map(|s| s.trunc).min().unwrap();
        let ev_val = even.iter().map(|s| s.valuation()).min().unwrap();
        // error terms of degree trunc+1 in the source map to degree ≥ ...
        let shift = if ev_val >= 1 {
            (self.trunc + 1) * ev_val - 1
        } else {
            let nil = even.iter().map(nilpotency_of_degree0).max().unwrap();
            self.trunc - (nil - 1)
        };
        prec = prec.min(shift);
        let mut cache_e: Vec<Vec<SuperSeries>> = even
            .iter()
            .map(|e| vec![SuperSeries::one(target, prec), e.with_trunc(prec)])
            .collect();
        let mut out = Terms::new();
        let mut odd_cache: BTreeMap<u32, SuperSeries> = BTreeMap::new();
        odd_cache.insert(0, SuperSeries::one(target, prec));
        for (m, c) in &self.terms {
            let exps = [m.ez, m.ew];
            debug_assert!(even.len() == 2 || m.ew == 0);
            let mut acc = SuperSeries::constant(target, prec, c.clone());
            for (k, cache) in cache_e.iter_mut().enumerate() {
                let e = exps[k];
                assert!(e >= 0, "cannot substitute into negative powers");
                while cache.len() <= e as usize {
                    let next = cache.last().unwrap().mul(&cache[1]).with_trunc(prec);
                    cache.push(next);
                }
                acc = acc.mul(&cache[e as usize]).with_trunc(prec);
                if acc.is_zero() {
                    break;
                }
            }
            if acc.is_zero() {
                continue;
            }
            let om = odd_product(&mut odd_cache, odd, m.odd, prec);
            acc = acc.mul(&om).with_trunc(prec);
            for (mm, cc) in acc.terms {
                add_into(&mut out, mm, cc);
            }
        }
        SuperSeries::from_terms(target, prec, out)
    }

    /// Embed a one-chart series as the Z side of the two-chart series.
    pub fn embed_z(&self) -> SuperSeries {
        assert!(!self.chart.biv);
        SuperSeries {
            chart: self.chart.bivariate(),
            trunc: self.trunc,
            terms: self.terms.clone(),
        }
    }

    /// Embed a one-chart series as the W side (z ↦ w, θ ↦ ζ).
    pub fn embed_w(&self) -> SuperSeries {
        assert!(!self.chart.biv);
        let n = self.chart.n;
        SuperSeries {
            chart: self.chart.bivariate(),
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Mono { ez: 0, ew: m.ez, odd: m.odd << n }, c.clone()))
                .collect(),
        }
    }

    /// Collect a two-chart series by W-monomials: the coefficient of
    /// w^b ζ^J, standing to the left of that monomial, as a Z-series.
    pub fn w_coefficients(&self) -> BTreeMap<(i32, u32), SuperSeries> {
        assert!(self.chart.biv);
        let n = self.chart.n;
        let zmask = self.chart.side_mask(Side::Z);
        let mut groups: BTreeMap<(i32, u32), Terms> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key = (m.ew, m.odd >> n);
            let zm = Mono { ez: m.ez, ew: 0, odd: m.odd & zmask };
            add_into(groups.entry(key).or_default(), zm, c.clone());
        }
        groups
            .into_iter()
            .map(|((b, j), t)| {
                let s = SuperSeries::from_terms(self.chart.single(), self.trunc - b, t);
                ((b, j), s)
            })
            .collect()
    }

    pub fn w_coefficient(&self, b: i32, jmask: u32) -> SuperSeries {
        self.w_coefficients()
            .remove(&(b, jmask))
            .unwrap_or_else(|| SuperSeries::zero(self.chart.single(), self.trunc - b))
    }

    /// Exact equality up to the shared precision.
    pub fn eq_trunc(&self, other: &SuperSeries) -> bool {
        let t = self.trunc.min(other.trunc);
        self.chart == other.chart && self.with_trunc(t).terms == other.with_trunc(t).terms
    }

    /// Map every coefficient through `f`.
    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> SuperSeries {
        let t = self.terms.iter().map(|(m, c)| (*m, f(c))).collect();
        SuperSeries::from_terms(self.chart, self.trunc, t)
    }

    /// Value at the origin of the Z side, i.e. drop every term with z or θ.
    pub fn at_z_origin(&self) -> SuperSeries {
        let zmask = self.chart.side_mask(Side::Z);
        let t = self
            .terms
            .iter()
            .filter(|(m, _)| m.ez == 0 && m.odd & zmask == 0)
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        SuperSeries::from_terms(self.chart, self.trunc, t)
    }

    /// Taylor shift of a one-chart series: f(Z+W) (`Dir::Left`) or f(W+Z)
    /// (`Dir::Right`) as a two-chart series.
    pub fn taylor_shift(&self, variant: Variant, dir: Dir) -> SuperSeries {
        let ch = self.chart.bivariate();
        let (e, o) = sum_point(ch, self.trunc, variant, dir);
        self.substitute(&[e], &o)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    /// Z + W
    Left,
    /// W + Z
    Right,
}

/// Coordinates of Z+W or W+Z in the two-chart series ring.
/// NK: even part of Z+W is z + w + Σθ^iζ^i, that of W+Z is w + z + Σζ^iθ^i
/// (with the complex pairing on the complex chart).
pub fn sum_point(ch: Chart, trunc: i32, variant: Variant, dir: Dir) -> (SuperSeries, Vec<SuperSeries>) {
    let z = SuperSeries::even_var(ch, trunc, Side::Z);
    let w = SuperSeries::even_var(ch, trunc, Side::W);
    let mut e = z.add(&w);
    let th = |i| SuperSeries::odd_var(ch, trunc, Side::Z, i);
    let ze = |i| SuperSeries::odd_var(ch, trunc, Side::W, i);
    if variant == Variant::NK {
        for (i, j, c) in ch.pairing() {
            let prod = match dir {
                Dir::Left => th(i).mul(&ze(j)),
                Dir::Right => ze(i).mul(&th(j)),
            };
            e = e.add(&prod.scale_q(&c));
        }
    }
    let odd = (1..=ch.n).map(|i| th(i).add(&ze(i))).collect();
    (e, odd)
}

fn nilpotency_of_degree0(s: &SuperSeries) -> i32 {
    let t: Terms = s
        .terms
        .iter()
        .filter(|(m, _)| m.degree() == 0)
        .map(|(m, c)| (*m, c.clone()))
        .collect();
    let p = SuperSeries { chart: s.chart, trunc: 0, terms: t };
    if p.is_zero() {
        return 1;
    }
    let mut pw = p.clone();
    let mut r = 1;
    while !pw.is_zero() {
        pw = pw.mul(&p).with_trunc(0);
        r += 1;
        assert!(r < 64, "degree-zero part of a substituted even series is not nilpotent");
    }
    r
}

fn odd_product(
    cache: &mut BTreeMap<u32, SuperSeries>,
    odd: &[SuperSeries],
    mask: u32,
    prec: i32,
) -> SuperSeries {
    if let Some(s) = cache.get(&mask) {
        return s.clone();
    }
    // θ^I = θ^{I∖top}·θ^{top} with top the highest variable of I
    let top = 31 - mask.leading_zeros();
    let rest = mask & !(1 << top);
    let head = odd_product(cache, odd, rest, prec);
    let s = head.mul(&odd[top as usize]).with_trunc(prec);
    cache.insert(mask, s.clone());
    s
}

/// Derivations available on a chart (indices are 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivation {
    Dz,
    Dtheta(usize),
    /// ∂_{θ^i} + θ^i ∂_z
    D(usize),
    /// ∂_{θ^i} − θ^i ∂_z
    Dbar(usize),
    /// ∂_{θ⁻} + ½ θ⁺ ∂_z (complex N = 2 chart)
    Dplus,
    /// ∂_{θ⁺} + ½ θ⁻ ∂_z (complex N = 2 chart)
    Dminus,
}

impl fmt::Display for SuperSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.chart.n;
        let mut s = String::new();
        for (m, c) in &self.terms {
            let mut vars = Vec::new();
            for (name, e) in [("z", m.ez), ("w", m.ew)] {
                if e == 1 {
                    vars.push(name.to_string());
                } else if e != 0 {
                    vars.push(format!("{}^{}", name, e));
                }
            }
            for b in 0..(2 * n) {
                if m.odd & (1 << b) != 0 {
                    if b < n {
                        vars.push(format!("th{}", b + 1));
                    } else {
                        vars.push(format!("ze{}", b - n + 1));
                    }
                }
            }
            // a scalar with several terms is printed as one parenthesized factor
            if c.num_terms() == 1 {
                let (p, mask, q) = c.terms().next().unwrap();
                let mut factors = fmt_factors(p, mask);
                factors.extend(vars);
                push_term(&mut s, q, &factors);
            } else {
                let mut factors = vec![format!("({})", c)];
                factors.extend(vars);
                push_term(&mut s, &qi_int(1), &factors);
            }
        }
        write!(f, "{}", s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch1() -> Chart {
        Chart::new(1)
    }

    #[test]
    fn odd_square_vanishes() {
        let c = Chart::new(2);
        let t1 = SuperSeries::theta(c, 6, 1);
        assert!(t1.mul(&t1).is_zero());
        let t2 = SuperSeries::theta(c, 6, 2);
        let z = SuperSeries::z(c, 6);
        let p = z.add(&t1.mul(&t2)).mul(&z.sub(&t1.mul(&t2)));
        assert_eq!(p, z.mul(&z).with_trunc(6));
    }

    #[test]
    fn truncation_contract() {
        let c = Chart::new(0);
        let z = SuperSeries::z(c, 2);
        let one = SuperSeries::one(c, 2);
        let f = one.add(&z).add(&z.mul(&z));
        let g = one.add(&z);
        let expect = one.add(&z.scale_int(2)).add(&z.mul(&z).scale_int(2));
        assert!(f.mul(&g).eq_trunc(&expect));
        assert_eq!(f.mul(&g).trunc(), 2);
    }

    #[test]
    fn d_operator() {
        let c = ch1();
        let z = SuperSeries::z(c, 6);
        let th = SuperSeries::theta(c, 6, 1);
        assert!(z.derive(Derivation::D(1)).unwrap().eq_trunc(&th));
        assert!(th.derive(Derivation::D(1)).unwrap().eq_trunc(&SuperSeries::one(c, 6)));
        let f = z.mul(&th);
        let dd = f.derive(Derivation::D(1)).unwrap().derive(Derivation::D(1)).unwrap();
        assert!(dd.eq_trunc(&f.derive(Derivation::Dz).unwrap()));
    }

    #[test]
    fn complex_d() {
        let c = Chart::complex2();
        let tp = SuperSeries::theta(c, 6, 1);
        let tm = SuperSeries::theta(c, 6, 2);
        let z = SuperSeries::z(c, 6);
        assert!(tp.derive(Derivation::Dminus).unwrap().eq_trunc(&SuperSeries::one(c, 6)));
        assert!(tm.derive(Derivation::Dminus).unwrap().is_zero());
        let half = tm.scale_q(&qi_frac(1, 2));
        assert!(z.derive(Derivation::Dminus).unwrap().eq_trunc(&half));
        assert!(Chart::new(2).n == 2);
        assert!(matches!(
            SuperSeries::z(Chart::new(2), 3).derive(Derivation::Dplus),
            Err(Error::UnknownDerivation(_))
        ));
    }

    #[test]
    fn leibniz() {
        let c = ch1();
        let th = SuperSeries::theta(c, 6, 1);
        let z = SuperSeries::z(c, 6);
        let g = th.mul(&z);
        let d = |s: &SuperSeries| s.derive(Derivation::D(1)).unwrap();
        let lhs = d(&th.mul(&g));
        let rhs = d(&th).mul(&g).sub(&th.mul(&d(&g)));
        assert!(lhs.eq_trunc(&rhs));
    }

    #[test]
    fn invert() {
        let c = Chart::new(2);
        let z = SuperSeries::z(c, 5);
        let one = SuperSeries::one(c, 5);
        let inv = one.add(&z).invert().unwrap();
        assert!(inv.mul(&one.add(&z)).eq_trunc(&one));
        let tt = SuperSeries::theta(c, 5, 1).mul(&SuperSeries::theta(c, 5, 2));
        assert!(one.add(&tt).invert().unwrap().eq_trunc(&one.sub(&tt)));
        assert!(matches!(z.invert(), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn shifts() {
        let c = ch1();
        let z = SuperSeries::z(c, 4);
        let b = c.bivariate();
        let zz = SuperSeries::even_var(b, 4, Side::Z);
        let ww = SuperSeries::even_var(b, 4, Side::W);
        let th = SuperSeries::odd_var(b, 4, Side::Z, 1);
        let ze = SuperSeries::odd_var(b, 4, Side::W, 1);
        assert!(z.taylor_shift(Variant::NW, Dir::Left).eq_trunc(&zz.add(&ww)));
        let l = z.taylor_shift(Variant::NK, Dir::Left);
        let r = z.taylor_shift(Variant::NK, Dir::Right);
        assert!(l.eq_trunc(&zz.add(&ww).add(&th.mul(&ze))));
        assert!(r.eq_trunc(&zz.add(&ww).sub(&th.mul(&ze))));
        assert!(!l.eq_trunc(&r));
        let t1 = SuperSeries::theta(c, 4, 1);
        assert!(t1.taylor_shift(Variant::NK, Dir::Right).eq_trunc(&th.add(&ze)));
    }

    #[test]
    fn display() {
        let c = ch1();
        let z = SuperSeries::z(c, 3);
        let th = SuperSeries::theta(c, 3, 1);
        let f = z.mul(&z).add(&th.scale(&Scalar::gen(1))).sub(&z.mul(&th));
        assert_eq!(f.to_string(), "a1*th1 - z*th1 + z^2");
    }
}
