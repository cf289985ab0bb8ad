//! Vector fields on the formal superdisk, the generator families W(1|1),
//! K(1|1), K(1|2), their brackets, exponential action, and the solver for
//! exponential coordinates of a localized coordinate change.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed};

use crate::disk::{schwarzian_n1, schwarzian_n2, CoordinateChange, Level};
use crate::error::{Error, Result};
use crate::scalar::{qi_frac, qi_i, qi_int, Parity, Qi, Scalar};
use crate::series::{Chart, Derivation, Side, SuperSeries, Terms, Variant};

/// X = c⁰∂_x + Σ cⁱ∂_{ξ^i} acting on the variables of one side of a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperVectorField {
    pub side: Side,
    pub comps: Vec<SuperSeries>,
}

impl SuperVectorField {
    pub fn zero(chart: Chart, trunc: i32, side: Side) -> SuperVectorField {
        SuperVectorField { side, comps: vec![SuperSeries::zero(chart, trunc); chart.n + 1] }
    }

    pub fn chart(&self) -> Chart {
        self.comps[0].chart()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Parity of the field, or `None` if it mixes parities. Zero is even.
    pub fn parity(&self) -> Option<Parity> {
        let mut out: Option<Parity> = None;
        for (k, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = c.parity()?.add(Parity::from_bool(k > 0));
            match out {
                None => out = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(Parity::Even))
    }

    pub fn apply(&self, f: &SuperSeries) -> SuperSeries {
        let mut out = self.comps[0].mul(&f.d_even(self.side));
        for i in 1..self.comps.len() {
            if !self.comps[i].is_zero() {
                out = out.add(&self.comps[i].mul(&f.d_odd(self.side, i)));
            }
        }
        out
    }

    pub fn add(&self, o: &SuperVectorField) -> SuperVectorField {
        SuperVectorField { side: self.side, comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &SuperVectorField) -> SuperVectorField {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> SuperVectorField {
        self.map(|c| c.neg())
    }

    pub fn map(&self, f: impl Fn(&SuperSeries) -> SuperSeries) -> SuperVectorField {
        SuperVectorField { side: self.side, comps: self.comps.iter().map(f).collect() }
    }

    /// c·X with c on the left.
    pub fn scale(&self, c: &Scalar) -> SuperVectorField {
        self.map(|s| s.scale(c))
    }

    pub fn scale_q(&self, q: &Qi) -> SuperVectorField {
        self.map(|s| s.scale_q(q))
    }

    /// f·X for a function f.
    pub fn times(&self, f: &SuperSeries) -> SuperVectorField {
        self.map(|s| f.mul(s))
    }

    /// [X, Y] = XY − (−1)^{|X||Y|} YX, computed on components.
    pub fn bracket(&self, o: &SuperVectorField) -> Result<SuperVectorField> {
        if self.chart() != o.chart() || self.side != o.side {
            return Err(Error::ChartMismatch("vector fields on different charts".into()));
        }
        let px = self.parity().ok_or_else(|| Error::Parity("inhomogeneous vector field".into()))?;
        let py = o.parity().ok_or_else(|| Error::Parity("inhomogeneous vector field".into()))?;
        let sign = px.is_odd() && py.is_odd();
        let comps = self
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(xk, yk)| {
                let a = self.apply(yk);
                let b = o.apply(xk);
                if sign {
                    a.add(&b)
                } else {
                    a.sub(&b)
                }
            })
            .collect();
        Ok(SuperVectorField { side: self.side, comps })
    }

    pub fn eq_trunc(&self, o: &SuperVectorField) -> bool {
        self.side == o.side && self.comps.iter().zip(&o.comps).all(|(a, b)| a.eq_trunc(b))
    }
}

impl fmt::Display for SuperVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = match self.side {
            Side::Z => std::iter::once("dz".to_string()).chain((1..self.comps.len()).map(|i| format!("dth{}", i))).collect(),
            Side::W => std::iter::once("dw".to_string()).chain((1..self.comps.len()).map(|i| format!("dze{}", i))).collect(),
        };
        let parts: Vec<String> = self
            .comps
            .iter()
            .zip(&names)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, n)| format!("({})*{}", c, n))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Σ_{k ≤ order} X^k f / k!. Without an order the sum runs until the terms
/// vanish at the working precision.
pub fn exp_action(x: &SuperVectorField, f: &SuperSeries, order: Option<usize>) -> Result<SuperSeries> {
    let mut sum = f.clone();
    let mut term = f.clone();
    let cap = order.unwrap_or(256);
    for k in 1..=cap {
        term = x.apply(&term).scale_q(&qi_frac(1, k as i64));
        if term.is_zero() {
            return Ok(sum);
        }
        sum = sum.add(&term);
    }
    if order.is_none() {
        return Err(Error::NonNilpotentAtOrder);
    }
    Ok(sum)
}

/// The four generator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    W11,
    K11,
    K12,
    K12Complex,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        match s.to_ascii_lowercase().as_str() {
            "w11" => Ok(Family::W11),
            "k11" => Ok(Family::K11),
            "k12" => Ok(Family::K12),
            "k12complex" | "k12c" => Ok(Family::K12Complex),
            other => Err(Error::Invalid(format!("unknown family {}", other))),
        }
    }

    pub fn labels(&self) -> &'static [&'static str] {
        match self {
            Family::W11 => &["T", "J", "Q", "H"],
            Family::K11 => &["L", "G"],
            Family::K12 => &["L", "J", "G1", "G2"],
            Family::K12Complex => &["L", "J", "G+", "G-"],
        }
    }

    pub fn chart(&self) -> Chart {
        match self {
            Family::W11 | Family::K11 => Chart::new(1),
            Family::K12 => Chart::new(2),
            Family::K12Complex => Chart::complex2(),
        }
    }

    fn half_integer(label: &str) -> bool {
        label.starts_with('G')
    }

    pub fn parity_of(label: &str) -> Parity {
        Parity::from_bool(matches!(label, "Q" | "H") || label.starts_with('G'))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::W11 => "w11",
            Family::K11 => "k11",
            Family::K12 => "k12",
            Family::K12Complex => "k12complex",
        };
        write!(f, "{}", s)
    }
}

fn rq(r: Rational64) -> Qi {
    qi_frac(*r.numer(), *r.denom())
}

fn half() -> Rational64 {
    Rational64::new(1, 2)
}

/// The generator `label_n` of a family, on `side` of `chart` (whose odd
/// count must match the family).
pub fn generator_on(
    family: Family,
    label: &str,
    n: Rational64,
    chart: Chart,
    trunc: i32,
    side: Side,
) -> Result<SuperVectorField> {
    if !family.labels().contains(&label) {
        return Err(Error::OutOfRange(format!("{} has no generator {}", family, label)));
    }
    let half_int = Family::half_integer(label);
    let ok = if half_int {
        *n.denom() == 2 && n >= half()
    } else {
        n.is_integer() && !n.is_negative()
    };
    if !ok {
        return Err(Error::OutOfRange(format!("{}_{} not admissible", label, n)));
    }
    let x = SuperSeries::even_var(chart, trunc, side);
    let xi = |i| SuperSeries::odd_var(chart, trunc, side, i);
    // z^k for an integer k ≥ 0; half-integer shifts are resolved by the caller
    let zp = |k: Rational64| -> SuperSeries {
        assert!(k.is_integer() && !k.is_negative());
        x.pow(k.to_integer() as u32)
    };
    let one = Rational64::one();
    let mut v = SuperVectorField::zero(chart, trunc, side);
    match (family, label) {
        (Family::W11, "T") => {
            v.comps[0] = zp(n + one).neg();
            v.comps[1] = xi(1).mul(&zp(n)).scale_q(&rq(n + one)).neg();
        }
        (Family::W11, "J") => v.comps[1] = xi(1).mul(&zp(n)).neg(),
        (Family::W11, "Q") => v.comps[1] = zp(n + one).neg(),
        (Family::W11, "H") => v.comps[0] = xi(1).mul(&zp(n)),
        (Family::K11, "L") | (Family::K12, "L") | (Family::K12Complex, "L") => {
            v.comps[0] = zp(n + one).neg();
            let c = -rq((n + one) / 2);
            for i in 1..=chart.n {
                v.comps[i] = xi(i).mul(&zp(n)).scale_q(&c);
            }
        }
        (Family::K11, "G") => {
            // −z^{n+1/2}(∂_θ − θ∂_z)
            let p = zp(n + half());
            v.comps[0] = xi(1).mul(&p);
            v.comps[1] = p.neg();
        }
        (Family::K12, "J") => {
            // −i z^n (θ²∂₁ − θ¹∂₂)
            let p = zp(n).scale_q(&qi_i());
            v.comps[1] = xi(2).mul(&p).neg();
            v.comps[2] = xi(1).mul(&p);
        }
        (Family::K12, "G1") | (Family::K12, "G2") => {
            let (a, b, s) = if label == "G1" { (1, 2, qi_int(1)) } else { (2, 1, qi_int(-1)) };
            // z^{n+1/2}(θ^a∂_z − ∂_a) ± (n+½) z^{n−1/2} θ¹θ² ∂_b
            let p = zp(n + half());
            v.comps[0] = xi(a).mul(&p);
            v.comps[a] = p.neg();
            let q = zp(n - half());
            v.comps[b] = xi(1).mul(&xi(2)).mul(&q).scale_q(&(rq(n + half()) * s));
        }
        (Family::K12Complex, "J") => {
            let p = zp(n);
            v.comps[1] = xi(1).mul(&p).neg();
            v.comps[2] = xi(2).mul(&p);
        }
        (Family::K12Complex, "G+") | (Family::K12Complex, "G-") => {
            // −z^{n+1/2}(∂_± − ½θ^∓∂_z) − (n+½)/2 z^{n−1/2} θ^±θ^∓ ∂_±
            let (a, b) = if label == "G+" { (1, 2) } else { (2, 1) };
            let p = zp(n + half());
            v.comps[a] = p.neg();
            v.comps[0] = xi(b).mul(&p).scale_q(&qi_frac(1, 2));
            let q = zp(n - half());
            let c = -rq((n + half()) / 2);
            v.comps[a] = v.comps[a].add(&xi(a).mul(&xi(b)).mul(&q).scale_q(&c));
        }
        _ => unreachable!(),
    }
    Ok(v)
}

/// Generator on the family's own chart.
pub fn generator(family: Family, label: &str, n: Rational64, trunc: i32) -> Result<SuperVectorField> {
    generator_on(family, label, n, family.chart(), trunc, Side::Z)
}

/// One side of a relation: Σ c · label_{index}.
pub type Combination = Vec<(Qi, &'static str, Rational64)>;

/// The right-hand side of [a_m, b_n] from the relation tables (central terms
/// vanish for vector fields). `None` when the table has no such line.
pub fn expected_bracket(family: Family, a: &str, m: Rational64, b: &str, n: Rational64) -> Option<Combination> {
    let k = m + n;
    let r = rq;
    let direct: Option<Combination> = match (family, a, b) {
        (Family::W11, "T", "T") => Some(vec![(r(m - n), "T", k)]),
        (Family::W11, "Q", "Q") | (Family::W11, "H", "H") => Some(vec![]),
        (Family::W11, "T", "H") => Some(vec![(r(-n), "H", k)]),
        (Family::W11, "T", "J") => Some(vec![(r(-n), "J", k)]),
        (Family::W11, "T", "Q") => Some(vec![(r(m - n), "Q", k)]),
        (Family::W11, "H", "Q") => Some(vec![(qi_int(1), "T", k), (r(-m), "J", k)]),
        (Family::K11, "L", "L") => Some(vec![(r(m - n), "L", k)]),
        (Family::K11, "G", "L") => Some(vec![(r(m - n / 2), "G", k)]),
        (Family::K11, "G", "G") => Some(vec![(qi_int(2), "L", k)]),
        (Family::K12, "L", "L") | (Family::K12Complex, "L", "L") => Some(vec![(r(m - n), "L", k)]),
        (Family::K12, "L", g) | (Family::K12Complex, "L", g) if g.starts_with('G') => {
            let g: &'static str = family.labels().iter().find(|l| **l == g).unwrap();
            Some(vec![(r(m / 2 - n), g, k)])
        }
        (Family::K12, "L", "J") | (Family::K12Complex, "L", "J") => Some(vec![(r(-n), "J", k)]),
        (Family::K12, "J", "J") | (Family::K12Complex, "J", "J") => Some(vec![]),
        (Family::K12, "G1", "G1") | (Family::K12, "G2", "G2") => Some(vec![(qi_int(2), "L", k)]),
        (Family::K12, "G1", "G2") => Some(vec![(qi_i() * r(n - m), "J", k)]),
        (Family::K12, "J", "G1") => Some(vec![(-qi_i(), "G2", k)]),
        (Family::K12, "J", "G2") => Some(vec![(qi_i(), "G1", k)]),
        (Family::K12Complex, "J", "G+") => Some(vec![(qi_int(1), "G+", k)]),
        (Family::K12Complex, "J", "G-") => Some(vec![(qi_int(-1), "G-", k)]),
        (Family::K12Complex, "G+", "G-") => Some(vec![(qi_int(1), "L", k), (r((m - n) / 2), "J", k)]),
        (Family::K12Complex, "G+", "G+") | (Family::K12Complex, "G-", "G-") => Some(vec![]),
        _ => None,
    };
    if direct.is_some() {
        return direct;
    }
    // [b, a] = −(−1)^{|a||b|}[a, b]
    let rev = match (family, b, a) {
        (Family::W11, "T", _) | (Family::W11, "H", "Q") | (Family::K11, "L", "L") | (Family::K11, "G", "L") => {
            expected_bracket(family, b, n, a, m)
        }
        (Family::K12, _, _) | (Family::K12Complex, _, _) if b == "L" || b == "J" || (b, a) == ("G1", "G2") || (b, a) == ("G+", "G-") => {
            expected_bracket(family, b, n, a, m)
        }
        _ => None,
    }?;
    let both_odd = Family::parity_of(a).is_odd() && Family::parity_of(b).is_odd();
    Some(
        rev.into_iter()
            .map(|(c, l, i)| (if both_odd { -c } else { c }, l, i))
            .map(|(c, l, i)| (-c, l, i))
            .collect(),
    )
}

/// A mismatch found by [`verify_family`].
#[derive(Clone, Debug)]
pub struct Mismatch {
    pub lhs: String,
    pub got: String,
    pub expected: String,
}

#[derive(Clone, Debug)]
pub struct FamilyReport {
    pub family: Family,
    pub window: i64,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

/// Admissible indices of a label up to `window`.
pub fn indices(label: &str, window: i64) -> Vec<Rational64> {
    if Family::half_integer(label) {
        (0..window).map(|k| Rational64::new(2 * k + 1, 2)).collect()
    } else {
        (0..=window).map(Rational64::from_integer).collect()
    }
}

pub fn fmt_index(n: Rational64) -> String {
    if n.is_integer() {
        format!("{}", n.to_integer())
    } else {
        format!("{}/{}", n.numer(), n.denom())
    }
}

fn combination_field(family: Family, c: &Combination, trunc: i32) -> SuperVectorField {
    let mut v = SuperVectorField::zero(family.chart(), trunc, Side::Z);
    for (q, l, i) in c {
        v = v.add(&generator(family, l, *i, trunc).unwrap().scale_q(q));
    }
    v
}

fn fmt_combination(c: &Combination) -> String {
    if c.is_empty() {
        return "0".into();
    }
    c.iter()
        .map(|(q, l, i)| format!("{}*{}_{}", crate::scalar::fmt_qi(q), l, fmt_index(*i)))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Compare every generator bracket in the window against the relation table.
pub fn verify_family(family: Family, window: i64) -> FamilyReport {
    let trunc = 4 * window as i32 + 16;
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for a in family.labels() {
        for b in family.labels() {
            for m in indices(a, window) {
                for n in indices(b, window) {
                    let Some(exp) = expected_bracket(family, a, m, b, n) else { continue };
                    let x = generator(family, a, m, trunc).unwrap();
                    let y = generator(family, b, n, trunc).unwrap();
                    let got = x.bracket(&y).unwrap();
                    let want = combination_field(family, &exp, trunc);
                    checked += 1;
                    if !got.eq_trunc(&want) {
                        mismatches.push(Mismatch {
                            lhs: format!("[{}_{}, {}_{}]", a, fmt_index(m), b, fmt_index(n)),
                            got: got.to_string(),
                            expected: fmt_combination(&exp),
                        });
                    }
                }
            }
        }
    }
    FamilyReport { family, window, checked, mismatches }
}

// ---------------------------------------------------------------------------
// exponential coordinates

/// Solved coefficients, each a series in the base point Z.
#[derive(Clone, Debug)]
pub struct ExpCoords {
    pub family: Family,
    pub order: u32,
    pub values: Vec<(String, SuperSeries)>,
}

impl ExpCoords {
    pub fn get(&self, name: &str) -> Option<&SuperSeries> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

/// Unknown coefficient x of the term −x·gen in the exponent.
struct Unknown {
    name: &'static str,
    parity: Parity,
    label: &'static str,
    index: Rational64,
}

/// One linear block: unknowns and the (component, w-degree, ζ-mask) equations.
struct Block {
    unknowns: Vec<Unknown>,
    equations: Vec<(usize, i32, u32)>,
}

fn unk(name: &'static str, label: &'static str, two_n: i64) -> Unknown {
    Unknown { name, parity: Family::parity_of(label), label, index: Rational64::new(two_n, 2) }
}

fn blocks(family: Family) -> Vec<Block> {
    match family {
        Family::K11 => vec![
            Block { unknowns: vec![unk("w1", "G", 1)], equations: vec![(1, 1, 0)] },
            Block { unknowns: vec![unk("v1", "L", 2)], equations: vec![(1, 1, 1)] },
            Block { unknowns: vec![unk("w2", "G", 3)], equations: vec![(1, 2, 0)] },
        ],
        Family::K12Complex => vec![
            Block { unknowns: vec![unk("w1+", "G+", 1), unk("w1-", "G-", 1)], equations: vec![(1, 1, 0), (2, 1, 0)] },
            Block { unknowns: vec![unk("v1", "L", 2), unk("u1", "J", 2)], equations: vec![(1, 1, 1), (2, 1, 2)] },
            Block { unknowns: vec![unk("w2+", "G+", 3), unk("w2-", "G-", 3)], equations: vec![(1, 2, 0), (2, 2, 0)] },
        ],
        Family::W11 => vec![Block {
            unknowns: vec![unk("v1", "T", 2), unk("u1", "J", 2), unk("q1", "Q", 2), unk("h1", "H", 2)],
            equations: vec![(0, 2, 0), (1, 2, 0), (0, 1, 1), (1, 1, 1)],
        }],
        Family::K12 => vec![],
    }
}

fn variant_of(family: Family) -> Variant {
    match family {
        Family::W11 => Variant::NW,
        _ => Variant::NK,
    }
}

/// Grading-zero part from the 1-jet of the localized change: names, values,
/// and the images of the W coordinates (t, ζ…) under the grading-zero factors.
fn grading_zero(family: Family, comps: &[SuperSeries]) -> Result<(Vec<(String, SuperSeries)>, Vec<SuperSeries>)> {
    let ch = comps[0].chart();
    let tr = comps[0].trunc();
    let t = SuperSeries::even_var(ch, tr, Side::W);
    let ze = |i| SuperSeries::odd_var(ch, tr, Side::W, i);
    let emb = |s: &SuperSeries| s.embed_z();
    let inv = |s: &SuperSeries| s.invert().map_err(|_| Error::SingularJet);
    match family {
        Family::K11 => {
            let a = comps[1].w_coefficient(0, 1);
            let a2 = a.mul(&a);
            Ok((vec![("A".into(), a.clone())], vec![emb(&a2).mul(&t), emb(&a).mul(&ze(1))]))
        }
        Family::K12Complex => {
            let pp = comps[1].w_coefficient(0, 1);
            let pm = comps[2].w_coefficient(0, 2);
            let a2 = pp.mul(&pm);
            Ok((
                vec![("BA".into(), pp.clone()), ("B^-1A".into(), pm.clone())],
                vec![emb(&a2).mul(&t), emb(&pp).mul(&ze(1)), emb(&pm).mul(&ze(2))],
            ))
        }
        Family::W11 => {
            let at = comps[0].w_coefficient(1, 0);
            let az = comps[0].w_coefficient(0, 1);
            let bt = comps[1].w_coefficient(1, 0);
            let bz = comps[1].w_coefficient(0, 1);
            let q0 = inv(&bz)?.mul(&bt);
            let a = at.sub(&az.mul(&q0));
            let ainv = inv(&a)?;
            let h0 = ainv.mul(&az).neg();
            let b = ainv.mul(&bz);
            // P·t = A(t − h0ζ − h0q0t), P·ζ = AB(ζ + q0t)
            let pt = emb(&a).mul(&t.sub(&emb(&h0).mul(&ze(1))).sub(&emb(&h0.mul(&q0)).mul(&t)));
            let pz = emb(&a.mul(&b)).mul(&ze(1).add(&emb(&q0).mul(&t)));
            Ok((vec![("A".into(), a), ("B".into(), b), ("h0".into(), h0), ("q0".into(), q0)], vec![pt, pz]))
        }
        Family::K12 => Err(Error::Invalid("exp coordinates use the complex K12 chart".into())),
    }
}

fn probe_value(p: Parity, ch: Chart, tr: i32) -> SuperSeries {
    let c = match p {
        Parity::Odd => Scalar::gen(31),
        Parity::Even => Scalar::gen(31).mul(&Scalar::gen(32)),
    };
    SuperSeries::constant(ch, tr, c)
}

/// κ with L(probe) = κ·x, read off by stripping the probe generators.
fn strip_probe(s: &SuperSeries, p: Parity) -> SuperSeries {
    let t: Terms = s
        .terms()
        .iter()
        .filter_map(|(m, c)| {
            let k = match p {
                Parity::Odd => {
                    let k = c.strip_generator_right(30);
                    // c'α θ^I = (−1)^{|I|} c' θ^I α
                    if m.odd.count_ones() % 2 == 1 {
                        k.neg()
                    } else {
                        k
                    }
                }
                Parity::Even => c.strip_generator_right(31).strip_generator_right(30),
            };
            (!k.is_zero()).then_some((*m, k))
        })
        .collect();
    SuperSeries::from_terms(s.chart(), s.trunc(), t)
}

/// Images of the W coordinates under exp(−Σ x_i gen_i)·(grading-zero part).
fn act(family: Family, values: &[(&Unknown, SuperSeries)], g0: &[SuperSeries]) -> Result<Vec<SuperSeries>> {
    let ch = g0[0].chart();
    let tr = g0.iter().map(|s| s.trunc()).min().unwrap();
    let mut x = SuperVectorField::zero(ch, tr, Side::W);
    for (u, v) in values {
        if v.is_zero() {
            continue;
        }
        let g = generator_on(family, u.label, u.index, ch, tr, Side::W)?;
        x = x.sub(&g.times(&v.embed_z()));
    }
    let mut even = vec![SuperSeries::even_var(ch, tr, Side::Z)];
    let mut odd: Vec<SuperSeries> = (1..=ch.n).map(|i| SuperSeries::odd_var(ch, tr, Side::Z, i)).collect();
    even.push(exp_action(&x, &SuperSeries::even_var(ch, tr, Side::W), None)?);
    for i in 1..=ch.n {
        odd.push(exp_action(&x, &SuperSeries::odd_var(ch, tr, Side::W, i), None)?);
    }
    Ok(g0.iter().map(|s| s.substitute(&even, &odd)).collect())
}

fn gauss(mut k: Vec<Vec<SuperSeries>>, mut r: Vec<SuperSeries>) -> Result<Vec<SuperSeries>> {
    let n = r.len();
    for col in 0..n {
        let piv = (col..n).find(|&i| k[i][col].invert().is_ok()).ok_or(Error::SingularJet)?;
        k.swap(col, piv);
        r.swap(col, piv);
        let inv = k[col][col].invert()?;
        for i in 0..n {
            if i == col || k[i][col].is_zero() {
                continue;
            }
            let c = k[i][col].mul(&inv);
            for j in 0..n {
                let t = c.mul(&k[col][j]);
                k[i][j] = k[i][j].sub(&t);
            }
            r[i] = r[i].sub(&c.mul(&r[col]));
        }
    }
    Ok((0..n).map(|i| k[i][i].invert().unwrap().mul(&r[i])).collect())
}

fn check_family_input(rho: &CoordinateChange, family: Family) -> Result<()> {
    match family {
        Family::K11 => {
            let v = rho.superconformal(Level::N1)?;
            if !v.holds {
                return Err(Error::NotSuperconformal(v.residuals[0].1.to_string()));
            }
        }
        Family::K12Complex => {
            let v = rho.superconformal(Level::N2Oriented)?;
            if let Some((n, r)) = v.residuals.iter().find(|(_, r)| !r.is_zero()) {
                return Err(Error::NotSuperconformal(format!("{}: {}", n, r)));
            }
        }
        Family::W11 => {
            if rho.n() != 1 {
                return Err(Error::UnsupportedN(rho.n()));
            }
        }
        Family::K12 => return Err(Error::Invalid("use the complex K12 family".into())),
    }
    Ok(())
}

/// The localized change as (F_Z, Ψ_Z…) in the family's variant.
fn localized(rho: &CoordinateChange, family: Family) -> Vec<SuperSeries> {
    let mut r = rho.clone();
    r.variant = variant_of(family);
    let l = r.localize();
    std::iter::once(l.f).chain(l.psi).collect()
}

/// Solve for the exponential coordinates of ρ_Z up to order 2.
pub fn exp_coordinates(rho: &CoordinateChange, family: Family, order: u32) -> Result<ExpCoords> {
    if order != 2 {
        return Err(Error::OutOfRange(format!("order {} (only 2 is supported)", order)));
    }
    check_family_input(rho, family)?;
    let comps = localized(rho, family);
    let (mut values, g0) = grading_zero(family, &comps)?;
    let ch = comps[0].chart();
    let zch = ch.single();
    let bl = blocks(family);
    let mut solved: Vec<(&Unknown, SuperSeries)> = Vec::new();
    for b in &bl {
        let coeffs = |imgs: &[SuperSeries]| -> Vec<SuperSeries> {
            b.equations.iter().map(|&(c, w, j)| imgs[c].w_coefficient(w, j)).collect()
        };
        let mut base = solved.clone();
        for u in &b.unknowns {
            base.push((u, SuperSeries::zero(zch, comps[0].trunc())));
        }
        let r0 = coeffs(&act(family, &base, &g0)?);
        let target = coeffs(&comps);
        let mut kappa = vec![Vec::new(); b.equations.len()];
        for (j, u) in b.unknowns.iter().enumerate() {
            let mut probe = base.clone();
            probe[solved.len() + j].1 = probe_value(u.parity, zch, comps[0].trunc());
            let rj = coeffs(&act(family, &probe, &g0)?);
            for (i, (a, z)) in rj.iter().zip(&r0).enumerate() {
                kappa[i].push(strip_probe(&a.sub(z), u.parity));
            }
        }
        let rhs: Vec<SuperSeries> = target.iter().zip(&r0).map(|(t, z)| t.sub(z)).collect();
        let x = gauss(kappa, rhs)?;
        for (u, v) in b.unknowns.iter().zip(x) {
            solved.push((u, v));
        }
    }
    values.extend(solved.into_iter().map(|(u, v)| (u.name.to_string(), v)));
    Ok(ExpCoords { family, order, values })
}

/// Images of the W coordinates produced by re-exponentiating the solved coefficients.
pub fn reexponentiate(coords: &ExpCoords, trunc: i32) -> Result<Vec<SuperSeries>> {
    let family = coords.family;
    let ch = family.chart().bivariate();
    let t = SuperSeries::even_var(ch, trunc, Side::W);
    let ze = |i| SuperSeries::odd_var(ch, trunc, Side::W, i);
    let g = |n: &str| coords.get(n).unwrap().embed_z();
    let g0 = match family {
        Family::K11 => vec![g("A").mul(&g("A")).mul(&t), g("A").mul(&ze(1))],
        Family::K12Complex => vec![g("BA").mul(&g("B^-1A")).mul(&t), g("BA").mul(&ze(1)), g("B^-1A").mul(&ze(2))],
        Family::W11 => {
            let (a, b, h0, q0) = (g("A"), g("B"), g("h0"), g("q0"));
            vec![
                a.mul(&t.sub(&h0.mul(&ze(1))).sub(&h0.mul(&q0).mul(&t))),
                a.mul(&b).mul(&ze(1).add(&q0.mul(&t))),
            ]
        }
        Family::K12 => return Err(Error::Invalid("use the complex K12 family".into())),
    };
    let bl = blocks(family);
    let vals: Vec<(&Unknown, SuperSeries)> = bl
        .iter()
        .flat_map(|b| b.unknowns.iter())
        .map(|u| (u, coords.get(u.name).unwrap().clone()))
        .collect();
    act(family, &vals, &g0)
}

/// Which W-monomials (component, w-degree, ζ-mask) the order-2 solution pins down.
pub fn determined_monomials(family: Family) -> Vec<(usize, i32, u32)> {
    match family {
        Family::K11 => vec![(1, 0, 1), (1, 1, 0), (1, 1, 1), (1, 2, 0)],
        Family::K12Complex => {
            let mut v = Vec::new();
            for c in 1..=2 {
                for m in [(0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (1, 2), (2, 0)] {
                    v.push((c, m.0, m.1));
                }
            }
            v
        }
        Family::W11 => vec![(0, 1, 0), (0, 0, 1), (0, 2, 0), (0, 1, 1), (1, 1, 0), (1, 0, 1), (1, 2, 0), (1, 1, 1)],
        Family::K12 => vec![],
    }
}

/// Compare the re-exponentiated images with ρ_Z on the determined monomials.
pub fn round_trip(rho: &CoordinateChange, coords: &ExpCoords) -> Result<bool> {
    let comps = localized(rho, coords.family);
    let back = reexponentiate(coords, rho.trunc())?;
    Ok(determined_monomials(coords.family)
        .into_iter()
        .all(|(c, w, j)| comps[c].w_coefficient(w, j).eq_trunc(&back[c].w_coefficient(w, j))))
}

/// The displayed closed forms for the coefficients, as series in Z.
pub fn closed_forms(rho: &CoordinateChange, family: Family) -> Result<Vec<(String, SuperSeries)>> {
    check_family_input(rho, family)?;
    let dz = |s: &SuperSeries| s.d_even(Side::Z);
    let half = qi_frac(1, 2);
    match family {
        Family::K11 => {
            let d = |s: &SuperSeries| s.derive(Derivation::D(1)).unwrap();
            let p = &rho.psi[0];
            let d1 = d(p);
            let d2 = d(&d1);
            let d3 = d(&d2);
            let inv = d1.invert()?;
            Ok(vec![
                ("A".into(), d1.clone()),
                ("w1".into(), d2.mul(&inv)),
                ("v1".into(), d3.mul(&inv)),
                ("w2".into(), schwarzian_n1(&d1)?.scale_q(&half)),
            ])
        }
        Family::K12Complex => {
            let (pp, pm) = (&rho.psi[0], &rho.psi[1]);
            let dmp = pp.derive(Derivation::Dminus)?;
            let dpm = pm.derive(Derivation::Dplus)?;
            let (ppz, pmz) = (dz(pp), dz(pm));
            let a = ppz.derive(Derivation::Dminus)?.div(&dmp)?;
            let b = pmz.derive(Derivation::Dplus)?.div(&dpm)?;
            let w2 = |psi_z: &SuperSeries, den: &SuperSeries, same: &SuperSeries, other: &SuperSeries| -> Result<SuperSeries> {
                // (Ψ_zz − ½Ψ_z(3·same + other)) / (2 D∓Ψ±)
                let corr = psi_z.mul(&same.scale_int(3).add(other)).scale_q(&half);
                Ok(dz(psi_z).sub(&corr).div(&den.scale_int(2))?)
            };
            Ok(vec![
                ("BA".into(), dmp.clone()),
                ("B^-1A".into(), dpm.clone()),
                ("w1+".into(), ppz.div(&dmp)?),
                ("w1-".into(), pmz.div(&dpm)?),
                ("v1".into(), a.add(&b).scale_q(&half)),
                ("u1".into(), schwarzian_n2(rho)?.neg()),
                ("w2+".into(), w2(&ppz, &dmp, &a, &b)?),
                ("w2-".into(), w2(&pmz, &dpm, &b, &a)?),
            ])
        }
        Family::W11 => {
            let (f, p) = (&rho.f, &rho.psi[0]);
            let dt = |s: &SuperSeries| s.d_odd(Side::Z, 1);
            let (fz, ft, pz, pt) = (dz(f), dt(f), dz(p), dt(p));
            let (fzz, pzz, fzt, pzt) = (dz(&fz), dz(&pz), dt(&fz), dt(&pz));
            let det = fz.mul(&pt).sub(&pz.mul(&ft));
            let det2 = ft.mul(&pz).sub(&pt.mul(&fz));
            let di = det.invert()?;
            let d2i = det2.invert()?;
            let pti = pt.invert()?;
            let v1 = fzz.mul(&pt).sub(&pzz.mul(&ft)).mul(&di).scale_q(&half);
            let q1 = fzz.mul(&pz).sub(&pzz.mul(&fz)).mul(&d2i).scale_q(&half);
            let h1 = fzt.mul(&pt).sub(&pzt.mul(&ft)).mul(&di);
            let u1 = fzt
                .mul(&pz)
                .sub(&pzt.mul(&fz))
                .mul(&d2i)
                .add(&pzz.mul(&ft).sub(&fzz.mul(&pt)).mul(&di));
            Ok(vec![
                ("A".into(), det.mul(&pti)),
                ("B".into(), pt.mul(&pt).mul(&di)),
                ("h0".into(), ft.mul(&pt).mul(&di)),
                ("q0".into(), pz.mul(&pti)),
                ("v1".into(), v1),
                ("q1".into(), q1),
                ("h1".into(), h1),
                ("u1".into(), u1),
            ])
        }
        Family::K12 => Err(Error::Invalid("use the complex K12 family".into())),
    }
}

impl fmt::Display for ExpCoords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, v)) in self.values.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} = {}", n, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Sampler;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn displayed_generators() {
        let ch = Chart::new(1);
        let t0 = generator(Family::W11, "T", r(0), 8).unwrap();
        assert!(t0.comps[0].eq_trunc(&SuperSeries::z(ch, 8).neg()));
        assert!(t0.comps[1].eq_trunc(&SuperSeries::theta(ch, 8, 1).neg()));
        let g = generator(Family::K11, "G", half(), 8).unwrap();
        let z = SuperSeries::z(ch, 8);
        assert!(g.comps[1].eq_trunc(&z.neg()));
        assert!(g.comps[0].eq_trunc(&SuperSeries::theta(ch, 8, 1).mul(&z)));
        let j = generator(Family::K12Complex, "J", r(0), 8).unwrap();
        assert!(j.comps[1].eq_trunc(&SuperSeries::theta(Chart::complex2(), 8, 1).neg()));
        assert!(matches!(generator(Family::K11, "G", r(1), 8), Err(Error::OutOfRange(_))));
        assert!(matches!(generator(Family::K11, "L", r(-1), 8), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn families_close() {
        for f in [Family::W11, Family::K11, Family::K12, Family::K12Complex] {
            let rep = verify_family(f, 3);
            assert!(rep.checked > 0);
            assert!(rep.mismatches.is_empty(), "{}: {:?}", f, rep.mismatches.first());
        }
    }

    #[test]
    fn exp_action_example() {
        let ch = Chart::new(1);
        let z = SuperSeries::z(ch, 6);
        let x = SuperVectorField { side: Side::Z, comps: vec![z.mul(&z).neg().scale(&Scalar::param("t")), SuperSeries::zero(ch, 6)] };
        let got = exp_action(&x, &z, Some(2)).unwrap();
        let t = Scalar::param("t");
        let want = z.sub(&z.pow(2).scale(&t)).add(&z.pow(3).scale(&t.mul(&t)));
        assert!(got.eq_trunc(&want));
        let zero = SuperVectorField::zero(ch, 6, Side::Z);
        assert!(exp_action(&zero, &z, None).unwrap().eq_trunc(&z));
    }

    #[test]
    fn super_jacobi() {
        let mut s = Sampler::new(41);
        let ch = Chart::new(2);
        let field = |s: &mut Sampler, p: Parity| SuperVectorField {
            side: Side::Z,
            comps: (0..=2)
                .map(|k| s.series(ch, 5, p.add(Parity::from_bool(k > 0)), 0, 0.4))
                .collect(),
        };
        for _ in 0..3 {
            let ps = [Parity::Even, Parity::Odd, Parity::Odd];
            let (x, y, z) = (field(&mut s, ps[0]), field(&mut s, ps[1]), field(&mut s, ps[2]));
            // [X,[Y,Z]] = [[X,Y],Z] + (−1)^{|X||Y|}[Y,[X,Z]]
            let l = x.bracket(&y.bracket(&z).unwrap()).unwrap();
            let r1 = x.bracket(&y).unwrap().bracket(&z).unwrap();
            let r2 = y.bracket(&x.bracket(&z).unwrap()).unwrap();
            assert!(l.eq_trunc(&r1.add(&r2)));
            // super-antisymmetry for two odd fields
            assert!(y.bracket(&z).unwrap().eq_trunc(&z.bracket(&y).unwrap()));
            assert!(x.bracket(&x).unwrap().is_zero());
        }
    }

    #[test]
    fn identity_coordinates() {
        let id = CoordinateChange::identity(Chart::new(1), 5, Variant::NK);
        let c = exp_coordinates(&id, Family::K11, 2).unwrap();
        assert!(c.get("A").unwrap().eq_trunc(&SuperSeries::one(Chart::new(1), 5)));
        for n in ["w1", "v1", "w2"] {
            assert!(c.get(n).unwrap().is_zero());
        }
    }

    fn compare(rho: &CoordinateChange, f: Family) {
        let c = exp_coordinates(rho, f, 2).unwrap();
        assert!(round_trip(rho, &c).unwrap(), "{} round trip", f);
        for (n, v) in closed_forms(rho, f).unwrap() {
            let got = c.get(&n).unwrap();
            assert!(got.eq_trunc(&v), "{} {}: solver {} closed {}", f, n, got, v);
        }
    }

    #[test]
    fn k11_matches_closed_forms() {
        let mut s = Sampler::new(2);
        for _ in 0..2 {
            compare(&s.superconformal_n1(6), Family::K11);
        }
    }

    #[test]
    fn w11_matches_closed_forms() {
        let mut s = Sampler::new(4);
        for _ in 0..2 {
            compare(&s.change(1, 5, Variant::NW), Family::W11);
        }
    }

    #[test]
    fn k12_matches_closed_forms() {
        let mut s = Sampler::new(6);
        compare(&s.oriented_n2(5), Family::K12Complex);
    }

    #[test]
    fn n2_schwarzian_vanishes_on_projective_maps() {
        let ch = Chart::complex2();
        let tr = 6;
        let g = |l: &str, n: Rational64| generator(Family::K12Complex, l, n, tr).unwrap();
        let x = g("G+", half())
            .scale(&Scalar::gen(1))
            .add(&g("G-", half()).scale(&Scalar::gen(2)))
            .add(&g("L", r(1)).scale_q(&qi_int(3)))
            .add(&g("J", r(0)).scale(&Scalar::gen(3).mul(&Scalar::gen(4))));
        let f = exp_action(&x, &SuperSeries::z(ch, tr), None).unwrap();
        let p1 = exp_action(&x, &SuperSeries::theta(ch, tr, 1), None).unwrap();
        let p2 = exp_action(&x, &SuperSeries::theta(ch, tr, 2), None).unwrap();
        let rho = CoordinateChange::new(f, vec![p1, p2], Variant::NK).unwrap();
        assert!(rho.is_superconformal(Level::N2Oriented));
        assert!(schwarzian_n2(&rho).unwrap().is_zero());
        let c = exp_coordinates(&rho, Family::K12Complex, 2).unwrap();
        assert!(c.get("u1").unwrap().is_zero());
    }
}
