//! Physics labels for modes: component fields f(z) = Σ f_n z^{−Δ−n} of the
//! superfields, and the commutator tables they are expected to satisfy.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::{BigRational, Rational64};
use num_traits::One;

use super::{rat, rq, sq, LCAPresentation, ModeCalc, ModeElement};
use crate::error::{Error, Result};
use crate::scalar::{Parity, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct PhysField {
    pub name: String,
    pub parity: Parity,
    pub weight: Rational64,
}

/// Component (g, J) of Y(g, Z) is the coefficient of θ^{N∖J}, that is
/// Σ_j z^{−1−j} g_{(j|J)}.
#[derive(Clone, Debug)]
pub struct PhysicsBasis {
    pub fields: Vec<PhysField>,
    /// component (g, J) = Σ c·∂^k f
    pub comps: BTreeMap<(usize, u32), Vec<(Scalar, usize, u32)>>,
    /// f = Σ c·∂^k component (g, J)
    pub inverse: Vec<Vec<(Scalar, usize, u32, u32)>>,
}

/// Falling factorial x(x−1)…(x−k+1).
fn falling(x: Rational64, k: u32) -> BigRational {
    let mut out = BigRational::one();
    for i in 0..k as i64 {
        out *= rat(x - Rational64::from(i));
    }
    out
}

fn field(name: &str, parity: Parity, p: i64, q: i64) -> PhysField {
    PhysField { name: name.into(), parity, weight: Rational64::new(p, q) }
}

/// The physics basis of a catalog entry, or of any N = 0 presentation with
/// declared weights.
pub fn relabel_modes(alg: &LCAPresentation) -> Result<PhysicsBasis> {
    use Parity::{Even, Odd};
    let one = Scalar::one;
    let half = || Scalar::frac(1, 2);
    let b = match alg.name.as_str() {
        "K(1)" => PhysicsBasis {
            fields: vec![field("L", Even, 2, 1), field("G", Odd, 3, 2)],
            comps: BTreeMap::from([((0, 1), vec![(one(), 1, 0)]), ((0, 0), vec![(Scalar::int(2), 0, 0)])]),
            inverse: vec![vec![(half(), 0, 0, 0)], vec![(one(), 0, 1, 0)]],
        },
        // the J component enters as −√−1·J; with +√−1·J every J-linear
        // commutator of the G^{(i)} table comes out with the opposite sign
        "K(2)" => PhysicsBasis {
            fields: vec![field("L", Even, 2, 1), field("J", Even, 1, 1), field("G1", Odd, 3, 2), field("G2", Odd, 3, 2)],
            comps: BTreeMap::from([
                ((0, 3), vec![(Scalar::i().neg(), 1, 0)]),
                ((0, 2), vec![(one(), 3, 0)]),
                ((0, 1), vec![(Scalar::int(-1), 2, 0)]),
                ((0, 0), vec![(Scalar::int(2), 0, 0)]),
            ]),
            inverse: vec![
                vec![(half(), 0, 0, 0)],
                vec![(Scalar::i(), 0, 3, 0)],
                vec![(Scalar::int(-1), 0, 1, 0)],
                vec![(one(), 0, 2, 0)],
            ],
        },
        "W(1)" => {
            // generators: L = 0, Q = 1
            PhysicsBasis {
                fields: vec![field("L", Even, 2, 1), field("J", Even, 1, 1), field("G+", Odd, 3, 2), field("G-", Odd, 3, 2)],
                comps: BTreeMap::from([
                    ((1, 1), vec![(Scalar::int(-1), 1, 0)]),
                    ((1, 0), vec![(one(), 2, 0)]),
                    ((0, 1), vec![(one(), 3, 0)]),
                    ((0, 0), vec![(one(), 0, 0), (half(), 1, 1)]),
                ]),
                inverse: vec![
                    vec![(one(), 0, 0, 0), (half(), 1, 1, 1)],
                    vec![(Scalar::int(-1), 1, 1, 0)],
                    vec![(one(), 1, 0, 0)],
                    vec![(one(), 0, 1, 0)],
                ],
            }
        }
        "B1" => PhysicsBasis {
            fields: vec![field("alpha", Even, 1, 1), field("phi", Odd, 1, 2)],
            comps: BTreeMap::from([((0, 1), vec![(one(), 1, 0)]), ((0, 0), vec![(one(), 0, 0)])]),
            inverse: vec![vec![(one(), 0, 0, 0)], vec![(one(), 0, 1, 0)]],
        },
        _ if alg.n == 0 => {
            let mut fields = Vec::new();
            let mut comps = BTreeMap::new();
            let mut inverse = Vec::new();
            for (i, g) in alg.gens.iter().enumerate() {
                let wt = g.weight.ok_or_else(|| Error::NoWeightData(g.name.clone()))?;
                fields.push(PhysField { name: g.name.clone(), parity: g.parity, weight: wt });
                comps.insert((i, 0), vec![(one(), i, 0)]);
                inverse.push(vec![(one(), i, 0, 0)]);
            }
            PhysicsBasis { fields, comps, inverse }
        }
        other => return Err(Error::NoWeightData(other.into())),
    };
    Ok(b)
}

/// Sum of physics modes f_n plus a central scalar.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PhysElement {
    pub terms: BTreeMap<(String, Rational64), Scalar>,
    pub central: Scalar,
}

impl PhysElement {
    pub fn zero() -> PhysElement {
        PhysElement { terms: BTreeMap::new(), central: Scalar::zero() }
    }

    pub fn push(&mut self, f: &str, n: Rational64, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let k = (f.to_string(), n);
        let v = self.terms.entry(k.clone()).or_insert_with(Scalar::zero);
        *v += &c;
        if v.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn with(mut self, f: &str, n: Rational64, c: Scalar) -> PhysElement {
        self.push(f, n, c);
        self
    }

    pub fn with_central(mut self, c: Scalar) -> PhysElement {
        self.central = self.central.add(&c);
        self
    }

    pub fn scale(&self, c: &Scalar) -> PhysElement {
        let mut out = PhysElement::zero();
        for ((f, n), v) in &self.terms {
            out.push(f, *n, c.mul(v));
        }
        out.central = c.mul(&self.central);
        out
    }
}

impl fmt::Display for PhysElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for ((name, n), c) in &self.terms {
            let body = format!("{}_{}", name, n);
            parts.push(if c.is_one() { body } else { format!("({})*{}", c, body) });
        }
        if !self.central.is_zero() || parts.is_empty() {
            parts.push(self.central.to_string());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl PhysicsBasis {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    /// f_n as a combination of abstract modes.
    pub fn to_abstract(&self, f: usize, n: Rational64) -> Result<ModeElement> {
        let wt = self.fields[f].weight;
        let mut out = ModeElement::zero();
        for (c, g, jm, k) in &self.inverse[f] {
            let j = wt + n - Rational64::one() - Rational64::from(*k as i64);
            if !super::is_integral(&j) {
                return Err(Error::OutOfRange(format!("{}_{} is not a mode of weight {}", self.fields[f].name, n, wt)));
            }
            let coef = falling(-Rational64::one() - j, *k);
            out.push((*g, j.to_integer(), *jm), c.mul(&sq(coef)));
        }
        Ok(out)
    }

    pub fn from_abstract(&self, e: &ModeElement) -> PhysElement {
        let mut out = PhysElement::zero();
        for (&(g, j, jm), c) in &e.terms {
            if let Some(v) = self.comps.get(&(g, jm)) {
                for (cc, f, k) in v {
                    let wt = self.fields[*f].weight;
                    let n = Rational64::from(j + 1) - wt - Rational64::from(*k as i64);
                    let coef = falling(-wt - n, *k);
                    out.push(&self.fields[*f].name, n, c.mul(cc).mul(&Scalar::from_qi(rq(coef))));
                }
            }
        }
        out.central = e.central.clone();
        out
    }

    pub fn bracket(&self, calc: &ModeCalc, x: (usize, Rational64), y: (usize, Rational64)) -> Result<PhysElement> {
        let a = self.to_abstract(x.0, x.1)?;
        let b = self.to_abstract(y.0, y.1)?;
        Ok(self.from_abstract(&calc.bracket(&a, &b)?))
    }

    /// Mode indices n with |n| ≤ window, integral or half-integral by weight.
    pub fn indices(&self, f: usize, window: i64) -> Vec<Rational64> {
        let wt = self.fields[f].weight;
        if super::is_integral(&wt) {
            (-window..=window).map(Rational64::from).collect()
        } else {
            (-window..window).map(|k| Rational64::new(2 * k + 1, 2)).collect()
        }
    }
}

fn r(n: i64) -> Rational64 {
    Rational64::from(n)
}

fn sr(x: Rational64) -> Scalar {
    Scalar::from_qi(rq(rat(x)))
}

/// The displayed commutator [x_m, y_n] of a named table, if the pair is listed.
pub fn expected_bracket(table: &str, x: &str, m: Rational64, y: &str, n: Rational64) -> Option<PhysElement> {
    let c = Scalar::param("c");
    let d = m + n == r(0);
    let z = PhysElement::zero;
    let cent = |v: Rational64| if d { c.mul(&sr(v)) } else { Scalar::zero() };
    let s = m + n;
    let vir = |lab: &str| z().with(lab, s, sr(m - n)).with_central(cent((m * m * m - m) / r(12)));
    match (table, x, y) {
        ("virasoro" | "ns" | "n2" | "n2g", "L", "L") => Some(vir("L")),
        ("ns", "G", "L") => Some(z().with("G", s, sr(m - n / r(2)))),
        ("ns", "G", "G") => Some(z().with("L", s, Scalar::int(2)).with_central(cent((m * m - Rational64::new(1, 4)) / r(3)))),
        ("n2" | "n2g", "J", "J") => Some(z().with_central(cent(m / r(3)))),
        ("n2", "J", "G+") => Some(z().with("G+", s, Scalar::one())),
        ("n2", "J", "G-") => Some(z().with("G-", s, Scalar::int(-1))),
        ("n2", "G+" | "G-", "L") => Some(z().with(x, s, sr(m - n / r(2)))),
        ("n2" | "n2g", "L", "J") => Some(z().with("J", s, sr(-n))),
        ("n2", "G+", "G-") => Some(
            z().with("L", s, Scalar::one())
                .with("J", s, sr((m - n) / r(2)))
                .with_central(cent((m * m - Rational64::new(1, 4)) / r(6))),
        ),
        ("n2", "G+", "G+") | ("n2", "G-", "G-") => Some(z()),
        ("n2g", "G1" | "G2", "L") => Some(z().with(x, s, sr(m - n / r(2)))),
        ("n2g", "G1", "G1") | ("n2g", "G2", "G2") => {
            Some(z().with("L", s, Scalar::int(2)).with_central(cent((m * m - Rational64::new(1, 4)) / r(3))))
        }
        ("n2g", "G1", "G2") => Some(z().with("J", s, Scalar::i().mul(&sr(n - m)))),
        ("n2g", "J", "G1") => Some(z().with("G2", s, Scalar::i().neg())),
        ("n2g", "J", "G2") => Some(z().with("G1", s, Scalar::i())),
        ("n2tilde", "T", "T") => Some(z().with("T", s, sr(m - n))),
        ("n2tilde", "Q", "Q") | ("n2tilde", "H", "H") => Some(z()),
        ("n2tilde", "T", "H") => Some(z().with("H", s, sr(-n))),
        ("n2tilde", "T", "J") => Some(z().with("J", s, sr(-n)).with_central(cent(-m * (m + r(1)) / r(12)))),
        ("n2tilde", "T", "Q") => Some(z().with("Q", s, sr(m - n))),
        ("n2tilde", "H", "Q") => {
            Some(z().with("T", s, Scalar::one()).with("J", s, sr(-m)).with_central(cent(m * (m - r(1)) / r(6))))
        }
        ("bf", "alpha", "alpha") => Some(z().with_central(if d { sr(m) } else { Scalar::zero() })),
        ("bf", "phi", "phi") => Some(z().with_central(if d { Scalar::one() } else { Scalar::zero() })),
        ("bf", "alpha", "phi") => Some(z()),
        ("b2", "a+", "a-") | ("b2", "a-", "a+") => Some(z().with_central(if d { sr(m) } else { Scalar::zero() })),
        ("b2", "p+", "p-") | ("b2", "p-", "p+") => {
            Some(z().with_central(if d { Scalar::one() } else { Scalar::zero() }))
        }
        ("b2", _, _) => Some(z()),
        _ => None,
    }
}

#[derive(Clone, Debug, Default)]
pub struct TableReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl TableReport {
    pub fn ok(&self) -> bool {
        self.checked > 0 && self.mismatches.is_empty()
    }
}

/// Compare mode brackets against a displayed table for |m|, |n| ≤ window.
/// Pairs listed only in the other order are compared through
/// [y, x] = −(−1)^{|x||y|}[x, y].
pub fn check_table(alg: &LCAPresentation, basis: &PhysicsBasis, table: &str, window: i64) -> Result<TableReport> {
    let calc = ModeCalc::new(alg);
    let mut rep = TableReport::default();
    for (xi, xf) in basis.fields.iter().enumerate() {
        for (yi, yf) in basis.fields.iter().enumerate() {
            for m in basis.indices(xi, window) {
                for n in basis.indices(yi, window) {
                    let exp = match expected_bracket(table, &xf.name, m, &yf.name, n) {
                        Some(e) => e,
                        None => match expected_bracket(table, &yf.name, n, &xf.name, m) {
                            Some(e) => {
                                let both = xf.parity.is_odd() && yf.parity.is_odd();
                                e.scale(&Scalar::int(if both { 1 } else { -1 }))
                            }
                            None => continue,
                        },
                    };
                    rep.checked += 1;
                    let got = basis.bracket(&calc, (xi, m), (yi, n))?;
                    if got != exp {
                        rep.mismatches.push(format!(
                            "[{}_{}, {}_{}]: got {}, expected {}",
                            xf.name, m, yf.name, n, got, exp
                        ));
                    }
                }
            }
        }
    }
    Ok(rep)
}
