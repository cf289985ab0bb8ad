//! The example algebras with their displayed brackets. Reversed pairs are
//! filled in by skew-symmetry and pairs that are not mentioned vanish.

use num_rational::Rational64;

use super::{LCAPresentation, LambdaPoly, OpMono};
use crate::error::{Error, Result};
use crate::scalar::{Parity, Scalar};
use crate::series::Variant;

use Parity::{Even, Odd};

#[derive(Clone, Debug)]
pub struct CatalogParams {
    pub c: Scalar,
    pub m: Scalar,
    pub n: usize,
}

impl Default for CatalogParams {
    fn default() -> CatalogParams {
        CatalogParams { c: Scalar::param("c"), m: Scalar::param("m"), n: 1 }
    }
}

pub fn catalog_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("virasoro", "Virasoro field L (N = 0)"),
        ("ns", "Neveu-Schwarz: L, G (N = 0)"),
        ("n2", "N = 2: L, J, G+, G- (N = 0)"),
        ("n2tilde", "N = 2 in the basis T, J, Q, H (N = 0)"),
        ("n2g", "N = 2 in the basis L, J, G1, G2 (N = 0)"),
        ("w", "W(N): L, Q1..QN (NW, parameter N)"),
        ("k", "K(N), N <= 4: G (NK, parameter N)"),
        ("b1", "boson-fermion superfield Psi (NK, N = 1)"),
        ("bf", "boson-fermion components alpha, phi (N = 0)"),
        ("b2", "charged free fields a+, a-, p+, p- (N = 0)"),
    ]
}

fn w(p: i64, q: i64) -> Option<Rational64> {
    Some(Rational64::new(p, q))
}

fn l(k: u32) -> OpMono {
    OpMono::lam(k)
}

fn t() -> OpMono {
    OpMono::t(1)
}

fn q(p: i64, d: i64) -> Scalar {
    Scalar::frac(p, d)
}

/// (T + hλ)g: the bracket of L with a primary field of weight h.
fn primary(alg: &LCAPresentation, h: Rational64, g: usize) -> LambdaPoly {
    alg.empty_poly().with(Scalar::one(), t(), Some(g)).with(q(*h.numer(), *h.denom()), l(1), Some(g))
}

fn virasoro_into(alg: &mut LCAPresentation, c: &Scalar) -> Result<usize> {
    let lg = alg.gen("L", Even, w(2, 1));
    let p = primary(alg, Rational64::from(2), lg).with(c.mul(&q(1, 12)), l(3), None);
    alg.set(lg, lg, p)?;
    Ok(lg)
}

pub fn catalog(name: &str, params: &CatalogParams) -> Result<LCAPresentation> {
    let c = &params.c;
    let name = name.to_ascii_lowercase();
    let mut alg;
    match name.as_str() {
        "virasoro" | "vir" => {
            alg = LCAPresentation::new("virasoro", 0, Variant::NK);
            virasoro_into(&mut alg, c)?;
        }
        "ns" => {
            alg = LCAPresentation::new("ns", 0, Variant::NK);
            let lg = virasoro_into(&mut alg, c)?;
            let g = alg.gen("G", Odd, w(3, 2));
            alg.set(lg, g, primary(&alg, Rational64::new(3, 2), g))?;
            let p = alg.empty_poly().with(Scalar::int(2), OpMono::ONE, Some(lg)).with(c.mul(&q(1, 3)), l(2), None);
            alg.set(g, g, p)?;
        }
        "n2" => {
            alg = LCAPresentation::new("n2", 0, Variant::NK);
            let lg = virasoro_into(&mut alg, c)?;
            let j = alg.gen("J", Even, w(1, 1));
            let gp = alg.gen("G+", Odd, w(3, 2));
            let gm = alg.gen("G-", Odd, w(3, 2));
            alg.set(lg, j, primary(&alg, Rational64::from(1), j))?;
            for g in [gp, gm] {
                alg.set(lg, g, primary(&alg, Rational64::new(3, 2), g))?;
                alg.set(g, g, alg.empty_poly())?;
            }
            alg.set(j, j, alg.empty_poly().with(c.mul(&q(1, 3)), l(1), None))?;
            alg.set(j, gp, alg.empty_poly().with(Scalar::one(), OpMono::ONE, Some(gp)))?;
            alg.set(j, gm, alg.empty_poly().with(Scalar::int(-1), OpMono::ONE, Some(gm)))?;
            let p = alg
                .empty_poly()
                .with(Scalar::one(), OpMono::ONE, Some(lg))
                .with(q(1, 2), t(), Some(j))
                .with(Scalar::one(), l(1), Some(j))
                .with(c.mul(&q(1, 6)), l(2), None);
            alg.set(gp, gm, p)?;
        }
        "n2tilde" => {
            alg = LCAPresentation::new("n2tilde", 0, Variant::NK);
            let tg = alg.gen("T", Even, w(2, 1));
            let j = alg.gen("J", Even, w(1, 1));
            let qg = alg.gen("Q", Odd, w(2, 1));
            let h = alg.gen("H", Odd, w(1, 1));
            alg.set(tg, tg, primary(&alg, Rational64::from(2), tg))?;
            alg.set(tg, j, primary(&alg, Rational64::from(1), j).with(c.mul(&q(-1, 6)), l(2), None))?;
            alg.set(tg, qg, primary(&alg, Rational64::from(2), qg))?;
            alg.set(tg, h, primary(&alg, Rational64::from(1), h))?;
            let p = alg
                .empty_poly()
                .with(Scalar::one(), OpMono::ONE, Some(tg))
                .with(Scalar::int(-1), l(1), Some(j))
                .with(c.mul(&q(1, 6)), l(2), None);
            alg.set(h, qg, p)?;
            // J keeps its N = 2 brackets: Q = G⁺ and H = G⁻
            alg.set(j, j, alg.empty_poly().with(c.mul(&q(1, 3)), l(1), None))?;
            alg.set(j, qg, alg.empty_poly().with(Scalar::one(), OpMono::ONE, Some(qg)))?;
            alg.set(j, h, alg.empty_poly().with(Scalar::int(-1), OpMono::ONE, Some(h)))?;
            alg.set(qg, qg, alg.empty_poly())?;
            alg.set(h, h, alg.empty_poly())?;
        }
        "n2g" => {
            alg = LCAPresentation::new("n2g", 0, Variant::NK);
            let lg = virasoro_into(&mut alg, c)?;
            let j = alg.gen("J", Even, w(1, 1));
            let g1 = alg.gen("G1", Odd, w(3, 2));
            let g2 = alg.gen("G2", Odd, w(3, 2));
            alg.set(lg, j, primary(&alg, Rational64::from(1), j))?;
            for g in [g1, g2] {
                alg.set(lg, g, primary(&alg, Rational64::new(3, 2), g))?;
                let p = alg.empty_poly().with(Scalar::int(2), OpMono::ONE, Some(lg)).with(c.mul(&q(1, 3)), l(2), None);
                alg.set(g, g, p)?;
            }
            alg.set(j, j, alg.empty_poly().with(c.mul(&q(1, 3)), l(1), None))?;
            let mi = Scalar::i().neg();
            let p = alg.empty_poly().with(mi.clone(), t(), Some(j)).with(mi.mul(&Scalar::int(2)), l(1), Some(j));
            alg.set(g1, g2, p)?;
            alg.set(j, g1, alg.empty_poly().with(mi, OpMono::ONE, Some(g2)))?;
            alg.set(j, g2, alg.empty_poly().with(Scalar::i(), OpMono::ONE, Some(g1)))?;
        }
        "w" => {
            let n = params.n;
            if n == 0 {
                return catalog("virasoro", params);
            }
            alg = LCAPresentation::new(&format!("W({})", n), n, Variant::NW);
            let pl = Parity::from_bool(n % 2 == 1);
            let lg = alg.gen("L", pl, w(2, 1));
            let qs: Vec<usize> = (1..=n)
                .map(|i| {
                    let nm = if n == 1 { "Q".to_string() } else { format!("Q{}", i) };
                    alg.gen(&nm, pl.flip(), w(1, 1))
                })
                .collect();
            alg.set(lg, lg, primary(&alg, Rational64::from(2), lg))?;
            let sgn = if n % 2 == 0 { Scalar::one() } else { Scalar::int(-1) };
            for i in 1..=n {
                let qi = qs[i - 1];
                let mut p = primary(&alg, Rational64::from(1), qi).with(sgn.clone(), OpMono::chi(i), Some(lg));
                if n == 1 {
                    p = p.with(c.mul(&q(1, 6)), l(2), None);
                }
                alg.set(lg, qi, p)?;
                for j in 1..=n {
                    let qj = qs[j - 1];
                    let mut p = alg.empty_poly();
                    if i == j {
                        p.push(Scalar::one(), OpMono::s(i), Some(qi));
                        if n == 1 {
                            let lx = OpMono { lam: 1, chi: 1, t: 0, s: 0 };
                            p.push(c.mul(&q(1, 3)), lx, None);
                        }
                        alg.set(qi, qi, p)?;
                    } else if i < j {
                        p.push(Scalar::one(), OpMono::s(i), Some(qj));
                        p.push(Scalar::one(), OpMono::chi(i), Some(qj));
                        p.push(Scalar::int(-1), OpMono::chi(j), Some(qi));
                        if n == 2 {
                            p.push(c.mul(&q(1, 6)), l(1), None);
                        }
                        alg.set(qi, qj, p)?;
                    }
                }
            }
        }
        "k" => {
            let n = params.n;
            if n > 4 {
                return Err(Error::UnsupportedN(n));
            }
            alg = LCAPresentation::new(&format!("K({})", n), n, Variant::NK);
            let g = alg.gen("G", Parity::from_bool(n % 2 == 1), Some(Rational64::new(4 - n as i64, 2)));
            let mut p = alg.empty_poly().with(Scalar::int(2), t(), Some(g));
            if n < 4 {
                p.push(Scalar::int(4 - n as i64), l(1), Some(g));
                let full = (1u32 << n) - 1;
                let top = OpMono { lam: 3 - n as u32, chi: full, t: 0, s: 0 };
                p.push(c.mul(&q(1, 3)), top, None);
            } else {
                p.push(c.clone(), l(1), None);
            }
            // N = 4 writes S^iχ^i; only the reading χ^iS^i is skew-symmetric
            for i in 1..=n {
                let op = OpMono { chi: 1 << (i - 1), s: 1 << (i - 1), ..OpMono::ONE };
                p.push(Scalar::one(), op, Some(g));
            }
            alg.set(g, g, p)?;
        }
        "b1" => {
            alg = LCAPresentation::new("B1", 1, Variant::NK);
            let psi = alg.gen("Psi", Odd, w(1, 2));
            alg.set(psi, psi, alg.empty_poly().with(Scalar::one(), OpMono::chi(1), None))?;
        }
        "bf" => {
            alg = LCAPresentation::new("bf", 0, Variant::NK);
            let a = alg.gen("alpha", Even, w(1, 1));
            let f = alg.gen("phi", Odd, w(1, 2));
            alg.set(a, a, alg.empty_poly().with(Scalar::one(), l(1), None))?;
            alg.set(f, f, alg.empty_poly().with(Scalar::one(), OpMono::ONE, None))?;
        }
        "b2" => {
            alg = LCAPresentation::new("B2", 0, Variant::NK);
            let ap = alg.gen("a+", Even, w(1, 1));
            let am = alg.gen("a-", Even, w(1, 1));
            let pp = alg.gen("p+", Odd, w(1, 2));
            let pm = alg.gen("p-", Odd, w(1, 2));
            alg.set(ap, am, alg.empty_poly().with(Scalar::one(), l(1), None))?;
            alg.set(am, ap, alg.empty_poly().with(Scalar::one(), l(1), None))?;
            alg.set(pp, pm, alg.empty_poly().with(Scalar::one(), OpMono::ONE, None))?;
            alg.set(pm, pp, alg.empty_poly().with(Scalar::one(), OpMono::ONE, None))?;
        }
        other => return Err(Error::Invalid(format!("unknown catalog entry {}", other))),
    }
    alg.complete(true);
    Ok(alg)
}
