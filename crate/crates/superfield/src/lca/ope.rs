//! Operator product expansion as a field-valued distribution in (Z, W).

use super::{sign_sigma, sign_sigma_full, LCAPresentation, ModeCalc, ModeElement};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::series::delta::{apply_d_jj, delta, delta_like};
use crate::series::{Chart, SuperSeries};

#[derive(Clone, Debug, Default)]
pub struct OpeReport {
    /// Coefficients compared, one per (θ^P z^p, ζ^Q w^q) in the window.
    pub checked: usize,
    /// Σ σ(J)(D_W^{(j|J)}δ)·Y(c) against Σ (i_{z,w} − i_{w,z})(Z−W)^{−1−j|N∖J}·Y(c).
    pub forms_agree: bool,
    /// Both forms against the commutators given by the mode calculus.
    pub modes_agree: bool,
    /// Number of nonzero coefficients; zero means the product is regular.
    pub nonzero: usize,
    pub mismatches: Vec<String>,
}

/// Coefficient of θ^P z^p ζ^Q w^q in dist·Y(c, W).
fn coefficient(calc: &ModeCalc, dist: &SuperSeries, c: &super::Nabla, p: i32, pm: u32, q: i64, qm: u32) -> ModeElement {
    let n = calc.alg.n;
    let low = (1u32 << n) - 1;
    let mut out = ModeElement::zero();
    for (m, k) in dist.terms() {
        if m.ez != p || m.odd & low != pm {
            continue;
        }
        let zt = m.odd >> n;
        if zt & !qm != 0 {
            continue;
        }
        let x = qm & !zt;
        let s = sign_sigma(zt, x).unwrap();
        let part = calc.field_coeff(c, q - m.ew as i64, x);
        out = out.add(&part.scale(&k.scale(&crate::scalar::qi_int(s))));
    }
    out
}

/// Build both forms of the OPE of generators a and b on |p|, |q| ≤ window
/// and compare them with each other and with the mode brackets.
pub fn ope_distribution(alg: &LCAPresentation, a: usize, b: usize, window: i32) -> Result<OpeReport> {
    let calc = ModeCalc::new(alg);
    let n = alg.n;
    let full = alg.full_mask();
    let chart = Chart::new(n).bivariate();
    let modes = calc.structure(a, b)?.clone();
    let mut lhs_parts = Vec::new();
    let mut rhs_parts = Vec::new();
    for (&(j, jm), c) in &modes {
        let big = window + j as i32 + n as i32 + 3;
        let d = delta(n, alg.variant, big + 2);
        let l = apply_d_jj(&d.series, alg.variant, j, jm).scale_int(sign_sigma_full(jm, n));
        let r = delta_like(chart, alg.variant, -1 - j as i64, full & !jm, big).series;
        lhs_parts.push((l, c.clone()));
        rhs_parts.push((r, c.clone()));
    }
    let mut rep = OpeReport { forms_agree: true, modes_agree: true, ..Default::default() };
    for p in -window..=window {
        for q in -window..=window {
            for pm in 0..=full {
                for qm in 0..=full {
                    rep.checked += 1;
                    let mut l = ModeElement::zero();
                    for (d, c) in &lhs_parts {
                        l = l.add(&coefficient(&calc, d, c, p, pm, q as i64, qm));
                    }
                    let mut r = ModeElement::zero();
                    for (d, c) in &rhs_parts {
                        r = r.add(&coefficient(&calc, d, c, p, pm, q as i64, qm));
                    }
                    let x = (a, -1 - p as i64, full & !pm);
                    let y = (b, -1 - q as i64, full & !qm);
                    let mut br = calc.gen_bracket(x, y)?;
                    if alg.mode_parity(&x).is_odd() && qm.count_ones() % 2 == 1 {
                        br = br.scale(&Scalar::int(-1));
                    }
                    if !l.is_zero() {
                        rep.nonzero += 1;
                    }
                    if l != r {
                        rep.forms_agree = false;
                        rep.mismatches.push(format!("forms differ at z^{} {:b} w^{} {:b}", p, pm, q, qm));
                    }
                    if l != br {
                        rep.modes_agree = false;
                        rep.mismatches.push(format!(
                            "modes differ at z^{} {:b} w^{} {:b}: {} vs {}",
                            p,
                            pm,
                            q,
                            qm,
                            l.display_with(alg),
                            br.display_with(alg)
                        ));
                    }
                }
            }
        }
    }
    Ok(rep)
}
