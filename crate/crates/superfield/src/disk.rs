//! Formal coordinate changes of the superdisk D^{1|N}: composition,
//! localization at a moving base point, superconformal predicates, the
//! Berezinian of the Jacobian and Schwarzian derivatives.

use std::fmt;

use crate::error::{Error, Result};
use crate::random::Sampler;
use crate::scalar::{qi_frac, Parity, Scalar};
use crate::series::{sum_point, Chart, Derivation, Dir, Mono, Side, SuperSeries, Variant};
use crate::supermatrix::SuperMatrix;

/// z ↦ F(z, θ), θ^i ↦ Ψ^i(z, θ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    pub f: SuperSeries,
    pub psi: Vec<SuperSeries>,
    pub variant: Variant,
}

/// Which superconformal condition to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    N1,
    N2,
    N2Oriented,
}

/// Outcome of a residual-based predicate.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub holds: bool,
    pub residuals: Vec<(String, SuperSeries)>,
}

fn check_parity(s: &SuperSeries, want: Parity, what: &str) -> Result<()> {
    match s.parity() {
        Some(p) if p == want => Ok(()),
        _ => Err(Error::Parity(format!("{} must be {:?}, got {}", what, want, s))),
    }
}

impl CoordinateChange {
    pub fn new(f: SuperSeries, psi: Vec<SuperSeries>, variant: Variant) -> Result<CoordinateChange> {
        let chart = f.chart();
        if chart.biv || psi.len() != chart.n || psi.iter().any(|p| p.chart() != chart) {
            return Err(Error::ChartMismatch("components of a change live on different charts".into()));
        }
        check_parity(&f, Parity::Even, "F")?;
        for (i, p) in psi.iter().enumerate() {
            check_parity(p, Parity::Odd, &format!("Psi{}", i + 1))?;
        }
        let rho = CoordinateChange { f, psi, variant };
        let jet = rho.jacobian().map_entries(|s| s.coeff(&Mono::ONE));
        let d = jet.sdet().map_err(|_| Error::SingularJet)?;
        if d.body().is_zero() || d.invert().is_err() {
            return Err(Error::SingularJet);
        }
        Ok(rho)
    }

    pub fn identity(chart: Chart, trunc: i32, variant: Variant) -> CoordinateChange {
        CoordinateChange {
            f: SuperSeries::z(chart, trunc),
            psi: (1..=chart.n).map(|i| SuperSeries::theta(chart, trunc, i)).collect(),
            variant,
        }
    }

    pub fn chart(&self) -> Chart {
        self.f.chart()
    }

    pub fn n(&self) -> usize {
        self.chart().n
    }

    pub fn trunc(&self) -> i32 {
        self.psi.iter().map(|p| p.trunc()).fold(self.f.trunc(), i32::min)
    }

    pub fn with_trunc(&self, t: i32) -> CoordinateChange {
        CoordinateChange {
            f: self.f.with_trunc(t),
            psi: self.psi.iter().map(|p| p.with_trunc(t)).collect(),
            variant: self.variant,
        }
    }

    /// g ∘ ρ.
    pub fn pull(&self, g: &SuperSeries) -> SuperSeries {
        g.substitute(&[self.f.clone()], &self.psi)
    }

    /// (ρ⋆τ)(Z) = τ(ρ(Z)).
    pub fn compose(&self, tau: &CoordinateChange) -> Result<CoordinateChange> {
        if self.chart() != tau.chart() || self.variant != tau.variant {
            return Err(Error::ChartMismatch(format!(
                "cannot compose {:?}/{} with {:?}/{}",
                self.chart(),
                self.variant,
                tau.chart(),
                tau.variant
            )));
        }
        Ok(CoordinateChange {
            f: self.pull(&tau.f),
            psi: tau.psi.iter().map(|p| self.pull(p)).collect(),
            variant: self.variant,
        })
    }

    pub fn eq_trunc(&self, o: &CoordinateChange) -> bool {
        self.f.eq_trunc(&o.f) && self.psi.iter().zip(&o.psi).all(|(a, b)| a.eq_trunc(b))
    }

    /// Matrix of partials: rows (z, θ¹..θᴺ), columns (F, Ψ¹..Ψᴺ).
    pub fn jacobian(&self) -> SuperMatrix<SuperSeries> {
        let n = self.n();
        let mut par = vec![Parity::Even];
        par.extend(std::iter::repeat(Parity::Odd).take(n));
        let comps: Vec<&SuperSeries> = std::iter::once(&self.f).chain(self.psi.iter()).collect();
        let e = (0..=n)
            .map(|r| {
                comps
                    .iter()
                    .map(|c| if r == 0 { c.d_even(Side::Z) } else { c.d_odd(Side::Z, r) })
                    .collect()
            })
            .collect();
        SuperMatrix::new(par.clone(), par, e)
    }

    /// ρ_Z(W) = ρ(W+Z) − ρ(Z), a change in W with coefficients in Z.
    pub fn localize(&self) -> LocalChange {
        let ch = self.chart().bivariate();
        let t = self.trunc();
        let (e, o) = sum_point(ch, t, self.variant, Dir::Right);
        let at = |s: &SuperSeries| s.substitute(&[e.clone()], &o);
        let pf = at(&self.f);
        let ppsi: Vec<SuperSeries> = self.psi.iter().map(at).collect();
        let q: Vec<SuperSeries> = self.psi.iter().map(|p| p.embed_z()).collect();
        let mut f = pf.sub(&self.f.embed_z());
        if self.variant == Variant::NK {
            for (i, j, c) in ch.pairing() {
                f = f.sub(&ppsi[i - 1].mul(&q[j - 1]).scale_q(&c));
            }
        }
        let psi = ppsi.iter().zip(&q).map(|(p, q)| p.sub(q)).collect();
        LocalChange { f, psi, variant: self.variant }
    }

    /// Residuals of the superconformal conditions, LHS − RHS.
    pub fn superconformal(&self, level: Level) -> Result<Verdict> {
        let mut res = Vec::new();
        match level {
            Level::N1 => {
                if self.n() != 1 {
                    return Err(Error::UnsupportedN(self.n()));
                }
                let d = |s: &SuperSeries| s.derive(Derivation::D(1)).unwrap();
                let p = &self.psi[0];
                res.push(("DF - Psi*DPsi".to_string(), d(&self.f).sub(&p.mul(&d(p)))));
            }
            Level::N2 => {
                if self.n() != 2 || self.chart().complex {
                    return Err(Error::UnsupportedN(self.n()));
                }
                for i in 1..=2 {
                    let d = |s: &SuperSeries| s.derive(Derivation::D(i)).unwrap();
                    let mut r = d(&self.f);
                    for p in &self.psi {
                        r = r.sub(&p.mul(&d(p)));
                    }
                    res.push((format!("D{}F - sum Psi*D{}Psi", i, i), r));
                }
            }
            Level::N2Oriented => {
                if !self.chart().complex {
                    return Err(Error::UnsupportedN(self.n()));
                }
                let (pp, pm) = (&self.psi[0], &self.psi[1]);
                let half = qi_frac(1, 2);
                for (name, d) in [("D+", Derivation::Dplus), ("D-", Derivation::Dminus)] {
                    let dd = |s: &SuperSeries| s.derive(d).unwrap();
                    let rhs = pp.mul(&dd(pm)).add(&pm.mul(&dd(pp))).scale_q(&half);
                    res.push((format!("{}F", name), dd(&self.f).sub(&rhs)));
                }
                res.push(("D+Psi+".to_string(), pp.derive(Derivation::Dplus)?));
                res.push(("D-Psi-".to_string(), pm.derive(Derivation::Dminus)?));
            }
        }
        let holds = res.iter().all(|(_, r)| r.is_zero());
        Ok(Verdict { holds, residuals: res })
    }

    pub fn is_superconformal(&self, level: Level) -> bool {
        self.superconformal(level).map(|v| v.holds).unwrap_or(false)
    }

    /// Coefficients of the pulled-back form ω = dz + Σθ^i dθ^i on (dz, dθ¹, …).
    pub fn pullback_form(&self) -> Result<Vec<SuperSeries>> {
        if !(1..=2).contains(&self.n()) {
            return Err(Error::UnsupportedN(self.n()));
        }
        let mut dz = self.f.d_even(Side::Z);
        for p in &self.psi {
            dz = dz.add(&p.mul(&p.d_even(Side::Z)));
        }
        let mut out = vec![dz];
        for j in 1..=self.n() {
            let mut c = self.f.d_odd(Side::Z, j).neg();
            for p in &self.psi {
                c = c.add(&p.mul(&p.d_odd(Side::Z, j)));
            }
            out.push(c);
        }
        Ok(out)
    }

    /// σ(DΨ) for an N = 1 change.
    pub fn schwarzian(&self) -> Result<SuperSeries> {
        if self.n() != 1 {
            return Err(Error::UnsupportedN(self.n()));
        }
        schwarzian_n1(&self.psi[0].derive(Derivation::D(1))?)
    }
}

/// σ(G) = D³G/G − 2·DG·D²G/G².
pub fn schwarzian_n1(g: &SuperSeries) -> Result<SuperSeries> {
    let d = |s: &SuperSeries| s.derive(Derivation::D(1));
    let g1 = d(g)?;
    let g2 = d(&g1)?;
    let g3 = d(&g2)?;
    let ginv = g.invert()?;
    Ok(g3.mul(&ginv).sub(&g1.mul(&g2).mul(&ginv).mul(&ginv).scale_int(2)))
}

/// N = 2 Schwarzian of an oriented change in complex coordinates:
/// −[½(D⁻Ψ⁺_z/D⁻Ψ⁺ − D⁺Ψ⁻_z/D⁺Ψ⁻) − ½Ψ⁻_zΨ⁺_z/(D⁻Ψ⁺·D⁺Ψ⁻)].
/// The odd factors are ordered Ψ⁻_zΨ⁺_z: with this order σ₂ vanishes on the
/// projective maps generated by L₁, J₀ and G±_{1/2}.
pub fn schwarzian_n2(rho: &CoordinateChange) -> Result<SuperSeries> {
    let v = rho.superconformal(Level::N2Oriented)?;
    if !v.holds {
        let r = v.residuals.iter().find(|(_, r)| !r.is_zero()).unwrap();
        return Err(Error::NotSuperconformal(format!("{}: {}", r.0, r.1)));
    }
    let (pp, pm) = (&rho.psi[0], &rho.psi[1]);
    let dm_pp = pp.derive(Derivation::Dminus)?;
    let dp_pm = pm.derive(Derivation::Dplus)?;
    let pp_z = pp.d_even(Side::Z);
    let pm_z = pm.d_even(Side::Z);
    let a = pp_z.derive(Derivation::Dminus)?.div(&dm_pp)?;
    let b = pm_z.derive(Derivation::Dplus)?.div(&dp_pm)?;
    let c = pm_z.mul(&pp_z).div(&dm_pp.mul(&dp_pm))?;
    let half = qi_frac(1, 2);
    let u1 = a.sub(&b).scale_q(&half).sub(&c.scale_q(&half));
    Ok(u1.neg())
}

/// (F, Ψ) ↦ (F + (DF/DΨ)Ψ, DF/DΨ), read in the hatted chart.
pub fn dual_transition(rho: &CoordinateChange) -> Result<CoordinateChange> {
    if rho.n() != 1 {
        return Err(Error::UnsupportedN(rho.n()));
    }
    let d = |s: &SuperSeries| s.derive(Derivation::D(1)).unwrap();
    let p = &rho.psi[0];
    let q = d(&rho.f).div(&d(p))?;
    Ok(CoordinateChange { f: rho.f.add(&q.mul(p)), psi: vec![q], variant: rho.variant })
}

/// Transition rule of the extra odd coordinate ρ_β = m·ρ_α + s:
/// m = sdet of the Jacobian, s = ∂_θF/∂_θΨ.
pub fn n2_from_n1(rho: &CoordinateChange) -> Result<(SuperSeries, SuperSeries)> {
    if rho.n() != 1 {
        return Err(Error::UnsupportedN(rho.n()));
    }
    let m = rho.jacobian().sdet()?;
    let s = rho.f.d_odd(Side::Z, 1).div(&rho.psi[0].d_odd(Side::Z, 1))?;
    Ok((m, s))
}

/// A change in W whose coefficients are series in Z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalChange {
    pub f: SuperSeries,
    pub psi: Vec<SuperSeries>,
    pub variant: Variant,
}

impl LocalChange {
    /// W ↦ τ_{ρ(Z)}(ρ_Z(W)), with `self` = τ_Y(W) as a two-chart series.
    pub fn rebased(&self, rho: &CoordinateChange, rho_z: &LocalChange) -> LocalChange {
        let even = [rho.f.embed_z(), rho_z.f.clone()];
        let mut odd: Vec<SuperSeries> = rho.psi.iter().map(|p| p.embed_z()).collect();
        odd.extend(rho_z.psi.iter().cloned());
        let sub = |s: &SuperSeries| s.substitute(&even, &odd);
        LocalChange { f: sub(&self.f), psi: self.psi.iter().map(sub).collect(), variant: self.variant }
    }

    pub fn eq_trunc(&self, o: &LocalChange) -> bool {
        self.f.eq_trunc(&o.f) && self.psi.iter().zip(&o.psi).all(|(a, b)| a.eq_trunc(b))
    }

    /// The change at the origin of the base point.
    pub fn at_origin(&self) -> CoordinateChange {
        let down = |s: &SuperSeries| {
            let t = s.at_z_origin();
            let n = s.chart().n;
            let terms = t
                .terms()
                .iter()
                .map(|(m, c)| (Mono { ez: m.ew, ew: 0, odd: m.odd >> n }, c.clone()))
                .collect();
            SuperSeries::from_terms(s.chart().single(), s.trunc(), terms)
        };
        CoordinateChange { f: down(&self.f), psi: self.psi.iter().map(down).collect(), variant: self.variant }
    }
}

/// Both sides of (ρ⋆τ)_Z = ρ_Z ⋆ τ_{ρ(Z)}.
pub fn cocycle_sides(rho: &CoordinateChange, tau: &CoordinateChange) -> Result<(LocalChange, LocalChange)> {
    let lhs = rho.compose(tau)?.localize();
    let rhs = tau.localize().rebased(rho, &rho.localize());
    Ok((lhs, rhs))
}

impl<T: Clone> SuperMatrix<T> {
    pub fn map_entries<U>(&self, f: impl Fn(&T) -> U) -> SuperMatrix<U> {
        SuperMatrix {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            e: self.e.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }
}

/// z' = (az + b + αθ)/(cz + d + βθ), θ' = (γz + δ + eθ)/(cz + d + βθ) for
/// the matrix [[a, b, α], [c, d, β], [γ, δ, e]].
pub fn fractional_linear(m: &SuperMatrix<Scalar>, trunc: i32) -> Result<CoordinateChange> {
    let ch = Chart::new(1);
    let z = SuperSeries::z(ch, trunc);
    let th = SuperSeries::theta(ch, trunc, 1);
    let row = |r: usize| {
        z.scale(&m.e[r][0])
            .add(&SuperSeries::constant(ch, trunc, m.e[r][1].clone()))
            .add(&th.scale(&m.e[r][2]))
    };
    let den = row(1).invert()?;
    CoordinateChange::new(row(0).mul(&den), vec![row(2).mul(&den)], Variant::NK)
}

fn gen_matrix(e: [[Scalar; 3]; 3]) -> SuperMatrix<Scalar> {
    use Parity::{Even, Odd};
    let par = vec![Even, Even, Odd];
    SuperMatrix::new(par.clone(), par, e.into_iter().map(|r| r.to_vec()).collect())
}

/// Random superconformal fractional-linear transformation with sdet 1, as a
/// product of translations, dilations, inversions and the two odd shifts.
pub fn superprojective_sample(s: &mut Sampler, trunc: i32) -> (SuperMatrix<Scalar>, CoordinateChange) {
    let o = Scalar::zero;
    let l = Scalar::one;
    loop {
        let mut m = gen_matrix([[l(), o(), o()], [o(), l(), o()], [o(), o(), l()]]);
        for _ in 0..5 {
            let g = match (s.coin(0.5), s.coin(0.5), s.coin(0.5)) {
                (true, true, _) => gen_matrix([[l(), s.even_scalar(), o()], [o(), l(), o()], [o(), o(), l()]]),
                (true, false, _) => {
                    let a = s.unit_scalar();
                    let ainv = a.invert().unwrap();
                    gen_matrix([[a, o(), o()], [o(), ainv, o()], [o(), o(), l()]])
                }
                (false, true, true) => gen_matrix([[l(), o(), o()], [s.even_scalar(), l(), o()], [o(), o(), l()]]),
                (false, true, false) => {
                    let e = s.odd_scalar();
                    gen_matrix([[l(), o(), e.neg()], [o(), l(), o()], [o(), e, l()]])
                }
                (false, false, _) => {
                    let g = s.odd_scalar();
                    gen_matrix([[l(), o(), o()], [o(), l(), g.clone()], [g, o(), l()]])
                }
            };
            m = g.mul(&m);
        }
        if let Ok(rho) = fractional_linear(&m, trunc) {
            return (m, rho);
        }
    }
}

/// The superconformal change F = z + z³, Ψ = θ·√(1 + 3z²), which is not
/// fractional linear.
pub fn cubic_change(trunc: i32) -> CoordinateChange {
    let ch = Chart::new(1);
    let z = SuperSeries::z(ch, trunc);
    let x = z.mul(&z).scale_int(3);
    // √(1 + x) = Σ C(1/2, k) x^k
    let mut g = SuperSeries::zero(ch, trunc);
    let mut xp = SuperSeries::one(ch, trunc);
    let mut k = 0u32;
    while !xp.is_zero() {
        g = g.add(&xp.scale_q(&half_binom(k)));
        xp = xp.mul(&x).with_trunc(trunc);
        k += 1;
    }
    let th = SuperSeries::theta(ch, trunc, 1);
    CoordinateChange::new(z.add(&z.pow(3)), vec![th.mul(&g)], Variant::NK).unwrap()
}

/// C(1/2, k).
fn half_binom(k: u32) -> crate::scalar::Qi {
    let mut c = qi_frac(1, 1);
    for i in 0..k as i64 {
        c = c * qi_frac(1 - 2 * i, 2 * (i + 1));
    }
    c
}

impl fmt::Display for CoordinateChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "change {{ F = {}", self.f)?;
        if self.n() == 1 {
            write!(f, ", Psi = {}", self.psi[0])?;
        } else {
            for (i, p) in self.psi.iter().enumerate() {
                write!(f, ", Psi{} = {}", i + 1, p)?;
            }
        }
        write!(f, " }}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::qi_i;

    fn ch1() -> Chart {
        Chart::new(1)
    }

    #[test]
    fn compose_example() {
        let t = 6;
        let z = SuperSeries::z(ch1(), t);
        let th = SuperSeries::theta(ch1(), t, 1);
        let rho = CoordinateChange::new(z.add(&z.mul(&z)), vec![th.clone()], Variant::NW).unwrap();
        let tau = CoordinateChange::new(z.clone(), vec![th.add(&th.mul(&z))], Variant::NW).unwrap();
        let c = rho.compose(&tau).unwrap();
        assert!(c.f.eq_trunc(&z.add(&z.mul(&z))));
        let want = th.add(&th.mul(&z)).add(&th.mul(&z).mul(&z));
        assert!(c.psi[0].eq_trunc(&want));
        let id = CoordinateChange::identity(ch1(), t, Variant::NW);
        assert!(id.compose(&rho).unwrap().eq_trunc(&rho));
        assert!(rho.compose(&id).unwrap().eq_trunc(&rho));
    }

    #[test]
    fn localize_example() {
        let t = 5;
        let z = SuperSeries::z(ch1(), t);
        let th = SuperSeries::theta(ch1(), t, 1);
        let rho = CoordinateChange::new(z.add(&z.mul(&z)), vec![th], Variant::NW).unwrap();
        let l = rho.localize();
        let b = Chart::new(1).bivariate();
        let zz = SuperSeries::even_var(b, t, Side::Z);
        let w = SuperSeries::even_var(b, t, Side::W);
        let want = w.add(&zz.mul(&w).scale_int(2)).add(&w.mul(&w));
        assert!(l.f.eq_trunc(&want));
        assert!(l.psi[0].eq_trunc(&SuperSeries::odd_var(b, t, Side::W, 1)));
        let id = CoordinateChange::identity(ch1(), t, Variant::NK).localize();
        assert!(id.f.eq_trunc(&w));
    }

    #[test]
    fn cocycle_random() {
        let mut s = Sampler::new(7);
        for variant in [Variant::NW, Variant::NK] {
            for n in 1..=2 {
                for _ in 0..2 {
                    let rho = s.change(n, 4, variant);
                    let tau = s.change(n, 4, variant);
                    let (a, b) = cocycle_sides(&rho, &tau).unwrap();
                    assert!(a.eq_trunc(&b), "{} N={}\n{:?}\n{:?}", variant, n, a.f, b.f);
                }
            }
        }
    }

    #[test]
    fn group_axioms() {
        let mut s = Sampler::new(11);
        let (a, b, c) = (s.change(2, 4, Variant::NK), s.change(2, 4, Variant::NK), s.change(2, 4, Variant::NK));
        let l = a.compose(&b).unwrap().compose(&c).unwrap();
        let r = a.compose(&b.compose(&c).unwrap()).unwrap();
        assert!(l.eq_trunc(&r));
    }

    #[test]
    fn parity_and_jet_errors() {
        let th = SuperSeries::theta(ch1(), 3, 1);
        assert!(matches!(
            CoordinateChange::new(th.clone(), vec![th.clone()], Variant::NK),
            Err(Error::Parity(_))
        ));
        let z = SuperSeries::z(ch1(), 3);
        assert!(matches!(
            CoordinateChange::new(z.mul(&z), vec![th], Variant::NK),
            Err(Error::SingularJet)
        ));
    }

    fn affine(t: i32) -> CoordinateChange {
        let z = SuperSeries::z(ch1(), t);
        let th = SuperSeries::theta(ch1(), t, 1);
        let a = Scalar::param("a");
        let b = Scalar::param("b");
        let xi = Scalar::gen(1);
        let f = z
            .scale(&a.mul(&a))
            .add(&th.mul(&SuperSeries::constant(ch1(), t, xi.mul(&a))))
            .add(&SuperSeries::constant(ch1(), t, b));
        let p = th.scale(&a).add(&SuperSeries::constant(ch1(), t, xi));
        CoordinateChange::new(f, vec![p], Variant::NK).unwrap()
    }

    #[test]
    fn affine_superconformal() {
        let rho = affine(4);
        assert!(rho.superconformal(Level::N1).unwrap().holds);
        let j = rho.jacobian();
        assert!(j.get(0, 0).eq_trunc(&SuperSeries::constant(ch1(), 4, Scalar::param("a").pow(2))));
        // self-dual
        assert!(dual_transition(&rho).unwrap().eq_trunc(&rho));
        let (m, sh) = n2_from_n1(&rho).unwrap();
        assert!(m.eq_trunc(&SuperSeries::constant(ch1(), 4, Scalar::param("a"))));
        assert!(sh.eq_trunc(&SuperSeries::constant(ch1(), 4, Scalar::gen(1))));
    }

    #[test]
    fn odd_shift_residual() {
        let t = 3;
        let z = SuperSeries::z(ch1(), t);
        let th = SuperSeries::theta(ch1(), t, 1);
        let eps = SuperSeries::constant(ch1(), t, Scalar::param("eps").mul(&Scalar::gen(1)));
        let rho = CoordinateChange::new(z, vec![th.add(&eps)], Variant::NK).unwrap();
        let v = rho.superconformal(Level::N1).unwrap();
        assert!(!v.holds);
        // DF − ΨDΨ = θ − (θ + ε)
        assert!(v.residuals[0].1.eq_trunc(&eps.neg()));
    }

    #[test]
    fn n2_form_example() {
        let ch = Chart::new(2);
        let t = 3;
        let z = SuperSeries::z(ch, t);
        let t1 = SuperSeries::theta(ch, t, 1);
        let t2 = SuperSeries::theta(ch, t, 2);
        let f = z.sub(&t1.mul(&t2).scale_q(&qi_frac(1, 2)));
        let p1 = t2.sub(&t1).scale_q(&(qi_i() * qi_frac(1, 2)));
        let p2 = t1.add(&t2).scale_q(&qi_frac(1, 2));
        let rho = CoordinateChange::new(f, vec![p1, p2], Variant::NK).unwrap();
        let w = rho.pullback_form().unwrap();
        assert!(w[0].eq_trunc(&SuperSeries::one(ch, t)));
        assert!(w[1].eq_trunc(&t2));
        assert!(w[2].is_zero());
    }

    #[test]
    fn superconformal_form_multiple() {
        let mut s = Sampler::new(3);
        for _ in 0..4 {
            let rho = s.superconformal_n1(5);
            assert!(rho.is_superconformal(Level::N1));
            let w = rho.pullback_form().unwrap();
            let th = SuperSeries::theta(ch1(), 5, 1);
            assert!(w[1].eq_trunc(&th.mul(&w[0])));
            // the sdet of the Jacobian equals D(DF/DΨ)
            let d = |x: &SuperSeries| x.derive(Derivation::D(1)).unwrap();
            let q = d(&d(&rho.f).div(&d(&rho.psi[0])).unwrap());
            let (m, _) = n2_from_n1(&rho).unwrap();
            assert!(m.eq_trunc(&q));
            let tau = s.superconformal_n1(5);
            assert!(rho.compose(&tau).unwrap().is_superconformal(Level::N1));
        }
    }

    #[test]
    fn n2_lift_cocycle() {
        let mut s = Sampler::new(5);
        for _ in 0..3 {
            let rho = s.change(1, 4, Variant::NK);
            let tau = s.change(1, 4, Variant::NK);
            let (m1, s1) = n2_from_n1(&rho).unwrap();
            let (m2, s2) = n2_from_n1(&tau).unwrap();
            let (m, sh) = n2_from_n1(&rho.compose(&tau).unwrap()).unwrap();
            let m2r = rho.pull(&m2);
            assert!(m.eq_trunc(&m2r.mul(&m1)));
            assert!(sh.eq_trunc(&m2r.mul(&s1).add(&rho.pull(&s2))));
        }
    }

    #[test]
    fn schwarzians() {
        let id = CoordinateChange::identity(ch1(), 5, Variant::NK);
        assert!(id.schwarzian().unwrap().is_zero());
        let mut s = Sampler::new(19);
        for _ in 0..5 {
            let (m, rho) = superprojective_sample(&mut s, 5);
            assert!(m.sdet().unwrap().is_one());
            assert!(rho.is_superconformal(Level::N1));
            assert!(rho.schwarzian().unwrap().is_zero());
        }
        let t = 5;
        let c = cubic_change(t);
        assert!(c.is_superconformal(Level::N1));
        // σ = θ(3 − 18z²)/(1 + 3z²)²
        let z = SuperSeries::z(ch1(), t);
        let th = SuperSeries::theta(ch1(), t, 1);
        let den = SuperSeries::one(ch1(), t).add(&z.mul(&z).scale_int(3)).pow(2);
        let num = SuperSeries::one(ch1(), t).scale_int(3).sub(&z.mul(&z).scale_int(18));
        let want = th.mul(&num.div(&den).unwrap());
        assert!(c.schwarzian().unwrap().eq_trunc(&want));
    }

    #[test]
    fn oriented_samples() {
        let mut s = Sampler::new(23);
        for _ in 0..3 {
            let rho = s.oriented_n2(4);
            let v = rho.superconformal(Level::N2Oriented).unwrap();
            assert!(v.holds, "{:?}", v.residuals);
        }
        let ch = Chart::complex2();
        let a = Scalar::param("a");
        let rho = CoordinateChange::new(
            SuperSeries::z(ch, 4).scale(&a),
            vec![SuperSeries::theta(ch, 4, 1), SuperSeries::theta(ch, 4, 2).scale(&a)],
            Variant::NK,
        )
        .unwrap();
        assert!(schwarzian_n2(&rho).unwrap().is_zero());
    }
}
