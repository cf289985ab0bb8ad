//! Finite modules over the group of formal coordinate changes, the
//! transition matrices they induce, and the small gl(1|1) modules.
//!
//! Matrices use the column convention of `SuperMatrix`: entry (i, j) is the
//! coefficient of e_i in the image of e_j, written to the left of e_i.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::derlie::{exp_coordinates, ExpCoords, Family};
use crate::disk::{schwarzian_n1, schwarzian_n2, CoordinateChange};
use crate::error::{Error, Result};
use crate::random::Sampler;
use crate::scalar::{qi_frac, Parity, Qi, Scalar};
use crate::series::{Derivation, Side, SuperSeries, Variant};
use crate::supermatrix::SuperMatrix;

use Parity::{Even, Odd};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisVector {
    pub name: String,
    pub parity: Parity,
    /// Eigenvalue of L₀ (K families) or T₀ (W11).
    pub weight: Rational64,
    /// Eigenvalue of J₀; zero where the family has no J.
    pub charge: Rational64,
}

/// `label_index · basis[from] = coef · basis[to]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub label: String,
    pub index: Rational64,
    pub from: usize,
    pub to: usize,
    pub coef: Scalar,
}

#[derive(Clone, Debug)]
pub struct FiniteAutModule {
    pub name: String,
    pub family: Family,
    pub basis: Vec<BasisVector>,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug)]
pub struct ModuleParams {
    pub m: Scalar,
    pub c: Scalar,
}

impl Default for ModuleParams {
    fn default() -> ModuleParams {
        ModuleParams { m: Scalar::param("m"), c: Scalar::param("c") }
    }
}

pub fn module_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("B1_half", "B(1), weights <= 1/2: |0>, phi (k11)"),
        ("K1_3half", "K(1), weights <= 3/2: |0>, tau (k11)"),
        ("B2_half", "B(2), weights <= 1/2: |0>, phi+, phi- (k12complex)"),
        ("K2_1", "K(2), weights <= 1: |0>, J (k12complex)"),
        ("K2_3half", "K(2), weights <= 3/2: |0>, J, G-, G+ (k12complex)"),
        ("B2W_0", "B(2) read as N_W = 1, weight 0: |0>, phi- (w11)"),
        ("K2W_1", "K(2) read as N_W = 1, weights <= 1: |0>, J, H (w11)"),
    ]
}

fn r(p: i64, q: i64) -> Rational64 {
    Rational64::new(p, q)
}

fn bv(name: &str, parity: Parity, weight: Rational64, charge: i64) -> BasisVector {
    BasisVector { name: name.into(), parity, weight, charge: Rational64::from(charge) }
}

fn act(label: &str, index: Rational64, from: usize, to: usize, coef: Scalar) -> Action {
    Action { label: label.into(), index, from, to, coef }
}

fn vac() -> BasisVector {
    bv("|0>", Even, Rational64::zero(), 0)
}

pub fn module_catalog(name: &str, params: &ModuleParams) -> Result<FiniteAutModule> {
    let (m, c) = (&params.m, &params.c);
    let c3 = c.mul(&Scalar::frac(1, 3));
    let one = Rational64::one;
    let (family, basis, actions) = match name.to_ascii_lowercase().as_str() {
        "b1_half" => (
            Family::K11,
            vec![vac(), bv("phi", Odd, r(1, 2), 0)],
            vec![act("G", r(1, 2), 1, 0, m.neg())],
        ),
        "k1_3half" => (
            Family::K11,
            vec![vac(), bv("tau", Odd, r(3, 2), 0)],
            vec![act("G", r(3, 2), 1, 0, c.mul(&Scalar::frac(2, 3)))],
        ),
        "b2_half" => (
            Family::K12Complex,
            vec![vac(), bv("phi+", Odd, r(1, 2), 1), bv("phi-", Odd, r(1, 2), -1)],
            vec![act("G+", r(1, 2), 2, 0, m.neg()), act("G-", r(1, 2), 1, 0, m.clone())],
        ),
        "k2_1" => (Family::K12Complex, vec![vac(), bv("J", Even, one(), 0)], vec![act("J", one(), 1, 0, c3)]),
        "k2_3half" => (
            Family::K12Complex,
            vec![vac(), bv("J", Even, one(), 0), bv("G-", Odd, r(3, 2), -1), bv("G+", Odd, r(3, 2), 1)],
            vec![
                act("J", one(), 1, 0, c3.clone()),
                act("G+", r(1, 2), 2, 1, Scalar::one()),
                act("G+", r(3, 2), 2, 0, c3.clone()),
                act("G-", r(1, 2), 3, 1, Scalar::int(-1)),
                act("G-", r(3, 2), 3, 0, c3),
            ],
        ),
        "b2w_0" => (
            Family::W11,
            vec![vac(), bv("phi-", Odd, Rational64::zero(), -1)],
            vec![act("Q", Rational64::zero(), 1, 0, m.neg())],
        ),
        "k2w_1" => (
            Family::W11,
            vec![vac(), bv("J", Even, one(), 0), bv("H", Odd, one(), -1)],
            vec![
                act("T", one(), 1, 0, c3.neg()),
                act("J", one(), 1, 0, c3.clone()),
                act("H", Rational64::zero(), 1, 2, Scalar::one()),
                act("Q", Rational64::zero(), 2, 1, Scalar::one()),
                act("Q", one(), 2, 0, c3),
            ],
        ),
        _ => return Err(Error::UnknownModule(name.to_string())),
    };
    let canon = module_names().into_iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).unwrap().0;
    let module = FiniteAutModule { name: canon.to_string(), family, basis, actions };
    module.validate()?;
    Ok(module)
}

/// Charge carried by a generator label.
fn label_charge(label: &str) -> i64 {
    match label {
        "G+" | "Q" => 1,
        "G-" | "H" => -1,
        _ => 0,
    }
}

impl FiniteAutModule {
    pub fn parities(&self) -> Vec<Parity> {
        self.basis.iter().map(|b| b.parity).collect()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Labels, parities, weights and charges of every action must be
    /// consistent, and each operator must be nilpotent on the module.
    pub fn validate(&self) -> Result<()> {
        let labels = self.family.labels();
        for a in &self.actions {
            if !labels.contains(&a.label.as_str()) {
                return Err(Error::FamilyMismatch(format!("{} is not a {} generator", a.label, self.family)));
            }
            let (f, t) = match (self.basis.get(a.from), self.basis.get(a.to)) {
                (Some(f), Some(t)) => (f, t),
                _ => return Err(Error::OutOfRange(format!("action {}_{} on {}", a.label, a.index, self.name))),
            };
            let p = Family::parity_of(&a.label);
            if f.parity.add(t.parity) != p {
                return Err(Error::Parity(format!("{}_{} maps {} to {}", a.label, a.index, f.name, t.name)));
            }
            if t.weight != f.weight - a.index {
                return Err(Error::Invalid(format!("{}_{} does not lower the weight of {} by {}", a.label, a.index, f.name, a.index)));
            }
            if t.charge != f.charge + Rational64::from(label_charge(&a.label)) {
                return Err(Error::Invalid(format!("{}_{} has the wrong charge on {}", a.label, a.index, f.name)));
            }
            if a.index < Rational64::zero() {
                return Err(Error::Invalid("only raising operators are tabulated".into()));
            }
        }
        for (label, index) in self.operators() {
            let op = self.operator(&label, index);
            let mut pw = op.clone();
            for _ in 0..self.dim() {
                pw = pw.mul(&op);
            }
            if pw.e.iter().flatten().any(|x| !x.is_zero()) {
                return Err(Error::NonNilpotentAtOrder);
            }
        }
        Ok(())
    }

    /// Distinct (label, index) pairs that act.
    pub fn operators(&self) -> Vec<(String, Rational64)> {
        let mut v: Vec<(String, Rational64)> = self.actions.iter().map(|a| (a.label.clone(), a.index)).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Matrix of `label_index` with unlisted actions zero.
    pub fn operator(&self, label: &str, index: Rational64) -> SuperMatrix<Scalar> {
        let n = self.dim();
        let mut e = vec![vec![Scalar::zero(); n]; n];
        for a in self.actions.iter().filter(|a| a.label == label && a.index == index) {
            e[a.to][a.from] = e[a.to][a.from].add(&a.coef);
        }
        SuperMatrix::new(self.parities(), self.parities(), e)
    }

    /// Diagonal matrix of the grading operator L₀/T₀ ("weight") or J₀ ("charge").
    pub fn grading(&self, which: &str) -> SuperMatrix<Scalar> {
        let n = self.dim();
        let mut e = vec![vec![Scalar::zero(); n]; n];
        for (i, b) in self.basis.iter().enumerate() {
            let v = if which == "charge" { b.charge } else { b.weight };
            e[i][i] = Scalar::frac(*v.numer(), *v.denom());
        }
        SuperMatrix::new(self.parities(), self.parities(), e)
    }
}

impl FiniteAutModule {
    /// Operator of any mode with nonnegative index; the grading modes come
    /// from the declared weights and charges.
    pub fn mode_operator(&self, label: &str, index: Rational64) -> SuperMatrix<Scalar> {
        if index.is_zero() && matches!(label, "L" | "T") {
            return self.grading("weight");
        }
        if index.is_zero() && label == "J" {
            return self.grading("charge");
        }
        self.operator(label, index)
    }

    /// Nonnegative modes that can act nontrivially, by family.
    fn modes(&self) -> Vec<(&'static str, Rational64)> {
        let top = self.basis.iter().map(|b| b.weight).max().unwrap_or_else(Rational64::zero);
        let mut out = Vec::new();
        for &l in self.family.labels() {
            let half = self.family != Family::W11 && l.starts_with('G');
            let mut k = if half { r(1, 2) } else { Rational64::zero() };
            while k <= top {
                out.push((l, k));
                k += Rational64::one();
            }
        }
        out
    }

    /// Relations among the nonnegative modes that the action violates. Pairs
    /// without a tabulated relation are skipped.
    pub fn representation_defects(&self) -> Vec<String> {
        let modes = self.modes();
        let mut out = Vec::new();
        for (i, &(a, m)) in modes.iter().enumerate() {
            for &(b, n) in &modes[i..] {
                let Some(rhs) = crate::derlie::expected_bracket(self.family, a, m, b, n) else { continue };
                let both_odd = Family::parity_of(a).is_odd() && Family::parity_of(b).is_odd();
                let lhs = supercommutator(&self.mode_operator(a, m), &self.mode_operator(b, n), both_odd);
                let mut want = zero_of(&lhs);
                for (c, l, k) in rhs {
                    if k < Rational64::zero() {
                        continue;
                    }
                    let op = self.mode_operator(l, k).map_entries(|x| x.scale(&c));
                    want = add_mats(&want, &op);
                }
                if !lhs.same(&want) {
                    out.push(format!("[{}_{}, {}_{}]", a, m, b, n));
                }
            }
        }
        out
    }
}

fn add_mats(a: &SuperMatrix<Scalar>, b: &SuperMatrix<Scalar>) -> SuperMatrix<Scalar> {
    let e = a.e.iter().zip(&b.e).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.add(q)).collect()).collect();
    SuperMatrix::new(a.rows.clone(), a.cols.clone(), e)
}

impl fmt::Display for FiniteAutModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "module {} ({})", self.name, self.family)?;
        for b in &self.basis {
            let p = if b.parity.is_odd() { "odd" } else { "even" };
            writeln!(f, "  {} {} weight {} charge {}", b.name, p, b.weight, b.charge)?;
        }
        for a in &self.actions {
            writeln!(f, "  {}_{} {} = {} {}", a.label, a.index, self.basis[a.from].name, a.coef, self.basis[a.to].name)?;
        }
        Ok(())
    }
}

/// Exponential coordinate multiplying `label_index` in the exponent.
fn coord_name(family: Family, label: &str, index: Rational64) -> Option<&'static str> {
    let h = r(1, 2);
    let one = Rational64::one();
    let three = r(3, 2);
    Some(match (family, label) {
        (Family::K11, "L") if index == one => "v1",
        (Family::K11, "G") if index == h => "w1",
        (Family::K11, "G") if index == three => "w2",
        (Family::K12Complex, "L") if index == one => "v1",
        (Family::K12Complex, "J") if index == one => "u1",
        (Family::K12Complex, "G+") if index == h => "w1+",
        (Family::K12Complex, "G-") if index == h => "w1-",
        (Family::K12Complex, "G+") if index == three => "w2+",
        (Family::K12Complex, "G-") if index == three => "w2-",
        (Family::W11, "T") if index == one => "v1",
        (Family::W11, "J") if index == one => "u1",
        (Family::W11, "Q") if index == one => "q1",
        (Family::W11, "H") if index == one => "h1",
        (Family::W11, "Q") if index.is_zero() => "q0",
        (Family::W11, "H") if index.is_zero() => "h0",
        _ => return None,
    })
}

fn grade_involution(s: &SuperSeries) -> SuperSeries {
    s.part(Even).sub(&s.part(Odd))
}

/// (x·O)(v) for v = Σ v_i e_i with left coefficients.
fn apply_term(x: &SuperSeries, op: &SuperMatrix<Scalar>, odd: bool, v: &[SuperSeries]) -> Vec<SuperSeries> {
    let zero = x.zero_like_series();
    let mut out = vec![zero; v.len()];
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        // O(v_i e_i) = (−1)^{|O||v_i|} v_i O(e_i)
        let vi = if odd { grade_involution(vi) } else { vi.clone() };
        let xv = x.mul(&vi);
        for (k, o) in out.iter_mut().enumerate() {
            let c = &op.e[k][i];
            if !c.is_zero() {
                *o = o.add(&xv.scale(c));
            }
        }
    }
    out
}

trait ZeroLike {
    fn zero_like_series(&self) -> SuperSeries;
}

impl ZeroLike for SuperSeries {
    fn zero_like_series(&self) -> SuperSeries {
        SuperSeries::zero(self.chart(), self.trunc())
    }
}

type Exponent = Vec<(SuperSeries, SuperMatrix<Scalar>, bool)>;

/// exp(Σ x·O) applied to v.
fn exp_apply(x: &Exponent, v: Vec<SuperSeries>) -> Result<Vec<SuperSeries>> {
    let dim = v.len();
    let mut sum = v.clone();
    let mut term = v;
    for k in 1..=dim + 1 {
        let mut next = vec![sum[0].zero_like_series(); dim];
        for (c, op, odd) in x {
            let t = apply_term(c, op, *odd, &term);
            for (a, b) in next.iter_mut().zip(t) {
                *a = a.add(&b);
            }
        }
        term = next.iter().map(|s| s.scale_q(&qi_frac(1, k as i64))).collect();
        if term.iter().all(|s| s.is_zero()) {
            return Ok(sum);
        }
        for (a, b) in sum.iter_mut().zip(&term) {
            *a = a.add(b);
        }
    }
    Err(Error::NonNilpotentAtOrder)
}

fn pow_int(s: &SuperSeries, e: Rational64) -> Result<SuperSeries> {
    if !e.is_integer() {
        return Err(Error::Invalid(format!("fractional power {} in a grading factor", e)));
    }
    let k = e.to_integer();
    let base = if k < 0 { s.invert()? } else { s.clone() };
    Ok(base.pow(k.unsigned_abs() as u32))
}

fn get<'a>(coords: &'a ExpCoords, name: &str) -> &'a SuperSeries {
    coords.get(name).expect("exponential coordinate")
}

/// Eigenvalue of the grading factor on a basis vector:
/// K11 A^{2L₀}; K12 A^{2L₀}B^{J₀} = (BA)^{L₀+J₀/2}(B⁻¹A)^{L₀−J₀/2}; W11 A^{T₀}B^{J₀}.
fn grading_factor(coords: &ExpCoords, b: &BasisVector) -> Result<SuperSeries> {
    let h = r(1, 2);
    match coords.family {
        Family::K11 => pow_int(get(coords, "A"), b.weight * 2),
        Family::K12Complex => {
            let p = pow_int(get(coords, "BA"), b.weight + b.charge * h)?;
            Ok(p.mul(&pow_int(get(coords, "B^-1A"), b.weight - b.charge * h)?))
        }
        Family::W11 => Ok(pow_int(get(coords, "A"), b.weight)?.mul(&pow_int(get(coords, "B"), b.charge)?)),
        Family::K12 => Err(Error::FamilyMismatch("use the complex K12 family".into())),
    }
}

fn check_chart(module: &FiniteAutModule, rho: &CoordinateChange) -> Result<()> {
    let want = module.family.chart();
    if rho.chart() != want {
        return Err(Error::FamilyMismatch(format!(
            "module {} needs a change on the {} chart, got N = {}",
            module.name,
            module.family,
            rho.n()
        )));
    }
    Ok(())
}

/// R(ρ_Z)⁻¹ on the module: the grading factor, then (for W11) exp(h₀H₀)exp(q₀Q₀),
/// then exp(Σ x_i gen_i) over the positive modes, applied right to left.
pub fn transition_matrix(module: &FiniteAutModule, rho: &CoordinateChange) -> Result<SuperMatrix<SuperSeries>> {
    check_chart(module, rho)?;
    let coords = exp_coordinates(rho, module.family, 2)?;
    transition_from_coords(module, &coords)
}

pub fn transition_from_coords(module: &FiniteAutModule, coords: &ExpCoords) -> Result<SuperMatrix<SuperSeries>> {
    if coords.family != module.family {
        return Err(Error::FamilyMismatch(format!("{} coordinates for a {} module", coords.family, module.family)));
    }
    let proto = &coords.values[0].1;
    let mut positive: Exponent = Vec::new();
    let mut zero_modes: Vec<(String, Exponent)> = Vec::new();
    for (label, index) in module.operators() {
        let name = coord_name(module.family, &label, index).ok_or_else(|| {
            Error::OutOfRange(format!("{}_{} needs exponential coordinates beyond order 2", label, index))
        })?;
        let term = (get(coords, name).clone(), module.operator(&label, index), Family::parity_of(&label).is_odd());
        if index.is_zero() {
            zero_modes.push((label.clone(), vec![term]));
        } else {
            positive.push(term);
        }
    }
    // exp(h₀H₀) is applied after exp(q₀Q₀)
    zero_modes.sort_by_key(|(l, _)| l != "Q");
    let n = module.dim();
    let zero = proto.zero_like_series();
    let one = SuperSeries::one(proto.chart(), proto.trunc());
    let factors: Vec<SuperSeries> = module.basis.iter().map(|b| grading_factor(coords, b)).collect::<Result<_>>()?;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = vec![zero.clone(); n];
        v[j] = one.clone();
        v = exp_apply(&positive, v)?;
        for (_, z) in &zero_modes {
            v = exp_apply(z, v)?;
        }
        cols.push(v.into_iter().zip(&factors).map(|(x, g)| g.mul(&x)).collect::<Vec<_>>());
    }
    let e = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
    Ok(SuperMatrix::new(module.parities(), module.parities(), e))
}

/// Left coefficients to right coefficients: c·e_i = (−1)^{|c||e_i|} e_i·c.
pub fn to_right_coefficients(m: &SuperMatrix<SuperSeries>) -> SuperMatrix<SuperSeries> {
    let mut out = m.clone();
    for (i, p) in m.rows.iter().enumerate() {
        if p.is_odd() {
            for x in out.e[i].iter_mut() {
                *x = grade_involution(x);
            }
        }
    }
    out
}

/// The closed forms in terms of ρ and its derivatives, entry by entry.
pub fn closed_form_matrix(module: &FiniteAutModule, rho: &CoordinateChange, params: &ModuleParams) -> Result<SuperMatrix<SuperSeries>> {
    check_chart(module, rho)?;
    let (m, c) = (&params.m, &params.c);
    let dz = |s: &SuperSeries| s.d_even(Side::Z);
    let half = qi_frac(1, 2);
    let e: Vec<Vec<SuperSeries>> = match module.name.as_str() {
        "B1_half" | "K1_3half" => {
            let d = |s: &SuperSeries| s.derive(Derivation::D(1));
            let d1 = d(&rho.psi[0])?;
            let z = d1.zero_like_series();
            let one = SuperSeries::one(d1.chart(), d1.trunc());
            if module.name == "B1_half" {
                let d2 = d(&d1)?;
                vec![vec![one, d2.div(&d1)?.scale(&m.neg())], vec![z, d1]]
            } else {
                let s = schwarzian_n1(&d1)?;
                vec![vec![one, s.scale(&c.mul(&Scalar::frac(1, 3)))], vec![z, d1.pow(3)]]
            }
        }
        "B2_half" | "K2_1" | "K2_3half" => {
            let (pp, pm) = (&rho.psi[0], &rho.psi[1]);
            let dmp = pp.derive(Derivation::Dminus)?;
            let dpm = pm.derive(Derivation::Dplus)?;
            let (ppz, pmz) = (dz(pp), dz(pm));
            let z = dmp.zero_like_series();
            let one = SuperSeries::one(dmp.chart(), dmp.trunc());
            let c3 = c.mul(&Scalar::frac(1, 3));
            match module.name.as_str() {
                "B2_half" => vec![
                    vec![one, pmz.div(&dpm)?.scale(m), ppz.div(&dmp)?.scale(&m.neg())],
                    vec![z.clone(), dmp.clone(), z.clone()],
                    vec![z.clone(), z, dpm],
                ],
                "K2_1" => vec![vec![one, schwarzian_n2(rho)?.scale(&c3.neg())], vec![z, dpm.mul(&dmp)]],
                _ => {
                    let a = ppz.derive(Derivation::Dminus)?.div(&dmp)?;
                    let b = pmz.derive(Derivation::Dplus)?.div(&dpm)?;
                    // c/(6 D∓Ψ±)·(Ψ±_zz − ½Ψ±_z(other + 3·same))
                    let w2 = |psi_z: &SuperSeries, den: &SuperSeries, same: &SuperSeries, other: &SuperSeries| -> Result<SuperSeries> {
                        let corr = psi_z.mul(&other.add(&same.scale_int(3))).scale_q(&half);
                        Ok(dz(psi_z).sub(&corr).div(den)?.scale(&c.mul(&Scalar::frac(1, 6))))
                    };
                    vec![
                        vec![
                            one,
                            schwarzian_n2(rho)?.scale(&c3.neg()),
                            w2(&ppz, &dmp, &a, &b)?,
                            // the fourth column is the ± mirror of the third
                            w2(&pmz, &dpm, &b, &a)?,
                        ],
                        vec![z.clone(), dpm.mul(&dmp), dpm.mul(&ppz), dmp.mul(&pmz).neg()],
                        vec![z.clone(), z.clone(), dmp.mul(&dpm).mul(&dpm), z.clone()],
                        vec![z.clone(), z.clone(), z, dpm.mul(&dmp).mul(&dmp)],
                    ]
                }
            }
        }
        "B2W_0" | "K2W_1" => {
            let (f, p) = (&rho.f, &rho.psi[0]);
            let dt = |s: &SuperSeries| s.d_odd(Side::Z, 1);
            let (fz, ft, pz, pt) = (dz(f), dt(f), dz(p), dt(p));
            let det = fz.mul(&pt).sub(&pz.mul(&ft));
            let pti = pt.invert()?;
            let z = det.zero_like_series();
            let one = SuperSeries::one(det.chart(), det.trunc());
            if module.name == "B2W_0" {
                vec![vec![one, pz.mul(&pti).scale(&m.neg())], vec![z, det.mul(&pti).mul(&pti)]]
            } else {
                let (fzz, pzz, fzt, pzt) = (dz(&fz), dz(&pz), dt(&fz), dt(&pz));
                let det2 = ft.mul(&pz).sub(&pt.mul(&fz));
                let (di, d2i) = (det.invert()?, det2.invert()?);
                let c3 = c.mul(&Scalar::frac(1, 3));
                let first = fzt
                    .mul(&pz)
                    .sub(&pzt.mul(&fz))
                    .mul(&d2i)
                    .add(&pzz.mul(&ft).sub(&fzz.mul(&pt)).mul(&di).scale_q(&qi_frac(3, 2)));
                let q = fzz.mul(&pz).sub(&pzz.mul(&fz)).mul(&d2i).scale(&c.mul(&Scalar::frac(1, 6)));
                vec![
                    vec![one, first.scale(&c3), q],
                    vec![z.clone(), det.mul(&pti), fz.mul(&pz).mul(&pti)],
                    vec![z, ft.mul(&pti), fz.mul(&fz).mul(&pt).sub(&pz.mul(&ft).mul(&fz)).mul(&pti).mul(&pti)],
                ]
            }
        }
        other => return Err(Error::UnknownModule(other.to_string())),
    };
    Ok(SuperMatrix::new(module.parities(), module.parities(), e))
}

/// Positions where two matrices disagree at their shared precision.
pub fn mismatched_entries(a: &SuperMatrix<SuperSeries>, b: &SuperMatrix<SuperSeries>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..a.rows.len() {
        for j in 0..a.cols.len() {
            if !a.e[i][j].eq_trunc(&b.e[i][j]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Sample an admissible change for a family.
pub fn sample_change(family: Family, s: &mut Sampler, trunc: i32) -> CoordinateChange {
    match family {
        Family::K11 => s.superconformal_n1(trunc),
        Family::K12Complex | Family::K12 => s.oriented_n2(trunc),
        Family::W11 => s.change(1, trunc, Variant::NW),
    }
}

// ---------------------------------------------------------------------------
// cocycle

#[derive(Clone, Debug)]
pub struct CocycleReport {
    pub holds: bool,
    /// Entries where M(ρ⋆τ) differs from (M(τ)∘ρ)·M(ρ).
    pub mismatches: Vec<(usize, usize)>,
}

/// M∘ρ: every entry pulled back along ρ.
pub fn pulled(m: &SuperMatrix<SuperSeries>, rho: &CoordinateChange) -> SuperMatrix<SuperSeries> {
    m.map_entries(|s| rho.pull(s))
}

/// With ρ⋆τ = τ after ρ, the localizations satisfy (ρ⋆τ)_Z = τ_{ρ(Z)}∘ρ_Z,
/// so in right coefficients M(ρ⋆τ) = (M(τ)∘ρ)·M(ρ).
pub fn cocycle_check(module: &FiniteAutModule, rho: &CoordinateChange, tau: &CoordinateChange) -> Result<CocycleReport> {
    let lhs = to_right_coefficients(&transition_matrix(module, &rho.compose(tau)?)?);
    let a = to_right_coefficients(&transition_matrix(module, rho)?);
    let b = pulled(&to_right_coefficients(&transition_matrix(module, tau)?), rho);
    let mismatches = mismatched_entries(&lhs, &b.mul(&a));
    Ok(CocycleReport { holds: mismatches.is_empty(), mismatches })
}

// ---------------------------------------------------------------------------
// extension classes

#[derive(Clone, Debug)]
pub struct ExtensionVerdict {
    pub module: String,
    pub param: String,
    pub value: Qi,
    pub split: bool,
    /// First coupling entry that survives at the stored witness change.
    pub witness: Option<(usize, usize, SuperSeries)>,
    /// The coupling entries with the parameter left symbolic.
    pub symbolic: Vec<(usize, usize, SuperSeries)>,
}

/// The change at which coupling entries are evaluated.
pub fn witness_change(family: Family, trunc: i32) -> CoordinateChange {
    match family {
        Family::K11 => crate::disk::cubic_change(trunc),
        _ => sample_change(family, &mut Sampler::new(0x5eed), trunc),
    }
}

/// Parameter governing a catalog module's extension.
pub fn extension_param(module: &str) -> Result<&'static str> {
    match module.to_ascii_lowercase().as_str() {
        "b1_half" | "b2_half" | "b2w_0" => Ok("m"),
        "k1_3half" | "k2_1" | "k2_3half" | "k2w_1" => Ok("c"),
        _ => Err(Error::UnknownModule(module.to_string())),
    }
}

/// The vacuum spans a submodule; the extension splits iff the first row of
/// the transition matrix vanishes off the diagonal. The entries are linear
/// in the parameter, so one witness change decides the question.
pub fn extension_class(module: &str, value: &Qi, trunc: i32) -> Result<ExtensionVerdict> {
    let param = extension_param(module)?;
    let m = module_catalog(module, &ModuleParams::default())?;
    let rho = witness_change(m.family, trunc);
    let t = transition_matrix(&m, &rho)?;
    let symbolic: Vec<(usize, usize, SuperSeries)> = (1..m.dim()).map(|j| (0, j, t.e[0][j].clone())).collect();
    let witness = symbolic
        .iter()
        .map(|(i, j, s)| (*i, *j, s.map_coeffs(|c| c.subst_param(param, value))))
        .find(|(_, _, s)| !s.is_zero());
    Ok(ExtensionVerdict {
        module: m.name.clone(),
        param: param.to_string(),
        value: value.clone(),
        split: witness.is_none(),
        witness,
        symbolic,
    })
}

// ---------------------------------------------------------------------------
// gl(1|1)

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GL11Kind {
    /// π₊(j): one even vector.
    Plus,
    /// π₋(j): one odd vector.
    Minus,
    /// π₊(t, j), highest weight.
    PlusT,
    /// π₋(t, j), lowest weight.
    MinusT,
}

impl GL11Kind {
    fn opposite(self) -> GL11Kind {
        match self {
            GL11Kind::Plus => GL11Kind::Minus,
            GL11Kind::Minus => GL11Kind::Plus,
            GL11Kind::PlusT => GL11Kind::MinusT,
            GL11Kind::MinusT => GL11Kind::PlusT,
        }
    }

    fn two_dim(self) -> bool {
        matches!(self, GL11Kind::PlusT | GL11Kind::MinusT)
    }
}

#[derive(Clone, Debug)]
pub struct GL11Rep {
    pub label: String,
    pub parities: Vec<Parity>,
    pub t: SuperMatrix<Scalar>,
    pub j: SuperMatrix<Scalar>,
    pub q: SuperMatrix<Scalar>,
    pub h: SuperMatrix<Scalar>,
}

fn smat(par: &[Parity], e: Vec<Vec<Scalar>>) -> SuperMatrix<Scalar> {
    SuperMatrix::new(par.to_vec(), par.to_vec(), e)
}

fn kind_label(kind: GL11Kind, t: &Scalar, j: &Scalar) -> String {
    match kind {
        GL11Kind::Plus => format!("pi+({})", j),
        GL11Kind::Minus => format!("pi-({})", j),
        GL11Kind::PlusT => format!("pi+({},{})", t, j),
        GL11Kind::MinusT => format!("pi-({},{})", t, j),
    }
}

/// The representation in its standard basis {v, ω}. `t` is ignored for the
/// one-dimensional kinds.
pub fn gl11_build(kind: GL11Kind, t: &Scalar, j: &Scalar) -> GL11Rep {
    let o = Scalar::zero;
    let label = kind_label(kind, t, j);
    if !kind.two_dim() {
        let par = vec![if kind == GL11Kind::Plus { Even } else { Odd }];
        return GL11Rep {
            label,
            t: smat(&par, vec![vec![o()]]),
            j: smat(&par, vec![vec![j.clone()]]),
            q: smat(&par, vec![vec![o()]]),
            h: smat(&par, vec![vec![o()]]),
            parities: par,
        };
    }
    let par = vec![Even, Odd];
    let one = Scalar::one();
    let tm = smat(&par, vec![vec![t.clone(), o()], vec![o(), t.clone()]]);
    let (jm, q, h) = if kind == GL11Kind::PlusT {
        (
            smat(&par, vec![vec![j.clone(), o()], vec![o(), j.sub(&one)]]),
            smat(&par, vec![vec![o(), t.clone()], vec![o(), o()]]),
            smat(&par, vec![vec![o(), o()], vec![one, o()]]),
        )
    } else {
        (
            smat(&par, vec![vec![j.clone(), o()], vec![o(), j.add(&one)]]),
            smat(&par, vec![vec![o(), o()], vec![one, o()]]),
            smat(&par, vec![vec![o(), t.clone()], vec![o(), o()]]),
        )
    };
    GL11Rep { label, parities: par, t: tm, j: jm, q, h }
}

impl GL11Rep {
    pub fn ops(&self) -> [(&'static str, &SuperMatrix<Scalar>); 4] {
        [("T", &self.t), ("J", &self.j), ("Q", &self.q), ("H", &self.h)]
    }

    fn map(&self, label: String, f: impl Fn(&SuperMatrix<Scalar>) -> SuperMatrix<Scalar>) -> GL11Rep {
        let t = f(&self.t);
        GL11Rep { label, parities: t.rows.clone(), t, j: f(&self.j), q: f(&self.q), h: f(&self.h) }
    }
}

impl fmt::Display for GL11Rep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.label)?;
        for (n, m) in self.ops() {
            let rows: Vec<String> =
                m.e.iter().map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))).collect();
            writeln!(f, "  {} = [{}]", n, rows.join(", "))?;
        }
        Ok(())
    }
}

fn supercommutator(a: &SuperMatrix<Scalar>, b: &SuperMatrix<Scalar>, both_odd: bool) -> SuperMatrix<Scalar> {
    let ab = a.mul(b);
    let ba = b.mul(a);
    let e = ab
        .e
        .iter()
        .zip(&ba.e)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| if both_odd { p.add(q) } else { p.sub(q) }).collect())
        .collect();
    SuperMatrix::new(a.rows.clone(), a.cols.clone(), e)
}

fn scaled(a: &SuperMatrix<Scalar>, c: i64) -> SuperMatrix<Scalar> {
    a.map_entries(|x| x.mul(&Scalar::int(c)))
}

fn zero_of(a: &SuperMatrix<Scalar>) -> SuperMatrix<Scalar> {
    a.map_entries(|_| Scalar::zero())
}

/// The defining relations [Q,H] = T, [J,Q] = Q, [J,H] = −H, [Q,Q] = [H,H] = 0,
/// T central, and T, J even while Q, H are odd.
pub fn gl11_relations(r: &GL11Rep) -> Vec<(String, bool)> {
    let z = zero_of(&r.t);
    let mut out = vec![
        ("[Q,H] = T".to_string(), supercommutator(&r.q, &r.h, true).same(&r.t)),
        ("[J,Q] = Q".to_string(), supercommutator(&r.j, &r.q, false).same(&r.q)),
        ("[J,H] = -H".to_string(), supercommutator(&r.j, &r.h, false).same(&scaled(&r.h, -1))),
        ("[Q,Q] = 0".to_string(), supercommutator(&r.q, &r.q, true).same(&z)),
        ("[H,H] = 0".to_string(), supercommutator(&r.h, &r.h, true).same(&z)),
    ];
    for (n, m) in r.ops() {
        let odd = matches!(n, "Q" | "H");
        out.push((format!("[T,{}] = 0", n), supercommutator(&r.t, m, false).same(&z)));
        let graded = (0..m.rows.len()).all(|i| {
            (0..m.cols.len()).all(|j| m.e[i][j].is_zero() || m.rows[i].add(m.cols[j]).is_odd() == odd)
        });
        out.push((format!("{} has parity {}", n, if odd { "odd" } else { "even" }), graded));
    }
    out
}

/// Contragredient module: X ↦ −X^{st'} with st'(X)_{kj} = (−1)^{(p_j+p_k)p_j}X_{jk},
/// which is the parity conjugate of `SuperMatrix::supertranspose`.
pub fn gl11_dual(r: &GL11Rep) -> GL11Rep {
    r.map(format!("({})^dual", r.label), |x| scaled(&x.supertranspose().parity_conjugate(), -1))
}

/// Parity-shifted module, basis reordered so the even vector comes first.
pub fn gl11_parity_shift(r: &GL11Rep) -> GL11Rep {
    let n = r.parities.len();
    let par: Vec<Parity> = r.parities.iter().rev().map(|p| p.flip()).collect();
    r.map(format!("Pi {}", r.label), |x| {
        let e = (0..n).map(|i| (0..n).map(|j| x.e[n - 1 - i][n - 1 - j].clone()).collect()).collect();
        SuperMatrix::new(par.clone(), par.clone(), e)
    })
}

/// S·X_target = X_source·S for every generator, with S even and invertible:
/// the columns of S are the target basis written in the source basis.
pub fn intertwines(s: &SuperMatrix<Scalar>, target: &GL11Rep, source: &GL11Rep) -> bool {
    if target.parities != source.parities || s.rows != source.parities || s.cols != target.parities {
        return false;
    }
    if !s.is_even() || s.sdet().is_err() {
        return false;
    }
    target.ops().iter().zip(source.ops().iter()).all(|((_, a), (_, b))| s.mul(a).same(&b.mul(s)))
}

/// Dual of π±(t, j) and its identification with π∓(−t, −j): returns the
/// target and the basis change {−t⁻¹v*, ω*} (identity in dimension one,
/// where the dual of π±(j) is π±(−j)).
pub fn gl11_dual_witness(kind: GL11Kind, t: &Scalar, j: &Scalar) -> Result<(GL11Rep, GL11Rep, SuperMatrix<Scalar>)> {
    let dual = gl11_dual(&gl11_build(kind, t, j));
    if !kind.two_dim() {
        let target = gl11_build(kind, t, &j.neg());
        let s = SuperMatrix::identity(&dual.parities, &Scalar::one());
        return Ok((dual, target, s));
    }
    let tinv = t.invert().map_err(|_| Error::NotInvertible(format!("t = {} in the duality witness", t)))?;
    let target = gl11_build(kind.opposite(), &t.neg(), &j.neg());
    let s = smat(&dual.parities, vec![vec![tinv.neg(), Scalar::zero()], vec![Scalar::zero(), Scalar::one()]]);
    Ok((dual, target, s))
}

/// Π π±(t, j) and its identification with π∓(t, j ∓ 1) via the basis {Πω, tΠv}.
pub fn gl11_parity_witness(kind: GL11Kind, t: &Scalar, j: &Scalar) -> (GL11Rep, GL11Rep, SuperMatrix<Scalar>) {
    let shifted = gl11_parity_shift(&gl11_build(kind, t, j));
    let target = match kind {
        GL11Kind::PlusT => gl11_build(GL11Kind::MinusT, t, &j.sub(&Scalar::one())),
        GL11Kind::MinusT => gl11_build(GL11Kind::PlusT, t, &j.add(&Scalar::one())),
        k => gl11_build(k.opposite(), t, j),
    };
    let s = if kind.two_dim() {
        smat(&shifted.parities, vec![vec![Scalar::one(), Scalar::zero()], vec![Scalar::zero(), t.clone()]])
    } else {
        SuperMatrix::identity(&shifted.parities, &Scalar::one())
    };
    (shifted, target, s)
}

/// The zero modes T₀, J₀, Q₀, H₀ of a W11 catalog module restricted to
/// the named basis vectors.
pub fn gl11_from_module(module: &FiniteAutModule, names: &[&str]) -> Result<GL11Rep> {
    if module.family != Family::W11 {
        return Err(Error::FamilyMismatch(format!("{} is not a W11 module", module.name)));
    }
    let idx: Vec<usize> = names
        .iter()
        .map(|n| module.basis.iter().position(|b| b.name == *n).ok_or_else(|| Error::OutOfRange(n.to_string())))
        .collect::<Result<_>>()?;
    let par: Vec<Parity> = idx.iter().map(|&i| module.basis[i].parity).collect();
    let restrict = |m: &SuperMatrix<Scalar>| {
        let e = idx.iter().map(|&i| idx.iter().map(|&j| m.e[i][j].clone()).collect()).collect();
        SuperMatrix::new(par.clone(), par.clone(), e)
    };
    let zero = Rational64::zero();
    Ok(GL11Rep {
        label: format!("{} on {{{}}}", module.name, names.join(", ")),
        parities: par.clone(),
        t: restrict(&module.grading("weight")),
        j: restrict(&module.grading("charge")),
        q: restrict(&module.operator("Q", zero)),
        h: restrict(&module.operator("H", zero)),
    })
}

/// Parse `pi+(j)`, `pi-(j)`, `pi+(t,j)`, `pi-(t,j)` with integer, fraction or
/// symbolic arguments.
pub fn parse_gl11(s: &str) -> Result<(GL11Kind, Scalar, Scalar)> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Invalid(format!("expected pi+(t,j), pi-(t,j), pi+(j) or pi-(j), got {}", s));
    let rest = s.strip_prefix("pi").ok_or_else(bad)?;
    let (sign, rest) = rest.split_at(1);
    let inner = rest.strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or_else(bad)?;
    let args: Vec<Scalar> = inner.split(',').map(parse_gl11_arg).collect::<Result<_>>()?;
    let kind = match (sign, args.len()) {
        ("+", 1) => GL11Kind::Plus,
        ("-", 1) => GL11Kind::Minus,
        ("+", 2) => GL11Kind::PlusT,
        ("-", 2) => GL11Kind::MinusT,
        _ => return Err(bad()),
    };
    let (t, j) = if args.len() == 1 { (Scalar::zero(), args[0].clone()) } else { (args[0].clone(), args[1].clone()) };
    Ok((kind, t, j))
}

fn parse_gl11_arg(a: &str) -> Result<Scalar> {
    let (neg, body) = match a.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, a),
    };
    let v = if let Some((p, q)) = body.split_once('/') {
        let p: i64 = p.parse().map_err(|_| Error::Invalid(a.into()))?;
        let q: i64 = q.parse().map_err(|_| Error::Invalid(a.into()))?;
        if q == 0 {
            return Err(Error::Invalid(format!("zero denominator in {}", a)));
        }
        Scalar::frac(p, q)
    } else if let Ok(n) = body.parse::<i64>() {
        Scalar::int(n)
    } else if !body.is_empty() && body.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && body.chars().next().unwrap().is_ascii_alphabetic() {
        Scalar::param(body)
    } else {
        return Err(Error::Invalid(format!("bad argument {}", a)));
    };
    Ok(if neg { v.neg() } else { v })
}

#[cfg(test)]
mod tests;
