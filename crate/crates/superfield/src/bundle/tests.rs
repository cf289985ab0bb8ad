use super::*;
use crate::derlie::Family;

fn sample(family: Family, seed: u64, trunc: i32) -> CoordinateChange {
    sample_change(family, &mut Sampler::new(seed), trunc)
}

fn all_modules() -> Vec<FiniteAutModule> {
    module_names().into_iter().map(|(n, _)| module_catalog(n, &ModuleParams::default()).unwrap()).collect()
}

fn is_identity(m: &SuperMatrix<SuperSeries>) -> bool {
    (0..m.rows.len()).all(|i| {
        (0..m.cols.len()).all(|j| {
            let x = &m.e[i][j];
            if i == j {
                x.eq_trunc(&SuperSeries::one(x.chart(), x.trunc()))
            } else {
                x.is_zero()
            }
        })
    })
}

#[test]
fn catalog_shapes() {
    let dims: Vec<usize> = all_modules().iter().map(|m| m.dim()).collect();
    assert_eq!(dims, vec![2, 2, 3, 2, 4, 2, 3]);
    assert!(matches!(module_catalog("nope", &ModuleParams::default()), Err(Error::UnknownModule(_))));
    let k = module_catalog("k2_3half", &ModuleParams::default()).unwrap();
    let names: Vec<&str> = k.basis.iter().map(|b| b.name.as_str()).collect();
    assert_eq!(names, ["|0>", "J", "G-", "G+"]);
    assert_eq!(module_catalog("K2W_1", &ModuleParams::default()).unwrap().actions.len(), 5);
}

#[test]
fn bad_tables_are_rejected() {
    let mut m = module_catalog("B1_half", &ModuleParams::default()).unwrap();
    m.actions[0].index = Rational64::from(1);
    assert!(m.validate().is_err());
    let mut m = module_catalog("B1_half", &ModuleParams::default()).unwrap();
    m.actions[0].label = "L".into();
    assert!(matches!(m.validate(), Err(Error::Parity(_))));
}

#[test]
fn identity_change_gives_identity() {
    for m in all_modules() {
        let id = CoordinateChange::identity(m.family.chart(), 6, if m.family == Family::W11 { Variant::NW } else { Variant::NK });
        assert!(is_identity(&transition_matrix(&m, &id).unwrap()), "{}", m.name);
    }
}

#[test]
fn family_mismatch() {
    let m = module_catalog("B2_half", &ModuleParams::default()).unwrap();
    let rho = sample(Family::K11, 1, 5);
    assert!(matches!(transition_matrix(&m, &rho), Err(Error::FamilyMismatch(_))));
    let m = module_catalog("B1_half", &ModuleParams::default()).unwrap();
    let rho = sample(Family::W11, 1, 5);
    assert!(matches!(transition_matrix(&m, &rho), Err(Error::NotSuperconformal(_))));
}

#[test]
fn closed_forms_reproduced() {
    let p = ModuleParams::default();
    for m in all_modules() {
        for seed in 0..2 {
            let rho = sample(m.family, 40 + seed, 8);
            let t = transition_matrix(&m, &rho).unwrap();
            let c = closed_form_matrix(&m, &rho, &p).unwrap();
            let expect: Vec<(usize, usize)> = match m.name.as_str() {
                "K2_3half" => vec![(0, 2), (0, 3)],
                "K2W_1" => vec![(2, 1)],
                _ => vec![],
            };
            assert_eq!(mismatched_entries(&t, &c), expect, "{}", m.name);
        }
    }
}

#[test]
fn k2_3half_first_row_carries_cross_terms() {
    // exp(X)G∓ picks up ½·u₁·w₁± through J₁J
    let p = ModuleParams::default();
    let m = module_catalog("K2_3half", &p).unwrap();
    let rho = sample(Family::K12Complex, 5, 8);
    let co = exp_coordinates(&rho, Family::K12Complex, 2).unwrap();
    let t = transition_matrix(&m, &rho).unwrap();
    let c = closed_form_matrix(&m, &rho, &p).unwrap();
    let c6 = p.c.mul(&Scalar::frac(1, 6));
    let u1 = co.get("u1").unwrap();
    let plus = u1.mul(co.get("w1+").unwrap()).scale(&c6);
    let minus = u1.mul(co.get("w1-").unwrap()).scale(&c6).neg();
    assert!(t.e[0][2].sub(&c.e[0][2]).eq_trunc(&plus));
    assert!(t.e[0][3].sub(&c.e[0][3]).eq_trunc(&minus));
    assert!(!plus.is_zero());
}

#[test]
fn k2w_1_lower_left_entry_has_extra_factor() {
    let p = ModuleParams::default();
    let m = module_catalog("K2W_1", &p).unwrap();
    let rho = sample(Family::W11, 6, 8);
    let t = transition_matrix(&m, &rho).unwrap();
    let c = closed_form_matrix(&m, &rho, &p).unwrap();
    let fz = rho.f.d_even(Side::Z);
    assert!(t.e[2][1].eq_trunc(&fz.mul(&c.e[2][1])));
}

#[test]
fn sdet_entry_of_b2w() {
    let m = module_catalog("B2W_0", &ModuleParams::default()).unwrap();
    for seed in 0..3 {
        let rho = sample(Family::W11, seed, 7);
        let t = transition_matrix(&m, &rho).unwrap();
        assert!(t.e[1][1].eq_trunc(&rho.jacobian().sdet().unwrap()));
    }
}

#[test]
fn supertranspose_of_b1() {
    let p = ModuleParams::default();
    let m = module_catalog("B1_half", &p).unwrap();
    let rho = sample(Family::K11, 3, 7);
    let t = transition_matrix(&m, &rho).unwrap();
    let st = t.supertranspose();
    let d1 = rho.psi[0].derive(Derivation::D(1)).unwrap();
    let d2 = d1.derive(Derivation::D(1)).unwrap();
    assert!(st.e[1][0].eq_trunc(&d2.div(&d1).unwrap().scale(&p.m)));
    assert!(st.e[0][1].is_zero());
    assert!(st.supertranspose().same(&t.parity_conjugate()));
}

#[test]
fn cocycle_on_random_pairs() {
    for m in all_modules() {
        for seed in 0..2u64 {
            let rho = sample(m.family, 100 + seed, 6);
            let tau = sample(m.family, 200 + seed, 6);
            let rep = cocycle_check(&m, &rho, &tau).unwrap();
            if m.name == "K2W_1" {
                assert!(rep.mismatches.contains(&(0, 1)), "{:?}", rep.mismatches);
            } else {
                assert!(rep.holds, "{}: {:?}", m.name, rep.mismatches);
            }
        }
        let rho = sample(m.family, 7, 6);
        let id = CoordinateChange::identity(rho.chart(), 6, rho.variant);
        assert!(cocycle_check(&m, &rho, &id).unwrap().holds);
    }
}

#[test]
fn representation_defects_locate_the_t1_entry() {
    for m in all_modules() {
        let d = m.representation_defects();
        if m.name == "K2W_1" {
            assert_eq!(d, ["[T_1, Q_0]", "[Q_0, H_1]", "[Q_1, H_0]"]);
        } else {
            assert!(d.is_empty(), "{}: {:?}", m.name, d);
        }
    }
    // T₁J = +c/3 repairs the relations and the cocycle
    let mut m = module_catalog("K2W_1", &ModuleParams::default()).unwrap();
    m.actions[0].coef = m.actions[0].coef.neg();
    assert!(m.representation_defects().is_empty());
    let rho = sample(Family::W11, 100, 6);
    let tau = sample(Family::W11, 200, 6);
    assert!(cocycle_check(&m, &rho, &tau).unwrap().holds);
}

#[test]
fn extension_decisions() {
    let q = |n: i64| crate::scalar::qi_int(n);
    for (name, split_at_zero) in [("B1_half", true), ("K1_3half", true), ("K2_1", true), ("B2_half", true), ("B2W_0", true)] {
        let v0 = extension_class(name, &q(0), 6).unwrap();
        assert_eq!(v0.split, split_at_zero, "{}", name);
        let v1 = extension_class(name, &q(1), 6).unwrap();
        assert!(!v1.split, "{}", name);
        assert!(v1.witness.is_some());
    }
    assert!(extension_class("nope", &q(0), 6).is_err());
}

#[test]
fn gl11_relations_symbolic() {
    let t = Scalar::param("t");
    let j = Scalar::param("j");
    for kind in [GL11Kind::Plus, GL11Kind::Minus, GL11Kind::PlusT, GL11Kind::MinusT] {
        let r = gl11_build(kind, &t, &j);
        for (n, ok) in gl11_relations(&r) {
            assert!(ok, "{} fails {}", r.label, n);
        }
        for (n, ok) in gl11_relations(&gl11_dual(&r)) {
            assert!(ok, "dual of {} fails {}", r.label, n);
        }
        for (n, ok) in gl11_relations(&gl11_parity_shift(&r)) {
            assert!(ok, "shift of {} fails {}", r.label, n);
        }
    }
}

#[test]
fn gl11_dual_matches_displayed_matrices() {
    let t = Scalar::param("t");
    let j = Scalar::param("j");
    let d = gl11_dual(&gl11_build(GL11Kind::PlusT, &t, &j));
    let o = Scalar::zero;
    assert_eq!(d.q.e, vec![vec![o(), o()], vec![t.neg(), o()]]);
    assert_eq!(d.h.e, vec![vec![o(), Scalar::one()], vec![o(), o()]]);
    assert_eq!(d.j.e, vec![vec![j.neg(), o()], vec![o(), j.neg().add(&Scalar::one())]]);
    let d = gl11_dual(&gl11_build(GL11Kind::MinusT, &t, &j));
    assert_eq!(d.q.e, vec![vec![o(), Scalar::one()], vec![o(), o()]]);
    assert_eq!(d.h.e, vec![vec![o(), o()], vec![t.neg(), o()]]);
}

#[test]
fn gl11_witnesses() {
    let t = Scalar::param("t");
    let j = Scalar::param("j");
    for kind in [GL11Kind::Plus, GL11Kind::Minus, GL11Kind::PlusT, GL11Kind::MinusT] {
        let (dual, target, s) = gl11_dual_witness(kind, &t, &j).unwrap();
        assert!(intertwines(&s, &target, &dual), "{:?}", kind);
        let (sh, target, s) = gl11_parity_witness(kind, &t, &j);
        assert!(intertwines(&s, &target, &sh), "{:?}", kind);
    }
    let (_, _, s) = gl11_dual_witness(GL11Kind::PlusT, &t, &j).unwrap();
    assert_eq!(s.e[0][0], t.invert().unwrap().neg());
    assert!(matches!(gl11_dual_witness(GL11Kind::PlusT, &Scalar::zero(), &j), Err(Error::NotInvertible(_))));
    // a wrong target is not intertwined
    let (dual, _, s) = gl11_dual_witness(GL11Kind::PlusT, &t, &j).unwrap();
    assert!(!intertwines(&s, &gl11_build(GL11Kind::MinusT, &t, &j.neg()), &dual));
}

#[test]
fn k2w_zero_modes_are_pi_plus_one_zero() {
    let m = module_catalog("K2W_1", &ModuleParams::default()).unwrap();
    let r = gl11_from_module(&m, &["J", "H"]).unwrap();
    let p = gl11_build(GL11Kind::PlusT, &Scalar::one(), &Scalar::zero());
    for ((n, a), (_, b)) in r.ops().iter().zip(p.ops().iter()) {
        assert!(a.same(b), "{}", n);
    }
}

#[test]
fn parse_gl11_forms() {
    let (k, t, j) = parse_gl11("pi+(t, j)").unwrap();
    assert_eq!(k, GL11Kind::PlusT);
    assert_eq!(t, Scalar::param("t"));
    assert_eq!(j, Scalar::param("j"));
    let (k, _, j) = parse_gl11("pi-(-1/2)").unwrap();
    assert_eq!(k, GL11Kind::Minus);
    assert_eq!(j, Scalar::frac(-1, 2));
    assert!(parse_gl11("rho(1)").is_err());
    assert!(parse_gl11("pi+(1,2,3)").is_err());
}

