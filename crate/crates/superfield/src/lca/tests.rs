use num_rational::Rational64;

use super::*;

fn params(n: usize) -> CatalogParams {
    CatalogParams { n, ..Default::default() }
}

fn cat(name: &str, n: usize) -> LCAPresentation {
    catalog(name, &params(n)).unwrap()
}

#[test]
fn sigma_examples() {
    assert_eq!(sign_sigma(0b01, 0b10).unwrap(), 1);
    assert_eq!(sign_sigma(0b10, 0b01).unwrap(), -1);
    assert_eq!(sign_sigma(0b010, 0b101).unwrap(), -1);
    assert!(sign_sigma(0b11, 0b10).is_err());
    for j in 0..8 {
        assert_eq!(sign_sigma(0, j).unwrap(), 1);
    }
}

#[test]
fn sigma_associativity() {
    for n in 0..=3u32 {
        let full = (1u32 << n) - 1;
        for i in 0..=full {
            for j in 0..=full {
                for k in 0..=full {
                    if i & j != 0 || i & k != 0 || j & k != 0 {
                        continue;
                    }
                    let l = sign_sigma(i, j).unwrap() * sign_sigma(i | j, k).unwrap();
                    let r = sign_sigma(j, k).unwrap() * sign_sigma(i, j | k).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }
}

#[test]
fn virasoro_structure_modes() {
    let v = cat("virasoro", 0);
    let m = v.structure_modes(0, 0).unwrap();
    let c = Scalar::param("c");
    assert_eq!(m[&(0, 0)][&(1, 0, Some(0))], Scalar::one());
    assert_eq!(m[&(1, 0)][&(0, 0, Some(0))], Scalar::int(2));
    assert_eq!(m[&(3, 0)][&(0, 0, None)], c.mul(&Scalar::frac(1, 2)));
    assert_eq!(m.len(), 3);
    assert!(modes_from_lambda(&v.empty_poly()).unwrap().is_empty());
}

#[test]
fn modes_round_trip() {
    for (name, n) in [("virasoro", 0), ("ns", 0), ("k", 1), ("k", 2), ("k", 3), ("w", 2), ("w", 3), ("b1", 1)] {
        let a = cat(name, n);
        for p in a.table.values() {
            let m = modes_from_lambda(p).unwrap();
            assert_eq!(&lambda_from_modes(&m, a.n, a.variant), p, "{}", name);
        }
    }
}

#[test]
fn skew_reproduces_self_brackets() {
    // entries whose reverse is their own bracket
    for (name, n) in [("virasoro", 0), ("k", 0), ("k", 1), ("k", 2), ("k", 3), ("k", 4), ("b1", 1), ("w", 1)] {
        let a = cat(name, n);
        for g in 0..a.gens.len() {
            let p = &a.table[&(g, g)];
            let m = modes_from_lambda(p).unwrap();
            let s = skew_modes(&m, a.gens[g].parity, a.gens[g].parity, a.n, a.variant);
            assert_eq!(&lambda_from_modes(&s, a.n, a.variant), p, "{} {}", name, n);
        }
    }
}

#[test]
fn w3_reverse_pairs_match_displayed_formula() {
    let a = cat("w", 3);
    for i in 1..=3usize {
        for j in 1..i {
            let qi = a.index(&format!("Q{}", i)).unwrap();
            let qj = a.index(&format!("Q{}", j)).unwrap();
            let p = a
                .empty_poly()
                .with(Scalar::one(), OpMono::s(i), Some(qj))
                .with(Scalar::one(), OpMono::chi(i), Some(qj))
                .with(Scalar::int(-1), OpMono::chi(j), Some(qi));
            assert_eq!(a.table[&(qi, qj)], p);
        }
    }
}

fn mode_of(basis: &PhysicsBasis, f: &str, n: Rational64) -> ModeElement {
    basis.to_abstract(basis.field_index(f).unwrap(), n).unwrap()
}

#[test]
fn virasoro_and_ns_fixtures() {
    let v = cat("virasoro", 0);
    let b = relabel_modes(&v).unwrap();
    let r = mode_bracket(&mode_of(&b, "L", 2.into()), &mode_of(&b, "L", (-2).into()), &v).unwrap();
    let want = PhysElement::zero().with("L", 0.into(), Scalar::int(4)).with_central(Scalar::param("c").mul(&Scalar::frac(1, 2)));
    assert_eq!(b.from_abstract(&r), want);
    assert!(mode_bracket(&mode_of(&b, "L", 0.into()), &mode_of(&b, "L", 0.into()), &v).unwrap().is_zero());

    let ns = cat("ns", 0);
    let b = relabel_modes(&ns).unwrap();
    let h = Rational64::new(1, 2);
    let r = mode_bracket(&mode_of(&b, "G", h), &mode_of(&b, "G", -h), &ns).unwrap();
    assert_eq!(b.from_abstract(&r), PhysElement::zero().with("L", 0.into(), Scalar::int(2)));
}

#[test]
fn relabel_round_trip() {
    for (name, n) in [("virasoro", 0), ("k", 1), ("k", 2), ("w", 1), ("b1", 1), ("n2tilde", 0)] {
        let a = cat(name, n);
        let b = relabel_modes(&a).unwrap();
        for f in 0..b.fields.len() {
            for k in b.indices(f, 3) {
                let e = b.to_abstract(f, k).unwrap();
                let back = b.from_abstract(&e);
                assert_eq!(back, PhysElement::zero().with(&b.fields[f].name, k, Scalar::one()), "{} {}", name, b.fields[f].name);
            }
        }
    }
    assert!(matches!(relabel_modes(&cat("k", 3)), Err(Error::NoWeightData(_))));
}

fn table(name: &str, n: usize, t: &str, window: i64) -> TableReport {
    let a = cat(name, n);
    let b = relabel_modes(&a).unwrap();
    check_table(&a, &b, t, window).unwrap()
}

#[test]
fn displayed_tables() {
    for (name, n, t) in [
        ("virasoro", 0, "virasoro"),
        ("ns", 0, "ns"),
        ("n2", 0, "n2"),
        ("n2g", 0, "n2g"),
        ("k", 1, "ns"),
        ("w", 1, "n2"),
        ("k", 2, "n2g"),
        ("b1", 1, "bf"),
        ("bf", 0, "bf"),
        ("b2", 0, "b2"),
    ] {
        let r = table(name, n, t, 3);
        assert!(r.ok(), "{} {} vs {}: {:#?}", name, n, t, &r.mismatches);
    }
}

#[test]
fn tilde_table_central_term() {
    let r = table("n2tilde", 0, "n2tilde", 3);
    assert!(r.checked > 0);
    // only the T–J central term departs from the displayed table
    assert!(!r.mismatches.is_empty());
    assert!(r.mismatches.iter().all(|m| m.starts_with("[T_") && m.contains("J_")
        || m.starts_with("[J_") && m.contains("T_")), "{:?}", r.mismatches);
}

#[test]
fn consistency_small() {
    for (name, n) in [("virasoro", 0), ("ns", 0), ("n2", 0), ("n2tilde", 0), ("n2g", 0), ("k", 1), ("k", 2), ("w", 1), ("w", 2), ("b1", 1), ("b2", 0)] {
        let a = cat(name, n);
        let r = check_mode_consistency(&a, 2).unwrap();
        assert!(r.antisymmetry(), "{} {}: {:?}", name, n, &r.antisymmetry_failures[..r.antisymmetry_failures.len().min(4)]);
        assert!(r.jacobi(), "{} {}: {:?}", name, n, &r.jacobi_failures[..r.jacobi_failures.len().min(4)]);
    }
}

#[test]
fn ope_two_forms() {
    for (name, n) in [("virasoro", 0), ("b1", 1), ("k", 1), ("w", 1), ("k", 2)] {
        let a = cat(name, n);
        for x in 0..a.gens.len() {
            for y in 0..a.gens.len() {
                let r = ope_distribution(&a, x, y, 3).unwrap();
                assert!(r.forms_agree && r.modes_agree, "{} {} {} {}: {:?}", name, x, y, n, &r.mismatches[..r.mismatches.len().min(3)]);
            }
        }
    }
}

#[test]
fn parity_of_entries_is_checked() {
    let mut a = LCAPresentation::new("x", 1, Variant::NK);
    let g = a.gen("G", Parity::Odd, None);
    let bad = a.empty_poly().with(Scalar::one(), OpMono::t(1), Some(g)).with(Scalar::one(), OpMono::lam(1), None);
    assert!(matches!(a.set(g, g, bad), Err(Error::Parity(_))));
    assert!(matches!(catalog("k", &params(5)), Err(Error::UnsupportedN(5))));
    assert!(matches!(ModeCalc::new(&a).gen_bracket((g, 0, 0), (g, 0, 0)), Err(Error::MissingStructureConstant(..))));
}

#[test]
fn consistency_window_three() {
    for (name, n) in [("k", 3), ("k", 4), ("w", 3)] {
        let a = cat(name, n);
        let r = check_mode_consistency(&a, 3).unwrap();
        assert!(r.antisymmetry() && r.jacobi(), "{} {}", name, n);
        assert!(r.triples > 0);
    }
}
