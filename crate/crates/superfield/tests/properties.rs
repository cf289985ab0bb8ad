use proptest::prelude::*;

use superfield::disk::{cocycle_sides, Level};
use superfield::random::Sampler;
use superfield::supermatrix::SuperMatrix;
use superfield::{Chart, Derivation, Parity, Scalar, SuperSeries, Variant};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

fn parity(odd: bool) -> Parity {
    if odd {
        Parity::Odd
    } else {
        Parity::Even
    }
}

fn sign(a: Parity, b: Parity) -> Scalar {
    if a.is_odd() && b.is_odd() {
        Scalar::int(-1)
    } else {
        Scalar::one()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn scalar_ring_axioms(seed: u64, pa: bool, pb: bool, pc: bool) {
        let mut s = Sampler::new(seed);
        let (pa, pb) = (parity(pa), parity(pb));
        let a = s.scalar_of(pa);
        let b = s.scalar_of(pb);
        let c = s.scalar_of(parity(pc));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a).mul(&sign(pa, pb)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        if pa.is_odd() {
            prop_assert!(a.mul(&a).is_zero());
        }
    }

    #[test]
    fn scalar_inverse_two_sided(seed: u64) {
        let mut s = Sampler::new(seed);
        let u = s.unit_scalar().add(&s.odd_scalar());
        let v = u.invert().unwrap();
        prop_assert!(u.mul(&v).is_one());
        prop_assert!(v.mul(&u).is_one());
    }

    #[test]
    fn series_product_laws(seed: u64, n in 0usize..=2) {
        let mut s = Sampler::new(seed);
        let ch = Chart::new(n);
        let a = s.series(ch, 4, Parity::Odd, 0, 0.5);
        let b = s.series(ch, 4, Parity::Odd, 0, 0.5);
        let c = s.series(ch, 4, Parity::Even, 0, 0.5);
        prop_assert!(a.mul(&b).mul(&c).eq_trunc(&a.mul(&b.mul(&c))));
        prop_assert!(a.mul(&b).eq_trunc(&b.mul(&a).neg()));
        prop_assert!(a.mul(&c).eq_trunc(&c.mul(&a)));
    }

    #[test]
    fn d_squares_to_dz(seed: u64) {
        let mut s = Sampler::new(seed);
        let ch = Chart::new(2);
        let f = s.series(ch, 5, Parity::Even, 0, 0.5);
        for i in 1..=2 {
            let dd = f.derive(Derivation::D(i)).unwrap().derive(Derivation::D(i)).unwrap();
            prop_assert!(dd.eq_trunc(&f.derive(Derivation::Dz).unwrap()));
            let tt = f.derive(Derivation::Dtheta(i)).unwrap().derive(Derivation::Dtheta(i)).unwrap();
            prop_assert!(tt.is_zero());
        }
    }

    #[test]
    fn series_inverse(seed: u64) {
        let mut s = Sampler::new(seed);
        let ch = Chart::new(1);
        let f = SuperSeries::constant(ch, 5, s.unit_scalar()).add(&s.series(ch, 5, Parity::Even, 1, 0.5));
        let g = f.invert().unwrap();
        prop_assert!(f.mul(&g).eq_trunc(&SuperSeries::one(ch, 5)));
    }

    #[test]
    fn compose_is_associative(seed: u64, n in 1usize..=2, nk: bool) {
        let mut s = Sampler::new(seed);
        let v = if nk { Variant::NK } else { Variant::NW };
        let (a, b, c) = (s.change(n, 4, v), s.change(n, 4, v), s.change(n, 4, v));
        let l = a.compose(&b).unwrap().compose(&c).unwrap();
        let r = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(l.eq_trunc(&r));
    }

    #[test]
    fn localization_cocycle(seed: u64, nk: bool) {
        let mut s = Sampler::new(seed);
        let v = if nk { Variant::NK } else { Variant::NW };
        let (a, b) = (s.change(1, 4, v), s.change(1, 4, v));
        let (x, y) = cocycle_sides(&a, &b).unwrap();
        prop_assert!(x.eq_trunc(&y));
    }

    #[test]
    fn superconformal_closed_under_composition(seed: u64) {
        let mut s = Sampler::new(seed);
        let a = s.superconformal_n1(5);
        let b = s.superconformal_n1(5);
        prop_assert!(a.compose(&b).unwrap().is_superconformal(Level::N1));
    }

    #[test]
    fn sdet_is_multiplicative(seed: u64) {
        let mut s = Sampler::new(seed);
        let par = [Parity::Even, Parity::Odd];
        let mut m = || {
            let e = (0..2)
                .map(|i| (0..2).map(|j| if i == j { s.unit_scalar() } else { s.odd_scalar() }).collect())
                .collect();
            SuperMatrix::new(par.to_vec(), par.to_vec(), e)
        };
        let (a, b) = (m(), m());
        let ab = a.mul(&b).sdet().unwrap();
        prop_assert_eq!(ab, a.sdet().unwrap().mul(&b.sdet().unwrap()));
        prop_assert!(a.supertranspose().supertranspose().same(&a.parity_conjugate()));
        prop_assert_eq!(a.supertranspose().sdet().unwrap(), a.sdet().unwrap());
    }
}
