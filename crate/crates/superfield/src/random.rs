//! Seeded samplers for scalars, series and coordinate changes used by tests
//! and by the CLI's randomized checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::{qi_frac, Parity, Qi, Scalar};
use crate::series::{Chart, Mono, SuperSeries, Terms, Variant};

/// Grassmann generators α1..α4 are used for random odd constants.
pub const GENS: u32 = 4;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn rational(&mut self) -> Qi {
        let p = self.rng.gen_range(-3i64..=3);
        let q = self.rng.gen_range(1i64..=3);
        qi_frac(p, q)
    }

    pub fn nonzero_rational(&mut self) -> Qi {
        loop {
            let r = self.rational();
            if r != qi_frac(0, 1) {
                return r;
            }
        }
    }

    fn gen_mask(&mut self, k: u32) -> u32 {
        let mut m = 0u32;
        while m.count_ones() < k {
            m |= 1 << self.rng.gen_range(0..GENS);
        }
        m
    }

    /// Even constant: rational plus, sometimes, a nilpotent α_iα_j part.
    pub fn even_scalar(&mut self) -> Scalar {
        let mut s = Scalar::from_qi(self.rational());
        if self.coin(0.3) {
            let m = self.gen_mask(2);
            s = s.add(&Scalar::term(self.nonzero_rational(), Default::default(), m));
        }
        s
    }

    /// Even constant with nonzero body.
    pub fn unit_scalar(&mut self) -> Scalar {
        let mut s = Scalar::from_qi(self.nonzero_rational());
        if self.coin(0.3) {
            let m = self.gen_mask(2);
            s = s.add(&Scalar::term(self.nonzero_rational(), Default::default(), m));
        }
        s
    }

    pub fn odd_scalar(&mut self) -> Scalar {
        let m = self.gen_mask(1);
        let mut s = Scalar::term(self.nonzero_rational(), Default::default(), m);
        if self.coin(0.2) {
            let m3 = self.gen_mask(3);
            s = s.add(&Scalar::term(self.nonzero_rational(), Default::default(), m3));
        }
        s
    }

    pub fn scalar_of(&mut self, p: Parity) -> Scalar {
        match p {
            Parity::Even => self.even_scalar(),
            Parity::Odd => self.odd_scalar(),
        }
    }

    /// Series of the given parity with z-degrees in `min_ez..=trunc`.
    pub fn series(&mut self, chart: Chart, trunc: i32, parity: Parity, min_ez: i32, density: f64) -> SuperSeries {
        let mut t = Terms::new();
        for ez in min_ez..=trunc {
            for odd in 0..(1u32 << chart.n) {
                if !self.coin(density) {
                    continue;
                }
                let cp = parity.add(Parity::of(odd));
                let c = self.scalar_of(cp);
                if !c.is_zero() {
                    t.insert(Mono { ez, ew: 0, odd }, c);
                }
            }
        }
        SuperSeries::from_terms(chart, trunc, t)
    }

    /// Random element of Aut O^{1|N} fixing the origin, with all even
    /// images of positive valuation.
    pub fn change(&mut self, n: usize, trunc: i32, variant: Variant) -> crate::disk::CoordinateChange {
        let chart = Chart::new(n);
        let z = SuperSeries::z(chart, trunc);
        let rest = self.series(chart, trunc, Parity::Even, 1, 0.5);
        // keep the linear coefficient under control: it is the unit drawn here
        let lin = rest.coeff(&Mono { ez: 1, ew: 0, odd: 0 });
        let f = z.scale(&self.unit_scalar()).add(&rest.sub(&z.scale(&lin)));
        let psi = (1..=n)
            .map(|i| {
                SuperSeries::theta(chart, trunc, i)
                    .scale(&self.unit_scalar())
                    .add(&self.series(chart, trunc, Parity::Odd, 1, 0.5))
            })
            .collect();
        crate::disk::CoordinateChange::new(f, psi, variant).expect("random change has invertible 1-jet")
    }

    /// Random N = 1 superconformal change: Ψ = ψ + θg, F = f + θψg with
    /// f' = g² − ψψ'.
    pub fn superconformal_n1(&mut self, trunc: i32) -> crate::disk::CoordinateChange {
        let chart = Chart::new(1);
        let mut gt = Terms::new();
        gt.insert(Mono::ONE, self.unit_scalar());
        let mut pt = Terms::new();
        for k in 1..=trunc {
            if self.coin(0.6) {
                gt.insert(Mono { ez: k, ew: 0, odd: 0 }, self.even_scalar());
            }
            if self.coin(0.5) {
                pt.insert(Mono { ez: k, ew: 0, odd: 0 }, self.odd_scalar());
            }
        }
        let g = SuperSeries::from_terms(chart, trunc, gt);
        let psi = SuperSeries::from_terms(chart, trunc, pt);
        let fp = g.mul(&g).sub(&psi.mul(&psi.d_even(crate::series::Side::Z)));
        let f = fp.integrate_z().with_trunc(trunc);
        let th = SuperSeries::theta(chart, trunc, 1);
        let big_f = f.add(&th.mul(&psi).mul(&g));
        let big_psi = psi.add(&th.mul(&g));
        crate::disk::CoordinateChange::new(big_f, vec![big_psi], Variant::NK).expect("superconformal sample")
    }

    /// Random oriented N = 2 superconformal change in complex coordinates,
    /// built from an arbitrary pair (G(u,θ⁺), Ψ⁺(u,θ⁺)) with u = z + ½θ⁺θ⁻.
    pub fn oriented_n2(&mut self, trunc: i32) -> crate::disk::CoordinateChange {
        let chart = Chart::complex2();
        let hi = trunc + 2;
        let th_p = SuperSeries::theta(chart, hi, 1);
        let u = SuperSeries::z(chart, hi);
        // G and Ψ⁺ independent of θ⁻, vanishing at the origin
        let mut g = u.scale(&self.unit_scalar());
        let mut p = th_p.scale(&self.unit_scalar());
        for k in 1..=hi {
            let uk = u.pow(k as u32);
            if k >= 2 && self.coin(0.6) {
                g = g.add(&uk.scale(&self.even_scalar()));
            }
            if self.coin(0.5) {
                g = g.add(&th_p.mul(&uk).scale(&self.odd_scalar()));
            }
            if self.coin(0.5) {
                p = p.add(&uk.scale(&self.odd_scalar()));
            }
            if self.coin(0.6) {
                p = p.add(&th_p.mul(&uk).scale(&self.even_scalar()));
            }
        }
        let dm = |s: &SuperSeries| s.odd_plus(crate::series::Side::Z, 1, 2, qi_frac(1, 1));
        let psi_m = dm(&g).div(&dm(&p)).expect("D⁻Ψ⁺ invertible");
        let f_u = g.sub(&p.mul(&psi_m).scale_q(&qi_frac(1, 2)));
        // back to z: u = z + ½θ⁺θ⁻
        let th_m = SuperSeries::theta(chart, hi, 2);
        let uz = u.add(&th_p.mul(&th_m).scale_q(&qi_frac(1, 2)));
        let odd = [th_p.clone(), th_m.clone()];
        let back = |s: &SuperSeries| s.substitute(&[uz.clone()], &odd).with_trunc(trunc);
        crate::disk::CoordinateChange::new(back(&f_u), vec![back(&p), back(&psi_m)], Variant::NK)
            .expect("oriented sample")
    }
}

