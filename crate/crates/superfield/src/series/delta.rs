//! Formal distributions in (Z, W) restricted to a finite window of even
//! exponents, and the super delta-function δ(Z,W) = (i_{z,w} − i_{w,z})(Z−W)^{−1|N}.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{add_into, Chart, Derivation, Mono, Side, SuperSeries, Terms, Variant};
use crate::scalar::{reorder_sign, Qi, Scalar};

/// Precision used for window tables; total degree is bounded by the window instead.
pub const UNBOUNDED: i32 = 1 << 20;

/// Generalized binomial coefficient C(q, k) for any integer q.
pub fn binom(q: i64, k: u32) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k as i64 {
        num *= BigInt::from(q - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

fn qi(r: BigRational) -> Qi {
    Qi::new(r, BigRational::zero())
}

/// Expansion domain of a rational function of z − w.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// |z| > |w|
    ZW,
    /// |w| > |z|
    WZ,
}

/// A coefficient table valid for |exponent| ≤ window in both z and w.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    pub series: SuperSeries,
    pub window: i32,
}

impl Distribution {
    pub fn restrict(&self, window: i32) -> Distribution {
        let w = window.min(self.window);
        let t: Terms = self
            .series
            .terms()
            .iter()
            .filter(|(m, _)| m.ez.abs() <= w && m.ew.abs() <= w)
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        Distribution {
            series: SuperSeries::from_terms(self.series.chart(), UNBOUNDED, t),
            window: w,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    pub fn sub(&self, other: &Distribution) -> Distribution {
        Distribution {
            series: self.series.sub(&other.series),
            window: self.window.min(other.window),
        }
        .restrict(self.window.min(other.window))
    }
}

/// (z − w)^q expanded in the given domain, keeping exponents within `window`.
pub fn expand_power(chart: Chart, q: i64, domain: Domain, window: i32) -> SuperSeries {
    let mut t = Terms::new();
    let mut k: u32 = 0;
    loop {
        if q >= 0 && k as i64 > q {
            break;
        }
        // ZW: z^{q−k}(−w)^k ; WZ: (−1)^q w^{q−k}(−z)^k
        let (ez, ew, sign_exp) = match domain {
            Domain::ZW => (q - k as i64, k as i64, k as i64),
            Domain::WZ => (k as i64, q - k as i64, q + k as i64),
        };
        let moving = match domain {
            Domain::ZW => ew,
            Domain::WZ => ez,
        };
        if moving > window as i64 {
            break;
        }
        if ez.abs() <= window as i64 && ew.abs() <= window as i64 {
            let mut c = binom(q, k);
            if sign_exp.rem_euclid(2) == 1 {
                c = -c;
            }
            add_into(
                &mut t,
                Mono { ez: ez as i32, ew: ew as i32, odd: 0 },
                Scalar::from_qi(qi(c)),
            );
        }
        k += 1;
    }
    SuperSeries::from_terms(chart, UNBOUNDED, t)
}

/// Σ θ^i ζ^i on the two-chart ring.
fn theta_zeta(chart: Chart) -> SuperSeries {
    let mut s = SuperSeries::zero(chart, UNBOUNDED);
    for i in 1..=chart.n {
        let th = SuperSeries::odd_var(chart, UNBOUNDED, Side::Z, i);
        let ze = SuperSeries::odd_var(chart, UNBOUNDED, Side::W, i);
        s = s.add(&th.mul(&ze));
    }
    s
}

/// (θ − ζ)^K = Π_{k∈K, increasing} (θ^k − ζ^k).
pub fn odd_difference_power(chart: Chart, kmask: u32) -> SuperSeries {
    let mut s = SuperSeries::one(chart, UNBOUNDED);
    for i in 1..=chart.n {
        if kmask & (1 << (i - 1)) != 0 {
            let th = SuperSeries::odd_var(chart, UNBOUNDED, Side::Z, i);
            let ze = SuperSeries::odd_var(chart, UNBOUNDED, Side::W, i);
            s = s.mul(&th.sub(&ze));
        }
    }
    s
}

/// (Z−W)^{q|K} in one expansion domain. In the NK case the even coordinate
/// is z − w − Σθ^iζ^i; the nilpotent correction is expanded binomially.
pub fn power_of_difference(
    chart: Chart,
    variant: Variant,
    q: i64,
    kmask: u32,
    domain: Domain,
    window: i32,
) -> SuperSeries {
    let odd = odd_difference_power(chart, kmask);
    let s = theta_zeta(chart);
    let mut even = SuperSeries::zero(chart, UNBOUNDED);
    let rmax = if variant == Variant::NK { chart.n as u32 } else { 0 };
    let mut s_pow = SuperSeries::one(chart, UNBOUNDED);
    for r in 0..=rmax {
        if s_pow.is_zero() {
            break;
        }
        // C(q,r) x^{q−r} (−s)^r
        let mut c = binom(q, r);
        if r % 2 == 1 {
            c = -c;
        }
        let x = expand_power(chart, q - r as i64, domain, window);
        even = even.add(&s_pow.mul(&x).scale_q(&qi(c)));
        s_pow = s_pow.mul(&s);
    }
    odd.mul(&even)
}

/// (i_{z,w} − i_{w,z})(Z−W)^{q|K} on a window.
pub fn delta_like(chart: Chart, variant: Variant, q: i64, kmask: u32, window: i32) -> Distribution {
    let a = power_of_difference(chart, variant, q, kmask, Domain::ZW, window);
    let b = power_of_difference(chart, variant, q, kmask, Domain::WZ, window);
    Distribution { series: a.sub(&b), window }.restrict(window)
}

/// δ(Z,W) on a window.
pub fn delta(n: usize, variant: Variant, window: i32) -> Distribution {
    let chart = Chart::new(n).bivariate();
    delta_like(chart, variant, -1, (1 << n) - 1, window)
}

/// D_W for the variant: ∂_{ζ^i} (NW) or ∂_{ζ^i} + ζ^i∂_w (NK).
pub fn d_w(s: &SuperSeries, variant: Variant, i: usize) -> SuperSeries {
    let d = match variant {
        Variant::NW => Derivation::Dtheta(i),
        Variant::NK => Derivation::D(i),
    };
    s.derive_on(Side::W, d).expect("W derivation")
}

/// (−1)^{J(J+1)/2}/j! · ∂_w^j D_W^J applied to a two-chart series.
pub fn apply_d_jj(s: &SuperSeries, variant: Variant, j: u32, jmask: u32) -> SuperSeries {
    let n = s.chart().n;
    let mut out = s.clone();
    for i in (1..=n).rev() {
        if jmask & (1 << (i - 1)) != 0 {
            out = d_w(&out, variant, i);
        }
    }
    let mut fact = BigInt::one();
    for k in 1..=j as i64 {
        out = out.d_even(Side::W);
        fact *= BigInt::from(k);
    }
    let jl = jmask.count_ones();
    let mut c = BigRational::new(BigInt::one(), fact);
    if (jl * (jl + 1) / 2) % 2 == 1 {
        c = -c;
    }
    out.scale_q(&qi(c))
}

/// σ(I, J): θ^Iθ^J = σ(I,J) θ^{I∪J}. `None` when I and J overlap.
pub fn sigma(i: u32, j: u32) -> Option<i64> {
    reorder_sign(i, j).map(|neg| if neg { -1 } else { 1 })
}

/// Result of comparing the two sides of the delta-derivative identity.
#[derive(Clone, Debug)]
pub struct DeltaReport {
    pub lhs: Distribution,
    pub rhs: Distribution,
    pub agree: bool,
}

/// Expand D_W^{(j|J)}δ(Z,W) directly and as σ(J, N∖J)(i_{z,w} − i_{w,z})(Z−W)^{−1−j|N∖J}.
pub fn delta_expand(n: usize, variant: Variant, j: u32, jmask: u32, window: i32) -> DeltaReport {
    let chart = Chart::new(n).bivariate();
    let full = (1u32 << n) - 1;
    let margin = j as i32 + jmask.count_ones() as i32 + 2;
    let d = delta(n, variant, window + margin);
    let lhs = Distribution {
        series: apply_d_jj(&d.series, variant, j, jmask),
        window,
    }
    .restrict(window);
    let comp = full & !jmask;
    let sg = sigma(jmask, comp).unwrap();
    let r = delta_like(chart, variant, -1 - j as i64, comp, window);
    let rhs = Distribution { series: r.series.scale_int(sg), window }.restrict(window);
    let agree = lhs.series.terms() == rhs.series.terms();
    DeltaReport { lhs, rhs, agree }
}

/// Check (Z−W)^{1|0}δ = 0 and (Z−W)^{0|e_i}δ = 0 on a window.
pub fn annihilation_check(n: usize, variant: Variant, window: i32) -> bool {
    let chart = Chart::new(n).bivariate();
    let d = delta(n, variant, window + 2);
    let mut even = SuperSeries::even_var(chart, UNBOUNDED, Side::Z)
        .sub(&SuperSeries::even_var(chart, UNBOUNDED, Side::W));
    if variant == Variant::NK {
        even = even.sub(&theta_zeta(chart));
    }
    let mut ok = Distribution { series: even.mul(&d.series), window }.restrict(window).is_zero();
    for i in 1..=n {
        let o = odd_difference_power(chart, 1 << (i - 1));
        ok &= Distribution { series: o.mul(&d.series), window }.restrict(window).is_zero();
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(-1, 3), BigRational::from_integer(BigInt::from(-1)));
        assert_eq!(binom(5, 2), BigRational::from_integer(BigInt::from(10)));
        assert_eq!(binom(-2, 2), BigRational::from_integer(BigInt::from(3)));
    }

    #[test]
    fn ordinary_delta() {
        // N = 0: δ(z,w) = Σ_k z^{-1-k} w^k + Σ_k w^{-1-k} z^k
        let d = delta(0, Variant::NW, 3);
        for (m, c) in d.series.terms() {
            assert_eq!(m.ez + m.ew, -1);
            assert!(c.is_one());
        }
        assert_eq!(d.series.terms().len(), 6);
    }

    #[test]
    fn identity_small_cases() {
        for variant in [Variant::NW, Variant::NK] {
            for n in 1..=2 {
                for j in 0..=2 {
                    for jm in 0..(1u32 << n) {
                        assert!(delta_expand(n, variant, j, jm, 4).agree, "{:?} {} {} {}", variant, n, j, jm);
                    }
                }
            }
        }
    }

    #[test]
    fn annihilation() {
        for variant in [Variant::NW, Variant::NK] {
            for n in 0..=2 {
                assert!(annihilation_check(n, variant, 5));
            }
        }
    }
}
