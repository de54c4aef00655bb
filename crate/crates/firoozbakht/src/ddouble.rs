//! Double-double arithmetic: an unevaluated sum of two f64s giving ~106
//! bits of significand. Used as the middle tier of the exact pair checker
//! and as the high-precision oracle in tests. Only the operations needed
//! for logarithmic margins are implemented.

/// Value = hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    /// ln 2 split across two doubles.
    const LN2: Dd = Dd {
        hi: 0.6931471805599453,
        lo: 2.3190468138462996e-17,
    };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion; every u64 is representable as hi + lo.
    pub fn from_u64(x: u64) -> Dd {
        let hi = x as f64;
        let lo = if hi >= 9.007199254740992e15 {
            // x may exceed 2^53: recover the rounding residue exactly.
            (x as i128 - hi as i128) as f64
        } else {
            0.0
        };
        Dd::new(hi, lo)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_sign_positive(self) -> bool {
        self.hi > 0.0 || (self.hi == 0.0 && self.lo > 0.0)
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            Dd {
                hi: -self.hi,
                lo: -self.lo,
            }
        } else {
            self
        }
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::new(s1, s2 + t2)
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        Dd::new(p1, p2)
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::new(s, e + q3)
    }

    pub fn mul_f64(self, x: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, x);
        Dd::new(p1, p2 + self.lo * x)
    }

    pub fn div_f64(self, x: f64) -> Dd {
        self.div(Dd::from_f64(x))
    }

    /// Exact scaling by 2^e.
    fn ldexp(self, e: i32) -> Dd {
        let f = f64::powi(2.0, e);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    /// Natural logarithm; requires a positive, finite, normal value.
    pub fn ln(self) -> Dd {
        assert!(self.hi.is_finite() && self.hi > 0.0, "ln domain: {self:?}");
        // Reduce to x = m * 2^e with m in [1/sqrt2, sqrt2).
        let mut e = ((self.hi.to_bits() >> 52) & 0x7ff) as i32 - 1023;
        let mut m = self.ldexp(-e);
        if m.hi >= std::f64::consts::SQRT_2 {
            m = m.ldexp(-1);
            e += 1;
        }
        // ln m = 2 atanh(t), t = (m-1)/(m+1), |t| < 0.1716.
        let one = Dd::from_f64(1.0);
        let t = m.sub(one).div(m.add(one));
        let series = atanh_series(t);
        Dd::LN2.mul_f64(e as f64).add(series.mul_f64(2.0))
    }

    /// ln(1 + u) without forming 1 + u when u is small.
    pub fn ln1p(self) -> Dd {
        if self.hi.abs() >= 0.5 {
            return Dd::from_f64(1.0).add(self).ln();
        }
        // ln(1+u) = 2 atanh(u / (2+u)), |t| <= 0.2 for |u| <= 0.5.
        let t = self.div(Dd::from_f64(2.0).add(self));
        atanh_series(t).mul_f64(2.0)
    }
}

/// t + t^3/3 + t^5/5 + ... for |t| <= 0.2; converges past the dd precision
/// within 27 odd terms.
fn atanh_series(t: Dd) -> Dd {
    let t2 = t.mul(t);
    let mut term = t;
    let mut sum = t;
    let mut k = 3.0f64;
    loop {
        term = term.mul(t2);
        let contrib = term.div_f64(k);
        sum = sum.add(contrib);
        if contrib.hi.abs() <= sum.hi.abs() * 1e-35 || k > 61.0 {
            break;
        }
        k += 2.0;
    }
    sum
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        Dd::add(self, rhs)
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        Dd::sub(self, rhs)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        Dd::mul(self, rhs)
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        Dd::div(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: Dd, want: f64, rel: f64) {
        let g = got.to_f64();
        assert!(
            (g - want).abs() <= want.abs() * rel + f64::MIN_POSITIVE,
            "got {g}, want {want}"
        );
    }

    #[test]
    fn u64_roundtrip_is_exact() {
        for x in [
            0u64,
            1,
            2,
            1 << 53,
            (1 << 53) + 1,
            4_000_000_000_000_000_037,
            u64::MAX,
        ] {
            let d = Dd::from_u64(x);
            let back = d.hi as i128 + d.lo as i128;
            assert_eq!(back, x as i128, "x = {x}");
        }
    }

    #[test]
    fn arithmetic_identities() {
        let a = Dd::from_u64(10_000_000_000_000_037);
        let b = Dd::from_f64(3.0);
        let q = a.div(b);
        let back = q.mul(b);
        let err = back.sub(a).to_f64().abs();
        assert!(err < 1e-15, "err = {err}");
    }

    #[test]
    fn ln_of_powers_of_two() {
        for e in [1i32, 10, 52, 60] {
            let x = Dd::from_f64(f64::powi(2.0, e));
            let want = std::f64::consts::LN_2 * e as f64;
            assert_close(x.ln(), want, 1e-15);
        }
    }

    #[test]
    fn ln_matches_f64_everywhere_coarse() {
        for x in [2.0f64, 3.0, 10.0, 60184.0, 1e6, 1e12, 4e18] {
            assert_close(Dd::from_f64(x).ln(), x.ln(), 1e-15);
        }
    }

    #[test]
    fn ln_known_values_high_precision() {
        // Reference splits computed with 50-digit decimal arithmetic.
        for (x, hi, lo) in [
            (60184u64, 11.005161815240058, -3.8311190103903417e-16),
            (13626257, 16.42750915113891, 1.5539128781806027e-15),
        ] {
            let got = Dd::from_u64(x).ln();
            let want = Dd::new(hi, lo);
            let err = got.sub(want).to_f64().abs();
            assert!(err < 1e-28, "ln({x}) err = {err}");
        }
    }

    #[test]
    fn ln1p_consistent_with_ln() {
        for u in [1e-18f64, 1e-9, 1e-3, 0.3, 0.5, 2.0, 1e6] {
            let via_ln1p = Dd::from_f64(u).ln1p();
            let direct = Dd::from_f64(1.0).add(Dd::from_f64(u)).ln();
            let diff = via_ln1p.sub(direct).to_f64().abs();
            let scale = via_ln1p.to_f64().abs().max(1e-300);
            assert!(diff / scale < 1e-25, "u = {u}, rel diff = {}", diff / scale);
        }
    }

    #[test]
    fn ln1p_beats_f64_for_tiny_ratios() {
        // ln(1 + g/x) for x ~ 1e18: direct f64 subtraction of logs loses
        // everything; dd ln1p keeps ~30 digits.
        let g = 1476.0f64;
        let x = 1.425172824437699411e18f64;
        let dd = Dd::from_f64(g).div(Dd::from_f64(x)).ln1p();
        let expect = g / x - (g / x) * (g / x) / 2.0;
        assert_close(dd, expect, 1e-12);
    }
}
