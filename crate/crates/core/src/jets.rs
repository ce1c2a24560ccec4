//! Second-order forward-mode differentiation over the parameter plane `(s, t)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("singularity in {op} at argument {value:e}")]
    Singularity { op: &'static str, value: f64 },
}

/// Value, gradient and Hessian of a scalar function of `(s, t)`.
///
/// The mixed partial is stored once, so `d_st == d_ts` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet2 {
    pub val: f64,
    pub d_s: f64,
    pub d_t: f64,
    pub d_ss: f64,
    pub d_st: f64,
    pub d_tt: f64,
}

impl Jet2 {
    pub const fn constant(val: f64) -> Self {
        Self {
            val,
            d_s: 0.0,
            d_t: 0.0,
            d_ss: 0.0,
            d_st: 0.0,
            d_tt: 0.0,
        }
    }

    /// The coordinate function `s` evaluated at `s`.
    pub const fn seed_s(s: f64) -> Self {
        Self {
            val: s,
            d_s: 1.0,
            ..Self::constant(0.0)
        }
    }

    /// The coordinate function `t` evaluated at `t`.
    pub const fn seed_t(t: f64) -> Self {
        Self {
            val: t,
            d_t: 1.0,
            ..Self::constant(0.0)
        }
    }

    /// Both coordinate seeds at the point `(s, t)`.
    pub const fn seeds(s: f64, t: f64) -> (Self, Self) {
        (Self::seed_s(s), Self::seed_t(t))
    }

    pub fn is_constant(&self) -> bool {
        self.d_s == 0.0
            && self.d_t == 0.0
            && self.d_ss == 0.0
            && self.d_st == 0.0
            && self.d_tt == 0.0
    }

    /// Push `self` through a scalar function with value `f0`, first
    /// derivative `f1` and second derivative `f2` at `self.val`.
    #[inline]
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            val: f0,
            d_s: f1 * self.d_s,
            d_t: f1 * self.d_t,
            d_ss: f2 * self.d_s * self.d_s + f1 * self.d_ss,
            d_st: f2 * self.d_s * self.d_t + f1 * self.d_st,
            d_tt: f2 * self.d_t * self.d_t + f1 * self.d_tt,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            val: k * self.val,
            d_s: k * self.d_s,
            d_t: k * self.d_t,
            d_ss: k * self.d_ss,
            d_st: k * self.d_st,
            d_tt: k * self.d_tt,
        }
    }

    pub fn checked_div(self, rhs: Jet2) -> Result<Jet2, JetError> {
        if rhs.val == 0.0 || !rhs.val.is_finite() {
            return Err(JetError::Singularity {
                op: "division",
                value: rhs.val,
            });
        }
        Ok(self * rhs.recip_unchecked())
    }

    fn recip_unchecked(&self) -> Jet2 {
        let inv = 1.0 / self.val;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn recip(&self) -> Result<Jet2, JetError> {
        Jet2::constant(1.0).checked_div(*self)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.val.exp();
        self.chain(e, e, e)
    }

    pub fn sinh(&self) -> Jet2 {
        let (sh, ch) = (self.val.sinh(), self.val.cosh());
        self.chain(sh, ch, sh)
    }

    pub fn cosh(&self) -> Jet2 {
        let (sh, ch) = (self.val.sinh(), self.val.cosh());
        self.chain(ch, sh, ch)
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Result<Jet2, JetError> {
        let c = self.val.cos();
        if c.abs() < 1e-12 {
            return Err(JetError::Singularity {
                op: "tan",
                value: self.val,
            });
        }
        let t = self.val.tan();
        let sec2 = 1.0 + t * t;
        Ok(self.chain(t, sec2, 2.0 * t * sec2))
    }

    pub fn ln(&self) -> Result<Jet2, JetError> {
        if !(self.val > 0.0) {
            return Err(JetError::Singularity {
                op: "log",
                value: self.val,
            });
        }
        let inv = 1.0 / self.val;
        Ok(self.chain(self.val.ln(), inv, -inv * inv))
    }

    pub fn sqrt(&self) -> Result<Jet2, JetError> {
        if !(self.val > 0.0) {
            return Err(JetError::Singularity {
                op: "sqrt",
                value: self.val,
            });
        }
        let r = self.val.sqrt();
        let d1 = 0.5 / r;
        Ok(self.chain(r, d1, -0.5 * d1 / self.val))
    }

    /// Integer power by repeated multiplication; negative exponents divide.
    pub fn powi(&self, n: i64) -> Result<Jet2, JetError> {
        let mut acc = Jet2::constant(1.0);
        let mut base = *self;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        if n < 0 {
            Jet2::constant(1.0)
                .checked_div(acc)
                .map_err(|_| JetError::Singularity {
                    op: "pow",
                    value: self.val,
                })
        } else {
            Ok(acc)
        }
    }

    /// General power. Constant integral exponents are unrolled; anything else
    /// goes through `exp(b ln a)` and needs a positive base.
    pub fn pow(&self, exponent: &Jet2) -> Result<Jet2, JetError> {
        if exponent.is_constant() && exponent.val.fract() == 0.0 && exponent.val.abs() < 1e6 {
            return self.powi(exponent.val as i64);
        }
        if !(self.val > 0.0) {
            return Err(JetError::Singularity {
                op: "pow",
                value: self.val,
            });
        }
        Ok((*exponent * self.ln()?).exp())
    }
}

impl From<f64> for Jet2 {
    fn from(v: f64) -> Self {
        Jet2::constant(v)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, b: Jet2) -> Jet2 {
        Jet2 {
            val: self.val + b.val,
            d_s: self.d_s + b.d_s,
            d_t: self.d_t + b.d_t,
            d_ss: self.d_ss + b.d_ss,
            d_st: self.d_st + b.d_st,
            d_tt: self.d_tt + b.d_tt,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, b: Jet2) -> Jet2 {
        self + (-b)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, b: Jet2) -> Jet2 {
        let a = self;
        Jet2 {
            val: a.val * b.val,
            d_s: a.d_s * b.val + a.val * b.d_s,
            d_t: a.d_t * b.val + a.val * b.d_t,
            d_ss: a.d_ss * b.val + 2.0 * a.d_s * b.d_s + a.val * b.d_ss,
            d_st: a.d_st * b.val + a.d_s * b.d_t + a.d_t * b.d_s + a.val * b.d_st,
            d_tt: a.d_tt * b.val + 2.0 * a.d_t * b.d_t + a.val * b.d_tt,
        }
    }
}

/// Panicking division for hand-written formulas with known nonzero divisors.
/// Use [`Jet2::checked_div`] on untrusted input.
impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, b: Jet2) -> Jet2 {
        self.checked_div(b).expect("division by a zero-valued jet")
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Jet2 {
            type Output = Jet2;
            fn $m(self, b: f64) -> Jet2 { $tr::$m(self, Jet2::constant(b)) }
        }
        impl $tr<Jet2> for f64 {
            type Output = Jet2;
            fn $m(self, b: Jet2) -> Jet2 { $tr::$m(Jet2::constant(self), b) }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    /// Central-difference oracle for value, gradient and Hessian.
    fn fd_jet(f: impl Fn(f64, f64) -> f64, s: f64, t: f64, h: f64) -> Jet2 {
        let f0 = f(s, t);
        Jet2 {
            val: f0,
            d_s: (f(s + h, t) - f(s - h, t)) / (2.0 * h),
            d_t: (f(s, t + h) - f(s, t - h)) / (2.0 * h),
            d_ss: (f(s + h, t) - 2.0 * f0 + f(s - h, t)) / (h * h),
            d_tt: (f(s, t + h) - 2.0 * f0 + f(s, t - h)) / (h * h),
            d_st: (f(s + h, t + h) - f(s + h, t - h) - f(s - h, t + h) + f(s - h, t - h))
                / (4.0 * h * h),
        }
    }

    fn close(a: &Jet2, b: &Jet2, tol: f64) -> bool {
        let pairs = [
            (a.val, b.val),
            (a.d_s, b.d_s),
            (a.d_t, b.d_t),
            (a.d_ss, b.d_ss),
            (a.d_st, b.d_st),
            (a.d_tt, b.d_tt),
        ];
        pairs
            .iter()
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn product_rule_on_seeds() {
        let (s, t) = Jet2::seeds(2.0, 3.0);
        let p = s * t;
        assert_eq!(
            p,
            Jet2 {
                val: 6.0,
                d_s: 3.0,
                d_t: 2.0,
                d_ss: 0.0,
                d_st: 1.0,
                d_tt: 0.0
            }
        );
    }

    #[test]
    fn self_quotient_is_constant_one() {
        let (s, t) = Jet2::seeds(0.7, -1.3);
        let a = (s * t).sin() + 2.0;
        let q = a.checked_div(a).unwrap();
        assert!(close(&q, &Jet2::constant(1.0), 1e-15));
    }

    #[test]
    fn division_by_zero_value_is_singular() {
        let (s, _) = Jet2::seeds(0.0, 0.0);
        assert!(matches!(
            Jet2::constant(1.0).checked_div(s),
            Err(JetError::Singularity { op: "division", .. })
        ));
    }

    #[test]
    fn s_squared_t_matches_finite_differences() {
        let (s, t) = Jet2::seeds(1.0, 2.0);
        let j = s * s * t;
        let fd = fd_jet(|s, t| s * s * t, 1.0, 2.0, 1e-4);
        assert!(close(&j, &fd, 1e-6));
    }

    #[test]
    fn exp_and_sinh_at_origin() {
        let s = Jet2::seed_s(0.0);
        let e = s.exp();
        assert_eq!((e.val, e.d_s, e.d_ss), (1.0, 1.0, 1.0));
        let sh = s.sinh();
        assert_eq!((sh.val, sh.d_s, sh.d_ss), (0.0, 1.0, 0.0));
    }

    #[test]
    fn scaled_exponential_matches_finite_differences() {
        let k = 2.0 / 3f64.sqrt();
        let (s, t) = Jet2::seeds(0.5, 0.0);
        let j = (s * k).exp();
        let fd = fd_jet(|s, _| (k * s).exp(), 0.5, 0.0, 1e-4);
        assert!(close(&j, &fd, 1e-6));
        let _ = t;
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        type Case = (fn(Jet2) -> Jet2, fn(f64) -> f64);
        let cases: [Case; 8] = [
            (|a| a.exp(), f64::exp),
            (|a| a.sinh(), f64::sinh),
            (|a| a.cosh(), f64::cosh),
            (|a| a.sin(), f64::sin),
            (|a| a.cos(), f64::cos),
            (|a| a.tan().unwrap(), f64::tan),
            (|a| a.ln().unwrap(), f64::ln),
            (|a| a.sqrt().unwrap(), f64::sqrt),
        ];
        let (s0, t0) = (0.4, 0.3);
        for (jf, ff) in cases {
            let (s, t) = Jet2::seeds(s0, t0);
            let arg = s * t + s * 0.5 + 0.2;
            let j = jf(arg);
            let fd = fd_jet(|s, t| ff(s * t + 0.5 * s + 0.2), s0, t0, 1e-4);
            assert!(close(&j, &fd, 1e-6), "{j:?} vs {fd:?}");
        }
    }

    #[test]
    fn domain_violations_are_singular() {
        let z = Jet2::constant(0.0);
        assert!(z.ln().is_err());
        assert!(Jet2::constant(-1.0).sqrt().is_err());
        assert!(Jet2::constant(std::f64::consts::FRAC_PI_2).tan().is_err());
        assert!(Jet2::constant(-2.0).pow(&Jet2::constant(0.5)).is_err());
        assert!(z.powi(-1).is_err());
    }

    #[test]
    fn integer_pow_is_exact_and_allows_negative_base() {
        let (s, t) = Jet2::seeds(-1.5, 0.25);
        let a = s + t;
        let cube = a.pow(&Jet2::constant(3.0)).unwrap();
        assert_eq!(cube, a * a * a);
        let inv2 = a.pow(&Jet2::constant(-2.0)).unwrap();
        let fd = fd_jet(|s, t| (s + t).powi(-2), -1.5, 0.25, 1e-4);
        assert!(close(&inv2, &fd, 1e-6));
    }

    #[test]
    fn real_pow_matches_finite_differences() {
        let (s, t) = Jet2::seeds(1.3, 0.6);
        let j = (s + 1.0).pow(&(t * 0.5)).unwrap();
        let fd = fd_jet(|s, t| (s + 1.0).powf(0.5 * t), 1.3, 0.6, 1e-4);
        assert!(close(&j, &fd, 1e-6));
    }
}
