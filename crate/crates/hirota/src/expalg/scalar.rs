//! Scalars: exact elements of a quadratic field Q(sqrt d), or complex doubles.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::AlgError;

/// The arithmetic context a scalar lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctx {
    /// Exact arithmetic in Q(sqrt d).
    Exact(i64),
    /// Double precision complex arithmetic.
    Float,
}

/// Radicand used when none is configured.
pub const DEFAULT_RADICAND: i64 = -3;

impl Default for Ctx {
    fn default() -> Self {
        Ctx::Exact(DEFAULT_RADICAND)
    }
}

impl Ctx {
    /// Exact context for a squarefree radicand `d` (d != 0, 1).
    pub fn exact(d: i64) -> Result<Ctx, AlgError> {
        if d == 0 || d == 1 || !is_squarefree(d) {
            return Err(AlgError::BadRadicand(d));
        }
        Ok(Ctx::Exact(d))
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Ctx::Exact(_))
    }

    pub fn int(self, n: i64) -> Scalar {
        self.rat(n, 1)
    }

    /// n/m in this context; panics on m = 0.
    pub fn rat(self, n: i64, m: i64) -> Scalar {
        assert!(m != 0, "zero denominator");
        match self {
            Ctx::Exact(d) => Scalar::Exact(Quad {
                p: BigRational::new(n.into(), m.into()),
                q: BigRational::zero(),
                d,
            }),
            Ctx::Float => Scalar::Float(Complex64::new(n as f64 / m as f64, 0.0)),
        }
    }

    pub fn zero(self) -> Scalar {
        self.int(0)
    }

    pub fn one(self) -> Scalar {
        self.int(1)
    }

    /// The generator rho with rho^2 = d. The float backend carries no radicand
    /// and returns i*sqrt(3), matching the default one.
    pub fn rho(self) -> Scalar {
        match self {
            Ctx::Exact(d) => Scalar::Exact(Quad {
                p: BigRational::zero(),
                q: BigRational::one(),
                d,
            }),
            Ctx::Float => Scalar::Float(Complex64::new(0.0, 3f64.sqrt())),
        }
    }

    /// p + q*rho with rational parts given as (numerator, denominator) pairs.
    pub fn quad(self, p: (i64, i64), q: (i64, i64)) -> Scalar {
        &self.rat(p.0, p.1) + &(&self.rat(q.0, q.1) * &self.rho())
    }

    pub fn float(self, x: f64) -> Scalar {
        match self {
            Ctx::Float => Scalar::Float(Complex64::new(x, 0.0)),
            Ctx::Exact(_) => panic!("float literal in exact context"),
        }
    }
}

fn is_squarefree(d: i64) -> bool {
    let n = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Element p + q*rho of Q(rho), rho^2 = d.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quad {
    pub p: BigRational,
    pub q: BigRational,
    pub d: i64,
}

impl Quad {
    fn norm(&self) -> BigRational {
        &self.p * &self.p - BigRational::from_integer(self.d.into()) * &self.q * &self.q
    }
}

/// A backend-tagged scalar.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Quad),
    Float(Complex64),
}

impl Scalar {
    pub fn ctx(&self) -> Ctx {
        match self {
            Scalar::Exact(a) => Ctx::Exact(a.d),
            Scalar::Float(_) => Ctx::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(a) => a.p.is_zero() && a.q.is_zero(),
            Scalar::Float(z) => *z == Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(a) => a.p.is_one() && a.q.is_zero(),
            Scalar::Float(z) => *z == Complex64::new(1.0, 0.0),
        }
    }

    /// Rational part and radical part of an exact scalar.
    pub fn parts(&self) -> Option<(&BigRational, &BigRational)> {
        match self {
            Scalar::Exact(a) => Some((&a.p, &a.q)),
            Scalar::Float(_) => None,
        }
    }

    /// True for exact scalars with vanishing radical part.
    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Exact(a) if a.q.is_zero())
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Float(z) => *z,
            Scalar::Exact(a) => {
                let p = ratio_to_f64(&a.p);
                let q = ratio_to_f64(&a.q);
                let r = (a.d.unsigned_abs() as f64).sqrt();
                if a.d < 0 {
                    Complex64::new(p, q * r)
                } else {
                    Complex64::new(p + q * r, 0.0)
                }
            }
        }
    }

    /// Same value moved to the float backend.
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_complex())
    }

    fn check(&self, o: &Scalar) -> Result<(), AlgError> {
        if self.ctx() == o.ctx() {
            Ok(())
        } else {
            Err(AlgError::ContextMismatch(self.ctx(), o.ctx()))
        }
    }

    pub fn checked_add(&self, o: &Scalar) -> Result<Scalar, AlgError> {
        self.check(o)?;
        Ok(match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(Quad {
                p: &a.p + &b.p,
                q: if b.q.is_zero() { a.q.clone() } else { &a.q + &b.q },
                d: a.d,
            }),
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a + b),
            _ => unreachable!(),
        })
    }

    pub fn checked_sub(&self, o: &Scalar) -> Result<Scalar, AlgError> {
        self.checked_add(&-o)
    }

    pub fn checked_mul(&self, o: &Scalar) -> Result<Scalar, AlgError> {
        self.check(o)?;
        Ok(match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) if a.q.is_zero() && b.q.is_zero() => Scalar::Exact(Quad {
                p: &a.p * &b.p,
                q: BigRational::zero(),
                d: a.d,
            }),
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let d = BigRational::from_integer(a.d.into());
                Scalar::Exact(Quad {
                    p: &a.p * &b.p + d * &a.q * &b.q,
                    q: &a.p * &b.q + &a.q * &b.p,
                    d: a.d,
                })
            }
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a * b),
            _ => unreachable!(),
        })
    }

    pub fn inv(&self) -> Result<Scalar, AlgError> {
        if self.is_zero() {
            return Err(AlgError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Exact(a) => {
                let n = a.norm();
                Scalar::Exact(Quad {
                    p: &a.p / &n,
                    q: -(&a.q / &n),
                    d: a.d,
                })
            }
            Scalar::Float(z) => Scalar::Float(z.inv()),
        })
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar, AlgError> {
        self.check(o)?;
        self.checked_mul(&o.inv()?)
    }

    /// Integer power; negative exponents invert (zero base rejected).
    pub fn pow(&self, n: i32) -> Result<Scalar, AlgError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.ctx().one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// Exact square root inside the field, if one exists.
    pub fn sqrt_exact(&self) -> Option<Scalar> {
        let a = match self {
            Scalar::Exact(a) => a,
            Scalar::Float(_) => return None,
        };
        if self.is_zero() {
            return Some(self.clone());
        }
        let n = rational_sqrt(&a.norm())?;
        let two = BigRational::from_integer(2.into());
        for sign in [1, -1] {
            let s = BigRational::from_integer(sign.into());
            let u2 = (&a.p + s * &n) / &two;
            if u2.is_zero() {
                // pure radical root: x = d * v^2
                let v2 = &a.p / BigRational::from_integer(a.d.into());
                if let Some(v) = rational_sqrt(&v2) {
                    let r = Scalar::Exact(Quad { p: BigRational::zero(), q: v, d: a.d });
                    if &(&r * &r) == self {
                        return Some(r);
                    }
                }
                continue;
            }
            if let Some(u) = rational_sqrt(&u2) {
                let v = &a.q / (&two * &u);
                let r = Scalar::Exact(Quad { p: u, q: v, d: a.d });
                if &(&r * &r) == self {
                    return Some(r);
                }
            }
        }
        None
    }

    /// Complex principal square root.
    pub fn sqrt_float(&self) -> Scalar {
        Scalar::Float(self.to_complex().sqrt())
    }

    fn cmp_key(&self, o: &Scalar) -> Ordering {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.d.cmp(&b.d).then(a.p.cmp(&b.p)).then(a.q.cmp(&b.q)),
            (Scalar::Float(a), Scalar::Float(b)) => a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)),
            (Scalar::Exact(_), Scalar::Float(_)) => Ordering::Less,
            (Scalar::Float(_), Scalar::Exact(_)) => Ordering::Greater,
        }
    }

    /// Magnitude used by float residual norms.
    pub fn abs(&self) -> f64 {
        self.to_complex().norm()
    }
}

/// Square root of a nonnegative rational, if it is a perfect square.
fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer();
    let d = x.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // scale both down to avoid inf/inf
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n: BigInt = r.numer() >> shift;
            let d: BigInt = r.denom() >> shift;
            n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
        }
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Scalar {
    /// Total order: context, then (rational part, radical part) or (re, im).
    fn cmp(&self, o: &Self) -> Ordering {
        self.cmp_key(o)
    }
}

impl std::hash::Hash for Scalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Scalar::Exact(a) => a.hash(state),
            Scalar::Float(z) => {
                z.re.to_bits().hash(state);
                z.im.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(a) => {
                if a.q.is_zero() {
                    write!(f, "{}", a.p)
                } else if a.p.is_zero() {
                    write!(f, "{}*sqrt({})", a.q, a.d)
                } else {
                    let sign = if a.q.is_negative() { "-" } else { "+" };
                    write!(f, "{}{}{}*sqrt({})", a.p, sign, a.q.abs(), a.d)
                }
            }
            Scalar::Float(z) => {
                if z.im == 0.0 {
                    write!(f, "{:e}", z.re)
                } else {
                    write!(f, "{:e}{:+e}i", z.re, z.im)
                }
            }
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            /// Panics on context mismatch; use the checked form at API boundaries.
            fn $m(self, o: &Scalar) -> Scalar {
                self.$checked(o).expect("scalar arithmetic")
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(Quad {
                p: -a.p.clone(),
                q: -a.q.clone(),
                d: a.d,
            }),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_squares_to_radicand() {
        let c = Ctx::default();
        let r = c.rho();
        assert_eq!(&r * &r, c.int(-3));
    }

    #[test]
    fn inverse_roundtrip() {
        let c = Ctx::default();
        let x = c.quad((3, 2), (-1, 5));
        assert!((&x * &x.inv().unwrap()).is_one());
    }

    #[test]
    fn division_by_zero_rejected() {
        let c = Ctx::default();
        assert_eq!(c.one().checked_div(&c.zero()), Err(AlgError::DivisionByZero));
    }

    #[test]
    fn mixed_contexts_rejected() {
        let a = Ctx::exact(-3).unwrap().one();
        let b = Ctx::exact(13).unwrap().one();
        assert!(a.checked_add(&b).is_err());
        assert!(a.checked_mul(&Ctx::Float.one()).is_err());
    }

    #[test]
    fn bad_radicands() {
        assert!(Ctx::exact(4).is_err());
        assert!(Ctx::exact(1).is_err());
        assert!(Ctx::exact(-12).is_err());
        assert!(Ctx::exact(13).is_ok());
    }

    #[test]
    fn exact_square_roots() {
        let c = Ctx::default();
        // (1+rho)/2 squared is (-1+rho)/2
        let w = c.quad((-1, 2), (1, 2));
        let r = w.sqrt_exact().unwrap();
        assert_eq!(&r * &r, w);
        assert_eq!(c.int(-3).sqrt_exact().unwrap(), c.rho());
        assert!(c.int(2).sqrt_exact().is_none());
        assert_eq!(c.rat(9, 4).sqrt_exact().unwrap(), c.rat(3, 2));
    }

    #[test]
    fn pow_negative() {
        let c = Ctx::default();
        assert_eq!(c.int(2).pow(-3).unwrap(), c.rat(1, 8));
        assert!(c.zero().pow(-1).is_err());
    }

    #[test]
    fn float_value_of_radical() {
        let z = Ctx::default().rho().to_complex();
        assert!((z.im - 3f64.sqrt()).abs() < 1e-15 && z.re == 0.0);
    }
}
