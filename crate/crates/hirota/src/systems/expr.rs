//! Small expression trees over lattice fields, used for nonlinear lattice
//! equations and Lax matrix entries.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use super::{Slot, SystemError};
use crate::expalg::Series;

/// Nonlinear fields: the k-th x-derivative of ln(tau), k = 0..7.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Field {
    W,
    V,
    U,
    P,
    Q,
    R,
    S,
    Eta,
}

impl Field {
    pub const ALL: [Field; 8] = [Field::W, Field::V, Field::U, Field::P, Field::Q, Field::R, Field::S, Field::Eta];

    /// Number of x-derivatives applied to ln(tau).
    pub fn order(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["w", "v", "u", "p", "q", "r", "s", "eta"][self as usize]
    }
}

/// Lattice site relative to the current one: n or n + h.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Site {
    Here,
    Next,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldRef {
    pub field: Field,
    pub site: Site,
    pub dt: u8,
    pub dy: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldExpr {
    Const(Complex64),
    /// Lattice spacing.
    H,
    /// Boussinesq constant with a^2 = -3.
    A,
    Param(Slot),
    Field(FieldRef),
    Sum(Vec<FieldExpr>),
    Prod(Vec<FieldExpr>),
    Neg(Box<FieldExpr>),
    Pow(Box<FieldExpr>, u32),
    Recip(Box<FieldExpr>),
}

/// Real constant.
pub fn c(x: f64) -> FieldExpr {
    FieldExpr::Const(Complex64::new(x, 0.0))
}

pub fn h() -> FieldExpr {
    FieldExpr::H
}

pub fn a() -> FieldExpr {
    FieldExpr::A
}

pub fn param(s: Slot) -> FieldExpr {
    FieldExpr::Param(s)
}

pub fn fref(field: Field, site: Site, dt: u8, dy: u8) -> FieldExpr {
    FieldExpr::Field(FieldRef { field, site, dt, dy })
}

/// Field at site n.
pub fn here(f: Field) -> FieldExpr {
    fref(f, Site::Here, 0, 0)
}

/// Field at site n + h.
pub fn next(f: Field) -> FieldExpr {
    fref(f, Site::Next, 0, 0)
}

/// Forward difference f(n+h) - f(n), with optional t/y derivatives.
pub fn diff(f: Field, dt: u8, dy: u8) -> FieldExpr {
    fref(f, Site::Next, dt, dy) - fref(f, Site::Here, dt, dy)
}

/// Two-site sum f(n+h) + f(n), with optional t/y derivatives.
pub fn pair_sum(f: Field, dt: u8, dy: u8) -> FieldExpr {
    fref(f, Site::Next, dt, dy) + fref(f, Site::Here, dt, dy)
}

impl FieldExpr {
    pub fn pow(self, n: u32) -> FieldExpr {
        FieldExpr::Pow(Box::new(self), n)
    }

    pub fn recip(self) -> FieldExpr {
        FieldExpr::Recip(Box::new(self))
    }

    pub fn eval(&self, env: &dyn FieldEnv) -> Result<Complex64, SystemError> {
        Ok(match self {
            FieldExpr::Const(z) => *z,
            FieldExpr::H => env.h(),
            FieldExpr::A => env.a(),
            FieldExpr::Param(s) => env.param(*s)?,
            FieldExpr::Field(r) => env.field(r)?,
            FieldExpr::Sum(v) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for e in v {
                    acc += e.eval(env)?;
                }
                acc
            }
            FieldExpr::Prod(v) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for e in v {
                    acc *= e.eval(env)?;
                }
                acc
            }
            FieldExpr::Neg(e) => -e.eval(env)?,
            FieldExpr::Pow(e, n) => e.eval(env)?.powu(*n),
            FieldExpr::Recip(e) => e.eval(env)?.inv(),
        })
    }

    /// Every field reference in the expression.
    pub fn refs(&self, out: &mut Vec<FieldRef>) {
        match self {
            FieldExpr::Field(r) => out.push(*r),
            FieldExpr::Sum(v) | FieldExpr::Prod(v) => v.iter().for_each(|e| e.refs(out)),
            FieldExpr::Neg(e) | FieldExpr::Pow(e, _) | FieldExpr::Recip(e) => e.refs(out),
            _ => {}
        }
    }
}

impl Add for FieldExpr {
    type Output = FieldExpr;
    fn add(self, o: FieldExpr) -> FieldExpr {
        match self {
            FieldExpr::Sum(mut v) => {
                v.push(o);
                FieldExpr::Sum(v)
            }
            s => FieldExpr::Sum(vec![s, o]),
        }
    }
}

impl Sub for FieldExpr {
    type Output = FieldExpr;
    fn sub(self, o: FieldExpr) -> FieldExpr {
        self + (-o)
    }
}

impl Neg for FieldExpr {
    type Output = FieldExpr;
    fn neg(self) -> FieldExpr {
        match self {
            FieldExpr::Neg(e) => *e,
            s => FieldExpr::Neg(Box::new(s)),
        }
    }
}

impl Mul for FieldExpr {
    type Output = FieldExpr;
    fn mul(self, o: FieldExpr) -> FieldExpr {
        match self {
            FieldExpr::Prod(mut v) => {
                v.push(o);
                FieldExpr::Prod(v)
            }
            s => FieldExpr::Prod(vec![s, o]),
        }
    }
}

impl Mul<FieldExpr> for f64 {
    type Output = FieldExpr;
    fn mul(self, o: FieldExpr) -> FieldExpr {
        c(self) * o
    }
}

/// Values available when evaluating a field expression.
pub trait FieldEnv {
    fn field(&self, r: &FieldRef) -> Result<Complex64, SystemError>;
    fn param(&self, s: Slot) -> Result<Complex64, SystemError>;
    fn h(&self) -> Complex64;
    fn a(&self) -> Complex64;
}

/// Nonlinear fields of one site, read off the Taylor series of ln(tau).
#[derive(Clone, Debug)]
pub struct FieldJet {
    log_tau: Series,
}

impl FieldJet {
    pub fn new(log_tau: Series) -> FieldJet {
        FieldJet { log_tau }
    }

    pub fn get(&self, f: Field, dt: u8, dy: u8) -> Result<Complex64, SystemError> {
        let o = self.log_tau.orders();
        let (i, j, k) = (f.order(), dy as usize, dt as usize);
        if i > o.x || j > o.y || k > o.t {
            let name = format!("{}{}{}", f.name(), "_t".repeat(k), "_y".repeat(j));
            return Err(SystemError::MissingJet(name));
        }
        Ok(self.log_tau.deriv(i, j, k))
    }
}

/// Environment over a pair of neighbouring sites.
pub struct SiteEnv<'a> {
    pub here: &'a FieldJet,
    pub next: Option<&'a FieldJet>,
    pub params: &'a [(Slot, Complex64)],
    pub h: Complex64,
    pub a: Complex64,
}

impl FieldEnv for SiteEnv<'_> {
    fn field(&self, r: &FieldRef) -> Result<Complex64, SystemError> {
        let jet = match r.site {
            Site::Here => self.here,
            Site::Next => self.next.ok_or_else(|| SystemError::MissingJet(format!("{}[n+h]", r.field.name())))?,
        };
        jet.get(r.field, r.dt, r.dy)
    }

    fn param(&self, s: Slot) -> Result<Complex64, SystemError> {
        self.params
            .iter()
            .find(|(k, _)| *k == s)
            .map(|(_, v)| *v)
            .ok_or(SystemError::MissingSlot(s))
    }

    fn h(&self) -> Complex64 {
        self.h
    }

    fn a(&self) -> Complex64 {
        self.a
    }
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = match self.site {
            Site::Here => "n",
            Site::Next => "n+h",
        };
        write!(f, "{}[{}]{}{}", self.field.name(), site, "_t".repeat(self.dt as usize), "_y".repeat(self.dy as usize))
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldExpr::Const(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else {
                    write!(f, "({}{:+}i)", z.re, z.im)
                }
            }
            FieldExpr::H => write!(f, "h"),
            FieldExpr::A => write!(f, "a"),
            FieldExpr::Param(s) => write!(f, "{}", s.name()),
            FieldExpr::Field(r) => write!(f, "{r}"),
            FieldExpr::Sum(v) => {
                write!(f, "(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            FieldExpr::Prod(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            FieldExpr::Neg(e) => write!(f, "-{e}"),
            FieldExpr::Pow(e, n) => write!(f, "{e}^{n}"),
            FieldExpr::Recip(e) => write!(f, "1/{e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed;
    impl FieldEnv for Fixed {
        fn field(&self, r: &FieldRef) -> Result<Complex64, SystemError> {
            let base = r.field.order() as f64 + if r.site == Site::Next { 10.0 } else { 0.0 };
            Ok(Complex64::new(base + r.dt as f64 * 100.0, 0.0))
        }
        fn param(&self, _s: Slot) -> Result<Complex64, SystemError> {
            Ok(Complex64::new(2.0, 0.0))
        }
        fn h(&self) -> Complex64 {
            Complex64::new(0.5, 0.0)
        }
        fn a(&self) -> Complex64 {
            Complex64::new(0.0, 3f64.sqrt())
        }
    }

    #[test]
    fn arithmetic_evaluates() {
        // (u[n+h] - u[n]) * 2/h + v[n]^2 = 10 * 4 + 1
        let e = diff(Field::U, 0, 0) * (c(2.0) * h().recip()) + here(Field::V).pow(2);
        assert_eq!(e.eval(&Fixed).unwrap(), Complex64::new(41.0, 0.0));
        assert_eq!((a() * a()).eval(&Fixed).unwrap().re.round(), -3.0);
        assert_eq!((-(-param(Slot::Beta))).eval(&Fixed).unwrap().re, 2.0);
    }

    #[test]
    fn references_collected() {
        let mut v = Vec::new();
        (pair_sum(Field::P, 1, 0) * here(Field::U)).refs(&mut v);
        assert_eq!(v.len(), 3);
    }
}
