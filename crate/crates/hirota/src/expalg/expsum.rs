//! Finite sums of exponential terms coeff * mu^s * exp(a_x x + a_y y + a_t t).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::{AlgError, Ctx, Scalar};

/// Continuous variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Var {
    X,
    Y,
    T,
}

/// Linear form a_x x + a_y y + a_t t.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinForm {
    pub x: Scalar,
    pub y: Scalar,
    pub t: Scalar,
}

impl LinForm {
    pub fn new(x: Scalar, y: Scalar, t: Scalar) -> LinForm {
        LinForm { x, y, t }
    }

    pub fn zero(ctx: Ctx) -> LinForm {
        LinForm::new(ctx.zero(), ctx.zero(), ctx.zero())
    }

    pub fn get(&self, v: Var) -> &Scalar {
        match v {
            Var::X => &self.x,
            Var::Y => &self.y,
            Var::T => &self.t,
        }
    }

    pub fn add(&self, o: &LinForm) -> LinForm {
        LinForm::new(&self.x + &o.x, &self.y + &o.y, &self.t + &o.t)
    }

    pub fn sub(&self, o: &LinForm) -> LinForm {
        LinForm::new(&self.x - &o.x, &self.y - &o.y, &self.t - &o.t)
    }

    fn ctx_ok(&self, ctx: Ctx) -> Result<(), AlgError> {
        for c in [&self.x, &self.y, &self.t] {
            if c.ctx() != ctx {
                return Err(AlgError::ContextMismatch(ctx, c.ctx()));
            }
        }
        Ok(())
    }
}

/// One exponential term. `mu` is the multiplier per grid step of the lattice index s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpTerm {
    pub coeff: Scalar,
    pub phase: LinForm,
    pub mu: Scalar,
}

type Key = (LinForm, Scalar);

/// Canonical exponential sum: terms sorted by (a_x, a_y, a_t, mu), keys unique,
/// no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpSum {
    ctx: Ctx,
    terms: Vec<ExpTerm>,
}

/// Evaluation point: continuous coordinates and the integer lattice index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub s: i64,
}

impl Point {
    pub fn new(x: f64, y: f64, t: f64, s: i64) -> Point {
        Point { x, y, t, s }
    }
}

impl ExpSum {
    pub fn zero(ctx: Ctx) -> ExpSum {
        ExpSum { ctx, terms: Vec::new() }
    }

    /// The constant function 1.
    pub fn one(ctx: Ctx) -> ExpSum {
        ExpSum::constant(ctx.one())
    }

    pub fn constant(c: Scalar) -> ExpSum {
        let ctx = c.ctx();
        ExpSum::make_term(c, LinForm::zero(ctx), ctx.one()).expect("unit multiplier")
    }

    /// Single term coeff * mu^s * exp(phase); a zero coefficient gives the zero sum.
    pub fn make_term(coeff: Scalar, phase: LinForm, mu: Scalar) -> Result<ExpSum, AlgError> {
        let ctx = coeff.ctx();
        phase.ctx_ok(ctx)?;
        if mu.ctx() != ctx {
            return Err(AlgError::ContextMismatch(ctx, mu.ctx()));
        }
        if mu.is_zero() {
            return Err(AlgError::ZeroMultiplier);
        }
        if coeff.is_zero() {
            return Ok(ExpSum::zero(ctx));
        }
        Ok(ExpSum { ctx, terms: vec![ExpTerm { coeff, phase, mu }] })
    }

    /// exp(a x + b y + c t) with unit coefficient and multiplier.
    pub fn exp(phase: LinForm) -> ExpSum {
        let ctx = phase.x.ctx();
        ExpSum::make_term(ctx.one(), phase, ctx.one()).expect("valid term")
    }

    fn from_map(ctx: Ctx, map: BTreeMap<Key, Scalar>) -> ExpSum {
        let terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((phase, mu), coeff)| ExpTerm { coeff, phase, mu })
            .collect();
        ExpSum { ctx, terms }
    }

    /// Canonicalize an arbitrary list of terms (all in `ctx`).
    pub fn from_terms(ctx: Ctx, terms: impl IntoIterator<Item = ExpTerm>) -> Result<ExpSum, AlgError> {
        let mut map: BTreeMap<Key, Scalar> = BTreeMap::new();
        for t in terms {
            if t.coeff.ctx() != ctx || t.mu.ctx() != ctx {
                return Err(AlgError::ContextMismatch(ctx, t.coeff.ctx()));
            }
            t.phase.ctx_ok(ctx)?;
            if t.mu.is_zero() {
                return Err(AlgError::ZeroMultiplier);
            }
            accumulate(&mut map, (t.phase, t.mu), t.coeff);
        }
        Ok(ExpSum::from_map(ctx, map))
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_ctx(&self, o: &ExpSum) -> Result<(), AlgError> {
        if self.ctx == o.ctx {
            Ok(())
        } else {
            Err(AlgError::ContextMismatch(self.ctx, o.ctx))
        }
    }

    pub fn add(&self, o: &ExpSum) -> Result<ExpSum, AlgError> {
        self.same_ctx(o)?;
        let mut map = self.to_map();
        for t in &o.terms {
            accumulate(&mut map, (t.phase.clone(), t.mu.clone()), t.coeff.clone());
        }
        Ok(ExpSum::from_map(self.ctx, map))
    }

    pub fn sub(&self, o: &ExpSum) -> Result<ExpSum, AlgError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> ExpSum {
        ExpSum {
            ctx: self.ctx,
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm { coeff: -&t.coeff, ..t.clone() })
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Result<ExpSum, AlgError> {
        if c.ctx() != self.ctx {
            return Err(AlgError::ContextMismatch(self.ctx, c.ctx()));
        }
        if c.is_zero() {
            return Ok(ExpSum::zero(self.ctx));
        }
        Ok(ExpSum {
            ctx: self.ctx,
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm { coeff: &t.coeff * c, ..t.clone() })
                .collect(),
        })
    }

    pub fn mul(&self, o: &ExpSum) -> Result<ExpSum, AlgError> {
        self.same_ctx(o)?;
        let mut map = BTreeMap::new();
        for a in &self.terms {
            for b in &o.terms {
                accumulate(&mut map, (a.phase.add(&b.phase), &a.mu * &b.mu), &a.coeff * &b.coeff);
            }
        }
        Ok(ExpSum::from_map(self.ctx, map))
    }

    /// Exact zero test; the float backend is rejected (use `max_abs_coeff`).
    pub fn is_zero(&self) -> Result<bool, AlgError> {
        if !self.ctx.is_exact() {
            return Err(AlgError::FloatBackend);
        }
        Ok(self.terms.is_empty())
    }

    /// Largest coefficient magnitude (0 for the zero sum).
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    /// Same sum on the float backend.
    pub fn to_float(&self) -> ExpSum {
        let terms = self.terms.iter().map(|t| ExpTerm {
            coeff: t.coeff.to_float(),
            phase: LinForm::new(t.phase.x.to_float(), t.phase.y.to_float(), t.phase.t.to_float()),
            mu: t.mu.to_float(),
        });
        ExpSum::from_terms(Ctx::Float, terms).expect("float conversion")
    }

    /// Multiply every term by exp(theta) * nu^s (a gauge factor).
    pub fn gauge(&self, theta: &LinForm, nu: &Scalar) -> Result<ExpSum, AlgError> {
        let g = ExpSum::make_term(self.ctx.one(), theta.clone(), nu.clone())?;
        self.mul(&g)
    }

    /// Coefficient stored at an exact key, zero if absent.
    pub fn coeff_at(&self, phase: &LinForm, mu: &Scalar) -> Scalar {
        self.terms
            .iter()
            .find(|t| &t.phase == phase && &t.mu == mu)
            .map(|t| t.coeff.clone())
            .unwrap_or_else(|| self.ctx.zero())
    }

    fn to_map(&self) -> BTreeMap<Key, Scalar> {
        self.terms
            .iter()
            .map(|t| ((t.phase.clone(), t.mu.clone()), t.coeff.clone()))
            .collect()
    }

    /// Per-term natural-log magnitude and complex phase at a point:
    /// term = exp(re) * exp(i im) * (unit complex of coeff and mu^s).
    pub(crate) fn term_logs(&self, p: &Point) -> Vec<Complex64> {
        self.terms
            .iter()
            .map(|t| {
                let c = t.coeff.to_complex();
                let mu = t.mu.to_complex();
                let e = t.phase.x.to_complex() * p.x + t.phase.y.to_complex() * p.y + t.phase.t.to_complex() * p.t;
                c.ln() + mu.ln() * (p.s as f64) + e
            })
            .collect()
    }
}

pub(crate) fn accumulate(map: &mut BTreeMap<Key, Scalar>, key: Key, c: Scalar) {
    match map.get_mut(&key) {
        Some(v) => *v = &*v + &c,
        None => {
            map.insert(key, c);
        }
    }
}

/// Term-wise derivative in one continuous variable.
pub fn partial(var: Var, f: &ExpSum) -> ExpSum {
    let terms = f.terms.iter().map(|t| ExpTerm {
        coeff: &t.coeff * t.phase.get(var),
        ..t.clone()
    });
    ExpSum::from_terms(f.ctx, terms).expect("same context")
}

/// Evaluate in double precision, summing in canonical order.
pub fn eval_at(f: &ExpSum, p: &Point) -> Result<Complex64, AlgError> {
    let mut acc = Complex64::new(0.0, 0.0);
    for l in f.term_logs(p) {
        if l.re > 700.0 {
            return Err(AlgError::Overflow(format!("{p:?}")));
        }
        acc += l.exp();
    }
    if !acc.re.is_finite() || !acc.im.is_finite() {
        return Err(AlgError::Overflow(format!("{p:?}")));
    }
    Ok(acc)
}

impl fmt::Display for ExpSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", t.coeff)?;
            if !t.mu.is_one() {
                write!(f, "*({})^s", t.mu)?;
            }
            let ph = &t.phase;
            if !(ph.x.is_zero() && ph.y.is_zero() && ph.t.is_zero()) {
                write!(f, "*exp(({})x+({})y+({})t)", ph.x, ph.y, ph.t)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> Ctx {
        Ctx::default()
    }

    fn ex(a: i64) -> ExpSum {
        ExpSum::exp(LinForm::new(c().int(a), c().zero(), c().zero()))
    }

    #[test]
    fn make_term_cases() {
        let f = ex(2);
        assert_eq!(f.len(), 1);
        let z = ExpSum::make_term(c().zero(), LinForm::zero(c()), c().one()).unwrap();
        assert!(z.is_zero().unwrap());
        let g = ExpSum::make_term(
            c().int(3),
            LinForm::new(c().zero(), c().zero(), c().int(-1)),
            c().int(2),
        )
        .unwrap();
        let v = eval_at(&g, &Point::new(0.0, 0.0, 0.0, 3)).unwrap();
        assert!((v.re - 24.0).abs() < 1e-12);
        assert_eq!(
            ExpSum::make_term(c().one(), LinForm::zero(c()), c().zero()),
            Err(AlgError::ZeroMultiplier)
        );
    }

    #[test]
    fn add_merges_and_cancels() {
        let two = ex(1).add(&ex(1)).unwrap();
        assert_eq!(two.terms()[0].coeff, c().int(2));
        assert!(ex(1).sub(&ex(1)).unwrap().is_zero().unwrap());
        assert_eq!(ex(1).add(&ex(2)).unwrap().len(), 2);
    }

    #[test]
    fn mul_adds_phases_and_multiplies_mu() {
        assert_eq!(ex(1).mul(&ex(2)).unwrap(), ex(3));
        let a = ExpSum::make_term(c().one(), LinForm::zero(c()), c().int(2)).unwrap();
        let b = ExpSum::make_term(c().one(), LinForm::zero(c()), c().int(3)).unwrap();
        assert_eq!(a.mul(&b).unwrap().terms()[0].mu, c().int(6));
        assert!(ex(1).mul(&ExpSum::zero(c())).unwrap().is_zero().unwrap());
    }

    #[test]
    fn partial_derivatives() {
        assert_eq!(partial(Var::X, &ex(2)), ex(2).scale(&c().int(2)).unwrap());
        assert!(partial(Var::T, &ExpSum::one(c())).is_zero().unwrap());
        let y3 = ExpSum::exp(LinForm::new(c().zero(), c().int(3), c().zero()));
        let d = partial(Var::Y, &y3.add(&ex(1)).unwrap());
        assert_eq!(d, y3.scale(&c().int(3)).unwrap());
    }

    #[test]
    fn eval_cases() {
        assert_eq!(eval_at(&ExpSum::zero(c()), &Point::new(1.0, 2.0, 3.0, 4)).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(eval_at(&ex(1), &Point::new(0.0, 0.0, 0.0, 0)).unwrap(), Complex64::new(1.0, 0.0));
        assert!(eval_at(&ex(1), &Point::new(1000.0, 0.0, 0.0, 0)).is_err());
    }

    #[test]
    fn mixed_backends_rejected() {
        assert!(ex(1).add(&ex(1).to_float()).is_err());
        assert!(ex(1).to_float().is_zero().is_err());
    }
}
