//! Backlund-transformation templates with symbolic parameter slots.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{boussinesq_a, EquationId, Grid, SystemError};
use crate::expalg::{Ctx, HirotaMonomial, HirotaOperator, Scalar, Shift};

/// Free constants of a Backlund transformation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Slot {
    Beta,
    Gamma,
    Lambda,
    Omega,
    Mu,
    /// Constant term of the Boussinesq second equation.
    Eta,
}

impl Slot {
    pub fn name(self) -> &'static str {
        match self {
            Slot::Beta => "beta",
            Slot::Gamma => "gamma",
            Slot::Lambda => "lambda",
            Slot::Omega => "omega",
            Slot::Mu => "mu",
            Slot::Eta => "eta",
        }
    }
}

/// Slots defined for each system.
pub fn bt_slots(id: EquationId) -> &'static [Slot] {
    match id {
        EquationId::KdV | EquationId::KP => &[Slot::Beta, Slot::Gamma],
        EquationId::Boussinesq => &[Slot::Beta, Slot::Lambda, Slot::Eta],
        EquationId::SK => &[Slot::Lambda],
        EquationId::Ito => &[Slot::Lambda, Slot::Omega, Slot::Mu],
    }
}

/// Named parameter values; only the system's slots may be present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BTParams {
    pub id: EquationId,
    values: BTreeMap<Slot, Scalar>,
}

impl BTParams {
    pub fn new(id: EquationId, values: impl IntoIterator<Item = (Slot, Scalar)>) -> Result<BTParams, SystemError> {
        let values: BTreeMap<Slot, Scalar> = values.into_iter().collect();
        let allowed = bt_slots(id);
        for s in values.keys() {
            if !allowed.contains(s) {
                return Err(SystemError::ExtraSlot(*s));
            }
        }
        for s in allowed {
            if !values.contains_key(s) {
                return Err(SystemError::MissingSlot(*s));
            }
        }
        Ok(BTParams { id, values })
    }

    pub fn get(&self, s: Slot) -> Option<&Scalar> {
        self.values.get(&s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Slot, &Scalar)> {
        self.values.iter()
    }
}

impl fmt::Display for BTParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{}={}", k.name(), v)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Unknowns of lifted (symbolic-coefficient) bilinear equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unknown {
    Slot(Slot),
    /// y- and t-components of a gauge exponential.
    ThetaY,
    ThetaT,
    /// Per-step gauge multiplier.
    Nu,
    /// Free coefficient of a partner tau function.
    Coef(u8),
}

/// Polynomial in unknowns with scalar coefficients; keys are sorted
/// products of unknowns (the empty key is the constant term).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    ctx: Ctx,
    terms: BTreeMap<Vec<Unknown>, Scalar>,
}

impl Poly {
    pub fn zero(ctx: Ctx) -> Poly {
        Poly { ctx, terms: BTreeMap::new() }
    }

    pub fn constant(c: Scalar) -> Poly {
        let mut p = Poly::zero(c.ctx());
        p.add_term(Vec::new(), c);
        p
    }

    pub fn unknown(ctx: Ctx, u: Unknown) -> Poly {
        let mut p = Poly::zero(ctx);
        p.add_term(vec![u], ctx.one());
        p
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Unknown>, Scalar> {
        &self.terms
    }

    pub fn add_term(&mut self, mut key: Vec<Unknown>, c: Scalar) {
        key.sort();
        let e = self.terms.entry(key.clone()).or_insert_with(|| self.ctx.zero());
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (k, v) in &o.terms {
            r.add_term(k.clone(), v.clone());
        }
        r
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        let mut r = Poly::zero(self.ctx);
        for (k, v) in &self.terms {
            r.add_term(k.clone(), v * c);
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero(self.ctx);
        for (k1, v1) in &self.terms {
            for (k2, v2) in &o.terms {
                let mut k = k1.clone();
                k.extend(k2.iter().copied());
                r.add_term(k, v1 * v2);
            }
        }
        r
    }

    /// Substitute known values.
    pub fn subst(&self, known: &BTreeMap<Unknown, Scalar>) -> Poly {
        let mut r = Poly::zero(self.ctx);
        for (k, v) in &self.terms {
            let mut c = v.clone();
            let mut rest = Vec::new();
            for u in k {
                match known.get(u) {
                    Some(x) => c = &c * x,
                    None => rest.push(*u),
                }
            }
            r.add_term(rest, c);
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant term, if the polynomial has no unknowns left.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(self.ctx.zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }
}

/// Bilinear monomial with a polynomial coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedMonomial {
    pub mx: u32,
    pub my: u32,
    pub mt: u32,
    pub shift: Shift,
    pub coeff: Poly,
}

/// A bilinear equation whose coefficients may contain unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedOperator {
    pub label: String,
    pub monomials: Vec<LiftedMonomial>,
}

impl LiftedOperator {
    /// Substitute every unknown; fails if any remains.
    pub fn instantiate(&self, ctx: Ctx, known: &BTreeMap<Unknown, Scalar>) -> Result<HirotaOperator, SystemError> {
        let mut monos = Vec::new();
        for m in &self.monomials {
            let c = m.coeff.subst(known).as_constant().ok_or(SystemError::Unresolved(self.label.clone()))?;
            monos.push(HirotaMonomial::with_shift(m.mx, m.my, m.mt, m.shift, c));
        }
        Ok(HirotaOperator::new(ctx, monos)?)
    }

    pub fn on_grid(&self, grid: Grid) -> LiftedOperator {
        match grid {
            Grid::HalfStep => self.clone(),
            Grid::WholeStep => LiftedOperator {
                label: self.label.clone(),
                monomials: self
                    .monomials
                    .iter()
                    .map(|m| LiftedMonomial { shift: m.shift.to_whole_step(), ..m.clone() })
                    .collect(),
            },
        }
    }
}

struct Builder {
    ctx: Ctx,
    monos: Vec<LiftedMonomial>,
}

impl Builder {
    fn new(ctx: Ctx) -> Builder {
        Builder { ctx, monos: Vec::new() }
    }

    /// Add c * D_x^mx D_y^my D_t^mt exp(r (h/2) D_n), optionally times a slot product.
    fn m(mut self, mx: u32, my: u32, mt: u32, r: i32, c: Scalar, slots: &[Slot]) -> Builder {
        let mut p = Poly::zero(self.ctx);
        p.add_term(slots.iter().map(|s| Unknown::Slot(*s)).collect(), c);
        self.monos.push(LiftedMonomial { mx, my, mt, shift: Shift::half(r), coeff: p });
        self
    }

    fn done(self, label: &str) -> LiftedOperator {
        LiftedOperator { label: label.to_string(), monomials: self.monos }
    }
}

/// Backlund transformation of each system with its parameters left symbolic,
/// acting on the pair (f, g). Shifts are half-step symmetric unless the whole
/// grid is requested.
pub fn bt_template(id: EquationId, h: &Scalar, grid: Grid) -> Result<Vec<LiftedOperator>, SystemError> {
    use Slot::*;
    if h.is_zero() {
        return Err(SystemError::ZeroSpacing);
    }
    let x = h.ctx();
    let one = x.one();
    let q = |n: i64, d: i64| x.rat(n, d);
    let ih = h.inv()?;
    let b = || Builder::new(x);
    // exp(-(h/2)D_n)(D_x + 1/h) f.g = beta exp((h/2)D_n) f.g
    let shift_eq = |label: &str| {
        b().m(1, 0, 0, -1, one.clone(), &[])
            .m(0, 0, 0, -1, ih.clone(), &[])
            .m(0, 0, 0, 1, -&one, &[Beta])
            .done(label)
    };
    let ops = match id {
        EquationId::KdV => vec![
            shift_eq("kdv.bt1"),
            b().m(2, 0, 0, 0, one.clone(), &[]).m(0, 0, 0, 0, -&one, &[Gamma]).done("kdv.bt2"),
            b().m(0, 0, 1, 0, one.clone(), &[])
                .m(3, 0, 0, 0, q(-1, 4), &[])
                .m(1, 0, 0, 0, q(-3, 4), &[Gamma])
                .done("kdv.bt3"),
        ],
        EquationId::KP => vec![
            shift_eq("kp.bt1"),
            b().m(0, 1, 0, 0, one.clone(), &[])
                .m(2, 0, 0, 0, -&one, &[])
                .m(0, 0, 0, 0, -&one, &[Gamma])
                .done("kp.bt2"),
            b().m(1, 1, 0, 0, q(3, 1), &[])
                .m(0, 0, 1, 0, q(-4, 1), &[])
                .m(3, 0, 0, 0, one.clone(), &[])
                .m(1, 0, 0, 0, q(-3, 1), &[Gamma])
                .done("kp.bt3"),
        ],
        EquationId::Boussinesq => {
            let a = boussinesq_a(x)?;
            vec![
                b().m(0, 0, 1, 0, one.clone(), &[])
                    .m(2, 0, 0, 0, -&a, &[])
                    .m(0, 0, 0, 0, -&one, &[Lambda])
                    .done("bs.bt1"),
                b().m(1, 0, 1, 0, a.clone(), &[])
                    .m(3, 0, 0, 0, -&one, &[])
                    .m(1, 0, 0, 0, -&a, &[Lambda])
                    .m(1, 0, 0, 0, -&one, &[])
                    .m(0, 0, 0, 0, a.clone(), &[Eta])
                    .done("bs.bt2"),
                shift_eq("bs.bt3"),
            ]
        }
        EquationId::SK => {
            let two_h = &q(2, 1) * &ih;
            let six_h = &q(6, 1) * &ih;
            vec![
                b().m(3, 0, 0, 0, one.clone(), &[]).m(0, 0, 0, 0, -&one, &[Lambda]).done("sk.bt1"),
                b().m(0, 0, 1, 0, q(2, 1), &[])
                    .m(5, 0, 0, 0, q(-3, 1), &[])
                    .m(2, 0, 0, 0, q(-15, 1), &[Lambda])
                    .done("sk.bt2"),
                b().m(1, 0, 0, 1, one.clone(), &[])
                    .m(1, 0, 0, -1, -&one, &[])
                    .m(0, 0, 0, 1, -&two_h, &[])
                    .m(0, 0, 0, -1, -&two_h, &[])
                    .done("sk.bt3"),
                b().m(3, 0, 0, 1, one.clone(), &[])
                    .m(3, 0, 0, -1, -&one, &[])
                    .m(2, 0, 0, 1, -&six_h, &[])
                    .m(2, 0, 0, -1, -&six_h, &[])
                    .m(0, 0, 0, 1, q(2, 1), &[Lambda])
                    .m(0, 0, 0, -1, q(-2, 1), &[Lambda])
                    .done("sk.bt4"),
            ]
        }
        EquationId::Ito => {
            let two_h = &q(2, 1) * &ih;
            vec![
                b().m(1, 0, 0, -1, one.clone(), &[])
                    .m(1, 0, 0, 1, one.clone(), &[Lambda])
                    .m(0, 0, 0, 1, -&two_h, &[Lambda])
                    .m(0, 0, 0, -1, two_h.clone(), &[])
                    .done("ito.bt1"),
                b().m(0, 0, 1, -1, one.clone(), &[])
                    .m(0, 0, 1, 1, -&one, &[Lambda])
                    .m(0, 0, 0, 1, -&one, &[Lambda, Omega])
                    .m(0, 0, 0, -1, one.clone(), &[Omega])
                    .done("ito.bt2"),
                b().m(0, 0, 1, 0, one.clone(), &[]).m(3, 0, 0, 0, one.clone(), &[]).done("ito.bt3"),
                b().m(1, 0, 1, 0, one.clone(), &[]).m(1, 0, 0, 0, -&one, &[Mu]).done("ito.bt4"),
            ]
        }
    };
    Ok(ops.into_iter().map(|o| o.on_grid(grid)).collect())
}
