//! Hirota bilinear operators with lattice shifts.

use std::collections::BTreeMap;
use std::fmt;

use super::expsum::accumulate;
use super::{AlgError, Ctx, ExpSum, Scalar};

/// Lattice shift of a bilinear monomial: the first argument is evaluated at
/// s + f and the second at s + g. The symmetric half-step shift
/// exp(r (h/2) D_n) is `Shift::half(r)` = (r, -r) on the half-step grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shift {
    pub f: i32,
    pub g: i32,
}

impl Shift {
    pub const NONE: Shift = Shift { f: 0, g: 0 };

    pub fn half(r: i32) -> Shift {
        Shift { f: r, g: -r }
    }

    pub fn new(f: i32, g: i32) -> Shift {
        Shift { f, g }
    }

    /// Re-anchor a half-step shift onto the whole-step grid. Odd r moves the
    /// pair to sites (n + h, n) or (n, n + h); even r is halved.
    pub fn to_whole_step(self) -> Shift {
        assert_eq!(self.f, -self.g, "only symmetric shifts re-anchor");
        let r = self.f;
        if r % 2 != 0 {
            Shift::new((r + 1).div_euclid(2), (1 - r).div_euclid(2))
        } else {
            Shift::new(r / 2, -r / 2)
        }
    }
}

/// c * D_x^mx D_y^my D_t^mt with a lattice shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HirotaMonomial {
    pub mx: u32,
    pub my: u32,
    pub mt: u32,
    pub shift: Shift,
    pub coeff: Scalar,
}

impl HirotaMonomial {
    /// Monomial with a symmetric half-step shift r.
    pub fn new(mx: u32, my: u32, mt: u32, r: i32, coeff: Scalar) -> HirotaMonomial {
        HirotaMonomial { mx, my, mt, shift: Shift::half(r), coeff }
    }

    pub fn with_shift(mx: u32, my: u32, mt: u32, shift: Shift, coeff: Scalar) -> HirotaMonomial {
        HirotaMonomial { mx, my, mt, shift, coeff }
    }

    fn key(&self) -> (u32, u32, u32, Shift) {
        (self.mx, self.my, self.mt, self.shift)
    }
}

/// A sum of monomials, merged by (powers, shift) and sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HirotaOperator {
    ctx: Ctx,
    monomials: Vec<HirotaMonomial>,
}

impl HirotaOperator {
    pub fn new(ctx: Ctx, monos: impl IntoIterator<Item = HirotaMonomial>) -> Result<HirotaOperator, AlgError> {
        let mut map: BTreeMap<(u32, u32, u32, Shift), Scalar> = BTreeMap::new();
        for m in monos {
            if m.coeff.ctx() != ctx {
                return Err(AlgError::ContextMismatch(ctx, m.coeff.ctx()));
            }
            let k = m.key();
            match map.get_mut(&k) {
                Some(v) => *v = &*v + &m.coeff,
                None => {
                    map.insert(k, m.coeff);
                }
            }
        }
        let monomials = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((mx, my, mt, shift), coeff)| HirotaMonomial { mx, my, mt, shift, coeff })
            .collect();
        Ok(HirotaOperator { ctx, monomials })
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    pub fn monomials(&self) -> &[HirotaMonomial] {
        &self.monomials
    }

    /// True when every monomial has zero shift.
    pub fn is_unshifted(&self) -> bool {
        self.monomials.iter().all(|m| m.shift == Shift::NONE)
    }

    /// Same operator with every shift re-anchored to the whole-step grid.
    pub fn to_whole_step(&self) -> HirotaOperator {
        let monos = self.monomials.iter().map(|m| HirotaMonomial { shift: m.shift.to_whole_step(), ..m.clone() });
        HirotaOperator::new(self.ctx, monos).expect("same context")
    }

    pub fn to_float(&self) -> HirotaOperator {
        let monos = self.monomials.iter().map(|m| HirotaMonomial { coeff: m.coeff.to_float(), ..m.clone() });
        HirotaOperator::new(Ctx::Float, monos).expect("float conversion")
    }

    /// Symbol of the operator on a pair of terms with phase difference
    /// (dx, dy, dt) and multipliers (mu_f, mu_g).
    pub fn symbol(&self, dx: &Scalar, dy: &Scalar, dt: &Scalar, mu_f: &Scalar, mu_g: &Scalar) -> Result<Scalar, AlgError> {
        let mut tot = self.ctx.zero();
        for m in &self.monomials {
            let v = &m.coeff
                * dx.pow(m.mx as i32)?
                * dy.pow(m.my as i32)?
                * dt.pow(m.mt as i32)?
                * mu_f.pow(m.shift.f)?
                * mu_g.pow(m.shift.g)?;
            tot = tot + v;
        }
        Ok(tot)
    }
}

/// Bilinear action of `op` on the pair (f, g).
pub fn hirota_apply(op: &HirotaOperator, f: &ExpSum, g: &ExpSum) -> Result<ExpSum, AlgError> {
    if f.ctx() != op.ctx() {
        return Err(AlgError::ContextMismatch(op.ctx(), f.ctx()));
    }
    if g.ctx() != op.ctx() {
        return Err(AlgError::ContextMismatch(op.ctx(), g.ctx()));
    }
    let mut map = BTreeMap::new();
    for a in f.terms() {
        for b in g.terms() {
            let d = a.phase.sub(&b.phase);
            let s = op.symbol(&d.x, &d.y, &d.t, &a.mu, &b.mu)?;
            if s.is_zero() {
                continue;
            }
            accumulate(&mut map, (a.phase.add(&b.phase), &a.mu * &b.mu), &a.coeff * &b.coeff * s);
        }
    }
    ExpSum::from_terms(
        op.ctx(),
        map.into_iter().map(|((phase, mu), coeff)| super::ExpTerm { coeff, phase, mu }),
    )
}

impl fmt::Display for HirotaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coeff)?;
        for (name, p) in [("Dx", self.mx), ("Dy", self.my), ("Dt", self.mt)] {
            match p {
                0 => {}
                1 => write!(f, "*{name}")?,
                _ => write!(f, "*{name}^{p}")?,
            }
        }
        if self.shift != Shift::NONE {
            write!(f, "*S[{},{}]", self.shift.f, self.shift.g)?;
        }
        Ok(())
    }
}

impl fmt::Display for HirotaOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.monomials.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expalg::LinForm;

    fn c() -> Ctx {
        Ctx::default()
    }

    fn ex(a: i64, mu: i64) -> ExpSum {
        ExpSum::make_term(c().one(), LinForm::new(c().int(a), c().zero(), c().zero()), c().int(mu)).unwrap()
    }

    fn dx(m: u32) -> HirotaOperator {
        HirotaOperator::new(c(), [HirotaMonomial::new(m, 0, 0, 0, c().one())]).unwrap()
    }

    #[test]
    fn dx_on_two_exponentials() {
        // (2 - 1)^1 = 1
        assert_eq!(hirota_apply(&dx(1), &ex(2, 1), &ex(1, 1)).unwrap(), ex(3, 1));
    }

    #[test]
    fn odd_order_self_pair_vanishes() {
        let f = ex(5, 3);
        assert!(hirota_apply(&dx(3), &f, &f).unwrap().is_zero().unwrap());
    }

    #[test]
    fn shift_factor() {
        let op = HirotaOperator::new(c(), [HirotaMonomial::new(0, 0, 0, 1, c().one())]).unwrap();
        let r = hirota_apply(&op, &ex(0, 2), &ex(0, 3)).unwrap();
        assert_eq!(r.terms()[0].coeff, c().rat(2, 3));
    }

    #[test]
    fn merging_and_pruning() {
        let op = HirotaOperator::new(
            c(),
            [HirotaMonomial::new(1, 0, 0, 0, c().one()), HirotaMonomial::new(1, 0, 0, 0, c().int(-1))],
        )
        .unwrap();
        assert!(op.monomials().is_empty());
    }

    #[test]
    fn whole_step_reanchoring() {
        assert_eq!(Shift::half(1).to_whole_step(), Shift::new(1, 0));
        assert_eq!(Shift::half(-1).to_whole_step(), Shift::new(0, 1));
        assert_eq!(Shift::half(2).to_whole_step(), Shift::new(1, -1));
        assert_eq!(Shift::half(-3).to_whole_step(), Shift::new(-1, 2));
    }
}
