//! Backlund-transformation parameters: exact linear solves over the residual
//! coefficients of the lifted templates, and construction of partner pairs.

use std::collections::{BTreeMap, BTreeSet};

use super::{bilinear_residual, record, Report, ReportKind, VerifyError, FLOAT_TOL};
use crate::expalg::{AlgError, Ctx, ExpSum, LinForm, Scalar};
use crate::soliton::{SolitonParam, TauMode};
use crate::systems::{
    boussinesq_a, bt_slots, bt_system, bt_template, get_system, BTParams, EquationId, Grid, LiftedMonomial,
    LiftedOperator, Poly, Unknown,
};

/// A soliton pair related by a Backlund transformation.
#[derive(Clone, Debug)]
pub struct BtPair {
    pub f: ExpSum,
    pub g: ExpSum,
    pub params: BTParams,
    /// x-component of the gauge exponential applied to the partner.
    pub theta_x: Scalar,
    /// Residual of the transformation at `params`.
    pub report: Report,
}

/// Residual coefficients of `op` on f and a sum of partner pieces, each piece
/// carrying a polynomial multiplier. One polynomial per exponential key.
fn apply_parts(op: &LiftedOperator, f: &ExpSum, parts: &[(&ExpSum, Poly)]) -> Result<Vec<Poly>, VerifyError> {
    let ctx = f.ctx();
    let mut out: BTreeMap<(LinForm, Scalar), Poly> = BTreeMap::new();
    for (g, mult) in parts {
        if g.ctx() != ctx {
            return Err(AlgError::ContextMismatch(ctx, g.ctx()).into());
        }
        for tf in f.terms() {
            for tg in g.terms() {
                let d = tf.phase.sub(&tg.phase);
                let key = (tf.phase.add(&tg.phase), &tf.mu * &tg.mu);
                let mut acc = Poly::zero(ctx);
                for m in &op.monomials {
                    let fac = &tf.coeff
                        * &tg.coeff
                        * d.x.pow(m.mx as i32)?
                        * d.y.pow(m.my as i32)?
                        * d.t.pow(m.mt as i32)?
                        * tf.mu.pow(m.shift.f)?
                        * tg.mu.pow(m.shift.g)?;
                    if !fac.is_zero() {
                        acc = acc.add(&m.coeff.scale(&fac));
                    }
                }
                let e = out.entry(key).or_insert_with(|| Poly::zero(ctx));
                *e = e.add(&acc.mul(mult));
            }
        }
    }
    Ok(out.into_values().filter(|p| !p.is_zero()).collect())
}

/// Residual coefficients of a lifted operator on (f, g), one polynomial in
/// the unknowns per exponential key.
pub fn lifted_apply(op: &LiftedOperator, f: &ExpSum, g: &ExpSum) -> Result<Vec<Poly>, VerifyError> {
    apply_parts(op, f, &[(g, Poly::constant(f.ctx().one()))])
}

/// Binomial coefficient as a scalar.
fn binom(ctx: Ctx, n: u32, k: u32) -> Scalar {
    let mut c = 1i64;
    for i in 0..k {
        c = c * (n - i) as i64 / (i + 1) as i64;
    }
    ctx.int(c)
}

/// Rewrite an operator acting on (f, e^{theta} nu^s G) as one acting on
/// (f, G). The y and t components of theta and the multiplier nu are unknowns.
/// Needs whole-step shifts, where the partner is shifted by at most one site.
fn gauge_lift(op: &LiftedOperator, theta_x: &Scalar) -> Result<LiftedOperator, VerifyError> {
    let ctx = theta_x.ctx();
    // (D - theta)^m = sum_j C(m, j) D^j (-theta)^(m - j)
    let powers = |m: u32, theta: &Poly| -> Vec<Poly> {
        let neg = theta.scale(&-ctx.one());
        let mut p = vec![Poly::constant(ctx.one())];
        for _ in 0..m {
            let last = p.last().unwrap().mul(&neg);
            p.push(last);
        }
        (0..=m).map(|j| p[(m - j) as usize].scale(&binom(ctx, m, j))).collect()
    };
    let tx = Poly::constant(theta_x.clone());
    let ty = Poly::unknown(ctx, Unknown::ThetaY);
    let tt = Poly::unknown(ctx, Unknown::ThetaT);
    let mut monomials = Vec::new();
    for m in &op.monomials {
        if !(0..=1).contains(&m.shift.g) {
            return Err(VerifyError::Unsupported(format!("{}: gauge needs whole-step shifts", op.label)));
        }
        let nu = if m.shift.g == 1 { Poly::unknown(ctx, Unknown::Nu) } else { Poly::constant(ctx.one()) };
        let base = m.coeff.mul(&nu);
        let (px, py, pt) = (powers(m.mx, &tx), powers(m.my, &ty), powers(m.mt, &tt));
        for (jx, cx) in px.iter().enumerate() {
            for (jy, cy) in py.iter().enumerate() {
                for (jt, ct) in pt.iter().enumerate() {
                    let coeff = base.mul(cx).mul(cy).mul(ct);
                    if !coeff.is_zero() {
                        monomials.push(LiftedMonomial {
                            mx: jx as u32,
                            my: jy as u32,
                            mt: jt as u32,
                            shift: m.shift,
                            coeff,
                        });
                    }
                }
            }
        }
    }
    Ok(LiftedOperator { label: op.label.clone(), monomials })
}

/// Outcome of the staged solve.
struct Staged {
    known: BTreeMap<Unknown, Scalar>,
    consistent: bool,
    /// Unknowns fixed by convention rather than by the equations.
    family: Vec<Unknown>,
}

/// Row-reduce rows of (coefficients | rhs). Returns the pivot columns, or
/// None if some row reduces to 0 = nonzero.
fn rref(m: &mut Vec<Vec<Scalar>>, ncols: usize) -> Result<Option<Vec<usize>>, VerifyError> {
    m.retain(|r| r.iter().any(|x| !x.is_zero()));
    let mut piv = Vec::new();
    let mut ri = 0;
    for cj in 0..ncols {
        let Some(p) = (ri..m.len()).find(|&i| !m[i][cj].is_zero()) else { continue };
        m.swap(ri, p);
        let iv = m[ri][cj].inv()?;
        m[ri] = m[ri].iter().map(|x| x * &iv).collect();
        for i in 0..m.len() {
            if i != ri && !m[i][cj].is_zero() {
                let fct = m[i][cj].clone();
                let pr = m[ri].clone();
                m[i] = m[i].iter().zip(&pr).map(|(a, b)| a - &(&fct * b)).collect();
            }
        }
        piv.push(cj);
        ri += 1;
    }
    if m[ri..].iter().any(|r| !r[ncols].is_zero()) {
        return Ok(None);
    }
    Ok(Some(piv))
}

/// Solve polynomial rows that are linear in each stage: every product of
/// unknowns is treated as its own column, and only values that the rows pin
/// down uniquely are accepted. When nothing is pinned, the gauge multiplier
/// is set to 1, else the first free single unknown to 0, and the loop repeats.
fn solve_staged(rows: &[Poly], ctx: Ctx) -> Result<Staged, VerifyError> {
    let mut known = BTreeMap::new();
    let mut family = Vec::new();
    for _ in 0..16 {
        let rr: Vec<Poly> = rows.iter().map(|r| r.subst(&known)).collect();
        let cols: Vec<Vec<Unknown>> = rr
            .iter()
            .flat_map(|r| r.terms().keys().filter(|k| !k.is_empty()).cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if cols.is_empty() {
            let consistent = rr.iter().all(|r| r.is_zero());
            return Ok(Staged { known, consistent, family });
        }
        let n = cols.len();
        let mut m: Vec<Vec<Scalar>> = rr
            .iter()
            .map(|r| {
                let mut row: Vec<Scalar> =
                    cols.iter().map(|c| r.terms().get(c).cloned().unwrap_or_else(|| ctx.zero())).collect();
                row.push(-r.terms().get(&Vec::new()).cloned().unwrap_or_else(|| ctx.zero()));
                row
            })
            .collect();
        let Some(piv) = rref(&mut m, n)? else {
            return Ok(Staged { known, consistent: false, family });
        };
        let free: Vec<usize> = (0..n).filter(|j| !piv.contains(j)).collect();
        let mut new = BTreeMap::new();
        for (i, &cj) in piv.iter().enumerate() {
            if cols[cj].len() == 1 && free.iter().all(|&j| m[i][j].is_zero()) {
                new.insert(cols[cj][0], m[i][n].clone());
            }
        }
        if new.is_empty() {
            let single = |u: &Unknown| cols.iter().any(|c| c.len() == 1 && c[0] == *u);
            let nu_open = cols.iter().any(|c| c.contains(&Unknown::Nu));
            let pick = if nu_open {
                Some((Unknown::Nu, ctx.one()))
            } else {
                free.iter().map(|&j| &cols[j]).find(|c| c.len() == 1).map(|c| (c[0], ctx.zero()))
            };
            match pick {
                Some((u, v)) if u == Unknown::Nu || single(&u) => {
                    family.push(u);
                    new.insert(u, v);
                }
                _ => return Ok(Staged { known, consistent: false, family }),
            }
        }
        known.extend(new);
    }
    Ok(Staged { known, consistent: false, family })
}

fn require_exact(ctx: Ctx) -> Result<(), VerifyError> {
    if ctx.is_exact() {
        Ok(())
    } else {
        Err(VerifyError::Unsupported("transformation parameters are solved on the exact backend".into()))
    }
}

/// Find the transformation parameters relating f to g. Slots left free by the
/// equations get a canonical value (0), and are listed in the report params
/// under "family". If no parameters make the residual vanish, the report
/// carries the residual at the best partial solution and pass = false.
pub fn solve_bt_params(
    id: EquationId,
    f: &ExpSum,
    g: &ExpSum,
    h: &Scalar,
    grid: Grid,
) -> Result<(BTParams, Report), VerifyError> {
    let ctx = f.ctx();
    require_exact(ctx)?;
    let ops = bt_template(id, h, grid)?;
    let mut rows = Vec::new();
    for op in &ops {
        rows.extend(lifted_apply(op, f, g)?);
    }
    let st = solve_staged(&rows, ctx)?;
    let params = BTParams::new(
        id,
        bt_slots(id).iter().map(|s| (*s, st.known.get(&Unknown::Slot(*s)).cloned().unwrap_or_else(|| ctx.zero()))),
    )?;
    let mut report = Report::new(ReportKind::Bt, Some(id), FLOAT_TOL);
    let fs = f.max_abs_coeff() * g.max_abs_coeff();
    for eq in bt_system(id, &params, h, grid)? {
        let res = crate::expalg::hirota_apply(&eq.operator, f, g)?;
        record(&mut report, &eq.label, &res, fs)?;
    }
    report.pass &= st.consistent;
    for (s, v) in params.iter() {
        report.params.insert(s.name().to_string(), v.to_string());
    }
    // slots fixed by convention, or absent from every residual coefficient
    let names: Vec<&str> = bt_slots(id)
        .iter()
        .filter(|s| st.family.contains(&Unknown::Slot(**s)) || !st.known.contains_key(&Unknown::Slot(**s)))
        .map(|s| s.name())
        .collect();
    if !names.is_empty() {
        report.params.insert("family".into(), names.join(","));
    }
    report.grid = format!("{grid:?} exponential coefficients");
    Ok((params, report))
}

/// Gauge candidates for the x-component of theta, from the added soliton.
fn theta_candidates(id: EquationId, s: &SolitonParam) -> Result<Vec<Scalar>, VerifyError> {
    let ctx = s.k.ctx();
    let k = &s.k;
    let two = ctx.int(2);
    let mut out = vec![ctx.zero(), -(k.checked_div(&two)?), -k];
    if !k.is_zero() {
        let l = s.l.clone().unwrap_or_else(|| ctx.zero());
        out.push(-((&l + &(k * k)).checked_div(&(&two * k))?));
        if id == EquationId::Boussinesq {
            let a = boussinesq_a(ctx)?;
            out.push(-((&s.omega + &(&a * &(k * k))).checked_div(&(&(&two * &a) * k))?));
        }
    }
    if ctx == Ctx::Exact(-3) {
        let w3 = &ctx.rat(-1, 2) + &(&ctx.rat(1, 2) * &ctx.rho());
        out.push(k.checked_div(&(&w3 - &ctx.one()))?);
        out.push(k.checked_div(&(&(&w3 * &w3) - &ctx.one()))?);
    }
    let mut seen = BTreeSet::new();
    out.retain(|t| seen.insert(t.clone()));
    Ok(out)
}

fn one_soliton(p: &SolitonParam) -> Result<ExpSum, VerifyError> {
    let t = p.term(TauMode::Semidiscrete(Grid::WholeStep))?;
    Ok(ExpSum::from_terms(p.k.ctx(), [t])?)
}

/// Build f (vacuum when `first` is None, else the 1-soliton of `first`) and
/// a partner g that adds the soliton `added`, on the whole-step grid. The
/// partner carries a gauge exponential found by searching theta_x over
/// candidates derived from `added`; its y/t components and the per-site
/// multiplier are solved jointly with the transformation parameters.
pub fn build_pair(
    id: EquationId,
    h: &Scalar,
    first: Option<&SolitonParam>,
    added: &SolitonParam,
) -> Result<BtPair, VerifyError> {
    let ctx = h.ctx();
    require_exact(ctx)?;
    let grid = Grid::WholeStep;
    let one = ExpSum::one(ctx);
    let e2 = one_soliton(added)?;
    let base = bt_template(id, h, grid)?;
    let unit = || Poly::constant(ctx.one());
    for theta in theta_candidates(id, added)? {
        let ops = base.iter().map(|op| gauge_lift(op, &theta)).collect::<Result<Vec<_>, _>>()?;
        let g1 = one.add(&e2)?;
        let mut rows = Vec::new();
        for op in &ops {
            rows.extend(lifted_apply(op, &one, &g1)?);
        }
        let st = solve_staged(&rows, ctx)?;
        if !st.consistent {
            continue;
        }
        let (f, big_g) = match first {
            None => (one.clone(), g1),
            Some(p1) => {
                let e1 = one_soliton(p1)?;
                let e12 = e1.mul(&e2)?;
                let f = one.add(&e1)?;
                let c1 = Poly::unknown(ctx, Unknown::Coef(1));
                let c12 = Poly::unknown(ctx, Unknown::Coef(12));
                let parts = [(&one, unit()), (&e1, c1), (&e2, unit()), (&e12, c12)];
                let mut rows = Vec::new();
                for op in &ops {
                    rows.extend(apply_parts(op, &f, &parts)?.into_iter().map(|r| r.subst(&st.known)));
                }
                let st2 = solve_staged(&rows, ctx)?;
                if !st2.consistent || !st2.family.is_empty() {
                    continue;
                }
                let (a1, a12) = (&st2.known[&Unknown::Coef(1)], &st2.known[&Unknown::Coef(12)]);
                let g = one.add(&e1.scale(a1)?)?.add(&e2)?.add(&e12.scale(a12)?)?;
                (f, g)
            }
        };
        let get = |u| st.known.get(&u).cloned();
        let gauge = LinForm::new(theta.clone(), get(Unknown::ThetaY).unwrap_or_else(|| ctx.zero()), get(Unknown::ThetaT).unwrap_or_else(|| ctx.zero()));
        let g = big_g.gauge(&gauge, &get(Unknown::Nu).unwrap_or_else(|| ctx.one()))?;
        let (params, report) = solve_bt_params(id, &f, &g, h, grid)?;
        if !report.pass {
            continue;
        }
        return Ok(BtPair { f, g, params, theta_x: theta, report });
    }
    Err(VerifyError::Unsupported(format!("no gauge candidate yields a {id} transformation pair")))
}

/// Check that the partner of a pair solves the lattice equations itself.
pub fn partner_report(id: EquationId, pair: &BtPair, h: &Scalar) -> Result<Report, VerifyError> {
    let sys = get_system(id, h)?;
    let mut r = bilinear_residual(&sys.semidiscrete_on(Grid::WholeStep), &pair.g, None)?;
    r.system = Some(id);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Slot;

    fn x() -> Ctx {
        Ctx::default()
    }

    #[test]
    fn vacuum_kdv_parameters() {
        let one = ExpSum::one(x());
        let h = x().rat(1, 2);
        let (p, r) = solve_bt_params(EquationId::KdV, &one, &one, &h, Grid::WholeStep).unwrap();
        assert_eq!(p.get(Slot::Beta), Some(&x().int(2)));
        assert_eq!(p.get(Slot::Gamma), Some(&x().zero()));
        assert!(r.pass);
    }

    #[test]
    fn vacuum_ito_family_is_canonical() {
        let one = ExpSum::one(x());
        let (p, r) = solve_bt_params(EquationId::Ito, &one, &one, &x().one(), Grid::WholeStep).unwrap();
        assert_eq!(p.get(Slot::Lambda), Some(&x().one()));
        assert_eq!(p.get(Slot::Omega), Some(&x().zero()));
        assert!(r.pass);
        assert!(r.params["family"].contains("omega"));
    }

    #[test]
    fn unrelated_pair_fails() {
        let one = ExpSum::one(x());
        let g = one.add(&ExpSum::exp(LinForm::new(x().int(1), x().zero(), x().int(5)))).unwrap();
        let (_, r) = solve_bt_params(EquationId::KdV, &one, &g, &x().one(), Grid::WholeStep).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn gauge_lift_of_pure_derivative() {
        // D_x f.(e^{ax} G) = e^{ax} (D_x - a) f.G
        let op = bt_template(EquationId::KdV, &x().one(), Grid::WholeStep).unwrap();
        let lifted = gauge_lift(&op[1], &x().int(3)).unwrap();
        assert!(lifted.monomials.iter().any(|m| m.mx == 0 && m.coeff.as_constant() == Some(x().int(9))));
    }

    #[test]
    fn float_backend_rejected() {
        let one = ExpSum::one(Ctx::Float);
        let h = Ctx::Float.float(1.0);
        assert!(matches!(
            solve_bt_params(EquationId::KdV, &one, &one, &h, Grid::WholeStep),
            Err(VerifyError::Unsupported(_))
        ));
    }
}
