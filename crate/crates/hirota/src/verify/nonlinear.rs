//! Residuals of the nonlinear lattice equations on fields derived from tau.

use num_complex::Complex64;

use super::{Report, ReportKind, VerifyError, FLOAT_TOL};
use crate::expalg::{AlgError, Ctx, ExpSum, Orders, Point, Scalar, Series};
use crate::systems::{boussinesq_a, nonlinear_equations, EquationId, FieldExpr, FieldJet, FieldRef, Grid, SiteEnv};

/// Jet orders (x, y, t) of ln(tau) needed to evaluate `exprs`.
pub fn field_orders<'a>(exprs: impl IntoIterator<Item = &'a FieldExpr>) -> Orders {
    let mut refs: Vec<FieldRef> = Vec::new();
    for e in exprs {
        e.refs(&mut refs);
    }
    let mut o = Orders::new(0, 0, 0);
    for r in refs {
        o.x = o.x.max(r.field.order());
        o.y = o.y.max(r.dy as usize);
        o.t = o.t.max(r.dt as usize);
    }
    o
}

/// Index step between site n and site n + h.
pub(crate) fn stride(grid: Grid) -> i64 {
    match grid {
        Grid::WholeStep => 1,
        Grid::HalfStep => 2,
    }
}

fn singular(p: &Point) -> VerifyError {
    VerifyError::Singular(format!("x={} y={} t={} s={}", p.x, p.y, p.t, p.s))
}

/// Field jet of a (float) tau function at a point.
pub fn site_jet(tau: &ExpSum, p: &Point, orders: Orders) -> Result<FieldJet, VerifyError> {
    let s = Series::of_expsum(tau, p, orders)?;
    match s.ln() {
        Ok(l) => Ok(FieldJet::new(l)),
        Err(AlgError::Singular(_)) => Err(singular(p)),
        Err(e) => Err(e.into()),
    }
}

/// Boussinesq constant as a complex number (a^2 = -3).
pub(crate) fn a_value() -> Complex64 {
    boussinesq_a(Ctx::Float).map(|a| a.to_complex()).unwrap_or_default()
}

/// Largest absolute residual of every nonlinear equation of the system over
/// the sample points. Site n + h is index s + 1 on the whole-step grid and
/// s + 2 on the half-step grid.
pub fn nonlinear_residual(
    id: EquationId,
    tau: &ExpSum,
    h: &Scalar,
    grid: Grid,
    samples: &[Point],
) -> Result<Report, VerifyError> {
    let tau = tau.to_float();
    let eqs = nonlinear_equations(id);
    let orders = field_orders(eqs.iter().map(|e| &e.expr));
    let hv = h.to_complex();
    let a = a_value();
    let mut worst = vec![0.0f64; eqs.len()];
    for p in samples {
        let here = site_jet(&tau, p, orders)?;
        let q = Point { s: p.s + stride(grid), ..*p };
        let next = site_jet(&tau, &q, orders)?;
        let env = SiteEnv { here: &here, next: Some(&next), params: &[], h: hv, a };
        for (w, e) in worst.iter_mut().zip(&eqs) {
            let r = e.expr.eval(&env)?.norm();
            *w = if r.is_nan() { f64::INFINITY } else { w.max(r) };
        }
    }
    let mut report = Report::new(ReportKind::Nonlinear, Some(id), FLOAT_TOL);
    for (w, e) in worst.into_iter().zip(&eqs) {
        report.push_float(e.label, w);
    }
    report.grid = format!("{} points, {grid:?}", samples.len());
    Ok(report.param("h", h))
}
