//! Lax-pair residuals for eigenfunctions built from transformation pairs.

use num_complex::Complex64;

use super::nonlinear::{a_value, field_orders, site_jet};
use super::{Report, ReportKind, VerifyError, FLOAT_TOL};
use crate::expalg::{AlgError, ExpSum, Orders, Point, Scalar, Series};
use crate::systems::{lax_matrices, lax_template, BTParams, EquationId, NumMatrix, NumSpatial, SiteEnv, SpatialProblem};

/// Components (phi, phi_x, ...) of the eigenfunction, with `dy` y-derivatives
/// and `dt` t-derivatives applied.
fn component(phi: &Series, i: usize, dy: u8, dt: usize) -> Complex64 {
    phi.deriv(i, dy as usize, dt)
}

fn apply(m: &NumMatrix, phi: &Series) -> Vec<Complex64> {
    m.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(c, ent)| ent.iter().map(|(k, v)| v * component(phi, c, *k, 0)).sum::<Complex64>())
                .sum()
        })
        .collect()
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenfunction jet phi = f/g; None where g vanishes.
fn phi_jet(f: &ExpSum, g: &ExpSum, p: &Point, o: Orders) -> Result<Option<Series>, VerifyError> {
    let fs = Series::of_expsum(f, p, o)?;
    let gs = Series::of_expsum(g, p, o)?;
    match fs.div(&gs) {
        Ok(s) => Ok(Some(s)),
        Err(AlgError::Singular(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Mismatch of the spatial problem (sites s -> s + 1 on the whole-step grid)
/// and of the temporal problem for phi = f/g, with the potential fields taken
/// from ln g. Each mismatch is divided by the eigenfunction's magnitude at
/// the two sites (at least 1). Samples where g vanishes are skipped.
pub fn lax_residual(
    id: EquationId,
    f: &ExpSum,
    g: &ExpSum,
    params: &BTParams,
    h: &Scalar,
    samples: &[Point],
) -> Result<Report, VerifyError> {
    let (f, g) = (f.to_float(), g.to_float());
    let t = lax_template(id);
    let mut exprs = t.temporal.iter().flatten().flatten().map(|(_, e)| e).collect::<Vec<_>>();
    let mut ky = 0u8;
    match &t.spatial {
        SpatialProblem::Standard { lhs, l } => {
            exprs.push(lhs);
            exprs.extend(l.iter().flatten().flatten().map(|(_, e)| e));
            ky = l.iter().flatten().flatten().map(|(k, _)| *k).max().unwrap_or(0);
        }
        SpatialProblem::TwoSided { l1, l2 } => {
            exprs.extend(l1.iter().chain(l2).flatten().flatten().map(|(_, e)| e));
        }
    }
    ky = ky.max(t.temporal.iter().flatten().flatten().map(|(k, _)| *k).max().unwrap_or(0));
    let fo = field_orders(exprs);
    let po = Orders::new(t.dim - 1, ky as usize, 1);
    let pv: Vec<_> = params.iter().map(|(s, v)| (*s, v.to_complex())).collect();
    let (hv, a) = (h.to_complex(), a_value());

    let mut report = Report::new(ReportKind::Lax, Some(id), FLOAT_TOL);
    let (mut spatial, mut temporal) = (0.0f64, 0.0f64);
    let mut used = 0;
    for p in samples {
        let q = Point { s: p.s + 1, ..*p };
        let (Some(ph), Some(pn)) = (phi_jet(&f, &g, p, po)?, phi_jet(&f, &g, &q, po)?) else {
            report.skipped += 1;
            continue;
        };
        let (jh, jn) = match (site_jet(&g, p, fo), site_jet(&g, &q, fo)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(VerifyError::Singular(_)), _) | (_, Err(VerifyError::Singular(_))) => {
                report.skipped += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let env = SiteEnv { here: &jh, next: Some(&jn), params: &pv, h: hv, a };
        let m = lax_matrices(id, &env)?;
        let here: Vec<Complex64> = (0..t.dim).map(|i| component(&ph, i, 0, 0)).collect();
        let next: Vec<Complex64> = (0..t.dim).map(|i| component(&pn, i, 0, 0)).collect();
        let scale = max_norm(&here).max(max_norm(&next)).max(1.0);
        let sres: Vec<Complex64> = match &m.spatial {
            NumSpatial::Standard { lhs, l } => {
                apply(l, &ph).iter().zip(&next).map(|(lp, n)| lhs * n - lp).collect()
            }
            NumSpatial::TwoSided { l1, l2 } => apply(l1, &pn).iter().zip(apply(l2, &ph)).map(|(x, y)| x - y).collect(),
        };
        let tres: Vec<Complex64> =
            apply(&m.temporal, &ph).iter().enumerate().map(|(i, qp)| component(&ph, i, 0, 1) - qp).collect();
        let nan = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
        spatial = spatial.max(nan(max_norm(&sres) / scale));
        temporal = temporal.max(nan(max_norm(&tres) / scale));
        used += 1;
    }
    if used == 0 {
        return Err(VerifyError::AllSingular);
    }
    report.push_float("spatial", spatial);
    report.push_float("temporal", temporal);
    report.grid = format!("{used} of {} points, whole-step sites s and s+1", samples.len());
    for (s, v) in params.iter() {
        report.params.insert(s.name().to_string(), v.to_string());
    }
    Ok(report.param("h", h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expalg::Ctx;
    use crate::systems::{Grid, Slot};
    use crate::verify::{default_points, solve_bt_params};

    #[test]
    fn constant_eigenfunction_at_vacuum() {
        let x = Ctx::default();
        let one = ExpSum::one(x);
        let (p, _) = solve_bt_params(EquationId::KdV, &one, &one, &x.one(), Grid::WholeStep).unwrap();
        let r = lax_residual(EquationId::KdV, &one, &one, &p, &x.one(), &default_points(10, false)).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.worst(), 0.0);
    }

    #[test]
    fn wrong_parameter_is_detected() {
        let x = Ctx::default();
        let one = ExpSum::one(x);
        let p = BTParams::new(EquationId::KdV, [(Slot::Beta, x.int(5)), (Slot::Gamma, x.zero())]).unwrap();
        let r = lax_residual(EquationId::KdV, &one, &one, &p, &x.one(), &default_points(4, false)).unwrap();
        assert!(!r.pass);
    }
}
