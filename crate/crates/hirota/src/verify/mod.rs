//! Correctness checks: bilinear and nonlinear residuals, Backlund pairs,
//! Lax eigenfunction residuals and the bilinear identity suite.

mod bt;
mod identities;
mod lax;
mod nonlinear;
mod samples;

pub use bt::{build_pair, lifted_apply, partner_report, solve_bt_params, BtPair};
pub use identities::{identity_check, identity_difference, identity_suite, random_expsum, Identity};
pub use lax::lax_residual;
pub use nonlinear::{field_orders, nonlinear_residual, site_jet};
pub use samples::{core_points, default_points, halton};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::expalg::{hirota_apply, AlgError, ExpSum};
use crate::soliton::SolitonError;
use crate::systems::{Arity, BilinearEquation, EquationId, SystemError};

/// Absolute tolerance for float residuals after normalization.
pub const FLOAT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("{0} needs a partner tau function")]
    Arity(String),
    #[error("tau function vanishes near {0}")]
    Singular(String),
    #[error("every sample point is singular")]
    AllSingular,
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Soliton(#[from] SolitonError),
    #[error(transparent)]
    Alg(#[from] AlgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Bilinear,
    Nonlinear,
    Bt,
    Lax,
    Identity,
}

/// Residual of one equation or identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub label: String,
    /// Exact decision on the exact backend; absent for float checks.
    pub exact_zero: Option<bool>,
    pub max_abs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub kind: ReportKind,
    pub system: Option<EquationId>,
    pub residuals: Vec<Residual>,
    pub params: BTreeMap<String, String>,
    pub grid: String,
    pub tolerance: f64,
    pub skipped: usize,
    pub pass: bool,
}

impl Report {
    pub fn new(kind: ReportKind, system: Option<EquationId>, tolerance: f64) -> Report {
        Report {
            kind,
            system,
            residuals: Vec::new(),
            params: BTreeMap::new(),
            grid: String::new(),
            tolerance,
            skipped: 0,
            pass: true,
        }
    }

    pub fn push_exact(&mut self, label: impl Into<String>, zero: bool, max_abs: f64) {
        self.residuals.push(Residual { label: label.into(), exact_zero: Some(zero), max_abs, pass: zero });
        self.pass &= zero;
    }

    pub fn push_float(&mut self, label: impl Into<String>, max_abs: f64) {
        let pass = max_abs.is_finite() && max_abs <= self.tolerance;
        self.residuals.push(Residual { label: label.into(), exact_zero: None, max_abs, pass });
        self.pass &= pass;
    }

    pub fn param(mut self, k: impl Into<String>, v: impl ToString) -> Report {
        self.params.insert(k.into(), v.to_string());
        self
    }

    /// Largest residual in the report.
    pub fn worst(&self) -> f64 {
        self.residuals.iter().map(|r| r.max_abs).fold(0.0, f64::max)
    }
}

/// Residual of a residual sum: exact zero test on the exact backend, else the
/// largest coefficient relative to `scale`.
fn record(report: &mut Report, label: &str, res: &ExpSum, scale: f64) -> Result<(), VerifyError> {
    let m = res.max_abs_coeff() / scale.max(f64::MIN_POSITIVE);
    if res.ctx().is_exact() {
        report.push_exact(label, res.is_zero()?, m);
    } else {
        report.push_float(label, m);
    }
    Ok(())
}

/// Apply each equation to (f, f) or (f, g) according to its arity.
pub fn bilinear_residual(eqs: &[BilinearEquation], f: &ExpSum, g: Option<&ExpSum>) -> Result<Report, VerifyError> {
    let mut report = Report::new(ReportKind::Bilinear, None, FLOAT_TOL);
    let fs = f.max_abs_coeff().max(f64::MIN_POSITIVE);
    for e in eqs {
        let (res, scale) = match e.arity {
            Arity::SelfPair | Arity::Lattice => (hirota_apply(&e.operator, f, f)?, fs * fs),
            Arity::Partner => {
                let g = g.ok_or_else(|| VerifyError::Arity(e.label.clone()))?;
                if e.arity == Arity::Partner {
                    report.kind = ReportKind::Bt;
                }
                (hirota_apply(&e.operator, f, g)?, fs * g.max_abs_coeff().max(f64::MIN_POSITIVE))
            }
        };
        record(&mut report, &e.label, &res, scale)?;
    }
    report.grid = "exponential coefficients".into();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expalg::{Ctx, LinForm};
    use crate::systems::get_system;

    #[test]
    fn vacuum_passes_and_wrong_frequency_fails() {
        let x = Ctx::default();
        let sys = get_system(EquationId::KdV, &x.one()).unwrap();
        let one = ExpSum::one(x);
        assert!(bilinear_residual(&sys.continuum, &one, None).unwrap().pass);
        let bad = one.add(&ExpSum::exp(LinForm::new(x.int(1), x.zero(), x.zero()))).unwrap();
        let r = bilinear_residual(&sys.semidiscrete, &bad, None).unwrap();
        assert!(!r.pass);
        assert_eq!(r.residuals[0].exact_zero, Some(false));
    }

    #[test]
    fn partner_equations_need_a_partner() {
        let x = Ctx::default();
        let p = crate::systems::BTParams::new(
            EquationId::KdV,
            [(crate::systems::Slot::Beta, x.one()), (crate::systems::Slot::Gamma, x.zero())],
        )
        .unwrap();
        let eqs = crate::systems::bt_system(EquationId::KdV, &p, &x.one(), crate::systems::Grid::WholeStep).unwrap();
        assert!(matches!(bilinear_residual(&eqs, &ExpSum::one(x), None), Err(VerifyError::Arity(_))));
        let r = bilinear_residual(&eqs, &ExpSum::one(x), Some(&ExpSum::one(x))).unwrap();
        assert_eq!(r.kind, ReportKind::Bt);
        assert!(r.pass);
    }
}
