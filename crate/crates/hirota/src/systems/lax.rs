//! Lax-pair matrix templates.

use num_complex::Complex64;
use serde::Serialize;

use super::expr::{c, h, here, next, param, FieldEnv, FieldExpr};
use super::expr::{fref, Field, Site};
use super::{EquationId, Slot, SystemError};

/// Matrix entry: sum over k of coefficient_k * d^k/dy^k applied to the
/// eigenfunction component. Only KP uses k > 0.
pub type OpEntry = Vec<(u8, FieldExpr)>;
pub type OpMatrix = Vec<Vec<OpEntry>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CompatibilityForm {
    /// lhs * Phi(n+h) = L Phi(n), Phi_t = Q Phi(n).
    Standard,
    /// L1 Phi(n+h) = L2 Phi(n), Phi_t = Q Phi(n).
    TwoSided,
}

#[derive(Clone, Debug)]
pub enum SpatialProblem {
    Standard { lhs: FieldExpr, l: OpMatrix },
    TwoSided { l1: OpMatrix, l2: OpMatrix },
}

/// Spatial and temporal linear problems of a system. The eigenfunction
/// vector is (phi, phi_x, phi_xx, phi_xxx) truncated to `dim`.
#[derive(Clone, Debug)]
pub struct LaxTemplate {
    pub dim: usize,
    pub spatial: SpatialProblem,
    pub temporal: OpMatrix,
}

impl LaxTemplate {
    pub fn form(&self) -> CompatibilityForm {
        match self.spatial {
            SpatialProblem::Standard { .. } => CompatibilityForm::Standard,
            SpatialProblem::TwoSided { .. } => CompatibilityForm::TwoSided,
        }
    }
}

fn e(x: FieldExpr) -> OpEntry {
    vec![(0, x)]
}

fn zero() -> OpEntry {
    Vec::new()
}

fn one() -> OpEntry {
    e(c(1.0))
}

fn t_(f: Field) -> FieldExpr {
    fref(f, Site::Here, 1, 0)
}

fn y_(f: Field) -> FieldExpr {
    fref(f, Site::Here, 0, 1)
}

pub fn lax_template(id: EquationId) -> LaxTemplate {
    use Field::*;
    let ih = || h().recip();
    match id {
        EquationId::KdV => {
            let d = || ih() + here(V) - next(V);
            let g = || param(Slot::Gamma);
            LaxTemplate {
                dim: 2,
                spatial: SpatialProblem::Standard {
                    lhs: param(Slot::Beta),
                    l: vec![vec![e(d()), one()], vec![e(g() - here(U) - next(U)), e(d())]],
                },
                temporal: vec![
                    vec![e(c(-0.5) * here(P)), e(g() + here(U))],
                    vec![
                        e(c(-0.5) * here(Q) + (g() - c(2.0) * here(U)) * (g() + here(U))),
                        e(c(0.5) * here(P)),
                    ],
                ],
            }
        }
        EquationId::KP => {
            let d = || ih() + here(V) - next(V);
            let g = || param(Slot::Gamma);
            LaxTemplate {
                dim: 2,
                spatial: SpatialProblem::Standard {
                    lhs: param(Slot::Beta),
                    l: vec![
                        vec![e(d()), one()],
                        vec![vec![(0, -(here(U) + next(U) + g())), (1, c(1.0))], e(d())],
                    ],
                },
                temporal: vec![
                    vec![
                        e(c(1.5) * y_(V) - c(0.5) * here(P)),
                        vec![(0, -(g() - here(U))), (1, c(1.0))],
                    ],
                    vec![
                        vec![
                            (0, c(-0.5) * y_(U) - c(0.5) * here(Q) + (g() - here(U)) * (g() + c(2.0) * here(U))),
                            (1, -(c(2.0) * g() + here(U))),
                            (2, c(1.0)),
                        ],
                        e(c(1.5) * y_(V) + c(0.5) * here(P)),
                    ],
                ],
            }
        }
        EquationId::Boussinesq => {
            let a = super::expr::a;
            let d = || ih() + here(V) - next(V);
            let lam = || param(Slot::Lambda);
            let eta = || param(Slot::Eta);
            let diag = || lam() - a() * here(U) - c(0.25) * a();
            LaxTemplate {
                dim: 3,
                spatial: SpatialProblem::Standard {
                    lhs: param(Slot::Beta),
                    l: vec![
                        vec![e(d()), one(), zero()],
                        vec![e(here(U) - next(U)), e(d()), one()],
                        vec![
                            e(c(-0.5) * here(P) - next(P) + c(0.5) * a() * t_(V) + c(0.25) * eta() * a()),
                            e(c(-0.25) - here(U) - c(2.0) * next(U)),
                            e(d()),
                        ],
                    ],
                },
                temporal: vec![
                    vec![e(lam() + c(2.0) * a() * here(U)), zero(), e(a())],
                    vec![
                        e(c(0.5) * a() * here(P) - c(1.5) * t_(V) - c(0.75) * eta()),
                        e(diag()),
                        zero(),
                    ],
                    vec![
                        e(c(0.5) * a() * here(Q) - c(1.5) * t_(U)),
                        e(c(-0.5) * a() * here(P) - c(1.5) * t_(V) - c(0.75) * eta()),
                        e(diag()),
                    ],
                ],
            }
        }
        EquationId::SK => {
            let lam = || param(Slot::Lambda);
            let dv = || here(V) - next(V);
            let k = || c(2.0) + h() * dv();
            let ee = || (c(-2.0) - h() * dv()) * ih();
            let ea = (c(-2.0) * h() * lam() + c(3.0) * here(U) * k() + c(3.0) * next(U) * k()) * ih()
                + dv().pow(2) * (c(6.0) + h() * dv()) * ih();
            let eb = (c(-5.0) * h() * here(U) - h() * next(U) - c(12.0) * here(V) - c(3.0) * h() * here(V).pow(2)
                + c(12.0) * next(V)
                + c(6.0) * h() * here(V) * next(V)
                - c(3.0) * h() * next(V).pow(2))
                * ih();
            let ec = -((c(2.0) * h() * lam() + c(3.0) * here(U) * k() + c(3.0) * next(U) * k()) * ih())
                - dv().pow(2) * (c(6.0) + h() * dv()) * ih();
            let ed = -((h() * here(U) + c(5.0) * h() * next(U) + c(12.0) * here(V) + c(3.0) * h() * here(V).pow(2)
                - c(12.0) * next(V)
                - c(6.0) * h() * here(V) * next(V)
                + c(3.0) * h() * next(V).pow(2))
                * ih());
            let (u, p, q, r, s) = (|| here(U), || here(P), || here(Q), || here(R), || here(S));
            LaxTemplate {
                dim: 3,
                spatial: SpatialProblem::TwoSided {
                    l1: vec![
                        vec![e(ee()), one(), zero()],
                        vec![e(next(U) - here(U)), e(ee()), one()],
                        vec![e(ea), e(eb), e(c(2.0) * k() * ih())],
                    ],
                    l2: vec![
                        vec![e(-ee()), one(), zero()],
                        vec![e(here(U) - next(U)), e(-ee()), one()],
                        vec![e(ec), e(ed), e(-(c(2.0) * k() * ih()))],
                    ],
                },
                temporal: vec![
                    vec![
                        e(c(36.0) * lam() * u()),
                        e(c(6.0) * (q() - c(6.0) * u().pow(2))),
                        e(c(9.0) * (lam() - c(2.0) * p())),
                    ],
                    vec![
                        e(c(9.0) * lam() * (lam() + c(2.0) * p())),
                        e(c(6.0) * (r() - c(3.0) * (lam() - c(2.0) * p()) * u())),
                        e(c(-12.0) * (q() + c(3.0) * u().pow(2))),
                    ],
                    vec![
                        e(c(6.0) * lam() * (q() - c(6.0) * u().pow(2))),
                        e(c(3.0)
                            * (c(3.0) * lam().pow(2)
                                + c(12.0) * p().pow(2)
                                + c(2.0) * s()
                                + c(36.0) * q() * u()
                                + c(72.0) * u().pow(3))),
                        e(c(-6.0) * (r() + c(3.0) * (lam() + c(2.0) * p()) * u())),
                    ],
                ],
            }
        }
        EquationId::Ito => {
            let lam = || param(Slot::Lambda);
            let om = || param(Slot::Omega);
            let wt_next = || fref(W, Site::Next, 1, 0);
            let e1 = || c(-2.0) * lam() * ih() - lam() * here(V) + lam() * next(V);
            let e2 = || c(-2.0) * ih() - here(V) + next(V);
            LaxTemplate {
                dim: 4,
                spatial: SpatialProblem::TwoSided {
                    l1: vec![
                        vec![e(e1()), e(lam()), zero(), zero()],
                        vec![e(lam() * (next(U) - here(U))), e(e1()), e(lam()), zero()],
                        vec![
                            e(lam() * (next(P) - here(P))),
                            e(c(2.0) * lam() * (next(U) - here(U))),
                            e(e1()),
                            e(lam()),
                        ],
                        vec![
                            e(lam() * (t_(W) - wt_next() - om())),
                            e(c(6.0) * lam() * next(U)),
                            zero(),
                            e(lam()),
                        ],
                    ],
                    l2: vec![
                        vec![e(e2()), e(c(-1.0)), zero(), zero()],
                        vec![e(next(U) - here(U)), e(e2()), e(c(-1.0)), zero()],
                        vec![e(next(P) - here(P)), e(c(2.0) * (next(U) - here(U))), e(e2()), e(c(-1.0))],
                        vec![e(-om() - t_(W) + wt_next()), e(c(6.0) * here(U)), zero(), one()],
                    ],
                },
                temporal: vec![
                    vec![zero(), e(c(-6.0) * here(U)), zero(), e(c(-1.0))],
                    vec![e(c(-2.0) * t_(V)), e(-om()), zero(), zero()],
                    vec![e(c(-2.0) * t_(U)), e(c(-2.0) * t_(V)), e(-om()), zero()],
                    vec![e(c(-2.0) * t_(P)), e(c(-4.0) * t_(U)), e(c(-2.0) * t_(V)), e(-om())],
                ],
            }
        }
    }
}

/// Evaluated operator entry: (y-derivative order, value).
pub type NumEntry = Vec<(u8, Complex64)>;
pub type NumMatrix = Vec<Vec<NumEntry>>;

#[derive(Clone, Debug)]
pub enum NumSpatial {
    Standard { lhs: Complex64, l: NumMatrix },
    TwoSided { l1: NumMatrix, l2: NumMatrix },
}

#[derive(Clone, Debug)]
pub struct LaxMatrices {
    pub spatial: NumSpatial,
    pub temporal: NumMatrix,
    pub form: CompatibilityForm,
}

fn eval_matrix(m: &OpMatrix, env: &dyn FieldEnv) -> Result<NumMatrix, SystemError> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|ent| ent.iter().map(|(k, x)| Ok((*k, x.eval(env)?))).collect::<Result<NumEntry, SystemError>>())
                .collect()
        })
        .collect()
}

/// Numeric Lax matrices from the field jets of sites n and n + h.
pub fn lax_matrices(id: EquationId, env: &dyn FieldEnv) -> Result<LaxMatrices, SystemError> {
    let t = lax_template(id);
    let spatial = match &t.spatial {
        SpatialProblem::Standard { lhs, l } => NumSpatial::Standard { lhs: lhs.eval(env)?, l: eval_matrix(l, env)? },
        SpatialProblem::TwoSided { l1, l2 } => NumSpatial::TwoSided { l1: eval_matrix(l1, env)?, l2: eval_matrix(l2, env)? },
    };
    Ok(LaxMatrices { spatial, temporal: eval_matrix(&t.temporal, env)?, form: t.form() })
}

/// Scalar value of an operator entry that carries no y-derivatives.
pub fn plain(e: &NumEntry) -> Complex64 {
    e.iter().map(|(k, v)| {
        assert_eq!(*k, 0, "entry carries a y-derivative");
        *v
    }).sum()
}
