//! Nonlinear lattice equations in terms of the fields w = ln f, v = w_x, u = v_x, ...
//! Each expression vanishes on exact solutions. `Here` is site n, `Next` is n + h.

use super::expr::{a, c, diff, fref, h, here, pair_sum, Field, FieldExpr, Site};
use super::EquationId;

#[derive(Clone, Debug)]
pub struct NonlinearEq {
    pub label: &'static str,
    pub expr: FieldExpr,
    /// Auxiliary identities hold on tau data but are not part of the evolution system.
    pub auxiliary: bool,
}

fn eq(label: &'static str, expr: FieldExpr) -> NonlinearEq {
    NonlinearEq { label, expr, auxiliary: false }
}

fn aux(label: &'static str, expr: FieldExpr) -> NonlinearEq {
    NonlinearEq { label, expr, auxiliary: true }
}

fn t1(f: Field) -> FieldExpr {
    fref(f, Site::Here, 1, 0)
}

pub fn nonlinear_equations(id: EquationId) -> Vec<NonlinearEq> {
    use Field::*;
    let d = |f| diff(f, 0, 0);
    let s = |f| pair_sum(f, 0, 0);
    let dt = |f| diff(f, 1, 0);
    let dy = |f| diff(f, 0, 1);
    let ih = || h().recip();
    let two_h = || c(2.0) * ih();
    match id {
        EquationId::KdV => vec![
            eq("u_t", t1(U) - c(0.25) * here(R) - c(3.0) * here(U) * here(P)),
            eq("v_t", t1(V) - c(0.25) * here(Q) - c(1.5) * here(U).pow(2)),
            eq("p", s(P) - two_h() * d(U) + c(2.0) * d(U) * d(V)),
            eq("q", s(Q) - two_h() * d(P) + c(2.0) * d(P) * d(V) + c(2.0) * d(U).pow(2)),
            eq("r", s(R) - two_h() * d(Q) + c(6.0) * d(P) * d(U) + c(2.0) * d(Q) * d(V)),
        ],
        EquationId::KP => vec![
            eq(
                "u_t",
                c(4.0) * t1(U) - here(R) - c(12.0) * here(U) * here(P) - c(3.0) * fref(V, Site::Here, 0, 2),
            ),
            aux("u", s(U) - two_h() * d(V) - dy(W) + d(V).pow(2)),
            eq("p", s(P) - two_h() * d(U) - dy(V) + c(2.0) * d(V) * d(U)),
            eq("q", s(Q) - two_h() * d(P) - dy(U) + c(2.0) * d(V) * d(P) + c(2.0) * d(U).pow(2)),
            eq("r", s(R) - two_h() * d(Q) - dy(P) + c(2.0) * d(V) * d(Q) + c(6.0) * d(U) * d(P)),
            aux(
                "w_t",
                c(3.0) * (pair_sum(V, 0, 1) + dy(W) * d(V)) - c(4.0) * dt(W) + d(P) + c(3.0) * d(V) * s(U) + d(V).pow(3)
                    - c(6.0) * ih() * dy(W),
            ),
            eq(
                "v_t",
                c(3.0) * pair_sum(U, 0, 1)
                    + c(6.0) * s(U) * d(U)
                    + c(6.0) * d(U) * d(V).pow(2)
                    + c(3.0) * dy(V) * d(V)
                    - c(4.0) * dt(V)
                    + d(Q)
                    + c(3.0) * d(V) * s(P)
                    - c(6.0) * ih() * d(U) * d(V)
                    - c(6.0) * ih() * dy(V),
            ),
        ],
        EquationId::Boussinesq => vec![
            eq(
                "u_tt",
                fref(U, Site::Here, 2, 0) - here(Q) - here(S) - c(12.0) * here(U) * here(Q) - c(12.0) * here(P).pow(2),
            ),
            eq("v_tt", fref(V, Site::Here, 2, 0) - here(P) - here(R) - c(12.0) * here(U) * here(P)),
            eq("p", a() * s(P) - c(2.0) * a() * ih() * d(U) - dt(V) + c(2.0) * a() * d(U) * d(V)),
            eq(
                "q",
                a() * s(Q) - c(2.0) * a() * ih() * d(P) - dt(U)
                    + c(2.0) * a() * d(P) * d(V)
                    + c(2.0) * a() * d(U).pow(2),
            ),
            eq(
                "r",
                a() * s(R) - c(2.0) * a() * ih() * d(Q) - dt(P)
                    + c(6.0) * a() * d(P) * d(U)
                    + c(2.0) * a() * d(Q) * d(V),
            ),
            eq(
                "s",
                a() * s(S) - c(2.0) * a() * ih() * d(R) - dt(Q)
                    + c(6.0) * a() * d(P).pow(2)
                    + c(8.0) * a() * d(Q) * d(U)
                    + c(2.0) * a() * d(R) * d(V),
            ),
        ],
        EquationId::SK => {
            let (v, u, p, q, r, sd, e) = (|| d(V), || d(U), || d(P), || d(Q), || d(R), || d(S), || d(Eta));
            let six_h = || c(6.0) * ih();
            let twelve_h2 = || c(12.0) * ih().pow(2);
            vec![
                eq("v_t", t1(V) + here(S) + c(30.0) * here(U) * here(Q) + c(60.0) * here(U).pow(3)),
                eq(
                    "u_t",
                    t1(U) + here(Eta)
                        + c(30.0) * here(P) * here(Q)
                        + c(30.0) * here(U) * here(R)
                        + c(180.0) * here(U).pow(2) * here(P),
                ),
                eq(
                    "p",
                    p() + c(3.0) * v() * s(U) + v().pow(3) - six_h() * (s(U) + v().pow(2)) + twelve_h2() * v(),
                ),
                eq(
                    "q",
                    q() + c(3.0) * u() * s(U) + c(3.0) * v() * s(P) + c(3.0) * v().pow(2) * u()
                        - six_h() * (s(P) + c(2.0) * v() * u())
                        + twelve_h2() * u(),
                ),
                eq(
                    "r",
                    r() + c(3.0) * p() * s(U)
                        + c(3.0) * v() * s(Q)
                        + c(6.0) * u() * s(P)
                        + c(6.0) * v() * u().pow(2)
                        + c(3.0) * v().pow(2) * p()
                        - six_h() * (s(Q) + c(2.0) * v() * p() + c(2.0) * u().pow(2))
                        + twelve_h2() * p(),
                ),
                eq(
                    "s",
                    sd() + c(3.0) * q() * s(U)
                        + c(9.0) * p() * s(P)
                        + c(9.0) * u() * s(Q)
                        + c(3.0) * v() * s(R)
                        + c(6.0) * u().pow(3)
                        + c(18.0) * v() * u() * p()
                        + c(3.0) * v().pow(2) * q()
                        - six_h() * (s(R) + c(2.0) * v() * q() + c(6.0) * u() * p())
                        + twelve_h2() * q(),
                ),
                eq(
                    "eta",
                    e() + c(3.0) * r() * s(U)
                        + c(12.0) * q() * s(P)
                        + c(18.0) * p() * s(Q)
                        + c(12.0) * u() * s(R)
                        + c(3.0) * v() * s(S)
                        + c(36.0) * u().pow(2) * p()
                        + c(18.0) * v() * p().pow(2)
                        + c(24.0) * v() * u() * q()
                        + c(3.0) * v().pow(2) * r()
                        - six_h() * (s(S) + c(2.0) * v() * r() + c(8.0) * u() * q() + c(6.0) * p().pow(2))
                        + twelve_h2() * r(),
                ),
            ]
        }
        EquationId::Ito => vec![
            eq("w_tt", fref(W, Site::Here, 2, 0) + t1(P) + c(6.0) * here(U) * t1(V)),
            eq("v", pair_sum(V, 1, 0) + dt(W) * d(V) - two_h() * dt(W)),
            eq(
                "p",
                pair_sum(P, 1, 0) + dt(U) * d(V) + c(2.0) * dt(V) * d(U) + dt(W) * d(P) - two_h() * dt(U),
            ),
            eq(
                "u",
                c(6.0) * (s(U) + d(V).pow(2))
                    - c(12.0) * ih() * d(V)
                    - h() * dt(W)
                    - h() * (d(P) + c(3.0) * d(V) * s(U) + d(V).pow(3)),
            ),
        ],
    }
}
