//! Registry of the five equation systems: bilinear forms, lattice forms,
//! Backlund transformations, nonlinear field equations and Lax pairs.

mod bt;
mod expr;
mod lax;
mod nonlinear;

pub use bt::{bt_slots, bt_template, BTParams, LiftedMonomial, LiftedOperator, Poly, Slot, Unknown};
pub use expr::{Field, FieldEnv, FieldExpr, FieldJet, FieldRef, Site, SiteEnv};
pub use lax::{
    lax_matrices, lax_template, plain, CompatibilityForm, LaxMatrices, LaxTemplate, NumEntry, NumMatrix, NumSpatial,
    OpEntry, OpMatrix, SpatialProblem,
};
pub use nonlinear::{nonlinear_equations, NonlinearEq};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::expalg::{AlgError, Ctx, HirotaMonomial, HirotaOperator, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("missing parameter slot {0:?}")]
    MissingSlot(Slot),
    #[error("parameter slot {0:?} is not defined for this equation")]
    ExtraSlot(Slot),
    #[error("field jet lacks {0}")]
    MissingJet(String),
    #[error("unresolved unknowns in {0}")]
    Unresolved(String),
    #[error("lattice spacing must be nonzero")]
    ZeroSpacing,
    #[error("the Boussinesq constant needs radicand -3 or the float backend")]
    NeedsRadicand,
    #[error("unknown equation {0:?}")]
    UnknownEquation(String),
    #[error(transparent)]
    Alg(#[from] AlgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationId {
    KdV,
    KP,
    Boussinesq,
    SK,
    Ito,
}

impl EquationId {
    pub const ALL: [EquationId; 5] = [EquationId::KdV, EquationId::KP, EquationId::Boussinesq, EquationId::SK, EquationId::Ito];

    pub fn name(self) -> &'static str {
        match self {
            EquationId::KdV => "kdv",
            EquationId::KP => "kp",
            EquationId::Boussinesq => "boussinesq",
            EquationId::SK => "sk",
            EquationId::Ito => "ito",
        }
    }

    /// Whether the system carries a y variable.
    pub fn has_y(self) -> bool {
        self == EquationId::KP
    }
}

impl FromStr for EquationId {
    type Err = SystemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "kdv" => EquationId::KdV,
            "kp" => EquationId::KP,
            "boussinesq" | "bs" => EquationId::Boussinesq,
            "sk" | "sawada-kotera" => EquationId::SK,
            "ito" => EquationId::Ito,
            _ => return Err(SystemError::UnknownEquation(s.to_string())),
        })
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lattice index convention. On the half-step grid the index s counts
/// half-steps and shifts are symmetric; on the whole-step grid s counts sites
/// and a shifted pair is (f(n + h), f(n)).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Grid {
    HalfStep,
    WholeStep,
}

/// How an equation consumes its arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Arity {
    /// f.f without shifts.
    SelfPair,
    /// f.f at neighbouring sites.
    Lattice,
    /// f.g for a transformation partner g.
    Partner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearEquation {
    pub label: String,
    pub operator: HirotaOperator,
    pub arity: Arity,
}

impl BilinearEquation {
    fn on_grid(&self, grid: Grid) -> BilinearEquation {
        match grid {
            Grid::HalfStep => self.clone(),
            Grid::WholeStep => BilinearEquation { operator: self.operator.to_whole_step(), ..self.clone() },
        }
    }
}

/// The Boussinesq constant a with a^2 = -3.
pub fn boussinesq_a(ctx: Ctx) -> Result<Scalar, SystemError> {
    match ctx {
        Ctx::Exact(-3) | Ctx::Float => Ok(ctx.rho()),
        Ctx::Exact(_) => Err(SystemError::NeedsRadicand),
    }
}

#[derive(Clone, Debug)]
pub struct EquationSystem {
    pub id: EquationId,
    pub h: Scalar,
    /// Continuum bilinear equation(s).
    pub continuum: Vec<BilinearEquation>,
    /// Semi-discrete equations on the half-step grid: the self-pair equation
    /// followed by the lattice equations.
    pub semidiscrete: Vec<BilinearEquation>,
    /// Nonlinear fields, each the k-th x-derivative of ln f.
    pub fields: Vec<Field>,
    /// Transformation constants fixed by requiring D_x = D_n + O(h).
    pub convergence_constants: Vec<(&'static str, Scalar)>,
}

impl EquationSystem {
    pub fn semidiscrete_on(&self, grid: Grid) -> Vec<BilinearEquation> {
        self.semidiscrete.iter().map(|e| e.on_grid(grid)).collect()
    }

    pub fn lattice_equations(&self, grid: Grid) -> Vec<BilinearEquation> {
        self.semidiscrete_on(grid).into_iter().filter(|e| e.arity == Arity::Lattice).collect()
    }

    pub fn nonlinear(&self) -> Vec<NonlinearEq> {
        nonlinear_equations(self.id)
    }

    pub fn lax(&self) -> LaxTemplate {
        lax_template(self.id)
    }

    pub fn dump(&self) -> SystemDump {
        let eqs = |v: &[BilinearEquation]| {
            v.iter()
                .map(|e| EquationDump { label: e.label.clone(), arity: e.arity, operator: e.operator.to_string() })
                .collect()
        };
        SystemDump {
            id: self.id,
            h: self.h.to_string(),
            continuum: eqs(&self.continuum),
            semidiscrete: eqs(&self.semidiscrete),
            fields: self.fields.iter().map(|f| f.name().to_string()).collect(),
            convergence_constants: self
                .convergence_constants
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            nonlinear: self
                .nonlinear()
                .iter()
                .map(|n| NonlinearDump { label: n.label.to_string(), auxiliary: n.auxiliary, expr: n.expr.to_string() })
                .collect(),
            lax_form: self.lax().form(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationDump {
    pub label: String,
    pub arity: Arity,
    pub operator: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonlinearDump {
    pub label: String,
    pub auxiliary: bool,
    pub expr: String,
}

/// Structured text form of a system, for documentation and golden tests.
#[derive(Clone, Debug, Serialize)]
pub struct SystemDump {
    pub id: EquationId,
    pub h: String,
    pub continuum: Vec<EquationDump>,
    pub semidiscrete: Vec<EquationDump>,
    pub fields: Vec<String>,
    pub convergence_constants: BTreeMap<String, String>,
    pub nonlinear: Vec<NonlinearDump>,
    pub lax_form: CompatibilityForm,
}

type Mono = (u32, u32, u32, i32, Scalar);
type Labelled = (&'static str, Vec<Mono>);
type Table = (Vec<Mono>, Vec<Labelled>, usize, Vec<(&'static str, Scalar)>);

fn op(ctx: Ctx, monos: Vec<Mono>) -> Result<HirotaOperator, SystemError> {
    Ok(HirotaOperator::new(ctx, monos.into_iter().map(|(x, y, t, r, c)| HirotaMonomial::new(x, y, t, r, c)))?)
}

fn equation(label: &str, ctx: Ctx, arity: Arity, monos: Vec<Mono>) -> Result<BilinearEquation, SystemError> {
    Ok(BilinearEquation { label: label.to_string(), operator: op(ctx, monos)?, arity })
}

/// The fully instantiated system for lattice spacing `h`.
pub fn get_system(id: EquationId, h: &Scalar) -> Result<EquationSystem, SystemError> {
    if h.is_zero() {
        return Err(SystemError::ZeroSpacing);
    }
    let x = h.ctx();
    let n = |v: i64| x.int(v);
    let q = |a: i64, b: i64| x.rat(a, b);
    let ih = h.inv()?;
    let ih2 = &ih * &ih;
    use Arity::*;
    let (cont, lattice, fields, consts): Table = match id {
        EquationId::KdV => (
            vec![(1, 0, 1, 0, n(1)), (4, 0, 0, 0, q(-1, 4))],
            vec![("kdv.lattice", vec![(2, 0, 0, 1, n(1)), (1, 0, 0, 1, -&(&n(2) * &ih))])],
            5,
            vec![("lambda", &n(2) * &ih)],
        ),
        EquationId::KP => (
            vec![(4, 0, 0, 0, n(1)), (1, 0, 1, 0, n(-4)), (0, 2, 0, 0, n(3))],
            vec![
                ("kp.lattice1", vec![(0, 1, 0, 1, n(1)), (2, 0, 0, 1, n(-1)), (1, 0, 0, 1, &n(2) * &ih)]),
                (
                    "kp.lattice2",
                    vec![(1, 1, 0, 1, n(3)), (0, 0, 1, 1, n(-4)), (3, 0, 0, 1, n(1)), (0, 1, 0, 1, -&(&n(6) * &ih))],
                ),
            ],
            6,
            vec![("mu", -&(&n(2) * &ih))],
        ),
        EquationId::Boussinesq => {
            let a = boussinesq_a(x)?;
            (
                vec![(0, 0, 2, 0, n(1)), (2, 0, 0, 0, n(-1)), (4, 0, 0, 0, n(-1))],
                vec![("bs.lattice", vec![(0, 0, 1, 1, n(1)), (2, 0, 0, 1, -&a), (1, 0, 0, 1, &(&n(2) * &a) * &ih)])],
                7,
                vec![("xi", &(&n(2) * &a) * &ih), ("eta", n(0))],
            )
        }
        EquationId::SK => (
            vec![(1, 0, 1, 0, n(1)), (6, 0, 0, 0, n(1))],
            vec![
                (
                    "sk.lattice1",
                    vec![(3, 0, 0, 1, n(1)), (2, 0, 0, 1, -&(&n(6) * &ih)), (1, 0, 0, 1, &n(12) * &ih2)],
                ),
                (
                    "sk.lattice2",
                    vec![
                        (0, 0, 1, 1, n(2)),
                        (5, 0, 0, 1, n(-3)),
                        (4, 0, 0, 1, &n(30) * &ih),
                        (3, 0, 0, 1, -&(&n(60) * &ih2)),
                    ],
                ),
            ],
            8,
            vec![("kappa", -&(&n(2) * &ih)), ("lambda", n(0)), ("mu", n(0))],
        ),
        EquationId::Ito => (
            vec![(0, 0, 2, 0, n(1)), (3, 0, 1, 0, n(1))],
            vec![
                ("ito.lattice1", vec![(1, 0, 1, 1, n(1)), (0, 0, 1, 1, -&(&n(2) * &ih))]),
                (
                    "ito.lattice2",
                    vec![(0, 0, 1, 1, h.clone()), (3, 0, 0, 1, h.clone()), (1, 0, 0, 1, &n(12) * &ih), (2, 0, 0, 1, n(-6))],
                ),
            ],
            4,
            vec![("gamma", &n(2) * &ih), ("lambda", n(0)), ("mu", n(0))],
        ),
    };
    let continuum = vec![equation(&format!("{}.bilinear", id.name()), x, SelfPair, cont)?];
    let mut semidiscrete = continuum.clone();
    for (label, m) in lattice {
        semidiscrete.push(equation(label, x, Lattice, m)?);
    }
    Ok(EquationSystem {
        id,
        h: h.clone(),
        continuum,
        semidiscrete,
        fields: Field::ALL[..fields].to_vec(),
        convergence_constants: consts,
    })
}

/// Backlund transformation with concrete parameters, acting on (f, g).
pub fn bt_system(id: EquationId, params: &BTParams, h: &Scalar, grid: Grid) -> Result<Vec<BilinearEquation>, SystemError> {
    if params.id != id {
        return Err(SystemError::Unresolved(format!("parameters for {} used with {}", params.id, id)));
    }
    let known: BTreeMap<Unknown, Scalar> = params.iter().map(|(s, v)| (Unknown::Slot(*s), v.clone())).collect();
    bt_template(id, h, grid)?
        .iter()
        .map(|t| {
            Ok(BilinearEquation { label: t.label.clone(), operator: t.instantiate(h.ctx(), &known)?, arity: Arity::Partner })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Ctx {
        Ctx::default()
    }

    #[test]
    fn lattice_operators_match_closed_forms() {
        let sk = get_system(EquationId::SK, &x().one()).unwrap();
        assert_eq!(sk.semidiscrete[1].operator.to_string(), op(x(), vec![
            (3, 0, 0, 1, x().int(1)),
            (2, 0, 0, 1, x().int(-6)),
            (1, 0, 0, 1, x().int(12)),
        ]).unwrap().to_string());
        let ito = get_system(EquationId::Ito, &x().int(2)).unwrap();
        let expect = op(x(), vec![
            (0, 0, 1, 1, x().int(2)),
            (3, 0, 0, 1, x().int(2)),
            (1, 0, 0, 1, x().int(6)),
            (2, 0, 0, 1, x().int(-6)),
        ])
        .unwrap();
        assert_eq!(ito.semidiscrete[2].operator, expect);
    }

    #[test]
    fn self_pair_equation_is_the_continuum_one() {
        for id in EquationId::ALL {
            let s = get_system(id, &x().rat(1, 2)).unwrap();
            assert_eq!(s.semidiscrete[0], s.continuum[0]);
            assert!(s.semidiscrete[1..].iter().all(|e| e.arity == Arity::Lattice));
        }
    }

    #[test]
    fn zero_spacing_rejected() {
        assert_eq!(get_system(EquationId::KdV, &x().zero()).unwrap_err(), SystemError::ZeroSpacing);
    }

    #[test]
    fn boussinesq_needs_default_radicand() {
        let c = Ctx::exact(13).unwrap();
        assert_eq!(get_system(EquationId::Boussinesq, &c.one()).unwrap_err(), SystemError::NeedsRadicand);
        assert!(get_system(EquationId::KdV, &c.one()).is_ok());
    }

    #[test]
    fn equation_names_parse() {
        for id in EquationId::ALL {
            assert_eq!(id.name().parse::<EquationId>().unwrap(), id);
        }
        assert!("nls".parse::<EquationId>().is_err());
    }

    #[test]
    fn registry_is_deterministic() {
        for id in EquationId::ALL {
            let a = get_system(id, &x().rat(1, 3)).unwrap();
            let b = get_system(id, &x().rat(1, 3)).unwrap();
            assert_eq!(a.semidiscrete, b.semidiscrete);
        }
    }

    #[test]
    fn kdv_bt_instantiates() {
        let p = BTParams::new(EquationId::KdV, [(Slot::Beta, x().int(2)), (Slot::Gamma, x().zero())]).unwrap();
        let eqs = bt_system(EquationId::KdV, &p, &x().one(), Grid::HalfStep).unwrap();
        assert_eq!(eqs.len(), 3);
        assert!(eqs.iter().all(|e| e.arity == Arity::Partner));
    }
}
