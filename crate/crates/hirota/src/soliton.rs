//! Exact N-soliton tau functions (N <= 3) for the continuum and semi-discrete
//! systems. Dispersion relations, step factors and interaction coefficients
//! are all derived from the bilinear operators rather than typed in.

use serde::Serialize;
use thiserror::Error;

use crate::expalg::{hirota_apply, AlgError, Ctx, ExpSum, ExpTerm, HirotaOperator, LinForm, Scalar};
use crate::systems::{get_system, BilinearEquation, EquationId, Grid, SystemError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolitonError {
    #[error("wavenumber must be nonzero")]
    ZeroWavenumber,
    #[error("y-wavenumber must be given for KP and only for KP")]
    YWavenumber,
    #[error("no exact square root of {0} in the scalar field")]
    NoExactRoot(String),
    #[error("{0}: vanishing denominator for these parameters")]
    Singular(String),
    #[error("{0}: step factor disagrees with the other lattice equations")]
    Inconsistent(String),
    #[error("at most 3 solitons are supported, got {0}")]
    TooMany(usize),
    #[error("coincident solitons")]
    Degenerate,
    #[error("{0}: no interaction coefficient annihilates the residual")]
    NoSolution(String),
    #[error("multiplier {0} does not square to the step factor")]
    BadMultiplier(String),
    #[error("a lattice spacing is required")]
    NeedsSpacing,
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Alg(#[from] AlgError),
}

/// Which bilinear family a tau function is meant to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TauMode {
    Continuum,
    Semidiscrete(Grid),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolitonParam {
    pub k: Scalar,
    pub l: Option<Scalar>,
    pub omega: Scalar,
    /// Multiplier per whole lattice step; absent for continuum-only solitons.
    pub step: Option<Scalar>,
    /// Multiplier per half step, a square root of `step`.
    pub mu: Option<Scalar>,
    /// Multiplicative phase constant.
    pub phase0: Scalar,
}

fn check_args(id: EquationId, k: &Scalar, l: Option<&Scalar>) -> Result<(), SolitonError> {
    if k.is_zero() {
        return Err(SolitonError::ZeroWavenumber);
    }
    if id.has_y() != l.is_some() {
        return Err(SolitonError::YWavenumber);
    }
    Ok(())
}

/// The root of a*w^2 + b*w + c = 0 used as the frequency; a linear equation
/// when a = 0. With c = 0 the nonzero root is taken.
fn frequency_root(a: &Scalar, b: &Scalar, c: &Scalar) -> Result<Scalar, SolitonError> {
    let x = a.ctx();
    let scale = a.abs() + b.abs() + c.abs();
    if near_zero_rel(a, 1e-3 * scale) {
        if near_zero_rel(b, 1e-3 * scale) {
            return Err(SolitonError::Singular("dispersion".into()));
        }
        return Ok(-&(c / b));
    }
    if near_zero_rel(c, 1e-3 * scale) {
        return Ok(-&(b / a));
    }
    let disc = b * b - &(&(&x.int(4) * a) * c);
    let root = match x {
        Ctx::Float => disc.sqrt_float(),
        Ctx::Exact(_) => disc.sqrt_exact().ok_or_else(|| SolitonError::NoExactRoot(disc.to_string()))?,
    };
    // pick the root with nonnegative real part when possible
    let root = if root.to_complex().re < 0.0 { -&root } else { root };
    Ok(&(&root - b) / &(&x.int(2) * a))
}

fn symbol_self(op: &HirotaOperator, k: &Scalar, l: &Scalar, w: &Scalar) -> Result<Scalar, SolitonError> {
    let one = k.ctx().one();
    Ok(op.symbol(k, l, w, &one, &one)?)
}

/// Frequency omega such that 1 + exp(kx + ly + omega t) solves the continuum
/// bilinear equation. Quadratic cases take the nonzero root, or the root with
/// nonnegative real part.
pub fn dispersion(id: EquationId, k: &Scalar, l: Option<&Scalar>) -> Result<Scalar, SolitonError> {
    check_args(id, k, l)?;
    let x = k.ctx();
    let ly = l.cloned().unwrap_or_else(|| x.zero());
    let sys = get_system(id, &x.one())?;
    let op = &sys.continuum[0].operator;
    let p0 = symbol_self(op, k, &ly, &x.zero())?;
    let p1 = symbol_self(op, k, &ly, &x.one())?;
    let m1 = symbol_self(op, k, &ly, &x.int(-1))?;
    // P(w) = c + b w + a w^2
    let two = x.int(2);
    let a = &(&(&p1 + &m1) - &(&two * &p0)) / &two;
    let b = &(&p1 - &m1) / &two;
    let w = frequency_root(&a, &b, &p0)?;
    debug_assert!(symbol_self(op, k, &ly, &w).map(|r| r.abs() <= 1e-9 * (1.0 + w.abs()).powi(6)).unwrap_or(false));
    Ok(w)
}

/// Residual of a lattice equation on 1 + W^n E, as the coefficient of E.
fn step_residual(op: &HirotaOperator, k: &Scalar, l: &Scalar, w: &Scalar, step: &Scalar) -> Result<Scalar, SolitonError> {
    let one = k.ctx().one();
    let a = op.symbol(k, l, w, step, &one)?;
    let b = op.symbol(&-k, &-l, &-w, &one, step)?;
    Ok(&a + &b)
}

/// Multiplier per whole step such that 1 + W^n exp(kx + ly + omega t) solves
/// every lattice equation of the system. The frequency must already satisfy
/// the dispersion relation.
pub fn step_factor_for(
    id: EquationId,
    k: &Scalar,
    l: Option<&Scalar>,
    omega: &Scalar,
    h: &Scalar,
) -> Result<Scalar, SolitonError> {
    check_args(id, k, l)?;
    let x = k.ctx();
    let ly = l.cloned().unwrap_or_else(|| x.zero());
    let sys = get_system(id, h)?;
    let mut found: Option<Scalar> = None;
    for eq in sys.lattice_equations(Grid::WholeStep) {
        let r1 = step_residual(&eq.operator, k, &ly, omega, &x.one())?;
        let r2 = step_residual(&eq.operator, k, &ly, omega, &x.int(2))?;
        let slope = &r2 - &r1;
        if near_zero(&slope) {
            if near_zero(&r1) {
                continue;
            }
            return Err(SolitonError::Singular(eq.label.clone()));
        }
        let w = &x.one() - &(&r1 / &slope);
        let scale = r1.abs() + slope.abs();
        if !near_zero_rel(&step_residual(&eq.operator, k, &ly, omega, &w)?, scale) {
            return Err(SolitonError::Inconsistent(eq.label.clone()));
        }
        if w.is_zero() {
            return Err(SolitonError::Singular(eq.label.clone()));
        }
        match &found {
            None => found = Some(w),
            Some(prev) if close(prev, &w) => {}
            Some(_) => return Err(SolitonError::Inconsistent(eq.label.clone())),
        }
    }
    found.ok_or_else(|| SolitonError::Singular(format!("{}.lattice", id.name())))
}

/// Step factor with the frequency from `dispersion`.
pub fn step_factor(id: EquationId, k: &Scalar, l: Option<&Scalar>, h: &Scalar) -> Result<Scalar, SolitonError> {
    let w = dispersion(id, k, l)?;
    step_factor_for(id, k, l, &w, h)
}

fn near_zero(s: &Scalar) -> bool {
    match s {
        Scalar::Exact(_) => s.is_zero(),
        Scalar::Float(z) => z.norm() <= 1e-12,
    }
}

fn near_zero_rel(s: &Scalar, scale: f64) -> bool {
    match s {
        Scalar::Exact(_) => s.is_zero(),
        Scalar::Float(z) => z.norm() <= 1e-12 * scale.max(1.0),
    }
}

fn close(a: &Scalar, b: &Scalar) -> bool {
    match (a, b) {
        (Scalar::Float(x), Scalar::Float(y)) => (x - y).norm() <= 1e-10 * (1.0 + x.norm()),
        _ => a == b,
    }
}

/// Wavenumber whose step factor equals mu^2 (KdV, Ito, SK). Sawada-Kotera
/// inverts a quadratic and needs an exact root in exact mode.
pub fn k_from_mu(id: EquationId, mu: &Scalar, h: &Scalar) -> Result<Scalar, SolitonError> {
    if mu.is_zero() {
        return Err(AlgError::ZeroMultiplier.into());
    }
    if h.is_zero() {
        return Err(SystemError::ZeroSpacing.into());
    }
    let x = mu.ctx();
    let w = mu * mu;
    let one = x.one();
    let two = x.int(2);
    match id {
        EquationId::KdV | EquationId::Ito => {
            let den = &w + &one;
            if den.is_zero() {
                return Err(SolitonError::Singular("k from mu".into()));
            }
            Ok(&(&(&two / h) * &(&w - &one)) / &den)
        }
        EquationId::SK => {
            // (W - 1) z^2 - 6 (W + 1) z + 12 (W - 1) = 0 with z = h k
            let a = &w - &one;
            if a.is_zero() {
                return Ok(x.zero());
            }
            let b = &x.int(-6) * &(&w + &one);
            let c = &x.int(12) * &a;
            let disc = &(&b * &b) - &(&(&x.int(4) * &a) * &c);
            let root = match x {
                Ctx::Float => disc.sqrt_float(),
                Ctx::Exact(_) => disc.sqrt_exact().ok_or_else(|| SolitonError::NoExactRoot(disc.to_string()))?,
            };
            // the branch through z = 0 at W = 1
            let z = &(&(-&b) - &root) / &(&two * &a);
            let z = if z.abs() > (&(&(-&b) + &root) / &(&two * &a)).abs() { &(&(-&b) + &root) / &(&two * &a) } else { z };
            Ok(&z / h)
        }
        EquationId::KP | EquationId::Boussinesq => Err(SolitonError::Unsupported(format!(
            "{}: the step factor depends on a second parameter; use the dedicated constructor",
            id.name()
        ))),
    }
}

impl SolitonParam {
    /// Continuum soliton with derived frequency.
    pub fn continuum(id: EquationId, k: Scalar, l: Option<Scalar>) -> Result<SolitonParam, SolitonError> {
        let omega = dispersion(id, &k, l.as_ref())?;
        let one = k.ctx().one();
        Ok(SolitonParam { k, l, omega, step: None, mu: None, phase0: one })
    }

    /// Semi-discrete soliton with derived frequency and step factor.
    pub fn lattice(id: EquationId, k: Scalar, l: Option<Scalar>, h: &Scalar) -> Result<SolitonParam, SolitonError> {
        let omega = dispersion(id, &k, l.as_ref())?;
        let step = step_factor_for(id, &k, l.as_ref(), &omega, h)?;
        let one = k.ctx().one();
        Ok(SolitonParam { k, l, omega, step: Some(step), mu: None, phase0: one })
    }

    /// Semi-discrete soliton from its half-step multiplier (KdV, Ito, SK).
    pub fn from_mu(id: EquationId, mu: Scalar, h: &Scalar) -> Result<SolitonParam, SolitonError> {
        let k = k_from_mu(id, &mu, h)?;
        SolitonParam::lattice(id, k, None, h)?.with_mu(mu)
    }

    /// KP soliton with chosen x-wavenumber and step factor; the y-wavenumber
    /// follows from the first lattice equation.
    pub fn kp_from_step(k: Scalar, step: Scalar, h: &Scalar) -> Result<SolitonParam, SolitonError> {
        let x = k.ctx();
        let one = x.one();
        if (&step - &one).is_zero() {
            return Err(SolitonError::Singular("kp.lattice1".into()));
        }
        let l = &(&(&(&k * &k) * &(&step + &one)) / &(&step - &one)) - &(&(&x.int(2) * &k) / h);
        let p = SolitonParam::lattice(EquationId::KP, k, Some(l), h)?;
        if !close(p.step.as_ref().expect("lattice"), &step) {
            return Err(SolitonError::Inconsistent("kp.lattice1".into()));
        }
        Ok(p)
    }

    /// Boussinesq soliton with k = (m^2 - 1)/(2m), for which 1 + k^2 is a
    /// square and the frequency k (m^2 + 1)/(2m) stays in the base field.
    pub fn boussinesq_rational(m: Scalar, h: Option<&Scalar>) -> Result<SolitonParam, SolitonError> {
        let x = m.ctx();
        let two_m = &x.int(2) * &m;
        let m2 = &m * &m;
        let k = &(&m2 - &x.one()) / &two_m;
        let omega = &(&k * &(&m2 + &x.one())) / &two_m;
        SolitonParam::with_omega(EquationId::Boussinesq, k, None, omega, h)
    }

    /// Caller-chosen frequency, checked against the dispersion relation.
    pub fn with_omega(
        id: EquationId,
        k: Scalar,
        l: Option<Scalar>,
        omega: Scalar,
        h: Option<&Scalar>,
    ) -> Result<SolitonParam, SolitonError> {
        check_args(id, &k, l.as_ref())?;
        let x = k.ctx();
        let ly = l.clone().unwrap_or_else(|| x.zero());
        let sys = get_system(id, &x.one())?;
        if !near_zero(&symbol_self(&sys.continuum[0].operator, &k, &ly, &omega)?) {
            return Err(SolitonError::Inconsistent(sys.continuum[0].label.clone()));
        }
        let step = match h {
            Some(h) => Some(step_factor_for(id, &k, l.as_ref(), &omega, h)?),
            None => None,
        };
        Ok(SolitonParam { k, l, omega, step, mu: None, phase0: x.one() })
    }

    /// Attach a half-step multiplier; it must square to the step factor.
    pub fn with_mu(mut self, mu: Scalar) -> Result<SolitonParam, SolitonError> {
        let step = self.step.as_ref().ok_or(SolitonError::NeedsSpacing)?;
        if !close(&(&mu * &mu), step) {
            return Err(SolitonError::BadMultiplier(mu.to_string()));
        }
        self.mu = Some(mu);
        Ok(self)
    }

    /// Pick a half-step multiplier: an exact root if one exists, else fail;
    /// in float mode the principal root.
    pub fn with_root(self) -> Result<SolitonParam, SolitonError> {
        let step = self.step.clone().ok_or(SolitonError::NeedsSpacing)?;
        let mu = match step.ctx() {
            Ctx::Float => step.sqrt_float(),
            Ctx::Exact(_) => step.sqrt_exact().ok_or_else(|| SolitonError::NoExactRoot(step.to_string()))?,
        };
        self.with_mu(mu)
    }

    pub fn with_phase0(mut self, c: Scalar) -> SolitonParam {
        self.phase0 = c;
        self
    }

    pub fn phase(&self) -> LinForm {
        let x = self.k.ctx();
        LinForm::new(self.k.clone(), self.l.clone().unwrap_or_else(|| x.zero()), self.omega.clone())
    }

    pub fn to_float(&self) -> SolitonParam {
        let f = |s: &Scalar| s.to_float();
        SolitonParam {
            k: f(&self.k),
            l: self.l.as_ref().map(f),
            omega: f(&self.omega),
            step: self.step.as_ref().map(f),
            mu: self.mu.as_ref().map(f),
            phase0: f(&self.phase0),
        }
    }

    /// Lattice multiplier used by `mode`.
    pub fn multiplier(&self, mode: TauMode) -> Result<Scalar, SolitonError> {
        match mode {
            TauMode::Continuum => Ok(self.k.ctx().one()),
            TauMode::Semidiscrete(Grid::WholeStep) => self.step.clone().ok_or(SolitonError::NeedsSpacing),
            TauMode::Semidiscrete(Grid::HalfStep) => {
                self.mu.clone().ok_or_else(|| SolitonError::BadMultiplier("no half-step multiplier".into()))
            }
        }
    }

    /// The exponential term E of this soliton in `mode`.
    pub fn term(&self, mode: TauMode) -> Result<ExpTerm, SolitonError> {
        Ok(ExpTerm { coeff: self.phase0.clone(), phase: self.phase(), mu: self.multiplier(mode)? })
    }
}

/// The equations a tau function in `mode` must annihilate.
pub fn mode_equations(id: EquationId, h: Option<&Scalar>, ctx: Ctx, mode: TauMode) -> Result<Vec<BilinearEquation>, SolitonError> {
    match mode {
        TauMode::Continuum => Ok(get_system(id, &ctx.one())?.continuum),
        TauMode::Semidiscrete(grid) => {
            let h = h.ok_or(SolitonError::NeedsSpacing)?;
            Ok(get_system(id, h)?.semidiscrete_on(grid))
        }
    }
}

fn product_term(a: &ExpTerm, b: &ExpTerm) -> ExpTerm {
    ExpTerm { coeff: &a.coeff * &b.coeff, phase: a.phase.add(&b.phase), mu: &a.mu * &b.mu }
}

/// Coefficient A with 1 + E_i + E_j + A E_i E_j a solution in `mode`, found by
/// an exact linear solve on the E_i E_j coefficient of every equation.
pub fn interaction_coeff(
    id: EquationId,
    pi: &SolitonParam,
    pj: &SolitonParam,
    h: Option<&Scalar>,
    mode: TauMode,
) -> Result<Scalar, SolitonError> {
    let x = pi.k.ctx();
    let ti = pi.term(mode)?;
    let tj = pj.term(mode)?;
    if ti.phase == tj.phase && ti.mu == tj.mu {
        return Err(SolitonError::Degenerate);
    }
    let tij = product_term(&ti, &tj);
    let eqs = mode_equations(id, h, x, mode)?;
    let base = ExpSum::from_terms(x, [ExpTerm { coeff: x.one(), phase: LinForm::zero(x), mu: x.one() }, ti, tj])?;
    let pair = ExpSum::from_terms(x, [tij.clone()])?;
    let mut found: Option<Scalar> = None;
    for eq in &eqs {
        // residual(A) = r0 + A r1 at the key of E_i E_j
        let r0 = hirota_apply(&eq.operator, &base, &base)?.coeff_at(&tij.phase, &tij.mu);
        let cross = hirota_apply(&eq.operator, &base, &pair)?.add(&hirota_apply(&eq.operator, &pair, &base)?)?;
        let r1 = cross.coeff_at(&tij.phase, &tij.mu);
        let r1 = &r1 / &tij.coeff;
        if near_zero(&r1) {
            if near_zero(&r0) {
                continue;
            }
            return Err(SolitonError::NoSolution(eq.label.clone()));
        }
        let a = -&(&r0 / &r1);
        match &found {
            None => found = Some(a),
            Some(prev) if close(prev, &a) => {}
            Some(_) => return Err(SolitonError::NoSolution(eq.label.clone())),
        }
    }
    found.ok_or_else(|| SolitonError::NoSolution(format!("{}: undetermined", id.name())))
}

/// Soliton content of a tau function.
#[derive(Clone, Debug, PartialEq)]
pub struct TauSpec {
    pub id: EquationId,
    pub h: Option<Scalar>,
    pub mode: TauMode,
    pub params: Vec<SolitonParam>,
    /// Symmetric pairwise coefficients; the diagonal is unused.
    pub interaction: Vec<Vec<Scalar>>,
}

impl TauSpec {
    /// Derive every interaction coefficient for `params` in `mode`.
    pub fn new(id: EquationId, h: Option<Scalar>, mode: TauMode, params: Vec<SolitonParam>) -> Result<TauSpec, SolitonError> {
        if params.len() > 3 {
            return Err(SolitonError::TooMany(params.len()));
        }
        let n = params.len();
        let ctx = params.first().map(|p| p.k.ctx()).or(h.as_ref().map(|h| h.ctx())).unwrap_or_default();
        let mut a = vec![vec![ctx.one(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let c = interaction_coeff(id, &params[i], &params[j], h.as_ref(), mode)?;
                a[i][j] = c.clone();
                a[j][i] = c;
            }
        }
        Ok(TauSpec { id, h, mode, params, interaction: a })
    }

    /// The vacuum tau function.
    pub fn vacuum(id: EquationId, h: Option<Scalar>, mode: TauMode) -> TauSpec {
        TauSpec { id, h, mode, params: Vec::new(), interaction: Vec::new() }
    }

    pub fn ctx(&self) -> Ctx {
        self.params.first().map(|p| p.k.ctx()).or(self.h.as_ref().map(|h| h.ctx())).unwrap_or_default()
    }

    pub fn to_float(&self) -> TauSpec {
        TauSpec {
            id: self.id,
            h: self.h.as_ref().map(|h| h.to_float()),
            mode: self.mode,
            params: self.params.iter().map(|p| p.to_float()).collect(),
            interaction: self.interaction.iter().map(|r| r.iter().map(|s| s.to_float()).collect()).collect(),
        }
    }
}

/// The tau function: sum over subsets S of prod_{i in S} E_i prod_{i<j in S} A_ij.
pub fn build_tau(spec: &TauSpec) -> Result<ExpSum, SolitonError> {
    let n = spec.params.len();
    if n > 3 {
        return Err(SolitonError::TooMany(n));
    }
    let x = spec.ctx();
    let terms: Vec<ExpTerm> = spec.params.iter().map(|p| p.term(spec.mode)).collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let mut t = ExpTerm { coeff: x.one(), phase: LinForm::zero(x), mu: x.one() };
        for (i, ti) in terms.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            t = product_term(&t, ti);
            for j in 0..i {
                if mask & (1 << j) != 0 {
                    t.coeff = &t.coeff * &spec.interaction[j][i];
                }
            }
        }
        out.push(t);
    }
    Ok(ExpSum::from_terms(x, out)?)
}

/// Bilinear residuals of a tau function against its own mode's equations.
pub fn self_residuals(spec: &TauSpec, f: &ExpSum) -> Result<Vec<(String, ExpSum)>, SolitonError> {
    let eqs = mode_equations(spec.id, spec.h.as_ref(), f.ctx(), spec.mode)?;
    eqs.iter().map(|e| Ok((e.label.clone(), hirota_apply(&e.operator, f, f)?))).collect()
}

/// Fixed exact soliton parameters used by the verification commands: three
/// continuum solitons when `h` is None, else two lattice solitons. KP pairs
/// keep the interaction coefficient positive so tau has no zeros.
pub fn reference_params(id: EquationId, h: Option<&Scalar>, ctx: Ctx) -> Result<Vec<SolitonParam>, SolitonError> {
    let r = |n: i64, d: i64| ctx.rat(n, d);
    match (id, h) {
        (EquationId::KP, None) => [(1, 1, 2), (2, -1, 2), (3, 1, 1)]
            .iter()
            .map(|&(k, l, d)| SolitonParam::continuum(id, ctx.int(k), Some(r(l, d))))
            .collect(),
        (EquationId::KP, Some(h)) => {
            Ok(vec![SolitonParam::kp_from_step(r(1, 3), ctx.int(2), h)?, SolitonParam::kp_from_step(ctx.one(), ctx.int(4), h)?])
        }
        (EquationId::Boussinesq, _) => {
            let ms: &[i64] = if h.is_some() { &[2, 3] } else { &[2, 3, 4] };
            ms.iter().map(|&m| SolitonParam::boussinesq_rational(ctx.int(m), h)).collect()
        }
        (_, None) => [1, 2, 3].iter().map(|&k| SolitonParam::continuum(id, r(k, 2), None)).collect(),
        (_, Some(h)) => [1, 2].iter().map(|&k| SolitonParam::lattice(id, r(k, 2), None, h)).collect(),
    }
}
