//! Refinement sweeps in h and dt with log-log order fits.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::expalg::{Ctx, ExpSum, Orders, Point};
use crate::lattice::{self, BoundaryPolicy, LatticeConfig, LatticeError};
use crate::soliton::{build_tau, SolitonError, SolitonParam, TauMode, TauSpec};
use crate::systems::{EquationId, Field, Grid};
use crate::verify::{site_jet, VerifyError};

/// Errors at or below this are treated as exact agreement.
pub const ERROR_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvergenceError {
    #[error("shape mismatch: {0} vs {1}")]
    Shape(usize, usize),
    #[error("order fit needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("level values must be positive and finite: ({0}, {1})")]
    NonPositive(f64, f64),
    #[error("parameter values must be strictly decreasing")]
    NotDecreasing,
    #[error("unstable run: {0}")]
    Unstable(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Soliton(#[from] SolitonError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("csv output failed: {0}")]
    Io(String),
}

type Result<T> = std::result::Result<T, ConvergenceError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    Max,
    /// Discrete l2 norm scaled by sqrt(h).
    L2 { h: f64 },
}

pub fn error_metric(computed: &[f64], reference: &[f64], norm: Norm) -> Result<f64> {
    if computed.len() != reference.len() {
        return Err(ConvergenceError::Shape(computed.len(), reference.len()));
    }
    let d = computed.iter().zip(reference).map(|(a, b)| (a - b).abs());
    Ok(match norm {
        Norm::Max => d.fold(0.0, f64::max),
        Norm::L2 { h } => (h * d.map(|x| x * x).sum::<f64>()).sqrt(),
    })
}

/// Least-squares line through (log10 param, log10 error).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub order: f64,
    pub intercept: f64,
    /// Largest distance of a point from the line, in log10 units.
    pub residual: f64,
}

pub fn order_fit(levels: &[(f64, f64)]) -> Result<Fit> {
    if levels.len() < 3 {
        return Err(ConvergenceError::TooFewLevels(levels.len()));
    }
    for &(p, e) in levels {
        if !(p > 0.0 && e > 0.0 && p.is_finite() && e.is_finite()) {
            return Err(ConvergenceError::NonPositive(p, e));
        }
    }
    let pts: Vec<(f64, f64)> = levels.iter().map(|(p, e)| (p.log10(), e.log10())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let order = sxy / sxx;
    let intercept = my - order * mx;
    let residual = pts.iter().map(|(x, y)| (y - intercept - order * x).abs()).fold(0.0, f64::max);
    Ok(Fit { order, intercept, residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Swept {
    H,
    Dt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Exact semi-discrete soliton against the continuum soliton.
    SemidiscreteExact,
    /// The continuum soliton against itself; a sanity check of the harness.
    ContinuumSelf,
    /// Numerical lattice run (KdV, SK) against the continuum soliton.
    LatticeRun,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub id: EquationId,
    pub swept: Swept,
    /// (parameter, error) pairs, parameter strictly decreasing.
    pub levels: Vec<(f64, f64)>,
    /// None when every error is below the floor.
    pub fit: Option<Fit>,
    pub below_floor: bool,
    /// Errors decrease with the parameter.
    pub monotone: bool,
}

impl RefinementStudy {
    fn finish(id: EquationId, swept: Swept, levels: Vec<(f64, f64)>) -> Result<RefinementStudy> {
        let below_floor = levels.iter().all(|l| l.1 <= ERROR_FLOOR);
        let monotone = levels.windows(2).all(|w| w[1].1 <= w[0].1);
        let fit = if below_floor { None } else { Some(order_fit(&levels)?) };
        Ok(RefinementStudy { id, swept, levels, fit, below_floor, monotone })
    }

    pub fn order(&self) -> Option<f64> {
        self.fit.map(|f| f.order)
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        let io = |e: std::io::Error| ConvergenceError::Io(e.to_string());
        writeln!(w, "param,error").map_err(io)?;
        for (p, e) in &self.levels {
            writeln!(w, "{p:?},{e:?}").map_err(io)?;
        }
        Ok(())
    }
}

fn check_levels(ps: &[f64]) -> Result<()> {
    if ps.len() < 3 {
        return Err(ConvergenceError::TooFewLevels(ps.len()));
    }
    if let Some(&p) = ps.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(ConvergenceError::NonPositive(p, 1.0));
    }
    if ps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ConvergenceError::NotDecreasing);
    }
    Ok(())
}

/// Half-width of the compared window in x, a few soliton widths.
fn window(k: f64) -> f64 {
    8.0 / k.abs()
}

/// Times at which the fields are compared.
const TIMES: [f64; 2] = [0.0, 0.5];

/// Default KP y-wavenumber for a given k. The lattice direction acts on the
/// soliton phase as kh - l h^2/2 + O(h^3), so the error is first order in h
/// and the sign of l decides whether the h^2 term adds to it or cancels it.
pub fn default_ky(k: f64) -> f64 {
    -0.5 * k
}

/// A soliton of wavenumber k (and l for KP).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Wave {
    pub k: f64,
    pub l: Option<f64>,
}

impl Wave {
    /// Wavenumber k, with the default y-wavenumber when `id` has one.
    pub fn new(id: EquationId, k: f64) -> Wave {
        Wave { k, l: id.has_y().then(|| default_ky(k)) }
    }
}

fn one_soliton(id: EquationId, w: Wave, h: Option<f64>) -> Result<ExpSum> {
    let x = Ctx::Float;
    let k = w.k;
    let l = w.l.map(|l| x.float(l));
    let (p, mode) = match h {
        Some(h) => (SolitonParam::lattice(id, x.float(k), l, &x.float(h))?, TauMode::Semidiscrete(Grid::WholeStep)),
        None => (SolitonParam::continuum(id, x.float(k), l)?, TauMode::Continuum),
    };
    let spec = TauSpec::new(id, h.map(|h| x.float(h)), mode, vec![p])?;
    Ok(build_tau(&spec)?)
}

/// v and u of `tau` at the given points.
fn sample(tau: &ExpSum, pts: &[Point]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * pts.len());
    for p in pts {
        let j = site_jet(tau, p, Orders::new(2, 0, 0))?;
        for f in [Field::V, Field::U] {
            out.push(j.get(f, 0, 0).map_err(VerifyError::from)?.re);
        }
    }
    Ok(out)
}

/// Sites m with |m h| inside the window.
fn sites(k: f64, h: f64) -> std::ops::RangeInclusive<i64> {
    let n = (window(k) / h).floor() as i64;
    -n..=n
}

fn exact_level(id: EquationId, w: Wave, h: f64, protocol: Protocol) -> Result<f64> {
    let k = w.k;
    let cont = one_soliton(id, w, None)?;
    let lat = match protocol {
        Protocol::SemidiscreteExact => one_soliton(id, w, Some(h))?,
        _ => cont.clone(),
    };
    let mut worst = 0.0f64;
    for t in TIMES {
        // the lattice solution at site m, x = 0 sits at x = m h in the continuum
        let on_sites: Vec<Point> = sites(k, h).map(|m| Point::new(0.0, 0.0, t, m)).collect();
        let matched: Vec<Point> = sites(k, h).map(|m| Point::new(m as f64 * h, 0.0, t, 0)).collect();
        let a = sample(&lat, if protocol == Protocol::ContinuumSelf { &matched } else { &on_sites })?;
        let b = sample(&cont, &matched)?;
        worst = worst.max(error_metric(&a, &b, Norm::Max)?);
    }
    Ok(worst)
}

/// Horizon of a lattice-run level.
const RUN_HORIZON: f64 = 0.1;

fn run_level(id: EquationId, w: Wave, h: f64) -> Result<f64> {
    let k = w.k;
    if !matches!(id, EquationId::KdV | EquationId::SK) {
        return Err(ConvergenceError::Unsupported(format!("no lattice run for {id}")));
    }
    let n = (window(k) / h).floor() as usize;
    let sites = 2 * n + 1;
    let dt = h.powi(3).min(1e-3);
    let mut cfg = LatticeConfig::new(id, k, h, sites, dt, RUN_HORIZON);
    cfg.center = Some(n);
    cfg.boundary = BoundaryPolicy::ExactTau;
    let r = lattice::run(&cfg)?;
    if r.blew_up {
        return Err(ConvergenceError::Unstable(format!("{id} lattice run at h={h} blew up after {} steps", r.steps)));
    }
    let st = &r.snapshots.last().expect("final snapshot").state;
    let cont = one_soliton(id, w, None)?;
    let pts: Vec<Point> = (0..sites).map(|m| Point::new((m as f64 - n as f64) * h, 0.0, r.time, 0)).collect();
    let b = sample(&cont, &pts)?;
    let a: Vec<f64> = st.v.iter().zip(&st.u).flat_map(|(v, u)| [*v, *u]).collect();
    error_metric(&a, &b, Norm::Max)
}

/// Error of the lattice solution against the continuum soliton at matched
/// points x = m h, for each h. k = 0 is the vacuum, which agrees exactly.
pub fn h_refinement_study(id: EquationId, w: Wave, hs: &[f64], protocol: Protocol) -> Result<RefinementStudy> {
    check_levels(hs)?;
    let mut levels = Vec::with_capacity(hs.len());
    for &h in hs {
        let e = if w.k == 0.0 {
            0.0
        } else {
            match protocol {
                Protocol::LatticeRun => run_level(id, w, h)?,
                p => exact_level(id, w, h, p)?,
            }
        };
        levels.push((h, e));
    }
    RefinementStudy::finish(id, Swept::H, levels)
}

/// Settings of a dt sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DtStudy {
    pub k: f64,
    pub h: f64,
    pub sites: usize,
    pub t_end: f64,
    pub dts: Vec<f64>,
}

impl DtStudy {
    /// Settings where the time-stepping error dominates both roundoff and the
    /// growth of the marching's unstable modes.
    pub fn default_for(id: EquationId) -> DtStudy {
        match id {
            EquationId::SK => DtStudy { k: 0.8, h: 1.0, sites: 8, t_end: 1e-3, dts: vec![2e-4, 1e-4, 5e-5] },
            _ => DtStudy { k: 0.8, h: 0.5, sites: 8, t_end: 0.2, dts: vec![4e-3, 2e-3, 1e-3] },
        }
    }
}

/// Final-time error of the lattice run against the exact semi-discrete
/// soliton, for each dt.
pub fn dt_refinement_study(id: EquationId, s: &DtStudy) -> Result<RefinementStudy> {
    check_levels(&s.dts)?;
    if !matches!(id, EquationId::KdV | EquationId::SK) {
        return Err(ConvergenceError::Unsupported(format!("no lattice run for {id}")));
    }
    let mut levels: Vec<(f64, f64)> = Vec::with_capacity(s.dts.len());
    for &dt in &s.dts {
        let e = if s.k == 0.0 {
            0.0
        } else {
            let r = lattice::run(&LatticeConfig::new(id, s.k, s.h, s.sites, dt, s.t_end))?;
            if r.blew_up {
                return Err(ConvergenceError::Unstable(format!("dt={dt}: blew up after {} steps", r.steps)));
            }
            r.final_error
        };
        if let Some(&(p0, e0)) = levels.first() {
            if e0 > ERROR_FLOOR && e > 1e3 * e0 {
                return Err(ConvergenceError::Unstable(format!("error grew from {e0:e} at dt={p0} to {e:e} at dt={dt}")));
            }
        }
        levels.push((dt, e));
    }
    RefinementStudy::finish(id, Swept::Dt, levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(error_metric(&a, &a, Norm::Max).unwrap(), 0.0);
        let b = a.map(|x| x + 1.0);
        assert_eq!(error_metric(&b, &a, Norm::Max).unwrap(), 1.0);
        assert!((error_metric(&b, &a, Norm::L2 { h: 0.25 }).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(error_metric(&a, &a[..2], Norm::Max), Err(ConvergenceError::Shape(4, 2))));
    }

    #[test]
    fn synthetic_fits() {
        let ps: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
        for k in [2, 4] {
            let f = order_fit(&ps.map(|p| (p, p.powi(k)))).unwrap();
            assert!((f.order - k as f64).abs() < 1e-12);
            assert!(f.residual < 1e-12);
        }
        let f = order_fit(&[(0.2, 5e-3), (0.1, 1.25e-3), (0.05, 3.125e-4)]).unwrap();
        assert!((f.order - 2.0).abs() < 1e-12);
        assert!(order_fit(&[(0.2, 0.0), (0.1, 1.0), (0.05, 1.0)]).is_err());
        assert!(order_fit(&[(0.2, 1.0), (0.1, 1.0)]).is_err());
    }

    #[test]
    fn level_checks() {
        assert_eq!(check_levels(&[0.1, 0.2, 0.05]), Err(ConvergenceError::NotDecreasing));
        assert!(check_levels(&[0.4, 0.2, 0.1]).is_ok());
    }

    #[test]
    fn kdv_h_order_is_two() {
        let s = h_refinement_study(EquationId::KdV, Wave::new(EquationId::KdV, 1.0), &[0.4, 0.2, 0.1, 0.05], Protocol::SemidiscreteExact).unwrap();
        let f = s.fit.unwrap();
        assert!((f.order - 2.0).abs() <= 0.3, "{s:?}");
        assert!(f.residual <= 0.1);
        assert!(s.monotone);
    }

    #[test]
    fn kp_order_depends_on_the_sign_of_l() {
        let hs = [0.4, 0.2, 0.1, 0.05];
        let run = |l: f64| {
            let s = h_refinement_study(EquationId::KP, Wave { k: 0.6, l: Some(l) }, &hs, Protocol::SemidiscreteExact).unwrap();
            s.order().unwrap()
        };
        let (minus, plus) = (run(-0.3), run(0.3));
        // both tend to one; the h^2 term pushes them to opposite sides
        assert!(minus > 1.0 && minus < 1.1, "{minus}");
        assert!(plus < 1.0 && plus > 0.9, "{plus}");
    }

    #[test]
    fn self_comparison_is_exact() {
        for id in EquationId::ALL {
            let s = h_refinement_study(id, Wave::new(id, 0.7), &[0.4, 0.2, 0.1], Protocol::ContinuumSelf).unwrap();
            assert!(s.below_floor, "{id}: {s:?}");
        }
    }

    #[test]
    fn vacuum_is_below_floor() {
        let s = h_refinement_study(EquationId::KdV, Wave::new(EquationId::KdV, 0.0), &[0.4, 0.2, 0.1], Protocol::SemidiscreteExact).unwrap();
        assert!(s.below_floor && s.fit.is_none());
        let d = DtStudy { k: 0.0, ..DtStudy::default_for(EquationId::KdV) };
        assert!(dt_refinement_study(EquationId::KdV, &d).unwrap().below_floor);
    }

    #[test]
    fn csv_levels() {
        let s = RefinementStudy::finish(EquationId::KdV, Swept::H, vec![(0.2, 4e-2), (0.1, 1e-2), (0.05, 2.5e-3)]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "param,error\n0.2,0.04\n0.1,0.01\n0.05,0.0025\n");
    }
}
