//! Dispatch of each command to the library.

use std::fmt;

use serde_json::{json, Value};

use hirota::convergence::{self, default_ky, DtStudy, RefinementStudy, Swept, Wave};
use hirota::expalg::{Ctx, Scalar};
use hirota::lattice::{self, BoundaryPolicy, LatticeConfig};
use hirota::soliton::{build_tau, reference_params, TauMode, TauSpec};
use hirota::systems::{get_system, EquationId, Grid};
use hirota::verify::{
    bilinear_residual, build_pair, core_points, identity_suite, lax_residual, nonlinear_residual, partner_report, Report,
};

use crate::config::{Boundary, Command, Config, Format, Rational, Sweep, Target};
use crate::output::to_value;

/// Why a command could not produce its reports.
#[derive(Debug)]
pub enum Failure {
    /// Bad combination of options; exit code 2.
    Usage(String),
    /// The computation aborted; exit code 3.
    Numerical(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

fn num(id: EquationId, e: impl fmt::Display) -> Failure {
    Failure::Numerical(format!("{id}: {e}"))
}

/// Reports plus optional CSV text and an abort flag for partial results.
pub struct Outcome {
    pub reports: Vec<Value>,
    pub csv: Option<String>,
    /// The computation blew up after producing partial results.
    pub aborted: Option<String>,
}

impl Outcome {
    fn reports(reports: Vec<Value>) -> Outcome {
        Outcome { reports, csv: None, aborted: None }
    }
}

fn exact_h(c: &Config, default: (i64, i64)) -> (Scalar, Rational) {
    let r = c.h.unwrap_or(Rational { num: default.0, den: default.1 });
    (Ctx::default().rat(r.num, r.den), r)
}

fn tagged(mut r: Report, id: EquationId, check: &str) -> Value {
    r.system = Some(id);
    r.params.insert("check".into(), check.into());
    to_value(&r)
}

fn lattice_only(c: &Config) -> Result<Vec<EquationId>, Failure> {
    match c.equation {
        Target::All => Ok(vec![EquationId::KdV, EquationId::SK]),
        Target::One(id @ (EquationId::KdV | EquationId::SK)) => Ok(vec![id]),
        Target::One(id) => Err(Failure::Usage(format!("{id}: evolution unsupported for this equation"))),
    }
}

fn verify(c: &Config) -> Result<Outcome, Failure> {
    let (h, _) = exact_h(c, (1, 2));
    let ctx = h.ctx();
    let mut out = Vec::new();
    for id in c.equation.ids() {
        let cont = reference_params(id, None, ctx).map_err(|e| num(id, e))?;
        let sys = get_system(id, &h).map_err(|e| num(id, e))?;
        for n in 1..=cont.len() {
            let spec = TauSpec::new(id, None, TauMode::Continuum, cont[..n].to_vec()).map_err(|e| num(id, e))?;
            let f = build_tau(&spec).map_err(|e| num(id, e))?;
            let r = bilinear_residual(&sys.continuum, &f, None).map_err(|e| num(id, e))?.param("solitons", n);
            out.push(tagged(r, id, "continuum-bilinear"));
        }
        let lat = reference_params(id, Some(&h), ctx).map_err(|e| num(id, e))?;
        let grid = Grid::WholeStep;
        for n in 1..=lat.len() {
            let spec = TauSpec::new(id, Some(h.clone()), TauMode::Semidiscrete(grid), lat[..n].to_vec()).map_err(|e| num(id, e))?;
            let f = build_tau(&spec).map_err(|e| num(id, e))?;
            let r = bilinear_residual(&sys.semidiscrete_on(grid), &f, None).map_err(|e| num(id, e))?;
            out.push(tagged(r.param("solitons", n).param("h", &h), id, "semidiscrete-bilinear"));
            let pts = core_points(&lat[0].to_float(), c.points, grid, id.has_y());
            let r = nonlinear_residual(id, &f, &h, grid, &pts).map_err(|e| num(id, e))?;
            out.push(tagged(r.param("solitons", n), id, "nonlinear"));
        }
    }
    Ok(Outcome::reports(out))
}

fn bt(c: &Config) -> Result<Outcome, Failure> {
    let (h, _) = exact_h(c, (1, 1));
    let mut out = Vec::new();
    for id in c.equation.ids() {
        let ps = reference_params(id, Some(&h), h.ctx()).map_err(|e| num(id, e))?;
        for (first, label) in [(None, "vacuum-to-one"), (Some(&ps[0]), "one-to-two")] {
            let pair = build_pair(id, &h, first, &ps[1]).map_err(|e| num(id, e))?;
            out.push(tagged(pair.report.clone().param("theta_x", &pair.theta_x), id, label));
            let partner = partner_report(id, &pair, &h).map_err(|e| num(id, e))?;
            out.push(tagged(partner, id, &format!("{label}-partner")));
        }
    }
    Ok(Outcome::reports(out))
}

fn lax(c: &Config) -> Result<Outcome, Failure> {
    let (h, _) = exact_h(c, (1, 1));
    let mut out = Vec::new();
    for id in c.equation.ids() {
        let ps = reference_params(id, Some(&h), h.ctx()).map_err(|e| num(id, e))?;
        let pair = build_pair(id, &h, Some(&ps[0]), &ps[1]).map_err(|e| num(id, e))?;
        let pts = core_points(&ps[1].to_float(), c.points, Grid::WholeStep, id.has_y());
        let r = lax_residual(id, &pair.f, &pair.g, &pair.params, &h, &pts).map_err(|e| num(id, e))?;
        out.push(tagged(r, id, "eigenfunction"));
    }
    Ok(Outcome::reports(out))
}

fn identities(c: &Config) -> Result<Outcome, Failure> {
    let r = identity_suite(c.seed, c.pairs).map_err(|e| Failure::Numerical(e.to_string()))?;
    Ok(Outcome::reports(vec![to_value(&r.param("prng", "chacha8"))]))
}

fn simulate(c: &Config) -> Result<Outcome, Failure> {
    let ids = lattice_only(c)?;
    if c.format == Format::Csv && ids.len() > 1 {
        return Err(Failure::Usage("equation: csv output needs a single equation".into()));
    }
    let mut out = Vec::new();
    let mut csv = None;
    let mut aborted = None;
    for id in ids {
        let h = c.h.map(|r| r.value()).unwrap_or(0.5);
        let mut cfg = LatticeConfig::new(id, c.k.unwrap_or(0.8), h, c.sites.unwrap_or(256), c.dt.unwrap_or(1e-3), c.t_end.unwrap_or(2.0));
        cfg.snapshot_every = c.stride;
        cfg.boundary = match c.boundary {
            Boundary::ExactTau => BoundaryPolicy::ExactTau,
            Boundary::ZeroBackground => BoundaryPolicy::ZeroBackground,
        };
        let tol = c.tol.unwrap_or(if id == EquationId::SK { 1e-5 } else { 1e-6 });
        let r = lattice::run(&cfg).map_err(|e| num(id, e))?;
        if r.blew_up {
            aborted = Some(format!("{id}: state blew up after {} steps (t = {})", r.steps, r.time));
        }
        let pass = !r.blew_up && r.max_error <= tol;
        out.push(json!({
            "kind": "simulation",
            "system": id,
            "k": cfg.k, "h": cfg.h, "sites": cfg.sites, "dt": cfg.dt, "t_end": cfg.t_end,
            "boundary": c.boundary,
            "steps": r.steps,
            "time": r.time,
            "max_error": r.max_error,
            "final_error": r.final_error,
            "blew_up": r.blew_up,
            "tolerance": tol,
            "pass": pass,
        }));
        if c.format == Format::Csv {
            let mut buf = Vec::new();
            lattice::write_csv(id, &r.snapshots, &mut buf).map_err(|e| num(id, e))?;
            csv = Some(String::from_utf8(buf).expect("csv is utf-8"));
        }
    }
    Ok(Outcome { reports: out, csv, aborted })
}

fn study_value(s: &RefinementStudy, expected: Option<f64>, extra: Value) -> Value {
    let order_ok = match (s.order(), expected) {
        (Some(o), Some(e)) => (o - e).abs() <= 0.3,
        (Some(o), None) => o >= 1.0,
        (None, _) => s.below_floor,
    };
    let mut v = to_value(s);
    let o = v.as_object_mut().expect("study is an object");
    o.insert("kind".into(), json!("convergence"));
    o.insert("expected_order".into(), json!(expected));
    if let Value::Object(e) = extra {
        o.extend(e);
    }
    o.insert("pass".into(), json!(order_ok && (s.monotone || s.below_floor)));
    v
}

fn converge(c: &Config) -> Result<Outcome, Failure> {
    let ids = match c.sweep {
        Sweep::Dt => lattice_only(c)?,
        Sweep::H => c.equation.ids(),
    };
    if c.format == Format::Csv && ids.len() > 1 {
        return Err(Failure::Usage("equation: csv output needs a single equation".into()));
    }
    let mut out = Vec::new();
    let mut csv = None;
    for id in ids {
        let (study, extra) = match c.sweep {
            Sweep::H => {
                let k = c.k.unwrap_or(1.0);
                let w = Wave { k, l: id.has_y().then(|| c.l.unwrap_or(default_ky(k))) };
                let hs = c.levels.clone().unwrap_or(vec![0.4, 0.2, 0.1, 0.05]);
                let s = convergence::h_refinement_study(id, w, &hs, c.protocol).map_err(|e| num(id, e))?;
                (s, json!({ "k": w.k, "l": w.l, "protocol": c.protocol }))
            }
            Sweep::Dt => {
                let mut d = DtStudy::default_for(id);
                d.k = c.k.unwrap_or(d.k);
                d.h = c.h.map(|r| r.value()).unwrap_or(d.h);
                d.sites = c.sites.unwrap_or(d.sites);
                d.t_end = c.t_end.unwrap_or(d.t_end);
                d.dts = c.levels.clone().unwrap_or(d.dts);
                let s = convergence::dt_refinement_study(id, &d).map_err(|e| num(id, e))?;
                (s, json!({ "k": d.k, "h": d.h, "sites": d.sites, "t_end": d.t_end }))
            }
        };
        let expected = c.expect_order.or((study.swept == Swept::Dt).then_some(4.0));
        out.push(study_value(&study, expected, extra));
        if c.format == Format::Csv {
            let mut buf = Vec::new();
            study.write_csv(&mut buf).map_err(|e| num(id, e))?;
            csv = Some(String::from_utf8(buf).expect("csv is utf-8"));
        }
    }
    Ok(Outcome { reports: out, csv, aborted: None })
}

fn dump_systems(c: &Config) -> Result<Outcome, Failure> {
    let (h, _) = exact_h(c, (1, 1));
    let mut out = Vec::new();
    for id in c.equation.ids() {
        let sys = get_system(id, &h).map_err(|e| num(id, e))?;
        let mut v = to_value(&sys.dump());
        let o = v.as_object_mut().expect("dump is an object");
        o.insert("kind".into(), json!("system"));
        o.insert("pass".into(), json!(true));
        out.push(v);
    }
    Ok(Outcome::reports(out))
}

pub fn run(c: &Config) -> Result<Outcome, Failure> {
    if c.format == Format::Csv && !matches!(c.command, Command::Simulate | Command::Converge) {
        return Err(Failure::Usage(format!("format: csv output is only defined for simulate and converge, not {}", c.command.name())));
    }
    match c.command {
        Command::Verify => verify(c),
        Command::Identities => identities(c),
        Command::Bt => bt(c),
        Command::Lax => lax(c),
        Command::Simulate => simulate(c),
        Command::Converge => converge(c),
        Command::DumpSystems => dump_systems(c),
    }
}
