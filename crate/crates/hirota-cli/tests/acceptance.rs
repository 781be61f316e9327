//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use hirota::convergence::{dt_refinement_study, h_refinement_study, DtStudy, Protocol, Wave};
use hirota::expalg::{Ctx, Scalar};
use hirota::lattice::{self, LatticeConfig};
use hirota::soliton::{build_tau, reference_params, TauMode, TauSpec};
use hirota::systems::{get_system, EquationId, Grid};
use hirota::verify::{
    bilinear_residual, build_pair, core_points, identity_suite, lax_residual, nonlinear_residual, partner_report,
};

const FLOAT_TOL: f64 = 1e-8;
const ORDER_TOL: f64 = 0.3;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn h() -> Scalar {
    Ctx::default().rat(1, 2)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn continuum_exact() -> Outcome {
    let ctx = Ctx::default();
    let mut bad = Vec::new();
    for id in EquationId::ALL {
        let sys = get_system(id, &h()).map_err(|e| e.to_string())?;
        let ps = reference_params(id, None, ctx).map_err(|e| e.to_string())?;
        for n in 1..=3 {
            let spec = TauSpec::new(id, None, TauMode::Continuum, ps[..n].to_vec()).map_err(|e| e.to_string())?;
            let f = build_tau(&spec).map_err(|e| e.to_string())?;
            let r = bilinear_residual(&sys.continuum, &f, None).map_err(|e| e.to_string())?;
            if !(r.pass && r.residuals.iter().all(|x| x.exact_zero == Some(true))) {
                bad.push(format!("{id} N={n}"));
            }
        }
    }
    check(bad.is_empty(), format!("5 systems x N=1..3, nonzero: {bad:?}"))
}

fn semidiscrete_exact() -> Outcome {
    let ctx = Ctx::default();
    let mut bad = Vec::new();
    for id in EquationId::ALL {
        let sys = get_system(id, &h()).map_err(|e| e.to_string())?;
        let ps = reference_params(id, Some(&h()), ctx).map_err(|e| e.to_string())?;
        for n in 1..=2 {
            let mode = TauMode::Semidiscrete(Grid::WholeStep);
            let spec = TauSpec::new(id, Some(h()), mode, ps[..n].to_vec()).map_err(|e| e.to_string())?;
            let f = build_tau(&spec).map_err(|e| e.to_string())?;
            let r = bilinear_residual(&sys.semidiscrete_on(Grid::WholeStep), &f, None).map_err(|e| e.to_string())?;
            if !(r.pass && r.residuals.iter().all(|x| x.exact_zero == Some(true))) {
                bad.push(format!("{id} N={n}"));
            }
        }
    }
    check(bad.is_empty(), format!("5 systems x N=1,2 at h=1/2, nonzero: {bad:?}"))
}

fn identities_exact() -> Outcome {
    let r = identity_suite(20240607, 100).map_err(|e| e.to_string())?;
    let failed: Vec<_> = r.residuals.iter().filter(|x| x.exact_zero != Some(true)).map(|x| x.label.clone()).collect();
    check(failed.is_empty(), format!("{} identities on 100 pairs, failed: {failed:?}", r.residuals.len()))
}

fn nonlinear_residuals() -> Outcome {
    let ctx = Ctx::default();
    let mut worst = 0.0f64;
    let mut all = true;
    for id in EquationId::ALL {
        let ps = reference_params(id, Some(&h()), ctx).map_err(|e| e.to_string())?;
        let pts = core_points(&ps[0].to_float(), 50, Grid::WholeStep, id.has_y());
        for n in 1..=2 {
            let mode = TauMode::Semidiscrete(Grid::WholeStep);
            let spec = TauSpec::new(id, Some(h()), mode, ps[..n].to_vec()).map_err(|e| e.to_string())?;
            let f = build_tau(&spec).map_err(|e| e.to_string())?;
            let r = nonlinear_residual(id, &f, &h(), Grid::WholeStep, &pts).map_err(|e| e.to_string())?;
            worst = worst.max(r.worst());
            all &= r.pass;
        }
    }
    check(all && worst <= FLOAT_TOL, format!("max residual {worst:.3e} on 50 points (tol {FLOAT_TOL:e})"))
}

fn transformation_pairs() -> Outcome {
    let one = Ctx::default().one();
    let mut bad = Vec::new();
    for id in EquationId::ALL {
        let ps = reference_params(id, Some(&one), one.ctx()).map_err(|e| e.to_string())?;
        for (first, label) in [(None, "0->1"), (Some(&ps[0]), "1->2")] {
            let pair = build_pair(id, &one, first, &ps[1]).map_err(|e| format!("{id} {label}: {e}"))?;
            let exact = pair.report.pass && pair.report.residuals.iter().all(|x| x.exact_zero == Some(true));
            let partner = partner_report(id, &pair, &one).map_err(|e| e.to_string())?;
            if !(exact && partner.pass) {
                bad.push(format!("{id} {label}"));
            }
        }
    }
    check(bad.is_empty(), format!("vacuum->1 and 1->2 with partner checks, failed: {bad:?}"))
}

fn lax_pairs() -> Outcome {
    let one = Ctx::default().one();
    let mut worst = 0.0f64;
    for id in EquationId::ALL {
        let ps = reference_params(id, Some(&one), one.ctx()).map_err(|e| e.to_string())?;
        let pair = build_pair(id, &one, Some(&ps[0]), &ps[1]).map_err(|e| e.to_string())?;
        let pts = core_points(&ps[1].to_float(), 50, Grid::WholeStep, id.has_y());
        let r = lax_residual(id, &pair.f, &pair.g, &pair.params, &one, &pts).map_err(|e| e.to_string())?;
        worst = worst.max(r.worst());
    }
    check(worst <= FLOAT_TOL, format!("max eigenfunction residual {worst:.3e} (tol {FLOAT_TOL:e})"))
}

fn lattice_runs() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (id, tol) in [(EquationId::KdV, 1e-6), (EquationId::SK, 1e-5)] {
        let cfg = LatticeConfig::new(id, 0.8, 0.5, 256, 1e-3, 2.0);
        let r = lattice::run(&cfg).map_err(|e| e.to_string())?;
        let pass = !r.blew_up && r.max_error <= tol;
        ok &= pass;
        if r.blew_up {
            lines.push(format!("{id} blew up at t={} after {} steps", r.time, r.steps));
        } else {
            lines.push(format!("{id} max error {:.3e} (tol {tol:e})", r.max_error));
        }
    }
    check(ok, format!("M=256, dt=1e-3, t=2: {}", lines.join("; ")))
}

fn convergence_orders() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for id in [EquationId::KdV, EquationId::SK] {
        let s = dt_refinement_study(id, &DtStudy::default_for(id)).map_err(|e| format!("{id} dt: {e}"))?;
        let o = s.order().unwrap_or(f64::NAN);
        ok &= (o - 4.0).abs() <= ORDER_TOL;
        lines.push(format!("{id} dt {o:.3}"));
    }
    let hs = [0.4, 0.2, 0.1, 0.05];
    for id in EquationId::ALL {
        let s = h_refinement_study(id, Wave::new(id, 1.0), &hs, Protocol::SemidiscreteExact)
            .map_err(|e| format!("{id} h: {e}"))?;
        let fit = s.fit.ok_or(format!("{id} h: no fit"))?;
        ok &= s.monotone;
        if id == EquationId::KdV {
            ok &= (fit.order - 2.0).abs() <= ORDER_TOL && fit.residual <= 0.1;
        } else {
            ok &= fit.order >= 1.0;
        }
        lines.push(format!("{id} h {:.3}", fit.order));
    }
    check(ok, lines.join(", "))
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_hirota-cli"))
        .args(args)
        .arg("--output")
        .arg(out)
        .env_remove("HIROTA_OUT_DIR")
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("{args:?} exited with {status}"));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn deterministic_output() -> Outcome {
    let dir = std::env::temp_dir().join(format!("hirota-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut same = true;
    let runs: [&[&str]; 2] = [&["verify", "--equation", "all"], &["identities", "--seed", "7", "--pairs", "20"]];
    for args in runs {
        // same path both times: the output path is part of the echoed config
        let a = run_cli(args, &dir.join("run.json"))?;
        let b = run_cli(args, &dir.join("run.json"))?;
        same &= a == b;
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(same, "verify and identities run twice, byte-identical JSON".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("continuum multi-soliton tau functions are exact", continuum_exact),
        ("semi-discrete multi-soliton tau functions are exact", semidiscrete_exact),
        ("bilinear identities hold exactly", identities_exact),
        ("nonlinear semi-discrete equations are satisfied", nonlinear_residuals),
        ("transformation pairs are exact", transformation_pairs),
        ("Lax eigenfunctions satisfy both linear problems", lax_pairs),
        ("lattice solver tracks the exact soliton", lattice_runs),
        ("refinement studies reach their orders", convergence_orders),
        ("CLI output is deterministic", deterministic_output),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {}: {tag}: {name}: {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
