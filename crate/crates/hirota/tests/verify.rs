use hirota::expalg::{Ctx, Scalar};
use hirota::soliton::{build_tau, SolitonParam, TauMode, TauSpec};
use hirota::systems::{EquationId, Grid};
use hirota::verify::{build_pair, core_points, lax_residual, nonlinear_residual, partner_report};

fn x() -> Ctx {
    Ctx::default()
}

fn r(n: i64, d: i64) -> Scalar {
    x().rat(n, d)
}

// KP parameters keep the interaction coefficient positive, so tau has no zeros
fn params(id: EquationId, h: &Scalar) -> Vec<SolitonParam> {
    match id {
        EquationId::KP => vec![
            SolitonParam::kp_from_step(r(1, 3), x().int(2), h).unwrap(),
            SolitonParam::kp_from_step(x().int(1), x().int(4), h).unwrap(),
        ],
        EquationId::Boussinesq => {
            [2, 3].iter().map(|&m| SolitonParam::boussinesq_rational(x().int(m), Some(h)).unwrap()).collect()
        }
        _ => [1, 2].iter().map(|&k| SolitonParam::lattice(id, r(k, 2), None, h).unwrap()).collect(),
    }
}

#[test]
fn transformation_pairs_for_every_system() {
    let h = x().one();
    for id in EquationId::ALL {
        let ps = params(id, &h);
        for first in [None, Some(&ps[0])] {
            let pair = build_pair(id, &h, first, &ps[1]).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert!(pair.report.pass, "{id}: {:?}", pair.report);
            assert!(pair.report.residuals.iter().all(|r| r.exact_zero == Some(true)));
            assert!(partner_report(id, &pair, &h).unwrap().pass, "{id} partner");
        }
    }
}

#[test]
fn lax_residuals_on_pairs() {
    let h = x().one();
    for id in EquationId::ALL {
        let ps = params(id, &h);
        let pair = build_pair(id, &h, Some(&ps[0]), &ps[1]).unwrap();
        let pts = core_points(&ps[1].to_float(), 50, Grid::WholeStep, id.has_y());
        let rep = lax_residual(id, &pair.f, &pair.g, &pair.params, &h, &pts).unwrap();
        assert!(rep.pass, "{id}: {:?}", rep.residuals);
    }
}

#[test]
fn nonlinear_residuals_on_exact_solitons() {
    let h = r(1, 2);
    for id in EquationId::ALL {
        let ps = params(id, &h);
        for n in 1..=2 {
            let spec = TauSpec::new(id, Some(h.clone()), TauMode::Semidiscrete(Grid::WholeStep), ps[..n].to_vec()).unwrap();
            let tau = build_tau(&spec).unwrap();
            let pts = core_points(&ps[0].to_float(), 50, Grid::WholeStep, id.has_y());
            let rep = nonlinear_residual(id, &tau, &h, Grid::WholeStep, &pts).unwrap();
            assert!(rep.pass, "{id} N={n}: {:?}", rep.residuals);
        }
    }
}
