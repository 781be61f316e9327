use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hirota::convergence::{error_metric, h_refinement_study, order_fit, Norm, Protocol, Wave};
use hirota::expalg::{Ctx, Scalar};
use hirota::lattice::{aux_fields, rk4_step, LatticeState};
use hirota::soliton::{build_tau, self_residuals, SolitonParam, TauMode, TauSpec};
use hirota::systems::{EquationId, Grid};
use hirota::verify::{identity_difference, random_expsum, Identity};

fn x() -> Ctx {
    Ctx::default()
}

fn exact(id: EquationId, h: Option<Scalar>, mode: TauMode, ps: Vec<SolitonParam>) -> Result<bool, String> {
    let spec = TauSpec::new(id, h, mode, ps).map_err(|e| e.to_string())?;
    let f = build_tau(&spec).map_err(|e| e.to_string())?;
    let res = self_residuals(&spec, &f).map_err(|e| e.to_string())?;
    Ok(res.iter().all(|(_, r)| r.is_zero().unwrap()))
}

fn distinct(ks: &[(i64, i64)]) -> bool {
    (0..ks.len()).all(|i| (0..i).all(|j| ks[i].0 * ks[j].1 != ks[j].0 * ks[i].1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identities_hold_on_random_pairs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_expsum(&mut rng, x()).unwrap();
        let g = random_expsum(&mut rng, x()).unwrap();
        for id in Identity::ALL {
            prop_assert!(identity_difference(id, &f, &g).unwrap().is_zero().unwrap(), "{}", id.name());
        }
    }

    #[test]
    fn continuum_solitons_are_exact(
        ks in prop::collection::vec((1i64..7, 1i64..5), 1..4),
        sys in 0usize..3,
    ) {
        prop_assume!(distinct(&ks));
        let id = [EquationId::KdV, EquationId::Ito, EquationId::SK][sys];
        let ps = ks.iter().map(|&(n, d)| SolitonParam::continuum(id, x().rat(n, d), None).unwrap()).collect();
        prop_assert_eq!(exact(id, None, TauMode::Continuum, ps), Ok(true));
    }

    #[test]
    fn continuum_kp_solitons_are_exact(ks in prop::collection::vec((1i64..5, -3i64..4), 1..3)) {
        // equal x-wavenumbers are resonant: no interaction coefficient exists
        prop_assume!(ks.len() < 2 || ks[0].0 != ks[1].0);
        let ps = ks.iter().map(|&(k, l)| SolitonParam::continuum(EquationId::KP, x().int(k), Some(x().rat(l, 2))).unwrap()).collect();
        prop_assert_eq!(exact(EquationId::KP, None, TauMode::Continuum, ps), Ok(true));
    }

    #[test]
    fn lattice_solitons_are_exact(
        ks in prop::collection::vec((1i64..5, 1i64..5), 1..3),
        q in 1i64..4,
        sys in 0usize..3,
    ) {
        prop_assume!(distinct(&ks));
        let id = [EquationId::KdV, EquationId::Ito, EquationId::SK][sys];
        let h = x().rat(1, q);
        let ps: Result<Vec<_>, _> = ks.iter().map(|&(n, d)| SolitonParam::lattice(id, x().rat(n, d), None, &h)).collect();
        // kh at a pole of the step factor
        prop_assume!(ps.is_ok());
        prop_assert_eq!(exact(id, Some(h), TauMode::Semidiscrete(Grid::WholeStep), ps.unwrap()), Ok(true));
    }

    #[test]
    fn half_step_solitons_from_rational_multipliers(n in 1i64..9, d in 1i64..9, ito in any::<bool>()) {
        prop_assume!(n != d);
        let id = if ito { EquationId::Ito } else { EquationId::KdV };
        let h = x().rat(1, 2);
        let p = SolitonParam::from_mu(id, x().rat(n, d), &h).unwrap();
        prop_assert_eq!(exact(id, Some(h), TauMode::Semidiscrete(Grid::HalfStep), vec![p]), Ok(true));
    }

    #[test]
    fn boussinesq_rational_family_is_exact(ms in prop::collection::vec(2i64..7, 1..3), q in 1i64..3) {
        prop_assume!(ms.len() < 2 || ms[0] != ms[1]);
        let h = x().rat(1, q);
        let id = EquationId::Boussinesq;
        let ps: Vec<_> = ms.iter().map(|&m| SolitonParam::boussinesq_rational(x().int(m), Some(&h)).unwrap()).collect();
        prop_assert_eq!(exact(id, Some(h), TauMode::Semidiscrete(Grid::WholeStep), ps), Ok(true));
    }

    #[test]
    fn vacuum_is_a_fixed_point(h in 0.1f64..2.0, sites in 4usize..24, dt in 1e-4f64..1e-2, sk in any::<bool>()) {
        let id = if sk { EquationId::SK } else { EquationId::KdV };
        let n = aux_fields(id).unwrap().len();
        let s = LatticeState { v: vec![0.0; sites], u: vec![0.0; sites] };
        let b = |_t: f64| Ok(vec![0.0; n]);
        prop_assert_eq!(rk4_step(id, h, &s, 0.0, dt, &b).unwrap(), s);
    }

    #[test]
    fn fitted_order_ignores_the_error_constant(p in 0.5f64..6.0, c in 1e-8f64..1e3, h0 in 0.05f64..1.0) {
        let levels: Vec<(f64, f64)> = (0..4).map(|i| {
            let h = h0 / 2f64.powi(i);
            (h, c * h.powf(p))
        }).collect();
        let fit = order_fit(&levels).unwrap();
        prop_assert!((fit.order - p).abs() < 1e-9);
        prop_assert!(fit.residual < 1e-9);
        let scaled: Vec<_> = levels.iter().map(|&(h, e)| (h, 7.0 * e)).collect();
        prop_assert!((order_fit(&scaled).unwrap().order - fit.order).abs() < 1e-9);
    }

    #[test]
    fn error_metric_is_a_distance(a in prop::collection::vec(-10.0f64..10.0, 1..20), s in -5.0f64..5.0) {
        let b: Vec<f64> = a.iter().map(|v| v + s).collect();
        for norm in [Norm::Max, Norm::L2 { h: 0.5 }] {
            let d = error_metric(&a, &b, norm).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, error_metric(&b, &a, norm).unwrap());
            prop_assert_eq!(error_metric(&a, &a, norm).unwrap(), 0.0);
        }
    }
}

#[test]
fn resonant_kp_pair_has_no_interaction_coefficient() {
    let p = |l| SolitonParam::continuum(EquationId::KP, x().one(), Some(x().rat(l, 2))).unwrap();
    assert!(exact(EquationId::KP, None, TauMode::Continuum, vec![p(2), p(-2)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lattice_soliton_tends_to_the_continuum_one(k in 0.5f64..1.5) {
        let s = h_refinement_study(EquationId::KdV, Wave::new(EquationId::KdV, k), &[0.2, 0.1, 0.05], Protocol::SemidiscreteExact).unwrap();
        let order = s.order().unwrap();
        prop_assert!((order - 2.0).abs() <= 0.3, "order {order} at k = {k}");
        prop_assert!(s.monotone);
    }
}
