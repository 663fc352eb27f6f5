use mmfbo::acquisition::{
    acquisition_value, consistency_probe, select_next, update_kappa, AcquisitionConfig, KappaSchedule, KappaState, ProbeSurface,
};
use mmfbo::bench::{auoc, regret_curve, time_to_threshold};
use mmfbo::error_model::{error_moments, DeviationMoments, ErrorMoments};
use mmfbo::functional::{pointwise_error, worst_case, FunctionalGrid, FunctionalResponse, Target};
use mmfbo::gp::{GpModel, KernelParams};
use mmfbo::functional::DesignBox;
use proptest::prelude::*;

fn grid(n: usize) -> FunctionalGrid {
    FunctionalGrid::uniform(0.0, 1.0, n).unwrap().normalized()
}

fn moments_strategy(t: usize) -> impl Strategy<Value = ErrorMoments> {
    (prop::collection::vec(0.0..10.0f64, t), prop::collection::vec(0.0..3.0f64, t)).prop_map(|(mu_e, sd_e)| ErrorMoments { mu_e, sd_e })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn worst_case_is_max_pointwise(a in prop::collection::vec(-5.0..5.0f64, 12), b in prop::collection::vec(-5.0..5.0f64, 12)) {
        let g = grid(12);
        let r = FunctionalResponse::new(a, &g).unwrap();
        let t = Target::new(b, &g).unwrap();
        let pw = pointwise_error(&r, &t).unwrap();
        prop_assert!(pw.iter().all(|e| *e >= 0.0));
        prop_assert_eq!(worst_case(&r, &t).unwrap(), pw.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }

    #[test]
    fn acquisition_nonincreasing_in_kappa(m in moments_strategy(9), k1 in 0.0..10.0f64, dk in 0.0..10.0f64) {
        let g = grid(9);
        prop_assert!(acquisition_value(&m, &g, k1 + dk) <= acquisition_value(&m, &g, k1) + 1e-12);
    }

    #[test]
    fn zero_spread_argmin_ignores_kappa(means in prop::collection::vec(prop::collection::vec(0.0..5.0f64, 4), 1..20), kappa in 0.0..10.0f64) {
        let g = grid(4);
        let cands: Vec<Vec<f64>> = (0..means.len()).map(|i| vec![i as f64]).collect();
        let mom = |x: &[f64]| Ok(ErrorMoments { mu_e: means[x[0] as usize].clone(), sd_e: vec![0.0; 4] });
        let a = select_next(&cands, mom, &g, kappa, 1.0).unwrap();
        let b = select_next(&cands, mom, &g, 0.0, 1.0).unwrap();
        prop_assert_eq!(a.index, b.index);
    }

    #[test]
    fn select_matches_brute_force(ms in prop::collection::vec(moments_strategy(5), 1..40), kappa in 0.0..5.0f64, q in 0.05..1.0f64) {
        let g = grid(5);
        let cands: Vec<Vec<f64>> = (0..ms.len()).map(|i| vec![i as f64]).collect();
        let sel = select_next(&cands, |x| Ok(ms[x[0] as usize].clone()), &g, kappa, q).unwrap();
        let mut order: Vec<usize> = (0..ms.len()).collect();
        order.sort_by(|&a, &b| ms[a].worst_mean().total_cmp(&ms[b].worst_mean()).then(a.cmp(&b)));
        let keep = ((q * ms.len() as f64).ceil() as usize).clamp(1, ms.len());
        let mut best = order[0];
        for &i in &order[..keep] {
            let (ai, ab) = (acquisition_value(&ms[i], &g, kappa), acquisition_value(&ms[best], &g, kappa));
            if ai < ab || (ai == ab && i < best) {
                best = i;
            }
        }
        prop_assert_eq!(sel.index, best);
    }

    #[test]
    fn kappa_stays_in_bounds(stream in prop::collection::vec(0.0..100.0f64, 0..200), k0 in 0.1..10.0f64) {
        let sched = KappaSchedule::from(&AcquisitionConfig::default());
        let mut s = KappaState::new(k0, 50.0);
        for g in stream {
            s = update_kappa(s, g, &sched);
            prop_assert!(s.kappa >= sched.kappa_min && s.kappa <= sched.kappa_max);
        }
    }

    #[test]
    fn regret_is_prefix_min(g in prop::collection::vec(0.0..100.0f64, 1..60)) {
        let r = regret_curve(&g, 0.0).unwrap();
        for k in 0..g.len() {
            let brute = g[..=k].iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(r[k], brute);
            prop_assert!(r[k] >= 0.0);
            if k > 0 {
                prop_assert!(r[k] <= r[k - 1]);
            }
        }
    }

    #[test]
    fn auoc_range_and_tt_monotone(g in prop::collection::vec(0.001..100.0f64, 1..60), e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
        let r = regret_curve(&g, 0.0).unwrap();
        let a = auoc(&r);
        let b = r.len() as f64;
        prop_assert!(a >= 1.0 / b - 1e-12 && a <= 1.0 + 1e-12);
        let norm: Vec<f64> = r.iter().map(|v| v / r[0]).collect();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        match (time_to_threshold(&norm, lo), time_to_threshold(&norm, hi)) {
            (Some(a), Some(b)) => prop_assert!(b <= a),
            (Some(_), None) => prop_assert!(false, "larger threshold never hit"),
            _ => {}
        }
    }

    #[test]
    fn probe_sandwich_holds(delta in 0.0..0.5f64, spread in 0.0..0.5f64, kappa in 0.0..5.0f64) {
        let s = ProbeSurface::new(200, 33).unwrap();
        let r = consistency_probe(&s, delta, spread, kappa);
        prop_assert!(r.within_bound());
    }

    #[test]
    fn error_moments_nonnegative(mu in prop::collection::vec(-10.0..10.0f64, 6), var in prop::collection::vec(0.0..5.0f64, 6)) {
        let m = error_moments(&DeviationMoments::new(mu.clone(), var.clone()).unwrap());
        for i in 0..6 {
            prop_assert!(m.mu_e[i] >= mu[i] * mu[i]);
            prop_assert!(m.sd_e[i] >= 0.0);
            prop_assert!((m.mu_e[i] - mu[i] * mu[i] - var[i]).abs() <= 1e-12 * (1.0 + m.mu_e[i]));
        }
    }

    #[test]
    fn gp_variance_below_prior(xs in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..12), q in (0.0..1.0f64, 0.0..1.0f64), ls in 0.05..2.0f64) {
        let b = DesignBox::unit(2);
        let x: Vec<Vec<f64>> = xs.iter().map(|&(a, c)| vec![a, c]).collect();
        let y: Vec<f64> = x.iter().map(|p| p[0] - 2.0 * p[1]).collect();
        let params = KernelParams::new(1.5, vec![ls, ls], 1e-4).unwrap();
        let gp = GpModel::condition(&x, &y, &b, &params).unwrap();
        let (_, v) = gp.predict(&[q.0, q.1]).unwrap();
        prop_assert!((0.0..=params.signal_variance * (1.0 + 1e-12)).contains(&v));
    }
}
