use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::wms::TaskObject;

fn sp(t: f64, rho: f64) -> StatePoint {
    StatePoint::new(t, rho, 0).unwrap()
}

fn task(id: u64, t: f64, rho: f64) -> TaskObject {
    TaskObject::new(
        id,
        BTreeMap::from([("T".into(), t), ("rho".into(), rho), ("step".into(), 0.0)]),
    )
}

/// `tau^n delta^m d^(n+m) a / dtau^n ddelta^m` by nested central differences.
fn fd_anm(eos: &Eos, n: u32, m: u32, tau: f64, delta: f64, h: f64) -> f64 {
    fn d(f: &dyn Fn(f64, f64) -> f64, n: u32, m: u32, x: f64, y: f64, h: f64) -> f64 {
        if n > 0 {
            let hx = h * x;
            (d(f, n - 1, m, x + hx, y, h) - d(f, n - 1, m, x - hx, y, h)) / (2.0 * hx)
        } else if m > 0 {
            let hy = h * y;
            (d(f, 0, m - 1, x, y + hy, h) - d(f, 0, m - 1, x, y - hy, h)) / (2.0 * hy)
        } else {
            f(x, y)
        }
    }
    let a = |x: f64, y: f64| eos.a_res(x, y);
    tau.powi(n as i32) * delta.powi(m as i32) * d(&a, n, m, tau, delta, h)
}

fn exact_results(truth: &Eos, ts: &[f64], rhos: &[f64]) -> Vec<MassieuDerivs> {
    ts.iter()
        .flat_map(|&t| rhos.iter().map(move |&r| truth_derivs(sp(t, r), truth, &DEFAULT_DERIVS)))
        .collect()
}

#[test]
fn zero_model_has_zero_derivatives() {
    let eos = Eos::new(EosForm::default_form(), vec![0.0; 3]).unwrap();
    let d = truth_derivs(sp(1.5, 0.01), &eos, &DEFAULT_DERIVS);
    assert_eq!(d.entries.len(), 5);
    assert!(d.entries.iter().all(|e| e.value == 0.0 && e.sigma == 0.0));
}

#[test]
fn single_linear_term_a01() {
    let eos = Eos::new(EosForm::new(&[(1.0, 1.0)]), vec![-0.7]).unwrap();
    for (t, rho) in [(1.5, 0.01), (0.8, 0.9), (3.0, 0.4)] {
        let d = truth_derivs(sp(t, rho), &eos, &DEFAULT_DERIVS);
        let want = -0.7 / t * rho;
        assert!((d.value(0, 1).unwrap() - want).abs() <= 1e-15 * want.abs());
        assert_eq!(d.value(0, 2), Some(0.0));
    }
}

#[test]
fn falling_factorial() {
    assert_eq!(falling(1.5, 0), 1.0);
    assert_eq!(falling(1.5, 2), 1.5 * 0.5);
    assert_eq!(falling(3.0, 3), 6.0);
    assert_eq!(falling(2.0, 3), 0.0);
}

#[test]
fn derivatives_match_finite_differences() {
    let truth = Eos::default_truth();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let t = rng.random_range(0.7..3.0);
        let rho = rng.random_range(0.05..1.2);
        let d = truth_derivs(sp(t, rho), &truth, &DEFAULT_DERIVS);
        for e in &d.entries {
            let fd = fd_anm(&truth, e.n, e.m, 1.0 / t, rho, 1e-4);
            assert!(
                (fd - e.value).abs() <= 1e-6 * e.value.abs().max(1e-3),
                "A{}{} at ({t}, {rho}): {} vs {fd}",
                e.n,
                e.m,
                e.value
            );
        }
    }
}

#[test]
fn pressure_derivatives_match_finite_differences() {
    let eos = Eos::default_truth();
    for (t, rho) in [(1.3, 0.2), (1.64, 0.63), (2.5, 1.1)] {
        let h = 1e-5;
        let p = |r: f64| eos.pressure(t, r);
        let fd1 = (p(rho + h) - p(rho - h)) / (2.0 * h);
        let fd2 = (p(rho + h) - 2.0 * p(rho) + p(rho - h)) / (h * h);
        assert!((fd1 - eos.dp_drho(t, rho)).abs() < 1e-7);
        assert!((fd2 - eos.d2p_drho2(t, rho)).abs() < 1e-3);
    }
}

#[test]
fn simulation_noise_is_deterministic_and_optional() {
    let truth = Eos::default_truth();
    let tk = task(3, 1.5, 0.01);
    let exact = simulate_state_point(&tk, &truth, &DEFAULT_DERIVS, 0.0, 9).unwrap();
    assert_eq!(exact, truth_derivs(sp(1.5, 0.01), &truth, &DEFAULT_DERIVS));
    let a = simulate_state_point(&tk, &truth, &DEFAULT_DERIVS, 0.01, 9).unwrap();
    let b = simulate_state_point(&tk, &truth, &DEFAULT_DERIVS, 0.01, 9).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, exact);
    assert!(a.entries.iter().all(|e| e.sigma >= 0.0 && e.value.is_finite()));
    let mut missing = tk.clone();
    missing.params.remove("rho");
    assert_eq!(
        simulate_state_point(&missing, &truth, &DEFAULT_DERIVS, 0.0, 1),
        Err(EosError::MissingParam("rho".into()))
    );
}

#[test]
fn monte_carlo_mean_is_unbiased() {
    let truth = Eos::default_truth();
    let tk = task(0, 1.4, 0.5);
    let exact = truth_derivs(sp(1.4, 0.5), &truth, &DEFAULT_DERIVS);
    let runs = 1000;
    let mut sums = vec![0.0; exact.entries.len()];
    for seed in 0..runs {
        let d = simulate_state_point(&tk, &truth, &DEFAULT_DERIVS, 0.01, seed).unwrap();
        for (s, e) in sums.iter_mut().zip(&d.entries) {
            *s += e.value;
        }
    }
    for (s, e) in sums.iter().zip(&exact.entries) {
        let sigma = 0.01 * e.value.abs();
        let mean = s / runs as f64;
        assert!((mean - e.value).abs() <= 3.0 * sigma / (runs as f64).sqrt(), "A{}{}", e.n, e.m);
    }
}

#[test]
fn result_file_is_key_value() {
    let dir = tempfile::tempdir().unwrap();
    let d = truth_derivs(sp(1.5, 0.01), &Eos::default_truth(), &DEFAULT_DERIVS);
    let path = write_result_file(dir.path(), "workflow/results/T_1.5/rho_0.01/step_0", &d).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# "));
    let kv: BTreeMap<&str, &str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_once('=').unwrap())
        .collect();
    assert_eq!(kv["T"], "1.5");
    assert_eq!(kv["step"], "0");
    assert_eq!(kv["A01"].parse::<f64>().unwrap(), d.value(0, 1).unwrap());
    assert_eq!(kv.len(), 3 + 2 * 5);
}

#[test]
fn fit_input_rows_and_merging() {
    let truth = Eos::default_truth();
    assert_eq!(create_eos_input_from_results(&[]), Err(EosError::EmptyResults));
    let one = truth_derivs(sp(1.5, 0.3), &truth, &DEFAULT_DERIVS);
    assert_eq!(create_eos_input_from_results(&[one.clone()]).unwrap().rows.len(), 5);

    let with = |v: f64, s: f64| MassieuDerivs {
        state: sp(1.5, 0.3),
        entries: vec![DerivEntry { n: 0, m: 1, value: v, sigma: s }],
    };
    let eq = create_eos_input_from_results(&[with(1.0, 0.2), with(2.0, 0.2)]).unwrap();
    assert_eq!(eq.rows.len(), 1);
    assert!((eq.rows[0].value - 1.5).abs() < 1e-15);
    // variance 0.04 halves to 0.02
    assert!((1.0 / eq.rows[0].weight - 0.02).abs() < 1e-15);

    // weights 1/0.01 = 100 and 1/0.04 = 25: (100 * 1 + 25 * 4) / 125 = 1.6
    let mixed = create_eos_input_from_results(&[with(1.0, 0.1), with(4.0, 0.2)]).unwrap();
    assert!((mixed.rows[0].value - 1.6).abs() < 1e-14);
    assert!((mixed.rows[0].weight - 125.0).abs() < 1e-9);
}

#[test]
fn noiseless_fit_recovers_truth() {
    let truth = Eos::default_truth();
    let results = exact_results(&truth, &[1.1, 1.4, 1.7, 2.0, 2.3], &[0.1, 0.35, 0.6, 0.85]);
    assert_eq!(results.len(), 20);
    let input = create_eos_input_from_results(&results).unwrap();
    let fit = fit_vle_curve(&input, &truth.form).unwrap();
    for (a, b) in fit.coefficients.iter().zip(&truth.coefficients) {
        assert!((a - b).abs() <= 1e-8 * b.abs(), "{a} vs {b}");
    }
    assert!(fit.rms_residual < 1e-10);
    assert_eq!(fit.iteration, 1);
    let c = fit.critical.unwrap();
    assert!(c.refined);
    assert!((c.t - 1.64456).abs() < 1e-4 && (c.rho - 0.62951).abs() < 1e-4, "{c:?}");
}

#[test]
fn critical_point_satisfies_both_conditions() {
    let truth = Eos::default_truth();
    let c = estimate_critical_point(&truth, ((1.2, 2.2), (0.1, 0.9))).unwrap();
    assert!(truth.dp_drho(c.t, c.rho).abs() < 1e-10);
    assert!(truth.d2p_drho2(c.t, c.rho).abs() < 1e-10);
}

#[test]
fn single_term_fit_is_exact() {
    let truth = Eos::new(EosForm::new(&[(1.0, 1.0)]), vec![-1.2]).unwrap();
    let d = truth_derivs(sp(1.5, 0.4), &truth, &DEFAULT_DERIVS);
    let input = create_eos_input_from_results(&[d]).unwrap();
    assert_eq!(input.rows.len(), 5);
    let fit = fit_vle_curve(&input, &truth.form).unwrap();
    assert!((fit.coefficients[0] + 1.2).abs() < 1e-14);
}

#[test]
fn fit_errors() {
    let truth = Eos::default_truth();
    let d = truth_derivs(sp(1.5, 0.4), &truth, &[(0, 1), (0, 2)]);
    let input = create_eos_input_from_results(&[d]).unwrap();
    assert_eq!(
        fit_vle_curve(&input, &truth.form),
        Err(EosError::TooFewRows { rows: 2, terms: 3 })
    );
    // the same term twice can never be separated
    let twin = EosForm::new(&[(1.0, 1.0), (1.0, 1.0)]);
    let input = create_eos_input_from_results(&exact_results(&truth, &[1.2, 1.5], &[0.2, 0.4])).unwrap();
    assert_eq!(fit_vle_curve(&input, &twin), Err(EosError::RankDeficient));
}

fn truth_fit() -> EosFit {
    let truth = Eos::default_truth();
    let input = create_eos_input_from_results(&exact_results(&truth, &[1.2, 1.7, 2.2], &[0.1, 0.5, 0.9])).unwrap();
    fit_vle_curve(&input, &truth.form).unwrap()
}

#[test]
fn critical_refinement_grid() {
    let fit = truth_fit();
    let c = fit.critical.unwrap();
    let pts = refine_around_critical_point(&fit, &RefineConfig::default(), &[]).unwrap();
    assert_eq!(pts.len(), 9);
    assert!(pts.iter().all(|p| p.step == fit.iteration));
    assert!(pts.iter().any(|p| p.t == c.t * 0.98 && p.rho == c.rho * 1.1));
    let again = refine_around_critical_point(&fit, &RefineConfig::default(), &pts[..4]).unwrap();
    assert_eq!(again.len(), 5);
    let mut none = fit.clone();
    none.critical = None;
    assert_eq!(
        refine_around_critical_point(&none, &RefineConfig::default(), &[]),
        Err(EosError::NoCriticalEstimate)
    );
}

#[test]
fn spinodals_match_dense_scan() {
    let fit = truth_fit();
    let eos = fit.eos();
    let cfg = RefineConfig::default();
    let vle = refine_around_vle(&fit, &cfg, &[]).unwrap();
    assert!(vle.skipped.is_empty());
    assert_eq!(vle.points.len(), 6);
    let c = fit.critical.unwrap();
    let steps = 1_000_000;
    for (k, f) in cfg.vle_t_factors.iter().enumerate() {
        let t = c.t * f;
        let g = |r: f64| eos.dp_drho(t, r);
        let at = |i: usize| cfg.scan_rho_min + (cfg.scan_rho_max - cfg.scan_rho_min) * i as f64 / steps as f64;
        let crossings: Vec<f64> = (0..steps)
            .filter(|&i| g(at(i)).signum() != g(at(i + 1)).signum())
            .map(|i| 0.5 * (at(i) + at(i + 1)))
            .take(2)
            .collect();
        assert_eq!(crossings.len(), 2);
        let (lo, hi) = (vle.points[2 * k], vle.points[2 * k + 1]);
        assert_eq!(lo.t, t);
        assert!((lo.rho - crossings[0]).abs() < 1e-4 && (hi.rho - crossings[1]).abs() < 1e-4);
        assert!(lo.rho < c.rho && c.rho < hi.rho);
    }
}

#[test]
fn repulsive_truth_has_no_spinodal() {
    let eos = Eos::new(EosForm::new(&[(1.0, 1.0), (0.0, 2.0)]), vec![0.8, 0.3]).unwrap();
    let input = create_eos_input_from_results(&exact_results(&eos, &[1.0, 2.0], &[0.2, 0.6])).unwrap();
    let mut fit = fit_vle_curve(&input, &eos.form).unwrap();
    fit.critical.get_or_insert(CriticalPoint { t: 1.5, rho: 0.4, refined: false });
    let vle = refine_around_vle(&fit, &RefineConfig::default(), &[]).unwrap();
    assert!(vle.points.is_empty());
    assert_eq!(vle.skipped.len(), 3);
    assert!(vle.skipped.iter().all(|e| matches!(e, EosError::NoSpinodal { .. })));
}

fn quiet(config: CampaignConfig) -> CampaignConfig {
    CampaignConfig {
        sigma_rel: 0.0,
        ..config
    }
}

#[test]
fn noiseless_campaign_converges_fast() {
    let out = run_eos_campaign(&quiet(CampaignConfig::default())).unwrap();
    let r = &out.report;
    assert!(r.converged && r.iterations <= 3, "{r:?}");
    assert!(r.max_relative_error().unwrap() <= 1e-8);
    assert_eq!(r.task_stats.tasks, out.run.records.len());
    assert!(r.fits.windows(2).all(|w| w[1].states > w[0].states));
}

#[test]
fn infinite_tolerance_stops_after_one_iteration() {
    let config = CampaignConfig {
        epsilon: f64::INFINITY,
        ..CampaignConfig::default()
    };
    let out = run_eos_campaign(&config).unwrap();
    assert!(out.report.converged);
    assert_eq!(out.report.iterations, 1);
    assert_eq!(out.report.task_stats.tasks, 25);
}

#[test]
fn iteration_cap_is_flagged() {
    let config = CampaignConfig {
        epsilon: 0.0,
        max_iterations: 2,
        ..CampaignConfig::default()
    };
    let out = run_eos_campaign(&config).unwrap();
    assert!(!out.report.converged);
    assert_eq!(out.report.status(), Err(EosError::NotConverged { iterations: 2 }));
}

#[test]
fn noisy_campaigns_stay_accurate() {
    for seed in 1..=10 {
        let out = run_eos_campaign(&CampaignConfig {
            seed,
            ..CampaignConfig::default()
        })
        .unwrap();
        let r = &out.report;
        assert!(r.max_relative_error().unwrap() <= 5e-2, "seed {seed}: {:?}", r.relative_error);
        assert!(r.final_rms <= 2.0 * r.noise_floor, "seed {seed}: rms {}", r.final_rms);
    }
}

#[test]
fn campaign_is_deterministic_and_states_are_unique() {
    let a = run_eos_campaign(&CampaignConfig::default()).unwrap();
    let b = run_eos_campaign(&CampaignConfig::default()).unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
    assert_eq!(a.ttl, b.ttl);
    let states: Vec<(f64, f64)> = a.run.records.iter().map(|r| (r.task.params["T"], r.task.params["rho"])).collect();
    for (i, x) in states.iter().enumerate() {
        for y in &states[..i] {
            assert!(
                (x.0 - y.0).abs() > SAME_STATE_REL * x.0 || (x.1 - y.1).abs() > SAME_STATE_REL * x.1,
                "{x:?} resubmitted"
            );
        }
    }
}

#[test]
fn campaign_respects_manager_invariants() {
    let config = CampaignConfig::default();
    let out = run_eos_campaign(&config).unwrap();
    let cluster = crate::wms::Cluster::uniform(config.cluster.nodes as usize, config.cluster.cores_per_node).unwrap();
    crate::wms::check_capacity(&out.run, &cluster).unwrap();
    // every task of step s starts after every task of step s-1 has ended
    let recs = &out.run.records;
    for r in recs {
        let s = r.task.params["step"];
        for q in recs.iter().filter(|q| q.task.params["step"] < s) {
            assert!(q.end <= r.start + 1e-9);
        }
    }
}

#[test]
fn campaign_ttl_validates() {
    let out = run_eos_campaign(&CampaignConfig::default()).unwrap();
    let vocab = crate::ontology::load_builtin_vocabulary();
    let doc = crate::ttl::parse_ttl(&out.ttl).unwrap();
    let store = crate::ttl::doc_to_store(&doc, &vocab).unwrap();
    assert!(!store.validate().has_errors());
    let wf = crate::ttl::triples_to_workflow(&doc, &vocab).unwrap();
    assert!(!crate::workflow::validate_workflow(&wf).has_errors());
    assert!(out.ttl.contains("has_vector_value"));
}

#[test]
fn config_round_trips_through_toml() {
    let config = CampaignConfig::default();
    let text = toml::to_string(&config).unwrap();
    let back: CampaignConfig = toml::from_str(&text).unwrap();
    assert_eq!(back, config);
    let partial: CampaignConfig = toml::from_str("seed = 4\nepsilon = inf\n[cluster]\nnodes = 2\n").unwrap();
    assert_eq!(partial.seed, 4);
    assert!(partial.epsilon.is_infinite());
    assert_eq!(partial.cluster.nodes, 2);
    assert_eq!(partial.cluster.cores_per_node, 8);
    assert!(toml::from_str::<CampaignConfig>("sede = 4\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_coefficients_match_finite_differences(
        c in prop::collection::vec(-2.0f64..2.0, 3),
        t in 0.8f64..2.5,
        rho in 0.05f64..1.0,
    ) {
        let eos = Eos::new(EosForm::default_form(), c).unwrap();
        let d = truth_derivs(sp(t, rho), &eos, &DEFAULT_DERIVS);
        let scale: f64 = eos.coefficients.iter().map(|x| x.abs()).sum::<f64>().max(1e-3);
        for e in &d.entries {
            for h in [2e-4, 1e-4] {
                let fd = fd_anm(&eos, e.n, e.m, 1.0 / t, rho, h);
                prop_assert!((fd - e.value).abs() <= 1e-6 * e.value.abs().max(scale * 1e-2));
            }
        }
    }

    #[test]
    fn noiseless_fit_is_unbiased(c in prop::collection::vec(-2.0f64..2.0, 3)) {
        prop_assume!(c.iter().all(|x| x.abs() > 1e-3));
        let eos = Eos::new(EosForm::default_form(), c).unwrap();
        let input = create_eos_input_from_results(&exact_results(&eos, &[1.0, 1.6, 2.4], &[0.15, 0.5, 0.95])).unwrap();
        let fit = fit_vle_curve(&input, &eos.form).unwrap();
        for (a, b) in fit.coefficients.iter().zip(&eos.coefficients) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }
}
