mod common;

use mdlab_core::dirac_algebra::Dim;
use mdlab_core::experiments::{
    blowup_bound_exact, blowup_bound_printed, check_claim1, check_claim2, check_claim3, claim1_threshold,
    gauss_divergence, run_sweep, GridPolicy, SweepPlan,
};
use mdlab_core::initial_data::{CutoffSpec, PotentialMode};
use mdlab_core::Error;

fn small_plan(dim: Dim, mass: f64) -> SweepPlan {
    SweepPlan {
        dim,
        mass,
        eps_list: vec![0.1, 0.05, 0.025],
        t_max: 0.05,
        grid: GridPolicy::default(),
        probes: vec![(0.04, 0.0), (0.025, 0.0125)],
        cutoff: CutoffSpec::default(),
    }
}

#[test]
fn sweep_records_every_eps_deterministically() {
    let plan = small_plan(Dim::Two, 0.0);
    let a = run_sweep(&plan, PotentialMode::Zero).unwrap();
    assert_eq!(a.runs.len(), 3);
    assert_eq!(a.runs.iter().map(|r| r.eps).collect::<Vec<_>>(), plan.eps_list);
    let b = run_sweep(&plan, PotentialMode::Zero).unwrap();
    assert_eq!(a, b);
    for run in &a.runs {
        assert!(run.h <= run.eps / 16.0);
        assert_eq!(run.probes.len(), 2);
    }
}

#[test]
fn empty_sweep_is_rejected() {
    let mut plan = small_plan(Dim::Two, 0.0);
    plan.eps_list.clear();
    assert!(matches!(run_sweep(&plan, PotentialMode::Zero), Err(Error::InvalidParameter(_))));
}

#[test]
fn transverse_bound_small_campaign() {
    let plan = small_plan(Dim::Two, 1.0);
    let results = run_sweep(&plan, PotentialMode::Zero).unwrap();
    let c1 = check_claim1(&results, plan.t_max).unwrap();
    assert!(c1.applicable && c1.pass());
    for run in &results.runs {
        assert_eq!(run.diagnostics[0].sup_transverse_cone, vec![0.0]);
    }
    let scan = claim1_threshold(&results.runs[0], Dim::Two).unwrap();
    assert!(!scan.exceeded);
    assert_eq!(scan.largest_t, scan.scanned_to);
    assert!(scan.running_sup.windows(2).all(|w| w[1].1 >= w[0].1));
    let one = run_sweep(&small_plan(Dim::One, 0.0), PotentialMode::Zero).unwrap();
    assert!(!check_claim1(&one, 0.05).unwrap().applicable);
}

#[test]
fn threshold_scan_on_longer_run() {
    let mut plan = small_plan(Dim::Two, 1.0);
    plan.eps_list = vec![0.05];
    plan.t_max = 0.6;
    plan.probes.clear();
    let results = run_sweep(&plan, PotentialMode::Zero).unwrap();
    let scan = claim1_threshold(&results.runs[0], Dim::Two).unwrap();
    let sups: Vec<f64> = scan.running_sup.iter().map(|p| p.1).collect();
    assert!(sups.last().unwrap() > &sups[sups.len() / 10]);
    if scan.exceeded {
        assert!(scan.largest_t < 0.6);
    } else {
        assert_eq!(scan.largest_t, scan.scanned_to);
    }
}

#[test]
fn spinor_lower_bound() {
    let plan = small_plan(Dim::Two, 0.0);
    let results = run_sweep(&plan, PotentialMode::Zero).unwrap();
    let verdicts = check_claim2(&results, plan.t_max).unwrap();
    assert!(verdicts.iter().all(|v| v.pass));
    // transport in d = 1 keeps the ratio near 1, far above one half
    let one = run_sweep(&small_plan(Dim::One, 0.0), PotentialMode::Zero).unwrap();
    for v in check_claim2(&one, 0.05).unwrap() {
        assert!((v.min_ratio - 1.0).abs() < 1e-6, "{v:?}");
    }
}

#[test]
fn spinor_lower_bound_guard() {
    let mut plan = small_plan(Dim::Two, 1.0);
    plan.eps_list = vec![0.1];
    plan.t_max = 0.4;
    plan.probes.clear();
    let results = run_sweep(&plan, PotentialMode::Zero).unwrap();
    assert!(matches!(check_claim2(&results, 0.4), Err(Error::Precondition(_))));
}

#[test]
fn growth_fit_on_small_campaign() {
    let plan = small_plan(Dim::Two, 0.0);
    let results = run_sweep(&plan, PotentialMode::Zero).unwrap();
    let fit = check_claim3(&results, &plan.probes).unwrap();
    assert!(fit.pass(), "{fit:?}");
    assert_eq!(fit.recompute(), fit);
    assert!(fit.c_q > 0.0);
    let constrained = run_sweep(&plan, PotentialMode::Constrained).unwrap();
    assert!(matches!(check_claim3(&constrained, &plan.probes), Err(Error::Precondition(_))));
    assert!(check_claim3(&results, &[(0.02, 0.03)]).is_err());
}

#[test]
fn printed_bound_by_direct_evaluation() {
    let (t, x, eps) = (0.04, 0.0, 1e-3f64);
    let s = x + t;
    let direct = s / 8.0 * (-eps.ln()) + (eps + s) * ((eps + s).ln() - 1.0) / 8.0 - 0.5 * eps * (eps.ln() - 1.0);
    assert!((blowup_bound_printed(t, x, eps) - direct).abs() < 1e-15);
    let integral = {
        // (1/4) int_0^{s/2} int_s'^{s - s'} dy / (eps + y - s')
        let inner = |r: f64| ((eps + s - 2.0 * r) / eps).ln();
        0.25 * common::adaptive_gl(&inner, 0.0, s / 2.0, 1e-15)
    };
    assert!((blowup_bound_exact(t, x, eps) - integral).abs() < 1e-12);
}

#[test]
fn windowed_runs_reproduce_full_probes() {
    let plan = small_plan(Dim::Two, 1.0);
    let full = run_sweep(&plan, PotentialMode::Zero).unwrap();
    let mut w = plan.clone();
    w.grid.window = Some(0.1);
    let win = run_sweep(&w, PotentialMode::Zero).unwrap();
    for (a, b) in full.runs.iter().zip(&win.runs) {
        for (p, q) in a.probes.iter().zip(&b.probes) {
            assert!((p.a[0] - q.a[0]).abs() < 1e-13);
        }
    }
    assert!(matches!(check_claim1(&win, 0.05), Err(Error::Precondition(_))));
    let mut bad = w.clone();
    bad.probes.push((0.05, 0.049));
    assert!(bad.validate().is_err());
}

fn bump(x: f64) -> f64 {
    if x.abs() < 0.5 {
        (1.0 - 1.0 / (1.0 - 4.0 * x * x)).exp()
    } else {
        0.0
    }
}

#[test]
fn gauss_pairing_matches_oracle() {
    let eps = [0.1, 0.01, 0.001, 1e-4];
    let series = gauss_divergence(&eps, &bump, (-0.5, 0.5)).unwrap();
    for (e, p) in eps.iter().zip(&series.pairing) {
        let exact = common::gauss_pairing_oracle(&bump, -0.5, 0.5, *e);
        assert!((p - exact).abs() < 1e-9 * exact, "{e}: {p} vs {exact}");
    }
    assert_eq!(series.expected_slope, 2.0);
}

#[test]
fn gauss_increments_approach_two_log_two() {
    let eps: Vec<f64> = (0..8).map(|k| 1e-2 / 2f64.powi(k)).collect();
    let series = gauss_divergence(&eps, &bump, (-0.5, 0.5)).unwrap();
    let target = 2.0 * std::f64::consts::LN_2;
    let dev: Vec<f64> = series.increments.iter().map(|d| (d - target).abs()).collect();
    assert!(dev.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(dev.last().unwrap() < &1e-6, "{dev:?}");
}

#[test]
fn gauss_pairing_away_from_origin_converges() {
    let phi = |x: f64| bump((x - 0.5) * 1.6);
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let series = gauss_divergence(&eps, &phi, (0.1875, 0.8125)).unwrap();
    assert!(series.increments.iter().all(|d| d.abs() < 0.05));
    assert!(series.increments.last().unwrap().abs() < 1e-5);
    assert!(gauss_divergence(&eps, &phi, (0.2, 1.2)).is_err());
}
