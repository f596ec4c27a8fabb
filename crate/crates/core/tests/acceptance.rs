//! Acceptance criteria 1-11, one PASS/FAIL line each. Runs as a plain
//! binary (`harness = false`) so the lines are always printed.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use mdlab_core::cone_solver::{
    evolve, evolve_from, picard_solve, EvolveOptions, InitialState, PicardOptions, Trajectory,
};
use mdlab_core::dirac_algebra::{gamma_matrices, verify_clifford, Dim};
use mdlab_core::estimates::{nullform_refinement, nullform_suite, NullFormInstance, NULLFORM_CELLS};
use mdlab_core::experiments::{
    check_claim1, check_claim2, check_claim3, gauss_divergence, run_sweep, SweepPlan,
};
use mdlab_core::initial_data::{profile_samples, CutoffSpec, DataFamily, GridSpec, PotentialMode};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, title: &str, start: Instant, out: Outcome) -> bool {
    println!(
        "criterion {id:>2} {:<4} {title}: {} [{:.1?}]",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        start.elapsed()
    );
    out.pass
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn clifford() -> Outcome {
    let mut worst = 0.0_f64;
    let mut ok = true;
    let mut elapsed = Duration::ZERO;
    for d in 1..=3 {
        let g = gamma_matrices(d).unwrap();
        let t = Instant::now();
        let r = verify_clifford(&g);
        elapsed += t.elapsed();
        worst = r.checks.iter().fold(worst, |m, c| m.max(c.deviation));
        ok &= r.passed();
    }
    Outcome {
        pass: ok && worst == 0.0 && elapsed < Duration::from_millis(1),
        detail: format!("max deviation {worst:e}, verify time {elapsed:?}"),
    }
}

fn final_fields(traj: &Trajectory) -> (Vec<[f64; 8]>, Vec<Vec<f64>>) {
    let snap = traj.snapshot(traj.grid.t_max).unwrap();
    let psi = snap
        .psi
        .iter()
        .map(|s| {
            [
                s.u[0].re, s.u[0].im, s.u[1].re, s.u[1].im, s.v[0].re, s.v[0].im, s.v[1].re, s.v[1].im,
            ]
        })
        .collect();
    (psi, snap.a.clone())
}

fn scheme_order() -> Outcome {
    // manufactured: zero data, unit source on every potential gives t^2 / 2
    let grid = GridSpec::new(2.0, 400, 0.5).unwrap();
    let init = InitialState::zero(Dim::Two, 0.0, &grid).unwrap();
    let opts = EvolveOptions {
        snapshot_times: vec![0.5],
        wave_forcing: Some(Arc::new(|_, _, _| 1.0)),
        boundary_guard: false,
        ..Default::default()
    };
    let traj = evolve_from(&init, &opts).unwrap();
    let snap = traj.snapshot(0.5).unwrap();
    let margin = grid.steps() + 1;
    let manufactured = snap
        .a
        .iter()
        .flat_map(|f| f[margin..grid.nodes() - margin].iter())
        .map(|v| (v - 0.125).abs())
        .fold(0.0, f64::max);

    let fam = DataFamily::new(Dim::Two, 0.1, 1.0, PotentialMode::Zero).unwrap();
    let run = |n: usize| {
        let g = GridSpec::new(2.56, n, 0.1).unwrap();
        let o = EvolveOptions {
            snapshot_times: vec![0.1],
            ..Default::default()
        };
        final_fields(&evolve(&fam, &g, &o).unwrap())
    };
    let reference_n = 32768;
    let (ref_psi, ref_a) = run(reference_n);
    let mut errors = Vec::new();
    for n in [1024, 2048, 4096, 8192] {
        let stride = reference_n / n;
        let (psi, a) = run(n);
        let mut e = 0.0_f64;
        for j in 0..=n {
            for k in 0..8 {
                e = e.max((psi[j][k] - ref_psi[j * stride][k]).abs());
            }
            for mu in 0..a.len() {
                e = e.max((a[mu][j] - ref_a[mu][j * stride]).abs());
            }
        }
        errors.push(e);
    }
    let ord = orders(&errors);
    Outcome {
        pass: manufactured < 1e-12 && ord.iter().all(|&p| p >= 1.9),
        detail: format!(
            "t^2/2 error {manufactured:.1e}; Richardson errors {} orders {}",
            fmt(&errors),
            fmt(&ord)
        ),
    }
}

fn charge_conservation() -> Outcome {
    let fam = DataFamily::new(Dim::Two, 0.1, 1.0, PotentialMode::Zero).unwrap();
    let drifts: Vec<f64> = [2048, 4096, 8192]
        .iter()
        .map(|&n| {
            let g = GridSpec::new(2.56, n, 0.25).unwrap();
            evolve(&fam, &g, &EvolveOptions::default()).unwrap().charge_drift()
        })
        .collect();
    let ratios: Vec<f64> = drifts.windows(2).map(|w| w[0] / w[1]).collect();
    Outcome {
        pass: drifts[2] <= 1e-6 && ratios.iter().all(|r| (3.5..=4.5).contains(r)),
        detail: format!("drift {} reduction {}", fmt(&drifts), fmt(&ratios)),
    }
}

fn transport_exactness() -> Outcome {
    let fam = DataFamily::new(Dim::One, 0.1, 0.0, PotentialMode::Zero).unwrap();
    let mut consts = Vec::new();
    let mut vmax = 0.0_f64;
    let mut ok = true;
    for n in [1024, 2048, 4096] {
        let g = GridSpec::new(2.56, n, 0.25).unwrap();
        let o = EvolveOptions {
            snapshot_times: vec![0.25],
            ..Default::default()
        };
        let traj = evolve(&fam, &g, &o).unwrap();
        let snap = traj.snapshot(0.25).unwrap();
        let prof = profile_samples(0.1, &g, &CutoffSpec::default()).unwrap();
        let shift = g.level_of(0.25).unwrap();
        let mut dev = 0.0_f64;
        for (j, s) in snap.psi.iter().enumerate() {
            let exact = if j >= shift { prof[j - shift] } else { 0.0 };
            dev = dev.max((s.norm_u_sqr().sqrt() - exact).abs());
            vmax = vmax.max(s.norm_v_sqr().sqrt());
        }
        let h = g.h();
        consts.push(dev / (h * h));
        ok &= dev <= h * h;
    }
    Outcome {
        pass: ok && vmax <= 1e-12,
        detail: format!("dev / h^2 {} (bound 1), sup|v| {vmax:.1e}", fmt(&consts)),
    }
}

fn gauge_propagation() -> Outcome {
    let constrained = DataFamily::new(Dim::Two, 0.1, 1.0, PotentialMode::Constrained).unwrap();
    let residual = |fam: &DataFamily, n: usize| {
        let g = GridSpec::new(2.56, n, 0.1).unwrap();
        let traj = evolve(fam, &g, &EvolveOptions::default()).unwrap();
        traj.diagnostics.iter().map(|d| d.gauge_residual).fold(0.0, f64::max)
    };
    let res: Vec<f64> = [1024, 2048, 4096].iter().map(|&n| residual(&constrained, n)).collect();
    let reference = residual(&constrained, 8192);
    let ord = orders(&res);
    let zero = residual(&DataFamily::new(Dim::Two, 0.1, 1.0, PotentialMode::Zero).unwrap(), 4096);
    Outcome {
        pass: ord.iter().all(|&p| p >= 0.9) && res[2] <= 10.0 * reference && zero >= 0.1,
        detail: format!(
            "residual {} orders {} reference {reference:.2e}; zero data {zero:.3}",
            fmt(&res),
            fmt(&ord)
        ),
    }
}

fn null_form() -> Outcome {
    let suite = nullform_suite(1000, 42).unwrap();
    let spacing = 4.0 / NULLFORM_CELLS as f64;
    let mut ok = suite.all_pass();
    let mut trend = Vec::new();
    for seed in [20, 23, 38] {
        let rows = nullform_refinement(&NullFormInstance::random(seed, spacing), NULLFORM_CELLS).unwrap();
        let ratios: Vec<f64> = rows.iter().map(|r| r.report.ratio()).collect();
        let slacks: Vec<f64> = rows.iter().map(|r| r.report.slack_factor).collect();
        ok &= rows.iter().all(|r| r.report.pass);
        ok &= slacks.windows(2).all(|w| w[1] < w[0] && w[1] >= 1.0);
        ok &= (ratios[2] - ratios[1]).abs() <= (ratios[1] - ratios[0]).abs() + 1e-12;
        trend.push(format!("seed {seed}: ratio {} slack {}", fmt(&ratios), fmt(&slacks)));
    }
    Outcome {
        pass: ok,
        detail: format!(
            "1000 seeded instances, failing seeds {:?}, worst ratio {:.3}; {}",
            suite.failing_seeds,
            suite.worst_ratio(),
            trend.join("; ")
        ),
    }
}

fn claims_1_and_2() -> (Outcome, Outcome) {
    let mut ok1 = true;
    let mut ok2 = true;
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for (dim, m) in [(Dim::Two, 0.0), (Dim::Two, 1.0), (Dim::Three, 0.0), (Dim::Three, 1.0)] {
        let plan = SweepPlan::default_campaign(dim, m);
        let results = run_sweep(&plan, PotentialMode::Zero).unwrap();
        let c1 = check_claim1(&results, plan.t_max).unwrap();
        let c2 = check_claim2(&results, plan.t_max).unwrap();
        ok1 &= c1.applicable && c1.pass() && c1.verdicts.len() == plan.eps_list.len();
        ok2 &= c2.iter().all(|v| v.pass) && c2.len() == plan.eps_list.len();
        let worst = c1
            .verdicts
            .iter()
            .map(|v| v.sup_sum.unwrap_or(v.sup_single))
            .fold(0.0, f64::max);
        let min_ratio = c2.iter().map(|v| v.min_ratio).fold(f64::INFINITY, f64::min);
        d1.push(format!("d={dim} M={m}: {worst:.2e}"));
        d2.push(format!("d={dim} M={m}: {min_ratio:.4}"));
    }
    (
        Outcome {
            pass: ok1,
            detail: format!("largest transverse sup on K_T {}", d1.join(", ")),
        },
        Outcome {
            pass: ok2,
            detail: format!("min |psi|^2 / f_eps(x - t)^2 {} (threshold about 0.4)", d2.join(", ")),
        },
    )
}

fn blowup() -> Outcome {
    let probe = (0.04, 0.0);
    let fit_at = |refine: usize| {
        let mut plan = SweepPlan::blowup_campaign();
        plan.grid.refine = refine;
        let results = run_sweep(&plan, PotentialMode::Zero).unwrap();
        check_claim3(&results, &[probe]).unwrap().probes.remove(0)
    };
    let base = fit_at(1);
    let fine = fit_at(2);
    let change = (fine.slope - base.slope).abs() / base.slope;
    let above = base.above_printed.iter().all(|&b| b) && fine.above_printed.iter().all(|&b| b);
    let values: Vec<f64> = base.series.iter().map(|s| s.1).collect();
    Outcome {
        pass: above && base.slope >= 0.005 && change < 0.02,
        detail: format!(
            "A_0 {} vs bound {}; slope {:.5} (needs >= 0.005), change under doubling {:.2e}",
            fmt(&values),
            fmt(&base.bound_printed),
            base.slope,
            change
        ),
    }
}

fn gauss_law() -> Outcome {
    let bump = |x: f64| {
        if x.abs() < 0.5 {
            (1.0 - 1.0 / (1.0 - 4.0 * x * x)).exp()
        } else {
            0.0
        }
    };
    let off_centre = |x: f64| {
        let r = (x - 0.5) / 0.3;
        if r.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        }
    };
    let eps: Vec<f64> = (0..6).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect();
    let grows = gauss_divergence(&eps, &bump, (-0.5, 0.5)).unwrap();
    let oracle_dev = eps
        .iter()
        .zip(&grows.pairing)
        .map(|(&e, p)| (p - common::gauss_pairing_oracle(&bump, -0.5, 0.5, e)).abs() / p)
        .fold(0.0, f64::max);
    let settles = gauss_divergence(&eps, &off_centre, (0.2, 0.8)).unwrap();
    let last = settles.increments.last().unwrap().abs();
    Outcome {
        pass: grows.slope_error() < 0.05 && oracle_dev < 1e-8 && last < 1e-6,
        detail: format!(
            "slope {:.4} vs 2 (oracle deviation {oracle_dev:.1e}); phi(0) = 0 last increment {last:.1e}",
            grows.slope
        ),
    }
}

fn picard_agreement() -> Outcome {
    let fam = DataFamily::new(Dim::Two, 0.1, 0.0, PotentialMode::Zero).unwrap();
    let grid = GridSpec::new(2.56, 1024, 0.1).unwrap();
    let window = Some((-grid.half_width, grid.half_width));
    let opts = PicardOptions {
        record: EvolveOptions {
            record_window: window,
            ..Default::default()
        },
        ..Default::default()
    };
    let picard = picard_solve(&fam, &grid, &opts).unwrap();
    let stepped = evolve(
        &fam,
        &grid,
        &EvolveOptions {
            record_window: window,
            ..Default::default()
        },
    )
    .unwrap();
    let hp = picard.trajectory.history.as_ref().unwrap();
    let he = stepped.history.as_ref().unwrap();
    let mut diff = 0.0_f64;
    for (p, e) in hp.levels.iter().zip(&he.levels) {
        for (a, b) in p.psi.iter().zip(&e.psi) {
            diff = diff.max((*a - *b).density().sqrt());
        }
        for (fa, fb) in p.a.iter().zip(&e.a) {
            diff = fa.iter().zip(fb).fold(diff, |m, (x, y)| m.max((x - y).abs()));
        }
    }
    let h = grid.h();
    let bound = f64::max(5.0 * h * h, 10.0 * opts.tol);

    let coupled = DataFamily::new(Dim::Two, 0.1, 1.0, PotentialMode::Zero).unwrap();
    let decay = picard_solve(&coupled, &grid, &PicardOptions::default()).unwrap();
    let ratios = decay.ratios();
    let geometric = !ratios.is_empty() && ratios.iter().all(|&r| r < 0.5);
    let settled = picard.distances.last().copied().unwrap_or(f64::INFINITY) < opts.tol;
    Outcome {
        pass: diff <= bound && geometric && settled,
        detail: format!(
            "max difference {diff:.2e} (bound {bound:.2e}); M=0 distances {}; M=1 distances {} ratios {}",
            fmt(&picard.distances),
            fmt(&decay.distances),
            fmt(&ratios)
        ),
    }
}

fn main() {
    let mut all = true;
    let t = Instant::now();
    all &= report(1, "Clifford algebra", t, clifford());
    let t = Instant::now();
    let so = scheme_order();
    let so_time = t.elapsed();
    all &= report(
        2,
        "scheme order",
        t,
        Outcome {
            pass: so.pass && so_time < Duration::from_secs(60),
            detail: so.detail,
        },
    );
    let t = Instant::now();
    all &= report(3, "charge conservation", t, charge_conservation());
    let t = Instant::now();
    all &= report(4, "transport exactness", t, transport_exactness());
    let t = Instant::now();
    all &= report(5, "Lorenz gauge propagation", t, gauge_propagation());
    let t = Instant::now();
    let nf = null_form();
    let nf_time = t.elapsed();
    all &= report(
        6,
        "null-form estimate",
        t,
        Outcome {
            pass: nf.pass && nf_time < Duration::from_secs(120),
            detail: nf.detail,
        },
    );
    let t = Instant::now();
    let (c1, c2) = claims_1_and_2();
    all &= report(7, "transverse potential bound", t, c1);
    all &= report(8, "spinor lower bound", t, c2);
    let t = Instant::now();
    let b = blowup();
    let b_time = t.elapsed();
    all &= report(
        9,
        "logarithmic growth of A_0",
        t,
        Outcome {
            pass: b.pass && b_time < Duration::from_secs(600),
            detail: b.detail,
        },
    );
    let t = Instant::now();
    all &= report(10, "Gauss-law divergence", t, gauss_law());
    let t = Instant::now();
    all &= report(11, "solver cross-validation", t, picard_agreement());
    if !all {
        std::process::exit(1);
    }
}
