use std::path::Path;

use mdlab_core::cone_solver::{
    cone_integral, density, evolve_from, ConeRegion, DiagnosticSample, EvolveOptions, InitialState, ProbeSample,
};
use mdlab_core::initial_data::GridSpec;
use serde::Serialize;

use crate::config::RunConfig;
use crate::failure::{abort, config, Failure};
use crate::output::{num, OutDir};

#[derive(Debug, Serialize)]
struct OracleRow {
    t: f64,
    x: f64,
    a0: f64,
    half_cone_charge: f64,
    deviation: f64,
}

/// `A_0` starts from zero data in both potential modes, so at every probe it
/// equals half the charge in the backward cone.
#[derive(Debug, Serialize)]
struct OracleReport {
    rows: Vec<OracleRow>,
    max_deviation: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    grid: GridSpec,
    eps: f64,
    h: f64,
    steps: usize,
    charge_drift: f64,
    final_diagnostics: &'a DiagnosticSample,
    probes: &'a [ProbeSample],
    oracle: Option<OracleReport>,
    files: Vec<String>,
}

pub fn run(cfg: &RunConfig, out: &Path, oracle: bool) -> Result<String, Failure> {
    let eps = cfg.single_eps()?;
    let fam = cfg.family(eps)?;
    let grid = cfg.grid_spec()?;
    let init = InitialState::from_family(&fam, &grid).map_err(config)?;

    let mut probes = cfg.probes.clone().unwrap_or_default();
    if oracle && probes.is_empty() {
        probes.push((grid.t_max, 0.0));
    }
    for &(t, x) in &probes {
        grid.level_of(t).map_err(config)?;
        grid.node_of(x).map_err(config)?;
        if oracle && !(t > 0.0 && (x - t).abs() < grid.half_width && (x + t).abs() < grid.half_width) {
            return Err(Failure::Config(format!("oracle probe ({t}, {x}) needs its cone inside the grid")));
        }
    }
    let snapshot_times = cfg.snapshot_times.clone().unwrap_or_else(|| vec![0.0, grid.t_max]);
    for &t in &snapshot_times {
        grid.level_of(t).map_err(config)?;
    }
    let record_window = oracle.then(|| {
        let lo = probes.iter().map(|p| p.1 - p.0).fold(f64::INFINITY, f64::min);
        let hi = probes.iter().map(|p| p.1 + p.0).fold(f64::NEG_INFINITY, f64::max);
        let pad = 3.0 * grid.h();
        ((lo - pad).max(-grid.half_width), (hi + pad).min(grid.half_width))
    });
    let opts = EvolveOptions {
        snapshot_times,
        record_window,
        probes: probes.clone(),
        ..Default::default()
    };
    let traj = evolve_from(&init, &opts).map_err(abort)?;

    let oracle_report = if oracle {
        let mut rows = Vec::new();
        for p in &traj.probes {
            let integral = cone_integral(&traj, &density, &ConeRegion::with_vertex(p.t, p.x)).map_err(abort)?;
            rows.push(OracleRow {
                t: p.t,
                x: p.x,
                a0: p.a[0],
                half_cone_charge: 0.5 * integral,
                deviation: (p.a[0] - 0.5 * integral).abs(),
            });
        }
        let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
        Some(OracleReport { rows, max_deviation })
    } else {
        None
    };

    let mut dir = OutDir::create(out, &cfg.hash())?;
    let eps_note = [("eps", num(eps))];
    dir.diagnostics("diagnostics.csv", &eps_note, traj.dim, &traj.diagnostics)?;
    let potentials = traj.dim.potentials();
    for snap in &traj.snapshots {
        let mut header = vec!["x".to_string(), "u_density".into(), "v_density".into()];
        header.extend((0..potentials).map(|mu| format!("a{mu}")));
        let rows = (0..grid.nodes()).map(|j| {
            let mut row = vec![num(grid.x(j)), num(snap.psi[j].norm_u_sqr()), num(snap.psi[j].norm_v_sqr())];
            row.extend(snap.a.iter().map(|a| num(a[j])));
            row
        });
        let level = grid.level_of(snap.t).expect("snapshots sit on levels");
        dir.csv(&format!("snapshot_{level:06}.csv"), &[("t", num(snap.t))], &header, rows)?;
    }

    let drift = traj.charge_drift();
    let summary = match &oracle_report {
        Some(o) => format!("charge drift {drift:.3e}, oracle max deviation {:.3e}", o.max_deviation),
        None => format!("charge drift {drift:.3e}"),
    };
    let mut files = dir.written().to_vec();
    files.push("manifest.json".into());
    let manifest = Manifest {
        config: cfg,
        grid,
        eps,
        h: grid.h(),
        steps: grid.steps(),
        charge_drift: drift,
        final_diagnostics: traj.final_diagnostics(),
        probes: &traj.probes,
        oracle: oracle_report,
        files,
    };
    dir.json("manifest.json", "simulate", &manifest)?;
    Ok(summary)
}
