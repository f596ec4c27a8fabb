use std::path::Path;

use mdlab_core::initial_data::{hs_norm, lp_norm, profile_samples};
use serde::Serialize;

use crate::config::{NormsSection, RunConfig};
use crate::failure::{config, Failure};
use crate::output::{num, OutDir};

#[derive(Debug, Serialize)]
struct NormRow {
    eps: f64,
    /// `(p, ||chi f_eps||_p)`
    lp: Vec<(f64, f64)>,
    /// `(s, ||chi f_eps||_{H^s})`
    hs: Vec<(f64, f64)>,
    charge: f64,
}

#[derive(Debug, Serialize)]
struct NormsReport {
    p: Vec<f64>,
    s: Vec<f64>,
    rows: Vec<NormRow>,
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<String, Failure> {
    let grid = cfg.grid_spec()?;
    let section = cfg.norms.clone().unwrap_or_default();
    let NormsSection { p, s } = section;
    let mut dir = OutDir::create(out, &cfg.hash())?;
    let mut rows = Vec::new();
    for (k, &eps) in cfg.eps_values().iter().enumerate() {
        let prof = profile_samples(eps, &grid, &cfg.cutoff).map_err(config)?;
        let lp = p
            .iter()
            .map(|&q| lp_norm(&prof, q, &grid).map(|v| (q, v)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(config)?;
        let hs = s
            .iter()
            .map(|&q| hs_norm(&prof, q, &grid).map(|v| (q, v)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(config)?;
        let charge = lp_norm(&prof, 2.0, &grid).map_err(config)?.powi(2);
        let header = ["x".to_string(), "profile".into()];
        let samples = (0..grid.nodes()).map(|j| vec![num(grid.x(j)), num(prof[j])]);
        dir.csv(&format!("profile_{k:02}.csv"), &[("eps", num(eps))], &header, samples)?;
        rows.push(NormRow { eps, lp, hs, charge });
    }
    let summary = rows
        .iter()
        .map(|r| format!("eps {:.3e}: charge {:.6}", r.eps, r.charge))
        .collect::<Vec<_>>()
        .join("; ");
    dir.json("norms.json", "norms", &NormsReport { p, s, rows })?;
    Ok(summary)
}
