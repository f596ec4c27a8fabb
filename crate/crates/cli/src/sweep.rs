use std::path::Path;

use mdlab_core::experiments::{
    check_claim1, check_claim2, check_claim3, gauss_divergence, run_sweep, BlowupFit, Claim1Report,
    Claim2Verdict, GaussSeries, SweepResults,
};
use mdlab_core::initial_data::PotentialMode;
use mdlab_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, RunConfig};
use crate::failure::{abort, config, Failure};
use crate::output::{num, read_json, OutDir};

/// Test function with `phi(0) = 1` supported in `(-1/2, 1/2)`.
fn peaked(x: f64) -> f64 {
    if x.abs() < 0.5 {
        (1.0 - 1.0 / (1.0 - 4.0 * x * x)).exp()
    } else {
        0.0
    }
}

/// Test function vanishing near the origin, supported in `(0.2, 0.8)`.
fn off_centre(x: f64) -> f64 {
    let r = (x - 0.5) / 0.3;
    if r.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

const GAUSS_SLOPE_TOL: f64 = 0.05;
const GAUSS_SETTLE_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussVerdict {
    pub peaked: GaussSeries,
    pub peaked_pass: bool,
    pub off_centre: GaussSeries,
    /// The last increment is below the settle tolerance.
    pub off_centre_pass: bool,
}

impl GaussVerdict {
    fn compute(eps_list: &[f64]) -> Result<Self, Error> {
        let peaked = gauss_divergence(eps_list, &peaked, (-0.5, 0.5))?;
        let off = gauss_divergence(eps_list, &off_centre, (0.2, 0.8))?;
        let last = off.increments.last().copied().unwrap_or(0.0).abs();
        Ok(GaussVerdict {
            peaked_pass: peaked.slope_error() < GAUSS_SLOPE_TOL,
            off_centre_pass: last < GAUSS_SETTLE_TOL,
            peaked,
            off_centre: off,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub claim1: Option<Claim1Report>,
    pub claim2: Option<Vec<Claim2Verdict>>,
    pub claim3: Option<BlowupFit>,
    pub gauss: Option<GaussVerdict>,
}

impl Verdicts {
    pub fn pass(&self) -> bool {
        self.claim1.as_ref().is_none_or(Claim1Report::pass)
            && self.claim2.as_ref().is_none_or(|v| v.iter().all(|c| c.pass))
            && self.claim3.as_ref().is_none_or(BlowupFit::pass)
            && self.gauss.as_ref().is_none_or(|g| g.peaked_pass && g.off_centre_pass)
    }

    fn failed(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.claim1.as_ref().is_some_and(|c| !c.pass()) {
            out.push("claim1");
        }
        if self.claim2.as_ref().is_some_and(|v| v.iter().any(|c| !c.pass)) {
            out.push("claim2");
        }
        if self.claim3.as_ref().is_some_and(|c| !c.pass()) {
            out.push("claim3");
        }
        if self.gauss.as_ref().is_some_and(|g| !(g.peaked_pass && g.off_centre_pass)) {
            out.push("gauss");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub experiments: Vec<Experiment>,
    pub eps_list: Vec<f64>,
    pub verdicts: Verdicts,
    pub pass: bool,
}

/// Verdicts from persisted runs; `results` is `None` when only the Gauss
/// pairing was selected.
pub fn verdicts(
    experiments: &[Experiment],
    eps_list: &[f64],
    results: Option<&SweepResults>,
) -> Result<Verdicts, Error> {
    let needs = |e| experiments.contains(&e);
    let runs = || results.ok_or_else(|| Error::Precondition("verdict needs sweep runs".into()));
    Ok(Verdicts {
        claim1: needs(Experiment::Claim1)
            .then(|| runs().and_then(|r| check_claim1(r, r.plan.t_max)))
            .transpose()?,
        claim2: needs(Experiment::Claim2)
            .then(|| runs().and_then(|r| check_claim2(r, r.plan.t_max)))
            .transpose()?,
        claim3: needs(Experiment::Claim3)
            .then(|| runs().and_then(|r| check_claim3(r, &r.plan.probes)))
            .transpose()?,
        gauss: needs(Experiment::Gauss).then(|| GaussVerdict::compute(eps_list)).transpose()?,
    })
}

fn guard(cfg: &RunConfig, experiments: &[Experiment], windowed: bool) -> Result<(), Failure> {
    let t = cfg.t_max;
    for e in experiments {
        match e {
            Experiment::Claim2 if 6.0 * (cfg.mass + 1.0) * t >= 1.0 => {
                return Err(Failure::Config(format!(
                    "claim2 needs 6 (M + 1) T < 1, got {}",
                    6.0 * (cfg.mass + 1.0) * t
                )))
            }
            Experiment::Claim1 | Experiment::Claim2 if windowed => {
                return Err(Failure::Config(format!(
                    "{e:?} needs the full cone over [-1, 1]; drop grid_policy.window"
                )))
            }
            Experiment::Claim3 if cfg.potential_mode != PotentialMode::Zero => {
                return Err(Failure::Config("claim3 needs potential_mode \"zero\"".into()))
            }
            Experiment::Claim3 | Experiment::Gauss if cfg.eps_values().len() < 2 => {
                return Err(Failure::Config(format!("{e:?} fits a slope and needs at least two eps")))
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<String, Failure> {
    let plan = cfg.sweep_plan()?;
    let experiments = cfg
        .experiments
        .clone()
        .filter(|e| !e.is_empty())
        .ok_or_else(|| Failure::Config("sweep needs a non-empty `experiments` list".into()))?;
    guard(cfg, &experiments, plan.grid.window.is_some())?;

    let needs_runs = experiments.iter().any(|e| *e != Experiment::Gauss);
    let results = if needs_runs {
        Some(run_sweep(&plan, cfg.potential_mode).map_err(|e| match e {
            Error::RunAborted { .. } => abort(e),
            other => config(other),
        })?)
    } else {
        None
    };
    let verdicts = verdicts(&experiments, &plan.eps_list, results.as_ref()).map_err(config)?;

    let mut dir = OutDir::create(out, &cfg.hash())?;
    if let Some(results) = &results {
        for (k, run) in results.runs.iter().enumerate() {
            let notes = [("eps", num(run.eps)), ("h", num(run.h))];
            dir.diagnostics(&format!("run_{k:02}_diagnostics.csv"), &notes, plan.dim, &run.diagnostics)?;
        }
        for (i, &(t, x)) in plan.probes.iter().enumerate() {
            let header = ["log_inv_eps".to_string(), "a0".into()];
            let rows = results.runs.iter().map(|r| vec![num(-r.eps.ln()), num(r.probes[i].a[0])]);
            let notes = [("probe_t", num(t)), ("probe_x", num(x))];
            dir.csv(&format!("plot_a0_probe_{i:02}.csv"), &notes, &header, rows)?;
        }
        dir.json("results.json", "sweep-results", results)?;
    }
    if let Some(g) = &verdicts.gauss {
        let header = ["log_inv_eps".to_string(), "pairing_peaked".into(), "pairing_off_centre".into()];
        let rows = (0..g.peaked.eps.len())
            .map(|k| vec![num(-g.peaked.eps[k].ln()), num(g.peaked.pairing[k]), num(g.off_centre.pairing[k])]);
        dir.csv("plot_gauss_pairing.csv", &[], &header, rows)?;
    }
    let pass = verdicts.pass();
    let failed = verdicts.failed();
    let summary = SweepSummary {
        experiments,
        eps_list: plan.eps_list.clone(),
        verdicts,
        pass,
    };
    dir.json("summary.json", "sweep-summary", &summary)?;
    if pass {
        Ok(format!("sweep over {} eps: all verdicts pass", plan.eps_list.len()))
    } else {
        Err(Failure::Verdict(format!("failing: {}", failed.join(", "))))
    }
}

/// Recomputes the verdicts in `summary.json` from `results.json`.
pub fn recheck(dir: &Path) -> Result<String, Failure> {
    let summary = read_json::<SweepSummary>(&dir.join("summary.json"))?;
    let results_path = dir.join("results.json");
    let results = if results_path.exists() {
        let r = read_json::<SweepResults>(&results_path)?;
        if r.config_hash != summary.config_hash {
            return Err(Failure::Verdict("results.json and summary.json come from different configs".into()));
        }
        Some(r.body)
    } else {
        None
    };
    let again = verdicts(&summary.body.experiments, &summary.body.eps_list, results.as_ref()).map_err(config)?;
    if again != summary.body.verdicts || again.pass() != summary.body.pass {
        return Err(Failure::Verdict("recomputed sweep verdicts differ from summary.json".into()));
    }
    Ok(format!("sweep verdicts reproduced (pass = {})", summary.body.pass))
}
