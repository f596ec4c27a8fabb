use std::path::Path;

use mdlab_core::cone_solver::{evolve_from, EvolveOptions, InitialState, Trajectory};
use mdlab_core::estimates::{
    check_bilinear_bound, check_bootstrap_bound, check_energy_inequality, check_gronwall_l1, energy_suite,
    nullform_refinement, nullform_suite, wave_suite, EstimateReport, NullFormInstance, RefinementRow,
    SuiteOutcome, WaveProblem, NULLFORM_CELLS, NULLFORM_HALF_WIDTH, WAVE_SPACING,
};
use mdlab_core::initial_data::GridSpec;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Suite};
use crate::failure::{abort, config, Failure};
use crate::output::{read_json, OutDir};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub suite: Suite,
    pub seed: Option<u64>,
    pub reports: Vec<EstimateReport>,
    pub failing_seeds: Vec<u64>,
    pub worst_ratio: f64,
}

impl SuiteEntry {
    fn new(suite: Suite, seed: Option<u64>, outcome: SuiteOutcome) -> Self {
        let worst_ratio = outcome.worst_ratio();
        SuiteEntry {
            suite,
            seed,
            reports: outcome.reports,
            failing_seeds: outcome.failing_seeds,
            worst_ratio,
        }
    }

    fn from_reports(suite: Suite, reports: Vec<EstimateReport>) -> Self {
        SuiteEntry {
            suite,
            seed: None,
            worst_ratio: reports.iter().map(EstimateReport::ratio).fold(0.0, f64::max),
            reports,
            failing_seeds: Vec::new(),
        }
    }

    fn pass(&self) -> bool {
        self.failing_seeds.is_empty() && self.reports.iter().all(|r| r.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub seed: u64,
    pub rows: Vec<RefinementRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteEntry>,
    pub refinement: Vec<Refinement>,
    pub pass: bool,
}

fn nullform_spacing() -> f64 {
    2.0 * NULLFORM_HALF_WIDTH / NULLFORM_CELLS as f64
}

#[derive(Serialize)]
#[serde(untagged)]
enum Replay {
    Energy { seed: u64, grid: GridSpec },
    Wave { seed: u64, problem: WaveProblem },
    Nullform { seed: u64, instance: NullFormInstance },
}

fn configured_run(cfg: &RunConfig, grid: &GridSpec, full_history: bool) -> Result<Trajectory, Failure> {
    let fam = cfg.family(cfg.single_eps()?)?;
    let init = InitialState::from_family(&fam, grid).map_err(config)?;
    let opts = EvolveOptions {
        record_window: full_history.then_some((-grid.half_width, grid.half_width)),
        ..Default::default()
    };
    evolve_from(&init, &opts).map_err(abort)
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<String, Failure> {
    let section = cfg
        .verify
        .as_ref()
        .ok_or_else(|| Failure::Config("verify needs a `verify` section".into()))?;
    if section.suites.is_empty() {
        return Err(Failure::Config("verify.suites is empty".into()));
    }
    let randomized = section.suites.iter().any(|s| s.randomized()) || !section.refinement_seeds.is_empty();
    let seed = match (randomized, cfg.seed) {
        (true, None) => return Err(Failure::Config("randomized suites need `seed` or --seed".into())),
        (_, s) => s,
    };
    if randomized && section.count == 0 {
        return Err(Failure::Config("verify.count must be positive".into()));
    }
    let needs_run = section.suites.iter().any(|s| s.needs_run());
    let needs_grid = needs_run || section.suites.contains(&Suite::Energy);
    let grid = if needs_grid { Some(cfg.grid_spec()?) } else { None };
    let rho = if section.suites.contains(&Suite::Bootstrap) {
        let rho = section
            .bootstrap_rho
            .ok_or_else(|| Failure::Config("bootstrap needs verify.bootstrap_rho".into()))?;
        let t = cfg.t_max;
        if 2.0 * (cfg.mass + 1.0) * t >= 1.0 {
            return Err(Failure::Config(format!("bootstrap needs 2 (M + 1) T < 1, got {}", 2.0 * (cfg.mass + 1.0) * t)));
        }
        if !(rho > 0.0 && rho < 1.0 - 2.0 * t) {
            return Err(Failure::Config(format!("bootstrap needs 0 < rho < 1 - 2T, got {rho}")));
        }
        Some(rho)
    } else {
        None
    };
    let traj = match &grid {
        Some(g) if needs_run => Some(configured_run(cfg, g, rho.is_some())?),
        _ => None,
    };

    let mut suites = Vec::new();
    let mut replays = Vec::new();
    for &suite in &section.suites {
        let entry = match suite {
            Suite::Energy => {
                let (g, s) = (grid.expect("energy uses the grid"), seed.expect("seeded"));
                let outcome = energy_suite(section.count, s, &g).map_err(abort)?;
                for &f in &outcome.failing_seeds {
                    replays.push(Replay::Energy { seed: f, grid: g });
                }
                SuiteEntry::new(suite, Some(s), outcome)
            }
            Suite::RunEnergy => SuiteEntry::from_reports(suite, vec![check_energy_inequality(traj.as_ref().expect("run"))]),
            Suite::Wave => {
                let s = seed.expect("seeded");
                let outcome = wave_suite(section.count, s).map_err(abort)?;
                for &f in &outcome.failing_seeds {
                    replays.push(Replay::Wave {
                        seed: f,
                        problem: WaveProblem::random(f, WAVE_SPACING),
                    });
                }
                SuiteEntry::new(suite, Some(s), outcome)
            }
            Suite::Nullform => {
                let s = seed.expect("seeded");
                let outcome = nullform_suite(section.count, s).map_err(abort)?;
                for &f in &outcome.failing_seeds {
                    replays.push(Replay::Nullform {
                        seed: f,
                        instance: NullFormInstance::random(f, nullform_spacing()),
                    });
                }
                SuiteEntry::new(suite, Some(s), outcome)
            }
            Suite::Gronwall => SuiteEntry::from_reports(suite, vec![check_gronwall_l1(traj.as_ref().expect("run"))]),
            Suite::Bootstrap => {
                let r = check_bootstrap_bound(traj.as_ref().expect("run"), rho.expect("rho")).map_err(config)?;
                SuiteEntry::from_reports(suite, r)
            }
            Suite::Bilinear => SuiteEntry::from_reports(suite, check_bilinear_bound(traj.as_ref().expect("run"))),
        };
        suites.push(entry);
    }

    let mut refinement = Vec::new();
    for &s in &section.refinement_seeds {
        let inst = NullFormInstance::random(s, nullform_spacing());
        let rows = nullform_refinement(&inst, NULLFORM_CELLS).map_err(abort)?;
        refinement.push(Refinement { seed: s, rows });
    }

    let pass = suites.iter().all(SuiteEntry::pass)
        && refinement.iter().all(|r| r.rows.iter().all(|row| row.report.pass));
    let report = VerifyReport {
        suites,
        refinement,
        pass,
    };
    let mut dir = OutDir::create(out, &cfg.hash())?;
    for r in &replays {
        let (name, seed) = match r {
            Replay::Energy { seed, .. } => ("energy", seed),
            Replay::Wave { seed, .. } => ("wave", seed),
            Replay::Nullform { seed, .. } => ("nullform", seed),
        };
        dir.json(&format!("failures/{name}_seed_{seed}.json"), "verify-replay", r)?;
    }
    dir.json("verify_report.json", "verify", &report)?;

    let total: usize = report.suites.iter().map(|s| s.reports.len()).sum();
    if pass {
        Ok(format!("{total} estimate reports, all pass"))
    } else {
        let failing: Vec<String> = report
            .suites
            .iter()
            .filter(|s| !s.pass())
            .map(|s| format!("{:?} seeds {:?}", s.suite, s.failing_seeds))
            .collect();
        Err(Failure::Verdict(format!(
            "{}; replays in {}",
            failing.join("; "),
            out.join("failures").display()
        )))
    }
}

/// Re-evaluates every stored report from its own numbers.
pub fn recheck(dir: &Path) -> Result<String, Failure> {
    let report = read_json::<VerifyReport>(&dir.join("verify_report.json"))?.body;
    let mut count = 0;
    let all = report
        .suites
        .iter()
        .flat_map(|s| s.reports.iter())
        .chain(report.refinement.iter().flat_map(|r| r.rows.iter().map(|row| &row.report)));
    for r in all {
        count += 1;
        if !r.recheck() {
            return Err(Failure::Verdict(format!("stored verdict of {:?} does not match its numbers", r.name)));
        }
    }
    let pass = report.suites.iter().all(SuiteEntry::pass)
        && report.refinement.iter().all(|r| r.rows.iter().all(|row| row.report.pass));
    if pass != report.pass {
        return Err(Failure::Verdict("overall verify verdict does not match the reports".into()));
    }
    Ok(format!("{count} verify reports reproduced (pass = {pass})"))
}
