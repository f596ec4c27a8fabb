//! The single JSON document that drives every subcommand.
//!
//! Physically meaningful fields (`dim`, `mass`, `eps`/`eps_list`, `t_max`,
//! `potential_mode`) have no defaults. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use mdlab_core::dirac_algebra::Dim;
use mdlab_core::experiments::{default_probes, GridPolicy, SweepPlan};
use mdlab_core::initial_data::{CutoffSpec, DataFamily, GridSpec, PotentialMode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::{config, Failure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: Dim,
    pub mass: f64,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub t_max: f64,
    pub potential_mode: PotentialMode,
    #[serde(default)]
    pub cutoff: CutoffSpec,
    /// Explicit grid for `simulate`, `verify` and `norms`.
    pub grid: Option<GridSection>,
    /// Per-eps grid rule for `sweep`.
    pub grid_policy: Option<GridPolicy>,
    pub probes: Option<Vec<(f64, f64)>>,
    pub snapshot_times: Option<Vec<f64>>,
    pub experiments: Option<Vec<Experiment>>,
    pub verify: Option<VerifySection>,
    pub norms: Option<NormsSection>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width: f64,
    pub n: usize,
    /// Optional time step; must equal the spacing `2 L / n`.
    pub dt: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Claim1,
    Claim2,
    Claim3,
    Gauss,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Randomized linear instances on the configured grid.
    Energy,
    /// Energy inequality on the configured run.
    RunEnergy,
    Wave,
    Nullform,
    Gronwall,
    Bootstrap,
    Bilinear,
}

impl Suite {
    pub fn randomized(self) -> bool {
        matches!(self, Suite::Energy | Suite::Wave | Suite::Nullform)
    }

    pub fn needs_run(self) -> bool {
        matches!(self, Suite::RunEnergy | Suite::Gronwall | Suite::Bootstrap | Suite::Bilinear)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub suites: Vec<Suite>,
    /// Instances per randomized suite.
    pub count: usize,
    /// Null-form seeds re-checked at `n`, `2n`, `4n`.
    #[serde(default)]
    pub refinement_seeds: Vec<u64>,
    pub bootstrap_rho: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    pub p: Vec<f64>,
    pub s: Vec<f64>,
}

impl Default for NormsSection {
    fn default() -> Self {
        NormsSection {
            p: vec![1.0, 1.5, 2.0],
            s: vec![-0.5, -0.25],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), Failure> {
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Failure::Config(format!("mass must be >= 0, got {}", self.mass)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Failure::Config(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        self.cutoff.validate().map_err(config)?;
        match (&self.eps, &self.eps_list) {
            (Some(_), Some(_)) => Err(Failure::Config("give either eps or eps_list, not both".into())),
            (None, None) => Err(Failure::Config("one of eps or eps_list is required".into())),
            _ => {
                for &e in self.eps_values() {
                    self.family(e)?;
                }
                Ok(())
            }
        }
    }

    /// Content hash of the effective configuration; the output directory is
    /// excluded so moving results does not change it.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        format!("{:x}", Sha256::digest(bytes))
    }

    pub fn eps_values(&self) -> &[f64] {
        match (&self.eps, &self.eps_list) {
            (Some(e), _) => std::slice::from_ref(e),
            (None, Some(list)) => list,
            (None, None) => &[],
        }
    }

    pub fn single_eps(&self) -> Result<f64, Failure> {
        self.eps
            .ok_or_else(|| Failure::Config("this command needs a single `eps`".into()))
    }

    pub fn family(&self, eps: f64) -> Result<DataFamily, Failure> {
        let fam = DataFamily {
            dim: self.dim,
            eps,
            mass: self.mass,
            potential_mode: self.potential_mode,
            cutoff: self.cutoff,
        };
        fam.validate().map_err(config)?;
        Ok(fam)
    }

    pub fn grid_spec(&self) -> Result<GridSpec, Failure> {
        let g = self
            .grid
            .ok_or_else(|| Failure::Config("this command needs a `grid` section".into()))?;
        let spec = GridSpec::new(g.half_width, g.n, self.t_max).map_err(config)?;
        if let Some(dt) = g.dt {
            if (dt - spec.h()).abs() > 1e-12 * spec.h() {
                return Err(Failure::Config(format!(
                    "dt = {dt} differs from the spacing h = {}; the scheme steps with dt = h",
                    spec.h()
                )));
            }
        }
        Ok(spec)
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan, Failure> {
        let eps_list = self
            .eps_list
            .clone()
            .ok_or_else(|| Failure::Config("sweep needs `eps_list`".into()))?;
        if self.grid.is_some() {
            return Err(Failure::Config(
                "sweep derives a grid per eps; use `grid_policy` instead of `grid`".into(),
            ));
        }
        let plan = SweepPlan {
            dim: self.dim,
            mass: self.mass,
            eps_list,
            t_max: self.t_max,
            grid: self.grid_policy.unwrap_or_default(),
            probes: self.probes.clone().unwrap_or_else(|| default_probes(self.t_max)),
            cutoff: self.cutoff,
        };
        plan.validate().map_err(config)?;
        Ok(plan)
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> Result<PathBuf, Failure> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.out.clone())
            .ok_or_else(|| Failure::Config("no output directory: pass --out or set `out`".into()))
    }
}
