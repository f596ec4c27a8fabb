//! Epsilon sweeps of the regularized family and the verdicts computed from
//! them: transverse potential bound, spinor lower bound, logarithmic growth
//! of `A_0`, and the distributional divergence of the initial charge.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone_solver::{evolve_from, DiagnosticSample, EvolveOptions, InitialState, ProbeSample};
use crate::dirac_algebra::Dim;
use crate::error::{Error, Result};
use crate::initial_data::{CutoffSpec, DataFamily, GridSpec, PotentialMode};
use crate::quadrature::least_squares;

/// Grid spacing for a run at `eps`: `h = base / k` with the smallest `k`
/// such that `h <= eps / cells_per_eps`, then divided by `refine`.
///
/// Probe coordinates, `t_max` and the half width are multiples of `base`,
/// so they stay on grid nodes for every `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPolicy {
    pub base: f64,
    pub cells_per_eps: f64,
    pub refine: usize,
    /// Half width of a truncated grid. Only probes are meaningful on such
    /// runs; `None` keeps the whole support of the datum.
    pub window: Option<f64>,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            base: 0.00125,
            cells_per_eps: 16.0,
            refine: 1,
            window: None,
        }
    }
}

impl GridPolicy {
    fn multiple(&self, v: f64) -> Option<i64> {
        let k = (v / self.base).round();
        ((v / self.base - k).abs() < 1e-9).then_some(k as i64)
    }

    pub fn grid(&self, eps: f64, t_max: f64, cutoff: &CutoffSpec) -> Result<GridSpec> {
        if !(self.base > 0.0 && self.cells_per_eps >= 1.0 && self.refine >= 1) {
            return Err(Error::InvalidParameter(format!("bad grid policy {self:?}")));
        }
        let k = (self.base * self.cells_per_eps / eps).ceil() as usize * self.refine;
        let h = self.base / k as f64;
        let half_width = match self.window {
            Some(w) => {
                self.multiple(w)
                    .ok_or_else(|| Error::Grid(format!("window {w} is not a multiple of {}", self.base)))?;
                w
            }
            None => self.base * ((cutoff.outer + t_max) / self.base + 4.0).ceil(),
        };
        let n = (2.0 * half_width / h).round() as usize;
        GridSpec::new(half_width, n, t_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub dim: Dim,
    pub mass: f64,
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    pub t_max: f64,
    pub grid: GridPolicy,
    /// `(t, x)` with `|x| < t <= t_max`.
    pub probes: Vec<(f64, f64)>,
    pub cutoff: CutoffSpec,
}

/// `x in {0, +-t/2}` at `t in {T/2, 3T/4}`, plus `(0.04, 0)` when `T >= 0.04`.
pub fn default_probes(t_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for t in [0.5 * t_max, 0.75 * t_max] {
        out.extend([(t, -0.5 * t), (t, 0.0), (t, 0.5 * t)]);
    }
    if t_max >= 0.04 {
        out.push((0.04, 0.0));
    }
    out
}

impl SweepPlan {
    /// `T = 0.05`, `eps in {1e-2, 1e-2.5, 1e-3}`, `h <= eps / 16`.
    pub fn default_campaign(dim: Dim, mass: f64) -> Self {
        SweepPlan {
            dim,
            mass,
            eps_list: vec![1e-2, 10f64.powf(-2.5), 1e-3],
            t_max: 0.05,
            grid: GridPolicy::default(),
            probes: default_probes(0.05),
            cutoff: CutoffSpec::default(),
        }
    }

    /// Probe-only campaign for the growth of `A_0`: `d = 2`, `M = 0`, four
    /// values of `eps` down to `1e-3.5`, on a window of half width 0.1.
    pub fn blowup_campaign() -> Self {
        SweepPlan {
            eps_list: vec![1e-2, 10f64.powf(-2.5), 1e-3, 10f64.powf(-3.5)],
            grid: GridPolicy {
                window: Some(0.1),
                ..GridPolicy::default()
            },
            ..Self::default_campaign(Dim::Two, 0.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            return Err(Error::InvalidParameter("eps_list is empty".into()));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidParameter(format!("eps must be positive: {:?}", self.eps_list)));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "eps_list must be strictly decreasing: {:?}",
                self.eps_list
            )));
        }
        if !(self.mass >= 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be >= 0, got {}", self.mass)));
        }
        self.cutoff.validate()?;
        if self.grid.multiple(self.t_max).is_none() || self.t_max <= 0.0 {
            return Err(Error::Grid(format!(
                "t_max = {} must be a positive multiple of {}",
                self.t_max, self.grid.base
            )));
        }
        let finest = self.grid(*self.eps_list.last().unwrap())?;
        let eps_min = self.eps_list[self.eps_list.len() - 1];
        if finest.h() > eps_min / 16.0 * (1.0 + 1e-12) {
            return Err(Error::Grid(format!("h = {} exceeds eps_min / 16", finest.h())));
        }
        for &(t, x) in &self.probes {
            if !(x.abs() < t && t <= self.t_max) {
                return Err(Error::Region(format!("probe ({t}, {x}) is not in |x| < t <= T")));
            }
            if self.grid.multiple(t).is_none() || self.grid.multiple(x).is_none() {
                return Err(Error::Grid(format!("probe ({t}, {x}) is not a multiple of {}", self.grid.base)));
            }
            if let Some(w) = self.grid.window {
                if x.abs() + t >= w - 2.0 * finest.h() {
                    return Err(Error::Region(format!(
                        "probe ({t}, {x}) sees the edge of the window [-{w}, {w}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self, eps: f64) -> Result<GridSpec> {
        self.grid.grid(eps, self.t_max, &self.cutoff)
    }

    pub fn family(&self, eps: f64, mode: PotentialMode) -> Result<DataFamily> {
        let mut fam = DataFamily::new(self.dim, eps, self.mass, mode)?;
        fam.cutoff = self.cutoff;
        Ok(fam)
    }
}

/// Everything a sweep keeps from one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub eps: f64,
    pub h: f64,
    pub n: usize,
    pub windowed: bool,
    pub diagnostics: Vec<DiagnosticSample>,
    pub probes: Vec<ProbeSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResults {
    pub plan: SweepPlan,
    pub mode: PotentialMode,
    pub runs: Vec<RunRecord>,
}

fn run_one(plan: &SweepPlan, eps: f64, mode: PotentialMode) -> Result<RunRecord> {
    let grid = plan.grid(eps)?;
    let fam = plan.family(eps, mode)?;
    let windowed = plan.grid.window.is_some();
    let init = if windowed {
        InitialState::windowed(&fam, &grid)?
    } else {
        InitialState::from_family(&fam, &grid)?
    };
    let opts = EvolveOptions {
        probes: plan.probes.clone(),
        boundary_guard: !windowed,
        ..Default::default()
    };
    let traj = evolve_from(&init, &opts)?;
    Ok(RunRecord {
        eps,
        h: grid.h(),
        n: grid.n,
        windowed,
        diagnostics: traj.diagnostics,
        probes: traj.probes,
    })
}

/// One evolution per `eps`, run in parallel on the current rayon pool and
/// returned in plan order.
pub fn run_sweep(plan: &SweepPlan, mode: PotentialMode) -> Result<SweepResults> {
    plan.validate()?;
    let runs = plan
        .eps_list
        .par_iter()
        .map(|&eps| {
            run_one(plan, eps, mode).map_err(|e| Error::RunAborted {
                eps,
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResults {
        plan: plan.clone(),
        mode,
        runs,
    })
}

fn require_full(results: &SweepResults, what: &str) -> Result<()> {
    if results.runs.iter().any(|r| r.windowed) {
        return Err(Error::Precondition(format!(
            "{what} needs the cone over [-1, 1]; windowed runs only resolve probes"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim1Verdict {
    pub eps: f64,
    /// `max_j sup_{K_T} |A_j|`.
    pub sup_single: f64,
    /// `sup_{K_T} (|A_2| + |A_3|)`, for `d = 3`.
    pub sup_sum: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim1Report {
    /// False for `d = 1`, where there are no transverse potentials.
    pub applicable: bool,
    pub verdicts: Vec<Claim1Verdict>,
}

impl Claim1Report {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

fn levels_up_to(run: &RunRecord, t_max: f64) -> impl Iterator<Item = &DiagnosticSample> {
    let tol = 1e-9 * run.h;
    run.diagnostics.iter().filter(move |d| d.t <= t_max + tol)
}

/// `|A_j| <= 1` on the cone over `[-1, 1]` up to `t_max`, and
/// `|A_2| + |A_3| <= 1` for `d = 3`.
pub fn check_claim1(results: &SweepResults, t_max: f64) -> Result<Claim1Report> {
    require_full(results, "the transverse bound")?;
    if results.plan.dim == Dim::One {
        return Ok(Claim1Report {
            applicable: false,
            verdicts: Vec::new(),
        });
    }
    let three = results.plan.dim == Dim::Three;
    let verdicts = results
        .runs
        .iter()
        .map(|run| {
            let mut single = 0.0_f64;
            let mut sum = 0.0_f64;
            for d in levels_up_to(run, t_max) {
                single = d.sup_transverse_cone.iter().fold(single, |m, &v| m.max(v));
                sum = sum.max(d.sup_transverse_sum_cone);
            }
            let worst = if three { sum } else { single };
            Claim1Verdict {
                eps: run.eps,
                sup_single: single,
                sup_sum: three.then_some(sum),
                pass: worst <= 1.0,
            }
        })
        .collect();
    Ok(Claim1Report {
        applicable: true,
        verdicts,
    })
}

/// Largest time up to which the transverse bound held in one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub eps: f64,
    pub scanned_to: f64,
    /// Last level at which `sup_{K_t}` of the transverse quantity was <= 1.
    pub largest_t: f64,
    /// Whether the bound failed before `scanned_to`.
    pub exceeded: bool,
    /// Running `sup_{K_t}` per level.
    pub running_sup: Vec<(f64, f64)>,
}

pub fn claim1_threshold(run: &RunRecord, dim: Dim) -> Result<ThresholdScan> {
    if run.windowed {
        return Err(Error::Precondition("threshold scan needs a full-width run".into()));
    }
    if dim == Dim::One {
        return Err(Error::Precondition("no transverse potentials for d = 1".into()));
    }
    let mut sup = 0.0_f64;
    let mut running = Vec::with_capacity(run.diagnostics.len());
    let mut largest = 0.0;
    let mut exceeded = false;
    for d in &run.diagnostics {
        let level = if dim == Dim::Three {
            d.sup_transverse_sum_cone
        } else {
            d.sup_transverse_cone.iter().fold(0.0, |m: f64, &v| m.max(v))
        };
        sup = sup.max(level);
        running.push((d.t, sup));
        if sup <= 1.0 && !exceeded {
            largest = d.t;
        } else {
            exceeded = true;
        }
    }
    Ok(ThresholdScan {
        eps: run.eps,
        scanned_to: run.diagnostics.last().map_or(0.0, |d| d.t),
        largest_t: largest,
        exceeded,
        running_sup: running,
    })
}

/// Relative tolerance constant in `0.5 (1 - C2 h^2 / eps^2)`.
pub const CLAIM2_C2: f64 = 50.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim2Verdict {
    pub eps: f64,
    /// `min |psi|^2 / f_eps(x - t)^2` over nodes with `0 < t < x < 1 - t`,
    /// `t < T`.
    pub min_ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `|psi|^2 >= 0.5 f_eps(x - t)^2 (1 - C2 h^2 / eps^2)` for `0 < t < x < 1 - t`,
/// `t < t_max`. Requires `6 (M + 1) t_max < 1`.
pub fn check_claim2(results: &SweepResults, t_max: f64) -> Result<Vec<Claim2Verdict>> {
    require_full(results, "the spinor lower bound")?;
    let m = results.plan.mass;
    if !(6.0 * (m + 1.0) * t_max < 1.0) {
        return Err(Error::Precondition(format!(
            "need 6(M+1)T < 1, got M = {m}, T = {t_max}"
        )));
    }
    Ok(results
        .runs
        .iter()
        .map(|run| {
            let tol = 1e-9 * run.h;
            let min_ratio = run
                .diagnostics
                .iter()
                .filter(|d| d.t > tol && d.t < t_max - tol)
                .filter_map(|d| d.min_modulus_ratio)
                .fold(f64::INFINITY, f64::min);
            let threshold = 0.5 * (1.0 - CLAIM2_C2 * run.h * run.h / (run.eps * run.eps));
            Claim2Verdict {
                eps: run.eps,
                min_ratio,
                threshold,
                pass: min_ratio >= threshold,
            }
        })
        .collect())
}

/// Lower bound for `A_0(t, x)` as printed with the growth rate.
pub fn blowup_bound_printed(t: f64, x: f64, eps: f64) -> f64 {
    let s = x + t;
    s / 8.0 * (-eps.ln()) + (eps + s) * ((eps + s).ln() - 1.0) / 8.0 - 0.5 * eps * (eps.ln() - 1.0)
}

/// Exact value of the integral the printed bound is derived from; it
/// differs from [`blowup_bound_printed`] only in the last coefficient.
pub fn blowup_bound_exact(t: f64, x: f64, eps: f64) -> f64 {
    let s = x + t;
    s / 8.0 * (-eps.ln()) + (eps + s) * ((eps + s).ln() - 1.0) / 8.0 - eps * (eps.ln() - 1.0) / 8.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeFit {
    pub t: f64,
    pub x: f64,
    /// `(eps, A_0(t, x))` in plan order.
    pub series: Vec<(f64, f64)>,
    /// Least-squares fit of `A_0` against `log(1/eps)`.
    pub slope: f64,
    pub intercept: f64,
    /// `(x + t) / 8`.
    pub slope_bound: f64,
    pub bound_printed: Vec<f64>,
    pub bound_exact: Vec<f64>,
    pub above_printed: Vec<bool>,
    pub above_exact: Vec<bool>,
    /// `A_0` increases as `eps` decreases.
    pub monotone: bool,
}

impl ProbeFit {
    /// Above the exact integral for every `eps`, slope at least
    /// `(x + t) / 8`, and monotone in `eps`.
    pub fn pass(&self) -> bool {
        self.above_exact.iter().all(|&b| b) && self.slope >= self.slope_bound && self.monotone
    }

    /// Same as [`ProbeFit::pass`] but against the printed bound, whose last
    /// term is larger than the integral it comes from.
    pub fn pass_printed(&self) -> bool {
        self.above_printed.iter().all(|&b| b) && self.slope >= self.slope_bound && self.monotone
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub probes: Vec<ProbeFit>,
    /// `min A_0 / |log eps|` over probes and runs.
    pub c_q: f64,
}

impl BlowupFit {
    pub fn pass(&self) -> bool {
        self.probes.iter().all(ProbeFit::pass)
    }

    pub fn probe(&self, t: f64, x: f64) -> Option<&ProbeFit> {
        self.probes
            .iter()
            .find(|p| (p.t - t).abs() < 1e-12 && (p.x - x).abs() < 1e-12)
    }

    /// Rebuilds the fit from the stored series.
    pub fn recompute(&self) -> BlowupFit {
        let probes: Vec<ProbeFit> = self.probes.iter().map(|p| fit_probe(p.t, p.x, &p.series)).collect();
        let c_q = c_q(&probes);
        BlowupFit { probes, c_q }
    }
}

fn c_q(probes: &[ProbeFit]) -> f64 {
    probes
        .iter()
        .flat_map(|p| p.series.iter().map(|&(e, a)| a / e.ln().abs()))
        .fold(f64::INFINITY, f64::min)
}

fn fit_probe(t: f64, x: f64, series: &[(f64, f64)]) -> ProbeFit {
    let logs: Vec<f64> = series.iter().map(|&(e, _)| -e.ln()).collect();
    let vals: Vec<f64> = series.iter().map(|&(_, a)| a).collect();
    let (slope, intercept) = least_squares(&logs, &vals);
    let bound_printed: Vec<f64> = series.iter().map(|&(e, _)| blowup_bound_printed(t, x, e)).collect();
    let bound_exact: Vec<f64> = series.iter().map(|&(e, _)| blowup_bound_exact(t, x, e)).collect();
    let above = |b: &[f64]| vals.iter().zip(b).map(|(a, b)| a >= b).collect::<Vec<_>>();
    // eps is decreasing along the series
    let monotone = vals.windows(2).all(|w| w[1] > w[0]);
    ProbeFit {
        t,
        x,
        series: series.to_vec(),
        slope,
        intercept,
        slope_bound: (x + t) / 8.0,
        above_printed: above(&bound_printed),
        above_exact: above(&bound_exact),
        bound_printed,
        bound_exact,
        monotone,
    }
}

/// Growth of `A_0` at the probes of the plan. Requires zero potential data.
pub fn check_claim3(results: &SweepResults, probes: &[(f64, f64)]) -> Result<BlowupFit> {
    if results.mode != PotentialMode::Zero {
        return Err(Error::Precondition("the growth bound assumes zero potential data".into()));
    }
    if results.runs.len() < 2 {
        return Err(Error::Precondition("a slope fit needs at least two values of eps".into()));
    }
    let mut fits = Vec::with_capacity(probes.len());
    for &(t, x) in probes {
        if !(x.abs() < t && t <= results.plan.t_max) {
            return Err(Error::Region(format!("probe ({t}, {x}) is not in |x| < t <= T")));
        }
        let series = results
            .runs
            .iter()
            .map(|run| {
                run.probes
                    .iter()
                    .find(|p| (p.t - t).abs() < 1e-9 && (p.x - x).abs() < 1e-9)
                    .map(|p| (run.eps, p.a[0]))
                    .ok_or_else(|| Error::Region(format!("probe ({t}, {x}) was not recorded")))
            })
            .collect::<Result<Vec<_>>>()?;
        fits.push(fit_probe(t, x, &series));
    }
    let c_q = c_q(&fits);
    Ok(BlowupFit { probes: fits, c_q })
}

/// Pairings `int phi(x) (eps^2 + x^2)^(-1/2) dx` and their growth in
/// `log(1/eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussSeries {
    pub eps: Vec<f64>,
    pub pairing: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// `2 phi(0)`.
    pub expected_slope: f64,
    /// `pairing[k + 1] - pairing[k]`.
    pub increments: Vec<f64>,
}

impl GaussSeries {
    /// Relative deviation of the fitted slope from `2 phi(0)`.
    pub fn slope_error(&self) -> f64 {
        (self.slope - self.expected_slope).abs() / self.expected_slope.abs()
    }
}

/// Trapezoid rule in `x = eps sinh(u)`, which turns the integrand into
/// `phi(eps sinh u)` and resolves the `eps`-scale peak uniformly.
pub fn gauss_pairing(phi: &dyn Fn(f64) -> f64, support: (f64, f64), eps: f64) -> f64 {
    let (a, b) = ((support.0 / eps).asinh(), (support.1 / eps).asinh());
    let cells = (((b - a) / 2e-3).ceil() as usize).max(16);
    let du = (b - a) / cells as f64;
    let vals: Vec<f64> = (0..=cells).map(|k| phi(eps * (a + k as f64 * du).sinh())).collect();
    crate::quadrature::trapezoid(&vals, du)
}

/// `phi` must vanish outside `support`, which must lie inside `(-1, 1)`.
pub fn gauss_divergence(
    eps_list: &[f64],
    phi: &dyn Fn(f64) -> f64,
    support: (f64, f64),
) -> Result<GaussSeries> {
    if !(-1.0 < support.0 && support.0 < support.1 && support.1 < 1.0) {
        return Err(Error::Region(format!(
            "test function support [{}, {}] must lie in (-1, 1)",
            support.0, support.1
        )));
    }
    if eps_list.len() < 2 || eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("need at least two positive eps".into()));
    }
    let pairing: Vec<f64> = eps_list.iter().map(|&e| gauss_pairing(phi, support, e)).collect();
    let logs: Vec<f64> = eps_list.iter().map(|e| -e.ln()).collect();
    let (slope, intercept) = least_squares(&logs, &pairing);
    Ok(GaussSeries {
        eps: eps_list.to_vec(),
        increments: pairing.windows(2).map(|w| w[1] - w[0]).collect(),
        pairing,
        slope,
        intercept,
        expected_slope: 2.0 * phi(0.0),
    })
}
