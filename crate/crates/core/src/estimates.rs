//! Linear and bilinear estimates turned into numerical inequalities, checked
//! on solver output and on seeded synthetic systems.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone_solver::wave::{solve_wave, WaveRun};
use crate::cone_solver::{
    cone_integral, evolve_from, null_product, ConeRegion, EvolveOptions, InitialState, Trajectory,
};
use crate::dirac_algebra::{Dim, SpinorValue};
use crate::error::{Error, Result};
use crate::initial_data::{chi, CutoffSpec, GridSpec, PotentialData};
use crate::quadrature::{adaptive_simpson, trapezoid};

/// Outcome of one inequality `lhs <= slack_factor * rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack_factor: f64,
    pub pass: bool,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, slack_factor: f64) -> Self {
        EstimateReport {
            name: name.into(),
            lhs,
            rhs,
            slack_factor,
            pass: lhs <= slack_factor * rhs,
        }
    }

    /// Recomputes the verdict from the stored numbers.
    pub fn recheck(&self) -> bool {
        self.lhs <= self.slack_factor * self.rhs
    }

    /// `lhs / rhs`, taken as 0 when `lhs` is 0.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Discretization slack `1 + 10 h`.
pub fn slack(h: f64) -> f64 {
    1.0 + 10.0 * h
}

/// Piecewise-linear function through `knots`, zero outside them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if k.is_empty() || x < k[0].0 || x > k[k.len() - 1].0 {
            return 0.0;
        }
        let i = k.partition_point(|p| p.0 <= x);
        if i == 0 {
            return k[0].1;
        }
        if i == k.len() {
            return k[k.len() - 1].1;
        }
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Exact `L^1` norm, including segments that change sign.
    pub fn l1(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| {
                let (dx, a, b) = (w[1].0 - w[0].0, w[0].1, w[1].1);
                if a * b >= 0.0 {
                    0.5 * dx * (a.abs() + b.abs())
                } else {
                    0.5 * dx * (a * a + b * b) / (a.abs() + b.abs())
                }
            })
            .sum()
    }

    pub fn sup(&self) -> f64 {
        self.knots.iter().fold(0.0, |m, p| m.max(p.1.abs()))
    }

    /// Exact `L^1` norm of the derivative.
    pub fn variation(&self) -> f64 {
        self.knots.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum()
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        grid.xs().iter().map(|&x| self.eval(x)).collect()
    }

    /// Random function with `pieces` cells of width `spacing` starting at
    /// `start`, vanishing at both ends.
    fn random(rng: &mut ChaCha8Rng, start: f64, spacing: f64, pieces: usize, signed: bool) -> Self {
        let knots = (0..=pieces)
            .map(|k| {
                let y = if k == 0 || k == pieces {
                    0.0
                } else if signed {
                    rng.random_range(-1.0..1.0)
                } else {
                    rng.random_range(0.0..1.0)
                };
                (start + k as f64 * spacing, y)
            })
            .collect();
        PiecewiseLinear { knots }
    }
}

/// The pair with the largest `lhs / rhs` seen so far.
struct Worst {
    lhs: f64,
    rhs: f64,
}

impl Worst {
    fn new(lhs: f64, rhs: f64) -> Self {
        Worst { lhs, rhs }
    }

    fn offer(&mut self, lhs: f64, rhs: f64) {
        let seen = EstimateReport::new("", self.lhs, self.rhs, 1.0).ratio();
        let cand = EstimateReport::new("", lhs, rhs, 1.0).ratio();
        if cand > seen || (self.lhs == 0.0 && lhs > 0.0) {
            self.lhs = lhs;
            self.rhs = rhs;
        }
    }
}

/// `||psi(t)||_2 <= ||psi_0||_2 + int_0^t ||F||_2`, checked at every level
/// of `traj` using the recorded forcing norms. The level with the largest
/// `lhs / rhs` is reported.
pub fn check_energy_inequality(traj: &Trajectory) -> EstimateReport {
    let h = traj.grid.h();
    let d = &traj.diagnostics;
    let norm0 = d[0].charge.sqrt();
    let mut integral = 0.0;
    let mut worst = Worst::new(norm0, norm0);
    for k in 1..d.len() {
        integral += 0.5 * h * (d[k - 1].forcing_l2 + d[k].forcing_l2);
        worst.offer(d[k].charge.sqrt(), norm0 + integral);
    }
    EstimateReport::new("energy inequality", worst.lhs, worst.rhs, slack(h))
}

fn bump(x: f64, centre: f64, radius: f64) -> f64 {
    let r = (x - centre) / radius;
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// A seeded linear Dirac problem with smooth data and smooth external
/// forcing, potentials held at zero.
pub fn energy_instance(seed: u64, grid: &GridSpec) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = match rng.random_range(0..3) {
        0 => Dim::One,
        1 => Dim::Two,
        _ => Dim::Three,
    };
    let mass = rng.random_range(0.0..1.0);
    let half = dim.half_len();
    let comp = |rng: &mut ChaCha8Rng| -> (f64, f64, Complex64) {
        let c = rng.random_range(-0.5..0.5);
        let r = rng.random_range(0.2..0.5);
        let a = Complex64::from_polar(rng.random_range(0.0..2.0), rng.random_range(0.0..6.3));
        (c, r, a)
    };
    let data: Vec<_> = (0..2 * half).map(|_| comp(&mut rng)).collect();
    let forcing: Vec<_> = (0..2 * half).map(|_| comp(&mut rng)).collect();
    let rate = rng.random_range(-1.0..1.0);
    let build = move |spec: &[(f64, f64, Complex64)], x: f64, scale: f64| -> SpinorValue {
        let val = |k: usize| spec[k].2 * bump(x, spec[k].0, spec[k].1) * scale;
        let mut s = SpinorValue::ZERO;
        for k in 0..half {
            s.u[k] = val(k);
            s.v[k] = val(half + k);
        }
        s
    };
    let psi = grid.xs().iter().map(|&x| build(&data, x, 1.0)).collect();
    let init = InitialState::custom(dim, mass, grid, psi, PotentialData::zeros(dim, grid.nodes()))?;
    let opts = EvolveOptions {
        spinor_forcing: Some(Arc::new(move |t, x| build(&forcing, x, (rate * 3.0 * t).sin() + 0.5))),
        spinor_sources: false,
        ..Default::default()
    };
    evolve_from(&init, &opts)
}

/// Seeded randomized energy-inequality suite; failing seeds are returned.
pub fn energy_suite(count: usize, seed: u64, grid: &GridSpec) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    for i in 0..count as u64 {
        let s = seed.wrapping_add(i);
        let mut r = check_energy_inequality(&energy_instance(s, grid)?);
        r.name = format!("energy inequality (seed {s})");
        out.push(s, r);
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub reports: Vec<EstimateReport>,
    pub failing_seeds: Vec<u64>,
}

impl SuiteOutcome {
    fn push(&mut self, seed: u64, r: EstimateReport) {
        if !r.pass {
            self.failing_seeds.push(seed);
        }
        self.reports.push(r);
    }

    pub fn all_pass(&self) -> bool {
        self.failing_seeds.is_empty()
    }

    pub fn worst_ratio(&self) -> f64 {
        self.reports.iter().map(EstimateReport::ratio).fold(0.0, f64::max)
    }
}

/// `square u = G`, `u(0) = f`, `u_t(0) = g` with `G(t, x) = (1 + rate t)
/// profile(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveProblem {
    pub f: PiecewiseLinear,
    pub g: PiecewiseLinear,
    pub source: PiecewiseLinear,
    pub rate: f64,
}

impl WaveProblem {
    /// Seeded problem with knots on multiples of `spacing`. The diamond
    /// scheme couples only nodes of equal parity, so `spacing` should be an
    /// even number of grid cells; otherwise kinks excite a checkerboard mode.
    pub fn random(seed: u64, spacing: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pl = |rng: &mut ChaCha8Rng| {
            let pieces = rng.random_range(2..12);
            let start = -(rng.random_range(0..=pieces) as f64) * spacing;
            let amp = rng.random_range(0.1..3.0);
            let mut p = PiecewiseLinear::random(rng, start, spacing, pieces, true);
            for k in &mut p.knots {
                k.1 *= amp;
            }
            p
        };
        let f = pl(&mut rng);
        let g = pl(&mut rng);
        let source = pl(&mut rng);
        let rate = rng.random_range(0.0..2.0);
        WaveProblem { f, g, source, rate }
    }

    /// `int_0^t ||G(s)||_1 ds`.
    pub fn source_integral(&self, t: f64) -> f64 {
        self.source.l1() * (t + 0.5 * self.rate * t * t).abs()
    }
}

/// Norms of the wave data entering the right-hand sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveDataNorms {
    pub f_sup: f64,
    /// `||f'||_1`.
    pub f_variation: f64,
    pub g_l1: f64,
    /// `int_0^t ||G(s)||_1 ds`.
    pub source_integral: f64,
}

/// The three linear wave estimates and their sum with factor 3, evaluated
/// on `level` of `run`.
pub fn check_wave_run(run: &WaveRun, level: usize, norms: &WaveDataNorms) -> Vec<EstimateReport> {
    let h = run.grid.h();
    let u = run.solution(level);
    let ut = run.time_derivative(level);
    let sup = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let var: f64 = u.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let ut_l1 = trapezoid(&ut.iter().map(|v| v.abs()).collect::<Vec<_>>(), h);
    let common = norms.g_l1 + norms.source_integral;
    let s = slack(h);
    let f_ac = norms.f_sup + norms.f_variation;
    vec![
        EstimateReport::new("wave sup bound", sup, norms.f_sup + common, s),
        EstimateReport::new("wave d_x bound", var, norms.f_variation + common, s),
        EstimateReport::new("wave d_t bound", ut_l1, norms.f_variation + common, s),
        EstimateReport::new("wave combined bound", sup + var + ut_l1, 3.0 * (f_ac + common), s),
    ]
}

/// Solves `problem` up to `grid.t_max` and checks the wave estimates there.
pub fn check_wave_estimates(problem: &WaveProblem, grid: &GridSpec) -> Result<Vec<EstimateReport>> {
    let f = problem.f.sample(grid);
    let g = problem.g.sample(grid);
    let src = problem.source.clone();
    let rate = problem.rate;
    let run = solve_wave(grid, &f, &g, &move |t, x| (1.0 + rate * t) * src.eval(x))?;
    let norms = WaveDataNorms {
        f_sup: problem.f.sup(),
        f_variation: problem.f.variation(),
        g_l1: problem.g.l1(),
        source_integral: problem.source_integral(grid.t_max),
    };
    Ok(check_wave_run(&run, grid.steps(), &norms))
}

/// Grid and knot spacing used for the randomized wave suite.
pub const WAVE_GRID: (f64, usize, f64) = (3.0, 600, 0.5);
pub const WAVE_SPACING: f64 = 0.1;

/// Seeded randomized wave-estimate suite; each seed contributes four reports.
pub fn wave_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    let (l, n, t) = WAVE_GRID;
    let grid = GridSpec::new(l, n, t)?;
    let mut out = SuiteOutcome::default();
    for i in 0..count as u64 {
        let s = seed.wrapping_add(i);
        for mut r in check_wave_estimates(&WaveProblem::random(s, WAVE_SPACING), &grid)? {
            r.name = format!("{} (seed {s})", r.name);
            out.push(s, r);
        }
    }
    out.failing_seeds.dedup();
    Ok(out)
}

/// Transport system `(d_t + d_x) u = F`, `(d_t - d_x) v = G` with
/// piecewise-linear data and forcing `F = (1 + rate t) profile e^{i theta}`,
/// and a backward cone `K^{(t, x)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullFormInstance {
    pub f: PiecewiseLinear,
    pub g: PiecewiseLinear,
    pub f_force: PiecewiseLinear,
    pub g_force: PiecewiseLinear,
    pub rate_f: f64,
    pub rate_g: f64,
    /// Phases of `f`, `g`, `F`, `G`.
    pub phases: [f64; 4],
    pub vertex: (f64, f64),
}

/// Grid used for randomized null-form instances: spacing 0.02 on [-2, 2].
pub const NULLFORM_HALF_WIDTH: f64 = 2.0;
pub const NULLFORM_CELLS: usize = 200;

impl NullFormInstance {
    /// Seeded instance with knots on multiples of `spacing` inside
    /// `[-0.8, 0.8]` and a vertex with `t` in `[0.1, 0.6]`, `|x| <= 0.6`.
    /// Supports are placed to overlap the base of the cone.
    pub fn random(seed: u64, spacing: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = (0.8 / spacing).round() as i64;
        let steps_t = rng.random_range((0.1 / spacing).round() as i64..=(0.6 / spacing).round() as i64);
        let steps_x = rng.random_range(-(0.6 / spacing).round() as i64..=(0.6 / spacing).round() as i64);
        let (base_lo, base_hi) = (steps_x - steps_t, steps_x + steps_t);
        let pl = |rng: &mut ChaCha8Rng, allow_zero: bool| {
            if allow_zero && rng.random_range(0.0..1.0) < 0.1 {
                return PiecewiseLinear { knots: Vec::new() };
            }
            let pieces = rng.random_range(2..=(cells as usize).min(20));
            let p = pieces as i64;
            let first = rng.random_range((-cells).max(base_lo - p)..=(cells - p).min(base_hi));
            let amp = rng.random_range(0.1..4.0);
            let mut out = PiecewiseLinear::random(rng, first as f64 * spacing, spacing, pieces, true);
            for k in &mut out.knots {
                k.1 *= amp;
            }
            out
        };
        let f = pl(&mut rng, false);
        let g = pl(&mut rng, true);
        let f_force = pl(&mut rng, true);
        let g_force = pl(&mut rng, true);
        let rate_f = rng.random_range(0.0..3.0);
        let rate_g = rng.random_range(0.0..3.0);
        let phases = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        NullFormInstance {
            f,
            g,
            f_force,
            g_force,
            rate_f,
            rate_g,
            phases,
            vertex: (steps_t as f64 * spacing, steps_x as f64 * spacing),
        }
    }

    /// `(||f||_1 + int ||F||_1)(||g||_1 + int ||G||_1)`.
    pub fn rhs(&self) -> f64 {
        let t = self.vertex.0;
        let a = self.f.l1() + self.f_force.l1() * (t + 0.5 * self.rate_f * t * t);
        let b = self.g.l1() + self.g_force.l1() * (t + 0.5 * self.rate_g * t * t);
        a * b
    }

    /// Solves the transport system on `[-half_width, half_width]` with
    /// `cells` cells up to the vertex time.
    pub fn solve(&self, half_width: f64, cells: usize) -> Result<Trajectory> {
        let (t, _) = self.vertex;
        let grid = GridSpec::new(half_width, cells, t)?;
        let ph = |k: usize| Complex64::from_polar(1.0, self.phases[k]);
        let psi = grid
            .xs()
            .iter()
            .map(|&x| SpinorValue::scalar(ph(0) * self.f.eval(x), ph(1) * self.g.eval(x)))
            .collect();
        let init = InitialState::custom(Dim::One, 0.0, &grid, psi, PotentialData::zeros(Dim::One, grid.nodes()))?;
        let (ff, gf, rf, rg) = (self.f_force.clone(), self.g_force.clone(), self.rate_f, self.rate_g);
        let (pf, pg) = (ph(2), ph(3));
        let opts = EvolveOptions {
            record_window: Some((-half_width, half_width)),
            spinor_forcing: Some(Arc::new(move |t, x| {
                SpinorValue::scalar(pf * ((1.0 + rf * t) * ff.eval(x)), pg * ((1.0 + rg * t) * gf.eval(x)))
            })),
            spinor_sources: false,
            ..Default::default()
        };
        evolve_from(&init, &opts)
    }

    pub fn check(&self, half_width: f64, cells: usize) -> Result<EstimateReport> {
        let traj = self.solve(half_width, cells)?;
        let (t, x) = self.vertex;
        let lhs = cone_integral(&traj, &null_product, &ConeRegion::with_vertex(t, x))?;
        Ok(EstimateReport::new("null form", lhs, self.rhs(), slack(traj.grid.h())))
    }
}

pub fn check_nullform(inst: &NullFormInstance) -> Result<EstimateReport> {
    inst.check(NULLFORM_HALF_WIDTH, NULLFORM_CELLS)
}

/// Seeded randomized null-form suite; instance `i` uses seed `seed + i`.
pub fn nullform_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    let spacing = 2.0 * NULLFORM_HALF_WIDTH / NULLFORM_CELLS as f64;
    let mut out = SuiteOutcome::default();
    for i in 0..count as u64 {
        let s = seed.wrapping_add(i);
        let mut r = check_nullform(&NullFormInstance::random(s, spacing))?;
        r.name = format!("null form (seed {s})");
        out.push(s, r);
    }
    Ok(out)
}

/// One instance checked at `cells`, `2 cells`, `4 cells`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub h: f64,
    pub report: EstimateReport,
}

pub fn nullform_refinement(inst: &NullFormInstance, cells: usize) -> Result<Vec<RefinementRow>> {
    (0..3)
        .map(|k| {
            let n = cells << k;
            let report = inst.check(NULLFORM_HALF_WIDTH, n)?;
            Ok(RefinementRow {
                h: 2.0 * NULLFORM_HALF_WIDTH / n as f64,
                report,
            })
        })
        .collect()
}

/// `||u(t)||_1 + ||v(t)||_1 <= ||u_0||_1 exp(int_0^t (M + sup|A_perp|))`,
/// where the transverse sup is summed over `A_2, A_3`. The level with the
/// largest `lhs / rhs` is reported.
pub fn check_gronwall_l1(traj: &Trajectory) -> EstimateReport {
    let h = traj.grid.h();
    let d = &traj.diagnostics;
    let base = d[0].l1_u + d[0].l1_v;
    let rate = |k: usize| traj.mass + d[k].sup_transverse.iter().sum::<f64>();
    let mut exponent = 0.0;
    let mut worst = Worst::new(base, base);
    for k in 1..d.len() {
        exponent += 0.5 * h * (rate(k - 1) + rate(k));
        worst.offer(d[k].l1_u + d[k].l1_v, base * f64::exp(exponent));
    }
    EstimateReport::new("L1 Gronwall bound", worst.lhs, worst.rhs, slack(h))
}

/// `B_rho(t) = sup_{rho + t <= y <= 1 - t} |psi|^2` against `3 / sqrt(eps^2 +
/// rho^2)` and against the sharper `exp(2 (M + 1) t) / sqrt(eps^2 + rho^2)`.
/// Needs a recorded history covering `[rho, 1]`.
pub fn check_bootstrap_bound(traj: &Trajectory, rho: f64) -> Result<Vec<EstimateReport>> {
    let eps = traj
        .eps
        .ok_or_else(|| Error::Precondition("bootstrap bound needs a run from the data family".into()))?;
    let t_max = traj.grid.t_max;
    let m = traj.mass;
    if !(2.0 * (m + 1.0) * t_max < 1.0) {
        return Err(Error::Precondition(format!(
            "need 2(M+1)T < 1, got M = {m}, T = {t_max}"
        )));
    }
    if !(rho > 0.0 && rho < 1.0 - 2.0 * t_max) {
        return Err(Error::Precondition(format!(
            "rho = {rho} must lie in (0, 1 - 2T) = (0, {})",
            1.0 - 2.0 * t_max
        )));
    }
    let grid = &traj.grid;
    let hist = traj
        .history
        .as_ref()
        .ok_or_else(|| Error::Region("bootstrap bound needs a recorded history".into()))?;
    let range = hist.node_range();
    let h = grid.h();
    let tol = 1e-9 * h;
    let base = 1.0 / (eps * eps + rho * rho).sqrt();
    let mut b_max = 0.0_f64;
    let mut scaled_max = 0.0_f64;
    for (level, rec) in hist.levels.iter().enumerate() {
        let t = grid.time(level);
        let mut b = 0.0_f64;
        let mut covered = false;
        for j in range.clone() {
            let y = grid.x(j);
            if y >= rho + t - tol && y <= 1.0 - t + tol {
                b = b.max(rec.psi[j - hist.first_node].density());
                covered = true;
            }
        }
        if !covered && rho + t <= 1.0 - t {
            return Err(Error::Region(format!("history does not cover [{rho}, 1] at t = {t}")));
        }
        b_max = b_max.max(b);
        scaled_max = scaled_max.max(b * (-2.0 * (m + 1.0) * t).exp());
    }
    Ok(vec![
        EstimateReport::new("bootstrap bound", b_max, 3.0 * base, slack(h)),
        EstimateReport::new("bootstrap Gronwall bound", scaled_max, base, slack(h)),
    ])
}

/// `int_0^T ||psi^* gamma^0 gamma^mu psi||_1 <= C T sup_t ||psi||_2^2` with
/// `C = 1`, one report per potential.
pub fn check_bilinear_bound(traj: &Trajectory) -> Vec<EstimateReport> {
    let h = traj.grid.h();
    let d = &traj.diagnostics;
    let t = traj.grid.t_max;
    let sup_charge = d.iter().map(|s| s.charge).fold(0.0, f64::max);
    (0..traj.dim.potentials())
        .map(|mu| {
            let series: Vec<f64> = d.iter().map(|s| s.source_l1[mu]).collect();
            EstimateReport::new(
                format!("bilinear bound mu = {mu}"),
                trapezoid(&series, h),
                t * sup_charge,
                slack(h),
            )
        })
        .collect()
}

/// The constant `C = int chi(x) |x|^(-1/2) dx` and the time `delta` with
/// `C^2 alpha(delta) = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConstants {
    pub c: f64,
    pub delta: f64,
}

pub fn alpha(t: f64, mass: f64) -> f64 {
    let q = t * (mass + 1.0) * (t * (mass + 1.0)).exp();
    (1.0 + q) * q
}

pub fn bootstrap_constants(cutoff: &CutoffSpec, mass: f64) -> Result<BootstrapConstants> {
    cutoff.validate()?;
    if !(mass >= 0.0) {
        return Err(Error::InvalidParameter(format!("mass must be >= 0, got {mass}")));
    }
    // x = w^2 removes the singularity: C = 4 int_0^sqrt(outer) chi(w^2) dw
    let c = 4.0 * adaptive_simpson(|w| chi(w * w, cutoff), 0.0, cutoff.outer.sqrt(), 1e-13);
    let target = 0.5 / (c * c);
    let (mut lo, mut hi) = (0.0, 1.0);
    while alpha(hi, mass) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alpha(mid, mass) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BootstrapConstants { c, delta: lo })
}
