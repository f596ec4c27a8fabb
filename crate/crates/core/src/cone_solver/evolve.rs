use std::fmt;
use std::sync::Arc;

use super::transport::TransportKernel;
use super::wave::{diamond_step, first_step};
use super::{
    gauge_residual_on, ConeRegion, DiagnosticSample, History, HistoryLevel, ProbeSample, Snapshot,
    SpinorField, Trajectory,
};
use crate::dirac_algebra::{coupling_matrix, wave_sources_into, Dim, SpinorValue, C64};
use crate::error::{Error, Result};
use crate::initial_data::{
    f_eps_unchecked, potential_data, spinor_datum, DataFamily, GridSpec, PotentialData,
};

/// External source added to the wave equation of `A_mu`: `(mu, t, x)`.
pub type WaveForcing = Arc<dyn Fn(usize, f64, f64) -> f64 + Send + Sync>;
/// External forcing of the transport equations, `(t, x) -> (g_u, g_v)`.
pub type SpinorForcing = Arc<dyn Fn(f64, f64) -> SpinorValue + Send + Sync>;

/// Data at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    pub dim: Dim,
    pub mass: f64,
    pub grid: GridSpec,
    pub eps: Option<f64>,
    pub psi: Vec<SpinorValue>,
    pub potentials: PotentialData,
}

impl InitialState {
    pub fn from_family(fam: &DataFamily, grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        grid.check_support(fam.cutoff.outer)?;
        let SpinorField { psi, .. } = spinor_datum(fam, grid)?;
        Ok(InitialState {
            dim: fam.dim,
            mass: fam.mass,
            grid: *grid,
            eps: Some(fam.eps),
            psi,
            potentials: potential_data(fam, grid)?,
        })
    }

    /// Family datum restricted to a grid that may cut its support. Values
    /// are exact only inside the domain of dependence of the grid interior,
    /// so evolve such states with `boundary_guard` off.
    pub fn windowed(fam: &DataFamily, grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let SpinorField { psi, .. } = spinor_datum(fam, grid)?;
        Ok(InitialState {
            dim: fam.dim,
            mass: fam.mass,
            grid: *grid,
            eps: Some(fam.eps),
            psi,
            potentials: potential_data(fam, grid)?,
        })
    }

    /// Arbitrary data, e.g. for manufactured solutions and synthetic systems.
    pub fn custom(
        dim: Dim,
        mass: f64,
        grid: &GridSpec,
        psi: Vec<SpinorValue>,
        potentials: PotentialData,
    ) -> Result<Self> {
        grid.validate()?;
        let nodes = grid.nodes();
        if psi.len() != nodes {
            return Err(Error::Shape(format!("spinor datum needs {nodes} samples, got {}", psi.len())));
        }
        let np = dim.potentials();
        if potentials.a.len() != np
            || potentials.b.len() != np
            || potentials.a.iter().chain(&potentials.b).any(|f| f.len() != nodes)
        {
            return Err(Error::Shape(format!("potential data need {np} fields of {nodes} samples")));
        }
        if !(mass >= 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be >= 0, got {mass}")));
        }
        let half = dim.half_len();
        if psi.iter().any(|s| half == 1 && (s.u[1] != C64::default() || s.v[1] != C64::default())) {
            return Err(Error::Shape(format!("spinor for d = {dim} has scalar components")));
        }
        Ok(InitialState {
            dim,
            mass,
            grid: *grid,
            eps: None,
            psi,
            potentials,
        })
    }

    /// Zero spinor and zero potentials.
    pub fn zero(dim: Dim, mass: f64, grid: &GridSpec) -> Result<Self> {
        let nodes = grid.nodes();
        Self::custom(dim, mass, grid, vec![SpinorValue::ZERO; nodes], PotentialData::zeros(dim, nodes))
    }
}

#[derive(Clone)]
pub struct EvolveOptions {
    /// Times at which full fields are stored; must be time levels.
    pub snapshot_times: Vec<f64>,
    /// Spatial window `[x_lo, x_hi]` whose every level is kept for
    /// space-time quadrature.
    pub record_window: Option<(f64, f64)>,
    /// Grid-aligned `(t, x)` points at which the potentials are sampled.
    pub probes: Vec<(f64, f64)>,
    pub wave_forcing: Option<WaveForcing>,
    pub spinor_forcing: Option<SpinorForcing>,
    /// When false the spinor bilinears are dropped from the wave sources
    /// (used for synthetic linear systems).
    pub spinor_sources: bool,
    /// Abort when the support reaches two cells from the boundary.
    pub boundary_guard: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            snapshot_times: Vec::new(),
            record_window: None,
            probes: Vec::new(),
            wave_forcing: None,
            spinor_forcing: None,
            spinor_sources: true,
            boundary_guard: true,
        }
    }
}

impl fmt::Debug for EvolveOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvolveOptions")
            .field("snapshot_times", &self.snapshot_times)
            .field("record_window", &self.record_window)
            .field("probes", &self.probes)
            .field("wave_forcing", &self.wave_forcing.is_some())
            .field("spinor_forcing", &self.spinor_forcing.is_some())
            .field("spinor_sources", &self.spinor_sources)
            .field("boundary_guard", &self.boundary_guard)
            .finish()
    }
}

pub fn evolve(fam: &DataFamily, grid: &GridSpec, opts: &EvolveOptions) -> Result<Trajectory> {
    evolve_from(&InitialState::from_family(fam, grid)?, opts)
}

pub(super) struct Recorder {
    snapshot_levels: Vec<usize>,
    probes: Vec<(usize, usize)>,
    window: Option<std::ops::RangeInclusive<usize>>,
}

impl Recorder {
    pub(super) fn new(grid: &GridSpec, opts: &EvolveOptions) -> Result<Self> {
        let steps = grid.steps();
        let mut snapshot_levels = Vec::new();
        for &t in &opts.snapshot_times {
            let l = grid.level_of(t)?;
            if l > steps {
                return Err(Error::Grid(format!("snapshot time {t} is beyond t_max = {}", grid.t_max)));
            }
            snapshot_levels.push(l);
        }
        snapshot_levels.sort_unstable();
        snapshot_levels.dedup();
        let mut probes = Vec::new();
        for &(t, x) in &opts.probes {
            let l = grid.level_of(t)?;
            if l > steps {
                return Err(Error::Grid(format!("probe time {t} is beyond t_max = {}", grid.t_max)));
            }
            probes.push((l, grid.node_of(x)?));
        }
        let window = match opts.record_window {
            None => None,
            Some((lo, hi)) => {
                if !(lo <= hi) {
                    return Err(Error::Region(format!("empty record window [{lo}, {hi}]")));
                }
                let h = grid.h();
                let a = ((lo + grid.half_width) / h).floor().max(0.0) as usize;
                let b = (((hi + grid.half_width) / h).ceil() as usize).min(grid.n);
                Some(a..=b)
            }
        };
        Ok(Recorder {
            snapshot_levels,
            probes,
            window,
        })
    }

    pub(super) fn new_history(&self) -> Option<History> {
        self.window.as_ref().map(|w| History {
            first_node: *w.start(),
            levels: Vec::new(),
        })
    }

    pub(super) fn record(
        &self,
        traj: &mut Trajectory,
        level: usize,
        psi: &[SpinorValue],
        a: &[Vec<f64>],
        a_t: &[Vec<f64>],
    ) {
        let t = traj.grid.time(level);
        if self.snapshot_levels.binary_search(&level).is_ok() {
            traj.snapshots.push(Snapshot {
                t,
                psi: psi.to_vec(),
                a: a.to_vec(),
                a_t: a_t.to_vec(),
            });
        }
        for &(l, j) in &self.probes {
            if l == level {
                traj.probes.push(ProbeSample {
                    t,
                    x: traj.grid.x(j),
                    a: a.iter().map(|f| f[j]).collect(),
                });
            }
        }
        if let (Some(w), Some(hist)) = (&self.window, traj.history.as_mut()) {
            hist.levels.push(HistoryLevel {
                psi: psi[w.clone()].to_vec(),
                a: a.iter().map(|f| f[w.clone()].to_vec()).collect(),
            });
        }
    }
}

fn sample_spinor_forcing(f: &SpinorForcing, grid: &GridSpec, t: f64, out: &mut Vec<SpinorValue>) {
    out.clear();
    out.extend((0..grid.nodes()).map(|j| f(t, grid.x(j))));
}

/// Wave sources at one level: spinor bilinears plus external forcing.
fn fill_sources(
    dim: Dim,
    grid: &GridSpec,
    t: f64,
    psi: &[SpinorValue],
    opts: &EvolveOptions,
    src: &mut [Vec<f64>],
) {
    let np = dim.potentials();
    let mut buf = [0.0; 4];
    for (j, s) in psi.iter().enumerate() {
        if opts.spinor_sources {
            wave_sources_into(dim, s, &mut buf);
        }
        for mu in 0..np {
            src[mu][j] = if opts.spinor_sources { buf[mu] } else { 0.0 };
        }
    }
    if let Some(g) = &opts.wave_forcing {
        for (mu, field) in src.iter_mut().enumerate() {
            for (j, v) in field.iter_mut().enumerate() {
                *v += g(mu, t, grid.x(j));
            }
        }
    }
}

/// `|L(A, 0) psi + g|^2` at one node.
fn applied_sqr<const N: usize>(dim: Dim, pot: &[f64; 4], s: &SpinorValue, g: Option<SpinorValue>) -> f64 {
    let l = coupling_matrix::<N>(dim, pot, 0.0);
    let w = s.pack::<N>();
    let g = g.map(|g| g.pack::<N>());
    (0..N)
        .map(|r| {
            let mut acc: C64 = (0..N).map(|c| l[r][c] * w[c]).sum();
            if let Some(g) = &g {
                acc += g[r];
            }
            acc.norm_sqr()
        })
        .sum()
}

pub(super) struct LevelInputs<'a> {
    pub level: usize,
    pub psi: &'a [SpinorValue],
    pub a: &'a [Vec<f64>],
    pub a_t: &'a [Vec<f64>],
    pub src: &'a [Vec<f64>],
    pub forcing: Option<&'a [SpinorValue]>,
}

pub(super) fn diagnostics(
    dim: Dim,
    grid: &GridSpec,
    eps: Option<f64>,
    inp: &LevelInputs<'_>,
) -> DiagnosticSample {
    let h = grid.h();
    let t = grid.time(inp.level);
    let nodes = grid.nodes();
    let np = dim.potentials();
    let unit = ConeRegion::unit();
    let cone = unit.nodes_at(grid, t);
    // nodes with t < x < 1 - t
    let ratio_nodes = ConeRegion { left: 0.0, right: 1.0 }.nodes_at(grid, t);

    let mut charge = 0.0;
    let mut l1_u = 0.0;
    let mut l1_v = 0.0;
    let mut forcing = 0.0;
    let mut source_l1 = vec![0.0; np];
    let mut sup_transverse = vec![0.0_f64; np.saturating_sub(2)];
    let mut sup_transverse_cone = vec![0.0_f64; np.saturating_sub(2)];
    let mut sup_transverse_sum_cone = 0.0_f64;
    let mut min_ratio: Option<f64> = None;
    let mut pot = [0.0; 4];
    for j in 0..nodes {
        let w = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
        let s = &inp.psi[j];
        let (nu, nv) = (s.norm_u_sqr(), s.norm_v_sqr());
        charge += w * (nu + nv);
        l1_u += w * nu.sqrt();
        l1_v += w * nv.sqrt();
        for mu in 0..np {
            pot[mu] = inp.a[mu][j];
            source_l1[mu] += w * inp.src[mu][j].abs();
        }
        let g = inp.forcing.map(|f| f[j]);
        forcing += w * match dim {
            Dim::Three => applied_sqr::<4>(dim, &pot, s, g),
            _ => applied_sqr_scalar(dim, &pot, s, g),
        };
        if np > 2 {
            let in_cone = cone.contains(&j);
            let mut sum = 0.0;
            for m in 2..np {
                let a = pot[m].abs();
                sup_transverse[m - 2] = sup_transverse[m - 2].max(a);
                if in_cone {
                    sup_transverse_cone[m - 2] = sup_transverse_cone[m - 2].max(a);
                }
                sum += a;
            }
            if in_cone {
                sup_transverse_sum_cone = sup_transverse_sum_cone.max(sum);
            }
        }
        if let Some(eps) = eps {
            let x = grid.x(j);
            if t > 0.0 && ratio_nodes.contains(&j) && x > t + 1e-9 * h && x < 1.0 - t - 1e-9 * h {
                let f = f_eps_unchecked(x - t, eps);
                let r = (nu + nv) / (f * f);
                min_ratio = Some(min_ratio.map_or(r, |m: f64| m.min(r)));
            }
        }
    }
    for v in source_l1.iter_mut() {
        *v *= h;
    }
    DiagnosticSample {
        t,
        charge: h * charge,
        l1_u: h * l1_u,
        l1_v: h * l1_v,
        gauge_residual: gauge_residual_on(grid, &inp.a[0], &inp.a[1], &inp.a_t[0], &unit, t),
        sup_transverse,
        sup_transverse_cone,
        sup_transverse_sum_cone,
        forcing_l2: (h * forcing).sqrt(),
        source_l1,
        min_modulus_ratio: min_ratio,
    }
}

fn applied_sqr_scalar(dim: Dim, pot: &[f64; 4], s: &SpinorValue, g: Option<SpinorValue>) -> f64 {
    let (u, v) = (s.u[0], s.v[0]);
    let p = pot[0] + pot[1];
    let q = pot[0] - pot[1];
    let a2 = if dim == Dim::Two { pot[2] } else { 0.0 };
    let mut fu = C64::new(-p * u.im, p * u.re) + a2 * v;
    let mut fv = C64::new(-q * v.im, q * v.re) - a2 * u;
    if let Some(g) = g {
        fu += g.u[0];
        fv += g.v[0];
    }
    fu.norm_sqr() + fv.norm_sqr()
}

pub(super) fn check_level(
    grid: &GridSpec,
    t: f64,
    psi: &[SpinorValue],
    a: &[Vec<f64>],
    charge: f64,
    guard: bool,
) -> Result<()> {
    // a non-finite spinor value makes the charge sum non-finite
    if !charge.is_finite() {
        return Err(Error::NonFinite {
            field: "psi".into(),
            t,
        });
    }
    for (mu, f) in a.iter().enumerate() {
        if !f.iter().sum::<f64>().is_finite() {
            return Err(Error::NonFinite {
                field: format!("A{mu}"),
                t,
            });
        }
    }
    if guard {
        let n = grid.n;
        let edge = [0, 1, 2, n - 2, n - 1, n];
        let touched = edge
            .iter()
            .any(|&j| psi[j] != SpinorValue::ZERO || a.iter().any(|f| f[j] != 0.0));
        if touched {
            return Err(Error::BoundaryReached { t });
        }
    }
    Ok(())
}

pub fn evolve_from(init: &InitialState, opts: &EvolveOptions) -> Result<Trajectory> {
    let grid = init.grid;
    let dim = init.dim;
    let h = grid.h();
    let nodes = grid.nodes();
    let np = dim.potentials();
    let steps = grid.steps();
    let recorder = Recorder::new(&grid, opts)?;

    let mut traj = Trajectory {
        dim,
        mass: init.mass,
        grid,
        eps: init.eps,
        diagnostics: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
        probes: Vec::new(),
        history: recorder.new_history(),
    };

    let mut kernel = TransportKernel::new(dim, init.mass, h);
    let mut psi = init.psi.clone();
    let mut psi_next = vec![SpinorValue::ZERO; nodes];
    let mut a_prev: Vec<Vec<f64>> = vec![vec![0.0; nodes]; np];
    let mut a_curr = init.potentials.a.clone();
    let mut a_next: Vec<Vec<f64>> = vec![vec![0.0; nodes]; np];
    let mut a_t: Vec<Vec<f64>> = vec![vec![0.0; nodes]; np];
    let mut src: Vec<Vec<f64>> = vec![vec![0.0; nodes]; np];
    let mut forcing_now: Vec<SpinorValue> = Vec::new();
    let mut forcing_next: Vec<SpinorValue> = Vec::new();
    if let Some(f) = &opts.spinor_forcing {
        sample_spinor_forcing(f, &grid, 0.0, &mut forcing_now);
    }

    for level in 0..=steps {
        let t = grid.time(level);
        fill_sources(dim, &grid, t, &psi, opts, &mut src);
        for mu in 0..np {
            if level == 0 {
                first_step(&a_curr[mu], &init.potentials.b[mu], &src[mu], h, &mut a_next[mu]);
                a_t[mu].copy_from_slice(&init.potentials.b[mu]);
            } else {
                diamond_step(&a_prev[mu], &a_curr[mu], &src[mu], h, &mut a_next[mu]);
                let inv = 0.5 / h;
                for ((d, n), p) in a_t[mu].iter_mut().zip(&a_next[mu]).zip(&a_prev[mu]) {
                    *d = (n - p) * inv;
                }
            }
        }
        let forcing = opts.spinor_forcing.as_ref().map(|_| forcing_now.as_slice());
        let sample = diagnostics(
            dim,
            &grid,
            init.eps,
            &LevelInputs {
                level,
                psi: &psi,
                a: &a_curr,
                a_t: &a_t,
                src: &src,
                forcing,
            },
        );
        check_level(&grid, t, &psi, &a_curr, sample.charge, opts.boundary_guard)?;
        traj.diagnostics.push(sample);
        recorder.record(&mut traj, level, &psi, &a_curr, &a_t);
        if level == steps {
            break;
        }
        if let Some(f) = &opts.spinor_forcing {
            sample_spinor_forcing(f, &grid, grid.time(level + 1), &mut forcing_next);
        }
        kernel.step(
            &psi,
            &a_curr,
            &a_next,
            opts.spinor_forcing.as_ref().map(|_| forcing_now.as_slice()),
            opts.spinor_forcing.as_ref().map(|_| forcing_next.as_slice()),
            &mut psi_next,
        );
        std::mem::swap(&mut psi, &mut psi_next);
        std::mem::swap(&mut forcing_now, &mut forcing_next);
        // rotate prev <- curr <- next
        std::mem::swap(&mut a_prev, &mut a_curr);
        std::mem::swap(&mut a_curr, &mut a_next);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::PotentialMode;

    #[test]
    fn forced_a0_is_t_squared_over_two() {
        let grid = GridSpec::new(1.0, 100, 0.4).unwrap();
        let init = InitialState::zero(Dim::One, 0.0, &grid).unwrap();
        let opts = EvolveOptions {
            snapshot_times: vec![0.4],
            wave_forcing: Some(Arc::new(|mu, _, _| if mu == 0 { 1.0 } else { 0.0 })),
            boundary_guard: false,
            ..Default::default()
        };
        let traj = evolve_from(&init, &opts).unwrap();
        let snap = traj.snapshot(0.4).unwrap();
        let steps = grid.steps();
        for j in steps + 1..grid.n - steps {
            assert!((snap.a[0][j] - 0.08).abs() < 1e-14);
            assert_eq!(snap.a[1][j], 0.0);
        }
        assert!(snap.psi.iter().all(|s| *s == SpinorValue::ZERO));
    }

    #[test]
    fn scalar_forcing_norm_matches_generic() {
        let s = SpinorValue::scalar(C64::new(0.3, -1.2), C64::new(0.7, 0.4));
        let g = SpinorValue::scalar(C64::new(0.1, 0.0), C64::new(0.0, 2.0));
        let pot = [0.4, -1.3, 0.8, 0.0];
        for dim in [Dim::One, Dim::Two] {
            for f in [None, Some(g)] {
                let a = applied_sqr_scalar(dim, &pot, &s, f);
                let b = applied_sqr::<2>(dim, &pot, &s, f);
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_datum_stays_zero() {
        let grid = GridSpec::new(3.0, 120, 0.5).unwrap();
        let init = InitialState::zero(Dim::Three, 1.0, &grid).unwrap();
        let traj = evolve_from(&init, &EvolveOptions::default()).unwrap();
        let d = traj.final_diagnostics();
        assert_eq!(d.charge, 0.0);
        assert_eq!(d.gauge_residual, 0.0);
    }

    #[test]
    fn guard_fires_when_support_reaches_boundary() {
        let fam = DataFamily::new(Dim::One, 0.1, 0.0, PotentialMode::Zero).unwrap();
        let grid = GridSpec::new(2.5, 250, 0.4).unwrap();
        let mut init = InitialState::from_family(&fam, &grid).unwrap();
        // widen the grid check by running on a too-long horizon
        init.grid.t_max = 0.8;
        let err = evolve_from(&init, &EvolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::BoundaryReached { .. }), "{err}");
    }

    #[test]
    fn snapshot_times_must_be_levels() {
        let fam = DataFamily::new(Dim::One, 0.1, 0.0, PotentialMode::Zero).unwrap();
        let grid = GridSpec::new(2.5, 250, 0.4).unwrap();
        let opts = EvolveOptions {
            snapshot_times: vec![0.013],
            ..Default::default()
        };
        assert!(matches!(evolve(&fam, &grid, &opts), Err(Error::Grid(_))));
    }
}
