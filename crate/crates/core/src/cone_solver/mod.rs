//! Evolution of the reduced system on the characteristic grid, the Picard
//! iteration used as an independent second solver, and the diagnostics
//! evaluated on their output.

mod evolve;
mod picard;
pub mod transport;
pub mod wave;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dirac_algebra::{Dim, SpinorValue};
use crate::error::{Error, Result};
use crate::initial_data::GridSpec;
use crate::quadrature::integrate_linear;

pub use evolve::{evolve, evolve_from, EvolveOptions, InitialState};
pub use picard::{picard_solve, picard_solve_from, PicardOptions, PicardOutcome};

/// Spinor samples on every grid node at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub dim: Dim,
    pub grid: GridSpec,
    pub t: f64,
    pub psi: Vec<SpinorValue>,
}

/// Potentials on two consecutive levels plus their time derivative at the
/// later one. All arrays are indexed `[mu][node]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialState {
    pub a_prev: Vec<Vec<f64>>,
    pub a_curr: Vec<Vec<f64>>,
    pub a_t: Vec<Vec<f64>>,
}

/// Backward light cone with base `[left, right]` at `t = 0` and apex at
/// `((right - left) / 2, (left + right) / 2)`.
///
/// Grid nodes are assigned with a half-open rule: at time `s` a node `y`
/// belongs to the cone when `left + s <= y < right - s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeRegion {
    pub left: f64,
    pub right: f64,
}

impl ConeRegion {
    pub fn over(left: f64, right: f64) -> Result<Self> {
        if !(left <= right) {
            return Err(Error::Region(format!("empty base [{left}, {right}]")));
        }
        Ok(ConeRegion { left, right })
    }

    /// The cone `K^{(t,x)}` with vertex `(t, x)`.
    pub fn with_vertex(t: f64, x: f64) -> Self {
        ConeRegion {
            left: x - t,
            right: x + t,
        }
    }

    /// Cone of dependence over the unit interval.
    pub fn unit() -> Self {
        ConeRegion {
            left: -1.0,
            right: 1.0,
        }
    }

    pub fn apex(&self) -> (f64, f64) {
        (0.5 * (self.right - self.left), 0.5 * (self.left + self.right))
    }

    pub fn contains(&self, s: f64, y: f64) -> bool {
        s >= 0.0 && self.left + s <= y && y < self.right - s
    }

    /// Node indices inside the cone at time `s`.
    pub fn nodes_at(&self, grid: &GridSpec, s: f64) -> Range<usize> {
        let h = grid.h();
        let tol = 1e-9;
        let lo = ((self.left + s + grid.half_width) / h - tol).ceil().max(0.0);
        let hi = ((self.right - s + grid.half_width) / h - tol).ceil().min(grid.nodes() as f64);
        if hi <= lo {
            return 0..0;
        }
        lo as usize..hi as usize
    }
}

/// Per-level diagnostics recorded by the solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSample {
    pub t: f64,
    /// Trapezoid quadrature of `|u|^2 + |v|^2`.
    pub charge: f64,
    pub l1_u: f64,
    pub l1_v: f64,
    /// `sup |d_t A_0 - d_x A_1|` over the cone over `[-1, 1]`.
    pub gauge_residual: f64,
    /// `sup_x |A_j|` for `j >= 2`.
    pub sup_transverse: Vec<f64>,
    /// `sup |A_j|`, `j >= 2`, restricted to the cone over `[-1, 1]`.
    pub sup_transverse_cone: Vec<f64>,
    /// `sup (|A_2| + |A_3|)` over the cone over `[-1, 1]`.
    pub sup_transverse_sum_cone: f64,
    /// `L^2` norm of the Dirac forcing `A_mu gamma^mu psi` (plus any
    /// external forcing).
    pub forcing_l2: f64,
    /// `L^1` norm of each wave source.
    pub source_l1: Vec<f64>,
    /// `min |psi|^2 / f_eps(x - t)^2` over nodes with `0 < t < x < 1 - t`.
    pub min_modulus_ratio: Option<f64>,
}

/// Full fields at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub psi: Vec<SpinorValue>,
    pub a: Vec<Vec<f64>>,
    pub a_t: Vec<Vec<f64>>,
}

/// Potentials sampled at a fixed space-time point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub t: f64,
    pub x: f64,
    pub a: Vec<f64>,
}

/// Every level of a window of nodes, kept for space-time quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct History {
    pub first_node: usize,
    pub levels: Vec<HistoryLevel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistoryLevel {
    pub psi: Vec<SpinorValue>,
    pub a: Vec<Vec<f64>>,
}

impl History {
    pub fn node_range(&self) -> Range<usize> {
        let len = self.levels.first().map_or(0, |l| l.psi.len());
        self.first_node..self.first_node + len
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dim: Dim,
    pub mass: f64,
    pub grid: GridSpec,
    /// Regularization of the datum, when the run started from the family.
    pub eps: Option<f64>,
    pub diagnostics: Vec<DiagnosticSample>,
    pub snapshots: Vec<Snapshot>,
    pub probes: Vec<ProbeSample>,
    pub history: Option<History>,
}

impl Trajectory {
    pub fn snapshot(&self, t: f64) -> Result<&Snapshot> {
        let level = self.grid.level_of(t)?;
        self.snapshots
            .iter()
            .find(|s| self.grid.level_of(s.t).ok() == Some(level))
            .ok_or_else(|| Error::Region(format!("no snapshot stored at t = {t}")))
    }

    pub fn final_diagnostics(&self) -> &DiagnosticSample {
        self.diagnostics.last().expect("a trajectory has at least one level")
    }

    /// Largest relative charge deviation from the initial level.
    pub fn charge_drift(&self) -> f64 {
        let q0 = self.diagnostics[0].charge;
        self.diagnostics
            .iter()
            .map(|d| (d.charge - q0).abs() / q0)
            .fold(0.0, f64::max)
    }
}

/// Trapezoid quadrature of `|u|^2 + |v|^2` on the snapshot at `t`.
pub fn charge(traj: &Trajectory, t: f64) -> Result<f64> {
    let snap = traj.snapshot(t)?;
    let dens: Vec<f64> = snap.psi.iter().map(SpinorValue::density).collect();
    Ok(crate::quadrature::trapezoid(&dens, traj.grid.h()))
}

/// `sup |d_t A_0 - d_x A_1|` over the nodes of `region` at time `t`, with a
/// centered difference in space.
pub fn gauge_residual(traj: &Trajectory, t: f64, region: &ConeRegion) -> Result<f64> {
    let g = &traj.grid;
    if region.left < -g.half_width || region.right > g.half_width {
        return Err(Error::Region(format!(
            "cone over [{}, {}] leaves the grid [-{L}, {L}]",
            region.left,
            region.right,
            L = g.half_width
        )));
    }
    let snap = traj.snapshot(t)?;
    Ok(gauge_residual_on(g, &snap.a[0], &snap.a[1], &snap.a_t[0], region, t))
}

pub(crate) fn gauge_residual_on(
    grid: &GridSpec,
    _a0: &[f64],
    a1: &[f64],
    a0_t: &[f64],
    region: &ConeRegion,
    t: f64,
) -> f64 {
    let h = grid.h();
    let range = region.nodes_at(grid, t);
    let lo = range.start.max(1);
    let hi = range.end.min(grid.n);
    (lo..hi)
        .map(|j| (a0_t[j] - (a1[j + 1] - a1[j - 1]) / (2.0 * h)).abs())
        .fold(0.0, f64::max)
}

/// `|u|^2 + |v|^2`.
pub fn density(s: &SpinorValue, _a: &[f64]) -> f64 {
    s.density()
}

/// `|u| |v|`, the transversal product bounded by the null-form estimate.
pub fn null_product(s: &SpinorValue, _a: &[f64]) -> f64 {
    (s.norm_u_sqr() * s.norm_v_sqr()).sqrt()
}

/// Space-time integral of `selector(psi, A)` over `region`, whose apex must
/// be a node inside the recorded history.
///
/// Time uses the midpoint rule between consecutive levels (the integrand at
/// the midpoint is the average of the two levels); each cross-section is
/// integrated exactly for the piecewise-linear interpolant in space.
pub fn cone_integral(
    traj: &Trajectory,
    selector: &dyn Fn(&SpinorValue, &[f64]) -> f64,
    region: &ConeRegion,
) -> Result<f64> {
    let g = &traj.grid;
    let (apex_t, apex_x) = region.apex();
    if apex_t == 0.0 {
        return Ok(0.0);
    }
    let top = g.level_of(apex_t)?;
    let hist = traj
        .history
        .as_ref()
        .ok_or_else(|| Error::Region("trajectory has no recorded history".into()))?;
    if top >= hist.levels.len() {
        return Err(Error::Region(format!(
            "apex time {apex_t} is beyond the recorded slab"
        )));
    }
    let h = g.h();
    let range = hist.node_range();
    let need_lo = ((region.left + g.half_width) / h).floor() as isize - 1;
    let need_hi = ((region.right + g.half_width) / h).ceil() as isize + 1;
    let lo = need_lo.max(0) as usize;
    let hi = (need_hi.max(0) as usize).min(g.n);
    if lo < range.start || hi >= range.end {
        return Err(Error::Region(format!(
            "cone over [{}, {}] is not inside the recorded window",
            region.left, region.right
        )));
    }
    let eval_level = |level: usize| -> Vec<f64> {
        let rec = &hist.levels[level];
        let mut a = vec![0.0; rec.a.len()];
        (lo..=hi)
            .map(|j| {
                let k = j - hist.first_node;
                for (mu, field) in rec.a.iter().enumerate() {
                    a[mu] = field[k];
                }
                selector(&rec.psi[k], &a)
            })
            .collect()
    };
    let x0 = g.x(lo);
    let mut below = eval_level(0);
    let mut total = 0.0;
    for level in 0..top {
        let above = eval_level(level + 1);
        let mid: Vec<f64> = below.iter().zip(&above).map(|(p, q)| 0.5 * (p + q)).collect();
        let half_width = apex_t - (level as f64 + 0.5) * h;
        total += h * integrate_linear(&mid, x0, h, apex_x - half_width, apex_x + half_width);
        below = above;
    }
    Ok(total)
}
