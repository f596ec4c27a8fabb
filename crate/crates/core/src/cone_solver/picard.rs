//! Fixed-point iteration on a whole space-time slab: the spinor is
//! transported with frozen potentials, and the potentials are recomputed
//! from the frozen spinor by d'Alembert's formula.

use super::evolve::{check_level, diagnostics, EvolveOptions, InitialState, LevelInputs, Recorder};
use super::transport::TransportKernel;
use super::Trajectory;
use crate::dirac_algebra::{wave_sources_into, SpinorValue};
use crate::error::{Error, Result};
use crate::initial_data::{DataFamily, GridSpec};

#[derive(Clone, Debug)]
pub struct PicardOptions {
    /// Stop once successive iterates are closer than this in the slab norm.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Recording options; forcing terms are not supported here.
    pub record: EvolveOptions,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tol: 1e-10,
            max_sweeps: 200,
            record: EvolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    /// Slab distance between iterate `k` and `k + 1`.
    pub distances: Vec<f64>,
}

impl PicardOutcome {
    pub fn sweeps(&self) -> usize {
        self.distances.len()
    }

    /// Ratios of successive distances.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

const STALL_LIMIT: usize = 5;

/// Runs the iteration on `[0, grid.t_max]`.
pub fn picard_solve(fam: &DataFamily, grid: &GridSpec, opts: &PicardOptions) -> Result<PicardOutcome> {
    picard_solve_from(&InitialState::from_family(fam, grid)?, opts)
}

struct Slab {
    /// `psi[level][node]`, levels `0 ..= steps`.
    psi: Vec<Vec<SpinorValue>>,
    /// `a[level][mu][node]`, levels `0 ..= steps + 1`.
    a: Vec<Vec<Vec<f64>>>,
}

fn prefix(samples: &[f64]) -> Vec<f64> {
    // cumulative trapezoid: p[k] = integral from node 0 to node k
    let mut p = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    p.push(0.0);
    for w in samples.windows(2) {
        acc += 0.5 * (w[0] + w[1]);
        p.push(acc);
    }
    p
}

/// Trapezoid integral between nodes `lo` and `hi` (clamped to the grid,
/// zero outside) in units of `h`.
fn span(p: &[f64], lo: isize, hi: isize) -> f64 {
    let last = p.len() as isize - 1;
    let lo = lo.clamp(0, last) as usize;
    let hi = hi.clamp(0, last) as usize;
    p[hi] - p[lo]
}

/// Potentials on every level from d'Alembert's formula with the spinor
/// bilinears of `psi` as source.
fn dalembert(init: &InitialState, psi: &[Vec<SpinorValue>], spinor_sources: bool) -> Vec<Vec<Vec<f64>>> {
    let grid = &init.grid;
    let dim = init.dim;
    let h = grid.h();
    let nodes = grid.nodes();
    let np = dim.potentials();
    let steps = grid.steps();
    let n = grid.n as isize;
    let mut src_prefix: Vec<Vec<Vec<f64>>> = Vec::with_capacity(psi.len());
    let mut buf = [0.0; 4];
    for level in psi {
        let mut fields = vec![vec![0.0; nodes]; np];
        if spinor_sources {
            for (j, s) in level.iter().enumerate() {
                wave_sources_into(dim, s, &mut buf);
                for mu in 0..np {
                    fields[mu][j] = buf[mu];
                }
            }
        }
        src_prefix.push(fields.iter().map(|f| prefix(f)).collect());
    }
    let b_prefix: Vec<Vec<f64>> = init.potentials.b.iter().map(|f| prefix(f)).collect();
    let a_at = |mu: usize, k: isize| -> f64 {
        if k < 0 || k > n {
            0.0
        } else {
            init.potentials.a[mu][k as usize]
        }
    };
    let mut out = Vec::with_capacity(steps + 2);
    for lvl in 0..=steps + 1 {
        let l = lvl as isize;
        let mut fields = vec![vec![0.0; nodes]; np];
        for mu in 0..np {
            for j in 1..nodes - 1 {
                let ji = j as isize;
                let mut v = 0.5 * (a_at(mu, ji - l) + a_at(mu, ji + l))
                    + 0.5 * h * span(&b_prefix[mu], ji - l, ji + l);
                // trapezoid in time over source levels 0..lvl; the top
                // cross-section has zero width
                let mut duhamel = 0.0;
                for m in 0..lvl {
                    let w = if m == 0 { 0.5 } else { 1.0 };
                    let r = l - m as isize;
                    duhamel += w * span(&src_prefix[m][mu], ji - r, ji + r);
                }
                v += 0.5 * h * h * duhamel;
                fields[mu][j] = v;
            }
        }
        out.push(fields);
    }
    out
}

fn transport(init: &InitialState, a: &[Vec<Vec<f64>>]) -> Vec<Vec<SpinorValue>> {
    let steps = init.grid.steps();
    let mut kernel = TransportKernel::new(init.dim, init.mass, init.grid.h());
    let mut psi = Vec::with_capacity(steps + 1);
    psi.push(init.psi.clone());
    for level in 0..steps {
        let mut next = vec![SpinorValue::ZERO; init.grid.nodes()];
        kernel.step(&psi[level], &a[level], &a[level + 1], None, None, &mut next);
        psi.push(next);
    }
    psi
}

/// `max_t ||dpsi||_2 + sum_mu (||dA||_inf + ||d_x dA||_1 + ||d_t dA||_1)`.
fn slab_distance(grid: &GridSpec, p: &Slab, q: &Slab) -> f64 {
    let h = grid.h();
    let steps = grid.steps();
    let mut worst = 0.0_f64;
    for level in 0..=steps {
        let dpsi: f64 = p.psi[level]
            .iter()
            .zip(&q.psi[level])
            .map(|(x, y)| (*x - *y).density())
            .sum::<f64>()
            * h;
        let mut total = dpsi.sqrt();
        for mu in 0..p.a[level].len() {
            let d: Vec<f64> = p.a[level][mu].iter().zip(&q.a[level][mu]).map(|(x, y)| x - y).collect();
            let d_next: Vec<f64> = p.a[level + 1][mu]
                .iter()
                .zip(&q.a[level + 1][mu])
                .map(|(x, y)| x - y)
                .collect();
            let sup = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let tv: f64 = d.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            let dt: f64 = d.iter().zip(&d_next).map(|(x, y)| (y - x).abs()).sum();
            total += sup + tv + dt;
        }
        worst = worst.max(total);
    }
    worst
}

pub fn picard_solve_from(init: &InitialState, opts: &PicardOptions) -> Result<PicardOutcome> {
    let rec = &opts.record;
    if rec.wave_forcing.is_some() || rec.spinor_forcing.is_some() {
        return Err(Error::InvalidParameter(
            "the Picard solver does not take external forcing".into(),
        ));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let grid = init.grid;
    let steps = grid.steps();
    let recorder = Recorder::new(&grid, rec)?;

    // free evolution: potentials without source, spinor with no potential
    let free_a = dalembert(init, &vec![vec![SpinorValue::ZERO; grid.nodes()]; steps + 1], false);
    let zero_a = vec![vec![vec![0.0; grid.nodes()]; init.dim.potentials()]; steps + 2];
    let mut current = Slab {
        psi: transport(init, &zero_a),
        a: free_a,
    };

    let mut distances = Vec::new();
    let mut stalled = 0;
    loop {
        let a = dalembert(init, &current.psi, rec.spinor_sources);
        let psi = transport(init, &a);
        let next = Slab { psi, a };
        let d = slab_distance(&grid, &current, &next);
        if !d.is_finite() {
            return Err(Error::NonFinite {
                field: "picard iterate".into(),
                t: grid.t_max,
            });
        }
        if let Some(&prev) = distances.last() {
            if d >= prev {
                stalled += 1;
            } else {
                stalled = 0;
            }
            if stalled >= STALL_LIMIT {
                return Err(Error::NonContraction { ratio: d / prev });
            }
        }
        distances.push(d);
        current = next;
        if d < opts.tol {
            break;
        }
        if distances.len() >= opts.max_sweeps {
            let n = distances.len();
            return Err(Error::NonContraction {
                ratio: distances[n - 1] / distances[n - 2],
            });
        }
    }

    let h = grid.h();
    let mut traj = Trajectory {
        dim: init.dim,
        mass: init.mass,
        grid,
        eps: init.eps,
        diagnostics: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
        probes: Vec::new(),
        history: recorder.new_history(),
    };
    let np = init.dim.potentials();
    let mut buf = [0.0; 4];
    for level in 0..=steps {
        let t = grid.time(level);
        let psi = &current.psi[level];
        let a = &current.a[level];
        let a_t: Vec<Vec<f64>> = (0..np)
            .map(|mu| {
                if level == 0 {
                    init.potentials.b[mu].clone()
                } else {
                    current.a[level + 1][mu]
                        .iter()
                        .zip(&current.a[level - 1][mu])
                        .map(|(p, m)| (p - m) / (2.0 * h))
                        .collect()
                }
            })
            .collect();
        let mut src = vec![vec![0.0; grid.nodes()]; np];
        if rec.spinor_sources {
            for (j, s) in psi.iter().enumerate() {
                wave_sources_into(init.dim, s, &mut buf);
                for mu in 0..np {
                    src[mu][j] = buf[mu];
                }
            }
        }
        let sample = diagnostics(
            init.dim,
            &grid,
            init.eps,
            &LevelInputs {
                level,
                psi,
                a,
                a_t: &a_t,
                src: &src,
                forcing: None,
            },
        );
        check_level(&grid, t, psi, a, sample.charge, rec.boundary_guard)?;
        traj.diagnostics.push(sample);
        recorder.record(&mut traj, level, psi, a, &a_t);
    }
    Ok(PicardOutcome {
        trajectory: traj,
        distances,
    })
}
