//! Diamond scheme for `(d_t^2 - d_x^2) A = S` on the characteristic grid.
//!
//! Interior update `A^{n+1}_j = A^n_{j-1} + A^n_{j+1} - A^{n-1}_j + h^2 S^n_j`,
//! which is exact for the homogeneous equation and for any source that is
//! constant on each diamond. The two end nodes are held at zero.

use crate::error::{Error, Result};
use crate::initial_data::GridSpec;

/// First level from `A(0) = a`, `d_t A(0) = b`.
pub fn first_step(a: &[f64], b: &[f64], src: &[f64], h: f64, out: &mut [f64]) {
    let n = out.len() - 1;
    out[0] = 0.0;
    out[n] = 0.0;
    for j in 1..n {
        out[j] = 0.5 * (a[j - 1] + a[j + 1]) + h * b[j] + 0.5 * h * h * src[j];
    }
}

pub fn diamond_step(prev: &[f64], curr: &[f64], src: &[f64], h: f64, out: &mut [f64]) {
    let n = out.len() - 1;
    out[0] = 0.0;
    out[n] = 0.0;
    let h2 = h * h;
    for (((o, c), p), s) in out[1..n]
        .iter_mut()
        .zip(curr.windows(3))
        .zip(&prev[1..n])
        .zip(&src[1..n])
    {
        *o = c[0] + c[2] - p + h2 * s;
    }
}

/// A scalar wave run decoupled from any spinor, kept level by level.
#[derive(Clone, Debug)]
pub struct WaveRun {
    pub grid: GridSpec,
    /// Levels `0 ..= steps + 1`; the extra level gives a centered time
    /// derivative at `t_max`.
    pub levels: Vec<Vec<f64>>,
    pub initial_velocity: Vec<f64>,
}

impl WaveRun {
    pub fn solution(&self, level: usize) -> &[f64] {
        &self.levels[level]
    }

    /// Centered time derivative; uses the velocity data at level 0.
    pub fn time_derivative(&self, level: usize) -> Vec<f64> {
        if level == 0 {
            return self.initial_velocity.clone();
        }
        let h = self.grid.h();
        self.levels[level + 1]
            .iter()
            .zip(&self.levels[level - 1])
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect()
    }
}

/// Solves the wave equation with data `(f, g)` and source `source(t, x)`
/// up to `grid.t_max`.
pub fn solve_wave(
    grid: &GridSpec,
    f: &[f64],
    g: &[f64],
    source: &dyn Fn(f64, f64) -> f64,
) -> Result<WaveRun> {
    let nodes = grid.nodes();
    if f.len() != nodes || g.len() != nodes {
        return Err(Error::Shape(format!("wave data need {nodes} samples")));
    }
    let h = grid.h();
    let xs = grid.xs();
    let steps = grid.steps();
    let sample = |level: usize| -> Vec<f64> {
        let t = grid.time(level);
        xs.iter().map(|&x| source(t, x)).collect()
    };
    let mut levels = Vec::with_capacity(steps + 2);
    levels.push(f.to_vec());
    let mut next = vec![0.0; nodes];
    first_step(f, g, &sample(0), h, &mut next);
    levels.push(next);
    for level in 1..=steps {
        let mut next = vec![0.0; nodes];
        diamond_step(&levels[level - 1], &levels[level], &sample(level), h, &mut next);
        levels.push(next);
    }
    Ok(WaveRun {
        grid: *grid,
        levels,
        initial_velocity: g.to_vec(),
    })
}
