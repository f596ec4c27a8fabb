//! Trapezoidal transport of the spinor along exact characteristics.
//!
//! `u` at `(n+1, j)` is reached from `(n, j-1)` and `v` from `(n, j+1)`.
//! With `L(A)` the linear coupling of the Dirac right-hand side and `g` an
//! optional external forcing, each node solves
//!
//! `(I - h/2 L_new) w_new = [w + h/2 (L w + g)]_upstream + h/2 g_new`
//!
//! where the upstream bracket takes its `u` rows from the left neighbour and
//! its `v` rows from the right neighbour.

use num_complex::Complex64;

use crate::dirac_algebra::{coupling_matrix, Dim, SpinorValue, C64};

const ZERO: C64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct TransportKernel {
    pub dim: Dim,
    pub mass: f64,
    pub h: f64,
    scratch: Vec<[C64; 4]>,
    up: Vec<C64>,
    down: Vec<C64>,
}

#[inline]
fn potentials_at(pot: &[Vec<f64>], j: usize) -> [f64; 4] {
    let mut a = [0.0; 4];
    for (mu, field) in pot.iter().enumerate() {
        a[mu] = field[j];
    }
    a
}

/// Gaussian elimination with partial pivoting on a small dense system.
#[inline]
pub(crate) fn solve_small<const N: usize>(mut m: [[C64; N]; N], mut b: [C64; N]) -> [C64; N] {
    for col in 0..N {
        let mut piv = col;
        for r in col + 1..N {
            if m[r][col].norm_sqr() > m[piv][col].norm_sqr() {
                piv = r;
            }
        }
        m.swap(col, piv);
        b.swap(col, piv);
        let inv = 1.0 / m[col][col];
        for r in col + 1..N {
            let f = m[r][col] * inv;
            if f != ZERO {
                for c in col..N {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
                let bc = b[col];
                b[r] -= f * bc;
            }
        }
    }
    let mut x = [ZERO; N];
    for r in (0..N).rev() {
        let mut acc = b[r];
        for c in r + 1..N {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    x
}

impl TransportKernel {
    pub fn new(dim: Dim, mass: f64, h: f64) -> Self {
        TransportKernel {
            dim,
            mass,
            h,
            scratch: Vec::new(),
            up: Vec::new(),
            down: Vec::new(),
        }
    }

    /// Advances one level. `pot_old`/`pot_new` hold `A_mu` at the two time
    /// levels; the forcings are already in transport form.
    pub fn step(
        &mut self,
        psi: &[SpinorValue],
        pot_old: &[Vec<f64>],
        pot_new: &[Vec<f64>],
        forcing_old: Option<&[SpinorValue]>,
        forcing_new: Option<&[SpinorValue]>,
        out: &mut [SpinorValue],
    ) {
        match self.dim {
            Dim::Three => self.step_n::<4>(psi, pot_old, pot_new, forcing_old, forcing_new, out),
            _ => self.step_scalar(psi, pot_old, pot_new, forcing_old, forcing_new, out),
        }
    }

    /// Closed-form version of `step_n::<2>` for scalar `u`, `v`.
    fn step_scalar(
        &mut self,
        psi: &[SpinorValue],
        pot_old: &[Vec<f64>],
        pot_new: &[Vec<f64>],
        forcing_old: Option<&[SpinorValue]>,
        forcing_new: Option<&[SpinorValue]>,
        out: &mut [SpinorValue],
    ) {
        let nodes = psi.len();
        let hh = 0.5 * self.h;
        let mass = self.mass;
        let two = self.dim == Dim::Two;
        let off = |pot: &[Vec<f64>], j: usize| -> (C64, C64) {
            let a2 = if two { pot[2][j] } else { 0.0 };
            (C64::new(a2, -mass), C64::new(-a2, -mass))
        };
        self.up.resize(nodes, ZERO);
        self.down.resize(nodes, ZERO);
        for j in 0..nodes {
            let (u, v) = (psi[j].u[0], psi[j].v[0]);
            let p = pot_old[0][j] + pot_old[1][j];
            let q = pot_old[0][j] - pot_old[1][j];
            let (l01, l10) = off(pot_old, j);
            let mut du = C64::new(-p * u.im, p * u.re) + l01 * v;
            let mut dv = C64::new(-q * v.im, q * v.re) + l10 * u;
            if let Some(f) = forcing_old {
                du += f[j].u[0];
                dv += f[j].v[0];
            }
            self.up[j] = u + hh * du;
            self.down[j] = v + hh * dv;
        }
        for j in 0..nodes {
            let mut ru = if j > 0 { self.up[j - 1] } else { ZERO };
            let mut rv = if j + 1 < nodes { self.down[j + 1] } else { ZERO };
            if let Some(f) = forcing_new {
                ru += hh * f[j].u[0];
                rv += hh * f[j].v[0];
            }
            let p = pot_new[0][j] + pot_new[1][j];
            let q = pot_new[0][j] - pot_new[1][j];
            let (l01, l10) = off(pot_new, j);
            let m00 = C64::new(1.0, -hh * p);
            let m11 = C64::new(1.0, -hh * q);
            let m01 = -hh * l01;
            let m10 = -hh * l10;
            let inv = 1.0 / (m00 * m11 - m01 * m10);
            out[j] = SpinorValue::scalar((m11 * ru - m01 * rv) * inv, (m00 * rv - m10 * ru) * inv);
        }
    }

    pub(crate) fn step_n<const N: usize>(
        &mut self,
        psi: &[SpinorValue],
        pot_old: &[Vec<f64>],
        pot_new: &[Vec<f64>],
        forcing_old: Option<&[SpinorValue]>,
        forcing_new: Option<&[SpinorValue]>,
        out: &mut [SpinorValue],
    ) {
        let nodes = psi.len();
        let half_h = 0.5 * self.h;
        let k = N / 2;
        self.scratch.resize(nodes, [ZERO; 4]);
        for j in 0..nodes {
            let w = psi[j].pack::<N>();
            let l = coupling_matrix::<N>(self.dim, &potentials_at(pot_old, j), self.mass);
            let g = forcing_old.map(|f| f[j].pack::<N>());
            let e = &mut self.scratch[j];
            for r in 0..N {
                let mut acc = ZERO;
                for c in 0..N {
                    acc += l[r][c] * w[c];
                }
                if let Some(g) = &g {
                    acc += g[r];
                }
                e[r] = w[r] + half_h * acc;
            }
        }
        for j in 0..nodes {
            let mut rhs = [ZERO; N];
            if j > 0 {
                rhs[..k].copy_from_slice(&self.scratch[j - 1][..k]);
            }
            if j + 1 < nodes {
                rhs[k..].copy_from_slice(&self.scratch[j + 1][k..N]);
            }
            if let Some(f) = forcing_new {
                let g = f[j].pack::<N>();
                for r in 0..N {
                    rhs[r] += half_h * g[r];
                }
            }
            let l = coupling_matrix::<N>(self.dim, &potentials_at(pot_new, j), self.mass);
            let mut m = [[ZERO; N]; N];
            for r in 0..N {
                for c in 0..N {
                    m[r][c] = -half_h * l[r][c];
                }
                m[r][r] += 1.0;
            }
            out[j] = SpinorValue::unpack(&solve_small(m, rhs));
        }
    }
}
