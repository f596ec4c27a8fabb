//! The mollified singular datum, the cutoff, the two potential-data modes
//! and the norm machinery used to measure convergence below the charge.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cone_solver::SpinorField;
use crate::dirac_algebra::{Dim, SpinorValue};
use crate::error::{Error, Result};

/// Smooth cutoff equal to one on `[-inner, inner]` and zero outside
/// `[-outer, outer]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            inner: 1.0,
            outer: 2.0,
        }
    }
}

impl CutoffSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner > 0.0 && self.inner < self.outer && self.outer.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff needs 0 < inner < outer, got inner = {}, outer = {}",
                self.inner, self.outer
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialMode {
    /// All potential data vanish.
    Zero,
    /// Only `b_1` is nonzero, with `d_x b_1 = |psi_0|^2` on `[-1, 1]` so the
    /// Lorenz gauge propagates under the evolution equations.
    Constrained,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataFamily {
    pub dim: Dim,
    pub eps: f64,
    pub mass: f64,
    pub potential_mode: PotentialMode,
    #[serde(default)]
    pub cutoff: CutoffSpec,
}

impl DataFamily {
    pub fn new(dim: Dim, eps: f64, mass: f64, potential_mode: PotentialMode) -> Result<Self> {
        let fam = DataFamily {
            dim,
            eps,
            mass,
            potential_mode,
            cutoff: CutoffSpec::default(),
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        self.cutoff.validate()?;
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be >= 0, got {}", self.eps)));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be >= 0, got {}", self.mass)));
        }
        if self.potential_mode == PotentialMode::Constrained && self.eps == 0.0 {
            return Err(Error::InvalidParameter(
                "constrained potential data need eps > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform grid on `[-L, L]` with `n` cells. The time step equals the
/// spacing, so `t_max` must be a whole number of steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub n: usize,
    pub t_max: f64,
}

const ALIGN_TOL: f64 = 1e-8;

impl GridSpec {
    pub fn new(half_width: f64, n: usize, t_max: f64) -> Result<Self> {
        let g = GridSpec {
            half_width,
            n,
            t_max,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::Grid(format!("half width must be positive, got {}", self.half_width)));
        }
        if self.n < 4 {
            return Err(Error::Grid(format!("need at least 4 cells, got {}", self.n)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Grid(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        self.level_of(self.t_max).map_err(|_| {
            Error::Grid(format!(
                "t_max = {} is not a whole number of steps of size h = {}",
                self.t_max,
                self.h()
            ))
        })?;
        Ok(())
    }

    /// Checks that signals starting inside `[-support, support]` stay two
    /// cells away from the boundary up to `t_max`.
    pub fn check_support(&self, support: f64) -> Result<()> {
        let need = support + self.t_max + 2.0 * self.h();
        if self.half_width < need * (1.0 - 1e-12) {
            return Err(Error::Grid(format!(
                "half width {} is below support + t_max + 2h = {need}",
                self.half_width
            )));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.h()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nodes()).map(|j| self.x(j)).collect()
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.h()).round() as usize
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.h()
    }

    /// Index of the time level at `t`, which must be aligned with the step.
    pub fn level_of(&self, t: f64) -> Result<usize> {
        let k = t / self.h();
        if t < 0.0 || (k - k.round()).abs() > ALIGN_TOL * k.max(1.0) {
            return Err(Error::Grid(format!("t = {t} is not on a time level (h = {})", self.h())));
        }
        Ok(k.round() as usize)
    }

    /// Index of the node at `x`, which must be aligned with the grid.
    pub fn node_of(&self, x: f64) -> Result<usize> {
        let k = (x + self.half_width) / self.h();
        if (k - k.round()).abs() > ALIGN_TOL * k.abs().max(1.0) || k.round() < 0.0 || k.round() as usize > self.n {
            return Err(Error::Grid(format!("x = {x} is not a grid node")));
        }
        Ok(k.round() as usize)
    }
}

fn transition(r: f64) -> f64 {
    if r > 0.0 {
        (-1.0 / r).exp()
    } else {
        0.0
    }
}

/// The cutoff built from the transition `exp(-1/r)`.
pub fn chi(x: f64, c: &CutoffSpec) -> f64 {
    let ax = x.abs();
    let up = transition(c.outer - ax);
    if up == 0.0 {
        return 0.0;
    }
    up / (up + transition(ax - c.inner))
}

/// `(eps^2 + x^2)^(-1/4)`; for `eps = 0` this is `|x|^(-1/2)`.
pub fn f_eps(x: f64, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be >= 0, got {eps}")));
    }
    if eps == 0.0 && x == 0.0 {
        return Err(Error::Singular("f_0 is singular at x = 0".into()));
    }
    Ok(f_eps_unchecked(x, eps))
}

#[inline]
pub(crate) fn f_eps_unchecked(x: f64, eps: f64) -> f64 {
    1.0 / (eps * eps + x * x).sqrt().sqrt()
}

/// `log(x + sqrt(eps^2 + x^2))`, evaluated without cancellation for x < 0.
pub(crate) fn log_shift(x: f64, eps: f64) -> f64 {
    (x / eps).asinh() + eps.ln()
}

/// Samples of `chi f_eps` on the grid. With `eps = 0` the node at the
/// origin, if present, is set to zero.
pub fn profile_samples(eps: f64, grid: &GridSpec, cutoff: &CutoffSpec) -> Result<Vec<f64>> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be >= 0, got {eps}")));
    }
    Ok(grid
        .xs()
        .into_iter()
        .map(|x| {
            let c = chi(x, cutoff);
            if c == 0.0 || (eps == 0.0 && x == 0.0) {
                0.0
            } else {
                c * f_eps_unchecked(x, eps)
            }
        })
        .collect())
}

/// The spinor datum at `t = 0`: first component of `u` equal to
/// `chi f_eps`, everything else zero.
pub fn spinor_datum(fam: &DataFamily, grid: &GridSpec) -> Result<SpinorField> {
    fam.validate()?;
    if fam.eps == 0.0 {
        return Err(Error::InvalidParameter(
            "the unmollified datum (eps = 0) cannot be evolved".into(),
        ));
    }
    let psi = profile_samples(fam.eps, grid, &fam.cutoff)?
        .into_iter()
        .map(|p| SpinorValue::scalar(Complex64::new(p, 0.0), Complex64::new(0.0, 0.0)))
        .collect();
    Ok(SpinorField {
        dim: fam.dim,
        grid: *grid,
        t: 0.0,
        psi,
    })
}

/// Potential data `a_mu = A_mu(0)` and `b_mu = d_t A_mu(0)`, indexed `[mu][node]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialData {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl PotentialData {
    pub fn zeros(dim: Dim, nodes: usize) -> Self {
        PotentialData {
            a: vec![vec![0.0; nodes]; dim.potentials()],
            b: vec![vec![0.0; nodes]; dim.potentials()],
        }
    }
}

pub fn potential_data(fam: &DataFamily, grid: &GridSpec) -> Result<PotentialData> {
    fam.validate()?;
    let mut data = PotentialData::zeros(fam.dim, grid.nodes());
    if fam.potential_mode == PotentialMode::Constrained {
        for (j, b1) in data.b[1].iter_mut().enumerate() {
            let x = grid.x(j);
            let c = chi(x, &fam.cutoff);
            if c != 0.0 {
                *b1 = c * log_shift(x, fam.eps);
            }
        }
    }
    Ok(data)
}

/// Trapezoid approximation of the `L^p` norm of grid samples.
pub fn lp_norm(samples: &[f64], p: f64, grid: &GridSpec) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("L^p norm needs 1 <= p < inf, got {p}")));
    }
    check_len(samples, grid)?;
    let pow: Vec<f64> = samples.iter().map(|f| f.abs().powf(p)).collect();
    Ok(crate::quadrature::trapezoid(&pow, grid.h()).powf(1.0 / p))
}

/// `H^s` norm for `s < 0` via the discrete Fourier transform on the
/// periodized interval `[-L, L]`, frequencies `xi_k = pi k / L`.
pub fn hs_norm(samples: &[f64], s: f64, grid: &GridSpec) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "H^s norms are only provided for s < 0, got {s}"
        )));
    }
    check_len(samples, grid)?;
    let n = grid.n;
    let mut buf: Vec<Complex64> = samples[..n].iter().map(|&f| Complex64::new(f, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let h = grid.h();
    let l = grid.half_width;
    let total: f64 = buf
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let xi = std::f64::consts::PI * kk / l;
            (1.0 + xi * xi).powf(s) * (h * h) * c.norm_sqr()
        })
        .sum();
    Ok((total / (2.0 * l)).sqrt())
}

fn check_len(samples: &[f64], grid: &GridSpec) -> Result<()> {
    if samples.len() != grid.nodes() {
        return Err(Error::Shape(format!(
            "expected {} samples, got {}",
            grid.nodes(),
            samples.len()
        )));
    }
    Ok(())
}

/// JSON form of sampled data fields.
#[derive(Clone, Debug, Serialize)]
pub struct FieldSnapshot {
    pub grid: GridSpec,
    pub eps: f64,
    pub fields: BTreeMap<String, Vec<f64>>,
}

/// Two-column CSV `x,value`.
pub fn field_csv(grid: &GridSpec, values: &[f64]) -> String {
    let mut out = String::from("x,value\n");
    for (j, v) in values.iter().enumerate() {
        out.push_str(&format!("{:.17e},{:.17e}\n", grid.x(j), v));
    }
    out
}
