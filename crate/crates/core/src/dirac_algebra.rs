//! Dirac matrices for space dimensions one to three and the component form
//! of the reduced Dirac and wave equations.
//!
//! The spinor is split as `psi = (u, v)` where `u` is transported along
//! `x - t = const` and `v` along `x + t = const`. For `d = 1, 2` both halves
//! are complex scalars, for `d = 3` they are complex 2-vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Spatial dimension of the full problem. The evolution itself is always
/// one-dimensional; the dimension fixes the spinor size and the number of
/// potentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dim {
    One,
    Two,
    Three,
}

impl Dim {
    pub fn value(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Number of potentials `A_0 .. A_d`.
    pub fn potentials(self) -> usize {
        self.value() + 1
    }

    /// Number of complex components in each of `u` and `v`.
    pub fn half_len(self) -> usize {
        match self {
            Dim::Three => 2,
            _ => 1,
        }
    }

    /// Size `N` of the Dirac matrices.
    pub fn spinor_len(self) -> usize {
        2 * self.half_len()
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.value()
    }
}

impl std::fmt::Display for Dim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Pointwise spinor value. For `d = 1, 2` only the first entry of each half
/// is used and the second must stay zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpinorValue {
    pub u: [C64; 2],
    pub v: [C64; 2],
}

impl SpinorValue {
    pub const ZERO: SpinorValue = SpinorValue {
        u: [ZERO; 2],
        v: [ZERO; 2],
    };

    pub fn scalar(u: C64, v: C64) -> Self {
        SpinorValue {
            u: [u, ZERO],
            v: [v, ZERO],
        }
    }

    pub fn pair(u: [C64; 2], v: [C64; 2]) -> Self {
        SpinorValue { u, v }
    }

    pub fn norm_u_sqr(&self) -> f64 {
        self.u[0].norm_sqr() + self.u[1].norm_sqr()
    }

    pub fn norm_v_sqr(&self) -> f64 {
        self.v[0].norm_sqr() + self.v[1].norm_sqr()
    }

    /// `|psi|^2 = |u|^2 + |v|^2`.
    pub fn density(&self) -> f64 {
        self.norm_u_sqr() + self.norm_v_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_shape(&self, dim: Dim) -> Result<()> {
        if dim.half_len() == 1 && (self.u[1] != ZERO || self.v[1] != ZERO) {
            return Err(Error::Shape(format!(
                "spinor for d = {dim} must have scalar halves"
            )));
        }
        Ok(())
    }

    pub(crate) fn pack<const N: usize>(&self) -> [C64; N] {
        let mut w = [ZERO; N];
        let k = N / 2;
        w[..k].copy_from_slice(&self.u[..k]);
        w[k..].copy_from_slice(&self.v[..k]);
        w
    }

    pub(crate) fn unpack<const N: usize>(w: &[C64; N]) -> Self {
        let mut s = SpinorValue::ZERO;
        let k = N / 2;
        s.u[..k].copy_from_slice(&w[..k]);
        s.v[..k].copy_from_slice(&w[k..]);
        s
    }
}

impl std::ops::Sub for SpinorValue {
    type Output = SpinorValue;

    fn sub(self, rhs: SpinorValue) -> SpinorValue {
        SpinorValue {
            u: [self.u[0] - rhs.u[0], self.u[1] - rhs.u[1]],
            v: [self.v[0] - rhs.v[0], self.v[1] - rhs.v[1]],
        }
    }
}

/// The Dirac matrices of one dimension together with the `rho`, `kappa`
/// blocks used for `d = 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet {
    pub dim: Dim,
    pub gammas: Vec<CMatrix>,
    pub rho: Option<CMatrix>,
    pub kappa: Option<CMatrix>,
}

fn mat2(entries: [C64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &entries)
}

fn block2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(a);
    m.view_mut((0, 2), (2, 2)).copy_from(b);
    m.view_mut((2, 0), (2, 2)).copy_from(c);
    m.view_mut((2, 2), (2, 2)).copy_from(d);
    m
}

pub fn rho_block() -> CMatrix {
    mat2([ZERO, -ONE, ONE, ZERO])
}

pub fn kappa_block() -> CMatrix {
    mat2([I, ZERO, ZERO, -I])
}

/// The explicit representation used throughout the crate.
pub fn gamma_matrices(dim: usize) -> Result<GammaSet> {
    let dim = Dim::try_from(dim)?;
    let g0 = mat2([ZERO, ONE, ONE, ZERO]);
    let g1 = mat2([ZERO, -ONE, ONE, ZERO]);
    let set = match dim {
        Dim::One => GammaSet {
            dim,
            gammas: vec![g0, g1],
            rho: None,
            kappa: None,
        },
        Dim::Two => GammaSet {
            dim,
            gammas: vec![g0, g1, mat2([I, ZERO, ZERO, -I])],
            rho: None,
            kappa: None,
        },
        Dim::Three => {
            let id = CMatrix::identity(2, 2);
            let z = CMatrix::zeros(2, 2);
            let rho = rho_block();
            let kappa = kappa_block();
            GammaSet {
                dim,
                gammas: vec![
                    block2(&z, &id, &id, &z),
                    block2(&z, &(-&id), &id, &z),
                    block2(&rho, &z, &z, &(-&rho)),
                    block2(&kappa, &z, &z, &(-&kappa)),
                ],
                rho: Some(rho),
                kappa: Some(kappa),
            }
        }
    };
    Ok(set)
}

/// One checked algebraic relation and the largest entrywise deviation from
/// it. Entries are small Gaussian integers so the deviation is exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliffordReport {
    pub dim: usize,
    pub checks: Vec<RelationCheck>,
}

impl CliffordReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.deviation == 0.0)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationCheck> {
        self.checks.iter().filter(|c| c.deviation != 0.0)
    }
}

fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Checks the anticommutation relations, (anti)hermiticity and, for `d = 3`,
/// the `rho`/`kappa` block algebra.
pub fn verify_clifford(g: &GammaSet) -> CliffordReport {
    let n = g.gammas.first().map_or(0, |m| m.nrows());
    let id = CMatrix::identity(n, n);
    let zero = CMatrix::zeros(n, n);
    let mut checks = Vec::new();
    for mu in 0..g.gammas.len() {
        for nu in mu..g.gammas.len() {
            let (a, b) = (&g.gammas[mu], &g.gammas[nu]);
            let anti = a * b + b * a;
            let metric = if mu != nu {
                0.0
            } else if mu == 0 {
                2.0
            } else {
                -2.0
            };
            let expected = if metric == 0.0 {
                zero.clone()
            } else {
                &id * C64::new(metric, 0.0)
            };
            checks.push(RelationCheck {
                relation: format!("{{g{mu}, g{nu}}} = {metric} I"),
                deviation: max_dev(&anti, &expected),
            });
        }
    }
    for (mu, m) in g.gammas.iter().enumerate() {
        let adj = m.adjoint();
        let (relation, expected) = if mu == 0 {
            ("g0* = g0".to_string(), m.clone())
        } else {
            (format!("g{mu}* = -g{mu}"), -m)
        };
        checks.push(RelationCheck {
            relation,
            deviation: max_dev(&adj, &expected),
        });
    }
    if let (Some(rho), Some(kappa)) = (&g.rho, &g.kappa) {
        let id2 = CMatrix::identity(2, 2);
        let z2 = CMatrix::zeros(2, 2);
        let rel = |name: &str, lhs: CMatrix, rhs: &CMatrix| RelationCheck {
            relation: name.to_string(),
            deviation: max_dev(&lhs, rhs),
        };
        checks.push(rel("rho* = -rho", rho.adjoint(), &(-rho)));
        checks.push(rel("rho^2 = -I", rho * rho, &(-&id2)));
        checks.push(rel("kappa* = -kappa", kappa.adjoint(), &(-kappa)));
        checks.push(rel("kappa^2 = -I", kappa * kappa, &(-&id2)));
        checks.push(rel("rho kappa + kappa rho = 0", rho * kappa + kappa * rho, &z2));
    }
    CliffordReport {
        dim: g.dim.value(),
        checks,
    }
}

fn check_potentials(dim: Dim, a: &[f64]) -> Result<()> {
    if a.len() != dim.potentials() {
        return Err(Error::Shape(format!(
            "expected {} potentials for d = {dim}, got {}",
            dim.potentials(),
            a.len()
        )));
    }
    Ok(())
}

// rho v and kappa v for the fixed choices of the blocks.
fn rho_apply(w: [C64; 2]) -> [C64; 2] {
    [-w[1], w[0]]
}

fn kappa_apply(w: [C64; 2]) -> [C64; 2] {
    [I * w[0], -I * w[1]]
}

fn dot(a: [C64; 2], b: [C64; 2]) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Right-hand sides of `(d_t + d_x) u` and `(d_t - d_x) v`, returned as a
/// spinor `(du, dv)`.
pub fn spinor_rhs(dim: Dim, a: &[f64], s: &SpinorValue, mass: f64) -> Result<SpinorValue> {
    check_potentials(dim, a)?;
    s.check_shape(dim)?;
    let plus = a[0] + a[1];
    let minus = a[0] - a[1];
    let im = -I * mass;
    Ok(match dim {
        Dim::One => SpinorValue::scalar(
            I * plus * s.u[0] + im * s.v[0],
            I * minus * s.v[0] + im * s.u[0],
        ),
        Dim::Two => SpinorValue::scalar(
            I * plus * s.u[0] + a[2] * s.v[0] + im * s.v[0],
            I * minus * s.v[0] - a[2] * s.u[0] + im * s.u[0],
        ),
        Dim::Three => {
            let (u, v) = (s.u, s.v);
            let (rv, kv) = (rho_apply(v), kappa_apply(v));
            let (ru, ku) = (rho_apply(u), kappa_apply(u));
            let du = std::array::from_fn(|k| {
                I * plus * u[k] - I * a[2] * rv[k] - I * a[3] * kv[k] + im * v[k]
            });
            let dv = std::array::from_fn(|k| {
                I * minus * v[k] + I * a[2] * ru[k] + I * a[3] * ku[k] + im * u[k]
            });
            SpinorValue::pair(du, dv)
        }
    })
}

/// Sources of the wave equations for `A_0 .. A_d`.
pub fn wave_sources(dim: Dim, s: &SpinorValue) -> Result<Vec<f64>> {
    s.check_shape(dim)?;
    let mut out = [0.0; 4];
    wave_sources_into(dim, s, &mut out);
    Ok(out[..dim.potentials()].to_vec())
}

#[inline]
pub(crate) fn wave_sources_into(dim: Dim, s: &SpinorValue, out: &mut [f64; 4]) {
    let nu = s.norm_u_sqr();
    let nv = s.norm_v_sqr();
    out[0] = nu + nv;
    out[1] = -nu + nv;
    match dim {
        Dim::One => {}
        Dim::Two => {
            out[2] = -2.0 * (s.u[0] * s.v[0].conj()).im;
        }
        Dim::Three => {
            out[2] = -2.0 * dot(s.v, rho_apply(s.u)).re;
            out[3] = -2.0 * dot(s.v, kappa_apply(s.u)).re;
        }
    }
}

/// Sources of the transport equations for `|u|^2` and `|v|^2`. The two
/// entries are negatives of each other.
pub fn modulus_rhs(dim: Dim, a: &[f64], s: &SpinorValue, mass: f64) -> Result<(f64, f64)> {
    check_potentials(dim, a)?;
    s.check_shape(dim)?;
    let src = match dim {
        Dim::One => {
            let vu = s.v[0].conj() * s.u[0];
            -2.0 * mass * vu.im
        }
        Dim::Two => {
            let vu = s.v[0].conj() * s.u[0];
            2.0 * a[2] * vu.re - 2.0 * mass * vu.im
        }
        Dim::Three => {
            2.0 * a[2] * dot(s.v, rho_apply(s.u)).im + 2.0 * a[3] * dot(s.v, kappa_apply(s.u)).im
                - 2.0 * mass * dot(s.v, s.u).im
        }
    };
    Ok((src, -src))
}

/// Matrix `L` with `spinor_rhs = L psi` in the packed layout (`u` entries
/// first, then `v`). `N` is 2 for `d = 1, 2` and 4 for `d = 3`.
#[inline]
pub(crate) fn coupling_matrix<const N: usize>(dim: Dim, a: &[f64], mass: f64) -> [[C64; N]; N] {
    let mut l = [[ZERO; N]; N];
    let plus = I * (a[0] + a[1]);
    let minus = I * (a[0] - a[1]);
    let im = -I * mass;
    let k = N / 2;
    for r in 0..k {
        l[r][r] = plus;
        l[k + r][k + r] = minus;
    }
    match dim {
        Dim::One => {
            l[0][1] = im;
            l[1][0] = im;
        }
        Dim::Two => {
            l[0][1] = im + a[2];
            l[1][0] = im - a[2];
        }
        Dim::Three => {
            let (a2, a3) = (a[2], a[3]);
            // u rows: -i A2 rho - i A3 kappa - i M
            l[0][2] = C64::new(a3, -mass);
            l[0][3] = C64::new(0.0, a2);
            l[1][2] = C64::new(0.0, -a2);
            l[1][3] = C64::new(-a3, -mass);
            // v rows: i A2 rho + i A3 kappa - i M
            l[2][0] = C64::new(-a3, -mass);
            l[2][1] = C64::new(0.0, -a2);
            l[3][0] = C64::new(0.0, a2);
            l[3][1] = C64::new(a3, -mass);
        }
    }
    l
}
