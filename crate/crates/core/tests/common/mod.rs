#![allow(dead_code)]

// Oracles written independently of the crate's own quadrature.

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn gl5(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * GL_NODES.iter().zip(GL_WEIGHTS).map(|(x, w)| w * f(m + r * x)).sum::<f64>()
}

/// Adaptive five-point Gauss-Legendre by bisection.
pub fn adaptive_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (gl5(f, a, m), gl5(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= tol {
            return l + r;
        }
        rec(f, a, m, l, 0.5 * tol, depth - 1) + rec(f, m, b, r, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, gl5(f, a, b), tol, 50)
}

/// Composite Gauss-Legendre with breakpoints (kinks of piecewise-linear
/// integrands go there).
pub fn gl_with_breaks(f: &dyn Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    breaks.windows(2).map(|w| gl5(f, w[0], w[1])).sum()
}

/// `int phi(x) (eps^2 + x^2)^(-1/2) dx` over `[a, b]`, split at 0.
pub fn gauss_pairing_oracle(phi: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let g = |x: f64| phi(x) / (eps * eps + x * x).sqrt();
    adaptive_gl(&g, a, 0.0, 1e-13) + adaptive_gl(&g, 0.0, b, 1e-13)
}

/// `int int_K |u v|` for free transport `u = f(y - s)`, `v = g(y + s)` over
/// the backward cone with vertex `(t, x)`. With `a = y - s`, `b = y + s` the
/// cone is `x - t <= a <= b <= x + t` and `dy ds = da db / 2`.
pub fn free_nullform_oracle(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, t: f64, x: f64, breaks: &[f64]) -> f64 {
    let (lo, hi) = (x - t, x + t);
    let clip = |lo: f64, hi: f64| -> Vec<f64> {
        let mut b: Vec<f64> = std::iter::once(lo)
            .chain(breaks.iter().copied().filter(|&p| p > lo && p < hi))
            .chain(std::iter::once(hi))
            .collect();
        b.dedup();
        b
    };
    let inner = |a: f64| -> f64 {
        if a >= hi {
            return 0.0;
        }
        f(a).abs() * gl_with_breaks(&|b| g(b).abs(), &clip(a, hi))
    };
    0.5 * gl_with_breaks(&inner, &clip(lo, hi))
}

/// `(eps^2 + x^2)^(-1/4)`, written out independently.
pub fn profile(x: f64, eps: f64) -> f64 {
    1.0 / (eps * eps + x * x).sqrt().sqrt()
}
