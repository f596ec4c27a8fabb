//! Quadrature helpers: grid rules on uniformly sampled data and an adaptive
//! Simpson rule for smooth one-dimensional integrands.

/// Composite trapezoid rule on uniform samples with spacing `h`.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (samples[0] + samples[n - 1]) + samples[1..n - 1].iter().sum::<f64>()),
    }
}

/// Exact integral over `[a, b]` of the piecewise-linear interpolant of
/// `samples`, where `samples[k]` sits at `x0 + k h`. The interpolant is taken
/// to vanish outside the sampled range.
pub fn integrate_linear(samples: &[f64], x0: f64, h: f64, a: f64, b: f64) -> f64 {
    if b <= a || samples.is_empty() {
        return 0.0;
    }
    let n = samples.len();
    let value = |k: isize| -> f64 {
        if k < 0 || k as usize >= n {
            0.0
        } else {
            samples[k as usize]
        }
    };
    // interpolant on cell k is linear between nodes k and k+1
    let cell_integral = |k: isize, lo: f64, hi: f64| -> f64 {
        // lo, hi are local coordinates in [0, 1]
        let (f0, f1) = (value(k), value(k + 1));
        let at = |s: f64| f0 + (f1 - f0) * s;
        0.5 * (hi - lo) * h * (at(lo) + at(hi))
    };
    let sa = (a - x0) / h;
    let sb = (b - x0) / h;
    let lo_cell = sa.floor() as isize;
    let hi_cell = sb.floor() as isize;
    let first = lo_cell.max(-1);
    let last = hi_cell.min(n as isize);
    let mut total = 0.0;
    let mut k = first;
    while k <= last {
        let lo = if k == lo_cell { sa - k as f64 } else { 0.0 };
        let hi = if k == hi_cell { sb - k as f64 } else { 1.0 };
        if hi > lo {
            total += cell_integral(k, lo, hi);
        }
        k += 1;
    }
    total
}

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Least-squares line `y = slope x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
