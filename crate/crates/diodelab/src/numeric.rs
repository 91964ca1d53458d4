//! Small numeric helpers: grids, grid-seeded maximisation, bisection.

/// `n` evenly spaced points with exact endpoints.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| a + i as f64 * step).collect();
    out[n - 1] = b;
    out
}

/// `n` logarithmically spaced points with exact endpoints; requires
/// positive bounds.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0, "logspace needs positive bounds");
    assert!(n >= 2, "logspace needs at least two points");
    let la = a.ln();
    let step = (b.ln() - la) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| (la + i as f64 * step).exp()).collect();
    out[0] = a;
    out[n - 1] = b;
    out
}

/// Maximise a smooth function on `[a, b]`: coarse grid seed followed by
/// golden-section refinement around the best sample. Returns `(x, f(x))`.
pub fn maximize<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_seed: usize) -> (f64, f64) {
    let xs = linspace(a, b, n_seed.max(3));
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { xs[0] } else { xs[best_i - 1] };
    let hi = if best_i + 1 == xs.len() {
        xs[xs.len() - 1]
    } else {
        xs[best_i + 1]
    };
    golden_max(&f, lo, hi, best_v.max(f64::MIN_POSITIVE))
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, scale: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // ~60 iterations shrink the bracket by phi^60 ~ 3e-13
    for _ in 0..60 {
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs() + scale.abs().min(1.0)) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisect a boundary between a passing and a failing speed. `ok` must hold
/// at `v_ok` and fail at `v_fail`; the returned value has relative width
/// below `rel_tol` and reports the crossing midpoint.
pub fn bisect_boundary<E, F: FnMut(f64) -> Result<bool, E>>(
    mut ok: F,
    v_ok: f64,
    v_fail: f64,
    rel_tol: f64,
) -> Result<f64, E> {
    let mut good = v_ok;
    let mut bad = v_fail;
    while (good - bad).abs() > rel_tol * good.abs().max(bad.abs()) {
        let mid = 0.5 * (good + bad);
        if ok(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(0.5 * (good + bad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spacing_helpers() {
        let l = linspace(0.0, 1.0, 5);
        assert_eq!(l, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = logspace(0.01, 1.0, 3);
        assert_relative_eq!(g[1], 0.1, max_relative = 1e-12);
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn maximises_a_gaussian_bump() {
        // the exponential is flat to f64 within ~1e-8 of the peak, so the
        // argmax is only defined to that width
        let (x, v) = maximize(|x: f64| (-(x - 0.3).powi(2)).exp(), -1.0, 1.0, 41);
        assert_relative_eq!(x, 0.3, epsilon = 1e-7);
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bisection_finds_threshold() {
        let v = bisect_boundary::<(), _>(|x| Ok(x < 0.42), 0.1, 1.0, 1e-6).unwrap();
        assert_relative_eq!(v, 0.42, max_relative = 1e-5);
    }
}
