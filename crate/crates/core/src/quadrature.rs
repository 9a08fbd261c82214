//! Adaptive Simpson integration.

/// Integrates `f` over `[a, b]` with recursive adaptive Simpson, stopping
/// once the local Richardson estimate falls below `abs_tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, abs_tol, 50)
}

/// Integrates piecewise over consecutive `breaks`, splitting the tolerance
/// evenly between pieces.
pub fn adaptive_simpson_pieces<F>(f: &F, breaks: &[f64], abs_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if breaks.len() < 2 {
        return 0.0;
    }
    let pieces = (breaks.len() - 1) as f64;
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], abs_tol / pieces))
        .sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_matches_antiderivative() {
        let v = adaptive_simpson(&|x: f64| (-0.3 * x).exp(), 0.0, 40.0, 1e-13);
        let exact = (1.0 - (-12.0f64).exp()) / 0.3;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn kink_is_handled_by_pieces() {
        let f = |x: f64| (x - 1.0).abs();
        let v = adaptive_simpson_pieces(&f, &[0.0, 1.0, 3.0], 1e-12);
        assert!((v - 2.5).abs() < 1e-12);
    }
}
