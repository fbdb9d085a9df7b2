//! Bracketing and bisection.

/// Sign-change brackets of `f` on a sorted list of abscissae.
pub fn sign_change_brackets<F: Fn(f64) -> f64>(f: F, xs: &[f64]) -> Vec<(f64, f64)> {
    let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    xs.windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| (v[0] > 0.0) != (v[1] > 0.0))
        .map(|(x, _)| (x[0], x[1]))
        .collect()
}

/// Bisection on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite
/// sign (zero counts as non-positive), run until the bracket is two adjacent
/// floats, then polished by one secant step kept inside the bracket.
///
/// Returns the final bracket `(a, b)` with `f(a) <= 0 < f(b)` or the reverse
/// orientation matching the input, and the polished root estimate.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Bracket {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    let pos_a = fa > 0.0;
    debug_assert!(pos_a != (fb > 0.0), "bisect: [{lo}, {hi}] is not a bracket ({fa}, {fb})");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if (fm > 0.0) == pos_a {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let mut root = if fa.abs() <= fb.abs() { a } else { b };
    if fb != fa {
        let secant = a - fa * (b - a) / (fb - fa);
        if secant > a.min(b) && secant < a.max(b) && f(secant).abs() < f(root).abs() {
            root = secant;
        }
    }
    Bracket { inner: a, outer: b, root }
}

/// Final bisection bracket: `inner` has the sign of `f(lo)`, `outer` the sign
/// of `f(hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub inner: f64,
    pub outer: f64,
    pub root: f64,
}
