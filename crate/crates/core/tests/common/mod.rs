//! Shared numerical oracles for the integration tests.
//!
//! Everything here recomputes quantities by quadrature, independently of the
//! closed-form assembly in the library, so agreement is evidence rather than
//! tautology.
#![allow(dead_code)] // shared between test binaries with different needs

/// Adaptive Simpson quadrature with Richardson acceptance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
        forced: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        // the forced levels guard against integrand zeros aligned with the
        // dyadic sample points (periodic integrands)
        if depth == 0 || (forced == 0 && delta.abs() <= 15.0 * tol) {
            left + right + delta / 15.0
        } else {
            let forced = forced.saturating_sub(1);
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1, forced)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1, forced)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 40, 6)
}

/// Composite Simpson on a fixed even grid (for 2-d tensor integrands).
pub fn composite_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// 2-d composite Simpson over a rectangle.
pub fn composite_simpson_2d(
    f: &dyn Fn(f64, f64) -> f64,
    ax: (f64, f64),
    ay: (f64, f64),
    intervals: usize,
) -> f64 {
    composite_simpson(
        &|x| composite_simpson(&|y| f(x, y), ay.0, ay.1, intervals),
        ax.0,
        ax.1,
        intervals,
    )
}
