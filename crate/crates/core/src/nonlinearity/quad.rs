//! Adaptive Simpson quadrature.

/// Integral estimate plus the error estimate actually achieved.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

const MAX_DEPTH: u32 = 48;
/// Levels always subdivided, so kinks cannot hide between the first samples.
const MIN_LEVELS: u32 = 6;

pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    if a > b {
        let q = adaptive_simpson(f, b, a, tol);
        return Quadrature {
            value: -q.value,
            ..q
        };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut acc = Quadrature {
        value: 0.0,
        error: 0.0,
        converged: true,
    };
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut acc);
    acc
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    acc: &mut Quadrature,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let refined_enough = MAX_DEPTH - depth >= MIN_LEVELS;
    if (refined_enough && delta.abs() <= 15.0 * tol) || depth == 0 || m <= a || m >= b {
        if delta.abs() > 15.0 * tol {
            acc.converged = false;
        }
        acc.value += left + right + delta / 15.0;
        acc.error += delta.abs() / 15.0;
        return;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc);
    recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc);
}
