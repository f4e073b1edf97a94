//! Adaptive Simpson quadrature for vector-valued integrands.

use nalgebra::Vector3;

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` (max norm).
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Vector3<f64>
where
    F: Fn(f64) -> Vector3<f64>,
{
    if a == b {
        return Vector3::zeros();
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Vector3<f64>,
    fm: Vector3<f64>,
    fb: Vector3<f64>,
    whole: Vector3<f64>,
    tol: f64,
    depth: u32,
) -> Vector3<f64>
where
    F: Fn(f64) -> Vector3<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.amax() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
