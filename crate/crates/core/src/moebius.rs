//! Complex-plane primitives: cross-ratio, the fourth-vertex solver of the
//! cross-ratio equation, stereographic projection and the isotropic
//! vector `rho`, and the remainder function of the auxiliary evolution.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Denominator factors below this magnitude make a quad degenerate.
const CROSS_RATIO_FLOOR: f64 = 1e-300;

/// Default relative tolerance for [`solve_fourth_vertex`].
pub const FOURTH_VERTEX_TOL: f64 = 1e-12;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A point of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(Vector3<f64>);

impl UnitVector3 {
    /// Normalizes `v`. Fails on zero or non-finite input.
    pub fn new_normalize(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NonFinite("unit vector"));
        }
        Ok(Self(v / n))
    }

    /// Wraps `v` if it already has unit length within `1e-9`.
    pub fn try_from_unit(v: Vector3<f64>) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("unit vector"));
        }
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "vector of norm {} is not on the unit sphere",
                v.norm()
            )));
        }
        Ok(Self(v))
    }

    pub(crate) fn new_unchecked(v: Vector3<f64>) -> Self {
        Self(v)
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }
}

impl From<UnitVector3> for Vector3<f64> {
    fn from(u: UnitVector3) -> Self {
        u.0
    }
}

pub(crate) fn check_finite(z: C64, what: &'static str) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `(q1-q2)(q3-q4) / ((q2-q3)(q4-q1))`.
pub fn cross_ratio(q1: C64, q2: C64, q3: C64, q4: C64) -> Result<C64> {
    for (z, what) in [(q1, "q1"), (q2, "q2"), (q3, "q3"), (q4, "q4")] {
        check_finite(z, what)?;
    }
    let d1 = q2 - q3;
    let d2 = q4 - q1;
    if d1.norm() < CROSS_RATIO_FLOOR || d2.norm() < CROSS_RATIO_FLOOR {
        return Err(Error::DegenerateQuad(format!(
            "coincident vertices in cross_ratio({q1}, {q2}, {q3}, {q4})"
        )));
    }
    Ok((q1 - q2) * (q3 - q4) / (d1 * d2))
}

/// Solves `cross_ratio(a, b, c, d) = q` for `d`.
///
/// The solve is rejected when the denominator `q(b-c) + (a-b)` is small
/// relative to the local point scale; during lattice evolution this is the
/// signature of a locally diverging map.
pub fn solve_fourth_vertex(q: C64, a: C64, b: C64, c: C64) -> Result<C64> {
    solve_fourth_vertex_tol(q, a, b, c, FOURTH_VERTEX_TOL)
}

pub fn solve_fourth_vertex_tol(q: C64, a: C64, b: C64, c: C64, tol: f64) -> Result<C64> {
    for (z, what) in [(q, "q"), (a, "a"), (b, "b"), (c, "c")] {
        check_finite(z, what)?;
    }
    let scale = a.norm().max(b.norm()).max(c.norm()).max(1.0);
    let ab = a - b;
    let bc = b - c;
    if ab.norm() <= tol * scale || bc.norm() <= tol * scale {
        return Err(Error::DegenerateQuad(format!(
            "coincident known vertices {a}, {b}, {c}"
        )));
    }
    let den = q * bc + ab;
    if den.norm() < tol * scale {
        return Err(Error::DegenerateQuad(format!(
            "fourth-vertex denominator {:e} below tolerance",
            den.norm()
        )));
    }
    let d = (q * a * bc + c * ab) / den;
    check_finite(d, "fourth vertex")
}

/// Inverse stereographic projection from the north pole: `C -> S^2`.
pub fn stereo_sigma(z: C64) -> UnitVector3 {
    let r2 = z.norm_sqr();
    let s = 1.0 + r2;
    UnitVector3(Vector3::new(2.0 * z.re / s, 2.0 * z.im / s, (r2 - 1.0) / s))
}

/// Stereographic projection `S^2 \ {north pole} -> C`.
pub fn inverse_stereographic(n: &UnitVector3) -> Result<C64> {
    if n.z() >= 1.0 - 1e-9 {
        return Err(Error::NorthPole { z: n.z() });
    }
    Ok(C64::new(n.x(), n.y()) / (1.0 - n.z()))
}

/// Derivative of [`stereo_sigma`] along a curve `z(t)` with `z'(t) = dz`.
pub fn stereo_sigma_derivative(z: C64, dz: C64) -> Vector3<f64> {
    let r2 = z.norm_sqr();
    let s = 1.0 + r2;
    let ds = 2.0 * (z.conj() * dz).re;
    let num = Vector3::new(2.0 * z.re, 2.0 * z.im, r2 - 1.0);
    let dnum = Vector3::new(2.0 * dz.re, 2.0 * dz.im, ds);
    (dnum * s - num * ds) / (s * s)
}

/// Derivative of [`inverse_stereographic`] along a curve on the sphere.
pub fn inverse_stereographic_derivative(n: &UnitVector3, dn: &Vector3<f64>) -> Result<C64> {
    if n.z() >= 1.0 - 1e-9 {
        return Err(Error::NorthPole { z: n.z() });
    }
    let w = 1.0 - n.z();
    let num = C64::new(n.x(), n.y());
    Ok(C64::new(dn.x, dn.y) / w + num * dn.z / (w * w))
}

/// The isotropic vector `(1 - z^2, i(1 + z^2), 2z)`.
pub fn rho(z: C64) -> [C64; 3] {
    let z2 = z * z;
    [C64::new(1.0, 0.0) - z2, I * (1.0 + z2), 2.0 * z]
}

/// Discrete analogue of `rho` on an edge with endpoint values `g0`, `g1`.
pub fn rho_edge(g0: C64, g1: C64) -> [C64; 3] {
    let prod = g0 * g1;
    [C64::new(1.0, 0.0) - prod, I * (1.0 + prod), g0 + g1]
}

fn remainder_raw(la: f64, lb: f64, h: C64) -> C64 {
    let a = C64::new(la, 0.0);
    let ib = C64::new(0.0, lb);
    let eh = h.exp();
    ((ib * eh + a) / (ib + a * eh)).ln() + h * (a - ib) / (a + ib)
}

/// The remainder `L(la, lb, H) = log((i lb e^H + la)/(i lb + la e^H)) + H (la - i lb)/(la + i lb)`.
///
/// `la` is the horizontal and `lb` the vertical edge length of a lattice face.
/// `L` is odd in `H` and vanishes to third order at the origin; the value is
/// symmetrized so that oddness holds bit-for-bit.
pub fn remainder_l(la: f64, lb: f64, h: C64) -> Result<C64> {
    if !(la > 0.0 && lb > 0.0) || !la.is_finite() || !lb.is_finite() {
        return Err(Error::DomainError(format!(
            "edge lengths must be positive, got ({la}, {lb})"
        )));
    }
    check_finite(h, "remainder argument")?;
    if h.im.abs() > std::f64::consts::FRAC_PI_4 {
        return Err(Error::DomainError(format!(
            "|Im H| = {} exceeds pi/4",
            h.im.abs()
        )));
    }
    Ok(0.5 * (remainder_raw(la, lb, h) - remainder_raw(la, lb, -h)))
}

/// Leading Taylor coefficient of [`remainder_l`]: `L = c3 H^3 + O(H^5)`.
pub fn remainder_l_cubic_coefficient(la: f64, lb: f64) -> C64 {
    let w = C64::new(0.0, lb / la);
    w * (1.0 - w) / (3.0 * (1.0 + w).powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn unit_square_cross_ratio() {
        let q = cross_ratio(c(0., 0.), c(1., 0.), c(1., 1.), c(0., 1.)).unwrap();
        assert!(close(q, c(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn collinear_cross_ratio() {
        let q = cross_ratio(c(0., 0.), c(1., 0.), c(2., 0.), c(3., 0.)).unwrap();
        assert!(close(q, c(-1.0 / 3.0, 0.0), 1e-15));
    }

    #[test]
    fn inversion_preserves_cross_ratio() {
        let q = [c(1., 0.), c(2., 0.), c(1., 1.), c(0., 1.)];
        let a = cross_ratio(q[0], q[1], q[2], q[3]).unwrap();
        let inv: Vec<C64> = q.iter().map(|z| 1.0 / z).collect();
        let b = cross_ratio(inv[0], inv[1], inv[2], inv[3]).unwrap();
        assert!(close(a, b, 1e-14));
    }

    #[test]
    fn coincident_points_are_degenerate() {
        assert!(matches!(
            cross_ratio(c(0., 0.), c(1., 0.), c(1., 0.), c(2., 0.)),
            Err(Error::DegenerateQuad(_))
        ));
        assert!(cross_ratio(c(f64::NAN, 0.), c(1., 0.), c(2., 0.), c(3., 0.)).is_err());
    }

    #[test]
    fn fourth_vertex_of_unit_square() {
        let d = solve_fourth_vertex(c(-1., 0.), c(0., 0.), c(1., 0.), c(1., 1.)).unwrap();
        assert!(close(d, c(0., 1.), 1e-15));
    }

    #[test]
    fn fourth_vertex_rejects_repeated_vertex() {
        let a = c(0.3, 0.2);
        assert!(matches!(
            solve_fourth_vertex(c(-1., 0.), a, a, c(1., 1.)),
            Err(Error::DegenerateQuad(_))
        ));
    }

    #[test]
    fn sigma_reference_points() {
        let s = stereo_sigma(c(0., 0.));
        assert_eq!((s.x(), s.y(), s.z()), (0.0, 0.0, -1.0));
        let s = stereo_sigma(c(1., 0.));
        assert_relative_eq!(s.x(), 1.0);
        assert_relative_eq!(s.z(), 0.0);
        let s = stereo_sigma(c(0., 1.));
        assert_relative_eq!(s.y(), 1.0);
        assert_relative_eq!(s.z(), 0.0);
    }

    #[test]
    fn inverse_stereographic_reference_points() {
        let n = UnitVector3::try_from_unit(Vector3::new(0., 0., -1.)).unwrap();
        assert_eq!(inverse_stereographic(&n).unwrap(), c(0., 0.));
        let n = UnitVector3::try_from_unit(Vector3::new(1., 0., 0.)).unwrap();
        assert_eq!(inverse_stereographic(&n).unwrap(), c(1., 0.));
        let n = UnitVector3::try_from_unit(Vector3::new(0., 0., 1.)).unwrap();
        assert!(matches!(inverse_stereographic(&n), Err(Error::NorthPole { .. })));
    }

    #[test]
    fn rho_reference_points() {
        let r = rho(c(0., 0.));
        assert_eq!(r, [c(1., 0.), c(0., 1.), c(0., 0.)]);
        let r = rho(c(0., 1.));
        assert!(close(r[0], c(2., 0.), 1e-15));
        assert!(close(r[1], c(0., 0.), 1e-15));
        assert!(close(r[2], c(0., 2.), 1e-15));
    }

    #[test]
    fn remainder_vanishes_at_origin_and_checks_domain() {
        assert_eq!(remainder_l(1.0, 1.0, c(0., 0.)).unwrap(), c(0., 0.));
        assert!(remainder_l(0.0, 1.0, c(0.1, 0.)).is_err());
        assert!(remainder_l(1.0, 1.0, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn remainder_cubic_coefficient_matches_small_h() {
        // Unit square: c3 = 1/(6i).
        let c3 = remainder_l_cubic_coefficient(1.0, 1.0);
        assert!(close(c3, c(0.0, -1.0 / 6.0), 1e-15));
        for &(la, lb) in &[(1.0, 1.0), (0.5, 2.0), (2.0, 0.7)] {
            let h = c(1e-2, 4e-3);
            let l = remainder_l(la, lb, h).unwrap();
            let c3 = remainder_l_cubic_coefficient(la, lb);
            assert!((l / h.powi(3) - c3).norm() < 1e-3, "{la} {lb}");
        }
    }

    #[test]
    fn sigma_derivative_matches_finite_differences() {
        let z = c(0.4, -0.7);
        let dz = c(1.3, 0.2);
        let h = 1e-6;
        let fwd: Vector3<f64> = stereo_sigma(z + dz * h).into();
        let bwd: Vector3<f64> = stereo_sigma(z - dz * h).into();
        let fd = (fwd - bwd) / (2.0 * h);
        assert!((fd - stereo_sigma_derivative(z, dz)).norm() < 1e-9);
        let n = stereo_sigma(z);
        let back = inverse_stereographic_derivative(&n, &stereo_sigma_derivative(z, dz)).unwrap();
        assert!(close(back, dz, 1e-12));
    }

    fn arb_c(r: f64) -> impl Strategy<Value = C64> {
        (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
    }

    proptest! {
        #[test]
        fn moebius_invariance(q in proptest::array::uniform4(arb_c(3.0)),
                              m in proptest::array::uniform4(arb_c(2.0))) {
            let det = m[0] * m[3] - m[1] * m[2];
            prop_assume!(det.norm() > 0.1);
            let map = |z: C64| (m[0] * z + m[1]) / (m[2] * z + m[3]);
            let dens: Vec<f64> = q.iter().map(|z| (m[2] * z + m[3]).norm()).collect();
            prop_assume!(dens.iter().all(|d| *d > 0.05));
            let pair_min = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                .map(|(i, j)| (q[i] - q[j]).norm()).fold(f64::INFINITY, f64::min);
            prop_assume!(pair_min > 0.05);
            let a = cross_ratio(q[0], q[1], q[2], q[3]).unwrap();
            let b = cross_ratio(map(q[0]), map(q[1]), map(q[2]), map(q[3])).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
        }

        #[test]
        fn fourth_vertex_round_trip(q in proptest::array::uniform4(arb_c(3.0))) {
            let pair_min = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                .map(|(i, j)| (q[i] - q[j]).norm()).fold(f64::INFINITY, f64::min);
            prop_assume!(pair_min > 0.05);
            let cr = cross_ratio(q[0], q[1], q[2], q[3]).unwrap();
            let d = solve_fourth_vertex(cr, q[0], q[1], q[2]).unwrap();
            prop_assert!((d - q[3]).norm() <= 1e-12 * 1e2 * (1.0 + q[3].norm()));
            let back = cross_ratio(q[0], q[1], q[2], d).unwrap();
            prop_assert!((back - cr).norm() <= 1e-10 * (1.0 + cr.norm()));
        }

        #[test]
        fn stereographic_round_trip(z in arb_c(10.0)) {
            let n = stereo_sigma(z);
            prop_assert!((n.as_vector().norm() - 1.0).abs() < 1e-12);
            let back = inverse_stereographic(&n).unwrap();
            prop_assert!((back - z).norm() <= 1e-10 * (1.0 + z.norm()));
        }

        #[test]
        fn rho_is_isotropic(z in arb_c(5.0)) {
            let r = rho(z);
            let s = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            prop_assert!(s.norm() <= 1e-12 * (z.norm().powi(4) + 1.0));
        }

        #[test]
        fn remainder_is_odd(la in 0.2f64..5.0, lb in 0.2f64..5.0, h in arb_c(0.7)) {
            let a = remainder_l(la, lb, h).unwrap();
            let b = remainder_l(la, lb, -h).unwrap();
            prop_assert!((a + b).norm() <= 1e-14);
        }

        #[test]
        fn remainder_is_cubic(la in 0.5f64..2.0, lb in 0.5f64..2.0,
                              r in 1e-3f64..std::f64::consts::FRAC_PI_8,
                              theta in 0.0f64..std::f64::consts::TAU) {
            let h = C64::from_polar(r, theta);
            prop_assume!(h.im.abs() <= std::f64::consts::FRAC_PI_4);
            let l = remainder_l(la, lb, h).unwrap();
            prop_assert!(l.norm() / r.powi(3) < 1.0);
        }
    }
}
