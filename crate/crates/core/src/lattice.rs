//! The rectangular lattice `p_{m,n} = u_m + i v_n` and the coefficients of
//! the auxiliary evolution at its vertices.

use crate::bjorling::ReparamCurve;
use crate::error::{Error, Result};
use crate::moebius::{C64, I};

/// Lattice points on the index window `[-M, M]^2`.
#[derive(Debug, Clone)]
pub struct LatticeGrid {
    pub eps: f64,
    /// Half width `M` of the index window.
    pub m: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    points: Vec<C64>,
}

impl LatticeGrid {
    /// Builds a lattice directly from coordinate samples `u_m`, `v_n`, `m, n in -M..=M`.
    pub fn from_axes(eps: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() || u.len().is_multiple_of(2) || u.len() < 3 {
            return Err(Error::InvalidInput("axes need equal odd lengths >= 3".into()));
        }
        let m = (u.len() - 1) / 2;
        for w in u.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::QuadrantViolation {
                    t: f64::NAN,
                    re: w[1] - w[0],
                    im: 1.0,
                });
            }
        }
        for w in v.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::QuadrantViolation {
                    t: f64::NAN,
                    re: 1.0,
                    im: w[1] - w[0],
                });
            }
        }
        let side = 2 * m + 1;
        let mut points = Vec::with_capacity(side * side);
        // Row-major: n outer, m inner.
        for vn in &v {
            for um in &u {
                points.push(C64::new(*um, *vn));
            }
        }
        Ok(Self {
            eps,
            m,
            u,
            v,
            points,
        })
    }

    pub fn half_width(&self) -> i64 {
        self.m as i64
    }

    pub fn contains(&self, m: i64, n: i64) -> bool {
        let k = self.half_width();
        m.abs() <= k && n.abs() <= k
    }

    fn axis(&self, m: i64) -> usize {
        let k = self.half_width();
        assert!(m.abs() <= k, "index {m} outside lattice window");
        (m + k) as usize
    }

    pub fn u(&self, m: i64) -> f64 {
        self.u[self.axis(m)]
    }

    pub fn v(&self, n: i64) -> f64 {
        self.v[self.axis(n)]
    }

    pub fn p(&self, m: i64, n: i64) -> C64 {
        let side = 2 * self.m + 1;
        self.points[self.axis(n) * side + self.axis(m)]
    }

    /// Horizontal edge difference on the edge `(m - 1/2, n)`: `u_m - u_{m-1}`.
    pub fn du(&self, m: i64) -> f64 {
        self.u(m) - self.u(m - 1)
    }

    /// Vertical edge length on the edge `(m, n + 1/2)`: `v_{n+1} - v_n`.
    pub fn dv(&self, n: i64) -> f64 {
        self.v(n + 1) - self.v(n)
    }

    /// The lattice cross-ratio of the quad with lower right corner `(m, n)`:
    /// `CR(p_{m-1,n}, p_{m,n}, p_{m,n+1}, p_{m-1,n+1}) = -du^2/dv^2`.
    pub fn quad_cross_ratio(&self, m: i64, n: i64) -> f64 {
        let du = self.du(m);
        let dv = self.dv(n);
        -(du * du) / (dv * dv)
    }
}

/// Integrates `u'` and `v'` at half nodes into the lattice on `[-M, M]^2`.
pub fn build_lattice(curve: &ReparamCurve, m: usize) -> Result<LatticeGrid> {
    if m as i64 > curve.half_width as i64 {
        return Err(Error::InvalidInput(format!(
            "lattice half width {m} exceeds curve half width {}",
            curve.half_width
        )));
    }
    let k = m as i64;
    let eps = curve.eps;
    let mut u = vec![0.0; 2 * m + 1];
    let mut v = vec![0.0; 2 * m + 1];
    let zero = m;
    for j in 0..m {
        let jj = j as i64;
        u[zero + j + 1] = u[zero + j] + eps * curve.u_dot_mid(jj);
        v[zero + j + 1] = v[zero + j] + eps * curve.v_dot_mid(jj);
        u[zero - j - 1] = u[zero - j] - eps * curve.u_dot_mid(-jj - 1);
        v[zero - j - 1] = v[zero - j] - eps * curve.v_dot_mid(-jj - 1);
    }
    for idx in -k..k {
        let du = eps * curve.u_dot_mid(idx);
        let dv = eps * curve.v_dot_mid(idx);
        if !(du > 0.0) || !(dv > 0.0) {
            return Err(Error::QuadrantViolation {
                t: (idx as f64 + 0.5) * eps,
                re: du,
                im: dv,
            });
        }
    }
    LatticeGrid::from_axes(eps, u, v)
}

/// `-(du - i dv)/(du + i dv)`, the unimodular ratio attached to a face.
pub fn theta_eps(du: f64, dv: f64) -> C64 {
    -C64::new(du, -dv) / C64::new(du, dv)
}

/// Evolution coefficients at one interior vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexCoefficients {
    pub m: C64,
    pub xi: C64,
    /// Face ratio of the north-east face `(a + 1/2, b + 1/2)`.
    pub theta_plus: C64,
    /// Face ratio of the south-west face `(a - 1/2, b - 1/2)`.
    pub theta_minus: C64,
    pub du_plus: f64,
    pub du_minus: f64,
    pub dv_plus: f64,
    pub dv_minus: f64,
}

/// Coefficients at the interior vertices `[-M+1, M-1]^2`.
#[derive(Debug, Clone)]
pub struct LatticeCoefficients {
    pub eps: f64,
    pub m: usize,
    verts: Vec<VertexCoefficients>,
    smooth: Vec<(C64, C64)>,
}

impl LatticeCoefficients {
    pub fn interior_half_width(&self) -> i64 {
        self.m as i64 - 1
    }

    pub fn contains(&self, a: i64, b: i64) -> bool {
        let k = self.interior_half_width();
        a.abs() <= k && b.abs() <= k
    }

    fn index(&self, a: i64, b: i64) -> usize {
        let k = self.interior_half_width();
        assert!(self.contains(a, b), "vertex ({a}, {b}) is not interior");
        ((b + k) * (2 * k + 1) + (a + k)) as usize
    }

    pub fn at(&self, a: i64, b: i64) -> &VertexCoefficients {
        &self.verts[self.index(a, b)]
    }

    /// Smooth `Theta(xi, eta)` at the vertex position.
    pub fn theta_smooth(&self, a: i64, b: i64) -> C64 {
        self.smooth[self.index(a, b)].0
    }

    /// Smooth `Xi(xi, eta)` at the vertex position.
    pub fn xi_smooth(&self, a: i64, b: i64) -> C64 {
        self.smooth[self.index(a, b)].1
    }
}

/// Smooth `Theta` and `Xi = (1/2i) d_xi Theta` from `U = u'(xi - eta)`,
/// `V = v'(xi + eta)` and their derivatives.
pub fn smooth_theta_xi(u1: f64, u2: f64, v1: f64, v2: f64) -> (C64, C64) {
    let w = C64::new(u1, v1);
    let theta = -C64::new(u1, -v1) / w;
    let xi = -C64::new(u2 * v1 - u1 * v2, 0.0) / (w * w);
    (theta, xi)
}

pub fn vertex_coefficients(eps: f64, dup: f64, dum: f64, dvp: f64, dvm: f64) -> VertexCoefficients {
    let den = C64::new(dum, dvm) * C64::new(dup, dvp);
    let m = -(dup * dum + dvm * dvp) / den;
    let xi = -(dup * dvm - dum * dvp) / (eps * den);
    VertexCoefficients {
        m,
        xi,
        theta_plus: theta_eps(dup, dvp),
        theta_minus: theta_eps(dum, dvm),
        du_plus: dup,
        du_minus: dum,
        dv_plus: dvp,
        dv_minus: dvm,
    }
}

pub fn coefficients(grid: &LatticeGrid, curve: &ReparamCurve) -> LatticeCoefficients {
    let k = grid.half_width() - 1;
    let mut verts = Vec::new();
    let mut smooth = Vec::new();
    for b in -k..=k {
        for a in -k..=k {
            verts.push(vertex_coefficients(
                grid.eps,
                grid.du(a + 1),
                grid.du(a),
                grid.dv(b),
                grid.dv(b - 1),
            ));
            let ja = curve.jet(a);
            let jb = curve.jet(b);
            smooth.push(smooth_theta_xi(
                ja.phi_dot[0].re,
                ja.phi_dot[1].re,
                jb.phi_dot[0].im,
                jb.phi_dot[1].im,
            ));
        }
    }
    LatticeCoefficients {
        eps: grid.eps,
        m: grid.m,
        verts,
        smooth,
    }
}

#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub eps: [f64; 2],
    pub sup_m: [f64; 2],
    pub sup_xi: [f64; 2],
}

impl ConsistencyReport {
    pub fn ratio_m(&self) -> f64 {
        self.sup_m[0] / self.sup_m[1]
    }
    pub fn ratio_xi(&self) -> f64 {
        self.sup_xi[0] / self.sup_xi[1]
    }
}

/// Compares `M^eps` with `Theta` and `Xi^eps` with `Xi` on the coarse and
/// fine lattice at the vertex positions shared by both.
pub fn coefficient_consistency(
    coarse: (&LatticeGrid, &ReparamCurve),
    fine: (&LatticeGrid, &ReparamCurve),
) -> Result<ConsistencyReport> {
    if ((coarse.0.eps - 2.0 * fine.0.eps).abs()) > 1e-12 * coarse.0.eps {
        return Err(Error::InvalidInput("fine step must be half the coarse step".into()));
    }
    let cc = coefficients(coarse.0, coarse.1);
    let fc = coefficients(fine.0, fine.1);
    let k = cc.interior_half_width().min(fc.interior_half_width() / 2);
    let mut sup_m = [0.0f64; 2];
    let mut sup_xi = [0.0f64; 2];
    for b in -k..=k {
        for a in -k..=k {
            let c = cc.at(a, b);
            sup_m[0] = sup_m[0].max((c.m - cc.theta_smooth(a, b)).norm());
            sup_xi[0] = sup_xi[0].max((c.xi - cc.xi_smooth(a, b)).norm());
            let f = fc.at(2 * a, 2 * b);
            sup_m[1] = sup_m[1].max((f.m - fc.theta_smooth(2 * a, 2 * b)).norm());
            sup_xi[1] = sup_xi[1].max((f.xi - fc.xi_smooth(2 * a, 2 * b)).norm());
        }
    }
    Ok(ConsistencyReport {
        eps: [coarse.0.eps, fine.0.eps],
        sup_m,
        sup_xi,
    })
}

impl VertexCoefficients {
    /// `Theta^eps_+ F_+ - Theta^eps_- F_-` expressed through `M` and `Xi`.
    pub fn apply(&self, eps: f64, f_plus: C64, f_minus: C64) -> C64 {
        self.m * (f_plus - f_minus) + I * eps * self.xi * (f_plus + f_minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{ArcCurve, ConjugatedCurve, ExpMap, LineCurve};
    use crate::bjorling::{reparametrize, DerivativeRule};
    use crate::surface::SynthesizedData;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn curve(eps: f64, hw: usize, arc: bool) -> ReparamCurve {
        let d = if arc {
            SynthesizedData::new(
                Box::new(ExpMap),
                Box::new(ConjugatedCurve(ArcCurve::arc_example())),
                (-2.3, 2.3),
                Vector3::zeros(),
            )
        } else {
            SynthesizedData::new(
                Box::new(ExpMap),
                Box::new(LineCurve {
                    dir: C64::new(1.0, 1.0),
                }),
                (-5.0, 5.0),
                Vector3::zeros(),
            )
        };
        reparametrize(&d, eps, hw, DerivativeRule::default()).unwrap()
    }

    #[test]
    fn square_lattice_points() {
        let g = build_lattice(&curve(0.1, 6, false), 5).unwrap();
        for m in -5..=5 {
            for n in -5..=5 {
                let p = g.p(m, n);
                assert!((p - C64::new(0.1 * m as f64, 0.1 * n as f64)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn diagonal_matches_phi_samples() {
        let c = curve(0.1, 12, true);
        let g = build_lattice(&c, 12).unwrap();
        for m in -12..=12 {
            assert!((g.p(m, m) - c.phi_at(m)).norm() < 1e-12);
        }
    }

    #[test]
    fn row_and_column_integration_commute() {
        let c = curve(0.1, 8, true);
        let g = build_lattice(&c, 8).unwrap();
        for n in -8..=8i64 {
            // Walk along the diagonal to (n, n), then horizontally.
            for m in -8..=8i64 {
                let mut z = g.p(n, n);
                if m > n {
                    for j in n + 1..=m {
                        z += g.du(j);
                    }
                } else {
                    for j in (m + 1..=n).rev() {
                        z -= g.du(j);
                    }
                }
                assert!((z - g.p(m, n)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn uniform_lattice_coefficients() {
        let c = curve(0.1, 6, false);
        let g = build_lattice(&c, 6).unwrap();
        let co = coefficients(&g, &c);
        for a in -5..=5 {
            for b in -5..=5 {
                let v = co.at(a, b);
                assert!((v.m - I).norm() < 1e-14);
                assert!(v.xi.norm() < 1e-12);
                assert!((v.theta_plus - I).norm() < 1e-14);
                assert!((co.theta_smooth(a, b) - I).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn smooth_theta_is_unimodular() {
        let c = curve(0.1, 12, true);
        let g = build_lattice(&c, 12).unwrap();
        let co = coefficients(&g, &c);
        for a in -11..=11 {
            for b in -11..=11 {
                assert!((co.theta_smooth(a, b).norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn consistency_on_uniform_lattice_is_exact() {
        let (c1, c2) = (curve(0.1, 10, false), curve(0.05, 20, false));
        let (g1, g2) = (build_lattice(&c1, 10).unwrap(), build_lattice(&c2, 20).unwrap());
        let r = coefficient_consistency((&g1, &c1), (&g2, &c2)).unwrap();
        assert!(r.sup_m.iter().chain(r.sup_xi.iter()).all(|x| *x < 1e-12));
    }

    #[test]
    fn consistency_on_arc_lattice_is_second_order() {
        let (c1, c2) = (curve(0.1, 10, true), curve(0.05, 20, true));
        let (g1, g2) = (build_lattice(&c1, 10).unwrap(), build_lattice(&c2, 20).unwrap());
        let r = coefficient_consistency((&g1, &c1), (&g2, &c2)).unwrap();
        assert!(r.sup_m[0] < 1.0);
        assert!((3.3..4.8).contains(&r.ratio_m()), "{}", r.ratio_m());
        assert!((3.3..4.8).contains(&r.ratio_xi()), "{}", r.ratio_xi());
    }

    #[test]
    fn coefficients_equal_theta_average_and_difference() {
        let c = curve(0.1, 8, true);
        let g = build_lattice(&c, 8).unwrap();
        let co = coefficients(&g, &c);
        for a in -7..=7 {
            for b in -7..=7 {
                let v = co.at(a, b);
                assert!((v.m - 0.5 * (v.theta_plus + v.theta_minus)).norm() < 1e-13);
                let xi = (v.theta_plus - v.theta_minus) / (2.0 * I * 0.1);
                assert!((v.xi - xi).norm() < 1e-11);
            }
        }
    }

    proptest! {
        #[test]
        fn lattice_quads_have_negative_real_cross_ratio(
            du in proptest::collection::vec(0.05f64..0.3, 8),
            dv in proptest::collection::vec(0.05f64..0.3, 8),
        ) {
            let mut u = vec![0.0];
            let mut v = vec![0.0];
            for k in 0..8 {
                u.push(u[k] + du[k]);
                v.push(v[k] + dv[k]);
            }
            let g = LatticeGrid::from_axes(0.1, u, v).unwrap();
            for m in -3..=4i64 {
                for n in -4..=3i64 {
                    let q = crate::moebius::cross_ratio(
                        g.p(m - 1, n), g.p(m, n), g.p(m, n + 1), g.p(m - 1, n + 1)).unwrap();
                    let expect = g.quad_cross_ratio(m, n);
                    prop_assert!(expect < 0.0);
                    prop_assert!((q - expect).norm() <= 1e-12 * expect.abs());
                    prop_assert!(g.du(m) > 0.0 && g.dv(n) > 0.0);
                }
            }
        }

        #[test]
        fn theta_eps_is_unimodular(du in 1e-3f64..10.0, dv in 1e-3f64..10.0) {
            prop_assert!((theta_eps(du, dv).norm() - 1.0).abs() < 1e-14);
        }
    }
}
