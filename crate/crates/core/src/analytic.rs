//! Holomorphic maps `g` and analytic curves `phi` used to synthesize
//! Björling data and to evaluate reference surfaces.

use crate::moebius::{rho, C64};

/// A holomorphic function with its first three derivatives.
pub trait Holomorphic: Send + Sync {
    fn value(&self, z: C64) -> C64;
    fn d1(&self, z: C64) -> C64;
    fn d2(&self, z: C64) -> C64;
    fn d3(&self, z: C64) -> C64;

    /// A primitive of `rho(g) / g'` if one is known in closed form.
    fn weierstrass_primitive(&self, _z: C64) -> Option<[C64; 3]> {
        None
    }

    fn label(&self) -> String;
}

/// A real-analytic curve `t -> phi(t)` in the complex plane.
pub trait AnalyticCurve: Send + Sync {
    fn value(&self, t: f64) -> C64;
    fn d1(&self, t: f64) -> C64;
    fn d2(&self, t: f64) -> C64;
    fn d3(&self, t: f64) -> C64;

    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl Holomorphic for IdentityMap {
    fn value(&self, z: C64) -> C64 {
        z
    }
    fn d1(&self, _z: C64) -> C64 {
        C64::new(1.0, 0.0)
    }
    fn d2(&self, _z: C64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn d3(&self, _z: C64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn weierstrass_primitive(&self, z: C64) -> Option<[C64; 3]> {
        let z3 = z * z * z;
        Some([z - z3 / 3.0, C64::i() * (z + z3 / 3.0), z * z])
    }
    fn label(&self) -> String {
        "id".into()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExpMap;

impl Holomorphic for ExpMap {
    fn value(&self, z: C64) -> C64 {
        z.exp()
    }
    fn d1(&self, z: C64) -> C64 {
        z.exp()
    }
    fn d2(&self, z: C64) -> C64 {
        z.exp()
    }
    fn d3(&self, z: C64) -> C64 {
        z.exp()
    }
    fn weierstrass_primitive(&self, z: C64) -> Option<[C64; 3]> {
        let (e, f) = (z.exp(), (-z).exp());
        Some([-f - e, C64::i() * (e - f), 2.0 * z])
    }
    fn label(&self) -> String {
        "exp".into()
    }
}

/// `(a z + b) / (c z + d)` with `ad - bc != 0`.
#[derive(Debug, Clone, Copy)]
pub struct MoebiusMap {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MoebiusMap {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Option<Self> {
        let det = a * d - b * c;
        (det.norm() > 1e-14).then_some(Self { a, b, c, d })
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }
}

impl Holomorphic for MoebiusMap {
    fn value(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }
    fn d1(&self, z: C64) -> C64 {
        let w = self.c * z + self.d;
        self.det() / (w * w)
    }
    fn d2(&self, z: C64) -> C64 {
        let w = self.c * z + self.d;
        -2.0 * self.c * self.det() / (w * w * w)
    }
    fn d3(&self, z: C64) -> C64 {
        let w = self.c * z + self.d;
        6.0 * self.c * self.c * self.det() / (w * w * w * w)
    }
    fn weierstrass_primitive(&self, z: C64) -> Option<[C64; 3]> {
        // rho(g)/g' = (w^2 - v^2, i(w^2 + v^2), 2vw)/det with v = az+b, w = cz+d.
        let det = self.det();
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        // primitive of (k z + l)^2, expanded so that k = 0 needs no special case
        let sq = |k: C64, l: C64| k * k * z * z * z / 3.0 + k * l * z * z + l * l * z;
        let cross = a * c * z * z * z / 3.0 + (a * d + b * c) * z * z / 2.0 + b * d * z;
        let dd = sq(c, d);
        let nn = sq(self.a, self.b);
        Some([
            (dd - nn) / det,
            C64::i() * (dd + nn) / det,
            2.0 * cross / det,
        ])
    }
    fn label(&self) -> String {
        format!("moebius({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// `z -> conj(h(conj z))`: the Weierstrass map of the surface reflected in `y -> -y`.
#[derive(Debug, Clone, Copy)]
pub struct Conjugated<H>(pub H);

impl<H: Holomorphic> Holomorphic for Conjugated<H> {
    fn value(&self, z: C64) -> C64 {
        self.0.value(z.conj()).conj()
    }
    fn d1(&self, z: C64) -> C64 {
        self.0.d1(z.conj()).conj()
    }
    fn d2(&self, z: C64) -> C64 {
        self.0.d2(z.conj()).conj()
    }
    fn d3(&self, z: C64) -> C64 {
        self.0.d3(z.conj()).conj()
    }
    fn weierstrass_primitive(&self, z: C64) -> Option<[C64; 3]> {
        self.0
            .weierstrass_primitive(z.conj())
            .map(|p| [p[0].conj(), -p[1].conj(), p[2].conj()])
    }
    fn label(&self) -> String {
        format!("conj({})", self.0.label())
    }
}

/// The straight line `t -> dir * t`.
#[derive(Debug, Clone, Copy)]
pub struct LineCurve {
    pub dir: C64,
}

impl AnalyticCurve for LineCurve {
    fn value(&self, t: f64) -> C64 {
        self.dir * t
    }
    fn d1(&self, _t: f64) -> C64 {
        self.dir
    }
    fn d2(&self, _t: f64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn d3(&self, _t: f64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn label(&self) -> String {
        format!("line({})", self.dir)
    }
}

/// `t -> scale * rot * (sin(t/k) + i (1 - cos(t/k)))`, a circular arc through 0.
#[derive(Debug, Clone, Copy)]
pub struct ArcCurve {
    pub scale: f64,
    pub rot: C64,
    pub k: f64,
}

impl ArcCurve {
    /// `(3/2)(1 - i)(sin(t/3) + i(1 - cos(t/3)))`.
    pub fn arc_example() -> Self {
        Self {
            scale: 1.5,
            rot: C64::new(1.0, -1.0),
            k: 3.0,
        }
    }

    fn base(&self, t: f64, order: u32) -> C64 {
        let s = (t / self.k).sin();
        let c = (t / self.k).cos();
        let w = 1.0 / self.k;
        match order {
            0 => C64::new(s, 1.0 - c),
            1 => C64::new(c, s) * w,
            2 => C64::new(-s, c) * (w * w),
            _ => C64::new(-c, -s) * (w * w * w),
        }
    }
}

impl AnalyticCurve for ArcCurve {
    fn value(&self, t: f64) -> C64 {
        self.rot * self.base(t, 0) * self.scale
    }
    fn d1(&self, t: f64) -> C64 {
        self.rot * self.base(t, 1) * self.scale
    }
    fn d2(&self, t: f64) -> C64 {
        self.rot * self.base(t, 2) * self.scale
    }
    fn d3(&self, t: f64) -> C64 {
        self.rot * self.base(t, 3) * self.scale
    }
    fn label(&self) -> String {
        format!("arc({}, {}, {})", self.scale, self.rot, self.k)
    }
}

/// `t -> conj(c(t))`.
#[derive(Debug, Clone, Copy)]
pub struct ConjugatedCurve<C>(pub C);

impl<C: AnalyticCurve> AnalyticCurve for ConjugatedCurve<C> {
    fn value(&self, t: f64) -> C64 {
        self.0.value(t).conj()
    }
    fn d1(&self, t: f64) -> C64 {
        self.0.d1(t).conj()
    }
    fn d2(&self, t: f64) -> C64 {
        self.0.d2(t).conj()
    }
    fn d3(&self, t: f64) -> C64 {
        self.0.d3(t).conj()
    }
    fn label(&self) -> String {
        format!("conj({})", self.0.label())
    }
}

/// `rho(g(z)) / g'(z)`, the integrand of the Weierstrass representation.
pub fn weierstrass_integrand(g: &dyn Holomorphic, z: C64) -> [C64; 3] {
    let r = rho(g.value(z));
    let d = g.d1(z);
    [r[0] / d, r[1] / d, r[2] / d]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maps() -> Vec<Box<dyn Holomorphic>> {
        vec![
            Box::new(IdentityMap),
            Box::new(ExpMap),
            Box::new(
                MoebiusMap::new(
                    C64::new(1.0, 0.5),
                    C64::new(0.2, -0.1),
                    C64::new(0.3, 0.1),
                    C64::new(1.0, 0.0),
                )
                .unwrap(),
            ),
            Box::new(Conjugated(
                MoebiusMap::new(
                    C64::new(0.7, 0.0),
                    C64::new(0.1, 0.4),
                    C64::new(-0.2, 0.3),
                    C64::new(1.1, -0.2),
                )
                .unwrap(),
            )),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        let z = C64::new(0.3, -0.2);
        for g in maps() {
            let fd1 = (g.value(z + h) - g.value(z - h)) / (2.0 * h);
            let fd2 = (g.d1(z + h) - g.d1(z - h)) / (2.0 * h);
            let fd3 = (g.d2(z + h) - g.d2(z - h)) / (2.0 * h);
            assert!((fd1 - g.d1(z)).norm() < 1e-8, "{}", g.label());
            assert!((fd2 - g.d2(z)).norm() < 1e-8, "{}", g.label());
            assert!((fd3 - g.d3(z)).norm() < 1e-7, "{}", g.label());
            // Complex-direction derivative agrees: holomorphy.
            let fdi = (g.value(z + C64::i() * h) - g.value(z - C64::i() * h)) / (2.0 * h);
            assert!((fdi - C64::i() * g.d1(z)).norm() < 1e-8, "{}", g.label());
        }
    }

    #[test]
    fn primitives_differentiate_to_integrand() {
        let h = 1e-5;
        let z = C64::new(0.25, 0.4);
        for g in maps() {
            let p = |z| g.weierstrass_primitive(z).unwrap();
            let (a, b) = (p(z + h), p(z - h));
            let w = weierstrass_integrand(g.as_ref(), z);
            for k in 0..3 {
                let fd = (a[k] - b[k]) / (2.0 * h);
                assert!((fd - w[k]).norm() < 1e-8, "{} component {k}", g.label());
            }
        }
    }

    #[test]
    fn curve_derivatives_match_finite_differences() {
        let h = 1e-5;
        let curves: Vec<Box<dyn AnalyticCurve>> = vec![
            Box::new(LineCurve {
                dir: C64::new(1.0, 1.0),
            }),
            Box::new(ArcCurve::arc_example()),
            Box::new(ConjugatedCurve(ArcCurve::arc_example())),
        ];
        for c in curves {
            for &t in &[-0.7, 0.0, 0.4] {
                let fd1 = (c.value(t + h) - c.value(t - h)) / (2.0 * h);
                let fd2 = (c.d1(t + h) - c.d1(t - h)) / (2.0 * h);
                let fd3 = (c.d2(t + h) - c.d2(t - h)) / (2.0 * h);
                assert!((fd1 - c.d1(t)).norm() < 1e-9);
                assert!((fd2 - c.d2(t)).norm() < 1e-9);
                assert!((fd3 - c.d3(t)).norm() < 1e-9);
            }
            assert!(c.value(0.0).norm() < 1e-15);
        }
    }

    #[test]
    fn arc_example_reflects_into_first_quadrant() {
        let c = ConjugatedCurve(ArcCurve::arc_example());
        let d = c.d1(0.0);
        assert!((d - C64::new(0.5, 0.5)).norm() < 1e-15);
    }
}
