//! The auxiliary field `F` on the double cone: initial rows, the explicit
//! evolution in `eta`, projection onto lattice faces and the bridge to the
//! edge quotients of a cross-ratio map.
//!
//! Nodes are addressed by integers `(j, k)` with `xi = j eps/2`,
//! `eta = k eps/2` and `j + k` odd. The face with lower right corner
//! `(m, n)` (centre `(m - 1/2, n + 1/2)`) sits at `j = m + n`, `k = n - m + 1`.

use crate::analytic::{AnalyticCurve, Holomorphic};
use crate::bjorling::{NodeJet, ReparamCurve};
use crate::cr_evolve::CRMapField;
use crate::error::{Error, Result};
use crate::lattice::{LatticeCoefficients, LatticeGrid};
use crate::moebius::{remainder_l, C64, I};

pub const DEFAULT_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitVariant {
    Standard,
    Symmetric,
    Bjorling,
    ExactG,
}

impl std::str::FromStr for InitVariant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "standard" => Ok(Self::Standard),
            "symmetric" => Ok(Self::Symmetric),
            "bjorling" => Ok(Self::Bjorling),
            "exact-g" => Ok(Self::ExactG),
            _ => Err(format!(
                "unknown init variant '{s}' (expected standard, symmetric, bjorling or exact-g)"
            )),
        }
    }
}

/// Values of `F` on the cone `|j| + |k| <= radius`.
#[derive(Debug, Clone)]
pub struct AuxField {
    pub eps: f64,
    pub radius: i64,
    values: Vec<Option<C64>>,
    /// Nodes dropped because `|F|` exceeded the cap or left the domain of the remainder.
    pub divergent: usize,
}

impl AuxField {
    pub fn new(eps: f64, radius: i64) -> Self {
        let side = (2 * radius + 1) as usize;
        Self {
            eps,
            radius,
            values: vec![None; side * side],
            divergent: 0,
        }
    }

    /// True if `(j, k)` is a node of the cone.
    pub fn in_cone(&self, j: i64, k: i64) -> bool {
        (j + k).rem_euclid(2) == 1 && j.abs() + k.abs() <= self.radius
    }

    fn index(&self, j: i64, k: i64) -> usize {
        let side = 2 * self.radius + 1;
        ((k + self.radius) * side + (j + self.radius)) as usize
    }

    pub fn get(&self, j: i64, k: i64) -> Option<C64> {
        if self.in_cone(j, k) {
            self.values[self.index(j, k)]
        } else {
            None
        }
    }

    pub fn set(&mut self, j: i64, k: i64, value: Option<C64>) {
        assert!(self.in_cone(j, k), "node ({j}, {k}) outside the cone");
        let i = self.index(j, k);
        self.values[i] = value;
    }

    /// `(xi, eta)` of a node.
    pub fn position(&self, j: i64, k: i64) -> (f64, f64) {
        (j as f64 * self.eps / 2.0, k as f64 * self.eps / 2.0)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let r = self.radius;
        (-r..=r).flat_map(move |k| (-r..=r).map(move |j| (j, k)).filter(|&(j, k)| self.in_cone(j, k)))
    }
}

/// `f(xi, eta) = -1/2 (g''/g')(p) (u'(xi - eta) + i v'(xi + eta))` with
/// `p = u(xi - eta) + i v(xi + eta)`.
pub fn f_reference(g: &dyn Holomorphic, phi: &dyn AnalyticCurve, xi: f64, eta: f64) -> Result<C64> {
    let (s, t) = (xi - eta, xi + eta);
    let p = C64::new(phi.value(s).re, phi.value(t).im);
    let d1 = g.d1(p);
    if d1.norm() < 1e-12 {
        return Err(Error::ZeroDerivative(format!("g' vanishes at {p}")));
    }
    Ok(-0.5 * g.d2(p) / d1 * C64::new(phi.d1(s).re, phi.d1(t).im))
}

struct RowTerms {
    f: C64,
    /// `d_eta f` at `eta = 0`: `Theta d_xi f + 2 i Xi f`.
    f_eta: C64,
    /// `d/dt [(conj phi'/phi') d/dt log(G'^2/phi'^2)]`.
    bjorling: C64,
}

fn row_terms(j: &NodeJet) -> Result<RowTerms> {
    let [_, g1, g2, g3] = j.g;
    let [p1, p2, p3] = j.phi_dot;
    if g1.norm() < 1e-14 {
        return Err(Error::ZeroDerivative("G0' vanishes on an initial row".into()));
    }
    let (a, b) = (g2 / g1, p2 / p1);
    let d = 2.0 * (a - b);
    let dd = 2.0 * (g3 / g1 - a * a - p3 / p1 + b * b);
    let f = -0.25 * d;
    let f1 = -0.25 * dd;
    let theta = -p1.conj() / p1;
    let theta1 = -p2.conj() / p1 + p1.conj() * p2 / (p1 * p1);
    let ratio = p1.conj() / p1;
    let ratio1 = p2.conj() / p1 - p1.conj() * p2 / (p1 * p1);
    Ok(RowTerms {
        f,
        f_eta: theta * f1 + theta1 * f,
        bjorling: ratio1 * d + ratio * dd,
    })
}

/// Sign in front of the `eps/8` correction of the second row in the
/// Björling form. `+1` agrees with the Taylor step `f + (eps/2) d_eta f`.
const BJORLING_ROW_SIGN: f64 = 1.0;

fn rows_from_jets(
    curve: &ReparamCurve,
    radius: i64,
    variant: InitVariant,
    bjorling_sign: f64,
) -> Result<AuxField> {
    let eps = curve.eps;
    let mut field = AuxField::new(eps, radius);
    // Row 0: j = 2i + 1 at t = (i + 1/2) eps.
    for j in (-radius..=radius).filter(|j| j.rem_euclid(2) == 1) {
        let i = (j - 1) / 2;
        let r = row_terms(curve.jet_mid(i))?;
        let v = match variant {
            InitVariant::Symmetric => r.f - 0.25 * eps * r.f_eta,
            _ => r.f,
        };
        field.set(j, 0, Some(v));
    }
    // Row 1: j = 2i at t = i eps.
    for j in (-(radius - 1)..=radius - 1).filter(|j| j.rem_euclid(2) == 0) {
        let r = row_terms(curve.jet(j / 2))?;
        let v = match variant {
            InitVariant::Standard => r.f + 0.5 * eps * r.f_eta,
            InitVariant::Symmetric => r.f + 0.25 * eps * r.f_eta,
            InitVariant::Bjorling => r.f + bjorling_sign * eps / 8.0 * r.bjorling,
            InitVariant::ExactG => unreachable!(),
        };
        field.set(j, 1, Some(v));
    }
    Ok(field)
}

/// Rows `eta = 0` and `eta = eps/2` for a lattice of half width `m`, so that
/// the cone covers every face of the window (`radius = 2m - 1`).
pub fn initial_rows(curve: &ReparamCurve, m: usize, variant: InitVariant) -> Result<AuxField> {
    if variant == InitVariant::ExactG {
        return Err(Error::InvalidInput(
            "the exact-g variant needs the lattice and g; use initial_rows_exact_g".into(),
        ));
    }
    if m < 1 || m > curve.half_width {
        return Err(Error::InvalidInput(format!(
            "half width {m} not covered by the curve (half width {})",
            curve.half_width
        )));
    }
    rows_from_jets(curve, 2 * m as i64 - 1, variant, BJORLING_ROW_SIGN)
}

/// Rows with the sign of the `eps/8` term reversed.
#[doc(hidden)]
pub fn initial_rows_bjorling_reversed(curve: &ReparamCurve, m: usize) -> Result<AuxField> {
    rows_from_jets(curve, 2 * m as i64 - 1, InitVariant::Bjorling, -BJORLING_ROW_SIGN)
}

/// Rows read off from `g` on the lattice: `F = log(alpha_left / beta_top) / eps`
/// on the row-0 faces and `log(beta_bottom / alpha_right) / eps` on row 1.
pub fn initial_rows_exact_g(grid: &LatticeGrid, g: &dyn Holomorphic) -> Result<AuxField> {
    let m = grid.half_width();
    let eps = grid.eps;
    let mut field = AuxField::new(eps, 2 * m - 1);
    let gp = |a: i64, b: i64| g.value(grid.p(a, b));
    let alpha = |a: i64, b: i64| (gp(a, b + 1) - gp(a, b)) / (I * grid.dv(b));
    let beta = |a: i64, b: i64| (gp(a, b) - gp(a - 1, b)) / grid.du(a);
    // Row 0: face with lower right corner (a, a - 1), j = 2a - 1.
    for a in -m + 1..=m {
        let q = alpha(a - 1, a - 1) / beta(a, a);
        field.set(2 * a - 1, 0, Some(q.ln() / eps));
    }
    // Row 1: face with lower right corner (a, a), j = 2a.
    for a in -m + 1..=m - 1 {
        let q = beta(a, a) / alpha(a, a);
        field.set(2 * a, 1, Some(q.ln() / eps));
    }
    Ok(field)
}

fn step_value(
    eps: f64,
    c: &crate::lattice::VertexCoefficients,
    f_plus: C64,
    f_minus: C64,
) -> Result<C64> {
    let lp = remainder_l(c.du_plus, c.dv_plus, eps * f_plus)?;
    let lm = remainder_l(c.du_minus, c.dv_minus, eps * f_minus)?;
    Ok(c.apply(eps, f_plus, f_minus) + (lp - lm) / eps)
}

/// Fills the cone from the two initial rows, upward and downward in `eta`.
///
/// `F(j, k+1) = F(j, k-1) + M (F(j+1,k) - F(j-1,k)) + i eps Xi (F(j+1,k) + F(j-1,k))
///            + (L(du+, dv+, eps F(j+1,k)) - L(du-, dv-, eps F(j-1,k))) / eps`
/// with coefficients of the vertex `((j-k)/2, (j+k)/2)`.
pub fn evolve_f(rows: &AuxField, coeffs: &LatticeCoefficients, cap: f64) -> Result<AuxField> {
    let r = rows.radius;
    if r > 2 * coeffs.interior_half_width() + 1 {
        return Err(Error::InvalidInput(format!(
            "cone radius {r} exceeds the coefficient window"
        )));
    }
    let eps = rows.eps;
    let mut field = rows.clone();
    let update = |field: &mut AuxField, j: i64, k: i64, from: i64, dir: f64| {
        let (a, b) = ((j - k) / 2, (j + k) / 2);
        let c = coeffs.at(a, b);
        let new = match (field.get(j + 1, k), field.get(j - 1, k), field.get(j, from)) {
            (Some(fp), Some(fm), Some(f0)) => match step_value(eps, c, fp, fm) {
                Ok(s) => {
                    let v = f0 + dir * s;
                    if v.norm() <= cap && v.re.is_finite() && v.im.is_finite() {
                        Some(v)
                    } else {
                        field.divergent += 1;
                        None
                    }
                }
                Err(_) => {
                    field.divergent += 1;
                    None
                }
            },
            _ => None,
        };
        field.set(j, k + dir as i64, new);
    };
    for k in 1..r {
        for j in (-(r - k - 1)..=r - k - 1).filter(|j| (j + k).rem_euclid(2) == 0) {
            update(&mut field, j, k, k - 1, 1.0);
        }
    }
    for k in (-(r - 1)..=0).rev() {
        // Downward: F(j, k-1) from rows k and k+1.
        for j in (-(r - k.abs() - 1)..=r - k.abs() - 1).filter(|j| (j + k).rem_euclid(2) == 0) {
            update(&mut field, j, k, k + 1, -1.0);
        }
    }
    Ok(field)
}

/// `F` on lattice faces, indexed by the lower right corner `(m, n)`.
#[derive(Debug, Clone)]
pub struct FaceField {
    pub eps: f64,
    /// Lattice half width.
    pub m: i64,
    values: Vec<Option<C64>>,
}

impl FaceField {
    pub fn new(eps: f64, m: i64) -> Self {
        let side = (2 * m) as usize;
        Self {
            eps,
            m,
            values: vec![None; side * side],
        }
    }

    pub fn contains(&self, a: i64, b: i64) -> bool {
        a > -self.m && a <= self.m && b >= -self.m && b < self.m
    }

    fn index(&self, a: i64, b: i64) -> usize {
        let side = 2 * self.m;
        ((b + self.m) * side + (a + self.m - 1)) as usize
    }

    pub fn get(&self, a: i64, b: i64) -> Option<C64> {
        if self.contains(a, b) {
            self.values[self.index(a, b)]
        } else {
            None
        }
    }

    pub fn set(&mut self, a: i64, b: i64, v: Option<C64>) {
        assert!(self.contains(a, b), "face ({a}, {b}) outside the window");
        let i = self.index(a, b);
        self.values[i] = v;
    }

    pub fn faces(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let m = self.m;
        (-m..m).flat_map(move |b| (-m + 1..=m).map(move |a| (a, b)))
    }
}

/// Node `(j, k)` of the face with lower right corner `(m, n)`.
pub fn face_node(m: i64, n: i64) -> (i64, i64) {
    (m + n, n - m + 1)
}

/// Reads `F` on every face of a lattice of half width `m`.
pub fn project_to_faces(field: &AuxField, m: i64) -> Result<FaceField> {
    let mut out = FaceField::new(field.eps, m);
    for b in -m..m {
        for a in -m + 1..=m {
            let (j, k) = face_node(a, b);
            if !field.in_cone(j, k) {
                return Err(Error::OutOfDomain(format!(
                    "face ({a}, {b}) maps to node ({j}, {k}) outside the cone"
                )));
            }
            out.set(a, b, field.get(j, k));
        }
    }
    Ok(out)
}

/// Largest residual of the fully discrete evolution over all interior
/// vertices whose four faces carry values.
pub fn devolve_fmn_residual(faces: &FaceField, coeffs: &LatticeCoefficients) -> f64 {
    let eps = faces.eps;
    let k = coeffs.interior_half_width();
    let mut worst = 0.0f64;
    for b in -k..=k {
        for a in -k..=k {
            let (Some(ne), Some(sw), Some(nw), Some(se)) = (
                faces.get(a + 1, b),
                faces.get(a, b - 1),
                faces.get(a, b),
                faces.get(a + 1, b - 1),
            ) else {
                continue;
            };
            let r = match step_value(eps, coeffs.at(a, b), ne, sw) {
                Ok(s) => (nw - se - s).norm(),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(r);
        }
    }
    worst
}

/// Edge quotients of a lattice map and their face ratios.
#[derive(Debug, Clone)]
pub struct EdgeFields {
    pub m: i64,
    /// `alpha` on the vertical edge `(a, b + 1/2)`, indexed by `(a, b)`.
    pub alpha: Vec<Option<C64>>,
    /// `beta` on the horizontal edge `(a - 1/2, b)`, indexed by `(a, b)`.
    pub beta: Vec<Option<C64>>,
    /// `Q = beta_bottom / alpha_right` on faces.
    pub q: FaceField,
    /// Largest relative gap between `beta_bottom / alpha_right` and `alpha_left / beta_top`.
    pub q_defect: f64,
}

impl EdgeFields {
    fn idx(&self, a: i64, b: i64) -> usize {
        let side = 2 * self.m + 1;
        ((b + self.m) * side + (a + self.m)) as usize
    }

    pub fn alpha_at(&self, a: i64, b: i64) -> Option<C64> {
        if a.abs() <= self.m && b >= -self.m && b < self.m {
            self.alpha[self.idx(a, b)]
        } else {
            None
        }
    }

    pub fn beta_at(&self, a: i64, b: i64) -> Option<C64> {
        if a > -self.m && a <= self.m && b.abs() <= self.m {
            self.beta[self.idx(a, b)]
        } else {
            None
        }
    }
}

pub fn edge_fields(field: &CRMapField, grid: &LatticeGrid) -> EdgeFields {
    let m = grid.half_width();
    let side = (2 * m + 1) as usize;
    let mut out = EdgeFields {
        m,
        alpha: vec![None; side * side],
        beta: vec![None; side * side],
        q: FaceField::new(grid.eps, m),
        q_defect: 0.0,
    };
    for b in -m..=m {
        for a in -m..=m {
            let i = out.idx(a, b);
            if b < m {
                if let (Some(g0), Some(g1)) = (field.get(a, b), field.get(a, b + 1)) {
                    out.alpha[i] = Some((g1 - g0) / (I * grid.dv(b)));
                }
            }
            if a > -m {
                if let (Some(g0), Some(g1)) = (field.get(a - 1, b), field.get(a, b)) {
                    out.beta[i] = Some((g1 - g0) / grid.du(a));
                }
            }
        }
    }
    let mut defect = 0.0f64;
    for b in -m..m {
        for a in -m + 1..=m {
            let (Some(bb), Some(ar), Some(al), Some(bt)) = (
                out.beta_at(a, b),
                out.alpha_at(a, b),
                out.alpha_at(a - 1, b),
                out.beta_at(a, b + 1),
            ) else {
                continue;
            };
            let q1 = bb / ar;
            let q2 = al / bt;
            defect = defect.max((q1 - q2).norm() / q1.norm());
            out.q.set(a, b, Some(q1));
        }
    }
    out.q_defect = defect;
    out
}

/// Largest `|exp(eps F) - Q|/|Q|` over faces where both are defined.
pub fn q_bridge_defect(faces: &FaceField, edges: &EdgeFields) -> f64 {
    let eps = faces.eps;
    faces
        .faces()
        .filter_map(|(a, b)| match (faces.get(a, b), edges.q.get(a, b)) {
            (Some(f), Some(q)) => Some(((eps * f).exp() - q).norm() / q.norm()),
            _ => None,
        })
        .fold(0.0, f64::max)
}
