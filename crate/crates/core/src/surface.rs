//! Smooth Weierstrass evaluation, synthesis of Björling data from known
//! `(g, phi)`, and discrete Weierstrass integration of a cross-ratio map.

use nalgebra::Vector3;

use crate::analytic::{weierstrass_integrand, AnalyticCurve, Holomorphic};
use crate::bjorling::{BjorlingData, NodeJet};
use crate::cr_evolve::CRMapField;
use crate::error::{Error, Result};
use crate::lattice::LatticeGrid;
use crate::moebius::{rho, rho_edge, stereo_sigma, stereo_sigma_derivative, C64, UnitVector3};
use crate::quadrature::adaptive_simpson;

pub const QUADRATURE_TOL: f64 = 1e-12;

fn re3(z: [C64; 3]) -> Vector3<f64> {
    Vector3::new(z[0].re, z[1].re, z[2].re)
}

/// `(F_u, F_v, N)` of the surface `Re int rho(g)/g' dz` at `z`.
pub fn smooth_weierstrass(g: &dyn Holomorphic, z: C64) -> Result<(Vector3<f64>, Vector3<f64>, UnitVector3)> {
    if g.d1(z).norm() < 1e-12 {
        return Err(Error::ZeroDerivative(format!("g' vanishes at {z}")));
    }
    let w = weierstrass_integrand(g, z);
    let fu = re3(w);
    let fv = -Vector3::new(w[0].im, w[1].im, w[2].im);
    Ok((fu, fv, stereo_sigma(g.value(z))))
}

/// Björling data of the minimal surface with Weierstrass map `g` along `phi`.
pub struct SynthesizedData {
    pub g: Box<dyn Holomorphic>,
    pub phi: Box<dyn AnalyticCurve>,
    interval: (f64, f64),
    anchor: Vector3<f64>,
}

impl SynthesizedData {
    /// `anchor` is the curve point at `t = 0`.
    pub fn new(g: Box<dyn Holomorphic>, phi: Box<dyn AnalyticCurve>, interval: (f64, f64), anchor: Vector3<f64>) -> Self {
        Self {
            g,
            phi,
            interval,
            anchor,
        }
    }
}

/// Builds Björling data from `g` and `phi` (alias of [`SynthesizedData::new`]).
pub fn synthesize_bjorling(
    g: Box<dyn Holomorphic>,
    phi: Box<dyn AnalyticCurve>,
    interval: (f64, f64),
    anchor: Vector3<f64>,
) -> SynthesizedData {
    SynthesizedData::new(g, phi, interval, anchor)
}

impl BjorlingData for SynthesizedData {
    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn position(&self, t: f64) -> Vector3<f64> {
        self.anchor + adaptive_simpson(|s| self.tangent(s), 0.0, t, QUADRATURE_TOL)
    }

    fn tangent(&self, t: f64) -> Vector3<f64> {
        let z = self.phi.value(t);
        let pd = self.phi.d1(t);
        let r = rho(self.g.value(z));
        let w = pd / self.g.d1(z);
        re3([w * r[0], w * r[1], w * r[2]])
    }

    fn normal(&self, t: f64) -> Vector3<f64> {
        stereo_sigma(self.g.value(self.phi.value(t))).into()
    }

    fn normal_derivative(&self, t: f64) -> Vector3<f64> {
        let z = self.phi.value(t);
        stereo_sigma_derivative(self.g.value(z), self.g.d1(z) * self.phi.d1(t))
    }

    fn analytic_jet(&self, t: f64) -> Option<NodeJet> {
        let z = self.phi.value(t);
        let (p1, p2, p3) = (self.phi.d1(t), self.phi.d2(t), self.phi.d3(t));
        let (g1, g2, g3) = (self.g.d1(z), self.g.d2(z), self.g.d3(z));
        Some(NodeJet {
            g: [
                self.g.value(z),
                g1 * p1,
                g2 * p1 * p1 + g1 * p2,
                g3 * p1 * p1 * p1 + 3.0 * g2 * p1 * p2 + g1 * p3,
            ],
            phi_dot: [p1, p2, p3],
        })
    }
}

/// Closed-form or quadrature evaluation of `F(z) = Re int_0^z rho(g)/g' + offset`.
pub struct SmoothReference<'a> {
    pub g: &'a dyn Holomorphic,
    pub offset: Vector3<f64>,
}

impl<'a> SmoothReference<'a> {
    /// The reference surface passing through `anchor` at `z = 0`.
    pub fn anchored(g: &'a dyn Holomorphic, anchor: Vector3<f64>) -> Self {
        Self { g, offset: anchor }
    }

    pub fn point(&self, z: C64) -> Vector3<f64> {
        if let (Some(p), Some(p0)) = (
            self.g.weierstrass_primitive(z),
            self.g.weierstrass_primitive(C64::new(0.0, 0.0)),
        ) {
            return self.offset + re3([p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]]);
        }
        self.quadrature_point(z)
    }

    /// Adaptive Simpson along the segment `[0, z]`.
    pub fn quadrature_point(&self, z: C64) -> Vector3<f64> {
        let v = adaptive_simpson(
            |s| {
                let w = weierstrass_integrand(self.g, z * s);
                re3([w[0] * z, w[1] * z, w[2] * z])
            },
            0.0,
            1.0,
            QUADRATURE_TOL,
        );
        self.offset + v
    }

    pub fn normal(&self, z: C64) -> UnitVector3 {
        stereo_sigma(self.g.value(z))
    }
}

/// `Re[dp^2/dG (1 - G+ G, i(1 + G+ G), G+ + G)]`, the increment of the
/// discrete Weierstrass representation along one edge.
pub fn edge_increment(p0: C64, p1: C64, g0: C64, g1: C64) -> Result<Vector3<f64>> {
    let dp = p1 - p0;
    let dg = g1 - g0;
    if dg.norm() < 1e-14 * dp.norm() {
        return Err(Error::ZeroDerivative(format!("flat edge between {p0} and {p1}")));
    }
    let w = dp * dp / dg;
    let r = rho_edge(g0, g1);
    Ok(re3([w * r[0], w * r[1], w * r[2]]))
}

/// Increments on all edges between ok cells.
#[derive(Debug, Clone)]
pub struct EdgeIncrements {
    pub m: i64,
    /// Horizontal edge `(a-1, b) -> (a, b)`, indexed by `(a, b)`.
    pub horizontal: Vec<Option<Vector3<f64>>>,
    /// Vertical edge `(a, b) -> (a, b+1)`, indexed by `(a, b)`.
    pub vertical: Vec<Option<Vector3<f64>>>,
}

impl EdgeIncrements {
    fn idx(&self, a: i64, b: i64) -> usize {
        ((b + self.m) * (2 * self.m + 1) + (a + self.m)) as usize
    }

    pub fn horizontal_at(&self, a: i64, b: i64) -> Option<Vector3<f64>> {
        (a > -self.m && a <= self.m && b.abs() <= self.m).then(|| self.horizontal[self.idx(a, b)]).flatten()
    }

    pub fn vertical_at(&self, a: i64, b: i64) -> Option<Vector3<f64>> {
        (a.abs() <= self.m && b >= -self.m && b < self.m).then(|| self.vertical[self.idx(a, b)]).flatten()
    }

    /// Increment along the directed edge from `from` to the neighbouring `to`.
    pub fn directed(&self, from: (i64, i64), to: (i64, i64)) -> Option<Vector3<f64>> {
        match (to.0 - from.0, to.1 - from.1) {
            (1, 0) => self.horizontal_at(to.0, to.1),
            (-1, 0) => self.horizontal_at(from.0, from.1).map(|v| -v),
            (0, 1) => self.vertical_at(from.0, from.1),
            (0, -1) => self.vertical_at(to.0, to.1).map(|v| -v),
            _ => None,
        }
    }
}

pub fn edge_increments(field: &CRMapField, grid: &LatticeGrid) -> EdgeIncrements {
    let m = field.half_width();
    let side = (2 * m + 1) as usize;
    let mut out = EdgeIncrements {
        m,
        horizontal: vec![None; side * side],
        vertical: vec![None; side * side],
    };
    for b in -m..=m {
        for a in -m..=m {
            let i = out.idx(a, b);
            if a > -m {
                if let (Some(g0), Some(g1)) = (field.get(a - 1, b), field.get(a, b)) {
                    out.horizontal[i] = edge_increment(grid.p(a - 1, b), grid.p(a, b), g0, g1).ok();
                }
            }
            if b < m {
                if let (Some(g0), Some(g1)) = (field.get(a, b), field.get(a, b + 1)) {
                    out.vertical[i] = edge_increment(grid.p(a, b), grid.p(a, b + 1), g0, g1).ok();
                }
            }
        }
    }
    out
}

/// Spanning tree used to accumulate the increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanningTree {
    /// Zig-zag from the anchor, then vertical columns from each diagonal cell.
    ZigzagColumns,
    /// Zig-zag from the anchor, then horizontal rows from each diagonal cell.
    ZigzagRows,
}

/// Points `F_{m,n}` and normals `N_{m,n} = sigma(G_{m,n})` on a rectangular index block.
#[derive(Debug, Clone)]
pub struct DiscreteSurface {
    pub m0: i64,
    pub n0: i64,
    pub cols: usize,
    pub rows: usize,
    points: Vec<Option<Vector3<f64>>>,
    normals: Vec<Option<UnitVector3>>,
    pub anchor: ((i64, i64), Vector3<f64>),
    /// Largest `|sum of edge increments around a quad| / mean edge norm`.
    pub closure_defect: f64,
}

impl DiscreteSurface {
    pub fn from_parts(
        m0: i64,
        n0: i64,
        cols: usize,
        rows: usize,
        points: Vec<Option<Vector3<f64>>>,
        normals: Vec<Option<UnitVector3>>,
    ) -> Result<Self> {
        if points.len() != cols * rows || normals.len() != cols * rows {
            return Err(Error::InvalidInput("surface arrays do not match the block size".into()));
        }
        let anchor = points
            .iter()
            .position(|p| p.is_some())
            .map(|i| ((m0 + (i % cols) as i64, n0 + (i / cols) as i64), points[i].unwrap()))
            .unwrap_or(((m0, n0), Vector3::zeros()));
        Ok(Self {
            m0,
            n0,
            cols,
            rows,
            points,
            normals,
            anchor,
            closure_defect: 0.0,
        })
    }

    fn idx(&self, m: i64, n: i64) -> Option<usize> {
        let (i, j) = (m - self.m0, n - self.n0);
        (i >= 0 && j >= 0 && (i as usize) < self.cols && (j as usize) < self.rows)
            .then(|| j as usize * self.cols + i as usize)
    }

    pub fn point(&self, m: i64, n: i64) -> Option<Vector3<f64>> {
        self.idx(m, n).and_then(|i| self.points[i])
    }

    pub fn normal(&self, m: i64, n: i64) -> Option<UnitVector3> {
        self.idx(m, n).and_then(|i| self.normals[i])
    }

    /// Cells in row-major order (`n` outer, `m` inner).
    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.rows as i64).flat_map(move |j| (0..self.cols as i64).map(move |i| (self.m0 + i, self.n0 + j)))
    }

    pub fn ok_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_some()).count()
    }

    /// Mirror image under `y -> -y`.
    pub fn reflect_y(&self) -> Self {
        let flip = |v: Vector3<f64>| Vector3::new(v.x, -v.y, v.z);
        Self {
            points: self.points.iter().map(|p| p.map(flip)).collect(),
            normals: self
                .normals
                .iter()
                .map(|n| n.map(|u| UnitVector3::new_unchecked(flip(*u.as_vector()))))
                .collect(),
            anchor: (self.anchor.0, flip(self.anchor.1)),
            ..self.clone()
        }
    }
}

/// Accumulates the discrete Weierstrass increments from `F_{0,0} = anchor`.
pub fn integrate_surface(
    field: &CRMapField,
    grid: &LatticeGrid,
    anchor: Vector3<f64>,
    tree: SpanningTree,
) -> Result<DiscreteSurface> {
    let k = field.half_width();
    if field.get(0, 0).is_none() {
        return Err(Error::EmptyDomain);
    }
    let inc = edge_increments(field, grid);
    let side = (2 * k + 1) as usize;
    let mut points: Vec<Option<Vector3<f64>>> = vec![None; side * side];
    let idx = |m: i64, n: i64| ((n + k) * (2 * k + 1) + (m + k)) as usize;
    points[idx(0, 0)] = Some(anchor);
    let mut visited = vec![false; side * side];
    visited[idx(0, 0)] = true;
    let mut step = |points: &mut Vec<Option<Vector3<f64>>>, from: (i64, i64), to: (i64, i64)| {
        if !field.contains(to.0, to.1) || visited[idx(to.0, to.1)] {
            return;
        }
        visited[idx(to.0, to.1)] = true;
        let next = points[idx(from.0, from.1)].and_then(|p| inc.directed(from, to).map(|d| p + d));
        points[idx(to.0, to.1)] = next;
    };
    // Zig-zag spine: (m, m) -> (m, m+1) -> (m+1, m+1) forward, mirrored backward.
    for m in 0..k {
        step(&mut points, (m, m), (m, m + 1));
        step(&mut points, (m, m + 1), (m + 1, m + 1));
    }
    for m in (-k + 1..=0).rev() {
        step(&mut points, (m, m), (m - 1, m));
        step(&mut points, (m - 1, m), (m - 1, m - 1));
    }
    // Branches leave each diagonal cell; cells already on the spine are passed through.
    for d in -k..=k {
        match tree {
            SpanningTree::ZigzagColumns => {
                for n in d + 1..=k {
                    step(&mut points, (d, n - 1), (d, n));
                }
                for n in (-k..d).rev() {
                    step(&mut points, (d, n + 1), (d, n));
                }
            }
            SpanningTree::ZigzagRows => {
                for m in d + 1..=k {
                    step(&mut points, (m - 1, d), (m, d));
                }
                for m in (-k..d).rev() {
                    step(&mut points, (m + 1, d), (m, d));
                }
            }
        }
    }
    let normals = field.cells().map(|(m, n)| {
        points[idx(m, n)].and_then(|_| field.get(m, n).map(stereo_sigma))
    });
    let normals: Vec<Option<UnitVector3>> = normals.collect();
    let mut surface = DiscreteSurface {
        m0: -k,
        n0: -k,
        cols: side,
        rows: side,
        points,
        normals,
        anchor: ((0, 0), anchor),
        closure_defect: 0.0,
    };
    surface.closure_defect = closure_defect(&inc);
    Ok(surface)
}

/// Largest relative closure defect of the increments over quads whose four edges exist.
pub fn closure_defect(inc: &EdgeIncrements) -> f64 {
    let k = inc.m;
    let mut worst = 0.0f64;
    for n in -k..k {
        for m in -k + 1..=k {
            let (Some(bottom), Some(right), Some(top), Some(left)) = (
                inc.horizontal_at(m, n),
                inc.vertical_at(m, n),
                inc.horizontal_at(m, n + 1),
                inc.vertical_at(m - 1, n),
            ) else {
                continue;
            };
            let mean = 0.25 * (bottom.norm() + right.norm() + top.norm() + left.norm());
            let sum = bottom + right - top - left;
            worst = worst.max(sum.norm() / mean);
        }
    }
    worst
}

/// Largest `|F_A - F_B| / scale` over cells where both surfaces are defined,
/// with `scale` the largest vertex distance from the anchor.
pub fn path_independence(a: &DiscreteSurface, b: &DiscreteSurface) -> f64 {
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for (m, n) in a.cells() {
        if let (Some(x), Some(y)) = (a.point(m, n), b.point(m, n)) {
            scale = scale.max((x - a.anchor.1).norm());
            worst = worst.max((x - y).norm());
        }
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}
