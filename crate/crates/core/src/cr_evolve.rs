//! The hyperbolic march that fills the lattice window from zig-zag data by
//! prescribing the cross-ratio of every elementary quad.

use crate::bjorling::ReparamCurve;
use crate::lattice::LatticeGrid;
use crate::moebius::{cross_ratio, solve_fourth_vertex_tol, C64, FOURTH_VERTEX_TOL, I};
use crate::zigzag::ZigzagData;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Ok,
    Divergent,
    OutOfDomain,
}

#[derive(Debug, Clone, Copy)]
pub struct CrOptions {
    /// Largest admissible `|G|`.
    pub cap: f64,
    /// Relative tolerance for a degenerate fourth-vertex solve.
    pub tol: f64,
    /// Mark a cell divergent when its quad's face ratio `Q = e^{eps F}`
    /// leaves the strip `|arg Q| <= pi/4` on which `F` is defined.
    pub strip: bool,
}

impl Default for CrOptions {
    fn default() -> Self {
        Self {
            cap: 1e6,
            tol: FOURTH_VERTEX_TOL,
            strip: true,
        }
    }
}

/// Source of the target cross-ratio of each quad.
#[derive(Debug, Clone, Copy)]
pub enum QSource<'a> {
    /// `-du^2/dv^2` from the lattice points.
    Lattice,
    /// `-(u'_{m-1/2} / v'_{n+1/2})^2` from the sampled derivatives.
    Derivatives(&'a ReparamCurve),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FillStats {
    pub ok: usize,
    pub divergent: usize,
    pub out_of_domain: usize,
}

/// Values `G_{m,n}` on `[-M, M]^2` with a validity mask.
#[derive(Debug, Clone)]
pub struct CRMapField {
    pub m: usize,
    values: Vec<C64>,
    state: Vec<CellState>,
    pub stats: FillStats,
}

impl CRMapField {
    pub fn half_width(&self) -> i64 {
        self.m as i64
    }

    pub fn contains(&self, m: i64, n: i64) -> bool {
        let k = self.half_width();
        m.abs() <= k && n.abs() <= k
    }

    fn index(&self, m: i64, n: i64) -> usize {
        let k = self.half_width();
        ((n + k) * (2 * k + 1) + (m + k)) as usize
    }

    pub fn state(&self, m: i64, n: i64) -> CellState {
        if self.contains(m, n) {
            self.state[self.index(m, n)]
        } else {
            CellState::OutOfDomain
        }
    }

    /// The value of an ok cell.
    pub fn get(&self, m: i64, n: i64) -> Option<C64> {
        (self.state(m, n) == CellState::Ok).then(|| self.values[self.index(m, n)])
    }

    /// Builds a field from a function on the window; every cell is ok.
    pub fn from_fn(m: usize, f: impl Fn(i64, i64) -> C64) -> Self {
        let k = m as i64;
        let mut values = Vec::new();
        for n in -k..=k {
            for mm in -k..=k {
                values.push(f(mm, n));
            }
        }
        let side = (2 * m + 1) * (2 * m + 1);
        Self {
            m,
            values,
            state: vec![CellState::Ok; side],
            stats: FillStats {
                ok: side,
                ..Default::default()
            },
        }
    }

    /// Overwrites a value, keeping the cell ok. Intended for audits.
    pub fn set_value(&mut self, m: i64, n: i64, z: C64) {
        let i = self.index(m, n);
        self.values[i] = z;
        self.state[i] = CellState::Ok;
    }

    /// Marks a cell divergent.
    pub fn mask(&mut self, m: i64, n: i64) {
        self.put(m, n, None, CellState::Divergent);
        self.recount();
    }

    fn put(&mut self, m: i64, n: i64, z: Option<C64>, state: CellState) {
        let i = self.index(m, n);
        self.values[i] = z.unwrap_or(C64::new(f64::NAN, f64::NAN));
        self.state[i] = state;
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> {
        let k = self.half_width();
        (-k..=k).flat_map(move |n| (-k..=k).map(move |m| (m, n)))
    }

    fn recount(&mut self) {
        let mut s = FillStats::default();
        for st in &self.state {
            match st {
                CellState::Ok => s.ok += 1,
                CellState::Divergent => s.divergent += 1,
                CellState::OutOfDomain => s.out_of_domain += 1,
            }
        }
        self.stats = s;
    }
}

fn target_q(grid: &LatticeGrid, source: QSource<'_>, m: i64, n: i64) -> C64 {
    match source {
        QSource::Lattice => C64::new(grid.quad_cross_ratio(m, n), 0.0),
        QSource::Derivatives(c) => {
            let r = c.u_dot_mid(m - 1) / c.v_dot_mid(n);
            C64::new(-r * r, 0.0)
        }
    }
}

/// `Q = beta_bottom / alpha_right` of the quad with lower right corner `(m, n)`.
pub fn face_ratio(field: &CRMapField, grid: &LatticeGrid, (m, n): (i64, i64)) -> Option<C64> {
    let (bl, br, tr) = (field.get(m - 1, n)?, field.get(m, n)?, field.get(m, n + 1)?);
    let beta = (br - bl) / grid.du(m);
    let alpha = (tr - br) / (I * grid.dv(n));
    Some(beta / alpha)
}

fn in_strip(field: &CRMapField, grid: &LatticeGrid, quad: (i64, i64)) -> bool {
    face_ratio(field, grid, quad).is_some_and(|q| q.arg().abs() <= std::f64::consts::FRAC_PI_4)
}

/// Evolves with cross-ratios taken from the lattice points.
pub fn evolve(zigzag: &ZigzagData, grid: &LatticeGrid, opts: &CrOptions) -> CRMapField {
    evolve_with(zigzag, grid, opts, QSource::Lattice)
}

/// Fills the window anti-diagonal by anti-diagonal, upward (`n - m >= 2`)
/// and downward (`m - n >= 1`). Each new cell is the unknown corner of a
/// quad whose other three corners are known.
pub fn evolve_with(zigzag: &ZigzagData, grid: &LatticeGrid, opts: &CrOptions, source: QSource<'_>) -> CRMapField {
    let k = grid.half_width().min(zigzag.half_width());
    let side = (2 * k + 1) as usize;
    let mut field = CRMapField {
        m: k as usize,
        values: vec![C64::new(f64::NAN, f64::NAN); side * side],
        state: vec![CellState::OutOfDomain; side * side],
        stats: FillStats::default(),
    };
    let admissible = |z: C64| z.re.is_finite() && z.im.is_finite() && z.norm() <= opts.cap;
    for i in -k..=k {
        let z = zigzag.diag_at(i);
        let st = if admissible(z) { CellState::Ok } else { CellState::Divergent };
        field.put(i, i, Some(z), st);
        if i < k {
            let z = zigzag.off_at(i);
            let st = if admissible(z) { CellState::Ok } else { CellState::Divergent };
            field.put(i, i + 1, Some(z), st);
        }
    }
    let solve = |field: &mut CRMapField, cell: (i64, i64), known: [(i64, i64); 3], quad: (i64, i64)| {
        let vals: Vec<Option<C64>> = known.iter().map(|&(a, b)| field.get(a, b)).collect();
        let (Some(a), Some(b), Some(c)) = (vals[0], vals[1], vals[2]) else {
            field.put(cell.0, cell.1, None, CellState::OutOfDomain);
            return;
        };
        let q = target_q(grid, source, quad.0, quad.1);
        match solve_fourth_vertex_tol(q, a, b, c, opts.tol) {
            Ok(z) if admissible(z) => {
                field.put(cell.0, cell.1, Some(z), CellState::Ok);
                if opts.strip && !in_strip(field, grid, quad) {
                    field.put(cell.0, cell.1, None, CellState::Divergent);
                }
            }
            _ => field.put(cell.0, cell.1, None, CellState::Divergent),
        }
    };
    // Upward: (m, m+d) closes the quad with lower right corner (m+1, m+d-1).
    for d in 2..=2 * k {
        for m in -k..=k - d {
            let n = m + d;
            solve(
                &mut field,
                (m, n),
                [(m, n - 1), (m + 1, n - 1), (m + 1, n)],
                (m + 1, n - 1),
            );
        }
    }
    // Downward: (m, m-d) is the lower right corner of its quad; by the
    // symmetry CR(q1,q2,q3,q4) = CR(q3,q4,q1,q2) it is a fourth vertex.
    for d in 1..=2 * k {
        for m in -k + d..=k {
            let n = m - d;
            solve(
                &mut field,
                (m, n),
                [(m, n + 1), (m - 1, n + 1), (m - 1, n)],
                (m, n),
            );
        }
    }
    field.recount();
    field
}

/// Largest `|CR(G) - CR(p)| / |CR(p)|` over quads with four ok corners,
/// keyed by the lower right corner of the worst quad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditResult {
    pub max_defect: f64,
    pub worst: Option<(i64, i64)>,
    pub quads: usize,
}

pub fn quad_defect(field: &CRMapField, grid: &LatticeGrid, m: i64, n: i64) -> Option<f64> {
    let corners = [(m - 1, n), (m, n), (m, n + 1), (m - 1, n + 1)];
    let mut g = [C64::new(0.0, 0.0); 4];
    for (slot, &(a, b)) in g.iter_mut().zip(corners.iter()) {
        *slot = field.get(a, b)?;
    }
    let target = grid.quad_cross_ratio(m, n);
    match cross_ratio(g[0], g[1], g[2], g[3]) {
        Ok(cr) => Some((cr - target).norm() / target.abs()),
        Err(_) => Some(f64::INFINITY),
    }
}

pub fn cross_ratio_audit(field: &CRMapField, grid: &LatticeGrid) -> AuditResult {
    let k = field.half_width();
    let mut out = AuditResult {
        max_defect: 0.0,
        worst: None,
        quads: 0,
    };
    for n in -k..k {
        for m in -k + 1..=k {
            if let Some(d) = quad_defect(field, grid, m, n) {
                out.quads += 1;
                if d > out.max_defect || out.worst.is_none() {
                    out.max_defect = d;
                    out.worst = Some((m, n));
                }
            }
        }
    }
    out
}
