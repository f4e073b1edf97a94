//! Cauchy data for the cross-ratio evolution on the zig-zag formed by the
//! diagonal `G_{m,m}` and the first off-diagonal `G_{m,m+1}`.

use crate::analytic::Holomorphic;
use crate::aux_evolution::AuxField;
use crate::bjorling::ReparamCurve;
use crate::error::{Error, Result};
use crate::lattice::LatticeGrid;
use crate::moebius::{C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    A,
    B,
    Exact,
}

impl std::str::FromStr for Provenance {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            "exact" => Ok(Self::Exact),
            _ => Err(format!("unknown construction '{s}' (expected A, B or exact)")),
        }
    }
}

/// A fourth root whose continuous branch crossed the principal cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchJump {
    pub m: i64,
    pub which: RootSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootSide {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
pub struct ZigzagData {
    pub eps: f64,
    /// Lattice half width `M`.
    pub m: usize,
    /// `G_{m,m}` for `m in -M..=M`.
    pub diag: Vec<C64>,
    /// `G_{m,m+1}` for `m in -M..M`.
    pub off: Vec<C64>,
    pub provenance: Provenance,
    pub branch_jumps: Vec<BranchJump>,
    /// Edge quotients along the zig-zag when the construction produces them:
    /// `alpha` on `(m, m + 1/2)` for `m in -M..M` and `beta` on `(m - 1/2, m)` for `m in -M+1..=M`.
    pub alpha: Option<Vec<C64>>,
    pub beta: Option<Vec<C64>>,
}

impl ZigzagData {
    pub fn half_width(&self) -> i64 {
        self.m as i64
    }

    pub fn diag_at(&self, m: i64) -> C64 {
        self.diag[(m + self.half_width()) as usize]
    }

    pub fn off_at(&self, m: i64) -> C64 {
        self.off[(m + self.half_width()) as usize]
    }

    /// Applies `f` to every value; used for equivariance checks.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            diag: self.diag.iter().map(|z| f(*z)).collect(),
            off: self.off.iter().map(|z| f(*z)).collect(),
            alpha: None,
            beta: None,
            ..self.clone()
        }
    }

    fn check(&self) -> Result<()> {
        let all = self.diag.iter().chain(self.off.iter());
        if !all.clone().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("zig-zag values"));
        }
        for w in self.diag.windows(2) {
            if (w[1] - w[0]).norm() == 0.0 {
                return Err(Error::DegenerateQuad("repeated diagonal value".into()));
            }
        }
        Ok(())
    }
}

/// The four fourth roots of `z`.
fn fourth_roots(z: C64) -> [C64; 4] {
    let r = z.norm().powf(0.25);
    let a = z.arg() / 4.0;
    let step = std::f64::consts::FRAC_PI_2;
    [0, 1, 2, 3].map(|k| C64::from_polar(r, a + step * k as f64))
}

fn closest(roots: [C64; 4], target: C64) -> C64 {
    roots
        .into_iter()
        .min_by(|x, y| (x - target).norm().total_cmp(&(y - target).norm()))
        .unwrap()
}

/// `(u' G_m A+ + i v' G_{m+1} A-) / (u' A+ + i v' A-)`.
pub fn extrapolate_off_diagonal(u_dot: f64, v_dot: f64, g0: C64, g1: C64, a_plus: C64, a_minus: C64) -> C64 {
    (u_dot * g0 * a_plus + I * v_dot * g1 * a_minus) / (u_dot * a_plus + I * v_dot * a_minus)
}

/// Construction A: the diagonal is read off from `G0`, the off-diagonal is
/// extrapolated with fourth roots of `phi'^2 G0'^2` tracked by continuity.
pub fn init_zigzag_a(curve: &ReparamCurve, m: usize) -> Result<ZigzagData> {
    if m > curve.half_width {
        return Err(Error::InvalidInput("zig-zag wider than the curve".into()));
    }
    let k = m as i64;
    for i in -k..=k {
        if curve.g0_dot(i).norm() < 1e-14 {
            return Err(Error::ZeroDerivative(format!("G0' vanishes at node {i}")));
        }
    }
    let base_plus = |i: i64| curve.phi_dot_sq_at(i) * curve.g0_dot(i + 1).powi(2);
    let base_minus = |i: i64| curve.phi_dot_sq_at(i + 1) * curve.g0_dot(i).powi(2);
    let n = 2 * m;
    let mut plus = vec![C64::new(0.0, 0.0); n];
    let mut minus = vec![C64::new(0.0, 0.0); n];
    let idx = |i: i64| (i + k) as usize;
    let mut jumps = Vec::new();
    if k > 0 {
        let a0 = fourth_roots(base_minus(0))[0];
        minus[idx(0)] = a0;
        plus[idx(0)] = closest(fourth_roots(base_plus(0)), a0);
        // March outward from m = 0, each root following its predecessor.
        let order = (1..k).map(|i| (i, i - 1)).chain((-k..0).rev().map(|i| (i, i + 1)));
        for (i, p) in order {
            for side in [RootSide::Minus, RootSide::Plus] {
                let (vals, base, prev_base) = match side {
                    RootSide::Minus => (&mut minus, base_minus(i), base_minus(p)),
                    RootSide::Plus => (&mut plus, base_plus(i), base_plus(p)),
                };
                vals[idx(i)] = closest(fourth_roots(base), vals[idx(p)]);
                if (base.arg() - prev_base.arg()).abs() > std::f64::consts::PI {
                    jumps.push(BranchJump { m: i, which: side });
                }
            }
        }
    }
    let diag: Vec<C64> = (-k..=k).map(|i| curve.g0(i)).collect();
    let off: Vec<C64> = (-k..k)
        .map(|i| {
            extrapolate_off_diagonal(
                curve.u_dot_mid(i),
                curve.v_dot_mid(i),
                curve.g0(i),
                curve.g0(i + 1),
                plus[idx(i)],
                minus[idx(i)],
            )
        })
        .collect();
    let z = ZigzagData {
        eps: curve.eps,
        m,
        diag,
        off,
        provenance: Provenance::A,
        branch_jumps: jumps,
        alpha: None,
        beta: None,
    };
    z.check()?;
    Ok(z)
}

/// Which second value `G_{0,1}` construction B starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SecondValue {
    /// `G00 + i dv g' + (i dv)^2 g''/2` with the lattice step `dv = v_1 - v_0`.
    #[default]
    LatticeStep,
    /// `G00 + i eps v'(0) g' + (i eps v'(0))^2 g''/2 + i eps^2 v''(0) g'/2`.
    Taylor,
}

/// Base point data of construction B: `G_{0,0}`, `g'(phi(0))`, `g''(phi(0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseValues {
    pub g00: C64,
    pub g1: C64,
    pub g2: C64,
}

impl BaseValues {
    /// Estimates `g'` and `g''` at the base point from `G0' = g'(phi) phi'`.
    pub fn from_curve(curve: &ReparamCurve) -> Result<Self> {
        let j = curve.jet(0);
        let [g0, dg, ddg, _] = j.g;
        let [p1, p2, _] = j.phi_dot;
        if p1.norm() < 1e-14 {
            return Err(Error::ZeroDerivative("phi' vanishes at the base point".into()));
        }
        let g1 = dg / p1;
        let g2 = (ddg / p1 - dg * p2 / (p1 * p1)) / p1;
        Ok(Self { g00: g0, g1, g2 })
    }
}

/// Construction B: integrates the edge quotients along the zig-zag from
/// the two base values and the initial rows of `F`.
pub fn init_zigzag_b(
    curve: &ReparamCurve,
    grid: &LatticeGrid,
    base: BaseValues,
    rows: &AuxField,
    second: SecondValue,
    cap: f64,
) -> Result<ZigzagData> {
    let k = grid.half_width();
    let eps = grid.eps;
    let dv0 = grid.dv(0);
    if dv0.abs() < 1e-14 {
        return Err(Error::ZeroEdge(format!("v(eps) - v(0) = {dv0}")));
    }
    let g01 = match second {
        SecondValue::LatticeStep => {
            let h = I * dv0;
            base.g00 + h * base.g1 + 0.5 * h * h * base.g2
        }
        SecondValue::Taylor => {
            let j = curve.jet(0);
            let (v1, v2) = (j.phi_dot[0].im, j.phi_dot[1].im);
            let h = I * eps * v1;
            base.g00 + h * base.g1 + 0.5 * h * h * base.g2 + 0.5 * I * eps * eps * v2 * base.g1
        }
    };
    let row = |j: i64, kk: i64| -> Result<C64> {
        rows.get(j, kk)
            .ok_or_else(|| Error::OutOfDomain(format!("initial row node ({j}, {kk}) missing")))
    };
    let n = (2 * k + 1) as usize;
    let idx = |i: i64| (i + k) as usize;
    let mut diag = vec![C64::new(0.0, 0.0); n];
    let mut off = vec![C64::new(0.0, 0.0); n - 1];
    let mut alpha = vec![C64::new(0.0, 0.0); n - 1];
    let mut beta = vec![C64::new(0.0, 0.0); n];
    let guard = |z: C64, what: &str| -> Result<C64> {
        if z.norm() > cap || !z.re.is_finite() || !z.im.is_finite() {
            Err(Error::BlowUp {
                cap,
                location: what.to_string(),
            })
        } else {
            Ok(z)
        }
    };
    diag[idx(0)] = base.g00;
    if k > 0 {
        off[idx(0)] = g01;
        alpha[idx(0)] = (g01 - base.g00) / (I * dv0);
    }
    // Forward: beta_{m-1/2,m} = alpha_{m-1} e^{-eps F0}, alpha_m = beta e^{-eps F1}.
    for i in 1..=k {
        let b = guard(alpha[idx(i - 1)] * (-eps * row(2 * i - 1, 0)?).exp(), "beta")?;
        beta[idx(i)] = b;
        diag[idx(i)] = off[idx(i - 1)] + grid.du(i) * b;
        if i < k {
            let a = guard(b * (-eps * row(2 * i, 1)?).exp(), "alpha")?;
            alpha[idx(i)] = a;
            off[idx(i)] = diag[idx(i)] + I * grid.dv(i) * a;
        }
    }
    // Backward: invert the same relations.
    for i in (-k + 1..=0).rev() {
        let b = guard(alpha[idx(i)] * (eps * row(2 * i, 1)?).exp(), "beta")?;
        beta[idx(i)] = b;
        off[idx(i - 1)] = diag[idx(i)] - grid.du(i) * b;
        let a = guard(b * (eps * row(2 * i - 1, 0)?).exp(), "alpha")?;
        alpha[idx(i - 1)] = a;
        diag[idx(i - 1)] = off[idx(i - 1)] - I * grid.dv(i - 1) * a;
    }
    beta.remove(0);
    let z = ZigzagData {
        eps,
        m: k as usize,
        diag,
        off,
        provenance: Provenance::B,
        branch_jumps: Vec::new(),
        alpha: Some(alpha),
        beta: Some(beta),
    };
    z.check()?;
    Ok(z)
}

/// Exact data `g(p)` on the zig-zag.
pub fn init_zigzag_exact(g: &dyn Holomorphic, grid: &LatticeGrid) -> ZigzagData {
    let k = grid.half_width();
    ZigzagData {
        eps: grid.eps,
        m: k as usize,
        diag: (-k..=k).map(|i| g.value(grid.p(i, i))).collect(),
        off: (-k..k).map(|i| g.value(grid.p(i, i + 1))).collect(),
        provenance: Provenance::Exact,
        branch_jumps: Vec::new(),
        alpha: None,
        beta: None,
    }
}
