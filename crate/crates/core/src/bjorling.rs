//! Björling data: validation, recovery of `phi'^2` and the Gauss map, and
//! sampling of the reparametrization along the curve.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::moebius::{
    inverse_stereographic, inverse_stereographic_derivative, rho, C64, UnitVector3,
};

/// Derivatives along the curve at one parameter value: `g = [G, G', G'', G''']`
/// for the Gauss map `G0 = g o phi` and `phi_dot = [phi', phi'', phi''']`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeJet {
    pub g: [C64; 4],
    pub phi_dot: [C64; 3],
}

/// A curve with a unit normal field along it.
pub trait BjorlingData: Send + Sync {
    fn interval(&self) -> (f64, f64);
    fn position(&self, t: f64) -> Vector3<f64>;
    fn tangent(&self, t: f64) -> Vector3<f64>;
    fn normal(&self, t: f64) -> Vector3<f64>;
    fn normal_derivative(&self, t: f64) -> Vector3<f64>;

    /// Exact derivatives of `G0` and `phi` when the data comes from known
    /// holomorphic data. Sampled data returns `None`.
    fn analytic_jet(&self, _t: f64) -> Option<NodeJet> {
        None
    }
}

impl<T: BjorlingData + ?Sized> BjorlingData for &T {
    fn interval(&self) -> (f64, f64) {
        (**self).interval()
    }
    fn position(&self, t: f64) -> Vector3<f64> {
        (**self).position(t)
    }
    fn tangent(&self, t: f64) -> Vector3<f64> {
        (**self).tangent(t)
    }
    fn normal(&self, t: f64) -> Vector3<f64> {
        (**self).normal(t)
    }
    fn normal_derivative(&self, t: f64) -> Vector3<f64> {
        (**self).normal_derivative(t)
    }
    fn analytic_jet(&self, t: f64) -> Option<NodeJet> {
        (**self).analytic_jet(t)
    }
}

impl<T: BjorlingData + ?Sized> BjorlingData for Box<T> {
    fn interval(&self) -> (f64, f64) {
        (**self).interval()
    }
    fn position(&self, t: f64) -> Vector3<f64> {
        (**self).position(t)
    }
    fn tangent(&self, t: f64) -> Vector3<f64> {
        (**self).tangent(t)
    }
    fn normal(&self, t: f64) -> Vector3<f64> {
        (**self).normal(t)
    }
    fn normal_derivative(&self, t: f64) -> Vector3<f64> {
        (**self).normal_derivative(t)
    }
    fn analytic_jet(&self, t: f64) -> Option<NodeJet> {
        (**self).analytic_jet(t)
    }
}

/// Mirror image of Björling data under `y -> -y`.
///
/// Conjugates `phi'^2` and the Gauss map, so data whose curve runs through
/// the fourth quadrant of the `(u', v')` plane is mapped onto the first.
#[derive(Debug, Clone)]
pub struct Reflected<D>(pub D);

fn flip_y(v: Vector3<f64>) -> Vector3<f64> {
    Vector3::new(v.x, -v.y, v.z)
}

impl<D: BjorlingData> BjorlingData for Reflected<D> {
    fn interval(&self) -> (f64, f64) {
        self.0.interval()
    }
    fn position(&self, t: f64) -> Vector3<f64> {
        flip_y(self.0.position(t))
    }
    fn tangent(&self, t: f64) -> Vector3<f64> {
        flip_y(self.0.tangent(t))
    }
    fn normal(&self, t: f64) -> Vector3<f64> {
        flip_y(self.0.normal(t))
    }
    fn normal_derivative(&self, t: f64) -> Vector3<f64> {
        flip_y(self.0.normal_derivative(t))
    }
    fn analytic_jet(&self, t: f64) -> Option<NodeJet> {
        self.0.analytic_jet(t).map(|j| NodeJet {
            g: j.g.map(|z| z.conj()),
            phi_dot: j.phi_dot.map(|z| z.conj()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NonUnitNormal,
    NotOrthogonal,
    ZeroTangent,
    NonGeneric,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub t: f64,
    pub kind: ViolationKind,
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the hypotheses on Björling data at `n_samples` evenly spaced points.
pub fn validate<D: BjorlingData + ?Sized>(data: &D, n_samples: usize) -> ValidationReport {
    let n = n_samples.max(3);
    let (a, b) = data.interval();
    let mut report = ValidationReport {
        samples: n,
        violations: Vec::new(),
    };
    for index in 0..n {
        let t = a + (b - a) * index as f64 / (n - 1) as f64;
        let f = data.tangent(t);
        let nn = data.normal(t);
        let dn = data.normal_derivative(t);
        let mut push = |kind, value| {
            report.violations.push(Violation {
                index,
                t,
                kind,
                value,
            })
        };
        if !(f.iter().chain(nn.iter()).chain(dn.iter())).all(|x| x.is_finite()) {
            push(ViolationKind::NonFinite, f64::NAN);
            continue;
        }
        let unit = (nn.norm() - 1.0).abs();
        if unit > 1e-9 {
            push(ViolationKind::NonUnitNormal, unit);
        }
        let fl = f.norm();
        if fl <= 1e-300 {
            push(ViolationKind::ZeroTangent, fl);
            continue;
        }
        let dot = f.dot(&nn).abs();
        if dot > 1e-9 * fl {
            push(ViolationKind::NotOrthogonal, dot);
        }
        let cross = f.cross(&dn).norm();
        if cross <= 1e-10 * fl * dn.norm() || dn.norm() == 0.0 {
            push(ViolationKind::NonGeneric, cross);
        }
    }
    report
}

fn gauss_map<D: BjorlingData + ?Sized>(data: &D, t: f64) -> Result<(C64, C64)> {
    let n = UnitVector3::new_normalize(data.normal(t))?;
    let g = inverse_stereographic(&n)?;
    let dg = inverse_stereographic_derivative(&n, &data.normal_derivative(t))?;
    if dg.norm() < 1e-14 {
        return Err(Error::ZeroDerivative(format!("G0'(t) vanishes at t = {t}")));
    }
    Ok((g, dg))
}

fn residual(tangent: &Vector3<f64>, candidate: C64, g: C64, dg: C64) -> f64 {
    let r = rho(g);
    let w = candidate / dg;
    let model = Vector3::new((w * r[0]).re, (w * r[1]).re, (w * r[2]).re);
    (tangent - model).norm()
}

/// Unsigned magnitude data for `phi'^2`: `(<F', N'>, |F' x N'|)`.
fn angle_data<D: BjorlingData + ?Sized>(data: &D, t: f64) -> Result<(f64, f64)> {
    let f = data.tangent(t);
    let dn = data.normal_derivative(t);
    let cross = f.cross(&dn).norm();
    let scale = f.norm() * dn.norm();
    if !(cross > 1e-10 * scale) {
        return Err(Error::NonGeneric { t, cross });
    }
    Ok((f.dot(&dn), cross))
}

/// Picks the sign of `Im phi'^2` that reproduces `F0'` through the
/// Weierstrass relation `F0' = Re[(phi'^2 / G0') rho(G0)]`.
pub fn sign_resolution<D: BjorlingData + ?Sized>(data: &D, t: f64, candidate: C64) -> Result<C64> {
    let (g, dg) = gauss_map(data, t)?;
    let tangent = data.tangent(t);
    let plus = C64::new(candidate.re, candidate.im.abs());
    let minus = plus.conj();
    let rp = residual(&tangent, plus, g, dg);
    let rm = residual(&tangent, minus, g, dg);
    let bound = 1e-6 * tangent.norm();
    if rp.min(rm) > bound {
        return Err(Error::Ambiguous {
            t,
            plus: rp,
            minus: rm,
        });
    }
    Ok(if rp <= rm { plus } else { minus })
}

/// Both sign residuals, for diagnostics.
pub fn sign_residuals<D: BjorlingData + ?Sized>(data: &D, t: f64) -> Result<(f64, f64)> {
    let (dot, cross) = angle_data(data, t)?;
    let (g, dg) = gauss_map(data, t)?;
    let tangent = data.tangent(t);
    Ok((
        residual(&tangent, 0.5 * C64::new(dot, cross), g, dg),
        residual(&tangent, 0.5 * C64::new(dot, -cross), g, dg),
    ))
}

/// `phi'^2 = (<F0', N0'> + i s |F0' x N0'|) / 2` with the sign `s` resolved.
///
/// With `N = sigma(g)` and `F_u = Re[rho(g)/g']` one has `|F_u| |N_u| = 2`,
/// hence `|phi'^2| = |F0'| |N0'| / 2`.
pub fn phi_dot_squared<D: BjorlingData + ?Sized>(data: &D, t: f64) -> Result<C64> {
    let (dot, cross) = angle_data(data, t)?;
    sign_resolution(data, t, 0.5 * C64::new(dot, cross))
}

/// True if the data must be reflected to put `(u', v')` into the first quadrant at `t = 0`.
pub fn needs_reflection<D: BjorlingData + ?Sized>(data: &D) -> Result<bool> {
    let pd = phi_dot_squared(data, 0.0)?.sqrt();
    Ok(pd.im < 0.0)
}

/// How derivatives of `G0` and `phi'` beyond the first are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeRule {
    /// Use the data's analytic jet when available, else central differences.
    Auto { step: f64 },
    /// Always use central differences with the given step.
    CentralDifference { step: f64 },
}

impl Default for DerivativeRule {
    fn default() -> Self {
        DerivativeRule::Auto { step: 1e-3 }
    }
}

impl DerivativeRule {
    fn step(&self) -> f64 {
        match *self {
            DerivativeRule::Auto { step } | DerivativeRule::CentralDifference { step } => step,
        }
    }
}

fn principal_phi_dot<D: BjorlingData + ?Sized>(data: &D, t: f64) -> Result<C64> {
    Ok(phi_dot_squared(data, t)?.sqrt())
}

/// Evaluates the jet of `G0` and `phi'` at `t`.
pub fn node_jet<D: BjorlingData + ?Sized>(data: &D, t: f64, rule: DerivativeRule) -> Result<NodeJet> {
    let pd = principal_phi_dot(data, t)?;
    if let (DerivativeRule::Auto { .. }, Some(j)) = (rule, data.analytic_jet(t)) {
        // Align the orientation of phi with the principal root.
        let s = if (j.phi_dot[0] - pd).norm() <= (j.phi_dot[0] + pd).norm() {
            1.0
        } else {
            -1.0
        };
        return Ok(NodeJet {
            g: j.g,
            phi_dot: j.phi_dot.map(|z| z * s),
        });
    }
    let h = rule.step();
    let (g, dg) = gauss_map(data, t)?;
    let (_, dgp) = gauss_map(data, t + h)?;
    let (_, dgm) = gauss_map(data, t - h)?;
    let pp = principal_phi_dot(data, t + h)?;
    let pm = principal_phi_dot(data, t - h)?;
    Ok(NodeJet {
        g: [
            g,
            dg,
            (dgp - dgm) / (2.0 * h),
            (dgp - 2.0 * dg + dgm) / (h * h),
        ],
        phi_dot: [pd, (pp - pm) / (2.0 * h), (pp - 2.0 * pd + pm) / (h * h)],
    })
}

/// Samples of the reparametrization `phi = u + iv` at step `eps`.
///
/// Integer nodes `m eps` run over `-K..=K` and half nodes `(m + 1/2) eps`
/// over `-K..K`, where `K = half_width + 1`.
#[derive(Debug, Clone)]
pub struct ReparamCurve {
    pub eps: f64,
    pub half_width: usize,
    pub phi_dot_sq: Vec<C64>,
    pub phi: Vec<C64>,
    pub jet_int: Vec<NodeJet>,
    pub jet_half: Vec<NodeJet>,
}

impl ReparamCurve {
    /// Largest integer node index `K`.
    pub fn reach(&self) -> i64 {
        self.half_width as i64 + 1
    }

    fn int_index(&self, m: i64) -> usize {
        let k = self.reach();
        assert!(m.abs() <= k, "integer node {m} outside the curve window");
        (m + k) as usize
    }

    fn half_index(&self, m: i64) -> usize {
        let k = self.reach();
        assert!(m >= -k && m < k, "half node {m}+1/2 outside the curve window");
        (m + k) as usize
    }

    /// Jet at `m eps`.
    pub fn jet(&self, m: i64) -> &NodeJet {
        &self.jet_int[self.int_index(m)]
    }

    /// Jet at `(m + 1/2) eps`.
    pub fn jet_mid(&self, m: i64) -> &NodeJet {
        &self.jet_half[self.half_index(m)]
    }

    pub fn phi_at(&self, m: i64) -> C64 {
        self.phi[self.int_index(m)]
    }

    pub fn phi_dot_sq_at(&self, m: i64) -> C64 {
        self.phi_dot_sq[self.int_index(m)]
    }

    /// `u'((m + 1/2) eps)`.
    pub fn u_dot_mid(&self, m: i64) -> f64 {
        self.jet_mid(m).phi_dot[0].re
    }

    /// `v'((m + 1/2) eps)`.
    pub fn v_dot_mid(&self, m: i64) -> f64 {
        self.jet_mid(m).phi_dot[0].im
    }

    pub fn g0(&self, m: i64) -> C64 {
        self.jet(m).g[0]
    }

    pub fn g0_dot(&self, m: i64) -> C64 {
        self.jet(m).g[1]
    }
}

/// Samples `phi'`, `phi`, `G0` and their derivatives on the window
/// `[-(half_width + 1) eps, (half_width + 1) eps]`.
pub fn reparametrize<D: BjorlingData + ?Sized>(
    data: &D,
    eps: f64,
    half_width: usize,
    rule: DerivativeRule,
) -> Result<ReparamCurve> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("step must be positive, got {eps}")));
    }
    let k = half_width as i64 + 1;
    let reach = k as f64 * eps + rule.step();
    let (a, b) = data.interval();
    if a > -reach || b < reach {
        return Err(Error::DomainError(format!(
            "window [-{reach}, {reach}] not contained in the data interval [{a}, {b}]"
        )));
    }
    let check = |t: f64, pd: C64| -> Result<()> {
        if pd.re > 0.0 && pd.im > 0.0 {
            Ok(())
        } else {
            Err(Error::QuadrantViolation {
                t,
                re: pd.re,
                im: pd.im,
            })
        }
    };
    let mut jet_int = Vec::with_capacity(2 * k as usize + 1);
    let mut phi_dot_sq = Vec::with_capacity(2 * k as usize + 1);
    for m in -k..=k {
        let t = m as f64 * eps;
        let j = node_jet(data, t, rule)?;
        check(t, j.phi_dot[0])?;
        phi_dot_sq.push(phi_dot_squared(data, t)?);
        jet_int.push(j);
    }
    let mut jet_half = Vec::with_capacity(2 * k as usize);
    for m in -k..k {
        let t = (m as f64 + 0.5) * eps;
        let j = node_jet(data, t, rule)?;
        check(t, j.phi_dot[0])?;
        jet_half.push(j);
    }
    // Cumulative midpoint rule outward from phi(0) = 0.
    let mut phi = vec![C64::new(0.0, 0.0); 2 * k as usize + 1];
    let zero = k as usize;
    for m in 0..k as usize {
        phi[zero + m + 1] = phi[zero + m] + eps * jet_half[zero + m].phi_dot[0];
        phi[zero - m - 1] = phi[zero - m] - eps * jet_half[zero - m - 1].phi_dot[0];
    }
    Ok(ReparamCurve {
        eps,
        half_width,
        phi_dot_sq,
        phi,
        jet_int,
        jet_half,
    })
}
