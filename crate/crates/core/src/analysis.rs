//! Running the pipeline at one or several mesh sizes, measuring errors
//! against smooth references and fitting convergence orders.

use nalgebra::Vector3;

use crate::analytic::{AnalyticCurve, Holomorphic};
use crate::aux_evolution::{
    evolve_f, initial_rows, initial_rows_exact_g, project_to_faces, AuxField, FaceField, InitVariant, DEFAULT_CAP,
};
use crate::bjorling::{reparametrize, BjorlingData, DerivativeRule, ReparamCurve};
use crate::cr_evolve::{cross_ratio_audit, evolve_with, AuditResult, CRMapField, CrOptions, QSource};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, coefficients, LatticeGrid};
use crate::moebius::I;
use crate::surface::{integrate_surface, path_independence, DiscreteSurface, SmoothReference, SpanningTree};
use crate::zigzag::{init_zigzag_a, init_zigzag_b, init_zigzag_exact, BaseValues, Provenance, SecondValue, ZigzagData};

/// Where the target cross-ratio of each quad comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QRule {
    #[default]
    Lattice,
    Derivatives,
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    pub eps: f64,
    pub half_width: usize,
    pub construction: Provenance,
    pub init_variant: InitVariant,
    pub second_value: SecondValue,
    pub q_rule: QRule,
    pub cap: f64,
    /// Mask cells whose face ratio leaves the strip `|arg Q| <= pi/4`.
    pub strip: bool,
    pub rule: DerivativeRule,
}

impl PipelineOptions {
    pub fn new(eps: f64, half_width: usize, construction: Provenance) -> Self {
        Self {
            eps,
            half_width,
            construction,
            init_variant: InitVariant::Standard,
            second_value: SecondValue::default(),
            q_rule: QRule::default(),
            cap: DEFAULT_CAP,
            strip: true,
            rule: DerivativeRule::default(),
        }
    }
}

/// Everything produced by one pipeline run.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub options: PipelineOptions,
    pub curve: ReparamCurve,
    pub grid: LatticeGrid,
    pub rows: AuxField,
    /// `F^eps` on the faces of the window.
    pub faces: FaceField,
    pub zigzag: ZigzagData,
    pub field: CRMapField,
    pub audit: AuditResult,
    pub surface: DiscreteSurface,
    /// Relative gap between the column and row spanning-tree integrations.
    pub path_gap: f64,
}

/// Runs the full pipeline. `g` is required by the exact construction and
/// the exact-g initial rows only.
pub fn run_pipeline(data: &dyn BjorlingData, g: Option<&dyn Holomorphic>, opts: PipelineOptions) -> Result<LevelRun> {
    if opts.half_width < 2 {
        return Err(Error::InvalidInput(format!("half width must be at least 2, got {}", opts.half_width)));
    }
    let need_g = || g.ok_or_else(|| Error::InvalidInput("this option needs an exact g".into()));
    let curve = reparametrize(data, opts.eps, opts.half_width, opts.rule)?;
    let grid = build_lattice(&curve, opts.half_width)?;
    let m = grid.half_width();
    let rows = match opts.init_variant {
        InitVariant::ExactG => initial_rows_exact_g(&grid, need_g()?)?,
        v => initial_rows(&curve, opts.half_width, v)?,
    };
    let f = evolve_f(&rows, &coefficients(&grid, &curve), opts.cap)?;
    let faces = project_to_faces(&f, m)?;
    let zigzag = match opts.construction {
        Provenance::A => init_zigzag_a(&curve, opts.half_width)?,
        Provenance::B => init_zigzag_b(
            &curve,
            &grid,
            BaseValues::from_curve(&curve)?,
            &rows,
            opts.second_value,
            opts.cap,
        )?,
        Provenance::Exact => init_zigzag_exact(need_g()?, &grid),
    };
    let cr = CrOptions {
        cap: opts.cap,
        strip: opts.strip,
        ..CrOptions::default()
    };
    let source = match opts.q_rule {
        QRule::Lattice => QSource::Lattice,
        QRule::Derivatives => QSource::Derivatives(&curve),
    };
    let field = evolve_with(&zigzag, &grid, &cr, source);
    let audit = cross_ratio_audit(&field, &grid);
    let anchor = data.position(0.0);
    let surface = integrate_surface(&field, &grid, anchor, SpanningTree::ZigzagColumns)?;
    let rows_tree = integrate_surface(&field, &grid, anchor, SpanningTree::ZigzagRows)?;
    let path_gap = path_independence(&surface, &rows_tree);
    Ok(LevelRun {
        options: opts,
        curve,
        grid,
        rows,
        faces,
        zigzag,
        field,
        audit,
        surface,
        path_gap,
    })
}

/// Runs one pipeline per step size on separate threads; results keep the input order.
pub fn run_levels(
    data: &dyn BjorlingData,
    g: Option<&dyn Holomorphic>,
    levels: &[PipelineOptions],
) -> Vec<Result<LevelRun>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&o| s.spawn(move || run_pipeline(data, g, o)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("pipeline thread panicked"))
            .collect()
    })
}

/// Cells of a lattice window selected for error measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub m: i64,
    mask: Vec<bool>,
}

impl Domain {
    pub fn new(m: i64) -> Self {
        let side = (2 * m + 1) as usize;
        Self {
            m,
            mask: vec![false; side * side],
        }
    }

    fn idx(&self, a: i64, b: i64) -> Option<usize> {
        (a.abs() <= self.m && b.abs() <= self.m).then(|| ((b + self.m) * (2 * self.m + 1) + (a + self.m)) as usize)
    }

    pub fn contains(&self, a: i64, b: i64) -> bool {
        self.idx(a, b).is_some_and(|i| self.mask[i])
    }

    pub fn insert(&mut self, a: i64, b: i64) {
        if let Some(i) = self.idx(a, b) {
            self.mask[i] = true;
        }
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let k = self.m;
        (-k..=k)
            .flat_map(move |b| (-k..=k).map(move |a| (a, b)))
            .filter(|&(a, b)| self.contains(a, b))
    }
}

/// Index half width covering the `(xi, eta)`-radius `radius` at step `eps`.
pub fn index_radius(radius: f64, eps: f64) -> i64 {
    (radius / eps + 1e-9).floor() as i64
}

/// Ok cells of one field within a radius.
pub fn ok_domain(field: &CRMapField, eps: f64, radius: f64) -> Domain {
    let r = index_radius(radius, eps).min(field.half_width());
    let mut d = Domain::new(field.half_width());
    for b in -r..=r {
        for a in -r..=r {
            if field.get(a, b).is_some() {
                d.insert(a, b);
            }
        }
    }
    d
}

/// Per-level domains restricted to the region that is ok at every level.
///
/// The steps must be `eps_0 / s` for integer `s`. A coarse cell is common when
/// its co-located cell is ok at every level; a cell at a finer level is kept
/// when it is ok and its nearest coarse cell is common.
pub fn common_domains(fields: &[(&CRMapField, f64)], radius: f64) -> Result<Vec<Domain>> {
    let Some(&(coarse, eps0)) = fields.first() else {
        return Err(Error::InvalidInput("no levels".into()));
    };
    let scales: Vec<i64> = fields
        .iter()
        .map(|&(_, e)| {
            let s = eps0 / e;
            if (s - s.round()).abs() > 1e-9 || s < 1.0 {
                Err(Error::InvalidInput(format!("step {e} does not divide {eps0}")))
            } else {
                Ok(s.round() as i64)
            }
        })
        .collect::<Result<_>>()?;
    let r0 = index_radius(radius, eps0).min(coarse.half_width());
    let mut common = Domain::new(coarse.half_width());
    for b in -r0..=r0 {
        for a in -r0..=r0 {
            if fields.iter().zip(&scales).all(|(&(f, _), &s)| f.get(s * a, s * b).is_some()) {
                common.insert(a, b);
            }
        }
    }
    let mut out = Vec::with_capacity(fields.len());
    for (&(f, _), &s) in fields.iter().zip(&scales) {
        let r = (r0 * s).min(f.half_width());
        let mut d = Domain::new(f.half_width());
        let near = |x: i64| (x as f64 / s as f64).round() as i64;
        for b in -r..=r {
            for a in -r..=r {
                if f.get(a, b).is_some() && common.contains(near(a), near(b)) {
                    d.insert(a, b);
                }
            }
        }
        out.push(d);
    }
    Ok(out)
}

/// The smooth solution a run is compared with.
pub struct Reference<'a> {
    pub g: &'a dyn Holomorphic,
    pub phi: &'a dyn AnalyticCurve,
    pub data: &'a dyn BjorlingData,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub eps: f64,
    /// `sup |G - g(p)|` and its mean over the domain.
    pub g_sup: f64,
    pub g_mean: f64,
    /// `sup |alpha - g'|` and `sup |beta - g'|` at edge midpoints.
    pub alpha_sup: f64,
    pub beta_sup: f64,
    /// `sup |F^eps - f|` over faces with all corners in the domain.
    pub f_sup: f64,
    /// `max_m |F_{m,m} - F0(m eps)|`.
    pub diagonal: f64,
    /// `sup |F_{m,n} - F(p_{m,n})|`.
    pub vertex: f64,
    pub cells: usize,
    /// Cells of the window that are not ok.
    pub masked: usize,
}

impl ErrorReport {
    pub fn edge_sup(&self) -> f64 {
        self.alpha_sup.max(self.beta_sup)
    }
}

/// Errors of `run` against `reference` over `domain`.
pub fn error_report(run: &LevelRun, reference: &Reference<'_>, domain: &Domain) -> Result<ErrorReport> {
    if domain.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let grid = &run.grid;
    let field = &run.field;
    let g = reference.g;
    let smooth = SmoothReference::anchored(g, run.surface.anchor.1);
    let mut r = ErrorReport {
        eps: grid.eps,
        cells: domain.len(),
        masked: run.field.stats.divergent + run.field.stats.out_of_domain,
        ..Default::default()
    };
    let mut total = 0.0;
    for (a, b) in domain.cells() {
        let p = grid.p(a, b);
        let gv = field.get(a, b).ok_or(Error::EmptyDomain)?;
        let e = (gv - g.value(p)).norm();
        r.g_sup = r.g_sup.max(e);
        total += e;
        if domain.contains(a, b + 1) {
            let (p1, g1) = (grid.p(a, b + 1), field.get(a, b + 1).ok_or(Error::EmptyDomain)?);
            let alpha = (g1 - gv) / (I * grid.dv(b));
            r.alpha_sup = r.alpha_sup.max((alpha - g.d1(0.5 * (p + p1))).norm());
        }
        if domain.contains(a - 1, b) {
            let (p0, g0) = (grid.p(a - 1, b), field.get(a - 1, b).ok_or(Error::EmptyDomain)?);
            let beta = (gv - g0) / grid.du(a);
            r.beta_sup = r.beta_sup.max((beta - g.d1(0.5 * (p + p0))).norm());
        }
        if [(a - 1, b), (a - 1, b + 1), (a, b + 1)].iter().all(|&(x, y)| domain.contains(x, y)) {
            if let Some(fe) = run.faces.get(a, b) {
                let eps = grid.eps;
                let (xi, eta) = ((a + b) as f64 * eps / 2.0, (b - a + 1) as f64 * eps / 2.0);
                let fr = crate::aux_evolution::f_reference(g, reference.phi, xi, eta)?;
                r.f_sup = r.f_sup.max((fe - fr).norm());
            }
        }
        if let Some(x) = run.surface.point(a, b) {
            r.vertex = r.vertex.max((x - smooth.point(p)).norm());
            if a == b {
                let y: Vector3<f64> = reference.data.position(a as f64 * grid.eps);
                r.diagonal = r.diagonal.max((x - y).norm());
            }
        }
    }
    r.g_mean = total / r.cells as f64;
    Ok(r)
}

/// Least-squares slope of `log error` against `log eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub eps: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    /// `errors[i] / errors[i + 1]`.
    pub ratios: Vec<f64>,
}

pub fn order_fit(eps: &[f64], errors: &[f64]) -> Result<OrderFit> {
    if eps.len() < 2 || eps.len() != errors.len() {
        return Err(Error::InvalidInput("need at least two levels with one error each".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("steps must be positive and strictly decreasing".into()));
    }
    if let Some(index) = errors.iter().position(|&e| !(e >= f64::MIN_POSITIVE) || !e.is_finite()) {
        return Err(Error::ZeroError { index });
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(OrderFit {
        eps: eps.to_vec(),
        errors: errors.to_vec(),
        slope: sxy / sxx,
        ratios: errors.windows(2).map(|w| w[0] / w[1]).collect(),
    })
}

/// `sup |G_A - G_B|` over a domain.
pub fn field_gap(a: &CRMapField, b: &CRMapField, domain: &Domain) -> f64 {
    domain
        .cells()
        .filter_map(|(m, n)| Some((a.get(m, n)? - b.get(m, n)?).norm()))
        .fold(0.0, f64::max)
}
