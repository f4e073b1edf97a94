//! Sampled Björling data in the `bjorling-csv v1` format.
//!
//! ```text
//! # bjorling-csv v1
//! t,F0x,F0y,F0z,N0x,N0y,N0z[,dF0x,dF0y,dF0z,dN0x,dN0y,dN0z]
//! ```
//!
//! Samples must be uniformly spaced in `t`. Between samples the curve and
//! normal are cubic Hermite interpolants: slopes come from the derivative
//! columns when present and from a natural cubic spline otherwise.

use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use crate::bjorling::BjorlingData;
use crate::error::{Error, Result};

pub const CSV_MAGIC: &str = "# bjorling-csv v";
pub const CSV_MAJOR: u32 = 1;

const BASE_COLUMNS: [&str; 7] = ["t", "F0x", "F0y", "F0z", "N0x", "N0y", "N0z"];
const DERIVATIVE_COLUMNS: [&str; 6] = ["dF0x", "dF0y", "dF0z", "dN0x", "dN0y", "dN0z"];

/// Relative tolerance on the sample spacing.
pub const SPACING_TOL: f64 = 1e-9;

/// Piecewise cubic Hermite interpolant of vector samples on a uniform grid.
#[derive(Debug, Clone)]
struct Hermite {
    t0: f64,
    h: f64,
    y: Vec<Vector3<f64>>,
    s: Vec<Vector3<f64>>,
}

impl Hermite {
    /// Slopes of the natural cubic spline through `y`.
    fn natural(t0: f64, h: f64, y: Vec<Vector3<f64>>) -> Self {
        let n = y.len();
        // s[i-1] + 4 s[i] + s[i+1] = 3 (y[i+1] - y[i-1]) / h, with 2 s + s' = 3 dy / h at both ends.
        let mut diag = vec![4.0; n];
        let mut rhs: Vec<Vector3<f64>> = (0..n)
            .map(|i| {
                if i == 0 {
                    (y[1] - y[0]) * (3.0 / h)
                } else if i == n - 1 {
                    (y[n - 1] - y[n - 2]) * (3.0 / h)
                } else {
                    (y[i + 1] - y[i - 1]) * (3.0 / h)
                }
            })
            .collect();
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        for i in 1..n {
            let w = 1.0 / diag[i - 1];
            diag[i] -= w;
            let r = rhs[i - 1] * w;
            rhs[i] -= r;
        }
        let mut s = vec![Vector3::zeros(); n];
        s[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            s[i] = (rhs[i] - s[i + 1]) / diag[i];
        }
        Self { t0, h, y, s }
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let x = (t - self.t0) / self.h;
        let i = (x.floor().max(0.0) as usize).min(self.y.len() - 2);
        (i, x - i as f64)
    }

    fn value(&self, t: f64) -> Vector3<f64> {
        let (i, u) = self.segment(t);
        let (u2, u3) = (u * u, u * u * u);
        self.y[i] * (2.0 * u3 - 3.0 * u2 + 1.0)
            + self.s[i] * (self.h * (u3 - 2.0 * u2 + u))
            + self.y[i + 1] * (3.0 * u2 - 2.0 * u3)
            + self.s[i + 1] * (self.h * (u3 - u2))
    }

    fn derivative(&self, t: f64) -> Vector3<f64> {
        let (i, u) = self.segment(t);
        let u2 = u * u;
        (self.y[i + 1] - self.y[i]) * ((6.0 * u - 6.0 * u2) / self.h)
            + self.s[i] * (3.0 * u2 - 4.0 * u + 1.0)
            + self.s[i + 1] * (3.0 * u2 - 2.0 * u)
    }
}

/// Curve tangents and normal derivatives at the samples.
pub type SampleDerivatives = (Vec<Vector3<f64>>, Vec<Vector3<f64>>);

/// Björling data interpolated from uniformly spaced samples.
#[derive(Debug, Clone)]
pub struct SampledData {
    curve: Hermite,
    normal: Hermite,
    has_derivatives: bool,
}

impl SampledData {
    /// Builds the interpolant from samples at `t0 + i step`.
    pub fn new(
        t0: f64,
        step: f64,
        position: Vec<Vector3<f64>>,
        normal: Vec<Vector3<f64>>,
        derivatives: Option<SampleDerivatives>,
    ) -> Result<Self> {
        let n = position.len();
        if n < 4 || normal.len() != n {
            return Err(Error::Format(format!("need at least 4 samples of matching length, got {n}")));
        }
        if !(step > 0.0) {
            return Err(Error::Format(format!("sample step must be positive, got {step}")));
        }
        if let Some(i) = normal.iter().position(|v| !(v.norm() > 0.5)) {
            return Err(Error::Format(format!("normal of sample {i} is not a unit vector")));
        }
        let has_derivatives = derivatives.is_some();
        let (curve, normal) = match derivatives {
            Some((df, dn)) => {
                if df.len() != n || dn.len() != n {
                    return Err(Error::Format("derivative columns do not match the samples".into()));
                }
                (
                    Hermite { t0, h: step, y: position, s: df },
                    Hermite { t0, h: step, y: normal, s: dn },
                )
            }
            None => (Hermite::natural(t0, step, position), Hermite::natural(t0, step, normal)),
        };
        Ok(Self {
            curve,
            normal,
            has_derivatives,
        })
    }

    pub fn step(&self) -> f64 {
        self.curve.h
    }

    pub fn samples(&self) -> usize {
        self.curve.y.len()
    }

    pub fn has_derivatives(&self) -> bool {
        self.has_derivatives
    }

    /// Rejects sampling coarser than `eps / 4`.
    pub fn check_resolution(&self, eps: f64) -> Result<()> {
        let required = eps / 4.0;
        if self.step() > required * (1.0 + SPACING_TOL) {
            return Err(Error::Resolution {
                step: self.step(),
                required,
            });
        }
        Ok(())
    }
}

impl BjorlingData for SampledData {
    fn interval(&self) -> (f64, f64) {
        let c = &self.curve;
        (c.t0, c.t0 + c.h * (c.y.len() - 1) as f64)
    }
    fn position(&self, t: f64) -> Vector3<f64> {
        self.curve.value(t)
    }
    fn tangent(&self, t: f64) -> Vector3<f64> {
        self.curve.derivative(t)
    }
    fn normal(&self, t: f64) -> Vector3<f64> {
        self.normal.value(t).normalize()
    }
    fn normal_derivative(&self, t: f64) -> Vector3<f64> {
        let n = self.normal.value(t);
        let dn = self.normal.derivative(t);
        let r = n.norm();
        (dn - n * (n.dot(&dn) / (r * r))) / r
    }
}

fn check_version(first: Option<&str>) -> Result<()> {
    let line = first.map(str::trim).unwrap_or("");
    let Some(version) = line.strip_prefix(CSV_MAGIC) else {
        return Err(Error::Format(format!("missing '{CSV_MAGIC}{CSV_MAJOR}' header line")));
    };
    let major = version.split('.').next().unwrap_or("");
    match major.parse::<u32>() {
        Ok(CSV_MAJOR) => Ok(()),
        Ok(v) => Err(Error::Format(format!("unsupported bjorling-csv major version {v}"))),
        Err(_) => Err(Error::Format(format!("malformed version '{version}'"))),
    }
}

/// Parses `bjorling-csv v1` text.
pub fn parse_samples(text: &str) -> Result<SampledData> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    check_version(Some(first))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let with_derivatives = match names.len() {
        7 => false,
        13 => true,
        k => return Err(Error::Format(format!("expected 7 or 13 columns, got {k}"))),
    };
    let expected: Vec<&str> = BASE_COLUMNS
        .iter()
        .chain(DERIVATIVE_COLUMNS.iter().take(if with_derivatives { 6 } else { 0 }))
        .copied()
        .collect();
    if names != expected {
        return Err(Error::Format(format!("unexpected columns {names:?}, expected {expected:?}")));
    }
    let mut t = Vec::new();
    let (mut f, mut nrm, mut df, mut dn) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        let row = record
            .iter()
            .map(|x| x.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Format(format!("sample {i}: {e}")))?;
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format(format!("sample {i} contains a non-finite value")));
        }
        let v = |k: usize| Vector3::new(row[k], row[k + 1], row[k + 2]);
        t.push(row[0]);
        f.push(v(1));
        nrm.push(v(4));
        if with_derivatives {
            df.push(v(7));
            dn.push(v(10));
        }
    }
    if t.len() < 4 {
        return Err(Error::Format(format!("need at least 4 samples, got {}", t.len())));
    }
    if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Format(format!(
            "t is not strictly increasing at sample {} ({} after {})",
            i + 1,
            t[i + 1],
            t[i]
        )));
    }
    let n = t.len();
    let step = (t[n - 1] - t[0]) / (n - 1) as f64;
    if let Some(i) = (0..n).find(|&i| (t[i] - (t[0] + i as f64 * step)).abs() > SPACING_TOL * step.max(1.0)) {
        return Err(Error::Format(format!("samples are not uniformly spaced (sample {i}, t = {})", t[i])));
    }
    if !(t[0] <= 0.0 && t[n - 1] >= 0.0) {
        return Err(Error::Format(format!("sample range [{}, {}] must contain t = 0", t[0], t[n - 1])));
    }
    SampledData::new(t[0], step, f, nrm, with_derivatives.then_some((df, dn)))
}

/// Reads a sample file and checks that it resolves step `eps`.
pub fn ingest_samples(path: &Path, eps: f64) -> Result<SampledData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let data = parse_samples(&text)?;
    data.check_resolution(eps)?;
    Ok(data)
}

/// Writes `count` samples of `data` starting at `t0`.
pub fn write_samples<W: Write>(
    data: &dyn BjorlingData,
    t0: f64,
    step: f64,
    count: usize,
    with_derivatives: bool,
    out: W,
) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        context: "writing samples".into(),
        message: e.to_string(),
    };
    let mut out = out;
    writeln!(out, "{CSV_MAGIC}{CSV_MAJOR}").map_err(|e| Error::io("writing samples", e))?;
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = BASE_COLUMNS
        .iter()
        .chain(DERIVATIVE_COLUMNS.iter().take(if with_derivatives { 6 } else { 0 }))
        .copied()
        .collect();
    w.write_record(&header).map_err(io)?;
    for i in 0..count {
        let t = t0 + i as f64 * step;
        let mut row = vec![t];
        row.extend(data.position(t).iter());
        row.extend(data.normal(t).iter());
        if with_derivatives {
            row.extend(data.tangent(t).iter());
            row.extend(data.normal_derivative(t).iter());
        }
        w.write_record(row.iter().map(|x| format!("{x:.16e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("writing samples", e))
}

/// Samples `data` on `[-half_range, half_range]` with the given step and writes a file.
pub fn export_samples(
    path: &Path,
    data: &dyn BjorlingData,
    half_range: f64,
    step: f64,
    with_derivatives: bool,
) -> Result<()> {
    let k = (half_range / step).round() as usize;
    let file = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    write_samples(
        data,
        -(k as f64) * step,
        step,
        2 * k + 1,
        with_derivatives,
        std::io::BufWriter::new(file),
    )
}
