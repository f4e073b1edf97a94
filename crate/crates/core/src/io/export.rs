//! OBJ meshes and versioned CSV reports.

use std::collections::HashMap;
use std::io::Write;

use crate::analysis::{ErrorReport, OrderFit};
use crate::error::{Error, Result};
use crate::surface::DiscreteSurface;

fn io_err(e: std::io::Error) -> Error {
    Error::io("writing output", e)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io {
        context: "writing output".into(),
        message: e.to_string(),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the ok vertices of `surface` in row-major order and one
/// counter-clockwise face `(m,n), (m+1,n), (m+1,n+1), (m,n+1)` per quad
/// whose four corners are ok. Indices are 1-based.
pub fn write_obj<W: Write>(surface: &DiscreteSurface, mut out: W) -> Result<()> {
    let mut index = HashMap::new();
    for (m, n) in surface.cells() {
        if let Some(p) = surface.point(m, n) {
            index.insert((m, n), index.len() + 1);
            writeln!(out, "v {} {} {}", num(p.x), num(p.y), num(p.z)).map_err(io_err)?;
        }
    }
    for (m, n) in surface.cells() {
        let corners = [(m, n), (m + 1, n), (m + 1, n + 1), (m, n + 1)];
        let ids: Option<Vec<usize>> = corners.iter().map(|c| index.get(c).copied()).collect();
        if let Some(ids) = ids {
            writeln!(out, "f {} {} {} {}", ids[0], ids[1], ids[2], ids[3]).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

/// Writes a `# bjorling-<kind> v1` header followed by CSV rows.
fn write_table<W: Write>(kind: &str, header: &[&str], rows: &[Vec<String>], mut out: W) -> Result<()> {
    writeln!(out, "# bjorling-{kind} v1").map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_errors_csv<W: Write>(reports: &[ErrorReport], out: W) -> Result<()> {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row: Vec<String> = [
                r.eps, r.g_sup, r.g_mean, r.alpha_sup, r.beta_sup, r.f_sup, r.diagonal, r.vertex,
            ]
            .iter()
            .map(|&x| num(x))
            .collect();
            row.push(r.cells.to_string());
            row.push(r.masked.to_string());
            row
        })
        .collect();
    write_table(
        "errors",
        &["eps", "g_sup", "g_mean", "alpha_sup", "beta_sup", "f_sup", "diagonal", "vertex", "cells", "masked"],
        &rows,
        out,
    )
}

/// One row of the audit table.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub eps: f64,
    pub half_width: usize,
    pub ok: usize,
    pub divergent: usize,
    pub out_of_domain: usize,
    pub cross_ratio_defect: f64,
    pub closure_defect: f64,
    pub path_gap: f64,
    pub branch_jumps: usize,
}

pub fn write_audit_csv<W: Write>(rows: &[AuditRow], out: W) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.eps),
                r.half_width.to_string(),
                r.ok.to_string(),
                r.divergent.to_string(),
                r.out_of_domain.to_string(),
                num(r.cross_ratio_defect),
                num(r.closure_defect),
                num(r.path_gap),
                r.branch_jumps.to_string(),
            ]
        })
        .collect();
    write_table(
        "audit",
        &[
            "eps",
            "half_width",
            "ok",
            "divergent",
            "out_of_domain",
            "cross_ratio_defect",
            "closure_defect",
            "path_gap",
            "branch_jumps",
        ],
        &rows,
        out,
    )
}

/// Fitted orders; `slope` is empty when an error level underflowed and only ratios are meaningful.
pub fn write_orders_csv<W: Write>(fits: &[(&str, Option<OrderFit>, Vec<f64>)], out: W) -> Result<()> {
    let rows: Vec<Vec<String>> = fits
        .iter()
        .map(|(name, fit, errors)| {
            let ratios: Vec<String> = errors.windows(2).map(|w| num(w[0] / w[1])).collect();
            vec![
                name.to_string(),
                fit.as_ref().map(|f| num(f.slope)).unwrap_or_default(),
                ratios.join(";"),
            ]
        })
        .collect();
    write_table("orders", &["quantity", "slope", "ratios"], &rows, out)
}

pub fn write_metadata_csv<W: Write>(entries: &[(&str, String)], out: W) -> Result<()> {
    let rows: Vec<Vec<String>> = entries.iter().map(|(k, v)| vec![k.to_string(), v.clone()]).collect();
    write_table("meta", &["key", "value"], &rows, out)
}
