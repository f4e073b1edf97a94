//! Runs a configured scenario end to end and writes its outputs.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::analysis::{common_domains, error_report, order_fit, run_levels, ErrorReport, LevelRun, OrderFit, PipelineOptions};
use crate::bjorling::DerivativeRule;
use crate::error::{Error, Result};
use crate::io::config::{ScenarioConfig, ScenarioSource};
use crate::io::export::{write_audit_csv, write_errors_csv, write_metadata_csv, write_obj, write_orders_csv, AuditRow};
use crate::io::ingest::ingest_samples;
use crate::io::scenario::{builtin, Scenario};

/// Process exit code for an error: 2 for an empty evaluation domain, 3 for
/// invalid input or configuration, 1 for I/O and numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::EmptyDomain => 2,
        Error::Parse { .. }
        | Error::Constraint(_)
        | Error::Format(_)
        | Error::Resolution { .. }
        | Error::InvalidInput(_)
        | Error::DomainError(_)
        | Error::NonGeneric { .. }
        | Error::Ambiguous { .. }
        | Error::QuadrantViolation { .. } => 3,
        _ => 1,
    }
}

/// Loads the scenario named by the configuration. Relative data paths are
/// resolved against `base`.
pub fn load_scenario(config: &ScenarioConfig, base: &Path) -> Result<Scenario> {
    match &config.scenario {
        ScenarioSource::Builtin(name) => builtin(name),
        ScenarioSource::File(path) => {
            let path = if path.is_absolute() { path.clone() } else { base.join(path) };
            let finest = *config.epsilons.last().expect("at least one epsilon");
            let data = ingest_samples(&path, finest)?;
            Scenario::from_data("from-file", Box::new(data))
        }
    }
}

pub fn level_options(config: &ScenarioConfig) -> Vec<PipelineOptions> {
    let rule = match config.derivative_step {
        Some(step) => DerivativeRule::CentralDifference { step },
        None => DerivativeRule::default(),
    };
    config
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| PipelineOptions {
            init_variant: config.init_variant,
            second_value: config.second_value,
            q_rule: config.q_rule,
            cap: config.cap,
            strip: config.strip,
            rule,
            ..PipelineOptions::new(eps, config.half_width_at(i), config.construction)
        })
        .collect()
}

/// Fitted order of one error quantity; `fit` is `None` when an error level underflowed.
#[derive(Debug, Clone)]
pub struct QuantityOrder {
    pub name: &'static str,
    pub errors: Vec<f64>,
    pub fit: Option<OrderFit>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub scenario: String,
    pub reflected: bool,
    pub levels: Vec<LevelRun>,
    pub audits: Vec<AuditRow>,
    /// Empty when the scenario has no smooth reference.
    pub reports: Vec<ErrorReport>,
    pub orders: Vec<QuantityOrder>,
    pub files: Vec<PathBuf>,
}

fn audit_row(run: &LevelRun) -> AuditRow {
    AuditRow {
        eps: run.options.eps,
        half_width: run.options.half_width,
        ok: run.field.stats.ok,
        divergent: run.field.stats.divergent,
        out_of_domain: run.field.stats.out_of_domain,
        cross_ratio_defect: run.audit.max_defect,
        closure_defect: run.surface.closure_defect,
        path_gap: run.path_gap,
        branch_jumps: run.zigzag.branch_jumps.len(),
    }
}

type Quantity = (&'static str, fn(&ErrorReport) -> f64);

fn orders(reports: &[ErrorReport]) -> Vec<QuantityOrder> {
    let eps: Vec<f64> = reports.iter().map(|r| r.eps).collect();
    let quantities: [Quantity; 6] = [
        ("g_sup", |r| r.g_sup),
        ("edge_sup", |r| r.edge_sup()),
        ("f_sup", |r| r.f_sup),
        ("diagonal", |r| r.diagonal),
        ("vertex", |r| r.vertex),
        ("g_mean", |r| r.g_mean),
    ];
    quantities
        .iter()
        .map(|&(name, get)| {
            let errors: Vec<f64> = reports.iter().map(get).collect();
            QuantityOrder {
                name,
                fit: order_fit(&eps, &errors).ok(),
                errors,
            }
        })
        .collect()
}

fn create(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    files.push(path);
    Ok(BufWriter::new(f))
}

/// Runs every level of the configuration and writes outputs into `out_dir`.
pub fn run_scenario(config: &ScenarioConfig, base: &Path, out_dir: &Path) -> Result<RunOutcome> {
    let scenario = load_scenario(config, base)?;
    let opts = level_options(config);
    let levels = run_levels(scenario.data.as_ref(), scenario.g(), &opts)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let fields: Vec<_> = levels.iter().map(|r| (&r.field, r.options.eps)).collect();
    let domains = common_domains(&fields, config.radius)?;
    let reports = match scenario.reference() {
        Some(reference) => levels
            .iter()
            .zip(&domains)
            .map(|(run, d)| error_report(run, &reference, d))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let orders = if reports.len() >= 2 { orders(&reports) } else { Vec::new() };
    let audits: Vec<AuditRow> = levels.iter().map(audit_row).collect();

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let mut files = Vec::new();
    if config.write_obj {
        for run in &levels {
            // Meshes are written in the orientation of the input data.
            let surface = if scenario.reflected { run.surface.reflect_y() } else { run.surface.clone() };
            let out = create(out_dir, &format!("surface_eps{}.obj", run.options.eps), &mut files)?;
            write_obj(&surface, out)?;
        }
    }
    if config.write_csv {
        write_audit_csv(&audits, create(out_dir, "audit.csv", &mut files)?)?;
        if !reports.is_empty() {
            write_errors_csv(&reports, create(out_dir, "errors.csv", &mut files)?)?;
        }
        if !orders.is_empty() {
            let rows: Vec<_> = orders.iter().map(|o| (o.name, o.fit.clone(), o.errors.clone())).collect();
            write_orders_csv(&rows, create(out_dir, "orders.csv", &mut files)?)?;
        }
        let join = |v: Vec<String>| v.join(";");
        let meta = [
            ("scenario", scenario.name.clone()),
            ("reflected", scenario.reflected.to_string()),
            ("construction", format!("{:?}", config.construction)),
            ("init_variant", format!("{:?}", config.init_variant)),
            ("epsilons", join(config.epsilons.iter().map(|e| e.to_string()).collect())),
            ("half_widths", join(opts.iter().map(|o| o.half_width.to_string()).collect())),
            ("radius", config.radius.to_string()),
            ("strip", config.strip.to_string()),
            ("cap", config.cap.to_string()),
        ];
        write_metadata_csv(&meta, create(out_dir, "metadata.csv", &mut files)?)?;
    }
    Ok(RunOutcome {
        scenario: scenario.name,
        reflected: scenario.reflected,
        levels,
        audits,
        reports,
        orders,
        files,
    })
}
