//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::analysis::QRule;
use crate::aux_evolution::{InitVariant, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::zigzag::{Provenance, SecondValue};

/// Default `(xi, eta)`-radius of the error domain.
pub const DEFAULT_RADIUS: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSource,
    /// Step sizes, coarsest first.
    pub epsilons: Vec<f64>,
    /// Half width at the coarsest step; finer steps scale it to the same region.
    pub half_width: usize,
    pub construction: Provenance,
    pub init_variant: InitVariant,
    pub second_value: SecondValue,
    pub q_rule: QRule,
    pub cap: f64,
    pub strip: bool,
    pub radius: f64,
    /// Central-difference step for sampled data; `None` uses exact jets when available.
    pub derivative_step: Option<f64>,
    pub write_obj: bool,
    pub write_csv: bool,
}

impl ScenarioConfig {
    /// Half width used at level `i`.
    pub fn half_width_at(&self, i: usize) -> usize {
        let s = (self.epsilons[0] / self.epsilons[i]).round() as usize;
        self.half_width * s.max(1)
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "data",
    "epsilon",
    "epsilons",
    "half_width",
    "construction",
    "init_variant",
    "second_value",
    "q_rule",
    "cap",
    "strip",
    "radius",
    "derivative_step",
    "write_obj",
    "write_csv",
];

fn parse_bool(line: usize, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse {
            line,
            message: format!("expected a boolean, got '{v}'"),
        }),
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("{key}: '{v}' is not a number"),
    })
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::Parse {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        let Some(&key) = KEYS.iter().find(|&&x| x == k) else {
            return Err(Error::Parse {
                line,
                message: format!("unknown key '{k}'"),
            });
        };
        if v.is_empty() {
            return Err(Error::Parse {
                line,
                message: format!("empty value for '{key}'"),
            });
        }
        if entries.insert(key, (line, v)).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
    }
    let end = text.lines().count() + 1;
    let get = |k: &str| entries.get(k).copied();

    let (sl, sv) = get("scenario").ok_or(Error::Parse {
        line: end,
        message: "missing required key 'scenario'".into(),
    })?;
    let scenario = if sv == "from-file" {
        let (_, path) = get("data").ok_or(Error::Parse {
            line: sl,
            message: "scenario 'from-file' needs the key 'data'".into(),
        })?;
        ScenarioSource::File(PathBuf::from(path))
    } else {
        if let Some((l, _)) = get("data") {
            return Err(Error::Parse {
                line: l,
                message: "'data' is only used with scenario = from-file".into(),
            });
        }
        ScenarioSource::Builtin(sv.to_string())
    };

    let epsilons = match (get("epsilon"), get("epsilons")) {
        (Some((l, v)), None) => vec![parse_f64(l, "epsilon", v)?],
        (None, Some((l, v))) => v
            .split(',')
            .map(|x| parse_f64(l, "epsilons", x.trim()))
            .collect::<Result<Vec<_>>>()?,
        (Some(_), Some(_)) => {
            return Err(Error::Constraint("give exactly one of 'epsilon' and 'epsilons'".into()))
        }
        (None, None) => {
            return Err(Error::Parse {
                line: end,
                message: "missing required key 'epsilon' (or 'epsilons')".into(),
            })
        }
    };
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::Constraint(format!("epsilon must be positive, got {e}")));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Constraint("epsilons must be strictly decreasing".into()));
    }
    if let Some(e) = epsilons.iter().find(|&&e| {
        let s = epsilons[0] / e;
        (s - s.round()).abs() > 1e-9
    }) {
        return Err(Error::Constraint(format!(
            "epsilon {e} must divide the coarsest epsilon {}",
            epsilons[0]
        )));
    }

    let half_width = match get("half_width") {
        Some((l, v)) => v.parse::<usize>().map_err(|_| Error::Parse {
            line: l,
            message: format!("half_width: '{v}' is not a non-negative integer"),
        })?,
        None => {
            return Err(Error::Parse {
                line: end,
                message: "missing required key 'half_width'".into(),
            })
        }
    };
    if half_width < 2 {
        return Err(Error::Constraint(format!("half_width must be at least 2, got {half_width}")));
    }

    let parsed = |k: &str, default| -> Result<_> {
        match get(k) {
            Some((l, v)) => v.parse().map_err(|e: String| Error::Parse { line: l, message: e }),
            None => Ok(default),
        }
    };
    let construction: Provenance = parsed("construction", Provenance::A)?;
    let init_variant = match get("init_variant") {
        Some((l, v)) => v.parse::<InitVariant>().map_err(|e| Error::Parse { line: l, message: e })?,
        None => InitVariant::Standard,
    };
    let second_value = match get("second_value") {
        Some((_, "lattice")) | None => SecondValue::LatticeStep,
        Some((_, "taylor")) => SecondValue::Taylor,
        Some((l, v)) => {
            return Err(Error::Parse {
                line: l,
                message: format!("second_value: expected 'lattice' or 'taylor', got '{v}'"),
            })
        }
    };
    let q_rule = match get("q_rule") {
        Some((_, "lattice")) | None => QRule::Lattice,
        Some((_, "derivatives")) => QRule::Derivatives,
        Some((l, v)) => {
            return Err(Error::Parse {
                line: l,
                message: format!("q_rule: expected 'lattice' or 'derivatives', got '{v}'"),
            })
        }
    };
    let cap = match get("cap") {
        Some((l, v)) => parse_f64(l, "cap", v)?,
        None => DEFAULT_CAP,
    };
    if !(cap > 0.0) {
        return Err(Error::Constraint(format!("cap must be positive, got {cap}")));
    }
    let radius = match get("radius") {
        Some((l, v)) => parse_f64(l, "radius", v)?,
        None => DEFAULT_RADIUS,
    };
    if !(radius > 0.0) {
        return Err(Error::Constraint(format!("radius must be positive, got {radius}")));
    }
    let derivative_step = match get("derivative_step") {
        Some((l, v)) => {
            let h = parse_f64(l, "derivative_step", v)?;
            if !(h > 0.0) {
                return Err(Error::Constraint(format!("derivative_step must be positive, got {h}")));
            }
            Some(h)
        }
        None => None,
    };
    let flag = |k: &str, default: bool| match get(k) {
        Some((l, v)) => parse_bool(l, v),
        None => Ok(default),
    };
    Ok(ScenarioConfig {
        scenario,
        epsilons,
        half_width,
        construction,
        init_variant,
        second_value,
        q_rule,
        cap,
        strip: flag("strip", true)?,
        radius,
        derivative_step,
        write_obj: flag("write_obj", true)?,
        write_csv: flag("write_csv", true)?,
    })
}
