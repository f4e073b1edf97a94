//! Built-in scenarios: Björling data synthesized from a Weierstrass map `g`
//! and a curve `phi`, together with the smooth reference.

use nalgebra::Vector3;

use crate::analysis::Reference;
use crate::analytic::{
    AnalyticCurve, ArcCurve, Conjugated, ConjugatedCurve, ExpMap, Holomorphic, IdentityMap, LineCurve, MoebiusMap,
};
use crate::bjorling::{needs_reflection, BjorlingData, Reflected};
use crate::error::{Error, Result};
use crate::moebius::C64;
use crate::surface::SynthesizedData;

pub const BUILTIN_NAMES: &[&str] = &["identity", "moebius", "enneper", "catenoid_ex1", "curved_ex2"];

/// Parameter interval of the arc examples: `Im phi'` of the arc vanishes at `t = 3 pi / 4`.
const ARC_INTERVAL: (f64, f64) = (-2.3561, 2.3561);
const LINE_INTERVAL: (f64, f64) = (-6.0, 6.0);

pub struct Scenario {
    pub name: String,
    pub data: Box<dyn BjorlingData>,
    /// Weierstrass map of the (possibly reflected) surface, when known.
    pub g: Option<Box<dyn Holomorphic>>,
    pub phi: Option<Box<dyn AnalyticCurve>>,
    /// The input was mirrored in `y -> -y` to put `(u', v')` into the first quadrant.
    pub reflected: bool,
}

impl Scenario {
    /// Wraps sampled data; reflects it if required.
    pub fn from_data(name: impl Into<String>, data: Box<dyn BjorlingData>) -> Result<Self> {
        let reflected = needs_reflection(&data)?;
        let data: Box<dyn BjorlingData> = if reflected { Box::new(Reflected(data)) } else { data };
        Ok(Self {
            name: name.into(),
            data,
            g: None,
            phi: None,
            reflected,
        })
    }

    pub fn reference(&self) -> Option<Reference<'_>> {
        match (&self.g, &self.phi) {
            (Some(g), Some(phi)) => Some(Reference {
                g: g.as_ref(),
                phi: phi.as_ref(),
                data: self.data.as_ref(),
            }),
            _ => None,
        }
    }

    pub fn g(&self) -> Option<&dyn Holomorphic> {
        self.g.as_deref()
    }
}

fn synthesized<G, P>(name: &str, g: G, phi: P, interval: (f64, f64)) -> Result<Scenario>
where
    G: Holomorphic + Clone + 'static,
    P: AnalyticCurve + Clone + 'static,
{
    let raw = SynthesizedData::new(Box::new(g.clone()), Box::new(phi.clone()), interval, Vector3::zeros());
    if needs_reflection(&raw)? {
        Ok(Scenario {
            name: name.into(),
            data: Box::new(Reflected(raw)),
            g: Some(Box::new(Conjugated(g))),
            phi: Some(Box::new(ConjugatedCurve(phi))),
            reflected: true,
        })
    } else {
        Ok(Scenario {
            name: name.into(),
            data: Box::new(raw),
            g: Some(Box::new(g)),
            phi: Some(Box::new(phi)),
            reflected: false,
        })
    }
}

/// Looks up a built-in scenario by name.
pub fn builtin(name: &str) -> Result<Scenario> {
    let diagonal = LineCurve { dir: C64::new(1.0, 1.0) };
    match name {
        "identity" => synthesized(name, IdentityMap, diagonal, LINE_INTERVAL),
        "moebius" => {
            let g = MoebiusMap::new(
                C64::new(1.0, 0.0),
                C64::new(0.2, 0.1),
                C64::new(0.3, -0.2),
                C64::new(1.0, 0.0),
            )
            .expect("non-degenerate");
            synthesized(name, g, diagonal, LINE_INTERVAL)
        }
        "enneper" => synthesized(name, IdentityMap, ArcCurve::arc_example(), ARC_INTERVAL),
        "catenoid_ex1" => synthesized(name, ExpMap, LineCurve { dir: C64::new(1.0, -1.0) }, LINE_INTERVAL),
        "curved_ex2" => synthesized(name, ExpMap, ArcCurve::arc_example(), ARC_INTERVAL),
        _ => Err(Error::InvalidInput(format!(
            "unknown scenario '{name}' (expected one of {} or from-file)",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bjorling::phi_dot_squared;

    #[test]
    fn every_builtin_is_in_the_first_quadrant() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            let pd = phi_dot_squared(&s.data, 0.0).unwrap().sqrt();
            assert!(pd.re > 0.0 && pd.im > 0.0, "{name}: {pd}");
            assert!(s.reference().is_some());
        }
    }

    #[test]
    fn examples_with_negative_v_dot_are_reflected() {
        let flags: Vec<_> = BUILTIN_NAMES.iter().map(|n| builtin(n).unwrap().reflected).collect();
        assert_eq!(flags, vec![false, false, true, true, true]);
    }

    #[test]
    fn reference_matches_the_data() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            let (g, phi) = (s.g.as_ref().unwrap(), s.phi.as_ref().unwrap());
            for t in [-0.7, 0.0, 0.4] {
                let n = crate::moebius::stereo_sigma(g.value(phi.value(t)));
                assert!((n.as_vector() - s.data.normal(t)).norm() < 1e-12, "{name} t={t}");
            }
        }
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(builtin("helicoid"), Err(Error::InvalidInput(_))));
    }
}
