//! Scenario files: one TOML document naming the model, the events, numeric
//! overrides, optional observer curves, and an optional slice descriptor.
//!
//! The `schema` string is the compatibility contract; this build reads
//! exactly [`SCHEMA`] and rejects anything else rather than guessing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use skylink::alk::{DegreeImage, ManifoldDescriptor, Pi1Order, TimelikeCurve};
use skylink::{Event, NumericPolicy, SurfaceModel, SurfacePoint};

use crate::report::CliError;

pub const SCHEMA: &str = "skylink/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub model: ModelSpec,
    #[serde(default)]
    pub numeric: NumericSpec,
    #[serde(default)]
    pub events: BTreeMap<String, EventSpec>,
    #[serde(default)]
    pub curves: BTreeMap<String, CurveSpec>,
    #[serde(default)]
    pub descriptor: Option<DescriptorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub periods: Option<[f64; 2]>,
    pub radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericSpec {
    pub n_samples: Option<usize>,
    pub rk4_step: Option<f64>,
    pub tol_hit: Option<f64>,
    pub tol_refocus: Option<f64>,
    pub tol_null: Option<f64>,
    pub lattice_margin: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub point: Vec<f64>,
    pub time: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    /// A static observer: fixed spatial point, sampled time interval.
    Vertical {
        point: Vec<f64>,
        t0: f64,
        t1: f64,
        samples: Option<usize>,
    },
    /// Explicit event samples; flat rows are `[px, py, t]`, sphere rows
    /// `[x, y, z, t]`.
    Sampled { events: Vec<Vec<f64>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorSpec {
    pub dimension: u32,
    pub closed: bool,
    pub orientable: bool,
    pub rational_homology_sphere: bool,
    pub pi1_order: Pi1Spec,
    pub degree_image: DegreeSpec,
    #[serde(default)]
    pub homeo_even_sphere: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Pi1Spec {
    Order(u64),
    Word(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Generator(u64),
    Word(String),
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let sc: Scenario =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("bad scenario file: {e}")))?;
    if sc.schema != SCHEMA {
        return Err(CliError::Config(format!(
            "scenario declares schema {:?}; this build reads {SCHEMA:?}",
            sc.schema
        )));
    }
    Ok(sc)
}

impl Scenario {
    pub fn build_model(&self) -> Result<SurfaceModel, CliError> {
        let m = &self.model;
        match m.name.as_str() {
            "flat-plane" => Ok(SurfaceModel::FlatPlane),
            "flat-torus" => {
                let [p1, p2] = m
                    .periods
                    .ok_or_else(|| CliError::Config("flat-torus needs `periods`".into()))?;
                SurfaceModel::flat_torus(p1, p2).map_err(CliError::from)
            }
            "round-sphere" => {
                let r = m
                    .radius
                    .ok_or_else(|| CliError::Config("round-sphere needs `radius`".into()))?;
                SurfaceModel::round_sphere(r).map_err(CliError::from)
            }
            other => Err(CliError::Config(format!(
                "unknown model {other:?}; expected flat-plane, flat-torus, or round-sphere"
            ))),
        }
    }

    pub fn policy(&self) -> NumericPolicy {
        let mut p = NumericPolicy::default();
        let n = &self.numeric;
        if let Some(v) = n.n_samples {
            p.n_samples = v;
        }
        if let Some(v) = n.rk4_step {
            p.rk4_step = v;
        }
        if let Some(v) = n.tol_hit {
            p.tol_hit = v;
        }
        if let Some(v) = n.tol_refocus {
            p.tol_refocus = v;
        }
        if let Some(v) = n.tol_null {
            p.tol_null = v;
        }
        if let Some(v) = n.lattice_margin {
            p.lattice_margin = v;
        }
        p
    }

    pub fn event(&self, model: &SurfaceModel, name: &str) -> Result<Event, CliError> {
        let spec = self.events.get(name).ok_or_else(|| {
            CliError::Config(format!(
                "no event named {name:?} in the scenario (have: {})",
                self.event_names()
            ))
        })?;
        Ok(Event::new(parse_point(model, &spec.point)?, spec.time))
    }

    fn event_names(&self) -> String {
        if self.events.is_empty() {
            return "none".into();
        }
        let mut out = String::new();
        for (i, k) in self.events.keys().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{k}");
        }
        out
    }

    pub fn curve(&self, model: &SurfaceModel, name: &str) -> Result<TimelikeCurve, CliError> {
        let spec = self
            .curves
            .get(name)
            .ok_or_else(|| CliError::Config(format!("no curve named {name:?} in the scenario")))?;
        match spec {
            CurveSpec::Vertical { point, t0, t1, samples } => TimelikeCurve::vertical(
                model,
                &parse_point(model, point)?,
                *t0,
                *t1,
                samples.unwrap_or(64),
            )
            .map_err(CliError::from),
            CurveSpec::Sampled { .. } => {
                TimelikeCurve::new(model, self.path(model, name)?).map_err(CliError::from)
            }
        }
    }

    /// The curve as a bare event path, without the timelike validation;
    /// boundary-moment scans accept any continuous path of events.
    pub fn path(&self, model: &SurfaceModel, name: &str) -> Result<Vec<Event>, CliError> {
        let spec = self
            .curves
            .get(name)
            .ok_or_else(|| CliError::Config(format!("no curve named {name:?} in the scenario")))?;
        match spec {
            CurveSpec::Vertical { point, t0, t1, samples } => {
                let n = samples.unwrap_or(64).max(2);
                let p = parse_point(model, point)?;
                Ok((0..n)
                    .map(|i| {
                        let u = i as f64 / (n - 1) as f64;
                        Event::new(p, t0 + (t1 - t0) * u)
                    })
                    .collect())
            }
            CurveSpec::Sampled { events } => {
                let spatial = match model {
                    SurfaceModel::RoundSphere { .. } => 3,
                    _ => 2,
                };
                events
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        if row.len() != spatial + 1 {
                            return Err(CliError::Config(format!(
                                "curve {name:?} row {i}: want {} numbers (point then time), \
                                 got {}",
                                spatial + 1,
                                row.len()
                            )));
                        }
                        let p = parse_point(model, &row[..spatial])?;
                        Ok(Event::new(p, row[spatial]))
                    })
                    .collect()
            }
        }
    }

    pub fn descriptor(&self, model: &SurfaceModel) -> Result<ManifoldDescriptor, CliError> {
        let Some(spec) = &self.descriptor else {
            return Ok(ManifoldDescriptor::of_model(model));
        };
        let pi1_order = match &spec.pi1_order {
            Pi1Spec::Order(k) => Pi1Order::Finite(*k),
            Pi1Spec::Word(w) if w == "infinite" => Pi1Order::Infinite,
            Pi1Spec::Word(w) => {
                return Err(CliError::Config(format!(
                    "pi1_order must be a positive order or \"infinite\", got {w:?}"
                )))
            }
        };
        let degree_image = match &spec.degree_image {
            DegreeSpec::Generator(d) => DegreeImage::Generated(*d),
            DegreeSpec::Word(w) if w == "unknown" => DegreeImage::Unknown,
            DegreeSpec::Word(w) => {
                return Err(CliError::Config(format!(
                    "degree_image must be a generator or \"unknown\", got {w:?}"
                )))
            }
        };
        let desc = ManifoldDescriptor {
            dimension: spec.dimension,
            closed: spec.closed,
            orientable: spec.orientable,
            rational_homology_sphere: spec.rational_homology_sphere,
            pi1_order,
            degree_image,
            homeo_even_sphere: spec.homeo_even_sphere,
        };
        desc.validate().map_err(CliError::from)?;
        Ok(desc)
    }

    pub fn model_line(&self) -> String {
        match (&self.model.periods, &self.model.radius) {
            (Some([p1, p2]), _) => format!("{} periods=[{p1}, {p2}]", self.model.name),
            (_, Some(r)) => format!("{} radius={r}", self.model.name),
            _ => self.model.name.clone(),
        }
    }
}

fn parse_point(model: &SurfaceModel, coords: &[f64]) -> Result<SurfacePoint, CliError> {
    match model {
        SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => {
            if coords.len() != 2 {
                return Err(CliError::Config(format!(
                    "flat points take 2 coordinates, got {}",
                    coords.len()
                )));
            }
            model
                .canonical_point(&SurfacePoint::flat(coords[0], coords[1]))
                .map_err(CliError::from)
        }
        SurfaceModel::RoundSphere { .. } => {
            if coords.len() != 3 {
                return Err(CliError::Config(format!(
                    "sphere points take 3 direction coordinates, got {}",
                    coords.len()
                )));
            }
            SurfacePoint::sphere(nalgebra_vector(coords)).map_err(CliError::from)
        }
    }
}

fn nalgebra_vector(c: &[f64]) -> nalgebra::Vector3<f64> {
    nalgebra::Vector3::new(c[0], c[1], c[2])
}
