//! JSON formats for configurations and analysis output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational_string;
use crate::field::FieldModulus;
use crate::generators::{GeneratorSpec, Generated, PRNG_NAME};
use crate::geometry::{AmbientSpace, Point, Sphere};
use crate::incidence::{energies_with, Config};
use crate::pipeline::HyperplaneRecord;
use crate::stratify::stratify_with;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRecord {
    pub center: Vec<u32>,
    pub r: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_hyperplane: Option<HyperplaneRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_radius: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub q: u64,
    pub d: usize,
    pub points: Vec<Vec<u32>>,
    pub spheres: Vec<SphereRecord>,
    #[serde(default)]
    pub meta: Meta,
}

impl ConfigFile {
    pub fn from_config(c: &Config, meta: Meta) -> Self {
        let v = |p: &Point| p.coords().iter().map(|x| x.value()).collect::<Vec<u32>>();
        ConfigFile {
            q: c.space().q().q() as u64,
            d: c.space().d(),
            points: c.points().iter().map(v).collect(),
            spheres: c
                .spheres()
                .iter()
                .map(|s| SphereRecord {
                    center: v(&s.center),
                    r: s.r.value(),
                })
                .collect(),
            meta,
        }
    }

    pub fn from_generated(spec: &GeneratorSpec, g: &Generated) -> Self {
        let meta = Meta {
            spec: Some(spec.clone()),
            seed: Some(spec.seed),
            prng: Some(PRNG_NAME.to_string()),
            planted_hyperplane: g.planted_hyperplane.as_ref().map(|h| HyperplaneRecord {
                normal: h.normal().iter().map(|x| x.value()).collect(),
                offset: h.offset().value(),
            }),
            planted_radius: g.planted_radius.map(|r| r.value()),
        };
        Self::from_config(&g.config, meta)
    }

    /// Validates every coordinate and builds the configuration.
    pub fn to_config(&self) -> Result<Config> {
        let q = FieldModulus::new(self.q)?;
        let space = AmbientSpace::new(q, self.d)?;
        let point = |field: String, v: &[u32]| -> Result<Point> {
            if v.len() != self.d {
                return Err(Error::Invalid(format!("{field}: expected {} coordinates, got {}", self.d, v.len())));
            }
            v.iter()
                .map(|&x| q.try_elem(x as u64).map_err(|_| Error::Invalid(format!("{field}: coordinate {x} is not below q = {}", self.q))))
                .collect::<Result<Vec<_>>>()
                .map(Point)
        };
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| point(format!("points[{i}]"), p))
            .collect::<Result<Vec<_>>>()?;
        let spheres = self
            .spheres
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let center = point(format!("spheres[{i}].center"), &s.center)?;
                let r = q
                    .try_elem(s.r as u64)
                    .map_err(|_| Error::Invalid(format!("spheres[{i}].r: {} is not below q = {}", s.r, self.q)))?;
                Ok(Sphere::new(center, r))
            })
            .collect::<Result<Vec<_>>>()?;
        Config::new(space, points, spheres)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("config: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    /// `j -> #ordered pairs with overlap in [2^j, 2^{j+1})`.
    pub histogram: BTreeMap<u32, u64>,
    pub zero_pairs: u64,
    pub degenerate_pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisStats {
    pub points: usize,
    pub spheres: usize,
    #[serde(rename = "I")]
    pub incidences: u64,
    #[serde(rename = "E")]
    pub energy: u64,
    #[serde(rename = "E_star")]
    pub dual_energy: u64,
    #[serde(rename = "E_off")]
    pub off_diagonal: u64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K_squared")]
    pub k_squared: String,
    pub layers: LayerSummary,
}

pub fn analyze(c: &Config) -> AnalysisStats {
    let t = c.incidence_table();
    let s = energies_with(c, &t);
    let layers = stratify_with(c, &t);
    AnalysisStats {
        points: c.points().len(),
        spheres: c.spheres().len(),
        incidences: s.incidences,
        energy: s.energy,
        dual_energy: s.dual_energy,
        off_diagonal: s.off_diagonal,
        k: s.k.to_f64(),
        k_squared: rational_string(s.k.square()),
        layers: LayerSummary {
            histogram: layers.histogram(),
            zero_pairs: layers.zero_pairs,
            degenerate_pairs: layers.degenerate_pairs,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorKind};

    #[test]
    fn round_trip_and_field_errors() {
        let spec = GeneratorSpec {
            kind: GeneratorKind::ReflectedPairs,
            q: 5,
            d: 3,
            np: 10,
            ns: 6,
            seed: 4,
            noise: 0.0,
        };
        let g = generate(&spec).unwrap();
        let f = ConfigFile::from_generated(&spec, &g);
        let back = ConfigFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_config().unwrap(), g.config);

        let mut bad = f.clone();
        bad.points[3][1] = 5;
        assert!(bad.to_config().unwrap_err().to_string().contains("points[3]"));
        let mut bad = f;
        bad.spheres[0].r = 9;
        assert!(bad.to_config().unwrap_err().to_string().contains("spheres[0].r"));
    }
}
