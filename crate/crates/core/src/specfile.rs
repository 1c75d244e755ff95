//! JSON spec files: the on-disk form of a [`ManifoldSpec`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::geometry::ManifoldSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub name: String,
    pub dimension: usize,
    pub horizontal_rank: usize,
    pub coordinates: Vec<String>,
    /// `full_frame[k][i]` is component `i` of field `X_k`.
    pub full_frame: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertical_scaling: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub volume_densities: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modular_inverse: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_point: Option<Vec<f64>>,
    pub sample_points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub domain_notes: String,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<SpecFile> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec files always serialize")
    }

    /// Parses every expression and checks the invariants at the sample
    /// points. Parse errors name the offending field, e.g. `full_frame[1][2]`.
    pub fn to_spec(&self) -> Result<ManifoldSpec> {
        let d = self.dimension;
        if self.coordinates.len() != d {
            return Err(Error::InvalidSpec(format!(
                "dimension is {d} but {} coordinates are listed",
                self.coordinates.len()
            )));
        }
        for (n, c) in self.coordinates.iter().enumerate() {
            if !is_identifier(c) {
                return Err(Error::InvalidSpec(format!("coordinate `{c}` is not an identifier")));
            }
            if expr::is_reserved(c) {
                return Err(Error::InvalidSpec(format!("coordinate `{c}` is a reserved name")));
            }
            if self.coordinates[..n].contains(c) {
                return Err(Error::InvalidSpec(format!("coordinate `{c}` is listed twice")));
            }
        }
        let coords = &self.coordinates;
        let parse = |context: String, src: &str| -> Result<Expr> {
            expr::parse(src, coords).map_err(|source| Error::Parse { context, source })
        };
        let frame = self
            .full_frame
            .iter()
            .enumerate()
            .map(|(k, col)| {
                col.iter()
                    .enumerate()
                    .map(|(i, src)| parse(format!("full_frame[{k}][{i}]"), src))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let volume_densities = self
            .volume_densities
            .iter()
            .map(|(name, src)| Ok((name.clone(), parse(format!("volume_densities.{name}"), src)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let modular_inverse = self
            .modular_inverse
            .as_deref()
            .map(|src| parse("modular_inverse".into(), src))
            .transpose()?;
        let spec = ManifoldSpec {
            name: self.name.clone(),
            coordinates: self.coordinates.clone(),
            horizontal_rank: self.horizontal_rank,
            frame,
            vertical_scaling: self.vertical_scaling.unwrap_or(1.0),
            volume_densities,
            modular_inverse,
            identity_point: self.identity_point.clone(),
            sample_points: self.sample_points.clone(),
            domain_notes: self.domain_notes.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &ManifoldSpec) -> SpecFile {
        SpecFile {
            name: spec.name.clone(),
            dimension: spec.dimension(),
            horizontal_rank: spec.horizontal_rank,
            coordinates: spec.coordinates.clone(),
            full_frame: spec
                .frame
                .iter()
                .map(|col| col.iter().map(|e| e.to_string()).collect())
                .collect(),
            vertical_scaling: (spec.vertical_scaling != 1.0).then_some(spec.vertical_scaling),
            volume_densities: spec
                .volume_densities
                .iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect(),
            modular_inverse: spec.modular_inverse.as_ref().map(|e| e.to_string()),
            identity_point: spec.identity_point.clone(),
            sample_points: spec.sample_points.clone(),
            domain_notes: spec.domain_notes.clone(),
        }
    }
}
