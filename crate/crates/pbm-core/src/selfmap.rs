//! Self-maps on a space: explicit tables on finite spaces, named closed
//! forms on function-backed ones.

use crate::error::{Error, Result};
use crate::space::FiniteSpace;
use serde::Deserialize;
use std::collections::BTreeMap;

/// Total map on the points of a finite space, stored as image indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapTable {
    image: Vec<usize>,
}

impl MapTable {
    pub fn new(image: Vec<usize>, space: &FiniteSpace) -> Result<Self> {
        if image.len() != space.len() {
            return Err(Error::Structural(format!(
                "map table has {} entries for {} points",
                image.len(),
                space.len()
            )));
        }
        if let Some(&bad) = image.iter().find(|&&t| t >= space.len()) {
            return Err(Error::Structural(format!("image index {bad} outside the space")));
        }
        Ok(MapTable { image })
    }

    pub fn from_pairs(space: &FiniteSpace, pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut image = vec![usize::MAX; space.len()];
        for (from, to) in pairs {
            let i = space
                .index_of(from)
                .ok_or_else(|| Error::UnknownPoint(format!("map source {from:?}")))?;
            let j = space
                .index_of(to)
                .ok_or_else(|| Error::UnknownPoint(format!("map target {to:?}")))?;
            image[i] = j;
        }
        if let Some(i) = image.iter().position(|&t| t == usize::MAX) {
            return Err(Error::Structural(format!(
                "map is not total: no image for point {:?}",
                space.label(i)
            )));
        }
        MapTable::new(image, space)
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &MapTable) -> MapTable {
        MapTable { image: other.image.iter().map(|&i| self.image[i]).collect() }
    }

    /// n-fold composition, n >= 1.
    pub fn power(&self, n: u32) -> MapTable {
        assert!(n >= 1, "power needs n >= 1");
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc);
        }
        acc
    }

}

/// Named closed-form maps for function-backed spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapFormula {
    /// x -> e^(x - lambda)
    ExpShift { lambda: f64 },
}

impl MapFormula {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            MapFormula::ExpShift { lambda } => (x - lambda).exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SelfMap {
    Table(MapTable),
    Formula(MapFormula),
}

#[derive(Deserialize)]
struct MapFile {
    map: Option<BTreeMap<String, String>>,
    formula: Option<String>,
    lambda: Option<f64>,
}

impl SelfMap {
    /// Parse a map file. Table maps need the space to resolve labels.
    pub fn from_json(text: &str, space: Option<&FiniteSpace>) -> Result<SelfMap> {
        let file: MapFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("map file: {e}")))?;
        if let Some(pairs) = file.map {
            let space = space.ok_or_else(|| {
                Error::Parse("map file: a table map needs a finite space".into())
            })?;
            Ok(SelfMap::Table(MapTable::from_pairs(space, &pairs)?))
        } else if let Some(name) = file.formula {
            match name.as_str() {
                "exp_shift" => {
                    let lambda = file.lambda.ok_or_else(|| {
                        Error::Parse("map file: formula exp_shift needs field \"lambda\"".into())
                    })?;
                    Ok(SelfMap::Formula(MapFormula::ExpShift { lambda }))
                }
                other => Err(Error::Parse(format!("field \"formula\": unknown builtin {other:?}"))),
            }
        } else {
            Err(Error::Parse("map file: need either \"map\" or \"formula\"".into()))
        }
    }

    pub fn to_json_value(&self, space: Option<&FiniteSpace>) -> serde_json::Value {
        match self {
            SelfMap::Table(t) => {
                let mut pairs = serde_json::Map::new();
                if let Some(space) = space {
                    for (i, &j) in t.image().iter().enumerate() {
                        pairs.insert(
                            space.label(i).to_string(),
                            serde_json::Value::String(space.label(j).to_string()),
                        );
                    }
                }
                serde_json::json!({ "map": pairs })
            }
            SelfMap::Formula(MapFormula::ExpShift { lambda }) => {
                serde_json::json!({ "formula": "exp_shift", "lambda": lambda })
            }
        }
    }

    pub fn as_table(&self) -> Result<&MapTable> {
        match self {
            SelfMap::Table(t) => Ok(t),
            SelfMap::Formula(_) => {
                Err(Error::Unsupported("operation requires an explicit map table".into()))
            }
        }
    }
}

/// Serialize a finite-space table map as a JSON map file.
pub fn map_to_json(space: &FiniteSpace, map: &MapTable) -> String {
    let mut pairs = serde_json::Map::new();
    for (i, &j) in map.image().iter().enumerate() {
        pairs.insert(
            space.label(i).to_string(),
            serde_json::Value::String(space.label(j).to_string()),
        );
    }
    serde_json::to_string_pretty(&serde_json::json!({ "map": pairs })).expect("serializable")
}
