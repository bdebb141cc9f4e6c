use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};

/// How the values in a map were computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Reachable-set counting; valid only for deterministic dynamics.
    Deterministic,
    /// Blahut-Arimoto over the full sequence channel.
    #[serde(rename = "ba")]
    BlahutArimoto,
    /// Greedy sequence-skeleton approximation.
    Impoverished,
    /// Quasi-linear Gaussian (continuous state).
    Qlg,
}

/// Width × height layout of a map whose states form a raster.
///
/// Values are row-major with row 0 at the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
}

/// Per-state empowerment values in bits.
///
/// `None` marks states that were not evaluated (walls, the box cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpowermentMap {
    pub model_id: String,
    pub horizon: usize,
    pub method: Method,
    pub raster: Option<Raster>,
    pub values: Vec<Option<f64>>,
}

impl EmpowermentMap {
    pub fn new(
        model_id: impl Into<String>,
        horizon: usize,
        method: Method,
        raster: Option<Raster>,
        values: Vec<Option<f64>>,
    ) -> Self {
        if let Some(r) = raster {
            assert_eq!(r.width * r.height, values.len(), "raster shape does not match values");
        }
        Self {
            model_id: model_id.into(),
            horizon,
            method,
            raster,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, state: usize) -> Option<f64> {
        self.values.get(state).copied().flatten()
    }

    /// Value at raster column `col`, row `row`.
    pub fn at(&self, col: usize, row: usize) -> Option<f64> {
        let r = self.raster?;
        if col >= r.width || row >= r.height {
            return None;
        }
        self.values[row * r.width + col]
    }

    pub fn defined(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
    }

    /// `(min, max)` over defined values.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.defined().fold(None, |acc, (_, v)| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// `state,value` lines for every defined state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,value\n");
        for (i, v) in self.defined() {
            writeln!(out, "{i},{v}").unwrap();
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Binary 8-bit PGM (P5), min-max normalized over this map.
    ///
    /// Undefined cells are written as 0; a constant map is written as mid-gray.
    pub fn to_pgm(&self) -> Result<Vec<u8>> {
        let raster = self
            .raster
            .ok_or_else(|| invalid_param("raster", "map has no raster layout"))?;
        Ok(pgm_bytes(raster, &self.values))
    }
}

pub(crate) fn pgm_bytes(raster: Raster, values: &[Option<f64>]) -> Vec<u8> {
    let range = values.iter().flatten().fold(None, |acc: Option<(f64, f64)>, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    });
    let mut out = format!("P5\n{} {}\n255\n", raster.width, raster.height).into_bytes();
    out.extend(values.iter().map(|v| match (v, range) {
        (Some(v), Some((lo, hi))) if hi > lo => {
            (255.0 * (v - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8
        }
        (Some(_), _) => 128,
        (None, _) => 0,
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmpowermentMap {
        EmpowermentMap::new(
            "t",
            1,
            Method::Deterministic,
            Some(Raster { width: 2, height: 2 }),
            vec![Some(1.0), None, Some(3.0), Some(2.0)],
        )
    }

    #[test]
    fn csv_skips_undefined() {
        assert_eq!(sample().to_csv(), "state,value\n0,1\n2,3\n3,2\n");
    }

    #[test]
    fn pgm_is_min_max_normalized() {
        let bytes = sample().to_pgm().unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 0, 255, 128]);
    }

    #[test]
    fn constant_map_is_mid_gray() {
        let m = EmpowermentMap::new(
            "c",
            1,
            Method::Qlg,
            Some(Raster { width: 1, height: 2 }),
            vec![Some(5.0), Some(5.0)],
        );
        assert_eq!(&m.to_pgm().unwrap()[11..], &[128, 128]);
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        let back: EmpowermentMap = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.range(), Some((1.0, 3.0)));
        assert_eq!(m.at(0, 1), Some(3.0));
    }
}
