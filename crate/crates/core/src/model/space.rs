use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// An ordered finite set of labelled points, each tagged with the index of
/// the first compact `K_n` of the exhaustion that contains it.
///
/// `K_n` is the set of points with level `≤ n`; the top level plays the
/// role of the non-compact tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct FiniteSpace {
    points: Vec<String>,
    levels: Vec<u32>,
    coords: Option<Vec<f64>>,
}

impl FiniteSpace {
    pub fn new(points: Vec<String>, levels: Vec<u32>, coords: Option<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return invalid("a space needs at least one point");
        }
        if levels.len() != points.len() {
            return invalid(format!(
                "{} levels given for {} points",
                levels.len(),
                points.len()
            ));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if !seen.insert(p.as_str()) {
                return invalid(format!("duplicate point label {p:?} at index {i}"));
            }
        }
        if let Some(i) = levels.iter().position(|&l| l == 0) {
            return invalid(format!("exhaustion level at index {i} must be >= 1"));
        }
        let max = *levels.iter().max().unwrap();
        for level in 1..=max {
            if !levels.contains(&level) {
                return invalid(format!(
                    "exhaustion level {level} is not attained (levels must cover 1..={max})"
                ));
            }
        }
        if let Some(c) = &coords {
            if c.len() != points.len() {
                return invalid(format!(
                    "{} coords given for {} points",
                    c.len(),
                    points.len()
                ));
            }
            if let Some(i) = c.iter().position(|x| !x.is_finite()) {
                return invalid(format!("coordinate at index {i} is not finite"));
            }
        }
        Ok(Self {
            points,
            levels,
            coords,
        })
    }

    /// `n` points labelled `0..n`, all in `K_1`.
    pub fn compact(n: usize) -> Result<Self> {
        Self::with_levels(vec![1; n])
    }

    /// Points labelled by their index with the given levels.
    pub fn with_levels(levels: Vec<u32>) -> Result<Self> {
        let points = (0..levels.len()).map(|i| i.to_string()).collect();
        Self::new(points, levels, None)
    }

    /// Points carrying real coordinates, labelled by their index.
    pub fn with_coords(coords: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        let points = (0..n).map(|i| i.to_string()).collect();
        Self::new(points, vec![1; n], Some(coords))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.points
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> u32 {
        self.levels[i]
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(1)
    }

    /// Compact iff the exhaustion stops at `K_1`.
    pub fn is_compact(&self) -> bool {
        self.max_level() == 1
    }

    /// Membership mask of `K_n`.
    pub fn in_compact(&self, n: u32) -> Vec<bool> {
        self.levels.iter().map(|&l| l <= n).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p == label)
    }
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    points: Vec<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<f64>>,
}

/// Labels may be written as strings or numbers in instance files.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Label {
    Text(String),
    Number(serde_json::Number),
}

impl TryFrom<RawSpace> for FiniteSpace {
    type Error = crate::error::Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        let points: Vec<String> = raw
            .points
            .into_iter()
            .map(|l| match l {
                Label::Text(s) => s,
                Label::Number(n) => n.to_string(),
            })
            .collect();
        let levels = raw.levels.unwrap_or_else(|| vec![1; points.len()]);
        FiniteSpace::new(points, levels, raw.coords)
    }
}

impl From<FiniteSpace> for RawSpace {
    fn from(s: FiniteSpace) -> Self {
        RawSpace {
            points: s.points.into_iter().map(Label::Text).collect(),
            levels: Some(s.levels),
            coords: s.coords,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_levels() {
        assert!(FiniteSpace::with_levels(vec![1, 3]).is_err());
        assert!(FiniteSpace::with_levels(vec![0, 1]).is_err());
        assert!(FiniteSpace::with_levels(vec![2, 2]).is_err());
        assert!(FiniteSpace::with_levels(vec![1, 2, 2, 3]).is_ok());
    }

    #[test]
    fn rejects_duplicates_and_bad_coords() {
        let dup = FiniteSpace::new(vec!["a".into(), "a".into()], vec![1, 1], None);
        assert!(dup.is_err());
        let nan = FiniteSpace::new(vec!["a".into()], vec![1], Some(vec![f64::NAN]));
        assert!(nan.is_err());
    }

    #[test]
    fn parses_json_fragment() {
        let s: FiniteSpace =
            serde_json::from_str(r#"{"points": ["a", 2], "levels": [1, 2]}"#).unwrap();
        assert_eq!(s.labels(), &["a".to_string(), "2".to_string()]);
        assert_eq!(s.in_compact(1), vec![true, false]);
        let bad = serde_json::from_str::<FiniteSpace>(r#"{"points": ["a"], "levels": [2]}"#);
        assert!(bad.is_err());
    }
}
