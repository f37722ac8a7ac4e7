use std::sync::Arc;

use serde::Serialize;

use super::{ExtReal, FiniteSpace};
use crate::error::{invalid, Error, Result};

/// A function `Ω → ℝ ∪ {+∞}` bounded below.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncOnSpace {
    space: Arc<FiniteSpace>,
    values: Vec<ExtReal>,
    lower_bound: f64,
}

impl FuncOnSpace {
    pub fn new(space: Arc<FiniteSpace>, values: Vec<ExtReal>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Dimension(format!(
                "function has {} values for a space of {} points",
                values.len(),
                space.len()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|v| v.finite().is_some_and(|x| !x.is_finite()))
        {
            return invalid(format!("function value at index {i} is not a number"));
        }
        let lower_bound = values
            .iter()
            .filter_map(|v| v.finite())
            .fold(f64::INFINITY, f64::min);
        let lower_bound = if lower_bound.is_finite() {
            lower_bound
        } else {
            0.0
        };
        Ok(Self {
            space,
            values,
            lower_bound,
        })
    }

    /// Finite values only.
    pub fn from_reals(space: Arc<FiniteSpace>, values: &[f64]) -> Result<Self> {
        let mut ext = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            match ExtReal::from_f64(v) {
                Some(x) => ext.push(x),
                None => return invalid(format!("function value at index {i} is {v}")),
            }
        }
        Self::new(space, ext)
    }

    pub fn constant(space: Arc<FiniteSpace>, c: f64) -> Self {
        let n = space.len();
        Self::new(space, vec![ExtReal::Finite(c); n]).expect("constant function is well formed")
    }

    pub fn zero(space: Arc<FiniteSpace>) -> Self {
        Self::constant(space, 0.0)
    }

    /// Indicator of a set given as a mask, scaled by `c`.
    pub fn indicator(space: Arc<FiniteSpace>, mask: &[bool], c: f64) -> Result<Self> {
        let vals: Vec<f64> = mask.iter().map(|&m| if m { c } else { 0.0 }).collect();
        Self::from_reals(space, &vals)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn value(&self, i: usize) -> ExtReal {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lower_bound >= 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn has_infinity(&self) -> bool {
        !self.is_finite()
    }

    /// Finite values as `f64`, or `None` if some value is `+∞`.
    pub fn finite_values(&self) -> Option<Vec<f64>> {
        self.values.iter().map(|v| v.finite()).collect()
    }

    /// `self + c` pointwise.
    pub fn shift(&self, c: f64) -> FuncOnSpace {
        let values = self.values.iter().map(|&v| v + c).collect();
        FuncOnSpace::new(self.space.clone(), values).expect("shift keeps shape")
    }

    /// `c · self` for `c ≥ 0`.
    pub fn scale(&self, c: f64) -> FuncOnSpace {
        let values = self.values.iter().map(|&v| v.scale(c)).collect();
        FuncOnSpace::new(self.space.clone(), values).expect("scale keeps shape")
    }

    /// Pointwise sum on the same space.
    pub fn add(&self, other: &FuncOnSpace) -> Result<FuncOnSpace> {
        super::check_same_space(&self.space, &other.space)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + b)
            .collect();
        FuncOnSpace::new(self.space.clone(), values)
    }

    /// `f ≤ g` pointwise.
    pub fn le(&self, other: &FuncOnSpace) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}

impl Serialize for FuncOnSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}
