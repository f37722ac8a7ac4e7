use std::sync::Arc;

use serde::Serialize;

use super::FiniteSpace;
use crate::error::{invalid, Error, Result};

/// A finite nonnegative measure on a [`FiniteSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureOnSpace {
    space: Arc<FiniteSpace>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl MeasureOnSpace {
    pub fn new(space: Arc<FiniteSpace>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::Dimension(format!(
                "measure has {} weights for a space of {} points",
                weights.len(),
                space.len()
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return invalid(format!("measure weight at index {i} is not finite ({w})"));
            }
            if w < 0.0 {
                return invalid(format!("measure weight at index {i} is negative ({w})"));
            }
        }
        // left-to-right in point order
        let total_mass = weights.iter().fold(0.0, |acc, w| acc + w);
        Ok(Self {
            space,
            weights,
            total_mass,
        })
    }

    /// Like [`MeasureOnSpace::new`] but clamps entries in `[-tol, 0)` to zero,
    /// for weights read back from a solver.
    pub fn from_solver(space: Arc<FiniteSpace>, weights: &[f64], tol: f64) -> Result<Self> {
        let w = weights
            .iter()
            .map(|&x| if x < 0.0 && x >= -tol { 0.0 } else { x })
            .collect();
        Self::new(space, w)
    }

    pub fn zero(space: Arc<FiniteSpace>) -> Self {
        let n = space.len();
        Self::new(space, vec![0.0; n]).expect("zero measure")
    }

    pub fn dirac(space: Arc<FiniteSpace>, i: usize, mass: f64) -> Result<Self> {
        let mut w = vec![0.0; space.len()];
        if i >= w.len() {
            return invalid(format!("point index {i} out of range"));
        }
        w[i] = mass;
        Self::new(space, w)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_probability(&self, tol: f64) -> bool {
        (self.total_mass - 1.0).abs() <= tol
    }

    pub fn scale(&self, c: f64) -> Result<MeasureOnSpace> {
        MeasureOnSpace::new(
            self.space.clone(),
            self.weights.iter().map(|w| c * w).collect(),
        )
    }
}

impl Serialize for MeasureOnSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.weights.serialize(s)
    }
}
