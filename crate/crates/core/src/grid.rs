use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing time nodes starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    t: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if t[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("first node must be 0, got {}", t[0])));
        }
        if let Some(bad) = t.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite node {bad}")));
        }
        if let Some(w) = t.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!("nodes not strictly increasing: {} then {}", w[0], w[1])));
        }
        Ok(Self { t })
    }

    /// `steps + 1` equally spaced nodes on `[0, horizon]`. The last node is
    /// exactly `horizon`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("steps must be at least 1".into()));
        }
        let mut t: Vec<f64> = (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect();
        t[steps] = horizon;
        Self::new(t)
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn horizon(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    pub fn n_nodes(&self) -> usize {
        self.t.len()
    }

    pub fn n_steps(&self) -> usize {
        self.t.len() - 1
    }

    pub fn dt(&self, i: usize) -> f64 {
        self.t[i + 1] - self.t[i]
    }

    /// Index of the node closest to `time`.
    pub fn nearest_index(&self, time: f64) -> usize {
        let mut best = 0;
        for (i, &ti) in self.t.iter().enumerate() {
            if (ti - time).abs() < (self.t[best] - time).abs() {
                best = i;
            }
        }
        best
    }
}

impl<'de> Deserialize<'de> for TimeGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            t: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        TimeGrid::new(raw.t).map_err(serde::de::Error::custom)
    }
}
