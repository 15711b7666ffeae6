//! Rectangular panel of `N` units observed at times `0..=T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest number of periods for which every unit regression has positive
/// residual degrees of freedom.
pub const MIN_PERIODS: usize = 4;

/// `N` named units, each with `T + 1` finite observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelDataset {
    units: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl PanelDataset {
    /// Build a panel, checking that it is rectangular, finite, non-empty and
    /// has at least [`MIN_PERIODS`] periods.
    pub fn new(units: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if units.is_empty() || units.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} unit names for {} series",
                units.len(),
                values.len()
            )));
        }
        let len = values[0].len();
        if len < MIN_PERIODS + 1 {
            return Err(Error::InvalidInput(format!(
                "need at least {} observations per unit (got {len})",
                MIN_PERIODS + 1
            )));
        }
        for (name, series) in units.iter().zip(&values) {
            if series.len() != len {
                return Err(Error::InvalidInput(format!(
                    "unit '{name}' has {} observations, expected {len}",
                    series.len()
                )));
            }
            if let Some(t) = series.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("unit '{name}' has a non-finite value at time {t}")));
            }
        }
        Ok(PanelDataset { units, values })
    }

    /// Panel with units named `1..=N`.
    pub fn from_series(values: Vec<Vec<f64>>) -> Result<Self> {
        let units = (1..=values.len()).map(|i| i.to_string()).collect();
        PanelDataset::new(units, values)
    }

    /// Number of units `N`.
    pub fn n_units(&self) -> usize {
        self.values.len()
    }

    /// Number of periods `T` (each unit has `T + 1` observations).
    pub fn n_periods(&self) -> usize {
        self.values[0].len() - 1
    }

    /// Unit identifiers in panel order.
    pub fn units(&self) -> &[String] {
        &self.units
    }

    /// Observations of unit `i` at times `0..=T`.
    pub fn series(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// All series in unit order.
    pub fn all_series(&self) -> &[Vec<f64>] {
        &self.values
    }
}
