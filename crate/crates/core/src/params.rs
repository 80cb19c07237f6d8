use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical inputs defining the channel problem.
///
/// All physical constants of the underlying electrodiffusion model are folded
/// into `kappa2` (the inverse squared Debye length, made dimensionless on the
/// unit interval); `epsilon` is the permittivity scale and `voltage` the
/// potential difference across the endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Inverse squared Debye length, strictly positive.
    pub kappa2: f64,
    /// Permittivity scale, strictly positive.
    pub epsilon: f64,
    /// Voltage difference across the endpoints.
    pub voltage: f64,
}

impl ModelParams {
    pub fn new(kappa2: f64, epsilon: f64, voltage: f64) -> Result<Self> {
        if !(kappa2 > 0.0) || !kappa2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kappa2 must be a positive finite real, got {kappa2}"
            )));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be a positive finite real, got {epsilon}"
            )));
        }
        if !voltage.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "voltage must be finite, got {voltage}"
            )));
        }
        Ok(Self {
            kappa2,
            epsilon,
            voltage,
        })
    }

    /// Convenience constructor for the homogeneous (zero-voltage) problem.
    pub fn homogeneous(kappa2: f64) -> Result<Self> {
        Self::new(kappa2, 1.0, 0.0)
    }

    /// kappa = sqrt(kappa2).
    pub fn kappa(&self) -> f64 {
        self.kappa2.sqrt()
    }
}
