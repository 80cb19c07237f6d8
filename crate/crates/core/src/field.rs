use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Samples of a function of x on a uniform grid over [0, 1].
///
/// Sample `i` lives at `x = i / (n - 1)` where `n = grid_size()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a scalar field needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "scalar field contains non-finite samples".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Build a field by sampling `f` at the grid nodes.
    pub fn from_fn(grid_size: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if grid_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid_size must be >= 2, got {grid_size}"
            )));
        }
        let h = 1.0 / (grid_size - 1) as f64;
        Self::new((0..grid_size).map(|i| f(i as f64 * h)).collect())
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    /// Grid spacing 1 / (n - 1).
    pub fn spacing(&self) -> f64 {
        1.0 / (self.grid_size() - 1) as f64
    }

    /// Abscissa of sample `i`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoid integral over [0, 1].
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.spacing())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup-norm of the difference with another field on the same grid.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        if self.grid_size() != other.grid_size() {
            return Err(Error::GridMismatch {
                bins: other.grid_size(),
                grid: self.grid_size(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Linear interpolation at an arbitrary point of [0, 1].
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.grid_size();
        let s = x.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// Composite trapezoid rule with uniform spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (0.5 * (values[0] + values[n - 1]) + inner)
}

/// Composite Simpson rule; `values` must hold an odd number (>= 3) of samples
/// with uniform spacing `h`. Used where trapezoid accuracy is insufficient
/// (biorthogonality pairings of oscillatory integrands).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "simpson needs an odd sample count");
    let mut sum = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    sum * h / 3.0
}

/// Quadrature of `f` over [0, 1] by composite Simpson with `n` nodes (odd).
pub fn quad_simpson(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = if n % 2 == 0 { n + 1 } else { n };
    let h = 1.0 / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
    simpson(&vals, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_linear_exact() {
        let f = ScalarField::from_fn(101, |x| 2.0 * x + 1.0).unwrap();
        assert!((f.integral() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_cubic_exact() {
        let v: Vec<f64> = (0..101)
            .map(|i| {
                let x = i as f64 / 100.0;
                x * x * x
            })
            .collect();
        assert!((simpson(&v, 0.01) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn interpolation_matches_nodes() {
        let f = ScalarField::from_fn(11, |x| x * x).unwrap();
        assert!((f.interpolate(0.5) - 0.25).abs() < 1e-14);
        assert!((f.interpolate(0.55) - (0.25 + 0.36) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_tiny_or_nonfinite() {
        assert!(ScalarField::new(vec![1.0]).is_err());
        assert!(ScalarField::new(vec![1.0, f64::NAN]).is_err());
    }
}
