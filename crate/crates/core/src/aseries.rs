//! The odd-cosine moment series
//!
//! ```text
//! A(lambda, y) = (1/pi^2) * sum_{m >= 0} 2 cos((2m+1) pi y)
//!                / ((2m+1)^2 (pi^2 (2m+1)^2 - lambda))
//! ```
//!
//! together with its closed form
//!
//! ```text
//! A(lambda, y) = [ (y - 1/2) + (c(lambda y^2) - c(lambda (1-y)^2))
//!                              / (lambda s(lambda)) ] / (2 lambda) .
//! ```
//!
//! The starting index of the sum is a calibrated decision: the m = 0 mode
//! (fundamental odd cosine) is required for the Neumann moment identities to
//! hold, so `SeriesStart::M0` is the calibrated default and `SeriesStart::M1`
//! is retained only so the selection can be demonstrated by measurement.

use crate::entire::{cfn, entire_trig};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative pole-guard distance for series evaluation.
pub const POLE_GUARD: f64 = 1e-6;

/// Starting index variant for the series form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStart {
    /// Sum from m = 0 (includes the (2m+1) = 1 mode); calibrated choice.
    M0,
    /// Sum from m = 1; fails the Neumann moment identity and is kept only
    /// as the rejected alternative.
    M1,
}

/// Distance from `lambda` to the nearest series pole pi^2 (2m+1)^2,
/// relative to that pole's magnitude.
pub fn relative_pole_distance(lambda: Complex64) -> f64 {
    // The nearest odd square to |lambda| / pi^2 brackets the candidates.
    let r = (lambda.norm() / (PI * PI)).sqrt();
    let mut best = f64::INFINITY;
    let centre = ((r - 1.0) / 2.0).round().max(0.0) as i64;
    for m in (centre - 1).max(0)..=centre + 1 {
        let q = (2 * m + 1) as f64;
        let pole = PI * PI * q * q;
        let d = (lambda - Complex64::new(pole, 0.0)).norm() / pole;
        best = best.min(d);
    }
    best
}

/// Partial sum of the series with the tail bounded below `tol` using the
/// m^-4 decay of the terms.
pub fn a_series(lambda: Complex64, y: f64, tol: f64, start: SeriesStart) -> Result<Complex64> {
    if relative_pole_distance(lambda) < POLE_GUARD {
        let r = (lambda.norm() / (PI * PI)).sqrt();
        let q = 2.0 * ((r - 1.0) / 2.0).round().max(0.0) + 1.0;
        return Err(Error::NearSeriesPole {
            lambda: lambda.re,
            pole: PI * PI * q * q,
            guard: POLE_GUARD,
        });
    }
    let m0 = match start {
        SeriesStart::M0 => 0u64,
        SeriesStart::M1 => 1u64,
    };
    let tol = tol.max(1e-16);
    let mut sum = Complex64::new(0.0, 0.0);
    let lam_norm = lambda.norm();
    let mut m = m0;
    loop {
        let q = (2 * m + 1) as f64;
        let q2pi2 = PI * PI * q * q;
        sum += 2.0 * (q * PI * y).cos() / (q * q * (Complex64::new(q2pi2, 0.0) - lambda));
        // Tail bound: once pi^2 q^2 > 2 |lambda| the terms are dominated by
        // 4 / (pi^2 q^4), whose tail sum over odd q is below 4 / (3 pi^2 q^3).
        if q2pi2 > 2.0 * lam_norm && 4.0 / (3.0 * PI * PI * q * q * q) < tol * PI * PI {
            break;
        }
        m += 1;
        if m > 40_000_000 {
            break; // unreachable for any sane tol; protects against spin
        }
    }
    Ok(sum / (PI * PI))
}

/// Closed-form evaluation, valid arbitrarily close to the series poles
/// (the residue path). Near lambda = 0 the closed form cancels
/// catastrophically, so the series (which converges fast there) takes over.
pub fn a_eval(lambda: Complex64, y: f64) -> Complex64 {
    if lambda.norm() < 1e-3 {
        // No pole anywhere near: sum directly to ~1e-14.
        let mut sum = Complex64::new(0.0, 0.0);
        for m in 0..4000u64 {
            let q = (2 * m + 1) as f64;
            let q2pi2 = PI * PI * q * q;
            sum += 2.0 * (q * PI * y).cos() / (q * q * (Complex64::new(q2pi2, 0.0) - lambda));
        }
        return sum / (PI * PI);
    }
    let e = entire_trig(lambda);
    let cy = cfn(lambda * y * y);
    let cy1 = cfn(lambda * (1.0 - y) * (1.0 - y));
    let num = Complex64::new(y - 0.5, 0.0) + (cy - cy1) / (lambda * e.s);
    num / (2.0 * lambda)
}

/// Real-argument convenience wrapper for `a_eval`.
pub fn a_eval_re(lambda: f64, y: f64) -> f64 {
    a_eval(Complex64::new(lambda, 0.0), y).re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn vanishes_at_midpoint() {
        for &l in &[2.0, -3.0, 50.0] {
            assert!(a_eval_re(l, 0.5).abs() < 1e-14);
            assert!(a_series(re(l), 0.5, 1e-12, SeriesStart::M0).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn antisymmetric_in_y() {
        for &l in &[2.0, -3.0, 50.0, 1e-5] {
            for &y in &[0.13, 0.31, 0.77] {
                let a = a_eval_re(l, y);
                let b = a_eval_re(l, 1.0 - y);
                assert!((a + b).abs() < 1e-15 * a.abs().max(1.0), "l={l} y={y}");
            }
        }
    }

    #[test]
    fn series_matches_closed_form() {
        for &l in &[2.0, -3.0, 50.0] {
            for &y in &[0.13, 0.7] {
                let s = a_series(re(l), y, 1e-13, SeriesStart::M0).unwrap();
                let c = a_eval(re(l), y);
                assert!((s - c).norm() < 1e-12, "l={l} y={y}: {s} vs {c}");
            }
        }
    }

    #[test]
    fn frozen_values() {
        // Frozen against an independent high-precision evaluation.
        assert!((a_eval_re(2.0, 0.13) - 0.023_694_614_670_722_05).abs() < 1e-14);
        assert!((a_eval_re(-3.0, 0.7) - -0.009_027_937_008_969_727_5).abs() < 1e-14);
        assert!((a_eval_re(50.0, 0.7) - 0.003_512_786_181_936_451_5).abs() < 1e-14);
        // lambda -> 0 limit at y = 0 is 1/48 (exact odd-harmonic sum).
        assert!((a_eval_re(0.0, 0.0) - 1.0 / 48.0).abs() < 1e-13);
    }

    #[test]
    fn pole_guard_triggers() {
        let pole = PI * PI * 9.0;
        assert!(matches!(
            a_series(re(pole * (1.0 + 1e-9)), 0.3, 1e-10, SeriesStart::M0),
            Err(Error::NearSeriesPole { .. })
        ));
    }

    #[test]
    fn m1_start_differs_by_fundamental_mode() {
        let (l, y) = (re(2.0), 0.3);
        let s0 = a_series(l, y, 1e-13, SeriesStart::M0).unwrap();
        let s1 = a_series(l, y, 1e-13, SeriesStart::M1).unwrap();
        let mode0 = 2.0 * (PI * y).cos() / (PI * PI * (PI * PI - 2.0));
        assert!((s0 - s1 - re(mode0)).norm() < 1e-13);
    }
}
