//! Branch-safe building blocks: the entire functions
//!
//! ```text
//! c(z)  = cos(sqrt(z))
//! s(z)  = sin(sqrt(z)) / sqrt(z)
//! hc(z) = (1 - cos(sqrt(z))) / z
//! ```
//!
//! Each is an even function of sqrt(z), hence entire in z: any square root
//! branch gives the same value, and negative arguments reduce to hyperbolic
//! functions without an explicit case split. Near z = 0 the closed forms lose
//! accuracy to cancellation, so a power series takes over.

use num_complex::Complex64;

/// Threshold below which the power series is used.
const SERIES_CUTOFF: f64 = 1e-6;

/// Values of c, s, hc at one point.
#[derive(Debug, Clone, Copy)]
pub struct EntireTrig {
    pub c: Complex64,
    pub s: Complex64,
    pub hc: Complex64,
}

/// Evaluate c(z), s(z), hc(z) for complex z.
pub fn entire_trig(z: Complex64) -> EntireTrig {
    if z.norm() < SERIES_CUTOFF {
        // Leading terms of the even power series; the first neglected term is
        // O(z^4 / 9!), far below f64 precision at |z| < 1e-6.
        let c = Complex64::new(1.0, 0.0) - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
        let s = Complex64::new(1.0, 0.0) - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0;
        let hc = Complex64::new(0.5, 0.0) - z / 24.0 + z * z / 720.0 - z * z * z / 40320.0;
        return EntireTrig { c, s, hc };
    }
    let w = z.sqrt();
    let c = w.cos();
    let s = w.sin() / w;
    let hc = (Complex64::new(1.0, 0.0) - c) / z;
    EntireTrig { c, s, hc }
}

/// Real-argument convenience wrapper; the imaginary parts are identically
/// zero for real input.
pub fn entire_trig_re(z: f64) -> (f64, f64, f64) {
    let e = entire_trig(Complex64::new(z, 0.0));
    (e.c.re, e.s.re, e.hc.re)
}

/// c(z) alone.
pub fn cfn(z: Complex64) -> Complex64 {
    entire_trig(z).c
}

/// s(z) alone.
pub fn sfn(z: Complex64) -> Complex64 {
    entire_trig(z).s
}

/// j1(z) = (1 - s(z)) / z, entire; appears in the first boundary row.
pub fn j1fn(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        Complex64::new(1.0 / 6.0, 0.0) - z / 120.0 + z * z / 5040.0
    } else {
        (Complex64::new(1.0, 0.0) - sfn(z)) / z
    }
}

/// j2(z) = (s(z) - c(z)) / z, entire; appears in the second boundary row.
pub fn j2fn(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        Complex64::new(1.0 / 3.0, 0.0) - z / 30.0 + z * z / 840.0
    } else {
        let e = entire_trig(z);
        (e.s - e.c) / z
    }
}

/// Derivatives with respect to z: c' = -s/2, s' = (c - s)/(2z),
/// hc' = (s/2 - hc)/z, each with a series fallback near z = 0.
pub fn entire_trig_prime(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let e = entire_trig(z);
    let cp = -e.s / 2.0;
    let (sp, hcp) = if z.norm() < SERIES_CUTOFF {
        (
            Complex64::new(-1.0 / 6.0, 0.0) + z / 60.0 - z * z / 1680.0,
            Complex64::new(-1.0 / 24.0, 0.0) + z / 360.0 - z * z / 13440.0,
        )
    } else {
        ((e.c - e.s) / (2.0 * z), (e.s / 2.0 - e.hc) / z)
    };
    (cp, sp, hcp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(z: f64) -> Complex64 {
        Complex64::new(z, 0.0)
    }

    #[test]
    fn at_zero() {
        let (c, s, hc) = entire_trig_re(0.0);
        assert_eq!(c, 1.0);
        assert_eq!(s, 1.0);
        assert_eq!(hc, 0.5);
    }

    #[test]
    fn at_pi_squared() {
        let (c, s, hc) = entire_trig_re(PI * PI);
        assert!((c + 1.0).abs() < 1e-15);
        assert!(s.abs() < 1e-15);
        assert!((hc - 2.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_at_minus_one() {
        // Frozen against a high-precision evaluation of the hyperbolic forms.
        let (c, s, hc) = entire_trig_re(-1.0);
        assert!((c - 1.543_080_634_815_243_7).abs() < 1e-15);
        assert!((s - 1.175_201_193_643_801_4).abs() < 1e-15);
        assert!((hc - 0.543_080_634_815_243_71).abs() < 1e-15);
    }

    #[test]
    fn series_matches_closed_form_at_cutoff() {
        for &z in &[9e-7, -9e-7, 1.1e-6, -1.1e-6] {
            let e = entire_trig(re(z));
            let w = re(z).sqrt();
            assert!((e.c - w.cos()).norm() < 1e-15);
            assert!((e.s - w.sin() / w).norm() < 1e-15);
        }
    }

    #[test]
    fn j_functions_match_definitions() {
        let z = re(2.3);
        let e = entire_trig(z);
        assert!((j1fn(z) - (re(1.0) - e.s) / z).norm() < 1e-15);
        assert!((j2fn(z) - (e.s - e.c) / z).norm() < 1e-15);
        // small-argument series continuity
        assert!((j1fn(re(0.0)).re - 1.0 / 6.0).abs() < 1e-15);
        assert!((j2fn(re(0.0)).re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &z0 in &[1.7f64, -2.4, 30.0] {
            let h = 1e-6 * z0.abs().max(1.0);
            let ep = entire_trig(re(z0 + h));
            let em = entire_trig(re(z0 - h));
            let (cp, sp, hcp) = entire_trig_prime(re(z0));
            assert!((cp.re - (ep.c - em.c).re / (2.0 * h)).abs() < 1e-7);
            assert!((sp.re - (ep.s - em.s).re / (2.0 * h)).abs() < 1e-7);
            assert!((hcp.re - (ep.hc - em.hc).re / (2.0 * h)).abs() < 1e-7);
        }
    }
}
