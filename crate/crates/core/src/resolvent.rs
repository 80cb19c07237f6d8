//! The Neumann resolvent, the coefficient solve for the non-local problem,
//! the closed-form resolvent, and the finite-difference boundary-value
//! oracle that anchors all of them.
//!
//! All evaluation is branch-free: every sqrt(lambda) occurrence goes through
//! the entire functions of [`crate::entire`].
//!
//! Calibrated normalizations (frozen; surfaced in the validation report):
//! the Neumann resolvent eigen-expansion is
//!
//! ```text
//! R_N(lambda,x,y) = -1/lambda + 2 sum_{k>=1} cos(k pi x) cos(k pi y)
//!                                            / (k^2 pi^2 - lambda),
//! ```
//!
//! equivalently in closed form
//!
//! ```text
//! R_N = -c(lambda x_<^2) c(lambda (1-x_>)^2) / (lambda s(lambda)),
//! ```
//!
//! the unique normalization satisfying R'' + lambda R + delta(x-y) = 0 with
//! zero-flux ends (verified against the discrete oracle; differently printed
//! prefactors +1/lambda and 1/2 do not satisfy the defining equation).

use crate::aseries::{a_eval, relative_pole_distance, POLE_GUARD};
use crate::entire::{cfn, entire_trig, j1fn, j2fn, sfn};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::params::ModelParams;
use crate::spectral::det_regularized;
use num_complex::Complex64;
use std::f64::consts::PI;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Relative distance from lambda to the nearest pole of the Neumann
/// resolvent's closed form: 0 and the full cosine grid k^2 pi^2.
pub fn neumann_pole_distance(lambda: Complex64) -> f64 {
    let mut best = lambda.norm().min(1.0); // pole at 0, absolute distance capped
    let r = (lambda.norm() / (PI * PI)).sqrt();
    let centre = r.round().max(1.0) as i64;
    for k in (centre - 1).max(1)..=centre + 1 {
        let pole = PI * PI * (k * k) as f64;
        best = best.min((lambda - re(pole)).norm() / pole);
    }
    best
}

/// Closed-form Neumann resolvent (zero-flux Green function of
/// d^2/dx^2 + lambda).
pub fn neumann_resolvent(lambda: Complex64, x: f64, y: f64, _tol: f64) -> Result<Complex64> {
    if neumann_pole_distance(lambda) < POLE_GUARD {
        return Err(Error::NearSeriesPole {
            lambda: lambda.re,
            pole: PI * PI * ((lambda.norm() / (PI * PI)).sqrt().round().max(1.0)).powi(2),
            guard: POLE_GUARD,
        });
    }
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let num = cfn(lambda * lo * lo) * cfn(lambda * (1.0 - hi) * (1.0 - hi));
    Ok(-num / (lambda * sfn(lambda)))
}

/// Eigen-expansion of the Neumann resolvent (calibrated constants -1/lambda
/// and 2; self-check companion to the closed form).
pub fn neumann_resolvent_series(lambda: Complex64, x: f64, y: f64, tol: f64) -> Result<Complex64> {
    if neumann_pole_distance(lambda) < POLE_GUARD {
        return Err(Error::NearSeriesPole {
            lambda: lambda.re,
            pole: 0.0,
            guard: POLE_GUARD,
        });
    }
    let tol = tol.max(1e-15);
    let mut sum = -1.0 / lambda;
    let lam_norm = lambda.norm();
    let mut k = 1u64;
    loop {
        let kk = k as f64;
        let mu = kk * kk * PI * PI;
        sum += 2.0 * (kk * PI * x).cos() * (kk * PI * y).cos() / (re(mu) - lambda);
        // Tail of sum 2/(k^2 pi^2 - |lambda|) once past 2|lambda| is below
        // 4/(pi^2 k).
        if mu > 2.0 * lam_norm && 4.0 / (PI * PI * kk) < tol * kk {
            break;
        }
        k += 1;
        if k > 100_000_000 {
            break;
        }
    }
    Ok(sum)
}

/// The two weighted moments of the Neumann resolvent that the non-local
/// boundary rows consume:
///
/// ```text
/// P = int_0^1 (1-s) R_N(lambda,s,y) ds = -1/(2 lambda) + 2 A(lambda, y)
/// Q = int_0^1    s  R_N(lambda,s,y) ds = -1/(2 lambda) - 2 A(lambda, y)
/// ```
pub fn neumann_moments(lambda: Complex64, y: f64) -> Result<(Complex64, Complex64)> {
    if relative_pole_distance(lambda) < POLE_GUARD || lambda.norm() < POLE_GUARD {
        return Err(Error::NearSeriesPole {
            lambda: lambda.re,
            pole: 0.0,
            guard: POLE_GUARD,
        });
    }
    let a = a_eval(lambda, y);
    let base = -1.0 / (2.0 * lambda);
    Ok((base + 2.0 * a, base - 2.0 * a))
}

/// Basis functions added to R_N to meet the non-local boundary conditions:
/// S(x) = x s(lambda x^2) = sin(sqrt(lambda) x)/sqrt(lambda) and
/// C(x) = c(lambda x^2) = cos(sqrt(lambda) x).
pub fn basis_s(lambda: Complex64, x: f64) -> Complex64 {
    x * sfn(lambda * x * x)
}

/// See [`basis_s`].
pub fn basis_c(lambda: Complex64, x: f64) -> Complex64 {
    cfn(lambda * x * x)
}

/// Coefficients (a, b) so that R = R_N + a S + b C satisfies the non-local
/// boundary rows, obtained from the 2x2 system
///
/// ```text
/// [ 1 + k2 j1(lambda)      k2 hc(lambda)                          ] [a]
/// [ c(lambda) - k2 j2      -(lambda s + k2 s - k2 hc)             ] [b]
///     = ( -k2 P , k2 Q )
/// ```
///
/// whose determinant equals D(lambda)/lambda with D the regularized
/// characteristic determinant, so the solve fails exactly at eigenvalues.
pub fn ab_coefficients(
    lambda: Complex64,
    y: f64,
    params: &ModelParams,
    tol: f64,
) -> Result<(Complex64, Complex64)> {
    let k2 = params.kappa2;
    let e = entire_trig(lambda);
    let (j1, j2) = (j1fn(lambda), j2fn(lambda));
    let (p, q) = neumann_moments(lambda, y)?;

    let n11 = re(1.0) + k2 * j1;
    let n12 = k2 * e.hc;
    let n21 = e.c - k2 * j2;
    let n22 = -(lambda * e.s + k2 * e.s - k2 * e.hc);
    let r1 = -k2 * p;
    let r2 = k2 * q;

    let det_n = n11 * n22 - n12 * n21;
    let scale = (1.0 + lambda.norm()).sqrt();
    if det_n.norm() < 1e-10 * scale {
        return Err(Error::SingularSystem { lambda: lambda.re });
    }
    let a = (r1 * n22 - n12 * r2) / det_n;
    let b = (n11 * r2 - r1 * n21) / det_n;

    // Back-substitution self-check.
    let res1 = (n11 * a + n12 * b - r1).norm();
    let res2 = (n21 * a + n22 * b - r2).norm();
    let rhs_scale = r1.norm().max(r2.norm()).max(1.0);
    debug_assert!(res1 < tol.max(1e-9) * rhs_scale && res2 < tol.max(1e-9) * rhs_scale);

    Ok((a, b))
}

/// Correction R - R_N in closed form. The two building blocks are
///
/// ```text
/// t_A = kappa^2 (lambda/2) s(lambda/4) A(lambda,y) (lambda + kappa^2)
///       (1/2 - x) s(lambda (x-1/2)^2) / D(lambda)
/// t_C = kappa^2 c(lambda (x-1/2)^2) / (lambda (lambda + kappa^2) s(lambda/4))
/// ```
///
/// and the correction is `-4 t_A + t_C`. The scalars (-4 and the sign of
/// t_C) are calibrated against the coefficient solve — exact agreement to
/// 1e-13 at real and complex probes — replacing differently printed
/// prefactors; the deviation is ledgered in the validation report.
pub fn resolvent_correction(
    lambda: Complex64,
    x: f64,
    y: f64,
    params: &ModelParams,
) -> Result<Complex64> {
    let k2 = params.kappa2;
    let d = det_regularized(lambda, params);
    let scale = (1.0 + lambda.norm()).powf(1.5);
    if d.norm() < 1e-10 * scale || lambda.norm() < POLE_GUARD {
        return Err(Error::SingularSystem { lambda: lambda.re });
    }
    let s4 = sfn(lambda / 4.0);
    let a = a_eval(lambda, y);
    let xm = x - 0.5;
    let sx = -xm * sfn(lambda * xm * xm);
    let cx = cfn(lambda * xm * xm);
    let t_a = k2 * (lambda / 2.0) * s4 * a * (lambda + k2) * sx / d;
    let t_c = k2 * cx / (lambda * (lambda + k2) * s4);
    Ok(-4.0 * t_a + t_c)
}

/// Resolvent of the non-local problem: R = R_N + closed-form correction.
/// Satisfies R'' + lambda R + delta(x-y) = 0 together with the non-local
/// boundary rows (anchored by [`resolvent_bvp_oracle`]).
pub fn resolvent(
    lambda: Complex64,
    x: f64,
    y: f64,
    params: &ModelParams,
    _tol: f64,
) -> Result<Complex64> {
    let rn = neumann_resolvent(lambda, x, y, _tol)?;
    Ok(rn + resolvent_correction(lambda, x, y, params)?)
}

/// Resolvent assembled from the coefficient solve, R_N + a S + b C;
/// algebraically identical to [`resolvent`] and kept as a self-check.
pub fn resolvent_from_coefficients(
    lambda: Complex64,
    x: f64,
    y: f64,
    params: &ModelParams,
    tol: f64,
) -> Result<Complex64> {
    let rn = neumann_resolvent(lambda, x, y, tol)?;
    let (a, b) = ab_coefficients(lambda, y, params, tol)?;
    Ok(rn + a * basis_s(lambda, x) + b * basis_c(lambda, x))
}

/// Ground-truth discrete solve of R'' + lambda R = -delta(x - y) with the
/// non-local boundary rows
///
/// ```text
/// R'(0) + k2 int_0^1 (1-s) R(s) ds = 0
/// R'(1) - k2 int_0^1    s  R(s) ds = 0
/// ```
///
/// Interior: centered second differences. Delta source: mass split linearly
/// between the two neighboring nodes (keeps second order for y off the
/// grid). Boundary rows: second-order one-sided derivative stencils plus
/// trapezoid weights over all unknowns.
///
/// Solved in O(n): the matrix is tridiagonal except for the two dense
/// boundary rows, which are peeled off by a rank-2 Woodbury correction
/// around a tridiagonal core whose first and last rows are identity.
pub fn resolvent_bvp_oracle(
    lambda: f64,
    y: f64,
    params: &ModelParams,
    grid_size: usize,
) -> Result<ScalarField> {
    let n = grid_size;
    if n < 64 {
        return Err(Error::InvalidParameter(format!(
            "grid_size must be >= 64, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::InvalidParameter(format!("y must be in [0,1], got {y}")));
    }
    let k2 = params.kappa2;
    let h = 1.0 / (n - 1) as f64;

    // Right-hand side: -delta(x - y) with linear mass splitting.
    let mut b = vec![0.0f64; n];
    let j = ((y / h) as usize).min(n - 2);
    let th = y / h - j as f64;
    b[j] = -(1.0 - th) / h;
    b[j + 1] = -th / h;

    // Dense boundary rows r0, r1 of the full matrix.
    let mut r0 = vec![0.0f64; n];
    let mut r1 = vec![0.0f64; n];
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { h / 2.0 } else { h };
        let x = i as f64 * h;
        r0[i] = k2 * w * (1.0 - x);
        r1[i] = -k2 * w * x;
    }
    r0[0] += -1.5 / h;
    r0[1] += 2.0 / h;
    r0[2] += -0.5 / h;
    r1[n - 1] += 1.5 / h;
    r1[n - 2] += -2.0 / h;
    r1[n - 3] += 0.5 / h;

    // Tridiagonal core T: identity first/last rows, centered interior.
    let solve_t = |rhs: &[f64]| -> Result<Vec<f64>> {
        let mut c = vec![0.0f64; n]; // modified superdiagonal
        let mut d = vec![0.0f64; n]; // modified rhs
        c[0] = 0.0;
        d[0] = rhs[0];
        for i in 1..n - 1 {
            let (a_i, b_i, c_i) = (1.0 / (h * h), -2.0 / (h * h) + lambda, 1.0 / (h * h));
            let den = b_i - a_i * c[i - 1];
            if den.abs() < 1e-300 {
                return Err(Error::SingularDiscreteSystem);
            }
            c[i] = c_i / den;
            d[i] = (rhs[i] - a_i * d[i - 1]) / den;
        }
        d[n - 1] = rhs[n - 1];
        let mut x = vec![0.0f64; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        Ok(x)
    };

    // Woodbury: M = T + e0 (r0 - e0)^T + e_{n-1} (r1 - e_{n-1})^T.
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let mut e1 = vec![0.0; n];
    e1[n - 1] = 1.0;
    let z0 = solve_t(&e0)?;
    let z1 = solve_t(&e1)?;
    let zb = solve_t(&b)?;

    let mut v0 = r0.clone();
    v0[0] -= 1.0;
    let mut v1 = r1.clone();
    v1[n - 1] -= 1.0;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    // Capacitance I + V^T Z (2x2).
    let c11 = 1.0 + dot(&v0, &z0);
    let c12 = dot(&v0, &z1);
    let c21 = dot(&v1, &z0);
    let c22 = 1.0 + dot(&v1, &z1);
    let det_c = c11 * c22 - c12 * c21;
    if det_c.abs() < 1e-12 {
        return Err(Error::SingularDiscreteSystem);
    }
    let g0 = dot(&v0, &zb);
    let g1 = dot(&v1, &zb);
    let s0 = (c22 * g0 - c12 * g1) / det_c;
    let s1 = (c11 * g1 - c21 * g0) / det_c;

    let u: Vec<f64> = (0..n).map(|i| zb[i] - z0[i] * s0 - z1[i] * s1).collect();
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularDiscreteSystem);
    }
    ScalarField::new(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::quad_simpson;

    #[test]
    fn neumann_symmetry_and_series_agreement() {
        let tol = 1e-12;
        for &l in &[-1.0, 1.7, 30.1] {
            let lam = re(l);
            let a = neumann_resolvent(lam, 0.3, 0.7, tol).unwrap();
            let b = neumann_resolvent(lam, 0.7, 0.3, tol).unwrap();
            assert!((a - b).norm() < 1e-14);
            let s = neumann_resolvent_series(lam, 0.3, 0.7, 1e-13).unwrap();
            assert!((a - s).norm() < 1e-10, "l={l}: {a} vs {s}");
        }
    }

    #[test]
    fn neumann_resolvent_solves_ode() {
        // Second difference of the closed form reproduces -lambda R away
        // from the source point.
        let l = re(-2.0);
        let (x, y, h) = (0.3, 0.7, 1e-4);
        let r = |x: f64| neumann_resolvent(l, x, y, 1e-12).unwrap().re;
        let d2 = (r(x + h) - 2.0 * r(x) + r(x - h)) / (h * h);
        assert!((d2 + l.re * r(x)).abs() < 1e-5);
    }

    #[test]
    fn moment_identities_by_quadrature() {
        for &(l, y) in &[(1.7, 0.3), (-2.0, 0.6), (30.1, 0.85)] {
            let lam = re(l);
            let (p, q) = neumann_moments(lam, y).unwrap();
            let pq = quad_simpson(4001, |s| {
                (1.0 - s) * neumann_resolvent(lam, s, y, 1e-12).unwrap().re
            });
            let qq =
                quad_simpson(4001, |s| s * neumann_resolvent(lam, s, y, 1e-12).unwrap().re);
            assert!((p.re - pq).abs() < 1e-8, "P l={l} y={y}");
            assert!((q.re - qq).abs() < 1e-8, "Q l={l} y={y}");
        }
    }

    #[test]
    fn ab_back_substitution() {
        let p = ModelParams::homogeneous(1.0).unwrap();
        // Residual checked inside ab_coefficients via debug_assert; also
        // verify the y = 1/2 reduction where the A-driven parts vanish.
        let (a, b) = ab_coefficients(re(2.0), 0.3, &p, 1e-10).unwrap();
        assert!(a.norm().is_finite() && b.norm().is_finite());
        let (a5, _b5) = ab_coefficients(re(2.0), 0.5, &p, 1e-10).unwrap();
        let (a5m, _) = ab_coefficients(re(2.0), 0.5 - 1e-12, &p, 1e-10).unwrap();
        assert!((a5 - a5m).norm() < 1e-9);
    }

    #[test]
    fn singular_at_eigenvalues() {
        let p = ModelParams::homogeneous(1.0).unwrap();
        let mu = (2.0 * PI) * (2.0 * PI);
        assert!(matches!(
            ab_coefficients(re(mu), 0.3, &p, 1e-10),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn closed_correction_matches_coefficient_solve() {
        for &k2 in &[1.0, 4.0] {
            let p = ModelParams::homogeneous(k2).unwrap();
            for &l in &[
                Complex64::new(2.0, 0.0),
                Complex64::new(-2.0 * k2, 0.0),
                Complex64::new(30.1, 0.0),
                Complex64::new(3.0, 7.0),
            ] {
                for &(x, y) in &[(0.3, 0.7), (0.1, 0.85), (0.23, 0.55)] {
                    let r1 = resolvent(l, x, y, &p, 1e-12).unwrap();
                    let r2 = resolvent_from_coefficients(l, x, y, &p, 1e-12).unwrap();
                    assert!(
                        (r1 - r2).norm() < 1e-10 * r1.norm().max(1.0),
                        "k2={k2} l={l} x={x} y={y}: {r1} vs {r2}"
                    );
                }
            }
        }
    }

    #[test]
    fn resolvent_matches_bvp_oracle() {
        let p = ModelParams::homogeneous(4.0).unwrap();
        let (l, y) = (-8.0, 0.6);
        let field = resolvent_bvp_oracle(l, y, &p, 1025).unwrap();
        for i in [102, 256, 512, 768, 922] {
            let x = field.x(i);
            let r = resolvent(re(l), x, y, &p, 1e-12).unwrap().re;
            assert!(
                (r - field.values()[i]).abs() < 2e-6,
                "x={x}: {r} vs {}",
                field.values()[i]
            );
        }
    }

    #[test]
    fn bvp_oracle_second_order_convergence() {
        let p = ModelParams::homogeneous(1.0).unwrap();
        let (l, y) = (-2.0, 0.6);
        let err = |n: usize| -> f64 {
            let f = resolvent_bvp_oracle(l, y, &p, n).unwrap();
            let mut worst = 0.0f64;
            for j in 1..20 {
                let i = j * (n - 1) / 20;
                let x = f.x(i);
                let r = resolvent(re(l), x, y, &p, 1e-12).unwrap().re;
                worst = worst.max((r - f.values()[i]).abs());
            }
            worst
        };
        let (e1, e2, e3) = (err(257), err(513), err(1025));
        let o1 = (e1 / e2).log2();
        let o2 = (e2 / e3).log2();
        assert!((1.8..=2.2).contains(&o1), "order {o1} ({e1} -> {e2})");
        assert!((1.8..=2.2).contains(&o2), "order {o2} ({e2} -> {e3})");
    }

    #[test]
    fn bvp_delta_jump_is_minus_one() {
        let p = ModelParams::homogeneous(1.0).unwrap();
        let n = 2049;
        let f = resolvent_bvp_oracle(-2.0, 0.5, &p, n).unwrap();
        let h = f.spacing();
        let j = 1024; // node at exactly y = 0.5
        let v = f.values();
        let left = (v[j] - v[j - 1]) / h;
        let right = (v[j + 1] - v[j]) / h;
        assert!((right - left + 1.0).abs() < 1e-2, "jump {}", right - left);
    }
}
