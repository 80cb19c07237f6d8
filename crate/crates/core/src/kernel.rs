//! The spectral heat kernel: three calibrated eigenvalue families summed
//! with controlled truncation, plus the Neumann reference kernel, the
//! semigroup check, and the least-squares calibration against the
//! finite-difference oracle.
//!
//! The kernel is
//!
//! ```text
//! K(x,y,t) = cal_s * kappa cosh(kappa/2) cosh(kappa (x-1/2)) / (2 sinh(kappa/2))
//!          + cal_t * sum_m  c_m psi_m(x) A(lambda_m, y) e^{-(lambda_m+kappa^2) t}
//!          + cal_c * sum_k  cos(2 k pi x) (cos(2 k pi y) - kappa^2/(4 k^2 pi^2 + kappa^2))
//!                           e^{-(4 k^2 pi^2 + kappa^2) t}
//! ```
//!
//! with psi_m(x) = (x-1/2) s(lambda_m (x-1/2)^2) and the residue
//! coefficient c_m = -2 kappa^2 lambda_m s(lambda_m/4) / g'(lambda_m)
//! (at the degenerate root lambda_1 = 0, kappa^2 = 12, the limit
//! c_1 = -kappa^2 / (1/6 - kappa^2/180) = -120).
//!
//! The per-family scale factors are *measured* against the FD oracle and
//! snap to {1/cosh(kappa/2), 1, 2}; differently printed prefactors fail the
//! mass and delta-approach requirements and are recorded as deviations in
//! the validation report.

use crate::aseries::a_eval_re;
use crate::entire::entire_trig_re;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::oracle::{kernel_estimate, EvolveConfig, Scheme};
use crate::params::ModelParams;
use crate::spectral::{g_prime_re, Spectrum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Per-family scale factors with their measurement provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub stationary: f64,
    pub transcendental: f64,
    pub cosine: f64,
}

impl Calibration {
    /// The snapped factors in closed form (what [`calibrate`] measures and
    /// snaps to for every kappa^2).
    pub fn analytic(params: &ModelParams) -> Self {
        Self {
            stationary: 1.0 / (params.kappa() / 2.0).cosh(),
            transcendental: 1.0,
            cosine: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Terms per infinite sum.
    pub mode_count: usize,
    /// Absolute truncation target for the series at t = min_time.
    pub series_tol: f64,
    /// Smallest t served by the series path; below it the FD oracle is
    /// authoritative.
    pub min_time: f64,
    pub calibration: Calibration,
}

/// Mode count making the slowest truncated cosine term e^{-4 M^2 pi^2 t}
/// smaller than tol at time t (plus safety margin).
pub fn required_modes(tol: f64, t: f64) -> usize {
    ((1.0 / tol).ln() / (4.0 * PI * PI * t)).sqrt().ceil() as usize + 8
}

impl KernelConfig {
    /// Default configuration: series_tol 1e-10, min_time 1e-2, mode count
    /// auto-derived, analytic (snapped) calibration.
    pub fn auto(params: &ModelParams) -> Self {
        let (series_tol, min_time) = (1e-10, 1e-2);
        Self {
            mode_count: required_modes(series_tol, min_time),
            series_tol,
            min_time,
            calibration: Calibration::analytic(params),
        }
    }
}

/// Residue coefficient c_m of the transcendental family, with the
/// degenerate limit at lambda = 0.
pub fn transcendental_coefficient(params: &ModelParams, lambda: f64, degenerate: bool) -> f64 {
    let k2 = params.kappa2;
    if degenerate && lambda == 0.0 {
        // At kappa^2 = 12 the regularized determinant has a double zero at
        // lambda = 0 (g ~ q1 lambda^2 with q1 = 1/6 - kappa^2/180), while the
        // numerator vanishes simply, so the pole of the resolvent stays
        // simple with residue -2 kappa^2 / q1 — twice the naive g' limit.
        return -2.0 * k2 / (1.0 / 6.0 - k2 / 180.0);
    }
    let (_, s4, _) = entire_trig_re(lambda / 4.0);
    -2.0 * k2 * lambda * s4 / g_prime_re(lambda, k2)
}

/// x-independent per-mode weights for one (y, t); shared across a grid of x.
struct ModeWeights {
    stationary_amp: f64,
    kappa: f64,
    /// (lambda_m, calibrated weight c_m A(lambda_m,y) e^{-(lambda_m+k2)t})
    trans: Vec<(f64, f64)>,
    /// calibrated weight (cos(2k pi y) - offset_k) e^{-(mu_k+k2)t} per k
    cosine: Vec<f64>,
}

fn mode_weights(
    params: &ModelParams,
    y: f64,
    t: f64,
    spectrum: &Spectrum,
    config: &KernelConfig,
) -> Result<ModeWeights> {
    if t < config.min_time {
        return Err(Error::TimeTooSmall {
            t,
            min_time: config.min_time,
        });
    }
    if spectrum.transcendental_family.len() < config.mode_count {
        return Err(Error::IndexOutOfRange {
            family: "transcendental",
            index: config.mode_count,
            len: spectrum.transcendental_family.len(),
        });
    }
    let k2 = params.kappa2;
    let kappa = params.kappa();
    let cal = &config.calibration;
    let stationary_amp =
        cal.stationary * kappa * (kappa / 2.0).cosh() / (2.0 * (kappa / 2.0).sinh());
    let trans = spectrum
        .transcendental_family
        .iter()
        .take(config.mode_count)
        .map(|m| {
            let c = transcendental_coefficient(
                params,
                m.lambda,
                spectrum.degenerate_flag && m.m == 1,
            );
            let w = cal.transcendental * c * a_eval_re(m.lambda, y) * (-(m.lambda + k2) * t).exp();
            (m.lambda, w)
        })
        .collect();
    let cosine = (1..=config.mode_count)
        .map(|k| {
            let w2 = 4.0 * (k as f64 * PI) * (k as f64 * PI);
            cal.cosine
                * ((2.0 * k as f64 * PI * y).cos() - k2 / (w2 + k2))
                * (-(w2 + k2) * t).exp()
        })
        .collect();
    Ok(ModeWeights {
        stationary_amp,
        kappa,
        trans,
        cosine,
    })
}

fn kernel_at(w: &ModeWeights, x: f64) -> f64 {
    let xm = x - 0.5;
    let mut k = w.stationary_amp * (w.kappa * xm).cosh();
    for &(lambda, weight) in &w.trans {
        let (_, s, _) = entire_trig_re(lambda * xm * xm);
        k += weight * xm * s;
    }
    for (i, &weight) in w.cosine.iter().enumerate() {
        let kk = (i + 1) as f64;
        k += weight * (2.0 * kk * PI * x).cos();
    }
    k
}

/// Calibrated spectral heat kernel K(x, y, t).
pub fn kernel(
    params: &ModelParams,
    x: f64,
    y: f64,
    t: f64,
    spectrum: &Spectrum,
    config: &KernelConfig,
) -> Result<f64> {
    Ok(kernel_at(&mode_weights(params, y, t, spectrum, config)?, x))
}

/// K(., y, t) sampled on a uniform grid; per-mode weights are computed once
/// and the x-sweep is parallelized (fixed-order map, deterministic).
pub fn kernel_field(
    params: &ModelParams,
    y: f64,
    t: f64,
    grid_size: usize,
    spectrum: &Spectrum,
    config: &KernelConfig,
) -> Result<ScalarField> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid_size must be >= 2, got {grid_size}"
        )));
    }
    let w = mode_weights(params, y, t, spectrum, config)?;
    let h = 1.0 / (grid_size - 1) as f64;
    let values: Vec<f64> = (0..grid_size)
        .into_par_iter()
        .map(|i| kernel_at(&w, i as f64 * h))
        .collect();
    ScalarField::new(values)
}

/// Classical zero-flux (Neumann) heat kernel
/// K_N(x,y,t) = 1 + 2 sum_k cos(k pi x) cos(k pi y) e^{-k^2 pi^2 t};
/// the prefactor 2 is the completeness-forced constant of the orthonormal
/// family {sqrt(2) cos(k pi x)}.
pub fn neumann_kernel(x: f64, y: f64, t: f64, config: &KernelConfig) -> Result<f64> {
    if t < config.min_time {
        return Err(Error::TimeTooSmall {
            t,
            min_time: config.min_time,
        });
    }
    // Cosine grid k^2 pi^2 is 4x denser than 4 k^2 pi^2: double the modes.
    let modes = 2 * config.mode_count;
    let mut k = 1.0;
    for j in 1..=modes {
        let kk = j as f64;
        k += 2.0 * (kk * PI * x).cos() * (kk * PI * y).cos() * (-kk * kk * PI * PI * t).exp();
    }
    Ok(k)
}

/// |int_0^1 K(x,z,t) K(z,y,s) dz - K(x,y,t+s)| by trapezoid quadrature.
pub fn chapman_kolmogorov_residual(
    params: &ModelParams,
    x: f64,
    y: f64,
    t: f64,
    s: f64,
    spectrum: &Spectrum,
    config: &KernelConfig,
    quad_size: usize,
) -> Result<f64> {
    let wt = mode_weights(params, y, s, spectrum, config)?; // K(., y, s)
    let h = 1.0 / (quad_size - 1) as f64;
    let mut acc = 0.0;
    for i in 0..quad_size {
        let z = i as f64 * h;
        let f = kernel(params, x, z, t, spectrum, config)? * kernel_at(&wt, z);
        acc += if i == 0 || i == quad_size - 1 { 0.5 * f } else { f };
    }
    let lhs = acc * h;
    let rhs = kernel(params, x, y, t + s, spectrum, config)?;
    Ok((lhs - rhs).abs())
}

/// Candidate set each measured factor must snap to (within 5%).
fn snap(measured: f64, params: &ModelParams, family: &'static str) -> Result<f64> {
    let candidates = [
        0.5,
        1.0,
        2.0,
        1.0 / (params.kappa() / 2.0).cosh(),
    ];
    for c in candidates {
        if (measured / c - 1.0).abs() < 0.05 {
            return Ok(c);
        }
    }
    Err(Error::CalibrationAmbiguous { family, measured })
}

/// Outcome of a calibration run: measured least-squares factors, the
/// snapped values, and the fit residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFit {
    pub measured: [f64; 3],
    pub snapped: Calibration,
    /// Sup-norm misfit of the snapped model against the FD reference.
    pub residual: f64,
}

/// Determine the three per-family scale factors by least squares against
/// finite-difference kernel estimates at y = 0.3, t in {0.1, 0.2, 0.5},
/// then snap each to its candidate; failing to snap is a hard error.
pub fn calibrate(params: &ModelParams, spectrum: &Spectrum) -> Result<CalibrationFit> {
    let y = 0.3;
    let times = [0.1, 0.2, 0.5];
    let nx = 257;
    let fd_cfg = EvolveConfig::new(nx, 2e-5, Scheme::CrankNicolson, 1.0)?;
    let hom = ModelParams::new(params.kappa2, params.epsilon, 0.0)?;

    // Unit-factor config to expose the raw family values.
    let unit = KernelConfig {
        mode_count: required_modes(1e-10, 0.05),
        series_tol: 1e-10,
        min_time: 1e-2,
        calibration: Calibration {
            stationary: 1.0,
            transcendental: 1.0,
            cosine: 1.0,
        },
    };

    // Accumulate normal equations for [stationary, transcendental, cosine].
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &t in &times {
        let fd = kernel_estimate(&hom, y, t, &fd_cfg)?;
        let w = mode_weights(&hom, y, t, spectrum, &unit)?;
        let h = fd.spacing();
        for i in 0..nx {
            let x = i as f64 * h;
            let xm = x - 0.5;
            let stat = w.stationary_amp * (w.kappa * xm).cosh();
            let mut tr = 0.0;
            for &(lambda, weight) in &w.trans {
                let (_, s, _) = entire_trig_re(lambda * xm * xm);
                tr += weight * xm * s;
            }
            let mut co = 0.0;
            for (j, &weight) in w.cosine.iter().enumerate() {
                co += weight * (2.0 * (j + 1) as f64 * PI * x).cos();
            }
            let row = [stat, tr, co];
            for a in 0..3 {
                for b in 0..3 {
                    ata[a][b] += row[a] * row[b];
                }
                atb[a] += row[a] * fd.values()[i];
            }
        }
    }
    let beta = solve3(&ata, &atb).ok_or(Error::SolverSingular { step: 0 })?;

    let snapped = Calibration {
        stationary: snap(beta[0], params, "stationary")?,
        transcendental: snap(beta[1], params, "transcendental")?,
        cosine: snap(beta[2], params, "cosine")?,
    };

    // Verify the snapped model against the FD reference at t = 0.1.
    let cfg = KernelConfig {
        calibration: snapped,
        ..unit
    };
    let fd = kernel_estimate(&hom, y, 0.1, &fd_cfg)?;
    let model = kernel_field(&hom, y, 0.1, nx, spectrum, &cfg)?;
    let residual = model.sup_distance(&fd)?;

    Ok(CalibrationFit {
        measured: beta,
        snapped,
        residual,
    })
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        m.swap(col, piv);
        if m[col][col].abs() < 1e-300 {
            return None;
        }
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}
