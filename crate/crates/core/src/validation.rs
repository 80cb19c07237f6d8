//! Cross-validation suite: runs every invariant across the spectral,
//! kernel, finite-difference and Monte Carlo layers, collects structured
//! pass/fail records, and carries the discrepancy ledger — the list of
//! places where the measured, oracle-validated constants deviate from
//! commonly printed forms of the same formulas.

use crate::aseries::{a_series, SeriesStart};
use crate::bromwich::{bromwich_kernel, laplace_check, BromwichConfig};
use crate::error::Result;
use crate::field::{quad_simpson, simpson};
use crate::kernel::{
    calibrate, chapman_kolmogorov_residual, kernel, kernel_field, neumann_kernel, Calibration,
    CalibrationFit, KernelConfig,
};
use crate::mc::{l1_distance, simulate_detailed, SimConfig};
use crate::oracle::{
    bc_reduction_check, evolve, evolve_substituted, kernel_estimate, EvolveConfig, Scheme,
};
use crate::params::ModelParams;
use crate::resolvent::{resolvent, resolvent_bvp_oracle};
use crate::spectral::{
    det, det_regularized, dual_eigenfunction, find_eigenvalues, forward_eigenfunction,
    steady_state, Family, Spectrum,
};
use crate::ScalarField;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub target: f64,
    pub achieved: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// true: pass iff achieved <= tolerance (residual style);
    /// false: pass iff |achieved - target| <= tolerance.
    pub residual_check: bool,
    pub notes: String,
}

impl CheckRecord {
    fn residual(name: impl Into<String>, achieved: f64, tolerance: f64, notes: &str) -> Self {
        Self {
            name: name.into(),
            target: 0.0,
            achieved,
            tolerance,
            passed: achieved.abs() <= tolerance,
            residual_check: true,
            notes: notes.to_string(),
        }
    }

    fn value(name: impl Into<String>, target: f64, achieved: f64, tolerance: f64, notes: &str) -> Self {
        Self {
            name: name.into(),
            target,
            achieved,
            tolerance,
            passed: (achieved - target).abs() <= tolerance,
            residual_check: false,
            notes: notes.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub kappa2: f64,
    pub measured: [f64; 3],
    pub snapped: Calibration,
    pub candidates: Vec<f64>,
    pub fit_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub timestamp: String,
    pub params: Vec<ModelParams>,
    pub checks: Vec<CheckRecord>,
    pub calibration: Vec<CalibrationReport>,
    pub discrepancy_ledger: Vec<String>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// UTC ISO-8601 timestamp from the system clock (civil-from-days
/// conversion; proleptic Gregorian).
pub fn iso8601_now() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (h, mi, s) = (rem / 3600, (rem % 3600) / 60, rem % 60);
    // Howard Hinnant's civil_from_days.
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };
    format!("{y:04}-{m:02}-{d:02}T{h:02}:{mi:02}:{s:02}Z")
}

/// The measured deviations from commonly printed forms of the same
/// formulas; every entry is backed by an oracle check in the suite.
pub fn discrepancy_ledger() -> Vec<String> {
    vec![
        "Neumann resolvent prefactors: the eigen-expansion satisfying the defining ODE is \
         -1/lambda + 2*sum (printed versions with +1/lambda and 1/2 fail the BVP oracle)."
            .into(),
        "Neumann heat kernel prefactor: completeness of {sqrt(2) cos(k pi x)} forces the \
         cosine-sum factor 2 (a printed 1/2 loses mass); verified against zero-flux FD evolution."
            .into(),
        "Stationary kernel term: the raw term kappa cosh(kappa/2) cosh(kappa(x-1/2)) / \
         (2 sinh(kappa/2)) integrates to cosh(kappa/2); the calibrated factor 1/cosh(kappa/2) \
         restores unit mass and snaps exactly."
            .into(),
        "A(lambda,y) series start: the sum must start at m = 0; starting at m = 1 (as \
         sometimes printed) omits the fundamental odd-cosine mode and fails the Neumann \
         moment identity int (1-s) R_N = -1/(2 lambda) + 2A."
            .into(),
        "Dual cosine eigenfunction offset: biorthogonality with the ground family forces \
         cos(2 k pi y) - kappa^2/(4 k^2 pi^2 + kappa^2); a printed offset +1/(k pi (4 k^2 \
         pi^2 + kappa^2)) is inconsistent."
            .into(),
        "Transcendental residue coefficient: the FD-validated coefficient is \
         c_m = -2 kappa^2 lambda_m s(lambda_m/4) / g'(lambda_m) with \
         g = 2 kappa^2 hc - (lambda+kappa^2) s; printed coefficients of the form \
         kappa^2 A (sqrt(l)+kappa^2/sqrt(l))/(2 sqrt(l) Det') differ by a non-constant \
         factor and fail the kernel comparison."
            .into(),
        "Root localization: lambda_m lies in ((2m-3)^2 pi^2, (2m-1)^2 pi^2) — one interval \
         below the commonly printed bracket ((2m-1)^2 pi^2, (2m+1)^2 pi^2); lambda_1 lies in \
         (-kappa^2, pi^2) and is negative for kappa^2 > 12 (measured; e.g. kappa^2 = 25 gives \
         lambda_1 = -10.9609...)."
            .into(),
        "Regularized determinant: the entire object is sqrt(lambda)*Det = \
         (lambda + kappa^2)(2 kappa^2 hc(lambda) - (lambda + kappa^2) s(lambda)), not \
         lambda*Det; its leading coefficient at 0 matches (kappa^2/12 - 1) up to the overall \
         factor kappa^2."
            .into(),
        "Steady state amplitude: the profile satisfying the non-local conditions and the FD \
         long-time limit is u(x) = -epsilon kappa^2 V sinh(kappa(x-1/2)) / (2 sinh(kappa/2)); \
         a printed amplitude kappa V / cosh(kappa/2) fails the boundary-residual check."
            .into(),
        "Voltage sign convention: field reconstruction (-epsilon E_x = u, int E = V) selects \
         the -epsilon kappa^2 V placement in both boundary rows; the boundary residual is \
         u_x + epsilon kappa^2 E (not kappa^2 E / epsilon)."
            .into(),
        "Closed-form resolvent correction: the two printed correction terms carry measured \
         scalar factors -4 and -1; with them the closed form agrees with the 2x2 coefficient \
         solve to 1e-13 at real and complex probes."
            .into(),
        "Cosine-family kernel arguments: calibrated to cos(2 k pi x) with decay rate \
         4 k^2 pi^2 + kappa^2 (a printed variant without pi factors and without the kappa^2 \
         shift in the exponent is dimensionally inconsistent)."
            .into(),
        "lambda = 0 is an eigenvalue exactly when kappa^2 = 12 (with eigenfunction x - 1/2); \
         a contradictory statement that 0 is a root only if kappa^2 != 12 is rejected by the \
         Taylor coefficient kappa^2 (kappa^2/12 - 1) of the regularized determinant."
            .into(),
        "Eigenvalue residuals are reported as the Newton-increment backward error |f/f'| of \
         the tan-form equation; the raw forward residual is unattainable in double precision \
         arbitrarily close to the tangent poles where one ulp of the root moves f by more \
         than any fixed tolerance."
            .into(),
        "Degenerate residue at kappa^2 = 12: lambda = 0 is a double zero of the regularized \
         determinant (g ~ q1 lambda^2, q1 = 1/6 - kappa^2/180) while the resolvent numerator \
         vanishes simply, so the mode coefficient is -2 kappa^2 / q1 = -240 — twice the naive \
         g'-limit of the generic residue formula; the factor 2 is measured directly from the \
         FD kernel."
            .into(),
        "Delta-approach check runs at t = 5e-4: at t = 1e-3 the intrinsic smoothing drift of \
         the kernel itself (second moment grows like 2t plus the jump contribution) already \
         exceeds the 2e-3 tolerance, independent of implementation."
            .into(),
    ]
}

fn check_spectrum(k2: f64, count: usize, checks: &mut Vec<CheckRecord>) -> Result<Spectrum> {
    let p = ModelParams::homogeneous(k2)?;
    let s = find_eigenvalues(&p, count)?;

    let max_res = s
        .transcendental_family
        .iter()
        .map(|t| t.residual)
        .fold(0.0, f64::max);
    checks.push(CheckRecord::residual(
        format!("eig_residual_max_k2={k2}"),
        max_res,
        1e-10,
        "max Newton-increment backward error over the transcendental roots",
    ));

    let violations = s
        .transcendental_family
        .iter()
        .filter(|t| !(t.lambda > t.bracket.0 && t.lambda < t.bracket.1))
        .count();
    checks.push(CheckRecord::residual(
        format!("eig_bracket_containment_k2={k2}"),
        violations as f64,
        0.0,
        "roots strictly inside ((2m-3)^2 pi^2, (2m-1)^2 pi^2) (m=1: (-kappa^2, pi^2))",
    ));

    if (k2 - 12.0).abs() < 1e-8 {
        checks.push(CheckRecord::residual(
            "eig_degenerate_lambda1_k2=12",
            s.transcendental_family[0].lambda.abs(),
            1e-8,
            "lambda_1 = 0 at kappa^2 = 12",
        ));
    }

    // Determinant zeros at the analytic families.
    let mut worst = 0.0f64;
    for k in 1..=10 {
        let mu = (2.0 * k as f64 * PI).powi(2);
        worst = worst.max(det(Complex64::new(mu, 0.0), &p)?.norm() / mu.powf(1.5));
    }
    checks.push(CheckRecord::residual(
        format!("det_cosine_zeros_k2={k2}"),
        worst,
        1e-9,
        "scaled |Det((2 k pi)^2)| for k = 1..10",
    ));
    checks.push(CheckRecord::residual(
        format!("det_ground_zero_k2={k2}"),
        det(Complex64::new(-k2, 0.0), &p)?.norm(),
        1e-9,
        "|Det(-kappa^2)|",
    ));

    // Sign scan of the regularized determinant on [-100 kappa^2, 0):
    // besides -kappa^2 (always) there is a second negative root, the
    // transcendental lambda_1, exactly when kappa^2 > 12.
    let mut sign_changes = 0usize;
    let lo = -100.0 * k2;
    let n = 100_000usize;
    let step = -lo / n as f64;
    let mut prev = det_regularized(Complex64::new(lo, 0.0), &p).re;
    for i in 1..=n {
        let x = lo + i as f64 * step;
        if x >= -1e-12 {
            break;
        }
        let cur = det_regularized(Complex64::new(x, 0.0), &p).re;
        if prev == 0.0 || (prev > 0.0) != (cur > 0.0) {
            sign_changes += 1;
        }
        prev = cur;
    }
    let expected = if k2 > 12.0 { 2.0 } else { 1.0 };
    checks.push(CheckRecord::value(
        format!("det_negative_roots_k2={k2}"),
        expected,
        sign_changes as f64,
        0.0,
        "sign changes of the regularized determinant on [-100 kappa^2, 0); \
         the extra root above 12 is the negative lambda_1",
    ));

    Ok(s)
}

/// The frozen off-pole probe sets for the resolvent-vs-oracle comparison
/// (chosen away from -kappa^2, where resolvent-norm amplification would
/// inflate the purely discrete error of the oracle).
pub fn resolvent_probe_lambdas(k2: f64) -> Vec<f64> {
    if (k2 - 4.0).abs() < 0.5 {
        vec![-20.0, -16.0, -12.0, -0.5, 0.7, 1.7, 2.3, 3.1]
    } else {
        vec![-16.0, -12.0, -10.0, -8.0, -6.0, 0.7, 1.7, 3.1]
    }
}

fn check_resolvent(k2: f64, level: Level, checks: &mut Vec<CheckRecord>) -> Result<()> {
    let p = ModelParams::homogeneous(k2)?;
    let lambdas = resolvent_probe_lambdas(k2);
    let ys: Vec<f64> = match level {
        Level::Full => (0..21).map(|j| (j + 1) as f64 / 22.0).collect(),
        Level::Quick => (0..21).step_by(5).map(|j| (j + 1) as f64 / 22.0).collect(),
    };
    let n = 1025usize;
    let mut worst = 0.0f64;
    for &l in &lambdas {
        for &y in &ys {
            let field = resolvent_bvp_oracle(l, y, &p, n)?;
            for j in 0..21 {
                let i = j * (n - 1) / 20;
                let x = field.x(i);
                let r = resolvent(Complex64::new(l, 0.0), x, y, &p, 1e-12)?.re;
                worst = worst.max((r - field.values()[i]).abs());
            }
        }
    }
    checks.push(CheckRecord::residual(
        format!("resolvent_vs_bvp_oracle_k2={k2}"),
        worst,
        1e-6,
        "max abs deviation over the (lambda, y, x) probe grid at n = 1025",
    ));
    Ok(())
}

fn check_a_series_start(checks: &mut Vec<CheckRecord>) -> Result<()> {
    // Moment identity int_0^1 (1-s) R_N(lambda,s,y) ds = -1/(2 lambda) + 2A
    // under both series starts; only m = 0 satisfies it.
    let (l, y) = (Complex64::new(1.7, 0.0), 0.3);
    let lhs = quad_simpson(4001, |s| {
        crate::resolvent::neumann_resolvent(l, s, y, 1e-12).unwrap().re
            * (1.0 - s)
    });
    let m0 = (-1.0 / (2.0 * l) + 2.0 * a_series(l, y, 1e-13, SeriesStart::M0)?).re;
    let m1 = (-1.0 / (2.0 * l) + 2.0 * a_series(l, y, 1e-13, SeriesStart::M1)?).re;
    checks.push(CheckRecord::residual(
        "a_series_start_m0_moment_identity",
        (lhs - m0).abs(),
        1e-8,
        "the m = 0 start satisfies the Neumann moment identity",
    ));
    checks.push(CheckRecord::value(
        "a_series_start_m1_moment_violation",
        1.0,
        if (lhs - m1).abs() > 1e-4 { 1.0 } else { 0.0 },
        0.0,
        "the m = 1 start (rejected) visibly violates the same identity",
    ));
    Ok(())
}

fn check_biorthogonality(k2: f64, count: usize, checks: &mut Vec<CheckRecord>) -> Result<()> {
    let p = ModelParams::homogeneous(k2)?;
    let s = find_eigenvalues(&p, count)?;
    // Enumerate (family, index) pairs: ground, cosine 1..count, trans 1..count.
    let mut members: Vec<(Family, usize)> = vec![(Family::Ground, 0)];
    for k in 1..=count {
        members.push((Family::Cosine, k));
    }
    for m in 1..=count {
        members.push((Family::Transcendental, m));
    }
    let nq = 4001;
    let h = 1.0 / (nq - 1) as f64;
    let mut worst_off = 0.0f64;
    let mut min_diag = f64::INFINITY;
    for &(ff, fi) in &members {
        let fw: Vec<f64> = (0..nq)
            .map(|i| forward_eigenfunction(&s, ff, fi, i as f64 * h).unwrap())
            .collect();
        let fnorm = fw.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        for &(df, di) in &members {
            let du: Vec<f64> = (0..nq)
                .map(|i| dual_eigenfunction(&s, df, di, i as f64 * h).unwrap())
                .collect();
            let dnorm = du.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let prod: Vec<f64> = fw.iter().zip(&du).map(|(a, b)| a * b).collect();
            let pairing = simpson(&prod, h);
            if ff == df && fi == di {
                min_diag = min_diag.min(pairing.abs());
            } else {
                worst_off = worst_off.max(pairing.abs() / (fnorm * dnorm));
            }
        }
    }
    checks.push(CheckRecord::residual(
        format!("biorthogonality_offdiag_k2={k2}"),
        worst_off,
        1e-8,
        "max relative cross pairing over all family/index pairs",
    ));
    checks.push(CheckRecord::value(
        format!("biorthogonality_diag_min_k2={k2}"),
        1.0,
        if min_diag > 1e-4 { 1.0 } else { 0.0 },
        0.0,
        &format!("smallest diagonal pairing {min_diag:.3e} stays above 1e-4"),
    ));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_kernel_suite(
    k2: f64,
    level: Level,
    checks: &mut Vec<CheckRecord>,
    calibrations: &mut Vec<CalibrationReport>,
) -> Result<()> {
    let p = ModelParams::homogeneous(k2)?;
    let cfg = KernelConfig::auto(&p);
    let s = find_eigenvalues(&p, cfg.mode_count)?;

    // Calibration must snap.
    let fit: CalibrationFit = calibrate(&p, &s)?;
    calibrations.push(CalibrationReport {
        kappa2: k2,
        measured: fit.measured,
        snapped: fit.snapped,
        candidates: vec![0.5, 1.0, 2.0, 1.0 / (p.kappa() / 2.0).cosh()],
        fit_residual: fit.residual,
    });
    checks.push(CheckRecord::residual(
        format!("calibration_snap_k2={k2}"),
        fit.residual,
        1e-3,
        &format!(
            "measured factors [{:.4}, {:.4}, {:.4}] snapped to [1/cosh(kappa/2), 1, 2]",
            fit.measured[0], fit.measured[1], fit.measured[2]
        ),
    ));

    // Mass and positivity.
    let mut mass_worst = 0.0f64;
    let mut min_k = f64::INFINITY;
    let times: &[f64] = match level {
        Level::Full => &[1e-2, 0.1, 1.0, 10.0],
        Level::Quick => &[1e-2, 0.1, 1.0],
    };
    for iy in 1..=9 {
        let y = iy as f64 / 10.0;
        for &t in times {
            let f = kernel_field(&p, y, t, 501, &s, &cfg)?;
            // Simpson: plain trapezoid carries an O(h^2 kappa^2) boundary
            // term from the nonzero flux of the stationary profile.
            mass_worst = mass_worst.max((simpson(f.values(), f.spacing()) - 1.0).abs());
            min_k = min_k.min(f.min_value());
        }
    }
    checks.push(CheckRecord::residual(
        format!("kernel_mass_k2={k2}"),
        mass_worst,
        1e-6,
        "|int K dx - 1| over y in {0.1..0.9}, t in {min_time, 0.1, 1, 10}",
    ));
    checks.push(CheckRecord::residual(
        format!("kernel_positivity_k2={k2}"),
        (-min_k).max(0.0),
        1e-9,
        "most negative kernel value on the 501 x 9 grid, t >= 0.01",
    ));

    // Semigroup and long-time limit.
    let ck = chapman_kolmogorov_residual(&p, 0.25, 0.75, 0.1, 0.1, &s, &cfg, 801)?;
    checks.push(CheckRecord::residual(
        format!("chapman_kolmogorov_k2={k2}"),
        ck,
        1e-4,
        "|int K(x,z,t) K(z,y,s) dz - K(x,y,t+s)| at t = s = 0.1",
    ));
    let f1 = kernel_field(&p, 0.2, 20.0, 201, &s, &cfg)?;
    let f2 = kernel_field(&p, 0.8, 20.0, 201, &s, &cfg)?;
    checks.push(CheckRecord::residual(
        format!("kernel_longtime_y_independent_k2={k2}"),
        f1.sup_distance(&f2)?,
        1e-10,
        "sup |K(.,0.2,20) - K(.,0.8,20)|",
    ));

    // Spectral vs FD kernel.
    let (nx, dt, tset): (usize, f64, &[f64]) = match level {
        Level::Full => (1025, 1e-5, &[0.05, 0.1, 0.5]),
        Level::Quick => (513, 5e-5, &[0.1]),
    };
    let ys: &[f64] = match level {
        Level::Full => &[0.25, 0.5, 0.75],
        Level::Quick => &[0.3],
    };
    let fd_cfg = EvolveConfig::new(nx, dt, Scheme::CrankNicolson, 1.0)?;
    let mut worst = 0.0f64;
    for &y in ys {
        for &t in tset {
            let fd = kernel_estimate(&p, y, t, &fd_cfg)?;
            let model = kernel_field(&p, y, t, nx, &s, &cfg)?;
            worst = worst.max(model.sup_distance(&fd)?);
        }
    }
    checks.push(CheckRecord::residual(
        format!("kernel_vs_fd_k2={k2}"),
        worst,
        1e-3,
        "sup-norm distance between the spectral kernel and the FD estimate",
    ));

    // Contour inversion and Laplace identity.
    let b = BromwichConfig::auto(&p);
    let mut bw = 0.0f64;
    let probes: &[(f64, f64, f64)] = match level {
        Level::Full => &[
            (0.4, 0.6, 0.2),
            (0.3, 0.7, 0.1),
            (0.25, 0.5, 0.3),
            (0.6, 0.2, 0.15),
            (0.5, 0.5, 0.2),
        ],
        Level::Quick => &[(0.4, 0.6, 0.2)],
    };
    for &(x, y, t) in probes {
        let kb = bromwich_kernel(&p, x, y, t, &b)?;
        let ks = kernel(&p, x, y, t, &s, &cfg)?;
        bw = bw.max((kb - ks).abs());
    }
    checks.push(CheckRecord::residual(
        format!("bromwich_vs_series_k2={k2}"),
        bw,
        1e-4,
        "contour inversion against the residue sum at the probe points",
    ));
    let mut lp = 0.0f64;
    for &mult in &[-2.0, -4.0] {
        lp = lp.max(laplace_check(
            &p,
            Complex64::new(mult * k2, 0.0),
            0.3,
            0.7,
            &s,
            &cfg,
        )?);
    }
    checks.push(CheckRecord::residual(
        format!("laplace_identity_k2={k2}"),
        lp,
        1e-6,
        "resolvent vs time-quadrature of the kernel at lambda in {-2, -4} kappa^2",
    ));

    // Delta approach via the FD path (t = 5e-4; see ledger).
    let d_cfg = EvolveConfig::new(1025, 2e-5, Scheme::CrankNicolson, 1.0)?;
    let y0 = 0.4;
    let kd = kernel_estimate(&p, y0, 5e-4, &d_cfg)?;
    let h = kd.spacing();
    let vals: Vec<f64> = (0..kd.grid_size())
        .map(|i| kd.values()[i] * (i as f64 * h) * (i as f64 * h))
        .collect();
    let moment = crate::field::trapezoid(&vals, h);
    checks.push(CheckRecord::residual(
        format!("delta_approach_k2={k2}"),
        (moment - y0 * y0).abs(),
        2e-3,
        "int K(x,y,5e-4) x^2 dx against y^2 (smooth test function)",
    ));

    // Neumann kernel against the zero-flux FD evolution.
    if (k2 - 1.0).abs() < 1e-9 {
        let c = EvolveConfig::new(513, 2e-5, Scheme::CrankNicolson, 0.1)?;
        let hh = 1.0 / 512.0;
        let j = (0.3f64 / hh).round() as usize;
        let mut init = vec![0.0; 513];
        init[j] = 1.0 / hh;
        let fd = crate::oracle::neumann_evolve(&ScalarField::new(init)?, &c)?.final_field;
        let yj = j as f64 * hh;
        let model = ScalarField::from_fn(513, |x| neumann_kernel(x, yj, 0.1, &cfg).unwrap())?;
        checks.push(CheckRecord::residual(
            "neumann_kernel_vs_fd",
            model.sup_distance(&fd)?,
            1e-4,
            "zero-flux kernel against FD evolution at t = 0.1",
        ));
    }
    Ok(())
}

fn check_fd_suite(k2: f64, checks: &mut Vec<CheckRecord>) -> Result<()> {
    let p = ModelParams::homogeneous(k2)?;
    let cfg = EvolveConfig::new(257, 1e-3, Scheme::CrankNicolson, 1.0)?;
    let init = ScalarField::from_fn(257, |x| 1.0 + 0.3 * (2.0 * PI * x).cos())?;
    let r = evolve(&p, &init, &cfg)?;
    let m0 = r.mass_trace[0].1;
    let drift = r
        .mass_trace
        .iter()
        .map(|(_, m)| ((m - m0) / m0).abs())
        .fold(0.0, f64::max);
    checks.push(CheckRecord::residual(
        format!("fd_mass_drift_k2={k2}"),
        drift,
        1e-9,
        "relative mass drift over t in [0, 1]",
    ));
    let min_u = r.min_trace.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min);
    checks.push(CheckRecord::residual(
        format!("fd_positivity_k2={k2}"),
        (-min_u).max(0.0),
        1e-12,
        "most negative value from a nonnegative start",
    ));

    // Substitution identity between the damped and undamped evolutions.
    let short = EvolveConfig::new(257, 1e-3, Scheme::CrankNicolson, 0.3)?;
    let u = evolve(&p, &init, &short)?.final_field;
    let v = evolve_substituted(&p, &init, &short)?.final_field;
    let fac = (-k2 * 0.3f64).exp();
    let sub_err = (0..257)
        .map(|i| (u.values()[i] - fac * v.values()[i]).abs())
        .fold(0.0, f64::max);
    checks.push(CheckRecord::residual(
        format!("fd_substitution_identity_k2={k2}"),
        sub_err,
        1e-10,
        "u(t) vs e^{-kappa^2 t} v(t) with the integrating-factor stepper",
    ));

    // Voltage-driven steady state: value and grid order.
    let pv = ModelParams::new(k2, 1.0, 1.0)?;
    let err_at = |nx: usize| -> Result<f64> {
        let c = EvolveConfig::new(nx, 5e-4, Scheme::CrankNicolson, 6.0)?;
        let z = ScalarField::from_fn(nx, |_| 0.0)?;
        let r = evolve(&pv, &z, &c)?;
        let target = ScalarField::from_fn(nx, |x| steady_state(&pv, x))?;
        r.final_field.sup_distance(&target)
    };
    let (e1, e2) = (err_at(129)?, err_at(257)?);
    let order = (e1 / e2).log2();
    checks.push(CheckRecord::value(
        format!("fd_steady_state_order_k2={k2}"),
        2.0,
        order,
        0.2,
        &format!("sup errors {e1:.3e} -> {e2:.3e} under grid doubling"),
    ));

    // Boundary-condition reduction on the steady state.
    let u = ScalarField::from_fn(513, |x| steady_state(&pv, x))?;
    let (r0, r1) = bc_reduction_check(&pv, &u)?;
    checks.push(CheckRecord::residual(
        format!("bc_reduction_k2={k2}"),
        r0.abs().max(r1.abs()),
        1e-8,
        "field-reconstruction boundary residuals on the steady state",
    ));
    Ok(())
}

fn check_mc_suite(k2: f64, level: Level, checks: &mut Vec<CheckRecord>) -> Result<()> {
    let p = ModelParams::homogeneous(k2)?;
    let (n, dt, l1_tol): (usize, f64, f64) = match level {
        Level::Full => (1_000_000, 1e-5, 0.02),
        Level::Quick => (100_000, 1e-4, 0.05),
    };
    let c = SimConfig::for_params(&p, n, dt, 42, 100)?;
    let out = simulate_detailed(&p, 0.3, 0.1, &c)?;
    let cfg = KernelConfig::auto(&p);
    let s = find_eigenvalues(&p, cfg.mode_count)?;
    let reference = kernel_field(&p, 0.3, 0.1, 2001, &s, &cfg)?;
    checks.push(CheckRecord::residual(
        format!("mc_l1_vs_kernel_k2={k2}"),
        l1_distance(&out.histogram, &reference)?,
        l1_tol,
        &format!("N = {n}, dt = {dt}, seed 42, t = 0.1, y0 = 0.3"),
    ));
    checks.push(CheckRecord::value(
        format!("mc_clock_ratio_k2={k2}"),
        1.0,
        out.mean_jumps / (k2 * 0.1),
        0.01,
        "mean jump count against kappa^2 t",
    ));
    Ok(())
}

fn check_mc_neumann_limit(level: Level, checks: &mut Vec<CheckRecord>) -> Result<()> {
    let p = ModelParams::homogeneous(1e-12)?;
    let (n, l1_tol) = match level {
        Level::Full => (1_000_000, 0.02),
        Level::Quick => (100_000, 0.05),
    };
    let c = SimConfig::new(n, 1e-4, 42, 0.0, 100)?;
    let out = simulate_detailed(&p, 0.3, 0.1, &c)?;
    let cfg = KernelConfig::auto(&p);
    let reference = ScalarField::from_fn(2001, |x| neumann_kernel(x, 0.3, 0.1, &cfg).unwrap())?;
    checks.push(CheckRecord::residual(
        "mc_neumann_limit",
        l1_distance(&out.histogram, &reference)?,
        l1_tol,
        "zero jump rate against the zero-flux kernel",
    ));
    Ok(())
}

/// Run the full cross-validation suite over a list of kappa^2 values.
pub fn run_validation(kappa2_list: &[f64], level: Level) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let mut calibrations = Vec::new();

    let count = match level {
        Level::Full => 20,
        Level::Quick => 10,
    };
    for &k2 in kappa2_list {
        check_spectrum(k2, count, &mut checks)?;
    }

    check_a_series_start(&mut checks)?;

    for &k2 in &[1.0, 4.0] {
        if kappa2_list.contains(&k2) {
            check_resolvent(k2, level, &mut checks)?;
            check_biorthogonality(k2, 10, &mut checks)?;
        }
    }

    for &k2 in kappa2_list {
        check_kernel_suite(k2, level, &mut checks, &mut calibrations)?;
        check_fd_suite(k2, &mut checks)?;
    }

    let mc_k2 = if kappa2_list.contains(&4.0) { 4.0 } else { kappa2_list[0] };
    check_mc_suite(mc_k2, level, &mut checks)?;
    check_mc_neumann_limit(level, &mut checks)?;

    Ok(ValidationReport {
        timestamp: iso8601_now(),
        params: kappa2_list
            .iter()
            .map(|&k2| ModelParams::homogeneous(k2))
            .collect::<Result<_>>()?,
        checks,
        calibration: calibrations,
        discrepancy_ledger: discrepancy_ledger(),
    })
}
