//! Acceptance gate: one test per criterion, each printing a single
//! `ACCEPTANCE <n> <name>: PASS` line (visible with `--nocapture`; the
//! per-test ok/FAILED line carries the same information otherwise).
//! Every criterion asserts, so a failure fails the build.

use num_complex::Complex64;
use pnpk_core::bromwich::{bromwich_kernel, laplace_check, BromwichConfig};
use pnpk_core::kernel::{
    calibrate, chapman_kolmogorov_residual, kernel, kernel_field, neumann_kernel, KernelConfig,
};
use pnpk_core::mc::{l1_distance, simulate_detailed, SimConfig};
use pnpk_core::oracle::{evolve, kernel_estimate, EvolveConfig, Scheme};
use pnpk_core::resolvent::{resolvent, resolvent_bvp_oracle};
use pnpk_core::spectral::{
    det, dual_eigenfunction, find_eigenvalues, forward_eigenfunction, steady_state, Family,
};
use pnpk_core::validation::{discrepancy_ledger, resolvent_probe_lambdas};
use pnpk_core::{ModelParams, ScalarField};
use std::f64::consts::PI;
use std::time::Instant;

fn report(n: u32, name: &str, passed: bool) {
    println!(
        "ACCEPTANCE {n} {name}: {}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "acceptance criterion {n} ({name}) failed");
}

/// Frozen transcendental anchors lambda_1..lambda_4 per kappa^2.
const ANCHORS: &[(f64, [f64; 4])] = &[
    (
        0.5,
        [
            9.4640494581724894,
            88.781631930319179,
            246.72393009882663,
            483.60235290263995,
        ],
    ),
    (
        1.0,
        [
            9.0579582948074115,
            88.737268248736115,
            246.70781285816318,
            483.59410685133611,
        ],
    ),
    (
        4.0,
        [
            6.6104932496776421,
            88.480090664346307,
            246.6124064610614,
            483.54497846836,
        ],
    ),
    (
        12.0,
        [0.0, 87.862701964937955, 246.36841182489397, 483.41682032586647],
    ),
    (
        25.0,
        [
            -10.960963332849277,
            87.033478687536117,
            246.00158755816079,
            483.21700547897819,
        ],
    ),
];

#[test]
fn acceptance_1_eigenvalues() {
    let t0 = Instant::now();
    let mut ok = true;
    for &(k2, anchors) in ANCHORS {
        let p = ModelParams::homogeneous(k2).unwrap();
        let s = find_eigenvalues(&p, 20).unwrap();
        assert_eq!(s.transcendental_family.len(), 20);
        assert_eq!(s.cosine_family.len(), 20);
        for (i, &a) in anchors.iter().enumerate() {
            let l = s.transcendental_family[i].lambda;
            let scale = a.abs().max(1.0);
            ok &= (l - a).abs() <= 1e-9 * scale;
        }
        for t in &s.transcendental_family {
            ok &= t.residual < 1e-10;
            ok &= t.lambda > t.bracket.0 && t.lambda < t.bracket.1;
        }
        if (k2 - 12.0).abs() < 1e-12 {
            ok &= s.transcendental_family[0].lambda.abs() < 1e-8;
        }
        // Determinant vanishes at every computed eigenvalue.
        let mut roots: Vec<f64> = vec![-k2];
        roots.extend(s.cosine_family.iter().map(|c| c.mu));
        roots.extend(
            s.transcendental_family
                .iter()
                .map(|t| t.lambda)
                .filter(|l| l.abs() > 1e-6),
        );
        for l in roots {
            let d = det(Complex64::new(l, 0.0), &p).unwrap().norm();
            ok &= d / (1.0 + l.abs()).powf(1.5) < 1e-9;
        }
    }
    ok &= t0.elapsed().as_secs_f64() < 1.0;
    report(1, "eigenvalue anchors, residuals, brackets, determinant zeros", ok);
}

#[test]
fn acceptance_2_resolvent_vs_bvp() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let n = 1025usize;
    for &k2 in &[1.0, 4.0] {
        let p = ModelParams::homogeneous(k2).unwrap();
        for l in resolvent_probe_lambdas(k2) {
            for j in 0..21 {
                let y = (j + 1) as f64 / 22.0;
                let field = resolvent_bvp_oracle(l, y, &p, n).unwrap();
                for jx in 0..21 {
                    let i = jx * (n - 1) / 20;
                    let x = field.x(i);
                    let r = resolvent(Complex64::new(l, 0.0), x, y, &p, 1e-12)
                        .unwrap()
                        .re;
                    worst = worst.max((r - field.values()[i]).abs());
                }
            }
        }
    }
    let ok = worst <= 1e-6 && t0.elapsed().as_secs_f64() < 30.0;
    report(2, &format!("resolvent vs BVP oracle (max err {worst:.3e})"), ok);
}

#[test]
fn acceptance_3_kernel_vs_fd() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for &k2 in &[1.0, 4.0] {
        let p = ModelParams::homogeneous(k2).unwrap();
        let cfg = KernelConfig::auto(&p);
        let s = find_eigenvalues(&p, cfg.mode_count).unwrap();
        let fd_cfg = EvolveConfig::new(1025, 1e-5, Scheme::CrankNicolson, 1.0).unwrap();
        for &y in &[0.25, 0.5, 0.75] {
            for &t in &[0.05, 0.1, 0.5] {
                let fd = kernel_estimate(&p, y, t, &fd_cfg).unwrap();
                let model = kernel_field(&p, y, t, 1025, &s, &cfg).unwrap();
                worst = worst.max(model.sup_distance(&fd).unwrap());
            }
        }
    }
    let ok = worst < 1e-3 && t0.elapsed().as_secs_f64() < 120.0;
    report(3, &format!("kernel vs FD evolution (sup err {worst:.3e})"), ok);
}

#[test]
fn acceptance_4_kernel_invariants() {
    let mut ok = true;
    let (mut worst_mass, mut worst_min, mut worst_ck, mut worst_lt) =
        (0.0f64, f64::INFINITY, 0.0f64, 0.0f64);
    for &k2 in &[1.0, 4.0, 12.0] {
        let p = ModelParams::homogeneous(k2).unwrap();
        let cfg = KernelConfig::auto(&p);
        let s = find_eigenvalues(&p, cfg.mode_count).unwrap();
        for iy in 1..=9 {
            let y = iy as f64 / 10.0;
            for &t in &[0.01, 0.1, 1.0, 10.0] {
                let f = kernel_field(&p, y, t, 501, &s, &cfg).unwrap();
                // Simpson: plain trapezoid carries an O(h^2 kappa^2) boundary
                // term from the nonzero flux of the stationary profile.
                let mass = pnpk_core::field::simpson(f.values(), f.spacing());
                worst_mass = worst_mass.max((mass - 1.0).abs());
                worst_min = worst_min.min(f.min_value());
            }
        }
        let ck = chapman_kolmogorov_residual(&p, 0.25, 0.75, 0.1, 0.1, &s, &cfg, 801).unwrap();
        worst_ck = worst_ck.max(ck);
        let f1 = kernel_field(&p, 0.2, 20.0, 201, &s, &cfg).unwrap();
        let f2 = kernel_field(&p, 0.8, 20.0, 201, &s, &cfg).unwrap();
        worst_lt = worst_lt.max(f1.sup_distance(&f2).unwrap());
    }
    println!(
        "  mass err {worst_mass:.3e}, min value {worst_min:.3e}, CK {worst_ck:.3e}, long-time {worst_lt:.3e}"
    );
    ok &= worst_mass < 1e-6 && worst_min >= -1e-9 && worst_ck < 1e-4 && worst_lt < 1e-10;
    report(4, "kernel mass, positivity, semigroup, long-time limit", ok);
}

#[test]
fn acceptance_5_contour_and_laplace() {
    let t0 = Instant::now();
    let p = ModelParams::homogeneous(1.0).unwrap();
    let cfg = KernelConfig::auto(&p);
    let s = find_eigenvalues(&p, cfg.mode_count).unwrap();
    let b = BromwichConfig::auto(&p);
    let mut ok = true;
    for &(x, y, t) in &[
        (0.4, 0.6, 0.2),
        (0.3, 0.7, 0.1),
        (0.25, 0.5, 0.3),
        (0.6, 0.2, 0.15),
        (0.5, 0.5, 0.2),
    ] {
        let kb = bromwich_kernel(&p, x, y, t, &b).unwrap();
        let ks = kernel(&p, x, y, t, &s, &cfg).unwrap();
        ok &= (kb - ks).abs() < 1e-4;
    }
    for &k2 in &[1.0, 4.0] {
        let pp = ModelParams::homogeneous(k2).unwrap();
        let cc = KernelConfig::auto(&pp);
        let ss = find_eigenvalues(&pp, cc.mode_count).unwrap();
        for &mult in &[-2.0, -4.0] {
            let r = laplace_check(&pp, Complex64::new(mult * k2, 0.0), 0.3, 0.7, &ss, &cc)
                .unwrap();
            ok &= r < 1e-6;
        }
    }
    ok &= t0.elapsed().as_secs_f64() < 60.0;
    report(5, "contour inversion and Laplace-transform identity", ok);
}

#[test]
fn acceptance_6_biorthogonality() {
    let mut ok = true;
    for &k2 in &[1.0, 4.0] {
        let p = ModelParams::homogeneous(k2).unwrap();
        let s = find_eigenvalues(&p, 10).unwrap();
        let mut members: Vec<(Family, usize)> = vec![(Family::Ground, 0)];
        for k in 1..=10 {
            members.push((Family::Cosine, k));
            members.push((Family::Transcendental, k));
        }
        let nq = 4001usize;
        let h = 1.0 / (nq - 1) as f64;
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
                let pairing = pnpk_core::field::simpson(&prod, h);
                if ff == df && fi == di {
                    ok &= pairing.abs() > 1e-4;
                } else {
                    ok &= pairing.abs() / (fnorm * dnorm) < 1e-8;
                }
            }
        }
    }
    report(6, "biorthogonality of forward and dual families", ok);
}

#[test]
fn acceptance_7_fd_oracle() {
    let mut ok = true;
    for &k2 in &[1.0, 4.0] {
        let p = ModelParams::homogeneous(k2).unwrap();
        let cfg = EvolveConfig::new(257, 1e-3, Scheme::CrankNicolson, 1.0).unwrap();
        let init = ScalarField::from_fn(257, |x| 1.0 + 0.3 * (2.0 * PI * x).cos()).unwrap();
        let r = evolve(&p, &init, &cfg).unwrap();
        let m0 = r.mass_trace[0].1;
        for &(_, m) in &r.mass_trace {
            ok &= ((m - m0) / m0).abs() < 1e-9;
        }
        for &(_, m) in &r.min_trace {
            ok &= m >= -1e-12;
        }
        // Steady-state convergence order under grid doubling.
        let pv = ModelParams::new(k2, 1.0, 1.0).unwrap();
        let err_at = |nx: usize| -> f64 {
            let c = EvolveConfig::new(nx, 5e-4, Scheme::CrankNicolson, 6.0).unwrap();
            let z = ScalarField::from_fn(nx, |_| 0.0).unwrap();
            let r = evolve(&pv, &z, &c).unwrap();
            let target = ScalarField::from_fn(nx, |x| steady_state(&pv, x)).unwrap();
            r.final_field.sup_distance(&target).unwrap()
        };
        let order = (err_at(129) / err_at(257)).log2();
        ok &= (1.8..=2.2).contains(&order);
    }
    report(7, "FD oracle conservation, positivity, grid order", ok);
}

#[test]
fn acceptance_8_monte_carlo() {
    let t0 = Instant::now();
    let mut ok = true;
    let p = ModelParams::homogeneous(4.0).unwrap();
    let c = SimConfig::for_params(&p, 1_000_000, 1e-5, 42, 100).unwrap();
    let out = simulate_detailed(&p, 0.3, 0.1, &c).unwrap();
    let cfg = KernelConfig::auto(&p);
    let s = find_eigenvalues(&p, cfg.mode_count).unwrap();
    let reference = kernel_field(&p, 0.3, 0.1, 2001, &s, &cfg).unwrap();
    ok &= l1_distance(&out.histogram, &reference).unwrap() < 0.02;
    let ratio = out.mean_jumps / (4.0 * 0.1);
    ok &= (0.99..=1.01).contains(&ratio);

    // Zero-rate limit reproduces the reflecting (zero-flux) kernel.
    let pn = ModelParams::homogeneous(1e-12).unwrap();
    let cn = SimConfig::new(1_000_000, 1e-5, 42, 0.0, 100).unwrap();
    let outn = simulate_detailed(&pn, 0.3, 0.1, &cn).unwrap();
    let cfgn = KernelConfig::auto(&pn);
    let refn =
        ScalarField::from_fn(2001, |x| neumann_kernel(x, 0.3, 0.1, &cfgn).unwrap()).unwrap();
    ok &= l1_distance(&outn.histogram, &refn).unwrap() < 0.02;

    ok &= t0.elapsed().as_secs_f64() < 300.0;
    report(8, "Monte Carlo density, jump clock, reflecting limit", ok);
}

#[test]
fn acceptance_9_calibration_and_ledger() {
    let mut ok = !discrepancy_ledger().is_empty();
    for &k2 in &[1.0, 4.0, 12.0, 25.0] {
        let p = ModelParams::homogeneous(k2).unwrap();
        let cfg = KernelConfig::auto(&p);
        let s = find_eigenvalues(&p, cfg.mode_count).unwrap();
        // calibrate returns Err(CalibrationAmbiguous) when a measured factor
        // does not snap; success here is the criterion.
        match calibrate(&p, &s) {
            Ok(fit) => {
                let expected = [1.0 / (p.kappa() / 2.0).cosh(), 1.0, 2.0];
                ok &= fit.snapped.stationary == expected[0]
                    && fit.snapped.transcendental == expected[1]
                    && fit.snapped.cosine == expected[2];
                ok &= fit.residual < 1e-3;
            }
            Err(_) => ok = false,
        }
    }
    report(9, "calibration snapping and discrepancy ledger", ok);
}
