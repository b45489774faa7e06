//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use kipp_core::classify::{
    classify, classify_curve, detect_flat, fit_disc, flat_distance, flat_report, two_ellipse_report,
    CurveComponent, Roles, DEFAULT_DISC_SAMPLES, DEFAULT_MARGIN,
};
use kipp_core::generators::{
    flat_3x3, haar_unitary, jordan_shift, random_matrix, seeded_rng, stream_rng, two_ellipse_block,
    unit_disc,
};
use kipp_core::harness::{
    case2_identity_check, conjecture_campaign, oracle_identity_suite, s5_parameter_grid, summarize,
    theorem32_condition_b_scan, theorem32_identity_check, write_campaign, CampaignConfig,
};
use kipp_core::kippenhahn::kipp_poly_det;
use kipp_core::linalg::{hermitian_eigenvalues, hermitian_parts, schur_triangularize, singular_values, EigenOrder};
use kipp_core::{ComplexMatrix, HomoPoly3, C64};
use rand::Rng;

const SEED: u64 = 20_240_501;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let rep = oracle_identity_suite(200, SEED, 1.0).expect("oracle suite");
    let secs = start.elapsed().as_secs_f64();
    check(
        rep.max_discrepancy < 1e-9 && secs < 30.0,
        format!("max discrepancy {:.3e} (< 1e-9), runtime {secs:.2}s (< 30s)", rep.max_discrepancy),
    )
}

struct EllipseDraw {
    l: [C64; 5],
    r: f64,
    s: f64,
}

fn ellipse_draw<R: Rng>(rng: &mut R) -> EllipseDraw {
    EllipseDraw {
        l: std::array::from_fn(|_| unit_disc(rng)),
        r: rng.random_range(0.2..1.2),
        s: rng.random_range(0.2..1.2),
    }
}

fn pair_distance(a: [C64; 2], b: [C64; 2]) -> f64 {
    let direct = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let swapped = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    direct.min(swapped)
}

/// Largest deviation between recovered and planted components.
fn two_ellipse_error(components: &[CurveComponent], d: &EllipseDraw) -> f64 {
    let mut points = Vec::new();
    let mut ellipses = Vec::new();
    for c in components {
        match c {
            CurveComponent::Point { location } => points.push(*location),
            CurveComponent::Ellipse { foci, minor_axis, .. } => ellipses.push((*foci, *minor_axis)),
            _ => return f64::INFINITY,
        }
    }
    if points.len() != 1 || ellipses.len() != 2 {
        return f64::INFINITY;
    }
    let planted = [([d.l[0], d.l[1]], d.r), ([d.l[2], d.l[3]], d.s)];
    let mut worst = (points[0] - d.l[4]).norm();
    for (foci, axis) in planted {
        let best = ellipses
            .iter()
            .map(|(f, r)| pair_distance(*f, foci).max((r - axis).abs()))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    worst
}

fn nearest_unused(diag: &[C64], targets: &[C64]) -> Vec<usize> {
    let mut used = vec![false; diag.len()];
    targets
        .iter()
        .map(|t| {
            let i = (0..diag.len())
                .filter(|&i| !used[i])
                .min_by(|&i, &j| (diag[i] - t).norm().total_cmp(&(diag[j] - t).norm()))
                .unwrap();
            used[i] = true;
            i
        })
        .collect()
}

fn two_ellipse_round_trip(conjugate: bool, tol: f64) -> Outcome {
    let mut rng = seeded_rng(SEED + u64::from(conjugate));
    let (mut worst_fit, mut worst_report, mut worst_classified_report) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let d = ellipse_draw(&mut rng);
        let block = two_ellipse_block(d.l, d.r, d.s).unwrap();
        let t = if conjugate {
            let u = haar_unitary(5, &mut rng);
            schur_triangularize(&block.conjugate_by(&u), EigenOrder::AsComputed)
                .unwrap()
                .triangular
        } else {
            block
        };
        let components = classify_curve(&t, 1e-8).unwrap();
        worst_fit = worst_fit.max(two_ellipse_error(&components, &d));
        let diag = t.diagonal_entries();
        let pos = nearest_unused(&diag, &[d.l[0], d.l[1], d.l[2], d.l[3], d.l[4]]);
        let roles = Roles::new(pos[0], pos[1], pos[2], pos[3], pos[4]).unwrap();
        worst_report = worst_report.max(two_ellipse_report(&t, roles, d.r, d.s).unwrap().max_residual);
        let full = classify(&t, 1e-8, DEFAULT_DISC_SAMPLES).unwrap();
        let from_classification = full.reports.first().map_or(f64::INFINITY, |r| r.max_residual);
        worst_classified_report = worst_classified_report.max(from_classification);
    }
    let report_tol = if conjugate { tol } else { 1e-10 };
    check(
        worst_fit < tol && worst_report < report_tol && worst_classified_report < report_tol,
        format!(
            "foci/axes error {worst_fit:.3e} (< {tol:e}), report maxResidual {worst_report:.3e} with planted roles, \
             {worst_classified_report:.3e} with classified roles (< {report_tol:e})"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = seeded_rng(SEED + 4);
    let (mut worst_flat, mut worst_rank, mut worst_report) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let l: [C64; 3] = std::array::from_fn(|_| unit_disc(&mut rng));
        let theta = rng.random_range(0.0..PI);
        let rot = C64::from_polar(1.0, -theta);
        let floor = l.iter().map(|x| -(rot * x).re).fold(f64::MIN, f64::max);
        let mu = floor + rng.random_range(0.1..0.6);
        let (pa, pb) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        let c = flat_3x3(l[0], l[1], l[2], theta, mu, pa, pb).unwrap();

        let found = detect_flat(&c, 256, 1e-8).unwrap();
        let best = found
            .iter()
            .min_by(|a, b| {
                flat_distance((a.theta, a.mu), (theta, mu)).total_cmp(&flat_distance((b.theta, b.mu), (theta, mu)))
            })
            .copied();
        let Some(best) = best else {
            worst_flat = f64::INFINITY;
            continue;
        };
        worst_flat = worst_flat.max(flat_distance((best.theta, best.mu), (theta, mu)));

        let (h, k) = hermitian_parts(&c);
        let shifted = (h.inner() * C64::new(best.theta.cos(), 0.0) + k.inner() * C64::new(best.theta.sin(), 0.0))
            + nalgebra::DMatrix::<C64>::identity(3, 3) * C64::new(best.mu, 0.0);
        let sv = singular_values(&shifted);
        worst_rank = worst_rank.max(sv[1]);

        let lp = unit_disc(&mut rng);
        let lq = unit_disc(&mut rng);
        let r = rng.random_range(0.2..1.0);
        let ell = ComplexMatrix::from_rows(&[vec![lp, C64::new(r, 0.0)], vec![C64::new(0.0, 0.0), lq]]).unwrap();
        let t = ell.direct_sum(&c);
        let roles = Roles::new(0, 1, 3, 4, 2).unwrap();
        let rep = flat_report(&t, roles, r, theta, mu, DEFAULT_MARGIN).unwrap();
        worst_report = worst_report.max(rep.max_residual);
    }
    check(
        worst_flat < 1e-6 && worst_rank < 1e-10 && worst_report < 1e-8,
        format!(
            "(theta, mu) error {worst_flat:.3e} (< 1e-6), second singular value {worst_rank:.3e} (< 1e-10), \
             flat report maxResidual {worst_report:.3e} (< 1e-8)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let j2 = fit_disc(&jordan_shift(2).unwrap(), DEFAULT_DISC_SAMPLES).unwrap();
    let j5m = jordan_shift(5).unwrap();
    let j5 = fit_disc(&j5m, DEFAULT_DISC_SAMPLES).unwrap();
    let (h, _) = hermitian_parts(&j5m);
    let dense = *hermitian_eigenvalues(h.inner()).last().unwrap();
    let ok2 = j2.center.norm() < 1e-12 && (j2.radius - 0.5).abs() < 1e-12;
    let ok5 = j5.center.norm() < 1e-10 && (j5.radius - 0.8660254).abs() < 1e-7 && (j5.radius - dense).abs() < 1e-12;
    check(
        ok2 && ok5,
        format!(
            "J2 center {:.3e} radius {:.17}; J5 center {:.3e} radius {:.17} (dense eigensolve {:.17})",
            j2.center.norm(),
            j2.radius,
            j5.center.norm(),
            j5.radius,
            dense
        ),
    )
}

fn criterion_6() -> Outcome {
    let grid = s5_parameter_grid(5, SEED);
    let rep = theorem32_identity_check(&grid).unwrap();
    let mut a_values: Vec<f64> = grid.iter().map(|g| g.0).collect();
    a_values.dedup();
    let scan = theorem32_condition_b_scan(&a_values).unwrap();
    let zero_ok = scan.iter().filter(|(a, _)| *a == 0.0).all(|(_, r)| *r < 1e-12);
    let margin = scan
        .iter()
        .filter(|(a, _)| *a != 0.0)
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);
    let pi_ok = rep.rows.iter().filter(|r| r.a == 0.0).all(|r| r.is_partial_isometry);
    check(
        rep.max_d_rhs_modulus < 1e-12 && zero_ok && margin > 1e-4 && pi_ok,
        format!(
            "(d)-RHS max modulus {:.3e} over {} points (< 1e-12); condition-(b) residual zero at a = 0, \
             min {margin:.3e} elsewhere (> 1e-4)",
            rep.max_d_rhs_modulus,
            rep.rows.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let rep = case2_identity_check(50, SEED).unwrap();
    check(
        rep.max_d_combination < 1e-10 && rep.max_c_combination < 1e-10 && rep.min_perturbed > 1e-5,
        format!(
            "combinations {:.3e}, {:.3e} (< 1e-10); perturbed control {:.3e} (> 1e-5)",
            rep.max_d_combination, rep.max_c_combination, rep.min_perturbed
        ),
    )
}

fn criterion_8() -> Outcome {
    let config = CampaignConfig {
        seed: SEED,
        ..CampaignConfig::default()
    };
    let start = Instant::now();
    let records = conjecture_campaign(&config).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let summary = summarize(&config, &records);
    let dir = tempfile::tempdir().unwrap();
    write_campaign(dir.path(), &config, &records, &summary).unwrap();
    check(
        records.len() == 10_000
            && summary.violations.is_empty()
            && summary.structured_circular == summary.structured_total
            && summary.structured_total > 0
            && secs < 300.0,
        format!(
            "{} trials in {secs:.1}s (< 300s), {} circular, {} violations, structured {}/{} circular, \
             max circular center {:.3e}",
            records.len(),
            summary.n_circular,
            summary.violations.len(),
            summary.structured_circular,
            summary.structured_total,
            summary.max_center_modulus_circular
        ),
    )
}

fn rotated(p: &HomoPoly3, phi: f64) -> HomoPoly3 {
    let (c, s) = (phi.cos(), phi.sin());
    p.substitute(
        &HomoPoly3::linear(c, s, 0.0),
        &HomoPoly3::linear(-s, c, 0.0),
        &HomoPoly3::linear(0.0, 0.0, 1.0),
    )
}

fn translated(p: &HomoPoly3, shift: C64) -> HomoPoly3 {
    p.substitute(
        &HomoPoly3::linear(1.0, 0.0, 0.0),
        &HomoPoly3::linear(0.0, 1.0, 0.0),
        &HomoPoly3::linear(shift.re, shift.im, 1.0),
    )
}

fn criterion_9() -> Outcome {
    let mut worst = [0.0f64; 4];
    for i in 0..100 {
        let mut rng = stream_rng(SEED, 9_000 + i);
        let a = random_matrix(5, &mut rng);
        let phi = rng.random_range(0.0..2.0 * PI);
        let shift = unit_disc(&mut rng) * 2.0;
        let rot = C64::from_polar(1.0, phi);

        let p = kipp_poly_det(&a).unwrap();
        let p_rot = kipp_poly_det(&a.scale(rot)).unwrap();
        let p_tr = kipp_poly_det(&a.shift(shift)).unwrap();
        worst[0] = worst[0].max(p_rot.relative_distance(&rotated(&p, phi)));
        worst[1] = worst[1].max(p_tr.relative_distance(&translated(&p, shift)));

        let f = fit_disc(&a, DEFAULT_DISC_SAMPLES).unwrap();
        let f_rot = fit_disc(&a.scale(rot), DEFAULT_DISC_SAMPLES).unwrap();
        let f_tr = fit_disc(&a.shift(shift), DEFAULT_DISC_SAMPLES).unwrap();
        worst[2] = worst[2]
            .max((f_rot.center - rot * f.center).norm())
            .max((f_rot.radius - f.radius).abs())
            .max((f_rot.residual - f.residual).abs());
        worst[3] = worst[3]
            .max((f_tr.center - f.center - shift).norm())
            .max((f_tr.radius - f.radius).abs())
            .max((f_tr.residual - f.residual).abs());
    }
    check(
        worst.iter().all(|w| *w < 1e-9),
        format!(
            "polynomial rotation {:.3e}, translation {:.3e}; disc fit rotation {:.3e}, translation {:.3e} (all < 1e-9)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("determinant vs expansion oracle", criterion_1),
        ("two-ellipse round trip", || two_ellipse_round_trip(false, 1e-8)),
        ("round trip after unitary conjugation", || two_ellipse_round_trip(true, 1e-7)),
        ("flat-portion detection", criterion_4),
        ("circular fixtures", criterion_5),
        ("S5 identity suite", criterion_6),
        ("kernel-dimension-2 identity suite", criterion_7),
        ("circular-center campaign", criterion_8),
        ("covariance properties", criterion_9),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {} ({name}): {} - {}",
            n + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
