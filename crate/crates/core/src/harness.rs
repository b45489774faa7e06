//! Reproducible experiment suites: determinant-vs-expansion oracle, the
//! entry identities behind the `S_5` and kernel-dimension-2 arguments, and the
//! Monte Carlo search for off-center circular numerical ranges.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classify::{classify_curve, fit_disc, CurveComponent, EntrySums};
use crate::error::{KippError, Result};
use crate::generators::{
    haar_unitary, jordan_shift, ker2_family, random_partial_isometry_with, random_upper_triangular,
    s5_family, seeded_rng, stream_rng, unit_disc,
};
use crate::kippenhahn::{kipp_poly_det, kipp_poly_expanded};
use crate::linalg::{is_partial_isometry, kernel_dimension};
use crate::matrix::{ComplexMatrix, C64};

/// Environment variable overriding the results root (default `runs`).
pub const RUNS_DIR_ENV: &str = "KIPP_RUNS_DIR";

/// Outcome of [`oracle_identity_suite`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    pub count: usize,
    pub seed: u64,
    pub scale: f64,
    pub max_discrepancy: f64,
    pub mean_discrepancy: f64,
    pub worst_index: usize,
    pub worst_matrix: crate::matrix::MatrixFile,
}

/// Compares `kipp_poly_det` with `kipp_poly_expanded` on `count` seeded
/// upper-triangular 5x5 matrices with entries in the disc of radius `scale`.
///
/// Discrepancy is `max |coefficient difference| / max |coefficient|`.
pub fn oracle_identity_suite(count: usize, seed: u64, scale: f64) -> Result<OracleReport> {
    if count == 0 {
        return Err(KippError::InvalidArgument("oracle suite needs count >= 1".into()));
    }
    let results: Vec<(f64, ComplexMatrix)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let t = random_upper_triangular(5, scale, &mut rng);
            let d = triangular_discrepancy(&t)?;
            Ok((d, t))
        })
        .collect::<Result<_>>()?;
    Ok(summarize_oracle(results, seed, scale))
}

/// Same comparison on a caller-supplied batch of upper-triangular matrices.
pub fn oracle_on_batch(batch: &[ComplexMatrix]) -> Result<OracleReport> {
    if batch.is_empty() {
        return Err(KippError::InvalidArgument("empty oracle batch".into()));
    }
    let results = batch
        .iter()
        .map(|t| Ok((triangular_discrepancy(t)?, t.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_oracle(results, 0, f64::NAN))
}

/// Relative coefficient discrepancy between the two polynomial routes.
pub fn triangular_discrepancy(t: &ComplexMatrix) -> Result<f64> {
    let det = kipp_poly_det(t)?;
    let exp = kipp_poly_expanded(t)?;
    Ok(exp.relative_distance(&det))
}

fn summarize_oracle(results: Vec<(f64, ComplexMatrix)>, seed: u64, scale: f64) -> OracleReport {
    let count = results.len();
    let (worst_index, _) = results
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bd), (i, (d, _))| if *d > bd { (i, *d) } else { (bi, bd) });
    let max_discrepancy = results[worst_index].0;
    let mean_discrepancy = results.iter().map(|(d, _)| d).sum::<f64>() / count as f64;
    OracleReport {
        count,
        seed,
        scale,
        max_discrepancy,
        mean_discrepancy,
        worst_index,
        worst_matrix: (&results[worst_index].1).into(),
    }
}

/// One row of [`theorem32_identity_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct S5IdentityRow {
    pub a: f64,
    pub b: C64,
    pub c: C64,
    /// `|RHS(d)|` for `B = s5_family(a, b, c) - a I`.
    pub d_rhs_modulus: f64,
    pub rhs_c: C64,
    pub rhs_b: C64,
    pub is_partial_isometry: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct S5IdentityReport {
    pub rows: Vec<S5IdentityRow>,
    pub max_d_rhs_modulus: f64,
}

/// Entry-side sums of conditions (d), (c), (b) for `s5_family(a, b, c) - a I`.
pub fn theorem32_identity_check(samples: &[(f64, C64, C64)]) -> Result<S5IdentityReport> {
    let rows = samples
        .iter()
        .map(|&(a, b, c)| {
            let s5 = s5_family(a, b, c)?;
            let shifted = s5.shift(C64::new(-a, 0.0));
            let sums = EntrySums::new(&shifted)?;
            Ok(S5IdentityRow {
                a,
                b,
                c,
                d_rhs_modulus: sums.rhs_d().norm(),
                rhs_c: sums.rhs_c(),
                rhs_b: sums.rhs_b(),
                is_partial_isometry: is_partial_isometry(&s5, 1e-12),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_d_rhs_modulus = rows.iter().map(|r| r.d_rhs_modulus).fold(0.0, f64::max);
    Ok(S5IdentityReport { rows, max_d_rhs_modulus })
}

/// Condition-(b) residual on the diagonal `a = b = c`: with the large circle
/// and the ellipse of minor axis `s` sharing the sum `4 r^2 + s^2 = RHS(a)`,
/// the branch with the point `-a` requires `-a RHS(a) = RHS(b)`. Returns
/// `|-a RHS(a) - RHS(b)|` for each `a`.
pub fn theorem32_condition_b_scan(a_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    a_grid
        .iter()
        .map(|&a| {
            let ar = C64::new(a, 0.0);
            let shifted = s5_family(a, ar, ar)?.shift(-ar);
            let sums = EntrySums::new(&shifted)?;
            Ok((a, (-ar * sums.rhs_a() - sums.rhs_b()).norm()))
        })
        .collect()
}

/// The two entry combinations for `A = [[0, B], [0, C]]` with
/// `B = [[k, l, t], [g, h, j]]`, `C = [[b, e, f], [0, a, d], [0, 0, a]]`:
/// the condition-(d) sum, which vanishes under `B*B + C*C = I`, and the
/// condition-(c) sum, which vanishes when additionally `b = a`.
pub fn case2_combinations(m: &ComplexMatrix) -> Result<(C64, C64)> {
    if m.dim() != 5 {
        return Err(KippError::NotDim5(m.dim()));
    }
    let (k, l, t) = (m.get(0, 2), m.get(0, 3), m.get(0, 4));
    let (g, h, j) = (m.get(1, 2), m.get(1, 3), m.get(1, 4));
    let (b, e, f) = (m.get(2, 2), m.get(2, 3), m.get(2, 4));
    let (a, d) = (m.get(3, 3), m.get(3, 4));
    let d_comb = d.norm_sqr() * a * a * (b - a) - a * a * e * d * f.conj()
        + a * (b - a) * h * d * j.conj()
        + a * (b - a) * l * d * t.conj()
        - a * g * e * d * j.conj()
        - a * k * e * d * t.conj();
    let c_comb = a * a * (e.norm_sqr() + f.norm_sqr() + d.norm_sqr())
        + 2.0 * a * e * d * f.conj()
        + a * e * g * h.conj()
        + a * e * k * l.conj()
        + a * f * g * j.conj()
        + a * f * k * t.conj()
        + a * d * h * j.conj()
        + a * d * l * t.conj()
        + e * d * g * j.conj()
        + e * d * k * t.conj();
    Ok((d_comb, c_comb))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Case2Report {
    pub samples: usize,
    pub seed: u64,
    pub max_d_combination: f64,
    pub max_c_combination: f64,
    /// Largest `|D - RHS(d)(A - a I)|`: the displayed sum is the full entry side.
    pub max_d_vs_rhs: f64,
    /// Smallest, over instances, of the largest combination after perturbing
    /// one entry of `B` by `perturbation`.
    pub min_perturbed: f64,
    pub perturbation: f64,
}

/// Evaluates [`case2_combinations`] on `samples` seeded kernel-dimension-2
/// instances with `b = a`, plus a sensitivity control that breaks the
/// isometry relation.
pub fn case2_identity_check(samples: usize, seed: u64) -> Result<Case2Report> {
    if samples == 0 {
        return Err(KippError::InvalidArgument("case-2 check needs samples >= 1".into()));
    }
    let perturbation = 1e-3;
    let rows = (0..samples)
        .into_par_iter()
        .map(|i| {
            let m = ker2_family(seed.wrapping_add(i as u64), true);
            let (dc, cc) = case2_combinations(&m)?;
            let a = m.get(3, 3);
            let rhs = EntrySums::new(&m.shift(-a))?.rhs_d();
            let mut worst = 0.0f64;
            for (r, c) in [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)] {
                for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let mut p = m.inner().clone();
                    p[(r, c)] += dir * perturbation;
                    let (pd, pc) = case2_combinations(&ComplexMatrix::new(p)?)?;
                    worst = worst.max(pd.norm()).max(pc.norm());
                }
            }
            Ok((dc.norm(), cc.norm(), (dc - rhs).norm(), worst))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Case2Report {
        samples,
        seed,
        max_d_combination: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        max_c_combination: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        max_d_vs_rhs: rows.iter().map(|r| r.2).fold(0.0, f64::max),
        min_perturbed: rows.iter().map(|r| r.3).fold(f64::INFINITY, f64::min),
        perturbation,
    })
}

/// Campaign parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignConfig {
    pub n_trials: usize,
    pub seed: u64,
    pub ker_dims: Vec<usize>,
    pub include_structured: bool,
    pub tol_disc: f64,
    pub tol_center: f64,
    pub samples: usize,
    /// Written verbatim into every record so reruns are byte-identical.
    pub timestamp: String,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            n_trials: 10_000,
            seed: 0,
            ker_dims: vec![1, 2, 3],
            include_structured: true,
            tol_disc: 1e-8,
            tol_center: 1e-7,
            samples: crate::classify::DEFAULT_DISC_SAMPLES,
            timestamp: "1970-01-01T00:00:00Z".into(),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(KippError::InvalidArgument("nTrials must be at least 1".into()));
        }
        if self.ker_dims.is_empty() || self.ker_dims.iter().any(|&m| !(1..=4).contains(&m)) {
            return Err(KippError::InvalidArgument(format!(
                "kernel dimensions must be in 1..=4, got {:?}",
                self.ker_dims
            )));
        }
        if !(self.tol_disc > 0.0 && self.tol_center > 0.0) {
            return Err(KippError::InvalidArgument("tolerances must be positive".into()));
        }
        if self.samples < 16 {
            return Err(KippError::InvalidArgument("samples must be at least 16".into()));
        }
        Ok(())
    }

    /// Directory name under the results root.
    pub fn campaign_id(&self) -> String {
        format!("campaign-s{}-n{}", self.seed, self.n_trials)
    }
}

/// Which sampler produced a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub params: Value,
}

/// One campaign trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub generator: GeneratorSpec,
    /// Known circular-disc fixture (rotated and unitarily conjugated).
    pub structured: bool,
    pub kernel_dim: usize,
    pub disc_fit: crate::classify::DiscFit,
    pub circular: bool,
    pub center_modulus: f64,
    /// Component kinds, e.g. `P E E` or `U5`.
    pub classification: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<String>,
    pub timestamp: String,
}

/// Sampler precondition: only partial isometries enter the campaign.
pub fn admit(a: &ComplexMatrix) -> bool {
    is_partial_isometry(a, 1e-10)
}

fn fixture<R: Rng + ?Sized>(slot: usize, rng: &mut R) -> Result<(ComplexMatrix, GeneratorSpec)> {
    let z = C64::new(0.0, 0.0);
    let (base, spec) = match slot {
        0 => (jordan_shift(5)?, GeneratorSpec { name: "jordan".into(), params: json!({"n": 5}) }),
        1 => (
            jordan_shift(3)?.direct_sum(&jordan_shift(2)?),
            GeneratorSpec { name: "jordan3+jordan2".into(), params: json!({}) },
        ),
        2 => (
            ComplexMatrix::zeros(1).direct_sum(&jordan_shift(4)?),
            GeneratorSpec { name: "zero+jordan4".into(), params: json!({}) },
        ),
        _ => {
            let c = unit_disc(rng) * 0.4;
            let b = C64::from_polar((1.0 - c.norm_sqr()).sqrt(), rng.random::<f64>() * std::f64::consts::TAU);
            let block = ComplexMatrix::from_rows(&[vec![z, b], vec![z, c]])?;
            (
                jordan_shift(3)?.direct_sum(&block),
                GeneratorSpec {
                    name: "jordan3+rank1".into(),
                    params: json!({"b": [b.re, b.im], "c": [c.re, c.im]}),
                },
            )
        }
    };
    let phase = rng.random::<f64>() * std::f64::consts::TAU;
    let u = haar_unitary(5, rng);
    let mut spec = spec;
    spec.params["phase"] = json!(phase);
    Ok((base.scale(C64::from_polar(1.0, phase)).conjugate_by(&u), spec))
}

fn component_summary(components: &[CurveComponent]) -> String {
    components
        .iter()
        .map(|c| match c {
            CurveComponent::Point { .. } => "P".to_string(),
            CurveComponent::Ellipse { .. } => "E".to_string(),
            CurveComponent::QuarticFlat { .. } => "F".to_string(),
            CurveComponent::Unclassified { degree, .. } => format!("U{degree}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs one trial; fully determined by `(config.seed, index)`.
pub fn run_trial(config: &CampaignConfig, index: usize) -> Result<TrialRecord> {
    let mut rng = stream_rng(config.seed, index as u64);
    let (a, generator, structured) = if config.include_structured && index % 10 == 0 {
        let (a, g) = fixture((index / 10) % 4, &mut rng)?;
        (a, g, true)
    } else if config.include_structured && index % 10 == 5 {
        let b = unit_disc(&mut rng) * 0.9;
        let c = unit_disc(&mut rng) * 0.9;
        let a = s5_family(0.0, b, c)?;
        let g = GeneratorSpec {
            name: "s5".into(),
            params: json!({"a": 0.0, "b": [b.re, b.im], "c": [c.re, c.im]}),
        };
        (a, g, false)
    } else {
        let m = config.ker_dims[rng.random_range(0..config.ker_dims.len())];
        let a = random_partial_isometry_with(5, m, &mut rng)?;
        let g = GeneratorSpec { name: "pi".into(), params: json!({"n": 5, "ker": m}) };
        (a, g, false)
    };
    if !admit(&a) {
        return Err(KippError::NotPartialIsometry);
    }
    let disc_fit = fit_disc(&a, config.samples)?;
    let circular = disc_fit.is_circular(config.tol_disc);
    let kernel_dim = kernel_dimension(&a, 1e-8);
    let components = classify_curve(&a, crate::classify::DEFAULT_CLASSIFY_TOL)?;
    let has_flat = components.iter().any(|c| matches!(c, CurveComponent::QuarticFlat { .. }));
    let anomaly = (has_flat && kernel_dim == 1)
        .then(|| "quartic with flat portion on a kernel-dimension-1 sample".to_string());
    Ok(TrialRecord {
        index,
        seed: config.seed,
        generator,
        structured,
        kernel_dim,
        center_modulus: disc_fit.center.norm(),
        disc_fit,
        circular,
        classification: component_summary(&components),
        anomaly,
        timestamp: config.timestamp.clone(),
    })
}

/// Runs all trials in parallel; records come back in index order.
pub fn conjecture_campaign(config: &CampaignConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    (0..config.n_trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect()
}

/// Aggregate verdict of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignSummary {
    pub campaign_id: String,
    pub seed: u64,
    pub n_trials: usize,
    pub n_circular: usize,
    /// Circular records with `centerModulus >= tolCenter`.
    pub violations: Vec<usize>,
    pub max_center_modulus_circular: f64,
    pub structured_total: usize,
    pub structured_circular: usize,
    pub anomalies: Vec<usize>,
    pub pass: bool,
}

pub fn summarize(config: &CampaignConfig, records: &[TrialRecord]) -> CampaignSummary {
    let circular: Vec<&TrialRecord> = records.iter().filter(|r| r.circular).collect();
    let violations: Vec<usize> = circular
        .iter()
        .filter(|r| r.center_modulus >= config.tol_center)
        .map(|r| r.index)
        .collect();
    let structured_total = records.iter().filter(|r| r.structured).count();
    let structured_circular = records.iter().filter(|r| r.structured && r.circular).count();
    CampaignSummary {
        campaign_id: config.campaign_id(),
        seed: config.seed,
        n_trials: records.len(),
        n_circular: circular.len(),
        max_center_modulus_circular: circular.iter().map(|r| r.center_modulus).fold(0.0, f64::max),
        pass: violations.is_empty() && structured_circular == structured_total,
        violations,
        structured_total,
        structured_circular,
        anomalies: records.iter().filter(|r| r.anomaly.is_some()).map(|r| r.index).collect(),
    }
}

/// `$KIPP_RUNS_DIR`, or `runs` in the working directory.
pub fn runs_root() -> PathBuf {
    std::env::var_os(RUNS_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Writes `config.json`, `records.jsonl` and `summary.json` under
/// `root/<campaign-id>/`, replacing any earlier run with the same id.
pub fn write_campaign(
    root: &Path,
    config: &CampaignConfig,
    records: &[TrialRecord],
    summary: &CampaignSummary,
) -> Result<PathBuf> {
    let dir = root.join(config.campaign_id());
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)? + "\n")?;
    let mut out = std::io::BufWriter::new(fs::File::create(dir.join("records.jsonl"))?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)? + "\n")?;
    Ok(dir)
}

/// Seeded `(a, b, c)` grid in the open unit disc: `a` over `n` real values,
/// `b`, `c` drawn per point.
pub fn s5_parameter_grid(n: usize, seed: u64) -> Vec<(f64, C64, C64)> {
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let a = 0.9 * i as f64 / n as f64;
        for _ in 0..n {
            out.push((a, unit_disc(&mut rng) * 0.95, unit_disc(&mut rng) * 0.95));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_batch_has_no_discrepancy() {
        let mut rng = seeded_rng(1);
        let batch: Vec<ComplexMatrix> = (0..5)
            .map(|_| ComplexMatrix::diagonal(&(0..5).map(|_| unit_disc(&mut rng)).collect::<Vec<_>>()))
            .collect();
        let rep = oracle_on_batch(&batch).unwrap();
        assert!(rep.max_discrepancy <= 1e-13, "{}", rep.max_discrepancy);
    }

    #[test]
    fn oracle_small_run() {
        let rep = oracle_identity_suite(10, 4, 1.0).unwrap();
        assert_eq!(rep.count, 10);
        assert!(rep.max_discrepancy < 1e-9);
        assert!(rep.mean_discrepancy <= rep.max_discrepancy);
        assert!(oracle_identity_suite(0, 4, 1.0).is_err());
    }

    #[test]
    fn s5_fixed_sample() {
        let rep = theorem32_identity_check(&[(0.3, C64::new(0.5, 0.0), C64::new(-0.2, 0.0))]).unwrap();
        assert!(rep.max_d_rhs_modulus < 1e-12);
        let rep = theorem32_identity_check(&[(0.0, C64::new(0.3, 0.4), C64::new(-0.1, 0.6))]).unwrap();
        assert!(rep.rows[0].is_partial_isometry);
        assert!(rep.max_d_rhs_modulus < 1e-12);
    }

    #[test]
    fn condition_b_scan_matches_closed_form() {
        for (a, res) in theorem32_condition_b_scan(&[0.0, 0.1, 0.3, 0.5]).unwrap() {
            assert!((res - 4.0 * a * (1.0 - a * a)).abs() < 1e-12, "{a} {res}");
        }
    }

    #[test]
    fn case2_zero_matrix() {
        let (d, c) = case2_combinations(&ComplexMatrix::zeros(5)).unwrap();
        assert_eq!(d.norm() + c.norm(), 0.0);
    }

    #[test]
    fn case2_small_run() {
        let rep = case2_identity_check(5, 11).unwrap();
        assert!(rep.max_d_combination < 1e-10);
        assert!(rep.max_c_combination < 1e-10);
        assert!(rep.max_d_vs_rhs < 1e-10);
        assert!(rep.min_perturbed > 1e-5);
    }

    #[test]
    fn gate_rejects_shifted_jordan() {
        let a = jordan_shift(5).unwrap();
        assert!(admit(&a));
        assert!(!admit(&a.shift(C64::new(0.1, 0.0))));
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = CampaignConfig { n_trials: 12, ..Default::default() };
        let a = conjecture_campaign(&cfg).unwrap();
        let b: Vec<TrialRecord> = (0..12).map(|i| run_trial(&cfg, i).unwrap()).collect();
        assert_eq!(a, b);
        assert!(a[0].structured && a[0].circular);
        assert!((a[0].disc_fit.radius - 0.75f64.sqrt()).abs() < 1e-9);
        assert!(a[0].center_modulus < 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(CampaignConfig { n_trials: 0, ..Default::default() }.validate().is_err());
        assert!(CampaignConfig { ker_dims: vec![5], ..Default::default() }.validate().is_err());
        assert!(CampaignConfig::default().validate().is_ok());
    }
}
