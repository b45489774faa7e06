//! Command-line front end for the `kipp` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::classify::{classify, fit_disc, DEFAULT_CLASSIFY_TOL, DEFAULT_DISC_SAMPLES};
use crate::error::{KippError, Result};
use crate::generators as gen;
use crate::harness::{
    case2_identity_check, conjecture_campaign, oracle_identity_suite, runs_root, s5_parameter_grid,
    summarize, theorem32_condition_b_scan, theorem32_identity_check, triangular_discrepancy,
    write_campaign, CampaignConfig,
};
use crate::kippenhahn::{boundary_polyline, kipp_poly_det, kipp_poly_expanded};
use crate::linalg::{schur_triangularize, EigenOrder};
use crate::matrix::{ComplexMatrix, C64};
use crate::plot::{render_svg, PlotSpec};
use crate::poly::PolyFile;

#[derive(Debug, Parser)]
#[command(name = "kipp", version, about = "Kippenhahn polynomials and curves of complex matrices")]
pub struct Cli {
    /// Seed for randomized commands; echoed in every output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Kippenhahn polynomial of a matrix file as JSON.
    Poly(PolyArgs),
    /// Classify the curve of a 5x5 matrix and fit a disc to W(A).
    Classify(ClassifyArgs),
    /// Sample the boundary of W(A) as CSV (theta, re, im).
    Boundary(BoundaryArgs),
    /// Write a matrix from one of the generator families.
    Generate(GenerateArgs),
    /// Run the Monte Carlo search for off-center circular numerical ranges.
    Campaign(CampaignArgs),
    /// Run the identity checks: polynomial oracle, S5 and kernel-2 identities.
    Identities(IdentityArgs),
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    pub input: PathBuf,
    /// Use the closed-form expansion (upper-triangular 5x5 only).
    #[arg(long)]
    pub expanded: bool,
    /// Also compare the determinant and expansion routes on the Schur form.
    #[arg(long)]
    pub check_oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_DISC_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render the curve, boundary and fitted disc.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Only fit the disc; accepts any dimension.
    #[arg(long)]
    pub disc_only: bool,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 360)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub family: Family,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// Ones on the superdiagonal.
    Jordan {
        #[arg(long)]
        n: usize,
    },
    /// The S5 partial isometry with eigenvalues {a, a, 0, b, c}.
    S5 {
        #[arg(long)]
        a: f64,
        #[arg(long, value_parser = parse_complex, default_value = "0")]
        b: C64,
        #[arg(long, value_parser = parse_complex, default_value = "0")]
        c: C64,
    },
    /// Two 2x2 ellipse blocks and a point.
    TwoEllipse {
        /// Five eigenvalues, `re,im` separated by `;`.
        #[arg(long, value_parser = parse_complex_list)]
        lambdas: ComplexList,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        s: f64,
    },
    /// 3x3 upper-triangular block whose curve has a flat portion.
    Flat {
        #[arg(long, value_parser = parse_complex)]
        l3: C64,
        #[arg(long, value_parser = parse_complex)]
        l4: C64,
        #[arg(long, value_parser = parse_complex)]
        l5: C64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        phase_a: f64,
        #[arg(long, default_value_t = 0.0)]
        phase_b: f64,
    },
    /// Random partial isometry with the given kernel dimension.
    Pi {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ker: usize,
    },
    /// Kernel-dimension-2 5x5 partial isometry with a repeated eigenvalue.
    Ker2 {
        #[arg(long)]
        b_equals_a: bool,
    },
}

#[derive(Debug, Clone)]
pub struct ComplexList(pub Vec<C64>);

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n_trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub ker_dims: Vec<usize>,
    /// Skip the circular fixtures.
    #[arg(long)]
    pub no_structured: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_disc: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_center: f64,
    #[arg(long, default_value_t = DEFAULT_DISC_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value = "1970-01-01T00:00:00Z")]
    pub timestamp: String,
    /// Results root; defaults to $KIPP_RUNS_DIR or `runs`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    /// Number of random instances per suite.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

fn parse_complex_list(s: &str) -> std::result::Result<ComplexList, String> {
    s.split(';').map(parse_complex).collect::<std::result::Result<_, _>>().map(ComplexList)
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value") + "\n"
}

/// Exit status of a command that ran to completion.
enum Outcome {
    Ok,
    Violation,
}

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Violation) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let seed = cli.seed;
    match &cli.command {
        Command::Poly(args) => {
            let a = ComplexMatrix::read_file(&args.input)?;
            let p = if args.expanded {
                kipp_poly_expanded(&a)?
            } else {
                kipp_poly_det(&a)?
            };
            let mut v = json!({
                "seed": seed,
                "polynomial": PolyFile::from(&p),
                "display": p.to_string(),
            });
            if args.check_oracle {
                let t = if a.is_upper_triangular(0.0) {
                    a.clone()
                } else {
                    schur_triangularize(&a, EigenOrder::AsComputed)?.triangular
                };
                v["oracleDiscrepancy"] = json!(triangular_discrepancy(&t)?);
            }
            emit(out, args.out.as_ref(), &pretty(&v))?;
            Ok(Outcome::Ok)
        }
        Command::Classify(args) => {
            let a = ComplexMatrix::read_file(&args.input)?;
            if args.disc_only {
                let fit = fit_disc(&a, args.samples)?;
                if let Some(path) = &args.svg {
                    std::fs::write(path, render_svg(&a, &PlotSpec::default(), Some(&fit))?)?;
                }
                let v = json!({"seed": seed, "discFit": fit, "circular": fit.is_circular(1e-8)});
                emit(out, args.out.as_ref(), &pretty(&v))?;
                return Ok(Outcome::Ok);
            }
            let result = classify(&a, args.tol, args.samples)?;
            if let Some(path) = &args.svg {
                let spec = PlotSpec::default();
                std::fs::write(path, render_svg(&a, &spec, Some(&result.disc_fit))?)?;
            }
            let mut v = serde_json::to_value(&result)?;
            v["seed"] = json!(seed);
            v["circular"] = json!(result.disc_fit.is_circular(1e-8));
            emit(out, args.out.as_ref(), &pretty(&v))?;
            Ok(Outcome::Ok)
        }
        Command::Boundary(args) => {
            let a = ComplexMatrix::read_file(&args.input)?;
            let pts = boundary_polyline(&a, args.samples)?;
            let mut csv = format!("# seed={seed}\ntheta,re,im\n");
            for (m, z) in pts.iter().enumerate() {
                let theta = 2.0 * std::f64::consts::PI * m as f64 / args.samples as f64;
                csv.push_str(&format!("{theta:.16e},{:.16e},{:.16e}\n", z.re, z.im));
            }
            if let Some(path) = &args.svg {
                let spec = PlotSpec {
                    samples: args.samples,
                    ..PlotSpec::default()
                };
                let fit = fit_disc(&a, DEFAULT_DISC_SAMPLES.max(args.samples))?;
                std::fs::write(path, render_svg(&a, &spec, Some(&fit))?)?;
            }
            emit(out, args.out.as_ref(), &csv)?;
            Ok(Outcome::Ok)
        }
        Command::Generate(args) => {
            let (a, record) = generate(&args.family, seed)?;
            let text = a.to_json() + "\n";
            emit(out, args.out.as_ref(), &text)?;
            writeln!(err, "{}", serde_json::to_string(&record)?)?;
            Ok(Outcome::Ok)
        }
        Command::Campaign(args) => {
            let config = CampaignConfig {
                n_trials: args.n_trials,
                seed,
                ker_dims: args.ker_dims.clone(),
                include_structured: !args.no_structured,
                tol_disc: args.tol_disc,
                tol_center: args.tol_center,
                samples: args.samples,
                timestamp: args.timestamp.clone(),
            };
            config.validate()?;
            let records = conjecture_campaign(&config)?;
            let summary = summarize(&config, &records);
            let root = args.out.clone().unwrap_or_else(runs_root);
            let dir = write_campaign(&root, &config, &records, &summary)?;
            writeln!(
                out,
                "{} seed={} trials={} circular={} violations={} structured={}/{} maxCenter={:.17e} dir={}",
                if summary.pass { "PASS" } else { "FAIL" },
                seed,
                summary.n_trials,
                summary.n_circular,
                summary.violations.len(),
                summary.structured_circular,
                summary.structured_total,
                summary.max_center_modulus_circular,
                dir.display()
            )?;
            Ok(if summary.pass { Outcome::Ok } else { Outcome::Violation })
        }
        Command::Identities(args) => {
            if args.samples == 0 {
                return Err(KippError::InvalidArgument("samples must be at least 1".into()));
            }
            let oracle = oracle_identity_suite(args.samples, seed, 1.0)?;
            let s5 = theorem32_identity_check(&s5_parameter_grid(5, seed))?;
            let scan = theorem32_condition_b_scan(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5])?;
            let case2 = case2_identity_check(args.samples.min(50), seed)?;
            let pass = oracle.max_discrepancy < args.tol
                && s5.max_d_rhs_modulus < 1e-12
                && case2.max_d_combination < 1e-10
                && case2.max_c_combination < 1e-10;
            let v = json!({
                "seed": seed,
                "pass": pass,
                "oracle": {
                    "count": oracle.count,
                    "maxDiscrepancy": oracle.max_discrepancy,
                    "meanDiscrepancy": oracle.mean_discrepancy,
                    "worstIndex": oracle.worst_index,
                },
                "s5": {"maxDRhsModulus": s5.max_d_rhs_modulus, "conditionBScan": scan},
                "case2": case2,
            });
            emit(out, args.out.as_ref(), &pretty(&v))?;
            Ok(if pass { Outcome::Ok } else { Outcome::Violation })
        }
    }
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn generate(family: &Family, seed: u64) -> Result<(ComplexMatrix, Value)> {
    Ok(match family {
        Family::Jordan { n } => (gen::jordan_shift(*n)?, json!({"family": "jordan", "n": n, "seed": seed})),
        Family::S5 { a, b, c } => (
            gen::s5_family(*a, *b, *c)?,
            json!({"family": "s5", "a": a, "b": cjson(*b), "c": cjson(*c), "seed": seed}),
        ),
        Family::TwoEllipse { lambdas, r, s } => {
            let l: [C64; 5] = lambdas.0.clone().try_into().map_err(|v: Vec<C64>| {
                KippError::InvalidArgument(format!("two-ellipse needs 5 eigenvalues, got {}", v.len()))
            })?;
            (
                gen::two_ellipse_block(l, *r, *s)?,
                json!({"family": "two-ellipse", "lambdas": l.iter().map(|z| cjson(*z)).collect::<Vec<_>>(), "r": r, "s": s, "seed": seed}),
            )
        }
        Family::Flat { l3, l4, l5, theta, mu, phase_a, phase_b } => (
            gen::flat_3x3(*l3, *l4, *l5, *theta, *mu, *phase_a, *phase_b)?,
            json!({"family": "flat", "l3": cjson(*l3), "l4": cjson(*l4), "l5": cjson(*l5),
                   "theta": theta, "mu": mu, "phaseA": phase_a, "phaseB": phase_b, "seed": seed}),
        ),
        Family::Pi { n, ker } => (
            gen::random_partial_isometry(*n, *ker, seed)?,
            json!({"family": "pi", "n": n, "ker": ker, "seed": seed}),
        ),
        Family::Ker2 { b_equals_a } => (
            gen::ker2_family(seed, *b_equals_a),
            json!({"family": "ker2", "bEqualsA": b_equals_a, "seed": seed}),
        ),
    })
}
